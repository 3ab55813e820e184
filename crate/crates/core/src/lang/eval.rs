//! Big-step, fuel-bounded evaluation.
//!
//! Every statement and expression node costs one unit of fuel when it is
//! evaluated; a `while` is charged once per guard test. `apply` runs the
//! callee on the caller's remaining budget. `verify` is charged one unit and
//! delegates to a host-level oracle, which must be total.

use std::collections::HashMap;
use std::fmt;

use super::{parse_program, BinOp, Expr, Program, Stmt, UnOp, Value};
use crate::sexp::ParseError;

/// Nested `apply` calls beyond this depth fail with [`RuntimeError::ApplyDepth`].
pub const MAX_APPLY_DEPTH: usize = 32;

/// Pairs nested deeper than this cannot be built at run time.
pub const MAX_VALUE_DEPTH: usize = 1024;

/// Host-side decision procedure behind the `verify` primitive.
pub trait VerifyOracle {
    fn verify(&self, verifier: &str, proof: &str, program: &str) -> bool;
}

impl<F> VerifyOracle for F
where
    F: Fn(&str, &str, &str) -> bool,
{
    fn verify(&self, verifier: &str, proof: &str, program: &str) -> bool {
        self(verifier, proof, program)
    }
}

/// Oracle for contexts without verifiers: `verify` is always false.
#[derive(Debug, Clone, Copy, Default)]
pub struct RejectAll;

impl VerifyOracle for RejectAll {
    fn verify(&self, _: &str, _: &str, _: &str) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuntimeError {
    Unbound(String),
    TypeMismatch { op: &'static str, found: &'static str },
    Overflow(&'static str),
    ApplyParse(ParseError),
    ApplyDepth,
    ValueDepth,
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeError::Unbound(name) => write!(f, "unbound variable `{name}`"),
            RuntimeError::TypeMismatch { op, found } => write!(f, "type mismatch in `{op}`: found {found}"),
            RuntimeError::Overflow(op) => write!(f, "arithmetic overflow in `{op}`"),
            RuntimeError::ApplyParse(err) => write!(f, "apply of unparseable program ({err})"),
            RuntimeError::ApplyDepth => write!(f, "apply nesting exceeds {MAX_APPLY_DEPTH}"),
            RuntimeError::ValueDepth => write!(f, "pair nesting exceeds {MAX_VALUE_DEPTH}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunResult {
    Halt(Value),
    RuntimeError(RuntimeError),
    OutOfFuel,
}

impl RunResult {
    /// Both normal results and runtime errors count as halting.
    pub fn halted(&self) -> bool {
        !matches!(self, RunResult::OutOfFuel)
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            RunResult::Halt(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for RunResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunResult::Halt(v) => write!(f, "HALT {v}"),
            RunResult::RuntimeError(err) => write!(f, "ERROR {err}"),
            RunResult::OutOfFuel => f.write_str("OUT-OF-FUEL"),
        }
    }
}

enum Stop {
    Error(RuntimeError),
    OutOfFuel,
}

impl From<RuntimeError> for Stop {
    fn from(err: RuntimeError) -> Self {
        Stop::Error(err)
    }
}

type Env = HashMap<String, Value>;

struct Machine<'o> {
    fuel: u64,
    oracle: &'o dyn VerifyOracle,
}

pub fn run(program: &Program, input: Value, fuel: u64, oracle: &dyn VerifyOracle) -> RunResult {
    let mut machine = Machine { fuel, oracle };
    match machine.call(program, input, 0) {
        Ok(v) => RunResult::Halt(v),
        Err(Stop::Error(err)) => RunResult::RuntimeError(err),
        Err(Stop::OutOfFuel) => RunResult::OutOfFuel,
    }
}

fn mismatch(op: &'static str, found: &Value) -> Stop {
    Stop::Error(RuntimeError::TypeMismatch { op, found: found.kind() })
}

impl Machine<'_> {
    fn tick(&mut self) -> Result<(), Stop> {
        if self.fuel == 0 {
            return Err(Stop::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn call(&mut self, program: &Program, input: Value, depth: usize) -> Result<Value, Stop> {
        let mut env = Env::new();
        env.insert(program.param.clone(), input);
        self.exec_block(&mut env, &program.body, depth)?;
        self.eval(&env, &program.ret, depth)
    }

    fn exec_block(&mut self, env: &mut Env, stmts: &[Stmt], depth: usize) -> Result<(), Stop> {
        stmts.iter().try_for_each(|stmt| self.exec(env, stmt, depth))
    }

    fn eval_bool(&mut self, env: &Env, e: &Expr, op: &'static str, depth: usize) -> Result<bool, Stop> {
        match self.eval(env, e, depth)? {
            Value::Bool(b) => Ok(b),
            other => Err(mismatch(op, &other)),
        }
    }

    fn exec(&mut self, env: &mut Env, stmt: &Stmt, depth: usize) -> Result<(), Stop> {
        match stmt {
            Stmt::Set(name, e) => {
                self.tick()?;
                let v = self.eval(env, e, depth)?;
                env.insert(name.clone(), v);
            }
            Stmt::While { guard, body } => loop {
                self.tick()?;
                if !self.eval_bool(env, guard, "while", depth)? {
                    break;
                }
                self.exec_block(env, body, depth)?;
            },
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => {
                self.tick()?;
                let branch = if self.eval_bool(env, cond, "if", depth)? {
                    then_body
                } else {
                    else_body
                };
                self.exec_block(env, branch, depth)?;
            }
        }
        Ok(())
    }

    fn eval(&mut self, env: &Env, e: &Expr, depth: usize) -> Result<Value, Stop> {
        self.tick()?;
        match e {
            Expr::Nat(n) => Ok(Value::Nat(*n)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Str(s) => Ok(Value::Str(s.clone())),
            Expr::Var(name) => env
                .get(name)
                .cloned()
                .ok_or_else(|| RuntimeError::Unbound(name.clone()).into()),
            Expr::Binary(op, a, b) => {
                let a = self.eval(env, a, depth)?;
                let b = self.eval(env, b, depth)?;
                binary(*op, a, b)
            }
            Expr::Unary(op, a) => {
                let a = self.eval(env, a, depth)?;
                unary(*op, a)
            }
            Expr::Verify {
                verifier,
                proof,
                program,
            } => {
                let verifier = self.eval(env, verifier, depth)?;
                let proof = self.eval(env, proof, depth)?;
                let program = self.eval(env, program, depth)?;
                let accepted = match (&verifier, &proof, &program) {
                    (Value::Str(v), Value::Str(c), Value::Str(p)) => self.oracle.verify(v, c, p),
                    _ => false,
                };
                Ok(Value::Bool(accepted))
            }
            Expr::Apply { program, input } => {
                let text = match self.eval(env, program, depth)? {
                    Value::Str(s) => s,
                    other => return Err(mismatch("apply", &other)),
                };
                let input = self.eval(env, input, depth)?;
                let callee = parse_program(&text).map_err(RuntimeError::ApplyParse)?;
                if depth >= MAX_APPLY_DEPTH {
                    return Err(RuntimeError::ApplyDepth.into());
                }
                match self.call(&callee, input, depth + 1) {
                    Ok(v) => Ok(v),
                    Err(Stop::Error(_)) => Ok(Value::Bool(false)),
                    Err(Stop::OutOfFuel) => Err(Stop::OutOfFuel),
                }
            }
        }
    }
}

fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, Stop> {
    let keyword = op.keyword();
    match op {
        BinOp::Eq => return Ok(Value::Bool(a == b)),
        BinOp::Pair => {
            if a.depth().max(b.depth()) >= MAX_VALUE_DEPTH {
                return Err(RuntimeError::ValueDepth.into());
            }
            return Ok(Value::pair(a, b));
        }
        BinOp::And | BinOp::Or => {
            return match (a, b) {
                (Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(if op == BinOp::And { x && y } else { x || y })),
                (Value::Bool(_), other) | (other, _) => Err(mismatch(keyword, &other)),
            }
        }
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Lt => {}
    }
    let (x, y) = match (a, b) {
        (Value::Nat(x), Value::Nat(y)) => (x, y),
        (Value::Nat(_), other) | (other, _) => return Err(mismatch(keyword, &other)),
    };
    let overflow = || Stop::Error(RuntimeError::Overflow(keyword));
    Ok(match op {
        BinOp::Add => Value::Nat(x.checked_add(y).ok_or_else(overflow)?),
        BinOp::Sub => Value::Nat(x.saturating_sub(y)),
        BinOp::Mul => Value::Nat(x.checked_mul(y).ok_or_else(overflow)?),
        BinOp::Lt => Value::Bool(x < y),
        _ => unreachable!("handled above"),
    })
}

fn unary(op: UnOp, a: Value) -> Result<Value, Stop> {
    match (op, a) {
        (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
        (UnOp::ToBool, v) => Ok(Value::Bool(v.truthy())),
        (UnOp::IsPair, v) => Ok(Value::Bool(matches!(v, Value::Pair(_)))),
        (UnOp::Fst, Value::Pair(p)) => Ok(p.fst.clone()),
        (UnOp::Snd, Value::Pair(p)) => Ok(p.snd.clone()),
        (op, other) => Err(mismatch(op.keyword(), &other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "(fun (x) (block (return (bool true))))";
    const COUNTDOWN: &str = "(fun (x) (block (set n (var x)) (while (lt (nat 0) (var n)) (body (set n (sub (var n) (nat 1))))) (return (bool true))))";

    fn prog(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    fn ret(expr: &str) -> Program {
        prog(&format!("(fun (x) (block (return {expr})))"))
    }

    /// Closed form for COUNTDOWN under the cost model: `set` + `var` (2),
    /// each of the n+1 guard tests costs while + lt + nat + var (4), each of the
    /// n bodies costs set + sub + var + nat (4), and the return literal costs 1.
    fn countdown_cost(n: u64) -> u64 {
        2 + 4 * (n + 1) + 4 * n + 1
    }

    #[test]
    fn minimal_program_halts_true() {
        assert_eq!(run(&prog(MINIMAL), Value::Nat(5), 100, &RejectAll), RunResult::Halt(Value::Bool(true)));
        assert_eq!(run(&prog(MINIMAL), Value::Nat(5), 1, &RejectAll), RunResult::Halt(Value::Bool(true)));
        assert_eq!(run(&prog(MINIMAL), Value::Nat(5), 0, &RejectAll), RunResult::OutOfFuel);
    }

    #[test]
    fn countdown_matches_step_count_oracle() {
        let p = prog(COUNTDOWN);
        assert_eq!(run(&p, Value::Nat(3), 10_000, &RejectAll), RunResult::Halt(Value::Bool(true)));
        assert_eq!(run(&p, Value::Nat(3), 2, &RejectAll), RunResult::OutOfFuel);
        for n in [0, 1, 3, 17] {
            let exact = countdown_cost(n);
            assert_eq!(run(&p, Value::Nat(n), exact, &RejectAll), RunResult::Halt(Value::Bool(true)), "n={n}");
            assert_eq!(run(&p, Value::Nat(n), exact - 1, &RejectAll), RunResult::OutOfFuel, "n={n}");
        }
    }

    #[test]
    fn unbound_variable_is_runtime_error() {
        let r = run(&prog("(fun (x) (block (return (var y))))"), Value::Nat(0), 100, &RejectAll);
        assert_eq!(r, RunResult::RuntimeError(RuntimeError::Unbound("y".into())));
        assert!(r.halted());
    }

    #[test]
    fn arithmetic() {
        let eval = |e: &str| run(&ret(e), Value::Nat(0), 100, &RejectAll);
        assert_eq!(eval("(sub (nat 2) (nat 5))"), RunResult::Halt(Value::Nat(0)));
        assert_eq!(eval("(mul (nat 6) (add (nat 3) (nat 4)))"), RunResult::Halt(Value::Nat(42)));
        assert_eq!(eval("(lt (nat 1) (nat 2))"), RunResult::Halt(Value::Bool(true)));
        assert_eq!(
            eval("(add (nat 18446744073709551615) (nat 1))"),
            RunResult::RuntimeError(RuntimeError::Overflow("add"))
        );
        assert!(matches!(
            eval("(add (nat 1) (bool true))"),
            RunResult::RuntimeError(RuntimeError::TypeMismatch { op: "add", found: "bool" })
        ));
        assert_eq!(eval("(eq (pair (nat 1) (str \"a\")) (pair (nat 1) (str \"a\")))"), RunResult::Halt(Value::Bool(true)));
        assert!(eval("(fst (nat 1))").halted());
    }

    #[test]
    fn tobool_truthiness() {
        let eval = |e: &str| run(&ret(&format!("(tobool {e})")), Value::Nat(0), 100, &RejectAll);
        assert_eq!(eval("(nat 0)"), RunResult::Halt(Value::Bool(false)));
        assert_eq!(eval("(nat 9)"), RunResult::Halt(Value::Bool(true)));
        assert_eq!(eval("(str \"\")"), RunResult::Halt(Value::Bool(false)));
        assert_eq!(eval("(str \"a\")"), RunResult::Halt(Value::Bool(true)));
        assert_eq!(eval("(pair (nat 0) (nat 0))"), RunResult::Halt(Value::Bool(true)));
    }

    #[test]
    fn apply_runs_callee_and_absorbs_errors() {
        let callee = "(fun (y) (block (return (add (var y) (nat 1)))))";
        let caller = ret(&format!("(apply (str {}) (nat 41))", crate::sexp::quoted(callee)));
        assert_eq!(run(&caller, Value::Nat(0), 100, &RejectAll), RunResult::Halt(Value::Nat(42)));

        let failing = "(fun (y) (block (return (var nope))))";
        let caller = ret(&format!("(not (apply (str {}) (nat 0)))", crate::sexp::quoted(failing)));
        assert_eq!(run(&caller, Value::Nat(0), 100, &RejectAll), RunResult::Halt(Value::Bool(true)));

        let garbage = ret("(apply (str \"(fun\") (nat 0))");
        assert!(matches!(
            run(&garbage, Value::Nat(0), 100, &RejectAll),
            RunResult::RuntimeError(RuntimeError::ApplyParse(_))
        ));
    }

    #[test]
    fn apply_shares_fuel() {
        let quoted = crate::sexp::quoted(COUNTDOWN);
        let caller = ret(&format!("(apply (str {quoted}) (nat 3))"));
        // apply + str + nat, then the callee itself.
        let exact = 3 + countdown_cost(3);
        assert_eq!(run(&caller, Value::Nat(0), exact, &RejectAll), RunResult::Halt(Value::Bool(true)));
        assert_eq!(run(&caller, Value::Nat(0), exact - 1, &RejectAll), RunResult::OutOfFuel);
    }

    #[test]
    fn self_application_hits_depth_limit() {
        // The program applies its own input to itself.
        let p = prog("(fun (x) (block (return (apply (var x) (var x)))))");
        let input = Value::str(&p.to_string());
        let r = run(&p, input, 1_000_000, &RejectAll);
        // Every level absorbs its callee's error, so the top level sees `false`.
        assert_eq!(r, RunResult::Halt(Value::Bool(false)));
    }

    #[test]
    fn verify_uses_oracle_and_rejects_non_strings() {
        let oracle = |v: &str, c: &str, p: &str| v == "v" && c == "c" && p == "p";
        let yes = ret("(verify (str \"v\") (str \"c\") (str \"p\"))");
        let no = ret("(verify (str \"v\") (nat 1) (str \"p\"))");
        assert_eq!(run(&yes, Value::Nat(0), 100, &oracle), RunResult::Halt(Value::Bool(true)));
        assert_eq!(run(&no, Value::Nat(0), 100, &oracle), RunResult::Halt(Value::Bool(false)));
        assert_eq!(run(&yes, Value::Nat(0), 100, &RejectAll), RunResult::Halt(Value::Bool(false)));
        // verify node plus its three literal arguments
        assert_eq!(run(&yes, Value::Nat(0), 4, &oracle), RunResult::Halt(Value::Bool(true)));
        assert_eq!(run(&yes, Value::Nat(0), 3, &oracle), RunResult::OutOfFuel);
    }

    #[test]
    fn pair_depth_is_capped() {
        let p = prog(
            "(fun (x) (block (set v (nat 0)) (set n (var x)) (while (lt (nat 0) (var n)) (body (set v (pair (var v) (var v))) (set n (sub (var n) (nat 1))))) (return (ispair (var v)))))",
        );
        assert_eq!(run(&p, Value::Nat(10), 10_000, &RejectAll), RunResult::Halt(Value::Bool(true)));
        assert_eq!(
            run(&p, Value::Nat(5000), 1_000_000, &RejectAll),
            RunResult::RuntimeError(RuntimeError::ValueDepth)
        );
    }

    #[test]
    fn while_guard_must_be_bool() {
        let p = prog("(fun (x) (block (while (nat 1) (body)) (return (nat 0))))");
        assert!(matches!(
            run(&p, Value::Nat(0), 100, &RejectAll),
            RunResult::RuntimeError(RuntimeError::TypeMismatch { op: "while", .. })
        ));
    }
}
