//! The object language: single-parameter programs over naturals, booleans,
//! strings and pairs, with `verify` and `apply` primitives that let programs
//! inspect proofs and run other programs given as text.

mod eval;
mod syntax;

use std::fmt;
use std::sync::Arc;

pub use eval::{run, RejectAll, RunResult, RuntimeError, VerifyOracle, MAX_APPLY_DEPTH};
pub use syntax::{parse_program, parse_value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub param: String,
    pub body: Vec<Stmt>,
    pub ret: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Set(String, Expr),
    While {
        guard: Expr,
        body: Vec<Stmt>,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    /// Truncated subtraction: `a - b` is 0 when `b > a`.
    Sub,
    Mul,
    Lt,
    Eq,
    And,
    Or,
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    ToBool,
    Fst,
    Snd,
    IsPair,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Nat(u64),
    Bool(bool),
    Str(Arc<str>),
    Var(String),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Verify {
        verifier: Box<Expr>,
        proof: Box<Expr>,
        program: Box<Expr>,
    },
    Apply {
        program: Box<Expr>,
        input: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Nat(u64),
    Bool(bool),
    Str(Arc<str>),
    Pair(Arc<PairNode>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairNode {
    pub fst: Value,
    pub snd: Value,
    depth: usize,
}

impl BinOp {
    pub const ALL: [BinOp; 8] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Lt,
        BinOp::Eq,
        BinOp::And,
        BinOp::Or,
        BinOp::Pair,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            BinOp::Add => "add",
            BinOp::Sub => "sub",
            BinOp::Mul => "mul",
            BinOp::Lt => "lt",
            BinOp::Eq => "eq",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Pair => "pair",
        }
    }
}

impl UnOp {
    pub const ALL: [UnOp; 5] = [UnOp::Not, UnOp::ToBool, UnOp::Fst, UnOp::Snd, UnOp::IsPair];

    pub fn keyword(self) -> &'static str {
        match self {
            UnOp::Not => "not",
            UnOp::ToBool => "tobool",
            UnOp::Fst => "fst",
            UnOp::Snd => "snd",
            UnOp::IsPair => "ispair",
        }
    }
}

impl Expr {
    pub fn str(s: &str) -> Expr {
        Expr::Str(Arc::from(s))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn unary(op: UnOp, a: Expr) -> Expr {
        Expr::Unary(op, Box::new(a))
    }

    /// Number of expression nodes, this one included.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Nat(_) | Expr::Bool(_) | Expr::Str(_) | Expr::Var(_) => 0,
            Expr::Binary(_, a, b) => a.size() + b.size(),
            Expr::Unary(_, a) => a.size(),
            Expr::Verify {
                verifier,
                proof,
                program,
            } => verifier.size() + proof.size() + program.size(),
            Expr::Apply { program, input } => program.size() + input.size(),
        }
    }

    pub fn contains_apply(&self) -> bool {
        match self {
            Expr::Apply { .. } => true,
            Expr::Nat(_) | Expr::Bool(_) | Expr::Str(_) | Expr::Var(_) => false,
            Expr::Binary(_, a, b) => a.contains_apply() || b.contains_apply(),
            Expr::Unary(_, a) => a.contains_apply(),
            Expr::Verify {
                verifier,
                proof,
                program,
            } => verifier.contains_apply() || proof.contains_apply() || program.contains_apply(),
        }
    }
}

impl Stmt {
    pub fn size(&self) -> usize {
        1 + match self {
            Stmt::Set(_, e) => e.size(),
            Stmt::While { guard, body } => guard.size() + block_size(body),
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => cond.size() + block_size(then_body) + block_size(else_body),
        }
    }

    pub fn contains_apply(&self) -> bool {
        match self {
            Stmt::Set(_, e) => e.contains_apply(),
            Stmt::While { guard, body } => guard.contains_apply() || body.iter().any(Stmt::contains_apply),
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => {
                cond.contains_apply()
                    || then_body.iter().any(Stmt::contains_apply)
                    || else_body.iter().any(Stmt::contains_apply)
            }
        }
    }

    pub fn contains_while(&self) -> bool {
        match self {
            Stmt::Set(..) => false,
            Stmt::While { .. } => true,
            Stmt::If {
                then_body, else_body, ..
            } => then_body.iter().chain(else_body).any(Stmt::contains_while),
        }
    }
}

fn block_size(stmts: &[Stmt]) -> usize {
    stmts.iter().map(Stmt::size).sum()
}

impl Program {
    /// Number of statement and expression nodes; the unit of the fuel model.
    pub fn size(&self) -> usize {
        block_size(&self.body) + self.ret.size()
    }

    pub fn contains_apply(&self) -> bool {
        self.body.iter().any(Stmt::contains_apply) || self.ret.contains_apply()
    }

    pub fn contains_while(&self) -> bool {
        self.body.iter().any(Stmt::contains_while)
    }

    /// Canonical text; two programs are equal iff their canonical texts are.
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(Arc::from(s))
    }

    pub fn pair(fst: Value, snd: Value) -> Value {
        let depth = 1 + fst.depth().max(snd.depth());
        Value::Pair(Arc::new(PairNode { fst, snd, depth }))
    }

    /// Pair nesting depth; scalars have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Value::Pair(p) => p.depth,
            _ => 0,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Nat(_) => "nat",
            Value::Bool(_) => "bool",
            Value::Str(_) => "str",
            Value::Pair(_) => "pair",
        }
    }

    /// Truthiness used by `tobool`: zero, false and the empty string are false.
    pub fn truthy(&self) -> bool {
        match self {
            Value::Nat(n) => *n != 0,
            Value::Bool(b) => *b,
            Value::Str(s) => !s.is_empty(),
            Value::Pair(_) => true,
        }
    }
}

pub fn print_program(program: &Program) -> String {
    program.to_string()
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(fun ({}) (block", self.param)?;
        for stmt in &self.body {
            write!(f, " {stmt}")?;
        }
        write!(f, " (return {})))", self.ret)
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, stmts: &[Stmt]) -> fmt::Result {
    f.write_str("(body")?;
    for stmt in stmts {
        write!(f, " {stmt}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Set(name, e) => write!(f, "(set {name} {e})"),
            Stmt::While { guard, body } => {
                write!(f, "(while {guard} ")?;
                write_body(f, body)?;
                f.write_str(")")
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => {
                write!(f, "(if {cond} ")?;
                write_body(f, then_body)?;
                f.write_str(" ")?;
                write_body(f, else_body)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Nat(n) => write!(f, "(nat {n})"),
            Expr::Bool(b) => write!(f, "(bool {b})"),
            Expr::Str(s) => write!(f, "(str {})", crate::sexp::quoted(s)),
            Expr::Var(name) => write!(f, "(var {name})"),
            Expr::Binary(op, a, b) => write!(f, "({} {a} {b})", op.keyword()),
            Expr::Unary(op, a) => write!(f, "({} {a})", op.keyword()),
            Expr::Verify {
                verifier,
                proof,
                program,
            } => write!(f, "(verify {verifier} {proof} {program})"),
            Expr::Apply { program, input } => write!(f, "(apply {program} {input})"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "(nat {n})"),
            Value::Bool(b) => write!(f, "(bool {b})"),
            Value::Str(s) => write!(f, "(str {})", crate::sexp::quoted(s)),
            Value::Pair(p) => write!(f, "(pair {} {})", p.fst, p.snd),
        }
    }
}
