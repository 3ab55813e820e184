//! Termination certificates and the decidable base checker.
//!
//! Base certificates are purely syntactic. `LoopFree` covers programs with
//! neither loops nor `apply`. `Ranking` names, for every loop, a counter
//! variable that guards the loop as `0 < v` and is decremented by a positive
//! constant as the last statement of the body and nowhere else in it. The
//! remaining certificate forms are interpreted by the verifier tower.

use std::collections::BTreeSet;
use std::fmt;

use crate::lang::{BinOp, Expr, Program, Stmt};
use crate::sexp::{self, arity, ParseError, Sexp};

/// Address of a statement: an index into the top-level block, then for each
/// enclosing construct an index into its body. Inside an `if` the first
/// index selects the branch (0 = then, 1 = else) and the next one indexes it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Path(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankingClause {
    pub path: Path,
    pub var: String,
    pub decrement: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Certificate {
    LoopFree,
    Ranking(Vec<RankingClause>),
    /// Names a verifier descriptor whose diagonal program is the subject.
    Diagonal(String),
    /// Appeals to an ordinal level below the checking verifier's level.
    Reflection(String, Box<Certificate>),
    Left(Box<Certificate>),
    Right(Box<Certificate>),
    Singleton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    NotBaseCertificate,
    ContainsApply,
    ContainsWhile,
    DuplicateClause,
    UnresolvedPath,
    UncoveredLoop,
    ZeroDecrement,
    GuardShape,
    DecrementShape,
    ExtraAssignment,
    BadDescriptor,
    BadOrdinal,
    DiagonalNotTower,
    LevelNotBelow,
    NotDiagonalProgram,
    SingletonMismatch,
    WrongCertificateForm,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::NotBaseCertificate => "not-base-certificate",
            RejectReason::ContainsApply => "contains-apply",
            RejectReason::ContainsWhile => "contains-while",
            RejectReason::DuplicateClause => "duplicate-clause",
            RejectReason::UnresolvedPath => "unresolved-path",
            RejectReason::UncoveredLoop => "uncovered-loop",
            RejectReason::ZeroDecrement => "zero-decrement",
            RejectReason::GuardShape => "guard-shape",
            RejectReason::DecrementShape => "decrement-shape",
            RejectReason::ExtraAssignment => "extra-assignment",
            RejectReason::BadDescriptor => "bad-descriptor",
            RejectReason::BadOrdinal => "bad-ordinal",
            RejectReason::DiagonalNotTower => "diagonal-not-tower",
            RejectReason::LevelNotBelow => "level-not-below",
            RejectReason::NotDiagonalProgram => "not-diagonal-program",
            RejectReason::SingletonMismatch => "singleton-mismatch",
            RejectReason::WrongCertificateForm => "wrong-certificate-form",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckResult {
    Accept,
    Reject { reason: RejectReason, locus: Option<Path> },
}

impl CheckResult {
    pub fn reject(reason: RejectReason) -> CheckResult {
        CheckResult::Reject { reason, locus: None }
    }

    fn reject_at(reason: RejectReason, path: &Path) -> CheckResult {
        CheckResult::Reject {
            reason,
            locus: Some(path.clone()),
        }
    }

    pub fn is_accept(&self) -> bool {
        matches!(self, CheckResult::Accept)
    }

    pub fn reason(&self) -> Option<RejectReason> {
        match self {
            CheckResult::Accept => None,
            CheckResult::Reject { reason, .. } => Some(*reason),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckResult::Accept => f.write_str("ACCEPT"),
            CheckResult::Reject { reason, locus: None } => write!(f, "REJECT {reason}"),
            CheckResult::Reject {
                reason,
                locus: Some(path),
            } => write!(f, "REJECT {reason} at {path}"),
        }
    }
}

/// Every `while` in `program` together with its path, in pre-order.
pub fn loops(program: &Program) -> Vec<(Path, &Stmt)> {
    fn walk<'a>(stmts: &'a [Stmt], prefix: &mut Vec<usize>, out: &mut Vec<(Path, &'a Stmt)>) {
        for (i, stmt) in stmts.iter().enumerate() {
            prefix.push(i);
            match stmt {
                Stmt::Set(..) => {}
                Stmt::While { body, .. } => {
                    out.push((Path(prefix.clone()), stmt));
                    walk(body, prefix, out);
                }
                Stmt::If {
                    then_body,
                    else_body,
                    ..
                } => {
                    for (branch, body) in [then_body, else_body].into_iter().enumerate() {
                        prefix.push(branch);
                        walk(body, prefix, out);
                        prefix.pop();
                    }
                }
            }
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    walk(&program.body, &mut Vec::new(), &mut out);
    out
}

/// Follows `path` from the top-level block; `None` if it does not land on a statement.
pub fn resolve<'a>(program: &'a Program, path: &Path) -> Option<&'a Stmt> {
    let mut block: &[Stmt] = &program.body;
    let mut indices = path.0.iter();
    loop {
        let stmt = block.get(*indices.next()?)?;
        if indices.len() == 0 {
            return Some(stmt);
        }
        block = match stmt {
            Stmt::Set(..) => return None,
            Stmt::While { body, .. } => body,
            Stmt::If {
                then_body,
                else_body,
                ..
            } => match indices.next()? {
                0 => then_body,
                1 => else_body,
                _ => return None,
            },
        };
    }
}

fn is_counter_guard(guard: &Expr, var: &str) -> bool {
    matches!(guard, Expr::Binary(BinOp::Lt, a, b)
        if **a == Expr::Nat(0) && matches!(&**b, Expr::Var(v) if v == var))
}

fn is_counter_step(stmt: &Stmt, var: &str, decrement: u64) -> bool {
    matches!(stmt, Stmt::Set(target, Expr::Binary(BinOp::Sub, a, b))
        if target == var
            && matches!(&**a, Expr::Var(v) if v == var)
            && **b == Expr::Nat(decrement))
}

fn assigns(stmts: &[Stmt], var: &str) -> bool {
    stmts.iter().any(|stmt| match stmt {
        Stmt::Set(target, _) => target == var,
        Stmt::While { body, .. } => assigns(body, var),
        Stmt::If {
            then_body,
            else_body,
            ..
        } => assigns(then_body, var) || assigns(else_body, var),
    })
}

fn check_clause(program: &Program, clause: &RankingClause) -> CheckResult {
    let path = &clause.path;
    let Some(Stmt::While { guard, body }) = resolve(program, path) else {
        return CheckResult::reject_at(RejectReason::UnresolvedPath, path);
    };
    if clause.decrement == 0 {
        return CheckResult::reject_at(RejectReason::ZeroDecrement, path);
    }
    if !is_counter_guard(guard, &clause.var) {
        return CheckResult::reject_at(RejectReason::GuardShape, path);
    }
    let Some((last, rest)) = body.split_last() else {
        return CheckResult::reject_at(RejectReason::DecrementShape, path);
    };
    if !is_counter_step(last, &clause.var, clause.decrement) {
        return CheckResult::reject_at(RejectReason::DecrementShape, path);
    }
    if assigns(rest, &clause.var) {
        return CheckResult::reject_at(RejectReason::ExtraAssignment, path);
    }
    CheckResult::Accept
}

pub fn check_base_certificate(cert: &Certificate, program: &Program) -> CheckResult {
    match cert {
        Certificate::LoopFree => {
            if program.contains_apply() {
                CheckResult::reject(RejectReason::ContainsApply)
            } else if program.contains_while() {
                CheckResult::reject(RejectReason::ContainsWhile)
            } else {
                CheckResult::Accept
            }
        }
        Certificate::Ranking(clauses) => {
            if program.contains_apply() {
                return CheckResult::reject(RejectReason::ContainsApply);
            }
            let mut covered = BTreeSet::new();
            for clause in clauses {
                if !covered.insert(&clause.path) {
                    return CheckResult::reject_at(RejectReason::DuplicateClause, &clause.path);
                }
            }
            for clause in clauses {
                let result = check_clause(program, clause);
                if !result.is_accept() {
                    return result;
                }
            }
            for (path, _) in loops(program) {
                if !covered.contains(&path) {
                    return CheckResult::reject_at(RejectReason::UncoveredLoop, &path);
                }
            }
            CheckResult::Accept
        }
        _ => CheckResult::reject(RejectReason::NotBaseCertificate),
    }
}

/// Finds a base certificate by reading off the counter pattern of each loop.
pub fn infer_certificate(program: &Program) -> Option<Certificate> {
    if check_base_certificate(&Certificate::LoopFree, program).is_accept() {
        return Some(Certificate::LoopFree);
    }
    if program.contains_apply() {
        return None;
    }
    let clauses = loops(program)
        .into_iter()
        .map(|(path, stmt)| {
            let Stmt::While { guard, body } = stmt else {
                unreachable!("loops() yields while statements")
            };
            let Expr::Binary(BinOp::Lt, _, counter) = guard else {
                return None;
            };
            let Expr::Var(var) = &**counter else {
                return None;
            };
            let Some(Stmt::Set(_, Expr::Binary(BinOp::Sub, _, step))) = body.last() else {
                return None;
            };
            let Expr::Nat(decrement) = **step else {
                return None;
            };
            Some(RankingClause {
                path,
                var: var.clone(),
                decrement,
            })
        })
        .collect::<Option<Vec<_>>>()?;
    let cert = Certificate::Ranking(clauses);
    check_base_certificate(&cert, program).is_accept().then_some(cert)
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(path")?;
        for i in &self.0 {
            write!(f, " {i}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::LoopFree => f.write_str("(loopfree)"),
            Certificate::Ranking(clauses) => {
                f.write_str("(ranking")?;
                for c in clauses {
                    write!(f, " ({} (var {}) (dec {}))", c.path, c.var, c.decrement)?;
                }
                f.write_str(")")
            }
            Certificate::Diagonal(desc) => write!(f, "(diagonal {})", sexp::quoted(desc)),
            Certificate::Reflection(ord, inner) => write!(f, "(reflection {} {inner})", sexp::quoted(ord)),
            Certificate::Left(inner) => write!(f, "(left {inner})"),
            Certificate::Right(inner) => write!(f, "(right {inner})"),
            Certificate::Singleton => f.write_str("(singleton)"),
        }
    }
}

pub fn print_certificate(cert: &Certificate) -> String {
    cert.to_string()
}

pub fn parse_certificate(text: &str) -> Result<Certificate, ParseError> {
    cert_from_sexp(&sexp::read(text)?)
}

fn clause_from_sexp(form: &Sexp) -> Result<RankingClause, ParseError> {
    let parts = form.expect_list()?;
    let [path, var, dec] = parts else {
        return Err(form.error("a ranking clause is ((path N*) (var NAME) (dec K))"));
    };
    let path = match path.expect_form()? {
        ("path", indices) => Path(
            indices
                .iter()
                .map(|i| i.expect_nat().map(|n| n as usize))
                .collect::<Result<_, _>>()?,
        ),
        (head, _) => return Err(path.error(format!("expected `path`, found `{head}`"))),
    };
    let var = match var.expect_form()? {
        ("var", args) => arity(var, "var", args, 1)?[0].expect_name()?.to_string(),
        (head, _) => return Err(var.error(format!("expected `var`, found `{head}`"))),
    };
    let decrement = match dec.expect_form()? {
        ("dec", args) => {
            let k = arity(dec, "dec", args, 1)?[0].expect_nat()?;
            if k == 0 {
                return Err(dec.error("decrement must be positive"));
            }
            k
        }
        (head, _) => return Err(dec.error(format!("expected `dec`, found `{head}`"))),
    };
    Ok(RankingClause { path, var, decrement })
}

fn cert_from_sexp(form: &Sexp) -> Result<Certificate, ParseError> {
    let (head, args) = form.expect_form()?;
    let boxed = |args: &[Sexp]| cert_from_sexp(&arity(form, head, args, 1)?[0]).map(Box::new);
    match head {
        "loopfree" => arity(form, head, args, 0).map(|_| Certificate::LoopFree),
        "singleton" => arity(form, head, args, 0).map(|_| Certificate::Singleton),
        "ranking" => {
            if args.is_empty() {
                return Err(form.error("`ranking` needs at least one clause"));
            }
            Ok(Certificate::Ranking(args.iter().map(clause_from_sexp).collect::<Result<_, _>>()?))
        }
        "diagonal" => Ok(Certificate::Diagonal(
            arity(form, head, args, 1)?[0].expect_str()?.to_string(),
        )),
        "reflection" => {
            let args = arity(form, head, args, 2)?;
            Ok(Certificate::Reflection(
                args[0].expect_str()?.to_string(),
                Box::new(cert_from_sexp(&args[1])?),
            ))
        }
        "left" => Ok(Certificate::Left(boxed(args)?)),
        "right" => Ok(Certificate::Right(boxed(args)?)),
        _ => Err(form.error(format!("unknown certificate `{head}`"))),
    }
}
