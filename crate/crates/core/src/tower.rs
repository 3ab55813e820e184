//! Verifier descriptors and the ordinal-indexed tower of verifiers.
//!
//! `tower α` checks base certificates, diagonal programs of towers strictly
//! below `α`, and reflection certificates that defer to a lower level.
//! `singleton "P"` accepts exactly the program `P`, and `union (A) (B)`
//! accepts whatever either side accepts.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::lang::{self, parse_program, Expr, Program, Stmt, VerifyOracle};
use crate::ordinal::{self, classify, compare, fundamental_sequence, Class, Ordinal, OrdinalError};
use crate::proof::{self, check_base_certificate, infer_certificate, CheckResult, Certificate, RejectReason};
use crate::sexp::{self, ParseError};

/// Maximum `union` nesting accepted by the descriptor parser.
pub const MAX_NESTING: usize = 64;

/// Number of fundamental-sequence elements sampled per limit while searching.
pub const FRONTIER_SAMPLES: u64 = 4;

/// The diagonal program, with `%V%` standing for the quoted descriptor.
pub const DIAGONAL_TEMPLATE: &str = "(fun (x) (block (if (ispair (var x)) (body (set pi (fst (var x))) (set t (snd (var x))) (if (and (and (eq (ispair (var pi)) (bool false)) (eq (ispair (var t)) (bool false))) (verify (str \"%V%\") (var pi) (var t))) (body (set r (not (tobool (apply (var t) (var x)))))) (body (set r (bool false))))) (body (set r (bool false)))) (return (var r))))";

const PLACEHOLDER: &str = "%V%";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VerifierDesc {
    Tower(Ordinal),
    Singleton(Program),
    Union(Box<VerifierDesc>, Box<VerifierDesc>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DescError {
    #[error("descriptor parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
    #[error("singleton program: {0}")]
    Program(#[from] ParseError),
    #[error("singleton program text is not canonical")]
    NonCanonical,
}

impl VerifierDesc {
    pub fn tower(level: Ordinal) -> VerifierDesc {
        VerifierDesc::Tower(level)
    }

    pub fn union(a: VerifierDesc, b: VerifierDesc) -> VerifierDesc {
        VerifierDesc::Union(Box::new(a), Box::new(b))
    }

    pub fn level(&self) -> Option<&Ordinal> {
        match self {
            VerifierDesc::Tower(alpha) => Some(alpha),
            _ => None,
        }
    }
}

impl fmt::Display for VerifierDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifierDesc::Tower(alpha) => write!(f, "tower {alpha}"),
            VerifierDesc::Singleton(p) => write!(f, "singleton {}", sexp::quoted(&p.to_string())),
            VerifierDesc::Union(a, b) => write!(f, "union ({a}) ({b})"),
        }
    }
}

pub fn print_desc(v: &VerifierDesc) -> String {
    v.to_string()
}

pub fn parse_desc(text: &str) -> Result<VerifierDesc, DescError> {
    let mut reader = DescReader { src: text, offset: 0 };
    let v = reader.desc(0)?;
    reader.skip_ws();
    if reader.offset < text.len() {
        return Err(reader.error("trailing input"));
    }
    Ok(v)
}

struct DescReader<'a> {
    src: &'a str,
    offset: usize,
}

impl DescReader<'_> {
    fn rest(&self) -> &str {
        &self.src[self.offset..]
    }

    fn error(&self, reason: &str) -> DescError {
        DescError::Parse {
            offset: self.offset,
            reason: reason.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start().len();
        self.offset = self.src.len() - trimmed;
    }

    fn keyword(&mut self, word: &str) -> bool {
        let rest = self.rest();
        if rest.starts_with(word) && rest[word.len()..].starts_with(|c: char| c.is_ascii_whitespace() || c == '(' || c == '"') {
            self.offset += word.len();
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DescError> {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.offset += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn quoted(&mut self) -> Result<String, DescError> {
        if !self.rest().starts_with('"') {
            return Err(self.error("expected a quoted program"));
        }
        let mut out = String::new();
        let mut chars = self.rest().char_indices().skip(1);
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.offset += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e @ ('"' | '\\'))) => out.push(e),
                    _ => return Err(self.error("invalid escape in quoted program")),
                },
                c => out.push(c),
            }
        }
        Err(self.error("unterminated quoted program"))
    }

    fn desc(&mut self, depth: usize) -> Result<VerifierDesc, DescError> {
        if depth > MAX_NESTING {
            return Err(self.error("descriptor nesting too deep"));
        }
        self.skip_ws();
        if self.keyword("tower") {
            let mut cursor = ordinal::Cursor::new(self.rest());
            let level = cursor.ordinal(0).map_err(|e| match e {
                OrdinalError::Parse { offset, reason } => DescError::Parse {
                    offset: self.offset + offset,
                    reason,
                },
                other => DescError::Ordinal(other),
            })?;
            self.offset += cursor.offset;
            Ok(VerifierDesc::Tower(level))
        } else if self.keyword("singleton") {
            let text = self.quoted()?;
            let program = parse_program(&text)?;
            if program.to_string() != text {
                return Err(DescError::NonCanonical);
            }
            Ok(VerifierDesc::Singleton(program))
        } else if self.keyword("union") {
            self.expect('(')?;
            let a = self.desc(depth + 1)?;
            self.expect(')')?;
            self.expect('(')?;
            let b = self.desc(depth + 1)?;
            self.expect(')')?;
            Ok(VerifierDesc::union(a, b))
        } else {
            Err(self.error("expected `tower`, `singleton` or `union`"))
        }
    }
}

fn template() -> &'static Program {
    static TEMPLATE: OnceLock<Program> = OnceLock::new();
    TEMPLATE.get_or_init(|| parse_program(DIAGONAL_TEMPLATE).expect("diagonal template parses"))
}

/// Locates the descriptor literal inside a program shaped like the template.
fn placeholder_slot(program: &mut Program) -> Option<&mut Arc<str>> {
    let Stmt::If { then_body, .. } = program.body.first_mut()? else {
        return None;
    };
    let Stmt::If { cond, .. } = then_body.get_mut(2)? else {
        return None;
    };
    let Expr::Binary(lang::BinOp::And, _, check) = cond else {
        return None;
    };
    let Expr::Verify { verifier, .. } = &mut **check else {
        return None;
    };
    match &mut **verifier {
        Expr::Str(s) => Some(s),
        _ => None,
    }
}

/// The diagonal program of `v`: on input `(pi, t)` with both components
/// non-pairs, if `v` accepts proof `pi` for program text `t` it returns the
/// negated truth value of `t` run on the same input; otherwise `false`.
pub fn diag(v: &VerifierDesc) -> Program {
    let mut program = template().clone();
    *placeholder_slot(&mut program).expect("template has a descriptor slot") = Arc::from(v.to_string());
    program
}

/// Recovers the embedded descriptor text if `program` is exactly a diagonal program.
pub fn diagonal_descriptor(program: &Program) -> Option<String> {
    let mut candidate = program.clone();
    let text = placeholder_slot(&mut candidate)?.to_string();
    *placeholder_slot(&mut candidate)? = Arc::from(PLACEHOLDER);
    (candidate == *template()).then_some(text)
}

pub fn verify(v: &VerifierDesc, cert: &Certificate, program: &Program) -> CheckResult {
    match (v, cert) {
        (VerifierDesc::Tower(_), Certificate::LoopFree | Certificate::Ranking(_)) => check_base_certificate(cert, program),
        (VerifierDesc::Tower(alpha), Certificate::Diagonal(desc)) => {
            let beta = match parse_desc(desc) {
                Ok(VerifierDesc::Tower(beta)) => beta,
                Ok(_) => return CheckResult::reject(RejectReason::DiagonalNotTower),
                Err(_) => return CheckResult::reject(RejectReason::BadDescriptor),
            };
            if compare(&beta, alpha).is_ge() {
                CheckResult::reject(RejectReason::LevelNotBelow)
            } else if *program != diag(&VerifierDesc::Tower(beta)) {
                CheckResult::reject(RejectReason::NotDiagonalProgram)
            } else {
                CheckResult::Accept
            }
        }
        (VerifierDesc::Tower(alpha), Certificate::Reflection(level, inner)) => {
            let Ok(beta) = ordinal::parse_ordinal(level) else {
                return CheckResult::reject(RejectReason::BadOrdinal);
            };
            if compare(&beta, alpha).is_ge() {
                return CheckResult::reject(RejectReason::LevelNotBelow);
            }
            verify(&VerifierDesc::Tower(beta), inner, program)
        }
        (VerifierDesc::Singleton(expected), Certificate::Singleton) => {
            if program == expected {
                CheckResult::Accept
            } else {
                CheckResult::reject(RejectReason::SingletonMismatch)
            }
        }
        (VerifierDesc::Union(a, _), Certificate::Left(inner)) => verify(a, inner, program),
        (VerifierDesc::Union(_, b), Certificate::Right(inner)) => verify(b, inner, program),
        _ => CheckResult::reject(RejectReason::WrongCertificateForm),
    }
}

/// Text-level verification: unparseable inputs are rejected.
pub fn verify_texts(verifier: &str, proof: &str, program: &str) -> bool {
    let (Ok(v), Ok(cert), Ok(program)) = (
        parse_desc(verifier),
        proof::parse_certificate(proof),
        parse_program(program),
    ) else {
        return false;
    };
    verify(&v, &cert, &program).is_accept()
}

/// The oracle behind the object language's `verify` primitive.
#[derive(Debug, Clone, Copy, Default)]
pub struct TowerOracle;

impl VerifyOracle for TowerOracle {
    fn verify(&self, verifier: &str, proof: &str, program: &str) -> bool {
        verify_texts(verifier, proof, program)
    }
}

/// `tower α` becomes `tower α+1`; any other verifier is joined with the
/// singleton verifier of its own diagonal program.
pub fn strengthen(v: &VerifierDesc) -> VerifierDesc {
    match v {
        VerifierDesc::Tower(alpha) => VerifierDesc::Tower(alpha.successor()),
        other => VerifierDesc::union(other.clone(), VerifierDesc::Singleton(diag(other))),
    }
}

/// The first `k` levels of the fundamental sequence of a limit level.
pub fn enumerate_tower(lambda: &Ordinal, k: u64) -> Result<Vec<Ordinal>, OrdinalError> {
    (0..k).map(|n| fundamental_sequence(lambda, n)).collect()
}

/// Levels strictly below `alpha` reachable by predecessor steps and the
/// first [`FRONTIER_SAMPLES`] fundamental-sequence elements, breadth first.
pub fn frontier(alpha: &Ordinal, limit: usize) -> Vec<Ordinal> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([alpha.clone()]);
    while let Some(beta) = queue.pop_front() {
        let children = match classify(&beta) {
            Class::Zero => Vec::new(),
            Class::Successor(pred) => vec![pred],
            Class::Limit => (0..FRONTIER_SAMPLES)
                .map(|n| fundamental_sequence(&beta, n).expect("limit"))
                .collect(),
        };
        for child in children {
            if out.len() >= limit {
                return out;
            }
            if seen.insert(child.clone()) {
                out.push(child.clone());
                queue.push_back(child);
            }
        }
    }
    out
}

fn base_candidates(program: &Program) -> Vec<Certificate> {
    let mut out = vec![Certificate::LoopFree];
    if let Some(cert @ Certificate::Ranking(_)) = infer_certificate(program) {
        out.push(cert);
    }
    out
}

fn tower_candidates(alpha: &Ordinal, program: &Program, budget: usize, reflect: bool) -> Vec<Certificate> {
    let mut out = base_candidates(program);
    if let Some(desc) = diagonal_descriptor(program) {
        out.push(Certificate::Diagonal(desc));
    }
    let levels = frontier(alpha, budget);
    for beta in &levels {
        out.push(Certificate::Diagonal(VerifierDesc::Tower(beta.clone()).to_string()));
    }
    if reflect {
        for beta in &levels {
            if out.len() >= budget {
                break;
            }
            let remaining = budget - out.len();
            for inner in tower_candidates(beta, program, remaining, false) {
                out.push(Certificate::Reflection(beta.to_string(), Box::new(inner)));
            }
        }
    }
    out.truncate(budget);
    out
}

fn candidates(v: &VerifierDesc, program: &Program, budget: usize) -> Vec<Certificate> {
    match v {
        VerifierDesc::Tower(alpha) => tower_candidates(alpha, program, budget, true),
        VerifierDesc::Singleton(_) => vec![Certificate::Singleton],
        VerifierDesc::Union(a, b) => {
            let left = candidates(a, program, budget);
            let right = candidates(b, program, budget);
            let mut out = Vec::with_capacity(budget.min(left.len() + right.len()));
            let mut left = left.into_iter().map(|c| Certificate::Left(Box::new(c)));
            let mut right = right.into_iter().map(|c| Certificate::Right(Box::new(c)));
            while out.len() < budget {
                match (left.next(), right.next()) {
                    (None, None) => break,
                    (l, r) => out.extend(l.into_iter().chain(r)),
                }
            }
            out.truncate(budget);
            out
        }
    }
}

/// Bounded proof search: tries at most `budget` candidate certificates,
/// smallest forms first, and returns the first one `v` accepts.
pub fn accepts_via_search(v: &VerifierDesc, program: &Program, budget: usize) -> Option<Certificate> {
    candidates(v, program, budget)
        .into_iter()
        .find(|cert| verify(v, cert, program).is_accept())
}
