//! Belief bases over `terminating`/`trusted`/`implies` statements, closed
//! under modus ponens and two verifier axioms:
//!
//! * trusting a verifier lets one believe its diagonal program terminates;
//! * believing a program terminates lets one trust the verifier that
//!   accepts only that program.
//!
//! Closure is materialised to a finite depth since each axiom produces fresh
//! programs and verifiers.

use std::collections::BTreeSet;
use std::fmt;

use crate::lang::{parse_program, Program};
use crate::sexp::{self, arity, ParseError, Sexp};
use crate::tower::{diag, parse_desc, VerifierDesc};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statement {
    /// Program text.
    Terminating(String),
    /// Verifier descriptor text.
    Trusted(String),
    Implies(Box<Statement>, Box<Statement>),
}

impl Statement {
    pub fn terminating(program: &Program) -> Statement {
        Statement::Terminating(program.to_string())
    }

    pub fn trusted(v: &VerifierDesc) -> Statement {
        Statement::Trusted(v.to_string())
    }

    pub fn implies(a: Statement, b: Statement) -> Statement {
        Statement::Implies(Box::new(a), Box::new(b))
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Terminating(p) => write!(f, "(terminating {})", sexp::quoted(p)),
            Statement::Trusted(v) => write!(f, "(trusted {})", sexp::quoted(v)),
            Statement::Implies(a, b) => write!(f, "(implies {a} {b})"),
        }
    }
}

/// Parses a statement. Embedded texts that parse are stored canonically;
/// others are kept verbatim and reported when the base is closed.
pub fn parse_statement(text: &str) -> Result<Statement, ParseError> {
    statement_from_sexp(&sexp::read(text)?)
}

fn statement_from_sexp(form: &Sexp) -> Result<Statement, ParseError> {
    let (head, args) = form.expect_form()?;
    match head {
        "terminating" => {
            let text = arity(form, head, args, 1)?[0].expect_str()?;
            Ok(Statement::Terminating(
                parse_program(text).map_or_else(|_| text.to_string(), |p| p.to_string()),
            ))
        }
        "trusted" => {
            let text = arity(form, head, args, 1)?[0].expect_str()?;
            Ok(Statement::Trusted(
                parse_desc(text).map_or_else(|_| text.to_string(), |v| v.to_string()),
            ))
        }
        "implies" => {
            let args = arity(form, head, args, 2)?;
            Ok(Statement::implies(
                statement_from_sexp(&args[0])?,
                statement_from_sexp(&args[1])?,
            ))
        }
        _ => Err(form.error(format!("unknown statement `{head}`"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BeliefBase {
    statements: BTreeSet<Statement>,
}

impl BeliefBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: Statement) -> bool {
        self.statements.insert(s)
    }

    pub fn contains(&self, s: &Statement) -> bool {
        self.statements.contains(s)
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Statement> {
        self.statements.iter()
    }

    pub fn is_subset(&self, other: &BeliefBase) -> bool {
        self.statements.is_subset(&other.statements)
    }

    /// One statement per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<BeliefBase, BaseFileError> {
        let mut base = BeliefBase::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let s = parse_statement(line).map_err(|source| BaseFileError { line: i + 1, source })?;
            base.insert(s);
        }
        Ok(base)
    }
}

impl FromIterator<Statement> for BeliefBase {
    fn from_iter<I: IntoIterator<Item = Statement>>(iter: I) -> Self {
        BeliefBase {
            statements: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for BeliefBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {source}")]
pub struct BaseFileError {
    pub line: usize,
    pub source: ParseError,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub beliefs: BeliefBase,
    /// Statements whose embedded text could not be parsed; no axiom fired on them.
    pub warnings: Vec<String>,
    /// Rounds actually performed (fewer than requested at a fixpoint).
    pub rounds: usize,
}

fn singleton_trust(program: &Program) -> Statement {
    Statement::trusted(&VerifierDesc::Singleton(program.clone()))
}

/// Consequences of one statement under the axioms, each paired with the
/// axiom instance that licenses it.
fn axiom_step(s: &Statement) -> Result<Option<(Statement, Statement)>, String> {
    match s {
        Statement::Trusted(text) => {
            let v = parse_desc(text).map_err(|e| format!("{s}: {e}"))?;
            let t = Statement::terminating(&diag(&v));
            Ok(Some((Statement::implies(s.clone(), t.clone()), t)))
        }
        Statement::Terminating(text) => {
            let p = parse_program(text).map_err(|e| format!("{s}: {e}"))?;
            if p.to_string() != *text {
                return Err(format!("{s}: program text is not canonical"));
            }
            let t = singleton_trust(&p);
            Ok(Some((Statement::implies(s.clone(), t.clone()), t)))
        }
        Statement::Implies(..) => Ok(None),
    }
}

/// Applies modus ponens and both axioms to every statement, `depth` times or
/// until nothing new appears.
pub fn close(base: &BeliefBase, depth: usize) -> Closure {
    let mut beliefs = base.clone();
    let mut warnings = BTreeSet::new();
    let mut rounds = 0;
    while rounds < depth {
        let mut fresh = Vec::new();
        for s in beliefs.iter() {
            if let Statement::Implies(a, b) = s {
                if beliefs.contains(a) {
                    fresh.push((**b).clone());
                }
            }
            match axiom_step(s) {
                Ok(Some((instance, consequent))) => {
                    fresh.push(instance);
                    fresh.push(consequent);
                }
                Ok(None) => {}
                Err(w) => {
                    warnings.insert(w);
                }
            }
        }
        let mut grew = false;
        for s in fresh {
            grew |= beliefs.insert(s);
        }
        if !grew {
            break;
        }
        rounds += 1;
    }
    Closure {
        beliefs,
        warnings: warnings.into_iter().collect(),
        rounds,
    }
}

pub fn is_derivable(base: &BeliefBase, stmt: &Statement, depth: usize) -> bool {
    base.contains(stmt) || close(base, depth).beliefs.contains(stmt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Premise,
    Axiom2,
    Axiom3,
    ModusPonens,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Premise => "premise",
            Rule::Axiom2 => "axiom-2",
            Rule::Axiom3 => "axiom-3",
            Rule::ModusPonens => "mp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub statement: Statement,
    pub rule: Rule,
    pub premises: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DerivationTrace {
    pub steps: Vec<Step>,
}

impl DerivationTrace {
    fn push(&mut self, statement: Statement, rule: Rule, premises: Vec<usize>) -> usize {
        self.steps.push(Step {
            statement,
            rule,
            premises,
        });
        self.steps.len() - 1
    }

    pub fn conclusion(&self) -> Option<&Statement> {
        self.steps.last().map(|s| &s.statement)
    }

    /// Premises precede their use, and each rule matches its premises.
    pub fn is_well_formed(&self) -> bool {
        self.steps.iter().enumerate().all(|(i, step)| {
            if step.premises.iter().any(|&p| p >= i) {
                return false;
            }
            let premise = |k: usize| &self.steps[step.premises[k]].statement;
            match step.rule {
                Rule::Premise => step.premises.is_empty(),
                Rule::ModusPonens => {
                    step.premises.len() == 2
                        && *premise(1) == Statement::implies(premise(0).clone(), step.statement.clone())
                }
                Rule::Axiom2 | Rule::Axiom3 => {
                    step.premises.len() == 1
                        && matches!(
                            (step.rule, premise(0)),
                            (Rule::Axiom2, Statement::Trusted(_)) | (Rule::Axiom3, Statement::Terminating(_))
                        )
                        && axiom_step(premise(0)).ok().flatten().map(|(instance, _)| instance)
                            == Some(step.statement.clone())
                }
            }
        })
    }
}

impl fmt::Display for DerivationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.steps.iter().enumerate() {
            write!(f, "{i} {}", step.rule)?;
            for p in &step.premises {
                write!(f, " {p}")?;
            }
            writeln!(f, " {}", step.statement)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BeliefError {
    #[error("`{0}` is not trusted by the belief base")]
    NotTrusted(String),
}

/// Depth at which trust in a verifier must already be derivable.
pub const TRUST_DEPTH: usize = 3;

/// Given a trusted `v`, derives trust in the verifier accepting its diagonal
/// program and returns the union of the two, which accepts strictly more.
pub fn derive_stronger_trusted(
    base: &BeliefBase,
    v: &VerifierDesc,
) -> Result<(VerifierDesc, DerivationTrace), BeliefError> {
    let trusted = Statement::trusted(v);
    if !is_derivable(base, &trusted, TRUST_DEPTH) {
        return Err(BeliefError::NotTrusted(v.to_string()));
    }
    let p = diag(v);
    let terminates = Statement::terminating(&p);
    let singleton = singleton_trust(&p);

    let mut trace = DerivationTrace::default();
    let t0 = trace.push(trusted.clone(), Rule::Premise, vec![]);
    let t1 = trace.push(Statement::implies(trusted, terminates.clone()), Rule::Axiom2, vec![t0]);
    let t2 = trace.push(terminates.clone(), Rule::ModusPonens, vec![t0, t1]);
    let t3 = trace.push(Statement::implies(terminates, singleton.clone()), Rule::Axiom3, vec![t2]);
    trace.push(singleton, Rule::ModusPonens, vec![t2, t3]);

    let stronger = VerifierDesc::union(v.clone(), VerifierDesc::Singleton(p));
    Ok((stronger, trace))
}

/// Iterates [`derive_stronger_trusted`] `k` times. After each step trust in
/// the new union is added to the base: both of its components are trusted.
pub fn stronger_chain(
    base: &BeliefBase,
    v: &VerifierDesc,
    k: usize,
) -> Result<Vec<(VerifierDesc, DerivationTrace)>, BeliefError> {
    let mut base = base.clone();
    let mut current = v.clone();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let (next, trace) = derive_stronger_trusted(&base, &current)?;
        base.insert(Statement::trusted(&next));
        current = next.clone();
        out.push((next, trace));
    }
    Ok(out)
}
