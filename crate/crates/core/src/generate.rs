//! Random generators for programs, values, certificates, ordinals,
//! descriptors and statements.
//!
//! Used by the property tests, the acceptance suite and `selftest fuzz`.
//! Everything takes an explicit [`Rng`] so runs are reproducible from a seed.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::belief::Statement;
use crate::lang::{BinOp, Expr, Program, Stmt, UnOp, Value};
use crate::ordinal::{classify, compare, fundamental_sequence, Class, Ordinal, Term};
use crate::proof::{infer_certificate, Certificate, Path, RankingClause};
use crate::tower::{diag, VerifierDesc};

const VARS: &[&str] = &["x", "y", "acc", "t", "b"];
const COUNTERS: &[&str] = &["i", "j", "k", "n"];
const STRINGS: &[&str] = &["", "a", "tower 0", "q\"uote", "back\\slash", "(loopfree)", "w + 1"];

/// Largest natural produced for program inputs, keeping counter loops short.
pub const MAX_INPUT_NAT: u64 = 64;

#[derive(Debug, Clone, Copy)]
pub struct ProgramShape {
    pub max_depth: usize,
    pub max_stmts: usize,
    /// Loops follow the counter pattern the ranking checker accepts.
    pub ranked_loops: bool,
    /// Arbitrary loops, which may diverge.
    pub free_loops: bool,
    pub apply: bool,
}

impl ProgramShape {
    pub const LOOP_FREE: ProgramShape = ProgramShape {
        max_depth: 3,
        max_stmts: 4,
        ranked_loops: false,
        free_loops: false,
        apply: false,
    };

    pub const RANKED: ProgramShape = ProgramShape {
        ranked_loops: true,
        ..ProgramShape::LOOP_FREE
    };

    pub const ANY: ProgramShape = ProgramShape {
        max_depth: 3,
        max_stmts: 4,
        ranked_loops: true,
        free_loops: true,
        apply: true,
    };
}

struct ProgramGen<'r, R: Rng + ?Sized> {
    rng: &'r mut R,
    shape: ProgramShape,
    /// Counters of enclosing ranked loops; nothing else may assign them.
    frozen: Vec<&'static str>,
    loop_depth: usize,
}

impl<R: Rng + ?Sized> ProgramGen<'_, R> {
    fn leaf(&mut self) -> Expr {
        match self.rng.gen_range(0..5) {
            0 => Expr::Nat(if self.rng.gen_bool(0.05) { u64::MAX } else { self.rng.gen_range(0..20) }),
            1 => Expr::Bool(self.rng.gen()),
            2 => Expr::str(STRINGS.choose(self.rng).expect("nonempty")),
            _ => Expr::var(VARS.choose(self.rng).expect("nonempty")),
        }
    }

    fn expr(&mut self, depth: usize) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.leaf();
        }
        match self.rng.gen_range(0..20) {
            0..=9 => {
                let op = *BinOp::ALL.choose(self.rng).expect("nonempty");
                Expr::binary(op, self.expr(depth - 1), self.expr(depth - 1))
            }
            10..=16 => {
                let op = *UnOp::ALL.choose(self.rng).expect("nonempty");
                Expr::unary(op, self.expr(depth - 1))
            }
            17 => Expr::Verify {
                verifier: Box::new(Expr::str(if self.rng.gen() { "tower 1" } else { "tower w" })),
                proof: Box::new(Expr::str("(loopfree)")),
                program: Box::new(self.expr(depth - 1)),
            },
            _ if self.shape.apply => {
                let callee = Program {
                    param: "x".into(),
                    body: vec![],
                    ret: Expr::binary(BinOp::Add, Expr::var("x"), Expr::Nat(1)),
                };
                let program = if self.rng.gen() {
                    Expr::str(&callee.to_string())
                } else {
                    self.expr(depth - 1)
                };
                Expr::Apply {
                    program: Box::new(program),
                    input: Box::new(self.expr(depth - 1)),
                }
            }
            _ => self.leaf(),
        }
    }

    fn target(&mut self) -> String {
        VARS[1..].choose(self.rng).expect("nonempty").to_string()
    }

    fn block(&mut self, depth: usize) -> Vec<Stmt> {
        let n = self.rng.gen_range(0..=self.shape.max_stmts);
        (0..n).flat_map(|_| self.stmt(depth)).collect()
    }

    fn stmt(&mut self, depth: usize) -> Vec<Stmt> {
        let choice = if depth == 0 { 0 } else { self.rng.gen_range(0..6) };
        match choice {
            3 | 4 if self.shape.ranked_loops && self.loop_depth < 2 => self.ranked_loop(depth),
            5 if self.shape.free_loops => {
                self.loop_depth += 1;
                let s = Stmt::While {
                    guard: self.expr(2),
                    body: self.block(depth - 1),
                };
                self.loop_depth -= 1;
                vec![s]
            }
            1 | 2 => vec![Stmt::If {
                cond: self.expr(2),
                then_body: self.block(depth - 1),
                else_body: self.block(depth - 1),
            }],
            _ => vec![Stmt::Set(self.target(), self.expr(self.shape.max_depth))],
        }
    }

    fn ranked_loop(&mut self, depth: usize) -> Vec<Stmt> {
        let free: Vec<_> = COUNTERS.iter().copied().filter(|c| !self.frozen.contains(c)).collect();
        let Some(&counter) = free.choose(self.rng) else {
            return vec![];
        };
        let init = if self.rng.gen() {
            Expr::var("x")
        } else {
            Expr::Nat(self.rng.gen_range(0..10))
        };
        self.frozen.push(counter);
        self.loop_depth += 1;
        let mut body = self.block(depth - 1);
        self.loop_depth -= 1;
        self.frozen.pop();
        let decrement = self.rng.gen_range(1..=3);
        body.push(Stmt::Set(
            counter.to_string(),
            Expr::binary(BinOp::Sub, Expr::var(counter), Expr::Nat(decrement)),
        ));
        vec![
            Stmt::Set(counter.to_string(), init),
            Stmt::While {
                guard: Expr::binary(BinOp::Lt, Expr::Nat(0), Expr::var(counter)),
                body,
            },
        ]
    }
}

pub fn program<R: Rng + ?Sized>(rng: &mut R, shape: ProgramShape) -> Program {
    let mut generator = ProgramGen {
        rng,
        shape,
        frozen: Vec::new(),
        loop_depth: 0,
    };
    let body = generator.block(shape.max_depth);
    let ret = generator.expr(shape.max_depth);
    Program {
        param: "x".into(),
        body,
        ret,
    }
}

pub fn value<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> Value {
    match rng.gen_range(0..if depth == 0 { 3 } else { 4 }) {
        0 => Value::Nat(rng.gen_range(0..=MAX_INPUT_NAT)),
        1 => Value::Bool(rng.gen()),
        2 => Value::str(STRINGS.choose(rng).expect("nonempty")),
        _ => Value::pair(value(rng, depth - 1), value(rng, depth - 1)),
    }
}

/// Inputs for running certified programs: random values, with pairs of
/// strings taken from `texts` mixed in so diagonal programs see well-formed
/// proof/program pairs.
pub fn input<R: Rng + ?Sized>(rng: &mut R, texts: &[String]) -> Value {
    if !texts.is_empty() && rng.gen_bool(0.3) {
        let a = texts.choose(rng).expect("nonempty");
        let b = texts.choose(rng).expect("nonempty");
        Value::pair(Value::str(a), Value::str(b))
    } else {
        value(rng, 3)
    }
}

/// A random notation of at most the given exponent-tower height.
pub fn ordinal<R: Rng + ?Sized>(rng: &mut R, height: usize) -> Ordinal {
    if height == 0 || rng.gen_bool(0.1) {
        return Ordinal::zero();
    }
    let n = rng.gen_range(1..=3);
    let mut exponents: Vec<Ordinal> = (0..n).map(|_| ordinal(rng, height - 1)).collect();
    exponents.sort_by(|a, b| compare(b, a));
    exponents.dedup();
    let terms = exponents
        .into_iter()
        .map(|exponent| Term {
            exponent,
            coefficient: rng.gen_range(1..=4),
        })
        .collect();
    Ordinal::from_terms(terms).expect("sorted distinct exponents")
}

pub fn limit_ordinal<R: Rng + ?Sized>(rng: &mut R, height: usize) -> Ordinal {
    loop {
        let a = ordinal(rng, height.max(2));
        match classify(&a) {
            Class::Limit => return a,
            Class::Successor(_) if rng.gen_bool(0.5) => {
                // drop the finite tail
                let terms = a.terms().iter().filter(|t| !t.exponent.is_zero()).cloned().collect();
                let a = Ordinal::from_terms(terms).expect("a subsequence stays in normal form");
                if !a.is_zero() {
                    return a;
                }
            }
            _ => {}
        }
    }
}

/// A random notation strictly below `alpha`, or `None` for zero.
pub fn below<R: Rng + ?Sized>(rng: &mut R, alpha: &Ordinal) -> Option<Ordinal> {
    let mut current = alpha.clone();
    let steps = rng.gen_range(1..=4);
    for step in 0..steps {
        let next = match classify(&current) {
            Class::Zero => break,
            Class::Successor(p) => p,
            Class::Limit => fundamental_sequence(&current, rng.gen_range(0..6)).expect("limit"),
        };
        current = next;
        if step > 0 && rng.gen_bool(0.3) {
            break;
        }
    }
    (current != *alpha).then_some(current)
}

/// A random notation strictly above `alpha`.
pub fn above<R: Rng + ?Sized>(rng: &mut R, alpha: &Ordinal) -> Ordinal {
    let candidate = ordinal(rng, alpha.height() + 1);
    if compare(&candidate, alpha).is_gt() {
        return candidate;
    }
    match rng.gen_range(0..3) {
        0 => alpha.successor(),
        1 => {
            let tower = Ordinal::monomial(alpha.clone(), 1);
            if compare(&tower, alpha).is_gt() {
                tower
            } else {
                alpha.successor()
            }
        }
        _ => {
            let mut terms = alpha.terms().to_vec();
            match terms.first_mut() {
                Some(t) => t.coefficient += 1,
                None => return Ordinal::nat(rng.gen_range(1..5)),
            }
            Ordinal::from_terms(terms.into_iter().take(1).collect()).expect("single term")
        }
    }
}

pub fn desc<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> VerifierDesc {
    match rng.gen_range(0..if depth == 0 { 2 } else { 3 }) {
        0 => VerifierDesc::Tower(ordinal(rng, 3)),
        1 => VerifierDesc::Singleton(program(rng, ProgramShape::LOOP_FREE)),
        _ => VerifierDesc::union(desc(rng, depth - 1), desc(rng, depth - 1)),
    }
}

/// Mutates a few characters: deletions, duplications and substitutions
/// drawn from the syntax's punctuation.
pub fn mutate_text<R: Rng + ?Sized>(rng: &mut R, text: &str) -> String {
    const NOISE: &[char] = &['(', ')', '"', '\\', ' ', 'w', '^', '+', '*', '0', '9', 'x', '#'];
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..rng.gen_range(1..=3) {
        let i = rng.gen_range(0..=chars.len());
        match rng.gen_range(0..3) {
            0 if i < chars.len() => {
                chars.remove(i);
            }
            1 => chars.insert(i, *NOISE.choose(rng).expect("nonempty")),
            _ if i < chars.len() => chars[i] = *NOISE.choose(rng).expect("nonempty"),
            _ => chars.push(*NOISE.choose(rng).expect("nonempty")),
        }
    }
    chars.into_iter().collect()
}

/// Random descriptor text: usually well-formed, sometimes mutated.
fn desc_text<R: Rng + ?Sized>(rng: &mut R) -> String {
    let text = if rng.gen_bool(0.7) {
        VerifierDesc::Tower(ordinal(rng, 3)).to_string()
    } else {
        desc(rng, 1).to_string()
    };
    if rng.gen_bool(0.25) {
        mutate_text(rng, &text)
    } else {
        text
    }
}

fn ordinal_text<R: Rng + ?Sized>(rng: &mut R) -> String {
    let text = ordinal(rng, 3).to_string();
    if rng.gen_bool(0.2) {
        mutate_text(rng, &text)
    } else {
        text
    }
}

pub fn certificate<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> Certificate {
    match rng.gen_range(0..if depth == 0 { 4 } else { 7 }) {
        0 => Certificate::LoopFree,
        1 => Certificate::Singleton,
        2 => Certificate::Ranking(
            (0..rng.gen_range(1..=3))
                .map(|_| RankingClause {
                    path: Path((0..rng.gen_range(0..=3)).map(|_| rng.gen_range(0..4)).collect()),
                    var: COUNTERS.choose(rng).expect("nonempty").to_string(),
                    decrement: rng.gen_range(1..=3),
                })
                .collect(),
        ),
        3 => Certificate::Diagonal(desc_text(rng)),
        4 => Certificate::Reflection(ordinal_text(rng), Box::new(certificate(rng, depth - 1))),
        5 => Certificate::Left(Box::new(certificate(rng, depth - 1))),
        _ => Certificate::Right(Box::new(certificate(rng, depth - 1))),
    }
}

/// A program for verifier fuzzing: arbitrary code, or a diagonal program.
pub fn subject<R: Rng + ?Sized>(rng: &mut R) -> Program {
    match rng.gen_range(0..4) {
        0 => diag(&desc(rng, 1)),
        1 => program(rng, ProgramShape::RANKED),
        _ => program(rng, ProgramShape::ANY),
    }
}

pub fn statement<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> Statement {
    match rng.gen_range(0..if depth == 0 { 2 } else { 3 }) {
        0 => Statement::terminating(&program(rng, ProgramShape::LOOP_FREE)),
        1 => Statement::trusted(&desc(rng, 1)),
        _ => Statement::implies(statement(rng, depth - 1), statement(rng, depth - 1)),
    }
}

/// A (certificate, program) pair that `Tower(alpha)` accepts, built from
/// base certificates, diagonal programs of lower levels and reflection.
/// `None` when the draw needs a level below zero.
pub fn accepted_pair<R: Rng + ?Sized>(rng: &mut R, alpha: &Ordinal, depth: usize) -> Option<(Certificate, Program)> {
    match rng.gen_range(0..if depth == 0 { 3 } else { 4 }) {
        0 => Some((Certificate::LoopFree, program(rng, ProgramShape::LOOP_FREE))),
        1 => {
            let p = program(rng, ProgramShape::RANKED);
            Some((infer_certificate(&p)?, p))
        }
        2 => {
            let beta = VerifierDesc::Tower(below(rng, alpha)?);
            Some((Certificate::Diagonal(beta.to_string()), diag(&beta)))
        }
        _ => {
            let beta = below(rng, alpha)?;
            let (cert, p) = accepted_pair(rng, &beta, depth - 1)?;
            Some((Certificate::Reflection(beta.to_string(), Box::new(cert)), p))
        }
    }
}
