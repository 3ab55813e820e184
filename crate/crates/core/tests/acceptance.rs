//! Acceptance suite. Runs without the libtest harness so each criterion
//! prints exactly one PASS/FAIL line; any failure makes the process exit 1.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::SeedableRng;

use omega_tower::belief::{close, parse_statement, stronger_chain, BeliefBase, Statement};
use omega_tower::corpus;
use omega_tower::generate::{self, ProgramShape};
use omega_tower::lang::{parse_program, parse_value, run, Program, RunResult, Value};
use omega_tower::ordinal::{classify, compare, fundamental_sequence, parse_ordinal, Class, Ordinal};
use omega_tower::proof::{parse_certificate, Certificate, Path, RankingClause};
use omega_tower::tower::{accepts_via_search, diag, frontier, parse_desc, verify, TowerOracle, VerifierDesc};

const FUEL: u64 = 1_000_000;

type Verdict = Result<String, String>;

fn ord(s: &str) -> Ordinal {
    parse_ordinal(s).expect("ordinal literal")
}

fn tower(alpha: &Ordinal) -> VerifierDesc {
    VerifierDesc::Tower(alpha.clone())
}

/// Truthiness, restated here rather than taken from the library.
fn truthy(v: &Value) -> bool {
    match v {
        Value::Nat(n) => *n != 0,
        Value::Bool(b) => *b,
        Value::Str(s) => !s.is_empty(),
        Value::Pair(_) => true,
    }
}

/// Reference ordinal comparison: expand each term into `coefficient`
/// copies of its exponent and compare the sequences lexicographically.
fn oracle_cmp(a: &Ordinal, b: &Ordinal) -> Ordering {
    fn expand(a: &Ordinal) -> Vec<&Ordinal> {
        a.terms()
            .iter()
            .flat_map(|t| std::iter::repeat_n(&t.exponent, t.coefficient as usize))
            .collect()
    }
    let (xs, ys) = (expand(a), expand(b));
    for (x, y) in xs.iter().zip(&ys) {
        match oracle_cmp(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    xs.len().cmp(&ys.len())
}

fn pair_input(cert: &Certificate, program: &Program) -> Value {
    Value::pair(Value::str(&cert.to_string()), Value::str(&program.canonical()))
}

fn criterion_1() -> Verdict {
    let entries = corpus::shipped().map_err(|e| e.to_string())?;
    if entries.len() < 20 {
        return Err(format!("corpus has {} pairs", entries.len()));
    }
    let required = ["0", "1", "w", "w + 1", "w*2", "w^2", "w^w"];
    for level in required {
        let v = tower(&ord(level));
        if !entries.iter().any(|e| e.verifier == v) {
            return Err(format!("no corpus pair for tower {level}"));
        }
    }
    for e in &entries {
        if !verify(&e.verifier, &e.certificate, &e.program).is_accept() {
            return Err(format!("{}: corpus pair not accepted", e.name));
        }
        let input = pair_input(&e.certificate, &e.program);
        let d = run(&diag(&e.verifier), input.clone(), FUEL, &TowerOracle);
        let t = run(&e.program, input, FUEL, &TowerOracle);
        let expected = match &t {
            RunResult::Halt(v) => !truthy(v),
            RunResult::RuntimeError(_) => true,
            RunResult::OutOfFuel => return Err(format!("{}: subject out of fuel", e.name)),
        };
        if d != RunResult::Halt(Value::Bool(expected)) {
            return Err(format!("{}: diag gave {d}, expected (bool {expected})", e.name));
        }
        if d == t {
            return Err(format!("{}: outcomes agree: {d}", e.name));
        }
    }
    Ok(format!("{} pairs", entries.len()))
}

/// Single-clause ranking certificates over short paths and likely counters.
fn ranking_shapes() -> Vec<Certificate> {
    let vars = ["x", "pi", "t", "r", "n"];
    let mut paths: Vec<Vec<usize>> = vec![vec![]];
    for a in 0..4 {
        paths.push(vec![a]);
        for b in 0..4 {
            paths.push(vec![a, b]);
            for c in 0..3 {
                paths.push(vec![a, b, c]);
            }
        }
    }
    let mut out = vec![Certificate::Ranking(vec![])];
    for path in &paths {
        for var in vars {
            for decrement in 1..=2 {
                out.push(Certificate::Ranking(vec![RankingClause {
                    path: Path(path.clone()),
                    var: var.into(),
                    decrement,
                }]));
            }
        }
    }
    out
}

fn hand_candidates(alpha: &Ordinal) -> Vec<Certificate> {
    let mut out = vec![
        Certificate::LoopFree,
        Certificate::Singleton,
        Certificate::Left(Box::new(Certificate::LoopFree)),
        Certificate::Right(Box::new(Certificate::Singleton)),
    ];
    out.extend(ranking_shapes());
    let mut levels = frontier(alpha, 64);
    levels.push(alpha.clone());
    for gamma in &levels {
        let g = tower(gamma).to_string();
        out.push(Certificate::Diagonal(g.clone()));
        out.push(Certificate::Reflection(gamma.to_string(), Box::new(Certificate::LoopFree)));
        out.push(Certificate::Reflection(gamma.to_string(), Box::new(Certificate::Diagonal(g.clone()))));
        for delta in frontier(gamma, 16) {
            let inner = Certificate::Diagonal(tower(&delta).to_string());
            out.push(Certificate::Reflection(gamma.to_string(), Box::new(inner.clone())));
            out.push(Certificate::Reflection(
                gamma.to_string(),
                Box::new(Certificate::Reflection(delta.to_string(), Box::new(inner))),
            ));
        }
    }
    out
}

fn criterion_2() -> Verdict {
    let chain = ["0", "1", "2", "w", "w + 1", "w*2", "w^2", "w^w"];
    let top = tower(&ord("w^w + 1"));
    let mut tried = 0;
    for level in chain {
        let alpha = ord(level);
        let p = diag(&tower(&alpha));
        let cert = Certificate::Diagonal(tower(&alpha).to_string());
        if !verify(&tower(&alpha.successor()), &cert, &p).is_accept() {
            return Err(format!("Diagonal({level}) rejected at its successor"));
        }
        if !verify(&top, &cert, &p).is_accept() {
            return Err(format!("Diagonal({level}) rejected at w^w + 1"));
        }
        for c in hand_candidates(&alpha) {
            tried += 1;
            if verify(&tower(&alpha), &c, &p).is_accept() {
                return Err(format!("tower {level} accepts its own diagonal via {c}"));
            }
        }
        if let Some(c) = accepts_via_search(&tower(&alpha), &p, 10_000) {
            return Err(format!("search found {c} for tower {level}"));
        }
    }
    Ok(format!("8 levels, {tried} hand-built candidates rejected"))
}

fn criterion_3() -> Verdict {
    let mut rng = StdRng::seed_from_u64(3);
    let mut slowest = Duration::ZERO;
    let mut accepted = 0;
    for i in 0..10_000 {
        let v = generate::desc(&mut rng, 1);
        let cert = generate::certificate(&mut rng, 3);
        let p = generate::subject(&mut rng);
        let start = Instant::now();
        let result = std::panic::catch_unwind(|| verify(&v, &cert, &p));
        let elapsed = start.elapsed();
        match result {
            Ok(r) => accepted += r.is_accept() as usize,
            Err(_) => return Err(format!("triple {i} panicked: {v} / {cert}")),
        }
        if elapsed > Duration::from_secs(1) {
            return Err(format!("triple {i} took {elapsed:?}"));
        }
        slowest = slowest.max(elapsed);
    }
    Ok(format!("10000 triples, {accepted} accepted, slowest {slowest:?}"))
}

fn criterion_4() -> Verdict {
    let entries = corpus::shipped().map_err(|e| e.to_string())?;
    let mut texts: Vec<String> = entries.iter().map(|e| e.program.canonical()).collect();
    texts.extend(entries.iter().map(|e| e.certificate.to_string()));
    let mut rng = StdRng::seed_from_u64(4);
    let mut runs = 0;
    for e in &entries {
        for _ in 0..100 {
            let input = generate::input(&mut rng, &texts);
            if let RunResult::OutOfFuel = run(&e.program, input.clone(), FUEL, &TowerOracle) {
                return Err(format!("{} diverges on {input}", e.name));
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} runs, 0 divergence witnesses"))
}

fn criterion_5() -> Verdict {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..1000 {
        let a = generate::ordinal(&mut rng, 3);
        let b = generate::ordinal(&mut rng, 3);
        let c = compare(&a, &b);
        let holds = [c.is_lt(), c.is_eq(), c.is_gt()].iter().filter(|x| **x).count();
        if holds != 1 || c != oracle_cmp(&a, &b) || c.is_eq() != (a == b) || compare(&b, &a) != c.reverse() {
            return Err(format!("trichotomy/oracle mismatch on {a} vs {b}"));
        }
    }
    for _ in 0..200 {
        let mut xs = [0; 3].map(|_| generate::ordinal(&mut rng, 3));
        // impose a ≤ b ≤ c by the oracle so every sample exercises the law
        xs.sort_by(oracle_cmp);
        let [a, b, c] = &xs;
        if compare(a, b).is_gt() || compare(b, c).is_gt() || compare(a, c).is_gt() {
            return Err(format!("transitivity fails on {a}, {b}, {c}"));
        }
        if compare(a, b).is_lt() && compare(b, c).is_le() && !compare(a, c).is_lt() {
            return Err(format!("strict transitivity fails on {a}, {b}, {c}"));
        }
    }
    for _ in 0..50 {
        let lambda = generate::limit_ordinal(&mut rng, 3);
        if classify(&lambda) != Class::Limit {
            return Err(format!("{lambda} is not a limit"));
        }
        for n in 0..10 {
            let x = fundamental_sequence(&lambda, n).map_err(|e| e.to_string())?;
            let y = fundamental_sequence(&lambda, n + 1).map_err(|e| e.to_string())?;
            if oracle_cmp(&x, &y) != Ordering::Less || oracle_cmp(&y, &lambda) != Ordering::Less {
                return Err(format!("{lambda}[{n}] = {x}, [{}] = {y}", n + 1));
            }
        }
    }
    Ok("1000 pairs, 200 triples, 50 limits".into())
}

fn round_trip<T, E: std::fmt::Display>(
    kind: &str,
    items: impl IntoIterator<Item = T>,
    parse: impl Fn(&str) -> Result<T, E>,
) -> Result<(), String>
where
    T: std::fmt::Display + PartialEq + std::fmt::Debug,
{
    for item in items {
        let text = item.to_string();
        let back = parse(&text).map_err(|e| format!("{kind} {text}: {e}"))?;
        if back != item {
            return Err(format!("{kind} {text} parsed to {back:?}"));
        }
        if back.to_string() != text {
            return Err(format!("{kind} {text} not byte-stable"));
        }
    }
    Ok(())
}

fn criterion_6() -> Verdict {
    let mut rng = StdRng::seed_from_u64(6);
    let r = &mut rng;
    round_trip("program", (0..1000).map(|_| generate::program(r, ProgramShape::ANY)).collect::<Vec<_>>(), parse_program)?;
    round_trip("value", (0..1000).map(|_| generate::value(r, 4)).collect::<Vec<_>>(), parse_value)?;
    round_trip("certificate", (0..1000).map(|_| generate::certificate(r, 3)).collect::<Vec<_>>(), parse_certificate)?;
    round_trip("ordinal", (0..1000).map(|_| generate::ordinal(r, 4)).collect::<Vec<_>>(), parse_ordinal)?;
    round_trip("descriptor", (0..1000).map(|_| generate::desc(r, 2)).collect::<Vec<_>>(), parse_desc)?;
    round_trip("statement", (0..1000).map(|_| generate::statement(r, 2)).collect::<Vec<_>>(), parse_statement)?;
    Ok("6 x 1000 items".into())
}

fn criterion_7() -> Verdict {
    let t1 = tower(&Ordinal::nat(1));
    let base: BeliefBase = [Statement::trusted(&t1)].into_iter().collect();
    let p1 = diag(&t1);
    let closure = close(&base, 3);
    if !closure.beliefs.contains(&Statement::terminating(&p1)) {
        return Err("depth-3 closure lacks Terminating(P1)".into());
    }
    if !closure.beliefs.contains(&Statement::trusted(&VerifierDesc::Singleton(p1))) {
        return Err("depth-3 closure lacks Trusted(singleton P1)".into());
    }

    let t0 = tower(&Ordinal::zero());
    let base: BeliefBase = [Statement::trusted(&t0)].into_iter().collect();
    let chain = stronger_chain(&base, &t0, 5).map_err(|e| e.to_string())?;
    let distinct: BTreeSet<String> = chain.iter().map(|(w, _)| w.to_string()).collect();
    if chain.len() != 5 || distinct.len() != 5 {
        return Err(format!("{} distinct descriptors", distinct.len()));
    }
    let mut previous = t0;
    for (i, (w, trace)) in chain.iter().enumerate() {
        if !trace.is_well_formed() {
            return Err(format!("step {i}: ill-formed trace"));
        }
        let p = diag(&previous);
        let cert = Certificate::Right(Box::new(Certificate::Singleton));
        if !verify(w, &cert, &p).is_accept() {
            return Err(format!("step {i}: does not accept predecessor's diagonal"));
        }
        if accepts_via_search(&previous, &p, 1000).is_some() {
            return Err(format!("step {i}: predecessor accepts its own diagonal"));
        }
        previous = w.clone();
    }
    Ok("closure and 5-step chain".into())
}

fn criterion_8() -> Verdict {
    let mut rng = StdRng::seed_from_u64(8);
    let mut checked = 0;
    while checked < 500 {
        let alpha = generate::ordinal(&mut rng, 3);
        let Some((cert, p)) = generate::accepted_pair(&mut rng, &alpha, 2) else {
            continue;
        };
        if !verify(&tower(&alpha), &cert, &p).is_accept() {
            return Err(format!("generated pair not accepted at {alpha}: {cert}"));
        }
        let beta = generate::above(&mut rng, &alpha);
        let reflected = Certificate::Reflection(alpha.to_string(), Box::new(cert.clone()));
        if !verify(&tower(&beta), &reflected, &p).is_accept() {
            return Err(format!("Reflection({alpha}, {cert}) rejected at {beta}"));
        }
        if !verify(&tower(&beta), &cert, &p).is_accept() {
            return Err(format!("{cert} accepted at {alpha} but not at {beta}"));
        }
        checked += 1;
    }
    Ok("500 pairs".into())
}

fn main() -> ExitCode {
    type Criterion = (usize, &'static str, fn() -> Verdict, Option<Duration>);
    let criteria: [Criterion; 8] = [
        (1, "diagonal property", criterion_1, Some(Duration::from_secs(60))),
        (2, "strict hierarchy", criterion_2, Some(Duration::from_secs(30))),
        (3, "verifier totality", criterion_3, None),
        (4, "soundness sampling", criterion_4, None),
        (5, "ordinal laws", criterion_5, Some(Duration::from_secs(10))),
        (6, "round-trips", criterion_6, None),
        (7, "no maximal trusted verifier", criterion_7, Some(Duration::from_secs(30))),
        (8, "monotonicity", criterion_8, None),
    ];
    let mut failed = 0;
    for (n, name, check, limit) in criteria {
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let verdict = match (verdict, limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:?}, limit {limit:?}")),
            (v, _) => v,
        };
        match verdict {
            Ok(detail) => println!("criterion {n} ({name}): PASS [{detail}; {:.2}s]", elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL [{detail}; {:.2}s]", elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
