//! Ordinal notations below ε₀ in Cantor normal form.
//!
//! A notation is a finite sum `ω^e₁·c₁ + … + ω^eₖ·cₖ` whose exponents are
//! themselves notations, strictly decreasing, with every coefficient at
//! least one. The empty sum denotes zero.
//!
//! Text syntax: `0`, `5`, `w`, `w*3`, `w^2 + w*3 + 5`, `w^w`, `w^(w + 1)*2`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Maximum exponent nesting accepted by the parser.
pub const MAX_NESTING: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub exponent: Ordinal,
    pub coefficient: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Class {
    Zero,
    Successor(Ordinal),
    Limit,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrdinalError {
    #[error("ordinal parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },
    #[error("not in Cantor normal form: {0}")]
    CnfViolation(String),
    #[error("`{0}` is not a limit ordinal")]
    NotALimit(Ordinal),
}

impl Ordinal {
    pub fn zero() -> Ordinal {
        Ordinal { terms: Vec::new() }
    }

    pub fn nat(n: u64) -> Ordinal {
        if n == 0 {
            Ordinal::zero()
        } else {
            Ordinal::monomial(Ordinal::zero(), n)
        }
    }

    /// `ω`
    pub fn omega() -> Ordinal {
        Ordinal::monomial(Ordinal::nat(1), 1)
    }

    /// `ω^exponent · coefficient`, with a zero coefficient giving zero.
    pub fn monomial(exponent: Ordinal, coefficient: u64) -> Ordinal {
        if coefficient == 0 {
            return Ordinal::zero();
        }
        Ordinal {
            terms: vec![Term {
                exponent,
                coefficient,
            }],
        }
    }

    /// Builds a notation from terms, checking Cantor normal form.
    pub fn from_terms(terms: Vec<Term>) -> Result<Ordinal, OrdinalError> {
        let ord = Ordinal { terms };
        if ord.is_valid_cnf() {
            Ok(ord)
        } else {
            Err(OrdinalError::CnfViolation(ord.to_string()))
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exponent.is_zero() => Some(t.coefficient),
            _ => None,
        }
    }

    pub fn is_valid_cnf(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient >= 1 && t.exponent.is_valid_cnf())
            && self
                .terms
                .windows(2)
                .all(|w| compare(&w[0].exponent, &w[1].exponent) == Ordering::Greater)
    }

    /// `self + 1`.
    ///
    /// # Panics
    /// If the trailing finite coefficient is `u64::MAX`.
    pub fn successor(&self) -> Ordinal {
        let mut terms = self.terms.clone();
        match terms.last_mut() {
            Some(t) if t.exponent.is_zero() => {
                t.coefficient = t.coefficient.checked_add(1).expect("ordinal coefficient overflow");
            }
            _ => terms.push(Term {
                exponent: Ordinal::zero(),
                coefficient: 1,
            }),
        }
        Ordinal { terms }
    }

    /// Appends `ω^exponent · coefficient` to a prefix whose last exponent is
    /// larger; zero coefficients are dropped.
    fn push_term(mut self, exponent: Ordinal, coefficient: u64) -> Ordinal {
        if coefficient > 0 {
            self.terms.push(Term {
                exponent,
                coefficient,
            });
        }
        self
    }

    fn concat(mut self, tail: Ordinal) -> Ordinal {
        self.terms.extend(tail.terms);
        self
    }

    /// Height of the exponent tower: 0 for zero, 1 for naturals, 2 for
    /// `ω^n` sums, and so on.
    pub fn height(&self) -> usize {
        self.terms.first().map_or(0, |t| 1 + t.exponent.height())
    }
}

/// Lexicographic comparison of term lists, comparing exponents recursively.
pub fn compare(a: &Ordinal, b: &Ordinal) -> Ordering {
    for (x, y) in a.terms.iter().zip(&b.terms) {
        let ord = compare(&x.exponent, &y.exponent).then(x.coefficient.cmp(&y.coefficient));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    a.terms.len().cmp(&b.terms.len())
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        compare(self, other)
    }
}

pub fn classify(a: &Ordinal) -> Class {
    match a.terms.last() {
        None => Class::Zero,
        Some(last) if last.exponent.is_zero() => {
            let mut terms = a.terms.clone();
            let t = terms.last_mut().expect("nonempty");
            t.coefficient -= 1;
            if t.coefficient == 0 {
                terms.pop();
            }
            Class::Successor(Ordinal { terms })
        }
        Some(_) => Class::Limit,
    }
}

/// The `n`-th element of the standard fundamental sequence of a limit.
///
/// With `λ = δ + ω^a·c`: `λ[n] = δ + ω^a·(c-1) + (ω^a)[n]`, where
/// `(ω^(a'+1))[n] = ω^a'·n` and, for limit `a`, `(ω^a)[n] = ω^(a[n])`.
pub fn fundamental_sequence(lambda: &Ordinal, n: u64) -> Result<Ordinal, OrdinalError> {
    if classify(lambda) != Class::Limit {
        return Err(OrdinalError::NotALimit(lambda.clone()));
    }
    let (last, init) = lambda.terms.split_last().expect("limit is nonzero");
    let prefix = Ordinal { terms: init.to_vec() }.push_term(last.exponent.clone(), last.coefficient - 1);
    let tail = match classify(&last.exponent) {
        Class::Zero => unreachable!("limit has a nonzero last exponent"),
        Class::Successor(pred) => Ordinal::monomial(pred, n),
        Class::Limit => Ordinal::monomial(fundamental_sequence(&last.exponent, n)?, 1),
    };
    Ok(prefix.concat(tail))
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if t.exponent.is_zero() {
                write!(f, "{}", t.coefficient)?;
                continue;
            }
            f.write_str("w")?;
            match t.exponent.as_nat() {
                Some(1) => {}
                Some(e) => write!(f, "^{e}")?,
                None if t.exponent == Ordinal::omega() => f.write_str("^w")?,
                None => write!(f, "^({})", t.exponent)?,
            }
            if t.coefficient != 1 {
                write!(f, "*{}", t.coefficient)?;
            }
        }
        Ok(())
    }
}

pub fn print_ordinal(a: &Ordinal) -> String {
    a.to_string()
}

pub fn parse_ordinal(text: &str) -> Result<Ordinal, OrdinalError> {
    let mut cursor = Cursor::new(text);
    let ord = cursor.ordinal(0)?;
    cursor.skip_ws();
    if !cursor.at_end() {
        return Err(cursor.error("trailing input"));
    }
    Ok(ord)
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ordinal(s)
    }
}

/// Recursive-descent reader over ordinal text, also used by the verifier
/// descriptor grammar where an ordinal is embedded in a larger string.
pub(crate) struct Cursor<'a> {
    src: &'a str,
    pub(crate) offset: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Cursor { src, offset: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    fn at_end(&self) -> bool {
        self.offset >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.offset).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.offset += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.offset += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, reason: &str) -> OrdinalError {
        OrdinalError::Parse {
            offset: self.offset,
            reason: reason.to_string(),
        }
    }

    fn nat(&mut self) -> Result<u64, OrdinalError> {
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.error("expected a natural number"));
        }
        let text = &self.rest()[..digits];
        let n = crate::sexp::parse_nat(text).ok_or_else(|| self.error("invalid natural number"))?;
        self.offset += digits;
        Ok(n)
    }

    pub(crate) fn ordinal(&mut self, depth: usize) -> Result<Ordinal, OrdinalError> {
        if depth > MAX_NESTING {
            return Err(self.error("exponent nesting too deep"));
        }
        self.skip_ws();
        let start = self.offset;
        let mut terms = Vec::new();
        loop {
            terms.push(self.term(depth)?);
            let before = self.offset;
            self.skip_ws();
            if !self.eat(b'+') {
                self.offset = before;
                break;
            }
            self.skip_ws();
        }
        // A lone `0` is zero; zero is not allowed as a summand.
        if terms.len() == 1 && terms[0].coefficient == 0 {
            return Ok(Ordinal::zero());
        }
        if terms.iter().any(|t| t.coefficient == 0) {
            return Err(OrdinalError::CnfViolation(format!(
                "zero summand in `{}`",
                &self.src[start..self.offset]
            )));
        }
        Ordinal::from_terms(terms).map_err(|_| {
            OrdinalError::CnfViolation(format!(
                "exponents must strictly decrease in `{}`",
                &self.src[start..self.offset]
            ))
        })
    }

    fn term(&mut self, depth: usize) -> Result<Term, OrdinalError> {
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Ok(Term {
                exponent: Ordinal::zero(),
                coefficient: self.nat()?,
            });
        }
        if !self.eat(b'w') {
            return Err(self.error("expected `w` or a natural number"));
        }
        let exponent = if self.eat(b'^') {
            if self.eat(b'(') {
                let e = self.ordinal(depth + 1)?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                e
            } else if self.eat(b'w') {
                Ordinal::omega()
            } else {
                Ordinal::nat(self.nat()?)
            }
        } else {
            Ordinal::nat(1)
        };
        let coefficient = if self.eat(b'*') {
            let c = self.nat()?;
            if c == 0 {
                return Err(OrdinalError::CnfViolation("zero coefficient".into()));
            }
            c
        } else {
            1
        };
        Ok(Term {
            exponent,
            coefficient,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(s: &str) -> Ordinal {
        parse_ordinal(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    #[test]
    fn reads_cnf_terms() {
        let a = ord("w^2 + w*3 + 5");
        let expected = Ordinal::from_terms(vec![
            Term {
                exponent: Ordinal::nat(2),
                coefficient: 1,
            },
            Term {
                exponent: Ordinal::nat(1),
                coefficient: 3,
            },
            Term {
                exponent: Ordinal::zero(),
                coefficient: 5,
            },
        ])
        .unwrap();
        assert_eq!(a, expected);
        assert_eq!(a.to_string(), "w^2 + w*3 + 5");
    }

    #[test]
    fn rejects_non_cnf() {
        assert!(matches!(parse_ordinal("1 + w"), Err(OrdinalError::CnfViolation(_))));
        assert!(matches!(parse_ordinal("w + w"), Err(OrdinalError::CnfViolation(_))));
        assert!(matches!(parse_ordinal("w*0"), Err(OrdinalError::CnfViolation(_))));
        assert!(matches!(parse_ordinal("w + 0"), Err(OrdinalError::CnfViolation(_))));
        assert!(matches!(parse_ordinal("w^(1 + w)"), Err(OrdinalError::CnfViolation(_))));
        assert!(matches!(parse_ordinal("v"), Err(OrdinalError::Parse { .. })));
        assert!(matches!(parse_ordinal("w^"), Err(OrdinalError::Parse { .. })));
        assert!(matches!(parse_ordinal("w^(w"), Err(OrdinalError::Parse { .. })));
        assert!(matches!(parse_ordinal(""), Err(OrdinalError::Parse { .. })));
        assert!(matches!(parse_ordinal("w w"), Err(OrdinalError::Parse { .. })));
    }

    #[test]
    fn prints_canonically() {
        assert_eq!(ord("w^1").to_string(), "w");
        assert_eq!(ord("w^0*4").to_string(), "4");
        assert_eq!(ord("w^0").to_string(), "1");
        assert_eq!(ord("w*1").to_string(), "w");
        assert_eq!(ord("w^(w)").to_string(), "w^w");
        assert_eq!(ord("w^(w^w)*2 + w^(w + 1) + w^w*3").to_string(), "w^(w^w)*2 + w^(w + 1) + w^w*3");
        assert_eq!(ord("w^2+w*3+5").to_string(), "w^2 + w*3 + 5");
        assert_eq!(ord("0").to_string(), "0");
    }

    #[test]
    fn comparisons_along_the_progression() {
        assert_eq!(compare(&ord("w + 1"), &ord("w*2")), Ordering::Less);
        assert_eq!(compare(&ord("w^w"), &ord("w^3")), Ordering::Greater);
        assert_eq!(compare(&ord("w*2 + 1"), &ord("w*2")), Ordering::Greater);
        assert_eq!(compare(&ord("1000"), &ord("w")), Ordering::Less);
        assert_eq!(compare(&ord("w^(w^w)"), &ord("w^(w^3)*100 + w")), Ordering::Greater);
        assert_eq!(compare(&ord("0"), &ord("0")), Ordering::Equal);
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&ord("0")), Class::Zero);
        assert_eq!(classify(&ord("w + 3")), Class::Successor(ord("w + 2")));
        assert_eq!(classify(&ord("w + 1")), Class::Successor(ord("w")));
        assert_eq!(classify(&ord("1")), Class::Successor(ord("0")));
        assert_eq!(classify(&ord("w^2 + w")), Class::Limit);
        assert_eq!(classify(&ord("w^w")), Class::Limit);
    }

    #[test]
    fn successor() {
        assert_eq!(ord("w").successor(), ord("w + 1"));
        assert_eq!(ord("0").successor().successor(), ord("2"));
        assert_eq!(ord("w*2 + 7").successor(), ord("w*2 + 8"));
    }

    #[test]
    fn fundamental_sequences() {
        let fs = |s: &str, n| fundamental_sequence(&ord(s), n).unwrap().to_string();
        assert_eq!(fs("w", 3), "3");
        assert_eq!(fs("w", 0), "0");
        assert_eq!(fs("w^2", 2), "w*2");
        assert_eq!(fs("w^2", 0), "0");
        assert_eq!(fs("w^w", 3), "w^3");
        assert_eq!(fs("w^w", 0), "1");
        assert_eq!(fs("w*2", 2), "w + 2");
        assert_eq!(fs("w^2*3 + w*4", 5), "w^2*3 + w*3 + 5");
        assert_eq!(fs("w^3*2", 4), "w^3 + w^2*4");
        assert_eq!(fs("w^(w + 2)", 1), "w^(w + 1)");
        assert_eq!(fs("w^(w^w)", 2), "w^(w^2)");
        assert_eq!(fs("w^(w*2)", 3), "w^(w + 3)");
        assert!(matches!(
            fundamental_sequence(&ord("w + 1"), 0),
            Err(OrdinalError::NotALimit(_))
        ));
        assert!(fundamental_sequence(&ord("0"), 0).is_err());
    }
}
