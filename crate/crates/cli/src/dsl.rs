//! Text form of targets: `t=0.1 X[0] X[1] X[2]^2`.
//!
//! Whitespace or `*` separates tokens. Exactly one `t=<float>` is required.
//! Factors are `X[i]` or `P[i]` with an optional `^n`, `n >= 1`. A sum of
//! products joined by `+` is accepted by [`parse_sum`] for product-formula
//! splitting; all terms share the strength.

use std::collections::BTreeSet;

use cvexact::decomposer::TargetGate;
use cvexact::identities::Factor;
use cvexact::weyl::Basis;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("missing strength `t=<float>`")]
    MissingStrength,
    #[error("strength given twice")]
    DuplicateStrength,
    #[error("bad strength `{0}`")]
    BadStrength(String),
    #[error("unrecognised token `{0}`; expected X[i], P[i], X[i]^n or t=<float>")]
    BadToken(String),
    #[error("mode {0} appears twice")]
    DuplicateMode(usize),
    #[error("exponent must be at least 1 in `{0}`")]
    ZeroExponent(String),
    #[error("no factors")]
    Empty,
    #[error("a sum of {0} terms needs product-formula splitting (pass --trotter K)")]
    Sum(usize),
}

/// One product term with its shared strength.
#[derive(Debug, Clone, PartialEq)]
pub struct SumSpec {
    pub strength: f64,
    pub terms: Vec<Vec<Factor>>,
}

pub fn parse(text: &str) -> Result<TargetGate, ParseError> {
    let sum = parse_sum(text)?;
    if sum.terms.len() != 1 {
        return Err(ParseError::Sum(sum.terms.len()));
    }
    let factors = sum.terms.into_iter().next().expect("one term");
    Ok(TargetGate::new(factors, sum.strength).expect("factors checked while parsing"))
}

pub fn parse_sum(text: &str) -> Result<SumSpec, ParseError> {
    let mut strength = None;
    let mut terms = Vec::new();
    for chunk in text.split('+') {
        let mut factors = Vec::new();
        let mut seen = BTreeSet::new();
        for tok in chunk
            .split(|c: char| c.is_whitespace() || c == '*')
            .filter(|t| !t.is_empty())
        {
            if let Some(v) = tok.strip_prefix("t=") {
                if strength.is_some() {
                    return Err(ParseError::DuplicateStrength);
                }
                let t: f64 = v
                    .parse()
                    .map_err(|_| ParseError::BadStrength(v.to_string()))?;
                if !t.is_finite() {
                    return Err(ParseError::BadStrength(v.to_string()));
                }
                strength = Some(t);
                continue;
            }
            let f = factor(tok)?;
            if !seen.insert(f.mode) {
                return Err(ParseError::DuplicateMode(f.mode));
            }
            factors.push(f);
        }
        if factors.is_empty() {
            return Err(ParseError::Empty);
        }
        terms.push(factors);
    }
    Ok(SumSpec {
        strength: strength.ok_or(ParseError::MissingStrength)?,
        terms,
    })
}

fn factor(tok: &str) -> Result<Factor, ParseError> {
    let bad = || ParseError::BadToken(tok.to_string());
    let basis = match tok.chars().next() {
        Some('X') => Basis::Position,
        Some('P') => Basis::Momentum,
        _ => return Err(bad()),
    };
    let rest = tok[1..].strip_prefix('[').ok_or_else(bad)?;
    let (mode, tail) = rest.split_once(']').ok_or_else(bad)?;
    let mode: usize = mode.parse().map_err(|_| bad())?;
    let power: u32 = match tail {
        "" => 1,
        _ => tail
            .strip_prefix('^')
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?,
    };
    if power == 0 {
        return Err(ParseError::ZeroExponent(tok.to_string()));
    }
    Ok(Factor { mode, power, basis })
}

pub fn format(target: &TargetGate) -> String {
    let mut out = format!("t={}", target.strength);
    for f in target.factors() {
        let q = if f.basis == Basis::Position { 'X' } else { 'P' };
        out.push_str(&format!(" {q}[{}]", f.mode));
        if f.power != 1 {
            out.push_str(&format!("^{}", f.power));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn example() {
        let t = parse("t=0.1 X[0] X[1] X[2]^2").unwrap();
        assert_eq!(
            t,
            TargetGate::x_product(&[(0, 1), (1, 1), (2, 2)], 0.1).unwrap()
        );
        assert_eq!(format(&t), "t=0.1 X[0] X[1] X[2]^2");
    }

    #[test]
    fn momentum_and_order() {
        let t = parse("P[2] X[0]^3 t=-2").unwrap();
        assert_eq!(t.strength, -2.0);
        assert_eq!(t.exponents[&2], (1, Basis::Momentum));
        assert_eq!(format(&t), "t=-2 X[0]^3 P[2]");
    }

    #[test]
    fn errors() {
        assert_eq!(parse("X[0] X[0]^2 t=1"), Err(ParseError::DuplicateMode(0)));
        assert_eq!(parse("X[0] P[0] t=1"), Err(ParseError::DuplicateMode(0)));
        assert_eq!(parse("X[0]"), Err(ParseError::MissingStrength));
        assert_eq!(parse("t=1 t=2 X[0]"), Err(ParseError::DuplicateStrength));
        assert_eq!(parse("t=1"), Err(ParseError::Empty));
        assert_eq!(parse("t=x X[0]"), Err(ParseError::BadStrength("x".into())));
        assert_eq!(
            parse("t=inf X[0]"),
            Err(ParseError::BadStrength("inf".into()))
        );
        assert!(matches!(parse("t=1 Y[0]"), Err(ParseError::BadToken(_))));
        assert!(matches!(parse("t=1 X[a]"), Err(ParseError::BadToken(_))));
        assert!(matches!(parse("t=1 X[0]^"), Err(ParseError::BadToken(_))));
        assert!(matches!(parse("t=1 X[0]2"), Err(ParseError::BadToken(_))));
        assert!(matches!(
            parse("t=1 X[0]^0"),
            Err(ParseError::ZeroExponent(_))
        ));
        assert_eq!(parse("t=1 X[0]^2 + P[0]^2"), Err(ParseError::Sum(2)));
    }

    #[test]
    fn sums() {
        let s = parse_sum("t=0.1 X[0]^2 + P[0]^2").unwrap();
        assert_eq!(s.strength, 0.1);
        assert_eq!(s.terms, vec![vec![Factor::x(0, 2)], vec![Factor::p(0, 2)]]);
        assert_eq!(parse_sum("t=1 X[0] +"), Err(ParseError::Empty));
    }

    fn arb_target() -> impl Strategy<Value = TargetGate> {
        (
            prop::collection::btree_map(0usize..6, (1u32..7, any::<bool>()), 1..5),
            prop::num::f64::NORMAL,
        )
            .prop_map(|(modes, t)| {
                let factors =
                    modes
                        .into_iter()
                        .map(|(m, (n, p))| if p { Factor::p(m, n) } else { Factor::x(m, n) });
                TargetGate::new(factors, t).unwrap()
            })
    }

    proptest! {
        #[test]
        fn round_trip(target in arb_target()) {
            let text = format(&target);
            prop_assert_eq!(parse(&text).unwrap(), target);
        }
    }
}
