//! Right-hand sides of the exact decomposition identities.
//!
//! Each function returns the factors `e^{i s G}` of one identity in
//! operator-product order, with generators given as [`Kernel`]s. The
//! compiler recursively lowers those kernels to universal gates; the
//! verifier checks the raw factor lists against their left-hand sides.

use std::fmt;

use crate::gate::{Gate, GateSeq};
use crate::weyl::{Basis, Monomial, NOPoly};

/// One single-mode factor `X_mode^power` or `P_mode^power` of a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub mode: usize,
    pub power: u32,
    pub basis: Basis,
}

impl Factor {
    pub fn x(mode: usize, power: u32) -> Self {
        Self {
            mode,
            power,
            basis: Basis::Position,
        }
    }

    pub fn p(mode: usize, power: u32) -> Self {
        Self {
            mode,
            power,
            basis: Basis::Momentum,
        }
    }
}

/// Gate generators that occur during compilation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// Product of single-mode powers on distinct modes.
    Product(Vec<Factor>),
    /// `(X_central + sum_m X_m^{n_m})^power`.
    PowerSum {
        central: usize,
        others: Vec<(usize, u32)>,
        power: u32,
    },
}

impl Kernel {
    pub fn product(factors: impl IntoIterator<Item = Factor>) -> Self {
        let mut f: Vec<Factor> = factors.into_iter().filter(|f| f.power > 0).collect();
        f.sort_by_key(|f| f.mode);
        Kernel::Product(f)
    }

    pub fn to_poly(&self) -> NOPoly {
        match self {
            Kernel::Product(factors) => {
                let spec: Vec<(usize, u16, u16)> = factors
                    .iter()
                    .map(|f| match f.basis {
                        Basis::Position => (f.mode, f.power as u16, 0),
                        Basis::Momentum => (f.mode, 0, f.power as u16),
                    })
                    .collect();
                NOPoly::monomial(Monomial::from_factors(&spec))
            }
            Kernel::PowerSum {
                central,
                others,
                power,
            } => {
                let mut base = NOPoly::x(*central);
                for &(m, n) in others {
                    base = &base + &NOPoly::x_pow(m, n as u16);
                }
                base.pow(*power)
            }
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Product(factors) => {
                for (k, fac) in factors.iter().enumerate() {
                    if k > 0 {
                        write!(f, " ")?;
                    }
                    let sym = if fac.basis == Basis::Position {
                        'X'
                    } else {
                        'P'
                    };
                    write!(f, "{sym}{}", fac.mode)?;
                    if fac.power != 1 {
                        write!(f, "^{}", fac.power)?;
                    }
                }
                Ok(())
            }
            Kernel::PowerSum {
                central,
                others,
                power,
            } => {
                write!(f, "(X{central}")?;
                for (m, n) in others {
                    write!(f, " + X{m}")?;
                    if *n != 1 {
                        write!(f, "^{n}")?;
                    }
                }
                write!(f, ")^{power}")
            }
        }
    }
}

/// A factor `e^{i * strength * kernel}` of an identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub kernel: Kernel,
    pub strength: f64,
}

impl Term {
    pub fn new(kernel: Kernel, strength: f64) -> Self {
        Self { kernel, strength }
    }

    pub fn to_gate(&self) -> Gate {
        Gate::exp(self.kernel.to_poly(), self.strength)
    }
}

/// Raw factor list as a (generally non-universal) gate sequence.
pub fn terms_to_seq(n_target_modes: usize, terms: &[Term], label: &'static str) -> GateSeq {
    let gates = terms
        .iter()
        .map(|t| t.to_gate().with_provenance(label))
        .collect();
    GateSeq::from_gates(n_target_modes, gates)
}

fn x(mode: usize, power: u32) -> Factor {
    Factor::x(mode, power)
}

fn p(mode: usize, power: u32) -> Factor {
    Factor::p(mode, power)
}

fn prod<const N: usize>(factors: [Factor; N]) -> Kernel {
    Kernel::product(factors)
}

/// `e^{i 3 alpha^2 t P_k X_j^2}` from four cubic and four coupling gates
/// plus a cubic correction on `j`.
pub fn px2(j: usize, k: usize, alpha: f64, t: f64) -> Vec<Term> {
    let xx = prod([x(j, 1), x(k, 1)]);
    let p3 = prod([p(k, 3)]);
    vec![
        Term::new(xx.clone(), 2.0 * alpha),
        Term::new(p3.clone(), t),
        Term::new(xx.clone(), -alpha),
        Term::new(p3.clone(), -t),
        Term::new(xx.clone(), -2.0 * alpha),
        Term::new(p3.clone(), t),
        Term::new(xx, alpha),
        Term::new(p3, -t),
        Term::new(prod([x(j, 3)]), 0.75 * alpha.powi(3) * t),
    ]
}

/// `e^{2 i alpha^2 P_k X_j^n}` for `n >= 2`.
pub fn pxn(j: usize, k: usize, n: u32, alpha: f64) -> Vec<Term> {
    assert!(n >= 2);
    let shift = prod([x(j, n - 2), x(k, 1)]);
    let squeeze = prod([x(j, 2), p(k, 2)]);
    vec![
        Term::new(shift.clone(), 2.0 * alpha),
        Term::new(squeeze.clone(), -alpha),
        Term::new(shift, -2.0 * alpha),
        Term::new(squeeze, alpha),
        Term::new(prod([x(j, 2 * (n - 1))]), alpha.powi(3)),
    ]
}

/// `e^{2 i alpha^2 P_k X_l X_j^n}` for `n >= 2`: the three-mode extension
/// of [`pxn`]. The closing correction is `e^{i alpha^3 X_j^{2(n-1)} X_l^2}`.
pub fn pxxn(j: usize, k: usize, l: usize, n: u32, alpha: f64) -> Vec<Term> {
    assert!(n >= 2);
    let shift = prod([x(j, n - 2), x(k, 1), x(l, 1)]);
    let squeeze = prod([x(j, 2), p(k, 2)]);
    vec![
        Term::new(shift.clone(), 2.0 * alpha),
        Term::new(squeeze.clone(), -alpha),
        Term::new(shift, -2.0 * alpha),
        Term::new(squeeze, alpha),
        Term::new(prod([x(j, 2 * (n - 1)), x(l, 2)]), alpha.powi(3)),
    ]
}

/// `e^{i alpha X_c^2 X_o^{2m}}` through the shifted quartics
/// `(X_c +- X_o^m)^4`. With `m = 1` this is the two-squares identity.
pub fn two_squares(c: usize, o: usize, m: u32, alpha: f64) -> Vec<Term> {
    two_squares_scaled(c, o, m, alpha, 1.0)
}

/// [`two_squares`] with the shift `X_c -> X_c +- beta X_o^m`.
pub fn two_squares_scaled(c: usize, o: usize, m: u32, alpha: f64, beta: f64) -> Vec<Term> {
    let conj = prod([p(c, 1), x(o, m)]);
    let quartic = prod([x(c, 4)]);
    let q = alpha / (12.0 * beta * beta);
    vec![
        Term::new(conj.clone(), 2.0 * beta),
        Term::new(quartic.clone(), q),
        Term::new(conj.clone(), -4.0 * beta),
        Term::new(quartic.clone(), q),
        Term::new(conj, 2.0 * beta),
        Term::new(quartic, -2.0 * q),
        Term::new(prod([x(o, 4 * m)]), -alpha * beta * beta / 6.0),
    ]
}

/// `e^{i alpha X_k^N}` for even `N`, using ancilla `j`.
pub fn single_even(k: usize, j: usize, n: u32, alpha: f64) -> Vec<Term> {
    single_even_scaled(k, j, n, alpha, 1.0)
}

/// [`single_even`] with the ancilla shifted by `beta X_k^{N/2}`.
pub fn single_even_scaled(k: usize, j: usize, n: u32, alpha: f64, beta: f64) -> Vec<Term> {
    assert!(n.is_multiple_of(2) && n >= 2);
    let half = n / 2;
    let conj = prod([p(j, 1), x(k, half)]);
    let a = alpha / (beta * beta);
    vec![
        Term::new(conj.clone(), 2.0 * beta),
        Term::new(prod([x(j, 2)]), a),
        Term::new(conj, -2.0 * beta),
        Term::new(prod([x(j, 2)]), -a),
        Term::new(prod([x(j, 1), x(k, half)]), -2.0 * alpha / beta),
    ]
}

/// `e^{i alpha X_k^4}` written with the squared sum still intact:
/// `e^{i alpha (X_j^2 + X_k)^2} e^{-i alpha X_k^2} e^{-2 i alpha X_j^2 X_k}`,
/// where `k` is the ancilla and `j` the target.
pub fn fourth_order(j: usize, k: usize, alpha: f64) -> Vec<Term> {
    vec![
        Term::new(
            Kernel::PowerSum {
                central: k,
                others: vec![(j, 2)],
                power: 2,
            },
            alpha,
        ),
        Term::new(prod([x(k, 2)]), -alpha),
        Term::new(prod([x(j, 2), x(k, 1)]), -2.0 * alpha),
    ]
}

/// `e^{i 2 alpha X_k^N}` for odd `N` divisible by three, using ancillas
/// `j` and `l`.
pub fn single_odd3(k: usize, j: usize, l: usize, n: u32, alpha: f64) -> Vec<Term> {
    assert!(n.is_multiple_of(3) && n % 2 == 1 && n >= 3);
    let third = n / 3;
    vec![
        Term::new(
            Kernel::PowerSum {
                central: j,
                others: vec![(k, third)],
                power: 3,
            },
            2.0 * alpha,
        ),
        Term::new(
            Kernel::PowerSum {
                central: l,
                others: vec![(j, 2), (k, third)],
                power: 2,
            },
            -3.0 * alpha,
        ),
        Term::new(prod([x(j, 3)]), -2.0 * alpha),
        Term::new(prod([x(j, 4)]), 3.0 * alpha),
        Term::new(prod([x(k, 2 * third)]), 3.0 * alpha),
        Term::new(prod([x(j, 1), x(k, 2 * third)]), -6.0 * alpha),
        Term::new(prod([x(j, 2), x(l, 1)]), 6.0 * alpha),
        Term::new(prod([x(k, third), x(l, 1)]), 6.0 * alpha),
        Term::new(prod([x(l, 2)]), 3.0 * alpha),
    ]
}

/// `e^{i t (X_c + sum_m X_m^{n_m})^N}` as nested conjugations of
/// `e^{i t X_c^N}` by `e^{2 i P_c X_m^{n_m}}`; the last summand is the
/// outermost conjugator.
pub fn power_sum(central: usize, others: &[(usize, u32)], power: u32, t: f64) -> Vec<Term> {
    let unit: Vec<(usize, u32, f64)> = others.iter().map(|&(m, n)| (m, n, 1.0)).collect();
    power_sum_scaled(central, &unit, power, t)
}

/// `e^{i t (X_c + sum_m w_m X_m^{n_m})^N}` for summands `(m, n_m, w_m)`.
pub fn power_sum_scaled(
    central: usize,
    others: &[(usize, u32, f64)],
    power: u32,
    t: f64,
) -> Vec<Term> {
    let mut terms: Vec<Term> = others
        .iter()
        .rev()
        .map(|&(m, n, w)| Term::new(prod([p(central, 1), x(m, n)]), 2.0 * w))
        .collect();
    terms.push(Term::new(prod([x(central, power)]), t));
    terms.extend(
        others
            .iter()
            .map(|&(m, n, w)| Term::new(prod([p(central, 1), x(m, n)]), -2.0 * w)),
    );
    terms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::residual_against;

    fn check(n_target: usize, terms: &[Term], lhs: Kernel, strength: f64) {
        let seq = terms_to_seq(n_target, terms, "test");
        let r = residual_against(&seq, &lhs.to_poly(), strength).unwrap();
        assert!(r < 1e-9, "{lhs} at {strength}: residual {r}");
    }

    #[test]
    fn kernel_polys() {
        let k = Kernel::PowerSum {
            central: 0,
            others: vec![(1, 1)],
            power: 2,
        };
        let expect = &(&NOPoly::x_pow(0, 2) + &NOPoly::x_pow(1, 2))
            + &NOPoly::monomial(Monomial::from_factors(&[(0, 1, 0), (1, 1, 0)])).scale_real(2.0);
        assert_eq!(k.to_poly(), expect);
        assert_eq!(
            prod([p(1, 3)]).to_poly(),
            NOPoly::monomial(Monomial::from_factors(&[(1, 0, 3)]))
        );
        assert_eq!(k.to_string(), "(X0 + X1)^2");
    }

    #[test]
    fn factor_counts() {
        assert_eq!(px2(0, 1, 1.0, 1.0).len(), 9);
        assert_eq!(pxn(0, 1, 4, 1.0).len(), 5);
        assert_eq!(two_squares(0, 1, 1, 1.0).len(), 7);
        assert_eq!(single_even(0, 1, 4, 1.0).len(), 5);
        assert_eq!(single_odd3(0, 1, 2, 9, 1.0).len(), 9);
        assert_eq!(power_sum(0, &[(1, 1), (2, 1)], 3, 1.0).len(), 5);
    }

    #[test]
    fn px2_identity() {
        for (alpha, t) in [(0.7, 1.0), (0.3, -0.4), (1.2, 2.0)] {
            check(
                2,
                &px2(0, 1, alpha, t),
                prod([x(0, 2), p(1, 1)]),
                3.0 * alpha * alpha * t,
            );
        }
    }

    #[test]
    fn pxn_identity() {
        for n in 2..=5 {
            let alpha = 0.6;
            check(
                2,
                &pxn(0, 1, n, alpha),
                prod([x(0, n), p(1, 1)]),
                2.0 * alpha * alpha,
            );
        }
    }

    #[test]
    fn pxxn_identity() {
        for n in 2..=3 {
            let alpha = 0.45;
            check(
                3,
                &pxxn(0, 1, 2, n, alpha),
                prod([x(0, n), p(1, 1), x(2, 1)]),
                2.0 * alpha * alpha,
            );
        }
    }

    #[test]
    fn two_squares_identity() {
        for m in 1..=2 {
            check(
                2,
                &two_squares(0, 1, m, 0.8),
                prod([x(0, 2), x(1, 2 * m)]),
                0.8,
            );
        }
    }

    #[test]
    fn single_even_identity() {
        for n in [2, 4, 6, 8] {
            check(1, &single_even(0, 1, n, 0.35), prod([x(0, n)]), 0.35);
        }
    }

    #[test]
    fn fourth_order_identity() {
        check(1, &fourth_order(0, 1, 0.9), prod([x(0, 4)]), 0.9);
    }

    #[test]
    fn single_odd3_identity() {
        for n in [3, 9] {
            check(1, &single_odd3(0, 1, 2, n, 0.25), prod([x(0, n)]), 0.5);
        }
    }

    #[test]
    fn power_sum_identity() {
        let others = [(1, 1), (2, 2)];
        let lhs = Kernel::PowerSum {
            central: 0,
            others: others.to_vec(),
            power: 3,
        };
        check(3, &power_sum(0, &others, 3, 0.2), lhs, 0.2);
    }

    #[test]
    fn scaled_shifts_stay_exact() {
        for beta in [0.3, 1.7] {
            check(
                2,
                &two_squares_scaled(0, 1, 1, 0.8, beta),
                prod([x(0, 2), x(1, 2)]),
                0.8,
            );
            check(
                1,
                &single_even_scaled(0, 1, 4, 0.35, beta),
                prod([x(0, 4)]),
                0.35,
            );
        }
        let sum = &(&NOPoly::x(0) + &NOPoly::x(1).scale_real(0.5))
            + &NOPoly::x_pow(2, 2).scale_real(-0.3);
        let seq = terms_to_seq(
            3,
            &power_sum_scaled(0, &[(1, 1, 0.5), (2, 2, -0.3)], 3, 0.2),
            "test",
        );
        assert!(residual_against(&seq, &sum.pow(3), 0.2).unwrap() < 1e-9);
    }

    #[test]
    fn printed_sign_of_pxn_correction_fails() {
        let mut terms = pxn(0, 1, 3, 0.6);
        terms[4].strength = -terms[4].strength;
        let seq = terms_to_seq(2, &terms, "test");
        let lhs = prod([x(0, 3), p(1, 1)]).to_poly();
        assert!(residual_against(&seq, &lhs, 0.72).unwrap() > 0.1);
    }
}
