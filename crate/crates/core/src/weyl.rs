//! Normal-ordered polynomials in the quadrature operators `X_j`, `P_j`.
//!
//! Every monomial is stored per mode as `X^a P^b`, with modes ordered by
//! index. Products are brought back to normal order with the canonical
//! commutator `[X_j, P_j] = i/2`; distinct modes commute.
//!
//! Coefficients are complex doubles. Terms whose magnitude falls below
//! [`PRUNE_THRESHOLD`] are dropped after every operation, so an exactly
//! vanishing expression compares equal to zero.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::gate::{Gate, GateKind, GateSeq};

/// Coefficients with magnitude below this are treated as zero.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeylError {
    #[error("conjugation series did not terminate within {bound} nested commutators")]
    NonTerminatingSeries { bound: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Position,
    Momentum,
}

/// A single quadrature generator, `X_mode` or `P_mode`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadLabel {
    pub mode: usize,
    pub basis: Basis,
}

impl QuadLabel {
    pub fn x(mode: usize) -> Self {
        Self {
            mode,
            basis: Basis::Position,
        }
    }

    pub fn p(mode: usize) -> Self {
        Self {
            mode,
            basis: Basis::Momentum,
        }
    }
}

impl fmt::Display for QuadLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.basis {
            Basis::Position => write!(f, "X{}", self.mode),
            Basis::Momentum => write!(f, "P{}", self.mode),
        }
    }
}

/// Non-trivial factors `(mode, x, p)` sorted by mode, so each operator has
/// exactly one representation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(SmallVec<[(u32, u16, u16); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Self(SmallVec::new())
    }

    /// Builds a monomial from `(mode, x_exp, p_exp)` factors. Repeated modes
    /// are not allowed to mix orders silently, so they must be distinct.
    pub fn from_factors(factors: &[(usize, u16, u16)]) -> Self {
        let mut m = Self::one();
        for &(mode, x, p) in factors {
            let mode = u32::try_from(mode).expect("mode index fits in u32");
            match m.0.binary_search_by_key(&mode, |e| e.0) {
                Ok(_) => panic!("mode {mode} repeated in monomial"),
                Err(at) if (x, p) != (0, 0) => m.0.insert(at, (mode, x, p)),
                Err(_) => {}
            }
        }
        m
    }

    /// `(x_exp, p_exp)` on `mode`.
    pub fn exponents(&self, mode: usize) -> (u16, u16) {
        let Ok(mode) = u32::try_from(mode) else {
            return (0, 0);
        };
        match self.0.binary_search_by_key(&mode, |e| e.0) {
            Ok(i) => (self.0[i].1, self.0[i].2),
            Err(_) => (0, 0),
        }
    }

    pub fn degree(&self) -> u32 {
        self.0
            .iter()
            .map(|&(_, x, p)| u32::from(x) + u32::from(p))
            .sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of mode slots (one past the highest non-trivial mode).
    pub fn width(&self) -> usize {
        self.0.last().map_or(0, |e| e.0 as usize + 1)
    }

    /// Modes carrying a non-trivial factor.
    pub fn modes(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|e| e.0 as usize)
    }

    pub fn has_momentum(&self) -> bool {
        self.0.iter().any(|&(_, _, p)| p > 0)
    }

    /// Normal-ordered expansion of the operator product `self * other`.
    fn mul_expand(&self, other: &Self) -> SmallVec<[(Monomial, Complex64); 4]> {
        let mut modes: SmallVec<[u32; 8]> = self.0.iter().chain(&other.0).map(|e| e.0).collect();
        modes.sort_unstable();
        modes.dedup();
        let mut out: SmallVec<[(Monomial, Complex64); 4]> = smallvec![(
            Monomial(SmallVec::with_capacity(modes.len())),
            Complex64::new(1.0, 0.0)
        )];
        for &mode in &modes {
            let (a, b) = self.exponents(mode as usize);
            let (c, d) = other.exponents(mode as usize);
            if b == 0 || c == 0 {
                for (m, _) in out.iter_mut() {
                    m.0.push((mode, a + c, b + d));
                }
                continue;
            }
            // X^a (P^b X^c) P^d with P^b X^c = sum_k k! C(b,k) C(c,k) (-i/2)^k X^{c-k} P^{b-k}
            let kmax = b.min(c);
            let mut next = SmallVec::with_capacity(out.len() * (kmax as usize + 1));
            for (m, coeff) in &out {
                for k in 0..=kmax {
                    let w = reorder_weight(b, c, k);
                    let mut m2 = m.clone();
                    if (a + c - k, b - k + d) != (0, 0) {
                        m2.0.push((mode, a + c - k, b - k + d));
                    }
                    next.push((m2, coeff * w));
                }
            }
            out = next;
        }
        out
    }
}

/// `k! C(b,k) C(c,k) (-i/2)^k`.
fn reorder_weight(b: u16, c: u16, k: u16) -> Complex64 {
    let mut w = 1.0f64;
    for r in 0..k {
        // k! C(b,k) C(c,k) = prod_{r<k} (b-r)(c-r)/(r+1)
        w *= f64::from(b - r) * f64::from(c - r) / f64::from(r + 1);
    }
    w *= 0.5f64.powi(i32::from(k));
    // (-i)^k
    let phase = match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    phase * w
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for &(mode, x, p) in &self.0 {
            for (e, sym) in [(x, 'X'), (p, 'P')] {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, " ")?;
                }
                first = false;
                write!(f, "{sym}{mode}")?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Normal-ordered polynomial with complex coefficients.
///
/// Terms are kept sorted by monomial with no duplicates and no coefficient
/// below the prune threshold.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NOPoly {
    terms: Vec<(Monomial, Complex64)>,
    degree: u32,
}

impl NOPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_terms([(Monomial::one(), c)])
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn x(mode: usize) -> Self {
        Self::monomial(Monomial::from_factors(&[(mode, 1, 0)]))
    }

    pub fn p(mode: usize) -> Self {
        Self::monomial(Monomial::from_factors(&[(mode, 0, 1)]))
    }

    pub fn generator(label: QuadLabel) -> Self {
        match label.basis {
            Basis::Position => Self::x(label.mode),
            Basis::Momentum => Self::p(label.mode),
        }
    }

    /// `X_mode^power`.
    pub fn x_pow(mode: usize, power: u16) -> Self {
        Self::monomial(Monomial::from_factors(&[(mode, power, 0)]))
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::from_terms([(m, Complex64::new(1.0, 0.0))])
    }

    /// Annihilation operator `a = X + iP`.
    pub fn annihilation(mode: usize) -> Self {
        Self::x(mode) + Self::p(mode).scale(I)
    }

    /// Creation operator `a^dagger = X - iP`.
    pub fn creation(mode: usize) -> Self {
        Self::x(mode) - Self::p(mode).scale(I)
    }

    /// Sums coefficients of repeated monomials and prunes.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Complex64)>) -> Self {
        let mut acc: HashMap<Monomial, Complex64> = HashMap::new();
        for (m, c) in terms {
            *acc.entry(m).or_default() += c;
        }
        Self::from_map(acc)
    }

    fn from_map(acc: HashMap<Monomial, Complex64>) -> Self {
        let mut terms: Vec<_> = acc
            .into_iter()
            .filter(|(_, c)| c.norm() >= PRUNE_THRESHOLD)
            .collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Self::from_sorted(terms)
    }

    fn from_sorted(terms: Vec<(Monomial, Complex64)>) -> Self {
        let degree = terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0);
        Self { terms, degree }
    }

    pub fn terms(&self) -> &[(Monomial, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total degree over stored terms (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Number of mode slots referenced.
    pub fn width(&self) -> usize {
        self.terms.iter().map(|(m, _)| m.width()).max().unwrap_or(0)
    }

    pub fn modes(&self) -> Vec<usize> {
        let mut modes: Vec<usize> = self.terms.iter().flat_map(|(m, _)| m.modes()).collect();
        modes.sort_unstable();
        modes.dedup();
        modes
    }

    pub fn coeff(&self, m: &Monomial) -> Complex64 {
        self.terms
            .binary_search_by(|(k, _)| k.cmp(m))
            .map(|i| self.terms[i].1)
            .unwrap_or_default()
    }

    /// The single monomial of a one-term polynomial with coefficient 1.
    pub fn as_unit_monomial(&self) -> Option<&Monomial> {
        match self.terms.as_slice() {
            [(m, c)] if (*c - Complex64::new(1.0, 0.0)).norm() == 0.0 => Some(m),
            _ => None,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c.norm() == 0.0 {
            return Self::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, k)| (m.clone(), k * c))
            .filter(|(_, k)| k.norm() >= PRUNE_THRESHOLD)
            .collect();
        Self::from_sorted(terms)
    }

    pub fn scale_real(&self, r: f64) -> Self {
        self.scale(Complex64::new(r, 0.0))
    }

    /// Largest coefficient magnitude; the norm used for residuals.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    /// Normal-ordered product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut acc: HashMap<Monomial, Complex64> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                for (m, w) in ma.mul_expand(mb) {
                    *acc.entry(m).or_default() += c * w;
                }
            }
        }
        Self::from_map(acc)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut acc: HashMap<Monomial, Complex64> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                // Monomials on disjoint modes, or with no X/P overlap, commute.
                if !monomials_may_not_commute(ma, mb) {
                    continue;
                }
                let c = ca * cb;
                for (m, w) in ma.mul_expand(mb) {
                    *acc.entry(m).or_default() += c * w;
                }
                for (m, w) in mb.mul_expand(ma) {
                    *acc.entry(m).or_default() -= c * w;
                }
            }
        }
        Self::from_map(acc)
    }

    /// Hermitian adjoint, returned in normal order.
    pub fn adjoint(&self) -> Self {
        // (X^a P^b)^dagger = P^b X^a; rebuild the product per mode.
        let mut acc = Self::zero();
        for (m, c) in &self.terms {
            let mut term = Self::constant(c.conj());
            for mode in m.modes() {
                let (a, b) = m.exponents(mode);
                let pb = Self::monomial(Monomial::from_factors(&[(mode, 0, b)]));
                let xa = Self::monomial(Monomial::from_factors(&[(mode, a, 0)]));
                term = term.mul(&pb.mul(&xa));
            }
            acc = &acc + &term;
        }
        acc
    }

    /// True if the polynomial equals its adjoint to within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self - &self.adjoint()).max_abs_coeff() < tol
    }

    /// Drops coefficients below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, c)| c.norm() >= tol)
            .cloned()
            .collect();
        Self::from_sorted(terms)
    }
}

fn monomials_may_not_commute(a: &Monomial, b: &Monomial) -> bool {
    a.modes().any(|mode| {
        let (ax, ap) = a.exponents(mode);
        let (bx, bp) = b.exponents(mode);
        (ax > 0 && bp > 0) || (ap > 0 && bx > 0)
    })
}

impl Add for &NOPoly {
    type Output = NOPoly;

    fn add(self, rhs: &NOPoly) -> NOPoly {
        merge_sorted(&self.terms, &rhs.terms, 1.0)
    }
}

impl Sub for &NOPoly {
    type Output = NOPoly;

    fn sub(self, rhs: &NOPoly) -> NOPoly {
        merge_sorted(&self.terms, &rhs.terms, -1.0)
    }
}

impl Add for NOPoly {
    type Output = NOPoly;

    fn add(self, rhs: NOPoly) -> NOPoly {
        &self + &rhs
    }
}

impl Sub for NOPoly {
    type Output = NOPoly;

    fn sub(self, rhs: NOPoly) -> NOPoly {
        &self - &rhs
    }
}

impl Mul for &NOPoly {
    type Output = NOPoly;

    fn mul(self, rhs: &NOPoly) -> NOPoly {
        NOPoly::mul(self, rhs)
    }
}

impl Neg for &NOPoly {
    type Output = NOPoly;

    fn neg(self) -> NOPoly {
        self.scale_real(-1.0)
    }
}

fn merge_sorted(a: &[(Monomial, Complex64)], b: &[(Monomial, Complex64)], sign: f64) -> NOPoly {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let pick = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.0.cmp(&y.0),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        let (m, c) = match pick {
            std::cmp::Ordering::Less => {
                i += 1;
                (a[i - 1].0.clone(), a[i - 1].1)
            }
            std::cmp::Ordering::Greater => {
                j += 1;
                (b[j - 1].0.clone(), b[j - 1].1 * sign)
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
                (a[i - 1].0.clone(), a[i - 1].1 + b[j - 1].1 * sign)
            }
        };
        if c.norm() >= PRUNE_THRESHOLD {
            out.push((m, c));
        }
    }
    NOPoly::from_sorted(out)
}

impl fmt::Display for NOPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            if !m.is_one() {
                write!(f, " {m}")?;
            }
        }
        Ok(())
    }
}

/// `e^{A} b e^{-A}` with `A = i * strength * generator`, summed as the
/// nested-commutator series until a term vanishes.
///
/// The series is cut off with an error after `2 + deg(b) * deg(generator)`
/// nested commutators; every conjugator the compiler uses terminates well
/// before that.
pub fn bch_conjugate(generator: &NOPoly, strength: f64, b: &NOPoly) -> Result<NOPoly, WeylError> {
    if strength == 0.0 || b.is_zero() {
        return Ok(b.clone());
    }
    let bound = 2 + (b.degree() as usize) * (generator.degree().max(1) as usize);
    let mut sum = b.clone();
    let mut term = b.clone();
    for n in 1..=bound {
        term = generator
            .commutator(&term)
            .scale(Complex64::new(0.0, strength / n as f64));
        if term.is_zero() {
            return Ok(sum);
        }
        sum = &sum + &term;
    }
    Err(WeylError::NonTerminatingSeries { bound })
}

/// Conjugation `U b U^dagger` by the unitary `U` of a gate.
///
/// For `ExpPoly` gates `U = e^{i s G}`. `Fourier(m, +1)` is
/// `F = e^{i pi/2 (X^2 + P^2)}`, which sends `X_m -> P_m`, `P_m -> -X_m`;
/// its inverse sends `X_m -> -P_m`, `P_m -> X_m`.
pub fn heisenberg_conjugate(g: &Gate, b: &NOPoly) -> Result<NOPoly, WeylError> {
    match &g.kind {
        GateKind::Fourier { mode, inverse } => Ok(fourier_map(*mode, *inverse).apply(b)),
        GateKind::ExpPoly {
            generator,
            strength,
        } => bch_conjugate(generator, *strength, b),
    }
}

fn fourier_map(mode: usize, inverse: bool) -> Automorphism {
    let sign = if inverse { -1.0 } else { 1.0 };
    let mut map = Automorphism::identity();
    map.set(QuadLabel::x(mode), NOPoly::p(mode).scale_real(sign));
    map.set(QuadLabel::p(mode), NOPoly::x(mode).scale_real(-sign));
    map
}

/// An algebra automorphism given by the images of finitely many generators;
/// generators without an explicit image are fixed.
#[derive(Debug, Clone, Default)]
pub struct Automorphism {
    images: HashMap<QuadLabel, NOPoly>,
}

impl Automorphism {
    pub fn identity() -> Self {
        Self::default()
    }

    /// The map `b -> U b U^dagger` for a single gate, restricted to the
    /// generators it moves.
    pub fn of_gate(g: &Gate) -> Result<Self, WeylError> {
        match &g.kind {
            GateKind::Fourier { mode, inverse } => Ok(fourier_map(*mode, *inverse)),
            GateKind::ExpPoly {
                generator,
                strength,
            } => {
                let mut map = Self::identity();
                for mode in generator.modes() {
                    for label in [QuadLabel::x(mode), QuadLabel::p(mode)] {
                        let gen = NOPoly::generator(label);
                        let img = bch_conjugate(generator, *strength, &gen)?;
                        if img != gen {
                            map.set(label, img);
                        }
                    }
                }
                Ok(map)
            }
        }
    }

    pub fn set(&mut self, label: QuadLabel, image: NOPoly) {
        self.images.insert(label, image);
    }

    pub fn image(&self, label: QuadLabel) -> NOPoly {
        self.images
            .get(&label)
            .cloned()
            .unwrap_or_else(|| NOPoly::generator(label))
    }

    pub fn moved(&self) -> impl Iterator<Item = (&QuadLabel, &NOPoly)> {
        self.images.iter()
    }

    /// Applies the map to a polynomial by substituting generator images.
    pub fn apply(&self, poly: &NOPoly) -> NOPoly {
        if self.images.is_empty() {
            return poly.clone();
        }
        let mut moved_modes: Vec<usize> = self.images.keys().map(|l| l.mode).collect();
        moved_modes.sort_unstable();
        moved_modes.dedup();

        let mut powers: HashMap<(QuadLabel, u16), NOPoly> = HashMap::new();
        let mut acc: HashMap<Monomial, Complex64> = HashMap::new();
        for (m, c) in poly.terms() {
            // Split into the factor on moved modes and the fixed remainder.
            let mut fixed = m.clone();
            let mut image = NOPoly::constant(*c);
            for &mode in &moved_modes {
                let (a, b) = m.exponents(mode);
                if a == 0 && b == 0 {
                    continue;
                }
                fixed.0.retain(|e| e.0 as usize != mode);
                for (label, e) in [(QuadLabel::x(mode), a), (QuadLabel::p(mode), b)] {
                    if e == 0 {
                        continue;
                    }
                    let factor = powers.entry((label, e)).or_insert_with(|| {
                        let base = self.image(label);
                        base.pow(u32::from(e))
                    });
                    image = image.mul(factor);
                }
            }
            if image.is_zero() {
                continue;
            }
            let fixed = NOPoly::monomial(fixed);
            for (mm, cc) in image.mul(&fixed).terms {
                *acc.entry(mm).or_default() += cc;
            }
        }
        NOPoly::from_map(acc)
    }
}

/// Leading factors of the Zassenhaus product
/// `e^{it(A+B)} = e^{itA} e^{itB} e^{(t^2/2)[A,B]} e^{(-it^3/6)(2[B,[A,B]] + [A,[A,B]])} ...`
/// in operator-product order. At most four factors are produced; factors
/// with a vanishing generator are dropped, so commuting `A`, `B` give an
/// exact two-gate sequence.
pub fn zassenhaus_split(a: &NOPoly, b: &NOPoly, t: f64, order: usize) -> GateSeq {
    assert!(order >= 2, "the split needs at least two factors");
    let n = a.width().max(b.width());
    let mut gates = vec![Gate::exp(a.clone(), t), Gate::exp(b.clone(), t)];
    let ab = a.commutator(b);
    if order >= 3 && !ab.is_zero() {
        gates.push(Gate::exp(ab.scale(-I), t * t / 2.0));
        if order >= 4 {
            let h4 = &b.commutator(&ab).scale_real(2.0) + &a.commutator(&ab);
            if !h4.is_zero() {
                gates.push(Gate::exp(h4, -t * t * t / 6.0));
            }
        }
    }
    GateSeq::from_gates(n, gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::Gate;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn p_times_x_reorders_with_half_i() {
        let prod = NOPoly::p(0).mul(&NOPoly::x(0));
        let expect = NOPoly::from_terms([
            (Monomial::from_factors(&[(0, 1, 1)]), c(1.0, 0.0)),
            (Monomial::one(), c(0.0, -0.5)),
        ]);
        assert_eq!(prod, expect);
        assert_eq!(
            NOPoly::x(0).mul(&NOPoly::p(0)),
            NOPoly::monomial(Monomial::from_factors(&[(0, 1, 1)]))
        );
    }

    #[test]
    fn canonical_commutators() {
        assert_eq!(
            NOPoly::x(0).commutator(&NOPoly::p(0)),
            NOPoly::constant(c(0.0, 0.5))
        );
        assert!(NOPoly::x(0).commutator(&NOPoly::x(1)).is_zero());
        assert!(NOPoly::x(0).commutator(&NOPoly::p(1)).is_zero());
    }

    #[test]
    fn cubic_square_commutator_gives_symmetrized_term() {
        // (2/3)[X^3, P^2] = i (X^2 P + P X^2), so that
        // e^{it(X^2 P + P X^2)} = e^{(2t/3)[X^3, P^2]}.
        let lhs = NOPoly::x_pow(0, 3)
            .commutator(&NOPoly::p(0).pow(2))
            .scale(c(0.0, -2.0 / 3.0));
        let x2 = NOPoly::x_pow(0, 2);
        let p = NOPoly::p(0);
        let rhs = &x2.mul(&p) + &p.mul(&x2);
        assert!((&lhs - &rhs).max_abs_coeff() < 1e-14, "{lhs} vs {rhs}");
    }

    #[test]
    fn ladder_operators_commute_to_one() {
        let a = NOPoly::annihilation(0);
        let ad = NOPoly::creation(0);
        assert_eq!(a.commutator(&ad), NOPoly::one());
        let n = ad.mul(&a);
        let expect =
            &(&NOPoly::x_pow(0, 2) + &NOPoly::p(0).pow(2)) - &NOPoly::constant(c(0.5, 0.0));
        assert!((&n - &expect).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn adjoint_of_xp() {
        // (XP)^dagger = PX = XP - i/2
        let xp = NOPoly::x(0).mul(&NOPoly::p(0));
        let adj = xp.adjoint();
        let expect = &xp - &NOPoly::constant(c(0.0, 0.5));
        assert_eq!(adj, expect);
        let sym = &xp + &adj;
        assert!(sym.is_hermitian(1e-14));
        assert!(!xp.is_hermitian(1e-14));
    }

    #[test]
    fn fourier_conjugation_rotates_quadratures() {
        let f = Gate::fourier(0, false);
        let fi = Gate::fourier(0, true);
        assert_eq!(
            heisenberg_conjugate(&f, &NOPoly::x(0)).unwrap(),
            NOPoly::p(0)
        );
        assert_eq!(
            heisenberg_conjugate(&f, &NOPoly::p(0)).unwrap(),
            -&NOPoly::x(0)
        );
        assert_eq!(
            heisenberg_conjugate(&fi, &NOPoly::x(0)).unwrap(),
            -&NOPoly::p(0)
        );
        assert_eq!(
            heisenberg_conjugate(&fi, &NOPoly::p(0)).unwrap(),
            NOPoly::x(0)
        );
    }

    #[test]
    fn bch_examples() {
        let t = 0.37;
        let g = Gate::exp(NOPoly::x_pow(0, 2), t);
        let img = heisenberg_conjugate(&g, &NOPoly::p(0)).unwrap();
        assert!((&img - &(&NOPoly::p(0) - &NOPoly::x(0).scale_real(t))).max_abs_coeff() < 1e-15);

        let g = Gate::exp(NOPoly::x_pow(0, 3), t);
        let img = heisenberg_conjugate(&g, &NOPoly::p(0)).unwrap();
        let expect = &NOPoly::p(0) - &NOPoly::x_pow(0, 2).scale_real(1.5 * t);
        assert!((&img - &expect).max_abs_coeff() < 1e-15);

        let gen = NOPoly::monomial(Monomial::from_factors(&[(0, 0, 1), (1, 1, 0)]));
        let g = Gate::exp(gen, 2.0);
        let img = heisenberg_conjugate(&g, &NOPoly::x(0)).unwrap();
        assert_eq!(img, &NOPoly::x(0) + &NOPoly::x(1));
    }

    #[test]
    fn series_bound_is_enforced() {
        // X^2 P^2 on P: each commutator raises the degree, never terminates.
        let gen = NOPoly::monomial(Monomial::from_factors(&[(0, 2, 2)]));
        let err = bch_conjugate(&gen, 0.1, &NOPoly::p(0)).unwrap_err();
        assert!(matches!(err, WeylError::NonTerminatingSeries { .. }));
    }

    #[test]
    fn automorphism_matches_direct_conjugation() {
        let gen = NOPoly::x_pow(0, 3);
        let g = Gate::exp(gen, 0.3);
        let map = Automorphism::of_gate(&g).unwrap();
        let b = &NOPoly::p(0).pow(3) + &NOPoly::x(0).mul(&NOPoly::p(0)).mul(&NOPoly::p(1));
        let direct = heisenberg_conjugate(&g, &b).unwrap();
        let subst = map.apply(&b);
        assert!((&direct - &subst).max_abs_coeff() < 1e-12);
    }

    #[test]
    fn zassenhaus_commuting_pair_is_exact() {
        let seq = zassenhaus_split(&NOPoly::x(0), &NOPoly::x(1), 1.0, 4);
        assert_eq!(seq.len(), 2);
        let r =
            crate::verifier::residual_against(&seq, &(&NOPoly::x(0) + &NOPoly::x(1)), 1.0).unwrap();
        assert!(r < 1e-14);
    }

    #[test]
    fn zassenhaus_factors() {
        let t = 0.3;
        let a = NOPoly::x_pow(0, 2);
        let b = NOPoly::p(0);
        let seq = zassenhaus_split(&a, &b, t, 3);
        assert_eq!(seq.len(), 3);
        let GateKind::ExpPoly {
            generator,
            strength,
        } = &seq.gates[2].kind
        else {
            panic!()
        };
        // i s G = (t^2/2) [a, b]
        let lhs = generator.scale(c(0.0, *strength));
        let rhs = a.commutator(&b).scale_real(t * t / 2.0);
        assert!((&lhs - &rhs).max_abs_coeff() < 1e-15);
        assert!(generator.is_hermitian(1e-14));

        let a = NOPoly::x_pow(0, 3);
        let b = NOPoly::p(0).pow(2);
        let seq = zassenhaus_split(&a, &b, t, 4);
        assert_eq!(seq.len(), 4);
        let GateKind::ExpPoly {
            generator,
            strength,
        } = &seq.gates[3].kind
        else {
            panic!()
        };
        let ab = a.commutator(&b);
        let inner = &b.commutator(&ab).scale_real(2.0) + &a.commutator(&ab);
        let lhs = generator.scale(c(0.0, *strength));
        let rhs = inner.scale(c(0.0, -t * t * t / 6.0));
        assert!((&lhs - &rhs).max_abs_coeff() < 1e-14);
        assert!(generator.is_hermitian(1e-12));
    }
}
