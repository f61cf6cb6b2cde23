//! Approximate decompositions used for comparison: product formulas, the
//! group-commutator expansion and a gate-count model for the latter.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::decomposer::{compile, CompileOptions, DecompError, TargetGate};
use crate::gate::GateSeq;
use crate::identities::Factor;
use crate::verifier::numeric::{
    circuit_matrix, dense_subspace_error, exp_anti_hermitian, exp_i_hermitian, fock_matrices,
    poly_matrix, FockContext, NumericReport,
};
use crate::weyl::NOPoly;

/// Reads a single real-coefficient monomial as `coeff * prod factors`.
pub fn monomial_target(poly: &NOPoly) -> Result<(Vec<Factor>, f64), DecompError> {
    let [(mono, c)] = poly.terms() else {
        return Err(DecompError::Ineligible(format!(
            "{poly} is not a single monomial"
        )));
    };
    if c.im.abs() > 1e-12 {
        return Err(DecompError::Ineligible(format!(
            "{poly} has a complex coefficient"
        )));
    }
    let mut factors = Vec::new();
    for m in mono.modes() {
        match mono.exponents(m) {
            (a, 0) => factors.push(Factor::x(m, u32::from(a))),
            (0, b) => factors.push(Factor::p(m, u32::from(b))),
            _ => {
                return Err(DecompError::Ineligible(format!(
                    "{poly} mixes X and P on mode {m}"
                )))
            }
        }
    }
    Ok((factors, c.re))
}

/// Exact circuit for `e^{i s H}` with `H` a single monomial.
fn exact_exp(h: &NOPoly, s: f64, n_modes: usize) -> Result<GateSeq, DecompError> {
    let (factors, c) = monomial_target(h)?;
    let mut seq = if factors.is_empty() {
        GateSeq::new(n_modes)
    } else {
        let target = TargetGate::new(factors, c * s)?;
        compile(
            &target,
            &CompileOptions {
                optimize: false,
                ..CompileOptions::default()
            },
        )?
        .0
    };
    seq.n_target_modes = seq.n_target_modes.max(n_modes);
    Ok(seq)
}

fn width(polys: &[&NOPoly]) -> usize {
    polys.iter().map(|p| p.width()).max().unwrap_or(0)
}

/// `(prod_j e^{i (t/K) H_j})^K` with every term compiled exactly.
pub fn trotter_suzuki(terms: &[NOPoly], t: f64, k: usize) -> Result<GateSeq, DecompError> {
    if k == 0 {
        return Err(DecompError::InvalidTarget(
            "the Trotter number must be at least 1".into(),
        ));
    }
    let n = width(&terms.iter().collect::<Vec<_>>());
    let mut step = GateSeq::new(n);
    for h in terms {
        step = step.then(&exact_exp(h, t / k as f64, n)?);
    }
    let mut out = GateSeq::new(n);
    for _ in 0..k {
        out = out.then(&step);
    }
    Ok(out)
}

/// `(e^{i(t/K)B} e^{i(t/K)A} e^{-i(t/K)B} e^{-i(t/K)A})^{K^2}` approximating
/// `e^{t^2 [A, B]}`, with `t = sqrt(t2)`.
pub fn commutator_approx(
    a: &NOPoly,
    b: &NOPoly,
    t2: f64,
    k: usize,
) -> Result<GateSeq, DecompError> {
    let group = commutator_group(a, b, t2, k)?;
    let mut out = GateSeq::new(group.n_target_modes);
    for _ in 0..k * k {
        out = out.then(&group);
    }
    Ok(out)
}

fn commutator_group(a: &NOPoly, b: &NOPoly, t2: f64, k: usize) -> Result<GateSeq, DecompError> {
    if k == 0 {
        return Err(DecompError::InvalidTarget("K must be at least 1".into()));
    }
    if t2 < 0.0 {
        return Err(DecompError::InvalidTarget(format!(
            "t^2 = {t2} is negative; swap the operands"
        )));
    }
    let n = width(&[a, b]);
    let s = t2.sqrt() / k as f64;
    Ok(exact_exp(b, s, n)?
        .then(&exact_exp(a, s, n)?)
        .then(&exact_exp(b, -s, n)?)
        .then(&exact_exp(a, -s, n)?))
}

fn matrix_power(m: &DMatrix<Complex64>, mut e: usize) -> DMatrix<Complex64> {
    let mut base = m.clone();
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    while e > 0 {
        if e & 1 == 1 {
            out = &out * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    out
}

/// Subspace error of [`commutator_approx`] against `e^{t2 [A, B]}`, both
/// built from truncated matrices.
pub fn commutator_error(
    a: &NOPoly,
    b: &NOPoly,
    t2: f64,
    k: usize,
    ctx: &FockContext,
) -> Result<NumericReport, DecompError> {
    let group = commutator_group(a, b, t2, k)?;
    let modes = group.total_modes().max(1);
    let fm = fock_matrices(ctx);
    let u = matrix_power(&circuit_matrix(&group, modes, &fm), k * k);
    let am = poly_matrix(a, modes, &fm);
    let bm = poly_matrix(b, modes, &fm);
    let exact = exp_anti_hermitian(&((&am * &bm - &bm * &am) * Complex64::new(t2, 0.0)));
    Ok(dense_subspace_error(
        &u,
        &exact,
        ctx.cutoff,
        ctx.subspace,
        modes,
    ))
}

/// Subspace error of [`trotter_suzuki`] against `e^{i t sum H_j}`.
pub fn trotter_error(
    terms: &[NOPoly],
    t: f64,
    k: usize,
    ctx: &FockContext,
) -> Result<NumericReport, DecompError> {
    let seq = trotter_suzuki(terms, t, 1)?;
    let modes = seq.total_modes().max(1);
    let fm = fock_matrices(ctx);
    let step = {
        let sub: Vec<GateSeq> = terms
            .iter()
            .map(|h| exact_exp(h, t / k as f64, modes))
            .collect::<Result<_, _>>()?;
        sub.iter().fold(
            DMatrix::identity(
                fm.x.nrows().pow(modes as u32),
                fm.x.nrows().pow(modes as u32),
            ),
            |acc, s| acc * circuit_matrix(s, modes, &fm),
        )
    };
    let u = matrix_power(&step, k);
    let h = terms.iter().fold(NOPoly::zero(), |acc, p| &acc + p);
    let exact = exp_i_hermitian(&poly_matrix(&h, modes, &fm), t);
    Ok(dense_subspace_error(
        &u,
        &exact,
        ctx.cutoff,
        ctx.subspace,
        modes,
    ))
}

/// Constant `C` in `K = ceil(C tau^4 / epsilon)`.
pub const DEFAULT_ERROR_CONSTANT: f64 = 0.3;

/// Gate-count estimate of the commutator method.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorEstimate {
    /// Universal gates, Fourier transforms excluded.
    pub count: f64,
    /// `K` of the outermost commutator.
    pub k: u64,
    /// `K^2` repetitions of the outermost four-gate group.
    pub repeats: u64,
    /// Depth of commutator nesting; zero for a universal gate.
    pub levels: usize,
    pub model: String,
}

/// Parameters of the cost model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub error_constant: f64,
    pub epsilon: f64,
}

impl CostModel {
    pub fn new(epsilon: f64) -> Self {
        Self {
            error_constant: DEFAULT_ERROR_CONSTANT,
            epsilon,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "group commutator per level: e^(tau^2 [A,B]) repeated K^2 times as four gates, \
             K = max(1, ceil(C tau^4 / eps)) with C = {} and eps = {:e}; \
             a factor costs 1 if universal, otherwise its own estimate at strength tau/K; \
             X^n (n >= 4) = [X^(n-1), X^2P+PX^2] / (n-1) with X^2P+PX^2 = (2/3)[X^3,P^2]; \
             multi-mode monomials = [P_j X_k^(n_k), X_j^(n_j+1) R] with the cheapest (j, k); \
             momentum factors count as positions (Fourier gates are free)",
            self.error_constant, self.epsilon
        )
    }

    fn k(&self, tau2: f64) -> u64 {
        (self.error_constant * tau2 * tau2 / self.epsilon)
            .ceil()
            .max(1.0) as u64
    }

    /// Estimate for `e^{tau2 [A, B]}` where one `A` gate plus one `B` gate
    /// at strength `s` cost `cost(s)`.
    fn level(&self, tau2: f64, cost: impl Fn(f64) -> (f64, usize)) -> (f64, usize, u64) {
        let k = self.k(tau2);
        let (inner, depth) = cost(tau2.sqrt() / k as f64);
        ((k * k) as f64 * 2.0 * inner, depth + 1, k)
    }

    /// Cost of `e^{i s prod X_m^{n_m}}` and its nesting depth.
    fn monomial(&self, powers: &[(usize, u32)], s: f64) -> (f64, usize) {
        self.monomial_k(powers, s)
            .map_or((1.0, 0), |(c, d, _)| (c, d))
    }

    fn monomial_k(&self, powers: &[(usize, u32)], s: f64) -> Option<(f64, usize, u64)> {
        let s = s.abs();
        match *powers {
            [] | [(_, 1..=3)] | [(_, 1), (_, 1)] => None,
            [(m, n)] => {
                let tau2 = s / f64::from(n - 1);
                Some(self.level(tau2, |x| {
                    let (a, da) = self.monomial(&[(m, n - 1)], x);
                    let (b, db) = self.symmetrized_cubic(x);
                    (a + b, da.max(db))
                }))
            }
            _ => {
                let mut best: Option<(f64, usize, u64)> = None;
                for (ji, &(j, nj)) in powers.iter().enumerate() {
                    for (ki, &(k, nk)) in powers.iter().enumerate() {
                        if ji == ki {
                            continue;
                        }
                        let mut a = vec![(j, 1), (k, nk)];
                        a.sort_unstable();
                        let mut b: Vec<(usize, u32)> = powers
                            .iter()
                            .copied()
                            .filter(|&(m, _)| m != j && m != k)
                            .collect();
                        b.push((j, nj + 1));
                        b.sort_unstable();
                        if a == powers || b == powers {
                            continue;
                        }
                        let tau2 = 2.0 * s / f64::from(nj + 1);
                        let est = self.level(tau2, |x| {
                            let (ca, da) = self.monomial(&a, x);
                            let (cb, db) = self.monomial(&b, x);
                            (ca + cb, da.max(db))
                        });
                        if best.is_none_or(|b| est.0 < b.0) {
                            best = Some(est);
                        }
                    }
                }
                best
            }
        }
    }

    /// `e^{i s (X^2P + PX^2)} = e^{(2s/3)[X^3, P^2]}`.
    fn symmetrized_cubic(&self, s: f64) -> (f64, usize) {
        let (c, d, _) = self.level(2.0 * s.abs() / 3.0, |_| (2.0, 0));
        (c, d)
    }
}

/// Commutator-method gate count for `target` at precision `epsilon` under
/// the default [`CostModel`].
pub fn estimate_commutator_count(target: &TargetGate, epsilon: f64) -> CommutatorEstimate {
    estimate_with(&CostModel::new(epsilon), target)
}

pub fn estimate_with(model: &CostModel, target: &TargetGate) -> CommutatorEstimate {
    let powers: Vec<(usize, u32)> = target.factors().iter().map(|f| (f.mode, f.power)).collect();
    let (count, levels, k) = model
        .monomial_k(&powers, target.strength)
        .unwrap_or((1.0, 0, 0));
    CommutatorEstimate {
        count,
        k,
        repeats: k * k,
        levels,
        model: model.describe(),
    }
}

/// Estimate for a single `e^{t2 [A, B]}` with universal `A` and `B`.
pub fn estimate_commutator_pair(t2: f64, epsilon: f64) -> CommutatorEstimate {
    let model = CostModel::new(epsilon);
    let (count, levels, k) = model.level(t2.abs(), |_| (2.0, 0));
    CommutatorEstimate {
        count,
        k,
        repeats: k * k,
        levels,
        model: model.describe(),
    }
}
