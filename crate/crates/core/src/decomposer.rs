//! Exact compilation of `e^{itH}` for quadrature monomials `H`.
//!
//! Momentum factors are turned into position factors with Fourier gates,
//! the resulting position monomial is matched against the identity
//! registry, and otherwise expanded as a signed sum of powers of mode sums.
//! Every non-universal factor an identity produces is compiled recursively.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_rational::Rational64;
use num_traits::Zero;
use thiserror::Error;

use crate::circuit::{count_gates, optimize, DecompReport};
use crate::gate::{Gate, GateSeq, Segment};
use crate::identities::{self, Factor, Kernel, Term};
use crate::weyl::{Basis, NOPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompError {
    #[error("target is not eligible for exact decomposition: {0}")]
    Ineligible(String),
    #[error("no summand has exponent 1, so there is no central mode to conjugate")]
    NoUnitCentralMode,
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("the circuit needs more than {0} non-Fourier gates")]
    GateBudget(usize),
}

/// `e^{i t H}` with `H` a product of single-mode quadrature powers.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetGate {
    /// mode -> (exponent, basis)
    pub exponents: BTreeMap<usize, (u32, Basis)>,
    pub strength: f64,
}

impl TargetGate {
    pub fn new(
        factors: impl IntoIterator<Item = Factor>,
        strength: f64,
    ) -> Result<Self, DecompError> {
        let mut exponents = BTreeMap::new();
        for f in factors {
            if f.power == 0 {
                return Err(DecompError::InvalidTarget(format!(
                    "mode {} has exponent 0",
                    f.mode
                )));
            }
            if exponents.insert(f.mode, (f.power, f.basis)).is_some() {
                return Err(DecompError::InvalidTarget(format!(
                    "mode {} appears twice",
                    f.mode
                )));
            }
        }
        if exponents.is_empty() {
            return Err(DecompError::InvalidTarget("empty product".into()));
        }
        if !strength.is_finite() {
            return Err(DecompError::InvalidTarget("strength is not finite".into()));
        }
        Ok(Self {
            exponents,
            strength,
        })
    }

    /// `e^{i t X_mode^n}`.
    pub fn x_power(mode: usize, n: u32, strength: f64) -> Self {
        Self::new([Factor::x(mode, n)], strength).expect("valid single-mode target")
    }

    /// `e^{i t prod_m X_m^{n_m}}`.
    pub fn x_product(powers: &[(usize, u32)], strength: f64) -> Result<Self, DecompError> {
        Self::new(powers.iter().map(|&(m, n)| Factor::x(m, n)), strength)
    }

    pub fn factors(&self) -> Vec<Factor> {
        self.exponents
            .iter()
            .map(|(&mode, &(power, basis))| Factor { mode, power, basis })
            .collect()
    }

    /// Registers the target acts on: one past the largest mode index.
    pub fn n_modes(&self) -> usize {
        self.exponents.keys().next_back().map_or(0, |m| m + 1)
    }

    pub fn generator(&self) -> NOPoly {
        Kernel::product(self.factors()).to_poly()
    }

    fn position_powers(&self) -> Vec<(usize, u32)> {
        self.exponents.iter().map(|(&m, &(n, _))| (m, n)).collect()
    }
}

/// How a target is compiled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Route {
    UniversalPrimitive,
    SingleEven,
    SingleOdd3,
    GeneralMultiMode,
    /// One of the registered identities: `"px2"`, `"pxn"`, `"ppxn"`,
    /// `"twosquares"`.
    SpecialIdentity(&'static str),
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Route::UniversalPrimitive => f.write_str("primitive"),
            Route::SingleEven => f.write_str("single_even"),
            Route::SingleOdd3 => f.write_str("single_odd3"),
            Route::GeneralMultiMode => f.write_str("general"),
            Route::SpecialIdentity(label) => f.write_str(label),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EligibilityVerdict {
    pub eligible: bool,
    pub route: Option<Route>,
    pub reason: String,
}

/// Compilation plan for a position-only monomial.
#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Primitive,
    SingleEven {
        k: usize,
        n: u32,
    },
    SingleOdd3 {
        k: usize,
        n: u32,
    },
    /// `X_u X_o^n`, compiled from `P_u X_o^n`.
    Px {
        u: usize,
        o: usize,
        n: u32,
    },
    /// `X_c^2 X_o^{2m}`.
    TwoSquares {
        c: usize,
        o: usize,
        m: u32,
    },
    /// `X_j^n X_k X_l`, compiled from `P_k X_l X_j^n`.
    Ppxn {
        j: usize,
        k: usize,
        l: usize,
        n: u32,
    },
    General {
        powers: Vec<(usize, u32)>,
    },
}

impl Shape {
    fn route(&self) -> Route {
        match self {
            Shape::Primitive => Route::UniversalPrimitive,
            Shape::SingleEven { .. } => Route::SingleEven,
            Shape::SingleOdd3 { .. } => Route::SingleOdd3,
            Shape::Px { n: 2, .. } => Route::SpecialIdentity("px2"),
            Shape::Px { .. } => Route::SpecialIdentity("pxn"),
            Shape::TwoSquares { .. } => Route::SpecialIdentity("twosquares"),
            Shape::Ppxn { .. } => Route::SpecialIdentity("ppxn"),
            Shape::General { .. } => Route::GeneralMultiMode,
        }
    }

    /// Modes the route expects in the momentum basis.
    fn momentum_modes(&self) -> Vec<usize> {
        match self {
            Shape::Px { u, .. } => vec![*u],
            Shape::Ppxn { k, .. } => vec![*k],
            _ => Vec::new(),
        }
    }

    fn describe(&self) -> String {
        match self {
            Shape::Primitive => "already a universal gate".into(),
            Shape::SingleEven { n, .. } => format!("single-mode power {n} is even"),
            Shape::SingleOdd3 { n, .. } => {
                format!("single-mode power {n} is odd and divisible by 3")
            }
            Shape::Px { n, .. } => {
                format!("two-mode product with one unit exponent and one exponent {n}")
            }
            Shape::TwoSquares { m, .. } => format!("product of a square and a power {}", 2 * m),
            Shape::Ppxn { n, .. } => {
                format!("three-mode product with two unit exponents and one exponent {n}")
            }
            Shape::General { powers } => format!(
                "{}-mode product with at most one exponent other than 1; {} is divisible by 2 or 3",
                powers.len(),
                powers.len()
            ),
        }
    }
}

fn single_mode_shape(k: usize, n: u32) -> Result<Shape, String> {
    match n {
        1..=3 => Ok(Shape::Primitive),
        _ if n.is_multiple_of(2) => Ok(Shape::SingleEven { k, n }),
        _ if n.is_multiple_of(3) => Ok(Shape::SingleOdd3 { k, n }),
        _ => Err(format!(
            "single-mode power {n} is divisible by neither 2 nor 3, so no exact decomposition is known"
        )),
    }
}

/// Registry first, then the general multi-mode rules.
fn classify(powers: &[(usize, u32)]) -> Result<Shape, String> {
    let unit: Vec<usize> = powers.iter().filter(|p| p.1 == 1).map(|p| p.0).collect();
    let heavy: Vec<(usize, u32)> = powers.iter().copied().filter(|p| p.1 != 1).collect();
    match (powers, unit.as_slice(), heavy.as_slice()) {
        ([], _, _) => Err("empty product".into()),
        (&[(k, n)], _, _) => single_mode_shape(k, n),
        ([_, _], [_, _], []) => Ok(Shape::Primitive),
        ([_, _], &[u], &[(o, n)]) => Ok(Shape::Px { u, o, n }),
        ([_, _], [], &[(a, na), (b, nb)]) => {
            let (c, o, other) = if na == 2 { (a, b, nb) } else { (b, a, na) };
            if (na == 2 || nb == 2) && other % 2 == 0 {
                Ok(Shape::TwoSquares { c, o, m: other / 2 })
            } else {
                Err(restriction_one(powers))
            }
        }
        ([_, _, _], &[k, l], &[(j, n)]) => Ok(Shape::Ppxn { j, k, l, n }),
        _ => {
            if heavy.len() > 1 {
                return Err(restriction_one(powers));
            }
            let modes = powers.len() as u32;
            if !modes.is_multiple_of(2) && !modes.is_multiple_of(3) {
                return Err(format!(
                    "the product has {modes} factors and {modes} is divisible by neither 2 nor 3"
                ));
            }
            if let Some(&(_, n)) = heavy.first() {
                let total = modes * n;
                if !total.is_multiple_of(2) && !total.is_multiple_of(3) {
                    return Err(format!(
                        "restriction 2: N*n = {modes}*{n} = {total} is divisible by neither 2 nor 3"
                    ));
                }
            }
            Ok(Shape::General {
                powers: powers.to_vec(),
            })
        }
    }
}

fn restriction_one(powers: &[(usize, u32)]) -> String {
    let heavy = powers.iter().filter(|p| p.1 != 1).count();
    format!(
        "restriction 1: at most one mode may carry an exponent other than 1, but {heavy} do, \
         and no registered identity covers this product"
    )
}

pub fn check_eligibility(target: &TargetGate) -> EligibilityVerdict {
    match classify(&target.position_powers()) {
        Ok(shape) => EligibilityVerdict {
            eligible: true,
            route: Some(shape.route()),
            reason: shape.describe(),
        },
        Err(reason) => EligibilityVerdict {
            eligible: false,
            route: None,
            reason,
        },
    }
}

/// Coefficients `c_1..c_N` of the signed subset expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSolution {
    pub n: u32,
    /// `coeffs[k - 1] = c_k`.
    pub coeffs: Vec<Rational64>,
}

impl CoeffSolution {
    pub fn c(&self, k: u32) -> Rational64 {
        self.coeffs[k as usize - 1]
    }
}

fn factorial(n: u32) -> i64 {
    (1..=i64::from(n)).product()
}

fn binomial(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..i64::from(k)).fold(1, |acc, i| acc * (i64::from(n) - i) / (i + 1))
}

/// `(N-1) x N` matrix with row `r` (1-based) holding `C(r, 0..=r)`, acting
/// on `(c_N, c_{N-1}, ..., c_1)`.
pub fn pascal_matrix(n: u32) -> Vec<Vec<i64>> {
    (1..n)
        .map(|r| (0..n).map(|col| binomial(r, col)).collect())
        .collect()
}

/// `c_{N-k} = (-1)^k / N!`, checked against the Pascal system.
pub fn solve_pascal_coeffs(n: u32) -> CoeffSolution {
    assert!(n >= 2, "the subset expansion needs at least two factors");
    let cn = Rational64::new(1, factorial(n));
    let coeffs: Vec<Rational64> = (1..=n)
        .map(|k| if (n - k).is_multiple_of(2) { cn } else { -cn })
        .collect();
    let sol = CoeffSolution { n, coeffs };
    let reversed: Vec<Rational64> = (0..n).map(|i| sol.c(n - i)).collect();
    for row in pascal_matrix(n) {
        let dot: Rational64 = row
            .iter()
            .zip(&reversed)
            .map(|(&a, &c)| Rational64::from_integer(a) * c)
            .sum();
        assert!(dot.is_zero(), "Pascal system not satisfied for N = {n}");
    }
    sol
}

/// One `c_k (sum_{i in S} X_i^{n_i})^N` term of the subset expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetTerm {
    pub coeff: Rational64,
    pub summands: Vec<(usize, u32)>,
}

/// Signed subset expansion of a position monomial: largest subsets first,
/// lexicographic by mode within a size.
pub fn expand_general_d(target: &TargetGate) -> Vec<SubsetTerm> {
    expand_powers(&target.position_powers())
}

fn expand_powers(powers: &[(usize, u32)]) -> Vec<SubsetTerm> {
    let n = powers.len() as u32;
    let sol = solve_pascal_coeffs(n);
    (1..=powers.len())
        .rev()
        .flat_map(|k| {
            let coeff = sol.c(k as u32);
            powers
                .iter()
                .copied()
                .combinations(k)
                .map(move |summands| SubsetTerm { coeff, summands })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileOptions {
    /// The cubic strength `t` in the `3 alpha^2 t = s` split of the
    /// `P X^2` identity.
    pub param_split: f64,
    /// Size `beta` of the conjugating shifts `X_c -> X_c + beta Y` in the
    /// ancilla, two-squares and general routes; the enclosed strengths are
    /// rescaled so the identity stays exact. Smaller shifts keep intermediate
    /// states at lower Fock levels; gate counts do not depend on it.
    pub shift_scale: f64,
    pub optimize: bool,
    /// Emission stops with [`DecompError::GateBudget`] past this many
    /// non-Fourier gates.
    pub max_gates: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            param_split: 1.0,
            shift_scale: 0.5,
            optimize: true,
            max_gates: 2_000_000,
        }
    }
}

/// Gates in operator-product order together with the runs that implement
/// one identity factor each.
#[derive(Debug, Default)]
struct Block {
    gates: Vec<Gate>,
    segments: Vec<Segment>,
}

impl Block {
    fn single(g: Gate) -> Self {
        Self {
            gates: vec![g],
            segments: Vec::new(),
        }
    }

    fn append(&mut self, other: Block) {
        let offset = self.gates.len();
        self.segments
            .extend(other.segments.into_iter().map(|s| Segment {
                start: s.start + offset,
                end: s.end + offset,
            }));
        self.gates.extend(other.gates);
    }

    /// Marks the whole block as one exact factor.
    fn marked(mut self) -> Self {
        if !self.gates.is_empty() {
            self.segments.push(Segment {
                start: 0,
                end: self.gates.len(),
            });
        }
        self
    }

    fn inverted(self) -> Self {
        let n = self.gates.len();
        Self {
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            segments: self
                .segments
                .into_iter()
                .map(|s| Segment {
                    start: n - s.end,
                    end: n - s.start,
                })
                .collect(),
        }
    }

    /// `left * self * left^{-1}` for a list of Fourier gates `left`.
    fn conjugated(self, left: Vec<Gate>) -> Self {
        if left.is_empty() {
            return self;
        }
        let right: Vec<Gate> = left.iter().rev().map(Gate::inverse).collect();
        let mut out = Block {
            gates: left,
            segments: Vec::new(),
        };
        out.append(self);
        out.append(Block {
            gates: right,
            segments: Vec::new(),
        });
        out
    }

    fn labeled(mut self, label: &'static str) -> Self {
        for g in &mut self.gates {
            if g.provenance == "primitive" || g.provenance == "fourier" {
                g.provenance = label.into();
            }
        }
        self
    }
}

/// Recursive emitter. Gates are produced in operator-product order.
#[derive(Debug)]
pub struct Compiler {
    opts: CompileOptions,
    n_target: usize,
    next_ancilla: usize,
    emitted: usize,
    trace: Vec<(String, usize)>,
}

type Emitted = Result<Block, DecompError>;

impl Compiler {
    pub fn new(n_target: usize, opts: CompileOptions) -> Self {
        Self {
            opts,
            n_target,
            next_ancilla: n_target,
            emitted: 0,
            trace: Vec::new(),
        }
    }

    pub fn trace(&self) -> &[(String, usize)] {
        &self.trace
    }

    fn finish(&self, block: Block) -> GateSeq {
        let mut seq = GateSeq::from_gates(self.n_target, block.gates);
        seq.segments = block.segments;
        seq.segments.sort_unstable();
        seq.segments.dedup();
        seq
    }

    fn ancilla(&mut self) -> usize {
        let a = self.next_ancilla;
        self.next_ancilla += 1;
        a
    }

    fn enter(&mut self, label: &'static str, depth: usize) {
        self.trace.push((label.to_string(), depth));
    }

    /// `e^{i s prod factors}` for factors in either basis.
    fn emit_product(&mut self, factors: &[Factor], s: f64, depth: usize) -> Emitted {
        if s == 0.0 {
            return Ok(Block::default());
        }
        let mut powers: Vec<(usize, u32)> = factors.iter().map(|f| (f.mode, f.power)).collect();
        powers.sort_unstable();
        let shape = classify(&powers).map_err(DecompError::Ineligible)?;
        let have: Vec<usize> = factors
            .iter()
            .filter(|f| f.basis == Basis::Momentum)
            .map(|f| f.mode)
            .collect();
        let want = shape.momentum_modes();
        let inner = self.emit_shape(&shape, &powers, s, depth)?;
        let mut left = Vec::new();
        for m in have.iter().filter(|m| !want.contains(m)) {
            left.push(Gate::fourier(*m, false));
        }
        for m in want.iter().filter(|m| !have.contains(m)) {
            left.push(Gate::fourier(*m, true));
        }
        Ok(inner.conjugated(left))
    }

    fn emit_kernel(&mut self, kernel: &Kernel, s: f64, depth: usize) -> Emitted {
        match kernel {
            Kernel::Product(factors) => self.emit_product(factors, s, depth),
            Kernel::PowerSum {
                central,
                others,
                power,
            } => self.emit_power_sum(*central, others, *power, s, depth),
        }
    }

    fn emit_terms(&mut self, terms: &[Term], label: &'static str, depth: usize) -> Emitted {
        let mut out = Block::default();
        for t in terms {
            let block = self.emit_kernel(&t.kernel, t.strength, depth)?;
            out.append(block.labeled(label).marked());
        }
        Ok(out)
    }

    /// `e^{i s (X_central + sum X_m^{n_m})^power}`.
    fn emit_power_sum(
        &mut self,
        central: usize,
        others: &[(usize, u32)],
        power: u32,
        s: f64,
        depth: usize,
    ) -> Emitted {
        if others.is_empty() {
            return self.emit_product(&[Factor::x(central, power)], s, depth);
        }
        if s == 0.0 {
            return Ok(Block::default());
        }
        self.enter("poly_power", depth + 1);
        let terms = identities::power_sum(central, others, power, s);
        self.emit_terms(&terms, "poly_power", depth + 1)
    }

    fn emit_shape(
        &mut self,
        shape: &Shape,
        powers: &[(usize, u32)],
        s: f64,
        depth: usize,
    ) -> Emitted {
        let d = depth + 1;
        match *shape {
            Shape::Primitive => {
                self.emitted += 1;
                if self.emitted > self.opts.max_gates {
                    return Err(DecompError::GateBudget(self.opts.max_gates));
                }
                Ok(Block::single(match *powers {
                    [(m, n)] => Gate::x_power(m, n as u16, s),
                    [(a, _), (b, _)] => Gate::coupling(a, b, s),
                    _ => unreachable!("primitive shapes have one or two factors"),
                }))
            }
            Shape::SingleEven { k, n } => self.emit_single_even(k, n, s, depth),
            Shape::SingleOdd3 { k, n } => self.emit_single_odd3(k, n, s, depth),
            Shape::Px { u, o, n: 2 } => self.emit_px2(o, u, s, depth),
            Shape::Px { u, o, n } => self.emit_pxn(o, u, n, s, depth),
            Shape::TwoSquares { c, o, m } => {
                self.enter("twosquares", d);
                let terms = identities::two_squares_scaled(c, o, m, s, self.opts.shift_scale);
                self.emit_terms(&terms, "twosquares", d)
            }
            Shape::Ppxn { j, k, l, n } => self.emit_ppxn(j, k, l, n, s, depth),
            Shape::General { .. } => {
                self.enter("general", d);
                let weights = general_weights(powers, self.opts.shift_scale);
                let norm: f64 = weights.values().product();
                let n = powers.len() as i32;
                let mut out = Block::default();
                for term in expand_powers(powers) {
                    let c = *term.coeff.numer() as f64 / *term.coeff.denom() as f64;
                    let block = if let [(m, p)] = *term.summands {
                        let strength = c * s * weights[&m].powi(n) / norm;
                        self.emit_product(&[Factor::x(m, p * n as u32)], strength, d)?
                    } else {
                        let central = term
                            .summands
                            .iter()
                            .find(|t| t.1 == 1)
                            .ok_or(DecompError::NoUnitCentralMode)?
                            .0;
                        let wc = weights[&central];
                        let others: Vec<(usize, u32, f64)> = term
                            .summands
                            .iter()
                            .filter(|t| t.0 != central)
                            .map(|&(m, p)| (m, p, weights[&m] / wc))
                            .collect();
                        let strength = c * s * wc.powi(n) / norm;
                        self.emit_weighted_power_sum(central, &others, n as u32, strength, d)?
                    };
                    out.append(block.labeled("general").marked());
                }
                Ok(out)
            }
        }
    }

    /// `e^{i s (X_central + sum w_m X_m^{n_m})^power}`.
    fn emit_weighted_power_sum(
        &mut self,
        central: usize,
        others: &[(usize, u32, f64)],
        power: u32,
        s: f64,
        depth: usize,
    ) -> Emitted {
        if s == 0.0 {
            return Ok(Block::default());
        }
        self.enter("poly_power", depth + 1);
        let terms = identities::power_sum_scaled(central, others, power, s);
        self.emit_terms(&terms, "poly_power", depth + 1)
    }

    /// `e^{i s P_k X_j^2}`.
    fn emit_px2(&mut self, j: usize, k: usize, s: f64, depth: usize) -> Emitted {
        if s < 0.0 {
            return Ok(self.emit_px2(j, k, -s, depth)?.inverted());
        }
        self.enter("px2", depth + 1);
        let t = self.opts.param_split;
        let alpha = (s / (3.0 * t)).sqrt();
        self.emit_terms(&identities::px2(j, k, alpha, t), "px2", depth + 1)
    }

    /// `e^{i s P_k X_j^n}` through the five-factor recursion.
    fn emit_pxn(&mut self, j: usize, k: usize, n: u32, s: f64, depth: usize) -> Emitted {
        if s < 0.0 {
            return Ok(self.emit_pxn(j, k, n, -s, depth)?.inverted());
        }
        self.enter("pxn", depth + 1);
        let alpha = (s / 2.0).sqrt();
        self.emit_terms(&identities::pxn(j, k, n, alpha), "pxn", depth + 1)
    }

    /// `e^{i s P_k X_l X_j^n}`.
    fn emit_ppxn(&mut self, j: usize, k: usize, l: usize, n: u32, s: f64, depth: usize) -> Emitted {
        if s < 0.0 {
            return Ok(self.emit_ppxn(j, k, l, n, -s, depth)?.inverted());
        }
        self.enter("ppxn", depth + 1);
        let alpha = (s / 2.0).sqrt();
        self.emit_terms(&identities::pxxn(j, k, l, n, alpha), "ppxn", depth + 1)
    }

    /// `e^{i s X_k^n}` for even `n >= 4`, with one fresh ancilla.
    fn emit_single_even(&mut self, k: usize, n: u32, s: f64, depth: usize) -> Emitted {
        self.enter("single_even", depth + 1);
        let j = self.ancilla();
        let beta = self.opts.shift_scale;
        self.emit_terms(
            &identities::single_even_scaled(k, j, n, s, beta),
            "single_even",
            depth + 1,
        )
    }

    /// `e^{i s X_k^n}` for odd multiples of three, with two fresh ancillas.
    fn emit_single_odd3(&mut self, k: usize, n: u32, s: f64, depth: usize) -> Emitted {
        self.enter("single_odd3", depth + 1);
        let j = self.ancilla();
        let l = self.ancilla();
        self.emit_terms(
            &identities::single_odd3(k, j, l, n, s / 2.0),
            "single_odd3",
            depth + 1,
        )
    }
}

/// Scale `lambda_m = beta^r` of each summand, with `r` its rank when
/// unit-exponent modes come first. The first unit-exponent mode of any
/// subset then carries the largest scale, so every relative shift is at
/// most one for `beta <= 1`.
fn general_weights(powers: &[(usize, u32)], beta: f64) -> BTreeMap<usize, f64> {
    let mut order: Vec<(usize, u32)> = powers.to_vec();
    order.sort_by_key(|&(m, p)| (p != 1, m));
    order
        .iter()
        .enumerate()
        .map(|(r, &(m, _))| (m, beta.powi(r as i32)))
        .collect()
}

fn max_mode(modes: impl IntoIterator<Item = usize>) -> usize {
    modes.into_iter().max().map_or(0, |m| m + 1)
}

/// The standalone helpers emit the identities with unit shifts.
fn run(n_target: usize, f: impl FnOnce(&mut Compiler) -> Emitted) -> Result<GateSeq, DecompError> {
    let opts = CompileOptions {
        shift_scale: 1.0,
        ..CompileOptions::default()
    };
    let mut c = Compiler::new(n_target, opts);
    let block = f(&mut c)?;
    Ok(c.finish(block))
}

/// `e^{i s P_k X_j^2}` from the nine-gate identity.
pub fn decompose_px2(j: usize, k: usize, s: f64) -> GateSeq {
    run(max_mode([j, k]), |c| c.emit_px2(j, k, s, 0)).expect("the P X^2 identity always applies")
}

/// `e^{i s P_k X_j^n}` from the five-factor recursion, for `n >= 2`.
pub fn decompose_px_n(j: usize, k: usize, n: u32, s: f64) -> GateSeq {
    assert!(n >= 2);
    run(max_mode([j, k]), |c| c.emit_pxn(j, k, n, s, 0))
        .expect("the P X^n recursion always applies")
}

/// `e^{i s P_k P_l X_j^n}` for `n >= 2`.
pub fn decompose_pp_xn(j: usize, k: usize, l: usize, n: u32, s: f64) -> GateSeq {
    assert!(n >= 2);
    run(max_mode([j, k, l]), |c| {
        c.emit_product(&[Factor::x(j, n), Factor::p(k, 1), Factor::p(l, 1)], s, 0)
    })
    .expect("the P P X^n identity always applies")
}

/// `e^{i t X_j^2 X_k^2}`.
pub fn decompose_x2x2(j: usize, k: usize, t: f64) -> GateSeq {
    run(max_mode([j, k]), |c| {
        c.emit_product(&[Factor::x(j, 2), Factor::x(k, 2)], t, 0)
    })
    .expect("the two-squares identity always applies")
}

/// `e^{i t X_k^n}` for even `n >= 4`.
pub fn decompose_single_even(k: usize, n: u32, t: f64) -> GateSeq {
    assert!(n.is_multiple_of(2) && n >= 4);
    run(k + 1, |c| {
        if t == 0.0 {
            Ok(Block::default())
        } else {
            c.emit_single_even(k, n, t, 0)
        }
    })
    .expect("even powers always decompose")
}

/// `e^{i t X_k^n}` for odd multiples of three, `n >= 9`.
pub fn decompose_single_odd3(k: usize, n: u32, t: f64) -> GateSeq {
    assert!(n % 2 == 1 && n.is_multiple_of(3) && n >= 9);
    run(k + 1, |c| {
        if t == 0.0 {
            Ok(Block::default())
        } else {
            c.emit_single_odd3(k, n, t, 0)
        }
    })
    .expect("odd multiples of three always decompose")
}

/// `e^{i t (sum_m X_m^{n_m})^n}`; the first unit-exponent summand is the
/// central mode.
pub fn decompose_poly_power(
    summands: &[(usize, u32)],
    n: u32,
    t: f64,
) -> Result<GateSeq, DecompError> {
    let central = summands
        .iter()
        .find(|s| s.1 == 1)
        .ok_or(DecompError::NoUnitCentralMode)?
        .0;
    let others: Vec<(usize, u32)> = summands
        .iter()
        .copied()
        .filter(|s| s.0 != central)
        .collect();
    run(max_mode(summands.iter().map(|s| s.0)), |c| {
        c.emit_power_sum(central, &others, n, t, 0)
    })
}

/// Full pipeline: eligibility, recursive emission and optimization.
pub fn compile(
    target: &TargetGate,
    opts: &CompileOptions,
) -> Result<(GateSeq, DecompReport), DecompError> {
    let verdict = check_eligibility(target);
    if !verdict.eligible {
        return Err(DecompError::Ineligible(verdict.reason));
    }
    let mut c = Compiler::new(target.n_modes(), opts.clone());
    let block = c.emit_product(&target.factors(), target.strength, 0)?;
    let trace = std::mem::take(&mut c.trace);
    let raw = c.finish(block);
    let seq = if opts.optimize {
        optimize(&raw)
    } else {
        raw.clone()
    };
    let report = DecompReport {
        n_gates_total: count_gates(&seq, false),
        n_gates_nonfourier: count_gates(&seq, true),
        n_gates_preopt: count_gates(&raw, true),
        n_gates_preopt_total: count_gates(&raw, false),
        n_ancillas: seq.ancilla_modes.len(),
        recursion_depth: trace.iter().map(|t| t.1).max().unwrap_or(0),
        recursion_trace: trace,
        ..DecompReport::default()
    };
    Ok((seq, report))
}
