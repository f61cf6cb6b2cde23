//! Truncated Fock-space comparison of a circuit against its target.
//!
//! Each mode is cut off at `D` Fock levels. Gates are built from the
//! truncated quadrature matrices: `e^{i s f(X)}` through the eigenbasis of
//! the truncated `X`, and `F` as the diagonal `e^{i pi/2 (n + 1/2)}`, so that
//! `F X F^dagger = P` holds exactly at any cutoff. All states are kept in
//! the position eigenbasis, where every non-Fourier gate is a phase.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::decomposer::TargetGate;
use crate::gate::{Gate, GateKind, GateSeq};
use crate::identities::Kernel;
use crate::weyl::{Basis, NOPoly};

/// Largest Hilbert-space dimension `D^modes` the comparator will build.
pub const MAX_DIMENSION: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("dimension {cutoff}^{modes} exceeds the limit of {MAX_DIMENSION}")]
    DimensionTooLarge { cutoff: usize, modes: usize },
    #[error("subspace {subspace} must be between 1 and the cutoff {cutoff}")]
    BadSubspace { subspace: usize, cutoff: usize },
    #[error("gate {0} has a momentum-dependent generator")]
    UnsupportedGate(String),
}

/// Cutoff `D`, compared subspace `d` and pass threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockContext {
    pub cutoff: usize,
    pub subspace: usize,
    pub tolerance: f64,
}

impl FockContext {
    pub fn new(cutoff: usize, subspace: usize) -> Self {
        Self {
            cutoff,
            subspace,
            tolerance: 1e-5,
        }
    }
}

/// Single-mode truncated quadratures `X = (a^dagger + a)/2` and
/// `P = i (a^dagger - a)/2`. All modes share these matrices.
#[derive(Debug, Clone)]
pub struct FockMatrices {
    pub x: DMatrix<Complex64>,
    pub p: DMatrix<Complex64>,
}

pub fn fock_matrices(ctx: &FockContext) -> FockMatrices {
    let d = ctx.cutoff;
    let a = DMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let ad = a.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    FockMatrices {
        x: (&ad + &a) * half,
        p: (&ad - &a) * half_i,
    }
}

/// Outcome of a numeric comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericReport {
    /// Largest singular value of the projected difference after phase
    /// alignment.
    pub subspace_error: f64,
    /// Phase `phi` with `U ~ e^{i phi} T` on the compared subspace.
    pub phase_offset: f64,
}

/// Position eigenbasis of the truncated `X` and the Fourier matrix in it.
struct Dvr {
    /// Eigenvalues of the truncated `X`.
    nodes: Vec<f64>,
    /// `basis[(n, i)] = <n | x_i>`.
    basis: DMatrix<f64>,
    fourier: DMatrix<Complex64>,
    fourier_inv: DMatrix<Complex64>,
}

impl Dvr {
    fn new(cutoff: usize) -> Self {
        let x = DMatrix::from_fn(cutoff, cutoff, |r, c| {
            if r.abs_diff(c) == 1 {
                (r.max(c) as f64).sqrt() / 2.0
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(x);
        let basis = eig.eigenvectors;
        let nodes = eig.eigenvalues.iter().copied().collect();
        let phases = DVector::from_fn(cutoff, |n, _| {
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * (n as f64 + 0.5))
        });
        let v = basis.map(|e| Complex64::new(e, 0.0));
        let fourier = v.transpose() * DMatrix::from_diagonal(&phases) * &v;
        let fourier_inv = fourier.adjoint();
        Self {
            nodes,
            basis,
            fourier,
            fourier_inv,
        }
    }
}

/// A circuit lowered to alternating phase layers and Fourier gates, in
/// application order.
enum Layer {
    Phase(Vec<Complex64>),
    Fourier { mode: usize, inverse: bool },
}

struct Grid {
    cutoff: usize,
    modes: usize,
}

impl Grid {
    fn len(&self) -> usize {
        self.cutoff.pow(self.modes as u32)
    }

    /// Stride of `mode` in the flattened index (mode 0 is slowest).
    fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.modes - 1 - mode) as u32)
    }
}

fn lower(gates: &[Gate], grid: &Grid, dvr: &Dvr) -> Result<Vec<Layer>, NumericError> {
    let mut layers = Vec::new();
    let mut angles: Option<Vec<f64>> = None;
    for g in gates.iter().rev() {
        match &g.kind {
            GateKind::Fourier { mode, inverse } => {
                if let Some(a) = angles.take() {
                    layers.push(Layer::Phase(
                        a.into_iter()
                            .map(|t| Complex64::from_polar(1.0, t))
                            .collect(),
                    ));
                }
                layers.push(Layer::Fourier {
                    mode: *mode,
                    inverse: *inverse,
                });
            }
            GateKind::ExpPoly {
                generator,
                strength,
            } => {
                let acc = angles.get_or_insert_with(|| vec![0.0; grid.len()]);
                add_angles(acc, generator, *strength, grid, dvr)
                    .ok_or_else(|| NumericError::UnsupportedGate(g.to_string()))?;
            }
        }
    }
    if let Some(a) = angles {
        layers.push(Layer::Phase(
            a.into_iter()
                .map(|t| Complex64::from_polar(1.0, t))
                .collect(),
        ));
    }
    Ok(layers)
}

/// Adds `s * generator(x)` at every grid node; `None` if the generator is
/// not a real polynomial in positions.
fn add_angles(acc: &mut [f64], generator: &NOPoly, s: f64, grid: &Grid, dvr: &Dvr) -> Option<()> {
    let mut terms = Vec::new();
    for (mono, c) in generator.terms() {
        if mono.has_momentum() || c.im.abs() > 1e-12 {
            return None;
        }
        let powers: Vec<(usize, u16)> = mono.modes().map(|m| (m, mono.exponents(m).0)).collect();
        if powers.iter().any(|&(m, _)| m >= grid.modes) {
            return None;
        }
        terms.push((c.re * s, powers));
    }
    acc.par_iter_mut().enumerate().for_each(|(idx, a)| {
        for (coef, powers) in &terms {
            let mut v = *coef;
            for &(m, e) in powers {
                let node = dvr.nodes[(idx / grid.stride(m)) % grid.cutoff];
                v *= node.powi(i32::from(e));
            }
            *a += v;
        }
    });
    Some(())
}

/// Applies a `rows x cutoff` matrix along `mode` of a state whose other
/// axes have the given lengths.
fn apply_on_axis(
    state: &[Complex64],
    shape: &[usize],
    mode: usize,
    m: &DMatrix<Complex64>,
) -> Vec<Complex64> {
    let outer: usize = shape[..mode].iter().product();
    let inner: usize = shape[mode + 1..].iter().product();
    let (rows, cols) = m.shape();
    debug_assert_eq!(cols, shape[mode]);
    let mut out = vec![Complex64::new(0.0, 0.0); outer * rows * inner];
    for o in 0..outer {
        let src = &state[o * cols * inner..(o + 1) * cols * inner];
        let dst = &mut out[o * rows * inner..(o + 1) * rows * inner];
        for r in 0..rows {
            let drow = &mut dst[r * inner..(r + 1) * inner];
            for c in 0..cols {
                let w = m[(r, c)];
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                let scol = &src[c * inner..(c + 1) * inner];
                for (d, s) in drow.iter_mut().zip(scol) {
                    *d += w * s;
                }
            }
        }
    }
    out
}

fn run(layers: &[Layer], mut state: Vec<Complex64>, grid: &Grid, dvr: &Dvr) -> Vec<Complex64> {
    let shape = vec![grid.cutoff; grid.modes];
    for layer in layers {
        match layer {
            Layer::Phase(ph) => state.iter_mut().zip(ph).for_each(|(s, p)| *s *= p),
            Layer::Fourier { mode, inverse } => {
                let m = if *inverse {
                    &dvr.fourier_inv
                } else {
                    &dvr.fourier
                };
                state = apply_on_axis(&state, &shape, *mode, m);
            }
        }
    }
    state
}

/// Gate list for `e^{i t H}`, with momentum factors conjugated by Fourier
/// gates.
fn target_gates(target: &TargetGate) -> Vec<Gate> {
    let momentum: Vec<usize> = target
        .exponents
        .iter()
        .filter(|(_, &(_, b))| b == Basis::Momentum)
        .map(|(&m, _)| m)
        .collect();
    let position = Kernel::product(
        target
            .factors()
            .into_iter()
            .map(|f| crate::identities::Factor::x(f.mode, f.power)),
    );
    let mut gates: Vec<Gate> = momentum.iter().map(|&m| Gate::fourier(m, false)).collect();
    gates.push(Gate::exp(position.to_poly(), target.strength));
    gates.extend(momentum.iter().map(|&m| Gate::fourier(m, true)));
    gates
}

/// Compares `seq` with `e^{i t H}` on Fock inputs with every target mode
/// below `d` and ancillas in vacuum, projecting outputs on levels below `d`.
pub fn verify_numeric(
    seq: &GateSeq,
    target: &TargetGate,
    ctx: &FockContext,
) -> Result<NumericReport, NumericError> {
    let (cutoff, d) = (ctx.cutoff, ctx.subspace);
    if d == 0 || d >= cutoff {
        return Err(NumericError::BadSubspace {
            subspace: d,
            cutoff,
        });
    }
    let modes = seq.total_modes().max(target.n_modes());
    let targets = seq.n_target_modes.max(target.n_modes());
    if (cutoff as f64).powi(modes as i32) > MAX_DIMENSION as f64 {
        return Err(NumericError::DimensionTooLarge { cutoff, modes });
    }
    let grid = Grid { cutoff, modes };
    let dvr = Dvr::new(cutoff);
    let circuit = lower(&seq.gates, &grid, &dvr)?;
    let reference = lower(&target_gates(target), &grid, &dvr)?;

    let n_inputs = d.pow(targets as u32);
    let project = DMatrix::from_fn(d, cutoff, |n, i| Complex64::new(dvr.basis[(n, i)], 0.0));
    let outputs: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..n_inputs)
        .into_par_iter()
        .map(|input| {
            let levels = digits(input, d, targets, modes);
            let state = product_state(&levels, &grid, &dvr);
            let u = run(&circuit, state.clone(), &grid, &dvr);
            let t = run(&reference, state, &grid, &dvr);
            (
                to_fock_subspace(&u, &project, &grid),
                to_fock_subspace(&t, &project, &grid),
            )
        })
        .collect();

    let rows = d.pow(modes as u32);
    let u = DMatrix::from_fn(rows, n_inputs, |r, c| outputs[c].0[r]);
    let t = DMatrix::from_fn(rows, n_inputs, |r, c| outputs[c].1[r]);
    let overlap = t.adjoint() * &u;
    let phase = overlap.trace().arg();
    let diff = &u - &t * Complex64::from_polar(1.0, phase);
    let subspace_error = diff.singular_values().iter().copied().fold(0.0, f64::max);
    Ok(NumericReport {
        subspace_error,
        phase_offset: phase,
    })
}

/// Fock levels of the `input`-th basis state: target modes run over `d`
/// levels, ancillas sit in vacuum.
fn digits(mut input: usize, d: usize, targets: usize, modes: usize) -> Vec<usize> {
    let mut levels = vec![0; modes];
    for m in (0..targets).rev() {
        levels[m] = input % d;
        input /= d;
    }
    levels
}

fn product_state(levels: &[usize], grid: &Grid, dvr: &Dvr) -> Vec<Complex64> {
    (0..grid.len())
        .map(|idx| {
            let amp: f64 = levels
                .iter()
                .enumerate()
                .map(|(m, &n)| dvr.basis[(n, (idx / grid.stride(m)) % grid.cutoff)])
                .product();
            Complex64::new(amp, 0.0)
        })
        .collect()
}

fn to_fock_subspace(
    state: &[Complex64],
    project: &DMatrix<Complex64>,
    grid: &Grid,
) -> Vec<Complex64> {
    let mut shape = vec![grid.cutoff; grid.modes];
    let mut s = state.to_vec();
    for m in 0..grid.modes {
        s = apply_on_axis(&s, &shape, m, project);
        shape[m] = project.nrows();
    }
    s
}

/// Dense matrix of a normal-ordered polynomial on `modes` registers built
/// from the truncated quadratures; mode 0 is the slowest tensor index.
pub fn poly_matrix(poly: &NOPoly, modes: usize, fm: &FockMatrices) -> DMatrix<Complex64> {
    let d = fm.x.nrows();
    let dim = d.pow(modes as u32);
    let mut out = DMatrix::zeros(dim, dim);
    for (mono, c) in poly.terms() {
        let mut m = DMatrix::from_element(1, 1, *c);
        for mode in 0..modes {
            let (a, b) = mono.exponents(mode);
            let local = matrix_power(&fm.x, a) * matrix_power(&fm.p, b);
            m = m.kronecker(&local);
        }
        out += m;
    }
    out
}

fn matrix_power(m: &DMatrix<Complex64>, e: u16) -> DMatrix<Complex64> {
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..e {
        out = &out * m;
    }
    out
}

/// `e^{i s H}` for Hermitian `H`.
pub fn exp_i_hermitian(h: &DMatrix<Complex64>, s: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new((h + h.adjoint()) * Complex64::new(0.5, 0.0));
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, s * l));
    &eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

/// `e^{G}` for anti-Hermitian `G`.
pub fn exp_anti_hermitian(g: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    exp_i_hermitian(&(g * Complex64::new(0.0, -1.0)), 1.0)
}

/// Dense unitary of a circuit on `modes` registers, each gate exponentiated
/// from its truncated generator.
pub fn circuit_matrix(seq: &GateSeq, modes: usize, fm: &FockMatrices) -> DMatrix<Complex64> {
    let dim = fm.x.nrows().pow(modes as u32);
    let fourier = exp_i_hermitian(
        &(&fm.x * &fm.x + &fm.p * &fm.p),
        std::f64::consts::FRAC_PI_2,
    );
    let mut cache: Vec<(NOPoly, f64, DMatrix<Complex64>)> = Vec::new();
    let mut u = DMatrix::identity(dim, dim);
    for g in &seq.gates {
        let m = match &g.kind {
            GateKind::Fourier { mode, inverse } => {
                let f = if *inverse {
                    fourier.adjoint()
                } else {
                    fourier.clone()
                };
                embed(&f, *mode, modes)
            }
            GateKind::ExpPoly {
                generator,
                strength,
            } => {
                if let Some((_, _, m)) = cache
                    .iter()
                    .find(|(p, s, _)| p == generator && s == strength)
                {
                    m.clone()
                } else {
                    let m = exp_i_hermitian(&poly_matrix(generator, modes, fm), *strength);
                    cache.push((generator.clone(), *strength, m.clone()));
                    m
                }
            }
        };
        u *= m;
    }
    u
}

fn embed(local: &DMatrix<Complex64>, mode: usize, modes: usize) -> DMatrix<Complex64> {
    let d = local.nrows();
    let mut out = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for m in 0..modes {
        out = if m == mode {
            out.kronecker(local)
        } else {
            out.kronecker(&DMatrix::identity(d, d))
        };
    }
    out
}

/// Error of `u` against `t` on the lowest `d` levels of every one of
/// `modes` registers, after aligning the global phase.
pub fn dense_subspace_error(
    u: &DMatrix<Complex64>,
    t: &DMatrix<Complex64>,
    cutoff: usize,
    d: usize,
    modes: usize,
) -> NumericReport {
    let keep: Vec<usize> = (0..cutoff.pow(modes as u32))
        .filter(|&idx| (0..modes).all(|m| (idx / cutoff.pow((modes - 1 - m) as u32)) % cutoff < d))
        .collect();
    let u = u.select_rows(&keep).select_columns(&keep);
    let t = t.select_rows(&keep).select_columns(&keep);
    let phase = (t.adjoint() * &u).trace().arg();
    let diff = &u - &t * Complex64::from_polar(1.0, phase);
    let subspace_error = diff.singular_values().iter().copied().fold(0.0, f64::max);
    NumericReport {
        subspace_error,
        phase_offset: phase,
    }
}
