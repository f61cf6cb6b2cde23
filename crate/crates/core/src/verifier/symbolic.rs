//! Heisenberg-picture comparison of circuits.
//!
//! Two circuits with the same action `G -> U^dagger G U` on every quadrature
//! generator agree up to a global phase.

use std::collections::BTreeMap;

use crate::gate::{Gate, GateSeq, Segment};
use crate::weyl::{bch_conjugate, Automorphism, NOPoly, QuadLabel, WeylError};

/// Images `U^dagger G U` of the generators of the first `modes` registers.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergMap {
    pub images: BTreeMap<QuadLabel, NOPoly>,
}

impl HeisenbergMap {
    pub fn identity(modes: usize) -> Self {
        let images = (0..modes)
            .flat_map(|m| [QuadLabel::x(m), QuadLabel::p(m)])
            .map(|l| (l, NOPoly::generator(l)))
            .collect();
        Self { images }
    }

    pub fn modes(&self) -> usize {
        self.images.keys().map(|l| l.mode + 1).max().unwrap_or(0)
    }

    pub fn image(&self, label: QuadLabel) -> NOPoly {
        self.images
            .get(&label)
            .cloned()
            .unwrap_or_else(|| NOPoly::generator(label))
    }

    /// Largest coefficient difference between corresponding images.
    pub fn distance(&self, other: &Self) -> f64 {
        let modes = self.modes().max(other.modes());
        (0..modes)
            .flat_map(|m| [QuadLabel::x(m), QuadLabel::p(m)])
            .map(|l| (&self.image(l) - &other.image(l)).max_abs_coeff())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `[img X_j, img P_k]` from `i/2 * delta_jk` and of
    /// the same-basis commutators from zero.
    pub fn canonical_defect(&self) -> f64 {
        let modes = self.modes();
        let half_i = NOPoly::constant(num_complex::Complex64::new(0.0, 0.5));
        let mut worst = 0.0f64;
        for a in 0..modes {
            for b in a..modes {
                let xa = self.image(QuadLabel::x(a));
                let pa = self.image(QuadLabel::p(a));
                let xb = self.image(QuadLabel::x(b));
                let pb = self.image(QuadLabel::p(b));
                let xp = xa.commutator(&pb);
                let xp_expect = if a == b {
                    half_i.clone()
                } else {
                    NOPoly::zero()
                };
                worst = worst.max((&xp - &xp_expect).max_abs_coeff());
                if a != b {
                    worst = worst.max(pa.commutator(&xb).max_abs_coeff());
                    worst = worst.max(xa.commutator(&xb).max_abs_coeff());
                    worst = worst.max(pa.commutator(&pb).max_abs_coeff());
                }
            }
        }
        worst
    }
}

/// Heisenberg action of a circuit on the generators of `modes` registers.
///
/// With `U = g_0 g_1 ... g_{n-1}` the image is
/// `g_{n-1}^dagger ... g_0^dagger G g_0 ... g_{n-1}`. The action of each
/// segment is computed on its own and then composed into the action of the
/// enclosing run; segments only change the cost, not the result.
pub fn heisenberg_action(seq: &GateSeq, modes: usize) -> Result<HeisenbergMap, WeylError> {
    let modes = modes.max(seq.total_modes());
    let segments = laminar(&seq.segments, seq.len());
    let block = block_action(&seq.gates, 0, seq.len(), &segments)?;
    let mut map = HeisenbergMap::identity(modes);
    map.images.extend(block.images);
    Ok(map)
}

/// Segments sorted by start and decreasing end, keeping only those that
/// nest inside every earlier segment they overlap.
fn laminar(segments: &[Segment], len: usize) -> Vec<Segment> {
    let mut sorted: Vec<Segment> = segments
        .iter()
        .copied()
        .filter(|s| s.start < s.end && s.end <= len)
        .collect();
    sorted.sort_by_key(|s| (s.start, std::cmp::Reverse(s.end)));
    sorted.dedup();
    let mut open: Vec<Segment> = Vec::new();
    let mut kept = Vec::with_capacity(sorted.len());
    for s in sorted {
        while open.last().is_some_and(|top| top.end <= s.start) {
            open.pop();
        }
        if open.last().is_some_and(|top| s.end > top.end) {
            continue;
        }
        open.push(s);
        kept.push(s);
    }
    kept
}

/// Action of `gates[a..b]` on the generators it touches. `segments` are the
/// laminar segments inside `[a, b)`.
fn block_action(
    gates: &[Gate],
    a: usize,
    b: usize,
    segments: &[Segment],
) -> Result<HeisenbergMap, WeylError> {
    let mut map = HeisenbergMap {
        images: BTreeMap::new(),
    };
    let mut i = a;
    let mut k = 0;
    while i < b {
        while k < segments.len()
            && (segments[k].start < i || (segments[k].start == a && segments[k].end == b))
        {
            k += 1;
        }
        match segments.get(k) {
            Some(&seg) if seg.start == i => {
                let inner_end = k + 1 + segments[k + 1..].partition_point(|s| s.start < seg.end);
                let child = block_action(gates, seg.start, seg.end, &segments[k + 1..inner_end])?;
                map.compose(&child);
                i = seg.end;
                k = inner_end;
            }
            _ => {
                map.push_gate(&gates[i])?;
                i += 1;
            }
        }
    }
    Ok(map)
}

impl HeisenbergMap {
    fn ensure_mode(&mut self, mode: usize) {
        for l in [QuadLabel::x(mode), QuadLabel::p(mode)] {
            self.images.entry(l).or_insert_with(|| NOPoly::generator(l));
        }
    }

    /// Extends the circuit on the right by `gate`: every image `I` becomes
    /// `gate^dagger I gate`.
    pub fn push_gate(&mut self, gate: &Gate) -> Result<(), WeylError> {
        for m in gate.modes() {
            self.ensure_mode(m);
        }
        let auto = Automorphism::of_gate(&gate.inverse())?;
        self.apply_automorphism(&auto);
        Ok(())
    }

    /// Extends the circuit on the right by a block with action `other`.
    pub fn compose(&mut self, other: &HeisenbergMap) {
        let mut auto = Automorphism::identity();
        for (&l, img) in &other.images {
            self.ensure_mode(l.mode);
            if *img != NOPoly::generator(l) {
                auto.set(l, img.clone());
            }
        }
        self.apply_automorphism(&auto);
    }

    fn apply_automorphism(&mut self, auto: &Automorphism) {
        let mut moved: Vec<usize> = auto.moved().map(|(l, _)| l.mode).collect();
        moved.sort_unstable();
        moved.dedup();
        if moved.is_empty() {
            return;
        }
        for img in self.images.values_mut() {
            let touches = img
                .terms()
                .iter()
                .any(|(mono, _)| moved.iter().any(|&mode| mono.exponents(mode) != (0, 0)));
            if touches {
                *img = auto.apply(img);
            }
        }
    }
}

/// Heisenberg action of the single exponential `e^{i t H}`.
pub fn exp_action(
    generator: &NOPoly,
    strength: f64,
    modes: usize,
) -> Result<HeisenbergMap, WeylError> {
    let modes = modes.max(generator.width());
    let mut map = HeisenbergMap::identity(modes);
    for img in map.images.values_mut() {
        *img = bch_conjugate(generator, -strength, img)?;
    }
    Ok(map)
}

/// Residual between a circuit and `e^{i t H}`, over every register the
/// circuit touches (ancillas must be left alone).
pub fn residual_against(
    seq: &GateSeq,
    generator: &NOPoly,
    strength: f64,
) -> Result<f64, WeylError> {
    let modes = seq.total_modes().max(generator.width());
    let circuit = heisenberg_action(seq, modes)?;
    let target = exp_action(generator, strength, modes)?;
    Ok(circuit.distance(&target))
}
