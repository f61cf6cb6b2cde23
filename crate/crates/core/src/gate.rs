//! Gates and gate sequences.

use std::borrow::Cow;
use std::fmt;

use crate::weyl::{Monomial, NOPoly};

/// Label of the identity (or pass) that produced a gate.
pub type Provenance = Cow<'static, str>;

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    /// `F = e^{i pi/2 (X^2 + P^2)}` on `mode`, or its inverse.
    Fourier { mode: usize, inverse: bool },
    /// `e^{i * strength * generator}`.
    ExpPoly { generator: NOPoly, strength: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub provenance: Provenance,
}

/// Shape of a gate in the universal set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UniversalKind {
    Fourier {
        mode: usize,
        inverse: bool,
    },
    /// `e^{i t X_mode^power}` with `power` in 1..=3.
    Power {
        mode: usize,
        power: u16,
    },
    /// `e^{i tau X_a X_b}` with `a < b`.
    Coupling {
        a: usize,
        b: usize,
    },
}

impl Gate {
    pub fn fourier(mode: usize, inverse: bool) -> Self {
        Self {
            kind: GateKind::Fourier { mode, inverse },
            provenance: Cow::Borrowed("fourier"),
        }
    }

    pub fn exp(generator: NOPoly, strength: f64) -> Self {
        Self {
            kind: GateKind::ExpPoly {
                generator,
                strength,
            },
            provenance: Cow::Borrowed("primitive"),
        }
    }

    /// `e^{i t X_mode^power}`.
    pub fn x_power(mode: usize, power: u16, strength: f64) -> Self {
        Self::exp(NOPoly::x_pow(mode, power), strength)
    }

    /// `e^{i tau X_a X_b}`.
    pub fn coupling(a: usize, b: usize, strength: f64) -> Self {
        assert_ne!(a, b, "coupling needs two distinct modes");
        Self::exp(
            NOPoly::monomial(Monomial::from_factors(&[(a, 1, 0), (b, 1, 0)])),
            strength,
        )
    }

    pub fn with_provenance(mut self, label: impl Into<Provenance>) -> Self {
        self.provenance = label.into();
        self
    }

    pub fn is_fourier(&self) -> bool {
        matches!(self.kind, GateKind::Fourier { .. })
    }

    pub fn inverse(&self) -> Self {
        let kind = match &self.kind {
            GateKind::Fourier { mode, inverse } => GateKind::Fourier {
                mode: *mode,
                inverse: !inverse,
            },
            GateKind::ExpPoly {
                generator,
                strength,
            } => GateKind::ExpPoly {
                generator: generator.clone(),
                strength: -strength,
            },
        };
        Self {
            kind,
            provenance: self.provenance.clone(),
        }
    }

    pub fn strength(&self) -> Option<f64> {
        match &self.kind {
            GateKind::ExpPoly { strength, .. } => Some(*strength),
            GateKind::Fourier { .. } => None,
        }
    }

    pub fn modes(&self) -> Vec<usize> {
        match &self.kind {
            GateKind::Fourier { mode, .. } => vec![*mode],
            GateKind::ExpPoly { generator, .. } => generator.modes(),
        }
    }

    /// Classifies the gate against the universal set
    /// `{F, e^{itX}, e^{itX^2}, e^{itX^3}, e^{itX_jX_k}}`.
    pub fn universal_kind(&self) -> Option<UniversalKind> {
        match &self.kind {
            GateKind::Fourier { mode, inverse } => Some(UniversalKind::Fourier {
                mode: *mode,
                inverse: *inverse,
            }),
            GateKind::ExpPoly {
                generator,
                strength,
            } => {
                if !strength.is_finite() {
                    return None;
                }
                let m = generator.as_unit_monomial()?;
                if m.has_momentum() {
                    return None;
                }
                let modes: Vec<usize> = m.modes().collect();
                match modes.as_slice() {
                    [mode] => {
                        let (power, _) = m.exponents(*mode);
                        (1..=3)
                            .contains(&power)
                            .then_some(UniversalKind::Power { mode: *mode, power })
                    }
                    [a, b] => (m.exponents(*a).0 == 1 && m.exponents(*b).0 == 1)
                        .then_some(UniversalKind::Coupling { a: *a, b: *b }),
                    _ => None,
                }
            }
        }
    }

    pub fn is_universal(&self) -> bool {
        self.universal_kind().is_some()
    }

    /// Copy with every mode index passed through `f`.
    pub fn relabel(&self, f: impl Fn(usize) -> usize) -> Self {
        let kind = match &self.kind {
            GateKind::Fourier { mode, inverse } => GateKind::Fourier {
                mode: f(*mode),
                inverse: *inverse,
            },
            GateKind::ExpPoly {
                generator,
                strength,
            } => {
                let terms = generator.terms().iter().map(|(m, c)| {
                    let factors: Vec<(usize, u16, u16)> = m
                        .modes()
                        .map(|mode| {
                            let (x, p) = m.exponents(mode);
                            (f(mode), x, p)
                        })
                        .collect();
                    (Monomial::from_factors(&factors), *c)
                });
                GateKind::ExpPoly {
                    generator: NOPoly::from_terms(terms),
                    strength: *strength,
                }
            }
        };
        Self {
            kind,
            provenance: self.provenance.clone(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GateKind::Fourier {
                mode,
                inverse: false,
            } => write!(f, "F{mode}"),
            GateKind::Fourier {
                mode,
                inverse: true,
            } => write!(f, "F{mode}^-1"),
            GateKind::ExpPoly {
                generator,
                strength,
            } => write!(f, "exp(i*{strength}*[{generator}])"),
        }
    }
}

/// A run `gates[start..end]` that implements one exact factor on its own.
///
/// Segments nest and never partially overlap. They only steer how the
/// verifier groups its work; any segmentation gives the same result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

/// An ordered gate list in operator-product order: `gates[0]` is the
/// leftmost factor, i.e. the one applied last.
///
/// Equality compares gates and registers and ignores `segments`.
#[derive(Debug, Clone, Default)]
pub struct GateSeq {
    pub gates: Vec<Gate>,
    pub n_target_modes: usize,
    pub ancilla_modes: Vec<usize>,
    pub segments: Vec<Segment>,
}

impl PartialEq for GateSeq {
    fn eq(&self, other: &Self) -> bool {
        self.gates == other.gates
            && self.n_target_modes == other.n_target_modes
            && self.ancilla_modes == other.ancilla_modes
    }
}

impl GateSeq {
    pub fn new(n_target_modes: usize) -> Self {
        Self {
            n_target_modes,
            ..Self::default()
        }
    }

    pub fn from_gates(n_target_modes: usize, gates: Vec<Gate>) -> Self {
        let mut seq = Self {
            gates,
            n_target_modes,
            ..Self::default()
        };
        seq.ancilla_modes = seq.referenced_ancillas();
        seq
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Total register count, targets plus ancillas.
    pub fn total_modes(&self) -> usize {
        let max_ref = self
            .gates
            .iter()
            .flat_map(|g| g.modes())
            .max()
            .map_or(0, |m| m + 1);
        let max_anc = self.ancilla_modes.iter().max().map_or(0, |m| m + 1);
        self.n_target_modes.max(max_ref).max(max_anc)
    }

    /// Ancilla modes actually touched by a gate, sorted.
    pub fn referenced_ancillas(&self) -> Vec<usize> {
        let mut modes: Vec<usize> = self
            .gates
            .iter()
            .flat_map(|g| g.modes())
            .filter(|&m| m >= self.n_target_modes)
            .collect();
        modes.sort_unstable();
        modes.dedup();
        modes
    }

    /// The inverse circuit: reversed order, each gate inverted.
    pub fn inverse(&self) -> Self {
        let n = self.gates.len();
        Self {
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            n_target_modes: self.n_target_modes,
            ancilla_modes: self.ancilla_modes.clone(),
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    start: n - s.end,
                    end: n - s.start,
                })
                .collect(),
        }
    }

    /// Operator product `self * other`.
    pub fn then(mut self, other: &GateSeq) -> Self {
        let offset = self.gates.len();
        self.segments.extend(other.segments.iter().map(|s| Segment {
            start: s.start + offset,
            end: s.end + offset,
        }));
        self.gates.extend(other.gates.iter().cloned());
        for &a in &other.ancilla_modes {
            if !self.ancilla_modes.contains(&a) {
                self.ancilla_modes.push(a);
            }
        }
        self.ancilla_modes.sort_unstable();
        self.n_target_modes = self.n_target_modes.max(other.n_target_modes);
        self
    }

    pub fn all_universal(&self) -> bool {
        self.gates.iter().all(Gate::is_universal)
    }

    pub fn fourier_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_fourier()).count()
    }
}

impl fmt::Display for GateSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, g) in self.gates.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}
