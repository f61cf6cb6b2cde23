//! Peephole optimization, gate counting and the circuit JSON format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gate::{Gate, GateKind, GateSeq, Segment, UniversalKind};

/// Gates with `|strength|` below this are dropped by [`optimize`].
pub const ZERO_STRENGTH: f64 = 1e-14;

/// Summary of one compilation.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DecompReport {
    pub n_gates_total: usize,
    pub n_gates_nonfourier: usize,
    /// Non-Fourier count before optimization.
    pub n_gates_preopt: usize,
    pub n_gates_preopt_total: usize,
    pub n_ancillas: usize,
    pub recursion_depth: usize,
    pub recursion_trace: Vec<(String, usize)>,
    pub residual_symbolic: Option<f64>,
    pub residual_numeric: Option<f64>,
    pub phase_offset: Option<f64>,
}

pub fn count_gates(seq: &GateSeq, exclude_fourier: bool) -> usize {
    if exclude_fourier {
        seq.gates.iter().filter(|g| !g.is_fourier()).count()
    } else {
        seq.len()
    }
}

/// Cancels inverse pairs, merges equal generators, drops zero-strength gates
/// and packs ancillas with disjoint live ranges into shared registers, until
/// nothing changes. Segments are carried over to the surviving gates.
pub fn optimize(seq: &GateSeq) -> GateSeq {
    let n = seq.n_target_modes;
    let tagged: Vec<(Gate, usize)> = seq.gates.iter().cloned().zip(0..).collect();
    let mut current = peephole(tagged);
    let mut ancillas = seq.ancilla_modes.clone();
    loop {
        let (packed, packed_ancillas) = reuse_ancillas(&current, n);
        let next = peephole(packed);
        let same = packed_ancillas == ancillas
            && next.len() == current.len()
            && next.iter().zip(&current).all(|(a, b)| a.0 == b.0);
        current = next;
        ancillas = packed_ancillas;
        if same {
            break;
        }
    }
    let origins: Vec<usize> = current.iter().map(|g| g.1).collect();
    let mut segments: Vec<Segment> = seq
        .segments
        .iter()
        .map(|s| Segment {
            start: origins.partition_point(|&o| o < s.start),
            end: origins.partition_point(|&o| o < s.end),
        })
        .filter(|s| s.end > s.start)
        .collect();
    segments.sort_unstable();
    segments.dedup();
    GateSeq {
        gates: current.into_iter().map(|g| g.0).collect(),
        n_target_modes: n,
        ancilla_modes: ancillas,
        segments,
    }
}

/// One left-to-right pass with a stack. Each gate is tagged with the index
/// of the input gate it descends from; a merged gate keeps the left tag.
fn peephole(gates: Vec<(Gate, usize)>) -> Vec<(Gate, usize)> {
    let mut out: Vec<(Gate, usize)> = Vec::with_capacity(gates.len());
    for (g, origin) in gates {
        if is_negligible(&g) {
            continue;
        }
        let Some((last, _)) = out.last_mut() else {
            out.push((g, origin));
            continue;
        };
        match (&mut last.kind, &g.kind) {
            (
                GateKind::Fourier {
                    mode: a,
                    inverse: ia,
                },
                GateKind::Fourier {
                    mode: b,
                    inverse: ib,
                },
            ) if a == b && ia != ib => {
                out.pop();
            }
            (
                GateKind::ExpPoly {
                    generator: ga,
                    strength: sa,
                },
                GateKind::ExpPoly {
                    generator: gb,
                    strength: sb,
                },
            ) if ga == gb => {
                *sa += sb;
                if sa.abs() < ZERO_STRENGTH {
                    out.pop();
                }
            }
            _ => out.push((g, origin)),
        }
    }
    out
}

fn is_negligible(g: &Gate) -> bool {
    g.strength().is_some_and(|s| s.abs() < ZERO_STRENGTH)
}

/// Greedy interval colouring of ancilla live ranges; ancillas are renumbered
/// densely from `n`.
fn reuse_ancillas(gates: &[(Gate, usize)], n: usize) -> (Vec<(Gate, usize)>, Vec<usize>) {
    let mut ranges: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (i, (g, _)) in gates.iter().enumerate() {
        for m in g.modes().into_iter().filter(|&m| m >= n) {
            ranges.entry(m).and_modify(|r| r.1 = i).or_insert((i, i));
        }
    }
    let mut order: Vec<(usize, (usize, usize))> = ranges.into_iter().collect();
    order.sort_by_key(|&(m, (start, _))| (start, m));
    let mut register_end: Vec<usize> = Vec::new();
    let mut assign: BTreeMap<usize, usize> = BTreeMap::new();
    for (m, (start, end)) in order {
        let slot = match register_end.iter().position(|&e| e < start) {
            Some(r) => {
                register_end[r] = end;
                r
            }
            None => {
                register_end.push(end);
                register_end.len() - 1
            }
        };
        assign.insert(m, n + slot);
    }
    let relabeled = gates
        .iter()
        .map(|(g, o)| (g.relabel(|m| if m < n { m } else { assign[&m] }), *o))
        .collect();
    (relabeled, (n..n + register_end.len()).collect())
}

#[derive(Debug, Error, PartialEq)]
pub enum SchemaViolation {
    #[error("malformed circuit document: {0}")]
    Json(String),
    #[error("unsupported version {0}")]
    Version(u32),
    #[error("gate {index}: {reason}")]
    Gate { index: usize, reason: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    version: u32,
    modes: usize,
    ancillas: Vec<usize>,
    gates: Vec<GateRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateRecord {
    kind: String,
    modes: Vec<usize>,
    strength: f64,
    dagger: bool,
    provenance: String,
}

/// Circuit document as JSON. Gates are listed in application order, so the
/// first record is the rightmost operator factor.
pub fn serialize(seq: &GateSeq) -> Result<String, SchemaViolation> {
    let gates = seq
        .gates
        .iter()
        .rev()
        .enumerate()
        .map(|(index, g)| {
            record(g).ok_or_else(|| SchemaViolation::Gate {
                index,
                reason: format!("{g} is not a universal gate"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let doc = CircuitDoc {
        version: 1,
        modes: seq.n_target_modes,
        ancillas: seq.ancilla_modes.clone(),
        gates,
    };
    serde_json::to_string_pretty(&doc).map_err(|e| SchemaViolation::Json(e.to_string()))
}

fn record(g: &Gate) -> Option<GateRecord> {
    let provenance = g.provenance.to_string();
    let (kind, modes, strength, dagger) = match g.universal_kind()? {
        UniversalKind::Fourier { mode, inverse } => {
            ("fourier", vec![mode], std::f64::consts::FRAC_PI_2, inverse)
        }
        UniversalKind::Power { mode, power } => {
            let kind = ["x1", "x2", "x3"][usize::from(power) - 1];
            (kind, vec![mode], g.strength()?, false)
        }
        UniversalKind::Coupling { a, b } => ("xx", vec![a, b], g.strength()?, false),
    };
    Some(GateRecord {
        kind: kind.to_string(),
        modes,
        strength,
        dagger,
        provenance,
    })
}

pub fn deserialize(text: &str) -> Result<GateSeq, SchemaViolation> {
    let doc: CircuitDoc =
        serde_json::from_str(text).map_err(|e| SchemaViolation::Json(e.to_string()))?;
    if doc.version != 1 {
        return Err(SchemaViolation::Version(doc.version));
    }
    let mut gates = Vec::with_capacity(doc.gates.len());
    for (index, r) in doc.gates.into_iter().enumerate() {
        let bad = |reason: String| SchemaViolation::Gate { index, reason };
        if let Some(&m) = r
            .modes
            .iter()
            .find(|&&m| m >= doc.modes && !doc.ancillas.contains(&m))
        {
            return Err(bad(format!("mode {m} is outside the declared registers")));
        }
        if !r.strength.is_finite() {
            return Err(bad("strength is not finite".into()));
        }
        let strength = if r.dagger { -r.strength } else { r.strength };
        let gate = match (r.kind.as_str(), r.modes.as_slice()) {
            ("fourier", &[m]) => Gate::fourier(m, r.dagger),
            ("x1", &[m]) => Gate::x_power(m, 1, strength),
            ("x2", &[m]) => Gate::x_power(m, 2, strength),
            ("x3", &[m]) => Gate::x_power(m, 3, strength),
            ("xx", &[a, b]) if a != b => Gate::coupling(a, b, strength),
            (kind, modes) => {
                return Err(bad(format!("kind {kind:?} does not take modes {modes:?}")))
            }
        };
        gates.push(gate.with_provenance(r.provenance));
    }
    gates.reverse();
    Ok(GateSeq {
        gates,
        n_target_modes: doc.modes,
        ancilla_modes: doc.ancillas,
        segments: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::{Monomial, NOPoly};

    fn px(s: f64) -> Gate {
        Gate::exp(
            NOPoly::monomial(Monomial::from_factors(&[(0, 0, 1), (1, 1, 0)])),
            s,
        )
    }

    #[test]
    fn inverse_pair_cancels() {
        let seq = GateSeq::from_gates(2, vec![px(2.0), px(-2.0)]);
        assert!(optimize(&seq).is_empty());
        let seq = GateSeq::from_gates(1, vec![Gate::fourier(0, true), Gate::fourier(0, false)]);
        assert!(optimize(&seq).is_empty());
    }

    #[test]
    fn equal_generators_merge() {
        let seq = GateSeq::from_gates(1, vec![Gate::x_power(0, 3, 0.25), Gate::x_power(0, 3, 0.5)]);
        assert_eq!(optimize(&seq).gates, vec![Gate::x_power(0, 3, 0.75)]);
    }

    #[test]
    fn cancellation_cascades() {
        let seq = GateSeq::from_gates(
            2,
            vec![
                Gate::fourier(0, false),
                Gate::coupling(0, 1, 1.0),
                Gate::coupling(0, 1, -1.0),
                Gate::fourier(0, true),
            ],
        );
        assert!(optimize(&seq).is_empty());
    }

    #[test]
    fn disjoint_ancillas_share_a_register() {
        let seq = GateSeq::from_gates(
            1,
            vec![
                Gate::coupling(0, 1, 1.0),
                Gate::x_power(1, 2, 1.0),
                Gate::coupling(0, 2, 1.0),
                Gate::x_power(2, 3, 1.0),
            ],
        );
        let out = optimize(&seq);
        assert_eq!(out.ancilla_modes, vec![1]);
        assert_eq!(out.gates[2], Gate::coupling(0, 1, 1.0));
        assert_eq!(out.gates[3], Gate::x_power(1, 3, 1.0));
    }

    #[test]
    fn counting_convention() {
        let seq = GateSeq::from_gates(
            1,
            vec![
                Gate::fourier(0, false),
                Gate::x_power(0, 3, 1.0),
                Gate::fourier(0, true),
            ],
        );
        assert_eq!(count_gates(&seq, true), 1);
        assert_eq!(count_gates(&seq, false), 3);
        assert_eq!(count_gates(&GateSeq::new(1), true), 0);
    }

    #[test]
    fn json_round_trip() {
        let seq = GateSeq::from_gates(
            1,
            vec![
                Gate::fourier(0, true),
                Gate::x_power(0, 2, 0.1 + 0.2),
                Gate::coupling(0, 1, -1e-300),
            ],
        );
        let text = serialize(&seq).unwrap();
        assert_eq!(deserialize(&text).unwrap(), seq);
        let one = serialize(&GateSeq::from_gates(1, vec![Gate::x_power(0, 2, 0.5)])).unwrap();
        assert!(one.contains("\"x2\""));
    }

    #[test]
    fn schema_violations() {
        assert!(matches!(deserialize("{"), Err(SchemaViolation::Json(_))));
        let bad_kind = r#"{"version":1,"modes":1,"ancillas":[],"gates":[{"kind":"x4","modes":[0],"strength":1.0,"dagger":false,"provenance":""}]}"#;
        assert!(matches!(
            deserialize(bad_kind),
            Err(SchemaViolation::Gate { index: 0, .. })
        ));
        let bad_mode = r#"{"version":1,"modes":1,"ancillas":[],"gates":[{"kind":"x1","modes":[3],"strength":1.0,"dagger":false,"provenance":""}]}"#;
        assert!(deserialize(bad_mode).is_err());
        let bad_version = r#"{"version":2,"modes":1,"ancillas":[],"gates":[]}"#;
        assert_eq!(deserialize(bad_version), Err(SchemaViolation::Version(2)));
    }
}
