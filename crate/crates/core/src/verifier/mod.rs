//! Symbolic and numeric equivalence checks for compiled circuits.

pub mod numeric;
pub mod symbolic;

pub use numeric::{
    fock_matrices, verify_numeric, FockContext, FockMatrices, NumericError, NumericReport,
};
pub use symbolic::{exp_action, heisenberg_action, residual_against, HeisenbergMap};

use crate::decomposer::TargetGate;
use crate::gate::GateSeq;
use crate::weyl::WeylError;

/// Largest coefficient difference between the Heisenberg actions of `seq`
/// and of `e^{i t H}` for the target. Zero means exact up to a global phase.
pub fn verify_symbolic(seq: &GateSeq, target: &TargetGate) -> Result<f64, WeylError> {
    residual_against(seq, &target.generator(), target.strength)
}
