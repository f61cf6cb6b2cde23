//! Kernel gates of the application examples.

use cvexact::decomposer::TargetGate;
use cvexact::identities::Factor;

pub const NAMES: &[&str] = &[
    "bose-hubbard-dipole",
    "bose-hubbard-tunneling",
    "cross-kerr",
    "pca-rotation",
    "matrix-inversion",
    "pde-cubic",
    "montecarlo:<n>",
];

pub fn lookup(name: &str, t: f64) -> Option<TargetGate> {
    let factors = match name {
        "bose-hubbard-dipole" | "cross-kerr" => vec![Factor::x(0, 2), Factor::x(1, 2)],
        "bose-hubbard-tunneling" => vec![Factor::x(0, 1), Factor::x(1, 3)],
        "pca-rotation" | "pde-cubic" => vec![Factor::x(0, 1), Factor::x(1, 1), Factor::x(2, 1)],
        "matrix-inversion" => (0..4).map(|m| Factor::x(m, 1)).collect(),
        _ => {
            let n: u32 = name
                .strip_prefix("montecarlo:")?
                .parse()
                .ok()
                .filter(|&n| n >= 1)?;
            vec![
                Factor::x(0, n),
                Factor::p(1, 1),
                Factor::p(2, 1),
                Factor::p(3, 1),
            ]
        }
    };
    TargetGate::new(factors, t).ok()
}
