use cvexact::circuit::optimize;
use cvexact::gate::{Gate, GateSeq};
use cvexact::verifier::{fock_matrices, heisenberg_action, FockContext};
use cvexact::weyl::{heisenberg_conjugate, Automorphism, Monomial, NOPoly};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn arb_monomial(modes: usize, max_degree: u16) -> impl Strategy<Value = Monomial> {
    prop::collection::vec((0..=max_degree, 0..=max_degree), modes).prop_map(move |exps| {
        let mut budget = max_degree;
        let factors: Vec<(usize, u16, u16)> = exps
            .into_iter()
            .enumerate()
            .map(|(m, (x, p))| {
                let x = x.min(budget);
                budget -= x;
                let p = p.min(budget);
                budget -= p;
                (m, x, p)
            })
            .collect();
        Monomial::from_factors(&factors)
    })
}

fn arb_poly(modes: usize, max_degree: u16) -> impl Strategy<Value = NOPoly> {
    prop::collection::vec(
        (arb_monomial(modes, max_degree), -2.0f64..2.0, -2.0f64..2.0),
        1..4,
    )
    .prop_map(|terms| {
        NOPoly::from_terms(
            terms
                .into_iter()
                .map(|(m, re, im)| (m, Complex64::new(re, im))),
        )
    })
}

fn arb_gate(modes: usize) -> impl Strategy<Value = Gate> {
    let m = 0..modes;
    prop_oneof![
        (m.clone(), any::<bool>()).prop_map(|(m, inv)| Gate::fourier(m, inv)),
        (m.clone(), 1u16..=3, -1.0f64..1.0).prop_map(|(m, n, t)| Gate::x_power(m, n, t)),
        (m.clone(), m, -1.0f64..1.0)
            .prop_filter("distinct modes", |(a, b, _)| a != b)
            .prop_map(|(a, b, t)| Gate::coupling(a.min(b), a.max(b), t)),
    ]
}

/// Sequences with planted cancellations and merges.
fn arb_seq() -> impl Strategy<Value = GateSeq> {
    prop::collection::vec((arb_gate(2), 0u8..3), 1..5).prop_map(|gates| {
        let mut out = Vec::new();
        for (g, twist) in gates {
            match twist {
                0 => out.push(g),
                1 => {
                    out.push(g.clone());
                    out.push(g.inverse());
                }
                _ => {
                    out.push(g.clone());
                    out.push(g);
                }
            }
        }
        GateSeq::from_gates(2, out)
    })
}

/// Single-mode `X^a P^b` at the given cutoff.
fn mode_matrix(
    x: &DMatrix<Complex64>,
    p: &DMatrix<Complex64>,
    a: u16,
    b: u16,
) -> DMatrix<Complex64> {
    let n = x.nrows();
    let mut out = DMatrix::identity(n, n);
    for _ in 0..a {
        out = &out * x;
    }
    for _ in 0..b {
        out = &out * p;
    }
    out
}

/// Matrix of a polynomial on the lowest `keep` levels of each of `modes`
/// modes, built from single-mode matrices at the full cutoff.
fn restricted(
    poly_terms: &[(Monomial, Complex64)],
    modes: usize,
    keep: usize,
    x: &DMatrix<Complex64>,
    p: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let dim = keep.pow(modes as u32);
    let mut total = DMatrix::zeros(dim, dim);
    for (m, c) in poly_terms {
        let mut acc = DMatrix::from_element(1, 1, *c);
        for mode in 0..modes {
            let (a, b) = m.exponents(mode);
            let block = mode_matrix(x, p, a, b)
                .view((0, 0), (keep, keep))
                .into_owned();
            acc = acc.kronecker(&block);
        }
        total += acc;
    }
    total
}

/// Product `A B` evaluated as per-mode matrix products at the full cutoff,
/// then restricted.
fn product_oracle(
    a: &Monomial,
    b: &Monomial,
    modes: usize,
    keep: usize,
    x: &DMatrix<Complex64>,
    p: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let mut acc = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for mode in 0..modes {
        let (ax, ap) = a.exponents(mode);
        let (bx, bp) = b.exponents(mode);
        let full = mode_matrix(x, p, ax, ap) * mode_matrix(x, p, bx, bp);
        acc = acc.kronecker(&full.view((0, 0), (keep, keep)).into_owned());
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jacobi_identity(a in arb_poly(2, 3), b in arb_poly(2, 3), c in arb_poly(2, 3)) {
        let sum = &(&a.commutator(&b.commutator(&c)) + &b.commutator(&c.commutator(&a)))
            + &c.commutator(&a.commutator(&b));
        prop_assert!(sum.max_abs_coeff() < 1e-9);
    }

    #[test]
    fn commutator_is_antisymmetric_and_multiplication_associative(
        a in arb_poly(2, 3), b in arb_poly(2, 3), c in arb_poly(2, 2)
    ) {
        prop_assert!((&a.commutator(&b) + &b.commutator(&a)).max_abs_coeff() < 1e-12);
        let left = a.mul(&b).mul(&c);
        let right = a.mul(&b.mul(&c));
        prop_assert!((&left - &right).max_abs_coeff() < 1e-9);
    }

    #[test]
    fn fourier_is_an_automorphism(mode in 0usize..2, inverse in any::<bool>(), a in arb_poly(2, 3), b in arb_poly(2, 3)) {
        let f = Automorphism::of_gate(&Gate::fourier(mode, inverse)).unwrap();
        let lhs = f.apply(&a.mul(&b));
        let rhs = f.apply(&a).mul(&f.apply(&b));
        prop_assert!((&lhs - &rhs).max_abs_coeff() < 1e-9);
        let four = (0..4).fold(a.clone(), |acc, _| f.apply(&acc));
        prop_assert!((&four - &a).max_abs_coeff() < 1e-9);
    }

    #[test]
    fn conjugation_inverts(g in arb_gate(2), b in arb_poly(2, 3)) {
        let there = heisenberg_conjugate(&g, &b).unwrap();
        let back = heisenberg_conjugate(&g.inverse(), &there).unwrap();
        prop_assert!((&back - &b).max_abs_coeff() < 1e-9);
    }

    #[test]
    fn optimizer_is_sound_and_idempotent(seq in arb_seq()) {
        let opt = optimize(&seq);
        prop_assert!(opt.len() <= seq.len());
        let before = heisenberg_action(&seq, 2).unwrap();
        let after = heisenberg_action(&opt, 2).unwrap();
        prop_assert!(before.distance(&after) < 1e-10);
        prop_assert_eq!(optimize(&opt), opt);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn normal_ordering_matches_matrices(a in arb_monomial(3, 4), b in arb_monomial(3, 4)) {
        let fm = fock_matrices(&FockContext::new(40, 10));
        let product = NOPoly::monomial(a.clone()).mul(&NOPoly::monomial(b.clone()));
        let ours = restricted(product.terms(), 3, 10, &fm.x, &fm.p);
        let oracle = product_oracle(&a, &b, 3, 10, &fm.x, &fm.p);
        let err = (ours - oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9, "error {}", err);
    }
}
