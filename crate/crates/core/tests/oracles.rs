use cvexact::gate::Gate;
use cvexact::verifier::numeric::{
    circuit_matrix, dense_subspace_error, exp_i_hermitian, poly_matrix,
};
use cvexact::verifier::{fock_matrices, FockContext};
use cvexact::weyl::{heisenberg_conjugate, zassenhaus_split, NOPoly};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn max_entry(m: &DMatrix<Complex64>, keep: usize) -> f64 {
    m.view((0, 0), (keep, keep))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[test]
fn bch_matches_numeric_conjugation() {
    let ctx = FockContext::new(30, 10);
    let fm = fock_matrices(&ctx);
    // cubic phases spread low levels quickly at this cutoff, hence the small t
    for (generator, b, t) in [
        (NOPoly::x_pow(0, 2), NOPoly::p(0), 0.3),
        (NOPoly::x_pow(0, 3), NOPoly::p(0), 0.03),
        (NOPoly::x_pow(0, 3), NOPoly::p(0).pow(2), 0.03),
    ] {
        let gate = Gate::exp(generator.clone(), t);
        let image = heisenberg_conjugate(&gate, &b).unwrap();
        let u = exp_i_hermitian(&poly_matrix(&generator, 1, &fm), t);
        let numeric = &u * poly_matrix(&b, 1, &fm) * u.adjoint();
        let diff = numeric - poly_matrix(&image, 1, &fm);
        assert!(max_entry(&diff, ctx.subspace) < 1e-8, "{generator} on {b}");
    }
    let image = heisenberg_conjugate(&Gate::exp(NOPoly::x_pow(0, 2), 0.3), &NOPoly::p(0)).unwrap();
    assert_eq!(image, &NOPoly::p(0) - &NOPoly::x(0).scale_real(0.3));
}

#[test]
fn zassenhaus_product_converges_with_order() {
    let ctx = FockContext::new(30, 6);
    let fm = fock_matrices(&ctx);
    let error = |a: &NOPoly, b: &NOPoly, t: f64, order: usize| {
        let exact = exp_i_hermitian(&poly_matrix(&(a + b), 1, &fm), t);
        let u = circuit_matrix(&zassenhaus_split(a, b, t, order), 1, &fm);
        dense_subspace_error(&u, &exact, ctx.cutoff, ctx.subspace, 1).subspace_error
    };
    // [X^2, P] = iX: every later commutator is central
    let (x2, p) = (NOPoly::x_pow(0, 2), NOPoly::p(0));
    assert!(error(&x2, &p, 0.3, 2) > 1e-3);
    assert!(error(&x2, &p, 0.3, 3) < 1e-10);

    // second-order split errs like t^2, third-order like t^3
    let x3 = NOPoly::x_pow(0, 3);
    let (two_a, three_a) = (error(&x3, &p, 0.02, 2), error(&x3, &p, 0.02, 3));
    let (two_b, three_b) = (error(&x3, &p, 0.01, 2), error(&x3, &p, 0.01, 3));
    assert!(three_a < two_a / 5.0 && three_b < two_b / 5.0);
    assert!((two_a / two_b - 4.0).abs() < 1.2, "{two_a} {two_b}");
    assert!((three_a / three_b - 8.0).abs() < 2.4, "{three_a} {three_b}");
}
