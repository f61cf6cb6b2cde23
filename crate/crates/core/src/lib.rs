//! Exact compilation of quadrature-monomial gates `e^{itH}` into the
//! universal continuous-variable gate set
//! `{F, e^{itX}, e^{itX^2}, e^{itX^3}, e^{itX_jX_k}}`.

pub mod baseline;
pub mod circuit;
pub mod decomposer;
pub mod gate;
pub mod identities;
pub mod verifier;
pub mod weyl;
