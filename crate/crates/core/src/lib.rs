//! Mobius transforms of homogeneous complex matrix polynomials, with the
//! machinery to measure how a transform changes eigenvalue condition numbers
//! and eigenpair backward errors: Stewart-Sun condition numbers under three
//! weight schemes, exact transformation quotients, sandwich bounds driven by
//! `cond_inf(A)` and the degree, and seeded experiment campaigns that map the
//! quotients against degree, coefficient spread and transform conditioning.

mod dd;

pub mod eigen;
pub mod error;
pub mod experiments;
pub mod mobius;
pub mod plot;
pub mod poly;
pub mod sensitivity;

pub use error::Error;
pub use mobius::{
    binom, coeff_norm_bound, mobius_by_interpolation, mobius_transform, Mobius2x2, ProjPoint,
};
pub use poly::{spectral_norm, CMatrix, HomMatrixPolynomial, WeightScheme};
