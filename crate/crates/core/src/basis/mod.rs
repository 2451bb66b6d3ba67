//! Basis-level building blocks: the odd-oscillator radial basis with exact
//! one-body matrix elements, and the angular coupling matrices (quartic
//! band matrix, centrifugal diagonal, charge bands) with their Legendre
//! triple-product underpinnings.

mod angular;
mod banded;
mod radial;

pub use angular::{
    a_matrix, a_matrix_oracle, angular_momentum_diagonal, c_coefficient, charge_bands,
    legendre_triple_integral, AngularSpec,
};
pub use banded::BandedMatrix;
pub use radial::{
    odd_oscillator_value, orthonormality_residual, radial_operator_matrix,
    radial_operator_matrix_quadrature, RadialBasisSpec, RadialMatrix, RadialOperatorKind,
};
