//! Half-line radial basis: the odd eigenfunctions of the unit-frequency
//! harmonic oscillator, rescaled to be orthonormal on (0, inf), and the
//! matrix elements of the one-body operators appearing in the model.
//!
//! `X^2` and `P^2` have even integrands, so their half-line elements equal
//! the full-line ladder-algebra values and are built exactly as tridiagonal
//! matrices. `X^{-2}`, `X`, `X^{-1}` and `P` exist only as half-line
//! integrals and are evaluated with the `e^{-r^2}` Gauss rule; every such
//! integrand is again a polynomial times `e^{-r^2}` (the basis functions
//! vanish linearly at the origin), so the rule is exact up to rounding.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::math;
use crate::quadrature::{halfline_quadrature, QuadratureRule};

use super::banded::BandedMatrix;

/// Radial truncation: `h0` retained odd levels, quadrature size, and the
/// oscillator length `scale` of the basis (the physical operators are
/// scale-free; the truncated spectra are not).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialBasisSpec {
    pub h0: usize,
    pub quad_order: usize,
    pub scale: f64,
}

impl RadialBasisSpec {
    /// Spec with the default quadrature margin `2 h0 + 8` and unit scale.
    pub fn new(h0: usize) -> Self {
        Self {
            h0,
            quad_order: 2 * h0 + 8,
            scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.h0 < 1 {
            return Err(invalid("h0", "must be >= 1"));
        }
        if self.quad_order < 2 * self.h0 + 8 {
            return Err(invalid(
                "quad_order",
                alloc::format!("must be >= 2*h0 + 8 = {}", 2 * self.h0 + 8),
            ));
        }
        if !(self.scale > 0.0) {
            return Err(invalid("scale", "must be > 0"));
        }
        Ok(())
    }
}

/// The six one-body radial operators used by the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RadialOperatorKind {
    XSquared,
    PSquared,
    XInvSquared,
    X,
    XInv,
    P,
}

/// Matrix of a radial operator: tridiagonal for the ladder-algebra kinds,
/// dense for the quadrature kinds. `P` is returned as the real antisymmetric
/// `K` with `P = i K`.
#[derive(Debug, Clone)]
pub enum RadialMatrix {
    Banded(BandedMatrix),
    Dense(Matrix),
}

impl RadialMatrix {
    pub fn to_dense(&self) -> Matrix {
        match self {
            RadialMatrix::Banded(b) => b.to_dense(),
            RadialMatrix::Dense(m) => m.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RadialMatrix::Banded(b) => b.dim(),
            RadialMatrix::Dense(m) => m.rows(),
        }
    }
}

/// Normalized Hermite-function values `psi_n(x)` for `n = 0..count`
/// (Gaussian included), by the stable two-term recurrence.
fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    let g = math::exp(-0.5 * x * x) * math::powf(math::PI, -0.25);
    out[0] = g;
    if count > 1 {
        out[1] = math::sqrt(2.0) * x * g;
    }
    for n in 2..count {
        let nf = n as f64;
        out[n] = x * math::sqrt(2.0 / nf) * out[n - 1] - math::sqrt((nf - 1.0) / nf) * out[n - 2];
    }
    out
}

/// Polynomial parts `P_n(x) = psi_n(x) e^{x^2/2}` by the same recurrence,
/// for quadrature against the explicit `e^{-r^2}` weight.
fn hermite_poly_parts(x: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    out[0] = math::powf(math::PI, -0.25);
    if count > 1 {
        out[1] = math::sqrt(2.0) * x * out[0];
    }
    for n in 2..count {
        let nf = n as f64;
        out[n] = x * math::sqrt(2.0 / nf) * out[n - 1] - math::sqrt((nf - 1.0) / nf) * out[n - 2];
    }
    out
}

/// chi_k(r): the k-th orthonormal odd-oscillator function on (0, inf),
/// `sqrt(2) psi_{2k+1}(r/b) / sqrt(b)`.
pub fn odd_oscillator_value(k: usize, r: f64, spec: &RadialBasisSpec) -> Result<f64> {
    spec.validate()?;
    if k >= spec.h0 {
        return Err(Error::IndexOutOfRange {
            index: k,
            limit: spec.h0,
        });
    }
    if r < 0.0 {
        return Err(invalid("r", "radius must be >= 0"));
    }
    let u = r / spec.scale;
    let psi = hermite_functions(u, 2 * k + 2);
    Ok(math::sqrt(2.0) * psi[2 * k + 1] / math::sqrt(spec.scale))
}

struct RadialTables {
    rule: QuadratureRule,
    /// chi_poly[node][k]: polynomial part of chi_k at node (unit scale)
    chi: Vec<Vec<f64>>,
    /// dchi_poly[node][k]: polynomial part of chi_k' at node (unit scale)
    dchi: Vec<Vec<f64>>,
}

fn radial_tables(spec: &RadialBasisSpec) -> Result<RadialTables> {
    let h0 = spec.h0;
    let rule = halfline_quadrature(spec.quad_order)?;
    let mut chi = Vec::with_capacity(rule.len());
    let mut dchi = Vec::with_capacity(rule.len());
    let count = 2 * h0 + 1;
    let sqrt2 = math::sqrt(2.0);
    for &r in &rule.nodes {
        let h = hermite_poly_parts(r, count);
        let mut c = vec![0.0; h0];
        let mut dc = vec![0.0; h0];
        for k in 0..h0 {
            let n = 2 * k + 1;
            c[k] = sqrt2 * h[n];
            // psi_n' = sqrt(n/2) psi_{n-1} - sqrt((n+1)/2) psi_{n+1}
            let lower = math::sqrt(n as f64 / 2.0) * h[n - 1];
            let upper = math::sqrt((n as f64 + 1.0) / 2.0) * h[n + 1];
            dc[k] = sqrt2 * (lower - upper);
        }
        chi.push(c);
        dchi.push(dc);
    }
    Ok(RadialTables { rule, chi, dchi })
}

fn gram_residual(tables: &RadialTables, h0: usize) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..h0 {
        for k in j..h0 {
            let mut acc = 0.0;
            for (node, &w) in tables.rule.weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                acc += w * tables.chi[node][j] * tables.chi[node][k];
            }
            let want = if j == k { 1.0 } else { 0.0 };
            worst = worst.max(math::abs(acc - want));
        }
    }
    worst
}

/// Max |Gram - I| of the basis under the configured quadrature; the
/// insufficiency detector for `quad_order`.
pub fn orthonormality_residual(spec: &RadialBasisSpec) -> Result<f64> {
    spec.validate()?;
    let tables = radial_tables(spec)?;
    Ok(gram_residual(&tables, spec.h0))
}

const GRAM_TOL: f64 = 1e-10;

/// Matrix elements `<chi_j| op |chi_k>`, exact tridiagonal ladder values for
/// `X^2`/`P^2`, half-line quadrature for the rest.
pub fn radial_operator_matrix(kind: RadialOperatorKind, spec: &RadialBasisSpec) -> Result<RadialMatrix> {
    spec.validate()?;
    let h0 = spec.h0;
    let b = spec.scale;
    match kind {
        RadialOperatorKind::XSquared | RadialOperatorKind::PSquared => {
            let sign = if kind == RadialOperatorKind::XSquared {
                1.0
            } else {
                -1.0
            };
            let pow = if kind == RadialOperatorKind::XSquared {
                b * b
            } else {
                1.0 / (b * b)
            };
            let mut diag = vec![0.0; h0];
            let mut off = vec![0.0; h0 - 1];
            for k in 0..h0 {
                let n = (2 * k + 1) as f64;
                diag[k] = pow * (n + 0.5);
            }
            for (k, o) in off.iter_mut().enumerate() {
                let n = (2 * k + 1) as f64;
                *o = pow * sign * 0.5 * math::sqrt((n + 1.0) * (n + 2.0));
            }
            let mut m = BandedMatrix::new(h0);
            m.set_band(0, diag);
            if h0 > 1 {
                m.set_band(1, off.clone());
                m.set_band(-1, off);
            }
            Ok(RadialMatrix::Banded(m))
        }
        _ => Ok(RadialMatrix::Dense(quadrature_matrix(kind, spec)?)),
    }
}

/// Quadrature evaluation of any radial operator, including `X^2`/`P^2`;
/// the independent route used to validate the ladder-algebra path.
pub fn radial_operator_matrix_quadrature(
    kind: RadialOperatorKind,
    spec: &RadialBasisSpec,
) -> Result<Matrix> {
    spec.validate()?;
    quadrature_matrix(kind, spec)
}

fn quadrature_matrix(kind: RadialOperatorKind, spec: &RadialBasisSpec) -> Result<Matrix> {
    let h0 = spec.h0;
    let b = spec.scale;
    let tables = radial_tables(spec)?;
    let residual = gram_residual(&tables, h0);
    if residual > GRAM_TOL {
        return Err(Error::QuadratureInsufficient { residual });
    }
    let mut m = Matrix::zeros(h0, h0);
    let nodes = &tables.rule.nodes;
    let weights = &tables.rule.weights;
    // unit-scale elements; the basis rescaling multiplies by a power of b
    let scale_pow = match kind {
        RadialOperatorKind::XSquared => b * b,
        RadialOperatorKind::PSquared => 1.0 / (b * b),
        RadialOperatorKind::XInvSquared => 1.0 / (b * b),
        RadialOperatorKind::X => b,
        RadialOperatorKind::XInv => 1.0 / b,
        RadialOperatorKind::P => 1.0 / b,
    };
    match kind {
        RadialOperatorKind::P => {
            // P = i K, K_{jk} = -int chi_j chi_k'
            for j in 0..h0 {
                for k in 0..h0 {
                    let mut acc = 0.0;
                    for (node, &w) in weights.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        acc += w * tables.chi[node][j] * tables.dchi[node][k];
                    }
                    m[(j, k)] = -scale_pow * acc;
                }
            }
        }
        RadialOperatorKind::PSquared => {
            // <chi_j|p^2|chi_k> = int chi_j' chi_k' (Dirichlet boundary)
            for j in 0..h0 {
                for k in j..h0 {
                    let mut acc = 0.0;
                    for (node, &w) in weights.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        acc += w * tables.dchi[node][j] * tables.dchi[node][k];
                    }
                    let v = scale_pow * acc;
                    m[(j, k)] = v;
                    m[(k, j)] = v;
                }
            }
        }
        _ => {
            for j in 0..h0 {
                for k in j..h0 {
                    let mut acc = 0.0;
                    for (node, &w) in weights.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        let r = nodes[node];
                        let g = match kind {
                            RadialOperatorKind::XSquared => r * r,
                            RadialOperatorKind::XInvSquared => 1.0 / (r * r),
                            RadialOperatorKind::X => r,
                            RadialOperatorKind::XInv => 1.0 / r,
                            _ => unreachable!(),
                        };
                        acc += w * g * tables.chi[node][j] * tables.chi[node][k];
                    }
                    let v = scale_pow * acc;
                    m[(j, k)] = v;
                    m[(k, j)] = v;
                }
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigenvalues;

    fn spec(h0: usize) -> RadialBasisSpec {
        RadialBasisSpec::new(h0)
    }

    #[test]
    fn basis_vanishes_at_origin() {
        let s = spec(8);
        for k in 0..8 {
            assert_eq!(odd_oscillator_value(k, 0.0, &s).unwrap(), 0.0);
        }
    }

    #[test]
    fn first_function_closed_form() {
        // chi_0(1) = 2 pi^{-1/4} e^{-1/2} = 0.9111609...
        let s = spec(4);
        let want = 2.0 * math::powf(math::PI, -0.25) * math::exp(-0.5);
        let got = odd_oscillator_value(0, 1.0, &s).unwrap();
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        assert!((got - 0.9111609).abs() < 5e-7);
    }

    #[test]
    fn norm_of_first_function_by_quadrature() {
        let rule = halfline_quadrature(16).unwrap();
        // chi_0 with the Gaussian stripped: sqrt(2) * P_1(r)
        let norm = rule.integrate(|r| {
            let p = hermite_poly_parts(r, 2);
            2.0 * p[1] * p[1]
        });
        assert!((norm - 1.0).abs() < 1e-13);
    }

    #[test]
    fn out_of_range_level_is_an_error() {
        let s = spec(3);
        assert!(matches!(
            odd_oscillator_value(3, 1.0, &s),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn gram_is_identity_within_contract() {
        for h0 in [4, 16, 48] {
            let r = orthonormality_residual(&spec(h0)).unwrap();
            assert!(r < 1e-10, "h0={h0}: residual {r}");
        }
    }

    #[test]
    fn ladder_x_squared_values() {
        let m = radial_operator_matrix(RadialOperatorKind::XSquared, &spec(4))
            .unwrap()
            .to_dense();
        assert!((m[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((m[(0, 1)] - 0.5 * math::sqrt(6.0)).abs() < 1e-15);
        assert_eq!(m[(0, 2)], 0.0);
        assert_eq!(m[(0, 3)], 0.0);
    }

    #[test]
    fn ladder_p_squared_values() {
        let m = radial_operator_matrix(RadialOperatorKind::PSquared, &spec(4))
            .unwrap()
            .to_dense();
        assert!((m[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((m[(0, 1)] + 0.5 * math::sqrt(6.0)).abs() < 1e-15);
    }

    #[test]
    fn x_inverse_squared_ground_element() {
        let m = radial_operator_matrix(RadialOperatorKind::XInvSquared, &spec(6)).unwrap();
        let d = m.to_dense();
        assert!((d[(0, 0)] - 2.0).abs() < 1e-10, "{}", d[(0, 0)]);
    }

    #[test]
    fn x_ground_element() {
        let m = radial_operator_matrix(RadialOperatorKind::X, &spec(6))
            .unwrap()
            .to_dense();
        let want = 2.0 / math::sqrt(math::PI);
        assert!((m[(0, 0)] - want).abs() < 1e-12);
    }

    #[test]
    fn p_is_antisymmetric_with_zero_diagonal() {
        let m = radial_operator_matrix(RadialOperatorKind::P, &spec(10))
            .unwrap()
            .to_dense();
        assert!(m.antisymmetry_residual() < 1e-12);
        for k in 0..10 {
            assert!(math::abs(m[(k, k)]) < 1e-13);
        }
    }

    #[test]
    fn quadrature_route_matches_ladder_route() {
        let s = spec(16);
        for kind in [RadialOperatorKind::XSquared, RadialOperatorKind::PSquared] {
            let ladder = radial_operator_matrix(kind, &s).unwrap().to_dense();
            let quad = radial_operator_matrix_quadrature(kind, &s).unwrap();
            for j in 0..16 {
                for k in 0..16 {
                    assert!(
                        (ladder[(j, k)] - quad[(j, k)]).abs() < 1e-10,
                        "{kind:?} ({j},{k}): {} vs {}",
                        ladder[(j, k)],
                        quad[(j, k)]
                    );
                }
            }
        }
    }

    #[test]
    fn operators_are_hermitian_and_positive() {
        let s = spec(12);
        for kind in [
            RadialOperatorKind::XSquared,
            RadialOperatorKind::PSquared,
            RadialOperatorKind::XInvSquared,
        ] {
            let m = radial_operator_matrix(kind, &s).unwrap().to_dense();
            assert!(m.symmetry_residual() < 1e-12);
            let eigs = sym_eigenvalues(&m).unwrap();
            assert!(eigs[0] > 0.0, "{kind:?} min eig {}", eigs[0]);
        }
    }

    #[test]
    fn scale_moves_elements_by_the_right_power() {
        let unit = spec(6);
        let scaled = spec(6).with_scale(2.0);
        let x_unit = radial_operator_matrix(RadialOperatorKind::X, &unit)
            .unwrap()
            .to_dense();
        let x_scaled = radial_operator_matrix(RadialOperatorKind::X, &scaled)
            .unwrap()
            .to_dense();
        for j in 0..6 {
            for k in 0..6 {
                assert!((x_scaled[(j, k)] - 2.0 * x_unit[(j, k)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn insufficient_quadrature_is_detected() {
        let s = RadialBasisSpec {
            h0: 24,
            quad_order: 10, // far below 2*h0+8; validate() rejects it first
            scale: 1.0,
        };
        assert!(radial_operator_matrix(RadialOperatorKind::X, &s).is_err());
    }
}
