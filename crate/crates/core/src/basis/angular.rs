//! Angular-register matrices: the quartic coupling band matrix `A`, the
//! centrifugal diagonal `l(l+1)`, and the two charge bands, together with
//! the Legendre triple products and `c` coefficients they derive from.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;

use super::banded::BandedMatrix;

/// Angular truncation: levels `l = 0 .. l0-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AngularSpec {
    pub l0: usize,
}

impl AngularSpec {
    pub fn new(l0: usize) -> Self {
        Self { l0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l0 < 3 {
            return Err(invalid("l0", "must be >= 3"));
        }
        Ok(())
    }
}

/// `int_{-1}^{1} P_l(x) P_2(x) P_lp(x) dx`, the square of a 3j symbol up to
/// the factor 2. Nonzero only for |l - lp| in {0, 2} (and not l = lp = 0).
/// Closed forms follow from the `x P_l` ladder relation.
pub fn legendre_triple_integral(l: usize, lp: usize) -> f64 {
    let (lo, hi) = if l <= lp { (l, lp) } else { (lp, l) };
    if hi - lo == 2 {
        let m = lo as f64;
        3.0 * (m + 1.0) * (m + 2.0) / ((2.0 * m + 1.0) * (2.0 * m + 3.0) * (2.0 * m + 5.0))
    } else if hi == lo {
        let lf = l as f64;
        let tl1 = 2.0 * lf + 1.0;
        // <x^2> in P_l, from x P_l = ((l+1) P_{l+1} + l P_{l-1})/(2l+1)
        let upper = (lf + 1.0) * (lf + 1.0) / (2.0 * lf + 3.0);
        let lower = if l == 0 {
            0.0
        } else {
            lf * lf / (2.0 * lf - 1.0)
        };
        3.0 * (upper + lower) / (tl1 * tl1) - 1.0 / tl1
    } else {
        0.0
    }
}

/// Spherical-harmonic multiplication coefficient
/// `c_{l,2,lp} = (-1)^{l-lp} sqrt(5)/(8 pi) sqrt((2lp+1)(2l+1)) * triple(l, lp)`;
/// symmetric in (l, lp).
pub fn c_coefficient(l: usize, lp: usize) -> f64 {
    let triple = legendre_triple_integral(l, lp);
    if triple == 0.0 {
        return 0.0;
    }
    // |l - lp| is 0 or 2 here, so the sign factor is +1
    let norm = math::sqrt(((2 * lp + 1) * (2 * l + 1)) as f64);
    math::sqrt(5.0) / (8.0 * math::PI) * norm * triple
}

/// The banded quartic coupling matrix:
/// diagonal `1/2 - 1/(8 l (l+1) - 6)` and second off-diagonals
/// `-(l+1)(l+2) / (sqrt(2l+1) (2l+3) sqrt(2l+5))`.
pub fn a_matrix(spec: &AngularSpec) -> Result<BandedMatrix> {
    spec.validate()?;
    let l0 = spec.l0;
    let mut diag = vec![0.0; l0];
    for (l, d) in diag.iter_mut().enumerate() {
        let lf = l as f64;
        *d = 0.5 - 1.0 / (8.0 * lf * (lf + 1.0) - 6.0);
    }
    let mut off = vec![0.0; l0 - 2];
    for (l, o) in off.iter_mut().enumerate() {
        let lf = l as f64;
        *o = -(lf + 1.0) * (lf + 2.0)
            / (math::sqrt(2.0 * lf + 1.0) * (2.0 * lf + 3.0) * math::sqrt(2.0 * lf + 5.0));
    }
    let mut m = BandedMatrix::new(l0);
    m.set_band(0, diag);
    m.set_band(2, off.clone());
    m.set_band(-2, off);
    Ok(m)
}

/// First-principles reconstruction of `A` through the sin^2 decomposition
/// and the `c` coefficients: `A_{l,l} = 2/3 - (8 pi / (3 sqrt 5)) c_{l,2,l}`,
/// `A_{l,l+-2} = -(8 pi / (3 sqrt 5)) c_{l,2,l+-2}`. Exists to cross-validate
/// `a_matrix`.
pub fn a_matrix_oracle(spec: &AngularSpec) -> Result<BandedMatrix> {
    spec.validate()?;
    let l0 = spec.l0;
    let prefactor = 8.0 * math::PI / (3.0 * math::sqrt(5.0));
    let mut diag = vec![0.0; l0];
    for (l, d) in diag.iter_mut().enumerate() {
        *d = 2.0 / 3.0 - prefactor * c_coefficient(l, l);
    }
    let mut off = vec![0.0; l0 - 2];
    for (l, o) in off.iter_mut().enumerate() {
        *o = -prefactor * c_coefficient(l, l + 2);
    }
    let mut m = BandedMatrix::new(l0);
    m.set_band(0, diag);
    m.set_band(2, off.clone());
    m.set_band(-2, off);
    Ok(m)
}

/// The centrifugal diagonal `l(l+1)`.
pub fn angular_momentum_diagonal(spec: &AngularSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok((0..spec.l0).map(|l| (l * (l + 1)) as f64).collect())
}

/// The two charge bands, from the cos(theta_12) and angular-gradient matrix
/// elements between singlet states. With `l` the larger of the two coupled
/// levels:
///
/// `(Q_p)_{l-1,l} = (Q_p)_{l,l-1} = -l (4l^2-1)^{-1/2}`  (real symmetric)
///
/// `(Q_x)_{l-1,l} = +i l^2 (4l^2-1)^{-1/2}`, lower entry its conjugate;
/// returned as the real antisymmetric `K` of `Q_x = i K`.
///
/// Writing the coefficients with the lower index instead (which would zero
/// the l = 0 <-> 1 coupling) breaks charge conservation: the commutator
/// residual against the Hamiltonian jumps from truncation level to order
/// one, and sqrt(<Q^2>) leaves the even integers. Both matrix elements
/// follow from `u P_l = ((l+1) P_{l+1} + l P_{l-1})/(2l+1)` and
/// `(1-u^2) P_l' = l(l+1)(P_{l-1} - P_{l+1})/(2l+1)` with the alternating
/// singlet normalization `(-1)^l sqrt(2l+1)/(4 pi) P_l`.
pub fn charge_bands(spec: &AngularSpec) -> Result<(BandedMatrix, BandedMatrix)> {
    spec.validate()?;
    let l0 = spec.l0;
    let mut p_band = vec![0.0; l0 - 1];
    let mut x_band = vec![0.0; l0 - 1];
    for (m, (p, x)) in p_band.iter_mut().zip(x_band.iter_mut()).enumerate() {
        let lf = (m + 1) as f64;
        let root = math::sqrt(4.0 * lf * lf - 1.0);
        *p = -lf / root;
        *x = lf * lf / root;
    }
    let mut q_p = BandedMatrix::new(l0);
    q_p.set_band(1, p_band.clone());
    q_p.set_band(-1, p_band);
    let mut q_x = BandedMatrix::new(l0);
    q_x.set_band(1, x_band.clone());
    q_x.set_band(-1, x_band.iter().map(|v| -v).collect());
    Ok((q_p, q_x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    /// Independent route: exact Gauss-Legendre quadrature of
    /// P_l * P_2 * P_lp with Legendre values from the recurrence.
    fn triple_by_quadrature(l: usize, lp: usize) -> f64 {
        let degree = l + lp + 2;
        let rule = gauss_legendre(degree / 2 + 2).unwrap();
        let count = l.max(lp).max(2) + 1;
        rule.integrate(|x| {
            let mut p = vec![0.0; count];
            p[0] = 1.0;
            if count > 1 {
                p[1] = x;
            }
            for n in 1..(count - 1) {
                let nf = n as f64;
                p[n + 1] = ((2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1]) / (nf + 1.0);
            }
            p[l] * p[2] * p[lp]
        })
    }

    #[test]
    fn triple_integral_examples() {
        assert_eq!(legendre_triple_integral(0, 0), 0.0);
        assert!((legendre_triple_integral(0, 2) - 0.4).abs() < 1e-15);
        assert!((legendre_triple_integral(1, 1) - 4.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn triple_integral_matches_quadrature_scan() {
        for l in 0..=50 {
            for lp in 0..=50 {
                let closed = legendre_triple_integral(l, lp);
                let quad = triple_by_quadrature(l, lp);
                assert!(
                    (closed - quad).abs() < 1e-12,
                    "({l},{lp}): {closed} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn selection_rule_scan() {
        for l in 0..=50usize {
            for lp in 0..=50usize {
                let delta = l.abs_diff(lp);
                if delta != 0 && delta != 2 {
                    assert_eq!(legendre_triple_integral(l, lp), 0.0);
                }
            }
        }
    }

    #[test]
    fn c_coefficient_examples() {
        assert_eq!(c_coefficient(0, 0), 0.0);
        assert!((c_coefficient(0, 2) - 1.0 / (4.0 * math::PI)).abs() < 1e-16);
        assert!((c_coefficient(1, 1) - math::sqrt(5.0) / (10.0 * math::PI)).abs() < 1e-16);
    }

    #[test]
    fn c_coefficient_is_symmetric() {
        for l in 0..40 {
            for lp in 0..40 {
                assert_eq!(c_coefficient(l, lp), c_coefficient(lp, l));
            }
        }
    }

    #[test]
    fn a_matrix_examples() {
        let a = a_matrix(&AngularSpec::new(8)).unwrap();
        assert!((a.get(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.get(1, 1) - 0.4).abs() < 1e-15);
        assert!((a.get(0, 2) + 2.0 / (3.0 * math::sqrt(5.0))).abs() < 1e-15);
        assert!((a.get(0, 2) + 0.298142).abs() < 5e-7);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.get(0, 3), 0.0);
    }

    #[test]
    fn a_matrix_large_l_limits() {
        let a = a_matrix(&AngularSpec::new(600)).unwrap();
        assert!((a.get(500, 500) - 0.5).abs() < 1e-6);
        assert!((a.get(500, 502) + 0.25).abs() < 1e-3);
        // monotone approach
        assert!(
            (a.get(598, 598) - 0.5).abs() < (a.get(100, 100) - 0.5).abs(),
            "diagonal should approach 1/2"
        );
    }

    #[test]
    fn a_matrix_agrees_with_oracle() {
        let spec = AngularSpec::new(200);
        let direct = a_matrix(&spec).unwrap();
        let oracle = a_matrix_oracle(&spec).unwrap();
        let mut worst = 0.0_f64;
        for l in 0..200 {
            for lp in 0..200 {
                worst = worst.max((direct.get(l, lp) - oracle.get(l, lp)).abs());
            }
        }
        assert!(worst < 1e-12, "max deviation {worst}");
    }

    #[test]
    fn charge_band_examples() {
        let (q_p, q_x) = charge_bands(&AngularSpec::new(6)).unwrap();
        // larger-index convention: the 0 <-> 1 coupling carries l = 1
        assert!((q_p.get(0, 1) + 1.0 / math::sqrt(3.0)).abs() < 1e-15);
        assert!((q_p.get(1, 2) + 2.0 / math::sqrt(15.0)).abs() < 1e-15);
        assert_eq!(q_p.get(1, 2), q_p.get(2, 1));
        // Q_x = i K: K_{l-1,l} = + l^2 (4 l^2 - 1)^{-1/2}
        assert!((q_x.get(0, 1) - 1.0 / math::sqrt(3.0)).abs() < 1e-15);
        assert!((q_x.get(1, 0) + 1.0 / math::sqrt(3.0)).abs() < 1e-15);
        assert!((q_x.get(1, 2) - 4.0 / math::sqrt(15.0)).abs() < 1e-15);
    }
}
