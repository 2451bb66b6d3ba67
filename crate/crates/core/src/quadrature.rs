//! Gaussian quadrature rules.
//!
//! Gauss-Legendre comes from Newton iteration on the Legendre polynomial;
//! generalized Gauss-Laguerre from its known recurrence via Golub-Welsch.
//! The half-line rule for the weight `e^{-r^2}` on (0, inf) has no
//! closed-form recurrence; its Jacobi coefficients are generated by Lanczos
//! tridiagonalization (with full reorthogonalization) of the position
//! operator over a dense positive discrete measure — a fine Gauss-Legendre
//! grid on [0, R] carrying the weight. The plain Stieltjes recurrence is
//! pseudo-unstable for this weight (orthogonality decays geometrically with
//! the order); the reorthogonalized reduction is not.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;
use crate::math;

/// Nodes and weights for a Gauss rule: `sum_i w_i f(x_i) ~ int f(x) W(x) dx`
/// with the weight function `W` implicit in the rule.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Apply the rule to `f`. Nodes whose weight underflowed to zero are
    /// skipped so that huge polynomial values far outside the measure's
    /// support cannot poison the sum with `0 * inf`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(self.weights.iter()) {
            if w == 0.0 {
                continue;
            }
            acc += w * f(x);
        }
        acc
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss-Legendre rule on [-1, 1] (weight 1), exact for polynomials of
/// degree <= 2n - 1. Newton iteration on P_n from Chebyshev-like starting
/// points; weights `2 / ((1 - x^2) P_n'(x)^2)`.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n < 1 {
        return Err(Error::InvalidSpec {
            field: "order",
            message: alloc::format!("Gauss-Legendre order must be >= 1, got {n}"),
        });
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess for the i-th root (descending order)
        let mut x = math::cos(math::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre value and derivative by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if math::abs(dx) < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Golub-Welsch: nodes are the Jacobi-matrix eigenvalues, weights are
/// `mu0 * v0^2` with `v0` the first eigenvector component. `a` holds the
/// recurrence diagonal, `b` the off-diagonal products (`b[0]` unused).
fn golub_welsch(a: &[f64], b: &[f64], mu0: f64) -> Result<QuadratureRule> {
    let n = a.len();
    let off: Vec<f64> = b[1..n].iter().map(|&x| math::sqrt(x)).collect();
    let (nodes, vecs) = linalg::tridiag_eigen(a, &off)?;
    let weights = (0..n)
        .map(|i| {
            let v0 = vecs[(0, i)];
            mu0 * v0 * v0
        })
        .collect();
    Ok(QuadratureRule { nodes, weights })
}

/// Generalized Gauss-Laguerre rule for the weight `t^alpha e^{-t}` on
/// (0, inf), `alpha > -1`, exact for polynomials of degree <= 2n - 1.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<QuadratureRule> {
    if n < 1 || alpha <= -1.0 {
        return Err(Error::InvalidSpec {
            field: "order",
            message: alloc::format!(
                "Gauss-Laguerre needs n >= 1 and alpha > -1, got n={n}, alpha={alpha}"
            ),
        });
    }
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for k in 0..n {
        let kf = k as f64;
        a[k] = 2.0 * kf + alpha + 1.0;
        if k > 0 {
            b[k] = kf * (kf + alpha);
        }
    }
    golub_welsch(&a, &b, libm::tgamma(alpha + 1.0))
}

/// Radius beyond which `e^{-r^2}` underflows towards the subnormal range;
/// discrete-measure nodes past it carry zero weight anyway.
const HALFLINE_SUPPORT: f64 = 27.0;

/// Gauss rule for the weight `e^{-r^2}` on (0, inf): exact (up to rounding)
/// for integrands `polynomial(deg <= 2*order - 1) * e^{-r^2}`.
pub fn halfline_quadrature(order: usize) -> Result<QuadratureRule> {
    if order < 2 {
        return Err(Error::InvalidSpec {
            field: "quad_order",
            message: alloc::format!("half-line quadrature order must be >= 2, got {order}"),
        });
    }
    // positive discrete measure: fine Gauss-Legendre grid on [0, R] with the
    // weight folded into the point masses
    let grid = 4 * order + 800;
    let base = gauss_legendre(grid)?;
    let half_r = 0.5 * HALFLINE_SUPPORT;
    let mut xs = Vec::with_capacity(grid);
    let mut ws = Vec::with_capacity(grid);
    for (&u, &w) in base.nodes.iter().zip(base.weights.iter()) {
        let r = half_r * (u + 1.0);
        let point_mass = half_r * w * math::exp(-r * r);
        if point_mass > 0.0 {
            xs.push(r);
            ws.push(point_mass);
        }
    }
    let mu0: f64 = ws.iter().sum();

    // Lanczos reduction of diag(xs) in the ws-weighted inner product, with
    // two-pass full reorthogonalization; q_0 = constant.
    let m = xs.len();
    let wdot = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..u.len() {
            acc += ws[i] * u[i] * v[i];
        }
        acc
    };
    let mut a = vec![0.0; order];
    let mut b = vec![0.0; order];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(order);
    basis.push(vec![1.0 / math::sqrt(mu0); m]);
    for k in 0..order {
        let q_k = &basis[k];
        let mut w: Vec<f64> = xs.iter().zip(q_k.iter()).map(|(&x, &q)| x * q).collect();
        a[k] = wdot(&w, q_k);
        if k + 1 == order {
            break;
        }
        for (wi, qi) in w.iter_mut().zip(q_k.iter()) {
            *wi -= a[k] * qi;
        }
        if k > 0 {
            let sqrt_bk = math::sqrt(b[k]);
            for (wi, qi) in w.iter_mut().zip(basis[k - 1].iter()) {
                *wi -= sqrt_bk * qi;
            }
        }
        for _pass in 0..2 {
            for q in &basis {
                let c = wdot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q.iter()) {
                    *wi -= c * qi;
                }
            }
        }
        let bk1 = wdot(&w, &w);
        if !(bk1 > 0.0) {
            return Err(Error::QuadratureInsufficient { residual: bk1 });
        }
        b[k + 1] = bk1;
        let inv = 1.0 / math::sqrt(bk1);
        for wi in w.iter_mut() {
            *wi *= inv;
        }
        basis.push(w);
    }
    golub_welsch(&a, &b, mu0)
}
