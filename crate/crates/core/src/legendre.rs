//! Legendre polynomials, Gauss and Gauss-Lobatto rules on the reference
//! interval [-1, 1], and the nodal differentiation matrix.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Values `P_0(x)..=P_degree(x)` by the three-term recurrence.
pub fn legendre_values(degree: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; degree + 1];
    p[0] = 1.0;
    if degree >= 1 {
        p[1] = x;
    }
    for k in 1..degree {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
    }
    p
}

/// Values and first derivatives of `P_0..=P_degree` at `x`.
pub fn legendre_values_and_derivatives(degree: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let p = legendre_values(degree, x);
    let mut dp = vec![0.0; degree + 1];
    // P'_{k+1} = P'_{k-1} + (2k+1) P_k
    if degree >= 1 {
        dp[1] = 1.0;
    }
    for k in 1..degree {
        dp[k + 1] = dp[k - 1] + (2.0 * k as f64 + 1.0) * p[k];
    }
    (p, dp)
}

/// `∫_{-1}^{1} P_k² dξ`.
pub fn legendre_norm_sq(k: usize) -> f64 {
    2.0 / (2.0 * k as f64 + 1.0)
}

/// Evaluates `Σ c_k P_k(x)`.
pub fn eval_legendre_series(coeffs: &[f64], x: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let p = legendre_values(coeffs.len() - 1, x);
    coeffs.iter().zip(&p).map(|(c, p)| c * p).sum()
}

/// Monomial coefficients of `P_k(ξ)`, for k = 0..=degree.
pub fn legendre_monomials(degree: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
    out.push({
        let mut v = vec![0.0; degree + 1];
        v[0] = 1.0;
        v
    });
    if degree >= 1 {
        let mut v = vec![0.0; degree + 1];
        v[1] = 1.0;
        out.push(v);
    }
    for k in 1..degree {
        let kf = k as f64;
        let mut v = vec![0.0; degree + 1];
        for j in 0..degree {
            v[j + 1] += (2.0 * kf + 1.0) * out[k][j] / (kf + 1.0);
        }
        for j in 0..=degree {
            v[j] -= kf * out[k - 1][j] / (kf + 1.0);
        }
        out.push(v);
    }
    out
}

/// A quadrature rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Highest polynomial degree integrated exactly.
    pub exactness: usize,
}

impl QuadratureRule {
    /// Gauss-Legendre rule with `npts` points (exact through degree `2 npts - 1`).
    pub fn gauss_legendre(npts: usize) -> Result<Self> {
        if npts == 0 {
            return Err(invalid("Gauss rule needs at least one point"));
        }
        let mut points = vec![0.0; npts];
        let mut weights = vec![0.0; npts];
        for i in 0..npts {
            // Chebyshev-like initial guess, descending order
            let mut x = (PI * (i as f64 + 0.75) / (npts as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_values_and_derivatives(npts, x);
                let dx = p[npts] / dp[npts];
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_values_and_derivatives(npts, x);
            points[npts - 1 - i] = x;
            weights[npts - 1 - i] = 2.0 / ((1.0 - x * x) * dp[npts] * dp[npts]);
        }
        Ok(Self {
            points,
            weights,
            exactness: 2 * npts - 1,
        })
    }

    /// The smallest Gauss rule that integrates degree `degree` exactly.
    pub fn gauss_with_exactness(degree: usize) -> Result<Self> {
        Self::gauss_legendre(degree / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `∫_a^b g(x) dx` by the affine map of this rule.
    pub fn integrate(&self, a: f64, b: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * g(mid + half * p))
            .sum::<f64>()
            * half
    }
}

/// Legendre-Gauss-Lobatto nodes with the nodal differentiation matrix.
#[derive(Debug, Clone)]
pub struct LglNodes {
    pub nodes: Vec<f64>,
    /// Row-major `(m+1) x (m+1)`; `D v` differentiates the interpolant of `v`.
    pub diff: Vec<f64>,
}

/// The `m+1` LGL nodes (endpoints and roots of `P_m'`) and their
/// differentiation matrix.
pub fn lgl_nodes(m: usize) -> Result<LglNodes> {
    if m < 1 {
        return Err(invalid("LGL grid needs degree m >= 1"));
    }
    let np = m + 1;
    let mut nodes = vec![0.0; np];
    nodes[0] = -1.0;
    nodes[m] = 1.0;
    for i in 1..m {
        // Chebyshev-Gauss-Lobatto guess, Newton on (1 - x²) P_m'(x)
        let mut x = -(PI * i as f64 / m as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_values_and_derivatives(m, x);
            // d/dx[(1-x²)P_m'] = -m(m+1) P_m
            let g = (1.0 - x * x) * dp[m];
            let dg = -(m as f64) * (m as f64 + 1.0) * p[m];
            let dx = g / dg;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
    }
    // barycentric weights
    let bw: Vec<f64> = (0..np)
        .map(|j| {
            1.0 / (0..np)
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product::<f64>()
        })
        .collect();
    let mut diff = vec![0.0; np * np];
    for i in 0..np {
        let mut rowsum = 0.0;
        for j in 0..np {
            if i != j {
                let d = bw[j] / bw[i] / (nodes[i] - nodes[j]);
                diff[i * np + j] = d;
                rowsum += d;
            }
        }
        diff[i * np + i] = -rowsum;
    }
    Ok(LglNodes { nodes, diff })
}

/// L2 projection of `f` on [a, b] onto Legendre modes `0..=degree` of the
/// mapped reference coordinate. Intervals are split at `breaks` so that
/// piecewise-smooth data is integrated accurately.
pub fn project_onto_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, degree: usize, breaks: &[f64]) -> Vec<f64> {
    let rule = QuadratureRule::gauss_legendre(degree + 12).expect("nonzero points");
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    cuts.extend(inner);
    cuts.push(b);
    let mut coeffs = vec![0.0; degree + 1];
    for w in cuts.windows(2) {
        // integrate in reference coordinate ξ ∈ [ξ(w0), ξ(w1)]
        let xi0 = 2.0 * (w[0] - a) / (b - a) - 1.0;
        let xi1 = 2.0 * (w[1] - a) / (b - a) - 1.0;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c += rule.integrate(xi0, xi1, |xi| {
                let x = a + 0.5 * (xi + 1.0) * (b - a);
                f(x) * legendre_values(k, xi)[k]
            });
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c /= legendre_norm_sq(k);
    }
    coeffs
}
