//! Scaled Taylor polynomials and two-point Hermite interpolation.
//!
//! Coefficients are stored in the scaled local coordinate `ξ = (x - x_c) / h`,
//! so `u(x) = Σ a_k ξ^k` and `d/dx = (1/h) d/dξ`.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorPoly {
    pub coeffs: Vec<f64>,
    pub center: f64,
    pub scale: f64,
}

impl TaylorPoly {
    pub fn new(coeffs: Vec<f64>, center: f64, scale: f64) -> Self {
        Self { coeffs, center, scale }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, (x - self.center) / self.scale)
    }

    /// `d/dx`, padded back to the same length.
    pub fn derivative(&self) -> TaylorPoly {
        let mut out = vec![0.0; self.coeffs.len()];
        xi_derivative(&self.coeffs, &mut out);
        for c in &mut out {
            *c /= self.scale;
        }
        TaylorPoly::new(out, self.center, self.scale)
    }

    fn check_compatible(&self, other: &TaylorPoly) -> Result<()> {
        if self.center != other.center || self.scale != other.scale {
            return Err(invalid(format!(
                "Taylor polynomials expanded about different points: ({}, {}) vs ({}, {})",
                self.center, self.scale, other.center, other.scale
            )));
        }
        if self.coeffs.len() != other.coeffs.len() {
            return Err(invalid("Taylor polynomials of different degree"));
        }
        Ok(())
    }
}

pub fn horner(coeffs: &[f64], xi: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * xi + c)
}

/// `out = T[a b]`: the product truncated to `out.len()` coefficients.
#[inline]
pub fn mul_truncated_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for j in 0..=k {
            if j < a.len() && k - j < b.len() {
                s += a[j] * b[k - j];
            }
        }
        *o = s;
    }
}

/// `out = d/dξ a`, zero-padded to `out.len()`.
#[inline]
pub fn xi_derivative(a: &[f64], out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        *o = if k + 1 < a.len() {
            (k + 1) as f64 * a[k + 1]
        } else {
            0.0
        };
    }
}

/// Truncated multiplication `T[p q]`, keeping the degree of the inputs.
pub fn truncated_mul(p: &TaylorPoly, q: &TaylorPoly) -> Result<TaylorPoly> {
    p.check_compatible(q)?;
    let mut out = vec![0.0; p.coeffs.len()];
    mul_truncated_into(&p.coeffs, &q.coeffs, &mut out);
    Ok(TaylorPoly::new(out, p.center, p.scale))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Degree-`2m+1` interpolation of two Taylor polynomials whose centers sit at
/// `∓h/2` of the target, expressed in the target's scaled coordinate.
#[derive(Debug, Clone)]
pub struct HermiteInterpolator {
    m: usize,
    /// Row-major `(2m+2) x (2m+2)` inverse of the confluent Vandermonde matrix.
    inverse: Vec<f64>,
}

impl HermiteInterpolator {
    pub fn new(m: usize) -> Self {
        let n = 2 * m + 2;
        // rows: k-th scaled derivative (divided by k!) at η = -1/2, then at η = +1/2
        let v = DMatrix::from_fn(n, n, |row, j| {
            let (k, at) = if row <= m { (row, -0.5) } else { (row - m - 1, 0.5) };
            if j < k {
                0.0
            } else {
                binomial(j, k) * f64::powi(at, (j - k) as i32)
            }
        });
        let inv = v.try_inverse().expect("confluent Vandermonde matrix is nonsingular");
        let mut inverse = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                inverse[r * n + c] = inv[(r, c)];
            }
        }
        Self { m, inverse }
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    /// Interpolant coefficients (length `2m+2`) about the midpoint.
    #[inline]
    pub fn interpolate_into(&self, left: &[f64], right: &[f64], out: &mut [f64]) {
        let n = 2 * self.m + 2;
        let np = self.m + 1;
        for (r, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.inverse[r * n..(r + 1) * n];
            let mut s = 0.0;
            for k in 0..np {
                s += row[k] * left[k] + row[np + k] * right[k];
            }
            *o = s;
        }
    }

    pub fn interpolate(&self, left: &[f64], right: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.m + 2];
        self.interpolate_into(left, right, &mut out);
        out
    }
}

/// Hermite interpolation of adjacent nodal Taylor polynomials to the midpoint.
/// The result keeps all `2m+2` coefficients; truncation happens after the
/// time update.
pub fn hermite_interpolate_center(left: &TaylorPoly, right: &TaylorPoly) -> Result<TaylorPoly> {
    if left.scale != right.scale || left.coeffs.len() != right.coeffs.len() {
        return Err(invalid("Hermite interpolation needs equal scale and degree"));
    }
    let gap = (right.center - left.center) / left.scale;
    if (gap - 1.0).abs() > 1e-9 {
        return Err(invalid(format!(
            "centers {} and {} are not adjacent at spacing {}",
            left.center, right.center, left.scale
        )));
    }
    let interp = HermiteInterpolator::new(left.degree());
    Ok(TaylorPoly::new(
        interp.interpolate(&left.coeffs, &right.coeffs),
        0.5 * (left.center + right.center),
        left.scale,
    ))
}

/// Taylor coefficients of a polynomial given by monomial coefficients in `x`,
/// re-expanded about `center` with scale `h`.
pub fn reexpand_monomial(mono: &[f64], center: f64, h: f64, len: usize) -> Vec<f64> {
    // p(center + h ξ) = Σ_j c_j (center + h ξ)^j
    let mut out = vec![0.0; len];
    for (j, &c) in mono.iter().enumerate() {
        for (k, o) in out.iter_mut().enumerate().take(j + 1) {
            *o += c * binomial(j, k) * center.powi((j - k) as i32) * h.powi(k as i32);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                full[i + j] += x * y;
            }
        }
        full
    }

    #[test]
    fn truncated_square_of_one_plus_xi() {
        let p = TaylorPoly::new(vec![1.0, 1.0], 0.0, 1.0);
        assert_eq!(truncated_mul(&p, &p).unwrap().coeffs, vec![1.0, 2.0]);
    }

    #[test]
    fn truncated_constants() {
        let p = TaylorPoly::new(vec![3.0], 0.5, 0.1);
        let q = TaylorPoly::new(vec![-2.0], 0.5, 0.1);
        assert_eq!(truncated_mul(&p, &q).unwrap().coeffs, vec![-6.0]);
    }

    #[test]
    fn truncated_mul_rejects_center_mismatch() {
        let p = TaylorPoly::new(vec![1.0, 1.0], 0.0, 1.0);
        let q = TaylorPoly::new(vec![1.0, 1.0], 0.5, 1.0);
        assert!(truncated_mul(&p, &q).is_err());
    }

    proptest! {
        #[test]
        fn truncated_mul_matches_convolution(a in prop::collection::vec(-2.0f64..2.0, 5),
                                             b in prop::collection::vec(-2.0f64..2.0, 5)) {
            let p = TaylorPoly::new(a.clone(), 0.0, 1.0);
            let q = TaylorPoly::new(b.clone(), 0.0, 1.0);
            let got = truncated_mul(&p, &q).unwrap();
            let full = convolution(&a, &b);
            for k in 0..5 {
                prop_assert!((got.coeffs[k] - full[k]).abs() < 1e-13);
            }
            // commutative
            for (x, y) in got.coeffs.iter().zip(&truncated_mul(&q, &p).unwrap().coeffs) {
                prop_assert!((x - y).abs() < 1e-13);
            }
        }

        #[test]
        fn truncated_mul_is_linear(a in prop::collection::vec(-2.0f64..2.0, 5),
                                   b in prop::collection::vec(-2.0f64..2.0, 5),
                                   c in prop::collection::vec(-2.0f64..2.0, 5),
                                   s in -3.0f64..3.0) {
            let sum: Vec<f64> = a.iter().zip(&c).map(|(x, y)| x + s * y).collect();
            let lhs = truncated_mul(&TaylorPoly::new(sum, 0.0, 1.0), &TaylorPoly::new(b.clone(), 0.0, 1.0)).unwrap();
            let pa = truncated_mul(&TaylorPoly::new(a, 0.0, 1.0), &TaylorPoly::new(b.clone(), 0.0, 1.0)).unwrap();
            let pc = truncated_mul(&TaylorPoly::new(c, 0.0, 1.0), &TaylorPoly::new(b, 0.0, 1.0)).unwrap();
            for k in 0..5 {
                prop_assert!((lhs.coeffs[k] - pa.coeffs[k] - s * pc.coeffs[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interpolation_reproduces_degree_2m_plus_1() {
        for m in 1..=5 {
            let h = 0.37;
            let (xl, xr) = (0.4, 0.4 + h);
            let mono: Vec<f64> = (0..2 * m + 2).map(|j| ((j * 7 + 3) % 5) as f64 - 2.0).collect();
            let left = TaylorPoly::new(reexpand_monomial(&mono, xl, h, m + 1), xl, h);
            let right = TaylorPoly::new(reexpand_monomial(&mono, xr, h, m + 1), xr, h);
            let mid = hermite_interpolate_center(&left, &right).unwrap();
            let want = reexpand_monomial(&mono, 0.5 * (xl + xr), h, 2 * m + 2);
            for (g, w) in mid.coeffs.iter().zip(&want) {
                assert_abs_diff_eq!(*g, *w, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn interpolation_of_constants() {
        let l = TaylorPoly::new(vec![2.5, 0.0, 0.0], 0.0, 0.1);
        let r = TaylorPoly::new(vec![2.5, 0.0, 0.0], 0.1, 0.1);
        let mid = hermite_interpolate_center(&l, &r).unwrap();
        assert_abs_diff_eq!(mid.coeffs[0], 2.5, epsilon = 1e-14);
        for c in &mid.coeffs[1..] {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(mid.center, 0.05);
    }

    #[test]
    fn interpolation_rejects_non_adjacent() {
        let l = TaylorPoly::new(vec![1.0, 0.0], 0.0, 0.1);
        let r = TaylorPoly::new(vec![1.0, 0.0], 0.3, 0.1);
        assert!(hermite_interpolate_center(&l, &r).is_err());
    }

    #[test]
    fn midpoint_value_error_is_order_2m_plus_2() {
        // sin(πx) sampled with exact Taylor data, m = 4
        let m = 4;
        let taylor = |xc: f64, h: f64| -> Vec<f64> {
            let mut fact = 1.0;
            (0..=m)
                .map(|k| {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    let d = std::f64::consts::PI.powi(k)
                        * (std::f64::consts::PI * xc + k as f64 * std::f64::consts::FRAC_PI_2).sin();
                    d * h.powi(k) / fact
                })
                .collect()
        };
        let err = |h: f64| {
            let x0 = 0.123;
            let l = TaylorPoly::new(taylor(x0, h), x0, h);
            let r = TaylorPoly::new(taylor(x0 + h, h), x0 + h, h);
            let mid = hermite_interpolate_center(&l, &r).unwrap();
            (mid.coeffs[0] - (std::f64::consts::PI * (x0 + 0.5 * h)).sin()).abs()
        };
        let rate = (err(0.4) / err(0.2)).log2();
        assert!(rate > 2.0 * m as f64 + 1.5, "rate {rate}");
    }
}
