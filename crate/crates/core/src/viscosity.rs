//! Entropy residuals, the two candidate viscosities and their min-selection,
//! and the modal smoothness sensor.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::legendre::{legendre_norm_sq, legendre_values, lgl_nodes, LglNodes, QuadratureRule};
use crate::problem::FluxEntropyPair;
use crate::taylor::{mul_truncated_into, HermiteInterpolator};

/// Entropy viscosity constants `ν = min(α_max h max|u|, α_EV h^β |r|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyViscosityParams {
    pub alpha_ev: f64,
    pub alpha_max: f64,
    pub beta: u8,
}

impl EntropyViscosityParams {
    pub fn new(alpha_ev: f64, alpha_max: f64, beta: u8) -> Result<Self> {
        if !(alpha_ev >= 0.0 && alpha_ev.is_finite()) {
            return Err(invalid(format!("alpha_ev must be >= 0, got {alpha_ev}")));
        }
        if !(alpha_max > 0.0 && alpha_max.is_finite()) {
            return Err(invalid(format!("alpha_max must be > 0, got {alpha_max}")));
        }
        if beta != 1 && beta != 2 {
            return Err(invalid(format!("beta must be 1 or 2, got {beta}")));
        }
        Ok(Self {
            alpha_ev,
            alpha_max,
            beta,
        })
    }
}

/// Smoothness-sensor ramp: threshold `s0`, half-width `kappa`, amplitude `eps0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    pub s0: f64,
    pub kappa: f64,
    pub eps0: f64,
}

impl SensorParams {
    pub fn new(s0: f64, kappa: f64, eps0: f64) -> Result<Self> {
        if !s0.is_finite() {
            return Err(invalid("sensor threshold s0 must be finite"));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(invalid(format!("sensor kappa must be > 0, got {kappa}")));
        }
        if !(eps0 >= 0.0 && eps0.is_finite()) {
            return Err(invalid(format!("sensor eps0 must be >= 0, got {eps0}")));
        }
        Ok(Self { s0, kappa, eps0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ViscosityParams {
    None,
    EntropyViscosity(EntropyViscosityParams),
    SmoothnessSensor(SensorParams),
    /// `ν = α_max h max|u|` everywhere.
    LaxFriedrichs {
        alpha_max: f64,
    },
}

impl ViscosityParams {
    pub fn is_entropy_viscosity(&self) -> bool {
        matches!(self, ViscosityParams::EntropyViscosity(_))
    }

    /// Largest viscosity the mode can produce on a grid of spacing `h` when
    /// `max|u|` stays at `max_abs_u`.
    pub fn bound(&self, h: f64, max_abs_u: f64) -> f64 {
        match *self {
            ViscosityParams::None => 0.0,
            ViscosityParams::EntropyViscosity(p) => nu_max(h, max_abs_u, p.alpha_max),
            ViscosityParams::LaxFriedrichs { alpha_max } => nu_max(h, max_abs_u, alpha_max),
            ViscosityParams::SmoothnessSensor(p) => p.eps0 * h,
        }
    }
}

/// Per-location viscosity, frozen over a step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ViscosityField {
    pub nu: Vec<f64>,
    /// True where `ν_max` won the min-selection.
    pub selected_max: Vec<bool>,
}

impl ViscosityField {
    pub fn zeros(len: usize) -> Self {
        Self {
            nu: vec![0.0; len],
            selected_max: vec![false; len],
        }
    }

    pub fn uniform_max(nu_max: f64, len: usize) -> Self {
        Self {
            nu: vec![nu_max; len],
            selected_max: vec![true; len],
        }
    }

    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    pub fn count_selected(&self, range: std::ops::Range<usize>) -> usize {
        self.selected_max[range].iter().filter(|&&s| s).count()
    }
}

pub fn nu_max(h: f64, global_max_abs_u: f64, alpha_max: f64) -> f64 {
    alpha_max * h * global_max_abs_u
}

pub fn nu_ev(h: f64, beta: u8, alpha_ev: f64, abs_residual: f64) -> f64 {
    alpha_ev * h.powi(beta as i32) * abs_residual
}

/// `min(ν_EV, ν_max)`; ties count as `ν_max` selected.
pub fn select_viscosity(nu_ev: f64, nu_max_val: f64) -> (f64, bool) {
    if nu_max_val <= nu_ev {
        (nu_max_val, true)
    } else {
        (nu_ev, false)
    }
}

/// Builds the entropy-viscosity field from signed residuals. Without a
/// residual (first step) every location takes `ν_max`.
pub fn entropy_viscosity_field(
    params: &EntropyViscosityParams,
    h: f64,
    max_abs_u: f64,
    residuals: Option<&[f64]>,
    len: usize,
) -> ViscosityField {
    let cap = nu_max(h, max_abs_u, params.alpha_max);
    match residuals {
        None => ViscosityField::uniform_max(cap, len),
        Some(r) => {
            let (nu, selected_max) = r
                .iter()
                .map(|r| select_viscosity(nu_ev(h, params.beta, params.alpha_ev, r.abs()), cap))
                .unzip();
            ViscosityField { nu, selected_max }
        }
    }
}

/// `log10` of the top-mode share of the element's L2 energy, using
/// `‖P_k‖² = 2/(2k+1)`. A zero element returns `-∞`.
pub fn smoothness_sensor(modal: &[f64]) -> f64 {
    let total: f64 = modal.iter().enumerate().map(|(k, c)| c * c * legendre_norm_sq(k)).sum();
    if total <= 0.0 || modal.is_empty() {
        return f64::NEG_INFINITY;
    }
    let m = modal.len() - 1;
    let top = modal[m] * modal[m] * legendre_norm_sq(m);
    (top / total).log10()
}

pub fn sensor_viscosity(s: f64, params: &SensorParams, h: f64) -> f64 {
    let SensorParams { s0, kappa, eps0 } = *params;
    if s < s0 - kappa {
        0.0
    } else if s > s0 + kappa {
        eps0 * h
    } else {
        0.5 * eps0 * h * (1.0 + (PI * (s - s0) / (2.0 * kappa)).sin())
    }
}

pub fn sensor_viscosity_field(params: &SensorParams, h: f64, sensors: &[f64]) -> ViscosityField {
    ViscosityField {
        nu: sensors.iter().map(|&s| sensor_viscosity(s, params, h)).collect(),
        selected_max: vec![false; sensors.len()],
    }
}

/// `(E(u_i) - E_prev_i)/dt + (F_{i+1/2} - F_{i-1/2})/h` with
/// `F_{i+1/2} = ((u_i + u_{i+1})/2)³/3`. Non-periodic end values copy
/// their interior neighbours.
pub fn entropy_residual_fv(u: &[f64], prev_entropy: &[f64], dt: f64, h: f64, periodic: bool) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(invalid(format!("backward difference needs dt > 0, got {dt}")));
    }
    if u.len() != prev_entropy.len() || u.len() < 3 {
        return Err(invalid("entropy residual: state and history lengths differ"));
    }
    let n = u.len();
    let face = |a: f64, b: f64| FluxEntropyPair::entropy_flux(0.5 * (a + b));
    let mut r = vec![0.0; n];
    let at = |i: usize, left: usize, right: usize| {
        (FluxEntropyPair::entropy(u[i]) - prev_entropy[i]) / dt + (face(u[i], u[right]) - face(u[left], u[i])) / h
    };
    if periodic {
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = at(i, (i + n - 1) % n, (i + 1) % n);
        }
    } else {
        for i in 1..n - 1 {
            r[i] = at(i, i - 1, i + 1);
        }
        r[0] = r[1];
        r[n - 1] = r[n - 2];
    }
    Ok(r)
}

/// Modal-to-LGL evaluation and differentiation for the dG residual.
#[derive(Debug, Clone)]
pub struct LglResidual {
    m: usize,
    lgl: LglNodes,
    /// `vand[i * (m+1) + k] = P_k(ξ_i)`.
    vand: Vec<f64>,
}

impl LglResidual {
    pub fn new(m: usize) -> Result<Self> {
        let lgl = lgl_nodes(m)?;
        let np = m + 1;
        let mut vand = vec![0.0; np * np];
        for (i, &x) in lgl.nodes.iter().enumerate() {
            vand[i * np..(i + 1) * np].copy_from_slice(&legendre_values(m, x));
        }
        Ok(Self { m, lgl, vand })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.lgl.nodes
    }

    /// Values of the element expansion at the LGL nodes.
    pub fn nodal_values(&self, modal: &[f64], out: &mut [f64]) {
        let np = self.m + 1;
        for (i, o) in out.iter_mut().enumerate().take(np) {
            *o = (0..np).map(|k| self.vand[i * np + k] * modal[k]).sum();
        }
    }

    /// `E` at the LGL nodes.
    pub fn nodal_entropy(&self, modal: &[f64], out: &mut [f64]) {
        self.nodal_values(modal, out);
        for v in out.iter_mut() {
            *v = FluxEntropyPair::entropy(*v);
        }
    }

    /// `max_i |(E_i - E_prev_i)/dt + (2/h) (D F)_i|` over the LGL nodes.
    pub fn residual(&self, modal: &[f64], prev_entropy: &[f64], dt: f64, h: f64) -> f64 {
        let np = self.m + 1;
        let mut u = vec![0.0; np];
        self.nodal_values(modal, &mut u);
        let flux: Vec<f64> = u.iter().map(|&v| FluxEntropyPair::entropy_flux(v)).collect();
        let mut worst = 0.0f64;
        for i in 0..np {
            let dfdxi: f64 = (0..np).map(|j| self.lgl.diff[i * np + j] * flux[j]).sum();
            let r = (FluxEntropyPair::entropy(u[i]) - prev_entropy[i]) / dt + 2.0 / h * dfdxi;
            worst = worst.max(r.abs());
        }
        worst
    }
}

/// Element residual of a degree-`m` Legendre expansion (see [`LglResidual`]).
pub fn entropy_residual_dg(modal: &[f64], prev_entropy: &[f64], dt: f64, h: f64) -> Result<f64> {
    if modal.len() < 2 || prev_entropy.len() != modal.len() {
        return Err(invalid("dG residual needs m >= 1 and m+1 LGL entropy values"));
    }
    if !(dt > 0.0) {
        return Err(invalid(format!("backward difference needs dt > 0, got {dt}")));
    }
    Ok(LglResidual::new(modal.len() - 1)?.residual(modal, prev_entropy, dt, h))
}

/// Signed nodal residual `(E(u(0)) - prev)/dt + (1/3)(d/dξ T[u T[u²]])(0)/h`
/// for scaled Taylor coefficients `poly`.
pub fn entropy_residual_hermite(poly: &[f64], prev_entropy: f64, dt: f64, h: f64) -> f64 {
    let n = poly.len();
    let mut sq = vec![0.0; n];
    let mut cube = vec![0.0; n];
    mul_truncated_into(poly, poly, &mut sq);
    mul_truncated_into(poly, &sq, &mut cube);
    let flux_x = if n > 1 { cube[1] / (3.0 * h) } else { 0.0 };
    (FluxEntropyPair::entropy(poly[0]) - prev_entropy) / dt + flux_x
}

/// Maps two adjacent nodal Taylor polynomials to the Legendre coefficients of
/// their Hermite interpolant on the element between them.
#[derive(Debug, Clone)]
pub struct HermiteSensorProjection {
    m: usize,
    /// Row-major `(2m+2) x (2m+2)` map from `[left; right]` to modal coefficients.
    matrix: Vec<f64>,
}

impl HermiteSensorProjection {
    pub fn new(m: usize) -> Result<Self> {
        let n = 2 * m + 2;
        let interp = HermiteInterpolator::new(m);
        let rule = QuadratureRule::gauss_legendre(n + 1)?;
        // proj[k][j] = (2k+1)/2 ∫ (ζ/2)^j P_k(ζ) dζ
        let mut proj = vec![0.0; n * n];
        for k in 0..n {
            for j in 0..n {
                proj[k * n + j] = rule.integrate(-1.0, 1.0, |z| (0.5 * z).powi(j as i32) * legendre_values(k, z)[k])
                    / legendre_norm_sq(k);
            }
        }
        let mut matrix = vec![0.0; n * n];
        let np = m + 1;
        for col in 0..n {
            let mut left = vec![0.0; np];
            let mut right = vec![0.0; np];
            if col < np {
                left[col] = 1.0;
            } else {
                right[col - np] = 1.0;
            }
            let c = interp.interpolate(&left, &right);
            for k in 0..n {
                matrix[k * n + col] = (0..n).map(|j| proj[k * n + j] * c[j]).sum();
            }
        }
        Ok(Self { m, matrix })
    }

    pub fn modal(&self, left: &[f64], right: &[f64]) -> Vec<f64> {
        let n = 2 * self.m + 2;
        let np = self.m + 1;
        (0..n)
            .map(|k| {
                let row = &self.matrix[k * n..(k + 1) * n];
                (0..np).map(|j| row[j] * left[j] + row[np + j] * right[j]).sum()
            })
            .collect()
    }
}

/// Legendre coefficients (degree `2m+1`, reference element) of the Hermite
/// interpolant of two adjacent Taylor polynomials.
pub fn hermite_sensor_projection(left: &[f64], right: &[f64]) -> Result<Vec<f64>> {
    if left.len() != right.len() || left.is_empty() {
        return Err(invalid("sensor projection needs two polynomials of equal degree"));
    }
    Ok(HermiteSensorProjection::new(left.len() - 1)?.modal(left, right))
}
