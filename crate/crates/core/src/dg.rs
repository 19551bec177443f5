//! Modal discontinuous Galerkin scheme: Lax-Friedrichs advective flux,
//! mixed (auxiliary gradient) viscous term with alternating traces and
//! over-integrated nonlinear terms.

use crate::error::{check_finite, invalid, Result};
use crate::legendre::{legendre_values_and_derivatives, project_onto_legendre, QuadratureRule};
use crate::mesh::{BoundaryCondition, Dof, Grid, Method, SolutionState};
use crate::problem::{FluxEntropyPair, InitialData};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::time::{rk4_step, Scheme, RK4_REAL_AXIS_LIMIT, VISCOUS_SAFETY};
use crate::viscosity::{
    entropy_viscosity_field, nu_max, sensor_viscosity_field, smoothness_sensor, LglResidual, ViscosityField,
    ViscosityParams,
};

/// Precomputed element operators for degree `m`.
#[derive(Debug, Clone)]
pub struct DgBasis {
    m: usize,
    quad: QuadratureRule,
    /// `phi[q * (m+1) + k] = P_k(ξ_q)`.
    phi: Vec<f64>,
    /// `w_q P_k'(ξ_q)`, same layout.
    wdphi: Vec<f64>,
    /// `stiff[j * (m+1) + k] = ∫ P_j P_k' dξ`.
    stiff: Vec<f64>,
    residual: LglResidual,
}

impl DgBasis {
    /// Uses the Gauss rule with `⌈(3m+1)/2⌉` points.
    pub fn new(m: usize) -> Result<Self> {
        Self::with_quadrature(m, QuadratureRule::gauss_legendre((3 * m + 2) / 2)?)
    }

    pub fn with_quadrature(m: usize, quad: QuadratureRule) -> Result<Self> {
        if m < 1 {
            return Err(invalid("dG needs polynomial degree m >= 1"));
        }
        if quad.exactness < 3 * m {
            return Err(invalid(format!(
                "quadrature exact to degree {} cannot de-alias degree {m} (needs {})",
                quad.exactness,
                3 * m
            )));
        }
        let np = m + 1;
        let mut phi = vec![0.0; quad.len() * np];
        let mut wdphi = vec![0.0; quad.len() * np];
        for (q, (&x, &w)) in quad.points.iter().zip(&quad.weights).enumerate() {
            let (p, dp) = legendre_values_and_derivatives(m, x);
            for k in 0..np {
                phi[q * np + k] = p[k];
                wdphi[q * np + k] = w * dp[k];
            }
        }
        let mut stiff = vec![0.0; np * np];
        for j in 0..np {
            for k in 0..np {
                stiff[j * np + k] = (0..quad.len()).map(|q| phi[q * np + j] * wdphi[q * np + k]).sum();
            }
        }
        Ok(Self {
            m,
            quad,
            phi,
            wdphi,
            stiff,
            residual: LglResidual::new(m)?,
        })
    }

    pub fn degree(&self) -> usize {
        self.m
    }
}

#[inline]
fn trace_left(c: &[f64]) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
        .sum()
}

#[inline]
fn trace_right(c: &[f64]) -> f64 {
    c.iter().sum()
}

/// Advective part of `d û/dt`: weak form with the Lax-Friedrichs flux
/// `½(f(u⁻) + f(u⁺)) - (λ/2)(u⁺ - u⁻)`. Exterior Dirichlet traces equal the
/// boundary values.
pub fn dg_advective_rhs(
    modal: &[f64],
    basis: &DgBasis,
    h: f64,
    bc: &BoundaryCondition,
    lambda_lf: f64,
    out: &mut [f64],
) {
    let np = basis.m + 1;
    let n = modal.len() / np;
    let nq = basis.quad.len();
    let f = FluxEntropyPair::flux;
    let lf = |um: f64, up: f64| 0.5 * (f(um) + f(up)) - 0.5 * lambda_lf * (up - um);
    // interface fluxes at x_0..x_n
    let mut fstar = vec![0.0; n + 1];
    for (j, fs) in fstar.iter_mut().enumerate() {
        let (um, up) = interface_states(modal, np, n, j, bc);
        *fs = lf(um, up);
    }
    for e in 0..n {
        let c = &modal[e * np..(e + 1) * np];
        let o = &mut out[e * np..(e + 1) * np];
        o.fill(0.0);
        for q in 0..nq {
            let row = &basis.phi[q * np..(q + 1) * np];
            let u: f64 = row.iter().zip(c).map(|(p, c)| p * c).sum();
            let fu = f(u);
            let wd = &basis.wdphi[q * np..(q + 1) * np];
            for k in 0..np {
                o[k] += fu * wd[k];
            }
        }
        for (k, ok) in o.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *ok -= fstar[e + 1] - sign * fstar[e];
            *ok *= (2 * k + 1) as f64 / h;
        }
    }
}

/// `(u⁻, u⁺)` at node `j`.
fn interface_states(modal: &[f64], np: usize, n: usize, j: usize, bc: &BoundaryCondition) -> (f64, f64) {
    let elem = |e: usize| &modal[e * np..(e + 1) * np];
    match *bc {
        BoundaryCondition::Periodic => {
            let left = if j == 0 { n - 1 } else { j - 1 };
            let right = if j == n { 0 } else { j };
            (trace_right(elem(left)), trace_left(elem(right)))
        }
        BoundaryCondition::Dirichlet { left, right } => {
            let um = if j == 0 { left } else { trace_right(elem(j - 1)) };
            let up = if j == n { right } else { trace_left(elem(j)) };
            (um, up)
        }
    }
}

/// Viscous part of `d û/dt`, `(ν q)_x` with `q = u_x`.
///
/// `q` uses the trace from the left (`u⁻`), the viscous flux uses the trace
/// from the right (`(νq)⁺`). At a Dirichlet right end the viscous trace is the
/// interior value.
pub fn dg_viscous_rhs(modal: &[f64], basis: &DgBasis, h: f64, bc: &BoundaryCondition, nu: &[f64], out: &mut [f64]) {
    let np = basis.m + 1;
    let n = modal.len() / np;
    let periodic = bc.is_periodic();
    // û at nodes x_0..x_n
    let uhat: Vec<f64> = (0..=n).map(|j| interface_states(modal, np, n, j, bc).0).collect();
    // q coefficients per element
    let mut q = vec![0.0; modal.len()];
    for e in 0..n {
        let c = &modal[e * np..(e + 1) * np];
        let qe = &mut q[e * np..(e + 1) * np];
        for (k, qk) in qe.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let vol: f64 = (0..np).map(|j| c[j] * basis.stiff[j * np + k]).sum();
            *qk = (uhat[e + 1] - sign * uhat[e] - vol) * (2 * k + 1) as f64 / h;
        }
    }
    // σ = ν q, traces from the right
    let sigma_left = |e: usize| nu[e] * trace_left(&q[e * np..(e + 1) * np]);
    let shat: Vec<f64> = (0..=n)
        .map(|j| {
            if j < n {
                sigma_left(j)
            } else if periodic {
                sigma_left(0)
            } else {
                nu[n - 1] * trace_right(&q[(n - 1) * np..n * np])
            }
        })
        .collect();
    for e in 0..n {
        let qe = &q[e * np..(e + 1) * np];
        let o = &mut out[e * np..(e + 1) * np];
        for (k, ok) in o.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let vol = nu[e] * (0..np).map(|j| qe[j] * basis.stiff[j * np + k]).sum::<f64>();
            *ok = (shat[e + 1] - sign * shat[e] - vol) * (2 * k + 1) as f64 / h;
        }
    }
}

/// Spectral radius of the viscous operator for `ν = 1`, `h = 1`, estimated by
/// power iteration on a periodic mesh. Cached per degree.
pub fn viscous_spectral_radius(m: usize) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&r) = cache.lock().expect("cache lock").get(&m) {
        return Ok(r);
    }
    let basis = DgBasis::new(m)?;
    let n = 16;
    let np = m + 1;
    let nu = vec![1.0; n];
    // deterministic start with energy in every mode
    let mut v: Vec<f64> = (0..n * np).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
    let mut out = vec![0.0; v.len()];
    let mut rho = 0.0;
    for _ in 0..2000 {
        dg_viscous_rhs(&v, &basis, 1.0, &BoundaryCondition::Periodic, &nu, &mut out);
        let norm_out = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        let norm_in = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        rho = norm_out / norm_in;
        for (a, b) in v.iter_mut().zip(&out) {
            *a = b / norm_out;
        }
    }
    cache.lock().expect("cache lock").insert(m, rho);
    Ok(rho)
}

#[derive(Debug, Clone)]
pub struct DgScheme {
    grid: Grid,
    bc: BoundaryCondition,
    basis: DgBasis,
    modal: Vec<f64>,
    params: ViscosityParams,
    prev_entropy: Option<Vec<f64>>,
    prev_dt: f64,
    time: f64,
    last_field: ViscosityField,
}

impl DgScheme {
    /// L2 projection of `initial` onto degree `m` on every element.
    pub fn new(
        grid: Grid,
        bc: BoundaryCondition,
        initial: &InitialData,
        m: usize,
        params: ViscosityParams,
    ) -> Result<Self> {
        let breaks = initial.breakpoints();
        let nodes = grid.nodes().to_vec();
        let modal: Vec<f64> = nodes
            .windows(2)
            .flat_map(|w| project_onto_legendre(|x| initial.value(x), w[0], w[1], m, &breaks))
            .collect();
        Self::from_modal(grid, bc, m, modal, params)
    }

    pub fn from_modal(
        grid: Grid,
        bc: BoundaryCondition,
        m: usize,
        modal: Vec<f64>,
        params: ViscosityParams,
    ) -> Result<Self> {
        let basis = DgBasis::new(m)?;
        if modal.len() != grid.n() * (m + 1) {
            return Err(invalid(format!(
                "dG state needs {} coefficients, got {}",
                grid.n() * (m + 1),
                modal.len()
            )));
        }
        check_finite(&modal, "initial dG state")?;
        let n = grid.n();
        Ok(Self {
            grid,
            bc,
            basis,
            modal,
            params,
            prev_entropy: None,
            prev_dt: 0.0,
            time: 0.0,
            last_field: ViscosityField::zeros(n),
        })
    }

    pub fn modal(&self) -> &[f64] {
        &self.modal
    }

    pub fn basis(&self) -> &DgBasis {
        &self.basis
    }

    /// `Σ_e û_0 h`.
    pub fn mass(&self) -> f64 {
        let np = self.basis.m + 1;
        self.modal.iter().step_by(np).sum::<f64>() * self.grid.h()
    }

    /// Element energy `Σ ∫ u² dx`.
    pub fn energy(&self) -> f64 {
        let np = self.basis.m + 1;
        let h = self.grid.h();
        self.modal
            .chunks(np)
            .map(|c| {
                c.iter()
                    .enumerate()
                    .map(|(k, v)| v * v * 2.0 / (2 * k + 1) as f64)
                    .sum::<f64>()
                    * 0.5
                    * h
            })
            .sum()
    }

    pub fn last_viscosity(&self) -> &ViscosityField {
        &self.last_field
    }

    fn nodal_entropy(&self) -> Vec<f64> {
        let np = self.basis.m + 1;
        let mut out = vec![0.0; self.modal.len()];
        for (c, o) in self.modal.chunks(np).zip(out.chunks_mut(np)) {
            self.basis.residual.nodal_entropy(c, o);
        }
        out
    }

    /// Entropy viscosity for the first step, from the residual of an inviscid
    /// trial step of size `dt`; `ν_max` everywhere if the trial fails.
    fn startup_field(&self, dt: f64) -> ViscosityField {
        let mut trial = self.clone();
        trial.params = ViscosityParams::None;
        trial
            .step(dt)
            .and_then(|_| {
                trial.params = self.params;
                trial.viscosity_field()
            })
            .unwrap_or_else(|_| {
                ViscosityField::uniform_max(self.params.bound(self.grid.h(), self.max_abs()), self.grid.n())
            })
    }

    pub fn viscosity_field(&self) -> Result<ViscosityField> {
        let h = self.grid.h();
        let n = self.grid.n();
        let np = self.basis.m + 1;
        Ok(match self.params {
            ViscosityParams::None => ViscosityField::zeros(n),
            ViscosityParams::LaxFriedrichs { alpha_max } => {
                ViscosityField::uniform_max(nu_max(h, self.max_abs(), alpha_max), n)
            }
            ViscosityParams::EntropyViscosity(p) => {
                let residual: Option<Vec<f64>> = self.prev_entropy.as_ref().map(|prev| {
                    (0..n)
                        .map(|e| {
                            self.basis.residual.residual(
                                &self.modal[e * np..(e + 1) * np],
                                &prev[e * np..(e + 1) * np],
                                self.prev_dt,
                                h,
                            )
                        })
                        .collect()
                });
                entropy_viscosity_field(&p, h, self.max_abs(), residual.as_deref(), n)
            }
            ViscosityParams::SmoothnessSensor(p) => {
                let s: Vec<f64> = self.modal.chunks(np).map(smoothness_sensor).collect();
                sensor_viscosity_field(&p, h, &s)
            }
        })
    }

    /// Full semi-discrete right-hand side for a frozen viscosity.
    pub fn rhs(&self, modal: &[f64], nu: &[f64], lambda_lf: f64, out: &mut [f64]) {
        let h = self.grid.h();
        dg_advective_rhs(modal, &self.basis, h, &self.bc, lambda_lf, out);
        if nu.iter().any(|&v| v != 0.0) {
            let mut visc = vec![0.0; out.len()];
            dg_viscous_rhs(modal, &self.basis, h, &self.bc, nu, &mut visc);
            for (o, v) in out.iter_mut().zip(&visc) {
                *o += v;
            }
        }
    }

    fn lambda_lf(&self) -> f64 {
        let mut m = self.max_abs();
        if let BoundaryCondition::Dirichlet { left, right } = self.bc {
            m = m.max(left.abs()).max(right.abs());
        }
        m
    }
}

impl Scheme for DgScheme {
    fn method(&self) -> Method {
        Method::Dg
    }

    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn time(&self) -> f64 {
        self.time
    }

    /// Max of |u| over the LGL nodes of every element.
    fn max_abs(&self) -> f64 {
        let np = self.basis.m + 1;
        let mut vals = vec![0.0; np];
        self.modal.chunks(np).fold(0.0, |m, c| {
            self.basis.residual.nodal_values(c, &mut vals);
            vals.iter().fold(m, |m, v| m.max(v.abs()))
        })
    }

    fn step(&mut self, dt: f64) -> Result<usize> {
        let field = if self.prev_entropy.is_none() && self.params.is_entropy_viscosity() {
            self.startup_field(dt)
        } else {
            self.viscosity_field()?
        };
        self.prev_entropy = Some(self.nodal_entropy());
        self.prev_dt = dt;
        let lambda = self.lambda_lf();
        let mut modal = std::mem::take(&mut self.modal);
        let res = rk4_step(|u, out| self.rhs(u, &field.nu, lambda, out), &mut modal, dt);
        self.modal = modal;
        res?;
        self.time += dt;
        let nm = field.count_selected(0..self.grid.n());
        self.last_field = field;
        Ok(nm)
    }

    fn stable_dt(&self) -> f64 {
        let h = self.grid.h();
        let nu = self.params.bound(h, self.lambda_lf());
        match viscous_spectral_radius(self.basis.m) {
            Ok(rho) if nu > 0.0 => VISCOUS_SAFETY * RK4_REAL_AXIS_LIMIT * h * h / (rho * nu),
            _ => f64::INFINITY,
        }
    }

    fn state(&self) -> SolutionState {
        SolutionState {
            dof: Dof::Dg {
                degree: self.basis.m,
                modal: self.modal.clone(),
            },
            time: self.time,
            prev_entropy: self.prev_entropy.clone(),
        }
    }
}
