//! Conservative Hermite method on a primal (node) and dual (cell-center)
//! grid. Each half-step computes RK4 stage fluxes at the source points,
//! Hermite-interpolates the state and the combined flux to the target points
//! and truncates back to degree `m`. The scheme stores the untruncated
//! interpolant at each point for the next stage evaluation; without it the
//! stage derivatives lose their top coefficient and the method drops to
//! roughly order `m`.

use crate::error::{check_finite, invalid, Error, Result};
use crate::mesh::{BoundaryCondition, Dof, Grid, Method, SolutionState};
use crate::problem::InitialData;
use crate::taylor::{mul_truncated_into, xi_derivative, HermiteInterpolator, TaylorPoly};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::time::{Scheme, VISCOUS_SAFETY};
use crate::viscosity::{
    entropy_residual_hermite, entropy_viscosity_field, nu_max, sensor_viscosity, smoothness_sensor,
    HermiteSensorProjection, ViscosityField, ViscosityParams,
};

/// Largest admissible `max|u| dt_half / h`.
pub const HALF_STEP_CFL_LIMIT: f64 = 0.3;

/// `½ T[u²] - ν du/dx` with `du/dx = (1/h) du/dξ`.
pub fn stage_slope(u: &TaylorPoly, nu: f64) -> TaylorPoly {
    let mut out = vec![0.0; u.coeffs.len()];
    let mut scratch = vec![0.0; u.coeffs.len()];
    slope_into(&u.coeffs, nu, u.scale, &mut scratch, &mut out);
    TaylorPoly::new(out, u.center, u.scale)
}

#[inline]
fn slope_into(u: &[f64], nu: f64, h: f64, scratch: &mut [f64], out: &mut [f64]) {
    mul_truncated_into(u, u, out);
    xi_derivative(u, scratch);
    let c = nu / h;
    for (o, d) in out.iter_mut().zip(scratch.iter()) {
        *o = 0.5 * *o - c * d;
    }
}

/// Operators shared by all half-steps of one degree.
#[derive(Debug, Clone)]
pub struct HermiteOps {
    m: usize,
    /// Coefficients stored per point: `m+1`, or `2m+2` to keep the whole
    /// interpolant for the stage evaluation.
    stored: usize,
    interp: HermiteInterpolator,
}

impl HermiteOps {
    /// Every half-step ends by truncating the target polynomials to degree `m`.
    pub fn new(m: usize) -> Result<Self> {
        if m < 1 {
            return Err(invalid("Hermite method needs degree m >= 1"));
        }
        Ok(Self {
            m,
            stored: m + 1,
            interp: HermiteInterpolator::new(m),
        })
    }

    /// Targets keep all `2m+2` coefficients of the updated interpolant and the
    /// stage fluxes are evaluated on them; only the first `m+1` coefficients
    /// of the state and of the combined flux enter the Hermite interpolation.
    pub fn keeping_interpolant(m: usize) -> Result<Self> {
        Ok(Self {
            stored: 2 * m + 2,
            ..Self::new(m)?
        })
    }

    pub fn stored(&self) -> usize {
        self.stored
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    /// Time-integrated flux `f1 + 2 f2 + 2 f3 + f4` of the four RK4 stages
    /// at one source point.
    pub fn combined_flux(&self, p: &[f64], nu: f64, dt_half: f64, h: f64, out: &mut [f64]) {
        let np = p.len();
        let mut f = vec![0.0; np];
        let mut df = vec![0.0; np];
        let mut stage = vec![0.0; np];
        let mut scratch = vec![0.0; np];
        slope_into(p, nu, h, &mut scratch, &mut f);
        out.copy_from_slice(&f);
        for (c, w) in [(0.5, 2.0), (0.5, 2.0), (1.0, 1.0)] {
            xi_derivative(&f, &mut df);
            let a = c * dt_half / h;
            for k in 0..np {
                stage[k] = p[k] - a * df[k];
            }
            slope_into(&stage, nu, h, &mut scratch, &mut f);
            for k in 0..np {
                out[k] += w * f[k];
            }
        }
    }

    /// One half-step from `src` (`stored()` Taylor coefficients per point) to
    /// the targets; target `j` sits midway between source points
    /// `targets[j].0` and `targets[j].1` and writes `dst[j]`.
    pub fn half_step(
        &self,
        src: &[f64],
        nu: &[f64],
        dt_half: f64,
        h: f64,
        targets: &[(usize, usize)],
        dst: &mut [f64],
    ) -> Result<()> {
        let np = self.m + 1;
        let ns = self.stored;
        let count = src.len() / ns;
        if nu.len() != count || dst.len() != targets.len() * ns {
            return Err(invalid("Hermite half-step buffers do not match"));
        }
        let max_u = src.iter().step_by(ns).fold(0.0f64, |m, v| m.max(v.abs()));
        let courant = max_u * dt_half / h;
        if courant > HALF_STEP_CFL_LIMIT * (1.0 + 1e-12) {
            return Err(Error::UnstableStep {
                courant,
                limit: HALF_STEP_CFL_LIMIT,
            });
        }
        let mut flux = vec![0.0; src.len()];
        for i in 0..count {
            self.combined_flux(
                &src[i * ns..(i + 1) * ns],
                nu[i],
                dt_half,
                h,
                &mut flux[i * ns..(i + 1) * ns],
            );
        }
        let len = 2 * np;
        let mut cu = vec![0.0; len];
        let mut cf = vec![0.0; len];
        let mut dcf = vec![0.0; len];
        let w = dt_half / (6.0 * h);
        for (j, &(l, r)) in targets.iter().enumerate() {
            self.interp
                .interpolate_into(&src[l * ns..l * ns + np], &src[r * ns..r * ns + np], &mut cu);
            self.interp
                .interpolate_into(&flux[l * ns..l * ns + np], &flux[r * ns..r * ns + np], &mut cf);
            xi_derivative(&cf, &mut dcf);
            for k in 0..ns {
                dst[j * ns + k] = cu[k] - w * dcf[k];
            }
        }
        check_finite(dst, "Hermite half-step")
    }
}

/// Free-function form of [`HermiteOps::half_step`] for periodic degree-`m`
/// node data: returns the `count` cell-center states, truncated to degree `m`.
pub fn hermite_half_step(primal: &[TaylorPoly], nu: &[f64], dt_half: f64) -> Result<Vec<TaylorPoly>> {
    let first = primal.first().ok_or_else(|| invalid("no Hermite nodes"))?;
    let (m, h) = (first.degree(), first.scale);
    let ops = HermiteOps::new(m)?;
    let count = primal.len();
    let src: Vec<f64> = primal.iter().flat_map(|p| p.coeffs.iter().copied()).collect();
    let targets: Vec<(usize, usize)> = (0..count).map(|i| (i, (i + 1) % count)).collect();
    let mut dst = vec![0.0; src.len()];
    ops.half_step(&src, nu, dt_half, h, &targets, &mut dst)?;
    Ok(dst
        .chunks(m + 1)
        .zip(primal)
        .map(|(c, p)| TaylorPoly::new(c.to_vec(), p.center + 0.5 * h, h))
        .collect())
}

/// Largest `dt_half ν / h²` for which repeated full steps of the linear
/// viscous problem do not grow, found by bisection. Cached per degree.
pub fn viscous_stability_ratio(m: usize) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&r) = cache.lock().expect("cache lock").get(&m) {
        return Ok(r);
    }
    let ops = HermiteOps::new(m)?;
    let n = 16;
    let np = m + 1;
    let nu = vec![1.0; n];
    let to_dual: Vec<(usize, usize)> = (0..n).map(|e| (e, (e + 1) % n)).collect();
    let to_primal: Vec<(usize, usize)> = (0..n).map(|i| ((i + n - 1) % n, i)).collect();
    // amplitude small enough that ½u² is negligible against the viscous flux
    const AMP: f64 = 1e-8;
    let grows = |r: f64| -> bool {
        let mut v: Vec<f64> = (0..n * np).map(|i| AMP * (((i * 7919) % 13) as f64 - 6.0)).collect();
        let mut d = vec![0.0; v.len()];
        let mut log_growth = 0.0;
        for step in 0..300 {
            let before = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if ops.half_step(&v, &nu, r, 1.0, &to_dual, &mut d).is_err()
                || ops.half_step(&d, &nu, r, 1.0, &to_primal, &mut v).is_err()
            {
                return true;
            }
            let after = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if step >= 200 {
                log_growth += (after / before).ln();
            }
            for x in v.iter_mut() {
                *x *= AMP / after;
            }
        }
        log_growth > 1e-9
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if !grows(hi) {
        lo = hi;
    }
    for _ in 0..30 {
        if hi - lo < 1e-4 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if grows(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    cache.lock().expect("cache lock").insert(m, lo);
    Ok(lo)
}

fn truncate_each(data: &[f64], stride: usize, keep: usize) -> Vec<f64> {
    data.chunks(stride).flat_map(|c| c[..keep].iter().copied()).collect()
}

#[derive(Debug, Clone)]
pub struct HermiteScheme {
    grid: Grid,
    bc: BoundaryCondition,
    ops: HermiteOps,
    sensor: Option<HermiteSensorProjection>,
    primal: Vec<f64>,
    dual: Vec<f64>,
    params: ViscosityParams,
    prev_entropy_primal: Option<Vec<f64>>,
    prev_entropy_dual: Option<Vec<f64>>,
    prev_dt: f64,
    time: f64,
    last_field: ViscosityField,
    to_dual: Vec<(usize, usize)>,
    to_primal: Vec<(usize, usize)>,
}

impl HermiteScheme {
    /// Nodal Taylor data of `initial`. Nodes in smooth regions store all
    /// `2m+2` coefficients; nodes within `h/2` of a breakpoint store the
    /// degree-`m` projection padded with zeros.
    pub fn new(
        grid: Grid,
        bc: BoundaryCondition,
        initial: &InitialData,
        m: usize,
        params: ViscosityParams,
    ) -> Result<Self> {
        let h = grid.h();
        let count = bc.node_count(&grid);
        let breaks = initial.breakpoints();
        let primal: Vec<f64> = grid.nodes()[..count]
            .iter()
            .flat_map(|&x| {
                if breaks.iter().any(|b| (b - x).abs() < 0.5 * h) {
                    let mut c = initial.taylor_coefficients(x, h, m);
                    c.resize(2 * m + 2, 0.0);
                    c
                } else {
                    initial.taylor_coefficients(x, h, 2 * m + 1)
                }
            })
            .collect();
        Self::with_storage(grid, bc, m, primal, params)
    }

    /// Starts from degree-`m` nodal data (`m+1` coefficients per node).
    pub fn from_taylor(
        grid: Grid,
        bc: BoundaryCondition,
        m: usize,
        primal: Vec<f64>,
        params: ViscosityParams,
    ) -> Result<Self> {
        let np = m + 1;
        let count = bc.node_count(&grid);
        if primal.len() != count * np {
            return Err(invalid(format!(
                "Hermite state needs {} coefficients, got {}",
                count * np,
                primal.len()
            )));
        }
        let padded: Vec<f64> = primal
            .chunks(np)
            .flat_map(|c| c.iter().copied().chain(std::iter::repeat_n(0.0, np)))
            .collect();
        Self::with_storage(grid, bc, m, padded, params)
    }

    fn with_storage(
        grid: Grid,
        bc: BoundaryCondition,
        m: usize,
        mut primal: Vec<f64>,
        params: ViscosityParams,
    ) -> Result<Self> {
        let ops = HermiteOps::keeping_interpolant(m)?;
        let ns = ops.stored;
        let count = bc.node_count(&grid);
        check_finite(&primal, "initial Hermite state")?;
        if let BoundaryCondition::Dirichlet { left, right } = bc {
            primal[..ns].fill(0.0);
            primal[0] = left;
            primal[(count - 1) * ns..].fill(0.0);
            primal[(count - 1) * ns] = right;
        }
        let n = grid.n();
        let to_dual: Vec<(usize, usize)> = (0..n).map(|e| (e, (e + 1) % count)).collect();
        let to_primal: Vec<(usize, usize)> = if bc.is_periodic() {
            (0..n).map(|i| ((i + n - 1) % n, i)).collect()
        } else {
            (1..n).map(|i| (i - 1, i)).collect()
        };
        let sensor = match params {
            ViscosityParams::SmoothnessSensor(_) => Some(HermiteSensorProjection::new(m)?),
            _ => None,
        };
        Ok(Self {
            grid,
            bc,
            ops,
            sensor,
            primal,
            dual: vec![0.0; n * ns],
            params,
            prev_entropy_primal: None,
            prev_entropy_dual: None,
            prev_dt: 0.0,
            time: 0.0,
            last_field: ViscosityField::zeros(count),
            to_dual,
            to_primal,
        })
    }

    /// Degree-`m` nodal data, `m+1` coefficients per node.
    pub fn primal(&self) -> Vec<f64> {
        truncate_each(&self.primal, self.ops.stored, self.ops.m + 1)
    }

    /// Degree-`m` cell-center data from the last half-step.
    pub fn dual(&self) -> Vec<f64> {
        truncate_each(&self.dual, self.ops.stored, self.ops.m + 1)
    }

    pub fn degree(&self) -> usize {
        self.ops.m
    }

    pub fn last_viscosity(&self) -> &ViscosityField {
        &self.last_field
    }

    /// `∫ u dx` of the primal Hermite interpolant.
    pub fn mass(&self) -> f64 {
        let np = self.ops.m + 1;
        let ns = self.ops.stored;
        let mut c = vec![0.0; 2 * np];
        let mut s = 0.0;
        for &(l, r) in &self.to_dual {
            self.ops.interp.interpolate_into(
                &self.primal[l * ns..l * ns + np],
                &self.primal[r * ns..r * ns + np],
                &mut c,
            );
            // ∫_{-1/2}^{1/2} η^k dη
            s += c
                .iter()
                .enumerate()
                .filter(|(k, _)| k % 2 == 0)
                .map(|(k, v)| v * 2.0 * 0.5f64.powi(k as i32 + 1) / (k + 1) as f64)
                .sum::<f64>();
        }
        s * self.grid.h()
    }

    fn entropies(src: &[f64], np: usize) -> Vec<f64> {
        src.iter().step_by(np).map(|v| 0.5 * v * v).collect()
    }

    /// Viscosity at every source point of `src`; `elements` lists adjacent
    /// source pairs (used by the sensor).
    fn field_for(&self, src: &[f64], prev: Option<&Vec<f64>>, elements: &[(usize, usize)]) -> ViscosityField {
        let np = self.ops.m + 1;
        let ns = self.ops.stored;
        let count = src.len() / ns;
        let h = self.grid.h();
        let max_u = src.iter().step_by(ns).fold(0.0f64, |m, v| m.max(v.abs()));
        match self.params {
            ViscosityParams::None => ViscosityField::zeros(count),
            ViscosityParams::LaxFriedrichs { alpha_max } => {
                ViscosityField::uniform_max(nu_max(h, max_u, alpha_max), count)
            }
            ViscosityParams::EntropyViscosity(p) => {
                let residual: Option<Vec<f64>> = prev.map(|prev| {
                    (0..count)
                        .map(|i| entropy_residual_hermite(&src[i * ns..i * ns + np], prev[i], self.prev_dt, h))
                        .collect()
                });
                entropy_viscosity_field(&p, h, max_u, residual.as_deref(), count)
            }
            ViscosityParams::SmoothnessSensor(p) => {
                let proj = self
                    .sensor
                    .as_ref()
                    .expect("sensor projection built with sensor params");
                let mut field = ViscosityField::zeros(count);
                for &(l, r) in elements {
                    let modal = proj.modal(&src[l * ns..l * ns + np], &src[r * ns..r * ns + np]);
                    let nu = sensor_viscosity(smoothness_sensor(&modal), &p, h);
                    for i in [l, r] {
                        field.nu[i] = field.nu[i].max(nu);
                    }
                }
                field
            }
        }
    }

    /// Primal and dual entropy viscosity for the first step, from the
    /// residuals of two inviscid trial steps of size `dt`; `ν_max` everywhere
    /// if the trial fails.
    fn startup_fields(&self, dt: f64) -> (ViscosityField, ViscosityField) {
        let mut trial = self.clone();
        trial.params = ViscosityParams::None;
        let ok = trial.step(dt).and_then(|_| trial.step(dt)).is_ok();
        if ok {
            trial.params = self.params;
            let p = trial.field_for(&trial.primal, trial.prev_entropy_primal.as_ref(), &trial.to_dual);
            let d = trial.field_for(&trial.dual, trial.prev_entropy_dual.as_ref(), &trial.to_primal);
            (p, d)
        } else {
            let nu = self.params.bound(self.grid.h(), self.max_abs());
            let count = self.primal.len() / self.ops.stored;
            (
                ViscosityField::uniform_max(nu, count),
                ViscosityField::uniform_max(nu, self.grid.n()),
            )
        }
    }

    fn counted_range(&self) -> std::ops::Range<usize> {
        let count = self.primal.len() / self.ops.stored;
        if self.bc.is_periodic() {
            0..count
        } else {
            1..count - 1
        }
    }
}

impl Scheme for HermiteScheme {
    fn method(&self) -> Method {
        Method::Hermite
    }

    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn time(&self) -> f64 {
        self.time
    }

    fn max_abs(&self) -> f64 {
        self.primal
            .iter()
            .step_by(self.ops.stored)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Primal to dual, then dual to primal, each with `dt/2` and freshly
    /// computed viscosity.
    fn step(&mut self, dt: f64) -> Result<usize> {
        if !(dt > 0.0) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        let ns = self.ops.stored;
        let h = self.grid.h();
        let dt_half = 0.5 * dt;

        let startup =
            (self.prev_entropy_primal.is_none() && self.params.is_entropy_viscosity()).then(|| self.startup_fields(dt));
        let field_p = match &startup {
            Some((p, _)) => p.clone(),
            None => self.field_for(&self.primal, self.prev_entropy_primal.as_ref(), &self.to_dual),
        };
        let mut dual = vec![0.0; self.dual.len()];
        self.ops
            .half_step(&self.primal, &field_p.nu, dt_half, h, &self.to_dual, &mut dual)?;
        self.prev_entropy_primal = Some(Self::entropies(&self.primal, ns));

        let field_d = match startup {
            Some((_, d)) => d,
            None => self.field_for(&dual, self.prev_entropy_dual.as_ref(), &self.to_primal),
        };
        let mut primal = self.primal.clone();
        let offset = if self.bc.is_periodic() { 0 } else { ns };
        let end = offset + self.to_primal.len() * ns;
        self.ops.half_step(
            &dual,
            &field_d.nu,
            dt_half,
            h,
            &self.to_primal,
            &mut primal[offset..end],
        )?;
        self.prev_entropy_dual = Some(Self::entropies(&dual, ns));

        self.prev_dt = dt;
        self.dual = dual;
        self.primal = primal;
        self.time += dt;
        let nm = field_p.count_selected(self.counted_range());
        self.last_field = field_p;
        Ok(nm)
    }

    /// Full step, i.e. twice the admissible half-step.
    fn stable_dt(&self) -> f64 {
        let h = self.grid.h();
        let nu = self.params.bound(h, self.max_abs());
        match viscous_stability_ratio(self.ops.m) {
            Ok(r) if nu > 0.0 => 2.0 * VISCOUS_SAFETY * r * h * h / nu,
            _ => f64::INFINITY,
        }
    }

    fn state(&self) -> SolutionState {
        SolutionState {
            dof: Dof::Hermite {
                degree: self.ops.m,
                taylor: self.primal(),
            },
            time: self.time,
            prev_entropy: self.prev_entropy_primal.clone(),
        }
    }
}
