//! First-order finite volume scheme with a viscous two-point flux.

use crate::error::{check_finite, invalid, Result};
use crate::mesh::{BoundaryCondition, Dof, Grid, Method, SolutionState};
use crate::problem::{FluxEntropyPair, InitialData};
use crate::time::{rk4_step, Scheme, RK4_REAL_AXIS_LIMIT, VISCOUS_SAFETY};
use crate::viscosity::{entropy_residual_fv, entropy_viscosity_field, nu_max, ViscosityField, ViscosityParams};

/// `½((u_i + u_{i+1})/2)² - ((ν_i + ν_{i+1})/2)(u_{i+1} - u_i)/h`.
#[inline]
pub fn fv_numerical_flux(u_i: f64, u_ip1: f64, nu_i: f64, nu_ip1: f64, h: f64) -> f64 {
    let avg = 0.5 * (u_i + u_ip1);
    0.5 * avg * avg - 0.5 * (nu_i + nu_ip1) * (u_ip1 - u_i) / h
}

/// `du_i/dt = -(f_{i+1/2} - f_{i-1/2})/h`. Dirichlet ends use ghost values
/// equal to the boundary data with the boundary node's viscosity.
pub fn fv_rhs(u: &[f64], nu: &[f64], h: f64, bc: &BoundaryCondition, out: &mut [f64]) {
    let n = u.len();
    match *bc {
        BoundaryCondition::Periodic => {
            let mut f_left = fv_numerical_flux(u[n - 1], u[0], nu[n - 1], nu[0], h);
            for i in 0..n {
                let j = if i + 1 == n { 0 } else { i + 1 };
                let f_right = fv_numerical_flux(u[i], u[j], nu[i], nu[j], h);
                out[i] = -(f_right - f_left) / h;
                f_left = f_right;
            }
        }
        BoundaryCondition::Dirichlet { left, right } => {
            let mut f_left = fv_numerical_flux(left, u[0], nu[0], nu[0], h);
            for i in 0..n {
                let f_right = if i + 1 == n {
                    fv_numerical_flux(u[i], right, nu[i], nu[i], h)
                } else {
                    fv_numerical_flux(u[i], u[i + 1], nu[i], nu[i + 1], h)
                };
                out[i] = -(f_right - f_left) / h;
                f_left = f_right;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FvScheme {
    grid: Grid,
    bc: BoundaryCondition,
    u: Vec<f64>,
    params: ViscosityParams,
    prev_entropy: Option<Vec<f64>>,
    prev_dt: f64,
    time: f64,
    last_field: ViscosityField,
}

impl FvScheme {
    /// Cell averages of `initial` over `[x_i - h/2, x_i + h/2]`.
    pub fn new(grid: Grid, bc: BoundaryCondition, initial: &InitialData, params: ViscosityParams) -> Result<Self> {
        if matches!(params, ViscosityParams::SmoothnessSensor(_)) {
            return Err(invalid("the finite volume scheme has no smoothness sensor"));
        }
        let h = grid.h();
        let count = bc.node_count(&grid);
        let u: Vec<f64> = grid.nodes()[..count]
            .iter()
            .map(|&x| initial.cell_average(x - 0.5 * h, x + 0.5 * h))
            .collect();
        Self::from_values(grid, bc, u, params)
    }

    pub fn from_values(grid: Grid, bc: BoundaryCondition, u: Vec<f64>, params: ViscosityParams) -> Result<Self> {
        if u.len() != bc.node_count(&grid) {
            return Err(invalid(format!(
                "finite volume state needs {} values, got {}",
                bc.node_count(&grid),
                u.len()
            )));
        }
        check_finite(&u, "initial finite volume state")?;
        let len = u.len();
        Ok(Self {
            grid,
            bc,
            u,
            params,
            prev_entropy: None,
            prev_dt: 0.0,
            time: 0.0,
            last_field: ViscosityField::zeros(len),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn mass(&self) -> f64 {
        self.u.iter().sum::<f64>() * self.grid.h()
    }

    /// Viscosity used in the most recent step.
    pub fn last_viscosity(&self) -> &ViscosityField {
        &self.last_field
    }

    fn counted_range(&self) -> std::ops::Range<usize> {
        if self.bc.is_periodic() {
            0..self.u.len()
        } else {
            1..self.u.len() - 1
        }
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
                ViscosityField::uniform_max(self.params.bound(self.grid.h(), self.max_abs()), self.u.len())
            })
    }

    pub fn viscosity_field(&self) -> Result<ViscosityField> {
        let h = self.grid.h();
        let len = self.u.len();
        Ok(match self.params {
            ViscosityParams::None => ViscosityField::zeros(len),
            ViscosityParams::LaxFriedrichs { alpha_max } => {
                ViscosityField::uniform_max(nu_max(h, self.max_abs(), alpha_max), len)
            }
            ViscosityParams::EntropyViscosity(p) => {
                let residual = match &self.prev_entropy {
                    Some(prev) => Some(entropy_residual_fv(
                        &self.u,
                        prev,
                        self.prev_dt,
                        h,
                        self.bc.is_periodic(),
                    )?),
                    None => None,
                };
                entropy_viscosity_field(&p, h, self.max_abs(), residual.as_deref(), len)
            }
            ViscosityParams::SmoothnessSensor(_) => unreachable!("rejected at construction"),
        })
    }
}

impl Scheme for FvScheme {
    fn method(&self) -> Method {
        Method::FiniteVolume
    }

    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn time(&self) -> f64 {
        self.time
    }

    fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn step(&mut self, dt: f64) -> Result<usize> {
        let field = if self.prev_entropy.is_none() && self.params.is_entropy_viscosity() {
            self.startup_field(dt)
        } else {
            self.viscosity_field()?
        };
        self.prev_entropy = Some(self.u.iter().map(|&v| FluxEntropyPair::entropy(v)).collect());
        self.prev_dt = dt;
        let (h, bc) = (self.grid.h(), self.bc);
        rk4_step(|u, out| fv_rhs(u, &field.nu, h, &bc, out), &mut self.u, dt)?;
        self.time += dt;
        let nm = field.count_selected(self.counted_range());
        self.last_field = field;
        Ok(nm)
    }

    /// The viscous part of the update has spectral radius `4ν/h²`.
    fn stable_dt(&self) -> f64 {
        let h = self.grid.h();
        let nu = self.params.bound(h, self.max_abs());
        if nu > 0.0 {
            VISCOUS_SAFETY * RK4_REAL_AXIS_LIMIT * h * h / (4.0 * nu)
        } else {
            f64::INFINITY
        }
    }

    fn state(&self) -> SolutionState {
        SolutionState {
            dof: Dof::FiniteVolume { values: self.u.clone() },
            time: self.time,
            prev_entropy: self.prev_entropy.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{initial_data_catalog, ExperimentId};
    use crate::viscosity::EntropyViscosityParams;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn flux_examples() {
        assert_eq!(fv_numerical_flux(1.0, 1.0, 0.0, 0.0, 0.1), 0.5);
        assert_eq!(fv_numerical_flux(0.5, -0.5, 0.0, 0.0, 0.1), 0.0);
        assert_abs_diff_eq!(fv_numerical_flux(0.5, -0.5, 0.005, 0.005, 0.025), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn constant_state_has_zero_rhs() {
        let u = vec![0.3; 12];
        let nu: Vec<f64> = (0..12).map(|i| 0.01 * i as f64).collect();
        let mut out = vec![1.0; 12];
        fv_rhs(&u, &nu, 0.1, &BoundaryCondition::Periodic, &mut out);
        assert!(out.iter().all(|v| v.abs() < 1e-15));
        fv_rhs(
            &u,
            &nu,
            0.1,
            &BoundaryCondition::Dirichlet { left: 0.3, right: 0.3 },
            &mut out,
        );
        assert!(out.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn central_flux_is_second_order() {
        let err = |n: usize| {
            let h = 2.0 / n as f64;
            let x: Vec<f64> = (0..n).map(|i| -1.0 + i as f64 * h).collect();
            let u: Vec<f64> = x.iter().map(|&x| (PI * x).sin()).collect();
            let mut out = vec![0.0; n];
            fv_rhs(&u, &vec![0.0; n], h, &BoundaryCondition::Periodic, &mut out);
            x.iter()
                .zip(&out)
                .map(|(&x, &r)| (r + (PI * x).sin() * PI * (PI * x).cos()).abs())
                .fold(0.0, f64::max)
        };
        let rate = (err(64) / err(128)).log2();
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
    }

    #[test]
    fn steady_jump_rhs_is_antisymmetric() {
        let u = vec![0.5, 0.5, 0.5, -0.5, -0.5, -0.5];
        let nu = vec![0.005; 6];
        let mut out = vec![0.0; 6];
        let bc = BoundaryCondition::Dirichlet { left: 0.5, right: -0.5 };
        fv_rhs(&u, &nu, 0.025, &bc, &mut out);
        assert_abs_diff_eq!(out[2], -out[3], epsilon = 1e-15);
        assert!(out[2] != 0.0);
    }

    #[test]
    fn periodic_rhs_telescopes() {
        let n = 50;
        let u: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let nu: Vec<f64> = (0..n).map(|i| 0.01 * (i as f64 * 0.3).cos().abs()).collect();
        let mut out = vec![0.0; n];
        fv_rhs(&u, &nu, 0.04, &BoundaryCondition::Periodic, &mut out);
        assert!(out.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn mass_is_conserved_on_periodic_problems() {
        let p = initial_data_catalog(ExperimentId::SineNWave);
        let grid = Grid::uniform(-1.0, 1.0, 80).unwrap();
        let params = ViscosityParams::EntropyViscosity(EntropyViscosityParams::new(2.0, 0.5, 1).unwrap());
        let mut s = FvScheme::new(grid, p.boundary, &p.initial, params).unwrap();
        let m0 = s.mass();
        for _ in 0..100 {
            s.step(0.01).unwrap();
        }
        assert_abs_diff_eq!(s.mass(), m0, epsilon = 1e-13);
    }

    #[test]
    fn first_step_uses_trial_residual() {
        let p = initial_data_catalog(ExperimentId::StationaryShock);
        let grid = Grid::uniform(-1.0, 1.0, 40).unwrap();
        let params = ViscosityParams::EntropyViscosity(EntropyViscosityParams::new(0.7, 0.5, 1).unwrap());
        let mut s = FvScheme::new(grid, p.boundary, &p.initial, params).unwrap();
        let nm = s.step(0.01).unwrap();
        let nu = s.last_viscosity().nu.clone();
        // smooth profile: local, below the cap, zero in the flat parts
        assert_eq!(nm, 0);
        assert!(nu.iter().all(|&v| v < 0.5 * 0.05 * 0.5));
        assert!(nu[20] > 1e-3);
        assert_eq!(nu[3], 0.0);
        assert_eq!(nu[36], 0.0);
    }

    #[test]
    fn sensor_mode_is_rejected() {
        let p = initial_data_catalog(ExperimentId::StationaryShock);
        let grid = Grid::uniform(-1.0, 1.0, 40).unwrap();
        let params = ViscosityParams::SmoothnessSensor(crate::viscosity::SensorParams::new(-1.0, 2.0, 0.5).unwrap());
        assert!(FvScheme::new(grid, p.boundary, &p.initial, params).is_err());
    }
}
