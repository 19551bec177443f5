//! Burgers' flux and entropy pair, the experiment catalog, exact solutions
//! and a first-order Godunov reference solver.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::legendre::{legendre_monomials, project_onto_legendre};
use crate::mesh::BoundaryCondition;

/// Burgers' flux `u²/2` with the entropy pair `(u²/2, u³/3)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FluxEntropyPair;

impl FluxEntropyPair {
    #[inline]
    pub fn flux(u: f64) -> f64 {
        0.5 * u * u
    }

    #[inline]
    pub fn entropy(u: f64) -> f64 {
        0.5 * u * u
    }

    #[inline]
    pub fn entropy_flux(u: f64) -> f64 {
        u * u * u / 3.0
    }

    #[inline]
    pub fn wave_speed(u: f64) -> f64 {
        u
    }
}

/// Time at which `-sin(πx) + 0.5` develops a gradient catastrophe: `-1/min u₀'`.
pub const SINE_BREAKING_TIME: f64 = 1.0 / PI;

fn check_admissible(u_l: f64, u_r: f64) -> Result<()> {
    if u_l > u_r {
        Ok(())
    } else {
        Err(Error::InadmissibleShock { u_l, u_r })
    }
}

/// Shock speed from Rankine-Hugoniot, `(u_l + u_r)/2`.
pub fn shock_speed(u_l: f64, u_r: f64) -> f64 {
    0.5 * (u_l + u_r)
}

/// `u_l + (u_r - u_l) H(x - v_s t)` with a right-continuous Heaviside.
pub fn exact_moving_shock(x: f64, t: f64, u_l: f64, u_r: f64) -> Result<f64> {
    check_admissible(u_l, u_r)?;
    Ok(if x < shock_speed(u_l, u_r) * t { u_l } else { u_r })
}

/// Checks the jump condition `f(u_l) - f(u_r) = v_s (u_l - u_r)`.
pub fn verify_shock_is_solution(u_l: f64, u_r: f64) -> Result<bool> {
    check_admissible(u_l, u_r)?;
    let lhs = FluxEntropyPair::flux(u_l) - FluxEntropyPair::flux(u_r);
    let rhs = shock_speed(u_l, u_r) * (u_l - u_r);
    Ok((lhs - rhs).abs() <= 1e-14 * (1.0 + lhs.abs()))
}

/// Solution of `u_t + u u_x = 0` from `u(x,0) = -sin(πx) + 0.5` before the
/// breaking time, by Newton iteration on `u = -sin(π(x - u t)) + 0.5`.
pub fn exact_presshock_sine(x: f64, t: f64) -> Result<f64> {
    if !(0.0..SINE_BREAKING_TIME).contains(&t) {
        return Err(invalid(format!(
            "characteristic solution needs 0 <= t < {SINE_BREAKING_TIME}, got {t}"
        )));
    }
    let mut u = -(PI * x).sin() + 0.5;
    if t == 0.0 {
        return Ok(u);
    }
    for _ in 0..50 {
        let arg = PI * (x - u * t);
        let g = u + arg.sin() - 0.5;
        let step = g / (1.0 - PI * t * arg.cos());
        u -= step;
        if step.abs() <= 1e-16 * u.abs().max(1.0) {
            break;
        }
    }
    let g = u + (PI * (x - u * t)).sin() - 0.5;
    if g.abs() < 1e-13 {
        Ok(u)
    } else {
        Err(Error::CharacteristicSolve { x, t })
    }
}

/// Initial data of the catalog problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    Constant {
        value: f64,
    },
    /// `u_l` left of `at`, `u_r` from `at` on.
    Jump {
        u_l: f64,
        u_r: f64,
        at: f64,
    },
    /// `-sin(πx) + 0.5`.
    Sine,
    /// Zero, a `-0.1 sin(2πx)` bump on `[-0.5, 0.5)`, zero, then `-0.5` from `x = 4.5`.
    TwoShock,
}

impl InitialData {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            InitialData::Constant { value } => value,
            InitialData::Jump { u_l, u_r, at } => {
                if x < at {
                    u_l
                } else {
                    u_r
                }
            }
            InitialData::Sine => -(PI * x).sin() + 0.5,
            InitialData::TwoShock => {
                if (-0.5..0.5).contains(&x) {
                    -0.1 * (2.0 * PI * x).sin()
                } else if x >= 4.5 {
                    -0.5
                } else {
                    0.0
                }
            }
        }
    }

    /// Points where the data or its derivatives jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            InitialData::Jump { at, .. } => vec![at],
            InitialData::TwoShock => vec![-0.5, 0.5, 4.5],
            _ => Vec::new(),
        }
    }

    /// `d^k u / dx^k` of the smooth piece containing `x`.
    fn derivative(&self, x: f64, k: usize) -> f64 {
        if k == 0 {
            return self.value(x);
        }
        let sin_deriv = |freq: f64| freq.powi(k as i32) * (freq * x + k as f64 * PI / 2.0).sin();
        match *self {
            InitialData::Sine => -sin_deriv(PI),
            InitialData::TwoShock if (-0.5..0.5).contains(&x) => -0.1 * sin_deriv(2.0 * PI),
            _ => 0.0,
        }
    }

    /// Scaled Taylor coefficients `h^k u^(k)(x_c) / k!`, k = 0..=m.
    ///
    /// Nodes closer than `h/2` to a breakpoint get the L2 projection of the
    /// data onto degree `m` over `[x_c - h/2, x_c + h/2]` instead.
    pub fn taylor_coefficients(&self, x_c: f64, h: f64, m: usize) -> Vec<f64> {
        let breaks = self.breakpoints();
        if breaks.iter().any(|b| (b - x_c).abs() < 0.5 * h) {
            let leg = project_onto_legendre(|x| self.value(x), x_c - 0.5 * h, x_c + 0.5 * h, m, &breaks);
            let mono = legendre_monomials(m);
            // ζ = 2ξ on the projection interval
            return (0..=m)
                .map(|j| {
                    let c: f64 = (0..=m).map(|k| leg[k] * mono[k][j]).sum();
                    c * 2f64.powi(j as i32)
                })
                .collect();
        }
        let mut fact = 1.0;
        (0..=m)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                self.derivative(x_c, k) * h.powi(k as i32) / fact
            })
            .collect()
    }

    /// Average over `[a, b]`.
    pub fn cell_average(&self, a: f64, b: f64) -> f64 {
        project_onto_legendre(|x| self.value(x), a, b, 0, &self.breakpoints())[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    StationaryShock,
    MovingShock,
    SineNWave,
    TwoShock,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [
        ExperimentId::StationaryShock,
        ExperimentId::MovingShock,
        ExperimentId::SineNWave,
        ExperimentId::TwoShock,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::StationaryShock => "stationary-shock",
            ExperimentId::MovingShock => "moving-shock",
            ExperimentId::SineNWave => "sine-n-wave",
            ExperimentId::TwoShock => "two-shock",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown experiment '{s}'")))
    }
}

/// Where the errors of a run are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReferenceSolution {
    ExactShock { u_l: f64, u_r: f64 },
    PreshockCharacteristics,
    GodunovOracle { resolution: usize },
}

/// Resolution of the post-shock Godunov reference.
pub const GODUNOV_RESOLUTION: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: ExperimentId,
    pub initial: InitialData,
    pub boundary: BoundaryCondition,
    pub domain: (f64, f64),
    pub final_time: f64,
    pub reference: ReferenceSolution,
}

impl ProblemSpec {
    /// Same problem run to `t`, with the reference kind adjusted.
    pub fn with_final_time(mut self, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid(format!("final time must be finite and >= 0, got {t}")));
        }
        self.final_time = t;
        if self.id == ExperimentId::SineNWave {
            self.reference = if t < SINE_BREAKING_TIME {
                ReferenceSolution::PreshockCharacteristics
            } else {
                ReferenceSolution::GodunovOracle {
                    resolution: GODUNOV_RESOLUTION,
                }
            };
        }
        Ok(self)
    }
}

/// Shock states `(u_l, u_r) = (0.5 + v_s, -0.5 + v_s)`.
fn single_shock(id: ExperimentId, v_s: f64) -> ProblemSpec {
    let (u_l, u_r) = (0.5 + v_s, -0.5 + v_s);
    ProblemSpec {
        id,
        initial: InitialData::Jump { u_l, u_r, at: 0.0 },
        boundary: BoundaryCondition::Dirichlet { left: u_l, right: u_r },
        domain: (-1.0, 1.0),
        final_time: 1.0,
        reference: ReferenceSolution::ExactShock { u_l, u_r },
    }
}

pub fn initial_data_catalog(id: ExperimentId) -> ProblemSpec {
    match id {
        ExperimentId::StationaryShock => single_shock(id, 0.0),
        ExperimentId::MovingShock => single_shock(id, 0.1),
        ExperimentId::SineNWave => ProblemSpec {
            id,
            initial: InitialData::Sine,
            boundary: BoundaryCondition::Periodic,
            domain: (-1.0, 1.0),
            final_time: 0.1,
            reference: ReferenceSolution::PreshockCharacteristics,
        },
        ExperimentId::TwoShock => ProblemSpec {
            id,
            initial: InitialData::TwoShock,
            boundary: BoundaryCondition::Dirichlet { left: 0.0, right: -0.5 },
            domain: (-1.0, 5.0),
            final_time: 2.0,
            reference: ReferenceSolution::GodunovOracle {
                resolution: GODUNOV_RESOLUTION,
            },
        },
    }
}

/// Looks an experiment up by name.
pub fn catalog_by_name(name: &str) -> Result<ProblemSpec> {
    Ok(initial_data_catalog(name.parse()?))
}

/// Exact Riemann flux for Burgers' equation.
#[inline]
pub fn godunov_flux(u_l: f64, u_r: f64) -> f64 {
    let f = FluxEntropyPair::flux;
    if u_l > u_r {
        if u_l + u_r > 0.0 {
            f(u_l)
        } else {
            f(u_r)
        }
    } else if u_l > 0.0 {
        f(u_l)
    } else if u_r < 0.0 {
        f(u_r)
    } else {
        0.0
    }
}

/// Piecewise-constant first-order Godunov solution.
#[derive(Debug, Clone, PartialEq)]
pub struct GodunovReference {
    x_left: f64,
    h: f64,
    values: Vec<f64>,
}

impl GodunovReference {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_width(&self) -> f64 {
        self.h
    }

    /// Value of the cell containing `x` (clamped to the domain).
    pub fn sample(&self, x: f64) -> f64 {
        let j = ((x - self.x_left) / self.h).floor().max(0.0) as usize;
        self.values[j.min(self.values.len() - 1)]
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.h).sqrt()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.h
    }
}

const GODUNOV_CFL: f64 = 0.9;

/// Runs the Godunov scheme on `resolution` cells to time `t`.
pub fn godunov_solve(problem: &ProblemSpec, resolution: usize, t: f64) -> Result<GodunovReference> {
    if resolution < 2 {
        return Err(invalid("Godunov solver needs at least 2 cells"));
    }
    let (a, b) = problem.domain;
    let h = (b - a) / resolution as f64;
    let mut u: Vec<f64> = (0..resolution)
        .map(|j| {
            let x0 = a + j as f64 * h;
            problem.initial.cell_average(x0, x0 + h)
        })
        .collect();
    let (ghost_l, ghost_r) = match problem.boundary {
        BoundaryCondition::Periodic => (None, None),
        BoundaryCondition::Dirichlet { left, right } => (Some(left), Some(right)),
    };
    let mut speed = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let (Some(l), Some(r)) = (ghost_l, ghost_r) {
        speed = speed.max(l.abs()).max(r.abs());
    }
    let mut fluxes = vec![0.0; resolution + 1];
    let mut time = 0.0;
    if speed > 0.0 {
        let dt_full = GODUNOV_CFL * h / speed;
        let steps = ((t / dt_full) - 1e-9).ceil().max(0.0) as usize;
        for step in 0..steps {
            let dt = if step + 1 == steps { t - time } else { dt_full };
            let left = ghost_l.unwrap_or(u[resolution - 1]);
            let right = ghost_r.unwrap_or(u[0]);
            fluxes[0] = godunov_flux(left, u[0]);
            for j in 1..resolution {
                fluxes[j] = godunov_flux(u[j - 1], u[j]);
            }
            fluxes[resolution] = if ghost_r.is_some() {
                godunov_flux(u[resolution - 1], right)
            } else {
                fluxes[0]
            };
            let r = dt / h;
            for (j, v) in u.iter_mut().enumerate() {
                *v -= r * (fluxes[j + 1] - fluxes[j]);
            }
            time += dt;
        }
    }
    Ok(GodunovReference {
        x_left: a,
        h,
        values: u,
    })
}

/// Godunov reference at `resolution` cells, accepted when the L2 norm of the
/// solution changes by less than `1e-3` relative against half resolution.
pub fn godunov_reference(problem: &ProblemSpec, resolution: usize, t: f64) -> Result<GodunovReference> {
    if resolution < 1 << 14 {
        return Err(invalid(format!(
            "Godunov reference needs at least 2^14 cells, got {resolution}"
        )));
    }
    let fine = godunov_solve(problem, resolution, t)?;
    let coarse = godunov_solve(problem, resolution / 2, t)?;
    let norm = fine.l2_norm();
    let change = (norm - coarse.l2_norm()).abs() / norm.max(f64::MIN_POSITIVE);
    if change >= 1e-3 {
        return Err(Error::ReferenceNotConverged { change });
    }
    Ok(fine)
}

/// Reference field used for error measurement.
#[derive(Debug, Clone)]
pub enum ReferenceField {
    Shock { u_l: f64, u_r: f64, t: f64 },
    Characteristics { t: f64 },
    Godunov(GodunovReference),
}

impl ReferenceField {
    pub fn build(problem: &ProblemSpec) -> Result<Self> {
        let t = problem.final_time;
        Ok(match problem.reference {
            ReferenceSolution::ExactShock { u_l, u_r } => {
                check_admissible(u_l, u_r)?;
                ReferenceField::Shock { u_l, u_r, t }
            }
            ReferenceSolution::PreshockCharacteristics => {
                exact_presshock_sine(0.0, t)?;
                ReferenceField::Characteristics { t }
            }
            ReferenceSolution::GodunovOracle { resolution } => {
                ReferenceField::Godunov(godunov_reference(problem, resolution, t)?)
            }
        })
    }

    /// Reference value at `x`; NaN if the characteristic solve fails.
    pub fn sample(&self, x: f64) -> f64 {
        match self {
            ReferenceField::Shock { u_l, u_r, t } => {
                if x < shock_speed(*u_l, *u_r) * t {
                    *u_l
                } else {
                    *u_r
                }
            }
            ReferenceField::Characteristics { t } => exact_presshock_sine(x, *t).unwrap_or(f64::NAN),
            ReferenceField::Godunov(g) => g.sample(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn stationary_shock_values() {
        assert_eq!(exact_moving_shock(-0.5, 1.0, 0.5, -0.5).unwrap(), 0.5);
        assert_eq!(exact_moving_shock(0.5, 1.0, 0.5, -0.5).unwrap(), -0.5);
    }

    #[test]
    fn moving_shock_values() {
        assert_abs_diff_eq!(shock_speed(0.6, -0.4), 0.1, epsilon = 1e-16);
        assert_eq!(exact_moving_shock(0.2, 1.0, 0.6, -0.4).unwrap(), -0.4);
        assert_eq!(exact_moving_shock(0.0, 1.0, 0.6, -0.4).unwrap(), 0.6);
    }

    #[test]
    fn tie_break_is_right_continuous() {
        let (u_l, u_r) = (1.5, -0.25);
        let t = 2.0;
        let xs = shock_speed(u_l, u_r) * t;
        assert_eq!(exact_moving_shock(xs, t, u_l, u_r).unwrap(), u_r);
    }

    #[test]
    fn inadmissible_shocks_are_rejected() {
        assert!(matches!(
            exact_moving_shock(0.0, 1.0, -0.5, 0.5),
            Err(Error::InadmissibleShock { .. })
        ));
        assert!(matches!(
            verify_shock_is_solution(0.5, 0.6),
            Err(Error::InadmissibleShock { .. })
        ));
    }

    #[test]
    fn rankine_hugoniot() {
        assert!(verify_shock_is_solution(0.5, -0.5).unwrap());
        // f jump 0.18 - 0.08 = 0.10 = 0.1 * 1.0
        assert!(verify_shock_is_solution(0.6, -0.4).unwrap());
    }

    proptest! {
        #[test]
        fn entropy_pair_is_compatible(u in -10.0f64..10.0) {
            // F'(u) = u², E'(u) f'(u) = u · u
            let d = 1e-6;
            let fprime = (FluxEntropyPair::entropy_flux(u + d) - FluxEntropyPair::entropy_flux(u - d)) / (2.0 * d);
            prop_assert!((fprime - u * u).abs() < 1e-6 * (1.0 + u * u));
            let eprime = u;
            prop_assert!((u * u - eprime * FluxEntropyPair::wave_speed(u)).abs() <= 1e-14 * (1.0 + u * u));
        }
    }

    #[test]
    fn sine_at_time_zero() {
        for &x in &[-0.9, -0.5, 0.0, 0.3, 0.77] {
            assert_eq!(exact_presshock_sine(x, 0.0).unwrap(), -(PI * x).sin() + 0.5);
        }
    }

    #[test]
    fn sine_zero_crossing_characteristic() {
        for &t in &[0.05, 0.1, 0.2, 0.3] {
            for k in [-1.0, 0.0] {
                let x = 0.5 * t + 2.0 * k;
                assert_abs_diff_eq!(exact_presshock_sine(x, t).unwrap(), 0.5, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn sine_matches_bisection() {
        let (x, t) = (0.3, 0.1);
        let g = |u: f64| u + (PI * (x - u * t)).sin() - 0.5;
        let (mut lo, mut hi) = (-0.5, 1.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert_abs_diff_eq!(exact_presshock_sine(x, t).unwrap(), 0.5 * (lo + hi), epsilon = 1e-12);
    }

    #[test]
    fn sine_satisfies_burgers() {
        let d = 1e-5;
        for &(x, t) in &[(0.3, 0.1), (-0.7, 0.2), (0.9, 0.25)] {
            let u = exact_presshock_sine(x, t).unwrap();
            let ut = (exact_presshock_sine(x, t + d).unwrap() - exact_presshock_sine(x, t - d).unwrap()) / (2.0 * d);
            let ux = (exact_presshock_sine(x + d, t).unwrap() - exact_presshock_sine(x - d, t).unwrap()) / (2.0 * d);
            assert!((ut + u * ux).abs() < 1e-6);
        }
    }

    #[test]
    fn sine_rejects_post_breaking_time() {
        assert!(exact_presshock_sine(0.0, 0.5).is_err());
    }

    #[test]
    fn catalog_values() {
        let two = catalog_by_name("two-shock").unwrap();
        assert_abs_diff_eq!(two.initial.value(0.25), -0.1, epsilon = 1e-15);
        assert_eq!(two.initial.value(4.75), -0.5);
        assert_eq!(two.domain, (-1.0, 5.0));
        assert_eq!(two.boundary, BoundaryCondition::Dirichlet { left: 0.0, right: -0.5 });
        let sine = catalog_by_name("sine-n-wave").unwrap();
        assert_abs_diff_eq!(sine.initial.value(-0.5), 1.5, epsilon = 1e-15);
        let moving = catalog_by_name("moving-shock").unwrap();
        assert_eq!(moving.reference, ReferenceSolution::ExactShock { u_l: 0.6, u_r: -0.4 });
        assert!(catalog_by_name("blast-wave").is_err());
    }

    #[test]
    fn taylor_coefficients_of_sine() {
        let h = 0.1;
        let c = InitialData::Sine.taylor_coefficients(0.2, h, 3);
        assert_abs_diff_eq!(c[0], -(PI * 0.2).sin() + 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], -PI * (PI * 0.2).cos() * h, epsilon = 1e-15);
        assert_abs_diff_eq!(c[2], PI * PI * (PI * 0.2).sin() * h * h / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn taylor_coefficients_near_jump_are_a_projection() {
        let data = InitialData::Jump {
            u_l: 0.5,
            u_r: -0.5,
            at: 0.0,
        };
        let c = data.taylor_coefficients(0.0, 0.1, 4);
        // odd function: even coefficients vanish, mean is zero
        assert_abs_diff_eq!(c[0], 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(c[2], 0.0, epsilon = 1e-12);
        assert!(c[1] < 0.0);
    }

    #[test]
    fn godunov_keeps_constants() {
        let p = ProblemSpec {
            id: ExperimentId::SineNWave,
            initial: InitialData::Constant { value: 0.7 },
            boundary: BoundaryCondition::Periodic,
            domain: (-1.0, 1.0),
            final_time: 1.0,
            reference: ReferenceSolution::GodunovOracle { resolution: 1 << 14 },
        };
        let g = godunov_reference(&p, 1 << 14, 0.5).unwrap();
        assert!(g.values().iter().all(|v| (v - 0.7).abs() < 1e-14));
    }

    #[test]
    fn godunov_conserves_mass_on_periodic_problems() {
        let p = initial_data_catalog(ExperimentId::SineNWave);
        let g0 = godunov_solve(&p, 512, 0.0).unwrap();
        let g1 = godunov_solve(&p, 512, 1.0).unwrap();
        assert_abs_diff_eq!(g0.mass(), g1.mass(), epsilon = 1e-13);
    }

    #[test]
    fn godunov_rejects_low_resolution() {
        let p = initial_data_catalog(ExperimentId::SineNWave);
        assert!(godunov_reference(&p, 1024, 0.1).is_err());
    }

    #[test]
    fn godunov_stationary_shock_is_sharp() {
        let p = initial_data_catalog(ExperimentId::StationaryShock);
        let g = godunov_reference(&p, 1 << 14, 1.0).unwrap();
        let h = g.cell_width();
        // away from one cell of the jump the exact states are reproduced
        for (j, v) in g.values().iter().enumerate() {
            let x = -1.0 + (j as f64 + 0.5) * h;
            if x.abs() > h {
                let exact = exact_moving_shock(x, 1.0, 0.5, -0.5).unwrap();
                assert!((v - exact).abs() < 1e-12, "x={x} v={v}");
            }
        }
    }

    #[test]
    fn godunov_matches_characteristics_before_breaking() {
        let p = initial_data_catalog(ExperimentId::SineNWave);
        let g = godunov_reference(&p, 1 << 14, 0.1).unwrap();
        let h = g.cell_width();
        let err: f64 = g
            .values()
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let x = -1.0 + (j as f64 + 0.5) * h;
                (v - exact_presshock_sine(x, 0.1).unwrap()).powi(2) * h
            })
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-3, "{err}");
    }
}
