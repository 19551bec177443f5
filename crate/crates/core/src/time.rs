//! Classic RK4, CFL step selection and the time-marching driver.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mesh::{Grid, Method, SolutionState};

/// One classic RK4 step of `u' = rhs(u)`, in place.
///
/// `rhs(u, out)` writes the time derivative of `u` into `out`.
pub fn rk4_step<F>(mut rhs: F, state: &mut [f64], dt: f64) -> Result<()>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if !(dt > 0.0) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    let n = state.len();
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut stage = vec![0.0; n];
    let coeff = [0.5, 0.5, 1.0];
    for s in 0..4 {
        let input: &[f64] = if s == 0 {
            state
        } else {
            let c = coeff[s - 1] * dt;
            for i in 0..n {
                stage[i] = state[i] + c * k[s - 1][i];
            }
            &stage
        };
        rhs(input, &mut k[s]);
        if let Some(i) = k[s].iter().position(|v| !v.is_finite()) {
            return Err(Error::NumericFailure {
                what: format!("non-finite RK4 stage {}", s + 1),
                location: format!("index {i}"),
            });
        }
    }
    let w = dt / 6.0;
    for i in 0..n {
        state[i] += w * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
    Ok(())
}

/// Time-step rule per method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum CflRule {
    /// `max|u| dt / h = courant`.
    MaxSpeed { courant: f64 },
    /// `dt / h = ratio`.
    FixedRatio { ratio: f64 },
}

impl CflRule {
    pub fn for_method(method: Method) -> Self {
        match method {
            Method::Hermite => CflRule::MaxSpeed { courant: 0.3 },
            Method::Dg => CflRule::FixedRatio { ratio: 0.0625 },
            Method::FiniteVolume => CflRule::MaxSpeed { courant: 0.9 },
        }
    }

    pub fn dt(&self, h: f64, max_abs_u: f64) -> f64 {
        match *self {
            CflRule::MaxSpeed { courant } => {
                if max_abs_u > 0.0 {
                    courant * h / max_abs_u
                } else {
                    courant * h
                }
            }
            CflRule::FixedRatio { ratio } => ratio * h,
        }
    }
}

/// Length of the stability interval of classic RK4 on the negative real axis.
pub const RK4_REAL_AXIS_LIMIT: f64 = 2.785_293_563_405_282;

/// Fraction of the measured viscous limit used when it restricts the step.
pub const VISCOUS_SAFETY: f64 = 0.8;

/// Fixed step size with the final step shortened to land on `final_time`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepController {
    pub rule: CflRule,
    pub final_time: f64,
    dt: f64,
    steps: usize,
}

/// Hard cap on steps per run.
pub const MAX_STEPS: usize = 10_000_000;

impl StepController {
    /// `max_abs_u` is evaluated on the initial data and frozen for the run.
    pub fn new(rule: CflRule, final_time: f64, h: f64, max_abs_u: f64) -> Result<Self> {
        if !(final_time >= 0.0 && final_time.is_finite()) {
            return Err(invalid(format!("final time must be >= 0, got {final_time}")));
        }
        let dt = rule.dt(h, max_abs_u);
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("step size {dt} from h = {h}")));
        }
        let steps = ((final_time / dt) - 1e-9).ceil().max(0.0);
        if steps > MAX_STEPS as f64 {
            return Err(Error::RunawayRun(MAX_STEPS));
        }
        Ok(Self {
            rule,
            final_time,
            dt,
            steps: steps as usize,
        })
    }

    /// Lowers the step size to at most `dt_max`, keeping the step count
    /// consistent.
    pub fn capped(self, dt_max: f64) -> Result<Self> {
        if !(dt_max > 0.0) {
            return Err(invalid(format!("step cap must be positive, got {dt_max}")));
        }
        if dt_max >= self.dt {
            return Ok(self);
        }
        let steps = ((self.final_time / dt_max) - 1e-9).ceil().max(0.0);
        if steps > MAX_STEPS as f64 {
            return Err(Error::RunawayRun(MAX_STEPS));
        }
        Ok(Self {
            dt: dt_max,
            steps: steps as usize,
            ..self
        })
    }

    /// Method CFL rule on the scheme's current `max|u|`, capped by its
    /// viscous limit.
    pub fn for_scheme(scheme: &dyn Scheme, final_time: f64) -> Result<Self> {
        let h = scheme.grid().h();
        let c = Self::new(CflRule::for_method(scheme.method()), final_time, h, scheme.max_abs())?;
        c.capped(scheme.stable_dt())
    }

    pub fn nominal_dt(&self) -> f64 {
        self.dt
    }

    pub fn step_count(&self) -> usize {
        self.steps
    }

    /// Step sizes in order; they sum to `final_time`.
    pub fn dt_history(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps);
        let mut t = 0.0;
        for k in 0..self.steps {
            let dt = if k + 1 == self.steps {
                self.final_time - t
            } else {
                self.dt
            };
            out.push(dt);
            t += dt;
        }
        out
    }
}

/// A spatial discretization coupled to its viscosity model.
pub trait Scheme {
    fn method(&self) -> Method;

    fn grid(&self) -> &Grid;

    fn time(&self) -> f64;

    fn max_abs(&self) -> f64;

    /// Computes the entropy residual against the stored history, freezes the
    /// viscosity, advances by `dt` and stores the current entropy. Returns
    /// the number of locations where `ν_max` was selected.
    fn step(&mut self, dt: f64) -> Result<usize>;

    fn state(&self) -> SolutionState;

    /// Largest step for which the viscous term stays stable with the
    /// largest viscosity the scheme can select from its current state.
    fn stable_dt(&self) -> f64 {
        f64::INFINITY
    }

    /// Solution value at `x`.
    fn eval(&self, x: f64) -> f64 {
        self.state().eval(self.grid(), x)
    }
}

/// Outcome of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunLog {
    pub dt_history: Vec<f64>,
    /// Per-step count of `ν_max` selections.
    pub nm_log: Vec<usize>,
}

impl RunLog {
    pub fn steps(&self) -> usize {
        self.dt_history.len()
    }

    pub fn nm_average(&self) -> f64 {
        if self.nm_log.is_empty() {
            0.0
        } else {
            self.nm_log.iter().sum::<usize>() as f64 / self.nm_log.len() as f64
        }
    }
}

/// Marches `scheme` to `controller.final_time`.
pub fn advance_to(scheme: &mut dyn Scheme, controller: &StepController) -> Result<RunLog> {
    let mut log = RunLog::default();
    for dt in controller.dt_history() {
        let nm = scheme.step(dt)?;
        log.nm_log.push(nm);
        log.dt_history.push(dt);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_rhs_is_identity() {
        let mut u = vec![1.0, -2.0, 3.5];
        rk4_step(|_, out| out.fill(0.0), &mut u, 0.1).unwrap();
        assert_eq!(u, vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn exponential_one_step() {
        let mut u = vec![1.0];
        rk4_step(|u, out| out[0] = u[0], &mut u, 0.1).unwrap();
        let want = 1.0 + 0.1 + 0.005 + 0.1f64.powi(3) / 6.0 + 0.1f64.powi(4) / 24.0;
        assert_abs_diff_eq!(u[0], want, epsilon = 1e-15);
        assert_abs_diff_eq!(u[0], 1.105_170_833_333_333, epsilon = 1e-14);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let lambda = -1.3;
        let err = |steps: usize| {
            let dt = 1.0 / steps as f64;
            let mut u = vec![1.0];
            for _ in 0..steps {
                rk4_step(|u, out| out[0] = lambda * u[0], &mut u, dt).unwrap();
            }
            (u[0] - lambda.exp()).abs()
        };
        let rate = (err(10) / err(20)).log2();
        assert!((rate - 4.0).abs() < 0.1, "rate {rate}");
    }

    #[test]
    fn nan_stage_is_reported() {
        let mut u = vec![1.0];
        let err = rk4_step(|u, out| out[0] = if u[0] > 1.0 { f64::NAN } else { 1.0 }, &mut u, 0.1).unwrap_err();
        match err {
            Error::NumericFailure { what, .. } => assert!(what.contains("stage 2")),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn controller_lands_on_final_time() {
        for (t, h) in [
            (1.0, 2.0 / 40.0),
            (0.1, 2.0 / 640.0),
            (2.0, 6.0 / 2560.0),
            (0.37, 0.013),
        ] {
            for rule in [
                CflRule::for_method(Method::FiniteVolume),
                CflRule::for_method(Method::Dg),
            ] {
                let c = StepController::new(rule, t, h, 0.6).unwrap();
                let hist = c.dt_history();
                assert_eq!(hist.len(), c.step_count());
                assert_eq!(hist.iter().sum::<f64>(), t);
                assert!(hist.iter().all(|&dt| dt > 0.0));
            }
        }
        assert_eq!(
            StepController::new(CflRule::for_method(Method::Hermite), 0.0, 0.1, 1.0)
                .unwrap()
                .step_count(),
            0
        );
    }

    #[test]
    fn cfl_rules() {
        assert_abs_diff_eq!(CflRule::for_method(Method::Hermite).dt(0.1, 0.5), 0.06, epsilon = 1e-16);
        assert_abs_diff_eq!(CflRule::for_method(Method::Dg).dt(0.1, 0.5), 0.00625, epsilon = 1e-17);
        assert_abs_diff_eq!(
            CflRule::for_method(Method::FiniteVolume).dt(0.1, 0.5),
            0.18,
            epsilon = 1e-16
        );
    }

    #[test]
    fn runaway_runs_are_rejected() {
        let err = StepController::new(CflRule::FixedRatio { ratio: 1e-9 }, 1.0, 1e-3, 1.0).unwrap_err();
        assert!(matches!(err, Error::RunawayRun(_)));
    }
}
