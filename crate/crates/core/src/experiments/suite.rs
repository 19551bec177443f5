//! Grid-refinement runs, convergence rates and the `n_m` diagnostic.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dg::DgScheme;
use crate::error::Result;
use crate::experiments::config::{ExperimentConfig, SuiteConfig};
use crate::fv::FvScheme;
use crate::hermite::HermiteScheme;
use crate::mesh::{error_norm, Grid, Method};
use crate::problem::{initial_data_catalog, ExperimentId, ProblemSpec, ReferenceField, ReferenceSolution};
use crate::time::{advance_to, Scheme, StepController};

/// One grid of a refinement study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub h: f64,
    pub l2_error: Option<f64>,
    /// Against the previous grid of the study.
    pub rate: Option<f64>,
    pub nm_avg: Option<f64>,
    pub steps: usize,
    pub dt: Option<f64>,
    pub walltime_s: f64,
    /// N-wave overshoot, two-shock runs only.
    pub overshoot: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
}

impl RunReport {
    pub fn errors(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.l2_error).collect()
    }

    pub fn rates(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.rate).collect()
    }

    /// `err(n_{k+1}) / err(n_k)` for consecutive grids.
    pub fn error_ratios(&self) -> Vec<Option<f64>> {
        self.records
            .windows(2)
            .map(|w| match (w[0].l2_error, w[1].l2_error) {
                (Some(a), Some(b)) if a > 0.0 => Some(b / a),
                _ => None,
            })
            .collect()
    }

    /// Least-squares slope of `-log err` against `log n` over all grids.
    pub fn fitted_rate(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .records
            .iter()
            .map(|r| r.l2_error.filter(|&e| e > 0.0).map(|e| ((r.n as f64).ln(), -e.ln())))
            .collect::<Option<_>>()?;
        least_squares_slope(&pts)
    }
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `log(err_coarse / err_fine) / log(n_fine / n_coarse)`; `log2` of the error
/// ratio when the grid is doubled.
pub fn observed_rate(err_coarse: f64, err_fine: f64, n_coarse: usize, n_fine: usize) -> Option<f64> {
    if err_coarse > 0.0 && err_fine > 0.0 && n_fine > n_coarse {
        Some((err_coarse / err_fine).ln() / (n_fine as f64 / n_coarse as f64).ln())
    } else {
        None
    }
}

/// Fills `rate` of each record from its predecessor.
pub fn fill_rates(records: &mut [RunRecord]) {
    for k in 0..records.len() {
        records[k].rate = if k == 0 {
            None
        } else {
            match (records[k - 1].l2_error, records[k].l2_error) {
                (Some(a), Some(b)) => observed_rate(a, b, records[k - 1].n, records[k].n),
                _ => None,
            }
        };
    }
}

/// Time-averaged `n_m` per grid.
pub fn nm_diagnostic(report: &RunReport) -> Vec<(usize, Option<f64>)> {
    report.records.iter().map(|r| (r.n, r.nm_avg)).collect()
}

/// The problem a configuration runs: catalog entry at the configured final
/// time and reference resolution.
pub fn problem_for(config: &ExperimentConfig) -> Result<ProblemSpec> {
    let mut p = initial_data_catalog(config.id).with_final_time(config.final_time)?;
    if let ReferenceSolution::GodunovOracle { resolution } = &mut p.reference {
        *resolution = config.reference_resolution;
    }
    Ok(p)
}

pub fn build_scheme(config: &ExperimentConfig, problem: &ProblemSpec, n: usize) -> Result<Box<dyn Scheme>> {
    let grid = Grid::uniform(problem.domain.0, problem.domain.1, n)?;
    let (bc, init, visc) = (problem.boundary, &problem.initial, config.viscosity);
    Ok(match config.method {
        Method::FiniteVolume => Box::new(FvScheme::new(grid, bc, init, visc)?),
        Method::Dg => Box::new(DgScheme::new(grid, bc, init, config.degree, visc)?),
        Method::Hermite => Box::new(HermiteScheme::new(grid, bc, init, config.degree, visc)?),
    })
}

/// Builds the scheme at `n` and marches it to `problem.final_time`.
pub fn run_to_final_time(
    config: &ExperimentConfig,
    problem: &ProblemSpec,
    n: usize,
) -> Result<(Box<dyn Scheme>, crate::time::RunLog, StepController)> {
    let mut scheme = build_scheme(config, problem, n)?;
    let controller = StepController::for_scheme(scheme.as_ref(), problem.final_time)?;
    let log = advance_to(scheme.as_mut(), &controller)?;
    Ok((scheme, log, controller))
}

/// Window holding the N-wave of the two-shock problem.
pub const NWAVE_WINDOW: (f64, f64) = (-0.75, 0.75);

const OVERSHOOT_SAMPLES_PER_CELL: usize = 16;

/// Distance by which the numerical solution leaves the range
/// `[min, max]` of the reference over `window`; zero for any profile that
/// stays inside it.
pub fn overshoot(scheme: &dyn Scheme, reference: &ReferenceField, window: (f64, f64)) -> f64 {
    let grid = scheme.grid();
    let (a, b) = (window.0.max(grid.x_left()), window.1.min(grid.x_right()));
    let count = (((b - a) / grid.h()).ceil() as usize).max(1) * OVERSHOOT_SAMPLES_PER_CELL;
    let mut ref_lo = f64::INFINITY;
    let mut ref_hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let state = scheme.state();
    for k in 0..=count {
        let x = a + (b - a) * k as f64 / count as f64;
        let r = reference.sample(x);
        let u = state.eval(grid, x);
        ref_lo = ref_lo.min(r);
        ref_hi = ref_hi.max(r);
        lo = lo.min(u);
        hi = hi.max(u);
    }
    if let ReferenceField::Godunov(g) = reference {
        // the reference is piecewise constant; include cells the samples skipped
        let w = g.cell_width();
        let mut x = a;
        while x <= b {
            let r = g.sample(x);
            ref_lo = ref_lo.min(r);
            ref_hi = ref_hi.max(r);
            x += w;
        }
    }
    (hi - ref_hi).max(ref_lo - lo).max(0.0)
}

/// Runs one grid against a prepared reference. Solver failures end up in
/// `failure`.
pub fn run_single(config: &ExperimentConfig, problem: &ProblemSpec, reference: &ReferenceField, n: usize) -> RunRecord {
    let grid_h = (problem.domain.1 - problem.domain.0) / n as f64;
    let start = Instant::now();
    let mut record = RunRecord {
        n,
        h: grid_h,
        l2_error: None,
        rate: None,
        nm_avg: None,
        steps: 0,
        dt: None,
        walltime_s: 0.0,
        overshoot: None,
        failure: None,
    };
    let outcome = run_to_final_time(config, problem, n).and_then(|(scheme, log, controller)| {
        let err = error_norm(&scheme.state(), |x| reference.sample(x), scheme.grid())?;
        Ok((scheme, log, controller, err))
    });
    match outcome {
        Ok((scheme, log, controller, err)) => {
            record.l2_error = Some(err);
            record.nm_avg = Some(log.nm_average());
            record.steps = log.steps();
            record.dt = Some(controller.nominal_dt());
            if config.id == ExperimentId::TwoShock {
                record.overshoot = Some(overshoot(scheme.as_ref(), reference, NWAVE_WINDOW));
            }
        }
        Err(e) => record.failure = Some(e.to_string()),
    }
    record.walltime_s = start.elapsed().as_secs_f64();
    record
}

/// Runs every grid of `config`; the reference is built once.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    run_experiment_with(config, |_| {})
}

/// As [`run_experiment`], calling `on_record` after each grid.
pub fn run_experiment_with(config: &ExperimentConfig, mut on_record: impl FnMut(&RunRecord)) -> Result<RunReport> {
    config.validate()?;
    let problem = problem_for(config)?;
    let reference = ReferenceField::build(&problem)?;
    let mut records = Vec::with_capacity(config.grids.len());
    for &n in &config.grids {
        let rec = run_single(config, &problem, &reference, n);
        on_record(&rec);
        records.push(rec);
    }
    fill_rates(&mut records);
    Ok(RunReport {
        config: config.clone(),
        records,
    })
}

pub fn run_suite(suite: &SuiteConfig) -> Result<Vec<RunReport>> {
    suite.experiments.iter().map(run_experiment).collect()
}

/// Solution sampled at `per_cell` equispaced points per element, both ends
/// included.
pub fn sample_solution(scheme: &dyn Scheme, per_cell: usize) -> (Vec<f64>, Vec<f64>) {
    let grid = scheme.grid();
    let state = scheme.state();
    let count = grid.n() * per_cell.max(1);
    let (a, b) = (grid.x_left(), grid.x_right());
    (0..=count)
        .map(|k| {
            let x = a + (b - a) * k as f64 / count as f64;
            (x, state.eval(grid, x))
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Variant;
    use crate::viscosity::ViscosityParams;

    fn record(n: usize, err: Option<f64>) -> RunRecord {
        RunRecord {
            n,
            h: 2.0 / n as f64,
            l2_error: err,
            rate: None,
            nm_avg: None,
            steps: 0,
            dt: None,
            walltime_s: 0.0,
            overshoot: None,
            failure: None,
        }
    }

    #[test]
    fn synthetic_rates_are_exact() {
        for p in [1.0, 2.0, 3.0, 5.5] {
            let mut recs: Vec<RunRecord> = (0..5)
                .map(|k| record(40 << k, Some(0.3 * 2f64.powf(-p * k as f64))))
                .collect();
            fill_rates(&mut recs);
            assert_eq!(recs[0].rate, None);
            for r in &recs[1..] {
                assert!((r.rate.unwrap() - p).abs() < 1e-12, "{:?}", r.rate);
            }
            let cfg = ExperimentConfig::defaults(ExperimentId::StationaryShock, Variant::FV1).unwrap();
            let report = RunReport {
                config: cfg,
                records: recs,
            };
            assert!((report.fitted_rate().unwrap() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn failed_grids_break_rates() {
        let mut recs = vec![record(40, Some(1.0)), record(80, None), record(160, Some(0.25))];
        fill_rates(&mut recs);
        assert!(recs.iter().all(|r| r.rate.is_none()));
    }

    #[test]
    fn no_viscosity_means_no_nm() {
        let mut cfg = ExperimentConfig::defaults(ExperimentId::SineNWave, Variant::FV1).unwrap();
        cfg.viscosity = ViscosityParams::None;
        cfg.grids = vec![40, 80];
        let report = run_experiment(&cfg).unwrap();
        for (_, nm) in nm_diagnostic(&report) {
            assert_eq!(nm, Some(0.0));
        }
    }

    #[test]
    fn solver_failures_are_recorded() {
        let cfg = ExperimentConfig::defaults(ExperimentId::SineNWave, Variant::FV1).unwrap();
        let problem = problem_for(&cfg).unwrap();
        let reference = ReferenceField::build(&problem).unwrap();
        let bad = run_single(&cfg, &problem, &reference, 0);
        assert!(bad.failure.is_some() && bad.l2_error.is_none());
        let good = run_single(&cfg, &problem, &reference, 40);
        assert!(good.failure.is_none() && good.l2_error.unwrap() > 0.0);
    }

    #[test]
    fn fv_stationary_shock_errors_decrease() {
        let mut cfg = ExperimentConfig::defaults(ExperimentId::StationaryShock, Variant::FV1).unwrap();
        cfg.grids = vec![40, 80, 160];
        let report = run_experiment(&cfg).unwrap();
        let errs: Vec<f64> = report.errors().into_iter().map(Option::unwrap).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }
}
