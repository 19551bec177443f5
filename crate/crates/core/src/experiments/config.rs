//! Experiment configuration: TOML parsing, per-experiment defaults and
//! validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Method;
use crate::problem::{ExperimentId, GODUNOV_RESOLUTION};
use crate::viscosity::{EntropyViscosityParams, SensorParams, ViscosityParams};

/// Method/viscosity combination as labelled in the result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    FV1,
    FV2,
    DG1,
    DG2,
    DGP,
    H1,
    H2,
    HP,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::FV1,
        Variant::FV2,
        Variant::DG1,
        Variant::DG2,
        Variant::DGP,
        Variant::H1,
        Variant::H2,
        Variant::HP,
    ];

    pub fn method(&self) -> Method {
        match self {
            Variant::FV1 | Variant::FV2 => Method::FiniteVolume,
            Variant::DG1 | Variant::DG2 | Variant::DGP => Method::Dg,
            Variant::H1 | Variant::H2 | Variant::HP => Method::Hermite,
        }
    }

    /// `None` for the sensor variants.
    pub fn beta(&self) -> Option<u8> {
        match self {
            Variant::FV1 | Variant::DG1 | Variant::H1 => Some(1),
            Variant::FV2 | Variant::DG2 | Variant::H2 => Some(2),
            Variant::DGP | Variant::HP => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::FV1 => "FV1",
            Variant::FV2 => "FV2",
            Variant::DG1 => "DG1",
            Variant::DG2 => "DG2",
            Variant::DGP => "DGP",
            Variant::H1 => "H1",
            Variant::H2 => "H2",
            Variant::HP => "HP",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown variant '{s}'")))
    }
}

/// Polynomial degree used by the dG and Hermite variants unless overridden.
pub const DEFAULT_DEGREE: usize = 4;

pub fn default_grids(id: ExperimentId) -> Vec<usize> {
    match id {
        ExperimentId::TwoShock => vec![320, 2560],
        _ => vec![40, 80, 160, 320, 640],
    }
}

/// Viscosity parameters used for `variant` on experiment `id`.
///
/// Returns `None` where no default exists (finite volume and sensor
/// variants on the two-shock problem).
pub fn default_params(id: ExperimentId, variant: Variant) -> Option<ViscosityParams> {
    use ExperimentId::*;
    use Variant::*;
    let ev = |a_ev: f64, a_max: f64, beta: u8| {
        Some(ViscosityParams::EntropyViscosity(EntropyViscosityParams {
            alpha_ev: a_ev,
            alpha_max: a_max,
            beta,
        }))
    };
    let sensor =
        |s0: f64, kappa: f64, eps0: f64| Some(ViscosityParams::SmoothnessSensor(SensorParams { s0, kappa, eps0 }));
    let l256 = (1.0f64 / 256.0).log10();
    match (id, variant) {
        (StationaryShock | MovingShock, FV1) => ev(0.7, 0.5, 1),
        (StationaryShock | MovingShock, FV2) => ev(10.0, 0.5, 2),
        (StationaryShock | MovingShock, DG1) => ev(1.0, 0.25, 1),
        (StationaryShock | MovingShock, DG2) => ev(10.0, 0.25, 2),
        (StationaryShock | MovingShock, H1) => ev(1.0, 0.4, 1),
        (StationaryShock | MovingShock, H2) => ev(10.0, 0.4, 2),
        (StationaryShock, DGP) => sensor(-1.0, 2.0, 0.5),
        (MovingShock, DGP) => sensor(2.0 * l256, 1.0, 0.5),
        (StationaryShock | MovingShock | SineNWave, HP) => sensor(l256, 1.0, 0.125),
        (SineNWave, FV1) => ev(2.0, 0.5, 1),
        (SineNWave, FV2) => ev(20.0, 0.5, 2),
        (SineNWave, DG1) => ev(0.1, 0.125, 1),
        (SineNWave, DG2) => ev(1.0, 0.125, 2),
        (SineNWave, H1) => ev(0.4, 0.4, 1),
        (SineNWave, H2) => ev(5.0, 0.4, 2),
        (SineNWave, DGP) => sensor(2.0 * l256, 2.0, 0.05),
        (TwoShock, DG1) => ev(0.5, 0.25, 1),
        (TwoShock, DG2) => ev(10.0, 0.25, 2),
        (TwoShock, H1) => ev(1.0, 0.125, 1),
        (TwoShock, H2) => ev(50.0, 0.125, 2),
        (TwoShock, FV1 | FV2 | DGP | HP) => None,
    }
}

/// One validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub variant: Variant,
    pub method: Method,
    /// Polynomial degree (dG, Hermite); 0 for finite volumes.
    pub degree: usize,
    pub viscosity: ViscosityParams,
    pub grids: Vec<usize>,
    pub final_time: f64,
    /// Cells of the Godunov reference, where one is used.
    pub reference_resolution: usize,
}

impl ExperimentConfig {
    /// The experiment with all defaults.
    pub fn defaults(id: ExperimentId, variant: Variant) -> Result<Self> {
        let viscosity = default_params(id, variant).ok_or_else(|| {
            Error::Validation(format!(
                "{variant} has no default parameters for {id}; set them explicitly"
            ))
        })?;
        Ok(Self {
            id,
            variant,
            method: variant.method(),
            degree: match variant.method() {
                Method::FiniteVolume => 0,
                _ => DEFAULT_DEGREE,
            },
            viscosity,
            grids: default_grids(id),
            final_time: crate::problem::initial_data_catalog(id).final_time,
            reference_resolution: GODUNOV_RESOLUTION,
        })
    }

    /// `β` of the entropy viscosity, if that mode is active.
    pub fn beta(&self) -> Option<u8> {
        match self.viscosity {
            ViscosityParams::EntropyViscosity(p) => Some(p.beta),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grids.is_empty() {
            return Err(Error::Validation("grid list is empty".into()));
        }
        if self.grids[0] < 2 {
            return Err(Error::Validation("grids need at least 2 elements".into()));
        }
        if self.grids.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "grid sizes must be strictly increasing: {:?}",
                self.grids
            )));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::Validation(format!(
                "final_time must be positive, got {}",
                self.final_time
            )));
        }
        if self.method != Method::FiniteVolume && self.degree < 1 {
            return Err(Error::Validation("degree must be >= 1".into()));
        }
        if self.method == Method::FiniteVolume && matches!(self.viscosity, ViscosityParams::SmoothnessSensor(_)) {
            return Err(Error::Validation(
                "the smoothness sensor needs a dG or Hermite method".into(),
            ));
        }
        match self.viscosity {
            ViscosityParams::EntropyViscosity(p) => {
                EntropyViscosityParams::new(p.alpha_ev, p.alpha_max, p.beta)
                    .map_err(|e| Error::Validation(e.to_string()))?;
            }
            ViscosityParams::SmoothnessSensor(p) => {
                SensorParams::new(p.s0, p.kappa, p.eps0).map_err(|e| Error::Validation(e.to_string()))?;
            }
            ViscosityParams::LaxFriedrichs { alpha_max } => {
                if !(alpha_max > 0.0 && alpha_max.is_finite()) {
                    return Err(Error::Validation(format!(
                        "alpha_max must be positive, got {alpha_max}"
                    )));
                }
            }
            ViscosityParams::None => {}
        }
        if self.reference_resolution < 1 << 14 {
            return Err(Error::Validation(format!(
                "reference_resolution must be at least 16384, got {}",
                self.reference_resolution
            )));
        }
        Ok(())
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub out_dir: Option<PathBuf>,
    pub experiments: Vec<ExperimentConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    out_dir: Option<PathBuf>,
    #[serde(default)]
    experiment: Vec<RawExperiment>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    id: String,
    variant: String,
    degree: Option<usize>,
    mode: Option<String>,
    alpha_ev: Option<f64>,
    alpha_max: Option<f64>,
    beta: Option<i64>,
    s0: Option<f64>,
    kappa: Option<f64>,
    eps0: Option<f64>,
    grids: Option<Vec<usize>>,
    final_time: Option<f64>,
    reference_resolution: Option<usize>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a configuration file's contents.
pub fn parse_config(text: &str) -> Result<SuiteConfig> {
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let experiments = raw.experiment.into_iter().map(resolve).collect::<Result<Vec<_>>>()?;
    Ok(SuiteConfig {
        out_dir: raw.out_dir,
        experiments,
    })
}

pub fn parse_config_file(path: &Path) -> Result<SuiteConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn resolve(raw: RawExperiment) -> Result<ExperimentConfig> {
    let id: ExperimentId = raw.id.parse().map_err(|e: Error| Error::Validation(e.to_string()))?;
    let variant: Variant = raw.variant.parse()?;
    let method = variant.method();
    let default = default_params(id, variant);

    let beta = match raw.beta {
        None => None,
        Some(b @ (1 | 2)) => Some(b as u8),
        Some(b) => return Err(Error::Validation(format!("beta must be 1 or 2, got {b}"))),
    };
    let sensor_keys = raw.s0.is_some() || raw.kappa.is_some() || raw.eps0.is_some();
    let ev_keys = raw.alpha_ev.is_some() || beta.is_some();

    let missing = |what: &str| Error::Validation(format!("{variant} on {id} has no default {what}; set it explicitly"));
    let viscosity = match raw.mode.as_deref() {
        Some("none") => ViscosityParams::None,
        Some("max") => {
            let alpha_max = match (raw.alpha_max, default) {
                (Some(a), _) => a,
                (None, Some(ViscosityParams::EntropyViscosity(p))) => p.alpha_max,
                _ => return Err(missing("alpha_max")),
            };
            ViscosityParams::LaxFriedrichs { alpha_max }
        }
        Some(other) => {
            return Err(Error::Validation(format!(
                "unknown mode '{other}' (expected \"none\" or \"max\")"
            )))
        }
        None if variant.beta().is_some() => {
            if sensor_keys {
                return Err(Error::Validation(format!(
                    "{variant} uses entropy viscosity; s0/kappa/eps0 do not apply"
                )));
            }
            let base = match default {
                Some(ViscosityParams::EntropyViscosity(p)) => Some(p),
                _ => None,
            };
            let alpha_ev = raw
                .alpha_ev
                .or(base.map(|p| p.alpha_ev))
                .ok_or_else(|| missing("alpha_ev"))?;
            let alpha_max = raw
                .alpha_max
                .or(base.map(|p| p.alpha_max))
                .ok_or_else(|| missing("alpha_max"))?;
            let beta = beta.or(variant.beta()).expect("entropy viscosity variant");
            ViscosityParams::EntropyViscosity(EntropyViscosityParams {
                alpha_ev,
                alpha_max,
                beta,
            })
        }
        None => {
            if ev_keys || raw.alpha_max.is_some() {
                return Err(Error::Validation(format!(
                    "{variant} uses the smoothness sensor; alpha_ev/alpha_max/beta do not apply"
                )));
            }
            let base = match default {
                Some(ViscosityParams::SmoothnessSensor(p)) => Some(p),
                _ => None,
            };
            ViscosityParams::SmoothnessSensor(SensorParams {
                s0: raw.s0.or(base.map(|p| p.s0)).ok_or_else(|| missing("s0"))?,
                kappa: raw.kappa.or(base.map(|p| p.kappa)).ok_or_else(|| missing("kappa"))?,
                eps0: raw.eps0.or(base.map(|p| p.eps0)).ok_or_else(|| missing("eps0"))?,
            })
        }
    };

    let degree = match method {
        Method::FiniteVolume => {
            if raw.degree.is_some_and(|d| d != 0) {
                return Err(Error::Validation("finite volume variants take no degree".into()));
            }
            0
        }
        _ => raw.degree.unwrap_or(DEFAULT_DEGREE),
    };
    let config = ExperimentConfig {
        id,
        variant,
        method,
        degree,
        viscosity,
        grids: raw.grids.unwrap_or_else(|| default_grids(id)),
        final_time: raw
            .final_time
            .unwrap_or_else(|| crate::problem::initial_data_catalog(id).final_time),
        reference_resolution: raw.reference_resolution.unwrap_or(GODUNOV_RESOLUTION),
    };
    config.validate()?;
    Ok(config)
}
