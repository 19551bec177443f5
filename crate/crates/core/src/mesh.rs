//! Uniform grids, solution containers and L2 error norms.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::legendre::{eval_legendre_series, QuadratureRule};
use crate::taylor::{horner, HermiteInterpolator};

/// Uniform 1D grid with nodes `x_i = x_left + i h`, `i = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    x_left: f64,
    x_right: f64,
    n: usize,
    h: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn uniform(x_left: f64, x_right: f64, n: usize) -> Result<Self> {
        if !x_left.is_finite() || !x_right.is_finite() {
            return Err(invalid("grid bounds must be finite"));
        }
        if x_right <= x_left {
            return Err(invalid(format!("empty domain [{x_left}, {x_right}]")));
        }
        if n < 2 {
            return Err(invalid(format!("grid needs at least 2 elements, got {n}")));
        }
        let h = (x_right - x_left) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| x_left + i as f64 * h).collect();
        nodes[n] = x_right;
        Ok(Self {
            x_left,
            x_right,
            n,
            h,
            nodes,
        })
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    /// Number of elements (cells between nodes).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    /// Index of the element `[x_i, x_{i+1}]` containing `x`, clamped to the grid.
    pub fn element_of(&self, x: f64) -> usize {
        let i = ((x - self.x_left) / self.h).floor();
        (i.max(0.0) as usize).min(self.n - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryCondition {
    Periodic,
    Dirichlet { left: f64, right: f64 },
}

impl BoundaryCondition {
    pub fn dirichlet(left: f64, right: f64) -> Result<Self> {
        if !left.is_finite() || !right.is_finite() {
            return Err(invalid("Dirichlet values must be finite"));
        }
        Ok(Self::Dirichlet { left, right })
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Self::Periodic)
    }

    /// Number of nodal unknowns on `grid`: `n` when node `n` aliases node 0.
    pub fn node_count(&self, grid: &Grid) -> usize {
        if self.is_periodic() {
            grid.n()
        } else {
            grid.n() + 1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "FV")]
    FiniteVolume,
    #[serde(rename = "DG")]
    Dg,
    #[serde(rename = "Hermite")]
    Hermite,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::FiniteVolume => "FV",
            Method::Dg => "DG",
            Method::Hermite => "Hermite",
        })
    }
}

/// Method-specific degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub enum Dof {
    /// Node-centered cell values; `n` entries when periodic, else `n+1`.
    FiniteVolume { values: Vec<f64> },
    /// `n` elements of `degree+1` Legendre coefficients, element-major.
    Dg { degree: usize, modal: Vec<f64> },
    /// Scaled Taylor coefficients at the primal nodes, node-major.
    Hermite { degree: usize, taylor: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub dof: Dof,
    pub time: f64,
    /// Entropy at the residual sample points from the previous step.
    pub prev_entropy: Option<Vec<f64>>,
}

impl SolutionState {
    pub fn method(&self) -> Method {
        match self.dof {
            Dof::FiniteVolume { .. } => Method::FiniteVolume,
            Dof::Dg { .. } => Method::Dg,
            Dof::Hermite { .. } => Method::Hermite,
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        let (len, ok) = match &self.dof {
            Dof::FiniteVolume { values } => (values.len(), values.len() == grid.n() || values.len() == grid.n() + 1),
            Dof::Dg { degree, modal } => (modal.len(), modal.len() == grid.n() * (degree + 1)),
            Dof::Hermite { degree, taylor } => {
                let np = degree + 1;
                (
                    taylor.len(),
                    taylor.len() == grid.n() * np || taylor.len() == (grid.n() + 1) * np,
                )
            }
        };
        if !ok {
            return Err(invalid(format!(
                "{} state of length {len} does not fit a grid of {} elements",
                self.method(),
                grid.n()
            )));
        }
        let data = match &self.dof {
            Dof::FiniteVolume { values } => values,
            Dof::Dg { modal, .. } => modal,
            Dof::Hermite { taylor, .. } => taylor,
        };
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NumericFailure {
                what: format!("non-finite {} degree of freedom", self.method()),
                location: format!("index {i}"),
            });
        }
        Ok(())
    }

    /// Evaluates the piecewise representation at `x`.
    pub fn eval(&self, grid: &Grid, x: f64) -> f64 {
        match &self.dof {
            Dof::FiniteVolume { values } => {
                let i = ((x - grid.x_left()) / grid.h()).round().max(0.0) as usize;
                values[i % values.len()]
            }
            Dof::Dg { degree, modal } => {
                let np = degree + 1;
                let e = grid.element_of(x);
                let xi = 2.0 * (x - grid.nodes()[e]) / grid.h() - 1.0;
                eval_legendre_series(&modal[e * np..(e + 1) * np], xi)
            }
            Dof::Hermite { degree, taylor } => {
                let np = degree + 1;
                let nodes = taylor.len() / np;
                let e = grid.element_of(x);
                let l = e;
                let r = (e + 1) % nodes;
                let interp = HermiteInterpolator::new(*degree);
                let c = interp.interpolate(&taylor[l * np..(l + 1) * np], &taylor[r * np..(r + 1) * np]);
                let eta = (x - grid.nodes()[e]) / grid.h() - 0.5;
                horner(&c, eta)
            }
        }
    }
}

/// L2 error `(∫ (u_h - reference)² dx)^{1/2}` of the piecewise representation.
///
/// Quadrature: 8-point Gauss on each half-cell (FV), `m+3`-point Gauss per
/// element (dG), 32 equispaced trapezoid samples of the Hermite interpolant
/// per cell (Hermite).
pub fn error_norm(state: &SolutionState, reference: impl Fn(f64) -> f64, grid: &Grid) -> Result<f64> {
    state.validate(grid)?;
    let h = grid.h();
    let nodes = grid.nodes();
    let sum = match &state.dof {
        Dof::FiniteVolume { values } => {
            let rule = QuadratureRule::gauss_legendre(8)?;
            let len = values.len();
            let mut s = 0.0;
            for i in 0..grid.n() {
                let (ul, ur) = (values[i], values[(i + 1) % len]);
                let mid = nodes[i] + 0.5 * h;
                s += rule.integrate(nodes[i], mid, |x| (ul - reference(x)).powi(2));
                s += rule.integrate(mid, nodes[i + 1], |x| (ur - reference(x)).powi(2));
            }
            s
        }
        Dof::Dg { degree, modal } => {
            let np = degree + 1;
            let rule = QuadratureRule::gauss_legendre(degree + 3)?;
            let mut s = 0.0;
            for e in 0..grid.n() {
                let c = &modal[e * np..(e + 1) * np];
                s += rule.integrate(-1.0, 1.0, |xi| {
                    let x = nodes[e] + 0.5 * (xi + 1.0) * h;
                    (eval_legendre_series(c, xi) - reference(x)).powi(2)
                }) * 0.5
                    * h;
            }
            s
        }
        Dof::Hermite { degree, taylor } => {
            const SAMPLES: usize = 32;
            let np = degree + 1;
            let count = taylor.len() / np;
            let interp = HermiteInterpolator::new(*degree);
            let mut c = vec![0.0; 2 * np];
            let dx = h / (SAMPLES - 1) as f64;
            let mut s = 0.0;
            for e in 0..grid.n() {
                let r = (e + 1) % count;
                interp.interpolate_into(&taylor[e * np..(e + 1) * np], &taylor[r * np..(r + 1) * np], &mut c);
                for j in 0..SAMPLES {
                    let w = if j == 0 || j == SAMPLES - 1 { 0.5 } else { 1.0 };
                    let eta = j as f64 / (SAMPLES - 1) as f64 - 0.5;
                    let x = nodes[e] + (eta + 0.5) * h;
                    s += w * dx * (horner(&c, eta) - reference(x)).powi(2);
                }
            }
            s
        }
    };
    if !sum.is_finite() {
        return Err(Error::NumericFailure {
            what: "non-finite error integral (reference or state)".into(),
            location: format!("time {}", state.time),
        });
    }
    Ok(sum.sqrt())
}
