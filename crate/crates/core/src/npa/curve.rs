//! The noise-robust fidelity curve G(ε): sequential solves over a noise
//! grid with warm starting, threshold interpolation, and CSV export.

use serde::Serialize;

use crate::error::{Error, Result};

use super::problem::SdpProblem;
use super::solver::{solve, SolverOptions, SolverState};

#[derive(Debug, Clone, Serialize)]
pub struct GPoint {
    pub epsilon: f64,
    pub g: f64,
    pub converged: bool,
    pub psd_residual: f64,
    pub primal_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GCurve {
    pub points: Vec<GPoint>,
    /// Noise level where the interpolated curve crosses 1/2, if bracketed.
    pub eps_star: Option<f64>,
}

/// Solve the SDP on each grid point in order, warm-starting every solve from
/// its predecessor's iterates.
pub fn g_curve(grid: &[f64], opts: &SolverOptions) -> Result<GCurve> {
    if grid.iter().any(|&e| !(0.0..=0.2).contains(&e)) {
        return Err(Error::Domain("noise grid must lie within [0, 0.2]".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("noise grid must be strictly increasing".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut warm: Option<SolverState> = None;
    for &eps in grid {
        let problem = SdpProblem::build(eps)?;
        let sol = solve(&problem, opts, warm.as_ref())?;
        points.push(GPoint {
            epsilon: eps,
            g: sol.objective_value,
            converged: sol.converged,
            psd_residual: sol.psd_residual,
            primal_residual: sol.primal_residual,
            iterations: sol.iterations,
        });
        warm = Some(sol.state);
    }
    let eps_star = crossing(&points, 0.5);
    Ok(GCurve { points, eps_star })
}

/// Linear interpolation of the first downward crossing of `level`.
pub(crate) fn crossing(points: &[GPoint], level: f64) -> Option<f64> {
    for w in points.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        if p.g >= level && q.g < level {
            let t = (p.g - level) / (p.g - q.g);
            return Some(p.epsilon + t * (q.epsilon - p.epsilon));
        }
    }
    None
}

impl GCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,G,converged,psd_residual,primal_residual\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:.6},{:.9},{},{:.3e},{:.3e}\n",
                p.epsilon, p.g, p.converged, p.psd_residual, p.primal_residual
            ));
        }
        out
    }

    /// Tabulated G for downstream consumers: (ε, G) pairs.
    pub fn table(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.epsilon, p.g)).collect()
    }
}
