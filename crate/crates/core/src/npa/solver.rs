//! A small dense semidefinite solver specialized to moment-matrix problems:
//! ADMM splitting between the affine moment structure (with equality
//! constraints) and the PSD cone.
//!
//! The structure exploited throughout: distinct moments occupy disjoint cell
//! sets of the matrix, so the quadratic coupling in the y-update is diagonal
//! and the equality-constrained step reduces to one small KKT solve whose
//! normal matrix is factored once.

use crate::error::{Error, Result};
use crate::kernel::realsym::{min_eig, psd_project_inplace, sym_eig_inplace};

use super::problem::{SdpProblem, BASIS_SIZE};

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Stopping tolerance on the splitting residual ‖M(y) − S‖_F.
    pub tol_primal: f64,
    /// Stopping tolerance on the dual residual ρ‖S − S_prev‖_F.
    pub tol_dual: f64,
    pub rho: f64,
    pub over_relax: f64,
    /// Check convergence and adapt ρ every this many iterations.
    pub check_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            tol_primal: 1e-7,
            tol_dual: 1e-7,
            rho: 1.0,
            over_relax: 1.6,
            check_every: 25,
        }
    }
}

/// Internal iterates, reusable to warm-start neighbouring problems.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub moments: Vec<f64>,
    pub objective_value: f64,
    /// Worst equality-constraint violation (including normalization).
    pub primal_residual: f64,
    /// Most negative eigenvalue of the assembled moment matrix (0 if PSD).
    pub psd_residual: f64,
    /// Final splitting residual ‖M(y) − S‖_F; a heuristic optimality gap.
    pub gap_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub state: SolverState,
}

struct Kkt {
    /// Constraint rows (normalization first), dense over moments.
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
    /// Pseudo-inverse of B·D⁻¹·Bᵀ.
    normal_inv: Vec<f64>,
    inv_mult: Vec<f64>,
}

impl Kkt {
    fn build(problem: &SdpProblem) -> Result<Self> {
        let k = problem.moment_count();
        let id = problem
            .moment_id(&super::word::Word::identity())
            .ok_or_else(|| Error::Contract("identity moment missing".into()))?;
        let mut rows = Vec::with_capacity(problem.constraints.len() + 1);
        let mut targets = Vec::with_capacity(problem.constraints.len() + 1);
        let mut norm_row = vec![0.0; k];
        norm_row[id] = 1.0;
        rows.push(norm_row);
        targets.push(1.0);
        for (row, t) in &problem.constraints {
            rows.push(row.clone());
            targets.push(*t);
        }
        let inv_mult: Vec<f64> = problem.multiplicity.iter().map(|&n| 1.0 / n as f64).collect();

        let m = rows.len();
        let mut normal = vec![0.0; m * m];
        for a in 0..m {
            for b in a..m {
                let v: f64 = (0..k).map(|i| rows[a][i] * inv_mult[i] * rows[b][i]).sum();
                normal[a * m + b] = v;
                normal[b * m + a] = v;
            }
        }
        // Pseudo-inverse through the eigendecomposition of the small normal
        // matrix. The row set is deliberately redundant (the two projector
        // marginals of one observable sum to the normalization row), so
        // near-zero eigenvalues are dropped; the system stays consistent and
        // the projection picks the minimum-norm multipliers.
        let mut work = normal.clone();
        let vals = sym_eig_inplace(&mut work, m);
        let scale = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut inv = vec![0.0; m * m];
        for e in 0..m {
            if vals[e].abs() < 1e-12 * scale.max(1.0) {
                continue;
            }
            let w = 1.0 / vals[e];
            for a in 0..m {
                let va = work[a * m + e] * w;
                for b in 0..m {
                    inv[a * m + b] += va * work[b * m + e];
                }
            }
        }
        Ok(Self {
            rows,
            targets,
            normal_inv: inv,
            inv_mult,
        })
    }

    /// y = argmin c·y + (ρ/2)·Σ n_k(y_k − t̄_k)²  subject to  B y = targets.
    fn project(&self, tbar: &[f64], c: &[f64], rho: f64, y: &mut [f64]) {
        let m = self.rows.len();
        let k = tbar.len();
        let mut rhs = vec![0.0; m];
        for a in 0..m {
            let mut bt = 0.0;
            let mut bdc = 0.0;
            for i in 0..k {
                let r = self.rows[a][i];
                if r != 0.0 {
                    bt += r * tbar[i];
                    bdc += r * self.inv_mult[i] * c[i];
                }
            }
            rhs[a] = rho * (bt - self.targets[a]) - bdc;
        }
        let mut lambda = vec![0.0; m];
        for a in 0..m {
            lambda[a] = (0..m).map(|b| self.normal_inv[a * m + b] * rhs[b]).sum();
        }
        for i in 0..k {
            let mut bl = 0.0;
            for a in 0..m {
                let r = self.rows[a][i];
                if r != 0.0 {
                    bl += r * lambda[a];
                }
            }
            y[i] = tbar[i] - self.inv_mult[i] * (c[i] + bl) / rho;
        }
    }

    fn residual(&self, y: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.targets)
            .map(|(row, t)| (SdpProblem::evaluate(row, y) - t).abs())
            .fold(0.0, f64::max)
    }
}

/// Solve the moment SDP, optionally continuing from a previous state.
pub fn solve(
    problem: &SdpProblem,
    opts: &SolverOptions,
    warm: Option<&SolverState>,
) -> Result<SdpSolution> {
    let k = problem.moment_count();
    let dim = BASIS_SIZE;
    let cells = dim * dim;
    let kkt = Kkt::build(problem)?;

    let (mut y, mut s, mut u, mut rho) = match warm {
        Some(st) if st.y.len() == k => (st.y.clone(), st.s.clone(), st.u.clone(), st.rho),
        _ => (vec![0.0; k], vec![0.0; cells], vec![0.0; cells], opts.rho),
    };

    let mut m = vec![0.0; cells];
    let mut tbar = vec![0.0; k];
    let mut a_hat = vec![0.0; cells];
    let mut scratch = vec![0.0; cells];
    let mut r_norm = f64::INFINITY;
    let mut d_norm = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;

        // y-step: average S − U/ρ over each moment's support, then the
        // equality-constrained diagonal QP.
        tbar.iter_mut().for_each(|v| *v = 0.0);
        for (cell, &id) in problem.entry_moment.iter().enumerate() {
            tbar[id] += s[cell] - u[cell] / rho;
        }
        for (t, &im) in tbar.iter_mut().zip(&kkt.inv_mult) {
            *t *= im;
        }
        kkt.project(&tbar, &problem.objective, rho, &mut y);

        problem.assemble(&y, &mut m);

        // Over-relaxed S-step and dual update.
        let gamma = opts.over_relax;
        for i in 0..cells {
            a_hat[i] = gamma * m[i] + (1.0 - gamma) * s[i];
        }
        let mut s_new = vec![0.0; cells];
        for i in 0..cells {
            s_new[i] = a_hat[i] + u[i] / rho;
        }
        psd_project_inplace(&mut s_new, dim, &mut scratch);
        for i in 0..cells {
            u[i] += rho * (a_hat[i] - s_new[i]);
        }

        if iterations % opts.check_every == 0 || iterations == opts.max_iter {
            r_norm = (0..cells).map(|i| (m[i] - s_new[i]).powi(2)).sum::<f64>().sqrt();
            d_norm = rho
                * (0..cells)
                    .map(|i| (s_new[i] - s[i]).powi(2))
                    .sum::<f64>()
                    .sqrt();
            if r_norm <= opts.tol_primal && d_norm <= opts.tol_dual {
                s = s_new;
                converged = true;
                break;
            }
            // Balance the residuals.
            if r_norm > 10.0 * d_norm && rho < 1e4 {
                rho *= 2.0;
            } else if d_norm > 10.0 * r_norm && rho > 1e-4 {
                rho *= 0.5;
            }
        }
        s = s_new;
    }

    problem.assemble(&y, &mut m);
    let psd_residual = min_eig(&m, dim).min(0.0);
    let objective_value = SdpProblem::evaluate(&problem.objective, &y);
    let primal_residual = kkt.residual(&y);
    Ok(SdpSolution {
        objective_value,
        primal_residual,
        psd_residual,
        gap_estimate: r_norm.min(d_norm.max(r_norm)),
        iterations,
        converged,
        state: SolverState {
            y: y.clone(),
            s,
            u,
            rho,
        },
        moments: y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::npa::problem::{ghz_state, ideal_observables, SdpProblem};

    #[test]
    fn realization_matrix_is_feasible() {
        // The exact quantum moments of the ideal realization assemble to a
        // PSD matrix satisfying every ε = 0 constraint: the basic soundness
        // property of the relaxation.
        let p = SdpProblem::build(0.0).unwrap();
        let y = p
            .realization_moments(&ghz_state().outer(), &ideal_observables())
            .unwrap();
        let mut m = vec![0.0; BASIS_SIZE * BASIS_SIZE];
        p.assemble(&y, &mut m);
        let lam = min_eig(&m, BASIS_SIZE);
        assert!(lam > -1e-9, "min eigenvalue {lam}");
        let kkt = Kkt::build(&p).unwrap();
        assert!(kkt.residual(&y) < 1e-10);
    }

    #[test]
    fn noisy_realizations_are_feasible_at_matching_epsilon() {
        use crate::kernel::ComplexMatrix;
        for &eps in &[0.05, 0.12] {
            let p = SdpProblem::build(eps).unwrap();
            let rho = ghz_state()
                .outer()
                .scale_re(1.0 - eps)
                .add(&ComplexMatrix::identity(8).scale_re(eps / 8.0));
            let y = p.realization_moments(&rho, &ideal_observables()).unwrap();
            let kkt = Kkt::build(&p).unwrap();
            assert!(kkt.residual(&y) < 1e-10, "eps={eps}");
            let mut m = vec![0.0; BASIS_SIZE * BASIS_SIZE];
            p.assemble(&y, &mut m);
            assert!(min_eig(&m, BASIS_SIZE) > -1e-9, "eps={eps}");
        }
    }

    #[test]
    fn solver_reaches_near_unit_fidelity_at_zero_noise() {
        let p = SdpProblem::build(0.0).unwrap();
        let opts = SolverOptions {
            max_iter: 60_000,
            ..Default::default()
        };
        let sol = solve(&p, &opts, None).unwrap();
        assert!(sol.primal_residual < 1e-6, "primal {}", sol.primal_residual);
        assert!(sol.psd_residual > -1e-6, "psd {}", sol.psd_residual);
        assert!(
            sol.objective_value > 0.999,
            "objective {}, converged {}, iters {}",
            sol.objective_value,
            sol.converged,
            sol.iterations
        );
    }

    #[test]
    fn solution_stays_below_exact_noisy_fidelity() {
        use crate::kernel::ComplexMatrix;
        let eps = 0.06;
        let p = SdpProblem::build(eps).unwrap();
        let opts = SolverOptions {
            max_iter: 60_000,
            ..Default::default()
        };
        let sol = solve(&p, &opts, None).unwrap();
        let rho = ghz_state()
            .outer()
            .scale_re(1.0 - eps)
            .add(&ComplexMatrix::identity(8).scale_re(eps / 8.0));
        let y = p.realization_moments(&rho, &ideal_observables()).unwrap();
        let exact = SdpProblem::evaluate(&p.objective, &y);
        assert!(
            exact >= sol.objective_value - 1e-4,
            "exact {exact} vs bound {}",
            sol.objective_value
        );
    }
}
