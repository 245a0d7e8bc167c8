//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use num_complex::Complex64;

use super::{ComplexMatrix, C_ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Off-diagonal Frobenius norm (upper triangle, doubled for symmetry).
fn off_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += 2.0 * a.get(p, q).norm_sqr();
        }
    }
    s.sqrt()
}

/// Input must already be exactly Hermitian; eigenvalues returned ascending.
pub fn herm_eig_impl(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = m.rows;
    if n == 1 {
        return Ok((vec![m.get(0, 0).re], ComplexMatrix::identity(1)));
    }
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.fro_norm().max(1e-300);

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        if off_norm(&a) <= 1e-13 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let abs = apq.norm();
                if abs <= 1e-300 || abs <= 1e-16 * scale {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let phi = apq / abs; // unit phase
                let tau = (aqq - app) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                let snp = phi.scale(sn);

                // A <- A J, where J[p][p]=cs, J[q][p]=-sn conj(phi),
                // J[p][q]=sn phi, J[q][q]=cs
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp.scale(cs) - snp.conj() * akq);
                    a.set(k, q, snp * akp + akq.scale(cs));
                }
                // A <- J† A
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, apk.scale(cs) - snp * aqk);
                    a.set(q, k, snp.conj() * apk + aqk.scale(cs));
                }
                // enforce exact zero on the pivot, keep diagonal real
                a.set(p, q, C_ZERO);
                a.set(q, p, C_ZERO);
                let dpp = a.get(p, p);
                let dqq = a.get(q, q);
                a.set(p, p, Complex64::new(dpp.re, 0.0));
                a.set(q, q, Complex64::new(dqq.re, 0.0));

                // V <- V J
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp.scale(cs) - snp.conj() * vkq);
                    v.set(k, q, snp * vkp + vkq.scale(cs));
                }
            }
        }
    }
    if !converged && off_norm(&a) > 1e-10 * scale {
        return Err(Error::EigNoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&x, &y| diag[x].partial_cmp(&diag[y]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vec_sorted = ComplexMatrix::zeros(n, n);
    for (newc, &oldc) in order.iter().enumerate() {
        for r in 0..n {
            vec_sorted.set(r, newc, v.get(r, oldc));
        }
    }
    Ok((vals, vec_sorted))
}

trait Scale {
    fn scale(self, s: f64) -> Self;
}

impl Scale for Complex64 {
    fn scale(self, s: f64) -> Self {
        Complex64::new(self.re * s, self.im * s)
    }
}
