//! Real symmetric eigendecomposition via Householder tridiagonalization and
//! implicit-shift QL. This is the hot path of the SDP solver (one projection
//! per iteration on a 125x125 moment matrix), so it works on flat `f64`
//! buffers instead of `ComplexMatrix`.

/// Decompose a symmetric `n x n` matrix stored row-major in `a`.
/// On return `a` holds the eigenvectors (column k = eigenvector k) and the
/// returned vector holds eigenvalues in ascending order.
pub fn sym_eig_inplace(a: &mut [f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(a, n, &mut d, &mut e);
    tql2(a, n, &mut d, &mut e);
    d
}

/// Project a symmetric matrix onto the PSD cone in place.
/// Returns (min eigenvalue before projection, max eigenvalue).
pub fn psd_project_inplace(a: &mut [f64], n: usize, scratch: &mut Vec<f64>) -> (f64, f64) {
    scratch.clear();
    scratch.extend_from_slice(a);
    let vals = sym_eig_inplace(scratch, n);
    let lam_min = vals[0];
    let lam_max = vals[n - 1];
    // a = sum_{lam>0} lam v v^T
    for x in a.iter_mut() {
        *x = 0.0;
    }
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        for r in 0..n {
            let lv = lam * scratch[r * n + k];
            if lv == 0.0 {
                continue;
            }
            let row = r * n;
            for c in 0..n {
                a[row + c] += lv * scratch[c * n + k];
            }
        }
    }
    // enforce exact symmetry
    for r in 0..n {
        for c in (r + 1)..n {
            let m = 0.5 * (a[r * n + c] + a[c * n + r]);
            a[r * n + c] = m;
            a[c * n + r] = m;
        }
    }
    (lam_min, lam_max)
}

/// Minimum eigenvalue of a symmetric matrix (non-destructive).
pub fn min_eig(a: &[f64], n: usize) -> f64 {
    let mut buf = a.to_vec();
    let vals = sym_eig_inplace(&mut buf, n);
    vals[0]
}

// Householder reduction to tridiagonal form (EISPACK tred2 layout:
// on exit `a` holds the orthogonal transform Q, d the diagonal, e the
// subdiagonal in e[1..n]).
fn tred2(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        let mut scale = 0.0;
        if l > 0 {
            for k in 0..=l {
                scale += a[i * n + k].abs();
            }
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let mut f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                f = 0.0;
                for j in 0..=l {
                    a[j * n + i] = a[i * n + j] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        let l = i;
        if d[i] != 0.0 {
            for j in 0..l {
                let mut g = 0.0;
                for k in 0..l {
                    g += a[i * n + k] * a[k * n + j];
                }
                for k in 0..l {
                    a[k * n + j] -= g * a[k * n + i];
                }
            }
        }
        d[i] = a[i * n + i];
        a[i * n + i] = 1.0;
        for j in 0..l {
            a[j * n + i] = 0.0;
            a[i * n + j] = 0.0;
        }
    }
}

// QL with implicit shifts on the tridiagonal form, accumulating the
// transformations into `a` (which enters holding Q from tred2).
fn tql2(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    if n == 1 {
        return;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 50, "QL iteration failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = a[k * n + i + 1];
                    a[k * n + i + 1] = s * a[k * n + i] + c * f;
                    a[k * n + i] = c * a[k * n + i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    // sort ascending, permuting eigenvector columns
    for i in 0..n {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                a.swap(r * n + i, r * n + k);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_sym(n: usize, seed: &mut u64) -> Vec<f64> {
        let next = |s: &mut u64| {
            *s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((*s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            for c in r..n {
                let v = next(seed);
                a[r * n + c] = v;
                a[c * n + r] = v;
            }
        }
        a
    }

    #[test]
    fn reconstruction() {
        let n = 30;
        let mut seed = 123u64;
        let a = random_sym(n, &mut seed);
        let mut q = a.clone();
        let vals = sym_eig_inplace(&mut q, n);
        // check A v = lambda v for every pair
        for k in 0..n {
            let mut err: f64 = 0.0;
            for r in 0..n {
                let mut av = 0.0;
                for c in 0..n {
                    av += a[r * n + c] * q[c * n + k];
                }
                err = err.max((av - vals[k] * q[r * n + k]).abs());
            }
            assert!(err < 1e-10, "eigenpair {k} residual {err}");
        }
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-14);
        }
    }

    #[test]
    fn projection_is_psd_and_idempotent() {
        let n = 20;
        let mut seed = 9u64;
        let mut a = random_sym(n, &mut seed);
        let mut scratch = Vec::new();
        psd_project_inplace(&mut a, n, &mut scratch);
        assert!(min_eig(&a, n) >= -1e-11);
        let b = a.clone();
        psd_project_inplace(&mut a, n, &mut scratch);
        let diff: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-10);
    }
}
