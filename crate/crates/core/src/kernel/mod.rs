//! Dense complex linear algebra used by every other module: Kronecker
//! products, partial traces, Hermitian eigendecomposition, PSD projection
//! and least-squares solves.
//!
//! All registers in scope have dimension at most 2^10, so dense row-major
//! storage is used throughout.

mod eig;
pub mod realsym;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eig::herm_eig_impl;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

/// Ordered local dimensions of a tensor-product register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterShape {
    pub dims: Vec<usize>,
}

impl RegisterShape {
    pub fn new(dims: Vec<usize>) -> Self {
        assert!(dims.iter().all(|&d| d >= 1));
        Self { dims }
    }

    pub fn qubits(n: usize) -> Self {
        Self { dims: vec![2; n] }
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn sites(&self) -> usize {
        self.dims.len()
    }

    /// Row-major strides: stride of the last site is 1.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.dims.len();
        let mut s = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1);
        Self {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C_ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    /// Build from rows of real numbers.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let nr = rows.len();
        let nc = rows[0].len();
        Self::from_fn(nr, nc, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = entries[i];
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C_ZERO {
                    continue;
                }
                let row_out = i * other.cols;
                let row_b = k * other.cols;
                for j in 0..other.cols {
                    out.data[row_out + j] += a * other.data[row_b + j];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn dist_fro(&self, other: &Self) -> f64 {
        self.sub(other).fro_norm()
    }

    /// Max deviation from Hermitian symmetry.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut d: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                d = d.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol
    }

    /// Hermitian part (m + m†)/2.
    pub fn symmetrize(&self) -> Self {
        self.add(&self.dagger()).scale_re(0.5)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C_ZERO; self.rows];
        for r in 0..self.rows {
            let row = r * self.cols;
            let mut acc = C_ZERO;
            for c in 0..self.cols {
                acc += self.data[row + c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// Re Tr(self · rho), the expectation value layout used everywhere.
    pub fn expect_with(&self, rho: &Self) -> f64 {
        assert_eq!(self.cols, rho.rows);
        let mut acc = C_ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * rho.data[k * rho.cols + i];
            }
        }
        acc.re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = herm_eig(self)?;
        Ok(vals[0])
    }
}

/// Kronecker product; realizes every "⊗" in scope.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let av = a.get(ar, ac);
            if av == C_ZERO {
                continue;
            }
            for br in 0..b.rows {
                let orow = (ar * b.rows + br) * cols + ac * b.cols;
                let brow = br * b.cols;
                for bc in 0..b.cols {
                    out.data[orow + bc] = av * b.data[brow + bc];
                }
            }
        }
    }
    out
}

/// Kronecker product over a sequence of factors, left to right.
pub fn kron_all(ms: &[ComplexMatrix]) -> ComplexMatrix {
    assert!(!ms.is_empty());
    let mut acc = ms[0].clone();
    for m in &ms[1..] {
        acc = kron(&acc, m);
    }
    acc
}

/// Reduced matrix on the kept sites; trace is preserved.
pub fn partial_trace(
    m: &ComplexMatrix,
    shape: &RegisterShape,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows != shape.dim() {
        return Err(Error::ShapeMismatch(format!(
            "matrix dim {} does not match register dim {}",
            m.rows,
            shape.dim()
        )));
    }
    let nsites = shape.sites();
    if keep.iter().any(|&k| k >= nsites) {
        return Err(Error::ShapeMismatch("keep index out of range".into()));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..nsites).filter(|s| !keep_sorted.contains(s)).collect();
    let strides = shape.strides();

    // Enumerate full-register offsets of the kept / traced sub-indices.
    let offsets = |sites: &[usize]| -> Vec<usize> {
        let dim: usize = sites.iter().map(|&s| shape.dims[s]).product();
        let mut out = Vec::with_capacity(dim);
        for mut idx in 0..dim {
            let mut full = 0usize;
            for &s in sites.iter().rev() {
                let d = shape.dims[s];
                full += (idx % d) * strides[s];
                idx /= d;
            }
            out.push(full);
        }
        out
    };
    let keep_off = offsets(&keep_sorted);
    let tr_off = offsets(&traced);

    let kd = keep_off.len();
    let mut out = ComplexMatrix::zeros(kd, kd);
    for (ik, &ro) in keep_off.iter().enumerate() {
        for (jk, &co) in keep_off.iter().enumerate() {
            let mut acc = C_ZERO;
            for &t in &tr_off {
                acc += m.get(ro + t, co + t);
            }
            out.set(ik, jk, acc);
        }
    }
    Ok(out)
}

/// Embed an operator acting on `sites` (in the given order) into the full
/// register described by `shape`, identity elsewhere.
pub fn embed(op: &ComplexMatrix, shape: &RegisterShape, sites: &[usize]) -> Result<ComplexMatrix> {
    let sdim: usize = sites.iter().map(|&s| shape.dims[s]).product();
    if !op.is_square() || op.rows != sdim {
        return Err(Error::ShapeMismatch(format!(
            "operator dim {} does not match site dims product {}",
            op.rows, sdim
        )));
    }
    let nsites = shape.sites();
    let strides = shape.strides();
    let rest: Vec<usize> = (0..nsites).filter(|s| !sites.contains(s)).collect();

    let offsets = |sel: &[usize]| -> Vec<usize> {
        let dim: usize = sel.iter().map(|&s| shape.dims[s]).product();
        let mut out = Vec::with_capacity(dim);
        for mut idx in 0..dim {
            let mut full = 0usize;
            for &s in sel.iter().rev() {
                let d = shape.dims[s];
                full += (idx % d) * strides[s];
                idx /= d;
            }
            out.push(full);
        }
        out
    };
    let site_off = offsets(sites);
    let rest_off = offsets(&rest);

    let dim = shape.dim();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (i, &ro) in site_off.iter().enumerate() {
        for (j, &co) in site_off.iter().enumerate() {
            let v = op.get(i, j);
            if v == C_ZERO {
                continue;
            }
            for &r in &rest_off {
                out.set(ro + r, co + r, v);
            }
        }
    }
    Ok(out)
}

/// Hermitian eigendecomposition, eigenvalues ascending, `m = V diag(λ) V†`.
///
/// The input must be Hermitian within 1e-12 (relative to its largest entry);
/// it is symmetrized internally before the cyclic Jacobi sweeps.
pub fn herm_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("herm_eig requires a square matrix".into()));
    }
    let scale = m.max_abs().max(1.0);
    let defect = m.hermiticity_defect();
    if defect > 1e-12 * scale {
        return Err(Error::NotHermitian(defect));
    }
    eig::herm_eig_impl(&m.symmetrize())
}

/// Nearest PSD matrix in Frobenius norm: clip negative eigenvalues to zero.
pub fn psd_project(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, v) = herm_eig(m)?;
    let n = m.rows;
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        for r in 0..n {
            let vr = v.get(r, k);
            if vr == C_ZERO {
                continue;
            }
            let lv = lam * vr;
            for c in 0..n {
                out.data[r * n + c] += lv * v.get(c, k).conj();
            }
        }
    }
    Ok(out.symmetrize())
}

/// Minimum-norm least-squares solution of `A x = b` via the pseudo-inverse
/// of the normal equations.
pub fn solve_least_squares(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if b.len() != a.rows {
        return Err(Error::ShapeMismatch(format!(
            "rhs length {} does not match rows {}",
            b.len(),
            a.rows
        )));
    }
    let at = a.dagger();
    let h = at.matmul(a);
    let g = at.apply(b);
    let (vals, v) = herm_eig(&h)?;
    let lam_max = vals.iter().cloned().fold(0.0, f64::max);
    let cutoff = lam_max.max(1e-300) * 1e-12;
    let n = a.cols;
    let mut x = vec![C_ZERO; n];
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= cutoff {
            continue;
        }
        // x += v_k (v_k† g) / λ
        let mut proj = C_ZERO;
        for r in 0..n {
            proj += v.get(r, k).conj() * g[r];
        }
        let w = proj / lam;
        for r in 0..n {
            x[r] += v.get(r, k) * w;
        }
    }
    Ok(x)
}

/// Pauli matrices and common 2x2 blocks.
pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
}

pub fn sigma_y() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m.set(0, 1, Complex64::new(0.0, -1.0));
    m.set(1, 0, Complex64::new(0.0, 1.0));
    m
}
