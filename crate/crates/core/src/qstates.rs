//! Tilted Bell states, tilted GHZ states, dichotomic-observable projectors,
//! the ideal measurement settings, and the GHZ-correcting Pauli words U'^r.
//!
//! Basis convention: site 0 is the most significant bit of a computational
//! basis index, matching the bit decomposition r = k_1 k_2 ... k_N of the
//! measurement outcome.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{kron_all, sigma_x, sigma_z, ComplexMatrix, C_ONE, C_ZERO};

/// Tilt parameter θ ∈ (0, π/4].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltAngle(f64);

impl TiltAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_4 + 1e-12) {
            return Err(Error::Domain(format!(
                "tilt angle must lie in (0, pi/4], got {theta}"
            )));
        }
        Ok(Self(theta))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Measurement outcome r of an N-party GHZ-state measurement; bit i of r
/// (MSB first) is k_i.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutcomeIndex {
    pub r: usize,
    pub n: usize,
}

impl OutcomeIndex {
    pub fn new(r: usize, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("party count must be >= 2, got {n}")));
        }
        if r >= (1usize << n) {
            return Err(Error::Domain(format!(
                "outcome {r} out of range for {n} parties"
            )));
        }
        Ok(Self { r, n })
    }

    /// k_i for site i (site 0 = MSB).
    pub fn bit(&self, site: usize) -> bool {
        (self.r >> (self.n - 1 - site)) & 1 == 1
    }

    pub fn weight(&self) -> u32 {
        self.r.count_ones()
    }
}

/// Pure state on a register of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            amps: vec![C_ZERO; dim],
        }
    }

    pub fn basis(dim: usize, idx: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amps[idx] = C_ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |self><self| as a density matrix.
    pub fn outer(&self) -> ComplexMatrix {
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |r, c| self.amps[r] * self.amps[c].conj())
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    pub fn apply(&self, m: &ComplexMatrix) -> Self {
        Self {
            amps: m.apply(&self.amps),
        }
    }

    /// Overlap magnitude |<self|other>|^2.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// Signed tensor product of single-qubit letters from {I, X, Z, XZ}.
/// Each site stores (x, z) bits; the site operator is X^x · Z^z.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliWord {
    pub phase: Complex64,
    pub sites: Vec<(bool, bool)>,
}

impl PauliWord {
    pub fn identity(n: usize) -> Self {
        Self {
            phase: C_ONE,
            sites: vec![(false, false); n],
        }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Word product self · other (operator composition).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        let mut phase = self.phase * other.phase;
        let mut sites = Vec::with_capacity(self.len());
        for (&(x1, z1), &(x2, z2)) in self.sites.iter().zip(&other.sites) {
            // (X^x1 Z^z1)(X^x2 Z^z2) = (-1)^{z1 x2} X^{x1^x2} Z^{z1^z2}
            if z1 && x2 {
                phase = -phase;
            }
            sites.push((x1 ^ x2, z1 ^ z2));
        }
        Self { phase, sites }
    }

    /// Dense matrix with the standard Pauli matrices at each site.
    pub fn matrix(&self) -> ComplexMatrix {
        let x = sigma_x();
        let z = sigma_z();
        let xs: Vec<ComplexMatrix> = vec![x; self.len()];
        let zs: Vec<ComplexMatrix> = vec![z; self.len()];
        self.matrix_with(&xs, &zs)
    }

    /// Dense matrix with caller-supplied per-site X and Z operators
    /// (used to build U^r out of observables recovered from correlations).
    pub fn matrix_with(&self, site_x: &[ComplexMatrix], site_z: &[ComplexMatrix]) -> ComplexMatrix {
        assert_eq!(site_x.len(), self.len());
        assert_eq!(site_z.len(), self.len());
        let factors: Vec<ComplexMatrix> = self
            .sites
            .iter()
            .enumerate()
            .map(|(i, &(x, z))| {
                let d = site_x[i].rows;
                let mut m = ComplexMatrix::identity(d);
                if x {
                    m = m.matmul(&site_x[i]);
                }
                if z {
                    m = m.matmul(&site_z[i]);
                }
                m
            })
            .collect();
        kron_all(&factors).scale(self.phase)
    }

    /// Apply to a state vector of matching qubit count (standard Paulis).
    pub fn apply(&self, v: &StateVector) -> StateVector {
        let n = self.len();
        assert_eq!(v.dim(), 1 << n);
        let mut out = StateVector::zeros(v.dim());
        for (idx, &a) in v.amps.iter().enumerate() {
            if a == C_ZERO {
                continue;
            }
            let mut amp = a * self.phase;
            let mut target = idx;
            for (site, &(x, z)) in self.sites.iter().enumerate() {
                let bitpos = n - 1 - site;
                let bit = (idx >> bitpos) & 1 == 1;
                // site operator X^x Z^z acts as: Z first (phase on |1>), then X (flip)
                if z && bit {
                    amp = -amp;
                }
                if x {
                    target ^= 1 << bitpos;
                }
            }
            out.amps[target] += amp;
        }
        out
    }
}

/// The four tilted Bell states of the preliminaries table.
pub fn tilted_bell(theta: TiltAngle, b: usize) -> Result<StateVector> {
    let (c, s) = (theta.radians().cos(), theta.radians().sin());
    let mut v = StateVector::zeros(4);
    match b {
        0 => {
            v.amps[0b00] = Complex64::new(c, 0.0);
            v.amps[0b11] = Complex64::new(s, 0.0);
        }
        1 => {
            v.amps[0b00] = Complex64::new(s, 0.0);
            v.amps[0b11] = Complex64::new(-c, 0.0);
        }
        2 => {
            v.amps[0b01] = Complex64::new(c, 0.0);
            v.amps[0b10] = Complex64::new(s, 0.0);
        }
        3 => {
            v.amps[0b01] = Complex64::new(s, 0.0);
            v.amps[0b10] = Complex64::new(-c, 0.0);
        }
        _ => return Err(Error::Domain(format!("Bell variant {b} out of range"))),
    }
    Ok(v)
}

/// True when the |k⟩ amplitude of |GHZ^r_θ⟩ carries a minus sign.
///
/// For odd N this is the bit parity (-1)^{Σk_i}. For even N the bit parity
/// alone is invariant under complementing every k_i, which would make the
/// pair {r, r̄} non-orthogonal; an extra (-1)^{k_1} restores a sign flip
/// between complements so the 2^N states form an orthonormal basis for
/// every N, leaving the odd-N states and all projectors unchanged.
pub fn ghz_phase_negative(r: &OutcomeIndex) -> bool {
    let mut neg = r.weight() % 2 == 1;
    if r.n % 2 == 0 && r.bit(0) {
        neg = !neg;
    }
    neg
}

/// Tilted GHZ state |GHZ^r_θ> = ± cosθ |k> + sinθ |k̄>, with the sign from
/// `ghz_phase_negative`.
pub fn tilted_ghz(theta: TiltAngle, n: usize, r: OutcomeIndex) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::Domain("need at least 2 parties".into()));
    }
    if r.n != n {
        return Err(Error::Domain("outcome party count mismatch".into()));
    }
    let dim = 1usize << n;
    let k = r.r;
    let kbar = !k & (dim - 1);
    let sign = if ghz_phase_negative(&r) { -1.0 } else { 1.0 };
    let mut v = StateVector::zeros(dim);
    v.amps[k] = Complex64::new(sign * theta.radians().cos(), 0.0);
    v.amps[kbar] = Complex64::new(theta.radians().sin(), 0.0);
    Ok(v)
}

/// P_D^a = [I + (-1)^a D]/2 for a dichotomic observable D.
pub fn projector(d: &ComplexMatrix, a: u8) -> Result<ComplexMatrix> {
    if !d.is_hermitian(1e-10) {
        return Err(Error::Contract("projector input must be Hermitian".into()));
    }
    let sq = d.matmul(d);
    let id = ComplexMatrix::identity(d.rows);
    if sq.dist_fro(&id) > 1e-10 * (d.rows as f64).sqrt().max(1.0) {
        return Err(Error::Contract(
            "projector input must square to the identity".into(),
        ));
    }
    let sign = if a == 0 { 1.0 } else { -1.0 };
    Ok(id.add(&d.scale_re(sign)).scale_re(0.5))
}

/// α = 2 cos2θ / sqrt(1 + sin² 2θ).
pub fn alpha_of_theta(theta: TiltAngle) -> f64 {
    let t2 = 2.0 * theta.radians();
    2.0 * t2.cos() / (1.0 + t2.sin().powi(2)).sqrt()
}

/// μ with tan μ = sin 2θ.
pub fn mu_of_theta(theta: TiltAngle) -> f64 {
    (2.0 * theta.radians()).sin().atan()
}

/// Per-party measurement settings achieving the ideal correlations.
#[derive(Debug, Clone)]
pub struct MeasurementSettings {
    pub theta: TiltAngle,
    pub mu: f64,
    pub alpha: f64,
    /// (A_{0,i}, A_{1,i}) per party, party index 0-based.
    pub observables: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl MeasurementSettings {
    pub fn n(&self) -> usize {
        self.observables.len()
    }
}

/// Parties 1..N-1 measure (σ_Z, σ_X); party N measures cosμ σ_Z ± sinμ σ_X.
pub fn ideal_settings(theta: TiltAngle, n: usize) -> Result<MeasurementSettings> {
    if n < 2 {
        return Err(Error::Domain("need at least 2 parties".into()));
    }
    let mu = mu_of_theta(theta);
    let alpha = alpha_of_theta(theta);
    let mut observables = Vec::with_capacity(n);
    for _ in 0..n - 1 {
        observables.push((sigma_z(), sigma_x()));
    }
    let b0 = sigma_z().scale_re(mu.cos()).add(&sigma_x().scale_re(mu.sin()));
    let b1 = sigma_z().scale_re(mu.cos()).sub(&sigma_x().scale_re(mu.sin()));
    observables.push((b0, b1));
    Ok(MeasurementSettings {
        theta,
        mu,
        alpha,
        observables,
    })
}

/// The Pauli word U^r with U^r |GHZ^r_θ> = |GHZ^0_θ> up to a global phase:
/// X^{k_i} on each site, composed with Z on site 0 when Σk_i is odd.
pub fn ghz_correction_word(n: usize, r: OutcomeIndex) -> Result<PauliWord> {
    if r.n != n {
        return Err(Error::Domain("outcome party count mismatch".into()));
    }
    let mut sites = Vec::with_capacity(n);
    let neg = ghz_phase_negative(&r);
    for site in 0..n {
        let x = r.bit(site);
        let z = site == 0 && neg;
        sites.push((x, z));
    }
    Ok(PauliWord {
        phase: C_ONE,
        sites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, FRAC_PI_8};

    fn theta(t: f64) -> TiltAngle {
        TiltAngle::new(t).unwrap()
    }

    #[test]
    fn tilt_angle_domain() {
        assert!(TiltAngle::new(0.0).is_err());
        assert!(TiltAngle::new(1.2).is_err());
        assert!(TiltAngle::new(FRAC_PI_4).is_ok());
    }

    #[test]
    fn bell_states_table() {
        let v = tilted_bell(theta(FRAC_PI_4), 0).unwrap();
        let s = 0.5f64.sqrt();
        assert!((v.amps[0].re - s).abs() < 1e-15);
        assert!((v.amps[3].re - s).abs() < 1e-15);

        let v = tilted_bell(theta(FRAC_PI_6), 1).unwrap();
        assert!((v.amps[0].re - 0.5).abs() < 1e-15);
        assert!((v.amps[3].re + 3f64.sqrt() / 2.0).abs() < 1e-15);

        let v = tilted_bell(theta(FRAC_PI_8), 2).unwrap();
        assert!((v.amps[1].re - FRAC_PI_8.cos()).abs() < 1e-15);
        assert!((v.amps[2].re - FRAC_PI_8.sin()).abs() < 1e-15);
        assert!((v.norm() - 1.0).abs() < 1e-15);

        assert!(tilted_bell(theta(FRAC_PI_4), 4).is_err());
    }

    #[test]
    fn ghz_state_formula() {
        // (pi/4, 3, 0) -> (|000> + |111>)/sqrt(2)
        let v = tilted_ghz(theta(FRAC_PI_4), 3, OutcomeIndex::new(0, 3).unwrap()).unwrap();
        let s = 0.5f64.sqrt();
        assert!((v.amps[0].re - s).abs() < 1e-15);
        assert!((v.amps[7].re - s).abs() < 1e-15);

        // (theta, 3, 7) -> sinθ|000> - cosθ|111>
        let t = theta(0.3);
        let v = tilted_ghz(t, 3, OutcomeIndex::new(7, 3).unwrap()).unwrap();
        assert!((v.amps[0].re - 0.3f64.sin()).abs() < 1e-15);
        assert!((v.amps[7].re + 0.3f64.cos()).abs() < 1e-15);

        // (pi/6, 4, 5): k = 0101, Σk = 2 even -> +cos at |0101>, sin at |1010>
        let v = tilted_ghz(theta(FRAC_PI_6), 4, OutcomeIndex::new(5, 4).unwrap()).unwrap();
        assert!((v.amps[0b0101].re - FRAC_PI_6.cos()).abs() < 1e-15);
        assert!((v.amps[0b1010].re - FRAC_PI_6.sin()).abs() < 1e-15);
        let nonzero = v.amps.iter().filter(|a| a.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn ghz_orthonormal_complete() {
        let t = theta(FRAC_PI_6);
        let n = 3;
        let states: Vec<StateVector> = (0..8)
            .map(|r| tilted_ghz(t, n, OutcomeIndex::new(r, n).unwrap()).unwrap())
            .collect();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let ip = a.inner(b).norm();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "<{i}|{j}> = {ip}");
            }
        }
        let mut sum = ComplexMatrix::zeros(8, 8);
        for s in &states {
            sum = sum.add(&s.outer());
        }
        assert!(sum.dist_fro(&ComplexMatrix::identity(8)) < 1e-12);
    }

    #[test]
    fn projector_basics() {
        let p = projector(&sigma_z(), 0).unwrap();
        assert!(p.dist_fro(&ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]])) < 1e-14);

        let p = projector(&sigma_x(), 1).unwrap();
        let expect = ComplexMatrix::identity(2).sub(&sigma_x()).scale_re(0.5);
        assert!(p.dist_fro(&expect) < 1e-14);
        let (vals, _) = crate::kernel::herm_eig(&p).unwrap();
        assert!((vals[0]).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);

        // rotated observable at mu = pi/4: P^0 is rank-1 onto (cos pi/8, sin pi/8)
        let mu = FRAC_PI_4;
        let d = sigma_z().scale_re(mu.cos()).add(&sigma_x().scale_re(mu.sin()));
        let p = projector(&d, 0).unwrap();
        let c8 = FRAC_PI_8.cos();
        let s8 = FRAC_PI_8.sin();
        let v = StateVector::new(vec![Complex64::new(c8, 0.0), Complex64::new(s8, 0.0)]);
        assert!(p.dist_fro(&v.outer()) < 1e-12);

        // non-involutory input rejected
        let bad = ComplexMatrix::from_real(&[&[2.0, 0.0], &[0.0, -2.0]]);
        assert!(projector(&bad, 0).is_err());

        // P^0 + P^1 = I, P^0 P^1 = 0, P^2 = P
        let p0 = projector(&d, 0).unwrap();
        let p1 = projector(&d, 1).unwrap();
        assert!(p0.add(&p1).dist_fro(&ComplexMatrix::identity(2)) < 1e-12);
        assert!(p0.matmul(&p1).fro_norm() < 1e-12);
        assert!(p0.matmul(&p0).dist_fro(&p0) < 1e-12);
    }

    #[test]
    fn ideal_settings_values() {
        let s = ideal_settings(theta(FRAC_PI_4), 3).unwrap();
        assert!((s.mu - FRAC_PI_4).abs() < 1e-12);
        assert!(s.alpha.abs() < 1e-12);

        let s = ideal_settings(theta(FRAC_PI_6), 3).unwrap();
        assert!((s.alpha - 0.7559289).abs() < 1e-6);
        assert!((s.mu - 0.7137244).abs() < 1e-6);

        // invariants: tan mu = sin 2θ, observables are involutions
        for &t in &[FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, 0.11] {
            let s = ideal_settings(theta(t), 4).unwrap();
            assert!((s.mu.tan() - (2.0 * t).sin()).abs() < 1e-12);
            let alpha_expect = 2.0 * (2.0 * t).cos() / (1.0 + (2.0 * t).sin().powi(2)).sqrt();
            assert!((s.alpha - alpha_expect).abs() < 1e-12);
            for (a0, a1) in &s.observables {
                let id = ComplexMatrix::identity(2);
                assert!(a0.matmul(a0).dist_fro(&id) < 1e-12);
                assert!(a1.matmul(a1).dist_fro(&id) < 1e-12);
            }
        }
    }

    #[test]
    fn alpha_limit_at_small_theta() {
        let a = alpha_of_theta(theta(1e-9));
        assert!((a - 2.0).abs() < 1e-6);
    }

    #[test]
    fn correction_word_examples() {
        // (3, 7) -> X·Z on site 0, X on sites 1, 2
        let w = ghz_correction_word(3, OutcomeIndex::new(7, 3).unwrap()).unwrap();
        assert_eq!(w.sites, vec![(true, true), (true, false), (true, false)]);

        // (n, 0) -> identity word
        let w = ghz_correction_word(4, OutcomeIndex::new(0, 4).unwrap()).unwrap();
        assert_eq!(w, PauliWord::identity(4));
    }

    #[test]
    fn correction_word_maps_all_r_to_ghz0() {
        for &t in &[FRAC_PI_4, FRAC_PI_6, FRAC_PI_8] {
            for n in 2..=4usize {
                let ghz0 = tilted_ghz(theta(t), n, OutcomeIndex::new(0, n).unwrap()).unwrap();
                for r in 0..(1usize << n) {
                    let oi = OutcomeIndex::new(r, n).unwrap();
                    let w = ghz_correction_word(n, oi).unwrap();
                    let mapped = w.apply(&tilted_ghz(theta(t), n, oi).unwrap());
                    let overlap = mapped.inner(&ghz0).norm();
                    assert!(
                        (overlap - 1.0).abs() < 1e-12,
                        "n={n} r={r} θ={t}: |overlap| = {overlap}"
                    );
                }
            }
        }
    }

    #[test]
    fn correction_word_squared_is_identity_up_to_phase() {
        for r in 0..16 {
            let oi = OutcomeIndex::new(r, 4).unwrap();
            let w = ghz_correction_word(4, oi).unwrap();
            let sq = w.mul(&w);
            assert!(sq.sites.iter().all(|&(x, z)| !x && !z));
            assert!((sq.phase.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn pauli_word_matrix_matches_apply() {
        // appendix example: U^7 = XZ ⊗ X ⊗ X as a matrix equals its vector action
        let w = ghz_correction_word(3, OutcomeIndex::new(7, 3).unwrap()).unwrap();
        let m = w.matrix();
        let t = theta(0.5);
        let v = tilted_ghz(t, 3, OutcomeIndex::new(7, 3).unwrap()).unwrap();
        let via_matrix = v.apply(&m);
        let via_bits = w.apply(&v);
        for (a, b) in via_matrix.amps.iter().zip(&via_bits.amps) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
