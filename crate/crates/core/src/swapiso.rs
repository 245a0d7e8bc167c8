//! Extraction machinery for measurement verification: operator
//! regularization, swap gates and swap channels, local-isometry application
//! with junk factorization, Choi maps, and the full star-network
//! measurement-simulation check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{herm_eig, kron, partial_trace, ComplexMatrix, RegisterShape, C_ZERO};
use crate::qstates::{tilted_ghz, StateVector, TiltAngle};
use crate::starnet::StarNetwork;

/// Threshold below which an eigenvalue counts as zero during regularization.
const ZERO_EIG: f64 = 1e-8;

/// A pair of Hermitian involutions (X, Z) on one party's register.
///
/// Anticommutation is deliberately not assumed; the extraction channel is
/// well defined (and trace preserving) for any involutory pair.
#[derive(Debug, Clone)]
pub struct SwapPair {
    pub x: ComplexMatrix,
    pub z: ComplexMatrix,
}

impl SwapPair {
    pub fn new(x: ComplexMatrix, z: ComplexMatrix) -> Result<Self> {
        for (name, op) in [("X", &x), ("Z", &z)] {
            let id = ComplexMatrix::identity(op.rows);
            if !op.is_hermitian(1e-10) || op.matmul(op).dist_fro(&id) > 1e-10 {
                return Err(Error::Contract(format!(
                    "{name} must be a Hermitian involution"
                )));
            }
        }
        if x.rows != z.rows {
            return Err(Error::ShapeMismatch("X and Z act on different spaces".into()));
        }
        Ok(Self { x, z })
    }

    pub fn dim(&self) -> usize {
        self.z.rows
    }

    /// K_0 = P_Z^0 and K_1 = X·P_Z^1, the two branch operators of the swap.
    pub fn kraus(&self) -> (ComplexMatrix, ComplexMatrix) {
        let p0 = self
            .z
            .add(&ComplexMatrix::identity(self.dim()))
            .scale_re(0.5);
        let p1 = ComplexMatrix::identity(self.dim()).sub(&self.z).scale_re(0.5);
        (p0, self.x.matmul(&p1))
    }
}

/// Matrix sign function with zero eigenvalues mapped to +1.
fn operator_sign(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, vecs) = herm_eig(m)?;
    let signs: Vec<f64> = vals
        .iter()
        .map(|&v| if v.abs() < ZERO_EIG { 1.0 } else { v.signum() })
        .collect();
    let d = m.rows;
    let mut out = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        for r in 0..d {
            let vr = vecs.get(r, k) * signs[k];
            for c in 0..d {
                let add = vr * vecs.get(c, k).conj();
                out.set(r, c, out.get(r, c) + add);
            }
        }
    }
    Ok(out.symmetrize())
}

/// Recover the last party's (X, Z) pair from its two observables:
/// Z* = (A0+A1)/(2cosμ), X* = (A0−A1)/(2sinμ), then the operator sign with
/// zero eigenvalues replaced by 1.
pub fn regularize(a0n: &ComplexMatrix, a1n: &ComplexMatrix, mu: f64) -> Result<SwapPair> {
    let (c, s) = (mu.cos(), mu.sin());
    if c.abs() < 1e-12 || s.abs() < 1e-12 {
        return Err(Error::Domain(format!(
            "regularization undefined at mu = {mu} (division by zero)"
        )));
    }
    let zstar = a0n.add(a1n).scale_re(1.0 / (2.0 * c));
    let xstar = a0n.sub(a1n).scale_re(1.0 / (2.0 * s));
    SwapPair::new(operator_sign(&xstar)?, operator_sign(&zstar)?)
}

/// Action of the swap circuit on the |0⟩-ancilla sector:
/// |ξ⟩ ↦ |0⟩⊗K₀|ξ⟩ + |1⟩⊗K₁|ξ⟩.
pub fn swap_gate_apply(pair: &SwapPair, xi: &StateVector) -> Result<StateVector> {
    if xi.dim() != pair.dim() {
        return Err(Error::ShapeMismatch(format!(
            "state dim {} does not match pair dim {}",
            xi.dim(),
            pair.dim()
        )));
    }
    let (k0, k1) = pair.kraus();
    let mut amps = k0.apply(&xi.amps);
    amps.extend(k1.apply(&xi.amps));
    Ok(StateVector::new(amps))
}

/// Isometry V = |0⟩⊗K₀ + |1⟩⊗K₁ as a (2d)×d matrix.
fn swap_isometry(pair: &SwapPair) -> ComplexMatrix {
    let (k0, k1) = pair.kraus();
    let d = pair.dim();
    let mut v = ComplexMatrix::zeros(2 * d, d);
    for r in 0..d {
        for c in 0..d {
            v.set(r, c, k0.get(r, c));
            v.set(d + r, c, k1.get(r, c));
        }
    }
    v
}

/// Extraction channel Γ: ⟨a|Γ(ρ)|b⟩ = Tr(K_a ρ K_b†).
pub fn swap_channel(pair: &SwapPair, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.rows != pair.dim() || !rho.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "density dim {} does not match pair dim {}",
            rho.rows,
            pair.dim()
        )));
    }
    let (k0, k1) = pair.kraus();
    let ks = [k0, k1];
    let mut out = ComplexMatrix::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            out.set(a, b, ks[a].matmul(rho).matmul(&ks[b].dagger()).trace());
        }
    }
    Ok(out)
}

/// Γ ⊗ id applied to a bipartite density on (party ⊗ R), with the party
/// factor first. Output lives on (ancilla qubit ⊗ R).
pub fn swap_channel_on_first(
    pair: &SwapPair,
    tau: &ComplexMatrix,
    r_dim: usize,
) -> Result<ComplexMatrix> {
    let d = pair.dim();
    if tau.rows != d * r_dim || !tau.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "joint density dim {} does not match {}x{}",
            tau.rows, d, r_dim
        )));
    }
    let (k0, k1) = pair.kraus();
    let ks = [k0, k1];
    let id_r = ComplexMatrix::identity(r_dim);
    let shape = RegisterShape::new(vec![d, r_dim]);
    let mut out = ComplexMatrix::zeros(2 * r_dim, 2 * r_dim);
    for a in 0..2 {
        for b in 0..2 {
            let m = kron(&ks[a], &id_r)
                .matmul(tau)
                .matmul(&kron(&ks[b], &id_r).dagger());
            let block = partial_trace(&m, &shape, &[1])?;
            for ri in 0..r_dim {
                for rj in 0..r_dim {
                    out.set(a * r_dim + ri, b * r_dim + rj, block.get(ri, rj));
                }
            }
        }
    }
    Ok(out)
}

/// Apply the per-party swap isometries to an N-party pure state and split the
/// result into the extracted ancilla state and the residual (junk) state.
pub fn isometry_extract(
    state: &StateVector,
    pairs: &[SwapPair],
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let total: usize = pairs.iter().map(SwapPair::dim).product();
    if state.dim() != total {
        return Err(Error::ShapeMismatch(format!(
            "state dim {} does not match product of party dims {}",
            state.dim(),
            total
        )));
    }
    let mut v = ComplexMatrix::identity(1);
    let mut dims = Vec::with_capacity(2 * pairs.len());
    for pair in pairs {
        v = kron(&v, &swap_isometry(pair));
        dims.push(2);
        dims.push(pair.dim());
    }
    let out = StateVector::new(v.apply(&state.amps));
    let full = out.outer();
    let shape = RegisterShape::new(dims);
    let ancillas: Vec<usize> = (0..pairs.len()).map(|i| 2 * i).collect();
    let originals: Vec<usize> = (0..pairs.len()).map(|i| 2 * i + 1).collect();
    let extracted = partial_trace(&full, &shape, &ancillas)?;
    let junk = partial_trace(&full, &shape, &originals)?;
    Ok((junk, extracted))
}

/// A completely positive map in Choi form: σ ↦ Tr_in[(I ⊗ σᵀ)·ρ], with the
/// output factor first in ρ's ordering.
#[derive(Debug, Clone)]
pub struct ChoiMap {
    pub choi: ComplexMatrix,
    pub input_dim: usize,
    pub output_dim: usize,
}

impl ChoiMap {
    pub fn apply(&self, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
        if sigma.rows != self.input_dim || !sigma.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "input dim {} does not match map input {}",
                sigma.rows, self.input_dim
            )));
        }
        let (din, dout) = (self.input_dim, self.output_dim);
        let mut out = ComplexMatrix::zeros(dout, dout);
        for a in 0..dout {
            for b in 0..dout {
                let mut acc = C_ZERO;
                for l in 0..din {
                    for k in 0..din {
                        acc += sigma.get(l, k) * self.choi.get(a * din + l, b * din + k);
                    }
                }
                out.set(a, b, acc);
            }
        }
        Ok(out)
    }

    /// ‖Λ(I) − I‖_F, zero for a unital map.
    pub fn unitality_residual(&self) -> f64 {
        let img = self
            .apply(&ComplexMatrix::identity(self.input_dim))
            .expect("identity input always matches");
        img.dist_fro(&ComplexMatrix::identity(self.output_dim))
    }
}

/// Build the map σ ↦ Tr_in[(I ⊗ σᵀ)·scale·sigma] from a bipartite state on
/// (output ⊗ input).
pub fn choi_from_state(sigma: &ComplexMatrix, input_dim: usize, scale: f64) -> Result<ChoiMap> {
    if !sigma.is_square() || sigma.rows % input_dim != 0 {
        return Err(Error::ShapeMismatch(format!(
            "bipartite dim {} is not divisible by input dim {}",
            sigma.rows, input_dim
        )));
    }
    Ok(ChoiMap {
        choi: sigma.scale_re(scale),
        input_dim,
        output_dim: sigma.rows / input_dim,
    })
}

/// Apply a qubit→qubit Choi map to one site of an n-qubit operator.
fn apply_on_site(map: &ChoiMap, op: &ComplexMatrix, n: usize, site: usize) -> ComplexMatrix {
    let dim = 1 << n;
    debug_assert_eq!(op.rows, dim);
    let stride = 1 << (n - 1 - site);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for row in 0..dim {
        let a = (row / stride) & 1;
        let row_base = row & !(stride); // row with site bit cleared
        for col in 0..dim {
            let b = (col / stride) & 1;
            let col_base = col & !(stride);
            let mut acc = C_ZERO;
            for l in 0..2 {
                for k in 0..2 {
                    acc += op.get(row_base | (l * stride), col_base | (k * stride))
                        * map.choi.get(a * 2 + l, b * 2 + k);
                }
            }
            out.set(row, col, acc);
        }
    }
    out
}

/// Apply one qubit Choi map per site to an n-qubit operator.
pub fn apply_choi_product(maps: &[ChoiMap], op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = maps.len();
    if op.rows != 1 << n || !op.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "operator dim {} does not match {} qubit maps",
            op.rows, n
        )));
    }
    if maps.iter().any(|m| m.input_dim != 2 || m.output_dim != 2) {
        return Err(Error::ShapeMismatch("site maps must be qubit → qubit".into()));
    }
    let mut cur = op.clone();
    for (site, map) in maps.iter().enumerate() {
        cur = apply_on_site(map, &cur, n, site);
    }
    Ok(cur)
}

/// One outcome's result in a measurement-simulation check.
#[derive(Debug, Clone, Serialize)]
pub struct EffectCheck {
    pub r: usize,
    pub frobenius_distance: f64,
}

/// Full report: per-outcome distances to the reference projectors and the
/// per-site unitality residuals of the constructed maps.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub effects: Vec<EffectCheck>,
    pub unitality_residuals: Vec<f64>,
    pub max_distance: f64,
    pub max_unitality_residual: f64,
}

/// Verify that the supplied measurement effects on the central node simulate
/// the ideal tilted GHZ measurement: build σ_i = (Γ_i ⊗ id)(τ_i) per link,
/// form the Choi maps from 2σ_i, push every effect through them, and compare
/// with the reference projectors.
pub fn simulation_verify(
    net: &StarNetwork,
    effects: &[ComplexMatrix],
    pairs: &[SwapPair],
) -> Result<SimulationReport> {
    let n = net.n;
    if effects.len() != 1 << n {
        return Err(Error::Contract(format!(
            "expected {} effects, got {}",
            1 << n,
            effects.len()
        )));
    }
    if pairs.len() != n {
        return Err(Error::Contract(format!(
            "expected {} swap pairs, got {}",
            n,
            pairs.len()
        )));
    }
    let dim = 1 << n;
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for (r, e) in effects.iter().enumerate() {
        if e.rows != dim || !e.is_square() {
            return Err(Error::Contract(format!("effect {r} has wrong dimension")));
        }
        if e.min_eigenvalue()? < -1e-10 {
            return Err(Error::Contract(format!("effect {r} is not PSD")));
        }
        sum = sum.add(e);
    }
    if sum.dist_fro(&ComplexMatrix::identity(dim)) > 1e-10 {
        return Err(Error::Contract("effects do not sum to the identity".into()));
    }

    let mut maps = Vec::with_capacity(n);
    for (pair, link) in pairs.iter().zip(&net.links) {
        let sigma = swap_channel_on_first(pair, link, 2)?;
        maps.push(choi_from_state(&sigma, 2, 2.0)?);
    }
    let unitality_residuals: Vec<f64> = maps.iter().map(ChoiMap::unitality_residual).collect();

    let mut checks = Vec::with_capacity(effects.len());
    for (r, e) in effects.iter().enumerate() {
        let image = apply_choi_product(&maps, e)?;
        let ghz = tilted_ghz(net.theta, n, crate::qstates::OutcomeIndex::new(r, n)?)?;
        let reference = ghz.outer();
        checks.push(EffectCheck {
            r,
            frobenius_distance: image.dist_fro(&reference),
        });
    }
    let max_distance = checks
        .iter()
        .map(|c| c.frobenius_distance)
        .fold(0.0, f64::max);
    let max_unitality_residual = unitality_residuals.iter().cloned().fold(0.0, f64::max);
    Ok(SimulationReport {
        effects: checks,
        unitality_residuals,
        max_distance,
        max_unitality_residual,
    })
}

/// The ideal tilted GHZ-measurement effects on the central node's register.
pub fn ideal_gsm_effects(theta: TiltAngle, n: usize) -> Result<Vec<ComplexMatrix>> {
    (0..1usize << n)
        .map(|r| {
            let v = tilted_ghz(theta, n, crate::qstates::OutcomeIndex::new(r, n)?)?;
            Ok(v.outer())
        })
        .collect()
}

/// Ideal swap pairs (σ_X, σ_Z) for every party, with the last party's pair
/// obtained by regularizing its rotated observables.
pub fn ideal_pairs(settings: &crate::qstates::MeasurementSettings) -> Result<Vec<SwapPair>> {
    let n = settings.n();
    let mut pairs = Vec::with_capacity(n);
    for (i, (a0, a1)) in settings.observables.iter().enumerate() {
        if i + 1 < n {
            pairs.push(SwapPair::new(a1.clone(), a0.clone())?);
        } else {
            pairs.push(regularize(a0, a1, settings.mu)?);
        }
    }
    Ok(pairs)
}
