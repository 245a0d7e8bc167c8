//! Assembly of the robust-fidelity semidefinite program: the moment-matrix
//! entry map over the 125-word basis, the noise-parameterized equality
//! constraints, and the fidelity objective.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{kron_all, ComplexMatrix};
use crate::qstates::StateVector;

use super::word::{build_basis, Polynomial, Word};

pub const BASIS_SIZE: usize = 125;
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// A real-linear functional over canonical moments.
#[derive(Debug, Clone, Default)]
pub struct MomentFunctional {
    pub coeffs: BTreeMap<Word, f64>,
}

impl MomentFunctional {
    fn from_polynomial(p: &Polynomial) -> Self {
        Self {
            coeffs: p.into_moment_coeffs(),
        }
    }

    pub fn coefficient(&self, w: &Word) -> f64 {
        self.coeffs.get(&w.canonical()).copied().unwrap_or(0.0)
    }
}

/// The SDP data: basis words, the canonical moment list, the entry map
/// identifying each matrix cell with a moment, the equality constraints at
/// the chosen noise level, and the objective.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub epsilon: f64,
    pub basis: Vec<Word>,
    /// Canonical words indexing the moment vector, sorted.
    pub moments: Vec<Word>,
    /// Row-major (BASIS_SIZE × BASIS_SIZE) map from cell to moment id.
    pub entry_moment: Vec<usize>,
    /// Cell count per moment id (support sizes; supports are disjoint).
    pub multiplicity: Vec<usize>,
    /// Equality rows as (dense coefficient vector over moments, target).
    pub constraints: Vec<(Vec<f64>, f64)>,
    /// Objective coefficients over moments (to be minimized).
    pub objective: Vec<f64>,
}

/// P^a_O as a polynomial: (1 + (−1)^a O)/2.
fn proj(party: usize, index: u8, a: u8) -> Polynomial {
    let sign = if a == 0 { 1.0 } else { -1.0 };
    Polynomial::constant(0.5).add(&Polynomial::letter(party, index).scale(0.5 * sign))
}

/// The fidelity of the extracted three-qubit state with the GHZ target,
/// expanded as a word polynomial. The last party's computational pair enters
/// through the rotated combinations (C0±C1)/√2.
pub fn objective_polynomial() -> Polynomial {
    let z = |p: usize| -> Polynomial {
        if p < 2 {
            Polynomial::letter(p, 0)
        } else {
            Polynomial::letter(2, 0)
                .add(&Polynomial::letter(2, 1))
                .scale(1.0 / SQRT2)
        }
    };
    let x = |p: usize| -> Polynomial {
        if p < 2 {
            Polynomial::letter(p, 1)
        } else {
            Polynomial::letter(2, 0)
                .sub(&Polynomial::letter(2, 1))
                .scale(1.0 / SQRT2)
        }
    };
    let one = Polynomial::constant(1.0);

    let mut plus = Polynomial::constant(8.0);
    let mut minus = Polynomial::constant(8.0);
    let mut cross_a = Polynomial::constant(1.0);
    let mut cross_b = Polynomial::constant(1.0);
    for p in 0..3 {
        plus = plus.mul(&one.add(&z(p)));
        minus = minus.mul(&one.sub(&z(p)));
        cross_a = cross_a.mul(&one.add(&z(p)).mul(&x(p)).mul(&one.sub(&z(p))));
        cross_b = cross_b.mul(&one.sub(&z(p)).mul(&x(p)).mul(&one.add(&z(p))));
    }
    plus.add(&minus).add(&cross_a).add(&cross_b).scale(1.0 / 128.0)
}

/// The fidelity objective as a moment functional.
pub fn objective_fidelity() -> MomentFunctional {
    MomentFunctional::from_polynomial(&objective_polynomial())
}

/// The seven equality constraints at white-noise weight ε.
pub fn constraints_at(epsilon: f64) -> Result<Vec<(MomentFunctional, f64)>> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!(
            "noise weight must be in [0,1], got {epsilon}"
        )));
    }
    let mut rows = Vec::with_capacity(7);
    // Marginals of the first computational projectors.
    rows.push((proj(0, 0, 0), 0.5));
    rows.push((proj(1, 0, 0), 0.5));
    // Their correlated product under white noise.
    rows.push((
        proj(0, 0, 0).mul(&proj(1, 0, 0)),
        (1.0 - epsilon) / 2.0 + epsilon / 4.0,
    ));
    // Marginals of the first party's second observable.
    rows.push((proj(0, 1, 0), 0.5));
    rows.push((proj(0, 1, 1), 0.5));
    // The two conditional CHSH rows.
    for a in 0..2u8 {
        let sign = if a == 0 { 1.0 } else { -1.0 };
        let b0 = Polynomial::letter(1, 0);
        let b1 = Polynomial::letter(1, 1);
        let c0 = Polynomial::letter(2, 0);
        let c1 = Polynomial::letter(2, 1);
        let bell = b0
            .mul(&c0)
            .add(&b0.mul(&c1))
            .add(&b1.mul(&c0).sub(&b1.mul(&c1)).scale(sign));
        rows.push((proj(0, 1, a).mul(&bell), SQRT2 * (1.0 - epsilon)));
    }
    Ok(rows
        .into_iter()
        .map(|(p, t)| (MomentFunctional::from_polynomial(&p), t))
        .collect())
}

impl SdpProblem {
    /// Build the full problem at noise weight ε, checking that every word the
    /// objective and constraints mention is reachable inside the moment
    /// matrix.
    pub fn build(epsilon: f64) -> Result<Self> {
        let basis = build_basis();
        let mut index: BTreeMap<Word, usize> = BTreeMap::new();
        for u in &basis {
            let ud = u.adjoint();
            for v in &basis {
                let w = ud.mul(v).canonical();
                let next = index.len();
                index.entry(w).or_insert(next);
            }
        }
        // Re-number in sorted order so moment ids are canonical.
        let moments: Vec<Word> = index.keys().cloned().collect();
        let index: BTreeMap<Word, usize> = moments
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();

        let mut entry_moment = vec![0usize; BASIS_SIZE * BASIS_SIZE];
        let mut multiplicity = vec![0usize; moments.len()];
        for (i, u) in basis.iter().enumerate() {
            let ud = u.adjoint();
            for (j, v) in basis.iter().enumerate() {
                let w = ud.mul(v).canonical();
                let id = index[&w];
                entry_moment[i * BASIS_SIZE + j] = id;
                multiplicity[id] += 1;
            }
        }

        let densify = |f: &MomentFunctional| -> Result<Vec<f64>> {
            let mut row = vec![0.0; moments.len()];
            let mut missing = Vec::new();
            for (w, c) in &f.coeffs {
                match index.get(w) {
                    Some(&id) => row[id] = *c,
                    None => missing.push(w.to_string()),
                }
            }
            if missing.is_empty() {
                Ok(row)
            } else {
                Err(Error::ClosureFailure(missing))
            }
        };

        let objective = densify(&objective_fidelity())?;
        let constraints = constraints_at(epsilon)?
            .iter()
            .map(|(f, t)| Ok((densify(f)?, *t)))
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            epsilon,
            basis,
            moments,
            entry_moment,
            multiplicity,
            constraints,
            objective,
        })
    }

    pub fn moment_count(&self) -> usize {
        self.moments.len()
    }

    pub fn moment_id(&self, w: &Word) -> Option<usize> {
        let c = w.canonical();
        self.moments.binary_search(&c).ok()
    }

    /// Assemble the moment matrix (row-major flat, real symmetric) from a
    /// moment vector.
    pub fn assemble(&self, y: &[f64], out: &mut [f64]) {
        for (cell, &id) in self.entry_moment.iter().enumerate() {
            out[cell] = y[id];
        }
    }

    /// Exact moment vector of a concrete realization: a three-qubit density
    /// matrix and two dichotomic 2×2 observables per party.
    pub fn realization_moments(
        &self,
        rho: &ComplexMatrix,
        observables: &[[ComplexMatrix; 2]; 3],
    ) -> Result<Vec<f64>> {
        if rho.rows != 8 || !rho.is_square() {
            return Err(Error::ShapeMismatch("state must be 8x8".into()));
        }
        let id2 = ComplexMatrix::identity(2);
        let mut y = vec![0.0; self.moments.len()];
        for (k, w) in self.moments.iter().enumerate() {
            let factors: Vec<ComplexMatrix> = (0..3)
                .map(|p| {
                    w.seqs[p].iter().fold(id2.clone(), |acc, &i| {
                        acc.matmul(&observables[p][i as usize])
                    })
                })
                .collect();
            let op = kron_all(&factors);
            y[k] = rho.matmul(&op).trace().re;
        }
        Ok(y)
    }

    /// Evaluate a dense coefficient row against a moment vector.
    pub fn evaluate(row: &[f64], y: &[f64]) -> f64 {
        row.iter().zip(y).map(|(c, v)| c * v).sum()
    }

    /// Serializable description for external cross-checks.
    pub fn describe(&self) -> ProblemDescription {
        ProblemDescription {
            schema: 1,
            epsilon: self.epsilon,
            basis: self.basis.iter().map(Word::to_string).collect(),
            moments: self.moments.iter().map(Word::to_string).collect(),
            objective: sparse(&self.moments, &self.objective),
            constraints: self
                .constraints
                .iter()
                .map(|(row, t)| ConstraintDescription {
                    coefficients: sparse(&self.moments, row),
                    target: *t,
                })
                .collect(),
        }
    }
}

fn sparse(moments: &[Word], row: &[f64]) -> Vec<(String, f64)> {
    moments
        .iter()
        .zip(row)
        .filter(|(_, &c)| c != 0.0)
        .map(|(w, &c)| (w.to_string(), c))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintDescription {
    pub coefficients: Vec<(String, f64)>,
    pub target: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemDescription {
    pub schema: u32,
    pub epsilon: f64,
    pub basis: Vec<String>,
    pub moments: Vec<String>,
    pub objective: Vec<(String, f64)>,
    pub constraints: Vec<ConstraintDescription>,
}

/// Ideal three-party observables: (σ_Z, σ_X) for the first two parties and
/// the ±45°-rotated pair for the third.
pub fn ideal_observables() -> [[ComplexMatrix; 2]; 3] {
    use crate::kernel::{sigma_x, sigma_z};
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let rot_plus = sigma_z().scale_re(c).add(&sigma_x().scale_re(c));
    let rot_minus = sigma_z().scale_re(c).sub(&sigma_x().scale_re(c));
    [
        [sigma_z(), sigma_x()],
        [sigma_z(), sigma_x()],
        [rot_plus, rot_minus],
    ]
}

/// The three-qubit GHZ target state.
pub fn ghz_state() -> StateVector {
    use num_complex::Complex64;
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    amps[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[7] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    StateVector::new(amps)
}
