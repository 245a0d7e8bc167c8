//! Tilted CHSH Bell operators, maximal violations, and the r-indexed tilde
//! transforms of observables obtained by conjugating with the GHZ-correcting
//! unitaries.

use crate::error::{Error, Result};
use crate::kernel::{kron, ComplexMatrix};
use crate::qstates::{ghz_correction_word, MeasurementSettings, OutcomeIndex, PauliWord, TiltAngle};

pub use crate::qstates::{alpha_of_theta, mu_of_theta};

/// Label for a Bell operator: the four-variant form of the preliminaries,
/// or the ā-bitstring form of the multipartite construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BellVariant {
    /// b ∈ {0,1,2,3}.
    B(usize),
    /// ā = a_1 ... a_{N-2}; only the parity of Σa_i enters the operator.
    ABar(Vec<bool>),
}

/// Bell operator on the last two parties.
#[derive(Debug, Clone)]
pub struct BellOperator {
    pub alpha: f64,
    pub variant: BellVariant,
    pub matrix: ComplexMatrix,
}

/// Maximal tilted-CHSH violation sqrt(8 + 2α²).
pub fn max_violation(alpha: f64) -> Result<f64> {
    if !(0.0..2.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha must lie in [0,2), got {alpha}")));
    }
    Ok((8.0 + 2.0 * alpha * alpha).sqrt())
}

/// Bell operator W for the given variant, on parties (N-1, N) of `settings`.
pub fn chsh_operator(settings: &MeasurementSettings, variant: BellVariant) -> Result<BellOperator> {
    let n = settings.n();
    if n < 2 {
        return Err(Error::Domain("settings must cover at least 2 parties".into()));
    }
    let (a0, a1) = &settings.observables[n - 2];
    let (b0, b1) = &settings.observables[n - 1];
    let alpha = settings.alpha;
    let id = ComplexMatrix::identity(b0.rows);

    let cross = |s_a1: f64| {
        // A0 B0 + A0 B1 + s (A1 B0 - A1 B1)
        kron(a0, &b0.add(b1)).add(&kron(a1, &b0.sub(b1)).scale_re(s_a1))
    };

    let matrix = match &variant {
        BellVariant::B(0) => kron(&a0.scale_re(alpha), &id).add(&cross(1.0)),
        BellVariant::B(1) => kron(&a0.scale_re(-alpha), &id).add(&cross(-1.0)),
        BellVariant::B(2) => kron(&a0.scale_re(-alpha), &id).add(&cross(-1.0)).scale_re(-1.0),
        BellVariant::B(3) => kron(&a0.scale_re(alpha), &id).add(&cross(1.0)).scale_re(-1.0),
        BellVariant::B(b) => {
            return Err(Error::Domain(format!("Bell variant {b} out of range")))
        }
        BellVariant::ABar(bits) => {
            let parity = bits.iter().filter(|&&b| b).count() % 2;
            let s = if parity == 0 { 1.0 } else { -1.0 };
            kron(&a0.scale_re(alpha), &id).add(&cross(s))
        }
    };
    Ok(BellOperator {
        alpha,
        variant,
        matrix,
    })
}

/// Tag pairing an outcome with its correction word, used for conjugation.
#[derive(Debug, Clone)]
pub struct TildeTag {
    pub r: OutcomeIndex,
    pub word: PauliWord,
}

impl TildeTag {
    pub fn new(n: usize, r: OutcomeIndex) -> Result<Self> {
        Ok(Self {
            r,
            word: ghz_correction_word(n, r)?,
        })
    }

    /// Restriction of the tag to a contiguous site range.
    pub fn restrict(&self, sites: std::ops::Range<usize>) -> PauliWord {
        PauliWord {
            phase: self.word.phase,
            sites: self.word.sites[sites].to_vec(),
        }
    }
}

/// U† op U with U the dense matrix of `word` (standard Paulis per site).
pub fn tilde(op: &ComplexMatrix, word: &PauliWord) -> Result<ComplexMatrix> {
    let u = word.matrix();
    if u.rows != op.rows {
        return Err(Error::ShapeMismatch(format!(
            "word acts on dim {} but operator has dim {}",
            u.rows, op.rows
        )));
    }
    Ok(u.dagger().matmul(op).matmul(&u))
}

/// U† op U with caller-supplied per-site X and Z operators.
pub fn tilde_with(
    op: &ComplexMatrix,
    word: &PauliWord,
    site_x: &[ComplexMatrix],
    site_z: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    let u = word.matrix_with(site_x, site_z);
    if u.rows != op.rows {
        return Err(Error::ShapeMismatch(format!(
            "word acts on dim {} but operator has dim {}",
            u.rows, op.rows
        )));
    }
    Ok(u.dagger().matmul(op).matmul(&u))
}

/// Convenience: W_b built from ideal settings at θ.
pub fn ideal_bell_operator(theta: TiltAngle, b: usize) -> Result<BellOperator> {
    let settings = crate::qstates::ideal_settings(theta, 2)?;
    chsh_operator(&settings, BellVariant::B(b))
}
