//! Noncommutative word algebra over the six dichotomic observables
//! A0, A1, B0, B1, C0, C1. Letters of different parties commute, letters
//! within a party square to the identity, and no further relations are
//! imposed.

use std::collections::BTreeMap;
use std::fmt;

pub const PARTIES: usize = 3;
pub const PARTY_NAMES: [char; PARTIES] = ['A', 'B', 'C'];

/// One observable: party ∈ {A,B,C} as 0..3, index ∈ {0,1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Letter {
    pub party: usize,
    pub index: u8,
}

/// A product of letters in canonical commuting layout: one reduced sequence
/// per party (adjacent equal letters cancelled via O² = I).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word {
    pub seqs: [Vec<u8>; PARTIES],
}

/// Cancel adjacent equal letters until none remain.
fn reduce_seq(seq: &mut Vec<u8>) {
    let mut out: Vec<u8> = Vec::with_capacity(seq.len());
    for &l in seq.iter() {
        if out.last() == Some(&l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    *seq = out;
}

impl Word {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Single-letter word.
    pub fn letter(party: usize, index: u8) -> Self {
        let mut w = Self::default();
        w.seqs[party] = vec![index];
        w
    }

    /// Collect a raw letter sequence into reduced per-party form.
    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut w = Self::default();
        for l in letters {
            w.seqs[l.party].push(l.index);
        }
        for s in &mut w.seqs {
            reduce_seq(s);
        }
        w
    }

    /// Operator product: per-party concatenation followed by reduction.
    pub fn mul(&self, other: &Self) -> Self {
        let mut w = self.clone();
        for p in 0..PARTIES {
            w.seqs[p].extend_from_slice(&other.seqs[p]);
            reduce_seq(&mut w.seqs[p]);
        }
        w
    }

    /// Adjoint: reverse each party's sequence (letters are Hermitian).
    pub fn adjoint(&self) -> Self {
        let mut w = self.clone();
        for s in &mut w.seqs {
            s.reverse();
        }
        w
    }

    /// Representative of the pair {w, w†}: the moments of a Hermitian state
    /// under Hermitian observables satisfy ⟨w†⟩ = conj⟨w⟩, and with real
    /// moments the two coincide, so one label indexes both.
    pub fn canonical(&self) -> Self {
        let adj = self.adjoint();
        if adj < *self {
            adj
        } else {
            self.clone()
        }
    }

    pub fn is_identity(&self) -> bool {
        self.seqs.iter().all(Vec::is_empty)
    }

    pub fn degree(&self) -> usize {
        self.seqs.iter().map(Vec::len).sum()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for p in 0..PARTIES {
            for &i in &self.seqs[p] {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{}{}", PARTY_NAMES[p], i)?;
                first = false;
            }
        }
        Ok(())
    }
}

/// A real-linear combination of words, used while expanding operator
/// polynomials before they are canonicalized into moment functionals.
#[derive(Debug, Clone, Default)]
pub struct Polynomial {
    pub terms: BTreeMap<Word, f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::default();
        p.terms.insert(Word::identity(), c);
        p
    }

    pub fn word(w: Word) -> Self {
        let mut p = Self::default();
        p.terms.insert(w, 1.0);
        p
    }

    pub fn letter(party: usize, index: u8) -> Self {
        Self::word(Word::letter(party, index))
    }

    pub fn add_term(&mut self, w: Word, c: f64) {
        let entry = self.terms.entry(w.clone()).or_insert(0.0);
        *entry += c;
        if entry.abs() < 1e-15 {
            self.terms.remove(&w);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= s;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                out.add_term(wa.mul(wb), ca * cb);
            }
        }
        out
    }

    /// Collapse to canonical-word coefficients (the moment functional).
    pub fn into_moment_coeffs(&self) -> BTreeMap<Word, f64> {
        let mut out: BTreeMap<Word, f64> = BTreeMap::new();
        for (w, c) in &self.terms {
            *out.entry(w.canonical()).or_insert(0.0) += c;
        }
        out.retain(|_, v| v.abs() > 1e-15);
        out
    }
}

/// The fixed per-party monomial set {I, O0, O1, O0O1, O1O0}.
pub fn party_monomials() -> [Vec<u8>; 5] {
    [vec![], vec![0], vec![1], vec![0, 1], vec![1, 0]]
}

/// The 125-word moment-matrix basis: all per-party monomial triples, in
/// lexicographic (A, B, C) order of the table above.
pub fn build_basis() -> Vec<Word> {
    let mono = party_monomials();
    let mut basis = Vec::with_capacity(125);
    for a in &mono {
        for b in &mono {
            for c in &mono {
                basis.push(Word {
                    seqs: [a.clone(), b.clone(), c.clone()],
                });
            }
        }
    }
    basis
}
