//! Exact simulation of the star network: N outer parties each share a
//! two-qubit link state with a central node, who performs the tilted
//! GHZ-basis measurement. Also houses the correlation-condition evaluators
//! that certify a state against the self-testing targets.

use num_complex::Complex64;
use serde::Serialize;

use crate::bellops::{chsh_operator, tilde_with, BellVariant};
use crate::error::{Error, Result};
use crate::kernel::{embed, herm_eig, ComplexMatrix, RegisterShape, C_ZERO};
use crate::qstates::{
    ghz_correction_word, projector, tilted_bell, MeasurementSettings, OutcomeIndex, TiltAngle,
};
use crate::swapiso::regularize;

/// The star network: per-link two-qubit densities τ_{A_iR_i} (outer party
/// first) and the tilt angle of the central measurement.
#[derive(Debug, Clone)]
pub struct StarNetwork {
    pub n: usize,
    pub theta: TiltAngle,
    /// 4×4 density matrices, ordered (A_i ⊗ R_i).
    pub links: Vec<ComplexMatrix>,
}

impl StarNetwork {
    pub fn with_links(theta: TiltAngle, links: Vec<ComplexMatrix>) -> Result<Self> {
        let n = links.len();
        if n < 2 {
            return Err(Error::Domain(format!("need at least 2 links, got {n}")));
        }
        for (i, link) in links.iter().enumerate() {
            if link.rows != 4 || !link.is_square() {
                return Err(Error::ShapeMismatch(format!("link {i} is not 4x4")));
            }
            if !link.is_hermitian(1e-10)
                || (link.trace().re - 1.0).abs() > 1e-10
                || link.min_eigenvalue()? < -1e-10
            {
                return Err(Error::Contract(format!(
                    "link {i} is not a valid density matrix"
                )));
            }
        }
        Ok(Self { n, theta, links })
    }
}

/// Network with every link set to the maximally entangled two-qubit state.
pub fn build_star(n: usize, theta: TiltAngle) -> Result<StarNetwork> {
    let bell = tilted_bell(TiltAngle::new(std::f64::consts::FRAC_PI_4)?, 0)?;
    let link = bell.outer();
    StarNetwork::with_links(theta, vec![link; n])
}

/// Network with every link depolarized: (1−ε)|Bell⟩⟨Bell| + ε·I/4.
pub fn build_star_depolarized(n: usize, theta: TiltAngle, eps: f64) -> Result<StarNetwork> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("noise weight must be in [0,1], got {eps}")));
    }
    let bell = tilted_bell(TiltAngle::new(std::f64::consts::FRAC_PI_4)?, 0)?;
    let link = bell
        .outer()
        .scale_re(1.0 - eps)
        .add(&ComplexMatrix::identity(4).scale_re(eps / 4.0));
    StarNetwork::with_links(theta, vec![link; n])
}

/// One outcome of the central measurement: its probability and the
/// normalized conditional state on the outer parties. Zero-probability
/// outcomes carry no state.
#[derive(Debug, Clone)]
pub struct ConditionalOutcome {
    pub r: OutcomeIndex,
    pub probability: f64,
    pub state: Option<ComplexMatrix>,
}

/// Perform the tilted GHZ-basis measurement on the central node's qubits.
///
/// Each link is eigendecomposed so the global state becomes a mixture of
/// pure product states across links; contracting the two-amplitude GHZ
/// effect vector against each product term yields the conditional outer
/// state as a small sum of rank-1 terms, avoiding any 4^N-dimensional
/// intermediate.
pub fn apply_gsm(net: &StarNetwork) -> Result<Vec<ConditionalOutcome>> {
    let n = net.n;
    let dim = 1usize << n;
    let (ct, st) = (net.theta.radians().cos(), net.theta.radians().sin());

    // Per link: list of (weight, v0, v1) where v_g ∈ C² is the outer-party
    // component of the eigenvector when the central qubit reads g.
    let mut terms_per_link = Vec::with_capacity(n);
    for link in &net.links {
        let (vals, vecs) = herm_eig(link)?;
        let mut terms = Vec::new();
        for (k, &w) in vals.iter().enumerate() {
            if w < 1e-14 {
                continue;
            }
            // Link basis index = a*2 + g with the outer party's bit first.
            let v0 = [vecs.get(0, k), vecs.get(2, k)];
            let v1 = [vecs.get(1, k), vecs.get(3, k)];
            terms.push((w, v0, v1));
        }
        terms_per_link.push(terms);
    }

    let mut outcomes = Vec::with_capacity(dim);
    for r in 0..dim {
        let idx = OutcomeIndex::new(r, n)?;
        let sign = if crate::qstates::ghz_phase_negative(&idx) {
            -1.0
        } else {
            1.0
        };
        let mut rho = ComplexMatrix::zeros(dim, dim);
        let mut selector = vec![0usize; n];
        loop {
            let mut weight = 1.0;
            // Two product branches: central qubits read k (tilted-cos branch)
            // or the complement (sin branch).
            let mut branch_k = vec![C_ZERO; 1];
            let mut branch_kb = vec![C_ZERO; 1];
            branch_k[0] = Complex64::new(sign * ct, 0.0);
            branch_kb[0] = Complex64::new(st, 0.0);
            for (site, &e) in selector.iter().enumerate() {
                let (w, v0, v1) = &terms_per_link[site][e];
                weight *= w;
                let (vk, vkb) = if idx.bit(site) { (v1, v0) } else { (v0, v1) };
                branch_k = kron_amp(&branch_k, vk);
                branch_kb = kron_amp(&branch_kb, vkb);
            }
            let phi: Vec<Complex64> = branch_k
                .iter()
                .zip(&branch_kb)
                .map(|(a, b)| a + b)
                .collect();
            for row in 0..dim {
                let pr = phi[row] * weight;
                if pr == C_ZERO {
                    continue;
                }
                for col in 0..dim {
                    let add = pr * phi[col].conj();
                    rho.set(row, col, rho.get(row, col) + add);
                }
            }
            // Advance the mixed-radix selector over link eigen-terms.
            let mut done = true;
            for site in (0..n).rev() {
                selector[site] += 1;
                if selector[site] < terms_per_link[site].len() {
                    done = false;
                    break;
                }
                selector[site] = 0;
            }
            if done {
                break;
            }
        }
        let p = rho.trace().re;
        let state = if p > 1e-14 {
            Some(rho.scale_re(1.0 / p).symmetrize())
        } else {
            None
        };
        outcomes.push(ConditionalOutcome {
            r: idx,
            probability: p.max(0.0),
            state,
        });
    }
    Ok(outcomes)
}

fn kron_amp(a: &[Complex64], b: &[Complex64; 2]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * 2);
    for &av in a {
        out.push(av * b[0]);
        out.push(av * b[1]);
    }
    out
}

/// One evaluated correlation condition.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionRecord {
    pub id: String,
    pub lhs: f64,
    pub target: f64,
    pub deviation: f64,
}

/// All conditions for one outcome, plus the worst deviation.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub records: Vec<ConditionRecord>,
    pub max_deviation: f64,
}

impl CorrelationReport {
    fn from_records(records: Vec<ConditionRecord>) -> Self {
        let max_deviation = records.iter().map(|r| r.deviation).fold(0.0, f64::max);
        Self {
            records,
            max_deviation,
        }
    }
}

fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Evaluate the full set of correlation conditions for outcome `r` against a
/// density matrix on the N outer parties, with every condition operator
/// conjugated by the r-th correction word built from the settings-derived
/// (X, Z) pairs.
pub fn evaluate_conditions(
    state: &ComplexMatrix,
    settings: &MeasurementSettings,
    r: OutcomeIndex,
) -> Result<CorrelationReport> {
    let n = settings.n();
    let dim = 1usize << n;
    if state.rows != dim || !state.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "state dim {} does not match {} parties",
            state.rows, n
        )));
    }
    let shape = RegisterShape::qubits(n);
    let (ct, alpha) = (settings.theta.radians().cos(), settings.alpha);
    let c2 = ct * ct;
    let max_chsh = (8.0 + 2.0 * alpha * alpha).sqrt();
    let scale = 1.0 / (1usize << (n - 2)) as f64;

    // Per-site (X, Z) used to realize the correction word: the first N−1
    // parties use their observables directly; the last party's pair is the
    // regularized combination of its rotated observables.
    let mut site_x = Vec::with_capacity(n);
    let mut site_z = Vec::with_capacity(n);
    for (i, (a0, a1)) in settings.observables.iter().enumerate() {
        if i + 1 < n {
            site_x.push(a1.clone());
            site_z.push(a0.clone());
        } else {
            let pair = regularize(a0, a1, settings.mu)?;
            site_x.push(pair.x);
            site_z.push(pair.z);
        }
    }
    let word = ghz_correction_word(n, r)?;

    let expect = |op: &ComplexMatrix| -> Result<f64> {
        let conj = tilde_with(op, &word, &site_x, &site_z)?;
        Ok(state.matmul(&conj).trace().re)
    };

    let mut records = Vec::new();

    // Family 1: first-observable projector marginals and pairwise products,
    // all equal to cos²θ; (i,i) entries are the single-party marginals.
    for i in 0..n - 1 {
        for j in i..n - 1 {
            let pi = projector(&settings.observables[i].0, 0)?;
            let op = if i == j {
                embed(&pi, &shape, &[i])?
            } else {
                let pj = projector(&settings.observables[j].0, 0)?;
                embed(&pi, &shape, &[i])?.matmul(&embed(&pj, &shape, &[j])?)
            };
            let lhs = expect(&op)?;
            records.push(ConditionRecord {
                id: format!("ctheta2:{i}:{j}"),
                lhs,
                target: c2,
                deviation: (lhs - c2).abs(),
            });
        }
    }

    // Families 2 and 3 are indexed by the bitstrings over the first N−2
    // parties' second observables.
    for a_bits in 0..1usize << (n - 2) {
        let bits: Vec<bool> = (0..n - 2).map(|i| (a_bits >> (n - 3 - i)) & 1 == 1).collect();
        let mut prod = ComplexMatrix::identity(dim);
        for (i, &b) in bits.iter().enumerate() {
            let p = projector(&settings.observables[i].1, b as u8)?;
            prod = prod.matmul(&embed(&p, &shape, &[i])?);
        }
        let lhs = expect(&prod)?;
        records.push(ConditionRecord {
            id: format!("prod:{}", bits_string(&bits)),
            lhs,
            target: scale,
            deviation: (lhs - scale).abs(),
        });

        let w = chsh_operator(settings, BellVariant::ABar(bits.clone()))?;
        let op = prod.matmul(&embed(&w.matrix, &shape, &[n - 2, n - 1])?);
        let lhs = expect(&op)?;
        let target = max_chsh * scale;
        records.push(ConditionRecord {
            id: format!("chsh:{}", bits_string(&bits)),
            lhs,
            target,
            deviation: (lhs - target).abs(),
        });
    }

    Ok(CorrelationReport::from_records(records))
}

/// The r = 0 conditions: no conjugation beyond the identity word.
pub fn evaluate_base_conditions(
    state: &ComplexMatrix,
    settings: &MeasurementSettings,
) -> Result<CorrelationReport> {
    evaluate_conditions(state, settings, OutcomeIndex::new(0, settings.n())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::partial_trace;
    use crate::qstates::{ideal_settings, tilted_ghz, StateVector};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn theta(t: f64) -> TiltAngle {
        TiltAngle::new(t).unwrap()
    }

    fn fidelity_with_pure(rho: &ComplexMatrix, v: &StateVector) -> f64 {
        v.inner(&StateVector::new(rho.apply(&v.amps))).re
    }

    #[test]
    fn star_links_have_mixed_marginals() {
        let net = build_star(3, theta(FRAC_PI_6)).unwrap();
        let shape = RegisterShape::qubits(2);
        for link in &net.links {
            let marg = partial_trace(link, &shape, &[1]).unwrap();
            assert!(marg.dist_fro(&ComplexMatrix::identity(2).scale_re(0.5)) < 1e-14);
        }
    }

    #[test]
    fn gsm_on_bell_links_projects_onto_ghz_states() {
        for &t in &[FRAC_PI_4, FRAC_PI_6] {
            for n in [2usize, 3, 4] {
                let net = build_star(n, theta(t)).unwrap();
                let outcomes = apply_gsm(&net).unwrap();
                let uniform = 1.0 / (1usize << n) as f64;
                let mut total = 0.0;
                for out in &outcomes {
                    assert!((out.probability - uniform).abs() < 1e-12, "t={t} n={n}");
                    total += out.probability;
                    let ghz = tilted_ghz(theta(t), n, out.r).unwrap();
                    let f = fidelity_with_pure(out.state.as_ref().unwrap(), &ghz);
                    assert!((f - 1.0).abs() < 1e-10, "t={t} n={n} r={}", out.r.r);
                }
                assert!((total - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_party_swapping_yields_bell_states() {
        let net = build_star(2, theta(FRAC_PI_4)).unwrap();
        let outcomes = apply_gsm(&net).unwrap();
        // Outcome 0 projects the outer pair onto the maximally entangled
        // state itself.
        let bell = tilted_bell(theta(FRAC_PI_4), 0).unwrap();
        let f = fidelity_with_pure(outcomes[0].state.as_ref().unwrap(), &bell);
        assert!((f - 1.0).abs() < 1e-10);
    }

    #[test]
    fn depolarized_links_keep_probabilities_and_validity() {
        let net = build_star_depolarized(3, theta(FRAC_PI_4), 0.2).unwrap();
        let outcomes = apply_gsm(&net).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-10);
        for out in &outcomes {
            let rho = out.state.as_ref().unwrap();
            assert!(rho.is_hermitian(1e-10));
            assert!((rho.trace().re - 1.0).abs() < 1e-10);
            assert!(rho.min_eigenvalue().unwrap() > -1e-10);
        }
    }

    #[test]
    fn correction_word_maps_conditionals_to_ghz0() {
        let t = theta(FRAC_PI_6);
        let n = 3;
        let net = build_star(n, t).unwrap();
        let ghz0 = tilted_ghz(t, n, OutcomeIndex::new(0, n).unwrap()).unwrap();
        for out in apply_gsm(&net).unwrap() {
            let u = ghz_correction_word(n, out.r).unwrap().matrix();
            let rho = out.state.unwrap();
            let rot = u.matmul(&rho).matmul(&u.dagger());
            assert!((fidelity_with_pure(&rot, &ghz0) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn conditions_hold_exactly_on_ideal_states() {
        for &t in &[FRAC_PI_4, FRAC_PI_6] {
            for n in [3usize, 4] {
                let settings = ideal_settings(theta(t), n).unwrap();
                for r in 0..1usize << n {
                    let idx = OutcomeIndex::new(r, n).unwrap();
                    let ghz = tilted_ghz(theta(t), n, idx).unwrap();
                    let report = evaluate_conditions(&ghz.outer(), &settings, idx).unwrap();
                    assert!(
                        report.max_deviation < 1e-9,
                        "t={t} n={n} r={r}: {}",
                        report.max_deviation
                    );
                }
            }
        }
    }

    #[test]
    fn report_matches_untransformed_report_on_rotated_state() {
        // Evaluating outcome r on GHZ^r equals evaluating outcome 0 on GHZ^0,
        // record by record.
        let t = theta(FRAC_PI_6);
        let n = 3;
        let settings = ideal_settings(t, n).unwrap();
        let ghz0 = tilted_ghz(t, n, OutcomeIndex::new(0, n).unwrap()).unwrap();
        let base = evaluate_base_conditions(&ghz0.outer(), &settings).unwrap();
        for r in 0..8 {
            let idx = OutcomeIndex::new(r, n).unwrap();
            let ghz = tilted_ghz(t, n, idx).unwrap();
            let rep = evaluate_conditions(&ghz.outer(), &settings, idx).unwrap();
            for (a, b) in rep.records.iter().zip(&base.records) {
                assert_eq!(a.id, b.id);
                assert!((a.lhs - b.lhs).abs() < 1e-12, "r={r} id={}", a.id);
            }
        }
    }

    #[test]
    fn product_state_fails_the_chsh_family() {
        let t = theta(FRAC_PI_6);
        let n = 3;
        let settings = ideal_settings(t, n).unwrap();
        let mut zero = ComplexMatrix::zeros(8, 8);
        zero.set(0, 0, crate::kernel::C_ONE);
        let report = evaluate_base_conditions(&zero, &settings).unwrap();
        let alpha = settings.alpha;
        let gap = ((8.0 + 2.0 * alpha * alpha).sqrt() - (2.0 + alpha)) / 2.0;
        let worst_chsh = report
            .records
            .iter()
            .filter(|rec| rec.id.starts_with("chsh"))
            .map(|rec| rec.deviation)
            .fold(f64::INFINITY, f64::min);
        assert!(worst_chsh >= gap - 1e-12, "worst {worst_chsh}, gap {gap}");
    }

    #[test]
    fn white_noise_shifts_chsh_records_linearly() {
        let t = theta(FRAC_PI_4);
        let n = 3;
        let eps = 0.1;
        let settings = ideal_settings(t, n).unwrap();
        let ghz = tilted_ghz(t, n, OutcomeIndex::new(0, n).unwrap()).unwrap();
        let noisy = ghz
            .outer()
            .scale_re(1.0 - eps)
            .add(&ComplexMatrix::identity(8).scale_re(eps / 8.0));
        let report = evaluate_base_conditions(&noisy, &settings).unwrap();
        let expected = eps * 8f64.sqrt() / 2.0;
        for rec in report.records.iter().filter(|r| r.id.starts_with("chsh")) {
            assert!((rec.deviation - expected).abs() < 1e-12, "{}", rec.id);
        }
    }

    #[test]
    fn report_serializes_to_json() {
        let t = theta(FRAC_PI_4);
        let settings = ideal_settings(t, 3).unwrap();
        let ghz = tilted_ghz(t, 3, OutcomeIndex::new(0, 3).unwrap()).unwrap();
        let report = evaluate_base_conditions(&ghz.outer(), &settings).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("ctheta2:0:1"));
        assert!(json.contains("max_deviation"));
    }
}
