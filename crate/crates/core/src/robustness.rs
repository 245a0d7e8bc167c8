//! Closed-form measurement-quality bound: the spectrum functions s and t,
//! the one-dimensional minimization over the overlap parameter, and the
//! noise-threshold finder over a tabulated fidelity curve.

use serde::Serialize;

use crate::error::{Error, Result};

/// s(x) = 2/√(1−x²).
pub fn s_of(x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    Ok(2.0 / (1.0 - x * x).sqrt())
}

/// t(x) = 4/√(1−x²) − 4/(1+x).
pub fn t_of(x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    Ok(4.0 / (1.0 - x * x).sqrt() - 4.0 / (1.0 + x))
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("argument must lie in [0,1), got {x}")));
    }
    Ok(())
}

/// Aggregated fidelity q and the resolution of the minimization grid.
#[derive(Debug, Clone, Copy)]
pub struct QualityInput {
    pub q: f64,
    pub u_grid_resolution: usize,
}

impl QualityInput {
    pub fn new(q: f64) -> Result<Self> {
        Self::with_resolution(q, 4096)
    }

    pub fn with_resolution(q: f64, u_grid_resolution: usize) -> Result<Self> {
        if !(q > 0.5 && q <= 1.0) {
            return Err(Error::Domain(format!("q must lie in (0.5, 1], got {q}")));
        }
        if u_grid_resolution < 2 {
            return Err(Error::Domain("grid resolution must be at least 2".into()));
        }
        Ok(Self {
            q,
            u_grid_resolution,
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QualityBound {
    pub value: f64,
    pub argmin_u: f64,
}

/// Inner objective (2q−1)/√(1−u²) + 1/(1+u).
fn inner(q: f64, u: f64) -> f64 {
    (2.0 * q - 1.0) / (1.0 - u * u).sqrt() + 1.0 / (1.0 + u)
}

/// Lower bound on the simulation quality:
/// [1/(2(1+2√(q(1−q)))²)] · min over u ∈ [0, 2√(q(1−q))] of the inner
/// objective, minimized by a dense grid pass plus golden-section polish.
pub fn quality_bound(input: QualityInput) -> QualityBound {
    let q = input.q;
    let umax = 2.0 * (q * (1.0 - q)).max(0.0).sqrt();
    let prefactor = 1.0 / (2.0 * (1.0 + umax) * (1.0 + umax));
    if umax == 0.0 {
        return QualityBound {
            value: prefactor * inner(q, 0.0),
            argmin_u: 0.0,
        };
    }
    let n = input.u_grid_resolution;
    let mut best = (inner(q, 0.0), 0usize);
    for k in 1..n {
        let u = umax * k as f64 / (n - 1) as f64;
        let v = inner(q, u);
        if v < best.0 {
            best = (v, k);
        }
    }
    // Golden-section polish inside the bracketing cells.
    let lo = umax * best.1.saturating_sub(1) as f64 / (n - 1) as f64;
    let hi = umax * (best.1 + 1).min(n - 1) as f64 / (n - 1) as f64;
    let (u_min, v_min) = golden_section(|u| inner(q, u), lo, hi);
    let (value, argmin_u) = if v_min < best.0 {
        (v_min, u_min)
    } else {
        (best.0, umax * best.1 as f64 / (n - 1) as f64)
    };
    QualityBound {
        value: prefactor * value,
        argmin_u,
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..90 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    let u = 0.5 * (a + b);
    (u, f(u))
}

/// One point of the quality curve; `bound` is absent when the fidelity input
/// gives no leverage (q ≤ 1/2).
#[derive(Debug, Clone, Serialize)]
pub struct QualityPoint {
    pub epsilon: f64,
    pub q: f64,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QualityCurve {
    pub points: Vec<QualityPoint>,
    /// Noise level where the interpolated bound crosses 1/2, if bracketed.
    pub eps_dagger: Option<f64>,
}

/// Evaluate the bound along a tabulated fidelity curve (ε, G(ε)).
pub fn quality_curve(table: &[(f64, f64)]) -> Result<QualityCurve> {
    let mut points = Vec::with_capacity(table.len());
    for &(epsilon, g) in table {
        let bound = if g > 0.5 {
            let q = g.min(1.0);
            Some(quality_bound(QualityInput::new(q)?).value)
        } else {
            None
        };
        points.push(QualityPoint {
            epsilon,
            q: g,
            bound,
        });
    }
    let mut eps_dagger = None;
    for w in points.windows(2) {
        if let (Some(a), Some(b)) = (w[0].bound, w[1].bound) {
            if a >= 0.5 && b < 0.5 {
                let t = (a - 0.5) / (a - b);
                eps_dagger = Some(w[0].epsilon + t * (w[1].epsilon - w[0].epsilon));
                break;
            }
        }
    }
    Ok(QualityCurve { points, eps_dagger })
}

impl QualityCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,q,bound\n");
        for p in &self.points {
            match p.bound {
                Some(b) => out.push_str(&format!("{:.6},{:.9},{:.9}\n", p.epsilon, p.q, b)),
                None => out.push_str(&format!("{:.6},{:.9},nobound\n", p.epsilon, p.q)),
            }
        }
        out
    }
}

/// Weighted aggregation q = Σ_r p_r G(ε_r) with uniform default weights.
pub fn aggregate_q(g_values: &[f64], weights: Option<&[f64]>) -> Result<f64> {
    if g_values.is_empty() {
        return Err(Error::Domain("no fidelity values supplied".into()));
    }
    match weights {
        Some(w) => {
            if w.len() != g_values.len() {
                return Err(Error::ShapeMismatch("weight count mismatch".into()));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-10 || w.iter().any(|&x| x < 0.0) {
                return Err(Error::Domain("weights must be a distribution".into()));
            }
            Ok(g_values.iter().zip(w).map(|(g, w)| g * w).sum())
        }
        None => Ok(g_values.iter().sum::<f64>() / g_values.len() as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn s_and_t_closed_forms() {
        assert!((s_of(0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(t_of(0.0).unwrap().abs() < 1e-15);
        assert!((s_of(0.6).unwrap() - 2.5).abs() < 1e-12);
        assert!((t_of(0.6).unwrap() - 2.5).abs() < 1e-12);
        assert!(s_of(1.0).is_err());
        assert!(t_of(-0.1).is_err());
    }

    #[test]
    fn bound_is_exact_at_full_fidelity() {
        let b = quality_bound(QualityInput::new(1.0).unwrap());
        assert!((b.value - 1.0).abs() < 1e-12);
        assert_eq!(b.argmin_u, 0.0);
    }

    #[test]
    fn bound_matches_brute_force_scan() {
        let input = QualityInput::new(0.75).unwrap();
        let b = quality_bound(input);
        let umax = 2.0 * (0.75f64 * 0.25).sqrt();
        let n = 1_000_000;
        let brute = (0..n)
            .map(|k| inner(0.75, umax * k as f64 / (n - 1) as f64))
            .fold(f64::INFINITY, f64::min)
            / (2.0 * (1.0 + umax) * (1.0 + umax));
        assert!((b.value - brute).abs() < 1e-8, "{} vs {brute}", b.value);
        assert!(b.argmin_u >= 0.0 && b.argmin_u <= umax);
    }

    #[test]
    fn bound_is_monotone_in_q() {
        let mut prev = 0.0;
        for k in 0..50 {
            let q = 0.51 + 0.49 * k as f64 / 49.0;
            let v = quality_bound(QualityInput::new(q).unwrap()).value;
            assert!(v > 0.0 && v <= 1.0 + 1e-9);
            assert!(v >= prev - 1e-12, "q={q}");
            prev = v;
        }
    }

    #[test]
    fn statement_and_spectral_forms_agree() {
        // (4 s(u) q − t(u))/8 = [(2q−1)/√(1−u²) + 1/(1+u)]/2 on the domain.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let q: f64 = rng.gen_range(0.5001..=1.0);
            let u: f64 = rng.gen_range(0.0..0.999);
            let lhs = (4.0 * s_of(u).unwrap() * q - t_of(u).unwrap()) / 8.0;
            let rhs = 0.5 * inner(q, u);
            assert!((lhs - rhs).abs() < 1e-12, "q={q} u={u}");
        }
    }

    #[test]
    fn curve_reports_threshold_and_no_bound_markers() {
        let table = vec![(0.0, 1.0), (0.001, 0.9), (0.002, 0.7), (0.003, 0.55), (0.004, 0.45)];
        let curve = quality_curve(&table).unwrap();
        assert!((curve.points[0].bound.unwrap() - 1.0).abs() < 1e-12);
        assert!(curve.points[4].bound.is_none());
        assert!(curve.eps_dagger.is_some());
        let csv = curve.to_csv();
        assert!(csv.starts_with("epsilon,q,bound\n"));
        assert!(csv.contains("nobound"));
    }

    #[test]
    fn aggregation_defaults_to_uniform_weights() {
        let q = aggregate_q(&[0.9, 0.7], None).unwrap();
        assert!((q - 0.8).abs() < 1e-15);
        let qw = aggregate_q(&[0.9, 0.7], Some(&[0.25, 0.75])).unwrap();
        assert!((qw - 0.75).abs() < 1e-15);
        assert!(aggregate_q(&[], None).is_err());
        assert!(aggregate_q(&[0.9], Some(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn input_domain_guards() {
        assert!(QualityInput::new(0.5).is_err());
        assert!(QualityInput::new(1.0000001).is_err());
        assert!(QualityInput::new(0.75).is_ok());
    }
}
