//! Tuning by substitution of root repetends into binary expansions, and the
//! entropy formulas for tuned angles.

use serde::Serialize;

use crate::circle::{binary_expansions, from_binary, to_binary, Angle, BinaryWords};
use crate::entropy::{core_entropy_with, SpectralConfig};
use crate::error::{Error, Result};
use crate::lamination::ComponentRoot;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TuningWords {
    pub u: String,
    pub v: String,
    pub period: usize,
}

impl TuningWords {
    fn substitute(&self, w: &str) -> String {
        let mut out = String::with_capacity(w.len() * self.period);
        for c in w.chars() {
            out.push_str(if c == '0' { &self.u } else { &self.v });
        }
        out
    }
}

pub fn tuning_words(r: &ComponentRoot) -> TuningWords {
    let rep = |x: &Angle| {
        let w = to_binary(x);
        debug_assert!(w.pre.is_empty());
        // Repeat a shorter repetend up to the period (only 0 has one).
        w.rep.repeat(r.period / w.rep.len())
    };
    TuningWords {
        u: rep(&r.minus),
        v: rep(&r.plus),
        period: r.period,
    }
}

/// Tuned angles of θ, one per binary expansion. For dyadic θ the terminating
/// expansion comes first.
pub fn tune_angle(w: &TuningWords, theta: &Angle) -> Vec<Angle> {
    let mut out: Vec<Angle> = Vec::new();
    for e in binary_expansions(theta).iter().rev() {
        let t = BinaryWords {
            pre: w.substitute(&e.pre),
            rep: w.substitute(&e.rep),
        };
        let a = from_binary(&t);
        if !out.contains(&a) {
            out.push(a);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningReport {
    pub minus: Angle,
    pub plus: Angle,
    pub period: usize,
    pub satellite: bool,
    pub angle: Angle,
    pub tuned: Vec<Angle>,
    pub h_tuned: Vec<f64>,
    pub h_root: f64,
    pub h_angle: f64,
    /// `h_root` for primitive roots, `max(h_root, h_angle / period)` otherwise.
    pub expected: f64,
    pub residual: f64,
    pub spread: f64,
    pub tol: f64,
    pub pass: bool,
}

fn check_excluded(r: &ComponentRoot, theta: &Angle) -> Result<()> {
    if r.satellite && theta.is_zero() {
        return Err(Error::Precondition(format!(
            "tuning the satellite root {r} at angle 0 (c = 1/4) is excluded"
        )));
    }
    Ok(())
}

pub fn tuned_entropy_check(r: &ComponentRoot, theta: &Angle, tol: f64) -> Result<TuningReport> {
    tuned_entropy_check_with(r, theta, tol, &SpectralConfig::default())
}

pub fn tuned_entropy_check_with(
    r: &ComponentRoot,
    theta: &Angle,
    tol: f64,
    cfg: &SpectralConfig,
) -> Result<TuningReport> {
    check_excluded(r, theta)?;
    let tuned = tune_angle(&tuning_words(r), theta);
    let h_tuned = tuned
        .iter()
        .map(|t| core_entropy_with(t, cfg).map(|e| e.h))
        .collect::<Result<Vec<f64>>>()?;
    let h_root = core_entropy_with(&r.minus, cfg)?.h;
    let h_angle = core_entropy_with(theta, cfg)?.h;
    let expected = if r.satellite {
        h_root.max(h_angle / r.period as f64)
    } else {
        h_root
    };
    let residual = h_tuned.iter().map(|h| (h - expected).abs()).fold(0.0, f64::max);
    let hi = h_tuned.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = h_tuned.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    Ok(TuningReport {
        minus: r.minus.clone(),
        plus: r.plus.clone(),
        period: r.period,
        satellite: r.satellite,
        angle: theta.clone(),
        tuned,
        h_tuned,
        h_root,
        h_angle,
        expected,
        residual,
        spread,
        tol,
        pass: residual <= tol && spread <= tol,
    })
}

/// `h(tuned) ≥ h(θ) / p − 1e-9` for every tuned angle.
pub fn renorm_inequality_check(r: &ComponentRoot, theta: &Angle) -> Result<bool> {
    check_excluded(r, theta)?;
    let cfg = SpectralConfig::default();
    let bound = core_entropy_with(theta, &cfg)?.h / r.period as f64 - 1e-9;
    for t in tune_angle(&tuning_words(r), theta) {
        if core_entropy_with(&t, &cfg)?.h < bound {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lamination::root_pair;

    fn a(n: u64, d: u64) -> Angle {
        Angle::from_u64(n, d)
    }

    fn words(theta: Angle) -> TuningWords {
        tuning_words(&root_pair(&theta).unwrap())
    }

    #[test]
    fn word_examples() {
        let w = words(a(1, 3));
        assert_eq!((w.u.as_str(), w.v.as_str(), w.period), ("01", "10", 2));
        let w = words(a(3, 7));
        assert_eq!((w.u.as_str(), w.v.as_str()), ("011", "100"));
        let w = words(a(2, 5));
        assert_eq!((w.u.as_str(), w.v.as_str()), ("0110", "1001"));
    }

    #[test]
    fn substitution_examples() {
        let b = words(a(1, 3));
        assert_eq!(tune_angle(&b, &a(1, 2)), vec![a(7, 12), a(5, 12)]);
        assert_eq!(tune_angle(&b, &a(1, 3)), vec![a(2, 5)]);
        assert_eq!(tune_angle(&b, &Angle::zero()), vec![a(1, 3)]);
        assert_eq!(tune_angle(&b, &a(3, 7)), vec![a(26, 63)]);
        assert!(tune_angle(&words(a(3, 7)), &a(1, 2)).contains(&a(31, 56)));
    }

    #[test]
    fn satellite_at_quarter_is_refused() {
        let r = root_pair(&a(1, 3)).unwrap();
        assert!(matches!(
            tuned_entropy_check(&r, &Angle::zero(), 1e-6),
            Err(Error::Precondition(_))
        ));
        let r = root_pair(&a(3, 7)).unwrap();
        assert!(tuned_entropy_check(&r, &Angle::zero(), 1e-6).unwrap().pass);
    }

    #[test]
    fn renorm_examples() {
        let b = root_pair(&a(1, 3)).unwrap();
        assert!(renorm_inequality_check(&b, &a(1, 2)).unwrap());
        assert!(renorm_inequality_check(&b, &a(1, 3)).unwrap());
        assert!(renorm_inequality_check(&root_pair(&a(3, 7)).unwrap(), &a(1, 2)).unwrap());
    }
}
