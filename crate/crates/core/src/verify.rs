//! Property suites run by `verify`: each case is a single checked statement
//! with its measured value.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circle::{orbit2, Angle};
use crate::entropy::{core_entropy_with, iterate_entropy_check, SpectralConfig};
use crate::error::{Error, Result};
use crate::hubbard::{build_tree, find_horseshoe, primitive_bound_check, tree_entropy_with};
use crate::itinerary::companion;
use crate::lamination::{arc_contains, characteristic_arc, root_pair, CircArc, ComponentRoot};
use crate::scan::{periodic_angles, preperiodic_angles, Config};
use crate::survivor::{survivor_dimension_with, HoleKind, DEFAULT_DEPTH};
use crate::tuning::{tune_angle, tuned_entropy_check_with, tuning_words};

pub const ORACLE_TOL: f64 = 1e-6;
pub const MONOTONE_SLACK: f64 = 1e-9;
pub const COUNT_TOL: f64 = 0.02;
pub const DEFAULT_SAMPLES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Monotonicity,
    Tuning,
    PrimitiveBound,
    CrossOracle,
    Survivor,
    Iterate,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [
        Suite::Monotonicity,
        Suite::Tuning,
        Suite::PrimitiveBound,
        Suite::CrossOracle,
        Suite::Survivor,
        Suite::Iterate,
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Monotonicity => "monotonicity",
            Suite::Tuning => "tuning",
            Suite::PrimitiveBound => "primitive-bound",
            Suite::CrossOracle => "cross-oracle",
            Suite::Survivor => "survivor",
            Suite::Iterate => "iterate",
            Suite::All => "all",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    pub suite: Suite,
    pub label: String,
    pub value: f64,
    pub pass: bool,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{v} {} {} ({:.3e})", self.suite, self.label, self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    pub spectral: SpectralConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            spectral: SpectralConfig::default(),
        }
    }
}

impl VerifyConfig {
    pub fn from_config(cfg: &Config, samples: usize) -> VerifyConfig {
        VerifyConfig {
            samples,
            seed: cfg.seed,
            spectral: cfg.spectral(),
        }
    }
}

pub fn anchors() -> Vec<Angle> {
    [(1, 2), (3, 7), (7, 12), (1, 6)]
        .iter()
        .map(|&(n, d)| Angle::from_u64(n, d))
        .collect()
}

/// `n` distinct rational angles with denominators `2..=24`, drawn from a
/// seeded generator.
pub fn sample_angles(n: usize, seed: u64) -> Vec<Angle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Angle> = Vec::new();
    let mut tries = 0;
    while out.len() < n && tries < 100 * n + 100 {
        tries += 1;
        let q = rng.gen_range(2..=24u64);
        let p = rng.gen_range(0..q);
        let a = Angle::from_u64(p, q);
        if !out.contains(&a) {
            out.push(a);
        }
    }
    out
}

/// Distinct root pairs with period at most `period_max`, keyed by `minus`.
pub fn roots_up_to(period_max: usize) -> Result<Vec<ComponentRoot>> {
    let mut out = Vec::new();
    for theta in periodic_angles(period_max) {
        if theta.is_zero() {
            continue;
        }
        let r = root_pair(&theta)?;
        if r.minus == theta {
            out.push(r);
        }
    }
    Ok(out)
}

pub fn run(suite: Suite, cfg: &VerifyConfig) -> Result<Vec<Case>> {
    match suite {
        Suite::Monotonicity => monotonicity(cfg),
        Suite::Tuning => tuning(cfg),
        Suite::PrimitiveBound => primitive_bound(),
        Suite::CrossOracle => cross_oracle(cfg),
        Suite::Survivor => survivor(cfg),
        Suite::Iterate => iterate(cfg),
        Suite::All => {
            let mut out = Vec::new();
            for s in Suite::EACH {
                out.extend(run(s, cfg)?);
            }
            Ok(out)
        }
    }
}

fn case(suite: Suite, label: String, value: f64, pass: bool) -> Case {
    Case {
        suite,
        label,
        value,
        pass,
    }
}

/// For each primitive root θ2 of period ≤ 8, the worst excess
/// `h(θ1) − h(θ2)` over periodic θ1 whose characteristic arc contains θ2's.
pub fn monotonicity(cfg: &VerifyConfig) -> Result<Vec<Case>> {
    let angles: Vec<Angle> = periodic_angles(8).into_iter().filter(|a| !a.is_zero()).collect();
    let mut data: Vec<(Angle, CircArc, f64, bool)> = Vec::new();
    for a in angles {
        let arc = characteristic_arc(&a)?;
        let h = core_entropy_with(&a, &cfg.spectral)?.h;
        let primitive = !root_pair(&a)?.satellite;
        data.push((a, arc, h, primitive));
    }
    let mut out = Vec::new();
    for (t2, arc2, h2, primitive) in &data {
        if !primitive {
            continue;
        }
        let mut worst = f64::NEG_INFINITY;
        let mut n = 0;
        for (t1, arc1, h1, _) in &data {
            if t1 != t2 && arc_contains(arc1, arc2) {
                n += 1;
                worst = worst.max(h1 - h2);
            }
        }
        if n > 0 {
            let label = format!("{t2}: {n} enclosing angles, max h excess");
            out.push(case(Suite::Monotonicity, label, worst, worst <= MONOTONE_SLACK));
        }
    }
    Ok(out)
}

pub fn tuning(cfg: &VerifyConfig) -> Result<Vec<Case>> {
    let s = Suite::Tuning;
    let ln2 = std::f64::consts::LN_2;
    let ln_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let basilica = root_pair(&Angle::from_u64(1, 3))?;
    let airplane = root_pair(&Angle::from_u64(3, 7))?;
    let a = Angle::from_u64;
    let mut out = Vec::new();

    let check = |r: &ComponentRoot, theta: &Angle| tuned_entropy_check_with(r, theta, ORACLE_TOL, &cfg.spectral);
    let examples = [
        (&basilica, a(1, 2), vec![a(7, 12), a(5, 12)], 0.5 * ln2),
        (&airplane, a(1, 2), vec![a(31, 56)], ln_phi),
        (&basilica, a(3, 7), vec![a(26, 63)], 0.5 * ln_phi),
    ];
    for (r, theta, want, h) in examples {
        let rep = check(r, &theta)?;
        let angles_ok = if want.len() == 1 {
            rep.tuned.contains(&want[0])
        } else {
            rep.tuned == want
        };
        let err = rep.h_tuned.iter().map(|x| (x - h).abs()).fold(0.0, f64::max);
        let tuned: Vec<String> = rep.tuned.iter().map(|t| t.to_string()).collect();
        let label = format!("tune({}, {theta}) = {{{}}}, |h - expected|", r.minus, tuned.join(", "));
        out.push(case(s, label, err, angles_ok && err <= ORACLE_TOL && rep.pass));
    }

    let samples = sample_angles(cfg.samples, cfg.seed);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for theta in &samples {
        let rep = check(&airplane, theta)?;
        for &h in &rep.h_tuned {
            lo = lo.min(h);
            hi = hi.max(h);
        }
        out.push(case(s, format!("primitive formula, root 3/7, angle {theta}"), rep.residual, rep.pass));
    }
    out.push(case(
        s,
        format!("primitive constancy, root 3/7, spread over {} angles", samples.len()),
        hi - lo,
        samples.len() >= 20 && hi - lo <= ORACLE_TOL,
    ));

    for theta in samples.iter().filter(|t| !t.is_zero()) {
        let rep = check(&basilica, theta)?;
        out.push(case(s, format!("satellite max formula, root 1/3, angle {theta}"), rep.residual, rep.pass));
    }

    for r in [&basilica, &airplane] {
        let w = tuning_words(r);
        let wake = CircArc::new(r.minus.clone(), r.plus.clone());
        for theta in &samples {
            if !(r.satellite && theta.is_zero()) {
                let ok = crate::tuning::renorm_inequality_check(r, theta)?;
                out.push(case(s, format!("renormalization bound, root {}, angle {theta}", r.minus), 0.0, ok));
            }
            let tuned = tune_angle(&w, theta);
            let inside = tuned.iter().all(|t| wake.contains_point(t));
            out.push(case(s, format!("tuned angles in wake, root {}, angle {theta}", r.minus), 0.0, inside));
            if !theta.is_dyadic() {
                let lhs = tune_angle(&w, &theta.double());
                let rhs: Vec<Angle> = tuned.iter().map(|t| shift(t, r.period)).collect();
                out.push(case(
                    s,
                    format!("substitution commutes with doubling, root {}, angle {theta}", r.minus),
                    0.0,
                    lhs == rhs,
                ));
            }
        }
    }
    Ok(out)
}

fn shift(t: &Angle, p: usize) -> Angle {
    (0..p).fold(t.clone(), |x, _| x.double())
}

pub fn primitive_bound() -> Result<Vec<Case>> {
    let s = Suite::PrimitiveBound;
    let mut out = Vec::new();
    for r in roots_up_to(8)?.into_iter().filter(|r| !r.satellite) {
        let h = core_entropy_with(&r.minus, &SpectralConfig::default())?.h;
        let margin = h - std::f64::consts::LN_2 / r.period as f64;
        let ok = primitive_bound_check(&r)?;
        out.push(case(s, format!("h({}) >= log 2 / {}, margin", r.minus, r.period), margin, ok));
        if r.period <= 6 {
            let w = find_horseshoe(&r, 2 * r.period)?;
            let k = w.as_ref().map_or(0.0, |w| w.k as f64);
            out.push(case(s, format!("horseshoe for {}, iterate", r.minus), k, w.is_some()));
        }
    }
    Ok(out)
}

/// Tree oracle against pair oracle on strictly preperiodic `p/q`, `q ≤ 120`,
/// and periodic angles of period ≤ 8; real-slice angles must give paths.
pub fn cross_oracle(cfg: &VerifyConfig) -> Result<Vec<Case>> {
    let s = Suite::CrossOracle;
    let mut out = Vec::new();
    let mut angles = preperiodic_angles(120);
    angles.extend(periodic_angles(8));
    for theta in &angles {
        let pairs = core_entropy_with(theta, &cfg.spectral)?.h;
        let tree = tree_entropy_with(theta, &cfg.spectral)?.h;
        let d = (tree - pairs).abs();
        out.push(case(s, format!("|tree - pairs| at {theta}"), d, d <= ORACLE_TOL));
    }
    for theta in periodic_angles(8) {
        if theta.is_zero() || companion(&theta) != Some(theta.conjugate()) {
            continue;
        }
        let t = build_tree(&theta)?;
        out.push(case(s, format!("real-slice tree of {theta} is a path"), t.vertices.len() as f64, t.is_path()));
    }
    Ok(out)
}

pub fn survivor(cfg: &VerifyConfig) -> Result<Vec<Case>> {
    let s = Suite::Survivor;
    let ln2 = std::f64::consts::LN_2;
    let mut out = Vec::new();
    for theta in anchors() {
        let h = core_entropy_with(&theta, &cfg.spectral)?.h;
        let d = survivor_dimension_with(&theta, DEFAULT_DEPTH, HoleKind::Biaccessible, &cfg.spectral)?;
        let e = (ln2 * d.transfer - h).abs();
        out.push(case(s, format!("|log 2 dim - h| at {theta}, transfer"), e, e <= ORACLE_TOL));
        let e = (ln2 * d.count - h).abs();
        out.push(case(
            s,
            format!("|log 2 dim - h| at {theta}, {} cylinders at depth {}", d.cylinders, d.depth),
            e,
            e <= COUNT_TOL,
        ));
    }
    let mut sweep = preperiodic_angles(40);
    sweep.extend(periodic_angles(6));
    sweep.extend(sample_angles(cfg.samples, cfg.seed));
    for theta in sweep {
        let h = core_entropy_with(&theta, &cfg.spectral)?.h;
        let d = crate::survivor::survivor_entropy(&theta, HoleKind::Biaccessible, &cfg.spectral)?.h;
        let e = (d - h).abs();
        out.push(case(s, format!("|log 2 dim - h| at {theta}, transfer"), e, e <= ORACLE_TOL));
    }
    Ok(out)
}

pub fn iterate(cfg: &VerifyConfig) -> Result<Vec<Case>> {
    let mut angles = anchors();
    angles.extend(sample_angles(cfg.samples, cfg.seed).into_iter().filter(|a| orbit2(a).period <= 12));
    let mut out = Vec::new();
    for theta in &angles {
        for n in 1..=4 {
            let ok = iterate_entropy_check(theta, n, ORACLE_TOL)?;
            out.push(case(Suite::Iterate, format!("h of {n}-step matrix at {theta}"), n as f64, ok));
        }
    }
    Ok(out)
}
