//! Bulk entropy scans over families of rational angles, with deterministic
//! CSV output.

use std::collections::BTreeSet;
use std::io::Write;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::circle::{orbit2, Angle};
use crate::entropy::{core_entropy_with, EntropyResult, Method, SpectralConfig, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::hubbard::tree_entropy_with;
use crate::lamination::{minor_class, root_pair};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub tol: f64,
    pub max_iter: usize,
    pub jobs: usize,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            jobs: 1,
            seed: 0,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidInput("jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn spectral(&self) -> SpectralConfig {
        SpectralConfig {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub angle: Angle,
    pub preperiod: usize,
    pub period: usize,
    pub h: f64,
    pub method: Method,
    pub residual: f64,
    pub minor_lo: Angle,
    pub minor_hi: Angle,
    /// `None` for strictly preperiodic angles and for 0.
    pub satellite: Option<bool>,
}

pub const CSV_HEADER: [&str; 10] = [
    "angle_num",
    "angle_den",
    "preperiod",
    "period",
    "h",
    "method",
    "residual",
    "minor_lo",
    "minor_hi",
    "satellite",
];

impl ScanRow {
    fn record(&self) -> [String; 10] {
        [
            self.angle.numer().to_string(),
            self.angle.denom().to_string(),
            self.preperiod.to_string(),
            self.period.to_string(),
            format!("{:.10}", self.h),
            self.method.to_string(),
            format!("{:.3e}", self.residual),
            self.minor_lo.to_string(),
            self.minor_hi.to_string(),
            match self.satellite {
                Some(true) => "true".into(),
                Some(false) => "false".into(),
                None => "n/a".into(),
            },
        ]
    }
}

/// All `k/(2^p − 1)` with `1 ≤ p ≤ period_max`, in lowest terms.
pub fn periodic_angles(period_max: usize) -> Vec<Angle> {
    let mut out = BTreeSet::new();
    for p in 1..=period_max {
        let d: BigUint = (BigUint::from(1u32) << p) - 1u32;
        let mut k = BigUint::from(0u32);
        while k < d {
            out.insert(key(&Angle::new(k.clone(), d.clone()).expect("nonzero")));
            k += 1u32;
        }
    }
    out.into_iter().map(|(_, _, a)| a).collect()
}

/// All reduced `p/q` with even `q ≤ den_max`.
pub fn preperiodic_angles(den_max: u64) -> Vec<Angle> {
    let mut out = Vec::new();
    for q in (2..=den_max).step_by(2) {
        for p in 1..q {
            if num_integer::gcd(p, q) == 1 {
                out.push(Angle::from_u64(p, q));
            }
        }
    }
    out
}

fn key(a: &Angle) -> (BigUint, BigUint, Angle) {
    (a.denom().clone(), a.numer().clone(), a.clone())
}

/// The scan family, sorted by `(den, num)` without duplicates.
pub fn scan_angles(period_max: Option<usize>, den_max: Option<u64>) -> Vec<Angle> {
    let mut all = BTreeSet::new();
    if let Some(p) = period_max {
        all.extend(periodic_angles(p).iter().map(key));
    }
    if let Some(q) = den_max {
        all.extend(preperiodic_angles(q).iter().map(key));
    }
    all.into_iter().map(|(_, _, a)| a).collect()
}

pub fn entropy_by(theta: &Angle, method: Method, cfg: &SpectralConfig) -> Result<EntropyResult> {
    match method {
        Method::Pairs => core_entropy_with(theta, cfg),
        Method::Tree => tree_entropy_with(theta, cfg),
        Method::SurvivorTransfer => crate::survivor::survivor_entropy(theta, Default::default(), cfg),
        Method::SurvivorCount => Err(Error::InvalidInput("survivor-count is not a scan method".into())),
    }
}

pub fn scan_row(theta: &Angle, method: Method, cfg: &SpectralConfig) -> Result<ScanRow> {
    let e = entropy_by(theta, method, cfg)?;
    let o = orbit2(theta);
    let minor = minor_class(theta);
    let satellite = if theta.is_periodic() && !theta.is_zero() {
        Some(root_pair(theta)?.satellite)
    } else {
        None
    };
    Ok(ScanRow {
        angle: theta.clone(),
        preperiod: o.preperiod,
        period: o.period,
        h: e.h,
        method,
        residual: e.residual,
        minor_lo: minor.a,
        minor_hi: minor.b,
        satellite,
    })
}

/// Rows for every angle and method, sorted by `(den, num)` and then by the
/// order of `methods`, independent of `cfg.jobs`.
pub fn run_scan(angles: &[Angle], methods: &[Method], cfg: &Config) -> Result<Vec<ScanRow>> {
    cfg.validate()?;
    let spectral = cfg.spectral();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let jobs: Vec<(usize, &Angle, Method)> = angles
        .iter()
        .flat_map(|a| methods.iter().map(move |&m| (a, m)))
        .enumerate()
        .map(|(i, (a, m))| (i, a, m))
        .collect();
    let mut rows: Vec<(usize, ScanRow)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, a, m)| scan_row(a, m, &spectral).map(|r| (i, r)))
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by(|(i, x), (j, y)| {
        (x.angle.denom(), x.angle.numer(), i).cmp(&(y.angle.denom(), y.angle.numer(), j))
    });
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

pub fn write_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidInput(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.record()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("writing CSV: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: u64, d: u64) -> Angle {
        Angle::from_u64(n, d)
    }

    #[test]
    fn families() {
        assert_eq!(scan_angles(Some(1), None), vec![Angle::zero()]);
        let p3 = scan_angles(Some(3), None);
        let expect: Vec<Angle> = [(0, 1), (1, 3), (2, 3), (1, 7), (2, 7), (3, 7), (4, 7), (5, 7), (6, 7)]
            .iter()
            .map(|&(n, d)| a(n, d))
            .collect();
        assert_eq!(p3, expect);
        let pre = scan_angles(None, Some(6));
        assert_eq!(pre, vec![a(1, 2), a(1, 4), a(3, 4), a(1, 6), a(5, 6)]);
    }

    #[test]
    fn rows_and_csv() {
        let rows = run_scan(&scan_angles(Some(3), Some(12)), &[Method::Pairs], &Config::default()).unwrap();
        let r = rows.iter().find(|r| r.angle == a(7, 12)).unwrap();
        assert!((r.h - 0.5 * std::f64::consts::LN_2).abs() < 1e-9);
        assert_eq!(r.satellite, None);
        let r = rows.iter().find(|r| r.angle == a(1, 3)).unwrap();
        assert_eq!(r.satellite, Some(true));
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("0,1,0,1,0.0000000000,pairs,"));
    }
}
