//! Core entropy from the pair-transition graph of the postcritical orbit, and
//! Perron roots of nonnegative integer matrices.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::circle::{in_open_arc_unchecked, orbit2, Angle};
use crate::error::{Error, Result};
use crate::itinerary::portrait;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pairs,
    Tree,
    SurvivorTransfer,
    SurvivorCount,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Pairs => "pairs",
            Method::Tree => "tree",
            Method::SurvivorTransfer => "survivor-transfer",
            Method::SurvivorCount => "survivor-count",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PairNode {
    pub a: Angle,
    pub b: Angle,
}

impl PairNode {
    fn new(x: &Angle, y: &Angle) -> PairNode {
        if x <= y {
            PairNode {
                a: x.clone(),
                b: y.clone(),
            }
        } else {
            PairNode {
                a: y.clone(),
                b: x.clone(),
            }
        }
    }
}

/// Sparse nonnegative integer matrix with labelled rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGraph<L> {
    pub nodes: Vec<L>,
    /// `adjacency[i]` lists `(j, multiplicity)` with `j` ascending.
    pub adjacency: Vec<Vec<(usize, u64)>>,
}

impl<L> TransitionGraph<L> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn from_rows(nodes: Vec<L>, rows: Vec<BTreeMap<usize, u64>>) -> Self {
        let adjacency = rows
            .into_iter()
            .map(|r| r.into_iter().filter(|&(_, m)| m > 0).collect())
            .collect();
        TransitionGraph { nodes, adjacency }
    }

    pub fn dense(&self) -> Vec<Vec<u64>> {
        let n = self.len();
        let mut m = vec![vec![0; n]; n];
        for (i, row) in self.adjacency.iter().enumerate() {
            for &(j, w) in row {
                m[i][j] += w;
            }
        }
        m
    }

    /// The `n`-th matrix power, with unlabelled nodes.
    pub fn power(&self, n: usize) -> TransitionGraph<usize> {
        let size = self.len();
        let mut rows: Vec<BTreeMap<usize, u64>> = (0..size)
            .map(|i| std::iter::once((i, 1u64)).collect())
            .collect();
        for _ in 0..n {
            rows = rows
                .iter()
                .map(|row| {
                    let mut next = BTreeMap::new();
                    for (&k, &w) in row {
                        for &(j, v) in &self.adjacency[k] {
                            *next.entry(j).or_insert(0u64) += w * v;
                        }
                    }
                    next
                })
                .collect();
        }
        TransitionGraph::from_rows((0..size).collect(), rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyResult {
    pub h: f64,
    pub rho: f64,
    pub matrix_size: usize,
    pub residual: f64,
    pub method: Method,
}

impl EntropyResult {
    fn from_radius(r: Radius, size: usize, method: Method) -> EntropyResult {
        // Matrices without cycles (or empty ones) carry no entropy.
        let rho = r.rho.max(1.0);
        EntropyResult {
            h: rho.ln(),
            rho,
            matrix_size: size,
            residual: r.residual,
            method,
        }
    }

    pub fn zero(method: Method) -> EntropyResult {
        EntropyResult {
            h: 0.0,
            rho: 1.0,
            matrix_size: 0,
            residual: 0.0,
            method,
        }
    }
}

/// Flat serialization record of an entropy computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRecord {
    pub angle: Angle,
    pub preperiod: usize,
    pub period: usize,
    pub method: Method,
    pub rho: f64,
    pub h: f64,
    pub matrix_size: usize,
    pub residual: f64,
}

impl EntropyRecord {
    pub fn new(theta: &Angle, r: &EntropyResult) -> EntropyRecord {
        let o = orbit2(theta);
        EntropyRecord {
            angle: theta.clone(),
            preperiod: o.preperiod,
            period: o.period,
            method: r.method,
            rho: r.rho,
            h: r.h,
            matrix_size: r.matrix_size,
            residual: r.residual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radius {
    pub rho: f64,
    pub residual: f64,
}

/// Pair graph of θ: nodes are unordered pairs from `P = orbit(θ)`.
pub fn thurston_graph(theta: &Angle) -> TransitionGraph<PairNode> {
    if theta.is_zero() {
        return TransitionGraph {
            nodes: Vec::new(),
            adjacency: Vec::new(),
        };
    }
    let pt = portrait(theta);
    let points = orbit2(theta).points;
    let doubled: Vec<Angle> = points.iter().map(Angle::double).collect();
    let index_of: HashMap<&Angle, usize> = points.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let n = points.len();
    let pair_id = |i: usize, j: usize| {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        // Row-major index into the strict upper triangle.
        i * (2 * n - i - 1) / 2 + (j - i - 1)
    };
    let side = |x: &Angle| {
        if x == &pt.lo || x == &pt.hi {
            None
        } else {
            Some(in_open_arc_unchecked(x, &pt.lo, &pt.hi))
        }
    };
    let sides: Vec<Option<bool>> = points.iter().map(side).collect();
    let img: Vec<usize> = doubled.iter().map(|x| index_of[x]).collect();
    let theta_id = 0usize;

    let mut nodes = Vec::with_capacity(n * (n - 1) / 2);
    let mut rows = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            nodes.push(PairNode::new(&points[i], &points[j]));
            let mut row: BTreeMap<usize, u64> = BTreeMap::new();
            let mut push = |x: usize, y: usize| {
                if x != y {
                    *row.entry(pair_id(x, y)).or_insert(0) += 1;
                }
            };
            let separated = matches!((sides[i], sides[j]), (Some(s), Some(t)) if s != t);
            if separated {
                push(theta_id, img[i]);
                push(theta_id, img[j]);
            } else {
                push(img[i], img[j]);
            }
            rows.push(row);
        }
    }
    TransitionGraph::from_rows(nodes, rows)
}

/// Perron root of a nonnegative integer matrix.
///
/// The matrix is split into strongly connected components. On each
/// nontrivial component, power iteration runs on `M + I`, which is primitive,
/// and the Collatz–Wielandt quotients `min (Mx)_i/x_i ≤ ρ ≤ max (Mx)_i/x_i`
/// give a certified bracket; iteration stops when the bracket is narrower
/// than `tol`.
pub fn spectral_radius<L>(g: &TransitionGraph<L>, cfg: &SpectralConfig) -> Result<Radius> {
    if cfg.tol <= 0.0 || !cfg.tol.is_finite() {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    let n = g.len();
    if n == 0 {
        return Ok(Radius {
            rho: 0.0,
            residual: 0.0,
        });
    }
    let mut dg: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
    let ids: Vec<_> = (0..n).map(|_| dg.add_node(())).collect();
    for (i, row) in g.adjacency.iter().enumerate() {
        for &(j, _) in row {
            dg.add_edge(ids[i], ids[j], ());
        }
    }
    let mut best = Radius {
        rho: 0.0,
        residual: 0.0,
    };
    let mut local = vec![usize::MAX; n];
    for comp in tarjan_scc(&dg) {
        let members: Vec<usize> = comp.iter().map(|v| v.index()).collect();
        let r = if members.len() == 1 {
            let i = members[0];
            let w = g.adjacency[i].iter().find(|&&(j, _)| j == i).map_or(0, |&(_, w)| w);
            Radius {
                rho: w as f64,
                residual: 0.0,
            }
        } else {
            for (k, &i) in members.iter().enumerate() {
                local[i] = k;
            }
            let sub: Vec<Vec<(usize, f64)>> = members
                .iter()
                .map(|&i| {
                    g.adjacency[i]
                        .iter()
                        .filter(|&&(j, _)| local[j] != usize::MAX)
                        .map(|&(j, w)| (local[j], w as f64))
                        .collect()
                })
                .collect();
            let r = irreducible_radius(&sub, cfg);
            for &i in &members {
                local[i] = usize::MAX;
            }
            r?
        };
        if r.rho > best.rho {
            best = r;
        }
    }
    Ok(best)
}

fn irreducible_radius(m: &[Vec<(usize, f64)>], cfg: &SpectralConfig) -> Result<Radius> {
    let n = m.len();
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    let (mut lower, mut upper) = (0.0, f64::INFINITY);
    for _ in 0..cfg.max_iter {
        for i in 0..n {
            let mut s = x[i];
            for &(j, w) in &m[i] {
                s += w * x[j];
            }
            y[i] = s;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let q = y[i] / x[i];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        lower = lo - 1.0;
        upper = hi - 1.0;
        if upper - lower < cfg.tol {
            return Ok(Radius {
                rho: 0.5 * (lower + upper),
                residual: upper - lower,
            });
        }
        let scale = y.iter().cloned().fold(0.0f64, f64::max);
        for i in 0..n {
            x[i] = y[i] / scale;
        }
    }
    Err(Error::Convergence {
        iterations: cfg.max_iter,
        lower,
        upper,
    })
}

pub fn entropy_of<L>(g: &TransitionGraph<L>, cfg: &SpectralConfig, method: Method) -> Result<EntropyResult> {
    let r = spectral_radius(g, cfg)?;
    Ok(EntropyResult::from_radius(r, g.len(), method))
}

pub fn core_entropy(theta: &Angle) -> Result<EntropyResult> {
    core_entropy_with(theta, &SpectralConfig::default())
}

pub fn core_entropy_with(theta: &Angle, cfg: &SpectralConfig) -> Result<EntropyResult> {
    if theta.is_zero() {
        return Ok(EntropyResult::zero(Method::Pairs));
    }
    entropy_of(&thurston_graph(theta), cfg, Method::Pairs)
}

/// Checks `log ρ(Mⁿ) = n log ρ(M)` for the pair matrix of θ, to relative
/// tolerance `tol` (absolute when the entropy vanishes).
pub fn iterate_entropy_check(theta: &Angle, n: usize, tol: f64) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidInput("iterate count must be at least 1".into()));
    }
    let g = thurston_graph(theta);
    let cfg = SpectralConfig::default();
    let h1 = entropy_of(&g, &cfg, Method::Pairs)?.h;
    let hn = entropy_of(&g.power(n), &cfg, Method::Pairs)?.h;
    let expected = n as f64 * h1;
    Ok((hn - expected).abs() <= tol * expected.abs().max(1.0))
}
