//! Survivor sets of angle doubling with a hole, and their dimension.
//!
//! The default hole is the set of angles whose rays do not land on the
//! Hubbard tree as biaccessible pairs: for each tree edge the angles between
//! the two ends of the edge on either side are kept, minus the sectors cut off
//! by the symmetric copies of marked points. The survivors of doubling with
//! this hole are the biaccessible angles, so `log 2 · dim = h`.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::circle::{orbit2, Angle};
use crate::entropy::{spectral_radius, EntropyResult, Method, SpectralConfig, TransitionGraph};
use crate::error::{Error, Result};
use crate::hubbard::{build_tree, HubbardTree};
use crate::itinerary::{portrait, CriticalPortrait, Symbol};
use crate::lamination::characteristic_arc;

pub const DEFAULT_DEPTH: usize = 22;
const MAX_DEPTH: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HoleKind {
    #[default]
    Biaccessible,
    CharacteristicArc,
}

impl std::fmt::Display for HoleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HoleKind::Biaccessible => "biaccessible",
            HoleKind::CharacteristicArc => "characteristic-arc",
        })
    }
}

/// Open counterclockwise arc `(lo, hi)`; `lo == hi` is the circle minus a point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpenArc {
    pub lo: Angle,
    pub hi: Angle,
}

impl OpenArc {
    pub fn length(&self) -> BigRational {
        if self.lo == self.hi {
            BigRational::one()
        } else {
            self.lo.ccw_to(&self.hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hole {
    pub kind: HoleKind,
    /// Sorted endpoint set of the Markov partition.
    pub partition: Vec<Angle>,
    /// Open partition intervals that survive.
    pub allowed: Vec<OpenArc>,
    /// Maximal open arcs removed, in circular order.
    pub arcs: Vec<OpenArc>,
    #[serde(skip)]
    allowed_index: Vec<usize>,
    #[serde(skip)]
    image: Vec<usize>,
}

impl Hole {
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }
}

/// Open arc between partition points, by index: starts at point `lo` and
/// runs `len` intervals counterclockwise (`len == n` is the circle minus a point).
#[derive(Debug, Clone, Copy)]
struct Span {
    lo: usize,
    len: usize,
}

impl Span {
    fn contains(&self, other: Span, n: usize) -> bool {
        (other.lo + n - self.lo) % n + other.len <= self.len
    }
}

struct Partition {
    points: Vec<Angle>,
    index: HashMap<Angle, usize>,
}

impl Partition {
    fn new(points: BTreeSet<Angle>) -> Result<Partition> {
        for e in &points {
            if !points.contains(&e.double()) {
                return Err(Error::NonMarkov(format!("partition point {e} maps outside the partition")));
            }
        }
        let points: Vec<Angle> = points.into_iter().collect();
        let index = points.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect();
        Ok(Partition { points, index })
    }

    fn len(&self) -> usize {
        self.points.len()
    }

    fn span(&self, lo: &Angle, hi: &Angle) -> Span {
        let n = self.len();
        let (l, h) = (self.index[lo], self.index[hi]);
        let len = (h + n - l) % n;
        Span {
            lo: l,
            len: if len == 0 { n } else { len },
        }
    }
}

/// Open hole arcs are maximal runs of excluded intervals, broken at the
/// partition points listed in `breaks`.
fn assemble(kind: HoleKind, part: Partition, breaks: &BTreeSet<Angle>, keep: impl Fn(Span) -> bool) -> Hole {
    let n = part.len();
    let pts = &part.points;
    let arc = |lo: usize, hi: usize| OpenArc {
        lo: pts[lo % n].clone(),
        hi: pts[hi % n].clone(),
    };
    let flags: Vec<bool> = (0..n).map(|i| keep(Span { lo: i, len: 1 })).collect();
    let allowed_index: Vec<usize> = (0..n).filter(|&i| flags[i]).collect();
    let allowed = allowed_index.iter().map(|&i| arc(i, i + 1)).collect();
    let image = pts.iter().map(|x| part.index[&x.double()]).collect();
    let mut arcs = Vec::new();
    if allowed_index.is_empty() {
        arcs.push(arc(0, 0));
    } else {
        // Start after an allowed interval so that runs do not wrap.
        let start = allowed_index[0] + 1;
        let mut run: Option<usize> = None;
        for i in start..start + n {
            match (flags[i % n], run) {
                (false, None) => run = Some(i),
                (true, Some(lo)) => {
                    arcs.push(arc(lo, i));
                    run = None;
                }
                (false, Some(lo)) if breaks.contains(&pts[i % n]) => {
                    arcs.push(arc(lo, i));
                    run = Some(i);
                }
                _ => {}
            }
        }
        if let Some(lo) = run {
            arcs.push(arc(lo, start));
        }
        arcs.sort_by(|a, b| a.lo.cmp(&b.lo));
    }
    Hole {
        kind,
        partition: part.points,
        allowed,
        arcs,
        allowed_index,
        image,
    }
}

/// Side arcs of every tree edge: the angles strictly between the two ends of
/// the edge on either side of it.
fn side_arcs(t: &HubbardTree) -> Vec<(Angle, Angle)> {
    let mut out = Vec::new();
    for &(x, y) in &t.edges {
        for (u, v) in [(x, y), (y, x)] {
            let au = &t.vertices[u].angles;
            let av = &t.vertices[v].angles;
            // Gap of u containing v.
            let (a1, a2) = if au.len() == 1 {
                (au[0].clone(), au[0].clone())
            } else {
                let pos = au.partition_point(|a| a < &av[0]);
                let i = if pos == 0 { au.len() - 1 } else { pos - 1 };
                (au[i].clone(), au[(i + 1) % au.len()].clone())
            };
            let mut from_a1: Vec<&Angle> = av.iter().collect();
            from_a1.sort_by_key(|b| a1.ccw_to(b));
            out.push((a1, from_a1[0].clone()));
            out.push((from_a1[from_a1.len() - 1].clone(), a2));
        }
    }
    out
}

/// Preimage classes of a vertex class: the halves split by the critical
/// portrait, or a single class when the vertex is the critical value.
fn preimage_classes(pt: &CriticalPortrait, class: &[Angle]) -> Vec<Vec<Angle>> {
    let halves: Vec<Angle> = class
        .iter()
        .flat_map(|a| {
            let h = a.halve();
            [h.antipode(), h]
        })
        .collect();
    let symbols: Vec<Symbol> = halves.iter().map(|x| pt.symbol(x)).collect();
    let mut out = Vec::new();
    if symbols.contains(&Symbol::Star) {
        out.push(halves);
    } else {
        for side in [Symbol::Zero, Symbol::One] {
            out.push(halves.iter().zip(&symbols).filter(|(_, &s)| s == side).map(|(x, _)| x.clone()).collect());
        }
    }
    for c in &mut out {
        c.sort();
    }
    out
}

pub fn biaccessible_hole(theta: &Angle) -> Result<Hole> {
    let t = build_tree(theta)?;
    let pt = portrait(theta);
    let mut points: BTreeSet<Angle> = BTreeSet::from([Angle::zero(), Angle::half()]);
    let mut classes: BTreeSet<Vec<Angle>> = BTreeSet::new();
    let mut landing: BTreeSet<Angle> = BTreeSet::new();
    for v in &t.vertices {
        points.extend(v.angles.iter().cloned());
        landing.extend(v.angles.iter().cloned());
        for c in preimage_classes(&pt, &v.angles) {
            points.extend(c.iter().cloned());
            classes.insert(c);
        }
    }
    let part = Partition::new(points)?;
    let n = part.len();
    let sides: Vec<Span> = side_arcs(&t).iter().map(|(a, b)| part.span(a, b)).collect();
    // Sectors at preimages of vertices that lie beside an edge are the
    // decorations hanging off the tree; they leave the tree's angle set.
    let mut cuts: Vec<Span> = Vec::new();
    for c in classes.iter().filter(|c| c.len() > 1) {
        for i in 0..c.len() {
            let sector = part.span(&c[i], &c[(i + 1) % c.len()]);
            if sides.iter().any(|s| s.contains(sector, n)) {
                cuts.push(sector);
            }
        }
    }
    Ok(assemble(HoleKind::Biaccessible, part, &landing, |j| {
        sides.iter().any(|s| s.contains(j, n)) && !cuts.iter().any(|c| c.contains(j, n))
    }))
}

/// Hole given by the open characteristic arc; partition points are the
/// forward orbits of the minor endpoints together with 0 and 1/2.
pub fn characteristic_hole(theta: &Angle) -> Result<Hole> {
    let arc = characteristic_arc(theta)?;
    let mut points: BTreeSet<Angle> = BTreeSet::from([Angle::zero(), Angle::half()]);
    points.extend(orbit2(&arc.lo).points);
    points.extend(orbit2(&arc.hi).points);
    let part = Partition::new(points)?;
    if arc.degenerate {
        return Ok(assemble(HoleKind::CharacteristicArc, part, &BTreeSet::new(), |_| true));
    }
    let n = part.len();
    let hole = part.span(&arc.lo, &arc.hi);
    Ok(assemble(HoleKind::CharacteristicArc, part, &BTreeSet::new(), |j| !hole.contains(j, n)))
}

pub fn survivor_hole(theta: &Angle, kind: HoleKind) -> Result<Hole> {
    match kind {
        HoleKind::Biaccessible => biaccessible_hole(theta),
        HoleKind::CharacteristicArc => characteristic_hole(theta),
    }
}

/// Transfer matrix of doubling on the surviving partition intervals:
/// `T[i][j] = 1` iff the image of interval i covers interval j.
pub fn survivor_transfer(hole: &Hole) -> TransitionGraph<OpenArc> {
    let n = hole.partition.len();
    let rows = hole
        .allowed_index
        .iter()
        .map(|&i| {
            // Intervals are shorter than a half circle, so the image runs
            // counterclockwise between the images of the endpoints.
            let (a, b) = (hole.image[i], hole.image[(i + 1) % n]);
            let len = (b + n - a) % n;
            let image = Span {
                lo: a,
                len: if len == 0 { n } else { len },
            };
            hole.allowed_index
                .iter()
                .enumerate()
                .filter(|(_, &j)| image.contains(Span { lo: j, len: 1 }, n))
                .map(|(k, _)| (k, 1u64))
                .collect()
        })
        .collect();
    TransitionGraph::from_rows(hole.allowed.clone(), rows)
}

/// Number of depth-`depth` binary cylinders none of whose first `depth`
/// images falls inside the open hole.
pub fn cylinder_count(hole: &Hole, depth: usize) -> Result<u64> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::InvalidInput(format!("depth must be in 1..={MAX_DEPTH}, got {depth}")));
    }
    if hole.is_empty() {
        return Ok(1u64 << depth);
    }
    let one = BigRational::one();
    let whole = hole.arcs.len() == 1 && hole.arcs[0].lo == hole.arcs[0].hi;
    // Pieces (a, b) with 0 ≤ a < b ≤ 1; an arc through 0 is split there and
    // its pieces are closed at the cut, since 0 itself is in the hole.
    let mut pieces: Vec<(BigRational, BigRational, bool, bool)> = Vec::new();
    for arc in &hole.arcs {
        let lo = arc.lo.to_ratio();
        let hi = &lo + arc.length();
        if hi > one || whole {
            pieces.push((lo, one.clone(), false, true));
            pieces.push((BigRational::zero(), hi - &one, true, false));
        } else {
            pieces.push((lo, hi, false, false));
        }
    }
    // A level-l cylinder [k, k+1]/2^l lies in the piece iff lo ≤ k < hi.
    let bounds: Vec<Vec<(u64, u64)>> = (0..=depth)
        .map(|l| {
            let scale = BigRational::from_integer((BigUint::one() << l).into());
            pieces
                .iter()
                .map(|(a, b, closed_lo, closed_hi)| {
                    let a = a * &scale;
                    let b = b * &scale;
                    let lo = if *closed_lo { a.ceil() } else { a.floor() + BigRational::one() };
                    let hi = if *closed_hi { b.floor() } else { b.ceil() - BigRational::one() };
                    let lo = lo.to_integer().to_u64().expect("bounded by 2^depth");
                    let hi = hi.to_integer().to_u64().unwrap_or(0);
                    (lo, hi)
                })
                .collect()
        })
        .collect();
    let inside = |l: usize, k: u64| bounds[l].iter().any(|&(lo, hi)| lo <= k && k < hi);
    // Depth-first over words, prepending one bit at a time; the shorter
    // suffix cylinders are exactly the images already checked.
    let mut count = 0u64;
    let mut stack: Vec<(usize, u64)> = vec![(0, 0)];
    while let Some((l, k)) = stack.pop() {
        if l == depth {
            count += 1;
            continue;
        }
        for bit in 0..2u64 {
            let nk = (bit << l) | k;
            if !inside(l + 1, nk) {
                stack.push((l + 1, nk));
            }
        }
    }
    Ok(count)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    pub angle: Angle,
    pub hole: HoleKind,
    pub transfer: f64,
    pub rho: f64,
    pub residual: f64,
    pub matrix_size: usize,
    pub depth: usize,
    pub cylinders: u64,
    pub count: f64,
}

pub fn survivor_dimension(theta: &Angle, depth: usize) -> Result<DimensionReport> {
    survivor_dimension_with(theta, depth, HoleKind::default(), &SpectralConfig::default())
}

pub fn survivor_dimension_with(
    theta: &Angle,
    depth: usize,
    kind: HoleKind,
    cfg: &SpectralConfig,
) -> Result<DimensionReport> {
    let hole = survivor_hole(theta, kind)?;
    let g = survivor_transfer(&hole);
    let r = spectral_radius(&g, cfg)?;
    let rho = r.rho.max(1.0);
    let cylinders = cylinder_count(&hole, depth)?;
    let count = if cylinders <= 1 {
        0.0
    } else {
        (cylinders as f64).log2() / depth as f64
    };
    Ok(DimensionReport {
        angle: theta.clone(),
        hole: kind,
        transfer: rho.log2(),
        rho,
        residual: r.residual,
        matrix_size: g.len(),
        depth,
        cylinders,
        count,
    })
}

/// Entropy record of the survivor system, `h = log 2 · dim`.
pub fn survivor_entropy(theta: &Angle, kind: HoleKind, cfg: &SpectralConfig) -> Result<EntropyResult> {
    let hole = survivor_hole(theta, kind)?;
    crate::entropy::entropy_of(&survivor_transfer(&hole), cfg, Method::SurvivorTransfer)
}
