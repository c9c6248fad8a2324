//! Itineraries relative to a critical portrait `{α/2, (α+1)/2}` and the
//! identification relation they generate.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::circle::{in_open_arc_unchecked, orbit2, Angle};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriticalPortrait {
    pub alpha: Angle,
    pub lo: Angle,
    pub hi: Angle,
}

pub fn portrait(alpha: &Angle) -> CriticalPortrait {
    let lo = alpha.halve();
    let hi = lo.antipode();
    CriticalPortrait {
        alpha: alpha.clone(),
        lo,
        hi,
    }
}

impl CriticalPortrait {
    /// One inside the open arc `(lo, hi)`, Zero in the other open arc, Star on
    /// the portrait itself.
    pub fn symbol(&self, x: &Angle) -> Symbol {
        if x == &self.lo || x == &self.hi {
            Symbol::Star
        } else if in_open_arc_unchecked(x, &self.lo, &self.hi) {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    /// The preimage of `t` carrying symbol `s`, if it is not a portrait point.
    fn branch(&self, t: &Angle, s: Symbol) -> Option<Angle> {
        if t == &self.alpha {
            return None;
        }
        let a = t.halve();
        if self.symbol(&a) == s {
            Some(a)
        } else {
            Some(a.antipode())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Symbol {
    Zero,
    One,
    Star,
}

impl Symbol {
    pub fn matches(self, other: Symbol) -> bool {
        self == other || self == Symbol::Star || other == Symbol::Star
    }

    fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Star => '*',
        }
    }
}

/// Eventually periodic symbol sequence `pre (rep)‾` in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolSeq {
    pre: Vec<Symbol>,
    rep: Vec<Symbol>,
}

impl SymbolSeq {
    pub fn new(pre: Vec<Symbol>, rep: Vec<Symbol>) -> Result<SymbolSeq> {
        if rep.is_empty() {
            return Err(Error::InvalidInput("empty repetend".into()));
        }
        let mut s = SymbolSeq { pre, rep };
        s.canonicalize();
        Ok(s)
    }

    fn canonicalize(&mut self) {
        let n = self.rep.len();
        if let Some(k) = (1..=n)
            .find(|&k| n.is_multiple_of(k) && self.rep.chunks(k).all(|c| c == &self.rep[..k]))
        {
            self.rep.truncate(k);
        }
        while let (Some(&p), Some(&r)) = (self.pre.last(), self.rep.last()) {
            if p != r {
                break;
            }
            self.pre.pop();
            self.rep.rotate_right(1);
        }
    }

    pub fn pre(&self) -> &[Symbol] {
        &self.pre
    }

    pub fn rep(&self) -> &[Symbol] {
        &self.rep
    }

    /// Symbol at 0-based position `n`.
    pub fn at(&self, n: usize) -> Symbol {
        if n < self.pre.len() {
            self.pre[n]
        } else {
            self.rep[(n - self.pre.len()) % self.rep.len()]
        }
    }

    /// Drop the first symbol.
    pub fn shift(&self) -> SymbolSeq {
        let mut s = if self.pre.is_empty() {
            let mut rep = self.rep.clone();
            rep.rotate_left(1);
            SymbolSeq {
                pre: Vec::new(),
                rep,
            }
        } else {
            SymbolSeq {
                pre: self.pre[1..].to_vec(),
                rep: self.rep.clone(),
            }
        };
        s.canonicalize();
        s
    }

    pub fn has_star(&self) -> bool {
        self.pre.iter().chain(&self.rep).any(|&s| s == Symbol::Star)
    }
}

impl fmt::Display for SymbolSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.pre {
            write!(f, "{}", s.as_char())?;
        }
        write!(f, "(")?;
        for s in &self.rep {
            write!(f, "{}", s.as_char())?;
        }
        write!(f, ")")
    }
}

impl Serialize for SymbolSeq {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn itinerary(xi: &Angle, alpha: &Angle) -> SymbolSeq {
    let pt = portrait(alpha);
    let orb = orbit2(xi);
    let syms: Vec<Symbol> = orb.points.iter().map(|x| pt.symbol(x)).collect();
    let (pre, rep) = syms.split_at(orb.preperiod);
    SymbolSeq::new(pre.to_vec(), rep.to_vec()).expect("orbit has a nonempty cycle")
}

pub fn wildcard_equal(s: &SymbolSeq, t: &SymbolSeq) -> bool {
    let horizon = s.pre.len().max(t.pre.len()) + s.rep.len().lcm(&t.rep.len());
    (0..horizon).all(|n| s.at(n).matches(t.at(n)))
}

pub fn identified(xi: &Angle, xi2: &Angle, alpha: &Angle) -> bool {
    wildcard_equal(&itinerary(xi, alpha), &itinerary(xi2, alpha))
}

/// Period-`word.len()` points whose first `word.len()` symbols are exactly
/// `word` (no stars). These are the fixed points of the inverse branch
/// `g_{w_1} ∘ … ∘ g_{w_L}`, found exactly piece by piece.
pub fn periodic_fiber(pt: &CriticalPortrait, word: &[Symbol]) -> Vec<Angle> {
    assert!(word.iter().all(|&s| s != Symbol::Star), "fiber words are star-free");
    let l = word.len();
    if l == 0 {
        return Vec::new();
    }
    let compose = |t: &Angle| -> Option<Angle> {
        let mut x = t.clone();
        for &s in word.iter().rev() {
            x = pt.branch(&x, s)?;
        }
        Some(x)
    };

    // Break points of the composed branch: forward images of α.
    let mut cuts: BTreeSet<Angle> = BTreeSet::new();
    let mut a = pt.alpha.clone();
    for _ in 0..=l {
        cuts.insert(a.clone());
        a = a.double();
    }
    let cuts: Vec<Angle> = cuts.into_iter().collect();

    let scale = BigRational::from_integer(BigInt::one() << l);
    let one = BigRational::one();
    let mut found: BTreeSet<Angle> = BTreeSet::new();
    for (i, start) in cuts.iter().enumerate() {
        let start_r = start.to_ratio();
        let len = if cuts.len() == 1 {
            one.clone()
        } else {
            start.ccw_to(&cuts[(i + 1) % cuts.len()])
        };
        let mid = &start_r + &len / BigRational::from_integer(2.into());
        let Some(c) = compose(&Angle::from_ratio(&mid)) else {
            continue;
        };
        // On this piece g(t) = c + (t - mid)/2^L mod 1; solve g(t) = t.
        let c = c.to_ratio();
        let denom = &scale - &one;
        let base = (&start_r - &c).floor().to_integer();
        for n in -1..=2 {
            let n = BigRational::from_integer(&base + BigInt::from(n));
            let t = (&scale * (&c + &n) - &mid) / &denom;
            if t > start_r && t < &start_r + &len {
                let x = Angle::from_ratio(&t);
                if verify_fiber_point(pt, word, &x) {
                    found.insert(x);
                }
            }
        }
    }
    // Piece endpoints are not covered by the open-piece solutions above.
    for x in &cuts {
        if verify_fiber_point(pt, word, x) {
            found.insert(x.clone());
        }
    }
    found.into_iter().collect()
}

fn verify_fiber_point(pt: &CriticalPortrait, word: &[Symbol], x: &Angle) -> bool {
    let mut y = x.clone();
    for &s in word {
        if pt.symbol(&y) != s {
            return false;
        }
        y = y.double();
    }
    &y == x
}

fn star_resolutions(word: &[Symbol]) -> Vec<Vec<Symbol>> {
    let mut out = vec![Vec::with_capacity(word.len())];
    for &s in word {
        let choices: &[Symbol] = match s {
            Symbol::Star => &[Symbol::Zero, Symbol::One],
            Symbol::Zero => &[Symbol::Zero],
            Symbol::One => &[Symbol::One],
        };
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for w in &out {
            for &c in choices {
                let mut w = w.clone();
                w.push(c);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// All angles with the same preperiod and period as `y` that are identified
/// with `y` relative to the portrait of `alpha` (including `y`), sorted.
pub fn identification_class(y: &Angle, alpha: &Angle) -> Vec<Angle> {
    let pt = portrait(alpha);
    let orb = orbit2(y);
    let m = orb.preperiod;
    let mut level = periodic_class(&pt, &orb.points[m], alpha);
    for k in (0..m).rev() {
        level = pull_back(&pt, &level, &orb.points[k], false);
    }
    level.into_iter().collect()
}

/// Identification classes of every point of the forward orbit of `y`, indexed
/// like `orbit2(y).points`.
pub fn orbit_classes(y: &Angle, alpha: &Angle) -> Vec<Vec<Angle>> {
    let pt = portrait(alpha);
    let orb = orbit2(y);
    let m = orb.preperiod;
    let n = orb.points.len();
    let mut out: Vec<BTreeSet<Angle>> = vec![BTreeSet::new(); n];
    out[m] = periodic_class(&pt, &orb.points[m], alpha);
    for k in (m + 1..n).rev() {
        let next = if k + 1 == n { m } else { k + 1 };
        out[k] = pull_back(&pt, &out[next], &orb.points[k], true);
    }
    for k in (0..m).rev() {
        out[k] = pull_back(&pt, &out[k + 1], &orb.points[k], false);
    }
    out.into_iter().map(|c| c.into_iter().collect()).collect()
}

fn periodic_class(pt: &CriticalPortrait, z: &Angle, alpha: &Angle) -> BTreeSet<Angle> {
    let orb = orbit2(z);
    let p = orb.period;
    let word: Vec<Symbol> = orb.cycle().iter().map(|x| pt.symbol(x)).collect();
    let z_itin = itinerary(z, alpha);
    let mut level: BTreeSet<Angle> = BTreeSet::new();
    for w in star_resolutions(&word) {
        level.extend(periodic_fiber(pt, &w));
    }
    // The orbit of a periodic α carries a star and never verifies as a fiber point.
    let alpha_orbit = orbit2(alpha);
    if alpha_orbit.preperiod == 0 {
        level.extend(alpha_orbit.points.iter().cloned());
    }
    level.insert(z.clone());
    level.retain(|x| {
        let o = orbit2(x);
        o.preperiod == 0 && o.period == p && wildcard_equal(&itinerary(x, alpha), &z_itin)
    });
    level
}

/// Class of `target` from the class of its image. A preimage of a class
/// member with the same kind (periodic or not) as `target` is identified with
/// `target` iff their first symbols agree, since the tails already agree.
fn pull_back(
    pt: &CriticalPortrait,
    image_class: &BTreeSet<Angle>,
    target: &Angle,
    periodic: bool,
) -> BTreeSet<Angle> {
    let s = pt.symbol(target);
    let mut next = BTreeSet::new();
    for w in image_class {
        let a = w.halve();
        for x in [a.antipode(), a] {
            if x.is_periodic() == periodic && pt.symbol(&x).matches(s) {
                next.insert(x);
            }
        }
    }
    next.insert(target.clone());
    next
}

/// Reference implementation of [`identification_class`] by exhaustive scan of
/// all angles with the same (preperiod, period) signature. Exponential in the
/// signature length; intended for cross-checking.
pub fn identification_class_by_scan(y: &Angle, alpha: &Angle) -> Result<Vec<Angle>> {
    let orb = orbit2(y);
    let (m, p) = (orb.preperiod, orb.period);
    if m + p > 22 {
        return Err(Error::Precondition(format!(
            "scan over 2^{} candidates is too large",
            m + p
        )));
    }
    let den: u64 = (1u64 << m) * ((1u64 << p) - 1);
    let y_itin = itinerary(y, alpha);
    let mut out = Vec::new();
    for k in 0..den {
        let x = Angle::from_u64(k, den);
        let o = orbit2(&x);
        if o.preperiod != m || o.period != p {
            continue;
        }
        if wildcard_equal(&itinerary(&x, alpha), &y_itin) {
            out.push(x);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// The partner angle of θ: the other endpoint of the minor leaf.
///
/// When the class of θ has more than two members the partner is the
/// member adjacent to θ across the gap that contains the critical portrait
/// (the minor), falling back to the nearest member.
pub fn companion(theta: &Angle) -> Option<Angle> {
    if theta.is_zero() {
        return None;
    }
    let class = identification_class(theta, theta);
    let others: Vec<&Angle> = class.iter().filter(|x| *x != theta).collect();
    match others.len() {
        0 => None,
        1 => Some(others[0].clone()),
        _ => {
            if !theta.is_periodic() {
                if let Some((a, b)) = minor_side(&class, theta) {
                    if &a == theta {
                        return Some(b);
                    }
                    if &b == theta {
                        return Some(a);
                    }
                }
            }
            others
                .into_iter()
                .min_by(|a, b| theta.circle_distance(a).cmp(&theta.circle_distance(b)))
                .cloned()
        }
    }
}

/// The side `(a, b)` (counterclockwise consecutive members) of a class whose
/// gap contains the critical portrait of θ.
pub(crate) fn minor_side(class: &[Angle], theta: &Angle) -> Option<(Angle, Angle)> {
    let pt = portrait(theta);
    let n = class.len();
    if n < 2 {
        return None;
    }
    for i in 0..n {
        let a = &class[i];
        let b = &class[(i + 1) % n];
        let inside = |x: &Angle| in_open_arc_unchecked(x, a, b);
        if inside(&pt.lo) && inside(&pt.hi) {
            return Some((a.clone(), b.clone()));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: u64, d: u64) -> Angle {
        Angle::from_u64(n, d)
    }

    fn seq(pre: &str, rep: &str) -> SymbolSeq {
        let conv = |w: &str| {
            w.chars()
                .map(|c| match c {
                    '0' => Symbol::Zero,
                    '1' => Symbol::One,
                    _ => Symbol::Star,
                })
                .collect::<Vec<_>>()
        };
        SymbolSeq::new(conv(pre), conv(rep)).unwrap()
    }

    #[test]
    fn portrait_examples() {
        let p = portrait(&a(1, 6));
        assert_eq!((p.lo, p.hi), (a(1, 12), a(7, 12)));
        let p = portrait(&a(3, 7));
        assert_eq!((p.lo, p.hi), (a(3, 14), a(5, 7)));
        let p = portrait(&Angle::zero());
        assert_eq!((p.lo, p.hi), (Angle::zero(), Angle::half()));
    }

    #[test]
    fn itinerary_examples() {
        assert_eq!(itinerary(&a(1, 6), &a(1, 6)), seq("1", "10"));
        assert_eq!(itinerary(&a(1, 6), &a(1, 3)), seq("*", "1*"));
        assert_eq!(itinerary(&a(7, 12), &a(7, 12)), seq("10", "1"));
        assert_eq!(itinerary(&a(7, 12), &a(7, 12)).to_string(), "10(1)");
        assert_eq!(itinerary(&a(3, 7), &a(3, 7)).to_string(), "(10*)");
    }

    #[test]
    fn wildcard_examples() {
        assert!(wildcard_equal(&seq("", "101"), &seq("", "10*")));
        assert!(!wildcard_equal(&seq("", "1"), &seq("", "0")));
        let s = seq("01", "1*0");
        assert!(wildcard_equal(&s, &s));
        assert!(!wildcard_equal(&seq("1", "0"), &seq("", "01")));
    }

    #[test]
    fn identified_examples() {
        assert!(identified(&a(5, 12), &a(7, 12), &a(7, 12)));
        assert!(identified(&a(3, 7), &a(4, 7), &a(3, 7)));
        assert!(!identified(&a(1, 7), &a(3, 7), &a(3, 7)));
    }

    #[test]
    fn companion_examples() {
        assert_eq!(companion(&a(1, 3)), Some(a(2, 3)));
        assert_eq!(companion(&a(3, 7)), Some(a(4, 7)));
        assert_eq!(companion(&a(7, 12)), Some(a(5, 12)));
        assert_eq!(companion(&a(1, 7)), Some(a(2, 7)));
        assert_eq!(companion(&a(1, 2)), None);
        assert_eq!(companion(&a(1, 6)), None);
        assert_eq!(companion(&Angle::zero()), None);
    }

    #[test]
    fn fiber_of_airplane_cycle() {
        let pt = portrait(&a(3, 7));
        let w = [Symbol::One, Symbol::One, Symbol::Zero];
        assert_eq!(periodic_fiber(&pt, &w), vec![a(2, 7)]);
    }

    #[test]
    fn class_matches_scan_small() {
        for (y, al) in [
            (a(6, 7), a(3, 7)),
            (a(9, 56), a(9, 56)),
            (a(1, 3), a(7, 12)),
            (a(2, 7), a(1, 7)),
        ] {
            assert_eq!(
                identification_class(&y, &al),
                identification_class_by_scan(&y, &al).unwrap(),
                "y={y} alpha={al}"
            );
        }
    }
}
