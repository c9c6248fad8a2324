//! Minor and major leaves, characteristic arcs, and root pairs of hyperbolic
//! components.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::circle::{in_open_arc_unchecked, orbit2, Angle};
use crate::error::{Error, Result};
use crate::itinerary::companion;

/// Unordered pair of angles; `a == b` is a degenerate leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Leaf {
    pub a: Angle,
    pub b: Angle,
}

impl Leaf {
    pub fn new(x: Angle, y: Angle) -> Leaf {
        if x <= y {
            Leaf { a: x, b: y }
        } else {
            Leaf { a: y, b: x }
        }
    }

    pub fn point(x: Angle) -> Leaf {
        Leaf {
            a: x.clone(),
            b: x,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    /// Length of the shorter arc cut off by the leaf.
    pub fn length(&self) -> BigRational {
        self.a.circle_distance(&self.b)
    }
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_degenerate() {
            write!(f, "{{{}}}", self.a)
        } else {
            write!(f, "{{{}, {}}}", self.a, self.b)
        }
    }
}

/// Closed counterclockwise arc `[lo, hi]`; degenerate arcs are single points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CircArc {
    pub lo: Angle,
    pub hi: Angle,
    pub degenerate: bool,
}

impl CircArc {
    pub fn new(lo: Angle, hi: Angle) -> CircArc {
        let degenerate = lo == hi;
        CircArc { lo, hi, degenerate }
    }

    pub fn point(x: Angle) -> CircArc {
        CircArc::new(x.clone(), x)
    }

    pub fn length(&self) -> BigRational {
        if self.degenerate {
            BigRational::zero()
        } else {
            self.lo.ccw_to(&self.hi)
        }
    }

    pub fn contains_point(&self, x: &Angle) -> bool {
        if self.degenerate {
            return x == &self.lo;
        }
        x == &self.lo || x == &self.hi || in_open_arc_unchecked(x, &self.lo, &self.hi)
    }

    pub fn interior_contains(&self, x: &Angle) -> bool {
        !self.degenerate && in_open_arc_unchecked(x, &self.lo, &self.hi)
    }
}

impl fmt::Display for CircArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degenerate {
            write!(f, "{{{}}}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ComponentRoot {
    pub minus: Angle,
    pub plus: Angle,
    pub period: usize,
    pub satellite: bool,
}

impl fmt::Display for ComponentRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.satellite { "satellite" } else { "primitive" };
        write!(
            f,
            "{{{}, {}}} period {} {}",
            self.minus, self.plus, self.period, kind
        )
    }
}

pub fn minor_class(theta: &Angle) -> Leaf {
    match companion(theta) {
        Some(c) => Leaf::new(theta.clone(), c),
        None => Leaf::point(theta.clone()),
    }
}

/// The two preimage leaves of the minor that map onto it and are swapped by
/// `x ↦ x + 1/2`. Each major is the long pairing of preimages, bounding the
/// central region between the two majors.
pub fn majors(theta: &Angle) -> (Leaf, Leaf) {
    let minor = minor_class(theta);
    majors_of(&minor)
}

pub fn majors_of(minor: &Leaf) -> (Leaf, Leaf) {
    let a0 = minor.a.halve();
    let a1 = a0.antipode();
    if minor.is_degenerate() {
        return (Leaf::point(a0), Leaf::point(a1));
    }
    let b0 = minor.b.halve();
    let b1 = b0.antipode();
    let first = if a0.circle_distance(&b0) >= a0.circle_distance(&b1) {
        Leaf::new(a0.clone(), b0.clone())
    } else {
        Leaf::new(a0.clone(), b1.clone())
    };
    let second = Leaf::new(first.a.antipode(), first.b.antipode());
    if first.a <= second.a {
        (first, second)
    } else {
        (second, first)
    }
}

/// Closed arc bounded by the minor whose open interior avoids every major
/// endpoint.
pub fn characteristic_arc(theta: &Angle) -> Result<CircArc> {
    let minor = minor_class(theta);
    if minor.is_degenerate() {
        return Ok(CircArc::point(theta.clone()));
    }
    let (m1, m2) = majors_of(&minor);
    let ends = [&m1.a, &m1.b, &m2.a, &m2.b];
    let candidates = [
        CircArc::new(minor.a.clone(), minor.b.clone()),
        CircArc::new(minor.b.clone(), minor.a.clone()),
    ];
    let good: Vec<&CircArc> = candidates
        .iter()
        .filter(|arc| ends.iter().all(|e| !arc.interior_contains(e)))
        .collect();
    match good.as_slice() {
        [arc] => Ok((*arc).clone()),
        _ => Err(Error::Internal(format!(
            "no unique characteristic arc for minor {minor}"
        ))),
    }
}

/// `inner ⊆ outer` as closed subsets of the circle.
pub fn arc_contains(outer: &CircArc, inner: &CircArc) -> bool {
    if outer.degenerate {
        return inner.degenerate && inner.lo == outer.lo;
    }
    if inner.degenerate {
        return outer.contains_point(&inner.lo);
    }
    let start = outer.lo.ccw_to(&inner.lo);
    let len_outer = outer.length();
    start.clone() + inner.length() <= len_outer
}

pub fn root_pair(theta: &Angle) -> Result<ComponentRoot> {
    if theta.is_zero() || !theta.is_periodic() {
        return Err(Error::NotARoot(theta.to_string()));
    }
    let other = companion(theta).ok_or_else(|| Error::NotARoot(theta.to_string()))?;
    let (minus, plus) = if theta < &other {
        (theta.clone(), other)
    } else {
        (other, theta.clone())
    };
    let period = orbit2(theta).period;
    let mut r = ComponentRoot {
        minus,
        plus,
        period,
        satellite: false,
    };
    r.satellite = is_satellite(&r);
    Ok(r)
}

pub fn is_satellite(r: &ComponentRoot) -> bool {
    orbit2(&r.minus).points.contains(&r.plus)
}

/// Combinatorial rotation number `q/p` of the cycle of `minus`, if doubling
/// advances its circular positions by a constant step `q`.
pub fn rotation_number(r: &ComponentRoot) -> Option<(usize, usize)> {
    let cycle = orbit2(&r.minus).points;
    let p = cycle.len();
    if p < 2 {
        return None;
    }
    let mut sorted = cycle.clone();
    sorted.sort();
    let pos = |x: &Angle| sorted.iter().position(|y| y == x).expect("cycle member");
    let step = (pos(&cycle[1]) + p - pos(&cycle[0])) % p;
    let constant = (0..p).all(|i| (pos(&cycle[(i + 1) % p]) + p - pos(&cycle[i])) % p == step);
    if !constant {
        return None;
    }
    let g = num_integer::gcd(step, p);
    Some((step / g, p / g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: u64, d: u64) -> Angle {
        Angle::from_u64(n, d)
    }

    #[test]
    fn minor_examples() {
        assert_eq!(minor_class(&a(3, 7)), Leaf::new(a(3, 7), a(4, 7)));
        assert!(minor_class(&a(1, 2)).is_degenerate());
        assert_eq!(minor_class(&a(7, 12)), Leaf::new(a(5, 12), a(7, 12)));
    }

    #[test]
    fn majors_map_to_minor_and_are_antipodal() {
        let (m1, m2) = majors(&a(7, 12));
        assert_eq!(m1, Leaf::new(a(5, 24), a(19, 24)));
        assert_eq!(m2, Leaf::new(a(7, 24), a(17, 24)));
        let (m1, m2) = majors(&a(3, 7));
        assert_eq!(m1, Leaf::new(a(3, 14), a(11, 14)));
        assert_eq!(m2, Leaf::new(a(2, 7), a(5, 7)));
        let (m1, m2) = majors(&a(1, 2));
        assert_eq!((m1, m2), (Leaf::point(a(1, 4)), Leaf::point(a(3, 4))));
    }

    #[test]
    fn characteristic_arc_examples() {
        assert_eq!(characteristic_arc(&a(3, 7)).unwrap(), CircArc::new(a(3, 7), a(4, 7)));
        assert_eq!(characteristic_arc(&a(7, 12)).unwrap(), CircArc::new(a(5, 12), a(7, 12)));
        assert_eq!(characteristic_arc(&a(1, 2)).unwrap(), CircArc::point(a(1, 2)));
        assert_eq!(characteristic_arc(&a(1, 7)).unwrap(), CircArc::new(a(1, 7), a(2, 7)));
        assert_eq!(characteristic_arc(&a(1, 3)).unwrap(), CircArc::new(a(1, 3), a(2, 3)));
    }

    #[test]
    fn containment_examples() {
        let big = CircArc::new(a(5, 12), a(7, 12));
        let small = CircArc::new(a(3, 7), a(4, 7));
        assert!(arc_contains(&big, &small));
        assert!(arc_contains(&small, &CircArc::point(a(1, 2))));
        assert!(!arc_contains(&small, &big));
        let wrap = CircArc::new(a(5, 6), a(1, 6));
        assert!(arc_contains(&wrap, &CircArc::new(a(11, 12), a(1, 12))));
        assert!(!arc_contains(&wrap, &CircArc::new(a(1, 12), a(11, 12))));
    }

    #[test]
    fn root_examples() {
        let r = root_pair(&a(1, 3)).unwrap();
        assert_eq!((r.minus.clone(), r.plus.clone(), r.period, r.satellite), (a(1, 3), a(2, 3), 2, true));
        let r = root_pair(&a(3, 7)).unwrap();
        assert_eq!((r.period, r.satellite), (3, false));
        let r = root_pair(&a(2, 5)).unwrap();
        assert_eq!((r.plus.clone(), r.period, r.satellite), (a(3, 5), 4, true));
        assert!(matches!(root_pair(&Angle::zero()), Err(Error::NotARoot(_))));
        assert!(matches!(root_pair(&a(1, 6)), Err(Error::NotARoot(_))));
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(rotation_number(&root_pair(&a(1, 3)).unwrap()), Some((1, 2)));
        assert_eq!(rotation_number(&root_pair(&a(1, 7)).unwrap()), Some((1, 3)));
        assert_eq!(rotation_number(&root_pair(&a(2, 5)).unwrap()), None);
        assert!(is_satellite(&root_pair(&a(1, 7)).unwrap()));
    }
}
