//! Exact rational points of the circle R/Z and their orbits under
//! multiplication by `d` mod 1.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A rational angle `num/den` in `[0, 1)`, always stored in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Angle {
    num: BigUint,
    den: BigUint,
}

impl Angle {
    pub fn zero() -> Angle {
        Angle {
            num: BigUint::zero(),
            den: BigUint::one(),
        }
    }

    pub fn half() -> Angle {
        Angle::from_u64(1, 2)
    }

    /// Reduced representative of `num/den` mod 1.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Angle> {
        let num = num.into();
        let den = den.into();
        if den.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(Angle::from_ratio(&BigRational::new(num, den)))
    }

    /// Small-integer constructor for literals; panics on a zero denominator.
    pub fn from_u64(num: u64, den: u64) -> Angle {
        Angle::new(num, den).expect("nonzero denominator")
    }

    /// Fractional part of an arbitrary rational.
    pub fn from_ratio(r: &BigRational) -> Angle {
        let den = r.denom().clone();
        let num = r.numer().mod_floor(&den);
        let g = num.gcd(&den);
        let (num, den) = (num / &g, den / &g);
        Angle {
            num: num.to_biguint().expect("nonnegative after mod_floor"),
            den: den.to_biguint().expect("positive denominator"),
        }
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new_raw(
            BigInt::from_biguint(Sign::Plus, self.num.clone()),
            BigInt::from_biguint(Sign::Plus, self.den.clone()),
        )
    }

    pub fn numer(&self) -> &BigUint {
        &self.num
    }

    pub fn denom(&self) -> &BigUint {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.num.to_f64().unwrap_or(f64::NAN);
        let d = self.den.to_f64().unwrap_or(f64::NAN);
        if n.is_finite() && d.is_finite() {
            n / d
        } else {
            // Huge denominators: fall back to a scaled division.
            let shift = self.den.bits().saturating_sub(60);
            let n = (&self.num >> shift).to_f64().unwrap_or(0.0);
            let d = (&self.den >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }

    /// Odd denominator: periodic under doubling.
    pub fn is_periodic(&self) -> bool {
        self.den.is_odd()
    }

    /// Denominator is a power of two greater than one.
    pub fn is_dyadic(&self) -> bool {
        self.den > BigUint::one() && (&self.den & (&self.den - 1u32)).is_zero()
    }

    /// `2θ mod 1`.
    pub fn double(&self) -> Angle {
        let mut num = &self.num << 1usize;
        if num >= self.den {
            num -= &self.den;
        }
        if self.den.is_even() {
            // gcd(2n mod d, d) = 2 when d is even.
            Angle {
                num: num >> 1usize,
                den: &self.den >> 1usize,
            }
        } else {
            Angle {
                num,
                den: self.den.clone(),
            }
        }
    }

    /// `θ/2`, the preimage of θ lying in `[0, 1/2)`.
    pub fn halve(&self) -> Angle {
        let (num, den) = (self.num.clone(), &self.den << 1usize);
        reduce(num, den)
    }

    /// `θ + 1/2 mod 1`.
    pub fn antipode(&self) -> Angle {
        let num = (&self.num << 1usize) + &self.den;
        let den = &self.den << 1usize;
        let num = num % &den;
        reduce(num, den)
    }

    /// `-θ mod 1`, complex conjugation on the circle.
    pub fn conjugate(&self) -> Angle {
        if self.num.is_zero() {
            self.clone()
        } else {
            Angle {
                num: &self.den - &self.num,
                den: self.den.clone(),
            }
        }
    }

    /// Counterclockwise distance from `self` to `other`, in `[0, 1)`.
    pub fn ccw_to(&self, other: &Angle) -> BigRational {
        let d = other.to_ratio() - self.to_ratio();
        if d < BigRational::zero() {
            d + BigRational::one()
        } else {
            d
        }
    }

    /// Length of the shorter arc between the two angles, in `[0, 1/2]`.
    pub fn circle_distance(&self, other: &Angle) -> BigRational {
        let d = self.ccw_to(other);
        let e = BigRational::one() - &d;
        if d <= e || d.is_zero() {
            d
        } else {
            e
        }
    }
}

fn reduce(num: BigUint, den: BigUint) -> Angle {
    let g = num.gcd(&den);
    if g.is_zero() || g.is_one() {
        return Angle { num, den };
    }
    if num.is_zero() {
        return Angle::zero();
    }
    Angle {
        num: num / &g,
        den: den / &g,
    }
}

impl Ord for Angle {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl PartialOrd for Angle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Angle> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("cannot parse angle {s:?}; expected p/q"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().map_err(|_| bad())?;
                let q: BigInt = q.trim().parse().map_err(|_| bad())?;
                Angle::new(p, q)
            }
            None => {
                let p: BigInt = s.parse().map_err(|_| bad())?;
                Angle::new(p, 1)
            }
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `d·θ mod 1`.
pub fn sigma(theta: &Angle, d: u32) -> Result<Angle> {
    if d < 2 {
        return Err(Error::InvalidDegree(d));
    }
    if d == 2 {
        return Ok(theta.double());
    }
    let num = (&theta.num * d) % &theta.den;
    Ok(reduce(num, theta.den.clone()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitInfo {
    pub points: Vec<Angle>,
    pub preperiod: usize,
    pub period: usize,
}

impl OrbitInfo {
    /// The periodic cycle of the orbit.
    pub fn cycle(&self) -> &[Angle] {
        &self.points[self.preperiod..]
    }

    /// `σ^k θ` for any `k`, reading the cycle once the tail is exhausted.
    pub fn point(&self, k: usize) -> &Angle {
        if k < self.points.len() {
            &self.points[k]
        } else {
            &self.points[self.preperiod + (k - self.preperiod) % self.period]
        }
    }
}

/// Full eventually periodic orbit of θ under `σ_d`.
pub fn orbit(theta: &Angle, d: u32) -> Result<OrbitInfo> {
    let mut seen: HashMap<Angle, usize> = HashMap::new();
    let mut points = Vec::new();
    let mut x = theta.clone();
    loop {
        if let Some(&i) = seen.get(&x) {
            let period = points.len() - i;
            return Ok(OrbitInfo {
                points,
                preperiod: i,
                period,
            });
        }
        seen.insert(x.clone(), points.len());
        let next = sigma(&x, d)?;
        points.push(x);
        x = next;
    }
}

/// Doubling orbit; never fails.
pub fn orbit2(theta: &Angle) -> OrbitInfo {
    orbit(theta, 2).expect("degree 2 is valid")
}

/// True iff `x` lies strictly inside the counterclockwise open arc from `a` to `b`.
pub fn in_open_arc(x: &Angle, a: &Angle, b: &Angle) -> Result<bool> {
    if a == b {
        return Err(Error::InvalidArc(a.to_string()));
    }
    Ok(in_open_arc_unchecked(x, a, b))
}

pub(crate) fn in_open_arc_unchecked(x: &Angle, a: &Angle, b: &Angle) -> bool {
    if a < b {
        a < x && x < b
    } else {
        x > a || x < b
    }
}

/// Binary expansion `.pre (rep)‾`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BinaryWords {
    pub pre: String,
    pub rep: String,
}

impl BinaryWords {
    pub fn new(pre: &str, rep: &str) -> Result<BinaryWords> {
        let ok = |w: &str| w.bytes().all(|c| c == b'0' || c == b'1');
        if rep.is_empty() || !ok(pre) || !ok(rep) {
            return Err(Error::InvalidInput(format!(
                "binary words must be over {{0,1}} with nonempty repetend: {pre:?}, {rep:?}"
            )));
        }
        Ok(BinaryWords {
            pre: pre.to_string(),
            rep: rep.to_string(),
        })
    }

    /// Minimal preperiod and primitive repetend for the same digit sequence.
    pub fn canonical(&self) -> BinaryWords {
        let rep = primitive_root(&self.rep);
        let mut pre = self.pre.clone().into_bytes();
        let mut rep = rep.into_bytes();
        while let (Some(&p), Some(&r)) = (pre.last(), rep.last()) {
            if p != r {
                break;
            }
            pre.pop();
            rep.rotate_right(1);
        }
        BinaryWords {
            pre: String::from_utf8(pre).expect("ascii"),
            rep: String::from_utf8(rep).expect("ascii"),
        }
    }

    /// For an expansion ending in `(1)` or `(0)` (a dyadic value), the other
    /// expansion of the same number; `None` for every other expansion and for 0.
    pub fn terminating_alternative(&self) -> Option<BinaryWords> {
        let w = self.canonical();
        let mut pre = w.pre.into_bytes();
        match w.rep.as_str() {
            "1" => {
                // .x0111… = .x1000…
                let last = pre.pop()?;
                debug_assert_eq!(last, b'0');
                pre.push(b'1');
                Some(BinaryWords {
                    pre: String::from_utf8(pre).expect("ascii"),
                    rep: "0".into(),
                })
            }
            "0" => {
                let last = pre.pop()?;
                debug_assert_eq!(last, b'1');
                pre.push(b'0');
                Some(BinaryWords {
                    pre: String::from_utf8(pre).expect("ascii"),
                    rep: "1".into(),
                })
            }
            _ => None,
        }
    }
}

impl fmt::Display for BinaryWords {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, ".{}({})", self.pre, self.rep)
    }
}

fn primitive_root(w: &str) -> String {
    let n = w.len();
    for k in 1..=n {
        if n.is_multiple_of(k) && w.as_bytes().chunks(k).all(|c| c == &w.as_bytes()[..k]) {
            return w[..k].to_string();
        }
    }
    w.to_string()
}

/// Canonical binary expansion. Dyadic angles get the non-terminating form
/// (`1/2 = .0(1)`); see [`BinaryWords::terminating_alternative`].
pub fn to_binary(theta: &Angle) -> BinaryWords {
    let orb = orbit2(theta);
    let digit = |x: &Angle| if x.double_carries() { '1' } else { '0' };
    let pre: String = orb.points[..orb.preperiod].iter().map(digit).collect();
    let rep: String = orb.cycle().iter().map(digit).collect();
    let w = BinaryWords { pre, rep }.canonical();
    if theta.is_dyadic() {
        // The orbit digits give the terminating form .x1(0).
        w.terminating_alternative().expect("dyadic expansion ends in (0)")
    } else {
        w
    }
}

/// All binary expansions of θ: two for dyadic angles, one otherwise.
pub fn binary_expansions(theta: &Angle) -> Vec<BinaryWords> {
    let w = to_binary(theta);
    match w.terminating_alternative() {
        Some(alt) => vec![w, alt],
        None => vec![w],
    }
}

pub fn from_binary(w: &BinaryWords) -> Angle {
    let parse = |s: &str| {
        if s.is_empty() {
            BigInt::zero()
        } else {
            BigInt::parse_bytes(s.as_bytes(), 2).expect("binary digits")
        }
    };
    let p = parse(&w.pre);
    let r = parse(&w.rep);
    let m = w.pre.len();
    let block = (BigInt::one() << w.rep.len()) - 1;
    let num = p * &block + r;
    let den = (BigInt::one() << m) * block;
    Angle::new(num, den).expect("nonzero denominator")
}

impl Angle {
    fn double_carries(&self) -> bool {
        (&self.num << 1usize) >= self.den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: u64, d: u64) -> Angle {
        Angle::from_u64(n, d)
    }

    #[test]
    fn reduction_and_normalization() {
        assert_eq!(Angle::new(7, 12).unwrap().to_string(), "7/12");
        assert_eq!(Angle::new(4, 6).unwrap(), a(2, 3));
        assert_eq!(Angle::new(-1, 3).unwrap(), a(2, 3));
        assert_eq!(Angle::new(5, 5).unwrap(), Angle::zero());
        assert!(Angle::new(1, 0).is_err());
        assert_eq!("1/2".parse::<Angle>().unwrap(), Angle::half());
        assert_eq!("0".parse::<Angle>().unwrap(), Angle::zero());
        assert!("x/3".parse::<Angle>().is_err());
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(&a(1, 6), 2).unwrap(), a(1, 3));
        assert_eq!(sigma(&a(2, 3), 2).unwrap(), a(1, 3));
        assert_eq!(sigma(&a(3, 7), 2).unwrap(), a(6, 7));
        assert_eq!(sigma(&a(1, 5), 3).unwrap(), a(3, 5));
        assert_eq!(sigma(&a(1, 5), 1), Err(Error::InvalidDegree(1)));
    }

    #[test]
    fn orbit_examples() {
        let o = orbit2(&a(1, 6));
        assert_eq!(o.points, vec![a(1, 6), a(1, 3), a(2, 3)]);
        assert_eq!((o.preperiod, o.period), (1, 2));
        let o = orbit2(&a(3, 7));
        assert_eq!(o.points, vec![a(3, 7), a(6, 7), a(5, 7)]);
        assert_eq!((o.preperiod, o.period), (0, 3));
        let o = orbit2(&Angle::zero());
        assert_eq!((o.points.len(), o.preperiod, o.period), (1, 0, 1));
    }

    #[test]
    fn arc_examples() {
        assert!(in_open_arc(&a(1, 3), &a(1, 12), &a(7, 12)).unwrap());
        assert!(!in_open_arc(&a(7, 12), &a(1, 12), &a(7, 12)).unwrap());
        assert!(in_open_arc(&Angle::zero(), &a(7, 12), &a(1, 12)).unwrap());
        assert!(in_open_arc(&a(1, 2), &a(1, 3), &a(1, 3)).is_err());
    }

    #[test]
    fn binary_examples() {
        assert_eq!(to_binary(&a(1, 3)), BinaryWords::new("", "01").unwrap());
        assert_eq!(to_binary(&a(7, 12)), BinaryWords::new("10", "01").unwrap());
        let half = to_binary(&Angle::half());
        assert_eq!(half, BinaryWords::new("0", "1").unwrap());
        assert_eq!(
            half.terminating_alternative(),
            Some(BinaryWords::new("1", "0").unwrap())
        );
        assert_eq!(to_binary(&Angle::zero()), BinaryWords::new("", "0").unwrap());
        assert_eq!(binary_expansions(&Angle::zero()).len(), 1);
        assert_eq!(binary_expansions(&a(3, 8)).len(), 2);
        assert_eq!(from_binary(&BinaryWords::new("10", "01").unwrap()), a(7, 12));
        assert_eq!(from_binary(&BinaryWords::new("", "1").unwrap()), Angle::zero());
    }

    #[test]
    fn helpers() {
        assert_eq!(a(1, 6).halve(), a(1, 12));
        assert_eq!(a(1, 6).antipode(), a(2, 3));
        assert_eq!(a(3, 4).antipode(), a(1, 4));
        assert_eq!(a(1, 6).conjugate(), a(5, 6));
        assert_eq!(a(7, 12).double(), a(1, 6));
        assert!(a(1, 2).is_dyadic() && !a(1, 6).is_dyadic() && !Angle::zero().is_dyadic());
        assert_eq!(a(1, 12).ccw_to(&a(7, 12)), BigRational::new(1.into(), 2.into()));
        assert_eq!(a(7, 12).ccw_to(&a(1, 12)), BigRational::new(1.into(), 2.into()));
    }
}
