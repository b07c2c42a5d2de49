//! Exact commutative coefficient rings.
//!
//! A [`CoeffRing`] is a small descriptor; the values themselves are
//! [`RingValue`]s kept in canonical form (residues in `[0, n)`, fractions in
//! lowest terms with positive denominator) so that derived equality is ring
//! equality.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoeffRing {
    Integer,
    Rational,
    ModN(u64),
    PrimeField(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingValue {
    Int(BigInt),
    Rat(BigRational),
    Res(u64),
}

impl fmt::Display for RingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingValue::Int(v) => write!(f, "{v}"),
            RingValue::Rat(q) if q.is_integer() => write!(f, "{}", q.numer()),
            RingValue::Rat(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            RingValue::Res(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffRing::Integer => write!(f, "Z"),
            CoeffRing::Rational => write!(f, "Q"),
            CoeffRing::ModN(n) => write!(f, "Z/{n}"),
            CoeffRing::PrimeField(p) => write!(f, "GF({p})"),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn inv_mod(a: u64, n: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (n as i128, (a % n) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(n as i128) as u64)
}

impl CoeffRing {
    pub fn mod_n(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidRing(format!("modulus {n} must be at least 2")));
        }
        Ok(CoeffRing::ModN(n))
    }

    pub fn prime_field(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidRing(format!("{p} is not prime")));
        }
        Ok(CoeffRing::PrimeField(p))
    }

    /// Modulus of a finite ring.
    pub fn modulus(&self) -> Option<u64> {
        match *self {
            CoeffRing::ModN(n) | CoeffRing::PrimeField(n) => Some(n),
            _ => None,
        }
    }

    pub fn order(&self) -> Option<u64> {
        self.modulus()
    }

    pub fn is_finite(&self) -> bool {
        self.modulus().is_some()
    }

    pub fn is_field(&self) -> bool {
        match *self {
            CoeffRing::Rational | CoeffRing::PrimeField(_) => true,
            CoeffRing::ModN(n) => is_prime(n),
            CoeffRing::Integer => false,
        }
    }

    pub fn zero(&self) -> RingValue {
        self.from_i64(0)
    }

    pub fn one(&self) -> RingValue {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> RingValue {
        match *self {
            CoeffRing::Integer => RingValue::Int(BigInt::from(v)),
            CoeffRing::Rational => RingValue::Rat(BigRational::from_integer(BigInt::from(v))),
            CoeffRing::ModN(n) | CoeffRing::PrimeField(n) => {
                RingValue::Res((v as i128).rem_euclid(n as i128) as u64)
            }
        }
    }

    fn from_bigint(&self, v: BigInt) -> RingValue {
        match *self {
            CoeffRing::Integer => RingValue::Int(v),
            CoeffRing::Rational => RingValue::Rat(BigRational::from_integer(v)),
            CoeffRing::ModN(n) | CoeffRing::PrimeField(n) => {
                let r = v.mod_floor(&BigInt::from(n));
                RingValue::Res(r.to_u64().expect("residue fits in u64"))
            }
        }
    }

    /// Whether `v` is a canonical value of this ring.
    pub fn contains(&self, v: &RingValue) -> bool {
        match (self, v) {
            (CoeffRing::Integer, RingValue::Int(_)) => true,
            (CoeffRing::Rational, RingValue::Rat(_)) => true,
            (CoeffRing::ModN(n) | CoeffRing::PrimeField(n), RingValue::Res(r)) => r < n,
            _ => false,
        }
    }

    pub fn add(&self, a: &RingValue, b: &RingValue) -> RingValue {
        match (self, a, b) {
            (CoeffRing::Integer, RingValue::Int(x), RingValue::Int(y)) => RingValue::Int(x + y),
            (CoeffRing::Rational, RingValue::Rat(x), RingValue::Rat(y)) => RingValue::Rat(x + y),
            (CoeffRing::ModN(n) | CoeffRing::PrimeField(n), RingValue::Res(x), RingValue::Res(y)) => {
                RingValue::Res(((*x as u128 + *y as u128) % *n as u128) as u64)
            }
            _ => panic!("value does not belong to {self}"),
        }
    }

    pub fn neg(&self, a: &RingValue) -> RingValue {
        match (self, a) {
            (CoeffRing::Integer, RingValue::Int(x)) => RingValue::Int(-x),
            (CoeffRing::Rational, RingValue::Rat(x)) => RingValue::Rat(-x),
            (CoeffRing::ModN(n) | CoeffRing::PrimeField(n), RingValue::Res(x)) => {
                RingValue::Res(if *x == 0 { 0 } else { n - x })
            }
            _ => panic!("value does not belong to {self}"),
        }
    }

    pub fn sub(&self, a: &RingValue, b: &RingValue) -> RingValue {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &RingValue, b: &RingValue) -> RingValue {
        match (self, a, b) {
            (CoeffRing::Integer, RingValue::Int(x), RingValue::Int(y)) => RingValue::Int(x * y),
            (CoeffRing::Rational, RingValue::Rat(x), RingValue::Rat(y)) => RingValue::Rat(x * y),
            (CoeffRing::ModN(n) | CoeffRing::PrimeField(n), RingValue::Res(x), RingValue::Res(y)) => {
                RingValue::Res(mul_mod(*x, *y, *n))
            }
            _ => panic!("value does not belong to {self}"),
        }
    }

    pub fn pow(&self, a: &RingValue, mut e: u64) -> RingValue {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, a: &RingValue) -> bool {
        match a {
            RingValue::Int(x) => x.is_zero(),
            RingValue::Rat(x) => x.is_zero(),
            RingValue::Res(x) => *x == 0,
        }
    }

    pub fn is_one(&self, a: &RingValue) -> bool {
        match a {
            RingValue::Int(x) => x.is_one(),
            RingValue::Rat(x) => x.is_one(),
            RingValue::Res(x) => *x == 1,
        }
    }

    pub fn is_unit(&self, a: &RingValue) -> bool {
        self.inv(a).is_some()
    }

    pub fn inv(&self, a: &RingValue) -> Option<RingValue> {
        match (self, a) {
            (CoeffRing::Integer, RingValue::Int(x)) => {
                (x.abs().is_one()).then(|| RingValue::Int(x.clone()))
            }
            (CoeffRing::Rational, RingValue::Rat(x)) => {
                (!x.is_zero()).then(|| RingValue::Rat(x.recip()))
            }
            (CoeffRing::ModN(n) | CoeffRing::PrimeField(n), RingValue::Res(x)) => {
                inv_mod(*x, *n).map(RingValue::Res)
            }
            _ => panic!("value does not belong to {self}"),
        }
    }

    /// Parses integers, fractions `a/b` and residues. Residues accept any
    /// integer and reduce it; a fraction is accepted in a finite ring when
    /// the denominator is a unit there.
    pub fn parse(&self, s: &str) -> Result<RingValue> {
        let bad = |reason: &str| Error::ParseValue { value: s.to_string(), reason: reason.to_string() };
        let t = s.trim();
        let (num, den) = match t.split_once('/') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (t, None),
        };
        let num: BigInt = num.parse().map_err(|_| bad("not an integer or fraction"))?;
        let den: Option<BigInt> = match den {
            Some(d) => Some(d.parse().map_err(|_| bad("bad denominator"))?),
            None => None,
        };
        match (self, den) {
            (_, None) => Ok(self.from_bigint(num)),
            (_, Some(d)) if d.is_zero() => Err(bad("zero denominator")),
            (CoeffRing::Integer, Some(d)) => {
                if (&num % &d).is_zero() {
                    Ok(RingValue::Int(num / d))
                } else {
                    Err(bad("fraction is not an integer"))
                }
            }
            (CoeffRing::Rational, Some(d)) => Ok(RingValue::Rat(BigRational::new(num, d))),
            (_, Some(d)) => {
                let d = self.from_bigint(d);
                let dinv = self.inv(&d).ok_or_else(|| bad("denominator is not a unit"))?;
                Ok(self.mul(&self.from_bigint(num), &dinv))
            }
        }
    }

    /// All elements of a finite ring, in increasing residue order.
    pub fn elements(&self) -> Option<Vec<RingValue>> {
        self.modulus().map(|n| (0..n).map(RingValue::Res).collect())
    }

    /// All units of a finite ring; `{1, -1}` for the integers and `None` for
    /// the rationals.
    pub fn units(&self) -> Option<Vec<RingValue>> {
        match self {
            CoeffRing::Integer => Some(vec![self.one(), self.from_i64(-1)]),
            CoeffRing::Rational => None,
            _ => Some(
                self.elements()
                    .expect("finite ring")
                    .into_iter()
                    .filter(|v| self.is_unit(v))
                    .collect(),
            ),
        }
    }

    /// The idempotents `{a : a^2 = a}`.
    pub fn boolean_part(&self) -> Vec<RingValue> {
        match self.elements() {
            Some(all) => all.into_iter().filter(|a| self.mul(a, a) == *a).collect(),
            None => vec![self.zero(), self.one()],
        }
    }

    /// Whether there are units `p1, p2` whose difference is again a unit.
    pub fn has_unit_pair(&self) -> bool {
        match self {
            CoeffRing::Integer => false,
            CoeffRing::Rational => true,
            _ => {
                let units = self.units().expect("finite ring");
                units.iter().any(|a| units.iter().any(|b| self.is_unit(&self.sub(a, b))))
            }
        }
    }

    /// Membership of `a` in the principal ideal generated by `g`. Every ideal
    /// of the supported rings is principal.
    pub fn in_ideal(&self, g: &RingValue, a: &RingValue) -> bool {
        match (self, g, a) {
            (CoeffRing::Integer, RingValue::Int(g), RingValue::Int(a)) => {
                if g.is_zero() {
                    a.is_zero()
                } else {
                    (a % g).is_zero()
                }
            }
            (CoeffRing::ModN(n) | CoeffRing::PrimeField(n), RingValue::Res(g), RingValue::Res(a)) => {
                a % g.gcd(n) == 0
            }
            (CoeffRing::Rational, g, a) => !self.is_zero(g) || self.is_zero(a),
            _ => panic!("value does not belong to {self}"),
        }
    }

    /// A generator of the ideal `(g1) + (g2)`.
    pub fn ideal_sum(&self, g1: &RingValue, g2: &RingValue) -> RingValue {
        match (self, g1, g2) {
            (CoeffRing::Integer, RingValue::Int(a), RingValue::Int(b)) => RingValue::Int(a.gcd(b)),
            (CoeffRing::ModN(n) | CoeffRing::PrimeField(n), RingValue::Res(a), RingValue::Res(b)) => {
                RingValue::Res(a.gcd(b).gcd(n) % n)
            }
            (CoeffRing::Rational, a, b) => {
                if self.is_zero(a) && self.is_zero(b) {
                    self.zero()
                } else {
                    self.one()
                }
            }
            _ => panic!("value does not belong to {self}"),
        }
    }

    /// A random element; small numerators and denominators for the infinite rings.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> RingValue {
        match *self {
            CoeffRing::Integer => self.from_i64(rng.gen_range(-4..=4)),
            CoeffRing::Rational => RingValue::Rat(BigRational::new(
                BigInt::from(rng.gen_range(-4i64..=4)),
                BigInt::from(rng.gen_range(1i64..=3)),
            )),
            CoeffRing::ModN(n) | CoeffRing::PrimeField(n) => RingValue::Res(rng.gen_range(0..n)),
        }
    }

    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> RingValue {
        loop {
            let v = self.random(rng);
            if self.is_unit(&v) {
                return v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_finite() -> Vec<CoeffRing> {
        vec![
            CoeffRing::ModN(2),
            CoeffRing::ModN(4),
            CoeffRing::ModN(6),
            CoeffRing::ModN(9),
            CoeffRing::PrimeField(2),
            CoeffRing::PrimeField(5),
        ]
    }

    #[test]
    fn unit_examples() {
        let z = CoeffRing::Integer;
        assert!(z.is_unit(&z.from_i64(-1)));
        assert!(!z.is_unit(&z.from_i64(2)));
        let m6 = CoeffRing::ModN(6);
        assert!(!m6.is_unit(&m6.from_i64(3)));
        let f5 = CoeffRing::PrimeField(5);
        assert!(f5.is_unit(&f5.from_i64(2)));
    }

    #[test]
    fn unit_matches_exhaustive_search() {
        for r in all_finite() {
            let els = r.elements().unwrap();
            for a in &els {
                let found = els.iter().any(|b| r.is_one(&r.mul(a, b)));
                assert_eq!(found, r.is_unit(a), "{r} {a}");
            }
        }
    }

    #[test]
    fn boolean_parts() {
        let show = |r: CoeffRing| r.boolean_part().iter().map(|v| v.to_string()).collect::<Vec<_>>();
        assert_eq!(show(CoeffRing::ModN(4)), ["0", "1"]);
        assert_eq!(show(CoeffRing::ModN(6)), ["0", "1", "3", "4"]);
        assert_eq!(show(CoeffRing::Rational), ["0", "1"]);
        for r in all_finite() {
            let b = r.boolean_part();
            assert!(b.contains(&r.zero()) && b.contains(&r.one()));
            for a in &b {
                assert!(b.contains(&r.sub(&r.one(), a)));
            }
        }
    }

    #[test]
    fn unit_pairs() {
        assert!(CoeffRing::PrimeField(5).has_unit_pair());
        assert!(!CoeffRing::Integer.has_unit_pair());
        assert!(!CoeffRing::ModN(2).has_unit_pair());
        assert!(!CoeffRing::ModN(4).has_unit_pair());
        assert!(CoeffRing::ModN(9).has_unit_pair());
        assert!(CoeffRing::Rational.has_unit_pair());
    }

    #[test]
    fn descriptor_validation() {
        assert!(CoeffRing::mod_n(1).is_err());
        assert!(CoeffRing::prime_field(9).is_err());
        assert!(CoeffRing::prime_field(7).is_ok());
    }

    #[test]
    fn parsing_is_canonical() {
        let q = CoeffRing::Rational;
        assert_eq!(q.parse("2/-4").unwrap().to_string(), "-1/2");
        assert_eq!(q.parse("6/3").unwrap().to_string(), "2");
        let m = CoeffRing::ModN(6);
        assert_eq!(m.parse("-1").unwrap(), RingValue::Res(5));
        assert_eq!(m.parse("1/5").unwrap(), RingValue::Res(5));
        assert!(m.parse("1/2").is_err());
        assert!(CoeffRing::Integer.parse("1/2").is_err());
        assert!(q.parse("x").is_err());
    }

    #[test]
    fn ideals() {
        let z = CoeffRing::Integer;
        assert!(z.in_ideal(&z.from_i64(3), &z.from_i64(-9)));
        assert!(!z.in_ideal(&z.from_i64(3), &z.from_i64(4)));
        assert_eq!(z.ideal_sum(&z.from_i64(4), &z.from_i64(6)), z.from_i64(2));
        let m = CoeffRing::ModN(12);
        // (8) = (4) in Z/12
        assert!(m.in_ideal(&m.from_i64(8), &m.from_i64(4)));
        assert!(!m.in_ideal(&m.from_i64(8), &m.from_i64(2)));
    }

    fn ring_strategy() -> impl Strategy<Value = CoeffRing> {
        prop_oneof![
            (2u64..40).prop_map(CoeffRing::ModN),
            prop::sample::select(vec![2u64, 3, 5, 7, 11, 101]).prop_map(CoeffRing::PrimeField),
            Just(CoeffRing::Integer),
            Just(CoeffRing::Rational),
        ]
    }

    proptest! {
        #[test]
        fn ring_axioms(r in ring_strategy(), a in -50i64..50, b in -50i64..50, c in -50i64..50, d in 1i64..7) {
            let q = |x: i64| match r {
                CoeffRing::Rational => r.parse(&format!("{x}/{d}")).unwrap(),
                _ => r.from_i64(x),
            };
            let (a, b, c) = (q(a), q(b), q(c));
            prop_assert_eq!(r.mul(&a, &r.add(&b, &c)), r.add(&r.mul(&a, &b), &r.mul(&a, &c)));
            prop_assert_eq!(r.mul(&a, &b), r.mul(&b, &a));
            prop_assert_eq!(r.mul(&r.mul(&a, &b), &c), r.mul(&a, &r.mul(&b, &c)));
            prop_assert_eq!(r.add(&a, &r.zero()), a.clone());
            prop_assert_eq!(r.mul(&a, &r.one()), a.clone());
            prop_assert!(r.is_zero(&r.sub(&a, &a)));
            if let Some(inv) = r.inv(&a) {
                prop_assert!(r.is_one(&r.mul(&inv, &a)));
            }
            prop_assert!(r.contains(&a));
            prop_assert_eq!(r.parse(&a.to_string()).unwrap(), a);
        }
    }
}
