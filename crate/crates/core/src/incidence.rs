//! The incidence ring `M_Λ(P)` of a finite proset.

use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::proset::Proset;
use crate::ring::{CoeffRing, RingValue};

/// A matrix supported on the order relation. Zero entries are never stored,
/// so derived equality of the entry maps is equality in the ring.
#[derive(Debug, Clone)]
pub struct IncMatrix {
    proset: Arc<Proset>,
    ring: CoeffRing,
    entries: BTreeMap<(usize, usize), RingValue>,
}

impl PartialEq for IncMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.same_space(other) && self.entries == other.entries
    }
}

impl Eq for IncMatrix {}

impl Hash for IncMatrix {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ring.hash(state);
        self.entries.hash(state);
    }
}

/// Two-sided ideals of `M_Λ(P)` built from coordinate conditions.
#[derive(Debug, Clone, PartialEq)]
pub enum IdealSpec {
    /// `I_[s1,s2]`: zero on `[s1,s2] × [s1,s2]`.
    Interval(usize, usize),
    /// `I_Λ'`: zero on `Λ' × Λ'` for a convex `Λ'`.
    Convex(Vec<usize>),
    /// Intersection of `I_Λi` over pairwise disjoint convex sets.
    LocallyConvex(Vec<Vec<usize>>),
    /// `M_Λ(J)` for the principal ideal `J = (g)`.
    Coeff(RingValue),
    Sum(Vec<IdealSpec>),
}

impl IncMatrix {
    pub fn zero(proset: &Arc<Proset>, ring: CoeffRing) -> Self {
        IncMatrix { proset: proset.clone(), ring, entries: BTreeMap::new() }
    }

    /// `p^Λ`.
    pub fn scalar_diag(proset: &Arc<Proset>, ring: CoeffRing, p: &RingValue) -> Self {
        let mut m = Self::zero(proset, ring);
        if !ring.is_zero(p) {
            for s in 0..proset.len() {
                m.entries.insert((s, s), p.clone());
            }
        }
        m
    }

    pub fn identity(proset: &Arc<Proset>, ring: CoeffRing) -> Self {
        Self::scalar_diag(proset, ring, &ring.one())
    }

    /// `1^S`.
    pub fn indicator(proset: &Arc<Proset>, ring: CoeffRing, set: &[usize]) -> Self {
        let mut m = Self::zero(proset, ring);
        for &s in set {
            m.entries.insert((s, s), ring.one());
        }
        m
    }

    /// `e^(s1,s2)`.
    pub fn unit(proset: &Arc<Proset>, ring: CoeffRing, s1: usize, s2: usize) -> Result<Self> {
        if !proset.leq(s1, s2) {
            return Err(Error::NotComparable(proset.name(s1).into(), proset.name(s2).into()));
        }
        let mut m = Self::zero(proset, ring);
        m.entries.insert((s1, s2), ring.one());
        Ok(m)
    }

    pub fn from_entries(
        proset: &Arc<Proset>,
        ring: CoeffRing,
        entries: impl IntoIterator<Item = (usize, usize, RingValue)>,
    ) -> Result<Self> {
        let mut m = Self::zero(proset, ring);
        for (a, b, v) in entries {
            m.set(a, b, v)?;
        }
        Ok(m)
    }

    /// Entries as produced by `f` on every related pair.
    pub fn from_fn(proset: &Arc<Proset>, ring: CoeffRing, mut f: impl FnMut(usize, usize) -> RingValue) -> Self {
        let mut m = Self::zero(proset, ring);
        for (a, b) in proset.relations() {
            let v = f(a, b);
            if !ring.is_zero(&v) {
                m.entries.insert((a, b), v);
            }
        }
        m
    }

    pub fn proset(&self) -> &Arc<Proset> {
        &self.proset
    }

    pub fn ring(&self) -> CoeffRing {
        self.ring
    }

    pub fn get(&self, a: usize, b: usize) -> RingValue {
        self.entries.get(&(a, b)).cloned().unwrap_or_else(|| self.ring.zero())
    }

    /// Writes one entry; writing a nonzero value off the relation fails.
    pub fn set(&mut self, a: usize, b: usize, v: RingValue) -> Result<()> {
        let n = self.proset.len();
        if a >= n || b >= n {
            return Err(Error::Format(format!("index ({a}, {b}) out of range")));
        }
        if !self.ring.contains(&v) {
            return Err(Error::Format(format!("value {v} is not in {}", self.ring)));
        }
        if self.ring.is_zero(&v) {
            self.entries.remove(&(a, b));
            return Ok(());
        }
        if !self.proset.leq(a, b) {
            return Err(Error::NotComparable(self.proset.name(a).into(), self.proset.name(b).into()));
        }
        self.entries.insert((a, b), v);
        Ok(())
    }

    /// Stored (nonzero) entries in lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &RingValue)> {
        self.entries.iter().map(|(&(a, b), v)| (a, b, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.entries.len() == self.proset.len()
            && self.entries.iter().all(|(&(a, b), v)| a == b && self.ring.is_one(v))
    }

    pub fn same_space(&self, other: &Self) -> bool {
        self.ring == other.ring && (Arc::ptr_eq(&self.proset, &other.proset) || *self.proset == *other.proset)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::IncompatibleOperands)
        }
    }

    fn accumulate(&mut self, key: (usize, usize), v: RingValue) {
        let r = self.ring;
        match self.entries.get_mut(&key) {
            Some(cur) => {
                *cur = r.add(cur, &v);
                if r.is_zero(cur) {
                    self.entries.remove(&key);
                }
            }
            None => {
                if !r.is_zero(&v) {
                    self.entries.insert(key, v);
                }
            }
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (&k, v) in &other.entries {
            out.accumulate(k, v.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    /// `c_{s1,s2} = Σ_{t ∈ [s1,s2]} a_{s1,t} b_{t,s2}`. Only stored entries are
    /// visited: `a_{s1,t} b_{t,s2} ≠ 0` already forces `t ∈ [s1,s2]`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let r = self.ring;
        let mut out = Self::zero(&self.proset, r);
        for (&(a, t), x) in &self.entries {
            for (&(_, b), y) in other.entries.range((t, 0)..(t + 1, 0)) {
                out.accumulate((a, b), r.mul(x, y));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, p: &RingValue) -> Self {
        let mut out = Self::zero(&self.proset, self.ring);
        for (&k, v) in &self.entries {
            out.accumulate(k, self.ring.mul(p, v));
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(&self.proset, self.ring);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Entry `(a, b)` moved to `(b, a)` over `target`, which must carry the
    /// opposite order.
    pub fn transpose_onto(&self, target: &Arc<Proset>) -> Result<Self> {
        let mut out = Self::zero(target, self.ring);
        for (&(a, b), v) in &self.entries {
            out.set(b, a, v.clone())?;
        }
        Ok(out)
    }

    /// Reinterprets the entries over another proset with the same elements
    /// whose order contains this one.
    pub fn reinterpret(&self, target: &Arc<Proset>) -> Result<Self> {
        if target.len() != self.proset.len() {
            return Err(Error::IncompatibleOperands);
        }
        let mut out = Self::zero(target, self.ring);
        for (&(a, b), v) in &self.entries {
            out.set(a, b, v.clone())?;
        }
        Ok(out)
    }

    /// Restriction to `Λ' × Λ'` over the induced proset on a convex `Λ'`.
    pub fn project(&self, subset: &[usize]) -> Result<Self> {
        if !self.proset.is_convex(subset) {
            return Err(Error::NotConvex(self.describe(subset)));
        }
        Ok(self.restrict_to(&Arc::new(self.proset.restrict(subset)), subset))
    }

    /// Restriction onto a prebuilt induced proset; `subset` in any order.
    pub(crate) fn restrict_to(&self, target: &Arc<Proset>, subset: &[usize]) -> Self {
        let mut idx: Vec<usize> = subset.to_vec();
        idx.sort_unstable();
        idx.dedup();
        let pos = |s: usize| idx.binary_search(&s).ok();
        let mut out = Self::zero(target, self.ring);
        for (&(a, b), v) in &self.entries {
            if let (Some(i), Some(j)) = (pos(a), pos(b)) {
                out.entries.insert((i, j), v.clone());
            }
        }
        out
    }

    fn describe(&self, subset: &[usize]) -> String {
        let names: Vec<&str> = subset.iter().map(|&s| self.proset.name(s)).collect();
        format!("{{{}}}", names.join(", "))
    }

    /// The blocks of `A` over the components of its proset, in component order.
    pub fn split_components(&self) -> Vec<IncMatrix> {
        self.proset
            .components()
            .iter()
            .map(|c| self.restrict_to(&Arc::new(self.proset.restrict(c)), c))
            .collect()
    }

    /// Inverse of [`split_components`](Self::split_components).
    pub fn join_components(parts: &[IncMatrix], proset: &Arc<Proset>, ring: CoeffRing) -> Result<Self> {
        let comps = proset.components();
        if parts.len() != comps.len() {
            return Err(Error::IncompatibleOperands);
        }
        let mut out = Self::zero(proset, ring);
        for (part, comp) in parts.iter().zip(comps) {
            if part.ring != ring || *part.proset != proset.restrict(comp) {
                return Err(Error::IncompatibleOperands);
            }
            for (&(a, b), v) in &part.entries {
                out.entries.insert((comp[a], comp[b]), v.clone());
            }
        }
        Ok(out)
    }

    /// Membership in a coordinate ideal.
    pub fn ideal_membership(&self, spec: &IdealSpec) -> Result<bool> {
        let gens = self.coordinate_generators(spec)?;
        Ok(self.entries.iter().all(|(&(a, b), v)| self.ring.in_ideal(&gens(a, b), v)))
    }

    /// Each ideal here is a product of per-coordinate ideals of `P`, so a sum
    /// of them is the coordinatewise sum.
    fn coordinate_generators(&self, spec: &IdealSpec) -> Result<Box<dyn Fn(usize, usize) -> RingValue + '_>> {
        let r = self.ring;
        let p = &self.proset;
        let region = |member: Vec<Vec<bool>>| -> Box<dyn Fn(usize, usize) -> RingValue> {
            Box::new(move |a, b| {
                if member.iter().any(|m| m[a] && m[b]) {
                    r.zero()
                } else {
                    r.one()
                }
            })
        };
        let mask = |set: &[usize]| {
            let mut m = vec![false; p.len()];
            for &s in set {
                m[s] = true;
            }
            m
        };
        Ok(match spec {
            IdealSpec::Interval(s1, s2) => {
                if !p.leq(*s1, *s2) {
                    return Err(Error::NotComparable(p.name(*s1).into(), p.name(*s2).into()));
                }
                region(vec![mask(&p.interval(*s1, *s2))])
            }
            IdealSpec::Convex(set) => {
                if !p.is_convex(set) {
                    return Err(Error::NotConvex(self.describe(set)));
                }
                region(vec![mask(set)])
            }
            IdealSpec::LocallyConvex(sets) => {
                let mut owner = vec![false; p.len()];
                for set in sets {
                    if !p.is_convex(set) {
                        return Err(Error::NotConvex(self.describe(set)));
                    }
                    for &s in set {
                        if std::mem::replace(&mut owner[s], true) {
                            return Err(Error::NotConvex(format!(
                                "collection members overlap at {}",
                                p.name(s)
                            )));
                        }
                    }
                }
                region(sets.iter().map(|s| mask(s)).collect())
            }
            IdealSpec::Coeff(g) => {
                if !r.contains(g) {
                    return Err(Error::Format(format!("{g} is not in {r}")));
                }
                let g = g.clone();
                Box::new(move |_, _| g.clone())
            }
            IdealSpec::Sum(specs) => {
                let parts = specs.iter().map(|s| self.coordinate_generators(s)).collect::<Result<Vec<_>>>()?;
                Box::new(move |a, b| parts.iter().fold(r.zero(), |acc, g| r.ideal_sum(&acc, &g(a, b))))
            }
        })
    }

    /// A random matrix; each related coordinate is filled with probability
    /// `density`.
    pub fn random<R: Rng + ?Sized>(proset: &Arc<Proset>, ring: CoeffRing, density: f64, rng: &mut R) -> Self {
        Self::from_fn(proset, ring, |_, _| {
            if rng.gen_bool(density) {
                ring.random(rng)
            } else {
                ring.zero()
            }
        })
    }
}

impl Add for &IncMatrix {
    type Output = IncMatrix;
    fn add(self, rhs: &IncMatrix) -> IncMatrix {
        self.try_add(rhs).expect("operands over the same proset and ring")
    }
}

impl Sub for &IncMatrix {
    type Output = IncMatrix;
    fn sub(self, rhs: &IncMatrix) -> IncMatrix {
        self.try_sub(rhs).expect("operands over the same proset and ring")
    }
}

impl Mul for &IncMatrix {
    type Output = IncMatrix;
    fn mul(self, rhs: &IncMatrix) -> IncMatrix {
        self.try_mul(rhs).expect("operands over the same proset and ring")
    }
}

impl Neg for &IncMatrix {
    type Output = IncMatrix;
    fn neg(self) -> IncMatrix {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v = self.ring.neg(v);
        }
        out
    }
}
