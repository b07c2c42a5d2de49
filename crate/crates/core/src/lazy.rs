//! Matrices over infinite proset families, given by coordinate oracles or by
//! finitary descriptors, and their finite window projections.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::glgroup::{self, invert_matrix};
use crate::incidence::IncMatrix;
use crate::proset::ProsetFamily;
use crate::ring::{CoeffRing, RingValue};

pub type Oracle = Arc<dyn Fn(i64, i64) -> Result<RingValue> + Send + Sync>;

/// Finite off-diagonal support, finitely many diagonal exceptions and a
/// default diagonal value. Kept canonical: no stored zeros off the diagonal,
/// no exception equal to the default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finitary {
    off_diagonal: BTreeMap<(i64, i64), RingValue>,
    diagonal_exceptions: BTreeMap<i64, RingValue>,
    diagonal_default: RingValue,
}

impl Finitary {
    pub fn new(
        ring: CoeffRing,
        diagonal_default: RingValue,
        off_diagonal: impl IntoIterator<Item = ((i64, i64), RingValue)>,
        diagonal_exceptions: impl IntoIterator<Item = (i64, RingValue)>,
    ) -> Self {
        let mut f = Finitary { off_diagonal: BTreeMap::new(), diagonal_exceptions: BTreeMap::new(), diagonal_default };
        for ((a, b), v) in off_diagonal {
            f.set(ring, a, b, v);
        }
        for (s, v) in diagonal_exceptions {
            f.set(ring, s, s, v);
        }
        f
    }

    pub fn scalar(p: RingValue) -> Self {
        Finitary { off_diagonal: BTreeMap::new(), diagonal_exceptions: BTreeMap::new(), diagonal_default: p }
    }

    fn set(&mut self, ring: CoeffRing, a: i64, b: i64, v: RingValue) {
        if a == b {
            if v == self.diagonal_default {
                self.diagonal_exceptions.remove(&a);
            } else {
                self.diagonal_exceptions.insert(a, v);
            }
        } else if ring.is_zero(&v) {
            self.off_diagonal.remove(&(a, b));
        } else {
            self.off_diagonal.insert((a, b), v);
        }
    }

    pub fn get(&self, ring: CoeffRing, a: i64, b: i64) -> RingValue {
        if a == b {
            self.diagonal_exceptions.get(&a).unwrap_or(&self.diagonal_default).clone()
        } else {
            self.off_diagonal.get(&(a, b)).cloned().unwrap_or_else(|| ring.zero())
        }
    }

    pub fn off_diagonal(&self) -> &BTreeMap<(i64, i64), RingValue> {
        &self.off_diagonal
    }

    pub fn diagonal_exceptions(&self) -> &BTreeMap<i64, RingValue> {
        &self.diagonal_exceptions
    }

    pub fn diagonal_default(&self) -> &RingValue {
        &self.diagonal_default
    }

    /// Every element carrying a non-default coordinate.
    pub fn support(&self) -> BTreeSet<i64> {
        let mut s: BTreeSet<i64> = self.diagonal_exceptions.keys().copied().collect();
        for &(a, b) in self.off_diagonal.keys() {
            s.insert(a);
            s.insert(b);
        }
        s
    }

    /// `A = d·1 + X` with `X` finitely supported.
    fn split(&self, ring: CoeffRing) -> BTreeMap<(i64, i64), RingValue> {
        let mut x = self.off_diagonal.clone();
        for (&s, v) in &self.diagonal_exceptions {
            x.insert((s, s), ring.sub(v, &self.diagonal_default));
        }
        x
    }

    fn from_split(ring: CoeffRing, d: RingValue, x: BTreeMap<(i64, i64), RingValue>) -> Self {
        let mut f = Finitary::scalar(d.clone());
        for ((a, b), v) in x {
            let v = if a == b { ring.add(&d, &v) } else { v };
            f.set(ring, a, b, v);
        }
        f
    }

    fn add(&self, other: &Finitary, ring: CoeffRing) -> Finitary {
        let mut x = self.split(ring);
        for (k, v) in other.split(ring) {
            let e = x.entry(k).or_insert_with(|| ring.zero());
            *e = ring.add(e, &v);
        }
        Finitary::from_split(ring, ring.add(&self.diagonal_default, &other.diagonal_default), x)
    }

    /// `(d·1 + X)(e·1 + Y) = de·1 + dY + eX + XY`.
    fn mul(&self, other: &Finitary, ring: CoeffRing) -> Finitary {
        let d = &self.diagonal_default;
        let e = &other.diagonal_default;
        let x = self.split(ring);
        let y = other.split(ring);
        let mut out: BTreeMap<(i64, i64), RingValue> = BTreeMap::new();
        let mut acc = |k: (i64, i64), v: RingValue| {
            let slot = out.entry(k).or_insert_with(|| ring.zero());
            *slot = ring.add(slot, &v);
        };
        for (&k, v) in &y {
            acc(k, ring.mul(d, v));
        }
        for (&k, v) in &x {
            acc(k, ring.mul(v, e));
        }
        let mut by_row: BTreeMap<i64, Vec<(i64, &RingValue)>> = BTreeMap::new();
        for (&(t, b), v) in &y {
            by_row.entry(t).or_default().push((b, v));
        }
        for (&(a, t), u) in &x {
            for &(b, v) in by_row.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
                acc((a, b), ring.mul(u, v));
            }
        }
        Finitary::from_split(ring, ring.mul(d, e), out)
    }
}

#[derive(Clone)]
enum Repr {
    Finitary(Arc<Finitary>),
    Oracle { f: Oracle, memo: Arc<RwLock<HashMap<(i64, i64), RingValue>>> },
}

/// An element of `M_Λ(P)` for a possibly infinite family.
#[derive(Clone)]
pub struct LazyMatrix {
    family: ProsetFamily,
    ring: CoeffRing,
    repr: Repr,
}

impl fmt::Debug for LazyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("LazyMatrix");
        d.field("family", &self.family).field("ring", &self.ring);
        match &self.repr {
            Repr::Finitary(x) => d.field("finitary", x),
            Repr::Oracle { .. } => d.field("oracle", &".."),
        };
        d.finish()
    }
}

impl LazyMatrix {
    pub fn from_oracle(
        family: ProsetFamily,
        ring: CoeffRing,
        f: impl Fn(i64, i64) -> Result<RingValue> + Send + Sync + 'static,
    ) -> Self {
        LazyMatrix { family, ring, repr: Repr::Oracle { f: Arc::new(f), memo: Default::default() } }
    }

    /// Off-diagonal keys must be related in the family.
    pub fn from_finitary(family: ProsetFamily, ring: CoeffRing, f: Finitary) -> Result<Self> {
        if !ring.contains(&f.diagonal_default) {
            return Err(Error::Format(format!("{} is not in {ring}", f.diagonal_default)));
        }
        for (&(a, b), v) in &f.off_diagonal {
            if !ring.contains(v) {
                return Err(Error::Format(format!("{v} is not in {ring}")));
            }
            if !family.leq(a, b) {
                return Err(Error::NotComparable(family.element_name(a), family.element_name(b)));
            }
        }
        for (&s, v) in &f.diagonal_exceptions {
            if !family.contains(s) {
                return Err(Error::UnknownElement(s.to_string()));
            }
            if !ring.contains(v) {
                return Err(Error::Format(format!("{v} is not in {ring}")));
            }
        }
        Ok(LazyMatrix { family, ring, repr: Repr::Finitary(Arc::new(f)) })
    }

    pub fn scalar(family: ProsetFamily, ring: CoeffRing, p: RingValue) -> Self {
        LazyMatrix { family, ring, repr: Repr::Finitary(Arc::new(Finitary::scalar(p))) }
    }

    pub fn identity(family: ProsetFamily, ring: CoeffRing) -> Self {
        Self::scalar(family, ring, ring.one())
    }

    /// `e^(s1,s2)`.
    pub fn unit(family: ProsetFamily, ring: CoeffRing, s1: i64, s2: i64) -> Result<Self> {
        let f = Finitary::new(ring, ring.zero(), [((s1, s2), ring.one())], []);
        Self::from_finitary(family, ring, f)
    }

    /// `U_{s,t} = 1` for every related pair.
    pub fn upper_ones(family: ProsetFamily, ring: CoeffRing) -> Self {
        Self::from_oracle(family, ring, move |_, _| Ok(ring.one()))
    }

    /// An oracle with pseudo-random coordinates, a pure function of the seed
    /// and the pair.
    pub fn random_oracle(family: ProsetFamily, ring: CoeffRing, seed: u64) -> Self {
        Self::from_oracle(family, ring, move |a, b| {
            let mut h = std::collections::hash_map::DefaultHasher::new();
            (seed, a, b).hash(&mut h);
            Ok(ring.random(&mut ChaCha8Rng::seed_from_u64(h.finish())))
        })
    }

    pub fn family(&self) -> &ProsetFamily {
        &self.family
    }

    pub fn ring(&self) -> CoeffRing {
        self.ring
    }

    pub fn finitary(&self) -> Option<&Finitary> {
        match &self.repr {
            Repr::Finitary(f) => Some(f),
            Repr::Oracle { .. } => None,
        }
    }

    /// The coordinate `A_{s1,s2}`; zero off the relation.
    pub fn get(&self, s1: i64, s2: i64) -> Result<RingValue> {
        if !self.family.leq(s1, s2) {
            return Ok(self.ring.zero());
        }
        match &self.repr {
            Repr::Finitary(f) => Ok(f.get(self.ring, s1, s2)),
            Repr::Oracle { f, memo } => {
                if let Some(v) = memo.read().expect("memo lock").get(&(s1, s2)) {
                    return Ok(v.clone());
                }
                let v = f(s1, s2)?;
                memo.write().expect("memo lock").insert((s1, s2), v.clone());
                Ok(v)
            }
        }
    }

    /// `π_α(A)` over the induced proset on `α` (sorted by identifier).
    pub fn project(&self, alpha: &[i64]) -> Result<IncMatrix> {
        if !self.family.is_convex(alpha)? {
            return Err(Error::NotConvex(format!("{alpha:?}")));
        }
        self.project_unchecked(alpha)
    }

    fn project_unchecked(&self, alpha: &[i64]) -> Result<IncMatrix> {
        let ids: Vec<i64> = alpha.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let p = Arc::new(self.family.materialize(&ids)?);
        let mut out = IncMatrix::zero(&p, self.ring);
        for (i, j) in p.relations() {
            out.set(i, j, self.get(ids[i], ids[j])?)?;
        }
        Ok(out)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.family == other.family && self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::IncompatibleOperands)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let r = self.ring;
        if let (Some(x), Some(y)) = (self.finitary(), other.finitary()) {
            return Ok(LazyMatrix { family: self.family.clone(), ring: r, repr: Repr::Finitary(Arc::new(x.add(y, r))) });
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(Self::from_oracle(self.family.clone(), r, move |s, t| Ok(r.add(&a.get(s, t)?, &b.get(s, t)?))))
    }

    pub fn neg(&self) -> Self {
        let r = self.ring;
        match self.finitary() {
            Some(x) => {
                let neg = Finitary::new(
                    r,
                    r.neg(&x.diagonal_default),
                    x.off_diagonal.iter().map(|(&k, v)| (k, r.neg(v))),
                    x.diagonal_exceptions.iter().map(|(&k, v)| (k, r.neg(v))),
                );
                LazyMatrix { family: self.family.clone(), ring: r, repr: Repr::Finitary(Arc::new(neg)) }
            }
            None => {
                let a = self.clone();
                Self::from_oracle(self.family.clone(), r, move |s, t| Ok(r.neg(&a.get(s, t)?)))
            }
        }
    }

    /// The interval convolution; eager and exact on finitary operands.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let r = self.ring;
        if let (Some(x), Some(y)) = (self.finitary(), other.finitary()) {
            return Ok(LazyMatrix { family: self.family.clone(), ring: r, repr: Repr::Finitary(Arc::new(x.mul(y, r))) });
        }
        let (a, b) = (self.clone(), other.clone());
        let fam = self.family.clone();
        Ok(Self::from_oracle(self.family.clone(), r, move |s1, s2| {
            let mut acc = r.zero();
            for t in fam.interval(s1, s2)? {
                acc = r.add(&acc, &r.mul(&a.get(s1, t)?, &b.get(t, s2)?));
            }
            Ok(acc)
        }))
    }

    /// The inverse. Finitary input gives a finitary inverse; otherwise each
    /// coordinate `(s1, s2)` is read off the inverse of `π_[s1,s2](A)`.
    pub fn invert(&self) -> Result<Self> {
        let r = self.ring;
        if let Some(x) = self.finitary() {
            return Ok(LazyMatrix {
                family: self.family.clone(),
                ring: r,
                repr: Repr::Finitary(Arc::new(self.finitary_inverse(x)?)),
            });
        }
        let a = self.clone();
        let fam = self.family.clone();
        Ok(Self::from_oracle(self.family.clone(), r, move |s1, s2| {
            let ids = fam.interval(s1, s2)?;
            let inv = invert_matrix(&a.project_unchecked(&ids)?).map_err(|_| {
                Error::NotInvertible(format!("on [{}, {}]", fam.element_name(s1), fam.element_name(s2)))
            })?;
            let pos = |x: i64| ids.binary_search(&x).expect("endpoint of the interval");
            Ok(inv.get(pos(s1), pos(s2)))
        }))
    }

    /// `d·1 + X` with `X` on `W × W`, `W` the interval closure of the support:
    /// the inverse is `d⁻¹` off `W` and the inverse of the `W`-corner on it.
    fn finitary_inverse(&self, x: &Finitary) -> Result<Finitary> {
        let r = self.ring;
        let d_inv = r
            .inv(&x.diagonal_default)
            .ok_or_else(|| Error::NotInvertible(format!("diagonal default {} is not a unit", x.diagonal_default)))?;
        let support: Vec<i64> = x.support().into_iter().collect();
        if support.is_empty() {
            return Ok(Finitary::scalar(d_inv));
        }
        let w = self.family.interval_closure(&support)?;
        let corner = invert_matrix(&self.project_unchecked(&w)?)?;
        let mut out = Finitary::scalar(d_inv);
        for (i, j, v) in corner.entries() {
            out.set(r, w[i], w[j], v.clone());
        }
        for (i, &s) in w.iter().enumerate() {
            out.set(r, s, s, corner.get(i, i));
        }
        Ok(out)
    }

    /// Same coordinates on every window in `windows`.
    pub fn agrees_on(&self, other: &Self, windows: &[Vec<i64>]) -> Result<bool> {
        for w in windows {
            if self.project(w)? != other.project(w)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `π_{β→α}`: restriction of a `β`-window matrix to the sub-window `α`.
pub fn restrict_window(big: &IncMatrix, beta: &[i64], alpha: &[i64]) -> Result<IncMatrix> {
    let beta: Vec<i64> = beta.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let idx = alpha
        .iter()
        .map(|a| beta.binary_search(a).map_err(|_| Error::UnknownElement(a.to_string())))
        .collect::<Result<Vec<usize>>>()?;
    big.project(&idx)
}

/// A random finitary matrix with `nnz` off-diagonal entries drawn from pairs
/// in `pool` and a few diagonal exceptions.
pub fn random_finitary<R: Rng + ?Sized>(
    family: &ProsetFamily,
    ring: CoeffRing,
    pool: &[i64],
    nnz: usize,
    rng: &mut R,
) -> LazyMatrix {
    let pairs: Vec<(i64, i64)> = pool
        .iter()
        .flat_map(|&a| pool.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| a != b && family.leq(a, b))
        .collect();
    let mut off = Vec::new();
    for _ in 0..nnz.min(pairs.len()) {
        off.push((pairs[rng.gen_range(0..pairs.len())], ring.random(rng)));
    }
    let mut exc = Vec::new();
    for &s in pool {
        if rng.gen_bool(0.3) {
            exc.push((s, ring.random(rng)));
        }
    }
    let f = Finitary::new(ring, ring.random(rng), off, exc);
    LazyMatrix::from_finitary(family.clone(), ring, f).expect("entries drawn from related pairs")
}

/// A random invertible finitary matrix supported on the window `w`.
pub fn random_finitary_invertible<R: Rng + ?Sized>(
    family: &ProsetFamily,
    ring: CoeffRing,
    w: &[i64],
    rng: &mut R,
) -> Result<LazyMatrix> {
    let ids: Vec<i64> = w.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let p = Arc::new(family.materialize(&ids)?);
    let body = glgroup::random_invertible(&p, ring, 0.6, rng);
    let d = ring.random_unit(rng);
    let mut f = Finitary::scalar(d);
    for (i, j, v) in body.matrix().entries() {
        f.set(ring, ids[i], ids[j], v.clone());
    }
    for (i, &s) in ids.iter().enumerate() {
        f.set(ring, s, s, body.matrix().get(i, i));
    }
    LazyMatrix::from_finitary(family.clone(), ring, f)
}

/// An element of `aGL_Λ(P)`, stored in `GL_{Λ+S}(P)` for a finite `S`.
#[derive(Debug, Clone)]
pub struct AglElement {
    base: ProsetFamily,
    augmentation: Vec<i64>,
    body: LazyMatrix,
    inverse: Arc<OnceLock<LazyMatrix>>,
}

impl PartialEq for AglElement {
    /// Equal after embedding both into the union augmentation.
    fn eq(&self, other: &Self) -> bool {
        let Ok(s) = union(&self.augmentation, &other.augmentation) else { return false };
        match (self.embed(&s), other.embed(&s)) {
            (Ok(a), Ok(b)) => a.body.finitary() == b.body.finitary(),
            _ => false,
        }
    }
}

fn union(a: &[i64], b: &[i64]) -> Result<Vec<i64>> {
    Ok(a.iter().chain(b).copied().collect::<BTreeSet<_>>().into_iter().collect())
}

impl AglElement {
    /// `body` is read as a finitary matrix over `Λ + S`.
    pub fn new(base: ProsetFamily, augmentation: Vec<i64>, body: Finitary, ring: CoeffRing) -> Result<Self> {
        let augmentation: Vec<i64> = augmentation.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let family = ProsetFamily::augment(base.clone(), vec![augmentation.clone()])?;
        let body = LazyMatrix::from_finitary(family, ring, body)?;
        let inverse = body.invert()?;
        Ok(AglElement { base, augmentation, body, inverse: Arc::new(OnceLock::from(inverse)) })
    }

    pub fn identity(base: ProsetFamily, ring: CoeffRing) -> Self {
        let body = LazyMatrix::identity(base.clone(), ring);
        AglElement { base, augmentation: Vec::new(), inverse: Arc::new(OnceLock::from(body.clone())), body }
    }

    pub fn augmentation(&self) -> &[i64] {
        &self.augmentation
    }

    pub fn body(&self) -> &LazyMatrix {
        &self.body
    }

    pub fn base(&self) -> &ProsetFamily {
        &self.base
    }

    /// `j_{S→S'}` for `S ⊆ S'`: the same coordinates over `Λ + S'`.
    pub fn embed(&self, target: &[i64]) -> Result<AglElement> {
        let target: Vec<i64> = target.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if !self.augmentation.iter().all(|s| target.binary_search(s).is_ok()) {
            return Err(Error::Format("embedding target must contain the augmentation".into()));
        }
        let f = self.body.finitary().expect("aGL bodies are finitary").clone();
        AglElement::new(self.base.clone(), target, f, self.body.ring)
    }

    pub fn mul(&self, other: &AglElement) -> Result<AglElement> {
        if self.base != other.base || self.body.ring != other.body.ring {
            return Err(Error::IncompatibleOperands);
        }
        let s = union(&self.augmentation, &other.augmentation)?;
        let a = self.embed(&s)?;
        let b = other.embed(&s)?;
        let body = a.body.mul(&b.body)?;
        let f = body.finitary().expect("finitary product").clone();
        AglElement::new(self.base.clone(), s, f, self.body.ring)
    }

    pub fn invert(&self) -> Result<AglElement> {
        let inv = self.inverse.get_or_init(|| self.body.invert().expect("validated at construction"));
        let f = inv.finitary().expect("finitary inverse").clone();
        AglElement::new(self.base.clone(), self.augmentation.clone(), f, self.body.ring)
    }

    pub fn is_identity(&self) -> bool {
        self.body.finitary().is_some_and(|f| {
            f.off_diagonal.is_empty() && f.diagonal_exceptions.is_empty() && self.body.ring.is_one(&f.diagonal_default)
        })
    }

    /// `π_α` of the body.
    pub fn window(&self, alpha: &[i64]) -> Result<IncMatrix> {
        self.body.project(alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QzReport {
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
    /// Generators of `GL_β(P)` lifted to some `G_S`.
    pub lifted_generators: usize,
    /// Every lift uses an `S` whose `N_1`-closure stays inside `α`.
    pub lifts_admissible: bool,
    pub generated_order: usize,
    pub target_order: u128,
    pub surjective: bool,
}

/// Checks that elements of the groups `G_S` (identity outside `S × S`) with
/// the convex hull of `∪_{s∈S} N_1(s)` inside `α` generate a subgroup whose
/// image under `π_β` is all of `GL_β(P)`.
pub fn qz_window_check(family: &ProsetFamily, alpha: &[i64], beta: &[i64], ring: CoeffRing) -> Result<QzReport> {
    if !ring.is_finite() {
        return Err(Error::HypothesisViolation("a finite coefficient ring is required".into()));
    }
    let alpha: Vec<i64> = alpha.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let beta: Vec<i64> = beta.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut n1: HashMap<i64, Vec<i64>> = HashMap::new();
    for &s in beta.iter().chain(&alpha) {
        n1.insert(s, family.neighborhood1(s)?);
    }
    for (name, set) in [("alpha", &alpha), ("beta", &beta)] {
        if !family.is_convex(set)? {
            return Err(Error::NotConvex(format!("{name} = {set:?}")));
        }
    }
    let alpha_p = family.materialize(&alpha)?;
    let pos_in = |set: &[i64], x: i64| set.binary_search(&x).ok();
    let admissible = |s: &[i64]| -> bool {
        let mut idx = Vec::new();
        for t in s {
            for u in &n1[t] {
                match pos_in(&alpha, *u) {
                    Some(i) => idx.push(i),
                    None => return false,
                }
            }
        }
        alpha_p.convex_closure(&idx).is_ok()
    };
    let beta_p = Arc::new(family.materialize(&beta)?);
    let gens = glgroup::generators(&beta_p, ring);
    let mut lifts_admissible = true;
    for g in &gens {
        // the support of a generator is one or two elements of β
        let support: BTreeSet<i64> =
            g.matrix().entries().filter(|&(i, j, v)| i != j || !ring.is_one(v)).flat_map(|(i, j, _)| [beta[i], beta[j]]).collect();
        let s: Vec<i64> = support.into_iter().collect();
        lifts_admissible &= admissible(&s);
    }
    // π_β of the lift is the generator itself; close up inside GL_β
    let one = IncMatrix::identity(&beta_p, ring);
    let mut seen: HashSet<IncMatrix> = HashSet::from([one.clone()]);
    let mut queue = VecDeque::from([one]);
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y = &x * g.matrix();
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    let target_order = glgroup::gl_order(&beta_p, ring).expect("finite ring");
    Ok(QzReport {
        alpha,
        beta,
        lifted_generators: gens.len(),
        lifts_admissible,
        generated_order: seen.len(),
        target_order,
        surjective: lifts_admissible && seen.len() as u128 == target_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n_window(k: i64) -> Vec<i64> {
        (0..=k).collect()
    }

    #[test]
    fn upper_ones_window() {
        let r = CoeffRing::Integer;
        let u = LazyMatrix::upper_ones(ProsetFamily::N, r);
        let w = u.project(&n_window(2)).unwrap();
        assert_eq!(w.nnz(), 6);
        assert!(w.entries().all(|(_, _, v)| r.is_one(v)));
        let big = u.project(&n_window(5)).unwrap();
        assert_eq!(restrict_window(&big, &n_window(5), &n_window(2)).unwrap(), w);
        assert!(matches!(u.project(&[0, 2]), Err(Error::NotConvex(_))));
    }

    #[test]
    fn finitary_support_outside_window() {
        let r = CoeffRing::Integer;
        let a = LazyMatrix::identity(ProsetFamily::N, r).add(&LazyMatrix::unit(ProsetFamily::N, r, 0, 1).unwrap()).unwrap();
        assert!(a.project(&[3, 4, 5]).unwrap().is_identity());
    }

    #[test]
    fn finitary_product_expansion() {
        let r = CoeffRing::Integer;
        let n = ProsetFamily::N;
        let one = LazyMatrix::identity(n.clone(), r);
        let e = |a, b| LazyMatrix::unit(n.clone(), r, a, b).unwrap();
        let lhs = one.add(&e(0, 1)).unwrap().mul(&one.add(&e(1, 2)).unwrap()).unwrap();
        let rhs = one.add(&e(0, 1)).unwrap().add(&e(1, 2)).unwrap().add(&e(0, 2)).unwrap();
        assert_eq!(lhs.finitary(), rhs.finitary());
    }

    #[test]
    fn oracle_product_matches_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = CoeffRing::PrimeField(5);
        for fam in [ProsetFamily::N, ProsetFamily::Zig, ProsetFamily::NStarDiv] {
            let windows = fam.windows(5).unwrap();
            let pool = windows[3].clone();
            for seed in 0..5 {
                let a = LazyMatrix::random_oracle(fam.clone(), r, seed);
                let b = random_finitary(&fam, r, &pool, 6, &mut rng);
                let ab = a.mul(&b).unwrap();
                let id = a.mul(&LazyMatrix::identity(fam.clone(), r)).unwrap();
                for w in &windows {
                    let pa = a.project(w).unwrap();
                    assert_eq!(ab.project(w).unwrap(), &pa * &b.project(w).unwrap());
                    assert_eq!(id.project(w).unwrap(), pa);
                }
            }
        }
    }

    #[test]
    fn inverses() {
        let z = CoeffRing::Integer;
        let n = ProsetFamily::N;
        let a = LazyMatrix::identity(n.clone(), z).add(&LazyMatrix::unit(n.clone(), z, 0, 1).unwrap()).unwrap();
        let inv = a.invert().unwrap();
        let expect = LazyMatrix::identity(n.clone(), z).add(&LazyMatrix::unit(n.clone(), z, 0, 1).unwrap().neg()).unwrap();
        assert_eq!(inv.finitary(), expect.finitary());

        let u = LazyMatrix::upper_ones(n.clone(), z).invert().unwrap();
        for s in 0..8 {
            for t in s..8 {
                let want = match t - s {
                    0 => z.one(),
                    1 => z.from_i64(-1),
                    _ => z.zero(),
                };
                assert_eq!(u.get(s, t).unwrap(), want);
            }
        }
        // window inversions stabilize once the window covers the coordinate
        let uo = LazyMatrix::upper_ones(n.clone(), z);
        for k in 2..7 {
            let winv = invert_matrix(&uo.project(&n_window(k)).unwrap()).unwrap();
            assert_eq!(winv, u.project(&n_window(k)).unwrap());
        }
    }

    #[test]
    fn finitary_inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let r = CoeffRing::PrimeField(5);
        for fam in [ProsetFamily::N, ProsetFamily::Zig, ProsetFamily::augment(ProsetFamily::Z, vec![vec![0, 3]]).unwrap()] {
            let windows = fam.windows(5).unwrap();
            for _ in 0..20 {
                let a = random_finitary_invertible(&fam, r, &windows[2], &mut rng).unwrap();
                let b = a.invert().unwrap();
                let ab = a.mul(&b).unwrap();
                let ba = b.mul(&a).unwrap();
                let one = LazyMatrix::identity(fam.clone(), r);
                assert_eq!(ab.finitary(), one.finitary());
                assert_eq!(ba.finitary(), one.finitary());
                // the oracle route gives the same coordinates
                let oracle = LazyMatrix::from_oracle(fam.clone(), r, {
                    let a = a.clone();
                    move |s, t| a.get(s, t)
                });
                assert!(oracle.invert().unwrap().agrees_on(&b, &windows).unwrap());
            }
        }
    }

    #[test]
    fn not_invertible() {
        let r = CoeffRing::Integer;
        let two = LazyMatrix::scalar(ProsetFamily::N, r, r.from_i64(2));
        assert!(matches!(two.invert(), Err(Error::NotInvertible(_))));
        let bad = LazyMatrix::from_oracle(ProsetFamily::N, r, move |s, t| Ok(if s == t && s == 3 { r.zero() } else { r.one() }));
        let inv = bad.invert().unwrap();
        assert!(inv.get(0, 2).is_ok());
        assert!(matches!(inv.get(2, 4), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn custom_budget_surfaces() {
        let fam = ProsetFamily::Custom(
            crate::proset::CustomFamily::new("wide", |a, b| a <= b, |a, b| Box::new(a..=b)).with_budget(10),
        );
        let r = CoeffRing::Integer;
        let u = LazyMatrix::upper_ones(fam.clone(), r);
        let sq = u.mul(&u).unwrap();
        assert_eq!(sq.get(0, 3).unwrap(), r.from_i64(4));
        assert_eq!(sq.get(0, 100), Err(Error::LocalFinitenessBudgetExceeded { budget: 10 }));
    }

    #[test]
    fn agl_products() {
        let r = CoeffRing::PrimeField(3);
        let n = ProsetFamily::N;
        // 0 and 1 swapped inside the class {0,1}
        let swap = Finitary::new(r, r.one(), [((0, 1), r.one()), ((1, 0), r.one())], [(0, r.zero()), (1, r.zero())]);
        let g = AglElement::new(n.clone(), vec![0, 1], swap, r).unwrap();
        let h = AglElement::new(
            n.clone(),
            vec![2, 3],
            Finitary::new(r, r.one(), [((3, 2), r.from_i64(2)), ((1, 3), r.one())], []),
            r,
        )
        .unwrap();
        let gh = g.mul(&h).unwrap();
        assert_eq!(gh.augmentation(), &[0, 1, 2, 3]);
        let w: Vec<i64> = (0..6).collect();
        let gw = g.embed(&[0, 1, 2, 3]).unwrap().window(&w).unwrap();
        let hw = h.embed(&[0, 1, 2, 3]).unwrap().window(&w).unwrap();
        assert_eq!(gh.window(&w).unwrap(), &gw * &hw);
        assert!(g.mul(&g.invert().unwrap()).unwrap().is_identity());
        let id = AglElement::identity(n.clone(), r);
        assert_eq!(id.mul(&g).unwrap(), g);
        let singular = Finitary::new(r, r.one(), [((0, 1), r.one()), ((1, 0), r.one())], []);
        assert!(matches!(AglElement::new(n, vec![0, 1], singular, r), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn qz_checks() {
        let f2 = CoeffRing::PrimeField(2);
        let alpha: Vec<i64> = (-4..=4).collect();
        let rep = qz_window_check(&ProsetFamily::Zig, &alpha, &[-1, 0, 1], f2).unwrap();
        assert!(rep.surjective);
        let f5 = CoeffRing::PrimeField(5);
        let rep = qz_window_check(&ProsetFamily::Zig, &alpha, &[0], f5).unwrap();
        assert!(rep.surjective && rep.target_order == 4);
        assert_eq!(
            qz_window_check(&ProsetFamily::NStarDiv, &[1, 2, 3, 6], &[1, 2], f2),
            Err(Error::InfiniteNeighborhood("1".into()))
        );
    }
}
