//! Idempotents of `M_Λ(P)` and recovery of the poset `Λ` from the ring alone.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Error, Result};
use crate::glgroup;
use crate::incidence::IncMatrix;
use crate::proset::Proset;
use crate::ring::{CoeffRing, RingValue};

/// Largest ring enumerated by exhaustive searches.
pub const EXHAUSTIVE_RING_LIMIT: u128 = 1 << 16;

fn require_boolean_ring(ring: CoeffRing) -> Result<()> {
    if ring.boolean_part().len() > 2 {
        return Err(Error::RingBooleanPartTooLarge);
    }
    Ok(())
}

/// `A^m = 0` for `m = |Λ|`. On a finite poset this is the zero-diagonal test.
pub fn is_topologically_nilpotent(a: &IncMatrix) -> Result<bool> {
    if !a.proset().is_poset() {
        return Err(Error::PosetRequired("nilpotence is not read off the diagonal of a proset".into()));
    }
    let by_power = a.pow(a.proset().len() as u64).is_zero();
    debug_assert_eq!(by_power, (0..a.proset().len()).all(|s| a.ring().is_zero(&a.get(s, s))));
    Ok(by_power)
}

fn check_idempotent(a: &IncMatrix) -> Result<()> {
    if &(a * a) != a {
        return Err(Error::NotIdempotent);
    }
    Ok(())
}

/// `b(A) = {s : A_{s,s} = 1}` for an idempotent `A`.
pub fn b_of(a: &IncMatrix) -> Result<BTreeSet<usize>> {
    require_boolean_ring(a.ring())?;
    check_idempotent(a)?;
    let r = a.ring();
    Ok((0..a.proset().len()).filter(|&s| r.is_one(&a.get(s, s))).collect())
}

/// `A^S`: `A ↦ A - A·1^{s}·A` for each `s ∈ S` in turn.
pub fn erase(a: &IncMatrix, set: &[usize]) -> Result<IncMatrix> {
    let b = b_of(a)?;
    let mut cur = a.clone();
    for &s in set {
        if !b.contains(&s) {
            return Err(Error::NotInDiagonalSupport(a.proset().name(s).into()));
        }
        let ind = IncMatrix::indicator(a.proset(), a.ring(), &[s]);
        cur = &cur - &(&(&cur * &ind) * &cur);
    }
    Ok(cur)
}

/// `A ≤ B` in the idempotent order: `AB = BA = A`.
pub fn idempotent_leq(a: &IncMatrix, b: &IncMatrix) -> bool {
    &(a * b) == a && &(b * a) == a
}

/// Same class: `b(A) = b(B)`, checked against nilpotence of `A - B`.
pub fn class_equiv(a: &IncMatrix, b: &IncMatrix) -> Result<bool> {
    let by_support = b_of(a)? == b_of(b)?;
    let by_nilpotence = is_topologically_nilpotent(&(a - b))?;
    if by_support != by_nilpotence {
        return Err(Error::HypothesisViolation("diagonal support and nilpotence disagree".into()));
    }
    Ok(by_support)
}

/// `[A] ≤ [B]` iff `b(A) ⊆ b(B)`.
pub fn class_leq(a: &IncMatrix, b: &IncMatrix) -> Result<bool> {
    Ok(b_of(a)?.is_subset(&b_of(b)?))
}

/// Every element of a finite `M_Λ(P)`.
pub fn enumerate_matrices(proset: &Arc<Proset>, ring: CoeffRing) -> Result<Vec<IncMatrix>> {
    let elems = ring.elements().ok_or_else(|| Error::InvalidRing("enumeration needs a finite ring".into()))?;
    let rels = proset.relations();
    let size = (elems.len() as u128).checked_pow(rels.len() as u32).unwrap_or(u128::MAX);
    if size > EXHAUSTIVE_RING_LIMIT {
        return Err(Error::SearchBudgetExceeded {
            budget: EXHAUSTIVE_RING_LIMIT as usize,
            detail: format!("ring has {size} elements"),
        });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut idx = vec![0usize; rels.len()];
    loop {
        let m = IncMatrix::from_entries(proset, ring, rels.iter().zip(&idx).map(|(&(s, t), &i)| (s, t, elems[i].clone())))?;
        out.push(m);
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] < elems.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn enumerate_idempotents(proset: &Arc<Proset>, ring: CoeffRing) -> Result<Vec<IncMatrix>> {
    Ok(enumerate_matrices(proset, ring)?.into_iter().filter(|a| &(a * a) == a).collect())
}

/// A finite ring given by structure constants over `Z/m` on a basis
/// `b_0, …, b_{d-1}`: `b_i b_j = Σ_k c_{ijk} b_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureConstants {
    pub modulus: u64,
    pub dim: usize,
    pub one: Vec<u64>,
    /// Nonzero `(i, j, k, c_{ijk})`.
    pub constants: Vec<(usize, usize, usize, u64)>,
    #[serde(skip)]
    table: Vec<Vec<(usize, u64)>>,
}

/// What recovery may do with a ring: arithmetic and zero tests on opaque
/// elements, plus enumeration or sampling.
pub trait RingAccess {
    type Elem: Clone + Eq + std::hash::Hash;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// Every element, or `None` above `limit`.
    fn elements(&self, limit: u128) -> Option<Vec<Self::Elem>>;
    fn random(&self, rng: &mut ChaCha8Rng) -> Self::Elem;
    /// An upper bound on the nilpotency index of nilpotent elements.
    fn nilpotency_bound(&self) -> usize;
    /// The coefficient ring has no idempotents besides 0 and 1.
    fn boolean_coefficients(&self) -> bool;
}

impl StructureConstants {
    pub fn new(modulus: u64, dim: usize, one: Vec<u64>, constants: Vec<(usize, usize, usize, u64)>) -> Result<Self> {
        if modulus < 2 || one.len() != dim {
            return Err(Error::Format("structure constants need modulus ≥ 2 and a unit of length dim".into()));
        }
        let mut table = vec![Vec::new(); dim * dim];
        for &(i, j, k, c) in &constants {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Format(format!("basis index out of range in ({i}, {j}, {k})")));
            }
            table[i * dim + j].push((k, c % modulus));
        }
        let sc = StructureConstants { modulus, dim, one, constants, table };
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = 1;
            if sc.mul(&sc.one, &e) != e || sc.mul(&e, &sc.one) != e {
                return Err(Error::Format("the given unit is not a two-sided identity".into()));
            }
        }
        Ok(sc)
    }

    /// The structure constants of `M_Λ(Z/m)` on the basis `e^(s,t)`.
    pub fn from_incidence(proset: &Proset, ring: CoeffRing) -> Result<Self> {
        let m = ring.modulus().ok_or_else(|| Error::InvalidRing("structure constants need a finite ring".into()))?;
        let rels = proset.relations();
        let pos: HashMap<(usize, usize), usize> = rels.iter().enumerate().map(|(k, &r)| (r, k)).collect();
        let mut constants = Vec::new();
        for (i, &(a, b)) in rels.iter().enumerate() {
            for (j, &(c, d)) in rels.iter().enumerate() {
                if b == c {
                    constants.push((i, j, pos[&(a, d)], 1));
                }
            }
        }
        let mut one = vec![0; rels.len()];
        for s in 0..proset.len() {
            one[pos[&(s, s)]] = 1;
        }
        Self::new(m, rels.len(), one, constants)
    }

    fn rebuild(&mut self) {
        let d = self.dim;
        self.table = vec![Vec::new(); d * d];
        for &(i, j, k, c) in &self.constants {
            self.table[i * d + j].push((k, c % self.modulus));
        }
    }

    /// Restores the multiplication table after deserialization.
    pub fn validated(mut self) -> Result<Self> {
        self.rebuild();
        Self::new(self.modulus, self.dim, self.one, self.constants)
    }
}

fn is_prime_power(m: u64) -> bool {
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            let mut x = m;
            while x % p == 0 {
                x /= p;
            }
            return x == 1;
        }
        p += 1;
    }
    m > 1
}

impl RingAccess for StructureConstants {
    type Elem = Vec<u64>;

    fn zero(&self) -> Vec<u64> {
        vec![0; self.dim]
    }

    fn one(&self) -> Vec<u64> {
        self.one.clone()
    }

    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.modulus).collect()
    }

    fn neg(&self, a: &Vec<u64>) -> Vec<u64> {
        a.iter().map(|x| (self.modulus - x) % self.modulus).collect()
    }

    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let m = self.modulus as u128;
        let mut out = vec![0u128; self.dim];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let xy = x as u128 * y as u128 % m;
                for &(k, c) in &self.table[i * self.dim + j] {
                    out[k] = (out[k] + xy * c as u128) % m;
                }
            }
        }
        out.into_iter().map(|v| v as u64).collect()
    }

    fn is_zero(&self, a: &Vec<u64>) -> bool {
        a.iter().all(|&x| x == 0)
    }

    fn elements(&self, limit: u128) -> Option<Vec<Vec<u64>>> {
        let size = (self.modulus as u128).checked_pow(self.dim as u32)?;
        if size > limit {
            return None;
        }
        let mut out = Vec::with_capacity(size as usize);
        let mut cur = vec![0u64; self.dim];
        loop {
            out.push(cur.clone());
            let mut k = 0;
            loop {
                if k == self.dim {
                    return Some(out);
                }
                cur[k] += 1;
                if cur[k] < self.modulus {
                    break;
                }
                cur[k] = 0;
                k += 1;
            }
        }
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Vec<u64> {
        (0..self.dim).map(|_| rng.gen_range(0..self.modulus)).collect()
    }

    fn nilpotency_bound(&self) -> usize {
        self.dim.max(1)
    }

    fn boolean_coefficients(&self) -> bool {
        is_prime_power(self.modulus)
    }
}

/// `M_Λ(P)` presented through the scrambling of [`scramble`]: the basis is
/// `U e^(π(s),π(t)) U⁻¹` pushed through a random invertible change of
/// coordinates `T`.
pub fn scramble(proset: &Proset, ring: CoeffRing, seed: u64) -> Result<StructureConstants> {
    let m = ring.modulus().ok_or_else(|| Error::InvalidRing("scrambling needs a finite ring".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..proset.len()).collect();
    perm.shuffle(&mut rng);
    let relabeled = Arc::new(Proset::from_fn(proset.names().to_vec(), |a, b| proset.leq(perm[a], perm[b]))?);
    let rels = relabeled.relations();
    let d = rels.len();
    let u = glgroup::random_invertible(&relabeled, ring, 1.0, &mut rng);
    let ui = u.invert();
    let conj: Vec<IncMatrix> = rels
        .iter()
        .map(|&(s, t)| &(u.matrix() * &IncMatrix::unit(&relabeled, ring, s, t).expect("related")) * ui.matrix())
        .collect();
    let t = loop {
        let t: dense::Dense = (0..d).map(|_| (0..d).map(|_| ring.random(&mut rng)).collect()).collect();
        if ring.is_unit(&dense::det(ring, &t)) {
            break t;
        }
    };
    // basis F_i = Σ_j T_ij·conj_j, as coordinate rows over e^(s,t)
    let coords = |x: &IncMatrix| -> Vec<RingValue> { rels.iter().map(|&(s, t)| x.get(s, t)).collect() };
    let basis: Vec<IncMatrix> = (0..d)
        .map(|i| {
            (0..d).fold(IncMatrix::zero(&relabeled, ring), |acc, j| &acc + &conj[j].scale(&t[i][j]))
        })
        .collect();
    let rows: dense::Dense = basis.iter().map(coords).collect();
    let rows_inv = dense::inverse(ring, &rows).expect("a change of basis");
    let express = |x: &IncMatrix| -> Vec<u64> {
        let c = coords(x);
        (0..d)
            .map(|k| {
                let v = (0..d).fold(ring.zero(), |acc, j| ring.add(&acc, &ring.mul(&c[j], &rows_inv[j][k])));
                residue(&v)
            })
            .collect()
    };
    let mut constants = Vec::new();
    for i in 0..d {
        for j in 0..d {
            for (k, c) in express(&(&basis[i] * &basis[j])).into_iter().enumerate() {
                if c != 0 {
                    constants.push((i, j, k, c));
                }
            }
        }
    }
    StructureConstants::new(m, d, express(&IncMatrix::identity(&relabeled, ring)), constants)
}

fn residue(v: &RingValue) -> u64 {
    match v {
        RingValue::Res(x) => *x,
        _ => unreachable!("finite ring values are residues"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMode {
    Exhaustive,
    Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recovered {
    #[serde(skip)]
    pub proset: Proset,
    pub mode: RecoveryMode,
    pub idempotents_seen: usize,
    pub classes: usize,
    pub nodes: Vec<String>,
    /// Strict relations between recovered nodes.
    pub relations: Vec<(String, String)>,
    pub ring_multiplications: usize,
}

struct Counted<'a, R: RingAccess> {
    ring: &'a R,
    muls: usize,
    budget: usize,
}

impl<'a, R: RingAccess> Counted<'a, R> {
    fn mul(&mut self, a: &R::Elem, b: &R::Elem) -> Result<R::Elem> {
        self.muls += 1;
        if self.muls > self.budget {
            return Err(Error::SearchBudgetExceeded {
                budget: self.budget,
                detail: "ring multiplications during recovery".into(),
            });
        }
        Ok(self.ring.mul(a, b))
    }

    fn is_idempotent(&mut self, a: &R::Elem) -> Result<bool> {
        Ok(self.mul(a, a)? == *a)
    }

    fn nilpotent(&mut self, a: &R::Elem) -> Result<bool> {
        let mut p = a.clone();
        let mut k = 1;
        while k < self.ring.nilpotency_bound() {
            if self.ring.is_zero(&p) {
                return Ok(true);
            }
            p = self.mul(&p, &p)?;
            k *= 2;
        }
        Ok(self.ring.is_zero(&p))
    }

    fn equivalent(&mut self, a: &R::Elem, b: &R::Elem) -> Result<bool> {
        let diff = self.ring.add(a, &self.ring.neg(b));
        self.nilpotent(&diff)
    }

    fn leq(&mut self, a: &R::Elem, b: &R::Elem) -> Result<bool> {
        Ok(self.mul(a, b)? == *a && self.mul(b, a)? == *a)
    }

    /// The idempotent in the cyclic semigroup of `x`.
    fn cycle(&mut self, x: &R::Elem) -> Result<R::Elem> {
        let mut seen: HashMap<R::Elem, usize> = HashMap::new();
        let mut powers = vec![x.clone()];
        seen.insert(x.clone(), 1);
        let (start, period) = loop {
            let next = self.mul(powers.last().expect("nonempty"), x)?;
            let k = powers.len() + 1;
            if let Some(&i) = seen.get(&next) {
                break (i, k - i);
            }
            seen.insert(next.clone(), k);
            powers.push(next);
        };
        let e = start.div_ceil(period) * period;
        Ok(powers[e - 1].clone())
    }
}

/// Groups idempotents into nilpotence classes and orders the classes.
struct ClassTable<E> {
    reps: Vec<E>,
    members: Vec<Vec<E>>,
    /// `below[i][j]`: some member of `j` lies under some member of `i`.
    below: Vec<Vec<bool>>,
}

impl<E: Clone + Eq> ClassTable<E> {
    fn new() -> Self {
        ClassTable { reps: Vec::new(), members: Vec::new(), below: Vec::new() }
    }

    fn classify<R: RingAccess<Elem = E>>(&mut self, c: &mut Counted<'_, R>, e: &E) -> Result<usize> {
        let mut hits = Vec::new();
        for (i, r) in self.reps.iter().enumerate() {
            if c.equivalent(e, r)? {
                hits.push(i);
            }
        }
        match hits.as_slice() {
            [] => {
                self.reps.push(e.clone());
                self.members.push(vec![e.clone()]);
                for row in &mut self.below {
                    row.push(false);
                }
                let n = self.reps.len();
                self.below.push(vec![false; n]);
                self.below[n - 1][n - 1] = true;
                Ok(n - 1)
            }
            [i] => {
                if !self.members[*i].contains(e) {
                    self.members[*i].push(e.clone());
                }
                Ok(*i)
            }
            _ => Err(Error::PosetRequired("nilpotence equivalence is not transitive".into())),
        }
    }
}

fn finish<E: Clone + Eq, R: RingAccess<Elem = E>>(
    c: &mut Counted<'_, R>,
    table: &ClassTable<E>,
    idempotents_seen: usize,
    mode: RecoveryMode,
    require_complete: bool,
) -> Result<Recovered> {
    let n = table.reps.len();
    let minimal = minimal_classes(c.ring, table);
    if minimal.is_empty() {
        return Err(Error::SearchBudgetExceeded { budget: c.budget, detail: "no nonzero idempotent class found".into() });
    }
    if minimal.len() >= usize::BITS as usize || (require_complete && n != 1 << minimal.len()) {
        return Err(Error::PosetRequired(format!("{n} idempotent classes over {} minimal ones", minimal.len())));
    }
    let k = minimal.len();
    let mut rel = vec![vec![false; k]; k];
    for (a, &ca) in minimal.iter().enumerate() {
        rel[a][a] = true;
        for (b, &cb) in minimal.iter().enumerate() {
            if a == b {
                continue;
            }
            'search: for x in &table.members[ca] {
                for y in &table.members[cb] {
                    if !c.ring.is_zero(&c.mul(x, y)?) {
                        rel[a][b] = true;
                        break 'search;
                    }
                }
            }
        }
    }
    let names: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
    let proset = Proset::from_fn(names.clone(), |a, b| rel[a][b])?;
    if !proset.is_poset() || (0..k).any(|a| (0..k).any(|b| proset.leq(a, b) != rel[a][b])) {
        return Err(Error::PosetRequired("recovered relation is not a partial order".into()));
    }
    let relations = proset
        .relations()
        .into_iter()
        .filter(|(a, b)| a != b)
        .map(|(a, b)| (names[a].clone(), names[b].clone()))
        .collect();
    Ok(Recovered {
        proset,
        mode,
        idempotents_seen,
        classes: n,
        nodes: names,
        relations,
        ring_multiplications: c.muls,
    })
}

/// Recovers `Λ` from an enumerable ring: all idempotents, their classes, the
/// minimal nonzero classes as nodes, and `c1 ⪯ c2` iff some `AB ≠ 0`.
pub fn recover_exhaustive<R: RingAccess>(ring: &R, budget: usize) -> Result<Recovered> {
    if !ring.boolean_coefficients() {
        return Err(Error::RingBooleanPartTooLarge);
    }
    let elems = ring.elements(EXHAUSTIVE_RING_LIMIT).ok_or_else(|| Error::SearchBudgetExceeded {
        budget: EXHAUSTIVE_RING_LIMIT as usize,
        detail: "ring too large to enumerate".into(),
    })?;
    let mut c = Counted { ring, muls: 0, budget };
    let mut idem = Vec::new();
    for e in elems {
        if c.is_idempotent(&e)? {
            idem.push(e);
        }
    }
    let mut table = ClassTable::new();
    let mut class_of = Vec::with_capacity(idem.len());
    for e in &idem {
        class_of.push(table.classify(&mut c, e)?);
    }
    for (i, a) in idem.iter().enumerate() {
        for (j, b) in idem.iter().enumerate() {
            if class_of[i] != class_of[j] && !table.below[class_of[i]][class_of[j]] && c.leq(b, a)? {
                table.below[class_of[i]][class_of[j]] = true;
            }
        }
    }
    finish(&mut c, &table, idem.len(), RecoveryMode::Exhaustive, true)
}

/// Recovers `Λ` by sampling: idempotent powers of random elements realize
/// the classes, `[f] ≤ [e]` is read off from `(efe)^ω ~ f`, and conjugates
/// by units `1 + e·y·(1-e)` realize the product witnesses. Sampling stops
/// once the classes form the full lattice over the minimal ones and no new
/// class has turned up for a while.
pub fn recover_witness<R: RingAccess>(ring: &R, budget: usize, seed: u64) -> Result<Recovered> {
    if !ring.boolean_coefficients() {
        return Err(Error::RingBooleanPartTooLarge);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Counted { ring, muls: 0, budget };
    let mut table = ClassTable::new();
    let mut seen = 0usize;
    let max_rounds = 64 * ring.nilpotency_bound();
    let patience = 32;
    let mut quiet = 0;
    for _ in 0..max_rounds {
        let x = ring.random(&mut rng);
        let e = c.cycle(&x)?;
        seen += 1;
        let before = table.reps.len();
        let ci = table.classify(&mut c, &e)?;
        if table.reps.len() == before {
            quiet += 1;
            let atoms = minimal_classes(ring, &table).len();
            if quiet >= patience && atoms < usize::BITS as usize && table.reps.len() == 1 << atoms {
                break;
            }
            continue;
        }
        quiet = 0;
        for cj in 0..table.reps.len() {
            if cj == ci {
                continue;
            }
            let (a, b) = (table.reps[ci].clone(), table.reps[cj].clone());
            if class_below(&mut c, &a, &b)? {
                table.below[ci][cj] = true;
            }
            if class_below(&mut c, &b, &a)? {
                table.below[cj][ci] = true;
            }
        }
    }
    let reps = table.reps.clone();
    for &i in &minimal_classes(ring, &table) {
        for _ in 0..24 {
            let (u1, v1) = elementary_unit(&mut c, &reps, &mut rng)?;
            let (u2, v2) = elementary_unit(&mut c, &reps, &mut rng)?;
            let u = c.mul(&u1, &u2)?;
            let u_inv = c.mul(&v2, &v1)?;
            let ur = c.mul(&u, &reps[i])?;
            let conj = c.mul(&ur, &u_inv)?;
            if !table.members[i].contains(&conj) {
                table.members[i].push(conj);
            }
        }
    }
    finish(&mut c, &table, seen, RecoveryMode::Witness, false)
}

/// `1 + w` and its inverse `1 - w` for `w = e·y·(1-e)` or `(1-e)·y·e`, which
/// squares to zero.
fn elementary_unit<R: RingAccess>(
    c: &mut Counted<'_, R>,
    idempotents: &[R::Elem],
    rng: &mut ChaCha8Rng,
) -> Result<(R::Elem, R::Elem)> {
    let ring = c.ring;
    let one = ring.one();
    let e = idempotents.choose(rng).expect("a class was found").clone();
    let y = ring.random(rng);
    let not_e = ring.add(&one, &ring.neg(&e));
    let w = if rng.gen_bool(0.5) {
        let ey = c.mul(&e, &y)?;
        c.mul(&ey, &not_e)?
    } else {
        let ny = c.mul(&not_e, &y)?;
        c.mul(&ny, &e)?
    };
    Ok((ring.add(&one, &w), ring.add(&one, &ring.neg(&w))))
}

/// `[b] ≤ [a]`: the meet `(aba)^ω` is equivalent to `b`.
fn class_below<R: RingAccess>(c: &mut Counted<'_, R>, a: &R::Elem, b: &R::Elem) -> Result<bool> {
    let ab = c.mul(a, b)?;
    let aba = c.mul(&ab, a)?;
    let meet = c.cycle(&aba)?;
    c.equivalent(&meet, b)
}

fn minimal_classes<E: Clone + Eq, R: RingAccess<Elem = E>>(ring: &R, table: &ClassTable<E>) -> Vec<usize> {
    let n = table.reps.len();
    let zero = (0..n).find(|&i| ring.is_zero(&table.reps[i]));
    (0..n)
        .filter(|&i| Some(i) != zero && (0..n).all(|j| j == i || Some(j) == zero || !table.below[i][j]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proset::posets_up_to_iso;

    fn chain(n: usize) -> Arc<Proset> {
        Arc::new(Proset::chain(n))
    }

    #[test]
    fn nilpotence() {
        let p = chain(2);
        let f2 = CoeffRing::PrimeField(2);
        assert!(is_topologically_nilpotent(&IncMatrix::unit(&p, f2, 0, 1).unwrap()).unwrap());
        assert!(!is_topologically_nilpotent(&IncMatrix::identity(&p, f2)).unwrap());
        for a in enumerate_matrices(&p, f2).unwrap() {
            let zero_diag = f2.is_zero(&a.get(0, 0)) && f2.is_zero(&a.get(1, 1));
            assert_eq!(is_topologically_nilpotent(&a).unwrap(), zero_diag);
        }
        let full = Arc::new(Proset::full(2));
        assert!(matches!(is_topologically_nilpotent(&IncMatrix::zero(&full, f2)), Err(Error::PosetRequired(_))));
    }

    #[test]
    fn diagonal_support() {
        let p = chain(3);
        let f2 = CoeffRing::PrimeField(2);
        assert_eq!(b_of(&IncMatrix::indicator(&p, f2, &[0, 2])).unwrap(), BTreeSet::from([0, 2]));
        assert!(b_of(&IncMatrix::zero(&p, f2)).unwrap().is_empty());
        let z6 = CoeffRing::ModN(6);
        assert_eq!(b_of(&IncMatrix::identity(&p, z6)), Err(Error::RingBooleanPartTooLarge));
        assert_eq!(b_of(&IncMatrix::unit(&p, f2, 0, 1).unwrap()), Err(Error::NotIdempotent));
        for a in enumerate_idempotents(&chain(2), f2).unwrap() {
            assert_eq!(b_of(&a).unwrap().is_empty(), a.is_zero());
        }
    }

    #[test]
    fn erasing() {
        let p = chain(3);
        let f2 = CoeffRing::PrimeField(2);
        let a = IncMatrix::from_entries(&p, f2, [(1, 1, f2.one()), (0, 1, f2.one()), (1, 2, f2.one()), (0, 2, f2.one())]).unwrap();
        assert_eq!(b_of(&a).unwrap(), BTreeSet::from([1]));
        assert!(erase(&a, &[1]).unwrap().is_zero());
        assert_eq!(erase(&a, &[]).unwrap(), a);
        assert_eq!(erase(&a, &[0]), Err(Error::NotInDiagonalSupport("0".into())));
        for a in enumerate_idempotents(&p, f2).unwrap() {
            let b: Vec<usize> = b_of(&a).unwrap().into_iter().collect();
            for i in 0..b.len() {
                for j in i + 1..b.len() {
                    assert_eq!(erase(&a, &[b[i], b[j]]).unwrap(), erase(&a, &[b[j], b[i]]).unwrap());
                }
            }
        }
    }

    #[test]
    fn classes_of_two_chain() {
        let p = chain(2);
        let f2 = CoeffRing::PrimeField(2);
        let a = IncMatrix::from_entries(&p, f2, [(0, 0, f2.one()), (0, 1, f2.one())]).unwrap();
        let e = IncMatrix::indicator(&p, f2, &[0]);
        assert!(class_equiv(&a, &e).unwrap());
        assert!(class_equiv(&a, &a).unwrap());
        let idem = enumerate_idempotents(&p, f2).unwrap();
        let supports: BTreeSet<BTreeSet<usize>> = idem.iter().map(|a| b_of(a).unwrap()).collect();
        assert_eq!(supports.len(), 4);
    }

    #[test]
    fn structure_constants_are_the_ring() {
        let p = Proset::new(vec!["a".into(), "b".into(), "c".into()], &[(0, 1), (0, 2)]).unwrap();
        let f3 = CoeffRing::PrimeField(3);
        let sc = StructureConstants::from_incidence(&p, f3).unwrap();
        let x = sc.elements(1 << 20).unwrap();
        assert_eq!(x.len(), 3usize.pow(5));
        let one = sc.one();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let a = sc.random(&mut rng);
            let b = sc.random(&mut rng);
            let c = sc.random(&mut rng);
            assert_eq!(sc.mul(&sc.mul(&a, &b), &c), sc.mul(&a, &sc.mul(&b, &c)));
            assert_eq!(sc.mul(&a, &one), a);
        }
        let scr = scramble(&p, f3, 5).unwrap();
        for _ in 0..200 {
            let a = scr.random(&mut rng);
            let b = scr.random(&mut rng);
            let c = scr.random(&mut rng);
            assert_eq!(scr.mul(&scr.mul(&a, &b), &c), scr.mul(&a, &scr.mul(&b, &c)));
            assert_eq!(scr.mul(&scr.one(), &a), a);
        }
    }

    #[test]
    fn exhaustive_recovery() {
        let f2 = CoeffRing::PrimeField(2);
        let rec = recover_exhaustive(&StructureConstants::from_incidence(&Proset::chain(2), f2).unwrap(), usize::MAX).unwrap();
        assert!(rec.proset.poset_isomorphic(&Proset::chain(2)).is_some());
        let rec = recover_exhaustive(&StructureConstants::from_incidence(&Proset::discrete(2), f2).unwrap(), usize::MAX).unwrap();
        assert!(rec.proset.poset_isomorphic(&Proset::discrete(2)).is_some());
        for p in posets_up_to_iso(3) {
            for seed in 0..3 {
                let sc = scramble(&p, f2, seed).unwrap();
                let rec = recover_exhaustive(&sc, usize::MAX).unwrap();
                assert!(rec.proset.poset_isomorphic(&p).is_some(), "{p:?}");
            }
        }
    }

    #[test]
    fn witness_recovery() {
        let f2 = CoeffRing::PrimeField(2);
        for p in posets_up_to_iso(3) {
            let sc = scramble(&p, f2, 9).unwrap();
            let rec = recover_witness(&sc, 100_000, 1).unwrap();
            assert!(rec.proset.poset_isomorphic(&p).is_some(), "{p:?}");
        }
    }

    #[test]
    fn refusals() {
        let f2 = CoeffRing::PrimeField(2);
        let full = StructureConstants::from_incidence(&Proset::full(2), f2).unwrap();
        assert!(matches!(recover_exhaustive(&full, usize::MAX), Err(Error::PosetRequired(_))));
        let z6 = StructureConstants::from_incidence(&Proset::chain(2), CoeffRing::ModN(6)).unwrap();
        assert_eq!(recover_exhaustive(&z6, usize::MAX), Err(Error::RingBooleanPartTooLarge));
        let sc = StructureConstants::from_incidence(&Proset::chain(3), f2).unwrap();
        assert!(matches!(recover_witness(&sc, 10, 0), Err(Error::SearchBudgetExceeded { .. })));
    }
}
