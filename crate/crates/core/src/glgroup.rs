//! The unit group `GL_Λ(P)` of a finite incidence ring.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dense::{self, Dense};
use crate::error::{Error, Result};
use crate::incidence::{IdealSpec, IncMatrix};
use crate::proset::Proset;
use crate::ring::{CoeffRing, RingValue};

/// Largest group handled by enumeration.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000;

/// An element of `GL_Λ(P)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    matrix: IncMatrix,
    certified: bool,
}

fn block(a: &IncMatrix, rows: &[usize], cols: &[usize]) -> Dense {
    rows.iter().map(|&r| cols.iter().map(|&c| a.get(r, c)).collect()).collect()
}

/// True iff every class-diagonal block has unit determinant.
pub fn is_invertible(a: &IncMatrix) -> bool {
    let r = a.ring();
    a.proset().classes().iter().all(|c| r.is_unit(&dense::det(r, &block(a, c, c))))
}

/// The inverse by class-block back-substitution along a linear extension of
/// the class order:
/// `B[c1,c2] = -D1⁻¹ · Σ_{c1 < c ≤ c2} A[c1,c]·B[c,c2]`.
pub fn invert_matrix(a: &IncMatrix) -> Result<IncMatrix> {
    let p = a.proset();
    let r = a.ring();
    let classes = p.classes();
    let mut diag_inv = Vec::with_capacity(classes.len());
    for c in classes {
        match dense::inverse(r, &block(a, c, c)) {
            Some(inv) => diag_inv.push(inv),
            None => return Err(Error::NotInvertible(format!("diagonal block at {}", p.name(c[0])))),
        }
    }
    let order = p.class_linear_extension();
    let k = classes.len();
    let mut blocks: Vec<Vec<Option<Dense>>> = vec![vec![None; k]; k];
    for (j, &c2) in order.iter().enumerate() {
        blocks[c2][c2] = Some(diag_inv[c2].clone());
        for &c1 in order[..j].iter().rev() {
            if !p.class_leq(c1, c2) {
                continue;
            }
            let mut acc: Dense = vec![vec![r.zero(); classes[c2].len()]; classes[c1].len()];
            for &c in &order {
                if c == c1 || !p.class_leq(c1, c) || !p.class_leq(c, c2) {
                    continue;
                }
                let b = blocks[c][c2].as_ref().expect("later classes are solved first");
                let prod = dense::mul(r, &block(a, &classes[c1], &classes[c]), b);
                for (row, prow) in acc.iter_mut().zip(prod) {
                    for (x, y) in row.iter_mut().zip(prow) {
                        *x = r.add(x, &y);
                    }
                }
            }
            let solved = dense::mul(r, &diag_inv[c1], &acc);
            blocks[c1][c2] = Some(solved.into_iter().map(|row| row.iter().map(|v| r.neg(v)).collect()).collect());
        }
    }
    let mut out = IncMatrix::zero(p, r);
    for c1 in 0..k {
        for c2 in 0..k {
            if let Some(b) = &blocks[c1][c2] {
                for (i, &s) in classes[c1].iter().enumerate() {
                    for (j, &t) in classes[c2].iter().enumerate() {
                        out.set(s, t, b[i][j].clone()).expect("supported on the order");
                    }
                }
            }
        }
    }
    Ok(out)
}

impl GroupElement {
    pub fn new(matrix: IncMatrix) -> Result<Self> {
        if !is_invertible(&matrix) {
            return Err(Error::NotInvertible("a class-diagonal block has non-unit determinant".into()));
        }
        Ok(GroupElement { matrix, certified: true })
    }

    pub fn identity(proset: &Arc<Proset>, ring: CoeffRing) -> Self {
        GroupElement { matrix: IncMatrix::identity(proset, ring), certified: true }
    }

    pub fn matrix(&self) -> &IncMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> IncMatrix {
        self.matrix
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        Ok(GroupElement { matrix: self.matrix.try_mul(&other.matrix)?, certified: true })
    }

    pub fn invert(&self) -> GroupElement {
        let matrix = invert_matrix(&self.matrix).expect("certified elements are invertible");
        GroupElement { matrix, certified: true }
    }

    /// `[A,B] = A B A⁻¹ B⁻¹`.
    pub fn commutator(&self, other: &GroupElement) -> Result<GroupElement> {
        self.mul(other)?.mul(&self.invert())?.mul(&other.invert())
    }

    pub fn conjugate_by(&self, g: &GroupElement) -> Result<GroupElement> {
        g.mul(self)?.mul(&g.invert())
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    /// Membership in `N_Λ'` (and its interval and locally convex variants):
    /// `A - 1` lies in the matching ideal.
    pub fn normal_subgroup_membership(&self, spec: &IdealSpec) -> Result<bool> {
        let one = IncMatrix::identity(self.matrix.proset(), self.matrix.ring());
        (&self.matrix - &one).ideal_membership(spec)
    }

    /// The image in `GL_Λ'(P)` for a convex `Λ'`.
    pub fn quotient_project(&self, subset: &[usize]) -> Result<GroupElement> {
        Ok(GroupElement { matrix: self.matrix.project(subset)?, certified: true })
    }

    /// `A ↦ (A⁻¹)ᵀ`, an isomorphism `GL_Λ(P) → GL_Λop(P)`. `op` must carry
    /// the opposite order.
    pub fn transpose_op_iso(&self, op: &Arc<Proset>) -> Result<GroupElement> {
        Ok(GroupElement { matrix: self.invert().matrix.transpose_onto(op)?, certified: true })
    }
}

fn random_block<R: Rng + ?Sized>(ring: CoeffRing, n: usize, rng: &mut R) -> Dense {
    if ring.is_finite() {
        loop {
            let b: Dense = (0..n).map(|_| (0..n).map(|_| ring.random(rng)).collect()).collect();
            if ring.is_unit(&dense::det(ring, &b)) {
                return b;
            }
        }
    }
    // L·D·U with unit triangular factors keeps the determinant a unit
    let tri = |upper: bool, rng: &mut R| -> Dense {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match i.cmp(&j) {
                        std::cmp::Ordering::Equal => ring.one(),
                        std::cmp::Ordering::Less if upper => ring.random(rng),
                        std::cmp::Ordering::Greater if !upper => ring.random(rng),
                        _ => ring.zero(),
                    })
                    .collect()
            })
            .collect()
    };
    let l = tri(false, rng);
    let u = tri(true, rng);
    let d: Dense = (0..n)
        .map(|i| (0..n).map(|j| if i == j { ring.random_unit(rng) } else { ring.zero() }).collect())
        .collect();
    dense::mul(ring, &dense::mul(ring, &l, &d), &u)
}

/// A random unit; off-class entries are filled with probability `density`.
pub fn random_invertible<R: Rng + ?Sized>(
    proset: &Arc<Proset>,
    ring: CoeffRing,
    density: f64,
    rng: &mut R,
) -> GroupElement {
    let mut m = IncMatrix::zero(proset, ring);
    for c in proset.classes() {
        let b = random_block(ring, c.len(), rng);
        for (i, &s) in c.iter().enumerate() {
            for (j, &t) in c.iter().enumerate() {
                m.set(s, t, b[i][j].clone()).expect("same class");
            }
        }
    }
    for (s, t) in proset.relations() {
        if proset.class_of(s) != proset.class_of(t) && rng.gen_bool(density) {
            m.set(s, t, ring.random(rng)).expect("related pair");
        }
    }
    GroupElement { matrix: m, certified: true }
}

/// Units whose commutation with an element decides commutation with every
/// diagonal unit.
fn diagonal_unit_values(ring: CoeffRing) -> Vec<RingValue> {
    match ring {
        CoeffRing::Integer => vec![ring.from_i64(-1)],
        CoeffRing::Rational => vec![ring.from_i64(2)],
        _ => ring.units().expect("finite ring").into_iter().filter(|u| !ring.is_one(u)).collect(),
    }
}

/// A generating set of `GL_Λ(P)`: the transvections `1 + e^(s,t)`, `s ≠ t`,
/// and the diagonal units `1 + (u-1)·1^{s}`. Over `Q` the diagonal part only
/// contains `u = 2`, which suffices for commutation tests but does not
/// generate.
pub fn generators(proset: &Arc<Proset>, ring: CoeffRing) -> Vec<GroupElement> {
    let one = IncMatrix::identity(proset, ring);
    let mut out = Vec::new();
    for (s, t) in proset.relations() {
        if s != t {
            let e = IncMatrix::unit(proset, ring, s, t).expect("related pair");
            out.push(GroupElement { matrix: &one + &e, certified: true });
        }
    }
    for u in diagonal_unit_values(ring) {
        let shift = ring.sub(&u, &ring.one());
        for s in 0..proset.len() {
            let d = IncMatrix::indicator(proset, ring, &[s]).scale(&shift);
            out.push(GroupElement { matrix: &one + &d, certified: true });
        }
    }
    out
}

fn prime_powers(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut k = 0;
        while n % p == 0 {
            n /= p;
            k += 1;
        }
        if k > 0 {
            out.push((p, k));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `|GL_n(Z/m)|`, or `None` on overflow.
pub fn gl_n_order(n: usize, m: u64) -> Option<u128> {
    let mut total: u128 = 1;
    for (p, k) in prime_powers(m) {
        let p = p as u128;
        let pn = p.checked_pow(n as u32)?;
        for i in 0..n {
            total = total.checked_mul(pn - p.pow(i as u32))?;
        }
        total = total.checked_mul(p.checked_pow((k - 1) * (n * n) as u32)?)?;
    }
    Some(total)
}

/// `|GL_Λ(P)|` for a finite ring: the class blocks times the free off-class
/// entries.
pub fn gl_order(proset: &Proset, ring: CoeffRing) -> Option<u128> {
    let m = ring.modulus()?;
    let mut total: u128 = 1;
    for c in proset.classes() {
        total = total.checked_mul(gl_n_order(c.len(), m)?)?;
    }
    let free = proset.relations().iter().filter(|&&(s, t)| proset.class_of(s) != proset.class_of(t)).count();
    total.checked_mul((m as u128).checked_pow(free as u32)?)
}

/// Every element of `GL_Λ(P)`, when the group has at most `limit` elements.
pub fn enumerate_gl(proset: &Arc<Proset>, ring: CoeffRing, limit: u128) -> Result<Vec<GroupElement>> {
    let order = gl_order(proset, ring).ok_or_else(|| Error::SearchBudgetExceeded {
        budget: limit as usize,
        detail: "group is infinite or too large to count".into(),
    })?;
    if order > limit {
        return Err(Error::SearchBudgetExceeded { budget: limit as usize, detail: format!("|GL| = {order}") });
    }
    let elems = ring.elements().expect("finite ring");
    // every class block independently, then the free coordinates
    let mut block_choices: Vec<Vec<Dense>> = Vec::new();
    for c in proset.classes() {
        let n = c.len();
        let mut found = Vec::new();
        let mut idx = vec![0usize; n * n];
        loop {
            let b: Dense = (0..n).map(|i| (0..n).map(|j| elems[idx[i * n + j]].clone()).collect()).collect();
            if ring.is_unit(&dense::det(ring, &b)) {
                found.push(b);
            }
            if !odometer(&mut idx, elems.len()) {
                break;
            }
        }
        block_choices.push(found);
    }
    let free: Vec<(usize, usize)> =
        proset.relations().into_iter().filter(|&(s, t)| proset.class_of(s) != proset.class_of(t)).collect();
    let mut out = Vec::with_capacity(order as usize);
    let mut bidx = vec![0usize; block_choices.len()];
    loop {
        let mut base = IncMatrix::zero(proset, ring);
        for (ci, c) in proset.classes().iter().enumerate() {
            let b = &block_choices[ci][bidx[ci]];
            for (i, &s) in c.iter().enumerate() {
                for (j, &t) in c.iter().enumerate() {
                    base.set(s, t, b[i][j].clone()).expect("same class");
                }
            }
        }
        let mut fidx = vec![0usize; free.len()];
        loop {
            let mut m = base.clone();
            for (k, &(s, t)) in free.iter().enumerate() {
                m.set(s, t, elems[fidx[k]].clone()).expect("related pair");
            }
            out.push(GroupElement { matrix: m, certified: true });
            if !odometer(&mut fidx, elems.len()) {
                break;
            }
        }
        let radices: Vec<usize> = block_choices.iter().map(Vec::len).collect();
        if !odometer_mixed(&mut bidx, &radices) {
            break;
        }
    }
    debug_assert_eq!(out.len() as u128, order);
    Ok(out)
}

fn odometer(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn odometer_mixed(idx: &mut [usize], radices: &[usize]) -> bool {
    for (d, &r) in idx.iter_mut().zip(radices) {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralityMethod {
    /// Compared against every element of the group.
    Exhaustive,
    /// Compared against a generating set.
    Generators,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityVerdict {
    pub central: bool,
    pub method: CentralityMethod,
    /// Whether `A` is a scalar unit matrix.
    pub scalar: bool,
    /// Irreducible proset and a ring with a unit pair.
    pub hypothesis_holds: bool,
    /// The scalar test disagrees with the computed answer; only possible when
    /// the hypothesis fails.
    pub hypothesis_failure: bool,
    /// A ring element among `1^{s}` and `1 + e^(s,t)` that does not commute with `A`.
    #[serde(skip)]
    pub witness: Option<IncMatrix>,
}

fn is_scalar_unit(a: &IncMatrix) -> bool {
    let r = a.ring();
    let d = a.get(0, 0);
    a.nnz() == a.proset().len()
        && r.is_unit(&d)
        && a.entries().all(|(s, t, v)| s == t && *v == d)
}

fn commutes(a: &IncMatrix, b: &IncMatrix) -> bool {
    &(a * b) == &(b * a)
}

/// Whether `A` lies in the center of `GL_Λ(P)`.
pub fn is_central(a: &GroupElement) -> CentralityVerdict {
    let m = a.matrix();
    let p = m.proset();
    let r = m.ring();
    let one = IncMatrix::identity(p, r);
    let ring_probes = (0..p.len()).map(|s| IncMatrix::indicator(p, r, &[s])).chain(
        p.relations()
            .into_iter()
            .filter(|(s, t)| s != t)
            .map(|(s, t)| &one + &IncMatrix::unit(p, r, s, t).expect("related pair")),
    );
    let witness = ring_probes.into_iter().find(|x| !commutes(m, x));
    let (central, method) = match enumerate_gl(p, r, EXHAUSTIVE_LIMIT) {
        Ok(all) => (all.iter().all(|g| commutes(m, g.matrix())), CentralityMethod::Exhaustive),
        Err(_) => (generators(p, r).iter().all(|g| commutes(m, g.matrix())), CentralityMethod::Generators),
    };
    let scalar = is_scalar_unit(m);
    let hypothesis_holds = p.is_irreducible() && r.has_unit_pair();
    CentralityVerdict {
        central,
        method,
        scalar,
        hypothesis_holds,
        hypothesis_failure: scalar != central,
        witness,
    }
}

/// The center of `GL_Λ(P)` for a finite ring: by enumeration for small
/// groups, otherwise (over a prime field) as the units in the common
/// centralizer of the generators, a linear subspace.
pub fn center(proset: &Arc<Proset>, ring: CoeffRing) -> Result<Vec<GroupElement>> {
    let gens = generators(proset, ring);
    if let Ok(all) = enumerate_gl(proset, ring, EXHAUSTIVE_LIMIT) {
        return Ok(all.into_iter().filter(|a| gens.iter().all(|g| commutes(a.matrix(), g.matrix()))).collect());
    }
    centralizer_units(proset, ring, &gens)
}

fn centralizer_units(proset: &Arc<Proset>, ring: CoeffRing, gens: &[GroupElement]) -> Result<Vec<GroupElement>> {
    let p = match ring.modulus() {
        Some(p) if ring.is_field() => p,
        _ => {
            return Err(Error::SearchBudgetExceeded {
                budget: EXHAUSTIVE_LIMIT as usize,
                detail: "center needs enumeration or a prime field".into(),
            })
        }
    };
    let rels = proset.relations();
    let pos = |s: usize, t: usize| rels.binary_search(&(s, t)).ok();
    let res = |v: &RingValue| match v {
        RingValue::Res(x) => *x,
        _ => unreachable!("finite ring values are residues"),
    };
    // (X g - g X)_{s,t} = Σ_u X_{s,u} g_{u,t} - g_{s,u} X_{u,t}
    let mut rows = Vec::new();
    for g in gens {
        let gm = g.matrix();
        for &(s, t) in &rels {
            let mut row = vec![0u64; rels.len()];
            for u in proset.interval(s, t) {
                let gut = res(&gm.get(u, t));
                if let Some(k) = pos(s, u) {
                    row[k] = (row[k] + gut) % p;
                }
                let gsu = res(&gm.get(s, u));
                if let Some(k) = pos(u, t) {
                    row[k] = (row[k] + p - gsu) % p;
                }
            }
            if row.iter().any(|&v| v != 0) {
                rows.push(row);
            }
        }
    }
    let basis = dense::kernel_mod_p(rows, rels.len(), p);
    let count = (p as u128).checked_pow(basis.len() as u32).unwrap_or(u128::MAX);
    if count > 1_000_000 {
        return Err(Error::SearchBudgetExceeded { budget: 1_000_000, detail: format!("centralizer has {count} elements") });
    }
    let mut coeffs = vec![0usize; basis.len()];
    let mut out = Vec::new();
    loop {
        let mut m = IncMatrix::zero(proset, ring);
        for (k, &(s, t)) in rels.iter().enumerate() {
            let v = basis.iter().zip(&coeffs).fold(0u64, |acc, (b, &c)| (acc + b[k] * c as u64) % p);
            m.set(s, t, RingValue::Res(v)).expect("related pair");
        }
        if is_invertible(&m) {
            out.push(GroupElement { matrix: m, certified: true });
        }
        if !odometer(&mut coeffs, p as usize) {
            break;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub depth: usize,
    pub trials: usize,
    /// Every sample is `1` on all coordinates `(s,t)` with `|[s,t]| ≤ depth`.
    pub pattern_holds: bool,
    pub violations: usize,
    /// Whether the proset is `depth`-bounded, so that samples must be `1`.
    pub bounded: bool,
    pub all_identity: bool,
}

/// A depth-`k` iterated commutator: depth 0 is a random unit, depth `k+1`
/// is the commutator of two independent depth-`k` samples.
pub fn iterated_commutator<R: Rng + ?Sized>(
    proset: &Arc<Proset>,
    ring: CoeffRing,
    depth: usize,
    rng: &mut R,
) -> GroupElement {
    if depth == 0 {
        return random_invertible(proset, ring, 0.8, rng);
    }
    let a = iterated_commutator(proset, ring, depth - 1, rng);
    let b = iterated_commutator(proset, ring, depth - 1, rng);
    a.commutator(&b).expect("same group")
}

/// Samples depth-`k` commutators and checks they are identity-patterned on
/// intervals with at most `k` elements.
pub fn iterated_commutator_sample(
    proset: &Arc<Proset>,
    ring: CoeffRing,
    depth: usize,
    trials: usize,
    seed: u64,
) -> Result<CommutatorReport> {
    if !proset.is_poset() {
        return Err(Error::PosetRequired("commutator vanishing needs a partial order".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let short: Vec<(usize, usize)> =
        proset.relations().into_iter().filter(|&(s, t)| proset.interval(s, t).len() <= depth).collect();
    let mut violations = 0;
    let mut all_identity = true;
    for _ in 0..trials {
        let c = iterated_commutator(proset, ring, depth, &mut rng);
        let m = c.matrix();
        let ok = short.iter().all(|&(s, t)| {
            let v = m.get(s, t);
            if s == t {
                ring.is_one(&v)
            } else {
                ring.is_zero(&v)
            }
        });
        if !ok {
            violations += 1;
        }
        all_identity &= c.is_identity();
    }
    Ok(CommutatorReport {
        depth,
        trials,
        pattern_holds: violations == 0,
        violations,
        bounded: proset.is_n_bounded(depth),
        all_identity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DicksonReport {
    pub n: usize,
    pub q: u64,
    pub seed: u64,
    /// Rows of the element whose normal closure was taken.
    pub seed_element: Vec<Vec<String>>,
    pub closure_order: usize,
    pub group_order: u128,
    pub sl_order: u128,
    /// All elementary transvections `1 + e^(i,j)` lie in the closure; they
    /// generate `SL_n(F_q)`.
    pub contains_sl_generators: bool,
    pub order_divisible_by_sl: bool,
    pub contains_sl: bool,
}

/// Normal closure in `GL_n(F_q)` of a random noncentral element, by orbit
/// closure under conjugation followed by subgroup closure.
pub fn dickson_normal_closure(n: usize, q: u64, seed: u64) -> Result<DicksonReport> {
    if n < 2 || (n == 2 && q <= 3) {
        return Err(Error::HypothesisViolation(format!("n = {n}, q = {q}: needs n ≥ 2 and q > 3 when n = 2")));
    }
    let ring = CoeffRing::prime_field(q)?;
    let proset = Arc::new(Proset::full(n));
    let gens = generators(&proset, ring);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = loop {
        let cand = random_invertible(&proset, ring, 1.0, &mut rng);
        if !gens.iter().all(|h| commutes(cand.matrix(), h.matrix())) {
            break cand;
        }
    };
    // conjugacy class of g
    let mut orbit: HashSet<IncMatrix> = HashSet::from([g.matrix().clone()]);
    let mut queue = VecDeque::from([g.clone()]);
    let mut conj: Vec<(GroupElement, GroupElement)> = gens.iter().map(|h| (h.clone(), h.invert())).collect();
    conj.shuffle(&mut rng);
    while let Some(x) = queue.pop_front() {
        for (h, hi) in &conj {
            let y = h.mul(&x)?.mul(hi)?;
            if orbit.insert(y.matrix().clone()) {
                queue.push_back(y);
            }
        }
    }
    let orbit: Vec<IncMatrix> = orbit.into_iter().collect();
    let one = IncMatrix::identity(&proset, ring);
    let mut closure: HashSet<IncMatrix> = HashSet::from([one.clone()]);
    let mut queue = VecDeque::from([one.clone()]);
    while let Some(x) = queue.pop_front() {
        for c in &orbit {
            let y = &x * c;
            if closure.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    let group_order = gl_n_order(n, q).expect("small group");
    let sl_order = group_order / (q as u128 - 1);
    let contains_sl_generators = (0..n).all(|i| {
        (0..n).all(|j| i == j || closure.contains(&(&one + &IncMatrix::unit(&proset, ring, i, j).expect("full"))))
    });
    let order_divisible_by_sl = (closure.len() as u128) % sl_order == 0;
    Ok(DicksonReport {
        n,
        q,
        seed,
        seed_element: (0..n).map(|i| (0..n).map(|j| g.matrix().get(i, j).to_string()).collect()).collect(),
        closure_order: closure.len(),
        group_order,
        sl_order,
        contains_sl_generators,
        order_divisible_by_sl,
        contains_sl: contains_sl_generators && order_divisible_by_sl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Arc<Proset> {
        Arc::new(Proset::chain(n))
    }

    fn m(p: &Arc<Proset>, r: CoeffRing, e: &[(usize, usize, i64)]) -> IncMatrix {
        IncMatrix::from_entries(p, r, e.iter().map(|&(a, b, v)| (a, b, r.from_i64(v)))).unwrap()
    }

    #[test]
    fn unipotent_inverse() {
        let p = chain(2);
        let r = CoeffRing::Integer;
        let a = m(&p, r, &[(0, 0, 1), (0, 1, 1), (1, 1, 1)]);
        assert_eq!(invert_matrix(&a).unwrap(), m(&p, r, &[(0, 0, 1), (0, 1, -1), (1, 1, 1)]));
        assert!(is_invertible(&IncMatrix::identity(&p, r)));
        assert!(!is_invertible(&m(&p, r, &[(0, 0, 2), (1, 1, 1)])));
        assert!(matches!(GroupElement::new(m(&p, r, &[(0, 0, 2), (1, 1, 1)])), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn conjugating_an_idempotent() {
        let p = chain(2);
        let r = CoeffRing::Integer;
        for a in -3..=3 {
            let u = m(&p, r, &[(0, 0, 1), (0, 1, a), (1, 1, 1)]);
            let e = m(&p, r, &[(0, 0, 1)]);
            let conj = &(&u * &e) * &invert_matrix(&u).unwrap();
            assert_eq!(conj, m(&p, r, &[(0, 0, 1), (0, 1, -a)]));
        }
    }

    #[test]
    fn block_inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let names: Vec<String> = (0..6).map(|i| i.to_string()).collect();
        let p = Arc::new(Proset::new(names, &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 2), (0, 4), (4, 5), (5, 4)]).unwrap());
        for ring in [CoeffRing::PrimeField(7), CoeffRing::ModN(9), CoeffRing::Integer, CoeffRing::Rational] {
            for _ in 0..100 {
                let a = random_invertible(&p, ring, 0.7, &mut rng);
                let b = a.invert();
                assert!(a.mul(&b).unwrap().is_identity());
                assert!(b.mul(&a).unwrap().is_identity());
            }
        }
    }

    #[test]
    fn invertibility_matches_existence_of_inverse() {
        // every matrix on 2< and on the 2-class proset over Z/4
        let r = CoeffRing::ModN(4);
        for p in [chain(2), Arc::new(Proset::two_block(1, 1)), Arc::new(Proset::full(2))] {
            let rels = p.relations();
            let mut idx = vec![0usize; rels.len()];
            let elems = r.elements().unwrap();
            let all: Vec<IncMatrix> = std::iter::from_fn(|| {
                let a = IncMatrix::from_entries(&p, r, rels.iter().zip(&idx).map(|(&(s, t), &i)| (s, t, elems[i].clone()))).unwrap();
                let more = odometer(&mut idx, elems.len());
                Some((a, more))
            })
            .scan(true, |go, (a, more)| {
                if !*go {
                    return None;
                }
                *go = more;
                Some(a)
            })
            .collect();
            for a in &all {
                let has_inverse = all.iter().any(|b| (a * b).is_identity() && (b * a).is_identity());
                assert_eq!(is_invertible(a), has_inverse);
            }
            let units = all.iter().filter(|a| is_invertible(a)).count() as u128;
            assert_eq!(Some(units), gl_order(&p, r));
        }
    }

    #[test]
    fn group_orders() {
        assert_eq!(gl_n_order(2, 2), Some(6));
        assert_eq!(gl_n_order(3, 2), Some(168));
        assert_eq!(gl_n_order(2, 5), Some(480));
        assert_eq!(gl_n_order(1, 9), Some(6));
        assert_eq!(gl_n_order(2, 4), Some(96));
        assert_eq!(gl_order(&Proset::chain(2), CoeffRing::PrimeField(2)), Some(2));
        assert_eq!(enumerate_gl(&chain(3), CoeffRing::PrimeField(3), 10_000).unwrap().len(), 216);
    }

    #[test]
    fn generators_generate() {
        for (p, r) in [
            (chain(2), CoeffRing::PrimeField(3)),
            (Arc::new(Proset::full(2)), CoeffRing::PrimeField(2)),
            (Arc::new(Proset::two_block(2, 1)), CoeffRing::PrimeField(2)),
            (chain(2), CoeffRing::ModN(4)),
        ] {
            let gens = generators(&p, r);
            let one = IncMatrix::identity(&p, r);
            let mut seen = HashSet::from([one.clone()]);
            let mut queue = VecDeque::from([one]);
            while let Some(x) = queue.pop_front() {
                for g in &gens {
                    let y = &x * g.matrix();
                    if seen.insert(y.clone()) {
                        queue.push_back(y);
                    }
                }
            }
            assert_eq!(Some(seen.len() as u128), gl_order(&p, r));
        }
    }

    #[test]
    fn normal_subgroups_and_quotients() {
        let p = chain(3);
        let r = CoeffRing::Integer;
        for d in [-1, 1] {
            let a = GroupElement::new(m(&p, r, &[(0, 0, 1), (0, 2, 5), (1, 1, 1), (1, 2, -3), (2, 2, d)])).unwrap();
            assert!(a.normal_subgroup_membership(&IdealSpec::Convex(vec![0, 1])).unwrap());
            assert!(!a.normal_subgroup_membership(&IdealSpec::Convex(vec![1, 2])).unwrap());
        }
        let id = GroupElement::identity(&p, r);
        assert!(id.normal_subgroup_membership(&IdealSpec::Interval(0, 2)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = CoeffRing::PrimeField(5);
        for _ in 0..100 {
            let a = random_invertible(&p, f, 0.8, &mut rng);
            let b = random_invertible(&p, f, 0.8, &mut rng);
            let lhs = a.mul(&b).unwrap().quotient_project(&[1, 2]).unwrap();
            let rhs = a.quotient_project(&[1, 2]).unwrap().mul(&b.quotient_project(&[1, 2]).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn quotient_kernel_is_normal_subgroup() {
        let r = CoeffRing::PrimeField(2);
        for p in crate::proset::posets_up_to_iso(3).into_iter().map(Arc::new) {
            let all = enumerate_gl(&p, r, 10_000).unwrap();
            for sub in p.gamma_enumerate(3) {
                for a in &all {
                    let in_kernel = a.quotient_project(&sub).unwrap().is_identity();
                    assert_eq!(in_kernel, a.normal_subgroup_membership(&IdealSpec::Convex(sub.clone())).unwrap());
                }
            }
        }
    }

    #[test]
    fn centrality() {
        let p = chain(2);
        let f5 = CoeffRing::PrimeField(5);
        let s = GroupElement::new(IncMatrix::scalar_diag(&p, f5, &f5.from_i64(3))).unwrap();
        let v = is_central(&s);
        assert!(v.central && v.scalar && !v.hypothesis_failure && v.witness.is_none());
        let t = GroupElement::new(m(&p, f5, &[(0, 0, 1), (0, 1, 1), (1, 1, 1)])).unwrap();
        let v = is_central(&t);
        assert!(!v.central);
        assert_eq!(v.witness, Some(IncMatrix::indicator(&p, f5, &[0])));
        // GL over F_2 on 2< has two elements and is abelian
        let f2 = CoeffRing::PrimeField(2);
        let t = GroupElement::new(m(&p, f2, &[(0, 0, 1), (0, 1, 1), (1, 1, 1)])).unwrap();
        let v = is_central(&t);
        assert!(v.central && !v.scalar && !v.hypothesis_holds && v.hypothesis_failure);
        assert_eq!(v.method, CentralityMethod::Exhaustive);
    }

    #[test]
    fn center_by_kernel_matches_enumeration() {
        let f = CoeffRing::PrimeField(3);
        for p in [chain(3), Arc::new(Proset::two_block(1, 1)), Arc::new(Proset::full(2))] {
            let by_enum: HashSet<GroupElement> = center(&p, f).unwrap().into_iter().collect();
            let by_kernel: HashSet<GroupElement> =
                centralizer_units(&p, f, &generators(&p, f)).unwrap().into_iter().collect();
            assert_eq!(by_enum, by_kernel);
            assert_eq!(by_enum.len(), 2);
            assert!(by_enum.iter().all(|g| is_scalar_unit(g.matrix())));
        }
        let big = Arc::new(Proset::full(3));
        let c = center(&big, CoeffRing::PrimeField(5)).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|g| is_scalar_unit(g.matrix())));
    }

    #[test]
    fn commutator_depths() {
        let f3 = CoeffRing::PrimeField(3);
        let rep = iterated_commutator_sample(&chain(2), f3, 2, 50, 1).unwrap();
        assert!(rep.pattern_holds && rep.bounded && rep.all_identity);
        let rep = iterated_commutator_sample(&chain(3), f3, 1, 200, 2).unwrap();
        assert!(rep.pattern_holds && !rep.all_identity);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_invertible(&chain(3), f3, 1.0, &mut rng);
        assert!(a.commutator(&a).unwrap().is_identity());
        assert_eq!(
            iterated_commutator_sample(&Arc::new(Proset::full(2)), f3, 1, 1, 0),
            Err(Error::PosetRequired("commutator vanishing needs a partial order".into()))
        );
    }

    #[test]
    fn transpose_is_an_isomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = CoeffRing::PrimeField(3);
        let names: Vec<String> = (0..4).map(|i| i.to_string()).collect();
        let p = Arc::new(Proset::new(names, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap());
        let op = Arc::new(p.opposite());
        for _ in 0..100 {
            let a = random_invertible(&p, f, 0.7, &mut rng);
            let b = random_invertible(&p, f, 0.7, &mut rng);
            let fa = a.transpose_op_iso(&op).unwrap();
            let fb = b.transpose_op_iso(&op).unwrap();
            assert_eq!(a.mul(&b).unwrap().transpose_op_iso(&op).unwrap(), fa.mul(&fb).unwrap());
            assert_eq!(fa.transpose_op_iso(&p).unwrap(), a);
        }
        assert!(GroupElement::identity(&p, f).transpose_op_iso(&op).unwrap().is_identity());
    }

    #[test]
    fn dickson() {
        let rep = dickson_normal_closure(2, 5, 42).unwrap();
        assert!(rep.contains_sl && rep.closure_order % 120 == 0);
        let rep = dickson_normal_closure(3, 2, 1).unwrap();
        assert_eq!(rep.closure_order, 168);
        assert!(matches!(dickson_normal_closure(2, 3, 0), Err(Error::HypothesisViolation(_))));
        assert!(matches!(dickson_normal_closure(2, 2, 0), Err(Error::HypothesisViolation(_))));
    }
}
