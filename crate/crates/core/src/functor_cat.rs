//! FCC maps, the contravariant incidence functor `M[−]`, and colimits of
//! prosets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::incidence::IncMatrix;
use crate::proset::{Proset, ProsetFamily};
use crate::ring::{CoeffRing, RingValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Constant,
    ConvexEmbedding,
}

/// A validated FCC map: order preserving, and on every component of the
/// domain either constant or a convex embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FccMap {
    domain: Arc<Proset>,
    codomain: Arc<Proset>,
    map: Vec<usize>,
    kinds: Vec<ComponentKind>,
}

enum ComponentFailure {
    ConstantIntoClass(usize),
    NotInjective,
    NotConvex,
}

fn check_component(dom: &Proset, cod: &Proset, map: &[usize], comp: &[usize]) -> std::result::Result<ComponentKind, ComponentFailure> {
    let first = map[comp[0]];
    if comp.iter().all(|&s| map[s] == first) {
        // a constant image must be a singleton class or products pick up
        // the off-diagonal entries of that class
        if cod.classes()[cod.class_of(first)].len() > 1 {
            return Err(ComponentFailure::ConstantIntoClass(first));
        }
        return Ok(ComponentKind::Constant);
    }
    let image: BTreeSet<usize> = comp.iter().map(|&s| map[s]).collect();
    if image.len() != comp.len() {
        return Err(ComponentFailure::NotInjective);
    }
    for &a in comp {
        for &b in comp {
            if cod.leq(map[a], map[b]) && !dom.leq(a, b) {
                return Err(ComponentFailure::NotConvex);
            }
            if dom.leq(a, b) {
                let img: BTreeSet<usize> = dom.interval(a, b).into_iter().map(|s| map[s]).collect();
                let target: BTreeSet<usize> = cod.interval(map[a], map[b]).into_iter().collect();
                if img != target {
                    return Err(ComponentFailure::NotConvex);
                }
            }
        }
    }
    Ok(ComponentKind::ConvexEmbedding)
}

/// Classifies a total map `domain → codomain` (given by indices).
pub fn validate_fcc(domain: &Arc<Proset>, codomain: &Arc<Proset>, map: Vec<usize>) -> Result<FccMap> {
    if map.len() != domain.len() {
        return Err(Error::Format(format!("map has {} images for {} elements", map.len(), domain.len())));
    }
    if let Some(&bad) = map.iter().find(|&&t| t >= codomain.len()) {
        return Err(Error::UnknownElement(bad.to_string()));
    }
    for (a, b) in domain.relations() {
        if !codomain.leq(map[a], map[b]) {
            return Err(Error::NotOrderPreserving(domain.name(a).into(), domain.name(b).into()));
        }
    }
    let mut kinds = Vec::with_capacity(domain.components().len());
    for (c, comp) in domain.components().iter().enumerate() {
        match check_component(domain, codomain, &map, comp) {
            Ok(k) => kinds.push(k),
            Err(ComponentFailure::NotConvex) => return Err(Error::NotConvexImage { component: c }),
            Err(ComponentFailure::NotInjective) => {
                return Err(Error::NotFcc { component: c, reason: "neither constant nor an embedding".into() })
            }
            Err(ComponentFailure::ConstantIntoClass(t)) => {
                return Err(Error::NotFcc {
                    component: c,
                    reason: format!("constant onto {} whose class is not a singleton", codomain.name(t)),
                })
            }
        }
    }
    Ok(FccMap { domain: domain.clone(), codomain: codomain.clone(), map, kinds })
}

/// A generator of `M_Λ(P)`: `p·1`, `1^{s}` or `e^(s,t)` with `s ≠ t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Scalar(RingValue),
    Indicator(usize),
    Unit(usize, usize),
}

impl Generator {
    pub fn matrix(&self, proset: &Arc<Proset>, ring: CoeffRing) -> Result<IncMatrix> {
        match self {
            Generator::Scalar(p) => Ok(IncMatrix::scalar_diag(proset, ring, p)),
            Generator::Indicator(s) => Ok(IncMatrix::indicator(proset, ring, &[*s])),
            Generator::Unit(s, t) => IncMatrix::unit(proset, ring, *s, *t),
        }
    }

    /// `1^{s}` for every element and `e^(s,t)` for every strict relation.
    pub fn all(proset: &Proset) -> Vec<Generator> {
        let mut out: Vec<Generator> = (0..proset.len()).map(Generator::Indicator).collect();
        out.extend(proset.relations().into_iter().filter(|(a, b)| a != b).map(|(a, b)| Generator::Unit(a, b)));
        out
    }
}

impl FccMap {
    pub fn identity(p: &Arc<Proset>) -> FccMap {
        validate_fcc(p, p, (0..p.len()).collect()).expect("identity is FCC")
    }

    /// Parses a map given by element names.
    pub fn from_names(domain: &Arc<Proset>, codomain: &Arc<Proset>, pairs: &BTreeMap<String, String>) -> Result<FccMap> {
        let mut map = vec![usize::MAX; domain.len()];
        for (a, b) in pairs {
            map[domain.index_of(a)?] = codomain.index_of(b)?;
        }
        if let Some(s) = map.iter().position(|&t| t == usize::MAX) {
            return Err(Error::Format(format!("no image given for {}", domain.name(s))));
        }
        validate_fcc(domain, codomain, map)
    }

    pub fn domain(&self) -> &Arc<Proset> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<Proset> {
        &self.codomain
    }

    pub fn image(&self, s: usize) -> usize {
        self.map[s]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.map
    }

    pub fn kinds(&self) -> &[ComponentKind] {
        &self.kinds
    }

    pub fn named_mapping(&self) -> BTreeMap<String, String> {
        self.map
            .iter()
            .enumerate()
            .map(|(s, &t)| (self.domain.name(s).to_string(), self.codomain.name(t).to_string()))
            .collect()
    }

    pub fn is_surjective(&self) -> bool {
        let hit: BTreeSet<usize> = self.map.iter().copied().collect();
        hit.len() == self.codomain.len()
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &FccMap) -> Result<FccMap> {
        if *self.codomain != *g.domain {
            return Err(Error::NotComposable);
        }
        validate_fcc(&self.domain, &g.codomain, self.map.iter().map(|&t| g.map[t]).collect())
    }

    /// `M[f](A)_{t1,t2} = A_{f(t1),f(t2)}` when `t1 = t2` or `f(t1) ≠ f(t2)`,
    /// and `0` otherwise.
    pub fn induced_hom(&self, a: &IncMatrix) -> Result<IncMatrix> {
        if **a.proset() != *self.codomain {
            return Err(Error::IncompatibleOperands);
        }
        let ring = a.ring();
        let f = &self.map;
        IncMatrix::from_entries(
            &self.domain,
            ring,
            self.domain
                .relations()
                .into_iter()
                .filter(|&(t1, t2)| t1 == t2 || f[t1] != f[t2])
                .map(|(t1, t2)| (t1, t2, a.get(f[t1], f[t2]))),
        )
    }

    /// The prescribed image of a generator: `p ↦ p·1`, `1^{s} ↦ 1^{f⁻¹(s)}`,
    /// `e^(s1,s2) ↦ Σ e^(t1,t2)` over related `t1 ⪯ t2` above `(s1, s2)`.
    pub fn generator_image(&self, ring: CoeffRing, g: &Generator) -> Result<IncMatrix> {
        let dom = &self.domain;
        match g {
            Generator::Scalar(p) => Ok(IncMatrix::scalar_diag(dom, ring, p)),
            Generator::Indicator(s) => {
                let pre: Vec<usize> = (0..dom.len()).filter(|&t| self.map[t] == *s).collect();
                Ok(IncMatrix::indicator(dom, ring, &pre))
            }
            Generator::Unit(s1, s2) => IncMatrix::from_entries(
                dom,
                ring,
                dom.relations()
                    .into_iter()
                    .filter(|&(t1, t2)| self.map[t1] == *s1 && self.map[t2] == *s2)
                    .map(|(t1, t2)| (t1, t2, ring.one())),
            ),
        }
    }

    /// Codomain relations that no domain relation covers; these span the
    /// kernel of `M[f]`.
    pub fn uncovered_relations(&self) -> Vec<(usize, usize)> {
        let covered: BTreeSet<(usize, usize)> = self
            .domain
            .relations()
            .into_iter()
            .filter(|&(t1, t2)| t1 == t2 || self.map[t1] != self.map[t2])
            .map(|(t1, t2)| (self.map[t1], self.map[t2]))
            .collect();
        self.codomain.relations().into_iter().filter(|r| !covered.contains(r)).collect()
    }

    /// A `Y` with `M[f](Y) = B`, if one exists.
    pub fn preimage(&self, b: &IncMatrix) -> Result<Option<IncMatrix>> {
        if **b.proset() != *self.domain {
            return Err(Error::IncompatibleOperands);
        }
        let mut witness: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (t1, t2) in self.domain.relations() {
            if t1 == t2 || self.map[t1] != self.map[t2] {
                witness.entry((self.map[t1], self.map[t2])).or_insert((t1, t2));
            }
        }
        let y = IncMatrix::from_entries(
            &self.codomain,
            b.ring(),
            witness.iter().map(|(&(s1, s2), &(t1, t2))| (s1, s2, b.get(t1, t2))),
        )?;
        Ok((self.induced_hom(&y)? == *b).then_some(y))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HomReport {
    pub pairs: usize,
    pub unital: bool,
    pub additive: bool,
    pub multiplicative: bool,
    pub generators_agree: bool,
}

impl HomReport {
    pub fn holds(&self) -> bool {
        self.unital && self.additive && self.multiplicative && self.generators_agree
    }
}

/// Checks that `M[f]` is a unital ring homomorphism on `pairs` random pairs
/// and that it matches the generator prescription.
pub fn homomorphism_check<R: Rng + ?Sized>(f: &FccMap, ring: CoeffRing, pairs: usize, rng: &mut R) -> Result<HomReport> {
    let cod = f.codomain();
    let unital = f.induced_hom(&IncMatrix::identity(cod, ring))?.is_identity();
    let mut additive = true;
    let mut multiplicative = true;
    for _ in 0..pairs {
        let a = IncMatrix::random(cod, ring, 0.7, rng);
        let b = IncMatrix::random(cod, ring, 0.7, rng);
        let (ha, hb) = (f.induced_hom(&a)?, f.induced_hom(&b)?);
        additive &= f.induced_hom(&(&a + &b))? == &ha + &hb;
        multiplicative &= f.induced_hom(&(&a * &b))? == &ha * &hb;
    }
    let mut gens = Generator::all(cod);
    gens.push(Generator::Scalar(ring.random(rng)));
    let mut generators_agree = true;
    for g in &gens {
        generators_agree &= f.induced_hom(&g.matrix(cod, ring)?)? == f.generator_image(ring, g)?;
    }
    Ok(HomReport { pairs, unital, additive, multiplicative, generators_agree })
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctorialityReport {
    pub generators_checked: usize,
    pub random_checked: usize,
    pub holds: bool,
}

/// `M[g∘f] = M[f]∘M[g]` on every generator of the final codomain and on
/// random matrices.
pub fn functoriality_check<R: Rng + ?Sized>(
    f: &FccMap,
    g: &FccMap,
    ring: CoeffRing,
    samples: usize,
    rng: &mut R,
) -> Result<FunctorialityReport> {
    let gf = f.then(g)?;
    let top = g.codomain();
    let mut holds = true;
    let gens = Generator::all(top);
    for gen in &gens {
        let x = gen.matrix(top, ring)?;
        holds &= gf.induced_hom(&x)? == f.induced_hom(&g.induced_hom(&x)?)?;
    }
    for _ in 0..samples {
        let x = IncMatrix::random(top, ring, 0.7, rng);
        holds &= gf.induced_hom(&x)? == f.induced_hom(&g.induced_hom(&x)?)?;
    }
    Ok(FunctorialityReport { generators_checked: gens.len(), random_checked: samples, holds })
}

#[derive(Debug, Clone, Serialize)]
pub struct InjectivityReport {
    pub surjective: bool,
    /// Codomain relations with zero image, by name.
    pub uncovered: Vec<(String, String)>,
    pub random_checked: usize,
    pub random_kernel_trivial: bool,
    pub injective: bool,
}

/// Whether `M[f]` is injective for a surjective `f`: each spanning unit
/// `e^(s1,s2)` has a nonzero image, the images have disjoint supports, and
/// random nonzero elements survive.
pub fn surjective_implies_injective_check<R: Rng + ?Sized>(
    f: &FccMap,
    ring: CoeffRing,
    samples: usize,
    rng: &mut R,
) -> Result<InjectivityReport> {
    if !f.is_surjective() {
        return Err(Error::HypothesisViolation("the map is not surjective".into()));
    }
    let cod = f.codomain();
    let uncovered: Vec<(String, String)> = f
        .uncovered_relations()
        .into_iter()
        .map(|(a, b)| (cod.name(a).to_string(), cod.name(b).to_string()))
        .collect();
    let mut random_kernel_trivial = true;
    for _ in 0..samples {
        let a = IncMatrix::random(cod, ring, 0.5, rng);
        if !a.is_zero() && f.induced_hom(&a)?.is_zero() {
            random_kernel_trivial = false;
        }
    }
    let injective = uncovered.is_empty();
    Ok(InjectivityReport { surjective: true, uncovered, random_checked: samples, random_kernel_trivial, injective })
}

/// `⊔ Λ_i` with element names `"{i}:{name}"`, `i` counted from 1.
#[derive(Debug, Clone)]
pub struct Coproduct {
    pub proset: Arc<Proset>,
    pub embeddings: Vec<FccMap>,
}

pub fn coproduct(parts: &[Arc<Proset>]) -> Coproduct {
    let mut names = Vec::new();
    let mut rel = Vec::new();
    let mut offsets = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let off = names.len();
        offsets.push(off);
        names.extend(p.names().iter().map(|n| format!("{}:{n}", i + 1)));
        rel.extend(p.relations().into_iter().map(|(a, b)| (a + off, b + off)));
    }
    let proset = Arc::new(Proset::new(names, &rel).expect("disjoint union"));
    let embeddings = parts
        .iter()
        .zip(&offsets)
        .map(|(p, &off)| validate_fcc(p, &proset, (0..p.len()).map(|s| s + off).collect()).expect("embedding"))
        .collect();
    Coproduct { proset, embeddings }
}

/// The map `(f_i)` out of a coproduct.
pub fn mediating_map(co: &Coproduct, legs: &[FccMap]) -> Result<FccMap> {
    if legs.len() != co.embeddings.len() || legs.is_empty() {
        return Err(Error::IncompatibleOperands);
    }
    let target = legs[0].codomain().clone();
    let mut map = Vec::with_capacity(co.proset.len());
    for (leg, emb) in legs.iter().zip(&co.embeddings) {
        if **leg.codomain() != *target || **leg.domain() != **emb.domain() {
            return Err(Error::IncompatibleOperands);
        }
        map.extend_from_slice(leg.mapping());
    }
    validate_fcc(&co.proset, &target, map)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// The finest FCC quotient of `u` coarser than the seeded partition: the
/// preorder is the closure of the images, and any component whose quotient
/// map fails to be FCC is collapsed until none does.
fn fcc_quotient(u: &Proset, uf: &mut UnionFind, name: impl Fn(&[usize]) -> String) -> (Arc<Proset>, Vec<usize>) {
    let n = u.len();
    loop {
        let mut label: BTreeMap<usize, usize> = BTreeMap::new();
        let mut cls = vec![0; n];
        for (x, c) in cls.iter_mut().enumerate() {
            let r = uf.find(x);
            let next = label.len();
            *c = *label.entry(r).or_insert(next);
        }
        let rel: Vec<(usize, usize)> = u.relations().into_iter().map(|(a, b)| (cls[a], cls[b])).collect();
        let q = Proset::new((0..label.len()).map(|i| i.to_string()).collect(), &rel).expect("quotient");
        let mut changed = false;
        for comp in u.components() {
            match check_component(u, &q, &cls, comp) {
                Ok(_) => {}
                Err(ComponentFailure::ConstantIntoClass(t)) => {
                    let class = &q.classes()[q.class_of(t)];
                    let members: Vec<usize> = (0..n).filter(|&x| class.contains(&cls[x])).collect();
                    for w in members.windows(2) {
                        changed |= uf.union(w[0], w[1]);
                    }
                }
                Err(_) => {
                    for w in comp.windows(2) {
                        changed |= uf.union(w[0], w[1]);
                    }
                }
            }
        }
        if !changed {
            let mut members = vec![Vec::new(); label.len()];
            for (x, &c) in cls.iter().enumerate() {
                members[c].push(x);
            }
            let names: Vec<String> = members.iter().map(|m| name(m)).collect();
            let named = q.relabel(names).expect("distinct class names");
            return (Arc::new(named), cls);
        }
    }
}

/// `Λ_{f,g}` with legs `p1: Λ1 → Λ_{f,g}`, `p2: Λ2 → Λ_{f,g}`.
#[derive(Debug, Clone)]
pub struct Pushout {
    pub proset: Arc<Proset>,
    pub p1: FccMap,
    pub p2: FccMap,
}

fn strip(name: &str) -> &str {
    name.split_once(':').map_or(name, |(_, rest)| rest)
}

/// Glues `f(s) ≡ g(s)` in `Λ1 ⊔ Λ2` and takes the finest FCC quotient.
/// A glued class is named after its members when they share a name, and by
/// the `=`-joined prefixed names otherwise.
pub fn pushout(f: &FccMap, g: &FccMap) -> Result<Pushout> {
    if **f.domain() != **g.domain() {
        return Err(Error::IncompatibleOperands);
    }
    let co = coproduct(&[f.codomain().clone(), g.codomain().clone()]);
    let u = &co.proset;
    let off = f.codomain().len();
    let mut uf = UnionFind::new(u.len());
    for s in 0..f.domain().len() {
        uf.union(f.image(s), off + g.image(s));
    }
    // names are fixed after the partition settles, so count base names first
    let mut probe = UnionFind(uf.0.clone());
    let (_, cls) = fcc_quotient(u, &mut probe, |m| m[0].to_string());
    let k = cls.iter().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); k];
    for (x, &c) in cls.iter().enumerate() {
        members[c].push(x);
    }
    let base = |m: &[usize]| -> Option<String> {
        let b = strip(u.name(m[0]));
        m.iter().all(|&x| strip(u.name(x)) == b).then(|| b.to_string())
    };
    let mut count: HashMap<String, usize> = HashMap::new();
    for m in &members {
        if let Some(b) = base(m) {
            *count.entry(b).or_default() += 1;
        }
    }
    let (q, cls) = fcc_quotient(u, &mut uf, |m| match base(m) {
        Some(b) if count[&b] == 1 => b,
        _ => m.iter().map(|&x| u.name(x)).collect::<Vec<_>>().join("="),
    });
    let p1 = validate_fcc(f.codomain(), &q, cls[..off].to_vec())?;
    let p2 = validate_fcc(g.codomain(), &q, cls[off..].to_vec())?;
    debug_assert!((0..f.domain().len()).all(|s| p1.image(f.image(s)) == p2.image(g.image(s))));
    Ok(Pushout { proset: q, p1, p2 })
}

/// The unique `m` with `m∘p1 = h1` and `m∘p2 = h2`.
pub fn pushout_mediating(po: &Pushout, h1: &FccMap, h2: &FccMap) -> Result<FccMap> {
    if **h1.domain() != **po.p1.domain() || **h2.domain() != **po.p2.domain() || **h1.codomain() != **h2.codomain() {
        return Err(Error::IncompatibleOperands);
    }
    let mut m = vec![None; po.proset.len()];
    for (leg, h) in [(&po.p1, h1), (&po.p2, h2)] {
        for s in 0..leg.domain().len() {
            let slot = &mut m[leg.image(s)];
            match *slot {
                None => *slot = Some(h.image(s)),
                Some(t) if t != h.image(s) => {
                    return Err(Error::HypothesisViolation("the cocone does not factor through the pushout".into()))
                }
                _ => {}
            }
        }
    }
    let map = m.into_iter().map(|x| x.expect("legs are jointly surjective")).collect();
    validate_fcc(&po.proset, h1.codomain(), map)
}

#[derive(Debug, Clone)]
pub struct Coequalizer {
    pub proset: Arc<Proset>,
    pub p: FccMap,
}

/// `Λ²/≡` for the finest FCC equivalence with `f1(t) ≡ f2(t)`.
pub fn coequalizer(f1: &FccMap, f2: &FccMap) -> Result<Coequalizer> {
    if **f1.domain() != **f2.domain() || **f1.codomain() != **f2.codomain() {
        return Err(Error::NotParallel);
    }
    let cod = f1.codomain();
    let mut uf = UnionFind::new(cod.len());
    for t in 0..f1.domain().len() {
        uf.union(f1.image(t), f2.image(t));
    }
    let (q, cls) = fcc_quotient(cod, &mut uf, |m| m.iter().map(|&x| cod.name(x)).collect::<Vec<_>>().join("="));
    let p = validate_fcc(cod, &q, cls)?;
    Ok(Coequalizer { proset: q, p })
}

/// The unique `m` with `m∘p = h`, for `h∘f1 = h∘f2`.
pub fn coequalizer_mediating(co: &Coequalizer, h: &FccMap) -> Result<FccMap> {
    if **h.domain() != **co.p.domain() {
        return Err(Error::IncompatibleOperands);
    }
    let mut m = vec![None; co.proset.len()];
    for s in 0..h.domain().len() {
        let slot = &mut m[co.p.image(s)];
        match *slot {
            None => *slot = Some(h.image(s)),
            Some(t) if t != h.image(s) => {
                return Err(Error::HypothesisViolation("the map does not factor through the coequalizer".into()))
            }
            _ => {}
        }
    }
    validate_fcc(&co.proset, h.codomain(), m.into_iter().map(|x| x.expect("p is surjective")).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct EqualizerReport {
    pub coequalizer_size: usize,
    pub equalizes: bool,
    pub injective: bool,
    /// Coequalizer relations killed by `M[p]`, by name.
    pub kernel_relations: Vec<(String, String)>,
    pub factorizations_tested: usize,
    pub factorizations_hold: bool,
}

impl EqualizerReport {
    pub fn passes(&self) -> bool {
        self.equalizes && self.injective && self.factorizations_hold
    }
}

/// Checks that `M[p]` equalizes `M[f1]`, `M[f2]`, is injective, and that
/// test homomorphisms `h' = M[h∘p]` factor through it on the units.
pub fn equalizer_check<R: Rng + ?Sized>(
    f1: &FccMap,
    f2: &FccMap,
    ring: CoeffRing,
    tests: usize,
    rng: &mut R,
) -> Result<EqualizerReport> {
    let co = coequalizer(f1, f2)?;
    let q = &co.proset;
    let mut equalizes = true;
    let mut probes: Vec<IncMatrix> =
        Generator::all(q).iter().map(|g| g.matrix(q, ring)).collect::<Result<_>>()?;
    probes.push(IncMatrix::random(q, ring, 0.7, rng));
    for x in &probes {
        let px = co.p.induced_hom(x)?;
        equalizes &= f1.induced_hom(&px)? == f2.induced_hom(&px)?;
    }
    let inj = surjective_implies_injective_check(&co.p, ring, 0, rng)?;
    let mut factorizations_hold = true;
    for _ in 0..tests {
        let h = random_fcc_from(q, rng);
        let hp = co.p.then(&h)?;
        for gen in Generator::all(h.codomain()) {
            let x = gen.matrix(h.codomain(), ring)?;
            let hx = hp.induced_hom(&x)?;
            factorizations_hold &= f1.induced_hom(&hx)? == f2.induced_hom(&hx)?;
            factorizations_hold &= match co.p.preimage(&hx)? {
                Some(y) => co.p.induced_hom(&y)? == hx,
                None => false,
            };
        }
    }
    Ok(EqualizerReport {
        coequalizer_size: q.len(),
        equalizes,
        injective: inj.injective,
        kernel_relations: inj.uncovered,
        factorizations_tested: tests,
        factorizations_hold,
    })
}

/// A random FCC map out of `domain`: each component is copied, sent to a
/// fresh point, or sent to a shared point, and a copy may receive a new top.
pub fn random_fcc_from<R: Rng + ?Sized>(domain: &Arc<Proset>, rng: &mut R) -> FccMap {
    let mut names: Vec<String> = Vec::new();
    let mut rel = Vec::new();
    let mut map = vec![0; domain.len()];
    let mut shared = None;
    for (c, comp) in domain.components().iter().enumerate() {
        match rng.gen_range(0..4) {
            0 | 1 => {
                let off = names.len();
                for (i, &s) in comp.iter().enumerate() {
                    names.push(format!("c{c}.{}", domain.name(s)));
                    map[s] = off + i;
                }
                for &a in comp {
                    for &b in comp {
                        if domain.leq(a, b) {
                            rel.push((map[a], map[b]));
                        }
                    }
                }
                if rng.gen_bool(0.5) {
                    let top = names.len();
                    names.push(format!("c{c}.top"));
                    rel.extend(comp.iter().map(|&s| (map[s], top)));
                }
            }
            2 => {
                let t = names.len();
                names.push(format!("k{c}"));
                for &s in comp {
                    map[s] = t;
                }
            }
            _ => {
                let t = *shared.get_or_insert_with(|| {
                    names.push("shared".into());
                    names.len() - 1
                });
                for &s in comp {
                    map[s] = t;
                }
            }
        }
    }
    let cod = Arc::new(Proset::new(names, &rel).expect("valid codomain"));
    validate_fcc(domain, &cod, map).expect("constructed FCC map")
}

/// A random FCC map into `codomain`. The domain is a disjoint union of
/// `pieces` parts: convex subsets embedded by inclusion, or small chains
/// and blocks sent to a singleton class. With `cover`, every component of
/// the codomain is also included whole, so the map is surjective and
/// `M[f]` injective.
pub fn random_fcc_into<R: Rng + ?Sized>(codomain: &Arc<Proset>, pieces: usize, cover: bool, rng: &mut R) -> FccMap {
    let convex = codomain.gamma_enumerate(codomain.len());
    let singles: Vec<usize> = (0..codomain.len()).filter(|&s| codomain.classes()[codomain.class_of(s)].len() == 1).collect();
    let mut parts: Vec<(Proset, Vec<usize>)> = Vec::new();
    if cover {
        for comp in codomain.components() {
            parts.push((codomain.restrict(comp), comp.clone()));
        }
    }
    for _ in 0..pieces {
        if rng.gen_bool(0.5) || singles.is_empty() {
            if let Some(set) = convex.choose(rng) {
                parts.push((codomain.restrict(set), set.clone()));
            }
        } else {
            let k = rng.gen_range(1..=3);
            let p = match rng.gen_range(0..3) {
                0 => Proset::chain(k),
                1 => Proset::full(k),
                _ => Proset::two_block(1, k),
            };
            let t = *singles.choose(rng).expect("nonempty");
            let len = p.len();
            parts.push((p, vec![t; len]));
        }
    }
    let mut names = Vec::new();
    let mut rel = Vec::new();
    let mut map = Vec::new();
    for (i, (p, img)) in parts.iter().enumerate() {
        let off = names.len();
        names.extend(p.names().iter().map(|n| format!("p{i}.{n}")));
        rel.extend(p.relations().into_iter().map(|(a, b)| (a + off, b + off)));
        map.extend_from_slice(img);
    }
    let dom = Arc::new(Proset::new(names, &rel).expect("valid domain"));
    validate_fcc(&dom, codomain, map).expect("constructed FCC map")
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowReport {
    pub windows: usize,
    pub convex: bool,
    pub nested: bool,
    pub embeddings_fcc: bool,
    pub compatible: bool,
    pub elements_checked: usize,
    /// Every element lies in a window together with its class `N_0(a)`.
    pub all_hit: bool,
}

impl WindowReport {
    pub fn holds(&self) -> bool {
        self.convex && self.nested && self.embeddings_fcc && self.compatible && self.all_hit
    }
}

fn inclusion(small: &Arc<Proset>, big: &Arc<Proset>) -> Result<FccMap> {
    let map = small.names().iter().map(|n| big.index_of(n)).collect::<Result<Vec<_>>>()?;
    validate_fcc(small, big, map)
}

/// Checks a chain of windows of a family as a direct system of convex
/// embeddings whose colimit covers every element of the windows.
pub fn direct_limit_window_check(family: &ProsetFamily, windows: &[Vec<i64>]) -> Result<WindowReport> {
    let mut convex = true;
    for w in windows {
        convex &= family.is_convex(w)?;
    }
    let nested = windows.windows(2).all(|p| p[0].iter().all(|x| p[1].contains(x)));
    let mats: Vec<Arc<Proset>> = windows.iter().map(|w| family.materialize(w).map(Arc::new)).collect::<Result<_>>()?;
    let mut embeddings_fcc = true;
    let mut steps = Vec::new();
    for p in mats.windows(2) {
        match inclusion(&p[0], &p[1]) {
            Ok(j) => {
                embeddings_fcc &= j.kinds().iter().all(|&k| k == ComponentKind::ConvexEmbedding)
                    || p[0].len() == 1;
                steps.push(Some(j));
            }
            Err(_) => {
                embeddings_fcc = false;
                steps.push(None);
            }
        }
    }
    let mut compatible = true;
    for i in 0..steps.len().saturating_sub(1) {
        if let (Some(a), Some(b)) = (&steps[i], &steps[i + 1]) {
            let direct = inclusion(&mats[i], &mats[i + 2]);
            compatible &= matches!((a.then(b), direct), (Ok(x), Ok(y)) if x == y);
        }
    }
    let mut all: BTreeSet<i64> = BTreeSet::new();
    for w in windows {
        all.extend(w.iter().copied());
    }
    let mut all_hit = true;
    for &a in &all {
        let n0 = family.interval(a, a)?;
        all_hit &= n0.contains(&a) && family.is_convex(&n0)?;
        all_hit &= windows.iter().any(|w| n0.iter().all(|x| w.contains(x)));
    }
    Ok(WindowReport {
        windows: windows.len(),
        convex,
        nested,
        embeddings_fcc,
        compatible,
        elements_checked: all.len(),
        all_hit,
    })
}

/// A pushout tree over two-block leaves `m ← n`; elements keep the names of
/// the decomposed proset.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenerationTree {
    /// `lower` is below `upper`; `lower` is empty for a single class.
    Leaf { upper: Vec<String>, lower: Vec<String> },
    Coproduct { parts: Vec<GenerationTree> },
    Pushout { alpha: Box<GenerationTree>, left: Box<GenerationTree>, right: Box<GenerationTree> },
}

impl GenerationTree {
    pub fn leaves(&self) -> usize {
        match self {
            GenerationTree::Leaf { .. } => 1,
            GenerationTree::Coproduct { parts } => parts.iter().map(Self::leaves).sum(),
            GenerationTree::Pushout { alpha, left, right } => alpha.leaves() + left.leaves() + right.leaves(),
        }
    }

    /// Rebuilds the proset by coproducts and pushouts along inclusions.
    pub fn reassemble(&self) -> Result<Arc<Proset>> {
        match self {
            GenerationTree::Leaf { upper, lower } => {
                let names: Vec<String> = upper.iter().chain(lower).cloned().collect();
                let m = upper.len();
                Ok(Arc::new(Proset::from_fn(names, |i, j| (i < m) == (j < m) || (i >= m && j < m))?))
            }
            GenerationTree::Coproduct { parts } => {
                let built = parts.iter().map(Self::reassemble).collect::<Result<Vec<_>>>()?;
                let co = coproduct(&built);
                let names = co.proset.names().iter().map(|n| strip(n).to_string()).collect();
                Ok(Arc::new(co.proset.relabel(names)?))
            }
            GenerationTree::Pushout { alpha, left, right } => {
                let (a, l, r) = (alpha.reassemble()?, left.reassemble()?, right.reassemble()?);
                let po = pushout(&inclusion(&a, &l)?, &inclusion(&a, &r)?)?;
                Ok(po.proset)
            }
        }
    }
}

/// Same elements by name and the same order.
pub fn same_by_names(a: &Proset, b: &Proset) -> bool {
    a.len() == b.len()
        && (0..a.len()).all(|i| b.index_of(a.name(i)).is_ok())
        && (0..a.len()).all(|i| {
            let bi = b.index_of(a.name(i)).expect("checked");
            (0..a.len()).all(|j| a.leq(i, j) == b.leq(bi, b.index_of(a.name(j)).expect("checked")))
        })
}

fn decompose_any(p: &Proset) -> Result<GenerationTree> {
    if p.components().len() > 1 {
        let parts = p.components().iter().map(|c| decompose_connected(&p.restrict(c))).collect::<Result<_>>()?;
        return Ok(GenerationTree::Coproduct { parts });
    }
    decompose_connected(p)
}

fn decompose_connected(p: &Proset) -> Result<GenerationTree> {
    let classes = p.classes();
    let names = |c: &[usize]| c.iter().map(|&s| p.name(s).to_string()).collect::<Vec<_>>();
    match classes.len() {
        0 => return Err(Error::InvalidProset("the empty proset has no decomposition".into())),
        1 => return Ok(GenerationTree::Leaf { upper: names(&classes[0]), lower: Vec::new() }),
        2 => {
            let (lo, hi) = if p.class_leq(0, 1) { (0, 1) } else { (1, 0) };
            return Ok(GenerationTree::Leaf { upper: names(&classes[hi]), lower: names(&classes[lo]) });
        }
        _ => {}
    }
    let arc = Arc::new(p.clone());
    let without = |drop: &[usize]| -> Vec<usize> { (0..p.len()).filter(|s| !drop.contains(s)).collect() };
    let mut fallback = None;
    for ca in 0..classes.len() {
        for cb in ca + 1..classes.len() {
            let l1 = without(&classes[ca]);
            let l2 = without(&classes[cb]);
            let both: Vec<usize> = classes[ca].iter().chain(&classes[cb]).copied().collect();
            let alpha = without(&both);
            if alpha.is_empty() {
                continue;
            }
            let (pl1, pl2, pa) = (Arc::new(p.restrict(&l1)), Arc::new(p.restrict(&l2)), Arc::new(p.restrict(&alpha)));
            let (Ok(i1), Ok(i2)) = (inclusion(&pa, &pl1), inclusion(&pa, &pl2)) else { continue };
            let Ok(po) = pushout(&i1, &i2) else { continue };
            if !same_by_names(&po.proset, &arc) {
                continue;
            }
            let irreducible = pl1.is_irreducible() && pl2.is_irreducible() && pa.is_irreducible();
            if irreducible {
                return split(&pa, &pl1, &pl2);
            }
            fallback.get_or_insert((pa, pl1, pl2));
        }
    }
    match fallback {
        Some((pa, pl1, pl2)) => split(&pa, &pl1, &pl2),
        None => Err(Error::NoValidCutPair),
    }
}

fn split(alpha: &Proset, left: &Proset, right: &Proset) -> Result<GenerationTree> {
    Ok(GenerationTree::Pushout {
        alpha: Box::new(decompose_any(alpha)?),
        left: Box::new(decompose_any(left)?),
        right: Box::new(decompose_any(right)?),
    })
}

/// Splits a finite irreducible proset along two classes `a`, `b` into
/// `Λ∖N_0(a)` and `Λ∖N_0(b)` over `Λ∖(N_0(a) ∪ N_0(b))`, recursively, down to
/// two-block leaves.
pub fn generation_decompose(p: &Proset) -> Result<GenerationTree> {
    if !p.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    decompose_connected(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proset::prosets_up_to_iso;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arc(p: Proset) -> Arc<Proset> {
        Arc::new(p)
    }

    #[test]
    fn validation_examples() {
        let two = arc(Proset::chain(2));
        let three = arc(Proset::chain(3));
        assert_eq!(validate_fcc(&two, &three, vec![0, 2]), Err(Error::NotConvexImage { component: 0 }));
        let f = validate_fcc(&two, &three, vec![1, 1]).unwrap();
        assert_eq!(f.kinds(), &[ComponentKind::Constant]);
        let four = arc(Proset::chain(4));
        assert!(matches!(validate_fcc(&four, &two, vec![0, 0, 1, 1]), Err(Error::NotFcc { component: 0, .. })));
        assert_eq!(validate_fcc(&two, &three, vec![2, 0]), Err(Error::NotOrderPreserving("0".into(), "1".into())));
        let full = arc(Proset::full(2));
        assert!(matches!(validate_fcc(&two, &full, vec![0, 0]), Err(Error::NotFcc { .. })));
        assert!(validate_fcc(&full, &full, vec![1, 0]).is_ok());
    }

    #[test]
    fn induced_hom_examples() {
        let f5 = CoeffRing::PrimeField(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let two = arc(Proset::chain(2));
        let one = arc(Proset::chain(1));
        let c = validate_fcc(&two, &one, vec![0, 0]).unwrap();
        let p = f5.from_i64(3);
        assert_eq!(c.induced_hom(&IncMatrix::scalar_diag(&one, f5, &p)).unwrap(), IncMatrix::scalar_diag(&two, f5, &p));
        let swap_src = arc(Proset::new(vec!["a".into(), "b".into()], &[(1, 0)]).unwrap());
        let iso = validate_fcc(&swap_src, &two, vec![1, 0]).unwrap();
        let a = IncMatrix::random(&two, f5, 1.0, &mut rng);
        let img = iso.induced_hom(&a).unwrap();
        assert_eq!(img.get(1, 0), a.get(0, 1));
        assert!(homomorphism_check(&iso, f5, 50, &mut rng).unwrap().holds());
        assert!(homomorphism_check(&c, f5, 50, &mut rng).unwrap().holds());
    }

    #[test]
    fn random_maps_are_homomorphisms() {
        let f5 = CoeffRing::PrimeField(5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let n = rng.gen_range(1..=5);
            let cod = arc(Proset::random(n, 0.5, rng.gen_bool(0.5), &mut rng));
            let f = random_fcc_into(&cod, 3, false, &mut rng);
            assert!(homomorphism_check(&f, f5, 20, &mut rng).unwrap().holds());
            let g = random_fcc_from(&cod, &mut rng);
            assert!(functoriality_check(&f, &g, f5, 10, &mut rng).unwrap().holds);
        }
    }

    #[test]
    fn surjections_and_injectivity() {
        let f2 = CoeffRing::PrimeField(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let two = arc(Proset::chain(2));
        let co = coproduct(&[two.clone(), two.clone()]);
        let q = validate_fcc(&co.proset, &two, vec![0, 1, 0, 1]).unwrap();
        let r = surjective_implies_injective_check(&q, f2, 50, &mut rng).unwrap();
        assert!(r.injective && r.random_kernel_trivial);
        // two overlapping pieces cover 3< but not the relation 0 ⪯ 2
        let three = arc(Proset::chain(3));
        let f = validate_fcc(&co.proset, &three, vec![0, 1, 1, 2]).unwrap();
        let r = surjective_implies_injective_check(&f, f2, 0, &mut rng).unwrap();
        assert_eq!(r.uncovered, vec![("0".to_string(), "2".to_string())]);
        assert!(f.induced_hom(&IncMatrix::unit(&three, f2, 0, 2).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn coproducts() {
        let co = coproduct(&[arc(Proset::chain(2)), arc(Proset::chain(3))]);
        assert_eq!(co.proset.len(), 5);
        assert_eq!(co.proset.components().len(), 2);
        let single = coproduct(&[arc(Proset::chain(3))]);
        assert!(single.proset.poset_isomorphic(&Proset::chain(3)).is_some());
        let f5 = CoeffRing::PrimeField(5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = IncMatrix::random(&co.proset, f5, 1.0, &mut rng);
        let parts = a.split_components();
        for (emb, part) in co.embeddings.iter().zip(&parts) {
            assert_eq!(emb.induced_hom(&a).unwrap().entries().count(), part.entries().count());
        }
        let target = arc(Proset::chain(3));
        let legs = vec![
            validate_fcc(&co.embeddings[0].domain().clone(), &target, vec![0, 1]).unwrap(),
            FccMap::identity(&target),
        ];
        let m = mediating_map(&co, &legs).unwrap();
        assert_eq!(m.mapping(), &[0, 1, 0, 1, 2]);
    }

    #[test]
    fn pushout_examples() {
        let empty = arc(Proset::chain(0));
        let a = arc(Proset::chain(2));
        let b = arc(Proset::chain(3));
        let po = pushout(&validate_fcc(&empty, &a, vec![]).unwrap(), &validate_fcc(&empty, &b, vec![]).unwrap()).unwrap();
        assert_eq!(po.proset.len(), 5);
        let id = FccMap::identity(&b);
        let po = pushout(&id, &id).unwrap();
        assert!(po.proset.poset_isomorphic(&b).is_some());
        // 3< glued to 2< at both ends collapses everything
        let disc = arc(Proset::discrete(2));
        let f = validate_fcc(&disc, &b, vec![0, 2]).unwrap();
        let g = validate_fcc(&disc, &a, vec![0, 1]).unwrap();
        assert_eq!(pushout(&f, &g).unwrap().proset.len(), 1);
    }

    #[test]
    fn pushout_of_windows() {
        // Z with the reversed order so that 0 ⪯ -1 as in the glued figure
        let z = ProsetFamily::Z;
        let zig = ProsetFamily::Zig;
        let zw: Vec<i64> = (-3..=3).collect();
        let zp = z.materialize(&zw).unwrap().opposite();
        let zigp = zig.materialize(&zw).unwrap();
        let two = arc(Proset::chain(2));
        let (zp, zigp) = (arc(zp), arc(zigp));
        let f = validate_fcc(&two, &zp, vec![zp.index_of("0").unwrap(), zp.index_of("-1").unwrap()]).unwrap();
        let g = validate_fcc(&two, &zigp, vec![zigp.index_of("0").unwrap(), zigp.index_of("-1").unwrap()]).unwrap();
        let po = pushout(&f, &g).unwrap();
        assert_eq!(po.proset.len(), zp.len() + zigp.len() - 2);
        assert!(po.proset.is_poset());
        let glued0 = po.proset.index_of("0").unwrap();
        let glued1 = po.proset.index_of("-1").unwrap();
        assert!(po.proset.leq(glued0, glued1));
    }

    #[test]
    fn pushout_universal_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(1..=3);
            let base = arc(Proset::random(n, 0.6, true, &mut rng));
            let f = random_fcc_from(&base, &mut rng);
            let g = random_fcc_from(&base, &mut rng);
            let po = pushout(&f, &g).unwrap();
            for s in 0..base.len() {
                assert_eq!(po.p1.image(f.image(s)), po.p2.image(g.image(s)));
            }
            let h = random_fcc_from(&po.proset, &mut rng);
            let m = pushout_mediating(&po, &po.p1.then(&h).unwrap(), &po.p2.then(&h).unwrap()).unwrap();
            assert_eq!(m, h);
        }
    }

    #[test]
    fn coequalizer_examples() {
        let two = arc(Proset::chain(2));
        let one = arc(Proset::chain(1));
        let id = FccMap::identity(&two);
        let co = coequalizer(&id, &id).unwrap();
        assert_eq!(*co.proset, Proset::chain(2));
        let c0 = validate_fcc(&one, &two, vec![0]).unwrap();
        let c1 = validate_fcc(&one, &two, vec![1]).unwrap();
        let co = coequalizer(&c0, &c1).unwrap();
        assert_eq!(co.proset.len(), 1);
        assert!(matches!(coequalizer(&c0, &id), Err(Error::NotParallel)));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r = equalizer_check(&c0, &c1, CoeffRing::PrimeField(2), 5, &mut rng).unwrap();
        assert!(r.passes());
    }

    #[test]
    fn coequalizer_can_create_relations() {
        // gluing the top of one chain to the bottom of another adds a
        // relation with no preimage, so M[p] has a kernel
        let one = arc(Proset::chain(1));
        let co = coproduct(&[arc(Proset::chain(2)), arc(Proset::chain(2))]);
        let f1 = validate_fcc(&one, &co.proset, vec![1]).unwrap();
        let f2 = validate_fcc(&one, &co.proset, vec![2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = equalizer_check(&f1, &f2, CoeffRing::PrimeField(2), 5, &mut rng).unwrap();
        assert!(r.equalizes);
        assert!(!r.injective);
        assert_eq!(r.kernel_relations, vec![("1:0".to_string(), "2:1".to_string())]);
    }

    #[test]
    fn window_direct_limits() {
        for fam in [ProsetFamily::N, ProsetFamily::Zig, ProsetFamily::Z] {
            let ws = fam.windows(4).unwrap();
            let r = direct_limit_window_check(&fam, &ws).unwrap();
            assert!(r.holds(), "{fam:?} {r:?}");
        }
    }

    #[test]
    fn generation() {
        let t = generation_decompose(&Proset::chain(3)).unwrap();
        match &t {
            GenerationTree::Pushout { alpha, left, right } => {
                assert_eq!(alpha.leaves(), 1);
                assert_eq!(left.leaves() + right.leaves(), 2);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(generation_decompose(&Proset::two_block(2, 3)).unwrap(), GenerationTree::Leaf { .. }));
        assert_eq!(generation_decompose(&Proset::discrete(2)), Err(Error::NotIrreducible));
        for n in 1..=4 {
            for p in prosets_up_to_iso(n).into_iter().filter(Proset::is_irreducible) {
                let t = generation_decompose(&p).unwrap();
                assert!(same_by_names(&t.reassemble().unwrap(), &p), "{p:?}");
            }
        }
    }
}
