//! Finite preordered sets and infinite locally finite families.

mod enumerate;
mod family;
mod iso;

use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::cmp::Reverse;

pub use enumerate::{posets_up_to_iso, prosets_up_to_iso};
pub use family::{CustomFamily, ProsetFamily};

use crate::error::{Error, Result};

/// A finite preordered set. Elements are addressed by index; names are opaque
/// identifiers used only for input and output.
#[derive(Debug, Clone)]
pub struct Proset {
    names: Vec<String>,
    index: HashMap<String, usize>,
    leq: Vec<bool>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    component_of: Vec<usize>,
    components: Vec<Vec<usize>>,
}

impl PartialEq for Proset {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.leq == other.leq
    }
}

impl Eq for Proset {}

impl Proset {
    /// Builds the reflexive-transitive closure of `relations` over `names`.
    pub fn new(names: Vec<String>, relations: &[(usize, usize)]) -> Result<Self> {
        let n = names.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(a, b) in relations {
            if a >= n || b >= n {
                return Err(Error::InvalidProset(format!("relation ({a}, {b}) out of range")));
            }
            leq[a * n + b] = true;
        }
        Self::from_closed_or_not(names, leq)
    }

    /// Builds a proset from element names and named generating pairs.
    pub fn from_named(names: Vec<String>, relations: &[(String, String)]) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, s) in names.iter().enumerate() {
            index.insert(s.as_str(), i);
        }
        let look = |s: &String| index.get(s.as_str()).copied().ok_or_else(|| Error::UnknownElement(s.clone()));
        let rel = relations
            .iter()
            .map(|(a, b)| Ok((look(a)?, look(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, &rel)
    }

    /// Builds a proset from a relation predicate, closing it if necessary.
    pub fn from_fn(names: Vec<String>, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let n = names.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                leq[i * n + j] = i == j || f(i, j);
            }
        }
        Self::from_closed_or_not(names, leq)
    }

    fn from_closed_or_not(names: Vec<String>, mut leq: Vec<bool>) -> Result<Self> {
        let n = names.len();
        let mut index = HashMap::with_capacity(n);
        for (i, s) in names.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidProset(format!("duplicate element {s:?}")));
            }
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        let mut class_of = vec![usize::MAX; n];
        let mut classes = Vec::new();
        for i in 0..n {
            if class_of[i] == usize::MAX {
                let c: Vec<usize> = (i..n).filter(|&j| leq[i * n + j] && leq[j * n + i]).collect();
                for &j in &c {
                    class_of[j] = classes.len();
                }
                classes.push(c);
            }
        }
        let mut component_of = vec![usize::MAX; n];
        let mut components = Vec::new();
        for i in 0..n {
            if component_of[i] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut part = vec![i];
            component_of[i] = id;
            let mut queue = VecDeque::from([i]);
            while let Some(x) = queue.pop_front() {
                for y in 0..n {
                    if component_of[y] == usize::MAX && (leq[x * n + y] || leq[y * n + x]) {
                        component_of[y] = id;
                        part.push(y);
                        queue.push_back(y);
                    }
                }
            }
            part.sort_unstable();
            components.push(part);
        }
        Ok(Proset { names, index, leq, class_of, classes, component_of, components })
    }

    fn numbered(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    /// The chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        Self::from_fn(Self::numbered(n), |i, j| i <= j).expect("valid chain")
    }

    /// The discrete order on `n` elements.
    pub fn discrete(n: usize) -> Self {
        Self::from_fn(Self::numbered(n), |_, _| false).expect("valid antichain")
    }

    /// A random preorder on `n` elements: each pair `i < j` is related with
    /// probability `density`, and for prosets each reverse pair too.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, density: f64, poset: bool, rng: &mut R) -> Self {
        let mut rel = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(density) {
                    rel.push((i, j));
                }
                if !poset && rng.gen_bool(density / 2.0) {
                    rel.push((j, i));
                }
            }
        }
        Self::new(Self::numbered(n), &rel).expect("indices in range")
    }

    /// `n` elements forming a single equivalence class.
    pub fn full(n: usize) -> Self {
        Self::from_fn(Self::numbered(n), |_, _| true).expect("valid block")
    }

    /// An `m`-element class above an `n`-element class. Elements `0..m` form
    /// the upper block and `m..m+n` the lower one.
    pub fn two_block(m: usize, n: usize) -> Self {
        Self::from_fn(Self::numbered(m + n), |i, j| (i < m) == (j < m) || (i >= m && j < m))
            .expect("valid two-block")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.len() + b]
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    /// All pairs `(a, b)` with `a ⪯ b`, in lexicographic order.
    pub fn relations(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|a| (0..n).filter(move |&b| self.leq(a, b)).map(move |b| (a, b))).collect()
    }

    /// Relations with the reflexive and within-class pairs removed, reduced to
    /// covering pairs of the class order; enough to regenerate the proset.
    pub fn generating_relations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for c in &self.classes {
            for w in c.windows(2) {
                out.push((w[0], w[1]));
                out.push((w[1], w[0]));
            }
        }
        let k = self.classes.len();
        for c1 in 0..k {
            for c2 in 0..k {
                if c1 == c2 || !self.class_leq(c1, c2) {
                    continue;
                }
                let covered = (0..k).any(|c| {
                    c != c1 && c != c2 && self.class_leq(c1, c) && self.class_leq(c, c2)
                });
                if !covered {
                    out.push((self.classes[c1][0], self.classes[c2][0]));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn interval(&self, a: usize, b: usize) -> Vec<usize> {
        if !self.leq(a, b) {
            return Vec::new();
        }
        (0..self.len()).filter(|&s| self.leq(a, s) && self.leq(s, b)).collect()
    }

    /// `N_n(s)`: `N_0` is the class of `s`, each further step adds all
    /// comparable elements.
    pub fn neighborhood(&self, s: usize, n: usize) -> Vec<usize> {
        let mut cur: BTreeSet<usize> = self.classes[self.class_of[s]].iter().copied().collect();
        for _ in 0..n {
            let next: BTreeSet<usize> =
                (0..self.len()).filter(|&t| cur.iter().any(|&u| self.comparable(t, u))).collect();
            if next == cur {
                break;
            }
            cur = next;
        }
        cur.into_iter().collect()
    }

    pub fn class_of(&self, s: usize) -> usize {
        self.class_of[s]
    }

    /// Equivalence classes, ordered by smallest member.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_leq(&self, c1: usize, c2: usize) -> bool {
        self.leq(self.classes[c1][0], self.classes[c2][0])
    }

    /// A linear extension of the class order. Ties go to the class with the
    /// smallest member so the result is reproducible.
    pub fn class_linear_extension(&self) -> Vec<usize> {
        let k = self.classes.len();
        let mut indeg = vec![0usize; k];
        for c1 in 0..k {
            for c2 in 0..k {
                if c1 != c2 && self.class_leq(c1, c2) {
                    indeg[c2] += 1;
                }
            }
        }
        let mut heap: BinaryHeap<Reverse<usize>> = (0..k).filter(|&c| indeg[c] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(k);
        while let Some(Reverse(c)) = heap.pop() {
            order.push(c);
            for c2 in 0..k {
                if c2 != c && self.class_leq(c, c2) {
                    indeg[c2] -= 1;
                    if indeg[c2] == 0 {
                        heap.push(Reverse(c2));
                    }
                }
            }
        }
        order
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn component_of(&self, s: usize) -> usize {
        self.component_of[s]
    }

    pub fn is_poset(&self) -> bool {
        self.classes.len() == self.len()
    }

    pub fn is_irreducible(&self) -> bool {
        self.components.len() == 1
    }

    pub fn is_z_like(&self) -> bool {
        (0..self.len()).all(|a| (0..self.len()).all(|b| self.comparable(a, b)))
    }

    pub fn is_n_bounded(&self, n: usize) -> bool {
        (0..self.len()).all(|s| (0..self.len()).filter(|&t| self.comparable(s, t)).count() <= n)
    }

    pub fn opposite(&self) -> Proset {
        Self::from_fn(self.names.clone(), |a, b| self.leq(b, a)).expect("opposite of a valid proset")
    }

    /// The induced sub-proset on `subset` (sorted, duplicates removed).
    pub fn restrict(&self, subset: &[usize]) -> Proset {
        let mut idx: Vec<usize> = subset.to_vec();
        idx.sort_unstable();
        idx.dedup();
        let names = idx.iter().map(|&i| self.names[i].clone()).collect();
        Self::from_fn(names, |a, b| self.leq(idx[a], idx[b])).expect("restriction of a valid proset")
    }

    /// Renames elements; the order is untouched.
    pub fn relabel(&self, names: Vec<String>) -> Result<Proset> {
        if names.len() != self.len() {
            return Err(Error::InvalidProset("wrong number of names".into()));
        }
        Self::from_fn(names, |a, b| self.leq(a, b))
    }

    fn is_interval_closed(&self, member: &[bool]) -> bool {
        let n = self.len();
        for a in 0..n {
            if !member[a] {
                continue;
            }
            for b in 0..n {
                if member[b] && self.leq(a, b) {
                    if (0..n).any(|s| !member[s] && self.leq(a, s) && self.leq(s, b)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn connected_parts(&self, set: &[usize]) -> Vec<Vec<usize>> {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut parts = Vec::new();
        for &s in set {
            if !seen.insert(s) {
                continue;
            }
            let mut part = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &y in set {
                    if !seen.contains(&y) && self.comparable(x, y) {
                        seen.insert(y);
                        part.push(y);
                        queue.push_back(y);
                    }
                }
            }
            part.sort_unstable();
            parts.push(part);
        }
        parts
    }

    /// Closed under intervals and connected through comparable pairs. The
    /// empty set counts as convex.
    pub fn is_convex(&self, subset: &[usize]) -> bool {
        let mut member = vec![false; self.len()];
        for &s in subset {
            member[s] = true;
        }
        let set: Vec<usize> = (0..self.len()).filter(|&s| member[s]).collect();
        self.is_interval_closed(&member) && self.connected_parts(&set).len() <= 1
    }

    /// A convex superset of `subset`. The interval closure comes first; when
    /// it is disconnected, shortest comparability paths are added until it
    /// connects. The result is the least convex superset whenever the
    /// interval closure is already connected.
    pub fn convex_closure(&self, subset: &[usize]) -> Result<Vec<usize>> {
        let mut cur: BTreeSet<usize> = subset.iter().copied().collect();
        let Some(&first) = cur.iter().next() else {
            return Ok(Vec::new());
        };
        let comp = self.component_of(first);
        if cur.iter().any(|&s| self.component_of(s) != comp) {
            return Err(Error::NotConnected);
        }
        loop {
            let base: Vec<usize> = cur.iter().copied().collect();
            for &a in &base {
                for &b in &base {
                    if self.leq(a, b) {
                        cur.extend(self.interval(a, b));
                    }
                }
            }
            let set: Vec<usize> = cur.iter().copied().collect();
            let parts = self.connected_parts(&set);
            if parts.len() <= 1 {
                return Ok(set);
            }
            let path = self.shortest_path(&parts[0], &cur);
            cur.extend(path);
        }
    }

    /// Interior of a shortest comparability path from `from` to any element of
    /// `targets` outside `from`.
    fn shortest_path(&self, from: &[usize], targets: &BTreeSet<usize>) -> Vec<usize> {
        let n = self.len();
        let mut prev = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &s in from {
            seen[s] = true;
            queue.push_back(s);
        }
        while let Some(x) = queue.pop_front() {
            for y in 0..n {
                if seen[y] || !self.comparable(x, y) {
                    continue;
                }
                seen[y] = true;
                prev[y] = x;
                if targets.contains(&y) {
                    let mut path = Vec::new();
                    let mut z = prev[y];
                    while prev[z] != usize::MAX {
                        path.push(z);
                        z = prev[z];
                    }
                    return path;
                }
                queue.push_back(y);
            }
        }
        Vec::new()
    }

    /// All nonempty convex subsets with at most `bound` elements, each sorted,
    /// listed by size and then lexicographically.
    pub fn gamma_enumerate(&self, bound: usize) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.len()).collect();
        let mut out: Vec<Vec<usize>> = self
            .connected_subsets(&all, bound)
            .into_iter()
            .filter(|s| self.is_convex(s))
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// All comparability-connected subsets of `nodes` with at most `max`
    /// elements, each produced once.
    pub fn connected_subsets(&self, nodes: &[usize], max: usize) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut allowed = vec![false; n];
        for &v in nodes {
            allowed[v] = true;
        }
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|x| (0..n).filter(|&y| y != x && allowed[y] && self.comparable(x, y)).collect())
            .collect();
        let mut out = Vec::new();
        if max == 0 {
            return out;
        }
        let mut roots: Vec<usize> = nodes.to_vec();
        roots.sort_unstable();
        roots.dedup();
        for &v in &roots {
            let ext: Vec<usize> = adj[v].iter().copied().filter(|&u| u > v).collect();
            let mut in_sub = vec![false; n];
            in_sub[v] = true;
            extend_subgraph(&adj, &mut vec![v], &mut in_sub, ext, v, max, &mut out);
        }
        out
    }

    /// Whether `self` and `other` are isomorphic as preordered sets; returns
    /// the bijection as `map[i] = image of i` when they are.
    pub fn poset_isomorphic(&self, other: &Proset) -> Option<Vec<usize>> {
        iso::find_isomorphism(self, other)
    }

    /// `Λ + ΣS_i`: the least preorder containing `⪯` that makes each set a
    /// single class.
    pub fn augment(&self, sets: &[Vec<usize>]) -> Result<Proset> {
        let mut owner = vec![usize::MAX; self.len()];
        let mut rel = self.relations();
        for (k, set) in sets.iter().enumerate() {
            for &s in set {
                if s >= self.len() {
                    return Err(Error::InvalidProset(format!("element index {s} out of range")));
                }
                if owner[s] != usize::MAX && owner[s] != k {
                    return Err(Error::OverlappingAugmentation(self.names[s].clone()));
                }
                owner[s] = k;
            }
            for w in set.windows(2) {
                rel.push((w[0], w[1]));
                rel.push((w[1], w[0]));
            }
        }
        Self::new(self.names.clone(), &rel)
    }
}

/// ESU-style enumeration of connected induced subgraphs rooted at `root`.
fn extend_subgraph(
    adj: &[Vec<usize>],
    sub: &mut Vec<usize>,
    in_sub: &mut [bool],
    mut ext: Vec<usize>,
    root: usize,
    max: usize,
    out: &mut Vec<Vec<usize>>,
) {
    let mut sorted = sub.clone();
    sorted.sort_unstable();
    out.push(sorted);
    if sub.len() == max {
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in &adj[w] {
            if u <= root || in_sub[u] || next.contains(&u) {
                continue;
            }
            let near_sub = sub.iter().any(|&x| adj[x].contains(&u));
            if !near_sub {
                next.push(u);
            }
        }
        sub.push(w);
        in_sub[w] = true;
        extend_subgraph(adj, sub, in_sub, next, root, max, out);
        sub.pop();
        in_sub[w] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn union_2_3() -> Proset {
        let names = ["0", "1", "0'", "1'", "2'"].iter().map(|s| s.to_string()).collect();
        Proset::new(names, &[(0, 1), (2, 3), (3, 4)]).unwrap()
    }

    #[test]
    fn closure_and_classes() {
        let p = Proset::new(Proset::numbered(4), &[(0, 1), (1, 2), (2, 1), (2, 3)]).unwrap();
        assert!(p.leq(0, 3));
        assert_eq!(p.classes(), &[vec![0], vec![1, 2], vec![3]]);
        assert!(!p.is_poset());
        assert_eq!(p.interval(0, 3), vec![0, 1, 2, 3]);
        assert_eq!(p.interval(3, 0), Vec::<usize>::new());
        assert_eq!(p.neighborhood(1, 0), vec![1, 2]);
        assert_eq!(p.class_linear_extension(), vec![0, 1, 2]);
    }

    #[test]
    fn rejects_duplicates_and_unknowns() {
        assert!(Proset::new(vec!["a".into(), "a".into()], &[]).is_err());
        assert!(Proset::from_named(vec!["a".into()], &[("a".into(), "b".into())]).is_err());
    }

    #[test]
    fn components_of_union() {
        let p = union_2_3();
        assert_eq!(p.components(), &[vec![0, 1], vec![2, 3, 4]]);
        assert_eq!(Proset::discrete(3).components().len(), 3);
    }

    #[test]
    fn convexity() {
        let c4 = Proset::chain(4);
        assert!(!c4.is_convex(&[0, 2]));
        assert_eq!(c4.convex_closure(&[0, 2]).unwrap(), vec![0, 1, 2]);
        assert_eq!(c4.convex_closure(&[1, 2]).unwrap(), vec![1, 2]);
        assert_eq!(union_2_3().convex_closure(&[0, 2]), Err(Error::NotConnected));
        // V shape 1 > 0 < 2: {1, 2} needs the bottom to connect
        let v = Proset::new(Proset::numbered(3), &[(0, 1), (0, 2)]).unwrap();
        assert!(!v.is_convex(&[1, 2]));
        assert_eq!(v.convex_closure(&[1, 2]).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn gamma_of_chain() {
        assert_eq!(Proset::chain(2).gamma_enumerate(2), vec![vec![0], vec![1], vec![0, 1]]);
        // convex subsets of a chain are its intervals
        assert_eq!(Proset::chain(5).gamma_enumerate(5).len(), 15);
    }

    #[test]
    fn gamma_matches_subset_scan() {
        let p = Proset::new(Proset::numbered(5), &[(0, 1), (0, 2), (1, 3), (2, 3), (4, 2)]).unwrap();
        let mut scan = Vec::new();
        for mask in 1u32..32 {
            let s: Vec<usize> = (0..5).filter(|i| mask >> i & 1 == 1).collect();
            if p.is_convex(&s) {
                scan.push(s);
            }
        }
        scan.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        assert_eq!(p.gamma_enumerate(5), scan);
    }

    #[test]
    fn predicates() {
        assert!(Proset::chain(3).is_z_like());
        assert!(Proset::two_block(2, 1).is_z_like());
        assert!(!union_2_3().is_z_like());
        assert!(Proset::chain(2).is_n_bounded(2));
        assert!(!Proset::chain(3).is_n_bounded(2));
        assert!(Proset::chain(2).opposite().poset_isomorphic(&Proset::chain(2)).is_some());
    }

    #[test]
    fn two_block_orientation() {
        let p = Proset::two_block(2, 1);
        assert!(p.leq(2, 0) && p.leq(2, 1) && !p.leq(0, 2));
        assert_eq!(p.classes().len(), 2);
        assert_eq!(Proset::two_block(3, 0).classes().len(), 1);
    }

    #[test]
    fn augmentation() {
        let c = Proset::chain(3);
        let a = c.augment(&[vec![0, 2]]).unwrap();
        assert_eq!(a.classes(), &[vec![0, 1, 2]]);
        assert_eq!(c.augment(&[]).unwrap(), c);
        assert_eq!(
            c.augment(&[vec![0, 1], vec![1, 2]]),
            Err(Error::OverlappingAugmentation("1".into()))
        );
    }

    #[test]
    fn generating_relations_regenerate() {
        let p = Proset::new(Proset::numbered(5), &[(0, 1), (1, 0), (1, 2), (2, 3), (4, 3)]).unwrap();
        let q = Proset::new(p.names().to_vec(), &p.generating_relations()).unwrap();
        assert_eq!(p, q);
    }

    fn arb_proset() -> impl Strategy<Value = Proset> {
        (1usize..7).prop_flat_map(|n| {
            prop::collection::vec((0..n, 0..n), 0..(2 * n)).prop_map(move |rel| {
                Proset::new(Proset::numbered(n), &rel).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn structural_invariants(p in arb_proset()) {
            let n = p.len();
            // closure idempotence
            let again = Proset::new(p.names().to_vec(), &p.relations()).unwrap();
            prop_assert_eq!(&again, &p);
            // components are irreducible and independent
            for (i, c) in p.components().iter().enumerate() {
                prop_assert!(p.restrict(c).is_irreducible());
                for d in &p.components()[i + 1..] {
                    for &a in c { for &b in d { prop_assert!(!p.comparable(a, b)); } }
                }
            }
            prop_assert_eq!(p.components().iter().map(Vec::len).sum::<usize>(), n);
            // opposite is an involution
            prop_assert_eq!(p.opposite().opposite(), p.clone());
            // intervals live in the first neighborhood
            for a in 0..n { for b in 0..n {
                let iv = p.interval(a, b);
                let nb = p.neighborhood(a, 1);
                prop_assert!(iv.iter().all(|s| nb.contains(s)));
            }}
            // convex closure is convex and idempotent within a component
            for c in p.components() {
                let seed: Vec<usize> = c.iter().copied().step_by(2).collect();
                let cl = p.convex_closure(&seed).unwrap();
                prop_assert!(p.is_convex(&cl));
                prop_assert_eq!(p.convex_closure(&cl).unwrap(), cl);
            }
            // augmenting a poset by a set of size two leaves the posets
            if p.is_poset() && n >= 2 {
                prop_assert!(!p.augment(&[vec![0, 1]]).unwrap().is_poset());
            }
        }
    }
}
