//! Infinite locally finite prosets addressed by integer element identifiers.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use super::Proset;
use crate::error::{Error, Result};

type LeqFn = dyn Fn(i64, i64) -> bool + Send + Sync;
type IntervalFn = dyn Fn(i64, i64) -> Box<dyn Iterator<Item = i64>> + Send + Sync;
type NeighborFn = dyn Fn(i64) -> Option<Vec<i64>> + Send + Sync;

/// A user-supplied family. The interval enumerator is consumed lazily and cut
/// off at `budget` elements, so a non-terminating enumerator surfaces as an
/// error instead of a hang.
#[derive(Clone)]
pub struct CustomFamily {
    pub name: String,
    pub budget: usize,
    leq: Arc<LeqFn>,
    interval: Arc<IntervalFn>,
    neighbors: Option<Arc<NeighborFn>>,
}

impl CustomFamily {
    pub const DEFAULT_BUDGET: usize = 1_000_000;

    pub fn new(
        name: impl Into<String>,
        leq: impl Fn(i64, i64) -> bool + Send + Sync + 'static,
        interval: impl Fn(i64, i64) -> Box<dyn Iterator<Item = i64>> + Send + Sync + 'static,
    ) -> Self {
        CustomFamily {
            name: name.into(),
            budget: Self::DEFAULT_BUDGET,
            leq: Arc::new(leq),
            interval: Arc::new(interval),
            neighbors: None,
        }
    }

    /// Supplies `N_1`; returning `None` marks an infinite neighborhood.
    pub fn with_neighbors(mut self, f: impl Fn(i64) -> Option<Vec<i64>> + Send + Sync + 'static) -> Self {
        self.neighbors = Some(Arc::new(f));
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }
}

impl fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFamily").field("name", &self.name).field("budget", &self.budget).finish()
    }
}

impl PartialEq for CustomFamily {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.leq, &other.leq) && self.budget == other.budget
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Augmentation {
    base: ProsetFamily,
    sets: Vec<Vec<i64>>,
    /// `reach[i][j]`: set `j` is reachable from set `i` through base relations.
    reach: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProsetFamily {
    N,
    Z,
    Zig,
    NStarDiv,
    /// Upper block `0..m`, lower block `m..m+n`.
    TwoBlock(usize, usize),
    /// A finite proset; element `i` is the index `i`.
    Finite(Arc<Proset>),
    Augmented(Arc<Augmentation>),
    Custom(CustomFamily),
}

fn divisors(k: i64) -> Vec<i64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1i64;
    while d * d <= k {
        if k % d == 0 {
            small.push(d);
            if d * d != k {
                large.push(k / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

impl ProsetFamily {
    pub fn finite(p: Proset) -> Self {
        ProsetFamily::Finite(Arc::new(p))
    }

    /// `Λ + ΣS_i`. Empty sets are dropped.
    pub fn augment(base: ProsetFamily, sets: Vec<Vec<i64>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut clean = Vec::new();
        for set in sets {
            let mut set: Vec<i64> = set.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
            for &s in &set {
                if !base.contains(s) {
                    return Err(Error::UnknownElement(base.element_name(s)));
                }
                if !seen.insert(s) {
                    return Err(Error::OverlappingAugmentation(base.element_name(s)));
                }
            }
            set.sort_unstable();
            if !set.is_empty() {
                clean.push(set);
            }
        }
        if clean.is_empty() {
            return Ok(base);
        }
        let k = clean.len();
        let mut reach = vec![vec![false; k]; k];
        for i in 0..k {
            for j in 0..k {
                reach[i][j] =
                    i == j || clean[i].iter().any(|&q| clean[j].iter().any(|&t| base.leq(q, t)));
            }
        }
        for m in 0..k {
            for i in 0..k {
                for j in 0..k {
                    if reach[i][m] && reach[m][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        Ok(ProsetFamily::Augmented(Arc::new(Augmentation { base, sets: clean, reach })))
    }

    pub fn contains(&self, x: i64) -> bool {
        match self {
            ProsetFamily::N => x >= 0,
            ProsetFamily::Z | ProsetFamily::Zig | ProsetFamily::Custom(_) => true,
            ProsetFamily::NStarDiv => x >= 1,
            ProsetFamily::TwoBlock(m, n) => x >= 0 && (x as usize) < m + n,
            ProsetFamily::Finite(p) => x >= 0 && (x as usize) < p.len(),
            ProsetFamily::Augmented(a) => a.base.contains(x),
        }
    }

    pub fn element_name(&self, x: i64) -> String {
        match self {
            ProsetFamily::Finite(p) if self.contains(x) => p.name(x as usize).to_string(),
            ProsetFamily::Augmented(a) => a.base.element_name(x),
            _ => x.to_string(),
        }
    }

    pub fn parse_element(&self, s: &str) -> Result<i64> {
        let x = match self {
            ProsetFamily::Finite(p) => p.index_of(s)? as i64,
            ProsetFamily::Augmented(a) => return a.base.parse_element(s),
            _ => s.trim().parse().map_err(|_| Error::UnknownElement(s.to_string()))?,
        };
        if self.contains(x) {
            Ok(x)
        } else {
            Err(Error::UnknownElement(s.to_string()))
        }
    }

    pub fn leq(&self, a: i64, b: i64) -> bool {
        if !self.contains(a) || !self.contains(b) {
            return false;
        }
        match self {
            ProsetFamily::N | ProsetFamily::Z => a <= b,
            ProsetFamily::Zig => a == b || (a.rem_euclid(2) == 0 && (b - a).abs() == 1),
            ProsetFamily::NStarDiv => b % a == 0,
            ProsetFamily::TwoBlock(m, _) => {
                let top = |x: i64| (x as usize) < *m;
                top(a) == top(b) || !top(a)
            }
            ProsetFamily::Finite(p) => p.leq(a as usize, b as usize),
            ProsetFamily::Augmented(aug) => aug.leq(a, b),
            ProsetFamily::Custom(c) => (c.leq)(a, b),
        }
    }

    /// `[a, b]` in increasing identifier order; empty when `a ⋠ b`.
    pub fn interval(&self, a: i64, b: i64) -> Result<Vec<i64>> {
        if !self.leq(a, b) {
            return Ok(Vec::new());
        }
        Ok(match self {
            ProsetFamily::N | ProsetFamily::Z => (a..=b).collect(),
            ProsetFamily::Zig => {
                let mut v = vec![a, b];
                v.sort_unstable();
                v.dedup();
                v
            }
            ProsetFamily::NStarDiv => divisors(b / a).into_iter().map(|d| a * d).collect(),
            ProsetFamily::TwoBlock(m, n) => {
                (0..(m + n) as i64).filter(|&s| self.leq(a, s) && self.leq(s, b)).collect()
            }
            ProsetFamily::Finite(p) => p.interval(a as usize, b as usize).into_iter().map(|x| x as i64).collect(),
            ProsetFamily::Augmented(aug) => aug.interval(a, b)?,
            ProsetFamily::Custom(c) => {
                let mut out = BTreeSet::new();
                for s in (c.interval)(a, b) {
                    if out.len() >= c.budget {
                        return Err(Error::LocalFinitenessBudgetExceeded { budget: c.budget });
                    }
                    out.insert(s);
                }
                out.into_iter().collect()
            }
        })
    }

    /// `N_1(s)`, or `InfiniteNeighborhood`.
    pub fn neighborhood1(&self, s: i64) -> Result<Vec<i64>> {
        let infinite = || Error::InfiniteNeighborhood(self.element_name(s));
        match self {
            ProsetFamily::N | ProsetFamily::Z | ProsetFamily::NStarDiv => Err(infinite()),
            ProsetFamily::Zig => Ok(vec![s - 1, s, s + 1]),
            ProsetFamily::TwoBlock(m, n) => Ok((0..(m + n) as i64).collect()),
            ProsetFamily::Finite(p) => Ok(p.neighborhood(s as usize, 1).into_iter().map(|x| x as i64).collect()),
            ProsetFamily::Augmented(aug) => {
                let mut cand: BTreeSet<i64> = aug.base.neighborhood1(s)?.into_iter().collect();
                for set in &aug.sets {
                    for &u in set {
                        cand.extend(aug.base.neighborhood1(u)?);
                    }
                }
                Ok(cand.into_iter().filter(|&t| self.leq(s, t) || self.leq(t, s)).collect())
            }
            ProsetFamily::Custom(c) => {
                let f = c.neighbors.as_ref().ok_or_else(infinite)?;
                let mut v = f(s).ok_or_else(infinite)?;
                v.sort_unstable();
                v.dedup();
                Ok(v)
            }
        }
    }

    /// `N_n(s)` with `N_0(s)` the class of `s`.
    pub fn neighborhood(&self, s: i64, n: usize) -> Result<Vec<i64>> {
        let n1 = self.neighborhood1(s)?;
        let mut cur: BTreeSet<i64> = n1.iter().copied().filter(|&t| self.leq(t, s) && self.leq(s, t)).collect();
        for _ in 0..n {
            let mut next = cur.clone();
            for &t in &cur {
                next.extend(self.neighborhood1(t)?);
            }
            if next == cur {
                break;
            }
            cur = next;
        }
        Ok(cur.into_iter().collect())
    }

    /// Union of the intervals between elements of `set`, together with `set`.
    /// One pass is enough: `[x, y] ⊆ [a, b]` whenever `a ⪯ x ⪯ y ⪯ b`.
    pub fn interval_closure(&self, set: &[i64]) -> Result<Vec<i64>> {
        let mut out: BTreeSet<i64> = set.iter().copied().collect();
        for &a in set {
            for &b in set {
                if a != b && self.leq(a, b) {
                    out.extend(self.interval(a, b)?);
                }
            }
        }
        // classes are intervals [s, s]
        for &a in set {
            out.extend(self.interval(a, a)?);
        }
        Ok(out.into_iter().collect())
    }

    pub fn is_convex(&self, set: &[i64]) -> Result<bool> {
        let members: BTreeSet<i64> = set.iter().copied().collect();
        if self.interval_closure(set)?.len() != members.len() {
            return Ok(false);
        }
        let Some(&start) = members.iter().next() else {
            return Ok(true);
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in &members {
                if !seen.contains(&y) && (self.leq(x, y) || self.leq(y, x)) {
                    seen.insert(y);
                    queue.push_back(y);
                }
            }
        }
        Ok(seen.len() == members.len())
    }

    /// The finite proset induced on `elements`, named by `element_name`.
    pub fn materialize(&self, elements: &[i64]) -> Result<Proset> {
        for &x in elements {
            if !self.contains(x) {
                return Err(Error::UnknownElement(x.to_string()));
            }
        }
        let names = elements.iter().map(|&x| self.element_name(x)).collect();
        Proset::from_fn(names, |i, j| self.leq(elements[i], elements[j]))
    }

    /// A cofinal chain of finite convex windows, the first `count` of them.
    /// `None` when the family carries no exhaustion.
    pub fn windows(&self, count: usize) -> Option<Vec<Vec<i64>>> {
        let out: Vec<Vec<i64>> = match self {
            ProsetFamily::N => (0..count as i64).map(|k| (0..=k).collect()).collect(),
            ProsetFamily::Z | ProsetFamily::Zig => (0..count as i64).map(|k| (-k..=k).collect()).collect(),
            ProsetFamily::NStarDiv => {
                let mut out: Vec<Vec<i64>> = Vec::new();
                let mut l = 1i64;
                let mut k = 1i64;
                while out.len() < count {
                    l = num_integer::lcm(l, k);
                    k += 1;
                    let d = divisors(l);
                    if out.last().map_or(true, |w| w.len() != d.len()) {
                        out.push(d);
                    }
                }
                out
            }
            ProsetFamily::TwoBlock(m, n) => vec![(0..(m + n) as i64).collect()],
            ProsetFamily::Finite(p) => vec![(0..p.len() as i64).collect()],
            ProsetFamily::Augmented(aug) => {
                let extra: Vec<i64> = aug.sets.iter().flatten().copied().collect();
                let mut n = count.max(1);
                loop {
                    let ws = aug.base.windows(n)?;
                    let exhausted = ws.len() < n;
                    let out: Vec<Vec<i64>> = ws
                        .into_iter()
                        .filter(|w| extra.iter().all(|e| w.contains(e)))
                        .take(count)
                        .collect();
                    if out.len() == count || exhausted || n > 1 << 16 {
                        break out;
                    }
                    n *= 2;
                }
            }
            ProsetFamily::Custom(_) => return None,
        };
        Some(out)
    }

    pub fn is_poset(&self) -> bool {
        match self {
            ProsetFamily::N | ProsetFamily::Z | ProsetFamily::Zig | ProsetFamily::NStarDiv => true,
            ProsetFamily::TwoBlock(m, n) => *m <= 1 && *n <= 1,
            ProsetFamily::Finite(p) => p.is_poset(),
            ProsetFamily::Augmented(a) => a.base.is_poset() && a.sets.iter().all(|s| s.len() <= 1),
            ProsetFamily::Custom(_) => false,
        }
    }

    /// Answered analytically for the built-in kinds: totality of the order.
    pub fn is_z_like(&self) -> bool {
        match self {
            ProsetFamily::N | ProsetFamily::Z | ProsetFamily::TwoBlock(..) => true,
            ProsetFamily::Zig | ProsetFamily::NStarDiv | ProsetFamily::Custom(_) => false,
            ProsetFamily::Finite(p) => p.is_z_like(),
            ProsetFamily::Augmented(a) => match &a.base {
                ProsetFamily::Finite(_) => {
                    let ids: Vec<i64> = self.windows(1).expect("finite").remove(0);
                    self.materialize(&ids).map(|p| p.is_z_like()).unwrap_or(false)
                }
                base => base.is_z_like(),
            },
        }
    }
}

impl Augmentation {
    pub fn base(&self) -> &ProsetFamily {
        &self.base
    }

    pub fn sets(&self) -> &[Vec<i64>] {
        &self.sets
    }

    fn leq(&self, a: i64, b: i64) -> bool {
        if self.base.leq(a, b) {
            return true;
        }
        let k = self.sets.len();
        let from: Vec<bool> = (0..k).map(|i| self.sets[i].iter().any(|&t| self.base.leq(a, t))).collect();
        let to: Vec<bool> = (0..k).map(|j| self.sets[j].iter().any(|&q| self.base.leq(q, b))).collect();
        (0..k).any(|i| from[i] && (0..k).any(|j| to[j] && self.reach[i][j]))
    }

    /// Every element of `[a, b]₊` lies in a base interval whose endpoints are
    /// `a`, `b` or members of the added sets.
    fn interval(&self, a: i64, b: i64) -> Result<Vec<i64>> {
        let mut lows = vec![a];
        let mut highs = vec![b];
        for s in self.sets.iter().flatten() {
            lows.push(*s);
            highs.push(*s);
        }
        let mut cand = BTreeSet::new();
        for &x in &lows {
            for &y in &highs {
                cand.extend(self.base.interval(x, y)?);
            }
        }
        Ok(cand.into_iter().filter(|&s| self.leq(a, s) && self.leq(s, b)).collect())
    }
}
