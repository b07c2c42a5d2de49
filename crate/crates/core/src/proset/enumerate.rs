//! Isomorphism-type enumeration of small posets and prosets.

use std::collections::BTreeMap;

use super::Proset;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Smallest relation bitmask over all relabelings, with the relabeling that
/// attains it.
fn canonical(leq: &dyn Fn(usize, usize) -> bool, n: usize, perms: &[Vec<usize>]) -> u64 {
    perms
        .iter()
        .map(|p| {
            let mut code = 0u64;
            for i in 0..n {
                for j in 0..n {
                    code = code << 1 | leq(p[i], p[j]) as u64;
                }
            }
            code
        })
        .min()
        .unwrap_or(0)
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// One representative of every isomorphism type of poset on `n ≤ 6`
/// elements, in a fixed order.
pub fn posets_up_to_iso(n: usize) -> Vec<Proset> {
    assert!(n <= 6, "enumeration is limited to six elements");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let perms = permutations(n);
    let mut seen: BTreeMap<u64, Proset> = BTreeMap::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let mut rel = vec![false; n * n];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            rel[i * n + j] = mask >> k & 1 == 1;
        }
        // natural labelings: the strict relation must already be transitive
        let closed = (0..n).all(|i| {
            (0..n).all(|j| !rel[i * n + j] || (0..n).all(|k| !rel[j * n + k] || rel[i * n + k]))
        });
        if !closed {
            continue;
        }
        let leq = |a: usize, b: usize| a == b || rel[a * n + b];
        let code = canonical(&leq, n, &perms);
        seen.entry(code).or_insert_with(|| Proset::from_fn(names(n), leq).expect("valid poset"));
    }
    seen.into_values().collect()
}

/// One representative of every isomorphism type of preorder on `n ≤ 6`
/// elements.
pub fn prosets_up_to_iso(n: usize) -> Vec<Proset> {
    assert!(n <= 6, "enumeration is limited to six elements");
    let perms = permutations(n);
    let mut seen: BTreeMap<u64, Proset> = BTreeMap::new();
    for k in 1..=n {
        for skeleton in posets_up_to_iso(k) {
            for sizes in compositions(n, k) {
                let mut class = Vec::with_capacity(n);
                for (c, &s) in sizes.iter().enumerate() {
                    class.extend(std::iter::repeat(c).take(s));
                }
                let leq = |a: usize, b: usize| skeleton.leq(class[a], class[b]);
                let code = canonical(&leq, n, &perms);
                seen.entry(code).or_insert_with(|| Proset::from_fn(names(n), leq).expect("valid proset"));
            }
        }
    }
    if n == 0 {
        seen.insert(0, Proset::discrete(0));
    }
    seen.into_values().collect()
}

fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(k - 1) {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_counts() {
        let posets: Vec<usize> = (0..=5).map(|n| posets_up_to_iso(n).len()).collect();
        assert_eq!(posets, [1, 1, 2, 5, 16, 63]);
        let prosets: Vec<usize> = (0..=5).map(|n| prosets_up_to_iso(n).len()).collect();
        assert_eq!(prosets, [1, 1, 3, 9, 33, 139]);
    }
}
