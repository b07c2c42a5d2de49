use super::Proset;

type Signature = (usize, usize, usize);

fn signature(p: &Proset, x: usize) -> Signature {
    let n = p.len();
    let down = (0..n).filter(|&y| p.leq(y, x)).count();
    let up = (0..n).filter(|&y| p.leq(x, y)).count();
    (down, up, p.classes()[p.class_of(x)].len())
}

pub(super) fn find_isomorphism(a: &Proset, b: &Proset) -> Option<Vec<usize>> {
    let n = a.len();
    if n != b.len() {
        return None;
    }
    let sa: Vec<Signature> = (0..n).map(|x| signature(a, x)).collect();
    let sb: Vec<Signature> = (0..n).map(|x| signature(b, x)).collect();
    let mut ca = sa.clone();
    let mut cb = sb.clone();
    ca.sort_unstable();
    cb.sort_unstable();
    if ca != cb {
        return None;
    }
    let candidates: Vec<Vec<usize>> =
        (0..n).map(|x| (0..n).filter(|&y| sa[x] == sb[y]).collect()).collect();
    // most constrained first, then elements with many relations
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| (candidates[x].len(), std::cmp::Reverse(sa[x].0 + sa[x].1), x));
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if search(a, b, &order, 0, &candidates, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

fn search(
    a: &Proset,
    b: &Proset,
    order: &[usize],
    depth: usize,
    candidates: &[Vec<usize>],
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let x = order[depth];
    for &y in &candidates[x] {
        if used[y] {
            continue;
        }
        let consistent = order[..depth].iter().all(|&x2| {
            let y2 = map[x2];
            a.leq(x, x2) == b.leq(y, y2) && a.leq(x2, x) == b.leq(y2, y)
        });
        if !consistent {
            continue;
        }
        map[x] = y;
        used[y] = true;
        if search(a, b, order, depth + 1, candidates, map, used) {
            return true;
        }
        map[x] = usize::MAX;
        used[y] = false;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn relabeled_chain() {
        let a = Proset::chain(2);
        let b = Proset::new(vec!["x".into(), "y".into()], &[(1, 0)]).unwrap();
        assert_eq!(a.poset_isomorphic(&b), Some(vec![1, 0]));
        assert_eq!(a.poset_isomorphic(&Proset::discrete(2)), None);
    }

    #[test]
    fn four_element_posets_pairwise() {
        let all = posets_up_to_iso(4);
        assert_eq!(all.len(), 16);
        for (i, p) in all.iter().enumerate() {
            for (j, q) in all.iter().enumerate() {
                let found = p.poset_isomorphic(q);
                assert_eq!(found.is_some(), i == j, "{i} {j}");
                if let Some(f) = found {
                    for x in 0..4 {
                        for y in 0..4 {
                            assert_eq!(p.leq(x, y), q.leq(f[x], f[y]));
                        }
                    }
                }
            }
        }
    }
}
