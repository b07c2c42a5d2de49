//! Dense square matrices over a coefficient ring, used for class-diagonal
//! blocks.

use crate::ring::{CoeffRing, RingValue};

pub type Dense = Vec<Vec<RingValue>>;

pub fn identity(ring: CoeffRing, n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| if i == j { ring.one() } else { ring.zero() }).collect()).collect()
}

pub fn mul(ring: CoeffRing, a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(ring.zero(), |acc, t| ring.add(&acc, &ring.mul(&a[i][t], &b[t][j]))))
                .collect()
        })
        .collect()
}

pub fn det(ring: CoeffRing, a: &Dense) -> RingValue {
    if ring.is_field() {
        if let Some(d) = det_elimination(ring, a) {
            return d;
        }
    }
    det_expansion(ring, a)
}

/// Division-free determinant: a dynamic program over the set of used columns,
/// `O(n·2^n)` ring operations.
fn det_expansion(ring: CoeffRing, a: &Dense) -> RingValue {
    let n = a.len();
    let mut f = vec![ring.zero(); 1 << n];
    f[0] = ring.one();
    for mask in 0usize..(1 << n) {
        if ring.is_zero(&f[mask]) {
            continue;
        }
        let row = mask.count_ones() as usize;
        if row == n {
            continue;
        }
        for j in 0..n {
            if mask >> j & 1 == 1 || ring.is_zero(&a[row][j]) {
                continue;
            }
            let mut term = ring.mul(&f[mask], &a[row][j]);
            if (mask >> (j + 1)).count_ones() % 2 == 1 {
                term = ring.neg(&term);
            }
            let next = mask | 1 << j;
            f[next] = ring.add(&f[next], &term);
        }
    }
    f[(1 << n) - 1].clone()
}

/// Gaussian elimination; only valid when every nonzero pivot is invertible.
fn det_elimination(ring: CoeffRing, a: &Dense) -> Option<RingValue> {
    let n = a.len();
    let mut m = a.clone();
    let mut d = ring.one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !ring.is_zero(&m[r][col])) else {
            return Some(ring.zero());
        };
        if p != col {
            m.swap(p, col);
            d = ring.neg(&d);
        }
        let inv = ring.inv(&m[col][col])?;
        d = ring.mul(&d, &m[col][col]);
        for r in col + 1..n {
            if ring.is_zero(&m[r][col]) {
                continue;
            }
            let factor = ring.mul(&m[r][col], &inv);
            for c in col..n {
                let t = ring.mul(&factor, &m[col][c]);
                m[r][c] = ring.sub(&m[r][c], &t);
            }
        }
    }
    Some(d)
}

fn minor(a: &Dense, skip_r: usize, skip_c: usize) -> Dense {
    a.iter()
        .enumerate()
        .filter(|&(r, _)| r != skip_r)
        .map(|(_, row)| row.iter().enumerate().filter(|&(c, _)| c != skip_c).map(|(_, v)| v.clone()).collect())
        .collect()
}

/// `adj(A)`, so that `A·adj(A) = adj(A)·A = det(A)·I`.
pub fn adjugate(ring: CoeffRing, a: &Dense) -> Dense {
    let n = a.len();
    if n == 1 {
        return vec![vec![ring.one()]];
    }
    let mut out = vec![vec![ring.zero(); n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let c = det(ring, &minor(a, j, i));
            *cell = if (i + j) % 2 == 0 { c } else { ring.neg(&c) };
        }
    }
    out
}

/// `det(A)⁻¹·adj(A)`, or `None` when the determinant is not a unit.
pub fn inverse(ring: CoeffRing, a: &Dense) -> Option<Dense> {
    if ring.is_field() {
        return inverse_elimination(ring, a);
    }
    let d = ring.inv(&det(ring, a))?;
    Some(adjugate(ring, a).into_iter().map(|row| row.iter().map(|v| ring.mul(&d, v)).collect()).collect())
}

fn inverse_elimination(ring: CoeffRing, a: &Dense) -> Option<Dense> {
    let n = a.len();
    let mut m = a.clone();
    let mut inv = identity(ring, n);
    for col in 0..n {
        let p = (col..n).find(|&r| !ring.is_zero(&m[r][col]))?;
        m.swap(p, col);
        inv.swap(p, col);
        let pivot = ring.inv(&m[col][col])?;
        for c in 0..n {
            m[col][c] = ring.mul(&m[col][c], &pivot);
            inv[col][c] = ring.mul(&inv[col][c], &pivot);
        }
        for r in 0..n {
            if r == col || ring.is_zero(&m[r][col]) {
                continue;
            }
            let factor = m[r][col].clone();
            for c in 0..n {
                let t = ring.mul(&factor, &m[col][c]);
                m[r][c] = ring.sub(&m[r][c], &t);
                let t = ring.mul(&factor, &inv[col][c]);
                inv[r][c] = ring.sub(&inv[r][c], &t);
            }
        }
    }
    Some(inv)
}

/// A basis of the null space `{x : M x = 0}` over `Z/p`, `p` prime.
pub fn kernel_mod_p(mut rows: Vec<Vec<u64>>, cols: usize, p: u64) -> Vec<Vec<u64>> {
    let inv = |a: u64| pow_mod(a, p - 2, p);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(found) = (r..rows.len()).find(|&i| rows[i][c] != 0) else { continue };
        rows.swap(r, found);
        let k = inv(rows[r][c]);
        for v in rows[r].iter_mut() {
            *v = *v * k % p;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..cols {
                    rows[i][j] = (rows[i][j] + p - f * rows[r][j] % p) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut x = vec![0u64; cols];
            x[fc] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                x[pc] = (p - rows[i][fc]) % p;
            }
            x
        })
        .collect()
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random(ring: CoeffRing, n: usize, rng: &mut ChaCha8Rng) -> Dense {
        (0..n).map(|_| (0..n).map(|_| ring.random(rng)).collect()).collect()
    }

    #[test]
    fn small_determinants() {
        let r = CoeffRing::Integer;
        let a = vec![vec![r.from_i64(2), r.from_i64(3)], vec![r.from_i64(5), r.from_i64(7)]];
        assert_eq!(det(r, &a), r.from_i64(-1));
        assert_eq!(inverse(r, &a).unwrap(), vec![vec![r.from_i64(-7), r.from_i64(3)], vec![r.from_i64(5), r.from_i64(-2)]]);
        assert_eq!(det(r, &vec![]), r.one());
    }

    #[test]
    fn adjugate_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for ring in [CoeffRing::ModN(12), CoeffRing::Integer, CoeffRing::PrimeField(7), CoeffRing::Rational] {
            for n in 1..6 {
                for _ in 0..20 {
                    let a = random(ring, n, &mut rng);
                    let d = det(ring, &a);
                    let scaled: Dense = identity(ring, n)
                        .into_iter()
                        .map(|row| row.iter().map(|v| ring.mul(v, &d)).collect())
                        .collect();
                    let adj = adjugate(ring, &a);
                    assert_eq!(mul(ring, &a, &adj), scaled);
                    assert_eq!(mul(ring, &adj, &a), scaled);
                    match inverse(ring, &a) {
                        Some(inv) => assert_eq!(mul(ring, &a, &inv), identity(ring, n)),
                        None => assert!(!ring.is_unit(&d)),
                    }
                }
            }
        }
    }

    #[test]
    fn elimination_agrees_with_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ring = CoeffRing::PrimeField(5);
        for n in 1..7 {
            for _ in 0..20 {
                let a = random(ring, n, &mut rng);
                let expanded = det_expansion(ring, &a);
                assert_eq!(det(ring, &a), expanded);
            }
        }
    }

    #[test]
    fn kernel_dimension() {
        // x + y + z = 0 over F_3
        let k = kernel_mod_p(vec![vec![1, 1, 1]], 3, 3);
        assert_eq!(k.len(), 2);
        for v in k {
            assert_eq!(v.iter().sum::<u64>() % 3, 0);
        }
    }
}
