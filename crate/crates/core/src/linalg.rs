//! Dense linear algebra over the prime field ℤ_p.
//!
//! Vectors and matrices are plain `Vec<u32>` / `Vec<Vec<u32>>` with entries in
//! `[0, p)`. Everything here is exact; `p` is assumed prime and small enough
//! that `(p - 1)^2 + p` fits in a `u64`.
//!
//! Vectors of ℤ_pⁿ are also addressed by *rank*: the base-`p` integer whose
//! most significant digit is coordinate 0. Rank order therefore coincides with
//! lexicographic order on coordinate vectors.

/// Multiplicative inverse of `a` modulo the prime `p`. Returns `None` for 0.
pub fn inv_mod(a: u32, p: u32) -> Option<u32> {
    let a = a % p;
    if a == 0 {
        return None;
    }
    Some(pow_mod(a, p - 2, p))
}

pub fn pow_mod(base: u32, mut exp: u32, p: u32) -> u32 {
    let m = p as u64;
    let mut b = base as u64 % m;
    let mut acc = 1u64 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u32
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Writes `n = p^k` as `Some(k)`; `None` when `n` is not a power of `p`.
pub fn log_exact(n: usize, p: u32) -> Option<usize> {
    if n == 0 {
        return None;
    }
    let mut k = 0;
    let mut m = n;
    while m.is_multiple_of(p as usize) {
        m /= p as usize;
        k += 1;
    }
    (m == 1).then_some(k)
}

/// The prime `p` with `n = p^k`, `k ≥ 1`.
pub fn prime_of_power(n: usize) -> Option<u32> {
    if n < 2 {
        return None;
    }
    let mut d = 2usize;
    while d * d <= n {
        if n.is_multiple_of(d) {
            break;
        }
        d += 1;
    }
    let p = if n.is_multiple_of(d) { d } else { n };
    log_exact(n, p as u32).map(|_| p as u32)
}

pub fn digits(rank: usize, p: u32, n: usize) -> Vec<u32> {
    let mut out = vec![0u32; n];
    let mut r = rank;
    for i in (0..n).rev() {
        out[i] = (r % p as usize) as u32;
        r /= p as usize;
    }
    out
}

pub fn rank_of(v: &[u32], p: u32) -> usize {
    v.iter().fold(0usize, |acc, &c| acc * p as usize + c as usize)
}

pub fn dot(a: &[u32], b: &[u32], p: u32) -> u32 {
    debug_assert_eq!(a.len(), b.len());
    let s: u64 = a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum();
    (s % p as u64) as u32
}

pub fn add(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| (x + y) % p).collect()
}

pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| (x + p - y) % p).collect()
}

pub fn scale(a: &[u32], s: u32, p: u32) -> Vec<u32> {
    a.iter().map(|&x| ((x as u64 * s as u64) % p as u64) as u32).collect()
}

pub fn mat_vec(m: &[Vec<u32>], v: &[u32], p: u32) -> Vec<u32> {
    m.iter().map(|row| dot(row, v, p)).collect()
}

pub fn mat_mul(a: &[Vec<u32>], b: &[Vec<u32>], p: u32) -> Vec<Vec<u32>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let s: u64 = row.iter().zip(b).map(|(&x, r)| x as u64 * r[j] as u64).sum();
                    (s % p as u64) as u32
                })
                .collect()
        })
        .collect()
}

pub fn transpose(m: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

pub fn identity(n: usize) -> Vec<Vec<u32>> {
    (0..n).map(|i| (0..n).map(|j| u32::from(i == j)).collect()).collect()
}

pub fn is_symmetric(m: &[Vec<u32>]) -> bool {
    m.iter()
        .enumerate()
        .all(|(i, row)| row.len() == m.len() && (0..m.len()).all(|j| row[j] == m[j][i]))
}

/// Reduced row echelon form; zero rows are dropped.
pub fn rref(rows: &[Vec<u32>], p: u32) -> Vec<Vec<u32>> {
    let mut m: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|&x| x % p).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut lead = 0usize;
    for c in 0..cols {
        let Some(piv) = (lead..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(lead, piv);
        let inv = inv_mod(m[lead][c], p).expect("nonzero pivot");
        m[lead] = scale(&m[lead], inv, p);
        for r in 0..m.len() {
            if r != lead && m[r][c] != 0 {
                let f = m[r][c];
                let pivot_row = m[lead].clone();
                for (x, &y) in m[r].iter_mut().zip(&pivot_row) {
                    *x = ((*x as u64 + (p - f) as u64 * y as u64) % p as u64) as u32;
                }
            }
        }
        lead += 1;
        if lead == m.len() {
            break;
        }
    }
    m.truncate(lead);
    m
}

pub fn rank(rows: &[Vec<u32>], p: u32) -> usize {
    rref(rows, p).len()
}

pub fn is_nonsingular(m: &[Vec<u32>], p: u32) -> bool {
    rank(m, p) == m.len()
}

/// Inverse of a square matrix, or `None` when singular.
pub fn mat_inverse(m: &[Vec<u32>], p: u32) -> Option<Vec<Vec<u32>>> {
    let n = m.len();
    let aug: Vec<Vec<u32>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| u32::from(i == j)));
            r
        })
        .collect();
    let red = rref(&aug, p);
    if red.len() < n || (0..n).any(|i| red[i][..n] != identity(n)[i][..]) {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `x · m = target` for a row vector `x` when `m` has independent rows.
pub fn solve_row_combination(m: &[Vec<u32>], target: &[u32], p: u32) -> Option<Vec<u32>> {
    // Column system mᵀ x = target.
    let k = m.len();
    let cols = target.len();
    let aug: Vec<Vec<u32>> = (0..cols)
        .map(|j| {
            let mut r: Vec<u32> = m.iter().map(|row| row[j]).collect();
            r.push(target[j] % p);
            r
        })
        .collect();
    let red = rref(&aug, p);
    let mut x = vec![0u32; k];
    for row in &red {
        let lead = row.iter().position(|&v| v != 0)?;
        if lead == k {
            return None;
        }
        x[lead] = row[k];
    }
    // Free variables default to zero; verify.
    let check: Vec<u32> = (0..cols)
        .map(|j| {
            let s: u64 = x.iter().zip(m).map(|(&c, row)| c as u64 * row[j] as u64).sum();
            (s % p as u64) as u32
        })
        .collect();
    (check == target.iter().map(|&t| t % p).collect::<Vec<_>>()).then_some(x)
}

/// Rank over GF(2) of a 0/1 matrix given as packed rows.
pub fn rank_gf2(rows: &mut [Vec<u64>]) -> usize {
    let words = rows.first().map_or(0, Vec::len);
    let mut lead = 0usize;
    for c in 0..words * 64 {
        let (w, bit) = (c / 64, 1u64 << (c % 64));
        let Some(piv) = (lead..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
            continue;
        };
        rows.swap(lead, piv);
        let (head, tail) = rows.split_at_mut(lead + 1);
        let pivot = &head[lead];
        for row in tail.iter_mut() {
            if row[w] & bit != 0 {
                for (x, &y) in row.iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        lead += 1;
        if lead == rows.len() {
            break;
        }
    }
    lead
}

/// Rank over ℤ_p of a byte matrix (forward elimination only).
pub fn rank_bytes(rows: &mut [Vec<u8>], p: u32) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let p16 = p as u16;
    let mut lead = 0usize;
    for c in 0..cols {
        let Some(piv) = (lead..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(lead, piv);
        let inv = inv_mod(rows[lead][c] as u32, p).expect("nonzero pivot") as u16;
        for x in rows[lead].iter_mut() {
            *x = ((*x as u16 * inv) % p16) as u8;
        }
        let (head, tail) = rows.split_at_mut(lead + 1);
        let pivot = &head[lead];
        for row in tail.iter_mut() {
            let f = row[c] as u16;
            if f != 0 {
                let neg = p16 - f;
                for (x, &y) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x = ((*x as u16 + neg * y as u16) % p16) as u8;
                }
            }
        }
        lead += 1;
        if lead == rows.len() {
            break;
        }
    }
    lead
}
