//! Finite fields GF(pⁿ) in the power basis of a monic irreducible modulus.
//!
//! Elements are coefficient vectors `c₀ + c₁t + … + cₙ₋₁tⁿ⁻¹` (constant term
//! first). Every element also has a *rank*, the base-`p` integer with `c₀` as
//! the most significant digit, so rank order is lexicographic order on
//! coefficient vectors. Ranks are how the rest of the crate indexes coordinates
//! of ℂ^(pⁿ).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{self, inv_mod, is_prime};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NonPrime(u32),
    #[error("modulus {0:?} is reducible over Z_{1}")]
    ReduciblePolynomial(Vec<u32>, u32),
    #[error("modulus must be monic of degree {expected}, got coefficient list of length {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("no self-dual basis exists for GF({p}^{n})")]
    NoSelfDualBasis { p: u32, n: usize },
    #[error("malformed value table: {0}")]
    MalformedTable(String),
    #[error("cannot parse field line: {0}")]
    Parse(String),
}

#[derive(Debug)]
struct FieldData {
    p: u32,
    n: usize,
    modulus: Vec<u32>,
    order: usize,
    /// T(tⁱ) for the power basis.
    trace_of_basis: Vec<u32>,
}

/// GF(pⁿ) = ℤ_p[t]/(modulus). Cheap to clone.
#[derive(Clone, Debug)]
pub struct Field(Arc<FieldData>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }
}

impl Eq for Field {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GFElement {
    field: Field,
    coeffs: Vec<u32>,
}

impl std::hash::Hash for GFElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

fn poly_mul_mod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let n = modulus.len() - 1;
    let pm = p as u64;
    let mut prod = vec![0u64; 2 * n.max(1)];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % pm;
        }
    }
    // Reduce using the monic modulus: tⁿ = -(c₀ + … + cₙ₋₁tⁿ⁻¹).
    for k in (n..prod.len()).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for (i, &m) in modulus[..n].iter().enumerate() {
            let idx = k - n + i;
            prod[idx] = (prod[idx] + (pm - c) * m as u64) % pm;
        }
    }
    prod.truncate(n);
    prod.resize(n, 0);
    prod.into_iter().map(|x| x as u32).collect()
}

/// Remainder of `a` modulo the monic `d` over ℤ_p (coefficients constant-first).
fn poly_rem(a: &[u32], d: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    let dd = d.len() - 1;
    while r.len() > dd {
        let c = *r.last().unwrap();
        let shift = r.len() - 1 - dd;
        if c != 0 {
            for (i, &x) in d.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - c) * x % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Brute-force irreducibility: no monic factor of degree 1..=n/2 divides.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let n = modulus.len() - 1;
    if n <= 1 {
        return n == 1;
    }
    for d in 1..=n / 2 {
        let count = (p as usize).pow(d as u32);
        for r in 0..count {
            let mut cand = linalg::digits(r, p, d);
            cand.push(1);
            if poly_rem(modulus, &cand, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// GF(pⁿ) with the given modulus, or the lexicographically smallest monic
    /// irreducible (constant-first coefficient order) when `modulus` is `None`.
    pub fn new(p: u32, n: usize, modulus: Option<&[u32]>) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::NonPrime(p));
        }
        if n == 0 {
            return Err(GfError::DegreeMismatch { expected: 1, got: 0 });
        }
        let modulus = match modulus {
            Some(m) => {
                if m.len() != n + 1 || m[n] != 1 {
                    return Err(GfError::DegreeMismatch { expected: n, got: m.len().saturating_sub(1) });
                }
                let m: Vec<u32> = m.iter().map(|&c| c % p).collect();
                if !is_irreducible(&m, p) {
                    return Err(GfError::ReduciblePolynomial(m, p));
                }
                m
            }
            None => {
                let count = (p as usize).pow(n as u32);
                (0..count)
                    .map(|r| {
                        let mut m = linalg::digits(r, p, n);
                        m.push(1);
                        m
                    })
                    .find(|m| is_irreducible(m, p))
                    .expect("irreducible polynomials exist in every degree")
            }
        };
        let order = (p as usize).pow(n as u32);
        let trace_of_basis = (0..n)
            .map(|i| {
                let mut c = vec![0u32; n];
                c[i] = 1;
                frobenius_trace(&c, &modulus, p)
            })
            .collect();
        let data = FieldData { p, n, modulus, order, trace_of_basis };
        Ok(Field(Arc::new(data)))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn zero(&self) -> GFElement {
        GFElement { field: self.clone(), coeffs: vec![0; self.n()] }
    }

    pub fn one(&self) -> GFElement {
        self.from_int(1)
    }

    pub fn from_int(&self, k: i64) -> GFElement {
        let mut coeffs = vec![0; self.n()];
        coeffs[0] = k.rem_euclid(self.p() as i64) as u32;
        GFElement { field: self.clone(), coeffs }
    }

    /// The class of `t` (for n = 1 this is `-c₀`).
    pub fn t(&self) -> GFElement {
        let n = self.n();
        if n == 1 {
            return self.from_int(-(self.0.modulus[0] as i64));
        }
        let mut coeffs = vec![0; n];
        coeffs[1] = 1;
        GFElement { field: self.clone(), coeffs }
    }

    pub fn element(&self, coeffs: &[u32]) -> Result<GFElement, GfError> {
        if coeffs.len() != self.n() {
            return Err(GfError::DegreeMismatch { expected: self.n(), got: coeffs.len() });
        }
        Ok(GFElement { field: self.clone(), coeffs: coeffs.iter().map(|&c| c % self.p()).collect() })
    }

    pub fn from_rank(&self, rank: usize) -> GFElement {
        GFElement { field: self.clone(), coeffs: linalg::digits(rank % self.order(), self.p(), self.n()) }
    }

    /// All elements in rank order.
    pub fn elements(&self) -> impl Iterator<Item = GFElement> + '_ {
        (0..self.order()).map(move |r| self.from_rank(r))
    }

    pub fn rank_add(&self, a: usize, b: usize) -> usize {
        let (p, n) = (self.p(), self.n());
        linalg::rank_of(&linalg::add(&linalg::digits(a, p, n), &linalg::digits(b, p, n), p), p)
    }

    pub fn rank_sub(&self, a: usize, b: usize) -> usize {
        let (p, n) = (self.p(), self.n());
        linalg::rank_of(&linalg::sub(&linalg::digits(a, p, n), &linalg::digits(b, p, n), p), p)
    }

    /// Gram matrix of the trace form on the power basis: `G[i][j] = T(tⁱ tʲ)`.
    pub fn trace_gram(&self) -> Vec<Vec<u32>> {
        let basis: Vec<GFElement> = (0..self.n()).map(|i| self.basis_vector(i)).collect();
        basis
            .iter()
            .map(|a| basis.iter().map(|b| a.mul_unchecked(b).trace()).collect())
            .collect()
    }

    pub fn basis_vector(&self, i: usize) -> GFElement {
        let mut c = vec![0; self.n()];
        c[i] = 1;
        GFElement { field: self.clone(), coeffs: c }
    }

    /// Precomputed value table `rank(x) -> rank(g(x))`.
    pub fn table(&self, g: impl Fn(&GFElement) -> GFElement) -> Vec<usize> {
        self.elements().map(|x| g(&x).rank()).collect()
    }
}

/// Σⱼ x^(pʲ) on a raw coefficient vector.
fn frobenius_trace(x: &[u32], modulus: &[u32], p: u32) -> u32 {
    let n = modulus.len() - 1;
    let mut acc = vec![0u32; n];
    let mut term = x.to_vec();
    for _ in 0..n {
        acc = linalg::add(&acc, &term, p);
        let mut pow = {
            let mut one = vec![0u32; n];
            one[0] = 1;
            one
        };
        for _ in 0..p {
            pow = poly_mul_mod(&pow, &term, modulus, p);
        }
        term = pow;
    }
    debug_assert!(acc[1..].iter().all(|&c| c == 0), "trace lies in the prime field");
    acc[0]
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.modulus().iter().map(u32::to_string).collect();
        write!(f, "FIELD p={} n={} modulus={}", self.p(), self.n(), m.join(","))
    }
}

impl FromStr for Field {
    type Err = GfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut toks = s.split_whitespace();
        if toks.next() != Some("FIELD") {
            return Err(GfError::Parse(s.to_string()));
        }
        let mut p = None;
        let mut n = None;
        let mut modulus = None;
        for tok in toks {
            let (k, v) = tok.split_once('=').ok_or_else(|| GfError::Parse(tok.to_string()))?;
            let bad = || GfError::Parse(tok.to_string());
            match k {
                "p" => p = Some(v.parse::<u32>().map_err(|_| bad())?),
                "n" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
                "modulus" => {
                    modulus = Some(
                        v.split(',')
                            .map(|c| c.parse::<u32>().map_err(|_| bad()))
                            .collect::<Result<Vec<_>, _>>()?,
                    )
                }
                _ => return Err(bad()),
            }
        }
        match (p, n, modulus) {
            (Some(p), Some(n), Some(m)) => Field::new(p, n, Some(&m)),
            _ => Err(GfError::Parse(s.to_string())),
        }
    }
}

impl GFElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn rank(&self) -> usize {
        linalg::rank_of(&self.coeffs, self.field.p())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn check(&self, other: &GFElement) -> Result<(), GfError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(GfError::FieldMismatch)
        }
    }

    pub fn add(&self, other: &GFElement) -> Result<GFElement, GfError> {
        self.check(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &GFElement) -> Result<GFElement, GfError> {
        self.check(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn mul(&self, other: &GFElement) -> Result<GFElement, GfError> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &GFElement) -> GFElement {
        let p = self.field.p();
        GFElement { field: self.field.clone(), coeffs: linalg::add(&self.coeffs, &other.coeffs, p) }
    }

    pub(crate) fn sub_unchecked(&self, other: &GFElement) -> GFElement {
        let p = self.field.p();
        GFElement { field: self.field.clone(), coeffs: linalg::sub(&self.coeffs, &other.coeffs, p) }
    }

    pub(crate) fn mul_unchecked(&self, other: &GFElement) -> GFElement {
        let coeffs = poly_mul_mod(&self.coeffs, &other.coeffs, self.field.modulus(), self.field.p());
        GFElement { field: self.field.clone(), coeffs }
    }

    pub fn neg(&self) -> GFElement {
        self.field.zero().sub_unchecked(self)
    }

    pub fn scale(&self, k: u32) -> GFElement {
        let p = self.field.p();
        GFElement { field: self.field.clone(), coeffs: linalg::scale(&self.coeffs, k % p, p) }
    }

    /// `self^e`; negative exponents go through the inverse.
    pub fn pow(&self, e: i64) -> Result<GFElement, GfError> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let mut base = self.clone();
        let mut acc = self.field.one();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn inv(&self) -> Result<GFElement, GfError> {
        if self.is_zero() {
            return Err(GfError::DivisionByZero);
        }
        self.pow(self.field.order() as i64 - 2)
    }

    pub fn div(&self, other: &GFElement) -> Result<GFElement, GfError> {
        self.check(other)?;
        Ok(self.mul_unchecked(&other.inv()?))
    }

    /// x ↦ x^(p^j); `j` is taken mod n.
    pub fn frobenius(&self, j: i64) -> GFElement {
        let n = self.field.n() as i64;
        let j = j.rem_euclid(n) as u32;
        let e = (self.field.p() as i64).pow(j);
        self.pow(e).expect("non-negative exponent")
    }

    /// Absolute trace to ℤ_p via the precomputed traces of the power basis.
    pub fn trace(&self) -> u32 {
        let p = self.field.p();
        linalg::dot(&self.coeffs, &self.field.0.trace_of_basis, p)
    }

    /// T(x) = Σⱼ x^(pʲ), evaluated literally.
    pub fn trace_by_frobenius(&self) -> u32 {
        let mut acc = self.field.zero();
        let mut term = self.clone();
        for _ in 0..self.field.n() {
            acc = acc.add_unchecked(&term);
            term = term.pow(self.field.p() as i64).expect("non-negative exponent");
        }
        debug_assert!(acc.coeffs[1..].iter().all(|&c| c == 0), "trace lies in the prime field");
        acc.coeffs[0]
    }
}

/// An ℤ_p-basis of GF(pⁿ) together with its trace-form Gram matrix.
#[derive(Clone, Debug)]
pub struct Basis {
    pub field: Field,
    pub vectors: Vec<GFElement>,
    pub gram: Vec<Vec<u32>>,
}

impl Basis {
    pub fn new(field: &Field, vectors: Vec<GFElement>) -> Self {
        let gram = vectors
            .iter()
            .map(|a| vectors.iter().map(|b| a.mul_unchecked(b).trace()).collect())
            .collect();
        Basis { field: field.clone(), vectors, gram }
    }

    pub fn is_self_dual(&self) -> bool {
        self.gram == linalg::identity(self.vectors.len())
    }

    /// Coordinates of `x` in this basis when it is self-dual: `cᵢ = T(x bᵢ)`.
    pub fn dual_coordinates(&self, x: &GFElement) -> Vec<u32> {
        self.vectors.iter().map(|b| x.mul_unchecked(b).trace()).collect()
    }

    /// Σ cᵢ bᵢ.
    pub fn combine(&self, coords: &[u32]) -> GFElement {
        self.vectors
            .iter()
            .zip(coords)
            .fold(self.field.zero(), |acc, (b, &c)| acc.add_unchecked(&b.scale(c)))
    }
}

fn sqrt_mod(a: u32, p: u32) -> Option<u32> {
    (0..p).find(|&x| (x as u64 * x as u64 % p as u64) as u32 == a % p)
}

/// Self-dual basis (`T(bᵢbⱼ) = δᵢⱼ`) by symmetric congruence reduction of the
/// trace form, starting from the power basis.
pub fn self_dual_basis(field: &Field) -> Result<Basis, GfError> {
    let p = field.p();
    let form = |a: &GFElement, b: &GFElement| a.mul_unchecked(b).trace();
    let mut remaining: Vec<GFElement> = (0..field.n()).map(|i| field.basis_vector(i)).collect();
    let none = || GfError::NoSelfDualBasis { p, n: field.n() };

    if p == 2 {
        let mut done: Vec<GFElement> = Vec::new();
        while !remaining.is_empty() {
            if let Some(i) = remaining.iter().position(|r| form(r, r) == 1) {
                let w = remaining.remove(i);
                for r in remaining.iter_mut() {
                    if form(r, &w) == 1 {
                        *r = r.add_unchecked(&w);
                    }
                }
                done.push(w);
                continue;
            }
            // Remaining span is alternating: split off a hyperbolic pair and
            // merge it with an orthonormal vector already found.
            let (i, j) = (0..remaining.len())
                .flat_map(|i| (i + 1..remaining.len()).map(move |j| (i, j)))
                .find(|&(i, j)| form(&remaining[i], &remaining[j]) == 1)
                .ok_or_else(none)?;
            let y = remaining.remove(j);
            let x = remaining.remove(i);
            for r in remaining.iter_mut() {
                let (bx, by) = (form(r, &x), form(r, &y));
                if by == 1 {
                    *r = r.add_unchecked(&x);
                }
                if bx == 1 {
                    *r = r.add_unchecked(&y);
                }
            }
            let u = done.pop().ok_or_else(none)?;
            let ux = u.add_unchecked(&x);
            let uy = u.add_unchecked(&y);
            let uxy = ux.add_unchecked(&y);
            done.extend([ux, uy, uxy]);
        }
        let basis = Basis::new(field, done);
        return if basis.is_self_dual() { Ok(basis) } else { Err(none()) };
    }

    // Odd p: diagonalize, then normalize squares and pair up non-squares.
    let mut diag: Vec<(GFElement, u32)> = Vec::new();
    while !remaining.is_empty() {
        let i = match remaining.iter().position(|r| form(r, r) != 0) {
            Some(i) => i,
            None => {
                let (i, j) = (0..remaining.len())
                    .flat_map(|i| (i + 1..remaining.len()).map(move |j| (i, j)))
                    .find(|&(i, j)| form(&remaining[i], &remaining[j]) != 0)
                    .ok_or_else(none)?;
                remaining[i] = remaining[i].add_unchecked(&remaining[j]);
                i
            }
        };
        let w = remaining.remove(i);
        let d = form(&w, &w);
        let d_inv = inv_mod(d, p).expect("nonzero diagonal");
        for r in remaining.iter_mut() {
            let c = (form(r, &w) as u64 * d_inv as u64 % p as u64) as u32;
            if c != 0 {
                *r = r.sub_unchecked(&w.scale(c));
            }
        }
        diag.push((w, d));
    }
    let mut out = Vec::new();
    let mut pending: Option<(GFElement, u32)> = None;
    for (w, d) in diag {
        if let Some(s) = sqrt_mod(d, p) {
            out.push(w.scale(inv_mod(s, p).expect("nonzero root")));
            continue;
        }
        match pending.take() {
            None => pending = Some((w, d)),
            Some((w1, d1)) => {
                let (x, y) = (0..p)
                    .flat_map(|x| (0..p).map(move |y| (x, y)))
                    .find(|&(x, y)| (d1 as u64 * x as u64 * x as u64 + d as u64 * y as u64 * y as u64) % p as u64 == 1)
                    .expect("a binary form over a finite field represents 1");
                let u1 = w1.scale(x).add_unchecked(&w.scale(y));
                let u2 = w1.scale((p - d * y % p) % p).add_unchecked(&w.scale(d1 * x % p));
                let s = sqrt_mod((d1 as u64 * d as u64 % p as u64) as u32, p).expect("product of non-squares is a square");
                out.push(u1);
                out.push(u2.scale(inv_mod(s, p).expect("nonzero root")));
            }
        }
    }
    if pending.is_some() {
        return Err(none());
    }
    let basis = Basis::new(field, out);
    if basis.is_self_dual() {
        Ok(basis)
    } else {
        Err(none())
    }
}

/// Outcome of the planarity test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Planarity {
    pub planar: bool,
    /// `(a, b, count)` by rank: the equation `f(x+a) - f(x) = b` has `count != 1` solutions.
    pub counterexample: Option<(usize, usize, usize)>,
}

/// Brute-force planarity of `f` given as a rank table `values[rank(x)] = rank(f(x))`.
pub fn is_planar(field: &Field, values: &[usize]) -> Result<Planarity, GfError> {
    let q = field.order();
    if values.len() != q {
        return Err(GfError::MalformedTable(format!("expected {q} entries, got {}", values.len())));
    }
    if let Some(v) = values.iter().find(|&&v| v >= q) {
        return Err(GfError::MalformedTable(format!("value {v} out of range")));
    }
    let (p, n) = (field.p(), field.n());
    let digit_table: Vec<Vec<u32>> = (0..q).map(|r| linalg::digits(r, p, n)).collect();
    let add = |a: usize, b: usize| linalg::rank_of(&linalg::add(&digit_table[a], &digit_table[b], p), p);
    let sub = |a: usize, b: usize| linalg::rank_of(&linalg::sub(&digit_table[a], &digit_table[b], p), p);
    let mut counts = vec![0usize; q];
    for a in 1..q {
        counts.iter_mut().for_each(|c| *c = 0);
        for x in 0..q {
            counts[sub(values[add(x, a)], values[x])] += 1;
        }
        if let Some(b) = counts.iter().position(|&c| c != 1) {
            return Ok(Planarity { planar: false, counterexample: Some((a, b, counts[b])) });
        }
    }
    Ok(Planarity { planar: true, counterexample: None })
}
