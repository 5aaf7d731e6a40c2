//! The explicit constructions: Desarguesian and Kantor spreads, and the
//! Desarguesian, BKL and planar-function exponent families.
//!
//! Exponent families are kept in trace form. A frame label `b ∈ GF(pⁿ)` gives
//! the exponent table `E_b(a, v) = T(av) + θ_b(v)`, coordinates indexed by
//! power-basis rank. Only `θ_b` depends on the label.

use std::fmt;

use thiserror::Error;

use crate::cyclo::Root;
use crate::geometry::{Subspace, SpreadSet, SymplecticSpread};
use crate::gf::{self, Field, GFElement, GfError};
use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("bad degree: {0}")]
    BadDegree(String),
    #[error("x^{exponent} is not planar over GF(3^{n})")]
    NotPlanar { n: usize, exponent: u64 },
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Family name plus parameters, carried along into files and invariant records.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub family: String,
    pub params: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(family: &str, params: &[(&str, String)]) -> Self {
        Provenance {
            family: family.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "family={}", self.family)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// Matrix of `x ↦ g(x)` in the coordinates `c(x)ᵢ = T(x βᵢ)` of a self-dual basis β.
fn matrix_in_basis(basis: &gf::Basis, g: impl Fn(&GFElement) -> GFElement) -> Vec<Vec<u32>> {
    let n = basis.vectors.len();
    let cols: Vec<Vec<u32>> = basis.vectors.iter().map(|bj| basis.dual_coordinates(&g(bj))).collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// `{matrix of x ↦ mx : m ∈ GF(pⁿ)}` in a self-dual basis, `m` in rank order.
pub fn desarguesian(p: u32, n: usize) -> Result<SpreadSet, FamilyError> {
    if n == 0 {
        return Err(FamilyError::BadParameters("n must be at least 1".into()));
    }
    let field = Field::new(p, n, None)?;
    let basis = gf::self_dual_basis(&field)?;
    let matrices = field.elements().map(|m| matrix_in_basis(&basis, |x| m.mul_unchecked(x))).collect();
    SpreadSet::new(p, n, matrices).map_err(|e| FamilyError::BadParameters(e.to_string()))
}

/// The Kantor spread over GF(2ⁿ): `x = 0` and `y = m²x + mT(x) + T(mx)`, in
/// self-dual coordinates. Members are `0⊕V` followed by the graphs in rank
/// order of `m`.
pub fn kantor_binary(n: usize) -> Result<SymplecticSpread, FamilyError> {
    if n.is_multiple_of(2) || n <= 3 {
        return Err(FamilyError::BadDegree(format!("n must be odd and greater than 3, got {n}")));
    }
    let field = Field::new(2, n, None)?;
    let basis = gf::self_dual_basis(&field)?;
    let mut members = vec![Subspace::vertical(2, n)];
    for m in field.elements() {
        let m2 = m.mul_unchecked(&m);
        let matrix = matrix_in_basis(&basis, |x| {
            let tx = field.from_int(x.trace() as i64);
            let tmx = field.from_int(m.mul_unchecked(x).trace() as i64);
            m2.mul_unchecked(x).add_unchecked(&m.mul_unchecked(&tx)).add_unchecked(&tmx)
        });
        members.push(Subspace::graph(2, &matrix));
    }
    Ok(SymplecticSpread::new(2, n, members))
}

/// Frames `E_b(a, v) = T(av) + θ_b(v)` for `b ∈ GF(pⁿ)`, plus the standard frame.
#[derive(Clone, Debug)]
pub struct ExponentFamily {
    pub field: Field,
    pub provenance: Provenance,
    /// Letter used in frame labels (`m=3`, `b=3`).
    pub label_key: &'static str,
    /// `linear[a·N + v] = T(av)`.
    linear: Vec<u8>,
    /// `theta[b·N + v] = θ_b(v)`.
    theta: Vec<u8>,
    /// `f` as a rank table for planar families.
    pub planar_values: Option<Vec<usize>>,
}

impl ExponentFamily {
    fn build(
        field: Field,
        provenance: Provenance,
        label_key: &'static str,
        theta_of: impl Fn(&GFElement, &GFElement) -> u32,
    ) -> Self {
        let elems: Vec<GFElement> = field.elements().collect();
        let mut linear = Vec::with_capacity(elems.len() * elems.len());
        let mut theta = Vec::with_capacity(elems.len() * elems.len());
        for a in &elems {
            for v in &elems {
                linear.push(a.mul_unchecked(v).trace() as u8);
                theta.push(theta_of(a, v) as u8);
            }
        }
        ExponentFamily { field, provenance, label_key, linear, theta, planar_values: None }
    }

    pub fn root(&self) -> Root {
        Root::Zeta(self.field.p())
    }

    pub fn dim(&self) -> usize {
        self.field.order()
    }

    pub fn label(&self, b: usize) -> String {
        format!("{}={b}", self.label_key)
    }

    pub fn exponent(&self, b: usize, a: usize, v: usize) -> u32 {
        let n = self.dim();
        (self.linear[a * n + v] as u32 + self.theta[b * n + v] as u32) % self.field.p()
    }

    pub fn theta(&self, b: usize) -> &[u8] {
        let n = self.dim();
        &self.theta[b * n..(b + 1) * n]
    }

    /// Row-major exponent table of frame `b`.
    pub fn table(&self, b: usize) -> Vec<u8> {
        let n = self.dim();
        let p = self.field.p() as u8;
        let th = self.theta(b);
        self.linear
            .chunks(n)
            .flat_map(|row| row.iter().zip(th).map(|(&l, &t)| (l + t) % p))
            .collect()
    }

    /// Symmetric `H` with `θ_b(v) = v·Hv/2` on power-basis coordinates, when
    /// `θ_b` is a quadratic form.
    pub fn quadratic_matrix(&self, b: usize) -> Option<Vec<Vec<u32>>> {
        quadratic_matrix_of(self.theta(b), self.field.p(), self.field.n())
    }
}

/// Polarizes `θ` at basis vectors and checks `θ(v) = v·Hv/2` everywhere.
pub fn quadratic_matrix_of(theta: &[u8], p: u32, n: usize) -> Option<Vec<Vec<u32>>> {
    if p == 2 {
        return None;
    }
    let unit = |i: usize| (p as usize).pow((n - 1 - i) as u32);
    let th = |r: usize| theta[r] as u32;
    if th(0) != 0 {
        return None;
    }
    let mut h = vec![vec![0u32; n]; n];
    for i in 0..n {
        h[i][i] = 2 * th(unit(i)) % p;
        for j in 0..n {
            if i != j {
                let s = linalg::rank_of(&linalg::add(&linalg::digits(unit(i), p, n), &linalg::digits(unit(j), p, n), p), p);
                h[i][j] = (th(s) + 2 * p - th(unit(i)) - th(unit(j))) % p;
            }
        }
    }
    let half = linalg::inv_mod(2, p)?;
    for (r, &t) in theta.iter().enumerate() {
        let v = linalg::digits(r, p, n);
        let q = linalg::dot(&v, &linalg::mat_vec(&h, &v, p), p) as u64 * half as u64 % p as u64;
        if q as u32 != t as u32 {
            return None;
        }
    }
    Some(h)
}

fn check_odd_prime(p: u32) -> Result<(), FamilyError> {
    if !linalg::is_prime(p) || p == 2 {
        return Err(FamilyError::BadParameters(format!("p must be an odd prime, got {p}")));
    }
    Ok(())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `E_m(a, x) = T(ax) + T(m x²)/2`.
pub fn desarguesian_exponents(p: u32, n: usize) -> Result<ExponentFamily, FamilyError> {
    check_odd_prime(p)?;
    if n == 0 {
        return Err(FamilyError::BadParameters("n must be at least 1".into()));
    }
    let field = Field::new(p, n, None)?;
    let half = linalg::inv_mod(2, p).expect("p odd");
    let prov = Provenance::new("desarguesian", &[("p", p.to_string()), ("n", n.to_string())]);
    Ok(ExponentFamily::build(field, prov, "m", |m, x| {
        m.mul_unchecked(x).mul_unchecked(x).trace() * half % p
    }))
}

/// `E_b(a, x) = T(ax) + T(b x^(p^(n−s)+1) + b^(p^s) x^(p^s+1))/2`.
pub fn bkl_exponents(p: u32, n: usize, s: usize) -> Result<ExponentFamily, FamilyError> {
    check_odd_prime(p)?;
    if n.is_multiple_of(2) {
        return Err(FamilyError::BadParameters(format!("n must be odd, got {n}")));
    }
    if s == 0 || 2 * s >= n || gcd(s as u64, n as u64) != 1 {
        return Err(FamilyError::BadParameters(format!(
            "need 1 <= s < n/2 with gcd(s, n) = 1, got s = {s}, n = {n}"
        )));
    }
    let field = Field::new(p, n, None)?;
    let half = linalg::inv_mod(2, p).expect("p odd");
    let prov = Provenance::new("bkl", &[("p", p.to_string()), ("n", n.to_string()), ("s", s.to_string())]);
    let (fs, fns) = (s as i64, (n - s) as i64);
    Ok(ExponentFamily::build(field, prov, "b", |b, x| {
        let t1 = b.mul_unchecked(&x.frobenius(fns)).mul_unchecked(x);
        let t2 = b.frobenius(fs).mul_unchecked(&x.frobenius(fs)).mul_unchecked(x);
        t1.add_unchecked(&t2).trace() * half % p
    }))
}

/// `(3^k + 1)/2` reduced modulo `3ⁿ − 1`.
pub fn planar_exponent(n: usize, k: usize) -> u64 {
    let m = 3u64.pow(n as u32) - 1;
    let r = (0..k).fold(1u64, |acc, _| acc * 3 % (2 * m));
    r.div_ceil(2) % m
}

/// `E_b(a, v) = T(av) + T(b f(v))` with `f(x) = x^((3^k+1)/2)` over GF(3ⁿ).
pub fn planar_exponents(n: usize, k: usize) -> Result<ExponentFamily, FamilyError> {
    if n.is_multiple_of(2) || n < 5 {
        return Err(FamilyError::BadParameters(format!("n must be odd and at least 5, got {n}")));
    }
    let two_n = 2 * n as u64;
    let kk = k as u64 % two_n;
    if k == 0 || gcd(k as u64, two_n) != 1 || kk == 1 || kk == two_n - 1 {
        return Err(FamilyError::BadParameters(format!(
            "need gcd(k, 2n) = 1 and k != ±1 mod 2n, got k = {k}, n = {n}"
        )));
    }
    let field = Field::new(3, n, None)?;
    let e = planar_exponent(n, k);
    let values = field.table(|x| x.pow(e as i64).expect("nonnegative exponent"));
    if !gf::is_planar(&field, &values)?.planar {
        return Err(FamilyError::NotPlanar { n, exponent: e });
    }
    let elems: Vec<GFElement> = field.elements().collect();
    let prov = Provenance::new("planar", &[("p", "3".into()), ("n", n.to_string()), ("k", k.to_string())]);
    let mut fam = ExponentFamily::build(field, prov, "b", |b, v| b.mul_unchecked(&elems[values[v.rank()]]).trace());
    fam.planar_values = Some(values);
    Ok(fam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{spread_from_spreadset, verify_symplectic_spread};

    #[test]
    fn small_desarguesian_spread_sets() {
        assert_eq!(desarguesian(2, 1).unwrap().matrices, vec![vec![vec![0]], vec![vec![1]]]);
        assert_eq!(desarguesian(3, 1).unwrap().matrices, vec![vec![vec![0]], vec![vec![1]], vec![vec![2]]]);
        let k = desarguesian(2, 2).unwrap();
        assert_eq!(k.matrices.len(), 4);
        assert!(k.verify().passed());
        assert!(k.is_additively_closed());
        assert!(matches!(desarguesian(3, 2), Err(FamilyError::Field(GfError::NoSelfDualBasis { .. }))));
    }

    #[test]
    fn desarguesian_spreads_verify() {
        for (p, n) in [(2, 3), (2, 4), (3, 3), (5, 1)] {
            let s = spread_from_spreadset(&desarguesian(p, n).unwrap()).unwrap();
            let r = verify_symplectic_spread(&s);
            assert!(r.passed(), "({p},{n}): {r}");
        }
    }

    #[test]
    fn kantor_parameters() {
        for n in [1, 2, 3, 4, 6] {
            assert!(matches!(kantor_binary(n), Err(FamilyError::BadDegree(_))), "n = {n}");
        }
    }

    #[test]
    fn kantor_n5_is_a_spread() {
        let s = kantor_binary(5).unwrap();
        assert_eq!(s.members.len(), 33);
        // m = 0 gives y = 0.
        assert_eq!(s.members[1].as_graph().unwrap(), vec![vec![0u32; 5]; 5]);
        assert!(verify_symplectic_spread(&s).passed());
        let d = spread_from_spreadset(&desarguesian(2, 5).unwrap()).unwrap();
        assert_ne!(s.canonical_members(), d.canonical_members());
    }

    #[test]
    fn exponent_family_parameters() {
        assert!(bkl_exponents(3, 3, 2).is_err());
        assert!(bkl_exponents(3, 3, 0).is_err());
        assert!(bkl_exponents(3, 4, 1).is_err());
        assert!(bkl_exponents(2, 3, 1).is_err());
        assert!(planar_exponents(5, 1).is_err());
        assert!(planar_exponents(5, 9).is_err());
        assert!(planar_exponents(5, 5).is_err());
        assert!(planar_exponents(3, 3).is_err());
        assert!(desarguesian_exponents(2, 2).is_err());
        assert_eq!(planar_exponent(5, 3), 14);
    }

    #[test]
    fn bkl_b0_is_fourier_and_a_linear() {
        let f = bkl_exponents(3, 3, 1).unwrap();
        assert_eq!(f.dim(), 27);
        assert!(f.theta(0).iter().all(|&t| t == 0));
        let field = &f.field;
        for b in [0, 5, 26] {
            for a in 0..27 {
                for a2 in [0, 1, 13] {
                    for v in 0..27 {
                        let d = field.from_rank(field.rank_sub(a, a2)).mul_unchecked(&field.from_rank(v)).trace();
                        assert_eq!((f.exponent(b, a, v) + 3 - f.exponent(b, a2, v)) % 3, d);
                    }
                }
            }
        }
    }

    #[test]
    fn desarguesian_exponent_frame_gf3() {
        let f = desarguesian_exponents(3, 1).unwrap();
        assert_eq!(f.table(0), vec![0, 0, 0, 0, 1, 2, 0, 2, 1]);
        assert_eq!(f.quadratic_matrix(1), Some(vec![vec![1]]));
    }

    #[test]
    fn planar_family_second_member() {
        let f = planar_exponents(5, 7).unwrap();
        assert_eq!(f.dim(), 243);
        assert!(f.planar_values.is_some());
        // x^((3^k+1)/2) is not a quadratic form for these k.
        assert!(f.quadratic_matrix(1).is_none());
    }
}
