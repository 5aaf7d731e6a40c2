//! ℤ_p^(2n) with its alternating form, the binary quadratic form, spreads,
//! spread sets and their verifiers.
//!
//! Vectors are written `(a | b)` with `a, b ∈ ℤ_pⁿ`; the alternating form is
//! `((a,b),(c,d)) = a·d − b·c`, the commutator form of the Weyl operators
//! `X(a)Z(b)`. In characteristic 2 the quadratic form is `Q̄(a,b) = a·b`, the
//! exponent in `(X(a)Z(b))² = (−1)^(a·b) I`.

use std::collections::HashSet;

use thiserror::Error;

use crate::gf::Field;
use crate::linalg;
use crate::report::{err, int_row, keyed, CheckReport, LineReader, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid spread set: {0}")]
    InvalidSpreadSet(String),
    #[error("invalid spread: {0}")]
    InvalidSpread(String),
    #[error("distinguished members are not (distinct) members of the spread")]
    MembersNotInSpread,
    #[error("multiplication is not commutative: {0}")]
    NotCommutative(String),
    #[error("multiplication is not bilinear: {0}")]
    NotBilinear(String),
    #[error("multiplication has zero divisors: {0}")]
    ZeroDivisor(String),
    #[error("search too large: 2n = {0} exceeds 8")]
    TooLarge(usize),
    #[error("orthogonal spreads need even n, got {0}")]
    OddDimension(usize),
}

/// Alternating form `a·d − b·c` for `u = (a|b)`, `v = (c|d)` over ℤ_p.
pub fn symplectic_form(u: &[u32], v: &[u32], p: u32) -> Result<u32, GeometryError> {
    if u.len() != v.len() || !u.len().is_multiple_of(2) {
        return Err(GeometryError::DimensionMismatch { expected: u.len(), got: v.len() });
    }
    let n = u.len() / 2;
    let ad = linalg::dot(&u[..n], &v[n..], p);
    let bc = linalg::dot(&u[n..], &v[..n], p);
    Ok((ad + p - bc) % p)
}

/// `Q̄(a|b) = a·b` over ℤ₂.
pub fn quadratic_form_binary(v: &[u32]) -> Result<u32, GeometryError> {
    if !v.len().is_multiple_of(2) {
        return Err(GeometryError::DimensionMismatch { expected: v.len() + 1, got: v.len() });
    }
    let n = v.len() / 2;
    Ok(linalg::dot(&v[..n], &v[n..], 2))
}

/// ℤ_p^(2n) with the alternating form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticSpace {
    pub p: u32,
    pub n: usize,
}

impl SymplecticSpace {
    /// Checks bilinear nondegeneracy on basis vectors: the Gram matrix is
    /// `[[0, I], [−I, 0]]`.
    pub fn new(p: u32, n: usize) -> Self {
        let space = SymplecticSpace { p, n };
        debug_assert!({
            let basis: Vec<Vec<u32>> = linalg::identity(2 * n);
            let gram: Vec<Vec<u32>> = basis
                .iter()
                .map(|u| basis.iter().map(|v| space.form(u, v)).collect())
                .collect();
            linalg::is_nonsingular(&gram, p) && (0..2 * n).all(|i| gram[i][i] == 0)
        });
        space
    }

    pub fn form(&self, u: &[u32], v: &[u32]) -> u32 {
        symplectic_form(u, v, self.p).expect("vectors of the space")
    }
}

/// A subspace of ℤ_p^m stored by its reduced row echelon basis, so equality of
/// subspaces is equality of values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    p: u32,
    ambient: usize,
    basis: Vec<Vec<u32>>,
}

impl Subspace {
    pub fn span(p: u32, ambient: usize, rows: &[Vec<u32>]) -> Result<Self, GeometryError> {
        if let Some(r) = rows.iter().find(|r| r.len() != ambient) {
            return Err(GeometryError::DimensionMismatch { expected: ambient, got: r.len() });
        }
        Ok(Subspace { p, ambient, basis: linalg::rref(rows, p) })
    }

    /// `{(v, Mv) : v ∈ ℤ_pⁿ}`.
    pub fn graph(p: u32, m: &[Vec<u32>]) -> Self {
        let n = m.len();
        let rows: Vec<Vec<u32>> = (0..n)
            .map(|j| {
                let mut r = vec![0u32; 2 * n];
                r[j] = 1;
                for i in 0..n {
                    r[n + i] = m[i][j] % p;
                }
                r
            })
            .collect();
        Subspace { p, ambient: 2 * n, basis: linalg::rref(&rows, p) }
    }

    /// `0 ⊕ V`.
    pub fn vertical(p: u32, n: usize) -> Self {
        let rows: Vec<Vec<u32>> = (0..n)
            .map(|j| {
                let mut r = vec![0u32; 2 * n];
                r[n + j] = 1;
                r
            })
            .collect();
        Subspace { p, ambient: 2 * n, basis: rows }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        linalg::rank(&rows, self.p) == self.dim()
    }

    pub fn sum_dim(&self, other: &Subspace) -> usize {
        let rows: Vec<Vec<u32>> = self.basis.iter().chain(&other.basis).cloned().collect();
        linalg::rank(&rows, self.p)
    }

    pub fn intersection_dim(&self, other: &Subspace) -> usize {
        self.dim() + other.dim() - self.sum_dim(other)
    }

    /// Every vector of the subspace (p^dim of them), in coefficient rank order.
    pub fn vectors(&self) -> Vec<Vec<u32>> {
        let k = self.dim();
        let count = (self.p as usize).pow(k as u32);
        (0..count)
            .map(|r| {
                let c = linalg::digits(r, self.p, k);
                let mut v = vec![0u32; self.ambient];
                for (coef, row) in c.iter().zip(&self.basis) {
                    for (x, &y) in v.iter_mut().zip(row) {
                        *x = (*x + coef * y) % self.p;
                    }
                }
                v
            })
            .collect()
    }

    /// First pair of basis indices on which the alternating form is nonzero.
    pub fn isotropy_witness(&self) -> Option<(usize, usize)> {
        let k = self.dim();
        (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .find(|&(i, j)| symplectic_form(&self.basis[i], &self.basis[j], self.p).unwrap_or(1) != 0)
    }

    pub fn is_totally_isotropic(&self) -> bool {
        self.isotropy_witness().is_none()
    }

    /// First basis vector with `Q̄ ≠ 0` or pair with nonzero polar form (binary only).
    pub fn singularity_witness(&self) -> Option<String> {
        if let Some(i) = self.basis.iter().position(|v| quadratic_form_binary(v).unwrap_or(1) != 0) {
            return Some(format!("Q(basis[{i}]) = 1 for {:?}", self.basis[i]));
        }
        self.isotropy_witness()
            .map(|(i, j)| format!("polar form nonzero on basis[{i}], basis[{j}]"))
    }

    pub fn is_totally_singular(&self) -> bool {
        self.p == 2 && self.singularity_witness().is_none()
    }

    /// Reads the subspace as a graph `{(v, Mv)}` if it is one.
    pub fn as_graph(&self) -> Option<Vec<Vec<u32>>> {
        let n = self.ambient / 2;
        if self.dim() != n || (0..n).any(|i| self.basis[i][..n] != linalg::identity(n)[i][..]) {
            return None;
        }
        Some((0..n).map(|i| (0..n).map(|j| self.basis[j][n + i]).collect()).collect())
    }

    fn rows_text(&self) -> String {
        self.basis
            .iter()
            .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// `pⁿ + 1` totally isotropic n-spaces of ℤ_p^(2n), pairwise meeting in 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticSpread {
    pub space: SymplecticSpace,
    pub members: Vec<Subspace>,
}

impl SymplecticSpread {
    pub fn new(p: u32, n: usize, members: Vec<Subspace>) -> Self {
        SymplecticSpread { space: SymplecticSpace::new(p, n), members }
    }

    /// Members sorted by canonical basis; two spreads are equal as sets iff these agree.
    pub fn canonical_members(&self) -> Vec<Subspace> {
        let mut m = self.members.clone();
        m.sort();
        m
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("SPREAD p={} n={}\n", self.space.p, self.space.n);
        for m in &self.members {
            s.push_str("MEMBER\n");
            s.push_str(&m.rows_text());
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let (p, n, members) = parse_members(text, "SPREAD", None)?;
        Ok(SymplecticSpread::new(p, n, members))
    }
}

fn parse_members(text: &str, header: &str, expected: Option<usize>) -> Result<(u32, usize, Vec<Subspace>), ParseError> {
    let mut rd = LineReader::new(text);
    let (ln, head) = rd.next_line()?;
    let mut toks = head.split_whitespace();
    if toks.next() != Some(header) {
        return Err(err(ln, format!("expected {header} header")));
    }
    let p: u32 = keyed(ln, toks.next(), "p")?;
    let n: usize = keyed(ln, toks.next(), "n")?;
    if !linalg::is_prime(p) || n == 0 {
        return Err(err(ln, "p must be prime and n positive"));
    }
    let mut members = Vec::new();
    while !rd.at_end() {
        let (ln, l) = rd.next_line()?;
        if l != "MEMBER" {
            return Err(err(ln, "expected MEMBER"));
        }
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, l) = rd.next_line()?;
            rows.push(int_row(ln, l, 2 * n, p)?);
        }
        members.push(Subspace::span(p, 2 * n, &rows).expect("row lengths checked"));
    }
    if let Some(e) = expected {
        if members.len() != e {
            return Err(rd.error_here(format!("expected {e} members, found {}", members.len())));
        }
    }
    Ok((p, n, members))
}

fn coverage_check(report: &mut CheckReport, members: &[Subspace], p: u32, ambient: usize, target: impl Fn(&[u32]) -> bool) {
    if (ambient as u32) * p.ilog2().max(1) > 22 {
        report.note("vector coverage skipped (space too large); implied by counts and trivial intersections");
        return;
    }
    let total = (p as usize).pow(ambient as u32);
    let mut seen = vec![0u8; total];
    for m in members {
        for v in m.vectors().into_iter().skip(1) {
            let r = linalg::rank_of(&v, p);
            seen[r] = seen[r].saturating_add(1);
        }
    }
    for r in 1..total {
        let v = linalg::digits(r, p, ambient);
        let want = u8::from(target(&v));
        if seen[r] != want {
            report.fail(format!("vector {v:?} lies in {} members, expected {want}", seen[r]));
            return;
        }
    }
    report.note("every relevant nonzero vector lies in exactly one member");
}

/// Count, total isotropy, pairwise trivial intersection and the partition of
/// nonzero vectors.
pub fn verify_symplectic_spread(spread: &SymplecticSpread) -> CheckReport {
    let SymplecticSpace { p, n } = spread.space;
    let mut report = CheckReport::new("symplectic-spread");
    let want = (p as usize).pow(n as u32) + 1;
    if spread.members.len() != want {
        report.fail(format!("member count {} != p^n + 1 = {want}", spread.members.len()));
    }
    for (k, m) in spread.members.iter().enumerate() {
        if m.ambient() != 2 * n || m.dim() != n {
            report.fail(format!("member {k} has dimension {} in ambient {}, expected {n} in {}", m.dim(), m.ambient(), 2 * n));
            continue;
        }
        if let Some((i, j)) = m.isotropy_witness() {
            report.fail(format!(
                "member {k} not totally isotropic: form(basis[{i}], basis[{j}]) != 0 for {:?}, {:?}",
                m.basis()[i],
                m.basis()[j]
            ));
        }
    }
    if !report.passed() {
        return report;
    }
    for a in 0..spread.members.len() {
        for b in a + 1..spread.members.len() {
            let d = spread.members[a].intersection_dim(&spread.members[b]);
            if d != 0 {
                report.fail(format!("members {a} and {b} meet in dimension {d}"));
                return report;
            }
        }
    }
    coverage_check(&mut report, &spread.members, p, 2 * n, |_| true);
    report.note(format!("{} totally isotropic {n}-spaces of Z_{p}^{}", spread.members.len(), 2 * n));
    report
}

/// `pⁿ` symmetric n×n matrices over ℤ_p with pairwise nonsingular differences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpreadSet {
    pub p: u32,
    pub n: usize,
    pub matrices: Vec<Vec<Vec<u32>>>,
}

impl SpreadSet {
    /// Validated constructor.
    pub fn new(p: u32, n: usize, matrices: Vec<Vec<Vec<u32>>>) -> Result<Self, GeometryError> {
        let k = SpreadSet { p, n, matrices };
        let report = k.verify();
        if report.passed() {
            Ok(k)
        } else {
            Err(GeometryError::InvalidSpreadSet(report.witnesses()[0].clone()))
        }
    }

    pub fn new_unchecked(p: u32, n: usize, matrices: Vec<Vec<Vec<u32>>>) -> Self {
        SpreadSet { p, n, matrices }
    }

    pub fn verify(&self) -> CheckReport {
        let mut report = CheckReport::new("spread-set");
        let want = (self.p as usize).pow(self.n as u32);
        if self.matrices.len() != want {
            report.fail(format!("{} matrices, expected p^n = {want}", self.matrices.len()));
        }
        for (k, m) in self.matrices.iter().enumerate() {
            if m.len() != self.n || m.iter().any(|r| r.len() != self.n) {
                report.fail(format!("matrix {k} is not {0}x{0}", self.n));
                return report;
            }
            if !linalg::is_symmetric(m) {
                report.fail(format!("matrix {k} is not symmetric"));
            }
        }
        for a in 0..self.matrices.len() {
            for b in a + 1..self.matrices.len() {
                let diff: Vec<Vec<u32>> = self.matrices[a]
                    .iter()
                    .zip(&self.matrices[b])
                    .map(|(x, y)| linalg::sub(x, y, self.p))
                    .collect();
                if !linalg::is_nonsingular(&diff, self.p) {
                    report.fail(format!("difference of matrices {a} and {b} is singular"));
                    return report;
                }
            }
        }
        if report.passed() {
            report.note(format!("{} symmetric matrices with nonsingular differences", self.matrices.len()));
        }
        report
    }

    /// Whether the set is closed under addition (semifield spreads).
    pub fn is_additively_closed(&self) -> bool {
        let set: HashSet<&Vec<Vec<u32>>> = self.matrices.iter().collect();
        self.matrices.iter().all(|a| {
            self.matrices.iter().all(|b| {
                let s: Vec<Vec<u32>> = a.iter().zip(b).map(|(x, y)| linalg::add(x, y, self.p)).collect();
                set.contains(&s)
            })
        })
    }
}

/// `0 ⊕ V` followed by the graphs of the matrices, in order.
pub fn spread_from_spreadset(k: &SpreadSet) -> Result<SymplecticSpread, GeometryError> {
    let report = k.verify();
    if !report.passed() {
        return Err(GeometryError::InvalidSpreadSet(report.witnesses()[0].clone()));
    }
    let mut members = vec![Subspace::vertical(k.p, k.n)];
    members.extend(k.matrices.iter().map(|m| Subspace::graph(k.p, m)));
    Ok(SymplecticSpread::new(k.p, k.n, members))
}

/// Changes to a symplectic basis sending `horizontal ↦ V⊕0` and
/// `vertical ↦ 0⊕V`, then reads every member except `vertical` as a matrix graph.
///
/// The new basis is `eᵢ` = the echelon basis of `horizontal` and `fⱼ` = its dual
/// basis inside `vertical` (`(eᵢ, fⱼ) = δᵢⱼ`). The matrices come out in member
/// order, with `horizontal` giving the zero matrix.
pub fn spreadset_from_spread(
    spread: &SymplecticSpread,
    horizontal: &Subspace,
    vertical: &Subspace,
) -> Result<SpreadSet, GeometryError> {
    let SymplecticSpace { p, n } = spread.space;
    let h = spread.members.iter().position(|m| m == horizontal);
    let v = spread.members.iter().position(|m| m == vertical);
    let (Some(_), Some(vi)) = (h, v) else {
        return Err(GeometryError::MembersNotInSpread);
    };
    if horizontal == vertical {
        return Err(GeometryError::MembersNotInSpread);
    }
    let form = |a: &[u32], b: &[u32]| symplectic_form(a, b, p).expect("same ambient");
    let e = horizontal.basis();
    let b = vertical.basis();
    let gram: Vec<Vec<u32>> = e.iter().map(|ei| b.iter().map(|bj| form(ei, bj)).collect()).collect();
    let ginv = linalg::mat_inverse(&gram, p)
        .ok_or_else(|| GeometryError::InvalidSpread("distinguished members intersect".into()))?;
    // f_j = Σ_k ginv[k][j] b_k
    let f: Vec<Vec<u32>> = (0..n)
        .map(|j| {
            (0..n).fold(vec![0u32; 2 * n], |acc, k| linalg::add(&acc, &linalg::scale(&b[k], ginv[k][j], p), p))
        })
        .collect();
    let coords = |w: &[u32]| -> Vec<u32> {
        let mut c: Vec<u32> = f.iter().map(|fi| form(w, fi)).collect();
        c.extend(e.iter().map(|ei| form(ei, w)));
        c
    };
    let mut matrices = Vec::with_capacity(spread.members.len() - 1);
    for (k, member) in spread.members.iter().enumerate() {
        if k == vi {
            continue;
        }
        let rows: Vec<Vec<u32>> = member.basis().iter().map(|w| coords(w)).collect();
        let image = Subspace::span(p, 2 * n, &rows)?;
        let m = image
            .as_graph()
            .ok_or_else(|| GeometryError::InvalidSpread(format!("member {k} meets the vertical member")))?;
        matrices.push(m);
    }
    Ok(SpreadSet::new_unchecked(p, n, matrices))
}

/// A commutative multiplication on ℤ_pⁿ given by a rank table
/// `table[x * pⁿ + y] = rank(x ∗ y)`.
#[derive(Clone, Debug)]
pub struct Semifield {
    pub p: u32,
    pub n: usize,
    pub table: Vec<usize>,
}

impl Semifield {
    /// Field multiplication of GF(pⁿ) in power-basis coordinates.
    pub fn from_field(field: &Field) -> Self {
        let q = field.order();
        let elems: Vec<_> = field.elements().collect();
        let mut table = Vec::with_capacity(q * q);
        for x in &elems {
            for y in &elems {
                table.push(x.mul(y).expect("same field").rank());
            }
        }
        Semifield { p: field.p(), n: field.n(), table }
    }

    fn order(&self) -> usize {
        (self.p as usize).pow(self.n as u32)
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x * self.order() + y]
    }
}

/// `M(b)ᵢⱼ = b · (εᵢ ∗ εⱼ)` for every `b ∈ ℤ_pⁿ`, so that `b·(v∗v) = v·M(b)v`.
pub fn semifield_to_spreadset(s: &Semifield) -> Result<SpreadSet, GeometryError> {
    let (p, n) = (s.p, s.n);
    let q = s.order();
    if s.table.len() != q * q || s.table.iter().any(|&v| v >= q) {
        return Err(GeometryError::InvalidSpreadSet("multiplication table has wrong shape".into()));
    }
    let vec_of = |r: usize| linalg::digits(r, p, n);
    let rank = |v: &[u32]| linalg::rank_of(v, p);
    for x in 0..q {
        for y in 0..x {
            if s.mul(x, y) != s.mul(y, x) {
                return Err(GeometryError::NotCommutative(format!("x={x}, y={y}")));
            }
        }
    }
    let units: Vec<usize> = (0..n).map(|i| rank(&linalg::identity(n)[i])).collect();
    for x in 0..q {
        for y in 0..q {
            for &e in &units {
                let lhs = s.mul(rank(&linalg::add(&vec_of(x), &vec_of(e), p)), y);
                let rhs = rank(&linalg::add(&vec_of(s.mul(x, y)), &vec_of(s.mul(e, y)), p));
                if lhs != rhs {
                    return Err(GeometryError::NotBilinear(format!("(x+e)*y != x*y + e*y at x={x}, e={e}, y={y}")));
                }
            }
        }
    }
    for x in 1..q {
        if let Some(y) = (1..q).find(|&y| s.mul(x, y) == 0) {
            return Err(GeometryError::ZeroDivisor(format!("x={x}, y={y}")));
        }
    }
    let products: Vec<Vec<Vec<u32>>> = units
        .iter()
        .map(|&ei| units.iter().map(|&ej| vec_of(s.mul(ei, ej))).collect())
        .collect();
    let matrices = (0..q)
        .map(|b| {
            let bv = vec_of(b);
            (0..n).map(|i| (0..n).map(|j| linalg::dot(&bv, &products[i][j], p)).collect()).collect()
        })
        .collect();
    SpreadSet::new(p, n, matrices)
}

/// ℤ₂^(2n) with `Q̄(a|b) = a·b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadraticSpace {
    pub n: usize,
}

impl QuadraticSpace {
    pub fn q(&self, v: &[u32]) -> u32 {
        quadratic_form_binary(v).expect("even length")
    }

    /// `Q̄(x+y) + Q̄(x) + Q̄(y) = (x, y)` on all pairs of basis vectors.
    pub fn polarizes_on_basis(&self) -> bool {
        let basis = linalg::identity(2 * self.n);
        basis.iter().all(|x| {
            basis.iter().all(|y| {
                let s = linalg::add(x, y, 2);
                (self.q(&s) + self.q(x) + self.q(y)) % 2 == symplectic_form(x, y, 2).unwrap()
            })
        })
    }
}

/// `2^(n−1) + 1` totally singular n-spaces of ℤ₂^(2n), pairwise meeting in 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalSpread {
    pub space: QuadraticSpace,
    pub members: Vec<Subspace>,
}

impl OrthogonalSpread {
    pub fn new(n: usize, members: Vec<Subspace>) -> Self {
        OrthogonalSpread { space: QuadraticSpace { n }, members }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("ORTHOSPREAD p=2 n={}\n", self.space.n);
        for m in &self.members {
            s.push_str("MEMBER\n");
            s.push_str(&m.rows_text());
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let (p, n, members) = parse_members(text, "ORTHOSPREAD", None)?;
        if p != 2 {
            return Err(err(1, "orthogonal spreads live over Z_2"));
        }
        Ok(OrthogonalSpread::new(n, members))
    }
}

pub fn verify_orthogonal_spread(spread: &OrthogonalSpread) -> CheckReport {
    let n = spread.space.n;
    let mut report = CheckReport::new("orthogonal-spread");
    if !n.is_multiple_of(2) {
        report.fail(format!("n = {n} is odd: n must be even"));
    }
    let want = (1usize << n.saturating_sub(1)) + 1;
    if spread.members.len() != want {
        report.fail(format!("member count {} != 2^(n-1) + 1 = {want}", spread.members.len()));
    }
    for (k, m) in spread.members.iter().enumerate() {
        if m.p() != 2 || m.ambient() != 2 * n || m.dim() != n {
            report.fail(format!("member {k} is not an {n}-space of Z_2^{}", 2 * n));
            continue;
        }
        if let Some(w) = m.singularity_witness() {
            report.fail(format!("member {k} not totally singular: {w}"));
        }
    }
    if !report.passed() {
        return report;
    }
    for a in 0..spread.members.len() {
        for b in a + 1..spread.members.len() {
            let d = spread.members[a].intersection_dim(&spread.members[b]);
            if d != 0 {
                report.fail(format!("members {a} and {b} meet in dimension {d}"));
                return report;
            }
        }
    }
    coverage_check(&mut report, &spread.members, 2, 2 * n, |v| quadratic_form_binary(v).unwrap() == 0);
    report
}

type Bits = [u64; 4];

fn bit_set(s: &mut Bits, v: u32) {
    s[(v / 64) as usize] |= 1 << (v % 64);
}

fn bit_get(s: &Bits, v: u32) -> bool {
    s[(v / 64) as usize] >> (v % 64) & 1 == 1
}

/// Depth-first exact-cover search for orthogonal spreads of ℤ₂^(2n), 2n ≤ 8.
///
/// Candidates are all totally singular n-spaces in canonical order; at each
/// step the smallest uncovered singular vector is covered by each compatible
/// candidate in turn.
pub fn search_orthogonal_spreads(n: usize, limit: usize) -> Result<Vec<OrthogonalSpread>, GeometryError> {
    if 2 * n > 8 {
        return Err(GeometryError::TooLarge(2 * n));
    }
    if !n.is_multiple_of(2) || n == 0 {
        return Err(GeometryError::OddDimension(n));
    }
    if limit == 0 {
        return Ok(Vec::new());
    }
    let m = 2 * n;
    let to_vec = |x: u32| -> Vec<u32> { (0..m).map(|i| (x >> (m - 1 - i)) & 1).collect() };
    let q = |x: u32| quadratic_form_binary(&to_vec(x)).unwrap();
    let polar = |x: u32, y: u32| symplectic_form(&to_vec(x), &to_vec(y), 2).unwrap();
    let singular: Vec<u32> = (1..1u32 << m).filter(|&x| q(x) == 0).collect();

    // Grow totally singular subspaces one dimension at a time.
    let mut level: Vec<(Vec<u32>, Bits)> = vec![(Vec::new(), {
        let mut b = [0u64; 4];
        bit_set(&mut b, 0);
        b
    })];
    for _ in 0..n {
        let mut seen: HashSet<Bits> = HashSet::new();
        let mut next = Vec::new();
        for (basis, set) in &level {
            for &v in &singular {
                if bit_get(set, v) || basis.iter().any(|&b| polar(b, v) != 0) {
                    continue;
                }
                let mut grown = *set;
                for x in 0..1u32 << m {
                    if bit_get(set, x) {
                        bit_set(&mut grown, x ^ v);
                    }
                }
                if seen.insert(grown) {
                    let mut nb = basis.clone();
                    nb.push(v);
                    next.push((nb, grown));
                }
            }
        }
        level = next;
    }
    let mut candidates: Vec<(Subspace, Bits)> = level
        .into_iter()
        .map(|(basis, set)| {
            let rows: Vec<Vec<u32>> = basis.iter().map(|&b| to_vec(b)).collect();
            (Subspace::span(2, m, &rows).expect("lengths"), set)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.cmp(&b.0));

    let want = (1usize << (n - 1)) + 1;
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    let mut covered: Bits = [0; 4];
    bit_set(&mut covered, 0);
    fn disjoint(a: &Bits, b: &Bits) -> bool {
        // Both contain 0; any other common bit is a shared vector.
        let mut x = [a[0] & b[0], a[1] & b[1], a[2] & b[2], a[3] & b[3]];
        x[0] &= !1;
        x == [0; 4]
    }
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        candidates: &[(Subspace, Bits)],
        singular: &[u32],
        want: usize,
        limit: usize,
        n: usize,
        chosen: &mut Vec<usize>,
        covered: &mut Bits,
        out: &mut Vec<OrthogonalSpread>,
    ) {
        if out.len() >= limit {
            return;
        }
        if chosen.len() == want {
            let members = chosen.iter().map(|&i| candidates[i].0.clone()).collect();
            out.push(OrthogonalSpread::new(n, members));
            return;
        }
        let Some(&target) = singular.iter().find(|&&v| !bit_get(covered, v)) else {
            return;
        };
        for (i, (_, set)) in candidates.iter().enumerate() {
            if !bit_get(set, target) || !disjoint(set, covered) {
                continue;
            }
            let saved = *covered;
            for w in 0..4 {
                covered[w] |= set[w];
            }
            chosen.push(i);
            dfs(candidates, singular, want, limit, n, chosen, covered, out);
            chosen.pop();
            *covered = saved;
            if out.len() >= limit {
                return;
            }
        }
    }
    dfs(&candidates, &singular, want, limit, n, &mut chosen, &mut covered, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf4_desarguesian_spread() -> SymplecticSpread {
        // y = mx over GF(4) in the self-dual basis {t, t²}: matrices of
        // multiplication by 0, 1, t, t².
        let k = SpreadSet::new(
            2,
            2,
            vec![
                vec![vec![0, 0], vec![0, 0]],
                vec![vec![1, 0], vec![0, 1]],
                vec![vec![0, 1], vec![1, 1]],
                vec![vec![1, 1], vec![1, 0]],
            ],
        )
        .unwrap();
        spread_from_spreadset(&k).unwrap()
    }

    #[test]
    fn form_examples() {
        assert_eq!(symplectic_form(&[1, 0, 0, 0], &[0, 0, 1, 0], 2).unwrap(), 1);
        let u = [1, 2, 0, 1];
        let v = [2, 2, 1, 0];
        assert_eq!(symplectic_form(&u, &u, 3).unwrap(), 0);
        assert_eq!((symplectic_form(&u, &v, 3).unwrap() + symplectic_form(&v, &u, 3).unwrap()) % 3, 0);
        assert!(matches!(symplectic_form(&u, &[1, 2], 3), Err(GeometryError::DimensionMismatch { .. })));
    }

    #[test]
    fn quadratic_form_examples() {
        assert_eq!(quadratic_form_binary(&[1, 0, 1, 0]).unwrap(), 1);
        assert_eq!(quadratic_form_binary(&[1, 0, 0, 1]).unwrap(), 0);
        assert!(QuadraticSpace { n: 3 }.polarizes_on_basis());
        assert!(quadratic_form_binary(&[1, 0, 1]).is_err());
    }

    #[test]
    fn gf4_spread_verifies_and_mutations_fail() {
        let spread = gf4_desarguesian_spread();
        let r = verify_symplectic_spread(&spread);
        assert!(r.passed(), "{r}");

        let mut short = spread.clone();
        short.members.pop();
        let r = verify_symplectic_spread(&short);
        assert!(!r.passed() && r.witnesses()[0].contains("member count"));

        let mut bad = spread.clone();
        // span{(1,0|0,0), (0,0|1,0)} has form value 1.
        bad.members[2] = Subspace::span(2, 4, &[vec![1, 0, 0, 0], vec![0, 0, 1, 0]]).unwrap();
        let r = verify_symplectic_spread(&bad);
        assert!(!r.passed() && r.witnesses()[0].contains("not totally isotropic"), "{r}");
    }

    #[test]
    fn small_spreadset_to_spread() {
        let k = SpreadSet::new(2, 1, vec![vec![vec![0]], vec![vec![1]]]).unwrap();
        let s = spread_from_spreadset(&k).unwrap();
        let mut got: Vec<Vec<Vec<u32>>> = s.members.iter().map(|m| m.basis().to_vec()).collect();
        got.sort();
        assert_eq!(got, vec![vec![vec![0, 1]], vec![vec![1, 0]], vec![vec![1, 1]]]);
        assert_eq!(Subspace::graph(2, &[vec![0, 0], vec![0, 0]]), Subspace::span(2, 4, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0]]).unwrap());
    }

    #[test]
    fn graph_isotropic_iff_symmetric_exhaustive() {
        for n in 1..=3usize {
            let entries = n * n;
            for code in 0..1u32 << entries {
                let m: Vec<Vec<u32>> = (0..n).map(|i| (0..n).map(|j| (code >> (i * n + j)) & 1).collect()).collect();
                assert_eq!(Subspace::graph(2, &m).is_totally_isotropic(), linalg::is_symmetric(&m), "{m:?}");
            }
        }
    }

    #[test]
    fn round_trip_through_canonical_pair() {
        let spread = gf4_desarguesian_spread();
        let zero = Subspace::graph(2, &[vec![0, 0], vec![0, 0]]);
        let k = spreadset_from_spread(&spread, &zero, &Subspace::vertical(2, 2)).unwrap();
        assert!(k.verify().passed());
        let mut got = k.matrices.clone();
        got.sort();
        let mut want = spreadset_of(&spread);
        want.sort();
        assert_eq!(got, want);
        let back = spread_from_spreadset(&k).unwrap();
        assert_eq!(back.canonical_members(), spread.canonical_members());
        assert!(k.is_additively_closed());
    }

    fn spreadset_of(s: &SymplecticSpread) -> Vec<Vec<Vec<u32>>> {
        s.members.iter().filter_map(Subspace::as_graph).collect()
    }

    #[test]
    fn members_not_in_spread() {
        let spread = gf4_desarguesian_spread();
        let stray = Subspace::span(2, 4, &[vec![1, 0, 0, 0], vec![0, 0, 1, 0]]).unwrap();
        assert_eq!(
            spreadset_from_spread(&spread, &stray, &Subspace::vertical(2, 2)),
            Err(GeometryError::MembersNotInSpread)
        );
    }

    #[test]
    fn spread_set_rejections() {
        assert!(SpreadSet::new(2, 1, vec![vec![vec![0]], vec![vec![0]]]).is_err());
        assert!(SpreadSet::new(3, 2, vec![vec![vec![0, 1], vec![0, 0]]; 9]).is_err());
    }

    #[test]
    fn semifield_field_gf3() {
        let f = Field::new(3, 1, None).unwrap();
        let k = semifield_to_spreadset(&Semifield::from_field(&f)).unwrap();
        assert_eq!(k.matrices, vec![vec![vec![0]], vec![vec![1]], vec![vec![2]]]);
    }

    #[test]
    fn semifield_identity_and_gf9() {
        for (p, n) in [(3, 2), (3, 3), (5, 1), (2, 3)] {
            let f = Field::new(p, n, None).unwrap();
            let s = Semifield::from_field(&f);
            let k = semifield_to_spreadset(&s).unwrap();
            assert_eq!(k.matrices.len(), f.order());
            for b in 0..f.order() {
                let bv = linalg::digits(b, p, n);
                for v in 0..f.order() {
                    let vv = linalg::digits(v, p, n);
                    let lhs = linalg::dot(&bv, &linalg::digits(s.mul(v, v), p, n), p);
                    let rhs = linalg::dot(&vv, &linalg::mat_vec(&k.matrices[b], &vv, p), p);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn semifield_errors() {
        let f = Field::new(3, 1, None).unwrap();
        let mut s = Semifield::from_field(&f);
        s.table[3 + 2] = 0;
        assert!(matches!(semifield_to_spreadset(&s), Err(GeometryError::NotCommutative(_))));
        let zero = Semifield { p: 3, n: 1, table: vec![0; 9] };
        assert!(matches!(semifield_to_spreadset(&zero), Err(GeometryError::ZeroDivisor(_))));
        let affine = Semifield { p: 3, n: 1, table: (0..9).map(|i| (i / 3 * (i % 3) + 1) % 3).collect() };
        assert!(matches!(semifield_to_spreadset(&affine), Err(GeometryError::NotBilinear(_))));
    }

    #[test]
    fn orthogonal_search_n2() {
        let found = search_orthogonal_spreads(2, 5).unwrap();
        assert!(!found.is_empty());
        for s in &found {
            assert_eq!(s.members.len(), 3);
            let r = verify_orthogonal_spread(s);
            assert!(r.passed(), "{r}");
            for m in &s.members {
                assert!(m.is_totally_isotropic(), "totally singular implies totally isotropic");
            }
        }
        assert!(search_orthogonal_spreads(2, 0).unwrap().is_empty());
        assert_eq!(search_orthogonal_spreads(5, 1).unwrap_err(), GeometryError::TooLarge(10));
        assert_eq!(search_orthogonal_spreads(3, 1).unwrap_err(), GeometryError::OddDimension(3));
    }

    #[test]
    fn orthogonal_search_n4() {
        let found = search_orthogonal_spreads(4, 1).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].members.len(), 9);
        assert!(verify_orthogonal_spread(&found[0]).passed());
    }

    #[test]
    fn orthogonal_spread_rejections() {
        let odd = OrthogonalSpread::new(
            3,
            vec![Subspace::span(2, 6, &[vec![1, 0, 0, 0, 0, 0], vec![0, 1, 0, 0, 0, 0], vec![0, 0, 1, 0, 0, 0]]).unwrap()],
        );
        let r = verify_orthogonal_spread(&odd);
        assert!(!r.passed() && r.witnesses()[0].contains("n must be even"));

        let mut s = search_orthogonal_spreads(2, 1).unwrap().remove(0);
        s.members[0] = Subspace::span(2, 4, &[vec![1, 0, 1, 0], vec![0, 1, 0, 0]]).unwrap();
        let r = verify_orthogonal_spread(&s);
        assert!(!r.passed() && r.witnesses()[0].contains("not totally singular"), "{r}");
    }

    #[test]
    fn spread_text_round_trip() {
        let s = gf4_desarguesian_spread();
        let text = s.to_text();
        let back = SymplecticSpread::parse(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_text(), text);
        let truncated: String = text.lines().take(3).collect::<Vec<_>>().join("\n");
        assert!(SymplecticSpread::parse(&truncated).is_err());
        let o = search_orthogonal_spreads(2, 1).unwrap().remove(0);
        assert_eq!(OrthogonalSpread::parse(&o.to_text()).unwrap(), o);
    }
}
