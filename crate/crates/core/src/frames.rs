//! Orthoframes and MUB sets in exponent encoding, their construction from
//! spread sets and exponent families, the character-projection eigenframe
//! oracle, Weyl operator actions and exact verification.
//!
//! A frame row `r` is the unnormalized vector `Σ_v ω^(e[r][v]) e_v`, `ω` a
//! primitive `p`-th root of unity (or `i` in characteristic 2). The marker
//! [`ZERO`] encodes a zero coordinate, which only eigenframes of subspaces
//! meeting `0⊕V` need.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::cyclo::{squared_magnitude_of_counts, CycInt, Root};
use crate::families::{ExponentFamily, Provenance};
use crate::geometry::{SpreadSet, Subspace};
use crate::linalg;
use crate::report::{err, keyed, CheckReport, LineReader, ParseError};

/// Exponent-table marker for a zero amplitude.
pub const ZERO: u8 = u8::MAX;

const MAX_WITNESSES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("wrong characteristic: expected {expected}, got {got}")]
    WrongCharacteristic { expected: String, got: u32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("frames use incompatible roots {0} and {1}")]
    RootMismatch(Root, Root),
    #[error("subspace is not totally isotropic")]
    NotIsotropic,
    #[error("subspace is not totally singular")]
    NotSingular,
    #[error("subspace is not maximal: dimension {dim} in ambient {ambient}")]
    NotMaximal { dim: usize, ambient: usize },
    #[error("invalid frame: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FrameKind {
    /// `{⟨e_v⟩}`.
    Standard,
    Exponent { root: Root, table: Vec<u8> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orthoframe {
    dim: usize,
    pub label: String,
    pub kind: FrameKind,
}

impl Orthoframe {
    pub fn standard(dim: usize) -> Self {
        Orthoframe { dim, label: "inf".into(), kind: FrameKind::Standard }
    }

    pub fn from_table(dim: usize, root: Root, label: impl Into<String>, table: Vec<u8>) -> Result<Self, FrameError> {
        if table.len() != dim * dim {
            return Err(FrameError::DimensionMismatch(format!("table of {} entries for N = {dim}", table.len())));
        }
        if let Some(&e) = table.iter().find(|&&e| e != ZERO && e as u32 >= root.order()) {
            return Err(FrameError::Invalid(format!("exponent {e} out of range for root {root}")));
        }
        Ok(Orthoframe { dim, label: label.into(), kind: FrameKind::Exponent { root, table } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> Option<Root> {
        match &self.kind {
            FrameKind::Standard => None,
            FrameKind::Exponent { root, .. } => Some(*root),
        }
    }

    pub fn table(&self) -> Option<&[u8]> {
        match &self.kind {
            FrameKind::Standard => None,
            FrameKind::Exponent { table, .. } => Some(table),
        }
    }

    pub fn row(&self, r: usize) -> Option<&[u8]> {
        self.table().map(|t| &t[r * self.dim..(r + 1) * self.dim])
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `‖row‖²` in the unnormalized encoding.
    pub fn row_norm(&self, r: usize) -> usize {
        match self.row(r) {
            None => 1,
            Some(row) => row.iter().filter(|&&e| e != ZERO).count(),
        }
    }

    /// Every amplitude is real (±1 or 0).
    pub fn is_real(&self) -> bool {
        match &self.kind {
            FrameKind::Standard => true,
            FrameKind::Exponent { root: Root::Zeta(2), .. } => true,
            FrameKind::Exponent { root: Root::Fourth, table } => table.iter().all(|&e| e == ZERO || e % 2 == 0),
            FrameKind::Exponent { .. } => false,
        }
    }

    /// Re-encodes a `ζ₂ = −1` frame with fourth roots. Other frames are unchanged.
    pub fn to_fourth(&self) -> Orthoframe {
        match &self.kind {
            FrameKind::Exponent { root: Root::Zeta(2), table } => Orthoframe {
                dim: self.dim,
                label: self.label.clone(),
                kind: FrameKind::Exponent {
                    root: Root::Fourth,
                    table: table.iter().map(|&e| if e == ZERO { ZERO } else { 2 * e }).collect(),
                },
            },
            _ => self.clone(),
        }
    }

    /// Moves coordinate `v` to `perm[v]`.
    pub fn permute_coordinates(&self, perm: &[usize]) -> Result<Orthoframe, FrameError> {
        if perm.len() != self.dim {
            return Err(FrameError::DimensionMismatch(format!("permutation of length {} for N = {}", perm.len(), self.dim)));
        }
        let FrameKind::Exponent { root, table } = &self.kind else {
            return Ok(self.clone());
        };
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            for v in 0..n {
                out[r * n + perm[v]] = table[r * n + v];
            }
        }
        Ok(Orthoframe { dim: n, label: self.label.clone(), kind: FrameKind::Exponent { root: *root, table: out } })
    }

    /// Each row divided by its first nonzero amplitude, sorted: the frame as a
    /// set of 1-spaces.
    pub fn canonical_rows(&self) -> Vec<Vec<u8>> {
        let n = self.dim;
        let mut rows: Vec<Vec<u8>> = match &self.kind {
            FrameKind::Standard => (0..n)
                .map(|v| {
                    let mut r = vec![ZERO; n];
                    r[v] = 0;
                    r
                })
                .collect(),
            FrameKind::Exponent { root, table } => table.chunks(n).map(|row| canonical_row(row, root.order())).collect(),
        };
        rows.sort_unstable();
        rows
    }

    /// Whether every row has exactly one nonzero amplitude.
    fn is_monomial(&self) -> bool {
        match self.table() {
            None => true,
            Some(t) => t.chunks(self.dim).all(|row| row.iter().filter(|&&e| e != ZERO).count() == 1),
        }
    }
}

pub(crate) fn canonical_row(row: &[u8], order: u32) -> Vec<u8> {
    let Some(&first) = row.iter().find(|&&e| e != ZERO) else {
        return row.to_vec();
    };
    let o = order as u8;
    row.iter().map(|&e| if e == ZERO { ZERO } else { (e + o - first) % o }).collect()
}

fn common_root(a: Option<Root>, b: Option<Root>) -> Result<Option<Root>, FrameError> {
    match (a, b) {
        (None, x) | (x, None) => Ok(x),
        (Some(x), Some(y)) if x == y => Ok(Some(x)),
        (Some(Root::Zeta(2)), Some(Root::Fourth)) | (Some(Root::Fourth), Some(Root::Zeta(2))) => Ok(Some(Root::Fourth)),
        (Some(x), Some(y)) => Err(FrameError::RootMismatch(x, y)),
    }
}

/// Whether two frames are the same set of 1-spaces.
pub fn frames_equal_as_sets(f1: &Orthoframe, f2: &Orthoframe) -> Result<bool, FrameError> {
    if f1.dim != f2.dim {
        return Err(FrameError::DimensionMismatch(format!("{} vs {}", f1.dim, f2.dim)));
    }
    let Some(root) = common_root(f1.root(), f2.root())? else {
        return Ok(true);
    };
    let (a, b) = if root == Root::Fourth { (f1.to_fourth(), f2.to_fourth()) } else { (f1.clone(), f2.clone()) };
    Ok(a.canonical_rows() == b.canonical_rows())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeylKind {
    X,
    Z,
}

/// `X(b): e_v ↦ e_(v+b)` or `Z(b): e_v ↦ ω^(b·v) e_v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylOperator {
    pub kind: WeylKind,
    pub b: Vec<u32>,
}

impl WeylOperator {
    pub fn x(b: Vec<u32>) -> Self {
        WeylOperator { kind: WeylKind::X, b }
    }

    pub fn z(b: Vec<u32>) -> Self {
        WeylOperator { kind: WeylKind::Z, b }
    }

    /// `X(εᵢ)` then `Z(εᵢ)` for `i < n`.
    pub fn standard_generators(n: usize) -> Vec<WeylOperator> {
        let id = linalg::identity(n);
        let mut g: Vec<WeylOperator> = id.iter().cloned().map(WeylOperator::x).collect();
        g.extend(id.into_iter().map(WeylOperator::z));
        g
    }

    pub fn name(&self) -> String {
        let kind = match self.kind {
            WeylKind::X => "X",
            WeylKind::Z => "Z",
        };
        match self.b.iter().filter(|&&c| c != 0).count() {
            1 if self.b.contains(&1) => {
                format!("{kind}(e{})", self.b.iter().position(|&c| c == 1).unwrap())
            }
            _ => format!("{kind}({:?})", self.b),
        }
    }
}

/// The image of a frame under a Weyl operator. Standard frames are fixed.
pub fn apply_weyl(w: &WeylOperator, f: &Orthoframe) -> Result<Orthoframe, FrameError> {
    let FrameKind::Exponent { root, table } = &f.kind else {
        return Ok(f.clone());
    };
    let p = root.characteristic();
    let n = f.dim;
    if (p as usize).checked_pow(w.b.len() as u32) != Some(n) {
        return Err(FrameError::DimensionMismatch(format!("operator on Z_{p}^{} acting on dimension {n}", w.b.len())));
    }
    let k = w.b.len();
    let order = root.order();
    let mut out = vec![ZERO; n * n];
    match w.kind {
        WeylKind::X => {
            // (X(b)ψ)(u) = ψ(u − b)
            let src: Vec<usize> = (0..n)
                .map(|u| linalg::rank_of(&linalg::sub(&linalg::digits(u, p, k), &w.b, p), p))
                .collect();
            for r in 0..n {
                for u in 0..n {
                    out[r * n + u] = table[r * n + src[u]];
                }
            }
        }
        WeylKind::Z => {
            let phase: Vec<u32> = (0..n)
                .map(|v| linalg::dot(&w.b, &linalg::digits(v, p, k), p) * root.character_scale())
                .collect();
            for r in 0..n {
                for v in 0..n {
                    let e = table[r * n + v];
                    out[r * n + v] = if e == ZERO { ZERO } else { ((e as u32 + phase[v]) % order) as u8 };
                }
            }
        }
    }
    Ok(Orthoframe { dim: n, label: f.label.clone(), kind: FrameKind::Exponent { root: *root, table: out } })
}

/// An ordered collection of frames of ℂ^N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MubSet {
    pub dim: usize,
    pub frames: Vec<Orthoframe>,
    pub provenance: Option<Provenance>,
}

impl MubSet {
    pub fn new(dim: usize, frames: Vec<Orthoframe>, provenance: Option<Provenance>) -> Self {
        MubSet { dim, frames, provenance }
    }

    pub fn is_real(&self) -> bool {
        self.frames.iter().all(Orthoframe::is_real)
    }

    /// `N/2 + 1` when every frame is real, `N + 1` otherwise.
    pub fn bound(&self) -> usize {
        if self.is_real() {
            self.dim / 2 + 1
        } else {
            self.dim + 1
        }
    }

    pub fn is_complete(&self) -> bool {
        self.frames.len() == self.bound()
    }

    /// Root shared by the exponent frames, after embedding `ζ₂` into `i`.
    pub fn root(&self) -> Result<Option<Root>, FrameError> {
        self.frames.iter().try_fold(None, |acc, f| common_root(acc, f.root()))
    }

    pub fn to_text(&self) -> String {
        let root = self.root().ok().flatten().unwrap_or_else(|| {
            let p = linalg::prime_of_power(self.dim).unwrap_or(2);
            if p == 2 {
                Root::Fourth
            } else {
                Root::Zeta(p)
            }
        });
        let mut s = String::from("MUBSET version=1\n");
        match root {
            Root::Zeta(p) => writeln!(s, "ROOT zeta p={p}").unwrap(),
            Root::Fourth => s.push_str("ROOT i\n"),
        }
        writeln!(s, "DIM N={}", self.dim).unwrap();
        if let Some(p) = &self.provenance {
            writeln!(s, "PROVENANCE {p}").unwrap();
        }
        writeln!(s, "FRAMES {}", self.frames.len()).unwrap();
        for f in &self.frames {
            let f = if root == Root::Fourth { f.to_fourth() } else { f.clone() };
            match &f.kind {
                FrameKind::Standard => s.push_str("FRAME standard\n"),
                FrameKind::Exponent { table, .. } => {
                    writeln!(s, "FRAME exp label={}", f.label).unwrap();
                    for row in table.chunks(self.dim) {
                        s.push_str(&format_row(row));
                        s.push('\n');
                    }
                }
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<MubSet, ParseError> {
        let mut rd = LineReader::new(text);
        let (ln, l) = rd.next_line()?;
        let mut t = l.split_whitespace();
        if t.next() != Some("MUBSET") {
            return Err(err(ln, "expected MUBSET header"));
        }
        let version: u32 = keyed(ln, t.next(), "version")?;
        if version != 1 {
            return Err(err(ln, format!("unsupported version {version}")));
        }
        let (ln, l) = rd.next_line()?;
        let mut t = l.split_whitespace();
        if t.next() != Some("ROOT") {
            return Err(err(ln, "expected ROOT line"));
        }
        let root = match t.next() {
            Some("i") => Root::Fourth,
            Some("zeta") => {
                let p: u32 = keyed(ln, t.next(), "p")?;
                if !linalg::is_prime(p) {
                    return Err(err(ln, format!("{p} is not prime")));
                }
                Root::Zeta(p)
            }
            _ => return Err(err(ln, "ROOT must be `zeta p=<p>` or `i`")),
        };
        let (ln, l) = rd.next_line()?;
        let mut t = l.split_whitespace();
        if t.next() != Some("DIM") {
            return Err(err(ln, "expected DIM line"));
        }
        let dim: usize = keyed(ln, t.next(), "N")?;
        if dim == 0 || dim > 4096 {
            return Err(err(ln, "N out of range"));
        }
        let (mut ln, mut l) = rd.next_line()?;
        let mut provenance = None;
        if let Some(rest) = l.strip_prefix("PROVENANCE") {
            provenance = Some(parse_provenance(ln, rest)?);
            (ln, l) = rd.next_line()?;
        }
        let count: usize = l
            .strip_prefix("FRAMES")
            .ok_or_else(|| err(ln, "expected FRAMES line"))?
            .trim()
            .parse()
            .map_err(|_| err(ln, "bad frame count"))?;
        let mut frames = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, l) = rd.next_line()?;
            if l == "FRAME standard" {
                frames.push(Orthoframe::standard(dim));
                continue;
            }
            let label = l
                .strip_prefix("FRAME exp label=")
                .ok_or_else(|| err(ln, "expected `FRAME standard` or `FRAME exp label=<label>`"))?;
            let mut table = Vec::with_capacity(dim * dim);
            for _ in 0..dim {
                let (ln, l) = rd.next_line()?;
                let row = parse_row(ln, l, dim, root.order())?;
                table.extend(row);
            }
            frames.push(Orthoframe::from_table(dim, root, label, table).map_err(|e| err(ln, e.to_string()))?);
        }
        if !rd.at_end() {
            return Err(rd.error_here(format!("trailing content after {count} frames")));
        }
        Ok(MubSet { dim, frames, provenance })
    }

    /// All `N(N+1)` (or fewer) unnormalized vectors, one per line, with their norms.
    pub fn export_text(&self) -> String {
        let root = self.root().ok().flatten().unwrap_or(Root::Fourth);
        let total: usize = self.frames.len() * self.dim;
        let mut s = format!("VECTORS dim={} count={total} root={root}\n", self.dim);
        s.push_str("# entries are exponents of the root, '-' is a zero amplitude\n");
        s.push_str("# each vector has unit length after scaling by 1/sqrt(NORM); NORM is N for full-support rows\n");
        for f in &self.frames {
            let f = if root == Root::Fourth { f.to_fourth() } else { f.clone() };
            for r in 0..self.dim {
                let row: Vec<u8> = match f.row(r) {
                    Some(row) => row.to_vec(),
                    None => (0..self.dim).map(|v| if v == r { 0 } else { ZERO }).collect(),
                };
                writeln!(s, "NORM={} {}", f.row_norm(r), format_row(&row)).unwrap();
            }
        }
        s
    }

    /// Symmetric matrices `H` of the frames `θ(v) = v·Hv/2` (odd p) or
    /// `θ(v) = v̂ᵀHv̂` (p = 2), when every exponent frame has that shape.
    pub fn stabilizer_matrices(&self) -> Option<Vec<Vec<Vec<u32>>>> {
        let shape = difference_shape(self).ok()?;
        let p = shape.p;
        let n = shape.n;
        self.frames
            .iter()
            .enumerate()
            .filter(|(_, f)| f.table().is_some())
            .map(|(i, _)| {
                let theta = shape.theta(self, i);
                if p == 2 {
                    binary_quadratic_matrix(&theta, n)
                } else {
                    crate::families::quadratic_matrix_of(&theta, p, n)
                }
            })
            .collect()
    }
}

fn binary_quadratic_matrix(theta: &[u8], n: usize) -> Option<Vec<Vec<u32>>> {
    let unit = |i: usize| 1usize << (n - 1 - i);
    if theta[0] != 0 {
        return None;
    }
    let mut h = vec![vec![0u32; n]; n];
    for i in 0..n {
        if theta[unit(i)] > 1 {
            return None;
        }
        h[i][i] = theta[unit(i)] as u32;
        for j in 0..n {
            if i != j {
                let d = (theta[unit(i) | unit(j)] as u32 + 8 - theta[unit(i)] as u32 - theta[unit(j)] as u32) % 4;
                if !d.is_multiple_of(2) {
                    return None;
                }
                h[i][j] = d / 2;
            }
        }
    }
    for (r, &t) in theta.iter().enumerate() {
        let v = linalg::digits(r, 2, n);
        if binary_quadratic_value(&h, &v) != t as u32 {
            return None;
        }
    }
    Some(h)
}

/// `v̂ᵀ M̂ v̂ mod 4` for 0/1 entries.
fn binary_quadratic_value(m: &[Vec<u32>], v: &[u32]) -> u32 {
    let mut s = 0u32;
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0 {
            continue;
        }
        for (j, &vj) in v.iter().enumerate() {
            s += vj * m[i][j];
        }
    }
    s % 4
}

fn parse_provenance(ln: usize, rest: &str) -> Result<Provenance, ParseError> {
    let mut family = None;
    let mut params = Vec::new();
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| err(ln, format!("expected key=value, found `{tok}`")))?;
        if k == "family" {
            family = Some(v.to_string());
        } else {
            params.push((k.to_string(), v.to_string()));
        }
    }
    let family = family.ok_or_else(|| err(ln, "PROVENANCE needs family="))?;
    Ok(Provenance { family, params })
}

fn format_row(row: &[u8]) -> String {
    let mut s = String::with_capacity(row.len() * 2);
    for (i, &e) in row.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        if e == ZERO {
            s.push('-');
        } else {
            write!(s, "{e}").unwrap();
        }
    }
    s
}

fn parse_row(ln: usize, text: &str, len: usize, order: u32) -> Result<Vec<u8>, ParseError> {
    let row: Vec<u8> = text
        .split_whitespace()
        .map(|t| {
            if t == "-" {
                return Ok(ZERO);
            }
            match t.parse::<u32>() {
                Ok(v) if v < order => Ok(v as u8),
                Ok(v) => Err(err(ln, format!("exponent {v} out of range [0, {order})"))),
                Err(_) => Err(err(ln, format!("not an exponent: `{t}`"))),
            }
        })
        .collect::<Result<_, _>>()?;
    if row.len() != len {
        return Err(err(ln, format!("expected {len} entries, found {}", row.len())));
    }
    Ok(row)
}

fn coordinates(n: usize, p: u32) -> (usize, Vec<Vec<u32>>) {
    let dim = (p as usize).pow(n as u32);
    (dim, (0..dim).map(|r| linalg::digits(r, p, n)).collect())
}

/// `F_∞` plus `e[a][v] = a·v + v·Mv/2` for each `M ∈ 𝒦`.
pub fn frames_from_spreadset_odd(k: &SpreadSet) -> Result<MubSet, FrameError> {
    let p = k.p;
    if p == 2 {
        return Err(FrameError::WrongCharacteristic { expected: "odd p".into(), got: p });
    }
    let half = linalg::inv_mod(2, p).expect("p odd") as u64;
    let (dim, vecs) = coordinates(k.n, p);
    let mut frames = vec![Orthoframe::standard(dim)];
    for (idx, m) in k.matrices.iter().enumerate() {
        let q: Vec<u32> = vecs
            .iter()
            .map(|v| (linalg::dot(v, &linalg::mat_vec(m, v, p), p) as u64 * half % p as u64) as u32)
            .collect();
        let mut table = Vec::with_capacity(dim * dim);
        for a in &vecs {
            for (v, &qv) in vecs.iter().zip(&q) {
                table.push(((linalg::dot(a, v, p) + qv) % p) as u8);
            }
        }
        frames.push(Orthoframe::from_table(dim, Root::Zeta(p), format!("M{idx}"), table)?);
    }
    let prov = Provenance::new("spreadset", &[("p", p.to_string()), ("n", k.n.to_string())]);
    Ok(MubSet::new(dim, frames, Some(prov)))
}

/// `F_∞` plus `e[a][v] = 2â·v̂ + v̂ᵀM̂v̂ mod 4` for each `M ∈ 𝒦`.
pub fn frames_from_spreadset_binary(k: &SpreadSet) -> Result<MubSet, FrameError> {
    if k.p != 2 {
        return Err(FrameError::WrongCharacteristic { expected: "p = 2".into(), got: k.p });
    }
    let (dim, vecs) = coordinates(k.n, 2);
    let mut frames = vec![Orthoframe::standard(dim)];
    for (idx, m) in k.matrices.iter().enumerate() {
        let q: Vec<u32> = vecs.iter().map(|v| binary_quadratic_value(m, v)).collect();
        let mut table = Vec::with_capacity(dim * dim);
        for a in &vecs {
            for (v, &qv) in vecs.iter().zip(&q) {
                table.push(((2 * linalg::dot(a, v, 2) + qv) % 4) as u8);
            }
        }
        frames.push(Orthoframe::from_table(dim, Root::Fourth, format!("M{idx}"), table)?);
    }
    let prov = Provenance::new("spreadset", &[("p", "2".into()), ("n", k.n.to_string())]);
    Ok(MubSet::new(dim, frames, Some(prov)))
}

/// `F_∞` followed by one frame per label, in rank order.
pub fn frames_from_exponents(family: &ExponentFamily) -> MubSet {
    let dim = family.dim();
    let mut frames = vec![Orthoframe::standard(dim)];
    for b in 0..dim {
        frames.push(
            Orthoframe::from_table(dim, family.root(), family.label(b), family.table(b)).expect("family tables are in range"),
        );
    }
    MubSet::new(dim, frames, Some(family.provenance.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenContext {
    ComplexOddP,
    ComplexBinary,
    RealBinary,
}

/// Monomial operator `e_v ↦ ω^(t + κ b·v) e_(v+a)`.
#[derive(Clone, Debug)]
struct Monomial {
    t: u32,
    a: Vec<u32>,
    b: Vec<u32>,
}

/// Joint eigenframe of the abelian group lifted from a maximal totally
/// isotropic subspace, by projecting `e₀, e₁, …` onto each character space.
///
/// The basis vector `(a|b)` lifts to `X(a)Z(b)` for odd `p` and to
/// `i^(a·b) X(a)Z(b)` for `p = 2`, which has order 2.
pub fn eigenframe(space: &Subspace, ctx: EigenContext) -> Result<Orthoframe, FrameError> {
    let p = space.p();
    match (ctx, p) {
        (EigenContext::ComplexOddP, 2) => {
            return Err(FrameError::WrongCharacteristic { expected: "odd p".into(), got: 2 })
        }
        (EigenContext::ComplexBinary | EigenContext::RealBinary, q) if q != 2 => {
            return Err(FrameError::WrongCharacteristic { expected: "p = 2".into(), got: q })
        }
        _ => {}
    }
    let n = space.ambient() / 2;
    if space.dim() != n {
        return Err(FrameError::NotMaximal { dim: space.dim(), ambient: space.ambient() });
    }
    if !space.is_totally_isotropic() {
        return Err(FrameError::NotIsotropic);
    }
    if ctx == EigenContext::RealBinary && !space.is_totally_singular() {
        return Err(FrameError::NotSingular);
    }
    let root = if p == 2 { Root::Fourth } else { Root::Zeta(p) };
    let order = root.order();
    let kappa = root.character_scale();
    let dim = (p as usize).pow(n as u32);

    let gens: Vec<Monomial> = space
        .basis()
        .iter()
        .map(|row| {
            let (a, b) = row.split_at(n);
            let t = if p == 2 { linalg::dot(a, b, 4) } else { 0 };
            Monomial { t, a: a.to_vec(), b: b.to_vec() }
        })
        .collect();
    let mul = |g: &Monomial, h: &Monomial| Monomial {
        t: (g.t + h.t + kappa * linalg::dot(&g.b, &h.a, p)) % order,
        a: linalg::add(&g.a, &h.a, p),
        b: linalg::add(&g.b, &h.b, p),
    };
    // group[c] = Π g_i^(c_i), built by peeling off the last nonzero digit of c.
    let mut group: Vec<Monomial> = Vec::with_capacity(dim);
    group.push(Monomial { t: 0, a: vec![0; n], b: vec![0; n] });
    for c in 1..dim {
        let digits = linalg::digits(c, p, n);
        let i = (0..n).rev().find(|&i| digits[i] != 0).expect("c nonzero");
        let prev = c - (p as usize).pow((n - 1 - i) as u32);
        let g = mul(&group[prev], &gens[i]);
        group.push(g);
    }
    let coords: Vec<Vec<u32>> = (0..dim).map(|r| linalg::digits(r, p, n)).collect();
    let shifts: Vec<usize> = group.iter().map(|g| linalg::rank_of(&g.a, p)).collect();

    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(dim);
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut counts = vec![0i64; dim * order as usize];
    for k in &coords {
        let chi: Vec<u32> = coords.iter().map(|c| kappa * linalg::dot(k, c, p) % order).collect();
        for s in 0..dim {
            counts.iter_mut().for_each(|x| *x = 0);
            for (ci, g) in group.iter().enumerate() {
                let u = linalg::rank_of(&linalg::add(&coords[s], &coords[shifts[ci]], p), p);
                let e = (g.t + kappa * linalg::dot(&g.b, &coords[s], p) + order - chi[ci]) % order;
                counts[u * order as usize + e as usize] += 1;
            }
            let values: Vec<CycInt> = counts.chunks(order as usize).map(|c| CycInt::from_exponent_counts(root, c)).collect();
            let Some(first) = values.iter().position(|z| !z.is_zero()) else {
                continue;
            };
            let row: Vec<u8> = values
                .iter()
                .map(|z| {
                    if z.is_zero() {
                        return Ok(ZERO);
                    }
                    (0..order)
                        .find(|&e| CycInt::root_power(root, e as i64).mul(&values[first]).ok().as_ref() == Some(z))
                        .map(|e| e as u8)
                        .ok_or_else(|| FrameError::Invalid("projection is not a monomial multiple of a root vector".into()))
                })
                .collect::<Result<_, _>>()?;
            if seen.insert(canonical_row(&row, order)) {
                rows.push(row);
            }
            break;
        }
    }
    if rows.len() != dim {
        return Err(FrameError::Invalid(format!("found {} eigenlines, expected {dim}", rows.len())));
    }
    let frame = Orthoframe::from_table(dim, root, "eig", rows.concat())?;
    if frame.is_monomial() {
        return Ok(Orthoframe::standard(dim).with_label("eig"));
    }
    if ctx == EigenContext::RealBinary && !frame.is_real() {
        return Err(FrameError::Invalid("real context produced a non-real frame".into()));
    }
    Ok(frame)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    AllPairs,
    DifferenceClass,
}

/// Frames normalized to one root (`ζ₂` embedded into `i`).
fn prepared(m: &MubSet) -> Result<(Option<Root>, Vec<Orthoframe>), String> {
    let root = m.root().map_err(|e| e.to_string())?;
    let frames = m
        .frames
        .iter()
        .map(|f| if root == Some(Root::Fourth) { f.to_fourth() } else { f.clone() })
        .collect();
    Ok((root, frames))
}

fn bound_report(m: &MubSet) -> CheckReport {
    let mut r = CheckReport::new("bound");
    let bound = m.bound();
    let kind = if m.is_real() { "N/2+1" } else { "N+1" };
    if m.frames.len() > bound {
        r.fail(format!("{} frames exceed the bound {kind} = {bound}", m.frames.len()));
    } else if m.frames.len() == bound {
        r.note(format!("complete: {bound} frames = {kind}"));
    } else {
        r.note(format!("{} of {kind} = {bound} frames", m.frames.len()));
    }
    r
}

fn frame_name(i: usize, f: &Orthoframe) -> String {
    format!("frame {i} ({})", f.label)
}

fn push_capped(r: &mut CheckReport, w: String, total: &mut usize) {
    *total += 1;
    if *total <= MAX_WITNESSES {
        r.fail(w);
    }
}

/// Orthogonality of distinct rows of one frame, with nonzero rows.
fn orthoframe_witness(f: &Orthoframe) -> Option<String> {
    let FrameKind::Exponent { root, table } = &f.kind else {
        return None;
    };
    let n = f.dim;
    let order = root.order() as usize;
    let o = order as u8;
    if let Some(r) = (0..n).find(|&r| f.row_norm(r) == 0) {
        return Some(format!("row {r} is zero"));
    }
    let mut counts = vec![0i64; order];
    for r in 0..n {
        let x = &table[r * n..(r + 1) * n];
        for s in r + 1..n {
            let y = &table[s * n..(s + 1) * n];
            counts.iter_mut().for_each(|c| *c = 0);
            for (&a, &b) in x.iter().zip(y) {
                if a != ZERO && b != ZERO {
                    counts[((a + o - b) % o) as usize] += 1;
                }
            }
            if squared_magnitude_of_counts(*root, &counts) != Some(0) {
                return Some(format!("rows {r} and {s} are not orthogonal"));
            }
        }
    }
    None
}

/// First row pair `(r, s)` of two frames violating `N|z|² = ‖u‖²‖w‖²`.
fn cross_witness(n: usize, f: &Orthoframe, g: &Orthoframe) -> Option<String> {
    match (&f.kind, &g.kind) {
        (FrameKind::Standard, FrameKind::Standard) => (n > 1).then(|| "rows 0 and 0 coincide: N|z|^2 = N, expected 1".to_string()),
        (FrameKind::Standard, FrameKind::Exponent { .. }) => standard_cross(n, g).map(|(r, v)| format!("standard row {v} vs row {r}")),
        (FrameKind::Exponent { .. }, FrameKind::Standard) => standard_cross(n, f).map(|(r, v)| format!("row {r} vs standard row {v}")),
        (FrameKind::Exponent { root, table: t1 }, FrameKind::Exponent { table: t2, .. }) => {
            let order = root.order() as usize;
            let o = order as u8;
            let mut counts = vec![0i64; order];
            let norms1: Vec<usize> = (0..n).map(|r| f.row_norm(r)).collect();
            let norms2: Vec<usize> = (0..n).map(|r| g.row_norm(r)).collect();
            for r in 0..n {
                let x = &t1[r * n..(r + 1) * n];
                for s in 0..n {
                    let y = &t2[s * n..(s + 1) * n];
                    counts.iter_mut().for_each(|c| *c = 0);
                    for (&a, &b) in x.iter().zip(y) {
                        if a != ZERO && b != ZERO {
                            counts[((a + o - b) % o) as usize] += 1;
                        }
                    }
                    let want = (norms1[r] * norms2[s]) as i64;
                    match squared_magnitude_of_counts(*root, &counts) {
                        Some(m) if m * n as i64 == want => {}
                        Some(m) => return Some(format!("rows {r} and {s}: N|z|^2 = {}, expected {want}", m * n as i64)),
                        None => return Some(format!("rows {r} and {s}: |z|^2 is not an integer")),
                    }
                }
            }
            None
        }
    }
}

/// Row `r` and coordinate `v` where a frame fails to be unbiased to `F_∞`.
fn standard_cross(n: usize, f: &Orthoframe) -> Option<(usize, usize)> {
    (0..n).find_map(|r| {
        let row = f.row(r)?;
        if f.row_norm(r) != n {
            return Some((r, row.iter().position(|&e| e == ZERO).unwrap_or(0)));
        }
        None
    })
}

/// Data of the a-linear shape `e_b[a][v] = L[a][v] + θ_b(v)` shared by all
/// exponent frames, with `a ↦ L[a]` additive.
#[derive(Clone, Debug)]
pub struct DifferenceShape {
    pub root: Root,
    pub p: u32,
    pub n: usize,
    /// `linear[a·N + v]`.
    pub linear: Vec<u8>,
}

impl DifferenceShape {
    fn theta(&self, m: &MubSet, frame: usize) -> Vec<u8> {
        let f = if self.root == Root::Fourth { m.frames[frame].to_fourth() } else { m.frames[frame].clone() };
        f.row(0).expect("exponent frame").to_vec()
    }
}

/// Checks the shape the difference-class verifier relies on.
pub fn difference_shape(m: &MubSet) -> Result<DifferenceShape, String> {
    let (root, frames) = prepared(m)?;
    let root = root.ok_or("no exponent frames")?;
    let n_dim = m.dim;
    let p = root.characteristic();
    let n = linalg::log_exact(n_dim, p).ok_or_else(|| format!("N = {n_dim} is not a power of {p}"))?;
    let o = root.order() as u8;
    let exps: Vec<(usize, &[u8])> = frames.iter().enumerate().filter_map(|(i, f)| f.table().map(|t| (i, t))).collect();
    if let Some(&(i, _)) = exps.iter().find(|(_, t)| t.contains(&ZERO)) {
        return Err(format!("{} has zero amplitudes", frame_name(i, &frames[i])));
    }
    let reference = exps[0].1;
    let linear: Vec<u8> = (0..n_dim * n_dim)
        .map(|i| (reference[i] + o - reference[i % n_dim]) % o)
        .collect();
    for &(i, t) in &exps {
        for a in 0..n_dim {
            for v in 0..n_dim {
                if t[a * n_dim + v] != (linear[a * n_dim + v] + t[v]) % o {
                    return Err(format!("{}: row {a} is not row 0 shifted by the shared linear part", frame_name(i, &frames[i])));
                }
            }
        }
    }
    let coords: Vec<Vec<u32>> = (0..n_dim).map(|r| linalg::digits(r, p, n)).collect();
    for i in 0..n {
        let unit = (p as usize).pow((n - 1 - i) as u32);
        for a in 0..n_dim {
            let sum = linalg::rank_of(&linalg::add(&coords[a], &coords[unit], p), p);
            for v in 0..n_dim {
                if linear[sum * n_dim + v] != (linear[a * n_dim + v] + linear[unit * n_dim + v]) % o {
                    return Err(format!("linear part is not additive at row {a}, generator {i}"));
                }
            }
        }
    }
    Ok(DifferenceShape { root, p, n, linear })
}

fn orthoframe_report(frames: &[Orthoframe], dim: usize) -> CheckReport {
    let mut r = CheckReport::new("orthoframes");
    let witnesses: Vec<Option<String>> = frames
        .par_iter()
        .map(|f| {
            if f.dim != dim {
                return Some(format!("dimension {} != {dim}", f.dim));
            }
            orthoframe_witness(f)
        })
        .collect();
    let mut total = 0;
    for (i, w) in witnesses.into_iter().enumerate() {
        if let Some(w) = w {
            push_capped(&mut r, format!("{}: {w}", frame_name(i, &frames[i])), &mut total);
        }
    }
    if total > MAX_WITNESSES {
        r.note(format!("{total} frames failed in total"));
    }
    if r.passed() {
        r.note(format!("{} frames, rows pairwise orthogonal", frames.len()));
    }
    r
}

fn pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect()
}

fn all_pairs_reports(m: &MubSet) -> Vec<CheckReport> {
    let (_, frames) = match prepared(m) {
        Ok(x) => x,
        Err(e) => {
            let mut r = CheckReport::new("orthoframes");
            r.fail(e);
            return vec![r];
        }
    };
    let ortho = orthoframe_report(&frames, m.dim);
    let mut unb = CheckReport::new("unbiasedness");
    if !ortho.passed() {
        unb.fail("skipped: frames are not orthoframes");
        return vec![ortho, unb];
    }
    let ps = pairs(frames.len());
    let results: Vec<Option<String>> = ps.par_iter().map(|&(i, j)| cross_witness(m.dim, &frames[i], &frames[j])).collect();
    let mut total = 0;
    for (&(i, j), w) in ps.iter().zip(results) {
        if let Some(w) = w {
            push_capped(&mut unb, format!("{} and {}: {w}", frame_name(i, &frames[i]), frame_name(j, &frames[j])), &mut total);
        }
    }
    if total > MAX_WITNESSES {
        unb.note(format!("{total} frame pairs failed in total"));
    }
    if unb.passed() {
        unb.note(format!("{} frame pairs checked row by row", ps.len()));
    }
    vec![ortho, unb]
}

fn difference_reports(m: &MubSet) -> Vec<CheckReport> {
    let mut shape_r = CheckReport::new("shape");
    let shape = match difference_shape(m) {
        Ok(s) => s,
        Err(e) => {
            shape_r.fail(e);
            return vec![shape_r];
        }
    };
    shape_r.note("all exponent frames are a shared additive part plus a per-frame phase");
    let (_, frames) = prepared(m).expect("checked by shape");
    let n = m.dim;
    let root = shape.root;
    let order = root.order() as usize;
    let o = order as u8;
    let linear = &shape.linear;

    let mut ortho = CheckReport::new("orthoframes");
    let mut counts = vec![0i64; order];
    for d in 1..n {
        counts.iter_mut().for_each(|c| *c = 0);
        for &e in &linear[d * n..(d + 1) * n] {
            counts[e as usize] += 1;
        }
        if squared_magnitude_of_counts(root, &counts) != Some(0) {
            ortho.fail(format!("class d={d}: rows differing by d are not orthogonal"));
            break;
        }
    }
    if ortho.passed() {
        ortho.note(format!("{} difference classes orthogonal", n - 1));
    }

    let mut unb = CheckReport::new("unbiasedness");
    let thetas: Vec<Option<Vec<u8>>> = frames.iter().map(|f| f.row(0).map(<[u8]>::to_vec)).collect();
    let ps = pairs(frames.len());
    let results: Vec<Option<String>> = ps
        .par_iter()
        .map(|&(i, j)| match (&thetas[i], &thetas[j]) {
            (None, None) => Some("rows 0 and 0 coincide: N|z|^2 = N, expected 1".to_string()),
            (None, Some(_)) | (Some(_), None) => None,
            (Some(ti), Some(tj)) => {
                let delta: Vec<u8> = ti.iter().zip(tj).map(|(&a, &b)| (a + o - b) % o).collect();
                let mut counts = vec![0i64; order];
                for d in 0..n {
                    counts.iter_mut().for_each(|c| *c = 0);
                    for (&l, &dv) in linear[d * n..(d + 1) * n].iter().zip(&delta) {
                        counts[((l + dv) % o) as usize] += 1;
                    }
                    match squared_magnitude_of_counts(root, &counts) {
                        Some(x) if x == n as i64 => {}
                        Some(x) => return Some(format!("class d={d}: |z|^2 = {x}, expected {n}")),
                        None => return Some(format!("class d={d}: |z|^2 is not an integer")),
                    }
                }
                None
            }
        })
        .collect();
    let mut total = 0;
    for (&(i, j), w) in ps.iter().zip(results) {
        if let Some(w) = w {
            push_capped(&mut unb, format!("{} and {}: {w}", frame_name(i, &frames[i]), frame_name(j, &frames[j])), &mut total);
        }
    }
    if total > MAX_WITNESSES {
        unb.note(format!("{total} frame pairs failed in total"));
    }
    if unb.passed() {
        unb.note(format!("{} frame pairs x {n} difference classes", ps.len()));
    }
    vec![shape_r, ortho, unb]
}

/// Bound, orthoframe and unbiasedness reports (plus the shape check in
/// difference-class mode), in that order.
pub fn verify_mub_set_detailed(m: &MubSet, mode: VerifyMode) -> Vec<CheckReport> {
    let mut out = vec![bound_report(m)];
    if let Some(i) = m.frames.iter().position(|f| f.dim != m.dim) {
        let mut r = CheckReport::new("orthoframes");
        r.fail(format!("{}: dimension {} != {}", frame_name(i, &m.frames[i]), m.frames[i].dim, m.dim));
        out.push(r);
        return out;
    }
    match mode {
        VerifyMode::AllPairs => out.extend(all_pairs_reports(m)),
        VerifyMode::DifferenceClass => out.extend(difference_reports(m)),
    }
    out
}

pub fn verify_mub_set(m: &MubSet, mode: VerifyMode) -> CheckReport {
    let mut r = CheckReport::new("mubset");
    for part in verify_mub_set_detailed(m, mode) {
        r.absorb(&part);
    }
    r
}

/// Difference-class mode when the shape check holds, all-pairs otherwise.
pub fn verify_mub_set_auto(m: &MubSet) -> Vec<CheckReport> {
    if difference_shape(m).is_ok() {
        verify_mub_set_detailed(m, VerifyMode::DifferenceClass)
    } else {
        verify_mub_set_detailed(m, VerifyMode::AllPairs)
    }
}

/// `perm[rank(c)] = rank(x)` where `c` are the coordinates of `x` in a basis
/// given by its coordinate map.
pub fn coordinate_permutation(dim: usize, coords_of: impl Fn(usize) -> usize) -> Vec<usize> {
    let mut perm = vec![0; dim];
    for x in 0..dim {
        perm[coords_of(x)] = x;
    }
    perm
}

/// Looks up frames by canonical 1-space content.
pub fn index_one_spaces(m: &MubSet, root: Root) -> HashMap<Vec<u8>, usize> {
    let mut map = HashMap::new();
    let mut next = 0;
    for f in &m.frames {
        let f = if root == Root::Fourth { f.to_fourth() } else { f.clone() };
        for row in f.canonical_rows() {
            map.insert(row, next);
            next += 1;
        }
    }
    map
}
