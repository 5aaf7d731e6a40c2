//! Inequivalence witnesses: invariance under the standard Weyl group, the
//! orbit structure of planar-function sets, and a deterministic record of both
//! plus the plane p-rank.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::cyclo::Root;
use crate::families::planar_exponents;
use crate::frames::{apply_weyl, canonical_row, frames_equal_as_sets, index_one_spaces, FrameKind, MubSet, WeylOperator, ZERO};
use crate::linalg;
use crate::planes::{plane_p_rank, AffinePlane};
use crate::report::CheckReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivError {
    #[error("wrong provenance: {0}")]
    WrongProvenance(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorVerdict {
    pub generator: String,
    /// First frame (by index) not fixed as a 1-space set.
    pub moved_frame: Option<usize>,
}

impl GeneratorVerdict {
    pub fn passed(&self) -> bool {
        self.moved_frame.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariance {
    pub generators: Vec<GeneratorVerdict>,
}

impl Invariance {
    pub fn passed(&self) -> bool {
        self.generators.iter().all(GeneratorVerdict::passed)
    }

    pub fn report(&self, m: &MubSet) -> CheckReport {
        let mut r = CheckReport::new("standard-invariance");
        for g in &self.generators {
            match g.moved_frame {
                Some(i) => r.fail(format!("{} moves frame {i} ({})", g.generator, m.frames[i].label)),
                None => r.note(format!("{} fixes every frame", g.generator)),
            }
        }
        r
    }

    /// `X(e0)=PASS,...` in generator order.
    pub fn summary(&self) -> String {
        self.generators
            .iter()
            .map(|g| format!("{}={}", g.generator, if g.passed() { "PASS" } else { "FAIL" }))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Checks `w(F) = F` as 1-space sets for `w ∈ {X(εᵢ), Z(εᵢ)}` and every frame.
pub fn standard_invariance(m: &MubSet) -> Invariance {
    let root = m.root().ok().flatten();
    let p = root.map(Root::characteristic).or_else(|| linalg::prime_of_power(m.dim)).unwrap_or(2);
    let n = linalg::log_exact(m.dim, p).unwrap_or(0);
    let gens = WeylOperator::standard_generators(n);
    let jobs: Vec<(usize, usize)> = (0..gens.len()).flat_map(|g| (0..m.frames.len()).map(move |f| (g, f))).collect();
    let fixed: Vec<bool> = jobs
        .par_iter()
        .map(|&(g, f)| {
            let frame = &m.frames[f];
            apply_weyl(&gens[g], frame)
                .and_then(|img| frames_equal_as_sets(&img, frame))
                .unwrap_or(false)
        })
        .collect();
    let generators = gens
        .iter()
        .enumerate()
        .map(|(g, w)| GeneratorVerdict {
            generator: w.name(),
            moved_frame: (0..m.frames.len()).find(|&f| !fixed[g * m.frames.len() + f]),
        })
        .collect();
    Invariance { generators }
}

pub fn standard_invariance_test(m: &MubSet) -> CheckReport {
    standard_invariance(m).report(m)
}

/// Orbit sizes of the group generated by `e_x ↦ ζ^(T(cx)) e_x` and
/// `e_x ↦ ζ^(T(c f(x))) e_x` on the member 1-spaces, in decreasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitStructure {
    pub sizes: Vec<usize>,
    pub not_closed: Option<String>,
}

pub fn planar_orbits(m: &MubSet) -> Result<OrbitStructure, EquivError> {
    let prov = m.provenance.as_ref().ok_or_else(|| EquivError::WrongProvenance("no provenance".into()))?;
    if prov.family != "planar" {
        return Err(EquivError::WrongProvenance(format!("family {} is not planar", prov.family)));
    }
    let get = |k: &str| -> Result<usize, EquivError> {
        prov.param(k)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| EquivError::WrongProvenance(format!("missing parameter {k}")))
    };
    let family = planar_exponents(get("n")?, get("k")?).map_err(|e| EquivError::WrongProvenance(e.to_string()))?;
    if family.dim() != m.dim {
        return Err(EquivError::WrongProvenance("dimension does not match parameters".into()));
    }
    let field = &family.field;
    let values = family.planar_values.as_ref().expect("planar family");
    let root = Root::Zeta(3);
    let index = index_one_spaces(m, root);
    let total = m.frames.len() * m.dim;

    // Member 1-spaces in index order, canonical.
    let mut spaces: Vec<Vec<u8>> = Vec::with_capacity(total);
    for f in &m.frames {
        spaces.extend(f.canonical_rows());
    }
    let elems: Vec<_> = field.elements().collect();
    let mut phases: Vec<Vec<u8>> = Vec::new();
    for i in 0..field.n() {
        let c = field.basis_vector(i);
        phases.push(elems.iter().map(|x| c.mul_unchecked(x).trace() as u8).collect());
        phases.push(values.iter().map(|&fx| c.mul_unchecked(&elems[fx]).trace() as u8).collect());
    }
    let images: Vec<Result<Vec<usize>, String>> = phases
        .par_iter()
        .map(|ph| {
            spaces
                .iter()
                .enumerate()
                .map(|(s, row)| {
                    let moved: Vec<u8> = row.iter().zip(ph).map(|(&e, &t)| if e == ZERO { ZERO } else { (e + t) % 3 }).collect();
                    index
                        .get(&canonical_row(&moved, 3))
                        .copied()
                        .ok_or_else(|| format!("image of 1-space {s} is not a member"))
                })
                .collect()
        })
        .collect();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for img in &images {
        match img {
            Err(e) => return Ok(OrbitStructure { sizes: Vec::new(), not_closed: Some(e.clone()) }),
            Ok(map) => {
                for (s, &t) in map.iter().enumerate() {
                    let (a, b) = (find(&mut parent, s), find(&mut parent, t));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut size = vec![0usize; total];
    for s in 0..total {
        let r = find(&mut parent, s);
        size[r] += 1;
    }
    let mut sizes: Vec<usize> = size.into_iter().filter(|&c| c > 0).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(OrbitStructure { sizes, not_closed: None })
}

/// Passes iff there are exactly `N` singleton orbits and one orbit of size `N²`.
pub fn planar_orbit_check(m: &MubSet) -> Result<CheckReport, EquivError> {
    let o = planar_orbits(m)?;
    let mut r = CheckReport::new("planar-orbits");
    if let Some(e) = o.not_closed {
        r.fail(e);
        return Ok(r);
    }
    let n = m.dim;
    let singletons = o.sizes.iter().filter(|&&s| s == 1).count();
    let big: Vec<usize> = o.sizes.iter().copied().filter(|&s| s > 1).collect();
    let desc = format!("{singletons} singleton orbits, other orbit sizes {big:?}, total {}", o.sizes.iter().sum::<usize>());
    if singletons == n && big == [n * n] {
        r.note(desc);
    } else {
        r.fail(format!("{desc}; expected {n} singletons and one orbit of {}", n * n));
    }
    Ok(r)
}

/// Deterministic summary of one MUB set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantRecord {
    pub id: String,
    pub family: String,
    pub params: String,
    pub dimension: usize,
    pub frame_count: usize,
    pub complete: bool,
    pub standard_invariance: bool,
    pub invariance_detail: String,
    pub plane_p_rank: Option<usize>,
    pub planar_orbits: Option<String>,
}

impl InvariantRecord {
    /// Flat `key=value` lines in a fixed key order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "id={}", self.id).unwrap();
        writeln!(s, "family={}", self.family).unwrap();
        writeln!(s, "params={}", self.params).unwrap();
        writeln!(s, "dimension={}", self.dimension).unwrap();
        writeln!(s, "frames={}", self.frame_count).unwrap();
        writeln!(s, "complete={}", self.complete).unwrap();
        writeln!(s, "standard_invariance={}", if self.standard_invariance { "PASS" } else { "FAIL" }).unwrap();
        writeln!(s, "standard_invariance_detail={}", self.invariance_detail).unwrap();
        let rank = self.plane_p_rank.map_or("none".to_string(), |r| r.to_string());
        writeln!(s, "plane_p_rank={rank}").unwrap();
        writeln!(s, "planar_orbits={}", self.planar_orbits.as_deref().unwrap_or("none")).unwrap();
        s
    }
}

pub fn invariant_battery(m: &MubSet, plane: Option<&AffinePlane>) -> InvariantRecord {
    let (family, params) = match &m.provenance {
        Some(p) => (
            p.family.clone(),
            p.params.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(","),
        ),
        None => ("unknown".to_string(), String::new()),
    };
    let inv = standard_invariance(m);
    let planar_orbits = planar_orbits(m).ok().map(|o| match o.not_closed {
        Some(e) => format!("not-closed({e})"),
        None => {
            let singles = o.sizes.iter().filter(|&&s| s == 1).count();
            let rest: Vec<String> = o.sizes.iter().filter(|&&s| s > 1).map(usize::to_string).collect();
            format!("{singles}x1+{}", rest.join("+"))
        }
    });
    let exponent_frames = m.frames.iter().filter(|f| matches!(f.kind, FrameKind::Exponent { .. })).count();
    InvariantRecord {
        id: format!("{family}[{params}]/N={}/F={}/E={exponent_frames}", m.dim, m.frames.len()),
        family,
        params,
        dimension: m.dim,
        frame_count: m.frames.len(),
        complete: m.is_complete(),
        standard_invariance: inv.passed(),
        invariance_detail: inv.summary(),
        plane_p_rank: plane.map(plane_p_rank),
        planar_orbits,
    }
}
