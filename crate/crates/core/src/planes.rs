//! Affine planes from spread sets and planar functions, the incidence axioms
//! and the p-rank of the incidence matrix.
//!
//! Point `(x, y)` has index `rank(x)·N + rank(y)`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::SpreadSet;
use crate::gf::{self, Field};
use crate::linalg;
use crate::report::{err, keyed, CheckReport, LineReader, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlaneError {
    #[error("function is not planar: f(x+{0}) - f(x) = {1} has {2} solutions")]
    NotPlanar(usize, usize, usize),
    #[error("invalid spread set: {0}")]
    InvalidSpreadSet(String),
    #[error(transparent)]
    Field(#[from] gf::GfError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePlane {
    pub order: usize,
    pub lines: Vec<Vec<u32>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxiomMode {
    Exhaustive,
    Sampled { seed: u64, count: usize },
}

impl AxiomMode {
    /// Exhaustive up to order 32, otherwise `count` seeded random pairs.
    pub fn default_for(order: usize, seed: u64) -> Self {
        if order <= 32 {
            AxiomMode::Exhaustive
        } else {
            AxiomMode::Sampled { seed, count: 10_000 }
        }
    }
}

/// Lines `x = b`, then `y = Mx + b` for each `M ∈ 𝒦` in order and `b` in rank order.
pub fn plane_from_spreadset(k: &SpreadSet) -> Result<AffinePlane, PlaneError> {
    let r = k.verify();
    if !r.passed() {
        return Err(PlaneError::InvalidSpreadSet(r.witnesses()[0].clone()));
    }
    let (p, n) = (k.p, k.n);
    let order = (p as usize).pow(n as u32);
    let vecs: Vec<Vec<u32>> = (0..order).map(|r| linalg::digits(r, p, n)).collect();
    let mut lines = Vec::with_capacity(order * order + order);
    for b in 0..order {
        lines.push((0..order).map(|y| (b * order + y) as u32).collect());
    }
    for m in &k.matrices {
        let images: Vec<Vec<u32>> = vecs.iter().map(|x| linalg::mat_vec(m, x, p)).collect();
        for b in &vecs {
            lines.push(
                vecs.iter()
                    .zip(&images)
                    .map(|(x, mx)| (linalg::rank_of(x, p) * order + linalg::rank_of(&linalg::add(mx, b, p), p)) as u32)
                    .collect(),
            );
        }
    }
    Ok(AffinePlane { order, lines })
}

/// Lines `x = b` and `y = f(x + a) + b` for `f` given as a rank table.
pub fn plane_from_planar(field: &Field, values: &[usize]) -> Result<AffinePlane, PlaneError> {
    let planarity = gf::is_planar(field, values)?;
    if let Some((a, b, c)) = planarity.counterexample {
        return Err(PlaneError::NotPlanar(a, b, c));
    }
    let order = field.order();
    let mut lines = Vec::with_capacity(order * order + order);
    for b in 0..order {
        lines.push((0..order).map(|y| (b * order + y) as u32).collect());
    }
    for a in 0..order {
        let shifted: Vec<usize> = (0..order).map(|x| values[field.rank_add(x, a)]).collect();
        for b in 0..order {
            lines.push((0..order).map(|x| (x * order + field.rank_add(shifted[x], b)) as u32).collect());
        }
    }
    Ok(AffinePlane { order, lines })
}

impl AffinePlane {
    pub fn point_count(&self) -> usize {
        self.order * self.order
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("PLANE order={}\n", self.order);
        for line in &self.lines {
            let mut first = true;
            for &pt in line {
                if !first {
                    s.push(' ');
                }
                first = false;
                write!(s, "{pt}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut rd = LineReader::new(text);
        let (ln, l) = rd.next_line()?;
        let mut t = l.split_whitespace();
        if t.next() != Some("PLANE") {
            return Err(err(ln, "expected PLANE header"));
        }
        let order: usize = keyed(ln, t.next(), "order")?;
        if !(2..=4096).contains(&order) {
            return Err(err(ln, "order out of range"));
        }
        let points = order * order;
        let mut lines = Vec::new();
        while !rd.at_end() {
            let (ln, l) = rd.next_line()?;
            let line: Vec<u32> = l
                .split_whitespace()
                .map(|tok| match tok.parse::<u32>() {
                    Ok(v) if (v as usize) < points => Ok(v),
                    _ => Err(err(ln, format!("bad point index `{tok}`"))),
                })
                .collect::<Result<_, _>>()?;
            lines.push(line);
        }
        Ok(AffinePlane { order, lines })
    }

    /// Lines through each point.
    fn lines_through(&self) -> Vec<Vec<u32>> {
        let mut through = vec![Vec::new(); self.point_count()];
        for (i, line) in self.lines.iter().enumerate() {
            for &pt in line {
                if let Some(list) = through.get_mut(pt as usize) {
                    list.push(i as u32);
                }
            }
        }
        through
    }

    /// Parallel classes, found as complements of the lines meeting a representative.
    pub fn parallel_classes(&self) -> Vec<Vec<usize>> {
        let through = self.lines_through();
        let mut class_of = vec![usize::MAX; self.lines.len()];
        let mut classes = Vec::new();
        for start in 0..self.lines.len() {
            if class_of[start] != usize::MAX {
                continue;
            }
            let mut meets = vec![false; self.lines.len()];
            for &pt in &self.lines[start] {
                for &l in &through[pt as usize] {
                    meets[l as usize] = true;
                }
            }
            let class: Vec<usize> = (0..self.lines.len()).filter(|&l| l == start || !meets[l]).collect();
            for &l in &class {
                if class_of[l] == usize::MAX {
                    class_of[l] = classes.len();
                }
            }
            classes.push(class);
        }
        classes
    }
}

/// Counts, line sizes and the unique-line axiom (exhaustive or sampled), plus
/// the parallel-class structure.
pub fn verify_plane_axioms(plane: &AffinePlane, mode: AxiomMode) -> CheckReport {
    let mut r = CheckReport::new("plane-axioms");
    let n = plane.order;
    let points = n * n;
    if plane.lines.len() != n * n + n {
        r.fail(format!("{} lines, expected N^2+N = {}", plane.lines.len(), n * n + n));
    }
    for (i, line) in plane.lines.iter().enumerate() {
        let mut sorted = line.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if line.len() != n || sorted.len() != n {
            r.fail(format!("line {i} has {} distinct points, expected {n}", sorted.len()));
            break;
        }
        if let Some(&pt) = line.iter().find(|&&pt| pt as usize >= points) {
            r.fail(format!("line {i} has point {pt} outside 0..{points}"));
            break;
        }
    }
    if !r.passed() && plane.lines.iter().any(|l| l.iter().any(|&pt| pt as usize >= points)) {
        return r;
    }
    match mode {
        AxiomMode::Exhaustive => {
            let mut count = vec![0u8; points * points];
            for line in &plane.lines {
                for (i, &a) in line.iter().enumerate() {
                    for &b in &line[i + 1..] {
                        let (a, b) = (a.min(b) as usize, a.max(b) as usize);
                        count[a * points + b] = count[a * points + b].saturating_add(1);
                    }
                }
            }
            'outer: for a in 0..points {
                for b in a + 1..points {
                    let c = count[a * points + b];
                    if c != 1 {
                        r.fail(format!("points {a} and {b} lie on {c} common lines"));
                        break 'outer;
                    }
                }
            }
            if r.passed() {
                r.note(format!("all {} point pairs on exactly one line", points * (points - 1) / 2));
            }
        }
        AxiomMode::Sampled { seed, count } => {
            let through = plane.lines_through();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<(usize, usize)> = (0..count)
                .map(|_| {
                    let a = rng.gen_range(0..points);
                    let mut b = rng.gen_range(0..points - 1);
                    if b >= a {
                        b += 1;
                    }
                    (a, b)
                })
                .collect();
            let bad = samples.par_iter().find_first(|&&(a, b)| {
                let la = &through[a];
                let lb = &through[b];
                la.iter().filter(|l| lb.contains(l)).count() != 1
            });
            if let Some(&(a, b)) = bad {
                let common = through[a].iter().filter(|l| through[b].contains(l)).count();
                r.fail(format!("points {a} and {b} lie on {common} common lines"));
            } else {
                r.note(format!("{count} sampled point pairs (seed {seed}) on exactly one line"));
            }
        }
    }
    if r.passed() {
        let classes = plane.parallel_classes();
        if classes.len() != n + 1 || classes.iter().any(|c| c.len() != n) {
            r.fail(format!("parallel classes have sizes {:?}, expected {} classes of {n}", classes.iter().map(Vec::len).collect::<Vec<_>>(), n + 1));
        } else {
            r.note(format!("{} parallel classes of {n} lines", n + 1));
        }
    }
    r
}

/// Rank over ℤ_p of the line–point incidence matrix, `p` the prime of the order.
pub fn plane_p_rank(plane: &AffinePlane) -> usize {
    let points = plane.point_count();
    let p = linalg::prime_of_power(plane.order).unwrap_or(2);
    if p == 2 {
        let words = points.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = plane
            .lines
            .iter()
            .map(|line| {
                let mut r = vec![0u64; words];
                for &pt in line {
                    r[pt as usize / 64] ^= 1 << (pt % 64);
                }
                r
            })
            .collect();
        linalg::rank_gf2(&mut rows)
    } else {
        let mut rows: Vec<Vec<u8>> = plane
            .lines
            .iter()
            .map(|line| {
                let mut r = vec![0u8; points];
                for &pt in line {
                    r[pt as usize] = ((r[pt as usize] as u32 + 1) % p) as u8;
                }
                r
            })
            .collect();
        linalg::rank_bytes(&mut rows, p)
    }
}
