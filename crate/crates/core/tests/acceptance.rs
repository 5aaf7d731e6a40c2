//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use mub_core::cli::{attached_plane, build_family, kantor_spread_set, FamilyKind, FamilySpec};
use mub_core::equiv::{invariant_battery, planar_orbits, standard_invariance, standard_invariance_test};
use mub_core::families::{bkl_exponents, desarguesian, desarguesian_exponents, kantor_binary, planar_exponents, ExponentFamily};
use mub_core::frames::{
    eigenframe, frames_equal_as_sets, frames_from_exponents, verify_mub_set, verify_mub_set_detailed, EigenContext,
    FrameKind, MubSet, Orthoframe, VerifyMode, ZERO,
};
use mub_core::geometry::{
    search_orthogonal_spreads, spread_from_spreadset, verify_orthogonal_spread, verify_symplectic_spread,
    OrthogonalSpread, SpreadSet, Subspace, SymplecticSpread,
};
use mub_core::gf::is_planar;
use mub_core::planes::{plane_from_spreadset, verify_plane_axioms, AxiomMode};
use mub_core::CheckReport;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

const DESARGUESIAN: [(u32, usize); 11] =
    [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1)];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn passed(r: &CheckReport) -> Result<(), String> {
    ensure(r.passed(), || r.to_string())
}

fn spec(kind: FamilyKind, p: Option<u32>, n: usize, s: Option<usize>, k: Option<usize>) -> FamilySpec {
    FamilySpec { kind, p, n, s, k }
}

fn desarg(p: u32, n: usize) -> Result<MubSet, String> {
    Ok(build_family(&spec(FamilyKind::Desarguesian, Some(p), n, None, None)).map_err(|e| e.to_string())?.mubset)
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool").install(f)
}

fn criterion_1() -> Outcome {
    let mut slowest = Duration::ZERO;
    for (p, n) in DESARGUESIAN {
        let start = Instant::now();
        let m = single_thread(|| desarg(p, n))?;
        let n_dim = (p as usize).pow(n as u32);
        ensure(m.frames.len() == n_dim + 1, || format!("({p},{n}): {} frames", m.frames.len()))?;
        passed(&single_thread(|| verify_mub_set(&m, VerifyMode::AllPairs)))
            .map_err(|e| format!("({p},{n}): {e}"))?;
        let t = start.elapsed();
        ensure(t <= Duration::from_secs(60), || format!("({p},{n}) took {t:?}"))?;
        slowest = slowest.max(t);
    }
    Ok(format!("11 instances complete, slowest {:.2}s", slowest.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let spread = kantor_binary(5).map_err(|e| e.to_string())?;
    passed(&verify_symplectic_spread(&spread))?;
    ensure(spread.members.len() == 33 && spread.space.n == 5, || "wrong spread shape".into())?;
    let k = kantor_spread_set(&spread).map_err(|e| e.to_string())?;
    passed(&k.verify())?;
    let built = build_family(&spec(FamilyKind::Kantor, None, 5, None, None)).map_err(|e| e.to_string())?;
    ensure(built.mubset.frames.len() == 33, || "frame count".into())?;
    passed(&verify_mub_set(&built.mubset, VerifyMode::AllPairs))?;
    let des = spread_from_spreadset(&desarguesian(2, 5).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(des.canonical_members() != spread.canonical_members(), || "Kantor spread equals Desarguesian".into())?;
    Ok("33-member spread, spread set and 33 frames of C^32 verified; differs from Desarguesian".into())
}

fn criterion_3() -> Outcome {
    let fam = bkl_exponents(3, 3, 1).map_err(|e| e.to_string())?;
    let m = frames_from_exponents(&fam);
    ensure(m.frames.len() == 28 && m.dim == 27, || "wrong shape".into())?;
    passed(&verify_mub_set(&m, VerifyMode::AllPairs))?;
    let zero = fam.field.zero().rank();
    let b0 = m.frames.iter().find(|f| f.label == fam.label(zero)).ok_or("no b=0 frame")?;
    let fourier = eigenframe(&Subspace::graph(3, &vec![vec![0; 3]; 3]), EigenContext::ComplexOddP).map_err(|e| e.to_string())?;
    ensure(frames_equal_as_sets(b0, &fourier).map_err(|e| e.to_string())?, || "b=0 frame is not the Fourier frame".into())?;
    Ok("28 MUBs of C^27; b=0 frame is the Fourier frame".into())
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    single_thread(|| {
        let fam = planar_exponents(5, 3).map_err(|e| e.to_string())?;
        let values = fam.planar_values.clone().ok_or("no planar values")?;
        let planarity = is_planar(&fam.field, &values).map_err(|e| e.to_string())?;
        ensure(planarity.planar, || format!("x^14 not planar: {:?}", planarity.counterexample))?;
        let m = frames_from_exponents(&fam);
        ensure(m.frames.len() == 244, || "frame count".into())?;
        for r in verify_mub_set_detailed(&m, VerifyMode::DifferenceClass) {
            passed(&r)?;
        }
        let inv = standard_invariance(&m);
        let x_fails = inv.generators.iter().any(|g| g.generator.starts_with('X') && !g.passed());
        let z_pass = inv.generators.iter().filter(|g| g.generator.starts_with('Z')).all(|g| g.passed());
        ensure(x_fails && z_pass, || format!("invariance: {}", inv.summary()))?;
        let orbits = planar_orbits(&m).map_err(|e| e.to_string())?;
        let mut want = vec![243 * 243];
        want.extend(std::iter::repeat_n(1, 243));
        ensure(orbits.sizes == want && orbits.not_closed.is_none(), || format!("orbits {:?}", &orbits.sizes[..3]))?;
        Ok::<_, String>(())
    })?;
    let t = start.elapsed();
    ensure(t <= Duration::from_secs(600), || format!("took {t:?}"))?;
    Ok(format!("x^14 planar, 244 frames verified, X fails / Z passes, 243 + 243^2 orbits in {:.1}s", t.as_secs_f64()))
}

/// Every spread-based instance with N ≤ 32: the MubSet and, per frame, the
/// maximal isotropic subspace it should be the eigenframe of.
fn small_instances() -> Result<Vec<(String, MubSet, Vec<Subspace>)>, String> {
    let mut out = Vec::new();
    let from_exponents = |name: String, fam: ExponentFamily| -> Result<(String, MubSet, Vec<Subspace>), String> {
        let p = fam.field.p();
        let n = fam.field.n();
        let mut spaces = vec![Subspace::vertical(p, n)];
        for b in 0..fam.dim() {
            spaces.push(Subspace::graph(p, &fam.quadratic_matrix(b).ok_or("not quadratic")?));
        }
        Ok((name, frames_from_exponents(&fam), spaces))
    };
    for (p, n) in DESARGUESIAN {
        let built = build_family(&spec(FamilyKind::Desarguesian, Some(p), n, None, None)).map_err(|e| e.to_string())?;
        let name = format!("desarguesian({p},{n})");
        match built.spread {
            Some(s) => out.push((name, built.mubset, s.members)),
            None => out.push(from_exponents(name, desarguesian_exponents(p, n).map_err(|e| e.to_string())?)?),
        }
    }
    let kantor = build_family(&spec(FamilyKind::Kantor, None, 5, None, None)).map_err(|e| e.to_string())?;
    let k = kantor.spread_set.ok_or("no spread set")?;
    out.push(("kantor(5)".into(), kantor.mubset, spread_from_spreadset(&k).map_err(|e| e.to_string())?.members));
    out.push(from_exponents("bkl(3,3,1)".into(), bkl_exponents(3, 3, 1).map_err(|e| e.to_string())?)?);
    Ok(out)
}

fn criterion_5() -> Outcome {
    let instances = small_instances()?;
    let mut frames = 0;
    for (name, m, spaces) in &instances {
        ensure(m.frames.len() == spaces.len(), || format!("{name}: frame/space count"))?;
        let ctx = if m.dim.is_power_of_two() { EigenContext::ComplexBinary } else { EigenContext::ComplexOddP };
        for (f, s) in m.frames.iter().zip(spaces) {
            let e = eigenframe(s, ctx).map_err(|e| format!("{name} {}: {e}", f.label))?;
            ensure(frames_equal_as_sets(f, &e).map_err(|e| e.to_string())?, || format!("{name}: frame {} differs", f.label))?;
            frames += 1;
        }
        ensure(matches!(m.frames[0].kind, FrameKind::Standard), || format!("{name}: first frame not standard"))?;
    }
    Ok(format!("{frames} frames over {} instances equal their eigenframes", instances.len()))
}

fn criterion_6() -> Outcome {
    let instances = small_instances()?;
    for (name, m, _) in &instances {
        passed(&standard_invariance_test(m)).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} spread-based sets fixed by all standard generators", instances.len()))
}

fn criterion_7() -> Outcome {
    let found = search_orthogonal_spreads(2, 1).map_err(|e| e.to_string())?;
    let spread = found.first().ok_or("no orthogonal spread for n=2")?;
    passed(&verify_orthogonal_spread(spread))?;
    ensure(spread.members.len() == 3, || "member count".into())?;
    let mut frames = Vec::new();
    for (i, s) in spread.members.iter().enumerate() {
        let f = eigenframe(s, EigenContext::RealBinary).map_err(|e| e.to_string())?;
        ensure(f.is_real(), || format!("frame {i} is not real"))?;
        frames.push(f.with_label(format!("S{i}")));
    }
    let m = MubSet::new(4, frames.clone(), None);
    ensure(m.is_real() && m.bound() == 3, || "real bound".into())?;
    passed(&verify_mub_set(&m, VerifyMode::AllPairs))?;
    let mut extra = frames.clone();
    extra.push(Orthoframe::standard(4).with_label("extra"));
    let reports = verify_mub_set_detailed(&MubSet::new(4, extra, None), VerifyMode::AllPairs);
    let bound = reports.iter().find(|r| r.name == "bound").ok_or("no bound report")?;
    ensure(!bound.passed(), || "4th real frame accepted".into())?;
    let odd = OrthogonalSpread::new(3, vec![Subspace::span(2, 6, &[vec![1, 0, 0, 0, 0, 0], vec![0, 1, 0, 0, 0, 0], vec![0, 0, 1, 0, 0, 0]]).unwrap()]);
    let r = verify_orthogonal_spread(&odd);
    ensure(!r.passed() && r.witnesses().iter().any(|w| w.contains("n must be even")), || r.to_string())?;
    ensure(search_orthogonal_spreads(3, 1).is_err(), || "search accepted n=3".into())?;
    Ok("3 real MUBs of R^4; 4th frame rejected by N/2+1; n=3 rejected".into())
}

fn criterion_8() -> Outcome {
    let mut cases = 0;
    for (p, n) in DESARGUESIAN.into_iter().filter(|&(p, n)| (p as usize).pow(n as u32) <= 8) {
        let m = desarg(p, n)?;
        for f in &m.frames {
            let mut frames = m.frames.clone();
            frames.push(f.clone().with_label(format!("{}+", f.label)));
            let r = verify_mub_set(&MubSet::new(m.dim, frames, None), VerifyMode::AllPairs);
            ensure(!r.passed(), || format!("({p},{n}) accepted a copy of {}", f.label))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} augmented sets rejected"))
}

fn records(threads: usize) -> Result<Vec<String>, String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    pool.install(|| {
        let mut specs: Vec<FamilySpec> =
            DESARGUESIAN.iter().map(|&(p, n)| spec(FamilyKind::Desarguesian, Some(p), n, None, None)).collect();
        specs.push(spec(FamilyKind::Kantor, None, 5, None, None));
        specs.push(spec(FamilyKind::Bkl, Some(3), 3, Some(1), None));
        specs.push(spec(FamilyKind::Planar, Some(3), 5, None, Some(3)));
        specs
            .iter()
            .map(|s| {
                let built = build_family(s).map_err(|e| e.to_string())?;
                let plane = attached_plane(&built.mubset);
                Ok(invariant_battery(&built.mubset, plane.as_ref()).to_text())
            })
            .collect()
    })
}

fn criterion_9() -> Outcome {
    let reference = records(1)?;
    for threads in [1, 1, 4, 4, 4] {
        ensure(records(threads)? == reference, || format!("records differ at {threads} threads"))?;
    }
    Ok(format!("{} records identical over 3 runs at 1 and 4 threads", reference.len()))
}

fn mentions(r: &CheckReport, needle: &str) -> Result<(), String> {
    ensure(!r.passed() && r.witnesses().iter().any(|w| w.contains(needle)), || format!("expected witness '{needle}': {r}"))
}

fn criterion_10() -> Outcome {
    // One exponent bumped.
    let m = desarg(3, 2)?;
    let mut bumped = m.clone();
    let f = &bumped.frames[2];
    let mut table = f.table().ok_or("not an exponent frame")?.to_vec();
    let cell = 4 * 9 + 5;
    ensure(table[cell] != ZERO, || "zero cell".into())?;
    table[cell] = (table[cell] + 1) % 3;
    bumped.frames[2] = Orthoframe::from_table(9, f.root().unwrap(), f.label.clone(), table).map_err(|e| e.to_string())?;
    mentions(&verify_mub_set(&bumped, VerifyMode::AllPairs), "frame 2")?;

    // One spread member replaced.
    let k = desarguesian(2, 3).map_err(|e| e.to_string())?;
    let spread = spread_from_spreadset(&k).map_err(|e| e.to_string())?;
    let mut members = spread.members.clone();
    members[3] = members[1].clone();
    mentions(&verify_symplectic_spread(&SymplecticSpread::new(2, 3, members)), "meet in dimension 3")?;
    let mut members = spread.members.clone();
    members[3] = Subspace::span(2, 6, &[vec![1, 0, 0, 0, 0, 0], vec![0, 0, 0, 1, 0, 0], vec![0, 1, 0, 0, 0, 0]]).unwrap();
    mentions(&verify_symplectic_spread(&SymplecticSpread::new(2, 3, members)), "not totally isotropic")?;

    // Spread set with a repeated matrix.
    let mut mats = k.matrices.clone();
    mats[5] = mats[4].clone();
    mentions(&SpreadSet::new_unchecked(2, 3, mats).verify(), "is singular")?;

    // One plane line deleted.
    let mut plane = plane_from_spreadset(&desarguesian(3, 1).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    passed(&verify_plane_axioms(&plane, AxiomMode::Exhaustive))?;
    plane.lines.remove(7);
    mentions(&verify_plane_axioms(&plane, AxiomMode::Exhaustive), "lines, expected")?;

    // Orthogonal spread with a member replaced.
    let mut ortho = search_orthogonal_spreads(2, 1).map_err(|e| e.to_string())?.remove(0);
    ortho.members[2] = ortho.members[0].clone();
    mentions(&verify_orthogonal_spread(&ortho), "meet in dimension")?;
    Ok("mutated MUB set, spread, spread set, plane and orthogonal spread all rejected with witnesses".into())
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("desarguesian completeness", criterion_1),
        ("kantor family", criterion_2),
        ("bkl family", criterion_3),
        ("planar family", criterion_4),
        ("eigenframe oracle", criterion_5),
        ("weyl invariance", criterion_6),
        ("real case", criterion_7),
        ("bound enforcement", criterion_8),
        ("invariant determinism", criterion_9),
        ("negative controls", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {} ({name}): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
