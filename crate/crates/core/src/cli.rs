//! `mubtool`: build, verify, export, invariants and search.
//!
//! Exit codes: 0 when every check passes, 1 when a verification fails, 2 for
//! usage, parameter, parse and I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::equiv::invariant_battery;
use crate::families::{self, bkl_exponents, desarguesian_exponents, kantor_binary, planar_exponents, FamilyError, Provenance};
use crate::frames::{
    frames_from_exponents, frames_from_spreadset_binary, frames_from_spreadset_odd, verify_mub_set_auto,
    verify_mub_set_detailed, FrameError, MubSet, VerifyMode,
};
use crate::geometry::{
    search_orthogonal_spreads, spreadset_from_spread, verify_orthogonal_spread, verify_symplectic_spread, GeometryError,
    OrthogonalSpread, SpreadSet, Subspace, SymplecticSpread,
};
use crate::gf::Field;
use crate::planes::{plane_from_planar, plane_from_spreadset, verify_plane_axioms, AffinePlane, AxiomMode, PlaneError};
use crate::report::{CheckReport, ParseError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parameters(String),
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Plane(#[from] PlaneError),
}

/// Validated command line.
#[derive(Debug, Parser)]
#[command(name = "mubtool", version, about = "Build and verify complete sets of mutually unbiased bases")]
pub struct RunConfig {
    /// Worker threads for verification (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a family, verify it and write a MUBSET file.
    Build(BuildArgs),
    /// Verify a MUBSET, SPREAD, ORTHOSPREAD or PLANE file.
    Verify(VerifyArgs),
    /// Write every vector of a MUBSET file, one per line.
    Export(ExportArgs),
    /// Print the invariant record of a MUBSET file.
    Invariants(InvariantsArgs),
    /// Search for orthogonal spreads of Z_2^(2n) and write ORTHOSPREAD files.
    Search(SearchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Desarguesian,
    Kantor,
    Bkl,
    Planar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    AllPairs,
    DifferenceClass,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub family: FamilyKind,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the symplectic spread (spread-based families).
    #[arg(long)]
    pub spread_out: Option<PathBuf>,
    /// Also write the affine plane.
    #[arg(long)]
    pub plane_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Seed for sampled plane verification.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Point pairs sampled for planes of order above 32.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InvariantsArgs {
    pub file: PathBuf,
    /// Plane to attach instead of the one derived from the frames.
    #[arg(long)]
    pub plane: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub limit: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Family selector with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub p: Option<u32>,
    pub n: usize,
    pub s: Option<usize>,
    pub k: Option<usize>,
}

/// A constructed family with whatever geometry came with it.
#[derive(Clone, Debug)]
pub struct Built {
    pub mubset: MubSet,
    pub spread_set: Option<SpreadSet>,
    pub spread: Option<SymplecticSpread>,
    pub planar: Option<(Field, Vec<usize>)>,
}

impl Built {
    /// The translation plane for spread-based sets, `π(f)` for planar ones.
    pub fn plane(&self) -> Result<Option<AffinePlane>, CliError> {
        if let Some(k) = &self.spread_set {
            return Ok(Some(plane_from_spreadset(k)?));
        }
        if let Some((field, values)) = &self.planar {
            return Ok(Some(plane_from_planar(field, values)?));
        }
        Ok(attached_plane(&self.mubset))
    }
}

fn param<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Parameters(format!("--{name} is required for this family")))
}

pub fn build_family(spec: &FamilySpec) -> Result<Built, CliError> {
    let n = spec.n;
    match spec.kind {
        FamilyKind::Desarguesian => {
            let p = param(spec.p, "p")?;
            let prov = Provenance::new("desarguesian", &[("p", p.to_string()), ("n", n.to_string())]);
            if p == 2 || n % 2 == 1 {
                let k = families::desarguesian(p, n)?;
                let mut m = if p == 2 { frames_from_spreadset_binary(&k)? } else { frames_from_spreadset_odd(&k)? };
                m.provenance = Some(prov);
                let spread = crate::geometry::spread_from_spreadset(&k)?;
                Ok(Built { mubset: m, spread_set: Some(k), spread: Some(spread), planar: None })
            } else {
                let fam = desarguesian_exponents(p, n)?;
                Ok(Built { mubset: frames_from_exponents(&fam), spread_set: None, spread: None, planar: None })
            }
        }
        FamilyKind::Kantor => {
            if spec.p.is_some_and(|p| p != 2) {
                return Err(CliError::Parameters("the Kantor family is binary: --p must be 2".into()));
            }
            let spread = kantor_binary(n)?;
            let k = kantor_spread_set(&spread)?;
            let mut m = frames_from_spreadset_binary(&k)?;
            m.provenance = Some(Provenance::new("kantor", &[("p", "2".into()), ("n", n.to_string())]));
            Ok(Built { mubset: m, spread_set: Some(k), spread: Some(spread), planar: None })
        }
        FamilyKind::Bkl => {
            let fam = bkl_exponents(param(spec.p, "p")?, n, param(spec.s, "s")?)?;
            Ok(Built { mubset: frames_from_exponents(&fam), spread_set: None, spread: None, planar: None })
        }
        FamilyKind::Planar => {
            if spec.p.is_some_and(|p| p != 3) {
                return Err(CliError::Parameters("planar functions are over GF(3^n): --p must be 3".into()));
            }
            let fam = planar_exponents(n, param(spec.k, "k")?)?;
            let planar = Some((fam.field.clone(), fam.planar_values.clone().expect("planar family")));
            Ok(Built { mubset: frames_from_exponents(&fam), spread_set: None, spread: None, planar })
        }
    }
}

/// The spread set of a Kantor spread relative to `y = 0` (member 1) and `x = 0` (member 0).
pub fn kantor_spread_set(spread: &SymplecticSpread) -> Result<SpreadSet, CliError> {
    let n = spread.space.n;
    let k = spreadset_from_spread(spread, &spread.members[1], &Subspace::vertical(2, n))?;
    let r = k.verify();
    if !r.passed() {
        return Err(CliError::Parameters(format!("derived spread set is invalid: {}", r.witnesses()[0])));
    }
    Ok(k)
}

/// Translation plane of a spread-based set, read off the stabilizers of its frames.
pub fn attached_plane(m: &MubSet) -> Option<AffinePlane> {
    let mats = m.stabilizer_matrices()?;
    let p = m.root().ok()??.characteristic();
    let n = mats.first()?.len();
    let k = SpreadSet::new(p, n, mats).ok()?;
    plane_from_spreadset(&k).ok()
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn parse_err(path: &Path) -> impl Fn(ParseError) -> CliError + '_ {
    move |source| CliError::Parse { path: path.display().to_string(), source }
}

fn mub_reports(m: &MubSet, mode: ModeArg) -> Vec<CheckReport> {
    match mode {
        ModeArg::Auto => verify_mub_set_auto(m),
        ModeArg::AllPairs => verify_mub_set_detailed(m, VerifyMode::AllPairs),
        ModeArg::DifferenceClass => verify_mub_set_detailed(m, VerifyMode::DifferenceClass),
    }
}

fn print_reports(out: &mut dyn Write, reports: &[CheckReport]) -> bool {
    for r in reports {
        let _ = writeln!(out, "{r}");
    }
    reports.iter().all(CheckReport::passed)
}

fn cmd_build(a: &BuildArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let spec = FamilySpec { kind: a.family, p: a.p, n: a.n, s: a.s, k: a.k };
    let built = build_family(&spec)?;
    let mut reports = Vec::new();
    if let Some(s) = &built.spread {
        reports.push(verify_symplectic_spread(s));
    }
    if let Some(k) = &built.spread_set {
        reports.push(k.verify());
    }
    reports.extend(mub_reports(&built.mubset, a.mode));
    let plane = match &a.plane_out {
        Some(_) => {
            let pl = built.plane()?.ok_or_else(|| CliError::Parameters("no plane for this family".into()))?;
            reports.push(verify_plane_axioms(&pl, AxiomMode::default_for(pl.order, 0)));
            Some(pl)
        }
        None => None,
    };
    if !print_reports(out, &reports) {
        return Ok(false);
    }
    write(&a.out, &built.mubset.to_text())?;
    let _ = writeln!(out, "wrote {} frames of dimension {} to {}", built.mubset.frames.len(), built.mubset.dim, a.out.display());
    if let Some(path) = &a.spread_out {
        let s = built.spread.as_ref().ok_or_else(|| CliError::Parameters("no spread for this family".into()))?;
        write(path, &s.to_text())?;
    }
    if let (Some(path), Some(pl)) = (&a.plane_out, plane) {
        write(path, &pl.to_text())?;
    }
    Ok(true)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let text = read(&a.file)?;
    let header = text.split_whitespace().next().unwrap_or("");
    let on_err = parse_err(&a.file);
    let reports = match header {
        "MUBSET" => mub_reports(&MubSet::parse(&text).map_err(on_err)?, a.mode),
        "SPREAD" => vec![verify_symplectic_spread(&SymplecticSpread::parse(&text).map_err(on_err)?)],
        "ORTHOSPREAD" => vec![verify_orthogonal_spread(&OrthogonalSpread::parse(&text).map_err(on_err)?)],
        "PLANE" => {
            let pl = AffinePlane::parse(&text).map_err(on_err)?;
            let mode = if pl.order <= 32 { AxiomMode::Exhaustive } else { AxiomMode::Sampled { seed: a.seed, count: a.samples } };
            vec![verify_plane_axioms(&pl, mode)]
        }
        _ => {
            return Err(on_err(ParseError { line: 1, message: "unknown file type (expected MUBSET, SPREAD, ORTHOSPREAD or PLANE)".into() }))
        }
    };
    Ok(print_reports(out, &reports))
}

fn cmd_export(a: &ExportArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let m = MubSet::parse(&read(&a.file)?).map_err(parse_err(&a.file))?;
    let text = m.export_text();
    match &a.out {
        Some(path) => write(path, &text)?,
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(true)
}

fn cmd_invariants(a: &InvariantsArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let m = MubSet::parse(&read(&a.file)?).map_err(parse_err(&a.file))?;
    let plane = match &a.plane {
        Some(path) => Some(AffinePlane::parse(&read(path)?).map_err(parse_err(path))?),
        None => attached_plane(&m),
    };
    let _ = out.write_all(invariant_battery(&m, plane.as_ref()).to_text().as_bytes());
    Ok(true)
}

fn cmd_search(a: &SearchArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let found = search_orthogonal_spreads(a.n, a.limit)?;
    let mut ok = true;
    for (i, s) in found.iter().enumerate() {
        let r = verify_orthogonal_spread(s);
        ok &= r.passed();
        let path = a.out_dir.join(format!("orthospread-n{}-{i}.txt", a.n));
        write(&path, &s.to_text())?;
        let _ = writeln!(out, "{r}");
        let _ = writeln!(out, "wrote {}", path.display());
    }
    let _ = writeln!(out, "found {} orthogonal spreads", found.len());
    Ok(ok)
}

fn dispatch(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    match &cfg.command {
        Command::Build(a) => cmd_build(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Export(a) => cmd_export(a, out),
        Command::Invariants(a) => cmd_invariants(a, out),
        Command::Search(a) => cmd_search(a, out),
    }
}

/// Runs the tool and returns its exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let (result, buf) = pool.install(|| {
        let mut buf = Vec::new();
        (dispatch(&cfg, &mut buf), buf)
    });
    let _ = out.write_all(&buf);
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("mubtool").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_capture(&["build", "--family", "nope", "--n", "1", "--out", "x"]).0, EXIT_ERROR);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_ERROR);
        assert_eq!(run_capture(&["--help"]).0, EXIT_PASS);
    }

    #[test]
    fn bad_bkl_parameters() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("b.mub");
        let (code, _, err) =
            run_capture(&["build", "--family", "bkl", "--p", "3", "--n", "3", "--s", "2", "--out", out.to_str().unwrap()]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.contains("bad parameters"), "{err}");
        assert!(!out.exists());
    }

    #[test]
    fn build_specs() {
        let d = build_family(&FamilySpec { kind: FamilyKind::Desarguesian, p: Some(3), n: 2, s: None, k: None }).unwrap();
        assert_eq!(d.mubset.frames.len(), 10);
        assert!(d.spread_set.is_none());
        assert!(attached_plane(&d.mubset).is_some());
        let missing = build_family(&FamilySpec { kind: FamilyKind::Bkl, p: Some(3), n: 3, s: None, k: None });
        assert!(matches!(missing, Err(CliError::Parameters(_))));
    }
}
