//! `atilde`: reproducible runs over triangle presentations, Cayley balls,
//! boundary measures and classification certificates.
//!
//! Every subcommand emits a JSON artifact (stdout, or `--out PATH`) and,
//! when writing to a file, a sibling `<out>.manifest.json` recording the
//! command line, input/output hashes, versions, seed and timing. Artifact
//! bytes are deterministic for identical inputs and seed; the manifest's
//! timing field is informational only.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage error.

use anyhow::{anyhow, Context};
use atilde::boundary::{cylinder_measure, m_vector, rn_derivative, CylinderSet};
use atilde::counting::{
    freeness_bound, q_power, rational_string, sphere_size, triangle_count, wall_triangle_count,
};
use atilde::dynamics::{
    classify, generator_rn_census, phi_construct, ratio_descriptor, transitivity_witnesses,
    triangle_census,
};
use atilde::pgeom::{validate_duality, Duality, Geometry};
use atilde::tripres::{
    load_presentation, presentation_to_string, scan_dualities, search_presentations,
    validate_presentation, TrianglePresentation,
};
use atilde::wordcore::ball::{build_ball, CayleyBall};
use atilde::wordcore::ballfile::{encode_ball, load_ball};
use atilde::wordcore::{display_word, parse_word_literal, NormalWord, Rewriter};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "atilde", version, about = "Triangle-presentation buildings and their boundaries, in exact arithmetic")]
struct Cli {
    /// Worker threads for parallel sections (results do not depend on this).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Write the artifact here instead of stdout; also writes
    /// <out>.manifest.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Triangle presentations: validate or search.
    Tripres {
        #[command(subcommand)]
        cmd: TripresCmd,
    },
    /// Cayley balls.
    Ball {
        #[command(subcommand)]
        cmd: BallCmd,
    },
    /// Sphere tables.
    Sphere {
        #[command(subcommand)]
        cmd: SphereCmd,
    },
    /// Measure of one cylinder set.
    Measure(MeasureArgs),
    /// Displacement vector and Radon–Nikodym derivative on a deep cylinder.
    Rn(RnArgs),
    /// Piecewise full-group automorphism between two cylinders.
    Phi(PhiArgs),
    /// Witness catalog for every ordered pair in a sphere.
    Witnesses(WitnessArgs),
    /// Ratio-set descriptor and λ.
    RatioSet(RatioSetArgs),
    /// Classification certificate.
    Classify(ClassifyArgs),
    /// Sector-triangle census against the closed form.
    Triangles(TrianglesArgs),
    /// Wall-triangle counts and the vanishing measure bound.
    FreenessBound(FreenessArgs),
}

#[derive(Subcommand)]
enum TripresCmd {
    /// Check all five axioms of a presentation file.
    Validate {
        #[arg(long)]
        presentation: PathBuf,
    },
    /// Search for presentations over PG(n, q).
    Search {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        q: u32,
        /// `scan` (seeded duality scan), `standard` (annihilator), or a
        /// JSON file containing a lambda permutation array.
        #[arg(long, default_value = "scan")]
        duality: String,
        #[arg(long, default_value_t = 1)]
        limit: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Backtracking node budget per duality.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        /// Dualities to try in scan mode.
        #[arg(long, default_value_t = 200_000)]
        max_dualities: u64,
    },
}

#[derive(Subcommand)]
enum BallCmd {
    /// Breadth-first ball of the Cayley graph, written as a binary file.
    Build {
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value_t = 10_000_000)]
        max_vertices: usize,
    },
}

#[derive(Subcommand)]
enum SphereCmd {
    /// Enumerated sphere sizes against the closed formula, all |k| ≤ max-norm.
    Census(CensusArgs),
}

#[derive(Args)]
struct CensusArgs {
    #[arg(long)]
    presentation: PathBuf,
    #[arg(long)]
    ball: Option<PathBuf>,
    /// Build a fresh ball of this radius when no ball file is given
    /// (defaults to max-norm).
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long, default_value_t = 4)]
    max_norm: u32,
    #[arg(long, default_value_t = 10_000_000)]
    max_vertices: usize,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long)]
    presentation: PathBuf,
    /// Base vertex word, e.g. `g3,g11` or `e`.
    #[arg(long, default_value = "e")]
    base: String,
    /// Target vertex word.
    #[arg(long)]
    target: String,
}

#[derive(Args)]
struct RnArgs {
    #[arg(long)]
    presentation: PathBuf,
    #[arg(long, default_value = "e")]
    x: String,
    #[arg(long)]
    y: String,
    /// Deep reference vertex pinning the cylinder Ω_x^z.
    #[arg(long)]
    z: String,
}

#[derive(Args)]
struct PhiArgs {
    #[arg(long)]
    presentation: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long, default_value_t = 2)]
    levels: u32,
    #[arg(long, default_value_t = 4)]
    radius: u32,
    /// Exhaustive pairwise disjointness instead of the structural check.
    #[arg(long)]
    full_verify: bool,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    presentation: PathBuf,
    /// Sphere index, e.g. `1,0`.
    #[arg(long)]
    shape: String,
    #[arg(long, default_value_t = 2)]
    levels: u32,
    #[arg(long, default_value_t = 4)]
    radius: u32,
}

#[derive(Args)]
struct RatioSetArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    q: u32,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    presentation: PathBuf,
    #[arg(long)]
    ball: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    radius: u32,
    #[arg(long, default_value_t = 2)]
    census_depth: u32,
    #[arg(long, default_value_t = 1)]
    levels: u32,
    #[arg(long, default_value_t = 10_000_000)]
    max_vertices: usize,
}

#[derive(Args)]
struct TrianglesArgs {
    #[arg(long)]
    presentation: PathBuf,
    /// Largest triangle side to census.
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, default_value_t = 10_000_000)]
    max_vertices: usize,
}

#[derive(Args)]
struct FreenessArgs {
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 8)]
    max_m: u32,
}

/// Exit 1 marker: the run completed but a check failed.
#[derive(Debug)]
struct CheckFailure(String);

impl std::fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailure {}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let started = Instant::now();
    let mut manifest = Manifest::new(&cli);
    match dispatch(&cli, &mut manifest) {
        Ok(artifact) => {
            if let Err(e) = emit(&cli, artifact, manifest, started) {
                eprintln!("error: {e:#}");
                return 1;
            }
            0
        }
        Err(e) => {
            if let Some(check) = e.downcast_ref::<CheckFailure>() {
                // still emit the artifact the check produced, if any
                eprintln!("{check}");
                return 1;
            }
            if is_usage(&e) {
                eprintln!("usage error: {e:#}");
                return 2;
            }
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn is_usage(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<atilde::Error>(),
        Some(atilde::Error::Usage(_)) | Some(atilde::Error::Config(_))
    )
}

struct Manifest {
    command: Vec<String>,
    seed: Option<u64>,
    threads: usize,
    inputs: BTreeMap<String, String>,
}

impl Manifest {
    fn new(cli: &Cli) -> Manifest {
        Manifest {
            command: std::env::args().collect(),
            seed: match &cli.command {
                Command::Tripres {
                    cmd: TripresCmd::Search { seed, .. },
                } => Some(*seed),
                _ => None,
            },
            threads: cli.threads,
            inputs: BTreeMap::new(),
        }
    }

    fn record_input(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes =
            std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// The artifact a command produced: JSON, or raw bytes for ball files.
enum Artifact {
    Json(Value),
    Bytes(Vec<u8>),
}

fn emit(cli: &Cli, artifact: Artifact, manifest: Manifest, started: Instant) -> anyhow::Result<()> {
    let bytes = match &artifact {
        Artifact::Json(v) => {
            let mut s = serde_json::to_string_pretty(v)?;
            s.push('\n');
            s.into_bytes()
        }
        Artifact::Bytes(b) => b.clone(),
    };
    match &cli.out {
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
        Some(path) => {
            std::fs::write(path, &bytes)
                .with_context(|| format!("writing {}", path.display()))?;
            let manifest_json = json!({
                "command": manifest.command,
                "inputs": manifest.inputs,
                "outputs": { path.display().to_string(): sha256_hex(&bytes) },
                "versions": {
                    "atilde": env!("CARGO_PKG_VERSION"),
                    "presentation_format": atilde::tripres::FILE_FORMAT,
                    "ball_format": 1,
                },
                "seed": manifest.seed,
                "threads": manifest.threads,
                "timing_ms": started.elapsed().as_millis() as u64,
            });
            let mpath = manifest_path(path);
            let mut s = serde_json::to_string_pretty(&manifest_json)?;
            s.push('\n');
            std::fs::write(&mpath, s)
                .with_context(|| format!("writing {}", mpath.display()))?;
            eprintln!("wrote {} and {}", path.display(), mpath.display());
        }
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn load_pres(
    path: &Path,
    manifest: &mut Manifest,
) -> anyhow::Result<(TrianglePresentation, Rewriter)> {
    manifest.record_input(path)?;
    let pres = load_presentation(path)?;
    let rw = Rewriter::new(&pres)?;
    Ok((pres, rw))
}

fn obtain_ball(
    pres: &TrianglePresentation,
    rw: &Rewriter,
    ball_path: Option<&PathBuf>,
    radius: u32,
    max_vertices: usize,
    manifest: &mut Manifest,
) -> anyhow::Result<CayleyBall> {
    match ball_path {
        Some(p) => {
            manifest.record_input(p)?;
            Ok(load_ball(p, pres, rw)?)
        }
        None => Ok(build_ball(pres, rw, radius, max_vertices)?),
    }
}

fn word(rw: &Rewriter, s: &str) -> anyhow::Result<NormalWord> {
    let letters = parse_word_literal(s)?;
    Ok(rw.reduce(&letters)?)
}

fn shape_arg(s: &str) -> anyhow::Result<Vec<u32>> {
    s.split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| anyhow!("bad shape component {p:?}: {e}")))
        .collect()
}

fn dispatch(cli: &Cli, manifest: &mut Manifest) -> anyhow::Result<Artifact> {
    match &cli.command {
        Command::Tripres { cmd } => tripres_cmd(cmd, manifest),
        Command::Ball { cmd } => ball_cmd(cmd, manifest),
        Command::Sphere {
            cmd: SphereCmd::Census(args),
        } => sphere_census(args, manifest),
        Command::Measure(args) => measure_cmd(args, manifest),
        Command::Rn(args) => rn_cmd(args, manifest),
        Command::Phi(args) => phi_cmd(args, manifest),
        Command::Witnesses(args) => witnesses_cmd(args, manifest),
        Command::RatioSet(args) => {
            let d = ratio_descriptor(args.n, args.q)?;
            Ok(Artifact::Json(d.to_json()))
        }
        Command::Classify(args) => classify_cmd(args, manifest),
        Command::Triangles(args) => triangles_cmd(args, manifest),
        Command::FreenessBound(args) => freeness_cmd(args),
    }
}

fn tripres_cmd(cmd: &TripresCmd, manifest: &mut Manifest) -> anyhow::Result<Artifact> {
    match cmd {
        TripresCmd::Validate { presentation } => {
            manifest.record_input(presentation)?;
            // read without the validity gate so broken files still report
            let bytes = std::fs::read(presentation)?;
            let pres = atilde::tripres::read_presentation_slice(
                &bytes,
                &presentation.display().to_string(),
            )?;
            let duality_report = validate_duality(pres.lambda(), pres.geometry());
            let report = validate_presentation(&pres);
            let ok = duality_report.valid && report.all_pass;
            let artifact = json!({
                "presentation": presentation.display().to_string(),
                "duality_valid": duality_report.valid,
                "duality_reverses_incidence": duality_report.reverses_incidence,
                "axioms": report.axioms.iter().enumerate().map(|(i, a)| json!({
                    "axiom": i + 1,
                    "pass": a.pass,
                    "failures": a.failures.iter().take(10).collect::<Vec<_>>(),
                    "failure_count": a.failures.len(),
                })).collect::<Vec<_>>(),
                "triple_count": report.triple_count,
                "all_pass": ok,
            });
            if !ok {
                print_and_fail(artifact, "presentation violates its axioms")?;
            }
            Ok(Artifact::Json(artifact))
        }
        TripresCmd::Search {
            n,
            q,
            duality,
            limit,
            seed,
            budget,
            max_dualities,
        } => {
            let geometry = Geometry::vector(*n, *q)?;
            let outcome = match duality.as_str() {
                "scan" => scan_dualities(&geometry, *limit, *seed, *budget, *max_dualities)?,
                "standard" => {
                    let lam = geometry.standard_duality()?;
                    search_presentations(&geometry, &lam, *limit, *seed, *budget)?
                }
                path => {
                    let p = PathBuf::from(path);
                    manifest.record_input(&p)?;
                    let bytes = std::fs::read(&p)?;
                    let map: Vec<u32> = serde_json::from_slice(&bytes)
                        .with_context(|| format!("lambda file {path}"))?;
                    search_presentations(&geometry, &Duality { map }, *limit, *seed, *budget)?
                }
            };
            let artifact = if outcome.found.is_empty() {
                json!({
                    "found": 0,
                    "stats": {
                        "nodes": outcome.stats.nodes,
                        "exhausted": outcome.stats.exhausted,
                        "budget_hit": outcome.stats.budget_hit,
                        "dualities_tried": outcome.stats.dualities_tried,
                    },
                })
            } else {
                // artifact is the first presentation itself, ready to load
                let first = &outcome.found[0];
                let doc: Value = serde_json::from_str(&presentation_to_string(first))?;
                doc
            };
            if outcome.found.is_empty() {
                print_and_fail(artifact, "no presentation found")?;
                unreachable!()
            } else {
                Ok(Artifact::Json(artifact))
            }
        }
    }
}

/// Print an artifact to stderr as context, then raise a check failure.
fn print_and_fail(artifact: Value, message: &str) -> anyhow::Result<()> {
    eprintln!("{}", serde_json::to_string_pretty(&artifact)?);
    Err(anyhow::Error::new(CheckFailure(message.to_string())))
}

fn ball_cmd(cmd: &BallCmd, manifest: &mut Manifest) -> anyhow::Result<Artifact> {
    match cmd {
        BallCmd::Build {
            presentation,
            radius,
            max_vertices,
        } => {
            let (pres, rw) = load_pres(presentation, manifest)?;
            let ball = build_ball(&pres, &rw, *radius, *max_vertices)?;
            eprintln!(
                "ball: radius {}, {} vertices",
                ball.radius(),
                ball.vertex_count()
            );
            Ok(Artifact::Bytes(encode_ball(&ball)))
        }
    }
}

fn sphere_census(args: &CensusArgs, manifest: &mut Manifest) -> anyhow::Result<Artifact> {
    let (pres, rw) = load_pres(&args.presentation, manifest)?;
    let radius = args.radius.unwrap_or(args.max_norm);
    if radius < args.max_norm {
        return Err(anyhow::Error::new(atilde::Error::Usage(format!(
            "radius {radius} is smaller than max-norm {}",
            args.max_norm
        ))));
    }
    let ball = obtain_ball(&pres, &rw, args.ball.as_ref(), radius, args.max_vertices, manifest)?;
    if ball.radius() < args.max_norm {
        return Err(anyhow::Error::new(atilde::Error::Range(format!(
            "ball radius {} is smaller than max-norm {}",
            ball.radius(),
            args.max_norm
        ))));
    }

    let n = rw.n();
    let mut shapes = Vec::new();
    enumerate_shapes(n as usize, args.max_norm, &mut vec![0; n as usize], 0, &mut shapes);
    use rayon::prelude::*;
    let rows: Vec<Value> = shapes
        .par_iter()
        .map(|k| -> anyhow::Result<Value> {
            let formula = sphere_size(k, n, rw.q())?;
            let enumerated = ball.sphere(k)?.len();
            let matches = formula == num_bigint::BigInt::from(enumerated);
            Ok(json!({
                "k": k,
                "formula": formula.to_string(),
                "enumerated": enumerated,
                "match": matches,
            }))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let all = rows.iter().all(|r| r["match"].as_bool() == Some(true));
    let artifact = json!({
        "n": n,
        "q": rw.q(),
        "max_norm": args.max_norm,
        "rows": rows,
        "all_match": all,
    });
    if !all {
        print_and_fail(artifact, "sphere census mismatch")?;
    }
    Ok(Artifact::Json(artifact))
}

fn enumerate_shapes(n: usize, max_norm: u32, cur: &mut Vec<u32>, i: usize, out: &mut Vec<Vec<u32>>) {
    if i == n {
        if cur.iter().sum::<u32>() <= max_norm {
            out.push(cur.clone());
        }
        return;
    }
    for v in 0..=max_norm {
        cur[i] = v;
        enumerate_shapes(n, max_norm, cur, i + 1, out);
    }
    cur[i] = 0;
}

fn measure_cmd(args: &MeasureArgs, manifest: &mut Manifest) -> anyhow::Result<Artifact> {
    let (_, rw) = load_pres(&args.presentation, manifest)?;
    let base = word(&rw, &args.base)?;
    let target = word(&rw, &args.target)?;
    let c = CylinderSet::new(base, target, &rw)?;
    let measure = cylinder_measure(&c, rw.n(), rw.q())?;
    Ok(Artifact::Json(json!({
        "base": c.base.to_string(),
        "target": c.target.to_string(),
        "shape": c.shape,
        "measure": rational_string(&measure),
    })))
}

fn rn_cmd(args: &RnArgs, manifest: &mut Manifest) -> anyhow::Result<Artifact> {
    let (_, rw) = load_pres(&args.presentation, manifest)?;
    let x = word(&rw, &args.x)?;
    let y = word(&rw, &args.y)?;
    let z = word(&rw, &args.z)?;
    let m = m_vector(&x, &y, &z, &rw)?;
    let v = rn_derivative(&x, &y, &z, &rw)?;
    Ok(Artifact::Json(json!({
        "x": x.to_string(),
        "y": y.to_string(),
        "z": z.to_string(),
        "m": m.0,
        "derivative": rational_string(&v),
    })))
}

fn phi_cmd(args: &PhiArgs, manifest: &mut Manifest) -> anyhow::Result<Artifact> {
    let (pres, rw) = load_pres(&args.presentation, manifest)?;
    let ball = build_ball(&pres, &rw, args.radius, 10_000_000)?;
    let x = word(&rw, &args.x)?;
    let y = word(&rw, &args.y)?;
    let map = phi_construct(&x, &y, &rw, &ball, args.levels)?;
    let ver = map.verify(&rw, args.full_verify)?;
    let mut artifact = map.to_json(&rw);
    artifact["verification"] = json!({
        "pieces": ver.pieces,
        "movers_ok": ver.movers_ok,
        "sources_disjoint": ver.sources_disjoint,
        "targets_disjoint": ver.targets_disjoint,
        "sources_inside_root": ver.sources_inside_root,
        "targets_inside_root": ver.targets_inside_root,
        "measure_preserving": ver.measure_preserving,
        "coverage_consistent": ver.coverage_consistent,
        "mode": if args.full_verify { "full-pairwise" } else { "structural" },
    });
    if !ver.all_pass() {
        print_and_fail(artifact.clone(), "piecewise map failed verification")?;
    }
    Ok(Artifact::Json(artifact))
}

fn witnesses_cmd(args: &WitnessArgs, manifest: &mut Manifest) -> anyhow::Result<Artifact> {
    let (pres, rw) = load_pres(&args.presentation, manifest)?;
    let ball = build_ball(&pres, &rw, args.radius, 10_000_000)?;
    let k = shape_arg(&args.shape)?;
    let report = transitivity_witnesses(&k, &rw, &ball, args.levels)?;
    let artifact = report.to_json();
    if !report.all_valid {
        print_and_fail(artifact.clone(), "witness catalog failed verification")?;
    }
    Ok(Artifact::Json(artifact))
}

fn classify_cmd(args: &ClassifyArgs, manifest: &mut Manifest) -> anyhow::Result<Artifact> {
    let (pres, rw) = load_pres(&args.presentation, manifest)?;
    let ball = obtain_ball(
        &pres,
        &rw,
        args.ball.as_ref(),
        args.radius,
        args.max_vertices,
        manifest,
    )?;
    let cert = classify(
        &pres.content_hash(),
        &rw,
        &ball,
        args.census_depth,
        args.levels,
    )?;
    let artifact = cert.to_json();
    if !cert.passed() {
        print_and_fail(artifact.clone(), "classification certificate FAILED")?;
    }
    Ok(Artifact::Json(artifact))
}

fn triangles_cmd(args: &TrianglesArgs, manifest: &mut Manifest) -> anyhow::Result<Artifact> {
    let (pres, rw) = load_pres(&args.presentation, manifest)?;
    let ball = build_ball(&pres, &rw, args.m, args.max_vertices)?;
    let mut rows = Vec::new();
    let mut all = true;
    for m in 1..=args.m {
        let enumerated = triangle_census(&rw, &ball, m)?;
        let formula = triangle_count(m, rw.q())?;
        let matches = enumerated == formula;
        all &= matches;
        rows.push(json!({
            "m": m,
            "enumerated": enumerated.to_string(),
            "formula": formula.to_string(),
            "match": matches,
        }));
    }
    let artifact = json!({
        "q": rw.q(),
        "rows": rows,
        "all_match": all,
    });
    if !all {
        print_and_fail(artifact.clone(), "triangle census mismatch")?;
    }
    Ok(Artifact::Json(artifact))
}

fn freeness_cmd(args: &FreenessArgs) -> anyhow::Result<Artifact> {
    if args.q < 2 {
        return Err(anyhow::Error::new(atilde::Error::Usage(
            "q must be at least 2".into(),
        )));
    }
    let mut rows = Vec::new();
    let mut all = true;
    for m in 1..=args.max_m.max(1) {
        let count = wall_triangle_count(m, args.q)?;
        let total = triangle_count(m, args.q)?;
        let bound = freeness_bound(m, args.q)?;
        let step_ok = if m > 1 {
            let prev = freeness_bound(m - 1, args.q)?;
            let ratio = &bound / &prev;
            let ok = ratio == q_power(args.q, -2);
            all &= ok;
            Some(ok)
        } else {
            None
        };
        rows.push(json!({
            "m": m,
            "wall_triangles": count.to_string(),
            "triangles": total.to_string(),
            "bound": rational_string(&bound),
            "step_ratio_is_q^-2": step_ok,
        }));
    }
    let artifact = json!({
        "q": args.q,
        "rows": rows,
        "decay_exact": all,
        "note": "the bound decreases by exactly q^-2 per step, hence tends to zero",
    });
    if !all {
        print_and_fail(artifact.clone(), "freeness bound decay mismatch")?;
    }
    Ok(Artifact::Json(artifact))
}
