//! `robin-spectra`: model spectra, brackets, meshes, eigenvalue solves and
//! alpha sweeps for the Robin Laplacian outside a convex polygon.
//!
//! Exit codes: 0 success, 1 computation failure, 2 usage or configuration error.

mod manifest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tracing_subscriber::EnvFilter;

use manifest::RunManifest;
use robin_spectra::harness::{
    check_brackets, comparison_bound, run_sweep, solve_level, BcMode, ComparisonInput, SpecOverrides, SweepConfig,
    TolPolicy,
};
use robin_spectra::eigen::lowest_eigenpairs_with;
use robin_spectra::mesh::mesh_svg;
use robin_spectra::variational::{
    default_cutoffs, identification_map, projection_suite, strip_suite, trace_suite, QuasiMode, SuiteOutcome,
};
use robin_spectra::{
    assemble, bracket, build_mesh, decompose, default_spec, merged_spectrum, ArtificialBc,
    ConvexPolygon, EigenOptions, Error, SpectrumKind, TriangleMesh,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(e) => match e {
                Error::TooFewVertices(_)
                | Error::NotConvex { .. }
                | Error::CollinearVertex { .. }
                | Error::NonPositiveAlpha(_)
                | Error::DegenerateSpec(_)
                | Error::BracketInvalid { .. }
                | Error::InvalidInput(_)
                | Error::Parse(_) => 2,
                _ => 1,
            },
            CliError::Io { .. } | CliError::Failed(_) => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "robin-spectra", version, about = "Robin eigenvalues outside a convex polygon")]
struct Cli {
    /// More log output on stderr (repeat for more); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum KindArg {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum BcArg {
    Dirichlet,
    Neumann,
    Both,
}

impl BcArg {
    fn conditions(self) -> Vec<ArtificialBc> {
        match self {
            BcArg::Dirichlet => vec![ArtificialBc::Dirichlet],
            BcArg::Neumann => vec![ArtificialBc::Neumann],
            BcArg::Both => vec![ArtificialBc::Dirichlet, ArtificialBc::Neumann],
        }
    }

    fn mode(self) -> BcMode {
        match self {
            BcArg::Dirichlet => BcMode::DirichletOnly,
            BcArg::Neumann => BcMode::NeumannOnly,
            BcArg::Both => BcMode::Both,
        }
    }
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct MeshArgs {
    /// Distance from the polygon to the artificial boundary.
    #[arg(long)]
    offset: Option<f64>,
    /// Cell size along the polygon.
    #[arg(long)]
    boundary_cell: Option<f64>,
    /// Cell size away from the polygon.
    #[arg(long)]
    interior_cell: Option<f64>,
}

impl MeshArgs {
    fn overrides(&self) -> SpecOverrides {
        SpecOverrides {
            offset: self.offset,
            boundary_cell: self.boundary_cell,
            interior_cell: self.interior_cell,
            ..SpecOverrides::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Merged interval spectrum of the polygon sides, as CSV on stdout.
    Spectra {
        #[arg(long)]
        polygon: PathBuf,
        #[arg(long, value_enum, default_value = "dirichlet")]
        kind: KindArg,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dirichlet/Neumann bracket of the m-th eigenvalue.
    Bracket {
        #[arg(long)]
        polygon: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mesh the truncated exterior and write it as text and SVG.
    Mesh {
        #[arg(long)]
        polygon: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        refine: u32,
        #[arg(long, value_enum, default_value = "dirichlet")]
        bc: BcArg,
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, default_value = "robin-out")]
        out: PathBuf,
    },
    /// One mesh/assemble/solve run; prints the truncation enclosure per m.
    Solve {
        #[arg(long)]
        polygon: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        refine: u32,
        #[arg(long, value_enum, default_value = "both")]
        bc: BcArg,
        /// Use this mesh file instead of generating one.
        #[arg(long)]
        mesh_file: Option<PathBuf>,
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value = "robin-out")]
        out: PathBuf,
    },
    /// Alpha sweep with bracket checks and the remainder rate fit.
    Sweep {
        /// JSON sweep configuration; flags given alongside override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        polygon: Option<PathBuf>,
        #[arg(long)]
        alpha: Vec<f64>,
        #[arg(long)]
        m: Option<usize>,
        /// Finest refinement level; levels 0..=refine are solved.
        #[arg(long)]
        refine: Option<u32>,
        #[arg(long, value_enum)]
        bc: Option<BcArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "robin-out")]
        out: PathBuf,
    },
    /// Randomized checks of the variational inequalities.
    CheckLemmas {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random cases per check.
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_input(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_polygon(path: &Path, manifest: &mut RunManifest) -> CliResult<ConvexPolygon> {
    let bytes = read_input(path)?;
    manifest.input(path, &bytes);
    let text = String::from_utf8(bytes).map_err(|_| CliError::Usage(format!("{} is not UTF-8", path.display())))?;
    Ok(ConvexPolygon::from_json_str(&text)?)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

fn config_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("config serializes")
}

fn cmd_spectra(polygon: &Path, kind: KindArg, count: usize, out: Option<&Path>) -> CliResult<()> {
    let mut manifest = RunManifest::new(
        "spectra",
        serde_json::json!({ "polygon": polygon, "kind": kind, "count": count }),
        None,
    );
    let poly = load_polygon(polygon, &mut manifest)?;
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    if let Some(dir) = out {
        manifest.clone().outputs(&["spectra.csv"]).write(dir)?;
    }
    let kind = match kind {
        KindArg::Dirichlet => SpectrumKind::Dirichlet,
        KindArg::Neumann => SpectrumKind::Neumann,
    };
    let spec = merged_spectrum(&poly, kind, count);
    let mut csv = String::from("m,side,mode,value\n");
    for (i, e) in spec.entries.iter().enumerate() {
        let _ = writeln!(csv, "{},{},{},{:?}", i + 1, e.id.side + 1, e.id.mode, e.value);
    }
    print!("{csv}");
    if let Some(dir) = out {
        write_out(dir, "spectra.csv", &csv)?;
    }
    Ok(())
}

fn cmd_bracket(polygon: &Path, alpha: f64, m: usize, out: Option<&Path>) -> CliResult<()> {
    let mut manifest = RunManifest::new(
        "bracket",
        serde_json::json!({ "polygon": polygon, "alpha": alpha, "m": m }),
        None,
    );
    let poly = load_polygon(polygon, &mut manifest)?;
    if let Some(dir) = out {
        manifest.clone().outputs(&["bracket.json"]).write(dir)?;
    }
    let b = bracket(&poly, alpha, m)?;
    println!("m: {}", b.m);
    println!("alpha: {:?}", b.alpha);
    println!("mu_neumann: {:?}", b.mu_neumann);
    println!("mu_dirichlet: {:?}", b.mu_dirichlet);
    println!("lower: {:?}", b.lower);
    println!("upper: {:?}", b.upper);
    println!("validity: {}", b.valid);
    if !b.valid {
        println!("note: the upper bound needs mu_dirichlet < alpha^2; raise alpha");
    }
    if let Some(dir) = out {
        write_out(dir, "bracket.json", &(serde_json::to_string_pretty(&b).expect("bracket serializes") + "\n"))?;
    }
    Ok(())
}

fn require_valid_bracket(poly: &ConvexPolygon, alpha: f64, m: usize) -> CliResult<()> {
    let b = bracket(poly, alpha, m)?;
    if !b.valid {
        return Err(CliError::Usage(format!(
            "bracket invalid: mu^D_{m} = {:?} is not below alpha^2 = {:?}; raise alpha above {:?}",
            b.mu_dirichlet,
            alpha * alpha,
            b.mu_dirichlet.sqrt()
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_mesh(polygon: &Path, alpha: f64, m: usize, refine: u32, bc: BcArg, mesh: &MeshArgs, out: &Path) -> CliResult<()> {
    let mut manifest = RunManifest::new(
        "mesh",
        serde_json::json!({ "polygon": polygon, "alpha": alpha, "m": m, "refine": refine, "bc": bc, "mesh": config_json(mesh) }),
        None,
    );
    let poly = load_polygon(polygon, &mut manifest)?;
    let bc = match bc {
        BcArg::Neumann => ArtificialBc::Neumann,
        BcArg::Dirichlet => ArtificialBc::Dirichlet,
        BcArg::Both => return Err(CliError::Usage("mesh takes a single --bc".into())),
    };
    let mut spec = mesh.overrides().apply(default_spec(&poly, alpha, m)?);
    spec.artificial_bc = bc;
    spec.validate(&poly)?;
    manifest.config["spec"] = config_json(&spec);
    manifest.clone().outputs(&["mesh.txt", "mesh.svg"]).write(out)?;
    let mut tm = build_mesh(&poly, &spec)?;
    for _ in 0..refine {
        tm = tm.refine();
    }
    write_out(out, "mesh.txt", &tm.to_text())?;
    write_out(out, "mesh.svg", &mesh_svg(&tm, 800.0))?;
    println!("nodes: {}", tm.node_count());
    println!("triangles: {}", tm.triangle_count());
    println!("min_angle_deg: {:?}", tm.min_angle_deg());
    println!("max_diameter: {:?}", tm.max_diameter());
    Ok(())
}

#[derive(Serialize)]
struct SolveRow {
    m: usize,
    e_dir: Option<f64>,
    e_neu: Option<f64>,
    lower: f64,
    upper: f64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    polygon: &Path,
    alpha: f64,
    m: usize,
    refine: u32,
    bc: BcArg,
    mesh_file: Option<&Path>,
    mesh: &MeshArgs,
    seed: u64,
    tol: f64,
    out: &Path,
) -> CliResult<()> {
    let mut manifest = RunManifest::new(
        "solve",
        serde_json::json!({
            "polygon": polygon, "alpha": alpha, "m": m, "refine": refine, "bc": bc,
            "mesh_file": mesh_file, "mesh": config_json(mesh), "tol": tol,
        }),
        Some(seed),
    );
    let poly = load_polygon(polygon, &mut manifest)?;
    if m == 0 {
        return Err(CliError::Usage("--m is 1-based".into()));
    }
    require_valid_bracket(&poly, alpha, m)?;
    let opts = EigenOptions {
        seed,
        tol,
        ..EigenOptions::default()
    };
    let loaded = match mesh_file {
        Some(path) => {
            let bytes = read_input(path)?;
            manifest.input(path, &bytes);
            Some(String::from_utf8_lossy(&bytes).into_owned())
        }
        None => None,
    };
    let spec = mesh.overrides().apply(default_spec(&poly, alpha, m)?);
    if loaded.is_none() {
        spec.validate(&poly)?;
        manifest.config["spec"] = config_json(&spec);
    }
    manifest.clone().outputs(&["solve.csv"]).write(out)?;

    let mut values: Vec<(ArtificialBc, Vec<f64>)> = Vec::new();
    match loaded {
        Some(text) => {
            let mut tm = TriangleMesh::from_text(&text, Some(&poly))?;
            for _ in 0..refine {
                tm = tm.refine();
            }
            for c in bc.conditions() {
                let form = assemble(&tm, alpha, c)?;
                let r = lowest_eigenpairs_with(
                    &form,
                    m,
                    &EigenOptions {
                        block_size: poly.vertex_count(),
                        ..opts.clone()
                    },
                )?;
                values.push((c, r.eigenvalues));
            }
        }
        None => {
            for c in bc.conditions() {
                let rec = solve_level(&poly, alpha, m, &spec, c, refine, &opts)?;
                values.push((c, rec.eigenvalues));
            }
        }
    }
    let get = |c: ArtificialBc, k: usize| values.iter().find(|v| v.0 == c).map(|v| v.1[k]);
    let mut csv = String::from("m,E_dir,E_neu,lower,upper\n");
    for k in 0..m {
        let b = bracket(&poly, alpha, k + 1)?;
        let row = SolveRow {
            m: k + 1,
            e_dir: get(ArtificialBc::Dirichlet, k),
            e_neu: get(ArtificialBc::Neumann, k),
            lower: b.lower,
            upper: b.upper,
        };
        let f = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{:?},{:?}",
            row.m,
            f(row.e_dir),
            f(row.e_neu),
            row.lower,
            row.upper
        );
    }
    print!("{csv}");
    write_out(out, "solve.csv", &csv)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    config: Option<&Path>,
    polygon: Option<&Path>,
    alpha: &[f64],
    m: Option<usize>,
    refine: Option<u32>,
    bc: Option<BcArg>,
    seed: Option<u64>,
    out: &Path,
) -> CliResult<()> {
    let mut manifest = RunManifest::new("sweep", serde_json::Value::Null, None);
    let mut cfg = match config {
        Some(path) => {
            let bytes = read_input(path)?;
            manifest.input(path, &bytes);
            serde_json::from_slice::<SweepConfig>(&bytes)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => {
            let Some(p) = polygon else {
                return Err(CliError::Usage("sweep needs --config or --polygon".into()));
            };
            let alphas = if alpha.is_empty() {
                vec![4.0, 6.0, 8.0, 10.0, 12.0]
            } else {
                alpha.to_vec()
            };
            let poly = load_polygon(p, &mut manifest)?;
            SweepConfig::new(poly, alphas, 3)
        }
    };
    if config.is_some() {
        if let Some(p) = polygon {
            cfg.polygon = load_polygon(p, &mut manifest)?;
        }
        if !alpha.is_empty() {
            cfg.alphas = alpha.to_vec();
        }
    }
    if let Some(m) = m {
        cfg.m_max = m;
    }
    if let Some(r) = refine {
        cfg.levels = r + 1;
    }
    if let Some(bc) = bc {
        cfg.bc_mode = bc.mode();
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    manifest.config = config_json(&cfg);
    manifest.seed = Some(cfg.seed);
    manifest
        .clone()
        .outputs(&["sweep.csv", "sweep.json", "remainder.svg"])
        .write(out)?;
    let report = run_sweep(&cfg)?;
    write_out(out, "sweep.csv", &report.to_csv())?;
    write_out(out, "sweep.json", &(report.to_json() + "\n"))?;
    write_out(out, "remainder.svg", &report.remainder_svg())?;
    print!("{}", report.to_csv());
    let checks = check_brackets(&report, TolPolicy::default());
    for c in checks.iter().filter(|c| !c.passed()) {
        println!(
            "bracket violation: alpha {:?} m {} lower_margin {:?} upper_margin {:?}",
            c.alpha, c.m, c.lower_margin, c.upper_margin
        );
    }
    match (&report.fit, &report.fit_error) {
        (Some(f), _) => println!("slope: {:?}", f.slope),
        (None, Some(e)) => println!("slope: unavailable ({e})"),
        (None, None) => {}
    }
    Ok(())
}

fn cmd_check_lemmas(seed: u64, count: usize, out: Option<&Path>) -> CliResult<()> {
    use std::f64::consts::PI;
    let manifest = RunManifest::new("check-lemmas", serde_json::json!({ "count": count }), Some(seed));
    if let Some(dir) = out {
        manifest.outputs(&["lemmas.json"]).write(dir)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes: Vec<SuiteOutcome> = vec![
        projection_suite(&mut rng, count, &[1.0, 2.0, 5.0, 10.0], 1e-8)?,
        trace_suite(&mut rng, count, &[PI / 3.0, PI / 2.0, 2.0 * PI / 3.0], &[0.1, 1.0, 10.0])?,
        strip_suite(&mut rng, count, 1e-8)?,
    ];

    let mut comparison = SuiteOutcome {
        name: "comparison_bound".into(),
        cases: 1,
        failures: 0,
        worst_margin: 0.0,
    };
    let v = comparison_bound(ComparisonInput {
        lambda: 1.0,
        delta1: 0.1,
        delta2: 0.1,
    })?;
    if v != 1.5 {
        comparison.failures = 1;
        comparison.worst_margin = -(v - 1.5).abs();
    }
    outcomes.push(comparison);

    let decomp = decompose(&ConvexPolygon::equilateral(1.0));
    let q = QuasiMode::random(3, 3, &mut rng);
    let cut = default_cutoffs(&decomp.polygon);
    let mut ident = SuiteOutcome {
        name: "identification_trend".into(),
        cases: 0,
        failures: 0,
        worst_margin: f64::INFINITY,
    };
    let mut prev: Option<(f64, f64)> = None;
    for alpha in [4.0, 8.0, 16.0] {
        let u = q.field(&decomp, alpha, 64, 200, 16)?;
        let r = identification_map(&decomp, &u, alpha, &cut)?;
        if let Some((d1, d2)) = prev {
            ident.cases += 1;
            let margin = (d1 - r.delta1).min(d2 - r.delta2);
            ident.worst_margin = ident.worst_margin.min(margin);
            if margin <= 0.0 {
                ident.failures += 1;
            }
        }
        prev = Some((r.delta1, r.delta2));
    }
    outcomes.push(ident);

    for o in &outcomes {
        println!(
            "{} cases={} failures={} worst_margin={:?} {}",
            o.name,
            o.cases,
            o.failures,
            o.worst_margin,
            if o.passed() { "PASS" } else { "FAIL" }
        );
    }
    if let Some(dir) = out {
        write_out(dir, "lemmas.json", &(serde_json::to_string_pretty(&outcomes).expect("serializes") + "\n"))?;
    }
    if outcomes.iter().all(SuiteOutcome::passed) {
        Ok(())
    } else {
        Err(CliError::Failed("a variational check failed".into()))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Spectra {
            polygon,
            kind,
            count,
            out,
        } => cmd_spectra(&polygon, kind, count, out.as_deref()),
        Command::Bracket { polygon, alpha, m, out } => cmd_bracket(&polygon, alpha, m, out.as_deref()),
        Command::Mesh {
            polygon,
            alpha,
            m,
            refine,
            bc,
            mesh,
            out,
        } => cmd_mesh(&polygon, alpha, m, refine, bc, &mesh, &out),
        Command::Solve {
            polygon,
            alpha,
            m,
            refine,
            bc,
            mesh_file,
            mesh,
            seed,
            tol,
            out,
        } => cmd_solve(&polygon, alpha, m, refine, bc, mesh_file.as_deref(), &mesh, seed, tol, &out),
        Command::Sweep {
            config,
            polygon,
            alpha,
            m,
            refine,
            bc,
            seed,
            out,
        } => cmd_sweep(config.as_deref(), polygon.as_deref(), &alpha, m, refine, bc, seed, &out),
        Command::CheckLemmas { seed, count, out } => cmd_check_lemmas(seed, count, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(level));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
