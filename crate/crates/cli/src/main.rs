//! `starset` command-line interface.

mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use starset::approx::{
    analytic_slb, approximate, find_l1_outer, scaling_lower_bound_estimate, ApproxOptions, ApproximationResult,
    UnknownPolicy, VolumeComparison,
};
use starset::conic::SolverOptions;
use starset::kernel::{
    chebyshev_center, inner_kernel, outer_kernel, support_directions, verify_polytope_farkas, vertices_2d,
    KernelOptions, Polytope,
};
use starset::metrics::{
    format_sig, percent_error, volume_grid, volume_star, VolumeEstimate, GRID_RESOLUTION, POLAR_RESOLUTION,
    POLAR_RESOLUTION_ND,
};
use starset::semialg::fixtures;
use starset::{RayOptions, SemialgebraicSet};

use svg::{marching_squares, Svg, CONTOUR_GRID};

const SOLVER_ENV: &str = "STARSET_SOLVER";
const DEFAULT_C: f64 = 0.9;
const DEFAULT_R: f64 = 0.4;

#[derive(Parser)]
#[command(name = "starset", version, about = "Polynomial sublevel-set approximations and kernel polytopes of semialgebraic sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inner approximation F and scaling s* with F ⊆ X ⊆ s*F.
    Approximate(ApproximateArgs),
    /// Outer or inner polytope approximation of the kernel.
    Kernel {
        #[command(subcommand)]
        which: KernelCommand,
    },
    /// Volume of a set by polar integration or grid counting.
    Volume(VolumeArgs),
    /// Scaling-objective table for the disk-with-hole family.
    Table2(Table2Args),
}

#[derive(Subcommand)]
enum KernelCommand {
    /// Cutting-plane outer approximation from sampled boundary points.
    Outer(KernelOuterArgs),
    /// Convex hull of certified support points.
    Inner(KernelInnerArgs),
}

#[derive(Args)]
struct SetArgs {
    /// Set JSON file, or a fixture name (disk, square, exampleA, exampleB, exampleE).
    #[arg(long)]
    set: String,
    /// Hole centre for the exampleE fixture.
    #[arg(long)]
    c: Option<f64>,
    /// Hole radius for the exampleE fixture.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a 2D plot here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    TreatAsInfeasible,
    Fail,
}

#[derive(Args)]
struct ApproximateArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, default_value_t = 4)]
    degree: u32,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 1e-3)]
    s_tol: f64,
    /// Uniform multiplier degree (default: per-constraint rule).
    #[arg(long)]
    mult_degree: Option<u32>,
    #[arg(long, value_enum, default_value_t = PolicyArg::TreatAsInfeasible)]
    unknown_policy: PolicyArg,
    /// Seed of the ray sampler behind the scaling lower-bound estimate.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rays for the scaling lower-bound estimate.
    #[arg(long, default_value_t = 2000)]
    lb_rays: usize,
    /// Grid resolution per axis for the volume comparison (2D only).
    #[arg(long, default_value_t = GRID_RESOLUTION)]
    resolution: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct KernelOuterArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct KernelInnerArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, default_value_t = 64)]
    directions: usize,
    #[arg(long, default_value_t = 2)]
    mult_degree: u32,
    /// Seed for random directions beyond 3D.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Polar,
    Grid,
}

#[derive(Args)]
struct VolumeArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Grid)]
    method: MethodArg,
    /// Star centre for the polar method, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Option<Vec<f64>>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Table2Args {
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4")]
    radii: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    degree: u32,
    /// Add rows for the l1 objective over the set's bounding box.
    #[arg(long)]
    l1: bool,
    #[arg(long, default_value_t = GRID_RESOLUTION)]
    resolution: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Input(String),
    Indeterminate(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Indeterminate(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Input(m) => ("input", m),
            CliError::Indeterminate(m) => ("solver_indeterminate", m),
            CliError::Internal(m) => ("internal", m),
        };
        serde_json::json!({ "error": { "kind": kind, "message": message }, "exit_code": self.exit_code() })
    }
}

impl From<starset::Error> for CliError {
    fn from(e: starset::Error) -> Self {
        use starset::Error as E;
        let msg = e.to_string();
        match e {
            E::DimensionMismatch { .. }
            | E::InvalidArgument(_)
            | E::Unbounded { .. }
            | E::OriginNotInterior { .. }
            | E::EmptyPolytope
            | E::Json(_) => CliError::Input(msg),
            E::SolverIndeterminate(_) => CliError::Indeterminate(msg),
            E::Solver(_) | E::CertificateRejected { .. } | E::Sampling(_) => CliError::Internal(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Where a set came from, echoed in every output.
#[derive(Clone, Serialize)]
struct SetInfo {
    source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixture: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    n: usize,
    m: usize,
}

const FIXTURE_NAMES: [&str; 6] = ["disk", "unitDisk", "square", "exampleA", "exampleB", "exampleE"];

/// Resolves `--set`: an explicit set file `{"n", "constraints"}`, a fixture reference
/// file `{"fixture", "c", "r"}`, or a bare fixture name.
fn load_set(args: &SetArgs) -> CliResult<(SemialgebraicSet, SetInfo)> {
    let path = Path::new(&args.set);
    let (fixture, file_c, file_r, explicit) = if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", args.set)))?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| input(format!("invalid JSON in {}: {e}", args.set)))?;
        if let Some(name) = value.get("fixture") {
            let name = name.as_str().ok_or_else(|| input("\"fixture\" must be a string"))?.to_string();
            let num = |k: &str| value.get(k).and_then(Value::as_f64);
            (Some(name), num("c"), num("r"), None)
        } else {
            let set: SemialgebraicSet =
                serde_json::from_value(value).map_err(|e| input(format!("invalid set in {}: {e}", args.set)))?;
            (None, None, None, Some(set))
        }
    } else if FIXTURE_NAMES.contains(&args.set.as_str()) {
        (Some(args.set.clone()), None, None, None)
    } else {
        return Err(input(format!("set file not found: {}", args.set)));
    };
    let (set, c, r) = match (explicit, fixture.as_deref()) {
        (Some(set), _) => {
            if args.c.is_some() || args.r.is_some() {
                return Err(input("--c/--r apply only to the exampleE fixture"));
            }
            (set, None, None)
        }
        (None, Some("exampleE")) => {
            let c = args.c.or(file_c).unwrap_or(DEFAULT_C);
            let r = args.r.or(file_r).unwrap_or(DEFAULT_R);
            (fixtures::example_e(c, r)?, Some(c), Some(r))
        }
        (None, Some(name)) => {
            if args.c.is_some() || args.r.is_some() {
                return Err(input("--c/--r apply only to the exampleE fixture"));
            }
            (fixtures::by_name(name, DEFAULT_C, DEFAULT_R)?, None, None)
        }
        (None, None) => unreachable!("a set source always resolves to a file or a fixture"),
    };
    let info = SetInfo {
        source: args.set.clone(),
        fixture,
        c,
        r,
        n: set.n(),
        m: set.m(),
    };
    Ok((set, info))
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(input(format!("--{name} must be positive, got {v}")))
    }
}

fn nonzero(name: &str, v: usize) -> CliResult<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(input(format!("--{name} must be positive")))
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    emit(out, &text)
}

fn plot_bounds(set: &SemialgebraicSet) -> CliResult<[(f64, f64); 2]> {
    let b = set.bounding_box(720, 0.05, &RayOptions::default())?;
    // square window around the box
    let cx = 0.5 * (b[0].0 + b[0].1);
    let cy = 0.5 * (b[1].0 + b[1].1);
    let h = 0.5 * (b[0].1 - b[0].0).max(b[1].1 - b[1].0) * 1.05;
    Ok([(cx - h, cx + h), (cy - h, cy + h)])
}

fn boundary_segments(set: &SemialgebraicSet, bounds: &[(f64, f64); 2]) -> Vec<[[f64; 2]; 2]> {
    marching_squares(|x| set.max_constraint(x) - 1.0, bounds, CONTOUR_GRID)
}

#[derive(Serialize)]
struct ApproximateOutput<'a> {
    command: &'static str,
    seed: u64,
    set: SetInfo,
    #[serde(flatten)]
    result: &'a ApproximationResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    volumes: Option<VolumeComparison>,
}

fn cmd_approximate(a: &ApproximateArgs) -> CliResult<()> {
    positive("eps", a.eps)?;
    positive("s-tol", a.s_tol)?;
    nonzero("lb-rays", a.lb_rays)?;
    nonzero("resolution", a.resolution)?;
    let (set, info) = load_set(&a.set)?;
    let opts = ApproxOptions {
        eps: a.eps,
        s_tol: a.s_tol,
        mult_degree: a.mult_degree,
        unknown_policy: match a.unknown_policy {
            PolicyArg::TreatAsInfeasible => UnknownPolicy::TreatAsInfeasible,
            PolicyArg::Fail => UnknownPolicy::Fail,
        },
        ..ApproxOptions::default()
    };
    let mut result = approximate(&set, a.degree, &opts)?;
    if !result.trace_consistent() {
        return Err(CliError::Internal("bisection trace is inconsistent".into()));
    }
    result.s_lb = Some(scaling_lower_bound_estimate(&set, a.lb_rays, a.seed)?);
    let volumes = if set.n() == 2 {
        Some(result.volume_comparison(&set, a.resolution)?)
    } else {
        None
    };
    if let Some(path) = &a.output.svg {
        if set.n() != 2 {
            return Err(input("--svg needs a 2D set"));
        }
        let outer = result.f.substitute_scale(result.s_star)?;
        let bounds = plot_bounds(&result.outer_set()?)?;
        let mut svg = Svg::new(bounds);
        svg.segments(&boundary_segments(&set, &bounds), "black", "set-boundary");
        svg.segments(&marching_squares(|x| result.f.eval_unchecked(x) - 1.0, &bounds, CONTOUR_GRID), "blue", "inner");
        svg.segments(&marching_squares(|x| outer.eval_unchecked(x) - 1.0, &bounds, CONTOUR_GRID), "red", "outer");
        let title = format!("{} degree {} s* {} seed {}", info.source, a.degree, format_sig(result.s_star, 9), a.seed);
        emit(Some(path), &svg.finish(&title))?;
    }
    emit_json(
        a.output.out.as_deref(),
        &ApproximateOutput {
            command: "approximate",
            seed: a.seed,
            set: info,
            result: &result,
            volumes,
        },
    )
}

#[derive(Serialize)]
struct KernelOutput {
    command: &'static str,
    seed: u64,
    set: SetInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    directions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mult_degree: Option<u32>,
    empty: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    farkas_verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chebyshev_center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chebyshev_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    supports: Option<Vec<SupportSummary>>,
    polytope: Polytope,
}

#[derive(Serialize)]
struct SupportSummary {
    direction: Vec<f64>,
    point: Vec<f64>,
    value: f64,
    residual: f64,
    min_eig: f64,
}

/// Vertices and Chebyshev centre of a nonempty bounded 2D polytope.
fn describe_2d(k: &Polytope, solver: &SolverOptions) -> (Option<Vec<Vec<f64>>>, Option<(Vec<f64>, f64)>) {
    if k.empty || k.n != 2 {
        return (None, None);
    }
    let vertices = match &k.vertices {
        Some(v) => Some(v.clone()),
        None => vertices_2d(k).ok(),
    };
    let bounded = vertices.as_ref().is_some_and(|v| v.len() >= 3);
    let centre = if bounded { chebyshev_center(k, solver).ok() } else { None };
    (vertices, centre)
}

fn kernel_svg(set: &SemialgebraicSet, out: &KernelOutput, path: &Path) -> CliResult<()> {
    if set.n() != 2 {
        return Err(input("--svg needs a 2D set"));
    }
    let bounds = plot_bounds(set)?;
    let mut svg = Svg::new(bounds);
    svg.segments(&boundary_segments(set, &bounds), "black", "set-boundary");
    if let Some(v) = &out.vertices {
        svg.polygon(v, "green", "kernel");
    }
    if let Some(c) = &out.chebyshev_center {
        svg.point(c, "green", "chebyshev-center");
    }
    let title = format!("{} {} empty {} seed {}", out.set.source, out.command, out.empty, out.seed);
    emit(Some(path), &svg.finish(&title))
}

fn cmd_kernel_outer(a: &KernelOuterArgs) -> CliResult<()> {
    let (set, info) = load_set(&a.set)?;
    let opts = KernelOptions::default();
    let k = outer_kernel(&set, a.samples, a.seed, &opts)?;
    let farkas_verified = match (&k.halfspaces, &k.farkas) {
        (Some(hs), Some(y)) if k.empty => Some(verify_polytope_farkas(hs, y)),
        _ => None,
    };
    let (vertices, centre) = describe_2d(&k, &opts.solver);
    let out = KernelOutput {
        command: "kernel_outer",
        seed: a.seed,
        set: info,
        samples: Some(a.samples),
        directions: None,
        mult_degree: None,
        empty: k.empty,
        farkas_verified,
        vertices,
        chebyshev_radius: centre.as_ref().map(|c| c.1),
        chebyshev_center: centre.map(|c| c.0),
        supports: None,
        polytope: k,
    };
    if let Some(p) = &a.output.svg {
        kernel_svg(&set, &out, p)?;
    }
    emit_json(a.output.out.as_deref(), &out)
}

fn cmd_kernel_inner(a: &KernelInnerArgs) -> CliResult<()> {
    nonzero("directions", a.directions)?;
    let (set, info) = load_set(&a.set)?;
    let solver = SolverOptions::default();
    let dirs = support_directions(set.n(), a.directions, a.seed);
    let ki = inner_kernel(&set, &dirs, a.mult_degree, &solver)?;
    let (vertices, centre) = describe_2d(&ki.polytope, &solver);
    let supports = ki
        .supports
        .iter()
        .map(|s| SupportSummary {
            direction: s.direction.clone(),
            point: s.point.clone(),
            value: s.value,
            residual: s.certificate.residual,
            min_eig: s.certificate.min_eig,
        })
        .collect();
    let out = KernelOutput {
        command: "kernel_inner",
        seed: a.seed,
        set: info,
        samples: None,
        directions: Some(a.directions),
        mult_degree: Some(a.mult_degree),
        empty: ki.polytope.empty,
        farkas_verified: None,
        vertices,
        chebyshev_radius: centre.as_ref().map(|c| c.1),
        chebyshev_center: centre.map(|c| c.0),
        supports: Some(supports),
        polytope: ki.polytope,
    };
    if let Some(p) = &a.output.svg {
        kernel_svg(&set, &out, p)?;
    }
    emit_json(a.output.out.as_deref(), &out)
}

#[derive(Serialize)]
struct VolumeOutput {
    command: &'static str,
    seed: u64,
    set: SetInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<Vec<(f64, f64)>>,
    volume: VolumeEstimate,
}

fn cmd_volume(a: &VolumeArgs) -> CliResult<()> {
    let (set, info) = load_set(&a.set)?;
    let region = |x: &[f64]| set.contains(x);
    let out = match a.method {
        MethodArg::Polar => {
            let center = a.center.clone().ok_or_else(|| input("--method polar needs --center"))?;
            if center.len() != set.n() {
                return Err(input(format!("--center needs {} coordinates", set.n())));
            }
            let default = if set.n() == 2 { POLAR_RESOLUTION } else { POLAR_RESOLUTION_ND };
            let volume = volume_star(region, &center, a.resolution.unwrap_or(default))?;
            VolumeOutput {
                command: "volume",
                seed: a.seed,
                set: info,
                center: Some(center),
                bounds: None,
                volume,
            }
        }
        MethodArg::Grid => {
            let bounds = set.bounding_box(720, 0.05, &RayOptions::default())?;
            let volume = volume_grid(region, &bounds, a.resolution.unwrap_or(GRID_RESOLUTION))?;
            VolumeOutput {
                command: "volume",
                seed: a.seed,
                set: info,
                center: None,
                bounds: Some(bounds),
                volume,
            }
        }
    };
    emit_json(a.out.as_deref(), &out)
}

const TABLE2_HEADER: &str = "r,degree,objective,s_star,s_lb,vol_set,vol_outer,percent_error,seed,status";

fn table2_rows(c: f64, r: f64, a: &Table2Args) -> Vec<String> {
    let sig = |v: f64| format_sig(v, 9);
    let prefix = |objective: &str| format!("{},{},{objective}", sig(r), a.degree);
    let failed = |objective: &str, e: &dyn std::fmt::Display| {
        let msg = e.to_string().replace([',', '\n'], ";");
        format!("{},,,,,,{},error: {msg}", prefix(objective), a.seed)
    };
    let set = match fixtures::example_e(c, r) {
        Ok(s) => s,
        Err(e) => return vec![failed("scaling", &e)],
    };
    let slb = analytic_slb(c, r);
    let mut rows = Vec::new();
    let scaling = approximate(&set, a.degree, &ApproxOptions::default())
        .and_then(|res| Ok((res.s_star, res.volume_comparison(&set, a.resolution)?)));
    let vol_set = match scaling {
        Ok((s, vc)) => {
            rows.push(format!(
                "{},{},{},{},{},{},{},ok",
                prefix("scaling"),
                sig(s),
                sig(slb),
                sig(vc.vol_set),
                sig(vc.vol_outer),
                sig(vc.percent_error),
                a.seed
            ));
            Some(vc.vol_set)
        }
        Err(e) => {
            rows.push(failed("scaling", &e));
            None
        }
    };
    if a.l1 {
        let l1 = set.bounding_box(720, 0.05, &RayOptions::default()).and_then(|bounds| {
            let out = find_l1_outer(&set, &bounds, a.degree, None, &SolverOptions::default())?;
            let vol_set = match vol_set {
                Some(v) => v,
                None => volume_grid(|x| set.contains(x), &bounds, a.resolution)?.value,
            };
            let vol = out.outer_volume(&bounds, a.resolution)?;
            Ok((vol_set, vol, percent_error(vol, vol_set)?))
        });
        rows.push(match l1 {
            Ok((vs, vo, pe)) => format!("{},,,{},{},{},{},ok", prefix("l1"), sig(vs), sig(vo), sig(pe), a.seed),
            Err(e) => failed("l1", &e),
        });
    }
    rows
}

fn cmd_table2(a: &Table2Args) -> CliResult<()> {
    nonzero("resolution", a.resolution)?;
    if a.radii.is_empty() {
        return Err(input("--radii needs at least one value"));
    }
    let mut text = String::from(TABLE2_HEADER);
    text.push('\n');
    for &r in &a.radii {
        for row in table2_rows(a.c, r, a) {
            text.push_str(&row);
            text.push('\n');
        }
    }
    emit(a.out.as_deref(), &text)
}

fn check_backend() -> CliResult<()> {
    match std::env::var(SOLVER_ENV) {
        Err(_) => Ok(()),
        Ok(v) if v.eq_ignore_ascii_case("clarabel") => Ok(()),
        Ok(v) => Err(input(format!("{SOLVER_ENV}={v:?} is not an available backend (available: clarabel)"))),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    check_backend()?;
    match &cli.command {
        Command::Approximate(a) => cmd_approximate(a),
        Command::Kernel { which: KernelCommand::Outer(a) } => cmd_kernel_outer(a),
        Command::Kernel { which: KernelCommand::Inner(a) } => cmd_kernel_inner(a),
        Command::Volume(a) => cmd_volume(a),
        Command::Table2(a) => cmd_table2(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Input(e.to_string().trim_end().to_string());
            println!("{}", err.json());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            println!("{}", err.json());
            ExitCode::from(err.exit_code())
        }
    }
}
