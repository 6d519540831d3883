//! `posc` — grid-discretized p-oscillation energies, nonlocal perimeters,
//! Dirichlet solves, and 1-D rigidity reports from the command line.
//!
//! Exit codes: 0 on success, 2 on validation errors (bad flags, malformed
//! files, inconsistent geometry), 1 on runtime errors (I/O failures).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use posc::field::ScalarField;
use posc::grid::{ball_stencil, dilate, window_interior, BallStencil, Lattice, Region};
use posc::io::{
    build_problem, read_field_auto, read_field_csv_1d, read_field_pgm, read_problem_spec,
    read_region_pgm, write_field_csv_1d, write_field_csv_2d, write_field_pgm, write_json,
    write_region_pgm, write_region_rle_csv, DomainSpec, ProblemSpec, RunManifest, SolveSummary,
};
use posc::oscillation::{energy, OscParams};
use posc::perimeter::{coarea_both_sides, gamma_experiment, level_set, per_r, IndicatorSet};
use posc::rigidity::{
    check_monotone, class_a_audit, collar_necessity_demo, periodic_decompose,
    second_difference_residual, Decomposition, Monotonicity,
};
use posc::solver::{solve_subgradient, SolverConfig};
use posc::{Error, Result};

#[derive(Parser)]
#[command(name = "posc", version, about = "p-oscillation energies, nonlocal perimeters, and Dirichlet solves on uniform grids")]
struct Cli {
    /// Cap the number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the p-oscillation energy of a field over a domain.
    Energy(EnergyArgs),
    /// Solve a Dirichlet problem by projected subgradient descent.
    Solve(SolveArgs),
    /// Nonlocal perimeter of a built-in shape or a mask.
    Per(PerArgs),
    /// Check the layer-cake identity and emit the per-level table.
    Coarea(CoareaArgs),
    /// Normalized energies across radii against the discrete total variation.
    Gamma(GammaArgs),
    /// 1-D structure report: monotonicity, local-minimality audit,
    /// second differences, slope-plus-periodic decomposition, collar demo.
    Rigidity(RigidityArgs),
    /// Fill a masked hole in a PGM image by energy minimization.
    Inpaint(InpaintArgs),
    /// Regenerate the deterministic example inputs.
    Fixtures(FixturesArgs),
}

/// Domain selection shared by the evaluation subcommands. With no selection
/// the domain defaults to the field's lattice eroded by the ball, the
/// largest domain whose windows stay on the lattice.
#[derive(Args)]
struct DomainArgs {
    /// Domain: `a,b` for a 1-D open interval, `disk:cx,cy,radius` in 2-D.
    #[arg(long)]
    domain: Option<String>,
    /// Domain as a 0/255 PGM mask on the field's lattice.
    #[arg(long)]
    domain_mask: Option<PathBuf>,
}

#[derive(Args)]
struct EnergyArgs {
    /// Input field: `x,value` CSV (1-D), grid CSV or PGM (2-D).
    #[arg(long)]
    field: PathBuf,
    /// Field dimension for CSV inputs.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Interaction radius.
    #[arg(long)]
    r: f64,
    /// Oscillation exponent (>= 1).
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Expected grid spacing; validated against the input file when given.
    #[arg(long)]
    h: Option<f64>,
    #[command(flatten)]
    domain: DomainArgs,
    /// Write a JSON report (and its manifest) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem description JSON (dim, h, r, p, domain, data path).
    #[arg(long)]
    problem: PathBuf,
    /// Result field path: CSV, or PGM in 2-D.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration budget.
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Initial step size (default: a tenth of the data value span).
    #[arg(long)]
    step: Option<f64>,
    /// Stall tolerance on the best energy (0 disables the stall stop).
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Disk,
    Halfspace,
}

#[derive(Args)]
struct PerArgs {
    /// Built-in shape (alternative to --mask).
    #[arg(long, value_enum)]
    shape: Option<Shape>,
    /// Disk radius for --shape disk.
    #[arg(long = "R", default_value_t = 1.0)]
    big_r: f64,
    /// Interaction radius.
    #[arg(long)]
    r: f64,
    /// Grid spacing for built-in shapes.
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    /// Evaluate the perimeter of this PGM mask instead of a built-in shape.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Write a JSON report (and its manifest) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoareaArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long)]
    r: f64,
    #[command(flatten)]
    domain: DomainArgs,
    /// Write the per-level CSV table here (columns `s,layer,per_r`); a JSON
    /// summary and manifest are written alongside.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GammaArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Radii to compare, largest first.
    #[arg(long, value_delimiter = ',', required = true)]
    radii: Vec<f64>,
    #[command(flatten)]
    domain: DomainArgs,
    /// Write the CSV table here (columns `r,normalized_energy,discrete_tv`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RigidityArgs {
    /// 1-D field CSV.
    #[arg(long)]
    field: PathBuf,
    /// Interaction radius; must be an integer multiple of the grid spacing.
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Random audit intervals.
    #[arg(long, default_value_t = 20)]
    intervals: usize,
    /// Perturbation trials per interval.
    #[arg(long, default_value_t = 60)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON report path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InpaintArgs {
    /// Input image (ASCII PGM with its `.json` scaling sidecar).
    #[arg(long)]
    image: PathBuf,
    /// Hole mask (0/255 PGM on the same lattice); white pixels are filled.
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Output image path (PGM).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FixturesArgs {
    /// Directory to (re)generate the example inputs into.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // ignore the error from a pool that is already initialized
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Energy(a) => cmd_energy(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Per(a) => cmd_per(a),
        Cmd::Coarea(a) => cmd_coarea(a),
        Cmd::Gamma(a) => cmd_gamma(a),
        Cmd::Rigidity(a) => cmd_rigidity(a),
        Cmd::Inpaint(a) => cmd_inpaint(a),
        Cmd::Fixtures(a) => cmd_fixtures(a),
    }
}

/// `<path>.manifest.json`, mirroring the PGM sidecar convention.
fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(suffix);
    PathBuf::from(os)
}

fn write_manifest(
    anchor: &Path,
    subcommand: &str,
    parameters: &[(&str, String)],
    inputs: &[&Path],
    outputs: &[&Path],
) -> Result<()> {
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        subcommand: subcommand.into(),
        parameters: parameters
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect::<BTreeMap<_, _>>(),
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    write_json(&manifest, &with_suffix(anchor, ".manifest.json"))
}

/// Resolves the evaluation domain on the field's lattice; defaults to the
/// lattice eroded by the ball.
fn resolve_domain(lat: &Lattice, args: &DomainArgs, stencil: &BallStencil) -> Result<Region> {
    match (&args.domain, &args.domain_mask) {
        (Some(_), Some(_)) => {
            Err(Error::InvalidParameter("give either --domain or --domain-mask, not both".into()))
        }
        (Some(spec), None) => {
            if let Some(rest) = spec.strip_prefix("disk:") {
                let nums: Vec<f64> = rest
                    .split(',')
                    .map(|t| t.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad_domain(spec))?;
                let [cx, cy, radius] = nums[..] else { return Err(bad_domain(spec)) };
                Region::disk(lat, cx, cy, radius)
            } else {
                let nums: Vec<f64> = spec
                    .split(',')
                    .map(|t| t.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad_domain(spec))?;
                let [a, b] = nums[..] else { return Err(bad_domain(spec)) };
                Region::interval(lat, a, b)
            }
        }
        (None, Some(path)) => {
            let mask = read_region_pgm(path)?;
            if mask.lattice() != lat {
                return Err(Error::InvalidParameter(
                    "domain mask lattice does not match the field lattice".into(),
                ));
            }
            Ok(mask)
        }
        (None, None) => window_interior(&Region::full(lat), stencil),
    }
}

fn bad_domain(spec: &str) -> Error {
    Error::InvalidParameter(format!(
        "cannot parse domain {spec:?}; expected `a,b` or `disk:cx,cy,radius`"
    ))
}

fn check_h(declared: Option<f64>, actual: f64) -> Result<()> {
    if let Some(h) = declared {
        if (h - actual).abs() > 1e-9 * h {
            return Err(Error::InvalidParameter(format!(
                "input grid spacing {actual} does not match --h {h}"
            )));
        }
    }
    Ok(())
}

fn cmd_energy(a: EnergyArgs) -> Result<()> {
    let u = read_field_auto(&a.field, a.dim)?;
    let lat = u.lattice().clone();
    check_h(a.h, lat.h())?;
    let params = OscParams::new(a.r, a.p, lat.h(), lat.dim())?;
    let omega = resolve_domain(&lat, &a.domain, params.stencil())?;
    let e = energy(&u, &omega, &params)?;
    println!("{e}");
    if let Some(out) = &a.out {
        write_json(&serde_json::json!({ "energy": e, "omega_cells": omega.count() }), out)?;
        write_manifest(
            out,
            "energy",
            &[
                ("r", a.r.to_string()),
                ("p", a.p.to_string()),
                ("h", lat.h().to_string()),
                ("domain", a.domain.domain.clone().unwrap_or_default()),
            ],
            &[&a.field],
            &[out],
        )?;
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let spec = read_problem_spec(&a.problem)?;
    let base = a.problem.parent().unwrap_or(Path::new(".")).to_path_buf();
    let prob = build_problem(&spec, &base)?;
    let cfg = SolverConfig {
        max_iters: a.iters,
        step0: a.step,
        tol: a.tol,
        seed: a.seed,
        ..Default::default()
    };
    let report = solve_subgradient(&prob, &cfg)?;
    println!(
        "energy {} after {} iterations ({:?})",
        report.final_energy, report.iterations, report.termination
    );

    if a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
        write_field_pgm(&report.field, &a.out, 255)?;
    } else if spec.dim == 1 {
        write_field_csv_1d(&report.field, &a.out)?;
    } else {
        write_field_csv_2d(&report.field, &a.out)?;
    }
    let summary = SolveSummary {
        final_energy: report.final_energy,
        iterations: report.iterations,
        termination: report.termination,
        energy_trace: report.energy_trace,
    };
    let summary_path = with_suffix(&a.out, ".summary.json");
    write_json(&summary, &summary_path)?;
    write_manifest(
        &a.out,
        "solve",
        &[
            ("r", spec.r.to_string()),
            ("p", spec.p.to_string()),
            ("h", spec.h.to_string()),
            ("seed", a.seed.to_string()),
            ("iters", a.iters.to_string()),
            ("step", a.step.map(|s| s.to_string()).unwrap_or_default()),
            ("tol", a.tol.to_string()),
        ],
        &[&a.problem],
        &[&a.out, &summary_path],
    )
}

fn cmd_per(a: PerArgs) -> Result<()> {
    let (value, shape_name) = match (&a.shape, &a.mask) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(Error::InvalidParameter("give exactly one of --shape or --mask".into()))
        }
        (Some(Shape::Disk), None) => {
            // Ω holds the full width-r band around the circle and its own
            // r-dilation stays on the lattice
            let big_r = a.big_r;
            let omega_radius = big_r + 1.25 * a.r;
            let n = ((omega_radius + a.r) / a.h).ceil() as i64 + 2;
            let lat = Lattice::grid(a.h, (-n, n), (-n, n))?;
            let ambient = Region::full(&lat);
            let e = IndicatorSet::new(Region::disk(&lat, 0.0, 0.0, big_r)?, ambient)?;
            let omega = Region::disk(&lat, 0.0, 0.0, omega_radius)?;
            (per_r(&e, &omega, a.r)?, "disk")
        }
        (Some(Shape::Halfspace), None) => {
            let n = (3.0 * a.r / a.h).ceil() as i64 + 2;
            let lat = Lattice::line(a.h, -n, n)?;
            let ambient = Region::full(&lat);
            let e = IndicatorSet::new(
                Region::from_predicate(&lat, |c| lat.coord(c)[0] < 0.0),
                ambient,
            )?;
            let omega = Region::interval(&lat, -2.0 * a.r, 2.0 * a.r)?;
            (per_r(&e, &omega, a.r)?, "halfspace")
        }
        (None, Some(path)) => {
            let set = read_region_pgm(path)?;
            let lat = set.lattice().clone();
            let ambient = Region::full(&lat);
            let stencil = ball_stencil(a.r, lat.h(), lat.dim())?;
            let omega = window_interior(&ambient, &stencil)?;
            (per_r(&IndicatorSet::new(set, ambient)?, &omega, a.r)?, "mask")
        }
    };
    println!("{value}");
    if let Some(out) = &a.out {
        write_json(&serde_json::json!({ "per_r": value, "shape": shape_name }), out)?;
        write_manifest(
            out,
            "per",
            &[
                ("shape", shape_name.to_string()),
                ("R", a.big_r.to_string()),
                ("r", a.r.to_string()),
                ("h", a.h.to_string()),
            ],
            &a.mask.as_deref().map(|m| vec![m]).unwrap_or_default(),
            &[out],
        )?;
    }
    Ok(())
}

fn cmd_coarea(a: CoareaArgs) -> Result<()> {
    let u = read_field_auto(&a.field, a.dim)?;
    let lat = u.lattice().clone();
    let stencil = ball_stencil(a.r, lat.h(), lat.dim())?;
    let omega = resolve_domain(&lat, &a.domain, &stencil)?;
    let (lhs, rhs) = coarea_both_sides(&u, &omega, a.r)?;
    let residual = (lhs - rhs).abs() / lhs.max(1.0);
    println!("lhs {lhs}");
    println!("rhs {rhs}");
    println!("residual {residual:e}");

    if let Some(out) = &a.out {
        let values = u.levels();
        let mut table = String::from("s,layer,per_r\n");
        for pair in values.windows(2) {
            let s = 0.5 * (pair[0] + pair[1]);
            let per = per_r(&level_set(&u, s), &omega, a.r)?;
            let layer = pair[1] - pair[0];
            table.push_str(&format!("{s},{layer},{per}\n"));
        }
        std::fs::write(out, table).map_err(|e| Error::io(out, e))?;
        let summary_path = with_suffix(out, ".summary.json");
        write_json(
            &serde_json::json!({ "lhs": lhs, "rhs": rhs, "residual": residual }),
            &summary_path,
        )?;
        write_manifest(
            out,
            "coarea",
            &[("r", a.r.to_string()), ("h", lat.h().to_string())],
            &[&a.field],
            &[out, &summary_path],
        )?;
    }
    Ok(())
}

fn cmd_gamma(a: GammaArgs) -> Result<()> {
    let u = read_field_auto(&a.field, a.dim)?;
    let lat = u.lattice().clone();
    let r_max = a.radii.iter().cloned().fold(0.0f64, f64::max);
    let stencil = ball_stencil(r_max, lat.h(), lat.dim())?;
    let omega = resolve_domain(&lat, &a.domain, &stencil)?;
    let rows = gamma_experiment(&u, &omega, &a.radii)?;
    let mut table = String::from("r,normalized_energy,discrete_tv\n");
    for row in &rows {
        table.push_str(&format!("{},{},{}\n", row.r, row.normalized_energy, row.discrete_tv));
    }
    print!("{table}");
    if let Some(out) = &a.out {
        std::fs::write(out, &table).map_err(|e| Error::io(out, e))?;
        let summary_path = with_suffix(out, ".summary.json");
        let tv = rows.first().map(|r| r.discrete_tv).unwrap_or(0.0);
        let last = rows.last().map(|r| r.normalized_energy).unwrap_or(0.0);
        write_json(
            &serde_json::json!({
                "discrete_tv": tv,
                "final_normalized_energy": last,
                "final_gap": (last - tv).abs(),
            }),
            &summary_path,
        )?;
        write_manifest(
            out,
            "gamma",
            &[(
                "radii",
                a.radii.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            )],
            &[&a.field],
            &[out, &summary_path],
        )?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct CollarReport {
    interior_worst: f64,
    full_worst: f64,
    witness_change: Option<f64>,
}

#[derive(serde::Serialize)]
struct RigidityReport {
    monotonicity: &'static str,
    class_a_worst_decrease: f64,
    second_difference_residual: f64,
    decomposition: Decomposition,
    collar: CollarReport,
}

fn cmd_rigidity(a: RigidityArgs) -> Result<()> {
    let u = read_field_csv_1d(&a.field)?;
    let h = u.lattice().h();
    let k = (a.r / h).round();
    if k < 1.0 || (a.r - k * h).abs() > 1e-9 * a.r {
        return Err(Error::InvalidParameter(format!(
            "rigidity needs r to be an integer multiple of the grid spacing; r/h = {}",
            a.r / h
        )));
    }
    let k = k as i64;
    let params = OscParams::new(a.r, a.p, h, 1)?;

    let monotonicity = match check_monotone(&u)? {
        Monotonicity::Constant => "constant",
        Monotonicity::Nondecreasing => "nondecreasing",
        Monotonicity::Nonincreasing => "nonincreasing",
        Monotonicity::NonMonotone => "non-monotone",
    };
    let worst = class_a_audit(&u, &params, a.intervals, a.trials, a.seed)?;
    let sd = second_difference_residual(&u, k)?;
    let decomposition = periodic_decompose(&u, k)?;

    let lo = u.support().cells().map(|c| c[0]).min().unwrap();
    let hi = u.support().cells().map(|c| c[0]).max().unwrap();
    let omega = Region::from_cells(u.lattice(), (lo + k..=hi - k).map(|i| [i, 0]))?;
    let demo = collar_necessity_demo(&u, &omega, &params, a.trials, a.seed)?;

    let mut outputs: Vec<&Path> = vec![&a.out];
    let witness_path = with_suffix(&a.out, ".witness.csv");
    if let Some((witness, _)) = &demo.witness {
        write_field_csv_1d(witness, &witness_path)?;
        outputs.push(&witness_path);
    }
    let report = RigidityReport {
        monotonicity,
        class_a_worst_decrease: worst,
        second_difference_residual: sd,
        decomposition,
        collar: CollarReport {
            interior_worst: demo.interior_worst,
            full_worst: demo.full_worst,
            witness_change: demo.witness.as_ref().map(|(_, d)| *d),
        },
    };
    write_json(&report, &a.out)?;
    println!(
        "monotonicity {monotonicity}; audit worst {worst:e}; second difference {sd:e}; C {}",
        report.decomposition.c
    );
    write_manifest(
        &a.out,
        "rigidity",
        &[
            ("r", a.r.to_string()),
            ("p", a.p.to_string()),
            ("h", h.to_string()),
            ("intervals", a.intervals.to_string()),
            ("trials", a.trials.to_string()),
            ("seed", a.seed.to_string()),
        ],
        &[&a.field],
        &outputs,
    )
}

fn cmd_inpaint(a: InpaintArgs) -> Result<()> {
    let image = read_field_pgm(&a.image)?;
    let hole = read_region_pgm(&a.mask)?;
    if hole.lattice() != image.lattice() {
        return Err(Error::InvalidParameter(
            "mask lattice does not match the image lattice".into(),
        ));
    }
    let lat = image.lattice().clone();
    let params = OscParams::new(a.r, a.p, lat.h(), 2)?;
    let dilated = dilate(&hole, params.stencil())?;
    let data = image.restrict(&dilated.difference(&hole))?;
    let prob = posc::solver::DirichletProblem::new(hole.clone(), data, params)?;
    let cfg = SolverConfig { max_iters: a.iters, seed: a.seed, ..Default::default() };
    let report = solve_subgradient(&prob, &cfg)?;
    println!(
        "energy {} after {} iterations ({:?})",
        report.final_energy, report.iterations, report.termination
    );

    let filled =
        image.with_values_on(&hole, |c, _| report.field.value(c).unwrap())?;
    write_field_pgm(&filled, &a.out, 255)?;
    let summary = SolveSummary {
        final_energy: report.final_energy,
        iterations: report.iterations,
        termination: report.termination,
        energy_trace: report.energy_trace,
    };
    let summary_path = with_suffix(&a.out, ".summary.json");
    write_json(&summary, &summary_path)?;
    write_manifest(
        &a.out,
        "inpaint",
        &[
            ("r", a.r.to_string()),
            ("p", a.p.to_string()),
            ("seed", a.seed.to_string()),
            ("iters", a.iters.to_string()),
        ],
        &[&a.image, &a.mask],
        &[&a.out, &summary_path],
    )
}

fn cmd_fixtures(a: FixturesArgs) -> Result<()> {
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let dir = a.out.as_path();
    let mut outputs: Vec<PathBuf> = Vec::new();

    // linear boundary data: u = x around Ω = (−1, 1), r = 3
    let lat = Lattice::line(0.01, -399, 399)?;
    let linear = ScalarField::from_fn(&Region::full(&lat), |[x, _]| x)?;
    let linear_csv = dir.join("linear.csv");
    write_field_csv_1d(&linear, &linear_csv)?;
    let linear_prob = ProblemSpec {
        dim: 1,
        h: 0.01,
        r: 3.0,
        p: 1.0,
        domain: DomainSpec::Interval { a: -1.0, b: 1.0 },
        data: "linear.csv".into(),
    };
    let linear_prob_path = dir.join("linear_problem.json");
    write_json(&linear_prob, &linear_prob_path)?;
    outputs.push(linear_csv);
    outputs.push(linear_prob_path);

    // a jump at −r/2 outside Ω = (0, 2): the zero extension is optimal
    for (name, h, lo, hi, left, right) in [
        ("offset_jump", 0.005, -199i64, 599i64, 0i64, 400i64),
        ("offset_jump_coarse", 0.25, -3, 11, 0, 8),
    ] {
        let lat = Lattice::line(h, lo, hi)?;
        let collar = Region::from_predicate(&lat, |c| c[0] <= left || c[0] >= right);
        let data = ScalarField::from_fn(&collar, |[x, _]| {
            if x > -1.0 && x <= -0.5 {
                1.0
            } else {
                0.0
            }
        })?;
        let csv = dir.join(format!("{name}.csv"));
        write_field_csv_1d(&data, &csv)?;
        let prob = ProblemSpec {
            dim: 1,
            h,
            r: 1.0,
            p: 1.0,
            domain: DomainSpec::Interval { a: 0.0, b: 2.0 },
            data: format!("{name}.csv"),
        };
        let prob_path = dir.join(format!("{name}_problem.json"));
        write_json(&prob, &prob_path)?;
        outputs.push(csv);
        outputs.push(prob_path);
    }

    // unit disk mask on a grid wide enough for r = 0.2 evaluations
    let lat = Lattice::grid(0.01, (-150, 150), (-150, 150))?;
    let disk_path = dir.join("disk.pgm");
    write_region_pgm(&Region::disk(&lat, 0.0, 0.0, 1.0)?, &disk_path)?;
    outputs.push(with_suffix(&disk_path, ".json"));
    outputs.push(disk_path);

    // 1-D half-space as index runs
    let lat = Lattice::line(0.01, -150, 150)?;
    let half = Region::from_predicate(&lat, |c| lat.coord(c)[0] < 0.0);
    let half_path = dir.join("halfspace.csv");
    write_region_rle_csv(&half, &half_path)?;
    outputs.push(half_path);

    // a monotone staircase for the coarea and rigidity demos
    let lat = Lattice::line(0.05, -100, 100)?;
    let stairs = ScalarField::from_fn(&Region::full(&lat), |[x, _]| x.floor())?;
    let stairs_path = dir.join("staircase.csv");
    write_field_csv_1d(&stairs, &stairs_path)?;
    outputs.push(stairs_path);

    // record names relative to the directory so regeneration anywhere
    // yields byte-identical files
    let names: Vec<PathBuf> =
        outputs.iter().map(|p| p.strip_prefix(dir).unwrap_or(p).to_path_buf()).collect();
    let name_refs: Vec<&Path> = names.iter().map(PathBuf::as_path).collect();
    write_manifest(&dir.join("fixtures"), "fixtures", &[], &[], &name_refs)?;
    println!("wrote {} files to {}", outputs.len() + 1, dir.display());
    Ok(())
}
