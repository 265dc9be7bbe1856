//! Argument handling for the `billiard-mower` binary. [`run`] does all the
//! work and returns the exit code with both output streams, so it can be
//! tested without spawning a process.

use std::path::PathBuf;

use billiard_mower::{
    build_orbit_by_symmetry, classify, covering_radius, grid_oracle_radius, plan_shortest_cover,
    render_orbit, simulate_orbit, Classification, CoverReport, Orbit, PlannerError, Rational,
    RenderError, RenderOptions, TrajectoryError, TrajectorySpec,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "billiard-mower",
    version,
    about = "Periodic billiard paths as lawn-mower routes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Singular or periodic, and the period.
    Classify(SpecArgs),
    /// Construct the orbit and list its segments.
    Orbit {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum, default_value_t = Method::Simulate)]
        method: Method,
    },
    /// Closed-form covering radius.
    Rcov(SpecArgs),
    /// Shortest periodic path covering the square with blade radius r.
    Plan {
        #[arg(long, value_name = "R")]
        radius: Rational,
        #[arg(long)]
        json: bool,
    },
    /// Check the closed form against an n×n grid oracle.
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_name = "N", default_value_t = 1000)]
        grid: u32,
    },
    /// Write an SVG figure of the orbit.
    Render {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output file, or `-` for stdout.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_grid: bool,
        /// Shade the parallelogram cells.
        #[arg(long)]
        cells: bool,
        /// Draw the swept neighbourhood of this radius.
        #[arg(long, value_name = "R")]
        radius: Option<Rational>,
        #[arg(long, value_name = "PX", default_value_t = 512)]
        width: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Simulate,
    Symmetry,
}

#[derive(Debug, Args)]
struct SpecArgs {
    /// Start (a, 0) on the bottom side, as n/d or a decimal.
    #[arg(long, value_name = "A", required_unless_present_any = ["vertical", "horizontal"])]
    a: Option<Rational>,
    #[arg(long, value_name = "P", requires = "a")]
    p: Option<u32>,
    #[arg(long, value_name = "Q", requires = "a")]
    q: Option<u32>,
    /// Period-2 path along x = A.
    #[arg(long, value_name = "A", conflicts_with_all = ["a", "horizontal"])]
    vertical: Option<Rational>,
    /// Period-2 path along y = A.
    #[arg(long, value_name = "A", conflicts_with_all = ["a"])]
    horizontal: Option<Rational>,
    #[arg(long)]
    json: bool,
}

impl SpecArgs {
    fn spec(&self) -> Result<TrajectorySpec, CliError> {
        let spec = if let Some(a) = &self.vertical {
            TrajectorySpec::vertical(a.clone())
        } else if let Some(a) = &self.horizontal {
            TrajectorySpec::horizontal(a.clone())
        } else {
            let a = self.a.clone().expect("clap requires --a");
            match (self.p, self.q) {
                (Some(p), Some(q)) => TrajectorySpec::sloped(a, p, q),
                _ => {
                    return Err(CliError::Invalid(
                        "--p and --q are required with --a".into(),
                    ))
                }
            }
        };
        Ok(spec?)
    }

    /// Everything except `classify` needs a non-singular path.
    fn periodic_spec(&self) -> Result<TrajectorySpec, CliError> {
        let spec = self.spec()?;
        spec.ensure_periodic()?;
        Ok(spec)
    }
}

#[derive(Debug)]
enum CliError {
    Invalid(String),
    Internal(String),
}

impl From<TrajectoryError> for CliError {
    fn from(e: TrajectoryError) -> Self {
        match e {
            TrajectoryError::StartOutOfRange(_)
            | TrajectoryError::BadSlope { .. }
            | TrajectoryError::NotCoprime { .. }
            | TrajectoryError::Singular { .. }
            | TrajectoryError::PeriodTwo => CliError::Invalid(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<PlannerError> for CliError {
    fn from(e: PlannerError) -> Self {
        match e {
            PlannerError::Trajectory(t) => t.into(),
            PlannerError::InvalidRadius(_) | PlannerError::RadiusTooSmall(_) => {
                CliError::Invalid(e.to_string())
            }
            PlannerError::NotRepresentable(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(e.to_string()))
}

pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_INVALID,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(text)
            };
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => outcome,
        Err(CliError::Invalid(msg)) => Outcome {
            code: EXIT_INVALID,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(CliError::Internal(msg)) => Outcome {
            code: EXIT_FAILURE,
            stdout: String::new(),
            stderr: format!("internal error: {msg}\n"),
        },
    }
}

fn dispatch(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Classify(args) => classify_cmd(&args),
        Command::Orbit { spec, method } => orbit_cmd(&spec, method),
        Command::Rcov(args) => rcov_cmd(&args),
        Command::Plan {
            radius,
            json: as_json,
        } => plan_cmd(&radius, as_json),
        Command::Verify { spec, grid } => verify_cmd(&spec, grid),
        Command::Render {
            spec,
            out,
            no_grid,
            cells,
            radius,
            width,
        } => {
            let opts = RenderOptions {
                width_px: width,
                show_grid: !no_grid,
                show_cells: cells,
                neighborhood_r: radius.map(|r| r.to_f64()),
                ..RenderOptions::default()
            };
            render_cmd(&spec, &out, &opts)
        }
    }
}

fn classify_cmd(args: &SpecArgs) -> Result<Outcome, CliError> {
    let spec = args.spec()?;
    let class = classify(&spec);
    if args.json {
        #[derive(serde::Serialize)]
        struct Classified {
            spec: TrajectorySpec,
            classification: Classification,
        }
        return Ok(Outcome::ok(json(&Classified {
            spec,
            classification: class,
        })?));
    }
    Ok(Outcome::ok(match class {
        Classification::Singular => "singular (hits a corner)\n".to_string(),
        Classification::Periodic { period } => format!("periodic, period {period}\n"),
    }))
}

fn build_orbit(spec: &TrajectorySpec, method: Method) -> Result<Orbit, CliError> {
    Ok(match (method, spec) {
        (Method::Symmetry, TrajectorySpec::Sloped(s)) => build_orbit_by_symmetry(s)?,
        // a period-2 path has a single cell row; there is nothing to reflect
        _ => simulate_orbit(spec)?,
    })
}

fn orbit_cmd(args: &SpecArgs, method: Method) -> Result<Outcome, CliError> {
    let spec = args.periodic_spec()?;
    let orbit = build_orbit(&spec, method)?;
    if args.json {
        return Ok(Outcome::ok(json(&orbit)?));
    }
    let bp = orbit.bounce_points();
    let mut out = format!(
        "{spec}: period {}\nbounces: bottom {}, top {}, left {}, right {}\n",
        orbit.period(),
        bp.bottom.len(),
        bp.top.len(),
        bp.left.len(),
        bp.right.len()
    );
    for (k, s) in orbit.segments().iter().enumerate() {
        out.push_str(&format!("{:>4}  {} -> {}\n", k + 1, s.start(), s.end()));
    }
    Ok(Outcome::ok(out))
}

fn rcov_line(report: &CoverReport) -> String {
    format!("rcov = {} ≈ {:.6}\n", report.exact, report.float_value)
}

fn rcov_cmd(args: &SpecArgs) -> Result<Outcome, CliError> {
    let report = CoverReport::new(covering_radius(&args.periodic_spec()?)?);
    Ok(Outcome::ok(if args.json {
        json(&report)?
    } else {
        rcov_line(&report)
    }))
}

fn plan_cmd(r: &Rational, as_json: bool) -> Result<Outcome, CliError> {
    let plan = plan_shortest_cover(r)?;
    if as_json {
        return Ok(Outcome::ok(json(&plan)?));
    }
    let reps: Vec<String> = plan
        .representations
        .iter()
        .map(|(p, q)| format!("{p}² + {q}²"))
        .collect();
    let rc = plan.covering_radius();
    let starts: Vec<String> = plan.all_min_starts.iter().map(|a| a.to_string()).collect();
    let mut out = format!(
        "r = {} ≈ {:.6}\nM = {} = {} (least M > {})\npath: {}\nstarts: {}\nlength = {} ≈ {:.6}\nrcov = {} ≈ {:.6}\n",
        plan.r,
        plan.r.to_f64(),
        plan.m,
        reps.join(" = "),
        plan.threshold,
        plan.canonical_spec,
        starts.join(", "),
        plan.path_length,
        plan.path_length.to_f64(),
        rc,
        rc.to_f64()
    );
    if let Some(alt) = &plan.period_two_alternative {
        out.push_str(&format!("also covers: {alt} (length 2)\n"));
    }
    Ok(Outcome::ok(out))
}

fn verify_cmd(args: &SpecArgs, n: u32) -> Result<Outcome, CliError> {
    if n == 0 {
        return Err(CliError::Invalid("grid size must be at least 1".into()));
    }
    let spec = args.periodic_spec()?;
    let orbit = simulate_orbit(&spec)?;
    let oracle = grid_oracle_radius(&orbit, n);
    let report = CoverReport::new(covering_radius(&spec)?).with_oracle(oracle);
    let holds = report.sandwich_holds() == Some(true);
    let out = if args.json {
        json(&report)?
    } else {
        let o = report.oracle.as_ref().expect("oracle attached");
        format!(
            "{}oracle(n = {}) = √({}) ≈ {:.6} at {}\nbound = {:.6}\nsandwich: {}\n",
            rcov_line(&report),
            o.n,
            o.max_dist_sq,
            o.value,
            o.argmax,
            o.error_bound(),
            if holds { "holds" } else { "VIOLATED" }
        )
    };
    Ok(Outcome {
        code: if holds { EXIT_OK } else { EXIT_FAILURE },
        stdout: out,
        stderr: String::new(),
    })
}

fn render_cmd(
    args: &SpecArgs,
    out: &std::path::Path,
    opts: &RenderOptions,
) -> Result<Outcome, CliError> {
    let orbit = simulate_orbit(&args.periodic_spec()?)?;
    let svg = render_orbit(&orbit, opts)?;
    if out.as_os_str() == "-" {
        return Ok(Outcome::ok(svg));
    }
    std::fs::write(out, &svg)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", out.display())))?;
    Ok(Outcome::ok(format!(
        "wrote {} ({} bytes)\n",
        out.display(),
        svg.len()
    )))
}
