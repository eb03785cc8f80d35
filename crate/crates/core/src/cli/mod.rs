//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad input (parse, config, files), 3 numeric
//! failure.

mod plot;
pub mod prompt;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::autodiff::{check_gradient, GradCheckError};
use crate::dsl::{FlatObjective, ParamValue, Params};
use crate::kinematics::io::{read_motion_json, write_bvh, write_motion_json, write_positions_csv};
use crate::kinematics::{default_skeleton, forward_kinematics, MotionSequence, Skeleton, DEFAULT_FPS};
use crate::metrics::{self, MetricsConfig, MetricsReport};
use crate::optimizer::{program_hash, relax_and_minimize, OptimConfig, OptimError, RelaxSpec, RunManifest};
use crate::priors::PriorSpec;
use crate::tasks::{self, TaskError, TaskSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Largest accepted relative gradient error.
pub const GRADCHECK_TOL: f64 = 1e-4;

pub const MOTION_FILE: &str = "motion.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const BVH_FILE: &str = "motion.bvh";
pub const CSV_FILE: &str = "positions.csv";

#[derive(Parser, Debug)]
#[command(name = "moproc", version, about = "Constraint-programmed motion generation")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize a motion for a task and export it.
    Run(RunArgs),
    /// Compute metrics for a motion file or a directory of runs.
    Eval(EvalArgs),
    /// Compare program gradients against finite differences.
    Gradcheck(GradArgs),
    /// Print a prompt that teaches a language model the DSL.
    Prompt(PromptArgs),
    /// List the available task ids.
    ListTasks,
}

#[derive(Args, Debug, Clone)]
struct Source {
    /// Task id from the corpus.
    #[arg(long, conflicts_with = "program")]
    task: Option<String>,
    /// Path to a `.mopro` program.
    #[arg(long)]
    program: Option<PathBuf>,
    /// Parameter override, `name=value` with a number or `[x,y,z]`.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    params: Vec<(String, ParamValue)>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum RelaxChoice {
    None,
    Plane,
    Line,
    Endpoints,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// identity, dct:K=<n> or pca:<model.json>.
    #[arg(long, default_value = "dct:K=8")]
    prior: String,
    #[arg(long, default_value_t = 60)]
    frames: usize,
    #[arg(long, default_value_t = DEFAULT_FPS)]
    fps: f64,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Constraint relaxation; defaults to the task's own.
    #[arg(long, value_enum)]
    relax: Option<RelaxChoice>,
    #[arg(long, default_value_t = 0, conflicts_with = "seeds")]
    seed: u64,
    /// Seed range `a..b` (exclusive) or `a..=b`; one subdirectory per seed.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<SeedRange>,
    /// Free-text description kept in the manifest.
    #[arg(long)]
    text: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Motion JSON file, or a directory of motion files and run directories.
    path: PathBuf,
    /// Without a task or program, the manifest next to each motion is used.
    #[command(flatten)]
    source: Source,
    /// Print JSON for directories too.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct GradArgs {
    /// Program path; alternative to --program.
    path: Option<PathBuf>,
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 8)]
    frames: usize,
    /// Number of random motions to check at.
    #[arg(long, default_value_t = 3)]
    motions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-6)]
    step: f64,
}

#[derive(Args, Debug)]
struct PromptArgs {
    /// Task description; words are joined with spaces.
    description: Vec<String>,
}

#[derive(Debug)]
enum CliError {
    User(String),
    Numeric(String),
    /// Already printed; only the exit code is left.
    Reported(i32),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::User(_) => EXIT_USER,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Reported(code) => *code,
        }
    }

    fn message(&self) -> Option<&str> {
        match self {
            CliError::User(m) | CliError::Numeric(m) => Some(m),
            CliError::Reported(_) => None,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn user(e: impl std::fmt::Display) -> CliError {
    CliError::User(e.to_string())
}

impl From<TaskError> for CliError {
    fn from(e: TaskError) -> Self {
        user(e)
    }
}

impl From<OptimError> for CliError {
    fn from(e: OptimError) -> Self {
        match e {
            OptimError::NonFinite { .. } | OptimError::Eval { .. } => CliError::Numeric(e.to_string()),
            _ => user(e),
        }
    }
}

fn parse_param(s: &str) -> Result<(String, ParamValue), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, found '{s}'"))?;
    let v: ParamValue = serde_json::from_str(value.trim())
        .map_err(|_| format!("'{value}' is neither a number nor a vector [x, y, z]"))?;
    Ok((name.trim().to_owned(), v))
}

#[derive(Clone, Debug, PartialEq)]
struct SeedRange(Vec<u64>);

fn parse_seeds(s: &str) -> Result<SeedRange, String> {
    let bad = || format!("expected a seed range such as 0..20, found '{s}'");
    let (a, b, inclusive) = match s.split_once("..=") {
        Some((a, b)) => (a, b, true),
        None => s.split_once("..").map(|(a, b)| (a, b, false)).ok_or_else(bad)?,
    };
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    let seeds: Vec<u64> = if inclusive { (a..=b).collect() } else { (a..b).collect() };
    if seeds.is_empty() {
        return Err(format!("seed range '{s}' is empty"));
    }
    Ok(SeedRange(seeds))
}

/// Parses `args` (program name first) and runs the command.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USER } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if let Some(m) = e.message() {
                eprintln!("error: {m}");
            }
            e.code()
        }
    }
}

pub fn main() -> i32 {
    run_with_args(std::env::args_os())
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Run(a) => cmd_run(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Gradcheck(a) => cmd_gradcheck(&a),
        Command::Prompt(a) => {
            print!("{}", prompt::render(&a.description.join(" ")));
            Ok(())
        }
        Command::ListTasks => {
            for id in tasks::list_tasks()? {
                println!("{id}");
            }
            Ok(())
        }
    }
}

impl Source {
    fn given(&self) -> bool {
        self.task.is_some() || self.program.is_some()
    }

    fn overrides(&self) -> Params {
        self.params.iter().cloned().collect()
    }

    fn load(&self, skeleton: &Skeleton) -> CliResult<TaskSpec> {
        match (&self.task, &self.program) {
            (Some(id), _) => Ok(tasks::get_task_for(id, skeleton)?),
            (None, Some(path)) => {
                let src = read_text(path)?;
                TaskSpec::from_source(&src, skeleton).map_err(|e| match e {
                    TaskError::Compile { diagnostics, .. } => CliError::User(
                        diagnostics
                            .0
                            .iter()
                            .map(|d| format!("{}:{}:{}: {}", path.display(), d.line, d.col, d.message))
                            .collect::<Vec<_>>()
                            .join("\n"),
                    ),
                    e => user(e),
                })
            }
            (None, None) => Err(CliError::User("one of --task or --program is required".into())),
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

fn relax_spec(choice: Option<RelaxChoice>, task: &TaskSpec) -> CliResult<RelaxSpec> {
    let own = &task.relax;
    let (fits, name) = match choice {
        None => return Ok(own.clone()),
        Some(RelaxChoice::None) => return Ok(RelaxSpec::None),
        Some(RelaxChoice::Plane) => (matches!(own, RelaxSpec::PlaneFit { .. }), "plane"),
        Some(RelaxChoice::Line) => (matches!(own, RelaxSpec::LineFit { .. }), "line"),
        Some(RelaxChoice::Endpoints) => (matches!(own, RelaxSpec::EndpointPair { .. }), "endpoints"),
    };
    if fits {
        Ok(own.clone())
    } else {
        Err(CliError::User(format!("task {} does not support {name} relaxation", task.id)))
    }
}

/// What one finished run reports on stdout.
struct RunSummary {
    dir: PathBuf,
    seed: u64,
    report: MetricsReport,
    chosen: usize,
}

fn cmd_run(a: &RunArgs) -> CliResult<()> {
    let skeleton = default_skeleton();
    let task = a.source.load(&skeleton)?;
    let overrides = a.source.overrides();
    task.params(&overrides)?;
    let prior_spec = PriorSpec::from_str(&a.prior).map_err(user)?;
    if !(a.fps > 0.0 && a.fps.is_finite()) {
        return Err(CliError::User("--fps must be positive".into()));
    }
    let prior = prior_spec.build(&skeleton, a.frames, a.fps).map_err(user)?;
    let relax = relax_spec(a.relax, &task)?;
    let base = OptimConfig::default();
    let config = OptimConfig {
        lr: a.lr.unwrap_or(base.lr),
        steps: a.steps.unwrap_or(base.steps),
        restarts: a.restarts.unwrap_or(base.restarts),
        ..base
    };
    config.validate()?;

    let seeds: Vec<(u64, PathBuf)> = match &a.seeds {
        Some(SeedRange(list)) => list.iter().map(|&s| (s, a.out.join(format!("seed-{s}")))).collect(),
        None => vec![(a.seed, a.out.clone())],
    };
    let results: Vec<CliResult<RunSummary>> = seeds
        .par_iter()
        .map(|(seed, dir)| {
            let cfg = OptimConfig { seed: *seed, ..config.clone() };
            run_one(&task, &overrides, prior.as_ref(), &a.prior, &relax, &cfg, a.text.as_deref(), dir)
        })
        .collect();

    let mut worst = EXIT_OK;
    for r in results {
        match r {
            Ok(s) => println!(
                "{} seed {}: C.Err {:.4} success {} restart {} -> {}",
                s.report.id,
                s.seed,
                s.report.constraint_error.unwrap_or(f64::NAN),
                s.report.success.unwrap_or(false),
                s.chosen,
                s.dir.display()
            ),
            Err(e) => {
                eprintln!("error: {}", e.message().unwrap_or_default());
                worst = worst.max(e.code());
            }
        }
    }
    if worst == EXIT_OK {
        Ok(())
    } else {
        Err(CliError::Reported(worst))
    }
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    task: &TaskSpec,
    overrides: &Params,
    prior: &dyn crate::priors::MotionPrior,
    prior_arg: &str,
    relax: &RelaxSpec,
    config: &OptimConfig,
    text: Option<&str>,
    dir: &Path,
) -> CliResult<RunSummary> {
    let result = relax_and_minimize(prior, &task.program, overrides, relax, config)?;
    let skeleton = prior.skeleton();
    // export first, then measure what an importer will see
    let motion_json = write_motion_json(skeleton, result.motion());
    let (_, motion) = read_motion_json(&motion_json).map_err(user)?;
    let report = report_for(&task.id, skeleton, &motion, Some((task, overrides)))?;

    let mut manifest = RunManifest::new(&task.id, &task.source, prior_arg, config, relax, &result);
    manifest.params = overrides.clone();
    manifest.text = text.map(str::to_owned);
    manifest.metrics = metrics_map(&report);
    manifest.success = report.success;

    let pos = forward_kinematics(skeleton, &motion).map_err(user)?;
    let plots = dir.join("plots");
    std::fs::create_dir_all(&plots).map_err(|e| CliError::User(format!("{}: {e}", plots.display())))?;
    write_file(&dir.join(MOTION_FILE), &motion_json)?;
    write_file(&dir.join(BVH_FILE), &write_bvh(skeleton, &motion))?;
    write_file(&dir.join(CSV_FILE), &write_positions_csv(&pos))?;
    write_file(&dir.join(MANIFEST_FILE), &manifest.to_json())?;
    write_file(&dir.join(METRICS_FILE), &report_json(&report))?;
    write_file(&plots.join("root_path.svg"), &plot::root_path(&pos))?;
    write_file(&plots.join("heights.svg"), &plot::heights(skeleton, &pos))?;
    write_file(&plots.join("trace.svg"), &plot::trace(result.trace()))?;
    Ok(RunSummary { dir: dir.to_owned(), seed: config.seed, report, chosen: result.chosen })
}

fn report_for(
    id: &str,
    skeleton: &Skeleton,
    motion: &MotionSequence,
    task: Option<(&TaskSpec, &Params)>,
) -> CliResult<MetricsReport> {
    let cerr = match task {
        Some((t, p)) => Some(t.constraint_error(motion, p)?),
        None => None,
    };
    let report = metrics::evaluate_motion(id, skeleton, motion, cerr, &MetricsConfig::default()).map_err(user)?;
    let values = [report.foot_skate_ratio, report.max_acceleration, report.bone_length_incorrect_ratio];
    if values.iter().chain(report.constraint_error.iter()).any(|v| !v.is_finite()) {
        return Err(CliError::Numeric(format!("{id}: non-finite metric")));
    }
    Ok(report)
}

fn metrics_map(r: &MetricsReport) -> std::collections::BTreeMap<String, f64> {
    let mut m = std::collections::BTreeMap::new();
    m.insert("foot_skate_ratio".to_owned(), r.foot_skate_ratio);
    m.insert("max_acceleration".to_owned(), r.max_acceleration);
    m.insert("bone_length_incorrect_ratio".to_owned(), r.bone_length_incorrect_ratio);
    if let Some(e) = r.constraint_error {
        m.insert("constraint_error".to_owned(), e);
    }
    m
}

fn report_json(r: &MetricsReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes")
}

/// Motion files under `dir`: loose `.json` files other than manifests and
/// reports, plus `motion.json` inside each subdirectory.
fn collect_motions(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let io = |e: std::io::Error| CliError::User(format!("{}: {e}", dir.display()));
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir).map_err(io)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    entries.sort();
    let mut out = Vec::new();
    for p in entries {
        if p.is_dir() {
            let m = p.join(MOTION_FILE);
            if m.is_file() {
                out.push(m);
            }
        } else if p.extension().is_some_and(|x| x == "json")
            && !p.file_name().is_some_and(|n| n == MANIFEST_FILE || n == METRICS_FILE)
        {
            out.push(p);
        }
    }
    Ok(out)
}

/// Task and overrides for a motion: from the command line if given,
/// otherwise from a manifest next to the file.
fn task_for_motion(path: &Path, source: &Source, skeleton: &Skeleton) -> CliResult<Option<(TaskSpec, Params)>> {
    if source.given() {
        return Ok(Some((source.load(skeleton)?, source.overrides())));
    }
    let manifest_path = path.with_file_name(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Ok(None);
    }
    let m = RunManifest::from_json(&read_text(&manifest_path)?)
        .map_err(|e| CliError::User(format!("{}: {e}", manifest_path.display())))?;
    if program_hash(&m.source) != m.program_hash {
        return Err(CliError::User(format!("{}: program source does not match its hash", manifest_path.display())));
    }
    let task = TaskSpec::from_source(&m.source, skeleton)?;
    Ok(Some((task, m.params)))
}

fn eval_file(path: &Path, id: Option<String>, source: &Source) -> CliResult<MetricsReport> {
    let (skeleton, motion) =
        read_motion_json(&read_text(path)?).map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
    let task = task_for_motion(path, source, &skeleton)?;
    let id = id.unwrap_or_else(|| match &task {
        Some((t, _)) => t.id.clone(),
        None => path.display().to_string(),
    });
    report_for(&id, &skeleton, &motion, task.as_ref().map(|(t, p)| (t, p)))
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    if a.path.is_dir() {
        let files = collect_motions(&a.path)?;
        if files.is_empty() {
            return Err(CliError::User(format!("{}: no motion files", a.path.display())));
        }
        let reports = files
            .par_iter()
            .map(|f| {
                let rel = f.strip_prefix(&a.path).unwrap_or(f).display().to_string();
                eval_file(f, Some(rel), &a.source)
            })
            .collect::<CliResult<Vec<_>>>()?;
        if a.json {
            println!("{}", metrics::write_json(&reports));
        } else {
            print!("{}", metrics::write_csv(&reports));
        }
    } else {
        println!("{}", report_json(&eval_file(&a.path, None, &a.source)?));
    }
    Ok(())
}

fn random_motion(rng: &mut ChaCha8Rng, frames: usize, joints: usize, fps: f64) -> MotionSequence {
    let mut m = MotionSequence::rest(frames, joints, fps);
    for f in &mut m.frames {
        f.root_pos = [rng.random_range(-1.5..1.5), rng.random_range(0.3..1.2), rng.random_range(-1.5..1.5)];
        for r in &mut f.joint_rot {
            *r = [0, 1, 2].map(|_| rng.random_range(-0.7..0.7));
        }
    }
    m
}

fn cmd_gradcheck(a: &GradArgs) -> CliResult<()> {
    let source = match (&a.path, a.source.given()) {
        (Some(_), true) => return Err(CliError::User("give the program either as a path or with --task/--program".into())),
        (Some(p), false) => Source { program: Some(p.clone()), ..a.source.clone() },
        (None, _) => a.source.clone(),
    };
    if a.frames == 0 || a.motions == 0 || !(a.step > 0.0) {
        return Err(CliError::User("--frames, --motions and --step must be positive".into()));
    }
    let skeleton = default_skeleton();
    let task = source.load(&skeleton)?;
    let params = task.params(&source.overrides())?;
    let f = FlatObjective { program: &task.program, params, frames: a.frames, fps: DEFAULT_FPS };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut worst = 0.0f64;
    for i in 0..a.motions {
        let x = random_motion(&mut rng, a.frames, skeleton.joint_count(), DEFAULT_FPS).flatten();
        let err = check_gradient(&f, &x, a.step).map_err(|e| match e {
            GradCheckError::Eval(e) => CliError::Numeric(format!("{}: motion {i}: {e}", task.id)),
            e => CliError::Numeric(format!("{}: motion {i}: {e}", task.id)),
        })?;
        worst = worst.max(err);
    }
    println!("{}: max relative gradient error {worst:.3e} over {} motions", task.id, a.motions);
    if worst < GRADCHECK_TOL {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("{}: gradient error {worst:.3e} exceeds {GRADCHECK_TOL:e}", task.id)))
    }
}
