//! The `distortion-lab` command line.
//!
//! Exit status is 0 on success, 1 when `verify` finds a violated inequality and
//! 2 for unusable input (bad flags, unreadable files, invalid instances).

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use distortion_core::election::monte_carlo_distortion;
use distortion_core::generators::{
    gen_diff_dist, gen_example1, gen_example2_line_iid, gen_half_mass_configuration,
    gen_simplex_metric, perturb_probabilities, random_line_instance, random_metric_instance,
    Family, FamilyParams, Generated,
};
use distortion_core::line::reduce_to_three;
use distortion_core::search::{merge_restarts, SearchConfig, SearchSpace};
use distortion_core::LineInstance;

use crate::io::{
    read_input, read_instance, read_instance_with, write_file, write_generated, write_line,
};
use crate::parallel::{default_pool, par_expected_distortion, par_restarts};
use crate::report::{to_line, CheckJson, ReportJson, RestartJson, SearchJson, TraceJson};
use crate::sweep::{sweep, write_csv, SweepParam};
use crate::verify::verify;
use crate::LabError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "distortion-lab", version, about = "Expected distortion of random-candidate majority elections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance of a named family as JSON.
    Gen(GenArgs),
    /// Print costs, pairwise outcomes and the expected distortion.
    Eval(EvalArgs),
    /// Reduce a line instance to three support points, printing each step as a JSON line.
    Reduce(ReduceArgs),
    /// Simulated-annealing search for high expected distortion.
    Search(SearchArgs),
    /// Check every applicable proven inequality; exits 1 on a violation.
    Verify(VerifyArgs),
    /// Evaluate a family over a grid of one parameter and print CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Example1,
    #[value(alias = "example2-line-iid")]
    Example2,
    #[value(alias = "simplex-metric")]
    Simplex,
    DiffDist,
    HalfMass,
    RandomLine,
    RandomMetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    LinePqEqual,
    MetricPqEqual,
    MetricPqFree,
}

impl From<SpaceArg> for SearchSpace {
    fn from(s: SpaceArg) -> Self {
        match s {
            SpaceArg::LinePqEqual => SearchSpace::LinePqEqual,
            SpaceArg::MetricPqEqual => SearchSpace::MetricPqEqual,
            SpaceArg::MetricPqFree => SearchSpace::MetricPqFree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    Eps,
    N,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Number of light points (simplex, half-mass) or points (random families).
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw voters independently of candidates (random-metric only).
    #[arg(long)]
    pub independent_q: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Instance file; standard input when absent or `-`.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Accept distance tables that break the triangle inequality.
    #[arg(long)]
    pub allow_nonmetric: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Include the pair table even above 64 points.
    #[arg(long)]
    pub pairs: bool,
    /// Add a Monte Carlo estimate from this many sampled pairs.
    #[arg(long)]
    pub mc: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Mix the distribution with a random one at this weight before reducing.
    #[arg(long)]
    pub perturb: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the reduced instance.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum)]
    pub space: SpaceArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 20_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub init_temp: f64,
    #[arg(long, default_value_t = 0.999)]
    pub cooling: f64,
    /// Where to write the best instance found.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write one JSON line per restart.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_enum)]
    pub param: ParamArg,
    /// Comma-separated parameter values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn generate_family(args: &FamilyArgs) -> Result<Generated, LabError> {
    let (eps, n, seed) = (args.eps, args.n, args.seed);
    Ok(match args.family {
        FamilyArg::Example1 => Generated::Metric(gen_example1(eps)?),
        FamilyArg::Example2 => Generated::Line(gen_example2_line_iid(eps)?),
        FamilyArg::Simplex => Generated::Metric(gen_simplex_metric(n, eps)?),
        FamilyArg::DiffDist => Generated::Metric(gen_diff_dist(eps)?),
        FamilyArg::HalfMass => Generated::Metric(gen_half_mass_configuration(n, seed)?),
        FamilyArg::RandomLine => Generated::Line(random_line_instance(n, seed)?),
        FamilyArg::RandomMetric => {
            Generated::Metric(random_metric_instance(n, seed, args.independent_q)?)
        }
    })
}

fn sweep_family(args: &FamilyArgs) -> Result<FamilyParams, LabError> {
    let family = match args.family {
        FamilyArg::Example1 => Family::Example1,
        FamilyArg::Example2 => Family::Example2LineIid,
        FamilyArg::Simplex => Family::SimplexMetric,
        FamilyArg::DiffDist => Family::DiffDist,
        FamilyArg::RandomLine => Family::RandomLine,
        FamilyArg::RandomMetric => Family::RandomMetric,
        FamilyArg::HalfMass => {
            return Err(LabError::Usage("half-mass cannot be swept".into()));
        }
    };
    Ok(FamilyParams {
        family,
        eps: args.eps,
        n: args.n,
        seed: args.seed,
    })
}

fn load(input: &InputArgs, stdin: &mut dyn Read) -> Result<Generated, LabError> {
    read_instance(&read_input(input.input.as_deref(), stdin)?)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), LabError> {
    writeln!(out, "{text}").map_err(|e| LabError::File {
        path: "<stdout>".into(),
        source: e,
    })
}

fn execute(cli: Cli, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<i32, LabError> {
    match cli.command {
        Command::Gen(args) => {
            let text = write_generated(&generate_family(&args.family)?);
            match args.out {
                Some(path) => write_file(&path, &format!("{text}\n"))?,
                None => emit(stdout, &text)?,
            }
        }
        Command::Eval(args) => {
            let instance = load(&args.input, stdin)?.to_instance();
            let report = par_expected_distortion(&default_pool(), &instance);
            let mut json = ReportJson::new(&report, args.pairs);
            if let Some(samples) = args.mc {
                json = json.with_monte_carlo(&monte_carlo_distortion(&instance, samples, args.seed)?);
            }
            emit(stdout, &to_line(&json))?;
        }
        Command::Reduce(args) => {
            let line = match load(&args.input, stdin)? {
                Generated::Line(line) => line,
                Generated::Metric(_) => {
                    return Err(LabError::Invalid {
                        field: "positions",
                        message: "reduce needs a line instance".into(),
                    })
                }
            };
            let line = match args.perturb {
                Some(delta) => {
                    let p = perturb_probabilities(line.distribution(), delta, args.seed)?;
                    LineInstance::new(line.positions().to_vec(), p)?
                }
                None => line,
            };
            let reduction = reduce_to_three(&line)?;
            for step in &reduction.trace {
                emit(stdout, &to_line(&TraceJson::from(step)))?;
            }
            if let Some(path) = args.out {
                write_file(&path, &format!("{}\n", write_line(&reduction.result)))?;
            }
        }
        Command::Search(args) => {
            let config = SearchConfig {
                space: args.space.into(),
                n: args.n,
                restarts: args.restarts,
                steps_per_restart: args.steps,
                init_temp: args.init_temp,
                cooling: args.cooling,
                seed: args.seed,
            };
            let outcomes = par_restarts(&default_pool(), &config)?;
            if let Some(path) = &args.trace {
                let mut lines = String::new();
                for o in &outcomes {
                    lines.push_str(&to_line(&RestartJson {
                        restart: o.restart,
                        value: o.value,
                        evaluations: o.evaluations,
                        accepted: o.accepted,
                    }));
                    lines.push('\n');
                }
                write_file(path, &lines)?;
            }
            let result = merge_restarts(config.space, outcomes);
            if let Some(path) = &args.out {
                write_file(path, &format!("{}\n", write_generated(&result.best_instance)))?;
            }
            emit(
                stdout,
                &to_line(&SearchJson::new(&result, config.n, config.seed, config.steps_per_restart)),
            )?;
        }
        Command::Verify(args) => {
            let text = read_input(args.input.input.as_deref(), stdin)?;
            let instance = read_instance_with(&text, !args.allow_nonmetric)?;
            let checks = verify(&default_pool(), &instance);
            for c in &checks {
                emit(stdout, &to_line(&CheckJson::from(c)))?;
            }
            if checks.iter().any(|c| c.is_violation()) {
                return Ok(EXIT_VIOLATION);
            }
        }
        Command::Sweep(args) => {
            let base = sweep_family(&args.family)?;
            let param = match args.param {
                ParamArg::Eps => SweepParam::Eps,
                ParamArg::N => SweepParam::N,
            };
            let rows = sweep(&default_pool(), base, param, &args.values)?;
            match args.out {
                Some(path) => {
                    let mut buf = Vec::new();
                    write_csv(&mut buf, &rows)?;
                    write_file(&path, &String::from_utf8(buf).expect("csv output is UTF-8"))?;
                }
                None => write_csv(&mut *stdout, &rows)?,
            }
        }
    }
    Ok(EXIT_OK)
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli, stdin, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_BAD_INPUT
        }
    }
}
