//! Command-line front end for the `tailrho` estimators and simulations.

pub mod data;
pub mod format;
pub mod table;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tailrho::asympt::{AsymptoticReport, DEGENERATE_BIAS};
use tailrho::mc::{degree_sweep, run_table, DEFAULT_REPS, DEFAULT_SEED};
use tailrho::{
    pseudo_observations_scaled, rho_hat_bernstein, rho_hat_empirical, rule_of_thumb_degree,
    DegreeRule, Error, ExperimentConfig, Fgm, Scaling,
};

use crate::format::g6;

/// Exit status of a failed command.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TIES: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tailrho",
    version,
    about = "Lower-tail Spearman's rho: estimation and simulation"
)]
pub struct Cli {
    /// Worker threads for simulations (0 = one per core).
    #[arg(long, global = true, env = "TAILRHO_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the tail rho of a two-column data file.
    Estimate(EstimateArgs),
    /// Monte Carlo table over a (theta, n, p) grid of FGM models.
    Simulate(SimulateArgs),
    /// Monte Carlo error curves as functions of the Bernstein degree.
    Sweep(SweepArgs),
    /// Asymptotic bias/variance quantities and the optimal degree.
    Asympt(AsymptArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Both,
    Empirical,
    Bernstein,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingArg {
    /// U = R/n
    #[value(name = "n")]
    N,
    /// U = R/(n+1), as in the simulations
    #[value(name = "n+1")]
    NPlusOne,
}

impl From<ScalingArg> for Scaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::N => Scaling::N,
            ScalingArg::NPlusOne => Scaling::NPlusOne,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeArg {
    Rule,
    Fixed(usize),
}

impl FromStr for DegreeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "rule" {
            return Ok(DegreeArg::Rule);
        }
        match s.parse::<usize>() {
            Ok(m) if m >= 1 => Ok(DegreeArg::Fixed(m)),
            _ => Err(format!("expected a positive integer or `rule`, got `{s}`")),
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "both")]
    pub method: MethodArg,
    /// Bernstein degree, or `rule` for floor(n^(2/3)).
    #[arg(long, default_value = "rule")]
    pub degree: DegreeArg,
    /// Rank denominator for the pseudo-observations.
    #[arg(long, value_enum, default_value = "n")]
    pub scaling: ScalingArg,
    /// Break ties with seeded noise below half the smallest gap.
    #[arg(long)]
    pub jitter: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also write the estimates as a CSV table.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub m_max: usize,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AsymptArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub n: usize,
}

/// A failed command: message for stderr plus the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let root = match &e {
            Error::Cell { source, .. } => source.as_ref(),
            other => other,
        };
        match root {
            Error::Ties { .. } => Failure {
                code: EXIT_TIES,
                message: format!("{e}; rerun with --jitter to break ties"),
            },
            Error::NonConvergence { .. } => Failure {
                code: 1,
                message: e.to_string(),
            },
            _ => Failure::usage(e.to_string()),
        }
    }
}

impl From<data::DataError> for Failure {
    fn from(e: data::DataError) -> Self {
        Failure::usage(e.to_string())
    }
}

fn write_out(path: &Path, contents: &str) -> Result<(), Failure> {
    table::write_atomic(path, contents).map_err(|e| Failure {
        code: 1,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

/// Sizes the global rayon pool; `0` leaves rayon's default.
pub fn configure_threads(threads: usize) -> Result<(), Failure> {
    if threads == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure {
            code: 1,
            message: format!("cannot start thread pool: {e}"),
        })
}

/// Runs a parsed command line, returning the text for stdout.
pub fn run(cli: &Cli) -> Result<String, Failure> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Asympt(a) => asympt(a),
    }
}

pub fn estimate(args: &EstimateArgs) -> Result<String, Failure> {
    let mut sample = data::read_sample(&args.input)?;
    if args.jitter {
        sample = sample.jittered(args.seed);
    }
    let ps = pseudo_observations_scaled(&sample, args.scaling.into())?;
    let n = ps.len();
    let m = match args.degree {
        DegreeArg::Rule => rule_of_thumb_degree(n),
        DegreeArg::Fixed(m) => m,
    };
    let mut report = format!("n = {n}\np = {}\n", g6(args.p));
    let mut rows = Vec::new();
    if args.method != MethodArg::Bernstein {
        let r = rho_hat_empirical(&ps, args.p)?;
        report.push_str(&format!("empirical = {}\n", g6(r.value)));
        rows.push(format!("empirical,{n},{},NA,{}", g6(args.p), g6(r.value)));
    }
    if args.method != MethodArg::Empirical {
        let r = rho_hat_bernstein(&ps, args.p, m)?;
        report.push_str(&format!("m = {m}\nbernstein = {}\n", g6(r.value)));
        rows.push(format!("bernstein,{n},{},{m},{}", g6(args.p), g6(r.value)));
    }
    if let Some(path) = &args.out {
        let mut csv = String::from("method,n,p,m,estimate\n");
        for row in rows {
            csv.push_str(&row);
            csv.push('\n');
        }
        write_out(path, &csv)?;
    }
    Ok(report)
}

pub fn simulate(args: &SimulateArgs) -> Result<String, Failure> {
    let config = ExperimentConfig {
        thetas: args.theta.clone(),
        ns: args.n.clone(),
        ps: args.p.clone(),
        degree_rule: DegreeRule::RuleOfThumb,
        reps: args.reps,
        seed: args.seed,
    };
    config.validate()?;
    let cells = run_table(&config)?;
    write_out(&args.out, &table::simulate_csv(&cells))?;
    Ok(format!(
        "wrote {} rows to {}\n",
        cells.len(),
        args.out.display()
    ))
}

pub fn sweep(args: &SweepArgs) -> Result<String, Failure> {
    if args.m_max < 1 {
        return Err(Failure::usage("--m-max must be at least 1"));
    }
    let cells = degree_sweep(
        args.theta, args.n, args.p, 1, args.m_max, args.reps, args.seed,
    )?;
    write_out(&args.out, &table::sweep_csv(&cells))?;
    Ok(format!(
        "wrote {} rows to {}\n",
        cells.len(),
        args.out.display()
    ))
}

pub fn asympt(args: &AsymptArgs) -> Result<String, Failure> {
    let model = Fgm::new(args.theta)?;
    let closed = model.integrated_bias_coeff(args.p)?;
    let r = AsymptoticReport::new(&model, args.p, args.n, None)?;
    let mut out = String::new();
    out.push_str(&format!(
        "theta = {}\np = {}\nn = {}\n",
        g6(args.theta),
        g6(args.p),
        args.n
    ));
    out.push_str(&format!("T_p(b) closed form = {}\n", g6(closed)));
    out.push_str(&format!("T_p(b) quadrature = {}\n", g6(r.t_p_b)));
    out.push_str(&format!("T_p(V) quadrature = {}\n", g6(r.t_p_v)));
    match (r.m_opt, r.mse_at_optimal) {
        (Some(m_opt), Some((m, e))) => {
            out.push_str(&format!("m_opt = {}\n", g6(m_opt)));
            out.push_str(&format!(
                "mse difference at m = {m} = {}\n",
                g6(e.difference)
            ));
        }
        _ => {
            out.push_str(&format!(
                "m_opt undefined: T_p(b) vanishes (|T_p(b)| < {}), falling back to m = {}\n",
                g6(DEGENERATE_BIAS),
                r.rule_of_thumb
            ));
        }
    }
    out.push_str(&format!("rule of thumb m = {}\n", r.rule_of_thumb));
    out.push_str(&format!(
        "mse difference at m = {} = {}\n",
        r.rule_of_thumb,
        g6(r.mse_at_rule_of_thumb.difference)
    ));
    Ok(out)
}
