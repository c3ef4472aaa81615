use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use remdyn::dynamics::{run_trajectory, StartLaw};
use remdyn::estimators::{CorrelationRegistry, Ensemble, LandscapeSpec};
use remdyn::experiment::{
    resolve_params, run_experiment, write_csv, write_table, ExperimentConfig, GridEntry,
    OutputFormat,
};
use remdyn::landscape::{DEFAULT_LATTICE_SAMPLES, DEFAULT_LEPAGE_COUNT};
use remdyn::limits::{asl_cdf, critical_prediction, levy_tail, LevyTail};
use remdyn::oracles::{brute_force_corr, mixing_tv, spectral_return};
use remdyn::scales::mixing_steps;
use remdyn::seeding::{disorder_seed, stream};
use remdyn::{solve_scales, Error, ModelParams, PoissonCascade, Result};

#[derive(Parser)]
#[command(
    name = "remdyn",
    version,
    about = "Random hopping dynamics of the random energy model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve the scale bundle for one parameterization.
    Scales(ModelArgs),
    /// Landscape summaries.
    #[command(subcommand)]
    Landscape(LandscapeCmd),
    /// Store one trajectory of the jump chain and its clock as CSV.
    Simulate(SimulateArgs),
    /// Estimate one correlation point with the ensemble of a config file.
    Correlation(CorrelationArgs),
    /// Closed-form limit objects.
    #[command(subcommand)]
    Limits(LimitsCmd),
    /// Exact small-instance references.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Run a config-driven experiment.
    Run(RunArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long)]
    n: u32,
    /// Intermediate scale a_n = 2^(eps n).
    #[arg(long, conflicts_with = "eps_bar")]
    eps: Option<f64>,
    /// Extreme scale a_n = eps_bar 2^n.
    #[arg(long)]
    eps_bar: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Choose beta so that alpha(eps) equals this value.
    #[arg(long)]
    alpha: Option<f64>,
    /// Critical-line offset (beta = beta_c(eps)).
    #[arg(long)]
    theta: Option<f64>,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        resolve_params(
            self.n,
            self.eps,
            self.eps_bar,
            self.beta,
            self.alpha,
            self.theta,
        )
    }
}

#[derive(Args, Clone)]
struct RealizationArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Build the landscape from the LePage order statistics.
    #[arg(long)]
    lepage: bool,
    #[arg(long, default_value_t = DEFAULT_LEPAGE_COUNT)]
    count: usize,
}

impl RealizationArgs {
    fn ensemble(&self, params: ModelParams) -> Ensemble {
        let spec = if self.lepage {
            LandscapeSpec::LePage { count: self.count }
        } else {
            LandscapeSpec::Direct
        };
        Ensemble::new(params, 1, 1, self.seed).with_landscape(spec)
    }
}

#[derive(Subcommand)]
enum LandscapeCmd {
    /// Lattice averages of one disorder realization.
    Stats {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        realization: RealizationArgs,
        #[arg(long, default_value_t = 1.0)]
        u: f64,
        /// Skip the two-step sum, which is the slow part.
        #[arg(long)]
        no_sigma: bool,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    realization: RealizationArgs,
    #[arg(long)]
    steps: u64,
    #[arg(long, default_value = "uniform")]
    start: StartLaw,
    /// Trajectory seed; defaults to the landscape seed.
    #[arg(long)]
    path_seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorrelationArgs {
    #[arg(long, default_value = "nojump")]
    kind: String,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum LimitsCmd {
    /// Generalized arcsine law Asl_alpha(u).
    Asl {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        u: f64,
    },
    /// Levy tail nu(u, inf), stable or cascade.
    Levy {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        u: f64,
        #[arg(long)]
        extreme: bool,
        #[arg(long, default_value_t = DEFAULT_LEPAGE_COUNT)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        eps_bar: f64,
    },
    /// Critical-line constant.
    Critical {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Spectral return probability p^l_n(x, x).
    ReturnProb {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        l: u32,
    },
    /// Deviation from the parity-restricted uniform law after theta_n steps.
    Mixing {
        #[arg(long)]
        n: u32,
    },
    /// No-jump correlation by brute-force event simulation (n <= 10).
    BruteCorr {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 10_000)]
        paths: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the output path of the config; stdout if neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn scales(args: &ModelArgs) -> Result<()> {
    let params = args.params()?;
    let scales = solve_scales(&params)?;
    print_json(&json!({ "params": params, "scales": scales }))
}

fn landscape_stats(
    model: &ModelArgs,
    realization: &RealizationArgs,
    u: f64,
    no_sigma: bool,
) -> Result<()> {
    let params = model.params()?;
    let scales = solve_scales(&params)?;
    let ens = realization.ensemble(params);
    let real = ens.realization(&scales, 0)?;
    let l = &real.landscape;
    let nu = l.lattice_nu(u)?;
    let sigma = if no_sigma {
        None
    } else {
        Some(l.lattice_sigma(u)?)
    };
    print_json(&json!({
        "params": params,
        "scales": scales,
        "mode": l.mode(),
        "landscape_seed": disorder_seed(realization.seed, 0),
        "u": u,
        "lattice_nu": nu,
        "lattice_sigma": sigma,
        "lattice_m": l.lattice_m(),
        "cascade_marks": real.cascade.as_ref().map(|c| c.count()),
        "sampling_budget": DEFAULT_LATTICE_SAMPLES,
    }))
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let params = args.model.params()?;
    let scales = solve_scales(&params)?;
    let real = args.realization.ensemble(params).realization(&scales, 0)?;
    let seed = args.path_seed.unwrap_or(args.realization.seed);
    let traj = run_trajectory(&real.landscape, args.steps, args.start, seed)?;
    let write = |out: Box<dyn Write>| -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "vertex", "clock", "rescaled_clock", "centering"])?;
        for k in 0..traj.visits.len() {
            w.write_record([
                k.to_string(),
                traj.visits[k].0.to_string(),
                traj.clock[k].to_string(),
                (traj.clock[k] / scales.c_n).to_string(),
                traj.centering[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    match &args.out {
        Some(path) => {
            write(Box::new(std::fs::File::create(path)?))?;
            print_json(&json!({
                "steps": traj.steps(),
                "horizon": traj.horizon(&scales),
                "seed": seed,
                "out": path,
            }))
        }
        None => write(Box::new(std::io::stdout())),
    }
}

fn correlation(args: &CorrelationArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&args.config)?;
    CorrelationRegistry::default().build(&args.kind, args.rho.or(config.rho))?;
    config.correlations = Some(vec![args.kind.clone()]);
    config.grid = vec![GridEntry {
        t: args.t,
        s: args.s,
        rho: args.rho,
    }];
    if args.rho.is_some() {
        config.rho = args.rho;
    }
    let table = run_experiment(&config)?;
    match &args.out {
        Some(path) => write_table(&table, path, OutputFormat::Csv),
        None => write_csv(&table.rows, std::io::stdout()),
    }
}

fn limits(cmd: &LimitsCmd) -> Result<()> {
    match cmd {
        LimitsCmd::Asl { alpha, u } => {
            print_json(&json!({ "alpha": alpha, "u": u, "asl": asl_cdf(*alpha, *u)? }))
        }
        LimitsCmd::Levy {
            alpha,
            u,
            extreme,
            depth,
            seed,
            eps_bar,
        } => {
            let tail = if *extreme {
                let cascade =
                    PoissonCascade::sample(*alpha, *depth, &mut stream(*seed, "cascade"))?;
                LevyTail::Extreme {
                    cascade,
                    eps_bar: *eps_bar,
                }
            } else {
                LevyTail::Intermediate { alpha: *alpha }
            };
            let v = levy_tail(&tail, *u)?;
            print_json(&json!({
                "alpha": alpha,
                "u": u,
                "extreme": extreme,
                "depth": if *extreme { Some(*depth) } else { None },
                "seed": if *extreme { Some(*seed) } else { None },
                "tail": v.value,
                "remainder_bound": v.remainder_bound,
            }))
        }
        LimitsCmd::Critical { theta, beta, t, s } => print_json(&json!({
            "theta": theta, "beta": beta, "t": t, "s": s,
            "prediction": critical_prediction(*theta, *beta, *t, *s)?,
        })),
    }
}

fn oracle(cmd: &OracleCmd) -> Result<()> {
    match cmd {
        OracleCmd::ReturnProb { n, l } => {
            if *n == 0 {
                return Err(Error::Domain("n must be at least 1".into()));
            }
            print_json(&json!({ "n": n, "l": l, "return_probability": spectral_return(*n, *l) }))
        }
        OracleCmd::Mixing { n } => {
            let deviation = mixing_tv(*n)?;
            print_json(&json!({
                "n": n,
                "theta_n": mixing_steps(*n)?,
                "deviation": deviation,
                "bound": 2f64.powi(-(*n as i32)),
            }))
        }
        OracleCmd::BruteCorr {
            model,
            t,
            s,
            paths,
            seed,
        } => {
            let params = model.params()?;
            let scales = solve_scales(&params)?;
            let real = Ensemble::new(params, 1, 1, *seed).realization(&scales, 0)?;
            let est = brute_force_corr(&real.landscape, *t, *s, *paths, *seed)?;
            print_json(&json!({ "params": params, "t": t, "s": s, "estimate": est }))
        }
    }
}

fn run(args: &RunArgs) -> Result<()> {
    let config = ExperimentConfig::load(&args.config)?;
    let table = run_experiment(&config)?;
    let format = match args.format {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        Some(FormatArg::Json) => OutputFormat::Json,
        None => config.output.format,
    };
    match args.out.as_ref().or(config.output.path.as_ref()) {
        Some(path) => write_table(&table, path, format),
        None => match format {
            OutputFormat::Csv => write_csv(&table.rows, std::io::stdout()),
            OutputFormat::Json => print_json(&serde_json::to_value(&table)?),
        },
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Scales(m) => scales(m),
        Command::Landscape(LandscapeCmd::Stats {
            model,
            realization,
            u,
            no_sigma,
        }) => landscape_stats(model, realization, *u, *no_sigma),
        Command::Simulate(a) => simulate(a),
        Command::Correlation(a) => correlation(a),
        Command::Limits(c) => limits(c),
        Command::Oracle(c) => oracle(c),
        Command::Run(a) => run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
