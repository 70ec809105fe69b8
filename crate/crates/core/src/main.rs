use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use demix::diagnostics::{coherence_report, estimate_rsc_rss, link_constants};
use demix::harness::{
    build_instance, run_benchmark, run_phase_grid, run_trial, run_trial_with_result,
    write_bench_to, write_grid_to, write_trials_to, ExperimentConfig, TrialSpec, BENCH_REPEATS,
};
use demix::links::{Link, LinkKind};
use demix::measurement::{EnsembleKind, MeasurementOperator};
use demix::par::{self, Execution};
use demix::rng::{derive_seed, stream};
use demix::solvers::{Algorithm, InitKind, ProjectionMode, StepSize};
use demix::transforms::BasisKind;
use demix::{DemixError, Result};

#[derive(Parser)]
#[command(name = "demix", version, about = "Demixing sparse signals from nonlinear measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial and write one CSV row.
    Trial(TrialArgs),
    /// Run an (s, m) phase-transition grid.
    Phase(PhaseArgs),
    /// Time solvers (median of repeated runs).
    Bench(BenchArgs),
    /// Diagnostics, each emitting a single CSV row.
    #[command(subcommand)]
    Diag(DiagCommand),
}

#[derive(Subcommand)]
enum DiagCommand {
    /// Mutual coherence of the basis pair and cross coherence with A.
    Coherence(CommonArgs),
    /// Empirical restricted strong convexity / smoothness constants at the truth.
    Rscrss(RscArgs),
    /// Monte-Carlo link constants mu, sigma^2, eta^2.
    Linkconst(LinkConstArgs),
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// config file, then to the recipe, then to built-in defaults.
#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// TOML experiment file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Named preset to start from.
    #[arg(long)]
    recipe: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path (stdout when omitted).
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,

    #[arg(short = 'n', long)]
    n: Option<usize>,
    #[arg(short = 's', long)]
    s: Option<usize>,
    #[arg(short = 'm', long)]
    m: Option<usize>,
    #[arg(long)]
    basis_phi: Option<BasisKind>,
    #[arg(long)]
    basis_psi: Option<BasisKind>,
    #[arg(long)]
    ensemble: Option<EnsembleKind>,
    #[arg(long)]
    link: Option<LinkKind>,
    #[arg(long)]
    link_radius: Option<f64>,
    /// Noise standard deviation.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// Cosine similarity counted as a success.
    #[arg(long)]
    threshold: Option<f64>,

    /// A number or `auto`.
    #[arg(long)]
    step_size: Option<StepSize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    init: Option<InitKind>,
    #[arg(long)]
    projection: Option<ProjectionMode>,
    #[arg(long)]
    lasso_radius: Option<f64>,
    #[arg(long)]
    dst_beta: Option<f64>,
}

#[derive(Args)]
struct TrialArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Write the per-iteration trace as CSV.
    #[arg(long, value_name = "CSV")]
    trace: Option<PathBuf>,
    /// Run once per fixed step size, one row each, in the order given.
    #[arg(long, value_delimiter = ',', conflicts_with = "trace")]
    step_sweep: Vec<f64>,
}

#[derive(Args)]
struct PhaseArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_delimiter = ',')]
    s_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    m_list: Option<Vec<usize>>,
    /// Trials per cell.
    #[arg(long)]
    trials: Option<usize>,
    /// Run every trial on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Problem dimensions to time; defaults to the spec's n.
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Algorithms to time; defaults to the spec's algorithm.
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = BENCH_REPEATS)]
    repeats: usize,
}

#[derive(Args)]
struct RscArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Support size probed (defaults to 6s).
    #[arg(long)]
    level: Option<usize>,
    /// Number of random supports.
    #[arg(long, default_value_t = 8)]
    probes: usize,
}

#[derive(Args)]
struct LinkConstArgs {
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    link: Option<LinkKind>,
    #[arg(long)]
    link_radius: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Gaussian samples drawn.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                DemixError::InvalidArgument(_) | DemixError::Config { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Trial(args) => trial(args),
        Command::Phase(args) => phase(args),
        Command::Bench(args) => bench(args),
        Command::Diag(DiagCommand::Coherence(args)) => coherence(args),
        Command::Diag(DiagCommand::Rscrss(args)) => rscrss(args),
        Command::Diag(DiagCommand::Linkconst(args)) => linkconst(args),
    }
}

impl CommonArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load_with_recipe(path, self.recipe.as_deref())?,
            None => ExperimentConfig::parse_with_recipe("", self.recipe.as_deref())
                .map_err(DemixError::InvalidArgument)?,
        };
        let spec = &mut cfg.spec;
        macro_rules! set {
            ($($flag:ident => $field:expr),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { $field = v; })*
            };
        }
        set!(
            seed => spec.seed,
            n => spec.n,
            s => spec.s,
            m => spec.m,
            basis_phi => spec.basis_phi,
            basis_psi => spec.basis_psi,
            ensemble => spec.ensemble,
            link => spec.link,
            link_radius => spec.link_radius,
            tau => spec.tau,
            algorithm => spec.algorithm,
            threshold => spec.success_threshold,
            step_size => spec.solver.step_size,
            max_iters => spec.solver.max_iters,
            rel_tol => spec.solver.rel_tol,
            init => spec.solver.init,
            projection => spec.solver.projection,
            dst_beta => spec.solver.dst_beta,
        );
        if self.lasso_radius.is_some() {
            spec.solver.lasso_radius = self.lasso_radius;
        }
        if let Some(w) = self.workers.or(cfg.workers) {
            par::configure_workers(w);
        }
        Ok(cfg)
    }
}

/// Writes CSV to `--out` or stdout.
fn emit<F>(out: Option<&Path>, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|source| DemixError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush().map_err(|source| DemixError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
        }
    }
}

fn trial(args: TrialArgs) -> Result<()> {
    let spec = args.common.resolve()?.spec;
    let records = if args.step_sweep.is_empty() {
        let (record, result) = run_trial_with_result(&spec)?;
        if let Some(path) = &args.trace {
            let file = File::create(path).map_err(|source| DemixError::Io {
                path: path.clone(),
                source,
            })?;
            result
                .write_trace(BufWriter::new(file))
                .map_err(|source| DemixError::Csv {
                    path: path.clone(),
                    source,
                })?;
        }
        vec![record]
    } else {
        args.step_sweep
            .iter()
            .map(|&step| {
                let mut s = spec.clone();
                s.solver.step_size = StepSize::Fixed(step);
                run_trial(&s)
            })
            .collect::<Result<Vec<_>>>()?
    };
    emit(args.common.out.as_deref(), |w| write_trials_to(&records, w))
}

fn phase(args: PhaseArgs) -> Result<()> {
    let cfg = args.common.resolve()?;
    let missing = |what: &str| {
        DemixError::InvalidArgument(format!(
            "phase needs {what}: pass it as a flag, in [phase], or via --recipe"
        ))
    };
    let s_values = args.s_list.or_else(|| cfg.s_values()).ok_or_else(|| missing("an s list"))?;
    let m_values = args.m_list.or_else(|| cfg.m_values()).ok_or_else(|| missing("an m list"))?;
    let trials = args.trials.or_else(|| cfg.trials()).unwrap_or(10);
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let grid = run_phase_grid(&s_values, &m_values, trials, &cfg.spec, exec)?;
    emit(args.common.out.as_deref(), |w| write_grid_to(&grid, w))
}

fn bench(args: BenchArgs) -> Result<()> {
    let base = args.common.resolve()?.spec;
    let ns = if args.n_list.is_empty() {
        vec![base.n]
    } else {
        args.n_list
    };
    let algorithms = if args.algorithms.is_empty() {
        vec![base.algorithm]
    } else {
        args.algorithms
    };
    let specs: Vec<TrialSpec> = algorithms
        .iter()
        .flat_map(|&algorithm| {
            let base = &base;
            ns.iter().map(move |&n| TrialSpec {
                n,
                algorithm,
                ..base.clone()
            })
        })
        .collect();
    let rows = run_benchmark(&specs, args.repeats)?;
    emit(args.common.out.as_deref(), |w| write_bench_to(&rows, w))
}

fn single_row(out: Option<&Path>, header: &[&str], row: Vec<String>) -> Result<()> {
    emit(out, |w| {
        let path = out.map(Path::to_path_buf).unwrap_or_else(|| "<stdout>".into());
        let csv_err = |source| DemixError::Csv {
            path: path.clone(),
            source,
        };
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        wtr.write_record(header).map_err(csv_err)?;
        wtr.write_record(&row).map_err(csv_err)?;
        wtr.flush().map_err(|source| DemixError::Io { path, source })
    })
}

fn coherence(args: CommonArgs) -> Result<()> {
    let spec = args.resolve()?.spec;
    let dict = spec.dictionary()?;
    let op = MeasurementOperator::sample(
        spec.ensemble,
        spec.m,
        spec.n,
        derive_seed(spec.seed, &[stream::OPERATOR]),
    )?;
    let report = coherence_report(&dict, spec.s, Some(&op))?;
    single_row(
        args.out.as_deref(),
        &["n", "s", "m", "basis_phi", "basis_psi", "ensemble", "gamma", "epsilon_bound", "vartheta"],
        vec![
            spec.n.to_string(),
            spec.s.to_string(),
            spec.m.to_string(),
            spec.basis_phi.name().to_string(),
            spec.basis_psi.name().to_string(),
            spec.ensemble.name().to_string(),
            report.gamma.to_string(),
            report.epsilon_bound.to_string(),
            report.vartheta.map(|v| v.to_string()).unwrap_or_default(),
        ],
    )
}

fn rscrss(args: RscArgs) -> Result<()> {
    let spec = args.common.resolve()?.spec;
    let level = args.level.unwrap_or(6 * spec.s);
    let (signal, problem) = build_instance(&spec)?;
    let est = estimate_rsc_rss(
        &problem,
        &signal.t(),
        level,
        args.probes,
        derive_seed(spec.seed, &[stream::DIAGNOSTICS]),
    )?;
    single_row(
        args.common.out.as_deref(),
        &["n", "s", "m", "link", "sparsity_level", "supports", "m_lower", "m_upper", "condition"],
        vec![
            spec.n.to_string(),
            spec.s.to_string(),
            spec.m.to_string(),
            spec.link.name().to_string(),
            est.sparsity_level.to_string(),
            est.supports_probed.to_string(),
            est.m_lower.to_string(),
            est.m_upper.to_string(),
            est.condition().to_string(),
        ],
    )
}

fn linkconst(args: LinkConstArgs) -> Result<()> {
    let common = CommonArgs {
        config: args.config,
        seed: args.seed,
        link: args.link,
        link_radius: args.link_radius,
        ..CommonArgs::default()
    };
    let spec = common.resolve()?.spec;
    let link = Link::with_radius(spec.link, spec.link_radius)?;
    let c = link_constants(&link, args.samples, spec.seed)?;
    single_row(
        args.out.as_deref(),
        &["link", "samples", "mu", "sigma2", "eta2"],
        vec![
            spec.link.name().to_string(),
            c.trials.to_string(),
            c.mu.to_string(),
            c.sigma2.to_string(),
            c.eta2.to_string(),
        ],
    )
}
