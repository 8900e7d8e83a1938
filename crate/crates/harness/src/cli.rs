//! Command-line interface.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anneal_core::dynamics::{certify_steps, default_steps, evolve, success_probability, write_trace_csv};
use anneal_core::instance::{ground_from_table, DEFAULT_DEGENERACY_TOL};
use anneal_core::operators::{is_stoquastic, DEFAULT_LAMBDA, DEFAULT_TOTAL_TIME};
use anneal_core::spectrum::{gap_stats, trace_spectrum_with, TraceOptions, DEFAULT_COARSE_POINTS, DEFAULT_LEVELS};
use anneal_core::{
    generate_instance, parse_instance, serialize_instance, AnnealSpec, AnnealingHamiltonian, Driver, DriverKind,
    Gauge, ProblemInstance,
};
use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::export::{full_report, summary_text, write_report};
use crate::records::{canonical_sort, read_records};
use crate::runner::run_ensemble_with;
use crate::seeds::derive_seed;

#[derive(Parser, Debug)]
#[command(name = "anneal", version, about = "Quantum annealing with stoquastic and nonstoquastic drivers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write random instances as JSON lines.
    Gen(GenArgs),
    /// Run an ensemble configuration, or a single instance with --driver.
    Run(RunArgs),
    /// Trace the low spectrum of one instance and driver.
    Spectrum(SpectrumArgs),
    /// Check the off-diagonal sign condition over a schedule grid.
    StoqCheck(StoqArgs),
    /// Aggregate a record file into a report and CSV tables.
    Report(ReportArgs),
    /// Certify an integrator step count by step doubling.
    Certify(CertifyArgs),
    /// Print a built-in configuration profile.
    Config {
        #[arg(long, default_value = "desk")]
        profile: String,
    },
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Explicit disorder seeds, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["base", "count"])]
    seeds: Vec<u64>,
    /// Derive `count` seeds from this base seed.
    #[arg(long)]
    base: Option<u64>,
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Instance JSON file.
    #[arg(long, conflicts_with_all = ["n", "seed"])]
    instance: Option<PathBuf>,
    /// Generate the instance from size and seed instead.
    #[arg(long, requires = "seed")]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    seed: Option<u64>,
}

impl InstanceArgs {
    fn load(&self) -> Result<ProblemInstance> {
        match (&self.instance, self.n, self.seed) {
            (Some(path), _, _) => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                Ok(parse_instance(&text)?)
            }
            (None, Some(n), Some(seed)) => Ok(generate_instance(n, seed)?),
            _ => Err(HarnessError::Usage("give --instance FILE or --n N --seed S".into())),
        }
    }
}

#[derive(Args, Debug)]
struct DriverArgs {
    /// One of 0, F, A, M.
    #[arg(long)]
    driver: Option<DriverKind>,
    #[arg(long, default_value_t = 0)]
    mixed_seed: u64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, default_value_t = DEFAULT_TOTAL_TIME)]
    total_time: f64,
}

impl DriverArgs {
    fn spec(&self, n: usize) -> Result<AnnealSpec> {
        let kind = self
            .driver
            .ok_or_else(|| HarnessError::Usage("--driver is required".into()))?;
        Ok(AnnealSpec::new(Driver::from_kind(kind, n, self.mixed_seed), self.lambda, self.total_time)?)
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Configuration JSON file.
    #[arg(long, conflicts_with = "profile")]
    config: Option<PathBuf>,
    /// Built-in profile: desk or paper.
    #[arg(long)]
    profile: Option<String>,
    /// Overrides the configured output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads; ANNEAL_WORKERS takes precedence when set.
    #[arg(long)]
    workers: Option<usize>,
    /// Execute at most this many pending runs.
    #[arg(long)]
    limit: Option<usize>,
    /// Write the report next to the records when done.
    #[arg(long)]
    report: bool,
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    driver: DriverArgs,
    /// Integrator steps for a single run (default 200 per unit time).
    #[arg(long)]
    steps: Option<usize>,
    /// Write the norm and energy trace of a single run as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    driver: DriverArgs,
    #[arg(long, default_value_t = DEFAULT_COARSE_POINTS)]
    coarse: usize,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
    #[arg(long, default_value_t = 0.0)]
    prominence: f64,
    /// Write the trace as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StoqArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    driver: DriverArgs,
    /// Per-site gauge signs such as "--+-"; defaults to all minus.
    #[arg(long, allow_hyphen_values = true)]
    gauge: Option<String>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])]
    taus: Vec<f64>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// A records.jsonl file written by `run`.
    #[arg(long)]
    records: PathBuf,
    /// Directory for report.json and the CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    driver: DriverArgs,
    #[arg(long, default_value_t = 5000)]
    start: usize,
    #[arg(long, default_value_t = 160_000)]
    max: usize,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| HarnessError::io(p, e))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn io_err(path: &Option<PathBuf>) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::io(path.clone().unwrap_or_else(|| "<stdout>".into()), e)
}

fn gen(args: &GenArgs) -> Result<()> {
    let seeds: Vec<u64> = match args.base {
        Some(base) => (0..args.count).map(|i| derive_seed(base, args.n, i)).collect(),
        None if !args.seeds.is_empty() => args.seeds.clone(),
        None => return Err(HarnessError::Usage("give --seeds or --base".into())),
    };
    let mut out = output(&args.out)?;
    for seed in seeds {
        let inst = generate_instance(args.n, seed)?;
        writeln!(out, "{}", serialize_instance(&inst)).map_err(io_err(&args.out))?;
    }
    out.flush().map_err(io_err(&args.out))
}

fn run(args: &RunArgs) -> Result<()> {
    if args.driver.driver.is_some() {
        return run_single(args);
    }
    let mut config = match (&args.config, &args.profile) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::profile(name)?,
        (None, None) => return Err(HarnessError::Usage("give --config, --profile or --driver".into())),
    };
    if let Some(dir) = &args.output {
        config.output_dir = dir.clone();
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    let total = config.sizes.len() * config.instances * config.drivers.len();
    let mut done = 0usize;
    let summary = run_ensemble_with(&config, args.limit, |r| {
        done += 1;
        if done.is_multiple_of(100) {
            eprintln!("{done} runs written (last: n={} seed={} {})", r.n, r.seed, r.driver);
        }
    })?;
    eprintln!(
        "planned {total}, already present {}, executed {}, failed {}, workers {}",
        summary.skipped, summary.executed, summary.failed, summary.workers
    );
    println!("{}", summary.records_path.display());
    if args.report {
        let mut records = read_records(&summary.records_path)?;
        canonical_sort(&mut records);
        let report = full_report(&records)?;
        write_report(&records, &report, &config.output_dir)?;
        print!("{}", summary_text(&report));
    }
    Ok(())
}

fn run_single(args: &RunArgs) -> Result<()> {
    let inst = args.instance.load()?;
    let spec = args.driver.spec(inst.n())?;
    let steps = args.steps.unwrap_or_else(|| default_steps(spec.total_time));
    let ham = AnnealingHamiltonian::new(&inst, &spec)?;
    let ground = ground_from_table(ham.problem_diagonal(), DEFAULT_DEGENERACY_TOL);
    let every = args.trace.as_ref().map(|_| (steps / 1000).max(1));
    let (evolution, trace) = evolve(&ham, steps, every)?;
    if let Some(path) = &args.trace {
        let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        write_trace_csv(&trace, BufWriter::new(file)).map_err(|e| HarnessError::io(path, e))?;
    }
    let p = success_probability(&evolution.state, &ground)?;
    println!(
        "{}",
        serde_json::json!({
            "n": inst.n(),
            "seed": inst.seed(),
            "driver": spec.driver.kind(),
            "steps": steps,
            "success_probability": p,
            "norm_drift": evolution.norm_drift,
            "ground_energy": ground.energy,
            "degeneracy": ground.degeneracy(),
        })
    );
    if !(evolution.norm_drift <= anneal_core::dynamics::NORM_DRIFT_TOL) {
        return Err(anneal_core::AnnealError::Convergence {
            drift: evolution.norm_drift,
            steps,
        }
        .into());
    }
    Ok(())
}

fn spectrum(args: &SpectrumArgs) -> Result<()> {
    let inst = args.instance.load()?;
    let spec = args.driver.spec(inst.n())?;
    let ham = AnnealingHamiltonian::new(&inst, &spec)?;
    let options = TraceOptions {
        coarse_points: args.coarse,
        levels: args.levels,
        ..TraceOptions::default()
    };
    let trace = trace_spectrum_with(&ham, &options)?;
    if let Some(path) = &args.out {
        let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        trace.write_csv(BufWriter::new(file)).map_err(|e| HarnessError::io(path, e))?;
    }
    if args.levels >= 2 {
        let stats = gap_stats(&trace, args.prominence)?;
        println!("{}", serde_json::to_string(&stats).expect("stats serialize"));
    }
    Ok(())
}

fn stoq_check(args: &StoqArgs) -> Result<()> {
    let inst = args.instance.load()?;
    let spec = args.driver.spec(inst.n())?;
    let gauge: Gauge = match &args.gauge {
        Some(text) => text.parse()?,
        None => Gauge::uniform(inst.n(), -1),
    };
    println!("tau,stoquastic,witness_row,witness_col,witness_value");
    for &tau in &args.taus {
        let verdict = is_stoquastic(tau, &inst, &spec, &gauge)?;
        match verdict.witness {
            Some((r, c, v)) => println!("{tau},false,{r},{c},{v}"),
            None => println!("{tau},true,,,"),
        }
    }
    Ok(())
}

fn report(args: &ReportArgs) -> Result<()> {
    let mut records = read_records(&args.records)?;
    canonical_sort(&mut records);
    let report = full_report(&records)?;
    if let Some(dir) = &args.out {
        write_report(&records, &report, dir)?;
    }
    print!("{}", summary_text(&report));
    Ok(())
}

fn certify(args: &CertifyArgs) -> Result<()> {
    let inst = args.instance.load()?;
    let spec = args.driver.spec(inst.n())?;
    let cert = certify_steps(&inst, &spec, args.start, args.max)?;
    println!("steps,success_probability,norm_drift,flagged");
    for row in &cert.rows {
        println!("{},{},{},{}", row.steps, row.success_probability, row.norm_drift, row.flagged);
    }
    println!("certified,{}", cert.steps);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(&a),
        Command::Run(a) => run(&a),
        Command::Spectrum(a) => spectrum(&a),
        Command::StoqCheck(a) => stoq_check(&a),
        Command::Report(a) => report(&a),
        Command::Certify(a) => certify(&a),
        Command::Config { profile } => {
            println!("{}", ExperimentConfig::profile(&profile)?.to_json());
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
