//! `matchkit`: generate, solve and verify matching markets, and run the
//! synthetic-market experiment.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matchkit::experiment::{
    aggregate, aggregate_csv, bench_csv, fitted_exponent, run_bench, run_experiment, ExperimentSpec, BENCH_FACTORS,
};
use matchkit::format::{read_json, read_market, write_json, write_text, FormatError, MatchingFile, NamedMarket};
use matchkit::solve::{solve, trace_csv, verify, Algorithm, Engine, SolveOptions};
use matchkit_core::{generate_market, Error, ProposalOrder, SynthParams};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "matchkit", version, about = "Stable matching for two-, three- and n-sided markets")]
struct Cli {
    /// Machine-readable output and error messages.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic advisor/student/co-advisor market.
    Generate {
        #[command(flatten)]
        params: ParamArgs,
        /// Output market file (standard output if absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve a market file.
    Solve {
        market: PathBuf,
        #[arg(long, value_enum, default_value_t = AlgoArg::Phd)]
        algo: AlgoArg,
        #[command(flatten)]
        engine: EngineArgs,
        /// Output matching file (standard output if absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the per-iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check a matching for blocking pairs, triples or tuples; exits 0 iff
    /// the matching is valid and stable.
    Verify { market: PathBuf, matching: PathBuf },
    /// Run algorithms over many generated markets and average their traces.
    Experiment {
        #[command(flatten)]
        params: ParamArgs,
        /// Number of consecutive seeds, starting at the base seed.
        #[arg(long, default_value_t = 40)]
        seeds: u64,
        /// Comma-separated algorithms.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [AlgoArg::Phd, AlgoArg::Baseline])]
        algo: Vec<AlgoArg>,
        #[command(flatten)]
        engine: EngineArgs,
        /// Output directory for aggregate and per-seed CSVs.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Count matcher operations over a ladder of market sizes.
    Bench {
        /// Size factors applied to the table3 populations.
        #[arg(long, value_delimiter = ',', default_values_t = BENCH_FACTORS)]
        factors: Vec<f64>,
        /// Number of consecutive seeds per size, starting at the base seed.
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, env = "MATCHKIT_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OrderArg::Sac)]
        propose: OrderArg,
        /// Output CSV (standard output if absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Table3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Phd,
    Baseline,
    #[value(alias = "zhong_bai")]
    ZhongBai,
    PhdRestrict,
    PhdDrop,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Phd => Algorithm::Phd,
            AlgoArg::Baseline => Algorithm::Baseline,
            AlgoArg::ZhongBai => Algorithm::ZhongBai,
            AlgoArg::PhdRestrict => Algorithm::PhdRestrict,
            AlgoArg::PhdDrop => Algorithm::PhdDrop,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Ssc,
    Asc,
    Acs,
    Sac,
}

impl From<OrderArg> for ProposalOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Ssc => ProposalOrder::Ssc,
            OrderArg::Asc => ProposalOrder::Asc,
            OrderArg::Acs => ProposalOrder::Acs,
            OrderArg::Sac => ProposalOrder::Sac,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Gs,
    Mfp,
}

#[derive(Args)]
struct EngineArgs {
    /// Proposing sides: advisor market, then co-advisor market.
    #[arg(long, value_enum, default_value_t = OrderArg::Sac)]
    propose: OrderArg,
    #[arg(long, value_enum, default_value_t = EngineArg::Gs)]
    engine: EngineArg,
    /// Match students with co-advisors first.
    #[arg(long)]
    swap: bool,
    /// Skip counting blocking triples of every iteration.
    #[arg(long)]
    no_blocking: bool,
}

impl EngineArgs {
    fn options(&self) -> SolveOptions {
        let engine = match self.engine {
            EngineArg::Gs => Engine::Gs,
            EngineArg::Mfp => Engine::Mfp,
        };
        SolveOptions { swap_order: self.swap, trace_blocking: !self.no_blocking, ..SolveOptions::new(self.propose.into(), engine) }
    }
}

/// Generator parameters: a preset or a JSON file, then individual overrides.
#[derive(Args)]
struct ParamArgs {
    #[arg(long, value_enum, default_value = "table3")]
    preset: Preset,
    /// JSON file with generator parameters; missing fields keep the preset.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Base seed.
    #[arg(long, env = "MATCHKIT_SEED")]
    seed: Option<u64>,
    /// Multiply the three population sizes.
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    nb_advisors: Option<usize>,
    #[arg(long)]
    nb_students: Option<usize>,
    #[arg(long)]
    nb_coadvisors: Option<usize>,
    #[arg(long)]
    total_nb_fields: Option<usize>,
    #[arg(long)]
    min_choosable_fields: Option<usize>,
    #[arg(long)]
    max_choosable_fields: Option<usize>,
    #[arg(long)]
    random_jitter: Option<f64>,
    #[arg(long)]
    advisor_min_nb_prefs: Option<usize>,
    #[arg(long)]
    advisor_max_nb_prefs: Option<usize>,
    #[arg(long)]
    student_min_nb_prefs_adv: Option<usize>,
    #[arg(long)]
    student_max_nb_prefs_adv: Option<usize>,
    #[arg(long)]
    student_min_nb_prefs_coadv: Option<usize>,
    #[arg(long)]
    student_max_nb_prefs_coadv: Option<usize>,
    #[arg(long)]
    coadvisor_min_nb_prefs: Option<usize>,
    #[arg(long)]
    coadvisor_max_nb_prefs: Option<usize>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<SynthParams, CliError> {
        let mut p = match self.preset {
            Preset::Table3 => SynthParams::table3(),
        };
        if let Some(path) = &self.params {
            // fields absent from the file fall back to the preset
            let mut base = serde_json::to_value(&p).map_err(FormatError::from)?;
            let overrides: serde_json::Map<String, serde_json::Value> = read_json(path)?;
            for (k, v) in overrides {
                base[k] = v;
            }
            p = serde_json::from_value(base).map_err(FormatError::from)?;
        }
        if let Some(f) = self.scale {
            p = p.scaled(f);
        }
        let set = |slot: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.nb_advisors, self.nb_advisors);
        set(&mut p.nb_students, self.nb_students);
        set(&mut p.nb_coadvisors, self.nb_coadvisors);
        set(&mut p.total_nb_fields, self.total_nb_fields);
        set(&mut p.min_choosable_fields, self.min_choosable_fields);
        set(&mut p.max_choosable_fields, self.max_choosable_fields);
        set(&mut p.advisor_min_nb_prefs, self.advisor_min_nb_prefs);
        set(&mut p.advisor_max_nb_prefs, self.advisor_max_nb_prefs);
        set(&mut p.student_min_nb_prefs_adv, self.student_min_nb_prefs_adv);
        set(&mut p.student_max_nb_prefs_adv, self.student_max_nb_prefs_adv);
        set(&mut p.student_min_nb_prefs_coadv, self.student_min_nb_prefs_coadv);
        set(&mut p.student_max_nb_prefs_coadv, self.student_max_nb_prefs_coadv);
        set(&mut p.coadvisor_min_nb_prefs, self.coadvisor_min_nb_prefs);
        set(&mut p.coadvisor_max_nb_prefs, self.coadvisor_max_nb_prefs);
        if let Some(j) = self.random_jitter {
            p.random_jitter = j;
        }
        if let Some(s) = self.seed {
            p.seed = s;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Format(_) => "format",
            CliError::Engine(_) => "engine",
            CliError::Io { .. } => "io",
        }
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

#[derive(Serialize)]
struct SolveSummary {
    algorithm: &'static str,
    iterations: usize,
    complete_matches: usize,
    blocking: Option<u128>,
    proposals: u64,
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Generate { params, output } => {
            let market = generate_market(&params.resolve()?)?;
            write_json(output.as_deref(), &NamedMarket::with_generated_names(market).to_file())?;
        }
        Command::Solve { market, algo, engine, output, trace } => {
            let named = read_market(market)?;
            let algorithm = Algorithm::from(*algo);
            let sol = solve(&named.market, algorithm, &engine.options())?;
            if let Some(path) = trace {
                write_text(Some(path), &trace_csv(&sol.trace))?;
            }
            write_json(output.as_deref(), &named.matching_to_file(&sol.matching))?;
            let summary = SolveSummary {
                algorithm: algorithm.code(),
                iterations: sol.trace.iterations(),
                complete_matches: sol.matching.len(),
                blocking: sol.trace.last().and_then(|r| r.blocking),
                proposals: sol.trace.counters.proposals,
            };
            if cli.json {
                eprintln!("{}", serde_json::to_string(&summary).map_err(FormatError::from)?);
            } else {
                let blocking = summary.blocking.map_or("not counted".to_string(), |b| b.to_string());
                eprintln!(
                    "{}: {} complete matches after {} iterations, blocking {blocking}",
                    summary.algorithm, summary.complete_matches, summary.iterations
                );
            }
        }
        Command::Verify { market, matching } => {
            let named = read_market(market)?;
            let file: MatchingFile = read_json(matching)?;
            let report = verify(&named, &named.matching_from_file(&file)?)?;
            if cli.json {
                write_json(None, &report)?;
            } else {
                print!("{}", report.text());
            }
            return Ok(if report.stable { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Experiment { params, seeds, algo, engine, output } => {
            let template = params.resolve()?;
            let base = template.seed;
            let algorithms: Vec<Algorithm> = algo.iter().map(|&a| a.into()).collect();
            let spec = ExperimentSpec { params: template, seeds: (base..base + seeds).collect(), algorithms, options: engine.options() };
            let runs = run_experiment(&spec)?;
            create_dir(output)?;
            let mut summary = String::from("seed,algorithm,iterations,final_complete_matches,final_blocking_triples\n");
            for r in &runs {
                let name = format!("{}_seed{}.csv", r.algorithm.code(), r.seed);
                write_text(Some(&output.join(name)), &trace_csv(&r.solution.trace))?;
                let last = r.blocking().last().copied().unwrap_or(0);
                summary += &format!(
                    "{},{},{},{},{last}\n",
                    r.seed,
                    r.algorithm.code(),
                    r.solution.trace.iterations(),
                    r.final_complete_matches()
                );
            }
            write_text(Some(&output.join("summary.csv")), &summary)?;
            for &a in &spec.algorithms {
                let rows = aggregate(&runs, a);
                write_text(Some(&output.join(format!("aggregate_{}.csv", a.code()))), &aggregate_csv(&rows))?;
                let mean: f64 = runs.iter().filter(|r| r.algorithm == a).map(|r| r.final_complete_matches() as f64).sum::<f64>()
                    / spec.seeds.len() as f64;
                if !cli.json {
                    eprintln!("{}: mean final complete matches {mean:.2} over {} seeds", a.code(), spec.seeds.len());
                }
            }
        }
        Command::Bench { factors, seeds, seed, propose, output } => {
            let seeds: Vec<u64> = (*seed..seed + seeds).collect();
            let rows = run_bench(factors, &seeds, &SolveOptions::new((*propose).into(), Engine::Gs))?;
            write_text(output.as_deref(), &bench_csv(&rows))?;
            for (engine, name) in [(Engine::Gs, "gs"), (Engine::Mfp, "mfp")] {
                if let Some(e) = fitted_exponent(&rows, engine) {
                    eprintln!("{name}: fitted exponent {e:.3}");
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            if cli.json {
                let report = ErrorReport { error: e.kind(), message: e.to_string() };
                eprintln!("{}", serde_json::to_string(&report).expect("error reports serialize"));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(2)
        }
    }
}
