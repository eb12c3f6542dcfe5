//! Seeded experiments over generated markets, and operation-count benchmarks.

use std::fmt::Write as _;

use matchkit_core::{generate_market, Error, SynthParams};
use rayon::prelude::*;

use crate::solve::{solve, Algorithm, Engine, Solution, SolveOptions};

/// Which algorithms run on which generated markets.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    /// Template; its seed is replaced by each entry of `seeds`.
    pub params: SynthParams,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub options: SolveOptions,
}

impl ExperimentSpec {
    /// Every algorithm of `algorithms` on the Table-3 markets of seeds 1..=40.
    pub fn table3(algorithms: Vec<Algorithm>) -> Self {
        ExperimentSpec { params: SynthParams::table3(), seeds: (1..=40).collect(), algorithms, options: SolveOptions::default() }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidParams("an experiment needs at least one seed".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParams("an experiment needs at least one algorithm".into()));
        }
        self.params.validate()
    }
}

/// One algorithm on one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub solution: Solution,
}

impl SeedRun {
    pub fn complete_matches(&self) -> Vec<usize> {
        self.solution.trace.complete_matches()
    }

    pub fn blocking(&self) -> Vec<u128> {
        self.solution.trace.records.iter().map(|r| r.blocking.unwrap_or(0)).collect()
    }

    pub fn final_complete_matches(&self) -> usize {
        self.solution.matching.len()
    }
}

/// Runs every seed in parallel; results are sorted by seed, then algorithm.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<SeedRun>, Error> {
    spec.validate()?;
    let per_seed: Vec<Vec<SeedRun>> = spec
        .seeds
        .par_iter()
        .map(|&seed| {
            let market = generate_market(&spec.params.clone().with_seed(seed))?;
            spec.algorithms
                .iter()
                .map(|&algorithm| Ok(SeedRun { seed, algorithm, solution: solve(&market, algorithm, &spec.options)? }))
                .collect::<Result<Vec<_>, Error>>()
        })
        .collect::<Result<_, Error>>()?;
    let mut runs: Vec<SeedRun> = per_seed.into_iter().flatten().collect();
    runs.sort_by_key(|r| (r.seed, r.algorithm));
    Ok(runs)
}

/// Per-iteration means over the runs that reached the iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub iteration: usize,
    pub n_runs: usize,
    pub mean_complete_matches: f64,
    pub mean_blocking_triples: f64,
}

pub const AGGREGATE_HEADER: &str = "iteration,n_runs,mean_complete_matches,mean_blocking_triples";

/// Aggregates the runs of one algorithm.
pub fn aggregate(runs: &[SeedRun], algorithm: Algorithm) -> Vec<AggregateRow> {
    let runs: Vec<&SeedRun> = runs.iter().filter(|r| r.algorithm == algorithm).collect();
    let depth = runs.iter().map(|r| r.solution.trace.records.len()).max().unwrap_or(0);
    (0..depth)
        .map(|t| {
            let reached: Vec<_> = runs.iter().filter_map(|r| r.solution.trace.records.get(t)).collect();
            let n = reached.len() as f64;
            AggregateRow {
                iteration: t + 1,
                n_runs: reached.len(),
                mean_complete_matches: reached.iter().map(|r| r.complete_matches as f64).sum::<f64>() / n,
                mean_blocking_triples: reached.iter().map(|r| r.blocking.unwrap_or(0) as f64).sum::<f64>() / n,
            }
        })
        .collect()
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{},{},{},{}", r.iteration, r.n_runs, r.mean_complete_matches, r.mean_blocking_triples)
            .expect("writing to a string");
    }
    out
}

/// Operation counts of the removal loop on one market size and engine.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub factor: f64,
    pub agents: usize,
    pub engine: Engine,
    pub seeds: usize,
    pub mean_iterations: f64,
    pub proposals: u64,
    pub self_matches: u64,
    pub insertions: u64,
}

impl BenchRow {
    /// Counted matcher steps: proposals plus offers to oneself.
    pub fn steps(&self) -> u64 {
        self.proposals + self.self_matches
    }
}

pub const BENCH_FACTORS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

pub const BENCH_HEADER: &str = "factor,agents,engine,seeds,mean_iterations,proposals,self_matches,insertions,steps";

/// Counts for every factor of `factors` applied to the Table-3 sizes, with
/// both engines, summed over `seeds`.
pub fn run_bench(factors: &[f64], seeds: &[u64], options: &SolveOptions) -> Result<Vec<BenchRow>, Error> {
    let cells: Vec<(f64, Engine)> = factors.iter().flat_map(|&f| [(f, Engine::Gs), (f, Engine::Mfp)]).collect();
    cells
        .par_iter()
        .map(|&(factor, engine)| {
            let params = SynthParams::table3().scaled(factor);
            let opts = SolveOptions { engine, trace_blocking: false, ..*options };
            let mut row = BenchRow {
                factor,
                agents: params.nb_advisors + params.nb_students + params.nb_coadvisors,
                engine,
                seeds: seeds.len(),
                mean_iterations: 0.0,
                proposals: 0,
                self_matches: 0,
                insertions: 0,
            };
            for &seed in seeds {
                let market = generate_market(&params.clone().with_seed(seed))?;
                let sol = solve(&market, Algorithm::Phd, &opts)?;
                let c = sol.trace.counters;
                row.proposals += c.proposals;
                row.self_matches += c.self_matches;
                row.insertions += c.insertions;
                row.mean_iterations += sol.trace.iterations() as f64;
            }
            row.mean_iterations /= seeds.len().max(1) as f64;
            Ok(row)
        })
        .collect()
}

/// Least-squares slope of log(steps) against log(agents) for one engine.
pub fn fitted_exponent(rows: &[BenchRow], engine: Engine) -> Option<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.engine == engine && r.steps() > 0)
        .map(|r| ((r.agents as f64).ln(), (r.steps() as f64).ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (mx, my) = (points.iter().map(|p| p.0).sum::<f64>() / n, points.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for r in rows {
        let engine = match r.engine {
            Engine::Gs => "gs",
            Engine::Mfp => "mfp",
        };
        writeln!(
            out,
            "{},{},{engine},{},{},{},{},{},{}",
            r.factor,
            r.agents,
            r.seeds,
            r.mean_iterations,
            r.proposals,
            r.self_matches,
            r.insertions,
            r.steps()
        )
        .expect("writing to a string");
    }
    out
}
