//! The iterated local search main loop, its configuration and run traces,
//! and seeded batches of independent runs.

use std::io::{self, Write};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::acceptance::{accept, Outcome, Temperature};
use crate::bandit::{OperatorStats, Rewards};
use crate::error::{Error, Result};
use crate::instance::{Instance, NeighborList};
use crate::local_search::{LocalSearch, LocalSearchConfig, MoveFrequency};
use crate::perturbation::{perturb, Insertion, InsertionContext, Removal, RemovalContext};
use crate::single_tour::{single_tour_improve, TourImprover};
use crate::solution::{greedy_random_init, validate, Solution, EPS};

/// When a run ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    Iterations(u64),
    Millis(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub i_max: u64,
    pub p_accept: f64,
    pub alpha: usize,
    pub removal: RemovalContext,
    pub insertion: InsertionContext,
    pub epsilon: f64,
    pub invert_epsilon: bool,
    pub lambda: f64,
    pub rewards: Rewards,
    pub segment: u64,
    pub i_threshold: u64,
    pub tf: f64,
    pub w: f64,
    pub stop: StopRule,
    /// Also stop once the best makespan is at most this value.
    pub target: Option<f64>,
    pub seed: u64,
    pub local_search: LocalSearchConfig,
    pub tour_improver: TourImprover,
    pub record_trace: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            i_max: 40_000,
            p_accept: 0.7,
            alpha: 10,
            removal: RemovalContext::default(),
            insertion: InsertionContext::default(),
            epsilon: 0.01,
            invert_epsilon: false,
            lambda: 0.5,
            rewards: Rewards::default(),
            segment: 100,
            i_threshold: 1000,
            tf: 1e-4,
            w: 0.35,
            stop: StopRule::Iterations(10_000),
            target: None,
            seed: 1,
            local_search: LocalSearchConfig::default(),
            tour_improver: TourImprover::default(),
            record_trace: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.alpha == 0 {
            return bad("alpha must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.removal.l) {
            return bad(format!("l must lie in [0, 1), got {}", self.removal.l));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must lie in [0, 1], got {}", self.epsilon));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad(format!("lambda must lie in [0, 1], got {}", self.lambda));
        }
        if !(0.0..1.0).contains(&self.insertion.beta) {
            return bad(format!("beta must lie in [0, 1), got {}", self.insertion.beta));
        }
        if self.insertion.k < 2 {
            return bad("regret depth must be at least 2".into());
        }
        if self.segment == 0 || self.i_max == 0 {
            return bad("segment length and I_max must be positive".into());
        }
        Ok(())
    }
}

/// One row per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: u64,
    /// Iteration counter within the current restart round.
    pub round_iter: u64,
    pub f_phi: f64,
    pub f_local: f64,
    pub f_best: f64,
    pub removal: Removal,
    pub insertion: Insertion,
    pub outcome: Outcome,
    pub temperature: f64,
    pub ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub const HEADER: &'static str =
        "iter,f_phi,f_local,f_best,removal_op,insertion_op,outcome,temperature,ms";

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::HEADER)?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:.3}",
                r.iter,
                r.f_phi,
                r.f_local,
                r.f_best,
                r.removal,
                r.insertion,
                r.outcome.as_str(),
                r.temperature,
                r.ms
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Solution,
    pub trace: RunTrace,
    pub iterations: u64,
    pub restarts: u64,
    pub single_tour_calls: u64,
    pub elapsed: Duration,
    /// Time at which the final best solution was found.
    pub time_to_best: Duration,
    pub removal_stats: OperatorStats,
    pub insertion_stats: OperatorStats,
    pub seed: u64,
}

/// Runs the search on `inst` with `m` salesmen.
pub fn run_mils(inst: &Instance, m: usize, config: &SearchConfig) -> Result<RunResult> {
    config.validate()?;
    let n = inst.num_cities();
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if m > n {
        return Err(Error::TooManySalesmen { m, n });
    }
    let start = Instant::now();
    let nb = NeighborList::build(inst, config.alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut freq = MoveFrequency::new(n);
    let mut ls = LocalSearch::new(n, config.local_search);
    let mut removal_stats = OperatorStats::new(Removal::ALL.len(), config.lambda, config.rewards);
    let mut insertion_stats =
        OperatorStats::new(Insertion::ALL.len(), config.lambda, config.rewards);

    let mut phi = greedy_random_init(inst, m, &nb, &mut rng)?;
    let mut local = phi.clone();
    let mut best = phi.clone();
    let f_init = phi.makespan();
    let mut temp = if f_init > 0.0 {
        Temperature::new(f_init, config.w, config.p_accept, config.tf, config.i_max)?
    } else {
        Temperature::from_parts(config.tf, config.tf, 1.0)
    };

    let mut trace = RunTrace::default();
    let mut iter: u64 = 0;
    let mut total: u64 = 0;
    let mut restarts = 0;
    let mut single_tour_calls = 0;
    let mut time_to_best = start.elapsed();
    // operator pair whose perturbation produced the solution now being judged
    let mut pending: Option<(usize, usize)> = None;

    let done = |total: u64, best: &Solution| -> bool {
        if config.target.is_some_and(|t| best.makespan() <= t + EPS) {
            return true;
        }
        match config.stop {
            StopRule::Iterations(k) => total >= k,
            StopRule::Millis(ms) => start.elapsed() >= Duration::from_millis(ms),
        }
    };

    while !done(total, &best) {
        ls.run(inst, &nb, &mut phi, &mut freq);
        if phi.makespan() < best.makespan() - EPS && iter >= config.i_threshold {
            single_tour_improve(
                inst,
                &nb,
                &mut phi,
                &config.tour_improver,
                &mut ls,
                &mut freq,
            );
            single_tour_calls += 1;
        }
        let f_phi = phi.makespan();
        let t_now = temp.current();
        let outcome = accept(&mut phi, &mut local, &mut best, t_now, &mut rng);
        if outcome == Outcome::NewGlobalBest {
            time_to_best = start.elapsed();
        }
        if let Some((d, r)) = pending.take() {
            removal_stats.record(d, outcome);
            insertion_stats.record(r, outcome);
        }

        let d = removal_stats.select(config.epsilon, config.invert_epsilon, &mut rng);
        let r = insertion_stats.select(config.epsilon, config.invert_epsilon, &mut rng);
        perturb(
            inst,
            &nb,
            &mut phi,
            Removal::ALL[d],
            Insertion::ALL[r],
            &config.removal,
            &config.insertion,
            &freq,
            &mut rng,
        );
        pending = Some((d, r));

        if config.record_trace {
            trace.rows.push(TraceRow {
                iter: total,
                round_iter: iter,
                f_phi,
                f_local: local.makespan(),
                f_best: best.makespan(),
                removal: Removal::ALL[d],
                insertion: Insertion::ALL[r],
                outcome,
                temperature: t_now,
                ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }

        if iter > config.i_max {
            phi = greedy_random_init(inst, m, &nb, &mut rng)?;
            local = phi.clone();
            iter = 0;
            temp.reset();
            pending = None;
            freq.halve();
            restarts += 1;
        } else {
            iter += 1;
            temp.step();
        }
        total += 1;
        if total % config.segment == 0 {
            removal_stats.end_segment();
            insertion_stats.end_segment();
        }
        if cfg!(debug_assertions) || total % 1000 == 0 {
            debug_assert!(validate(inst, m, &phi).is_ok(), "infeasible current solution");
            if let Err(v) = validate(inst, m, &phi) {
                return Err(Error::InvalidArgument(format!(
                    "internal error: infeasible solution at iteration {total}: {}",
                    v[0]
                )));
            }
        }
    }

    Ok(RunResult {
        best,
        trace,
        iterations: total,
        restarts,
        single_tour_calls,
        elapsed: start.elapsed(),
        time_to_best,
        removal_stats,
        insertion_stats,
        seed: config.seed,
    })
}

/// Outcome of several independent runs.
#[derive(Debug, Clone)]
pub struct BatchSummary {
    pub best: f64,
    pub average: f64,
    pub values: Vec<f64>,
    pub best_solution: Solution,
    pub seeds: Vec<u64>,
    pub run_millis: Vec<f64>,
    pub iterations: Vec<u64>,
    pub wall: Duration,
}

/// Worker count for batches: `MILS_THREADS` if set, else all cores.
pub fn thread_count() -> usize {
    std::env::var("MILS_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&k| k > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// `runs` independent runs with seeds `config.seed + i`, fanned out over a
/// worker pool. Results are reported in seed order.
pub fn run_batch(
    inst: &Instance,
    m: usize,
    config: &SearchConfig,
    runs: usize,
) -> Result<BatchSummary> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count().min(runs))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<Result<RunResult>> = pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|i| {
                let mut cfg = config.clone();
                cfg.seed = config.seed.wrapping_add(i as u64);
                cfg.record_trace = false;
                run_mils(inst, m, &cfg)
            })
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = results.iter().map(|r| r.best.makespan()).collect();
    let best_idx = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .unwrap();
    Ok(BatchSummary {
        best: values[best_idx],
        average: values.iter().sum::<f64>() / values.len() as f64,
        best_solution: results[best_idx].best.clone(),
        seeds: results.iter().map(|r| r.seed).collect(),
        run_millis: results.iter().map(|r| r.elapsed.as_secs_f64() * 1e3).collect(),
        iterations: results.iter().map(|r| r.iterations).collect(),
        values,
        wall: start.elapsed(),
    })
}
