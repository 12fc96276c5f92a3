//! Command-line front end: argument types, the BKS registry and the
//! `solve`, `bench`, `validate`, `export-lp` and `gen` commands.

pub mod bks;
pub mod commands;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mils_core::driver::{SearchConfig, StopRule};
use mils_core::local_search::{LocalSearchConfig, Strategy};
use mils_core::single_tour::TourImprover;
use mils_core::Metric;

pub use bks::{gap_percent, BksEntry, BksRegistry};

/// A bad flag, path or input file; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Exit status for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(mils_core::Error::Io { .. }) = cause.downcast_ref::<mils_core::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<std::io::Error>() {
            if e.kind() == std::io::ErrorKind::NotFound {
                return 2;
            }
        }
    }
    1
}

/// How long each run may search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// `(n / 100) * 4` minutes.
    Paper,
    Millis(u64),
    Iterations(u64),
}

impl Budget {
    pub fn stop_rule(self, n: usize) -> StopRule {
        match self {
            Budget::Paper => StopRule::Millis(n as u64 * 2400),
            Budget::Millis(ms) => StopRule::Millis(ms),
            Budget::Iterations(k) => StopRule::Iterations(k),
        }
    }
}

impl FromStr for Budget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "paper" {
            return Ok(Budget::Paper);
        }
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| format!("expected `paper`, `ms:<x>` or `iters:<x>`, got `{s}`"))?;
        let value: u64 = value
            .parse()
            .map_err(|_| format!("invalid budget value `{value}`"))?;
        match kind {
            "ms" => Ok(Budget::Millis(value)),
            "iters" => Ok(Budget::Iterations(value)),
            _ => Err(format!("unknown budget kind `{kind}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Best,
    First,
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse::<Metric>().map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "mils", version, about = "Minmax multiple TSP solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and print a JSON summary.
    Solve(SolveArgs),
    /// Run every instance of a manifest and write a result table.
    Bench(BenchArgs),
    /// Check a solution file against an instance.
    Validate(ValidateArgs),
    /// Write the flow model of an instance in CPLEX LP format.
    ExportLp(ExportLpArgs),
    /// Generate a uniform random instance.
    Gen(GenArgs),
}

/// Search settings shared by `solve` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// `paper`, `ms:<millis>` or `iters:<count>` per run.
    #[arg(long, default_value = "iters:10000")]
    pub budget: Budget,
    /// Shorthand for `--budget iters:<count>`.
    #[arg(long)]
    pub iterations: Option<u64>,
    /// Neighbor list width.
    #[arg(long, default_value_t = 10)]
    pub alpha: usize,
    /// Fraction of cities removed per perturbation.
    #[arg(long = "l", default_value_t = 0.15)]
    pub l: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Pick the heaviest operator with probability 1 - epsilon instead.
    #[arg(long)]
    pub invert_epsilon: bool,
    /// Local search move acceptance.
    #[arg(long, value_enum, default_value_t = StrategyArg::Best)]
    pub strategy: StrategyArg,
    /// Distance function override: real, rounded, ceil or att.
    #[arg(long, value_parser = parse_metric)]
    pub metric: Option<Metric>,
    /// `builtin`, or an executable invoked as `<cmd> in.tsp out.tour`.
    #[arg(long, default_value = "builtin")]
    pub tour_improver: String,
    /// Time limit per external tour improvement, in milliseconds.
    #[arg(long, default_value_t = 1000)]
    pub tour_improver_ms: u64,
    /// Stop as soon as the makespan reaches this value.
    #[arg(long)]
    pub target: Option<f64>,
    /// BKS table replacing the built-in one.
    #[arg(long)]
    pub bks: Option<PathBuf>,
}

impl SearchArgs {
    pub fn budget(&self) -> Budget {
        self.iterations.map_or(self.budget, Budget::Iterations)
    }

    pub fn config(&self, n: usize) -> SearchConfig {
        let mut cfg = SearchConfig {
            seed: self.seed,
            alpha: self.alpha,
            epsilon: self.epsilon,
            lambda: self.lambda,
            invert_epsilon: self.invert_epsilon,
            stop: self.budget().stop_rule(n),
            target: self.target,
            local_search: LocalSearchConfig {
                strategy: match self.strategy {
                    StrategyArg::Best => Strategy::BestImprovement,
                    StrategyArg::First => Strategy::FirstImprovement,
                },
                ..LocalSearchConfig::default()
            },
            ..SearchConfig::default()
        };
        cfg.removal.l = self.l;
        let budget = Duration::from_millis(self.tour_improver_ms);
        cfg.tour_improver = if self.tour_improver == "builtin" {
            TourImprover::builtin(self.alpha, budget)
        } else {
            let mut parts = self.tour_improver.split_whitespace();
            let cmd = parts.next().unwrap_or_default().to_string();
            TourImprover::external(cmd, parts.map(str::to_string).collect(), budget)
        };
        cfg
    }

    pub fn registry(&self) -> anyhow::Result<BksRegistry> {
        match &self.bks {
            Some(p) if !p.exists() => Err(usage(format!("BKS file {} not found", p.display()))),
            Some(p) => BksRegistry::from_path(p),
            None => Ok(BksRegistry::embedded()),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// TSPLIB instance; the first node is the depot.
    pub instance: PathBuf,
    /// Number of salesmen.
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Per-iteration CSV trace (single runs only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Where to write the best solution.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Lines of `<instance path> <m>`; relative paths are resolved against
    /// the manifest's directory.
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// CSV destination, stdout by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    pub instance: PathBuf,
    pub solution: PathBuf,
    /// Expected number of tours, defaults to the count in the file header.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_parser = parse_metric)]
    pub metric: Option<Metric>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportLpArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_metric)]
    pub metric: Option<Metric>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000.0)]
    pub width: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budgets() {
        assert_eq!("paper".parse::<Budget>(), Ok(Budget::Paper));
        assert_eq!("ms:250".parse::<Budget>(), Ok(Budget::Millis(250)));
        assert_eq!("iters:0".parse::<Budget>(), Ok(Budget::Iterations(0)));
        assert!("minutes:3".parse::<Budget>().is_err());
        assert!("ms:x".parse::<Budget>().is_err());
        assert_eq!(Budget::Paper.stop_rule(100), StopRule::Millis(240_000));
        assert_eq!(Budget::Paper.stop_rule(51), StopRule::Millis(122_400));
    }

    #[test]
    fn flags_reach_the_config() {
        let cli = Cli::try_parse_from([
            "mils", "solve", "x.tsp", "--m", "3", "--l", "0.2", "--epsilon", "0.5",
            "--invert-epsilon", "--strategy", "first", "--iterations", "7", "--metric", "att",
        ])
        .unwrap();
        let Command::Solve(args) = cli.command else { panic!() };
        assert_eq!(args.search.metric, Some(Metric::Att));
        let cfg = args.search.config(51);
        assert_eq!(cfg.removal.l, 0.2);
        assert_eq!(cfg.epsilon, 0.5);
        assert!(cfg.invert_epsilon);
        assert_eq!(cfg.stop, StopRule::Iterations(7));
        assert_eq!(cfg.local_search.strategy, Strategy::FirstImprovement);
    }

    #[test]
    fn defaults_match_core() {
        let cli = Cli::try_parse_from(["mils", "solve", "x.tsp", "--m", "3"]).unwrap();
        let Command::Solve(args) = cli.command else { panic!() };
        let cfg = args.search.config(51);
        let core = SearchConfig::default();
        assert_eq!(cfg.alpha, core.alpha);
        assert_eq!(cfg.removal, core.removal);
        assert_eq!(cfg.epsilon, core.epsilon);
        assert_eq!(cfg.lambda, core.lambda);
        assert_eq!(cfg.local_search, core.local_search);
    }
}
