//! Multi-start iterated local search for the minmax multiple traveling
//! salesman problem.

pub mod acceptance;
pub mod bandit;
pub mod driver;
pub mod error;
pub mod exact;
pub mod instance;
pub mod local_search;
pub mod perturbation;
pub mod single_tour;
pub mod solution;

pub use driver::{run_batch, run_mils, BatchSummary, RunResult, RunTrace, SearchConfig, StopRule};
pub use error::{Error, ParseError, Result};
pub use instance::{Instance, Metric, NeighborList, Point, DEPOT};
pub use solution::{
    greedy_random_init, objective, validate, validate_tours, Solution, SolutionFile, Violation,
};
