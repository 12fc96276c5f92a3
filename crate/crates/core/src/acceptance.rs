//! Probabilistic acceptance of perturbed local optima under a geometric
//! cooling schedule.

use rand::Rng;

use crate::error::{Error, Result};
use crate::solution::{Solution, EPS};

/// `T0 = -w·f_init / ln(p_accept)`, so that a move worsening the objective
/// by `w·f_init` is accepted with probability `p_accept` at the start.
pub fn initial_temperature(f_init: f64, w: f64, p_accept: f64) -> Result<f64> {
    if !(p_accept > 0.0 && p_accept < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "p_accept must lie in (0, 1), got {p_accept}"
        )));
    }
    if !(f_init > 0.0 && w > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "f_init and w must be positive, got {f_init} and {w}"
        )));
    }
    Ok(-w * f_init / p_accept.ln())
}

/// Factor `c` with `T0·c^i_max = Tf`.
pub fn cooling_factor(t0: f64, tf: f64, i_max: u64) -> Result<f64> {
    if !(tf > 0.0 && tf < t0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < Tf < T0, got Tf = {tf}, T0 = {t0}"
        )));
    }
    if i_max == 0 {
        return Err(Error::InvalidArgument("I_max must be at least 1".into()));
    }
    Ok((tf / t0).powf(1.0 / i_max as f64))
}

/// Geometric schedule from `T0` down to `Tf`, clamped to `[Tf, T0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Temperature {
    t0: f64,
    tf: f64,
    c: f64,
    steps: u64,
    current: f64,
}

impl Temperature {
    /// A schedule for an initial objective `f_init`. When `T0 <= Tf` the
    /// temperature stays constant at `T0`.
    pub fn new(f_init: f64, w: f64, p_accept: f64, tf: f64, i_max: u64) -> Result<Self> {
        if !(tf > 0.0) {
            return Err(Error::InvalidArgument(format!("Tf must be positive, got {tf}")));
        }
        let t0 = initial_temperature(f_init, w, p_accept)?;
        let c = if t0 > tf {
            cooling_factor(t0, tf, i_max)?
        } else {
            1.0
        };
        Ok(Self::from_parts(t0, tf, c))
    }

    pub fn from_parts(t0: f64, tf: f64, c: f64) -> Self {
        Self {
            t0,
            tf,
            c,
            steps: 0,
            current: t0,
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn factor(&self) -> f64 {
        self.c
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One cooling step: `T ← c·T`, never below `Tf`.
    pub fn step(&mut self) {
        self.steps += 1;
        if self.c < 1.0 {
            let t = self.t0 * self.c.powf(self.steps as f64);
            self.current = t.clamp(self.tf.min(self.t0), self.t0);
        }
    }

    pub fn reset(&mut self) {
        self.steps = 0;
        self.current = self.t0;
    }
}

/// What happened to the candidate solution at one acceptance test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    NewGlobalBest,
    ImprovedLocal,
    Accepted,
    Rejected,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::NewGlobalBest => "global_best",
            Outcome::ImprovedLocal => "improved_local",
            Outcome::Accepted => "accepted",
            Outcome::Rejected => "rejected",
        }
    }
}

/// Probability that a worsening of `delta` is accepted at temperature `t`.
pub fn acceptance_probability(delta: f64, t: f64) -> f64 {
    (-delta / t).exp()
}

/// Acceptance test between the candidate `phi`, the current local optimum
/// `local` and the best solution `best`. On rejection `phi` is reset to
/// `local`.
pub fn accept<R: Rng + ?Sized>(
    phi: &mut Solution,
    local: &mut Solution,
    best: &mut Solution,
    t: f64,
    rng: &mut R,
) -> Outcome {
    let f = phi.makespan();
    if f < best.makespan() - EPS {
        best.clone_from(phi);
        local.clone_from(phi);
        return Outcome::NewGlobalBest;
    }
    if f < local.makespan() - EPS {
        local.clone_from(phi);
        return Outcome::ImprovedLocal;
    }
    let r: f64 = rng.gen();
    if acceptance_probability(f - local.makespan(), t) > r {
        local.clone_from(phi);
        Outcome::Accepted
    } else {
        phi.clone_from(local);
        Outcome::Rejected
    }
}
