//! ε-greedy operator selection with segment-wise adaptive weights.

use rand::Rng;
use serde::Serialize;

use crate::acceptance::Outcome;

/// Reward added to an operator's score per acceptance outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rewards {
    pub global_best: f64,
    pub improved_local: f64,
    pub accepted: f64,
}

impl Default for Rewards {
    fn default() -> Self {
        Self {
            global_best: 3.0,
            improved_local: 5.0,
            accepted: 10.0,
        }
    }
}

impl Rewards {
    pub fn of(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::NewGlobalBest => self.global_best,
            Outcome::ImprovedLocal => self.improved_local,
            Outcome::Accepted => self.accepted,
            Outcome::Rejected => 0.0,
        }
    }
}

/// Weights, scores and usage counts of one operator family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorStats {
    weights: Vec<f64>,
    scores: Vec<f64>,
    uses: Vec<u64>,
    pub lambda: f64,
    pub rewards: Rewards,
}

impl OperatorStats {
    pub fn new(arms: usize, lambda: f64, rewards: Rewards) -> Self {
        assert!(arms > 0, "at least one operator");
        Self {
            weights: vec![1.0 / arms as f64; arms],
            scores: vec![0.0; arms],
            uses: vec![0; arms],
            lambda,
            rewards,
        }
    }

    pub fn arms(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn uses(&self) -> &[u64] {
        &self.uses
    }

    /// Index of the largest weight, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }

    /// With probability `epsilon` the heaviest operator, otherwise a
    /// uniformly random one; `invert` swaps the two branches.
    pub fn select<R: Rng + ?Sized>(&self, epsilon: f64, invert: bool, rng: &mut R) -> usize {
        let r: f64 = rng.gen();
        let greedy = (r < epsilon) != invert;
        if greedy {
            self.argmax()
        } else {
            rng.gen_range(0..self.arms())
        }
    }

    pub fn record(&mut self, op: usize, outcome: Outcome) {
        self.uses[op] += 1;
        self.scores[op] += self.rewards.of(outcome);
    }

    /// Folds the segment's mean scores into the weights, renormalizes, and
    /// clears scores and counts.
    pub fn end_segment(&mut self) {
        for i in 0..self.arms() {
            if self.uses[i] > 0 {
                let mean = self.scores[i] / self.uses[i] as f64;
                self.weights[i] = (1.0 - self.lambda) * self.weights[i] + self.lambda * mean;
            }
        }
        let sum: f64 = self.weights.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            self.weights.iter_mut().for_each(|w| *w /= sum);
        } else {
            let k = self.arms() as f64;
            self.weights.iter_mut().for_each(|w| *w = 1.0 / k);
        }
        self.scores.iter_mut().for_each(|s| *s = 0.0);
        self.uses.iter_mut().for_each(|u| *u = 0);
    }

    pub fn set_weights(&mut self, weights: &[f64]) {
        assert_eq!(weights.len(), self.arms());
        self.weights.copy_from_slice(weights);
    }
}
