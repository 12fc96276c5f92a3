#![allow(dead_code)]

use mils_core::local_search::{evaluate_move, targets_for, Move, MoveKind};
use mils_core::{Instance, Solution};
use rand::seq::SliceRandom;
use rand::Rng;

/// Uniformly shuffled cities cut into `m` nonempty tours.
pub fn random_solution<R: Rng>(inst: &Instance, m: usize, rng: &mut R) -> Solution {
    let n = inst.num_cities();
    let mut cities: Vec<usize> = (1..=n).collect();
    cities.shuffle(rng);
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, n - 1, m - 1)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut tours = Vec::with_capacity(m);
    let mut start = 0;
    for c in cuts {
        tours.push(cities[start..c].to_vec());
        start = c;
    }
    Solution::from_tours(inst, tours).unwrap()
}

/// A random applicable move with `v` drawn from all vertices.
pub fn random_move<R: Rng>(inst: &Instance, sol: &Solution, rng: &mut R) -> Option<Move> {
    let n = inst.num_cities();
    for _ in 0..64 {
        let kind = MoveKind::ALL[rng.gen_range(0..10)];
        let u = rng.gen_range(1..=n);
        let v = rng.gen_range(0..=n);
        let targets = targets_for(sol, kind, u, v);
        if targets.is_empty() {
            continue;
        }
        let t = targets[rng.gen_range(0..targets.len())];
        if let Some(mv) = evaluate_move(inst, sol, kind, u, t) {
            return Some(mv);
        }
    }
    None
}

/// Sum of all tour lengths recomputed from coordinates.
pub fn recomputed_total(inst: &Instance, sol: &Solution) -> f64 {
    sol.tours().iter().map(|t| inst.tour_length(t)).sum()
}

pub fn recomputed_makespan(inst: &Instance, sol: &Solution) -> f64 {
    sol.tours()
        .iter()
        .map(|t| inst.tour_length(t))
        .fold(0.0, f64::max)
}

pub fn sorted_cities(sol: &Solution) -> Vec<usize> {
    let mut all: Vec<usize> = sol.tours().iter().flatten().copied().collect();
    all.sort_unstable();
    all
}
