//! Ruin-and-recreate perturbation: five removal and three insertion
//! operators.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::instance::{Instance, NeighborList, DEPOT};
use crate::local_search::MoveFrequency;
use crate::solution::{Solution, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Removal {
    Shaw,
    Random,
    Cross,
    Worst,
    Information,
}

impl Removal {
    pub const ALL: [Removal; 5] = [
        Removal::Shaw,
        Removal::Random,
        Removal::Cross,
        Removal::Worst,
        Removal::Information,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Removal::Shaw => "shaw",
            Removal::Random => "random",
            Removal::Cross => "cross",
            Removal::Worst => "worst",
            Removal::Information => "information",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Insertion {
    Greedy,
    Blink,
    Regret,
}

impl Insertion {
    pub const ALL: [Insertion; 3] = [Insertion::Greedy, Insertion::Blink, Insertion::Regret];

    pub fn as_str(self) -> &'static str {
        match self {
            Insertion::Greedy => "greedy",
            Insertion::Blink => "blink",
            Insertion::Regret => "regret",
        }
    }
}

impl fmt::Display for Removal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Insertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Removal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Removal::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown removal operator `{s}`"))
    }
}

impl FromStr for Insertion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Insertion::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown insertion operator `{s}`"))
    }
}

/// Removal parameters: the removed fraction `l` and the per-operator
/// determinism exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemovalContext {
    pub l: f64,
    pub gamma_shaw: f64,
    pub gamma_cross: f64,
    pub gamma_worst: f64,
    pub gamma_information: f64,
}

impl Default for RemovalContext {
    fn default() -> Self {
        Self {
            l: 0.15,
            gamma_shaw: 6.0,
            gamma_cross: 6.0,
            gamma_worst: 3.0,
            gamma_information: 6.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InsertionContext {
    pub beta: f64,
    pub k: usize,
}

impl Default for InsertionContext {
    fn default() -> Self {
        Self { beta: 0.01, k: 3 }
    }
}

/// `⌊l·n⌋`.
pub fn removal_count(l: f64, n: usize) -> usize {
    (l * n as f64 + 1e-9).floor().max(0.0) as usize
}

/// Index `⌊y^γ·len⌋` of a biased pick from a list of length `len`.
pub fn biased_index(y: f64, gamma: f64, len: usize) -> usize {
    ((y.powf(gamma) * len as f64).floor() as usize).min(len.saturating_sub(1))
}

fn biased_pick<R: Rng + ?Sized>(gamma: f64, len: usize, rng: &mut R) -> usize {
    biased_index(rng.gen::<f64>(), gamma, len)
}

/// A city may be removed unless it is the only city of its tour.
fn removable(sol: &Solution, c: usize) -> bool {
    sol.tour_of(c).is_some_and(|t| sol.tour(t).len() > 1)
}

fn target(ctx: &RemovalContext, sol: &Solution, n: usize) -> usize {
    removal_count(ctx.l, n).min(n.saturating_sub(sol.num_tours()))
}

/// Takes out the seed and then repeatedly a biased pick among the cities
/// ordered by distance to the last removed one.
pub fn shaw_removal<R: Rng + ?Sized>(
    inst: &Instance,
    sol: &mut Solution,
    ctx: &RemovalContext,
    rng: &mut R,
) -> Vec<usize> {
    let n = inst.num_cities();
    let q = target(ctx, sol, n);
    let mut removed = Vec::with_capacity(q);
    if q == 0 {
        return removed;
    }
    let eligible: Vec<usize> = (1..=n).filter(|&c| removable(sol, c)).collect();
    let seed = eligible[rng.gen_range(0..eligible.len())];
    sol.remove_city(inst, seed);
    removed.push(seed);
    let mut list = Vec::with_capacity(n);
    while removed.len() < q {
        let last = *removed.last().unwrap();
        list.clear();
        list.extend((1..=n).filter(|&c| removable(sol, c)));
        list.sort_by(|&a, &b| {
            inst.dist(last, a)
                .total_cmp(&inst.dist(last, b))
                .then(a.cmp(&b))
        });
        let c = list[biased_pick(ctx.gamma_shaw, list.len(), rng)];
        sol.remove_city(inst, c);
        removed.push(c);
    }
    removed
}

/// Uniform sample without replacement.
pub fn random_removal<R: Rng + ?Sized>(
    inst: &Instance,
    sol: &mut Solution,
    ctx: &RemovalContext,
    rng: &mut R,
) -> Vec<usize> {
    let n = inst.num_cities();
    let q = target(ctx, sol, n);
    let mut removed = Vec::with_capacity(q);
    let mut list = Vec::with_capacity(n);
    while removed.len() < q {
        list.clear();
        list.extend((1..=n).filter(|&c| removable(sol, c)));
        let c = list[rng.gen_range(0..list.len())];
        sol.remove_city(inst, c);
        removed.push(c);
    }
    removed
}

/// Number of each city's α nearest cities that are served by another tour.
pub fn cross_scores(sol: &Solution, nb: &NeighborList, n: usize) -> Vec<usize> {
    let mut scores = vec![0; n + 1];
    for (c, score) in scores.iter_mut().enumerate().skip(1) {
        let Some(t) = sol.tour_of(c) else { continue };
        *score = nb
            .of(c)
            .iter()
            .filter(|&&w| w != DEPOT && sol.tour_of(w).is_some_and(|tw| tw != t))
            .count();
    }
    scores
}

fn ranked_removal<R: Rng + ?Sized>(
    inst: &Instance,
    sol: &mut Solution,
    q: usize,
    order: &[usize],
    gamma: f64,
    rng: &mut R,
) -> Vec<usize> {
    let mut removed = Vec::with_capacity(q);
    let mut list = Vec::with_capacity(order.len());
    while removed.len() < q {
        list.clear();
        list.extend(order.iter().copied().filter(|&c| removable(sol, c)));
        let c = list[biased_pick(gamma, list.len(), rng)];
        sol.remove_city(inst, c);
        removed.push(c);
    }
    removed
}

/// Biased picks from cities ranked by how many of their neighbors lie on
/// other tours.
pub fn cross_removal<R: Rng + ?Sized>(
    inst: &Instance,
    nb: &NeighborList,
    sol: &mut Solution,
    ctx: &RemovalContext,
    rng: &mut R,
) -> Vec<usize> {
    let n = inst.num_cities();
    let q = target(ctx, sol, n);
    if q == 0 {
        return Vec::new();
    }
    let scores = cross_scores(sol, nb, n);
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
    ranked_removal(inst, sol, q, &order, ctx.gamma_cross, rng)
}

/// Length saved by taking `c` out of its tour.
pub fn saving(inst: &Instance, sol: &Solution, c: usize) -> f64 {
    let (t, p) = sol.location(c).expect("routed city");
    let p = p as isize;
    let a = sol.vertex_at(t, p - 1);
    let b = sol.vertex_at(t, p + 1);
    inst.dist(a, c) + inst.dist(c, b) - inst.dist(a, b)
}

/// Biased picks from cities ranked by decreasing saving, recomputed after
/// every removal.
pub fn worst_removal<R: Rng + ?Sized>(
    inst: &Instance,
    sol: &mut Solution,
    ctx: &RemovalContext,
    rng: &mut R,
) -> Vec<usize> {
    let n = inst.num_cities();
    let q = target(ctx, sol, n);
    let mut removed = Vec::with_capacity(q);
    let mut list: Vec<(f64, usize)> = Vec::with_capacity(n);
    while removed.len() < q {
        list.clear();
        list.extend(
            (1..=n)
                .filter(|&c| removable(sol, c))
                .map(|c| (saving(inst, sol, c), c)),
        );
        list.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let c = list[biased_pick(ctx.gamma_worst, list.len(), rng)].1;
        sol.remove_city(inst, c);
        removed.push(c);
    }
    removed
}

/// Biased picks from cities ranked by how often local search moved them.
pub fn information_removal<R: Rng + ?Sized>(
    inst: &Instance,
    sol: &mut Solution,
    freq: &MoveFrequency,
    ctx: &RemovalContext,
    rng: &mut R,
) -> Vec<usize> {
    let n = inst.num_cities();
    let q = target(ctx, sol, n);
    if q == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&a, &b| freq.get(b).cmp(&freq.get(a)).then(a.cmp(&b)));
    ranked_removal(inst, sol, q, &order, ctx.gamma_information, rng)
}

/// A place to insert a city: before index `pos` of tour `tour`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub tour: usize,
    pub pos: usize,
    pub cost: f64,
}

fn insertion_cost(inst: &Instance, sol: &Solution, c: usize, t: usize, pos: usize) -> f64 {
    let a = sol.vertex_at(t, pos as isize - 1);
    let b = sol.vertex_at(t, pos as isize);
    inst.dist(a, c) + inst.dist(c, b) - inst.dist(a, b)
}

/// Deduplicated insertion positions next to the routed α-neighbors of `c`
/// (or every position when none is routed), sorted by `(tour, pos)`.
pub fn candidate_positions(
    inst: &Instance,
    nb: &NeighborList,
    sol: &Solution,
    c: usize,
) -> Vec<Position> {
    let mut slots: Vec<(usize, usize)> = Vec::new();
    for &w in nb.of(c) {
        if w == DEPOT {
            for t in 0..sol.num_tours() {
                slots.push((t, 0));
                slots.push((t, sol.tour(t).len()));
            }
        } else if let Some((t, p)) = sol.location(w) {
            slots.push((t, p));
            slots.push((t, p + 1));
        }
    }
    if slots.is_empty() {
        for t in 0..sol.num_tours() {
            slots.extend((0..=sol.tour(t).len()).map(|p| (t, p)));
        }
    }
    slots.sort_unstable();
    slots.dedup();
    slots
        .into_iter()
        .map(|(tour, pos)| Position {
            tour,
            pos,
            cost: insertion_cost(inst, sol, c, tour, pos),
        })
        .collect()
}

fn better(a: &Position, b: &Position) -> bool {
    a.cost < b.cost - EPS || (a.cost <= b.cost + EPS && (a.tour, a.pos) < (b.tour, b.pos))
}

fn cheapest(cands: &[Position]) -> Option<Position> {
    let mut best: Option<Position> = None;
    for p in cands {
        if best.as_ref().map_or(true, |b| better(p, b)) {
            best = Some(*p);
        }
    }
    best
}

/// Inserts every removed city, in removal order, at its cheapest candidate
/// position.
pub fn greedy_insertion(inst: &Instance, nb: &NeighborList, sol: &mut Solution, removed: &[usize]) {
    for &c in removed {
        let cands = candidate_positions(inst, nb, sol, c);
        let p = cheapest(&cands).expect("at least one position");
        sol.insert_city(inst, c, p.tour, p.pos);
    }
}

/// Positions scanned and skipped by blink insertion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BlinkStats {
    pub scanned: u64,
    pub skipped: u64,
}

/// Greedy insertion where each candidate is ignored with probability `beta`.
pub fn blink_insertion<R: Rng + ?Sized>(
    inst: &Instance,
    nb: &NeighborList,
    sol: &mut Solution,
    removed: &[usize],
    beta: f64,
    rng: &mut R,
) -> BlinkStats {
    let mut stats = BlinkStats::default();
    for &c in removed {
        let cands = candidate_positions(inst, nb, sol, c);
        let mut best: Option<Position> = None;
        for p in &cands {
            stats.scanned += 1;
            if rng.gen::<f64>() < beta {
                stats.skipped += 1;
                continue;
            }
            if best.as_ref().map_or(true, |b| better(p, b)) {
                best = Some(*p);
            }
        }
        let p = best
            .or_else(|| cheapest(&cands))
            .expect("at least one position");
        sol.insert_city(inst, c, p.tour, p.pos);
    }
    stats
}

/// Regret value of a city from its candidate costs sorted ascending.
pub fn regret_value(sorted_costs: &[f64], k: usize) -> f64 {
    let Some(&first) = sorted_costs.first() else {
        return 0.0;
    };
    let worst = *sorted_costs.last().unwrap();
    (1..k)
        .map(|q| sorted_costs.get(q).copied().unwrap_or(worst) - first)
        .sum()
}

/// Repeatedly inserts the city with the largest regret-`k` value at its
/// cheapest position.
pub fn regret_insertion(
    inst: &Instance,
    nb: &NeighborList,
    sol: &mut Solution,
    removed: &[usize],
    k: usize,
) {
    let mut pending: Vec<usize> = removed.to_vec();
    while !pending.is_empty() {
        // (regret, best cost, city, position)
        let mut pick: Option<(f64, f64, usize, Position)> = None;
        for &c in &pending {
            let mut cands = candidate_positions(inst, nb, sol, c);
            cands.sort_by(|a, b| {
                a.cost
                    .total_cmp(&b.cost)
                    .then((a.tour, a.pos).cmp(&(b.tour, b.pos)))
            });
            let costs: Vec<f64> = cands.iter().take(k).map(|p| p.cost).collect();
            let reg = regret_value(&costs, k);
            let best = cheapest(&cands).expect("at least one position");
            let wins = match &pick {
                None => true,
                Some((r, f1, pc, _)) => {
                    reg > r + EPS
                        || (reg >= r - EPS
                            && (best.cost > f1 + EPS || (best.cost >= f1 - EPS && c < *pc)))
                }
            };
            if wins {
                pick = Some((reg, best.cost, c, best));
            }
        }
        let (_, _, c, p) = pick.unwrap();
        sol.insert_city(inst, c, p.tour, p.pos);
        pending.retain(|&x| x != c);
    }
}

/// Result of one perturbation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerturbReport {
    pub removed: Vec<usize>,
    pub blink: BlinkStats,
}

/// Removal followed by reinsertion of the removed cities.
#[allow(clippy::too_many_arguments)]
pub fn perturb<R: Rng + ?Sized>(
    inst: &Instance,
    nb: &NeighborList,
    sol: &mut Solution,
    removal: Removal,
    insertion: Insertion,
    rctx: &RemovalContext,
    ictx: &InsertionContext,
    freq: &MoveFrequency,
    rng: &mut R,
) -> PerturbReport {
    let removed = match removal {
        Removal::Shaw => shaw_removal(inst, sol, rctx, rng),
        Removal::Random => random_removal(inst, sol, rctx, rng),
        Removal::Cross => cross_removal(inst, nb, sol, rctx, rng),
        Removal::Worst => worst_removal(inst, sol, rctx, rng),
        Removal::Information => information_removal(inst, sol, freq, rctx, rng),
    };
    let mut blink = BlinkStats::default();
    match insertion {
        Insertion::Greedy => greedy_insertion(inst, nb, sol, &removed),
        Insertion::Blink => blink = blink_insertion(inst, nb, sol, &removed, ictx.beta, rng),
        Insertion::Regret => regret_insertion(inst, nb, sol, &removed, ictx.k),
    }
    PerturbReport { removed, blink }
}
