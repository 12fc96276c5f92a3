//! Ground truth for small instances: the flow-based MILP model as CPLEX LP
//! text, a constraint-by-constraint feasibility check of tours against that
//! model, and exact dynamic-programming solvers.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::instance::{Instance, DEPOT};
use crate::solution::Solution;

/// Largest number of cities accepted by [`brute_force_opt`].
pub const BRUTE_FORCE_LIMIT: usize = 14;

/// Largest number of cities accepted by [`held_karp`].
pub const HELD_KARP_LIMIT: usize = 16;

/// Size of the flow model of an instance with `m` salesmen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowModel {
    pub vertices: usize,
    pub m: usize,
}

impl FlowModel {
    pub fn new(inst: &Instance, m: usize) -> Result<Self> {
        let n = inst.num_cities();
        if m == 0 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        if m > n {
            return Err(Error::TooManySalesmen { m, n });
        }
        Ok(Self {
            vertices: n + 1,
            m,
        })
    }

    pub fn cities(&self) -> usize {
        self.vertices - 1
    }

    /// Arc variables `x_i_j_k`.
    pub fn num_binaries(&self) -> usize {
        self.vertices * (self.vertices - 1) * self.m
    }

    /// Rank variables `u_i` plus the makespan `C`.
    pub fn num_continuous(&self) -> usize {
        self.cities() + 1
    }

    /// Rows per constraint family, in export order.
    pub fn rows(&self) -> [(ModelFamily, usize); 6] {
        let n = self.cities();
        [
            (ModelFamily::Makespan, self.m),
            (ModelFamily::Assignment, n),
            (ModelFamily::DepotOut, self.m),
            (ModelFamily::FlowConservation, n * self.m),
            (ModelFamily::DepotIn, self.m),
            (ModelFamily::Ordering, n * (n - 1)),
        ]
    }

    pub fn num_rows(&self) -> usize {
        self.rows().iter().map(|r| r.1).sum()
    }
}

/// Constraint families of the flow model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelFamily {
    /// Every tour is no longer than `C`.
    Makespan,
    /// Every city is entered exactly once.
    Assignment,
    /// Every salesman leaves the depot exactly once.
    DepotOut,
    /// Every salesman leaves each city as often as it enters it.
    FlowConservation,
    /// Every salesman returns to the depot exactly once.
    DepotIn,
    /// Rank constraints that forbid subtours.
    Ordering,
    /// Arc variables are 0/1 and only defined on existing arcs.
    Binary,
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelFamily::Makespan => "makespan bound",
            ModelFamily::Assignment => "city assignment",
            ModelFamily::DepotOut => "depot out-degree",
            ModelFamily::FlowConservation => "flow conservation",
            ModelFamily::DepotIn => "depot in-degree",
            ModelFamily::Ordering => "rank ordering",
            ModelFamily::Binary => "binary domain",
        };
        f.write_str(s)
    }
}

fn push_terms(out: &mut String, terms: &[String]) {
    for (i, t) in terms.iter().enumerate() {
        if i > 0 && i % 8 == 0 {
            out.push_str("\n   ");
        }
        if i > 0 || t.starts_with('-') {
            out.push(' ');
        }
        if i > 0 && !t.starts_with('-') {
            out.push_str("+ ");
        }
        out.push_str(t);
    }
}

fn x(i: usize, j: usize, k: usize) -> String {
    format!("x_{i}_{j}_{k}")
}

/// The flow model in CPLEX LP format. Vertex 0 is the depot; salesmen are
/// numbered `1..=m`.
pub fn export_lp(inst: &Instance, m: usize) -> Result<String> {
    let model = FlowModel::new(inst, m)?;
    let nv = model.vertices;
    let n = model.cities();
    let ks = 1..=m;
    let mut out = String::new();
    let _ = writeln!(out, "\\ minmax mTSP flow model: {} cities, {m} salesmen", n);
    let _ = writeln!(out, "\\ instance {}", inst.name());
    out.push_str("Minimize\n obj: C\nSubject To\n");

    for k in ks.clone() {
        let mut terms = Vec::with_capacity(nv * nv);
        for i in 0..nv {
            for j in 0..nv {
                if i != j {
                    terms.push(format!("{} {}", inst.dist(i, j), x(i, j, k)));
                }
            }
        }
        terms.push("- C".into());
        let _ = write!(out, " len_{k}: ");
        push_terms(&mut out, &terms);
        out.push_str(" <= 0\n");
    }
    for j in 1..=n {
        let terms: Vec<String> = ks
            .clone()
            .flat_map(|k| (0..nv).filter(move |&i| i != j).map(move |i| x(i, j, k)))
            .collect();
        let _ = write!(out, " assign_{j}: ");
        push_terms(&mut out, &terms);
        out.push_str(" = 1\n");
    }
    for k in ks.clone() {
        let terms: Vec<String> = (1..nv).map(|j| x(DEPOT, j, k)).collect();
        let _ = write!(out, " depot_out_{k}: ");
        push_terms(&mut out, &terms);
        out.push_str(" = 1\n");
    }
    for j in 1..=n {
        for k in ks.clone() {
            let mut terms: Vec<String> = (0..nv).filter(|&i| i != j).map(|i| x(i, j, k)).collect();
            terms.extend((0..nv).filter(|&l| l != j).map(|l| format!("- {}", x(j, l, k))));
            let _ = write!(out, " flow_{j}_{k}: ");
            push_terms(&mut out, &terms);
            out.push_str(" = 0\n");
        }
    }
    for k in ks.clone() {
        let terms: Vec<String> = (1..nv).map(|i| x(i, DEPOT, k)).collect();
        let _ = write!(out, " depot_in_{k}: ");
        push_terms(&mut out, &terms);
        out.push_str(" = 1\n");
    }
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            let mut terms = vec![format!("u_{i}"), format!("- u_{j}")];
            terms.extend(ks.clone().map(|k| format!("{nv} {}", x(i, j, k))));
            let _ = write!(out, " rank_{i}_{j}: ");
            push_terms(&mut out, &terms);
            let _ = writeln!(out, " <= {}", nv - 1);
        }
    }
    out.push_str("Bounds\n");
    for i in 1..=n {
        let _ = writeln!(out, " 1 <= u_{i} <= {}", nv - 1);
    }
    out.push_str(" C >= 0\nBinaries\n");
    for k in ks {
        let vars: Vec<String> = (0..nv)
            .flat_map(|i| (0..nv).filter(move |&j| j != i).map(move |j| x(i, j, k)))
            .collect();
        for chunk in vars.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

/// Translates raw tours into an arc/rank/makespan assignment and reports
/// every violated constraint family of the flow model with `m` salesmen.
pub fn check_model_feasibility(
    inst: &Instance,
    m: usize,
    tours: &[Vec<usize>],
    c: f64,
) -> std::result::Result<(), Vec<ModelFamily>> {
    let n = inst.num_cities();
    let nv = n + 1;
    let mut bad = Vec::new();
    if tours.len() > m {
        // arcs of salesmen beyond m have no variables
        bad.push(ModelFamily::Binary);
    }
    let mut x: HashMap<(usize, usize, usize), u32> = HashMap::new();
    let mut rank = vec![0usize; nv];
    for (k, tour) in tours.iter().enumerate().take(m) {
        if tour.iter().any(|&v| v == DEPOT || v > n) {
            bad.push(ModelFamily::Binary);
            continue;
        }
        let mut prev = DEPOT;
        for (p, &v) in tour.iter().chain(std::iter::once(&DEPOT)).enumerate() {
            if prev == v {
                bad.push(ModelFamily::Binary);
            } else {
                *x.entry((prev, v, k)).or_default() += 1;
            }
            if v != DEPOT {
                rank[v] = p + 1;
            }
            prev = v;
        }
    }
    let get = |i: usize, j: usize, k: usize| x.get(&(i, j, k)).copied().unwrap_or(0) as f64;
    if x.values().any(|&v| v > 1) {
        bad.push(ModelFamily::Binary);
    }
    for k in 0..m {
        let mut len = 0.0;
        for i in 0..nv {
            for j in 0..nv {
                if i != j {
                    let v = get(i, j, k);
                    if v != 0.0 {
                        len += inst.dist(i, j) * v;
                    }
                }
            }
        }
        if len > c + 1e-9 * c.abs().max(1.0) {
            bad.push(ModelFamily::Makespan);
        }
        let out: f64 = (1..nv).map(|j| get(DEPOT, j, k)).sum();
        if out != 1.0 {
            bad.push(ModelFamily::DepotOut);
        }
        let inn: f64 = (1..nv).map(|i| get(i, DEPOT, k)).sum();
        if inn != 1.0 {
            bad.push(ModelFamily::DepotIn);
        }
        for j in 1..nv {
            let a: f64 = (0..nv).filter(|&i| i != j).map(|i| get(i, j, k)).sum();
            let b: f64 = (0..nv).filter(|&l| l != j).map(|l| get(j, l, k)).sum();
            if a != b {
                bad.push(ModelFamily::FlowConservation);
            }
        }
    }
    for j in 1..nv {
        let entered: f64 = (0..m)
            .map(|k| (0..nv).filter(|&i| i != j).map(|i| get(i, j, k)).sum::<f64>())
            .sum();
        if entered != 1.0 {
            bad.push(ModelFamily::Assignment);
        }
    }
    // unvisited cities keep the smallest admissible rank
    let u: Vec<f64> = rank.iter().map(|&r| r.max(1) as f64).collect();
    for i in 1..nv {
        if u[i] > (nv - 1) as f64 {
            bad.push(ModelFamily::Ordering);
        }
        for j in 1..nv {
            if i == j {
                continue;
            }
            let s: f64 = (0..m).map(|k| get(i, j, k)).sum();
            if u[i] - u[j] + nv as f64 * s > (nv - 1) as f64 {
                bad.push(ModelFamily::Ordering);
            }
        }
    }
    if c < 0.0 {
        bad.push(ModelFamily::Makespan);
    }
    bad.sort();
    bad.dedup();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

/// Optimal closed tour from the depot through `cities`; returns its length
/// and the visiting order.
pub fn held_karp(inst: &Instance, cities: &[usize]) -> Result<(f64, Vec<usize>)> {
    let k = cities.len();
    if k > HELD_KARP_LIMIT {
        return Err(Error::ExactLimit {
            n: k,
            limit: HELD_KARP_LIMIT,
        });
    }
    if k == 0 {
        return Ok((0.0, Vec::new()));
    }
    let (dp, parent) = path_table(inst, cities);
    let full = (1usize << k) - 1;
    let (len, last) = close(inst, cities, &dp, full);
    Ok((len, unwind(cities, &parent, full, last)))
}

/// `dp[S·k + j]`: shortest path from the depot through subset `S` ending at
/// `cities[j]`.
fn path_table(inst: &Instance, cities: &[usize]) -> (Vec<f64>, Vec<u8>) {
    let k = cities.len();
    let size = 1usize << k;
    let mut dp = vec![f64::INFINITY; size * k];
    let mut parent = vec![u8::MAX; size * k];
    for j in 0..k {
        dp[(1 << j) * k + j] = inst.dist(DEPOT, cities[j]);
    }
    for s in 1..size {
        for j in 0..k {
            if s & (1 << j) == 0 {
                continue;
            }
            let cur = dp[s * k + j];
            if !cur.is_finite() {
                continue;
            }
            for t in 0..k {
                if s & (1 << t) != 0 {
                    continue;
                }
                let ns = s | (1 << t);
                let cand = cur + inst.dist(cities[j], cities[t]);
                if cand < dp[ns * k + t] {
                    dp[ns * k + t] = cand;
                    parent[ns * k + t] = j as u8;
                }
            }
        }
    }
    (dp, parent)
}

fn close(inst: &Instance, cities: &[usize], dp: &[f64], s: usize) -> (f64, usize) {
    let k = cities.len();
    let mut best = (f64::INFINITY, 0);
    for j in 0..k {
        if s & (1 << j) != 0 {
            let c = dp[s * k + j] + inst.dist(cities[j], DEPOT);
            if c < best.0 {
                best = (c, j);
            }
        }
    }
    best
}

fn unwind(cities: &[usize], parent: &[u8], mut s: usize, mut j: usize) -> Vec<usize> {
    let k = cities.len();
    let mut order = Vec::with_capacity(s.count_ones() as usize);
    loop {
        order.push(cities[j]);
        let p = parent[s * k + j];
        s &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    order.reverse();
    order
}

/// Exact minmax optimum by dynamic programming over set partitions with
/// per-subset Held–Karp tour lengths.
pub fn brute_force_opt(inst: &Instance, m: usize) -> Result<(f64, Solution)> {
    let n = inst.num_cities();
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if m > n {
        return Err(Error::TooManySalesmen { m, n });
    }
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::ExactLimit {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let cities: Vec<usize> = (1..=n).collect();
    let (dp, parent) = path_table(inst, &cities);
    let size = 1usize << n;
    let mut tsp = vec![0.0; size];
    let mut last = vec![0usize; size];
    for s in 1..size {
        let (l, j) = close(inst, &cities, &dp, s);
        tsp[s] = l;
        last[s] = j;
    }
    // best[k-1][S]: optimal makespan splitting S into k nonempty tours
    let mut best = vec![tsp.clone()];
    let mut choice: Vec<Vec<usize>> = vec![vec![0; size]];
    for k in 2..=m {
        let prev = &best[k - 2];
        let mut cur = vec![f64::INFINITY; size];
        let mut ch = vec![0usize; size];
        for s in 1..size {
            if (s.count_ones() as usize) < k {
                continue;
            }
            let low = s & s.wrapping_neg();
            let rest = s ^ low;
            // t runs over subsets of S that contain the lowest city
            let mut sub = rest;
            loop {
                let t = sub | low;
                let r = s ^ t;
                if r != 0 && (r.count_ones() as usize) >= k - 1 {
                    let v = tsp[t].max(prev[r]);
                    if v < cur[s] {
                        cur[s] = v;
                        ch[s] = t;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        best.push(cur);
        choice.push(ch);
    }
    let full = size - 1;
    let value = best[m - 1][full];
    let mut tours = Vec::with_capacity(m);
    let mut s = full;
    for k in (1..=m).rev() {
        let t = if k == 1 { s } else { choice[k - 1][s] };
        tours.push(unwind(&cities, &parent, t, last[t]));
        s ^= t;
    }
    let sol = Solution::from_tours(inst, tours)?;
    Ok((value, sol))
}
