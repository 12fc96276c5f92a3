//! Standalone TSP improvement of individual tours: a built-in 2-opt and
//! Or-opt descent, or an external solver driven through TSPLIB files.

use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use log::warn;

use crate::error::{Error, Result};
use crate::instance::{Instance, NeighborList, DEPOT};
use crate::local_search::{LocalSearch, LocalSearchStats, MoveFrequency};
use crate::solution::{Solution, EPS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    /// 2-opt plus Or-opt (segments of 1 to 3 cities) over α-candidates.
    Builtin,
    /// `command in.tsp out.tour`; the tour file lists node ids, node 1
    /// being the depot.
    External { command: PathBuf, args: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TourImprover {
    pub strategy: Strategy,
    pub budget: Duration,
    pub alpha: usize,
}

impl Default for TourImprover {
    fn default() -> Self {
        Self {
            strategy: Strategy::Builtin,
            budget: Duration::from_secs(1),
            alpha: 10,
        }
    }
}

impl TourImprover {
    pub fn builtin(alpha: usize, budget: Duration) -> Self {
        Self {
            strategy: Strategy::Builtin,
            budget,
            alpha,
        }
    }

    pub fn external(command: impl Into<PathBuf>, args: Vec<String>, budget: Duration) -> Self {
        Self {
            strategy: Strategy::External {
                command: command.into(),
                args,
            },
            budget,
            alpha: 10,
        }
    }
}

/// Reorders the cities of one depot-anchored tour. The result visits the
/// same cities and is never longer than the input.
pub fn improve_tour(inst: &Instance, tour: &[usize], improver: &TourImprover) -> Vec<usize> {
    if tour.len() <= 2 {
        return tour.to_vec();
    }
    let out = match &improver.strategy {
        Strategy::Builtin => two_opt_or_opt(inst, tour, improver.alpha, improver.budget),
        Strategy::External { command, args } => {
            match run_external(inst, tour, command, args, improver.budget) {
                Ok(t) => t,
                Err(e) => {
                    warn!("{e}; falling back to the built-in improver");
                    two_opt_or_opt(inst, tour, improver.alpha, improver.budget)
                }
            }
        }
    };
    if inst.tour_length(&out) <= inst.tour_length(tour) + EPS {
        out
    } else {
        tour.to_vec()
    }
}

/// Improves every tour, then runs one local search over the whole solution.
pub fn single_tour_improve(
    inst: &Instance,
    nb: &NeighborList,
    sol: &mut Solution,
    improver: &TourImprover,
    ls: &mut LocalSearch,
    freq: &mut MoveFrequency,
) -> LocalSearchStats {
    let updates: Vec<(usize, Vec<usize>)> = (0..sol.num_tours())
        .map(|t| (t, improve_tour(inst, sol.tour(t), improver)))
        .filter(|(t, new)| new.as_slice() != sol.tour(*t))
        .collect();
    if !updates.is_empty() {
        sol.replace_tours(inst, updates);
    }
    ls.run(inst, nb, sol, freq)
}

/// Cyclic sequence `[depot, c1, .., ck]`; index 0 always holds the depot.
struct Cycle<'a> {
    inst: &'a Instance,
    seq: Vec<usize>,
    pos: Vec<usize>,
    near: Vec<Vec<usize>>,
}

impl<'a> Cycle<'a> {
    fn new(inst: &'a Instance, tour: &[usize], alpha: usize) -> Self {
        let mut seq = Vec::with_capacity(tour.len() + 1);
        seq.push(DEPOT);
        seq.extend_from_slice(tour);
        let max = seq.iter().copied().max().unwrap_or(0);
        let width = alpha.min(seq.len() - 1);
        let mut near = vec![Vec::new(); max + 1];
        for &v in &seq {
            let mut others: Vec<usize> = seq.iter().copied().filter(|&w| w != v).collect();
            others.sort_by(|&a, &b| inst.dist(v, a).total_cmp(&inst.dist(v, b)).then(a.cmp(&b)));
            others.truncate(width);
            near[v] = others;
        }
        let mut c = Self {
            inst,
            seq,
            pos: vec![usize::MAX; max + 1],
            near,
        };
        c.reindex();
        c
    }

    fn reindex(&mut self) {
        for (i, &v) in self.seq.iter().enumerate() {
            self.pos[v] = i;
        }
    }

    fn d(&self, a: usize, b: usize) -> f64 {
        self.inst.dist(a, b)
    }

    fn len(&self) -> usize {
        self.seq.len()
    }

    fn succ(&self, i: usize) -> usize {
        self.seq[(i + 1) % self.len()]
    }

    fn pred(&self, i: usize) -> usize {
        self.seq[(i + self.len() - 1) % self.len()]
    }

    /// Reverses `seq[s..=t]`, or the complementary arc when the range holds
    /// the depot; both give the same cycle.
    fn reverse(&mut self, s: usize, t: usize) {
        if s == 0 {
            let l = self.len();
            if t + 1 < l {
                self.seq[t + 1..l].reverse();
            }
        } else {
            self.seq[s..=t].reverse();
        }
        self.reindex();
    }

    fn two_opt_pass(&mut self) -> bool {
        let l = self.len();
        if l < 4 {
            return false;
        }
        for i in 0..l {
            let a = self.seq[i];
            for k in 0..self.near[a].len() {
                let c = self.near[a][k];
                let j = self.pos[c];
                // successor edges (a,b), (c,e) become (a,c), (b,e)
                let (b, e) = (self.succ(i), self.succ(j));
                if c != b && e != a {
                    let gain = self.d(a, b) + self.d(c, e) - self.d(a, c) - self.d(b, e);
                    if gain > EPS {
                        if i < j {
                            self.reverse(i + 1, j);
                        } else {
                            self.reverse(j + 1, i);
                        }
                        return true;
                    }
                }
                // predecessor edges (b,a), (e,c) become (a,c), (b,e)
                let (b, e) = (self.pred(i), self.pred(j));
                if c != b && e != a {
                    let gain = self.d(b, a) + self.d(e, c) - self.d(a, c) - self.d(b, e);
                    if gain > EPS {
                        if i < j {
                            self.reverse(i, j - 1);
                        } else {
                            self.reverse(j, i - 1);
                        }
                        return true;
                    }
                }
            }
        }
        false
    }

    fn or_opt_pass(&mut self) -> bool {
        let l = self.len();
        for len in 1..=3usize {
            if l < len + 3 {
                break;
            }
            for i in 1..=(l - len) {
                let s0 = self.seq[i];
                let se = self.seq[i + len - 1];
                let p = self.seq[i - 1];
                let nx = self.seq[(i + len) % l];
                let inside = |v: usize, pos: &[usize]| (i..i + len).contains(&pos[v]);
                let removal = self.d(p, s0) + self.d(se, nx) - self.d(p, nx);
                let mut cands: Vec<usize> = self.near[s0].clone();
                cands.extend_from_slice(&self.near[se]);
                for c in cands {
                    if inside(c, &self.pos) {
                        continue;
                    }
                    let pc = self.pos[c];
                    for (a, b) in [(c, self.succ(pc)), (self.pred(pc), c)] {
                        if inside(a, &self.pos) || inside(b, &self.pos) {
                            continue;
                        }
                        let base = self.d(a, b);
                        let fwd = self.d(a, s0) + self.d(se, b) - base;
                        let rev = self.d(a, se) + self.d(s0, b) - base;
                        let (cost, reversed) = if rev < fwd - EPS { (rev, true) } else { (fwd, false) };
                        if removal - cost > EPS {
                            let mut seg: Vec<usize> = self.seq.drain(i..i + len).collect();
                            if reversed {
                                seg.reverse();
                            }
                            let at = if b == DEPOT {
                                self.seq.len()
                            } else {
                                self.seq.iter().position(|&v| v == b).unwrap()
                            };
                            self.seq.splice(at..at, seg);
                            self.reindex();
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

fn two_opt_or_opt(inst: &Instance, tour: &[usize], alpha: usize, budget: Duration) -> Vec<usize> {
    let start = Instant::now();
    let mut c = Cycle::new(inst, tour, alpha);
    loop {
        let mut improved = false;
        while start.elapsed() <= budget && c.two_opt_pass() {
            improved = true;
        }
        if start.elapsed() <= budget && c.or_opt_pass() {
            improved = true;
        }
        if !improved || start.elapsed() > budget {
            break;
        }
    }
    c.seq[1..].to_vec()
}

/// Runs `command [args..] in.tsp out.tour` on the tour's cities and reads
/// the visiting order back.
fn run_external(
    inst: &Instance,
    tour: &[usize],
    command: &PathBuf,
    args: &[String],
    budget: Duration,
) -> Result<Vec<usize>> {
    let dir = tempfile::tempdir().map_err(|e| Error::ExternalSolver(e.to_string()))?;
    let input = dir.path().join("in.tsp");
    let output = dir.path().join("out.tour");
    let sub = Instance::new(
        format!("{}-tour", inst.name()),
        inst.depot(),
        tour.iter().map(|&c| inst.point(c)).collect(),
        inst.metric(),
    )?;
    std::fs::write(&input, sub.to_tsplib()).map_err(|e| Error::io(&input, e))?;
    let mut child = Command::new(command)
        .args(args)
        .arg(&input)
        .arg(&output)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::ExternalSolver(format!("{}: {e}", command.display())))?;
    let start = Instant::now();
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if start.elapsed() > budget => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Error::ExternalSolver(format!(
                    "{} timed out after {} ms",
                    command.display(),
                    budget.as_millis()
                )));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(2)),
            Err(e) => return Err(Error::ExternalSolver(e.to_string())),
        }
    };
    if !status.success() {
        return Err(Error::ExternalSolver(format!("{} exited with {status}", command.display())));
    }
    let text = std::fs::read_to_string(&output).map_err(|e| Error::io(&output, e))?;
    let order = parse_tour_file(&text, tour.len() + 1)?;
    Ok(order.into_iter().map(|node| tour[node - 2]).collect())
}

/// Reads node ids (1-based, node 1 the depot) from a tour file, skipping
/// non-numeric lines and stopping at `-1`. Returns the city nodes in visiting
/// order starting after the depot.
pub fn parse_tour_file(text: &str, dimension: usize) -> Result<Vec<usize>> {
    let mut nodes = Vec::with_capacity(dimension);
    'lines: for line in text.lines() {
        for tok in line.split_whitespace() {
            match tok.parse::<i64>() {
                Ok(-1) => break 'lines,
                Ok(v) if v >= 1 && (v as usize) <= dimension => nodes.push(v as usize),
                Ok(v) => {
                    return Err(Error::ExternalSolver(format!("node {v} out of range")));
                }
                Err(_) => continue 'lines,
            }
        }
    }
    let mut seen = vec![false; dimension + 1];
    for &v in &nodes {
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::ExternalSolver(format!("node {v} repeated")));
        }
    }
    if nodes.len() != dimension {
        return Err(Error::ExternalSolver(format!(
            "tour lists {} of {dimension} nodes",
            nodes.len()
        )));
    }
    let at = nodes.iter().position(|&v| v == 1).unwrap();
    nodes.rotate_left(at);
    Ok(nodes.split_off(1))
}
