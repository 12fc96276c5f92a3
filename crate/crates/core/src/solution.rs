//! m-tour solutions with cached tour lengths, validation, the greedy
//! randomized construction and the plain-text solution file format.

use std::fmt;

use rand::Rng;

use crate::error::{Error, ParseError, Result};
use crate::instance::{Instance, NeighborList, DEPOT};

/// A candidate is "better" only if it wins by more than this.
pub const EPS: f64 = 1e-9;

const UNASSIGNED: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    tour: u32,
    pos: u32,
}

impl Slot {
    const NONE: Slot = Slot {
        tour: UNASSIGNED,
        pos: UNASSIGNED,
    };
}

/// `m` depot-anchored tours. The depot is implicit at both ends of every
/// tour; tours hold city indices `1..=n`.
#[derive(Debug, Clone)]
pub struct Solution {
    tours: Vec<Vec<usize>>,
    lengths: Vec<f64>,
    /// `prefix[t][p]`: distance travelled from the depot up to `tours[t][p]`.
    prefix: Vec<Vec<f64>>,
    slots: Vec<Slot>,
    makespan: f64,
}

impl PartialEq for Solution {
    fn eq(&self, other: &Self) -> bool {
        self.tours == other.tours
    }
}

impl Solution {
    /// Wraps raw tours. Cities must be in `1..=n`; duplicates and missing
    /// cities are allowed here and reported by [`validate`].
    pub fn from_tours(inst: &Instance, tours: Vec<Vec<usize>>) -> Result<Self> {
        let n = inst.num_cities();
        for &c in tours.iter().flatten() {
            if c == DEPOT || c > n {
                return Err(Error::VertexOutOfRange {
                    vertex: c,
                    vertices: n + 1,
                });
            }
        }
        let mut sol = Solution {
            lengths: vec![0.0; tours.len()],
            prefix: vec![Vec::new(); tours.len()],
            slots: vec![Slot::NONE; n + 1],
            tours,
            makespan: 0.0,
        };
        sol.recompute_caches(inst);
        Ok(sol)
    }

    /// Rebuilds lengths, prefix sums, city locations and the makespan.
    pub fn recompute_caches(&mut self, inst: &Instance) {
        self.slots.iter_mut().for_each(|s| *s = Slot::NONE);
        for t in 0..self.tours.len() {
            self.refresh_tour(inst, t);
        }
        self.refresh_makespan();
    }

    fn refresh_tour(&mut self, inst: &Instance, t: usize) {
        let tour = &self.tours[t];
        let prefix = &mut self.prefix[t];
        prefix.clear();
        let mut prev = DEPOT;
        let mut acc = 0.0;
        for (p, &c) in tour.iter().enumerate() {
            acc += inst.dist(prev, c);
            prefix.push(acc);
            self.slots[c] = Slot {
                tour: t as u32,
                pos: p as u32,
            };
            prev = c;
        }
        self.lengths[t] = acc + inst.dist(prev, DEPOT);
    }

    fn refresh_makespan(&mut self) {
        self.makespan = self.lengths.iter().copied().fold(0.0, f64::max);
    }

    /// Replaces several tours at once and updates every cache they touch.
    pub fn replace_tours(&mut self, inst: &Instance, updates: Vec<(usize, Vec<usize>)>) {
        for (t, _) in &updates {
            for &c in &self.tours[*t] {
                self.slots[c] = Slot::NONE;
            }
        }
        for (t, cities) in updates {
            self.tours[t] = cities;
            self.refresh_tour(inst, t);
        }
        self.refresh_makespan();
    }

    /// Takes a city out of its tour; returns its former `(tour, position)`.
    pub fn remove_city(&mut self, inst: &Instance, city: usize) -> Option<(usize, usize)> {
        let (t, p) = self.location(city)?;
        self.tours[t].remove(p);
        self.slots[city] = Slot::NONE;
        self.refresh_tour(inst, t);
        self.refresh_makespan();
        Some((t, p))
    }

    /// Inserts `city` so that it ends up at index `pos` of tour `t`.
    pub fn insert_city(&mut self, inst: &Instance, city: usize, t: usize, pos: usize) {
        debug_assert!(self.location(city).is_none(), "city {city} already routed");
        self.tours[t].insert(pos, city);
        self.refresh_tour(inst, t);
        self.refresh_makespan();
    }

    pub fn num_tours(&self) -> usize {
        self.tours.len()
    }

    pub fn tours(&self) -> &[Vec<usize>] {
        &self.tours
    }

    pub fn tour(&self, t: usize) -> &[usize] {
        &self.tours[t]
    }

    pub fn into_tours(self) -> Vec<Vec<usize>> {
        self.tours
    }

    pub fn length(&self, t: usize) -> f64 {
        self.lengths[t]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// The minmax objective: the longest tour length.
    pub fn makespan(&self) -> f64 {
        self.makespan
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// `(tour, position)` of a routed city.
    #[inline]
    pub fn location(&self, city: usize) -> Option<(usize, usize)> {
        let s = self.slots[city];
        (s.tour != UNASSIGNED).then_some((s.tour as usize, s.pos as usize))
    }

    #[inline]
    pub fn tour_of(&self, city: usize) -> Option<usize> {
        self.location(city).map(|(t, _)| t)
    }

    /// Vertex at position `pos` of tour `t`; the depot outside `0..len`.
    #[inline]
    pub fn vertex_at(&self, t: usize, pos: isize) -> usize {
        let tour = &self.tours[t];
        if pos < 0 || pos as usize >= tour.len() {
            DEPOT
        } else {
            tour[pos as usize]
        }
    }

    /// Path length from the depot to position `pos` (0 for `pos < 0`).
    #[inline]
    pub fn prefix_len(&self, t: usize, pos: isize) -> f64 {
        if pos < 0 {
            0.0
        } else if pos as usize >= self.tours[t].len() {
            self.lengths[t]
        } else {
            self.prefix[t][pos as usize]
        }
    }

    /// Path length from position `pos` back to the depot at the end of the tour.
    #[inline]
    pub fn suffix_len(&self, t: usize, pos: isize) -> f64 {
        if pos as usize >= self.tours[t].len() {
            0.0
        } else {
            self.lengths[t] - self.prefix_len(t, pos)
        }
    }

    pub fn unrouted(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.slots.len()).filter(|&c| self.slots[c].tour == UNASSIGNED)
    }

    /// Largest absolute difference between cached and recomputed values.
    pub fn cache_error(&self, inst: &Instance) -> f64 {
        let mut err: f64 = 0.0;
        let mut mk: f64 = 0.0;
        for (t, tour) in self.tours.iter().enumerate() {
            let len = inst.tour_length(tour);
            err = err.max((len - self.lengths[t]).abs());
            mk = mk.max(len);
            let mut acc = 0.0;
            let mut prev = DEPOT;
            for (p, &c) in tour.iter().enumerate() {
                acc += inst.dist(prev, c);
                err = err.max((acc - self.prefix[t][p]).abs());
                if self.location(c) != Some((t, p)) {
                    return f64::INFINITY;
                }
                prev = c;
            }
        }
        err.max((mk - self.makespan).abs())
    }
}

/// Longest tour of `sol`.
pub fn objective(sol: &Solution) -> f64 {
    sol.makespan()
}

/// A broken feasibility rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TourCount { expected: usize, found: usize },
    EmptyTour(usize),
    DuplicateCity(usize),
    MissingCity(usize),
    UnknownCity(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TourCount { expected, found } => {
                write!(f, "tour count mismatch: expected {expected}, found {found}")
            }
            Violation::EmptyTour(t) => write!(f, "empty tour {t}"),
            Violation::DuplicateCity(c) => write!(f, "duplicate city {c}"),
            Violation::MissingCity(c) => write!(f, "missing city {c}"),
            Violation::UnknownCity(c) => write!(f, "unknown city {c}"),
        }
    }
}

/// Checks that `tours` is a feasible m-tour solution.
pub fn validate_tours(
    inst: &Instance,
    m: usize,
    tours: &[Vec<usize>],
) -> std::result::Result<(), Vec<Violation>> {
    let n = inst.num_cities();
    let mut out = Vec::new();
    if tours.len() != m {
        out.push(Violation::TourCount {
            expected: m,
            found: tours.len(),
        });
    }
    let mut seen = vec![0u32; n + 1];
    for (t, tour) in tours.iter().enumerate() {
        if tour.is_empty() {
            out.push(Violation::EmptyTour(t));
        }
        for &c in tour {
            if c == DEPOT || c > n {
                out.push(Violation::UnknownCity(c));
                continue;
            }
            seen[c] += 1;
            if seen[c] == 2 {
                out.push(Violation::DuplicateCity(c));
            }
        }
    }
    out.extend((1..=n).filter(|&c| seen[c] == 0).map(Violation::MissingCity));
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

pub fn validate(
    inst: &Instance,
    m: usize,
    sol: &Solution,
) -> std::result::Result<(), Vec<Violation>> {
    validate_tours(inst, m, sol.tours())
}

/// Greedy randomized construction: each tour starts with a distinct random
/// city, then the currently shortest tour is extended by the unrouted city
/// among the α nearest of its last city that adds the least length.
pub fn greedy_random_init<R: Rng + ?Sized>(
    inst: &Instance,
    m: usize,
    nb: &NeighborList,
    rng: &mut R,
) -> Result<Solution> {
    let n = inst.num_cities();
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if m > n {
        return Err(Error::TooManySalesmen { m, n });
    }
    let seeds = rand::seq::index::sample(rng, n, m);
    let mut routed = vec![false; n + 1];
    let mut tours: Vec<Vec<usize>> = Vec::with_capacity(m);
    // open path length from the depot to the last city
    let mut open = Vec::with_capacity(m);
    for s in seeds.iter() {
        let c = s + 1;
        routed[c] = true;
        tours.push(vec![c]);
        open.push(inst.dist(DEPOT, c));
    }
    let mut remaining = n - m;
    while remaining > 0 {
        let mut r = 0;
        let mut best_len = f64::INFINITY;
        for t in 0..m {
            let last = *tours[t].last().unwrap();
            let len = open[t] + inst.dist(last, DEPOT);
            if len < best_len - EPS {
                best_len = len;
                r = t;
            }
        }
        let v = *tours[r].last().unwrap();
        let increase = |u: usize| inst.dist(v, u) + inst.dist(u, DEPOT) - inst.dist(v, DEPOT);
        let mut pick = pick_least(nb.of(v).iter().copied().filter(|&u| u != DEPOT && !routed[u]), increase);
        if pick.is_none() {
            pick = pick_least((1..=n).filter(|&u| !routed[u]), increase);
        }
        let u = pick.expect("an unrouted city exists");
        routed[u] = true;
        open[r] += inst.dist(v, u);
        tours[r].push(u);
        remaining -= 1;
    }
    Solution::from_tours(inst, tours)
}

fn pick_least(cands: impl Iterator<Item = usize>, cost: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for u in cands {
        let c = cost(u);
        best = match best {
            None => Some((c, u)),
            Some((bc, bu)) => {
                if c < bc - EPS || ((c - bc).abs() <= EPS && u < bu) {
                    Some((c, u))
                } else {
                    Some((bc, bu))
                }
            }
        };
    }
    best.map(|(_, u)| u)
}

/// Solution file: a header `NAME m OBJECTIVE` followed by one line of
/// space-separated city indices per tour.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub name: String,
    pub m: usize,
    pub objective: f64,
    pub tours: Vec<Vec<usize>>,
}

impl SolutionFile {
    pub fn from_solution(name: &str, sol: &Solution) -> Self {
        let name = if name.is_empty() { "unnamed" } else { name };
        Self {
            name: name.split_whitespace().collect::<Vec<_>>().join("_"),
            m: sol.num_tours(),
            objective: sol.makespan(),
            tours: sol.tours().to_vec(),
        }
    }

    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| ParseError::new(1, "empty solution file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(ParseError::new(1, "header must be `NAME m OBJECTIVE`"));
        }
        let m: usize = fields[1]
            .parse()
            .map_err(|_| ParseError::new(1, format!("invalid tour count `{}`", fields[1])))?;
        let objective: f64 = fields[2]
            .parse()
            .map_err(|_| ParseError::new(1, format!("invalid objective `{}`", fields[2])))?;
        let mut tours = Vec::with_capacity(m);
        for (idx, line) in lines {
            let tour = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| {
                        ParseError::new(idx + 1, format!("invalid city index `{tok}`"))
                    })
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            tours.push(tour);
        }
        // a trailing newline is not an extra (empty) tour
        while tours.len() > m && tours.last().is_some_and(|t| t.is_empty()) {
            tours.pop();
        }
        Ok(Self {
            name: fields[0].to_string(),
            m,
            objective,
            tours,
        })
    }
}

impl fmt::Display for SolutionFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.name, self.m, self.objective)?;
        for tour in &self.tours {
            let line: Vec<String> = tour.iter().map(|c| c.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}
