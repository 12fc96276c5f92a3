//! Granular variable neighborhood descent over the ten move operators
//! M1–M10, with O(1) move evaluation and don't-look bits.

use std::fmt;

use crate::error::{Error, Result};
use crate::instance::{Instance, NeighborList, DEPOT};
use crate::solution::{Solution, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
    M9,
    M10,
}

impl MoveKind {
    pub const ALL: [MoveKind; 10] = [
        MoveKind::M1,
        MoveKind::M2,
        MoveKind::M3,
        MoveKind::M4,
        MoveKind::M5,
        MoveKind::M6,
        MoveKind::M7,
        MoveKind::M8,
        MoveKind::M9,
        MoveKind::M10,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Whether the operator accepts the depot as its `v` vertex.
    fn depot_target(self, tu: usize, t: usize) -> bool {
        match self {
            MoveKind::M1 | MoveKind::M2 | MoveKind::M3 => true,
            MoveKind::M8 => t == tu,
            MoveKind::M9 | MoveKind::M10 => t != tu,
            _ => false,
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.index() + 1)
    }
}

/// The `v` side of a move. The depot occurs in every tour, so a depot
/// target names the tour it refers to; its successor is the tour's first
/// city and, for M3, "before the depot" means the end of that tour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    City(usize),
    Depot { tour: usize },
}

impl Target {
    pub fn vertex(self) -> usize {
        match self {
            Target::City(v) => v,
            Target::Depot { .. } => DEPOT,
        }
    }

    fn key(self) -> (usize, usize) {
        match self {
            Target::City(v) => (v, 0),
            Target::Depot { tour } => (DEPOT, tour),
        }
    }
}

/// An evaluated move. Lengths and positions are those of the solution it
/// was evaluated against.
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub kind: MoveKind,
    pub u: usize,
    pub target: Target,
    pub x: usize,
    pub y: usize,
    pub tu: usize,
    pub tv: usize,
    pub pu: usize,
    /// Position of `v` in `tv`; `-1` for a depot target.
    pub pv: isize,
    /// Tour lengths of `tu` and `tv` before the move.
    pub old_len: [f64; 2],
    /// Tour lengths of `tu` and `tv` after the move.
    pub new_len: [f64; 2],
    /// Change of the longest affected tour.
    pub delta_metric: f64,
    /// Change of the summed length of the affected tours.
    pub delta_total: f64,
    sizes: [usize; 2],
}

impl Move {
    pub fn v(&self) -> usize {
        self.target.vertex()
    }

    pub fn is_intra(&self) -> bool {
        self.tu == self.tv
    }

    pub fn is_improving(&self) -> bool {
        self.delta_metric < -EPS
    }

    pub fn affected_tours(&self) -> Vec<usize> {
        if self.is_intra() {
            vec![self.tu]
        } else {
            vec![self.tu, self.tv]
        }
    }

    /// True if `self` should be preferred over `other` in a best-improvement scan.
    pub fn beats(&self, other: &Move) -> bool {
        if self.delta_metric < other.delta_metric - EPS {
            return true;
        }
        if self.delta_metric > other.delta_metric + EPS {
            return false;
        }
        if self.delta_total < other.delta_total - EPS {
            return true;
        }
        if self.delta_total > other.delta_total + EPS {
            return false;
        }
        (self.u, self.target.key()) < (other.u, other.target.key())
    }
}

/// Tours overwritten by an applied move, for [`revert`].
#[derive(Debug, Clone)]
pub struct Undo {
    tours: Vec<(usize, Vec<usize>)>,
}

/// Per-city count of participations in applied local-search moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveFrequency {
    counts: Vec<u64>,
}

impl MoveFrequency {
    pub fn new(n: usize) -> Self {
        Self {
            counts: vec![0; n + 1],
        }
    }

    pub fn get(&self, city: usize) -> u64 {
        self.counts[city]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn record(&mut self, mv: &Move) {
        self.counts[mv.u] += 1;
        if mv.v() != DEPOT {
            self.counts[mv.v()] += 1;
        }
    }

    /// Decay applied at every restart.
    pub fn halve(&mut self) {
        self.counts.iter_mut().for_each(|c| *c /= 2);
    }
}

/// One mask per city; bit `k` is set once neighborhood `k` was scanned for
/// that city without finding an improving move.
#[derive(Debug, Clone)]
pub struct DontLookBits {
    masks: Vec<u16>,
}

impl DontLookBits {
    const FULL: u16 = (1 << 10) - 1;

    pub fn new(n: usize) -> Self {
        Self {
            masks: vec![0; n + 1],
        }
    }

    /// The don't-look bit proper: every neighborhood was scanned clean.
    pub fn is_set(&self, city: usize) -> bool {
        self.masks[city] == Self::FULL
    }

    pub fn is_clean(&self, city: usize, kind: MoveKind) -> bool {
        self.masks[city] & (1 << kind.index()) != 0
    }

    pub fn mark(&mut self, city: usize, kind: MoveKind) {
        self.masks[city] |= 1 << kind.index();
    }

    pub fn clear(&mut self, city: usize) {
        self.masks[city] = 0;
    }

    pub fn clear_all(&mut self) {
        self.masks.iter_mut().for_each(|m| *m = 0);
    }
}

/// Evaluates one move in O(1). Returns `None` when the operator's
/// structural preconditions do not hold.
pub fn evaluate_move(
    inst: &Instance,
    sol: &Solution,
    kind: MoveKind,
    u: usize,
    target: Target,
) -> Option<Move> {
    let (tu, pu) = sol.location(u)?;
    let (tv, pv) = match target {
        Target::City(v) => {
            if v == u || v == DEPOT {
                return None;
            }
            let (t, p) = sol.location(v)?;
            (t, p as isize)
        }
        Target::Depot { tour } => {
            if tour >= sol.num_tours() || !kind.depot_target(tu, tour) {
                return None;
            }
            (tour, -1)
        }
    };
    let v = target.vertex();
    let pui = pu as isize;
    let x = sol.vertex_at(tu, pui + 1);
    let y = sol.vertex_at(tv, pv + 1);
    let intra = tu == tv;
    let nu = sol.tour(tu).len();
    let nv = sol.tour(tv).len();
    let len_u = sol.length(tu);
    let len_v = sol.length(tv);
    let d = |a: usize, b: usize| inst.dist(a, b);
    let is_city_target = matches!(target, Target::City(_));

    let (new_u, new_v) = match kind {
        MoveKind::M1 => {
            if !intra && nu == 1 {
                return None;
            }
            let p = sol.vertex_at(tu, pui - 1);
            let rem = d(p, x) - d(p, u) - d(u, x);
            if intra {
                let y2 = if y == u { x } else { y };
                let l = len_u + rem + d(v, u) + d(u, y2) - d(v, y2);
                (l, l)
            } else {
                (len_u + rem, len_v + d(v, u) + d(u, y) - d(v, y))
            }
        }
        MoveKind::M2 | MoveKind::M3 => {
            if x == DEPOT || v == x || (!intra && nu == 2) {
                return None;
            }
            let p = sol.vertex_at(tu, pui - 1);
            let s = sol.vertex_at(tu, pui + 2);
            let rem = d(p, s) - d(p, u) - d(x, s);
            let ins = if kind == MoveKind::M2 {
                let y2 = if intra && y == u { s } else { y };
                d(v, u) + d(x, y2) - d(v, y2)
            } else {
                let (a, b) = match target {
                    Target::City(_) => (sol.vertex_at(tv, pv - 1), v),
                    Target::Depot { .. } => (sol.vertex_at(tv, nv as isize - 1), DEPOT),
                };
                let a = if intra && a == x { p } else { a };
                d(a, x) + d(u, b) - d(a, b)
            };
            if intra {
                let l = len_u + rem + ins;
                (l, l)
            } else {
                let inner = d(u, x);
                (len_u + rem - inner, len_v + ins + inner)
            }
        }
        MoveKind::M4 | MoveKind::M5 | MoveKind::M6 | MoveKind::M7 => {
            if !is_city_target || x == DEPOT || v == x {
                return None;
            }
            let pv = pv as usize;
            let (a, la, lb) = match kind {
                MoveKind::M4 => (pu + 1, 1, 1),
                MoveKind::M5 => (pu, 2, 1),
                _ => {
                    if y == DEPOT {
                        return None;
                    }
                    (pu, 2, 2)
                }
            };
            let ex = Exchange {
                ta: tu,
                a,
                la,
                tb: tv,
                b: pv,
                lb,
                reverse_a: kind == MoveKind::M7,
            };
            ex.lengths(inst, sol)?
        }
        MoveKind::M8 => {
            if !intra || v == x || y == u {
                return None;
            }
            let l = len_u + d(u, v) + d(x, y) - d(u, x) - d(v, y);
            (l, l)
        }
        MoveKind::M9 => {
            if intra || pv + 1 + (nu - pu - 1) as isize == 0 {
                return None;
            }
            (
                sol.prefix_len(tu, pui) + d(u, y) + sol.suffix_len(tv, pv + 1),
                sol.prefix_len(tv, pv) + d(v, x) + sol.suffix_len(tu, pui + 1),
            )
        }
        MoveKind::M10 => {
            if intra || (nu - pu - 1) as isize + (nv as isize - pv - 1) == 0 {
                return None;
            }
            (
                sol.prefix_len(tu, pui) + d(u, v) + sol.prefix_len(tv, pv),
                sol.suffix_len(tu, pui + 1) + d(x, y) + sol.suffix_len(tv, pv + 1),
            )
        }
    };

    let (delta_metric, delta_total) = if intra {
        (new_u - len_u, new_u - len_u)
    } else {
        (
            new_u.max(new_v) - len_u.max(len_v),
            new_u + new_v - len_u - len_v,
        )
    };
    Some(Move {
        kind,
        u,
        target,
        x,
        y,
        tu,
        tv,
        pu,
        pv,
        old_len: [len_u, len_v],
        new_len: [new_u, new_v],
        delta_metric,
        delta_total,
        sizes: [nu, nv],
    })
}

/// Swap of segment A = `ta[a..a+la]` with B = `tb[b..b+lb]`; B keeps its
/// orientation, A is reversed at B's location if `reverse_a`.
struct Exchange {
    ta: usize,
    a: usize,
    la: usize,
    tb: usize,
    b: usize,
    lb: usize,
    reverse_a: bool,
}

impl Exchange {
    fn ends(&self, sol: &Solution) -> ((usize, usize), (usize, usize)) {
        let ta = sol.tour(self.ta);
        let tb = sol.tour(self.tb);
        let a = (ta[self.a], ta[self.a + self.la - 1]);
        let a = if self.reverse_a { (a.1, a.0) } else { a };
        ((tb[self.b], tb[self.b + self.lb - 1]), a)
    }

    fn lengths(&self, inst: &Instance, sol: &Solution) -> Option<(f64, f64)> {
        let d = |p: usize, q: usize| inst.dist(p, q);
        let (ai, bi) = (self.a as isize, self.b as isize);
        let ((b0, b1), (a0, a1)) = self.ends(sol);
        // (b0, b1): B as placed at A's location; (a0, a1): A as placed at B's.
        let (oa0, oa1) = (sol.tour(self.ta)[self.a], sol.tour(self.ta)[self.a + self.la - 1]);
        if self.ta != self.tb {
            let pa = sol.vertex_at(self.ta, ai - 1);
            let sa = sol.vertex_at(self.ta, ai + self.la as isize);
            let pb = sol.vertex_at(self.tb, bi - 1);
            let sb = sol.vertex_at(self.tb, bi + self.lb as isize);
            let int_a = d(oa0, oa1);
            let int_b = d(b0, b1);
            let new_a =
                sol.length(self.ta) - d(pa, oa0) - int_a - d(oa1, sa) + d(pa, b0) + int_b + d(b1, sa);
            let new_b =
                sol.length(self.tb) - d(pb, b0) - int_b - d(b1, sb) + d(pb, a0) + int_a + d(a1, sb);
            return Some((new_a, new_b));
        }
        let (first_pos, first_len, second_pos, second_len) = if self.a < self.b {
            (self.a, self.la, self.b, self.lb)
        } else {
            (self.b, self.lb, self.a, self.la)
        };
        if first_pos + first_len > second_pos {
            return None;
        }
        let t = self.ta;
        let tour = sol.tour(t);
        let (f0, f1) = (tour[first_pos], tour[first_pos + first_len - 1]);
        let (s0, s1) = (tour[second_pos], tour[second_pos + second_len - 1]);
        // content placed at the first and at the second location
        let (x0, x1, y0, y1) = if self.a < self.b {
            (b0, b1, a0, a1)
        } else {
            (a0, a1, b0, b1)
        };
        let pf = sol.vertex_at(t, first_pos as isize - 1);
        let ss = sol.vertex_at(t, (second_pos + second_len) as isize);
        let delta = if first_pos + first_len == second_pos {
            d(pf, x0) + d(x1, y0) + d(y1, ss) - d(pf, f0) - d(f1, s0) - d(s1, ss)
        } else {
            let sf = sol.vertex_at(t, (first_pos + first_len) as isize);
            let ps = sol.vertex_at(t, second_pos as isize - 1);
            d(pf, x0) + d(x1, sf) + d(ps, y0) + d(y1, ss)
                - d(pf, f0)
                - d(f1, sf)
                - d(ps, s0)
                - d(s1, ss)
        };
        let l = sol.length(t) + delta;
        Some((l, l))
    }

    fn apply(&self, sol: &Solution) -> Vec<(usize, Vec<usize>)> {
        let ta = sol.tour(self.ta);
        let tb = sol.tour(self.tb);
        let seg_b: Vec<usize> = tb[self.b..self.b + self.lb].to_vec();
        let mut seg_a: Vec<usize> = ta[self.a..self.a + self.la].to_vec();
        if self.reverse_a {
            seg_a.reverse();
        }
        if self.ta != self.tb {
            let mut na = Vec::with_capacity(ta.len() + self.lb);
            na.extend_from_slice(&ta[..self.a]);
            na.extend_from_slice(&seg_b);
            na.extend_from_slice(&ta[self.a + self.la..]);
            let mut nb = Vec::with_capacity(tb.len() + self.la);
            nb.extend_from_slice(&tb[..self.b]);
            nb.extend_from_slice(&seg_a);
            nb.extend_from_slice(&tb[self.b + self.lb..]);
            return vec![(self.ta, na), (self.tb, nb)];
        }
        let (first, flen, xs, second, slen, ys) = if self.a < self.b {
            (self.a, self.la, seg_b, self.b, self.lb, seg_a)
        } else {
            (self.b, self.lb, seg_a, self.a, self.la, seg_b)
        };
        let mut t = Vec::with_capacity(ta.len());
        t.extend_from_slice(&ta[..first]);
        t.extend_from_slice(&xs);
        t.extend_from_slice(&ta[first + flen..second]);
        t.extend_from_slice(&ys);
        t.extend_from_slice(&ta[second + slen..]);
        vec![(self.ta, t)]
    }
}

fn check_fresh(sol: &Solution, mv: &Move) -> Result<()> {
    let stale = |what: &str| Err(Error::StaleMove(format!("{} on city {}: {what}", mv.kind, mv.u)));
    if mv.tu >= sol.num_tours() || mv.tv >= sol.num_tours() {
        return stale("tour index out of range");
    }
    if sol.location(mv.u) != Some((mv.tu, mv.pu)) {
        return stale("u moved");
    }
    if let Target::City(v) = mv.target {
        if sol.location(v) != Some((mv.tv, mv.pv as usize)) {
            return stale("v moved");
        }
    }
    if sol.tour(mv.tu).len() != mv.sizes[0] || sol.tour(mv.tv).len() != mv.sizes[1] {
        return stale("tour size changed");
    }
    if sol.length(mv.tu).to_bits() != mv.old_len[0].to_bits()
        || sol.length(mv.tv).to_bits() != mv.old_len[1].to_bits()
    {
        return stale("tour length changed");
    }
    if sol.vertex_at(mv.tu, mv.pu as isize + 1) != mv.x || sol.vertex_at(mv.tv, mv.pv + 1) != mv.y {
        return stale("successor changed");
    }
    Ok(())
}

fn new_tours(sol: &Solution, mv: &Move) -> Vec<(usize, Vec<usize>)> {
    let (tu, tv, pu, pv) = (mv.tu, mv.tv, mv.pu, mv.pv);
    let ru = sol.tour(tu);
    let rv = sol.tour(tv);
    let u = mv.u;
    match mv.kind {
        MoveKind::M1 | MoveKind::M2 | MoveKind::M3 => {
            let seg: Vec<usize> = match mv.kind {
                MoveKind::M1 => vec![u],
                MoveKind::M2 => vec![u, mv.x],
                _ => vec![mv.x, u],
            };
            let removed = if mv.kind == MoveKind::M1 { 1 } else { 2 };
            let mut src = ru.to_vec();
            src.drain(pu..pu + removed);
            // index in the post-removal target tour where the segment goes
            let anchor = |t: &Vec<usize>| -> usize {
                match (mv.kind, mv.target) {
                    (MoveKind::M3, Target::Depot { .. }) => t.len(),
                    (_, Target::Depot { .. }) => 0,
                    (kind, Target::City(v)) => {
                        let p = t.iter().position(|&c| c == v).expect("target in tour");
                        if kind == MoveKind::M3 {
                            p
                        } else {
                            p + 1
                        }
                    }
                }
            };
            if tu == tv {
                let at = anchor(&src);
                src.splice(at..at, seg);
                vec![(tu, src)]
            } else {
                let mut dst = rv.to_vec();
                let at = anchor(&dst);
                dst.splice(at..at, seg);
                vec![(tu, src), (tv, dst)]
            }
        }
        MoveKind::M4 | MoveKind::M5 | MoveKind::M6 | MoveKind::M7 => {
            let (a, la, lb) = match mv.kind {
                MoveKind::M4 => (pu + 1, 1, 1),
                MoveKind::M5 => (pu, 2, 1),
                _ => (pu, 2, 2),
            };
            Exchange {
                ta: tu,
                a,
                la,
                tb: tv,
                b: pv as usize,
                lb,
                reverse_a: mv.kind == MoveKind::M7,
            }
            .apply(sol)
        }
        MoveKind::M8 => {
            let mut t = ru.to_vec();
            let pv = pv;
            if (pu as isize) < pv {
                t[pu + 1..=pv as usize].reverse();
            } else {
                t[(pv + 1) as usize..=pu].reverse();
            }
            vec![(tu, t)]
        }
        MoveKind::M9 => {
            let cut = (pv + 1) as usize;
            let mut nu: Vec<usize> = ru[..=pu].to_vec();
            nu.extend_from_slice(&rv[cut..]);
            let mut nv: Vec<usize> = rv[..cut].to_vec();
            nv.extend_from_slice(&ru[pu + 1..]);
            vec![(tu, nu), (tv, nv)]
        }
        MoveKind::M10 => {
            let cut = (pv + 1) as usize;
            let mut nu: Vec<usize> = ru[..=pu].to_vec();
            nu.extend(rv[..cut].iter().rev());
            let mut nv: Vec<usize> = ru[pu + 1..].iter().rev().copied().collect();
            nv.extend_from_slice(&rv[cut..]);
            vec![(tu, nu), (tv, nv)]
        }
    }
}

/// Applies an evaluated move. Fails with [`Error::StaleMove`] if the
/// solution changed since evaluation.
pub fn apply_move(inst: &Instance, sol: &mut Solution, mv: &Move) -> Result<Undo> {
    check_fresh(sol, mv)?;
    let updates = new_tours(sol, mv);
    let undo = Undo {
        tours: updates
            .iter()
            .map(|(t, _)| (*t, sol.tour(*t).to_vec()))
            .collect(),
    };
    sol.replace_tours(inst, updates);
    Ok(undo)
}

/// Restores the tours overwritten by [`apply_move`].
pub fn revert(inst: &Instance, sol: &mut Solution, undo: Undo) {
    sol.replace_tours(inst, undo.tours);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    BestImprovement,
    FirstImprovement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalSearchConfig {
    pub strategy: Strategy,
    /// Go back to M1 after every applied move.
    pub restart_vnd: bool,
    pub dont_look_bits: bool,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::BestImprovement,
            restart_vnd: true,
            dont_look_bits: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocalSearchStats {
    pub moves: [u64; 10],
    pub evaluations: u64,
    pub verification_sweeps: u64,
}

impl LocalSearchStats {
    pub fn moves_applied(&self) -> u64 {
        self.moves.iter().sum()
    }
}

/// Reusable local-search state.
#[derive(Debug, Clone)]
pub struct LocalSearch {
    pub config: LocalSearchConfig,
    bits: DontLookBits,
    links: Vec<(usize, usize)>,
}

impl LocalSearch {
    pub fn new(n: usize, config: LocalSearchConfig) -> Self {
        Self {
            config,
            bits: DontLookBits::new(n),
            links: vec![(DEPOT, DEPOT); n + 1],
        }
    }

    /// Runs the descent to a local optimum of all ten neighborhoods.
    pub fn run(
        &mut self,
        inst: &Instance,
        nb: &NeighborList,
        sol: &mut Solution,
        freq: &mut MoveFrequency,
    ) -> LocalSearchStats {
        let n = inst.num_cities();
        if self.bits.masks.len() != n + 1 {
            self.bits = DontLookBits::new(n);
            self.links = vec![(DEPOT, DEPOT); n + 1];
        }
        self.bits.clear_all();
        let mut stats = LocalSearchStats::default();
        loop {
            let mut applied_in_pass = false;
            let mut skipped = false;
            let mut k = 0;
            while k < MoveKind::ALL.len() {
                let kind = MoveKind::ALL[k];
                let (found, sk) = self.scan(inst, nb, sol, kind, &mut stats);
                skipped |= sk;
                match found {
                    Some(mv) => {
                        self.apply(inst, sol, &mv, freq);
                        stats.moves[k] += 1;
                        if self.config.restart_vnd {
                            k = 0;
                            skipped = false;
                        } else {
                            applied_in_pass = true;
                        }
                    }
                    None => k += 1,
                }
            }
            if applied_in_pass {
                continue;
            }
            if !skipped {
                break;
            }
            // some cities were skipped: confirm the fixed point without masks
            stats.verification_sweeps += 1;
            self.bits.clear_all();
        }
        stats
    }

    fn scan(
        &mut self,
        inst: &Instance,
        nb: &NeighborList,
        sol: &Solution,
        kind: MoveKind,
        stats: &mut LocalSearchStats,
    ) -> (Option<Move>, bool) {
        let first = self.config.strategy == Strategy::FirstImprovement;
        let mut best: Option<Move> = None;
        let mut skipped = false;
        for u in 1..=inst.num_cities() {
            if self.config.dont_look_bits && self.bits.is_clean(u, kind) {
                skipped = true;
                continue;
            }
            let Some(tu) = sol.tour_of(u) else { continue };
            let mut improved = false;
            for &v in nb.of(u) {
                let mut consider = |target: Target| -> bool {
                    stats.evaluations += 1;
                    if let Some(mv) = evaluate_move(inst, sol, kind, u, target) {
                        if mv.is_improving() {
                            improved = true;
                            if best.as_ref().map_or(true, |b| mv.beats(b)) {
                                best = Some(mv);
                            }
                            return first;
                        }
                    }
                    false
                };
                if v == DEPOT {
                    for t in 0..sol.num_tours() {
                        if kind.depot_target(tu, t) && consider(Target::Depot { tour: t }) {
                            return (best, skipped);
                        }
                    }
                } else if consider(Target::City(v)) {
                    return (best, skipped);
                }
            }
            if !improved {
                self.bits.mark(u, kind);
            }
        }
        (best, skipped)
    }

    fn apply(&mut self, inst: &Instance, sol: &mut Solution, mv: &Move, freq: &mut MoveFrequency) {
        let tours = mv.affected_tours();
        for &t in &tours {
            let tour = sol.tour(t);
            for (p, &c) in tour.iter().enumerate() {
                self.links[c] = (sol.vertex_at(t, p as isize - 1), sol.vertex_at(t, p as isize + 1));
            }
        }
        apply_move(inst, sol, mv).expect("freshly evaluated move");
        freq.record(mv);
        for &t in &tours {
            let tour = sol.tour(t);
            for (p, &c) in tour.iter().enumerate() {
                let now = (sol.vertex_at(t, p as isize - 1), sol.vertex_at(t, p as isize + 1));
                if now != self.links[c] {
                    self.bits.clear(c);
                }
            }
        }
        self.bits.clear(mv.u);
        if mv.v() != DEPOT {
            self.bits.clear(mv.v());
        }
    }
}

/// Runs the descent with a fresh workspace.
pub fn local_search(
    inst: &Instance,
    nb: &NeighborList,
    sol: &mut Solution,
    freq: &mut MoveFrequency,
    config: LocalSearchConfig,
) -> LocalSearchStats {
    LocalSearch::new(inst.num_cities(), config).run(inst, nb, sol, freq)
}

/// All targets an operator can pair with `u` when `v` is drawn from its
/// candidate list.
pub fn targets_for(sol: &Solution, kind: MoveKind, u: usize, v: usize) -> Vec<Target> {
    if v != DEPOT {
        return vec![Target::City(v)];
    }
    let Some(tu) = sol.tour_of(u) else {
        return Vec::new();
    };
    (0..sol.num_tours())
        .filter(|&t| kind.depot_target(tu, t))
        .map(|tour| Target::Depot { tour })
        .collect()
}
