//! Problem instances: coordinates, metrics, TSPLIB I/O and granular
//! neighbor lists.
//!
//! Vertex `0` is always the depot; vertices `1..=n` are the cities, so a city
//! index doubles as its vertex index everywhere in the crate.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};

/// Above this many vertices distances are computed on demand.
pub const MATRIX_LIMIT: usize = 3000;

/// The depot vertex.
pub const DEPOT: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Edge cost function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Unrounded Euclidean distance.
    RealEuclidean,
    /// Euclidean distance rounded to the nearest integer (TSPLIB `EUC_2D`).
    RoundedEuclidean,
    /// Euclidean distance rounded up (TSPLIB `CEIL_2D`).
    CeilEuclidean,
    /// TSPLIB pseudo-Euclidean `ATT` distance.
    Att,
}

impl Metric {
    #[inline]
    pub fn eval(self, a: Point, b: Point) -> f64 {
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        match self {
            Metric::RealEuclidean => (dx * dx + dy * dy).sqrt(),
            Metric::RoundedEuclidean => (dx * dx + dy * dy).sqrt().round(),
            Metric::CeilEuclidean => (dx * dx + dy * dy).sqrt().ceil(),
            Metric::Att => {
                let r = ((dx * dx + dy * dy) / 10.0).sqrt();
                let t = r.round();
                if t < r {
                    t + 1.0
                } else {
                    t
                }
            }
        }
    }

    /// The TSPLIB `EDGE_WEIGHT_TYPE` used when writing an instance.
    pub fn tsplib_name(self) -> &'static str {
        match self {
            Metric::RealEuclidean | Metric::RoundedEuclidean => "EUC_2D",
            Metric::CeilEuclidean => "CEIL_2D",
            Metric::Att => "ATT",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::RealEuclidean => "real",
            Metric::RoundedEuclidean => "rounded",
            Metric::CeilEuclidean => "ceil",
            Metric::Att => "att",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "real_euclidean" | "euclidean" => Ok(Metric::RealEuclidean),
            "rounded" | "rounded_euclidean" | "round" => Ok(Metric::RoundedEuclidean),
            "ceil" | "ceil_euclidean" => Ok(Metric::CeilEuclidean),
            "att" => Ok(Metric::Att),
            other => Err(Error::InvalidArgument(format!("unknown metric `{other}`"))),
        }
    }
}

/// A minmax mTSP instance over the vertex set `{depot} ∪ cities`.
#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    points: Vec<Point>,
    metric: Metric,
    matrix: Option<Vec<f64>>,
}

impl Instance {
    /// Builds an instance from a depot and the city coordinates.
    pub fn new(
        name: impl Into<String>,
        depot: Point,
        cities: Vec<Point>,
        metric: Metric,
    ) -> Result<Self> {
        if cities.is_empty() {
            return Err(Error::InvalidArgument(
                "an instance needs at least one city".into(),
            ));
        }
        let mut points = Vec::with_capacity(cities.len() + 1);
        points.push(depot);
        points.extend(cities);
        if let Some(i) = points
            .iter()
            .position(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "vertex {i} has a non-finite coordinate"
            )));
        }
        let mut inst = Self {
            name: name.into(),
            points,
            metric,
            matrix: None,
        };
        inst.build_matrix();
        Ok(inst)
    }

    fn build_matrix(&mut self) {
        let nv = self.points.len();
        if nv > MATRIX_LIMIT {
            self.matrix = None;
            return;
        }
        let mut m = vec![0.0; nv * nv];
        for i in 0..nv {
            for j in (i + 1)..nv {
                let d = self.metric.eval(self.points[i], self.points[j]);
                m[i * nv + j] = d;
                m[j * nv + i] = d;
            }
        }
        self.matrix = Some(m);
    }

    /// Same coordinates under a different metric.
    pub fn with_metric(&self, metric: Metric) -> Self {
        let mut inst = Self {
            name: self.name.clone(),
            points: self.points.clone(),
            metric,
            matrix: None,
        };
        inst.build_matrix();
        inst
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Number of cities `n` (the depot is not counted).
    pub fn num_cities(&self) -> usize {
        self.points.len() - 1
    }

    /// Number of vertices, `n + 1`.
    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn depot(&self) -> Point {
        self.points[DEPOT]
    }

    pub fn point(&self, v: usize) -> Point {
        self.points[v]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Distance between two vertices. Panics on out-of-range indices.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.matrix {
            Some(m) => m[i * self.points.len() + j],
            None => {
                if i == j {
                    0.0
                } else {
                    self.metric.eval(self.points[i], self.points[j])
                }
            }
        }
    }

    /// Checked variant of [`Instance::dist`].
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        let nv = self.points.len();
        if i >= nv || j >= nv {
            return Err(Error::VertexOutOfRange {
                vertex: i.max(j),
                vertices: nv,
            });
        }
        Ok(self.dist(i, j))
    }

    /// Length of the closed depot-anchored tour visiting `cities` in order.
    pub fn tour_length(&self, cities: &[usize]) -> f64 {
        let mut prev = DEPOT;
        let mut len = 0.0;
        for &c in cities {
            len += self.dist(prev, c);
            prev = c;
        }
        if prev != DEPOT {
            len += self.dist(prev, DEPOT);
        }
        len
    }

    /// Uniform random instance on `[0, width]²`, depot included.
    pub fn generate_random(n: usize, width: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidArgument("width must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sample = || Point::new(rng.gen_range(0.0..=width), rng.gen_range(0.0..=width));
        let depot = sample();
        let cities = (0..n).map(|_| sample()).collect();
        Self::new(
            format!("rand{n}-s{seed}"),
            depot,
            cities,
            Metric::RealEuclidean,
        )
    }

    /// Parses the TSPLIB subset: `NODE_COORD_SECTION` with `EUC_2D`, `ATT`
    /// or `CEIL_2D`. The first node becomes the depot.
    pub fn parse_tsplib(text: &str) -> std::result::Result<Self, ParseError> {
        Self::parse_tsplib_with(text, None)
    }

    /// Like [`Instance::parse_tsplib`], optionally overriding the metric.
    pub fn parse_tsplib_with(
        text: &str,
        metric: Option<Metric>,
    ) -> std::result::Result<Self, ParseError> {
        let mut name = String::from("unnamed");
        let mut dimension: Option<usize> = None;
        let mut weight_type: Option<Metric> = None;
        let mut coords: Vec<Point> = Vec::new();
        let mut in_coords = false;
        let mut section_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line == "EOF" {
                break;
            }
            if in_coords {
                let fields: Vec<&str> = line.split_whitespace().collect();
                let numeric = fields.first().is_some_and(|f| f.parse::<f64>().is_ok());
                if !numeric {
                    // another section starts; coordinates are finished
                    in_coords = false;
                } else {
                    if fields.len() != 3 {
                        return Err(ParseError::new(
                            lineno,
                            format!("expected `id x y`, found `{line}`"),
                        ));
                    }
                    let x = parse_num(fields[1], lineno)?;
                    let y = parse_num(fields[2], lineno)?;
                    coords.push(Point::new(x, y));
                    continue;
                }
            }
            if line.starts_with("NODE_COORD_SECTION") {
                in_coords = true;
                section_line = lineno;
                continue;
            }
            let (key, value) = match line.split_once(':') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => {
                    let mut it = line.splitn(2, char::is_whitespace);
                    (it.next().unwrap_or(""), it.next().unwrap_or("").trim())
                }
            };
            match key {
                "NAME" => name = value.to_string(),
                "DIMENSION" => {
                    dimension = Some(value.parse().map_err(|_| {
                        ParseError::new(lineno, format!("invalid DIMENSION `{value}`"))
                    })?)
                }
                "EDGE_WEIGHT_TYPE" => {
                    weight_type = Some(match value {
                        "EUC_2D" => Metric::RealEuclidean,
                        "ATT" => Metric::Att,
                        "CEIL_2D" => Metric::CeilEuclidean,
                        other => {
                            return Err(ParseError::new(
                                lineno,
                                format!("unsupported EDGE_WEIGHT_TYPE `{other}`"),
                            ))
                        }
                    })
                }
                "TYPE" | "COMMENT" | "NODE_COORD_TYPE" | "DISPLAY_DATA_TYPE" => {}
                "EDGE_WEIGHT_SECTION" | "EDGE_WEIGHT_FORMAT" => {
                    return Err(ParseError::new(
                        lineno,
                        "explicit edge weights are not supported",
                    ))
                }
                other => {
                    return Err(ParseError::new(
                        lineno,
                        format!("unrecognized header line `{other}`"),
                    ))
                }
            }
        }

        let last = text.lines().count().max(1);
        let dimension =
            dimension.ok_or_else(|| ParseError::new(last, "missing DIMENSION"))?;
        let weight_type =
            weight_type.ok_or_else(|| ParseError::new(last, "missing EDGE_WEIGHT_TYPE"))?;
        if section_line == 0 {
            return Err(ParseError::new(last, "missing NODE_COORD_SECTION"));
        }
        if coords.len() != dimension {
            return Err(ParseError::new(
                section_line,
                format!(
                    "DIMENSION is {dimension} but {} coordinate lines were found",
                    coords.len()
                ),
            ));
        }
        if dimension < 2 {
            return Err(ParseError::new(
                section_line,
                "need a depot and at least one city",
            ));
        }
        let depot = coords[0];
        let cities = coords[1..].to_vec();
        Instance::new(name, depot, cities, metric.unwrap_or(weight_type))
            .map_err(|e| ParseError::new(section_line, e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>, metric: Option<Metric>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse_tsplib_with(&text, metric)?)
    }

    /// TSPLIB text; node 1 is the depot.
    pub fn to_tsplib(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME : {}", self.name);
        let _ = writeln!(out, "TYPE : TSP");
        let _ = writeln!(out, "DIMENSION : {}", self.points.len());
        let _ = writeln!(out, "EDGE_WEIGHT_TYPE : {}", self.metric.tsplib_name());
        let _ = writeln!(out, "NODE_COORD_SECTION");
        for (i, p) in self.points.iter().enumerate() {
            let _ = writeln!(out, "{} {} {}", i + 1, p.x, p.y);
        }
        out.push_str("EOF\n");
        out
    }
}

fn parse_num(s: &str, line: usize) -> std::result::Result<f64, ParseError> {
    let v: f64 = s
        .parse()
        .map_err(|_| ParseError::new(line, format!("invalid number `{s}`")))?;
    if !v.is_finite() {
        return Err(ParseError::new(line, format!("non-finite coordinate `{s}`")));
    }
    Ok(v)
}

/// Per-vertex lists of the `alpha` nearest other vertices, nearest first,
/// ties broken by vertex index.
#[derive(Debug, Clone)]
pub struct NeighborList {
    alpha: usize,
    width: usize,
    lists: Vec<usize>,
}

impl NeighborList {
    pub fn build(inst: &Instance, alpha: usize) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidArgument("alpha must be at least 1".into()));
        }
        let nv = inst.num_vertices();
        let width = alpha.min(nv - 1);
        let mut lists = Vec::with_capacity(nv * width);
        let mut buf: Vec<(f64, usize)> = Vec::with_capacity(nv);
        for i in 0..nv {
            buf.clear();
            buf.extend((0..nv).filter(|&j| j != i).map(|j| (inst.dist(i, j), j)));
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if width < buf.len() {
                buf.select_nth_unstable_by(width - 1, cmp);
                buf.truncate(width);
            }
            buf.sort_unstable_by(cmp);
            lists.extend(buf.iter().map(|&(_, j)| j));
        }
        Ok(Self {
            alpha,
            width,
            lists,
        })
    }

    /// Requested granularity.
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// Effective list length, `min(alpha, |V| - 1)`.
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn of(&self, v: usize) -> &[usize] {
        &self.lists[v * self.width..(v + 1) * self.width]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "NAME : tiny\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 4\n3 0 8\nEOF\n";

    #[test]
    fn parses_minimal_file() {
        let inst = Instance::parse_tsplib(TINY).unwrap();
        assert_eq!(inst.name(), "tiny");
        assert_eq!(inst.num_cities(), 2);
        assert_eq!(inst.depot(), Point::new(0.0, 0.0));
        assert_eq!(inst.metric(), Metric::RealEuclidean);
        assert_eq!(inst.dist(0, 1), 5.0);
    }

    #[test]
    fn dimension_mismatch_names_line() {
        let text = "NAME: bad\nDIMENSION: 5\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\n3 2 2\n4 3 3\nEOF\n";
        let err = Instance::parse_tsplib(text).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("DIMENSION is 5"));
    }

    #[test]
    fn malformed_inputs() {
        let no_dim = "NAME: x\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\n";
        assert!(Instance::parse_tsplib(no_dim)
            .unwrap_err()
            .message
            .contains("DIMENSION"));
        let bad_coord = "DIMENSION: 2\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 zz\n";
        assert_eq!(Instance::parse_tsplib(bad_coord).unwrap_err().line, 5);
        let explicit = "DIMENSION: 2\nEDGE_WEIGHT_TYPE: EXPLICIT\n";
        assert_eq!(Instance::parse_tsplib(explicit).unwrap_err().line, 2);
        let garbage = "DIMENSION: 2\nWHATEVER 3\n";
        assert_eq!(Instance::parse_tsplib(garbage).unwrap_err().line, 2);
    }

    #[test]
    fn metric_defaults_and_override() {
        let att = TINY.replace("EUC_2D", "ATT");
        assert_eq!(Instance::parse_tsplib(&att).unwrap().metric(), Metric::Att);
        let ceil = TINY.replace("EUC_2D", "CEIL_2D");
        assert_eq!(
            Instance::parse_tsplib(&ceil).unwrap().metric(),
            Metric::CeilEuclidean
        );
        let ov = Instance::parse_tsplib_with(TINY, Some(Metric::RoundedEuclidean)).unwrap();
        assert_eq!(ov.metric(), Metric::RoundedEuclidean);
    }

    #[test]
    fn att_distance_hand_value() {
        // r = sqrt(25 / 10) ~ 1.5811, t = 2 > r
        let d = Metric::Att.eval(Point::new(0.0, 0.0), Point::new(3.0, 4.0));
        assert_eq!(d, 2.0);
        // r = sqrt(1000 / 10) = 10 exactly
        let d = Metric::Att.eval(Point::new(0.0, 0.0), Point::new(10.0, 30.0));
        assert_eq!(d, 10.0);
        // r = sqrt(10.1) ~ 3.178, t = 3 < r
        let d = Metric::Att.eval(Point::new(0.0, 0.0), Point::new(1.0, 10.0));
        assert_eq!(d, 4.0);
    }

    #[test]
    fn rounded_and_identity() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 1.0);
        assert_eq!(Metric::RoundedEuclidean.eval(a, b), 1.0);
        assert_eq!(Metric::CeilEuclidean.eval(a, b), 2.0);
        for m in [
            Metric::RealEuclidean,
            Metric::RoundedEuclidean,
            Metric::CeilEuclidean,
            Metric::Att,
        ] {
            assert_eq!(m.eval(b, b), 0.0);
        }
    }

    #[test]
    fn distance_checks_range() {
        let inst = Instance::parse_tsplib(TINY).unwrap();
        assert!(inst.distance(0, 3).is_err());
        assert_eq!(inst.distance(2, 2).unwrap(), 0.0);
    }

    #[test]
    fn generator_is_deterministic_and_in_range() {
        let a = Instance::generate_random(6, 100.0, 1).unwrap();
        let b = Instance::generate_random(6, 100.0, 1).unwrap();
        assert_eq!(a.points(), b.points());
        let big = Instance::generate_random(100, 1000.0, 7).unwrap();
        assert_eq!(big.num_cities(), 100);
        assert!(big
            .points()
            .iter()
            .all(|p| (0.0..=1000.0).contains(&p.x) && (0.0..=1000.0).contains(&p.y)));
        assert!(Instance::generate_random(0, 10.0, 1).is_err());
    }

    #[test]
    fn tsplib_round_trip_keeps_coordinates() {
        let a = Instance::generate_random(20, 1000.0, 3).unwrap();
        let b = Instance::parse_tsplib(&a.to_tsplib()).unwrap();
        assert_eq!(a.points(), b.points());
        assert_eq!(b.metric(), Metric::RealEuclidean);
    }

    #[test]
    fn collinear_neighbors() {
        // depot at 0, cities at 1, 2, 3 on a line
        let inst = Instance::new(
            "line",
            Point::new(0.0, 0.0),
            vec![Point::new(1.0, 0.0), Point::new(2.0, 0.0), Point::new(3.0, 0.0)],
            Metric::RealEuclidean,
        )
        .unwrap();
        let nb = NeighborList::build(&inst, 2).unwrap();
        assert_eq!(nb.of(0), &[1, 2]);
        assert_eq!(nb.of(3), &[2, 1]);
        // vertex 1 has two neighbors at distance 1: lower index first
        assert_eq!(nb.of(1), &[0, 2]);
        let clamped = NeighborList::build(&inst, 10).unwrap();
        assert_eq!(clamped.width(), 3);
        assert!(NeighborList::build(&inst, 0).is_err());
    }

    #[test]
    fn alpha_one_picks_closest() {
        let inst = Instance::new(
            "tri",
            Point::new(0.0, 0.0),
            vec![Point::new(10.0, 0.0), Point::new(0.0, 3.0)],
            Metric::RealEuclidean,
        )
        .unwrap();
        let nb = NeighborList::build(&inst, 1).unwrap();
        assert_eq!(nb.of(0), &[2]);
        // d(1, 2) = sqrt(109) > d(1, 0) = 10
        assert_eq!(nb.of(1), &[0]);
        assert_eq!(nb.of(2), &[0]);
    }
}
