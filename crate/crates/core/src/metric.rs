//! Metric spaces and the distance primitives every other module consumes.
//!
//! Five kinds of space are supported. Euclidean and rectilinear spaces have
//! continuous point sets; explicit-matrix and graph-metric spaces are finite
//! metric spaces; an ambient digraph is not a metric at all but a finite set
//! of weighted arcs that restricts which network edges may exist.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when checking the triangle inequality on
/// floating-point matrices.
const TRIANGLE_SLACK: f64 = 1e-12;

/// A point of a space: either a coordinate vector or an index into the
/// finite point set of the space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Coords(Vec<f64>),
    Vertex(usize),
}

impl Point {
    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Coords(c) => Some(c),
            Point::Vertex(_) => None,
        }
    }

    pub fn vertex(&self) -> Option<usize> {
        match self {
            Point::Vertex(v) => Some(*v),
            Point::Coords(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Euclidean,
    Rectilinear,
    Explicit,
    Graph,
    Ambient,
}

impl SpaceKind {
    /// Spaces whose Steiner points range over a continuum.
    pub fn is_continuous(self) -> bool {
        matches!(self, SpaceKind::Euclidean | SpaceKind::Rectilinear)
    }
}

/// An undirected (graph metric) or directed (ambient digraph) weighted edge
/// between two labelled points, stored by index.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEdge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Euclidean {
        dim: usize,
    },
    Rectilinear {
        dim: usize,
    },
    Explicit {
        labels: Vec<String>,
        distances: Vec<Vec<f64>>,
    },
    Graph {
        labels: Vec<String>,
        edges: Vec<WeightedEdge>,
        shortest: Vec<Vec<f64>>,
    },
    Ambient {
        labels: Vec<String>,
        arcs: BTreeMap<(usize, usize), f64>,
    },
}

/// An immutable space descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct Space {
    repr: Repr,
    index: HashMap<String, usize>,
}

fn label_index(labels: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.clone(), i).is_some() {
            return Err(Error::InvalidSpace(format!("duplicate point label {l:?}")));
        }
    }
    Ok(index)
}

fn check_edges(labels: &[String], edges: &[WeightedEdge], what: &str) -> Result<()> {
    for e in edges {
        if e.from >= labels.len() || e.to >= labels.len() {
            return Err(Error::InvalidSpace(format!(
                "{what} references an unknown point"
            )));
        }
        if e.from == e.to {
            return Err(Error::InvalidSpace(format!(
                "{what} {} -> {} is a self-loop",
                labels[e.from], labels[e.to]
            )));
        }
        if !(e.weight.is_finite() && e.weight > 0.0) {
            return Err(Error::InvalidSpace(format!(
                "{what} {} -> {} has non-positive weight {}",
                labels[e.from], labels[e.to], e.weight
            )));
        }
    }
    Ok(())
}

impl Space {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be positive".into()));
        }
        Ok(Space {
            repr: Repr::Euclidean { dim },
            index: HashMap::new(),
        })
    }

    pub fn rectilinear(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be positive".into()));
        }
        Ok(Space {
            repr: Repr::Rectilinear { dim },
            index: HashMap::new(),
        })
    }

    /// A finite space given by a full distance matrix. The metric axioms are
    /// not enforced here; see [`validate_metric`].
    pub fn explicit(labels: Vec<String>, distances: Vec<Vec<f64>>) -> Result<Self> {
        let index = label_index(&labels)?;
        if labels.is_empty() {
            return Err(Error::InvalidSpace("explicit space has no points".into()));
        }
        if distances.len() != labels.len() || distances.iter().any(|r| r.len() != labels.len()) {
            return Err(Error::InvalidSpace(format!(
                "distance matrix must be {n}x{n}",
                n = labels.len()
            )));
        }
        if distances.iter().flatten().any(|d| !d.is_finite()) {
            return Err(Error::InvalidSpace(
                "distance matrix has non-finite entries".into(),
            ));
        }
        Ok(Space {
            repr: Repr::Explicit { labels, distances },
            index,
        })
    }

    /// The shortest-path metric of a connected, positively weighted,
    /// undirected graph. All-pairs distances are computed once here.
    pub fn graph(labels: Vec<String>, edges: Vec<WeightedEdge>) -> Result<Self> {
        let index = label_index(&labels)?;
        if labels.is_empty() {
            return Err(Error::InvalidSpace("graph space has no vertices".into()));
        }
        check_edges(&labels, &edges, "edge")?;
        let n = labels.len();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for e in &edges {
            let w = e.weight.min(d[e.from][e.to]);
            d[e.from][e.to] = w;
            d[e.to][e.from] = w;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !d[i][j].is_finite() {
                    return Err(Error::InvalidSpace(format!(
                        "graph is disconnected: no path between {} and {}",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(Space {
            repr: Repr::Graph {
                labels,
                edges,
                shortest: d,
            },
            index,
        })
    }

    /// An ambient digraph: network edges are restricted to its arcs and
    /// cost the arc weight.
    pub fn ambient(labels: Vec<String>, arcs: Vec<WeightedEdge>) -> Result<Self> {
        let index = label_index(&labels)?;
        if labels.is_empty() {
            return Err(Error::InvalidSpace(
                "ambient digraph has no vertices".into(),
            ));
        }
        check_edges(&labels, &arcs, "arc")?;
        let mut map = BTreeMap::new();
        for a in arcs {
            if map.insert((a.from, a.to), a.weight).is_some() {
                return Err(Error::InvalidSpace(format!(
                    "duplicate arc {} -> {}",
                    labels[a.from], labels[a.to]
                )));
            }
        }
        Ok(Space {
            repr: Repr::Ambient { labels, arcs: map },
            index,
        })
    }

    pub fn kind(&self) -> SpaceKind {
        match &self.repr {
            Repr::Euclidean { .. } => SpaceKind::Euclidean,
            Repr::Rectilinear { .. } => SpaceKind::Rectilinear,
            Repr::Explicit { .. } => SpaceKind::Explicit,
            Repr::Graph { .. } => SpaceKind::Graph,
            Repr::Ambient { .. } => SpaceKind::Ambient,
        }
    }

    /// Coordinate dimension of a continuous space.
    pub fn dim(&self) -> Option<usize> {
        match &self.repr {
            Repr::Euclidean { dim } | Repr::Rectilinear { dim } => Some(*dim),
            _ => None,
        }
    }

    /// Point labels of a finite space.
    pub fn labels(&self) -> Option<&[String]> {
        match &self.repr {
            Repr::Explicit { labels, .. }
            | Repr::Graph { labels, .. }
            | Repr::Ambient { labels, .. } => Some(labels),
            _ => None,
        }
    }

    pub fn point_count(&self) -> Option<usize> {
        self.labels().map(|l| l.len())
    }

    pub fn lookup(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels().and_then(|l| l.get(i)).map(String::as_str)
    }

    pub fn explicit_matrix(&self) -> Option<&[Vec<f64>]> {
        match &self.repr {
            Repr::Explicit { distances, .. } => Some(distances),
            _ => None,
        }
    }

    pub fn graph_edges(&self) -> Option<&[WeightedEdge]> {
        match &self.repr {
            Repr::Graph { edges, .. } => Some(edges),
            _ => None,
        }
    }

    /// Arcs of an ambient digraph as `(from, to) -> weight`.
    pub fn ambient_arcs(&self) -> Option<&BTreeMap<(usize, usize), f64>> {
        match &self.repr {
            Repr::Ambient { arcs, .. } => Some(arcs),
            _ => None,
        }
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        match &self.repr {
            Repr::Ambient { arcs, .. } => arcs.contains_key(&(from, to)),
            _ => from != to,
        }
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        match (&self.repr, p) {
            (Repr::Euclidean { dim } | Repr::Rectilinear { dim }, Point::Coords(c)) => {
                if c.len() != *dim {
                    return Err(Error::InvalidPoint(format!(
                        "expected {dim} coordinates, got {}",
                        c.len()
                    )));
                }
                if c.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                Ok(())
            }
            (Repr::Euclidean { .. } | Repr::Rectilinear { .. }, Point::Vertex(v)) => Err(
                Error::InvalidPoint(format!("vertex #{v} given in a coordinate space")),
            ),
            (_, Point::Vertex(v)) => {
                let n = self.point_count().unwrap_or(0);
                if *v >= n {
                    return Err(Error::InvalidPoint(format!(
                        "vertex #{v} is not one of the {n} points of the space"
                    )));
                }
                Ok(())
            }
            (_, Point::Coords(_)) => Err(Error::InvalidPoint(
                "coordinates given in a finite space".into(),
            )),
        }
    }

    /// The distance ρ(p, q). Not defined for ambient digraphs, which carry
    /// per-arc lengths instead of a metric.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.validate_point(p)?;
        self.validate_point(q)?;
        match (&self.repr, p, q) {
            (Repr::Euclidean { .. }, Point::Coords(a), Point::Coords(b)) => Ok(euclidean(a, b)),
            (Repr::Rectilinear { .. }, Point::Coords(a), Point::Coords(b)) => Ok(rectilinear(a, b)),
            (Repr::Explicit { distances, .. }, Point::Vertex(a), Point::Vertex(b)) => {
                Ok(distances[*a][*b])
            }
            (Repr::Graph { shortest, .. }, Point::Vertex(a), Point::Vertex(b)) => {
                Ok(shortest[*a][*b])
            }
            (Repr::Ambient { .. }, _, _) => Err(Error::UnsupportedMode(
                "an ambient digraph has arc weights, not a distance".into(),
            )),
            _ => unreachable!("points validated above"),
        }
    }

    /// The length a network edge `p -> q` contributes: ρ(p, q) in metric
    /// spaces and the arc weight in an ambient digraph.
    pub fn edge_length(&self, p: &Point, q: &Point) -> Result<f64> {
        match &self.repr {
            Repr::Ambient { arcs, labels } => {
                self.validate_point(p)?;
                self.validate_point(q)?;
                let (a, b) = (p.vertex().unwrap(), q.vertex().unwrap());
                arcs.get(&(a, b)).copied().ok_or_else(|| {
                    Error::InvalidNetwork(format!(
                        "{} -> {} is not an arc of the ambient digraph",
                        labels[a], labels[b]
                    ))
                })
            }
            _ => self.distance(p, q),
        }
    }

    /// Finite spaces: the pairwise length table used by the exhaustive
    /// searches. Entry `[u][v]` is `None` when `u -> v` may not be an edge.
    pub(crate) fn finite_lengths(&self) -> Option<Vec<Vec<Option<f64>>>> {
        let n = self.point_count()?;
        let mut t = vec![vec![None; n]; n];
        for (u, row) in t.iter_mut().enumerate() {
            for (v, cell) in row.iter_mut().enumerate() {
                if u != v {
                    *cell = self.edge_length(&Point::Vertex(u), &Point::Vertex(v)).ok();
                }
            }
        }
        Some(t)
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn rectilinear(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Free-function form of [`Space::distance`].
pub fn distance(space: &Space, p: &Point, q: &Point) -> Result<f64> {
    space.distance(p, q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricViolation {
    NegativeEntry {
        i: usize,
        j: usize,
        value: f64,
    },
    NonzeroDiagonal {
        i: usize,
        value: f64,
    },
    Asymmetry {
        i: usize,
        j: usize,
    },
    /// `d(a, c) > d(a, b) + d(b, c)`.
    Triangle {
        a: usize,
        b: usize,
        c: usize,
        direct: f64,
        via: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricWarning {
    /// Two distinct points at distance zero (a pseudometric).
    DegenerateDistance { i: usize, j: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricReport {
    pub violations: Vec<MetricViolation>,
    pub warnings: Vec<MetricWarning>,
}

impl MetricReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the metric axioms. Only explicit matrices can violate them; graph
/// metrics and coordinate spaces satisfy them by construction and ambient
/// digraphs only need positive arc weights, which their constructor enforces.
pub fn validate_metric(space: &Space) -> MetricReport {
    let mut report = MetricReport::default();
    let Some(d) = space.explicit_matrix() else {
        return report;
    };
    let n = d.len();
    for i in 0..n {
        if d[i][i] != 0.0 {
            report
                .violations
                .push(MetricViolation::NonzeroDiagonal { i, value: d[i][i] });
        }
        for j in 0..n {
            if d[i][j] < 0.0 {
                report.violations.push(MetricViolation::NegativeEntry {
                    i,
                    j,
                    value: d[i][j],
                });
            }
            if i < j {
                if d[i][j] != d[j][i] {
                    report.violations.push(MetricViolation::Asymmetry { i, j });
                }
                if d[i][j] == 0.0 && d[j][i] == 0.0 {
                    report
                        .warnings
                        .push(MetricWarning::DegenerateDistance { i, j });
                }
            }
        }
    }
    for a in 0..n {
        for c in 0..n {
            if a == c {
                continue;
            }
            for b in 0..n {
                if b == a || b == c {
                    continue;
                }
                let via = d[a][b] + d[b][c];
                if d[a][c] > via + TRIANGLE_SLACK * d[a][c].abs().max(1.0) {
                    report.violations.push(MetricViolation::Triangle {
                        a,
                        b,
                        c,
                        direct: d[a][c],
                        via,
                    });
                }
            }
        }
    }
    report
}

/// Where the solver may place Steiner points.
#[derive(Debug, Clone, PartialEq)]
pub enum LocationDomain {
    Continuous { dim: usize },
    Finite(Vec<usize>),
}

pub fn candidate_steiner_locations(space: &Space) -> LocationDomain {
    match space.dim() {
        Some(dim) => LocationDomain::Continuous { dim },
        None => LocationDomain::Finite((0..space.point_count().unwrap_or(0)).collect()),
    }
}
