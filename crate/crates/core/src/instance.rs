//! Problem instances: a space, a source set A, a sink set B and, for the
//! point-to-point variant, the list of required (source, sink) pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::{validate_metric, Point, Space};
use crate::network::{Demand, Network, Role, Vertex, VertexId};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    space: Arc<Space>,
    sources: Vec<Point>,
    sinks: Vec<Point>,
    pairs: Option<Vec<(usize, usize)>>,
}

impl Instance {
    pub fn new(
        space: Space,
        sources: Vec<Point>,
        sinks: Vec<Point>,
        pairs: Option<Vec<(usize, usize)>>,
    ) -> Result<Self> {
        Self::with_space(Arc::new(space), sources, sinks, pairs)
    }

    pub fn with_space(
        space: Arc<Space>,
        sources: Vec<Point>,
        sinks: Vec<Point>,
        pairs: Option<Vec<(usize, usize)>>,
    ) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::InvalidInstance("sources: must be nonempty".into()));
        }
        if sinks.is_empty() {
            return Err(Error::InvalidInstance("sinks: must be nonempty".into()));
        }
        for (field, pts) in [("sources", &sources), ("sinks", &sinks)] {
            for (i, p) in pts.iter().enumerate() {
                space
                    .validate_point(p)
                    .map_err(|e| Error::InvalidInstance(format!("{field}[{i}]: {e}")))?;
            }
            if !space.kind().is_continuous() {
                let distinct: BTreeSet<_> = pts.iter().filter_map(Point::vertex).collect();
                if distinct.len() != pts.len() {
                    return Err(Error::InvalidInstance(format!(
                        "{field}: repeats a point of the space"
                    )));
                }
            }
        }
        if let Some(pairs) = &pairs {
            if pairs.is_empty() {
                return Err(Error::InvalidInstance("pairs: must be nonempty".into()));
            }
            for (k, &(i, j)) in pairs.iter().enumerate() {
                if i >= sources.len() || j >= sinks.len() {
                    return Err(Error::InvalidInstance(format!(
                        "pairs[{k}]: ({i}, {j}) out of range"
                    )));
                }
            }
        }
        let report = validate_metric(&space);
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidSpace(format!("metric axiom violated: {v:?}")));
        }
        Ok(Instance {
            space,
            sources,
            sinks,
            pairs,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn sources(&self) -> &[Point] {
        &self.sources
    }

    pub fn sinks(&self) -> &[Point] {
        &self.sinks
    }

    pub fn pairs(&self) -> Option<&[(usize, usize)]> {
        self.pairs.as_deref()
    }

    /// Returns a copy of this instance with a point-to-point pair list.
    pub fn with_pairs(&self, pairs: Option<Vec<(usize, usize)>>) -> Result<Self> {
        Self::with_space(
            self.space.clone(),
            self.sources.clone(),
            self.sinks.clone(),
            pairs,
        )
    }

    pub fn m(&self) -> usize {
        self.sources.len()
    }

    pub fn n(&self) -> usize {
        self.sinks.len()
    }

    /// Network vertex id of the `i`-th source. In coordinate spaces the
    /// terminals are numbered sources first, then sinks; in finite spaces a
    /// vertex id is the index of its point, so a point listed as both source
    /// and sink is a single vertex.
    pub fn source_id(&self, i: usize) -> VertexId {
        match &self.sources[i] {
            Point::Vertex(v) => VertexId(*v),
            Point::Coords(_) => VertexId(i),
        }
    }

    pub fn sink_id(&self, j: usize) -> VertexId {
        match &self.sinks[j] {
            Point::Vertex(v) => VertexId(*v),
            Point::Coords(_) => VertexId(self.m() + j),
        }
    }

    /// Smallest id free for Steiner vertices in coordinate spaces.
    pub fn first_steiner_id(&self) -> usize {
        self.m() + self.n()
    }

    pub fn demand(&self) -> Demand {
        match &self.pairs {
            None => Demand::AllPairs,
            Some(p) => Demand::Pairs(
                p.iter()
                    .map(|&(i, j)| (self.source_id(i), self.sink_id(j)))
                    .collect(),
            ),
        }
    }

    /// The terminal vertices with their roles and locations.
    pub fn terminals(&self) -> BTreeMap<VertexId, Vertex> {
        let mut out: BTreeMap<VertexId, Vertex> = BTreeMap::new();
        for (i, p) in self.sources.iter().enumerate() {
            out.insert(
                self.source_id(i),
                Vertex {
                    role: Role::Source,
                    location: p.clone(),
                },
            );
        }
        for (j, p) in self.sinks.iter().enumerate() {
            let id = self.sink_id(j);
            match out.get_mut(&id) {
                Some(v) => v.role = Role::SourceAndSink,
                None => {
                    out.insert(
                        id,
                        Vertex {
                            role: Role::Sink,
                            location: p.clone(),
                        },
                    );
                }
            }
        }
        out
    }

    /// Builds a network on the terminals plus the given Steiner vertices.
    pub fn network(
        &self,
        steiner: impl IntoIterator<Item = (VertexId, Point)>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Network> {
        let mut vertices = self.terminals();
        for (id, location) in steiner {
            if vertices
                .insert(
                    id,
                    Vertex {
                        role: Role::Steiner,
                        location,
                    },
                )
                .is_some()
            {
                return Err(Error::InvalidNetwork(format!(
                    "Steiner vertex {} collides with another vertex id",
                    id.0
                )));
            }
        }
        Network::new(
            self.space.clone(),
            vertices,
            edges.into_iter().collect(),
            self.demand(),
        )
    }
}
