//! The (A,B)-network data model: a digraph whose vertices carry a location
//! and a role, together with the length, connectivity, simplification and
//! pruning operations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Adjacency;
use crate::metric::{Point, Space, SpaceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Source,
    Sink,
    Steiner,
    SourceAndSink,
}

impl Role {
    pub fn is_source(self) -> bool {
        matches!(self, Role::Source | Role::SourceAndSink)
    }

    pub fn is_sink(self) -> bool {
        matches!(self, Role::Sink | Role::SourceAndSink)
    }

    pub fn is_steiner(self) -> bool {
        self == Role::Steiner
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub role: Role,
    pub location: Point,
}

/// Which source-to-sink connections a network must provide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Demand {
    /// Every source reaches every sink.
    AllPairs,
    /// Only the listed (source, sink) pairs (point-to-point variant).
    Pairs(Vec<(VertexId, VertexId)>),
}

#[derive(Debug, Clone)]
pub struct Network {
    space: Arc<Space>,
    vertices: BTreeMap<VertexId, Vertex>,
    edges: BTreeSet<(VertexId, VertexId)>,
    demand: Demand,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.edges == other.edges
            && self.demand == other.demand
            && (Arc::ptr_eq(&self.space, &other.space) || self.space == other.space)
    }
}

impl Network {
    pub fn new(
        space: Arc<Space>,
        vertices: BTreeMap<VertexId, Vertex>,
        edges: BTreeSet<(VertexId, VertexId)>,
        demand: Demand,
    ) -> Result<Self> {
        for (id, v) in &vertices {
            space
                .validate_point(&v.location)
                .map_err(|e| Error::InvalidNetwork(format!("vertex {id}: {e}")))?;
        }
        if !space.kind().is_continuous() {
            let mut seen = BTreeMap::new();
            for (id, v) in &vertices {
                if let Some(prev) = seen.insert(v.location.vertex(), *id) {
                    return Err(Error::InvalidNetwork(format!(
                        "vertices {prev} and {id} occupy the same point of a finite space"
                    )));
                }
            }
        }
        for &(u, v) in &edges {
            if u == v {
                return Err(Error::InvalidNetwork(format!("self-loop at {u}")));
            }
            let (Some(a), Some(b)) = (vertices.get(&u), vertices.get(&v)) else {
                return Err(Error::InvalidNetwork(format!(
                    "edge {u} -> {v} references an unknown vertex"
                )));
            };
            if space.kind() == SpaceKind::Ambient {
                space.edge_length(&a.location, &b.location)?;
            }
        }
        if let Demand::Pairs(pairs) = &demand {
            for (a, b) in pairs {
                let ok = vertices.get(a).is_some_and(|v| v.role.is_source())
                    && vertices.get(b).is_some_and(|v| v.role.is_sink());
                if !ok {
                    return Err(Error::InvalidNetwork(format!(
                        "demand pair ({a}, {b}) is not a (source, sink) pair"
                    )));
                }
            }
        }
        Ok(Network {
            space,
            vertices,
            edges,
            demand,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn vertices(&self) -> &BTreeMap<VertexId, Vertex> {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.get(&id)
    }

    pub fn edges(&self) -> &BTreeSet<(VertexId, VertexId)> {
        &self.edges
    }

    pub fn demand(&self) -> &Demand {
        &self.demand
    }

    pub fn sources(&self) -> Vec<VertexId> {
        self.with_role(Role::is_source)
    }

    pub fn sinks(&self) -> Vec<VertexId> {
        self.with_role(Role::is_sink)
    }

    pub fn steiner_points(&self) -> Vec<VertexId> {
        self.with_role(Role::is_steiner)
    }

    pub fn steiner_count(&self) -> usize {
        self.vertices
            .values()
            .filter(|v| v.role.is_steiner())
            .count()
    }

    fn with_role(&self, pred: impl Fn(Role) -> bool) -> Vec<VertexId> {
        self.vertices
            .iter()
            .filter(|(_, v)| pred(v.role))
            .map(|(id, _)| *id)
            .collect()
    }

    /// Required (source, sink) connections.
    pub fn required_pairs(&self) -> Vec<(VertexId, VertexId)> {
        match &self.demand {
            Demand::AllPairs => {
                let sinks = self.sinks();
                self.sources()
                    .into_iter()
                    .flat_map(|a| sinks.iter().map(move |&b| (a, b)))
                    .collect()
            }
            Demand::Pairs(p) => p.clone(),
        }
    }

    /// Length of the edge `u -> v` under the space.
    pub fn edge_length(&self, u: VertexId, v: VertexId) -> f64 {
        self.space
            .edge_length(&self.vertices[&u].location, &self.vertices[&v].location)
            .expect("edges are validated on construction")
    }

    /// ℓ(G): the sum of the edge lengths.
    pub fn length(&self) -> f64 {
        self.edges
            .iter()
            .map(|&(u, v)| self.edge_length(u, v))
            .sum()
    }

    pub(crate) fn adjacency(&self) -> Adjacency {
        Adjacency::new(self.vertices.keys().copied(), self.edges.iter())
    }

    /// Vertices adjacent to `v` by an edge in either direction.
    pub fn neighbours(&self, v: VertexId) -> Result<BTreeSet<VertexId>> {
        if !self.vertices.contains_key(&v) {
            return Err(Error::InvalidNetwork(format!("unknown vertex {v}")));
        }
        Ok(self.neighbour_set(v))
    }

    fn neighbour_set(&self, v: VertexId) -> BTreeSet<VertexId> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// True iff every vertex in `sources` reaches every vertex in `sinks`.
    pub fn is_connecting(&self, sources: &[VertexId], sinks: &[VertexId]) -> Result<bool> {
        for t in sources.iter().chain(sinks) {
            if !self.vertices.contains_key(t) {
                return Err(Error::InvalidTerminal(format!("{t} is not a vertex")));
            }
        }
        let g = self.adjacency();
        Ok(sources.iter().all(|a| {
            let r = g.reach(g.pos[a]);
            sinks.iter().all(|b| r[g.pos[b]])
        }))
    }

    /// True iff the network meets its own demand.
    pub fn satisfies_demand(&self) -> bool {
        satisfies(&self.adjacency(), &self.required_pairs(), None)
    }

    /// Every Steiner point has at least three neighbours.
    pub fn is_simple(&self) -> bool {
        self.steiner_points()
            .into_iter()
            .all(|s| self.neighbour_set(s).len() >= 3)
    }

    /// Same network with a different edge set.
    pub fn with_edges(&self, edges: BTreeSet<(VertexId, VertexId)>) -> Result<Network> {
        Network::new(
            self.space.clone(),
            self.vertices.clone(),
            edges,
            self.demand.clone(),
        )
    }

    pub(crate) fn from_parts_unchecked(
        space: Arc<Space>,
        vertices: BTreeMap<VertexId, Vertex>,
        edges: BTreeSet<(VertexId, VertexId)>,
        demand: Demand,
    ) -> Network {
        Network {
            space,
            vertices,
            edges,
            demand,
        }
    }

    fn require_connecting(&self) -> Result<()> {
        if self.satisfies_demand() {
            Ok(())
        } else {
            Err(Error::NotConnecting(
                "some required source-sink connection is missing".into(),
            ))
        }
    }

    /// Repeatedly removes Steiner points with at most two neighbours,
    /// replacing each removed two-edge route `u -> s -> v` by `u -> v`,
    /// until every Steiner point has at least three neighbours.
    pub fn simplify(&self) -> Result<Network> {
        if self.space.kind() == SpaceKind::Ambient {
            return Err(Error::UnsupportedMode(
                "simplify may add edges that are not ambient arcs".into(),
            ));
        }
        self.require_connecting()?;
        let mut vertices = self.vertices.clone();
        let mut edges = self.edges.clone();
        loop {
            let low = vertices.iter().find_map(|(&s, v)| {
                if !v.role.is_steiner() {
                    return None;
                }
                let nb = incident_neighbours(&edges, s);
                (nb.len() <= 2).then_some((s, nb))
            });
            let Some((s, nb)) = low else { break };
            let nb: Vec<VertexId> = nb.into_iter().collect();
            let mut added = Vec::new();
            if let [u, v] = nb[..] {
                if edges.contains(&(u, s)) && edges.contains(&(s, v)) {
                    added.push((u, v));
                }
                if edges.contains(&(v, s)) && edges.contains(&(s, u)) {
                    added.push((v, u));
                }
            }
            edges.retain(|&(a, b)| a != s && b != s);
            edges.extend(added);
            vertices.remove(&s);
        }
        Ok(Network::from_parts_unchecked(
            self.space.clone(),
            vertices,
            edges,
            self.demand.clone(),
        ))
    }

    /// Removes edges whose deletion keeps the network connecting, testing
    /// them once each in lexicographic order of their endpoint ids.
    pub fn prune_redundant_edges(&self) -> Result<Network> {
        self.require_connecting()?;
        let pairs = self.required_pairs();
        let mut edges = self.edges.clone();
        for e in self.edges.iter() {
            edges.remove(e);
            let g = Adjacency::new(self.vertices.keys().copied(), edges.iter());
            if !satisfies(&g, &pairs, None) {
                edges.insert(*e);
            }
        }
        Ok(Network::from_parts_unchecked(
            self.space.clone(),
            self.vertices.clone(),
            edges,
            self.demand.clone(),
        ))
    }

    /// Edges whose single removal keeps the network connecting.
    pub fn removable_edges(&self) -> Vec<(VertexId, VertexId)> {
        let g = self.adjacency();
        let pairs = self.required_pairs();
        self.edges
            .iter()
            .copied()
            .filter(|&(u, v)| satisfies(&g, &pairs, Some((g.pos[&u], g.pos[&v]))))
            .collect()
    }

    /// Alternates [`Network::simplify`] and [`Network::prune_redundant_edges`]
    /// until neither changes the network. Ambient networks are only pruned.
    pub fn simplify_and_prune(&self) -> Result<Network> {
        let mut cur = self.prune_redundant_edges()?;
        if self.space.kind() == SpaceKind::Ambient {
            return Ok(cur);
        }
        loop {
            let next = cur.simplify()?.prune_redundant_edges()?;
            if next == cur {
                return Ok(cur);
            }
            cur = next;
        }
    }

    /// Drops Steiner vertices with no incident edge.
    pub fn without_isolated_steiner(&self) -> Network {
        let used: BTreeSet<VertexId> = self.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        let vertices = self
            .vertices
            .iter()
            .filter(|(id, v)| !v.role.is_steiner() || used.contains(id))
            .map(|(id, v)| (*id, v.clone()))
            .collect();
        Network::from_parts_unchecked(
            self.space.clone(),
            vertices,
            self.edges.clone(),
            self.demand.clone(),
        )
    }
}

fn incident_neighbours(edges: &BTreeSet<(VertexId, VertexId)>, s: VertexId) -> BTreeSet<VertexId> {
    edges
        .iter()
        .filter_map(|&(a, b)| {
            if a == s {
                Some(b)
            } else if b == s {
                Some(a)
            } else {
                None
            }
        })
        .collect()
}

pub(crate) fn satisfies(
    g: &Adjacency,
    pairs: &[(VertexId, VertexId)],
    skip: Option<(usize, usize)>,
) -> bool {
    let mut by_source: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for &(a, b) in pairs {
        by_source.entry(a).or_default().push(b);
    }
    by_source.iter().all(|(a, bs)| {
        let r = match skip {
            Some(e) => g.reach_without(g.pos[a], e),
            None => g.reach(g.pos[a]),
        };
        bs.iter().all(|b| r[g.pos[b]])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;

    fn e2() -> Space {
        Space::euclidean(2).unwrap()
    }

    fn pt(x: f64, y: f64) -> Point {
        Point::Coords(vec![x, y])
    }

    fn ids(pairs: &[(usize, usize)]) -> Vec<(VertexId, VertexId)> {
        pairs
            .iter()
            .map(|&(a, b)| (VertexId(a), VertexId(b)))
            .collect()
    }

    /// a1=0, a2=1, b=2, s=3 at the centre of the equilateral triangle.
    fn fermat() -> Network {
        let h = 3f64.sqrt() / 2.0;
        let inst = Instance::new(
            e2(),
            vec![pt(0.0, 0.0), pt(1.0, 0.0)],
            vec![pt(0.5, h)],
            None,
        )
        .unwrap();
        inst.network(
            [(VertexId(3), pt(0.5, 3f64.sqrt() / 6.0))],
            ids(&[(0, 3), (1, 3), (3, 2)]),
        )
        .unwrap()
    }

    #[test]
    fn lengths() {
        let inst = Instance::new(e2(), vec![pt(0.0, 0.0)], vec![pt(3.0, 4.0)], None).unwrap();
        let single = inst.network([], ids(&[(0, 1)])).unwrap();
        assert_eq!(single.length(), 5.0);
        assert_eq!(inst.network([], []).unwrap().length(), 0.0);
        // three centre-to-vertex distances of 1/sqrt(3) each
        let direct = 3.0 * (1.0 / 3f64.sqrt());
        assert!((fermat().length() - direct).abs() < 1e-12);
        assert!((fermat().length() - 1.7320508075688772).abs() < 1e-12);
    }

    #[test]
    fn connectivity() {
        let inst = Instance::new(e2(), vec![pt(0.0, 0.0)], vec![pt(1.0, 0.0)], None).unwrap();
        let fwd = inst.network([], ids(&[(0, 1)])).unwrap();
        let back = inst.network([], ids(&[(1, 0)])).unwrap();
        let a = [VertexId(0)];
        let b = [VertexId(1)];
        assert!(fwd.is_connecting(&a, &b).unwrap());
        assert!(!back.is_connecting(&a, &b).unwrap());
        assert!(fwd.is_connecting(&a, &[VertexId(9)]).is_err());

        let inst = Instance::new(
            e2(),
            vec![pt(0.0, 0.0), pt(0.0, 1.0)],
            vec![pt(2.0, 0.0), pt(2.0, 1.0)],
            None,
        )
        .unwrap();
        let hub = inst
            .network(
                [(VertexId(4), pt(1.0, 0.5))],
                ids(&[(0, 4), (1, 4), (4, 2), (4, 3)]),
            )
            .unwrap();
        assert!(hub.satisfies_demand());
        assert!(hub
            .is_connecting(&[VertexId(0), VertexId(1)], &[VertexId(2), VertexId(3)])
            .unwrap());
    }

    #[test]
    fn neighbours_are_direction_blind() {
        let f = fermat();
        assert_eq!(
            f.neighbours(VertexId(3)).unwrap(),
            [VertexId(0), VertexId(1), VertexId(2)].into()
        );
        let inst = Instance::new(e2(), vec![pt(0.0, 0.0)], vec![pt(1.0, 0.0)], None).unwrap();
        assert!(inst
            .network([], [])
            .unwrap()
            .neighbours(VertexId(0))
            .unwrap()
            .is_empty());
        let anti = inst.network([], ids(&[(0, 1), (1, 0)])).unwrap();
        assert_eq!(anti.neighbours(VertexId(0)).unwrap(), [VertexId(1)].into());
        assert!(anti.neighbours(VertexId(7)).is_err());
    }

    #[test]
    fn simplify_shortcuts_two_neighbour_steiner() {
        let inst = Instance::new(e2(), vec![pt(0.0, 0.0)], vec![pt(2.0, 0.0)], None).unwrap();
        let net = inst
            .network([(VertexId(2), pt(1.0, 1.0))], ids(&[(0, 2), (2, 1)]))
            .unwrap();
        let s = net.simplify().unwrap();
        assert_eq!(s.edges(), &ids(&[(0, 1)]).into_iter().collect());
        assert_eq!(s.steiner_count(), 0);
        assert!(s.length() < net.length());
        assert_eq!(s.length(), 2.0);
    }

    #[test]
    fn simplify_drops_dead_end_steiner() {
        // a1 -> s <- a2 with s leading nowhere; B is reached directly.
        let inst = Instance::new(
            e2(),
            vec![pt(0.0, 0.0), pt(0.0, 1.0)],
            vec![pt(1.0, 0.5)],
            None,
        )
        .unwrap();
        let net = inst
            .network(
                [(VertexId(3), pt(-1.0, 0.5))],
                ids(&[(0, 3), (1, 3), (0, 2), (1, 2)]),
            )
            .unwrap();
        let s = net.simplify().unwrap();
        assert_eq!(s.steiner_count(), 0);
        assert_eq!(s.edges(), &ids(&[(0, 2), (1, 2)]).into_iter().collect());
    }

    #[test]
    fn simplify_keeps_simple_networks() {
        let f = fermat();
        assert_eq!(f.simplify().unwrap(), f);
    }

    #[test]
    fn simplify_requires_connecting() {
        let inst = Instance::new(e2(), vec![pt(0.0, 0.0)], vec![pt(1.0, 0.0)], None).unwrap();
        let net = inst.network([], []).unwrap();
        assert!(matches!(net.simplify(), Err(Error::NotConnecting(_))));
        assert!(matches!(
            net.prune_redundant_edges(),
            Err(Error::NotConnecting(_))
        ));
    }

    #[test]
    fn prune_removes_back_edge() {
        let inst = Instance::new(e2(), vec![pt(0.0, 0.0)], vec![pt(1.0, 0.0)], None).unwrap();
        let net = inst.network([], ids(&[(0, 1), (1, 0)])).unwrap();
        let p = net.prune_redundant_edges().unwrap();
        assert_eq!(p.edges(), &ids(&[(0, 1)]).into_iter().collect());
        assert_eq!(p.prune_redundant_edges().unwrap(), p);
    }

    #[test]
    fn prune_parallel_route_matches_brute_force() {
        // a -> b directly and via s; lexicographic order tests (0,1) first.
        let inst = Instance::new(e2(), vec![pt(0.0, 0.0)], vec![pt(1.0, 0.0)], None).unwrap();
        let net = inst
            .network(
                [(VertexId(2), pt(0.5, 0.5))],
                ids(&[(0, 1), (0, 2), (2, 1)]),
            )
            .unwrap();
        // brute force: every single edge is removable on its own
        let removable: Vec<_> = net
            .edges()
            .iter()
            .filter(|e| {
                let mut rest = net.edges().clone();
                rest.remove(e);
                net.with_edges(rest).unwrap().satisfies_demand()
            })
            .copied()
            .collect();
        assert_eq!(removable.len(), 3);
        assert_eq!(net.removable_edges(), removable);
        let p = net.prune_redundant_edges().unwrap();
        assert!(p.satisfies_demand());
        assert!(p.removable_edges().is_empty());
        assert_eq!(p.edges(), &ids(&[(0, 2), (2, 1)]).into_iter().collect());
    }

    #[test]
    fn ambient_edges_must_be_arcs() {
        let s = Space::ambient(
            vec!["u".into(), "v".into()],
            vec![crate::metric::WeightedEdge {
                from: 0,
                to: 1,
                weight: 1.0,
            }],
        )
        .unwrap();
        let inst = Instance::new(s, vec![Point::Vertex(0)], vec![Point::Vertex(1)], None).unwrap();
        assert!(inst.network([], ids(&[(0, 1)])).is_ok());
        assert!(inst.network([], ids(&[(1, 0)])).is_err());
        let net = inst.network([], ids(&[(0, 1)])).unwrap();
        assert!(matches!(net.simplify(), Err(Error::UnsupportedMode(_))));
    }
}
