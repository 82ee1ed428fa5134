//! Seeded random instances, digraphs and networks at desk scale.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::instance::Instance;
use crate::metric::{Point, Space, WeightedEdge};
use crate::network::{Network, VertexId};
use crate::reductions::Digraph;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_coords(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    Point::Coords((0..dim).map(|_| rng.gen_range(0.0..1.0)).collect())
}

/// Terminals at uniform random points of the unit cube.
pub fn euclidean_instance(seed: u64, m: usize, n: usize, dim: usize) -> Result<Instance> {
    let mut r = rng(seed);
    let sources = (0..m).map(|_| random_coords(&mut r, dim)).collect();
    let sinks = (0..n).map(|_| random_coords(&mut r, dim)).collect();
    Instance::new(Space::euclidean(dim)?, sources, sinks, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiniteKind {
    /// Shortest-path closure of a random complete matrix.
    Explicit,
    /// Shortest paths of a random connected weighted graph.
    Graph,
}

/// Finite space on `points` points with integer distances in `1..=9`,
/// sources and sinks on distinct random points.
pub fn finite_instance(
    seed: u64,
    points: usize,
    m: usize,
    n: usize,
    kind: FiniteKind,
) -> Result<Instance> {
    assert!(m + n <= points, "terminals must fit on distinct points");
    let mut r = rng(seed);
    let labels: Vec<String> = (0..points).map(|i| format!("p{i}")).collect();
    let space = match kind {
        FiniteKind::Explicit => {
            let mut d = vec![vec![0.0; points]; points];
            for i in 0..points {
                for j in i + 1..points {
                    let w = r.gen_range(1..=9) as f64;
                    d[i][j] = w;
                    d[j][i] = w;
                }
            }
            for k in 0..points {
                for i in 0..points {
                    for j in 0..points {
                        if d[i][k] + d[k][j] < d[i][j] {
                            d[i][j] = d[i][k] + d[k][j];
                        }
                    }
                }
            }
            Space::explicit(labels, d)?
        }
        FiniteKind::Graph => {
            let mut order: Vec<usize> = (0..points).collect();
            order.shuffle(&mut r);
            let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
            for i in 1..points {
                let j = order[r.gen_range(0..i)];
                let (a, b) = (order[i].min(j), order[i].max(j));
                edges.insert((a, b));
            }
            for i in 0..points {
                for j in i + 1..points {
                    if r.gen_bool(0.3) {
                        edges.insert((i, j));
                    }
                }
            }
            let edges = edges
                .into_iter()
                .map(|(from, to)| WeightedEdge {
                    from,
                    to,
                    weight: r.gen_range(1..=9) as f64,
                })
                .collect();
            Space::graph(labels, edges)?
        }
    };
    let mut pts: Vec<usize> = (0..points).collect();
    pts.shuffle(&mut r);
    let sources = pts[..m].iter().map(|&p| Point::Vertex(p)).collect();
    let sinks = pts[m..m + n].iter().map(|&p| Point::Vertex(p)).collect();
    Instance::new(space, sources, sinks, None)
}

/// Random strongly connected digraph on `n` vertices: arcs are drawn with
/// probability `density` and the draw is repeated until it is strongly
/// connected.
pub fn strongly_connected_digraph(seed: u64, n: usize, density: f64) -> Result<Digraph> {
    let mut r = rng(seed);
    loop {
        let arcs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
            .filter(|_| r.gen_bool(density))
            .collect();
        let d = Digraph::unit(n, &arcs)?;
        if d.unreachable_pair().is_none() {
            return Ok(d);
        }
    }
}

/// A connecting network on the terminals of `instance` plus `steiner`
/// extra vertices: one random route per demand pair through the Steiner
/// vertices, plus a few random extra edges.
///
/// Coordinate spaces get Steiner points at random locations; finite spaces
/// use free points of the space (so `steiner` is capped by their number).
pub fn connecting_network(seed: u64, instance: &Instance, steiner: usize) -> Result<Network> {
    let mut r = rng(seed);
    let space = instance.space();
    let terminals = instance.terminals();
    let mut extra: Vec<(VertexId, Point)> = Vec::new();
    match space.dim() {
        Some(dim) => {
            let first = instance.first_steiner_id();
            for i in 0..steiner {
                extra.push((VertexId(first + i), random_coords(&mut r, dim)));
            }
        }
        None => {
            let count = space.point_count().unwrap_or(0);
            let mut free: Vec<usize> = (0..count)
                .filter(|p| !terminals.contains_key(&VertexId(*p)))
                .collect();
            free.shuffle(&mut r);
            for &p in free.iter().take(steiner) {
                extra.push((VertexId(p), Point::Vertex(p)));
            }
        }
    }
    let hubs: Vec<VertexId> = extra.iter().map(|e| e.0).collect();
    let all: Vec<VertexId> = terminals
        .keys()
        .copied()
        .chain(hubs.iter().copied())
        .collect();
    let mut edges: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let net = instance.network(extra.clone(), std::iter::empty())?;
    for (a, b) in net.required_pairs() {
        if a == b {
            continue;
        }
        let hops = r.gen_range(0..=hubs.len().min(3));
        let mut route = vec![a];
        let mut pool = hubs.clone();
        pool.shuffle(&mut r);
        route.extend(pool.into_iter().take(hops));
        route.push(b);
        for w in route.windows(2) {
            edges.insert((w[0], w[1]));
        }
    }
    for _ in 0..r.gen_range(0..=all.len()) {
        let (u, v) = (*all.choose(&mut r).unwrap(), *all.choose(&mut r).unwrap());
        if u != v {
            edges.insert((u, v));
        }
    }
    let mut vertices = terminals;
    for (id, location) in extra {
        vertices.insert(
            id,
            crate::network::Vertex {
                role: crate::network::Role::Steiner,
                location,
            },
        );
    }
    Network::new(
        Arc::clone(instance.space_arc()),
        vertices,
        edges,
        instance.demand(),
    )
}
