//! Exact shortest networks by exhaustive topology search.
//!
//! Continuous spaces: every topology with up to `max_steiner` Steiner
//! vertices is enumerated and its Steiner vertices are placed optimally;
//! the shortest result is simplified and pruned. Finite spaces: Steiner
//! vertices sit on points of the space, so the search runs over labelled
//! edge-minimal networks on the terminals plus each admissible set of
//! extra points.

pub mod optimize;
pub mod oracle;
pub mod topology;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::metric::{Point, SpaceKind};
use crate::network::{Network, Role, Vertex, VertexId};
use optimize::{optimize_positions, scale};
use topology::{check_ceiling, enumerate_topologies, mask_arcs, minimal_networks, Topology};

pub use optimize::{optimize_from, Placement};
pub use oracle::brute_force_oracle;
pub use topology::{Variant, DEFAULT_VERTEX_CEILING};

/// Relative length difference under which two candidates count as tied.
const TIE_TOLERANCE: f64 = 1e-9;
/// Steiner vertices closer than this (relative to the instance scale) to
/// another vertex are merged into it.
const CONTRACTION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Largest number of Steiner points to try. `None` picks the theorem
    /// bound clamped to the enumeration ceiling.
    pub max_steiner: Option<usize>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub smoothing_epsilon: f64,
    pub restarts: usize,
    pub variant: Variant,
    pub parallel: bool,
    pub seed: u64,
    /// Largest vertex count (terminals plus Steiner) of a searched topology.
    pub vertex_ceiling: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_steiner: None,
            tolerance: 1e-9,
            max_iterations: 10_000,
            smoothing_epsilon: 1e-12,
            restarts: 1,
            variant: Variant::AllPairs,
            parallel: false,
            seed: 0,
            vertex_ceiling: DEFAULT_VERTEX_CEILING,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInstance("tolerance must be positive".into()));
        }
        if !(self.smoothing_epsilon >= 0.0) {
            return Err(Error::InvalidInstance(
                "smoothing_epsilon must be nonnegative".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInstance(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    OptimalWithinBudget,
    OracleExact,
}

/// How many Steiner points the search covered and what limited it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Steiner points sufficient for an optimal network in principle.
    pub theorem_bound: usize,
    /// Steiner points actually searched.
    pub max_steiner: usize,
    /// True when the search stopped short of `theorem_bound`.
    pub binding: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub network: Network,
    pub length: f64,
    pub topologies_examined: usize,
    pub status: SolveStatus,
    /// False if some placement hit the iteration limit.
    pub converged: bool,
    pub budget: Budget,
}

/// Steiner points that suffice for a shortest network: `9(m+n)+2` per
/// required connection.
pub fn theorem_bound(m: usize, n: usize, pairs: usize) -> usize {
    pairs * (9 * (m + n) + 2)
}

/// Instance whose pair list reflects the configured variant.
fn effective_instance(instance: &Instance, config: &SolveConfig) -> Result<Instance> {
    match &config.variant {
        Variant::AllPairs => Ok(instance.clone()),
        Variant::PointToPoint(p) => match instance.pairs() {
            Some(q) if q != p.as_slice() => Err(Error::InvalidInstance(
                "configured pair list differs from the instance's".into(),
            )),
            _ => instance.with_pairs(Some(p.clone())),
        },
    }
}

fn variant_of(instance: &Instance) -> Variant {
    match instance.pairs() {
        None => Variant::AllPairs,
        Some(p) => Variant::PointToPoint(p.to_vec()),
    }
}

/// A shortest connecting network with at most the budgeted number of
/// Steiner points.
pub fn solve(instance: &Instance, config: &SolveConfig) -> Result<Solution> {
    config.validate()?;
    let instance = effective_instance(instance, config)?;
    if instance.space().kind().is_continuous() {
        solve_continuous(&instance, config)
    } else {
        solve_finite(&instance, config)
    }
}

/// [`solve`] with only the instance's listed (source, sink) pairs required.
pub fn solve_point_to_point(instance: &Instance, config: &SolveConfig) -> Result<Solution> {
    let Some(pairs) = instance.pairs() else {
        return Err(Error::InvalidInstance("pairs: must be nonempty".into()));
    };
    let config = SolveConfig {
        variant: Variant::PointToPoint(pairs.to_vec()),
        ..config.clone()
    };
    solve(instance, &config)
}

fn budget(
    instance: &Instance,
    config: &SolveConfig,
    terminals: usize,
    cap: usize,
) -> Result<Budget> {
    let pairs = instance
        .pairs()
        .map_or(instance.m() * instance.n(), <[_]>::len);
    let bound = theorem_bound(instance.m(), instance.n(), pairs);
    let max_steiner = match config.max_steiner {
        Some(k) => {
            check_ceiling(terminals + k.min(cap), config.vertex_ceiling)?;
            k.min(cap)
        }
        None => {
            check_ceiling(terminals, config.vertex_ceiling)?;
            bound
                .min(config.vertex_ceiling.saturating_sub(terminals))
                .min(cap)
        }
    };
    Ok(Budget {
        theorem_bound: bound,
        max_steiner,
        binding: max_steiner < bound.min(cap),
    })
}

struct Candidate {
    network: Network,
    length: f64,
    converged: bool,
}

/// Folds candidates in their given order, replacing the incumbent only on a
/// clear improvement, so ties go to the earliest candidate.
fn pick(candidates: impl IntoIterator<Item = Candidate>, scale: f64) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for c in candidates {
        let better = match &best {
            None => true,
            Some(b) => c.length < b.length - TIE_TOLERANCE * scale,
        };
        if better {
            best = Some(c);
        }
    }
    best
}

fn solve_continuous(instance: &Instance, config: &SolveConfig) -> Result<Solution> {
    let (m, n) = (instance.m(), instance.n());
    let budget = budget(instance, config, m + n, usize::MAX)?;
    let variant = variant_of(instance);
    let coords: Vec<Vec<f64>> = instance
        .sources()
        .iter()
        .chain(instance.sinks())
        .map(|p| p.coords().expect("coordinate space").to_vec())
        .collect();
    let scale = scale(&coords);

    let mut topologies: Vec<Topology> = Vec::new();
    for k in 0..=budget.max_steiner {
        topologies.extend(enumerate_topologies(
            m,
            n,
            k,
            &variant,
            config.vertex_ceiling,
        )?);
    }
    let run = |t: &Topology| -> Result<Candidate> {
        let placement = optimize_positions(t, instance, config)?;
        let network = realise(instance, t, &placement)?;
        let network = contract(&network, scale)?.simplify_and_prune()?;
        Ok(Candidate {
            length: network.length(),
            network,
            converged: placement.converged,
        })
    };
    let results: Vec<Result<Candidate>> = if config.parallel {
        topologies.par_iter().map(run).collect()
    } else {
        topologies.iter().map(run).collect()
    };
    let candidates: Vec<Candidate> = results.into_iter().collect::<Result<_>>()?;
    let converged = candidates.iter().all(|c| c.converged);
    let best = pick(candidates, scale).expect("k = 0 always yields a topology");
    Ok(Solution {
        length: best.network.length(),
        network: best.network,
        topologies_examined: topologies.len(),
        status: SolveStatus::OptimalWithinBudget,
        converged,
        budget,
    })
}

/// The located network of a topology.
fn realise(instance: &Instance, t: &Topology, placement: &Placement) -> Result<Network> {
    let terminals = t.sources + t.sinks;
    let first = instance.first_steiner_id();
    let id = |v: usize| {
        if v < t.sources {
            instance.source_id(v)
        } else if v < terminals {
            instance.sink_id(v - t.sources)
        } else {
            VertexId(first + v - terminals)
        }
    };
    instance.network(
        placement
            .steiner
            .iter()
            .enumerate()
            .map(|(i, p)| (VertexId(first + i), p.clone())),
        t.arcs.iter().map(|&(u, v)| (id(u), id(v))),
    )
}

/// Merges Steiner vertices that sit (numerically) on another vertex. Each
/// merge is kept only if it does not lengthen the network beyond the tie
/// tolerance.
fn contract(network: &Network, scale: f64) -> Result<Network> {
    let mut cur = network.clone();
    loop {
        let mut merged = None;
        for &(u, v) in cur.edges() {
            if cur.edge_length(u, v) > CONTRACTION_TOLERANCE * scale {
                continue;
            }
            let (keep, drop) = match (cur.vertices()[&u].role, cur.vertices()[&v].role) {
                (Role::Steiner, Role::Steiner) => (u.min(v), u.max(v)),
                (Role::Steiner, _) => (v, u),
                (_, Role::Steiner) => (u, v),
                _ => continue,
            };
            let next = merge(&cur, keep, drop)?;
            if next.length() <= cur.length() + TIE_TOLERANCE * scale {
                merged = Some(next);
                break;
            }
        }
        match merged {
            Some(next) => cur = next,
            None => return Ok(cur),
        }
    }
}

fn merge(network: &Network, keep: VertexId, drop: VertexId) -> Result<Network> {
    let edges: BTreeSet<(VertexId, VertexId)> = network
        .edges()
        .iter()
        .map(|&(a, b)| {
            let r = |x: VertexId| if x == drop { keep } else { x };
            (r(a), r(b))
        })
        .filter(|(a, b)| a != b)
        .collect();
    let mut vertices = network.vertices().clone();
    vertices.remove(&drop);
    Network::new(
        network.space_arc().clone(),
        vertices,
        edges,
        network.demand().clone(),
    )
}

fn solve_finite(instance: &Instance, config: &SolveConfig) -> Result<Solution> {
    let space = instance.space();
    let count = space.point_count().expect("finite space");
    let terminals = instance.terminals();
    let t: Vec<usize> = terminals.keys().map(|id| id.0).collect();
    let others: Vec<usize> = (0..count).filter(|p| !t.contains(p)).collect();
    let budget = budget(instance, config, t.len(), others.len())?;
    let lengths = space.finite_lengths().expect("finite space");
    let ambient = space.kind() == SpaceKind::Ambient;
    let required: Vec<(usize, usize)> = {
        let net = instance.network(std::iter::empty(), std::iter::empty())?;
        net.required_pairs()
            .iter()
            .map(|&(a, b)| (a.0, b.0))
            .collect()
    };

    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for k in 0..=budget.max_steiner {
        combinations(&others, k, &mut Vec::new(), 0, &mut subsets);
    }
    let run = |extra: &Vec<usize>| -> (usize, Option<(f64, Vec<(usize, usize)>)>) {
        // local index -> point
        let points: Vec<usize> = t.iter().chain(extra).copied().collect();
        let nv = points.len();
        let local: BTreeMap<usize, usize> =
            points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let allowed: Vec<u32> = (0..nv)
            .map(|u| {
                (0..nv)
                    .filter(|&v| lengths[points[u]][points[v]].is_some())
                    .fold(0u32, |acc, v| acc | 1 << v)
            })
            .collect();
        let pairs: Vec<(usize, usize)> =
            required.iter().map(|(a, b)| (local[a], local[b])).collect();
        let steiner_mask = ((1u32 << nv) - 1) & !((1u32 << t.len()) - 1);
        // Ambient arcs cannot be shortcut, so a Steiner point there may
        // legitimately have two neighbours.
        let found = minimal_networks(nv, if ambient { 0 } else { steiner_mask }, &pairs, &allowed);
        let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
        let examined = found.len();
        for mask in found {
            let arcs: Vec<(usize, usize)> = mask_arcs(nv, mask)
                .into_iter()
                .map(|(u, v)| (points[u], points[v]))
                .collect();
            let mut used = 0u32;
            for &(u, v) in &mask_arcs(nv, mask) {
                used |= 1 << u | 1 << v;
            }
            if used & steiner_mask != steiner_mask {
                continue;
            }
            let length: f64 = arcs.iter().map(|&(u, v)| lengths[u][v].unwrap()).sum();
            let mut key = arcs;
            key.sort_unstable();
            let better = match &best {
                None => true,
                Some((l, k)) => length < *l || (length == *l && key < *k),
            };
            if better {
                best = Some((length, key));
            }
        }
        (examined, best)
    };
    let results: Vec<(usize, Option<(f64, Vec<(usize, usize)>)>)> = if config.parallel {
        subsets.par_iter().map(run).collect()
    } else {
        subsets.iter().map(run).collect()
    };
    let examined = results.iter().map(|r| r.0).sum();
    let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
    for (_, r) in results {
        let Some((l, k)) = r else { continue };
        let better = match &best {
            None => true,
            Some((bl, bk)) => l < *bl || (l == *bl && k < *bk),
        };
        if better {
            best = Some((l, k));
        }
    }
    let Some((_, arcs)) = best else {
        return Err(Error::NotConnecting(
            "no network in this space connects the terminals".into(),
        ));
    };
    let network = finite_network(instance, &arcs)?;
    let network = if ambient {
        network.prune_redundant_edges()?
    } else {
        network.simplify_and_prune()?
    };
    Ok(Solution {
        length: network.length(),
        network,
        topologies_examined: examined,
        status: SolveStatus::OptimalWithinBudget,
        converged: true,
        budget,
    })
}

/// Network on the given point-index arcs; non-terminal endpoints become
/// Steiner vertices.
pub(crate) fn finite_network(instance: &Instance, arcs: &[(usize, usize)]) -> Result<Network> {
    let terminals = instance.terminals();
    let steiner: BTreeSet<usize> = arcs
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .filter(|p| !terminals.contains_key(&VertexId(*p)))
        .collect();
    let mut vertices = terminals;
    for p in steiner {
        vertices.insert(
            VertexId(p),
            Vertex {
                role: Role::Steiner,
                location: Point::Vertex(p),
            },
        );
    }
    Network::new(
        instance.space_arc().clone(),
        vertices,
        arcs.iter()
            .map(|&(u, v)| (VertexId(u), VertexId(v)))
            .collect(),
        instance.demand(),
    )
}

fn combinations(
    items: &[usize],
    k: usize,
    cur: &mut Vec<usize>,
    from: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in from..items.len() {
        cur.push(items[i]);
        combinations(items, k, cur, i + 1, out);
        cur.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Space;

    fn euclid(sources: &[[f64; 2]], sinks: &[[f64; 2]]) -> Instance {
        Instance::new(
            Space::euclidean(2).unwrap(),
            sources.iter().map(|p| Point::Coords(p.to_vec())).collect(),
            sinks.iter().map(|p| Point::Coords(p.to_vec())).collect(),
            None,
        )
        .unwrap()
    }

    fn capped(k: usize) -> SolveConfig {
        SolveConfig {
            max_steiner: Some(k),
            ..SolveConfig::default()
        }
    }

    #[test]
    fn single_pair_is_one_edge() {
        let s = solve(&euclid(&[[0.0, 0.0]], &[[3.0, 4.0]]), &capped(2)).unwrap();
        assert_eq!(s.length, 5.0);
        assert_eq!(s.network.edges().len(), 1);
        assert_eq!(s.status, SolveStatus::OptimalWithinBudget);
    }

    #[test]
    fn equilateral_uses_the_fermat_point() {
        let h = 3f64.sqrt() / 2.0;
        let s = solve(&euclid(&[[0.0, 0.0], [1.0, 0.0]], &[[0.5, h]]), &capped(1)).unwrap();
        assert!((s.length - 3f64.sqrt()).abs() < 1e-6);
        assert_eq!(s.network.steiner_count(), 1);
        assert!(s.network.is_simple() && s.network.satisfies_demand());
    }

    #[test]
    fn unit_square_meets_the_steiner_tree_bound() {
        let inst = euclid(&[[0.0, 0.0], [0.0, 1.0]], &[[1.0, 0.0], [1.0, 1.0]]);
        let s = solve(&inst, &capped(2)).unwrap();
        assert!(
            (s.length - (1.0 + 3f64.sqrt())).abs() < 1e-6,
            "{}",
            s.length
        );
        assert_eq!(s.network.steiner_count(), 2);
    }

    #[test]
    fn parallel_and_sequential_agree_exactly() {
        let inst = euclid(&[[0.0, 0.0], [0.2, 1.0]], &[[1.0, 0.1], [1.3, 0.9]]);
        let a = solve(&inst, &capped(2)).unwrap();
        let b = solve(
            &inst,
            &SolveConfig {
                parallel: true,
                ..capped(2)
            },
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.length.to_bits(), b.length.to_bits());
    }

    #[test]
    fn default_budget_is_clamped_and_reported() {
        let s = solve(
            &euclid(&[[0.0, 0.0]], &[[1.0, 0.0]]),
            &SolveConfig::default(),
        )
        .unwrap();
        assert_eq!(s.budget.theorem_bound, 20);
        assert_eq!(s.budget.max_steiner, 6);
        assert!(s.budget.binding);
    }

    #[test]
    fn explicit_budget_over_the_ceiling_is_refused() {
        let inst = euclid(&[[0.0, 0.0], [0.0, 1.0]], &[[1.0, 0.0], [1.0, 1.0]]);
        let err = solve(&inst, &capped(5)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { vertices: 9, .. }));
    }

    #[test]
    fn point_to_point_far_pairs_do_not_share() {
        let inst = Instance::new(
            Space::euclidean(2).unwrap(),
            vec![
                Point::Coords(vec![0.0, 0.0]),
                Point::Coords(vec![100.0, 0.0]),
            ],
            vec![
                Point::Coords(vec![1.0, 0.0]),
                Point::Coords(vec![101.0, 0.0]),
            ],
            Some(vec![(0, 0), (1, 1)]),
        )
        .unwrap();
        let s = solve_point_to_point(&inst, &capped(2)).unwrap();
        assert!((s.length - 2.0).abs() < 1e-9);
        assert_eq!(s.network.steiner_count(), 0);
    }

    #[test]
    fn finite_space_uses_a_hub_point() {
        let labels: Vec<String> = ["a1", "a2", "b", "h"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let d = vec![
            vec![0.0, 2.0, 2.0, 1.0],
            vec![2.0, 0.0, 2.0, 1.0],
            vec![2.0, 2.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0, 0.0],
        ];
        let inst = Instance::new(
            Space::explicit(labels, d).unwrap(),
            vec![Point::Vertex(0), Point::Vertex(1)],
            vec![Point::Vertex(2)],
            None,
        )
        .unwrap();
        let s = solve(&inst, &SolveConfig::default()).unwrap();
        assert_eq!(s.length, 3.0);
        assert_eq!(s.network.steiner_points(), vec![VertexId(3)]);
    }
}
