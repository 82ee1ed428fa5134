//! Minimum equivalent digraphs as shortest networks.
//!
//! For a strongly connected digraph `D`, take `D` itself with unit arc
//! weights as the ambient space and every vertex as both a source and a
//! sink. A shortest connecting network is then a spanning strong subdigraph
//! with the fewest arcs, which is a minimum equivalent digraph of `D`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::reach_mask;
use crate::instance::Instance;
use crate::metric::{Point, Space, WeightedEdge};
use crate::solver::{solve, SolveConfig};

/// Most vertices [`brute_force_med`] accepts.
pub const MED_VERTEX_LIMIT: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    pub vertices: Vec<String>,
    pub arcs: Vec<WeightedEdge>,
}

impl Digraph {
    pub fn new(vertices: Vec<String>, arcs: Vec<WeightedEdge>) -> Result<Self> {
        let distinct: BTreeSet<&String> = vertices.iter().collect();
        if distinct.len() != vertices.len() {
            return Err(Error::InvalidInstance("repeated vertex label".into()));
        }
        let mut seen = BTreeSet::new();
        for (k, a) in arcs.iter().enumerate() {
            if a.from >= vertices.len() || a.to >= vertices.len() {
                return Err(Error::InvalidInstance(format!("arcs[{k}]: unknown vertex")));
            }
            if a.from == a.to {
                return Err(Error::InvalidInstance(format!("arcs[{k}]: self-loop")));
            }
            if !(a.weight > 0.0) || !a.weight.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "arcs[{k}]: weight must be positive"
                )));
            }
            if !seen.insert((a.from, a.to)) {
                return Err(Error::InvalidInstance(format!("arcs[{k}]: duplicate arc")));
            }
        }
        Ok(Digraph { vertices, arcs })
    }

    /// Digraph on `0..n` labelled `v0, v1, ...` with unit weights.
    pub fn unit(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        Digraph::new(
            (0..n).map(|i| format!("v{i}")).collect(),
            arcs.iter()
                .map(|&(from, to)| WeightedEdge {
                    from,
                    to,
                    weight: 1.0,
                })
                .collect(),
        )
    }

    pub fn arc_pairs(&self) -> Vec<(usize, usize)> {
        self.arcs.iter().map(|a| (a.from, a.to)).collect()
    }

    fn out_masks(&self, arcs: impl Iterator<Item = (usize, usize)>) -> Vec<u32> {
        let mut out = vec![0u32; self.vertices.len()];
        for (u, v) in arcs {
            out[u] |= 1 << v;
        }
        out
    }

    /// First ordered pair `(u, v)` with `v` unreachable from `u`.
    pub fn unreachable_pair(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        let mut out = vec![Vec::new(); n];
        for a in &self.arcs {
            out[a.from].push(a.to);
        }
        (0..n).find_map(|u| {
            let mut seen = vec![false; n];
            seen[u] = true;
            let mut stack = vec![u];
            while let Some(x) = stack.pop() {
                for &y in &out[x] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            seen.iter().position(|s| !s).map(|v| (u, v))
        })
    }
}

/// Ambient instance on `d` with unit weights and every vertex a terminal.
pub fn med_to_instance(d: &Digraph) -> Result<Instance> {
    if d.vertices.is_empty() {
        return Err(Error::InvalidInstance("digraph has no vertices".into()));
    }
    if let Some((u, v)) = d.unreachable_pair() {
        return Err(Error::NotStronglyConnected {
            from: d.vertices[u].clone(),
            to: d.vertices[v].clone(),
        });
    }
    let arcs = d
        .arcs
        .iter()
        .map(|a| WeightedEdge {
            from: a.from,
            to: a.to,
            weight: 1.0,
        })
        .collect();
    let space = Space::ambient(d.vertices.clone(), arcs)?;
    let all: Vec<Point> = (0..d.vertices.len()).map(Point::Vertex).collect();
    Instance::new(space, all.clone(), all, None)
}

/// Smallest arc subset with the same reachability relation as `d`, the
/// lexicographically first among those of minimum size.
pub fn brute_force_med(d: &Digraph) -> Result<Vec<(usize, usize)>> {
    let n = d.vertices.len();
    if n > MED_VERTEX_LIMIT {
        return Err(Error::TooLarge {
            what: "digraph vertices",
            count: n,
            limit: MED_VERTEX_LIMIT,
        });
    }
    let mut arcs = d.arc_pairs();
    arcs.sort_unstable();
    let full = d.out_masks(arcs.iter().copied());
    let closure: Vec<u32> = (0..n).map(|u| reach_mask(&full, u)).collect();

    fn search(
        arcs: &[(usize, usize)],
        size: usize,
        from: usize,
        chosen: &mut Vec<usize>,
        test: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if chosen.len() == size {
            return test(chosen);
        }
        for i in from..arcs.len() {
            if arcs.len() - i < size - chosen.len() {
                break;
            }
            chosen.push(i);
            if search(arcs, size, i + 1, chosen, test) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    for size in 0..=arcs.len() {
        let mut chosen = Vec::with_capacity(size);
        let mut test = |c: &[usize]| {
            let out = d.out_masks(c.iter().map(|&i| arcs[i]));
            (0..n).all(|u| reach_mask(&out, u) == closure[u])
        };
        if search(&arcs, size, 0, &mut chosen, &mut test) {
            return Ok(chosen.into_iter().map(|i| arcs[i]).collect());
        }
    }
    unreachable!("the full arc set preserves reachability")
}

/// Minimum equivalent digraph of a strongly connected `d` through the
/// shortest-network solver.
pub fn solve_med(d: &Digraph, config: &SolveConfig) -> Result<Vec<(usize, usize)>> {
    let instance = med_to_instance(d)?;
    let solution = solve(&instance, config)?;
    Ok(solution
        .network
        .edges()
        .iter()
        .map(|&(u, v)| (u.0, v.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn med(d: &Digraph) -> Vec<(usize, usize)> {
        solve_med(d, &SolveConfig::default()).unwrap()
    }

    #[test]
    fn cycles() {
        let c3 = Digraph::unit(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(med(&c3), vec![(0, 1), (1, 2), (2, 0)]);
        assert_eq!(brute_force_med(&c3).unwrap().len(), 3);
        let c2 = Digraph::unit(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(med(&c2), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn complete_digraphs() {
        for n in [3, 4] {
            let arcs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
                .collect();
            let d = Digraph::unit(n, &arcs).unwrap();
            assert_eq!(brute_force_med(&d).unwrap().len(), n);
            assert_eq!(med(&d).len(), n);
        }
    }

    #[test]
    fn oracle_keeps_paths_and_drops_chords() {
        let path = Digraph::unit(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(brute_force_med(&path).unwrap(), vec![(0, 1), (1, 2)]);
        let chord = Digraph::unit(3, &[(0, 1), (1, 2), (2, 0), (0, 2)]).unwrap();
        assert_eq!(
            brute_force_med(&chord).unwrap(),
            vec![(0, 1), (1, 2), (2, 0)]
        );
    }

    #[test]
    fn reduction_keeps_the_digraph() {
        let d = Digraph::unit(3, &[(0, 1), (1, 2), (2, 0), (0, 2)]).unwrap();
        let inst = med_to_instance(&d).unwrap();
        let arcs: Vec<(usize, usize)> = inst
            .space()
            .ambient_arcs()
            .unwrap()
            .keys()
            .copied()
            .collect();
        let mut want = d.arc_pairs();
        want.sort_unstable();
        assert_eq!(arcs, want);
    }

    #[test]
    fn not_strongly_connected_names_a_pair() {
        let d = Digraph::unit(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            med_to_instance(&d).unwrap_err(),
            Error::NotStronglyConnected {
                from: "v1".into(),
                to: "v0".into()
            }
        );
    }
}
