//! Dense adjacency snapshot of a network used by the traversal-heavy
//! algorithms. Vertices are renumbered `0..n` in id order.

use std::collections::{HashMap, VecDeque};

use crate::network::VertexId;

#[derive(Debug, Clone)]
pub(crate) struct Adjacency {
    pub ids: Vec<VertexId>,
    pub pos: HashMap<VertexId, usize>,
    /// Out-neighbours, sorted ascending.
    pub out: Vec<Vec<usize>>,
    /// In-neighbours, sorted ascending.
    pub inn: Vec<Vec<usize>>,
}

impl Adjacency {
    pub fn new<'a>(
        ids: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = &'a (VertexId, VertexId)>,
    ) -> Self {
        let ids: Vec<VertexId> = ids.into_iter().collect();
        let pos: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut out = vec![Vec::new(); ids.len()];
        let mut inn = vec![Vec::new(); ids.len()];
        for (u, v) in edges {
            let (u, v) = (pos[u], pos[v]);
            out[u].push(v);
            inn[v].push(u);
        }
        for l in out.iter_mut().chain(inn.iter_mut()) {
            l.sort_unstable();
            l.dedup();
        }
        Adjacency { ids, pos, out, inn }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    fn bfs(&self, start: usize, forward: bool, skip: Option<(usize, usize)>) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let next = if forward { &self.out[u] } else { &self.inn[u] };
            for &v in next {
                if let Some((a, b)) = skip {
                    let (x, y) = if forward { (u, v) } else { (v, u) };
                    if (x, y) == (a, b) {
                        continue;
                    }
                }
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    pub fn reach(&self, start: usize) -> Vec<bool> {
        self.bfs(start, true, None)
    }

    pub fn coreach(&self, target: usize) -> Vec<bool> {
        self.bfs(target, false, None)
    }

    /// Reachability from `start` with the edge `skip` removed.
    pub fn reach_without(&self, start: usize, skip: (usize, usize)) -> Vec<bool> {
        self.bfs(start, true, Some(skip))
    }

    /// Fewest-edge path from `from` to `to`, lexicographically smallest
    /// among those (by dense index, which follows id order). `allowed`
    /// filters the vertices that may be used as intermediate stops.
    pub fn shortest_path(
        &self,
        from: usize,
        to: usize,
        allowed: impl Fn(usize) -> bool,
    ) -> Option<Vec<usize>> {
        if from == to {
            return Some(vec![from]);
        }
        // distance to `to` over reversed edges, then greedy descent from `from`.
        let mut dist = vec![usize::MAX; self.len()];
        dist[to] = 0;
        let mut queue = VecDeque::from([to]);
        while let Some(v) = queue.pop_front() {
            for &u in &self.inn[v] {
                if dist[u] == usize::MAX && (u == from || allowed(u)) {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        if dist[from] == usize::MAX {
            return None;
        }
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            cur = *self.out[cur]
                .iter()
                .find(|&&w| dist[w] != usize::MAX && dist[w] + 1 == dist[cur])
                .expect("distance labels are consistent");
            path.push(cur);
        }
        Some(path)
    }

    pub fn to_ids(&self, path: &[usize]) -> Vec<VertexId> {
        path.iter().map(|&i| self.ids[i]).collect()
    }
}

/// Bit-set reachability over at most 32 vertices, used by the exhaustive
/// searches where the same small digraph is probed millions of times.
#[inline]
pub(crate) fn reach_mask(out: &[u32], start: usize) -> u32 {
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let u = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= out[u];
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen
}
