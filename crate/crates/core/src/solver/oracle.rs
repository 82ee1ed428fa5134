//! Ground truth for finite spaces by branch and bound over edge subsets of
//! the complete digraph on all points.

use super::{finite_network, Budget, Solution, SolveStatus};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::network::VertexId;

/// Most points the oracle will search.
pub const ORACLE_POINT_LIMIT: usize = 7;

struct Arc {
    u: usize,
    v: usize,
    w: f64,
}

struct Search<'a> {
    n: usize,
    arcs: &'a [Arc],
    pairs: &'a [(usize, usize)],
    /// `suffix[i][u]`: heads of arcs `arcs[i..]` leaving `u`.
    suffix: Vec<Vec<u32>>,
    best: f64,
    best_set: Option<Vec<usize>>,
}

fn reach(out: &[u32], start: usize) -> u32 {
    let mut seen = 1u32 << start;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        let mut next = out[u] & !seen;
        seen |= next;
        while next != 0 {
            let v = next.trailing_zeros() as usize;
            next &= next - 1;
            stack.push(v);
        }
    }
    seen
}

impl Search<'_> {
    fn connected(&self, out: &[u32]) -> bool {
        self.pairs
            .iter()
            .all(|&(a, b)| reach(out, a) & (1 << b) != 0)
    }

    fn go(&mut self, i: usize, out: &mut Vec<u32>, cost: f64, chosen: &mut Vec<usize>) {
        if cost >= self.best {
            return;
        }
        if self.connected(out) {
            self.best = cost;
            self.best_set = Some(chosen.clone());
            return;
        }
        if i == self.arcs.len() {
            return;
        }
        let possible: Vec<u32> = (0..self.n).map(|u| out[u] | self.suffix[i][u]).collect();
        if !self.connected(&possible) {
            return;
        }
        let (u, v, w) = (self.arcs[i].u, self.arcs[i].v, self.arcs[i].w);
        out[u] |= 1 << v;
        chosen.push(i);
        self.go(i + 1, out, cost + w, chosen);
        chosen.pop();
        out[u] &= !(1 << v);
        self.go(i + 1, out, cost, chosen);
    }
}

/// A minimum-length connecting network found by exhaustive search.
pub fn brute_force_oracle(instance: &Instance) -> Result<Solution> {
    let space = instance.space();
    let Some(lengths) = space.finite_lengths() else {
        return Err(Error::UnsupportedMode(
            "the oracle needs a finite space".into(),
        ));
    };
    let n = lengths.len();
    if n > ORACLE_POINT_LIMIT {
        return Err(Error::TooLarge {
            what: "points",
            count: n,
            limit: ORACLE_POINT_LIMIT,
        });
    }
    let mut arcs: Vec<Arc> = Vec::new();
    for (u, row) in lengths.iter().enumerate() {
        for (v, w) in row.iter().enumerate() {
            if let Some(w) = *w {
                arcs.push(Arc { u, v, w });
            }
        }
    }
    arcs.sort_by(|a, b| a.w.total_cmp(&b.w).then((a.u, a.v).cmp(&(b.u, b.v))));
    let mut suffix = vec![vec![0u32; n]; arcs.len() + 1];
    for i in (0..arcs.len()).rev() {
        suffix[i] = suffix[i + 1].clone();
        suffix[i][arcs[i].u] |= 1 << arcs[i].v;
    }
    let net = instance.network(std::iter::empty(), std::iter::empty())?;
    let pairs: Vec<(usize, usize)> = net
        .required_pairs()
        .into_iter()
        .filter(|(a, b)| a != b)
        .map(|(VertexId(a), VertexId(b))| (a, b))
        .collect();

    let mut search = Search {
        n,
        arcs: &arcs,
        pairs: &pairs,
        suffix,
        best: f64::INFINITY,
        best_set: None,
    };
    search.go(0, &mut vec![0u32; n], 0.0, &mut Vec::new());
    let Some(set) = search.best_set else {
        return Err(Error::NotConnecting(
            "no network in this space connects the terminals".into(),
        ));
    };
    let chosen: Vec<(usize, usize)> = set.iter().map(|&i| (arcs[i].u, arcs[i].v)).collect();
    let network = finite_network(instance, &chosen)?;
    let m = instance.m();
    let k = instance.n();
    Ok(Solution {
        length: network.length(),
        network,
        topologies_examined: 0,
        status: SolveStatus::OracleExact,
        converged: true,
        budget: Budget {
            theorem_bound: super::theorem_bound(m, k, pairs.len()),
            max_steiner: n,
            binding: false,
        },
    })
}
