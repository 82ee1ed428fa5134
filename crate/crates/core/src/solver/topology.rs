//! Enumeration of network topologies: edge-minimal connecting digraphs in
//! which every Steiner vertex has at least three neighbours.
//!
//! Every edge-minimal connecting digraph is the union of one path per
//! demand pair. The search builds that union pair by pair, always using the
//! fewest-edge, lexicographically smallest path of the final digraph for
//! each pair that is not already connected. A partial union in which a
//! previously chosen path has stopped being that canonical path can never
//! complete, so each minimal digraph is produced exactly once.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::reach_mask;

/// Default limit on the number of vertices (terminals plus Steiner points)
/// of an enumerated topology.
pub const DEFAULT_VERTEX_CEILING: usize = 8;

/// Hard limit of the bit-set representation (`u64` arc masks).
const MAX_VERTICES: usize = 8;

/// Which connections a topology must provide.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    AllPairs,
    /// Required (source index, sink index) pairs.
    PointToPoint(Vec<(usize, usize)>),
}

/// An abstract digraph on `m` labelled sources (vertices `0..m`), `n`
/// labelled sinks (`m..m+n`) and `k` interchangeable Steiner vertices
/// (`m+n..m+n+k`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub sources: usize,
    pub sinks: usize,
    pub steiner: usize,
    pub arcs: Vec<(usize, usize)>,
    /// Invariant under relabelling of the Steiner vertices.
    pub code: String,
}

impl Topology {
    pub fn vertex_count(&self) -> usize {
        self.sources + self.sinks + self.steiner
    }

    pub fn is_steiner(&self, v: usize) -> bool {
        v >= self.sources + self.sinks
    }
}

/// Required pairs as vertex indices of a topology with `m` sources.
pub(crate) fn topology_pairs(m: usize, n: usize, variant: &Variant) -> Vec<(usize, usize)> {
    match variant {
        Variant::AllPairs => (0..m)
            .flat_map(|a| (0..n).map(move |b| (a, m + b)))
            .collect(),
        Variant::PointToPoint(p) => p.iter().map(|&(a, b)| (a, m + b)).collect(),
    }
}

/// Every topology with exactly `k` Steiner vertices, one per isomorphism
/// class under Steiner relabelling, sorted by canonical code.
pub fn enumerate_topologies(
    m: usize,
    n: usize,
    k: usize,
    variant: &Variant,
    ceiling: usize,
) -> Result<Vec<Topology>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInstance(
            "topologies need at least one source and one sink".into(),
        ));
    }
    if let Variant::PointToPoint(p) = variant {
        if p.is_empty() || p.iter().any(|&(a, b)| a >= m || b >= n) {
            return Err(Error::InvalidInstance(
                "invalid point-to-point pair list".into(),
            ));
        }
    }
    let nv = m + n + k;
    check_ceiling(nv, ceiling)?;
    let pairs = topology_pairs(m, n, variant);
    let steiner_mask = ((1u32 << nv) - 1) & !((1u32 << (m + n)) - 1);
    let allowed = vec![(1u32 << nv) - 1; nv];
    let found = minimal_networks(nv, steiner_mask, &pairs, &allowed);

    let perms = permutations(k);
    let mut classes: BTreeMap<Vec<(usize, usize)>, ()> = BTreeMap::new();
    for mask in found {
        let arcs = mask_arcs(nv, mask);
        classes.insert(canonical_arcs(&arcs, m + n, &perms), ());
    }
    Ok(classes
        .into_keys()
        .map(|arcs| Topology {
            sources: m,
            sinks: n,
            steiner: k,
            code: encode(&arcs),
            arcs,
        })
        .collect())
}

pub(crate) fn check_ceiling(nv: usize, ceiling: usize) -> Result<()> {
    if nv > ceiling.min(MAX_VERTICES) {
        return Err(Error::BudgetExceeded {
            vertices: nv,
            arcs: nv * nv.saturating_sub(1),
            ceiling: ceiling.min(MAX_VERTICES),
        });
    }
    Ok(())
}

/// Lexicographically smallest sorted arc list over all relabellings of the
/// vertices `fixed..`.
pub(crate) fn canonical_arcs(
    arcs: &[(usize, usize)],
    fixed: usize,
    perms: &[Vec<usize>],
) -> Vec<(usize, usize)> {
    let relabel = |v: usize, p: &[usize]| if v < fixed { v } else { fixed + p[v - fixed] };
    perms
        .iter()
        .map(|p| {
            let mut a: Vec<(usize, usize)> = arcs
                .iter()
                .map(|&(u, v)| (relabel(u, p), relabel(v, p)))
                .collect();
            a.sort_unstable();
            a
        })
        .min()
        .unwrap_or_else(|| {
            let mut a = arcs.to_vec();
            a.sort_unstable();
            a
        })
}

/// `"u>v,u>v,..."` with base-36 vertex digits, so that string order agrees
/// with arc-list order.
pub(crate) fn encode(arcs: &[(usize, usize)]) -> String {
    let digit = |v: usize| std::char::from_digit(v as u32, 36).expect("vertex < 36");
    arcs.iter()
        .map(|&(u, v)| format!("{}>{}", digit(u), digit(v)))
        .collect::<Vec<_>>()
        .join(",")
}

pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

#[inline]
pub(crate) fn arc_bit(nv: usize, u: usize, v: usize) -> u64 {
    1u64 << (u * nv + v)
}

pub(crate) fn mask_arcs(nv: usize, mask: u64) -> Vec<(usize, usize)> {
    let mut m = mask;
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        out.push((i / nv, i % nv));
    }
    out
}

fn out_masks(nv: usize, mask: u64) -> [u32; MAX_VERTICES] {
    let mut out = [0u32; MAX_VERTICES];
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        out[i / nv] |= 1 << (i % nv);
    }
    out
}

fn in_masks(nv: usize, mask: u64) -> [u32; MAX_VERTICES] {
    let mut inn = [0u32; MAX_VERTICES];
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        inn[i % nv] |= 1 << (i / nv);
    }
    inn
}

/// Fewest-edge, lexicographically smallest `a`-`b` path, as a vertex list.
fn canonical_path(nv: usize, out: &[u32], inn: &[u32], a: usize, b: usize) -> Option<Vec<u8>> {
    let mut dist = [u8::MAX; MAX_VERTICES];
    dist[b] = 0;
    let mut frontier = 1u32 << b;
    let mut seen = frontier;
    let mut d = 0u8;
    while frontier != 0 && dist[a] == u8::MAX {
        d += 1;
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= inn[v];
        }
        next &= !seen;
        seen |= next;
        let mut x = next;
        while x != 0 {
            let v = x.trailing_zeros() as usize;
            x &= x - 1;
            dist[v] = d;
        }
        frontier = next;
    }
    if dist[a] == u8::MAX {
        return None;
    }
    let mut path = vec![a as u8];
    let mut cur = a;
    while cur != b {
        let mut cand = out[cur];
        let mut step = None;
        while cand != 0 {
            let w = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            if w < nv && dist[w] != u8::MAX && dist[w] + 1 == dist[cur] {
                step = Some(w);
                break;
            }
        }
        cur = step.expect("distance labels are consistent");
        path.push(cur as u8);
    }
    Some(path)
}

struct PathRec {
    verts: Vec<u8>,
    arcs: u64,
}

fn all_simple_paths(nv: usize, allowed: &[u32], a: usize, b: usize) -> Vec<PathRec> {
    fn rec(
        nv: usize,
        allowed: &[u32],
        b: usize,
        cur: &mut Vec<u8>,
        arcs: u64,
        used: u32,
        out: &mut Vec<PathRec>,
    ) {
        let u = *cur.last().unwrap() as usize;
        if u == b {
            out.push(PathRec {
                verts: cur.clone(),
                arcs,
            });
            return;
        }
        let mut cand = allowed[u] & !used;
        while cand != 0 {
            let w = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            cur.push(w as u8);
            rec(
                nv,
                allowed,
                b,
                cur,
                arcs | arc_bit(nv, u, w),
                used | (1 << w),
                out,
            );
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(nv, allowed, b, &mut vec![a as u8], 0, 1 << a, &mut out);
    out.sort_by(|x, y| (x.verts.len(), &x.verts).cmp(&(y.verts.len(), &y.verts)));
    out
}

/// All edge-minimal arc sets on `nv` labelled vertices that connect every
/// pair in `pairs`, use only `allowed` arcs (`allowed[u]` is the bit-set of
/// permitted heads for tail `u`) and give every vertex in `steiner_mask` at
/// least three neighbours. Returned as arc masks (bit `u * nv + v`).
pub(crate) fn minimal_networks(
    nv: usize,
    steiner_mask: u32,
    pairs: &[(usize, usize)],
    allowed: &[u32],
) -> Vec<u64> {
    assert!(nv <= MAX_VERTICES);
    let allowed: Vec<u32> = (0..nv)
        .map(|u| allowed[u] & !(1 << u) & ((1 << nv) - 1))
        .collect();
    let pairs: Vec<(usize, usize)> = pairs.iter().copied().filter(|(a, b)| a != b).collect();
    let paths: Vec<Vec<PathRec>> = pairs
        .iter()
        .map(|&(a, b)| all_simple_paths(nv, &allowed, a, b))
        .collect();

    struct Search<'a> {
        nv: usize,
        steiner_mask: u32,
        pairs: &'a [(usize, usize)],
        paths: &'a [Vec<PathRec>],
        chosen: Vec<Option<usize>>,
        found: Vec<u64>,
    }

    impl Search<'_> {
        fn leaf(&mut self, mask: u64) {
            let out = out_masks(self.nv, mask);
            let inn = in_masks(self.nv, mask);
            let mut s = self.steiner_mask;
            while s != 0 {
                let v = s.trailing_zeros() as usize;
                s &= s - 1;
                if (out[v] | inn[v]).count_ones() < 3 {
                    return;
                }
            }
            let mut arcs = mask;
            while arcs != 0 {
                let i = arcs.trailing_zeros() as usize;
                arcs &= arcs - 1;
                let (u, v) = (i / self.nv, i % self.nv);
                let mut o = out;
                o[u] &= !(1 << v);
                if connects(&o[..self.nv], self.pairs) {
                    return;
                }
            }
            self.found.push(mask);
        }

        fn go(&mut self, i: usize, mask: u64) {
            if i == self.pairs.len() {
                self.leaf(mask);
                return;
            }
            let (a, b) = self.pairs[i];
            let out = out_masks(self.nv, mask);
            if reach_mask(&out[..self.nv], a) & (1 << b) != 0 {
                self.chosen[i] = None;
                self.go(i + 1, mask);
                return;
            }
            for p in 0..self.paths[i].len() {
                let next = mask | self.paths[i][p].arcs;
                self.chosen[i] = Some(p);
                if self.still_canonical(i, next) {
                    self.go(i + 1, next);
                }
            }
            self.chosen[i] = None;
        }

        fn still_canonical(&self, upto: usize, mask: u64) -> bool {
            let out = out_masks(self.nv, mask);
            let inn = in_masks(self.nv, mask);
            (0..=upto).all(|j| match self.chosen[j] {
                None => true,
                Some(p) => {
                    let (a, b) = self.pairs[j];
                    canonical_path(self.nv, &out, &inn, a, b).as_deref()
                        == Some(&self.paths[j][p].verts[..])
                }
            })
        }
    }

    let mut search = Search {
        nv,
        steiner_mask,
        pairs: &pairs,
        paths: &paths,
        chosen: vec![None; pairs.len()],
        found: Vec::new(),
    };
    search.go(0, 0);
    let mut found = search.found;
    found.sort_unstable();
    debug_assert!(found.windows(2).all(|w| w[0] != w[1]));
    found
}

pub(crate) fn connects(out: &[u32], pairs: &[(usize, usize)]) -> bool {
    let mut last = usize::MAX;
    let mut reach = 0u32;
    for &(a, b) in pairs {
        if a != last {
            reach = reach_mask(out, a);
            last = a;
        }
        if reach & (1 << b) == 0 {
            return false;
        }
    }
    true
}
