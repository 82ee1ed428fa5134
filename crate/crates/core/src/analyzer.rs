//! Structural certification of connecting networks.
//!
//! A longest source-to-sink path `P = x_0 x_1 ... x_{k+1}` is fixed and
//! every source-to-sink connection is rewritten into a canonical walk: an
//! entry segment onto `P`, forward runs along `P` separated by backward
//! excursions `x_i ~> x_j` (`i > j`) that share no edge with `P` (jumps),
//! and an exit segment off `P`. A minimal set of jumps that together with
//! `P` and the entry/exit segments still covers the network bounds the
//! length of `P`, which in turn bounds the number of Steiner points of a
//! simple shortest network. [`certify`] evaluates all of those bounds on
//! one network; a violated bound proves that the network is not a simple
//! shortest network, while passing proves nothing about optimality.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Adjacency;
use crate::instance::Instance;
use crate::metric::SpaceKind;
use crate::network::{Demand, Network, VertexId};

/// Simple paths enumerated before [`longest_ab_path`] gives up.
pub const PATH_LIMIT: usize = 1_000_000;

/// Vertex-count bound on any source-to-sink path: `9(m+n)+2`.
pub fn path_bound(m: usize, n: usize) -> usize {
    9 * (m + n) + 2
}

/// Bound on the size of a minimal jump cover: `4(m+n)+1`.
pub fn cover_bound(m: usize, n: usize) -> usize {
    4 * (m + n) + 1
}

/// Bound on the number of Steiner points: `m n (9(m+n)+2)`.
pub fn steiner_bound(m: usize, n: usize) -> usize {
    m * n * path_bound(m, n)
}

/// An `x_i ~> x_j` excursion (`i > j`) edge-disjoint from `P`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Jump {
    pub i: usize,
    pub j: usize,
    /// Vertices from `x_i` to `x_j` inclusive.
    pub route: Vec<VertexId>,
}

impl Jump {
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.route.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Canonical form of one source-to-sink connection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalPath {
    pub source: VertexId,
    pub sink: VertexId,
    pub walk: Vec<VertexId>,
    /// Jumps used, in order, as indices into [`PathDecomposition::jumps`].
    pub jumps: Vec<usize>,
    /// True when the walk never touches `P`.
    pub avoids_path: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDecomposition {
    /// `P`, from a source `x_0` to a sink `x_{k+1}`.
    pub path: Vec<VertexId>,
    /// Index on `P` of `x(a)`, the earliest vertex of `P` a source reaches.
    pub x_of_a: BTreeMap<VertexId, usize>,
    /// Index on `P` of `y(b)`, the latest vertex of `P` reaching a sink.
    pub y_of_b: BTreeMap<VertexId, usize>,
    /// `P(a)`: a fewest-edge path from each source to `x(a)`.
    pub source_paths: BTreeMap<VertexId, Vec<VertexId>>,
    /// `Q(b)`: a fewest-edge path from `y(b)` to each sink.
    pub sink_paths: BTreeMap<VertexId, Vec<VertexId>>,
    /// Entry segment of each source: onto `P`, touching it only at the end.
    pub entries: BTreeMap<VertexId, Vec<VertexId>>,
    /// Exit segment of each sink: off `P`, touching it only at the start.
    pub exits: BTreeMap<VertexId, Vec<VertexId>>,
    /// `J`: every jump of every canonical path, sorted.
    pub jumps: Vec<Jump>,
    /// `I`: indices into `jumps` of an inclusion-minimal cover.
    pub cover: Vec<usize>,
    /// Canonical paths, rewritten to use only jumps from the cover.
    pub canonical_paths: BTreeMap<(VertexId, VertexId), CanonicalPath>,
}

impl PathDecomposition {
    pub fn cover_jumps(&self) -> impl Iterator<Item = &Jump> {
        self.cover.iter().map(|&c| &self.jumps[c])
    }

    /// `X`: indices of all `x(a)` and `y(b)`, sorted.
    pub fn anchors(&self) -> BTreeSet<usize> {
        self.x_of_a
            .values()
            .chain(self.y_of_b.values())
            .copied()
            .collect()
    }
}

/// One reason a network cannot be a simple shortest network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Witness {
    NotSimple {
        vertex: VertexId,
    },
    PathTooLong {
        vertices: usize,
        bound: usize,
    },
    CoverTooLarge {
        size: usize,
        bound: usize,
    },
    TooManySteiner {
        count: usize,
        bound: usize,
    },
    /// A Steiner vertex inside `P` that is neither an anchor nor an end of
    /// a cover jump.
    UnclassifiedPathVertex {
        index: usize,
    },
    /// Two cover jumps share a first or a second index.
    RepeatedJumpIndex {
        first: (usize, usize),
        second: (usize, usize),
    },
    /// More than two cover jumps span an anchor.
    Property1 {
        index: usize,
        spanning: usize,
    },
    /// Two consecutive cover jumps span no anchor.
    Property2 {
        first: (usize, usize),
        second: (usize, usize),
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "witnesses")]
pub enum Verdict {
    Consistent,
    Inconsistent(Vec<Witness>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub m: usize,
    pub n: usize,
    pub max_path_vertices: usize,
    pub path_bound: usize,
    pub cover_size: usize,
    pub cover_bound: usize,
    pub steiner_count: usize,
    pub steiner_bound: usize,
    pub simple: bool,
    pub path_vertices_classified: bool,
    pub distinct_indices: bool,
    pub property1_ok: bool,
    pub property2_ok: bool,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }
}

fn require_all_pairs(net: &Network) -> Result<()> {
    if let Demand::Pairs(_) = net.demand() {
        return Err(Error::UnsupportedMode(
            "certification covers the all-pairs variant only".into(),
        ));
    }
    if !net.satisfies_demand() {
        return Err(Error::NotConnecting(
            "some source does not reach some sink".into(),
        ));
    }
    Ok(())
}

/// A source-to-sink simple path with the most vertices, ties going to the
/// lexicographically smallest id sequence.
pub fn longest_ab_path(net: &Network) -> Result<Vec<VertexId>> {
    let g = net.adjacency();
    let sinks: BTreeSet<usize> = net.sinks().iter().map(|b| g.pos[b]).collect();
    let mut best: Vec<usize> = Vec::new();
    let mut count = 0usize;

    fn dfs(
        g: &Adjacency,
        sinks: &BTreeSet<usize>,
        cur: &mut Vec<usize>,
        on: &mut [bool],
        best: &mut Vec<usize>,
        count: &mut usize,
    ) -> Result<()> {
        let u = *cur.last().unwrap();
        if sinks.contains(&u) {
            *count += 1;
            if *count > PATH_LIMIT {
                return Err(Error::TooLarge {
                    what: "simple source-sink paths",
                    count: *count,
                    limit: PATH_LIMIT,
                });
            }
            if cur.len() > best.len() || (cur.len() == best.len() && *cur < *best) {
                *best = cur.clone();
            }
        }
        for &v in &g.out[u] {
            if !on[v] {
                on[v] = true;
                cur.push(v);
                dfs(g, sinks, cur, on, best, count)?;
                cur.pop();
                on[v] = false;
            }
        }
        Ok(())
    }

    for a in net.sources() {
        let s = g.pos[&a];
        let mut on = vec![false; g.len()];
        on[s] = true;
        dfs(&g, &sinks, &mut vec![s], &mut on, &mut best, &mut count)?;
    }
    if best.is_empty() {
        return Err(Error::NotConnecting("no source reaches a sink".into()));
    }
    Ok(g.to_ids(&best))
}

fn path_index(g: &Adjacency, path: &[VertexId]) -> Vec<Option<usize>> {
    let mut idx = vec![None; g.len()];
    for (t, v) in path.iter().enumerate() {
        idx[g.pos[v]] = Some(t);
    }
    idx
}

fn check_path(net: &Network, path: &[VertexId]) -> Result<()> {
    let distinct: BTreeSet<&VertexId> = path.iter().collect();
    let ok = !path.is_empty()
        && distinct.len() == path.len()
        && path.windows(2).all(|w| net.edges().contains(&(w[0], w[1])))
        && net.vertex(path[0]).is_some_and(|v| v.role.is_source())
        && net
            .vertex(path[path.len() - 1])
            .is_some_and(|v| v.role.is_sink());
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidNetwork(
            "not a simple source-to-sink path of the network".into(),
        ))
    }
}

/// `x(a)`: the index of the earliest vertex of `path` reachable from `a`,
/// with a fewest-edge witness path `P(a)`.
pub fn first_reach(
    net: &Network,
    path: &[VertexId],
    a: VertexId,
) -> Result<(usize, Vec<VertexId>)> {
    let g = net.adjacency();
    let Some(&s) = g.pos.get(&a) else {
        return Err(Error::InvalidTerminal(format!("{a} is not a vertex")));
    };
    let reach = g.reach(s);
    let t = path
        .iter()
        .position(|v| reach[g.pos[v]])
        .ok_or_else(|| Error::Corruption(format!("{a} reaches no vertex of the path")))?;
    let witness = g
        .shortest_path(s, g.pos[&path[t]], |_| true)
        .expect("reachable");
    Ok((t, g.to_ids(&witness)))
}

/// `y(b)`: the index of the latest vertex of `path` that reaches `b`, with
/// a fewest-edge witness path `Q(b)`.
pub fn last_reach(net: &Network, path: &[VertexId], b: VertexId) -> Result<(usize, Vec<VertexId>)> {
    let g = net.adjacency();
    let Some(&s) = g.pos.get(&b) else {
        return Err(Error::InvalidTerminal(format!("{b} is not a vertex")));
    };
    let coreach = g.coreach(s);
    let t = path
        .iter()
        .rposition(|v| coreach[g.pos[v]])
        .ok_or_else(|| Error::Corruption(format!("no vertex of the path reaches {b}")))?;
    let witness = g
        .shortest_path(g.pos[&path[t]], s, |_| true)
        .expect("reachable");
    Ok((t, g.to_ids(&witness)))
}

/// Working state shared by the canonicalisation steps (dense indices).
struct Frame<'a> {
    g: &'a Adjacency,
    path: Vec<usize>,
    idx: Vec<Option<usize>>,
}

impl Frame<'_> {
    fn off_path(&self, v: usize) -> bool {
        self.idx[v].is_none()
    }

    /// Entry segment of `a`: `[a]` if `a` is on `P`, else a fewest-edge path
    /// to the earliest vertex of `P` reachable without touching `P` before.
    fn entry(&self, a: usize) -> Option<Vec<usize>> {
        if self.idx[a].is_some() {
            return Some(vec![a]);
        }
        self.path
            .iter()
            .find_map(|&x| self.g.shortest_path(a, x, |v| self.off_path(v)))
    }

    fn exit(&self, b: usize) -> Option<Vec<usize>> {
        if self.idx[b].is_some() {
            return Some(vec![b]);
        }
        self.path
            .iter()
            .rev()
            .find_map(|&x| self.g.shortest_path(x, b, |v| self.off_path(v)))
    }

    /// Canonical form of an `a`-`b` walk: the entry segment, forward runs
    /// along `P` and backward jumps, then the exit segment. Returns the
    /// walk and its jumps; `None` jumps list means the walk avoids `P`.
    fn canonicalize(
        &self,
        w: &[usize],
        entry: &[usize],
        exit: &[usize],
    ) -> (Vec<usize>, Option<Vec<Jump>>) {
        let visits: Vec<usize> = (0..w.len()).filter(|&p| self.idx[w[p]].is_some()).collect();
        if visits.is_empty() {
            return (w.to_vec(), None);
        }
        let at = |q: usize| self.idx[w[visits[q]]].unwrap();
        let mut out: Vec<usize> = entry.to_vec();
        let mut cur = self.idx[*entry.last().unwrap()].unwrap();
        let mut jumps = Vec::new();
        let forward = |out: &mut Vec<usize>, from: usize, to: usize| {
            out.extend_from_slice(&self.path[from + 1..=to]);
        };
        // first step may stay in place
        let mut q = (0..visits.len())
            .rev()
            .find(|&q| at(q) >= cur)
            .expect("entry is earliest");
        forward(&mut out, cur, at(q));
        cur = at(q);
        loop {
            if let Some(r) = (q + 1..visits.len()).rev().find(|&r| at(r) > cur) {
                forward(&mut out, cur, at(r));
                cur = at(r);
                q = r;
            } else if q + 1 < visits.len() {
                let seg = &w[visits[q]..=visits[q + 1]];
                out.extend_from_slice(&seg[1..]);
                jumps.push(Jump {
                    i: cur,
                    j: at(q + 1),
                    route: self.g.to_ids(seg),
                });
                cur = at(q + 1);
                q += 1;
            } else {
                break;
            }
        }
        let end = self.idx[exit[0]].unwrap();
        debug_assert!(end >= cur);
        forward(&mut out, cur, end);
        out.extend_from_slice(&exit[1..]);
        (out, Some(jumps))
    }
}

/// Canonical form of a source-to-sink walk relative to `path`: the entry
/// segment of its source, forward runs along `path` and backward jumps,
/// then the exit segment of its sink. The jump list is `None` when the walk
/// never touches `path`.
pub fn canonicalize_path(
    net: &Network,
    path: &[VertexId],
    walk: &[VertexId],
) -> Result<(Vec<VertexId>, Option<Vec<Jump>>)> {
    check_path(net, path)?;
    let ok = walk.len() >= 2
        && walk.windows(2).all(|w| net.edges().contains(&(w[0], w[1])))
        && net.vertex(walk[0]).is_some_and(|v| v.role.is_source())
        && net
            .vertex(walk[walk.len() - 1])
            .is_some_and(|v| v.role.is_sink());
    if !ok {
        return Err(Error::InvalidNetwork(
            "not a source-to-sink walk of the network".into(),
        ));
    }
    let g = net.adjacency();
    let frame = Frame {
        g: &g,
        path: path.iter().map(|v| g.pos[v]).collect(),
        idx: path_index(&g, path),
    };
    let w: Vec<usize> = walk.iter().map(|v| g.pos[v]).collect();
    let (entry, exit) = match (frame.entry(w[0]), frame.exit(w[w.len() - 1])) {
        (Some(e), Some(x)) => (e, x),
        _ => return Ok((walk.to_vec(), None)),
    };
    let (out, jumps) = frame.canonicalize(&w, &entry, &exit);
    Ok((g.to_ids(&out), jumps))
}

/// Decomposition relative to a longest source-to-sink path.
pub fn decompose(net: &Network) -> Result<PathDecomposition> {
    require_all_pairs(net)?;
    let path = longest_ab_path(net)?;
    decompose_along(net, &path)
}

/// Decomposition relative to a given simple source-to-sink path.
pub fn decompose_along(net: &Network, path: &[VertexId]) -> Result<PathDecomposition> {
    require_all_pairs(net)?;
    check_path(net, path)?;
    let g = net.adjacency();
    let frame = Frame {
        g: &g,
        path: path.iter().map(|v| g.pos[v]).collect(),
        idx: path_index(&g, path),
    };
    let sources = net.sources();
    let sinks = net.sinks();

    let mut x_of_a = BTreeMap::new();
    let mut source_paths = BTreeMap::new();
    let mut entries = BTreeMap::new();
    for &a in &sources {
        let (t, p) = first_reach(net, path, a)?;
        x_of_a.insert(a, t);
        source_paths.insert(a, p);
        let e = frame
            .entry(g.pos[&a])
            .ok_or_else(|| Error::Corruption(format!("{a} has no entry onto the path")))?;
        entries.insert(a, e);
    }
    let mut y_of_b = BTreeMap::new();
    let mut sink_paths = BTreeMap::new();
    let mut exits = BTreeMap::new();
    for &b in &sinks {
        let (t, q) = last_reach(net, path, b)?;
        y_of_b.insert(b, t);
        sink_paths.insert(b, q);
        let e = frame
            .exit(g.pos[&b])
            .ok_or_else(|| Error::Corruption(format!("{b} has no exit from the path")))?;
        exits.insert(b, e);
    }

    // canonical walks with their raw jumps
    let mut raw: Vec<(VertexId, VertexId, Vec<usize>, Option<Vec<Jump>>)> = Vec::new();
    for &a in &sources {
        for &b in &sinks {
            let (s, t) = (g.pos[&a], g.pos[&b]);
            if s == t {
                continue;
            }
            let entry = &entries[&a];
            let exit = &exits[&b];
            let (e, f) = (
                frame.idx[*entry.last().unwrap()].unwrap(),
                frame.idx[exit[0]].unwrap(),
            );
            let w: Vec<usize> = if e <= f {
                let mut w = entry.clone();
                w.extend_from_slice(&frame.path[e + 1..=f]);
                w.extend_from_slice(&exit[1..]);
                w
            } else {
                g.shortest_path(s, t, |_| true)
                    .ok_or_else(|| Error::NotConnecting(format!("{a} does not reach {b}")))?
            };
            let (walk, jumps) = frame.canonicalize(&w, entry, exit);
            raw.push((a, b, walk, jumps));
        }
    }

    let jumps: Vec<Jump> = raw
        .iter()
        .flat_map(|r| r.3.iter().flatten().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let jump_index: BTreeMap<&Jump, usize> =
        jumps.iter().enumerate().map(|(k, j)| (j, k)).collect();

    // edges covered without any jump
    let mut base: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let add = |seq: &[VertexId], into: &mut BTreeSet<(VertexId, VertexId)>| {
        into.extend(seq.windows(2).map(|w| (w[0], w[1])));
    };
    add(path, &mut base);
    for s in entries.values().chain(exits.values()) {
        add(&g.to_ids(s), &mut base);
    }
    for r in &raw {
        if r.3.is_none() {
            add(&g.to_ids(&r.2), &mut base);
        }
    }
    let mut count: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
    for j in &jumps {
        for e in j.edges() {
            *count.entry(e).or_default() += 1;
        }
    }
    if let Some(&(u, v)) = net
        .edges()
        .iter()
        .find(|e| !base.contains(e) && !count.contains_key(e))
    {
        return Err(Error::UncoveredEdge { from: u.0, to: v.0 });
    }

    // greedy deletion in canonical jump order
    let mut kept = vec![true; jumps.len()];
    for (k, j) in jumps.iter().enumerate() {
        if j.edges().all(|e| base.contains(&e) || count[&e] >= 2) {
            kept[k] = false;
            for e in j.edges() {
                *count.get_mut(&e).unwrap() -= 1;
            }
        }
    }
    let cover: Vec<usize> = (0..jumps.len()).filter(|&k| kept[k]).collect();

    // rewrite walks so that they use only cover jumps
    let mut allowed = base.clone();
    for &c in &cover {
        allowed.extend(jumps[c].edges());
    }
    let sub = Adjacency::new(g.ids.iter().copied(), allowed.iter());
    let mut canonical_paths = BTreeMap::new();
    for (a, b, walk, js) in raw {
        let ids = g.to_ids(&walk);
        let Some(js) = js else {
            canonical_paths.insert(
                (a, b),
                CanonicalPath {
                    source: a,
                    sink: b,
                    walk: ids,
                    jumps: Vec::new(),
                    avoids_path: true,
                },
            );
            continue;
        };
        let mut out: Vec<VertexId> = Vec::new();
        let mut used = Vec::new();
        let mut rest: &[VertexId] = &ids;
        for j in &js {
            let k = jump_index[j];
            let start = rest
                .windows(j.route.len())
                .position(|w| w == j.route.as_slice())
                .expect("jump lies on its walk");
            out.extend_from_slice(&rest[..start]);
            if kept[k] {
                out.extend_from_slice(&j.route[..j.route.len() - 1]);
                used.push(k);
            } else {
                let (s, t) = (sub.pos[&j.route[0]], sub.pos[j.route.last().unwrap()]);
                let detour = sub.shortest_path(s, t, |_| true).ok_or_else(|| {
                    Error::Corruption(format!(
                        "jump ({}, {}) cannot be replaced inside the cover",
                        j.i, j.j
                    ))
                })?;
                let detour = sub.to_ids(&detour);
                out.extend_from_slice(&detour[..detour.len() - 1]);
                // record the cover jumps the replacement route follows
                for c in &cover {
                    let r = &jumps[*c].route;
                    if detour.windows(r.len()).any(|w| w == r.as_slice()) {
                        used.push(*c);
                    }
                }
            }
            rest = &rest[start + j.route.len() - 1..];
        }
        out.extend_from_slice(rest);
        canonical_paths.insert(
            (a, b),
            CanonicalPath {
                source: a,
                sink: b,
                walk: out,
                jumps: used,
                avoids_path: false,
            },
        );
    }

    Ok(PathDecomposition {
        path: path.to_vec(),
        x_of_a,
        y_of_b,
        source_paths,
        sink_paths,
        entries: entries
            .into_iter()
            .map(|(a, e)| (a, g.to_ids(&e)))
            .collect(),
        exits: exits.into_iter().map(|(b, e)| (b, g.to_ids(&e))).collect(),
        jumps,
        cover,
        canonical_paths,
    })
}

/// Jumps of `cover` sorted by first index.
fn sorted_cover(d: &PathDecomposition) -> Vec<(usize, usize)> {
    let mut c: Vec<(usize, usize)> = d.cover_jumps().map(|j| (j.i, j.j)).collect();
    c.sort_unstable();
    c
}

/// Inclusion-minimal jump cover of `J` (indices into `decomposition.jumps`).
pub fn minimal_jump_cover(decomposition: &PathDecomposition) -> &[usize] {
    &decomposition.cover
}

/// Checks every bound and structural property on one network.
pub fn certify(net: &Network, instance: &Instance) -> Result<Certificate> {
    certify_with(net, instance, false)
}

/// [`certify`], optionally pruning redundant edges first.
pub fn certify_with(net: &Network, instance: &Instance, prune: bool) -> Result<Certificate> {
    if instance.pairs().is_some() {
        return Err(Error::UnsupportedMode(
            "certification covers the all-pairs variant only".into(),
        ));
    }
    let pruned;
    let net = if prune {
        pruned = net.prune_redundant_edges()?;
        &pruned
    } else {
        net
    };
    let (m, n) = (instance.m(), instance.n());
    let d = decompose(net)?;
    let mut witnesses = Vec::new();

    let simple = net.is_simple();
    for s in net.steiner_points() {
        if net.neighbours(s)?.len() < 3 {
            witnesses.push(Witness::NotSimple { vertex: s });
        }
    }
    let max_path_vertices = d.path.len();
    if max_path_vertices > path_bound(m, n) {
        witnesses.push(Witness::PathTooLong {
            vertices: max_path_vertices,
            bound: path_bound(m, n),
        });
    }
    let cover = sorted_cover(&d);
    if cover.len() > cover_bound(m, n) {
        witnesses.push(Witness::CoverTooLarge {
            size: cover.len(),
            bound: cover_bound(m, n),
        });
    }
    let steiner_count = net.steiner_count();
    if steiner_count > steiner_bound(m, n) {
        witnesses.push(Witness::TooManySteiner {
            count: steiner_count,
            bound: steiner_bound(m, n),
        });
    }

    let anchors = d.anchors();
    let ends: BTreeSet<usize> = cover.iter().flat_map(|&(i, j)| [i, j]).collect();
    let k = d.path.len().saturating_sub(2);
    let mut classified = true;
    for t in 1..=k {
        let terminal = !net
            .vertex(d.path[t])
            .expect("path vertex")
            .role
            .is_steiner();
        if !terminal && !anchors.contains(&t) && !ends.contains(&t) {
            classified = false;
            witnesses.push(Witness::UnclassifiedPathVertex { index: t });
        }
    }

    let mut distinct = true;
    for (p, &a) in cover.iter().enumerate() {
        for &b in &cover[p + 1..] {
            if a.0 == b.0 || a.1 == b.1 {
                distinct = false;
                witnesses.push(Witness::RepeatedJumpIndex {
                    first: a,
                    second: b,
                });
            }
        }
    }

    let spans = |(i, j): (usize, usize), t: usize| j <= t && t <= i;
    let mut property1 = true;
    for &t in &anchors {
        let spanning = cover.iter().filter(|&&c| spans(c, t)).count();
        if spanning > 2 {
            property1 = false;
            witnesses.push(Witness::Property1 { index: t, spanning });
        }
    }
    let mut property2 = true;
    for w in cover.windows(2) {
        if !anchors.iter().any(|&t| spans(w[0], t) || spans(w[1], t)) {
            property2 = false;
            witnesses.push(Witness::Property2 {
                first: w[1],
                second: w[0],
            });
        }
    }

    Ok(Certificate {
        m,
        n,
        max_path_vertices,
        path_bound: path_bound(m, n),
        cover_size: cover.len(),
        cover_bound: cover_bound(m, n),
        steiner_count,
        steiner_bound: steiner_bound(m, n),
        simple,
        path_vertices_classified: classified,
        distinct_indices: distinct,
        property1_ok: property1,
        property2_ok: property2,
        verdict: if witnesses.is_empty() {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent(witnesses)
        },
    })
}

/// Looks for consecutive cover jumps `(i, j)`, `(k, l)` with `i > k`,
/// `j > l` and `k = j + 1`. Reversing the `(k, l)` jump and the run
/// `x_l ... x_j` of `P` makes the edge `x_j x_k` unnecessary; the result
/// is returned with that edge removed. `None` when no such pair exists.
pub fn improve_by_reversal(net: &Network, d: &PathDecomposition) -> Result<Option<Network>> {
    if net.space().kind() == SpaceKind::Ambient {
        return Err(Error::UnsupportedMode(
            "reversal needs symmetric edge lengths".into(),
        ));
    }
    let mut cover: Vec<&Jump> = d.cover_jumps().collect();
    cover.sort_by(|a, b| b.i.cmp(&a.i));
    for w in cover.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        let (i, j, k, l) = (hi.i, hi.j, lo.i, lo.j);
        if !(i > k && j > l && j < k && k - j == 1) {
            continue;
        }
        let mut edges = net.edges().clone();
        for e in lo.edges() {
            edges.remove(&e);
        }
        let run: Vec<(VertexId, VertexId)> =
            d.path[l..=j].windows(2).map(|w| (w[0], w[1])).collect();
        for e in &run {
            edges.remove(e);
        }
        edges.remove(&(d.path[j], d.path[k]));
        for (u, v) in lo.edges().chain(run.iter().copied()) {
            edges.insert((v, u));
        }
        let next = net.with_edges(edges)?;
        if !next.satisfies_demand() {
            return Err(Error::Corruption(format!(
                "reversing jump ({k}, {l}) disconnected the network"
            )));
        }
        return Ok(Some(next));
    }
    Ok(None)
}
