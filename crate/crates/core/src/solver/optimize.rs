//! Placement of the Steiner vertices of a fixed topology.
//!
//! In Euclidean space the network length is a convex function of the Steiner
//! coordinates and is minimised by iteratively reweighted least squares on
//! the smoothed edge lengths `sqrt(|u - v|^2 + eps^2)`. Each step minimises
//! the quadratic majoriser, which is a weighted Laplacian system over the
//! Steiner vertices. `eps` starts at a fraction of the instance scale and
//! is cut by ten whenever the iterate stalls, down to the configured floor.
//!
//! The rectilinear objective separates by coordinate; each coordinate is a
//! piecewise-linear problem whose optimum puts every Steiner coordinate on a
//! terminal coordinate, so it is solved exactly by enumeration (with a
//! weighted-median sweep as fallback when the enumeration is too large).
//!
//! In finite spaces the Steiner vertices are assigned injectively to the
//! points that are not terminals, exhaustively.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::topology::Topology;
use super::SolveConfig;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::metric::{euclidean, Point, SpaceKind};

/// Initial smoothing as a fraction of the terminal bounding-box diagonal.
const INITIAL_SMOOTHING: f64 = 1e-3;
/// Edges shorter than this (relative to the terminal scale) after IRLS are
/// tried as exact coincidences.
const SNAP_RADIUS: f64 = 1e-2;
/// Slack in the force test that proposes snapping candidates.
const SNAP_SLACK: f64 = 1e-3;
/// Largest per-coordinate enumeration for the rectilinear solver.
const RECTILINEAR_ENUMERATION_LIMIT: usize = 200_000;
/// Times the snapped vertices are released and the snapping redone.
const SNAP_RELEASES: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    /// Location of Steiner vertex `i` of the topology.
    pub steiner: Vec<Point>,
    /// Network length at this placement.
    pub length: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Locations of the topology's terminal vertices (sources, then sinks).
fn terminal_points(instance: &Instance) -> Vec<Point> {
    instance
        .sources()
        .iter()
        .chain(instance.sinks())
        .cloned()
        .collect()
}

fn check_shape(topology: &Topology, instance: &Instance) -> Result<()> {
    if topology.sources != instance.m() || topology.sinks != instance.n() {
        return Err(Error::InvalidInstance(format!(
            "topology has {}+{} terminals, instance has {}+{}",
            topology.sources,
            topology.sinks,
            instance.m(),
            instance.n()
        )));
    }
    Ok(())
}

/// Places the Steiner vertices of `topology` to minimise network length.
pub fn optimize_positions(
    topology: &Topology,
    instance: &Instance,
    config: &SolveConfig,
) -> Result<Placement> {
    check_shape(topology, instance)?;
    match instance.space().kind() {
        SpaceKind::Euclidean => {
            let terminals = coordinates(instance);
            let mut best: Option<Placement> = None;
            for r in 0..config.restarts.max(1) {
                let start = if r == 0 {
                    default_start(&terminals, topology.steiner)
                } else {
                    random_start(
                        &terminals,
                        topology.steiner,
                        config.seed.wrapping_add(r as u64),
                    )
                };
                let p = irls(topology, &terminals, &start, config);
                if best.as_ref().map_or(true, |b| p.length < b.length) {
                    best = Some(p);
                }
            }
            Ok(best.expect("at least one start"))
        }
        SpaceKind::Rectilinear => Ok(rectilinear(topology, &coordinates(instance), config)),
        _ => finite_assignment(topology, instance),
    }
}

/// Euclidean IRLS from an explicit starting placement.
pub fn optimize_from(
    topology: &Topology,
    instance: &Instance,
    config: &SolveConfig,
    start: &[Vec<f64>],
) -> Result<Placement> {
    check_shape(topology, instance)?;
    if instance.space().kind() != SpaceKind::Euclidean {
        return Err(Error::UnsupportedMode(
            "explicit starting points apply to Euclidean spaces".into(),
        ));
    }
    if start.len() != topology.steiner {
        return Err(Error::InvalidInstance(format!(
            "{} starting points for {} Steiner vertices",
            start.len(),
            topology.steiner
        )));
    }
    let terminals = coordinates(instance);
    Ok(irls(topology, &terminals, start, config))
}

fn coordinates(instance: &Instance) -> Vec<Vec<f64>> {
    terminal_points(instance)
        .into_iter()
        .map(|p| p.coords().expect("coordinate space").to_vec())
        .collect()
}

/// Bounding-box diagonal of the terminals, or 1 for a degenerate box.
pub(crate) fn scale(terminals: &[Vec<f64>]) -> f64 {
    let (lo, hi) = bounds(terminals);
    let d = euclidean(&lo, &hi);
    if d > 0.0 {
        d
    } else {
        1.0
    }
}

fn bounds(terminals: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let dim = terminals[0].len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for t in terminals {
        for c in 0..dim {
            lo[c] = lo[c].min(t[c]);
            hi[c] = hi[c].max(t[c]);
        }
    }
    (lo, hi)
}

/// Steiner vertices spread on a small circle around the terminal centroid,
/// so that no two start on top of each other.
fn default_start(terminals: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let dim = terminals[0].len();
    let mut centroid = vec![0.0; dim];
    for t in terminals {
        for c in 0..dim {
            centroid[c] += t[c] / terminals.len() as f64;
        }
    }
    let r = 0.1 * scale(terminals);
    (0..k)
        .map(|i| {
            let angle = std::f64::consts::TAU * (i as f64 + 0.5) / k as f64;
            let mut p = centroid.clone();
            p[0] += r * angle.cos();
            if dim > 1 {
                p[1] += r * angle.sin();
            }
            for (c, x) in p.iter_mut().enumerate().skip(2) {
                *x += r * 0.5 * ((i + c) as f64).sin();
            }
            p
        })
        .collect()
}

/// Uniform starting points in the terminal bounding box grown by 10%.
fn random_start(terminals: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = bounds(terminals);
    let pad = 0.1 * scale(terminals);
    (0..k)
        .map(|_| {
            lo.iter()
                .zip(&hi)
                .map(|(&a, &b)| rng.gen_range((a - pad)..=(b + pad)))
                .collect()
        })
        .collect()
}

/// Where a Steiner vertex of the topology currently lives: on a terminal
/// or on one of the free variables of the least-squares problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Terminal(usize),
    Free(usize),
}

/// Arcs of a topology after resolving Steiner vertices to slots. Arcs
/// whose ends share a slot have length zero and are dropped.
struct Arcs {
    /// (free, free)
    inner: Vec<(usize, usize)>,
    /// (free, terminal)
    outer: Vec<(usize, usize)>,
    /// (terminal, terminal)
    fixed: Vec<(usize, usize)>,
    free: usize,
}

fn split_arcs(topology: &Topology, slots: &[Slot]) -> Arcs {
    let t = topology.sources + topology.sinks;
    let slot = |v: usize| {
        if v < t {
            Slot::Terminal(v)
        } else {
            slots[v - t]
        }
    };
    let mut arcs = Arcs {
        inner: Vec::new(),
        outer: Vec::new(),
        fixed: Vec::new(),
        free: slots
            .iter()
            .filter_map(|s| match s {
                Slot::Free(i) => Some(i + 1),
                Slot::Terminal(_) => None,
            })
            .max()
            .unwrap_or(0),
    };
    for &(u, v) in &topology.arcs {
        match (slot(u), slot(v)) {
            (a, b) if a == b => {}
            (Slot::Free(a), Slot::Free(b)) => arcs.inner.push((a, b)),
            (Slot::Free(a), Slot::Terminal(b)) | (Slot::Terminal(b), Slot::Free(a)) => {
                arcs.outer.push((a, b))
            }
            (Slot::Terminal(a), Slot::Terminal(b)) => arcs.fixed.push((a, b)),
        }
    }
    arcs
}

fn euclidean_length(arcs: &Arcs, terminals: &[Vec<f64>], x: &[Vec<f64>], eps: f64) -> f64 {
    let smooth = |a: &[f64], b: &[f64]| {
        if eps == 0.0 {
            euclidean(a, b)
        } else {
            euclidean(a, b).hypot(eps)
        }
    };
    let mut total = 0.0;
    for &(u, v) in &arcs.fixed {
        total += euclidean(&terminals[u], &terminals[v]);
    }
    for &(s, t) in &arcs.outer {
        total += smooth(&x[s], &terminals[t]);
    }
    for &(s, r) in &arcs.inner {
        total += smooth(&x[s], &x[r]);
    }
    total
}

struct Solve {
    x: Vec<Vec<f64>>,
    length: f64,
    converged: bool,
    iterations: usize,
}

/// IRLS with annealed smoothing over the free variables of `arcs`.
fn irls_free(
    arcs: &Arcs,
    terminals: &[Vec<f64>],
    start: Vec<Vec<f64>>,
    config: &SolveConfig,
) -> Solve {
    let k = arcs.free;
    let mut x = start;
    if k == 0 {
        return Solve {
            length: euclidean_length(arcs, terminals, &x, 0.0),
            x,
            converged: true,
            iterations: 0,
        };
    }
    let dim = terminals[0].len();
    let floor = config.smoothing_epsilon.max(0.0);
    let mut eps = (INITIAL_SMOOTHING * scale(terminals)).max(floor);
    let mut best_x = x.clone();
    let mut best = euclidean_length(arcs, terminals, &x, 0.0);
    let mut smoothed = euclidean_length(arcs, terminals, &x, eps);
    let weight = |a: &[f64], b: &[f64], eps: f64| {
        let d = euclidean(a, b).hypot(eps);
        if d > 0.0 {
            1.0 / d
        } else {
            1.0 / f64::MIN_POSITIVE.sqrt()
        }
    };
    let done = |x: Vec<Vec<f64>>, length, converged, iterations| Solve {
        x,
        length,
        converged,
        iterations,
    };

    for it in 1..=config.max_iterations {
        let mut lap = DMatrix::<f64>::zeros(k, k);
        let mut rhs = DMatrix::<f64>::zeros(k, dim);
        for &(s, t) in &arcs.outer {
            let w = weight(&x[s], &terminals[t], eps);
            lap[(s, s)] += w;
            for c in 0..dim {
                rhs[(s, c)] += w * terminals[t][c];
            }
        }
        for &(s, r) in &arcs.inner {
            let w = weight(&x[s], &x[r], eps);
            lap[(s, s)] += w;
            lap[(r, r)] += w;
            lap[(s, r)] -= w;
            lap[(r, s)] -= w;
        }
        let Some(chol) = lap.cholesky() else {
            // A Steiner component with no terminal: nothing pins it down.
            return done(best_x, best, false, it);
        };
        let mut next = vec![vec![0.0; dim]; k];
        for c in 0..dim {
            let col: DVector<f64> = rhs.column(c).into_owned();
            let sol = chol.solve(&col);
            for s in 0..k {
                next[s][c] = sol[s];
            }
        }
        x = next;
        let length = euclidean_length(arcs, terminals, &x, 0.0);
        if length < best {
            best = length;
            best_x = x.clone();
        }
        let now = euclidean_length(arcs, terminals, &x, eps);
        let improvement = smoothed - now;
        smoothed = now;
        if improvement < config.tolerance {
            if eps > floor {
                eps = (eps * 0.1).max(floor);
                smoothed = euclidean_length(arcs, terminals, &x, eps);
            } else {
                return done(best_x, best, true, it);
            }
        }
    }
    done(best_x, best, false, config.max_iterations)
}

/// Positions of all Steiner vertices for the given slots and free values.
fn expand(slots: &[Slot], terminals: &[Vec<f64>], x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    slots
        .iter()
        .map(|s| match *s {
            Slot::Terminal(t) => terminals[t].clone(),
            Slot::Free(i) => x[i].clone(),
        })
        .collect()
}

/// Identifies Steiner vertex `s` with the slot of vertex `w`, renumbering
/// the free variables; `None` if they already share a slot.
fn merged(slots: &[Slot], t: usize, s: usize, w: usize) -> Option<Vec<Slot>> {
    let slot = |v: usize| {
        if v < t {
            Slot::Terminal(v)
        } else {
            slots[v - t]
        }
    };
    let (from, to) = (slot(s), slot(w));
    if from == to {
        return None;
    }
    let replaced: Vec<Slot> = slots
        .iter()
        .map(|&x| if x == from { to } else { x })
        .collect();
    let mut order: Vec<usize> = Vec::new();
    for x in &replaced {
        if let Slot::Free(i) = x {
            if !order.contains(i) {
                order.push(*i);
            }
        }
    }
    Some(
        replaced
            .into_iter()
            .map(|x| match x {
                Slot::Free(i) => Slot::Free(order.iter().position(|&o| o == i).unwrap()),
                other => other,
            })
            .collect(),
    )
}

/// Whether the cluster of Steiner vertices sharing `s`'s slot, moved onto
/// `w`, would stay there: the unit pulls of the arcs leaving the cluster,
/// seen from `w`, sum to at most the number of arcs joining it to `w`.
fn pulled_onto<'a>(
    topology: &Topology,
    slot: &dyn Fn(usize) -> Slot,
    s: usize,
    w: usize,
    at: &dyn Fn(usize) -> &'a Vec<f64>,
) -> bool {
    let (home, target) = (slot(s), slot(w));
    let base = at(w);
    let mut force = vec![0.0; base.len()];
    let mut tie = 0.0;
    for &(u, v) in &topology.arcs {
        let other = match (slot(u) == home, slot(v) == home) {
            (true, false) => v,
            (false, true) => u,
            _ => continue,
        };
        let d = euclidean(at(other), base);
        if slot(other) == target || d == 0.0 {
            tie += 1.0;
            continue;
        }
        for (f, (a, b)) in force.iter_mut().zip(at(other).iter().zip(base)) {
            *f += (a - b) / d;
        }
    }
    force.iter().map(|f| f * f).sum::<f64>().sqrt() <= tie + SNAP_SLACK
}

/// IRLS followed by snapping: near-zero edges are tried as exact
/// identifications (a restriction of the convex problem, so never better
/// than the true optimum) and kept when they shorten the network. This
/// recovers optima where Steiner vertices coincide with a neighbour, where
/// plain IRLS only converges sublinearly.
fn irls(
    topology: &Topology,
    terminals: &[Vec<f64>],
    start: &[Vec<f64>],
    config: &SolveConfig,
) -> Placement {
    let t = topology.sources + topology.sinks;
    let k = topology.steiner;
    let mut slots: Vec<Slot> = (0..k).map(Slot::Free).collect();
    let arcs = split_arcs(topology, &slots);
    let mut cur = irls_free(&arcs, terminals, start.to_vec(), config);
    let mut iterations = cur.iterations;
    let radius = SNAP_RADIUS * scale(terminals);
    let mut released = 0;
    loop {
        let pos = expand(&slots, terminals, &cur.x);
        let at = |v: usize| if v < t { &terminals[v] } else { &pos[v - t] };
        let slot = |v: usize| {
            if v < t {
                Slot::Terminal(v)
            } else {
                slots[v - t]
            }
        };
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for &(u, v) in &topology.arcs {
            for (s, w) in [(u, v), (v, u)] {
                if s < t
                    || slot(s) == slot(w)
                    || candidates
                        .iter()
                        .any(|c| (slot(c.1), slot(c.2)) == (slot(s), slot(w)))
                {
                    continue;
                }
                let d = euclidean(at(s), at(w));
                if d <= radius || pulled_onto(topology, &slot, s, w, &at) {
                    candidates.push((d, s, w));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut best: Option<(Vec<Slot>, Solve)> = None;
        for (_, s, w) in candidates {
            let Some(next) = merged(&slots, t, s, w) else {
                continue;
            };
            let arcs = split_arcs(topology, &next);
            let mut start = vec![Vec::new(); arcs.free];
            for (i, sl) in next.iter().enumerate() {
                if let Slot::Free(f) = sl {
                    start[*f] = pos[i].clone();
                }
            }
            let trial = irls_free(&arcs, terminals, start, config);
            iterations += trial.iterations;
            let bar = best.as_ref().map_or(cur.length, |b| b.1.length);
            if trial.length < bar {
                best = Some((next, trial));
            }
        }
        match best {
            Some((next, trial)) => {
                slots = next;
                cur = trial;
            }
            None if released < SNAP_RELEASES
                && slots.iter().enumerate().any(|(i, s)| *s != Slot::Free(i)) =>
            {
                // An early identification can lock out a better one; release
                // every vertex from the snapped positions and snap again.
                released += 1;
                let identity: Vec<Slot> = (0..k).map(Slot::Free).collect();
                let trial = irls_free(&split_arcs(topology, &identity), terminals, pos, config);
                iterations += trial.iterations;
                if trial.length >= cur.length {
                    break;
                }
                slots = identity;
                cur = trial;
            }
            None => break,
        }
    }
    let pos = expand(&slots, terminals, &cur.x);
    Placement {
        steiner: pos.into_iter().map(Point::Coords).collect(),
        length: cur.length,
        converged: cur.converged,
        iterations,
    }
}

fn rectilinear(topology: &Topology, terminals: &[Vec<f64>], config: &SolveConfig) -> Placement {
    let k = topology.steiner;
    let t = topology.sources + topology.sinks;
    let dim = terminals[0].len();
    let mut x = vec![vec![0.0; dim]; k];
    let mut converged = true;
    let mut iterations = 0;
    for c in 0..dim {
        let coord = |v: usize, xs: &[f64]| if v < t { terminals[v][c] } else { xs[v - t] };
        let cost = |xs: &[f64]| -> f64 {
            topology
                .arcs
                .iter()
                .map(|&(u, v)| (coord(u, xs) - coord(v, xs)).abs())
                .sum()
        };
        let mut values: Vec<f64> = terminals.iter().map(|p| p[c]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let combos = values.len().checked_pow(k as u32);
        let xs = match combos {
            Some(total) if total <= RECTILINEAR_ENUMERATION_LIMIT => {
                let mut idx = vec![0usize; k];
                let mut best_xs: Vec<f64> = vec![values[0]; k];
                let mut best_cost = cost(&best_xs);
                for _ in 0..total {
                    let xs: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
                    let cst = cost(&xs);
                    if cst < best_cost {
                        best_cost = cst;
                        best_xs = xs;
                    }
                    for d in idx.iter_mut().rev() {
                        *d += 1;
                        if *d < values.len() {
                            break;
                        }
                        *d = 0;
                    }
                }
                best_xs
            }
            _ => {
                let (xs, ok, its) = median_sweep(topology, t, &|v| terminals[v][c], config);
                converged &= ok;
                iterations += its;
                xs
            }
        };
        for s in 0..k {
            x[s][c] = xs[s];
        }
    }
    let length: f64 = topology
        .arcs
        .iter()
        .map(|&(u, v)| {
            let a = if u < t { &terminals[u] } else { &x[u - t] };
            let b = if v < t { &terminals[v] } else { &x[v - t] };
            crate::metric::rectilinear(a, b)
        })
        .sum();
    Placement {
        steiner: x.into_iter().map(Point::Coords).collect(),
        length,
        converged,
        iterations,
    }
}

/// Coordinate descent: each Steiner coordinate moves to the lower median
/// of its neighbours' coordinates until nothing changes.
fn median_sweep(
    topology: &Topology,
    t: usize,
    terminal: &dyn Fn(usize) -> f64,
    config: &SolveConfig,
) -> (Vec<f64>, bool, usize) {
    let k = topology.steiner;
    let mut xs = vec![0.0; k];
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &(u, v) in &topology.arcs {
        if u >= t {
            nbrs[u - t].push(v);
        }
        if v >= t {
            nbrs[v - t].push(u);
        }
    }
    for it in 1..=config.max_iterations {
        let mut changed = false;
        for s in 0..k {
            let mut vals: Vec<f64> = nbrs[s]
                .iter()
                .map(|&w| if w < t { terminal(w) } else { xs[w - t] })
                .collect();
            if vals.is_empty() {
                continue;
            }
            vals.sort_by(f64::total_cmp);
            let m = vals[(vals.len() - 1) / 2];
            if m != xs[s] {
                xs[s] = m;
                changed = true;
            }
        }
        if !changed {
            return (xs, true, it);
        }
    }
    (xs, false, config.max_iterations)
}

/// Exhaustive injective assignment of Steiner vertices to non-terminal
/// points of a finite space.
fn finite_assignment(topology: &Topology, instance: &Instance) -> Result<Placement> {
    let space = instance.space();
    let terminals: Vec<usize> = terminal_points(instance)
        .iter()
        .map(|p| p.vertex().expect("finite space"))
        .collect();
    let candidates: Vec<usize> = (0..space.point_count().unwrap_or(0))
        .filter(|p| !terminals.contains(p))
        .collect();
    let lengths = space.finite_lengths().expect("finite space");
    let t = terminals.len();
    let k = topology.steiner;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut assignment = Vec::with_capacity(k);
    let mut used = vec![false; candidates.len()];
    let mut examine = |assignment: &[usize]| {
        let at = |v: usize| {
            if v < t {
                terminals[v]
            } else {
                assignment[v - t]
            }
        };
        let mut total = 0.0;
        for &(u, v) in &topology.arcs {
            let (a, b) = (at(u), at(v));
            let len = if a == b { Some(0.0) } else { lengths[a][b] };
            match len {
                Some(l) => total += l,
                None => return,
            }
        }
        if best.as_ref().map_or(true, |(b, _)| total < *b) {
            best = Some((total, assignment.to_vec()));
        }
    };
    fn rec(
        k: usize,
        candidates: &[usize],
        used: &mut [bool],
        assignment: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if assignment.len() == k {
            f(assignment);
            return;
        }
        for i in 0..candidates.len() {
            if !used[i] {
                used[i] = true;
                assignment.push(candidates[i]);
                rec(k, candidates, used, assignment, f);
                assignment.pop();
                used[i] = false;
            }
        }
    }
    rec(k, &candidates, &mut used, &mut assignment, &mut examine);
    let (length, points) = best.ok_or_else(|| {
        Error::InvalidNetwork("no placement of the Steiner vertices realises this topology".into())
    })?;
    Ok(Placement {
        steiner: points.into_iter().map(Point::Vertex).collect(),
        length,
        converged: true,
        iterations: 0,
    })
}
