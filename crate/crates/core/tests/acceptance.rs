//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dirnet_core::analyzer::{certify, decompose, improve_by_reversal};
use dirnet_core::gen::{
    connecting_network, euclidean_instance, finite_instance, strongly_connected_digraph, FiniteKind,
};
use dirnet_core::metric::WeightedEdge;
use dirnet_core::reductions::{brute_force_med, solve_med};
use dirnet_core::solver::topology::{enumerate_topologies, Variant};
use dirnet_core::solver::{brute_force_oracle, optimize_from, solve, SolveConfig};
use dirnet_core::{Demand, Instance, Network, Point, Role, Space, Vertex, VertexId};

type Outcome = Result<String, String>;

/// Networks produced by the solver in earlier criteria, for the
/// consistency sweep.
#[derive(Default)]
struct Outputs(Vec<(String, Network, Instance)>);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn coords(p: &[f64]) -> Point {
    Point::Coords(p.to_vec())
}

fn euclid(sources: &[&[f64]], sinks: &[&[f64]], pairs: Option<Vec<(usize, usize)>>) -> Instance {
    Instance::new(
        Space::euclidean(sources[0].len()).unwrap(),
        sources.iter().map(|p| coords(p)).collect(),
        sinks.iter().map(|p| coords(p)).collect(),
        pairs,
    )
    .unwrap()
}

fn capped(k: usize) -> SolveConfig {
    SolveConfig {
        max_steiner: Some(k),
        ..SolveConfig::default()
    }
}

fn norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn geodesic(out: &mut Outputs) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let dim = 2 + (seed % 2) as usize;
        let inst = euclidean_instance(seed, 1, 1, dim).unwrap();
        let s = solve(&inst, &SolveConfig::default()).map_err(|e| e.to_string())?;
        let rho = norm(
            inst.sources()[0].coords().unwrap(),
            inst.sinks()[0].coords().unwrap(),
        );
        worst = worst.max((s.length - rho).abs());
        check((s.length - rho).abs() <= 1e-9, || {
            format!("seed {seed}: length {} vs distance {rho}", s.length)
        })?;
        check(s.network.steiner_count() == 0, || {
            format!("seed {seed}: Steiner points used")
        })?;
        out.0.push((format!("geodesic {seed}"), s.network, inst));
    }
    let t = start.elapsed();
    within(t, Duration::from_secs(1))?;
    Ok(format!("50 instances, max error {worst:.1e}, {t:.2?}"))
}

/// Geometric median of three points by Weiszfeld iteration.
fn weiszfeld(pts: &[[f64; 2]]) -> [f64; 2] {
    let mut x = [
        pts.iter().map(|p| p[0]).sum::<f64>() / 3.0,
        pts.iter().map(|p| p[1]).sum::<f64>() / 3.0,
    ];
    for _ in 0..100_000 {
        let (mut nx, mut ny, mut w) = (0.0, 0.0, 0.0);
        for p in pts {
            let d = norm(p, &x).max(1e-300);
            nx += p[0] / d;
            ny += p[1] / d;
            w += 1.0 / d;
        }
        x = [nx / w, ny / w];
    }
    x
}

fn fermat(out: &mut Outputs) -> Outcome {
    let start = Instant::now();
    let h = 3f64.sqrt() / 2.0;
    let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, h]];
    let inst = euclid(&[&pts[0], &pts[1]], &[&pts[2]], None);
    let s = solve(&inst, &capped(1)).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let median = weiszfeld(&pts);
    let want: f64 = pts.iter().map(|p| norm(p, &median)).sum();
    check((s.length - want).abs() <= 1e-6, || {
        format!("length {} vs {want}", s.length)
    })?;
    let steiner = s.network.steiner_points();
    check(steiner.len() == 1, || {
        format!("{} Steiner points", steiner.len())
    })?;
    let at = s
        .network
        .vertex(steiner[0])
        .unwrap()
        .location
        .coords()
        .unwrap()
        .to_vec();
    let err = norm(&at, &median).max(norm(&at, &[0.5, 3f64.sqrt() / 6.0]));
    check(err <= 1e-4, || {
        format!("Steiner point {at:?}, off by {err:e}")
    })?;
    within(t, Duration::from_secs(1))?;
    out.0.push(("fermat".into(), s.network.clone(), inst));
    Ok(format!(
        "length {:.12}, Steiner point off by {err:.1e}, {t:.2?}",
        s.length
    ))
}

fn unit_square(out: &mut Outputs) -> Outcome {
    let start = Instant::now();
    let inst = euclid(
        &[&[0.0, 0.0], &[0.0, 1.0]],
        &[&[1.0, 0.0], &[1.0, 1.0]],
        None,
    );
    let s = solve(&inst, &capped(2)).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    // Steiner minimal tree of the unit square: two Steiner points on the
    // midline, each joined to two corners at 120 degrees.
    let leg = 1.0 / 3f64.sqrt();
    let want = 4.0 * leg + (1.0 - 2.0 * (0.5 / 3f64.sqrt()));
    check((s.length - want).abs() <= 1e-6, || {
        format!("length {} vs {want}", s.length)
    })?;
    check(s.network.steiner_count() == 2, || {
        format!("{} Steiner points", s.network.steiner_count())
    })?;
    within(t, Duration::from_secs(300))?;
    out.0.push(("unit square".into(), s.network.clone(), inst));
    Ok(format!(
        "length {:.12} (1+sqrt 3 = {want:.12}), {} topologies, {t:.2?}",
        s.length, s.topologies_examined
    ))
}

fn oracle_equivalence(out: &mut Outputs) -> Outcome {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    for seed in 0..100u64 {
        let points = r.gen_range(3..=6);
        let m = r.gen_range(1..=2usize);
        let n = r.gen_range(1..=2usize.min(points - m));
        let kind = if seed % 2 == 0 {
            FiniteKind::Explicit
        } else {
            FiniteKind::Graph
        };
        let inst = finite_instance(seed, points, m, n, kind).unwrap();
        let got = solve(&inst, &SolveConfig::default()).map_err(|e| e.to_string())?;
        let want = brute_force_oracle(&inst).map_err(|e| e.to_string())?;
        check(got.length == want.length, || {
            format!(
                "seed {seed}: solve {} vs oracle {}",
                got.length, want.length
            )
        })?;
        out.0.push((format!("finite {seed}"), got.network, inst));
    }
    let t = start.elapsed();
    within(t, Duration::from_secs(300))?;
    Ok(format!("100 instances equal, {t:.2?}"))
}

fn med(out: &mut Outputs) -> Outcome {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(77);
    let mut arcs = 0;
    for seed in 0..50u64 {
        let n = r.gen_range(2..=6);
        let density = r.gen_range(0.25..0.7);
        let d = strongly_connected_digraph(seed, n, density).unwrap();
        let got = solve_med(&d, &SolveConfig::default()).map_err(|e| e.to_string())?;
        let want = brute_force_med(&d).map_err(|e| e.to_string())?;
        check(got.len() == want.len(), || {
            format!(
                "seed {seed}: solver keeps {} arcs, brute force {}",
                got.len(),
                want.len()
            )
        })?;
        arcs += got.len();
        let inst = dirnet_core::reductions::med_to_instance(&d).unwrap();
        let sol = solve(&inst, &SolveConfig::default()).map_err(|e| e.to_string())?;
        out.0.push((format!("med {seed}"), sol.network, inst));
    }
    let t = start.elapsed();
    within(t, Duration::from_secs(300))?;
    Ok(format!("50 digraphs, {arcs} arcs kept in total, {t:.2?}"))
}

fn consistency(out: &Outputs) -> Outcome {
    let mut worst = (0, 0, 0);
    for (name, net, inst) in &out.0 {
        let c = certify(net, inst).map_err(|e| format!("{name}: {e}"))?;
        check(c.is_consistent(), || format!("{name}: {:?}", c.verdict))?;
        check(
            c.max_path_vertices <= c.path_bound
                && c.cover_size <= c.cover_bound
                && c.steiner_count <= c.steiner_bound,
            || format!("{name}: bound exceeded"),
        )?;
        worst.0 = worst.0.max(c.max_path_vertices);
        worst.1 = worst.1.max(c.cover_size);
        worst.2 = worst.2.max(c.steiner_count);
    }
    Ok(format!(
        "{} networks consistent; largest path {} vertices, cover {}, {} Steiner points",
        out.0.len(),
        worst.0,
        worst.1,
        worst.2
    ))
}

fn simplification() -> Outcome {
    let start = Instant::now();
    for seed in 0..500u64 {
        let inst = match seed % 3 {
            0 => euclidean_instance(seed, 1 + (seed % 3) as usize, 1 + (seed % 2) as usize, 2),
            1 => finite_instance(seed, 8, 2, 2, FiniteKind::Explicit),
            _ => finite_instance(seed, 7, 2, 1, FiniteKind::Graph),
        }
        .unwrap();
        let net = connecting_network(seed, &inst, 1 + (seed % 5) as usize).unwrap();
        let s = net.simplify().map_err(|e| format!("seed {seed}: {e}"))?;
        check(s.satisfies_demand(), || {
            format!("seed {seed}: lost a connection")
        })?;
        check(s.length() <= net.length() + 1e-9, || {
            format!("seed {seed}: length {} -> {}", net.length(), s.length())
        })?;
        check(s.is_simple(), || {
            format!("seed {seed}: Steiner point with < 3 neighbours")
        })?;
        check(s.simplify().unwrap() == s, || {
            format!("seed {seed}: not idempotent")
        })?;
    }
    let t = start.elapsed();
    within(t, Duration::from_secs(60))?;
    Ok(format!("500 networks, {t:.2?}"))
}

fn reversal() -> Outcome {
    // P = a0 x1 .. x8 b0 (ids 0..=9); source a1 = 10 enters at x4, sink
    // b1 = 11 leaves from x1; jumps x4 -> c2 -> x2 and x3 -> c1 -> x1 with
    // c1 = 12, c2 = 13. All distances 1 except x2 x3 at 2.
    let n = 14;
    let mut d = vec![vec![1.0; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    d[2][3] = 2.0;
    d[3][2] = 2.0;
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    let space = Arc::new(Space::explicit(labels, d).unwrap());
    let role = |i: usize| match i {
        0 | 10 => Role::Source,
        9 | 11 => Role::Sink,
        _ => Role::Steiner,
    };
    let vertices = (0..n)
        .map(|i| {
            (
                VertexId(i),
                Vertex {
                    role: role(i),
                    location: Point::Vertex(i),
                },
            )
        })
        .collect();
    let mut edges: Vec<(usize, usize)> = (0..9).map(|i| (i, i + 1)).collect();
    edges.extend([(10, 4), (1, 11), (4, 13), (13, 2), (3, 12), (12, 1)]);
    let net = Network::new(
        space.clone(),
        vertices,
        edges
            .iter()
            .map(|&(u, v)| (VertexId(u), VertexId(v)))
            .collect(),
        Demand::AllPairs,
    )
    .unwrap();
    let dec = decompose(&net).map_err(|e| e.to_string())?;
    let mut cover: Vec<(usize, usize)> = dec.cover_jumps().map(|j| (j.i, j.j)).collect();
    cover.sort_unstable();
    check(cover == vec![(3, 1), (4, 2)], || {
        format!("jump cover {cover:?}")
    })?;
    let better = improve_by_reversal(&net, &dec)
        .map_err(|e| e.to_string())?
        .ok_or("no reversal found")?;
    check(better.satisfies_demand(), || {
        "reversed network disconnected".into()
    })?;
    let j = 2;
    let gap = space
        .distance(
            &Point::Vertex(dec.path[j].0),
            &Point::Vertex(dec.path[j + 1].0),
        )
        .unwrap();
    let saved = net.length() - better.length();
    check((saved - gap).abs() <= 1e-12, || {
        format!("saved {saved}, expected {gap}")
    })?;
    Ok(format!(
        "length {} -> {}, saved {saved} = rho(x2, x3)",
        net.length(),
        better.length()
    ))
}

fn restart_agreement() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let config = SolveConfig::default();
    let mut worst: f64 = 0.0;
    for case in 0..20u64 {
        let (m, n) = (r.gen_range(1..=2), r.gen_range(1..=2));
        let k = r.gen_range(1..=2usize);
        let dim = r.gen_range(2..=3);
        let inst = euclidean_instance(1000 + case, m, n, dim).unwrap();
        let all = enumerate_topologies(m, n, k, &Variant::AllPairs, 8).unwrap();
        if all.is_empty() {
            continue;
        }
        let topology = &all[r.gen_range(0..all.len())];
        let mut lengths = Vec::new();
        for _ in 0..10 {
            let start: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..dim).map(|_| r.gen_range(-0.1..1.1)).collect())
                .collect();
            let p = optimize_from(topology, &inst, &config, &start).map_err(|e| e.to_string())?;
            lengths.push(p.length);
        }
        let lo = lengths.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = lengths.iter().copied().fold(0.0, f64::max);
        let rel = (hi - lo) / lo;
        worst = worst.max(rel);
        check(rel <= 1e-6, || {
            format!("topology {} spread {rel:e}", topology.code)
        })?;
    }
    Ok(format!(
        "20 topologies x 10 restarts, worst relative spread {worst:.1e}"
    ))
}

fn point_to_point() -> Outcome {
    // disjoint pairs far apart
    let mut r = ChaCha8Rng::seed_from_u64(5);
    for case in 0..10u64 {
        let p = 2;
        let mut sources = Vec::new();
        let mut sinks = Vec::new();
        for i in 0..p {
            let base = 100.0 * i as f64;
            sources.push(vec![base + r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)]);
            sinks.push(vec![base + r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)]);
        }
        let src: Vec<&[f64]> = sources.iter().map(Vec::as_slice).collect();
        let snk: Vec<&[f64]> = sinks.iter().map(Vec::as_slice).collect();
        let inst = euclid(&src, &snk, Some((0..p).map(|i| (i, i)).collect()));
        let s = solve(&inst, &capped(2)).map_err(|e| e.to_string())?;
        let want: f64 = (0..p).map(|i| norm(&sources[i], &sinks[i])).sum();
        check((s.length - want).abs() <= 1e-9 * want, || {
            format!("case {case}: length {} vs geodesic sum {want}", s.length)
        })?;
        check(s.network.steiner_count() == 0, || {
            format!("case {case}: Steiner points used")
        })?;
    }
    // two pairs whose routes can share a corridor h1 -> h2
    let labels: Vec<String> = ["a1", "a2", "b1", "b2", "h1", "h2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let e = |from, to| WeightedEdge {
        from,
        to,
        weight: 1.0,
    };
    let space = Space::graph(labels, vec![e(0, 4), e(1, 4), e(4, 5), e(5, 2), e(5, 3)]).unwrap();
    let inst = Instance::new(
        space,
        vec![Point::Vertex(0), Point::Vertex(1)],
        vec![Point::Vertex(2), Point::Vertex(3)],
        Some(vec![(0, 0), (1, 1)]),
    )
    .unwrap();
    let disjoint: f64 = [(0, 2), (1, 3)]
        .iter()
        .map(|&(a, b)| {
            inst.space()
                .distance(&Point::Vertex(a), &Point::Vertex(b))
                .unwrap()
        })
        .sum();
    let s = solve(&inst, &SolveConfig::default()).map_err(|e| e.to_string())?;
    let exact = brute_force_oracle(&inst).map_err(|e| e.to_string())?;
    check(s.length == exact.length, || {
        format!("solve {} vs brute force {}", s.length, exact.length)
    })?;
    check(s.length < disjoint, || {
        format!("sharing {} not below disjoint {disjoint}", s.length)
    })?;
    Ok(format!(
        "10 disjoint instances exact; sharing instance {} < disjoint sum {disjoint}",
        s.length
    ))
}

fn main() {
    let mut outputs = Outputs::default();
    let mut failed = 0;
    let mut report = |name: &str, f: &mut dyn FnMut() -> Outcome| {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    };
    report("geodesic base case", &mut || geodesic(&mut outputs));
    report("fermat instance", &mut || fermat(&mut outputs));
    report("unit square", &mut || unit_square(&mut outputs));
    report("oracle equivalence", &mut || {
        oracle_equivalence(&mut outputs)
    });
    report("med pipeline", &mut || med(&mut outputs));
    report("certificate consistency sweep", &mut || {
        consistency(&outputs)
    });
    report("simplification suite", &mut simplification);
    report("reversal move", &mut reversal);
    report("restart agreement", &mut restart_agreement);
    report("point-to-point", &mut point_to_point);
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
