//! Instance, solution and digraph files.
//!
//! Files are UTF-8 JSON with a `schema` field. Output is canonical: object
//! keys sorted, two-space indentation, arrays of scalars on one line and
//! every float written with 17 significant digits, so writing a file that
//! was just read reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use dirnet_core::analyzer::Certificate;
use dirnet_core::metric::{Point, Space, SpaceKind, WeightedEdge};
use dirnet_core::network::{Network, Role, Vertex, VertexId};
use dirnet_core::reductions::Digraph;
use dirnet_core::solver::{Budget, SolveConfig, SolveStatus};
use dirnet_core::{Error, Instance, Result};

pub const INSTANCE_SCHEMA: &str = "dirnet.instance/1";
pub const SOLUTION_SCHEMA: &str = "dirnet.solution/1";
pub const DIGRAPH_SCHEMA: &str = "dirnet.digraph/1";

/// Stored and recomputed lengths may differ by this much (relative to
/// `max(1, length)`).
pub const LENGTH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointFile {
    Coords(Vec<f64>),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub from: String,
    pub to: String,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceFile {
    Euclidean {
        dim: usize,
    },
    Rectilinear {
        dim: usize,
    },
    Explicit {
        labels: Vec<String>,
        distances: Vec<Vec<f64>>,
    },
    Graph {
        labels: Vec<String>,
        edges: Vec<EdgeFile>,
    },
    Ambient {
        labels: Vec<String>,
        arcs: Vec<EdgeFile>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema: String,
    pub space: SpaceFile,
    pub sources: Vec<PointFile>,
    pub sinks: Vec<PointFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexFile {
    pub id: usize,
    pub role: Role,
    pub location: PointFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub vertices: Vec<VertexFile>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverFile {
    pub topologies_examined: usize,
    pub status: SolveStatus,
    pub converged: bool,
    pub budget: Budget,
    pub config: SolveConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub schema: String,
    pub instance: InstanceFile,
    pub instance_digest: String,
    pub network: NetworkFile,
    pub length: f64,
    /// `null` for the point-to-point variant, which is not certified.
    pub certificate: Option<Certificate>,
    /// `null` when the network did not come from the solver.
    pub solver: Option<SolverFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DigraphFile {
    pub schema: String,
    pub vertices: Vec<String>,
    pub arcs: Vec<EdgeFile>,
}

/// A solution file after every consistency check has passed.
#[derive(Debug, Clone)]
pub struct LoadedSolution {
    pub file: SolutionFile,
    pub instance: Instance,
    pub network: Network,
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))
}

fn check_schema(found: &str, want: &str) -> Result<()> {
    if found != want {
        return Err(parse_err(format!(
            "schema: expected {want:?}, found {found:?}"
        )));
    }
    Ok(())
}

/// Canonical JSON text of any serialisable value.
pub fn to_canonical<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("file types serialise to JSON");
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| {
        for _ in 0..d {
            out.push_str("  ");
        }
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("float");
                write!(out, "{x:.16e}").unwrap();
            } else {
                write!(out, "{n}").unwrap();
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (k, i) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, i, depth);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (k, i) in items.iter().enumerate() {
                    pad(out, depth + 1);
                    write_value(out, i, depth + 1);
                    out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
                }
                pad(out, depth);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            // serde_json's default map is ordered by key
            out.push_str("{\n");
            for (k, (key, val)) in map.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&serde_json::to_string(key).unwrap());
                out.push_str(": ");
                write_value(out, val, depth + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

/// SHA-256 of the canonical text of an instance file, in hex.
pub fn digest(instance: &InstanceFile) -> String {
    hex::encode(Sha256::digest(to_canonical(instance).as_bytes()))
}

fn edges_from_file(
    labels: &[String],
    edges: &[EdgeFile],
    field: &str,
) -> Result<Vec<WeightedEdge>> {
    let index: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    edges
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let find = |l: &str, end: &str| {
                index
                    .get(l)
                    .copied()
                    .ok_or_else(|| parse_err(format!("{field}[{k}].{end}: unknown label {l:?}")))
            };
            Ok(WeightedEdge {
                from: find(&e.from, "from")?,
                to: find(&e.to, "to")?,
                weight: e.weight,
            })
        })
        .collect()
}

fn edges_to_file(labels: &[String], edges: impl Iterator<Item = WeightedEdge>) -> Vec<EdgeFile> {
    edges
        .map(|e| EdgeFile {
            from: labels[e.from].clone(),
            to: labels[e.to].clone(),
            weight: e.weight,
        })
        .collect()
}

pub fn space_from_file(f: &SpaceFile) -> Result<Space> {
    let field = |e: Error| parse_err(format!("space: {e}"));
    match f {
        SpaceFile::Euclidean { dim } => Space::euclidean(*dim).map_err(field),
        SpaceFile::Rectilinear { dim } => Space::rectilinear(*dim).map_err(field),
        SpaceFile::Explicit { labels, distances } => {
            Space::explicit(labels.clone(), distances.clone()).map_err(field)
        }
        SpaceFile::Graph { labels, edges } => Space::graph(
            labels.clone(),
            edges_from_file(labels, edges, "space.edges")?,
        )
        .map_err(field),
        SpaceFile::Ambient { labels, arcs } => {
            Space::ambient(labels.clone(), edges_from_file(labels, arcs, "space.arcs")?)
                .map_err(field)
        }
    }
}

pub fn space_to_file(space: &Space) -> SpaceFile {
    let labels = || space.labels().expect("finite space").to_vec();
    match space.kind() {
        SpaceKind::Euclidean => SpaceFile::Euclidean {
            dim: space.dim().expect("dim"),
        },
        SpaceKind::Rectilinear => SpaceFile::Rectilinear {
            dim: space.dim().expect("dim"),
        },
        SpaceKind::Explicit => SpaceFile::Explicit {
            labels: labels(),
            distances: space.explicit_matrix().expect("matrix").to_vec(),
        },
        SpaceKind::Graph => SpaceFile::Graph {
            labels: labels(),
            edges: edges_to_file(
                &labels(),
                space.graph_edges().expect("edges").iter().cloned(),
            ),
        },
        SpaceKind::Ambient => SpaceFile::Ambient {
            labels: labels(),
            arcs: edges_to_file(
                &labels(),
                space
                    .ambient_arcs()
                    .expect("arcs")
                    .iter()
                    .map(|(&(from, to), &weight)| WeightedEdge { from, to, weight }),
            ),
        },
    }
}

fn point_from_file(space: &Space, p: &PointFile, field: &str) -> Result<Point> {
    match (p, space.kind().is_continuous()) {
        (PointFile::Coords(c), true) => Ok(Point::Coords(c.clone())),
        (PointFile::Label(l), false) => space
            .lookup(l)
            .map(Point::Vertex)
            .ok_or_else(|| parse_err(format!("{field}: unknown label {l:?}"))),
        (PointFile::Coords(_), false) => Err(parse_err(format!(
            "{field}: coordinates given in a finite space, expected a label"
        ))),
        (PointFile::Label(_), true) => Err(parse_err(format!(
            "{field}: label given in a coordinate space, expected coordinates"
        ))),
    }
}

fn point_to_file(space: &Space, p: &Point) -> PointFile {
    match p {
        Point::Coords(c) => PointFile::Coords(c.clone()),
        Point::Vertex(v) => PointFile::Label(space.label(*v).expect("valid point").to_string()),
    }
}

pub fn instance_from_file(f: &InstanceFile) -> Result<Instance> {
    check_schema(&f.schema, INSTANCE_SCHEMA)?;
    let space = space_from_file(&f.space)?;
    let points = |list: &[PointFile], field: &str| -> Result<Vec<Point>> {
        list.iter()
            .enumerate()
            .map(|(i, p)| point_from_file(&space, p, &format!("{field}[{i}]")))
            .collect()
    };
    let sources = points(&f.sources, "sources")?;
    let sinks = points(&f.sinks, "sinks")?;
    Instance::new(space, sources, sinks, f.pairs.clone()).map_err(|e| parse_err(e.to_string()))
}

pub fn instance_to_file(instance: &Instance) -> InstanceFile {
    let space = instance.space();
    InstanceFile {
        schema: INSTANCE_SCHEMA.into(),
        space: space_to_file(space),
        sources: instance
            .sources()
            .iter()
            .map(|p| point_to_file(space, p))
            .collect(),
        sinks: instance
            .sinks()
            .iter()
            .map(|p| point_to_file(space, p))
            .collect(),
        pairs: instance.pairs().map(<[_]>::to_vec),
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    instance_from_file(&from_json(text)?)
}

pub fn write_instance(instance: &Instance) -> String {
    to_canonical(&instance_to_file(instance))
}

pub fn network_to_file(net: &Network) -> NetworkFile {
    let space = net.space();
    NetworkFile {
        vertices: net
            .vertices()
            .iter()
            .map(|(id, v)| VertexFile {
                id: id.0,
                role: v.role,
                location: point_to_file(space, &v.location),
            })
            .collect(),
        edges: net.edges().iter().map(|&(u, v)| (u.0, v.0)).collect(),
    }
}

/// Rebuilds a network in the space of `instance`, checking that every
/// terminal of the instance is present with its role and location.
pub fn network_from_file(f: &NetworkFile, instance: &Instance) -> Result<Network> {
    let space = instance.space();
    let mut vertices = BTreeMap::new();
    for (k, v) in f.vertices.iter().enumerate() {
        let location = point_from_file(space, &v.location, &format!("network.vertices[{k}]"))?;
        if vertices
            .insert(
                VertexId(v.id),
                Vertex {
                    role: v.role,
                    location,
                },
            )
            .is_some()
        {
            return Err(parse_err(format!(
                "network.vertices[{k}]: repeated id {}",
                v.id
            )));
        }
    }
    for (id, t) in instance.terminals() {
        match vertices.get(&id) {
            Some(v) if *v == t => {}
            _ => {
                return Err(parse_err(format!(
                    "network.vertices: terminal {id} missing or changed"
                )))
            }
        }
    }
    if let Some((id, _)) = vertices
        .iter()
        .find(|(id, v)| v.role != Role::Steiner && !instance.terminals().contains_key(id))
    {
        return Err(parse_err(format!(
            "network.vertices: {id} is marked as a terminal of no instance point"
        )));
    }
    let edges = f
        .edges
        .iter()
        .map(|&(u, v)| (VertexId(u), VertexId(v)))
        .collect();
    Network::new(
        Arc::clone(instance.space_arc()),
        vertices,
        edges,
        instance.demand(),
    )
    .map_err(|e| parse_err(format!("network: {e}")))
}

/// Assembles a solution file; the length is recomputed from the network.
pub fn solution_file(
    instance: &Instance,
    network: &Network,
    certificate: Option<Certificate>,
    solver: Option<SolverFile>,
) -> SolutionFile {
    let instance = instance_to_file(instance);
    SolutionFile {
        schema: SOLUTION_SCHEMA.into(),
        instance_digest: digest(&instance),
        instance,
        network: network_to_file(network),
        length: network.length(),
        certificate,
        solver,
    }
}

/// Parses a solution file and re-verifies its digest and stored length.
pub fn parse_solution(text: &str) -> Result<LoadedSolution> {
    let file: SolutionFile = from_json(text)?;
    check_schema(&file.schema, SOLUTION_SCHEMA)?;
    let instance = instance_from_file(&file.instance)?;
    let recomputed = digest(&file.instance);
    if recomputed != file.instance_digest {
        return Err(parse_err(format!(
            "instance_digest: stored {} does not match the instance ({recomputed})",
            file.instance_digest
        )));
    }
    let network = network_from_file(&file.network, &instance)?;
    let length = network.length();
    if (length - file.length).abs() > LENGTH_TOLERANCE * length.abs().max(1.0) {
        return Err(parse_err(format!(
            "length: stored {:e} but the network measures {length:e}",
            file.length
        )));
    }
    Ok(LoadedSolution {
        file,
        instance,
        network,
    })
}

pub fn digraph_from_file(f: &DigraphFile) -> Result<Digraph> {
    check_schema(&f.schema, DIGRAPH_SCHEMA)?;
    let arcs = edges_from_file(&f.vertices, &f.arcs, "arcs")?;
    Digraph::new(f.vertices.clone(), arcs).map_err(|e| parse_err(e.to_string()))
}

pub fn digraph_to_file(d: &Digraph) -> DigraphFile {
    DigraphFile {
        schema: DIGRAPH_SCHEMA.into(),
        vertices: d.vertices.clone(),
        arcs: edges_to_file(&d.vertices, d.arcs.iter().cloned()),
    }
}

pub fn parse_digraph(text: &str) -> Result<Digraph> {
    digraph_from_file(&from_json(text)?)
}

pub fn write_digraph(d: &Digraph) -> String {
    to_canonical(&digraph_to_file(d))
}
