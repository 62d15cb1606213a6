//! Anomaly graphs: the support of `S` read as a weighted adjacency matrix.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::score::default_support_tol;

use super::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Always `src < dst`.
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnomalyGraph {
    pub nodes: Vec<String>,
    /// Sorted by `(src, dst)`.
    pub edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    src: String,
    dst: String,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    nodes: Vec<String>,
    edges: Vec<JsonEdge>,
}

/// Keeps one edge per pair `i < j` with `|S_ij| > threshold`.
///
/// `threshold: None` uses `1e-6 * max(1, max|S|)`.
pub fn extract_graph(s: &SymMatrix, names: &[String], threshold: Option<f64>) -> Result<AnomalyGraph> {
    let p = s.dim();
    if names.len() != p {
        return Err(Error::DimensionMismatch {
            expected: format!("{p} node names"),
            found: format!("{}", names.len()),
        });
    }
    let tol = threshold.unwrap_or_else(|| default_support_tol(s));
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            let w = s[(i, j)];
            if w.abs() > tol {
                edges.push(Edge { src: i, dst: j, weight: w });
            }
        }
    }
    AnomalyGraph::new(names.to_vec(), edges)
}

impl AnomalyGraph {
    /// Validates indices, orients each edge as `src < dst` and sorts.
    pub fn new(nodes: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for n in &nodes {
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate node name `{n}`")));
            }
        }
        let mut out = Vec::with_capacity(edges.len());
        let mut pairs = BTreeSet::new();
        for e in edges {
            let (a, b) = (e.src.min(e.dst), e.src.max(e.dst));
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop on node {a}")));
            }
            if b >= nodes.len() {
                return Err(Error::InvalidInput(format!("edge endpoint {b} out of range")));
            }
            if !pairs.insert((a, b)) {
                return Err(Error::InvalidInput(format!("duplicate edge ({a}, {b})")));
            }
            out.push(Edge {
                src: a,
                dst: b,
                weight: e.weight,
            });
        }
        out.sort_by_key(|e| (e.src, e.dst));
        Ok(Self { nodes, edges: out })
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for e in &self.edges {
            d[e.src] += 1;
            d[e.dst] += 1;
        }
        d
    }

    /// Nodes by descending degree, ties broken by name.
    pub fn ranked_by_degree(&self) -> Vec<(String, usize)> {
        let mut v: Vec<(String, usize)> = self.nodes.iter().cloned().zip(self.degrees()).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// Unordered edge set by node name, for comparisons.
    pub fn edge_names(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|e| {
                let (a, b) = (&self.nodes[e.src], &self.nodes[e.dst]);
                if a <= b {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                }
            })
            .collect()
    }

    fn induced(&self, keep: &[usize]) -> Self {
        let remap: HashMap<usize, usize> = keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let nodes = keep.iter().map(|&k| self.nodes[k].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                Some(Edge {
                    src: *remap.get(&e.src)?,
                    dst: *remap.get(&e.dst)?,
                    weight: e.weight,
                })
            })
            .collect();
        Self { nodes, edges }
    }

    /// Removes the named nodes and every edge touching them. Returns the
    /// names that were not in the graph.
    pub fn exclude(&self, names: &[String]) -> (Self, Vec<String>) {
        let unknown = names.iter().filter(|n| self.index_of(n).is_none()).cloned().collect();
        let keep: Vec<usize> = (0..self.nodes.len())
            .filter(|&k| !names.contains(&self.nodes[k]))
            .collect();
        (self.induced(&keep), unknown)
    }

    /// Subgraph induced by `center` and every node within `radius` hops.
    pub fn ego(&self, center: &str, radius: usize) -> Result<Self> {
        let c = self
            .index_of(center)
            .ok_or_else(|| Error::InvalidInput(format!("node `{center}` is not in the graph")))?;
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.src].push(e.dst);
            adj[e.dst].push(e.src);
        }
        let mut dist = vec![usize::MAX; self.nodes.len()];
        dist[c] = 0;
        let mut frontier = vec![c];
        for d in 1..=radius {
            let mut next = Vec::new();
            for &u in &frontier {
                for &v in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = d;
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        let keep: Vec<usize> = (0..self.nodes.len()).filter(|&k| dist[k] != usize::MAX).collect();
        Ok(self.induced(&keep))
    }

    pub fn to_edge_list_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["src", "dst", "weight"]).map_err(|e| Error::Format(e.to_string()))?;
        for e in &self.edges {
            let weight = e.weight.to_string();
            w.write_record([self.nodes[e.src].as_str(), self.nodes[e.dst].as_str(), weight.as_str()])
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_dot(&self) -> String {
        fn quote(s: &str) -> String {
            format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
        }
        let mut out = String::from("graph anomalies {\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  {};", quote(n));
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  {} -- {} [weight={}];",
                quote(&self.nodes[e.src]),
                quote(&self.nodes[e.dst]),
                e.weight
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = JsonGraph {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| JsonEdge {
                    src: self.nodes[e.src].clone(),
                    dst: self.nodes[e.dst].clone(),
                    weight: e.weight,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: JsonGraph = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let index: HashMap<&str, usize> = doc.nodes.iter().enumerate().map(|(k, n)| (n.as_str(), k)).collect();
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::Format(format!("edge references unknown node `{n}`")))
        };
        let edges = doc
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    src: lookup(&e.src)?,
                    dst: lookup(&e.dst)?,
                    weight: e.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.nodes, edges)
    }

    pub fn render(&self, format: GraphFormat) -> Result<String> {
        match format {
            GraphFormat::EdgeListCsv => self.to_edge_list_csv(),
            GraphFormat::Dot => Ok(self.to_dot()),
            GraphFormat::Json => self.to_json(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFormat {
    EdgeListCsv,
    Dot,
    Json,
}

impl GraphFormat {
    pub fn extension(self) -> &'static str {
        match self {
            GraphFormat::EdgeListCsv => "csv",
            GraphFormat::Dot => "dot",
            GraphFormat::Json => "json",
        }
    }
}

impl FromStr for GraphFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" | "edge-list" | "edgelist" | "edge_list_csv" => Ok(GraphFormat::EdgeListCsv),
            "dot" => Ok(GraphFormat::Dot),
            "json" => Ok(GraphFormat::Json),
            other => Err(Error::param("format", format!("unknown graph format `{other}`"))),
        }
    }
}

pub fn export_graph(graph: &AnomalyGraph, format: GraphFormat, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, graph.render(format)?.as_bytes())
}
