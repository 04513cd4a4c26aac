//! Whitespace-separated edge lists with opaque string vertex ids, and
//! alignment of several layers onto their common vertex set.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeListOptions {
    /// Keep a pair if it is listed in either direction. When false only pairs
    /// listed in both directions become edges.
    pub symmetrize: bool,
    /// Silently drop `u u` lines; when false they are an error.
    pub drop_self_loops: bool,
}

impl Default for EdgeListOptions {
    fn default() -> Self {
        Self { symmetrize: true, drop_self_loops: true }
    }
}

/// A graph together with the string id of every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub graph: Graph,
    /// `labels[i]` is the id of vertex `i`.
    pub labels: Vec<String>,
}

impl LabeledGraph {
    pub fn index_of(&self) -> HashMap<&str, usize> {
        self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
    }
}

/// Reads an edge list. Vertices are numbered in order of first appearance.
pub fn read_edge_list(reader: impl BufRead, options: &EdgeListOptions) -> Result<LabeledGraph> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut arcs: HashSet<(usize, usize)> = HashSet::new();
    let mut id = |s: &str, labels: &mut Vec<String>| {
        *index.entry(s.to_owned()).or_insert_with(|| {
            labels.push(s.to_owned());
            labels.len() - 1
        })
    };
    let mut lines_with_pairs = 0;
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: no + 1,
                message: format!("expected two vertex ids, found {}", fields.len()),
            });
        }
        lines_with_pairs += 1;
        if fields[0] == fields[1] {
            if options.drop_self_loops {
                id(fields[0], &mut labels);
                continue;
            }
            return Err(Error::Parse { line: no + 1, message: format!("self-loop at vertex {}", fields[0]) });
        }
        let u = id(fields[0], &mut labels);
        let v = id(fields[1], &mut labels);
        arcs.insert((u, v));
    }
    if lines_with_pairs == 0 {
        return Err(Error::EmptyFile);
    }
    let keep = |&&(u, v): &&(usize, usize)| options.symmetrize || arcs.contains(&(v, u));
    let graph = Graph::from_edges(labels.len(), arcs.iter().filter(keep).copied())?;
    Ok(LabeledGraph { graph, labels })
}

pub fn load_edge_list(path: impl AsRef<Path>, options: &EdgeListOptions) -> Result<LabeledGraph> {
    let file = std::fs::File::open(path)?;
    read_edge_list(std::io::BufReader::new(file), options)
}

/// Writes one `u v` line per edge with `u < v` in vertex order. Isolated
/// vertices do not appear.
pub fn write_edge_list(writer: &mut impl Write, g: &LabeledGraph) -> Result<()> {
    for (u, v) in g.graph.edges() {
        writeln!(writer, "{} {}", g.labels[u], g.labels[v])?;
    }
    Ok(())
}

pub fn save_edge_list(path: impl AsRef<Path>, g: &LabeledGraph) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_edge_list(&mut out, g)?;
    out.flush()?;
    Ok(())
}

/// A named layer before alignment.
#[derive(Debug, Clone)]
pub struct Layer {
    pub name: String,
    pub graph: LabeledGraph,
    pub source: Option<PathBuf>,
}

/// Layers restricted to one shared vertex set in one canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeListDataset {
    /// Shared ids, sorted.
    pub labels: Vec<String>,
    pub layers: Vec<(String, Graph)>,
    pub provenance: Vec<PathBuf>,
}

impl EdgeListDataset {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn layer(&self, name: &str) -> Option<&Graph> {
        self.layers.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }
}

/// Restricts every layer to the ids present in all layers, removes ids that
/// are isolated in every restricted layer and orders the rest by id.
pub fn prepare_multilayer(layers: &[Layer]) -> Result<EdgeListDataset> {
    if layers.len() < 2 {
        return Err(Error::InvalidInput("need at least two layers".into()));
    }
    let mut common: BTreeSet<&str> = layers[0].graph.labels.iter().map(String::as_str).collect();
    for l in &layers[1..] {
        let here: HashSet<&str> = l.graph.labels.iter().map(String::as_str).collect();
        common.retain(|s| here.contains(s));
    }
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let restrict = |l: &Layer, ids: &[&str]| {
        let index = l.graph.index_of();
        let vertices: Vec<usize> = ids.iter().map(|s| index[s]).collect();
        l.graph.graph.induced(&vertices)
    };
    let ids: Vec<&str> = common.into_iter().collect();
    let restricted: Vec<Graph> = layers.iter().map(|l| restrict(l, &ids)).collect();
    let keep: Vec<usize> = (0..ids.len()).filter(|&v| restricted.iter().any(|g| g.degree(v) > 0)).collect();
    if keep.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for l in layers {
        if seen.insert(&l.name, 0).is_some() {
            return Err(Error::InvalidInput(format!("duplicate layer name {}", l.name)));
        }
    }
    Ok(EdgeListDataset {
        labels: keep.iter().map(|&v| ids[v].to_owned()).collect(),
        layers: layers.iter().zip(&restricted).map(|(l, g)| (l.name.clone(), g.induced(&keep))).collect(),
        provenance: layers.iter().filter_map(|l| l.source.clone()).collect(),
    })
}
