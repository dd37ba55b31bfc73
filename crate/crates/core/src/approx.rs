//! (α,β)-cuts of proximity relations, the partitions they generate, and
//! rough lower/upper approximations over any partition.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proximity::ProximityRelation;
use crate::table::{InformationTable, ObjectSet, Partition};

/// Slack allowed on `alpha + beta <= 1` for grid points such as `i/n + j/n`.
const J_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutParams {
    alpha: f64,
    beta: f64,
}

impl CutParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(alpha) || !unit(beta) || alpha + beta > 1.0 + J_EPS {
            return Err(Error::InvalidCut { alpha, beta });
        }
        Ok(CutParams { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Undirected graph of (α,β)-similar pairs. Self-loops are implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityGraph {
    size: usize,
    /// Unordered pairs stored as `(x, y)` with `x < y`.
    edges: BTreeSet<(usize, usize)>,
}

impl SimilarityGraph {
    pub fn new(size: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges = pairs
            .into_iter()
            .filter(|(x, y)| x != y)
            .map(|(x, y)| (x.min(y), x.max(y)))
            .inspect(|&(_, y)| assert!(y < size, "edge endpoint outside graph"))
            .collect();
        SimilarityGraph { size, edges }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Non-loop edges, each once with the smaller endpoint first.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x == y || self.edges.contains(&(x.min(y), x.max(y)))
    }
}

/// Keeps the pairs with `mu >= alpha` and `nu <= beta`, compared at full precision.
pub fn cut_graph(rel: &ProximityRelation, params: CutParams) -> SimilarityGraph {
    let n = rel.size();
    let mut pairs = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            let d = rel.degree(x, y);
            if d.mu >= params.alpha && d.nu <= params.beta {
                pairs.push((x, y));
            }
        }
    }
    SimilarityGraph::new(n, pairs)
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return;
        }
        match self.rank[rx].cmp(&self.rank[ry]) {
            std::cmp::Ordering::Less => self.parent[rx] = ry,
            std::cmp::Ordering::Greater => self.parent[ry] = rx,
            std::cmp::Ordering::Equal => {
                self.parent[ry] = rx;
                self.rank[rx] += 1;
            }
        }
    }
}

/// Equivalence classes of transitive (α,β)-similarity: the connected
/// components of the cut graph.
pub fn partition_from_cut(graph: &SimilarityGraph) -> Partition {
    let mut sets = DisjointSets::new(graph.size);
    for (x, y) in graph.edges() {
        sets.union(x, y);
    }
    Partition::from_keys((0..graph.size).map(|x| sets.find(x)))
}

/// Union of the blocks wholly inside `target`.
pub fn lower_approx(partition: &Partition, target: &ObjectSet) -> ObjectSet {
    partition
        .blocks()
        .iter()
        .filter(|b| b.iter().all(|x| target.contains(x)))
        .flatten()
        .copied()
        .collect()
}

/// Union of the blocks meeting `target`.
pub fn upper_approx(partition: &Partition, target: &ObjectSet) -> ObjectSet {
    partition
        .blocks()
        .iter()
        .filter(|b| b.iter().any(|x| target.contains(x)))
        .flatten()
        .copied()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoughApproximation {
    pub lower: ObjectSet,
    pub upper: ObjectSet,
    pub boundary: ObjectSet,
    /// The target is exactly a union of blocks.
    pub definable: bool,
}

pub fn rough_approximation(partition: &Partition, target: &ObjectSet) -> RoughApproximation {
    let lower = lower_approx(partition, target);
    let upper = upper_approx(partition, target);
    let boundary: ObjectSet = upper.difference(&lower).copied().collect();
    let definable = boundary.is_empty();
    RoughApproximation {
        lower,
        upper,
        boundary,
        definable,
    }
}

/// JSON form of one attribute's partition, blocks given as object labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub attribute: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub blocks: Vec<Vec<String>>,
}

impl PartitionRecord {
    pub fn from_partition(
        table: &InformationTable,
        attribute: &str,
        params: Option<CutParams>,
        partition: &Partition,
    ) -> Self {
        PartitionRecord {
            attribute: attribute.to_string(),
            alpha: params.map(|p| p.alpha),
            beta: params.map(|p| p.beta),
            blocks: partition
                .blocks()
                .iter()
                .map(|b| b.iter().map(|&x| table.label(x).to_string()).collect())
                .collect(),
        }
    }

    /// Resolves labels against `table`; the blocks must cover its universe exactly.
    pub fn to_partition(&self, table: &InformationTable) -> Result<Partition> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| table.object_set(b).map(|s| s.into_iter().collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        let listed: usize = self.blocks.iter().map(Vec::len).sum();
        let distinct: usize = blocks.iter().map(Vec::len).sum();
        if listed != distinct {
            return Err(Error::InvalidPartition(format!(
                "attribute `{}`: an object label is repeated within a block",
                self.attribute
            )));
        }
        Partition::from_blocks(table.len(), blocks).map_err(|e| match e {
            Error::InvalidPartition(msg) => {
                Error::InvalidPartition(format!("attribute `{}`: {msg}", self.attribute))
            }
            other => other,
        })
    }
}

/// Accepts either one record or a list of them.
pub fn parse_partition_records(json: &str) -> Result<Vec<PartitionRecord>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(PartitionRecord),
        Many(Vec<PartitionRecord>),
    }
    Ok(match serde_json::from_str(json)? {
        OneOrMany::One(r) => vec![r],
        OneOrMany::Many(v) => v,
    })
}
