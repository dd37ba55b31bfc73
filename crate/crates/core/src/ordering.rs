//! Ordered information tables: per-attribute categories on a best-first
//! ladder, the object orders they induce, weighted scores, dense ranks and
//! rank clusters.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{AttributeKind, AttributeSpec, InformationTable, ObjectSet, Partition};

/// How the blocks of a partition are lined up against a ladder.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockOrder {
    /// Highest mean raw value first; ties by larger block max, then by smallest member.
    #[default]
    MeanDesc,
    /// Universe order of each block's smallest member.
    Listing,
}

/// Category labels, best first, each with a positive weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLadder", into = "RawLadder")]
pub struct LabelLadder {
    labels: Vec<String>,
    weights: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawLadder {
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<u32>>,
}

impl TryFrom<RawLadder> for LabelLadder {
    type Error = Error;

    fn try_from(raw: RawLadder) -> Result<Self> {
        match raw.weights {
            Some(w) => LabelLadder::new(raw.labels, w),
            None => LabelLadder::from_labels(raw.labels),
        }
    }
}

impl From<LabelLadder> for RawLadder {
    fn from(l: LabelLadder) -> Self {
        RawLadder {
            labels: l.labels,
            weights: Some(l.weights),
        }
    }
}

impl LabelLadder {
    pub fn new(labels: Vec<String>, weights: Vec<u32>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidLadder("no labels".into()));
        }
        if labels.len() != weights.len() {
            return Err(Error::InvalidLadder(format!(
                "{} labels but {} weights",
                labels.len(),
                weights.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::InvalidLadder(format!("duplicate label `{dup}`")));
        }
        if weights.contains(&0) {
            return Err(Error::InvalidLadder("weights must be positive".into()));
        }
        if weights.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidLadder(
                "weights must strictly decrease along the ladder".into(),
            ));
        }
        Ok(LabelLadder { labels, weights })
    }

    /// Labels weighted `n, n-1, ..., 1`.
    pub fn from_labels(labels: Vec<String>) -> Result<Self> {
        let n = labels.len() as u32;
        LabelLadder::new(labels, (1..=n).rev().collect())
    }

    fn fixed(labels: &[&str], top: u32) -> Self {
        let weights = (0..labels.len() as u32).map(|i| top - i).collect();
        LabelLadder {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            weights,
        }
    }

    /// `L1..Lk` weighted `k..1`.
    pub fn generic(k: usize) -> Self {
        LabelLadder::from_labels((1..=k).map(|i| format!("L{i}")).collect())
            .expect("generic ladder is valid")
    }

    /// Default ladder for a partition with `k` blocks.
    pub fn default_for(k: usize) -> Self {
        match k {
            3 => LabelLadder::fixed(&["Excellent", "Very good", "Good"], 5),
            4 => LabelLadder::fixed(&["Very high", "High", "Moderate", "Low"], 4),
            6 => LabelLadder::fixed(
                &["Outstanding", "Excellent", "Very good", "Good", "Average", "Poor"],
                6,
            ),
            _ => LabelLadder::generic(k.max(1)),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn label(&self, position: usize) -> &str {
        &self.labels[position]
    }

    pub fn weight(&self, position: usize) -> u32 {
        self.weights[position]
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The first `k` rungs.
    pub fn truncated(&self, k: usize) -> Self {
        LabelLadder {
            labels: self.labels[..k].to_vec(),
            weights: self.weights[..k].to_vec(),
        }
    }
}

/// Picks the ladder for an attribute with `k` categories: an explicit
/// configured ladder, then the attribute's own label override, then the default for `k`.
pub fn resolve_ladder(
    spec: &AttributeSpec,
    k: usize,
    configured: Option<&LabelLadder>,
) -> Result<LabelLadder> {
    if let Some(l) = configured {
        return Ok(l.clone());
    }
    if let Some(labels) = &spec.ladder_override {
        return LabelLadder::from_labels(labels.clone());
    }
    Ok(LabelLadder::default_for(k))
}

/// One ordered attribute: each object's category as a ladder position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedColumn {
    pub attribute: String,
    /// Index of the attribute in its source table.
    pub position: usize,
    pub ladder: LabelLadder,
    /// Ladder position per object.
    pub levels: Vec<usize>,
}

impl OrderedColumn {
    pub fn label(&self, object: usize) -> &str {
        self.ladder.label(self.levels[object])
    }

    pub fn weight(&self, object: usize) -> u32 {
        self.ladder.weight(self.levels[object])
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Orders an attribute by its raw values read as ladder labels, e.g. a
    /// nominal column or a numeric column with an explicit value ladder.
    pub fn from_values(
        table: &InformationTable,
        attribute: &str,
        ladder: LabelLadder,
    ) -> Result<Self> {
        let position = table.attribute_index(attribute)?;
        let levels = (0..table.len())
            .map(|x| {
                let token = table.value(x, position).to_string();
                ladder.position(&token).ok_or_else(|| Error::UnknownLabel {
                    attribute: attribute.to_string(),
                    label: token,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OrderedColumn {
            attribute: attribute.to_string(),
            position,
            ladder,
            levels,
        })
    }
}

/// Lines up a partition's blocks against `ladder`: the best block gets the
/// first label, the next block the second, and so on.
pub fn categorize_partition(
    table: &InformationTable,
    attribute: &str,
    partition: &Partition,
    ladder: &LabelLadder,
) -> Result<OrderedColumn> {
    let position = table.attribute_index(attribute)?;
    let spec = &table.attributes()[position];
    if spec.kind != AttributeKind::Numeric {
        return Err(Error::NotNumericAttribute(attribute.to_string()));
    }
    if partition.universe_size() != table.len() {
        return Err(Error::InvalidPartition(format!(
            "partition for `{attribute}` covers {} objects, table has {}",
            partition.universe_size(),
            table.len()
        )));
    }
    let k = partition.block_count();
    if ladder.len() < k {
        return Err(Error::LadderTooShort {
            attribute: attribute.to_string(),
            labels: ladder.len(),
            blocks: k,
        });
    }
    let values = table.numeric_column(attribute)?;
    let mut order: Vec<usize> = (0..k).collect();
    match spec.block_order {
        BlockOrder::Listing => {}
        BlockOrder::MeanDesc => {
            let stats: Vec<(f64, f64)> = partition
                .blocks()
                .iter()
                .map(|b| {
                    let sum: f64 = b.iter().map(|&x| values[x]).sum();
                    let max = b.iter().map(|&x| values[x]).fold(f64::MIN, f64::max);
                    (sum / b.len() as f64, max)
                })
                .collect();
            // Blocks are stored by smallest member, so a stable sort keeps that tie-break.
            order.sort_by(|&a, &b| {
                stats[b]
                    .0
                    .total_cmp(&stats[a].0)
                    .then(stats[b].1.total_cmp(&stats[a].1))
            });
        }
    }
    let mut levels = vec![0; table.len()];
    for (level, &b) in order.iter().enumerate() {
        for &x in &partition.blocks()[b] {
            levels[x] = level;
        }
    }
    Ok(OrderedColumn {
        attribute: attribute.to_string(),
        position,
        ladder: ladder.truncated(k),
        levels,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedTable {
    pub objects: Vec<String>,
    pub columns: Vec<OrderedColumn>,
    /// Attributes left out because they do not separate any objects.
    pub dropped: Vec<String>,
}

impl OrderedTable {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn column(&self, attribute: &str) -> Result<&OrderedColumn> {
        self.columns
            .iter()
            .find(|c| c.attribute == attribute)
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))
    }

    pub fn object_index(&self, label: &str) -> Result<usize> {
        self.objects
            .iter()
            .position(|o| o == label)
            .ok_or_else(|| Error::UnknownObject(label.to_string()))
    }

    /// Object label and one category label per retained column.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["object".to_string()];
        header.extend(self.columns.iter().map(|c| c.attribute.clone()));
        w.write_record(&header)?;
        for (x, object) in self.objects.iter().enumerate() {
            let mut row = vec![object.clone()];
            row.extend(self.columns.iter().map(|c| c.label(x).to_string()));
            w.write_record(&row)?;
        }
        finish_csv(w)
    }

    /// `attribute -> object -> label`, the format accepted as an override.
    pub fn to_label_map(&self) -> BTreeMap<String, BTreeMap<String, String>> {
        self.columns
            .iter()
            .map(|c| {
                let labels = self
                    .objects
                    .iter()
                    .enumerate()
                    .map(|(x, o)| (o.clone(), c.label(x).to_string()))
                    .collect();
                (c.attribute.clone(), labels)
            })
            .collect()
    }
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<csv>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Builds the ordered table from one partition per numeric attribute.
///
/// Attributes whose partition is a single block are dropped unless their spec
/// clears `drop_if_indiscernible`. Nominal attributes are ordered by their
/// `ladder_override`; those without one are skipped.
pub fn build_ordered_table(
    table: &InformationTable,
    partitions: &BTreeMap<String, Partition>,
    ladders: &BTreeMap<String, LabelLadder>,
) -> Result<OrderedTable> {
    let mut columns = Vec::new();
    let mut dropped = Vec::new();
    for spec in table.attributes() {
        match spec.kind {
            AttributeKind::Numeric => {
                let partition = partitions.get(&spec.name).ok_or_else(|| {
                    Error::InvalidPartition(format!("no partition for `{}`", spec.name))
                })?;
                if partition.block_count() <= 1 && spec.drop_if_indiscernible {
                    dropped.push(spec.name.clone());
                    continue;
                }
                let ladder =
                    resolve_ladder(spec, partition.block_count(), ladders.get(&spec.name))?;
                columns.push(categorize_partition(table, &spec.name, partition, &ladder)?);
            }
            AttributeKind::Nominal => {
                let ladder = match (ladders.get(&spec.name), &spec.ladder_override) {
                    (Some(l), _) => l.clone(),
                    (None, Some(labels)) => LabelLadder::from_labels(labels.clone())?,
                    (None, None) => continue,
                };
                columns.push(OrderedColumn::from_values(table, &spec.name, ladder)?);
            }
        }
    }
    Ok(OrderedTable {
        objects: table.labels().map(String::from).collect(),
        columns,
        dropped,
    })
}

/// Builds an ordered table from explicit labels (`attribute -> object -> label`).
///
/// Numeric attributes missing from the map are recorded as dropped. Ladders
/// come from `ladders`, the attribute's own override, or the smallest default ladder
/// holding every label used.
pub fn ordered_table_from_labels(
    table: &InformationTable,
    labels: &BTreeMap<String, BTreeMap<String, String>>,
    ladders: &BTreeMap<String, LabelLadder>,
) -> Result<OrderedTable> {
    for name in labels.keys() {
        table.attribute_index(name)?;
    }
    let mut columns = Vec::new();
    let mut dropped = Vec::new();
    for (position, spec) in table.attributes().iter().enumerate() {
        let Some(by_object) = labels.get(&spec.name) else {
            if spec.is_numeric() {
                dropped.push(spec.name.clone());
            }
            continue;
        };
        if let Some(extra) = by_object.keys().find(|o| table.object_index(o).is_err()) {
            return Err(Error::UnknownObject(extra.clone()));
        }
        let used: Vec<&str> = table
            .labels()
            .map(|o| {
                by_object.get(o).map(String::as_str).ok_or_else(|| Error::Override {
                    stage: "ordered".into(),
                    reason: format!("no label for object `{o}` in attribute `{}`", spec.name),
                })
            })
            .collect::<Result<_>>()?;
        let ladder = match (ladders.get(&spec.name), &spec.ladder_override) {
            (Some(l), _) => l.clone(),
            (None, Some(l)) => LabelLadder::from_labels(l.clone())?,
            (None, None) => [3, 4, 6]
                .into_iter()
                .map(LabelLadder::default_for)
                .find(|l| used.iter().all(|u| l.position(u).is_some()))
                .ok_or_else(|| Error::Override {
                    stage: "ordered".into(),
                    reason: format!(
                        "labels of `{}` fit no default ladder; configure one",
                        spec.name
                    ),
                })?,
        };
        let levels = used
            .iter()
            .map(|u| {
                ladder.position(u).ok_or_else(|| Error::UnknownLabel {
                    attribute: spec.name.clone(),
                    label: u.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        columns.push(OrderedColumn {
            attribute: spec.name.clone(),
            position,
            ladder,
            levels,
        });
    }
    Ok(OrderedTable {
        objects: table.labels().map(String::from).collect(),
        columns,
        dropped,
    })
}

/// Outcome of comparing two objects on one attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precedence {
    Ahead,
    Behind,
    Tied,
}

/// Outcome of comparing two objects on a set of attributes at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JointPrecedence {
    Ahead,
    NotAhead,
}

fn check_object(column: &OrderedColumn, x: usize) -> Result<()> {
    if x >= column.len() {
        return Err(Error::UnknownObject(format!("#{x}")));
    }
    Ok(())
}

/// `x` is ahead of `y` iff its label strictly precedes `y`'s on the ladder.
pub fn induced_order(column: &OrderedColumn, x: usize, y: usize) -> Result<Precedence> {
    check_object(column, x)?;
    check_object(column, y)?;
    Ok(match column.levels[x].cmp(&column.levels[y]) {
        std::cmp::Ordering::Less => Precedence::Ahead,
        std::cmp::Ordering::Greater => Precedence::Behind,
        std::cmp::Ordering::Equal => Precedence::Tied,
    })
}

/// Intersection of the induced orders: ahead only if strictly ahead on every column.
pub fn joint_order(columns: &[&OrderedColumn], x: usize, y: usize) -> Result<JointPrecedence> {
    if columns.is_empty() {
        return Err(Error::EmptyAttributeSet);
    }
    for column in columns {
        if induced_order(column, x, y)? != Precedence::Ahead {
            return Ok(JointPrecedence::NotAhead);
        }
    }
    Ok(JointPrecedence::Ahead)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankRow {
    pub object: String,
    pub labels: Vec<String>,
    pub weights: Vec<u32>,
    pub total: u32,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankTable {
    pub attributes: Vec<String>,
    pub rows: Vec<RankRow>,
}

impl RankTable {
    pub fn ranks(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.rank).collect()
    }

    pub fn totals(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.total).collect()
    }

    pub fn max_rank(&self) -> usize {
        self.rows.iter().map(|r| r.rank).max().unwrap_or(0)
    }

    /// Label with its weight in parentheses per attribute, then total and rank.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["object".to_string()];
        header.extend(self.attributes.iter().cloned());
        header.push("total".into());
        header.push("rank".into());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.object.clone()];
            rec.extend(
                row.labels
                    .iter()
                    .zip(&row.weights)
                    .map(|(l, w)| format!("{l} ({w})")),
            );
            rec.push(row.total.to_string());
            rec.push(row.rank.to_string());
            w.write_record(&rec)?;
        }
        finish_csv(w)
    }
}

/// Sums label weights per object and assigns dense ranks, highest total first.
pub fn score_and_rank(ordered: &OrderedTable) -> RankTable {
    let mut rows: Vec<RankRow> = ordered
        .objects
        .iter()
        .enumerate()
        .map(|(x, object)| {
            let labels = ordered.columns.iter().map(|c| c.label(x).to_string()).collect();
            let weights: Vec<u32> = ordered.columns.iter().map(|c| c.weight(x)).collect();
            RankRow {
                object: object.clone(),
                labels,
                total: weights.iter().sum(),
                weights,
                rank: 0,
            }
        })
        .collect();
    let mut distinct: Vec<u32> = rows.iter().map(|r| r.total).collect();
    distinct.sort_unstable_by(|a, b| b.cmp(a));
    distinct.dedup();
    for row in &mut rows {
        row.rank = distinct.iter().position(|&t| t == row.total).unwrap() + 1;
    }
    RankTable {
        attributes: ordered.columns.iter().map(|c| c.attribute.clone()).collect(),
        rows,
    }
}

/// Inclusive range of dense ranks, written `[lo, hi]` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct RankRange {
    pub lo: usize,
    pub hi: usize,
}

impl RankRange {
    pub fn new(lo: usize, hi: usize) -> Self {
        RankRange { lo, hi }
    }

    pub fn contains(&self, rank: usize) -> bool {
        self.lo <= rank && rank <= self.hi
    }
}

impl From<(usize, usize)> for RankRange {
    fn from((lo, hi): (usize, usize)) -> Self {
        RankRange { lo, hi }
    }
}

impl From<RankRange> for (usize, usize) {
    fn from(r: RankRange) -> Self {
        (r.lo, r.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankCluster {
    /// 1-based index of the range that produced this cluster.
    pub cluster_id: usize,
    pub rank_range: RankRange,
    pub members: ObjectSet,
}

pub fn validate_ranges(ranges: &[RankRange]) -> Result<()> {
    for r in ranges {
        if r.lo == 0 || r.lo > r.hi {
            return Err(Error::InvalidRanges(format!(
                "[{}, {}] is not a valid rank range",
                r.lo, r.hi
            )));
        }
    }
    for (i, a) in ranges.iter().enumerate() {
        for b in &ranges[i + 1..] {
            if a.lo <= b.hi && b.lo <= a.hi {
                return Err(Error::InvalidRanges(format!(
                    "[{}, {}] overlaps [{}, {}]",
                    a.lo, a.hi, b.lo, b.hi
                )));
            }
        }
    }
    Ok(())
}

/// Groups objects by rank range. Ranges with no members are left out; the
/// remaining clusters keep their range's 1-based index as id.
pub fn cluster_by_rank(ranks: &RankTable, ranges: &[RankRange]) -> Result<Vec<RankCluster>> {
    validate_ranges(ranges)?;
    for row in &ranks.rows {
        if !ranges.iter().any(|r| r.contains(row.rank)) {
            return Err(Error::InvalidRanges(format!(
                "rank {} of `{}` is not covered",
                row.rank, row.object
            )));
        }
    }
    Ok(ranges
        .iter()
        .enumerate()
        .map(|(i, r)| RankCluster {
            cluster_id: i + 1,
            rank_range: *r,
            members: ranks
                .rows
                .iter()
                .enumerate()
                .filter(|(_, row)| r.contains(row.rank))
                .map(|(x, _)| x)
                .collect(),
        })
        .filter(|c| !c.members.is_empty())
        .collect())
}
