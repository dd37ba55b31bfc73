//! Information tables: a finite universe of objects described by numeric or
//! nominal attributes, and exact indiscernibility partitions over them.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordering::BlockOrder;

/// Set of object indices into a table's universe.
pub type ObjectSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObjectId {
    pub index: usize,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Nominal,
}

fn default_true() -> bool {
    true
}

/// Declaration of one column of an information table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    /// Upper bound of the admissible range `[1, range_max]`; numeric only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_max: Option<f64>,
    /// Ordered labels, best first. For nominal attributes this is the value
    /// order; for numeric attributes it replaces the default category ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder_override: Option<Vec<String>>,
    #[serde(default = "default_true")]
    pub drop_if_indiscernible: bool,
    #[serde(default)]
    pub block_order: BlockOrder,
}

impl AttributeSpec {
    pub fn numeric(name: impl Into<String>, range_max: f64) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Numeric,
            range_max: Some(range_max),
            ladder_override: None,
            drop_if_indiscernible: true,
            block_order: BlockOrder::default(),
        }
    }

    pub fn nominal(name: impl Into<String>) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Nominal,
            range_max: None,
            ladder_override: None,
            drop_if_indiscernible: true,
            block_order: BlockOrder::default(),
        }
    }

    pub fn with_ladder(mut self, labels: &[&str]) -> Self {
        self.ladder_override = Some(labels.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn with_block_order(mut self, order: BlockOrder) -> Self {
        self.block_order = order;
        self
    }

    pub fn is_numeric(&self) -> bool {
        self.kind == AttributeKind::Numeric
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidSpec {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.name.is_empty() {
            return Err(invalid("empty name"));
        }
        if self.kind == AttributeKind::Numeric {
            match self.range_max {
                Some(r) if r.is_finite() && r >= 1.0 => {}
                Some(_) => return Err(invalid("range_max must be a finite number >= 1")),
                None => return Err(invalid("numeric attribute needs range_max")),
            }
        }
        if let Some(ladder) = &self.ladder_override {
            let mut seen = HashSet::new();
            for label in ladder {
                if !seen.insert(label) {
                    return Err(invalid(&format!("duplicate ladder label `{label}`")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Nominal(String),
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(v) => Some(*v),
            Value::Nominal(_) => None,
        }
    }

    /// Key with exact-equality semantics, usable in hash maps.
    fn key(&self) -> ValueKey {
        match self {
            // +0.0 and -0.0 compare equal, so they must share a key.
            Value::Number(v) if *v == 0.0 => ValueKey::Number(0),
            Value::Number(v) => ValueKey::Number(v.to_bits()),
            Value::Nominal(s) => ValueKey::Nominal(s.clone()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(v) => write!(f, "{v}"),
            Value::Nominal(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum ValueKey {
    Number(u64),
    Nominal(String),
}

/// Objects × attributes with a total information function.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationTable {
    objects: Vec<ObjectId>,
    attributes: Vec<AttributeSpec>,
    /// Row-major: `values[object][attribute]`.
    values: Vec<Vec<Value>>,
}

impl InformationTable {
    /// Builds a validated table. Rows are indexed like `labels`, columns like `attributes`.
    pub fn new(
        labels: Vec<String>,
        attributes: Vec<AttributeSpec>,
        values: Vec<Vec<Value>>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateObject(label.clone()));
            }
        }
        let mut names = HashSet::new();
        for spec in &attributes {
            spec.validate()?;
            if !names.insert(spec.name.as_str()) {
                return Err(Error::Header(format!("duplicate attribute `{}`", spec.name)));
            }
        }
        if values.len() != labels.len() {
            return Err(Error::Header(format!(
                "{} rows for {} objects",
                values.len(),
                labels.len()
            )));
        }
        for (row, (label, cells)) in labels.iter().zip(&values).enumerate() {
            if cells.len() != attributes.len() {
                let column = attributes
                    .get(cells.len())
                    .map(|a| a.name.clone())
                    .unwrap_or_default();
                return Err(Error::MissingCell {
                    row: row + 1,
                    object: label.clone(),
                    column,
                });
            }
            for (spec, cell) in attributes.iter().zip(cells) {
                check_cell(row + 1, label, spec, cell)?;
            }
        }
        let objects = labels
            .into_iter()
            .enumerate()
            .map(|(index, label)| ObjectId { index, label })
            .collect();
        Ok(InformationTable {
            objects,
            attributes,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[ObjectId] {
        &self.objects
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.objects.iter().map(|o| o.label.as_str())
    }

    pub fn label(&self, object: usize) -> &str {
        &self.objects[object].label
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn attribute_index(&self, name: &str) -> Result<usize> {
        self.attributes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn attribute(&self, name: &str) -> Result<&AttributeSpec> {
        Ok(&self.attributes[self.attribute_index(name)?])
    }

    pub fn object_index(&self, label: &str) -> Result<usize> {
        self.objects
            .iter()
            .position(|o| o.label == label)
            .ok_or_else(|| Error::UnknownObject(label.to_string()))
    }

    pub fn value(&self, object: usize, attribute: usize) -> &Value {
        &self.values[object][attribute]
    }

    /// Raw values of a numeric column, in universe order.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.attribute_index(name)?;
        if !self.attributes[j].is_numeric() {
            return Err(Error::NotNumericAttribute(name.to_string()));
        }
        Ok(self
            .values
            .iter()
            .map(|row| row[j].as_number().expect("validated numeric cell"))
            .collect())
    }

    /// Resolves object labels to a set; unknown labels are an error.
    pub fn object_set<S: AsRef<str>>(&self, labels: &[S]) -> Result<ObjectSet> {
        labels.iter().map(|l| self.object_index(l.as_ref())).collect()
    }

    pub fn set_labels(&self, set: &ObjectSet) -> Vec<String> {
        set.iter().map(|&i| self.objects[i].label.clone()).collect()
    }

    pub fn universe(&self) -> ObjectSet {
        (0..self.len()).collect()
    }
}

fn check_cell(row: usize, object: &str, spec: &AttributeSpec, cell: &Value) -> Result<()> {
    match (spec.kind, cell) {
        (AttributeKind::Numeric, Value::Number(v)) => {
            let range_max = spec.range_max.unwrap_or(f64::INFINITY);
            if !v.is_finite() || *v < 1.0 || *v > range_max {
                return Err(Error::OutOfRange {
                    row,
                    object: object.to_string(),
                    column: spec.name.clone(),
                    value: *v,
                    range_max,
                });
            }
            Ok(())
        }
        (AttributeKind::Numeric, Value::Nominal(token)) => Err(Error::NotNumeric {
            row,
            object: object.to_string(),
            column: spec.name.clone(),
            token: token.clone(),
        }),
        (AttributeKind::Nominal, _) => Ok(()),
    }
}

/// Parses a comma-separated table: header row first, object labels in the
/// first column. Every header column after the first must have a spec; the
/// table keeps the header's column order.
pub fn load_table(csv_text: &str, specs: &[AttributeSpec]) -> Result<InformationTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());

    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 {
        return Err(Error::Header(
            "expected an object label column and at least one attribute".into(),
        ));
    }
    let by_name: HashMap<&str, &AttributeSpec> =
        specs.iter().map(|s| (s.name.as_str(), s)).collect();
    let mut columns = Vec::with_capacity(header.len() - 1);
    for name in &header[1..] {
        let spec = by_name
            .get(name.as_str())
            .ok_or_else(|| Error::Header(format!("column `{name}` has no attribute spec")))?;
        columns.push((*spec).clone());
    }
    if columns.len() != specs.len() {
        let present: HashSet<&str> = header[1..].iter().map(String::as_str).collect();
        let missing: Vec<&str> = specs
            .iter()
            .map(|s| s.name.as_str())
            .filter(|n| !present.contains(n))
            .collect();
        return Err(Error::Header(if missing.is_empty() {
            "duplicate column in header".to_string()
        } else {
            format!("no column for attribute(s) {}", missing.join(", "))
        }));
    }

    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // Header is line 1.
        let row = i + 2;
        let label = record.get(0).unwrap_or("").to_string();
        if label.is_empty() {
            return Err(Error::Header(format!("row {row}: missing object label")));
        }
        let mut cells = Vec::with_capacity(columns.len());
        for (j, spec) in columns.iter().enumerate() {
            let token = match record.get(j + 1) {
                Some(t) if !t.is_empty() => t,
                _ => {
                    return Err(Error::MissingCell {
                        row,
                        object: label,
                        column: spec.name.clone(),
                    })
                }
            };
            let value = match spec.kind {
                AttributeKind::Numeric => {
                    let v: f64 = token.parse().map_err(|_| Error::NotNumeric {
                        row,
                        object: label.clone(),
                        column: spec.name.clone(),
                        token: token.to_string(),
                    })?;
                    let v = Value::Number(v);
                    check_cell(row, &label, spec, &v)?;
                    v
                }
                AttributeKind::Nominal => Value::Nominal(token.to_string()),
            };
            cells.push(value);
        }
        labels.push(label);
        values.push(cells);
    }
    InformationTable::new(labels, columns, values)
}

/// Disjoint cover of a universe `0..n`.
///
/// Blocks are kept sorted by their smallest member and members are sorted,
/// so two partitions are equal iff they group the universe identically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    /// Builds a partition from per-object block keys: objects sharing a key share a block.
    pub fn from_keys<K: Eq + std::hash::Hash>(keys: impl IntoIterator<Item = K>) -> Self {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (x, key) in keys.into_iter().enumerate() {
            let next = blocks.len();
            let id = *ids.entry(key).or_insert(next);
            if id == blocks.len() {
                blocks.push(Vec::new());
            }
            blocks[id].push(x);
        }
        // First-appearance order already sorts blocks by smallest member.
        let n = blocks.iter().map(Vec::len).sum();
        let mut block_of = vec![0; n];
        for (b, block) in blocks.iter().enumerate() {
            for &x in block {
                block_of[x] = b;
            }
        }
        Partition { blocks, block_of }
    }

    /// Validates and normalizes explicit blocks over `0..n`.
    pub fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {b} is empty")));
            }
            for &x in block {
                if x >= n {
                    return Err(Error::InvalidPartition(format!(
                        "object index {x} outside universe of size {n}"
                    )));
                }
                if owner[x] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "object index {x} appears in more than one block"
                    )));
                }
                owner[x] = b;
            }
        }
        if let Some(x) = owner.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidPartition(format!(
                "object index {x} is not covered"
            )));
        }
        Ok(Partition::from_keys(owner))
    }

    pub fn singletons(n: usize) -> Self {
        Partition::from_keys(0..n)
    }

    pub fn whole(n: usize) -> Self {
        Partition::from_keys(std::iter::repeat_n((), n))
    }

    pub fn universe_size(&self) -> usize {
        self.block_of.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, object: usize) -> usize {
        self.block_of[object]
    }

    pub fn same_block(&self, x: usize, y: usize) -> bool {
        self.block_of[x] == self.block_of[y]
    }

    /// True if every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.universe_size() == coarser.universe_size()
            && self.blocks.iter().all(|block| {
                let b = coarser.block_of(block[0]);
                block.iter().all(|&x| coarser.block_of(x) == b)
            })
    }

    /// Checks the structural invariants; used by tests after every construction.
    pub fn is_valid(&self) -> bool {
        let n = self.block_of.len();
        let mut seen = vec![false; n];
        for (b, block) in self.blocks.iter().enumerate() {
            if block.is_empty() || block.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for &x in block {
                if x >= n || seen[x] || self.block_of[x] != b {
                    return false;
                }
                seen[x] = true;
            }
        }
        seen.into_iter().all(|s| s) && self.blocks.windows(2).all(|w| w[0][0] < w[1][0])
    }
}

/// Exact indiscernibility over an attribute subset: two objects share a block
/// iff they agree on every attribute in `attrs`.
pub fn indiscernibility<S: AsRef<str>>(table: &InformationTable, attrs: &[S]) -> Result<Partition> {
    if attrs.is_empty() {
        return Err(Error::EmptyAttributeSet);
    }
    let mut columns = attrs
        .iter()
        .map(|a| table.attribute_index(a.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    columns.sort_unstable();
    columns.dedup();
    let keys = (0..table.len()).map(|x| {
        columns
            .iter()
            .map(|&j| table.value(x, j).key())
            .collect::<Vec<_>>()
    });
    Ok(Partition::from_keys(keys))
}
