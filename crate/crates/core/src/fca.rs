//! Formal concept analysis over nominally scaled contexts.
//!
//! Concepts and the canonical (Duquenne–Guigues) implication basis are both
//! produced with Ganter's Next Closure, so output follows the lectic order of
//! intents and is stable across runs.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ordering::{finish_csv, OrderedTable};
use crate::table::{InformationTable, ObjectSet};

/// Set of attribute indices into a context's attribute list.
pub type AttrSet = BTreeSet<usize>;

/// Objects, attributes, and the incidence relation between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalContext {
    objects: Vec<String>,
    attributes: Vec<String>,
    incidence: Vec<Vec<bool>>,
}

/// Coded name of the `k`-th ladder rung of the `j`-th source attribute (both 1-based).
pub fn attribute_code(j: usize, k: usize) -> String {
    if j < 10 && k < 10 {
        format!("A{j}{k}")
    } else {
        format!("A{j}.{k}")
    }
}

impl FormalContext {
    pub fn new(objects: Vec<String>, attributes: Vec<String>, incidence: Vec<Vec<bool>>) -> Result<Self> {
        if incidence.len() != objects.len() || incidence.iter().any(|r| r.len() != attributes.len()) {
            return Err(Error::Header(format!(
                "incidence must be {} x {}",
                objects.len(),
                attributes.len()
            )));
        }
        Ok(FormalContext {
            objects,
            attributes,
            incidence,
        })
    }

    /// Nominal scaling of an ordered table restricted to `scope`.
    ///
    /// One context attribute per (column, label) pair occurring in scope,
    /// coded `A{j}{k}`: `j` is the column's 1-based position in the source
    /// table and `k` the label's 1-based position on the column's ladder.
    pub fn from_ordered(ordered: &OrderedTable, scope: &ObjectSet) -> Result<Self> {
        if scope.is_empty() {
            return Err(Error::EmptyScope);
        }
        if let Some(&x) = scope.iter().find(|&&x| x >= ordered.len()) {
            return Err(Error::UnknownObject(format!("#{x}")));
        }
        let mut attributes = Vec::new();
        // (column index, ladder level) per context attribute
        let mut keys = Vec::new();
        for (c, column) in ordered.columns.iter().enumerate() {
            let used: BTreeSet<usize> = scope.iter().map(|&x| column.levels[x]).collect();
            for level in used {
                attributes.push(attribute_code(column.position + 1, level + 1));
                keys.push((c, level));
            }
        }
        let objects = scope.iter().map(|&x| ordered.objects[x].clone()).collect();
        let incidence = scope
            .iter()
            .map(|&x| {
                keys.iter()
                    .map(|&(c, level)| ordered.columns[c].levels[x] == level)
                    .collect()
            })
            .collect();
        FormalContext::new(objects, attributes, incidence)
    }

    /// Nominal scaling of raw table values; context attributes are named
    /// `attr=value`. Values follow the attribute's ladder override when it
    /// has one, otherwise their first appearance in scope.
    pub fn from_table(table: &InformationTable, scope: &ObjectSet) -> Result<Self> {
        if scope.is_empty() {
            return Err(Error::EmptyScope);
        }
        if let Some(&x) = scope.iter().find(|&&x| x >= table.len()) {
            return Err(Error::UnknownObject(format!("#{x}")));
        }
        let mut attributes = Vec::new();
        let mut keys: Vec<(usize, String)> = Vec::new();
        for (j, spec) in table.attributes().iter().enumerate() {
            let mut values: Vec<String> = Vec::new();
            for &x in scope {
                let v = table.value(x, j).to_string();
                if !values.contains(&v) {
                    values.push(v);
                }
            }
            if let Some(ladder) = &spec.ladder_override {
                values.sort_by_key(|v| ladder.iter().position(|l| l == v).unwrap_or(usize::MAX));
            }
            for v in values {
                attributes.push(format!("{}={}", spec.name, v));
                keys.push((j, v));
            }
        }
        let objects = scope.iter().map(|&x| table.label(x).to_string()).collect();
        let incidence = scope
            .iter()
            .map(|&x| {
                keys.iter()
                    .map(|(j, v)| table.value(x, *j).to_string() == *v)
                    .collect()
            })
            .collect();
        FormalContext::new(objects, attributes, incidence)
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn has(&self, object: usize, attribute: usize) -> bool {
        self.incidence[object][attribute]
    }

    pub fn attribute_index(&self, name: &str) -> Result<usize> {
        self.attributes
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn attr_set<S: AsRef<str>>(&self, names: &[S]) -> Result<AttrSet> {
        names.iter().map(|n| self.attribute_index(n.as_ref())).collect()
    }

    pub fn object_set<S: AsRef<str>>(&self, labels: &[S]) -> Result<ObjectSet> {
        labels
            .iter()
            .map(|l| {
                self.objects
                    .iter()
                    .position(|o| o == l.as_ref())
                    .ok_or_else(|| Error::UnknownObject(l.as_ref().to_string()))
            })
            .collect()
    }

    pub fn attribute_names(&self, set: &AttrSet) -> Vec<String> {
        set.iter().map(|&m| self.attributes[m].clone()).collect()
    }

    pub fn object_names(&self, set: &ObjectSet) -> Vec<String> {
        set.iter().map(|&g| self.objects[g].clone()).collect()
    }

    pub fn all_attributes(&self) -> AttrSet {
        (0..self.attributes.len()).collect()
    }

    pub fn all_objects(&self) -> ObjectSet {
        (0..self.objects.len()).collect()
    }

    /// X′: attributes shared by every object in `objects`.
    pub fn derive_attributes(&self, objects: &ObjectSet) -> AttrSet {
        (0..self.attributes.len())
            .filter(|&m| objects.iter().all(|&g| self.incidence[g][m]))
            .collect()
    }

    /// Y′: objects having every attribute in `attributes`.
    pub fn derive_objects(&self, attributes: &AttrSet) -> ObjectSet {
        (0..self.objects.len())
            .filter(|&g| attributes.iter().all(|&m| self.incidence[g][m]))
            .collect()
    }

    /// Y″.
    pub fn closure(&self, attributes: &AttrSet) -> AttrSet {
        self.derive_attributes(&self.derive_objects(attributes))
    }

    /// Cross table: one row per object, `x` where the incidence holds.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["object".to_string()];
        header.extend(self.attributes.iter().cloned());
        w.write_record(&header)?;
        for (g, object) in self.objects.iter().enumerate() {
            let mut row = vec![object.clone()];
            row.extend(
                self.incidence[g]
                    .iter()
                    .map(|&b| if b { "x".to_string() } else { String::new() }),
            );
            w.write_record(&row)?;
        }
        finish_csv(w)
    }
}

/// Successor of `current` in lectic order among the sets closed under
/// `close`, over the ground set `0..n`. `None` after the last one.
pub fn next_closure<F>(current: &AttrSet, n: usize, close: F) -> Option<AttrSet>
where
    F: Fn(&AttrSet) -> AttrSet,
{
    let mut prefix = current.clone();
    for i in (0..n).rev() {
        if prefix.remove(&i) {
            continue;
        }
        let mut candidate = prefix.clone();
        candidate.insert(i);
        let closed = close(&candidate);
        // Canonicity: closing must not add anything below i.
        if closed.range(..i).eq(prefix.iter()) {
            return Some(closed);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Concept {
    pub extent: ObjectSet,
    pub intent: AttrSet,
}

/// All formal concepts, in lectic order of their intents.
pub fn enumerate_concepts(context: &FormalContext) -> Vec<Concept> {
    let n = context.attribute_count();
    let mut out = Vec::new();
    let mut intent = context.closure(&AttrSet::new());
    loop {
        out.push(Concept {
            extent: context.derive_objects(&intent),
            intent: intent.clone(),
        });
        match next_closure(&intent, n, |s| context.closure(s)) {
            Some(next) => intent = next,
            None => break,
        }
    }
    out
}

/// Hasse diagram of the concept order as `(parent, child)` index pairs:
/// the parent's extent strictly contains the child's with nothing in between.
pub fn lattice_cover(concepts: &[Concept]) -> Vec<(usize, usize)> {
    let below = |a: usize, b: usize| {
        concepts[a].extent.len() < concepts[b].extent.len()
            && concepts[a].extent.is_subset(&concepts[b].extent)
    };
    let mut edges = Vec::new();
    for parent in 0..concepts.len() {
        for child in 0..concepts.len() {
            if below(child, parent)
                && !(0..concepts.len()).any(|mid| below(child, mid) && below(mid, parent))
            {
                edges.push((parent, child));
            }
        }
    }
    edges
}

/// A rule `premise ⟹ conclusion` with the number of objects having the premise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Implication {
    pub premise: AttrSet,
    pub conclusion: AttrSet,
    pub support: usize,
}

impl Implication {
    /// True if every object with the premise also has the conclusion.
    pub fn holds_in(&self, context: &FormalContext) -> bool {
        let with_premise = context.derive_objects(&self.premise);
        with_premise.is_subset(&context.derive_objects(&self.conclusion))
    }
}

/// Smallest superset of `set` closed under `rules`.
pub fn implication_closure(rules: &[Implication], set: &AttrSet) -> AttrSet {
    let mut closed = set.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for rule in rules {
            if rule.premise.is_subset(&closed) && !rule.conclusion.is_subset(&closed) {
                closed.extend(rule.conclusion.iter().copied());
                changed = true;
            }
        }
    }
    closed
}

/// Closure used while searching for pseudo-intents: only rules whose premise
/// is a proper subset of the current set fire.
fn pseudo_closure(rules: &[Implication], set: &AttrSet) -> AttrSet {
    let mut closed = set.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for rule in rules {
            if rule.premise.len() < closed.len()
                && rule.premise.is_subset(&closed)
                && !rule.conclusion.is_subset(&closed)
            {
                closed.extend(rule.conclusion.iter().copied());
                changed = true;
            }
        }
    }
    closed
}

/// The Duquenne–Guigues stem base: one rule per pseudo-intent `P`, concluding
/// `P″ \ P`. Sorted by support descending, then by premise.
///
/// Rules with zero support (premises no object has) are kept; see [`supported`].
pub fn canonical_basis(context: &FormalContext) -> Vec<Implication> {
    let n = context.attribute_count();
    let mut basis: Vec<Implication> = Vec::new();
    let mut current = AttrSet::new();
    loop {
        let closed = context.closure(&current);
        if closed != current {
            basis.push(Implication {
                support: context.derive_objects(&current).len(),
                conclusion: closed.difference(&current).copied().collect(),
                premise: current.clone(),
            });
        }
        match next_closure(&current, n, |s| pseudo_closure(&basis, s)) {
            Some(next) => current = next,
            None => break,
        }
    }
    // Most supported first, then by premise indices.
    basis.sort_by(|a, b| b.support.cmp(&a.support).then_with(|| a.premise.cmp(&b.premise)));
    basis
}

/// Rules whose premise occurs in at least one object.
pub fn supported(basis: &[Implication]) -> Vec<Implication> {
    basis.iter().filter(|r| r.support > 0).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyRow {
    pub attribute: usize,
    pub frequency: usize,
    /// Premises of the rules concluding this attribute, each with its support as multiplicity.
    pub contributions: Vec<(AttrSet, usize)>,
}

/// Per-attribute implication frequencies for every attribute that appears in
/// some conclusion, in attribute order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyTable {
    pub rows: Vec<FrequencyRow>,
}

impl FrequencyTable {
    pub fn frequency(&self, attribute: usize) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.attribute == attribute)
            .map(|r| r.frequency)
    }

    /// Columns per attribute; premise lists with `*multiplicity`, then the frequency row.
    pub fn to_csv(&self, context: &FormalContext) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["superconcept".to_string()];
        header.extend(self.rows.iter().map(|r| context.attributes()[r.attribute].clone()));
        w.write_record(&header)?;
        let mut premises = vec!["subconcept".to_string()];
        premises.extend(self.rows.iter().map(|r| {
            r.contributions
                .iter()
                .map(|(p, mult)| {
                    let names = if p.is_empty() {
                        "{ }".to_string()
                    } else {
                        context.attribute_names(p).join(" ")
                    };
                    if *mult == 1 {
                        names
                    } else {
                        format!("{names}*{mult}")
                    }
                })
                .collect::<Vec<_>>()
                .join("; ")
        }));
        w.write_record(&premises)?;
        let mut freq = vec!["frequency".to_string()];
        freq.extend(self.rows.iter().map(|r| r.frequency.to_string()));
        w.write_record(&freq)?;
        finish_csv(w)
    }
}

/// frequency(a) = Σ support × |premise| over the rules whose conclusion contains `a`.
pub fn implication_frequencies(basis: &[Implication]) -> FrequencyTable {
    let concluded: AttrSet = basis.iter().flat_map(|r| r.conclusion.iter().copied()).collect();
    let rows = concluded
        .into_iter()
        .map(|attribute| {
            let contributing: Vec<&Implication> = basis
                .iter()
                .filter(|r| r.conclusion.contains(&attribute))
                .collect();
            FrequencyRow {
                attribute,
                frequency: contributing.iter().map(|r| r.support * r.premise.len()).sum(),
                contributions: contributing
                    .iter()
                    .map(|r| (r.premise.clone(), r.support))
                    .collect(),
            }
        })
        .collect();
    FrequencyTable { rows }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeGroup {
    pub frequency: usize,
    pub attributes: Vec<usize>,
}

/// Attributes grouped by equal frequency, highest first. The first group
/// holds the chief attributes.
pub fn chief_attributes(freqs: &FrequencyTable) -> Vec<AttributeGroup> {
    let mut levels: Vec<usize> = freqs.rows.iter().map(|r| r.frequency).collect();
    levels.sort_unstable_by(|a, b| b.cmp(a));
    levels.dedup();
    levels
        .into_iter()
        .map(|frequency| AttributeGroup {
            frequency,
            attributes: freqs
                .rows
                .iter()
                .filter(|r| r.frequency == frequency)
                .map(|r| r.attribute)
                .collect(),
        })
        .collect()
}

fn braces(names: Vec<String>) -> String {
    if names.is_empty() {
        "{}".to_string()
    } else {
        names.join(" ")
    }
}

/// Numbered lines `n ⟨support⟩ premise ⟹ conclusion;`.
pub fn basis_text(context: &FormalContext, rules: &[Implication]) -> String {
    let mut out = String::new();
    for (i, r) in rules.iter().enumerate() {
        let _ = writeln!(
            out,
            "{} ⟨{}⟩ {} ⟹ {};",
            i + 1,
            r.support,
            braces(context.attribute_names(&r.premise)),
            braces(context.attribute_names(&r.conclusion)),
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NamedImplication {
    pub premise: Vec<String>,
    pub conclusion: Vec<String>,
    pub support: usize,
}

pub fn named_rules(context: &FormalContext, rules: &[Implication]) -> Vec<NamedImplication> {
    rules
        .iter()
        .map(|r| NamedImplication {
            premise: context.attribute_names(&r.premise),
            conclusion: context.attribute_names(&r.conclusion),
            support: r.support,
        })
        .collect()
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Lattice in DOT. Nodes carry reduced labels: the attributes whose
/// attribute concept it is, and the objects whose object concept it is.
pub fn lattice_dot(context: &FormalContext, concepts: &[Concept], cover: &[(usize, usize)]) -> String {
    let mut own_attrs = vec![Vec::new(); concepts.len()];
    for m in 0..context.attribute_count() {
        let intent = context.closure(&AttrSet::from([m]));
        if let Some(c) = concepts.iter().position(|c| c.intent == intent) {
            own_attrs[c].push(context.attributes()[m].clone());
        }
    }
    let mut own_objects = vec![Vec::new(); concepts.len()];
    for g in 0..context.object_count() {
        let intent = context.derive_attributes(&ObjectSet::from([g]));
        if let Some(c) = concepts.iter().position(|c| c.intent == intent) {
            own_objects[c].push(context.objects()[g].clone());
        }
    }
    let mut out = String::from("digraph lattice {\n  node [shape=box];\n");
    for (i, c) in concepts.iter().enumerate() {
        let _ = writeln!(
            out,
            "  c{i} [label=\"{}\\n{}\", tooltip=\"|extent|={} |intent|={}\"];",
            dot_escape(&own_attrs[i].join(" ")),
            dot_escape(&own_objects[i].join(" ")),
            c.extent.len(),
            c.intent.len(),
        );
    }
    for (p, c) in cover {
        let _ = writeln!(out, "  c{p} -> c{c};");
    }
    out.push_str("}\n");
    out
}
