//! Brute-force oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use rankmine::fca::{AttrSet, FormalContext, Implication};
use rankmine::pipeline::PipelineConfig;
use rankmine::table::{AttributeSpec, InformationTable, ObjectSet, Partition};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn case_study_config() -> PipelineConfig {
    PipelineConfig::load(data_dir().join("institutions.json")).expect("case study config")
}

pub fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("o{i}")).collect()
}

/// Connectivity by repeated squaring of a boolean adjacency matrix.
pub fn transitive_closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for (x, row) in reach.iter_mut().enumerate() {
        row[x] = true;
    }
    for &(x, y) in edges {
        reach[x][y] = true;
        reach[y][x] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    reach
}

pub fn same_blocks(p: &Partition, reach: &[Vec<bool>]) -> bool {
    let n = reach.len();
    p.universe_size() == n
        && (0..n).all(|x| (0..n).all(|y| p.same_block(x, y) == reach[x][y]))
}

pub fn subsets(n: usize) -> impl Iterator<Item = AttrSet> {
    (0u32..(1 << n)).map(move |mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
}

/// Every concept `(Y′, Y″)` for `Y ⊆ M`, deduplicated.
pub fn brute_concepts(ctx: &FormalContext) -> BTreeSet<(ObjectSet, AttrSet)> {
    subsets(ctx.attribute_count())
        .map(|y| {
            let extent = ctx.derive_objects(&y);
            let intent = ctx.derive_attributes(&extent);
            (extent, intent)
        })
        .collect()
}

/// Pseudo-intents by increasing size: `P ≠ P″` and `Q″ ⊆ P` for every
/// pseudo-intent `Q ⊊ P`.
pub fn brute_pseudo_intents(ctx: &FormalContext) -> BTreeSet<AttrSet> {
    let mut all: Vec<AttrSet> = subsets(ctx.attribute_count()).collect();
    all.sort_by_key(|s| s.len());
    let mut found: Vec<(AttrSet, AttrSet)> = Vec::new();
    for p in all {
        let closed = ctx.closure(&p);
        if closed == p {
            continue;
        }
        let respects = found
            .iter()
            .filter(|(q, _)| q.len() < p.len() && q.is_subset(&p))
            .all(|(_, q_closed)| q_closed.is_subset(&p));
        if respects {
            found.push((p, closed));
        }
    }
    found.into_iter().map(|(p, _)| p).collect()
}

/// `P ⟹ C` holds iff every object with `P` has `C`.
pub fn valid(ctx: &FormalContext, premise: &AttrSet, conclusion: &AttrSet) -> bool {
    ctx.derive_objects(premise)
        .is_subset(&ctx.derive_objects(conclusion))
}

/// Forward chaining written independently of the library.
pub fn entails(rules: &[Implication], premise: &AttrSet) -> AttrSet {
    let mut set = premise.clone();
    loop {
        let before = set.len();
        for r in rules {
            if r.premise.iter().all(|a| set.contains(a)) {
                set.extend(&r.conclusion);
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

pub fn context_from_bits(rows: &[Vec<bool>]) -> FormalContext {
    let m = rows.first().map_or(0, Vec::len);
    FormalContext::new(
        labels(rows.len()),
        (1..=m).map(|i| format!("m{i}")).collect(),
        rows.to_vec(),
    )
    .unwrap()
}

pub fn numeric_table(columns: &[Vec<u32>], range_max: f64) -> InformationTable {
    let n = columns.first().map_or(0, Vec::len);
    let specs: Vec<AttributeSpec> = (0..columns.len())
        .map(|j| AttributeSpec::numeric(format!("a{j}"), range_max))
        .collect();
    let mut csv = String::from("id");
    for s in &specs {
        csv.push(',');
        csv.push_str(&s.name);
    }
    csv.push('\n');
    for (x, label) in labels(n).iter().enumerate() {
        csv.push_str(label);
        for col in columns {
            csv.push_str(&format!(",{}", col[x]));
        }
        csv.push('\n');
    }
    rankmine::table::load_table(&csv, &specs).unwrap()
}

/// Context with up to 8 objects and 10 attributes.
pub fn arb_context() -> impl Strategy<Value = FormalContext> {
    (1usize..=8, 1usize..=10).prop_flat_map(|(g, m)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), m), g)
            .prop_map(|rows| context_from_bits(&rows))
    })
}

/// Numeric table with up to 8 objects and `1..=attrs` columns; values in `1..=100`.
pub fn arb_table(attrs: usize) -> impl Strategy<Value = InformationTable> {
    (1usize..=8, 1usize..=attrs).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec(1u32..=100, n), m)
            .prop_map(|cols| numeric_table(&cols, 100.0))
    })
}

/// Partition of `0..n` from arbitrary block keys.
pub fn arb_partition() -> impl Strategy<Value = Partition> {
    (1usize..=8).prop_flat_map(|n| {
        prop::collection::vec(0usize..4, n).prop_map(Partition::from_keys)
    })
}

pub fn arb_subset(n: usize) -> impl Strategy<Value = ObjectSet> {
    prop::collection::vec(any::<bool>(), n)
        .prop_map(|bits| bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
}

/// Block membership as label sets, for readable comparisons.
pub fn named_blocks(table: &InformationTable, p: &Partition) -> Vec<Vec<String>> {
    p.blocks()
        .iter()
        .map(|b| b.iter().map(|&x| table.label(x).to_string()).collect())
        .collect()
}

pub fn label_map(rows: &[(&str, &[&str])], columns: &[&str]) -> BTreeMap<String, BTreeMap<String, String>> {
    let mut map: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for (object, cells) in rows {
        for (col, cell) in columns.iter().zip(cells.iter()) {
            map.entry(col.to_string())
                .or_default()
                .insert(object.to_string(), cell.to_string());
        }
    }
    map
}
