//! Case-study acceptance checks, one test per criterion. Each prints a single
//! `PASS`/`FAIL` line; run with `--nocapture --test-threads=1` to read them in order.

#![allow(clippy::redundant_closure_call)]

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, TestRunner};
use rankmine::approx::{cut_graph, lower_approx, partition_from_cut, upper_approx, CutParams};
use rankmine::fca::{canonical_basis, enumerate_concepts, FormalContext, Implication};
use rankmine::pipeline::{
    emit_reports, run_on_table, run_pipeline, search_alpha_beta, PipelineReport, RunTo,
};
use rankmine::proximity::build_proximity;
use rankmine::table::{indiscernibility, load_table, InformationTable, Partition};

use common::*;

const TOLERANCE: f64 = 0.005;

fn verdict(id: u32, name: &str, outcome: Result<String, String>) {
    match outcome {
        Ok(detail) => println!("criterion {id} [{name}]: PASS ({detail})"),
        Err(why) => {
            println!("criterion {id} [{name}]: FAIL ({why})");
            panic!("criterion {id} failed: {why}");
        }
    }
}

fn case_table() -> InformationTable {
    let config = case_study_config();
    let csv = fs::read_to_string(config.resolve(&config.data_path)).unwrap();
    load_table(&csv, &config.attributes).unwrap()
}

fn full_run() -> PipelineReport {
    run_pipeline(&case_study_config()).expect("case study pipeline")
}

/// Printed partitions, as object numbers.
fn printed_blocks(attribute: &str) -> Vec<Vec<usize>> {
    match attribute {
        "IC" => vec![vec![1, 2, 3], vec![4, 5], vec![6, 7, 8], vec![9, 10]],
        "IF" => vec![vec![1, 2, 3], vec![4, 5, 6], vec![7], vec![8, 9, 10]],
        "PP" => vec![vec![1, 2, 4], vec![3, 5], vec![6], vec![7, 8, 9, 10]],
        "RS" => vec![(1..=10).collect()],
        "SS" => vec![vec![1, 2, 3, 5], vec![4, 6, 7, 8, 9], vec![10]],
        "ECA" => vec![vec![1, 5], vec![2], vec![3, 4], vec![6, 7], vec![8], vec![9, 10]],
        other => panic!("no printed partition for {other}"),
    }
}

fn printed_partition(attribute: &str) -> Partition {
    let blocks = printed_blocks(attribute)
        .into_iter()
        .map(|b| b.into_iter().map(|i| i - 1).collect())
        .collect();
    Partition::from_blocks(10, blocks).unwrap()
}

/// Cells `(row, column) -> (mu, nu)` of a printed proximity table; cells
/// that do not read as two numbers are skipped.
fn printed_cells(attribute: &str) -> BTreeMap<(usize, usize), (f64, f64)> {
    let text = fs::read_to_string(fixture(&format!("proximity_{attribute}.tsv"))).unwrap();
    let mut cells = BTreeMap::new();
    for (row, line) in text.lines().enumerate() {
        for (col, cell) in line.split('\t').skip(1).enumerate() {
            let parts: Vec<Option<f64>> = cell.split(',').map(|p| p.trim().parse().ok()).collect();
            if let [Some(mu), Some(nu)] = parts[..] {
                cells.insert((row, col), (mu, nu));
            }
        }
    }
    cells
}

#[test]
fn criterion_1_proximity_fidelity() {
    let table = case_table();
    let outcome = (|| {
        let mut failures = Vec::new();
        let mut checked = 0;
        for attribute in ["IC", "IF", "PP", "RS", "SS", "ECA"] {
            let rel = build_proximity(&table, attribute).unwrap();
            let cells = printed_cells(attribute);
            for (&(x, y), &(mu, nu)) in &cells {
                // A cell is illegible when its printed mirror disagrees with it,
                // or when its row's diagonal is misprinted (a shifted row).
                if cells.get(&(y, x)).is_some_and(|&m| m != (mu, nu))
                    || cells.get(&(x, x)).is_some_and(|&d| d != (1.0, 0.0))
                {
                    continue;
                }
                checked += 1;
                let d = rel.degree(x, y);
                if (d.mu - mu).abs() > TOLERANCE || (d.nu - nu).abs() > TOLERANCE {
                    failures.push(format!(
                        "{attribute}(i_{},i_{}) printed ({mu},{nu}) computed ({:.4},{:.4})",
                        x + 1,
                        y + 1,
                        d.mu,
                        d.nu
                    ));
                }
            }
        }
        let exact = [("IC", 0, 1, 0.992, 0.002), ("IC", 0, 3, 0.848, 0.045), ("SS", 0, 1, 0.95, 0.014)];
        for (attribute, x, y, mu, nu) in exact {
            let d = build_proximity(&table, attribute).unwrap().degree(x, y);
            let r = rankmine::report::round3;
            if r(d.mu) != mu || r(d.nu) != nu {
                failures.push(format!("{attribute}(i_{},i_{}) not exact", x + 1, y + 1));
            }
        }
        if failures.is_empty() {
            Ok(format!("{checked} legible cells within ±{TOLERANCE}"))
        } else {
            Err(format!(
                "{} of {checked} legible cells off: {}",
                failures.len(),
                failures.join("; ")
            ))
        }
    })();
    verdict(1, "proximity fidelity", outcome);
}

#[test]
fn criterion_2_partition_recovery() {
    let table = case_table();
    let outcome = (|| {
        let reproducible = ["IC", "IF", "PP", "RS", "SS"];
        let targets: BTreeMap<String, Partition> = reproducible
            .iter()
            .map(|a| (a.to_string(), printed_partition(a)))
            .collect();
        let search = search_alpha_beta(&table, &targets, 0.005).map_err(|e| e.to_string())?;
        if search.points.is_empty() {
            return Err("empty feasible region".into());
        }
        if !search.contains_point(0.92, 0.05) {
            return Err("(0.92, 0.05) not feasible".into());
        }
        let mut config = case_study_config();
        config.overrides = Default::default();
        for &(alpha, beta) in &search.points {
            let cut = CutParams::new(alpha, beta).unwrap();
            for a in reproducible {
                let rel = build_proximity(&table, a).unwrap();
                if partition_from_cut(&cut_graph(&rel, cut)) != targets[a] {
                    return Err(format!("{a} differs at ({alpha}, {beta})"));
                }
            }
            config.alpha = alpha;
            config.beta = beta;
            let report = run_on_table(&config, table.clone(), RunTo::Partition)
                .map_err(|e| e.to_string())?;
            for a in reproducible {
                if report.partition(a) != Some(&targets[a]) {
                    return Err(format!("pipeline {a} differs at ({alpha}, {beta})"));
                }
            }
        }
        let rs = &targets["RS"];
        if rs.block_count() != 1 {
            return Err("RS is not a single block".into());
        }
        let hull = search.hull.unwrap();
        Ok(format!(
            "{} feasible points, alpha in [{}, {}], beta in [{}, {}]",
            search.points.len(),
            hull.alpha_min,
            hull.alpha_max,
            hull.beta_min,
            hull.beta_max
        ))
    })();
    verdict(2, "partition recovery", outcome);
}

#[test]
fn criterion_3_documented_erratum() {
    let outcome = (|| {
        let mut plain = case_study_config();
        plain.overrides = Default::default();
        let report = run_pipeline(&plain).map_err(|e| e.to_string())?;
        let eca = report.partition("ECA").unwrap();
        if eca.block_count() != 7 {
            return Err(format!("computed ECA has {} blocks", eca.block_count()));
        }
        if eca.same_block(8, 9) {
            return Err("i_9 and i_10 share a block".into());
        }
        let mu = build_proximity(&report.table, "ECA").unwrap().degree(8, 9).mu;
        if (mu - 0.60).abs() > 1e-12 {
            return Err(format!("mu(i_9,i_10) = {mu}"));
        }
        if *eca == printed_partition("ECA") {
            return Err("computed ECA equals the printed partition".into());
        }
        let overridden = full_run();
        if overridden.partition("ECA") != Some(&printed_partition("ECA")) {
            return Err("override did not restore the printed partition".into());
        }
        let source = &overridden.provenance.sources["partition:ECA"];
        if !source.starts_with("override:") {
            return Err(format!("provenance says {source}"));
        }
        Ok("computed 7 blocks, override restores printed 6".into())
    })();
    verdict(3, "documented erratum", outcome);
}

const EXPECTED_LABELS: [(&str, [&str; 5]); 10] = [
    ("i_1", ["Very high", "Very high", "Very high", "Excellent", "Outstanding"]),
    ("i_2", ["Very high", "Very high", "Very high", "Excellent", "Excellent"]),
    ("i_3", ["Very high", "Very high", "High", "Excellent", "Very good"]),
    ("i_4", ["High", "High", "Very high", "Very good", "Very good"]),
    ("i_5", ["High", "High", "High", "Excellent", "Outstanding"]),
    ("i_6", ["Moderate", "High", "Moderate", "Very good", "Good"]),
    ("i_7", ["Moderate", "Moderate", "Low", "Very good", "Good"]),
    ("i_8", ["Moderate", "Low", "Low", "Very good", "Average"]),
    ("i_9", ["Low", "Low", "Low", "Very good", "Poor"]),
    ("i_10", ["Low", "Low", "Low", "Good", "Poor"]),
];

#[test]
fn criterion_4_ordered_table() {
    let outcome = (|| {
        let report = full_run();
        let ordered = report.ordered.as_ref().unwrap();
        let columns: Vec<&str> = ordered.columns.iter().map(|c| c.attribute.as_str()).collect();
        if columns != ["IC", "IF", "PP", "SS", "ECA"] || ordered.dropped != ["RS"] {
            return Err(format!("columns {columns:?}, dropped {:?}", ordered.dropped));
        }
        let mut mismatches = Vec::new();
        for (x, (object, row)) in EXPECTED_LABELS.iter().enumerate() {
            if ordered.objects[x] != *object {
                return Err(format!("row {x} is {}", ordered.objects[x]));
            }
            for (col, expected) in ordered.columns.iter().zip(row) {
                if col.label(x) != *expected {
                    mismatches.push(format!("{object}/{}: {} vs {expected}", col.attribute, col.label(x)));
                }
            }
        }
        if mismatches.is_empty() {
            Ok("50 cells match, RS dropped".into())
        } else {
            Err(mismatches.join("; "))
        }
    })();
    verdict(4, "ordered table", outcome);
}

#[test]
fn criterion_5_ranking() {
    let outcome = (|| {
        let report = full_run();
        let ranks = report.ranks.as_ref().unwrap();
        let totals = ranks.totals();
        if totals != [23, 22, 20, 18, 20, 14, 12, 10, 8, 7] {
            return Err(format!("totals {totals:?}"));
        }
        if ranks.ranks() != [1, 2, 3, 4, 3, 5, 6, 7, 8, 9] {
            return Err(format!("ranks {:?}", ranks.ranks()));
        }
        let clusters: Vec<Vec<String>> = report
            .clusters
            .iter()
            .map(|c| report.table.set_labels(&c.members))
            .collect();
        let expected = [
            vec!["i_1", "i_2", "i_3", "i_5"],
            vec!["i_4", "i_6", "i_7"],
            vec!["i_8", "i_9", "i_10"],
        ];
        if clusters != expected {
            return Err(format!("clusters {clusters:?}"));
        }
        Ok("totals, dense ranks and three clusters match".into())
    })();
    verdict(5, "ranking", outcome);
}

type PrintedRule = (usize, &'static str, &'static str);

const RULES_1: [PrintedRule; 11] = [
    (4, "", "A51"),
    (3, "A21 A51", "A11"),
    (3, "A11 A51", "A21"),
    (2, "A31 A51", "A11 A21"),
    (1, "A22 A51", "A12 A32 A61"),
    (1, "A12 A51", "A22 A32 A61"),
    (1, "A32 A51 A61", "A12 A22"),
    (1, "A11 A21 A51 A61", "A31"),
    (1, "A51 A62", "A11 A21 A31"),
    (1, "A51 A63", "A11 A21 A32"),
    (1, "A11 A21 A32 A51", "A63"),
];

const RULES_2: [PrintedRule; 10] = [
    (3, "", "A52"),
    (2, "A52 A64", "A13"),
    (2, "A13 A52", "A64"),
    (1, "A31 A52", "A12 A22 A63"),
    (1, "A12 A52", "A22 A31 A63"),
    (1, "A52 A63", "A12 A22 A31"),
    (1, "A34 A52", "A13 A23 A64"),
    (1, "A33 A52", "A13 A22 A64"),
    (1, "A23 A52", "A13 A34 A64"),
    (1, "A13 A22 A52 A64", "A33"),
];

const RULES_3: [PrintedRule; 6] = [
    (3, "", "A24 A34"),
    (2, "A24 A34 A66", "A14"),
    (2, "A14 A24 A34", "A66"),
    (1, "A13 A24 A34", "A52 A65"),
    (1, "A24 A34 A65", "A13 A52"),
    (1, "A24 A34 A53", "A14 A66"),
];

fn names(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn printed_rule(ctx: &FormalContext, rule: &PrintedRule) -> Result<Implication, String> {
    let set = |s| ctx.attr_set(&names(s)).map_err(|e| e.to_string());
    Ok(Implication {
        premise: set(rule.1)?,
        conclusion: set(rule.2)?,
        support: rule.0,
    })
}

fn rule_key(ctx: &FormalContext, r: &Implication) -> (usize, BTreeSet<String>, BTreeSet<String>) {
    (
        r.support,
        ctx.attribute_names(&r.premise).into_iter().collect(),
        ctx.attribute_names(&r.conclusion).into_iter().collect(),
    )
}

#[test]
fn criterion_6_implication_bases() {
    let outcome = (|| {
        let report = full_run();
        let c3 = report.analysis(3).unwrap();
        let computed: BTreeSet<_> = c3.rules.iter().map(|r| rule_key(&c3.context, r)).collect();
        let printed: BTreeSet<_> = RULES_3
            .iter()
            .map(|p| printed_rule(&c3.context, p).map(|r| rule_key(&c3.context, &r)))
            .collect::<Result<_, _>>()?;
        if computed != printed {
            return Err(format!("cluster 3 basis {computed:?}"));
        }
        let supports: Vec<usize> = c3.rules.iter().map(|r| r.support).collect();
        if supports != [3, 2, 2, 1, 1, 1] {
            return Err(format!("cluster 3 supports {supports:?}"));
        }
        for (id, rules) in [(1, &RULES_1[..]), (2, &RULES_2[..])] {
            let a = report.analysis(id).unwrap();
            let ctx = &a.context;
            for p in rules {
                let rule = printed_rule(ctx, p)?;
                if !valid(ctx, &rule.premise, &rule.conclusion) {
                    return Err(format!("cluster {id}: printed rule {p:?} invalid"));
                }
                if !rule.conclusion.is_subset(&entails(&a.basis, &rule.premise)) {
                    return Err(format!("cluster {id}: printed rule {p:?} not derivable"));
                }
                if ctx.derive_objects(&rule.premise).len() != p.0 {
                    return Err(format!("cluster {id}: support of {p:?} differs"));
                }
            }
            if let Some(r) = a.basis.iter().find(|r| !valid(ctx, &r.premise, &r.conclusion)) {
                return Err(format!("cluster {id}: computed rule {r:?} invalid"));
            }
        }
        Ok("cluster 3 exact; clusters 1-2 semantically equivalent with matching supports".into())
    })();
    verdict(6, "implication bases", outcome);
}

#[test]
fn criterion_7_frequencies_and_chief_attributes() {
    let outcome = (|| {
        let report = full_run();
        let printed: [(usize, &[(&str, usize)]); 3] = [
            (
                1,
                &[
                    ("A11", 14),
                    ("A12", 5),
                    ("A21", 14),
                    ("A22", 5),
                    // Printed 9; the premises listed beside it sum to 6.
                    ("A31", 6),
                    ("A32", 4),
                    ("A51", 0),
                    ("A61", 4),
                    ("A63", 4),
                ],
            ),
            (
                2,
                &[
                    ("A12", 4),
                    ("A13", 10),
                    ("A22", 8),
                    ("A23", 2),
                    ("A31", 4),
                    ("A33", 4),
                    ("A34", 2),
                    ("A52", 0),
                    ("A63", 4),
                    ("A64", 10),
                ],
            ),
            (
                3,
                &[
                    ("A13", 3),
                    ("A14", 9),
                    ("A24", 0),
                    ("A34", 0),
                    ("A52", 3),
                    ("A65", 3),
                    ("A66", 9),
                ],
            ),
        ];
        let mut mismatches = Vec::new();
        for (id, expected) in printed {
            let a = report.analysis(id).unwrap();
            let ctx = &a.context;
            let listed: Vec<String> =
                a.frequencies.rows.iter().map(|r| ctx.attributes()[r.attribute].clone()).collect();
            let wanted: Vec<&str> = expected.iter().map(|e| e.0).collect();
            if listed != wanted {
                mismatches.push(format!("cluster {id} attributes {listed:?}"));
            }
            for &(name, value) in expected {
                let got = ctx
                    .attribute_index(name)
                    .ok()
                    .and_then(|m| a.frequencies.frequency(m));
                if got != Some(value) {
                    mismatches.push(format!("cluster {id} {name}: computed {got:?}, expected {value}"));
                }
            }
        }
        let chiefs = |id: usize, level: usize| -> Vec<String> {
            let a = report.analysis(id).unwrap();
            a.chiefs
                .get(level)
                .map(|g| g.attributes.iter().map(|&m| a.context.attributes()[m].clone()).collect())
                .unwrap_or_default()
        };
        let groups = [
            (chiefs(1, 0), vec!["A11", "A21"]),
            (chiefs(2, 0), vec!["A13", "A64"]),
            (chiefs(2, 1), vec!["A22"]),
            (chiefs(3, 0), vec!["A14", "A66"]),
        ];
        for (got, want) in groups {
            if got != want {
                mismatches.push(format!("chief group {got:?}, expected {want:?}"));
            }
        }
        if mismatches.is_empty() {
            Ok("all frequencies and chief groups match".into())
        } else {
            Err(mismatches.join("; "))
        }
    })();
    verdict(7, "frequencies and chief attributes", outcome);
}

#[test]
fn criterion_8_property_suites() {
    let outcome = (|| {
        let counts = [AtomicUsize::new(0), AtomicUsize::new(0), AtomicUsize::new(0)];
        // A runner's case budget is spent by one run, so each family gets its own.
        let runner = || {
            TestRunner::new(RunnerConfig {
                cases: 200,
                failure_persistence: None,
                ..RunnerConfig::default()
            })
        };
        fn fail<T: std::fmt::Debug>(name: &str, e: proptest::test_runner::TestError<T>) -> String {
            format!("{name}: {e}")
        }

        runner()
            .run(&(arb_partition(), any::<u64>()), |(p, seed)| {
                counts[0].fetch_add(1, Ordering::Relaxed);
                let n = p.universe_size();
                let all: BTreeSet<usize> = (0..n).collect();
                let x: BTreeSet<usize> = (0..n).filter(|i| seed >> i & 1 == 1).collect();
                let lower = lower_approx(&p, &x);
                let upper = upper_approx(&p, &x);
                prop_assert!(lower.is_subset(&x) && x.is_subset(&upper));
                let complement = all.difference(&x).copied().collect();
                let dual: BTreeSet<usize> =
                    all.difference(&upper_approx(&p, &complement)).copied().collect();
                prop_assert_eq!(lower, dual);
                let y: BTreeSet<usize> = x.iter().copied().chain([0]).collect();
                prop_assert!(upper.is_subset(&upper_approx(&p, &y)));
                prop_assert!(p.is_valid());
                Ok(())
            })
            .map_err(|e| fail("approximations", e))?;

        runner()
            .run(&(arb_table(3), 0u32..=40, 0u32..=40), |(t, a, b)| {
                counts[1].fetch_add(1, Ordering::Relaxed);
                let loose = CutParams::new(a as f64 / 100.0, b as f64 / 100.0).unwrap();
                let strict = CutParams::new(loose.alpha() + 0.3, loose.beta() / 2.0).unwrap();
                for spec in t.attributes() {
                    let rel = build_proximity(&t, &spec.name).unwrap();
                    let coarse = partition_from_cut(&cut_graph(&rel, loose));
                    let fine = partition_from_cut(&cut_graph(&rel, strict));
                    prop_assert!(coarse.is_valid() && fine.is_valid());
                    prop_assert!(fine.refines(&coarse));
                    let exact = partition_from_cut(&cut_graph(&rel, CutParams::new(1.0, 0.0).unwrap()));
                    prop_assert_eq!(exact, indiscernibility(&t, &[spec.name.as_str()]).unwrap());
                }
                Ok(())
            })
            .map_err(|e| fail("cuts", e))?;

        runner()
            .run(&(arb_context(), any::<u64>()), |(ctx, seed)| {
                counts[2].fetch_add(1, Ordering::Relaxed);
                let x: BTreeSet<usize> =
                    (0..ctx.object_count()).filter(|i| seed >> i & 1 == 1).collect();
                let xp = ctx.derive_attributes(&x);
                prop_assert!(x.is_subset(&ctx.derive_objects(&xp)));
                prop_assert_eq!(&xp, &ctx.closure(&xp));

                let concepts: BTreeSet<_> = enumerate_concepts(&ctx)
                    .into_iter()
                    .map(|c| (c.extent, c.intent))
                    .collect();
                prop_assert_eq!(concepts, brute_concepts(&ctx));

                let basis = canonical_basis(&ctx);
                for r in &basis {
                    prop_assert!(valid(&ctx, &r.premise, &r.conclusion));
                }
                for p in subsets(ctx.attribute_count()) {
                    prop_assert!(ctx.closure(&p).is_subset(&entails(&basis, &p)));
                }
                for i in 0..basis.len() {
                    let mut rest = basis.clone();
                    let removed = rest.remove(i);
                    prop_assert!(!removed.conclusion.is_subset(&entails(&rest, &removed.premise)));
                }
                Ok(())
            })
            .map_err(|e| fail("concept analysis", e))?;
        let [a, c, f] = counts.map(|n| n.into_inner());
        if a.min(c).min(f) < 200 {
            return Err(format!("only {a}/{c}/{f} cases ran"));
        }
        Ok(format!(
            "approximations {a} cases, cuts {c} cases, Galois laws + concepts + basis {f} cases"
        ))
    })();
    verdict(8, "property suites", outcome);
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

#[test]
fn criterion_9_determinism() {
    let outcome = (|| {
        let first = tempfile::tempdir().unwrap();
        let second = tempfile::tempdir().unwrap();
        emit_reports(&full_run(), first.path()).map_err(|e| e.to_string())?;
        emit_reports(&full_run(), second.path()).map_err(|e| e.to_string())?;
        let (a, b) = (tree(first.path()), tree(second.path()));
        if a.is_empty() {
            return Err("no files written".into());
        }
        if a != b {
            let differing: Vec<_> = a
                .keys()
                .chain(b.keys())
                .filter(|k| a.get(*k) != b.get(*k))
                .collect();
            return Err(format!("trees differ at {differing:?}"));
        }
        Ok(format!("{} files byte-identical", a.len()))
    })();
    verdict(9, "determinism", outcome);
}
