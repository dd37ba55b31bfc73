//! End-to-end orchestration: load, proximity, validation, cut partitions,
//! ordered table, ranks, rank clusters, and per-cluster concept analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::approx::{cut_graph, parse_partition_records, partition_from_cut, CutParams, PartitionRecord};
use crate::error::{Error, Result, Stage, StageExt};
use crate::fca::{
    basis_text, canonical_basis, chief_attributes, enumerate_concepts, implication_frequencies,
    lattice_cover, lattice_dot, named_rules, supported, AttributeGroup, Concept, FormalContext,
    FrequencyTable, Implication,
};
use crate::ordering::{
    build_ordered_table, cluster_by_rank, ordered_table_from_labels, score_and_rank,
    validate_ranges, LabelLadder, OrderedTable, RankCluster, RankRange, RankTable,
};
use crate::proximity::{build_proximity, validate_proximity, ProximityRelation, Violation};
use crate::report::{ManifestEntry, ReportWriter};
use crate::table::{load_table, AttributeSpec, InformationTable, Partition};

/// Files injected in place of a stage's computed output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    /// Partition records (one or a list); attributes not listed are computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PathBuf>,
    /// `attribute -> object -> label` map replacing the ordered table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordered: Option<PathBuf>,
}

impl Overrides {
    pub fn set(&mut self, stage: &str, path: PathBuf) -> Result<()> {
        match stage {
            "partition" | "partitions" => self.partition = Some(path),
            "ordered" | "ordered_table" => self.ordered = Some(path),
            other => {
                return Err(Error::Override {
                    stage: other.to_string(),
                    reason: "unknown stage; expected `partition` or `ordered`".into(),
                })
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub data_path: PathBuf,
    pub attributes: Vec<AttributeSpec>,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ladders: BTreeMap<String, LabelLadder>,
    /// Cluster boundaries; one range over every rank when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_ranges: Option<Vec<RankRange>>,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Proceed past proximity validation failures.
    #[serde(default)]
    pub force: bool,
    /// Relative paths above resolve against this directory.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn from_json(json: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut config: PipelineConfig = serde_json::from_str(json)?;
        config.base_dir = base_dir.into();
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        PipelineConfig::from_json(&text, base).stage(Stage::Config)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn cut(&self) -> Result<CutParams> {
        CutParams::new(self.alpha, self.beta)
    }

    pub fn validate(&self) -> Result<()> {
        self.cut()?;
        for spec in &self.attributes {
            spec.validate()?;
        }
        if let Some(ranges) = &self.rank_ranges {
            validate_ranges(ranges)?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// How far to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RunTo {
    Proximity,
    Partition,
    Rank,
    Fca,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAnalysis {
    pub cluster: RankCluster,
    pub context: FormalContext,
    pub concepts: Vec<Concept>,
    pub cover: Vec<(usize, usize)>,
    /// Full stem base, including rules no object supports.
    pub basis: Vec<Implication>,
    /// The supported part of the basis, used for frequencies.
    pub rules: Vec<Implication>,
    pub frequencies: FrequencyTable,
    pub chiefs: Vec<AttributeGroup>,
}

/// Where each stage's result came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub config: serde_json::Value,
    /// Stage or `partition:<attribute>` → `computed` or `override:<path>`.
    pub sources: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub table: InformationTable,
    pub cut: CutParams,
    pub proximities: Vec<ProximityRelation>,
    pub violations: Vec<Violation>,
    /// Per numeric attribute, in table order.
    pub partitions: Vec<(String, Partition)>,
    pub ordered: Option<OrderedTable>,
    pub ranks: Option<RankTable>,
    pub clusters: Vec<RankCluster>,
    pub analyses: Vec<ClusterAnalysis>,
    pub provenance: Provenance,
}

impl PipelineReport {
    pub fn partition(&self, attribute: &str) -> Option<&Partition> {
        self.partitions
            .iter()
            .find(|(a, _)| a == attribute)
            .map(|(_, p)| p)
    }

    pub fn analysis(&self, cluster_id: usize) -> Option<&ClusterAnalysis> {
        self.analyses.iter().find(|a| a.cluster.cluster_id == cluster_id)
    }
}

/// Runs every stage.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport> {
    run_until(config, RunTo::Fca)
}

pub fn run_until(config: &PipelineConfig, until: RunTo) -> Result<PipelineReport> {
    config.validate().stage(Stage::Config)?;
    let data_path = config.resolve(&config.data_path);
    let csv = read(&data_path).stage(Stage::Load)?;
    let table = load_table(&csv, &config.attributes).stage(Stage::Load)?;
    run_on_table(config, table, until)
}

/// Runs the stages on an already loaded table. Override files named in the
/// config are still read from disk.
pub fn run_on_table(
    config: &PipelineConfig,
    table: InformationTable,
    until: RunTo,
) -> Result<PipelineReport> {
    let cut = config.cut().stage(Stage::Config)?;
    let mut sources = BTreeMap::new();

    let proximities = table
        .attributes()
        .iter()
        .filter(|a| a.is_numeric())
        .map(|a| build_proximity(&table, &a.name))
        .collect::<Result<Vec<_>>>()
        .stage(Stage::Proximity)?;
    let violations: Vec<Violation> = proximities.iter().flat_map(validate_proximity).collect();

    let mut report = PipelineReport {
        table,
        cut,
        proximities,
        violations,
        partitions: Vec::new(),
        ordered: None,
        ranks: None,
        clusters: Vec::new(),
        analyses: Vec::new(),
        provenance: Provenance {
            config: config_echo(config),
            sources: BTreeMap::new(),
        },
    };
    sources.insert("proximity".to_string(), "computed".to_string());
    if until == RunTo::Proximity {
        report.provenance.sources = sources;
        return Ok(report);
    }

    if !report.violations.is_empty() && !config.force {
        return Err(Error::ValidationFailed(report.violations.len()).in_stage(Stage::Validate));
    }

    let mut injected: BTreeMap<String, Partition> = BTreeMap::new();
    if let Some(path) = &config.overrides.partition {
        let text = read(&config.resolve(path)).stage(Stage::Partition)?;
        for record in parse_partition_records(&text).stage(Stage::Partition)? {
            let spec = report.table.attribute(&record.attribute).stage(Stage::Partition)?;
            if !spec.is_numeric() {
                return Err(Error::Override {
                    stage: "partition".into(),
                    reason: format!("`{}` is not a numeric attribute", record.attribute),
                }
                .in_stage(Stage::Partition));
            }
            let partition = record.to_partition(&report.table).stage(Stage::Partition)?;
            injected.insert(record.attribute.clone(), partition);
        }
    }
    for rel in &report.proximities {
        let name = rel.attribute().to_string();
        let (partition, source) = match injected.remove(&name) {
            Some(p) => (
                p,
                format!("override:{}", config.overrides.partition.as_ref().unwrap().display()),
            ),
            None => (partition_from_cut(&cut_graph(rel, cut)), "computed".to_string()),
        };
        sources.insert(format!("partition:{name}"), source);
        report.partitions.push((name, partition));
    }
    if until == RunTo::Partition {
        report.provenance.sources = sources;
        return Ok(report);
    }

    let ordered = match &config.overrides.ordered {
        Some(path) => {
            let text = read(&config.resolve(path)).stage(Stage::Ordered)?;
            let labels: BTreeMap<String, BTreeMap<String, String>> =
                serde_json::from_str(&text).map_err(Error::from).stage(Stage::Ordered)?;
            sources.insert("ordered".into(), format!("override:{}", path.display()));
            ordered_table_from_labels(&report.table, &labels, &config.ladders)
                .stage(Stage::Ordered)?
        }
        None => {
            sources.insert("ordered".into(), "computed".into());
            let partitions: BTreeMap<String, Partition> =
                report.partitions.iter().cloned().collect();
            build_ordered_table(&report.table, &partitions, &config.ladders)
                .stage(Stage::Ordered)?
        }
    };
    let ranks = score_and_rank(&ordered);
    let ranges = config
        .rank_ranges
        .clone()
        .unwrap_or_else(|| vec![RankRange::new(1, ranks.max_rank().max(1))]);
    let clusters = cluster_by_rank(&ranks, &ranges).stage(Stage::Cluster)?;
    report.ordered = Some(ordered);
    report.ranks = Some(ranks);
    report.clusters = clusters;
    if until == RunTo::Rank {
        report.provenance.sources = sources;
        return Ok(report);
    }

    let ordered = report.ordered.as_ref().unwrap();
    report.analyses = report
        .clusters
        .iter()
        .map(|cluster| analyze_cluster(ordered, cluster))
        .collect::<Result<Vec<_>>>()
        .stage(Stage::Fca)?;
    report.provenance.sources = sources;
    Ok(report)
}

pub fn analyze_cluster(ordered: &OrderedTable, cluster: &RankCluster) -> Result<ClusterAnalysis> {
    let context = FormalContext::from_ordered(ordered, &cluster.members)?;
    let concepts = enumerate_concepts(&context);
    let cover = lattice_cover(&concepts);
    let basis = canonical_basis(&context);
    let rules = supported(&basis);
    let frequencies = implication_frequencies(&rules);
    let chiefs = chief_attributes(&frequencies);
    Ok(ClusterAnalysis {
        cluster: cluster.clone(),
        context,
        concepts,
        cover,
        basis,
        rules,
        frequencies,
        chiefs,
    })
}

/// Config as run, minus where the output went.
fn config_echo(config: &PipelineConfig) -> serde_json::Value {
    let mut echo = config.clone();
    echo.output_dir = None;
    serde_json::to_value(&echo).expect("config serializes")
}

/// Which report files to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Section {
    Proximity,
    Partition,
    Rank,
    Fca,
}

impl Section {
    pub const ALL: [Section; 4] = [
        Section::Proximity,
        Section::Partition,
        Section::Rank,
        Section::Fca,
    ];
}

#[derive(Serialize)]
struct LabeledViolation<'a> {
    attribute: &'a str,
    x: &'a str,
    y: &'a str,
    axiom: String,
    mu: f64,
    nu: f64,
}

#[derive(Serialize)]
struct ClusterRecord {
    cluster_id: usize,
    rank_range: RankRange,
    members: Vec<String>,
}

#[derive(Serialize)]
struct ChiefRecord {
    cluster_id: usize,
    groups: Vec<GroupRecord>,
}

#[derive(Serialize)]
struct GroupRecord {
    frequency: usize,
    attributes: Vec<String>,
}

/// Writes every report file plus `manifest.json`.
pub fn emit_reports(report: &PipelineReport, output_dir: &Path) -> Result<Vec<ManifestEntry>> {
    emit_sections(report, output_dir, &Section::ALL)
}

pub fn emit_sections(
    report: &PipelineReport,
    output_dir: &Path,
    sections: &[Section],
) -> Result<Vec<ManifestEntry>> {
    let sections: BTreeSet<Section> = sections.iter().copied().collect();
    let emit = || -> Result<Vec<ManifestEntry>> {
        let mut w = ReportWriter::new(output_dir)?;
        let table = &report.table;
        let labels: Vec<String> = table.labels().map(String::from).collect();

        if sections.contains(&Section::Proximity) {
            for rel in &report.proximities {
                w.write(&format!("proximity/{}.csv", rel.attribute()), rel.to_csv(&labels)?)?;
            }
            let violations: Vec<LabeledViolation> = report
                .violations
                .iter()
                .map(|v| LabeledViolation {
                    attribute: &v.attribute,
                    x: table.label(v.x),
                    y: table.label(v.y),
                    axiom: v.axiom.to_string(),
                    mu: v.degree.mu,
                    nu: v.degree.nu,
                })
                .collect();
            w.write_json("validation.json", &violations)?;
        }
        if sections.contains(&Section::Partition) && !report.partitions.is_empty() {
            let records: Vec<PartitionRecord> = report
                .partitions
                .iter()
                .map(|(name, p)| {
                    let computed = report
                        .provenance
                        .sources
                        .get(&format!("partition:{name}"))
                        .is_none_or(|s| s == "computed");
                    let params = computed.then_some(report.cut);
                    PartitionRecord::from_partition(table, name, params, p)
                })
                .collect();
            w.write_json("partitions.json", &records)?;
        }
        if sections.contains(&Section::Rank) {
            if let (Some(ordered), Some(ranks)) = (&report.ordered, &report.ranks) {
                w.write("ordered_table.csv", ordered.to_csv()?)?;
                w.write("rank_table.csv", ranks.to_csv()?)?;
                let clusters: Vec<ClusterRecord> = report
                    .clusters
                    .iter()
                    .map(|c| ClusterRecord {
                        cluster_id: c.cluster_id,
                        rank_range: c.rank_range,
                        members: table.set_labels(&c.members),
                    })
                    .collect();
                w.write_json("clusters.json", &clusters)?;
            }
        }
        if sections.contains(&Section::Fca) && !report.analyses.is_empty() {
            let mut chiefs = Vec::new();
            for a in &report.analyses {
                let dir = format!("cluster_{}", a.cluster.cluster_id);
                let ctx = &a.context;
                w.write(&format!("{dir}/context.csv"), ctx.to_csv()?)?;
                w.write(
                    &format!("{dir}/lattice.dot"),
                    lattice_dot(ctx, &a.concepts, &a.cover),
                )?;
                w.write(&format!("{dir}/basis.txt"), basis_text(ctx, &a.rules))?;
                w.write_json(&format!("{dir}/basis.json"), &named_rules(ctx, &a.rules))?;
                w.write(&format!("{dir}/frequencies.csv"), a.frequencies.to_csv(ctx)?)?;
                chiefs.push(ChiefRecord {
                    cluster_id: a.cluster.cluster_id,
                    groups: a
                        .chiefs
                        .iter()
                        .map(|g| GroupRecord {
                            frequency: g.frequency,
                            attributes: g
                                .attributes
                                .iter()
                                .map(|&m| ctx.attributes()[m].clone())
                                .collect(),
                        })
                        .collect(),
                });
            }
            w.write_json("chief_attributes.json", &chiefs)?;
        }
        w.write_json("provenance.json", &report.provenance)?;
        w.finish()
    };
    emit().stage(Stage::Report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hull {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Hull {
    fn of(points: &[(f64, f64)]) -> Option<Hull> {
        let (&(a0, b0), rest) = points.split_first()?;
        Some(rest.iter().fold(
            Hull {
                alpha_min: a0,
                alpha_max: a0,
                beta_min: b0,
                beta_max: b0,
            },
            |h, &(a, b)| Hull {
                alpha_min: h.alpha_min.min(a),
                alpha_max: h.alpha_max.max(a),
                beta_min: h.beta_min.min(b),
                beta_max: h.beta_max.max(b),
            },
        ))
    }

    pub fn contains(&self, alpha: f64, beta: f64) -> bool {
        (self.alpha_min..=self.alpha_max).contains(&alpha)
            && (self.beta_min..=self.beta_max).contains(&beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeRegion {
    pub points: usize,
    pub hull: Option<Hull>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutSearch {
    pub step: f64,
    /// Grid points at which every target is reproduced.
    pub points: Vec<(f64, f64)>,
    pub hull: Option<Hull>,
    /// Points at which each target alone is reproduced.
    pub per_attribute: BTreeMap<String, AttributeRegion>,
}

impl CutSearch {
    pub fn contains_point(&self, alpha: f64, beta: f64) -> bool {
        self.points
            .iter()
            .any(|&(a, b)| (a - alpha).abs() < 1e-9 && (b - beta).abs() < 1e-9)
    }
}

/// Scans the grid `{(i/n, j/n) : i + j <= n}`, `n = round(1/step)`, for cut
/// parameters whose partitions equal every target.
pub fn search_alpha_beta(
    table: &InformationTable,
    targets: &BTreeMap<String, Partition>,
    grid_step: f64,
) -> Result<CutSearch> {
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidCut {
            alpha: grid_step,
            beta: grid_step,
        });
    }
    let n = (1.0 / grid_step).round().max(1.0) as usize;
    let relations = targets
        .keys()
        .map(|a| build_proximity(table, a))
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::new();
    let mut per_attribute: BTreeMap<String, Vec<(f64, f64)>> =
        targets.keys().map(|a| (a.clone(), Vec::new())).collect();
    for i in 0..=n {
        for j in 0..=(n - i) {
            let (alpha, beta) = (i as f64 / n as f64, j as f64 / n as f64);
            let cut = CutParams::new(alpha, beta)?;
            let mut all = true;
            for (rel, (name, target)) in relations.iter().zip(targets) {
                if partition_from_cut(&cut_graph(rel, cut)) == *target {
                    per_attribute.get_mut(name).unwrap().push((alpha, beta));
                } else {
                    all = false;
                }
            }
            if all {
                points.push((alpha, beta));
            }
        }
    }
    Ok(CutSearch {
        step: 1.0 / n as f64,
        hull: Hull::of(&points),
        points,
        per_attribute: per_attribute
            .into_iter()
            .map(|(name, pts)| {
                (
                    name,
                    AttributeRegion {
                        points: pts.len(),
                        hull: Hull::of(&pts),
                    },
                )
            })
            .collect(),
    })
}
