use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rankmine::approx::parse_partition_records;
use rankmine::error::{Error, Result, Stage};
use rankmine::pipeline::{
    emit_sections, run_until, search_alpha_beta, PipelineConfig, RunTo, Section,
};
use rankmine::table::{load_table, Partition};

#[derive(Parser)]
#[command(name = "rankmine", version, about = "Rank objects by fuzzy proximity cuts and mine implications per rank cluster")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and write the full report.
    Run(Common),
    /// Proximity matrices and their validation only.
    Proximity(Common),
    /// Proximity through cut partitions.
    Partition(Common),
    /// Through ordered table, ranks and rank clusters.
    Rank(Common),
    /// Through per-cluster lattices, bases and chief attributes.
    Fca(Common),
    /// Grid search for cut parameters reproducing target partitions.
    SearchCut {
        #[command(flatten)]
        common: Common,
        /// Partition records (JSON) to reproduce.
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Pipeline config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Data CSV, replacing the config's.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Output directory, replacing the config's.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Inject a stage result, as `partition=FILE` or `ordered=FILE`.
    #[arg(long = "override", value_name = "STAGE=FILE")]
    overrides: Vec<String>,
    /// Continue past proximity validation failures.
    #[arg(long)]
    force: bool,
}

impl Common {
    fn config(&self) -> Result<PipelineConfig> {
        let mut config = PipelineConfig::load(&self.config)?;
        let cwd = |p: &Path| -> PathBuf {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                std::env::current_dir().unwrap_or_default().join(p)
            }
        };
        if let Some(data) = &self.data {
            config.data_path = cwd(data);
        }
        if let Some(a) = self.alpha {
            config.alpha = a;
        }
        if let Some(b) = self.beta {
            config.beta = b;
        }
        if let Some(out) = &self.out {
            config.output_dir = Some(cwd(out));
        }
        for spec in &self.overrides {
            let (stage, file) = spec.split_once('=').ok_or_else(|| Error::Override {
                stage: spec.clone(),
                reason: "expected STAGE=FILE".into(),
            })?;
            config.overrides.set(stage.trim(), cwd(Path::new(file.trim())))?;
        }
        config.force |= self.force;
        Ok(config)
    }
}

fn output_dir(config: &PipelineConfig) -> PathBuf {
    match &config.output_dir {
        Some(dir) => config.resolve(dir),
        None => PathBuf::from("out"),
    }
}

fn stage_run(common: &Common, until: RunTo, sections: &[Section]) -> Result<()> {
    let config = common.config().map_err(|e| e.in_stage(Stage::Config))?;
    let report = run_until(&config, until)?;
    let out = output_dir(&config);
    let entries = emit_sections(&report, &out, sections)?;
    if !report.violations.is_empty() {
        eprintln!(
            "warning: {} proximity axiom violation(s); see validation.json",
            report.violations.len()
        );
    }
    println!("wrote {} files to {}", entries.len() + 1, out.display());
    Ok(())
}

fn search_cut(common: &Common, targets: &Path, step: f64) -> Result<()> {
    let config = common.config().map_err(|e| e.in_stage(Stage::Config))?;
    let load = || -> Result<_> {
        let path = config.resolve(&config.data_path);
        let csv = std::fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        load_table(&csv, &config.attributes)
    };
    let table = load().map_err(|e| e.in_stage(Stage::Load))?;
    let parse = || -> Result<BTreeMap<String, Partition>> {
        let text = std::fs::read_to_string(targets).map_err(|source| Error::Io {
            path: targets.to_path_buf(),
            source,
        })?;
        parse_partition_records(&text)?
            .into_iter()
            .map(|r| Ok((r.attribute.clone(), r.to_partition(&table)?)))
            .collect()
    };
    let targets = parse().map_err(|e| e.in_stage(Stage::Partition))?;
    let search = search_alpha_beta(&table, &targets, step).map_err(|e| e.in_stage(Stage::Partition))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&search).map_err(|e| Error::from(e).in_stage(Stage::Report))?
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => stage_run(c, RunTo::Fca, &Section::ALL),
        Command::Proximity(c) => stage_run(c, RunTo::Proximity, &[Section::Proximity]),
        Command::Partition(c) => stage_run(c, RunTo::Partition, &[Section::Partition]),
        Command::Rank(c) => stage_run(c, RunTo::Rank, &[Section::Rank]),
        Command::Fca(c) => stage_run(c, RunTo::Fca, &[Section::Fca]),
        Command::SearchCut {
            common,
            targets,
            step,
        } => search_cut(common, targets, *step),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
