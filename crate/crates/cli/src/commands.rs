//! The `run`, `study` and `validate` subcommands.

use crate::config::{StudyConfig, SurrogateConfig, TrueModelConfig};
use crate::report::{RunReport, StudyReport, StudyRow, SurrogateReport};
use anyhow::{bail, Context, Result};
use coupled_uq::basis::total_degree_count;
use coupled_uq::models::{GridMeanModel, PlateStandIn, ResponseModel, ShaftModel};
use coupled_uq::pce::MODEL_UNCERTAINTY;
use coupled_uq::pipeline::{
    mcs_oracle, run_uq, train_gp, training_size_study, DesignChoice, UqProblem,
};
use coupled_uq::surrogate::{GridSurrogate, ProbabilisticSurrogate};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out_dir: Option<PathBuf>,
    pub seed_override: Option<u64>,
}

impl Options {
    fn output_path(&self, p: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }
}

/// Loads, overrides, resolves and checks a config.
pub fn prepare(path: &Path, opts: &Options) -> Result<StudyConfig> {
    let mut cfg = StudyConfig::load(path)?;
    if let Some(seed) = opts.seed_override {
        cfg.override_seeds(seed);
    }
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.resolve_paths(base);
    cfg.check()?;
    Ok(cfg)
}

fn true_model(cfg: &StudyConfig) -> Result<Box<dyn ResponseModel>> {
    Ok(match &cfg.true_model {
        Some(TrueModelConfig::Shaft) => Box::new(ShaftModel),
        Some(TrueModelConfig::PlateStandin) => Box::new(PlateStandIn),
        Some(TrueModelConfig::GridFile { path }) => Box::new(GridMeanModel(
            GridSurrogate::from_path(path)
                .with_context(|| format!("loading {}", path.display()))?,
        )),
        None => bail!("no `true_model` configured"),
    })
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

/// `path` with `suffix` inserted before the extension.
fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

struct BuiltSurrogate {
    surrogate: Arc<dyn ProbabilisticSurrogate>,
    report: SurrogateReport,
    training_csv: Option<String>,
    grid: Option<Arc<GridSurrogate>>,
}

fn build_surrogate(cfg: &StudyConfig) -> Result<BuiltSurrogate> {
    match &cfg.surrogate {
        SurrogateConfig::GpTrain(_) => {
            let space = cfg.input_space()?;
            let model = true_model(cfg)?;
            let plan = cfg.training_plan().expect("gp_train has a plan");
            let (gp, data) = train_gp(model.as_ref(), &space, &plan)?;
            let report = SurrogateReport::gp(gp.describe(), gp.n_train(), gp.hyperparameters());
            Ok(BuiltSurrogate {
                surrogate: Arc::new(gp),
                report,
                training_csv: Some(data.to_csv()),
                grid: None,
            })
        }
        SurrogateConfig::GridFile(g) => {
            let grid = Arc::new(
                GridSurrogate::from_path(&g.path)
                    .with_context(|| format!("loading {}", g.path.display()))?,
            );
            if grid.dim() != cfg.inputs.len() {
                bail!(
                    "surrogate grid has {} axes but {} inputs are configured",
                    grid.dim(),
                    cfg.inputs.len()
                );
            }
            Ok(BuiltSurrogate {
                surrogate: grid.clone(),
                report: SurrogateReport {
                    description: grid.describe(),
                    ..Default::default()
                },
                training_csv: None,
                grid: Some(grid),
            })
        }
    }
}

/// Outcome of `run`, returned for callers that want the numbers.
pub struct RunOutcome {
    pub report: RunReport,
    pub written: Vec<PathBuf>,
}

pub fn run(config: &Path, opts: &Options) -> Result<RunOutcome> {
    let cfg = prepare(config, opts)?;
    let built = build_surrogate(&cfg)?;
    let problem = UqProblem {
        inputs: cfg.input_space()?,
        surrogate: built.surrogate.clone(),
        pce: cfg.pce_settings(),
    };
    let mut result = run_uq(&problem)?;
    if let Some(mcs) = cfg.mcs {
        let oracle = mcs_oracle(&problem, mcs.n_samples, mcs.seed)?;
        result.attach_oracle(&oracle);
    }
    for w in &result.pce.diagnostics().warnings {
        eprintln!("warning: {w}");
    }
    let mut surrogate_report = built.report;
    if let Some(grid) = &built.grid {
        let clamped = grid.clamped_queries();
        if clamped > 0 {
            eprintln!(
                "warning: {clamped} surrogate queries fell outside the grid and were clamped"
            );
        }
        surrogate_report.clamped_queries = Some(clamped);
    }

    let mut written = Vec::new();
    let sobol_path = opts.output_path(&cfg.outputs.sobol_csv);
    write_atomic(&sobol_path, result.sobol.to_csv().as_bytes())?;
    written.push(sobol_path);
    if let (Some(path), Some(csv)) = (&cfg.outputs.training_csv, &built.training_csv) {
        let path = opts.output_path(path);
        write_atomic(&path, csv.as_bytes())?;
        written.push(path);
    }
    let report_path = opts.output_path(&cfg.outputs.report);
    let report = RunReport::new(cfg, &result, surrogate_report);
    write_atomic(&report_path, &to_json(&report))?;
    written.push(report_path);
    Ok(RunOutcome { report, written })
}

pub fn summarize(outcome: &RunOutcome) -> String {
    let r = &outcome.report;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "design      {} ({} points)",
        r.design.description, r.design.n_points
    );
    let _ = writeln!(
        s,
        "fit         {} (order {}, {} terms)",
        r.fit.method, r.fit.order, r.basis_size
    );
    let _ = writeln!(s, "mean        {:.6}", r.mean);
    let _ = writeln!(s, "std         {:.6}", r.std);
    if let Some(o) = &r.oracle {
        let _ = writeln!(
            s,
            "oracle      mean {:.6} ({:+.3}%), std {:.6} ({:+.3}%), {} samples",
            o.mean,
            100.0 * o.mean_rel_error,
            o.std,
            100.0 * o.std_rel_error,
            o.n_samples
        );
    }
    let _ = writeln!(s, "{:<24} {:>12} {:>12}", "variable", "first", "total");
    for row in &r.sobol {
        let _ = writeln!(
            s,
            "{:<24} {:>12.6} {:>12.6}",
            row.variable, row.first_order, row.total_order
        );
    }
    for p in &outcome.written {
        let _ = writeln!(s, "wrote {}", p.display());
    }
    s
}

pub fn study(config: &Path, sizes: &[usize], opts: &Options) -> Result<Vec<PathBuf>> {
    if sizes.is_empty() {
        bail!("`--sizes` needs at least one training size");
    }
    let cfg = prepare(config, opts)?;
    let Some(plan) = cfg.training_plan() else {
        bail!("a training-size study needs `surrogate.kind` = gp_train");
    };
    let model = true_model(&cfg)?;
    let space = cfg.input_space()?;
    let entries = training_size_study(model.as_ref(), &space, sizes, &cfg.pce_settings(), &plan);

    let base = opts.output_path(&cfg.outputs.sobol_csv);
    let mut written = Vec::new();
    let mut combined = String::from("size,variable,first_order,total_order\n");
    let mut rows = Vec::new();
    for entry in &entries {
        match &entry.result {
            Ok(r) => {
                let path = with_suffix(&base, &format!("_n{}", entry.size));
                write_atomic(&path, r.sobol.to_csv().as_bytes())?;
                for (l, (f, t)) in r
                    .sobol
                    .labels
                    .iter()
                    .zip(r.sobol.first_order.iter().zip(&r.sobol.total_order))
                {
                    let _ = writeln!(combined, "{},{l},{f:.16e},{t:.16e}", entry.size);
                }
                rows.push(StudyRow {
                    size: entry.size,
                    mean: Some(r.mean),
                    std: Some(r.std),
                    model_uncertainty_first_order: r
                        .sobol
                        .index_of(MODEL_UNCERTAINTY)
                        .map(|k| r.sobol.first_order[k]),
                    sobol_csv: Some(path.display().to_string()),
                    error: None,
                });
                written.push(path);
            }
            Err(e) => {
                eprintln!("warning: training size {} failed: {e}", entry.size);
                rows.push(StudyRow {
                    size: entry.size,
                    mean: None,
                    std: None,
                    model_uncertainty_first_order: None,
                    sobol_csv: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    if rows.iter().all(|r| r.error.is_some()) {
        bail!("every training size failed");
    }
    let combined_path = with_suffix(&base, "_study");
    write_atomic(&combined_path, combined.as_bytes())?;
    written.push(combined_path);
    let report_path = with_suffix(&opts.output_path(&cfg.outputs.report), "_study");
    let report = StudyReport {
        schema_version: crate::report::SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        seeds: cfg.seeds(),
        config: cfg,
        sizes: rows,
    };
    write_atomic(&report_path, &to_json(&report))?;
    written.push(report_path);
    Ok(written)
}

/// Checks the config without running anything and describes the study.
pub fn validate(config: &Path, opts: &Options) -> Result<String> {
    let cfg = prepare(config, opts)?;
    let settings = cfg.pce_settings();
    let dim = cfg.inputs.len() + 1;
    let basis = total_degree_count(dim, settings.order);
    let design = settings.build_design(dim).context("building the design")?;
    let mut s = String::new();
    let names: Vec<&str> = cfg.inputs.iter().map(|i| i.name.as_str()).collect();
    let _ = writeln!(s, "inputs      {} ({})", names.len(), names.join(", "));
    let _ = writeln!(s, "D           {dim}");
    let _ = writeln!(s, "basis       {basis}");
    let _ = writeln!(
        s,
        "design      {} with {} points",
        settings.describe(),
        design.len()
    );
    if let DesignChoice::Lhs { n, .. } = settings.design {
        if (n as u128) < basis {
            let _ = writeln!(
                s,
                "warning: LHS n = {n} is below the basis size {basis}; least squares will be underdetermined"
            );
        }
    }
    Ok(s)
}
