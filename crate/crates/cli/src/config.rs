//! JSON study configuration.

use anyhow::{bail, Context, Result};
use coupled_uq::input::{DistributionSpec, Family, InputSpace};
use coupled_uq::pipeline::{DesignChoice, PceSettings, TrainingPlan};
use coupled_uq::surrogate::GpConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub inputs: Vec<InputConfig>,
    pub surrogate: SurrogateConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_model: Option<TrueModelConfig>,
    pub pce: PceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcs: Option<McsConfig>,
    pub outputs: OutputsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub name: String,
    pub family: FamilyName,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Normal,
    Lognormal,
    Uniform,
    GumbelMax,
}

impl From<FamilyName> for Family {
    fn from(f: FamilyName) -> Self {
        match f {
            FamilyName::Normal => Family::Normal,
            FamilyName::Lognormal => Family::Lognormal,
            FamilyName::Uniform => Family::Uniform,
            FamilyName::GumbelMax => Family::GumbelMax,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SurrogateConfig {
    GpTrain(GpTrainParams),
    GridFile(GridFileParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpTrainParams {
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    /// Seed of the training Latin hypercube.
    #[serde(default)]
    pub seed: u64,
    /// Seed of the optimizer restarts.
    #[serde(default)]
    pub restart_seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_box_sigmas")]
    pub box_sigmas: f64,
    #[serde(default = "default_jitter")]
    pub jitter: f64,
}

fn default_n_train() -> usize {
    100
}

fn default_restarts() -> usize {
    GpConfig::default().restarts
}

fn default_box_sigmas() -> f64 {
    4.0
}

fn default_jitter() -> f64 {
    GpConfig::default().jitter
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFileParams {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrueModelConfig {
    Shaft,
    PlateStandin,
    GridFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PceConfig {
    pub order: usize,
    pub design: DesignConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum DesignConfig {
    Lhs {
        n: usize,
        #[serde(default)]
        seed: u64,
    },
    Tensor {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points_per_axis: Option<usize>,
    },
    Smolyak {
        #[serde(default = "default_level")]
        level: usize,
    },
}

fn default_level() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsConfig {
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    pub report: PathBuf,
    pub sobol_csv: PathBuf,
    /// Optional export of the GP training set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_csv: Option<PathBuf>,
}

/// Every seed a run consumes, after any override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Seeds {
    pub design: Option<u64>,
    pub mcs: Option<u64>,
    pub training: Option<u64>,
    pub restarts: Option<u64>,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("invalid config at `{path}`: {}", e.into_inner())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Replaces every seed with `base + k`, k fixed per stage (design 0,
    /// oracle 1, training design 2, optimizer restarts 3).
    pub fn override_seeds(&mut self, base: u64) {
        if let DesignConfig::Lhs { seed, .. } = &mut self.pce.design {
            *seed = base;
        }
        if let Some(mcs) = &mut self.mcs {
            mcs.seed = base.wrapping_add(1);
        }
        if let SurrogateConfig::GpTrain(p) = &mut self.surrogate {
            p.seed = base.wrapping_add(2);
            p.restart_seed = base.wrapping_add(3);
        }
    }

    pub fn seeds(&self) -> Seeds {
        let (training, restarts) = match &self.surrogate {
            SurrogateConfig::GpTrain(p) => (Some(p.seed), Some(p.restart_seed)),
            SurrogateConfig::GridFile(_) => (None, None),
        };
        Seeds {
            design: match self.pce.design {
                DesignConfig::Lhs { seed, .. } => Some(seed),
                _ => None,
            },
            mcs: self.mcs.map(|m| m.seed),
            training,
            restarts,
        }
    }

    /// Resolves relative input file paths against `base` (the config's directory).
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let SurrogateConfig::GridFile(g) = &mut self.surrogate {
            fix(&mut g.path);
        }
        if let Some(TrueModelConfig::GridFile { path }) = &mut self.true_model {
            fix(path);
        }
    }

    pub fn input_space(&self) -> Result<InputSpace> {
        if self.inputs.is_empty() {
            bail!("config has an empty `inputs` list");
        }
        let marginals = self
            .inputs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                DistributionSpec::new(c.name.clone(), c.family.into(), c.mean, c.std)
                    .with_context(|| format!("invalid distribution at `inputs[{i}]`"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(InputSpace::new(marginals)?)
    }

    pub fn pce_settings(&self) -> PceSettings {
        let design = match self.pce.design {
            DesignConfig::Lhs { n, seed } => DesignChoice::Lhs { n, seed },
            DesignConfig::Tensor { points_per_axis } => DesignChoice::Tensor { points_per_axis },
            DesignConfig::Smolyak { level } => DesignChoice::Smolyak { level },
        };
        PceSettings {
            order: self.pce.order,
            design,
        }
    }

    pub fn training_plan(&self) -> Option<TrainingPlan> {
        match &self.surrogate {
            SurrogateConfig::GpTrain(p) => Some(TrainingPlan {
                n_train: p.n_train,
                box_sigmas: p.box_sigmas,
                seed: p.seed,
                gp: GpConfig {
                    jitter: p.jitter,
                    restarts: p.restarts,
                    seed: p.restart_seed,
                    ..GpConfig::default()
                },
            }),
            SurrogateConfig::GridFile(_) => None,
        }
    }

    /// Checks that referenced files exist and the pieces fit together.
    pub fn check(&self) -> Result<()> {
        let space = self.input_space()?;
        if let SurrogateConfig::GpTrain(_) = self.surrogate {
            if self.true_model.is_none() {
                bail!("`surrogate.kind` is gp_train but no `true_model` is given to train on");
            }
        }
        let mut files = Vec::new();
        if let SurrogateConfig::GridFile(g) = &self.surrogate {
            files.push(("surrogate.params.path", &g.path));
        }
        if let Some(TrueModelConfig::GridFile { path }) = &self.true_model {
            files.push(("true_model.path", path));
        }
        for (key, path) in files {
            if !path.is_file() {
                bail!("`{key}`: file {} does not exist", path.display());
            }
        }
        let model_dim = match self.true_model {
            Some(TrueModelConfig::Shaft) | Some(TrueModelConfig::PlateStandin) => Some(5),
            _ => None,
        };
        if let Some(d) = model_dim {
            if d != space.dim() {
                bail!(
                    "`true_model` takes {d} inputs but {} are configured",
                    space.dim()
                );
            }
        }
        if let Some(m) = self.mcs {
            if m.n_samples < 2 {
                bail!("`mcs.n_samples` must be at least 2");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLES: [&str; 4] = [
        "shaft_lhs",
        "shaft_tensor",
        "shaft_smolyak",
        "plate_standin",
    ];

    fn example(name: &str) -> StudyConfig {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("examples/{name}.json"));
        StudyConfig::load(&path).unwrap()
    }

    #[test]
    fn bundled_configs_round_trip() {
        for name in EXAMPLES {
            let cfg = example(name);
            let again = StudyConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(cfg, again, "{name}");
            assert_eq!(cfg.to_json(), again.to_json());
            cfg.check().unwrap();
        }
    }

    #[test]
    fn defaults_fill_in_optional_fields() {
        let cfg = StudyConfig::from_json(
            r#"{"inputs":[{"name":"a","family":"normal","mean":1,"std":0.1}],
                "surrogate":{"kind":"gp_train","params":{}},
                "true_model":{"kind":"shaft"},
                "pce":{"order":2,"design":{"method":"smolyak"}},
                "outputs":{"report":"r.json","sobol_csv":"s.csv"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.pce.design, DesignConfig::Smolyak { level: 1 });
        let plan = cfg.training_plan().unwrap();
        assert_eq!(plan.n_train, 100);
        assert_eq!(plan.gp.restarts, 8);
        assert_eq!(plan.gp.jitter, 1e-10);
        // the shaft model takes five inputs
        assert!(cfg.check().is_err());
    }

    #[test]
    fn errors_name_the_offending_key() {
        let mut v: serde_json::Value =
            serde_json::from_str(&example("shaft_lhs").to_json()).unwrap();
        v["inputs"][1]["family"] = "beta".into();
        let err = StudyConfig::from_json(&v.to_string())
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("inputs[1].family") && err.contains("beta"),
            "{err}"
        );

        let mut v: serde_json::Value =
            serde_json::from_str(&example("shaft_lhs").to_json()).unwrap();
        v["mcs"]["samples"] = 10.into();
        let err = StudyConfig::from_json(&v.to_string())
            .unwrap_err()
            .to_string();
        assert!(err.contains("mcs.samples"), "{err}");

        let mut v: serde_json::Value =
            serde_json::from_str(&example("shaft_lhs").to_json()).unwrap();
        v["pce"]["order"] = (-1).into();
        let err = StudyConfig::from_json(&v.to_string())
            .unwrap_err()
            .to_string();
        assert!(err.contains("pce.order"), "{err}");
    }

    #[test]
    fn seed_override_touches_every_seed() {
        let mut cfg = example("shaft_lhs");
        cfg.override_seeds(100);
        assert_eq!(
            cfg.seeds(),
            Seeds {
                design: Some(100),
                mcs: Some(101),
                training: Some(102),
                restarts: Some(103),
            }
        );
    }

    #[test]
    fn empty_inputs_and_missing_files_are_rejected() {
        let mut cfg = example("shaft_tensor");
        cfg.inputs.clear();
        assert!(cfg.check().unwrap_err().to_string().contains("inputs"));

        let mut cfg = example("shaft_tensor");
        cfg.surrogate = SurrogateConfig::GridFile(GridFileParams {
            path: "/nonexistent/grid.csv".into(),
        });
        assert!(cfg
            .check()
            .unwrap_err()
            .to_string()
            .contains("surrogate.params.path"));

        let mut cfg = example("shaft_tensor");
        cfg.true_model = None;
        assert!(cfg.check().is_err());
    }
}
