use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dacgsa_core::daccs::{DaccsConfig, ScenarioId, TRAJECTORY_VARIABLES};
use dacgsa_core::dist::InputSpace;
use dacgsa_core::gsa::Solver;

use crate::PipelineError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Shape, seeds and analysis settings of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// JSON input space; the bundled one when absent.
    pub input_space: Option<PathBuf>,
    /// JSON simulator config; the bundled one when absent.
    pub daccs_config: Option<PathBuf>,
    pub scenario: ScenarioId,
    pub n_runs: usize,
    pub n_clusters: usize,
    /// Independent LHS designs stacked into the sample.
    pub lhs_designs: usize,
    pub seed: u64,
    pub solver: Solver,
    /// Conditioning cells per input; `clamp(n / 100, 2, 30)` when absent.
    pub partitions: Option<usize>,
    pub dummy_replicates: usize,
    pub bootstrap_replicates: usize,
    pub confidence_level: f64,
    pub plot_bins: usize,
    pub trajectory_variables: Vec<String>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            input_space: None,
            daccs_config: None,
            scenario: ScenarioId::Ndc,
            n_runs: 600,
            n_clusters: 20,
            lhs_designs: 1,
            seed: 1,
            solver: Solver::Exact,
            partitions: None,
            dummy_replicates: 10,
            bootstrap_replicates: 200,
            confidence_level: 0.95,
            plot_bins: 50,
            trajectory_variables: vec!["capacity".into(), "subsidy_outlay".into()],
            out_dir: PathBuf::from("runs"),
        }
    }
}

/// Resolved input space and simulator config.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub space: InputSpace,
    pub daccs: DaccsConfig,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let mut cfg: Self =
            serde_json::from_str(&text).map_err(|e| PipelineError::Config(vec![format!("{}: {e}", path.display())]))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for p in [&mut cfg.input_space, &mut cfg.daccs_config].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn partitions(&self) -> usize {
        self.partitions.unwrap_or((self.n_runs / 100).clamp(2, 30))
    }

    /// Checks the config and loads its referenced files, reporting every
    /// problem at once.
    pub fn resolve(&self) -> Result<Inputs, PipelineError> {
        let mut problems = Vec::new();
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            problems.push(format!("unsupported schema_version {}", self.schema_version));
        }
        if self.n_runs == 0 {
            problems.push("n_runs must be positive".into());
        }
        if self.n_clusters == 0 || self.n_runs % self.n_clusters.max(1) != 0 {
            problems.push(format!("n_runs {} is not divisible by n_clusters {}", self.n_runs, self.n_clusters));
        }
        if self.lhs_designs == 0 || self.n_runs % self.lhs_designs.max(1) != 0 {
            problems.push(format!("n_runs {} is not divisible by lhs_designs {}", self.n_runs, self.lhs_designs));
        }
        if self.partitions() < 2 {
            problems.push("partitions must be at least 2".into());
        }
        if self.dummy_replicates == 0 {
            problems.push("dummy_replicates must be positive".into());
        }
        if self.bootstrap_replicates != 0 && self.bootstrap_replicates < 100 {
            problems.push("bootstrap_replicates must be 0 or at least 100".into());
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            problems.push("confidence_level must lie in (0, 1)".into());
        }
        if self.plot_bins == 0 {
            problems.push("plot_bins must be positive".into());
        }
        for v in &self.trajectory_variables {
            if !TRAJECTORY_VARIABLES.contains(&v.as_str()) {
                problems.push(format!("unknown trajectory variable `{v}`"));
            }
        }
        let space = match &self.input_space {
            Some(p) => InputSpace::load(p).map_err(|e| format!("input space {}: {e}", p.display())),
            None => Ok(InputSpace::default_space()),
        };
        let daccs = match &self.daccs_config {
            Some(p) => DaccsConfig::load(p).map_err(|e| format!("simulator config: {e}")),
            None => Ok(DaccsConfig::default_config()),
        };
        let (space, daccs) = match (space, daccs) {
            (Ok(s), Ok(d)) => (Some(s), Some(d)),
            (s, d) => {
                problems.extend(s.err());
                problems.extend(d.err());
                (None, None)
            }
        };
        if let (Some(space), Some(daccs)) = (&space, &daccs) {
            let names = space.names();
            for n in dacgsa_core::daccs::required_inputs() {
                if !names.contains(&n) {
                    problems.push(format!("input space lacks `{n}`"));
                }
            }
            if let Err(e) = daccs.scenario(self.scenario) {
                problems.push(e.to_string());
            }
        }
        if !problems.is_empty() {
            return Err(PipelineError::Config(problems));
        }
        Ok(Inputs {
            space: space.unwrap(),
            daccs: daccs.unwrap(),
        })
    }

    /// Hash of everything that determines run results.
    pub fn fingerprint(&self, inputs: &Inputs) -> String {
        #[derive(Serialize)]
        struct Determinants<'a> {
            scenario: ScenarioId,
            n_runs: usize,
            n_clusters: usize,
            lhs_designs: usize,
            seed: u64,
            trajectory_variables: &'a [String],
            space: &'a InputSpace,
            daccs: &'a DaccsConfig,
        }
        let d = Determinants {
            scenario: self.scenario,
            n_runs: self.n_runs,
            n_clusters: self.n_clusters,
            lhs_designs: self.lhs_designs,
            seed: self.seed,
            trajectory_variables: &self.trajectory_variables,
            space: &inputs.space,
            daccs: &inputs.daccs,
        };
        let bytes = serde_json::to_vec(&d).expect("determinants serialize");
        hex::encode(Sha256::digest(bytes))
    }
}
