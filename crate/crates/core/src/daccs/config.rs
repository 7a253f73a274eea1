use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::daccs::formulas::BASE_YEAR;
use crate::daccs::DaccsError;

const DEFAULT_JSON: &str = include_str!("../../data/daccs_config.json");

/// Exogenous yearly trajectory sampled on the model grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimePath {
    Constant { value: f64 },
    /// `start * (1 + rate)^(year - 2025)`
    Growth { start: f64, rate: f64 },
    /// One value per grid year.
    Values { values: Vec<f64> },
}

impl TimePath {
    pub fn sample(&self, years: &[i32]) -> Result<Vec<f64>, DaccsError> {
        Ok(match self {
            Self::Constant { value } => vec![*value; years.len()],
            Self::Growth { start, rate } => years
                .iter()
                .map(|&y| start * (1.0 + rate).powi(y - BASE_YEAR))
                .collect(),
            Self::Values { values } => {
                if values.len() != years.len() {
                    return Err(DaccsError::Config(format!(
                        "path has {} values for {} grid years",
                        values.len(),
                        years.len()
                    )));
                }
                values.clone()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub id: String,
    /// Central regional saturation level in GtCO2/yr, for reference.
    #[serde(default)]
    pub saturation_central_gt: f64,
    /// Share of the global saturation level.
    pub saturation_share: f64,
    pub subsidizes: bool,
    /// USD per year.
    pub gdp: TimePath,
    pub interest_rate: TimePath,
    /// USD per GJ.
    pub electricity_price: TimePath,
    /// USD per GJ.
    pub gas_price: TimePath,
    /// WACC multiplier relative to Europe at regional spread 5.
    pub wacc_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ScenarioId {
    Ndc,
    Lts,
}

impl ScenarioId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ndc => "NDC",
            Self::Lts => "LTS",
        }
    }
}

impl std::str::FromStr for ScenarioId {
    type Err = DaccsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ndc" => Ok(Self::Ndc),
            "lts" => Ok(Self::Lts),
            other => Err(DaccsError::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: ScenarioId,
    /// USD/tCO2, shared by all regions unless overridden.
    pub carbon_price: TimePath,
    #[serde(default)]
    pub regional_carbon_price: Vec<(String, TimePath)>,
}

/// Scenario, region and grid defaults for the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaccsConfig {
    #[serde(default)]
    pub schema_version: u32,
    #[serde(default)]
    pub note: String,
    pub start_year: i32,
    pub end_year: i32,
    pub step_years: i32,
    /// Nameplate capacity (tCO2/yr) defining one learning unit.
    pub nameplate_t: f64,
    /// USD per tonne stored.
    pub storage_cost: f64,
    pub discount_rate: f64,
    /// Yearly decay of the regional WACC premium per unit of convergence rate.
    pub wacc_premium_decay: f64,
    pub regions: Vec<RegionConfig>,
    pub scenarios: Vec<ScenarioConfig>,
}

impl DaccsConfig {
    pub fn default_config() -> Self {
        Self::from_json(DEFAULT_JSON).expect("bundled simulator config is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, DaccsError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| DaccsError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DaccsError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| DaccsError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn years(&self) -> Vec<i32> {
        (self.start_year..=self.end_year)
            .step_by(self.step_years.max(1) as usize)
            .collect()
    }

    pub fn scenario(&self, id: ScenarioId) -> Result<&ScenarioConfig, DaccsError> {
        self.scenarios
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| DaccsError::Config(format!("scenario {} not configured", id.as_str())))
    }

    pub fn validate(&self) -> Result<(), DaccsError> {
        let mut problems = Vec::new();
        if self.start_year != BASE_YEAR {
            problems.push(format!("start_year must be {BASE_YEAR}"));
        }
        if self.step_years != 5 {
            problems.push("step_years must be 5".to_string());
        }
        if self.end_year < 2050 {
            problems.push("end_year must be at least 2050".to_string());
        }
        if !(self.nameplate_t > 0.0) {
            problems.push("nameplate_t must be positive".to_string());
        }
        if !(self.storage_cost >= 0.0) {
            problems.push("storage_cost must be non-negative".to_string());
        }
        if self.regions.is_empty() {
            problems.push("no regions".to_string());
        }
        let share: f64 = self.regions.iter().map(|r| r.saturation_share).sum();
        if (share - 1.0).abs() > 1e-9 {
            problems.push(format!("saturation shares sum to {share}, expected 1"));
        }
        let years = if self.step_years > 0 { self.years() } else { Vec::new() };
        for r in &self.regions {
            for (name, path) in [
                ("gdp", &r.gdp),
                ("interest_rate", &r.interest_rate),
                ("electricity_price", &r.electricity_price),
                ("gas_price", &r.gas_price),
            ] {
                match path.sample(&years) {
                    Ok(v) if v.iter().any(|x| !x.is_finite() || *x < 0.0) => {
                        problems.push(format!("region {}: {name} has negative or non-finite values", r.id))
                    }
                    Err(e) => problems.push(format!("region {}: {name}: {e}", r.id)),
                    _ => {}
                }
            }
            if !(r.wacc_ratio > 0.0) {
                problems.push(format!("region {}: wacc_ratio must be positive", r.id));
            }
        }
        for id in [ScenarioId::Ndc, ScenarioId::Lts] {
            match self.scenario(id) {
                Ok(s) => match s.carbon_price.sample(&years) {
                    Ok(p) if p.iter().any(|x| !(*x >= 0.0)) => {
                        problems.push(format!("scenario {}: negative carbon price", id.as_str()))
                    }
                    Err(e) => problems.push(format!("scenario {}: {e}", id.as_str())),
                    _ => {}
                },
                Err(e) => problems.push(e.to_string()),
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(DaccsError::Config(problems.join("; ")))
        }
    }
}
