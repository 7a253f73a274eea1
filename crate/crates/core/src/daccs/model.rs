use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::daccs::config::{DaccsConfig, ScenarioId};
use crate::daccs::DaccsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TechId {
    LS,
    SS,
    CaO,
}

impl TechId {
    pub const ALL: [TechId; 3] = [TechId::LS, TechId::SS, TechId::CaO];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::LS => "LS",
            Self::SS => "SS",
            Self::CaO => "CaO",
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Self::LS => "ls",
            Self::SS => "ss",
            Self::CaO => "cao",
        }
    }

    /// Whether process heat is bought as gas (otherwise electrified).
    pub fn gas_heat(self) -> bool {
        matches!(self, Self::LS)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Technology {
    pub id: TechId,
    /// USD per tCO2/yr of capacity.
    pub capex0: f64,
    /// USD per tCO2 removed.
    pub opex0: f64,
    pub learn_capex: f64,
    pub learn_opex: f64,
    pub learn_fin: f64,
    /// GJ/tCO2 of heat.
    pub thermal: f64,
    /// GJ/tCO2 of electricity.
    pub electric: f64,
    pub capacity_factor: f64,
    pub lifetime: u32,
    pub wacc0: f64,
    pub cost_floor: f64,
}

impl Technology {
    pub fn validate(&self) -> Result<(), DaccsError> {
        let ok = self.capacity_factor > 0.0
            && self.capacity_factor <= 1.0
            && self.lifetime >= 1
            && self.capex0 > 0.0
            && self.opex0 > 0.0
            && self.thermal >= 0.0
            && self.electric >= 0.0
            && self.cost_floor >= 0.0
            && self.wacc0 > -1.0;
        if ok {
            Ok(())
        } else {
            Err(DaccsError::Parameter(format!("technology {} out of range: {self:?}", self.id.as_str())))
        }
    }

    /// Straight-line depreciation over a five-year step.
    pub fn depreciation(&self, step_years: i32) -> f64 {
        (step_years as f64 / self.lifetime as f64).min(1.0)
    }
}

/// Region data expanded on the model grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: String,
    pub saturation_share: f64,
    pub subsidizes: bool,
    pub gdp: Vec<f64>,
    pub interest_rate: Vec<f64>,
    pub electricity_price: Vec<f64>,
    pub gas_price: Vec<f64>,
    pub wacc_ratio: f64,
    pub carbon_price: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsidySchedule {
    /// USD/tCO2.
    pub peak: f64,
    pub timing: i32,
    /// Per year.
    pub phase_out: f64,
    /// Share of regional GDP available for subsidies.
    pub max_frac: f64,
}

impl SubsidySchedule {
    pub fn none() -> Self {
        Self {
            peak: 0.0,
            timing: 2025,
            phase_out: 1.0,
            max_frac: 1.0,
        }
    }

    pub fn rate(&self, year: i32) -> f64 {
        crate::daccs::formulas::subsidy_at(self.peak, self.timing, self.phase_out, year)
    }

    pub fn validate(&self) -> Result<(), DaccsError> {
        let ok = self.peak >= 0.0
            && self.phase_out > 0.0
            && self.max_frac > 0.0
            && self.max_frac <= 1.0
            && (2025..=2050).contains(&self.timing)
            && (self.timing - 2025) % 5 == 0;
        if ok {
            Ok(())
        } else {
            Err(DaccsError::Parameter(format!("subsidy schedule out of range: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Market {
    /// Yearly maximum growth rate.
    pub growth_rate: f64,
    /// tCO2/yr seed capacity per step.
    pub k0: f64,
    /// Global saturation level, tCO2/yr.
    pub global_saturation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Finance {
    pub convergence_rate: f64,
    pub regional_spread: f64,
}

/// Everything one simulation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub scenario: ScenarioId,
    pub years: Vec<i32>,
    pub step_years: i32,
    pub techs: Vec<Technology>,
    pub regions: Vec<Region>,
    pub market: Market,
    pub finance: Finance,
    pub schedule: SubsidySchedule,
    pub nameplate: f64,
    pub storage_cost: f64,
    pub discount_rate: f64,
    pub wacc_premium_decay: f64,
}

/// Input names consumed by [`Model::from_inputs`].
pub fn required_inputs() -> Vec<String> {
    let mut names = Vec::new();
    for t in TechId::ALL {
        for p in ["capex0", "opex0", "b_cap", "b_op", "zeta", "eta", "cf", "lifetime", "wacc"] {
            names.push(format!("{p}_{}", t.suffix()));
        }
    }
    for n in [
        "cost_floor",
        "growth_rate",
        "k0",
        "max_capacity",
        "subsidy_peak",
        "subsidy_timing",
        "phase_out",
        "y_frac",
        "b_fin",
        "omega_conv",
        "omega_reg",
    ] {
        names.push(n.to_string());
    }
    names
}

impl Model {
    /// Builds a model from one named input vector.
    pub fn from_inputs(
        config: &DaccsConfig,
        scenario: ScenarioId,
        names: &[String],
        values: &[f64],
    ) -> Result<Self, DaccsError> {
        if names.len() != values.len() {
            return Err(DaccsError::Parameter(format!(
                "{} names for {} values",
                names.len(),
                values.len()
            )));
        }
        let map: HashMap<&str, f64> = names.iter().map(String::as_str).zip(values.iter().copied()).collect();
        let missing: Vec<String> = required_inputs()
            .into_iter()
            .filter(|n| !map.contains_key(n.as_str()))
            .collect();
        if !missing.is_empty() {
            return Err(DaccsError::MissingInputs(missing));
        }
        let get = |n: &str| map[n];
        let techs = TechId::ALL
            .iter()
            .map(|&id| {
                let s = id.suffix();
                Technology {
                    id,
                    capex0: get(&format!("capex0_{s}")),
                    opex0: get(&format!("opex0_{s}")),
                    learn_capex: get(&format!("b_cap_{s}")),
                    learn_opex: get(&format!("b_op_{s}")),
                    learn_fin: get("b_fin"),
                    thermal: get(&format!("zeta_{s}")),
                    electric: get(&format!("eta_{s}")),
                    capacity_factor: get(&format!("cf_{s}")),
                    lifetime: get(&format!("lifetime_{s}")).round().max(1.0) as u32,
                    wacc0: get(&format!("wacc_{s}")),
                    cost_floor: get("cost_floor"),
                }
            })
            .collect();
        let market = Market {
            growth_rate: get("growth_rate"),
            k0: get("k0"),
            global_saturation: get("max_capacity"),
        };
        let finance = Finance {
            convergence_rate: get("omega_conv"),
            regional_spread: get("omega_reg"),
        };
        let schedule = SubsidySchedule {
            peak: get("subsidy_peak"),
            timing: get("subsidy_timing").round() as i32,
            phase_out: get("phase_out"),
            max_frac: get("y_frac"),
        };
        Self::assemble(config, scenario, techs, market, finance, schedule)
    }

    pub fn assemble(
        config: &DaccsConfig,
        scenario: ScenarioId,
        techs: Vec<Technology>,
        market: Market,
        finance: Finance,
        schedule: SubsidySchedule,
    ) -> Result<Self, DaccsError> {
        config.validate()?;
        let years = config.years();
        let sc = config.scenario(scenario)?;
        let global_price = sc.carbon_price.sample(&years)?;
        let regions = config
            .regions
            .iter()
            .map(|r| {
                let carbon_price = match sc.regional_carbon_price.iter().find(|(id, _)| *id == r.id) {
                    Some((_, p)) => p.sample(&years)?,
                    None => global_price.clone(),
                };
                Ok(Region {
                    id: r.id.clone(),
                    saturation_share: r.saturation_share,
                    subsidizes: r.subsidizes,
                    gdp: r.gdp.sample(&years)?,
                    interest_rate: r.interest_rate.sample(&years)?,
                    electricity_price: r.electricity_price.sample(&years)?,
                    gas_price: r.gas_price.sample(&years)?,
                    wacc_ratio: r.wacc_ratio,
                    carbon_price,
                })
            })
            .collect::<Result<Vec<_>, DaccsError>>()?;
        let model = Self {
            scenario,
            years,
            step_years: config.step_years,
            techs,
            regions,
            market,
            finance,
            schedule,
            nameplate: config.nameplate_t,
            storage_cost: config.storage_cost,
            discount_rate: config.discount_rate,
            wacc_premium_decay: config.wacc_premium_decay,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), DaccsError> {
        for t in &self.techs {
            t.validate()?;
        }
        self.schedule.validate()?;
        let m = &self.market;
        if !(m.growth_rate >= 0.0 && m.k0 >= 0.0 && m.global_saturation > 0.0) {
            return Err(DaccsError::Parameter(format!("market parameters out of range: {m:?}")));
        }
        if !(self.finance.convergence_rate >= 0.0 && self.finance.regional_spread > 0.0) {
            return Err(DaccsError::Parameter(format!(
                "finance parameters out of range: {:?}",
                self.finance
            )));
        }
        Ok(())
    }

    /// Same model with subsidies switched off.
    pub fn without_subsidies(&self) -> Self {
        Self {
            schedule: SubsidySchedule {
                peak: 0.0,
                ..self.schedule
            },
            ..self.clone()
        }
    }

    /// Regional WACC multiplier at grid step `t`.
    pub fn wacc_multiplier(&self, region: usize, t: usize) -> f64 {
        let r = &self.regions[region];
        let premium = (r.wacc_ratio - 1.0) * self.finance.regional_spread / 5.0;
        let years = (self.years[t] - self.years[0]) as f64;
        (1.0 + premium * (-self.finance.convergence_rate * self.wacc_premium_decay * years).exp()).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::InputSpace;

    #[test]
    fn default_space_provides_every_input() {
        let space = InputSpace::default_space();
        let names = space.names();
        for n in required_inputs() {
            assert!(names.contains(&n), "{n}");
        }
        let values: Vec<f64> = space
            .entries
            .iter()
            .map(|e| e.distribution.quantile(0.5).unwrap())
            .collect();
        let m = Model::from_inputs(&DaccsConfig::default_config(), ScenarioId::Lts, &names, &values).unwrap();
        assert_eq!(m.techs.len(), 3);
        assert_eq!(m.regions.len(), 17);
    }

    #[test]
    fn missing_inputs_listed() {
        let err = Model::from_inputs(&DaccsConfig::default_config(), ScenarioId::Ndc, &[], &[]).unwrap_err();
        match err {
            DaccsError::MissingInputs(v) => assert_eq!(v.len(), required_inputs().len()),
            e => panic!("{e}"),
        }
    }
}
