use crate::daccs::formulas::{
    adjusted_wacc, annuity_factor, growth_bound, learning_cost, period_growth_rate,
};
use crate::daccs::model::{Model, TechId};
use crate::daccs::DaccsError;

/// Absolute slack on the growth-bound check, in tCO2/yr.
pub const BOUND_SLACK: f64 = 1e-9;

/// Simulated trajectories on the `technology x region x year` grid.
///
/// Per-cell arrays are indexed by [`DacWorld::at`]; per-region arrays by
/// [`DacWorld::rt`].
#[derive(Debug, Clone, PartialEq)]
pub struct DacWorld {
    pub years: Vec<i32>,
    pub techs: Vec<TechId>,
    pub regions: Vec<String>,
    pub subsidizes: Vec<bool>,
    pub capacity_factor: Vec<f64>,
    /// Steps completed so far.
    pub steps_done: usize,

    /// K, tCO2/yr at the end of each step.
    pub capacity: Vec<f64>,
    /// Capacity added during each step, tCO2/yr.
    pub additions: Vec<f64>,
    /// Logistic bound on the additions of each step.
    pub bound: Vec<f64>,
    /// USD spent on new capacity.
    pub investment: Vec<f64>,
    /// USD per tCO2/yr in force during the step.
    pub capex: Vec<f64>,
    /// USD per tCO2 in force during the step.
    pub opex: Vec<f64>,
    pub wacc: Vec<f64>,
    pub wacc_adj: Vec<f64>,
    /// Levelized cost per tonne removed used for the investment decision.
    pub unit_cost: Vec<f64>,
    /// Cumulative learning units after the step.
    pub units: Vec<f64>,

    /// USD/tCO2 offered per removed tonne in subsidizing regions.
    pub subsidy_rate: Vec<f64>,
    pub carbon_price: Vec<f64>,
    /// Yearly subsidy payments, capped.
    pub outlay: Vec<f64>,
    pub outlay_cap: Vec<f64>,
    /// Carbon-price value of removals, USD/yr.
    pub revenue: Vec<f64>,
    /// Annualized capital charge, USD/yr.
    pub capital_cost: Vec<f64>,
    /// O&M, energy and storage, USD/yr.
    pub operating_cost: Vec<f64>,
}

impl DacWorld {
    pub fn new(model: &Model) -> Self {
        let nt = model.years.len();
        let cells = model.techs.len() * model.regions.len() * nt;
        let region_cells = model.regions.len() * nt;
        Self {
            years: model.years.clone(),
            techs: model.techs.iter().map(|t| t.id).collect(),
            regions: model.regions.iter().map(|r| r.id.clone()).collect(),
            subsidizes: model.regions.iter().map(|r| r.subsidizes).collect(),
            capacity_factor: model.techs.iter().map(|t| t.capacity_factor).collect(),
            steps_done: 0,
            capacity: vec![0.0; cells],
            additions: vec![0.0; cells],
            bound: vec![0.0; cells],
            investment: vec![0.0; cells],
            capex: vec![0.0; cells],
            opex: vec![0.0; cells],
            wacc: vec![0.0; cells],
            wacc_adj: vec![0.0; cells],
            unit_cost: vec![0.0; cells],
            units: vec![1.0; cells],
            subsidy_rate: vec![0.0; nt],
            carbon_price: vec![0.0; region_cells],
            outlay: vec![0.0; region_cells],
            outlay_cap: vec![0.0; region_cells],
            revenue: vec![0.0; region_cells],
            capital_cost: vec![0.0; region_cells],
            operating_cost: vec![0.0; region_cells],
        }
    }

    #[inline]
    pub fn at(&self, d: usize, n: usize, t: usize) -> usize {
        (d * self.regions.len() + n) * self.years.len() + t
    }

    #[inline]
    pub fn rt(&self, n: usize, t: usize) -> usize {
        n * self.years.len() + t
    }

    pub fn year_index(&self, year: i32) -> Option<usize> {
        self.years.iter().position(|&y| y == year)
    }

    /// Net removals `f K` of one cell.
    pub fn removal(&self, d: usize, n: usize, t: usize) -> f64 {
        self.capacity_factor[d] * self.capacity[self.at(d, n, t)]
    }

    pub fn regional_removal(&self, n: usize, t: usize) -> f64 {
        (0..self.techs.len()).map(|d| self.removal(d, n, t)).sum()
    }
}

/// Advances the world by grid step `t`: decide additions, apply the
/// regional subsidy cap, depreciate, and update learning.
pub fn step_investment(model: &Model, world: &mut DacWorld, t: usize) -> Result<(), DaccsError> {
    if t != world.steps_done || t >= world.years.len() {
        return Err(DaccsError::Step(format!(
            "step {t} requested after {} completed steps",
            world.steps_done
        )));
    }
    let year = world.years[t];
    let growth = period_growth_rate(model.market.growth_rate, model.step_years);
    let s = model.schedule.rate(year);
    world.subsidy_rate[t] = s;

    for (n, region) in model.regions.iter().enumerate() {
        let saturation = region.saturation_share * model.market.global_saturation;
        let price = region.carbon_price[t];
        let offered = if region.subsidizes { s } else { 0.0 };
        let ir = region.interest_rate[t];
        let mult = model.wacc_multiplier(n, t);

        let mut k_prev = vec![0.0; model.techs.len()];
        let mut adds = vec![0.0; model.techs.len()];
        for (d, tech) in model.techs.iter().enumerate() {
            let i = world.at(d, n, t);
            let (kp, units_prev) = if t == 0 {
                (0.0, 1.0)
            } else {
                let j = world.at(d, n, t - 1);
                (world.capacity[j], world.units[j])
            };
            k_prev[d] = kp;
            let capex = learning_cost(tech.capex0, units_prev, tech.learn_capex, tech.cost_floor);
            let opex = learning_cost(tech.opex0, units_prev, tech.learn_opex, 0.0);
            let wacc = tech.wacc0 * mult * units_prev.powf(-tech.learn_fin);
            let wadj = adjusted_wacc(wacc, ir, tech.lifetime)?;
            let af = annuity_factor(ir, tech.lifetime)?;
            let heat_price = if tech.id.gas_heat() {
                region.gas_price[t]
            } else {
                region.electricity_price[t]
            };
            let energy = tech.thermal * heat_price + tech.electric * region.electricity_price[t];
            let unit_cost = capex * wadj / af / tech.capacity_factor + opex + energy + model.storage_cost;
            let bound = growth_bound(kp, growth, saturation, model.market.k0);

            world.capex[i] = capex;
            world.opex[i] = opex;
            world.wacc[i] = wacc;
            world.wacc_adj[i] = wadj;
            world.unit_cost[i] = unit_cost;
            world.bound[i] = bound;
            adds[d] = if price + offered >= unit_cost { bound } else { 0.0 };
        }

        let kept: f64 = model
            .techs
            .iter()
            .zip(&k_prev)
            .map(|(tech, &kp)| tech.capacity_factor * (1.0 - tech.depreciation(model.step_years)) * kp)
            .sum();
        let added: f64 = model
            .techs
            .iter()
            .zip(&adds)
            .map(|(tech, &a)| tech.capacity_factor * a)
            .sum();
        let r = world.rt(n, t);
        let cap = model.schedule.max_frac * region.gdp[t];
        world.outlay_cap[r] = if offered > 0.0 { cap } else { f64::INFINITY };
        if offered > 0.0 && offered * (kept + added) > cap && added > 0.0 {
            let scale = ((cap / offered - kept) / added).clamp(0.0, 1.0);
            for a in &mut adds {
                *a *= scale;
            }
        }

        let mut removal = 0.0;
        let mut capital = 0.0;
        let mut operating = 0.0;
        for (d, tech) in model.techs.iter().enumerate() {
            let i = world.at(d, n, t);
            let k = (1.0 - tech.depreciation(model.step_years)) * k_prev[d] + adds[d];
            world.additions[i] = adds[d];
            world.capacity[i] = k;
            world.investment[i] = adds[d] * world.capex[i] * world.wacc_adj[i];
            let units_prev = if t == 0 { 1.0 } else { world.units[world.at(d, n, t - 1)] };
            world.units[i] = units_prev + adds[d] / model.nameplate;

            if k - k_prev[d] > world.bound[i] + BOUND_SLACK {
                return Err(DaccsError::Invariant(format!(
                    "growth bound exceeded for {} in {} at {year}",
                    tech.id.as_str(),
                    region.id
                )));
            }
            let heat_price = if tech.id.gas_heat() {
                region.gas_price[t]
            } else {
                region.electricity_price[t]
            };
            let energy = tech.thermal * heat_price + tech.electric * region.electricity_price[t];
            let q = tech.capacity_factor * k;
            removal += q;
            let af = annuity_factor(region.interest_rate[t], tech.lifetime)?;
            capital += k * world.capex[i] * world.wacc_adj[i] / af;
            operating += q * (world.opex[i] + energy + model.storage_cost);
        }
        world.carbon_price[r] = price;
        world.outlay[r] = if offered > 0.0 { (offered * removal).min(cap) } else { 0.0 };
        world.revenue[r] = price * removal;
        world.capital_cost[r] = capital;
        world.operating_cost[r] = operating;
    }
    world.steps_done += 1;
    Ok(())
}

/// Runs every grid step.
pub fn simulate(model: &Model) -> Result<DacWorld, DaccsError> {
    model.validate()?;
    let mut world = DacWorld::new(model);
    for t in 0..world.years.len() {
        step_investment(model, &mut world, t)?;
    }
    Ok(world)
}
