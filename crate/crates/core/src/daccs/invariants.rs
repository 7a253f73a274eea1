use crate::daccs::formulas::{growth_bound, period_growth_rate};
use crate::daccs::model::Model;
use crate::daccs::world::{DacWorld, BOUND_SLACK};

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: &'static str,
    pub detail: String,
}

/// Re-derives the structural properties of a finished world from the
/// model and stored trajectories.
pub fn check_invariants(model: &Model, world: &DacWorld) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, detail: String| out.push(Violation { kind, detail });
    let growth = period_growth_rate(model.market.growth_rate, model.step_years);

    for (n, region) in model.regions.iter().enumerate() {
        let saturation = region.saturation_share * model.market.global_saturation;
        for (d, tech) in model.techs.iter().enumerate() {
            for t in 0..world.steps_done {
                let i = world.at(d, n, t);
                let prev = if t == 0 { 0.0 } else { world.capacity[world.at(d, n, t - 1)] };
                let bound = growth_bound(prev, growth, saturation, model.market.k0);
                if world.capacity[i] - prev > bound + BOUND_SLACK {
                    push("growth_bound", format!("{} {} t={t}: dK {} > {bound}", region.id, tech.id.as_str(), world.capacity[i] - prev));
                }
                for (name, v) in [
                    ("capacity", world.capacity[i]),
                    ("additions", world.additions[i]),
                    ("investment", world.investment[i]),
                    ("capex", world.capex[i]),
                    ("opex", world.opex[i]),
                    ("wacc_adj", world.wacc_adj[i]),
                ] {
                    if !(v >= 0.0 && v.is_finite()) {
                        push("non_negative", format!("{} {} t={t}: {name} = {v}", region.id, tech.id.as_str()));
                    }
                }
                if world.capex[i] < tech.cost_floor {
                    push("cost_floor", format!("{} {} t={t}: capex {}", region.id, tech.id.as_str(), world.capex[i]));
                }
                if t > 0 {
                    let j = world.at(d, n, t - 1);
                    if tech.learn_capex >= 0.0 && world.capex[i] > world.capex[j] {
                        push("learning", format!("{} {} t={t}: capex rose", region.id, tech.id.as_str()));
                    }
                    if tech.learn_opex >= 0.0 && world.opex[i] > world.opex[j] {
                        push("learning", format!("{} {} t={t}: opex rose", region.id, tech.id.as_str()));
                    }
                }
            }
        }
        for t in 0..world.steps_done {
            let r = world.rt(n, t);
            let outlay = world.outlay[r];
            if !(outlay >= 0.0) {
                push("non_negative", format!("{} t={t}: outlay {outlay}", region.id));
            }
            if outlay > world.outlay_cap[r] * (1.0 + 1e-12) {
                push("subsidy_cap", format!("{} t={t}: outlay {outlay} > cap {}", region.id, world.outlay_cap[r]));
            }
            let added: f64 = (0..model.techs.len()).map(|d| world.additions[world.at(d, n, t)]).sum();
            let uncapped = world.subsidy_rate[t] * world.regional_removal(n, t);
            if region.subsidizes && added > 0.0 && uncapped > world.outlay_cap[r] * (1.0 + 1e-9) {
                push("subsidy_cap", format!("{} t={t}: additions left payments above the cap", region.id));
            }
        }
    }
    out
}
