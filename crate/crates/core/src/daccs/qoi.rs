use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::daccs::formulas::block_discount;
use crate::daccs::model::SubsidySchedule;
use crate::daccs::world::DacWorld;
use crate::daccs::DaccsError;

/// Last year counted in gains and subsidy totals.
pub const HORIZON: i32 = 2050;

/// Variables `write_trajectories` knows how to emit.
pub const TRAJECTORY_VARIABLES: [&str; 8] = [
    "capacity",
    "additions",
    "investment",
    "capex",
    "opex",
    "wacc_adj",
    "subsidy_outlay",
    "removals",
];

/// Net removals `E(t)` in tCO2/yr, summed over regions and technologies.
pub fn removals(world: &DacWorld, t: usize) -> f64 {
    (0..world.regions.len()).map(|n| world.regional_removal(n, t)).sum()
}

/// `(E(2040), E(2045), E(2050))`; years missing from the grid count as 0.
pub fn qoi_emissions(world: &DacWorld) -> [f64; 3] {
    [2040, 2045, 2050].map(|y| world.year_index(y).map_or(0.0, |t| removals(world, t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Gdp,
    Consumption,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gdp => "gdp",
            Self::Consumption => "consumption",
        }
    }

    /// Yearly economic value of one region's DACCS activity.
    fn value(self, world: &DacWorld, n: usize, t: usize) -> f64 {
        let r = world.rt(n, t);
        match self {
            Self::Gdp => world.revenue[r] - world.operating_cost[r],
            Self::Consumption => world.revenue[r] - world.operating_cost[r] - world.capital_cost[r],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyGains {
    pub metric: Metric,
    /// `(year, G(t))` over 2025..=2050.
    pub per_period: Vec<(i32, f64)>,
    pub npv: f64,
}

/// Gains of `world` over `baseline`, discounted in five-year blocks.
pub fn qoi_policy_gains(
    world: &DacWorld,
    baseline: &DacWorld,
    metric: Metric,
    rho: f64,
) -> Result<PolicyGains, DaccsError> {
    if world.years != baseline.years || world.regions != baseline.regions || world.techs != baseline.techs {
        return Err(DaccsError::Mismatch("grid, regions or technologies differ".into()));
    }
    let mut per_period = Vec::new();
    let mut npv = 0.0;
    for (t, &year) in world.years.iter().enumerate().filter(|(_, &y)| y <= HORIZON) {
        let g: f64 = (0..world.regions.len())
            .map(|n| metric.value(world, n, t) - metric.value(baseline, n, t))
            .sum();
        npv += g * block_discount(year, rho);
        per_period.push((year, g));
    }
    Ok(PolicyGains {
        metric,
        per_period,
        npv,
    })
}

/// Discounted subsidies paid to subsidizing regions through 2050, using
/// the capacities of `world` and the rates of `schedule`.
pub fn qoi_total_subsidies(world: &DacWorld, schedule: &SubsidySchedule, rho: f64) -> f64 {
    let mut total = 0.0;
    for (t, &year) in world.years.iter().enumerate().filter(|(_, &y)| y <= HORIZON) {
        let s = schedule.rate(year);
        if s == 0.0 {
            continue;
        }
        let q: f64 = (0..world.regions.len())
            .filter(|&n| world.subsidizes[n])
            .map(|n| world.regional_removal(n, t))
            .sum();
        total += q * s * block_discount(year, rho);
    }
    total
}

/// Mean of `s(t)` over the 2025..=2050 grid years.
pub fn avg_subsidy(schedule: &SubsidySchedule, years: &[i32]) -> f64 {
    let ys: Vec<i32> = years.iter().copied().filter(|&y| y <= HORIZON).collect();
    if ys.is_empty() {
        return 0.0;
    }
    ys.iter().map(|&y| schedule.rate(y)).sum::<f64>() / ys.len() as f64
}

/// Appends tidy rows `run_id,region,tech,year,variable,value` without a
/// header. Region-level variables use tech `all`.
pub fn write_trajectories<W: Write>(
    out: &mut W,
    run_id: &str,
    world: &DacWorld,
    variables: &[&str],
) -> Result<(), DaccsError> {
    let io = |e: std::io::Error| DaccsError::Io(e.to_string());
    for var in variables {
        let per_cell: Option<&Vec<f64>> = match *var {
            "capacity" => Some(&world.capacity),
            "additions" => Some(&world.additions),
            "investment" => Some(&world.investment),
            "capex" => Some(&world.capex),
            "opex" => Some(&world.opex),
            "wacc_adj" => Some(&world.wacc_adj),
            "subsidy_outlay" | "removals" => None,
            other => return Err(DaccsError::Parameter(format!("unknown trajectory variable `{other}`"))),
        };
        for (n, region) in world.regions.iter().enumerate() {
            match per_cell {
                Some(values) => {
                    for (d, tech) in world.techs.iter().enumerate() {
                        for (t, year) in world.years.iter().enumerate() {
                            let v = values[world.at(d, n, t)];
                            writeln!(out, "{run_id},{region},{},{year},{var},{v}", tech.as_str()).map_err(io)?;
                        }
                    }
                }
                None => {
                    for (t, year) in world.years.iter().enumerate() {
                        let v = if *var == "subsidy_outlay" {
                            world.outlay[world.rt(n, t)]
                        } else {
                            world.regional_removal(n, t)
                        };
                        writeln!(out, "{run_id},{region},all,{year},{var},{v}").map_err(io)?;
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::daccs::world::{simulate, toy};

    fn single_cell_world(k: f64) -> DacWorld {
        let m = toy::model(0.0, SubsidySchedule::none());
        let mut w = DacWorld::new(&m);
        w.steps_done = w.years.len();
        let t = w.year_index(2050).unwrap();
        let i = w.at(0, 0, t);
        w.capacity[i] = k;
        w
    }

    #[test]
    fn empty_world_removes_nothing() {
        let w = single_cell_world(0.0);
        assert_eq!(qoi_emissions(&w), [0.0; 3]);
    }

    #[test]
    fn single_term_removals() {
        let w = single_cell_world(1e9);
        let e = qoi_emissions(&w);
        assert_eq!(e[0], 0.0);
        assert!((e[2] - 0.9e9).abs() < 1e-3);
    }

    #[test]
    fn identical_worlds_have_no_gains() {
        let m = toy::model(400.0, SubsidySchedule { peak: 600.0, timing: 2030, phase_out: 0.2, max_frac: 0.05 });
        let w = simulate(&m).unwrap();
        for metric in [Metric::Gdp, Metric::Consumption] {
            let g = qoi_policy_gains(&w, &w, metric, 0.03).unwrap();
            assert_eq!(g.per_period.len(), 6);
            assert!(g.per_period.iter().all(|&(_, v)| v == 0.0));
            assert_eq!(g.npv, 0.0);
        }
    }

    #[test]
    fn undiscounted_npv_is_five_times_the_sum() {
        let m = toy::model(0.0, SubsidySchedule { peak: 600.0, timing: 2030, phase_out: 0.2, max_frac: 0.05 });
        let w = simulate(&m).unwrap();
        let b = simulate(&m.without_subsidies()).unwrap();
        let g = qoi_policy_gains(&w, &b, Metric::Gdp, 0.0).unwrap();
        let sum: f64 = g.per_period.iter().map(|p| p.1).sum();
        assert!(sum != 0.0);
        assert!((g.npv - 5.0 * sum).abs() <= 1e-9 * g.npv.abs());
    }

    #[test]
    fn total_subsidies_single_cell() {
        let m = toy::model(0.0, SubsidySchedule::none());
        let mut w = DacWorld::new(&m);
        w.capacity_factor[0] = 1.0;
        let i = w.at(0, 0, 0);
        w.capacity[i] = 1e9;
        let s = SubsidySchedule { peak: 100.0, timing: 2025, phase_out: 50.0, max_frac: 1.0 };
        let ts = qoi_total_subsidies(&w, &s, 0.03);
        let oracle = 100e9 * (0..5).map(|k| 1.03f64.powi(-k)).sum::<f64>();
        assert!((ts - oracle).abs() <= 1e-9 * oracle);
        assert_eq!(qoi_total_subsidies(&w, &SubsidySchedule::none(), 0.03), 0.0);
        let doubled = SubsidySchedule { peak: 200.0, ..s };
        assert!((qoi_total_subsidies(&w, &doubled, 0.03) - 2.0 * ts).abs() <= 1e-9 * ts);
    }

    #[test]
    fn average_subsidy_over_grid() {
        let s = SubsidySchedule { peak: 500.0, timing: 2050, phase_out: 1.0, max_frac: 1.0 };
        let years: Vec<i32> = (2025..=2100).step_by(5).collect();
        // 0, 100, ..., 500
        assert!((avg_subsidy(&s, &years) - 250.0).abs() < 1e-12);
    }

    #[test]
    fn trajectory_rows_are_tidy() {
        let w = single_cell_world(2.0);
        let mut buf = Vec::new();
        write_trajectories(&mut buf, "run7", &w, &["capacity", "subsidy_outlay"]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2 * w.years.len());
        assert!(text.contains("run7,r,LS,2050,capacity,2\n"));
        assert!(text.contains("run7,r,all,2025,subsidy_outlay,0\n"));
        assert!(write_trajectories(&mut Vec::new(), "x", &w, &["bogus"]).is_err());
    }
}
