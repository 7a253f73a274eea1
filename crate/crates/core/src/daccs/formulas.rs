//! Closed-form pieces of the deployment model.

use crate::daccs::DaccsError;

pub const BASE_YEAR: i32 = 2025;

/// `sum_{tau=0}^{lt} (1 + r)^-tau`.
pub fn annuity_factor(rate: f64, lifetime: u32) -> Result<f64, DaccsError> {
    let base = 1.0 + rate;
    if !(base > 0.0) {
        return Err(DaccsError::NegativeDiscountBase(rate));
    }
    Ok((0..=lifetime).map(|tau| base.powi(-(tau as i32))).sum())
}

/// Ratio of the interest-rate and WACC annuity factors for constant rates.
pub fn adjusted_wacc(wacc: f64, interest_rate: f64, lifetime: u32) -> Result<f64, DaccsError> {
    Ok(annuity_factor(interest_rate, lifetime)? / annuity_factor(wacc, lifetime)?)
}

/// Same ratio for yearly rate paths indexed from the decision year. Paths
/// shorter than the lifetime are held at their last value.
pub fn adjusted_wacc_paths(wacc: &[f64], interest_rate: &[f64], lifetime: u32) -> Result<f64, DaccsError> {
    let at = |p: &[f64], tau: usize| -> Result<f64, DaccsError> {
        let r = *p
            .get(tau)
            .or(p.last())
            .ok_or(DaccsError::EmptyPath)?;
        if !(1.0 + r > 0.0) {
            return Err(DaccsError::NegativeDiscountBase(r));
        }
        Ok((1.0 + r).powi(-(tau as i32)))
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for tau in 0..=lifetime as usize {
        num += at(interest_rate, tau)?;
        den += at(wacc, tau)?;
    }
    Ok(num / den)
}

/// Logistic cap on capacity additions, `k K (1 - K/L) + K0`; the logistic
/// part is clamped at zero above saturation.
pub fn growth_bound(k_now: f64, rate: f64, saturation: f64, k0: f64) -> f64 {
    (rate * k_now * (1.0 - k_now / saturation)).max(0.0) + k0
}

/// Converts a yearly growth rate into the per-step rate of a `years` grid.
pub fn period_growth_rate(annual: f64, years: i32) -> f64 {
    (1.0 + annual).powi(years) - 1.0
}

/// Power-law learning curve `c0 * units^-b`, floored at `floor`.
pub fn learning_cost(c0: f64, cumulative_units: f64, exponent: f64, floor: f64) -> f64 {
    (c0 * cumulative_units.powf(-exponent)).max(floor)
}

/// Subsidy per tonne: linear ramp to `peak` at `timing`, exponential
/// phase-out afterwards. A ramp of zero length sits at the peak.
pub fn subsidy_at(peak: f64, timing: i32, phase_out: f64, year: i32) -> f64 {
    if year <= timing {
        if timing == BASE_YEAR {
            peak
        } else {
            peak * (year - BASE_YEAR) as f64 / (timing - BASE_YEAR) as f64
        }
    } else {
        peak * (-phase_out * (year - timing) as f64).exp()
    }
}

/// Discount weight of the five-year block starting at `year`.
pub fn block_discount(year: i32, rho: f64) -> f64 {
    (year..year + 5)
        .map(|tau| (1.0 + rho).powi(-(tau - BASE_YEAR)))
        .sum()
}
