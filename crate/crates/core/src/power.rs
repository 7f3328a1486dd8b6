//! Closed-form DL/UL power control with a dual bisection on the average
//! power constraint.

use crate::beamforming::PhaseSchedule;
use crate::channel::{ChannelRealization, LinkGains, Scenario, SlotChannels};
use crate::csi::{worst_case_gain, UncertaintyModel};
use crate::trajectory::TrajectoryPlan;
use crate::{Error, Result};

const B_FLOOR: f64 = 1e-30;

/// DL powers `p`, UL powers `g` and the multipliers of their average constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSchedule {
    pub p: Vec<f64>,
    pub g: Vec<f64>,
    pub varpi1: f64,
    pub varpi2: f64,
}

impl PowerSchedule {
    /// Every slot at the average power.
    pub fn uniform(scenario: &Scenario) -> Self {
        let n = scenario.slots();
        PowerSchedule {
            p: vec![scenario.power.dl_average; n],
            g: vec![scenario.power.ul_average; n],
            varpi1: 0.0,
            varpi2: 0.0,
        }
    }
}

/// Normalized legitimate and worst-case eavesdropper gains of every slot.
pub fn effective_gains(
    realization: &ChannelRealization,
    trajectory: &TrajectoryPlan,
    phases: &PhaseSchedule,
    model: &UncertaintyModel,
    scenario: &Scenario,
) -> LinkGains {
    let noise = scenario.propagation.noise_power;
    let n = trajectory.len();
    let mut out = LinkGains {
        g_g1: Vec::with_capacity(n),
        g_g2: Vec::with_capacity(n),
        a1: Vec::with_capacity(n),
        b1: Vec::with_capacity(n),
        a2: Vec::with_capacity(n),
        b2: Vec::with_capacity(n),
    };
    for k in 0..n {
        let slot = SlotChannels::at(realization, trajectory.q[k], scenario);
        let (vd, vu) = (&phases.down[k], &phases.up[k]);
        let g1 = slot.dl_gain(vd);
        let g2 = slot.ul_gain(vu);
        out.a1.push(g1.norm_sqr() / noise);
        out.a2.push(g2.norm_sqr() / noise);
        out.b1.push(worst_case_gain(&realization.hbar_e1, &slot.d_e1, vd, model.eps1) / noise);
        out.b2.push(worst_case_gain(&realization.hbar_e2, &slot.d_e2, vu, model.eps2) / noise);
        out.g_g1.push(g1);
        out.g_g2.push(g2);
    }
    out
}

/// Maximizer of `log2(1 + p a) - log2(1 + p b) - varpi p` over `[0, peak]`.
///
/// `varpi = 0` means the average constraint is inactive and every slot with
/// `a > b` transmits at peak power.
pub fn closed_form_power(a: f64, b: f64, varpi: f64, peak: f64) -> f64 {
    assert!(a >= 0.0 && b >= 0.0, "gains must be nonnegative");
    assert!(varpi >= 0.0, "multiplier must be nonnegative");
    if a <= b {
        return 0.0;
    }
    if varpi == 0.0 {
        return peak;
    }
    let b = b.max(B_FLOOR);
    let half_gap = 0.5 / b - 0.5 / a;
    let y = (1.0 / b - 1.0 / a) / (varpi * std::f64::consts::LN_2);
    // sqrt(A^2 + Y) - A rewritten to avoid cancellation when A is huge.
    let p = y / ((half_gap * half_gap + y).sqrt() + half_gap) - 1.0 / a;
    p.clamp(0.0, peak)
}

fn average_power(a: &[f64], b: &[f64], varpi: f64, peak: f64) -> f64 {
    let total: f64 = a
        .iter()
        .zip(b)
        .map(|(&a, &b)| closed_form_power(a, b, varpi, peak))
        .sum();
    total / a.len() as f64
}

/// Optimal schedule of one link and its multiplier.
pub fn solve_link(a: &[f64], b: &[f64], average: f64, peak: f64) -> Result<(Vec<f64>, f64)> {
    assert_eq!(a.len(), b.len(), "gain lengths differ");
    if a.is_empty() || average <= 0.0 {
        return Ok((vec![0.0; a.len()], 0.0));
    }
    let varpi = if average_power(a, b, 0.0, peak) <= average {
        0.0
    } else {
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut grow = 0;
        while average_power(a, b, hi, peak) > average {
            lo = hi;
            hi *= 4.0;
            grow += 1;
            if grow > 2000 || !hi.is_finite() {
                return Err(Error::Internal(
                    "power bisection failed to bracket the average constraint".into(),
                ));
            }
        }
        loop {
            let mid = 0.5 * (lo + hi);
            let avg = average_power(a, b, mid, peak);
            if avg > average {
                lo = mid;
            } else {
                hi = mid;
            }
            let hi_avg = average_power(a, b, hi, peak);
            if (hi_avg - average).abs() <= 1e-8 * average || hi - lo <= 1e-12 * hi {
                break;
            }
        }
        hi
    };
    let powers = a
        .iter()
        .zip(b)
        .map(|(&a, &b)| closed_form_power(a, b, varpi, peak))
        .collect();
    Ok((powers, varpi))
}

/// DL and UL schedules, solved independently.
pub fn solve_power(gains: &LinkGains, scenario: &Scenario) -> Result<PowerSchedule> {
    let budget = &scenario.power;
    let (p, varpi1) = solve_link(&gains.a1, &gains.b1, budget.dl_average, budget.dl_peak)?;
    let (g, varpi2) = solve_link(&gains.a2, &gains.b2, budget.ul_average, budget.ul_peak)?;
    Ok(PowerSchedule { p, g, varpi1, varpi2 })
}

/// `log2(1 + p a) - log2(1 + p b)`.
pub fn secrecy_term(p: f64, a: f64, b: f64) -> f64 {
    ((p * a).ln_1p() - (p * b).ln_1p()) / std::f64::consts::LN_2
}
