//! Bounded eavesdropper-CSI uncertainty and its closed-form worst case.
//!
//! The true eavesdropper vector is `hbar + dh` with `||dh|| <= eps`. For a
//! fixed composite `c = H v` the error that maximizes `|(hbar + dh)^H c|^2`
//! adds coherently to the nominal term, giving `(|hbar^H c| + eps ||c||)^2`.

use num_complex::Complex64;

use crate::ao::Design;
use crate::channel::{rate, ChannelRealization, Scenario, SlotChannels};
use crate::linalg::{inner, CVector};

/// Radii of the two eavesdropper error balls for one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyModel {
    pub delta_a: f64,
    pub eps1: f64,
    pub eps2: f64,
}

impl UncertaintyModel {
    /// `eps_l = delta_a ||hbar_El||`.
    pub fn new(delta_a: f64, realization: &ChannelRealization) -> Self {
        assert!(delta_a >= 0.0, "delta_a must be nonnegative");
        UncertaintyModel {
            delta_a,
            eps1: delta_a * realization.hbar_e1.norm(),
            eps2: delta_a * realization.hbar_e2.norm(),
        }
    }

    /// Perfect CSI.
    pub fn exact() -> Self {
        UncertaintyModel {
            delta_a: 0.0,
            eps1: 0.0,
            eps2: 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.eps1 == 0.0 && self.eps2 == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseError {
    pub delta_h: CVector,
    /// `|(hbar + delta_h)^H H v|^2`.
    pub attained_gain: f64,
}

/// Closed-form maximizer of `|(hbar + dh)^H diag(d) v|^2` over `||dh|| <= eps`.
pub fn worst_case_error(hbar: &CVector, diag: &CVector, v: &CVector, eps: f64) -> WorstCaseError {
    assert_eq!(hbar.len(), diag.len(), "dimension mismatch");
    assert_eq!(hbar.len(), v.len(), "dimension mismatch");
    assert!(eps >= 0.0, "radius must be nonnegative");
    let c = diag.component_mul(v);
    let nominal = inner(hbar, &c);
    let c_norm = c.norm();
    if c_norm == 0.0 || eps == 0.0 {
        return WorstCaseError {
            delta_h: CVector::zeros(hbar.len()),
            attained_gain: nominal.norm_sqr(),
        };
    }
    let phi = if nominal.norm() > 0.0 { nominal.arg() } else { 0.0 };
    let delta_h = c.map(|ck| {
        let psi = ck.arg();
        Complex64::from_polar(eps * ck.norm() / c_norm, psi - phi)
    });
    let amplitude = nominal.norm() + eps * c_norm;
    WorstCaseError {
        delta_h,
        attained_gain: amplitude * amplitude,
    }
}

/// `(|hbar^H c| + eps ||c||)^2` without forming the error vector.
pub fn worst_case_gain(hbar: &CVector, diag: &CVector, v: &CVector, eps: f64) -> f64 {
    let mut nominal = Complex64::new(0.0, 0.0);
    let mut c2 = 0.0;
    for ((h, d), x) in hbar.iter().zip(diag.iter()).zip(v.iter()) {
        let c = d * x;
        nominal += h.conj() * c;
        c2 += c.norm_sqr();
    }
    let amplitude = nominal.norm() + eps * c2.sqrt();
    amplitude * amplitude
}

/// Worst-case eavesdropper rates of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCaseRates {
    pub eve_dl: f64,
    pub eve_ul: f64,
}

/// Per-slot worst-case eavesdropper rates of a complete design.
pub fn worst_case_rates(
    realization: &ChannelRealization,
    design: &Design,
    model: &UncertaintyModel,
    scenario: &Scenario,
) -> Vec<WorstCaseRates> {
    let noise = scenario.propagation.noise_power;
    (0..design.trajectory.len())
        .map(|n| {
            let slot = SlotChannels::at(realization, design.trajectory.q[n], scenario);
            let g1 = worst_case_gain(&realization.hbar_e1, &slot.d_e1, &design.phases.down[n], model.eps1);
            let g2 = worst_case_gain(&realization.hbar_e2, &slot.d_e2, &design.phases.up[n], model.eps2);
            WorstCaseRates {
                eve_dl: rate(design.powers.p[n], g1, noise),
                eve_ul: rate(design.powers.g[n], g2, noise),
            }
        })
        .collect()
}
