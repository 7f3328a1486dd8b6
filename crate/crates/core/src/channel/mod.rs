//! Geometry, path loss, URA steering vectors, Rician small-scale fading and
//! the composite link gains of the eight UAV/RIS/user/eavesdropper links.
//!
//! Every composite scalar is written as `h^H diag(d) v`, where `v` is the
//! RIS phase vector with a trailing 1 for the direct path, `d` collects the
//! large-scale amplitudes times the transmitter-side small-scale terms and `h`
//! holds the receiver-side small-scale terms.

mod fading;
mod scenario;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::{diag_form, CVector};

pub use fading::{cscg, rician_weights, sample_realization, ChannelRealization};
pub use scenario::{
    db_to_linear, dbm_to_watts, AlgorithmSettings, CsiSettings, Flight, Geometry, PowerBudget,
    Propagation, RicianFactors, RisArray, Scenario,
};

pub(crate) use scenario::{dist2, steps_to_cover};

/// A horizontal position in meters.
pub type Point = [f64; 2];

/// URA response `a_y ⊗ a_x` toward a node at `(x, y, z)`.
///
/// Direction cosines are `(x_R - x) / d` along the array columns and
/// `(z - z_R) / d` along the rows, `d` being the node-to-RIS distance.
pub fn ris_response(node: [f64; 3], scenario: &Scenario) -> CVector {
    let g = &scenario.geometry;
    let dx = g.ris[0] - node[0];
    let dy = g.ris[1] - node[1];
    let dz = node[2] - g.ris_altitude;
    let d = (dx * dx + dy * dy + dz * dz).sqrt();
    let cos_x = dx / d;
    let cos_z = dz / d;
    let mx = scenario.ris.columns;
    let mz = scenario.ris.rows;
    let k = 2.0 * PI * scenario.ris.spacing;
    let mut out = CVector::zeros(mx * mz);
    for iz in 0..mz {
        for ix in 0..mx {
            let phase = -k * (iz as f64 * cos_z + ix as f64 * cos_x);
            out[iz * mx + ix] = Complex64::from_polar(1.0, phase);
        }
    }
    out
}

/// LoS steering vector of the UAV-RIS link with the UAV at horizontal position `q`.
pub fn steering_vector(q: Point, scenario: &Scenario) -> CVector {
    ris_response([q[0], q[1], scenario.geometry.uav_altitude], scenario)
}

/// Link distances that depend on the UAV position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavDistances {
    pub uav_ris: f64,
    pub uav_user: f64,
    pub uav_eve: f64,
}

impl UavDistances {
    pub fn at(q: Point, scenario: &Scenario) -> Self {
        let g = &scenario.geometry;
        let dz = g.uav_altitude - g.ris_altitude;
        UavDistances {
            uav_ris: (dz * dz + dist2(q, g.ris)).sqrt(),
            uav_user: (g.uav_altitude.powi(2) + dist2(q, g.ground_user)).sqrt(),
            uav_eve: (g.uav_altitude.powi(2) + dist2(q, g.eavesdropper)).sqrt(),
        }
    }
}

/// Distances between the static nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticDistances {
    pub ris_user: f64,
    pub ris_eve: f64,
    pub user_eve: f64,
}

impl StaticDistances {
    pub fn of(scenario: &Scenario) -> Self {
        let g = &scenario.geometry;
        let zr2 = g.ris_altitude.powi(2);
        StaticDistances {
            ris_user: (zr2 + dist2(g.ris, g.ground_user)).sqrt(),
            ris_eve: (zr2 + dist2(g.ris, g.eavesdropper)).sqrt(),
            user_eve: dist2(g.ground_user, g.eavesdropper).sqrt(),
        }
    }
}

/// Large-scale amplitude gains (square roots of the path-loss power gains).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLosses {
    /// UAV -> RIS -> user (also user -> RIS -> UAV).
    pub urg: f64,
    /// UAV -> RIS -> eavesdropper.
    pub ure: f64,
    /// UAV <-> user.
    pub ug: f64,
    /// UAV -> eavesdropper.
    pub ue: f64,
    /// user -> eavesdropper.
    pub ge: f64,
    /// user -> RIS -> eavesdropper.
    pub gre: f64,
}

pub fn path_losses(q: Point, scenario: &Scenario) -> PathLosses {
    let p = &scenario.propagation;
    let rho = p.reference_gain;
    let alpha = p.reflected_exponent;
    let kappa = p.direct_exponent;
    let uav = UavDistances::at(q, scenario);
    let fixed = StaticDistances::of(scenario);
    PathLosses {
        urg: (rho * (uav.uav_ris * fixed.ris_user).powf(-alpha)).sqrt(),
        ure: (rho * (uav.uav_ris * fixed.ris_eve).powf(-alpha)).sqrt(),
        ug: (rho * uav.uav_user.powf(-kappa)).sqrt(),
        ue: (rho * uav.uav_eve.powf(-kappa)).sqrt(),
        ge: (rho * fixed.user_eve.powf(-p.ground_exponent)).sqrt(),
        gre: (rho * (fixed.ris_user * fixed.ris_eve).powf(-alpha)).sqrt(),
    }
}

/// Diagonal composite channels of one slot.
///
/// `d_*` are the diagonals of the `H` matrices; `h_*` the receiver-side
/// vectors. The eavesdropper estimates live in the realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotChannels {
    pub losses: PathLosses,
    pub h_g1: CVector,
    pub d_g1: CVector,
    pub h_g2: CVector,
    pub d_g2: CVector,
    pub d_e1: CVector,
    pub d_e2: CVector,
}

impl SlotChannels {
    pub fn at(realization: &ChannelRealization, q: Point, scenario: &Scenario) -> Self {
        let losses = path_losses(q, scenario);
        let h_ur = realization.uav_ris(q, scenario);
        let h_ru = realization.ris_uav(q, scenario);
        let append = |v: CVector, last: Complex64| {
            let m = v.len();
            let mut out = CVector::zeros(m + 1);
            out.rows_mut(0, m).copy_from(&v);
            out[m] = last;
            out
        };
        let real = |x: f64| Complex64::new(x, 0.0);
        SlotChannels {
            h_g1: append(realization.h_rg.clone(), realization.h_ug.conj()),
            d_g1: append(h_ur.scale(losses.urg), real(losses.ug)),
            h_g2: append(h_ru, realization.h_gu.conj()),
            d_g2: append(realization.h_gr.scale(losses.urg), real(losses.ug)),
            d_e1: append(h_ur.scale(losses.ure), real(losses.ue)),
            d_e2: append(realization.h_gr.scale(losses.gre), real(losses.ge)),
            losses,
        }
    }

    /// DL legitimate composite `h_G1^H H_G1 v_d`.
    pub fn dl_gain(&self, v_d: &CVector) -> Complex64 {
        diag_form(&self.h_g1, &self.d_g1, v_d)
    }

    /// UL legitimate composite `h_G2^H H_G2 v_u`.
    pub fn ul_gain(&self, v_u: &CVector) -> Complex64 {
        diag_form(&self.h_g2, &self.d_g2, v_u)
    }
}

/// Composite channels of one slot for a given pair of phase vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeChannels {
    pub slot: SlotChannels,
    pub g_g1: Complex64,
    pub g_g2: Complex64,
    /// Nominal (estimated-CSI) eavesdropper composites.
    pub g_e1: Complex64,
    pub g_e2: Complex64,
}

/// Phase vectors must have length M + 1, unit-modulus entries and a trailing 1.
pub fn check_phase_vector(v: &CVector, elements: usize) {
    assert_eq!(v.len(), elements + 1, "phase vector length must be M + 1");
    assert!(
        (v[elements] - Complex64::new(1.0, 0.0)).norm() < 1e-9,
        "last phase entry must be 1"
    );
    debug_assert!(v.iter().all(|z| (z.norm() - 1.0).abs() < 1e-9));
}

pub fn composite_channels(
    realization: &ChannelRealization,
    q: Point,
    v_d: &CVector,
    v_u: &CVector,
    scenario: &Scenario,
) -> CompositeChannels {
    let m = scenario.elements();
    check_phase_vector(v_d, m);
    check_phase_vector(v_u, m);
    let slot = SlotChannels::at(realization, q, scenario);
    CompositeChannels {
        g_g1: slot.dl_gain(v_d),
        g_g2: slot.ul_gain(v_u),
        g_e1: diag_form(&realization.hbar_e1, &slot.d_e1, v_d),
        g_e2: diag_form(&realization.hbar_e2, &slot.d_e2, v_u),
        slot,
    }
}

/// `log2(1 + power |gain|^2 / noise)`.
pub fn rate(power: f64, gain_sq: f64, noise: f64) -> f64 {
    (power * gain_sq / noise).ln_1p() / std::f64::consts::LN_2
}

/// Achievable rates of one slot in bps/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub user_dl: f64,
    pub eve_dl: f64,
    pub uav_ul: f64,
    pub eve_ul: f64,
}

/// Rates of the four links with nominal eavesdropper channels.
pub fn rates(gains: &CompositeChannels, p: f64, g: f64, noise: f64) -> Rates {
    Rates {
        user_dl: rate(p, gains.g_g1.norm_sqr(), noise),
        eve_dl: rate(p, gains.g_e1.norm_sqr(), noise),
        uav_ul: rate(g, gains.g_g2.norm_sqr(), noise),
        eve_ul: rate(g, gains.g_e2.norm_sqr(), noise),
    }
}

/// Per-slot composite scalars and normalized power gains (1/W).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub g_g1: Vec<Complex64>,
    pub g_g2: Vec<Complex64>,
    /// `|g_G1|^2 / sigma^2`.
    pub a1: Vec<f64>,
    /// Worst-case DL eavesdropper gain over sigma^2.
    pub b1: Vec<f64>,
    pub a2: Vec<f64>,
    pub b2: Vec<f64>,
}
