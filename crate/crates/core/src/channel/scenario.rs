//! Static experiment configuration and its validation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a dB ratio to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Positions of the static nodes and the flight endpoints, in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub ground_user: [f64; 2],
    pub eavesdropper: [f64; 2],
    pub ris: [f64; 2],
    pub uav_altitude: f64,
    pub ris_altitude: f64,
    pub start: [f64; 2],
    pub end: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flight {
    /// Flight period T in seconds.
    pub period: f64,
    /// Slot length in seconds.
    pub slot_length: f64,
    /// Maximum horizontal speed in m/s.
    pub max_speed: f64,
}

/// Uniform rectangular array in the x-z plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisArray {
    pub columns: usize,
    pub rows: usize,
    /// Element spacing over wavelength.
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Propagation {
    /// Linear path gain at the 1 m reference distance.
    pub reference_gain: f64,
    /// Exponent of the reflected (via RIS) links.
    pub reflected_exponent: f64,
    /// Exponent of the UAV direct links.
    pub direct_exponent: f64,
    /// Exponent of the ground-to-ground link.
    pub ground_exponent: f64,
    /// Noise power in watts.
    pub noise_power: f64,
}

/// Power limits in watts and the DL share of each slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerBudget {
    pub dl_average: f64,
    pub dl_peak: f64,
    pub ul_average: f64,
    pub ul_peak: f64,
    pub dl_weight: f64,
}

/// Linear Rician factors of every small-scale link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicianFactors {
    pub uav_ris: f64,
    pub ris_user: f64,
    pub ris_eve: f64,
    pub uav_user: f64,
    pub uav_eve: f64,
    pub user_uav: f64,
    pub ris_uav: f64,
    pub user_ris: f64,
    pub user_eve: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsiSettings {
    /// Maximum normalized estimation error of the eavesdropper channels.
    pub delta_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub randomization_samples: usize,
}

/// Full experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub geometry: Geometry,
    pub flight: Flight,
    pub ris: RisArray,
    pub propagation: Propagation,
    pub power: PowerBudget,
    pub fading: RicianFactors,
    pub csi: CsiSettings,
    pub algorithm: AlgorithmSettings,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::paper()
    }
}

impl Scenario {
    /// The published parameter set: T = 124 s (N = 310) and a 6x5 RIS.
    pub fn paper() -> Self {
        let p_avg = dbm_to_watts(20.0);
        let g_avg = dbm_to_watts(20.0);
        let strong = db_to_linear(10.0);
        let weak = db_to_linear(3.0);
        Scenario {
            geometry: Geometry {
                ground_user: [0.0, 120.0],
                eavesdropper: [200.0, 150.0],
                ris: [0.0, 0.0],
                uav_altitude: 100.0,
                ris_altitude: 40.0,
                start: [-500.0, 20.0],
                end: [500.0, 20.0],
            },
            flight: Flight {
                period: 124.0,
                slot_length: 0.4,
                max_speed: 30.0,
            },
            ris: RisArray {
                columns: 6,
                rows: 5,
                spacing: 0.5,
            },
            propagation: Propagation {
                reference_gain: db_to_linear(-30.0),
                reflected_exponent: 2.2,
                direct_exponent: 3.3,
                ground_exponent: 3.4,
                noise_power: dbm_to_watts(-80.0),
            },
            power: PowerBudget {
                dl_average: p_avg,
                dl_peak: 4.0 * p_avg,
                ul_average: g_avg,
                ul_peak: 4.0 * g_avg,
                dl_weight: 0.5,
            },
            fading: RicianFactors {
                uav_ris: weak,
                ris_user: weak,
                ris_eve: weak,
                uav_user: strong,
                uav_eve: strong,
                user_uav: strong,
                ris_uav: weak,
                user_ris: weak,
                // The ground-to-eavesdropper link is Rayleigh.
                user_eve: 0.0,
            },
            csi: CsiSettings {
                delta_a: 0.5f64.sqrt(),
            },
            algorithm: AlgorithmSettings {
                tolerance: 1e-3,
                max_iterations: 40,
                randomization_samples: 100,
            },
        }
    }

    /// Minutes-scale preset: T = 16 s (N = 40), a 4x2 RIS and flight
    /// endpoints pulled in to +-150 m so the detour over the user fits.
    pub fn desk() -> Self {
        let mut s = Scenario::paper();
        s.flight.period = 16.0;
        s.ris.columns = 4;
        s.ris.rows = 2;
        s.geometry.start = [-150.0, 20.0];
        s.geometry.end = [150.0, 20.0];
        s
    }

    /// Number of time slots N = T / slot length.
    pub fn slots(&self) -> usize {
        (self.flight.period / self.flight.slot_length).round() as usize
    }

    /// Number of RIS elements M.
    pub fn elements(&self) -> usize {
        self.ris.columns * self.ris.rows
    }

    /// Maximum distance D flown within one slot.
    pub fn max_step(&self) -> f64 {
        self.flight.max_speed * self.flight.slot_length
    }

    /// Sets T and keeps the slot length.
    pub fn with_period(mut self, period: f64) -> Self {
        self.flight.period = period;
        self
    }

    /// Sets the normalized error bound from its square.
    pub fn with_delta_a2(mut self, delta_a2: f64) -> Self {
        self.csi.delta_a = delta_a2.max(0.0).sqrt();
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn finite2(field: &str, p: [f64; 2]) -> Result<()> {
            if p.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(Error::invalid(field, "coordinates must be finite"))
            }
        }
        fn positive(field: &str, x: f64) -> Result<()> {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be finite and > 0, got {x}")))
            }
        }
        fn nonneg(field: &str, x: f64) -> Result<()> {
            if x >= 0.0 && !x.is_nan() {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be >= 0, got {x}")))
            }
        }

        let g = &self.geometry;
        finite2("geometry.ground_user", g.ground_user)?;
        finite2("geometry.eavesdropper", g.eavesdropper)?;
        finite2("geometry.ris", g.ris)?;
        finite2("geometry.start", g.start)?;
        finite2("geometry.end", g.end)?;
        positive("geometry.ris_altitude", g.ris_altitude)?;
        positive("geometry.uav_altitude", g.uav_altitude)?;
        if g.uav_altitude <= g.ris_altitude {
            return Err(Error::invalid(
                "geometry.uav_altitude",
                "UAV must fly above the RIS",
            ));
        }
        if dist2(g.ground_user, g.eavesdropper) <= 0.0 {
            return Err(Error::invalid(
                "geometry.eavesdropper",
                "eavesdropper coincides with the ground user",
            ));
        }

        let f = &self.flight;
        positive("flight.slot_length", f.slot_length)?;
        positive("flight.period", f.period)?;
        positive("flight.max_speed", f.max_speed)?;
        let n = self.slots();
        if n < 1 {
            return Err(Error::invalid("flight.period", "fewer than one slot"));
        }
        if (n as f64 * f.slot_length - f.period).abs() > 1e-9 * f.period.max(1.0) {
            return Err(Error::invalid(
                "flight.period",
                format!("period {} is not a multiple of the slot length {}", f.period, f.slot_length),
            ));
        }

        if self.ris.columns < 1 {
            return Err(Error::invalid("ris.columns", "need at least one column"));
        }
        if self.ris.rows < 1 {
            return Err(Error::invalid("ris.rows", "need at least one row"));
        }
        positive("ris.spacing", self.ris.spacing)?;

        let p = &self.propagation;
        positive("propagation.reference_gain", p.reference_gain)?;
        positive("propagation.reflected_exponent", p.reflected_exponent)?;
        positive("propagation.direct_exponent", p.direct_exponent)?;
        positive("propagation.ground_exponent", p.ground_exponent)?;
        positive("propagation.noise_power", p.noise_power)?;

        let b = &self.power;
        nonneg("power.dl_average", b.dl_average)?;
        nonneg("power.ul_average", b.ul_average)?;
        if !(b.dl_peak >= b.dl_average) || !b.dl_peak.is_finite() {
            return Err(Error::invalid("power.dl_peak", "peak must be finite and >= average"));
        }
        if !(b.ul_peak >= b.ul_average) || !b.ul_peak.is_finite() {
            return Err(Error::invalid("power.ul_peak", "peak must be finite and >= average"));
        }
        if !(0.0..=1.0).contains(&b.dl_weight) {
            return Err(Error::invalid(
                "power.dl_weight",
                format!("must lie in [0, 1], got {}", b.dl_weight),
            ));
        }

        let r = &self.fading;
        for (field, value) in [
            ("fading.uav_ris", r.uav_ris),
            ("fading.ris_user", r.ris_user),
            ("fading.ris_eve", r.ris_eve),
            ("fading.uav_user", r.uav_user),
            ("fading.uav_eve", r.uav_eve),
            ("fading.user_uav", r.user_uav),
            ("fading.ris_uav", r.ris_uav),
            ("fading.user_ris", r.user_ris),
            ("fading.user_eve", r.user_eve),
        ] {
            nonneg(field, value)?;
        }

        nonneg("csi.delta_a", self.csi.delta_a)?;
        if !self.csi.delta_a.is_finite() {
            return Err(Error::invalid("csi.delta_a", "must be finite"));
        }

        let a = &self.algorithm;
        positive("algorithm.tolerance", a.tolerance)?;
        if a.max_iterations < 1 {
            return Err(Error::invalid("algorithm.max_iterations", "must be >= 1"));
        }
        if a.randomization_samples < 1 {
            return Err(Error::invalid("algorithm.randomization_samples", "must be >= 1"));
        }

        // The preset trajectory must be able to reach the user and still make it out.
        let d = self.max_step();
        let inbound = steps_to_cover(dist2(g.start, g.ground_user).sqrt(), d);
        let outbound = steps_to_cover(dist2(g.ground_user, g.end).sqrt(), d).saturating_sub(1);
        if inbound + outbound + 1 > n {
            return Err(Error::invalid(
                "flight.period",
                format!(
                    "{n} slots cannot cover the detour start -> user -> end \
                     ({inbound} inbound + {outbound} outbound slots, step {d} m)"
                ),
            ));
        }
        Ok(())
    }
}

/// Number of full steps of length `step` needed to travel `distance`.
pub(crate) fn steps_to_cover(distance: f64, step: f64) -> usize {
    if distance <= 0.0 {
        0
    } else {
        (distance / step - 1e-12).ceil().max(0.0) as usize
    }
}

pub(crate) fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}
