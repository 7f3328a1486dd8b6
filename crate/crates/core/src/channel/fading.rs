//! Seeded Rician small-scale fading draws.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ris_response, steering_vector, Point, Scenario};
use crate::linalg::CVector;

/// One Monte-Carlo draw of every small-scale fading component.
///
/// NLoS parts are fixed for the whole flight. The UAV-RIS vectors are
/// rebuilt per slot from their stored NLoS part and the LoS steering vector at
/// the current UAV position. The eavesdropper estimates `hbar_e1`, `hbar_e2`
/// are `[h_RE; conj(h_UE)]` and `[h_RE; conj(h_GE)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub seed: u64,
    pub h_ug: Complex64,
    pub h_ue: Complex64,
    pub h_gu: Complex64,
    pub h_ge: Complex64,
    pub h_rg: CVector,
    pub h_re: CVector,
    pub h_gr: CVector,
    pub nlos_ur: CVector,
    pub nlos_ru: CVector,
    pub hbar_e1: CVector,
    pub hbar_e2: CVector,
    beta_ur: f64,
    beta_ru: f64,
}

/// Weights `(sqrt(b / (1 + b)), sqrt(1 / (1 + b)))` of the LoS and NLoS parts.
pub fn rician_weights(beta: f64) -> (f64, f64) {
    if beta.is_infinite() {
        (1.0, 0.0)
    } else {
        ((beta / (1.0 + beta)).sqrt(), (1.0 / (1.0 + beta)).sqrt())
    }
}

fn mix(beta: f64, los: Complex64, nlos: Complex64) -> Complex64 {
    let (a, b) = rician_weights(beta);
    los * a + nlos * b
}

fn mix_vec(beta: f64, los: &CVector, nlos: &CVector) -> CVector {
    let (a, b) = rician_weights(beta);
    los.scale(a) + nlos.scale(b)
}

/// Zero-mean unit-variance circularly-symmetric complex Gaussian.
pub fn cscg<R: rand::Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn cscg_vec<R: rand::Rng + ?Sized>(rng: &mut R, len: usize) -> CVector {
    CVector::from_iterator(len, (0..len).map(|_| cscg(rng)))
}

pub fn sample_realization(scenario: &Scenario, seed: u64) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = scenario.elements();
    let f = &scenario.fading;
    let g = &scenario.geometry;
    let one = Complex64::new(1.0, 0.0);

    // Draw order is part of the reproducibility contract.
    let nlos_ur = cscg_vec(&mut rng, m);
    let nlos_ru = cscg_vec(&mut rng, m);
    let nlos_rg = cscg_vec(&mut rng, m);
    let nlos_re = cscg_vec(&mut rng, m);
    let nlos_gr = cscg_vec(&mut rng, m);
    let nlos_ug = cscg(&mut rng);
    let nlos_ue = cscg(&mut rng);
    let nlos_gu = cscg(&mut rng);
    let nlos_ge = cscg(&mut rng);

    let user = ris_response([g.ground_user[0], g.ground_user[1], 0.0], scenario);
    let eve = ris_response([g.eavesdropper[0], g.eavesdropper[1], 0.0], scenario);

    let h_rg = mix_vec(f.ris_user, &user, &nlos_rg);
    let h_re = mix_vec(f.ris_eve, &eve, &nlos_re);
    let h_gr = mix_vec(f.user_ris, &user, &nlos_gr);
    let h_ug = mix(f.uav_user, one, nlos_ug);
    let h_ue = mix(f.uav_eve, one, nlos_ue);
    let h_gu = mix(f.user_uav, one, nlos_gu);
    let h_ge = mix(f.user_eve, one, nlos_ge);

    let append = |v: &CVector, last: Complex64| {
        let mut out = CVector::zeros(m + 1);
        out.rows_mut(0, m).copy_from(v);
        out[m] = last;
        out
    };

    ChannelRealization {
        seed,
        h_ug,
        h_ue,
        h_gu,
        h_ge,
        hbar_e1: append(&h_re, h_ue.conj()),
        hbar_e2: append(&h_re, h_ge.conj()),
        h_rg,
        h_re,
        h_gr,
        nlos_ur,
        nlos_ru,
        beta_ur: f.uav_ris,
        beta_ru: f.ris_uav,
    }
}

impl ChannelRealization {
    /// UAV -> RIS small-scale vector with the UAV at `q`.
    pub fn uav_ris(&self, q: Point, scenario: &Scenario) -> CVector {
        mix_vec(self.beta_ur, &steering_vector(q, scenario), &self.nlos_ur)
    }

    /// RIS -> UAV small-scale vector with the UAV at `q`.
    pub fn ris_uav(&self, q: Point, scenario: &Scenario) -> CVector {
        mix_vec(self.beta_ru, &steering_vector(q, scenario), &self.nlos_ru)
    }

    /// Number of RIS elements.
    pub fn elements(&self) -> usize {
        self.h_rg.len()
    }
}
