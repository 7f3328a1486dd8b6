//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use risuav::beamforming::{update_link, LinkData, PhaseSchedule};
use risuav::channel::{Point, Scenario};
use risuav::conic::Tolerances;
use risuav::linalg::CVector;
use risuav::power::PowerSchedule;
use risuav::trajectory::{FrozenChannelData, TrajectoryPlan};
use risuav::{ChannelRealization, Design};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, k: usize, scale: f64) -> CVector {
    CVector::from_iterator(k, (0..k).map(|_| gaussian(rng) * scale))
}

/// Unit-modulus vector of length `k` with a trailing 1.
pub fn random_phases<R: Rng>(rng: &mut R, k: usize) -> CVector {
    CVector::from_iterator(
        k,
        (0..k).map(|i| {
            if i + 1 == k {
                c(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, rng.gen_range(0.0..TAU))
            }
        }),
    )
}

// ---------- worst-case CSI error ----------

/// `|(hbar + dh)^H (d o v)|^2` evaluated entry by entry.
pub fn gain_with_error(hbar: &CVector, diag: &CVector, v: &CVector, dh: &CVector) -> f64 {
    let mut z = c(0.0, 0.0);
    for i in 0..hbar.len() {
        z += (hbar[i] + dh[i]).conj() * diag[i] * v[i];
    }
    z.norm_sqr()
}

fn on_sphere<R: Rng>(rng: &mut R, k: usize, eps: f64) -> CVector {
    let x = gaussian_vec(rng, k, 1.0);
    let n = x.norm();
    x.map(|z| z * (eps / n))
}

/// Largest gain over `samples` errors drawn uniformly on the radius-`eps` sphere.
pub fn sampled_worst_gain<R: Rng>(
    rng: &mut R,
    hbar: &CVector,
    diag: &CVector,
    v: &CVector,
    eps: f64,
    samples: usize,
) -> f64 {
    (0..samples)
        .map(|_| gain_with_error(hbar, diag, v, &on_sphere(rng, hbar.len(), eps)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Projected gradient ascent on the sphere from a random start.
pub fn ascent_worst_gain<R: Rng>(rng: &mut R, hbar: &CVector, diag: &CVector, v: &CVector, eps: f64) -> f64 {
    let k = hbar.len();
    let cvec = CVector::from_iterator(k, (0..k).map(|i| diag[i] * v[i]));
    let c2 = cvec.norm_squared();
    if c2 == 0.0 || eps == 0.0 {
        return gain_with_error(hbar, diag, v, &CVector::zeros(k));
    }
    let mut dh = on_sphere(rng, k, eps);
    let mut value = gain_with_error(hbar, diag, v, &dh);
    for _ in 0..100_000 {
        let mut z = c(0.0, 0.0);
        for i in 0..k {
            z += (hbar[i] + dh[i]).conj() * cvec[i];
        }
        // d|z|^2 / d conj(dh) = c conj(z).
        let step = cvec.map(|ci| ci * z.conj() / c2);
        let moved = &dh + step;
        let n = moved.norm();
        dh = moved.map(|x| x * (eps / n));
        let next = gain_with_error(hbar, diag, v, &dh);
        if (next - value).abs() <= 1e-15 * next.max(1e-300) {
            value = next;
            break;
        }
        value = next;
    }
    value
}

// ---------- power control ----------

pub fn lagrangian(p: f64, a: f64, b: f64, varpi: f64) -> f64 {
    (1.0 + p * a).log2() - (1.0 + p * b).log2() - varpi * p
}

/// Maximizer of the per-slot Lagrangian over `points` evenly spaced powers in `[0, peak]`.
pub fn grid_power(a: f64, b: f64, varpi: f64, peak: f64, points: usize) -> (f64, f64) {
    let step = peak / (points - 1) as f64;
    let mut best = (0.0, lagrangian(0.0, a, b, varpi));
    for i in 1..points {
        let p = i as f64 * step;
        let value = lagrangian(p, a, b, varpi);
        if value > best.1 {
            best = (p, value);
        }
    }
    (best.0, step)
}

// ---------- beamforming ----------

/// Link objective with a nominal eavesdropper, computed from scratch.
pub fn nominal_link_objective(data: &LinkData, v: &CVector) -> f64 {
    let mut legit = c(0.0, 0.0);
    let mut eve = c(0.0, 0.0);
    for i in 0..v.len() {
        legit += data.legit[i] * v[i];
        eve += data.eve_hbar[i].conj() * data.eve_diag[i] * v[i];
    }
    data.weight * ((1.0 + legit.norm_sqr()).log2() - (1.0 + eve.norm_sqr()).log2())
}

/// Best objective over a `steps x steps` phase grid for two reflecting elements.
pub fn phase_grid_optimum(data: &LinkData, steps: usize) -> (f64, CVector) {
    assert_eq!(data.legit.len(), 3, "grid search is for M = 2");
    let mut best = (f64::NEG_INFINITY, CVector::zeros(3));
    for i in 0..steps {
        for j in 0..steps {
            let v = CVector::from_vec(vec![
                Complex64::from_polar(1.0, TAU * i as f64 / steps as f64),
                Complex64::from_polar(1.0, TAU * j as f64 / steps as f64),
                c(1.0, 0.0),
            ]);
            let value = nominal_link_objective(data, &v);
            if value > best.0 {
                best = (value, v);
            }
        }
    }
    best
}

/// Repeats the SDP-plus-randomization update from all-ones phases until the
/// objective stops moving.
pub fn iterate_link(data: &LinkData, samples: usize, seed: u64, rounds: usize) -> CVector {
    let tol = Tolerances::default();
    let mut v = CVector::from_element(data.legit.len(), c(1.0, 0.0));
    let mut value = data.objective(&v);
    for r in 0..rounds {
        let update = update_link(data, &v, samples, seed.wrapping_add(r as u64), &tol).expect("link update");
        let next = data.objective(&update.v);
        v = update.v;
        if next - value <= 1e-9 {
            break;
        }
        value = next;
    }
    v
}

// ---------- end-to-end secrecy ----------

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn ura(scenario: &Scenario, node: [f64; 3]) -> Vec<Complex64> {
    let g = &scenario.geometry;
    let ris = [g.ris[0], g.ris[1], g.ris_altitude];
    let d = dist(node, ris);
    let (mx, mz) = (scenario.ris.columns, scenario.ris.rows);
    let mut out = Vec::new();
    for iz in 0..mz {
        for ix in 0..mx {
            let phase = -2.0 * PI
                * scenario.ris.spacing
                * (iz as f64 * (node[2] - ris[2]) / d + ix as f64 * (ris[0] - node[0]) / d);
            out.push(Complex64::from_polar(1.0, phase));
        }
    }
    out
}

fn rician(beta: f64, los: Complex64, nlos: Complex64) -> Complex64 {
    los * (beta / (1.0 + beta)).sqrt() + nlos * (1.0 / (1.0 + beta)).sqrt()
}

/// Per-slot `[|g_G1|^2, worst |g_E1|^2, |g_G2|^2, worst |g_E2|^2]`, written out
/// from the sum forms of the composite channels.
pub fn independent_gains(
    trajectory: &TrajectoryPlan,
    phases: &PhaseSchedule,
    r: &ChannelRealization,
    s: &Scenario,
    delta_a: f64,
) -> Vec<[f64; 4]> {
    let g = &s.geometry;
    let p = &s.propagation;
    let m = s.elements();
    let user = [g.ground_user[0], g.ground_user[1], 0.0];
    let eve = [g.eavesdropper[0], g.eavesdropper[1], 0.0];
    let ris = [g.ris[0], g.ris[1], g.ris_altitude];
    let d_rg = dist(ris, user);
    let d_re = dist(ris, eve);
    let d_ge = dist(user, eve);
    let rho = p.reference_gain;
    let (alpha, kappa) = (p.reflected_exponent, p.direct_exponent);
    let eps1 = delta_a * r.hbar_e1.norm();
    let eps2 = delta_a * r.hbar_e2.norm();
    let mut out = Vec::new();
    for n in 0..trajectory.len() {
        let q = trajectory.q[n];
        let uav = [q[0], q[1], g.uav_altitude];
        let d_ur = dist(uav, ris);
        let l_urg = (rho * (d_ur * d_rg).powf(-alpha)).sqrt();
        let l_ure = (rho * (d_ur * d_re).powf(-alpha)).sqrt();
        let l_gre = (rho * (d_rg * d_re).powf(-alpha)).sqrt();
        let l_ug = (rho * dist(uav, user).powf(-kappa)).sqrt();
        let l_ue = (rho * dist(uav, eve).powf(-kappa)).sqrt();
        let l_ge = (rho * d_ge.powf(-p.ground_exponent)).sqrt();
        let steer = ura(s, uav);
        let vd = &phases.down[n];
        let vu = &phases.up[n];

        let mut g1 = r.h_ug * l_ug;
        let mut g2 = r.h_gu * l_ug;
        let mut e1 = r.h_ue * l_ue;
        let mut e2 = r.h_ge * l_ge;
        let (mut c1, mut c2) = (l_ue * l_ue, l_ge * l_ge);
        for i in 0..m {
            let h_ur = rician(s.fading.uav_ris, steer[i], r.nlos_ur[i]);
            let h_ru = rician(s.fading.ris_uav, steer[i], r.nlos_ru[i]);
            g1 += l_urg * r.h_rg[i].conj() * vd[i] * h_ur;
            g2 += l_urg * h_ru.conj() * vu[i] * r.h_gr[i];
            e1 += l_ure * r.h_re[i].conj() * vd[i] * h_ur;
            e2 += l_gre * r.h_re[i].conj() * vu[i] * r.h_gr[i];
            c1 += (l_ure * h_ur).norm_sqr();
            c2 += (l_gre * r.h_gr[i]).norm_sqr();
        }
        out.push([
            g1.norm_sqr(),
            (e1.norm() + eps1 * c1.sqrt()).powi(2),
            g2.norm_sqr(),
            (e2.norm() + eps2 * c2.sqrt()).powi(2),
        ]);
    }
    out
}

/// Per-slot clamped DL and UL secrecy rates and their weighted average.
pub fn independent_secrecy(design: &Design, r: &ChannelRealization, s: &Scenario) -> (Vec<f64>, Vec<f64>, f64) {
    let noise = s.propagation.noise_power;
    let gains = independent_gains(&design.trajectory, &design.phases, r, s, s.csi.delta_a);
    let (mut down, mut up) = (Vec::new(), Vec::new());
    for (n, [g1, e1, g2, e2]) in gains.into_iter().enumerate() {
        let pd = design.powers.p[n];
        let pu = design.powers.g[n];
        let sd = (1.0 + pd * g1 / noise).log2() - (1.0 + pd * e1 / noise).log2();
        let su = (1.0 + pu * g2 / noise).log2() - (1.0 + pu * e2 / noise).log2();
        down.push(sd.max(0.0));
        up.push(su.max(0.0));
    }
    let w = s.power.dl_weight;
    let avg = down.iter().zip(&up).map(|(a, b)| w * a + (1.0 - w) * b).sum::<f64>() / down.len() as f64;
    (down, up, avg)
}

// ---------- three-slot trajectory instance ----------

/// A three-slot instance whose legitimate and eavesdropper coefficients share
/// one phase, so every slack is tight at the best value for the objective.
pub struct ThreeSlot {
    pub scenario: Scenario,
    pub frozen: FrozenChannelData,
    pub previous: TrajectoryPlan,
    pub powers: PowerSchedule,
    pub pin: Point,
}

pub fn three_slot_instance(phase: f64, reflected: f64, eve_scale: f64) -> ThreeSlot {
    let mut scenario = Scenario::desk();
    scenario.flight.period = 3.0 * scenario.flight.slot_length;
    scenario.geometry.start = [-10.0, 118.0];
    scenario.geometry.end = [10.0, 122.0];
    let rot = Complex64::from_polar(1.0, phase);
    let pair = |a: f64, b: f64| [rot * a, rot * b];
    let frozen = FrozenChannelData {
        h_ur_prev: Vec::new(),
        h_ru_prev: Vec::new(),
        h_e1op_prev: Vec::new(),
        c_g1: vec![pair(1.0, reflected); 3],
        c_g2: vec![pair(0.8, reflected); 3],
        c_e: vec![pair(eve_scale, 0.5 * reflected); 3],
        eve_ul_rate: vec![0.05; 3],
    };
    let previous = TrajectoryPlan {
        q: vec![scenario.geometry.start, [2.0, 112.0], scenario.geometry.end],
    };
    ThreeSlot {
        powers: PowerSchedule {
            p: vec![0.1; 3],
            g: vec![0.1; 3],
            varpi1: 0.0,
            varpi2: 0.0,
        },
        pin: scenario.geometry.end,
        scenario,
        frozen,
        previous,
    }
}

impl ThreeSlot {
    /// Surrogate (bps/Hz) with the middle waypoint at `q` and every slack at its
    /// tightest value, or `None` when `q` violates a constraint.
    pub fn tight_surrogate(&self, q: Point) -> Option<f64> {
        let s = &self.scenario;
        let g = &s.geometry;
        let p = &s.propagation;
        let (kappa, alpha) = (p.direct_exponent, p.reflected_exponent);
        let d = s.max_step();
        let path = [self.previous.q[0], q, self.pin];
        for w in path.windows(2) {
            if ((w[0][0] - w[1][0]).powi(2) + (w[0][1] - w[1][1]).powi(2)).sqrt() > d {
                return None;
            }
        }
        let w = s.power.dl_weight;
        let h = g.uav_altitude;
        let dz = h - g.ris_altitude;
        let sq = |a: Point, b: Point| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        let mut total = 0.0;
        for n in 0..3 {
            let q0 = self.previous.q[n];
            let qn = path[n];
            let dg0 = sq(q0, g.ground_user) + h * h;
            let dr0 = sq(q0, g.ris) + dz * dz;
            let de0 = sq(q0, g.eavesdropper) + h * h;
            let u0 = dg0.powf(-kappa / 4.0);
            let e0 = dr0.powf(-alpha / 4.0);
            let s0 = de0.powf(-kappa / 4.0);
            // Largest u with d_G^2 below the tangent of u^(-4/kappa) at u0.
            let u = u0 * (1.0 + kappa / 4.0 * (1.0 - (sq(qn, g.ground_user) + h * h) / dg0));
            let e = e0 * (1.0 + alpha / 4.0 * (1.0 - (sq(qn, g.ris) + dz * dz) / dr0));
            if u < 0.0 || e < 0.0 {
                return None;
            }
            // Smallest s, t with the distance powers above their values at the
            // tangent lower bound of the squared distance.
            let tangent = |w: Point, base: f64| {
                base + 2.0 * (q0[0] - w[0]) * (qn[0] - q0[0]) + 2.0 * (q0[1] - w[1]) * (qn[1] - q0[1])
            };
            let le = tangent(g.eavesdropper, de0);
            let lr = tangent(g.ris, dr0);
            if le <= 0.0 || lr <= 0.0 {
                return None;
            }
            let sv = le.powf(-kappa / 4.0);
            let tv = lr.powf(-alpha / 4.0);
            if sv > h.powf(-kappa / 2.0) || tv > dz.powf(-alpha / 2.0) {
                return None;
            }
            let amp_d = (p.reference_gain * self.powers.p[n] / p.noise_power).sqrt();
            let amp_u = (p.reference_gain * self.powers.g[n] / p.noise_power).sqrt();
            let minorant = |cf: [Complex64; 2], amp: f64| {
                let z0 = (cf[0] * u0 + cf[1] * e0) * amp;
                let z = (cf[0] * u + cf[1] * e) * amp;
                2.0 * (z0.conj() * z).re - z0.norm_sqr()
            };
            let rd = minorant(self.frozen.c_g1[n], amp_d);
            let ru = minorant(self.frozen.c_g2[n], amp_u);
            if rd <= -1.0 || ru <= -1.0 {
                return None;
            }
            let ce = self.frozen.c_e[n];
            let zeta0 = ((ce[0] * s0 + ce[1] * e0) * amp_d).norm_sqr();
            let zeta = ((ce[0] * sv + ce[1] * tv) * amp_d).norm_sqr();
            let eve = zeta0.ln_1p() + (zeta - zeta0) / (1.0 + zeta0);
            total += w * (rd.ln_1p() - eve) / LN_2 + (1.0 - w) * (ru.ln_1p() / LN_2 - self.frozen.eve_ul_rate[n]);
        }
        Some(total / 3.0)
    }

    /// Best tight surrogate over a `steps x steps` grid covering the reachable box of the middle waypoint.
    pub fn grid_optimum(&self, steps: usize) -> (f64, Point) {
        let d = self.scenario.max_step();
        let a = self.previous.q[0];
        let mut best = (f64::NEG_INFINITY, a);
        for i in 0..steps {
            for j in 0..steps {
                let q = [
                    a[0] - d + 2.0 * d * i as f64 / (steps - 1) as f64,
                    a[1] - d + 2.0 * d * j as f64 / (steps - 1) as f64,
                ];
                if let Some(v) = self.tight_surrogate(q) {
                    if v > best.0 {
                        best = (v, q);
                    }
                }
            }
        }
        best
    }
}
