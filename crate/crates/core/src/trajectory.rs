//! One SCA step of the joint-slot trajectory program.
//!
//! Per slot the program carries distance slacks `u <= d_UG^(-kappa/2)`,
//! `e <= d_UR^(-alpha/2)` for the legitimate links and `s >= d_UE^(-kappa/2)`,
//! `t >= d_UR^(-alpha/2)` for the eavesdropper, an eavesdropper SNR bound
//! `zeta`, legitimate SNR slacks `r_d`, `r_u` and their log epigraphs. Every
//! nonconvex term is replaced by its first-order bound at the incoming
//! trajectory, where all slacks are tight.
//!
//! Internally positions are divided by the UAV altitude and each slack by
//! its value at the linearization point, so all program data are of order one.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::beamforming::PhaseSchedule;
use crate::channel::{dist2, rate, ChannelRealization, Point, Scenario, SlotChannels, StaticDistances};
use crate::conic::{self, ConicProgram, LinExpr, Tolerances};
use crate::csi::{worst_case_error, UncertaintyModel};
use crate::linalg::{CMatrix, CVector};
use crate::power::PowerSchedule;
use crate::{Error, Result};

/// Horizontal UAV positions, one per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan {
    pub q: Vec<Point>,
}

impl TrajectoryPlan {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Speed in m/s over each slot, the last one toward the final position.
    pub fn speeds(&self, scenario: &Scenario) -> Vec<f64> {
        let dt = scenario.flight.slot_length;
        let end = scenario.geometry.end;
        (0..self.q.len())
            .map(|n| {
                let next = if n + 1 < self.q.len() { self.q[n + 1] } else { end };
                dist2(self.q[n], next).sqrt() / dt
            })
            .collect()
    }

    /// Largest violation, in meters, of the start, step and end constraints.
    pub fn mobility_violation(&self, scenario: &Scenario) -> f64 {
        let d = scenario.max_step();
        let mut worst = dist2(self.q[0], scenario.geometry.start).sqrt();
        for w in self.q.windows(2) {
            worst = worst.max(dist2(w[0], w[1]).sqrt() - d);
        }
        let last = *self.q.last().expect("empty trajectory");
        worst.max(dist2(last, scenario.geometry.end).sqrt() - d).max(0.0)
    }

    /// Pointwise convex combination `lambda self + (1 - lambda) other`.
    pub fn blend(&self, other: &TrajectoryPlan, lambda: f64) -> TrajectoryPlan {
        TrajectoryPlan {
            q: self
                .q
                .iter()
                .zip(&other.q)
                .map(|(a, b)| {
                    [
                        lambda * a[0] + (1.0 - lambda) * b[0],
                        lambda * a[1] + (1.0 - lambda) * b[1],
                    ]
                })
                .collect(),
        }
    }
}

/// Channel terms frozen at the previous trajectory.
///
/// With `u, e, s, t` the distance powers of the current slot, the legitimate
/// SNRs are `rho gamma |c_1 u + c_2 e|^2` and the eavesdropper DL SNR is
/// `rho gamma |c_E1 s + c_E2 t|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenChannelData {
    pub h_ur_prev: Vec<CVector>,
    pub h_ru_prev: Vec<CVector>,
    /// `hbar_E1 + dh_op`, the worst-case DL eavesdropper vector at the previous trajectory.
    pub h_e1op_prev: Vec<CVector>,
    pub c_g1: Vec<[Complex64; 2]>,
    pub c_g2: Vec<[Complex64; 2]>,
    pub c_e: Vec<[Complex64; 2]>,
    /// Worst-case UL eavesdropper rate, which does not depend on the UAV position.
    pub eve_ul_rate: Vec<f64>,
}

fn quad_matrix(c: &[Complex64; 2]) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| c[i].conj() * c[j])
}

impl FrozenChannelData {
    /// `H_QG` with `[u, e] H_QG [u, e]^T = |c_1 u + c_2 e|^2`.
    pub fn h_qg(&self, n: usize) -> CMatrix {
        quad_matrix(&self.c_g1[n])
    }

    pub fn h_gq(&self, n: usize) -> CMatrix {
        quad_matrix(&self.c_g2[n])
    }

    pub fn h_qe(&self, n: usize) -> CMatrix {
        quad_matrix(&self.c_e[n])
    }
}

pub fn freeze_channels(
    realization: &ChannelRealization,
    previous: &TrajectoryPlan,
    phases: &PhaseSchedule,
    powers: &PowerSchedule,
    model: &UncertaintyModel,
    scenario: &Scenario,
) -> FrozenChannelData {
    let alpha = scenario.propagation.reflected_exponent;
    let fixed = StaticDistances::of(scenario);
    let rg = fixed.ris_user.powf(-alpha / 2.0);
    let re = fixed.ris_eve.powf(-alpha / 2.0);
    let m = scenario.elements();
    let n = previous.len();
    let mut out = FrozenChannelData {
        h_ur_prev: Vec::with_capacity(n),
        h_ru_prev: Vec::with_capacity(n),
        h_e1op_prev: Vec::with_capacity(n),
        c_g1: Vec::with_capacity(n),
        c_g2: Vec::with_capacity(n),
        c_e: Vec::with_capacity(n),
        eve_ul_rate: Vec::with_capacity(n),
    };
    for k in 0..n {
        let q = previous.q[k];
        let slot = SlotChannels::at(realization, q, scenario);
        let h_ur = realization.uav_ris(q, scenario);
        let h_ru = realization.ris_uav(q, scenario);
        let vd = &phases.down[k];
        let vu = &phases.up[k];
        let wc = worst_case_error(&realization.hbar_e1, &slot.d_e1, vd, model.eps1);
        let hop = &realization.hbar_e1 + &wc.delta_h;

        let mut refl_g1 = Complex64::new(0.0, 0.0);
        let mut refl_g2 = Complex64::new(0.0, 0.0);
        let mut refl_e = Complex64::new(0.0, 0.0);
        for i in 0..m {
            refl_g1 += realization.h_rg[i].conj() * h_ur[i] * vd[i];
            refl_g2 += h_ru[i].conj() * realization.h_gr[i] * vu[i];
            refl_e += hop[i].conj() * h_ur[i] * vd[i];
        }
        out.c_g1.push([realization.h_ug, refl_g1 * rg]);
        out.c_g2.push([realization.h_gu, refl_g2 * rg]);
        out.c_e.push([hop[m].conj(), refl_e * re]);

        let ul_gain = crate::csi::worst_case_gain(&realization.hbar_e2, &slot.d_e2, vu, model.eps2);
        out.eve_ul_rate.push(rate(powers.g[k], ul_gain, scenario.propagation.noise_power));
        out.h_ur_prev.push(h_ur);
        out.h_ru_prev.push(h_ru);
        out.h_e1op_prev.push(hop);
    }
    out
}

/// Slack values at the solution and the points they were linearized at.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySlacks {
    pub u: Vec<f64>,
    pub e: Vec<f64>,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub zeta: Vec<f64>,
    pub rd: Vec<f64>,
    pub ru: Vec<f64>,
    pub q0: Vec<Point>,
    pub u0: Vec<f64>,
    pub e0: Vec<f64>,
    pub s0: Vec<f64>,
    pub t0: Vec<f64>,
    pub zeta0: Vec<f64>,
}

/// Per-slot constants of the linearized program.
#[derive(Debug, Clone, PartialEq)]
struct SlotConstants {
    q0: Point,
    /// Squared distances to the user, the RIS and the eavesdropper at `q0`.
    dg2: f64,
    dr2: f64,
    de2: f64,
    u0: f64,
    e0: f64,
    s0: f64,
    t0: f64,
    /// Legitimate DL coefficients on the normalized slacks.
    kd: [Complex64; 2],
    ku: [Complex64; 2],
    ke: [Complex64; 2],
    zeta0: f64,
    eve_ul_rate: f64,
}

#[derive(Debug, Clone, Copy)]
struct SlotVars {
    x: usize,
    y: usize,
    u: usize,
    e: usize,
    s: usize,
    t: usize,
    zeta: usize,
    rd: usize,
    ru: usize,
    tau_d: usize,
    tau_u: usize,
    sig_s: usize,
    sig_t: usize,
}

/// The linearized trajectory program and the data needed to read it back.
#[derive(Debug, Clone)]
pub struct TrajectoryProgram {
    pub program: ConicProgram,
    vars: Vec<SlotVars>,
    consts: Vec<SlotConstants>,
    scale: f64,
    weight: f64,
}

fn slot_constants(
    frozen: &FrozenChannelData,
    n: usize,
    q0: Point,
    powers: &PowerSchedule,
    scenario: &Scenario,
) -> SlotConstants {
    let g = &scenario.geometry;
    let p = &scenario.propagation;
    let (kappa, alpha) = (p.direct_exponent, p.reflected_exponent);
    let dg2 = dist2(q0, g.ground_user) + g.uav_altitude.powi(2);
    let dr2 = dist2(q0, g.ris) + (g.uav_altitude - g.ris_altitude).powi(2);
    let de2 = dist2(q0, g.eavesdropper) + g.uav_altitude.powi(2);
    let u0 = dg2.powf(-kappa / 4.0);
    let e0 = dr2.powf(-alpha / 4.0);
    let s0 = de2.powf(-kappa / 4.0);
    let t0 = e0;
    let amp_d = (p.reference_gain * powers.p[n] / p.noise_power).sqrt();
    let amp_u = (p.reference_gain * powers.g[n] / p.noise_power).sqrt();
    let cg1 = frozen.c_g1[n];
    let cg2 = frozen.c_g2[n];
    let ce = frozen.c_e[n];
    let ke = [ce[0] * amp_d * s0, ce[1] * amp_d * t0];
    SlotConstants {
        q0,
        dg2,
        dr2,
        de2,
        u0,
        e0,
        s0,
        t0,
        kd: [cg1[0] * amp_d * u0, cg1[1] * amp_d * e0],
        ku: [cg2[0] * amp_u * u0, cg2[1] * amp_u * e0],
        zeta0: (ke[0] + ke[1]).norm_sqr(),
        ke,
        eve_ul_rate: frozen.eve_ul_rate[n],
    }
}

/// `2 Re(conj(z0) (k1 x1 + k2 x2)) - |z0|^2` with `z0 = k1 + k2`.
fn linearized_snr(k: &[Complex64; 2], x1: usize, x2: usize) -> LinExpr {
    let z0 = k[0] + k[1];
    let mut out = LinExpr::constant(-z0.norm_sqr());
    out.add_term(x1, 2.0 * (z0.conj() * k[0]).re);
    out.add_term(x2, 2.0 * (z0.conj() * k[1]).re);
    out
}

/// Builds the convex program linearized at `previous`.
///
/// `pin_last` additionally fixes the final waypoint.
pub fn build_trajectory_program(
    frozen: &FrozenChannelData,
    previous: &TrajectoryPlan,
    powers: &PowerSchedule,
    scenario: &Scenario,
    pin_last: Option<Point>,
) -> TrajectoryProgram {
    let g = &scenario.geometry;
    let p = &scenario.propagation;
    let (kappa, alpha) = (p.direct_exponent, p.reflected_exponent);
    let w = scenario.power.dl_weight;
    let l = g.uav_altitude;
    let step = scenario.max_step() / l;
    let n = previous.len();
    let mut program = ConicProgram::new();
    let mut vars = Vec::with_capacity(n);
    let mut consts = Vec::with_capacity(n);
    let mut objective = LinExpr::zero();
    let dz_r = g.uav_altitude - g.ris_altitude;

    for k in 0..n {
        let c = slot_constants(frozen, k, previous.q[k], powers, scenario);
        let v = SlotVars {
            x: program.add_var(),
            y: program.add_var(),
            u: program.add_var(),
            e: program.add_var(),
            s: program.add_var(),
            t: program.add_var(),
            zeta: program.add_var(),
            rd: program.add_var(),
            ru: program.add_var(),
            tau_d: program.add_var(),
            tau_u: program.add_var(),
            sig_s: program.add_var(),
            sig_t: program.add_var(),
        };
        let pos = |coord: usize, var: usize, scale: f64| {
            // (l q - w) / scale for coordinate `coord` of a fixed point `w`.
            move |wpt: Point| LinExpr::term(var, l / scale) - wpt[coord] / scale
        };

        // ||q - w_G||^2 + z_U^2 <= u^(-4/kappa), linearized in u.
        let dg = c.dg2.sqrt();
        let rhs_u = LinExpr::constant(1.0 + 4.0 / kappa - g.uav_altitude.powi(2) / c.dg2)
            - LinExpr::term(v.u, 4.0 / kappa);
        program.rotated_second_order(
            rhs_u,
            LinExpr::constant(0.5),
            vec![pos(0, v.x, dg)(g.ground_user), pos(1, v.y, dg)(g.ground_user)],
        );
        // ||q - w_R||^2 + (z_U - z_R)^2 <= e^(-4/alpha).
        let dr = c.dr2.sqrt();
        let rhs_e = LinExpr::constant(1.0 + 4.0 / alpha - dz_r * dz_r / c.dr2)
            - LinExpr::term(v.e, 4.0 / alpha);
        program.rotated_second_order(
            rhs_e,
            LinExpr::constant(0.5),
            vec![pos(0, v.x, dr)(g.ris), pos(1, v.y, dr)(g.ris)],
        );
        program.nonneg(LinExpr::var(v.u));
        program.nonneg(LinExpr::var(v.e));

        // s^(-4/kappa) <= sig_s <= linearized ||q - w_E||^2 + z_U^2, normalized by d_E0^2.
        let lin = |w: Point, base2: f64| {
            let gx = 2.0 * (c.q0[0] - w[0]);
            let gy = 2.0 * (c.q0[1] - w[1]);
            let mut e = LinExpr::constant((base2 - gx * c.q0[0] - gy * c.q0[1]) / base2);
            e.add_term(v.x, gx * l / base2);
            e.add_term(v.y, gy * l / base2);
            e
        };
        program.less_eq(LinExpr::var(v.sig_s), lin(g.eavesdropper, c.de2));
        program.power(
            LinExpr::var(v.sig_s),
            LinExpr::var(v.s),
            LinExpr::constant(1.0),
            kappa / (kappa + 4.0),
        );
        program.less_eq(LinExpr::var(v.sig_t), lin(g.ris, c.dr2));
        program.power(
            LinExpr::var(v.sig_t),
            LinExpr::var(v.t),
            LinExpr::constant(1.0),
            alpha / (alpha + 4.0),
        );
        // Upper bounds from the minimum possible distances (eavesdropper on the ground).
        program.less_eq(
            LinExpr::var(v.s),
            LinExpr::constant(g.uav_altitude.powf(-kappa / 2.0) / c.s0),
        );
        program.less_eq(LinExpr::var(v.t), LinExpr::constant(dz_r.powf(-alpha / 2.0) / c.t0));

        // Legitimate SNRs below their linear minorants.
        program.less_eq(LinExpr::var(v.rd), linearized_snr(&c.kd, v.u, v.e));
        program.less_eq(LinExpr::var(v.ru), linearized_snr(&c.ku, v.u, v.e));
        program.exponential(
            LinExpr::var(v.tau_d),
            LinExpr::constant(1.0),
            LinExpr::var(v.rd) + 1.0,
        );
        program.exponential(
            LinExpr::var(v.tau_u),
            LinExpr::constant(1.0),
            LinExpr::var(v.ru) + 1.0,
        );

        // |k_E1 s + k_E2 t|^2 <= zeta.
        let part = |f: fn(Complex64) -> f64| {
            let mut e = LinExpr::zero();
            e.add_term(v.s, f(c.ke[0]));
            e.add_term(v.t, f(c.ke[1]));
            e
        };
        program.rotated_second_order(
            LinExpr::var(v.zeta),
            LinExpr::constant(0.5),
            vec![part(|z| z.re), part(|z| z.im)],
        );

        objective += LinExpr::term(v.tau_d, w)
            + LinExpr::term(v.zeta, -w / (1.0 + c.zeta0))
            + LinExpr::term(v.tau_u, 1.0 - w);
        vars.push(v);
        consts.push(c);
    }

    // Mobility.
    let start = g.start;
    program.equal(LinExpr::var(vars[0].x) - start[0] / l);
    program.equal(LinExpr::var(vars[0].y) - start[1] / l);
    for k in 0..n.saturating_sub(1) {
        let (a, b) = (vars[k], vars[k + 1]);
        program.second_order(
            LinExpr::constant(step),
            vec![
                LinExpr::var(b.x) - LinExpr::var(a.x),
                LinExpr::var(b.y) - LinExpr::var(a.y),
            ],
        );
    }
    let last = vars[n - 1];
    let end = g.end;
    program.second_order(
        LinExpr::constant(step),
        vec![LinExpr::var(last.x) - end[0] / l, LinExpr::var(last.y) - end[1] / l],
    );
    if let Some(pin) = pin_last {
        program.equal(LinExpr::var(last.x) - pin[0] / l);
        program.equal(LinExpr::var(last.y) - pin[1] / l);
    }

    program.maximize(objective);
    TrajectoryProgram {
        program,
        vars,
        consts,
        scale: l,
        weight: w,
    }
}

impl TrajectoryProgram {
    /// Surrogate average secrecy rate (bps/Hz) at a primal point of the program.
    pub fn surrogate(&self, x: &[f64]) -> f64 {
        let w = self.weight;
        let total: f64 = self
            .vars
            .iter()
            .zip(&self.consts)
            .map(|(v, c)| {
                let eve = c.zeta0.ln_1p() + (x[v.zeta] - c.zeta0) / (1.0 + c.zeta0);
                w * (x[v.tau_d] - eve) / LN_2 + (1.0 - w) * (x[v.tau_u] / LN_2 - c.eve_ul_rate)
            })
            .sum();
        total / self.vars.len() as f64
    }

    /// Surrogate at the linearization point, where every slack is tight.
    pub fn surrogate_at_previous(&self) -> f64 {
        let w = self.weight;
        let total: f64 = self
            .consts
            .iter()
            .map(|c| {
                let rd = (c.kd[0] + c.kd[1]).norm_sqr();
                let ru = (c.ku[0] + c.ku[1]).norm_sqr();
                w * (rd.ln_1p() - c.zeta0.ln_1p()) / LN_2
                    + (1.0 - w) * (ru.ln_1p() / LN_2 - c.eve_ul_rate)
            })
            .sum();
        total / self.consts.len() as f64
    }

    fn read(&self, x: &[f64]) -> (TrajectoryPlan, TrajectorySlacks) {
        let l = self.scale;
        let q = self
            .vars
            .iter()
            .map(|v| [l * x[v.x], l * x[v.y]])
            .collect();
        let pick = |f: &dyn Fn(&SlotVars, &SlotConstants) -> f64| -> Vec<f64> {
            self.vars.iter().zip(&self.consts).map(|(v, c)| f(v, c)).collect()
        };
        let slacks = TrajectorySlacks {
            u: pick(&|v, c| x[v.u] * c.u0),
            e: pick(&|v, c| x[v.e] * c.e0),
            s: pick(&|v, c| x[v.s] * c.s0),
            t: pick(&|v, c| x[v.t] * c.t0),
            zeta: pick(&|v, _| x[v.zeta]),
            rd: pick(&|v, _| x[v.rd]),
            ru: pick(&|v, _| x[v.ru]),
            q0: self.consts.iter().map(|c| c.q0).collect(),
            u0: pick(&|_, c| c.u0),
            e0: pick(&|_, c| c.e0),
            s0: pick(&|_, c| c.s0),
            t0: pick(&|_, c| c.t0),
            zeta0: pick(&|_, c| c.zeta0),
        };
        (TrajectoryPlan { q }, slacks)
    }
}

/// Pulls solver round-off back inside the step constraints.
fn project_mobility(plan: &mut TrajectoryPlan, scenario: &Scenario) {
    let d = scenario.max_step();
    plan.q[0] = scenario.geometry.start;
    for k in 1..plan.q.len() {
        let (a, b) = (plan.q[k - 1], plan.q[k]);
        let len = dist2(a, b).sqrt();
        if len > d {
            let f = d / len;
            plan.q[k] = [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])];
        }
    }
}

/// Result of one trajectory SCA step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub plan: TrajectoryPlan,
    pub slacks: TrajectorySlacks,
    pub surrogate: f64,
    pub surrogate_at_previous: f64,
}

pub fn solve_trajectory(
    program: &TrajectoryProgram,
    scenario: &Scenario,
    tol: &Tolerances,
) -> Result<TrajectoryStep> {
    let sol = conic::solve(&program.program, tol).into_result()?;
    let (mut plan, slacks) = program.read(&sol.x);
    project_mobility(&mut plan, scenario);
    Ok(TrajectoryStep {
        plan,
        slacks,
        surrogate: program.surrogate(&sol.x),
        surrogate_at_previous: program.surrogate_at_previous(),
    })
}

/// Freezes the channels at `previous`, builds the program and solves it.
#[allow(clippy::too_many_arguments)]
pub fn trajectory_step(
    realization: &ChannelRealization,
    previous: &TrajectoryPlan,
    phases: &PhaseSchedule,
    powers: &PowerSchedule,
    model: &UncertaintyModel,
    scenario: &Scenario,
    tol: &Tolerances,
) -> Result<TrajectoryStep> {
    let frozen = freeze_channels(realization, previous, phases, powers, model, scenario);
    let program = build_trajectory_program(&frozen, previous, powers, scenario, None);
    solve_trajectory(&program, scenario, tol).map_err(|e| match e {
        Error::Solver { status, message } => Error::Solver {
            status,
            message: format!("trajectory program: {message}"),
        },
        other => other,
    })
}
