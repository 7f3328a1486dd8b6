//! Robust passive beamforming: per-slot S-Procedure LMIs, semidefinite
//! relaxation with one SCA step on the eavesdropper term, and Gaussian
//! randomization back to unit-modulus phases.
//!
//! The DL and UL parts of a slot share no variables or constraints, so each
//! link is solved as its own SDP. All SNR-like quantities are pre-scaled by
//! `power / sigma^2`, which keeps the SDP data of order one.

use std::f64::consts::{LN_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{cscg, ChannelRealization, Scenario, SlotChannels};
use crate::conic::{self, ConicProgram, LinExpr, Tolerances};
use crate::csi::{worst_case_gain, UncertaintyModel};
use crate::linalg::{anchor_last, hermitize, min_eigenvalue, outer, unit_modulus, CMatrix, CVector};
use crate::power::PowerSchedule;
use crate::trajectory::TrajectoryPlan;
use crate::{Error, Result};

/// Per-slot DL and UL phase vectors, each of length M + 1 with a trailing 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSchedule {
    pub down: Vec<CVector>,
    pub up: Vec<CVector>,
}

impl PhaseSchedule {
    /// All phases zero (identity reflection).
    pub fn identity(slots: usize, elements: usize) -> Self {
        let ones = CVector::from_element(elements + 1, Complex64::new(1.0, 0.0));
        PhaseSchedule {
            down: vec![ones.clone(); slots],
            up: vec![ones; slots],
        }
    }

    pub fn len(&self) -> usize {
        self.down.len()
    }

    pub fn is_empty(&self) -> bool {
        self.down.is_empty()
    }
}

/// Phase angles in `[0, 2 pi)` of the M reflecting elements.
pub fn phase_angles(v: &CVector) -> Vec<f64> {
    v.iter()
        .take(v.len() - 1)
        .map(|z| z.arg().rem_euclid(TAU))
        .collect()
}

/// Relaxed matrices, slacks and multipliers of every slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SdrState {
    pub v_d: Vec<CMatrix>,
    pub v_u: Vec<CMatrix>,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    pub xi1_0: Vec<f64>,
    pub xi2_0: Vec<f64>,
}

impl SdrState {
    fn empty(slots: usize) -> Self {
        SdrState {
            v_d: Vec::with_capacity(slots),
            v_u: Vec::with_capacity(slots),
            xi1: Vec::with_capacity(slots),
            xi2: Vec::with_capacity(slots),
            eta1: Vec::with_capacity(slots),
            eta2: Vec::with_capacity(slots),
            xi1_0: Vec::with_capacity(slots),
            xi2_0: Vec::with_capacity(slots),
        }
    }
}

/// One link of one slot, in SNR units.
///
/// The legitimate SNR is `|sum_i legit_i v_i|^2`; the eavesdropper SNR for an
/// error `dh` is `|(hbar + dh)^H diag(eve_diag) v|^2` with `||dh|| <= eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkData {
    pub legit: CVector,
    pub eve_hbar: CVector,
    pub eve_diag: CVector,
    pub eps: f64,
    pub weight: f64,
}

impl LinkData {
    fn from_parts(
        h: &CVector,
        d: &CVector,
        hbar: &CVector,
        d_eve: &CVector,
        power: f64,
        eps: f64,
        weight: f64,
        noise: f64,
    ) -> Self {
        let scale = (power / noise).sqrt();
        LinkData {
            legit: h.zip_map(d, |h, d| h.conj() * d * scale),
            eve_hbar: hbar.clone(),
            eve_diag: d_eve * Complex64::new(scale, 0.0),
            eps,
            weight,
        }
    }

    pub fn downlink(
        realization: &ChannelRealization,
        slot: &SlotChannels,
        power: f64,
        model: &UncertaintyModel,
        scenario: &Scenario,
    ) -> Self {
        LinkData::from_parts(
            &slot.h_g1,
            &slot.d_g1,
            &realization.hbar_e1,
            &slot.d_e1,
            power,
            model.eps1,
            scenario.power.dl_weight,
            scenario.propagation.noise_power,
        )
    }

    pub fn uplink(
        realization: &ChannelRealization,
        slot: &SlotChannels,
        power: f64,
        model: &UncertaintyModel,
        scenario: &Scenario,
    ) -> Self {
        LinkData::from_parts(
            &slot.h_g2,
            &slot.d_g2,
            &realization.hbar_e2,
            &slot.d_e2,
            power,
            model.eps2,
            1.0 - scenario.power.dl_weight,
            scenario.propagation.noise_power,
        )
    }

    pub fn dim(&self) -> usize {
        self.legit.len()
    }

    pub fn legit_snr(&self, v: &CVector) -> f64 {
        self.legit
            .iter()
            .zip(v.iter())
            .map(|(g, x)| g * x)
            .sum::<Complex64>()
            .norm_sqr()
    }

    /// `Tr(V A)` with `A = conj(g) g^T`.
    pub fn legit_trace(&self, v: &CMatrix) -> f64 {
        let g = &self.legit;
        let k = g.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..k {
            for j in 0..k {
                acc += v[(i, j)] * g[j].conj() * g[i];
            }
        }
        acc.re
    }

    /// Worst-case eavesdropper SNR.
    pub fn eve_snr(&self, v: &CVector) -> f64 {
        worst_case_gain(&self.eve_hbar, &self.eve_diag, v, self.eps)
    }

    /// Weighted link secrecy term `w [log2(1 + legit) - log2(1 + eve)]`, unclamped.
    pub fn objective(&self, v: &CVector) -> f64 {
        self.weight * (self.legit_snr(v).ln_1p() - self.eve_snr(v).ln_1p()) / LN_2
    }

    /// Relaxed objective at `(V, xi)` with the eavesdropper log linearized at `xi0`.
    pub fn surrogate(&self, v: &CMatrix, xi: f64, xi0: f64) -> f64 {
        let legit = self.legit_trace(v).max(0.0).ln_1p();
        let eve = xi0.ln_1p() + (xi - xi0) / (1.0 + xi0);
        self.weight * (legit - eve) / LN_2
    }

    /// The robust block `eta [I, 0; 0, -eps^2] - F(V) + [0, 0; 0, xi]`, where
    /// `F(V) = [C, C hbar; hbar^H C, hbar^H C hbar]` and `C = D V D^H`.
    /// Feasibility of the eavesdropper bound is this matrix being PSD.
    ///
    /// With `eps = 0` the error ball has no interior and the multiplier form
    /// is not attained, so the block is the `1 x 1` matrix `xi - hbar^H C hbar`.
    pub fn lmi(&self, v: &CMatrix, xi: f64, eta: f64) -> CMatrix {
        let k = self.dim();
        if self.eps == 0.0 {
            let f = self.quadratic_form(v);
            return CMatrix::from_element(1, 1, Complex64::new(xi - f[(k, k)].re, 0.0));
        }
        let mut out = -self.quadratic_form(v);
        for i in 0..k {
            out[(i, i)] += Complex64::new(eta, 0.0);
        }
        out[(k, k)] += Complex64::new(xi - eta * self.eps * self.eps, 0.0);
        out
    }

    fn quadratic_form(&self, v: &CMatrix) -> CMatrix {
        let k = self.dim();
        let d = &self.eve_diag;
        let h = &self.eve_hbar;
        let c = CMatrix::from_fn(k, k, |i, j| d[i] * v[(i, j)] * d[j].conj());
        let ch = &c * h;
        let hch = (h.adjoint() * &ch)[(0, 0)];
        let mut f = CMatrix::zeros(k + 1, k + 1);
        f.view_mut((0, 0), (k, k)).copy_from(&c);
        for i in 0..k {
            f[(i, k)] = ch[i];
            f[(k, i)] = ch[i].conj();
        }
        f[(k, k)] = Complex64::new(hch.re, 0.0);
        f
    }
}

/// Result of one relaxed link solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSdpSolution {
    pub v: CMatrix,
    pub xi: f64,
    pub eta: f64,
    /// Surrogate objective at the solution.
    pub surrogate: f64,
}

/// Hermitian basis element for the real (`imag = false`) or imaginary part of entry `(i, j)`, `i < j`.
fn basis(k: usize, i: usize, j: usize, imag: bool) -> CMatrix {
    let mut m = CMatrix::zeros(k, k);
    let z = if imag {
        Complex64::new(0.0, 1.0)
    } else {
        Complex64::new(1.0, 0.0)
    };
    m[(i, j)] = z;
    m[(j, i)] = z.conj();
    m
}

/// Adds the Hermitian affine matrix `base + sum x_k mats_k` as a PSD block.
fn add_hermitian_lmi(program: &mut ConicProgram, base: &CMatrix, terms: &[(usize, CMatrix)]) {
    let k = base.nrows();
    let mut re = vec![vec![LinExpr::zero(); k]; k];
    let mut im = vec![vec![LinExpr::zero(); k]; k];
    for i in 0..k {
        for j in i..k {
            re[i][j] = LinExpr::constant(base[(i, j)].re);
            im[i][j] = LinExpr::constant(if i == j { 0.0 } else { base[(i, j)].im });
            for (var, m) in terms {
                let z = m[(i, j)];
                if z.re != 0.0 {
                    re[i][j].add_term(*var, z.re);
                }
                if z.im != 0.0 && i != j {
                    im[i][j].add_term(*var, z.im);
                }
            }
        }
    }
    program.hermitian_psd(&re, &im);
}

/// Builds and solves the relaxed, linearized link problem
/// `max w [log2(1 + Tr(V A)) - xi / (ln2 (1 + xi0))]` over unit-diagonal
/// `V >= 0`, `eta >= 0` and the robust LMI.
pub fn solve_link_sdp(data: &LinkData, xi0: f64, tol: &Tolerances) -> Result<LinkSdpSolution> {
    let k = data.dim();
    let mut program = ConicProgram::new();
    let mut offdiag = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let re = program.add_var();
            let im = program.add_var();
            offdiag.push((i, j, re, im));
        }
    }
    let xi = program.add_var();
    let robust = data.eps > 0.0;
    let eta = robust.then(|| program.add_var());
    let tau = program.add_var();

    // V >= 0 with unit diagonal substituted.
    let identity = CMatrix::identity(k, k);
    let v_terms: Vec<(usize, CMatrix)> = offdiag
        .iter()
        .flat_map(|&(i, j, re, im)| [(re, basis(k, i, j, false)), (im, basis(k, i, j, true))])
        .collect();
    add_hermitian_lmi(&mut program, &identity, &v_terms);

    // Robust eavesdropper LMI: base at V = I, xi = eta = 0.
    let base = -data.quadratic_form(&identity);
    let mut lmi_terms: Vec<(usize, CMatrix)> = v_terms
        .iter()
        .map(|(var, b)| (*var, -data.quadratic_form(b)))
        .collect();
    let mut corner = CMatrix::zeros(k + 1, k + 1);
    corner[(k, k)] = Complex64::new(1.0, 0.0);
    lmi_terms.push((xi, corner));
    if let Some(eta) = eta {
        let mut eta_block = CMatrix::identity(k + 1, k + 1);
        eta_block[(k, k)] = Complex64::new(-data.eps * data.eps, 0.0);
        lmi_terms.push((eta, eta_block));
        add_hermitian_lmi(&mut program, &base, &lmi_terms);
        program.nonneg(LinExpr::var(eta));
    } else {
        // Nominal bound xi >= hbar^H C hbar, linear in V.
        let mut scalar = LinExpr::constant(base[(k, k)].re);
        for (var, m) in &lmi_terms {
            if m[(k, k)].re != 0.0 {
                scalar.add_term(*var, m[(k, k)].re);
            }
        }
        program.nonneg(scalar);
    }

    program.nonneg(LinExpr::var(xi));

    // tau <= ln(1 + Tr(V A)).
    let g = &data.legit;
    let mut trace = LinExpr::constant(1.0 + g.iter().map(|z| z.norm_sqr()).sum::<f64>());
    for &(i, j, re, im) in &offdiag {
        let w = g[i] * g[j].conj();
        trace.add_term(re, 2.0 * w.re);
        trace.add_term(im, -2.0 * w.im);
    }
    program.exponential(LinExpr::var(tau), LinExpr::constant(1.0), trace);

    program.maximize(LinExpr::var(tau) - LinExpr::term(xi, 1.0 / (1.0 + xi0)));
    let sol = conic::solve(&program, tol).into_result()?;

    let mut v = CMatrix::identity(k, k);
    for &(i, j, re, im) in &offdiag {
        let z = Complex64::new(sol.x[re], sol.x[im]);
        v[(i, j)] = z;
        v[(j, i)] = z.conj();
    }
    let mut xi_val = sol.x[xi].max(0.0);
    let mut eta_val = eta.map_or(0.0, |e| sol.x[e].max(0.0));
    // Solver round-off can leave the LMI slightly indefinite. Moving eta by d
    // and xi by d (1 + eps^2) adds d I to the block.
    let shortfall = -min_eigenvalue(&data.lmi(&v, xi_val, eta_val));
    if shortfall > 0.0 {
        if robust {
            eta_val += shortfall;
        }
        xi_val += shortfall * (1.0 + data.eps * data.eps);
    }
    Ok(LinkSdpSolution {
        surrogate: data.surrogate(&v, xi_val, xi0),
        v,
        xi: xi_val,
        eta: eta_val,
    })
}

/// Best unit-modulus vector (last entry 1) extracted from a relaxed `V`.
///
/// Candidate 0 is the phase projection of the principal eigenvector; the
/// remaining `count` candidates are projections of `CN(0, V)` draws.
pub fn gaussian_randomization<R: Rng + ?Sized>(
    v: &CMatrix,
    count: usize,
    rng: &mut R,
    evaluator: impl Fn(&CVector) -> f64,
) -> CVector {
    assert!(count >= 1, "need at least one randomization sample");
    let k = v.nrows();
    let eig = hermitize(v).symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let principal = eig.eigenvectors.column(order[0]).into_owned();
    let mut best = anchor_last(&unit_modulus(&principal));
    let mut best_value = evaluator(&best);

    let factor = CMatrix::from_fn(k, k, |i, j| {
        eig.eigenvectors[(i, j)] * eig.eigenvalues[j].max(0.0).sqrt()
    });
    for _ in 0..count {
        let r = CVector::from_iterator(k, (0..k).map(|_| cscg(rng)));
        let candidate = anchor_last(&unit_modulus(&(&factor * r)));
        let value = evaluator(&candidate);
        if value > best_value {
            best = candidate;
            best_value = value;
        }
    }
    best
}

/// Outcome of one link update.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkUpdate {
    pub v: CVector,
    pub sdp: Option<LinkSdpSolution>,
    pub xi0: f64,
}

/// Solves the relaxed link problem and randomizes; `previous` competes as a candidate.
pub fn update_link(
    data: &LinkData,
    previous: &CVector,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<LinkUpdate> {
    let xi0 = data.eve_snr(previous);
    if data.weight == 0.0 || data.legit.iter().all(|z| z.norm() == 0.0) {
        return Ok(LinkUpdate {
            v: previous.clone(),
            sdp: None,
            xi0,
        });
    }
    let sdp = solve_link_sdp(data, xi0, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidate = gaussian_randomization(&sdp.v, samples, &mut rng, |v| data.objective(v));
    let v = if data.objective(&candidate) > data.objective(previous) {
        candidate
    } else {
        previous.clone()
    };
    Ok(LinkUpdate {
        v,
        sdp: Some(sdp),
        xi0,
    })
}

/// SplitMix64-style mixing of a base seed with stage coordinates.
pub(crate) fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut x = base ^ 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        x = x.wrapping_add(p.wrapping_mul(0xBF58_476D_1CE4_E5B9)).wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x = z ^ (z >> 31);
    }
    x
}

/// Beamforming stage of one AO iteration over all slots.
#[allow(clippy::too_many_arguments)]
pub fn beamforming_stage(
    realization: &ChannelRealization,
    trajectory: &TrajectoryPlan,
    powers: &PowerSchedule,
    previous: &PhaseSchedule,
    model: &UncertaintyModel,
    scenario: &Scenario,
    iteration: usize,
    tol: &Tolerances,
) -> Result<(PhaseSchedule, SdrState)> {
    let n = trajectory.len();
    let samples = scenario.algorithm.randomization_samples;
    let mut phases = previous.clone();
    let mut state = SdrState::empty(n);
    for slot in 0..n {
        let channels = SlotChannels::at(realization, trajectory.q[slot], scenario);
        let tag = |e: Error| Error::Stage {
            stage: crate::error::Stage::Beamforming,
            iteration,
            slot: Some(slot),
            source: Box::new(e),
        };
        let links = [
            LinkData::downlink(realization, &channels, powers.p[slot], model, scenario),
            LinkData::uplink(realization, &channels, powers.g[slot], model, scenario),
        ];
        for (link, data) in links.iter().enumerate() {
            let prev = if link == 0 {
                &previous.down[slot]
            } else {
                &previous.up[slot]
            };
            let seed = derive_seed(realization.seed, &[iteration as u64, slot as u64, link as u64]);
            let update = update_link(data, prev, samples, seed, tol).map_err(tag)?;
            let (v_mat, xi, eta) = match &update.sdp {
                Some(s) => (s.v.clone(), s.xi, s.eta),
                None => (outer(prev), update.xi0, 0.0),
            };
            if link == 0 {
                phases.down[slot] = update.v;
                state.v_d.push(v_mat);
                state.xi1.push(xi);
                state.eta1.push(eta);
                state.xi1_0.push(update.xi0);
            } else {
                phases.up[slot] = update.v;
                state.v_u.push(v_mat);
                state.xi2.push(xi);
                state.eta2.push(eta);
                state.xi2_0.push(update.xi0);
            }
        }
    }
    Ok((phases, state))
}

/// Smallest eigenvalue of the robust LMI at a relaxed solution.
pub fn lmi_min_eigenvalue(data: &LinkData, sol: &LinkSdpSolution) -> f64 {
    min_eigenvalue(&data.lmi(&sol.v, sol.xi, sol.eta))
}

/// Largest `|V_ii - 1|`.
pub fn diagonal_defect(v: &CMatrix) -> f64 {
    (0..v.nrows()).fold(0.0_f64, |m, i| m.max((v[(i, i)] - Complex64::new(1.0, 0.0)).norm()))
}
