//! Alternating optimization of trajectory, phases and powers, worst-case
//! secrecy evaluation and the benchmark variants.

use std::fmt;
use std::str::FromStr;

use crate::beamforming::{beamforming_stage, PhaseSchedule};
use crate::channel::{dist2, rate, steps_to_cover, ChannelRealization, Point, Scenario, SlotChannels};
use crate::conic::Tolerances;
use crate::csi::{worst_case_rates, UncertaintyModel};
use crate::error::Stage;
use crate::power::{effective_gains, solve_power, PowerSchedule};
use crate::trajectory::{trajectory_step, TrajectoryPlan};
use crate::{Error, Result};

/// Backtracking halvings tried when a trajectory step lowers the objective.
const MAX_HALVINGS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    /// Joint optimization of all three blocks.
    Jo,
    /// Phases frozen at zero.
    JoNpb,
    /// Trajectory frozen at the heuristic path.
    JoHt,
    /// Optimized for perfect CSI, evaluated at the true error bound.
    JoNr,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Jo, Algorithm::JoNpb, Algorithm::JoHt, Algorithm::JoNr];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Jo => "JO",
            Algorithm::JoNpb => "JO_NPB",
            Algorithm::JoHt => "JO_HT",
            Algorithm::JoNr => "JO_NR",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace(['/', '-'], "_");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .ok_or_else(|| Error::InvalidSweep(format!("unknown algorithm `{s}`")))
    }
}

/// The decision triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub trajectory: TrajectoryPlan,
    pub phases: PhaseSchedule,
    pub powers: PowerSchedule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyReport {
    /// `[R_UG - R_UE]^+` per slot.
    pub per_slot_down: Vec<f64>,
    /// `[R_GU - R_GE]^+` per slot.
    pub per_slot_up: Vec<f64>,
    /// Average worst-case secrecy rate after each AO iteration.
    pub per_iteration: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Average worst-case secrecy rate of the design.
    pub r_sec: f64,
    /// Rate of the initial design, before the first iteration.
    pub initial: f64,
}

/// Worst-case secrecy rates of a design under a given error model.
pub fn secrecy_under(
    design: &Design,
    realization: &ChannelRealization,
    model: &UncertaintyModel,
    scenario: &Scenario,
) -> SecrecyReport {
    let noise = scenario.propagation.noise_power;
    let w = scenario.power.dl_weight;
    let eve = worst_case_rates(realization, design, model, scenario);
    let n = design.trajectory.len();
    let mut down = Vec::with_capacity(n);
    let mut up = Vec::with_capacity(n);
    for k in 0..n {
        let slot = SlotChannels::at(realization, design.trajectory.q[k], scenario);
        let r_ug = rate(design.powers.p[k], slot.dl_gain(&design.phases.down[k]).norm_sqr(), noise);
        let r_gu = rate(design.powers.g[k], slot.ul_gain(&design.phases.up[k]).norm_sqr(), noise);
        down.push((r_ug - eve[k].eve_dl).max(0.0));
        up.push((r_gu - eve[k].eve_ul).max(0.0));
    }
    let r_sec = down.iter().zip(&up).map(|(d, u)| w * d + (1.0 - w) * u).sum::<f64>() / n as f64;
    SecrecyReport {
        per_slot_down: down,
        per_slot_up: up,
        per_iteration: Vec::new(),
        iterations: 0,
        converged: false,
        r_sec,
        initial: r_sec,
    }
}

/// Worst-case secrecy rates at the scenario's error bound.
pub fn evaluate_secrecy(design: &Design, realization: &ChannelRealization, scenario: &Scenario) -> SecrecyReport {
    let model = UncertaintyModel::new(scenario.csi.delta_a, realization);
    secrecy_under(design, realization, &model, scenario)
}

/// Fly to the user at full speed, hover, and leave so the last leg ends next to the final point.
pub fn heuristic_trajectory(scenario: &Scenario) -> Result<TrajectoryPlan> {
    scenario.validate()?;
    let g = &scenario.geometry;
    let d = scenario.max_step();
    let n = scenario.slots();
    let user = g.ground_user;
    let d_in = dist2(g.start, user).sqrt();
    let d_out = dist2(user, g.end).sqrt();
    let off_in = steps_to_cover(d_in, d);
    let off_out = steps_to_cover(d_out, d).saturating_sub(1);
    let toward = |from: Point, dist: f64, len: f64| -> Point {
        if dist <= 0.0 {
            return from;
        }
        let f = len.min(dist) / dist;
        [from[0] + f * (user[0] - from[0]), from[1] + f * (user[1] - from[1])]
    };
    let q = (0..n)
        .map(|k| {
            if k < off_in {
                toward(g.start, d_in, k as f64 * d)
            } else if n - 1 - k < off_out {
                let m = n - 1 - k;
                toward(g.end, d_out, (m + 1) as f64 * d)
            } else {
                user
            }
        })
        .collect();
    Ok(TrajectoryPlan { q })
}

/// Heuristic path, zero phases and uniform powers.
pub fn initial_design(scenario: &Scenario) -> Result<Design> {
    Ok(Design {
        trajectory: heuristic_trajectory(scenario)?,
        phases: PhaseSchedule::identity(scenario.slots(), scenario.elements()),
        powers: PowerSchedule::uniform(scenario),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub design: Design,
    pub report: SecrecyReport,
}

#[derive(Debug, Clone, Copy)]
struct Variant {
    optimize_trajectory: bool,
    optimize_phases: bool,
    robust: bool,
}

impl Variant {
    fn of(algorithm: Algorithm) -> Self {
        let all = Variant {
            optimize_trajectory: true,
            optimize_phases: true,
            robust: true,
        };
        match algorithm {
            Algorithm::Jo => all,
            Algorithm::JoNpb => Variant {
                optimize_phases: false,
                ..all
            },
            Algorithm::JoHt => Variant {
                optimize_trajectory: false,
                ..all
            },
            Algorithm::JoNr => Variant { robust: false, ..all },
        }
    }
}

/// Full alternating optimization from `initial`.
pub fn run_jo(scenario: &Scenario, realization: &ChannelRealization, initial: Design) -> Result<RunOutput> {
    run_variant(Variant::of(Algorithm::Jo), scenario, realization, initial)
}

/// One of the four algorithms from the standard initial design.
pub fn run_benchmark(
    algorithm: Algorithm,
    scenario: &Scenario,
    realization: &ChannelRealization,
) -> Result<RunOutput> {
    let initial = initial_design(scenario)?;
    run_variant(Variant::of(algorithm), scenario, realization, initial)
}

fn run_variant(
    variant: Variant,
    scenario: &Scenario,
    realization: &ChannelRealization,
    initial: Design,
) -> Result<RunOutput> {
    scenario.validate()?;
    let tol = Tolerances::default();
    let truth = UncertaintyModel::new(scenario.csi.delta_a, realization);
    let model = if variant.robust {
        truth
    } else {
        UncertaintyModel::exact()
    };
    let settings = &scenario.algorithm;
    let internal = |d: &Design| secrecy_under(d, realization, &model, scenario).r_sec;

    let mut design = initial;
    let initial_rate = secrecy_under(&design, realization, &truth, scenario).r_sec;
    let mut previous = initial_rate;
    let mut trace = Vec::new();
    let mut converged = false;

    for j in 1..=settings.max_iterations {
        if variant.optimize_trajectory {
            let step = trajectory_step(
                realization,
                &design.trajectory,
                &design.phases,
                &design.powers,
                &model,
                scenario,
                &tol,
            )
            .map_err(|e| e.at_stage(Stage::Trajectory, j))?;
            let current = internal(&design);
            let mut lambda = 1.0;
            for _ in 0..=MAX_HALVINGS {
                let candidate = Design {
                    trajectory: step.plan.blend(&design.trajectory, lambda),
                    ..design.clone()
                };
                if internal(&candidate) >= current {
                    design = candidate;
                    break;
                }
                lambda *= 0.5;
            }
        }

        if variant.optimize_phases {
            let (phases, _) = beamforming_stage(
                realization,
                &design.trajectory,
                &design.powers,
                &design.phases,
                &model,
                scenario,
                j,
                &tol,
            )?;
            design.phases = phases;
        }

        let gains = effective_gains(realization, &design.trajectory, &design.phases, &model, scenario);
        design.powers = solve_power(&gains, scenario).map_err(|e| e.at_stage(Stage::Power, j))?;

        let r = secrecy_under(&design, realization, &truth, scenario).r_sec;
        trace.push(r);
        if (r - previous).abs() <= settings.tolerance {
            converged = true;
            break;
        }
        previous = r;
    }

    let mut report = secrecy_under(&design, realization, &truth, scenario);
    report.iterations = trace.len();
    report.per_iteration = trace;
    report.converged = converged;
    report.initial = initial_rate;
    Ok(RunOutput { design, report })
}
