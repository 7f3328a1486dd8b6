mod common;

use std::fs;

use risuav::ao::{heuristic_trajectory, initial_design, run_benchmark, Algorithm};
use risuav::beamforming::{beamforming_stage, diagonal_defect, lmi_min_eigenvalue, LinkData, LinkSdpSolution, PhaseSchedule};
use risuav::channel::{sample_realization, Scenario, SlotChannels};
use risuav::conic::Tolerances;
use risuav::csi::UncertaintyModel;
use risuav::experiment::{emit_results, read_summary, run_single, run_sweep, Axis, ResultRow, SweepSpec};
use risuav::power::PowerSchedule;
use risuav::trajectory::{build_trajectory_program, solve_trajectory, TrajectoryPlan};

/// Five slots around the user with a two-element RIS.
fn tiny() -> Scenario {
    let mut s = Scenario::desk();
    s.flight.period = 2.0;
    s.geometry.start = [-20.0, 110.0];
    s.geometry.end = [20.0, 110.0];
    s.ris.columns = 2;
    s.ris.rows = 1;
    s.algorithm.randomization_samples = 20;
    s
}

fn without_timing(rows: &[ResultRow]) -> Vec<ResultRow> {
    rows.iter()
        .cloned()
        .map(|mut r| {
            r.wall_time = 0.0;
            r
        })
        .collect()
}

#[test]
fn perfect_csi_makes_robust_and_naive_identical() {
    let s = tiny().with_delta_a2(0.0);
    for seed in 0..3 {
        let r = sample_realization(&s, seed);
        let jo = run_benchmark(Algorithm::Jo, &s, &r).unwrap();
        let nr = run_benchmark(Algorithm::JoNr, &s, &r).unwrap();
        assert_eq!(jo.report.per_iteration, nr.report.per_iteration);
        assert_eq!(jo.design, nr.design);
    }
}

#[test]
fn zero_budget_stops_after_one_iteration() {
    let mut s = tiny();
    s.power.dl_average = 0.0;
    s.power.dl_peak = 0.0;
    s.power.ul_average = 0.0;
    s.power.ul_peak = 0.0;
    let r = sample_realization(&s, 1);
    for alg in Algorithm::ALL {
        let out = run_benchmark(alg, &s, &r).unwrap();
        assert_eq!(out.report.iterations, 1, "{alg}");
        assert_eq!(out.report.per_iteration, vec![0.0]);
        assert_eq!(out.report.r_sec, 0.0);
        assert!(out.report.converged);
    }
}

#[test]
fn frozen_blocks_stay_frozen() {
    let s = tiny();
    let r = sample_realization(&s, 2);
    let ht = run_benchmark(Algorithm::JoHt, &s, &r).unwrap();
    assert_eq!(ht.design.trajectory, heuristic_trajectory(&s).unwrap());
    let npb = run_benchmark(Algorithm::JoNpb, &s, &r).unwrap();
    assert_eq!(npb.design.phases, initial_design(&s).unwrap().phases);
}

#[test]
fn every_iterate_is_feasible() {
    let s = tiny();
    let r = sample_realization(&s, 4);
    for alg in Algorithm::ALL {
        let out = run_benchmark(alg, &s, &r).unwrap();
        let d = &out.design;
        assert!(d.trajectory.mobility_violation(&s) <= 1e-6, "{alg}");
        assert_eq!(d.trajectory.q[0], s.geometry.start);
        let n = s.slots() as f64;
        assert!(d.powers.p.iter().sum::<f64>() / n <= s.power.dl_average * (1.0 + 1e-9));
        assert!(d.powers.g.iter().sum::<f64>() / n <= s.power.ul_average * (1.0 + 1e-9));
        assert!(d.powers.p.iter().all(|p| *p <= s.power.dl_peak));
        for v in d.phases.down.iter().chain(&d.phases.up) {
            assert!(v.iter().all(|z| (z.norm() - 1.0).abs() < 1e-9));
            assert_eq!(v[v.len() - 1].re, 1.0);
        }
        assert!(out.report.r_sec >= 0.0);
    }
}

#[test]
fn runs_are_bitwise_reproducible() {
    let s = tiny();
    let a = run_single(&s, Algorithm::Jo, 7);
    let b = run_single(&s, Algorithm::Jo, 7);
    assert_eq!(without_timing(&[a]), without_timing(&[b]));
}

#[test]
fn robust_stage_outputs_satisfy_lmis() {
    let s = tiny();
    let r = sample_realization(&s, 5);
    let d = initial_design(&s).unwrap();
    let model = UncertaintyModel::new(s.csi.delta_a, &r);
    let tol = Tolerances::default();
    let (phases, state) =
        beamforming_stage(&r, &d.trajectory, &d.powers, &d.phases, &model, &s, 1, &tol).unwrap();
    for n in 0..s.slots() {
        let ch = SlotChannels::at(&r, d.trajectory.q[n], &s);
        let data = LinkData::downlink(&r, &ch, d.powers.p[n], &model, &s);
        let sol = LinkSdpSolution {
            v: state.v_d[n].clone(),
            xi: state.xi1[n],
            eta: state.eta1[n],
            surrogate: 0.0,
        };
        assert!(lmi_min_eigenvalue(&data, &sol) >= -1e-7, "slot {n}");
        assert!(diagonal_defect(&state.v_d[n]) <= 1e-6);
        // The relaxation bounds the eavesdropper SNR of the extracted phases up to randomization loss.
        assert!(data.eve_snr(&phases.down[n]) <= state.xi1[n] * 1.1 + 1e-9, "slot {n}");
    }
}

#[test]
fn pinned_single_slot_only_moves_slacks() {
    let mut s = tiny();
    s.flight.period = s.flight.slot_length;
    s.geometry.end = s.geometry.start;
    let r = sample_realization(&s, 3);
    let plan = TrajectoryPlan { q: vec![s.geometry.start] };
    let phases = PhaseSchedule::identity(1, 2);
    let powers = PowerSchedule::uniform(&s);
    let model = UncertaintyModel::new(s.csi.delta_a, &r);
    let frozen = risuav::trajectory::freeze_channels(&r, &plan, &phases, &powers, &model, &s);
    let program = build_trajectory_program(&frozen, &plan, &powers, &s, None);
    let step = solve_trajectory(&program, &s, &Tolerances::default()).unwrap();
    assert_eq!(step.plan.q, vec![s.geometry.start]);
    assert!((step.surrogate - step.surrogate_at_previous).abs() <= 1e-6);
}

#[test]
fn converged_trajectory_is_a_fixed_point() {
    let inst = common::three_slot_instance(0.4, 0.05, 0.3);
    let tol = Tolerances::default();
    let mut previous = inst.previous.clone();
    previous.q[1] = [0.0, 120.0];
    let mut last = f64::NEG_INFINITY;
    for _ in 0..60 {
        let program = build_trajectory_program(&inst.frozen, &previous, &inst.powers, &inst.scenario, Some(inst.pin));
        let step = solve_trajectory(&program, &inst.scenario, &tol).unwrap();
        assert!(step.surrogate >= step.surrogate_at_previous - 1e-6);
        previous = step.plan;
        if (step.surrogate - last).abs() <= 1e-9 {
            break;
        }
        last = step.surrogate;
    }
    let program = build_trajectory_program(&inst.frozen, &previous, &inst.powers, &inst.scenario, Some(inst.pin));
    let step = solve_trajectory(&program, &inst.scenario, &tol).unwrap();
    assert!((step.surrogate - step.surrogate_at_previous).abs() <= 1e-7);
    let moved = ((step.plan.q[1][0] - previous.q[1][0]).powi(2) + (step.plan.q[1][1] - previous.q[1][1]).powi(2)).sqrt();
    assert!(moved <= 1e-3, "moved {moved} m");
}

#[test]
fn long_flights_hover() {
    let mut s = Scenario::desk();
    s.flight.period = 28.0;
    s.ris.columns = 2;
    s.ris.rows = 1;
    let r = sample_realization(&s, 0);
    let out = run_benchmark(Algorithm::Jo, &s, &r).unwrap();
    let speeds = out.design.trajectory.speeds(&s);
    let slow = speeds.iter().filter(|v| **v < 0.05 * s.flight.max_speed).count();
    assert!(slow as f64 >= 0.3 * speeds.len() as f64, "{slow} of {} slots hover", speeds.len());
    let fast = speeds.iter().filter(|v| **v > 0.9 * s.flight.max_speed).count();
    assert!(fast > 0);
    assert!(speeds[0] > 0.9 * s.flight.max_speed);
}

#[test]
fn sweep_counts_rows_and_orders_them() {
    let s = tiny();
    let spec = SweepSpec {
        axis: Axis::DeltaA2,
        values: vec![0.5],
        realizations: 1,
        base_seed: 4,
        algorithms: vec![Algorithm::JoNr, Algorithm::JoNpb],
    };
    let rows = run_sweep(&spec, &s).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].algorithm, Algorithm::JoNpb);
    assert!(rows.iter().all(|r| r.seed == 4 && r.axis == Some(Axis::DeltaA2)));
}

#[test]
fn serial_and_parallel_sweeps_agree() {
    let s = tiny();
    let spec = SweepSpec {
        axis: Axis::Weight,
        values: vec![0.3, 0.7],
        realizations: 2,
        base_seed: 10,
        algorithms: vec![Algorithm::JoNpb, Algorithm::JoNr],
    };
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let serial = pool(1).install(|| run_sweep(&spec, &s)).unwrap();
    let parallel = pool(4).install(|| run_sweep(&spec, &s)).unwrap();
    assert_eq!(serial.len(), 8);
    assert_eq!(without_timing(&serial), without_timing(&parallel));
}

#[test]
fn fractional_slot_count_rejects_sweep() {
    let s = tiny();
    let spec = SweepSpec {
        axis: Axis::Period,
        values: vec![2.0, 2.1],
        realizations: 1,
        base_seed: 0,
        algorithms: vec![Algorithm::JoNpb],
    };
    // 2.1 s is not a whole number of slots.
    assert!(run_sweep(&spec, &s).is_err());
}

#[test]
fn zero_rows_give_header_only_summary() {
    let dir = tempfile::tempdir().unwrap();
    emit_results(&[], dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(text, "algorithm,axis,value,seed,r_sec,iterations,converged,status\n");
}

#[test]
fn one_run_writes_three_consistent_files() {
    let s = tiny();
    let row = run_single(&s, Algorithm::Jo, 2);
    assert!(row.is_ok(), "{}", row.status);
    let dir = tempfile::tempdir().unwrap();
    let written = emit_results(std::slice::from_ref(&row), dir.path()).unwrap();
    let csvs: Vec<_> = written.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")).collect();
    assert_eq!(csvs.len(), 3);
    let traj = fs::read_to_string(dir.path().join("trajectory_JO_2.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + s.slots());
    assert!(traj.starts_with("n,x,y,speed\n"));
    let trace = fs::read_to_string(dir.path().join("trace_JO_2.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + row.iterations);
    assert!(trace.starts_with("j,R_sec\n"));
    let back = read_summary(&dir.path().join("summary.csv")).unwrap();
    assert_eq!(back[0].r_sec, row.r_sec);
    assert_eq!(back[0].iterations, row.iterations);
}

#[test]
fn uniform_power_is_the_budget() {
    let s = tiny();
    let p = PowerSchedule::uniform(&s);
    assert!(p.p.iter().all(|x| *x == s.power.dl_average));
    assert!(p.g.iter().all(|x| *x == s.power.ul_average));
    let plan = TrajectoryPlan { q: vec![s.geometry.start; s.slots()] };
    assert!(plan.speeds(&s).iter().take(s.slots() - 1).all(|v| *v == 0.0));
}
