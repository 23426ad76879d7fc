use std::sync::Arc;

use zzcm_core::frame::to_frame;
use zzcm_core::propagator::{evolve, evolve_fixed};
use zzcm_core::scenario::{linspace, AmplitudeMode};
use zzcm_core::*;

const ETA: f64 = 0.37;

fn q(r: i32, c: i32) -> Site {
    Site::new(r, c)
}

fn scenario(kind: ScenarioKind, scheme: Scheme) -> Scenario {
    Scenario::new(kind, ScenarioParams::for_kind(kind).with_scheme(scheme)).unwrap()
}

fn sz(reg: &Arc<QubitRegister>, s: Site) -> DenseOperator {
    DenseOperator::embed_pauli(reg.clone(), s, Axis::Z).unwrap()
}

/// `Z_{i,j}`: sum of σᶻ over the four lattice neighbors.
fn neighbor_sum(reg: &Arc<QubitRegister>, s: Site) -> DenseOperator {
    [(-1, 0), (1, 0), (0, -1), (0, 1)]
        .iter()
        .fold(DenseOperator::zeros(reg.clone()), |acc, &(dr, dc)| &acc + &sz(reg, s.offset(dr, dc)))
}

fn assert_printed_form(kind: ScenarioKind, expected: impl Fn(&Arc<QubitRegister>) -> DenseOperator) {
    for scheme in [Scheme::Zzcm, Scheme::Dy] {
        let sc = scenario(kind, scheme);
        let reg = sc.register();
        let built = sc.zz_hamiltonian(ETA).unwrap().evaluate(0.0).unwrap();
        let oracle = expected(reg).scale(ETA);
        assert!(built.max_abs_diff(&oracle).unwrap() < 1e-14, "{}", sc.name());
    }
}

#[test]
fn h_zz1_matches_printed_form() {
    assert_printed_form(ScenarioKind::S1, |reg| &sz(reg, q(1, 1)) * &neighbor_sum(reg, q(1, 1)));
    assert_printed_form(ScenarioKind::S1b, |reg| &sz(reg, q(1, 1)) * &neighbor_sum(reg, q(1, 1)));
}

#[test]
fn h_zz2_matches_printed_form() {
    assert_printed_form(ScenarioKind::S2, |reg| {
        let a = &sz(reg, q(1, 1)) * &neighbor_sum(reg, q(1, 1));
        let b = &sz(reg, q(2, 2)) * &neighbor_sum(reg, q(2, 2));
        &a + &b
    });
}

#[test]
fn nearest_neighbor_h_zz2_and_h_zz3_match_printed_form() {
    let form = |reg: &Arc<QubitRegister>| {
        let a = &sz(reg, q(1, 1)) * &neighbor_sum(reg, q(1, 1));
        let rest = &neighbor_sum(reg, q(1, 2)) - &sz(reg, q(1, 1));
        let b = &sz(reg, q(1, 2)) * &rest;
        &a + &b
    };
    assert_printed_form(ScenarioKind::S2nn, form);
    assert_printed_form(ScenarioKind::S3, form);
}

#[test]
fn h_zz4_matches_printed_form() {
    assert_printed_form(ScenarioKind::S4, |reg| {
        let z = |r, c| sz(reg, q(r, c));
        // Z_{1,1} − σᶻ_{1,0}; Q(1,0) lies outside the box.
        let t1 = &z(1, 1) * &(&(&z(0, 1) + &z(2, 1)) + &z(1, 2));
        let t2 = &z(1, 2) * &(&z(0, 2) + &z(2, 2));
        let t3 = &z(2, 1) * &(&z(2, 2) + &z(3, 1));
        let t4 = &z(2, 2) * &z(3, 2);
        &(&t1 + &t2) + &(&t3 + &t4)
    });
}

#[test]
fn baselines_share_register_edges_and_target() {
    for kind in ScenarioKind::ALL {
        let (z, d) = (scenario(kind, Scheme::Zzcm), scenario(kind, Scheme::Dy));
        assert_eq!(z.register(), d.register());
        assert_eq!(z.zz_pairs(), d.zz_pairs());
        assert!(z.ideal().unwrap().max_abs_diff(&d.ideal().unwrap()).unwrap() < 1e-15);
        assert_eq!(d.reported_k(), 0);
    }
}

#[test]
fn zero_crosstalk_reaches_target() {
    let config = PropagatorConfig::default();
    for kind in [ScenarioKind::S1, ScenarioKind::S1b, ScenarioKind::S2, ScenarioKind::S2nn] {
        let r = scenario(kind, Scheme::Zzcm).self_test(&config).unwrap();
        assert!(r.fidelity >= 1.0 - 1e-6, "{kind}: {r:?}");
        assert!(r.converged && r.difference <= 1e-8, "{kind}: {r:?}");
        assert!(r.unitarity_deviation <= 1e-10, "{kind}: {r:?}");
    }
}

#[test]
fn baseline_at_zero_crosstalk_is_exact() {
    let config = PropagatorConfig::default();
    for kind in ScenarioKind::ALL {
        let r = scenario(kind, Scheme::Dy).self_test(&config).unwrap();
        assert!(r.infidelity < 1e-9, "{kind}: {r:?}");
    }
}

#[test]
fn more_repetitions_suppress_strong_crosstalk() {
    let config = PropagatorConfig::default();
    let at = |k| {
        let sc = Scenario::new(ScenarioKind::S1, ScenarioParams::for_kind(ScenarioKind::S1).with_k(k)).unwrap();
        sc.fidelity(0.5, &config).unwrap().infidelity
    };
    let (one, four) = (at(1), at(4));
    assert!(one >= 10.0 * four, "k=1 {one:.3e}, k=4 {four:.3e}");
}

#[test]
fn capped_full_flip_beats_baseline() {
    let config = PropagatorConfig::default();
    let z = scenario(ScenarioKind::S1b, Scheme::Zzcm).fidelity(0.05, &config).unwrap();
    let d = scenario(ScenarioKind::S1b, Scheme::Dy).fidelity(0.05, &config).unwrap();
    assert!(z.infidelity < d.infidelity, "{z:?} vs {d:?}");
}

#[test]
fn parallel_gates_beat_baseline_across_grid() {
    let config = PropagatorConfig::default();
    let grid = linspace(-0.05, 0.05, 5).unwrap();
    let z = run_sweep(&scenario(ScenarioKind::S2, Scheme::Zzcm), &grid, &config).unwrap();
    let d = run_sweep(&scenario(ScenarioKind::S2, Scheme::Dy), &grid, &config).unwrap();
    for (a, b) in z.iter().zip(&d) {
        if a.eta_ratio != 0.0 {
            assert!(a.infidelity < b.infidelity, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn nearest_neighbor_gates_are_more_susceptible() {
    let config = PropagatorConfig::default();
    let f = |kind, scheme| scenario(kind, scheme).fidelity(0.05, &config).unwrap().infidelity;
    let (iso_dy, nn_dy) = (f(ScenarioKind::S1b, Scheme::Dy), f(ScenarioKind::S2nn, Scheme::Dy));
    let (iso_z, nn_z) = (f(ScenarioKind::S1b, Scheme::Zzcm), f(ScenarioKind::S2nn, Scheme::Zzcm));
    assert!(nn_dy > iso_dy, "baseline: nn {nn_dy:.3e}, isolated {iso_dy:.3e}");
    assert!(nn_z < 10.0 * iso_z, "mitigated: nn {nn_z:.3e}, isolated {iso_z:.3e}");
    assert!(nn_z < nn_dy);
}

/// The frame is the identity at the end of each step, so the lab and frame
/// propagators must coincide there.
#[test]
fn lab_and_frame_propagators_agree() {
    let config = PropagatorConfig::default();
    for kind in [ScenarioKind::S1, ScenarioKind::S2nn] {
        let sc = scenario(kind, Scheme::Zzcm);
        let lab = sc.schedule(sc.eta(0.05)).unwrap();
        let framed: Vec<Step> = lab
            .steps()
            .iter()
            .zip(sc.frames().unwrap())
            .map(|(step, frame)| Step {
                hamiltonian: Arc::new(to_frame(&frame, step.hamiltonian.clone()).unwrap()),
                duration: step.duration,
            })
            .collect();
        let u_lab = evolve(&lab, &config).unwrap().unitary;
        let u_frame = evolve(&Schedule::new(framed).unwrap(), &config).unwrap().unitary;
        let diff = u_lab.max_abs_diff(&u_frame).unwrap();
        assert!(diff <= 1e-8, "{kind}: {diff:.3e}");
    }
}

#[test]
fn step_halving_converges() {
    let sc = scenario(ScenarioKind::S2, Scheme::Zzcm);
    let schedule = sc.schedule(sc.eta(0.05)).unwrap();
    let coarse = evolve_fixed(&schedule, 256, Integrator::Magnus4);
    let fine = evolve_fixed(&schedule, 512, Integrator::Magnus4);
    assert!(1.0 - trace_fidelity(&coarse, &fine).unwrap() <= 1e-8);
    assert!(coarse.max_abs_diff(&fine).unwrap() <= 1e-6);
}

#[test]
fn sweep_preserves_grid_order_and_is_nearly_even() {
    let config = PropagatorConfig::default();
    let grid = [0.3, -0.3, 0.0, 0.1, -0.1];
    let records = run_sweep(&scenario(ScenarioKind::S1, Scheme::Zzcm), &grid, &config).unwrap();
    assert_eq!(records.iter().map(|r| r.eta_ratio).collect::<Vec<_>>(), grid);
    for r in &records {
        assert_eq!(r.scenario, "s1");
        assert_eq!(r.k, 4);
        assert!((r.fidelity + r.infidelity - 1.0).abs() < 1e-15);
        assert!(r.converged);
    }
    assert!(records[2].fidelity >= 1.0 - 1e-6);
    for (p, m) in [(0, 1), (3, 4)] {
        let (a, b) = (records[p].infidelity, records[m].infidelity);
        assert!((a - b).abs() <= 0.5 * a.max(b), "asymmetry {a:.3e} vs {b:.3e}");
    }
    assert!(matches!(run_sweep(&scenario(ScenarioKind::S1, Scheme::Zzcm), &[], &config), Err(Error::EmptyGrid)));
}

#[test]
fn baseline_swap_degrades_away_from_zero() {
    let config = PropagatorConfig::default();
    let grid = linspace(-0.05, 0.05, 21).unwrap();
    let records = run_sweep(&scenario(ScenarioKind::S4, Scheme::Dy), &grid, &config).unwrap();
    assert_eq!(records.len(), 21);
    let at = |x: f64| records.iter().find(|r| (r.eta_ratio - x).abs() < 1e-12).unwrap().fidelity;
    for sign in [-1.0, 1.0] {
        assert!(at(sign * 0.05) < at(sign * 0.01));
    }
    for half in [&records[..11], &records[10..]] {
        let mut f: Vec<f64> = half.iter().map(|r| r.fidelity).collect();
        if half[0].eta_ratio < 0.0 {
            f.reverse();
        }
        assert!(f.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{f:?}");
    }
}

#[test]
fn capped_drive_respects_cap() {
    for k in 2..=8 {
        let params = ScenarioParams::for_kind(ScenarioKind::S1).with_k(k).with_amplitude(AmplitudeMode::Capped);
        let sc = Scenario::new(ScenarioKind::S1, params).unwrap();
        let (_, env, duration) = sc.primary_waveform().unwrap();
        let peak = env.max_abs(0.0, duration).unwrap();
        assert!((peak - 1.0).abs() < 1e-9, "k {k}: {peak}");
    }
}
