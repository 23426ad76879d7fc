use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use proptest::prelude::*;
use zzcm_core::cumulant::{error_cumulant, error_cumulant_segment, find_gamma, peak_amplitude, CumulantSpec};
use zzcm_core::frame::{average_hamiltonian, from_frame, to_frame, FrameGenerator};
use zzcm_core::scenario::optimal_gamma;
use zzcm_core::*;

fn register(n: i32) -> Arc<QubitRegister> {
    QubitRegister::new((0..n).map(|c| Site::new(0, c)).collect()).unwrap()
}

fn axis(i: usize) -> Axis {
    [Axis::X, Axis::Y, Axis::Z][i % 3]
}

/// Power series for J0, independent of the library's quadrature.
fn bessel_j0(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..80 {
        term *= q / (m * m) as f64;
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn random_hermitian(reg: &Arc<QubitRegister>, coeffs: &[(usize, usize, usize, f64)]) -> DenseOperator {
    let n = reg.len();
    let mut h = DenseOperator::zeros(reg.clone());
    for &(a, b, ax, c) in coeffs {
        let (sa, sb) = (reg.labels()[a % n], reg.labels()[b % n]);
        let term = if sa == sb {
            DenseOperator::embed_pauli(reg.clone(), sa, axis(ax)).unwrap()
        } else {
            DenseOperator::product_term(reg.clone(), &[(sa, axis(ax)), (sb, axis(ax + 1))]).unwrap()
        };
        h = h.try_add(&term.scale(c)).unwrap();
    }
    h
}

fn anticommutator(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    (a * b).try_add(&(b * a)).unwrap()
}

proptest! {
    #[test]
    fn paulis_commute_across_sites_and_anticommute_on_one(s1 in 0..3i32, s2 in 0..3i32, a1 in 0..3usize, a2 in 0..3usize) {
        let reg = register(3);
        let p = DenseOperator::embed_pauli(reg.clone(), Site::new(0, s1), axis(a1)).unwrap();
        let q = DenseOperator::embed_pauli(reg.clone(), Site::new(0, s2), axis(a2)).unwrap();
        if s1 != s2 || a1 == a2 {
            prop_assert!(p.commutator(&q).unwrap().max_abs() < 1e-14);
        } else {
            prop_assert!(anticommutator(&p, &q).max_abs() < 1e-14);
        }
    }

    #[test]
    fn herm_expm_is_additive_and_unitary(
        coeffs in prop::collection::vec((0..3usize, 0..3usize, 0..3usize, -2.0..2.0f64), 1..6),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let reg = register(3);
        let h = random_hermitian(&reg, &coeffs);
        let ua = h.herm_expm(a).unwrap();
        let ub = h.herm_expm(b).unwrap();
        let uab = h.herm_expm(a + b).unwrap();
        prop_assert!((&ua * &ub).max_abs_diff(&uab).unwrap() < 1e-10);
        prop_assert!(uab.unitarity_deviation() < 1e-10);
    }

    #[test]
    fn fidelity_ignores_global_phase(
        coeffs in prop::collection::vec((0..2usize, 0..2usize, 0..3usize, -2.0..2.0f64), 1..5),
        phi in -PI..PI,
    ) {
        let reg = register(2);
        let u = random_hermitian(&reg, &coeffs).herm_expm(1.0).unwrap();
        let m = u.matrix() * C64::from_polar(1.0, phi);
        let v = DenseOperator::from_matrix(reg, m).unwrap();
        prop_assert!((trace_fidelity(&u, &v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn area_is_additive(amp in 0.1..3.0f64, dur in 0.5..5.0f64, gamma in 0.0..6.0f64, k in 1..6usize,
                        u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let env = Envelope::sum(vec![
            Envelope::sin_squared(amp, dur).unwrap(),
            Envelope::modulation(gamma * k as f64 * amp, dur / k as f64).unwrap(),
        ]);
        let (t1, t2) = if u < v { (u * dur, v * dur) } else { (v * dur, u * dur) };
        let whole = env.area(0.0, t2).unwrap();
        let split = env.area(0.0, t1).unwrap() + env.area(t1, t2).unwrap();
        prop_assert!((whole - split).abs() < 1e-10);
    }

    #[test]
    fn phase_rate_matches_finite_difference(omega in -20.0..20.0f64, period in 0.1..3.0f64, s in 0.01..0.99f64) {
        let p = PhaseProfile::new(omega, period).unwrap();
        let t = s * period;
        let h = 1e-5 * period;
        let fd = (p.theta(t + h) - p.theta(t - h)) / (2.0 * h);
        prop_assert!((fd - p.rate(t)).abs() < 1e-6 * (1.0 + omega.abs()));
    }

    #[test]
    fn max_abs_scales(amp in 0.1..3.0f64, factor in -4.0..4.0f64, gamma in 0.0..5.0f64) {
        let env = Envelope::sum(vec![
            Envelope::sin_squared(amp, 1.0).unwrap(),
            Envelope::modulation(gamma * amp, 0.25).unwrap(),
        ]);
        let base = env.max_abs(0.0, 1.0).unwrap();
        let scaled = env.scaled(factor).max_abs(0.0, 1.0).unwrap();
        prop_assert!((scaled - factor.abs() * base).abs() < 1e-9 * (1.0 + scaled));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scenario_hamiltonians_are_hermitian(which in 0..6usize, dy in any::<bool>(), s in 0.0..1.0f64, eta in -0.5..0.5f64) {
        let kind = ScenarioKind::ALL[which];
        let scheme = if dy { Scheme::Dy } else { Scheme::Zzcm };
        let sc = Scenario::new(kind, ScenarioParams::for_kind(kind).with_scheme(scheme)).unwrap();
        let schedule = sc.schedule(eta).unwrap();
        for step in schedule.steps() {
            let h = step.hamiltonian.evaluate(s * step.duration).unwrap();
            prop_assert!(h.hermiticity_deviation() < 1e-12);
        }
    }

    #[test]
    fn frame_is_identity_at_period_boundaries_and_periodic(
        omega in -30.0..30.0f64, period in 0.1..2.0f64, k in 1..6usize, s in 0.0..1.0f64, sites in 1..4usize,
    ) {
        let reg = register(3);
        let factors: Vec<(Site, Axis)> = (0..sites).map(|i| (Site::new(0, i as i32), axis(i))).collect();
        let profile = PhaseProfile::new(omega, period).unwrap();
        let frame = FrameGenerator::site_wise(&reg, &factors, profile, k).unwrap();
        let id = DenseOperator::identity(reg.clone());
        for n in 0..=k {
            let u = frame.frame_unitary(n as f64 * period).unwrap();
            prop_assert!(u.max_abs_diff(&id).unwrap() < 1e-12);
        }
        let t = s * period * (k - 1) as f64;
        let a = frame.frame_unitary(t).unwrap();
        let b = frame.frame_unitary(t + period).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        let oracle = frame.direction().herm_expm(profile.theta(t)).unwrap();
        prop_assert!(a.max_abs_diff(&oracle).unwrap() < 1e-12);
    }

    #[test]
    fn frame_round_trip(which in 0..6usize, s in 0.0..1.0f64, eta in -0.5..0.5f64) {
        let kind = ScenarioKind::ALL[which];
        let sc = Scenario::new(kind, ScenarioParams::for_kind(kind)).unwrap();
        let schedule = sc.schedule(eta).unwrap();
        for (frame, step) in sc.frames().unwrap().iter().zip(schedule.steps()) {
            let t = s * step.duration;
            let inner = to_frame(frame, step.hamiltonian.clone()).unwrap();
            let back = from_frame(frame, Arc::new(inner)).unwrap();
            let direct = step.hamiltonian.evaluate(t).unwrap();
            prop_assert!(back.evaluate(t).unwrap().max_abs_diff(&direct).unwrap() < 1e-10);
        }
    }

    #[test]
    fn error_cumulant_matches_bessel_oracle(
        area in 0.1..2.0f64, k in 1..8usize, gamma in 0.0..10.0f64, eta in -1.0..1.0f64,
    ) {
        let spec = CumulantSpec::new(area, k, gamma, eta).unwrap();
        let tau = spec.period();
        let c = 2.0 * area * gamma / PI;
        let oracle = eta.abs() * bessel_j0(c).abs() * (c.cos().abs() + c.sin().abs());
        let ec = error_cumulant(&spec).unwrap();
        prop_assert!(ec >= 0.0);
        prop_assert!((ec / tau - oracle).abs() < 1e-9);
    }

    #[test]
    fn error_cumulant_is_linear_in_eta_and_segment_independent(
        area in 0.1..2.0f64, k in 1..6usize, gamma in 0.0..8.0f64, eta in -1.0..1.0f64, scale in -5.0..5.0f64,
    ) {
        let one = error_cumulant(&CumulantSpec::new(area, k, gamma, eta).unwrap()).unwrap();
        let spec = CumulantSpec::new(area, k, gamma, eta * scale).unwrap();
        let scaled = error_cumulant(&spec).unwrap();
        prop_assert!((scaled - scale.abs() * one).abs() < 1e-11);
        for n in 2..=k {
            prop_assert!((error_cumulant_segment(&spec, n).unwrap() - scaled).abs() < 1e-11);
        }
    }
}

/// First zero of J0, so the roots are `2·j01·π/(2a)` for area `a`.
const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

#[test]
fn gamma_roots_match_bessel_zero_and_ignore_k() {
    for area in [FRAC_PI_4, FRAC_PI_2] {
        let expected = J0_FIRST_ZERO * PI / (2.0 * area);
        for k in [1, 2, 4, 8] {
            let root = find_gamma(area, k, 0.0, 10.0, 0).unwrap();
            assert!((root.gamma - expected).abs() < 1e-6, "area {area}, k {k}: {root:?}");
        }
    }
}

#[test]
fn peak_amplitude_matches_brute_force() {
    for (k, gamma) in [(1, 4.8097), (2, 2.4048), (4, 4.8097), (7, 1.3)] {
        let n = 1_000_000;
        let brute = (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                let sin = (PI * s).sin();
                (sin * sin + gamma * k as f64 * (2.0 * PI * k as f64 * s).sin()).abs()
            })
            .fold(0.0, f64::max);
        let peak = peak_amplitude(k, gamma).unwrap();
        assert!((peak - brute).abs() < 1e-5, "k {k}: {peak} vs {brute}");
    }
}

#[test]
fn averaged_crosstalk_vanishes_at_optimal_gamma() {
    let sc = Scenario::new(ScenarioKind::S1, ScenarioParams::for_kind(ScenarioKind::S1)).unwrap();
    let frame = &sc.frames().unwrap()[0];
    let eta = 0.3;
    let zz = sc.zz_hamiltonian(eta).unwrap().into_shared();
    for segment in [1, 4] {
        let avg = average_hamiltonian(frame, zz.clone(), segment).unwrap();
        assert!(avg.max_abs() < 1e-6 * eta, "segment {segment}: {:.3e}", avg.max_abs());
    }
    assert!((optimal_gamma(FRAC_PI_4).unwrap() - sc.gamma()).abs() < 1e-15);
}

#[test]
fn averaged_crosstalk_is_unrotated_at_zero_gamma() {
    let params = ScenarioParams { gamma: Some(0.0), ..ScenarioParams::for_kind(ScenarioKind::S1) };
    let sc = Scenario::new(ScenarioKind::S1, params).unwrap();
    let zz = sc.zz_hamiltonian(0.2).unwrap();
    let expected = zz.evaluate(0.0).unwrap();
    let avg = average_hamiltonian(&sc.frames().unwrap()[0], zz.into_shared(), 1).unwrap();
    assert!(avg.max_abs_diff(&expected).unwrap() < 1e-10);
}
