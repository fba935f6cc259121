use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use fbs_core::analysis::{fidelity_sweep, SweepParameter, SweepProtocol, SweepSpec, Trace};
use fbs_core::dynamics::{closed_form_phonon_start, evolve_exact, singularity_distance, wei_norman_evolve};
use fbs_core::fockspace::{product, Basis, Ket, LadderKind, QuantumState, SparseOp};
use fbs_core::hamiltonians::{build_classical_pump_hamiltonian, Drive};
use fbs_core::protocols::{execute, Engine, InitialState, PulseSchedule};

fn drive_strategy(max_n: usize) -> impl Strategy<Value = Drive> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(0.05f64..3.0, n),
            prop::collection::vec(0.0f64..2.0 * PI, n),
        )
            .prop_map(|(r, phi)| Drive::from_polar(&r, &phi).unwrap())
    })
}

fn ket_on(basis: &std::sync::Arc<Basis>, raw: &[(f64, f64)]) -> Ket {
    let amps = (0..basis.dim())
        .map(|i| {
            let (re, im) = raw[i % raw.len()];
            C64::new(re + 0.01 * i as f64, im)
        })
        .collect();
    let mut k = Ket::new(basis, amps).unwrap();
    k.normalize().unwrap();
    k
}

fn number_operator(basis: &std::sync::Arc<Basis>) -> SparseOp {
    (0..basis.mode_count())
        .map(|m| product(basis, &[(m, LadderKind::Raise), (m, LadderKind::Lower)]).unwrap())
        .reduce(|a, b| a.add(&b).unwrap())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_evolution_is_unitary_and_conserves_excitations(
        drive in drive_strategy(3),
        gt in 0.0f64..4.0,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8),
    ) {
        let basis = Basis::excitation_sector(drive.len(), 2).unwrap();
        let h = build_classical_pump_hamiltonian(&drive, &basis).unwrap();
        let psi = ket_on(&basis, &raw);
        let out = evolve_exact(&h, &psi, gt).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
        let n = number_operator(&basis);
        let before = psi.expect(&n).unwrap().re;
        let after = out.expect(&n).unwrap().re;
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn factored_propagator_matches_exact(drive in drive_strategy(4), frac in 0.0f64..1.0) {
        let theta = frac * 2.0 * PI;
        prop_assume!(singularity_distance(theta) > 0.05);
        let gt = theta / drive.rabi_rate();
        let basis = Basis::single_excitation(drive.len()).unwrap();
        let mut occ = vec![0; drive.len() + 1];
        occ[drive.len()] = 1;
        let psi = Ket::basis_state(&basis, &occ).unwrap();
        let h = build_classical_pump_hamiltonian(&drive, &basis).unwrap();
        let exact = evolve_exact(&h, &psi, gt).unwrap();
        let wn = wei_norman_evolve(&drive, &psi, gt).unwrap();
        let closed = closed_form_phonon_start(&drive, gt).unwrap();
        prop_assert!(wn.distance(&exact).unwrap() < 1e-8);
        prop_assert!(closed.distance(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn lossless_probabilities_sum_to_one(drive in drive_strategy(4), gt in 0.01f64..3.0) {
        let n = drive.len();
        let s = PulseSchedule::new(n, InitialState::Phonon).segment(drive, gt);
        let out = execute(&s, Engine::Exact).unwrap();
        let total: f64 = out.state.populations().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn trace_csv_round_trip(values in prop::collection::vec(-1e300f64..1e300, 1..40)) {
        let times: Vec<f64> = (0..values.len()).map(|i| i as f64 * 0.1).collect();
        let mut t = Trace::new("gt", times);
        t.push_series("x", values.clone(), false).unwrap();
        let back = Trace::from_csv_str(&t.to_csv_string().unwrap()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.get("x").unwrap()), bits(&values));
        prop_assert_eq!(bits(&back.times), bits(&t.times));
    }

    #[test]
    fn schedule_toml_round_trip(
        drives in prop::collection::vec(drive_strategy(1), 1..4),
        durations in prop::collection::vec(1e-6f64..10.0, 4),
    ) {
        let mut s = PulseSchedule::new(1, InitialState::Photon { mode: 0 });
        for (d, t) in drives.into_iter().zip(durations) {
            s = s.segment(d, t);
        }
        let back = PulseSchedule::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
        prop_assert_eq!(back.segments.len(), s.segments.len());
        for (a, b) in s.segments.iter().zip(&back.segments) {
            prop_assert_eq!(a.duration_gt.to_bits(), b.duration_gt.to_bits());
            prop_assert!((a.drive.amplitudes()[0] - b.drive.amplitudes()[0]).norm() < 1e-12);
        }
    }
}

#[test]
fn fidelity_falls_monotonically_with_loss() {
    let spec = SweepSpec::new(
        SweepParameter::GammaOverG,
        vec![0.0, 10.0, 100.0, 300.0, 900.0, 1800.0],
        SweepProtocol::WStandard(fbs_core::protocols::Start::Heralded),
    );
    let t = fidelity_sweep(&spec).unwrap();
    let f = t.get("fidelity").unwrap();
    assert!((f[0] - 1.0).abs() < 1e-8);
    assert!(f.windows(2).all(|w| w[1] <= w[0]), "{f:?}");
    assert!((0.68..=0.75).contains(&f[5]), "{}", f[5]);
}

#[test]
fn doubling_the_interaction_roughly_squares_the_fidelity() {
    use fbs_core::protocols::Start;
    let mut spec = SweepSpec::new(SweepParameter::GammaOverG, vec![1800.0], SweepProtocol::WStandard(Start::Heralded));
    let single = fidelity_sweep(&spec).unwrap().series[0].values[0];
    spec.protocol = SweepProtocol::WStandard(Start::Injected { pair: 0 });
    let double = fidelity_sweep(&spec).unwrap().series[0].values[0];
    assert!((double - single * single).abs() < 0.03, "{single} {double}");
}
