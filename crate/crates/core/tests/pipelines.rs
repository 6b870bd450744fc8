use std::f64::consts::FRAC_PI_4;

use hidden_inverse::analytics::parity_rotation;
use hidden_inverse::channels::{avg_fidelity_from_ptm, depolarizing_ptm, ptm_of_unitary, Ptm};
use hidden_inverse::circuit::{
    block_orientations, parity_controlled_z, parse_circuit, repeated_block_circuit, run_density, run_ptm,
    unitary_of, write_circuit, BlockConfig, ChannelPlan,
};
use hidden_inverse::compiler::{apply_orientation_rule, randomized_compile, sk1_compile, OrientationRule};
use hidden_inverse::gates::{xx_unitary, NoiseModel};
use hidden_inverse::lindblad::{ms_gate_channel, LindbladSpec};

fn error_channel(noisy: &Ptm, ideal: &Ptm) -> Ptm {
    let inverse = Ptm::new(ideal.n(), ideal.matrix().transpose()).unwrap();
    inverse.after(noisy).unwrap()
}

#[test]
fn twirled_detuning_error_is_nearly_pauli() {
    let nm = NoiseModel {
        delta_detune: 0.01,
        ..NoiseModel::default()
    };
    let theta = 0.7;
    let c = parity_controlled_z(2, theta, &block_orientations(2, BlockConfig::Standard)).unwrap();
    let ideal = ptm_of_unitary(&parity_rotation(2, theta)).unwrap();
    let bare = error_channel(&ptm_of_unitary(&unitary_of(&c, &nm).unwrap()).unwrap(), &ideal);
    let samples: Vec<Ptm> = (0..100)
        .map(|seed| {
            let t = randomized_compile(&c, seed);
            error_channel(&ptm_of_unitary(&unitary_of(&t, &nm).unwrap()).unwrap(), &ideal)
        })
        .collect();
    let twirled = Ptm::mean(&samples).unwrap();
    let (b, t) = (bare.off_diagonal_mass(), twirled.off_diagonal_mass());
    assert!(b > 0.0);
    assert!(t * 10.0 <= b, "bare {b:e} twirled {t:e}");
}

#[test]
fn compiled_circuits_survive_text_round_trip() {
    let c = repeated_block_circuit(3, -1.2, 2, BlockConfig::Standard).unwrap();
    let (hidden, _) = apply_orientation_rule(&c, &OrientationRule::default());
    for out in [hidden, randomized_compile(&c, 3), sk1_compile(&c).unwrap()] {
        let text = write_circuit(&out);
        let back = parse_circuit(&text).unwrap();
        assert_eq!(write_circuit(&back), text);
        let z = NoiseModel::overrotation(0.03);
        let (a, b) = (unitary_of(&out, &z).unwrap(), unitary_of(&back, &z).unwrap());
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn ptm_and_density_agree_on_depolarized_blocks() {
    let c = repeated_block_circuit(3, 0.4, 3, BlockConfig::HiddenInverse).unwrap();
    let nm = NoiseModel {
        eps_2q: 0.04,
        eps_1q: 0.004,
        phi_diff: 0.05,
        delta_detune: 0.0,
    };
    let plan = ChannelPlan::after_each_two_qubit_gate(&c, &depolarizing_ptm(2, 0.97).unwrap());
    let a = run_ptm(&c, &nm, &plan).unwrap();
    let b = run_density(&c, &nm, &plan).unwrap();
    assert_eq!(a.probs.len(), 8);
    for (x, y) in a.probs.iter().zip(&b.probs) {
        assert!((x - y).abs() < 1e-10);
    }
    assert_eq!(run_ptm(&c, &nm, &plan).unwrap().probs, a.probs);
}

#[test]
fn fock_truncation_is_converged() {
    let ideal = ptm_of_unitary(&xx_unitary(FRAC_PI_4, 0.0)).unwrap();
    let fidelity = |nf: usize| {
        let spec = LindbladSpec {
            n_fock: nf,
            ..LindbladSpec::synthetic_default()
        };
        avg_fidelity_from_ptm(&ms_gate_channel(&spec).unwrap(), &ideal).unwrap()
    };
    let (a, b) = (fidelity(13), fidelity(16));
    assert!((a - b).abs() < 1e-8, "{a} {b}");
}
