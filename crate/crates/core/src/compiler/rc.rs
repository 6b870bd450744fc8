use std::f64::consts::{FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::Circuit;
use crate::gates::{self, Gate, GateKind};
use crate::qmat::{self, Pauli, PauliString};

fn is_clifford_xx(theta: f64) -> bool {
    let k = theta / FRAC_PI_4;
    (k - k.round()).abs() < 1e-12
}

fn is_hard(g: &Gate) -> bool {
    match g.kind {
        GateKind::CnotComposite(_) => true,
        GateKind::XX { theta } => is_clifford_xx(theta),
        _ => false,
    }
}

fn pauli_gate(q: usize, p: Pauli) -> Option<Gate> {
    match p {
        Pauli::I => None,
        p => Some(Gate::pauli(q, p)),
    }
}

/// The Pauli Q with G P G† = Q up to phase, for a two-qubit Clifford G.
fn conjugated(g: &Gate, p: [Pauli; 2]) -> [Pauli; 2] {
    let u = g.ideal_unitary();
    let m = &u * PauliString::new(p.to_vec()).matrix() * u.adjoint();
    for i in 0..16 {
        let q = PauliString::from_index(2, i);
        if (qmat::phase_overlap(&q.matrix(), &m) - 1.0).abs() < 1e-9 {
            return [q.labels()[0], q.labels()[1]];
        }
    }
    unreachable!("Clifford conjugation of a Pauli is a Pauli")
}

struct Emitter {
    out: Vec<Gate>,
    pending: Vec<Pauli>,
}

impl Emitter {
    fn flush(&mut self, q: usize) {
        let p = std::mem::replace(&mut self.pending[q], Pauli::I);
        if let Some(g) = pauli_gate(q, p) {
            self.out.push(g);
        }
    }
}

/// Pauli-twirl every Clifford two-qubit gate.
///
/// A uniformly random Pauli is placed on each qubit before the gate and the
/// compensating Pauli G P G† after it. Twirl Paulis are emitted as error-free
/// `Pauli` frame gates, standing for their absorption into the neighbouring
/// single-qubit layer. Corrections are carried forward and merged with the
/// next twirl or Pauli on the same qubit; a pending Z is absorbed into a
/// following VirtualZ.
pub fn randomized_compile(c: &Circuit, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut em = Emitter {
        out: Vec::with_capacity(c.len() * 2),
        pending: vec![Pauli::I; c.n()],
    };
    for g in c.gates() {
        if is_hard(g) {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            let p = [
                Pauli::from_index(rng.gen_range(0..4)),
                Pauli::from_index(rng.gen_range(0..4)),
            ];
            for (q, pq) in [(a, p[0]), (b, p[1])] {
                em.pending[q] = em.pending[q].mul_ignoring_phase(pq);
                em.flush(q);
            }
            em.out.push(g.clone());
            let corr = conjugated(g, p);
            em.pending[a] = corr[0];
            em.pending[b] = corr[1];
            continue;
        }
        if let GateKind::Pauli(p) = g.kind {
            let q = g.qubits[0];
            em.pending[q] = em.pending[q].mul_ignoring_phase(p);
            continue;
        }
        if let GateKind::VirtualZ { theta } = g.kind {
            let q = g.qubits[0];
            match em.pending[q] {
                Pauli::Z => {
                    em.pending[q] = Pauli::I;
                    em.out.push(Gate {
                        kind: GateKind::VirtualZ {
                            theta: gates::canonical_angle(theta + PI),
                        },
                        qubits: vec![q],
                    });
                    continue;
                }
                Pauli::I => {
                    em.out.push(g.clone());
                    continue;
                }
                _ => {}
            }
        }
        for &q in &g.qubits {
            em.flush(q);
        }
        em.out.push(g.clone());
    }
    for q in 0..c.n() {
        em.flush(q);
    }
    Circuit::from_gates(c.n(), em.out).expect("twirling keeps qubit indices valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{repeated_block_circuit, unitary_of, BlockConfig};
    use crate::gates::{NoiseModel, Orientation};
    use crate::qmat::phase_overlap;
    use proptest::prelude::*;

    #[test]
    fn pauli_corrections_for_cnot() {
        let g = Gate::cnot(0, 1, Orientation::Standard).unwrap();
        assert_eq!(conjugated(&g, [Pauli::X, Pauli::I]), [Pauli::X, Pauli::X]);
        assert_eq!(conjugated(&g, [Pauli::I, Pauli::Z]), [Pauli::Z, Pauli::Z]);
        assert_eq!(conjugated(&g, [Pauli::I, Pauli::X]), [Pauli::I, Pauli::X]);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = repeated_block_circuit(3, 0.4, 2, BlockConfig::Standard).unwrap();
        assert_eq!(randomized_compile(&c, 7), randomized_compile(&c, 7));
        assert_ne!(randomized_compile(&c, 7), randomized_compile(&c, 8));
    }

    #[test]
    fn non_clifford_xx_is_left_alone() {
        let c = Circuit::from_gates(2, vec![Gate::xx(0, 1, 0.3).unwrap()]).unwrap();
        assert_eq!(randomized_compile(&c, 1), c);
    }

    proptest! {
        #[test]
        fn preserves_noiseless_unitary(seed in 0u64..1000, theta in -PI..PI, n in 2usize..4) {
            let mut c = repeated_block_circuit(n, theta, 2, BlockConfig::HiddenInverse).unwrap();
            c.push(Gate::xx(0, 1, FRAC_PI_4).unwrap()).unwrap();
            c.push(Gate::vz(1, 0.3).unwrap()).unwrap();
            let t = randomized_compile(&c, seed);
            let z = NoiseModel::default();
            let o = phase_overlap(&unitary_of(&c, &z).unwrap(), &unitary_of(&t, &z).unwrap());
            prop_assert!((o - 1.0).abs() < 1e-10);
        }
    }
}
