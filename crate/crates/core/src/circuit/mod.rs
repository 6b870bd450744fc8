//! Circuit IR, standard circuit builders, and exact execution.

mod text;

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::channels::{self, Ptm};
use crate::error::{Error, Result};
use crate::gates::{self, wrap_pi, Gate, GateKind, NoiseModel, Orientation};
use crate::qmat::{self, c64, CMatrix};

pub use text::{parse_circuit, write_circuit};

/// Largest register simulated with dense matrices.
pub const MAX_DENSE_QUBITS: usize = 10;

/// Orientation choice for the return ladders of a block circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockConfig {
    HiddenInverse,
    Standard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DENSE_QUBITS {
            return Err(Error::QubitRange(n));
        }
        Ok(Self { n, gates: Vec::new() })
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        for (k, &q) in g.qubits.iter().enumerate() {
            if q >= self.n {
                return Err(Error::InvalidCircuit(format!(
                    "gate {} uses qubit {q} but the circuit has {} qubits",
                    self.gates.len(),
                    self.n
                )));
            }
            if g.qubits[..k].contains(&q) {
                return Err(Error::InvalidCircuit(format!(
                    "gate {} repeats qubit {q}",
                    self.gates.len()
                )));
            }
        }
        self.gates.push(g);
        Ok(())
    }

    /// Orientation annotation of every CNOT composite, by gate index.
    pub fn orientations(&self) -> Vec<(usize, Orientation)> {
        self.gates
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.orientation().map(|o| (i, o)))
            .collect()
    }

    pub fn set_orientation(&mut self, index: usize, o: Orientation) -> Result<()> {
        match self.gates.get_mut(index) {
            Some(Gate {
                kind: GateKind::CnotComposite(slot),
                ..
            }) => {
                *slot = o;
                Ok(())
            }
            _ => Err(Error::InvalidCircuit(format!(
                "gate {index} is not a CNOT composite"
            ))),
        }
    }

    /// Every CNOT composite set to `o`.
    pub fn with_all_orientations(&self, o: Orientation) -> Self {
        let mut c = self.clone();
        for g in &mut c.gates {
            if let GateKind::CnotComposite(slot) = &mut g.kind {
                *slot = o;
            }
        }
        c
    }

    /// Flatten composites into native pulses (Rot1Q, VirtualZ, XX).
    pub fn native(&self) -> Self {
        Self {
            n: self.n,
            gates: self.gates.iter().flat_map(gates::native_sequence).collect(),
        }
    }

    fn check_dense(&self) -> Result<()> {
        if self.n > MAX_DENSE_QUBITS {
            Err(Error::QubitRange(self.n))
        } else {
            Ok(())
        }
    }
}

fn ladder_open(n: usize, orients: &[Orientation]) -> Result<Vec<Gate>> {
    let t = n - 1;
    (0..t).map(|j| Gate::cnot(j, t, orients[j])).collect()
}

fn ladder_close(n: usize, orients: &[Orientation]) -> Result<Vec<Gate>> {
    let t = n - 1;
    (0..t)
        .rev()
        .zip(orients)
        .map(|(j, &o)| Gate::cnot(j, t, o))
        .collect()
}

/// exp(-iθ/2 Z⊗…⊗Z) up to phase: CNOT ladder from qubits 0..n-2 onto qubit n-1,
/// VirtualZ(θ) on n-1, then the reversed ladder.
///
/// `orientations` lists the opening CNOTs in time order followed by the closing ones.
pub fn parity_controlled_z(n: usize, theta: f64, orientations: &[Orientation]) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::QubitRange(n));
    }
    if orientations.len() != 2 * (n - 1) {
        return Err(Error::InvalidCircuit(format!(
            "expected {} orientations for n={n}, got {}",
            2 * (n - 1),
            orientations.len()
        )));
    }
    let (open, close) = orientations.split_at(n - 1);
    let mut gates = ladder_open(n, open)?;
    gates.push(Gate::vz(n - 1, wrap_pi(theta))?);
    gates.extend(ladder_close(n, close)?);
    Circuit::from_gates(n, gates)
}

/// Orientation list for `parity_controlled_z` under a block configuration.
pub fn block_orientations(n: usize, config: BlockConfig) -> Vec<Orientation> {
    let close = match config {
        BlockConfig::HiddenInverse => Orientation::Inverse,
        BlockConfig::Standard => Orientation::Standard,
    };
    let mut o = vec![Orientation::Standard; n - 1];
    o.extend(vec![close; n - 1]);
    o
}

/// Hadamards, `reps` parity-controlled Z blocks, Hadamards.
pub fn repeated_block_circuit(n: usize, theta: f64, reps: usize, config: BlockConfig) -> Result<Circuit> {
    if reps == 0 {
        return Err(Error::InvalidCircuit("reps must be at least 1".into()));
    }
    let block = parity_controlled_z(n, theta, &block_orientations(n, config))?;
    let mut gates: Vec<Gate> = (0..n).map(Gate::h).collect();
    for _ in 0..reps {
        gates.extend(block.gates().iter().cloned());
    }
    gates.extend((0..n).map(Gate::h));
    Circuit::from_gates(n, gates)
}

/// Ordered product of realized gates.
pub fn unitary_of(c: &Circuit, nm: &NoiseModel) -> Result<CMatrix> {
    c.check_dense()?;
    let mut u = qmat::identity(1 << c.n);
    for g in &c.gates {
        qmat::apply_local(&mut u, &gates::realize(g, nm), &g.qubits, c.n);
    }
    Ok(u)
}

/// Final state of |0…0⟩ under the realized circuit.
pub fn statevector_of(c: &Circuit, nm: &NoiseModel) -> Result<CMatrix> {
    c.check_dense()?;
    let mut psi = CMatrix::zeros(1 << c.n, 1);
    psi[(0, 0)] = c64(1.0, 0.0);
    for g in &c.gates {
        qmat::apply_local(&mut psi, &gates::realize(g, nm), &g.qubits, c.n);
    }
    Ok(psi)
}

/// Computational-basis probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub probs: Vec<f64>,
}

impl MeasurementRecord {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let r = Self { probs };
        r.validate(1e-10)?;
        Ok(r)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > tol || self.probs.iter().any(|&p| p < -tol) {
            return Err(Error::NotCptp(format!("probabilities sum to {sum}")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.probs.len().trailing_zeros() as usize
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn ground(&self) -> f64 {
        self.probs[0]
    }
}

pub fn run_statevector(c: &Circuit, nm: &NoiseModel) -> Result<MeasurementRecord> {
    let psi = statevector_of(c, nm)?;
    MeasurementRecord::new(psi.iter().map(|a| a.norm_sqr()).collect())
}

/// A PTM placed on specific qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalChannel {
    pub ptm: Ptm,
    pub qubits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Attachment {
    /// Stochastic channel applied after the gate.
    After(LocalChannel),
    /// Channel used instead of the gate's realized unitary, on the gate's qubits.
    Replace(Ptm),
}

/// Stochastic channels attached to gates by index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelPlan {
    per_gate: BTreeMap<usize, Vec<Attachment>>,
}

impl ChannelPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn attach(&mut self, gate: usize, a: Attachment) {
        self.per_gate.entry(gate).or_default().push(a);
    }

    pub fn after(&mut self, gate: usize, ptm: Ptm, qubits: Vec<usize>) {
        self.attach(gate, Attachment::After(LocalChannel { ptm, qubits }));
    }

    /// The same channel after every two-qubit gate, on the gate's qubits.
    pub fn after_each_two_qubit_gate(c: &Circuit, ptm: &Ptm) -> Self {
        let mut plan = Self::new();
        for (i, g) in c.gates().iter().enumerate() {
            if g.is_two_qubit() {
                plan.after(i, ptm.clone(), g.qubits.clone());
            }
        }
        plan
    }

    /// The same register-wide channel after every two-qubit gate.
    pub fn global_after_each_two_qubit_gate(c: &Circuit, ptm: &Ptm) -> Self {
        let mut plan = Self::new();
        let all: Vec<usize> = (0..c.n()).collect();
        for (i, g) in c.gates().iter().enumerate() {
            if g.is_two_qubit() {
                plan.after(i, ptm.clone(), all.clone());
            }
        }
        plan
    }

    pub fn for_gate(&self, index: usize) -> &[Attachment] {
        self.per_gate.get(&index).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.per_gate.is_empty()
    }

    fn validate(&self, c: &Circuit) -> Result<()> {
        for (&i, list) in &self.per_gate {
            let g = c.gates.get(i).ok_or_else(|| {
                Error::InvalidCircuit(format!("channel attached to missing gate {i}"))
            })?;
            for a in list {
                let (ptm, qubits) = match a {
                    Attachment::After(l) => (&l.ptm, l.qubits.as_slice()),
                    Attachment::Replace(p) => (p, g.qubits.as_slice()),
                };
                if ptm.n() != qubits.len() || qubits.iter().any(|&q| q >= c.n) {
                    return Err(Error::InvalidCircuit(format!(
                        "channel on gate {i} does not fit qubits {qubits:?}"
                    )));
                }
                ptm.check_cptp()?;
            }
        }
        Ok(())
    }
}

fn replaced(plan: &ChannelPlan, i: usize) -> Option<&Ptm> {
    plan.for_gate(i).iter().find_map(|a| match a {
        Attachment::Replace(p) => Some(p),
        _ => None,
    })
}

/// Density-matrix execution from |0…0⟩ with exact unitaries and attached channels.
pub fn run_density(c: &Circuit, nm: &NoiseModel, plan: &ChannelPlan) -> Result<MeasurementRecord> {
    c.check_dense()?;
    plan.validate(c)?;
    let d = 1usize << c.n;
    let mut rho = CMatrix::zeros(d, d);
    rho[(0, 0)] = c64(1.0, 0.0);
    for (i, g) in c.gates.iter().enumerate() {
        match replaced(plan, i) {
            Some(p) => channels::apply_ptm_to_density(&mut rho, p, &g.qubits, c.n)?,
            None => qmat::conjugate_local(&mut rho, &gates::realize(g, nm), &g.qubits, c.n),
        }
        for a in plan.for_gate(i) {
            if let Attachment::After(l) = a {
                channels::apply_ptm_to_density(&mut rho, &l.ptm, &l.qubits, c.n)?;
            }
        }
    }
    MeasurementRecord::new((0..d).map(|k| rho[(k, k)].re).collect())
}

/// The same execution carried entirely in the Pauli-transfer representation.
pub fn run_ptm(c: &Circuit, nm: &NoiseModel, plan: &ChannelPlan) -> Result<MeasurementRecord> {
    if c.n > qmat::MAX_PAULI_QUBITS {
        return Err(Error::QubitRange(c.n));
    }
    plan.validate(c)?;
    let n = c.n;
    let mut v = DVector::<f64>::zeros(1 << (2 * n));
    // |0…0⟩⟨0…0| = 2^{-n} Σ over Z-type strings.
    for (i, x) in v.iter_mut().enumerate() {
        let ps = qmat::PauliString::from_index(n, i);
        if ps.labels().iter().all(|p| matches!(p, qmat::Pauli::I | qmat::Pauli::Z)) {
            *x = 1.0;
        }
    }
    for (i, g) in c.gates.iter().enumerate() {
        let local = match replaced(plan, i) {
            Some(p) => p.clone(),
            None => channels::ptm_of_unitary(&gates::realize(g, nm))?,
        };
        v = local.embed(&g.qubits, n)?.matrix() * v;
        for a in plan.for_gate(i) {
            if let Attachment::After(l) = a {
                v = l.ptm.embed(&l.qubits, n)?.matrix() * v;
            }
        }
    }
    MeasurementRecord::new(channels::probabilities_from_pauli_vector(n, &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::entanglement_fidelity;
    use crate::channels::depolarizing_ptm;
    use crate::qmat::{equal_up_to_phase, herm_exp, kron, Pauli};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn zn(n: usize, theta: f64) -> CMatrix {
        let z = kron(&vec![Pauli::Z.matrix(); n]).unwrap();
        herm_exp(&z, theta / 2.0).unwrap()
    }

    fn std_orients(n: usize) -> Vec<Orientation> {
        vec![Orientation::Standard; 2 * (n - 1)]
    }

    #[test]
    fn parity_examples() {
        let z = NoiseModel::default();
        let c = parity_controlled_z(2, 0.0, &std_orients(2)).unwrap();
        assert!(equal_up_to_phase(&unitary_of(&c, &z).unwrap(), &qmat::identity(4), 1e-12));
        for o in [
            [Orientation::Standard, Orientation::Inverse],
            [Orientation::Inverse, Orientation::Inverse],
        ] {
            let c = parity_controlled_z(2, 0.8, &o).unwrap();
            assert!(equal_up_to_phase(&unitary_of(&c, &z).unwrap(), &zn(2, 0.8), 1e-12));
        }
        let c = parity_controlled_z(4, PI / 3.0, &std_orients(4)).unwrap();
        assert!(equal_up_to_phase(&unitary_of(&c, &z).unwrap(), &zn(4, PI / 3.0), 1e-12));
        assert!(parity_controlled_z(3, 0.1, &std_orients(2)).is_err());
        assert_eq!(c.len(), 7);
    }

    #[test]
    fn block_examples() {
        let z = NoiseModel::default();
        let c = repeated_block_circuit(2, 0.0, 5, BlockConfig::HiddenInverse).unwrap();
        assert!((run_statevector(&c, &z).unwrap().ground() - 1.0).abs() < 1e-12);
        for theta in [0.1, 0.5, 1.3, -2.2] {
            let c = repeated_block_circuit(2, theta, 5, BlockConfig::Standard).unwrap();
            let p = run_statevector(&c, &z).unwrap().ground();
            // state-vector oracle: H⊗H exp(-i(5θ/2)ZZ) |++⟩
            let h = gates::hadamard_matrix();
            let hh = kron(&[h.clone(), h]).unwrap();
            let mut psi = CMatrix::zeros(4, 1);
            psi[(0, 0)] = c64(1.0, 0.0);
            let out = &hh * zn(2, 5.0 * theta) * &hh * psi;
            assert!((p - out[(0, 0)].norm_sqr()).abs() < 1e-12);
            assert!((p - (5.0 * theta / 2.0).cos().powi(2)).abs() < 1e-12);
        }
        let c = repeated_block_circuit(4, 0.9, 1, BlockConfig::HiddenInverse).unwrap();
        let r = run_statevector(&c, &z).unwrap();
        assert!((r.prob(0) + r.prob(15) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hidden_inverse_cancels_overrotation_at_zero() {
        let nm = NoiseModel::overrotation(0.02);
        let c = parity_controlled_z(2, 0.0, &block_orientations(2, BlockConfig::HiddenInverse)).unwrap();
        let fe = entanglement_fidelity(&zn(2, 0.0), &unitary_of(&c, &nm).unwrap()).unwrap();
        assert!((fe - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unitary_of_matches_manual_product() {
        let g = vec![
            Gate::rot(1, 0.3, 0.2).unwrap(),
            Gate::xx(2, 0, 0.7).unwrap(),
            Gate::vz(0, -1.1).unwrap(),
        ];
        let c = Circuit::from_gates(3, g.clone()).unwrap();
        let manual = qmat::embed(&gates::vz_unitary(-1.1), &[0], 3)
            * qmat::embed(&gates::xx_unitary(0.7, 0.0), &[2, 0], 3)
            * qmat::embed(&gates::rot1q_unitary(0.3, 0.2), &[1], 3);
        let u = unitary_of(&c, &NoiseModel::default()).unwrap();
        assert!(qmat::max_abs_diff(&u, &manual) < 1e-14);
    }

    #[test]
    fn entanglement_fidelity_examples() {
        let i2 = qmat::identity(2);
        assert!((entanglement_fidelity(&i2, &i2).unwrap() - 1.0).abs() < 1e-15);
        assert!(entanglement_fidelity(&i2, &Pauli::X.matrix()).unwrap().abs() < 1e-15);
        let f = entanglement_fidelity(&i2, &gates::vz_unitary(PI / 2.0)).unwrap();
        assert!((f - 0.5).abs() < 1e-15);
        assert!(entanglement_fidelity(&i2, &qmat::identity(4)).is_err());
    }

    #[test]
    fn density_examples() {
        let z = NoiseModel::default();
        let c = Circuit::new(3).unwrap();
        let r = run_density(&c, &z, &ChannelPlan::new()).unwrap();
        assert_eq!(r.ground(), 1.0);
        let c = repeated_block_circuit(3, 0.4, 2, BlockConfig::Standard).unwrap();
        let nm = NoiseModel {
            eps_2q: 0.03,
            phi_diff: 0.1,
            ..NoiseModel::default()
        };
        let a = run_density(&c, &nm, &ChannelPlan::new()).unwrap();
        let b = run_statevector(&c, &nm).unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn non_cptp_attachment_rejected() {
        let c = repeated_block_circuit(2, 0.1, 1, BlockConfig::Standard).unwrap();
        let mut bad = Ptm::identity(2).unwrap().into_matrix();
        bad[(0, 1)] = 0.5;
        let bad = Ptm::new(2, bad).unwrap();
        let plan = ChannelPlan::after_each_two_qubit_gate(&c, &bad);
        assert!(matches!(
            run_density(&c, &NoiseModel::default(), &plan),
            Err(Error::NotCptp(_))
        ));
    }

    #[test]
    fn depolarized_runs_agree_between_pipelines() {
        let c = repeated_block_circuit(2, 0.7, 2, BlockConfig::HiddenInverse).unwrap();
        let plan = ChannelPlan::after_each_two_qubit_gate(&c, &depolarizing_ptm(2, 0.9).unwrap());
        let nm = NoiseModel::overrotation(0.04);
        let a = run_density(&c, &nm, &plan).unwrap();
        let b = run_ptm(&c, &nm, &plan).unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn amplification_with_reps() {
        let nm = NoiseModel::overrotation(0.02);
        let mut last = -1.0;
        for reps in 1..=6 {
            let s = repeated_block_circuit(2, 0.0, reps, BlockConfig::Standard).unwrap();
            let inf = 1.0 - run_statevector(&s, &nm).unwrap().ground();
            assert!(inf > last);
            last = inf;
            let h = repeated_block_circuit(2, 0.0, reps, BlockConfig::HiddenInverse).unwrap();
            assert!(1.0 - run_statevector(&h, &nm).unwrap().ground() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn noiseless_unitary_ignores_orientations(
            n in 2usize..5, theta in -PI..PI, mask in 0u32..64
        ) {
            let o: Vec<Orientation> = (0..2 * (n - 1))
                .map(|k| if mask >> k & 1 == 1 { Orientation::Inverse } else { Orientation::Standard })
                .collect();
            let z = NoiseModel::default();
            let a = unitary_of(&parity_controlled_z(n, theta, &o).unwrap(), &z).unwrap();
            let b = unitary_of(&parity_controlled_z(n, theta, &std_orients(n)).unwrap(), &z).unwrap();
            prop_assert!((qmat::phase_overlap(&a, &b) - 1.0).abs() < 1e-10);
        }

        #[test]
        fn probabilities_normalized_under_channels(
            theta in -PI..PI, p in 0.0f64..1.0, eps in -0.05f64..0.05
        ) {
            let c = repeated_block_circuit(3, theta, 1, BlockConfig::Standard).unwrap();
            let plan = ChannelPlan::after_each_two_qubit_gate(&c, &depolarizing_ptm(2, p).unwrap());
            let r = run_density(&c, &NoiseModel::overrotation(eps), &plan).unwrap();
            prop_assert!((r.probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}
