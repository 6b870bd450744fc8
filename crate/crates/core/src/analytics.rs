//! Closed-form fidelities for the parity-controlled Z rotation and the
//! CNOT-Hamiltonian error model, plus the fidelity metrics they are checked with.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{self, BlockConfig, Circuit};
use crate::compiler::randomized_compile;
use crate::error::{Error, Result};
use crate::gates::{cnot_matrix, NoiseModel};
use crate::qmat::{self, CMatrix};

/// Plus is the hidden-inverse configuration, Minus the standard one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// |Tr[U†V]|² / 4^n.
pub fn entanglement_fidelity(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    if u.shape() != v.shape() || !u.is_square() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            found: v.nrows(),
        });
    }
    let d = u.nrows() as f64;
    let tr: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok((tr.norm_sqr() / (d * d)).min(1.0))
}

/// (2^n F_e + 1) / (2^n + 1).
pub fn average_from_entanglement(fe: f64, n: usize) -> f64 {
    let d = (1u64 << n) as f64;
    (d * fe + 1.0) / (d + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityPoint {
    pub theta: f64,
    pub eps: f64,
    pub n: usize,
    pub orientation: Branch,
    pub f_entanglement: f64,
    pub f_average: f64,
}

impl FidelityPoint {
    pub fn new(theta: f64, eps: f64, n: usize, orientation: Branch, f_entanglement: f64) -> Self {
        Self {
            theta,
            eps,
            n,
            orientation,
            f_entanglement,
            f_average: average_from_entanglement(f_entanglement, n),
        }
    }

    pub fn closed_form(theta: f64, eps: f64, n: usize, orientation: Branch) -> Self {
        Self::new(theta, eps, n, orientation, closed_form_fe(theta, eps, n, orientation))
    }
}

/// [cos²(πε/4) ± sin²(πε/4) cos θ]^{2(n-1)} for an n-qubit parity rotation whose
/// XX gates are overrotated by the fraction ε.
pub fn closed_form_fe(theta: f64, eps: f64, n: usize, orientation: Branch) -> f64 {
    let a = PI * eps / 4.0;
    let base = a.cos().powi(2) + orientation.sign() * a.sin().powi(2) * theta.cos();
    base.powi(2 * (n as i32 - 1))
}

/// Leading-order infidelity at deviation ϑ from the best angle, for the
/// correctly (`correct`) or incorrectly chosen configuration.
pub fn small_angle_drop(n: usize, eps: f64, deviation: f64, correct: bool) -> f64 {
    let k = (n as f64 - 1.0) * FRAC_PI_4.powi(2) * eps * eps;
    if correct {
        k * deviation * deviation
    } else {
        k * (4.0 - deviation * deviation)
    }
}

/// B±(w, θ) = 2(cos²(wε/2) ± cos θ sin²(wε/2)).
fn b_term(w: usize, theta: f64, eps: f64, orientation: Branch) -> f64 {
    let x = w as f64 * eps / 2.0;
    2.0 * (x.cos().powi(2) + orientation.sign() * theta.cos() * x.sin().powi(2))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tr[U†V±] in the CNOT-Hamiltonian model, as a binomial sum over control Hamming weights.
pub fn appendix_a_trace(theta: f64, eps: f64, n: usize, orientation: Branch) -> Complex64 {
    let s = orientation.sign();
    (0..n)
        .map(|w| {
            let phase = -((n - 1 - w) as f64) * eps / 2.0 * (s - 1.0);
            Complex64::from_polar(binomial(n - 1, w), phase) * b_term(w, theta, eps, orientation)
        })
        .sum()
}

pub fn appendix_a_fe(theta: f64, eps: f64, n: usize, orientation: Branch) -> f64 {
    appendix_a_trace(theta, eps, n, orientation).norm_sqr() / 4f64.powi(n as i32)
}

/// exp(-iθ/2 Z⊗…⊗Z).
pub fn parity_rotation(n: usize, theta: f64) -> CMatrix {
    let d = 1usize << n;
    let mut u = CMatrix::zeros(d, d);
    for b in 0..d {
        let parity = if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        u[(b, b)] = Complex64::from_polar(1.0, -theta / 2.0 * parity);
    }
    u
}

/// Ideal U and erroneous V± of the CNOT-Hamiltonian model, built as dense matrices:
/// V± = Π_j exp(±iε/2 CNOT(j,n)) · U · Π_k exp(-iε/2 CNOT(k,n)).
pub fn cnot_hamiltonian_model(theta: f64, eps: f64, n: usize, orientation: Branch) -> Result<(CMatrix, CMatrix)> {
    if n < 2 {
        return Err(Error::QubitRange(n));
    }
    let u = parity_rotation(n, theta);
    let d = 1usize << n;
    let mut left = qmat::identity(d);
    let mut right = qmat::identity(d);
    for j in 0..n - 1 {
        let c = qmat::embed(&cnot_matrix(), &[j, n - 1], n);
        left *= qmat::herm_exp(&c, -orientation.sign() * eps / 2.0)?;
        right *= qmat::herm_exp(&c, eps / 2.0)?;
    }
    let v = left * &u * right;
    Ok((u, v))
}

/// Endpoint expressions of the CNOT-Hamiltonian model as quoted in the literature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotedEndpoints {
    pub plus_at_zero: f64,
    pub plus_at_pi: f64,
    pub minus_at_zero: f64,
    pub minus_at_pi: f64,
}

pub fn quoted_endpoints(eps: f64, n: usize) -> QuotedEndpoints {
    let m = (n - 1) as f64;
    let k = (n - 1) as i32;
    QuotedEndpoints {
        plus_at_zero: 1.0,
        plus_at_pi: (m * eps / 2.0).cos() * (eps / 2.0).cos().powi(2 * k),
        minus_at_zero: 0.25
            * (1.0 + 2.0 * (m * eps).cos() * eps.cos().powi(k) + eps.cos().powi(2 * k)),
        minus_at_pi: (eps / 2.0).cos().powi(2 * k),
    }
}

/// Hidden-inverse endpoint at θ=π evaluated from the binomial sum: the quoted
/// expression with its first factor squared.
pub fn plus_at_pi_exact(eps: f64, n: usize) -> f64 {
    let m = (n - 1) as f64;
    (m * eps / 2.0).cos().powi(2) * (eps / 2.0).cos().powi(2 * (n as i32 - 1))
}

/// Both sides of Σ_w C(n-1,w) e^{-iwε} = e^{-i(n-1)ε/2} [2cos(ε/2)]^{n-1}.
pub fn binomial_identity_check(n: usize, eps: f64) -> (Complex64, Complex64) {
    let lhs = (0..n)
        .map(|w| Complex64::from_polar(binomial(n - 1, w), -(w as f64) * eps))
        .sum();
    let m = (n - 1) as f64;
    let rhs = Complex64::from_polar((2.0 * (eps / 2.0).cos()).powi(n as i32 - 1), -m * eps / 2.0);
    (lhs, rhs)
}

/// Average gate fidelity of a noisy circuit against a target unitary.
pub fn circuit_average_fidelity(c: &Circuit, nm: &NoiseModel, target: &CMatrix) -> Result<f64> {
    let v = circuit::unitary_of(c, nm)?;
    Ok(average_from_entanglement(entanglement_fidelity(target, &v)?, c.n()))
}

/// Average gate fidelity of one parity-controlled Z block against exp(-iθ/2 Z⊗…⊗Z).
pub fn block_average_fidelity(n: usize, theta: f64, config: BlockConfig, nm: &NoiseModel) -> Result<f64> {
    let c = circuit::parity_controlled_z(n, theta, &circuit::block_orientations(n, config))?;
    circuit_average_fidelity(&c, nm, &parity_rotation(n, theta))
}

/// Mean average gate fidelity over `samples` randomized compilations of the
/// standard block, seeded `base_seed`, `base_seed + 1`, ...
pub fn rc_average_fidelity(n: usize, theta: f64, nm: &NoiseModel, samples: usize, base_seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::OutOfRange("at least one RC sample is required".into()));
    }
    let c = circuit::parity_controlled_z(n, theta, &circuit::block_orientations(n, BlockConfig::Standard))?;
    let target = parity_rotation(n, theta);
    let mut total = 0.0;
    for k in 0..samples as u64 {
        let t = randomized_compile(&c, base_seed.wrapping_add(k));
        total += circuit_average_fidelity(&t, nm, &target)?;
    }
    Ok(total / samples as f64)
}

/// |⟨ψ_ideal|ψ⟩|² for the final states of the noiseless and noisy circuit.
pub fn final_state_fidelity(c: &Circuit, nm: &NoiseModel) -> Result<f64> {
    let ideal = circuit::statevector_of(c, &NoiseModel::default())?;
    let noisy = circuit::statevector_of(c, nm)?;
    let overlap: Complex64 = ideal.iter().zip(noisy.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(overlap.norm_sqr().min(1.0))
}
