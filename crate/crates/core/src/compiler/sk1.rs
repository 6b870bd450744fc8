use std::f64::consts::PI;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{self, Gate, GateKind};

/// φ₁ with cos φ₁ = -Θ/(4π).
pub fn sk1_phase(big_theta: f64) -> Result<f64> {
    if big_theta.abs() > 4.0 * PI {
        return Err(Error::OutOfRange(format!(
            "SK1 needs |rotation| <= 4pi, got {big_theta}"
        )));
    }
    Ok((-big_theta / (4.0 * PI)).acos())
}

/// exp(-iπ (cos φ X + sin φ Y)_a X_b): XX(π) conjugated by a virtual Z on `a`.
fn xx_full_loop(a: usize, b: usize, phi: f64) -> Vec<Gate> {
    vec![
        Gate {
            kind: GateKind::VirtualZ { theta: -phi },
            qubits: vec![a],
        },
        Gate {
            kind: GateKind::XX { theta: PI },
            qubits: vec![a, b],
        },
        Gate {
            kind: GateKind::VirtualZ { theta: phi },
            qubits: vec![a],
        },
    ]
}

/// Target pulse followed by two full-loop corrections at phases φ ± φ₁.
///
/// Rot1Q(θ, φ) uses Θ = θ. XX(θ) uses Θ = 2θ and corrections about
/// cos φ₁ X⊗X + sin φ₁ Y⊗X, so the composite carries three XX pulses.
pub fn sk1_expand(g: &Gate) -> Result<Vec<Gate>> {
    match g.kind {
        GateKind::Rot1Q { theta, phi } => {
            let p1 = sk1_phase(theta)?;
            let q = g.qubits[0];
            let loop_at = |ph: f64| Gate {
                kind: GateKind::Rot1Q {
                    theta: 2.0 * PI,
                    phi: ph,
                },
                qubits: vec![q],
            };
            Ok(vec![g.clone(), loop_at(phi + p1), loop_at(phi - p1)])
        }
        GateKind::XX { theta } => {
            let p1 = sk1_phase(2.0 * theta)?;
            let (a, b) = (g.qubits[0], g.qubits[1]);
            let mut seq = vec![g.clone()];
            seq.extend(xx_full_loop(a, b, p1));
            seq.extend(xx_full_loop(a, b, -p1));
            Ok(seq)
        }
        _ => Err(Error::InvalidGate(format!("SK1 applies to Rot1Q and XX, not {g}"))),
    }
}

/// Flatten composites to native pulses and replace every driven pulse by its SK1 composite.
pub fn sk1_compile(c: &Circuit) -> Result<Circuit> {
    let mut out = Vec::new();
    for g in c.gates().iter().flat_map(gates::native_sequence) {
        match g.kind {
            GateKind::VirtualZ { .. } | GateKind::Pauli(_) => out.push(g),
            _ => out.extend(sk1_expand(&g)?),
        }
    }
    Circuit::from_gates(c.n(), out)
}
