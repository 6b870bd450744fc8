//! Native trapped-ion gates, the two CNOT decompositions, and noisy realization.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{self, c64, CMatrix, Pauli};

/// Which of the two equivalent pulse sequences implements a self-adjoint composite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Standard,
    Inverse,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::Standard => Orientation::Inverse,
            Orientation::Inverse => Orientation::Standard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    /// exp(-i θ/2 (cos φ X + sin φ Y)).
    Rot1Q { theta: f64, phi: f64 },
    /// diag(e^{-iθ/2}, e^{iθ/2}); a frame update, never noisy.
    VirtualZ { theta: f64 },
    /// exp(-i θ X⊗X).
    XX { theta: f64 },
    Hadamard,
    /// CNOT with qubits = (control, target).
    CnotComposite(Orientation),
    /// Pauli frame change folded into the neighbouring single-qubit layer, so
    /// it is applied without error.
    Pauli(Pauli),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

/// Map an angle into (-2π, 2π]. Values already in range are returned bit-for-bit.
pub fn canonical_angle(theta: f64) -> f64 {
    if theta > -2.0 * PI && theta <= 2.0 * PI {
        return theta;
    }
    let r = theta.rem_euclid(4.0 * PI);
    if r > 2.0 * PI {
        r - 4.0 * PI
    } else {
        r
    }
}

/// Map an angle into [-π, π].
pub fn wrap_pi(theta: f64) -> f64 {
    if (-PI..=PI).contains(&theta) {
        return theta;
    }
    let r = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI && theta > 0.0 {
        PI
    } else {
        r
    }
}

fn check_finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidGate(format!("{what} must be finite, got {x}")))
    }
}

impl Gate {
    pub fn rot(q: usize, theta: f64, phi: f64) -> Result<Self> {
        Ok(Self {
            kind: GateKind::Rot1Q {
                theta: canonical_angle(check_finite(theta, "theta")?),
                phi: check_finite(phi, "phi")?,
            },
            qubits: vec![q],
        })
    }

    pub fn vz(q: usize, theta: f64) -> Result<Self> {
        Ok(Self {
            kind: GateKind::VirtualZ {
                theta: canonical_angle(check_finite(theta, "theta")?),
            },
            qubits: vec![q],
        })
    }

    pub fn xx(a: usize, b: usize, theta: f64) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidGate(format!("XX on repeated qubit {a}")));
        }
        Ok(Self {
            kind: GateKind::XX {
                theta: canonical_angle(check_finite(theta, "theta")?),
            },
            qubits: vec![a, b],
        })
    }

    pub fn h(q: usize) -> Self {
        Self {
            kind: GateKind::Hadamard,
            qubits: vec![q],
        }
    }

    pub fn pauli(q: usize, p: Pauli) -> Self {
        Self {
            kind: GateKind::Pauli(p),
            qubits: vec![q],
        }
    }

    pub fn cnot(control: usize, target: usize, orientation: Orientation) -> Result<Self> {
        if control == target {
            return Err(Error::InvalidGate(format!(
                "CNOT control and target are both {control}"
            )));
        }
        Ok(Self {
            kind: GateKind::CnotComposite(orientation),
            qubits: vec![control, target],
        })
    }

    pub fn arity(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_two_qubit(&self) -> bool {
        self.arity() == 2
    }

    pub fn orientation(&self) -> Option<Orientation> {
        match self.kind {
            GateKind::CnotComposite(o) => Some(o),
            _ => None,
        }
    }

    /// The same operation with rotation angles negated (the adjoint for primitive gates).
    pub fn negated(&self) -> Self {
        let kind = match self.kind {
            GateKind::Rot1Q { theta, phi } => GateKind::Rot1Q {
                theta: canonical_angle(-theta),
                phi,
            },
            GateKind::VirtualZ { theta } => GateKind::VirtualZ {
                theta: canonical_angle(-theta),
            },
            GateKind::XX { theta } => GateKind::XX {
                theta: canonical_angle(-theta),
            },
            k => k,
        };
        Self {
            kind,
            qubits: self.qubits.clone(),
        }
    }

    /// Same gate on relabeled qubits.
    pub fn remapped(&self, map: &[usize]) -> Self {
        Self {
            kind: self.kind,
            qubits: self.qubits.iter().map(|&q| map[q]).collect(),
        }
    }

    pub fn ideal_unitary(&self) -> CMatrix {
        realize(self, &NoiseModel::default())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = &self.qubits;
        match self.kind {
            GateKind::Rot1Q { theta, phi } => write!(f, "R({theta}, {phi}) q{}", q[0]),
            GateKind::VirtualZ { theta } => write!(f, "VZ({theta}) q{}", q[0]),
            GateKind::XX { theta } => write!(f, "XX({theta}) q{} q{}", q[0], q[1]),
            GateKind::Hadamard => write!(f, "H q{}", q[0]),
            GateKind::CnotComposite(o) => write!(f, "CNOT[{o:?}] q{} q{}", q[0], q[1]),
            GateKind::Pauli(p) => write!(f, "{} q{}", p.symbol(), q[0]),
        }
    }
}

/// Coherent error parameters applied when realizing gates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Fractional overrotation of XX gates.
    pub eps_2q: f64,
    /// Fractional overrotation of single-qubit rotations.
    pub eps_1q: f64,
    /// Rotation of the XX interaction axis relative to the single-qubit frame (rad).
    pub phi_diff: f64,
    /// Detuning as a fraction of the carrier Rabi frequency.
    pub delta_detune: f64,
}

impl NoiseModel {
    pub fn overrotation(eps_2q: f64) -> Self {
        Self {
            eps_2q,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps_2q", self.eps_2q),
            ("eps_1q", self.eps_1q),
            ("phi_diff", self.phi_diff),
            ("delta_detune", self.delta_detune),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("noise field {name} is not finite")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }
}

pub fn rot1q_unitary(theta: f64, phi: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let (sp, cp) = phi.sin_cos();
    // -i s (cp X + sp Y): off-diagonals -i s (cp ∓ i sp).
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c64(c, 0.0),
            c64(-s * sp, -s * cp),
            c64(s * sp, -s * cp),
            c64(c, 0.0),
        ],
    )
}

/// cos φ X + sin φ Y.
pub fn sigma_phi(phi: f64) -> CMatrix {
    let (sp, cp) = phi.sin_cos();
    Pauli::X.matrix().scale(cp) + Pauli::Y.matrix().scale(sp)
}

pub fn xx_unitary(theta: f64, phi_axis: f64) -> CMatrix {
    let s = sigma_phi(phi_axis);
    let ss = qmat::kron2(&s, &s);
    let (sn, cs) = theta.sin_cos();
    qmat::identity(4).scale(cs) + ss * c64(0.0, -sn)
}

pub fn vz_unitary(theta: f64) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = c64(0.0, -theta / 2.0).exp();
    m[(1, 1)] = c64(0.0, theta / 2.0).exp();
    m
}

pub fn hadamard_matrix() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c64(FRAC_1_SQRT_2, 0.0),
            c64(FRAC_1_SQRT_2, 0.0),
            c64(FRAC_1_SQRT_2, 0.0),
            c64(-FRAC_1_SQRT_2, 0.0),
        ],
    )
}

/// Canonical CNOT with qubit 0 (most significant) as control.
pub fn cnot_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(r, c)] = c64(1.0, 0.0);
    }
    m
}

/// Native Hadamard, in time order: VirtualZ(π) then Rot1Q(π/2, π/2).
pub fn hadamard_sequence(q: usize) -> Vec<Gate> {
    vec![
        Gate {
            kind: GateKind::VirtualZ { theta: PI },
            qubits: vec![q],
        },
        Gate {
            kind: GateKind::Rot1Q {
                theta: FRAC_PI_2,
                phi: FRAC_PI_2,
            },
            qubits: vec![q],
        },
    ]
}

fn standard_cnot_local() -> Vec<Gate> {
    let r = |q, theta, phi| Gate {
        kind: GateKind::Rot1Q { theta, phi },
        qubits: vec![q],
    };
    vec![
        r(0, FRAC_PI_2, FRAC_PI_2),
        Gate {
            kind: GateKind::XX { theta: FRAC_PI_4 },
            qubits: vec![0, 1],
        },
        r(0, -FRAC_PI_2, 0.0),
        r(1, -FRAC_PI_2, 0.0),
        r(0, -FRAC_PI_2, FRAC_PI_2),
    ]
}

/// Reverse the time order and negate every rotation angle, keeping phases.
pub fn invert_sequence(seq: &[Gate]) -> Vec<Gate> {
    seq.iter().rev().map(Gate::negated).collect()
}

/// Time-ordered product of a gate list acting on `n` qubits.
pub fn sequence_unitary(seq: &[Gate], n: usize, nm: &NoiseModel) -> CMatrix {
    let mut u = qmat::identity(1 << n);
    for g in seq {
        qmat::apply_local(&mut u, &realize(g, nm), &g.qubits, n);
    }
    u
}

fn validated_cnot(orientation: Orientation) -> Result<Vec<Gate>> {
    let seq = match orientation {
        Orientation::Standard => standard_cnot_local(),
        Orientation::Inverse => invert_sequence(&standard_cnot_local()),
    };
    let u = sequence_unitary(&seq, 2, &NoiseModel::default());
    let overlap = qmat::phase_overlap(&cnot_matrix(), &u);
    if (overlap - 1.0).abs() > 1e-12 {
        return Err(Error::Decomposition(format!(
            "{orientation:?} CNOT sequence overlap {overlap}"
        )));
    }
    Ok(seq)
}

/// Native pulse sequence for CNOT on local qubits (0 = control, 1 = target).
pub fn cnot_sequence(orientation: Orientation) -> Result<Vec<Gate>> {
    static STD: OnceLock<std::result::Result<Vec<Gate>, String>> = OnceLock::new();
    static INV: OnceLock<std::result::Result<Vec<Gate>, String>> = OnceLock::new();
    let cell = match orientation {
        Orientation::Standard => &STD,
        Orientation::Inverse => &INV,
    };
    cell.get_or_init(|| validated_cnot(orientation).map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::Decomposition)
}

/// CNOT sequence placed on (control, target).
pub fn cnot_sequence_on(control: usize, target: usize, orientation: Orientation) -> Result<Vec<Gate>> {
    Ok(cnot_sequence(orientation)?
        .iter()
        .map(|g| g.remapped(&[control, target]))
        .collect())
}

/// Expand composites (Hadamard, CNOT) into native pulses.
pub fn native_sequence(g: &Gate) -> Vec<Gate> {
    match g.kind {
        GateKind::Hadamard => hadamard_sequence(g.qubits[0]),
        GateKind::CnotComposite(o) => cnot_sequence_on(g.qubits[0], g.qubits[1], o)
            .expect("built-in CNOT decomposition is validated"),
        _ => vec![g.clone()],
    }
}

fn noisy_rot1q(theta: f64, phi: f64, nm: &NoiseModel) -> CMatrix {
    let t = (1.0 + nm.eps_1q) * theta;
    if nm.delta_detune == 0.0 {
        return rot1q_unitary(t, phi);
    }
    // exp(-i/2 v·σ) with v = (t cos φ, t sin φ, δ|t|).
    let (sp, cp) = phi.sin_cos();
    let v = [t * cp, t * sp, nm.delta_detune * t.abs()];
    let a = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if a == 0.0 {
        return qmat::identity(2);
    }
    let (s, c) = (a / 2.0).sin_cos();
    let (nx, ny, nz) = (v[0] / a, v[1] / a, v[2] / a);
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c64(c, -s * nz),
            c64(-s * ny, -s * nx),
            c64(s * ny, -s * nx),
            c64(c, s * nz),
        ],
    )
}

fn noisy_xx(theta: f64, nm: &NoiseModel) -> CMatrix {
    let t = (1.0 + nm.eps_2q) * theta;
    if nm.delta_detune == 0.0 {
        return xx_unitary(t, nm.phi_diff);
    }
    let s = sigma_phi(nm.phi_diff);
    let z = Pauli::Z.matrix();
    let i2 = qmat::identity(2);
    let zsum = qmat::kron2(&z, &i2) + qmat::kron2(&i2, &z);
    let h = qmat::kron2(&s, &s).scale(t) + zsum.scale(nm.delta_detune * t.abs() / 2.0);
    qmat::herm_exp(&h, 1.0).expect("generator is Hermitian by construction")
}

/// Unitary actually applied by `g` under `nm`, as a matrix on `g.qubits` in order.
pub fn realize(g: &Gate, nm: &NoiseModel) -> CMatrix {
    match g.kind {
        GateKind::Rot1Q { theta, phi } => noisy_rot1q(theta, phi, nm),
        GateKind::VirtualZ { theta } => vz_unitary(theta),
        GateKind::Pauli(p) => p.matrix(),
        GateKind::XX { theta } => noisy_xx(theta, nm),
        GateKind::Hadamard | GateKind::CnotComposite(_) => {
            let local: Vec<Gate> = native_sequence(g)
                .iter()
                .map(|p| {
                    let map: Vec<usize> = p
                        .qubits
                        .iter()
                        .map(|q| g.qubits.iter().position(|x| x == q).unwrap())
                        .collect();
                    Gate {
                        kind: p.kind,
                        qubits: map,
                    }
                })
                .collect();
            sequence_unitary(&local, g.arity(), nm)
        }
    }
}
