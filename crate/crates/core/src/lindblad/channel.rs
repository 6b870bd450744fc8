use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::spec::LindbladSpec;
use super::{spin_map, SPIN_DIM};
use crate::channels::{compose_ptms, ptm_of_unitary, Ptm};
use crate::compiler::sk1_phase;
use crate::error::Result;
use crate::gates::vz_unitary;
use crate::qmat::{self, PauliString};

/// Trace-preservation tolerance for integrated channels.
pub const TP_LIMIT: f64 = 1e-8;
/// Most negative Choi eigenvalue accepted for integrated channels.
pub const CP_FLOOR: f64 = -1e-6;

/// Two-qubit PTM of the gate described by `spec`, from the 16 Pauli inputs.
pub fn ms_gate_channel(spec: &LindbladSpec) -> Result<Ptm> {
    spec.validate()?;
    let paulis: Vec<PauliString> = (0..16).map(|i| PauliString::from_index(2, i)).collect();
    let images = paulis
        .par_iter()
        .map(|p| spin_map(&p.matrix(), spec))
        .collect::<Result<Vec<_>>>()?;
    let m = DMatrix::from_fn(16, 16, |i, j| {
        paulis[i].action().trace_with(&images[j]).re / SPIN_DIM as f64
    });
    let r = Ptm::new(2, m)?;
    r.check_cptp_with(TP_LIMIT, CP_FLOOR)?;
    Ok(r)
}

/// Channel of the SK1 composite for XX(θ): the target pulse followed by two
/// full loops whose axes are rotated by ±φ₁ through virtual Z on ion 1.
///
/// `spec` is taken to be calibrated for π/4; the target and the loops are
/// obtained by rescaling its Rabi rates, so any overrotation carries over.
pub fn sk1_ms_channel(spec: &LindbladSpec, theta: f64) -> Result<Ptm> {
    let p1 = sk1_phase(2.0 * theta)?;
    let raw = ms_gate_channel(&spec.for_angle(theta))?;
    let full = ms_gate_channel(&spec.for_angle(PI))?;
    let vz = |phi: f64| -> Result<Ptm> {
        ptm_of_unitary(&qmat::kron2(&vz_unitary(phi), &qmat::identity(2)))
    };
    let corr = |phi: f64| -> Result<Ptm> { compose_ptms(&[vz(-phi)?, full.clone(), vz(phi)?]) };
    compose_ptms(&[raw, corr(p1)?, corr(-p1)?])
}
