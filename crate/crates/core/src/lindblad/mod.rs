//! Pulse-level Mølmer-Sørensen dynamics on two ions and one motional mode at a
//! time, with heating, motional dephasing and laser dephasing.

mod channel;
mod evolve;
mod spec;

pub use channel::{ms_gate_channel, sk1_ms_channel, CP_FLOOR, TP_LIMIT};
pub use evolve::{EvolveOptions, TRACE_DRIFT_LIMIT};
pub use spec::{LindbladSpec, Mode, Segment, DEFAULT_STEPS_PER_PERIOD, SYNTHETIC_GATE_TIME};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{self, CMatrix};
use evolve::{from_rows, to_rows, Generator};

/// Spin dimension of the two-ion register.
pub const SPIN_DIM: usize = 4;

/// Truncated thermal state with mean occupation `n_bar`, renormalized.
pub fn thermal_state(n_fock: usize, n_bar: f64) -> CMatrix {
    let mut p: Vec<f64> = if n_bar == 0.0 {
        (0..n_fock).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect()
    } else {
        let r = n_bar / (1.0 + n_bar);
        (0..n_fock).map(|k| r.powi(k as i32)).collect()
    };
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    CMatrix::from_fn(n_fock, n_fock, |r, c| {
        if r == c {
            qmat::c64(p[r], 0.0)
        } else {
            Complex64::default()
        }
    })
}

/// Physical state on the spin⊗mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    rho: CMatrix,
    n_fock: usize,
}

impl DensityState {
    pub const TRACE_TOL: f64 = 1e-8;
    pub const EIGEN_FLOOR: f64 = -1e-8;

    pub fn new(rho: CMatrix, n_fock: usize) -> Result<Self> {
        let s = Self { rho, n_fock };
        s.validate()?;
        Ok(s)
    }

    /// Spin state ⊗ thermal mode state.
    pub fn product(spin: &CMatrix, n_fock: usize, n_bar: f64) -> Result<Self> {
        Self::new(qmat::kron2(spin, &thermal_state(n_fock, n_bar)), n_fock)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = SPIN_DIM * self.n_fock;
        if self.rho.nrows() != dim || self.rho.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.rho.nrows(),
            });
        }
        let dev = qmat::hermiticity_deviation(&self.rho);
        if dev > qmat::HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let drift = (qmat::trace(&self.rho).re - 1.0).abs();
        if drift > Self::TRACE_TOL {
            return Err(Error::TraceDrift {
                drift,
                limit: Self::TRACE_TOL,
            });
        }
        let h = (&self.rho + self.rho.adjoint()).scale(0.5);
        let min = h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min < Self::EIGEN_FLOOR {
            return Err(Error::OutOfRange(format!("density matrix eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    pub fn spin(&self) -> CMatrix {
        trace_out_mode(&self.rho, self.n_fock).expect("dimension checked on construction")
    }

    pub fn mode(&self) -> CMatrix {
        trace_out_spin(&self.rho, self.n_fock).expect("dimension checked on construction")
    }

    /// ⟨a†a⟩.
    pub fn mean_phonons(&self) -> f64 {
        let m = self.mode();
        (0..self.n_fock).map(|k| k as f64 * m[(k, k)].re).sum()
    }
}

/// Tr_mode of a spin⊗mode operator.
pub fn trace_out_mode(rho: &CMatrix, n_fock: usize) -> Result<CMatrix> {
    let dim = SPIN_DIM * n_fock;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.nrows(),
        });
    }
    Ok(CMatrix::from_fn(SPIN_DIM, SPIN_DIM, |a, b| {
        (0..n_fock).map(|k| rho[(a * n_fock + k, b * n_fock + k)]).sum()
    }))
}

/// Tr_spin of a spin⊗mode operator.
pub fn trace_out_spin(rho: &CMatrix, n_fock: usize) -> Result<CMatrix> {
    let dim = SPIN_DIM * n_fock;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.nrows(),
        });
    }
    Ok(CMatrix::from_fn(n_fock, n_fock, |j, k| {
        (0..SPIN_DIM).map(|s| rho[(s * n_fock + j, s * n_fock + k)]).sum()
    }))
}

/// Hamiltonian of `mode` at time `t` on the spin⊗mode space.
pub fn ms_hamiltonian(spec: &LindbladSpec, mode: usize, t: f64) -> Result<CMatrix> {
    spec.validate()?;
    let g = Generator::new(spec, mode, EvolveOptions::default())?;
    Ok(from_rows(&g.hamiltonian(t)?, SPIN_DIM * spec.n_fock))
}

/// Integrate a Hermitian spin⊗mode operator through the full schedule of one mode.
pub fn evolve_joint(
    rho: &CMatrix,
    spec: &LindbladSpec,
    mode: usize,
    opts: EvolveOptions,
) -> Result<CMatrix> {
    spec.validate()?;
    let dim = SPIN_DIM * spec.n_fock;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.nrows(),
        });
    }
    let dev = qmat::hermiticity_deviation(rho);
    if dev > qmat::HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let g = Generator::new(spec, mode, opts)?;
    let mut v = to_rows(rho);
    g.evolve(&mut v)?;
    Ok(from_rows(&v, dim))
}

/// Evolve a physical state through the schedule of one mode with every
/// configured collapse operator.
pub fn lindblad_evolve(state: &DensityState, spec: &LindbladSpec, mode: usize) -> Result<DensityState> {
    if state.n_fock != spec.n_fock {
        return Err(Error::DimensionMismatch {
            expected: spec.n_fock,
            found: state.n_fock,
        });
    }
    let rho = evolve_joint(&state.rho, spec, mode, EvolveOptions::default())?;
    DensityState::new(rho, spec.n_fock)
}

/// Closed-system evolution of a physical state through one mode's schedule.
pub fn closed_evolve(state: &DensityState, spec: &LindbladSpec, mode: usize) -> Result<DensityState> {
    let opts = EvolveOptions {
        laser_dephasing: false,
        dissipation: false,
    };
    let rho = evolve_joint(&state.rho, spec, mode, opts)?;
    DensityState::new(rho, spec.n_fock)
}

/// Spin map of the whole gate: each mode in turn starts in its thermal state,
/// is driven, and is traced out. Laser dephasing acts once, in the first pass.
///
/// Linear in `rho_spin`, which only has to be Hermitian.
pub fn spin_map(rho_spin: &CMatrix, spec: &LindbladSpec) -> Result<CMatrix> {
    if rho_spin.nrows() != SPIN_DIM || rho_spin.ncols() != SPIN_DIM {
        return Err(Error::DimensionMismatch {
            expected: SPIN_DIM,
            found: rho_spin.nrows(),
        });
    }
    let mode_state = thermal_state(spec.n_fock, spec.n_bar);
    let mut rho = rho_spin.clone();
    for mode in 0..spec.modes.len() {
        let opts = EvolveOptions {
            laser_dephasing: mode == 0,
            dissipation: true,
        };
        let joint = qmat::kron2(&rho, &mode_state);
        rho = trace_out_mode(&evolve_joint(&joint, spec, mode, opts)?, spec.n_fock)?;
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::xx_unitary;
    use crate::qmat::{max_abs_diff, PauliString};
    use std::f64::consts::FRAC_PI_4;

    fn basis_op(a: usize, b: usize, nf: usize) -> CMatrix {
        let mut m = CMatrix::zeros(SPIN_DIM, SPIN_DIM);
        m[(a, b)] = qmat::c64(1.0, 0.0);
        qmat::kron2(&m, &thermal_state(nf, 0.0))
    }

    fn small_spec() -> LindbladSpec {
        let mut s = LindbladSpec::synthetic_default();
        s.n_fock = 8;
        s.steps_per_period = 100;
        s
    }

    #[test]
    fn thermal_state_mean() {
        let r = thermal_state(60, 0.5);
        let mean: f64 = (0..60).map(|k| k as f64 * r[(k, k)].re).sum();
        assert!((mean - 0.5).abs() < 1e-9);
        assert!((qmat::trace(&r).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let s = small_spec();
        for t in [0.0, 3.3e-5, 1.9e-4] {
            let h = ms_hamiltonian(&s, 1, t).unwrap();
            assert!(qmat::hermiticity_deviation(&h) < 1e-12);
        }
    }

    #[test]
    fn closed_gate_matches_xx() {
        let s = small_spec();
        let u = xx_unitary(FRAC_PI_4, 0.0);
        for label in ["ZI", "XY", "YZ"] {
            let p: PauliString = label.parse().unwrap();
            let out = spin_map(&p.matrix(), &s).unwrap();
            let want = &u * p.matrix() * u.adjoint();
            assert!(max_abs_diff(&out, &want) < 1e-4, "{label}");
        }
    }

    #[test]
    fn heating_populates_mode() {
        let mut s = small_spec().with_heating(500.0);
        s.set_omega(0.0);
        let rho = DensityState::new(basis_op(0, 0, s.n_fock), s.n_fock).unwrap();
        let mean = lindblad_evolve(&rho, &s, 0).unwrap().mean_phonons();
        let want = 500.0 * s.total_time();
        assert!((mean - want).abs() < 1e-3 * want, "{mean} vs {want}");
    }

    #[test]
    fn laser_dephasing_spares_antialigned_coherence() {
        let mut s = small_spec();
        s.set_omega(0.0);
        s.tau_l = Some(s.total_time());
        let nf = s.n_fock;
        let t = s.total_time();
        let dfs = evolve_joint(&(basis_op(1, 2, nf) + basis_op(2, 1, nf)), &s, 0, Default::default())
            .unwrap();
        let aligned =
            evolve_joint(&(basis_op(0, 3, nf) + basis_op(3, 0, nf)), &s, 0, Default::default())
                .unwrap();
        let dfs = trace_out_mode(&dfs, nf).unwrap();
        let aligned = trace_out_mode(&aligned, nf).unwrap();
        assert!((dfs[(1, 2)].re - 1.0).abs() < 1e-9);
        let tau = s.tau_l.unwrap();
        let want = (-8.0 * t / tau).exp();
        assert!((aligned[(0, 3)].re - want).abs() < 1e-6, "{} vs {want}", aligned[(0, 3)].re);
    }

    #[test]
    fn zero_drive_gives_zero_hamiltonian() {
        let mut s = small_spec();
        s.set_omega(0.0);
        assert_eq!(ms_hamiltonian(&s, 0, 1e-5).unwrap().norm(), 0.0);
        assert!(matches!(ms_hamiltonian(&s, 0, 1.0), Err(Error::OutsideSchedule { .. })));
    }

    #[test]
    fn open_evolution_with_zero_rates_is_closed() {
        let s = LindbladSpec::synthetic_default();
        let plus = CMatrix::from_element(SPIN_DIM, SPIN_DIM, qmat::c64(0.25, 0.0));
        let st = DensityState::product(&plus, s.n_fock, 0.0).unwrap();
        let open = lindblad_evolve(&st, &s, 0).unwrap();
        let closed = closed_evolve(&st, &s, 0).unwrap();
        assert!(max_abs_diff(open.matrix(), closed.matrix()) < 1e-12);
        assert!(qmat::hermiticity_deviation(open.matrix()) < 1e-10);
    }

    #[test]
    fn density_state_validation() {
        let nf = 4;
        assert!(DensityState::new(basis_op(0, 0, nf).scale(2.0), nf).is_err());
        let neg = basis_op(0, 0, nf).scale(2.0) - basis_op(1, 1, nf);
        assert!(DensityState::new(neg, nf).is_err());
        assert!(DensityState::new(basis_op(0, 0, nf), nf + 1).is_err());
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let s = small_spec();
        let bad = basis_op(0, 1, s.n_fock);
        assert!(matches!(
            evolve_joint(&bad, &s, 0, Default::default()),
            Err(Error::NotHermitian { .. })
        ));
    }
}
