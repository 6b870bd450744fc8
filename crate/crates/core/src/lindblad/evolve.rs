//! Sparse spin⊗mode operators and a fixed-step RK4 master-equation integrator.
//!
//! Basis index is `s * n_fock + k` with spin index `s` (ion 1 most significant)
//! and Fock number `k`. Matrices are dense row-major `Vec<Complex64>`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::spec::LindbladSpec;
use crate::error::{Error, Result};
use crate::qmat::CMatrix;

/// Trace drift that aborts an integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;

type Entry = (usize, usize, Complex64);

/// Sparse operator as (row, col, value) triples.
#[derive(Debug, Clone, Default)]
pub(crate) struct SparseOp {
    entries: Vec<Entry>,
}

impl SparseOp {
    fn kron(spin: &[Entry], fock: &[Entry], nf: usize) -> Self {
        let mut entries = Vec::with_capacity(spin.len() * fock.len());
        for &(sr, sc, sv) in spin {
            for &(fr, fc, fv) in fock {
                entries.push((sr * nf + fr, sc * nf + fc, sv * fv));
            }
        }
        Self { entries }
    }

    fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect(),
        }
    }

    fn to_dense(&self, dim: usize) -> Vec<Complex64> {
        let mut m = vec![Complex64::default(); dim * dim];
        for &(r, c, v) in &self.entries {
            m[r * dim + c] += v;
        }
        m
    }

    fn from_dense(m: &[Complex64], dim: usize) -> Self {
        let mut entries = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                let v = m[r * dim + c];
                if v.norm() > 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        Self { entries }
    }

    fn product(&self, other: &SparseOp, dim: usize) -> Self {
        let a = self.to_dense(dim);
        let b = other.to_dense(dim);
        let mut m = vec![Complex64::default(); dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let x = a[r * dim + k];
                if x.norm() == 0.0 {
                    continue;
                }
                for c in 0..dim {
                    m[r * dim + c] += x * b[k * dim + c];
                }
            }
        }
        Self::from_dense(&m, dim)
    }

    /// out += coef · op · rho
    fn left_axpy(&self, coef: Complex64, rho: &[Complex64], out: &mut [Complex64], dim: usize) {
        for &(r, c, v) in &self.entries {
            let w = coef * v;
            let (dst, src) = (&mut out[r * dim..(r + 1) * dim], &rho[c * dim..(c + 1) * dim]);
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
}

fn sigma_plus(ion: usize) -> Vec<Entry> {
    // σ+ = |0⟩⟨1| on `ion`; ion 0 is the high bit of the spin index.
    let bit = 1 << (1 - ion);
    (0..4)
        .filter(|s| s & bit != 0)
        .map(|s| (s ^ bit, s, Complex64::new(1.0, 0.0)))
        .collect()
}

fn annihilation(nf: usize) -> Vec<Entry> {
    (1..nf)
        .map(|k| (k - 1, k, Complex64::new((k as f64).sqrt(), 0.0)))
        .collect()
}

fn creation(nf: usize) -> Vec<Entry> {
    (0..nf - 1)
        .map(|k| (k + 1, k, Complex64::new(((k + 1) as f64).sqrt(), 0.0)))
        .collect()
}

fn number(nf: usize) -> Vec<Entry> {
    (1..nf).map(|k| (k, k, Complex64::new(k as f64, 0.0))).collect()
}

fn fock_identity(nf: usize) -> Vec<Entry> {
    (0..nf).map(|k| (k, k, Complex64::new(1.0, 0.0))).collect()
}

/// One drive term c(t)·op + h.c. with c(t) = amp · exp(i(phase0 - θ(t))).
struct DriveTerm {
    op: SparseOp,
    op_dag: SparseOp,
    amp: f64,
    phase0: f64,
    /// θ(t) = sign·Φ(t) + rate·t, Φ the accumulated segment detuning.
    sign: f64,
    rate: f64,
}

/// Everything needed to evaluate dρ/dt for one mode pass.
pub(crate) struct Generator<'a> {
    spec: &'a LindbladSpec,
    dim: usize,
    terms: Vec<DriveTerm>,
    jumps: Vec<SparseOp>,
    /// Σ L†L.
    decay: SparseOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvolveOptions {
    pub laser_dephasing: bool,
    pub dissipation: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            laser_dephasing: true,
            dissipation: true,
        }
    }
}

impl<'a> Generator<'a> {
    pub(crate) fn new(spec: &'a LindbladSpec, mode: usize, opts: EvolveOptions) -> Result<Self> {
        let m = spec.modes.get(mode).ok_or_else(|| {
            Error::Config(format!("mode {mode} not in spec ({} modes)", spec.modes.len()))
        })?;
        let nf = spec.n_fock;
        let dim = 4 * nf;
        let mut terms = Vec::new();
        for ion in 0..2 {
            let sp = sigma_plus(ion);
            let eta = m.eta[ion];
            // red: δ = ν + s, blue: δ = -ν + s, ν = segment detuning + offset
            for (fock, omega, phi, sign) in [
                (annihilation(nf), spec.omega_r[ion], spec.phi_r, 1.0),
                (creation(nf), spec.omega_b[ion], spec.phi_b, -1.0),
            ] {
                let amp = 0.5 * eta * omega;
                if amp == 0.0 {
                    continue;
                }
                let op = SparseOp::kron(&sp, &fock, nf);
                terms.push(DriveTerm {
                    op_dag: op.adjoint(),
                    op,
                    amp,
                    // the leading factor i contributes π/2
                    phase0: phi + PI / 2.0,
                    sign,
                    rate: sign * m.offset + spec.stark[ion],
                });
            }
        }
        let mut jumps = Vec::new();
        if opts.dissipation {
            let mut push = |op: SparseOp| jumps.push(op);
            if spec.gamma_heat > 0.0 {
                let g = spec.gamma_heat.sqrt();
                push(on_mode(&creation(nf), g, nf));
                push(on_mode(&annihilation(nf), g, nf));
            }
            if let Some(tau) = spec.tau_m {
                push(on_mode(&number(nf), (2.0 / tau).sqrt(), nf));
            }
            if opts.laser_dephasing {
                if let Some(tau) = spec.tau_l {
                    let g = (1.0 / tau).sqrt();
                    let zsum: Vec<Entry> = (0..4)
                        .map(|s: usize| {
                            let z = 2.0 - 2.0 * s.count_ones() as f64;
                            (s, s, Complex64::new(g * z, 0.0))
                        })
                        .filter(|e| e.2.norm() > 0.0)
                        .collect();
                    push(SparseOp::kron(&zsum, &fock_identity(nf), nf));
                }
            }
        }
        let mut decay_dense = vec![Complex64::default(); dim * dim];
        for l in &jumps {
            for &(r, c, v) in &l.adjoint().product(l, dim).entries {
                decay_dense[r * dim + c] += v;
            }
        }
        Ok(Self {
            spec,
            dim,
            terms,
            jumps,
            decay: SparseOp::from_dense(&decay_dense, dim),
        })
    }

    fn coefficients(&self, t: f64) -> Result<Vec<Complex64>> {
        let (_, big_phi) = self.spec.locate(t)?;
        Ok(self
            .terms
            .iter()
            .map(|d| {
                let theta = d.sign * big_phi + d.rate * t;
                Complex64::from_polar(d.amp, d.phase0 - theta)
            })
            .collect())
    }

    /// Dense Hamiltonian at time t.
    pub(crate) fn hamiltonian(&self, t: f64) -> Result<Vec<Complex64>> {
        let mut h = vec![Complex64::default(); self.dim * self.dim];
        for (d, c) in self.terms.iter().zip(self.coefficients(t)?) {
            for &(r, col, v) in &d.op.entries {
                h[r * self.dim + col] += c * v;
            }
            for &(r, col, v) in &d.op_dag.entries {
                h[r * self.dim + col] += c.conj() * v;
            }
        }
        Ok(h)
    }

    /// X = (-iH - K/2)ρ at time t, so that the coherent and decay parts of
    /// dρ/dt are X + X† for Hermitian ρ.
    fn half_generator(&self, t: f64, rho: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        out.iter_mut().for_each(|x| *x = Complex64::default());
        let mi = Complex64::new(0.0, -1.0);
        for (d, c) in self.terms.iter().zip(self.coefficients(t)?) {
            d.op.left_axpy(mi * c, rho, out, self.dim);
            d.op_dag.left_axpy(mi * c.conj(), rho, out, self.dim);
        }
        self.decay.left_axpy(Complex64::new(-0.5, 0.0), rho, out, self.dim);
        Ok(())
    }

    fn derivative(&self, t: f64, rho: &[Complex64], scratch: &mut Work) -> Result<()> {
        let dim = self.dim;
        self.half_generator(t, rho, &mut scratch.x)?;
        let out = &mut scratch.out;
        for r in 0..dim {
            for c in 0..dim {
                out[r * dim + c] = scratch.x[r * dim + c] + scratch.x[c * dim + r].conj();
            }
        }
        let one = Complex64::new(1.0, 0.0);
        for l in &self.jumps {
            // L ρ L† = L (L ρ)† for Hermitian ρ.
            scratch.tmp.iter_mut().for_each(|x| *x = Complex64::default());
            l.left_axpy(one, rho, &mut scratch.tmp, dim);
            transpose_conj(&scratch.tmp, &mut scratch.tmp2, dim);
            l.left_axpy(one, &scratch.tmp2, out, dim);
        }
        Ok(())
    }

    /// Number of RK4 steps for a segment.
    fn steps_for(&self, duration: f64, detuning: f64) -> usize {
        let fastest = self
            .terms
            .iter()
            .map(|d| (d.sign * detuning + d.rate).abs())
            .fold(2.0 * PI / duration, f64::max);
        let periods = duration * fastest / (2.0 * PI);
        (periods * self.spec.steps_per_period as f64).ceil().max(1.0) as usize
    }

    /// Integrate a Hermitian ρ over the whole schedule.
    pub(crate) fn evolve(&self, rho: &mut Vec<Complex64>) -> Result<()> {
        let dim = self.dim;
        let tr0 = trace(rho, dim);
        let mut w = Work::new(dim);
        let mut t0 = 0.0;
        for seg in &self.spec.segments {
            let steps = self.steps_for(seg.duration, seg.detuning);
            let h = seg.duration / steps as f64;
            for k in 0..steps {
                let t = t0 + k as f64 * h;
                self.rk4_step(t, h, rho, &mut w)?;
            }
            t0 += seg.duration;
        }
        let drift = (trace(rho, dim) - tr0).norm();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::TraceDrift {
                drift,
                limit: TRACE_DRIFT_LIMIT,
            });
        }
        Ok(())
    }

    fn rk4_step(&self, t: f64, h: f64, rho: &mut [Complex64], w: &mut Work) -> Result<()> {
        let n = rho.len();
        w.acc.copy_from_slice(rho);
        let stages = [(0.0, 1.0 / 6.0), (0.5, 1.0 / 3.0), (0.5, 1.0 / 3.0), (1.0, 1.0 / 6.0)];
        w.stage.copy_from_slice(rho);
        for (i, &(c, b)) in stages.iter().enumerate() {
            let state = std::mem::take(&mut w.stage);
            self.derivative(t + c * h, &state, w)?;
            w.stage = state;
            for j in 0..n {
                w.acc[j] += w.out[j] * (b * h);
            }
            if i < 3 {
                let next = stages[i + 1].0 * h;
                for j in 0..n {
                    w.stage[j] = rho[j] + w.out[j] * next;
                }
            }
        }
        rho.copy_from_slice(&w.acc);
        Ok(())
    }
}

/// g · I_spin ⊗ f.
fn on_mode(f: &[Entry], g: f64, nf: usize) -> SparseOp {
    let spin: Vec<Entry> = (0..4).map(|s| (s, s, Complex64::new(g, 0.0))).collect();
    SparseOp::kron(&spin, f, nf)
}

struct Work {
    x: Vec<Complex64>,
    out: Vec<Complex64>,
    tmp: Vec<Complex64>,
    tmp2: Vec<Complex64>,
    acc: Vec<Complex64>,
    stage: Vec<Complex64>,
}

impl Work {
    fn new(dim: usize) -> Self {
        let z = || vec![Complex64::default(); dim * dim];
        Self {
            x: z(),
            out: z(),
            tmp: z(),
            tmp2: z(),
            acc: z(),
            stage: z(),
        }
    }
}

fn transpose_conj(a: &[Complex64], out: &mut [Complex64], dim: usize) {
    for r in 0..dim {
        for c in 0..dim {
            out[c * dim + r] = a[r * dim + c].conj();
        }
    }
}

fn trace(m: &[Complex64], dim: usize) -> Complex64 {
    (0..dim).map(|k| m[k * dim + k]).sum()
}

pub(crate) fn to_rows(m: &CMatrix) -> Vec<Complex64> {
    let dim = m.nrows();
    let mut v = vec![Complex64::default(); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            v[r * dim + c] = m[(r, c)];
        }
    }
    v
}

pub(crate) fn from_rows(v: &[Complex64], dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |r, c| v[r * dim + c])
}
