//! Pauli transfer matrices.
//!
//! `R_ij = Tr[P_i Λ(P_j)] / 2^n` over plain Pauli strings in lexicographic
//! I<X<Y<Z order. A state is carried as its Pauli vector `v_i = Tr[P_i ρ]`,
//! so `ρ = (1/2^n) Σ v_i P_i` and a channel acts as `v -> R v`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{self, CMatrix, PauliAction, PauliString, MAX_PAULI_QUBITS};

pub const TP_TOL: f64 = 1e-10;
pub const CP_TOL: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Ptm {
    n: usize,
    m: DMatrix<f64>,
}

fn actions(n: usize) -> Vec<PauliAction> {
    (0..1usize << (2 * n))
        .map(|i| PauliString::from_index(n, i).action())
        .collect()
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PAULI_QUBITS {
        Err(Error::QubitRange(n))
    } else {
        Ok(())
    }
}

impl Ptm {
    pub fn new(n: usize, m: DMatrix<f64>) -> Result<Self> {
        check_n(n)?;
        let d2 = 1usize << (2 * n);
        if m.nrows() != d2 || m.ncols() != d2 {
            return Err(Error::DimensionMismatch {
                expected: d2,
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(Self { n, m })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_n(n)?;
        let d2 = 1usize << (2 * n);
        Ok(Self {
            n,
            m: DMatrix::identity(d2, d2),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// `other` applied first, then `self`.
    pub fn after(&self, other: &Ptm) -> Result<Ptm> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(Ptm {
            n: self.n,
            m: &self.m * &other.m,
        })
    }

    /// max |R_0j - δ_0j|.
    pub fn trace_preservation_error(&self) -> f64 {
        self.m
            .row(0)
            .iter()
            .enumerate()
            .map(|(j, &x)| (x - if j == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    /// max |R Rᵀ - I|, zero for unitary channels.
    pub fn orthogonality_deviation(&self) -> f64 {
        let p = &self.m * self.m.transpose();
        let id = DMatrix::<f64>::identity(self.dim(), self.dim());
        (p - id).abs().max()
    }

    /// Trace-one Choi matrix J = (1/d²) Σ_ij R_ij P_jᵀ ⊗ P_i.
    pub fn choi(&self) -> CMatrix {
        let d = 1usize << self.n;
        let acts = actions(self.n);
        let mut j = CMatrix::zeros(d * d, d * d);
        let norm = 1.0 / (d * d) as f64;
        for (jj, pj) in acts.iter().enumerate() {
            for (ii, pi) in acts.iter().enumerate() {
                let r = self.m[(ii, jj)];
                if r == 0.0 {
                    continue;
                }
                // P_jᵀ[a, b] is nonzero at a = b ^ x_j with value coeff_j(a).
                for b in 0..d {
                    let a = b ^ pj.x_mask;
                    let cj = pj.coeff(a);
                    for c in 0..d {
                        let rr = c ^ pi.x_mask;
                        let ci = pi.coeff(c);
                        j[(a * d + rr, b * d + c)] += cj * ci * (r * norm);
                    }
                }
            }
        }
        j
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        let j = self.choi();
        let h = (&j + j.adjoint()).scale(0.5);
        h.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Trace preservation and complete positivity within the given tolerances.
    pub fn check_cptp_with(&self, tp_tol: f64, cp_floor: f64) -> Result<()> {
        let tp = self.trace_preservation_error();
        if tp > tp_tol {
            return Err(Error::NotCptp(format!(
                "first row deviates from e1 by {tp:.3e}"
            )));
        }
        let ev = self.choi_min_eigenvalue();
        if ev < cp_floor {
            return Err(Error::NotCptp(format!(
                "Choi minimum eigenvalue {ev:.3e} below {cp_floor:.1e}"
            )));
        }
        Ok(())
    }

    pub fn check_cptp(&self) -> Result<()> {
        self.check_cptp_with(TP_TOL, CP_TOL)
    }

    /// Sum of |R_ij| over i != j.
    pub fn off_diagonal_mass(&self) -> f64 {
        let mut s = 0.0;
        for ((i, j), x) in self.m.iter().enumerate().map(|(k, x)| ((k % self.dim(), k / self.dim()), x)) {
            if i != j {
                s += x.abs();
            }
        }
        s
    }

    /// Entrywise average of PTMs of equal size.
    pub fn mean(ptms: &[Ptm]) -> Result<Ptm> {
        let first = ptms
            .first()
            .ok_or_else(|| Error::InvalidCircuit("mean of zero PTMs".into()))?;
        let mut acc = DMatrix::<f64>::zeros(first.dim(), first.dim());
        for p in ptms {
            if p.n != first.n {
                return Err(Error::DimensionMismatch {
                    expected: first.n,
                    found: p.n,
                });
            }
            acc += &p.m;
        }
        Ok(Ptm {
            n: first.n,
            m: acc / ptms.len() as f64,
        })
    }

    /// Lift a k-qubit PTM acting on `qubits` to an n-qubit PTM.
    pub fn embed(&self, qubits: &[usize], n: usize) -> Result<Ptm> {
        check_n(n)?;
        if qubits.len() != self.n || qubits.iter().any(|&q| q >= n) {
            return Err(Error::InvalidCircuit(format!(
                "cannot place a {}-qubit PTM on qubits {qubits:?} of {n}",
                self.n
            )));
        }
        let rest: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
        let place = |local: usize, other: usize| -> usize {
            let mut digits = vec![0usize; n];
            for (b, &q) in qubits.iter().enumerate() {
                digits[q] = (local >> (2 * (qubits.len() - 1 - b))) & 3;
            }
            for (b, &q) in rest.iter().enumerate() {
                digits[q] = (other >> (2 * (rest.len() - 1 - b))) & 3;
            }
            digits.iter().fold(0, |acc, d| (acc << 2) | d)
        };
        let d2 = 1usize << (2 * n);
        let mut m = DMatrix::<f64>::zeros(d2, d2);
        let k2 = self.dim();
        for o in 0..1usize << (2 * rest.len()) {
            let rows: Vec<usize> = (0..k2).map(|l| place(l, o)).collect();
            for (lj, &cj) in rows.iter().enumerate() {
                for (li, &ri) in rows.iter().enumerate() {
                    m[(ri, cj)] = self.m[(li, lj)];
                }
            }
        }
        Ok(Ptm { n, m })
    }

    /// Row-major CSV with `# n=` and `# basis=` header lines.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# n={}", self.n);
        let _ = writeln!(s, "# basis={}", qmat::pauli_labels(self.n).join(","));
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|j| format!("{}", self.m[(i, j)])).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Ptm> {
        let mut n = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = k + 1;
            let perr = |message: String| Error::Parse { line: lineno, message };
            if let Some(h) = line.strip_prefix('#') {
                let h = h.trim();
                if let Some(v) = h.strip_prefix("n=") {
                    n = Some(v.trim().parse::<usize>().map_err(|e| perr(format!("bad n: {e}")))?);
                } else if let Some(v) = h.strip_prefix("basis=") {
                    let nn = n.ok_or_else(|| perr("basis header before n".into()))?;
                    if v.trim() != qmat::pauli_labels(nn).join(",") {
                        return Err(perr("unsupported basis order".into()));
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| perr(format!("bad value '{t}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let n = n.ok_or(Error::Parse {
            line: 1,
            message: "missing '# n=' header".into(),
        })?;
        check_n(n)?;
        let d2 = 1usize << (2 * n);
        if rows.len() != d2 || rows.iter().any(|r| r.len() != d2) {
            return Err(Error::DimensionMismatch {
                expected: d2,
                found: rows.len(),
            });
        }
        Ok(Ptm {
            n,
            m: DMatrix::from_fn(d2, d2, |i, j| rows[i][j]),
        })
    }
}

/// PTM of ρ -> U ρ U†.
pub fn ptm_of_unitary(u: &CMatrix) -> Result<Ptm> {
    let d = u.nrows();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::DimensionMismatch {
            expected: d.next_power_of_two().max(2),
            found: d,
        });
    }
    let n = d.trailing_zeros() as usize;
    check_n(n)?;
    let deviation = qmat::unitarity_deviation(u);
    if deviation > 1e-10 {
        return Err(Error::NotUnitary { deviation });
    }
    let acts = actions(n);
    let ud = u.adjoint();
    let d2 = acts.len();
    let mut m = DMatrix::<f64>::zeros(d2, d2);
    for (j, pj) in acts.iter().enumerate() {
        // U P_j: column b of P_j is coeff(b) e_{b^x}.
        let mut upj = CMatrix::zeros(d, d);
        for b in 0..d {
            let src = b ^ pj.x_mask;
            let c = pj.coeff(b);
            for r in 0..d {
                upj[(r, b)] = u[(r, src)] * c;
            }
        }
        let img = upj * &ud;
        for (i, pi) in acts.iter().enumerate() {
            m[(i, j)] = pi.trace_with(&img).re / d as f64;
        }
    }
    Ok(Ptm { n, m })
}

/// diag(1, p, ..., p): the state survives with probability p, else is fully mixed.
pub fn depolarizing_ptm(n: usize, p: f64) -> Result<Ptm> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("depolarizing p={p} not in [0, 1]")));
    }
    let mut r = Ptm::identity(n)?;
    for i in 1..r.dim() {
        r.m[(i, i)] = p;
    }
    Ok(r)
}

/// Compose in application order: `seq[0]` acts first, so the product is R_last ··· R_first.
pub fn compose_ptms(seq: &[Ptm]) -> Result<Ptm> {
    let first = seq
        .first()
        .ok_or_else(|| Error::InvalidCircuit("empty PTM sequence".into()))?;
    seq[1..].iter().try_fold(first.clone(), |acc, r| r.after(&acc))
}

/// Tr[R_idealᵀ R] / 4^n.
pub fn process_fidelity(r: &Ptm, ideal: &Ptm) -> Result<f64> {
    if r.n != ideal.n {
        return Err(Error::DimensionMismatch {
            expected: ideal.n,
            found: r.n,
        });
    }
    Ok(ideal.m.dot(&r.m) / r.dim() as f64)
}

pub fn avg_fidelity_from_ptm(r: &Ptm, ideal: &Ptm) -> Result<f64> {
    let d = (1usize << r.n) as f64;
    Ok((d * process_fidelity(r, ideal)? + 1.0) / (d + 1.0))
}

/// Pauli vector v_i = Tr[P_i ρ].
pub fn pauli_vector(rho: &CMatrix) -> Result<DVector<f64>> {
    let d = rho.nrows();
    let n = d.trailing_zeros() as usize;
    check_n(n)?;
    Ok(DVector::from_iterator(
        1 << (2 * n),
        actions(n).iter().map(|a| a.trace_with(rho).re),
    ))
}

pub fn density_from_pauli_vector(n: usize, v: &DVector<f64>) -> Result<CMatrix> {
    check_n(n)?;
    let d = 1usize << n;
    let mut rho = CMatrix::zeros(d, d);
    for (a, &vi) in actions(n).iter().zip(v.iter()) {
        if vi == 0.0 {
            continue;
        }
        for b in 0..d {
            rho[(b ^ a.x_mask, b)] += a.coeff(b) * (vi / d as f64);
        }
    }
    Ok(rho)
}

/// Computational-basis probabilities from a Pauli vector (only Z-type strings contribute).
pub fn probabilities_from_pauli_vector(n: usize, v: &DVector<f64>) -> Vec<f64> {
    let d = 1usize << n;
    let mut p = vec![0.0; d];
    for (i, a) in actions(n).iter().enumerate() {
        if a.x_mask != 0 || v[i] == 0.0 {
            continue;
        }
        for (b, pb) in p.iter_mut().enumerate() {
            *pb += a.coeff(b).re * v[i];
        }
    }
    p.iter_mut().for_each(|x| *x /= d as f64);
    p
}

/// Apply a k-qubit PTM on `qubits` to an n-qubit density matrix in place.
///
/// Writes ρ = 2^{-k} Σ_j P_j ⊗ σ_j with σ_j = Tr_S[(P_j ⊗ I) ρ], so
/// Λ(ρ) = 2^{-k} Σ_i P_i ⊗ (Σ_j R_ij σ_j).
pub fn apply_ptm_to_density(rho: &mut CMatrix, r: &Ptm, qubits: &[usize], n: usize) -> Result<()> {
    let k = r.n;
    if qubits.len() != k || qubits.iter().any(|&q| q >= n) || rho.nrows() != 1 << n {
        return Err(Error::InvalidCircuit(format!(
            "cannot apply a {k}-qubit PTM on qubits {qubits:?} of a {n}-qubit state"
        )));
    }
    let rest: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
    let dk = 1usize << k;
    let dr = 1usize << rest.len();
    // full[s][a]: basis index with sub-index s on `qubits` and a on the rest.
    let spread = |x: usize, qs: &[usize]| -> usize {
        qs.iter().enumerate().fold(0, |acc, (b, &q)| {
            if (x >> (qs.len() - 1 - b)) & 1 == 1 {
                acc | (1 << (n - 1 - q))
            } else {
                acc
            }
        })
    };
    let full: Vec<Vec<usize>> = (0..dk)
        .map(|s| (0..dr).map(|a| spread(s, qubits) | spread(a, &rest)).collect())
        .collect();
    let acts = actions(k);
    let sigmas: Vec<CMatrix> = acts
        .iter()
        .map(|pj| {
            CMatrix::from_fn(dr, dr, |a, b| {
                (0..dk)
                    .map(|s| pj.coeff(s) * rho[(full[s][a], full[s ^ pj.x_mask][b])])
                    .sum()
            })
        })
        .collect();
    let mut out = CMatrix::zeros(1 << n, 1 << n);
    let scale = 1.0 / dk as f64;
    for (i, pi) in acts.iter().enumerate() {
        let mut tau = CMatrix::zeros(dr, dr);
        for (j, sj) in sigmas.iter().enumerate() {
            let rij = r.m[(i, j)];
            if rij != 0.0 {
                tau += sj.scale(rij);
            }
        }
        for sp in 0..dk {
            let s = sp ^ pi.x_mask;
            let c: Complex64 = pi.coeff(sp) * scale;
            for a in 0..dr {
                for b in 0..dr {
                    out[(full[s][a], full[sp][b])] += c * tau[(a, b)];
                }
            }
        }
    }
    *rho = out;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{vz_unitary, xx_unitary};
    use crate::qmat::{kron2, Pauli};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn superop_oracle(u: &CMatrix) -> DMatrix<f64> {
        // Direct definition with dense Pauli matrices.
        let n = u.nrows().trailing_zeros() as usize;
        let basis = qmat::pauli_basis(n).unwrap();
        let d = u.nrows() as f64;
        DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
            qmat::trace(&(&basis[i] * u * &basis[j] * u.adjoint())).re / d
        })
    }

    #[test]
    fn unitary_ptm_examples() {
        let id = ptm_of_unitary(&qmat::identity(2)).unwrap();
        assert_eq!(id, Ptm::identity(1).unwrap());
        let z = ptm_of_unitary(&vz_unitary(PI)).unwrap();
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, -1.0, 1.0]));
        assert!((z.matrix() - expect).abs().max() < 1e-15);
        let u = xx_unitary(FRAC_PI_4, 0.0);
        let r = ptm_of_unitary(&u).unwrap();
        assert!(r.orthogonality_deviation() < 1e-12);
        assert!((r.matrix() - superop_oracle(&u)).abs().max() < 1e-14);
        let mut bad = qmat::identity(2);
        bad[(0, 0)] = qmat::c64(2.0, 0.0);
        assert!(matches!(ptm_of_unitary(&bad), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn depolarizing_examples() {
        assert_eq!(depolarizing_ptm(2, 1.0).unwrap(), Ptm::identity(2).unwrap());
        let r = depolarizing_ptm(1, 0.0).unwrap();
        assert_eq!(r.matrix().trace(), 1.0);
        let r = depolarizing_ptm(2, 0.87).unwrap();
        assert_eq!(r.matrix()[(0, 0)], 1.0);
        for i in 1..16 {
            assert_eq!(r.matrix()[(i, i)], 0.87);
        }
        assert!(depolarizing_ptm(1, 1.5).is_err());
        r.check_cptp().unwrap();
    }

    #[test]
    fn compose_examples() {
        let u = xx_unitary(0.3, 0.2);
        let r = ptm_of_unitary(&u).unwrap();
        let id = Ptm::identity(2).unwrap();
        assert_eq!(compose_ptms(&[r.clone(), id]).unwrap(), r);
        let rd = ptm_of_unitary(&u.adjoint()).unwrap();
        let c = compose_ptms(&[r.clone(), rd]).unwrap();
        assert!((c.matrix() - DMatrix::identity(16, 16)).abs().max() < 1e-12);
        // application order: A then B equals PTM of B·A
        let a = xx_unitary(0.4, 0.0);
        let b = kron2(&vz_unitary(0.9), &qmat::identity(2));
        let seq = compose_ptms(&[ptm_of_unitary(&a).unwrap(), ptm_of_unitary(&b).unwrap()]).unwrap();
        let direct = ptm_of_unitary(&(&b * &a)).unwrap();
        assert!((seq.matrix() - direct.matrix()).abs().max() < 1e-12);
        assert!(compose_ptms(&[Ptm::identity(1).unwrap(), Ptm::identity(2).unwrap()]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let r = ptm_of_unitary(&xx_unitary(0.7, 0.1)).unwrap();
        assert!((avg_fidelity_from_ptm(&r, &r).unwrap() - 1.0).abs() < 1e-12);
        let mix = depolarizing_ptm(1, 0.0).unwrap();
        let id = Ptm::identity(1).unwrap();
        assert!((avg_fidelity_from_ptm(&mix, &id).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unitary_process_fidelity_matches_trace_formula() {
        let u = xx_unitary(FRAC_PI_4, 0.0);
        let v = xx_unitary(FRAC_PI_4 * 1.05, 0.07);
        let fe = (u.adjoint() * &v).trace().norm_sqr() / 16.0;
        let fp = process_fidelity(&ptm_of_unitary(&v).unwrap(), &ptm_of_unitary(&u).unwrap()).unwrap();
        assert!((fe - fp).abs() < 1e-12);
    }

    #[test]
    fn choi_detects_non_cp() {
        let id = Ptm::identity(1).unwrap();
        assert!((id.choi().trace().re - 1.0).abs() < 1e-14);
        assert!(id.choi_min_eigenvalue() > -1e-12);
        // transpose map: diag(1, 1, -1, 1) is positive but not completely positive
        let mut t = Ptm::identity(1).unwrap();
        t.m[(2, 2)] = -1.0;
        assert!(t.choi_min_eigenvalue() < -0.1);
        assert!(t.check_cptp().is_err());
    }

    #[test]
    fn embed_matches_kron() {
        let u = xx_unitary(0.3, 0.5);
        let local = ptm_of_unitary(&u).unwrap();
        let full = ptm_of_unitary(&qmat::embed(&u, &[2, 0], 3)).unwrap();
        let e = local.embed(&[2, 0], 3).unwrap();
        assert!((full.matrix() - e.matrix()).abs().max() < 1e-13);
    }

    #[test]
    fn density_application_matches_unitary() {
        let u = xx_unitary(0.37, 0.2);
        let mut psi = CMatrix::zeros(8, 1);
        for k in 0..8 {
            psi[(k, 0)] = qmat::c64(k as f64 + 1.0, 0.5 * k as f64);
        }
        let psi = psi.scale(1.0 / psi.norm());
        let rho = &psi * psi.adjoint();
        let mut a = rho.clone();
        qmat::conjugate_local(&mut a, &u, &[2, 1], 3);
        let mut b = rho.clone();
        apply_ptm_to_density(&mut b, &ptm_of_unitary(&u).unwrap(), &[2, 1], 3).unwrap();
        assert!(qmat::max_abs_diff(&a, &b) < 1e-14);
    }

    #[test]
    fn pauli_vector_round_trip() {
        let rho = kron2(&Pauli::X.matrix(), &Pauli::Z.matrix()).scale(0.1) + qmat::identity(4).scale(0.25);
        let v = pauli_vector(&rho).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15);
        let back = density_from_pauli_vector(2, &v).unwrap();
        assert!(qmat::max_abs_diff(&rho, &back) < 1e-15);
        let p = probabilities_from_pauli_vector(2, &v);
        for (b, pb) in p.iter().enumerate() {
            assert!((pb - rho[(b, b)].re).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_round_trip() {
        let r = ptm_of_unitary(&xx_unitary(0.123, 0.456)).unwrap();
        let text = r.to_csv();
        assert!(text.starts_with("# n=2\n# basis=II,IX,IY,IZ,XI"));
        assert_eq!(Ptm::from_csv(&text).unwrap(), r);
        let err = Ptm::from_csv("# n=1\n1,0,0,0\n0,1,0,x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}
