//! Dense complex linear algebra and Pauli-basis utilities.
//!
//! Qubit 0 is the most significant bit of a basis index and the leftmost
//! Kronecker factor. All matrices are `nalgebra` dense matrices over
//! `Complex64`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-10;

/// Largest supported register for Pauli-basis enumeration.
pub const MAX_PAULI_QUBITS: usize = 5;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Entrywise max |a - b|.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// max |U^dag U - I|.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(m.adjoint() * m), &identity(m.nrows()))
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    unitarity_deviation(m) < tol
}

/// |Tr[A^dag B]| / dim, equal to 1 exactly when A and B agree up to a global phase.
pub fn phase_overlap(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    let tr: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    tr.norm() / a.nrows() as f64
}

pub fn equal_up_to_phase(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && (phase_overlap(a, b) - 1.0).abs() < tol
}

pub fn kron2(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Kronecker product of the factors, leftmost factor most significant.
pub fn kron(factors: &[CMatrix]) -> Result<CMatrix> {
    let (first, rest) = factors.split_first().ok_or(Error::EmptyKron)?;
    Ok(rest.iter().fold(first.clone(), |acc, f| kron2(&acc, f)))
}

/// exp(-i s H) for Hermitian `h`, computed through its eigendecomposition.
pub fn herm_exp(h: &CMatrix, s: f64) -> Result<CMatrix> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    let deviation = hermiticity_deviation(h);
    if deviation >= HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    // Symmetrize so the eigensolver sees an exactly Hermitian input.
    let hs = (h + h.adjoint()).scale(0.5);
    let eig = hs.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = eig.eigenvalues.map(|lam| Complex64::from_polar(1.0, -s * lam));
    let mut vd = v.clone();
    for (j, ph) in phases.iter().enumerate() {
        for x in vd.column_mut(j).iter_mut() {
            *x *= ph;
        }
    }
    Ok(&vd * v.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Self::ALL[i & 3]
    }

    pub fn matrix(self) -> CMatrix {
        let (o, z, i) = (c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 1.0));
        match self {
            Pauli::I => CMatrix::from_row_slice(2, 2, &[o, z, z, o]),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Product up to phase.
    pub fn mul_ignoring_phase(self, other: Pauli) -> Pauli {
        let (ax, az) = self.xz();
        let (bx, bz) = other.xz();
        Pauli::from_xz(ax ^ bx, az ^ bz)
    }

    pub fn xz(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_xz(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// Tensor product of single-qubit Paulis; `labels[0]` acts on qubit 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    labels: Vec<Pauli>,
}

impl PauliString {
    pub fn new(labels: Vec<Pauli>) -> Self {
        Self { labels }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            labels: vec![Pauli::I; n],
        }
    }

    /// Basis element `index` in lexicographic I<X<Y<Z order, qubit 0 most significant.
    pub fn from_index(n: usize, index: usize) -> Self {
        let labels = (0..n)
            .map(|q| Pauli::from_index(index >> (2 * (n - 1 - q))))
            .collect();
        Self { labels }
    }

    pub fn index(&self) -> usize {
        self.labels
            .iter()
            .fold(0, |acc, p| (acc << 2) | p.index())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.labels
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&p| p == Pauli::I)
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n() - 1 - q)
    }

    /// Basis-index mask of qubits flipped by the string.
    pub fn x_mask(&self) -> usize {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.xz().0)
            .fold(0, |m, (q, _)| m | self.bit(q))
    }

    /// Basis-index mask of qubits contributing a (-1)^bit sign.
    pub fn z_mask(&self) -> usize {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.xz().1)
            .fold(0, |m, (q, _)| m | self.bit(q))
    }

    fn y_phase(&self) -> Complex64 {
        let ny = self.labels.iter().filter(|&&p| p == Pauli::Y).count();
        [c64(1.0, 0.0), c64(0.0, 1.0), c64(-1.0, 0.0), c64(0.0, -1.0)][ny % 4]
    }

    /// Action on a basis state: P|b> = phase |b ^ x_mask>.
    pub fn action(&self) -> PauliAction {
        PauliAction {
            x_mask: self.x_mask(),
            z_mask: self.z_mask(),
            phase: self.y_phase(),
        }
    }

    pub fn matrix(&self) -> CMatrix {
        let act = self.action();
        let d = 1usize << self.n();
        let mut m = CMatrix::zeros(d, d);
        for b in 0..d {
            m[(b ^ act.x_mask, b)] = act.coeff(b);
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.labels {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse {
                    line: 0,
                    message: format!("bad Pauli label '{other}'"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { labels })
    }
}

/// Sparse form of a Pauli string: column `b` holds `coeff(b)` at row `b ^ x_mask`.
#[derive(Debug, Clone, Copy)]
pub struct PauliAction {
    pub x_mask: usize,
    pub z_mask: usize,
    pub phase: Complex64,
}

impl PauliAction {
    #[inline]
    pub fn coeff(&self, b: usize) -> Complex64 {
        if (b & self.z_mask).count_ones() % 2 == 1 {
            -self.phase
        } else {
            self.phase
        }
    }

    /// Tr[P M] in O(dim).
    pub fn trace_with(&self, m: &CMatrix) -> Complex64 {
        // Tr[P M] = sum_b P[b, c] M[c, b] with c = b ^ x.
        (0..m.nrows())
            .map(|c| self.coeff(c) * m[(c, c ^ self.x_mask)])
            .sum()
    }
}

/// All 4^n Pauli strings in lexicographic I<X<Y<Z order, identity first.
///
/// Plain (unnormalized) strings: Tr[P_i P_j] = 2^n δ_ij.
pub fn pauli_basis(n: usize) -> Result<Vec<CMatrix>> {
    if n == 0 || n > MAX_PAULI_QUBITS {
        return Err(Error::QubitRange(n));
    }
    Ok((0..1usize << (2 * n))
        .map(|i| PauliString::from_index(n, i).matrix())
        .collect())
}

pub fn pauli_labels(n: usize) -> Vec<String> {
    (0..1usize << (2 * n))
        .map(|i| PauliString::from_index(n, i).to_string())
        .collect()
}

/// Offsets of the 2^k sub-basis states of `qubits` inside an n-qubit index.
fn local_offsets(qubits: &[usize], n: usize) -> (Vec<usize>, usize) {
    let k = qubits.len();
    let mut mask = 0;
    for &q in qubits {
        mask |= 1 << (n - 1 - q);
    }
    let offsets = (0..1usize << k)
        .map(|s| {
            qubits.iter().enumerate().fold(0, |acc, (b, &q)| {
                if (s >> (k - 1 - b)) & 1 == 1 {
                    acc | (1 << (n - 1 - q))
                } else {
                    acc
                }
            })
        })
        .collect();
    (offsets, mask)
}

/// In place `m <- (op on qubits) * m` without materializing the embedded operator.
pub fn apply_local(m: &mut CMatrix, op: &CMatrix, qubits: &[usize], n: usize) {
    let dim = 1usize << n;
    debug_assert_eq!(m.nrows(), dim);
    debug_assert_eq!(op.nrows(), 1 << qubits.len());
    let (offsets, mask) = local_offsets(qubits, n);
    let sub = offsets.len();
    let mut buf = vec![Complex64::default(); sub];
    let ncols = m.ncols();
    let data = m.as_mut_slice();
    for col in 0..ncols {
        let column = &mut data[col * dim..(col + 1) * dim];
        for base in (0..dim).filter(|b| b & mask == 0) {
            for (s, off) in offsets.iter().enumerate() {
                buf[s] = column[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = Complex64::default();
                for (s, v) in buf.iter().enumerate() {
                    acc += op[(r, s)] * v;
                }
                column[base | off] = acc;
            }
        }
    }
}

/// The operator `op` acting on `qubits` of an n-qubit register, as a full matrix.
pub fn embed(op: &CMatrix, qubits: &[usize], n: usize) -> CMatrix {
    let mut m = identity(1 << n);
    apply_local(&mut m, op, qubits, n);
    m
}

/// rho <- U rho U^dag with U acting on `qubits`.
pub fn conjugate_local(rho: &mut CMatrix, op: &CMatrix, qubits: &[usize], n: usize) {
    apply_local(rho, op, qubits, n);
    let mut adj = rho.adjoint();
    apply_local(&mut adj, op, qubits, n);
    *rho = adj.adjoint();
}
