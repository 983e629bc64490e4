//! Small dense complex linear algebra shared by the circuit, cutting and
//! Hamiltonian modules.
//!
//! Matrices are stored row-major in flat slices. Anything larger than a
//! handful of qubits goes through `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(ch: char) -> Option<Pauli> {
        match ch {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> [C64; 4] {
        match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        }
    }

    /// Unitary `V` with `V P V†` diagonal (= Z for non-identity P).
    pub fn diagonalizer(self) -> [C64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Pauli::I | Pauli::Z => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)],
            // H · S†
            Pauli::Y => [c(h, 0.0), c(0.0, -h), c(h, 0.0), c(0.0, h)],
        }
    }
}

pub fn parse_pauli_string(s: &str) -> Option<Vec<Pauli>> {
    s.chars().map(Pauli::from_char).collect()
}

pub fn matmul(a: &[C64], b: &[C64], dim: usize) -> Vec<C64> {
    let mut out = vec![ZERO; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == ZERO {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

pub fn dagger(a: &[C64], dim: usize) -> Vec<C64> {
    let mut out = vec![ZERO; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[j * dim + i] = a[i * dim + j].conj();
        }
    }
    out
}

/// Kronecker product `a ⊗ b` of two square matrices.
pub fn kron(a: &[C64], da: usize, b: &[C64], db: usize) -> Vec<C64> {
    let d = da * db;
    let mut out = vec![ZERO; d * d];
    for i in 0..da {
        for j in 0..da {
            let aij = a[i * da + j];
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k) * d + j * db + l] = aij * b[k * db + l];
                }
            }
        }
    }
    out
}

pub fn identity(dim: usize) -> Vec<C64> {
    let mut out = vec![ZERO; dim * dim];
    for i in 0..dim {
        out[i * dim + i] = ONE;
    }
    out
}

/// Largest entrywise deviation of `U U†` from the identity.
pub fn unitarity_defect(u: &[C64], dim: usize) -> f64 {
    let prod = matmul(u, &dagger(u, dim), dim);
    let id = identity(dim);
    prod.iter()
        .zip(&id)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn trace(a: &[C64], dim: usize) -> C64 {
    (0..dim).map(|i| a[i * dim + i]).sum()
}

pub fn to_dmatrix(a: &[C64], dim: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(dim, dim, a)
}

pub fn from_dmatrix(m: &DMatrix<C64>) -> Vec<C64> {
    let dim = m.nrows();
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Hermitian part `(A + A†)/2`, used to scrub round-off before eigensolves.
fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn eigh(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = hermitize(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = h.nrows();
    let mut vecs = DMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[src]);
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// `exp(-i t H)` for Hermitian `H` through its eigendecomposition.
pub fn expm_hermitian(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let (vals, vecs) = eigh(h);
    let n = h.nrows();
    let mut scaled = vecs.clone();
    for (j, &lam) in vals.iter().enumerate() {
        let phase = C64::from_polar(1.0, -lam * t);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * vecs.adjoint()
}

/// Row-major convenience wrapper around [`expm_hermitian`].
pub fn expm_hermitian_flat(h: &[C64], dim: usize, t: f64) -> Vec<C64> {
    from_dmatrix(&expm_hermitian(&to_dmatrix(h, dim), t))
}

/// Operator (spectral) norm.
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Operator norm of a Hermitian matrix, `max |λ|`.
pub fn hermitian_norm(h: &DMatrix<C64>) -> f64 {
    let (vals, _) = eigh(h);
    vals.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Embed a 1- or 2-qubit operator acting on `targets` into an `n`-qubit
/// dense matrix. Qubit `q` is bit `q` of the basis index; for two targets the
/// first one is the more significant factor of the local 4×4 matrix.
pub fn embed(op: &[C64], targets: &[usize], n: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    let k = targets.len();
    let local = 1usize << k;
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut lc = 0usize;
        for &t in targets {
            lc = (lc << 1) | ((col >> t) & 1);
        }
        for lr in 0..local {
            let amp = op[lr * local + lc];
            if amp == ZERO {
                continue;
            }
            let mut row = col;
            for (pos, &t) in targets.iter().enumerate() {
                let bit = (lr >> (k - 1 - pos)) & 1;
                row = (row & !(1 << t)) | (bit << t);
            }
            out[(row, col)] += amp;
        }
    }
    out
}
