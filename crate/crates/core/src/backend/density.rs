//! Exact fragment engine: a signed density operator over `w` wires.
//!
//! The operator is stored as a vector over `2w` bits (row bits `0..w`, column
//! bits `w..2w`), so unitary conjugation reuses the statevector kernels:
//! `U` on the row bit and `conj(U)` on the column bit.

use crate::backend::statevector::apply_matrix;
use crate::linalg::{dagger, Pauli, C64, ONE, ZERO};

pub struct SignedDensity {
    w: usize,
    data: Vec<C64>,
}

fn conj(m: &[C64]) -> Vec<C64> {
    m.iter().map(|z| z.conj()).collect()
}

impl SignedDensity {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero(w: usize) -> SignedDensity {
        let mut data = vec![ZERO; 1 << (2 * w)];
        data[0] = ONE;
        SignedDensity { w, data }
    }

    pub fn apply_unitary(&mut self, wires: &[usize], m: &[C64]) {
        apply_matrix(&mut self.data, wires, m);
        let cols: Vec<usize> = wires.iter().map(|q| q + self.w).collect();
        apply_matrix(&mut self.data, &cols, &conj(m));
    }

    fn rotate_to_z(&mut self, wire: usize, pauli: Pauli) {
        if matches!(pauli, Pauli::X | Pauli::Y) {
            self.apply_unitary(&[wire], &pauli.diagonalizer());
        }
    }

    fn rotate_from_z(&mut self, wire: usize, pauli: Pauli) {
        if matches!(pauli, Pauli::X | Pauli::Y) {
            self.apply_unitary(&[wire], &dagger(&pauli.diagonalizer(), 2));
        }
    }

    /// `ρ → Σ_σ σ P_σ ρ P_σ`: the measured wire stays in the state.
    pub fn measure_keep(&mut self, wire: usize, pauli: Pauli) {
        if pauli == Pauli::I {
            return;
        }
        self.rotate_to_z(wire, pauli);
        let (rb, cb) = (1usize << wire, 1usize << (wire + self.w));
        for (idx, z) in self.data.iter_mut().enumerate() {
            let (r, c) = (idx & rb != 0, idx & cb != 0);
            if r != c {
                *z = ZERO;
            } else if r {
                *z = -*z;
            }
        }
        self.rotate_from_z(wire, pauli);
    }

    /// `ρ → Tr_wire[O ρ] ⊗ |0⟩⟨0|`: measure, weight by the outcome, reset.
    pub fn measure_discard(&mut self, wire: usize, pauli: Pauli) {
        self.rotate_to_z(wire, pauli);
        let (rb, cb) = (1usize << wire, 1usize << (wire + self.w));
        let sign = if pauli == Pauli::I { 1.0 } else { -1.0 };
        for idx in 0..self.data.len() {
            if idx & (rb | cb) == 0 {
                let one = self.data[idx | rb | cb];
                self.data[idx] += one * sign;
                self.data[idx | rb | cb] = ZERO;
                self.data[idx | rb] = ZERO;
                self.data[idx | cb] = ZERO;
            }
        }
    }

    /// `w(y) = Σ_{rest} ρ_{(y,rest),(y,rest)}` over terminal wires, packed with
    /// bit `i` = terminal `i`.
    pub fn terminal_weights(&self, terminals: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << terminals.len()];
        for r in 0..(1usize << self.w) {
            let z = self.data[r | (r << self.w)];
            if z == ZERO {
                continue;
            }
            let y = terminals
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &t)| acc | (((r >> t) & 1) << i));
            out[y] += z.re;
        }
        out
    }
}
