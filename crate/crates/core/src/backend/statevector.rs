//! Dense statevector with bit-masked 1- and 2-qubit kernels.
//!
//! Basis index bit `q` holds qubit `q`. A 4×4 matrix on targets `(a, b)` is
//! indexed by `2·bit(a) + bit(b)`.

use rand::Rng;

use crate::circuit::{Circuit, Gate, PostProcess};
use crate::linalg::{C64, ONE, ZERO};

pub fn apply_1q(amps: &mut [C64], q: usize, m: &[C64]) {
    let bit = 1usize << q;
    let (m00, m01, m10, m11) = (m[0], m[1], m[2], m[3]);
    let len = amps.len();
    let mut base = 0;
    while base < len {
        for i in base..base + bit {
            let a0 = amps[i];
            let a1 = amps[i | bit];
            amps[i] = m00 * a0 + m01 * a1;
            amps[i | bit] = m10 * a0 + m11 * a1;
        }
        base += bit << 1;
    }
}

pub fn apply_2q(amps: &mut [C64], qa: usize, qb: usize, m: &[C64]) {
    let (ba, bb) = (1usize << qa, 1usize << qb);
    let offsets = [0, bb, ba, ba | bb];
    for i in 0..amps.len() {
        if i & (ba | bb) != 0 {
            continue;
        }
        let v = [amps[i], amps[i | bb], amps[i | ba], amps[i | ba | bb]];
        for (r, &off) in offsets.iter().enumerate() {
            let row = &m[r * 4..r * 4 + 4];
            amps[i | off] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
    }
}

pub fn apply_matrix(amps: &mut [C64], targets: &[usize], m: &[C64]) {
    match targets {
        [q] => apply_1q(amps, *q, m),
        [a, b] => apply_2q(amps, *a, *b, m),
        _ => unreachable!("gates act on one or two qubits"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> StateVector {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        StateVector { n, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> StateVector {
        assert!(amps.len().is_power_of_two());
        StateVector { n: amps.len().trailing_zeros() as usize, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn apply(&mut self, targets: &[usize], m: &[C64]) {
        apply_matrix(&mut self.amps, targets, m);
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        self.apply(gate.targets(), gate.matrix());
    }

    pub fn run(circuit: &Circuit) -> StateVector {
        let mut sv = StateVector::zero(circuit.n);
        for g in &circuit.gates {
            sv.apply_gate(g);
        }
        sv
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `E_y f(y)` under a terminal computational-basis measurement.
    pub fn expectation(&self, post: &PostProcess) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(y, a)| {
                let p = a.norm_sqr();
                if p == 0.0 {
                    0.0
                } else {
                    p * post.eval(y as u64)
                }
            })
            .sum()
    }

    /// Probability that qubit `q` reads 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Project qubit `q` onto `outcome` and renormalize.
    pub fn collapse(&mut self, q: usize, outcome: bool, prob: f64) {
        let bit = 1usize << q;
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & bit) != 0) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
    }

    /// Born-rule sample of a Z measurement on `q`, collapsing the state.
    pub fn measure<R: Rng>(&mut self, q: usize, rng: &mut R) -> bool {
        let p1 = self.prob_one(q).clamp(0.0, 1.0);
        let outcome = rng.gen::<f64>() < p1;
        self.collapse(q, outcome, if outcome { p1 } else { 1.0 - p1 });
        outcome
    }

    /// Sample a full basis index.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let mut u = rng.gen::<f64>() * self.norm_sqr();
        for (i, a) in self.amps.iter().enumerate() {
            u -= a.norm_sqr();
            if u < 0.0 {
                return i;
            }
        }
        // Round-off: fall back to the last index with nonzero weight.
        self.amps.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{pauli_observable_expectation_post, GateKind};
    use crate::linalg::embed;

    #[test]
    fn kernels_agree_with_dense_embedding() {
        let gates = [
            Gate::one(GateKind::Ry(0.4), 2),
            Gate::two(GateKind::Cnot, 2, 0),
            Gate::two(GateKind::Rpp { paulis: [crate::Pauli::X, crate::Pauli::Y], angle: 0.9 }, 1, 2),
            Gate::one(GateKind::H, 1),
        ];
        let mut sv = StateVector::zero(3);
        let mut dense = nalgebra::DVector::from_element(8, ZERO);
        dense[0] = ONE;
        for g in &gates {
            sv.apply_gate(g);
            dense = embed(g.matrix(), g.targets(), 3) * dense;
        }
        for i in 0..8 {
            assert!((sv.amplitudes()[i] - dense[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn bell_pair_parities() {
        let c = Circuit::with_gates(2, vec![Gate::one(GateKind::H, 0), Gate::two(GateKind::Cnot, 0, 1)]);
        let sv = StateVector::run(&c);
        let zz = pauli_observable_expectation_post("ZZ").unwrap();
        let zi = pauli_observable_expectation_post("ZI").unwrap();
        assert!((sv.expectation(&zz) - 1.0).abs() < 1e-12);
        assert!(sv.expectation(&zi).abs() < 1e-12);
    }
}
