//! Specialized two-qubit gate cuts.
//!
//! A gate cut writes the gate's channel as `Σ_k c_k (L_k ⊗ R_k)` where each
//! side is a short list of local operations: unitaries and Pauli measurements
//! whose outcome σ multiplies the sample (`ρ → Σ_σ σ P_σ ρ P_σ`). The two
//! sides then run in separate fragments and only share the term index `k`.

use std::f64::consts::FRAC_PI_2;

use crate::circuit::{Gate, GateKind};
use crate::linalg::{c, Pauli, C64, I};

#[derive(Debug, Clone, PartialEq)]
pub enum LocalOp {
    Unitary(Vec<C64>),
    /// Pauli measurement that keeps the qubit and records σ.
    MeasureKeep(Pauli),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCutTerm {
    pub coeff: f64,
    /// Operations on the first and second target, applied in order.
    pub sides: [Vec<LocalOp>; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateCutKind {
    Cz,
    /// `exp(-i angle/2 · P⊗Q)`.
    PauliRotation { paulis: [Pauli; 2], angle: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCutRule {
    pub kind: GateCutKind,
    pub terms: Vec<GateCutTerm>,
}

impl GateCutRule {
    pub fn coeffs(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coeff).collect()
    }

    /// `Σ_k |c_k|`, the sampling overhead of this cut.
    pub fn overhead(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }
}

/// Specialized rule for a gate, if one exists.
pub fn rule_for(gate: &Gate) -> Option<GateCutRule> {
    match gate.kind() {
        GateKind::Cz => Some(cz_rule()),
        GateKind::Rpp { paulis, angle } if paulis.iter().all(|&p| p != Pauli::I) => {
            Some(pauli_rotation_rule(*paulis, *angle))
        }
        _ => None,
    }
}

fn rz(theta: f64) -> LocalOp {
    LocalOp::Unitary(GateKind::Rz(theta).matrix())
}

/// `exp(-i sg π/4 P)`.
fn quarter_turn(p: Pauli, sg: f64) -> LocalOp {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = p.matrix();
    let id = Pauli::I.matrix();
    LocalOp::Unitary((0..4).map(|i| id[i] * h - I * (sg * h) * m[i]).collect())
}

/// Six-term CZ cut. With `P_a = (I + aZ)/2`,
/// `2·(RZ(π/2)⊗RZ(π/2))∘CZ = I⊗I + Z⊗Z + Σ_{a1,a2} a1 a2 [P_{a2} ⊗ RZ(a1 π/2)] + mirrored`,
/// where `Σ_{a2} a2 P_{a2}·P_{a2}` is a kept Z measurement. Every term is
/// followed by `RZ(-π/2)` on both sides to undo the wrap.
pub fn cz_rule() -> GateCutRule {
    let z = || LocalOp::Unitary(GateKind::Z.matrix());
    let mz = || LocalOp::MeasureKeep(Pauli::Z);
    let raw: Vec<(f64, Vec<LocalOp>, Vec<LocalOp>)> = vec![
        (0.5, vec![], vec![]),
        (0.5, vec![z()], vec![z()]),
        (0.5, vec![mz()], vec![rz(FRAC_PI_2)]),
        (-0.5, vec![mz()], vec![rz(-FRAC_PI_2)]),
        (0.5, vec![rz(FRAC_PI_2)], vec![mz()]),
        (-0.5, vec![rz(-FRAC_PI_2)], vec![mz()]),
    ];
    let terms = raw
        .into_iter()
        .map(|(coeff, mut a, mut b)| {
            a.push(rz(-FRAC_PI_2));
            b.push(rz(-FRAC_PI_2));
            GateCutTerm { coeff, sides: [a, b] }
        })
        .collect();
    GateCutRule { kind: GateCutKind::Cz, terms }
}

/// The CZ cut as `(coefficient, [first-side ops, second-side ops])` terms.
pub fn cz_decomposition() -> Vec<GateCutTerm> {
    cz_rule().terms
}

/// Six-term cut of `exp(-iθ A⊗B)` with `θ = angle/2`, `c = cos θ`, `s = sin θ`:
/// `c²·id + s²·(A⊗B)·(A⊗B) + cs Σ_sg sg [M_A ⊗ R_sg^B] + cs Σ_sg sg [R_sg^A ⊗ M_B]`,
/// where `M_P` is a kept P measurement and `R_sg^P = exp(-i sg π/4 P)`.
/// The overhead is `1 + 2|sin 2θ|`.
pub fn pauli_rotation_rule(paulis: [Pauli; 2], angle: f64) -> GateCutRule {
    let theta = angle / 2.0;
    let (s, co) = theta.sin_cos();
    let [a, b] = paulis;
    let pu = |p: Pauli| LocalOp::Unitary(p.matrix().to_vec());
    let terms = vec![
        GateCutTerm { coeff: co * co, sides: [vec![], vec![]] },
        GateCutTerm { coeff: s * s, sides: [vec![pu(a)], vec![pu(b)]] },
        GateCutTerm { coeff: co * s, sides: [vec![LocalOp::MeasureKeep(a)], vec![quarter_turn(b, 1.0)]] },
        GateCutTerm { coeff: -co * s, sides: [vec![LocalOp::MeasureKeep(a)], vec![quarter_turn(b, -1.0)]] },
        GateCutTerm { coeff: co * s, sides: [vec![quarter_turn(a, 1.0)], vec![LocalOp::MeasureKeep(b)]] },
        GateCutTerm { coeff: -co * s, sides: [vec![quarter_turn(a, -1.0)], vec![LocalOp::MeasureKeep(b)]] },
    ];
    GateCutRule { kind: GateCutKind::PauliRotation { paulis, angle }, terms }
}

/// Superoperator of a local op list on one qubit, acting on row-major
/// vectorized 2×2 matrices: `vec(ρ) → S vec(ρ)`.
fn side_superop(ops: &[LocalOp]) -> Vec<C64> {
    let mut total = crate::linalg::identity(4);
    for op in ops {
        let s = match op {
            LocalOp::Unitary(u) => {
                let uc: Vec<C64> = u.iter().map(|z| z.conj()).collect();
                crate::linalg::kron(u, 2, &uc, 2)
            }
            LocalOp::MeasureKeep(p) => {
                // Σ_σ σ P_σ ⊗ conj(P_σ) with P_σ = (I + σP)/2 is (P ⊗ I + I ⊗ conj P)/2.
                let pm = p.matrix();
                let pc: Vec<C64> = pm.iter().map(|z| z.conj()).collect();
                let id = Pauli::I.matrix();
                let a = crate::linalg::kron(&pm, 2, &id, 2);
                let b = crate::linalg::kron(&id, 2, &pc, 2);
                a.iter().zip(&b).map(|(x, y)| (x + y) * 0.5).collect()
            }
        };
        total = crate::linalg::matmul(&s, &total, 4);
    }
    total
}

/// Recombined two-qubit channel `Σ_k c_k (L_k ⊗ R_k)` applied to `ρ` (4×4, first target most significant).
pub fn apply_rule(rule: &GateCutRule, rho: &[C64]) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); 16];
    for term in &rule.terms {
        let l = side_superop(&term.sides[0]);
        let r = side_superop(&term.sides[1]);
        // ρ[(i1 i2),(j1 j2)] with first-qubit indices i1, j1.
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        let mut acc = c(0.0, 0.0);
                        for k1 in 0..2 {
                            for k2 in 0..2 {
                                for l1 in 0..2 {
                                    for l2 in 0..2 {
                                        let lv = l[(i1 * 2 + j1) * 4 + k1 * 2 + l1];
                                        let rv = r[(i2 * 2 + j2) * 4 + k2 * 2 + l2];
                                        acc += lv * rv * rho[(k1 * 2 + k2) * 4 + l1 * 2 + l2];
                                    }
                                }
                            }
                        }
                        out[(i1 * 2 + i2) * 4 + j1 * 2 + j2] += acc * term.coeff;
                    }
                }
            }
        }
    }
    out
}
