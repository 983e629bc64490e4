//! Narrow-width fragment engines.
//!
//! A [`FragmentJob`] is a concrete instruction list on `width` wires: unitaries,
//! Pauli-eigenstate preparations on fresh wires, and mid-circuit Pauli
//! measurements. Measurement outcomes `σ ∈ {±1}` multiply into the fragment
//! value; a discarding measurement also resets its wire to `|0⟩` so it can be
//! recycled.

pub mod density;
pub mod statevector;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, dagger, Pauli, C64, ONE, ZERO};
use density::SignedDensity;
use statevector::StateVector;

/// Default maximal fragment width.
pub const DEFAULT_MAX_WIDTH: usize = 12;

/// Pauli eigenstates used by cut preparations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrepState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl PrepState {
    /// Unitary `V` with `V|0⟩` equal to the state.
    pub fn preparation(self) -> [C64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            PrepState::Zero => [ONE, ZERO, ZERO, ONE],
            PrepState::One => [ZERO, ONE, ONE, ZERO],
            PrepState::Plus => [c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)],
            // H·X
            PrepState::Minus => [c(h, 0.), c(h, 0.), c(-h, 0.), c(h, 0.)],
            // S·H
            PrepState::PlusI => [c(h, 0.), c(h, 0.), c(0., h), c(0., -h)],
            // S·H·X
            PrepState::MinusI => [c(h, 0.), c(h, 0.), c(0., -h), c(0., h)],
        }
    }

    /// State vector `(⟨0|ψ⟩, ⟨1|ψ⟩)`.
    pub fn ket(self) -> [C64; 2] {
        let v = self.preparation();
        [v[0], v[2]]
    }

    /// Density matrix `|ψ⟩⟨ψ|`, row-major.
    pub fn projector(self) -> [C64; 4] {
        let k = self.ket();
        [k[0] * k[0].conj(), k[0] * k[1].conj(), k[1] * k[0].conj(), k[1] * k[1].conj()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instr<'a> {
    Unitary { wires: &'a [usize], matrix: &'a [C64] },
    /// Prepare a Pauli eigenstate on a wire currently in `|0⟩`.
    Prep { wire: usize, state: PrepState },
    /// Measure a Pauli, record σ, reset the wire to `|0⟩`. `I` records +1.
    MeasureDiscard { wire: usize, pauli: Pauli },
    /// Measure a Pauli, record σ, keep the post-measurement state.
    MeasureKeep { wire: usize, pauli: Pauli },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentJob<'a> {
    pub width: usize,
    pub instrs: Vec<Instr<'a>>,
    /// Wires read out at the end, in order; outcome bit `i` belongs to wire `terminals[i]`.
    pub terminals: Vec<usize>,
}

impl FragmentJob<'_> {
    pub fn measurement_count(&self) -> usize {
        self.instrs
            .iter()
            .filter(|i| matches!(i, Instr::MeasureDiscard { .. } | Instr::MeasureKeep { .. }))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    /// Terminal outcomes, bit `i` = terminal `i`.
    pub terminal_bits: u64,
    /// One entry per mid-circuit measurement, in execution order.
    pub sigma: Vec<i8>,
}

impl ShotRecord {
    pub fn sign(&self) -> f64 {
        if self.sigma.iter().filter(|&&s| s < 0).count() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Backend {
    pub max_width: usize,
}

impl Default for Backend {
    fn default() -> Self {
        Backend { max_width: DEFAULT_MAX_WIDTH }
    }
}

impl Backend {
    pub fn new(max_width: usize) -> Backend {
        Backend { max_width }
    }

    fn check(&self, job: &FragmentJob) -> Result<()> {
        if job.width > self.max_width {
            return Err(Error::WidthExceeded { width: job.width, max: self.max_width });
        }
        Ok(())
    }

    /// Exact signed terminal distribution `w(y) = E[∏σ · 1{y}]`.
    pub fn exact_weights(&self, job: &FragmentJob) -> Result<Vec<f64>> {
        self.check(job)?;
        let mut rho = SignedDensity::zero(job.width);
        for instr in &job.instrs {
            match *instr {
                Instr::Unitary { wires, matrix } => rho.apply_unitary(wires, matrix),
                Instr::Prep { wire, state } => rho.apply_unitary(&[wire], &state.preparation()),
                Instr::MeasureDiscard { wire, pauli } => rho.measure_discard(wire, pauli),
                Instr::MeasureKeep { wire, pauli } => rho.measure_keep(wire, pauli),
            }
        }
        Ok(rho.terminal_weights(&job.terminals))
    }

    /// Exact `E[∏σ · f(y)]` with `y` packed as in [`ShotRecord::terminal_bits`].
    pub fn run_fragment_exact(&self, job: &FragmentJob, f: impl Fn(u64) -> f64) -> Result<f64> {
        let w = self.exact_weights(job)?;
        Ok(w.iter().enumerate().map(|(y, wy)| if *wy == 0.0 { 0.0 } else { wy * f(y as u64) }).sum())
    }

    /// One Born-rule shot.
    pub fn run_fragment_shot<R: Rng>(&self, job: &FragmentJob, rng: &mut R) -> Result<ShotRecord> {
        self.check(job)?;
        let mut sv = StateVector::zero(job.width);
        let mut sigma = Vec::with_capacity(job.measurement_count());
        for instr in &job.instrs {
            match *instr {
                Instr::Unitary { wires, matrix } => sv.apply(wires, matrix),
                Instr::Prep { wire, state } => sv.apply(&[wire], &state.preparation()),
                Instr::MeasureDiscard { wire, pauli } => {
                    if matches!(pauli, Pauli::X | Pauli::Y) {
                        sv.apply(&[wire], &pauli.diagonalizer());
                    }
                    let one = sv.measure(wire, rng);
                    sigma.push(if one && pauli != Pauli::I { -1 } else { 1 });
                    if one {
                        sv.apply(&[wire], &Pauli::X.matrix());
                    }
                }
                Instr::MeasureKeep { wire, pauli } => {
                    let v = pauli.diagonalizer();
                    let rotate = matches!(pauli, Pauli::X | Pauli::Y);
                    if rotate {
                        sv.apply(&[wire], &v);
                    }
                    let one = sv.measure(wire, rng);
                    sigma.push(if one && pauli != Pauli::I { -1 } else { 1 });
                    if rotate {
                        sv.apply(&[wire], &dagger(&v, 2));
                    }
                }
            }
        }
        let idx = sv.sample(rng);
        let terminal_bits = job
            .terminals
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &t)| acc | ((((idx >> t) & 1) as u64) << i));
        Ok(ShotRecord { terminal_bits, sigma })
    }
}

/// Exact fragment expectation with the default backend.
pub fn run_fragment_exact(job: &FragmentJob, f: impl Fn(u64) -> f64) -> Result<f64> {
    Backend::default().run_fragment_exact(job, f)
}

/// One shot with the default backend.
pub fn run_fragment_shot<R: Rng>(job: &FragmentJob, rng: &mut R) -> Result<ShotRecord> {
    Backend::default().run_fragment_shot(job, rng)
}
