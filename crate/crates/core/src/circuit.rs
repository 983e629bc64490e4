//! Circuits, gates and classical post-processing functions.
//!
//! A [`QcAlgorithm`] is a circuit applied to `|0…0⟩`, a computational-basis
//! measurement of every qubit, and a post-processing function `f` of the
//! outcome bits with values in `[-1, 1]`. Its output is `E_y f(y)`.
//!
//! Outcome strings are packed into a `u64` with bit `q` holding qubit `q`.
//! Lookup tables (block tables, general tables) are indexed in string order:
//! the first listed qubit is the most significant bit.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, unitarity_defect, Pauli, C64, I, ONE, ZERO};

/// Tolerance for the unitarity check on explicit matrices.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Cnot,
    Cz,
    Swap,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// `exp(-i angle/2 · P⊗Q)`.
    Rpp { paulis: [Pauli; 2], angle: f64 },
    /// Explicit 2×2 unitary, row-major.
    Unitary1(Vec<C64>),
    /// Explicit 4×4 unitary, row-major, first target most significant.
    Unitary2(Vec<C64>),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Swap | GateKind::Rpp { .. } => 2,
            GateKind::Unitary2(_) => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::Swap => "swap",
            GateKind::Rx(_) => "rx",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Rpp { .. } => "rpp",
            GateKind::Unitary1(_) => "u1",
            GateKind::Unitary2(_) => "u2",
        }
    }

    /// Canonical matrix (row-major). Explicit kinds return their payload as is.
    pub fn matrix(&self) -> Vec<C64> {
        let h = FRAC_1_SQRT_2;
        match self {
            GateKind::H => vec![c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)],
            GateKind::X => Pauli::X.matrix().to_vec(),
            GateKind::Y => Pauli::Y.matrix().to_vec(),
            GateKind::Z => Pauli::Z.matrix().to_vec(),
            GateKind::S => vec![ONE, ZERO, ZERO, I],
            GateKind::Sdg => vec![ONE, ZERO, ZERO, -I],
            GateKind::T => vec![ONE, ZERO, ZERO, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
            GateKind::Tdg => vec![ONE, ZERO, ZERO, C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)],
            GateKind::Cnot => permutation4([0, 1, 3, 2]),
            GateKind::Swap => permutation4([0, 2, 1, 3]),
            GateKind::Cz => {
                let mut m = permutation4([0, 1, 2, 3]);
                m[15] = -ONE;
                m
            }
            GateKind::Rx(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, 0.), c(0., -s), c(0., -s), c(co, 0.)]
            }
            GateKind::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)]
            }
            GateKind::Rz(t) => vec![
                C64::from_polar(1.0, -t / 2.0),
                ZERO,
                ZERO,
                C64::from_polar(1.0, t / 2.0),
            ],
            GateKind::Rpp { paulis, angle } => pauli_rotation(*paulis, *angle),
            GateKind::Unitary1(m) | GateKind::Unitary2(m) => m.clone(),
        }
    }
}

fn permutation4(perm: [usize; 4]) -> Vec<C64> {
    let mut m = vec![ZERO; 16];
    for (col, &row) in perm.iter().enumerate() {
        m[row * 4 + col] = ONE;
    }
    m
}

/// `cos(a/2) I − i sin(a/2) P⊗Q`.
pub fn pauli_rotation(paulis: [Pauli; 2], angle: f64) -> Vec<C64> {
    let pq = crate::linalg::kron(&paulis[0].matrix(), 2, &paulis[1].matrix(), 2);
    let (s, co) = (angle / 2.0).sin_cos();
    let mut m = crate::linalg::identity(4);
    for (dst, p) in m.iter_mut().zip(&pq) {
        *dst = *dst * co - I * s * p;
    }
    m
}

/// A 1- or 2-qubit gate. The matrix is expanded once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    matrix: Vec<C64>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Gate {
        let matrix = kind.matrix();
        Gate { kind, targets, matrix }
    }

    pub fn one(kind: GateKind, q: usize) -> Gate {
        Gate::new(kind, vec![q])
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Gate {
        Gate::new(kind, vec![a, b])
    }

    pub fn unitary1(m: [C64; 4], q: usize) -> Gate {
        Gate::new(GateKind::Unitary1(m.to_vec()), vec![q])
    }

    pub fn unitary2(m: Vec<C64>, a: usize, b: usize) -> Gate {
        Gate::new(GateKind::Unitary2(m), vec![a, b])
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    /// Copy of this gate with targets renamed through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate {
            kind: self.kind.clone(),
            targets: self.targets.iter().map(|&q| map(q)).collect(),
            matrix: self.matrix.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n: usize,
    pub gates: Vec<Gate>,
    pub name: String,
}

impl Circuit {
    pub fn new(n: usize) -> Circuit {
        Circuit { n, gates: Vec::new(), name: String::new() }
    }

    pub fn with_gates(n: usize, gates: Vec<Gate>) -> Circuit {
        Circuit { n, gates, name: String::new() }
    }

    pub fn named(mut self, name: impl Into<String>) -> Circuit {
        self.name = name.into();
        self
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> &mut Self {
        self.gates.extend(gates);
        self
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let raw: CircuitJson = serde_json::from_str(text).map_err(|e| Error::Parse(describe_json_error(text, &e)))?;
        raw.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CircuitJson::from(self)).expect("circuit serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    TargetOutOfRange { target: usize, n: usize },
    DuplicateTargets,
    ArityMismatch { expected: usize, got: usize },
    TooManyQubits(usize),
    NoTargets,
    NonUnitary(f64),
    MatrixShape { expected: usize, got: usize },
    NonFiniteAngle,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::TargetOutOfRange { target, n } => write!(f, "target {target} out of range for {n} qubits"),
            Issue::DuplicateTargets => write!(f, "duplicate targets"),
            Issue::ArityMismatch { expected, got } => {
                write!(f, "arity mismatch: gate acts on {expected} qubits, {got} targets given")
            }
            Issue::TooManyQubits(k) => write!(f, "{k}-qubit gates are not supported"),
            Issue::NoTargets => write!(f, "gate has no targets"),
            Issue::NonUnitary(dev) => write!(f, "non-unitary matrix (max |UU†-I| = {dev:.3e})"),
            Issue::MatrixShape { expected, got } => {
                write!(f, "explicit matrix has {got} entries, expected {expected}")
            }
            Issue::NonFiniteAngle => write!(f, "non-finite rotation angle"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationIssue {
    /// Offending gate position, `None` for circuit-level problems.
    pub gate: Option<usize>,
    pub issue: Issue,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.issues
            .iter()
            .map(|i| match i.gate {
                Some(g) => format!("gate {g}: {}", i.issue),
                None => i.issue.to_string(),
            })
            .collect()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidCircuit(self.messages().join("; ")))
        }
    }
}

/// Check every structural invariant of a circuit. Never panics.
pub fn validate(circuit: &Circuit) -> ValidationReport {
    let mut issues = Vec::new();
    for (idx, gate) in circuit.gates.iter().enumerate() {
        let mut push = |issue| issues.push(ValidationIssue { gate: Some(idx), issue });
        let targets = gate.targets();
        if targets.is_empty() {
            push(Issue::NoTargets);
        }
        if targets.len() > 2 {
            push(Issue::TooManyQubits(targets.len()));
        }
        let arity = gate.kind().arity();
        if !targets.is_empty() && targets.len() != arity && targets.len() <= 2 {
            push(Issue::ArityMismatch { expected: arity, got: targets.len() });
        }
        for &t in targets {
            if t >= circuit.n {
                push(Issue::TargetOutOfRange { target: t, n: circuit.n });
            }
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            push(Issue::DuplicateTargets);
        }
        match gate.kind() {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) | GateKind::Rpp { angle: a, .. } => {
                if !a.is_finite() {
                    push(Issue::NonFiniteAngle);
                }
            }
            GateKind::Unitary1(m) | GateKind::Unitary2(m) => {
                let dim = 1usize << arity;
                if m.len() != dim * dim {
                    push(Issue::MatrixShape { expected: dim * dim, got: m.len() });
                } else if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    push(Issue::NonUnitary(f64::INFINITY));
                } else {
                    let dev = unitarity_defect(m, dim);
                    if dev > UNITARY_TOL {
                        push(Issue::NonUnitary(dev));
                    }
                }
            }
            _ => {}
        }
    }
    ValidationReport { issues }
}

/// Block of a decomposable post-processing function: `f_j` over the listed
/// qubits, as a table indexed in string order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub qubits: Vec<usize>,
    pub table: Vec<f64>,
}

impl Block {
    pub fn new(qubits: Vec<usize>, table: Vec<f64>) -> Result<Block> {
        if table.len() != 1usize << qubits.len() {
            return Err(Error::InvalidPost(format!(
                "block over {} qubits needs {} table entries, got {}",
                qubits.len(),
                1usize << qubits.len(),
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|v| !(v.abs() <= 1.0 + 1e-12)) {
            return Err(Error::InvalidPost(format!("block value {v} outside [-1, 1]")));
        }
        Ok(Block { qubits, table })
    }

    /// `f_j(y_j)` for a packed global outcome `y`.
    pub fn eval(&self, y: u64) -> f64 {
        self.table[table_index(&self.qubits, y)]
    }
}

/// Table position of the outcome bits of `qubits` (first qubit most significant).
pub fn table_index(qubits: &[usize], y: u64) -> usize {
    qubits.iter().fold(0usize, |acc, &q| (acc << 1) | ((y >> q) & 1) as usize)
}

/// Pack a bit string like `"0110"` (character `q` = qubit `q`).
pub fn bits_from_str(s: &str) -> u64 {
    s.chars()
        .enumerate()
        .filter(|(_, ch)| *ch == '1')
        .fold(0u64, |acc, (q, _)| acc | (1 << q))
}

type Evaluator = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// Arbitrary `f: {0,1}^n → [-1, 1]`.
#[derive(Clone)]
pub struct GeneralFn {
    n: usize,
    eval: Evaluator,
    table: Option<Vec<f64>>,
}

impl GeneralFn {
    pub fn new(n: usize, eval: impl Fn(u64) -> f64 + Send + Sync + 'static) -> GeneralFn {
        GeneralFn { n, eval: Arc::new(eval), table: None }
    }

    /// Table form, indexed in string order over qubits `0..n`.
    pub fn from_table(n: usize, table: Vec<f64>) -> Result<GeneralFn> {
        if table.len() != 1usize << n {
            return Err(Error::InvalidPost(format!("general table needs {} entries", 1usize << n)));
        }
        if let Some(v) = table.iter().find(|v| !(v.abs() <= 1.0 + 1e-12)) {
            return Err(Error::InvalidPost(format!("value {v} outside [-1, 1]")));
        }
        let qubits: Vec<usize> = (0..n).collect();
        let t = table.clone();
        Ok(GeneralFn {
            n,
            eval: Arc::new(move |y| t[table_index(&qubits, y)]),
            table: Some(table),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, y: u64) -> f64 {
        (self.eval)(y)
    }
}

impl fmt::Debug for GeneralFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralFn").field("n", &self.n).field("tabulated", &self.table.is_some()).finish()
    }
}

#[derive(Debug, Clone)]
pub enum PostProcess {
    General(GeneralFn),
    /// `f(y) = ∏_j f_j(y_j)`; qubits not covered by any block contribute 1.
    Decomposable(Vec<Block>),
}

impl PostProcess {
    /// `f ≡ 1`.
    pub fn constant_one() -> PostProcess {
        PostProcess::Decomposable(Vec::new())
    }

    pub fn eval(&self, y: u64) -> f64 {
        match self {
            PostProcess::General(g) => g.eval(y),
            PostProcess::Decomposable(blocks) => blocks.iter().map(|b| b.eval(y)).product(),
        }
    }

    pub fn is_decomposable(&self) -> bool {
        matches!(self, PostProcess::Decomposable(_))
    }

    pub fn blocks(&self) -> &[Block] {
        match self {
            PostProcess::Decomposable(b) => b,
            PostProcess::General(_) => &[],
        }
    }

    /// Check the post-processing function is consistent with `n` output bits.
    pub fn check_width(&self, n: usize) -> Result<()> {
        match self {
            PostProcess::General(g) if g.n != n => Err(Error::InvalidPost(format!(
                "general function over {} bits, circuit has {n} qubits",
                g.n
            ))),
            PostProcess::General(_) => Ok(()),
            PostProcess::Decomposable(blocks) => {
                let mut seen = vec![false; n];
                for b in blocks {
                    for &q in &b.qubits {
                        if q >= n {
                            return Err(Error::InvalidPost(format!("block qubit {q} out of range")));
                        }
                        if std::mem::replace(&mut seen[q], true) {
                            return Err(Error::InvalidPost(format!("qubit {q} appears in two blocks")));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    pub fn from_json(text: &str) -> Result<PostProcess> {
        let raw: PostJson = serde_json::from_str(text).map_err(|e| Error::Parse(describe_json_error(text, &e)))?;
        match raw {
            PostJson::Pauli { labels } => pauli_observable_expectation_post(&labels),
            PostJson::Blocks { blocks, tables } => {
                if blocks.len() != tables.len() {
                    return Err(Error::InvalidPost("blocks and tables differ in length".into()));
                }
                let blocks = blocks
                    .into_iter()
                    .zip(tables)
                    .map(|(q, t)| Block::new(q, t))
                    .collect::<Result<Vec<_>>>()?;
                Ok(PostProcess::Decomposable(blocks))
            }
            PostJson::Table { n, values } => Ok(PostProcess::General(GeneralFn::from_table(n, values)?)),
            PostJson::One => Ok(PostProcess::constant_one()),
        }
    }

    /// JSON form. General functions serialize only when they were built from a table.
    pub fn to_json(&self) -> Option<String> {
        let raw = match self {
            PostProcess::General(g) => PostJson::Table { n: g.n, values: g.table.clone()? },
            PostProcess::Decomposable(blocks) if blocks.is_empty() => PostJson::One,
            PostProcess::Decomposable(blocks) => PostJson::Blocks {
                blocks: blocks.iter().map(|b| b.qubits.clone()).collect(),
                tables: blocks.iter().map(|b| b.table.clone()).collect(),
            },
        };
        Some(serde_json::to_string(&raw).expect("post serializes"))
    }
}

/// Decomposable `f` for a Pauli-string observable, assuming the caller has
/// already rotated each non-identity qubit into the Z basis
/// (see [`pauli_basis_change`]). Each such qubit is its own block with
/// values `+1` for bit 0 and `-1` for bit 1.
pub fn pauli_observable_expectation_post(labels: &str) -> Result<PostProcess> {
    let mut blocks = Vec::new();
    for (q, ch) in labels.chars().enumerate() {
        match Pauli::from_char(ch) {
            Some(Pauli::I) => {}
            Some(_) => blocks.push(Block { qubits: vec![q], table: vec![1.0, -1.0] }),
            None => return Err(Error::UnknownLabel(ch)),
        }
    }
    Ok(PostProcess::Decomposable(blocks))
}

/// Gates rotating each qubit's Pauli eigenbasis onto the computational basis.
pub fn pauli_basis_change(paulis: &[Pauli]) -> Vec<Gate> {
    paulis
        .iter()
        .enumerate()
        .filter_map(|(q, p)| match p {
            Pauli::X => Some(vec![Gate::one(GateKind::H, q)]),
            Pauli::Y => Some(vec![Gate::one(GateKind::Sdg, q), Gate::one(GateKind::H, q)]),
            _ => None,
        })
        .flatten()
        .collect()
}

#[derive(Debug, Clone)]
pub struct QcAlgorithm {
    pub circuit: Circuit,
    pub post: PostProcess,
}

impl QcAlgorithm {
    /// Validates both the circuit and the post-processing width.
    pub fn new(circuit: Circuit, post: PostProcess) -> Result<QcAlgorithm> {
        validate(&circuit).into_result()?;
        post.check_width(circuit.n)?;
        Ok(QcAlgorithm { circuit, post })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum PostJson {
    Pauli { labels: String },
    Blocks { blocks: Vec<Vec<usize>>, tables: Vec<Vec<f64>> },
    Table { n: usize, values: Vec<f64> },
    One,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    n: usize,
    gates: Vec<GateJson>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    name: String,
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    kind: String,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pauli: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
}

impl From<&Circuit> for CircuitJson {
    fn from(c: &Circuit) -> Self {
        CircuitJson {
            n: c.n,
            name: c.name.clone(),
            gates: c.gates.iter().map(GateJson::from).collect(),
        }
    }
}

impl From<&Gate> for GateJson {
    fn from(g: &Gate) -> Self {
        let mut out = GateJson {
            kind: g.kind().name().to_string(),
            targets: g.targets().to_vec(),
            angle: None,
            pauli: None,
            matrix: None,
        };
        match g.kind() {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) => out.angle = Some(*a),
            GateKind::Rpp { paulis, angle } => {
                out.angle = Some(*angle);
                out.pauli = Some(paulis.iter().map(|p| p.to_char()).collect());
            }
            GateKind::Unitary1(m) | GateKind::Unitary2(m) => {
                let dim = (m.len() as f64).sqrt().round() as usize;
                out.matrix = Some(
                    m.chunks(dim.max(1))
                        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                        .collect(),
                );
            }
            _ => {}
        }
        out
    }
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = Error;

    fn try_from(raw: CircuitJson) -> Result<Circuit> {
        let gates = raw
            .gates
            .into_iter()
            .enumerate()
            .map(|(i, g)| g.into_gate().map_err(|e| Error::Parse(format!("gate {i}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit { n: raw.n, gates, name: raw.name })
    }
}

impl GateJson {
    fn into_gate(self) -> std::result::Result<Gate, String> {
        let angle = || self.angle.ok_or_else(|| format!("'{}' needs an angle", self.kind));
        let kind = match self.kind.to_ascii_lowercase().as_str() {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "cnot" | "cx" => GateKind::Cnot,
            "cz" => GateKind::Cz,
            "swap" => GateKind::Swap,
            "rx" => GateKind::Rx(angle()?),
            "ry" => GateKind::Ry(angle()?),
            "rz" => GateKind::Rz(angle()?),
            "rpp" => {
                let label = self.pauli.as_deref().ok_or("'rpp' needs a two-letter pauli")?;
                let p: Vec<Pauli> = crate::linalg::parse_pauli_string(label)
                    .ok_or_else(|| format!("bad pauli label '{label}'"))?;
                if p.len() != 2 {
                    return Err(format!("'rpp' needs a two-letter pauli, got '{label}'"));
                }
                GateKind::Rpp { paulis: [p[0], p[1]], angle: angle()? }
            }
            "u1" | "u2" => {
                let rows = self.matrix.as_ref().ok_or_else(|| format!("'{}' needs a matrix", self.kind))?;
                let flat: Vec<C64> = rows.iter().flatten().map(|[re, im]| c(*re, *im)).collect();
                if self.kind.eq_ignore_ascii_case("u1") {
                    GateKind::Unitary1(flat)
                } else {
                    GateKind::Unitary2(flat)
                }
            }
            other => return Err(format!("unknown gate kind '{other}'")),
        };
        Ok(Gate::new(kind, self.targets))
    }
}

/// serde_json error with the offending line echoed back.
pub fn describe_json_error(text: &str, err: &serde_json::Error) -> String {
    let line = err.line();
    let context = text.lines().nth(line.saturating_sub(1)).unwrap_or("").trim();
    if context.is_empty() {
        err.to_string()
    } else {
        format!("{err} (near: `{}`)", truncate(context, 80))
    }
}

fn truncate(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        s.to_string()
    } else {
        s.chars().take(max).collect::<String>() + "…"
    }
}
