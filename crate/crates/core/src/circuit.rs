//! Abstract circuits of unary and CZ gates on a discrete timebase.
//!
//! The k-th gate (1-based) sits at odd instant `2k - 1`. Even instants carry no
//! gate; they are where migrations start and end and where teleportations
//! happen. A circuit of `N` gates has horizon `2N`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Instant, Qubit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Unary,
    Binary,
}

/// The operation a gate performs, without its position in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateOp {
    Unary(Qubit),
    Cz(Qubit, Qubit),
}

impl GateOp {
    /// Builds an op from a kind and an operand list, checking arity.
    pub fn new(kind: GateKind, operands: &[Qubit]) -> Result<Self> {
        match (kind, operands) {
            (GateKind::Unary, [q]) => Ok(GateOp::Unary(*q)),
            (GateKind::Binary, [a, b]) => Ok(GateOp::Cz(*a, *b)),
            (_, ops) => Err(Error::BadArity(ops.len())),
        }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            GateOp::Unary(_) => GateKind::Unary,
            GateOp::Cz(..) => GateKind::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gate {
    pub op: GateOp,
    pub instant: Instant,
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        self.op.kind()
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.op, GateOp::Cz(..))
    }

    pub fn operands(&self) -> Vec<Qubit> {
        match self.op {
            GateOp::Unary(q) => vec![q],
            GateOp::Cz(a, b) => vec![a, b],
        }
    }

    pub fn involves(&self, q: Qubit) -> bool {
        match self.op {
            GateOp::Unary(u) => u == q,
            GateOp::Cz(a, b) => a == q || b == q,
        }
    }

    /// Whether this is a unary gate acting on `q`.
    pub fn is_unary_on(&self, q: Qubit) -> bool {
        self.op == GateOp::Unary(q)
    }

    /// The operand pair of a CZ gate.
    pub fn pair(&self) -> Option<(Qubit, Qubit)> {
        match self.op {
            GateOp::Cz(a, b) => Some((a, b)),
            GateOp::Unary(_) => None,
        }
    }
}

/// Instant of the gate stored at index `idx`.
pub fn instant_of_index(idx: usize) -> Instant {
    (2 * idx + 1) as Instant
}

/// Index of the gate at odd instant `t`.
pub fn index_of_instant(t: Instant) -> usize {
    debug_assert!(t % 2 == 1);
    (t / 2) as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    /// Builds a circuit, placing gates at instants 1, 3, 5, ... in input order.
    pub fn new(num_qubits: usize, ops: impl IntoIterator<Item = GateOp>) -> Result<Self> {
        let mut gates = Vec::new();
        for (idx, op) in ops.into_iter().enumerate() {
            let check = |q: Qubit| {
                if q >= num_qubits {
                    Err(Error::OperandOutOfRange { qubit: q, num_qubits })
                } else {
                    Ok(())
                }
            };
            match op {
                GateOp::Unary(q) => check(q)?,
                GateOp::Cz(a, b) => {
                    check(a)?;
                    check(b)?;
                    if a == b {
                        return Err(Error::DuplicateBinaryOperand(a));
                    }
                }
            }
            gates.push(Gate {
                op,
                instant: instant_of_index(idx),
            });
        }
        Ok(Circuit { num_qubits, gates })
    }

    /// Builds a circuit from `(kind, operands)` descriptors.
    pub fn from_descriptors<'a>(
        num_qubits: usize,
        descriptors: impl IntoIterator<Item = (GateKind, &'a [Qubit])>,
    ) -> Result<Self> {
        let ops = descriptors
            .into_iter()
            .map(|(k, ops)| GateOp::new(k, ops))
            .collect::<Result<Vec<_>>>()?;
        Circuit::new(num_qubits, ops)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn horizon(&self) -> Instant {
        2 * self.gates.len() as Instant
    }

    pub fn gate_at(&self, t: Instant) -> Option<&Gate> {
        if t % 2 == 0 {
            return None;
        }
        self.gates.get(index_of_instant(t))
    }

    pub fn view(&self) -> CircuitView<'_> {
        CircuitView {
            num_qubits: self.num_qubits,
            gates: &self.gates,
            start: 0,
            end: self.horizon(),
        }
    }

    /// View of the gates strictly between even instants `start` and `end`.
    pub fn span(&self, start: Instant, end: Instant) -> CircuitView<'_> {
        assert!(start % 2 == 0 && end % 2 == 0 && start <= end && end <= self.horizon());
        CircuitView {
            num_qubits: self.num_qubits,
            gates: &self.gates[(start / 2) as usize..(end / 2) as usize],
            start,
            end,
        }
    }

    /// Splits the circuit at the given even cut instants into contiguous views.
    pub fn segment(&self, cuts: &[Instant]) -> Result<Vec<CircuitView<'_>>> {
        let horizon = self.horizon();
        let mut prev = 0;
        let mut views = Vec::with_capacity(cuts.len() + 1);
        for &cut in cuts {
            if cut % 2 == 1 {
                return Err(Error::OddCut(cut));
            }
            if cut <= prev || cut >= horizon {
                return Err(Error::CutOutOfRange { cut, horizon });
            }
            views.push(self.span(prev, cut));
            prev = cut;
        }
        views.push(self.span(prev, horizon));
        Ok(views)
    }

    pub fn induced_pair(&self, q1: Qubit, q2: Qubit) -> Result<(Circuit, Vec<Instant>)> {
        self.view().induced_pair(q1, q2)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CircuitFile = serde_json::from_str(text)?;
        let ops = file
            .gates
            .iter()
            .map(|g| {
                let kind = match g.kind.as_str() {
                    "u" => GateKind::Unary,
                    "cz" => GateKind::Binary,
                    other => return Err(Error::Parse(format!("unknown gate kind {other:?}"))),
                };
                GateOp::new(kind, &g.operands)
            })
            .collect::<Result<Vec<_>>>()?;
        Circuit::new(file.num_qubits, ops)
    }

    pub fn to_json(&self) -> String {
        let file = CircuitFile {
            num_qubits: self.num_qubits,
            gates: self
                .gates
                .iter()
                .map(|g| GateRecord {
                    kind: match g.kind() {
                        GateKind::Unary => "u".into(),
                        GateKind::Binary => "cz".into(),
                    },
                    operands: g.operands(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("circuit serializes");
        s.push('\n');
        s
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitFile {
    num_qubits: usize,
    gates: Vec<GateRecord>,
}

#[derive(Serialize, Deserialize)]
struct GateRecord {
    kind: String,
    operands: Vec<Qubit>,
}

/// A contiguous window `[start, end]` of a circuit that keeps global instants.
#[derive(Debug, Clone, Copy)]
pub struct CircuitView<'a> {
    num_qubits: usize,
    gates: &'a [Gate],
    start: Instant,
    end: Instant,
}

impl<'a> CircuitView<'a> {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &'a [Gate] {
        self.gates
    }

    pub fn start(&self) -> Instant {
        self.start
    }

    pub fn end(&self) -> Instant {
        self.end
    }

    pub fn binary_gates(&self) -> impl Iterator<Item = &'a Gate> + 'a {
        self.gates.iter().filter(|g| g.is_binary())
    }

    pub fn gate_at(&self, t: Instant) -> Option<&'a Gate> {
        if t % 2 == 0 || t <= self.start || t >= self.end {
            return None;
        }
        self.gates.get(index_of_instant(t) - (self.start / 2) as usize)
    }

    /// Instants of unary gates per qubit, ascending.
    pub fn unary_instants(&self) -> Vec<Vec<Instant>> {
        let mut out = vec![Vec::new(); self.num_qubits];
        for g in self.gates {
            if let GateOp::Unary(q) = g.op {
                out[q].push(g.instant);
            }
        }
        out
    }

    /// The maximal unary-free interval of `q` around gate instant `t`, with
    /// even endpoints clipped to the view.
    pub fn free_interval(&self, unary: &[Instant], t: Instant) -> (Instant, Instant) {
        let pos = unary.partition_point(|&u| u < t);
        let lo = if pos == 0 { self.start } else { unary[pos - 1] + 1 };
        let hi = unary.get(pos).map_or(self.end, |&u| u - 1);
        (lo, hi)
    }

    /// Two-qubit circuit of the CZ gates exactly on `{q1, q2}` and the unary
    /// gates on either, re-timed, with `q1 -> 0` and `q2 -> 1`. Also returns
    /// the original instant of each retained gate.
    pub fn induced_pair(&self, q1: Qubit, q2: Qubit) -> Result<(Circuit, Vec<Instant>)> {
        if q1 == q2 {
            return Err(Error::SameQubit(q1));
        }
        for q in [q1, q2] {
            if q >= self.num_qubits {
                return Err(Error::OperandOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        let relabel = |q: Qubit| if q == q1 { 0 } else { 1 };
        let mut ops = Vec::new();
        let mut origin = Vec::new();
        for g in self.gates {
            let keep = match g.op {
                GateOp::Unary(q) => (q == q1 || q == q2).then(|| GateOp::Unary(relabel(q))),
                GateOp::Cz(a, b) => ((a == q1 && b == q2) || (a == q2 && b == q1))
                    .then(|| GateOp::Cz(relabel(a), relabel(b))),
            };
            if let Some(op) = keep {
                ops.push(op);
                origin.push(g.instant);
            }
        }
        Ok((Circuit::new(2, ops)?, origin))
    }
}
