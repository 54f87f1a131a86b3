use serde::{Deserialize, Serialize};

use super::{Layout, Party, Protocol, ProtocolTree};
use crate::error::{Error, Result};
use crate::linalg::{c, embed, identity, operator_norm, DensityOperator, Matrix, PureState};

/// Branches whose Born weight falls below this carry no normalized state.
pub const NEGLIGIBLE_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl QuantumState {
    pub fn dims(&self) -> &[usize] {
        match self {
            QuantumState::Pure(p) => p.dims(),
            QuantumState::Mixed(m) => m.dims(),
        }
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        match self {
            QuantumState::Pure(p) => p.reduced(keep),
            QuantumState::Mixed(m) => crate::linalg::partial_trace(m, keep),
        }
    }
}

impl From<PureState> for QuantumState {
    fn from(p: PureState) -> Self {
        QuantumState::Pure(p)
    }
}

impl From<DensityOperator> for QuantumState {
    fn from(m: DensityOperator) -> Self {
        QuantumState::Mixed(m)
    }
}

/// One complete outcome sequence `R_n` of a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub outcomes: Vec<usize>,
    /// Ordered product of Alice's operators along the branch, leaf
    /// correction included (latest on the left).
    pub acc_a: Matrix,
    pub acc_b: Matrix,
    pub probability: f64,
    /// Normalized global state at the leaf; `None` for negligible branches.
    pub final_state: Option<QuantumState>,
    /// Normalized reduced state on the leaf's output subsystems.
    pub output_state: Option<DensityOperator>,
    pub output: Vec<usize>,
}

impl BranchRecord {
    /// `A^{R_n} ⊗ B^{R_n}` lifted to the full layout.
    pub fn accumulated_operator(&self, layout: &Layout) -> Result<Matrix> {
        accumulated_operator(layout, &self.acc_a, &self.acc_b)
    }
}

pub(crate) fn accumulated_operator(layout: &Layout, acc_a: &Matrix, acc_b: &Matrix) -> Result<Matrix> {
    let dims = layout.dims();
    let mut full = identity(dims.iter().product());
    for (party, acc) in [(Party::A, acc_a), (Party::B, acc_b)] {
        let idx = layout.indices(party);
        if !idx.is_empty() {
            full = embed(acc, &idx, &dims)? * full;
        }
    }
    Ok(full)
}

/// Unnormalized state carried down a branch.
#[derive(Clone)]
enum Carried {
    Pure(crate::linalg::Vector),
    Mixed(Matrix),
}

impl Carried {
    fn act(&self, k: &Matrix) -> Self {
        match self {
            Carried::Pure(v) => Carried::Pure(k * v),
            Carried::Mixed(m) => Carried::Mixed(k * m * k.adjoint()),
        }
    }

    fn weight(&self) -> f64 {
        match self {
            Carried::Pure(v) => v.norm_squared(),
            Carried::Mixed(m) => m.trace().re,
        }
    }

    fn normalized(&self, dims: &[usize], p: f64) -> QuantumState {
        match self {
            Carried::Pure(v) => {
                QuantumState::Pure(PureState::from_parts_unchecked(v / c(p.sqrt(), 0.), dims.to_vec()))
            }
            Carried::Mixed(m) => {
                QuantumState::Mixed(DensityOperator::from_parts_unchecked(m / c(p, 0.), dims.to_vec()))
            }
        }
    }
}

struct Runner {
    dims: Vec<usize>,
    a_idx: Vec<usize>,
    b_idx: Vec<usize>,
    records: Vec<BranchRecord>,
}

impl Runner {
    fn lift(&self, party: Party, m: &Matrix) -> Result<Matrix> {
        let idx = match party {
            Party::A => &self.a_idx,
            Party::B => &self.b_idx,
        };
        embed(m, idx, &self.dims)
    }

    fn walk(
        &mut self,
        tree: &ProtocolTree,
        state: Carried,
        path: &mut Vec<usize>,
        acc_a: Matrix,
        acc_b: Matrix,
    ) -> Result<()> {
        match tree {
            ProtocolTree::Node { party, instrument, children } => {
                for (r, (op, child)) in instrument.iter().zip(children).enumerate() {
                    let next = state.act(&self.lift(*party, op)?);
                    let (na, nb) = match party {
                        Party::A => (op * &acc_a, acc_b.clone()),
                        Party::B => (acc_a.clone(), op * &acc_b),
                    };
                    path.push(r);
                    self.walk(child, next, path, na, nb)?;
                    path.pop();
                }
                Ok(())
            }
            ProtocolTree::Leaf(leaf) => {
                let mut state = state;
                let (mut acc_a, mut acc_b) = (acc_a, acc_b);
                if let Some(m) = &leaf.correction_a {
                    state = state.act(&self.lift(Party::A, m)?);
                    acc_a = m * acc_a;
                }
                if let Some(m) = &leaf.correction_b {
                    state = state.act(&self.lift(Party::B, m)?);
                    acc_b = m * acc_b;
                }
                let probability = state.weight().max(0.0);
                let (final_state, output_state) = if probability > NEGLIGIBLE_PROBABILITY {
                    let s = state.normalized(&self.dims, probability);
                    let out = s.reduced(&leaf.output)?;
                    (Some(s), Some(out))
                } else {
                    (None, None)
                };
                self.records.push(BranchRecord {
                    outcomes: path.clone(),
                    acc_a,
                    acc_b,
                    probability,
                    final_state,
                    output_state,
                    output: leaf.output.clone(),
                });
                Ok(())
            }
        }
    }
}

/// Runs every branch of `protocol` on `initial`, evolving the state
/// instrument by instrument and recording the Born weight of each leaf.
pub fn run_protocol(initial: &QuantumState, protocol: &Protocol) -> Result<Vec<BranchRecord>> {
    let layout = protocol.layout();
    let dims = layout.dims();
    if initial.dims() != dims.as_slice() {
        return Err(Error::Dimension(format!(
            "initial state dims {:?} vs protocol layout {dims:?}",
            initial.dims()
        )));
    }
    let carried = match initial {
        QuantumState::Pure(p) => Carried::Pure(p.amplitudes().clone()),
        QuantumState::Mixed(m) => Carried::Mixed(m.matrix().clone()),
    };
    let mut runner = Runner {
        dims: dims.clone(),
        a_idx: layout.indices(Party::A),
        b_idx: layout.indices(Party::B),
        records: Vec::new(),
    };
    let acc_a = identity(layout.local_dim(Party::A));
    let acc_b = identity(layout.local_dim(Party::B));
    runner.walk(protocol.root(), carried, &mut Vec::new(), acc_a, acc_b)?;
    Ok(runner.records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BobUnitarity {
    pub outcomes: Vec<usize>,
    pub is_proportional_unitary: bool,
    /// `c` with `B^{R_n} = c·u`, when proportional.
    pub c: Option<f64>,
}

/// For each branch, tests whether Bob's accumulated operator is proportional
/// to a unitary, `B†B = c² I`; a necessary condition for Bob's output to be
/// independent of the branch.
pub fn check_bob_accumulated_unitarity(protocol: &Protocol) -> Vec<BobUnitarity> {
    let d = protocol.layout().local_dim(Party::B);
    let mut out = Vec::new();
    collect_bob(protocol.root(), identity(d), &mut Vec::new(), &mut out);
    out
}

fn collect_bob(tree: &ProtocolTree, acc: Matrix, path: &mut Vec<usize>, out: &mut Vec<BobUnitarity>) {
    match tree {
        ProtocolTree::Node { party, instrument, children } => {
            for (r, (op, child)) in instrument.iter().zip(children).enumerate() {
                let next = if *party == Party::B { op * &acc } else { acc.clone() };
                path.push(r);
                collect_bob(child, next, path, out);
                path.pop();
            }
        }
        ProtocolTree::Leaf(leaf) => {
            let acc = match &leaf.correction_b {
                Some(m) => m * acc,
                None => acc,
            };
            let gram = acc.adjoint() * &acc;
            let n = gram.nrows();
            let c2 = gram.trace().re / n as f64;
            let defect = operator_norm(&(gram - identity(n) * c(c2, 0.)));
            let ok = defect < 1e-9;
            out.push(BobUnitarity {
                outcomes: path.clone(),
                is_proportional_unitary: ok,
                c: ok.then(|| c2.max(0.0).sqrt()),
            });
        }
    }
}
