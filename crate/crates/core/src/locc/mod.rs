//! Multi-round LOCC protocols as measurement trees.
//!
//! A [`Protocol`] fixes a [`Layout`] (which party holds each subsystem) and a
//! [`ProtocolTree`]. Each node lets one party apply a quantum instrument to
//! its whole local space; the outcome selects the child, so classical
//! communication is implicit in the tree shape. Leaves may apply a final
//! unitary correction per party and declare which subsystems form the output.

mod builders;
mod exec;
mod serial;
mod tasks;

pub use builders::*;
pub use exec::*;
pub use serial::*;
pub use tasks::*;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity, operator_norm, unitarity_defect, Matrix, PureState, OPERATOR_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Self {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub party: Party,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    subsystems: Vec<Subsystem>,
}

impl Layout {
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::Usage("layout has no subsystems".into()));
        }
        if let Some(s) = subsystems.iter().find(|s| s.dim < 2) {
            return Err(Error::Usage(format!("subsystem dimension {} is below 2", s.dim)));
        }
        Ok(Self { subsystems })
    }

    pub fn from_pairs(pairs: &[(Party, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(party, dim)| Subsystem { party, dim }).collect())
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    /// Global indices held by `party`, ascending; this is the order of the
    /// party's local tensor factors.
    pub fn indices(&self, party: Party) -> Vec<usize> {
        (0..self.subsystems.len()).filter(|&k| self.subsystems[k].party == party).collect()
    }

    /// Dimension of `party`'s local space (1 if it holds nothing).
    pub fn local_dim(&self, party: Party) -> usize {
        self.indices(party).iter().map(|&k| self.subsystems[k].dim).product()
    }

    fn push(&mut self, s: Subsystem) {
        self.subsystems.push(s);
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Leaf {
    pub correction_a: Option<Matrix>,
    pub correction_b: Option<Matrix>,
    /// Subsystems kept as the branch output, in this order.
    pub output: Vec<usize>,
}

impl Leaf {
    pub fn output(output: Vec<usize>) -> Self {
        Self { output, ..Default::default() }
    }

    pub fn correction(&self, party: Party) -> Option<&Matrix> {
        match party {
            Party::A => self.correction_a.as_ref(),
            Party::B => self.correction_b.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolTree {
    Node {
        party: Party,
        /// Measurement operators `M^{(r)}` on the party's local space.
        instrument: Vec<Matrix>,
        /// `children[r]` follows outcome `r`.
        children: Vec<ProtocolTree>,
    },
    Leaf(Leaf),
}

impl ProtocolTree {
    pub fn node(party: Party, instrument: Vec<Matrix>, children: Vec<ProtocolTree>) -> Self {
        ProtocolTree::Node { party, instrument, children }
    }

    /// All leaves with their outcome sequences.
    pub fn leaves(&self) -> Vec<(Vec<usize>, &Leaf)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut Vec::new(), &mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Leaf)>) {
        match self {
            ProtocolTree::Leaf(leaf) => out.push((path.clone(), leaf)),
            ProtocolTree::Node { children, .. } => {
                for (r, child) in children.iter().enumerate() {
                    path.push(r);
                    child.collect_leaves(path, out);
                    path.pop();
                }
            }
        }
    }

    fn map_operators(&self, f: &impl Fn(Party, &Matrix) -> Matrix) -> Self {
        match self {
            ProtocolTree::Leaf(leaf) => ProtocolTree::Leaf(Leaf {
                correction_a: leaf.correction_a.as_ref().map(|m| f(Party::A, m)),
                correction_b: leaf.correction_b.as_ref().map(|m| f(Party::B, m)),
                output: leaf.output.clone(),
            }),
            ProtocolTree::Node { party, instrument, children } => ProtocolTree::Node {
                party: *party,
                instrument: instrument.iter().map(|m| f(*party, m)).collect(),
                children: children.iter().map(|c| c.map_operators(f)).collect(),
            },
        }
    }

    fn map_leaves(&self, f: &impl Fn(&Leaf) -> Leaf) -> Self {
        match self {
            ProtocolTree::Leaf(leaf) => ProtocolTree::Leaf(f(leaf)),
            ProtocolTree::Node { party, instrument, children } => ProtocolTree::Node {
                party: *party,
                instrument: instrument.clone(),
                children: children.iter().map(|c| c.map_leaves(f)).collect(),
            },
        }
    }
}

/// `‖Σ_r M_r† M_r − I‖`.
pub fn completeness_defect(instrument: &[Matrix]) -> f64 {
    let Some(first) = instrument.first() else {
        return f64::INFINITY;
    };
    let n = first.ncols();
    let sum = instrument
        .iter()
        .fold(Matrix::zeros(n, n), |acc, m| acc + m.adjoint() * m);
    operator_norm(&(sum - identity(n)))
}

/// A validated layout plus tree. `resource`, when present, is the shared
/// state that initializes the trailing subsystems the task does not supply.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    layout: Layout,
    root: ProtocolTree,
    resource: Option<PureState>,
}

impl Protocol {
    pub fn new(layout: Layout, root: ProtocolTree) -> Result<Self> {
        validate_tree(&layout, &root, &mut Vec::new(), None)?;
        Ok(Self { layout, root, resource: None })
    }

    pub fn with_resource(mut self, resource: PureState) -> Result<Self> {
        let n = resource.dims().len();
        let tail: Vec<usize> = self.layout.dims().split_off(self.layout.len().saturating_sub(n));
        if n > self.layout.len() || tail != resource.dims() {
            return Err(Error::Dimension(format!(
                "resource dims {:?} do not match the trailing layout subsystems {:?}",
                resource.dims(),
                self.layout.dims()
            )));
        }
        self.resource = Some(resource);
        Ok(self)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn root(&self) -> &ProtocolTree {
        &self.root
    }

    pub fn resource(&self) -> Option<&PureState> {
        self.resource.as_ref()
    }

    /// Appends a subsystem for `party`, initially untouched by the protocol:
    /// every operator of that party gains a trailing identity factor.
    pub fn with_ancilla(&self, party: Party, dim: usize) -> Result<Self> {
        if self.resource.is_some() {
            return Err(Error::Usage("cannot append subsystems after a resource".into()));
        }
        let mut layout = self.layout.clone();
        layout.push(Subsystem { party, dim });
        let id = identity(dim);
        let root = self.root.map_operators(&|p, m| if p == party { m.kronecker(&id) } else { m.clone() });
        Protocol::new(layout, root)
    }

    /// Replaces the declared output of every leaf.
    pub fn with_output(&self, output: Vec<usize>) -> Result<Self> {
        let root = self.root.map_leaves(&|leaf| Leaf { output: output.clone(), ..leaf.clone() });
        let mut p = Protocol::new(self.layout.clone(), root)?;
        p.resource = self.resource.clone();
        Ok(p)
    }

    /// The output subsystems, if every leaf declares the same list.
    pub fn common_output(&self) -> Option<Vec<usize>> {
        let leaves = self.root.leaves();
        let first = leaves.first()?.1.output.clone();
        leaves.iter().all(|(_, l)| l.output == first).then_some(first)
    }
}

fn path_name(path: &[usize]) -> String {
    if path.is_empty() {
        "root".into()
    } else {
        format!("node after outcomes {path:?}")
    }
}

fn validate_tree(
    layout: &Layout,
    tree: &ProtocolTree,
    path: &mut Vec<usize>,
    parent: Option<Party>,
) -> Result<()> {
    match tree {
        ProtocolTree::Leaf(leaf) => {
            for party in [Party::A, Party::B] {
                if let Some(m) = leaf.correction(party) {
                    let d = layout.local_dim(party);
                    if m.shape() != (d, d) {
                        return Err(Error::Dimension(format!(
                            "{}: correction for {party:?} is {:?}, local dimension is {d}",
                            path_name(path),
                            m.shape()
                        )));
                    }
                    let defect = unitarity_defect(m);
                    if defect > OPERATOR_TOL {
                        return Err(Error::Validation(format!(
                            "{}: correction for {party:?} is not unitary ({defect:e})",
                            path_name(path)
                        )));
                    }
                }
            }
            if leaf.output.is_empty() {
                return Err(Error::Usage(format!("{}: leaf declares no output", path_name(path))));
            }
            let mut seen = vec![false; layout.len()];
            for &k in &leaf.output {
                if k >= layout.len() || seen[k] {
                    return Err(Error::Usage(format!(
                        "{}: invalid output subsystems {:?}",
                        path_name(path),
                        leaf.output
                    )));
                }
                seen[k] = true;
            }
            Ok(())
        }
        ProtocolTree::Node { party, instrument, children } => {
            if parent == Some(*party) {
                return Err(Error::Validation(format!(
                    "{}: consecutive instruments by {party:?}; insert an identity instrument for the other party",
                    path_name(path)
                )));
            }
            if instrument.is_empty() {
                return Err(Error::Validation(format!("{}: empty instrument", path_name(path))));
            }
            if children.len() != instrument.len() {
                return Err(Error::Validation(format!(
                    "{}: {} outcomes but {} children",
                    path_name(path),
                    instrument.len(),
                    children.len()
                )));
            }
            let d = layout.local_dim(*party);
            if let Some(m) = instrument.iter().find(|m| m.shape() != (d, d)) {
                return Err(Error::Dimension(format!(
                    "{}: operator is {:?}, {party:?} local dimension is {d}",
                    path_name(path),
                    m.shape()
                )));
            }
            let defect = completeness_defect(instrument);
            if defect > OPERATOR_TOL {
                return Err(Error::Validation(format!(
                    "{}: instrument violates completeness (‖ΣM†M − I‖ = {defect:e})",
                    path_name(path)
                )));
            }
            for (r, child) in children.iter().enumerate() {
                path.push(r);
                validate_tree(layout, child, path, Some(*party))?;
                path.pop();
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn projectors() -> Vec<Matrix> {
        (0..2)
            .map(|k| {
                let mut m = Matrix::zeros(2, 2);
                m[(k, k)] = c(1., 0.);
                m
            })
            .collect()
    }

    fn qubits() -> Layout {
        Layout::from_pairs(&[(Party::A, 2), (Party::B, 2)]).unwrap()
    }

    #[test]
    fn completeness_violation_names_the_node() {
        let bad = vec![projectors()[0].clone()];
        let inner = ProtocolTree::node(Party::B, bad, vec![ProtocolTree::Leaf(Leaf::output(vec![1]))]);
        let tree = ProtocolTree::node(
            Party::A,
            projectors(),
            vec![ProtocolTree::Leaf(Leaf::output(vec![1])), inner],
        );
        let err = Protocol::new(qubits(), tree).unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("[1]"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_consecutive_same_party() {
        let leaf = || ProtocolTree::Leaf(Leaf::output(vec![1]));
        let inner = ProtocolTree::node(Party::A, vec![identity(2)], vec![leaf()]);
        let tree = ProtocolTree::node(Party::A, vec![identity(2)], vec![inner]);
        assert!(matches!(Protocol::new(qubits(), tree), Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_bad_leaves() {
        let tree = ProtocolTree::Leaf(Leaf::output(vec![]));
        assert!(matches!(Protocol::new(qubits(), tree), Err(Error::Usage(_))));
        let tree = ProtocolTree::Leaf(Leaf::output(vec![2]));
        assert!(matches!(Protocol::new(qubits(), tree), Err(Error::Usage(_))));
        let tree = ProtocolTree::Leaf(Leaf {
            correction_b: Some(Matrix::from_element(2, 2, c(1., 0.))),
            ..Leaf::output(vec![1])
        });
        assert!(matches!(Protocol::new(qubits(), tree), Err(Error::Validation(_))));
    }

    #[test]
    fn ancilla_extends_party_operators() {
        let tree = ProtocolTree::node(
            Party::A,
            projectors(),
            vec![ProtocolTree::Leaf(Leaf::output(vec![1])), ProtocolTree::Leaf(Leaf::output(vec![1]))],
        );
        let p = Protocol::new(qubits(), tree).unwrap().with_ancilla(Party::A, 3).unwrap();
        assert_eq!(p.layout().local_dim(Party::A), 6);
        assert_eq!(p.layout().indices(Party::A), vec![0, 2]);
        match p.root() {
            ProtocolTree::Node { instrument, .. } => assert_eq!(instrument[0].shape(), (6, 6)),
            _ => unreachable!(),
        }
    }
}
