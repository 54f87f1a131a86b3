//! Constructive protocols for the tasks in [`super::tasks`].

use super::{Layout, Leaf, Party, Protocol, ProtocolTree};
use crate::cartan::{KakDecomposition, CARTAN_ZERO_TOL};
use crate::error::{Error, Result};
use crate::gates::{clock_matrix, controlled, hadamard_matrix, pauli_x_matrix, pauli_z_matrix, shift_matrix, swap};
use crate::linalg::{c, embed, identity, unitarity_defect, Matrix, PureState, Tensor, UnitaryOperator, C64, OPERATOR_TOL};

/// `Σ_k |e_k⟩⟨e_k| ⊗ u_k`, with `|e_k⟩` the columns of `basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledUnitary {
    pub basis: Matrix,
    pub unitaries: Vec<Matrix>,
}

impl ControlledUnitary {
    pub fn new(basis: Matrix, unitaries: Vec<Matrix>) -> Result<Self> {
        let d = basis.nrows();
        if !basis.is_square() || unitaries.len() != d || d == 0 {
            return Err(Error::Dimension(format!(
                "basis is {}x{} with {} unitaries",
                basis.nrows(),
                basis.ncols(),
                unitaries.len()
            )));
        }
        if unitarity_defect(&basis) > OPERATOR_TOL {
            return Err(Error::Validation("control basis is not orthonormal".into()));
        }
        let db = unitaries[0].nrows();
        for (k, u) in unitaries.iter().enumerate() {
            if u.nrows() != db || !u.is_square() {
                return Err(Error::Dimension(format!("u_{k} is {}x{}, expected {db}x{db}", u.nrows(), u.ncols())));
            }
            if unitarity_defect(u) > OPERATOR_TOL {
                return Err(Error::Validation(format!("u_{k} is not unitary")));
            }
        }
        Ok(Self { basis, unitaries })
    }

    /// Control in the computational basis.
    pub fn standard(unitaries: Vec<Matrix>) -> Result<Self> {
        Self::new(identity(unitaries.len()), unitaries)
    }

    pub fn control_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn target_dim(&self) -> usize {
        self.unitaries[0].nrows()
    }

    pub fn to_unitary(&self) -> UnitaryOperator {
        let (da, db) = (self.control_dim(), self.target_dim());
        let mut m = Matrix::zeros(da * db, da * db);
        for (k, u) in self.unitaries.iter().enumerate() {
            let e = self.basis.column(k);
            m += (&e * e.adjoint()).kronecker(u);
        }
        UnitaryOperator::from_parts_unchecked(m, vec![da, db])
    }
}

fn projector(v: nalgebra::DVectorView<'_, C64>) -> Matrix {
    v * v.adjoint()
}

fn bob_leaf(correction: Matrix, output: Vec<usize>) -> ProtocolTree {
    ProtocolTree::Leaf(Leaf { correction_b: Some(correction), output, ..Default::default() })
}

/// Alice measures `{|e_k⟩⟨e_k|}`, Bob undoes `u_k`. Output is Bob's subsystem.
pub fn build_relocalization_protocol(cu: &ControlledUnitary) -> Result<Protocol> {
    let layout = Layout::from_pairs(&[(Party::A, cu.control_dim()), (Party::B, cu.target_dim())])?;
    let instrument = (0..cu.control_dim()).map(|k| projector(cu.basis.column(k))).collect();
    let children = cu.unitaries.iter().map(|u| bob_leaf(u.adjoint(), vec![1])).collect();
    Protocol::new(layout, ProtocolTree::node(Party::A, instrument, children))
}

/// Relocalization for a two-qubit gate of Cartan number at most one, read off
/// its KAK form `e^{iφ}(u_A⊗u_B) exp(iγ X⊗X) (v_A⊗v_B)`.
pub fn build_relocalization_from_kak(dec: &KakDecomposition) -> Result<Protocol> {
    let n = dec.cartan_number(CARTAN_ZERO_TOL);
    if n > 1 {
        return Err(Error::Validation(format!(
            "Cartan number {n}: not locally equivalent to a controlled-unitary"
        )));
    }
    let g = dec.gamma[0];
    let (cg, sg) = (c(g.cos(), 0.), c(0., g.sin()));
    let x = pauli_x_matrix();
    let id = identity(2);
    // exp(±iγX) on the |±⟩ eigenspaces of X
    let rot = |sign: f64| &id * cg + &x * (sg * sign);
    let h = hadamard_matrix();
    let basis = &dec.u_a * h;
    let unitaries = vec![&dec.u_b * rot(1.0) * &dec.v_b, &dec.u_b * rot(-1.0) * &dec.v_b];
    build_relocalization_protocol(&ControlledUnitary::new(basis, unitaries)?)
}

/// One-piece relocalization for `U_ex` with `ξ_A = |+⟩`, using
/// `U_ex(|+⟩⊗ψ) = (H⊗H)·CZ(|+⟩⊗ψ) = Σ_m H|m⟩/√2 ⊗ H Z^m ψ`: Alice measures
/// in the `X` basis and Bob applies `Z^m H`.
pub fn build_u_ex_relocalization_protocol() -> Result<Protocol> {
    let h = hadamard_matrix();
    let unitaries = vec![h.clone(), &h * pauli_z_matrix()];
    build_relocalization_protocol(&ControlledUnitary::new(h, unitaries)?)
}

/// The entanglement-assisted implementation of `|0⟩⟨0|⊗I + |1⟩⟨1|⊗u`
/// consuming one Bell pair. Layout `[A, B, a, b]` with the pair on `(a, b)`;
/// the returned resource is `|Φ⁺⟩`.
pub fn build_ea_implementation_protocol(u: &Matrix) -> Result<(Protocol, PureState)> {
    let db = u.nrows();
    if !u.is_square() {
        return Err(Error::Dimension(format!("u is {}x{}", u.nrows(), u.ncols())));
    }
    if unitarity_defect(u) > OPERATOR_TOL {
        return Err(Error::Validation("u is not unitary".into()));
    }
    let layout = Layout::from_pairs(&[(Party::A, 2), (Party::B, db), (Party::A, 2), (Party::B, 2)])?;
    let basis_proj = |m: usize| {
        let mut p = Matrix::zeros(2, 2);
        p[(m, m)] = c(1., 0.);
        p
    };
    let cnot = controlled(&[identity(2), pauli_x_matrix()])?.into_matrix();
    let id_b = identity(db);
    // local order (B, b): controlled on b, acting on B
    let cu_from_b = identity(db).kronecker(&basis_proj(0)) + u.kronecker(&basis_proj(1));
    let xb = |m: usize| id_b.kronecker(&if m == 0 { identity(2) } else { pauli_x_matrix() });
    let h = hadamard_matrix();
    let z = pauli_z_matrix();

    let alice: Vec<Matrix> = (0..2).map(|m| identity(2).kronecker(&basis_proj(m)) * &cnot).collect();
    let children = (0..2)
        .map(|m| {
            let bob: Vec<Matrix> =
                (0..2).map(|n| id_b.kronecker(&(basis_proj(n) * &h)) * &cu_from_b * xb(m)).collect();
            let leaves = (0..2)
                .map(|n| {
                    let za = if n == 0 { identity(2) } else { z.clone() };
                    ProtocolTree::Leaf(Leaf {
                        correction_a: Some(za.kronecker(&identity(2))),
                        correction_b: None,
                        output: vec![0, 1],
                    })
                })
                .collect();
            ProtocolTree::node(Party::B, bob, leaves)
        })
        .collect();
    let resource = PureState::max_entangled(2);
    let protocol = Protocol::new(layout, ProtocolTree::node(Party::A, alice, children))?.with_resource(resource.clone())?;
    Ok((protocol, resource))
}

/// `W_{jk} = X^j Z^k` for the generalized Bell basis, indexed `j·d + k`.
fn weyl(d: usize, j: usize, k: usize) -> Matrix {
    let x = shift_matrix(d);
    let z = clock_matrix(d);
    let mut w = identity(d);
    for _ in 0..j {
        w = &w * &x;
    }
    for _ in 0..k {
        w = &w * &z;
    }
    w
}

/// Projectors onto `(I ⊗ W_{jk})|Φ_d⟩`, all `d²` of them.
fn bell_measurement(d: usize) -> Vec<Matrix> {
    let phi = PureState::max_entangled(d);
    (0..d * d)
        .map(|idx| {
            let v = identity(d).kronecker(&weyl(d, idx / d, idx % d)) * phi.amplitudes();
            &v * v.adjoint()
        })
        .collect()
}

/// Teleportation of a qudit. Layout `[A, a, b]` with `|Φ_d⟩` on `(a, b)`;
/// outcome `j·d + k` is corrected by `W_{jk}ᵀ` at Bob.
pub fn build_teleportation_protocol(d: usize) -> Result<(Protocol, PureState)> {
    if d < 2 {
        return Err(Error::Usage(format!("teleportation needs d >= 2, got {d}")));
    }
    let layout = Layout::from_pairs(&[(Party::A, d), (Party::A, d), (Party::B, d)])?;
    let children = (0..d * d).map(|idx| bob_leaf(weyl(d, idx / d, idx % d).transpose(), vec![2])).collect();
    let resource = PureState::max_entangled(d);
    let protocol = Protocol::new(layout, ProtocolTree::node(Party::A, bell_measurement(d), children))?
        .with_resource(resource.clone())?;
    Ok((protocol, resource))
}

/// SWAP of two qubits by teleporting each way. Layout
/// `[A, B, a1, b1, a2, b2]` with Bell pairs on `(a1, b1)` and `(a2, b2)`.
pub fn build_swap_teleportation_protocol() -> Result<(Protocol, PureState)> {
    let layout = Layout::from_pairs(&[
        (Party::A, 2),
        (Party::B, 2),
        (Party::A, 2),
        (Party::B, 2),
        (Party::A, 2),
        (Party::B, 2),
    ])?;
    let local = [2, 2, 2];
    let sw = swap().into_matrix();
    let lift = |ops: Vec<Matrix>, targets: &[usize]| -> Result<Vec<Matrix>> {
        ops.iter().map(|m| embed(m, targets, &local)).collect()
    };
    // Alice: (A, a1, a2); Bob: (B, b1, b2)
    let alice = lift(bell_measurement(2), &[0, 1])?;
    let bob = lift(bell_measurement(2), &[0, 2])?;
    let children = (0..4)
        .map(|i| {
            let leaves = (0..4)
                .map(|j| -> Result<ProtocolTree> {
                    // ψ_B sits on a2, ψ_A on b1; fix, then move into A and B.
                    let fix_a = embed(&weyl(2, j / 2, j % 2).transpose(), &[2], &local)?;
                    let fix_b = embed(&weyl(2, i / 2, i % 2).transpose(), &[1], &local)?;
                    Ok(ProtocolTree::Leaf(Leaf {
                        correction_a: Some(embed(&sw, &[0, 2], &local)? * fix_a),
                        correction_b: Some(embed(&sw, &[0, 1], &local)? * fix_b),
                        output: vec![0, 1],
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ProtocolTree::node(Party::B, bob.clone(), leaves))
        })
        .collect::<Result<Vec<_>>>()?;
    let resource = PureState::max_entangled(2).tensor(&PureState::max_entangled(2));
    let protocol = Protocol::new(layout, ProtocolTree::node(Party::A, alice, children))?.with_resource(resource.clone())?;
    Ok((protocol, resource))
}

/// Relocation for CNOT when Bob's input is `|0⟩`: CNOT has copied Alice's
/// basis label, so Alice measures in the `X` basis and Bob applies `Z^m`.
pub fn build_one_bit_relocation_protocol() -> Result<Protocol> {
    let layout = Layout::from_pairs(&[(Party::A, 2), (Party::B, 2)])?;
    let h = hadamard_matrix();
    let instrument = (0..2).map(|m| projector(h.column(m))).collect();
    let children = vec![bob_leaf(identity(2), vec![1]), bob_leaf(pauli_z_matrix(), vec![1])];
    Protocol::new(layout, ProtocolTree::node(Party::A, instrument, children))
}

/// No operations; Bob keeps his subsystem.
pub fn build_identity_protocol(da: usize, db: usize) -> Result<Protocol> {
    let layout = Layout::from_pairs(&[(Party::A, da), (Party::B, db)])?;
    Protocol::new(layout, ProtocolTree::Leaf(Leaf::output(vec![1])))
}
