//! Standard gates used throughout the analyses.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{c, identity, Matrix, UnitaryOperator, C64};

fn qubit(entries: [C64; 4]) -> Matrix {
    Matrix::from_row_slice(2, 2, &entries)
}

pub fn pauli_x_matrix() -> Matrix {
    qubit([c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y_matrix() -> Matrix {
    qubit([c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z_matrix() -> Matrix {
    qubit([c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn hadamard_matrix() -> Matrix {
    let h = FRAC_1_SQRT_2;
    qubit([c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)])
}

/// `S_θ = |0⟩⟨0| + e^{iθ}|1⟩⟨1|`.
pub fn phase_matrix(theta: f64) -> Matrix {
    qubit([c(1., 0.), c(0., 0.), c(0., 0.), C64::from_polar(1.0, theta)])
}

fn single(m: Matrix) -> UnitaryOperator {
    UnitaryOperator::from_parts_unchecked(m, vec![2])
}

pub fn pauli_x() -> UnitaryOperator {
    single(pauli_x_matrix())
}

pub fn pauli_y() -> UnitaryOperator {
    single(pauli_y_matrix())
}

pub fn pauli_z() -> UnitaryOperator {
    single(pauli_z_matrix())
}

pub fn hadamard() -> UnitaryOperator {
    single(hadamard_matrix())
}

pub fn phase(theta: f64) -> UnitaryOperator {
    single(phase_matrix(theta))
}

/// `Σ_k |k⟩⟨k| ⊗ u_k`, with the control on the first subsystem.
pub fn controlled(unitaries: &[Matrix]) -> Result<UnitaryOperator> {
    let n = unitaries.len();
    if n < 2 {
        return Err(Error::Usage("a controlled unitary needs at least two branches".into()));
    }
    let d = unitaries[0].nrows();
    if unitaries.iter().any(|u| u.nrows() != d || u.ncols() != d) {
        return Err(Error::Dimension("controlled branches differ in size".into()));
    }
    let mut m = Matrix::zeros(n * d, n * d);
    for (k, u) in unitaries.iter().enumerate() {
        m.view_mut((k * d, k * d), (d, d)).copy_from(u);
    }
    UnitaryOperator::new(m, vec![n, d])
}

pub fn cnot() -> UnitaryOperator {
    controlled(&[identity(2), pauli_x_matrix()]).expect("CNOT is unitary")
}

pub fn cz() -> UnitaryOperator {
    controlled(&[identity(2), pauli_z_matrix()]).expect("CZ is unitary")
}

/// `C_{S_θ} = |0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ S_θ`.
pub fn controlled_phase(theta: f64) -> UnitaryOperator {
    controlled(&[identity(2), phase_matrix(theta)]).expect("controlled phase is unitary")
}

pub fn swap() -> UnitaryOperator {
    let mut m = Matrix::zeros(4, 4);
    for (r, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(r, col)] = c(1., 0.);
    }
    UnitaryOperator::from_parts_unchecked(m, vec![2, 2])
}

/// The Clifford two-qubit gate with rows `(1,0,0,0)`, `(0,0,1,0)`,
/// `(0,1,0,0)`, `(0,0,0,−1)`: a swap followed by a controlled-Z.
pub fn u_ex() -> UnitaryOperator {
    let mut m = Matrix::zeros(4, 4);
    for (r, col, v) in [(0, 0, 1.), (1, 2, 1.), (2, 1, 1.), (3, 3, -1.)] {
        m[(r, col)] = c(v, 0.);
    }
    UnitaryOperator::from_parts_unchecked(m, vec![2, 2])
}

/// Generalized Pauli shift `X|i⟩ = |i+1 mod d⟩`.
pub fn shift_matrix(d: usize) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        m[((i + 1) % d, i)] = c(1., 0.);
    }
    m
}

/// Generalized Pauli clock `Z|i⟩ = ω^i|i⟩`, `ω = e^{2πi/d}`.
pub fn clock_matrix(d: usize) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::from_polar(1.0, std::f64::consts::TAU * i as f64 / d as f64);
    }
    m
}

/// `exp(i(a X⊗X + b Y⊗Y + c Z⊗Z))`, built from its closed form in the Bell basis.
pub fn canonical_gate(a: f64, b: f64, cc: f64) -> UnitaryOperator {
    // XX, YY, ZZ commute and are simultaneously diagonal in the Bell basis:
    // Φ± have ZZ = +1, Ψ± have ZZ = −1.
    let h = FRAC_1_SQRT_2;
    let bell = [
        ([h, 0., 0., h], a - b + cc),
        ([h, 0., 0., -h], -a + b + cc),
        ([0., h, h, 0.], a + b - cc),
        ([0., h, -h, 0.], -a - b - cc),
    ];
    let mut m = Matrix::zeros(4, 4);
    for (v, angle) in bell {
        let phase = C64::from_polar(1.0, angle);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += phase * c(v[i] * v[j], 0.);
            }
        }
    }
    UnitaryOperator::from_parts_unchecked(m, vec![2, 2])
}

/// Dense matrix exponential `exp(i H)` for Hermitian `H`, via eigendecomposition.
pub fn exp_i_hermitian(h: &Matrix) -> Matrix {
    let herm = (h + h.adjoint()) * c(0.5, 0.);
    let eig = herm.symmetric_eigen();
    let d = Matrix::from_diagonal(&eig.eigenvalues.map(|x| C64::from_polar(1.0, x)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix_distance_up_to_phase, unitarity_defect};

    #[test]
    fn named_gates_are_unitary() {
        for g in [cnot(), cz(), controlled_phase(0.3), swap(), u_ex(), canonical_gate(0.1, 0.2, 0.3)] {
            assert!(unitarity_defect(g.matrix()) < 1e-14);
        }
        assert!(unitarity_defect(&shift_matrix(3)) < 1e-14);
        assert!(unitarity_defect(&clock_matrix(3)) < 1e-14);
    }

    #[test]
    fn canonical_gate_matches_series_exponential() {
        let (x, y, z) = (pauli_x_matrix(), pauli_y_matrix(), pauli_z_matrix());
        let (a, b, cc) = (0.37, -0.21, 0.05);
        let h = x.kronecker(&x) * c(a, 0.) + y.kronecker(&y) * c(b, 0.) + z.kronecker(&z) * c(cc, 0.);
        // Taylor series of exp(iH) as an independent route
        let ih = h * c(0., 1.);
        let mut term = identity(4);
        let mut sum = identity(4);
        for k in 1..40 {
            term = &term * &ih * c(1.0 / k as f64, 0.);
            sum += &term;
        }
        assert!((canonical_gate(a, b, cc).matrix() - sum).norm() < 1e-13);
    }

    #[test]
    fn u_ex_is_cz_after_swap() {
        let m = cz().matrix() * swap().matrix();
        assert!((m - u_ex().matrix()).norm() < 1e-15);
    }

    #[test]
    fn swap_from_exponential() {
        let (x, y, z) = (pauli_x_matrix(), pauli_y_matrix(), pauli_z_matrix());
        let h = (x.kronecker(&x) + y.kronecker(&y) + z.kronecker(&z)) * c(std::f64::consts::FRAC_PI_4, 0.);
        let e = exp_i_hermitian(&h);
        assert!(matrix_distance_up_to_phase(&e, swap().matrix()) < 1e-10);
    }
}
