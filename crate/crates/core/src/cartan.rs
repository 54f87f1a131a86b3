//! Two-qubit Cartan (KAK) decomposition and globalness classification.
//!
//! Every `U ∈ U(4)` factors as
//! `e^{iφ} (u_A ⊗ u_B) · exp[i(γ_X X⊗X + γ_Y Y⊗Y + γ_Z Z⊗Z)] · (v_A ⊗ v_B)`.
//! The triple is brought into the chamber
//! `π/4 ≥ γ_X ≥ γ_Y ≥ |γ_Z|`, with `γ_Z ≥ 0` whenever `γ_X = π/4`, which
//! makes it a complete local-unitary invariant.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, TAU};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{
    canonical_gate, hadamard_matrix, pauli_x_matrix, pauli_y_matrix, pauli_z_matrix,
};
use crate::linalg::{c, identity, unitarity_defect, Matrix, UnitaryOperator, C64, OPERATOR_TOL};

/// Default threshold below which a Cartan coefficient counts as zero (radians).
pub const CARTAN_ZERO_TOL: f64 = 1e-9;

const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct KakDecomposition {
    pub u_a: Matrix,
    pub u_b: Matrix,
    pub v_a: Matrix,
    pub v_b: Matrix,
    /// `(γ_X, γ_Y, γ_Z)` in radians, canonical chamber.
    pub gamma: [f64; 3],
    /// In `[0, 2π)`.
    pub global_phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GlobalnessKind {
    Local,
    ControlledUnitaryClass,
    GeneralGlobal,
    SwapClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalnessClass {
    pub kind: GlobalnessKind,
    pub cartan_number: u8,
}

impl GlobalnessClass {
    pub fn from_gamma(gamma: [f64; 3], tol: f64) -> Self {
        let cartan_number = gamma.iter().filter(|g| g.abs() > tol).count() as u8;
        let kind = match cartan_number {
            0 => GlobalnessKind::Local,
            1 => GlobalnessKind::ControlledUnitaryClass,
            _ if gamma.iter().all(|g| (g - FRAC_PI_4).abs() <= tol) => GlobalnessKind::SwapClass,
            _ => GlobalnessKind::GeneralGlobal,
        };
        Self { kind, cartan_number }
    }

    /// Whether the class is locally equivalent to a controlled-unitary
    /// (local operations included).
    pub fn is_controlled_unitary_equivalent(&self) -> bool {
        self.cartan_number <= 1
    }
}

impl KakDecomposition {
    /// `e^{iφ}(u_A⊗u_B)·N(γ)·(v_A⊗v_B)`.
    pub fn reconstruct(&self) -> Matrix {
        let [a, b, cc] = self.gamma;
        let core = canonical_gate(a, b, cc).into_matrix();
        self.u_a.kronecker(&self.u_b) * core * self.v_a.kronecker(&self.v_b)
            * C64::from_polar(1.0, self.global_phase)
    }

    pub fn cartan_number(&self, tol: f64) -> u8 {
        cartan_number(self, tol)
    }

    pub fn class(&self, tol: f64) -> GlobalnessClass {
        GlobalnessClass::from_gamma(self.gamma, tol)
    }
}

/// Number of Cartan coefficients whose magnitude exceeds `tol`.
pub fn cartan_number(dec: &KakDecomposition, tol: f64) -> u8 {
    dec.gamma.iter().filter(|g| g.abs() > tol).count() as u8
}

fn magic_basis() -> Matrix {
    let h = FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let entries = [
        c(h, 0.), c(0., h), c(0., 0.), c(0., 0.),
        c(0., 0.), c(0., 0.), c(0., h), c(h, 0.),
        c(0., 0.), c(0., 0.), c(0., h), c(-h, 0.),
        c(h, 0.), c(0., -h), c(0., 0.), c(0., 0.),
    ];
    Matrix::from_row_slice(4, 4, &entries)
}

/// Real orthogonal `P` (det +1) and phases `d` with `m = P diag(d) Pᵀ`, for a
/// complex symmetric unitary `m`.
fn diagonalize_symmetric_unitary(m: &Matrix) -> Result<(DMatrix<f64>, Vec<C64>)> {
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    // Re m and Im m are commuting real symmetric matrices; a generic real
    // combination of them has the joint eigenbasis, which also resolves
    // degenerate eigenphases into real vectors.
    let mut rng = ChaCha8Rng::seed_from_u64(0x4b41_4b);
    let mut weights = (1.2602066112249388, 0.22317849046722027);
    for _ in 0..100 {
        let mix = &re * weights.0 + &im * weights.1;
        let mix = (&mix + mix.transpose()) * 0.5;
        let eig = mix.symmetric_eigen();
        let mut p = eig.eigenvectors;
        if p.determinant() < 0.0 {
            let mut col = p.column_mut(3);
            col *= -1.0;
        }
        let pc = p.map(|x| c(x, 0.));
        let diag = pc.transpose() * m * &pc;
        let d: Vec<C64> = (0..4).map(|i| diag[(i, i)]).collect();
        let rebuilt = &pc * Matrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone())) * pc.transpose();
        if (rebuilt - m).norm() < 1e-11 {
            return Ok((p, d));
        }
        weights = (rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    Err(Error::Validation("failed to diagonalize the magic-basis symmetric form".into()))
}

/// Left/right local factors (as 4×4 matrices, up to phase) and the core triple.
struct Work {
    gamma: [f64; 3],
    left: Matrix,
    right: Matrix,
}

fn pauli(k: usize) -> Matrix {
    match k {
        0 => pauli_x_matrix(),
        1 => pauli_y_matrix(),
        _ => pauli_z_matrix(),
    }
}

impl Work {
    /// `γ_k ← γ_k − n·π/2`, using `N(γ) = N(γ') · (i P⊗P)^n`.
    fn shift(&mut self, k: usize, n: i64) {
        self.gamma[k] -= n as f64 * FRAC_PI_2;
        if n.rem_euclid(2) == 1 {
            let p = pauli(k);
            self.right = p.kronecker(&p) * &self.right;
        }
    }

    /// Negates `γ_j` and `γ_k` by conjugating with the remaining Pauli on qubit A.
    fn flip(&mut self, j: usize, k: usize) {
        let q = pauli(3 - j - k).kronecker(&identity(2));
        self.left = &self.left * &q;
        self.right = &q * &self.right;
        self.gamma[j] = -self.gamma[j];
        self.gamma[k] = -self.gamma[k];
    }

    /// Exchanges `γ_j` and `γ_k` via a local Clifford `G⊗G` with
    /// `N(γ) = (G⊗G)† N(γ') (G⊗G)`.
    fn exchange(&mut self, j: usize, k: usize) {
        let h = FRAC_1_SQRT_2;
        let g = match (j.min(k), j.max(k)) {
            (0, 1) => Matrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)]),
            (0, 2) => hadamard_matrix(),
            _ => Matrix::from_row_slice(2, 2, &[c(h, 0.), c(0., -h), c(0., -h), c(h, 0.)]),
        };
        let gg = g.kronecker(&g);
        self.left = &self.left * gg.adjoint();
        self.right = gg * &self.right;
        self.gamma.swap(j, k);
    }

    fn canonicalize(&mut self) {
        for k in 0..3 {
            let n = (self.gamma[k] / FRAC_PI_2).round() as i64;
            self.shift(k, n);
            if self.gamma[k] < -FRAC_PI_4 + BOUNDARY_TOL {
                self.shift(k, -1);
            }
        }
        // sort by magnitude, descending
        for _ in 0..2 {
            for k in 0..2 {
                if self.gamma[k].abs() < self.gamma[k + 1].abs() {
                    self.exchange(k, k + 1);
                }
            }
        }
        if self.gamma[0] < 0.0 {
            self.flip(0, 1);
        }
        if self.gamma[1] < 0.0 {
            self.flip(1, 2);
        }
        // on the γ_X = π/4 face the mirror images coincide
        if (self.gamma[0] - FRAC_PI_4).abs() < BOUNDARY_TOL && self.gamma[2] < 0.0 {
            self.shift(0, 1);
            self.flip(0, 2);
        }
    }
}

/// Splits a product operator `K = A ⊗ B` into 2×2 factors, each scaled to
/// unit determinant.
pub fn factor_product(k: &Matrix) -> Result<(Matrix, Matrix)> {
    if k.shape() != (4, 4) {
        return Err(Error::Dimension(format!("expected 4x4, got {:?}", k.shape())));
    }
    let block = |i: usize, j: usize| k.view((2 * i, 2 * j), (2, 2)).into_owned();
    let (bi, bj) = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .max_by(|&(a, b), &(x, y)| block(a, b).norm().total_cmp(&block(x, y).norm()))
        .expect("four blocks");
    let pivot = block(bi, bj);
    let mut b = &pivot / pivot.determinant().sqrt();
    let mut a = Matrix::from_fn(2, 2, |i, j| (b.adjoint() * block(i, j)).trace() * 0.5);
    let residual = (a.kronecker(&b) - k).norm();
    if residual > 1e-8 * k.norm().max(1.0) {
        return Err(Error::Validation(format!("operator is not a tensor product (residual {residual:e})")));
    }
    a /= a.determinant().sqrt();
    b /= b.determinant().sqrt();
    Ok((a, b))
}

/// Cartan decomposition of a two-qubit unitary.
pub fn kak_decompose(u: &UnitaryOperator) -> Result<KakDecomposition> {
    if u.dims() != [2, 2] {
        return Err(Error::Usage(format!(
            "Cartan decomposition needs dims [2, 2], got {:?}",
            u.dims()
        )));
    }
    let defect = unitarity_defect(u.matrix());
    if defect > OPERATOR_TOL {
        return Err(Error::Validation(format!("input is not unitary (defect {defect:e})")));
    }
    let target = u.matrix();
    let det = target.determinant();
    let special = target * C64::from_polar(1.0, -det.arg() / 4.0);

    let magic = magic_basis();
    let um = magic.adjoint() * &special * &magic;
    let m2 = um.transpose() * &um;
    let (p, d) = diagonalize_symmetric_unitary(&m2)?;

    let mut theta: Vec<f64> = d.iter().map(|z| z.arg() / 2.0).collect();
    theta[3] = -(theta[0] + theta[1] + theta[2]);

    let pc = p.map(|x| c(x, 0.));
    let inv_phases = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
        4,
        theta.iter().map(|&t| C64::from_polar(1.0, -t)),
    ));
    let k1 = &um * &pc * inv_phases;

    let mut work = Work {
        gamma: [
            (theta[0] + theta[2]) / 2.0,
            (theta[1] + theta[2]) / 2.0,
            (theta[0] + theta[1]) / 2.0,
        ],
        left: &magic * k1 * magic.adjoint(),
        right: &magic * pc.transpose() * magic.adjoint(),
    };
    work.canonicalize();

    let (u_a, u_b) = factor_product(&work.left)?;
    let (v_a, v_b) = factor_product(&work.right)?;
    let mut dec = KakDecomposition { u_a, u_b, v_a, v_b, gamma: work.gamma, global_phase: 0.0 };
    let overlap = (dec.reconstruct().adjoint() * target).trace();
    dec.global_phase = overlap.arg().rem_euclid(TAU);
    Ok(dec)
}

/// Makhlin local invariants `(G1, G2)` of a two-qubit unitary.
pub fn makhlin_invariants(u: &Matrix) -> (C64, f64) {
    let magic = magic_basis();
    let um = magic.adjoint() * u * &magic;
    let m = um.transpose() * &um;
    let det = u.determinant();
    let tr = m.trace();
    let tr2 = (&m * &m).trace();
    let g1 = tr * tr / (det * 16.0);
    let g2 = (tr * tr - tr2) / (det * 4.0);
    (g1, g2.re)
}

/// Distance between the Makhlin invariants of `u` and those of the core gate
/// `N(γ)`: an independent confirmation of the extracted triple.
pub fn makhlin_residual(u: &UnitaryOperator, dec: &KakDecomposition) -> f64 {
    let [a, b, cc] = dec.gamma;
    let (g1, g2) = makhlin_invariants(u.matrix());
    let (h1, h2) = makhlin_invariants(canonical_gate(a, b, cc).matrix());
    (g1 - h1).norm().max((g2 - h2).abs())
}

/// Theorem-1 criterion: true iff `U` is locally equivalent to a
/// controlled-unitary (Cartan number ≤ 1).
pub fn is_lu_equiv_controlled_unitary(u: &UnitaryOperator) -> Result<(bool, GlobalnessClass)> {
    let dec = kak_decompose(u)?;
    let class = dec.class(CARTAN_ZERO_TOL);
    Ok((class.is_controlled_unitary_equivalent(), class))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use crate::linalg::{matrix_distance_up_to_phase, Tensor};
    use std::f64::consts::PI;

    fn reconstruction_error(u: &UnitaryOperator, dec: &KakDecomposition) -> f64 {
        crate::linalg::operator_norm(&(dec.reconstruct() - u.matrix()))
    }

    #[test]
    fn work_moves_preserve_the_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let l = crate::linalg::haar_matrix(2, &mut rng).kronecker(&crate::linalg::haar_matrix(2, &mut rng));
        let r = crate::linalg::haar_matrix(2, &mut rng).kronecker(&crate::linalg::haar_matrix(2, &mut rng));
        let make = |w: &Work| {
            let [a, b, cc] = w.gamma;
            &w.left * canonical_gate(a, b, cc).matrix() * &w.right
        };
        let mut w = Work { gamma: [0.3, -0.7, 1.9], left: l, right: r };
        let before = make(&w);
        w.shift(2, 1);
        w.shift(1, -1);
        w.flip(0, 2);
        w.exchange(0, 1);
        w.exchange(0, 2);
        w.exchange(1, 2);
        assert!(matrix_distance_up_to_phase(&make(&w), &before) < 1e-12);
    }

    #[test]
    fn identity_has_zero_gamma() {
        let dec = kak_decompose(&UnitaryOperator::identity(&[2, 2])).unwrap();
        assert!(dec.gamma.iter().all(|g| g.abs() < 1e-12));
        assert_eq!(dec.cartan_number(CARTAN_ZERO_TOL), 0);
    }

    #[test]
    fn controlled_phase_coefficients() {
        for theta in [PI / 8.0, PI / 4.0, PI / 2.0, PI, 0.123] {
            let u = gates::controlled_phase(theta);
            let dec = kak_decompose(&u).unwrap();
            let expected = [theta / 4.0, 0.0, 0.0];
            for k in 0..3 {
                assert!((dec.gamma[k] - expected[k]).abs() < 1e-8, "{theta}: {:?}", dec.gamma);
            }
            assert!(reconstruction_error(&u, &dec) < 1e-8);
        }
    }

    #[test]
    fn named_gate_classes() {
        let dec = kak_decompose(&gates::u_ex()).unwrap();
        assert!((dec.gamma[0] - FRAC_PI_4).abs() < 1e-8);
        assert!((dec.gamma[1] - FRAC_PI_4).abs() < 1e-8);
        assert!(dec.gamma[2].abs() < 1e-8);
        assert_eq!(dec.cartan_number(CARTAN_ZERO_TOL), 2);
        assert_eq!(dec.class(CARTAN_ZERO_TOL).kind, GlobalnessKind::GeneralGlobal);

        let dec = kak_decompose(&gates::swap()).unwrap();
        assert!(dec.gamma.iter().all(|g| (g - FRAC_PI_4).abs() < 1e-8), "{:?}", dec.gamma);
        assert_eq!(dec.class(CARTAN_ZERO_TOL).kind, GlobalnessKind::SwapClass);

        let dec = kak_decompose(&gates::cnot()).unwrap();
        assert_eq!(dec.cartan_number(CARTAN_ZERO_TOL), 1);
    }

    #[test]
    fn classifier_examples() {
        let (ok, class) = is_lu_equiv_controlled_unitary(&gates::cnot()).unwrap();
        assert!(ok);
        assert_eq!(class.kind, GlobalnessKind::ControlledUnitaryClass);
        let (ok, class) = is_lu_equiv_controlled_unitary(&gates::u_ex()).unwrap();
        assert!(!ok);
        assert_eq!(class.kind, GlobalnessKind::GeneralGlobal);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let local = UnitaryOperator::random(&[2], &mut rng).tensor(&UnitaryOperator::random(&[2], &mut rng));
        let (ok, class) = is_lu_equiv_controlled_unitary(&local).unwrap();
        assert!(ok);
        assert_eq!(class.kind, GlobalnessKind::Local);
    }

    #[test]
    fn rejects_bad_inputs() {
        let u3 = UnitaryOperator::identity(&[3, 3]);
        assert!(matches!(kak_decompose(&u3), Err(Error::Usage(_))));
        let u4 = UnitaryOperator::identity(&[4]);
        assert!(matches!(kak_decompose(&u4), Err(Error::Usage(_))));
    }

    #[test]
    fn random_round_trip_and_chamber() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let u = UnitaryOperator::random(&[2, 2], &mut rng);
            let dec = kak_decompose(&u).unwrap();
            assert!(reconstruction_error(&u, &dec) < 1e-8);
            let [a, b, cc] = dec.gamma;
            assert!(FRAC_PI_4 + 1e-9 >= a && a >= b && b >= cc.abs(), "{:?}", dec.gamma);
            assert!(makhlin_residual(&u, &dec) < 1e-8);
        }
    }

    #[test]
    fn mirror_face_is_normalized() {
        let u = canonical_gate(FRAC_PI_4, 0.2, -0.1);
        let dec = kak_decompose(&u).unwrap();
        assert!((dec.gamma[2] - 0.1).abs() < 1e-9, "{:?}", dec.gamma);
        assert!(reconstruction_error(&u, &dec) < 1e-8);
        let inner = canonical_gate(0.3, 0.2, -0.1);
        let dec = kak_decompose(&inner).unwrap();
        assert!((dec.gamma[2] + 0.1).abs() < 1e-9, "{:?}", dec.gamma);
    }

    #[test]
    fn factor_product_rejects_entangling() {
        assert!(factor_product(gates::cnot().matrix()).is_err());
    }
}
