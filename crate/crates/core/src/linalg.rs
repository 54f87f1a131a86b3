//! Dense complex linear algebra over multipartite Hilbert spaces.
//!
//! Subsystem index 0 is the leftmost tensor factor and the most significant
//! digit of computational-basis labels, so `|i⟩_A ⊗ |j⟩_B` sits at row
//! `i * d_B + j`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Tolerance for operator identities (unitarity, completeness).
pub const OPERATOR_TOL: f64 = 1e-10;
/// Tolerance for norms and traces.
pub const NORM_TOL: f64 = 1e-12;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::Usage("subsystem dimension list is empty".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::Usage(format!("subsystem dimension {d} is below 2")));
    }
    Ok(())
}

/// Splits a flat basis index into per-subsystem digits.
pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (k, &d) in dims.iter().enumerate().rev() {
        out[k] = index % d;
        index /= d;
    }
    out
}

pub(crate) fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// For a reordering `order` (new subsystem `i` is old subsystem `order[i]`),
/// returns the map from new flat index to old flat index.
pub(crate) fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let n = total_dim(dims);
    let mut map = vec![0; n];
    let mut old = vec![0; dims.len()];
    for (new_index, slot) in map.iter_mut().enumerate() {
        let nd = digits(new_index, &new_dims);
        for (i, &k) in order.iter().enumerate() {
            old[k] = nd[i];
        }
        *slot = flat_index(&old, dims);
    }
    map
}

fn validate_order(n: usize, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &k in order {
        if k >= n || seen[k] {
            return Err(Error::Usage(format!(
                "invalid subsystem selection {order:?} for {n} subsystems"
            )));
        }
        seen[k] = true;
    }
    Ok(())
}

/// Lifts `op`, acting on the subsystems `targets` (in that order), to the
/// full space described by `dims`.
pub fn embed(op: &Matrix, targets: &[usize], dims: &[usize]) -> Result<Matrix> {
    validate_order(dims.len(), targets)?;
    let target_dims: Vec<usize> = targets.iter().map(|&k| dims[k]).collect();
    let dt = total_dim(&target_dims);
    if op.nrows() != dt || op.ncols() != dt {
        return Err(Error::Dimension(format!(
            "operator is {}x{}, targets {targets:?} span dimension {dt}",
            op.nrows(),
            op.ncols()
        )));
    }
    let n = total_dim(dims);
    let mut full = Matrix::zeros(n, n);
    for col in 0..n {
        let mut dg = digits(col, dims);
        let tcol: Vec<usize> = targets.iter().map(|&k| dg[k]).collect();
        let c_in = flat_index(&tcol, &target_dims);
        for r in 0..dt {
            let entry = op[(r, c_in)];
            if entry == C64::new(0.0, 0.0) {
                continue;
            }
            let rd = digits(r, &target_dims);
            for (i, &k) in targets.iter().enumerate() {
                dg[k] = rd[i];
            }
            full[(flat_index(&dg, dims), col)] = entry;
        }
    }
    Ok(full)
}

/// Largest singular value.
pub fn operator_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

/// Deviation of `m` from unitarity, `‖m†m − I‖` in operator norm.
pub fn unitarity_defect(m: &Matrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    operator_norm(&(m.adjoint() * m - identity(m.nrows())))
}

/// Kronecker product with concatenated subsystem bookkeeping.
pub trait Tensor<Rhs = Self> {
    type Output;
    fn tensor(&self, rhs: &Rhs) -> Self::Output;
}

/// A normalized pure state over an ordered list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vector,
    dims: Vec<usize>,
}

impl PureState {
    /// Requires unit norm within [`NORM_TOL`].
    pub fn new(amplitudes: Vector, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        if amplitudes.len() != total_dim(&dims) {
            return Err(Error::Dimension(format!(
                "{} amplitudes for dims {dims:?}",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Validation("non-finite amplitude".into()));
        }
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "state norm squared is {norm2}, expected 1"
            )));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes `amplitudes` first; fails on the zero vector.
    pub fn normalized(amplitudes: Vector, dims: Vec<usize>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes / c(norm, 0.0), dims)
    }

    pub fn from_slice(amplitudes: &[C64], dims: Vec<usize>) -> Result<Self> {
        Self::normalized(Vector::from_column_slice(amplitudes), dims)
    }

    /// Computational basis state `|index⟩` of a single `dim`-level system.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(dim >= 2 && index < dim, "basis index out of range");
        let mut v = Vector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Self { amplitudes: v, dims: vec![dim] }
    }

    /// Computational basis state over several subsystems.
    pub fn product_basis(dims: &[usize], labels: &[usize]) -> Self {
        assert_eq!(dims.len(), labels.len());
        let mut v = Vector::zeros(total_dim(dims));
        v[flat_index(labels, dims)] = c(1.0, 0.0);
        Self { amplitudes: v, dims: dims.to_vec() }
    }

    /// `(|0⟩ + |1⟩)/√2`.
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { amplitudes: Vector::from_vec(vec![c(h, 0.0), c(h, 0.0)]), dims: vec![2] }
    }

    /// `Σ_i |ii⟩/√d`.
    pub fn max_entangled(d: usize) -> Self {
        let mut v = Vector::zeros(d * d);
        let a = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            v[i * d + i] = c(a, 0.0);
        }
        Self { amplitudes: v, dims: vec![d, d] }
    }

    /// Haar-random pure state.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Self {
        let n = total_dim(dims);
        let v = Vector::from_fn(n, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self::normalized(v, dims.to_vec()).expect("gaussian vector is nonzero")
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            dims: self.dims.clone(),
        }
    }

    /// Reorders subsystems: new subsystem `i` is old subsystem `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.dims.len() {
            return Err(Error::Usage(format!(
                "permutation {order:?} does not cover {} subsystems",
                self.dims.len()
            )));
        }
        validate_order(self.dims.len(), order)?;
        let map = permutation_map(&self.dims, order);
        let amplitudes = Vector::from_fn(map.len(), |i, _| self.amplitudes[map[i]]);
        Ok(Self { amplitudes, dims: order.iter().map(|&k| self.dims[k]).collect() })
    }

    /// Coefficient matrix `C[(i, j)]` with rows indexed by `left` and columns by
    /// the remaining subsystems, both in ascending subsystem order.
    pub(crate) fn coefficient_matrix(&self, left: &[usize]) -> Result<Matrix> {
        let mut left = left.to_vec();
        left.sort_unstable();
        validate_order(self.dims.len(), &left)?;
        let right: Vec<usize> = (0..self.dims.len()).filter(|k| !left.contains(k)).collect();
        let rows: usize = left.iter().map(|&k| self.dims[k]).product();
        let cols: usize = right.iter().map(|&k| self.dims[k]).product();
        let order: Vec<usize> = left.iter().chain(&right).copied().collect();
        let permuted = self.permute(&order)?;
        Ok(Matrix::from_fn(rows, cols, |i, j| permuted.amplitudes[i * cols + j]))
    }

    /// Reduced density operator on `keep`, in the order given.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::Usage("partial trace must keep at least one subsystem".into()));
        }
        validate_order(self.dims.len(), keep)?;
        let rest: Vec<usize> = (0..self.dims.len()).filter(|k| !keep.contains(k)).collect();
        let order: Vec<usize> = keep.iter().chain(&rest).copied().collect();
        let permuted = self.permute(&order)?;
        let kept_dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let rows = total_dim(&kept_dims);
        let cols = permuted.dim() / rows;
        let m = Matrix::from_fn(rows, cols, |i, j| permuted.amplitudes[i * cols + j]);
        Ok(DensityOperator { matrix: &m * m.adjoint(), dims: kept_dims })
    }

    /// Applies `op` to the subsystems `targets`.
    pub fn apply(&self, op: &Matrix, targets: &[usize]) -> Result<Self> {
        let full = embed(op, targets, &self.dims)?;
        Ok(Self { amplitudes: full * &self.amplitudes, dims: self.dims.clone() })
    }

    /// Applies an operator on the whole space; the result is renormalized.
    pub fn evolve(&self, u: &UnitaryOperator) -> Result<Self> {
        if u.dims != self.dims {
            return Err(Error::Dimension(format!(
                "operator dims {:?} vs state dims {:?}",
                u.dims, self.dims
            )));
        }
        Self::normalized(&u.matrix * &self.amplitudes, self.dims.clone())
    }

    pub(crate) fn from_parts_unchecked(amplitudes: Vector, dims: Vec<usize>) -> Self {
        Self { amplitudes, dims }
    }
}

impl Tensor for PureState {
    type Output = PureState;
    fn tensor(&self, rhs: &PureState) -> PureState {
        let amplitudes = self.amplitudes.kronecker(&rhs.amplitudes);
        let dims = self.dims.iter().chain(&rhs.dims).copied().collect();
        PureState { amplitudes, dims }
    }
}

/// A density operator over an ordered list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: Matrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Requires Hermiticity and unit trace within [`NORM_TOL`] and no
    /// eigenvalue below `-1e-10`.
    pub fn new(matrix: Matrix, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let n = total_dim(&dims);
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for dims {dims:?}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = operator_norm(&(&matrix - matrix.adjoint()));
        if herm > NORM_TOL {
            return Err(Error::Validation(format!("density operator not Hermitian ({herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::Validation(format!("density operator trace is {tr}")));
        }
        let rho = Self { matrix, dims };
        let min = rho.eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if min < -1e-10 {
            return Err(Error::Validation(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let n = total_dim(dims);
        Self { matrix: identity(n) * c(1.0 / n as f64, 0.0), dims: dims.to_vec() }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * c(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, psi: &PureState) -> f64 {
        psi.amplitudes().dotc(&(&self.matrix * psi.amplitudes())).re
    }

    /// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
    pub fn fidelity(&self, other: &DensityOperator) -> f64 {
        let sqrt_rho = psd_sqrt(&self.matrix);
        let inner = &sqrt_rho * &other.matrix * &sqrt_rho;
        // eigenvalues at roundoff level would contribute O(√ε) each
        let t: f64 = hermitian_eigenvalues(&inner)
            .iter()
            .map(|&x| if x > 1e-13 { x.sqrt() } else { 0.0 })
            .sum();
        t * t
    }

    pub(crate) fn from_parts_unchecked(matrix: Matrix, dims: Vec<usize>) -> Self {
        Self { matrix, dims }
    }
}

fn hermitian_eigenvalues(m: &Matrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().collect()
}

fn psd_sqrt(m: &Matrix) -> Matrix {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let d = Matrix::from_diagonal(&eig.eigenvalues.map(|x| c(if x > 1e-13 { x.sqrt() } else { 0.0 }, 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

impl Tensor for DensityOperator {
    type Output = DensityOperator;
    fn tensor(&self, rhs: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: self.matrix.kronecker(&rhs.matrix),
            dims: self.dims.iter().chain(&rhs.dims).copied().collect(),
        }
    }
}

/// Reduced state on the subsystems in `keep` (result ordered as `keep`).
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(Error::Usage("partial trace must keep at least one subsystem".into()));
    }
    validate_order(rho.dims.len(), keep)?;
    let rest: Vec<usize> = (0..rho.dims.len()).filter(|k| !keep.contains(k)).collect();
    let order: Vec<usize> = keep.iter().chain(&rest).copied().collect();
    let map = permutation_map(&rho.dims, &order);
    let kept_dims: Vec<usize> = keep.iter().map(|&k| rho.dims[k]).collect();
    let dk = total_dim(&kept_dims);
    let dt = map.len() / dk;
    let out = Matrix::from_fn(dk, dk, |i, j| {
        (0..dt).map(|t| rho.matrix[(map[i * dt + t], map[j * dt + t])]).sum()
    });
    Ok(DensityOperator { matrix: out, dims: kept_dims })
}

/// A unitary operator over an ordered list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    matrix: Matrix,
    dims: Vec<usize>,
}

impl UnitaryOperator {
    pub fn new(matrix: Matrix, dims: Vec<usize>) -> Result<Self> {
        Self::with_tolerance(matrix, dims, OPERATOR_TOL)
    }

    pub fn with_tolerance(matrix: Matrix, dims: Vec<usize>, tol: f64) -> Result<Self> {
        check_dims(&dims)?;
        let n = total_dim(&dims);
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for dims {dims:?}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Validation("non-finite matrix entry".into()));
        }
        let defect = unitarity_defect(&matrix);
        if defect > tol {
            return Err(Error::Validation(format!("matrix is not unitary (‖U†U − I‖ = {defect:e})")));
        }
        Ok(Self { matrix, dims })
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self { matrix: identity(total_dim(dims)), dims: dims.to_vec() }
    }

    /// Haar-random unitary via QR of a complex Ginibre matrix.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Self {
        Self { matrix: haar_matrix(total_dim(dims), rng), dims: dims.to_vec() }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), dims: self.dims.clone() }
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &UnitaryOperator) -> Result<Self> {
        if self.dims != rhs.dims {
            return Err(Error::Dimension(format!("{:?} vs {:?}", self.dims, rhs.dims)));
        }
        Ok(Self { matrix: &self.matrix * &rhs.matrix, dims: self.dims.clone() })
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub(crate) fn from_parts_unchecked(matrix: Matrix, dims: Vec<usize>) -> Self {
        Self { matrix, dims }
    }
}

impl Tensor for UnitaryOperator {
    type Output = UnitaryOperator;
    fn tensor(&self, rhs: &UnitaryOperator) -> UnitaryOperator {
        UnitaryOperator {
            matrix: self.matrix.kronecker(&rhs.matrix),
            dims: self.dims.iter().chain(&rhs.dims).copied().collect(),
        }
    }
}

pub(crate) fn haar_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / c(d.norm(), 0.0) } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Eigenvalues of a (numerically) normal matrix via complex Schur form.
///
/// The QR iteration is capped; if it stalls, the eigenvectors are taken from
/// a Hermitian combination of the Hermitian and anti-Hermitian parts (which
/// commute for normal input) and the eigenvalues read off as Rayleigh quotients.
pub(crate) fn eigenvalues_normal(m: &Matrix) -> Vec<C64> {
    if let Some(schur) = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 500) {
        let (_, t) = schur.unpack();
        return (0..t.nrows()).map(|i| t[(i, i)]).collect();
    }
    let herm = (m + m.adjoint()) * c(0.5, 0.);
    let anti = (m - m.adjoint()) * c(0., -0.5);
    let mut best: Option<(f64, Vec<C64>)> = None;
    for t in [0.618_033_988_749_895, 1.324_717_957_244_746, 0.453_397_651_516_404] {
        let eig = (&herm + &anti * c(t, 0.)).symmetric_eigen();
        let mut residual = 0.0f64;
        let values: Vec<C64> = eig
            .eigenvectors
            .column_iter()
            .map(|v| {
                let lambda = (v.adjoint() * m * v)[(0, 0)];
                residual = residual.max((m * v - v * lambda).norm());
                lambda
            })
            .collect();
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, values));
        }
    }
    best.map(|(_, v)| v).unwrap_or_default()
}

/// `min_φ ‖U − e^{iφ} V‖` in operator norm.
///
/// With `W = V†U` having eigenphases `θ_j`, the norm equals
/// `max_j |e^{iθ_j} − e^{iφ}|`, minimized by centring `φ` on the shortest arc
/// that covers every eigenphase.
pub fn distance_up_to_global_phase(u: &UnitaryOperator, v: &UnitaryOperator) -> Result<f64> {
    if u.matrix.shape() != v.matrix.shape() {
        return Err(Error::Dimension(format!(
            "shapes {:?} vs {:?}",
            u.matrix.shape(),
            v.matrix.shape()
        )));
    }
    Ok(matrix_distance_up_to_phase(&u.matrix, &v.matrix))
}

pub(crate) fn matrix_distance_up_to_phase(u: &Matrix, v: &Matrix) -> f64 {
    use std::f64::consts::TAU;
    let w = v.adjoint() * u;
    let mut phases: Vec<f64> = eigenvalues_normal(&w)
        .iter()
        .map(|z| z.arg().rem_euclid(TAU))
        .collect();
    phases.sort_by(f64::total_cmp);
    let n = phases.len();
    let mut largest_gap = TAU - (phases[n - 1] - phases[0]);
    for k in 1..n {
        largest_gap = largest_gap.max(phases[k] - phases[k - 1]);
    }
    let arc = (TAU - largest_gap).max(0.0);
    2.0 * (arc / 4.0).sin()
}

/// Tomographically complete family on one `d`-level system: `|i⟩`,
/// `(|i⟩+|j⟩)/√2` and `(|i⟩+i|j⟩)/√2` for `i < j`; `d²` states in total.
pub fn tomographic_states(d: usize) -> Vec<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out: Vec<PureState> = (0..d).map(|i| PureState::basis(d, i)).collect();
    for i in 0..d {
        for j in i + 1..d {
            for phase in [c(h, 0.0), c(0.0, h)] {
                let mut v = Vector::zeros(d);
                v[i] = c(h, 0.0);
                v[j] = phase;
                out.push(PureState { amplitudes: v, dims: vec![d] });
            }
        }
    }
    out
}
