//! Schmidt decomposition, entropy of entanglement and majorization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, PureState, Tensor, UnitaryOperator, Vector};

/// Coefficients at or below this are treated as absent when counting the
/// Schmidt rank.
pub const SCHMIDT_RANK_TOL: f64 = 1e-10;
const ENTROPY_CLAMP: f64 = 1e-12;
const MAJORIZATION_SLACK: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-9;

/// A bipartition of a state's subsystems; `left` lists one side, the rest
/// form the other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub left: Vec<usize>,
}

impl Cut {
    pub fn new(left: impl Into<Vec<usize>>) -> Self {
        let mut left = left.into();
        left.sort_unstable();
        left.dedup();
        Self { left }
    }

    /// The first `k` subsystems against the rest.
    pub fn first(k: usize) -> Self {
        Self { left: (0..k).collect() }
    }

    /// The complementary side for a state with `n` subsystems.
    pub fn right(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|k| !self.left.contains(k)).collect()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.left.is_empty() || self.left.len() >= n {
            return Err(Error::Usage(format!(
                "cut {:?} does not split {n} subsystems into two nonempty groups",
                self.left
            )));
        }
        if let Some(k) = self.left.iter().find(|&&k| k >= n) {
            return Err(Error::Usage(format!("cut names subsystem {k}, state has {n}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtData {
    /// Descending, nonnegative; `min(d_left, d_right)` entries.
    pub coefficients: Vec<f64>,
    /// Orthonormal columns on the left side.
    pub basis_a: Matrix,
    /// Orthonormal columns on the right side.
    pub basis_b: Matrix,
    pub cut: Cut,
}

impl SchmidtData {
    pub fn schmidt_number(&self) -> usize {
        self.coefficients.iter().filter(|&&l| l > SCHMIDT_RANK_TOL).count()
    }

    /// `Σ_i λ_i |a_i⟩ ⊗ |b_i⟩`, left side first.
    pub fn reconstruct(&self) -> Vector {
        let mut v = Vector::zeros(self.basis_a.nrows() * self.basis_b.nrows());
        for (i, &l) in self.coefficients.iter().enumerate() {
            let term = self.basis_a.column(i).kronecker(&self.basis_b.column(i));
            v += term * crate::linalg::c(l, 0.0);
        }
        v
    }
}

pub fn schmidt_decompose(psi: &PureState, cut: &Cut) -> Result<SchmidtData> {
    cut.validate(psi.dims().len())?;
    let m = psi.coefficient_matrix(&cut.left)?;
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients = order.iter().map(|&k| svd.singular_values[k]).collect();
    let basis_a = Matrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let basis_b = Matrix::from_fn(v_t.ncols(), order.len(), |i, j| v_t[(order[j], i)]);
    Ok(SchmidtData { coefficients, basis_a, basis_b, cut: cut.clone() })
}

/// Shannon entropy (bits) of the squared coefficients.
pub fn entropy_of_coefficients(coefficients: &[f64]) -> f64 {
    coefficients
        .iter()
        .filter(|&&l| l > ENTROPY_CLAMP)
        .map(|&l| {
            let p = l * l;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of entanglement across `cut`, in ebits.
pub fn entanglement_entropy(psi: &PureState, cut: &Cut) -> Result<f64> {
    cut.validate(psi.dims().len())?;
    let m = psi.coefficient_matrix(&cut.left)?;
    let sv: Vec<f64> = m.singular_values().iter().copied().collect();
    Ok(entropy_of_coefficients(&sv))
}

fn probabilities(coefficients: &[f64], name: &str) -> Result<Vec<f64>> {
    if let Some(x) = coefficients.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Validation(format!("{name} has invalid coefficient {x}")));
    }
    let p: Vec<f64> = coefficients.iter().map(|x| x * x).collect();
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Validation(format!(
            "{name} squared coefficients sum to {total}, expected 1"
        )));
    }
    Ok(p)
}

/// Whether a state with Schmidt coefficients `lam` can be converted by LOCC
/// into one with Schmidt coefficients `mu`: the squared spectrum of `lam`
/// must be majorized by that of `mu`.
pub fn majorization_convertible(lam: &[f64], mu: &[f64]) -> Result<bool> {
    let mut p = probabilities(lam, "source")?;
    let mut q = probabilities(mu, "target")?;
    let n = p.len().max(q.len());
    p.resize(n, 0.0);
    q.resize(n, 0.0);
    p.sort_by(|a, b| b.total_cmp(a));
    q.sort_by(|a, b| b.total_cmp(a));
    let (mut sp, mut sq) = (0.0, 0.0);
    for k in 0..n {
        sp += p[k];
        sq += q[k];
        if sp > sq + MAJORIZATION_SLACK {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Entanglement needed to prepare `U(ψ_A ⊗ ψ_B)` when the inputs are known.
pub fn entanglement_cost_known_state(
    u: &UnitaryOperator,
    psi_a: &PureState,
    psi_b: &PureState,
) -> Result<f64> {
    let input = psi_a.tensor(psi_b);
    if input.dims() != u.dims() {
        return Err(Error::Dimension(format!(
            "unitary dims {:?} vs input dims {:?}",
            u.dims(),
            input.dims()
        )));
    }
    let out = input.evolve(u)?;
    entanglement_entropy(&out, &Cut::first(psi_a.dims().len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use crate::linalg::c;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bell() -> PureState {
        PureState::max_entangled(2)
    }

    #[test]
    fn schmidt_examples() {
        let prod = PureState::product_basis(&[2, 2], &[0, 0]);
        let s = schmidt_decompose(&prod, &Cut::first(1)).unwrap();
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14 && s.coefficients[1].abs() < 1e-14);
        assert_eq!(s.schmidt_number(), 1);

        let s = schmidt_decompose(&bell(), &Cut::first(1)).unwrap();
        for l in &s.coefficients {
            assert!((l - FRAC_1_SQRT_2).abs() < 1e-14);
        }
        assert!((s.reconstruct() - bell().amplitudes()).norm() < 1e-12);

        // CNOT(|+⟩|0⟩) by explicit vector arithmetic: amplitudes (1,0,0,1)/√2
        let out = PureState::plus().tensor(&PureState::basis(2, 0)).evolve(&gates::cnot()).unwrap();
        let h = FRAC_1_SQRT_2;
        let expected = Vector::from_vec(vec![c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.)]);
        assert!((out.amplitudes() - &expected).norm() < 1e-15);
        let s = schmidt_decompose(&out, &Cut::first(1)).unwrap();
        assert!((s.coefficients[0] - h).abs() < 1e-14 && (s.coefficients[1] - h).abs() < 1e-14);
    }

    #[test]
    fn cut_validation() {
        assert!(matches!(schmidt_decompose(&bell(), &Cut::new(vec![])), Err(Error::Usage(_))));
        assert!(matches!(schmidt_decompose(&bell(), &Cut::new(vec![0, 1])), Err(Error::Usage(_))));
        assert!(matches!(entanglement_entropy(&bell(), &Cut::new(vec![5])), Err(Error::Usage(_))));
    }

    #[test]
    fn entropy_examples() {
        let prod = PureState::product_basis(&[2, 2], &[0, 0]);
        assert_eq!(entanglement_entropy(&prod, &Cut::first(1)).unwrap(), 0.0);
        assert!((entanglement_entropy(&bell(), &Cut::first(1)).unwrap() - 1.0).abs() < 1e-12);
        // A1 B1 A2 B2 ordering: two Bell pairs straddling the cut {A1, A2}
        let two = bell().tensor(&bell()).permute(&[0, 2, 1, 3]).unwrap();
        let e = entanglement_entropy(&two, &Cut::new(vec![0, 1])).unwrap();
        assert!((e - 2.0).abs() < 1e-12);
    }

    #[test]
    fn schmidt_across_noncontiguous_cut() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = PureState::random(&[2, 3, 2], &mut rng);
        let cut = Cut::new(vec![0, 2]);
        let s = schmidt_decompose(&psi, &cut).unwrap();
        let rebuilt = PureState::from_parts_unchecked(s.reconstruct(), vec![2, 2, 3]);
        let back = rebuilt.permute(&[0, 2, 1]).unwrap();
        assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-10);
        let total: f64 = s.coefficients.iter().map(|l| l * l).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn majorization_examples() {
        let h = FRAC_1_SQRT_2;
        assert!(majorization_convertible(&[h, h], &[1.0, 0.0]).unwrap());
        assert!(!majorization_convertible(&[1.0, 0.0], &[h, h]).unwrap());
        let a = [0.7f64.sqrt(), 0.3f64.sqrt()];
        let b = [0.6f64.sqrt(), 0.4f64.sqrt()];
        assert!(!majorization_convertible(&a, &b).unwrap());
        assert!(majorization_convertible(&b, &a).unwrap());
        // padding
        assert!(majorization_convertible(&[0.5, 0.5, 0.5, 0.5], &[h, h]).unwrap());
        assert!(matches!(majorization_convertible(&[0.5, 0.5], &[1.0]), Err(Error::Validation(_))));
        assert!(matches!(majorization_convertible(&[-1.0], &[1.0]), Err(Error::Validation(_))));
    }

    #[test]
    fn known_state_cost() {
        let zero = PureState::basis(2, 0);
        let id = UnitaryOperator::identity(&[2, 2]);
        assert_eq!(entanglement_cost_known_state(&id, &zero, &zero).unwrap(), 0.0);
        let e = entanglement_cost_known_state(&gates::cnot(), &PureState::plus(), &zero).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = PureState::random(&[2], &mut rng);
        let b = PureState::random(&[2], &mut rng);
        assert!(entanglement_cost_known_state(&gates::swap(), &a, &b).unwrap() < 1e-9);
        let three = PureState::basis(3, 0);
        assert!(matches!(
            entanglement_cost_known_state(&gates::swap(), &three, &b),
            Err(Error::Dimension(_))
        ));
    }

    /// Exact oracle: for every k the largest k-subset sum of `p` must not
    /// exceed that of `q`, enumerated over all subsets with integer weights.
    fn brute_force_majorized(p: &[u32], q: &[u32]) -> bool {
        let (np, nq): (u64, u64) = (p.iter().map(|&x| x as u64).sum(), q.iter().map(|&x| x as u64).sum());
        let n = p.len().max(q.len());
        let best = |v: &[u32], k: usize| -> u64 {
            (0u32..(1 << v.len()))
                .filter(|m| m.count_ones() as usize == k.min(v.len()))
                .map(|m| (0..v.len()).filter(|i| m >> i & 1 == 1).map(|i| v[i] as u64).sum())
                .max()
                .unwrap_or(0)
        };
        (1..=n).all(|k| best(p, k) * nq <= best(q, k) * np)
    }

    fn coefficients(weights: &[u32]) -> Vec<f64> {
        let total: u32 = weights.iter().sum();
        weights.iter().map(|&w| (w as f64 / total as f64).sqrt()).collect()
    }

    proptest! {
        #[test]
        fn majorization_matches_brute_force(
            p in prop::collection::vec(0u32..20, 1..=4),
            q in prop::collection::vec(0u32..20, 1..=4),
        ) {
            prop_assume!(p.iter().any(|&x| x > 0) && q.iter().any(|&x| x > 0));
            let got = majorization_convertible(&coefficients(&p), &coefficients(&q)).unwrap();
            prop_assert_eq!(got, brute_force_majorized(&p, &q));
        }

        #[test]
        fn majorization_is_reflexive_and_antisymmetric(
            p in prop::collection::vec(1u32..20, 1..=4),
            q in prop::collection::vec(1u32..20, 1..=4),
        ) {
            let (a, b) = (coefficients(&p), coefficients(&q));
            prop_assert!(majorization_convertible(&a, &a).unwrap());
            if majorization_convertible(&a, &b).unwrap() && majorization_convertible(&b, &a).unwrap() {
                let sorted = |v: &[f64]| {
                    let mut s: Vec<f64> = v.iter().map(|x| x * x).collect();
                    s.resize(4, 0.0);
                    s.sort_by(|x, y| y.total_cmp(x));
                    s
                };
                for (x, y) in sorted(&a).iter().zip(sorted(&b)) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn entropy_invariant_under_local_unitaries(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = PureState::random(&[2, 3], &mut rng);
            let local = UnitaryOperator::random(&[2], &mut rng).tensor(&UnitaryOperator::random(&[3], &mut rng));
            let before = entanglement_entropy(&psi, &Cut::first(1)).unwrap();
            let after = entanglement_entropy(&psi.evolve(&local).unwrap(), &Cut::first(1)).unwrap();
            prop_assert!((before - after).abs() < 1e-9);
        }

        #[test]
        fn two_qubit_output_has_schmidt_number_at_most_two(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = UnitaryOperator::random(&[2, 2], &mut rng);
            let input = PureState::random(&[2], &mut rng).tensor(&PureState::random(&[2], &mut rng));
            let s = schmidt_decompose(&input.evolve(&u).unwrap(), &Cut::first(1)).unwrap();
            prop_assert!(s.schmidt_number() <= 2);
        }
    }
}
