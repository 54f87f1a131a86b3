//! Entangling power: the largest entanglement a bipartite unitary generates
//! from product inputs, found by multistart Nelder–Mead over the product
//! manifold.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{entanglement_entropy, entropy_of_coefficients, Cut};
use crate::error::{Error, Result};
use crate::linalg::{embed, unitarity_defect, Matrix, PureState, UnitaryOperator, Vector, C64, OPERATOR_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub seed: u64,
    pub step_tol: f64,
    pub max_iters: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 64, seed: 0, step_tol: 1e-6, max_iters: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub value: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglingPowerResult {
    /// Ebits; a lower bound on the true maximum.
    pub value: f64,
    /// The optimizing product input, ordered `A, B` or `a, A, B, b` with ancillas.
    pub argmax_state: PureState,
    pub ancilla_assisted: bool,
    pub optimizer_trace: Vec<TraceEntry>,
}

impl EntanglingPowerResult {
    pub const LABEL: &'static str = "lower bound (numerical)";

    /// Cut between Alice's and Bob's factors of `argmax_state`.
    pub fn cut(&self) -> Cut {
        Cut::first(if self.ancilla_assisted { 2 } else { 1 })
    }
}

/// Unit vector in `C^n` from `2(n−1)` angles: hyperspherical magnitudes
/// followed by relative phases.
pub fn state_from_angles(angles: &[f64], n: usize) -> Vector {
    debug_assert_eq!(angles.len(), 2 * (n - 1));
    let (mags, phases) = angles.split_at(n - 1);
    let mut v = Vector::zeros(n);
    let mut remaining = 1.0;
    for k in 0..n {
        let r = if k + 1 < n { remaining * mags[k].cos() } else { remaining };
        if k + 1 < n {
            remaining *= mags[k].sin();
        }
        let phase = if k == 0 { 0.0 } else { phases[k - 1] };
        v[k] = C64::from_polar(r, phase);
    }
    v
}

/// The entanglement across Alice:Bob after applying `gate` to a product of
/// the two parametrized local states.
struct Objective {
    gate: Matrix,
    local_a: usize,
    local_b: usize,
}

impl Objective {
    fn split(&self, p: &[f64]) -> (Vector, Vector) {
        let na = 2 * (self.local_a - 1);
        (state_from_angles(&p[..na], self.local_a), state_from_angles(&p[na..], self.local_b))
    }

    fn output(&self, p: &[f64]) -> Vector {
        let (a, b) = self.split(p);
        &self.gate * a.kronecker(&b)
    }

    fn entropy(&self, p: &[f64]) -> f64 {
        let out = self.output(p);
        let m = Matrix::from_fn(self.local_a, self.local_b, |i, j| out[i * self.local_b + j]);
        let sv: Vec<f64> = m.singular_values().iter().copied().collect();
        entropy_of_coefficients(&sv)
    }

    fn dimension(&self) -> usize {
        2 * (self.local_a - 1) + 2 * (self.local_b - 1)
    }
}

impl CostFunction for Objective {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(-self.entropy(p))
    }
}

fn nelder_mead(obj: &Objective, start: Vec<f64>, scale: f64, cfg: &OptimizerConfig) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex = vec![start.clone()];
    for k in 0..n {
        let mut v = start.clone();
        v[k] += scale;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(cfg.step_tol * cfg.step_tol)
        .expect("tolerance is nonnegative");
    let result = Executor::new(ObjectiveRef(obj), solver)
        .configure(|s| s.max_iters(cfg.max_iters))
        .run();
    match result {
        Ok(res) => {
            let best = res.state().get_best_param().cloned().unwrap_or(start);
            let value = obj.entropy(&best);
            (best, value)
        }
        Err(_) => {
            let value = obj.entropy(&start);
            (start, value)
        }
    }
}

struct ObjectiveRef<'a>(&'a Objective);

impl CostFunction for ObjectiveRef<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        self.0.cost(p)
    }
}

fn run_restart(obj: &Objective, cfg: &OptimizerConfig, index: usize) -> (Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let start: Vec<f64> = (0..obj.dimension())
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let (p, _) = nelder_mead(obj, start, 0.6, cfg);
    // a second pass from a fresh simplex escapes early collapse
    nelder_mead(obj, p, 0.05, cfg)
}

/// Maximizes `E(U(ψ_A ⊗ ψ_B))` over pure product inputs.
///
/// With `ancilla`, each party holds an extra system of its own dimension, the
/// inputs are arbitrary pure states on `a⊗A` and `B⊗b`, `U` acts on `A⊗B`,
/// and entanglement is measured across `aA : Bb`.
pub fn entangling_power(
    u: &UnitaryOperator,
    ancilla: bool,
    cfg: &OptimizerConfig,
) -> Result<EntanglingPowerResult> {
    if cfg.restarts == 0 {
        return Err(Error::Usage("optimizer needs at least one restart".into()));
    }
    if u.dims().len() != 2 {
        return Err(Error::Usage(format!(
            "entangling power needs a bipartite operator, got dims {:?}",
            u.dims()
        )));
    }
    let defect = unitarity_defect(u.matrix());
    if defect > OPERATOR_TOL {
        return Err(Error::Validation(format!("input is not unitary (defect {defect:e})")));
    }
    let (da, db) = (u.dims()[0], u.dims()[1]);
    let (gate, dims) = if ancilla {
        let dims = vec![da, da, db, db];
        (embed(u.matrix(), &[1, 2], &dims)?, dims)
    } else {
        (u.matrix().clone(), vec![da, db])
    };
    let obj = Objective {
        gate,
        local_a: if ancilla { da * da } else { da },
        local_b: if ancilla { db * db } else { db },
    };

    let runs: Vec<(Vec<f64>, f64)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| run_restart(&obj, cfg, i))
        .collect();

    let mut trace = Vec::with_capacity(runs.len());
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, (_, value)) in runs.iter().enumerate() {
        if *value > best_value {
            best_value = *value;
            best = i;
        }
        trace.push(TraceEntry { restart: i, value: *value, best_so_far: best_value });
    }
    let (a, b) = obj.split(&runs[best].0);
    let argmax_state = PureState::normalized(a.kronecker(&b), dims)?;
    let result_cut = Cut::first(if ancilla { 2 } else { 1 });
    let output = PureState::normalized(&obj.gate * argmax_state.amplitudes(), argmax_state.dims().to_vec())?;
    let value = entanglement_entropy(&output, &result_cut)?;
    Ok(EntanglingPowerResult { value, argmax_state, ancilla_assisted: ancilla, optimizer_trace: trace })
}

/// `E(U ψ) − E(ψ)` across `cut`, with `U` acting on the whole input.
pub fn entanglement_delta(u: &UnitaryOperator, input: &PureState, cut: &Cut) -> Result<f64> {
    let targets: Vec<usize> = (0..input.dims().len()).collect();
    entanglement_delta_on(u, &targets, input, cut)
}

/// `E(U ψ) − E(ψ)` across `cut`, with `U` acting on the subsystems `targets`.
pub fn entanglement_delta_on(
    u: &UnitaryOperator,
    targets: &[usize],
    input: &PureState,
    cut: &Cut,
) -> Result<f64> {
    let target_dims: Vec<usize> = targets
        .iter()
        .map(|&k| input.dims().get(k).copied().ok_or_else(|| Error::Usage(format!("no subsystem {k}"))))
        .collect::<Result<_>>()?;
    if target_dims != u.dims() {
        return Err(Error::Dimension(format!(
            "operator dims {:?} vs target dims {target_dims:?}",
            u.dims()
        )));
    }
    let before = entanglement_entropy(input, cut)?;
    let after = entanglement_entropy(&input.apply(u.matrix(), targets)?, cut)?;
    Ok(after - before)
}
