use globalness::cartan::kak_decompose;
use globalness::entangling_power::{entangling_power, OptimizerConfig};
use globalness::gates::canonical_gate;
use globalness::linalg::{Matrix, UnitaryOperator, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Entropy of a two-qubit pure state from its concurrence.
fn entropy_via_concurrence(v: &[C64; 4]) -> f64 {
    let conc = (2.0 * (v[0] * v[3] - v[1] * v[2]).norm()).min(1.0);
    let p = (1.0 + (1.0 - conc * conc).max(0.0).sqrt()) / 2.0;
    let h = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    h(p) + h(1.0 - p)
}

fn bloch(theta: f64, phi: f64) -> [C64; 2] {
    [C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]
}

fn value(u: &Matrix, x: [f64; 4]) -> f64 {
    let a = bloch(x[0], x[1]);
    let b = bloch(x[2], x[3]);
    let input = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
    let mut out = [C64::new(0.0, 0.0); 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|j| u[(i, j)] * input[j]).sum();
    }
    entropy_via_concurrence(&out)
}

/// Dense scan over both Bloch spheres, then a finer scan around the best cell.
fn grid_max(u: &Matrix) -> f64 {
    use std::f64::consts::PI;
    let n = 20;
    let spans = [PI, 2.0 * PI, PI, 2.0 * PI];
    let mut best = (f64::NEG_INFINITY, [0.0; 4]);
    let scan = |center: [f64; 4], width: [f64; 4], best: &mut (f64, [f64; 4])| {
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    for l in 0..=n {
                        let t = [i, j, k, l].map(|s| s as f64 / n as f64 - 0.5);
                        let x = [0, 1, 2, 3].map(|q| center[q] + t[q] * width[q]);
                        let v = value(u, x);
                        if v > best.0 {
                            *best = (v, x);
                        }
                    }
                }
            }
        }
    };
    scan(spans.map(|s| s / 2.0), spans, &mut best);
    let center = best.1;
    scan(center, spans.map(|s| 2.0 * s / n as f64), &mut best);
    best.0
}

#[test]
fn optimizer_matches_grid_for_single_parameter_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = OptimizerConfig { restarts: 16, ..Default::default() };
    for gamma in [0.2, 0.5, std::f64::consts::FRAC_PI_4] {
        let core = canonical_gate(gamma, 0.0, 0.0).into_matrix();
        let locals = |rng: &mut ChaCha8Rng| {
            UnitaryOperator::random(&[2], rng).into_matrix().kronecker(UnitaryOperator::random(&[2], rng).matrix())
        };
        let u = UnitaryOperator::new(locals(&mut rng) * core * locals(&mut rng), vec![2, 2]).unwrap();
        let dec = kak_decompose(&u).unwrap();
        assert!((dec.gamma[0] - gamma).abs() < 1e-8 && dec.gamma[1].abs() < 1e-8);
        let opt = entangling_power(&u, false, &cfg).unwrap().value;
        let grid = grid_max(u.matrix());
        assert!((opt - grid).abs() < 1e-3, "gamma={gamma}: optimizer {opt}, grid {grid}");
    }
}

#[test]
fn local_unitaries_do_not_change_entangling_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cfg = OptimizerConfig { restarts: 32, ..Default::default() };
    for _ in 0..3 {
        let u = UnitaryOperator::random(&[2, 2], &mut rng);
        let locals = |rng: &mut ChaCha8Rng| {
            UnitaryOperator::random(&[2], rng).into_matrix().kronecker(UnitaryOperator::random(&[2], rng).matrix())
        };
        let v = UnitaryOperator::new(locals(&mut rng) * u.matrix() * locals(&mut rng), vec![2, 2]).unwrap();
        let eu = entangling_power(&u, false, &cfg).unwrap().value;
        let ev = entangling_power(&v, false, &cfg).unwrap().value;
        assert!((eu - ev).abs() < 1e-4, "{eu} vs {ev}");
    }
}
