use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use titleqa::ranker::Objective;

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn check(seed: u64, positive_weight: f64, l2: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|_| (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let labels: Vec<u8> = (0..20).map(|_| rng.gen_range(0..2)).collect();
    let weights: Vec<f64> = (0..12).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let bias = rng.gen_range(-0.5..0.5);
    let obj = Objective {
        rows: &rows,
        labels: &labels,
        positive_weight,
        l2,
    };
    let h = 1e-5;
    let (gw, gb) = obj.gradient(&weights, bias);
    let mut worst: f64 = 0.0;
    for j in 0..weights.len() {
        let mut up = weights.clone();
        let mut down = weights.clone();
        up[j] += h;
        down[j] -= h;
        let numeric = (obj.loss(&up, bias) - obj.loss(&down, bias)) / (2.0 * h);
        worst = worst.max(relative_error(gw[j], numeric));
    }
    let numeric = (obj.loss(&weights, bias + h) - obj.loss(&weights, bias - h)) / (2.0 * h);
    worst.max(relative_error(gb, numeric))
}

#[test]
fn analytic_gradient_matches_central_differences() {
    for seed in 0..5 {
        for (pw, l2) in [(1.0, 0.0), (3.0, 1e-4), (0.5, 0.1)] {
            let err = check(seed, pw, l2);
            assert!(err < 1e-4, "seed {seed}, weight {pw}, l2 {l2}: {err:e}");
        }
    }
}
