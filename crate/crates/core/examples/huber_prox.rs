//! Denoises a noisy step edge with the Huberized-TV proximal map and reports
//! how the accelerated primal-dual solver converged.

use osmosis_fusion::solvers::{huber_prox_objective, prox_huber_tv_channel, PdConfig};
use osmosis_fusion::ScalarField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 48;
    let clean = ScalarField::from_fn(n, n, |_, j| if j < n / 2 { 40.0 } else { 160.0 });
    let noisy = ScalarField::from_fn(n, n, |i, j| clean[(i, j)] + rng.gen_range(-20.0..20.0));

    let (eps, zeta) = (0.05, 1.0);
    for eta in [1.0, 5.0, 20.0] {
        let out = prox_huber_tv_channel(&noisy, eta, eps, zeta, &PdConfig::default());
        let rmse = (out.solution.zip_map(&clean, |a, b| (a - b) * (a - b)).mean()).sqrt();
        println!(
            "eta {eta:>5}: {:>5} iterations, rel gap {:.2e}, objective {:.4e}, rmse vs clean {rmse:.3}",
            out.iterations,
            out.rel_gap,
            huber_prox_objective(&out.solution, &noisy, eta, eps, zeta),
        );
    }
    let noise_rmse = (noisy.zip_map(&clean, |a, b| (a - b) * (a - b)).mean()).sqrt();
    println!("input rmse {noise_rmse:.3}");
}
