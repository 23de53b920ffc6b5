//! Sweeps the model weights over a small grid on the synthetic pair and
//! tabulates iterations, energy decrease and color fidelity.

use osmosis_fusion::metrics::chroma_error_norm;
use osmosis_fusion::solvers::{ipiano_fuse, IPianoConfig, InitChoice, PdConfig};
use osmosis_fusion::synthetic::fusion_pair;
use osmosis_fusion::ModelWeights;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = fusion_pair(32, 2.0);
    println!(
        "{:>5} {:>5} {:>5} {:>7} {:>12} {:>12} {:>10}",
        "eta", "mu", "gamma", "iters", "E0", "E", "chroma"
    );
    for eta in [0.0, 0.1, 0.5] {
        for mu in [10.0, 100.0] {
            for gamma in [0.0, 1.0] {
                let weights = ModelWeights { eta, mu, gamma, ..ModelWeights::default() };
                let res = ipiano_fuse(
                    &fx.foreground,
                    &fx.background,
                    &fx.alpha,
                    &weights,
                    &IPianoConfig::default(),
                    &PdConfig::default(),
                    InitChoice::Foreground,
                )?;
                let chroma = chroma_error_norm(&res.u, &fx.foreground)?.mean;
                println!(
                    "{eta:>5} {mu:>5} {gamma:>5} {:>7} {:>12.5e} {:>12.5e} {chroma:>10.4e}",
                    res.trace.rows.len(),
                    res.trace.initial.total,
                    res.trace.last_energy().total
                );
            }
        }
    }
    Ok(())
}
