//! Fuses the synthetic 32x32 pair with the joint osmosis model and prints the
//! energy trace summary.
//!
//! ```text
//! cargo run --release --example fuse [size] [sigma]
//! ```

use std::time::Instant;

use osmosis_fusion::metrics::chroma_error_norm;
use osmosis_fusion::solvers::{ipiano_fuse, IPianoConfig, InitChoice, PdConfig};
use osmosis_fusion::synthetic::fusion_pair;
use osmosis_fusion::ModelWeights;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(32);
    let sigma: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2.0);

    let fx = fusion_pair(n, sigma);
    let start = Instant::now();
    let result = ipiano_fuse(
        &fx.foreground,
        &fx.background,
        &fx.alpha,
        &ModelWeights::default(),
        &IPianoConfig::default(),
        &PdConfig::default(),
        InitChoice::Foreground,
    )?;
    let elapsed = start.elapsed();

    let trace = &result.trace;
    let last = trace.rows.last();
    println!("grid {n}x{n}, alpha blur sigma {sigma}");
    println!("iterations      {}", trace.rows.len());
    println!("converged       {}", trace.converged);
    println!("initial energy  {:.6e}", trace.initial.total);
    println!("final energy    {:.6e}", trace.last_energy().total);
    if let Some(r) = last {
        println!("final L1, L2    {:e}, {:e}", r.l1, r.l2);
    }
    println!("inner iters     {}", trace.rows.iter().map(|r| r.inner_iters).sum::<usize>());
    let err = chroma_error_norm(&result.u, &fx.foreground)?;
    println!("chroma error vs foreground (rms mean) {:.4e}", err.mean);
    println!("elapsed         {elapsed:.2?}");
    Ok(())
}
