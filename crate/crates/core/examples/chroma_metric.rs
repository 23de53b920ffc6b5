//! Chromaticity error between images: invariant to global intensity scaling,
//! sensitive to hue changes.

use osmosis_fusion::metrics::{chroma_error_norm, write_metrics_csv};
use osmosis_fusion::solvers::InitChoice;
use osmosis_fusion::synthetic::fusion_pair;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = fusion_pair(32, 2.0);
    let f = &fx.foreground;

    let darker = f.scale(0.4);
    println!("foreground vs 0.4 x foreground: {:.3e}", chroma_error_norm(&darker, f)?.mean);

    let blend = InitChoice::Convex.initial_image(f, &fx.background, &fx.alpha);
    let norm = chroma_error_norm(&blend, f)?;
    println!("alpha blend vs foreground:");
    write_metrics_csv(&norm, std::io::stdout().lock())?;
    Ok(())
}
