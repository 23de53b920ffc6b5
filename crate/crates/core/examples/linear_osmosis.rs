//! Linear osmosis of a flat image towards a textured guide. The evolution
//! conserves the mean and ends at the guide rescaled to that mean.

use osmosis_fusion::baselines::{linear_osmosis, OsmosisEvolutionConfig};
use osmosis_fusion::synthetic::texture;
use osmosis_fusion::Image;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 32;
    let guide = Image::gray(texture(n, n, 120.0, 60.0, 0.4));
    let u0 = Image::filled(1, n, n, 50.0)?;

    let run = linear_osmosis(&u0, &guide, &OsmosisEvolutionConfig::default())?;
    for (k, step) in run.history[0].iter().enumerate() {
        println!(
            "step {:>2}: mean {:.10} min {:>8.4} bicgstab its {:>3} residual {:.1e}",
            k + 1,
            step.mean,
            step.min,
            step.solver_iterations,
            step.rel_residual
        );
    }

    let scale = u0.channel(0).mean() / guide.channel(0).mean();
    let target = guide.scale(scale);
    let err = run.image.zip_map(&target, |a, b| (a - b).abs()).max();
    println!("max deviation from rescaled guide: {err:.3e}");
    Ok(())
}
