//! Seamless cloning of a bright textured patch into a darker background and
//! the additive-shift property of Poisson editing.

use osmosis_fusion::baselines::{poisson_edit, Mask, POISSON_DEFAULT};
use osmosis_fusion::synthetic::texture;
use osmosis_fusion::{Image, ScalarField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 40;
    let background = Image::gray(texture(n, n, 80.0, 30.0, 0.0));
    let patch = Image::gray(texture(n, n, 170.0, 40.0, 1.7));
    let mask = Mask::new(ScalarField::from_fn(n, n, |i, j| {
        let (di, dj) = (i as f64 - 20.0, j as f64 - 20.0);
        if di * di + dj * dj < 100.0 {
            1.0
        } else {
            0.0
        }
    }))?;

    let out = poisson_edit(&patch, &background, &mask, &POISSON_DEFAULT)?;
    println!("{} masked pixels, residual {:.2e}", mask.count(), out.residuals[0]);
    println!("row 20 of the result:");
    let row: Vec<String> =
        (0..n).step_by(4).map(|j| format!("{:.1}", out.image.channel(0)[(20, j)])).collect();
    println!("  {}", row.join(" "));

    // a uniformly brighter copy of the background clones back to the background
    let shifted = background.map(|x| x + 25.0);
    let back = poisson_edit(&shifted, &background, &mask, &POISSON_DEFAULT)?;
    let dev = back.image.zip_map(&background, |a, b| (a - b).abs()).max();
    println!("shifted source: max deviation from background {dev:.2e}");
    Ok(())
}
