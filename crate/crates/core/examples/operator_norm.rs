//! Power-iteration estimate of the squared norm of the discrete gradient,
//! compared with the closed form `4 + 4 cos(pi / n)` of the square grid.

use osmosis_fusion::grid::operator_norm_sq_estimate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>6}  {:>16}  {:>16}", "n", "estimate", "closed form");
    for n in [4, 8, 16, 32, 64, 128] {
        let est = operator_norm_sq_estimate(n, n)?;
        let exact = 4.0 + 4.0 * (std::f64::consts::PI / n as f64).cos();
        println!("{n:>6}  {est:>16.12}  {exact:>16.12}");
    }
    Ok(())
}
