//! Deterministic synthetic inputs for examples and tests.

use crate::grid::ScalarField;
use crate::image::{AlphaMap, Image};
use crate::io::blur_alpha;

/// A fusion problem: foreground, background and blend map.
#[derive(Debug, Clone)]
pub struct FusionFixture {
    pub foreground: Image,
    pub background: Image,
    pub alpha: AlphaMap,
}

/// Alpha map equal to 1 on the left `split` columns and 0 elsewhere.
pub fn half_plane_alpha(height: usize, width: usize, split: usize) -> AlphaMap {
    AlphaMap::new(ScalarField::from_fn(height, width, |_, j| if j < split { 1.0 } else { 0.0 }))
        .expect("binary values")
}

/// Smooth periodic texture in roughly `[base - amp, base + amp]`.
pub fn texture(height: usize, width: usize, base: f64, amp: f64, phase: f64) -> ScalarField {
    ScalarField::from_fn(height, width, |i, j| {
        let (x, y) = (j as f64, i as f64);
        base + amp
            * (0.6 * (0.55 * x + phase).sin() * (0.35 * y).cos() + 0.4 * (0.23 * (x + y) - phase).sin())
    })
}

/// `n x n` RGB pair: flat foreground, textured background, half-plane alpha
/// blurred with `sigma`.
pub fn fusion_pair(n: usize, sigma: f64) -> FusionFixture {
    let flat = |v: f64| ScalarField::filled(n, n, v);
    let foreground = Image::rgb(flat(180.0), flat(120.0), flat(90.0)).expect("rgb");
    let background = Image::rgb(
        texture(n, n, 70.0, 40.0, 0.0),
        texture(n, n, 110.0, 50.0, 1.1),
        texture(n, n, 150.0, 45.0, 2.3),
    )
    .expect("rgb");
    let alpha = blur_alpha(&half_plane_alpha(n, n, n / 2), sigma).expect("valid sigma");
    FusionFixture { foreground, background, alpha }
}
