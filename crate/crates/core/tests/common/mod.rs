#![allow(dead_code)]

use osmosis_fusion::{Image, ScalarField, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_field(rng: &mut impl Rng, h: usize, w: usize, lo: f64, hi: f64) -> ScalarField {
    ScalarField::from_fn(h, w, |_, _| rng.gen_range(lo..hi))
}

pub fn uniform_vector(rng: &mut impl Rng, h: usize, w: usize, lo: f64, hi: f64) -> VectorField {
    VectorField::new(uniform_field(rng, h, w, lo, hi), uniform_field(rng, h, w, lo, hi)).unwrap()
}

pub fn uniform_gray(rng: &mut impl Rng, h: usize, w: usize, lo: f64, hi: f64) -> Image {
    Image::gray(uniform_field(rng, h, w, lo, hi))
}

pub fn uniform_rgb(rng: &mut impl Rng, h: usize, w: usize, lo: f64, hi: f64) -> Image {
    Image::rgb(
        uniform_field(rng, h, w, lo, hi),
        uniform_field(rng, h, w, lo, hi),
        uniform_field(rng, h, w, lo, hi),
    )
    .unwrap()
}

/// `|a - b| / |b|` over all channels.
pub fn rel_diff(a: &Image, b: &Image) -> f64 {
    let num: f64 = a
        .channels()
        .iter()
        .zip(b.channels())
        .flat_map(|(x, y)| x.data().iter().zip(y.data()).map(|(p, q)| (p - q) * (p - q)))
        .sum();
    (num / b.norm_sq()).sqrt()
}

/// Central finite-difference gradient of `energy` at `x`.
pub fn central_difference(x: &Image, step: f64, energy: impl Fn(&Image) -> f64) -> Image {
    let mut out = x.filled_like(0.0);
    let mut probe = x.clone();
    for c in 0..x.num_channels() {
        for k in 0..x.num_pixels() {
            let base = x.channel(c).data()[k];
            probe.channel_mut(c).data_mut()[k] = base + step;
            let plus = energy(&probe);
            probe.channel_mut(c).data_mut()[k] = base - step;
            let minus = energy(&probe);
            probe.channel_mut(c).data_mut()[k] = base;
            out.channel_mut(c).data_mut()[k] = (plus - minus) / (2.0 * step);
        }
    }
    out
}
