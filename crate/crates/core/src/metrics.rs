//! Chromaticity metrics based on the geometric chromaticity mean (GCM).
//!
//! Dividing each RGB channel by the pixel's GCM, `cbrt(R G B)`, removes any
//! uniform brightness factor, so two images that differ only by a positive
//! per-pixel scale have zero chromaticity error.

use std::io::Write;

use crate::error::{FusionError, Result};
use crate::grid::ScalarField;
use crate::image::Image;
use crate::solvers::format_sig12;

pub const METRICS_HEADER: &str = "metric,channel,value";
pub const CHROMA_RMS_METRIC: &str = "chroma_error_rms";
const CHANNEL_NAMES: [&str; 3] = ["R", "G", "B"];

fn require_color(z: &Image, what: &'static str) -> Result<()> {
    if z.num_channels() != 3 {
        return Err(FusionError::NeedsColor { what, channels: z.num_channels() });
    }
    z.check_positive(what)
}

/// Pixelwise `cbrt(z_R z_G z_B)`.
pub fn gcm(z: &Image) -> Result<ScalarField> {
    require_color(z, "GCM")?;
    let (r, g, b) = (z.channel(0), z.channel(1), z.channel(2));
    Ok(ScalarField::from_fn(z.height(), z.width(), |i, j| (r[(i, j)] * g[(i, j)] * b[(i, j)]).cbrt()))
}

/// Three channels of nonnegative chromaticity errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChromaErrorMap(pub Image);

impl ChromaErrorMap {
    pub fn channel(&self, c: usize) -> &ScalarField {
        self.0.channel(c)
    }
}

/// `|u1_c / GCM(u1) - u2_c / GCM(u2)|` per channel and pixel.
pub fn chroma_error(u1: &Image, u2: &Image) -> Result<ChromaErrorMap> {
    require_color(u1, "chromaticity error")?;
    require_color(u2, "chromaticity error")?;
    u1.check_same_shape(u2, "chromaticity error")?;
    let (g1, g2) = (gcm(u1)?, gcm(u2)?);
    let channels = (0..3)
        .map(|c| {
            let (a, b) = (u1.channel(c), u2.channel(c));
            ScalarField::from_fn(a.height(), a.width(), |i, j| {
                (a[(i, j)] / g1[(i, j)] - b[(i, j)] / g2[(i, j)]).abs()
            })
        })
        .collect();
    Ok(ChromaErrorMap(Image::new(channels)?))
}

/// Root-mean-square over pixels of the error map, per channel and averaged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChromaNorm {
    pub per_channel: [f64; 3],
    pub mean: f64,
}

pub fn chroma_error_norm(u1: &Image, u2: &Image) -> Result<ChromaNorm> {
    let err = chroma_error(u1, u2)?;
    let n = u1.num_pixels() as f64;
    let mut per_channel = [0.0; 3];
    for (c, slot) in per_channel.iter_mut().enumerate() {
        *slot = (err.channel(c).norm_sq() / n).sqrt();
    }
    Ok(ChromaNorm { per_channel, mean: per_channel.iter().sum::<f64>() / 3.0 })
}

/// Writes `metric,channel,value` rows for a chromaticity comparison.
pub fn write_metrics_csv<W: Write>(norm: &ChromaNorm, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for (name, v) in CHANNEL_NAMES.iter().zip(norm.per_channel) {
        writeln!(out, "{CHROMA_RMS_METRIC},{name},{}", format_sig12(v))?;
    }
    writeln!(out, "{CHROMA_RMS_METRIC},mean,{}", format_sig12(norm.mean))
}
