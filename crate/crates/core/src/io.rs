//! Image file input/output and alpha-map preparation.

use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};

use crate::error::{FusionError, Result};
use crate::grid::ScalarField;
use crate::image::{AlphaMap, Image};

/// Raw channels from an 8- or 16-bit file, scaled to `[0, 255]`.
fn read_channels(path: &Path) -> Result<(Vec<ScalarField>, u32, u32)> {
    let img = image::ImageReader::open(path)
        .map_err(FusionError::Io)?
        .with_guessed_format()
        .map_err(FusionError::Io)?
        .decode()
        .map_err(|source| FusionError::ImageRead { path: path.to_path_buf(), source })?;
    let (w, h) = (img.width(), img.height());
    let to_fields = |raw: &[f64], channels: usize| -> Vec<ScalarField> {
        (0..channels)
            .map(|c| {
                ScalarField::from_fn(h as usize, w as usize, |i, j| raw[(i * w as usize + j) * channels + c])
            })
            .collect()
    };
    let scale16 = 255.0 / 65535.0;
    let fields = match &img {
        DynamicImage::ImageLuma8(b) => {
            to_fields(&b.as_raw().iter().map(|&v| v as f64).collect::<Vec<_>>(), 1)
        }
        DynamicImage::ImageRgb8(b) => to_fields(&b.as_raw().iter().map(|&v| v as f64).collect::<Vec<_>>(), 3),
        DynamicImage::ImageLuma16(b) => {
            to_fields(&b.as_raw().iter().map(|&v| v as f64 * scale16).collect::<Vec<_>>(), 1)
        }
        DynamicImage::ImageRgb16(b) => {
            to_fields(&b.as_raw().iter().map(|&v| v as f64 * scale16).collect::<Vec<_>>(), 3)
        }
        // transparency is dropped
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageRgba8(_) => {
            let rgb =
                if img.color().has_color() { img.to_rgb8().into_raw() } else { img.to_luma8().into_raw() };
            let c = if img.color().has_color() { 3 } else { 1 };
            to_fields(&rgb.iter().map(|&v| v as f64).collect::<Vec<_>>(), c)
        }
        DynamicImage::ImageLumaA16(_) | DynamicImage::ImageRgba16(_) => {
            let c = if img.color().has_color() { 3 } else { 1 };
            let raw = if c == 3 { img.to_rgb16().into_raw() } else { img.to_luma16().into_raw() };
            to_fields(&raw.iter().map(|&v| v as f64 * scale16).collect::<Vec<_>>(), c)
        }
        other => {
            return Err(FusionError::UnsupportedImage {
                path: path.to_path_buf(),
                detail: format!("pixel type {:?} is not 8- or 16-bit integer", other.color()),
            })
        }
    };
    if h < 2 || w < 2 {
        return Err(FusionError::GridTooSmall { height: h as usize, width: w as usize });
    }
    Ok((fields, w, h))
}

/// Loads a PNG/PPM/PGM image as intensities in `[0, 255]`, clamped below at
/// `offset`. Channel count (1 or 3) is preserved.
pub fn load_image(path: impl AsRef<Path>, offset: f64) -> Result<Image> {
    let (fields, _, _) = read_channels(path.as_ref())?;
    Ok(Image::new(fields)?.clamp_min(offset))
}

/// Loads an alpha map; color files are reduced to their first channel.
/// Intensities are scaled to `[0, 1]`.
pub fn load_alpha(path: impl AsRef<Path>) -> Result<AlphaMap> {
    let (mut fields, _, _) = read_channels(path.as_ref())?;
    let first = fields.swap_remove(0);
    AlphaMap::new(first.map(|v| (v / 255.0).clamp(0.0, 1.0)))
}

/// Rounds half up and clamps to `[0, 255]`.
pub fn quantize(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Writes an 8-bit PNG (gray or RGB).
pub fn save_png(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (h, w) = img.dims();
    let result = match img.num_channels() {
        1 => {
            let buf: Vec<u8> = img.channel(0).data().iter().map(|&v| quantize(v)).collect();
            GrayImage::from_raw(w as u32, h as u32, buf)
                .expect("buffer size matches")
                .save_with_format(path, image::ImageFormat::Png)
        }
        _ => {
            let mut buf = Vec::with_capacity(h * w * 3);
            for k in 0..h * w {
                for c in 0..3 {
                    buf.push(quantize(img.channel(c).data()[k]));
                }
            }
            RgbImage::from_raw(w as u32, h as u32, buf)
                .expect("buffer size matches")
                .save_with_format(path, image::ImageFormat::Png)
        }
    };
    result.map_err(|source| FusionError::ImageWrite { path: path.to_path_buf(), source })
}

/// Writes an alpha map as an 8-bit grayscale PNG.
pub fn save_alpha_png(alpha: &AlphaMap, path: impl AsRef<Path>) -> Result<()> {
    save_png(&Image::gray(alpha.field().scale(255.0)), path)
}

/// Mirror index into `0..n` with half-sample symmetric reflection.
fn reflect(mut k: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    k = k.rem_euclid(period);
    if k >= n {
        k = period - 1 - k;
    }
    k as usize
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let x = i as f64 - radius as f64;
            (-0.5 * x * x / (sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur with reflective boundaries.
pub fn gaussian_blur(field: &ScalarField, sigma: f64) -> ScalarField {
    if sigma == 0.0 {
        return field.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (h, w) = field.dims();
    let rows = ScalarField::from_fn(h, w, |i, j| {
        kernel
            .iter()
            .enumerate()
            .map(|(t, kv)| kv * field[(i, reflect(j as isize + t as isize - radius, w))])
            .sum()
    });
    ScalarField::from_fn(h, w, |i, j| {
        kernel
            .iter()
            .enumerate()
            .map(|(t, kv)| kv * rows[(reflect(i as isize + t as isize - radius, h), j)])
            .sum()
    })
}

/// Gaussian-blurred alpha map, clamped back to `[0, 1]`. `sigma = 0` is the identity.
pub fn blur_alpha(alpha: &AlphaMap, sigma: f64) -> Result<AlphaMap> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(FusionError::InvalidParameter {
            name: "alpha blur sigma",
            reason: format!("must be finite and >= 0, got {sigma}"),
        });
    }
    if sigma == 0.0 {
        return Ok(alpha.clone());
    }
    AlphaMap::new(gaussian_blur(alpha.field(), sigma).map(|v| v.clamp(0.0, 1.0)))
}
