//! Multi-channel images, alpha maps and model weights.

use crate::error::{FusionError, Result};
use crate::grid::ScalarField;

/// A 1- or 3-channel image of real intensities. Also used for image-shaped
/// quantities such as gradients of the energy, which may be negative;
/// operations that need positivity check it explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    channels: Vec<ScalarField>,
}

impl Image {
    pub fn new(channels: Vec<ScalarField>) -> Result<Self> {
        let n = channels.len();
        if n != 1 && n != 3 {
            return Err(FusionError::ChannelCount(n));
        }
        let dims = channels[0].dims();
        if let Some(bad) = channels.iter().find(|c| c.dims() != dims) {
            return Err(FusionError::ShapeMismatch { what: "image channels", left: dims, right: bad.dims() });
        }
        Ok(Self { channels })
    }

    pub fn gray(field: ScalarField) -> Self {
        Self { channels: vec![field] }
    }

    pub fn rgb(r: ScalarField, g: ScalarField, b: ScalarField) -> Result<Self> {
        Self::new(vec![r, g, b])
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(vec![ScalarField::filled(height, width, value); channels])
    }

    /// Same shape and channel count as `self`, every entry `value`.
    pub fn filled_like(&self, value: f64) -> Self {
        let (h, w) = self.dims();
        Self { channels: vec![ScalarField::filled(h, w, value); self.num_channels()] }
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.channels[0].dims()
    }

    pub fn height(&self) -> usize {
        self.dims().0
    }

    pub fn width(&self) -> usize {
        self.dims().1
    }

    pub fn num_pixels(&self) -> usize {
        let (h, w) = self.dims();
        h * w
    }

    pub fn channel(&self, c: usize) -> &ScalarField {
        &self.channels[c]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut ScalarField {
        &mut self.channels[c]
    }

    pub fn channels(&self) -> &[ScalarField] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<ScalarField> {
        self.channels
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { channels: self.channels.iter().map(|c| c.map(&f)).collect() }
    }

    /// Applies `f` to each channel.
    pub fn map_channels(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self { channels: self.channels.iter().map(f).collect() }
    }

    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Self {
        Self { channels: self.channels.iter().zip(&other.channels).map(|(a, b)| a.zip_map(b, &f)).collect() }
    }

    pub fn dot(&self, other: &Image) -> f64 {
        self.channels.iter().zip(&other.channels).map(|(a, b)| a.dot(b)).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Image) {
        for (s, xc) in self.channels.iter_mut().zip(&x.channels) {
            s.axpy(a, xc);
        }
    }

    pub fn min(&self) -> f64 {
        self.channels.iter().map(|c| c.min()).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.channels.iter().map(|c| c.max()).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.channels.iter().all(|c| c.is_finite())
    }

    pub fn clamp_min(&self, floor: f64) -> Self {
        self.map(|v| v.max(floor))
    }

    pub fn clamp(&self, lo: f64, hi: f64) -> Self {
        self.map(|v| v.clamp(lo, hi))
    }

    /// Errors on the first entry that is not strictly positive (or not finite).
    pub fn check_positive(&self, what: &'static str) -> Result<()> {
        for (c, ch) in self.channels.iter().enumerate() {
            let w = ch.width();
            if let Some(k) = ch.data().iter().position(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(FusionError::NonPositive {
                    what,
                    channel: c,
                    row: k / w,
                    col: k % w,
                    value: ch.data()[k],
                });
            }
        }
        Ok(())
    }

    /// Errors unless `other` has the same channel count and dimensions.
    pub fn check_same_shape(&self, other: &Image, what: &'static str) -> Result<()> {
        if self.num_channels() != other.num_channels() {
            return Err(FusionError::ChannelMismatch {
                what,
                left: self.num_channels(),
                right: other.num_channels(),
            });
        }
        if self.dims() != other.dims() {
            return Err(FusionError::ShapeMismatch { what, left: self.dims(), right: other.dims() });
        }
        Ok(())
    }
}

/// Pixelwise blend weights in `[0, 1]`: 1 selects the foreground, 0 the
/// background, values in between mark the mixing zone.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMap(ScalarField);

impl AlphaMap {
    pub fn new(field: ScalarField) -> Result<Self> {
        let w = field.width();
        if let Some(k) = field.data().iter().position(|&a| !(0.0..=1.0).contains(&a)) {
            return Err(FusionError::AlphaRange { row: k / w, col: k % w, value: field.data()[k] });
        }
        Ok(Self(field))
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(ScalarField::filled(height, width, value))
    }

    pub fn field(&self) -> &ScalarField {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn check_matches(&self, img: &Image, what: &'static str) -> Result<()> {
        if self.dims() != img.dims() {
            return Err(FusionError::ShapeMismatch { what, left: self.dims(), right: img.dims() });
        }
        Ok(())
    }
}

/// Weights of the joint energy `O + gamma * D + eta * R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelWeights {
    /// Weight of the Huberized TV regularizer on `v`.
    pub eta: f64,
    /// Weight pulling `v` towards the reference image.
    pub mu: f64,
    /// Weight of the alpha-masked fidelity of `u` to the foreground.
    pub gamma: f64,
    /// Huber smoothing threshold.
    pub eps: f64,
    /// Positivity floor applied at ingestion and after each accepted step.
    pub offset: f64,
}

impl Default for ModelWeights {
    fn default() -> Self {
        Self { eta: 0.1, mu: 100.0, gamma: 1.0, eps: 0.05, offset: 1.0 }
    }
}

impl ModelWeights {
    pub fn validate(&self) -> Result<()> {
        let bad =
            |name, reason: &str| Err(FusionError::InvalidParameter { name, reason: reason.to_string() });
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad("eta", "must be finite and >= 0");
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad("mu", "must be finite and > 0");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma", "must be finite and >= 0");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps", "must lie in (0, 1)");
        }
        if !(self.offset > 0.0 && self.offset.is_finite()) {
            return bad("offset", "must be finite and > 0");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_count_and_shape_checked() {
        let a = ScalarField::zeros(3, 3);
        assert!(Image::new(vec![a.clone(), a.clone()]).is_err());
        assert!(Image::new(vec![a.clone(), a.clone(), ScalarField::zeros(3, 4)]).is_err());
        assert!(Image::new(vec![a.clone(), a.clone(), a]).is_ok());
    }

    #[test]
    fn positivity_error_names_pixel() {
        let mut f = ScalarField::filled(3, 4, 2.0);
        f[(2, 1)] = 0.0;
        let err = Image::gray(f).check_positive("f").unwrap_err();
        match err {
            FusionError::NonPositive { row, col, .. } => assert_eq!((row, col), (2, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alpha_range_enforced() {
        assert!(AlphaMap::constant(2, 2, 1.0).is_ok());
        assert!(AlphaMap::constant(2, 2, 1.5).is_err());
        assert!(AlphaMap::constant(2, 2, -0.1).is_err());
    }

    #[test]
    fn default_weights_valid() {
        let w = ModelWeights::default();
        assert_eq!((w.eta, w.mu, w.gamma, w.eps, w.offset), (0.1, 100.0, 1.0, 0.05, 1.0));
        w.validate().unwrap();
        assert!(ModelWeights { mu: 0.0, ..w }.validate().is_err());
        assert!(ModelWeights { eps: 1.0, ..w }.validate().is_err());
    }
}
