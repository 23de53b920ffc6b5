//! Poisson editing: `lap(u) = lap(f)` on the mask, `u = b` elsewhere.

use crate::baselines::krylov::{conjugate_gradient, SolverConfig};
use crate::error::{FusionError, Result};
use crate::grid::{laplacian, ScalarField};
use crate::image::Image;

/// Binary region selector, 1 inside the region to clone.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask(ScalarField);

impl Mask {
    pub fn new(field: ScalarField) -> Result<Self> {
        let w = field.width();
        if let Some(k) = field.data().iter().position(|&m| m != 0.0 && m != 1.0) {
            return Err(FusionError::MaskValue { row: k / w, col: k % w, value: field.data()[k] });
        }
        Ok(Self(field))
    }

    /// `1` wherever `field > threshold`.
    pub fn threshold(field: &ScalarField, threshold: f64) -> Self {
        Self(field.map(|v| if v > threshold { 1.0 } else { 0.0 }))
    }

    pub fn field(&self) -> &ScalarField {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.0[(i, j)] == 1.0
    }

    pub fn count(&self) -> usize {
        self.0.data().iter().filter(|&&m| m == 1.0).count()
    }
}

/// Output of [`poisson_edit`].
#[derive(Debug, Clone)]
pub struct PoissonResult {
    pub image: Image,
    /// Per channel, `|lap(u) - lap(f)|_2` over the mask pixels.
    pub residuals: Vec<f64>,
}

pub const POISSON_DEFAULT: SolverConfig = SolverConfig { tol: 1e-12, maxiter: 20_000 };

/// Clones the gradient content of `f` into `b` on the mask.
pub fn poisson_edit(f: &Image, b: &Image, mask: &Mask, cfg: &SolverConfig) -> Result<PoissonResult> {
    f.check_same_shape(b, "poisson editing")?;
    if mask.dims() != f.dims() {
        return Err(FusionError::ShapeMismatch { what: "poisson mask", left: mask.dims(), right: f.dims() });
    }
    let (h, w) = f.dims();
    let inside: Vec<usize> = (0..h * w).filter(|&k| mask.field().data()[k] == 1.0).collect();
    if inside.is_empty() {
        return Ok(PoissonResult { image: b.clone(), residuals: vec![0.0; b.num_channels()] });
    }

    let embed = |x: &[f64], outside: &ScalarField| {
        let mut full = outside.clone();
        for (&k, &xv) in inside.iter().zip(x) {
            full.data_mut()[k] = xv;
        }
        full
    };
    let zero = ScalarField::zeros(h, w);
    // -lap restricted to the mask, with zero data outside
    let apply = |x: &[f64]| -> Vec<f64> {
        let lap = laplacian(&embed(x, &zero));
        inside.iter().map(|&k| -lap.data()[k]).collect()
    };

    let mut channels = Vec::with_capacity(f.num_channels());
    let mut residuals = Vec::with_capacity(f.num_channels());
    for (fc, bc) in f.channels().iter().zip(b.channels()) {
        let lap_f = laplacian(fc);
        let mut outside = bc.clone();
        for &k in &inside {
            outside.data_mut()[k] = 0.0;
        }
        let lap_out = laplacian(&outside);
        let rhs: Vec<f64> = inside.iter().map(|&k| -lap_f.data()[k] + lap_out.data()[k]).collect();
        let mut x: Vec<f64> = inside.iter().map(|&k| fc.data()[k]).collect();
        conjugate_gradient(apply, &rhs, &mut x, cfg)?;
        let u = embed(&x, bc);
        let lap_u = laplacian(&u);
        let res = inside.iter().map(|&k| (lap_u.data()[k] - lap_f.data()[k]).powi(2)).sum::<f64>().sqrt();
        channels.push(u);
        residuals.push(res);
    }
    Ok(PoissonResult { image: Image::new(channels)?, residuals })
}
