//! Discrete differential operators on rectangular pixel grids.
//!
//! The gradient uses forward differences and is zero on the last column (x
//! component) and last row (y component). The divergence is its negative
//! adjoint, so `<grad u, p> + <u, div p> = 0` holds exactly in exact
//! arithmetic, and the Laplacian is the composition `div(grad(u))`.
//! With this closure the squared operator norm of the gradient is below 8.

use std::ops::{Index, IndexMut};

use crate::error::{FusionError, Result};

/// Single-channel 2-D field, row-major, unit grid spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self { height, width, data: vec![value; height * width] }
    }

    /// Builds a field from row-major data.
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(FusionError::GridTooSmall { height, width });
        }
        if data.len() != height * width {
            return Err(FusionError::DataLength { expected: height * width, got: data.len() });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(FusionError::NonFinite { what: "scalar field", row: k / width, col: k % width });
        }
        Ok(Self { height, width, data })
    }

    /// Builds a field by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                data.push(f(i, j));
            }
        }
        Self { height, width, data }
    }

    /// Builds a field from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == width), "ragged rows");
        Self::from_fn(height, width, |i, j| rows[i][j])
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn same_dims(&self, other: &ScalarField) -> bool {
        self.dims() == other.dims()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Applies `f` elementwise and returns a new field.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { height: self.height, width: self.width, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Combines two fields of equal dimensions elementwise.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(self.same_dims(other));
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        debug_assert!(self.same_dims(other));
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &ScalarField) {
        debug_assert!(self.same_dims(x));
        for (s, &xv) in self.data.iter_mut().zip(&x.data) {
            *s += a * xv;
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }
}

impl Index<(usize, usize)> for ScalarField {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.width + j]
    }
}

impl IndexMut<(usize, usize)> for ScalarField {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.width + j]
    }
}

/// Two-component field on the pixel grid. `x` runs along columns, `y` along rows.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self { x: ScalarField::zeros(height, width), y: ScalarField::zeros(height, width) }
    }

    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        if !x.same_dims(&y) {
            return Err(FusionError::ShapeMismatch {
                what: "vector field components",
                left: x.dims(),
                right: y.dims(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.x.dims()
    }

    pub fn dot(&self, other: &VectorField) -> f64 {
        self.x.dot(&other.x) + self.y.dot(&other.y)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// Pixelwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        self.x.zip_map(&self.y, f64::hypot)
    }

    /// Multiplies both components by a scalar field pixelwise.
    pub fn scale_by(&self, w: &ScalarField) -> VectorField {
        VectorField { x: self.x.zip_map(w, |a, b| a * b), y: self.y.zip_map(w, |a, b| a * b) }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Forward-difference gradient with zero closure on the far boundary.
pub fn grad(u: &ScalarField) -> VectorField {
    let (h, w) = u.dims();
    let mut out = VectorField::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            if j + 1 < w {
                out.x[(i, j)] = u[(i, j + 1)] - u[(i, j)];
            }
            if i + 1 < h {
                out.y[(i, j)] = u[(i + 1, j)] - u[(i, j)];
            }
        }
    }
    out
}

/// Backward-difference divergence, the negative adjoint of [`grad`].
pub fn div(p: &VectorField) -> ScalarField {
    let (h, w) = p.dims();
    let mut out = ScalarField::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            if j + 1 < w {
                acc += p.x[(i, j)];
            }
            if j > 0 {
                acc -= p.x[(i, j - 1)];
            }
            if i + 1 < h {
                acc += p.y[(i, j)];
            }
            if i > 0 {
                acc -= p.y[(i - 1, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Neumann Laplacian, `div(grad(u))`.
pub fn laplacian(u: &ScalarField) -> ScalarField {
    div(&grad(u))
}

const POWER_ITER_CAP: usize = 200_000;
const POWER_ITER_RTOL: f64 = 1e-14;

/// Power-iteration estimate of the squared operator norm of [`grad`] on an
/// `height x width` grid, i.e. the largest eigenvalue of `-laplacian`.
///
/// The Rayleigh quotient is reported, so the estimate approaches the true
/// value from below.
pub fn operator_norm_sq_estimate(height: usize, width: usize) -> Result<f64> {
    if height < 2 || width < 2 {
        return Err(FusionError::GridTooSmall { height, width });
    }
    // Deterministic start with a checkerboard bias, where the top mode lives.
    let mut x = ScalarField::from_fn(height, width, |i, j| {
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * (1.0 + 0.1 * ((i * 7 + j * 13) % 11) as f64)
    });
    let n = x.norm();
    x = x.scale(1.0 / n);

    let mut lambda = 0.0;
    for _ in 0..POWER_ITER_CAP {
        let ax = laplacian(&x).scale(-1.0);
        let next = x.dot(&ax);
        let norm = ax.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        x = ax.scale(1.0 / norm);
        if (next - lambda).abs() <= POWER_ITER_RTOL * next.abs() {
            return Ok(next);
        }
        lambda = next;
    }
    Err(FusionError::NotConverged {
        what: "operator norm power iteration",
        iterations: POWER_ITER_CAP,
        residual: lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_constant_is_zero() {
        let u = ScalarField::filled(5, 4, 3.5);
        let g = grad(&u);
        assert!(g.x.data().iter().chain(g.y.data()).all(|&v| v == 0.0));
    }

    #[test]
    fn unit_ramp_forward_difference() {
        let u = ScalarField::from_rows(&[&[0.0, 1.0], &[0.0, 1.0]]);
        let g = grad(&u);
        assert_eq!(g.x, ScalarField::from_rows(&[&[1.0, 0.0], &[1.0, 0.0]]));
        assert_eq!(g.y, ScalarField::zeros(2, 2));
    }

    #[test]
    fn divergence_of_zero_and_constant_gradient() {
        assert_eq!(div(&VectorField::zeros(3, 3)), ScalarField::zeros(3, 3));
        let u = ScalarField::filled(4, 6, -2.0);
        assert_eq!(div(&grad(&u)), ScalarField::zeros(4, 6));
    }

    #[test]
    fn laplacian_sums_to_zero() {
        let u = ScalarField::from_fn(7, 5, |i, j| ((i * 31 + j * 17) % 13) as f64 - 0.3 * j as f64);
        let s = laplacian(&u).sum();
        assert!(s.abs() < 1e-12, "sum = {s}");
    }

    #[test]
    fn rejects_small_or_bad_grids() {
        assert!(ScalarField::from_vec(1, 3, vec![0.0; 3]).is_err());
        assert!(ScalarField::from_vec(2, 2, vec![0.0; 3]).is_err());
        assert!(ScalarField::from_vec(2, 2, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(operator_norm_sq_estimate(1, 5).is_err());
    }

    #[test]
    fn norm_estimate_bounds() {
        let small = operator_norm_sq_estimate(2, 2).unwrap();
        assert!(small <= 8.0 + 1e-9);
        // 2x2 Neumann: eigenvalues of -lap are {0, 2, 2, 4}
        assert!((small - 4.0).abs() < 1e-9);
        let est = operator_norm_sq_estimate(32, 32).unwrap();
        assert!(est > 6.0 && est <= 8.0 + 1e-9, "{est}");
    }
}
