//! Energy terms of the joint osmosis fusion model and their derivatives.
//!
//! The model minimizes over a fused image `u` and a guide image `v`
//!
//! ```text
//! E(u, v) = O(u, v) + gamma * D(u) + eta * R(v)
//! O(u, v) = 1/2 sum v |grad(u / v)|^2 + mu/2 |v - f^alpha b^(1 - alpha)|^2
//! D(u)    = 1/2 sum alpha (u - f)^2
//! R(v)    = sum H_eps(|grad v|)
//! ```
//!
//! All terms are evaluated channel-wise with one shared alpha map and summed.
//! The derivatives of `O` are the exact derivatives of the discrete energy
//! above, so they agree with finite differences to rounding error.

use crate::error::Result;
use crate::grid::{div, grad, laplacian, ScalarField, VectorField};
use crate::image::{AlphaMap, Image, ModelWeights};

/// Pixelwise geometric interpolation `f^alpha * b^(1 - alpha)`, per channel.
pub fn reference_image(f: &Image, b: &Image, alpha: &AlphaMap) -> Result<Image> {
    f.check_same_shape(b, "reference image inputs")?;
    alpha.check_matches(f, "reference image alpha")?;
    f.check_positive("foreground")?;
    b.check_positive("background")?;
    let a = alpha.field();
    let channels = f
        .channels()
        .iter()
        .zip(b.channels())
        .map(|(fc, bc)| {
            ScalarField::from_fn(fc.height(), fc.width(), |i, j| {
                let t = a[(i, j)];
                fc[(i, j)].powf(t) * bc[(i, j)].powf(1.0 - t)
            })
        })
        .collect();
    Image::new(channels)
}

/// Drift `grad(log v)` of each channel.
pub fn drift(v: &Image) -> Result<Vec<VectorField>> {
    v.check_positive("drift guide")?;
    Ok(v.channels().iter().map(|c| grad(&c.map(f64::ln))).collect())
}

/// Per-channel pieces shared by the osmosis energy and its derivatives.
struct OsmosisParts {
    /// `grad(u / v)`
    ratio_grad: VectorField,
    /// `div(v * grad(u / v))`
    flux_div: ScalarField,
}

fn osmosis_parts(u: &ScalarField, v: &ScalarField) -> OsmosisParts {
    let ratio_grad = grad(&u.zip_map(v, |a, b| a / b));
    let flux_div = div(&ratio_grad.scale_by(v));
    OsmosisParts { ratio_grad, flux_div }
}

fn osmosis_channel_energy(u: &ScalarField, v: &ScalarField) -> f64 {
    let g = grad(&u.zip_map(v, |a, b| a / b));
    let mut acc = 0.0;
    for k in 0..v.len() {
        let gx = g.x.data()[k];
        let gy = g.y.data()[k];
        acc += v.data()[k] * (gx * gx + gy * gy);
    }
    0.5 * acc
}

/// Osmosis energy `O(u, v)` including the `mu`-weighted pull of `v` towards
/// `reference`. Always nonnegative.
pub fn energy_o(u: &Image, v: &Image, reference: &Image, mu: f64) -> Result<f64> {
    u.check_same_shape(v, "osmosis energy")?;
    v.check_same_shape(reference, "osmosis energy reference")?;
    Ok(energy_o_unchecked(u, v, reference, mu))
}

pub(crate) fn energy_o_unchecked(u: &Image, v: &Image, reference: &Image, mu: f64) -> f64 {
    let mut total = 0.0;
    for c in 0..u.num_channels() {
        total += osmosis_channel_energy(u.channel(c), v.channel(c));
        let dev: f64 =
            v.channel(c).data().iter().zip(reference.channel(c).data()).map(|(a, r)| (a - r) * (a - r)).sum();
        total += 0.5 * mu * dev;
    }
    total
}

/// Derivative of `O` with respect to `u`.
///
/// Computed as `-div(v * grad(u / v)) / v`, which is the flux form
/// `-(lap(u) - div(d u)) / v` with the face drift
/// `d_{i+1/2} = (v_{i+1} - v_i) / v_{i+1}` acting on `u_{i+1}`.
pub fn grad_u_o(u: &Image, v: &Image) -> Result<Image> {
    u.check_same_shape(v, "osmosis u-gradient")?;
    v.check_positive("guide v")?;
    Ok(grad_u_o_unchecked(u, v))
}

pub(crate) fn grad_u_o_unchecked(u: &Image, v: &Image) -> Image {
    let channels = u
        .channels()
        .iter()
        .zip(v.channels())
        .map(|(uc, vc)| {
            let parts = osmosis_parts(uc, vc);
            parts.flux_div.zip_map(vc, |d, vv| -d / vv)
        })
        .collect();
    Image::new(channels).expect("shape checked by caller")
}

/// The u-derivative written with the pixel drift `d = grad(log v)`:
/// `-(lap(u) - div(d u)) / v`. Consistent with [`grad_u_o`] as the grid is
/// refined, but not the exact derivative of the discrete energy; kept for
/// comparison.
pub fn grad_u_o_pixel_drift(u: &Image, v: &Image) -> Result<Image> {
    u.check_same_shape(v, "osmosis u-gradient")?;
    let drifts = drift(v)?;
    let channels = u
        .channels()
        .iter()
        .zip(v.channels())
        .zip(&drifts)
        .map(|((uc, vc), d)| {
            let transport = div(&d.scale_by(uc));
            let lap = laplacian(uc);
            ScalarField::from_fn(uc.height(), uc.width(), |i, j| {
                -(lap[(i, j)] - transport[(i, j)]) / vc[(i, j)]
            })
        })
        .collect();
    Image::new(channels)
}

/// Derivative of `O` with respect to `v`:
/// `1/2 |grad(u/v)|^2 + (u / v^2) div(v grad(u/v)) + mu (v - reference)`.
pub fn grad_v_o(u: &Image, v: &Image, reference: &Image, mu: f64) -> Result<Image> {
    u.check_same_shape(v, "osmosis v-gradient")?;
    v.check_same_shape(reference, "osmosis v-gradient reference")?;
    v.check_positive("guide v")?;
    Ok(grad_v_o_unchecked(u, v, reference, mu))
}

pub(crate) fn grad_v_o_unchecked(u: &Image, v: &Image, reference: &Image, mu: f64) -> Image {
    let channels = (0..u.num_channels())
        .map(|c| {
            let (uc, vc, rc) = (u.channel(c), v.channel(c), reference.channel(c));
            let parts = osmosis_parts(uc, vc);
            ScalarField::from_fn(uc.height(), uc.width(), |i, j| {
                let gx = parts.ratio_grad.x[(i, j)];
                let gy = parts.ratio_grad.y[(i, j)];
                let vv = vc[(i, j)];
                0.5 * (gx * gx + gy * gy)
                    + uc[(i, j)] / (vv * vv) * parts.flux_div[(i, j)]
                    + mu * (vv - rc[(i, j)])
            })
        })
        .collect();
    Image::new(channels).expect("shape checked by caller")
}

/// Alpha-weighted fidelity `1/2 sum alpha (u - f)^2`.
pub fn energy_d(u: &Image, f: &Image, alpha: &AlphaMap) -> Result<f64> {
    u.check_same_shape(f, "fidelity energy")?;
    alpha.check_matches(u, "fidelity alpha")?;
    Ok(energy_d_unchecked(u, f, alpha))
}

pub(crate) fn energy_d_unchecked(u: &Image, f: &Image, alpha: &AlphaMap) -> f64 {
    let a = alpha.field().data();
    let mut total = 0.0;
    for (uc, fc) in u.channels().iter().zip(f.channels()) {
        for ((&uu, &ff), &aa) in uc.data().iter().zip(fc.data()).zip(a) {
            total += aa * (uu - ff) * (uu - ff);
        }
    }
    0.5 * total
}

/// Proximal map of `zeta * gamma * D`:
/// `(gamma alpha f + u_diamond / zeta) / (gamma alpha + 1 / zeta)`.
pub fn prox_d(u_diamond: &Image, f: &Image, alpha: &AlphaMap, gamma: f64, zeta: f64) -> Result<Image> {
    u_diamond.check_same_shape(f, "fidelity prox")?;
    alpha.check_matches(f, "fidelity prox alpha")?;
    if !(gamma >= 0.0) {
        return Err(crate::error::FusionError::InvalidParameter {
            name: "gamma",
            reason: format!("must be >= 0, got {gamma}"),
        });
    }
    if !(zeta > 0.0) {
        return Err(crate::error::FusionError::InvalidParameter {
            name: "zeta",
            reason: format!("must be > 0, got {zeta}"),
        });
    }
    Ok(prox_d_unchecked(u_diamond, f, alpha, gamma, zeta))
}

pub(crate) fn prox_d_unchecked(
    u_diamond: &Image,
    f: &Image,
    alpha: &AlphaMap,
    gamma: f64,
    zeta: f64,
) -> Image {
    let a = alpha.field();
    let inv_zeta = 1.0 / zeta;
    let channels = u_diamond
        .channels()
        .iter()
        .zip(f.channels())
        .map(|(uc, fc)| {
            ScalarField::from_fn(uc.height(), uc.width(), |i, j| {
                let ga = gamma * a[(i, j)];
                (ga * fc[(i, j)] + inv_zeta * uc[(i, j)]) / (ga + inv_zeta)
            })
        })
        .collect();
    Image::new(channels).expect("shape checked by caller")
}

/// Huber function: `t^2 / (2 eps)` for `t <= eps`, `t - eps / 2` above.
#[inline]
pub fn huber(t: f64, eps: f64) -> f64 {
    if t <= eps {
        t * t / (2.0 * eps)
    } else {
        t - 0.5 * eps
    }
}

/// Sum of `H_eps(|grad v|)` over pixels for a single channel.
pub fn huber_tv(v: &ScalarField, eps: f64) -> f64 {
    let g = grad(v);
    g.x.data().iter().zip(g.y.data()).map(|(&gx, &gy)| huber(gx.hypot(gy), eps)).sum()
}

/// `eta * sum H_eps(|grad v|)`, summed over channels.
pub fn energy_r_huber(v: &Image, eta: f64, eps: f64) -> f64 {
    if eta == 0.0 {
        return 0.0;
    }
    eta * v.channels().iter().map(|c| huber_tv(c, eps)).sum::<f64>()
}

/// Decomposition of the joint energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    /// `O + gamma * D + eta * R`
    pub total: f64,
    pub osmosis: f64,
    /// Unweighted fidelity `D`.
    pub fidelity: f64,
    /// Unweighted regularizer `R`.
    pub regularizer: f64,
}

/// Joint energy and its terms for given inputs. Builds the reference image on
/// every call; use [`FusionProblem`] inside loops.
pub fn energy_total(
    u: &Image,
    v: &Image,
    f: &Image,
    b: &Image,
    alpha: &AlphaMap,
    weights: &ModelWeights,
) -> Result<EnergyParts> {
    let problem = FusionProblem::new(f.clone(), b.clone(), alpha.clone(), *weights)?;
    u.check_same_shape(f, "energy u")?;
    v.check_same_shape(f, "energy v")?;
    Ok(problem.energy(u, v))
}

/// Validated inputs of one fusion problem with the reference image cached.
#[derive(Debug, Clone)]
pub struct FusionProblem {
    pub foreground: Image,
    pub background: Image,
    pub alpha: AlphaMap,
    pub reference: Image,
    pub weights: ModelWeights,
}

impl FusionProblem {
    pub fn new(f: Image, b: Image, alpha: AlphaMap, weights: ModelWeights) -> Result<Self> {
        weights.validate()?;
        let reference = reference_image(&f, &b, &alpha)?;
        Ok(Self { foreground: f, background: b, alpha, reference, weights })
    }

    pub fn osmosis(&self, u: &Image, v: &Image) -> f64 {
        energy_o_unchecked(u, v, &self.reference, self.weights.mu)
    }

    pub fn grad_u(&self, u: &Image, v: &Image) -> Image {
        grad_u_o_unchecked(u, v)
    }

    pub fn grad_v(&self, u: &Image, v: &Image) -> Image {
        grad_v_o_unchecked(u, v, &self.reference, self.weights.mu)
    }

    pub fn energy(&self, u: &Image, v: &Image) -> EnergyParts {
        let w = &self.weights;
        let osmosis = self.osmosis(u, v);
        let fidelity = energy_d_unchecked(u, &self.foreground, &self.alpha);
        let regularizer =
            if w.eta == 0.0 { 0.0 } else { v.channels().iter().map(|c| huber_tv(c, w.eps)).sum() };
        EnergyParts {
            total: osmosis + w.gamma * fidelity + w.eta * regularizer,
            osmosis,
            fidelity,
            regularizer,
        }
    }
}
