//! Accelerated primal-dual solver for the Huberized-TV proximal step
//!
//! ```text
//! min_p  eta * H_eps(grad p) + 1/(2 zeta) |p - v_diamond|^2
//! ```
//!
//! written as the saddle-point problem
//! `min_p max_y <grad p, y> - (eta H_eps)^*(y) + 1/(2 zeta)|p - v_diamond|^2`
//! with `(eta H_eps)^*(y) = eps/(2 eta) |y|^2 + indicator(|y|_{2,inf} <= eta)`.
//! The primal part is `1/zeta`-strongly convex, which drives the step
//! acceleration `omega_t = (1 + 2 gamma_hat tau_t)^(-1/2)`.

use rayon::prelude::*;

use crate::error::{FusionError, Result};
use crate::grid::{div, grad, ScalarField, VectorField};
use crate::image::Image;
use crate::model::huber_tv;

/// Squared norm bound of the forward-difference gradient.
pub const GRAD_NORM_SQ_BOUND: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdConfig {
    /// Relative primal-dual gap at which the inner loop stops.
    pub inner_tol: f64,
    pub inner_maxiter: usize,
    /// Acceleration modulus. `None` uses the strong-convexity modulus `1/zeta`.
    pub gamma_hat: Option<f64>,
    pub tau0: f64,
    pub sigma0: f64,
}

impl Default for PdConfig {
    fn default() -> Self {
        let step = (1.0 / GRAD_NORM_SQ_BOUND).sqrt();
        Self { inner_tol: 1e-4, inner_maxiter: 10_000, gamma_hat: None, tau0: step, sigma0: step }
    }
}

impl PdConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(FusionError::InvalidParameter { name, reason });
        if !(self.inner_tol > 0.0) {
            return bad("inner_tol", format!("must be > 0, got {}", self.inner_tol));
        }
        if self.inner_maxiter == 0 {
            return bad("inner_maxiter", "must be >= 1".into());
        }
        if !(self.tau0 > 0.0 && self.sigma0 > 0.0) {
            return bad("tau0/sigma0", "initial steps must be > 0".into());
        }
        // small slack for the rounding in 1/sqrt(8) * 1/sqrt(8)
        if self.tau0 * self.sigma0 * GRAD_NORM_SQ_BOUND > 1.0 + 1e-12 {
            return bad(
                "tau0/sigma0",
                format!("tau0 * sigma0 * 8 = {} exceeds 1", self.tau0 * self.sigma0 * GRAD_NORM_SQ_BOUND),
            );
        }
        if let Some(g) = self.gamma_hat {
            if !(g > 0.0) {
                return bad("gamma_hat", format!("must be > 0, got {g}"));
            }
        }
        Ok(())
    }
}

/// Step-size schedule of the accelerated iteration. Each call to
/// [`StepSchedule::advance`] returns the relaxation `omega_t` and moves to
/// `tau_{t+1} = omega_t tau_t`, `sigma_{t+1} = sigma_t / omega_t`, so the
/// product `tau * sigma` never changes.
#[derive(Debug, Clone, Copy)]
pub struct StepSchedule {
    pub tau: f64,
    pub sigma: f64,
    gamma_hat: f64,
}

impl StepSchedule {
    pub fn new(tau0: f64, sigma0: f64, gamma_hat: f64) -> Self {
        Self { tau: tau0, sigma: sigma0, gamma_hat }
    }

    pub fn advance(&mut self) -> f64 {
        let omega = 1.0 / (1.0 + 2.0 * self.gamma_hat * self.tau).sqrt();
        self.tau *= omega;
        self.sigma /= omega;
        omega
    }
}

/// Proximal map of `sigma * (eta H_eps)^*`: shrink by `1 + sigma eps / eta`,
/// then project each pixel's 2-vector onto the ball of radius `eta`.
pub fn prox_huber_conjugate(y: &VectorField, sigma: f64, eta: f64, eps: f64) -> VectorField {
    let shrink = 1.0 / (1.0 + sigma * eps / eta);
    let mut out = y.clone();
    for (px, py) in out.x.data_mut().iter_mut().zip(out.y.data_mut().iter_mut()) {
        let (sx, sy) = (*px * shrink, *py * shrink);
        let scale = 1.0 / f64::max(1.0, sx.hypot(sy) / eta);
        *px = sx * scale;
        *py = sy * scale;
    }
    out
}

/// Proximal map of `tau * s` with `s(p) = 1/(2 zeta) |p - v_diamond|^2`.
pub fn prox_s(p: &ScalarField, v_diamond: &ScalarField, tau: f64, zeta: f64) -> ScalarField {
    let (wv, wp) = (1.0 / zeta, 1.0 / tau);
    let denom = wv + wp;
    p.zip_map(v_diamond, |pp, vd| (vd * wv + pp * wp) / denom)
}

/// Inner objective `eta H_eps(grad p) + 1/(2 zeta) |p - v_diamond|^2`.
pub fn huber_prox_objective(p: &ScalarField, v_diamond: &ScalarField, eta: f64, eps: f64, zeta: f64) -> f64 {
    let reg = if eta == 0.0 { 0.0 } else { eta * huber_tv(p, eps) };
    let fit: f64 = p.data().iter().zip(v_diamond.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    reg + fit / (2.0 * zeta)
}

fn dual_objective(y: &VectorField, v_diamond: &ScalarField, eta: f64, eps: f64, zeta: f64) -> f64 {
    let dy = div(y);
    -eps / (2.0 * eta) * y.norm_sq() - v_diamond.dot(&dy) - 0.5 * zeta * dy.norm_sq()
}

/// Result of one single-channel inner solve.
#[derive(Debug, Clone)]
pub struct PdOutcome {
    pub solution: ScalarField,
    pub iterations: usize,
    /// Final relative primal-dual gap.
    pub rel_gap: f64,
    pub converged: bool,
    /// Largest `tau_t * sigma_t * 8` seen along the schedule.
    pub max_step_product: f64,
}

/// Solves the Huberized-TV proximal problem for one channel.
pub fn prox_huber_tv_channel(
    v_diamond: &ScalarField,
    eta: f64,
    eps: f64,
    zeta: f64,
    cfg: &PdConfig,
) -> PdOutcome {
    if eta == 0.0 {
        return PdOutcome {
            solution: v_diamond.clone(),
            iterations: 0,
            rel_gap: 0.0,
            converged: true,
            max_step_product: 0.0,
        };
    }
    let (h, w) = v_diamond.dims();
    let gamma_hat = cfg.gamma_hat.unwrap_or(1.0 / zeta);
    let mut sched = StepSchedule::new(cfg.tau0, cfg.sigma0, gamma_hat);
    let mut max_step_product = sched.tau * sched.sigma * GRAD_NORM_SQ_BOUND;

    let mut p = v_diamond.clone();
    let mut p_bar = p.clone();
    let mut y = VectorField::zeros(h, w);
    let mut rel_gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for t in 0..cfg.inner_maxiter {
        let mut ascent = grad(&p_bar);
        ascent.x.data_mut().iter_mut().zip(y.x.data()).for_each(|(g, yv)| *g = yv + sched.sigma * *g);
        ascent.y.data_mut().iter_mut().zip(y.y.data()).for_each(|(g, yv)| *g = yv + sched.sigma * *g);
        y = prox_huber_conjugate(&ascent, sched.sigma, eta, eps);

        let mut descent = div(&y);
        descent.data_mut().iter_mut().zip(p.data()).for_each(|(d, pv)| *d = pv + sched.tau * *d);
        let p_next = prox_s(&descent, v_diamond, sched.tau, zeta);

        let omega = sched.advance();
        max_step_product = max_step_product.max(sched.tau * sched.sigma * GRAD_NORM_SQ_BOUND);
        p_bar = p_next.zip_map(&p, |a, b| a + omega * (a - b));
        p = p_next;
        iterations = t + 1;

        let primal = huber_prox_objective(&p, v_diamond, eta, eps, zeta);
        let dual = dual_objective(&y, v_diamond, eta, eps, zeta);
        let gap = (primal - dual).max(0.0);
        rel_gap = if primal.abs() > 0.0 { gap / primal.abs() } else { gap };
        if rel_gap <= cfg.inner_tol {
            converged = true;
            break;
        }
    }

    // The starting point is feasible; never return something worse.
    let start = huber_prox_objective(v_diamond, v_diamond, eta, eps, zeta);
    let end = huber_prox_objective(&p, v_diamond, eta, eps, zeta);
    let solution = if end <= start { p } else { v_diamond.clone() };

    PdOutcome { solution, iterations, rel_gap, converged, max_step_product }
}

/// Aggregate statistics of a multi-channel inner solve.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PdReport {
    /// Inner iterations summed over channels.
    pub iterations: usize,
    pub max_rel_gap: f64,
    /// Number of channels that stopped on the iteration cap.
    pub capped_channels: usize,
}

/// Approximate `prox_{zeta eta H_eps}(v_diamond)`, channels solved
/// independently (and concurrently).
pub fn prox_huber_tv(
    v_diamond: &Image,
    eta: f64,
    eps: f64,
    zeta: f64,
    cfg: &PdConfig,
) -> Result<(Image, PdReport)> {
    cfg.validate()?;
    if !(zeta > 0.0) {
        return Err(FusionError::InvalidParameter {
            name: "zeta",
            reason: format!("must be > 0, got {zeta}"),
        });
    }
    if !(eta >= 0.0) || !(eps >= 0.0) {
        return Err(FusionError::InvalidParameter { name: "eta/eps", reason: "must be >= 0".into() });
    }
    if !v_diamond.is_finite() {
        return Err(FusionError::NonFinite { what: "prox input", row: 0, col: 0 });
    }
    let outcomes: Vec<PdOutcome> =
        v_diamond.channels().par_iter().map(|c| prox_huber_tv_channel(c, eta, eps, zeta, cfg)).collect();
    let mut report = PdReport::default();
    let mut channels = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        report.iterations += o.iterations;
        report.max_rel_gap = report.max_rel_gap.max(o.rel_gap);
        if !o.converged {
            report.capped_channels += 1;
        }
        channels.push(o.solution);
    }
    if report.capped_channels > 0 {
        log::warn!(
            "primal-dual hit the iteration cap on {} channel(s), gap {:e}",
            report.capped_channels,
            report.max_rel_gap
        );
    }
    Ok((Image::new(channels)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(h: usize, w: usize) -> ScalarField {
        ScalarField::from_fn(h, w, |i, j| ((i * 5 + j * 3) % 7) as f64 * 0.3 + 1.0)
    }

    #[test]
    fn conjugate_prox_zero_and_inside_ball() {
        let z = VectorField::zeros(3, 3);
        assert_eq!(prox_huber_conjugate(&z, 0.5, 1.0, 0.05), z);

        let mut y = VectorField::zeros(2, 2);
        y.x[(0, 0)] = 0.3;
        y.y[(0, 0)] = -0.4;
        let (sigma, eta, eps) = (2.0, 1.0, 0.05);
        let out = prox_huber_conjugate(&y, sigma, eta, eps);
        let s = 1.0 + sigma * eps / eta;
        assert!((out.x[(0, 0)] - 0.3 / s).abs() < 1e-15);
        assert!((out.y[(0, 0)] + 0.4 / s).abs() < 1e-15);
    }

    #[test]
    fn conjugate_prox_saturates_at_eta() {
        let mut y = VectorField::zeros(2, 2);
        y.x[(1, 1)] = 3e6;
        y.y[(1, 1)] = 4e6;
        let out = prox_huber_conjugate(&y, 0.1, 0.7, 0.05);
        let n = out.x[(1, 1)].hypot(out.y[(1, 1)]);
        assert!((n - 0.7).abs() < 1e-12);
        assert!((out.x[(1, 1)] / out.y[(1, 1)] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn prox_s_cases() {
        let v = field(3, 4);
        let same = prox_s(&v, &v, 0.7, 0.2);
        for (a, b) in same.data().iter().zip(v.data()) {
            assert!((a - b).abs() < 1e-14);
        }
        let p = v.map(|x| x + 2.0);
        let lim = prox_s(&p, &v, 1e300, 0.5);
        for (a, b) in lim.data().iter().zip(v.data()) {
            assert!((a - b).abs() < 1e-12);
        }
        let mid = prox_s(&p, &v, 0.3, 0.3);
        for (a, b) in mid.data().iter().zip(v.data()) {
            assert!((a - (b + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_preserves_step_product() {
        let mut s = StepSchedule::new(0.3, 1.0 / (8.0 * 0.3), 17.0);
        for _ in 0..1000 {
            let omega = s.advance();
            assert!(omega > 0.0 && omega < 1.0);
            assert!(s.tau * s.sigma * 8.0 <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn zero_weight_and_constant_inputs_are_fixed_points() {
        let cfg = PdConfig::default();
        let v = field(6, 6);
        let out = prox_huber_tv_channel(&v, 0.0, 0.05, 1.0, &cfg);
        assert_eq!(out.solution, v);
        let c = ScalarField::filled(5, 5, 3.0);
        let out = prox_huber_tv_channel(&c, 1.0, 0.05, 1.0, &cfg);
        assert_eq!(out.solution, c);
        assert!(out.converged);
    }

    #[test]
    fn never_worse_than_input() {
        let cfg = PdConfig::default();
        let v = field(8, 8);
        for &(eta, zeta) in &[(0.1, 0.01), (1.0, 1.0), (5.0, 0.2)] {
            let out = prox_huber_tv_channel(&v, eta, 0.05, zeta, &cfg);
            let a = huber_prox_objective(&out.solution, &v, eta, 0.05, zeta);
            let b = huber_prox_objective(&v, &v, eta, 0.05, zeta);
            assert!(a <= b, "{a} > {b}");
            assert!(out.max_step_product <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = PdConfig { tau0: 1.0, sigma0: 1.0, ..PdConfig::default() };
        assert!(cfg.validate().is_err());
        let img = Image::gray(field(3, 3));
        assert!(prox_huber_tv(&img, 1.0, 0.05, 1.0, &cfg).is_err());
    }
}
