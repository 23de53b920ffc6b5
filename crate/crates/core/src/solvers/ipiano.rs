//! Block-coordinate inertial proximal scheme for the joint model.
//!
//! Each outer iteration takes an explicit inertial step on the smooth osmosis
//! term in `u` and in `v`, applies the proximal maps of `gamma D` and of the
//! Huberized `eta R`, and accepts the pair only when both blocks satisfy the
//! descent-lemma test for the current Lipschitz estimates. A failed block
//! multiplies its estimate by `lambda` and recomputes its step.

use std::str::FromStr;

use crate::error::{FusionError, Result};
use crate::image::{AlphaMap, Image, ModelWeights};
use crate::model::{prox_d_unchecked, FusionProblem};
use crate::solvers::primal_dual::{prox_huber_tv, PdConfig, PdReport};
use crate::solvers::trace::{relative_change, EnergyTrace, TraceRow};

/// Starting image for `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitChoice {
    /// `u0 = f`
    #[default]
    Foreground,
    /// `u0 = alpha f + (1 - alpha) b`
    Convex,
    /// `u0 = (f + b) / 2`
    Average,
}

impl FromStr for InitChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "f" | "foreground" => Ok(Self::Foreground),
            "convex" => Ok(Self::Convex),
            "average" => Ok(Self::Average),
            other => Err(format!("unknown init '{other}' (expected f, convex or average)")),
        }
    }
}

impl InitChoice {
    pub fn initial_image(&self, f: &Image, b: &Image, alpha: &AlphaMap) -> Image {
        match self {
            Self::Foreground => f.clone(),
            Self::Average => f.zip_map(b, |x, y| 0.5 * (x + y)),
            Self::Convex => {
                let a = alpha.field();
                let channels = f
                    .channels()
                    .iter()
                    .zip(b.channels())
                    .map(|(fc, bc)| {
                        crate::grid::ScalarField::from_fn(fc.height(), fc.width(), |i, j| {
                            let t = a[(i, j)];
                            t * fc[(i, j)] + (1.0 - t) * bc[(i, j)]
                        })
                    })
                    .collect();
                Image::new(channels).expect("same shape as f")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IPianoConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub l1_init: f64,
    pub l2_init: f64,
    /// Backtracking growth factor.
    pub lambda: f64,
    /// Relative-energy stopping threshold.
    pub tol: f64,
    pub maxiter: usize,
    /// Backtracking attempts allowed per block and outer iteration.
    pub max_backtracks: usize,
    /// Outer iterations performed before the stopping test may fire.
    pub min_iters: usize,
}

impl Default for IPianoConfig {
    fn default() -> Self {
        Self {
            beta1: 0.4,
            beta2: 0.4,
            l1_init: 1.0,
            l2_init: 1.0,
            lambda: 2.0,
            tol: 1e-6,
            maxiter: 10_000,
            max_backtracks: 100,
            min_iters: 2,
        }
    }
}

impl IPianoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(FusionError::InvalidParameter { name, reason });
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..0.5).contains(&beta) {
                return bad(name, format!("must lie in [0, 0.5), got {beta}"));
            }
        }
        for (name, l) in [("l1_init", self.l1_init), ("l2_init", self.l2_init)] {
            if !(l > 0.0 && l.is_finite()) {
                return bad(name, format!("must be finite and > 0, got {l}"));
            }
        }
        if !(self.lambda > 1.0) {
            return bad("lambda", format!("must be > 1, got {}", self.lambda));
        }
        if !(self.tol > 0.0) {
            return bad("tol", format!("must be > 0, got {}", self.tol));
        }
        if self.maxiter == 0 {
            return bad("maxiter", "must be >= 1".into());
        }
        if self.max_backtracks == 0 {
            return bad("max_backtracks", "must be >= 1".into());
        }
        Ok(())
    }

    /// Step for a Lipschitz estimate: `0.99 (1 - 2 beta) / L`.
    pub fn step(beta: f64, lipschitz: f64) -> f64 {
        0.99 * (1.0 - 2.0 * beta) / lipschitz
    }

    /// Upper bound `2 (1 - beta) / L` every accepted step must respect.
    pub fn step_bound(beta: f64, lipschitz: f64) -> f64 {
        2.0 * (1.0 - beta) / lipschitz
    }
}

/// Iterates and step parameters of the outer scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct IPianoState {
    pub u_curr: Image,
    pub u_prev: Image,
    pub v_curr: Image,
    pub v_prev: Image,
    pub l1: f64,
    pub l2: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    /// Accepted outer iterations so far.
    pub iter: usize,
}

/// Output of [`ipiano_fuse`].
#[derive(Debug, Clone)]
pub struct FusionResult {
    /// Fused image.
    pub u: Image,
    /// Estimated guide image.
    pub v: Image,
    pub trace: EnergyTrace,
}

/// Descent-lemma residual `O(p) - O(x) - <grad, p - x> - L/2 |p - x|^2`.
fn descent_gap(o_new: f64, o_old: f64, grad: &Image, step: &Image, lipschitz: f64) -> f64 {
    o_new - o_old - grad.dot(step) - 0.5 * lipschitz * step.norm_sq()
}

/// Explicit inertial step `x - zeta * grad + beta * (x - x_prev)`.
fn inertial_step(x: &Image, x_prev: &Image, grad: &Image, zeta: f64, beta: f64) -> Image {
    let mut out = x.clone();
    out.axpy(-zeta, grad);
    out.axpy(beta, x);
    out.axpy(-beta, x_prev);
    out
}

/// Minimizes the joint fusion energy starting from `init` for `u` and the
/// reference image for `v`.
#[allow(clippy::too_many_arguments)]
pub fn ipiano_fuse(
    f: &Image,
    b: &Image,
    alpha: &AlphaMap,
    weights: &ModelWeights,
    cfg: &IPianoConfig,
    pd: &PdConfig,
    init: InitChoice,
) -> Result<FusionResult> {
    cfg.validate()?;
    pd.validate()?;
    f.check_same_shape(b, "foreground/background")?;
    alpha.check_matches(f, "alpha map")?;
    let problem = FusionProblem::new(f.clone(), b.clone(), alpha.clone(), *weights)?;
    let floor = weights.offset;

    let u0 = init.initial_image(f, b, alpha).clamp_min(floor);
    let v0 = problem.reference.clamp_min(floor);
    let mut state = IPianoState {
        u_prev: u0.clone(),
        u_curr: u0,
        v_prev: v0.clone(),
        v_curr: v0,
        l1: cfg.l1_init,
        l2: cfg.l2_init,
        zeta1: IPianoConfig::step(cfg.beta1, cfg.l1_init),
        zeta2: IPianoConfig::step(cfg.beta2, cfg.l2_init),
        iter: 0,
    };

    let mut energy = problem.energy(&state.u_curr, &state.v_curr);
    if !energy.total.is_finite() {
        return Err(FusionError::Divergence { what: "initial energy", iteration: 0 });
    }
    let mut trace = EnergyTrace::new(energy);

    for k in 0..cfg.maxiter {
        let (u, v) = (&state.u_curr, &state.v_curr);
        let o_curr = problem.osmosis(u, v);
        let grad_u = problem.grad_u(u, v);
        let grad_v = problem.grad_v(u, v);
        if !grad_u.is_finite() || !grad_v.is_finite() {
            return Err(FusionError::Divergence { what: "osmosis gradient", iteration: k });
        }

        // u block
        let mut attempts = 0;
        let (p1, gap_u) = loop {
            let u_diamond = inertial_step(u, &state.u_prev, &grad_u, state.zeta1, cfg.beta1);
            let p1 =
                prox_d_unchecked(&u_diamond, &problem.foreground, &problem.alpha, weights.gamma, state.zeta1);
            if !p1.is_finite() {
                return Err(FusionError::Divergence { what: "u iterate", iteration: k });
            }
            let step = p1.zip_map(u, |a, b| a - b);
            let gap = descent_gap(problem.osmosis(&p1, v), o_curr, &grad_u, &step, state.l1);
            if gap < 0.0 || step.norm_sq() == 0.0 {
                break (p1, gap);
            }
            attempts += 1;
            if attempts >= cfg.max_backtracks {
                return Err(backtrack_failure(k, attempts, state.clone()));
            }
            state.l1 *= cfg.lambda;
            state.zeta1 = IPianoConfig::step(cfg.beta1, state.l1);
        };

        // v block
        let mut attempts = 0;
        let (p2, gap_v, pd_report) = loop {
            let v_diamond = inertial_step(v, &state.v_prev, &grad_v, state.zeta2, cfg.beta2);
            if !v_diamond.is_finite() {
                return Err(FusionError::Divergence { what: "v explicit step", iteration: k });
            }
            let (p2, report): (Image, PdReport) =
                prox_huber_tv(&v_diamond, weights.eta, weights.eps, state.zeta2, pd)?;
            if !p2.is_finite() {
                return Err(FusionError::Divergence { what: "v iterate", iteration: k });
            }
            let step = p2.zip_map(v, |a, b| a - b);
            // divisions by v in O need a positive candidate
            let gap = if p2.min() > 0.0 {
                descent_gap(problem.osmosis(u, &p2), o_curr, &grad_v, &step, state.l2)
            } else {
                f64::INFINITY
            };
            if gap < 0.0 || step.norm_sq() == 0.0 {
                break (p2, gap, report);
            }
            attempts += 1;
            if attempts >= cfg.max_backtracks {
                return Err(backtrack_failure(k, attempts, state.clone()));
            }
            state.l2 *= cfg.lambda;
            state.zeta2 = IPianoConfig::step(cfg.beta2, state.l2);
        };

        let u_next = p1.clamp_min(floor);
        let v_next = p2.clamp_min(floor);
        state.u_prev = std::mem::replace(&mut state.u_curr, u_next);
        state.v_prev = std::mem::replace(&mut state.v_curr, v_next);
        state.iter = k + 1;

        let next = problem.energy(&state.u_curr, &state.v_curr);
        if !next.total.is_finite() {
            return Err(FusionError::Divergence { what: "energy", iteration: k + 1 });
        }
        trace.rows.push(TraceRow {
            iter: k + 1,
            energy: next,
            zeta1: state.zeta1,
            zeta2: state.zeta2,
            l1: state.l1,
            l2: state.l2,
            gap_u,
            gap_v,
            inner_iters: pd_report.iterations,
            inner_capped: pd_report.capped_channels > 0,
        });
        log::debug!(
            "iter {} E={:.6e} L1={:e} L2={:e} inner={}",
            k + 1,
            next.total,
            state.l1,
            state.l2,
            pd_report.iterations
        );

        let change = relative_change(energy.total, next.total);
        energy = next;
        if k + 1 >= cfg.min_iters && change < cfg.tol {
            trace.converged = true;
            break;
        }
    }

    Ok(FusionResult { u: state.u_curr, v: state.v_curr, trace })
}

fn backtrack_failure(iteration: usize, attempts: usize, state: IPianoState) -> FusionError {
    FusionError::BacktrackingExhausted {
        iteration,
        attempts,
        l1: state.l1,
        l2: state.l2,
        state: Box::new(state),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScalarField;

    #[test]
    fn init_choices() {
        let f = Image::filled(1, 2, 2, 10.0).unwrap();
        let b = Image::filled(1, 2, 2, 20.0).unwrap();
        let a = AlphaMap::constant(2, 2, 0.25).unwrap();
        assert_eq!(InitChoice::Foreground.initial_image(&f, &b, &a), f);
        assert_eq!(InitChoice::Average.initial_image(&f, &b, &a), Image::filled(1, 2, 2, 15.0).unwrap());
        assert_eq!(InitChoice::Convex.initial_image(&f, &b, &a), Image::filled(1, 2, 2, 17.5).unwrap());
        assert_eq!("convex".parse::<InitChoice>(), Ok(InitChoice::Convex));
        assert!("x".parse::<InitChoice>().is_err());
    }

    #[test]
    fn config_validation() {
        let c = IPianoConfig::default();
        c.validate().unwrap();
        assert!(IPianoConfig { beta1: 0.5, ..c }.validate().is_err());
        assert!(IPianoConfig { lambda: 1.0, ..c }.validate().is_err());
        assert!(IPianoConfig { tol: 0.0, ..c }.validate().is_err());
        let z = IPianoConfig::step(0.4, 1.0);
        assert!((z - 0.198).abs() < 1e-15);
        assert!(z < IPianoConfig::step_bound(0.4, 1.0));
    }

    #[test]
    fn constant_inputs_are_a_fixed_point() {
        let f = Image::filled(3, 6, 6, 80.0).unwrap();
        let a = AlphaMap::new(ScalarField::from_fn(6, 6, |_, j| j as f64 / 5.0)).unwrap();
        for init in [InitChoice::Foreground, InitChoice::Convex, InitChoice::Average] {
            let r = ipiano_fuse(
                &f,
                &f,
                &a,
                &ModelWeights::default(),
                &IPianoConfig::default(),
                &PdConfig::default(),
                init,
            )
            .unwrap();
            assert!(r.trace.converged);
            assert!(r.trace.rows.len() <= 5);
            assert!(r.trace.last_energy().total < 1e-20);
            for (x, y) in r.u.channel(0).data().iter().zip(f.channel(0).data()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let f = Image::filled(1, 4, 4, 5.0).unwrap();
        let b = Image::filled(1, 4, 5, 5.0).unwrap();
        let a = AlphaMap::constant(4, 4, 0.5).unwrap();
        let err = ipiano_fuse(
            &f,
            &b,
            &a,
            &ModelWeights::default(),
            &IPianoConfig::default(),
            &PdConfig::default(),
            InitChoice::Foreground,
        )
        .unwrap_err();
        assert!(matches!(err, FusionError::ShapeMismatch { .. }));
    }
}
