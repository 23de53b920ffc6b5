//! Linear osmosis evolution `u_t = div(grad u - d u)` with zero-flux
//! boundaries.
//!
//! Drifts live on cell faces, `d_{i+1/2} = 2 (v_{i+1} - v_i) / (v_{i+1} + v_i)`,
//! and `u` on a face is the average of its two pixels. The resulting matrix
//! has zero column sums (mass conservation), nonnegative off-diagonals, and
//! annihilates every multiple of `v`.

use crate::baselines::krylov::{bicgstab, SolverConfig};
use crate::error::{FusionError, Result};
use crate::grid::{div, ScalarField, VectorField};
use crate::image::{AlphaMap, Image};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeScheme {
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsmosisEvolutionConfig {
    pub time_step: f64,
    pub final_time: f64,
    pub scheme: TimeScheme,
    /// Linear solver settings for the implicit scheme.
    pub solver: SolverConfig,
}

impl Default for OsmosisEvolutionConfig {
    fn default() -> Self {
        Self {
            time_step: 1000.0,
            final_time: 10_000.0,
            scheme: TimeScheme::Implicit,
            solver: SolverConfig { tol: 1e-5, maxiter: 500 },
        }
    }
}

impl OsmosisEvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(FusionError::InvalidParameter {
                name: "time_step",
                reason: format!("must be finite and > 0, got {}", self.time_step),
            });
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(FusionError::InvalidParameter {
                name: "final_time",
                reason: format!("must be finite and > 0, got {}", self.final_time),
            });
        }
        if !(self.solver.tol > 0.0) || self.solver.maxiter == 0 {
            return Err(FusionError::InvalidParameter {
                name: "solver",
                reason: "tol must be > 0 and maxiter >= 1".into(),
            });
        }
        Ok(())
    }
}

/// Face drifts of one channel. `x[(i, j)]` sits between columns `j` and
/// `j + 1`, `y[(i, j)]` between rows `i` and `i + 1`; the last column/row is
/// unused and zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceDrift(pub VectorField);

impl FaceDrift {
    /// Drift that makes `v` (and its multiples) the steady state.
    pub fn from_guide(v: &ScalarField) -> Self {
        let (h, w) = v.dims();
        let mut d = VectorField::zeros(h, w);
        for i in 0..h {
            for j in 0..w {
                if j + 1 < w {
                    let (a, b) = (v[(i, j)], v[(i, j + 1)]);
                    d.x[(i, j)] = 2.0 * (b - a) / (b + a);
                }
                if i + 1 < h {
                    let (a, b) = (v[(i, j)], v[(i + 1, j)]);
                    d.y[(i, j)] = 2.0 * (b - a) / (b + a);
                }
            }
        }
        Self(d)
    }

    /// Face-wise `alpha d_fg + (1 - alpha) d_bg`, with alpha averaged onto faces.
    pub fn blend(fg: &FaceDrift, bg: &FaceDrift, alpha: &ScalarField) -> Self {
        let (h, w) = alpha.dims();
        let mut d = VectorField::zeros(h, w);
        for i in 0..h {
            for j in 0..w {
                if j + 1 < w {
                    let a = 0.5 * (alpha[(i, j)] + alpha[(i, j + 1)]);
                    d.x[(i, j)] = a * fg.0.x[(i, j)] + (1.0 - a) * bg.0.x[(i, j)];
                }
                if i + 1 < h {
                    let a = 0.5 * (alpha[(i, j)] + alpha[(i + 1, j)]);
                    d.y[(i, j)] = a * fg.0.y[(i, j)] + (1.0 - a) * bg.0.y[(i, j)];
                }
            }
        }
        Self(d)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    /// Discrete `div(grad u - d u)` with zero boundary flux.
    pub fn apply(&self, u: &ScalarField) -> ScalarField {
        let (h, w) = u.dims();
        let mut flux = VectorField::zeros(h, w);
        for i in 0..h {
            for j in 0..w {
                if j + 1 < w {
                    let (a, b) = (u[(i, j)], u[(i, j + 1)]);
                    flux.x[(i, j)] = (b - a) - self.0.x[(i, j)] * 0.5 * (a + b);
                }
                if i + 1 < h {
                    let (a, b) = (u[(i, j)], u[(i + 1, j)]);
                    flux.y[(i, j)] = (b - a) - self.0.y[(i, j)] * 0.5 * (a + b);
                }
            }
        }
        div(&flux)
    }

    /// Diagonal of the operator matrix (all entries `<= 0`).
    pub fn diagonal(&self) -> ScalarField {
        let (h, w) = self.dims();
        let d = &self.0;
        ScalarField::from_fn(h, w, |i, j| {
            let mut acc = 0.0;
            if j + 1 < w {
                acc -= 1.0 + 0.5 * d.x[(i, j)];
            }
            if j > 0 {
                acc -= 1.0 - 0.5 * d.x[(i, j - 1)];
            }
            if i + 1 < h {
                acc -= 1.0 + 0.5 * d.y[(i, j)];
            }
            if i > 0 {
                acc -= 1.0 - 0.5 * d.y[(i - 1, j)];
            }
            acc
        })
    }
}

/// Applies the osmosis operator with the drift induced by guide `v`, per channel.
pub fn osmosis_matrix_apply(u: &Image, v: &Image) -> Result<Image> {
    u.check_same_shape(v, "osmosis operator")?;
    v.check_positive("osmosis guide")?;
    let channels =
        u.channels().iter().zip(v.channels()).map(|(uc, vc)| FaceDrift::from_guide(vc).apply(uc)).collect();
    Image::new(channels)
}

/// Statistics of one time step of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub mean: f64,
    pub min: f64,
    pub solver_iterations: usize,
    pub rel_residual: f64,
}

/// Evolution result: final image plus per-channel step history.
#[derive(Debug, Clone)]
pub struct OsmosisRun {
    pub image: Image,
    pub history: Vec<Vec<StepRecord>>,
}

/// Evolves one channel under a fixed face drift.
pub fn evolve_channel(
    u0: &ScalarField,
    drift: &FaceDrift,
    cfg: &OsmosisEvolutionConfig,
) -> Result<(ScalarField, Vec<StepRecord>)> {
    cfg.validate()?;
    let steps = (cfg.final_time / cfg.time_step).ceil().max(1.0) as usize;
    let dt = cfg.final_time / steps as f64;
    let (h, w) = u0.dims();
    let mut u = u0.clone();
    let mut history = Vec::with_capacity(steps);

    match cfg.scheme {
        TimeScheme::Explicit => {
            let worst = -drift.diagonal().min();
            if dt * worst > 1.0 {
                return Err(FusionError::InvalidParameter {
                    name: "time_step",
                    reason: format!(
                        "explicit scheme needs dt <= {:e} for positivity, got {dt:e}",
                        1.0 / worst
                    ),
                });
            }
            for _ in 0..steps {
                let au = drift.apply(&u);
                u.axpy(dt, &au);
                history.push(StepRecord {
                    mean: u.mean(),
                    min: u.min(),
                    solver_iterations: 0,
                    rel_residual: 0.0,
                });
            }
        }
        TimeScheme::Implicit => {
            let apply = |x: &[f64]| -> Vec<f64> {
                let xf = ScalarField::from_fn(h, w, |i, j| x[i * w + j]);
                let ax = drift.apply(&xf);
                x.iter().zip(ax.data()).map(|(xi, ai)| xi - dt * ai).collect()
            };
            for _ in 0..steps {
                let rhs = u.data().to_vec();
                let mut x = rhs.clone();
                let stats = bicgstab(apply, &rhs, &mut x, &cfg.solver)?;
                u = ScalarField::from_fn(h, w, |i, j| x[i * w + j]);
                history.push(StepRecord {
                    mean: u.mean(),
                    min: u.min(),
                    solver_iterations: stats.iterations,
                    rel_residual: stats.rel_residual,
                });
            }
        }
    }
    Ok((u, history))
}

/// Linear osmosis of `u0` towards the steady state `(mean(u0) / mean(v)) v`.
pub fn linear_osmosis(u0: &Image, v: &Image, cfg: &OsmosisEvolutionConfig) -> Result<OsmosisRun> {
    u0.check_same_shape(v, "linear osmosis")?;
    u0.check_positive("osmosis initial image")?;
    v.check_positive("osmosis guide")?;
    let drifts: Vec<FaceDrift> = v.channels().iter().map(FaceDrift::from_guide).collect();
    run_channels(u0, &drifts, cfg)
}

/// Osmosis fusion baseline: the drift of `f` and of `b` blended face-wise by
/// `alpha`, evolved from `alpha f + (1 - alpha) b`.
pub fn osmosis_fuse(
    f: &Image,
    b: &Image,
    alpha: &AlphaMap,
    cfg: &OsmosisEvolutionConfig,
) -> Result<OsmosisRun> {
    f.check_same_shape(b, "osmosis fusion")?;
    alpha.check_matches(f, "osmosis fusion alpha")?;
    let u0 = crate::solvers::InitChoice::Convex.initial_image(f, b, alpha);
    osmosis_fuse_from(&u0, f, b, alpha, cfg)
}

/// As [`osmosis_fuse`] with an explicit starting image.
pub fn osmosis_fuse_from(
    u0: &Image,
    f: &Image,
    b: &Image,
    alpha: &AlphaMap,
    cfg: &OsmosisEvolutionConfig,
) -> Result<OsmosisRun> {
    f.check_same_shape(b, "osmosis fusion")?;
    u0.check_same_shape(f, "osmosis fusion initial image")?;
    alpha.check_matches(f, "osmosis fusion alpha")?;
    f.check_positive("foreground")?;
    b.check_positive("background")?;
    u0.check_positive("osmosis initial image")?;
    let drifts: Vec<FaceDrift> = f
        .channels()
        .iter()
        .zip(b.channels())
        .map(|(fc, bc)| {
            FaceDrift::blend(&FaceDrift::from_guide(fc), &FaceDrift::from_guide(bc), alpha.field())
        })
        .collect();
    run_channels(u0, &drifts, cfg)
}

fn run_channels(u0: &Image, drifts: &[FaceDrift], cfg: &OsmosisEvolutionConfig) -> Result<OsmosisRun> {
    let mut channels = Vec::with_capacity(drifts.len());
    let mut history = Vec::with_capacity(drifts.len());
    for (uc, d) in u0.channels().iter().zip(drifts) {
        let (u, h) = evolve_channel(uc, d, cfg)?;
        channels.push(u);
        history.push(h);
    }
    Ok(OsmosisRun { image: Image::new(channels)?, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn guide(h: usize, w: usize) -> ScalarField {
        ScalarField::from_fn(h, w, |i, j| 10.0 + 5.0 * ((i as f64 * 0.7).sin() + (j as f64 * 0.4).cos()))
    }

    #[test]
    fn operator_annihilates_multiples_of_guide() {
        let v = guide(6, 7);
        let d = FaceDrift::from_guide(&v);
        let r = d.apply(&v.scale(3.3));
        assert!(r.data().iter().all(|x| x.abs() < 1e-12));
        let c = ScalarField::filled(4, 4, 2.0);
        let r = FaceDrift::from_guide(&c).apply(&ScalarField::filled(4, 4, 9.0));
        assert!(r.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn diagonal_matches_operator() {
        let v = guide(5, 4);
        let d = FaceDrift::from_guide(&v);
        let diag = d.diagonal();
        for k in 0..20 {
            let mut e = ScalarField::zeros(5, 4);
            e.data_mut()[k] = 1.0;
            assert!((d.apply(&e).data()[k] - diag.data()[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn explicit_scheme_rejects_unstable_step() {
        let v = guide(6, 6);
        let cfg = OsmosisEvolutionConfig {
            time_step: 1.0,
            final_time: 5.0,
            scheme: TimeScheme::Explicit,
            ..Default::default()
        };
        let err = evolve_channel(&v, &FaceDrift::from_guide(&v), &cfg).unwrap_err();
        assert!(matches!(err, FusionError::InvalidParameter { name: "time_step", .. }));
    }

    #[test]
    fn explicit_scheme_conserves_mass() {
        let v = guide(8, 8);
        let u0 = ScalarField::from_fn(8, 8, |i, j| 1.0 + ((i * 3 + j) % 5) as f64);
        let cfg = OsmosisEvolutionConfig {
            time_step: 0.1,
            final_time: 20.0,
            scheme: TimeScheme::Explicit,
            ..Default::default()
        };
        let (u, hist) = evolve_channel(&u0, &FaceDrift::from_guide(&v), &cfg).unwrap();
        let m0 = u0.mean();
        for rec in &hist {
            assert!((rec.mean - m0).abs() < 1e-12 * m0);
            assert!(rec.min >= 0.0);
        }
        assert!(u.min() > 0.0);
    }
}
