//! Small matrix-free Krylov solvers used by the baselines.

use crate::error::{FusionError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative residual `|b - A x| / |b|` at which the solve stops.
    pub tol: f64,
    pub maxiter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(apply: &impl Fn(&[f64]) -> Vec<f64>, rhs: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = apply(x);
    rhs.iter().zip(&ax).map(|(b, a)| b - a).collect()
}

/// BiCGStab for general (nonsymmetric) operators. `x` holds the initial
/// guess and receives the solution.
pub fn bicgstab(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    x: &mut [f64],
    cfg: &SolverConfig,
) -> Result<SolveStats> {
    let rhs_norm = norm(rhs);
    let mut r = residual(&apply, rhs, x);
    let scale = if rhs_norm > 0.0 { rhs_norm } else { norm(&r).max(f64::MIN_POSITIVE) };
    let mut rel = norm(&r) / scale;
    if rel <= cfg.tol {
        return Ok(SolveStats { iterations: 0, rel_residual: rel });
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let n = rhs.len();
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];

    for it in 1..=cfg.maxiter {
        let rho_next = dot(&r_hat, &r);
        if rho_next == 0.0 {
            break;
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        v = apply(&p);
        let denom = dot(&r_hat, &v);
        if denom == 0.0 {
            break;
        }
        alpha = rho / denom;
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if norm(&s) / scale <= cfg.tol {
            for k in 0..n {
                x[k] += alpha * p[k];
            }
            rel = norm(&residual(&apply, rhs, x)) / scale;
            return Ok(SolveStats { iterations: it, rel_residual: rel });
        }
        let t = apply(&s);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for k in 0..n {
            x[k] += alpha * p[k] + omega * s[k];
            r[k] = s[k] - omega * t[k];
        }
        rel = norm(&r) / scale;
        if rel <= cfg.tol {
            // guard against drift of the recursive residual
            rel = norm(&residual(&apply, rhs, x)) / scale;
            if rel <= cfg.tol {
                return Ok(SolveStats { iterations: it, rel_residual: rel });
            }
        }
        if omega == 0.0 {
            break;
        }
    }
    Err(FusionError::NotConverged { what: "BiCGStab", iterations: cfg.maxiter, residual: rel })
}

/// Conjugate gradients for symmetric positive (semi-)definite operators with
/// a consistent right-hand side.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    x: &mut [f64],
    cfg: &SolverConfig,
) -> Result<SolveStats> {
    let mut r = residual(&apply, rhs, x);
    let scale = norm(rhs).max(norm(&r)).max(f64::MIN_POSITIVE);
    let mut rr = dot(&r, &r);
    let mut rel = rr.sqrt() / scale;
    if rel <= cfg.tol {
        return Ok(SolveStats { iterations: 0, rel_residual: rel });
    }
    let mut p = r.clone();
    for it in 1..=cfg.maxiter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let a = rr / pap;
        for k in 0..x.len() {
            x[k] += a * p[k];
            r[k] -= a * ap[k];
        }
        let rr_next = dot(&r, &r);
        rel = rr_next.sqrt() / scale;
        if rel <= cfg.tol {
            return Ok(SolveStats { iterations: it, rel_residual: rel });
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for k in 0..p.len() {
            p[k] = r[k] + beta * p[k];
        }
    }
    Err(FusionError::NotConverged { what: "conjugate gradient", iterations: cfg.maxiter, residual: rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    // tridiagonal nonsymmetric test operator
    fn apply_nonsym(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut v = 4.0 * x[i];
                if i > 0 {
                    v -= 1.5 * x[i - 1];
                }
                if i + 1 < n {
                    v -= 0.5 * x[i + 1];
                }
                v
            })
            .collect()
    }

    fn apply_spd(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut v = 2.0 * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                v + 0.01 * x[i]
            })
            .collect()
    }

    #[test]
    fn bicgstab_solves_nonsymmetric_system() {
        let truth: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let rhs = apply_nonsym(&truth);
        let mut x = vec![0.0; 40];
        let cfg = SolverConfig { tol: 1e-12, maxiter: 200 };
        bicgstab(apply_nonsym, &rhs, &mut x, &cfg).unwrap();
        for (a, b) in x.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn cg_solves_spd_system() {
        let truth: Vec<f64> = (0..50).map(|i| (i as f64 * 0.21).cos()).collect();
        let rhs = apply_spd(&truth);
        let mut x = vec![0.0; 50];
        let cfg = SolverConfig { tol: 1e-13, maxiter: 500 };
        cg_check(&rhs, &mut x, &cfg);
        for (a, b) in x.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    fn cg_check(rhs: &[f64], x: &mut [f64], cfg: &SolverConfig) {
        let stats = conjugate_gradient(apply_spd, rhs, x, cfg).unwrap();
        assert!(stats.rel_residual <= cfg.tol);
    }

    #[test]
    fn reports_non_convergence() {
        let rhs: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let mut x = vec![0.0; 40];
        let cfg = SolverConfig { tol: 1e-14, maxiter: 2 };
        assert!(matches!(bicgstab(apply_nonsym, &rhs, &mut x, &cfg), Err(FusionError::NotConverged { .. })));
    }
}
