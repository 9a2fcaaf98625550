//! Nonnegative least squares by spectral projected gradient.
//!
//! Solves `min_{lambda >= 0} || sum_j lambda_j g_j - x ||^2` for a small
//! set of generators. Barzilai-Borwein steps with a nonmonotone
//! safeguard; the iteration stops once successive iterates move less
//! than `step_tol` or after `max_iter` sweeps.

use crate::linalg;

pub struct NnlsResult {
    pub lambda: Vec<f64>,
    /// `sum_j lambda_j g_j`, the nearest point of the generated cone.
    pub point: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
}

/// `generators` are the columns `g_j`; `x` is the target.
pub fn solve(generators: &[Vec<f64>], x: &[f64], step_tol: f64, max_iter: usize) -> NnlsResult {
    let k = generators.len();
    if k == 0 {
        return NnlsResult {
            lambda: Vec::new(),
            point: linalg::zeros(x.len()),
            residual: linalg::norm(x),
            converged: true,
        };
    }
    let combine = |lam: &[f64]| -> Vec<f64> {
        let mut p = linalg::zeros(x.len());
        for (l, g) in lam.iter().zip(generators) {
            for (pi, gi) in p.iter_mut().zip(g) {
                *pi += l * gi;
            }
        }
        p
    };
    let grad = |p: &[f64]| -> Vec<f64> {
        let r = linalg::sub(p, x);
        generators.iter().map(|g| 2.0 * linalg::dot(g, &r)).collect()
    };
    // Lipschitz bound via the Frobenius norm of the Gram matrix.
    let lip: f64 = 2.0
        * generators
            .iter()
            .map(|g| linalg::dot(g, g))
            .sum::<f64>()
            .max(1e-30);

    let mut lam = vec![0.0; k];
    let mut p = combine(&lam);
    let mut g = grad(&p);
    let mut step = 1.0 / lip;
    let mut converged = false;
    for _ in 0..max_iter {
        let mut lam_new: Vec<f64> = lam
            .iter()
            .zip(&g)
            .map(|(l, gi)| (l - step * gi).max(0.0))
            .collect();
        let mut p_new = combine(&lam_new);
        // Nonmonotone BB can overshoot; fall back to the safe step when
        // the objective grows by more than a whisker.
        let f_old = linalg::dist(&p, x).powi(2);
        let f_new = linalg::dist(&p_new, x).powi(2);
        if f_new > f_old + 1e-12 * (1.0 + f_old) && step > 1.0 / lip {
            step = 1.0 / lip;
            lam_new = lam
                .iter()
                .zip(&g)
                .map(|(l, gi)| (l - step * gi).max(0.0))
                .collect();
            p_new = combine(&lam_new);
        }
        let g_new = grad(&p_new);
        let s = linalg::sub(&lam_new, &lam);
        let y = linalg::sub(&g_new, &g);
        let move_len = linalg::norm(&s);
        lam = lam_new;
        p = p_new;
        g = g_new;
        if move_len < step_tol {
            converged = true;
            break;
        }
        let sy = linalg::dot(&s, &y);
        step = if sy > 1e-30 {
            (linalg::dot(&s, &s) / sy).clamp(1e-12, 1e12)
        } else {
            1.0 / lip
        };
    }
    let residual = linalg::dist(&p, x);
    NnlsResult {
        lambda: lam,
        point: p,
        residual,
        converged,
    }
}
