//! Sampling estimators for tangent and normal cones of general set
//! oracles, plus the falsification test for Frechet normals.
//!
//! Estimators never over-claim: every emitted direction or ray carries a
//! replayable certificate (a realized set point for tangent samples, the
//! projector triple for normal rays). Identical seeds produce identical
//! fans; outputs are canonically ordered.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::poly::ConeError;
use crate::sets::SetSpec;
use crate::verdict::Verdict;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub seed: u64,
    /// Unit directions probed per scale.
    pub num_dirs: usize,
    /// Decreasing scale grid for tangent realization.
    pub scales: Vec<f64>,
    /// Shell radii for limiting-normal sampling.
    pub shells: Vec<f64>,
    pub dirs_per_shell: usize,
    /// A direction must be certified at this many consecutive scales.
    pub persistence: usize,
    /// Angular tolerance for chaining a direction across scales.
    pub match_tol: f64,
    /// Angular deduplication tolerance.
    pub dedup_tol: f64,
    /// Slack added to the epsilon-normal ratio before declaring violation.
    pub slack: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            seed: 0,
            num_dirs: 256,
            scales: (1..=20).map(|k| 0.5f64.powi(k)).collect(),
            shells: (1..=6).map(|k| 10f64.powi(-k)).collect(),
            dirs_per_shell: 512,
            persistence: 3,
            match_tol: 0.02,
            dedup_tol: 1e-3,
            slack: 1e-6,
        }
    }
}

impl SamplingParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Reduced budget for property sweeps.
    pub fn light(seed: u64) -> Self {
        SamplingParams {
            seed,
            num_dirs: 64,
            scales: (1..=12).map(|k| 0.5f64.powi(k)).collect(),
            shells: (1..=4).map(|k| 10f64.powi(-k)).collect(),
            dirs_per_shell: 96,
            ..SamplingParams::default()
        }
    }
}

/// Realized tangent sample: `base + t * v` is a point of the set and
/// `||v|| = 1` exactly by construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FanSample {
    pub t: f64,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionFan {
    pub base_point: Vec<f64>,
    pub samples: Vec<FanSample>,
    pub scales: Vec<f64>,
}

impl DirectionFan {
    pub fn directions(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(|s| s.v.clone()).collect()
    }

    /// CSV dump with header `t,v1,...,vn`.
    pub fn to_csv(&self) -> String {
        let n = self.base_point.len();
        let mut out = String::from("t");
        for k in 1..=n {
            out.push_str(&format!(",v{k}"));
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!("{:.17e}", s.t));
            for c in &s.v {
                out.push_str(&format!(",{c:.17e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Limiting-normal ray with its projector provenance `(x, w, alpha)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalRay {
    pub ray: Vec<f64>,
    pub src_x: Vec<f64>,
    pub src_w: Vec<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalFan {
    pub base_point: Vec<f64>,
    pub rays: Vec<NormalRay>,
}

impl NormalFan {
    pub fn ray_dirs(&self) -> Vec<Vec<f64>> {
        self.rays.iter().map(|r| r.ray.clone()).collect()
    }

    /// CSV dump with header `ray1,...,rayn,src_x,src_w`; the source
    /// columns hold semicolon-joined coordinates.
    pub fn to_csv(&self) -> String {
        let n = self.base_point.len();
        let mut out = String::new();
        for k in 1..=n {
            if k > 1 {
                out.push(',');
            }
            out.push_str(&format!("ray{k}"));
        }
        out.push_str(",src_x,src_w\n");
        let join = |v: &[f64]| {
            v.iter()
                .map(|c| format!("{c:.17e}"))
                .collect::<Vec<_>>()
                .join(";")
        };
        for r in &self.rays {
            let coords = r
                .ray
                .iter()
                .map(|c| format!("{c:.17e}"))
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&format!("{},\"{}\",\"{}\"\n", coords, join(&r.src_x), join(&r.src_w)));
        }
        out
    }
}

/// Quasi-uniform unit directions; deterministic in the seed. In the plane
/// they are equally spaced with a seeded phase, in higher dimension they
/// come from normalized Gaussian draws.
pub fn unit_dirs(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if dim == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    if dim == 2 {
        let phase: f64 = rng.gen_range(0.0..(std::f64::consts::TAU / count as f64));
        return (0..count)
            .map(|k| {
                let t = phase + std::f64::consts::TAU * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
        if let Some(u) = linalg::normalize(&v, 1e-9) {
            out.push(u);
        }
    }
    out.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .find_map(|(x, y)| {
                let c = x.total_cmp(y);
                (c != std::cmp::Ordering::Equal).then_some(c)
            })
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; two uniforms per draw keeps this dependency-free.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn canonical_sort(dirs: &mut [FanSample]) {
    dirs.sort_by(|a, b| {
        a.v.iter()
            .zip(&b.v)
            .find_map(|(x, y)| {
                let c = x.total_cmp(y);
                (c != std::cmp::Ordering::Equal).then_some(c)
            })
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Contingent (Bouligand-Severi tangent) cone estimator.
///
/// Probes `base + t * d` over the scale grid, realizes each probe through
/// the projector, and keeps a direction only when its chain of realized
/// samples is certified at `persistence` consecutive scales. Every
/// returned sample satisfies `base + t * v` in the set exactly (up to the
/// projector's own tolerance), at the finest surviving scale.
pub fn contingent_estimate(
    set: &SetSpec,
    base: &[f64],
    budget: &SamplingParams,
) -> Result<DirectionFan, ConeError> {
    let dim = base.len();
    let dirs = unit_dirs(dim, budget.num_dirs, budget.seed);
    let nscales = budget.scales.len();
    // candidates[k] holds deduped realized directions at scale index k
    // (0 = coarsest).
    let mut candidates: Vec<Vec<(f64, Vec<f64>)>> = vec![Vec::new(); nscales];
    for (k, &t) in budget.scales.iter().enumerate() {
        for d in &dirs {
            let probe = linalg::axpy(base, t, d);
            let Ok(res) = set.project(&probe) else {
                continue;
            };
            let shifted = linalg::sub(&res.point, base);
            let r = linalg::norm(&shifted);
            if r < 0.4 * t || r > 2.5 * t {
                continue; // degenerate realization at this scale
            }
            let v = linalg::scale(&shifted, 1.0 / r);
            let dup = candidates[k]
                .iter()
                .any(|(_, u)| linalg::angle_between(u, &v) < budget.dedup_tol);
            if !dup {
                candidates[k].push((r, v));
            }
        }
    }
    // Chain clusters from the finest scale upward; a chain survives when it
    // covers `persistence` consecutive scales.
    struct Chain {
        finest: (f64, Vec<f64>),
        frontier: Vec<f64>,
        scale_idxs: Vec<usize>,
    }
    let mut chains: Vec<Chain> = Vec::new();
    for k in (0..nscales).rev() {
        for (r, v) in &candidates[k] {
            let mut attached = false;
            for c in chains.iter_mut() {
                if linalg::angle_between(&c.frontier, v) <= budget.match_tol
                    && c.scale_idxs.last().is_some_and(|&last| k < last)
                {
                    c.frontier = v.clone();
                    c.scale_idxs.push(k);
                    attached = true;
                    break;
                }
            }
            if !attached {
                chains.push(Chain {
                    finest: (*r, v.clone()),
                    frontier: v.clone(),
                    scale_idxs: vec![k],
                });
            }
        }
    }
    // A chain qualifies when its realizations persist over `persistence`
    // consecutive scales at the fine end of the grid. Chains stalling at
    // medium scales are drift artifacts of curved or oscillating
    // boundaries: their realizations migrate into another cluster as t
    // shrinks, so they must not contribute directions of their own.
    let persistent = |idxs: &[usize]| -> bool {
        if idxs.len() < budget.persistence {
            return false;
        }
        if idxs[0] + 2 < nscales {
            return false;
        }
        // scale_idxs are strictly decreasing by construction.
        idxs.windows(2)
            .take(budget.persistence - 1)
            .all(|w| w[1] + 1 == w[0])
    };
    let mut samples: Vec<FanSample> = chains
        .iter()
        .filter(|c| persistent(&c.scale_idxs))
        .map(|c| FanSample {
            t: c.finest.0,
            v: c.finest.1.clone(),
        })
        .collect();
    if samples.is_empty() {
        return Err(ConeError::EmptyFan);
    }
    canonical_sort(&mut samples);
    Ok(DirectionFan {
        base_point: base.to_vec(),
        samples,
        scales: budget.scales.clone(),
    })
}

/// In finite dimension the weak contingent cone coincides with the
/// contingent cone, so the weak estimator is the same function under the
/// name the countable theory uses.
pub use self::contingent_estimate as weak_contingent_estimate;

/// Limiting (Mordukhovich) normal cone estimator via the Euclidean
/// projector: rays are normalized residuals `x - w` with `w` the nearest
/// point of a probe `x` near the base point.
pub fn limiting_normal_estimate(
    set: &SetSpec,
    base: &[f64],
    budget: &SamplingParams,
) -> Result<NormalFan, ConeError> {
    let dim = base.len();
    let mut rays: Vec<NormalRay> = Vec::new();
    let mut shells = budget.shells.clone();
    shells.sort_by(f64::total_cmp); // smallest radius first: best provenance
    for (si, &r) in shells.iter().enumerate() {
        let dirs = unit_dirs(
            dim,
            budget.dirs_per_shell,
            budget.seed.wrapping_add(si as u64),
        );
        for u in &dirs {
            let x = linalg::axpy(base, r, u);
            let Ok(res) = set.project(&x) else { continue };
            if res.distance <= 1e-12 * (1.0 + r) {
                continue; // probe inside the set
            }
            let resid = linalg::sub(&x, &res.point);
            let Some(ray) = linalg::normalize(&resid, 1e-14) else {
                continue;
            };
            let dup = rays
                .iter()
                .any(|q| linalg::angle_between(&q.ray, &ray) < budget.dedup_tol);
            if !dup {
                rays.push(NormalRay {
                    ray,
                    src_x: x.clone(),
                    src_w: res.point.clone(),
                    alpha: 1.0 / res.distance,
                });
            }
        }
    }
    if rays.is_empty() {
        return Err(ConeError::EmptyFan);
    }
    rays.sort_by(|a, b| {
        a.ray
            .iter()
            .zip(&b.ray)
            .find_map(|(x, y)| {
                let c = x.total_cmp(y);
                (c != std::cmp::Ordering::Equal).then_some(c)
            })
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(NormalFan {
        base_point: base.to_vec(),
        rays,
    })
}

/// Falsification test for `xstar` being an epsilon-normal at `base`:
/// `Violated` carries a set point whose inner-product ratio exceeds
/// `eps + slack`; `Holds` means not falsified within the budget.
pub fn frechet_normal_test(
    set: &SetSpec,
    base: &[f64],
    xstar: &[f64],
    eps: f64,
    budget: &SamplingParams,
) -> Verdict<Vec<f64>> {
    if linalg::norm(xstar) == 0.0 {
        return Verdict::Holds;
    }
    let dim = base.len();
    for (si, &r) in budget.scales.iter().enumerate() {
        let dirs = unit_dirs(dim, budget.num_dirs, budget.seed.wrapping_add(si as u64));
        for u in &dirs {
            let probe = linalg::axpy(base, r, u);
            let Ok(res) = set.project(&probe) else {
                continue;
            };
            let step = linalg::sub(&res.point, base);
            let len = linalg::norm(&step);
            if len <= 1e-14 {
                continue;
            }
            let ratio = linalg::dot(xstar, &step) / len;
            if ratio > eps + budget.slack {
                return Verdict::Violated { witness: res.point };
            }
        }
    }
    Verdict::Holds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::ScalarFn;
    use crate::sets::GraphSense;

    fn wedge_above_neg_abs() -> SetSpec {
        SetSpec::Union {
            pieces: vec![
                SetSpec::halfspace(&[1.0, -1.0]),
                SetSpec::halfspace(&[-1.0, -1.0]),
            ],
        }
    }

    #[test]
    fn unit_dirs_are_deterministic() {
        let a = unit_dirs(3, 32, 7);
        let b = unit_dirs(3, 32, 7);
        assert_eq!(a, b);
        let c = unit_dirs(3, 32, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn fan_of_parabola_region_covers_upper_halfplane() {
        // {y >= -x^2} has contingent cone R x R_+ at the origin.
        let set = SetSpec::Epigraph {
            function: ScalarFn::NegSquare,
            sense: GraphSense::Above,
            bracket: [-10.0, 10.0],
            cells: 10_000,
        };
        let budget = SamplingParams {
            num_dirs: 128,
            ..Default::default()
        };
        let fan = contingent_estimate(&set, &[0.0, 0.0], &budget).unwrap();
        let fit = crate::cone2::Cone2::fit_from_dirs(&fan.directions(), 0.2);
        let upper = crate::cone2::Cone2::sector(0.0, std::f64::consts::PI);
        assert!(
            fit.hausdorff(&upper, 2048) <= 0.05,
            "hausdorff {}",
            fit.hausdorff(&upper, 2048)
        );
    }

    #[test]
    fn fan_samples_are_certified() {
        let set = wedge_above_neg_abs();
        let fan = contingent_estimate(&set, &[0.0, 0.0], &SamplingParams::light(3)).unwrap();
        for s in &fan.samples {
            let point = linalg::axpy(&fan.base_point, s.t, &s.v);
            assert!(set.contains(&point, 1e-7));
            assert!((linalg::norm(&s.v) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn isolated_point_yields_empty_fan() {
        let point = SetSpec::Ball {
            center: vec![0.0, 0.0],
            radius: 0.0,
        };
        match contingent_estimate(&point, &[0.0, 0.0], &SamplingParams::light(1)) {
            Err(ConeError::EmptyFan) => {}
            other => panic!("expected EmptyFan, got {other:?}"),
        }
    }

    #[test]
    fn normals_of_wedge_find_both_diagonals() {
        let set = wedge_above_neg_abs();
        let fan = limiting_normal_estimate(&set, &[0.0, 0.0], &SamplingParams::default()).unwrap();
        let d1 = [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2];
        let d2 = [-std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2];
        for target in [d1, d2] {
            assert!(
                fan.rays
                    .iter()
                    .any(|r| linalg::angle_between(&r.ray, &target) < 1e-2),
                "missing {target:?}"
            );
        }
        // Nothing outside the two diagonal rays.
        for r in &fan.rays {
            assert!(
                linalg::angle_between(&r.ray, &d1) < 1e-2
                    || linalg::angle_between(&r.ray, &d2) < 1e-2,
                "stray ray {:?}",
                r.ray
            );
        }
    }

    #[test]
    fn normals_of_halfplane_single_ray() {
        let lower = SetSpec::halfspace(&[0.0, 1.0]);
        let fan = limiting_normal_estimate(&lower, &[0.0, 0.0], &SamplingParams::light(5)).unwrap();
        assert_eq!(fan.rays.len(), 1);
        assert!(linalg::angle_between(&fan.rays[0].ray, &[0.0, 1.0]) < 1e-9);
    }

    #[test]
    fn whole_space_has_no_normals() {
        let w = SetSpec::whole(2);
        match limiting_normal_estimate(&w, &[0.0, 0.0], &SamplingParams::light(2)) {
            Err(ConeError::EmptyFan) => {}
            other => panic!("expected EmptyFan, got {other:?}"),
        }
    }

    #[test]
    fn frechet_test_examples() {
        let wedge = wedge_above_neg_abs();
        // (0,-1) is falsified on the wedge boundary: ratio sqrt(2)/2 > 0.
        let v = frechet_normal_test(
            &wedge,
            &[0.0, 0.0],
            &[0.0, -1.0],
            0.0,
            &SamplingParams::light(11),
        );
        assert!(v.is_violated());
        // Zero vector always holds.
        assert!(frechet_normal_test(
            &wedge,
            &[0.0, 0.0],
            &[0.0, 0.0],
            0.0,
            &SamplingParams::light(11)
        )
        .is_holds());
        // Outward normal of the lower halfplane holds.
        let lower = SetSpec::halfspace(&[0.0, 1.0]);
        assert!(frechet_normal_test(
            &lower,
            &[0.0, 0.0],
            &[0.0, 1.0],
            0.0,
            &SamplingParams::light(11)
        )
        .is_holds());
    }

    #[test]
    fn oscillating_epigraph_fan_matches_wedge() {
        let set = SetSpec::Epigraph {
            function: ScalarFn::Xsin1x,
            sense: GraphSense::Above,
            bracket: [-10.0, 10.0],
            cells: 10_000,
        };
        let budget = SamplingParams {
            num_dirs: 192,
            ..Default::default()
        };
        let fan = contingent_estimate(&set, &[0.0, 0.0], &budget).unwrap();
        let fit = crate::cone2::Cone2::fit_from_dirs(&fan.directions(), 0.2);
        let expect = crate::cone2::Cone2::sector(-std::f64::consts::FRAC_PI_4, 1.5 * std::f64::consts::PI);
        let h = fit.hausdorff(&expect, 2048);
        assert!(h <= 0.05, "hausdorff {h}");
    }
}
