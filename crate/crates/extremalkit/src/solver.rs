//! Metric-approximation engine for countable cone systems.
//!
//! Given a truncated system of closed cones with bounded shifts, the
//! solver minimizes the weighted distance-square functional
//! `phi^2(x) = sum_i w_i dist^2(x + a_i; cone_i)` by exact
//! majorize-minimize averaging of projections, extracts the normal
//! certificate `x*_i = (x + a_i - w_i) / phi(x)` at the minimizer, and
//! classifies the system as extremal, not extremal (with a feasible point
//! of the shifted intersection), or degenerate.
//!
//! Indices past the truncation are the whole space by convention: they
//! contribute zero distance and zero normals, so one code path covers
//! finite and countable systems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone2::Cone2;
use crate::fans::{self, SamplingParams};
use crate::linalg;
use crate::lp::{feasible_point, LpBuilder, LpError, LpOutcome};
use crate::nnls;
use crate::poly::{spec_pieces, PolyCone};
use crate::sets::{SetError, SetSpec};
use crate::verdict::Verdict;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("iteration budget exceeded before convergence")]
    BudgetExceeded,
    #[error("iterates escaped along {direction:?}; probable nonoverlap failure")]
    Diverged { direction: Vec<f64> },
    #[error("computed normal fails its cone certificate at index {index}")]
    MembershipFailed { index: usize },
    #[error("no set beyond the first admits a nonzero Frechet normal near the point")]
    NoNonzeroNormal,
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Truncated countable system of closed cones with bounded shifts.
/// `weights[i]` defaults to `2^-(i+1)`; the tail convention makes every
/// index past `cones.len()` the whole space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeSystem {
    pub dimension: usize,
    pub cones: Vec<SetSpec>,
    pub shifts: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl ConeSystem {
    /// Geometric weights `2^-1, 2^-2, ...` over the listed cones.
    pub fn new(dimension: usize, cones: Vec<SetSpec>, shifts: Vec<Vec<f64>>) -> Self {
        let weights = (1..=cones.len()).map(|i| 0.5f64.powi(i as i32)).collect();
        ConeSystem {
            dimension,
            cones,
            shifts,
            weights,
        }
    }

    pub fn with_weights(
        dimension: usize,
        cones: Vec<SetSpec>,
        shifts: Vec<Vec<f64>>,
        weights: Vec<f64>,
    ) -> Self {
        ConeSystem {
            dimension,
            cones,
            shifts,
            weights,
        }
    }

    pub fn truncation(&self) -> usize {
        self.cones.len()
    }

    pub fn max_shift_norm(&self) -> f64 {
        self.shifts
            .iter()
            .map(|a| linalg::norm(a))
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.cones.is_empty() {
            return Err(SolverError::Invalid("system needs at least one cone".into()));
        }
        if self.shifts.len() != self.cones.len() || self.weights.len() != self.cones.len() {
            return Err(SolverError::Invalid(
                "cones, shifts and weights must have equal length".into(),
            ));
        }
        for c in &self.cones {
            c.validate().map_err(SolverError::Set)?;
            if c.dimension() != self.dimension {
                return Err(SolverError::Invalid("cone dimension mismatch".into()));
            }
        }
        for a in &self.shifts {
            if a.len() != self.dimension || !linalg::all_finite(a) {
                return Err(SolverError::Invalid("shift dimension mismatch".into()));
            }
        }
        if self.weights.iter().any(|w| *w <= 0.0) {
            return Err(SolverError::Invalid("weights must be positive".into()));
        }
        Ok(())
    }

    /// Sampling check of the conic-scaling invariant for every listed cone.
    pub fn validate_cones_by_sampling(&self, seed: u64) -> Result<(), SolverError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (i, cone) in self.cones.iter().enumerate() {
            if !cone.contains(&linalg::zeros(self.dimension), 1e-7) {
                return Err(SolverError::Invalid(format!(
                    "cone {i} does not contain the origin"
                )));
            }
            for _ in 0..8 {
                let probe: Vec<f64> = (0..self.dimension)
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect();
                let p = cone.project(&probe).map_err(SolverError::Set)?.point;
                for eta in [0.5, 2.0] {
                    let scaled = linalg::scale(&p, eta);
                    if !cone.contains(&scaled, 1e-6 * (1.0 + linalg::norm(&scaled))) {
                        return Err(SolverError::Invalid(format!(
                            "cone {i} fails the conic scaling test"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `phi^2(x) = sum_i w_i dist^2(x + a_i; cone_i)`.
    pub fn phi2(&self, x: &[f64]) -> Result<f64, SetError> {
        let mut acc = 0.0;
        for ((cone, shift), w) in self.cones.iter().zip(&self.shifts).zip(&self.weights) {
            let d = cone.dist(&linalg::add(x, shift))?;
            acc += w * d * d;
        }
        Ok(acc)
    }

    pub fn phi(&self, x: &[f64]) -> Result<f64, SetError> {
        Ok(self.phi2(x)?.sqrt())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverState {
    pub x: Vec<f64>,
    /// Nearest points `w_i` of `x + a_i` in each cone.
    pub projections: Vec<Vec<f64>>,
    pub phi2: f64,
    pub iter: usize,
    pub converged: bool,
    /// Projections that reported several nearest points.
    pub multiplicity_events: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Movement threshold declaring the averaged-projection step converged.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub tol_euler: f64,
    pub tol_norm: f64,
    /// `phi` below this at the minimizer means the shifted intersection is
    /// nonempty.
    pub tol_zero: f64,
    /// Multiplier in the escape threshold `c (1 + sup||a_i||) m`.
    pub divergence_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-12,
            max_iter: 100_000,
            seed: 0,
            tol_euler: 1e-7,
            tol_norm: 1e-7,
            tol_zero: 1e-9,
            divergence_factor: 10.0,
        }
    }
}

/// Certificate status. `Extremal` means the generalized Euler equation and
/// the normalization both hold within tolerance and every normal passed
/// its cone membership certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertStatus {
    Extremal,
    NotExtremal { feasible_point: Vec<f64> },
    Degenerate { reason: String },
    BudgetExceeded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalCertificate {
    pub status: CertStatus,
    pub x_tilde: Vec<f64>,
    pub projections: Vec<Vec<f64>>,
    pub normals: Vec<Vec<f64>>,
    pub euler_residual: f64,
    pub norm_residual: f64,
    pub phi: f64,
    pub multiplicity_events: usize,
}

impl NormalCertificate {
    fn empty(status: CertStatus, dim: usize, m: usize) -> Self {
        NormalCertificate {
            status,
            x_tilde: linalg::zeros(dim),
            projections: vec![linalg::zeros(dim); m],
            normals: vec![linalg::zeros(dim); m],
            euler_residual: 0.0,
            norm_residual: 0.0,
            phi: 0.0,
            multiplicity_events: 0,
        }
    }
}

/// Averaged-projection fixed-point iteration
/// `x <- sum_i w_i (P_i(x + a_i) - a_i) / sum_i w_i`,
/// the exact majorize-minimize step for `phi^2`. The value is
/// nonincreasing by construction and asserted each iteration. Escape past
/// `divergence_factor (1 + sup||a||) m` aborts with the normalized escape
/// direction, a candidate witness of nonoverlap failure.
pub fn minimize_phi(
    system: &ConeSystem,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverState, SolverError> {
    system.validate()?;
    let m = system.truncation();
    let wsum: f64 = system.weights.iter().sum();
    let escape = cfg.divergence_factor * (1.0 + system.max_shift_norm()) * m as f64;
    let mut x = x0.to_vec();
    let mut multiplicity_events = 0usize;
    let mut phi2_prev = f64::INFINITY;
    let mut projections: Vec<Vec<f64>> = vec![linalg::zeros(system.dimension); m];
    for iter in 0..cfg.max_iter {
        let mut avg = linalg::zeros(system.dimension);
        let mut phi2 = 0.0;
        for (i, ((cone, shift), w)) in system
            .cones
            .iter()
            .zip(&system.shifts)
            .zip(&system.weights)
            .enumerate()
        {
            let res = cone.project(&linalg::add(&x, shift))?;
            if res.multiplicity_hint {
                multiplicity_events += 1;
            }
            phi2 += w * res.distance * res.distance;
            avg = linalg::axpy(&avg, *w, &linalg::sub(&res.point, shift));
            projections[i] = res.point;
        }
        assert!(
            phi2 <= phi2_prev * (1.0 + 1e-9) + 1e-15,
            "majorize-minimize descent violated: {phi2_prev} -> {phi2}"
        );
        phi2_prev = phi2;
        let x_next = linalg::scale(&avg, 1.0 / wsum);
        if linalg::norm(&x_next) > escape {
            let direction = linalg::normalize(&x_next, 1e-300).unwrap_or(x_next.clone());
            return Err(SolverError::Diverged { direction });
        }
        let step = linalg::dist(&x_next, &x);
        x = x_next;
        if step < cfg.tol {
            return Ok(SolverState {
                x,
                projections,
                phi2,
                iter: iter + 1,
                converged: true,
                multiplicity_events,
            });
        }
    }
    Err(SolverError::BudgetExceeded)
}

/// Build the certificate of the conic extremal principle from a converged
/// state: `x*_i = (x + a_i - w_i) / phi(x)`, which satisfies the Euler sum
/// and the normalization identity at the exact minimizer.
pub fn extract_certificate(
    system: &ConeSystem,
    state: &SolverState,
    cfg: &SolverConfig,
) -> Result<NormalCertificate, SolverError> {
    let m = system.truncation();
    let phi = state.phi2.max(0.0).sqrt();
    if phi <= cfg.tol_zero {
        return Ok(NormalCertificate {
            status: CertStatus::NotExtremal {
                feasible_point: state.x.clone(),
            },
            x_tilde: state.x.clone(),
            projections: state.projections.clone(),
            normals: vec![linalg::zeros(system.dimension); m],
            euler_residual: 0.0,
            norm_residual: 0.0,
            phi,
            multiplicity_events: state.multiplicity_events,
        });
    }
    let mut normals = Vec::with_capacity(m);
    for i in 0..m {
        let residual = linalg::sub(
            &linalg::add(&state.x, &system.shifts[i]),
            &state.projections[i],
        );
        normals.push(linalg::scale(&residual, 1.0 / phi));
    }
    let mut euler = linalg::zeros(system.dimension);
    let mut norm_sum = 0.0;
    for (w, xs) in system.weights.iter().zip(&normals) {
        euler = linalg::axpy(&euler, *w, xs);
        norm_sum += w * linalg::dot(xs, xs);
    }
    let euler_residual = linalg::norm(&euler);
    let norm_residual = (norm_sum - 1.0).abs();
    verify_normal_memberships(system, &state.projections, &normals, cfg)?;
    let status = if euler_residual <= cfg.tol_euler && norm_residual <= cfg.tol_norm {
        CertStatus::Extremal
    } else {
        CertStatus::Degenerate {
            reason: format!(
                "residuals above tolerance: euler {euler_residual:.3e}, norm {norm_residual:.3e}"
            ),
        }
    };
    Ok(NormalCertificate {
        status,
        x_tilde: state.x.clone(),
        projections: state.projections.clone(),
        normals,
        euler_residual,
        norm_residual,
        phi,
        multiplicity_events: state.multiplicity_events,
    })
}

/// Every nonzero normal must certify membership in the Frechet cone of its
/// cone at the projection point: exactly through active facets for
/// polyhedral kinds, by sampled falsification otherwise.
fn verify_normal_memberships(
    system: &ConeSystem,
    projections: &[Vec<f64>],
    normals: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<(), SolverError> {
    for (i, (cone, xs)) in system.cones.iter().zip(normals).enumerate() {
        let len = linalg::norm(xs);
        if len <= 1e-13 {
            continue;
        }
        let w = &projections[i];
        if let Ok(pieces) = spec_pieces(cone) {
            // Exact: the proximal normal must be a nonnegative combination
            // of active facet rows of a piece attaining the projection.
            let scale = 1.0 + linalg::norm(w);
            let mut ok = false;
            for piece in &pieces {
                let completed = piece.completed();
                let Some(rows) = &completed.facet_normals else {
                    continue;
                };
                if !completed.contains(w, 1e-6 * scale) {
                    continue;
                }
                let active: Vec<Vec<f64>> = rows
                    .iter()
                    .filter(|r| {
                        linalg::dot(r, w).abs() <= 1e-7 * scale * linalg::norm(r).max(1.0)
                    })
                    .cloned()
                    .collect();
                if nnls::solve(&active, xs, 1e-13, 100_000).residual <= 1e-6 * len.max(1.0) {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(SolverError::MembershipFailed { index: i });
            }
        } else {
            let budget = SamplingParams::light(cfg.seed ^ 0x5eed);
            if fans::frechet_normal_test(cone, w, xs, 0.0, &budget).is_violated() {
                return Err(SolverError::MembershipFailed { index: i });
            }
        }
    }
    Ok(())
}

/// Multi-start driver: polyhedral systems get an exact LP feasibility
/// pre-pass for the shifted intersection (an explicit feasible point means
/// the system is not extremal for these shifts); the averaged-projection
/// scheme then runs from the origin, the shifted centroids, and eight
/// seeded unit points, keeping the best converged state.
pub fn solve_system(system: &ConeSystem, cfg: &SolverConfig) -> Result<NormalCertificate, SolverError> {
    system.validate()?;
    let m = system.truncation();
    let dim = system.dimension;
    if let Some(point) = shifted_intersection_point(&system.cones, &system.shifts)? {
        let mut cert = NormalCertificate::empty(
            CertStatus::NotExtremal {
                feasible_point: point.clone(),
            },
            dim,
            m,
        );
        cert.x_tilde = point.clone();
        cert.projections = system
            .cones
            .iter()
            .zip(&system.shifts)
            .map(|(c, a)| c.project(&linalg::add(&point, a)).map(|r| r.point))
            .collect::<Result<_, _>>()?;
        return Ok(cert);
    }

    let mut starts: Vec<Vec<f64>> = vec![linalg::zeros(dim)];
    let mut centroid = linalg::zeros(dim);
    for a in &system.shifts {
        centroid = linalg::axpy(&centroid, -1.0 / m as f64, a);
        starts.push(linalg::scale(a, -1.0));
    }
    starts.push(centroid);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..8 {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        starts.push(linalg::normalize(&v, 1e-9).unwrap_or_else(|| linalg::basis(dim, 0)));
    }

    let mut best: Option<SolverState> = None;
    let mut last_err: Option<SolverError> = None;
    for x0 in &starts {
        match minimize_phi(system, x0, cfg) {
            Ok(state) => {
                if best.as_ref().map_or(true, |b| state.phi2 < b.phi2) {
                    best = Some(state);
                }
            }
            Err(e @ (SolverError::Diverged { .. } | SolverError::BudgetExceeded)) => {
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    match best {
        Some(state) => extract_certificate(system, &state, cfg),
        None => match last_err {
            Some(SolverError::Diverged { direction }) => Ok(NormalCertificate::empty(
                CertStatus::Degenerate {
                    reason: format!(
                        "iterates escaped along {direction:?}; run the nonoverlap check"
                    ),
                },
                dim,
                m,
            )),
            _ => Ok(NormalCertificate::empty(CertStatus::BudgetExceeded, dim, m)),
        },
    }
}

/// Piece choices across union cones: the shifted intersection is empty iff
/// it is empty for every selection of one convex piece per cone.
fn piece_combinations(cones: &[SetSpec]) -> Option<Vec<Vec<PolyCone>>> {
    let mut per_cone: Vec<Vec<PolyCone>> = Vec::new();
    for c in cones {
        per_cone.push(spec_pieces(c).ok()?);
    }
    let mut combos: Vec<Vec<PolyCone>> = vec![Vec::new()];
    for pieces in &per_cone {
        let mut next = Vec::new();
        for combo in &combos {
            for p in pieces {
                let mut c = combo.clone();
                c.push(p.clone());
                next.push(c);
            }
        }
        combos = next;
        if combos.len() > 4096 {
            return None;
        }
    }
    Some(combos)
}

/// Exact LP feasibility of the shifted intersection for systems of
/// polyhedral cones (unions allowed). Returns a feasible point when the
/// intersection is nonempty, `None` when it is certified empty, and
/// `Err`s through to the caller when the kinds are not polyhedral.
pub fn shifted_intersection_point(
    cones: &[SetSpec],
    shifts: &[Vec<f64>],
) -> Result<Option<Vec<f64>>, SolverError> {
    let Some(combos) = piece_combinations(cones) else {
        return Ok(None); // not polyhedral: no exact pre-pass
    };
    let dim = shifts.first().map_or(0, |s| s.len());
    for combo in combos {
        let mut lp = LpBuilder::new(dim).maximize(&linalg::zeros(dim));
        for (piece, shift) in combo.iter().zip(shifts) {
            let completed = piece.completed();
            for row in completed.facet_normals.as_deref().unwrap_or(&[]) {
                // <row, x + a> <= 0
                lp.add_le(row, -linalg::dot(row, shift));
            }
        }
        if let Some(p) = feasible_point(&lp)? {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Is the shifted intersection empty? `None` when no exact decision path
/// applies.
fn shifted_intersection_empty(
    cones: &[SetSpec],
    shifts: &[Vec<f64>],
) -> Result<Option<bool>, SolverError> {
    if piece_combinations(cones).is_none() {
        return Ok(None);
    }
    Ok(Some(shifted_intersection_point(cones, shifts)?.is_none()))
}

/// Nonoverlapping condition: is the common intersection of the listed
/// cones the origin alone?
///
/// Dispatch: exact planar sector intersection when every cone has a
/// 2-D description; an orthant-seeded LP sweep for polyhedral systems in
/// moderate dimension (detection maximizes the l1 mass in each orthant,
/// a slack-maximizing second stage pins the witness to the common ray);
/// a multi-start sphere search otherwise.
pub fn check_nonoverlapping(system: &ConeSystem) -> Result<Verdict<Vec<f64>>, SolverError> {
    let cones = &system.cones;
    // Polyhedral LP path first: its slack-maximizing second stage pins the
    // witness to the common ray, which downstream consumers rely on.
    if system.dimension <= 12 {
        if let Some(combos) = piece_combinations(cones) {
            let n = system.dimension;
            for combo in combos {
                let rows: Vec<Vec<f64>> = combo
                    .iter()
                    .flat_map(|p| p.completed().facet_normals.unwrap_or_default())
                    .collect();
                for orthant in 0..(1usize << n) {
                    let sigma: Vec<f64> = (0..n)
                        .map(|k| if orthant >> k & 1 == 1 { -1.0 } else { 1.0 })
                        .collect();
                    // y = sigma .* x >= 0 turns the orthant into the
                    // nonnegative cone; the box keeps the LP bounded.
                    let signed = |row: &[f64]| -> Vec<f64> {
                        row.iter().zip(&sigma).map(|(r, s)| r * s).collect()
                    };
                    let mut detect = LpBuilder::new(n).all_nonneg().maximize(&vec![1.0; n]);
                    for row in &rows {
                        detect.add_le(&signed(row), 0.0);
                    }
                    for k in 0..n {
                        detect.add_le(&linalg::basis(n, k), 1.0);
                    }
                    let LpOutcome::Optimal { value, x: detect_x } = detect.solve()? else {
                        continue;
                    };
                    if value <= 1e-7 {
                        continue;
                    }
                    // Stage 2: maximize total slack on the detected mass to
                    // land the witness on the common ray.
                    let mut slack_obj = linalg::zeros(n);
                    for row in &rows {
                        slack_obj = linalg::sub(&slack_obj, &signed(row));
                    }
                    let mut refine = LpBuilder::new(n).all_nonneg().maximize(&slack_obj);
                    for row in &rows {
                        refine.add_le(&signed(row), 0.0);
                    }
                    for k in 0..n {
                        refine.add_le(&linalg::basis(n, k), 1.0);
                    }
                    refine.add_ge(&vec![1.0; n], 0.5 * value.min(1.0));
                    let y = match refine.solve()? {
                        LpOutcome::Optimal { x, .. } => x,
                        _ => detect_x,
                    };
                    let witness: Vec<f64> = y.iter().zip(&sigma).map(|(v, s)| v * s).collect();
                    let witness = linalg::normalize(&witness, 1e-12)
                        .expect("detected mass is bounded away from zero");
                    return Ok(Verdict::Violated { witness });
                }
            }
            return Ok(Verdict::Holds);
        }
    }
    // Planar exact path for kinds with a sector description but no
    // polyhedral rows.
    if system.dimension == 2 {
        if let Some(all) = cones.iter().map(|c| c.cone2()).collect::<Option<Vec<_>>>() {
            let mut common = Cone2::full();
            for c in &all {
                common = common.intersect(c);
            }
            if common.is_zero_only() {
                return Ok(Verdict::Holds);
            }
            let witness = common
                .interior_dir()
                .or_else(|| common.representative_rays().into_iter().next())
                .expect("nonzero cone has a ray");
            return Ok(Verdict::Violated { witness });
        }
    }
    // Oracle path: multi-start minimization over the unit sphere.
    sphere_overlap_search(system)
}

fn sphere_overlap_search(system: &ConeSystem) -> Result<Verdict<Vec<f64>>, SolverError> {
    let dim = system.dimension;
    let starts = fans::unit_dirs(dim, 64, 0xd1ce);
    let mut best_val = f64::INFINITY;
    let mut best_x = linalg::basis(dim, 0);
    for s in &starts {
        let mut x = s.clone();
        for _ in 0..300 {
            let mut grad = linalg::zeros(dim);
            let mut val = 0.0;
            for cone in &system.cones {
                let res = cone.project(&x)?;
                val += res.distance * res.distance;
                grad = linalg::axpy(&grad, 2.0, &linalg::sub(&x, &res.point));
            }
            if val < best_val {
                best_val = val;
                best_x = x.clone();
            }
            let step = linalg::axpy(&x, -0.2, &grad);
            match linalg::normalize(&step, 1e-12) {
                Some(u) => {
                    let moved = linalg::dist(&u, &x);
                    x = u;
                    if moved < 1e-13 {
                        break;
                    }
                }
                None => break,
            }
        }
    }
    if best_val <= 1e-12 {
        let certified = system
            .cones
            .iter()
            .all(|c| c.contains(&best_x, 1e-5));
        if certified {
            return Ok(Verdict::Violated { witness: best_x });
        }
    }
    if best_val >= 1e-4 {
        Ok(Verdict::Holds)
    } else {
        Ok(Verdict::unknown(format!(
            "sphere search inconclusive: min residual {best_val:.3e}"
        )))
    }
}

/// An interior common direction certifies that no bounded shift family can
/// empty the intersection, i.e. the cone system is not extremal.
fn interior_common_direction(system: &ConeSystem) -> Result<Option<Vec<f64>>, SolverError> {
    if system.dimension == 2 {
        if let Some(all) = system
            .cones
            .iter()
            .map(|c| c.cone2())
            .collect::<Option<Vec<_>>>()
        {
            let mut common = Cone2::full();
            for c in &all {
                common = common.intersect(c);
            }
            return Ok(common.interior_dir());
        }
    }
    let Some(combos) = piece_combinations(&system.cones) else {
        return Ok(None);
    };
    let n = system.dimension;
    for combo in combos {
        let rows: Vec<Vec<f64>> = combo
            .iter()
            .flat_map(|p| p.completed().facet_normals.unwrap_or_default())
            .collect();
        // maximize t with <a_j, x> + t ||a_j|| <= 0, |x|_inf <= 1.
        let mut lp = LpBuilder::new(n + 1).nonneg_var(n);
        let mut obj = linalg::zeros(n + 1);
        obj[n] = 1.0;
        lp = lp.maximize(&obj);
        for row in &rows {
            let mut r = row.clone();
            r.push(linalg::norm(row));
            lp.add_le(&r, 0.0);
        }
        for k in 0..n {
            let mut up = linalg::zeros(n + 1);
            up[k] = 1.0;
            lp.add_le(&up, 1.0);
            let mut dn = linalg::zeros(n + 1);
            dn[k] = -1.0;
            lp.add_le(&dn, 1.0);
        }
        let mut cap = linalg::zeros(n + 1);
        cap[n] = 1.0;
        lp.add_le(&cap, 1.0);
        if let LpOutcome::Optimal { x, value } = lp.solve()? {
            if value > 1e-7 {
                let dir = x[..n].to_vec();
                if let Some(u) = linalg::normalize(&dir, 1e-12) {
                    return Ok(Some(u));
                }
            }
        }
    }
    Ok(None)
}

/// Extremality check for the cone system (Holds means an
/// emptiness-certified shift family exists). Uses the system's own shifts
/// when nonzero, then searches candidate shifts along facet normals of
/// the cones' pieces. A single-cone system is never extremal; an interior
/// common direction certifies non-extremality outright.
pub fn check_conic_extremality(
    system: &ConeSystem,
) -> Result<Verdict<Vec<f64>>, SolverError> {
    system.validate()?;
    let m = system.truncation();
    if m == 1 {
        // A translate of a nonempty cone is nonempty.
        let p = system.cones[0]
            .project(&linalg::zeros(system.dimension))?
            .point;
        return Ok(Verdict::Violated {
            witness: linalg::sub(&p, &system.shifts[0]),
        });
    }
    let has_shifts = system.shifts.iter().any(|a| linalg::norm(a) > 0.0);
    if has_shifts {
        if let Some(true) = shifted_intersection_empty(&system.cones, &system.shifts)? {
            return Ok(Verdict::Holds);
        }
    }
    // Candidate search: single-cone facet shifts.
    for (i, cone) in system.cones.iter().enumerate() {
        let Ok(pieces) = spec_pieces(cone) else {
            continue;
        };
        for piece in &pieces {
            for row in piece.completed().facet_normals.as_deref().unwrap_or(&[]) {
                let Some(dir) = linalg::normalize(row, 1e-12) else {
                    continue;
                };
                let mut shifts = vec![linalg::zeros(system.dimension); m];
                shifts[i] = dir.clone();
                if let Some(true) = shifted_intersection_empty(&system.cones, &shifts)? {
                    return Ok(Verdict::Holds);
                }
            }
        }
    }
    if let Some(u) = interior_common_direction(system)? {
        return Ok(Verdict::Violated { witness: u });
    }
    Ok(Verdict::unknown(
        "no certifying shift family found within the search budget",
    ))
}

/// Emptiness of the shifted intersection is invariant under positive
/// scaling of the shifts; `Holds` means the verdict matched the base
/// verdict at every eta in the grid.
pub fn scaling_check(system: &ConeSystem, eta_grid: &[f64]) -> Result<Verdict<f64>, SolverError> {
    let base = match shifted_intersection_empty(&system.cones, &system.shifts)? {
        Some(b) => b,
        None => return Ok(Verdict::unknown("no exact emptiness oracle for these kinds")),
    };
    for &eta in eta_grid {
        if eta <= 0.0 {
            return Err(SolverError::Invalid("eta grid must be positive".into()));
        }
        let scaled: Vec<Vec<f64>> = system.shifts.iter().map(|a| linalg::scale(a, eta)).collect();
        match shifted_intersection_empty(&system.cones, &scaled)? {
            Some(b) if b == base => {}
            Some(_) => return Ok(Verdict::Violated { witness: eta }),
            None => return Ok(Verdict::unknown("emptiness oracle unavailable at eta")),
        }
    }
    Ok(Verdict::Holds)
}

pub fn default_eta_grid() -> Vec<f64> {
    (-3..=3).map(|k| 10f64.powi(k)).collect()
}

/// Witness family for the triviality of the approximate extremality
/// conditions: choose the smallest admissible index `j >= 2` with
/// `2^(1-j/2) <= eps/2` and a nonzero Frechet normal available near the
/// base point, set `||x*_j|| = sqrt(2^j)`, balance it with
/// `x*_1 = -2^(1-j) x*_j`, and rescale the family onto the normalization
/// sphere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrivialWitness {
    pub normals: Vec<Vec<f64>>,
    pub chosen_index: usize,
}

pub fn trivial_witness(
    sets: &[SetSpec],
    base: &[f64],
    eps: f64,
) -> Result<TrivialWitness, SolverError> {
    assert!(eps > 0.0);
    let m = sets.len();
    let dim = base.len();
    for j in 2..=m {
        if 2f64.powf(1.0 - j as f64 / 2.0) > eps / 2.0 {
            continue;
        }
        let Some(dir) = nonzero_frechet_normal_near(&sets[j - 1], base, eps) else {
            continue;
        };
        let mut normals = vec![linalg::zeros(dim); m];
        let big = 2f64.powf(j as f64 / 2.0); // sqrt(2^j)
        normals[j - 1] = linalg::scale(&dir, big);
        normals[0] = linalg::scale(&normals[j - 1], -(2f64.powi(1 - (j as i32))));
        // Norm mass 1 + 2^(1-j) > 1; rescale onto the sphere.
        let mass: f64 = normals
            .iter()
            .enumerate()
            .map(|(i, v)| 0.5f64.powi(i as i32 + 1) * linalg::dot(v, v))
            .sum();
        debug_assert!(mass > 1.0);
        let c = 1.0 / mass.sqrt();
        for v in normals.iter_mut() {
            *v = linalg::scale(v, c);
        }
        return Ok(TrivialWitness {
            normals,
            chosen_index: j,
        });
    }
    Err(SolverError::NoNonzeroNormal)
}

/// A unit Frechet normal of the set at some point within `eps` of `base`,
/// found structurally for polyhedral kinds and by proximal sampling
/// otherwise.
fn nonzero_frechet_normal_near(set: &SetSpec, base: &[f64], eps: f64) -> Option<Vec<f64>> {
    if let Ok(cone) = crate::poly::frechet_normal_cone_of_spec(set, base) {
        if let Some(gens) = &cone.generators {
            for g in gens {
                if let Some(u) = linalg::normalize(g, 1e-10) {
                    return Some(u);
                }
            }
        }
    }
    // Proximal sampling: project nearby probes and keep a residual ray
    // whose foot stays within eps of the base point.
    let dim = base.len();
    let r = (eps / 4.0).min(1e-2);
    for u in fans::unit_dirs(dim, 64, 0xfeed) {
        let probe = linalg::axpy(base, r, &u);
        let Ok(res) = set.project(&probe) else { continue };
        if res.distance > 1e-10 && linalg::dist(&res.point, base) < eps {
            if let Some(ray) = linalg::normalize(&linalg::sub(&probe, &res.point), 1e-12) {
                return Some(ray);
            }
        }
    }
    None
}

/// Problem file schema for the solver (`solve` subcommand input).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dimension: usize,
    pub cones: Vec<SetSpec>,
    pub shifts: Vec<Vec<f64>>,
    #[serde(default)]
    pub weights: WeightSpec,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Rule { rule: String, base: f64 },
    Explicit { explicit: Vec<f64> },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Rule {
            rule: "geometric".into(),
            base: 0.5,
        }
    }
}

impl ProblemSpec {
    pub fn build(&self) -> Result<ConeSystem, SolverError> {
        let weights = match &self.weights {
            WeightSpec::Rule { rule, base } => {
                if rule != "geometric" {
                    return Err(SolverError::Invalid(format!("unknown weight rule {rule}")));
                }
                (1..=self.cones.len())
                    .map(|i| base.powi(i as i32))
                    .collect()
            }
            WeightSpec::Explicit { explicit } => explicit.clone(),
        };
        let system = ConeSystem::with_weights(
            self.dimension,
            self.cones.clone(),
            self.shifts.clone(),
            weights,
        );
        system.validate()?;
        system.validate_cones_by_sampling(0)?;
        Ok(system)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Vertical ray and lower halfplane with shifts ((0,0),(0,1)): the
    /// hand-solved instance used throughout.
    fn two_cone_walkthrough() -> ConeSystem {
        let ray = SetSpec::PolyhedralCone {
            facet_normals: vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
        };
        let lower = SetSpec::halfspace(&[0.0, 1.0]);
        ConeSystem::new(2, vec![ray, lower], vec![vec![0.0, 0.0], vec![0.0, 1.0]])
    }

    #[test]
    fn walkthrough_minimizer_and_value() {
        let sys = two_cone_walkthrough();
        let cfg = SolverConfig::default();
        let state = minimize_phi(&sys, &[0.0, 0.0], &cfg).unwrap();
        assert!(state.converged);
        assert!(linalg::dist(&state.x, &[0.0, -1.0 / 3.0]) < 1e-9);
        assert!((state.phi2.sqrt() - (1.0f64 / 6.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn walkthrough_certificate_closed_form() {
        let sys = two_cone_walkthrough();
        let cfg = SolverConfig::default();
        let state = minimize_phi(&sys, &[0.2, 0.7], &cfg).unwrap();
        let cert = extract_certificate(&sys, &state, &cfg).unwrap();
        assert_eq!(cert.status, CertStatus::Extremal);
        let s6 = 6f64.sqrt();
        assert!(linalg::dist(&cert.normals[0], &[0.0, -s6 / 3.0]) < 1e-6);
        assert!(linalg::dist(&cert.normals[1], &[0.0, 2.0 * s6 / 3.0]) < 1e-6);
        assert!(cert.euler_residual <= 1e-8);
        assert!(cert.norm_residual <= 1e-8);
        // Moreau consistency: residual orthogonal to the cone at w_i.
        for (w, xs) in cert.projections.iter().zip(&cert.normals) {
            assert!(linalg::dot(w, xs).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_shifts_are_not_extremal() {
        let sys = ConeSystem::new(
            2,
            vec![
                SetSpec::halfspace(&[0.0, 1.0]),
                SetSpec::halfspace(&[1.0, 0.0]),
            ],
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        );
        let cert = solve_system(&sys, &SolverConfig::default()).unwrap();
        match cert.status {
            CertStatus::NotExtremal { feasible_point } => {
                assert!(sys.phi(&feasible_point).unwrap() <= 1e-7);
            }
            other => panic!("expected NotExtremal, got {other:?}"),
        }
    }

    /// Example family: upper halfplane plus {y <= x/i} for i = 2..m.
    fn slope_family(m: usize) -> Vec<SetSpec> {
        let mut cones = vec![SetSpec::halfspace(&[0.0, -1.0])];
        for i in 2..=m {
            cones.push(SetSpec::HalfplaneGraph { slope: 1.0 / i as f64 });
        }
        cones
    }

    #[test]
    fn slope_family_overlaps_on_positive_axis() {
        let m = 10;
        let sys = ConeSystem::new(2, slope_family(m), vec![vec![0.0, 0.0]; m]);
        match check_nonoverlapping(&sys).unwrap() {
            Verdict::Violated { witness } => {
                // Witness on the ray R_+ x {0}.
                assert!(witness[0] > 0.0);
                assert!(witness[1].abs() <= 1e-9, "witness {witness:?}");
            }
            other => panic!("expected Violated, got {other:?}"),
        }
    }

    #[test]
    fn upper_lower_overlap_witness_on_axis() {
        let sys = ConeSystem::new(
            2,
            vec![
                SetSpec::halfspace(&[0.0, -1.0]),
                SetSpec::halfspace(&[0.0, 1.0]),
            ],
            vec![vec![0.0, 0.0]; 2],
        );
        match check_nonoverlapping(&sys).unwrap() {
            Verdict::Violated { witness } => {
                assert!(witness[1].abs() <= 1e-9);
            }
            other => panic!("expected Violated, got {other:?}"),
        }
    }

    #[test]
    fn walkthrough_cones_do_not_overlap() {
        let sys = two_cone_walkthrough();
        assert!(check_nonoverlapping(&sys).unwrap().is_holds());
    }

    #[test]
    fn nonoverlap_lp_path_matches_2d_exact() {
        // Same system checked through the LP path by inflating to 3-D.
        let sys = ConeSystem::new(
            3,
            vec![
                SetSpec::PolyhedralCone {
                    facet_normals: vec![
                        vec![1.0, 0.0, 0.0],
                        vec![-1.0, 0.0, 0.0],
                        vec![0.0, -1.0, 0.0],
                    ],
                },
                SetSpec::PolyhedralCone {
                    facet_normals: vec![vec![0.0, 1.0, 0.0]],
                },
            ],
            vec![vec![0.0; 3]; 2],
        );
        // Common set contains the z-axis line: overlap.
        match check_nonoverlapping(&sys).unwrap() {
            Verdict::Violated { witness } => {
                assert!(witness[0].abs() < 1e-9 && witness[1].abs() < 1e-9);
                assert!(witness[2].abs() > 0.9);
            }
            other => panic!("expected Violated, got {other:?}"),
        }
    }

    #[test]
    fn conic_extremality_verdicts() {
        // The walkthrough system with its shifts is extremal.
        let sys = two_cone_walkthrough();
        assert!(check_conic_extremality(&sys).unwrap().is_holds());
        // A single cone never is.
        let single = ConeSystem::new(
            2,
            vec![SetSpec::halfspace(&[0.0, 1.0])],
            vec![vec![0.0, 1.0]],
        );
        assert!(check_conic_extremality(&single).unwrap().is_violated());
        // Upper/lower halfplanes are extremal (vertical shift separates).
        let pair = ConeSystem::new(
            2,
            vec![
                SetSpec::halfspace(&[0.0, -1.0]),
                SetSpec::halfspace(&[0.0, 1.0]),
            ],
            vec![vec![0.0, 0.0]; 2],
        );
        assert!(check_conic_extremality(&pair).unwrap().is_holds());
        // Wedge {y >= -|x|} union with the lower halfplane has interior
        // common directions: certified not extremal.
        let wedge = SetSpec::Union {
            pieces: vec![
                SetSpec::halfspace(&[1.0, -1.0]),
                SetSpec::halfspace(&[-1.0, -1.0]),
            ],
        };
        let not_ext = ConeSystem::new(
            2,
            vec![wedge, SetSpec::halfspace(&[0.0, 1.0])],
            vec![vec![0.0, 0.0]; 2],
        );
        assert!(check_conic_extremality(&not_ext).unwrap().is_violated());
    }

    #[test]
    fn scaling_invariance_of_emptiness() {
        let sys = two_cone_walkthrough();
        assert!(scaling_check(&sys, &default_eta_grid()).unwrap().is_holds());
        // eta = 1 reproduces the base verdict trivially.
        assert!(scaling_check(&sys, &[1.0]).unwrap().is_holds());
    }

    #[test]
    fn divergence_detector_reports_direction() {
        let sys = two_cone_walkthrough();
        let cfg = SolverConfig {
            divergence_factor: 1e-4,
            ..Default::default()
        };
        match minimize_phi(&sys, &[5.0, 5.0], &cfg) {
            Err(SolverError::Diverged { direction }) => {
                assert!((linalg::norm(&direction) - 1.0).abs() < 1e-9);
            }
            other => panic!("expected Diverged, got {other:?}"),
        }
    }

    #[test]
    fn trivial_witness_arithmetic() {
        let sets: Vec<SetSpec> = (0..6).map(|_| SetSpec::halfspace(&[0.0, 1.0])).collect();
        // eps = 1: smallest admissible index is 4, with norm sqrt(16) = 4
        // before the rescale onto the normalization sphere.
        let w = trivial_witness(&sets, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(w.chosen_index, 4);
        let mass = 1.0 + 0.5f64.powi(3);
        assert!((linalg::norm(&w.normals[3]) - 4.0 / mass.sqrt()).abs() < 1e-9);
        // eps = 10 admits j = 2.
        let w10 = trivial_witness(&sets, &[0.0, 0.0], 10.0).unwrap();
        assert_eq!(w10.chosen_index, 2);
        // Euler sum and normalization hold exactly.
        for wit in [&w, &w10] {
            let mut euler = vec![0.0, 0.0];
            let mut mass = 0.0;
            for (i, v) in wit.normals.iter().enumerate() {
                let wi = 0.5f64.powi(i as i32 + 1);
                euler = linalg::axpy(&euler, wi, v);
                mass += wi * linalg::dot(v, v);
            }
            assert!(linalg::norm(&euler) < 1e-12);
            assert!((mass - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_witness_needs_nonzero_normals() {
        let sets: Vec<SetSpec> = (0..6).map(|_| SetSpec::whole(2)).collect();
        match trivial_witness(&sets, &[0.0, 0.0], 1.0) {
            Err(SolverError::NoNonzeroNormal) => {}
            other => panic!("expected NoNonzeroNormal, got {other:?}"),
        }
    }

    #[test]
    fn homogeneity_of_certificates() {
        // Scaling the shifts scales the minimizer and leaves the
        // normalized certificate invariant.
        let base = two_cone_walkthrough();
        let cfg = SolverConfig::default();
        let cert1 = solve_system(&base, &cfg).unwrap();
        let eta = 3.5;
        let scaled = ConeSystem::new(
            2,
            base.cones.clone(),
            base.shifts.iter().map(|a| linalg::scale(a, eta)).collect(),
        );
        let cert2 = solve_system(&scaled, &cfg).unwrap();
        assert!(linalg::dist(&cert2.x_tilde, &linalg::scale(&cert1.x_tilde, eta)) < 1e-7);
        for (a, b) in cert1.normals.iter().zip(&cert2.normals) {
            assert!(linalg::dist(a, b) < 1e-7);
        }
    }

    #[test]
    fn hilbert_chain_truncation_is_feasible() {
        // Halfspace chain in R^n with the first set shifted: the truncated
        // system always admits a feasible point.
        for n in [4usize, 8] {
            let mut cones = vec![SetSpec::Halfspace {
                normal: linalg::basis(n, 0),
            }];
            for i in 1..n {
                let mut v = linalg::zeros(n);
                v[i] = 1.0;
                v[i - 1] = -1.0;
                cones.push(SetSpec::Halfspace { normal: v });
            }
            let mut shifts = vec![linalg::zeros(n); n];
            shifts[0] = linalg::basis(n, 0);
            let sys = ConeSystem::new(n, cones, shifts);
            let cert = solve_system(&sys, &SolverConfig::default()).unwrap();
            match cert.status {
                CertStatus::NotExtremal { feasible_point } => {
                    assert!(sys.phi(&feasible_point).unwrap() <= 1e-9);
                }
                other => panic!("expected NotExtremal, got {other:?}"),
            }
        }
    }

    #[test]
    fn problem_spec_round_trip() {
        let json = r#"{
            "dimension": 2,
            "cones": [
                {"kind": "halfspace", "normal": [0.0, 1.0]},
                {"kind": "halfplane_graph", "slope": 0.5}
            ],
            "shifts": [[0.0, 0.0], [0.0, 1.0]],
            "weights": {"rule": "geometric", "base": 0.5}
        }"#;
        let spec: ProblemSpec = serde_json::from_str(json).unwrap();
        let sys = spec.build().unwrap();
        assert_eq!(sys.weights, vec![0.5, 0.25]);
        let explicit = r#"{
            "dimension": 2,
            "cones": [{"kind": "halfspace", "normal": [0.0, 1.0]}],
            "shifts": [[0.0, 0.0]],
            "weights": {"explicit": [0.75]}
        }"#;
        let spec: ProblemSpec = serde_json::from_str(explicit).unwrap();
        assert_eq!(spec.build().unwrap().weights, vec![0.75]);
    }
}

#[cfg(test)]
mod scaling_tests {
    use super::*;

    /// Emptiness verdicts are scale-invariant on the nonempty side too:
    /// the shifted slope-family truncation stays feasible at every eta.
    #[test]
    fn nonempty_verdict_invariant_across_eta() {
        let mut cones = vec![SetSpec::halfspace(&[0.0, -1.0])];
        for i in 2..=10 {
            cones.push(SetSpec::HalfplaneGraph {
                slope: 1.0 / i as f64,
            });
        }
        let mut shifts = vec![vec![0.0, 0.0]; 10];
        shifts[0] = vec![0.0, -1.0];
        let sys = ConeSystem::new(2, cones, shifts);
        assert!(scaling_check(&sys, &default_eta_grid()).unwrap().is_holds());
    }
}
