//! Decomposition of Frechet normals over countable cone intersections.
//!
//! The constructions lift the cone family into one extra dimension,
//! solve the conic extremal problem there, and map the certificate back:
//! with `(x*_i, lambda_i)` the lifted normals and `lambda_1 > 0`,
//!
//! `x~*_1 = 2 (x*_1 + lambda_1 xstar) / lambda_1`,
//! `x~*_i = 2 x*_i / lambda_1  (i >= 2)`
//!
//! reproduces `xstar = sum_i 2^-i x~*_i` up to the requested epsilon.
//! The fuzzy mode halves epsilon internally so the delivered residual
//! meets the stated bound rather than the proof's doubled one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fans::unit_dirs;
use crate::linalg;
use crate::lp::{LpBuilder, LpError, LpOutcome};
use crate::nnls;
use crate::poly::{extreme_rays, spec_pieces, ConeError, PolyCone};
use crate::sets::{HalflineSign, SetSpec};
use crate::solver::{
    minimize_phi, solve_system, CertStatus, ConeSystem, SolverConfig, SolverError,
};
use crate::verdict::Verdict;

const LAMBDA_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum DecompError {
    #[error("normal qualification condition violated")]
    QCViolated { lambdas: Vec<f64> },
    #[error("lifted projection could not certify tolerance: {0}")]
    LiftProjectionFailure(String),
    #[error("strict negativity fails on the intersection")]
    StrictNegativityFails { witness: Vec<f64> },
    #[error("unsupported kind: {0}")]
    UnsupportedKind(String),
    #[error("the target vector is falsified as a Frechet normal of the intersection")]
    NotFrechetNormal { witness: Vec<f64> },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Qualification-condition report: `lp_value` is the maximal mass of a
/// nonnegative combination of normal generators summing to zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QcReport {
    pub outcome: Verdict<Vec<f64>>,
    pub lp_value: f64,
    /// Lambda per generator, grouped per cone, for a violating combination.
    pub witness_lambdas: Vec<Vec<f64>>,
}

/// Normal qualification condition over finitely generated limiting normal
/// cones: only the trivial nonnegative combination of the generators may
/// sum to zero. Decided exactly by one LP.
pub fn check_normal_qualification(normal_cones: &[PolyCone]) -> Result<QcReport, DecompError> {
    let dim = normal_cones
        .first()
        .map(|c| c.dimension())
        .ok_or_else(|| DecompError::UnsupportedKind("empty family".into()))?;
    let mut gens: Vec<(usize, Vec<f64>)> = Vec::new();
    for (i, c) in normal_cones.iter().enumerate() {
        if !c.convex {
            return Err(DecompError::UnsupportedKind(format!(
                "normal cone {i} is not finitely generated convex"
            )));
        }
        let completed = c.completed();
        let Some(g) = &completed.generators else {
            return Err(DecompError::UnsupportedKind(format!(
                "normal cone {i} has no generator representation"
            )));
        };
        for v in g {
            if let Some(u) = linalg::normalize(v, 1e-12) {
                gens.push((i, u));
            }
        }
    }
    if gens.is_empty() {
        // Every normal cone is {0}: the condition holds vacuously.
        return Ok(QcReport {
            outcome: Verdict::Holds,
            lp_value: 0.0,
            witness_lambdas: vec![Vec::new(); normal_cones.len()],
        });
    }
    let k = gens.len();
    let mut lp = LpBuilder::new(k).all_nonneg().maximize(&vec![1.0; k]);
    for coord in 0..dim {
        let row: Vec<f64> = gens.iter().map(|(_, g)| g[coord]).collect();
        lp.add_eq(&row, 0.0);
    }
    lp.add_le(&vec![1.0; k], 1.0);
    let LpOutcome::Optimal { x: lambda, value } = lp.solve()? else {
        return Err(DecompError::UnsupportedKind(
            "qualification LP did not solve".into(),
        ));
    };
    let mut witness_lambdas = vec![Vec::new(); normal_cones.len()];
    for ((i, _), l) in gens.iter().zip(&lambda) {
        witness_lambdas[*i].push(*l);
    }
    if value <= 1e-9 {
        Ok(QcReport {
            outcome: Verdict::Holds,
            lp_value: 0.0,
            witness_lambdas: vec![Vec::new(); normal_cones.len()],
        })
    } else {
        Ok(QcReport {
            outcome: Verdict::Violated {
                witness: lambda.clone(),
            },
            lp_value: value,
            witness_lambdas,
        })
    }
}

/// Limiting normal cone `N(0; cone)` of a convex polyhedral kind, as a
/// finitely generated cone (the polar).
pub fn normal_cone_at_origin(spec: &SetSpec) -> Result<PolyCone, DecompError> {
    let pieces = spec_pieces(spec).map_err(DecompError::Cone)?;
    if pieces.len() != 1 {
        return Err(DecompError::UnsupportedKind(
            "limiting normal cone of a union is not finitely generated convex".into(),
        ));
    }
    Ok(pieces[0].polar().map_err(DecompError::Cone)?)
}

/// Lifted system of the intersection-rule construction in `R^(n+1)`:
/// the first cone carries the target normal and the epsilon margin, every
/// other cone is crossed with the nonnegative halfline. The countable
/// tail (whole-space cones crossed with `R_+`) is folded into one
/// explicit cone whose weight matches the summed tail mass, so the
/// truncated lift agrees with the countable construction exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftedSystem {
    pub system: ConeSystem,
    pub gamma: f64,
    pub epsilon: f64,
}

pub fn build_lifted(cones: &[SetSpec], xstar: &[f64], epsilon: f64, gamma: f64) -> LiftedSystem {
    let m = cones.len();
    let n = xstar.len();
    let mut lifted: Vec<SetSpec> = Vec::with_capacity(m + 1);
    lifted.push(SetSpec::NormalLift {
        inner: Box::new(cones[0].clone()),
        xstar: xstar.to_vec(),
        epsilon,
    });
    for c in &cones[1..] {
        lifted.push(SetSpec::Product {
            inner: Box::new(c.clone()),
            sign: HalflineSign::Plus,
        });
    }
    lifted.push(SetSpec::Product {
        inner: Box::new(SetSpec::whole(n)),
        sign: HalflineSign::Plus,
    });
    let mut weights: Vec<f64> = (1..=m).map(|i| 0.5f64.powi(i as i32)).collect();
    weights.push(0.5f64.powi(m as i32)); // sum of the tail 2^-(m+1) + ...
    let mut shifts = vec![linalg::zeros(n + 1); m + 1];
    shifts[0][n] = gamma;
    LiftedSystem {
        system: ConeSystem::with_weights(n + 1, lifted, shifts, weights),
        gamma,
        epsilon,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompTerm {
    pub index: usize,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    pub x_star: Vec<f64>,
    pub terms: Vec<DecompTerm>,
    /// `|| x_star - sum_i 2^-i terms_i ||`.
    pub residual: f64,
    /// Requested epsilon (0 in refined mode).
    pub epsilon: f64,
    /// Epsilon actually used in the lift (halved to absorb the proof's
    /// doubled bound).
    pub lift_epsilon: f64,
    pub mode: String,
    pub lambda1: f64,
}

impl Decomposition {
    pub fn term_vectors(&self) -> Vec<Vec<f64>> {
        self.terms.iter().map(|t| t.vector.clone()).collect()
    }
}

fn qc_pre(cones: &[SetSpec]) -> Result<(), DecompError> {
    let normals: Vec<PolyCone> = cones
        .iter()
        .map(normal_cone_at_origin)
        .collect::<Result<_, _>>()?;
    let report = check_normal_qualification(&normals)?;
    if let Verdict::Violated { witness } = report.outcome {
        return Err(DecompError::QCViolated { lambdas: witness });
    }
    Ok(())
}

/// Shared solve-and-map-back for both decomposition modes.
fn decompose_via_lift(
    xstar: &[f64],
    cones: &[SetSpec],
    lift_epsilon: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<Vec<f64>>, f64, f64), DecompError> {
    let n = xstar.len();
    let m = cones.len();
    let lifted = build_lifted(cones, xstar, lift_epsilon, 1.0);
    let cert = solve_system(&lifted.system, cfg)?;
    match &cert.status {
        CertStatus::Extremal => {}
        CertStatus::NotExtremal { .. } => {
            return Err(DecompError::LiftProjectionFailure(
                "lifted system is not extremal; the target is not a strict Frechet normal".into(),
            ))
        }
        other => {
            return Err(DecompError::LiftProjectionFailure(format!(
                "lifted solve ended with {other:?}"
            )))
        }
    }
    let lambda1 = cert.normals[0][n];
    if lambda1 <= LAMBDA_TOL {
        // The proof shows lambda_1 = 0 contradicts the qualification
        // condition; numerically this surfaces as a violation report.
        return Err(DecompError::QCViolated {
            lambdas: vec![lambda1],
        });
    }
    // First term: re-project x*_1 + lambda_1 xstar onto N(0; cone_1).
    let head1 = &cert.normals[0][..n];
    let cand = linalg::axpy(head1, lambda1, xstar);
    let n1 = project_onto_normal_cone(&cones[0], &cand)?;
    let moved = linalg::dist(&n1, &cand);
    let allowance = 2.0 * lambda1 * lift_epsilon + 1e-6;
    if moved > allowance {
        return Err(DecompError::LiftProjectionFailure(format!(
            "first normal re-projection moved {moved:.3e} > {allowance:.3e}"
        )));
    }
    let mut terms = Vec::with_capacity(m);
    terms.push(linalg::scale(&n1, 2.0 / lambda1));
    for i in 1..m {
        let head = cert.normals[i][..n].to_vec();
        let mapped = linalg::scale(&head, 2.0 / lambda1);
        let cleaned = project_onto_normal_cone(&cones[i], &mapped)?;
        if linalg::dist(&cleaned, &mapped) > 1e-6 * (1.0 + linalg::norm(&mapped)) {
            return Err(DecompError::LiftProjectionFailure(format!(
                "mapped normal {i} fails polar membership"
            )));
        }
        terms.push(cleaned);
    }
    let mut sum = linalg::zeros(n);
    for (i, t) in terms.iter().enumerate() {
        sum = linalg::axpy(&sum, 0.5f64.powi(i as i32 + 1), t);
    }
    let residual = linalg::dist(xstar, &sum);
    Ok((terms, residual, lambda1))
}

fn project_onto_normal_cone(cone: &SetSpec, v: &[f64]) -> Result<Vec<f64>, DecompError> {
    let normal = normal_cone_at_origin(cone)?;
    let gens = normal
        .completed()
        .generators
        .ok_or_else(|| DecompError::UnsupportedKind("normal cone lacks generators".into()))?;
    Ok(nnls::solve(&gens, v, 1e-13, 100_000).point)
}

/// Fuzzy intersection rule: decompose a Frechet normal of the
/// intersection into weighted limiting normals with residual at most
/// `epsilon`. When the target is strictly negative on the punctured
/// intersection the exact lift applies and the residual collapses to
/// solver tolerance; otherwise the lift runs at `epsilon / 2`, which
/// absorbs the doubled bound the construction would otherwise leak.
pub fn fuzzy_decompose(
    xstar: &[f64],
    epsilon: f64,
    cones: &[SetSpec],
    cfg: &SolverConfig,
) -> Result<Decomposition, DecompError> {
    assert!(epsilon > 0.0);
    qc_pre(cones)?;
    frechet_pre(xstar, cones)?;
    if linalg::norm(xstar) == 0.0 {
        return Ok(zero_decomposition(xstar, cones.len(), epsilon, "fuzzy"));
    }
    let lift_epsilon = if strict_negativity_pre(xstar, cones).is_ok() {
        0.0
    } else {
        epsilon / 2.0
    };
    let (terms, residual, lambda1) = decompose_via_lift(xstar, cones, lift_epsilon, cfg)?;
    let mut d = package(xstar, terms, residual, epsilon, lift_epsilon, "fuzzy");
    d.lambda1 = lambda1;
    Ok(d)
}

/// Refined representation: exact decomposition under strict negativity of
/// the target on the intersection.
pub fn refined_decompose(
    xstar: &[f64],
    cones: &[SetSpec],
    cfg: &SolverConfig,
) -> Result<Decomposition, DecompError> {
    qc_pre(cones)?;
    strict_negativity_pre(xstar, cones)?;
    if linalg::norm(xstar) == 0.0 {
        return Ok(zero_decomposition(xstar, cones.len(), 0.0, "refined"));
    }
    let (terms, residual, lambda1) = decompose_via_lift(xstar, cones, 0.0, cfg)?;
    let mut d = package(xstar, terms, residual, 0.0, 0.0, "refined");
    d.lambda1 = lambda1;
    Ok(d)
}

fn zero_decomposition(xstar: &[f64], m: usize, epsilon: f64, mode: &str) -> Decomposition {
    Decomposition {
        x_star: xstar.to_vec(),
        terms: (1..=m)
            .map(|index| DecompTerm {
                index,
                vector: linalg::zeros(xstar.len()),
            })
            .collect(),
        residual: 0.0,
        epsilon,
        lift_epsilon: epsilon / 2.0,
        mode: mode.into(),
        lambda1: f64::NAN,
    }
}

fn package(
    xstar: &[f64],
    terms: Vec<Vec<f64>>,
    residual: f64,
    epsilon: f64,
    lift_epsilon: f64,
    mode: &str,
) -> Decomposition {
    Decomposition {
        x_star: xstar.to_vec(),
        terms: terms
            .into_iter()
            .enumerate()
            .map(|(i, vector)| DecompTerm {
                index: i + 1,
                vector,
            })
            .collect(),
        residual,
        epsilon,
        lift_epsilon,
        mode: mode.into(),
        lambda1: f64::NAN,
    }
}

/// The target must not be falsified as a Frechet normal of the
/// intersection at the origin (exact membership ratio check on sampled
/// intersection points for polyhedral data).
fn frechet_pre(xstar: &[f64], cones: &[SetSpec]) -> Result<(), DecompError> {
    let Some(rows) = intersection_rows(cones) else {
        return Ok(()); // no exact handle; the lift itself will judge
    };
    if rows.is_empty() {
        // Intersection is the whole space: only the zero normal survives.
        if linalg::norm(xstar) > 0.0 {
            return Err(DecompError::NotFrechetNormal {
                witness: xstar.to_vec(),
            });
        }
        return Ok(());
    }
    let n = xstar.len();
    for r in extreme_rays(&rows, n) {
        if linalg::dot(xstar, &r) > 1e-9 {
            return Err(DecompError::NotFrechetNormal { witness: r });
        }
    }
    Ok(())
}

/// Strict negativity of the target on the punctured intersection,
/// verified exactly by ray enumeration for polyhedral data and by a
/// sampled sphere search otherwise.
fn strict_negativity_pre(xstar: &[f64], cones: &[SetSpec]) -> Result<(), DecompError> {
    if linalg::norm(xstar) == 0.0 {
        // The zero normal is strictly negative on nothing; it only
        // decomposes trivially, which the caller handles.
        return Ok(());
    }
    if let Some(rows) = intersection_rows(cones) {
        let n = xstar.len();
        for r in extreme_rays(&rows, n) {
            if linalg::dot(xstar, &r) >= -1e-10 {
                return Err(DecompError::StrictNegativityFails { witness: r });
            }
        }
        return Ok(());
    }
    // Sampled fallback: search near-common unit directions.
    let n = xstar.len();
    for u in unit_dirs(n, 256, 0xbead) {
        let mut x = u.clone();
        let mut ok = true;
        for _ in 0..200 {
            let mut avg = linalg::zeros(n);
            for c in cones {
                match c.project(&x) {
                    Ok(res) => avg = linalg::add(&avg, &res.point),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                break;
            }
            match linalg::normalize(&linalg::scale(&avg, 1.0 / cones.len() as f64), 1e-9) {
                Some(nx) => {
                    let moved = linalg::dist(&nx, &x);
                    x = nx;
                    if moved < 1e-12 {
                        break;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok
            && cones.iter().all(|c| c.contains(&x, 1e-6))
            && linalg::dot(xstar, &x) >= -1e-8
        {
            return Err(DecompError::StrictNegativityFails { witness: x });
        }
    }
    Ok(())
}

/// Concatenated H-representation of the intersection when every cone is a
/// single convex polyhedral piece.
fn intersection_rows(cones: &[SetSpec]) -> Option<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for c in cones {
        rows.extend(c.polyhedral_rows()?);
    }
    Some(rows)
}

/// Interior inclusion: every sampled interior point of the Frechet normal
/// cone of the intersection must decompose as a finite nonnegative
/// combination of the families' normal generators.
pub fn interior_inclusion_check(
    cones: &[SetSpec],
    samples: usize,
    seed: u64,
) -> Result<Verdict<Vec<f64>>, DecompError> {
    let Some(rows) = intersection_rows(cones) else {
        return Err(DecompError::UnsupportedKind(
            "interior inclusion needs polyhedral cones".into(),
        ));
    };
    let n = cones[0].dimension();
    if rows.is_empty() {
        return Ok(Verdict::Holds); // whole space: Frechet cone {0}, empty interior
    }
    // Frechet normal cone of the intersection: conic hull of all rows.
    let hull = PolyCone::from_generators(rows.clone()).completed();
    let facets = hull.facet_normals.clone().unwrap_or_default();
    let mut gens: Vec<Vec<f64>> = Vec::new();
    for c in cones {
        let nc = normal_cone_at_origin(c)?.completed();
        gens.extend(nc.generators.unwrap_or_default());
    }
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut tested = 0usize;
    let mut tries = 0usize;
    while tested < samples && tries < samples * 200 {
        tries += 1;
        let mut x = linalg::zeros(n);
        for g in &rows {
            let w: f64 = rand::Rng::gen_range(&mut rng, 0.05..1.0);
            x = linalg::axpy(&x, w, g);
        }
        let Some(u) = linalg::normalize(&x, 1e-9) else {
            continue;
        };
        // Strict interiority filter.
        if !facets
            .iter()
            .all(|f| linalg::dot(f, &u) <= -1e-6 * linalg::norm(f).max(1.0))
        {
            continue;
        }
        tested += 1;
        // Decomposability LP: u = sum lambda_r g_r, lambda >= 0.
        let k = gens.len();
        if k == 0 {
            return Ok(Verdict::Violated { witness: u });
        }
        let mut lp = LpBuilder::new(k).all_nonneg().maximize(&linalg::zeros(k));
        for coord in 0..n {
            let row: Vec<f64> = gens.iter().map(|g| g[coord]).collect();
            lp.add_eq(&row, u[coord]);
        }
        match lp.solve()? {
            LpOutcome::Optimal { .. } => {}
            _ => return Ok(Verdict::Violated { witness: u }),
        }
    }
    if tested == 0 {
        // No interior (the Frechet cone is degenerate): vacuously true.
        return Ok(Verdict::Holds);
    }
    Ok(Verdict::Holds)
}

/// Two-sided Hausdorff check on unit-ball slices between the closure of
/// finite sums of the normal cones and the Frechet normal cone of the
/// intersection. For normally regular (here: convex polyhedral) families
/// the two agree.
pub fn regular_equality_gap(cones: &[SetSpec], samples: usize) -> Result<f64, DecompError> {
    let Some(rows) = intersection_rows(cones) else {
        return Err(DecompError::UnsupportedKind(
            "equality check needs polyhedral cones".into(),
        ));
    };
    let n = cones[0].dimension();
    let mut sum_gens: Vec<Vec<f64>> = Vec::new();
    for c in cones {
        sum_gens.extend(
            normal_cone_at_origin(c)?
                .completed()
                .generators
                .unwrap_or_default(),
        );
    }
    // Route A: conic hull of summed normal generators.
    // Route B: polar of the intersection, via extreme rays of the polar's
    // H-representation.
    let frechet_gens = if rows.is_empty() {
        Vec::new()
    } else {
        PolyCone::from_facets(rows).polar()?.generators.unwrap_or_default()
    };
    let project_capped = |gens: &[Vec<f64>], u: &[f64]| -> Vec<f64> {
        if gens.is_empty() {
            return linalg::zeros(n);
        }
        let p = nnls::solve(gens, u, 1e-13, 100_000).point;
        let norm = linalg::norm(&p);
        if norm > 1.0 {
            linalg::scale(&p, 1.0 / norm)
        } else {
            p
        }
    };
    let mut gap: f64 = 0.0;
    for u in unit_dirs(n, samples, 0xcafe) {
        let a = project_capped(&sum_gens, &u);
        let b = project_capped(&frechet_gens, &u);
        // Points of one slice must be near the other slice.
        let da = linalg::dist(&a, &project_capped(&frechet_gens, &a));
        let db = linalg::dist(&b, &project_capped(&sum_gens, &b));
        gap = gap.max(da).max(db);
    }
    Ok(gap)
}

/// Run a lifted solve for diagnostics: exposes the minimizer of the
/// lifted metric functional from a given start.
pub fn lifted_minimize(
    lifted: &LiftedSystem,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<crate::solver::SolverState, SolverError> {
    minimize_phi(&lifted.system, x0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lower() -> SetSpec {
        SetSpec::halfspace(&[0.0, 1.0])
    }
    fn left() -> SetSpec {
        SetSpec::halfspace(&[1.0, 0.0])
    }
    fn upper() -> SetSpec {
        SetSpec::halfspace(&[0.0, -1.0])
    }

    #[test]
    fn qc_examples() {
        // Lower/upper pair: opposite normals violate the condition.
        let bad = vec![
            normal_cone_at_origin(&lower()).unwrap(),
            normal_cone_at_origin(&upper()).unwrap(),
        ];
        let rep = check_normal_qualification(&bad).unwrap();
        assert!(rep.outcome.is_violated());
        assert!(rep.lp_value > 0.5);
        // Witness combination sums to zero.
        if let Verdict::Violated { witness } = &rep.outcome {
            assert!((witness.iter().sum::<f64>() - rep.lp_value).abs() < 1e-9);
        }
        // Left/lower pair: independent rays, only the trivial combination.
        let good = vec![
            normal_cone_at_origin(&left()).unwrap(),
            normal_cone_at_origin(&lower()).unwrap(),
        ];
        let rep = check_normal_qualification(&good).unwrap();
        assert!(rep.outcome.is_holds());
        assert_eq!(rep.lp_value, 0.0);
    }

    #[test]
    fn qc_slope_family() {
        // Generators {(0,-1)} and {(-1,i)}: the first coordinate forces
        // every slope multiplier to zero, then the vertical one follows.
        let mut cones = vec![normal_cone_at_origin(&upper()).unwrap()];
        for i in 2..=10 {
            cones.push(PolyCone::from_generators(vec![vec![-1.0, i as f64]]));
        }
        assert!(check_normal_qualification(&cones).unwrap().outcome.is_holds());
    }

    #[test]
    fn refined_quadrant_decomposition() {
        // Cones {lower, left}, xstar = (1,1): forced terms (0,2), (4,0).
        let cones = vec![lower(), left()];
        let d = refined_decompose(&[1.0, 1.0], &cones, &SolverConfig::default()).unwrap();
        assert!(d.residual <= 1e-7, "residual {}", d.residual);
        assert!(linalg::dist(&d.terms[0].vector, &[0.0, 2.0]) < 1e-6);
        assert!(linalg::dist(&d.terms[1].vector, &[4.0, 0.0]) < 1e-6);
    }

    #[test]
    fn refined_needs_strict_negativity() {
        let cones = vec![lower(), left()];
        match refined_decompose(&[1.0, 0.0], &cones, &SolverConfig::default()) {
            Err(DecompError::StrictNegativityFails { witness }) => {
                // (0,-1) (or a scaling) annihilates (1,0).
                assert!(linalg::dot(&[1.0, 0.0], &witness).abs() < 1e-9);
            }
            other => panic!("expected StrictNegativityFails, got {other:?}"),
        }
    }

    #[test]
    fn fuzzy_quadrant_within_epsilon() {
        let cones = vec![lower(), left()];
        for eps in [0.1, 0.01] {
            let d = fuzzy_decompose(&[1.0, 1.0], eps, &cones, &SolverConfig::default()).unwrap();
            assert!(d.residual <= eps, "eps {eps}: residual {}", d.residual);
        }
    }

    #[test]
    fn fuzzy_zero_normal_is_trivial() {
        let cones = vec![lower(), left()];
        let d = fuzzy_decompose(&[0.0, 0.0], 0.1, &cones, &SolverConfig::default()).unwrap();
        assert_eq!(d.residual, 0.0);
        assert!(d.terms.iter().all(|t| linalg::norm(&t.vector) == 0.0));
    }

    #[test]
    fn fuzzy_rejects_qc_violation() {
        let cones = vec![lower(), upper()];
        match fuzzy_decompose(&[1.0, 0.0], 0.1, &cones, &SolverConfig::default()) {
            Err(DecompError::QCViolated { .. }) => {}
            other => panic!("expected QCViolated, got {other:?}"),
        }
    }

    #[test]
    fn single_cone_refined_doubles_the_normal() {
        // Third quadrant: the polar is the full first quadrant and (1,1)
        // sits strictly inside it.
        let third = SetSpec::PolyhedralCone {
            facet_normals: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        let d = refined_decompose(&[1.0, 1.0], &[third], &SolverConfig::default()).unwrap();
        assert!(d.residual <= 1e-7, "residual {}", d.residual);
        assert!(linalg::dist(&d.terms[0].vector, &[2.0, 2.0]) < 1e-6);
    }

    #[test]
    fn interior_inclusion_on_quadrant() {
        let cones = vec![lower(), left()];
        let v = interior_inclusion_check(&cones, 64, 9).unwrap();
        assert!(v.is_holds());
    }

    #[test]
    fn regular_equality_gap_small() {
        let cones = vec![lower(), left()];
        let gap = regular_equality_gap(&cones, 256).unwrap();
        assert!(gap <= 1e-6, "gap {gap}");
    }

    #[test]
    fn rejects_non_frechet_target() {
        // (0,1) points into the intersection of {lower, left}? No:
        // (-1,-1)-directions make <(0,1), x> < 0... use (−1,−1) which is
        // inside the intersection cone, hence not a Frechet normal target.
        let cones = vec![lower(), left()];
        match fuzzy_decompose(&[-1.0, -1.0], 0.1, &cones, &SolverConfig::default()) {
            Err(DecompError::NotFrechetNormal { .. }) => {}
            other => panic!("expected NotFrechetNormal, got {other:?}"),
        }
    }
}
