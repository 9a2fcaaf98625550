//! Tangential normal enclosedness and approximate normality checks, plus
//! the end-to-end contingent extremal pipeline.
//!
//! Both property checks are statistical falsifiers: in finite dimension
//! the properties provably hold for contingent cones of closed sets, so a
//! `Violated` outcome indicts the estimators, not the theory, and the
//! test suite treats it as a build failure.

use serde::{Deserialize, Serialize};

use crate::cone2::{angle_of, Cone2};
use crate::decomp::DecompError;
use crate::fans::{self, SamplingParams};
use crate::functions::TangentShape;
use crate::linalg;
use crate::lp::{LpBuilder, LpOutcome};
use crate::poly::{spec_pieces, ConeError, PolyCone};
use crate::sets::{spec_from_cone2, GraphSense, SetSpec};
use crate::solver::{
    check_conic_extremality, check_nonoverlapping, solve_system, CertStatus, ConeSystem,
    NormalCertificate, SolverConfig, SolverError,
};
use crate::verdict::Verdict;

#[derive(Debug, thiserror::Error)]
pub enum TangencyError {
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Set(#[from] crate::sets::SetError),
}

/// Replay data for a falsified tangency trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TangencyWitness {
    pub direction: Vec<f64>,
    pub normal: Vec<f64>,
    pub witness: Vec<f64>,
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TangencyReport {
    pub property: String,
    pub outcome: Verdict<TangencyWitness>,
    pub trials: usize,
    pub worst_margin: f64,
}

/// Exact contingent cone for structured kinds: cones are their own
/// tangent cones at the origin, polyhedral data activates facets away
/// from it, graph regions consult the function registry, shifts
/// translate, unions take active pieces.
pub fn exact_contingent_cone(set: &SetSpec, base: &[f64]) -> Option<SetSpec> {
    let scale = 1.0 + linalg::norm(base);
    match set {
        SetSpec::Halfspace { .. }
        | SetSpec::PolyhedralCone { .. }
        | SetSpec::HalfplaneGraph { .. } => {
            let rows = set.polyhedral_rows()?;
            let active: Vec<Vec<f64>> = rows
                .into_iter()
                .filter(|r| linalg::dot(r, base).abs() <= 1e-9 * scale * linalg::norm(r).max(1.0))
                .collect();
            Some(if active.is_empty() {
                SetSpec::whole(set.dimension())
            } else {
                SetSpec::PolyhedralCone {
                    facet_normals: active,
                }
            })
        }
        SetSpec::GeneratedCone { .. } => {
            if linalg::norm(base) <= 1e-12 {
                Some(set.clone())
            } else {
                None
            }
        }
        SetSpec::Epigraph {
            function, sense, ..
        } => {
            let (x, y) = (base[0], base[1]);
            let f = function.eval(x);
            let on_boundary = (y - f).abs() <= 1e-9 * scale;
            if !on_boundary {
                let inside = match sense {
                    GraphSense::Above => y > f,
                    GraphSense::Below => y < f,
                };
                return inside.then(|| SetSpec::whole(2));
            }
            let shape = match sense {
                GraphSense::Above => function.epigraph_tangent_at(x)?,
                GraphSense::Below => function.hypograph_tangent_at(x)?,
            };
            Some(shape_to_spec(shape))
        }
        SetSpec::Shifted { inner, shift } => {
            exact_contingent_cone(inner, &linalg::sub(base, shift))
        }
        SetSpec::Union { pieces } => {
            let mut active = Vec::new();
            for p in pieces {
                if p.contains(base, 1e-9 * scale) {
                    active.push(exact_contingent_cone(p, base)?);
                }
            }
            match active.len() {
                0 => None,
                1 => Some(active.pop().unwrap()),
                _ => Some(SetSpec::Union { pieces: active }),
            }
        }
        SetSpec::Ball { center, radius } => {
            if *radius == 0.0 {
                return Some(SetSpec::Ball {
                    center: linalg::zeros(center.len()),
                    radius: 0.0,
                });
            }
            let d = linalg::dist(base, center);
            if d < radius - 1e-9 * scale {
                Some(SetSpec::whole(center.len()))
            } else {
                Some(SetSpec::halfspace(&linalg::sub(base, center)))
            }
        }
        SetSpec::WholeSpace { dimension } => Some(SetSpec::whole(*dimension)),
        SetSpec::Product { .. } | SetSpec::NormalLift { .. } => None,
    }
}

fn shape_to_spec(shape: TangentShape) -> SetSpec {
    match shape {
        // {(u, v) : v >= s u} has outward normal (s, -1).
        TangentShape::EpiOfSlope(s) => SetSpec::halfspace(&[s, -1.0]),
        TangentShape::HypoOfSlope(s) => SetSpec::halfspace(&[-s, 1.0]),
        TangentShape::EpiNegAbs => SetSpec::Union {
            pieces: vec![
                SetSpec::halfspace(&[1.0, -1.0]),
                SetSpec::halfspace(&[-1.0, -1.0]),
            ],
        },
    }
}

/// Contingent cone as a set kind: exact when structured, otherwise a
/// polyhedral fit of the sampled direction fan (planar sets only).
pub fn contingent_cone_spec(
    set: &SetSpec,
    base: &[f64],
    budget: &SamplingParams,
) -> Result<SetSpec, ConeError> {
    if let Some(exact) = exact_contingent_cone(set, base) {
        return Ok(exact);
    }
    let fan = fans::contingent_estimate(set, base, budget)?;
    if base.len() != 2 {
        return Err(ConeError::FitFailure(
            "polyhedral fan fitting is planar only".into(),
        ));
    }
    let gap = 3.0 * std::f64::consts::TAU / budget.num_dirs as f64;
    let fit = Cone2::fit_from_dirs(&fan.directions(), gap.max(0.05));
    Ok(spec_from_cone2(&fit))
}

/// Planar sector view of a tangent-cone set kind.
fn tangent_cone2(spec: &SetSpec) -> Option<Cone2> {
    spec.cone2()
}

/// Exact limiting normal cone of a set at a point, as a planar sector
/// union, where the structure allows: planar cone kinds via the sector
/// calculus, graph regions via the registry at smooth boundary points.
pub fn exact_limiting_normal_cone2(set: &SetSpec, base: &[f64]) -> Option<Cone2> {
    if set.dimension() != 2 {
        return None;
    }
    if linalg::norm(base) <= 1e-12 {
        if let Some(c) = set.cone2() {
            return Some(c.normal_cone_at_origin());
        }
    }
    match set {
        SetSpec::Halfspace { .. } | SetSpec::PolyhedralCone { .. } | SetSpec::HalfplaneGraph { .. } => {
            // Normal cone at a possibly nonzero point: active facets only.
            let tangent = exact_contingent_cone(set, base)?;
            tangent.cone2().map(|c| c.normal_cone_at_origin())
        }
        SetSpec::Epigraph {
            function, sense, ..
        } => {
            let (x, y) = (base[0], base[1]);
            let f = function.eval(x);
            if (y - f).abs() > 1e-9 * (1.0 + linalg::norm(base)) {
                let inside = match sense {
                    GraphSense::Above => y > f,
                    GraphSense::Below => y < f,
                };
                return inside.then(Cone2::zero);
            }
            let slope = function.derivative(x)?;
            let outward = match sense {
                GraphSense::Above => vec![slope, -1.0],
                GraphSense::Below => vec![-slope, 1.0],
            };
            Some(Cone2::ray(angle_of(&outward)))
        }
        SetSpec::Shifted { inner, shift } => {
            exact_limiting_normal_cone2(inner, &linalg::sub(base, shift))
        }
        _ => None,
    }
}

/// Membership of a ray in the limiting normal cone of a set at a point:
/// exact where structure allows, otherwise matched against the projector
/// estimator within the angular tolerance.
pub fn limiting_normal_membership(
    set: &SetSpec,
    base: &[f64],
    ray: &[f64],
    budget: &SamplingParams,
) -> Verdict<Vec<f64>> {
    let Some(dir) = linalg::normalize(ray, 1e-13) else {
        return Verdict::Holds; // the zero normal is always a member
    };
    if let Some(exact) = exact_limiting_normal_cone2(set, base) {
        return if exact.contains_dir(&dir, 1e-7) {
            Verdict::Holds
        } else {
            Verdict::Violated {
                witness: dir.clone(),
            }
        };
    }
    match fans::limiting_normal_estimate(set, base, budget) {
        Ok(fan) => {
            let matched = fan
                .rays
                .iter()
                .any(|r| linalg::angle_between(&r.ray, &dir) <= 1e-2);
            if matched {
                Verdict::Holds
            } else {
                Verdict::unknown("no estimator ray within angular tolerance")
            }
        }
        Err(_) => Verdict::unknown("normal estimator returned no rays"),
    }
}

/// Tangential normal enclosedness check: every ray of `N(0; T(base; set))`
/// must appear in the limiting normal cone of the set at the base point.
/// In finite dimensions the property always holds for contingent cones,
/// so a violation means an estimator defect.
pub fn tne_check(
    set: &SetSpec,
    base: &[f64],
    budget: &SamplingParams,
) -> Result<TangencyReport, TangencyError> {
    let tangent_spec = contingent_cone_spec(set, base, budget)?;
    let normal_rays = normal_rays_of_tangent(&tangent_spec)?.rays;
    let tangent2 = tangent_cone2(&tangent_spec);
    let estimated = fans::limiting_normal_estimate(set, base, budget).ok();
    let mut worst: f64 = 0.0;
    let mut trials = 0usize;
    for ray in &normal_rays {
        trials += 1;
        let verdict = limiting_normal_membership(set, base, ray, budget);
        match verdict {
            Verdict::Holds => {}
            Verdict::Unknown { .. } | Verdict::Violated { .. } => {
                // Cross-check against the raw estimator before declaring
                // failure: the membership helper may lack exact structure.
                let angle = estimated
                    .as_ref()
                    .map(|fan| {
                        fan.rays
                            .iter()
                            .map(|r| linalg::angle_between(&r.ray, ray))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .unwrap_or(f64::INFINITY);
                worst = worst.max(angle);
                if angle > 1e-2 {
                    return Ok(TangencyReport {
                        property: "tne".into(),
                        outcome: Verdict::Violated {
                            witness: TangencyWitness {
                                direction: linalg::zeros(base.len()),
                                normal: ray.clone(),
                                witness: ray.clone(),
                                scale: angle,
                            },
                        },
                        trials,
                        worst_margin: angle,
                    });
                }
            }
        }
    }
    // Two-sided check for convex kinds: estimated rays must also lie in
    // the tangent cone's normal cone (the inclusion holds as equality).
    if is_convex_kind(set) {
        if let (Some(fan), Some(tangent)) = (&estimated, &tangent2) {
            let nc = tangent.normal_cone_at_origin();
            for r in &fan.rays {
                trials += 1;
                let gap = nc.angular_dist_to(angle_of(&r.ray));
                worst = worst.max(gap);
                if gap > 1e-2 {
                    return Ok(TangencyReport {
                        property: "tne".into(),
                        outcome: Verdict::Violated {
                            witness: TangencyWitness {
                                direction: linalg::zeros(base.len()),
                                normal: r.ray.clone(),
                                witness: r.src_x.clone(),
                                scale: gap,
                            },
                        },
                        trials,
                        worst_margin: gap,
                    });
                }
            }
        }
    }
    Ok(TangencyReport {
        property: "tne".into(),
        outcome: Verdict::Holds,
        trials,
        worst_margin: worst,
    })
}

fn is_convex_kind(set: &SetSpec) -> bool {
    match set {
        SetSpec::Halfspace { .. }
        | SetSpec::PolyhedralCone { .. }
        | SetSpec::GeneratedCone { .. }
        | SetSpec::HalfplaneGraph { .. }
        | SetSpec::Ball { .. }
        | SetSpec::WholeSpace { .. } => true,
        SetSpec::Shifted { inner, .. } => is_convex_kind(inner),
        _ => false,
    }
}

/// Tangential approximate normality check: for boundary directions `d` of
/// the tangent cone and Frechet normals `x*` at `d`, replay realizing
/// sequences and bound the local sup of `<x*, z - x_k> / t_k` over
/// `z in set, ||z - x_k|| <= t_k delta` by `2 eps delta`. The quantifier
/// order of the definition is honored by searching delta over
/// `{eps/2, eps/4, eps/8}` per eps.
pub fn tan_check(
    set: &SetSpec,
    base: &[f64],
    budget: &SamplingParams,
) -> Result<TangencyReport, TangencyError> {
    let tangent_spec = contingent_cone_spec(set, base, budget)?;
    let tangent = tangent_cone2(&tangent_spec).ok_or_else(|| {
        ConeError::FitFailure("tangent cone admits no planar sector view".into())
    })?;
    // Trial pairs (d, x*): boundary rays with their outward normals;
    // isolated rays carry both orthogonal normals.
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let quarter = std::f64::consts::FRAC_PI_2;
    let boundary_arcs = if tangent.is_full() { &[][..] } else { tangent.arcs() };
    for arc in boundary_arcs {
        if arc.span < 1e-9 {
            pairs.push((
                crate::cone2::unit(arc.start),
                crate::cone2::unit(arc.start + quarter),
            ));
            pairs.push((
                crate::cone2::unit(arc.start),
                crate::cone2::unit(arc.start - quarter),
            ));
        } else {
            pairs.push((
                crate::cone2::unit(arc.start),
                crate::cone2::unit(arc.start - quarter),
            ));
            pairs.push((
                crate::cone2::unit(arc.end()),
                crate::cone2::unit(arc.end() + quarter),
            ));
        }
    }
    let mut worst = f64::NEG_INFINITY;
    let mut trials = 0usize;
    let slack = 1e-7;
    let fine_scales: Vec<f64> = budget
        .scales
        .iter()
        .copied()
        .filter(|t| *t <= 1e-3)
        .collect();
    for (d, xstar) in &pairs {
        for eps in [1e-1, 1e-2] {
            let mut passed = false;
            let mut best_margin = f64::INFINITY;
            for delta in [eps / 2.0, eps / 4.0, eps / 8.0] {
                // limsup estimate over the realized sequence tail. Each
                // replay charges the measured sup with twice its
                // realization defect ||x_k - probe|| / t: the sup is then
                // a certified bound for a true realizing sequence, which
                // keeps the check falsification-only on sets whose
                // projections carry a documented search tolerance.
                let mut limsup = f64::NEG_INFINITY;
                for &t in fine_scales.iter().rev().take(4) {
                    let probe = linalg::axpy(base, t, d);
                    let Ok(res) = set.project(&probe) else { continue };
                    let xk = res.point;
                    if linalg::dist(&xk, base) < 0.4 * t {
                        continue;
                    }
                    let allowance = 2.0 * res.distance / t;
                    let sup =
                        local_sup(set, &xk, xstar, t, delta, budget.seed).unwrap_or(f64::NEG_INFINITY);
                    limsup = limsup.max(sup - allowance);
                }
                if limsup.is_finite() {
                    best_margin = best_margin.min(limsup - 2.0 * eps * delta);
                    if limsup <= 2.0 * eps * delta + slack {
                        passed = true;
                        break;
                    }
                }
            }
            trials += 1;
            if best_margin.is_finite() {
                worst = worst.max(best_margin);
            }
            if !passed && best_margin.is_finite() && best_margin > slack {
                return Ok(TangencyReport {
                    property: "tan".into(),
                    outcome: Verdict::Violated {
                        witness: TangencyWitness {
                            direction: d.clone(),
                            normal: xstar.clone(),
                            witness: base.to_vec(),
                            scale: best_margin,
                        },
                    },
                    trials,
                    worst_margin: best_margin,
                });
            }
        }
    }
    Ok(TangencyReport {
        property: "tan".into(),
        outcome: Verdict::Holds,
        trials,
        worst_margin: if worst.is_finite() { worst } else { 0.0 },
    })
}

/// Sampled estimate of `sup { <x*, z - xk> / t : z in set, ||z - xk|| <= t delta }`.
fn local_sup(
    set: &SetSpec,
    xk: &[f64],
    xstar: &[f64],
    t: f64,
    delta: f64,
    seed: u64,
) -> Option<f64> {
    let dim = xk.len();
    let mut sup = 0.0f64; // z = xk itself is admissible
    let radius = t * delta;
    for (si, shrink) in [1.0, 0.6, 0.3].iter().enumerate() {
        for u in fans::unit_dirs(dim, 24, seed.wrapping_add(si as u64)) {
            let probe = linalg::axpy(xk, radius * shrink, &u);
            let Ok(res) = set.project(&probe) else {
                continue;
            };
            let z = res.point;
            if linalg::dist(&z, xk) > radius * 1.000001 {
                continue;
            }
            sup = sup.max(linalg::dot(xstar, &linalg::sub(&z, xk)) / t);
        }
    }
    Some(sup)
}

/// Ray bundles of a limiting normal cone used by the Euler-equation
/// solvability test: convex bundles may combine freely, nonconvex bundles
/// contribute one ray at a time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalRays {
    pub rays: Vec<Vec<f64>>,
    pub convex: bool,
}

/// Solvability of the generalized Euler equation over the given normal
/// cones: `Ok(Some(normals))` when a nontrivial weighted selection of
/// normals sums to zero (one normal per cone, rescalable onto the
/// normalization sphere), `Ok(None)` when only the trivial solution
/// exists. Convex cones enter through their generators; a nonconvex
/// (union of rays) cone is enumerated one ray per selection.
pub fn euler_conditions_check(
    reps: &[NormalRays],
) -> Result<Option<Vec<Vec<f64>>>, TangencyError> {
    let dim = reps
        .iter()
        .flat_map(|r| r.rays.first())
        .map(|v| v.len())
        .next()
        .unwrap_or(0);
    if dim == 0 {
        return Ok(None);
    }
    // Build selection alternatives per cone.
    let mut alternatives: Vec<Vec<Vec<Vec<f64>>>> = Vec::new(); // per cone: choices of generator groups
    for r in reps {
        if r.convex {
            alternatives.push(vec![r.rays.clone()]);
        } else {
            let mut choices: Vec<Vec<Vec<f64>>> =
                r.rays.iter().map(|ray| vec![ray.clone()]).collect();
            if choices.is_empty() {
                choices.push(Vec::new());
            }
            alternatives.push(choices);
        }
    }
    let mut selections: Vec<Vec<Vec<Vec<f64>>>> = vec![Vec::new()];
    for alts in &alternatives {
        let mut next = Vec::new();
        for sel in &selections {
            for choice in alts {
                let mut s = sel.clone();
                s.push(choice.clone());
                next.push(s);
            }
        }
        selections = next;
        if selections.len() > 4096 {
            return Err(TangencyError::Cone(ConeError::UnsupportedKind(
                "too many ray selections to enumerate".into(),
            )));
        }
    }
    for sel in &selections {
        let gens: Vec<(usize, Vec<f64>)> = sel
            .iter()
            .enumerate()
            .flat_map(|(i, group)| group.iter().map(move |g| (i, g.clone())))
            .collect();
        if gens.is_empty() {
            continue;
        }
        let k = gens.len();
        let mut lp = LpBuilder::new(k).all_nonneg().maximize(&vec![1.0; k]);
        for coord in 0..dim {
            let row: Vec<f64> = gens.iter().map(|(_, g)| g[coord]).collect();
            lp.add_eq(&row, 0.0);
        }
        lp.add_le(&vec![1.0; k], 1.0);
        if let LpOutcome::Optimal { x: lambda, value } = lp.solve().map_err(SolverError::Lp)? {
            if value > 1e-9 {
                // Assemble the per-cone normals of the solution.
                let mut normals = vec![linalg::zeros(dim); reps.len()];
                for ((i, g), l) in gens.iter().zip(&lambda) {
                    normals[*i] = linalg::axpy(&normals[*i], *l, g);
                }
                return Ok(Some(normals));
            }
        }
    }
    Ok(None)
}

/// Normal-cone ray bundle of a tangent-cone set kind at the origin.
pub fn normal_rays_of_tangent(spec: &SetSpec) -> Result<NormalRays, TangencyError> {
    if spec.dimension() == 2 {
        if let Some(c) = spec.cone2() {
            let n = c.normal_cone_at_origin();
            return Ok(NormalRays {
                rays: n.representative_rays(),
                convex: n.is_convex(),
            });
        }
    }
    let pieces = spec_pieces(spec).map_err(TangencyError::Cone)?;
    if pieces.len() == 1 {
        let polar = pieces[0].polar().map_err(TangencyError::Cone)?;
        return Ok(NormalRays {
            rays: polar.generators.unwrap_or_default(),
            convex: true,
        });
    }
    Err(TangencyError::Cone(ConeError::UnsupportedKind(
        "nonconvex normal bundle outside the plane".into(),
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineStatus {
    /// Full certificate produced and every membership verified.
    Certified,
    /// Tangentially extremal, but the nonoverlap hypothesis fails: no
    /// certificate is claimed.
    NoCertificate,
    NotTangentiallyExtremal,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub budget: SamplingParams,
    pub solver: SolverConfig,
    /// Set-level shifts for the classical extremality label.
    pub set_shifts: Option<Vec<Vec<f64>>>,
    /// Cone-level shifts certifying tangential extremality, when known.
    pub cone_shifts: Option<Vec<Vec<f64>>>,
    /// Neighborhood radius for the classical local check.
    pub local_radius: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            budget: SamplingParams::default(),
            solver: SolverConfig::default(),
            set_shifts: None,
            cone_shifts: None,
            local_radius: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremalPipelineReport {
    pub base_point: Vec<f64>,
    /// Convex pieces of each contingent cone (exact or fitted).
    pub contingent_cones: Vec<Vec<PolyCone>>,
    pub nonoverlap: Verdict<Vec<f64>>,
    /// Extremality of the tangent-cone system at the origin.
    pub tangential_extremality: Verdict<Vec<f64>>,
    /// Classical local extremality of the sets, when shifts were checked.
    pub local_set_extremality: Option<Verdict<Vec<f64>>>,
    /// Whether the generalized Euler equation is solvable nontrivially
    /// over the tangent cones' normal rays.
    pub euler_conditions: Verdict<()>,
    /// A solving family of normals, when one exists.
    pub euler_solution: Option<Vec<Vec<f64>>>,
    pub certificate: Option<NormalCertificate>,
    /// Per-index membership of the certified normals in the limiting
    /// normal cones of the original sets.
    pub normal_memberships: Vec<Verdict<Vec<f64>>>,
    pub cone_shifts_used: Option<Vec<Vec<f64>>>,
    pub status: PipelineStatus,
}

/// Contingent extremal pipeline: build tangent cones, check the
/// nonoverlap hypothesis and tangential extremality, solve for the
/// certificate when both hold, and certify every returned normal inside
/// the limiting normal cone of its original set.
pub fn contingent_extremal_pipeline(
    sets: &[SetSpec],
    base: &[f64],
    cfg: &PipelineConfig,
) -> Result<ExtremalPipelineReport, TangencyError> {
    let dim = base.len();
    let m = sets.len();
    for (i, s) in sets.iter().enumerate() {
        if !s.contains(base, 1e-7) {
            return Err(TangencyError::Solver(SolverError::Invalid(format!(
                "base point lies outside set {i}"
            ))));
        }
    }
    // (1) Tangent cones.
    let mut cone_specs = Vec::with_capacity(m);
    let mut cone_pieces = Vec::with_capacity(m);
    for s in sets {
        let spec = contingent_cone_spec(s, base, &cfg.budget)?;
        cone_pieces.push(spec_pieces(&spec).unwrap_or_default());
        cone_specs.push(spec);
    }
    // (2) Nonoverlap of the tangent cones.
    let zero_shifts = vec![linalg::zeros(dim); m];
    let cone_sys = ConeSystem::new(dim, cone_specs.clone(), zero_shifts);
    let nonoverlap = check_nonoverlapping(&cone_sys)?;
    // (3) Tangential extremality, honoring supplied cone shifts.
    let shifts = cfg
        .cone_shifts
        .clone()
        .unwrap_or_else(|| vec![linalg::zeros(dim); m]);
    let shifted_sys = ConeSystem::new(dim, cone_specs.clone(), shifts.clone());
    let tangential_extremality = check_conic_extremality(&shifted_sys)?;
    // Classical set-level label when shifts are available for it.
    let local_set_extremality = cfg.set_shifts.as_ref().map(|s| {
        local_set_extremality(sets, base, s, cfg.local_radius)
    });
    // Euler-equation solvability over the tangent cones' normal rays.
    let (euler_conditions, euler_solution) = match cone_specs
        .iter()
        .map(normal_rays_of_tangent)
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(reps) => match euler_conditions_check(&reps) {
            Ok(Some(normals)) => (Verdict::Holds, Some(normals)),
            Ok(None) => (Verdict::Violated { witness: () }, None),
            Err(_) => (Verdict::unknown("selection enumeration overflowed"), None),
        },
        Err(_) => (Verdict::unknown("normal rays unavailable for some cone"), None),
    };

    // (4) Certificate when the hypotheses hold.
    let mut certificate = None;
    let mut normal_memberships = Vec::new();
    let mut cone_shifts_used = None;
    let status;
    match (&nonoverlap, &tangential_extremality) {
        (Verdict::Holds, Verdict::Holds) => {
            // Certifying shifts: the supplied ones when they empty the
            // intersection, otherwise search along facet normals.
            let solve_shifts = find_certifying_shifts(&cone_specs, &shifts)?;
            match solve_shifts {
                Some(sh) => {
                    let sys = ConeSystem::new(dim, cone_specs.clone(), sh.clone());
                    let cert = solve_system(&sys, &cfg.solver)?;
                    let ok = matches!(cert.status, CertStatus::Extremal);
                    // (5) Memberships in the original sets' limiting cones.
                    for (i, xs) in cert.normals.iter().enumerate() {
                        normal_memberships.push(limiting_normal_membership(
                            &sets[i],
                            base,
                            xs,
                            &cfg.budget,
                        ));
                    }
                    let members_ok = normal_memberships.iter().all(|v| v.is_holds());
                    cone_shifts_used = Some(sh);
                    certificate = Some(cert);
                    status = if ok && members_ok {
                        PipelineStatus::Certified
                    } else {
                        PipelineStatus::Inconclusive
                    };
                }
                None => status = PipelineStatus::NotTangentiallyExtremal,
            }
        }
        (_, Verdict::Holds) => status = PipelineStatus::NoCertificate,
        (_, Verdict::Violated { .. }) => status = PipelineStatus::NotTangentiallyExtremal,
        _ => status = PipelineStatus::Inconclusive,
    }
    Ok(ExtremalPipelineReport {
        base_point: base.to_vec(),
        contingent_cones: cone_pieces,
        nonoverlap,
        tangential_extremality,
        local_set_extremality,
        euler_conditions,
        euler_solution,
        certificate,
        normal_memberships,
        cone_shifts_used,
        status,
    })
}

/// Shift family emptying the shifted tangent-cone intersection: the given
/// shifts when they work, else a search over facet-normal candidates.
fn find_certifying_shifts(
    cone_specs: &[SetSpec],
    given: &[Vec<f64>],
) -> Result<Option<Vec<Vec<f64>>>, SolverError> {
    if given.iter().any(|a| linalg::norm(a) > 0.0) {
        if crate::solver::shifted_intersection_point(cone_specs, given)?.is_none() {
            return Ok(Some(given.to_vec()));
        }
    }
    let dim = cone_specs.first().map_or(0, |c| c.dimension());
    let m = cone_specs.len();
    for (i, cone) in cone_specs.iter().enumerate() {
        let Ok(pieces) = spec_pieces(cone) else { continue };
        for piece in &pieces {
            for row in piece.completed().facet_normals.as_deref().unwrap_or(&[]) {
                let Some(dir) = linalg::normalize(row, 1e-12) else {
                    continue;
                };
                let mut shifts = vec![linalg::zeros(dim); m];
                shifts[i] = dir;
                if crate::solver::shifted_intersection_point(cone_specs, &shifts)?.is_none() {
                    return Ok(Some(shifts));
                }
            }
        }
    }
    Ok(None)
}

/// Classical local extremality of the set system: for the given shifts
/// scaled along a shrinking grid, the shifted intersection must miss the
/// neighborhood. Certified through a Lipschitz grid bound on
/// `F(x) = max_i dist(x + a_i; set_i)` (1-Lipschitz), refined adaptively.
pub fn local_set_extremality(
    sets: &[SetSpec],
    base: &[f64],
    shifts: &[Vec<f64>],
    radius: f64,
) -> Verdict<Vec<f64>> {
    for eta in [1.0, 0.5, 0.25, 0.125] {
        let scaled: Vec<Vec<f64>> = shifts.iter().map(|a| linalg::scale(a, eta)).collect();
        match empty_on_neighborhood(sets, base, &scaled, radius) {
            Verdict::Holds => {}
            other => return other,
        }
    }
    Verdict::Holds
}

/// Certified emptiness of `{x in B(base, radius) : x + a_i in set_i}` by
/// quadtree exclusion: `F(x) = max_i dist(x + a_i; set_i)` is 1-Lipschitz,
/// so a box whose center value exceeds its circumradius holds no common
/// point. Boxes that cannot be excluded get a cyclic-projection local
/// search for a witness before splitting.
fn empty_on_neighborhood(
    sets: &[SetSpec],
    base: &[f64],
    shifts: &[Vec<f64>],
    radius: f64,
) -> Verdict<Vec<f64>> {
    let dim = base.len();
    if dim != 2 {
        return Verdict::unknown("certified neighborhood emptiness is planar only");
    }
    let f = |x: &[f64]| -> f64 {
        sets.iter()
            .zip(shifts)
            .map(|(s, a)| s.dist(&linalg::add(x, a)).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    };
    let verify = |x: &[f64]| -> bool {
        linalg::dist(x, base) <= radius + 1e-9
            && sets
                .iter()
                .zip(shifts)
                .all(|(s, a)| s.contains(&linalg::add(x, a), 1e-6))
    };
    // Averaged-projection feasibility search from a starting point.
    let local_search = |start: &[f64]| -> Option<Vec<f64>> {
        let mut x = start.to_vec();
        for _ in 0..300 {
            let mut avg = linalg::zeros(dim);
            for (s, a) in sets.iter().zip(shifts) {
                let p = s.project(&linalg::add(&x, a)).ok()?.point;
                avg = linalg::add(&avg, &linalg::sub(&p, a));
            }
            let next = linalg::scale(&avg, 1.0 / sets.len() as f64);
            let moved = linalg::dist(&next, &x);
            x = next;
            if moved < 1e-13 {
                break;
            }
        }
        (f(&x) <= 1e-9 && verify(&x)).then_some(x)
    };
    // Witness hunt first: cyclic projections from a handful of seeds find
    // full-dimensional common regions almost immediately.
    let mut seeds = vec![base.to_vec()];
    for (sx, sy) in [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (0.7, 0.7),
        (-0.7, 0.7),
        (0.7, -0.7),
        (-0.7, -0.7),
    ] {
        seeds.push(vec![
            base[0] + 0.5 * radius * sx,
            base[1] + 0.5 * radius * sy,
        ]);
    }
    for s in &seeds {
        if let Some(w) = local_search(s) {
            return Verdict::Violated { witness: w };
        }
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut queue: Vec<(Vec<f64>, f64)> = vec![(base.to_vec(), radius)];
    let mut work = 0usize;
    while let Some((center, half)) = queue.pop() {
        work += 1;
        if work > 20_000 {
            return Verdict::unknown("neighborhood emptiness refinement budget exhausted");
        }
        // Skip boxes entirely outside the neighborhood ball.
        if linalg::dist(&center, base) - half * sqrt2 > radius {
            continue;
        }
        let v = f(&center);
        if v <= 1e-9 && verify(&center) {
            return Verdict::Violated { witness: center };
        }
        if v > half * sqrt2 * 1.0001 {
            continue; // the whole box is infeasible
        }
        if half < 1e-6 {
            return Verdict::unknown("grid resolution exhausted near a tight gap");
        }
        let q = half / 2.0;
        for (sx, sy) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
            queue.push((vec![center[0] + sx * q, center[1] + sy * q], q));
        }
    }
    Verdict::Holds
}
