//! Closed-set oracles: membership, distance, and nearest-point evaluation
//! for every set kind the toolkit manipulates.
//!
//! All kinds are nonempty by construction. Projections onto convex kinds
//! return the unique minimizer; nonconvex kinds run a documented global
//! search and expose `multiplicity_hint` when several nearest points tie.
//! Among tied nearest points the lexicographically smallest is returned.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone2::Cone2;
use crate::functions::ScalarFn;
use crate::linalg;
use crate::nnls;

/// Cyclic projection budget (sweeps) and movement threshold.
const MAX_SWEEPS: usize = 100_000;
const STEP_TOL: f64 = 1e-12;
/// Two candidate nearest points closer than this in value count as a tie.
const TIE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SetError {
    #[error("projection scheme exceeded its budget on {kind}")]
    NonConvergence { kind: &'static str },
    #[error("invalid set specification: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSense {
    /// `{(x, y) : y >= f(x)}`
    Above,
    /// `{(x, y) : y <= f(x)}`
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalflineSign {
    Plus,
    Minus,
}

fn default_sense() -> GraphSense {
    GraphSense::Above
}
fn default_bracket() -> [f64; 2] {
    [-10.0, 10.0]
}
fn default_cells() -> usize {
    10_000
}

/// Uniform closed-set description. Serialized as a tagged JSON object;
/// the exact field names are fixed in `schema/extremalkit.schema.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    /// `{x : <normal, x> <= 0}`
    Halfspace { normal: Vec<f64> },
    /// `{x : <a_j, x> <= 0 for every row a_j}`
    PolyhedralCone { facet_normals: Vec<Vec<f64>> },
    /// Nonnegative combinations of the generators.
    GeneratedCone { generators: Vec<Vec<f64>> },
    /// Graph region of a named scalar function in the plane.
    Epigraph {
        function: ScalarFn,
        #[serde(default = "default_sense")]
        sense: GraphSense,
        #[serde(default = "default_bracket")]
        bracket: [f64; 2],
        #[serde(default = "default_cells")]
        cells: usize,
    },
    /// `{(x, y) : y <= slope * x}`
    HalfplaneGraph { slope: f64 },
    /// `inner x R_+` or `inner x R_-`.
    Product {
        inner: Box<SetSpec>,
        sign: HalflineSign,
    },
    /// `{x : x - shift in inner}`
    Shifted {
        inner: Box<SetSpec>,
        shift: Vec<f64>,
    },
    /// Union of convex (or at least projectable) pieces.
    Union { pieces: Vec<SetSpec> },
    Ball { center: Vec<f64>, radius: f64 },
    WholeSpace { dimension: usize },
    /// Lifted cone `{(z, a) : z in inner, a <= <xstar, z> - epsilon ||z||}`
    /// used by the decomposition of Frechet normals over intersections.
    NormalLift {
        inner: Box<SetSpec>,
        xstar: Vec<f64>,
        epsilon: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub point: Vec<f64>,
    pub distance: f64,
    /// Set when several nearest points were detected within tolerance.
    pub multiplicity_hint: bool,
}

impl ProjectionResult {
    fn exact(point: Vec<f64>, distance: f64) -> Self {
        ProjectionResult {
            point,
            distance,
            multiplicity_hint: false,
        }
    }
}

impl SetSpec {
    pub fn whole(dimension: usize) -> Self {
        SetSpec::WholeSpace { dimension }
    }

    pub fn halfspace(normal: &[f64]) -> Self {
        SetSpec::Halfspace {
            normal: normal.to_vec(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            SetSpec::Halfspace { normal } => normal.len(),
            SetSpec::PolyhedralCone { facet_normals } => {
                facet_normals.first().map_or(0, |r| r.len())
            }
            SetSpec::GeneratedCone { generators } => generators.first().map_or(0, |g| g.len()),
            SetSpec::Epigraph { .. } | SetSpec::HalfplaneGraph { .. } => 2,
            SetSpec::Product { inner, .. } => inner.dimension() + 1,
            SetSpec::Shifted { shift, .. } => shift.len(),
            SetSpec::Union { pieces } => pieces.first().map_or(0, |p| p.dimension()),
            SetSpec::Ball { center, .. } => center.len(),
            SetSpec::WholeSpace { dimension } => *dimension,
            SetSpec::NormalLift { inner, .. } => inner.dimension() + 1,
        }
    }

    pub fn validate(&self) -> Result<(), SetError> {
        let bad = |m: String| Err(SetError::Invalid(m));
        match self {
            SetSpec::Halfspace { normal } => {
                if linalg::norm(normal) == 0.0 || !linalg::all_finite(normal) {
                    return bad("halfspace normal must be nonzero and finite".into());
                }
            }
            SetSpec::PolyhedralCone { facet_normals } => {
                if facet_normals.is_empty() {
                    return bad("polyhedral cone needs at least one facet".into());
                }
                let n = facet_normals[0].len();
                for r in facet_normals {
                    if r.len() != n || linalg::norm(r) == 0.0 || !linalg::all_finite(r) {
                        return bad("facet normals must be nonzero, finite, same dimension".into());
                    }
                }
            }
            SetSpec::GeneratedCone { generators } => {
                if generators.is_empty() {
                    return bad("generated cone needs at least one generator".into());
                }
                let n = generators[0].len();
                for g in generators {
                    if g.len() != n || linalg::norm(g) == 0.0 || !linalg::all_finite(g) {
                        return bad("generators must be nonzero, finite, same dimension".into());
                    }
                }
            }
            SetSpec::Epigraph { bracket, cells, .. } => {
                if bracket[0] >= bracket[1] || *cells < 8 {
                    return bad("epigraph bracket must be ordered and cells >= 8".into());
                }
            }
            SetSpec::HalfplaneGraph { slope } => {
                if !slope.is_finite() {
                    return bad("halfplane slope must be finite".into());
                }
            }
            SetSpec::Product { inner, .. } => inner.validate()?,
            SetSpec::Shifted { inner, shift } => {
                inner.validate()?;
                if shift.len() != inner.dimension() || !linalg::all_finite(shift) {
                    return bad("shift dimension mismatch".into());
                }
            }
            SetSpec::Union { pieces } => {
                if pieces.is_empty() {
                    return bad("union needs at least one piece".into());
                }
                let n = pieces[0].dimension();
                for p in pieces {
                    p.validate()?;
                    if p.dimension() != n {
                        return bad("union pieces must share a dimension".into());
                    }
                }
            }
            SetSpec::Ball { center, radius } => {
                if *radius < 0.0 || !linalg::all_finite(center) {
                    return bad("ball needs finite center and radius >= 0".into());
                }
            }
            SetSpec::WholeSpace { dimension } => {
                if *dimension == 0 {
                    return bad("whole space needs dimension >= 1".into());
                }
            }
            SetSpec::NormalLift { inner, xstar, .. } => {
                inner.validate()?;
                if xstar.len() != inner.dimension() {
                    return bad("normal lift xstar dimension mismatch".into());
                }
            }
        }
        Ok(())
    }

    /// True iff `dist(self, x) <= tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        assert!(tol > 0.0, "membership tolerance must be positive");
        match self.dist(x) {
            Ok(d) => d <= tol,
            Err(_) => false,
        }
    }

    pub fn dist(&self, x: &[f64]) -> Result<f64, SetError> {
        Ok(self.project(x)?.distance)
    }

    /// Nearest point of the set. Convex kinds are exact (up to the cyclic
    /// scheme's 1e-12 movement threshold); nonconvex kinds run a global
    /// grid-plus-refinement search.
    pub fn project(&self, x: &[f64]) -> Result<ProjectionResult, SetError> {
        debug_assert_eq!(x.len(), self.dimension());
        match self {
            SetSpec::Halfspace { normal } => Ok(ProjectionResult::exact(
                project_halfspace(normal, x),
                dist_halfspace(normal, x),
            )),
            SetSpec::PolyhedralCone { facet_normals } => {
                let p = dykstra_halfspaces(facet_normals, x)?;
                let d = linalg::dist(&p, x);
                Ok(ProjectionResult::exact(p, d))
            }
            SetSpec::GeneratedCone { generators } => {
                let r = nnls::solve(generators, x, STEP_TOL, MAX_SWEEPS);
                if !r.converged {
                    return Err(SetError::NonConvergence {
                        kind: "generated_cone",
                    });
                }
                Ok(ProjectionResult::exact(r.point, r.residual))
            }
            SetSpec::Epigraph {
                function,
                sense,
                bracket,
                cells,
            } => Ok(project_graph_region(*function, *sense, *bracket, *cells, x)),
            SetSpec::HalfplaneGraph { slope } => {
                let normal = vec![-slope, 1.0];
                Ok(ProjectionResult::exact(
                    project_halfspace(&normal, x),
                    dist_halfspace(&normal, x),
                ))
            }
            SetSpec::Product { inner, sign } => {
                let (head, tail) = x.split_at(x.len() - 1);
                let inner_res = inner.project(head)?;
                let clamped = match sign {
                    HalflineSign::Plus => tail[0].max(0.0),
                    HalflineSign::Minus => tail[0].min(0.0),
                };
                let mut point = inner_res.point.clone();
                point.push(clamped);
                let distance =
                    (inner_res.distance.powi(2) + (tail[0] - clamped).powi(2)).sqrt();
                Ok(ProjectionResult {
                    point,
                    distance,
                    multiplicity_hint: inner_res.multiplicity_hint,
                })
            }
            SetSpec::Shifted { inner, shift } => {
                let local = linalg::sub(x, shift);
                let mut res = inner.project(&local)?;
                res.point = linalg::add(&res.point, shift);
                Ok(res)
            }
            SetSpec::Union { pieces } => {
                let mut best: Option<ProjectionResult> = None;
                let mut hint = false;
                for piece in pieces {
                    let r = piece.project(x)?;
                    match &mut best {
                        None => best = Some(r),
                        Some(b) => {
                            if (r.distance - b.distance).abs() <= TIE_TOL {
                                if linalg::dist(&r.point, &b.point) > TIE_TOL {
                                    hint = true;
                                }
                                if r.distance < b.distance
                                    || ((r.distance - b.distance).abs() <= TIE_TOL
                                        && linalg::lex_less(&r.point, &b.point))
                                {
                                    *b = r;
                                }
                            } else if r.distance < b.distance {
                                *b = r;
                            }
                        }
                    }
                }
                let mut out = best.expect("union has at least one piece");
                out.multiplicity_hint = out.multiplicity_hint || hint;
                Ok(out)
            }
            SetSpec::Ball { center, radius } => {
                let d = linalg::dist(x, center);
                if d <= *radius {
                    Ok(ProjectionResult::exact(x.to_vec(), 0.0))
                } else if d == 0.0 {
                    // Degenerate: query at the center of a zero-radius ball.
                    Ok(ProjectionResult::exact(center.clone(), 0.0))
                } else {
                    let dir = linalg::scale(&linalg::sub(x, center), 1.0 / d);
                    let point = linalg::axpy(center, *radius, &dir);
                    Ok(ProjectionResult::exact(point, d - radius))
                }
            }
            SetSpec::WholeSpace { .. } => Ok(ProjectionResult::exact(x.to_vec(), 0.0)),
            SetSpec::NormalLift {
                inner,
                xstar,
                epsilon,
            } => project_normal_lift(inner, xstar, *epsilon, x),
        }
    }

    /// H-representation rows `{x : <row, x> <= 0}` when this kind is an
    /// intersection of homogeneous halfspaces.
    pub fn polyhedral_rows(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            SetSpec::Halfspace { normal } => Some(vec![normal.clone()]),
            SetSpec::PolyhedralCone { facet_normals } => Some(facet_normals.clone()),
            SetSpec::HalfplaneGraph { slope } => Some(vec![vec![-slope, 1.0]]),
            SetSpec::WholeSpace { .. } => Some(Vec::new()),
            SetSpec::Product { inner, sign } => {
                let rows = inner.polyhedral_rows()?;
                let n = inner.dimension();
                let mut out: Vec<Vec<f64>> = rows
                    .into_iter()
                    .map(|mut r| {
                        r.push(0.0);
                        r
                    })
                    .collect();
                let mut sign_row = vec![0.0; n + 1];
                sign_row[n] = match sign {
                    HalflineSign::Plus => -1.0,
                    HalflineSign::Minus => 1.0,
                };
                out.push(sign_row);
                Some(out)
            }
            SetSpec::NormalLift {
                inner,
                xstar,
                epsilon,
            } => {
                if *epsilon != 0.0 {
                    return None;
                }
                let rows = inner.polyhedral_rows()?;
                let mut out: Vec<Vec<f64>> = rows
                    .into_iter()
                    .map(|mut r| {
                        r.push(0.0);
                        r
                    })
                    .collect();
                let mut lift_row: Vec<f64> = xstar.iter().map(|v| -v).collect();
                lift_row.push(1.0);
                out.push(lift_row);
                Some(out)
            }
            _ => None,
        }
    }

    /// Generator representation when this kind is a finitely generated cone.
    pub fn generator_rows(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            SetSpec::GeneratedCone { generators } => Some(generators.clone()),
            _ => None,
        }
    }

    /// Exact planar sector description for 2-D cone kinds.
    pub fn cone2(&self) -> Option<Cone2> {
        if self.dimension() != 2 {
            return None;
        }
        match self {
            SetSpec::Halfspace { normal } => Some(Cone2::halfplane(normal)),
            SetSpec::HalfplaneGraph { slope } => Some(Cone2::halfplane(&[-slope, 1.0])),
            SetSpec::PolyhedralCone { facet_normals } => {
                let mut c = Cone2::full();
                for row in facet_normals {
                    c = c.intersect(&Cone2::halfplane(row));
                }
                Some(c)
            }
            SetSpec::GeneratedCone { generators } => Some(Cone2::hull_of_rays(generators)),
            SetSpec::Union { pieces } => {
                let mut c = Cone2::zero();
                for p in pieces {
                    c = c.union(&p.cone2()?);
                }
                Some(c)
            }
            SetSpec::Epigraph {
                function, sense, ..
            } => match (function, sense) {
                (ScalarFn::NegAbs, GraphSense::Above) => {
                    Some(Cone2::sector(-std::f64::consts::FRAC_PI_4, 1.5 * std::f64::consts::PI))
                }
                (ScalarFn::Abs, GraphSense::Above) => Some(Cone2::sector(
                    std::f64::consts::FRAC_PI_4,
                    std::f64::consts::FRAC_PI_2,
                )),
                _ => None,
            },
            SetSpec::WholeSpace { .. } => Some(Cone2::full()),
            _ => None,
        }
    }
}

/// Planar sector cone as a set kind: each convex sector becomes a
/// polyhedral cone, a union of sectors becomes a union of pieces.
pub fn spec_from_cone2(c: &Cone2) -> SetSpec {
    if c.is_zero_only() {
        return SetSpec::Ball {
            center: vec![0.0, 0.0],
            radius: 0.0,
        };
    }
    if c.is_full() {
        return SetSpec::whole(2);
    }
    let pieces: Vec<SetSpec> = c
        .convex_sectors()
        .iter()
        .map(|arc| {
            let sector = Cone2::sector(arc.start, arc.span);
            SetSpec::PolyhedralCone {
                facet_normals: sector.facet_normals().expect("sector is convex"),
            }
        })
        .collect();
    if pieces.len() == 1 {
        pieces.into_iter().next().unwrap()
    } else {
        SetSpec::Union { pieces }
    }
}

fn dist_halfspace(normal: &[f64], x: &[f64]) -> f64 {
    let v = linalg::dot(normal, x);
    v.max(0.0) / linalg::norm(normal)
}

fn project_halfspace(normal: &[f64], x: &[f64]) -> Vec<f64> {
    let v = linalg::dot(normal, x);
    if v <= 0.0 {
        x.to_vec()
    } else {
        linalg::axpy(x, -v / linalg::dot(normal, normal), normal)
    }
}

/// Dykstra's cyclic scheme over homogeneous halfspaces. Exact in the limit
/// for this convex polyhedral case; we stop once a full sweep moves less
/// than `STEP_TOL`.
pub fn dykstra_halfspaces(rows: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>, SetError> {
    if rows.is_empty() {
        return Ok(x.to_vec());
    }
    if rows.len() == 1 {
        return Ok(project_halfspace(&rows[0], x));
    }
    let n = x.len();
    let mut z = x.to_vec();
    let mut corrections = vec![linalg::zeros(n); rows.len()];
    for _ in 0..MAX_SWEEPS {
        let mut sweep_move = 0.0f64;
        for (j, row) in rows.iter().enumerate() {
            let y = linalg::add(&z, &corrections[j]);
            let p = project_halfspace(row, &y);
            corrections[j] = linalg::sub(&y, &p);
            sweep_move += linalg::dist(&z, &p);
            z = p;
        }
        if sweep_move < STEP_TOL {
            return Ok(z);
        }
    }
    // Accept the iterate anyway when it is already feasible to high
    // accuracy; otherwise signal the budget overrun.
    let feasible = rows
        .iter()
        .all(|r| linalg::dot(r, &z) <= 1e-9 * linalg::norm(r).max(1.0));
    if feasible {
        Ok(z)
    } else {
        Err(SetError::NonConvergence {
            kind: "polyhedral_cone",
        })
    }
}

/// Global nearest-point search for `{(x, y) : y >= f(x)}` (or the
/// hypograph). The scan window is centered at the query and sized from a
/// certified upper bound on the distance, so the argument of the true
/// minimum always lies inside; the configured cell count controls
/// resolution and trisection then refines the winning cells.
fn project_graph_region(
    f: ScalarFn,
    sense: GraphSense,
    bracket: [f64; 2],
    cells: usize,
    q: &[f64],
) -> ProjectionResult {
    let (qx, qy) = (q[0], q[1]);
    let above = matches!(sense, GraphSense::Above);
    let fq = f.eval(qx);
    let inside = if above { qy >= fq } else { qy <= fq };
    if inside {
        return ProjectionResult::exact(q.to_vec(), 0.0);
    }
    // Distance upper bounds from two candidate feasible points.
    let vertical = (qy - fq).abs();
    let anchor_x = qx.clamp(bracket[0], bracket[1]);
    let fa = f.eval(anchor_x);
    let anchor = ((qx - anchor_x).powi(2) + (qy - fa).powi(2)).sqrt();
    let ub = vertical.min(anchor);

    let cost = |s: f64| -> (f64, f64) {
        let fs = f.eval(s);
        let t = if above { qy.max(fs) } else { qy.min(fs) };
        ((s - qx).powi(2) + (t - qy).powi(2), t)
    };

    // One grid-plus-zoom sweep over a window centered at the query.
    let m = cells.max(8);
    let sweep = |half: f64| -> Vec<(f64, f64)> {
        let (lo, hi) = (qx - half, qx + half);
        let h = (hi - lo) / m as f64;
        let mut cell_vals = Vec::with_capacity(m + 1);
        for k in 0..=m {
            cell_vals.push(cost(lo + h * k as f64).0);
        }
        // Up to four well-separated near-winning cells get refined; the
        // incumbent tracks the best value seen at any sampled abscissa so
        // an oscillating boundary can never make refinement lose ground.
        let mut order: Vec<usize> = (0..=m).collect();
        order.sort_by(|&a, &b| cell_vals[a].total_cmp(&cell_vals[b]));
        let mut picked: Vec<usize> = Vec::new();
        for &k in &order {
            if picked.len() >= 4 {
                break;
            }
            if picked.iter().all(|&p| k.abs_diff(p) > 1) {
                picked.push(k);
            }
        }
        let mut refined: Vec<(f64, f64)> = Vec::new(); // (value, s)
        for &k in &picked {
            let s0 = lo + h * k as f64;
            let (v, s) = zoom_min(&|s| cost(s).0, (s0 - h).max(lo), (s0 + h).min(hi));
            refined.push((v.min(cell_vals[k]), if v <= cell_vals[k] { s } else { s0 }));
        }
        refined.sort_by(|a, b| a.0.total_cmp(&b.0));
        refined
    };

    // The nearest boundary point always lies within the current best
    // distance of the query, so the window can be tightened around each
    // sweep's result. On oscillating boundaries this raises the effective
    // resolution until the grid resolves the local period.
    let mut half = ub * 1.0000001 + f64::EPSILON;
    let mut refined = sweep(half);
    for _ in 0..6 {
        let best_dist = refined[0].0.sqrt();
        let next_half = best_dist * 1.05 + f64::EPSILON;
        if next_half >= half * 0.5 {
            break;
        }
        half = next_half;
        let mut again = sweep(half);
        again.extend(refined.iter().copied());
        again.sort_by(|a, b| a.0.total_cmp(&b.0));
        refined = again;
    }

    let best = refined[0].0;
    // Distance-level windows: relative for the canonical pick,
    // the documented absolute 1e-6 for the multiplicity hint.
    let pick_win = 1e-9 * best.sqrt().max(1.0) + 1e-13;
    let hint = refined
        .iter()
        .skip(1)
        .any(|r| r.0.sqrt() - best.sqrt() <= TIE_TOL && (r.1 - refined[0].1).abs() > TIE_TOL);
    let s = refined
        .iter()
        .filter(|r| r.0.sqrt() - best.sqrt() <= pick_win)
        .map(|r| r.1)
        .fold(f64::INFINITY, f64::min);
    let (v, t) = cost(s);
    ProjectionResult {
        point: vec![s, t],
        distance: v.sqrt(),
        multiplicity_hint: hint,
    }
}

/// Sample-and-shrink minimization over `[a, b]`: each level keeps the best
/// of 32 samples and zooms into its neighborhood. Robust on oscillating
/// costs because the incumbent never regresses.
fn zoom_min(cost: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, a);
    for _ in 0..64 {
        let k = 32usize;
        let h = (b - a) / k as f64;
        let mut local = (f64::INFINITY, a);
        for i in 0..=k {
            let s = a + h * i as f64;
            let v = cost(s);
            if v < local.0 {
                local = (v, s);
            }
        }
        if local.0 < best.0 {
            best = local;
        }
        let c = local.1;
        a = (c - h).max(a);
        b = (c + h).min(b);
        // Descend to the abscissa's floating-point resolution: sharp
        // oscillation dips keep improving until machine epsilon.
        if b - a < 8.0 * f64::EPSILON * (1.0 + c.abs()) {
            break;
        }
    }
    best
}

/// Nearest point of the lifted cone `O_1`. For a polyhedral inner cone and
/// `epsilon = 0` the set is an intersection of homogeneous halfspaces and
/// the cyclic scheme applies; otherwise a projected-gradient search with
/// deterministic restarts minimizes
/// `||z - y||^2 + max(beta - g(z), 0)^2` over `z in inner`,
/// with `g(z) = <xstar, z> - epsilon ||z||`.
fn project_normal_lift(
    inner: &SetSpec,
    xstar: &[f64],
    epsilon: f64,
    q: &[f64],
) -> Result<ProjectionResult, SetError> {
    let lifted = SetSpec::NormalLift {
        inner: Box::new(inner.clone()),
        xstar: xstar.to_vec(),
        epsilon,
    };
    if let Some(rows) = lifted.polyhedral_rows() {
        let p = dykstra_halfspaces(&rows, q)?;
        let d = linalg::dist(&p, q);
        return Ok(ProjectionResult::exact(p, d));
    }

    let n = xstar.len();
    let (y, beta) = (&q[..n], q[n]);
    let g = |z: &[f64]| linalg::dot(xstar, z) - epsilon * linalg::norm(z);
    let objective = |z: &[f64]| -> f64 {
        let gap = (beta - g(z)).max(0.0);
        linalg::dist(z, y).powi(2) + gap * gap
    };
    let lip = 2.0 * (1.0 + (linalg::norm(xstar) + epsilon).powi(2));
    let step = 1.0 / lip;

    // The objective is convex whenever the inner cone is (the hypograph
    // constraint has a concave right-hand side), so a single projected
    // gradient run from the inner projection of the query converges
    // globally; nonconvex inner cones get deterministic restarts.
    let base = inner.project(y)?.point;
    let convex_inner = !matches!(inner, SetSpec::Union { .. } | SetSpec::Epigraph { .. });
    let mut starts: Vec<Vec<f64>> = vec![base.clone()];
    if !convex_inner {
        starts.push(linalg::zeros(n));
        for scale in [0.25, 1.0, 4.0] {
            for k in 0..n {
                let mut s = base.clone();
                s[k] += scale * (1.0 + linalg::norm(y));
                starts.push(s);
                let mut s = base.clone();
                s[k] -= scale * (1.0 + linalg::norm(y));
                starts.push(s);
            }
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in starts {
        let mut z = inner.project(&start)?.point;
        for _ in 0..4000 {
            let gap = (beta - g(&z)).max(0.0);
            let mut grad = linalg::scale(&linalg::sub(&z, y), 2.0);
            if gap > 0.0 {
                let nz = linalg::norm(&z);
                let mut dg = xstar.to_vec();
                if nz > 0.0 {
                    dg = linalg::axpy(&dg, -epsilon / nz, &z);
                }
                grad = linalg::axpy(&grad, -2.0 * gap, &dg);
            }
            let cand = linalg::axpy(&z, -step, &grad);
            let proj = inner.project(&cand)?.point;
            let moved = linalg::dist(&proj, &z);
            z = proj;
            if moved < STEP_TOL {
                break;
            }
        }
        let v = objective(&z);
        if best.as_ref().map_or(true, |(bv, _)| v < *bv) {
            best = Some((v, z));
        }
    }
    let (_, z) = best.expect("at least one restart ran");
    let alpha = beta.min(g(&z));
    let mut point = z;
    point.push(alpha);
    let distance = linalg::dist(&point, q);
    Ok(ProjectionResult {
        point,
        distance,
        multiplicity_hint: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    #[test]
    fn halfspace_examples() {
        // a = (0,1), x = (3,-2): inner product -2 <= 0.
        let h = SetSpec::halfspace(&[0.0, 1.0]);
        assert!(h.contains(&[3.0, -2.0], 1e-9));
        // x = (2,3) drops its normal component.
        let r = h.project(&[2.0, 3.0]).unwrap();
        assert!(linalg::dist(&r.point, &[2.0, 0.0]) < TOL);
        assert!((r.distance - 3.0).abs() < TOL);
    }

    #[test]
    fn vertical_ray_projection() {
        // {0} x R_+ at (0, -1/3) projects to the origin.
        let ray = SetSpec::PolyhedralCone {
            facet_normals: vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
        };
        let r = ray.project(&[0.0, -1.0 / 3.0]).unwrap();
        assert!(linalg::norm(&r.point) < 1e-10);
        assert!((r.distance - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn lower_halfplane_distance() {
        let lower = SetSpec::halfspace(&[0.0, 1.0]);
        assert!((lower.dist(&[0.0, 2.0 / 3.0]).unwrap() - 2.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn halfplane_graph_distance() {
        // {y <= x/2}: distance from (0,1) is 2/sqrt(5).
        let g = SetSpec::HalfplaneGraph { slope: 0.5 };
        let expect = 2.0 / 5.0f64.sqrt();
        assert!((g.dist(&[0.0, 1.0]).unwrap() - expect).abs() < TOL);
    }

    #[test]
    fn generated_cone_membership() {
        let c = SetSpec::GeneratedCone {
            generators: vec![vec![1.0, 0.0], vec![1.0, 1.0]],
        };
        assert!(!c.contains(&[0.0, 1.0], 1e-6));
        assert!(c.contains(&[2.0, 1.0], 1e-6));
    }

    #[test]
    fn epigraph_of_oscillation_contains_origin() {
        let e = SetSpec::Epigraph {
            function: ScalarFn::Xsin1x,
            sense: GraphSense::Above,
            bracket: [-10.0, 10.0],
            cells: 10_000,
        };
        assert!(e.contains(&[0.0, 0.0], 1e-9));
    }

    #[test]
    fn epigraph_projection_scales_with_query() {
        // Near the origin the oscillating boundary stays within x^2 of the
        // envelope -|x|, so points below project at distance O(t).
        let e = SetSpec::Epigraph {
            function: ScalarFn::Xsin1x,
            sense: GraphSense::Above,
            bracket: [-10.0, 10.0],
            cells: 10_000,
        };
        for &t in &[1e-2, 1e-4, 1e-6] {
            let r = e.project(&[t, -2.0 * t]).unwrap();
            assert!(r.distance <= t * 1.2, "t={t}, dist={}", r.distance);
            assert!(
                e.contains(&r.point, 1e-9),
                "projected point must lie in the set"
            );
        }
    }

    #[test]
    fn union_tie_is_lexicographic_and_hinted() {
        // {y >= -|x|} as two halfplane pieces; query (0,-1).
        let w = SetSpec::Union {
            pieces: vec![
                SetSpec::halfspace(&[1.0, -1.0]),
                SetSpec::halfspace(&[-1.0, -1.0]),
            ],
        };
        let r = w.project(&[0.0, -1.0]).unwrap();
        assert!(r.multiplicity_hint);
        assert!((r.distance - (0.5f64).sqrt()).abs() < 1e-9);
        assert!(linalg::dist(&r.point, &[-0.5, -0.5]) < 1e-9);
    }

    #[test]
    fn whole_space_and_ball() {
        let w = SetSpec::whole(3);
        assert_eq!(w.dist(&[5.0, -2.0, 0.1]).unwrap(), 0.0);
        let point = SetSpec::Ball {
            center: vec![1.0, 1.0],
            radius: 0.0,
        };
        let r = point.project(&[2.0, 1.0]).unwrap();
        assert!((r.distance - 1.0).abs() < TOL);
        assert_eq!(r.point, vec![1.0, 1.0]);
    }

    #[test]
    fn shifted_lower_halfplane() {
        // Lower halfplane shifted up by 1: {y <= 1}.
        let s = SetSpec::Shifted {
            inner: Box::new(SetSpec::halfspace(&[0.0, 1.0])),
            shift: vec![0.0, 1.0],
        };
        assert!((s.dist(&[0.0, 3.0]).unwrap() - 2.0).abs() < TOL);
        assert!(s.contains(&[7.0, 0.5], 1e-9));
    }

    #[test]
    fn product_with_halfline() {
        // Lower halfplane x R_+ in R^3.
        let p = SetSpec::Product {
            inner: Box::new(SetSpec::halfspace(&[0.0, 1.0])),
            sign: HalflineSign::Plus,
        };
        let r = p.project(&[0.0, 1.0, -1.0]).unwrap();
        assert!(linalg::dist(&r.point, &[0.0, 0.0, 0.0]) < TOL);
        assert!((r.distance - 2.0f64.sqrt()).abs() < TOL);
    }

    #[test]
    fn projection_fixed_point() {
        let c = SetSpec::PolyhedralCone {
            facet_normals: vec![vec![1.0, 0.5], vec![-0.3, 1.0]],
        };
        let inside = c.project(&[3.0, -4.0]).unwrap().point;
        let again = c.project(&inside).unwrap();
        assert!(again.distance < 1e-9);
        assert!(linalg::dist(&again.point, &inside) < 1e-8);
    }

    #[test]
    fn normal_lift_polyhedral_zero_eps() {
        // inner = lower halfplane, xstar = (1,1), eps = 0: polyhedral path.
        let lift = SetSpec::NormalLift {
            inner: Box::new(SetSpec::halfspace(&[0.0, 1.0])),
            xstar: vec![1.0, 1.0],
            epsilon: 0.0,
        };
        // (z, a) with z = (1,-1), a = <(1,1),z> = 0 lies in the set.
        assert!(lift.contains(&[1.0, -1.0, -0.5], 1e-8));
        assert!(!lift.contains(&[1.0, -1.0, 0.5], 1e-4));
        let r = lift.project(&[0.0, 0.0, 1.0]).unwrap();
        assert!(r.distance > 0.1);
    }

    #[test]
    fn normal_lift_positive_eps_matches_grid() {
        // Nonpolyhedral path checked against a dense grid oracle.
        let inner = SetSpec::halfspace(&[0.0, 1.0]);
        let lift = SetSpec::NormalLift {
            inner: Box::new(inner.clone()),
            xstar: vec![0.4, 0.9],
            epsilon: 0.1,
        };
        let q = vec![0.3, -0.2, 0.5];
        let got = lift.project(&q).unwrap().distance;
        // Grid oracle over z, alpha chosen optimally per z.
        let g = |z: &[f64]| linalg::dot(&[0.4, 0.9], z) - 0.1 * linalg::norm(z);
        let mut best = f64::INFINITY;
        for i in -300..=300 {
            for j in -300..=0 {
                let z = [i as f64 * 0.01, j as f64 * 0.01];
                let alpha = q[2].min(g(&z));
                let d = ((z[0] - q[0]).powi(2)
                    + (z[1] - q[1]).powi(2)
                    + (alpha - q[2]).powi(2))
                .sqrt();
                if d < best {
                    best = d;
                }
            }
        }
        assert!(
            (got - best).abs() < 5e-3,
            "projected {got}, grid oracle {best}"
        );
    }

    #[test]
    fn serde_round_trip_is_identity() {
        let spec = SetSpec::Shifted {
            inner: Box::new(SetSpec::Union {
                pieces: vec![
                    SetSpec::halfspace(&[1.0, -1.0]),
                    SetSpec::GeneratedCone {
                        generators: vec![vec![0.0, 1.0]],
                    },
                ],
            }),
            shift: vec![0.25, -0.5],
        };
        let s1 = serde_json::to_string(&spec).unwrap();
        let parsed: SetSpec = serde_json::from_str(&s1).unwrap();
        let s2 = serde_json::to_string(&parsed).unwrap();
        assert_eq!(s1, s2);
    }
}
