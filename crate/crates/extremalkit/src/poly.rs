//! Finitely described convex cones with exact polar calculus.
//!
//! A cone carries a V-representation (generators), an H-representation
//! (facet normals of homogeneous halfspaces), or both. Polarity swaps the
//! two representations; the missing one is completed by enumerating
//! extreme rays, which is exact for the small dimensions this toolkit
//! targets. Lineality is handled by splitting off the null space first.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::nnls;
use crate::sets::SetSpec;

const RAY_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ConeError {
    #[error("operation requires a convex cone")]
    NotConvex,
    #[error("unsupported kind: {0}")]
    UnsupportedKind(String),
    #[error("no direction survived the sampling budget")]
    EmptyFan,
    #[error("no polyhedral fit within tolerance: {0}")]
    FitFailure(String),
}

/// Convex polyhedral cone with one or both representations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyCone {
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facet_normals: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_convex")]
    pub convex: bool,
}

fn default_convex() -> bool {
    true
}

impl PolyCone {
    /// Nonempty generator list; use [`PolyCone::zero`] for the origin cone.
    pub fn from_generators(generators: Vec<Vec<f64>>) -> Self {
        let dim = generators
            .first()
            .map(|g| g.len())
            .expect("use PolyCone::zero for an empty generator list");
        PolyCone {
            dim,
            generators: Some(generators),
            facet_normals: None,
            convex: true,
        }
    }

    /// Nonempty facet list; use [`PolyCone::whole`] for no constraints.
    pub fn from_facets(facet_normals: Vec<Vec<f64>>) -> Self {
        let dim = facet_normals
            .first()
            .map(|g| g.len())
            .expect("use PolyCone::whole for an empty facet list");
        PolyCone {
            dim,
            generators: None,
            facet_normals: Some(facet_normals),
            convex: true,
        }
    }

    /// The trivial cone `{0}`.
    pub fn zero(dim: usize) -> Self {
        PolyCone {
            dim,
            generators: Some(Vec::new()),
            facet_normals: None,
            convex: true,
        }
    }

    /// The whole space.
    pub fn whole(dim: usize) -> Self {
        PolyCone {
            dim,
            generators: None,
            facet_normals: Some(Vec::new()),
            convex: true,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Membership test, preferring the exact H-representation.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if let Some(rows) = &self.facet_normals {
            return rows
                .iter()
                .all(|r| linalg::dot(r, x) <= tol * linalg::norm(r).max(1.0));
        }
        if let Some(gens) = &self.generators {
            if gens.is_empty() {
                return linalg::norm(x) <= tol;
            }
            return nnls::solve(gens, x, 1e-13, 100_000).residual <= tol;
        }
        false
    }

    /// Polar cone: generators become facet normals and vice versa. Any
    /// missing representation of the result is completed by extreme-ray
    /// enumeration.
    pub fn polar(&self) -> Result<PolyCone, ConeError> {
        if !self.convex {
            return Err(ConeError::NotConvex);
        }
        let out = PolyCone {
            dim: self.dim,
            generators: self.facet_normals.clone(),
            facet_normals: self.generators.clone(),
            convex: true,
        };
        Ok(out.completed())
    }

    /// Fill in whichever representation is missing (exact for the small
    /// dimensions in scope). A cone with neither representation stays as
    /// it is.
    pub fn completed(&self) -> PolyCone {
        let mut out = self.clone();
        if out.facet_normals.is_none() {
            if let Some(gens) = &out.generators {
                // H-rep rows of cone{G} are the extreme rays of its polar
                // {y : <g, y> <= 0 for all g}.
                let n = self.dimension();
                out.facet_normals = Some(extreme_rays(gens, n));
            }
        }
        if out.generators.is_none() {
            if let Some(rows) = &out.facet_normals {
                let n = self.dimension();
                out.generators = Some(extreme_rays(rows, n));
            }
        }
        out
    }
}

/// Generators (extreme rays plus a basis of the lineality space, both
/// signs) of the cone `{x : <a_j, x> <= 0 for all rows a_j}` in `R^n`.
pub fn extreme_rays(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let active: Vec<&Vec<f64>> = rows.iter().filter(|r| linalg::norm(r) > RAY_EPS).collect();
    if active.is_empty() {
        // Whole space.
        let mut out = Vec::new();
        for k in 0..n {
            out.push(linalg::basis(n, k));
            out.push(linalg::scale(&linalg::basis(n, k), -1.0));
        }
        return out;
    }
    let matrix: Vec<Vec<f64>> = active.iter().map(|r| (*r).clone()).collect();
    let lineality = null_space(&matrix, n);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for l in &lineality {
        out.push(l.clone());
        out.push(linalg::scale(l, -1.0));
    }
    // Orthonormal basis of the pointed part's ambient space.
    let basis = orth_complement(&lineality, n);
    let np = basis.len();
    if np == 0 {
        return out;
    }
    let reduced: Vec<Vec<f64>> = matrix
        .iter()
        .map(|r| basis.iter().map(|b| linalg::dot(r, b)).collect())
        .collect();
    let feasible = |d: &[f64]| {
        reduced
            .iter()
            .all(|r| linalg::dot(r, d) <= RAY_EPS * linalg::norm(r).max(1.0))
    };
    let mut pointed: Vec<Vec<f64>> = Vec::new();
    if np == 1 {
        for d in [vec![1.0], vec![-1.0]] {
            if feasible(&d) {
                pointed.push(d);
            }
        }
    } else {
        for subset in subsets(reduced.len(), np - 1) {
            let sub: Vec<Vec<f64>> = subset.iter().map(|&i| reduced[i].clone()).collect();
            let ns = null_space(&sub, np);
            if ns.len() != 1 {
                continue;
            }
            let d = &ns[0];
            for cand in [d.clone(), linalg::scale(d, -1.0)] {
                if feasible(&cand)
                    && !pointed
                        .iter()
                        .any(|p| linalg::angle_between(p, &cand) < 1e-7)
                {
                    pointed.push(cand);
                }
            }
        }
    }
    for d in pointed {
        let mapped: Vec<f64> = (0..n)
            .map(|k| basis.iter().zip(&d).map(|(b, di)| b[k] * di).sum())
            .collect();
        if let Some(u) = linalg::normalize(&mapped, RAY_EPS) {
            out.push(u);
        }
    }
    out
}

/// Orthonormal basis of the null space `{x : rows . x = 0}`.
pub fn null_space(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..n {
        let Some(pr) = (rank..m.len()).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
        else {
            break;
        };
        if m[pr][col].abs() < 1e-11 {
            continue;
        }
        m.swap(rank, pr);
        let p = m[rank][col];
        for v in m[rank].iter_mut() {
            *v /= p;
        }
        for i in 0..m.len() {
            if i != rank {
                let f = m[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        m[i][j] -= f * m[rank][j];
                    }
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let mut out = Vec::new();
    for col in 0..n {
        if pivots.contains(&col) {
            continue;
        }
        let mut v = vec![0.0; n];
        v[col] = 1.0;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[r][col];
        }
        out.push(v);
    }
    gram_schmidt(&out)
}

/// Orthonormal basis of the orthogonal complement of `span(vs)`.
fn orth_complement(vs: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    if vs.is_empty() {
        return (0..n).map(|k| linalg::basis(n, k)).collect();
    }
    null_space(vs, n)
}

fn gram_schmidt(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for u in &out {
            let c = linalg::dot(&w, u);
            w = linalg::axpy(&w, -c, u);
        }
        if let Some(u) = linalg::normalize(&w, 1e-12) {
            out.push(u);
        }
    }
    out
}

fn subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    rec(0, k, size, &mut cur, &mut out);
    out
}

/// Exact Frechet (regular) normal cone of a finite union of convex
/// polyhedral pieces at a point of the union: the intersection of the
/// active pieces' Frechet cones, where a piece is active when it contains
/// the point. For a single convex piece at the origin this is the polar.
pub fn frechet_normal_cone(pieces: &[PolyCone], at: &[f64]) -> Result<PolyCone, ConeError> {
    let n = at.len();
    let mut piece_cones: Vec<PolyCone> = Vec::new();
    for piece in pieces {
        let completed = piece.completed();
        let Some(rows) = &completed.facet_normals else {
            return Err(ConeError::UnsupportedKind(
                "piece without an H-representation".into(),
            ));
        };
        if !completed.contains(at, 1e-7 * (1.0 + linalg::norm(at))) {
            // Inactive piece: does not constrain normals at this point.
            continue;
        }
        let active: Vec<Vec<f64>> = rows
            .iter()
            .filter(|r| linalg::dot(r, at).abs() <= 1e-9 * (1.0 + linalg::norm(at)) * linalg::norm(r).max(1.0))
            .cloned()
            .collect();
        let frechet = if active.is_empty() {
            PolyCone::zero(n)
        } else {
            PolyCone::from_generators(active)
        };
        piece_cones.push(frechet.completed());
    }
    if piece_cones.is_empty() {
        return Err(ConeError::UnsupportedKind(
            "the reference point lies in no piece".into(),
        ));
    }
    if piece_cones.len() == 1 {
        return Ok(piece_cones.pop().expect("nonempty"));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for pc in &piece_cones {
        rows.extend(pc.facet_normals.clone().unwrap_or_default());
    }
    if rows.is_empty() {
        // Every piece is locally the whole space.
        return Ok(PolyCone::whole(n).completed());
    }
    Ok(PolyCone::from_facets(rows).completed())
}

/// Convex polyhedral pieces of a set kind, when it has them.
pub fn spec_pieces(spec: &SetSpec) -> Result<Vec<PolyCone>, ConeError> {
    if let Some(rows) = spec.polyhedral_rows() {
        return Ok(vec![if rows.is_empty() {
            PolyCone::whole(spec.dimension())
        } else {
            PolyCone::from_facets(rows)
        }]);
    }
    if let Some(gens) = spec.generator_rows() {
        return Ok(vec![PolyCone::from_generators(gens)]);
    }
    match spec {
        SetSpec::Union { pieces } => {
            let mut out = Vec::new();
            for p in pieces {
                let mut sub = spec_pieces(p)?;
                out.append(&mut sub);
            }
            Ok(out)
        }
        other => Err(ConeError::UnsupportedKind(format!(
            "not polyhedral: {other:?}"
        ))),
    }
}

/// Frechet normal cone of a polyhedral set kind (single cone or union of
/// convex pieces) at a point of the set.
pub fn frechet_normal_cone_of_spec(spec: &SetSpec, at: &[f64]) -> Result<PolyCone, ConeError> {
    let pieces = spec_pieces(spec)?;
    frechet_normal_cone(&pieces, at)
}
