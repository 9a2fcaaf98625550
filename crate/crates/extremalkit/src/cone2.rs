//! Exact calculus for planar cones represented as unions of closed
//! angular sectors. This is the workhorse behind 2-D polar conversion,
//! exact nonoverlap checks, fan fitting, and limiting normal cones of
//! fitted tangent cones.
//!
//! A `Cone2` always contains the origin. An arc with zero span is a
//! single ray; a full cover is the whole plane; no arcs means `{0}`.

use std::f64::consts::{PI, TAU};

const ANG_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    /// Start angle, normalized into `[0, tau)`.
    pub start: f64,
    /// Span in radians, in `[0, tau]`.
    pub span: f64,
}

impl Arc {
    pub fn new(start: f64, span: f64) -> Self {
        assert!((0.0..=TAU + ANG_EPS).contains(&span));
        Arc {
            start: wrap(start),
            span: span.min(TAU),
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.span
    }

    pub fn contains_angle(&self, theta: f64, tol: f64) -> bool {
        if self.span >= TAU - ANG_EPS {
            return true;
        }
        let mut t = wrap(theta);
        if t < self.start - tol {
            t += TAU;
        }
        t >= self.start - tol && t <= self.end() + tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cone2 {
    arcs: Vec<Arc>,
}

fn wrap(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    // Collapse values that round onto tau.
    if (t - TAU).abs() < 1e-15 {
        t = 0.0;
    }
    t
}

pub fn angle_of(v: &[f64]) -> f64 {
    wrap(v[1].atan2(v[0]))
}

pub fn unit(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

/// Angular distance on the circle, in `[0, pi]`.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (wrap(a) - wrap(b)).abs();
    d.min(TAU - d)
}

impl Cone2 {
    pub fn zero() -> Self {
        Cone2 { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        Cone2 {
            arcs: vec![Arc::new(0.0, TAU)],
        }
    }

    pub fn ray(theta: f64) -> Self {
        Cone2 {
            arcs: vec![Arc::new(theta, 0.0)],
        }
    }

    pub fn sector(start: f64, span: f64) -> Self {
        Cone2 {
            arcs: vec![Arc::new(start, span)],
        }
        .merged()
    }

    /// Halfplane `{x : <normal, x> <= 0}` as a sector of span pi.
    pub fn halfplane(normal: &[f64]) -> Self {
        let t = angle_of(normal);
        Cone2::sector(t + PI / 2.0, PI)
    }

    pub fn from_arcs(arcs: Vec<Arc>) -> Self {
        Cone2 { arcs }.merged()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn is_zero_only(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.arcs.len() == 1 && self.arcs[0].span >= TAU - ANG_EPS
    }

    /// A single convex sector must span at most pi.
    pub fn is_convex(&self) -> bool {
        self.is_zero_only()
            || (self.arcs.len() == 1 && self.arcs[0].span <= PI + ANG_EPS)
            || self.is_full()
    }

    pub fn contains_angle(&self, theta: f64, tol: f64) -> bool {
        self.arcs.iter().any(|a| a.contains_angle(theta, tol))
    }

    pub fn contains_dir(&self, v: &[f64], tol: f64) -> bool {
        self.contains_angle(angle_of(v), tol)
    }

    /// Canonical form: sorted by start, overlapping or touching arcs merged,
    /// wrap-around handled.
    fn merged(mut self) -> Self {
        if self.arcs.is_empty() {
            return self;
        }
        if self.arcs.iter().any(|a| a.span >= TAU - ANG_EPS) {
            return Cone2::full();
        }
        self.arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut out: Vec<Arc> = Vec::new();
        for arc in self.arcs.iter() {
            match out.last_mut() {
                Some(last) if arc.start <= last.end() + ANG_EPS => {
                    let new_end = last.end().max(arc.end());
                    last.span = new_end - last.start;
                }
                _ => out.push(*arc),
            }
        }
        // Wrap-around merge: the last arc may reach past tau into the first.
        while out.len() > 1 {
            let last = *out.last().unwrap();
            let first = out[0];
            if last.end() >= first.start + TAU - ANG_EPS {
                let merged_end = last.end().max(first.end() + TAU);
                let span = (merged_end - last.start).min(TAU);
                out.remove(0);
                let pos = out.len() - 1;
                out[pos] = Arc {
                    start: last.start,
                    span,
                };
            } else {
                break;
            }
        }
        if out.len() == 1 && out[0].span >= TAU - ANG_EPS {
            return Cone2::full();
        }
        Cone2 { arcs: out }
    }

    /// Conic hull of rays: minimal enclosing sector, or the full plane when
    /// the directions spread over more than pi.
    pub fn hull_of_rays(dirs: &[Vec<f64>]) -> Self {
        let mut angles: Vec<f64> = dirs
            .iter()
            .filter(|v| crate::linalg::norm(v) > 1e-14)
            .map(|v| angle_of(v))
            .collect();
        if angles.is_empty() {
            return Cone2::zero();
        }
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|a, b| (*a - *b).abs() < ANG_EPS);
        if angles.len() == 1 {
            return Cone2::ray(angles[0]);
        }
        // Largest circular gap determines the enclosing sector.
        let mut best_gap = 0.0;
        let mut gap_at = 0usize;
        for i in 0..angles.len() {
            let next = if i + 1 == angles.len() {
                angles[0] + TAU
            } else {
                angles[i + 1]
            };
            let gap = next - angles[i];
            if gap > best_gap {
                best_gap = gap;
                gap_at = i;
            }
        }
        let span = TAU - best_gap;
        if span > PI + ANG_EPS {
            return Cone2::full();
        }
        let start = angles[(gap_at + 1) % angles.len()];
        Cone2::sector(start, span)
    }

    /// Union of sectors from direction samples: sort, split at circular
    /// gaps larger than `gap`, and take each cluster's angular range.
    pub fn fit_from_dirs(dirs: &[Vec<f64>], gap: f64) -> Self {
        let mut angles: Vec<f64> = dirs
            .iter()
            .filter(|v| crate::linalg::norm(v) > 1e-14)
            .map(|v| angle_of(v))
            .collect();
        if angles.is_empty() {
            return Cone2::zero();
        }
        angles.sort_by(f64::total_cmp);
        let n = angles.len();
        // Find the largest gap to anchor the circular sweep.
        let mut cut = 0usize;
        let mut best = -1.0;
        for i in 0..n {
            let next = angles[(i + 1) % n] + if i + 1 == n { TAU } else { 0.0 };
            let g = next - angles[i];
            if g > best {
                best = g;
                cut = i;
            }
        }
        if best <= gap {
            return Cone2::full();
        }
        let mut arcs = Vec::new();
        let mut cluster_start = angles[(cut + 1) % n];
        let mut prev = cluster_start;
        for k in 1..=n {
            let idx = (cut + 1 + k) % n;
            let mut a = angles[idx];
            while a < prev - ANG_EPS {
                a += TAU;
            }
            if k == n || a - prev > gap {
                arcs.push(Arc::new(cluster_start, prev - cluster_start));
                cluster_start = wrap(a);
                prev = cluster_start;
            } else {
                prev = a;
            }
        }
        Cone2::from_arcs(arcs)
    }

    pub fn intersect(&self, other: &Cone2) -> Cone2 {
        if self.is_full() {
            return other.clone();
        }
        if other.is_full() {
            return self.clone();
        }
        let mut out = Vec::new();
        for a in &self.arcs {
            for b in &other.arcs {
                for k in [-TAU, 0.0, TAU] {
                    let lo = a.start.max(b.start + k);
                    let hi = a.end().min(b.end() + k);
                    if hi >= lo - ANG_EPS {
                        out.push(Arc::new(lo, (hi - lo).max(0.0)));
                    }
                }
            }
        }
        Cone2::from_arcs(out)
    }

    pub fn union(&self, other: &Cone2) -> Cone2 {
        let mut arcs = self.arcs.clone();
        arcs.extend(other.arcs.iter().copied());
        Cone2::from_arcs(arcs)
    }

    /// Polar cone. Exact: the polar of a sector `[a, a + s]` with `s <= pi`
    /// is the sector `[a + s + pi/2, a + 3 pi/2]`; wider sectors and unions
    /// polarize to the intersection of their parts.
    pub fn polar(&self) -> Cone2 {
        if self.is_zero_only() {
            return Cone2::full();
        }
        let mut result = Cone2::full();
        for arc in &self.arcs {
            let piece = if arc.span > PI + ANG_EPS {
                if arc.span >= TAU - ANG_EPS {
                    Cone2::zero()
                } else {
                    // Split a reflex sector; its polar is the intersection
                    // of the halves' polars.
                    let half = arc.span / 2.0;
                    Cone2::sector(arc.start, half)
                        .polar()
                        .intersect(&Cone2::sector(arc.start + half, arc.span - half).polar())
                }
            } else {
                Cone2::sector(arc.end() + PI / 2.0, PI - arc.span)
            };
            result = result.intersect(&piece);
            if result.is_zero_only() {
                break;
            }
        }
        result
    }

    /// Limiting normal cone at the origin: the union of the Frechet normal
    /// cone at 0 (the polar) with the normals collected along boundary rays
    /// of each maximal sector. Isolated rays contribute their full
    /// orthogonal line.
    pub fn normal_cone_at_origin(&self) -> Cone2 {
        if self.is_zero_only() {
            return Cone2::full();
        }
        if self.is_full() {
            return Cone2::zero();
        }
        let mut result = self.polar();
        for arc in &self.arcs {
            if arc.span < ANG_EPS {
                result = result.union(&Cone2::ray(arc.start + PI / 2.0));
                result = result.union(&Cone2::ray(arc.start - PI / 2.0));
            } else {
                result = result.union(&Cone2::ray(arc.start - PI / 2.0));
                result = result.union(&Cone2::ray(arc.end() + PI / 2.0));
            }
        }
        result
    }

    /// Representative unit rays: sector endpoints plus midpoints of wide
    /// sectors, deduplicated, in angular order.
    pub fn representative_rays(&self) -> Vec<Vec<f64>> {
        let mut angles = Vec::new();
        for arc in &self.arcs {
            if self.is_full() {
                angles.extend([0.0, PI / 2.0, PI, 3.0 * PI / 2.0]);
                break;
            }
            angles.push(arc.start);
            if arc.span > ANG_EPS {
                angles.push(arc.end());
                if arc.span > PI / 2.0 {
                    angles.push(arc.start + arc.span / 2.0);
                }
            }
        }
        let mut angles: Vec<f64> = angles.into_iter().map(wrap).collect();
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|a, b| circ_dist(*a, *b) < ANG_EPS);
        angles.iter().map(|&t| unit(t)).collect()
    }

    /// One-sided angular excess: the largest angular distance from a
    /// direction of `self` to the set `other`.
    pub fn angular_excess_over(&self, other: &Cone2, samples: usize) -> f64 {
        if self.is_zero_only() {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for arc in &self.arcs {
            let steps = ((arc.span / TAU) * samples as f64).ceil() as usize + 1;
            for k in 0..=steps {
                let t = arc.start + arc.span * (k as f64) / (steps.max(1) as f64);
                worst = worst.max(other.angular_dist_to(t));
            }
        }
        worst
    }

    /// Angular distance from the direction `theta` to this cone (0 when
    /// contained).
    pub fn angular_dist_to(&self, theta: f64) -> f64 {
        if self.is_full() {
            return 0.0;
        }
        if self.is_zero_only() {
            return PI;
        }
        let mut best = PI;
        for arc in &self.arcs {
            if arc.contains_angle(theta, 0.0) {
                return 0.0;
            }
            best = best
                .min(circ_dist(theta, arc.start))
                .min(circ_dist(theta, arc.end()));
        }
        best
    }

    /// Symmetric angular Hausdorff distance on the unit circle.
    pub fn hausdorff(&self, other: &Cone2, samples: usize) -> f64 {
        if self.is_zero_only() && other.is_zero_only() {
            return 0.0;
        }
        if self.is_zero_only() || other.is_zero_only() {
            return PI;
        }
        self.angular_excess_over(other, samples)
            .max(other.angular_excess_over(self, samples))
    }

    /// Convex sectors making up this cone (reflex sectors are split).
    pub fn convex_sectors(&self) -> Vec<Arc> {
        let mut out = Vec::new();
        for arc in &self.arcs {
            if arc.span <= PI + ANG_EPS {
                out.push(*arc);
            } else {
                let half = arc.span / 2.0;
                out.push(Arc::new(arc.start, half));
                out.push(Arc::new(arc.start + half, arc.span - half));
            }
        }
        out
    }

    /// Facet normals of a convex sector cone (H-representation rows).
    /// `None` when the cone is not convex.
    pub fn facet_normals(&self) -> Option<Vec<Vec<f64>>> {
        if !self.is_convex() {
            return None;
        }
        if self.is_full() {
            return Some(Vec::new());
        }
        if self.is_zero_only() {
            return Some(vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ]);
        }
        let arc = self.arcs[0];
        if arc.span < ANG_EPS {
            // Ray: two orthogonal walls plus a cap behind the origin.
            Some(vec![
                unit(arc.start + PI / 2.0),
                unit(arc.start - PI / 2.0),
                unit(arc.start + PI),
            ])
        } else if (arc.span - PI).abs() <= ANG_EPS {
            Some(vec![unit(arc.start - PI / 2.0)])
        } else {
            Some(vec![unit(arc.start - PI / 2.0), unit(arc.end() + PI / 2.0)])
        }
    }

    /// Generators of a convex sector cone (V-representation).
    pub fn generators(&self) -> Option<Vec<Vec<f64>>> {
        if !self.is_convex() {
            return None;
        }
        if self.is_zero_only() {
            return Some(Vec::new());
        }
        if self.is_full() {
            return Some(vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
            ]);
        }
        let arc = self.arcs[0];
        if arc.span < ANG_EPS {
            Some(vec![unit(arc.start)])
        } else if arc.span >= PI - ANG_EPS {
            Some(vec![
                unit(arc.start),
                unit(arc.start + arc.span / 2.0),
                unit(arc.end()),
            ])
        } else {
            Some(vec![unit(arc.start), unit(arc.end())])
        }
    }

    /// An interior direction when the cone has angular interior.
    pub fn interior_dir(&self) -> Option<Vec<f64>> {
        if self.is_full() {
            return Some(vec![1.0, 0.0]);
        }
        self.arcs
            .iter()
            .find(|a| a.span > 2.0 * ANG_EPS)
            .map(|a| unit(a.start + a.span / 2.0))
    }
}
