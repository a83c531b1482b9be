//! Metric projection onto convex bodies.
//!
//! The minimizer of `rho(x - y)` over `K` is computed through the smooth
//! surrogate `g(y) = rho(x - y)^2 / 2`, whose derivative at `y` in
//! direction `v` is `-L(x - y)(v)`. Conditional gradient fits the body
//! oracles: the linear subproblem is exactly `argmax`, and the duality gap
//! `L(x - y)(s - y)` certifies optimality. Polytopes run the pairwise
//! variant over tracked vertex weights, which kills the zigzag stalls of
//! the plain method; balls sharing the ambient norm and parallel bodies
//! reduce to closed forms instead of iterating.

use serde::Serialize;

use crate::bodies::ConvexBody;
use crate::geom::{Tolerances, Vector};
use crate::legendre::legendre;
use crate::norms::Norm;
use crate::numeric::{bisect_nondecreasing, simplex_least_squares};
use crate::{check_dim, Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionResult {
    pub point: Vector,
    pub distance: f64,
    /// Final duality-gap certificate for the squared-norm objective.
    pub gap: f64,
    pub iterations: usize,
    /// Unit outer normal `(x - point) / distance`; absent when `x` is in
    /// the body.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_normal: Option<Vector>,
    /// True when the gap certificate reached `opt_gap`.
    pub certified: bool,
    /// True when `x` sits within the boundary band `100 eq_tol` where the
    /// distance function is treated as nonsmooth.
    pub boundary_band: bool,
}

/// Metric projection of `x` onto `K` under `norm`.
pub fn project(
    norm: &Norm,
    body: &ConvexBody,
    x: &Vector,
    tol: &Tolerances,
) -> Result<ProjectionResult> {
    check_dim(norm.dim(), x.dim())?;
    check_dim(body.dim(), x.dim())?;

    let band = 100.0 * tol.eq_tol * (1.0 + x.max_abs());
    if body.contains(x, tol)? {
        let near_edge = body.boundary_probe(x, band, tol)?;
        return Ok(ProjectionResult {
            point: x.clone(),
            distance: 0.0,
            gap: 0.0,
            iterations: 0,
            outer_normal: None,
            certified: true,
            boundary_band: near_edge,
        });
    }

    let mut out = match body {
        ConvexBody::Ball {
            center,
            radius,
            norm: ball_norm,
        } if ball_norm.same_as(norm) => radial(norm, center, *radius, x)?,
        ConvexBody::Parallel {
            base,
            delta,
            norm: par_norm,
        } if par_norm.same_as(norm) => {
            let inner = project(norm, base, x, tol)?;
            // x is outside K + delta B, so inner.distance > delta and the
            // projection slides delta along the shared outer normal.
            let eta = inner.outer_normal.clone().ok_or(Error::NotOnBoundary)?;
            ProjectionResult {
                point: &inner.point + &eta.scale(*delta),
                distance: inner.distance - delta,
                gap: inner.gap,
                iterations: inner.iterations,
                outer_normal: Some(eta),
                certified: inner.certified,
                boundary_band: false,
            }
        }
        ConvexBody::Polytope { vertices } => {
            let res = pairwise_cg(norm, vertices, x, tol)?;
            face_polish(norm, vertices, x, res, tol)?
        }
        _ => plain_cg(norm, body, x, tol)?,
    };
    out.boundary_band = out.distance <= band;
    Ok(out)
}

fn radial(norm: &Norm, center: &Vector, radius: f64, x: &Vector) -> Result<ProjectionResult> {
    let r = x - center;
    let d = norm.value(&r);
    let eta = r.scale(1.0 / d);
    Ok(ProjectionResult {
        point: center + &eta.scale(radius),
        distance: d - radius,
        gap: 0.0,
        iterations: 0,
        outer_normal: Some(eta),
        certified: true,
        boundary_band: false,
    })
}

/// Exact line search along `y + t d`, `t` in `[0, cap]`: the objective is
/// convex in `t` with slope `-L(x - y - t d)(d)`, so the minimizer is the
/// root of a nondecreasing function.
fn line_search(
    norm: &Norm,
    x: &Vector,
    y: &Vector,
    d: &Vector,
    cap: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let slope = |t: f64| -> f64 {
        let r = &(x - y) - &d.scale(t);
        match legendre(norm, &r, tol) {
            Ok(phi) => -phi.apply(d),
            // r collapsing to zero means the segment passes through x;
            // the objective vanishes there, so it is the minimizer.
            Err(_) => -1.0,
        }
    };
    if slope(cap) <= 0.0 {
        return Ok(cap);
    }
    Ok(bisect_nondecreasing(slope, 0.0, cap, 0.0, 60))
}

struct GapTrack {
    best_gap: f64,
    best_point: Vector,
    best_dist: f64,
    since_improvement: usize,
}

impl GapTrack {
    fn new(y: &Vector, dist: f64) -> Self {
        GapTrack {
            best_gap: f64::INFINITY,
            best_point: y.clone(),
            best_dist: dist,
            since_improvement: 0,
        }
    }

    /// Record the iterate; true when progress has stalled.
    fn update(&mut self, gap: f64, y: &Vector, dist: f64) -> bool {
        if gap < 0.999 * self.best_gap {
            self.best_gap = gap.max(0.0);
            self.best_point = y.clone();
            self.best_dist = dist;
            self.since_improvement = 0;
        } else {
            if gap < self.best_gap {
                self.best_gap = gap.max(0.0);
                self.best_point = y.clone();
                self.best_dist = dist;
            }
            self.since_improvement += 1;
        }
        self.since_improvement > 200
    }

    fn finish(self, x: &Vector, iterations: usize, tol: &Tolerances) -> ProjectionResult {
        let eta = (x - &self.best_point).scale(1.0 / self.best_dist);
        ProjectionResult {
            point: self.best_point,
            distance: self.best_dist,
            gap: self.best_gap,
            iterations,
            outer_normal: Some(eta),
            certified: self.best_gap <= tol.opt_gap,
            boundary_band: false,
        }
    }
}

/// Pairwise conditional gradient over explicit vertex weights.
fn pairwise_cg(
    norm: &Norm,
    vertices: &[Vector],
    x: &Vector,
    tol: &Tolerances,
) -> Result<ProjectionResult> {
    let m = vertices.len();
    let start = {
        // vertex closest to x in the ambient norm
        let mut best = 0;
        let mut bv = norm.value(&(x - &vertices[0]));
        for (i, v) in vertices.iter().enumerate().skip(1) {
            let d = norm.value(&(x - v));
            if d < bv {
                bv = d;
                best = i;
            }
        }
        best
    };
    let mut w = vec![0.0; m];
    w[start] = 1.0;
    let mut y = vertices[start].clone();

    let g0 = norm.value(&(x - &y));
    let target = 1e-13 * (1.0 + g0 * g0);
    let mut track = GapTrack::new(&y, g0);

    for it in 0..tol.max_iter {
        if it > 0 && it % 64 == 0 {
            // rebuild from weights to cancel drift
            let mut fresh = vec![0.0; y.dim()];
            for (wi, v) in w.iter().zip(vertices) {
                for (f, c) in fresh.iter_mut().zip(v.coords()) {
                    *f += wi * c;
                }
            }
            y = Vector::new(fresh)?;
        }
        let r = x - &y;
        let dist = norm.value(&r);
        let phi = legendre(norm, &r, tol)?;

        let mut fw = 0;
        let mut fw_val = f64::NEG_INFINITY;
        let mut away = usize::MAX;
        let mut away_val = f64::INFINITY;
        for (i, v) in vertices.iter().enumerate() {
            let s = phi.apply(v);
            if s > fw_val {
                fw_val = s;
                fw = i;
            }
            if w[i] > 0.0 && s < away_val {
                away_val = s;
                away = i;
            }
        }
        let gap = fw_val - phi.apply(&y);
        if track.update(gap, &y, dist) || gap <= target {
            return Ok(track.finish(x, it + 1, tol));
        }

        let d = &vertices[fw] - &vertices[away];
        if d.max_abs() == 0.0 {
            return Ok(track.finish(x, it + 1, tol));
        }
        let cap = w[away];
        let t = line_search(norm, x, &y, &d, cap, tol)?;
        if t <= 0.0 {
            return Ok(track.finish(x, it + 1, tol));
        }
        w[fw] += t;
        w[away] = (w[away] - t).max(0.0);
        if t == cap {
            w[away] = 0.0;
        }
        y = &y + &d.scale(t);
    }
    Ok(track.finish(x, tol.max_iter, tol))
}

/// Tangential polish of a converged conditional-gradient point. The gap
/// pins the distance, but a flat objective (p > 2 norms with axis-aligned
/// displacement) leaves the point loose along the optimal face: a gap of
/// 1e-13 bounds the tangential error only by its fourth root. Slide the
/// point through the affine hull of the exposed face, zeroing each
/// directional slope by sign bisection, which sees through the flatness.
/// Guarded: the polished point is kept only when it stays in the hull and
/// does not worsen the distance or the certificate.
fn face_polish(
    norm: &Norm,
    vertices: &[Vector],
    x: &Vector,
    res: ProjectionResult,
    tol: &Tolerances,
) -> Result<ProjectionResult> {
    let r = x - &res.point;
    if res.distance <= 0.0 || r.max_abs() == 0.0 {
        return Ok(res);
    }
    let phi = match legendre(norm, &r, tol) {
        Ok(p) => p,
        Err(_) => return Ok(res),
    };
    let values: Vec<f64> = vertices.iter().map(|v| phi.apply(v)).collect();
    let top = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let band = 1e-6 * (1.0 + top.abs());
    let mut face: Vec<&Vector> = Vec::new();
    for (v, s) in vertices.iter().zip(&values) {
        if *s >= top - band {
            face.push(v);
        }
    }

    if face.len() == 1 {
        // vertex face: snap exactly
        return Ok(accept_polish(norm, vertices, x, face[0].clone(), res, tol));
    }

    // independent tangent directions of the face
    let a0 = face[0];
    let mut diam = 0.0f64;
    let mut basis: Vec<Vector> = Vec::new();
    for v in &face[1..] {
        let mut d = *v - a0;
        diam = diam.max(d.euclid());
        for b in &basis {
            let c: f64 = d.coords().iter().zip(b.coords()).map(|(p, q)| p * q).sum();
            d = &d - &b.scale(c);
        }
        let len = d.euclid();
        if len > 1e-9 * (1.0 + a0.max_abs()) {
            basis.push(d.scale(1.0 / len));
        }
        if basis.len() + 1 >= x.dim() {
            break;
        }
    }
    if basis.is_empty() {
        return Ok(res);
    }

    let radius = 1.5 * diam + 1.0;
    let floor = 1e-13 * (1.0 + res.point.max_abs());
    let mut y = res.point.clone();
    for _ in 0..30 {
        let mut moved = 0.0f64;
        for b in &basis {
            let t = slope_root(norm, x, &y, b, radius, tol);
            if t != 0.0 {
                y = &y + &b.scale(t);
                moved = moved.max(t.abs());
            }
        }
        if moved <= floor {
            break;
        }
    }
    Ok(accept_polish(norm, vertices, x, y, res, tol))
}

/// Root of the nondecreasing slope `t -> -L(x - y - t d)(d)` on a
/// symmetric bracket: sign bisection locates the minimizer to bracket
/// resolution no matter how flat the objective value is.
fn slope_root(
    norm: &Norm,
    x: &Vector,
    y: &Vector,
    d: &Vector,
    radius: f64,
    tol: &Tolerances,
) -> f64 {
    let slope = |t: f64| -> f64 {
        let rr = &(x - y) - &d.scale(t);
        match legendre(norm, &rr, tol) {
            Ok(phi) => -phi.apply(d),
            // the segment runs into x itself; the objective vanishes
            // there, so push toward it and let the hull guard decide
            Err(_) => -1.0,
        }
    };
    let s0 = slope(0.0);
    if s0 == 0.0 {
        return 0.0;
    }
    let (lo, hi) = if s0 < 0.0 {
        (0.0, radius)
    } else {
        (-radius, 0.0)
    };
    if s0 < 0.0 && slope(hi) <= 0.0 {
        return hi;
    }
    if s0 > 0.0 && slope(lo) >= 0.0 {
        return lo;
    }
    bisect_nondecreasing(slope, lo, hi, 0.0, 80)
}

/// Keep a polished point only when it stays in the vertex hull and beats
/// the incumbent; the certificate is recomputed for the point actually
/// returned.
fn accept_polish(
    norm: &Norm,
    vertices: &[Vector],
    x: &Vector,
    y: Vector,
    old: ProjectionResult,
    tol: &Tolerances,
) -> ProjectionResult {
    let r = x - &y;
    let dist = norm.value(&r);
    if !dist.is_finite() || dist <= 0.0 || dist > old.distance * (1.0 + 1e-12) + 1e-15 {
        return old;
    }
    let fit = simplex_least_squares(vertices, &y, 20_000);
    if fit.residual > tol.eq_tol * (1.0 + y.max_abs()) {
        return old;
    }
    let phi = match legendre(norm, &r, tol) {
        Ok(p) => p,
        Err(_) => return old,
    };
    let top = vertices
        .iter()
        .map(|v| phi.apply(v))
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = (top - phi.apply(&y)).max(0.0);
    if gap > old.gap.max(tol.opt_gap) {
        return old;
    }
    ProjectionResult {
        outer_normal: Some(r.scale(1.0 / dist)),
        point: y,
        distance: dist,
        gap,
        iterations: old.iterations,
        certified: gap <= tol.opt_gap,
        boundary_band: old.boundary_band,
    }
}

/// Plain conditional gradient for bodies without a vertex list.
fn plain_cg(
    norm: &Norm,
    body: &ConvexBody,
    x: &Vector,
    tol: &Tolerances,
) -> Result<ProjectionResult> {
    let mut y = body.inner_point();
    let g0 = norm.value(&(x - &y));
    let target = 1e-13 * (1.0 + g0 * g0);
    let mut track = GapTrack::new(&y, g0);

    for it in 0..tol.max_iter {
        let r = x - &y;
        let dist = norm.value(&r);
        let phi = legendre(norm, &r, tol)?;
        let s = body.argmax(&phi, tol)?;
        let gap = phi.apply(&(&s - &y));
        if track.update(gap, &y, dist) || gap <= target {
            return Ok(track.finish(x, it + 1, tol));
        }
        let d = &s - &y;
        let t = line_search(norm, x, &y, &d, 1.0, tol)?;
        if t <= 0.0 {
            return Ok(track.finish(x, it + 1, tol));
        }
        y = &y + &d.scale(t);
    }
    Ok(track.finish(x, tol.max_iter, tol))
}

/// `inf { rho(x - y) : y in K }`.
pub fn distance(norm: &Norm, body: &ConvexBody, x: &Vector, tol: &Tolerances) -> Result<f64> {
    Ok(project(norm, body, x, tol)?.distance)
}

/// Gradient of the distance function: the unit outer normal at the
/// projection. Zero inside the body; points in the boundary band are
/// rejected because the distance is nonsmooth exactly on the boundary.
pub fn distance_gradient(
    norm: &Norm,
    body: &ConvexBody,
    x: &Vector,
    tol: &Tolerances,
) -> Result<Vector> {
    let res = project(norm, body, x, tol)?;
    if res.outer_normal.is_none() {
        if res.boundary_band {
            return Err(Error::BoundaryBand {
                band: 100.0 * tol.eq_tol * (1.0 + x.max_abs()),
            });
        }
        return Ok(Vector::zeros(x.dim()));
    }
    if res.boundary_band {
        return Err(Error::BoundaryBand {
            band: 100.0 * tol.eq_tol * (1.0 + x.max_abs()),
        });
    }
    Ok(res.outer_normal.expect("outside the body"))
}

/// Sun property: every point on the outward ray through the projection
/// projects back to the same point.
pub fn sun_check(
    norm: &Norm,
    body: &ConvexBody,
    x: &Vector,
    t: f64,
    tol: &Tolerances,
) -> Result<bool> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(
            "ray parameter must be positive".into(),
        ));
    }
    if body.contains(x, tol)? {
        return Err(Error::InvalidParameter(
            "sun property is about exterior points".into(),
        ));
    }
    let base = project(norm, body, x, tol)?;
    let eta = base.outer_normal.as_ref().expect("outside the body");
    let moved = &base.point + &eta.scale(t);
    let again = project(norm, body, &moved, tol)?;
    let drift = norm.value(&(&again.point - &base.point));
    Ok(drift <= 10.0 * tol.eq_tol * (1.0 + base.point.max_abs()))
}

/// Normal-vector transfer to the parallel body: a unit normal-cone vector
/// `u` at `z` supports `K + delta B` at `z + delta u`.
pub fn parallel_normal_check(
    norm: &Norm,
    body: &ConvexBody,
    z: &Vector,
    u: &Vector,
    delta: f64,
    tol: &Tolerances,
) -> Result<bool> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let rho = norm.value(u);
    if (rho - 1.0).abs() > tol.eq_tol * 10.0 {
        return Err(Error::InvalidParameter("normal vector must be unit".into()));
    }
    let cone = crate::bodies::normal_cone(body, z, norm, tol)?;
    if !cone.membership(u, tol)? {
        return Err(Error::NotInNormalCone);
    }
    let touch = z + &u.scale(delta);
    let phi = legendre(norm, u, tol)?;
    let enlarged = crate::bodies::parallel_body(body.clone(), delta, norm.clone())?;
    let points = enlarged.probe_points(256, 0x70617261, tol)?;
    let scale = 1.0 + touch.max_abs();
    Ok(points
        .iter()
        .all(|y| phi.apply(&(y - &touch)) <= tol.eq_tol * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{make_ball, make_polytope, parallel_body};
    use crate::sampling::CounterRng;

    fn square() -> ConvexBody {
        make_polytope(vec![
            Vector::new(vec![1.0, 1.0]).unwrap(),
            Vector::new(vec![1.0, -1.0]).unwrap(),
            Vector::new(vec![-1.0, 1.0]).unwrap(),
            Vector::new(vec![-1.0, -1.0]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn euclid_ball_projects_radially() {
        let norm = Norm::euclidean(2).unwrap();
        let tol = Tolerances::default();
        let ball = make_ball(Vector::zeros(2), 1.0, norm.clone()).unwrap();
        let x = Vector::new(vec![2.0, 0.0]).unwrap();
        let r = project(&norm, &ball, &x, &tol).unwrap();
        assert!(r
            .point
            .approx_eq(&Vector::new(vec![1.0, 0.0]).unwrap(), 1e-12));
        assert!((r.distance - 1.0).abs() < 1e-12);
        assert!(r.certified);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn quartic_norm_square_from_axis_point() {
        // minimizer sits mid-edge by symmetry; grid oracle over the near
        // edge pins the distance
        let norm = Norm::p_norm(4.0, 2).unwrap();
        let tol = Tolerances::default();
        let x = Vector::new(vec![3.0, 0.0]).unwrap();
        let r = project(&norm, &square(), &x, &tol).unwrap();
        assert!(r
            .point
            .approx_eq(&Vector::new(vec![1.0, 0.0]).unwrap(), 1e-6));
        assert!((r.distance - 2.0).abs() < 1e-9);
        assert!(
            r.certified,
            "gap {} after {} iterations",
            r.gap, r.iterations
        );

        let mut grid_best = f64::INFINITY;
        let edges = [
            (
                Vector::new(vec![1.0, -1.0]).unwrap(),
                Vector::new(vec![1.0, 1.0]).unwrap(),
            ),
            (
                Vector::new(vec![-1.0, -1.0]).unwrap(),
                Vector::new(vec![1.0, -1.0]).unwrap(),
            ),
            (
                Vector::new(vec![-1.0, 1.0]).unwrap(),
                Vector::new(vec![1.0, 1.0]).unwrap(),
            ),
            (
                Vector::new(vec![-1.0, -1.0]).unwrap(),
                Vector::new(vec![-1.0, 1.0]).unwrap(),
            ),
        ];
        for (a, b) in &edges {
            let steps = 200_000;
            for k in 0..=steps {
                let t = k as f64 / steps as f64;
                let y = a + &(b - a).scale(t);
                grid_best = grid_best.min(norm.value(&(&x - &y)));
            }
        }
        assert!((r.distance - grid_best).abs() < 1e-8);
    }

    #[test]
    fn interior_point_is_fixed() {
        let norm = Norm::p_norm(4.0, 2).unwrap();
        let tol = Tolerances::default();
        let x = Vector::new(vec![0.3, -0.4]).unwrap();
        let r = project(&norm, &square(), &x, &tol).unwrap();
        assert!(r.point.approx_eq(&x, 0.0));
        assert_eq!(r.distance, 0.0);
        assert!(r.outer_normal.is_none());
        assert!(!r.boundary_band);
    }

    #[test]
    fn band_flags_near_boundary_points() {
        let norm = Norm::euclidean(2).unwrap();
        let tol = Tolerances::default();
        let inside = Vector::new(vec![1.0 - 1e-7, 0.0]).unwrap();
        let r = project(&norm, &square(), &inside, &tol).unwrap();
        assert_eq!(r.distance, 0.0);
        assert!(r.boundary_band);

        let outside = Vector::new(vec![1.0 + 1e-6, 0.0]).unwrap();
        let r = project(&norm, &square(), &outside, &tol).unwrap();
        assert!(r.boundary_band);
        assert!(r.distance < 1e-5);
    }

    #[test]
    fn square_distances_match_hand_values() {
        let norm = Norm::euclidean(2).unwrap();
        let tol = Tolerances::default();
        let d1 = distance(
            &norm,
            &square(),
            &Vector::new(vec![0.0, 3.0]).unwrap(),
            &tol,
        )
        .unwrap();
        assert!((d1 - 2.0).abs() < 1e-9);
        // nearest point to (2,2) is the vertex (1,1)
        let d2 = distance(
            &norm,
            &square(),
            &Vector::new(vec![2.0, 2.0]).unwrap(),
            &tol,
        )
        .unwrap();
        assert!((d2 - 2f64.sqrt()).abs() < 1e-9);
        let d3 = distance(
            &norm,
            &square(),
            &Vector::new(vec![0.2, 0.1]).unwrap(),
            &tol,
        )
        .unwrap();
        assert_eq!(d3, 0.0);
    }

    #[test]
    fn parallel_body_reduction_is_exact() {
        let norm = Norm::euclidean(2).unwrap();
        let tol = Tolerances::default();
        let body = parallel_body(square(), 1.0, norm.clone()).unwrap();
        let x = Vector::new(vec![0.0, 3.0]).unwrap();
        let r = project(&norm, &body, &x, &tol).unwrap();
        assert!((r.distance - 1.0).abs() < 1e-9);
        assert!(r
            .point
            .approx_eq(&Vector::new(vec![0.0, 2.0]).unwrap(), 1e-9));
        let eta = r.outer_normal.unwrap();
        assert!(eta.approx_eq(&Vector::new(vec![0.0, 1.0]).unwrap(), 1e-9));
    }

    #[test]
    fn mixed_norm_parallel_body_still_projects() {
        // enlargement ball is euclidean, ambient norm is quartic: no
        // reduction applies, the generic solver must still certify
        let ambient = Norm::p_norm(4.0, 2).unwrap();
        let tol = Tolerances::default();
        let body = parallel_body(square(), 0.5, Norm::euclidean(2).unwrap()).unwrap();
        let x = Vector::new(vec![4.0, 1.5]).unwrap();
        let r = project(&ambient, &body, &x, &tol).unwrap();
        assert!(r.certified, "gap {}", r.gap);
        assert!(body.contains(&r.point, &tol).unwrap());
        let re = ambient.value(&(&x - &r.point));
        assert!((re - r.distance).abs() < 1e-8);
        // optimality against sampled body points
        for y in body.probe_points(100, 7, &tol).unwrap() {
            assert!(r.distance <= ambient.value(&(&x - &y)) + 1e-7);
        }
    }

    #[test]
    fn projection_is_left_orthogonal_to_body() {
        let norm = Norm::p_norm(1.5, 2).unwrap();
        let tol = Tolerances::default();
        let x = Vector::new(vec![2.5, 1.7]).unwrap();
        let r = project(&norm, &square(), &x, &tol).unwrap();
        let phi = legendre(&norm, &(&x - &r.point), &tol).unwrap();
        if let ConvexBody::Polytope { vertices } = square() {
            for v in &vertices {
                assert!(phi.apply(&(v - &r.point)) <= 10.0 * tol.eq_tol * (1.0 + phi.max_abs()));
            }
        }
    }

    #[test]
    fn distance_gradient_matches_outer_normal_and_fd() {
        let norm = Norm::p_norm(4.0, 2).unwrap();
        let tol = Tolerances::default();
        let x = Vector::new(vec![3.0, 0.0]).unwrap();
        let g = distance_gradient(&norm, &square(), &x, &tol).unwrap();
        assert!(g.approx_eq(&Vector::new(vec![1.0, 0.0]).unwrap(), 1e-6));

        let phi = legendre(&norm, &g, &tol).unwrap();
        let h = 1e-3;
        for i in 0..2 {
            let e = Vector::basis(2, i);
            let dp = distance(&norm, &square(), &(&x + &e.scale(h)), &tol).unwrap();
            let dm = distance(&norm, &square(), &(&x - &e.scale(h)), &tol).unwrap();
            let fd = (dp - dm) / (2.0 * h);
            assert!(
                (fd - phi.apply(&e)).abs() < 1e-4,
                "coordinate {i}: fd {fd} vs {}",
                phi.apply(&e)
            );
        }
    }

    #[test]
    fn interior_gradient_is_zero_and_band_rejects() {
        let norm = Norm::euclidean(2).unwrap();
        let tol = Tolerances::default();
        let g = distance_gradient(
            &norm,
            &square(),
            &Vector::new(vec![0.1, 0.2]).unwrap(),
            &tol,
        )
        .unwrap();
        assert!(g.is_zero());
        let e = distance_gradient(
            &norm,
            &square(),
            &Vector::new(vec![1.0 - 1e-7, 0.0]).unwrap(),
            &tol,
        );
        assert!(matches!(e, Err(Error::BoundaryBand { .. })));
    }

    #[test]
    fn sun_property_holds_on_rays() {
        let tol = Tolerances::default();
        let euclid = Norm::euclidean(2).unwrap();
        assert!(sun_check(
            &euclid,
            &square(),
            &Vector::new(vec![3.0, 0.0]).unwrap(),
            5.0,
            &tol
        )
        .unwrap());
        let p4 = Norm::p_norm(4.0, 2).unwrap();
        for t in [0.5, 2.0, 10.0] {
            assert!(sun_check(
                &p4,
                &square(),
                &Vector::new(vec![3.0, 0.0]).unwrap(),
                t,
                &tol
            )
            .unwrap());
        }
    }

    #[test]
    fn sun_property_on_random_scenarios() {
        let tol = Tolerances::default();
        let norm = Norm::p_norm(1.5, 2).unwrap();
        let mut rng = CounterRng::new(0x73756e73);
        for _ in 0..10 {
            let x = Vector::new(vec![
                rng.range(1.5, 4.0) * if rng.uniform() < 0.5 { -1.0 } else { 1.0 },
                rng.range(1.5, 4.0) * if rng.uniform() < 0.5 { -1.0 } else { 1.0 },
            ])
            .unwrap();
            let t = rng.log_range(0.1, 10.0);
            assert!(sun_check(&norm, &square(), &x, t, &tol).unwrap());
        }
    }

    #[test]
    fn sun_survives_quartic_facet_flatness() {
        // displacement to the facet is axis-aligned, where the quartic
        // norm is maximally flat tangentially; the face polish has to
        // hold the reprojection to the same point
        let tol = Tolerances::default();
        let norm = Norm::p_norm(4.0, 3).unwrap();
        let cube = make_polytope(
            (0..8)
                .map(|m| {
                    Vector::new(
                        (0..3)
                            .map(|i| if m & (1 << i) != 0 { 1.0 } else { -1.0 })
                            .collect(),
                    )
                    .unwrap()
                })
                .collect(),
        )
        .unwrap();
        let x = Vector::new(vec![-0.076, -0.744, -1.87]).unwrap();
        for t in [0.5, 2.0, 10.0] {
            assert!(sun_check(&norm, &cube, &x, t, &tol).unwrap());
        }
    }

    #[test]
    fn parallel_normal_transfer() {
        let tol = Tolerances::default();
        let euclid = Norm::euclidean(2).unwrap();
        let z = Vector::new(vec![1.0, 0.0]).unwrap();
        let u = Vector::new(vec![1.0, 0.0]).unwrap();
        assert!(parallel_normal_check(&euclid, &square(), &z, &u, 1.0, &tol).unwrap());

        let p4 = Norm::p_norm(4.0, 2).unwrap();
        let vertex = Vector::new(vec![1.0, 1.0]).unwrap();
        let cone = crate::bodies::normal_cone(&square(), &vertex, &p4, &tol).unwrap();
        for g in &cone.generators {
            assert!(parallel_normal_check(&p4, &square(), &vertex, g, 0.5, &tol).unwrap());
        }

        let not_normal = Vector::new(vec![0.0, 1.0]).unwrap();
        let e = parallel_normal_check(&euclid, &square(), &z, &not_normal, 1.0, &tol);
        assert!(matches!(e, Err(Error::NotInNormalCone)));
    }

    #[test]
    fn weak_contraction_and_convexity_of_distance() {
        let norm = Norm::p_norm(4.0, 2).unwrap();
        let tol = Tolerances::default();
        let mut rng = CounterRng::new(0x64697374);
        for _ in 0..15 {
            let a = Vector::new(vec![rng.range(-4.0, 4.0), rng.range(-4.0, 4.0)]).unwrap();
            let b = Vector::new(vec![rng.range(-4.0, 4.0), rng.range(-4.0, 4.0)]).unwrap();
            let da = distance(&norm, &square(), &a, &tol).unwrap();
            let db = distance(&norm, &square(), &b, &tol).unwrap();
            assert!((da - db).abs() <= norm.value(&(&a - &b)) + 10.0 * tol.eq_tol);
            let lam = rng.uniform();
            let mid = &a.scale(lam) + &b.scale(1.0 - lam);
            let dm = distance(&norm, &square(), &mid, &tol).unwrap();
            assert!(dm <= lam * da + (1.0 - lam) * db + 10.0 * tol.eq_tol);
        }
    }
}
