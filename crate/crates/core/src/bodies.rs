//! Convex bodies and their oracles.
//!
//! Three kinds: polytopes (vertex lists), norm balls, and parallel bodies
//! `K + delta B`. All expose `contains` / `support` / `argmax`. Support
//! functions are exact: vertex maxima for polytopes, `phi(c) + r |phi|_*`
//! for balls, and Minkowski-sum additivity for parallel bodies.
//!
//! Normal cones follow the functional characterization: the cone at a
//! boundary point `x` is the inverse Legendre image of
//! `{phi : phi(y - x) <= 0 for all y in K}`. For polytopes the extreme
//! rays of that functional cone are enumerated directly (facets of the
//! tangent cone); for balls the cone is a single ray. Parallel bodies get
//! membership tests only, not generator lists.

use serde::{Deserialize, Serialize};

use nalgebra::DMatrix;

use crate::geom::{Functional, Tolerances, Vector};
use crate::legendre::{dual_norm, legendre, legendre_inverse};
use crate::norms::{Norm, NormSpec};
use crate::numeric::simplex_least_squares;
use crate::sampling::{quasi_directions, CounterRng};
use crate::{check_dim, Error, Result};

#[derive(Debug, Clone)]
pub enum ConvexBody {
    Polytope {
        vertices: Vec<Vector>,
    },
    Ball {
        center: Vector,
        radius: f64,
        norm: Norm,
    },
    /// `base + delta * B` where `B` is the unit ball of `norm`.
    Parallel {
        base: Box<ConvexBody>,
        delta: f64,
        norm: Norm,
    },
}

/// Build a polytope from its vertex list. Requires a full-dimensional
/// affine hull: at least n+1 vertices spanning rank n.
pub fn make_polytope(vertices: Vec<Vector>) -> Result<ConvexBody> {
    if vertices.is_empty() {
        return Err(Error::DegenerateBody("no vertices".into()));
    }
    let n = vertices[0].dim();
    for v in &vertices {
        check_dim(n, v.dim())?;
    }
    if vertices.len() < n + 1 {
        return Err(Error::DegenerateBody(format!(
            "{} vertices cannot span a full-dimensional body in dimension {n}",
            vertices.len()
        )));
    }
    let rows: Vec<f64> = vertices[1..]
        .iter()
        .flat_map(|v| {
            v.coords()
                .iter()
                .zip(vertices[0].coords())
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>()
        })
        .collect();
    let m = DMatrix::from_row_slice(vertices.len() - 1, n, &rows);
    let scale = m.amax().max(1.0);
    if m.rank(1e-10 * scale) < n {
        return Err(Error::DegenerateBody(
            "affine hull is not full-dimensional".into(),
        ));
    }
    Ok(ConvexBody::Polytope { vertices })
}

pub fn make_ball(center: Vector, radius: f64, norm: Norm) -> Result<ConvexBody> {
    check_dim(norm.dim(), center.dim())?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    Ok(ConvexBody::Ball {
        center,
        radius,
        norm,
    })
}

/// The parallel body `K + delta B`, `B` the unit ball of `norm`. Identical
/// to the sublevel set `{x : dist(x, K) <= delta}`.
pub fn parallel_body(base: ConvexBody, delta: f64, norm: Norm) -> Result<ConvexBody> {
    check_dim(norm.dim(), base.dim())?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    Ok(ConvexBody::Parallel {
        base: Box::new(base),
        delta,
        norm,
    })
}

impl ConvexBody {
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Polytope { vertices } => vertices[0].dim(),
            ConvexBody::Ball { center, .. } => center.dim(),
            ConvexBody::Parallel { base, .. } => base.dim(),
        }
    }

    /// Membership within the band `eq_tol * (1 + scale)`.
    ///
    /// Polytopes run a convex-hull least-squares fit with a certified lower
    /// bound, so both answers are backed by a certificate; parallel bodies
    /// delegate to the metric projection of the base body.
    pub fn contains(&self, x: &Vector, tol: &Tolerances) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        match self {
            ConvexBody::Polytope { vertices } => {
                let band = tol.eq_tol * (1.0 + x.max_abs());
                let fit = simplex_least_squares(vertices, x, 20_000);
                Ok(fit.residual <= band)
            }
            ConvexBody::Ball {
                center,
                radius,
                norm,
            } => {
                let d = norm.value(&(x - center));
                Ok(d <= radius + tol.eq_tol * (1.0 + radius))
            }
            ConvexBody::Parallel { base, delta, norm } => {
                let d = crate::projection::distance(norm, base, x, tol)?;
                Ok(d <= delta + tol.eq_tol * (1.0 + delta))
            }
        }
    }

    /// Support function `sup { phi(y) : y in K }`.
    pub fn support(&self, phi: &Functional, tol: &Tolerances) -> Result<f64> {
        check_dim(self.dim(), phi.dim())?;
        match self {
            ConvexBody::Polytope { vertices } => Ok(vertices
                .iter()
                .map(|v| phi.apply(v))
                .fold(f64::NEG_INFINITY, f64::max)),
            ConvexBody::Ball {
                center,
                radius,
                norm,
            } => Ok(phi.apply(center) + radius * dual_norm(norm, phi, tol)?),
            ConvexBody::Parallel { base, delta, norm } => {
                Ok(base.support(phi, tol)? + delta * dual_norm(norm, phi, tol)?)
            }
        }
    }

    /// A maximizer of `phi` over the body. Polytope ties break to the
    /// lowest vertex index so downstream iterations are reproducible.
    pub fn argmax(&self, phi: &Functional, tol: &Tolerances) -> Result<Vector> {
        check_dim(self.dim(), phi.dim())?;
        match self {
            ConvexBody::Polytope { vertices } => {
                let mut best = 0;
                let mut val = phi.apply(&vertices[0]);
                for (i, v) in vertices.iter().enumerate().skip(1) {
                    let s = phi.apply(v);
                    if s > val {
                        val = s;
                        best = i;
                    }
                }
                Ok(vertices[best].clone())
            }
            ConvexBody::Ball {
                center,
                radius,
                norm,
            } => {
                if phi.is_zero() {
                    return Ok(center.clone());
                }
                let u = legendre_inverse(norm, phi, tol)?;
                let d = dual_norm(norm, phi, tol)?;
                Ok(center + &u.scale(radius / d))
            }
            ConvexBody::Parallel { base, delta, norm } => {
                let anchor = base.argmax(phi, tol)?;
                if phi.is_zero() {
                    return Ok(anchor);
                }
                let u = legendre_inverse(norm, phi, tol)?;
                let d = dual_norm(norm, phi, tol)?;
                Ok(&anchor + &u.scale(delta / d))
            }
        }
    }

    /// Points of the body for sampled certificates: all vertices for
    /// polytopes, maximizers of quasi-random functionals otherwise.
    pub fn probe_points(&self, m: usize, seed: u64, tol: &Tolerances) -> Result<Vec<Vector>> {
        match self {
            ConvexBody::Polytope { vertices } => Ok(vertices.clone()),
            _ => {
                let dirs = quasi_directions(self.dim(), m, seed);
                dirs.into_iter()
                    .map(|d| {
                        let phi = Functional::new(d.coords().to_vec()).expect("finite");
                        self.argmax(&phi, tol)
                    })
                    .collect()
            }
        }
    }

    /// An interior anchor: vertex centroid, ball center, or the base
    /// body's anchor.
    pub fn inner_point(&self) -> Vector {
        match self {
            ConvexBody::Polytope { vertices } => {
                let n = vertices[0].dim();
                let mut c = vec![0.0; n];
                for v in vertices {
                    for (ci, vi) in c.iter_mut().zip(v.coords()) {
                        *ci += vi / vertices.len() as f64;
                    }
                }
                Vector::new(c).expect("finite")
            }
            ConvexBody::Ball { center, .. } => center.clone(),
            ConvexBody::Parallel { base, .. } => base.inner_point(),
        }
    }

    /// True when `x` lies within `eps` of the boundary in some probe
    /// direction (coordinate axes plus seeded random directions).
    pub(crate) fn boundary_probe(&self, x: &Vector, eps: f64, tol: &Tolerances) -> Result<bool> {
        let n = self.dim();
        let mut dirs = Vec::with_capacity(2 * n + 8);
        for i in 0..n {
            dirs.push(Vector::basis(n, i));
            dirs.push(Vector::basis(n, i).scale(-1.0));
        }
        let mut rng = CounterRng::new(0x626f756e);
        for _ in 0..8 {
            let d = rng.direction(n);
            dirs.push(d.scale(1.0 / d.euclid()));
        }
        for d in dirs {
            if !self.contains(&(x + &d.scale(eps)), tol)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// How a normal cone answers membership queries.
#[derive(Debug, Clone)]
enum ConeTest {
    /// `L(v)(y - x) <= band` over the stored points of K (exact for
    /// polytopes, where the points are the vertices).
    Functional { points: Vec<Vector> },
    /// The cone is a single ray; compare normalized directions.
    Ray { unit: Vector },
}

/// Birkhoff normal cone of a body at a boundary point.
///
/// `generators` are unit vectors spanning the cone (empty for parallel
/// bodies, where only membership is offered). Membership is positively
/// homogeneous and always accepts the zero vector.
#[derive(Debug, Clone)]
pub struct NormalCone {
    pub base_point: Vector,
    pub generators: Vec<Vector>,
    norm: Norm,
    test: ConeTest,
}

impl NormalCone {
    pub fn membership(&self, v: &Vector, tol: &Tolerances) -> Result<bool> {
        check_dim(self.base_point.dim(), v.dim())?;
        let rho = self.norm.value(v);
        if rho <= tol.eq_tol {
            return Ok(true);
        }
        let u = v.scale(1.0 / rho);
        match &self.test {
            ConeTest::Functional { points } => {
                let phi = legendre(&self.norm, &u, tol)?;
                Ok(points
                    .iter()
                    .all(|y| phi.apply(&(y - &self.base_point)) <= tol.eq_tol))
            }
            ConeTest::Ray { unit } => Ok(u.approx_eq(unit, 10.0 * tol.eq_tol)),
        }
    }

    /// Signed margin of the defining inequalities: `max_y L(u)(y - x)` for
    /// the normalized candidate. Negative or zero means inside the cone.
    pub fn margin(&self, v: &Vector, tol: &Tolerances) -> Result<f64> {
        check_dim(self.base_point.dim(), v.dim())?;
        let rho = self.norm.value(v);
        if rho <= tol.eq_tol {
            return Ok(0.0);
        }
        let u = v.scale(1.0 / rho);
        match &self.test {
            ConeTest::Functional { points } => {
                let phi = legendre(&self.norm, &u, tol)?;
                Ok(points
                    .iter()
                    .map(|y| phi.apply(&(y - &self.base_point)))
                    .fold(f64::NEG_INFINITY, f64::max))
            }
            ConeTest::Ray { unit } => {
                let diff = (&u - unit).euclid();
                Ok(if diff <= 10.0 * tol.eq_tol {
                    -diff
                } else {
                    diff
                })
            }
        }
    }
}

/// Normal cone of `body` at boundary point `x` under the ambient norm.
///
/// The boundary check is an eps-probe with `eps = 10 eq_tol` (scaled by the
/// point's magnitude): `x` must be inside, and some probe must escape.
pub fn normal_cone(
    body: &ConvexBody,
    x: &Vector,
    ambient: &Norm,
    tol: &Tolerances,
) -> Result<NormalCone> {
    check_dim(body.dim(), x.dim())?;
    check_dim(ambient.dim(), x.dim())?;
    if !body.contains(x, tol)? {
        return Err(Error::NotOnBoundary);
    }
    let eps = 10.0 * tol.eq_tol * (1.0 + x.max_abs());
    if !body.boundary_probe(x, eps, tol)? {
        return Err(Error::NotOnBoundary);
    }

    match body {
        ConvexBody::Polytope { vertices } => {
            let functionals = tangent_cone_polar_rays(vertices, x);
            let mut generators = Vec::with_capacity(functionals.len());
            for phi in &functionals {
                let g = legendre_inverse(ambient, phi, tol)?;
                let rho = ambient.value(&g);
                generators.push(g.scale(1.0 / rho));
            }
            Ok(NormalCone {
                base_point: x.clone(),
                generators,
                norm: ambient.clone(),
                test: ConeTest::Functional {
                    points: vertices.clone(),
                },
            })
        }
        ConvexBody::Ball { center, norm, .. } => {
            // Supporting functional at x is the ball norm's Legendre image
            // of x - c; the cone is the single pulled-back ray.
            let phi = legendre(norm, &(x - center), tol)?;
            let g = legendre_inverse(ambient, &phi, tol)?;
            let rho = ambient.value(&g);
            let unit = g.scale(1.0 / rho);
            Ok(NormalCone {
                base_point: x.clone(),
                generators: vec![unit.clone()],
                norm: ambient.clone(),
                test: ConeTest::Ray { unit },
            })
        }
        ConvexBody::Parallel { .. } => {
            // Membership only: sampled support points stand in for vertices.
            let points = body.probe_points(256, 0x636f6e65, tol)?;
            Ok(NormalCone {
                base_point: x.clone(),
                generators: Vec::new(),
                norm: ambient.clone(),
                test: ConeTest::Functional { points },
            })
        }
    }
}

/// Extreme rays of `{phi : phi(v - x) <= 0 for all vertices v}`: each ray
/// annihilates some n-1 linearly independent vertex directions and is
/// nonpositive on the rest. Brute-force subset enumeration; fine for the
/// vertex counts polytopes have here.
fn tangent_cone_polar_rays(vertices: &[Vector], x: &Vector) -> Vec<Functional> {
    let n = x.dim();
    let dirs: Vec<Vector> = vertices
        .iter()
        .map(|v| v - x)
        .filter(|d| d.max_abs() > 1e-12 * (1.0 + x.max_abs()))
        .collect();
    let dscale = dirs.iter().map(|d| d.max_abs()).fold(0.0, f64::max);
    let face_tol = 1e-9 * dscale.max(1e-300);

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if n == 1 {
        candidates.push(vec![1.0]);
        candidates.push(vec![-1.0]);
    } else {
        for_each_combination(dirs.len(), n - 1, |subset| {
            let rows: Vec<&Vector> = subset.iter().map(|&i| &dirs[i]).collect();
            if let Some(v) = kernel_direction(&rows, n) {
                candidates.push(v);
            }
        });
    }

    let mut rays: Vec<Vec<f64>> = Vec::new();
    'cand: for v in candidates {
        for sign in [1.0, -1.0] {
            let phi: Vec<f64> = v.iter().map(|c| c * sign).collect();
            let ok = dirs
                .iter()
                .all(|d| phi.iter().zip(d.coords()).map(|(a, b)| a * b).sum::<f64>() <= face_tol);
            if ok {
                if !rays
                    .iter()
                    .any(|r| r.iter().zip(&phi).all(|(a, b)| (a - b).abs() <= 1e-8))
                {
                    rays.push(phi);
                }
                continue 'cand;
            }
        }
    }
    rays.sort_by(|a, b| a.partial_cmp(b).expect("finite rays"));
    rays.into_iter()
        .map(|r| Functional::new(r).expect("finite"))
        .collect()
}

/// Unit Euclidean kernel vector of the k x n matrix with the given rows,
/// provided the rows are independent and leave exactly one free column.
/// Gauss-Jordan with partial pivoting; returns None on rank deficiency.
fn kernel_direction(rows: &[&Vector], n: usize) -> Option<Vec<f64>> {
    let k = rows.len();
    debug_assert_eq!(k + 1, n);
    let mut a: Vec<Vec<f64>> = rows.iter().map(|r| r.coords().to_vec()).collect();
    let scale = a
        .iter()
        .flat_map(|r| r.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let tol = 1e-10 * scale;
    let mut pivot_cols = Vec::with_capacity(k);
    let mut row = 0;
    for col in 0..n {
        if row == k {
            break;
        }
        let (mut best, mut bv) = (row, 0.0);
        for r in row..k {
            if a[r][col].abs() > bv {
                bv = a[r][col].abs();
                best = r;
            }
        }
        if bv <= tol {
            continue;
        }
        a.swap(row, best);
        let p = a[row][col];
        for r in 0..k {
            if r != row {
                let f = a[r][col] / p;
                if f != 0.0 {
                    for c in 0..n {
                        a[r][c] -= f * a[row][c];
                    }
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    if pivot_cols.len() != k {
        return None;
    }
    let free = (0..n)
        .find(|c| !pivot_cols.contains(c))
        .expect("one free column");
    let mut v = vec![0.0; n];
    v[free] = 1.0;
    for (r, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = -a[r][free] / a[r][pc];
    }
    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Some(v.into_iter().map(|x| x / len).collect())
}

/// Visit every k-subset of 0..m in lexicographic order.
fn for_each_combination(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 || k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k as isize - 1;
        while i >= 0 && idx[i as usize] == m - k + i as usize {
            i -= 1;
        }
        if i < 0 {
            return;
        }
        let i = i as usize;
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Declarative body description bound to an ambient norm at instantiation.
/// Balls and parallel bodies default their norm to the ambient one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodySpec {
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<NormSpec>,
    },
    Parallel {
        base: Box<BodySpec>,
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<NormSpec>,
    },
}

impl BodySpec {
    pub fn instantiate(&self, ambient: &Norm) -> Result<ConvexBody> {
        match self {
            BodySpec::Polytope { vertices } => {
                let vs = vertices
                    .iter()
                    .map(|v| Vector::new(v.clone()))
                    .collect::<Result<Vec<_>>>()?;
                make_polytope(vs)
            }
            BodySpec::Ball {
                center,
                radius,
                norm,
            } => {
                let c = Vector::new(center.clone())?;
                let n = match norm {
                    Some(spec) => spec.instantiate(c.dim())?,
                    None => ambient.clone(),
                };
                make_ball(c, *radius, n)
            }
            BodySpec::Parallel { base, delta, norm } => {
                let b = base.instantiate(ambient)?;
                let n = match norm {
                    Some(spec) => spec.instantiate(b.dim())?,
                    None => ambient.clone(),
                };
                parallel_body(b, *delta, n)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Tolerances;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn f(c: &[f64]) -> Functional {
        Functional::new(c.to_vec()).unwrap()
    }

    fn square() -> ConvexBody {
        make_polytope(vec![
            v(&[1.0, 1.0]),
            v(&[1.0, -1.0]),
            v(&[-1.0, 1.0]),
            v(&[-1.0, -1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn degenerate_vertex_lists_are_rejected() {
        let few = make_polytope(vec![v(&[0.0, 0.0]), v(&[1.0, 1.0])]);
        assert!(matches!(few, Err(Error::DegenerateBody(_))));
        let flat = make_polytope(vec![v(&[0.0, 0.0]), v(&[1.0, 1.0]), v(&[2.0, 2.0])]);
        assert!(matches!(flat, Err(Error::DegenerateBody(_))));
    }

    #[test]
    fn square_support_and_lowest_index_tie() {
        let tol = Tolerances::default();
        let k = square();
        assert!((k.support(&f(&[1.0, 0.0]), &tol).unwrap() - 1.0).abs() < 1e-15);
        // (1,1) and (1,-1) tie; the earlier vertex wins
        let a = k.argmax(&f(&[1.0, 0.0]), &tol).unwrap();
        assert!(a.approx_eq(&v(&[1.0, 1.0]), 0.0));
    }

    #[test]
    fn ball_support_is_center_plus_dual_norm() {
        let tol = Tolerances::default();
        let b = make_ball(Vector::zeros(2), 1.0, Norm::euclidean(2).unwrap()).unwrap();
        assert!((b.support(&f(&[3.0, 4.0]), &tol).unwrap() - 5.0).abs() < 1e-12);
        let a = b.argmax(&f(&[3.0, 4.0]), &tol).unwrap();
        assert!(a.approx_eq(&v(&[0.6, 0.8]), 1e-12));

        let q = make_ball(Vector::zeros(2), 2.0, Norm::p_norm(4.0, 2).unwrap()).unwrap();
        let want = 2.0 * 2f64.powf(0.75); // dual exponent 4/3 on (1,1)
        assert!((q.support(&f(&[1.0, 1.0]), &tol).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn parallel_support_is_additive() {
        let tol = Tolerances::default();
        let e = parallel_body(square(), 1.0, Norm::euclidean(2).unwrap()).unwrap();
        assert!((e.support(&f(&[1.0, 0.0]), &tol).unwrap() - 2.0).abs() < 1e-12);

        let p = parallel_body(square(), 1.0, Norm::p_norm(4.0, 2).unwrap()).unwrap();
        let want = 2.0 + 2f64.powf(0.75);
        assert!((p.support(&f(&[1.0, 1.0]), &tol).unwrap() - want).abs() < 1e-10);

        // additivity against the pieces on an oblique functional
        let phi = f(&[0.7, -1.3]);
        let base = square().support(&phi, &tol).unwrap();
        let ball = make_ball(Vector::zeros(2), 1.0, Norm::p_norm(4.0, 2).unwrap())
            .unwrap()
            .support(&phi, &tol)
            .unwrap();
        assert!((p.support(&phi, &tol).unwrap() - (base + ball)).abs() < 1e-10);
    }

    #[test]
    fn argmax_attains_support() {
        let tol = Tolerances::default();
        let bodies: Vec<ConvexBody> = vec![
            square(),
            make_ball(v(&[0.5, -0.25]), 1.5, Norm::p_norm(1.5, 2).unwrap()).unwrap(),
            parallel_body(square(), 0.5, Norm::euclidean(2).unwrap()).unwrap(),
        ];
        let phis = [f(&[1.0, 2.0]), f(&[-0.3, 0.9]), f(&[-2.0, -1.0])];
        for k in &bodies {
            for phi in &phis {
                let s = k.support(phi, &tol).unwrap();
                let a = k.argmax(phi, &tol).unwrap();
                assert!((phi.apply(&a) - s).abs() <= 1e-9 * (1.0 + s.abs()));
            }
        }
    }

    #[test]
    fn containment_bands() {
        let tol = Tolerances::default();
        let k = square();
        assert!(k.contains(&v(&[0.3, -0.7]), &tol).unwrap());
        assert!(k.contains(&v(&[1.0, 1.0]), &tol).unwrap());
        assert!(!k.contains(&v(&[1.001, 0.0]), &tol).unwrap());
        let b = make_ball(Vector::zeros(2), 1.0, Norm::euclidean(2).unwrap()).unwrap();
        assert!(b.contains(&v(&[0.6, 0.8]), &tol).unwrap());
        assert!(!b.contains(&v(&[0.8, 0.8]), &tol).unwrap());
    }

    #[test]
    fn parallel_containment_uses_base_distance() {
        let tol = Tolerances::default();
        let k = parallel_body(square(), 1.0, Norm::euclidean(2).unwrap()).unwrap();
        assert!(k.contains(&v(&[0.0, 1.8]), &tol).unwrap());
        assert!(!k.contains(&v(&[0.0, 2.5]), &tol).unwrap());
        // rounded corner: (1,1) + 1 along the diagonal is outside, the
        // axis-aligned offset is inside
        assert!(k.contains(&v(&[2.0, 1.0]), &tol).unwrap());
        assert!(!k.contains(&v(&[1.8, 1.8]), &tol).unwrap());
    }

    #[test]
    fn facet_normal_cone_is_a_single_ray() {
        let tol = Tolerances::default();
        let cone = normal_cone(
            &square(),
            &v(&[1.0, 0.0]),
            &Norm::euclidean(2).unwrap(),
            &tol,
        )
        .unwrap();
        assert_eq!(cone.generators.len(), 1);
        assert!(cone.generators[0].approx_eq(&v(&[1.0, 0.0]), 1e-9));
        assert!(cone.membership(&v(&[3.0, 0.0]), &tol).unwrap());
        assert!(!cone.membership(&v(&[1.0, 0.5]), &tol).unwrap());
    }

    #[test]
    fn vertex_normal_cone_spans_the_quadrant() {
        let tol = Tolerances::default();
        let cone = normal_cone(
            &square(),
            &v(&[1.0, 1.0]),
            &Norm::euclidean(2).unwrap(),
            &tol,
        )
        .unwrap();
        assert_eq!(cone.generators.len(), 2);
        let mut gens = cone.generators.clone();
        gens.sort_by(|a, b| a.coords()[0].partial_cmp(&b.coords()[0]).unwrap());
        assert!(gens[0].approx_eq(&v(&[0.0, 1.0]), 1e-9));
        assert!(gens[1].approx_eq(&v(&[1.0, 0.0]), 1e-9));

        let s = 0.5f64.sqrt();
        assert!(cone.membership(&v(&[s, s]), &tol).unwrap());
        assert!(!cone.membership(&v(&[-1.0, 0.0]), &tol).unwrap());
        assert!(cone.membership(&Vector::zeros(2), &tol).unwrap());
        // positive homogeneity
        for alpha in [0.05, 1.0, 40.0] {
            assert!(cone.membership(&v(&[s * alpha, s * alpha]), &tol).unwrap());
            assert!(!cone.membership(&v(&[-alpha, 0.0]), &tol).unwrap());
        }
    }

    #[test]
    fn quartic_ambient_pulls_generators_through_the_inverse_transform() {
        let tol = Tolerances::default();
        let p4 = Norm::p_norm(4.0, 2).unwrap();
        let cone = normal_cone(&square(), &v(&[1.0, 1.0]), &p4, &tol).unwrap();
        assert_eq!(cone.generators.len(), 2);
        for g in &cone.generators {
            assert!((p4.value(g) - 1.0).abs() < 1e-9);
            // defining inequality of the cone at the base point
            let phi = legendre(&p4, g, &tol).unwrap();
            if let ConvexBody::Polytope { vertices } = square() {
                for y in &vertices {
                    assert!(phi.apply(&(y - &cone.base_point)) <= tol.eq_tol);
                }
            }
        }
        assert!(cone.membership(&v(&[1.0, 1.0]), &tol).unwrap());
        assert!(!cone.membership(&v(&[0.0, -1.0]), &tol).unwrap());
    }

    #[test]
    fn ellipsoid_ambient_rescales_the_facet_normal() {
        let tol = Tolerances::default();
        let ell = Norm::ellipsoidal(vec![vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let cone = normal_cone(&square(), &v(&[1.0, 0.0]), &ell, &tol).unwrap();
        assert_eq!(cone.generators.len(), 1);
        // inverse transform of e1 is (1/4, 0); unit-normalized it has
        // ellipsoid norm one
        assert!(cone.generators[0].approx_eq(&v(&[0.5, 0.0]), 1e-9));
    }

    #[test]
    fn ball_normal_cone_is_the_radial_ray() {
        let tol = Tolerances::default();
        let b = make_ball(Vector::zeros(2), 1.0, Norm::euclidean(2).unwrap()).unwrap();
        let cone = normal_cone(&b, &v(&[1.0, 0.0]), &Norm::euclidean(2).unwrap(), &tol).unwrap();
        assert_eq!(cone.generators.len(), 1);
        assert!(cone.generators[0].approx_eq(&v(&[1.0, 0.0]), 1e-9));
        assert!(cone.membership(&v(&[2.0, 0.0]), &tol).unwrap());
        assert!(!cone.membership(&v(&[0.0, 1.0]), &tol).unwrap());
    }

    #[test]
    fn normal_cone_requires_boundary_points() {
        let tol = Tolerances::default();
        let e = normal_cone(
            &square(),
            &v(&[0.2, 0.2]),
            &Norm::euclidean(2).unwrap(),
            &tol,
        );
        assert!(matches!(e, Err(Error::NotOnBoundary)));
        let e = normal_cone(
            &square(),
            &v(&[2.0, 0.0]),
            &Norm::euclidean(2).unwrap(),
            &tol,
        );
        assert!(matches!(e, Err(Error::NotOnBoundary)));
    }

    #[test]
    fn body_spec_round_trip_and_defaulting() {
        let json = r#"{"type":"parallel","base":{"type":"polytope","vertices":[[1,1],[1,-1],[-1,1],[-1,-1]]},"delta":0.5}"#;
        let spec: BodySpec = serde_json::from_str(json).unwrap();
        let ambient = Norm::p_norm(4.0, 2).unwrap();
        let body = spec.instantiate(&ambient).unwrap();
        match &body {
            ConvexBody::Parallel { norm, delta, .. } => {
                assert!(norm.same_as(&ambient));
                assert!((delta - 0.5).abs() < 1e-15);
            }
            _ => panic!("wrong kind"),
        }
        let back = serde_json::to_string(&spec).unwrap();
        let again: BodySpec = serde_json::from_str(&back).unwrap();
        assert!(matches!(again, BodySpec::Parallel { .. }));

        let ball = r#"{"type":"ball","center":[0,0],"radius":2,"norm":{"type":"euclidean"}}"#;
        let spec: BodySpec = serde_json::from_str(ball).unwrap();
        let body = spec.instantiate(&ambient).unwrap();
        match &body {
            ConvexBody::Ball { norm, .. } => assert!(matches!(norm, Norm::Euclidean { .. })),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn five_dimensional_cube_vertex_has_axis_generators() {
        let tol = Tolerances::default();
        let n = 5;
        let mut vertices = Vec::new();
        for mask in 0..(1u32 << n) {
            let coords: Vec<f64> = (0..n)
                .map(|i| if mask & (1 << i) != 0 { 1.0 } else { -1.0 })
                .collect();
            vertices.push(Vector::new(coords).unwrap());
        }
        let cube = make_polytope(vertices).unwrap();
        let x = Vector::new(vec![1.0; n]).unwrap();
        let cone = normal_cone(&cube, &x, &Norm::euclidean(n).unwrap(), &tol).unwrap();
        assert_eq!(cone.generators.len(), n);
        for g in &cone.generators {
            assert!((g.max_abs() - 1.0).abs() < 1e-9);
            assert_eq!(
                g.coords().iter().filter(|c| c.abs() > 1e-9).count(),
                1,
                "generator should be an axis vector"
            );
        }
    }
}
