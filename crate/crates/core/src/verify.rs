//! Invariant verification suites.
//!
//! Each suite exercises one headline property of the library over a grid
//! of dimensions {2, 3, 5} and norms {euclidean, p=1.5, p=4, ellipsoidal
//! diag(1,4,9,...)}. All randomness forks off the caller's seed, so a
//! report is reproducible from (suite, seed) alone.

use std::time::Instant;

use serde::Serialize;

use crate::birkhoff::birkhoff_vv;
use crate::bodies::{make_ball, make_polytope, normal_cone, parallel_body, ConvexBody};
use crate::geom::{kernel_basis, linear_combination, Functional, Tolerances, Vector};
use crate::legendre::{dual_norm, legendre, legendre_inverse};
use crate::norms::Norm;
use crate::projection::{distance, project, sun_check};
use crate::sampling::CounterRng;
use crate::subdifferential::{
    dir_deriv_plus, estimate_check, norm_gradient, rockafellar_potential, subgradient_construct,
    subgradient_member, ConvexFunction, MembershipOracle, MonotoneData, Verdict,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub invariant: String,
    pub inputs: String,
    pub observed: String,
    pub expected: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub cases_run: usize,
    pub failures: Vec<Failure>,
    pub wall_time: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Collects case counts and failures while a suite runs.
struct Ctx {
    cases: usize,
    failures: Vec<Failure>,
}

impl Ctx {
    fn new() -> Self {
        Ctx {
            cases: 0,
            failures: Vec::new(),
        }
    }

    fn check(
        &mut self,
        ok: bool,
        invariant: &str,
        inputs: String,
        observed: String,
        expected: String,
    ) {
        self.cases += 1;
        // cap stored failures so a systematic break stays readable
        if !ok && self.failures.len() < 64 {
            self.failures.push(Failure {
                invariant: invariant.to_string(),
                inputs,
                observed,
                expected,
            });
        }
    }

    fn finish(self, suite: &str, start: Instant) -> VerifyReport {
        VerifyReport {
            suite: suite.to_string(),
            cases_run: self.cases,
            failures: self.failures,
            wall_time: start.elapsed().as_secs_f64(),
        }
    }
}

pub const SUITES: [&str; 12] = [
    "legendre",
    "self_duality",
    "birkhoff",
    "projection",
    "distance_gradient",
    "sun",
    "distance_regularity",
    "max_formula",
    "boundary_cone",
    "rockafellar",
    "norm_gradient",
    "estimate",
];

pub fn run_suite(name: &str, seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    match name {
        "legendre" => suite_legendre(seed, tol),
        "self_duality" => suite_self_duality(seed, tol),
        "birkhoff" => suite_birkhoff(seed, tol),
        "projection" => suite_projection(seed, tol),
        "distance_gradient" => suite_distance_gradient(seed, tol),
        "sun" => suite_sun(seed, tol),
        "distance_regularity" => suite_distance_regularity(seed, tol),
        "max_formula" => suite_max_formula(seed, tol),
        "boundary_cone" => suite_boundary_cone(seed, tol),
        "rockafellar" => suite_rockafellar(seed, tol),
        "norm_gradient" => suite_norm_gradient(seed, tol),
        "estimate" => suite_estimate(seed, tol),
        other => Err(Error::InvalidParameter(format!("unknown suite '{other}'"))),
    }
}

pub fn run_all(seed: u64, tol: &Tolerances) -> Result<Vec<VerifyReport>> {
    SUITES.iter().map(|s| run_suite(s, seed, tol)).collect()
}

pub const DIMS: [usize; 3] = [2, 3, 5];

/// The standard norm grid in one dimension.
pub fn norm_grid(dim: usize) -> Vec<(String, Norm)> {
    let mut rows = vec![vec![0.0; dim]; dim];
    for (k, row) in rows.iter_mut().enumerate() {
        row[k] = ((k + 1) * (k + 1)) as f64;
    }
    vec![
        (
            "euclidean".to_string(),
            Norm::euclidean(dim).expect("valid"),
        ),
        ("p=1.5".to_string(), Norm::p_norm(1.5, dim).expect("valid")),
        ("p=4".to_string(), Norm::p_norm(4.0, dim).expect("valid")),
        (
            format!("ellipsoid diag(1..{})", dim * dim),
            Norm::ellipsoidal(rows).expect("valid"),
        ),
    ]
}

/// Deterministic full-dimensional polytope: the unit cube for low
/// dimensions, a scaled cross-polytope where the cube's vertex count
/// would get out of hand.
fn test_polytope(dim: usize) -> ConvexBody {
    let vertices = if dim <= 3 {
        (0..(1u32 << dim))
            .map(|mask| {
                Vector::new(
                    (0..dim)
                        .map(|i| if mask & (1 << i) != 0 { 1.0 } else { -1.0 })
                        .collect(),
                )
                .expect("finite")
            })
            .collect::<Vec<_>>()
    } else {
        let mut vs = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            vs.push(Vector::basis(dim, i).scale(2.0));
            vs.push(Vector::basis(dim, i).scale(-2.0));
        }
        vs
    };
    make_polytope(vertices).expect("full-dimensional")
}

fn body_catalog(dim: usize, norm: &Norm) -> Vec<(String, ConvexBody)> {
    let mut center = vec![0.0; dim];
    center[0] = 0.3;
    if dim > 1 {
        center[1] = -0.2;
    }
    vec![
        ("polytope".to_string(), test_polytope(dim)),
        (
            "ball".to_string(),
            make_ball(Vector::new(center).expect("finite"), 1.5, norm.clone()).expect("valid"),
        ),
        (
            "parallel".to_string(),
            parallel_body(test_polytope(dim), 0.5, norm.clone()).expect("valid"),
        ),
    ]
}

fn exterior_point(body: &ConvexBody, rng: &mut CounterRng, tol: &Tolerances) -> Vector {
    let n = body.dim();
    loop {
        let x = rng.gaussian_vector(n).scale(2.5);
        if !body.contains(&x, tol).expect("containment") {
            return x;
        }
    }
}

fn fmt_vec(v: &Vector) -> String {
    format!("{:?}", v.coords())
}

// Transform basics: homogeneity, norm preservation, the action identity,
// and the inverse round trip. 1000 vectors per norm, band 1e-6.
fn suite_legendre(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let root = CounterRng::new(seed);
    for (di, &dim) in DIMS.iter().enumerate() {
        for (ni, (label, norm)) in norm_grid(dim).into_iter().enumerate() {
            let mut rng = root.fork((1 + di * 10 + ni) as u64);
            for _ in 0..1000 {
                let x = rng.gaussian_vector(dim);
                let rho = norm.eval(&x)?;
                let phi = legendre(&norm, &x, tol)?;
                let scale = 1.0 + rho * rho;

                let alpha = rng.range(-3.0, 3.0);
                let phi_a = legendre(&norm, &x.scale(alpha), tol)?;
                ctx.check(
                    phi_a.approx_eq(&phi.scale(alpha), 1e-6),
                    "transform is homogeneous",
                    format!("{label} dim {dim} x {} alpha {alpha}", fmt_vec(&x)),
                    format!("{:?}", phi_a.coeffs()),
                    "alpha * L(x) within 1e-6".into(),
                );

                let dn = dual_norm(&norm, &phi, tol)?;
                ctx.check(
                    (dn - rho).abs() <= 1e-6 * (1.0 + rho),
                    "transform preserves the norm",
                    format!("{label} dim {dim} x {}", fmt_vec(&x)),
                    format!("{dn}"),
                    format!("{rho} within 1e-6"),
                );

                ctx.check(
                    (phi.apply(&x) - rho * rho).abs() <= 1e-6 * scale,
                    "action identity L(x)(x) = rho^2",
                    format!("{label} dim {dim} x {}", fmt_vec(&x)),
                    format!("{}", phi.apply(&x)),
                    format!("{} within 1e-6", rho * rho),
                );

                let back = legendre_inverse(&norm, &phi, tol)?;
                ctx.check(
                    back.approx_eq(&x, 1e-6),
                    "inverse transform round trip",
                    format!("{label} dim {dim} x {}", fmt_vec(&x)),
                    fmt_vec(&back),
                    "x within 1e-6".into(),
                );
            }
        }
    }
    Ok(ctx.finish("legendre", start))
}

// Self-duality: the dual norm's transform inverts the transform, so
// applying it to L(x) lands back on x seen in the bidual. 200 functionals
// per norm, band 1e-5.
fn suite_self_duality(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let root = CounterRng::new(seed);
    for (di, &dim) in DIMS.iter().enumerate() {
        for (ni, (label, norm)) in norm_grid(dim).into_iter().enumerate() {
            let dual = norm.dual_object().expect("built-in norms have duals");
            let mut rng = root.fork((100 + di * 10 + ni) as u64);
            for _ in 0..200 {
                let phi = Functional::new(rng.gaussian_vector(dim).coords().to_vec())?;
                let x = legendre_inverse(&norm, &phi, tol)?;
                let through_dual = legendre(&dual, &phi.as_vector(), tol)?;
                ctx.check(
                    through_dual.as_vector().approx_eq(&x, 1e-5),
                    "dual-norm transform inverts the transform",
                    format!("{label} dim {dim} phi {:?}", phi.coeffs()),
                    fmt_vec(&through_dual.as_vector()),
                    format!("{} within 1e-5", fmt_vec(&x)),
                );
            }
        }
    }
    Ok(ctx.finish("self_duality", start))
}

// Algebraic vs variational orthogonality. 1000 pairs per norm, half
// random and half constructed orthogonal. A disagreement counts only
// outside the variational residual band 1e-7: whenever the algebraic test
// accepts, the line-search drop must sit inside the band, and constructed
// pairs must be accepted.
fn suite_birkhoff(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let band = 1e-7;
    let root = CounterRng::new(seed);
    for (di, &dim) in DIMS.iter().enumerate() {
        for (ni, (label, norm)) in norm_grid(dim).into_iter().enumerate() {
            let mut rng = root.fork((200 + di * 10 + ni) as u64);
            for k in 0..1000 {
                let x = rng.direction(dim);
                let constructed = k % 2 == 1;
                let y = if constructed {
                    let phi = legendre(&norm, &x, tol)?;
                    let basis = kernel_basis(&phi);
                    let coeffs: Vec<f64> = basis.iter().map(|_| rng.gaussian()).collect();
                    let z = linear_combination(&coeffs, &basis);
                    if z.max_abs() < 1e-9 {
                        continue;
                    }
                    z
                } else {
                    rng.direction(dim)
                };
                let rep = birkhoff_vv(&norm, &x, &y, tol)?;
                let ok = if constructed {
                    rep.holds && rep.residual <= band
                } else {
                    // accepting with a real drop is the only countable
                    // disagreement; a rejected pair whose drop is inside
                    // the band is borderline, not wrong
                    !(rep.holds && rep.residual > band)
                };
                ctx.check(
                    ok,
                    "algebraic and variational orthogonality agree",
                    format!(
                        "{label} dim {dim} constructed {constructed} x {} y {}",
                        fmt_vec(&x),
                        fmt_vec(&y)
                    ),
                    format!("algebraic {} drop {}", rep.holds, rep.residual),
                    format!("drop inside band {band} when accepted"),
                );
            }
        }
    }
    Ok(ctx.finish("birkhoff", start))
}

// Projection certificates: duality gap at the target, beating 500 sampled
// body points, and a 2D boundary-grid brute force at 1e-3 resolution.
fn suite_projection(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let root = CounterRng::new(seed);
    for (di, &dim) in DIMS.iter().enumerate() {
        for (ni, (label, norm)) in norm_grid(dim).into_iter().enumerate() {
            let mut rng = root.fork((300 + di * 10 + ni) as u64);
            for (bname, body) in body_catalog(dim, &norm) {
                for _ in 0..10 {
                    let x = exterior_point(&body, &mut rng, tol);
                    let res = project(&norm, &body, &x, tol)?;
                    ctx.check(
                        res.certified && res.gap <= tol.opt_gap,
                        "duality gap certificate",
                        format!("{label} dim {dim} {bname} x {}", fmt_vec(&x)),
                        format!("gap {}", res.gap),
                        format!("<= {}", tol.opt_gap),
                    );
                    let samples = body.probe_points(500, rng.index(1 << 30) as u64, tol)?;
                    let worst = samples
                        .iter()
                        .map(|y| norm.eval(&(&x - y)).expect("finite") - res.distance)
                        .fold(f64::INFINITY, f64::min);
                    ctx.check(
                        worst >= -1e-6,
                        "projection beats sampled body points",
                        format!("{label} dim {dim} {bname} x {}", fmt_vec(&x)),
                        format!("worst margin {worst}"),
                        ">= -1e-6".into(),
                    );
                }
            }

            // 2D polytope: walk the square's boundary at 1e-3 resolution
            if dim == 2 {
                let body = test_polytope(2);
                let edges = [
                    ([1.0, 1.0], [1.0, -1.0]),
                    ([1.0, -1.0], [-1.0, -1.0]),
                    ([-1.0, -1.0], [-1.0, 1.0]),
                    ([-1.0, 1.0], [1.0, 1.0]),
                ];
                for _ in 0..5 {
                    let x = exterior_point(&body, &mut rng, tol);
                    let res = project(&norm, &body, &x, tol)?;
                    let mut best = f64::INFINITY;
                    for (a, b) in &edges {
                        let a = Vector::new(a.to_vec())?;
                        let b = Vector::new(b.to_vec())?;
                        for k in 0..=2000 {
                            let t = k as f64 / 2000.0;
                            let y = &a + &(&b - &a).scale(t);
                            best = best.min(norm.eval(&(&x - &y))?);
                        }
                    }
                    ctx.check(
                        (res.distance - best).abs() <= 2e-3,
                        "distance matches the boundary grid",
                        format!("{label} x {}", fmt_vec(&x)),
                        format!("{} vs grid {best}", res.distance),
                        "within 2e-3".into(),
                    );
                }
            }
        }
    }
    Ok(ctx.finish("projection", start))
}

// The distance differential is the transform of the outer normal: central
// finite differences on basis directions, 100 exterior points per (norm,
// body), max deviation 1e-4. Points inside the nonsmooth boundary band or
// closer than 0.05 are resampled; the comparison needs a smooth
// neighborhood of width h.
fn suite_distance_gradient(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let h = 1e-4;
    let root = CounterRng::new(seed);
    for (di, &dim) in DIMS.iter().enumerate() {
        for (ni, (label, norm)) in norm_grid(dim).into_iter().enumerate() {
            let mut rng = root.fork((400 + di * 10 + ni) as u64);
            for (bname, body) in body_catalog(dim, &norm) {
                let mut collected = 0;
                let mut attempts = 0;
                while collected < 100 && attempts < 1000 {
                    attempts += 1;
                    let x = exterior_point(&body, &mut rng, tol);
                    let res = project(&norm, &body, &x, tol)?;
                    if res.boundary_band || res.distance < 0.05 {
                        continue;
                    }
                    collected += 1;
                    let eta = res.outer_normal.clone().expect("exterior");
                    let phi = legendre(&norm, &eta, tol)?;
                    let mut worst = 0.0f64;
                    for i in 0..dim {
                        let e = Vector::basis(dim, i);
                        let dp = distance(&norm, &body, &(&x + &e.scale(h)), tol)?;
                        let dm = distance(&norm, &body, &(&x - &e.scale(h)), tol)?;
                        let fd = (dp - dm) / (2.0 * h);
                        worst = worst.max((fd - phi.apply(&e)).abs());
                    }
                    ctx.check(
                        worst <= 1e-4,
                        "distance differential is the transform of the outer normal",
                        format!("{label} dim {dim} {bname} x {}", fmt_vec(&x)),
                        format!("max deviation {worst}"),
                        "<= 1e-4".into(),
                    );
                }
            }
        }
    }
    Ok(ctx.finish("distance_gradient", start))
}

// Sun property: every point on the outward ray reprojects to the same
// point, t in {0.5, 2, 10}, drift within 1e-6.
fn suite_sun(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let root = CounterRng::new(seed);
    for (di, &dim) in DIMS.iter().enumerate() {
        for (ni, (label, norm)) in norm_grid(dim).into_iter().enumerate() {
            let mut rng = root.fork((500 + di * 10 + ni) as u64);
            let body = test_polytope(dim);
            for _ in 0..34 {
                let x = exterior_point(&body, &mut rng, tol);
                for t in [0.5, 2.0, 10.0] {
                    let ok = sun_check(&norm, &body, &x, t, tol)?;
                    ctx.check(
                        ok,
                        "outward ray reprojects to the same point",
                        format!("{label} dim {dim} x {} t {t}", fmt_vec(&x)),
                        format!("{ok}"),
                        "projection drift within 1e-6".into(),
                    );
                }
            }
        }
    }
    Ok(ctx.finish("sun", start))
}

// Weak contraction and convexity of the distance function, about 1000
// pairs and midpoints per norm, violations bounded by 1e-7.
fn suite_distance_regularity(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let root = CounterRng::new(seed);
    for (di, &dim) in DIMS.iter().enumerate() {
        for (ni, (label, norm)) in norm_grid(dim).into_iter().enumerate() {
            let mut rng = root.fork((600 + di * 10 + ni) as u64);
            let body = test_polytope(dim);
            for _ in 0..84 {
                let a = rng.gaussian_vector(dim).scale(2.0);
                let b = rng.gaussian_vector(dim).scale(2.0);
                let da = distance(&norm, &body, &a, tol)?;
                let db = distance(&norm, &body, &b, tol)?;
                let gap = (da - db).abs() - norm.eval(&(&a - &b))?;
                ctx.check(
                    gap <= 1e-7,
                    "distance is a weak contraction",
                    format!("{label} dim {dim} a {} b {}", fmt_vec(&a), fmt_vec(&b)),
                    format!("excess {gap}"),
                    "<= 1e-7".into(),
                );

                let lam = rng.uniform();
                let mid = &a.scale(lam) + &b.scale(1.0 - lam);
                let dm = distance(&norm, &body, &mid, tol)?;
                let slack = dm - (lam * da + (1.0 - lam) * db);
                ctx.check(
                    slack <= 1e-7,
                    "distance is convex",
                    format!("{label} dim {dim} lambda {lam}"),
                    format!("excess {slack}"),
                    "<= 1e-7".into(),
                );
            }
        }
    }
    Ok(ctx.finish("distance_regularity", start))
}

fn random_max_affine(dim: usize, rng: &mut CounterRng) -> Result<ConvexFunction> {
    let pieces = 2 + rng.index(7);
    let mut ps = Vec::with_capacity(pieces);
    for _ in 0..pieces {
        let phi = Functional::new(rng.gaussian_vector(dim).coords().to_vec())?;
        ps.push((phi, rng.range(-1.0, 1.0)));
    }
    ConvexFunction::max_affine(ps)
}

// Max formula on random max-affine functions: the constructed subgradient
// pins the directional derivative within 1e-8 and passes the membership
// certificate; at differentiable points it reproduces the gradient.
fn suite_max_formula(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let root = CounterRng::new(seed);
    for (di, &dim) in DIMS.iter().enumerate() {
        let norm = norm_grid(dim).remove(2).1; // p = 4
        let mut rng = root.fork((700 + di) as u64);
        for _ in 0..20 {
            let f = random_max_affine(dim, &mut rng)?;
            let x = rng.gaussian_vector(dim);
            let u = rng.direction(dim);
            let w = subgradient_construct(&f, &x, &u, &norm, tol)?;
            let phi = legendre(&norm, &w, tol)?;
            let dd = dir_deriv_plus(&f, &x, &u, tol)?;
            ctx.check(
                (phi.apply(&u) - dd).abs() <= 1e-8 * (1.0 + dd.abs()),
                "max formula support value",
                format!("dim {dim} u {}", fmt_vec(&u)),
                format!("{} vs derivative {dd}", phi.apply(&u)),
                "within 1e-8".into(),
            );
            let cert = subgradient_member(&f, &x, &w, &norm, 64, tol)?;
            ctx.check(
                cert.verdict == Verdict::Member,
                "constructed vector is a certified member",
                format!("dim {dim} x {}", fmt_vec(&x)),
                format!("{:?} margin {}", cert.verdict, cert.margin),
                "member".into(),
            );

            // random points of a max-affine function are differentiable
            // with probability one; construction must then match the
            // gradient
            if let Ok(grad) = norm_gradient(&f, &x, &norm, tol) {
                ctx.check(
                    w.approx_eq(&grad, 1e-6),
                    "singleton subdifferential matches the gradient",
                    format!("dim {dim} x {}", fmt_vec(&x)),
                    fmt_vec(&w),
                    format!("{} within 1e-6", fmt_vec(&grad)),
                );
            }
        }
    }
    Ok(ctx.finish("max_formula", start))
}

// The subdifferential of the distance function at a boundary point is the
// normal cone cut to the dual unit ball: at every vertex and facet
// midpoint of the square and the cube, 200 probes per point are
// classified by both sides, skipping the margin band 1e-6.
fn suite_boundary_cone(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let root = CounterRng::new(seed);
    for (di, dim) in [2usize, 3].into_iter().enumerate() {
        for (ni, (label, norm)) in norm_grid(dim).into_iter().enumerate() {
            let mut rng = root.fork((800 + di * 10 + ni) as u64);
            let body = test_polytope(dim);

            // vertices and facet midpoints of the cube
            let mut points = Vec::new();
            if let ConvexBody::Polytope { vertices } = &body {
                points.extend(vertices.iter().cloned());
            }
            for i in 0..dim {
                for s in [1.0, -1.0] {
                    points.push(Vector::basis(dim, i).scale(s));
                }
            }

            let f = ConvexFunction::distance_to_body(body.clone(), norm.clone())?;
            for x in points {
                let cone = normal_cone(&body, &x, &norm, tol)?;
                let oracle = MembershipOracle::new(&f, &x, &norm, 64, tol)?;
                for _ in 0..200 {
                    // half the probes lean into the cone
                    let v = if rng.uniform() < 0.5 {
                        let mut acc = Vector::zeros(dim);
                        for g in &cone.generators {
                            acc = &acc + &g.scale(rng.uniform());
                        }
                        if acc.max_abs() < 1e-9 {
                            continue;
                        }
                        acc
                    } else {
                        rng.direction(dim)
                    };
                    let in_cone = cone.membership(&v, tol)?;
                    if cone.margin(&v, tol)?.abs() <= 1e-6 {
                        continue;
                    }
                    // scale into the open dual unit ball so ray
                    // membership in the cone is plain membership in the
                    // subdifferential
                    let cand = v.scale(0.9 / norm.eval(&v)?);
                    let cert = oracle.classify(&cand, tol)?;
                    if cert.margin.abs() <= 1e-6 {
                        continue;
                    }
                    let member = cert.verdict == Verdict::Member;
                    ctx.check(
                        member == in_cone,
                        "distance subdifferential matches the normal cone",
                        format!("{label} dim {dim} x {} v {}", fmt_vec(&x), fmt_vec(&v)),
                        format!("subdifferential {member} cone {in_cone}"),
                        "identical classification".into(),
                    );
                }
            }
        }
    }
    Ok(ctx.finish("boundary_cone", start))
}

// Monotone potentials: 50 relations built from gradient pairs of convex
// quadratics admit a potential vanishing at the base pair with the whole
// relation certified inside its subdifferential; the same relations with
// two transforms swapped are rejected with a recomputably positive cycle.
fn suite_rockafellar(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let root = CounterRng::new(seed);
    let mut rng = root.fork(900);
    for case in 0..50 {
        let dim = DIMS[case % DIMS.len()];
        let norms = norm_grid(dim);
        let (_, norm) = &norms[case % norms.len()];

        // gradient pairs of x -> x^T A x / 2 with diagonal positive A:
        // the differential at x_i is A x_i, pulled back through the
        // inverse transform
        let diag: Vec<f64> = (0..dim).map(|_| rng.range(0.5, 3.0)).collect();
        let count = 2 + rng.index(11);
        let mut pairs = Vec::with_capacity(count);
        for _ in 0..count {
            let x = rng.gaussian_vector(dim);
            let df = Functional::new(x.coords().iter().zip(&diag).map(|(c, d)| c * d).collect())?;
            let w = legendre_inverse(norm, &df, tol)?;
            pairs.push((x, w));
        }
        let s = MonotoneData::new(pairs, 0)?;
        let f = rockafellar_potential(&s, norm, tol)?;
        let at_base = f.evaluate(&s.pairs[0].0, tol)?;
        ctx.check(
            at_base.abs() <= 1e-9,
            "potential vanishes at the base pair",
            format!("dim {dim} case {case}"),
            format!("{at_base}"),
            "0 within 1e-9".into(),
        );
        let mut all_member = true;
        for (x, w) in &s.pairs {
            let cert = subgradient_member(&f, x, w, norm, 64, tol)?;
            all_member &= cert.verdict == Verdict::Member;
        }
        ctx.check(
            all_member,
            "relation sits inside the potential's subdifferential",
            format!("dim {dim} case {case} pairs {count}"),
            format!("{all_member}"),
            "every pair certified".into(),
        );

        // swapping two transforms makes the 2-cycle weight a positive
        // quadratic form value, so rejection is guaranteed
        let mut bad_pairs = s.pairs.clone();
        if bad_pairs[0].0.approx_eq(&bad_pairs[1].0, 1e-9) {
            continue;
        }
        let w0 = bad_pairs[0].1.clone();
        bad_pairs[0].1 = bad_pairs[1].1.clone();
        bad_pairs[1].1 = w0;
        let bad = MonotoneData::new(bad_pairs, 0)?;
        match rockafellar_potential(&bad, norm, tol) {
            Err(Error::NotCyclicallyMonotone { cycle, weight }) => {
                // recompute the exhibited cycle weight from scratch
                let mut total = 0.0;
                for k in 0..cycle.len() {
                    let (xi, wi) = &bad.pairs[cycle[k]];
                    let (xj, _) = &bad.pairs[cycle[(k + 1) % cycle.len()]];
                    total += legendre(norm, wi, tol)?.apply(&(xj - xi));
                }
                ctx.check(
                    total > 0.0 && (total - weight).abs() <= 1e-9 * (1.0 + total.abs()),
                    "rejection exhibits a positive cycle",
                    format!("dim {dim} case {case} cycle {cycle:?}"),
                    format!("recomputed {total} reported {weight}"),
                    "positive and consistent".into(),
                );
            }
            other => {
                ctx.check(
                    false,
                    "rejection exhibits a positive cycle",
                    format!("dim {dim} case {case}"),
                    format!("{other:?}"),
                    "monotonicity rejection".into(),
                );
            }
        }
    }
    Ok(ctx.finish("rockafellar", start))
}

// The gradient of the norm is the normalized point, 500 nonzero points
// per norm, band 1e-6.
fn suite_norm_gradient(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let root = CounterRng::new(seed);
    for (di, &dim) in DIMS.iter().enumerate() {
        for (ni, (label, norm)) in norm_grid(dim).into_iter().enumerate() {
            let mut rng = root.fork((1000 + di * 10 + ni) as u64);
            let f = ConvexFunction::norm_function(&norm);
            for _ in 0..500 {
                let x = rng.direction(dim).scale(rng.log_range(0.1, 10.0));
                let g = norm_gradient(&f, &x, &norm, tol)?;
                let want = x.scale(1.0 / norm.eval(&x)?);
                ctx.check(
                    g.approx_eq(&want, 1e-6),
                    "norm gradient is the normalized point",
                    format!("{label} dim {dim} x {}", fmt_vec(&x)),
                    fmt_vec(&g),
                    format!("{} within 1e-6", fmt_vec(&want)),
                );
            }
        }
    }
    Ok(ctx.finish("norm_gradient", start))
}

// Two-sided derivative estimate: for every certified subgradient, the
// sampled sup of f'- and inf of f'+ over 64 hyperplane directions bracket
// the squared norm, slack bounded by 1e-6.
fn suite_estimate(seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut ctx = Ctx::new();
    let root = CounterRng::new(seed);
    for (di, &dim) in DIMS.iter().enumerate() {
        for (ni, (label, norm)) in norm_grid(dim).into_iter().enumerate() {
            let mut rng = root.fork((1100 + di * 10 + ni) as u64);
            // certified subgradients from two sources: max-affine pieces
            // and the norm's own gradients
            for k in 0..8 {
                let (f, x) = if k % 2 == 0 {
                    (random_max_affine(dim, &mut rng)?, rng.gaussian_vector(dim))
                } else {
                    (
                        ConvexFunction::norm_function(&norm),
                        rng.direction(dim).scale(rng.log_range(0.3, 3.0)),
                    )
                };
                let u = rng.direction(dim);
                let v = match subgradient_construct(&f, &x, &u, &norm, tol) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                if v.is_zero() {
                    continue;
                }
                let cert = subgradient_member(&f, &x, &v, &norm, 64, tol)?;
                if cert.verdict != Verdict::Member {
                    continue;
                }
                let rep = estimate_check(&f, &x, &v, &norm, 64, tol)?;
                let slack = (rep.lower - rep.sup_minus).min(rep.inf_plus - rep.lower);
                ctx.check(
                    slack >= -1e-6,
                    "derivative estimate brackets the squared norm",
                    format!("{label} dim {dim} x {} v {}", fmt_vec(&x), fmt_vec(&v)),
                    format!(
                        "sup- {} lower {} inf+ {}",
                        rep.sup_minus, rep.lower, rep.inf_plus
                    ),
                    "slack >= -1e-6".into(),
                );
            }
        }
    }
    Ok(ctx.finish("estimate", start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        let e = run_suite("nope", 1, &Tolerances::default());
        assert!(matches!(e, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn reports_are_reproducible() {
        let tol = Tolerances::default();
        let a = run_suite("self_duality", 42, &tol).unwrap();
        let b = run_suite("self_duality", 42, &tol).unwrap();
        assert_eq!(a.cases_run, b.cases_run);
        assert_eq!(a.failures.len(), b.failures.len());
        assert!(a.passed());
    }
}
