//! Convex-function oracles built around one-sided directional derivatives.
//!
//! Three function kinds. Max-affine functions are the exact workhorse:
//! their derivatives, subgradient tests, and the sub-linearization
//! recursion reduce to active-piece combinatorics with no finite
//! differences at all. Distance functions reuse the projection solver.
//! Smooth callbacks bring user code, optionally with an exact directional
//! derivative.
//!
//! The subgradient criterion throughout is the transform inequality
//! `f'+(x,u) >= L(v)(u)` for all directions `u`; a candidate is produced
//! by repeatedly sub-linearizing `f'+(x,.)` along a basis starting at the
//! query direction, which pins the support value `L(w)(u) = f'+(x,u)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bodies::{BodySpec, ConvexBody};
use crate::geom::{kernel_basis, linear_combination, Functional, Tolerances, Vector};
use crate::legendre::{legendre, legendre_inverse};
use crate::norms::Norm;
use crate::numeric::{one_sided_ladder, simplex_least_squares};
use crate::sampling::CounterRng;
use crate::{check_dim, Error, Result};

/// Accuracy ceiling for constructed subgradients on black-box oracles;
/// nested one-sided differences cannot do better than this reliably.
pub const TOL_CONSTRUCT: f64 = 1e-4;

type EvalFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
type DirDerivFn = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;

pub enum ConvexFunction {
    /// `f(x) = max_i phi_i(x) + b_i`
    MaxAffine { pieces: Vec<(Functional, f64)> },
    /// `f(x) = dist(x, K)` in the stored norm
    DistanceToBody { body: ConvexBody, norm: Norm },
    /// user callback; `deriv(x, v)` returns the one-sided derivative when
    /// provided, otherwise finite differences take over
    SmoothCallback {
        dim: usize,
        eval: EvalFn,
        deriv: Option<DirDerivFn>,
    },
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexFunction::MaxAffine { pieces } => f
                .debug_struct("MaxAffine")
                .field("pieces", &pieces.len())
                .finish(),
            ConvexFunction::DistanceToBody { .. } => f.debug_struct("DistanceToBody").finish(),
            ConvexFunction::SmoothCallback { dim, .. } => {
                f.debug_struct("SmoothCallback").field("dim", dim).finish()
            }
        }
    }
}

impl ConvexFunction {
    pub fn max_affine(pieces: Vec<(Functional, f64)>) -> Result<ConvexFunction> {
        if pieces.is_empty() {
            return Err(Error::InvalidParameter("no affine pieces".into()));
        }
        let n = pieces[0].0.dim();
        for (phi, b) in &pieces {
            check_dim(n, phi.dim())?;
            if !b.is_finite() {
                return Err(Error::InvalidParameter("offset must be finite".into()));
            }
        }
        Ok(ConvexFunction::MaxAffine { pieces })
    }

    pub fn distance_to_body(body: ConvexBody, norm: Norm) -> Result<ConvexFunction> {
        check_dim(norm.dim(), body.dim())?;
        Ok(ConvexFunction::DistanceToBody { body, norm })
    }

    pub fn smooth_callback(dim: usize, eval: EvalFn, deriv: Option<DirDerivFn>) -> ConvexFunction {
        ConvexFunction::SmoothCallback { dim, eval, deriv }
    }

    /// The norm itself as a convex function, with exact one-sided
    /// derivatives everywhere (including the kink at the origin, where
    /// `f'+(0, v) = rho(v)`).
    pub fn norm_function(norm: &Norm) -> ConvexFunction {
        let dim = norm.dim();
        let n_eval = norm.clone();
        let n_deriv = norm.clone();
        ConvexFunction::SmoothCallback {
            dim,
            eval: Arc::new(move |x| n_eval.value(x)),
            deriv: Some(Arc::new(move |x, v| {
                let rho = n_deriv.value(x);
                if rho <= 1e-12 * (1.0 + x.max_abs()) {
                    n_deriv.value(v)
                } else {
                    match legendre(&n_deriv, x, &Tolerances::default()) {
                        Ok(phi) => phi.apply(v) / rho,
                        Err(_) => f64::NAN,
                    }
                }
            })),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexFunction::MaxAffine { pieces } => pieces[0].0.dim(),
            ConvexFunction::DistanceToBody { body, .. } => body.dim(),
            ConvexFunction::SmoothCallback { dim, .. } => *dim,
        }
    }

    pub fn evaluate(&self, x: &Vector, tol: &Tolerances) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        match self {
            ConvexFunction::MaxAffine { pieces } => Ok(pieces
                .iter()
                .map(|(phi, b)| phi.apply(x) + b)
                .fold(f64::NEG_INFINITY, f64::max)),
            ConvexFunction::DistanceToBody { body, norm } => {
                crate::projection::distance(norm, body, x, tol)
            }
            ConvexFunction::SmoothCallback { eval, .. } => Ok(eval(x)),
        }
    }

    /// Base step for one-sided differences. Distance functions get a much
    /// larger step than the generic `fd_step`: each evaluation carries the
    /// solver's residual, and quotients at 1e-6 would drown in it.
    fn fd_base(&self, x: &Vector, tol: &Tolerances) -> f64 {
        let scale = 1.0 + x.max_abs();
        match self {
            ConvexFunction::DistanceToBody { .. } => tol.fd_step.max(1e-3) * scale,
            _ => tol.fd_step * scale,
        }
    }

    fn active_pieces(&self, x: &Vector, tol: &Tolerances) -> Vec<&(Functional, f64)> {
        match self {
            ConvexFunction::MaxAffine { pieces } => {
                let fx = pieces
                    .iter()
                    .map(|(phi, b)| phi.apply(x) + b)
                    .fold(f64::NEG_INFINITY, f64::max);
                let band = tol.eq_tol * (1.0 + fx.abs());
                pieces
                    .iter()
                    .filter(|(phi, b)| phi.apply(x) + b >= fx - band)
                    .collect()
            }
            _ => Vec::new(),
        }
    }
}

/// One-sided directional derivative `f'+(x, v)`.
///
/// Exact for max-affine functions (max of active-piece values) and for
/// callbacks with a derivative; otherwise an extrapolated ladder of
/// forward quotients.
pub fn dir_deriv_plus(f: &ConvexFunction, x: &Vector, v: &Vector, tol: &Tolerances) -> Result<f64> {
    check_dim(f.dim(), x.dim())?;
    check_dim(f.dim(), v.dim())?;
    if v.is_zero() {
        return Ok(0.0);
    }
    match f {
        ConvexFunction::MaxAffine { .. } => Ok(f
            .active_pieces(x, tol)
            .iter()
            .map(|(phi, _)| phi.apply(v))
            .fold(f64::NEG_INFINITY, f64::max)),
        ConvexFunction::SmoothCallback { deriv: Some(d), .. } => Ok(d(x, v)),
        _ => {
            let scale = v.euclid();
            let u = v.scale(1.0 / scale);
            let h = f.fd_base(x, tol);
            let g = |t: f64| {
                f.evaluate(&(x + &u.scale(t)), tol)
                    .expect("evaluation inside derivative ladder")
            };
            Ok(one_sided_ladder(g, h, 4) * scale)
        }
    }
}

/// `f'-(x, v) = -f'+(x, -v)`.
pub fn dir_deriv_minus(
    f: &ConvexFunction,
    x: &Vector,
    v: &Vector,
    tol: &Tolerances,
) -> Result<f64> {
    Ok(-dir_deriv_plus(f, x, &v.scale(-1.0), tol)?)
}

/// Gradient of `f` at `x` under the norm: the inverse transform of the
/// differential. Zero when the differential vanishes (global minimum).
///
/// Differentiability is detected by linearity of `f'+(x,.)` on the basis:
/// the one-sided derivatives in `e` and `-e` must cancel.
pub fn norm_gradient(
    f: &ConvexFunction,
    x: &Vector,
    norm: &Norm,
    tol: &Tolerances,
) -> Result<Vector> {
    check_dim(f.dim(), x.dim())?;
    check_dim(norm.dim(), x.dim())?;
    let n = x.dim();
    let mut coeffs = Vec::with_capacity(n);
    for i in 0..n {
        let e = Vector::basis(n, i);
        let dp = dir_deriv_plus(f, x, &e, tol)?;
        let dm = dir_deriv_plus(f, x, &e.scale(-1.0), tol)?;
        if (dp + dm).abs() > 10.0 * tol.eq_tol * (1.0 + dp.abs().max(dm.abs())) {
            return Err(Error::NotDifferentiable);
        }
        coeffs.push(0.5 * (dp - dm));
    }
    let df = Functional::new(coeffs)?;
    if df.max_abs() <= 10.0 * tol.eq_tol {
        return Ok(Vector::zeros(n));
    }
    legendre_inverse(norm, &df, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    NonMember,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubgradientCertificate {
    pub point: Vector,
    pub candidate: Vector,
    pub verdict: Verdict,
    /// direction attaining the worst inequality margin
    pub worst_direction: Vector,
    /// `min over tested u of f'+(x,u) - L(v)(u)`
    pub margin: f64,
}

/// Precomputed membership test for one point of one function.
///
/// The derivative values `f'+(x, u)` over the direction set do not depend
/// on the candidate, so classifying many candidates at the same point
/// reuses them; only the candidate's own ray costs a fresh derivative.
pub struct MembershipOracle<'a> {
    f: &'a ConvexFunction,
    norm: &'a Norm,
    point: Vector,
    m_dirs: usize,
    dirs: Vec<Vector>,
    derivs: Vec<f64>,
}

impl<'a> MembershipOracle<'a> {
    pub fn new(
        f: &'a ConvexFunction,
        x: &Vector,
        norm: &'a Norm,
        m_dirs: usize,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_dim(f.dim(), x.dim())?;
        check_dim(norm.dim(), x.dim())?;
        let n = x.dim();
        let mut dirs = norm.sphere_sample(m_dirs, 0x6d656d62)?;
        for i in 0..n {
            dirs.push(Vector::basis(n, i));
            dirs.push(Vector::basis(n, i).scale(-1.0));
        }
        let derivs = dirs
            .iter()
            .map(|u| dir_deriv_plus(f, x, u, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(MembershipOracle {
            f,
            norm,
            point: x.clone(),
            m_dirs,
            dirs,
            derivs,
        })
    }

    pub fn classify(&self, v: &Vector, tol: &Tolerances) -> Result<SubgradientCertificate> {
        check_dim(self.point.dim(), v.dim())?;
        let phi = legendre(self.norm, v, tol)?;
        let rho_v = self.norm.value(v);
        let band = 10.0 * tol.eq_tol * (1.0 + rho_v);

        let mut margin = f64::INFINITY;
        let mut worst = self.dirs[0].clone();
        for (u, dd) in self.dirs.iter().zip(&self.derivs) {
            let m = dd - phi.apply(u);
            if m < margin {
                margin = m;
                worst = u.clone();
            }
        }
        if rho_v > tol.eq_tol {
            let u = v.scale(1.0 / rho_v);
            let m = dir_deriv_plus(self.f, &self.point, &u, tol)? - phi.apply(&u);
            if m < margin {
                margin = m;
                worst = u;
            }
        }

        let verdict = if let ConvexFunction::MaxAffine { .. } = self.f {
            // exact: v is a subgradient iff its transform is a convex
            // combination of the active piece functionals
            let active = self.f.active_pieces(&self.point, tol);
            let points: Vec<Vector> = active.iter().map(|(p, _)| p.as_vector()).collect();
            let target = phi.as_vector();
            let fit = simplex_least_squares(&points, &target, 20_000);
            if fit.residual <= 1e-8 * (1.0 + target.max_abs()) {
                Verdict::Member
            } else {
                Verdict::NonMember
            }
        } else if margin < -band {
            Verdict::NonMember
        } else if self.m_dirs >= 64 {
            Verdict::Member
        } else {
            Verdict::Inconclusive
        };

        Ok(SubgradientCertificate {
            point: self.point.clone(),
            candidate: v.clone(),
            verdict,
            worst_direction: worst,
            margin,
        })
    }
}

/// Test `v in subdifferential of f at x` by sampling the defining
/// inequality over `m_dirs` sphere directions plus the basis directions
/// and the candidate's ray. Max-affine functions get an exact verdict.
pub fn subgradient_member(
    f: &ConvexFunction,
    x: &Vector,
    v: &Vector,
    norm: &Norm,
    m_dirs: usize,
    tol: &Tolerances,
) -> Result<SubgradientCertificate> {
    MembershipOracle::new(f, x, norm, m_dirs, tol)?.classify(v, tol)
}

/// Deterministic basis with the query direction first, completed by
/// standard basis vectors picked greedily for independence (largest
/// Euclidean residual against the span so far; lowest index on ties).
fn completed_basis(u: &Vector) -> Vec<Vector> {
    let n = u.dim();
    let mut basis = vec![u.clone()];
    let mut ortho: Vec<Vector> = vec![u.scale(1.0 / u.euclid())];
    let mut used = vec![false; n];
    for _ in 1..n {
        let mut best_i = usize::MAX;
        let mut best_norm = -1.0;
        let mut best_res: Option<Vector> = None;
        for i in 0..n {
            if used[i] {
                continue;
            }
            let mut r = Vector::basis(n, i);
            for q in &ortho {
                let c: f64 = r.coords().iter().zip(q.coords()).map(|(a, b)| a * b).sum();
                r = &r - &q.scale(c);
            }
            let rn = r.euclid();
            if rn > best_norm {
                best_norm = rn;
                best_i = i;
                best_res = Some(r);
            }
        }
        used[best_i] = true;
        basis.push(Vector::basis(n, best_i));
        let r = best_res.expect("candidate exists");
        ortho.push(r.scale(1.0 / best_norm));
    }
    basis
}

/// Exact recursion for max-affine functions: sub-linearizing along a
/// basis vector shrinks the active set to its argmax; after a full basis
/// a single functional remains (up to duplicates).
fn construct_max_affine(
    f: &ConvexFunction,
    x: &Vector,
    u: &Vector,
    norm: &Norm,
    tol: &Tolerances,
) -> Result<Vector> {
    let mut active: Vec<&(Functional, f64)> = f.active_pieces(x, tol);
    for e in completed_basis(u) {
        let best = active
            .iter()
            .map(|(phi, _)| phi.apply(&e))
            .fold(f64::NEG_INFINITY, f64::max);
        let tie = 1e-12 * (1.0 + best.abs());
        active.retain(|(phi, _)| phi.apply(&e) >= best - tie);
        if active.len() == 1 {
            break;
        }
    }
    let phi = &active[0].0;
    legendre_inverse(norm, phi, tol)
}

/// Nested one-sided differences for black-box oracles: evaluate the
/// sub-linearization chain `g_m = (g_{m-1})'+(e_m, .)` numerically. The
/// step grows with depth because each level inherits the noise of the
/// previous one.
fn g_chain(
    f: &ConvexFunction,
    x: &Vector,
    basis: &[Vector],
    depth: usize,
    v: &Vector,
    tol: &Tolerances,
) -> Result<f64> {
    if depth == 0 {
        return dir_deriv_plus(f, x, v, tol);
    }
    let scale = v.euclid();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let un = v.scale(1.0 / scale);
    let e = &basis[depth - 1];
    let h = 1e-3 * 4f64.powi(depth as i32 - 1);
    let ge = g_chain(f, x, basis, depth - 1, e, tol)?;
    let g1 = g_chain(f, x, basis, depth - 1, &(e + &un.scale(h)), tol)?;
    let g2 = g_chain(f, x, basis, depth - 1, &(e + &un.scale(0.5 * h)), tol)?;
    let d1 = (g1 - ge) / h;
    let d2 = (g2 - ge) / (0.5 * h);
    Ok((2.0 * d2 - d1) * scale)
}

fn construct_nested_fd(
    f: &ConvexFunction,
    x: &Vector,
    u: &Vector,
    norm: &Norm,
    tol: &Tolerances,
) -> Result<Vector> {
    let n = x.dim();
    let basis = completed_basis(u);
    let mut coeffs = Vec::with_capacity(n);
    for i in 0..n {
        coeffs.push(g_chain(f, x, &basis, n, &Vector::basis(n, i), tol)?);
    }
    let gfin = Functional::new(coeffs)?;
    if gfin.max_abs() <= 10.0 * tol.eq_tol {
        return Ok(Vector::zeros(n));
    }
    legendre_inverse(norm, &gfin, tol)
}

/// Construct a subgradient of `f` at `x` supporting direction `u`: the
/// returned `w` is a member of the subdifferential with
/// `L(w)(u) = f'+(x, u)` (the max formula). The result is verified before
/// it is returned.
pub fn subgradient_construct(
    f: &ConvexFunction,
    x: &Vector,
    u: &Vector,
    norm: &Norm,
    tol: &Tolerances,
) -> Result<Vector> {
    check_dim(f.dim(), x.dim())?;
    check_dim(f.dim(), u.dim())?;
    if u.is_zero() {
        return Err(Error::InvalidParameter(
            "query direction must be nonzero".into(),
        ));
    }
    let w = match f {
        ConvexFunction::MaxAffine { .. } => construct_max_affine(f, x, u, norm, tol)?,
        _ => match norm_gradient(f, x, norm, tol) {
            Ok(g) => g,
            Err(Error::NotDifferentiable) => construct_nested_fd(f, x, u, norm, tol)?,
            Err(e) => return Err(e),
        },
    };

    let cert = subgradient_member(f, x, &w, norm, 64, tol)?;
    if cert.verdict == Verdict::NonMember {
        return Err(Error::ConstructionFailed(format!(
            "candidate fails the subgradient inequality with margin {:.3e} in direction {:?}",
            cert.margin,
            cert.worst_direction.coords()
        )));
    }
    let phi = legendre(norm, &w, tol)?;
    let ddu = dir_deriv_plus(f, x, u, tol)?;
    let off = (phi.apply(u) - ddu).abs();
    if off > TOL_CONSTRUCT * (1.0 + ddu.abs() + u.max_abs()) {
        return Err(Error::ConstructionFailed(format!(
            "support value misses the directional derivative by {off:.3e}"
        )));
    }
    Ok(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    /// sampled `sup f'-(x, v+z)` over the kernel of `L(v)`
    pub sup_minus: f64,
    /// `rho(v)^2`, the value both sides bracket
    pub lower: f64,
    /// sampled `inf f'+(x, v+z)`
    pub inf_plus: f64,
    pub holds: bool,
}

/// Two-sided derivative estimate along the hyperplane `ker L(v)`: for a
/// subgradient `v` the sampled sup of `f'-` and inf of `f'+` bracket
/// `rho(v)^2`.
pub fn estimate_check(
    f: &ConvexFunction,
    x: &Vector,
    v: &Vector,
    norm: &Norm,
    m: usize,
    tol: &Tolerances,
) -> Result<EstimateReport> {
    check_dim(f.dim(), x.dim())?;
    check_dim(norm.dim(), v.dim())?;
    if v.is_zero() {
        return Err(Error::InvalidParameter(
            "estimate needs a nonzero vector".into(),
        ));
    }
    let phi = legendre(norm, v, tol)?;
    let basis = kernel_basis(&phi);
    let rho_v = norm.value(v);

    let mut offsets = vec![Vector::zeros(v.dim())];
    if !basis.is_empty() {
        let mut rng = CounterRng::new(0x65737469);
        for _ in 0..m {
            let coeffs: Vec<f64> = basis.iter().map(|_| rng.gaussian()).collect();
            let z = linear_combination(&coeffs, &basis);
            let rho_z = norm.value(&z);
            if rho_z <= 1e-9 {
                continue;
            }
            let target = rng.log_range(0.01, 10.0) * rho_v;
            offsets.push(z.scale(target / rho_z));
        }
    }

    let mut sup_minus = f64::NEG_INFINITY;
    let mut inf_plus = f64::INFINITY;
    for z in &offsets {
        let y = v + z;
        sup_minus = sup_minus.max(dir_deriv_minus(f, x, &y, tol)?);
        inf_plus = inf_plus.min(dir_deriv_plus(f, x, &y, tol)?);
    }
    let lower = rho_v * rho_v;
    let band = 10.0 * tol.eq_tol * (1.0 + lower);
    let holds = sup_minus <= lower + band && lower <= inf_plus + band;
    Ok(EstimateReport {
        sup_minus,
        lower,
        inf_plus,
        holds,
    })
}

/// Finite relation data for cyclic monotonicity: pairs `(x_i, w_i)` and a
/// distinguished base pair the potential is anchored at.
#[derive(Debug, Clone)]
pub struct MonotoneData {
    pub pairs: Vec<(Vector, Vector)>,
    pub base_index: usize,
}

impl MonotoneData {
    pub fn new(pairs: Vec<(Vector, Vector)>, base_index: usize) -> Result<MonotoneData> {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("no pairs".into()));
        }
        let n = pairs[0].0.dim();
        for (x, w) in &pairs {
            check_dim(n, x.dim())?;
            check_dim(n, w.dim())?;
        }
        if base_index >= pairs.len() {
            return Err(Error::InvalidParameter(format!(
                "base index {base_index} out of range"
            )));
        }
        Ok(MonotoneData { pairs, base_index })
    }

    pub fn dim(&self) -> usize {
        self.pairs[0].0.dim()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneReport {
    pub ok: bool,
    /// indices of a positive-weight cycle when one exists, lowest index
    /// first
    pub worst_cycle: Vec<usize>,
    /// total weight of that cycle (0 when ok)
    pub slack: f64,
}

fn transfer_weights(s: &MonotoneData, norm: &Norm, tol: &Tolerances) -> Result<Vec<Vec<f64>>> {
    let m = s.pairs.len();
    let phis: Vec<Functional> = s
        .pairs
        .iter()
        .map(|(_, w)| legendre(norm, w, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut c = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                c[i][j] = phis[i].apply(&(&s.pairs[j].0 - &s.pairs[i].0));
            }
        }
    }
    Ok(c)
}

/// Cyclic monotonicity of the relation: no cycle of transfers
/// `L(w_i)(x_j - x_i)` has positive total weight. Longest-path relaxation
/// over the complete digraph; a relaxation still active after `|S|`
/// rounds exposes a positive cycle, which is extracted and returned.
pub fn cyclic_monotone_check(
    s: &MonotoneData,
    norm: &Norm,
    tol: &Tolerances,
) -> Result<MonotoneReport> {
    check_dim(norm.dim(), s.dim())?;
    let m = s.pairs.len();
    let c = transfer_weights(s, norm, tol)?;
    let cmax = c
        .iter()
        .flat_map(|r| r.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    let margin = 1e-12 * (1.0 + cmax);

    let mut d = vec![0.0; m];
    let mut pred = vec![usize::MAX; m];
    let mut cycle_entry = None;
    for round in 0..=m {
        let mut improved = None;
        for i in 0..m {
            for j in 0..m {
                if i != j && d[i] + c[i][j] > d[j] + margin {
                    d[j] = d[i] + c[i][j];
                    pred[j] = i;
                    improved = Some(j);
                }
            }
        }
        if improved.is_none() {
            return Ok(MonotoneReport {
                ok: true,
                worst_cycle: Vec::new(),
                slack: 0.0,
            });
        }
        if round == m {
            cycle_entry = improved;
        }
    }

    // still relaxing after m rounds: walk predecessors into the cycle
    let mut v = cycle_entry.expect("relaxation continued");
    for _ in 0..m {
        v = pred[v];
    }
    let mut cycle = vec![v];
    let mut u = pred[v];
    while u != v {
        cycle.push(u);
        u = pred[u];
    }
    cycle.reverse();
    let low = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, idx)| **idx)
        .map(|(pos, _)| pos)
        .expect("nonempty cycle");
    cycle.rotate_left(low);
    let mut slack = 0.0;
    for k in 0..cycle.len() {
        slack += c[cycle[k]][cycle[(k + 1) % cycle.len()]];
    }
    Ok(MonotoneReport {
        ok: false,
        worst_cycle: cycle,
        slack,
    })
}

/// Max-affine potential with the relation inside its subdifferential:
/// `f(x) = max_i [V_i + L(w_i)(x - x_i)]` where `V_i` is the maximal
/// chain weight from the base pair. Vanishes at the base point.
pub fn rockafellar_potential(
    s: &MonotoneData,
    norm: &Norm,
    tol: &Tolerances,
) -> Result<ConvexFunction> {
    let report = cyclic_monotone_check(s, norm, tol)?;
    if !report.ok {
        return Err(Error::NotCyclicallyMonotone {
            cycle: report.worst_cycle,
            weight: report.slack,
        });
    }
    let m = s.pairs.len();
    let c = transfer_weights(s, norm, tol)?;
    let cmax = c
        .iter()
        .flat_map(|r| r.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    let margin = 1e-12 * (1.0 + cmax);

    let mut v = vec![f64::NEG_INFINITY; m];
    v[s.base_index] = 0.0;
    for _ in 0..m {
        let mut changed = false;
        for i in 0..m {
            if v[i] == f64::NEG_INFINITY {
                continue;
            }
            for j in 0..m {
                if i != j && v[i] + c[i][j] > v[j] + margin {
                    v[j] = v[i] + c[i][j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut pieces = Vec::with_capacity(m);
    for (i, (x_i, w_i)) in s.pairs.iter().enumerate() {
        let phi = legendre(norm, w_i, tol)?;
        let b = v[i] - phi.apply(x_i);
        pieces.push((phi, b));
    }
    ConvexFunction::max_affine(pieces)
}

/// Declarative convex-function description for the wire. Distance
/// functions bind to the ambient norm at instantiation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionSpec {
    MaxAffine { pieces: Vec<PieceSpec> },
    Distance { body: BodySpec },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PieceSpec {
    pub phi: Vec<f64>,
    pub b: f64,
}

impl FunctionSpec {
    pub fn instantiate(&self, ambient: &Norm) -> Result<ConvexFunction> {
        match self {
            FunctionSpec::MaxAffine { pieces } => {
                let ps = pieces
                    .iter()
                    .map(|p| Ok((Functional::new(p.phi.clone())?, p.b)))
                    .collect::<Result<Vec<_>>>()?;
                ConvexFunction::max_affine(ps)
            }
            FunctionSpec::Distance { body } => {
                let k = body.instantiate(ambient)?;
                ConvexFunction::distance_to_body(k, ambient.clone())
            }
        }
    }
}
