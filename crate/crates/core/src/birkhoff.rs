//! Birkhoff orthogonality.
//!
//! `x` is Birkhoff left-orthogonal to `y` when `|x + t y| >= |x|` for every
//! real `t`. For smooth norms the working test is algebraic, `L(x) y = 0`;
//! the variational definition survives as an independent line-search
//! cross-check whose result is reported as the residual. The relation is
//! not symmetric, hence "left".

use serde::Serialize;

use crate::geom::{Hyperplane, Tolerances, Vector};
use crate::legendre::{legendre, legendre_inverse};
use crate::norms::Norm;
use crate::numeric::golden_min;
use crate::{check_dim, Error, Result};

/// Outcome of an orthogonality test.
///
/// `holds` comes from the algebraic test. `residual` is the variational
/// drop `|x| - min_t |x + t y|` found by golden-section search: zero (up to
/// search noise) exactly when the relation holds. `witness_t` is the
/// minimizing parameter; when the relation fails it points at the
/// counterexample multiplier.
#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalityReport {
    pub holds: bool,
    pub residual: f64,
    pub witness_t: f64,
}

/// Vector-vector test: is `x` Birkhoff left-orthogonal to `y`?
pub fn birkhoff_vv(
    norm: &Norm,
    x: &Vector,
    y: &Vector,
    tol: &Tolerances,
) -> Result<OrthogonalityReport> {
    check_dim(norm.dim(), x.dim())?;
    check_dim(norm.dim(), y.dim())?;
    if x.is_zero() {
        return Err(Error::UndefinedRelation);
    }
    let rx = norm.value(x);
    let ry = norm.value(y);
    if ry == 0.0 {
        // |x + t 0| = |x| for every t: trivially orthogonal.
        return Ok(OrthogonalityReport {
            holds: true,
            residual: 0.0,
            witness_t: 0.0,
        });
    }

    let phi = legendre(norm, x, tol)?;
    let holds = phi.apply(y).abs() <= tol.eq_tol * rx * ry;
    let (witness_t, residual) = variational_drop(norm, x, y, rx, ry);
    Ok(OrthogonalityReport {
        holds,
        residual,
        witness_t,
    })
}

/// The minimizer is confined to `[-2|x|/|y|, 2|x|/|y|]`: outside it the
/// reverse triangle inequality already forces `|x + t y| >= |x|`.
pub(crate) fn variational_drop(
    norm: &Norm,
    x: &Vector,
    y: &Vector,
    rx: f64,
    ry: f64,
) -> (f64, f64) {
    let r = 2.0 * rx / ry;
    let (t, min_val) = golden_min(
        |t| norm.value(&(x + &y.scale(t))),
        -r,
        r,
        1e-12 * r.max(1.0),
    );
    (t, rx - min_val)
}

/// Vector-hyperplane test: `x` against every direction of a hyperplane
/// through the origin. Linearity of `L(x)` makes testing a kernel basis
/// sufficient; the report carries the worst basis direction's line search.
pub fn birkhoff_vh(
    norm: &Norm,
    x: &Vector,
    h: &Hyperplane,
    tol: &Tolerances,
) -> Result<OrthogonalityReport> {
    check_dim(norm.dim(), x.dim())?;
    check_dim(norm.dim(), h.dim())?;
    if x.is_zero() {
        return Err(Error::UndefinedRelation);
    }
    if h.offset.abs() > tol.eq_tol {
        return Err(Error::InvalidParameter(
            "hyperplane must pass through the origin".into(),
        ));
    }

    let mut worst: Option<OrthogonalityReport> = None;
    for b in h.kernel_basis() {
        let report = birkhoff_vv(norm, x, &b, tol)?;
        let replace = match &worst {
            None => true,
            Some(w) => {
                // Failure dominates; among equals keep the larger residual.
                (!report.holds && w.holds)
                    || (report.holds == w.holds && report.residual > w.residual)
            }
        };
        if replace {
            worst = Some(report);
        }
    }
    Ok(worst.expect("hyperplane kernel basis is nonempty"))
}

/// The unique unit vector Birkhoff left-orthogonal to a hyperplane through
/// the origin, oriented to pair positively with the stored normal.
///
/// Strict convexity makes the direction unique; it is the inverse Legendre
/// image of the normal functional, normalized. The positive pairing comes
/// free: `normal(L^-1(normal)) = |normal|_*^2 > 0`.
pub fn left_orthogonal_direction(norm: &Norm, h: &Hyperplane, tol: &Tolerances) -> Result<Vector> {
    check_dim(norm.dim(), h.dim())?;
    if h.offset.abs() > tol.eq_tol {
        return Err(Error::InvalidParameter(
            "hyperplane must pass through the origin".into(),
        ));
    }
    let x = legendre_inverse(norm, &h.normal, tol)?;
    let rho = norm.value(&x);
    debug_assert!(rho > 0.0, "nonzero normal has nonzero inverse image");
    let u = x.scale(1.0 / rho);
    debug_assert!(h.normal.apply(&u) > 0.0);
    Ok(u)
}
