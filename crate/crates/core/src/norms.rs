//! Norm oracles.
//!
//! Four kinds share one interface: Euclidean, weighted p (1 < p < inf),
//! ellipsoidal (SPD matrix), and custom callbacks. Every constructor runs a
//! seeded spot-check of positive homogeneity, the triangle inequality, and
//! strict convexity, so a value that pretends to be a norm but is not one
//! (a seminorm, a max norm) is rejected before any oracle trusts it.
//!
//! Gradients are analytic for the built-ins. Custom norms may supply a
//! gradient callback; otherwise central differences with one Richardson
//! step (steps `h` and `h/2`, giving an O(h^4) estimate) fill in.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::geom::{Functional, Tolerances, Vector};
use crate::numeric::central_richardson;
use crate::sampling::{quasi_directions, CounterRng};
use crate::{check_dim, Error, Result};

/// Points on the unit sphere of some norm.
pub type UnitBallSample = Vec<Vector>;

type EvalFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Vector) -> Functional + Send + Sync>;

/// A smooth, strictly convex norm on R^n.
#[derive(Clone)]
pub enum Norm {
    Euclidean {
        dim: usize,
    },
    WeightedP {
        p: f64,
        weights: Vec<f64>,
    },
    /// `rho(x) = sqrt(x' A x)` for symmetric positive definite `A`.
    /// Both the matrix and its inverse are stored row-major.
    Ellipsoidal {
        dim: usize,
        a: Vec<f64>,
        a_inv: Vec<f64>,
    },
    Custom {
        dim: usize,
        eval: EvalFn,
        grad: Option<GradFn>,
    },
}

impl fmt::Debug for Norm {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Norm::Euclidean { dim } => write!(f, "Euclidean({dim})"),
            Norm::WeightedP { p, weights } => write!(f, "WeightedP(p={p}, w={weights:?})"),
            Norm::Ellipsoidal { dim, .. } => write!(f, "Ellipsoidal({dim})"),
            Norm::Custom { dim, grad, .. } => {
                write!(f, "Custom({dim}, grad={})", grad.is_some())
            }
        }
    }
}

fn matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

impl Norm {
    pub fn euclidean(dim: usize) -> Result<Norm> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let n = Norm::Euclidean { dim };
        n.spot_check()?;
        Ok(n)
    }

    pub fn weighted_p(p: f64, weights: Vec<f64>) -> Result<Norm> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in (1, inf), got {p}"
            )));
        }
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be positive and finite".into(),
            ));
        }
        let n = Norm::WeightedP { p, weights };
        n.spot_check()?;
        Ok(n)
    }

    /// Unweighted p-norm.
    pub fn p_norm(p: f64, dim: usize) -> Result<Norm> {
        Norm::weighted_p(p, vec![1.0; dim])
    }

    pub fn ellipsoidal(rows: Vec<Vec<f64>>) -> Result<Norm> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("matrix must be square".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "matrix entries must be finite".into(),
            ));
        }
        let scale = flat.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..dim {
            for j in 0..i {
                if (flat[i * dim + j] - flat[j * dim + i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter("matrix must be symmetric".into()));
                }
            }
        }
        let m = DMatrix::from_row_slice(dim, dim, &flat);
        let chol = m
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("matrix must be positive definite".into()))?;
        let inv = chol.inverse();
        let a_inv: Vec<f64> = (0..dim)
            .flat_map(|i| {
                let row = &inv;
                (0..dim).map(move |j| row[(i, j)])
            })
            .collect();
        let n = Norm::Ellipsoidal {
            dim,
            a: flat,
            a_inv,
        };
        n.spot_check()?;
        Ok(n)
    }

    pub fn custom<E>(dim: usize, eval: E, grad: Option<GradFn>) -> Result<Norm>
    where
        E: Fn(&Vector) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let n = Norm::Custom {
            dim,
            eval: Arc::new(eval),
            grad,
        };
        n.spot_check()?;
        Ok(n)
    }

    pub fn dim(&self) -> usize {
        match self {
            Norm::Euclidean { dim } => *dim,
            Norm::WeightedP { weights, .. } => weights.len(),
            Norm::Ellipsoidal { dim, .. } => *dim,
            Norm::Custom { dim, .. } => *dim,
        }
    }

    /// Norm value. Errors only on dimension mismatch.
    pub fn eval(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.value(x))
    }

    pub(crate) fn value(&self, x: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), x.dim());
        match self {
            Norm::Euclidean { .. } => x.euclid(),
            Norm::WeightedP { p, weights } => {
                // Factor out the largest coordinate so powf never overflows.
                let m = x.max_abs();
                if m == 0.0 {
                    return 0.0;
                }
                let s: f64 = x
                    .coords()
                    .iter()
                    .zip(weights)
                    .map(|(c, w)| w * (c.abs() / m).powf(*p))
                    .sum();
                m * s.powf(1.0 / p)
            }
            Norm::Ellipsoidal { a, .. } => {
                let ax = matvec(a, x.coords());
                x.coords()
                    .iter()
                    .zip(&ax)
                    .map(|(c, d)| c * d)
                    .sum::<f64>()
                    .max(0.0)
                    .sqrt()
            }
            Norm::Custom { eval, .. } => eval(x),
        }
    }

    /// Gradient of the norm at `x != 0`, as a functional.
    ///
    /// Rejects `rho(x) < 1e-10`: this close to the cone point the gradient
    /// of any norm is meaningless noise.
    pub fn gradient(&self, x: &Vector, tol: &Tolerances) -> Result<Functional> {
        check_dim(self.dim(), x.dim())?;
        let rho = self.value(x);
        if rho < 1e-10 {
            return Err(Error::SingularPoint);
        }
        Ok(self.gradient_at(x, rho, tol))
    }

    fn gradient_at(&self, x: &Vector, rho: f64, tol: &Tolerances) -> Functional {
        match self {
            Norm::Euclidean { .. } => {
                Functional::new(x.coords().iter().map(|c| c / rho).collect()).expect("finite")
            }
            Norm::WeightedP { p, weights } => {
                // grad_i = w_i sign(x_i) |x_i|^(p-1) / rho^(p-1); computed on
                // the scale-free ratios |x_i|/rho <= O(1).
                let coeffs = x
                    .coords()
                    .iter()
                    .zip(weights)
                    .map(|(c, w)| w * c.signum() * (c.abs() / rho).powf(p - 1.0))
                    .map(|v| if v == 0.0 { 0.0 } else { v })
                    .collect();
                Functional::new(coeffs).expect("finite")
            }
            Norm::Ellipsoidal { a, .. } => {
                let ax = matvec(a, x.coords());
                Functional::new(ax.into_iter().map(|v| v / rho).collect()).expect("finite")
            }
            Norm::Custom { eval, grad, .. } => {
                if let Some(g) = grad {
                    return g(x);
                }
                let h = tol.fd_step * (1.0 + x.max_abs());
                let coeffs = (0..x.dim())
                    .map(|i| {
                        central_richardson(
                            |t| {
                                let mut c = x.coords().to_vec();
                                c[i] += t;
                                eval(&Vector::new(c).expect("finite"))
                            },
                            h,
                        )
                    })
                    .collect();
                Functional::new(coeffs).expect("finite")
            }
        }
    }

    /// `m` points on the unit sphere: quasi-random directions radially
    /// normalized. Deterministic in `(m, seed)`.
    pub fn sphere_sample(&self, m: usize, seed: u64) -> Result<UnitBallSample> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "sample count must be positive".into(),
            ));
        }
        Ok(quasi_directions(self.dim(), m, seed)
            .into_iter()
            .map(|d| {
                let rho = self.value(&d);
                d.scale(1.0 / rho)
            })
            .collect())
    }

    /// The dual norm as a norm object on dual coordinates, when it has a
    /// closed form: Euclidean is self-dual, weighted p dualizes to weighted
    /// q with `1/p + 1/q = 1` and weights `w^(1-q)`, and an ellipsoid
    /// dualizes to its inverse matrix. Custom norms have no closed form.
    pub fn dual_object(&self) -> Option<Norm> {
        match self {
            Norm::Euclidean { dim } => Some(Norm::Euclidean { dim: *dim }),
            Norm::WeightedP { p, weights } => {
                let q = p / (p - 1.0);
                let w = weights.iter().map(|w| w.powf(1.0 - q)).collect();
                Some(Norm::WeightedP { p: q, weights: w })
            }
            Norm::Ellipsoidal { dim, a, a_inv } => Some(Norm::Ellipsoidal {
                dim: *dim,
                a: a_inv.clone(),
                a_inv: a.clone(),
            }),
            Norm::Custom { .. } => None,
        }
    }

    /// Structural identity: same kind and same parameters. Custom norms
    /// compare by callback identity.
    pub fn same_as(&self, other: &Norm) -> bool {
        match (self, other) {
            (Norm::Euclidean { dim: a }, Norm::Euclidean { dim: b }) => a == b,
            (Norm::WeightedP { p: p1, weights: w1 }, Norm::WeightedP { p: p2, weights: w2 }) => {
                p1 == p2 && w1 == w2
            }
            (Norm::Ellipsoidal { a: a1, .. }, Norm::Ellipsoidal { a: a2, .. }) => a1 == a2,
            (Norm::Custom { eval: e1, .. }, Norm::Custom { eval: e2, .. }) => Arc::ptr_eq(e1, e2),
            _ => false,
        }
    }

    /// Seeded construction-time audit: positivity, homogeneity, triangle
    /// inequality, and strict convexity on random probes. Nearly parallel
    /// probe pairs are skipped for the strict-convexity margin, since
    /// `|x + y|` approaches 2 for unit `x ~ y` under any norm.
    fn spot_check(&self) -> Result<()> {
        const PROBES: usize = 64;
        let eq_tol = Tolerances::default().eq_tol;
        let dim = self.dim();
        let mut rng = CounterRng::new(0x6e6f726d); // fixed audit seed
        let mut convexity_checked = 0;
        for _ in 0..PROBES {
            let x = rng.direction(dim);
            let y = rng.direction(dim);
            let (rx, ry) = (self.value(&x), self.value(&y));
            let scale = 1.0 + rx.abs() + ry.abs();
            if !(rx.is_finite() && rx > 0.0) {
                return Err(Error::InvalidParameter(
                    "norm audit failed: value not positive on a nonzero probe".into(),
                ));
            }
            let alpha = rng.range(-3.0, 3.0);
            let h = self.value(&x.scale(alpha)) - alpha.abs() * rx;
            if h.abs() > eq_tol * scale * (1.0 + alpha.abs()) {
                return Err(Error::InvalidParameter(format!(
                    "norm audit failed: homogeneity off by {h:.3e}"
                )));
            }
            let t = self.value(&(&x + &y)) - (rx + ry);
            if t > eq_tol * scale {
                return Err(Error::InvalidParameter(format!(
                    "norm audit failed: triangle inequality off by {t:.3e}"
                )));
            }
            // Strict convexity on the unit sphere, skipping near-parallel pairs.
            let xu = x.scale(1.0 / rx);
            let yu = y.scale(1.0 / ry);
            let cos = xu
                .coords()
                .iter()
                .zip(yu.coords())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / (xu.euclid() * yu.euclid());
            if cos.abs() < 0.9 {
                convexity_checked += 1;
                let mid = self.value(&(&xu + &yu));
                if mid >= 2.0 - eq_tol {
                    return Err(Error::InvalidParameter(format!(
                        "norm audit failed: not strictly convex (|x+y| = {mid:.12} on unit pair)"
                    )));
                }
            }
        }
        debug_assert!(dim < 2 || convexity_checked > 0);
        Ok(())
    }
}

/// Declarative norm description used on the wire; `instantiate` binds it to
/// a dimension. Weighted-p specs may omit weights (all ones).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum NormSpec {
    Euclidean,
    P {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Ellipsoid {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
    },
}

impl NormSpec {
    pub fn instantiate(&self, dim: usize) -> Result<Norm> {
        match self {
            NormSpec::Euclidean => Norm::euclidean(dim),
            NormSpec::P { p, weights } => {
                let w = weights.clone().unwrap_or_else(|| vec![1.0; dim]);
                check_dim(dim, w.len())?;
                Norm::weighted_p(*p, w)
            }
            NormSpec::Ellipsoid { a } => {
                check_dim(dim, a.len())?;
                Norm::ellipsoidal(a.clone())
            }
        }
    }
}
