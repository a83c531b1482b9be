//! Small numerical kernels shared across modules: golden-section line
//! search, finite-difference extrapolation ladders, monotone bisection, and
//! least squares over the probability simplex.

use crate::geom::{linear_combination, Vector};

const PHI: f64 = 1.618_033_988_749_895;
const RESP: f64 = 2.0 - PHI; // 1/phi^2, the golden-section step ratio

/// Minimize a unimodal scalar function on `[a, b]` by golden-section search.
/// Returns the best evaluated `(t, f(t))`; the bracket shrinks below
/// `width_tol` or 200 iterations, whichever comes first.
pub fn golden_min(f: impl Fn(f64) -> f64, a: f64, b: f64, width_tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut c = lo + RESP * (hi - lo);
    let mut d = hi - RESP * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..200 {
        if hi - lo <= width_tol {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = lo + RESP * (hi - lo);
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = hi - RESP * (hi - lo);
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    // The endpoints of the original interval are never sampled by the
    // golden recursion; cover them so boundary minima are not missed.
    let fa = f(a.min(b));
    let fb = f(a.max(b));
    if fa < best.1 {
        best = (a.min(b), fa);
    }
    if fb < best.1 {
        best = (a.max(b), fb);
    }
    best
}

/// Central-difference derivative of `g` at 0 with one Richardson step:
/// combines steps `h` and `h/2` into an O(h^4) estimate.
pub fn central_richardson(g: impl Fn(f64) -> f64, h: f64) -> f64 {
    let d = |s: f64| (g(s) - g(-s)) / (2.0 * s);
    let d1 = d(h);
    let d2 = d(h / 2.0);
    (4.0 * d2 - d1) / 3.0
}

/// One-sided derivative `lim_{t -> 0+} (g(t) - g(0)) / t` estimated from
/// forward quotients at steps `h * 2^-j`, `j = 0..levels`, extrapolated by a
/// Neville ladder that removes the O(h), O(h^2), ... error terms in turn.
pub fn one_sided_ladder(g: impl Fn(f64) -> f64, h: f64, levels: usize) -> f64 {
    let g0 = g(0.0);
    let mut row: Vec<f64> = (0..levels)
        .map(|j| {
            let t = h / (1u64 << j) as f64;
            (g(t) - g0) / t
        })
        .collect();
    for k in 1..levels {
        let w = (1u64 << k) as f64;
        for j in (k..levels).rev() {
            row[j] = (w * row[j] - row[j - 1]) / (w - 1.0);
        }
    }
    row[levels - 1]
}

/// Find `t` in `[lo, hi]` with `f(t) = target` for nondecreasing `f`,
/// assuming `f(lo) <= target <= f(hi)`.
pub fn bisect_nondecreasing(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    iters: usize,
) -> f64 {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Result of projecting a target onto the convex hull of a point list in
/// the Euclidean sense.
#[derive(Debug, Clone)]
pub struct SimplexFit {
    /// Convex weights over the input points.
    pub weights: Vec<f64>,
    /// Euclidean distance from the target to the fitted combination.
    pub residual: f64,
    /// Certified lower bound on the distance to the hull itself.
    pub residual_lower: f64,
    pub iterations: usize,
}

/// Least squares over the probability simplex: minimize
/// `|sum_i w_i p_i - target|_2` with `w` convex weights.
///
/// Pairwise conditional gradient with exact steps; converges linearly for
/// this quadratic objective, and the duality gap turns into the certified
/// `residual_lower` bound, so membership decisions are two-sided.
pub fn simplex_least_squares(points: &[Vector], target: &Vector, max_iter: usize) -> SimplexFit {
    assert!(!points.is_empty());
    let m = points.len();
    if m == 1 {
        let residual = (&points[0] - target).euclid();
        return SimplexFit {
            weights: vec![1.0],
            residual,
            residual_lower: residual,
            iterations: 0,
        };
    }

    // Start at the closest single point.
    let start = (0..m)
        .min_by(|a, b| {
            (&points[*a] - target)
                .euclid()
                .total_cmp(&(&points[*b] - target).euclid())
        })
        .unwrap();
    let mut w = vec![0.0; m];
    w[start] = 1.0;

    let scale: f64 =
        1.0 + target.max_abs() + points.iter().map(|p| p.max_abs()).fold(0.0, f64::max);
    let mut best_gap = f64::INFINITY;
    let mut iterations = 0;

    for it in 0..max_iter {
        iterations = it;
        let fit = linear_combination(&w, points);
        let r = &fit - target;
        let q = 0.5 * r.euclid().powi(2);

        // grad_i = <p_i, r>; the quadratic's slope toward each point.
        let grads: Vec<f64> = points
            .iter()
            .map(|p| p.coords().iter().zip(r.coords()).map(|(a, b)| a * b).sum())
            .collect();

        let fw = (0..m)
            .min_by(|a, b| grads[*a].total_cmp(&grads[*b]))
            .unwrap();
        let away = (0..m)
            .filter(|i| w[*i] > 0.0)
            .max_by(|a, b| grads[*a].total_cmp(&grads[*b]))
            .unwrap();

        // Standard conditional-gradient gap: how much the linear model says
        // we could still descend inside the hull.
        let lambda_grad: f64 = w.iter().zip(&grads).map(|(a, b)| a * b).sum();
        let gap = lambda_grad - grads[fw];
        best_gap = best_gap.min(gap);
        if gap <= 1e-16 * scale * scale || q == 0.0 {
            break;
        }

        let d = &points[fw] - &points[away];
        let dd = d.euclid().powi(2);
        if dd == 0.0 {
            break;
        }
        let step_num: f64 = -d
            .coords()
            .iter()
            .zip(r.coords())
            .map(|(a, b)| a * b)
            .sum::<f64>();
        let gamma = (step_num / dd).clamp(0.0, w[away]);
        if gamma == 0.0 {
            break;
        }
        w[fw] += gamma;
        w[away] -= gamma;
    }

    let fit = linear_combination(&w, points);
    let residual = (&fit - target).euclid();
    let q = 0.5 * residual * residual;
    let residual_lower = (2.0 * (q - best_gap.max(0.0)).max(0.0)).sqrt();
    SimplexFit {
        weights: w,
        residual,
        residual_lower,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vector;

    #[test]
    fn golden_finds_quadratic_minimum() {
        // t-resolution is limited by the value plateau sqrt(eps * f / f''),
        // about 1e-8 here, not by the bracket width.
        let (t, v) = golden_min(|t| (t - 0.3).powi(2) + 1.0, -2.0, 2.0, 1e-12);
        assert!((t - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn golden_handles_boundary_minimum() {
        let (t, _) = golden_min(|t| t, 0.0, 1.0, 1e-12);
        assert!(t.abs() < 1e-9);
    }

    #[test]
    fn central_richardson_matches_analytic_derivative() {
        let d = central_richardson(|t| (1.0 + t).powi(3), 1e-4);
        assert!((d - 3.0).abs() < 1e-10, "got {d}");
    }

    #[test]
    fn one_sided_ladder_handles_kinks() {
        // g(t) = |t| has one-sided slope +1 at 0 from the right.
        let d = one_sided_ladder(|t| t.abs(), 1e-4, 4);
        assert!((d - 1.0).abs() < 1e-12);
        // Smooth case with curvature: g(t) = exp(t), slope 1.
        let d = one_sided_ladder(f64::exp, 1e-3, 4);
        assert!((d - 1.0).abs() < 1e-10, "got {d}");
    }

    #[test]
    fn bisection_solves_monotone_equation() {
        let t = bisect_nondecreasing(|t| t * t, 0.0, 4.0, 2.0, 80);
        assert!((t - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn simplex_fit_detects_interior_point() {
        let pts = vec![
            Vector::new(vec![0.0, 0.0]).unwrap(),
            Vector::new(vec![2.0, 0.0]).unwrap(),
            Vector::new(vec![0.0, 2.0]).unwrap(),
        ];
        let inside = Vector::new(vec![0.5, 0.5]).unwrap();
        let fit = simplex_least_squares(&pts, &inside, 10_000);
        assert!(fit.residual < 1e-10, "residual {}", fit.residual);
        let w_sum: f64 = fit.weights.iter().sum();
        assert!((w_sum - 1.0).abs() < 1e-12);

        let outside = Vector::new(vec![2.0, 2.0]).unwrap();
        let fit = simplex_least_squares(&pts, &outside, 10_000);
        // Nearest hull point is (1,1), distance sqrt(2).
        assert!((fit.residual - 2f64.sqrt()).abs() < 1e-9);
        assert!(fit.residual_lower > 1.0);
    }
}
