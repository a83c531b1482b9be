//! The Legendre transform of a smooth strictly convex norm.
//!
//! `L(x) = rho(x) * d(rho)_x` maps points to the functionals that support
//! the ball of radius `rho(x)` at `x`. It is odd, degree-1 homogeneous,
//! sends 0 to 0, and preserves norms: `|L(x)|_* = |x|`. Its kernel
//! characterizes Birkhoff orthogonality (`z` with `L(x) z = 0` can be added
//! to `x` in small multiples without shrinking the norm), which is why the
//! transform shows up in every other module here.
//!
//! The inverse rides on self-duality: for the built-in norms the map
//! `L^-1` is the Legendre transform of the dual norm read backwards, in
//! closed form. Custom norms fall back to maximizing the functional over
//! the unit sphere by projected ascent.

use crate::geom::{Functional, Tolerances, Vector};
use crate::norms::Norm;
use crate::{check_dim, Error, Result};

/// A point together with its Legendre image.
#[derive(Debug, Clone)]
pub struct LegendrePair {
    pub x: Vector,
    pub phi: Functional,
}

impl LegendrePair {
    pub fn new(norm: &Norm, x: &Vector, tol: &Tolerances) -> Result<LegendrePair> {
        Ok(LegendrePair {
            x: x.clone(),
            phi: legendre(norm, x, tol)?,
        })
    }
}

/// Legendre transform `L(x)`. Total: `L(0) = 0`, and inputs far below the
/// gradient's working scale are lifted by homogeneity (`L(2^k x) = 2^k L(x)`)
/// before differentiating.
pub fn legendre(norm: &Norm, x: &Vector, tol: &Tolerances) -> Result<Functional> {
    check_dim(norm.dim(), x.dim())?;
    if x.is_zero() {
        return Ok(Functional::zeros(x.dim()));
    }
    let rho = norm.value(x);
    if rho < 1e-10 {
        // Rescale into O(1), transform, scale back.
        let k = (-rho.log2()).ceil() as i32;
        let lifted = x.scale(2f64.powi(k));
        let phi = legendre(norm, &lifted, tol)?;
        return Ok(phi.scale(2f64.powi(-k)));
    }
    let grad = norm.gradient(x, tol)?;
    Ok(grad.scale(rho))
}

/// Dual norm `|phi|_* = sup { phi(x) : |x| <= 1 }`.
pub fn dual_norm(norm: &Norm, phi: &Functional, tol: &Tolerances) -> Result<f64> {
    check_dim(norm.dim(), phi.dim())?;
    if phi.is_zero() {
        return Ok(0.0);
    }
    match norm.dual_object() {
        Some(dual) => Ok(dual.value(&phi.as_vector())),
        None => sphere_maximize(norm, phi, tol).map(|(_, v)| v),
    }
}

/// Inverse Legendre transform: the unique `x` with `L(x) = phi`.
///
/// For built-ins this is the dual norm's own Legendre transform applied to
/// the coefficients of `phi`; for custom norms, `x = |phi|_* u` with `u`
/// the unit-sphere maximizer of `phi` (unique by strict convexity).
pub fn legendre_inverse(norm: &Norm, phi: &Functional, tol: &Tolerances) -> Result<Vector> {
    check_dim(norm.dim(), phi.dim())?;
    if phi.is_zero() {
        return Ok(Vector::zeros(phi.dim()));
    }
    match norm.dual_object() {
        Some(dual) => {
            let image = legendre(&dual, &phi.as_vector(), tol)?;
            Ok(image.as_vector())
        }
        None => {
            let (u, value) = sphere_maximize(norm, phi, tol)?;
            Ok(u.scale(value))
        }
    }
}

/// Maximize `phi` over the unit sphere of `norm` by projected ascent from
/// the best starts of a quasi-random sphere sample. Returns the unit
/// maximizer and the attained value (the dual norm).
///
/// Stationarity is `phi = phi(u) * d(rho)_u`; the residual of that identity
/// is the convergence measure.
fn sphere_maximize(norm: &Norm, phi: &Functional, tol: &Tolerances) -> Result<(Vector, f64)> {
    const STARTS: usize = 4;
    const SAMPLE: usize = 256;
    let sample = norm.sphere_sample(SAMPLE, 0x6475616c)?;
    let mut ranked: Vec<&Vector> = sample.iter().collect();
    ranked.sort_by(|a, b| phi.apply(b).total_cmp(&phi.apply(a)));

    let scale = 1.0 + phi.max_abs();
    let per_start = (tol.max_iter / STARTS).max(200);
    let mut best: Option<(Vector, f64, f64)> = None; // (u, value, residual)

    for start in ranked.iter().take(STARTS) {
        let mut u = (*start).clone();
        let mut val = phi.apply(&u);
        let mut resid = f64::INFINITY;
        for _ in 0..per_start {
            let grad = norm.gradient(&u, tol)?;
            // Ascent direction for phi(x)/rho(x) at unit x.
            let r = Vector::new(
                phi.coeffs()
                    .iter()
                    .zip(grad.coeffs())
                    .map(|(p, g)| p - val * g)
                    .collect(),
            )
            .expect("finite");
            resid = r.max_abs();
            if resid <= tol.opt_gap * scale {
                break;
            }
            let mut eta = 1.0 / scale;
            let mut improved = false;
            for _ in 0..40 {
                let cand = &u + &r.scale(eta);
                let rho = norm.value(&cand);
                if rho > 1e-10 {
                    let cu = cand.scale(1.0 / rho);
                    let cv = phi.apply(&cu);
                    if cv > val {
                        u = cu;
                        val = cv;
                        improved = true;
                        break;
                    }
                }
                eta *= 0.5;
            }
            if !improved {
                break;
            }
        }
        match &best {
            Some((_, v, _)) if *v >= val => {}
            _ => best = Some((u, val, resid)),
        }
    }

    let (u, val, resid) = best.expect("at least one start");
    if resid > 10.0 * tol.opt_gap * scale {
        return Err(Error::NonConvergence {
            best: val,
            iterations: tol.max_iter,
        });
    }
    Ok((u, val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::canonical_embed;
    use crate::numeric::central_richardson;
    use crate::sampling::CounterRng;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn test_norms(dim: usize) -> Vec<Norm> {
        let mut diag = vec![vec![0.0; dim]; dim];
        for (i, row) in diag.iter_mut().enumerate() {
            row[i] = ((i + 1) * (i + 1)) as f64;
        }
        vec![
            Norm::euclidean(dim).unwrap(),
            Norm::p_norm(1.5, dim).unwrap(),
            Norm::p_norm(4.0, dim).unwrap(),
            Norm::ellipsoidal(diag).unwrap(),
        ]
    }

    #[test]
    fn euclidean_transform_is_identity_on_coordinates() {
        let n = Norm::euclidean(2).unwrap();
        let x = Vector::new(vec![3.0, 4.0]).unwrap();
        let phi = legendre(&n, &x, &tols()).unwrap();
        assert!(phi.approx_eq(&Functional::new(vec![3.0, 4.0]).unwrap(), 1e-14));
        assert!((dual_norm(&n, &phi, &tols()).unwrap() - 5.0).abs() < 1e-14);
        let back = legendre_inverse(&n, &phi, &tols()).unwrap();
        assert!(back.approx_eq(&x, 1e-14));
    }

    #[test]
    fn quartic_transform_frozen_values() {
        // p = 4: L(1,1) = (2^(-1/2), 2^(-1/2)), |(1,1)|_* = 2^(3/4).
        let n = Norm::p_norm(4.0, 2).unwrap();
        let x = Vector::new(vec![1.0, 1.0]).unwrap();
        let phi = legendre(&n, &x, &tols()).unwrap();
        let want = 2f64.powf(-0.5);
        assert!((phi.coeffs()[0] - want).abs() < 1e-14, "{:?}", phi.coeffs());
        assert!((phi.coeffs()[1] - want).abs() < 1e-14);

        let ones = Functional::new(vec![1.0, 1.0]).unwrap();
        let d = dual_norm(&n, &ones, &tols()).unwrap();
        assert!((d - 2f64.powf(0.75)).abs() < 1e-14, "dual norm {d}");

        let back = legendre_inverse(&n, &phi, &tols()).unwrap();
        assert!(back.approx_eq(&x, 1e-12));
    }

    #[test]
    fn zero_maps_to_zero_both_ways() {
        for n in test_norms(3) {
            let phi = legendre(&n, &Vector::zeros(3), &tols()).unwrap();
            assert!(phi.is_zero());
            let x = legendre_inverse(&n, &Functional::zeros(3), &tols()).unwrap();
            assert!(x.is_zero());
            assert_eq!(dual_norm(&n, &Functional::zeros(3), &tols()).unwrap(), 0.0);
        }
    }

    #[test]
    fn transform_is_odd_and_degree_one() {
        let mut rng = CounterRng::new(21);
        for n in test_norms(3) {
            for _ in 0..40 {
                let x = rng.direction(3).scale(rng.log_range(0.1, 10.0));
                let phi = legendre(&n, &x, &tols()).unwrap();
                for alpha in [-2.0, -1.0, 0.5, 3.0, rng.range(-4.0, 4.0)] {
                    let lhs = legendre(&n, &x.scale(alpha), &tols()).unwrap();
                    assert!(
                        lhs.approx_eq(&phi.scale(alpha), 1e-10),
                        "homogeneity failed for {n:?}, alpha = {alpha}"
                    );
                }
            }
        }
    }

    #[test]
    fn action_recovers_the_squared_norm() {
        let mut rng = CounterRng::new(22);
        for n in test_norms(3) {
            for _ in 0..50 {
                let x = rng.direction(3).scale(rng.log_range(0.1, 10.0));
                let phi = legendre(&n, &x, &tols()).unwrap();
                let rho = n.eval(&x).unwrap();
                assert!((phi.apply(&x) - rho * rho).abs() <= 1e-9 * (1.0 + rho * rho));
            }
        }
    }

    #[test]
    fn transform_preserves_norms() {
        let mut rng = CounterRng::new(23);
        for n in test_norms(3) {
            for _ in 0..50 {
                let x = rng.direction(3).scale(rng.log_range(0.01, 100.0));
                let phi = legendre(&n, &x, &tols()).unwrap();
                let d = dual_norm(&n, &phi, &tols()).unwrap();
                let rho = n.eval(&x).unwrap();
                assert!((d - rho).abs() <= 1e-9 * (1.0 + rho), "{n:?}: {d} vs {rho}");
            }
        }
    }

    #[test]
    fn kernel_directions_never_shrink_the_norm() {
        let mut rng = CounterRng::new(24);
        for n in test_norms(3) {
            for _ in 0..20 {
                let x = rng.direction(3);
                let phi = legendre(&n, &x, &tols()).unwrap();
                let rho = n.eval(&x).unwrap();
                for z in crate::geom::kernel_basis(&phi) {
                    for t in [-2.0, -0.5, -0.01, 0.01, 0.5, 2.0] {
                        let moved = n.eval(&(&x + &z.scale(t))).unwrap();
                        assert!(
                            moved >= rho - 1e-10 * (1.0 + rho),
                            "{n:?}: |x + t z| = {moved} < {rho}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn round_trips_hold_in_both_orders() {
        let mut rng = CounterRng::new(25);
        for n in test_norms(3) {
            for _ in 0..50 {
                let x = rng.direction(3).scale(rng.log_range(0.1, 10.0));
                let phi = legendre(&n, &x, &tols()).unwrap();
                let back = legendre_inverse(&n, &phi, &tols()).unwrap();
                assert!(back.approx_eq(&x, 1e-9), "{n:?}: {:?} vs {:?}", back, x);

                let psi = Functional::new(rng.direction(3).coords().to_vec()).unwrap();
                let y = legendre_inverse(&n, &psi, &tols()).unwrap();
                let forward = legendre(&n, &y, &tols()).unwrap();
                assert!(forward.approx_eq(&psi, 1e-9));
            }
        }
    }

    #[test]
    fn self_duality_through_the_bidual() {
        // L_*(phi) applied to psi equals psi(L^-1(phi)): the dual norm's
        // transform is the canonical embedding of the inverse image.
        let mut rng = CounterRng::new(26);
        for n in test_norms(2) {
            let dual = n.dual_object().unwrap();
            for _ in 0..40 {
                let phi = Functional::new(rng.direction(2).coords().to_vec()).unwrap();
                let x = legendre_inverse(&n, &phi, &tols()).unwrap();
                let j = canonical_embed(&x);
                let dual_image = legendre(&dual, &phi.as_vector(), &tols()).unwrap();
                for _ in 0..5 {
                    let psi = Functional::new(rng.direction(2).coords().to_vec()).unwrap();
                    let via_bidual = j.apply(&psi);
                    let via_dual: f64 = dual_image
                        .coeffs()
                        .iter()
                        .zip(psi.coeffs())
                        .map(|(a, b)| a * b)
                        .sum();
                    assert!(
                        (via_bidual - via_dual).abs() <= 1e-9 * (1.0 + via_bidual.abs()),
                        "{n:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn transform_matches_semi_inner_product() {
        // L(x) v = (1/2) d/dt rho(x + t v)^2 at t = 0.
        let mut rng = CounterRng::new(27);
        for n in test_norms(3) {
            for _ in 0..25 {
                let x = rng.direction(3);
                let v = rng.direction(3);
                let phi = legendre(&n, &x, &tols()).unwrap();
                let fd = central_richardson(
                    |t| {
                        let r = n.value(&(&x + &v.scale(t)));
                        0.5 * r * r
                    },
                    1e-5,
                );
                assert!(
                    (phi.apply(&v) - fd).abs() <= 1e-6 * (1.0 + fd.abs()),
                    "{n:?}"
                );
            }
        }
    }

    #[test]
    fn continuity_down_to_zero() {
        // L is continuous with L(0) = 0; coordinates shrink linearly.
        let n = Norm::p_norm(4.0, 2).unwrap();
        let x = Vector::new(vec![0.7, -0.3]).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..30 {
            let phi = legendre(&n, &x.scale(2f64.powi(-k)), &tols()).unwrap();
            let m = phi.max_abs();
            assert!(m < last || m == 0.0);
            last = m;
        }
        assert!(last < 1e-8);
        // Far below the gradient scale, homogeneity still gives exact ratios.
        let tiny = legendre(&n, &x.scale(1e-30), &tols()).unwrap();
        let unit = legendre(&n, &x, &tols()).unwrap();
        assert!(tiny.scale(1e30).approx_eq(&unit, 1e-10));
    }

    #[test]
    fn custom_norm_falls_back_to_sphere_ascent() {
        let reference = Norm::p_norm(4.0, 2).unwrap();
        let r1 = reference.clone();
        let r2 = reference.clone();
        let custom = Norm::custom(
            2,
            move |x| r1.value(x),
            Some(std::sync::Arc::new(move |x: &Vector| {
                r2.gradient(x, &Tolerances::default()).unwrap()
            })),
        )
        .unwrap();

        let phi = Functional::new(vec![1.0, 1.0]).unwrap();
        let d = dual_norm(&custom, &phi, &tols()).unwrap();
        assert!((d - 2f64.powf(0.75)).abs() < 1e-6, "custom dual norm {d}");

        let x = Vector::new(vec![1.0, 1.0]).unwrap();
        let image = legendre(&custom, &x, &tols()).unwrap();
        let back = legendre_inverse(&custom, &image, &tols()).unwrap();
        assert!(back.approx_eq(&x, 1e-5), "round trip {:?}", back.coords());
    }

    #[test]
    fn pair_constructor_checks_its_invariants() {
        let n = Norm::p_norm(1.5, 2).unwrap();
        let x = Vector::new(vec![2.0, -1.0]).unwrap();
        let pair = LegendrePair::new(&n, &x, &tols()).unwrap();
        let rho = n.eval(&x).unwrap();
        assert!((pair.phi.apply(&pair.x) - rho * rho).abs() < 1e-10 * (1.0 + rho * rho));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let n = Norm::euclidean(2).unwrap();
        let x = Vector::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            legendre(&n, &x, &tols()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
