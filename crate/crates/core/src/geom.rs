//! Points, linear functionals, the canonical embedding into the bidual,
//! hyperplanes, and the shared tolerance bundle.
//!
//! Vectors and functionals live in dual coordinate systems and are kept as
//! distinct types on purpose: a functional is applied to a vector, never
//! added to one. The only sanctioned bridges between the two sides are the
//! Legendre transform and its inverse.

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Result};

/// Numerical thresholds shared by every oracle.
///
/// `eq_tol` is the equality band, `fd_step` the base finite-difference
/// step, `opt_gap` the duality-gap certificate for iterative solvers, and
/// `max_iter` the iteration cap.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    pub eq_tol: f64,
    pub fd_step: f64,
    pub opt_gap: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eq_tol: 1e-8,
            fd_step: 1e-6,
            opt_gap: 1e-7,
            max_iter: 10_000,
        }
    }
}

/// A point of the primal space, in standard coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    coords: Vec<f64>,
}

/// A linear functional, stored by its coefficients in the dual basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    coeffs: Vec<f64>,
}

/// An element of the bidual: a linear functional on functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct Bidual {
    coords: Vec<f64>,
}

/// An affine hyperplane `{ y : normal(y) = offset }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Functional,
    pub offset: f64,
}

fn require_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("coordinates must be finite".into()))
    }
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        require_finite(&coords)?;
        if coords.is_empty() {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Vector { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        Vector {
            coords: vec![0.0; dim],
        }
    }

    /// Standard basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        Vector { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn scale(&self, a: f64) -> Vector {
        Vector {
            coords: self.coords.iter().map(|c| a * c).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn euclid(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == 0.0)
    }

    /// Coordinatewise comparison within `tol * (1 + larger max-abs)`.
    pub fn approx_eq(&self, other: &Vector, tol: f64) -> bool {
        self.dim() == other.dim() && {
            let scale = 1.0 + self.max_abs().max(other.max_abs());
            self.coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| (a - b).abs() <= tol * scale)
        }
    }
}

impl Functional {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        require_finite(&coeffs)?;
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Functional { coeffs })
    }

    pub fn zeros(dim: usize) -> Self {
        Functional {
            coeffs: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Evaluate the functional on a vector.
    pub fn apply(&self, x: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), x.dim());
        self.coeffs.iter().zip(x.coords()).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, a: f64) -> Functional {
        Functional {
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn euclid(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn approx_eq(&self, other: &Functional, tol: f64) -> bool {
        self.dim() == other.dim() && {
            let scale = 1.0 + self.max_abs().max(other.max_abs());
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| (a - b).abs() <= tol * scale)
        }
    }

    /// Coefficients reinterpreted as a point of the dual space. Used when a
    /// dual-norm oracle has to evaluate on functionals.
    pub fn as_vector(&self) -> Vector {
        Vector {
            coords: self.coeffs.clone(),
        }
    }
}

impl Bidual {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Evaluate on a functional.
    pub fn apply(&self, phi: &Functional) -> f64 {
        debug_assert_eq!(self.dim(), phi.dim());
        self.coords
            .iter()
            .zip(phi.coeffs())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn approx_eq(&self, other: &Bidual, tol: f64) -> bool {
        let a = Vector {
            coords: self.coords.clone(),
        };
        let b = Vector {
            coords: other.coords.clone(),
        };
        a.approx_eq(&b, tol)
    }
}

/// Canonical embedding `J` of the space into its bidual: `J(x)(phi) = phi(x)`.
///
/// In standard coordinates the embedding is the identity on coordinate
/// lists, which is exactly what makes it worth having as a named type: it
/// records on which side of the duality a coordinate list lives.
pub fn canonical_embed(x: &Vector) -> Bidual {
    Bidual {
        coords: x.coords().to_vec(),
    }
}

impl Hyperplane {
    pub fn new(normal: Functional, offset: f64) -> Result<Self> {
        if normal.is_zero() {
            return Err(Error::InvalidParameter(
                "hyperplane normal must be nonzero".into(),
            ));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidParameter("offset must be finite".into()));
        }
        Ok(Hyperplane { normal, offset })
    }

    /// Hyperplane through the origin with the given normal.
    pub fn through_origin(normal: Functional) -> Result<Self> {
        Hyperplane::new(normal, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        (self.normal.apply(x) - self.offset).abs() <= tol * (1.0 + x.max_abs())
    }

    /// Basis of the parallel linear subspace `ker(normal)`.
    ///
    /// Pivots on the largest normal coefficient, so the basis is well
    /// conditioned whenever the normal is.
    pub fn kernel_basis(&self) -> Vec<Vector> {
        kernel_basis(&self.normal)
    }
}

/// Basis of `ker(phi)` for a nonzero functional `phi` in dimension n:
/// the n-1 vectors `e_i - (phi_i / phi_k) e_k` with k the largest pivot.
pub fn kernel_basis(phi: &Functional) -> Vec<Vector> {
    let n = phi.dim();
    let c = phi.coeffs();
    let k = (0..n)
        .max_by(|a, b| c[*a].abs().total_cmp(&c[*b].abs()))
        .expect("nonempty");
    assert!(c[k] != 0.0, "kernel basis of the zero functional");
    let mut basis = Vec::with_capacity(n - 1);
    for i in 0..n {
        if i == k {
            continue;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v[k] = -c[i] / c[k];
        basis.push(Vector { coords: v });
    }
    basis
}

/// `sum_i a_i * v_i` over parallel slices; all vectors must share a dimension.
pub fn linear_combination(coeffs: &[f64], vectors: &[Vector]) -> Vector {
    assert_eq!(coeffs.len(), vectors.len());
    assert!(!vectors.is_empty());
    let n = vectors[0].dim();
    let mut out = vec![0.0; n];
    for (a, v) in coeffs.iter().zip(vectors) {
        for (o, c) in out.iter_mut().zip(v.coords()) {
            *o += a * c;
        }
    }
    Vector { coords: out }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector {
            coords: self
                .coords
                .iter()
                .zip(rhs.coords())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector {
            coords: self
                .coords
                .iter()
                .zip(rhs.coords())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, a: f64) -> Vector {
        self.scale(a)
    }
}

impl Add for &Functional {
    type Output = Functional;
    fn add(self, rhs: &Functional) -> Functional {
        debug_assert_eq!(self.dim(), rhs.dim());
        Functional {
            coeffs: self
                .coeffs
                .iter()
                .zip(rhs.coeffs())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Functional {
    type Output = Functional;
    fn sub(self, rhs: &Functional) -> Functional {
        debug_assert_eq!(self.dim(), rhs.dim());
        Functional {
            coeffs: self
                .coeffs
                .iter()
                .zip(rhs.coeffs())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

// Vectors serialize as bare arrays, functionals as {"dual": [...]}: the
// asymmetry keeps the two sides of the duality distinct on the wire.

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.coords.len()))?;
        for c in &self.coords {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Vector;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of numbers")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Vector, A::Error> {
                let mut coords = Vec::new();
                while let Some(c) = seq.next_element::<f64>()? {
                    coords.push(c);
                }
                Vector::new(coords).map_err(serde::de::Error::custom)
            }
        }
        d.deserialize_seq(V)
    }
}

#[derive(Serialize, Deserialize)]
struct FunctionalWire {
    dual: Vec<f64>,
}

impl Serialize for Functional {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FunctionalWire {
            dual: self.coeffs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Functional {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = FunctionalWire::deserialize(d)?;
        Functional::new(wire.dual).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_reproduces_evaluation() {
        // J(x) phi = phi(x) on a few fixed pairs.
        let x = Vector::new(vec![1.0, 2.0]).unwrap();
        let phi = Functional::new(vec![3.0, -1.0]).unwrap();
        assert_eq!(canonical_embed(&x).apply(&phi), 1.0);
        assert_eq!(canonical_embed(&x).apply(&phi), phi.apply(&x));

        let e1 = Vector::basis(3, 0);
        let psi = Functional::new(vec![5.0, 7.0, 11.0]).unwrap();
        assert_eq!(canonical_embed(&e1).apply(&psi), 5.0);

        let zero = Vector::zeros(4);
        let any = Functional::new(vec![1.0, -2.0, 3.0, -4.0]).unwrap();
        assert_eq!(canonical_embed(&zero).apply(&any), 0.0);
    }

    #[test]
    fn embedding_is_bilinear() {
        let mut rng = crate::sampling::CounterRng::new(11);
        for _ in 0..100 {
            let x = Vector::new((0..3).map(|_| rng.range(-5.0, 5.0)).collect()).unwrap();
            let y = Vector::new((0..3).map(|_| rng.range(-5.0, 5.0)).collect()).unwrap();
            let phi = Functional::new((0..3).map(|_| rng.range(-5.0, 5.0)).collect()).unwrap();
            let psi = Functional::new((0..3).map(|_| rng.range(-5.0, 5.0)).collect()).unwrap();
            let (a, b) = (rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));

            let lhs = canonical_embed(&(&x.scale(a) + &y.scale(b))).apply(&phi);
            let rhs = a * canonical_embed(&x).apply(&phi) + b * canonical_embed(&y).apply(&phi);
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));

            let combo = Functional::new(
                phi.coeffs()
                    .iter()
                    .zip(psi.coeffs())
                    .map(|(p, q)| a * p + b * q)
                    .collect(),
            )
            .unwrap();
            let lhs = canonical_embed(&x).apply(&combo);
            let rhs = a * canonical_embed(&x).apply(&phi) + b * canonical_embed(&x).apply(&psi);
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn embedding_is_injective_on_basis() {
        // Distinct basis vectors stay distinct: J(e_i) e_j^* = delta_ij.
        let n = 4;
        for i in 0..n {
            for j in 0..n {
                let v = canonical_embed(&Vector::basis(n, i));
                let phi = Functional::new(Vector::basis(n, j).coords().to_vec()).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(v.apply(&phi), expect);
            }
        }
    }

    #[test]
    fn kernel_basis_spans_the_kernel() {
        let phi = Functional::new(vec![0.5, -2.0, 1.0]).unwrap();
        let basis = kernel_basis(&phi);
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!(phi.apply(b).abs() <= 1e-15);
        }
        // Independence: the two kernel vectors are not proportional.
        let (a, b) = (&basis[0], &basis[1]);
        let cross = a.coords()[0] * b.coords()[1] - a.coords()[1] * b.coords()[0];
        let cross2 = a.coords()[0] * b.coords()[2] - a.coords()[2] * b.coords()[0];
        assert!(cross.abs() + cross2.abs() > 1e-12);
    }

    #[test]
    fn wire_formats_round_trip() {
        let x = Vector::new(vec![1.5, -2.0]).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, "[1.5,-2.0]");
        let back: Vector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);

        let phi = Functional::new(vec![0.0, 1.0]).unwrap();
        let s = serde_json::to_string(&phi).unwrap();
        assert_eq!(s, r#"{"dual":[0.0,1.0]}"#);
        let back: Functional = serde_json::from_str(&s).unwrap();
        assert_eq!(back, phi);

        let h = Hyperplane::new(phi, 0.25).unwrap();
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"normal":{"dual":[0.0,1.0]},"offset":0.25}"#);
        let back: Hyperplane = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn non_finite_coordinates_are_rejected() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
        assert!(Functional::new(vec![f64::NEG_INFINITY, 0.0]).is_err());
        assert!(Vector::new(vec![]).is_err());
    }
}
