//! Deterministic randomness.
//!
//! Every randomized routine in the crate draws from [`CounterRng`], a thin
//! wrapper over the counter-based ChaCha8 stream keyed by a single `u64`
//! seed. Quasi-random direction generation for sphere sampling uses the
//! additive golden-ratio sequence instead, which fills the sphere far more
//! evenly than independent draws at the sample sizes we use.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geom::Vector;

/// Seeded, counter-based generator: the ChaCha8 stream cipher keyed by the
/// seed. Identical seeds give identical draw sequences on every platform.
pub struct CounterRng {
    inner: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Derive an independent stream for a named subtask. Mixing the label
    /// keeps suites reproducible even when their internal draw counts change.
    pub fn fork(&self, label: u64) -> CounterRng {
        let mut seed = self.inner.get_seed();
        for (i, b) in label.to_le_bytes().iter().enumerate() {
            seed[i] ^= b.rotate_left(3);
            seed[i + 8] ^= b;
        }
        CounterRng {
            inner: ChaCha8Rng::from_seed(seed),
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Log-uniform draw over `[lo, hi]`, both positive.
    pub fn log_range(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo > 0.0 && hi > lo);
        (self.range(lo.ln(), hi.ln())).exp()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Vector with independent standard Gaussian coordinates.
    pub fn gaussian_vector(&mut self, dim: usize) -> Vector {
        Vector::new((0..dim).map(|_| self.gaussian()).collect()).expect("gaussian draws are finite")
    }

    /// Gaussian vector rejected until its largest coordinate exceeds `floor`,
    /// so callers can safely normalize.
    pub fn direction(&mut self, dim: usize) -> Vector {
        loop {
            let v = self.gaussian_vector(dim);
            if v.max_abs() > 1e-6 {
                return v;
            }
        }
    }
}

/// Additive golden-ratio sequence in `[0,1)^dim`: point `j` has coordinates
/// `frac(shift_i + (j+1) * alpha_i)` with `alpha_i = phi_d^-(i+1)` and
/// `phi_d` the positive root of `x^(dim+1) = x + 1`. Low discrepancy, no
/// state, and the seed only shifts the lattice origin.
pub struct GoldenSequence {
    alpha: Vec<f64>,
    shift: Vec<f64>,
}

impl GoldenSequence {
    pub fn new(dim: usize, seed: u64) -> Self {
        // Newton iteration for the generalized golden ratio.
        let d = dim as f64;
        let mut phi: f64 = 1.5;
        for _ in 0..64 {
            phi = (phi + 1.0).powf(1.0 / (d + 1.0));
        }
        let alpha: Vec<f64> = (0..dim).map(|i| (1.0 / phi).powi(i as i32 + 1)).collect();
        // Spread the seed into per-coordinate shifts with a splitmix step.
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let shift = (0..dim)
            .map(|_| {
                state ^= state >> 30;
                state = state.wrapping_mul(0xBF58476D1CE4E5B9);
                state ^= state >> 27;
                (state >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        GoldenSequence { alpha, shift }
    }

    pub fn point(&self, j: usize) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.shift)
            .map(|(a, s)| (s + (j as f64 + 1.0) * a).fract())
            .collect()
    }
}

/// `m` quasi-random directions in dimension `dim`, mapped through Box-Muller
/// so the raw (pre-normalization) distribution is rotation-invariant.
pub fn quasi_directions(dim: usize, m: usize, seed: u64) -> Vec<Vector> {
    let pairs = dim.div_ceil(2);
    let seq = GoldenSequence::new(2 * pairs, seed);
    let mut out = Vec::with_capacity(m);
    let mut j = 0;
    while out.len() < m {
        let u = seq.point(j);
        j += 1;
        let mut coords = Vec::with_capacity(dim);
        for k in 0..pairs {
            let u1 = u[2 * k].max(1e-12);
            let u2 = u[2 * k + 1];
            let r = (-2.0 * u1.ln()).sqrt();
            coords.push(r * (std::f64::consts::TAU * u2).cos());
            if coords.len() < dim {
                coords.push(r * (std::f64::consts::TAU * u2).sin());
            }
        }
        let v = Vector::new(coords).expect("finite");
        if v.max_abs() > 1e-6 {
            out.push(v);
        }
    }
    out
}
