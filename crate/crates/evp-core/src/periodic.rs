//! Band-limited real functions on the circle stored as Fourier coefficients,
//! with the product/shift/norm calculus the spectral solvers are built on.
//!
//! Coefficients are indexed k = -K..=K with exact Hermitian symmetry, so the
//! represented function is real. Transcendental operations (reciprocal, log,
//! exp) are grid-sampled, transformed back, and truncated at a caller-chosen
//! degree with the discarded tail reported.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::arithmetic::Alpha;
use crate::fft;
use crate::math;
use crate::{Error, Result};

/// Default truncation degree for grid-sampled operations.
pub const DEFAULT_K_TARGET: usize = 128;

/// Floor for the evaluation grid; oversampling by >= 4 keeps aliasing of the
/// smooth functions used here below 1e-12.
pub const MIN_GRID: usize = 4096;

/// Positivity margin demanded by reciprocal and log.
pub const POSITIVITY_MARGIN: f64 = 1e-8;

/// Degree bound below which shifts use one exact big-precision angle per
/// mode instead of incremental powers.
pub const SHIFT_EXACT_DEGREE: usize = 1024;

/// A real trigonometric polynomial of degree K.
#[derive(Debug, Clone)]
pub struct PeriodicFunction {
    degree: usize,
    /// 2K+1 entries, index k+K.
    coeffs: Vec<Complex64>,
    /// Cached samples on the default grid (public constructors fill this;
    /// intermediate results of long operator iterations skip it).
    grid: Option<Vec<f64>>,
}

/// A grid-sampled result truncated back to a finite degree.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub func: PeriodicFunction,
    /// Sum of |coefficients| discarded beyond the kept degree.
    pub tail: f64,
}

impl PeriodicFunction {
    pub fn constant(c: f64) -> Self {
        Self::raw(0, vec![Complex64::new(c, 0.0)]).cached()
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// cos(2 pi k x)
    pub fn cosine(k: usize) -> Self {
        Self::harmonic(k, 1.0, 0.0)
    }

    /// sin(2 pi k x)
    pub fn sine(k: usize) -> Self {
        Self::harmonic(k, 0.0, 1.0)
    }

    /// a cos(2 pi k x) + b sin(2 pi k x)
    pub fn harmonic(k: usize, a: f64, b: f64) -> Self {
        if k == 0 {
            return Self::constant(a);
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k + 1];
        coeffs[2 * k] = Complex64::new(a / 2.0, -b / 2.0);
        coeffs[0] = Complex64::new(a / 2.0, b / 2.0);
        Self::raw(k, coeffs).cached()
    }

    /// From complex coefficients ordered k = -K..=K. Hermitian symmetry is
    /// enforced exactly by averaging mirrored entries.
    pub fn from_coefficients(degree: usize, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * degree + 1 {
            return Err(Error::InvalidInput(alloc::format!(
                "expected {} coefficients for degree {degree}, got {}",
                2 * degree + 1,
                coeffs.len()
            )));
        }
        for k in 1..=degree {
            let hi = coeffs[degree + k];
            let lo = coeffs[degree - k];
            let avg = (hi + lo.conj()) * 0.5;
            coeffs[degree + k] = avg;
            coeffs[degree - k] = avg.conj();
        }
        coeffs[degree] = Complex64::new(coeffs[degree].re, 0.0);
        Ok(Self::raw(degree, coeffs).cached())
    }

    /// Real cosine/sine series: a0 + sum a_k cos + b_k sin.
    pub fn from_cos_sin(a0: f64, terms: &[(f64, f64)]) -> Self {
        let k_max = terms.len();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
        coeffs[k_max] = Complex64::new(a0, 0.0);
        for (i, &(a, b)) in terms.iter().enumerate() {
            let k = i + 1;
            coeffs[k_max + k] = Complex64::new(a / 2.0, -b / 2.0);
            coeffs[k_max - k] = Complex64::new(a / 2.0, b / 2.0);
        }
        Self::raw(k_max, coeffs).cached()
    }

    /// Sample a scalar function on an oversampled grid and truncate to
    /// `k_target`, reporting the discarded coefficient mass.
    pub fn sample(f: impl Fn(f64) -> f64, k_target: usize) -> Truncation {
        let g = grid_size_for(k_target);
        let samples: Vec<f64> = (0..g).map(|j| f(j as f64 / g as f64)).collect();
        Self::from_grid_samples(&samples, k_target)
    }

    /// Transform grid samples (uniform, power-of-two length) and keep modes
    /// up to `k_target`.
    pub fn from_grid_samples(samples: &[f64], k_target: usize) -> Truncation {
        let g = samples.len();
        assert!(g.is_power_of_two(), "grid length must be a power of two");
        let spec = fft::forward_real(samples);
        let scale = 1.0 / g as f64;
        let k_keep = k_target.min(g / 2 - 1);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k_keep + 1];
        coeffs[k_keep] = spec[0] * scale;
        for k in 1..=k_keep {
            let c = spec[k] * scale;
            coeffs[k_keep + k] = c;
            coeffs[k_keep - k] = c.conj();
        }
        let mut tail = 0.0;
        for (bin, &v) in spec.iter().enumerate().take(g / 2 + 1).skip(k_keep + 1) {
            let w = if bin == g / 2 { 1.0 } else { 2.0 };
            tail += w * math::cnorm(v * scale);
        }
        let func = Self::from_coefficients(k_keep, coeffs).expect("length matches");
        Truncation { func, tail }
    }

    fn raw(degree: usize, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), 2 * degree + 1);
        PeriodicFunction { degree, coeffs, grid: None }
    }

    fn cached(mut self) -> Self {
        self.grid = Some(self.compute_grid(self.grid_size()));
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient at mode k (0 outside the band).
    pub fn coeff(&self, k: i64) -> Complex64 {
        let kk = k + self.degree as i64;
        if kk < 0 || kk >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[kk as usize]
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mean over the circle, i.e. the 0th coefficient.
    pub fn mean(&self) -> f64 {
        self.coeffs[self.degree].re
    }

    /// Default grid size for this degree.
    pub fn grid_size(&self) -> usize {
        grid_size_for(self.degree)
    }

    /// Pointwise value sum_k c_k e^(2 pi i k x); the imaginary part cancels
    /// exactly by Hermitian symmetry.
    pub fn evaluate(&self, x: f64) -> f64 {
        let theta = math::TAU * math::frac(x);
        let w = Complex64::new(math::cos(theta), math::sin(theta));
        let mut z = w;
        let mut acc = self.coeffs[self.degree].re;
        for k in 1..=self.degree {
            let c = self.coeffs[self.degree + k];
            acc += 2.0 * (c.re * z.re - c.im * z.im);
            z *= w;
        }
        acc
    }

    /// Cached samples if present, else freshly computed on the default grid.
    pub fn grid_samples(&self) -> Vec<f64> {
        match &self.grid {
            Some(g) => g.clone(),
            None => self.compute_grid(self.grid_size()),
        }
    }

    pub fn cached_grid(&self) -> Option<&[f64]> {
        self.grid.as_deref()
    }

    /// Samples on a uniform grid of the given power-of-two size via inverse FFT.
    pub fn compute_grid(&self, g: usize) -> Vec<f64> {
        assert!(g.is_power_of_two() && g >= 2 * self.degree + 2);
        let mut bins = vec![Complex64::new(0.0, 0.0); g];
        bins[0] = self.coeffs[self.degree];
        for k in 1..=self.degree {
            bins[k] = self.coeffs[self.degree + k];
            bins[g - k] = self.coeffs[self.degree - k];
        }
        fft::inverse(&mut bins);
        bins.iter().map(|c| c.re * g as f64).collect()
    }

    /// Max of |f| over the grid (a certified lower bound for the sup norm).
    pub fn grid_sup(&self) -> f64 {
        self.grid_samples().iter().fold(0.0f64, |m, &v| m.max(math::abs(v)))
    }

    /// Signed minimum over the grid, with its location.
    pub fn grid_min(&self) -> (f64, f64) {
        let samples = self.grid_samples();
        let g = samples.len();
        let mut min = f64::INFINITY;
        let mut at = 0.0;
        for (j, &v) in samples.iter().enumerate() {
            if v < min {
                min = v;
                at = j as f64 / g as f64;
            }
        }
        (min, at)
    }

    /// Coefficient-sum upper bound max_{0<=j<=r} sum_k |2 pi k|^j |c_k|,
    /// which dominates the C^r norm built from true sup norms.
    pub fn cr_norm_upper(&self, r: usize) -> f64 {
        let mut best = 0.0f64;
        for j in 0..=r {
            let mut s = 0.0;
            for k in 0..=self.degree {
                let w = if j == 0 {
                    1.0
                } else {
                    math::powf(math::TAU * k as f64, j as f64)
                };
                let m = math::cnorm(self.coeffs[self.degree + k]);
                s += if k == 0 { w * m } else { 2.0 * w * m };
            }
            best = best.max(s);
        }
        best
    }

    pub fn scale(&self, c: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|&v| v * c).collect();
        Self::raw(self.degree, coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let k = self.degree.max(other.degree);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k + 1];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let mode = i as i64 - k as i64;
            *c = self.coeff(mode) + other.coeff(mode);
        }
        Self::raw(k, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn add_constant(&self, c: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[self.degree] += c;
        Self::raw(self.degree, coeffs)
    }

    /// Exact product of degree K_f + K_g by coefficient convolution.
    pub fn multiply(&self, other: &Self) -> Self {
        let k = self.degree + other.degree;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::raw(k, coeffs)
    }

    /// f(x + m alpha): multiplies mode k by e^(2 pi i k m alpha).
    ///
    /// Up to [`SHIFT_EXACT_DEGREE`] every mode angle comes from the
    /// extended-precision frac(k m alpha), which keeps small-divisor
    /// residuals clean; past that the powers are built incrementally
    /// (accurate to ~K ulp, enough for the long operator iterations).
    pub fn shift(&self, alpha: &Alpha, m: i64) -> Self {
        if m == 0 || self.degree == 0 {
            return self.clone();
        }
        let mut coeffs = self.coeffs.clone();
        if self.degree <= SHIFT_EXACT_DEGREE {
            for k in 1..=self.degree {
                let theta = math::TAU * alpha.frac_times(k as i64 * m);
                let z = Complex64::new(math::cos(theta), math::sin(theta));
                coeffs[self.degree + k] *= z;
                coeffs[self.degree - k] = coeffs[self.degree + k].conj();
            }
        } else {
            let theta = math::TAU * alpha.frac_times(m);
            let w = Complex64::new(math::cos(theta), math::sin(theta));
            let mut z = Complex64::new(1.0, 0.0);
            for k in 1..=self.degree {
                z *= w;
                coeffs[self.degree + k] *= z;
                coeffs[self.degree - k] = coeffs[self.degree + k].conj();
            }
        }
        Self::raw(self.degree, coeffs)
    }

    /// f(-x): reverses the coefficient array.
    pub fn reflect(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self::raw(self.degree, coeffs)
    }

    /// Drop modes beyond `k_target`, reporting the discarded mass.
    pub fn truncate(&self, k_target: usize) -> Truncation {
        if k_target >= self.degree {
            return Truncation { func: self.clone(), tail: 0.0 };
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k_target + 1];
        for k in -(k_target as i64)..=(k_target as i64) {
            coeffs[(k + k_target as i64) as usize] = self.coeff(k);
        }
        let mut tail = 0.0;
        for k in (k_target + 1)..=self.degree {
            tail += 2.0 * math::cnorm(self.coeffs[self.degree + k]);
        }
        Truncation { func: Self::raw(k_target, coeffs), tail }
    }

    /// 1/f via grid sampling; requires f > [`POSITIVITY_MARGIN`] on the grid.
    pub fn reciprocal(&self, k_target: usize) -> Result<Truncation> {
        self.positive_grid_op(k_target, |v| 1.0 / v)
    }

    /// ln f via grid sampling; requires f > [`POSITIVITY_MARGIN`].
    pub fn log(&self, k_target: usize) -> Result<Truncation> {
        self.positive_grid_op(k_target, math::ln)
    }

    /// e^f via grid sampling (no positivity requirement).
    pub fn exp(&self, k_target: usize) -> Truncation {
        let g = grid_size_for(self.degree + k_target);
        let samples: Vec<f64> =
            self.compute_grid(g).into_iter().map(math::exp).collect();
        PeriodicFunction::from_grid_samples(&samples, k_target)
    }

    fn positive_grid_op(
        &self,
        k_target: usize,
        op: impl Fn(f64) -> f64,
    ) -> Result<Truncation> {
        let g = grid_size_for(self.degree + k_target);
        let samples = self.compute_grid(g);
        let mut min = f64::INFINITY;
        let mut at = 0.0;
        for (j, &v) in samples.iter().enumerate() {
            if v < min {
                min = v;
                at = j as f64 / g as f64;
            }
        }
        if min < POSITIVITY_MARGIN {
            return Err(Error::NonPositiveFunction { at, min });
        }
        let mapped: Vec<f64> = samples.into_iter().map(op).collect();
        Ok(PeriodicFunction::from_grid_samples(&mapped, k_target))
    }

    /// Attach the default cached grid (public constructors do this already).
    pub fn with_cached_grid(self) -> Self {
        self.cached()
    }
}

/// Grid size rule: next power of two above max(4K+4, MIN_GRID).
pub fn grid_size_for(degree: usize) -> usize {
    fft::next_pow2((4 * degree + 4).max(MIN_GRID))
}

/// Parseval pairing sum_k f_k g_{-k}; equals mean(f*g) for real f, g.
pub fn parseval_pairing(f: &PeriodicFunction, g: &PeriodicFunction) -> f64 {
    let k = f.degree().min(g.degree()) as i64;
    let mut acc = 0.0;
    for mode in -k..=k {
        let prod = f.coeff(mode) * g.coeff(-mode);
        acc += prod.re;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{Alpha, DEFAULT_PRECISION_BITS};
    use proptest::prelude::*;
    use rand_core::{RngCore, SeedableRng};

    fn random_poly(degree: usize, seed: u64) -> PeriodicFunction {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut unit = move || (rng.next_u64() as f64 / u64::MAX as f64) * 2.0 - 1.0;
        let terms: Vec<(f64, f64)> = (0..degree).map(|_| (unit(), unit())).collect();
        PeriodicFunction::from_cos_sin(unit(), &terms)
    }

    #[test]
    fn evaluate_cosine_basics() {
        let f = PeriodicFunction::cosine(1);
        assert!((f.evaluate(0.0) - 1.0).abs() < 1e-15);
        assert!(f.evaluate(0.25).abs() < 1e-15);
    }

    #[test]
    fn evaluate_matches_term_by_term_oracle() {
        let f = random_poly(8, 42);
        let x = 0.37;
        // independent direct summation
        let mut oracle = f.coeff(0).re;
        for k in 1..=8i64 {
            let c = f.coeff(k);
            let ang = math::TAU * k as f64 * x;
            oracle += 2.0 * (c.re * math::cos(ang) - c.im * math::sin(ang));
        }
        assert!((f.evaluate(x) - oracle).abs() < 1e-12);
    }

    #[test]
    fn cached_grid_matches_evaluate() {
        let f = random_poly(6, 7);
        let grid = f.cached_grid().expect("constructors cache").to_vec();
        let g = grid.len();
        for j in (0..g).step_by(97) {
            let x = j as f64 / g as f64;
            let rel = (f.evaluate(x) - grid[j]).abs() / (1.0 + grid[j].abs());
            assert!(rel < 1e-12, "j={j}: {rel}");
        }
    }

    #[test]
    fn cr_norm_of_cosine_and_constant() {
        let f = PeriodicFunction::cosine(1);
        assert!((f.cr_norm_upper(1) - math::TAU).abs() < 1e-12);
        let c = PeriodicFunction::constant(3.0);
        for r in 0..4 {
            assert!((c.cr_norm_upper(r) - 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cr_norm_two_mode_example_dominates_grid_derivative() {
        // f = cos(2 pi x) + 1/2 cos(4 pi x), r = 2
        let f = PeriodicFunction::from_cos_sin(0.0, &[(1.0, 0.0), (0.5, 0.0)]);
        let upper = f.cr_norm_upper(2);
        let expect = math::TAU * math::TAU + (2.0 * math::TAU) * (2.0 * math::TAU) * 0.5;
        assert!((upper - expect).abs() < 1e-10);

        // finite-difference second-derivative max on a 2^14 grid
        let g = 1 << 14;
        let h = 1.0 / g as f64;
        let mut max2 = 0.0f64;
        let mut max0 = 0.0f64;
        for j in 0..g {
            let x = j as f64 * h;
            let d2 = (f.evaluate(x + h) - 2.0 * f.evaluate(x) + f.evaluate(x - h)) / (h * h);
            max2 = max2.max(d2.abs());
            max0 = max0.max(f.evaluate(x).abs());
        }
        assert!(max2 <= upper + 1e-6);
        assert!(max0 <= upper);
    }

    #[test]
    fn product_of_cosines_is_exact() {
        let f = PeriodicFunction::cosine(1);
        let prod = f.multiply(&f);
        // 1/2 + 1/2 cos(4 pi x)
        assert_eq!(prod.degree(), 2);
        assert_eq!(prod.coeff(0), Complex64::new(0.5, 0.0));
        assert_eq!(prod.coeff(2), Complex64::new(0.25, 0.0));
        assert_eq!(prod.coeff(1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn product_norm_bound_of_lemma() {
        // ||fg||_{C^r} <= 2^r ||f||_{C^r} ||g||_{C^r}
        for seed in [1u64, 2, 3] {
            let f = random_poly(6, seed);
            let g = random_poly(6, 100 + seed);
            let prod = f.multiply(&g);
            for r in 1..=3usize {
                let lhs = prod.cr_norm_upper(r);
                let rhs = math::powf(2.0, r as f64) * f.cr_norm_upper(r) * g.cr_norm_upper(r);
                assert!(lhs <= rhs * (1.0 + 1e-12), "r={r}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn reciprocal_residual_small() {
        let f = PeriodicFunction::from_cos_sin(2.0, &[(1.0, 0.0)]); // 2 + cos
        let rec = f.reciprocal(32).unwrap();
        let g = 1 << 12;
        let mut worst = 0.0f64;
        for j in 0..g {
            let x = j as f64 / g as f64;
            worst = worst.max((rec.func.evaluate(x) * f.evaluate(x) - 1.0).abs());
        }
        assert!(worst < 1e-10, "residual {worst}");
        assert!(rec.tail < 1e-10);
    }

    #[test]
    fn reciprocal_rejects_sign_changing_function() {
        let f = PeriodicFunction::cosine(1);
        match f.reciprocal(16) {
            Err(Error::NonPositiveFunction { min, .. }) => assert!(min < 0.0),
            other => panic!("expected positivity error, got {other:?}"),
        }
    }

    #[test]
    fn exp_log_round_trip() {
        let f = PeriodicFunction::from_cos_sin(1.5, &[(0.4, 0.2), (0.0, 0.0), (0.1, -0.05)]);
        let lg = f.log(DEFAULT_K_TARGET).unwrap();
        let back = lg.func.exp(DEFAULT_K_TARGET);
        let g = 1 << 12;
        let mut worst = 0.0f64;
        for j in 0..g {
            let x = j as f64 / g as f64;
            worst = worst.max((back.func.evaluate(x) - f.evaluate(x)).abs());
        }
        assert!(worst < 1e-10, "sup deviation {worst}");
    }

    #[test]
    fn shift_preserves_mean_and_moduli() {
        let alpha = Alpha::golden_mean(DEFAULT_PRECISION_BITS);
        let f = random_poly(10, 5);
        let sh = f.shift(&alpha, 1);
        assert_eq!(sh.coeff(0), f.coeff(0));
        for k in 1..=10i64 {
            let rel = (sh.coeff(k).norm() - f.coeff(k).norm()).abs()
                / (1.0 + f.coeff(k).norm());
            assert!(rel < 1e-14, "mode {k}");
        }
        // shifted function equals f evaluated at x + alpha
        let a = alpha.to_f64();
        for x in [0.0, 0.3, 0.77] {
            assert!((sh.evaluate(x) - f.evaluate(x + a)).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_round_trip_residual() {
        let f = random_poly(24, 11);
        let t = PeriodicFunction::from_grid_samples(&f.grid_samples(), 24);
        for k in -24i64..=24 {
            let d = (t.func.coeff(k) - f.coeff(k)).norm();
            assert!(d < 1e-12, "mode {k}: {d}");
        }
        assert!(t.tail < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn parseval_matches_product_mean(seed in 0u64..1000) {
            let f = random_poly(5, seed);
            let g = random_poly(7, seed.wrapping_add(999));
            let lhs = f.multiply(&g).mean();
            let rhs = parseval_pairing(&f, &g);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn evaluate_is_real_valued(seed in 0u64..1000, xs in prop::collection::vec(0.0f64..1.0, 4)) {
            // Hermitian storage makes the imaginary part vanish identically;
            // check against the complex-sum formula.
            let f = random_poly(6, seed);
            for x in xs {
                let theta = math::TAU * x;
                let mut acc = Complex64::new(0.0, 0.0);
                for k in -6i64..=6 {
                    let ang = theta * k as f64;
                    acc += f.coeff(k) * Complex64::new(math::cos(ang), math::sin(ang));
                }
                prop_assert!(acc.im.abs() < 1e-12);
                prop_assert!((acc.re - f.evaluate(x)).abs() < 1e-10);
            }
        }
    }
}
