//! Spectral solvers for the three functional equations driving the Poisson
//! machinery: the rotation cohomological equation, the damped equation
//! `lambda k(x) - k(x-alpha) = F(x)`, and the eta equation
//! `lambda^-1 eta(x+alpha) - eta(x) = 1/g(x)`.
//!
//! Small divisors `e^(2 pi i k alpha) - 1` are computed from the
//! extended-precision frac(k alpha) mode by mode; below [`RESONANCE_CUTOFF`]
//! the solver refuses to divide. The damped equations also have independent
//! series constructions used as internal oracles.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::arithmetic::{diophantine_profile, RotationNumber};
use crate::math;
use crate::periodic::{grid_size_for, PeriodicFunction, DEFAULT_K_TARGET};
use crate::{Error, Result};

/// Below this |e^(2 pi i k alpha) - 1| the division would amplify noise past
/// every downstream residual test.
pub const RESONANCE_CUTOFF: f64 = 1e-14;

/// Default tolerance on |psi_hat(0)| for the rotation equation.
pub const ZERO_MEAN_TOL: f64 = 1e-12;

/// Outcome of a spectral solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: PeriodicFunction,
    /// Grid sup of the defining equation's defect.
    pub residual_sup: f64,
    /// Smallest divisor modulus met across the band, with the mode index.
    pub smallest_denominator: f64,
    pub denominator_index: i64,
    /// ||solution||_{C^0} / ||rhs||_{C^(m0)} upper bounds for the rotation
    /// equation, the measured loss-of-derivatives amplification; plain C^0
    /// ratio for the damped equations, which lose no derivatives.
    pub norm_ratio: f64,
}

/// e^(i theta) - 1 via the half angle, stable for tiny theta.
fn unit_minus_one(theta: f64) -> Complex64 {
    let s = math::sin(0.5 * theta);
    let c = math::cos(0.5 * theta);
    Complex64::new(-2.0 * s * s, 2.0 * s * c)
}

/// Solve `phi(x + alpha) - phi(x) = psi(x)` with `phi_hat(0) = 0`.
pub fn solve_rotation(
    psi: &PeriodicFunction,
    alpha: &RotationNumber,
    zero_mean_tol: f64,
) -> Result<SolveReport> {
    let mean = psi.mean();
    if math::abs(mean) > zero_mean_tol {
        return Err(Error::MeanObstruction { mean, tol: zero_mean_tol });
    }
    let k_max = psi.degree();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
    let mut smallest = f64::INFINITY;
    let mut smallest_at = 0i64;
    for k in 1..=k_max {
        let theta = math::TAU * alpha.frac_times(k as i64);
        let d = unit_minus_one(theta);
        let m = math::cnorm(d);
        if m < smallest {
            smallest = m;
            smallest_at = k as i64;
        }
        if m < RESONANCE_CUTOFF {
            return Err(Error::Resonance { mode: k as i64, denominator: m });
        }
        let v = psi.coeff(k as i64) / d;
        coeffs[k_max + k] = v;
        coeffs[k_max - k] = v.conj();
    }
    let solution = PeriodicFunction::from_coefficients(k_max, coeffs)?;
    let defect = solution.shift(alpha.alpha(), 1).sub(&solution).sub(psi);
    let residual_sup = defect.grid_sup();
    let m0 = diophantine_profile(alpha).map(|p| p.m0 as usize).unwrap_or(2);
    let denom_norm = psi.cr_norm_upper(m0);
    let norm_ratio = if denom_norm == 0.0 { 0.0 } else { solution.cr_norm_upper(0) / denom_norm };
    Ok(SolveReport {
        solution,
        residual_sup,
        smallest_denominator: if smallest.is_finite() { smallest } else { 0.0 },
        denominator_index: smallest_at,
        norm_ratio,
    })
}

/// Solve `lambda kappa(x) - kappa(x - alpha) = F(x)` for `lambda > 1`.
pub fn solve_damped(
    rhs: &PeriodicFunction,
    alpha: &RotationNumber,
    lambda: f64,
) -> Result<SolveReport> {
    if lambda <= 1.0 + 1e-9 {
        return Err(Error::NotDamped { lambda });
    }
    let k_max = rhs.degree();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
    let mut smallest = lambda - 1.0;
    let mut smallest_at = 0i64;
    coeffs[k_max] = rhs.coeff(0) / (lambda - 1.0);
    for k in 1..=k_max {
        let theta = math::TAU * alpha.frac_times(k as i64);
        // lambda - e^(-i theta)
        let d = Complex64::new(lambda - math::cos(theta), math::sin(theta));
        let m = math::cnorm(d);
        if m < smallest {
            smallest = m;
            smallest_at = k as i64;
        }
        let v = rhs.coeff(k as i64) / d;
        coeffs[k_max + k] = v;
        coeffs[k_max - k] = v.conj();
    }
    let solution = PeriodicFunction::from_coefficients(k_max, coeffs)?;
    let defect = solution.scale(lambda).sub(&solution.shift(alpha.alpha(), -1)).sub(rhs);
    let residual_sup = defect.grid_sup();

    #[cfg(debug_assertions)]
    if lambda >= 1.1 {
        let series = damped_series(rhs, alpha, lambda);
        let gap = solution.sub(&series).grid_sup();
        debug_assert!(gap < 1e-8, "spectral/series disagreement {gap}");
    }

    let denom_norm = rhs.cr_norm_upper(0);
    let norm_ratio = if denom_norm == 0.0 { 0.0 } else { solution.cr_norm_upper(0) / denom_norm };
    Ok(SolveReport {
        solution,
        residual_sup,
        smallest_denominator: smallest,
        denominator_index: smallest_at,
        norm_ratio,
    })
}

/// Series construction `kappa(x) = sum_{j>=0} lambda^-(j+1) F(x - j alpha)`,
/// truncated once `lambda^-j < 1e-14`. Independent of the spectral route.
pub fn damped_series(
    rhs: &PeriodicFunction,
    alpha: &RotationNumber,
    lambda: f64,
) -> PeriodicFunction {
    let a = alpha.to_f64();
    let g = grid_size_for(rhs.degree());
    let j_max = (14.0 * math::ln(10.0) / math::ln(lambda)) as usize + 1;
    let samples: Vec<f64> = (0..g)
        .map(|i| {
            let x = i as f64 / g as f64;
            let mut weight = 1.0 / lambda;
            let mut acc = 0.0;
            for j in 0..=j_max {
                acc += weight * rhs.evaluate(x - j as f64 * a);
                weight /= lambda;
            }
            acc
        })
        .collect();
    PeriodicFunction::from_grid_samples(&samples, rhs.degree()).func
}

/// Solve `lambda^-1 eta(x + alpha) - eta(x) = 1/g(x)` for positive g and
/// `lambda > 1`. Divisors stay above `1 - 1/lambda`, so no resonance can
/// occur.
pub fn solve_eta(
    g: &PeriodicFunction,
    alpha: &RotationNumber,
    lambda: f64,
) -> Result<SolveReport> {
    if lambda <= 1.0 + 1e-9 {
        return Err(Error::NotDamped { lambda });
    }
    let k_target = DEFAULT_K_TARGET.max(4 * g.degree());
    let recip = g.reciprocal(k_target)?;
    let rhs = &recip.func;
    let k_max = rhs.degree();
    let inv_l = 1.0 / lambda;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
    let mut smallest = 1.0 - inv_l;
    let mut smallest_at = 0i64;
    coeffs[k_max] = rhs.coeff(0) / (inv_l - 1.0);
    for k in 1..=k_max {
        let theta = math::TAU * alpha.frac_times(k as i64);
        // lambda^-1 e^(i theta) - 1
        let d = Complex64::new(inv_l * math::cos(theta) - 1.0, inv_l * math::sin(theta));
        let m = math::cnorm(d);
        if m < smallest {
            smallest = m;
            smallest_at = k as i64;
        }
        let v = rhs.coeff(k as i64) / d;
        coeffs[k_max + k] = v;
        coeffs[k_max - k] = v.conj();
    }
    let solution = PeriodicFunction::from_coefficients(k_max, coeffs)?;

    // residual against the true 1/g, sampled pointwise
    let grid = grid_size_for(k_max + 1);
    let shifted = solution.shift(alpha.alpha(), 1);
    let sol_samples = solution.compute_grid(grid);
    let shift_samples = shifted.compute_grid(grid);
    let g_samples = g.compute_grid(grid);
    let mut residual_sup = 0.0f64;
    for i in 0..grid {
        let defect = inv_l * shift_samples[i] - sol_samples[i] - 1.0 / g_samples[i];
        residual_sup = residual_sup.max(math::abs(defect));
    }

    #[cfg(debug_assertions)]
    if lambda >= 1.1 {
        let series = eta_series(g, alpha, lambda, k_max);
        let gap = solution.sub(&series).grid_sup();
        debug_assert!(gap < 1e-8, "spectral/series disagreement {gap}");
    }

    let denom_norm = rhs.cr_norm_upper(0);
    let norm_ratio = if denom_norm == 0.0 { 0.0 } else { solution.cr_norm_upper(0) / denom_norm };
    Ok(SolveReport {
        solution,
        residual_sup,
        smallest_denominator: smallest,
        denominator_index: smallest_at,
        norm_ratio,
    })
}

/// Series construction `eta(x) = -sum_{j>=0} lambda^-j / g(x + j alpha)`.
pub fn eta_series(
    g: &PeriodicFunction,
    alpha: &RotationNumber,
    lambda: f64,
    k_target: usize,
) -> PeriodicFunction {
    let a = alpha.to_f64();
    let grid = grid_size_for(k_target);
    let j_max = (14.0 * math::ln(10.0) / math::ln(lambda)) as usize + 1;
    let samples: Vec<f64> = (0..grid)
        .map(|i| {
            let x = i as f64 / grid as f64;
            let mut weight = 1.0;
            let mut acc = 0.0;
            for j in 0..=j_max {
                acc -= weight / g.evaluate(x + j as f64 * a);
                weight /= lambda;
            }
            acc
        })
        .collect();
    PeriodicFunction::from_grid_samples(&samples, k_target).func
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{
        continued_fraction, liouville_alpha, Alpha, LiouvilleOptions, DEFAULT_PRECISION_BITS,
    };
    use proptest::prelude::*;

    fn golden() -> RotationNumber {
        continued_fraction(&Alpha::golden_mean(DEFAULT_PRECISION_BITS), 30).unwrap()
    }

    #[test]
    fn single_cosine_matches_closed_form() {
        let alpha = golden();
        let psi = PeriodicFunction::cosine(1);
        let rep = solve_rotation(&psi, &alpha, ZERO_MEAN_TOL).unwrap();
        assert!(rep.residual_sup < 1e-12, "residual {}", rep.residual_sup);

        // phi(x) = [cos(2 pi (x - alpha)) - cos(2 pi x)] / (2 - 2 cos(2 pi alpha))
        let a = alpha.to_f64();
        let denom = 2.0 - 2.0 * math::cos(math::TAU * a);
        for x in [0.0, 0.21, 0.5, 0.83] {
            let direct =
                (math::cos(math::TAU * (x - a)) - math::cos(math::TAU * x)) / denom;
            assert!(
                (rep.solution.evaluate(x) - direct).abs() < 1e-12,
                "x = {x}"
            );
        }
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let alpha = golden();
        let psi = PeriodicFunction::zero();
        let rep = solve_rotation(&psi, &alpha, ZERO_MEAN_TOL).unwrap();
        assert_eq!(rep.residual_sup, 0.0);
        assert_eq!(rep.solution.cr_norm_upper(0), 0.0);
    }

    #[test]
    fn mean_obstruction_detected() {
        let alpha = golden();
        let psi = PeriodicFunction::from_cos_sin(0.5, &[(1.0, 0.0)]);
        match solve_rotation(&psi, &alpha, ZERO_MEAN_TOL) {
            Err(Error::MeanObstruction { mean, .. }) => assert!((mean - 0.5).abs() < 1e-15),
            other => panic!("expected mean obstruction, got {other:?}"),
        }
    }

    #[test]
    fn resonant_mode_refused() {
        // alpha = 1/3 exactly: mode 3 has zero divisor
        let alpha =
            continued_fraction(&Alpha::from_rational(1u32, 3u32).unwrap(), 1).unwrap();
        let psi = PeriodicFunction::cosine(3);
        match solve_rotation(&psi, &alpha, ZERO_MEAN_TOL) {
            Err(Error::Resonance { mode: 3, denominator }) => {
                assert!(denominator < RESONANCE_CUTOFF)
            }
            other => panic!("expected resonance, got {other:?}"),
        }
    }

    #[test]
    fn liouville_mode_exhibits_loss_of_derivatives() {
        let sched = liouville_alpha(&[2.0, 3.0], 2, &LiouvilleOptions::default()).unwrap();
        let alpha = sched.rotation.clone();
        let q2 = &sched.stages[1];
        let q = u64::try_from(&q2.q).unwrap() as usize;
        let psi = PeriodicFunction::cosine(q);
        let rep = solve_rotation(&psi, &alpha, ZERO_MEAN_TOL).unwrap();

        // the divisor at mode q is pinned by |q alpha - p|
        let err = math::exp(q2.ln_error);
        assert!(rep.smallest_denominator <= math::TAU * err + 1e-15);
        assert_eq!(rep.denominator_index, q as i64);

        // sup-norm amplification for a single mode is exactly 1/divisor
        let amplification = rep.solution.cr_norm_upper(0) / psi.cr_norm_upper(0);
        let expect = 1.0 / rep.smallest_denominator;
        assert!((amplification / expect - 1.0).abs() < 1e-9);
        assert!(amplification > 1e5, "no explosion: {amplification}");
        assert!(rep.residual_sup < 1e-9);
    }

    #[test]
    fn damped_constant_balance() {
        let alpha = golden();
        let one = PeriodicFunction::constant(1.0);
        let rep = solve_damped(&one, &alpha, 2.0).unwrap();
        assert!((rep.solution.mean() - 1.0).abs() < 1e-15);
        assert!(rep.residual_sup < 1e-14);
    }

    #[test]
    fn damped_spectral_agrees_with_series() {
        let alpha = golden();
        let rhs = PeriodicFunction::from_cos_sin(0.0, &[(1.0, 0.0)]);
        let rep = solve_damped(&rhs, &alpha, 2.0).unwrap();
        let series = damped_series(&rhs, &alpha, 2.0);
        let gap = rep.solution.sub(&series).grid_sup();
        assert!(gap < 1e-10, "gap {gap}");
        assert!(rep.residual_sup < 1e-12);
    }

    #[test]
    fn damped_zero_mean_decouples() {
        let alpha = golden();
        let rhs = PeriodicFunction::from_cos_sin(0.0, &[(0.3, -0.7), (0.1, 0.2)]);
        let rep = solve_damped(&rhs, &alpha, 2.0).unwrap();
        assert_eq!(rep.solution.mean(), 0.0);
    }

    #[test]
    fn damped_rejects_undamped_lambda() {
        let alpha = golden();
        let rhs = PeriodicFunction::constant(1.0);
        assert!(matches!(
            solve_damped(&rhs, &alpha, 1.0),
            Err(Error::NotDamped { .. })
        ));
    }

    #[test]
    fn eta_constant_balance() {
        let alpha = golden();
        let g = PeriodicFunction::constant(1.0);
        let rep = solve_eta(&g, &alpha, 2.0).unwrap();
        assert!((rep.solution.mean() + 2.0).abs() < 1e-12);
        assert!(rep.residual_sup < 1e-12);
    }

    #[test]
    fn eta_spectral_agrees_with_series_and_no_resonance() {
        let alpha = golden();
        let g = PeriodicFunction::from_cos_sin(2.0, &[(1.0, 0.0)]);
        let rep = solve_eta(&g, &alpha, 2.0).unwrap();
        let series = eta_series(&g, &alpha, 2.0, rep.solution.degree());
        let gap = rep.solution.sub(&series).grid_sup();
        assert!(gap < 1e-10, "gap {gap}");
        assert!(rep.residual_sup < 1e-10, "residual {}", rep.residual_sup);
        // reverse triangle inequality floor
        assert!(rep.smallest_denominator >= 0.5 - 1e-12);
    }

    #[test]
    fn dual_construction_agreement_for_moderate_damping() {
        let alpha = golden();
        let rhs = PeriodicFunction::from_cos_sin(0.2, &[(0.5, 0.1), (0.0, 0.0), (-0.3, 0.4)]);
        for lambda in [1.1, 1.5, 3.0] {
            let rep = solve_damped(&rhs, &alpha, lambda).unwrap();
            let series = damped_series(&rhs, &alpha, lambda);
            let gap = rep.solution.sub(&series).grid_sup();
            assert!(gap < 1e-9, "lambda {lambda}: gap {gap}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn rotation_solver_is_linear(seed in 0u64..500, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            use rand_core::{RngCore, SeedableRng};
            let alpha = golden();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut unit = move || (rng.next_u64() as f64 / u64::MAX as f64) * 2.0 - 1.0;
            let t1: alloc::vec::Vec<(f64, f64)> = (0..6).map(|_| (unit(), unit())).collect();
            let t2: alloc::vec::Vec<(f64, f64)> = (0..6).map(|_| (unit(), unit())).collect();
            let p1 = PeriodicFunction::from_cos_sin(0.0, &t1);
            let p2 = PeriodicFunction::from_cos_sin(0.0, &t2);
            let combo = p1.scale(a).add(&p2.scale(b));

            let s1 = solve_rotation(&p1, &alpha, ZERO_MEAN_TOL).unwrap().solution;
            let s2 = solve_rotation(&p2, &alpha, ZERO_MEAN_TOL).unwrap().solution;
            let sc = solve_rotation(&combo, &alpha, 1e-9).unwrap().solution;
            let expect = s1.scale(a).add(&s2.scale(b));
            for k in -6i64..=6 {
                let d = (sc.coeff(k) - expect.coeff(k)).norm();
                let scale = 1.0 + expect.coeff(k).norm();
                prop_assert!(d / scale < 1e-13, "mode {k}: {d}");
            }
        }
    }
}
