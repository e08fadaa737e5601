//! The Poisson equation `T phi - phi = psi` for centered observables, solved
//! through the cohomological chain: symmetric environments via
//! `f(x+a) - f(x) = g psi / q` and `phi(x) - phi(x-a) = eta(x)`, asymmetric
//! ones via the damped kappa equation and `phi(x+a) - phi(x) = kappa/g`.
//! Also the martingale-increment variance feeding the CLT experiments.

use alloc::vec::Vec;

use crate::arithmetic::diophantine_profile;
use crate::cohomology::{solve_damped, solve_rotation};
use crate::environment::{
    density_pairing, invariant_density, Environment, InvariantDensity, Symmetry,
};
use crate::math;
use crate::periodic::{grid_size_for, PeriodicFunction};
use crate::{Error, Result};

/// Centering requirement |mean(rho psi)| for a solvable right side.
pub const CENTERING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonBranch {
    Symmetric,
    Asymmetric,
}

/// The full chain witnessing a Poisson solution.
#[derive(Debug, Clone)]
pub struct PoissonCertificate {
    pub phi: PeriodicFunction,
    /// The centered input.
    pub psi: PeriodicFunction,
    pub branch: PoissonBranch,
    pub g: PeriodicFunction,
    /// Symmetric-branch intermediate (chosen with zero mean).
    pub eta: Option<PeriodicFunction>,
    /// Asymmetric-branch intermediate.
    pub kappa: Option<PeriodicFunction>,
    /// sup_x |T phi - phi - psi| over the grid.
    pub residual_sup: f64,
    /// ||phi||_{C^0} bound over ||psi||_{C^(2 m0)} (symmetric) or
    /// ||psi||_{C^(m0)} (asymmetric) bound; the empirical face of the
    /// constant A.
    pub norm_ratio: f64,
    /// Solved through the reflected environment (lambda < 1 reduction).
    pub mirrored: bool,
}

/// psi_raw minus its rho-average.
pub fn center(rho: &PeriodicFunction, psi_raw: &PeriodicFunction) -> PeriodicFunction {
    psi_raw.add_constant(-density_pairing(rho, psi_raw))
}

/// Pointwise ratio num/den transformed back to degree `k_target`.
fn grid_ratio(
    num: &PeriodicFunction,
    den: &PeriodicFunction,
    k_target: usize,
) -> PeriodicFunction {
    let grid = grid_size_for(k_target + num.degree().max(den.degree()));
    let ns = num.compute_grid(grid);
    let ds = den.compute_grid(grid);
    let samples: Vec<f64> = (0..grid).map(|i| ns[i] / ds[i]).collect();
    PeriodicFunction::from_grid_samples(&samples, k_target).func
}

/// Solve the Poisson equation for a psi centered against the invariant
/// density, producing the certificate with its residual.
pub fn solve_poisson(
    env: &Environment,
    density: &InvariantDensity,
    psi: &PeriodicFunction,
    tol: f64,
) -> Result<PoissonCertificate> {
    let mean = density_pairing(&density.rho, psi);
    if math::abs(mean) > CENTERING_TOL {
        return Err(Error::CenteringViolation { mean, tol: CENTERING_TOL });
    }
    match env.symmetry() {
        Symmetry::Symmetric => symmetric_poisson(env, density, psi, tol),
        Symmetry::Asymmetric if env.lambda() > 1.0 => {
            asymmetric_poisson(env, density, psi, tol)
        }
        Symmetry::Asymmetric => {
            // mirror reduction: reflection intertwines the two operators
            let mirror = env.mirrored()?;
            let mirror_density = invariant_density(&mirror, tol)?;
            let psi_m = psi.reflect();
            let cert = asymmetric_poisson(&mirror, &mirror_density, &psi_m, tol)?;
            let phi = cert.phi.reflect();
            let residual_sup = poisson_residual(env, &phi, psi);
            if residual_sup > tol {
                return Err(Error::ResidualAboveTolerance { residual: residual_sup, tol });
            }
            Ok(PoissonCertificate {
                phi,
                psi: psi.clone(),
                residual_sup,
                mirrored: true,
                ..cert
            })
        }
    }
}

fn symmetric_poisson(
    env: &Environment,
    density: &InvariantDensity,
    psi: &PeriodicFunction,
    tol: f64,
) -> Result<PoissonCertificate> {
    let g = &density.g;
    let k_target = env.k_target().max(psi.degree());

    // f(x + a) - f(x) = g psi / q; the mean vanishes because rho ∝ g/q
    let rhs = grid_ratio(&g.multiply(psi), env.q(), k_target);
    let f = solve_rotation(&rhs, env.alpha(), 1e-9)?.solution;

    // eta = f/g + c/g, with c chosen to kill the mean
    let eta0 = grid_ratio(&f, g, k_target);
    let inv_g = g.reciprocal(k_target)?.func;
    let c = -eta0.mean() / inv_g.mean();
    let eta = eta0.add(&inv_g.scale(c));

    // phi(x) - phi(x - a) = eta(x), via the forward equation at x + a
    let eta_shift = eta.shift(env.alpha().alpha(), 1);
    let phi = solve_rotation(&eta_shift, env.alpha(), 1e-9)?.solution;

    let residual_sup = poisson_residual(env, &phi, psi);
    if residual_sup > tol {
        return Err(Error::ResidualAboveTolerance { residual: residual_sup, tol });
    }
    let m0 = diophantine_profile(env.alpha()).map(|p| p.m0 as usize).unwrap_or(2);
    let denom = psi.cr_norm_upper(2 * m0);
    Ok(PoissonCertificate {
        phi: phi.clone(),
        psi: psi.clone(),
        branch: PoissonBranch::Symmetric,
        g: g.clone(),
        eta: Some(eta),
        kappa: None,
        residual_sup,
        norm_ratio: if denom == 0.0 { 0.0 } else { phi.cr_norm_upper(0) / denom },
        mirrored: false,
    })
}

fn asymmetric_poisson(
    env: &Environment,
    density: &InvariantDensity,
    psi: &PeriodicFunction,
    tol: f64,
) -> Result<PoissonCertificate> {
    let lambda = env.lambda();
    let g = &density.g;
    let k_target = env.k_target().max(psi.degree());

    // kappa solves lambda kappa(x) - kappa(x - a) = lambda g psi / p
    let rhs = grid_ratio(&g.multiply(psi), env.p(), k_target).scale(lambda);
    let kappa = solve_damped(&rhs, env.alpha(), lambda)?.solution;

    // int kappa/g = 0 is forced by the centering of psi
    let ratio = grid_ratio(&kappa, g, k_target);
    let ratio_mean = ratio.mean();
    if math::abs(ratio_mean) > 1e-9 {
        return Err(Error::CenteringViolation { mean: ratio_mean, tol: 1e-9 });
    }
    let phi = solve_rotation(&ratio, env.alpha(), 1e-9)?.solution;

    let residual_sup = poisson_residual(env, &phi, psi);
    if residual_sup > tol {
        return Err(Error::ResidualAboveTolerance { residual: residual_sup, tol });
    }
    let m0 = diophantine_profile(env.alpha()).map(|p| p.m0 as usize).unwrap_or(2);
    let denom = psi.cr_norm_upper(m0);
    Ok(PoissonCertificate {
        phi: phi.clone(),
        psi: psi.clone(),
        branch: PoissonBranch::Asymmetric,
        g: g.clone(),
        eta: None,
        kappa: Some(kappa),
        residual_sup,
        norm_ratio: if denom == 0.0 { 0.0 } else { phi.cr_norm_upper(0) / denom },
        mirrored: false,
    })
}

/// sup_x |T phi(x) - phi(x) - psi(x)| over the grid.
pub fn poisson_residual(
    env: &Environment,
    phi: &PeriodicFunction,
    psi: &PeriodicFunction,
) -> f64 {
    env.apply_t(phi).sub(phi).sub(psi).grid_sup()
}

/// Martingale-increment variance
/// `sigma^2 = int rho [p (T phi - phi(.+a))^2 + q (T phi - phi(.-a))^2] dx`.
pub fn clt_variance(
    env: &Environment,
    density: &InvariantDensity,
    phi: &PeriodicFunction,
) -> f64 {
    let a = env.alpha().alpha();
    let grid = grid_size_for(env.k_target() + phi.degree());
    let fwd = phi.shift(a, 1).compute_grid(grid);
    let bwd = phi.shift(a, -1).compute_grid(grid);
    let ps = env.p().compute_grid(grid);
    let rs = density.rho.compute_grid(grid);
    let mut acc = 0.0;
    for i in 0..grid {
        let p = ps[i];
        let q = 1.0 - p;
        let tphi = p * fwd[i] + q * bwd[i];
        let da = tphi - fwd[i];
        let db = tphi - bwd[i];
        acc += rs[i] * (p * da * da + q * db * db);
    }
    (acc / grid as f64).max(0.0)
}

/// Chain of certificates: level 1 solves `T phi_1 - phi_1 = psi`; level j
/// solves `T phi_j - phi_j = center(phi_(j-1))`. Higher levels feed the
/// even-step operator experiments (T^2 is realized by applying T twice).
pub fn solve_poisson_iterated(
    env: &Environment,
    density: &InvariantDensity,
    psi: &PeriodicFunction,
    depth: usize,
    tol: f64,
) -> Result<Vec<PoissonCertificate>> {
    let mut certs: Vec<PoissonCertificate> = Vec::with_capacity(depth);
    let mut rhs = psi.clone();
    for _ in 0..depth {
        let cert = solve_poisson(env, density, &rhs, tol)?;
        rhs = center(&density.rho, &cert.phi);
        certs.push(cert);
    }
    Ok(certs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{continued_fraction, Alpha, DEFAULT_PRECISION_BITS, RotationNumber};
    use num_complex::Complex64;

    fn golden() -> RotationNumber {
        continued_fraction(&Alpha::golden_mean(DEFAULT_PRECISION_BITS), 30).unwrap()
    }

    fn half_env() -> (Environment, InvariantDensity) {
        let env = Environment::classify(golden(), PeriodicFunction::constant(0.5)).unwrap();
        let d = invariant_density(&env, 1e-9).unwrap();
        (env, d)
    }

    #[test]
    fn centering_examples() {
        let rho = PeriodicFunction::constant(1.0);
        let c = center(&rho, &PeriodicFunction::constant(5.0));
        assert!(c.grid_sup() < 1e-15);

        let psi = PeriodicFunction::cosine(1);
        let unchanged = center(&rho, &psi);
        assert!(unchanged.sub(&psi).grid_sup() < 1e-15);

        let rho2 = PeriodicFunction::from_cos_sin(1.0, &[(0.5, 0.0)]);
        let shifted = center(&rho2, &psi);
        assert!((shifted.mean() + 0.25).abs() < 1e-14);
        assert!(shifted.sub(&psi.add_constant(-0.25)).grid_sup() < 1e-14);
    }

    #[test]
    fn constant_half_matches_mode_division() {
        let (env, d) = half_env();
        let psi = PeriodicFunction::cosine(1);
        let cert = solve_poisson(&env, &d, &psi, 1e-9).unwrap();
        assert!(cert.residual_sup < 1e-12, "residual {}", cert.residual_sup);

        let c = math::cos(math::TAU * env.alpha().to_f64()) - 1.0;
        let expect = psi.scale(1.0 / c);
        assert!(cert.phi.sub(&expect).grid_sup() < 1e-12);
        assert_eq!(cert.branch, PoissonBranch::Symmetric);
    }

    #[test]
    fn zero_psi_gives_zero_phi() {
        let (env, d) = half_env();
        let cert = solve_poisson(&env, &d, &PeriodicFunction::zero(), 1e-9).unwrap();
        assert!(cert.phi.grid_sup() < 1e-15);
        assert_eq!(cert.residual_sup, 0.0);
    }

    #[test]
    fn uncentered_input_rejected() {
        let (env, d) = half_env();
        let psi = PeriodicFunction::from_cos_sin(0.3, &[(1.0, 0.0)]);
        assert!(matches!(
            solve_poisson(&env, &d, &psi, 1e-9),
            Err(Error::CenteringViolation { .. })
        ));
    }

    #[test]
    fn asymmetric_constant_matches_mode_oracle() {
        let env =
            Environment::classify(golden(), PeriodicFunction::constant(2.0 / 3.0)).unwrap();
        let d = invariant_density(&env, 1e-9).unwrap();
        let psi = PeriodicFunction::cosine(1);
        let cert = solve_poisson(&env, &d, &psi, 1e-9).unwrap();
        assert_eq!(cert.branch, PoissonBranch::Asymmetric);
        assert!(cert.residual_sup < 1e-12, "residual {}", cert.residual_sup);

        // (2/3 e^(i theta) + 1/3 e^(-i theta) - 1) phi_hat = psi_hat
        let theta = math::TAU * env.alpha().to_f64();
        let e = Complex64::new(math::cos(theta), math::sin(theta));
        let denom = e * (2.0 / 3.0) + e.conj() * (1.0 / 3.0) - 1.0;
        let expect = Complex64::new(0.5, 0.0) / denom;
        let got = cert.phi.coeff(1);
        assert!((got - expect).norm() < 1e-12, "{got} vs {expect}");
        assert!(cert.kappa.is_some());
    }

    #[test]
    fn mirror_branch_solves_lambda_below_one() {
        let env =
            Environment::classify(golden(), PeriodicFunction::constant(1.0 / 3.0)).unwrap();
        let d = invariant_density(&env, 1e-9).unwrap();
        let psi = PeriodicFunction::cosine(1);
        let cert = solve_poisson(&env, &d, &psi, 1e-9).unwrap();
        assert!(cert.mirrored);
        assert!(cert.residual_sup < 1e-12);

        // direct mode oracle for p = 1/3
        let theta = math::TAU * env.alpha().to_f64();
        let e = Complex64::new(math::cos(theta), math::sin(theta));
        let denom = e * (1.0 / 3.0) + e.conj() * (2.0 / 3.0) - 1.0;
        let expect = Complex64::new(0.5, 0.0) / denom;
        assert!((cert.phi.coeff(1) - expect).norm() < 1e-12);
    }

    #[test]
    fn smooth_environments_certify() {
        let log_ratios = [
            PeriodicFunction::cosine(1),
            PeriodicFunction::from_cos_sin(0.5, &[(1.0, 0.0)]),
        ];
        for lr in &log_ratios {
            let env = Environment::logistic(golden(), lr).unwrap();
            let d = invariant_density(&env, 1e-9).unwrap();
            let psi_raw = PeriodicFunction::from_cos_sin(0.0, &[(1.0, 0.0), (0.0, 0.0), (0.5, 0.0)]);
            let psi = center(&d.rho, &psi_raw);
            let cert = solve_poisson(&env, &d, &psi, 1e-9).unwrap();
            assert!(cert.residual_sup < 1e-9, "residual {}", cert.residual_sup);
            assert!(cert.norm_ratio.is_finite());
        }
    }

    #[test]
    fn telescoping_identity() {
        let env = Environment::logistic(golden(), &PeriodicFunction::cosine(1)).unwrap();
        let d = invariant_density(&env, 1e-9).unwrap();
        let psi = center(&d.rho, &PeriodicFunction::cosine(1));
        let cert = solve_poisson(&env, &d, &psi, 1e-9).unwrap();

        let n = 32;
        let mut t_phi = cert.phi.clone();
        let mut sum_t_psi = PeriodicFunction::zero();
        let mut t_psi = psi.clone();
        for _ in 0..n {
            sum_t_psi = sum_t_psi.add(&t_psi);
            t_psi = env.apply_t(&t_psi);
            t_phi = env.apply_t(&t_phi);
        }
        // T^n phi - phi = sum_{j<n} T^j psi
        let gap = t_phi.sub(&cert.phi).sub(&sum_t_psi).grid_sup();
        assert!(gap < n as f64 * 1e-9, "telescoping gap {gap}");
    }

    #[test]
    fn variance_vanishes_for_trivial_inputs() {
        let (env, d) = half_env();
        assert_eq!(clt_variance(&env, &d, &PeriodicFunction::zero()), 0.0);
        let c = PeriodicFunction::constant(3.0);
        assert!(clt_variance(&env, &d, &c) < 1e-25);
    }

    #[test]
    fn variance_closed_form_for_constant_half() {
        let (env, d) = half_env();
        let psi = PeriodicFunction::cosine(1);
        let cert = solve_poisson(&env, &d, &psi, 1e-9).unwrap();
        let sigma2 = clt_variance(&env, &d, &cert.phi);
        let theta = math::TAU * env.alpha().to_f64();
        let c = 1.0 - math::cos(theta);
        let expect = math::sin(theta) * math::sin(theta) / (2.0 * c * c);
        assert!((sigma2 - expect).abs() < 1e-12, "{sigma2} vs {expect}");
    }

    #[test]
    fn iterated_certificates_chain() {
        let env = Environment::logistic(golden(), &PeriodicFunction::cosine(1)).unwrap();
        let d = invariant_density(&env, 1e-9).unwrap();
        let psi = center(&d.rho, &PeriodicFunction::cosine(1));
        let certs = solve_poisson_iterated(&env, &d, &psi, 3, 1e-9).unwrap();
        assert_eq!(certs.len(), 3);
        for (j, c) in certs.iter().enumerate() {
            assert!(c.residual_sup < 1e-9, "level {j}: {}", c.residual_sup);
        }
        // level 2 solves against the centered level-1 solution
        let psi2 = center(&d.rho, &certs[0].phi);
        let gap = certs[1].psi.sub(&psi2).grid_sup();
        assert!(gap < 1e-14);
    }

    #[test]
    fn solver_is_linear_in_psi() {
        let (env, d) = half_env();
        let p1 = PeriodicFunction::from_cos_sin(0.0, &[(1.0, -0.5), (0.25, 0.0)]);
        let p2 = PeriodicFunction::from_cos_sin(0.0, &[(0.0, 0.3), (0.5, 0.7), (0.2, 0.0)]);
        let (a, b) = (1.75, -0.4);
        let s1 = solve_poisson(&env, &d, &p1, 1e-9).unwrap().phi;
        let s2 = solve_poisson(&env, &d, &p2, 1e-9).unwrap().phi;
        let combo = solve_poisson(&env, &d, &p1.scale(a).add(&p2.scale(b)), 1e-9).unwrap().phi;
        let gap = combo.sub(&s1.scale(a).add(&s2.scale(b))).grid_sup();
        assert!(gap < 1e-11, "linearity gap {gap}");
    }
}
