//! The circle environment (alpha, p): symmetry classification through
//! `lambda = exp int log(p/q)`, the one-step Markov operator
//! `T f(x) = p(x) f(x+alpha) + q(x) f(x-alpha)`, and the invariant density
//! built from the cohomological machinery (g/q in the symmetric case,
//! eta g / p in the asymmetric one, mirrored when lambda < 1).

use alloc::vec::Vec;

use crate::arithmetic::RotationNumber;
use crate::cohomology::{solve_eta, solve_rotation};
use crate::math;
use crate::periodic::{grid_size_for, PeriodicFunction, DEFAULT_K_TARGET};
use crate::{Error, Result};

/// |log lambda| below this is treated as symmetric; beyond it the damped
/// k = 0 divisor `lambda - 1` is safely away from resonance.
pub const SYMMETRY_THRESHOLD: f64 = 1e-10;

/// Jump probabilities may not come within this margin of {0, 1}.
pub const DEGENERACY_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric,
    Asymmetric,
}

/// A quasi-periodic jump environment on the circle.
#[derive(Debug, Clone)]
pub struct Environment {
    alpha: RotationNumber,
    p: PeriodicFunction,
    q: PeriodicFunction,
    log_ratio: PeriodicFunction,
    log_ratio_tail: f64,
    epsilon_margin: f64,
    symmetry: Symmetry,
    lambda: f64,
    k_target: usize,
}

impl Environment {
    /// Classify (alpha, p): compute lambda, the symmetry flag, and the
    /// certified margin min(p, 1-p) over the grid.
    pub fn classify(alpha: RotationNumber, p: PeriodicFunction) -> Result<Self> {
        let k_target = DEFAULT_K_TARGET.max(8 * p.degree());
        Self::classify_with(alpha, p, k_target)
    }

    pub fn classify_with(
        alpha: RotationNumber,
        p: PeriodicFunction,
        k_target: usize,
    ) -> Result<Self> {
        let grid = grid_size_for(k_target.max(p.degree()));
        let samples = p.compute_grid(grid);
        let mut margin = f64::INFINITY;
        for &v in &samples {
            margin = margin.min(v.min(1.0 - v));
        }
        if margin < DEGENERACY_MARGIN {
            return Err(Error::DegenerateEnvironment { margin });
        }
        let log_samples: Vec<f64> =
            samples.iter().map(|&v| math::ln(v) - math::ln(1.0 - v)).collect();
        let mean = log_samples.iter().sum::<f64>() / grid as f64;
        let tr = PeriodicFunction::from_grid_samples(&log_samples, k_target);
        let lambda = math::exp(mean);
        let symmetry = if math::abs(mean) <= SYMMETRY_THRESHOLD {
            Symmetry::Symmetric
        } else {
            Symmetry::Asymmetric
        };
        // q = 1 - p with exactly mirrored nonzero modes
        let q = p.scale(-1.0).add_constant(1.0);
        Ok(Environment {
            alpha,
            p,
            q,
            log_ratio: tr.func,
            log_ratio_tail: tr.tail,
            epsilon_margin: margin,
            symmetry,
            lambda,
            k_target,
        })
    }

    /// Environment with p = logistic(f), so that log(p/q) = f exactly.
    pub fn logistic(alpha: RotationNumber, f: &PeriodicFunction) -> Result<Self> {
        let k_target = DEFAULT_K_TARGET.max(8 * f.degree());
        let p = PeriodicFunction::sample(
            |x| 1.0 / (1.0 + math::exp(-f.evaluate(x))),
            k_target,
        );
        Self::classify_with(alpha, p.func, k_target)
    }

    pub fn alpha(&self) -> &RotationNumber {
        &self.alpha
    }
    pub fn p(&self) -> &PeriodicFunction {
        &self.p
    }
    pub fn q(&self) -> &PeriodicFunction {
        &self.q
    }
    /// log(p/q) truncated at the working degree.
    pub fn log_ratio(&self) -> &PeriodicFunction {
        &self.log_ratio
    }
    pub fn log_ratio_tail(&self) -> f64 {
        self.log_ratio_tail
    }
    pub fn epsilon_margin(&self) -> f64 {
        self.epsilon_margin
    }
    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn k_target(&self) -> usize {
        self.k_target
    }

    /// One step of the Markov operator, exact in coefficient space.
    pub fn apply_t(&self, f: &PeriodicFunction) -> PeriodicFunction {
        let fwd = f.shift(self.alpha.alpha(), 1);
        let bwd = f.shift(self.alpha.alpha(), -1);
        self.p.multiply(&fwd).add(&self.q.multiply(&bwd))
    }

    /// The mirrored environment (x -> -x), which swaps lambda for 1/lambda.
    pub fn mirrored(&self) -> Result<Environment> {
        Environment::classify_with(self.alpha.clone(), self.q.reflect(), self.k_target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityConstruction {
    SymmetricGOverQ,
    AsymmetricEtaGOverP,
}

/// The invariant density with the chain of objects that witnessed it.
#[derive(Debug, Clone)]
pub struct InvariantDensity {
    pub rho: PeriodicFunction,
    pub construction: DensityConstruction,
    /// sup_x |p(x-a) rho(x-a) + q(x+a) rho(x+a) - rho(x)| over the grid.
    pub stationarity_residual: f64,
    pub g: PeriodicFunction,
    pub eta: Option<PeriodicFunction>,
    /// Set when the lambda < 1 reduction solved the reflected environment.
    pub mirrored: bool,
}

/// Construct the invariant density of the environment.
///
/// Symmetric branch: g = exp(solve_rotation(log p/q)), rho ∝ g/q.
/// Asymmetric branch with lambda > 1: g from
/// `log g(x) - log g(x-alpha) = log(p/q)(x) - log lambda`, eta from the
/// damped eta equation, rho ∝ eta g / p with the sign normalized positive.
/// lambda < 1 solves the mirrored environment and reflects back.
pub fn invariant_density(env: &Environment, tol: f64) -> Result<InvariantDensity> {
    match env.symmetry() {
        Symmetry::Symmetric => symmetric_density(env, tol),
        Symmetry::Asymmetric if env.lambda() > 1.0 => asymmetric_density(env, tol),
        Symmetry::Asymmetric => {
            let mirror = env.mirrored()?;
            let md = asymmetric_density(&mirror, tol)?;
            let rho = md.rho.reflect();
            let residual = stationarity_residual(env, &rho);
            if residual >= tol {
                return Err(Error::ConstructionFailed { residual, tol });
            }
            Ok(InvariantDensity {
                rho,
                construction: md.construction,
                stationarity_residual: residual,
                g: md.g,
                eta: md.eta,
                mirrored: true,
            })
        }
    }
}

fn symmetric_density(env: &Environment, tol: f64) -> Result<InvariantDensity> {
    // kill the (sub-threshold) mean before solving
    let psi = env.log_ratio().add_constant(-env.log_ratio().mean());
    let u = solve_rotation(&psi, env.alpha(), 2.0 * SYMMETRY_THRESHOLD)?;
    let g = u.solution.exp(env.k_target()).func;
    let rho = normalized_ratio(&g, env.q(), env.k_target())?;
    finish_density(
        env,
        rho,
        DensityConstruction::SymmetricGOverQ,
        g,
        None,
        tol,
    )
}

fn asymmetric_density(env: &Environment, tol: f64) -> Result<InvariantDensity> {
    let lambda = env.lambda();
    let log_lambda = math::ln(lambda);
    // v(x) - v(x - alpha) = log(p/q)(x) - log lambda, solved through the
    // forward equation for the shifted right side
    let psi2 = env.log_ratio().add_constant(-log_lambda);
    let shifted = psi2.shift(env.alpha().alpha(), 1);
    let v = solve_rotation(&shifted, env.alpha(), 1e-9)?;
    let g = v.solution.exp(env.k_target()).func;
    let eta = solve_eta(&g, env.alpha(), lambda)?.solution;

    // rho ∝ eta g / p, sign flipped positive
    let grid = grid_size_for(env.k_target() + g.degree().max(eta.degree()));
    let gs = g.compute_grid(grid);
    let es = eta.compute_grid(grid);
    let ps = env.p().compute_grid(grid);
    let samples: Vec<f64> = (0..grid).map(|i| es[i] * gs[i] / ps[i]).collect();
    let raw = PeriodicFunction::from_grid_samples(&samples, env.k_target()).func;
    let mean = raw.mean();
    if math::abs(mean) < 1e-14 {
        return Err(Error::ConstructionFailed { residual: f64::INFINITY, tol });
    }
    let rho = raw.scale(1.0 / mean);
    finish_density(
        env,
        rho,
        DensityConstruction::AsymmetricEtaGOverP,
        g,
        Some(eta),
        tol,
    )
}

fn normalized_ratio(
    num: &PeriodicFunction,
    den: &PeriodicFunction,
    k_target: usize,
) -> Result<PeriodicFunction> {
    let grid = grid_size_for(k_target + num.degree());
    let ns = num.compute_grid(grid);
    let ds = den.compute_grid(grid);
    let samples: Vec<f64> = (0..grid).map(|i| ns[i] / ds[i]).collect();
    let raw = PeriodicFunction::from_grid_samples(&samples, k_target).func;
    let mean = raw.mean();
    if mean <= 0.0 {
        return Err(Error::NonPositiveFunction { at: 0.0, min: mean });
    }
    Ok(raw.scale(1.0 / mean))
}

fn finish_density(
    env: &Environment,
    rho: PeriodicFunction,
    construction: DensityConstruction,
    g: PeriodicFunction,
    eta: Option<PeriodicFunction>,
    tol: f64,
) -> Result<InvariantDensity> {
    let (min, at) = rho.grid_min();
    if min <= 0.0 {
        return Err(Error::NonPositiveFunction { at, min });
    }
    let residual = stationarity_residual(env, &rho);
    if residual >= tol {
        return Err(Error::ConstructionFailed { residual, tol });
    }
    Ok(InvariantDensity {
        rho,
        construction,
        stationarity_residual: residual,
        g,
        eta,
        mirrored: false,
    })
}

/// sup over the grid of |p(x-a) rho(x-a) + q(x+a) rho(x+a) - rho(x)|.
pub fn stationarity_residual(env: &Environment, rho: &PeriodicFunction) -> f64 {
    let a = env.alpha().alpha();
    let term_minus = env.p().shift(a, -1).multiply(&rho.shift(a, -1));
    let term_plus = env.q().shift(a, 1).multiply(&rho.shift(a, 1));
    term_minus.add(&term_plus).sub(rho).grid_sup()
}

/// Pairing int rho(x) psi(x) dx via exact coefficient convolution.
pub fn density_pairing(rho: &PeriodicFunction, psi: &PeriodicFunction) -> f64 {
    crate::periodic::parseval_pairing(rho, psi)
}
