//! Exact and Monte Carlo evolution of the walk: the O(n^2) lattice dynamic
//! program for the law of X_n, mixing curves against the stationary value,
//! Cesaro averages, seeded path sampling with the accelerated-walk
//! decomposition, segment extraction by the stopping rule, and the CLT
//! experiment under a stationary start.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};

use crate::arithmetic::RotationNumber;
use crate::environment::{density_pairing, Environment, InvariantDensity};
use crate::geomsum::Segment;
use crate::math;
use crate::periodic::{grid_size_for, PeriodicFunction};
use crate::{Error, Result};

/// Default cap for the exact dynamic program (about 10^9 cell updates).
pub const DP_STEP_CAP: usize = 1 << 15;

/// Transition kernel shared by the plain and lazy walks: probabilities of
/// stepping -alpha, staying, and stepping +alpha, summing exactly to 1.
pub trait TransitionRule {
    fn alpha(&self) -> &RotationNumber;
    fn probs_at(&self, x: f64) -> (f64, f64, f64);
    fn is_lazy(&self) -> bool;
}

impl TransitionRule for Environment {
    fn alpha(&self) -> &RotationNumber {
        Environment::alpha(self)
    }

    fn probs_at(&self, x: f64) -> (f64, f64, f64) {
        let raw = self.p().evaluate(x).clamp(1e-12, 1.0 - 1e-12);
        // pair-exact complement: the branch with the larger value is kept,
        // the other is recomputed so the two sum to exactly 1
        if raw >= 0.5 {
            let q = 1.0 - raw;
            (q, 0.0, raw)
        } else {
            let q = 1.0 - raw;
            let p = 1.0 - q;
            (q, 0.0, p)
        }
    }

    fn is_lazy(&self) -> bool {
        false
    }
}

/// Lazy variant: stay in place with probability p_stay(x), otherwise split
/// the move between +alpha and -alpha.
#[derive(Debug, Clone)]
pub struct LazyEnvironment {
    alpha: RotationNumber,
    p_stay: PeriodicFunction,
    p_plus: PeriodicFunction,
    p_minus: PeriodicFunction,
    eps0: f64,
}

impl LazyEnvironment {
    /// Validates the pointwise simplex condition and the stay-probability
    /// margin eps0 <= p_stay <= 1 - eps0 on the grid.
    pub fn new(
        alpha: RotationNumber,
        p_stay: PeriodicFunction,
        p_plus: PeriodicFunction,
        p_minus: PeriodicFunction,
        eps0: f64,
    ) -> Result<Self> {
        if eps0 <= 0.0 || eps0 >= 0.5 {
            return Err(Error::InvalidInput("eps0 must lie in (0, 0.5)".into()));
        }
        let degree =
            p_stay.degree().max(p_plus.degree()).max(p_minus.degree());
        let grid = grid_size_for(degree);
        let ss = p_stay.compute_grid(grid);
        let pl = p_plus.compute_grid(grid);
        let mn = p_minus.compute_grid(grid);
        for i in 0..grid {
            let x = i as f64 / grid as f64;
            let defect = math::abs(ss[i] + pl[i] + mn[i] - 1.0);
            if defect > 1e-12 {
                return Err(Error::SimplexViolation { at: x, defect });
            }
            if ss[i] < eps0 - 1e-12 || ss[i] > 1.0 - eps0 + 1e-12 {
                return Err(Error::InvalidInput(alloc::format!(
                    "p_stay({x}) = {} outside [{eps0}, {}]",
                    ss[i],
                    1.0 - eps0
                )));
            }
            if pl[i] < 0.0 || mn[i] < 0.0 {
                return Err(Error::SimplexViolation { at: x, defect: pl[i].min(mn[i]) });
            }
        }
        Ok(LazyEnvironment { alpha, p_stay, p_plus, p_minus, eps0 })
    }

    /// Lazified environment: stay with probability `stay`, otherwise move
    /// by the environment's rule.
    pub fn from_environment(
        env: &Environment,
        stay: PeriodicFunction,
        eps0: f64,
    ) -> Result<Self> {
        let active = stay.scale(-1.0).add_constant(1.0);
        let p_plus = active.multiply(env.p());
        let p_minus = active.multiply(env.q());
        Self::new(env.alpha().clone(), stay, p_plus, p_minus, eps0)
    }

    pub fn alpha(&self) -> &RotationNumber {
        &self.alpha
    }
    pub fn p_stay(&self) -> &PeriodicFunction {
        &self.p_stay
    }
    pub fn p_plus(&self) -> &PeriodicFunction {
        &self.p_plus
    }
    pub fn p_minus(&self) -> &PeriodicFunction {
        &self.p_minus
    }
    pub fn eps0(&self) -> f64 {
        self.eps0
    }
}

impl TransitionRule for LazyEnvironment {
    fn alpha(&self) -> &RotationNumber {
        &self.alpha
    }

    fn probs_at(&self, x: f64) -> (f64, f64, f64) {
        let s = self.p_stay.evaluate(x).clamp(0.0, 1.0 - 1e-12);
        let m = self.p_minus.evaluate(x).clamp(0.0, 1.0);
        // remainder keeps the triple summing to exactly 1
        let rest = 1.0 - s;
        let m = m.min(rest);
        let p = rest - m;
        (m, s, p)
    }

    fn is_lazy(&self) -> bool {
        true
    }
}

/// Exact law of X_n on the orbit lattice {x + m alpha}.
#[derive(Debug, Clone)]
pub struct LatticeDistribution {
    start: f64,
    steps: usize,
    lazy: bool,
    /// probs[m + steps] = P(X_n = x + m alpha)
    probs: Vec<f64>,
    /// circle positions of the lattice points, same indexing
    angles: Vec<f64>,
}

impl LatticeDistribution {
    pub fn start(&self) -> f64 {
        self.start
    }
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn lazy(&self) -> bool {
        self.lazy
    }
    /// Non-lazy walks occupy only offsets with m = n (mod 2); the support
    /// on the other parity is exactly zero.
    pub fn parity_constrained(&self) -> bool {
        !self.lazy
    }
    pub fn offsets(&self) -> impl Iterator<Item = i64> + '_ {
        let n = self.steps as i64;
        -n..=n
    }

    pub fn prob(&self, m: i64) -> f64 {
        let i = m + self.steps as i64;
        if i < 0 || i >= self.probs.len() as i64 {
            0.0
        } else {
            self.probs[i as usize]
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn angle(&self, m: i64) -> f64 {
        self.angles[(m + self.steps as i64) as usize]
    }

    /// Total mass, compensated; the DP never renormalizes, so this tracks
    /// the accumulated drift.
    pub fn mass(&self) -> f64 {
        math::compensated_sum(self.probs.iter().copied())
    }

    /// E psi(X_n) by exact summation over the lattice.
    pub fn expectation(&self, psi: &PeriodicFunction) -> f64 {
        math::compensated_sum(
            self.probs
                .iter()
                .zip(&self.angles)
                .filter(|(&p, _)| p != 0.0)
                .map(|(&p, &x)| p * psi.evaluate(x)),
        )
    }

    /// E f(X_n) for an arbitrary scalar observable.
    pub fn expectation_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        math::compensated_sum(
            self.probs
                .iter()
                .zip(&self.angles)
                .filter(|(&p, _)| p != 0.0)
                .map(|(&p, &x)| p * f(x)),
        )
    }

    /// Total variation distance against another distribution on the same
    /// lattice (offsets aligned at m = 0).
    pub fn tv_distance(&self, other: &LatticeDistribution) -> f64 {
        let n = self.steps.max(other.steps) as i64;
        let mut acc = 0.0;
        for m in -n..=n {
            acc += math::abs(self.prob(m) - other.prob(m));
        }
        acc / 2.0
    }
}

/// Site tables for the dynamic program: positions and transition triples
/// for every reachable lattice offset.
struct SiteTable {
    angles: Vec<f64>,
    minus: Vec<f64>,
    stay: Vec<f64>,
    plus: Vec<f64>,
}

fn site_table<R: TransitionRule>(rule: &R, x: f64, n: usize) -> SiteTable {
    let len = 2 * n + 1;
    let mut angles = Vec::with_capacity(len);
    let mut minus = Vec::with_capacity(len);
    let mut stay = Vec::with_capacity(len);
    let mut plus = Vec::with_capacity(len);
    let alpha = rule.alpha();
    for i in 0..len {
        let m = i as i64 - n as i64;
        let pos = math::frac(x + alpha.frac_times(m));
        let (pm, ps, pp) = rule.probs_at(pos);
        angles.push(pos);
        minus.push(pm);
        stay.push(ps);
        plus.push(pp);
    }
    SiteTable { angles, minus, stay, plus }
}

/// Exact law of X_n by the lattice recurrence
/// `d_{k+1}(m) = p(x+(m-1)a) d_k(m-1) + q(x+(m+1)a) d_k(m+1) (+ stay)`.
pub fn evolve_exact<R: TransitionRule>(
    rule: &R,
    x: f64,
    n: usize,
    cap: usize,
) -> Result<LatticeDistribution> {
    if n > cap {
        return Err(Error::StepCapExceeded { steps: n, cap });
    }
    let table = site_table(rule, x, n);
    Ok(run_dp(rule, &table, n, |_, _| {}))
}

fn run_dp<R: TransitionRule>(
    rule: &R,
    table: &SiteTable,
    n: usize,
    mut observe: impl FnMut(usize, &[f64]),
) -> LatticeDistribution {
    let len = 2 * n + 1;
    let center = n;
    let mut cur = vec![0.0f64; len];
    let mut next = vec![0.0f64; len];
    cur[center] = 1.0;
    let lazy = rule.is_lazy();
    for k in 1..=n {
        let reach = k.min(n);
        let lo = center - reach;
        let hi = center + reach;
        for i in lo..=hi {
            let mut v = 0.0;
            if i > 0 {
                v += table.plus[i - 1] * cur[i - 1];
            }
            if i + 1 < len {
                v += table.minus[i + 1] * cur[i + 1];
            }
            if lazy {
                v += table.stay[i] * cur[i];
            }
            next[i] = v;
        }
        for i in lo..=hi {
            cur[i] = next[i];
            next[i] = 0.0;
        }
        observe(k, &cur);
    }
    LatticeDistribution {
        start: table.angles[center],
        steps: n,
        lazy,
        probs: cur,
        angles: table.angles.clone(),
    }
}

/// Continue an exact evolution for `extra` more steps.
pub fn continue_evolution<R: TransitionRule>(
    rule: &R,
    dist: &LatticeDistribution,
    extra: usize,
    cap: usize,
) -> Result<LatticeDistribution> {
    let total = dist.steps + extra;
    if total > cap {
        return Err(Error::StepCapExceeded { steps: total, cap });
    }
    let table = site_table(rule, dist.start, total);
    let len = 2 * total + 1;
    let mut cur = vec![0.0f64; len];
    for m in dist.offsets() {
        cur[(m + total as i64) as usize] = dist.prob(m);
    }
    let lazy = rule.is_lazy();
    let center = total;
    let mut next = vec![0.0f64; len];
    for k in 1..=extra {
        let reach = (dist.steps + k).min(total);
        let lo = center - reach;
        let hi = center + reach;
        for i in lo..=hi {
            let mut v = 0.0;
            if i > 0 {
                v += table.plus[i - 1] * cur[i - 1];
            }
            if i + 1 < len {
                v += table.minus[i + 1] * cur[i + 1];
            }
            if lazy {
                v += table.stay[i] * cur[i];
            }
            next[i] = v;
        }
        for i in lo..=hi {
            cur[i] = next[i];
            next[i] = 0.0;
        }
    }
    Ok(LatticeDistribution {
        start: dist.start,
        steps: total,
        lazy,
        probs: cur,
        angles: table.angles,
    })
}

/// Where the stationary value nu(psi) comes from.
#[derive(Debug, Clone)]
pub struct NuEstimate {
    pub value: f64,
    /// Error bar: spread across starts for Cesaro estimates, a residual
    /// multiple for density pairings.
    pub bar: f64,
    pub per_start: Vec<f64>,
}

/// nu(psi) from the invariant density, bar tied to the stationarity
/// residual.
pub fn nu_from_density(density: &InvariantDensity, psi: &PeriodicFunction) -> NuEstimate {
    let value = density_pairing(&density.rho, psi);
    NuEstimate {
        value,
        bar: (100.0 * density.stationarity_residual).max(1e-12),
        per_start: Vec::new(),
    }
}

/// Cesaro estimate `(1/N) sum_{n=1..N} E_x psi(X_n)` from several starts;
/// the spread across starts is the empirical error bar.
pub fn cesaro_nu<R: TransitionRule>(
    rule: &R,
    psi: &PeriodicFunction,
    n: usize,
    starts: &[f64],
    cap: usize,
) -> Result<NuEstimate> {
    if n > cap {
        return Err(Error::StepCapExceeded { steps: n, cap });
    }
    if starts.is_empty() {
        return Err(Error::InvalidInput("at least one start required".into()));
    }
    let mut per_start = Vec::with_capacity(starts.len());
    for &x in starts {
        let table = site_table(rule, x, n);
        let psi_vals: Vec<f64> = table.angles.iter().map(|&a| psi.evaluate(a)).collect();
        let center = n as i64;
        let mut acc = 0.0;
        run_dp(rule, &table, n, |k, cur| {
            let reach = k as i64;
            let mut e = 0.0;
            for i in (center - reach) as usize..=(center + reach) as usize {
                if cur[i] != 0.0 {
                    e += cur[i] * psi_vals[i];
                }
            }
            acc += e;
        });
        per_start.push(acc / n as f64);
    }
    let value = per_start.iter().sum::<f64>() / per_start.len() as f64;
    let spread = per_start.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - per_start.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Ok(NuEstimate { value, bar: spread.max(0.0), per_start })
}

#[derive(Debug, Clone, Copy)]
pub struct MixingRow {
    pub n: usize,
    pub expectation: f64,
    pub nu: f64,
    pub gap: f64,
}

/// Gap table n -> E_x psi(X_n) - nu(psi) with a log-log slope fitted over
/// the upper half of the requested checkpoints.
#[derive(Debug, Clone)]
pub struct MixingCurve {
    pub rows: Vec<MixingRow>,
    pub fit: Option<math::LinearFit>,
}

pub fn mixing_curve<R: TransitionRule>(
    rule: &R,
    x: f64,
    psi: &PeriodicFunction,
    nu: &NuEstimate,
    ns: &[usize],
    cap: usize,
) -> Result<MixingCurve> {
    if ns.is_empty() {
        return Err(Error::InvalidInput("no checkpoints".into()));
    }
    let max_n = *ns.iter().max().unwrap();
    if max_n > cap {
        return Err(Error::StepCapExceeded { steps: max_n, cap });
    }
    let table = site_table(rule, x, max_n);
    let psi_vals: Vec<f64> = table.angles.iter().map(|&a| psi.evaluate(a)).collect();
    let center = max_n as i64;
    let mut rows: Vec<MixingRow> = Vec::with_capacity(ns.len());
    let mut wanted: Vec<usize> = ns.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let mut idx = 0usize;
    run_dp(rule, &table, max_n, |k, cur| {
        if idx < wanted.len() && k == wanted[idx] {
            let reach = k as i64;
            let mut e = 0.0;
            for i in (center - reach) as usize..=(center + reach) as usize {
                if cur[i] != 0.0 {
                    e += cur[i] * psi_vals[i];
                }
            }
            rows.push(MixingRow { n: k, expectation: e, nu: nu.value, gap: e - nu.value });
            idx += 1;
        }
    });
    let fit = fit_upper_half(&rows);
    Ok(MixingCurve { rows, fit })
}

/// Gaps below this are double-precision noise and excluded from slope fits.
pub const GAP_NOISE_FLOOR: f64 = 1e-14;

/// ln|gap| against ln n over the upper half of the rows that sit above the
/// noise floor (rows that already crashed to rounding level carry no rate
/// information).
pub fn fit_upper_half(rows: &[MixingRow]) -> Option<math::LinearFit> {
    let usable: Vec<&MixingRow> =
        rows.iter().filter(|r| math::abs(r.gap) > GAP_NOISE_FLOOR).collect();
    if usable.len() < 2 {
        return None;
    }
    let start = usable.len() / 2;
    let window = if usable.len() - start >= 2 { &usable[start..] } else { &usable[..] };
    let xs: Vec<f64> = window.iter().map(|r| math::ln(r.n as f64)).collect();
    let ys: Vec<f64> = window.iter().map(|r| math::ln(math::abs(r.gap))).collect();
    math::linear_fit(&xs, &ys)
}

/// A sampled trajectory with its accelerated decomposition.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub start: f64,
    /// Lattice offsets m_0..m_n.
    pub offsets: Vec<i64>,
    /// Offsets of the accelerated walk (repetitions erased), starting at 0.
    pub accel_offsets: Vec<i64>,
    /// Circle positions of the accelerated sites.
    pub accel_positions: Vec<f64>,
    /// Stay probability at each accelerated site.
    pub accel_stays: Vec<f64>,
    /// Steps spent at each accelerated site (the last entry is censored by
    /// the end of the path).
    pub holding_times: Vec<u64>,
}

/// Simulate `n` steps from `x` with the ChaCha stream `(seed, stream)`.
/// Identical inputs reproduce the identical sample.
pub fn sample_path<R: TransitionRule>(
    rule: &R,
    x: f64,
    n: usize,
    seed: u64,
    stream: u64,
) -> PathSample {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let alpha = rule.alpha().to_f64();

    let mut offsets = Vec::with_capacity(n + 1);
    let mut accel_offsets = Vec::new();
    let mut accel_positions = Vec::new();
    let mut accel_stays = Vec::new();
    let mut holding: Vec<u64> = Vec::new();

    let mut m = 0i64;
    let mut pos = math::frac(x);
    offsets.push(m);
    let (_, s0, _) = rule.probs_at(pos);
    accel_offsets.push(m);
    accel_positions.push(pos);
    accel_stays.push(s0);
    holding.push(1);

    for _ in 0..n {
        let (pm, ps, _pp) = rule.probs_at(pos);
        let u = uniform(&mut rng);
        let step = if u < ps {
            0
        } else if u < ps + pm {
            -1
        } else {
            1
        };
        if step == 0 {
            *holding.last_mut().unwrap() += 1;
        } else {
            m += step;
            pos = math::frac(x + m as f64 * alpha);
            let (_, s, _) = rule.probs_at(pos);
            accel_offsets.push(m);
            accel_positions.push(pos);
            accel_stays.push(s);
            holding.push(1);
        }
        offsets.push(m);
    }
    PathSample {
        start: math::frac(x),
        offsets,
        accel_offsets,
        accel_positions,
        accel_stays,
        holding_times: holding,
    }
}

fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// First prefix W of the accelerated walk with expected traversal time
/// `T_W >= eps0 n / 2`; every proper prefix stays below the threshold by
/// construction.
pub fn segment_stop(path: &PathSample, eps0: f64, n: usize) -> Result<Segment> {
    if eps0 <= 0.0 {
        return Err(Error::InvalidInput("eps0 must be positive".into()));
    }
    let threshold = eps0 * n as f64 / 2.0;
    let mut acc = 0.0;
    for (i, &s) in path.accel_stays.iter().enumerate() {
        acc += 1.0 / (1.0 - s);
        if acc >= threshold {
            let stays = path.accel_stays[..=i].to_vec();
            return Segment::new(stays, path.accel_positions[i]);
        }
    }
    Err(Error::SegmentIncomplete { accumulated: acc, threshold })
}

/// Inverse-CDF sampler for a stationary start, on a 2^14 grid with linear
/// interpolation inside cells.
#[derive(Debug, Clone)]
pub struct StationarySampler {
    cdf: Vec<f64>,
}

impl StationarySampler {
    pub fn new(rho: &PeriodicFunction) -> Self {
        let g = 1 << 14;
        let samples = rho.compute_grid(g);
        let mut cdf = Vec::with_capacity(g + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for &v in &samples {
            acc += v.max(0.0) / g as f64;
            cdf.push(acc);
        }
        let total = *cdf.last().unwrap();
        for v in cdf.iter_mut() {
            *v /= total;
        }
        StationarySampler { cdf }
    }

    pub fn sample(&self, u: f64) -> f64 {
        let g = self.cdf.len() - 1;
        let u = u.clamp(0.0, 1.0 - 1e-16);
        // binary search for the cell with cdf[j] <= u < cdf[j+1]
        let mut lo = 0usize;
        let mut hi = g;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cdf[mid] <= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let span = self.cdf[lo + 1] - self.cdf[lo];
        let frac_in = if span > 0.0 { (u - self.cdf[lo]) / span } else { 0.5 };
        (lo as f64 + frac_in) / g as f64
    }
}

/// One CLT trial: N^(-1/2) sum_{n=1..N} psi(X_n) from a stationary start.
pub fn clt_trial<R: TransitionRule>(
    rule: &R,
    sampler: &StationarySampler,
    psi: &PeriodicFunction,
    n_steps: usize,
    seed: u64,
    stream: u64,
) -> f64 {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let alpha = rule.alpha().to_f64();
    let x0 = sampler.sample(uniform(&mut rng));
    let mut m = 0i64;
    let mut pos = x0;
    let mut acc = 0.0;
    for _ in 0..n_steps {
        let (pm, ps, _) = rule.probs_at(pos);
        let u = uniform(&mut rng);
        if u >= ps {
            m += if u < ps + pm { -1 } else { 1 };
            pos = math::frac(x0 + m as f64 * alpha);
        }
        acc += psi.evaluate(pos);
    }
    acc / math::sqrt(n_steps as f64)
}

/// Result of a CLT experiment.
#[derive(Debug, Clone)]
pub struct CltReport {
    pub empirical_variance: f64,
    pub empirical_mean: f64,
    /// Kolmogorov-Smirnov statistic against Normal(0, sigma2_ref).
    pub ks_statistic: f64,
    pub sigma2_ref: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Compute the report from already-collected trial sums.
pub fn clt_report_from_samples(samples: &mut [f64], sigma2_ref: f64, seed: u64) -> CltReport {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sigma = math::sqrt(sigma2_ref);
    let mut ks = 0.0f64;
    for (i, &v) in samples.iter().enumerate() {
        let f = math::normal_cdf(v / sigma);
        ks = ks.max(math::abs(f - i as f64 / n as f64));
        ks = ks.max(math::abs(f - (i + 1) as f64 / n as f64));
    }
    CltReport {
        empirical_variance: var,
        empirical_mean: mean,
        ks_statistic: ks,
        sigma2_ref,
        trials: n,
        seed,
    }
}

/// Serial CLT experiment: `trials` independent streams of the seeded
/// generator. The parallel driver in the companion crate reproduces the
/// same numbers by distributing streams.
pub fn clt_experiment<R: TransitionRule>(
    rule: &R,
    density: &InvariantDensity,
    psi: &PeriodicFunction,
    sigma2_ref: f64,
    n_steps: usize,
    trials: usize,
    seed: u64,
) -> Result<CltReport> {
    if sigma2_ref <= 0.0 && psi.cr_norm_upper(0) > 0.0 {
        return Err(Error::InvalidInput(
            "zero asymptotic variance for a nonzero observable".into(),
        ));
    }
    let sampler = StationarySampler::new(&density.rho);
    let mut samples: Vec<f64> = (0..trials)
        .map(|t| clt_trial(rule, &sampler, psi, n_steps, seed, t as u64))
        .collect();
    Ok(clt_report_from_samples(&mut samples, sigma2_ref, seed))
}
