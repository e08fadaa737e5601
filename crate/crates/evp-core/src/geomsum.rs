//! Exact distribution theory for sums of independent geometric holding
//! times: truncated pmfs and their convolutions, finite-difference tables
//! delta^m with the n^(-(m+1)/2) scaling, the local limit comparison against
//! the Gaussian, the stopped-sum moderate-deviation tail, and the
//! characteristic-function modulus diagnostic.
//!
//! Conventions: a holding time at a site with stay probability s has
//! P(l = k) = s^(k-1) (1-s) on {1, 2, ...}, mean 1/(1-s), variance
//! s/(1-s)^2. The tail and characteristic-function operations
//! (`stopping_tail`, `char_modulus`) take the *success* probabilities
//! p_j = 1 - s_j, matching a geometric of mean 1/p_j.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};

use crate::math;
use crate::{Error, Result};

/// Per-step truncation budget for segment convolutions.
pub const PMF_STEP_TAIL: f64 = 1e-16;

/// Largest admissible stay probability (keeps truncated pmfs bounded).
pub const MAX_STAY: f64 = 0.999;

/// Highest supported finite-difference order.
pub const MAX_DELTA_ORDER: usize = 4;

/// A segment of the accelerated walk: the stay probabilities along its
/// sites, its endpoint, and the traversal-time moments.
#[derive(Debug, Clone)]
pub struct Segment {
    stays: Vec<f64>,
    endpoint: f64,
    t_w: f64,
    sigma2: f64,
}

impl Segment {
    pub fn new(stays: Vec<f64>, endpoint: f64) -> Result<Self> {
        if stays.is_empty() {
            return Err(Error::InvalidInput("segment needs at least one site".into()));
        }
        for &s in &stays {
            if !(0.0..=MAX_STAY).contains(&s) {
                return Err(Error::StayProbabilityOutOfRange { s });
            }
        }
        let t_w = stays.iter().map(|&s| 1.0 / (1.0 - s)).sum();
        let sigma2 = stays.iter().map(|&s| s / ((1.0 - s) * (1.0 - s))).sum();
        Ok(Segment { stays, endpoint, t_w, sigma2 })
    }

    pub fn iid(s: f64, len: usize, endpoint: f64) -> Result<Self> {
        Self::new(vec![s; len], endpoint)
    }

    pub fn stays(&self) -> &[f64] {
        &self.stays
    }
    pub fn len(&self) -> usize {
        self.stays.len()
    }
    pub fn is_empty(&self) -> bool {
        self.stays.is_empty()
    }
    pub fn endpoint(&self) -> f64 {
        self.endpoint
    }
    /// Expected traversal time sum 1/(1 - s_w).
    pub fn expected_time(&self) -> f64 {
        self.t_w
    }
    /// Traversal-time variance sum s_w/(1 - s_w)^2.
    pub fn time_variance(&self) -> f64 {
        self.sigma2
    }
}

/// Truncated pmf of a single geometric holding time on {1, 2, ...}.
#[derive(Debug, Clone)]
pub struct GeomPmf {
    /// probs[k] = P(l = k + 1)
    pub probs: Vec<f64>,
    pub tail: f64,
}

/// P(l = k) = s^(k-1) (1-s), truncated once the remaining mass drops below
/// `PMF_STEP_TAIL`.
pub fn geometric_pmf(s: f64) -> Result<GeomPmf> {
    geometric_pmf_with_tail(s, PMF_STEP_TAIL)
}

fn geometric_pmf_with_tail(s: f64, tail_budget: f64) -> Result<GeomPmf> {
    if !(0.0..=MAX_STAY).contains(&s) {
        return Err(Error::StayProbabilityOutOfRange { s });
    }
    if s == 0.0 {
        return Ok(GeomPmf { probs: vec![1.0], tail: 0.0 });
    }
    let mut probs = Vec::new();
    let mut p = 1.0 - s;
    let mut remaining = 1.0;
    while remaining > tail_budget {
        probs.push(p);
        remaining *= s;
        p *= s;
    }
    Ok(GeomPmf { probs, tail: remaining })
}

/// Truncated pmf of the segment traversal time t_W.
#[derive(Debug, Clone)]
pub struct GeomSumPmf {
    /// Smallest t value carried (support starts at the segment length).
    pub offset: usize,
    pub probs: Vec<f64>,
    /// Total mass discarded by truncation (certified upper bound).
    pub tail: f64,
    /// Number of convolved sites.
    pub sites: usize,
}

impl GeomSumPmf {
    pub fn mean(&self) -> f64 {
        math::compensated_sum(
            self.probs.iter().enumerate().map(|(i, &p)| (self.offset + i) as f64 * p),
        )
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        math::compensated_sum(self.probs.iter().enumerate().map(|(i, &p)| {
            let d = (self.offset + i) as f64 - m;
            d * d * p
        }))
    }

    pub fn prob_at(&self, t: i64) -> f64 {
        if t < self.offset as i64 {
            return 0.0;
        }
        let i = (t - self.offset as i64) as usize;
        self.probs.get(i).copied().unwrap_or(0.0)
    }
}

/// Exact (truncated) law of t_W by iterated convolution.
pub fn convolve_segment(seg: &Segment) -> Result<GeomSumPmf> {
    convolve_stays(seg.stays(), PMF_STEP_TAIL)
}

/// Iterated convolution with a per-step truncation budget. Entries are
/// nonnegative throughout, so truncation is the only error source and the
/// running `tail` bounds it.
pub fn convolve_stays(stays: &[f64], step_tail: f64) -> Result<GeomSumPmf> {
    if stays.is_empty() {
        return Err(Error::InvalidInput("empty segment".into()));
    }
    let mut acc = vec![1.0f64];
    let mut offset = 0usize;
    let mut tail = 0.0f64;
    for &s in stays {
        let g = geometric_pmf_with_tail(s, step_tail)?;
        tail += g.tail;
        let mut out = vec![0.0f64; acc.len() + g.probs.len() - 1];
        for (i, &a) in acc.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in g.probs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        offset += 1; // each holding time is >= 1

        // trim both edges within the step budget
        let mut lo = 0usize;
        let mut dropped = 0.0;
        while lo < out.len() && dropped + out[lo] < step_tail * 0.5 {
            dropped += out[lo];
            lo += 1;
        }
        let mut hi = out.len();
        let mut dropped_hi = 0.0;
        while hi > lo && dropped_hi + out[hi - 1] < step_tail * 0.5 {
            dropped_hi += out[hi - 1];
            hi -= 1;
        }
        tail += dropped + dropped_hi;
        offset += lo;
        acc = out[lo..hi].to_vec();
    }
    Ok(GeomSumPmf { offset, probs: acc, tail, sites: stays.len() })
}

/// Finite-difference table delta^m of a traversal-time pmf, with
/// delta^m(t) = delta^(m-1)(t) - delta^(m-1)(t+1) over the stored support.
#[derive(Debug, Clone)]
pub struct DeltaTable {
    pub sites: usize,
    pub order: usize,
    pub offset: usize,
    pub values: Vec<f64>,
    pub sup: f64,
    /// n^((m+1)/2) * sup, the bounded quantity of the delta-decay law.
    pub scaled_sup: f64,
}

/// Build the order-m difference table from an exact pmf.
pub fn delta_table(pmf: &GeomSumPmf, m: usize) -> Result<DeltaTable> {
    if m > MAX_DELTA_ORDER {
        return Err(Error::OrderTooHigh { m, max: MAX_DELTA_ORDER });
    }
    let mut values = pmf.probs.clone();
    for _ in 0..m {
        let len = values.len();
        let mut next = vec![0.0f64; len];
        for i in 0..len {
            let right = if i + 1 < len { values[i + 1] } else { 0.0 };
            next[i] = values[i] - right;
        }
        values = next;
    }
    let sup = values.iter().fold(0.0f64, |acc, &v| acc.max(math::abs(v)));
    let scale = math::powf(pmf.sites as f64, (m as f64 + 1.0) / 2.0);
    Ok(DeltaTable {
        sites: pmf.sites,
        order: m,
        offset: pmf.offset,
        values,
        sup,
        scaled_sup: scale * sup,
    })
}

/// Convenience: convolve a segment and difference its pmf in one step.
pub fn delta_table_for_segment(seg: &Segment, m: usize) -> Result<DeltaTable> {
    delta_table(&convolve_segment(seg)?, m)
}

impl DeltaTable {
    /// Suffix cumulative sums recover the next-lower order table.
    pub fn reconstruct_lower(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.values.len()];
        let mut acc = 0.0;
        for i in (0..self.values.len()).rev() {
            acc += self.values[i];
            out[i] = acc;
        }
        out
    }
}

/// Local-limit comparison of an exact traversal pmf against the Gaussian.
#[derive(Debug, Clone, Copy)]
pub struct LltReport {
    pub sup_error: f64,
    /// sigma_W * sup_error, the quantity that must shrink along a ladder.
    pub scaled_error: f64,
    pub sigma: f64,
}

/// sup_j |P(t_W = round(T_W) + j) - N(j; sigma_W)|, scaled by sigma_W.
pub fn llt_error(seg: &Segment) -> Result<LltReport> {
    if seg.len() < 8 {
        return Err(Error::InvalidInput(alloc::format!(
            "segment length {} below the LLT minimum 8",
            seg.len()
        )));
    }
    let pmf = convolve_segment(seg)?;
    let sigma = math::sqrt(seg.time_variance());
    let center = math::round(seg.expected_time()) as i64;
    let norm = 1.0 / (math::sqrt(math::TAU) * sigma);
    let reach = (10.0 * sigma) as i64 + 2;
    let lo = (pmf.offset as i64).min(center - reach);
    let hi = (pmf.offset as i64 + pmf.probs.len() as i64).max(center + reach);
    let mut sup = 0.0f64;
    for t in lo..hi {
        let j = (t - center) as f64;
        let gauss = norm * math::exp(-j * j / (2.0 * sigma * sigma));
        sup = sup.max(math::abs(pmf.prob_at(t) - gauss));
    }
    Ok(LltReport { sup_error: sup, scaled_error: sigma * sup, sigma })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    Exact,
    MonteCarlo { trials: u64 },
}

/// Result of the stopped-sum tail probability.
#[derive(Debug, Clone, Copy)]
pub struct TailEstimate {
    pub probability: f64,
    /// Half-width of the 95% CI (Monte Carlo only).
    pub ci_half_width: Option<f64>,
    /// The deterministic stopping index min{k : sum 1/p_j > n/2}.
    pub tau: usize,
    pub threshold: f64,
}

/// Exact DP cap for the stopped-sum tail.
pub const TAIL_EXACT_CAP: usize = 1 << 12;

/// P(|S_tau - n/2| > sqrt(n) ln n) for independent geometrics with success
/// probabilities `ps[j]` (mean 1/p_j). The stopping index tau is
/// deterministic given the parameter sequence.
pub fn stopping_tail(ps: &[f64], n: usize, mode: TailMode, seed: u64) -> Result<TailEstimate> {
    if n < 2 {
        return Err(Error::InvalidInput("n must be >= 2".into()));
    }
    let half = n as f64 / 2.0;
    let mut acc = 0.0;
    let mut tau = 0usize;
    for (j, &p) in ps.iter().enumerate() {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidInput(alloc::format!("success probability {p} at {j}")));
        }
        acc += 1.0 / p;
        if acc > half {
            tau = j + 1;
            break;
        }
    }
    if tau == 0 {
        return Err(Error::InvalidInput("parameter sequence exhausted before tau".into()));
    }
    let threshold = math::sqrt(n as f64) * math::ln(n as f64);
    let lo_edge = half - threshold;
    let hi_edge = half + threshold;

    match mode {
        TailMode::Exact => {
            if n > TAIL_EXACT_CAP {
                return Err(Error::StepCapExceeded { steps: n, cap: TAIL_EXACT_CAP });
            }
            // deep truncation so tails of order exp(-(ln n)^2) stay exact
            let stays: Vec<f64> = ps[..tau].iter().map(|&p| 1.0 - p).collect();
            let pmf = convolve_stays(&stays, 1e-60)?;
            let mut outside = 0.0f64;
            for (i, &v) in pmf.probs.iter().enumerate() {
                let t = (pmf.offset + i) as f64;
                if t < lo_edge || t > hi_edge {
                    outside += v;
                }
            }
            Ok(TailEstimate {
                probability: outside + pmf.tail,
                ci_half_width: None,
                tau,
                threshold,
            })
        }
        TailMode::MonteCarlo { trials } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut hits = 0u64;
            for _ in 0..trials {
                let mut s = 0.0f64;
                for &p in &ps[..tau] {
                    s += sample_geometric(&mut rng, 1.0 - p) as f64;
                }
                if (s - half).abs() > threshold {
                    hits += 1;
                }
            }
            let est = hits as f64 / trials as f64;
            let half_width = 1.96 * math::sqrt(est * (1.0 - est) / trials as f64);
            Ok(TailEstimate {
                probability: est,
                ci_half_width: Some(half_width),
                tau,
                threshold,
            })
        }
    }
}

/// Geometric on {1, 2, ...} with stay probability s, by inversion.
pub fn sample_geometric(rng: &mut impl RngCore, s: f64) -> u64 {
    if s <= 0.0 {
        return 1;
    }
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let u = u.max(f64::MIN_POSITIVE);
    1 + (math::ln(u) / math::ln(s)) as u64
}

/// One sample of the characteristic-function modulus diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct CharSample {
    pub t: f64,
    pub modulus: f64,
    pub ln_modulus: f64,
}

#[derive(Debug, Clone)]
pub struct CharDiagnostic {
    pub samples: Vec<CharSample>,
    /// Largest kappa with |Phi_n(t)| <= exp(-kappa n t^2) certified on
    /// (0, delta_window].
    pub kappa_hat: f64,
    /// max over [delta_window, pi] of |Phi_n(t)|^(1/n); below 1 is the
    /// plateau bound.
    pub theta_plateau: f64,
    pub delta_window: f64,
}

/// Window edge for the quadratic-decay fit.
pub const CHAR_DELTA_WINDOW: f64 = 1.0;

/// |Phi_n(t)| = prod_k |p_k / (1 - q_k e^(it))| sampled on `t_grid`, with
/// the certified quadratic constant near 0 and the plateau bound away
/// from it.
pub fn char_modulus(ps: &[f64], t_grid: &[f64]) -> Result<CharDiagnostic> {
    if ps.is_empty() {
        return Err(Error::InvalidInput("empty parameter sequence".into()));
    }
    let n = ps.len() as f64;
    let ln_mod = |t: f64| -> f64 {
        ps.iter()
            .map(|&p| {
                let q = 1.0 - p;
                // |p/(1 - q e^{it})| = p / sqrt(p^2 + 2 q (1 - cos t))
                math::ln(p) - 0.5 * math::ln(p * p + 2.0 * q * (1.0 - math::cos(t)))
            })
            .sum()
    };
    let samples: Vec<CharSample> = t_grid
        .iter()
        .map(|&t| {
            let lm = ln_mod(t);
            CharSample { t, modulus: math::exp(lm), ln_modulus: lm }
        })
        .collect();

    let mut kappa_hat = f64::INFINITY;
    let probes = 64;
    for i in 1..=probes {
        let t = CHAR_DELTA_WINDOW * i as f64 / probes as f64;
        let ratio = -ln_mod(t) / (n * t * t);
        kappa_hat = kappa_hat.min(ratio);
    }
    let mut theta = 0.0f64;
    for i in 0..=probes {
        let t = CHAR_DELTA_WINDOW
            + (core::f64::consts::PI - CHAR_DELTA_WINDOW) * i as f64 / probes as f64;
        theta = theta.max(math::exp(ln_mod(t) / n));
    }
    Ok(CharDiagnostic {
        samples,
        kappa_hat,
        theta_plateau: theta,
        delta_window: CHAR_DELTA_WINDOW,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn geometric_half_matches_powers_of_two() {
        let g = geometric_pmf(0.5).unwrap();
        for (k, &p) in g.probs.iter().enumerate().take(10) {
            let expect = math::powf(0.5, (k + 1) as f64);
            assert!((p - expect).abs() < 1e-15, "k={k}");
        }
        let mean: f64 = g.probs.iter().enumerate().map(|(k, &p)| (k + 1) as f64 * p).sum();
        assert!((mean - 2.0).abs() < 1e-12);
        let var: f64 = g
            .probs
            .iter()
            .enumerate()
            .map(|(k, &p)| ((k + 1) as f64 - 2.0) * ((k + 1) as f64 - 2.0) * p)
            .sum();
        assert!((var - 2.0).abs() < 1e-10, "variance {var}");
        assert!(g.tail < PMF_STEP_TAIL);
    }

    #[test]
    fn degenerate_site_is_point_mass() {
        let g = geometric_pmf(0.0).unwrap();
        assert_eq!(g.probs, alloc::vec![1.0]);
        assert_eq!(g.tail, 0.0);
    }

    #[test]
    fn stay_out_of_range_rejected() {
        assert!(matches!(
            geometric_pmf(-0.1),
            Err(Error::StayProbabilityOutOfRange { .. })
        ));
        assert!(matches!(
            geometric_pmf(0.9999),
            Err(Error::StayProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn two_site_convolution_is_negative_binomial() {
        let seg = Segment::iid(0.5, 2, 0.0).unwrap();
        let pmf = convolve_segment(&seg).unwrap();
        assert_eq!(pmf.offset, 2);
        for t in 2i64..20 {
            // P(t_W = j) = (j - 1) 2^-j
            let expect = (t - 1) as f64 * math::powf(0.5, t as f64);
            assert!((pmf.prob_at(t) - expect).abs() < 1e-14, "t={t}");
        }
        assert!((pmf.prob_at(2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_site_equals_geometric() {
        let seg = Segment::new(alloc::vec![0.3], 0.1).unwrap();
        let pmf = convolve_segment(&seg).unwrap();
        let g = geometric_pmf(0.3).unwrap();
        for (i, &p) in g.probs.iter().enumerate() {
            assert!((pmf.prob_at((i + 1) as i64) - p).abs() < 1e-16);
        }
    }

    #[test]
    fn mixed_sites_match_moment_identities() {
        let stays: Vec<f64> =
            (0..50).map(|i| [0.3, 0.5, 0.7][i % 3]).collect();
        let seg = Segment::new(stays, 0.0).unwrap();
        let pmf = convolve_segment(&seg).unwrap();
        assert!((pmf.mean() - seg.expected_time()).abs() < 1e-10, "mean");
        assert!((pmf.variance() - seg.time_variance()).abs() < 1e-10, "variance");
        assert!(pmf.tail < 1e-13);
    }

    #[test]
    fn delta_zero_scaled_sup_near_gaussian_peak() {
        // max_j P(S_n = j) ~ 1/sqrt(2 pi sigma^2) with sigma^2 = 2n
        let seg = Segment::iid(0.5, 1024, 0.0).unwrap();
        let pmf = convolve_segment(&seg).unwrap();
        let table = delta_table(&pmf, 0).unwrap();
        let expect = 1.0 / math::sqrt(2.0 * math::TAU); // 1/sqrt(4 pi)
        assert!(
            (table.scaled_sup - expect).abs() < 0.02,
            "scaled sup {} vs {expect}",
            table.scaled_sup
        );
    }

    #[test]
    fn delta_one_smallest_index_from_hand_arithmetic() {
        // two iid s=1/2 sites: P(S=2) - P(S=3) = 1/4 - 1/4 = 0
        let seg = Segment::iid(0.5, 2, 0.0).unwrap();
        let pmf = convolve_segment(&seg).unwrap();
        let table = delta_table(&pmf, 1).unwrap();
        assert_eq!(table.offset, 2);
        assert!(table.values[0].abs() < 1e-16, "delta^1(2) = {}", table.values[0]);
    }

    #[test]
    fn delta_reconstruction_recovers_lower_order() {
        let seg = Segment::iid(0.5, 64, 0.0).unwrap();
        let pmf = convolve_segment(&seg).unwrap();
        let t2 = delta_table(&pmf, 2).unwrap();
        let t1 = delta_table(&pmf, 1).unwrap();
        let rec = t2.reconstruct_lower();
        for (i, (&a, &b)) in rec.iter().zip(t1.values.iter()).enumerate() {
            assert!((a - b).abs() <= 1e-17 + 1e-12 * b.abs(), "i={i}: {a} vs {b}");
        }
    }

    #[test]
    fn delta_order_cap() {
        let seg = Segment::iid(0.5, 8, 0.0).unwrap();
        let pmf = convolve_segment(&seg).unwrap();
        assert!(matches!(delta_table(&pmf, 5), Err(Error::OrderTooHigh { m: 5, max: 4 })));
    }

    #[test]
    fn llt_error_shrinks_along_ladder() {
        let mut last = f64::INFINITY;
        for len in [8usize, 64, 512] {
            let seg = Segment::iid(0.5, len, 0.0).unwrap();
            let rep = llt_error(&seg).unwrap();
            assert!(rep.scaled_error < last, "len {len}: {} !< {last}", rep.scaled_error);
            last = rep.scaled_error;
        }
        assert!(last < 0.05, "length-512 scaled error {last}");
    }

    #[test]
    fn llt_requires_minimum_length() {
        let seg = Segment::iid(0.5, 4, 0.0).unwrap();
        assert!(llt_error(&seg).is_err());
    }

    #[test]
    fn stopping_tail_matches_negative_binomial_oracle() {
        // n = 16, p_j = 1/2: tau = min{k: 2k > 8} = 5, threshold = 4 ln 16.
        // S_5 ~ NegBin: P(S = j) = C(j-1, 4) 2^-j for j >= 5.
        let ps = alloc::vec![0.5; 64];
        let est = stopping_tail(&ps, 16, TailMode::Exact, 0).unwrap();
        assert_eq!(est.tau, 5);
        let threshold = 4.0 * math::ln(16.0);
        let lo = 8.0 - threshold;
        let hi = 8.0 + threshold;
        let choose4 = |j: f64| (j - 1.0) * (j - 2.0) * (j - 3.0) * (j - 4.0) / 24.0;
        let mut oracle = 0.0;
        for j in 5..400u32 {
            let jf = j as f64;
            if jf < lo || jf > hi {
                oracle += choose4(jf) * math::powf(0.5, jf);
            }
        }
        assert!(
            (est.probability - oracle).abs() < 1e-12,
            "{} vs {oracle}",
            est.probability
        );
    }

    #[test]
    fn stopping_tail_degenerate_window() {
        // threshold sqrt(n) ln n >= n/2 for small n: nothing below, a bit above
        let ps = alloc::vec![0.5; 16];
        let est = stopping_tail(&ps, 4, TailMode::Exact, 0).unwrap();
        assert!(est.threshold >= 2.0);
        assert!(est.probability >= 0.0 && est.probability < 1.0);
    }

    #[test]
    fn stopping_tail_monte_carlo_brackets_exact() {
        let ps = alloc::vec![0.5; 64];
        let exact = stopping_tail(&ps, 64, TailMode::Exact, 0).unwrap();
        let mc =
            stopping_tail(&ps, 64, TailMode::MonteCarlo { trials: 200_000 }, 7).unwrap();
        let hw = mc.ci_half_width.unwrap();
        assert!(
            (mc.probability - exact.probability).abs() <= (3.0 * hw).max(5e-5),
            "mc {} exact {} hw {hw}",
            mc.probability,
            exact.probability
        );
    }

    #[test]
    fn char_modulus_endpoints() {
        let ps = alloc::vec![0.5; 8];
        let diag = char_modulus(&ps, &[0.0, core::f64::consts::PI]).unwrap();
        assert!((diag.samples[0].modulus - 1.0).abs() < 1e-14);
        // per factor 1/3 at t = pi
        let expect = math::powf(1.0 / 3.0, 8.0);
        assert!((diag.samples[1].modulus - expect).abs() < 1e-12);
    }

    #[test]
    fn char_quadratic_constant_near_variance_quarter() {
        // Var(l) = 2 for p = 1/2; the paper's kappa is Var/4 = 1/2
        let ps = alloc::vec![0.5; 32];
        let diag = char_modulus(&ps, &[0.1]).unwrap();
        assert!(diag.kappa_hat > 0.0);
        assert!(
            (diag.kappa_hat - 0.5).abs() < 0.15,
            "kappa_hat {} not within 30% of 0.5",
            diag.kappa_hat
        );
        assert!(diag.theta_plateau < 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn convolution_moments_match_segment(seed in 0u64..10_000, len in 1usize..40) {
            let mut state = seed;
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) as f64 / (1u64 << 31) as f64) * 0.8
            };
            let stays: Vec<f64> = (0..len).map(|_| next()).collect();
            let seg = Segment::new(stays, 0.0).unwrap();
            let pmf = convolve_segment(&seg).unwrap();
            prop_assert!((pmf.mean() - seg.expected_time()).abs() < 1e-9);
            prop_assert!((pmf.variance() - seg.time_variance()).abs() < 1e-8);
            let total: f64 = pmf.probs.iter().sum();
            prop_assert!((total + pmf.tail - 1.0).abs() < 1e-12);
        }
    }
}
