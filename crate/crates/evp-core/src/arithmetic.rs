//! Continued-fraction analysis of rotation numbers, empirical Diophantine
//! profiles, and construction of rotation numbers with prescribed rational
//! approximation quality.
//!
//! Rotation values are carried either as exact big rationals or as exact
//! intervals `[lo/den, hi/den]` wide enough to contain the intended value, so
//! every emitted partial quotient is certain. Default working precision is
//! [`DEFAULT_PRECISION_BITS`] bits.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::math;
use crate::{Error, Result};

/// 512 bits keeps Liouville schedules with denominators up to ~10^150 exact.
pub const DEFAULT_PRECISION_BITS: u32 = 512;

/// Safety deduction applied to the raw quotient-growth ratio when estimating
/// the Diophantine type from finitely many convergents.
const TAU_SLACK: f64 = 0.5;

/// Profiles with an estimated type this large are flagged Liouville-like.
/// Bounded-quotient numbers estimate to 0; the factorial-sum truncations
/// already exceed 1 at four terms.
const LIOUVILLE_TAU_THRESHOLD: f64 = 1.0;

/// A rotation value in (0, 1) at extended precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alpha {
    /// Exactly known rational value p/q (0 < p < q, reduced).
    Exact { p: BigUint, q: BigUint },
    /// Value known to lie in `[lo/den, (lo+1)/den]`.
    Interval { lo: BigUint, den: BigUint },
}

impl Alpha {
    /// Exact rational in (0, 1). Reduced on construction.
    pub fn from_rational(p: impl Into<BigUint>, q: impl Into<BigUint>) -> Result<Self> {
        let p = p.into();
        let q = q.into();
        if q.is_zero() || p.is_zero() || p >= q {
            return Err(Error::InvalidInput("rotation value must lie in (0, 1)".into()));
        }
        let g = p.gcd(&q);
        Ok(Alpha::Exact { p: &p / &g, q: &q / &g })
    }

    /// From a double, widened to a 2^-bits interval around it.
    pub fn from_f64(x: f64, bits: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&x) || x == 0.0 {
            return Err(Error::InvalidInput(format!("value {x} outside (0, 1)")));
        }
        let den = BigUint::one() << bits;
        // x < 1, so x * 2^bits fits after splitting into 32-bit chunks.
        let mut lo = BigUint::zero();
        let mut rem = x;
        let mut left = bits;
        while left > 0 {
            let chunk = left.min(32);
            rem *= (1u64 << chunk) as f64;
            let digit = rem as u64;
            rem -= digit as f64;
            lo = (lo << chunk) + BigUint::from(digit);
            left -= chunk;
        }
        Ok(Alpha::Interval { lo, den })
    }

    /// Parse a decimal string `0.d1d2...`; the interval spans one unit in the
    /// last given digit, so no precision is fabricated beyond the input.
    pub fn from_decimal_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let rest = t
            .strip_prefix("0.")
            .or_else(|| t.strip_prefix('.'))
            .ok_or_else(|| Error::InvalidInput(format!("expected 0.ddd… form, got {t:?}")))?;
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidInput(format!("bad decimal digits in {t:?}")));
        }
        let mut lo = BigUint::zero();
        for b in rest.bytes() {
            lo = lo * 10u32 + (b - b'0');
        }
        let den = BigUint::from(10u32).pow(rest.len() as u32);
        if lo.is_zero() || lo >= den {
            return Err(Error::InvalidInput("decimal value must lie in (0, 1)".into()));
        }
        Ok(Alpha::Interval { lo, den })
    }

    /// (sqrt(5) - 1) / 2 at the given precision.
    pub fn golden_mean(bits: u32) -> Self {
        // floor(sqrt(5 * 4^bits)) = floor(sqrt(5) * 2^bits)
        let s = (BigUint::from(5u32) << (2 * bits)).sqrt();
        let lo = s - (BigUint::one() << bits);
        Alpha::Interval { lo, den: BigUint::one() << (bits + 1) }
    }

    /// sqrt(2) - 1 at the given precision.
    pub fn sqrt2_minus_1(bits: u32) -> Self {
        let s = (BigUint::from(2u32) << (2 * bits)).sqrt();
        let lo = s - (BigUint::one() << bits);
        Alpha::Interval { lo, den: BigUint::one() << bits }
    }

    /// Truncated Liouville-type sum `Σ_{n=1..terms} 10^(-n!)`, exact.
    pub fn truncated_factorial_sum(terms: u32) -> Result<Self> {
        if terms == 0 || terms > 5 {
            return Err(Error::InvalidInput("supported truncation range is 1..=5 terms".into()));
        }
        let mut fact = 1u64;
        let mut exps = Vec::new();
        for n in 1..=terms as u64 {
            fact *= n;
            exps.push(fact);
        }
        let max = *exps.last().unwrap();
        let den = BigUint::from(10u32).pow(max as u32);
        let mut num = BigUint::zero();
        for e in exps {
            num += BigUint::from(10u32).pow((max - e) as u32);
        }
        Alpha::from_rational(num, den)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Alpha::Exact { .. })
    }

    /// Exact numerator/denominator when available.
    pub fn as_rational(&self) -> Option<(&BigUint, &BigUint)> {
        match self {
            Alpha::Exact { p, q } => Some((p, q)),
            Alpha::Interval { .. } => None,
        }
    }

    fn endpoints(&self) -> ((BigUint, BigUint), (BigUint, BigUint)) {
        match self {
            Alpha::Exact { p, q } => ((p.clone(), q.clone()), (p.clone(), q.clone())),
            Alpha::Interval { lo, den } => {
                ((lo.clone(), den.clone()), (lo + 1u32, den.clone()))
            }
        }
    }

    /// Best double approximation (midpoint for intervals).
    pub fn to_f64(&self) -> f64 {
        match self {
            Alpha::Exact { p, q } => big_ratio_to_f64(p, q),
            Alpha::Interval { lo, den } => big_ratio_to_f64(&(lo + lo + 1u32), &(den << 1)),
        }
    }

    /// frac(k * alpha) as a double, computed at full precision first.
    pub fn frac_times(&self, k: i64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let ku = BigUint::from(k.unsigned_abs());
        let (num, den) = match self {
            Alpha::Exact { p, q } => ((&ku * p) % q, q.clone()),
            Alpha::Interval { lo, den } => (((&ku * lo) + (&ku >> 1)) % den, den.clone()),
        };
        let f = big_ratio_to_f64(&num, &den);
        if k < 0 {
            if f == 0.0 {
                0.0
            } else {
                1.0 - f
            }
        } else {
            f
        }
    }
}

/// num/den in [0, 1) to f64 via a 64-bit scaled quotient.
fn big_ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    debug_assert!(num < den);
    let t = (num << 64u32) / den;
    t.to_f64().unwrap_or(0.0) / 18446744073709551616.0 // 2^64
}

/// ln of a big natural number, accurate to ~1 ulp relative.
pub(crate) fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let s = x.bits().saturating_sub(53);
    let top = (x >> s).to_f64().unwrap_or(f64::MAX);
    math::ln(top) + s as f64 * core::f64::consts::LN_2
}

/// One convergent p_k / q_k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigUint,
    pub q: BigUint,
}

/// A rotation number with its continued-fraction data.
#[derive(Debug, Clone)]
pub struct RotationNumber {
    alpha: Alpha,
    partial_quotients: Vec<BigUint>,
    convergents: Vec<Convergent>,
    exhausted: bool,
}

impl RotationNumber {
    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    /// Partial quotients a_1, a_2, … actually computed.
    pub fn partial_quotients(&self) -> &[BigUint] {
        &self.partial_quotients
    }

    /// Convergents p_k/q_k for k = 1… matching the partial quotients.
    pub fn convergents(&self) -> &[Convergent] {
        &self.convergents
    }

    pub fn depth(&self) -> usize {
        self.partial_quotients.len()
    }

    /// True when the expansion ended at an exact rational or at the edge of
    /// the working precision.
    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    /// Shorthand for `alpha().frac_times(k)`.
    pub fn frac_times(&self, k: i64) -> f64 {
        self.alpha.frac_times(k)
    }

    pub fn to_f64(&self) -> f64 {
        self.alpha.to_f64()
    }
}

/// Continued-fraction expansion to the requested depth.
///
/// Emits only partial quotients that are certain at the working precision;
/// if the value turns rational (or the precision runs out) before `depth`
/// quotients are known, the expansion fails with the last exact convergent.
pub fn continued_fraction(alpha: &Alpha, depth: usize) -> Result<RotationNumber> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be >= 1".into()));
    }
    let rot = expand(alpha, depth);
    if rot.depth() < depth {
        let (p, q) = match rot.convergents.last() {
            Some(c) => (c.p.to_string(), c.q.to_string()),
            None => ("0".to_string(), "1".to_string()),
        };
        return Err(Error::RationalAtPrecision { depth: rot.depth(), p, q });
    }
    Ok(rot)
}

/// Like [`continued_fraction`] but returns whatever depth was achievable.
pub fn expand_to_exhaustion(alpha: &Alpha, max_depth: usize) -> RotationNumber {
    expand(alpha, max_depth)
}

fn expand(alpha: &Alpha, depth: usize) -> RotationNumber {
    // Interval endpoints as fractions in (0, 1); quotients are emitted while
    // both endpoints agree on floor(1/x). Exact inputs carry two identical
    // endpoints and stop only at a zero remainder.
    let ((mut lo_n, mut lo_d), (mut hi_n, mut hi_d)) = alpha.endpoints();
    let exact = alpha.is_exact();

    let mut quotients: Vec<BigUint> = Vec::new();
    let mut convergents: Vec<Convergent> = Vec::new();
    let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
    let (mut p_cur, mut q_cur) = (BigUint::zero(), BigUint::one());
    let mut exhausted = true;

    while quotients.len() < depth {
        if lo_n.is_zero() || hi_n.is_zero() {
            break; // rational endpoint reached
        }
        // 1/x in [hi_d/hi_n, lo_d/lo_n]
        let (a_min, r_min) = hi_d.div_rem(&hi_n);
        let (a_max, r_max) = lo_d.div_rem(&lo_n);
        let certain = exact || a_min == a_max;
        let a = a_min.clone();
        if !certain || a.is_zero() {
            break;
        }
        if exact && r_min.is_zero() {
            // final quotient of a rational value
            push_convergent(&a, &mut p_prev, &mut q_prev, &mut p_cur, &mut q_cur);
            quotients.push(a);
            convergents.push(Convergent { p: p_cur.clone(), q: q_cur.clone() });
            break;
        }
        push_convergent(&a, &mut p_prev, &mut q_prev, &mut p_cur, &mut q_cur);
        quotients.push(a);
        convergents.push(Convergent { p: p_cur.clone(), q: q_cur.clone() });

        // x' = 1/x - a, which swaps the endpoint order
        let new_lo = (r_min.clone(), hi_n.clone());
        let new_hi = (r_max, lo_n.clone());
        lo_n = new_lo.0;
        lo_d = new_lo.1;
        hi_n = new_hi.0;
        hi_d = new_hi.1;
        if quotients.len() == depth {
            exhausted = false;
        }
    }

    RotationNumber { alpha: alpha.clone(), partial_quotients: quotients, convergents, exhausted }
}

fn push_convergent(
    a: &BigUint,
    p_prev: &mut BigUint,
    q_prev: &mut BigUint,
    p_cur: &mut BigUint,
    q_cur: &mut BigUint,
) {
    let p_new = a * &*p_cur + &*p_prev;
    let q_new = a * &*q_cur + &*q_prev;
    *p_prev = core::mem::replace(p_cur, p_new);
    *q_prev = core::mem::replace(q_cur, q_new);
}

/// Empirical Diophantine profile measured from the computed convergents.
#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineProfile {
    /// min over computed k of q_k^(2+tau) |alpha - p_k/q_k|.
    pub c_est: f64,
    /// max(0, max_k ln a_{k+1} / ln q_k - slack), observed data only.
    pub tau_est: f64,
    /// Lowest integer strictly above 1 + tau_est.
    pub m0: u32,
    /// Number of convergents the estimates are based on.
    pub witness_depth: usize,
    /// Flag set when tau_est is large enough to suggest Liouville behavior.
    pub liouville_like: bool,
}

/// Estimate (c, tau) of the approximation inequality
/// `|alpha - p/q| >= c / q^(2+tau)` from the expansion, empirical at the
/// witnessed depth.
pub fn diophantine_profile(rot: &RotationNumber) -> Result<DiophantineProfile> {
    let conv = rot.convergents();
    if conv.len() < 3 {
        return Err(Error::InsufficientDepth { have: conv.len(), need: 3 });
    }
    let quots = rot.partial_quotients();

    let mut max_ratio = 0.0f64;
    for k in 2..conv.len() {
        // ratio for convergent index k uses the following quotient a_{k+1}
        if k >= quots.len() {
            break;
        }
        let q_k = &conv[k - 1].q;
        if q_k <= &BigUint::one() {
            continue;
        }
        let ratio = ln_big(&quots[k]) / ln_big(q_k);
        if ratio > max_ratio {
            max_ratio = ratio;
        }
    }
    let tau_est = (max_ratio - TAU_SLACK).max(0.0);
    let m0 = (math::floor(1.0 + tau_est) as u32) + 1;

    // ln |alpha - p_k/q_k| = ln |q_k alpha - p_k| - ln q_k, with the
    // difference bounded by consecutive-convergent denominators.
    let mut min_log_c = f64::INFINITY;
    for c in conv {
        let log_c = (2.0 + tau_est) * ln_big(&c.q) + ln_abs_diff(rot.alpha(), &c.p, &c.q);
        if log_c < min_log_c {
            min_log_c = log_c;
        }
    }

    Ok(DiophantineProfile {
        c_est: math::exp(min_log_c),
        tau_est,
        m0,
        witness_depth: conv.len(),
        liouville_like: tau_est >= LIOUVILLE_TAU_THRESHOLD,
    })
}

/// ln |alpha - p/q| via exact big-integer cross multiplication.
pub(crate) fn ln_abs_diff(alpha: &Alpha, p: &BigUint, q: &BigUint) -> f64 {
    let ((lo_n, lo_d), (hi_n, hi_d)) = alpha.endpoints();
    // alpha - p/q at both endpoints: (n*q - p*d) / (d*q)
    let num_at = |n: &BigUint, d: &BigUint| -> (bool, BigUint) {
        let a = n * q;
        let b = p * d;
        if a >= b {
            (true, a - b)
        } else {
            (false, b - a)
        }
    };
    let (s_lo, n_lo) = num_at(&lo_n, &lo_d);
    let (s_hi, n_hi) = num_at(&hi_n, &hi_d);
    if s_lo != s_hi {
        // interval straddles p/q; the difference is below the precision
        return ln_big(&BigUint::one()) - ln_big(&(&lo_d * q)) - 64.0 * core::f64::consts::LN_2;
    }
    // take the smaller endpoint difference (the certified lower bound)
    let (n, d) = if &n_lo * &hi_d <= &n_hi * &lo_d { (n_lo, &lo_d * q) } else { (n_hi, &hi_d * q) };
    ln_big(&n) - ln_big(&d)
}

/// One stage of a scheduled Liouville approximation.
#[derive(Debug, Clone)]
pub struct ScheduleStage {
    /// 1-based stage index.
    pub index: usize,
    pub p: BigUint,
    pub q: BigUint,
    pub gamma: f64,
    /// `|q alpha - p| < 1/(16 q^gamma)` verified (exactly for integer gamma,
    /// with a certified margin otherwise).
    pub verified: bool,
    /// ln |q alpha - p|, for reporting.
    pub ln_error: f64,
}

/// Result of the greedy schedule construction.
#[derive(Debug, Clone)]
pub struct LiouvilleSchedule {
    pub rotation: RotationNumber,
    pub stages: Vec<ScheduleStage>,
    /// Set when the precision budget ended the construction early.
    pub truncated_at: Option<usize>,
}

/// Options for [`liouville_alpha`].
#[derive(Debug, Clone, Default)]
pub struct LiouvilleOptions {
    /// Enforce q_n^(-sqrt(n+1)) < 0.001 q_(n-1)^(-sqrt(n)) between stages.
    pub enforce_growth: bool,
    /// Partial quotients that must be used verbatim before the builder may
    /// choose its own. Infeasible pins produce a stage error.
    pub seed_quotients: Vec<u64>,
    /// Precision budget in bits for the final denominator (default 512).
    pub precision_bits: Option<u32>,
}

/// Build a rotation number whose convergents satisfy
/// `|q_n alpha - p_n| < 1/(16 q_n^gamma_n)` at every scheduled stage, for
/// every admissible continuation of the expansion.
///
/// Stage n pins convergent n; the builder then appends the smallest next
/// partial quotient making the stage inequality (and, when asked, the
/// growth condition) certain. The returned value is the exact final
/// convergent, so every scheduled inequality is verifiable in integer
/// arithmetic.
pub fn liouville_alpha(
    gammas: &[f64],
    q_min: u64,
    opts: &LiouvilleOptions,
) -> Result<LiouvilleSchedule> {
    if gammas.is_empty() {
        return Err(Error::InvalidInput("at least one stage required".into()));
    }
    if gammas.windows(2).any(|w| w[1] < w[0]) || gammas[0] < 2.0 {
        return Err(Error::InvalidInput("gammas must be nondecreasing and >= 2".into()));
    }
    if q_min < 2 {
        return Err(Error::InvalidInput("q_min must be >= 2".into()));
    }
    let bits_budget = opts.precision_bits.unwrap_or(DEFAULT_PRECISION_BITS) as u64;

    let stages_n = gammas.len();
    let mut quotients: Vec<BigUint> = Vec::new();
    let mut convs: Vec<Convergent> = Vec::new();
    let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
    let (mut p_cur, mut q_cur) = (BigUint::zero(), BigUint::one());

    let push = |a: BigUint,
                    quotients: &mut Vec<BigUint>,
                    convs: &mut Vec<Convergent>,
                    p_prev: &mut BigUint,
                    q_prev: &mut BigUint,
                    p_cur: &mut BigUint,
                    q_cur: &mut BigUint| {
        push_convergent(&a, p_prev, q_prev, p_cur, q_cur);
        quotients.push(a);
        convs.push(Convergent { p: p_cur.clone(), q: q_cur.clone() });
    };

    // a_1: pinned by seed or q_min
    let first = opts.seed_quotients.first().copied().unwrap_or(q_min);
    push(
        BigUint::from(first),
        &mut quotients,
        &mut convs,
        &mut p_prev,
        &mut q_prev,
        &mut p_cur,
        &mut q_cur,
    );

    let mut truncated_at = None;
    for (i, &gamma) in gammas.iter().enumerate() {
        let n = i + 1;
        let (qn, _pn) = (convs[n - 1].q.clone(), convs[n - 1].p.clone());

        // threshold: q_{n+1} must strictly exceed 16 q_n^gamma (and the
        // growth threshold for the next stage when enforced)
        let mut threshold = pow_big_ceil(&qn, gamma)? * 16u32;
        if opts.enforce_growth && n < stages_n {
            // growth couples q_{n+1} (stage n+1 denominator) to q_n:
            // q_{n+1}^sqrt(n+2) > 1000 q_n^sqrt(n+1)
            let ln_needed = (math::ln(1000.0)
                + math::sqrt((n + 1) as f64) * ln_big(&qn))
                / math::sqrt((n + 2) as f64);
            let growth_floor = exp_big_ceil(ln_needed + 1e-9);
            if growth_floor > threshold {
                threshold = growth_floor;
            }
        }

        if threshold.bits() > bits_budget {
            truncated_at = Some(n);
            break;
        }

        // smallest a with a*q_n + q_{n-1} > threshold
        let prev_q = if n >= 2 { convs[n - 2].q.clone() } else { BigUint::one() };
        let need = if threshold >= prev_q { &threshold - &prev_q } else { BigUint::zero() };
        let mut a = (&need / &qn) + 1u32;

        if let Some(&pinned) = opts.seed_quotients.get(n) {
            let pinned = BigUint::from(pinned);
            if pinned < a {
                return Err(Error::StagePreconditionFailed {
                    stage: n,
                    detail: format!(
                        "seed quotient {pinned} cannot satisfy |q alpha - p| < 1/(16 q^{gamma})"
                    ),
                });
            }
            a = pinned;
        }
        push(a, &mut quotients, &mut convs, &mut p_prev, &mut q_prev, &mut p_cur, &mut q_cur);
    }

    let completed = truncated_at.map(|t| t - 1).unwrap_or(stages_n);
    if completed == 0 {
        return Err(Error::ScheduleTruncated { completed: 0, requested: stages_n });
    }

    // guard quotient: keep the final denominator above the spectral bands
    // used downstream, so no mode of a working-degree function resonates.
    // Stage inequalities only tighten (the error drops below 1/q_{n+1}).
    let guard_floor = BigUint::one() << 22;
    if truncated_at.is_none() && q_cur < guard_floor {
        let a = (&guard_floor - &q_prev) / &q_cur + 1u32;
        push(a, &mut quotients, &mut convs, &mut p_prev, &mut q_prev, &mut p_cur, &mut q_cur);
    }

    // alpha := exact final convergent; verify every completed stage
    let alpha = Alpha::from_rational(p_cur.clone(), q_cur.clone())?;
    let mut stages = Vec::with_capacity(completed);
    for n in 1..=completed {
        let c = &convs[n - 1];
        let gamma = gammas[n - 1];
        let verified = stage_inequality_holds(&alpha, &c.p, &c.q, gamma);
        stages.push(ScheduleStage {
            index: n,
            p: c.p.clone(),
            q: c.q.clone(),
            gamma,
            verified,
            ln_error: ln_abs_diff(&alpha, &c.p, &c.q) + ln_big(&c.q),
        });
    }

    let rotation = expand_to_exhaustion(&alpha, quotients.len());
    Ok(LiouvilleSchedule { rotation, stages, truncated_at })
}

/// Check `|q alpha - p| < 1/(16 q^gamma)` for exact alpha.
///
/// Integer gamma goes through exact cross multiplication; fractional gamma
/// through logs with a 1e-9 certified margin.
pub fn stage_inequality_holds(alpha: &Alpha, p: &BigUint, q: &BigUint, gamma: f64) -> bool {
    let Some((ap, aq)) = alpha.as_rational() else {
        return false;
    };
    // |q alpha - p| = |q*ap - p*aq| / aq
    let a = q * ap;
    let b = p * aq;
    let num = if a >= b { a - b } else { b - a };
    if gamma == math::floor(gamma) && gamma <= 64.0 {
        // 16 q^gamma * num < aq, exactly
        let lhs = q.pow(gamma as u32) * 16u32 * &num;
        lhs < *aq
    } else {
        let lhs = math::ln(16.0) + gamma * ln_big(q) + ln_big(&num);
        lhs < ln_big(aq) - 1e-9
    }
}

/// Smallest BigUint >= q^gamma (exact for integer gamma).
fn pow_big_ceil(q: &BigUint, gamma: f64) -> Result<BigUint> {
    if gamma == math::floor(gamma) && (2.0..=64.0).contains(&gamma) {
        return Ok(q.pow(gamma as u32));
    }
    if gamma < 2.0 || gamma.is_nan() {
        return Err(Error::InvalidInput("gamma must be >= 2".into()));
    }
    Ok(exp_big_ceil(gamma * ln_big(q) + 1e-9))
}

/// Smallest BigUint with ln above `ln_target` plus rounding headroom.
fn exp_big_ceil(ln_target: f64) -> BigUint {
    if ln_target <= 0.0 {
        return BigUint::one();
    }
    let bits = ln_target / core::f64::consts::LN_2;
    let whole = math::floor(bits) as u64;
    let frac_part = bits - whole as f64;
    // top 32 bits of 2^frac, rounded up
    let top = math::ceil(math::exp(frac_part * core::f64::consts::LN_2) * (1u64 << 32) as f64)
        as u64
        + 2;
    if whole >= 32 {
        (BigUint::from(top)) << (whole - 32)
    } else {
        BigUint::from(top) >> (32 - whole as u32 as u64)
    }
}

/// A circle point with an exact rational representative in [0, 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoint {
    num: BigUint,
    den: BigUint,
}

impl RationalPoint {
    pub fn new(num: impl Into<BigUint>, den: impl Into<BigUint>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let num = num.into() % &den;
        Ok(RationalPoint { num, den })
    }

    pub fn to_f64(&self) -> f64 {
        big_ratio_to_f64(&self.num, &self.den)
    }

    /// x + m*alpha mod 1, exact (requires exact alpha).
    pub fn add_multiple(&self, alpha: &Alpha, m: i64) -> Result<RationalPoint> {
        let (ap, aq) = alpha
            .as_rational()
            .ok_or_else(|| Error::InvalidInput("exact alpha required".into()))?;
        let den = &self.den * aq;
        let base = &self.num * aq;
        let step = (&self.den * ap) * BigUint::from(m.unsigned_abs());
        let num = if m >= 0 {
            (base + step) % &den
        } else {
            let s = &step % &den;
            ((base + &den) - s) % &den
        };
        Ok(RationalPoint { num, den })
    }

    /// Exact test: dist(x, {j/q : j}) < radius_num / (radius_den * q).
    ///
    /// With x = a/b the distance is min(r, b - r)/(b q) for r = (q a) mod b,
    /// so the comparison reduces to integers.
    pub fn lattice_dist_less_than(&self, q: u64, radius_num: u64, radius_den: u64) -> bool {
        let r = (&self.num * BigUint::from(q)) % &self.den;
        let m = core::cmp::min(r.clone(), &self.den - &r);
        // m / b < radius_num / radius_den  <=>  m * radius_den < b * radius_num
        m * BigUint::from(radius_den) < &self.den * BigUint::from(radius_num)
    }

    /// Distance to the lattice {j/q} as f64 (for reporting).
    pub fn lattice_dist_f64(&self, q: u64) -> f64 {
        let r = (&self.num * BigUint::from(q)) % &self.den;
        let m = core::cmp::min(r.clone(), &self.den - &r);
        big_ratio_to_f64(&m, &self.den) / q as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn biguint(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn golden_mean_has_all_ones() {
        let alpha = Alpha::golden_mean(DEFAULT_PRECISION_BITS);
        let rot = continued_fraction(&alpha, 8).unwrap();
        assert_eq!(rot.depth(), 8);
        for a in rot.partial_quotients() {
            assert_eq!(*a, BigUint::one());
        }
        // Fibonacci convergents 1/1, 1/2, 2/3, 3/5, 5/8, ...
        let fib = [(1u64, 1u64), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13), (13, 21), (21, 34)];
        for (c, (p, q)) in rot.convergents().iter().zip(fib) {
            assert_eq!(c.p, biguint(p));
            assert_eq!(c.q, biguint(q));
        }
    }

    #[test]
    fn sqrt2_minus_1_has_all_twos() {
        let alpha = Alpha::sqrt2_minus_1(256);
        let rot = continued_fraction(&alpha, 6).unwrap();
        for a in rot.partial_quotients() {
            assert_eq!(*a, biguint(2));
        }
    }

    #[test]
    fn convergent_recurrence_and_alternation() {
        let alpha = Alpha::golden_mean(256);
        let rot = continued_fraction(&alpha, 12).unwrap();
        let conv = rot.convergents();
        // q_{k+1} = a_{k+1} q_k + q_{k-1}, alternating determinant
        for k in 1..conv.len() - 1 {
            let expect =
                rot.partial_quotients()[k + 1].clone() * &conv[k].q + &conv[k - 1].q;
            assert_eq!(conv[k + 1].q, expect);
        }
        for k in 0..conv.len() - 1 {
            // p_{k+1} q_k - p_k q_{k+1} = +-1
            let lhs = &conv[k + 1].p * &conv[k].q;
            let rhs = &conv[k].p * &conv[k + 1].q;
            let det = if lhs > rhs { lhs - rhs } else { rhs - lhs };
            assert_eq!(det, BigUint::one());
        }
        // q strictly increasing
        for k in 1..conv.len() {
            assert!(conv[k].q > conv[k - 1].q);
        }
    }

    #[test]
    fn convergents_obey_next_denominator_bound() {
        // |q_k alpha - p_k| < 1/q_{k+1}
        let alpha = Alpha::sqrt2_minus_1(256);
        let rot = continued_fraction(&alpha, 10).unwrap();
        let conv = rot.convergents();
        for k in 0..conv.len() - 1 {
            let ln_err = ln_abs_diff(&alpha, &conv[k].p, &conv[k].q) + ln_big(&conv[k].q);
            assert!(
                ln_err < -ln_big(&conv[k + 1].q) + 1e-9,
                "k={k}: ln|q alpha - p| = {ln_err}"
            );
        }
    }

    #[test]
    fn rational_value_errors_with_last_convergent() {
        let alpha = Alpha::from_rational(biguint(13u64), biguint(21u64)).unwrap();
        let err = continued_fraction(&alpha, 20).unwrap_err();
        match err {
            Error::RationalAtPrecision { depth, p, q } => {
                assert!(depth < 20);
                assert_eq!(p, "13");
                assert_eq!(q, "21");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn decimal_interval_stops_at_its_information() {
        let alpha = Alpha::from_decimal_str("0.6180").unwrap();
        let rot = expand_to_exhaustion(&alpha, 50);
        assert!(rot.exhausted());
        assert!(rot.depth() >= 3 && rot.depth() < 20);
        for a in rot.partial_quotients().iter().take(4) {
            assert_eq!(*a, BigUint::one());
        }
    }

    #[test]
    fn profile_golden_and_sqrt2_are_type_zero() {
        for alpha in [Alpha::golden_mean(256), Alpha::sqrt2_minus_1(256)] {
            let rot = continued_fraction(&alpha, 12).unwrap();
            let prof = diophantine_profile(&rot).unwrap();
            assert_eq!(prof.tau_est, 0.0);
            assert_eq!(prof.m0, 2);
            assert!(!prof.liouville_like);
            assert!(prof.c_est > 0.0);
            // brute force: every convergent respects |alpha - p/q| >= c/q^2
            for c in rot.convergents() {
                let ln_gap = ln_abs_diff(&alpha, &c.p, &c.q);
                let ln_bound = math::ln(prof.c_est) - 2.0 * ln_big(&c.q);
                assert!(ln_gap >= ln_bound - 1e-9);
            }
        }
    }

    #[test]
    fn profile_flags_truncated_liouville() {
        let alpha = Alpha::truncated_factorial_sum(4).unwrap();
        let rot = expand_to_exhaustion(&alpha, 40);
        assert!(rot.depth() >= 4);
        let prof = diophantine_profile(&rot).unwrap();
        assert!(prof.tau_est > 1.0, "tau_est = {}", prof.tau_est);
        assert!(prof.liouville_like);
        assert!(prof.m0 >= 3);
    }

    #[test]
    fn profile_is_monotone_in_depth() {
        let alpha = Alpha::truncated_factorial_sum(4).unwrap();
        let full = expand_to_exhaustion(&alpha, 40);
        let mut last_tau = -1.0;
        for d in 3..full.depth() {
            let rot = continued_fraction(&alpha, d).unwrap();
            let prof = diophantine_profile(&rot).unwrap();
            assert!(prof.tau_est >= last_tau - 1e-12, "depth {d}");
            last_tau = prof.tau_est;
        }
    }

    #[test]
    fn giant_quotient_indices_approximate_superquadratically() {
        // The factorial-sum truncation exhibits super-exponential quotient
        // growth, and at every giant-quotient index the local approximation
        // exponent gamma_k in |q_k alpha - p_k| < 1/(16 q_k^gamma_k) clears
        // 2.5 (computed 2.80 at q = 10^6 and 3.95 at q = 10^24).
        let alpha = Alpha::truncated_factorial_sum(5).unwrap();
        let rot = expand_to_exhaustion(&alpha, 60);
        let conv = rot.convergents();
        let quots = rot.partial_quotients();
        assert!(quots.iter().any(|a| a.bits() > 30), "no super-exponential jump");
        let mut witnessed = 0;
        for k in 0..conv.len() - 1 {
            let giant = ln_big(&quots[k + 1]) > math::ln(16.0) + ln_big(&conv[k].q);
            if !giant {
                continue;
            }
            let ln_err = ln_abs_diff(&alpha, &conv[k].p, &conv[k].q) + ln_big(&conv[k].q);
            let gamma = (-ln_err - math::ln(16.0)) / ln_big(&conv[k].q);
            assert!(gamma >= 2.5, "index {}: gamma = {gamma}", k + 1);
            witnessed += 1;
        }
        assert!(witnessed >= 2, "expected giant-quotient stages, saw {witnessed}");
    }

    #[test]
    fn two_stage_schedule_verifies_exactly() {
        let sched =
            liouville_alpha(&[2.0, 3.0], 2, &LiouvilleOptions::default()).unwrap();
        assert!(sched.truncated_at.is_none());
        assert_eq!(sched.stages.len(), 2);
        for st in &sched.stages {
            assert!(st.verified, "stage {} failed", st.index);
        }
        // re-feeding reproduces the schedule convergents exactly
        let depth = sched.rotation.depth();
        let refed = continued_fraction(sched.rotation.alpha(), depth).unwrap();
        for st in &sched.stages {
            let c = &refed.convergents()[st.index - 1];
            assert_eq!(c.p, st.p);
            assert_eq!(c.q, st.q);
        }
    }

    #[test]
    fn growth_condition_enforced_when_requested() {
        let opts = LiouvilleOptions { enforce_growth: true, ..Default::default() };
        let sched = liouville_alpha(&[2.0, 3.0], 2, &opts).unwrap();
        let q1 = &sched.stages[0].q;
        let q2 = &sched.stages[1].q;
        let lhs = -math::sqrt(3.0) * ln_big(q2);
        let rhs = math::ln(0.001) - math::sqrt(2.0) * ln_big(q1);
        assert!(lhs < rhs, "growth: {lhs} !< {rhs}");
    }

    #[test]
    fn golden_seed_makes_stages_infeasible() {
        let opts = LiouvilleOptions {
            seed_quotients: alloc::vec![1; 40],
            ..Default::default()
        };
        let err = liouville_alpha(&[2.0], 2, &opts).unwrap_err();
        assert!(matches!(err, Error::StagePreconditionFailed { stage: 1, .. }));
    }

    #[test]
    fn frac_times_matches_f64_for_small_k() {
        let alpha = Alpha::golden_mean(256);
        let a = alpha.to_f64();
        for k in [-7i64, -1, 1, 2, 5, 12] {
            let direct = math::frac(k as f64 * a);
            let precise = alpha.frac_times(k);
            assert!(
                (direct - precise).abs() < 1e-9 || (1.0 - (direct - precise).abs()) < 1e-9,
                "k={k}: {direct} vs {precise}"
            );
        }
    }

    #[test]
    fn rational_point_distance_exact_threshold() {
        let x = RationalPoint::new(biguint(17), biguint(64)).unwrap(); // dist to {j/4} is 1/64
        assert!(!x.lattice_dist_less_than(4, 1, 16)); // 1/64 < 1/64 is false (strict)
        assert!(x.lattice_dist_less_than(4, 1, 8)); // 1/64 < 1/32
        assert!((x.lattice_dist_f64(4) - 1.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn rational_point_add_multiple_wraps() {
        let alpha = Alpha::from_rational(biguint(3), biguint(7)).unwrap();
        let x = RationalPoint::new(biguint(5), biguint(7)).unwrap();
        let y = x.add_multiple(&alpha, 2).unwrap(); // 5/7 + 6/7 = 11/7 = 4/7
        assert!((y.to_f64() - 4.0 / 7.0).abs() < 1e-15);
        let z = x.add_multiple(&alpha, -2).unwrap(); // 5/7 - 6/7 = -1/7 = 6/7
        assert!((z.to_f64() - 6.0 / 7.0).abs() < 1e-15);
    }
}
