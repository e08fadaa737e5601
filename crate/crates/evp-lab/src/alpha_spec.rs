//! Parsing of rotation-number specifications from the command line.
//!
//! Accepted forms:
//! - `golden` — (sqrt(5) - 1)/2
//! - `sqrt2-1` — sqrt(2) - 1
//! - `liouville:N` — the truncated factorial sum `Σ_{n<=N} 10^(-n!)`
//! - `schedule:g1,g2,...` — a scheduled Liouville number built greedily for
//!   the given stage exponents (growth condition enforced)
//! - `p/q` — an exact rational (rational-at-precision behavior downstream)
//! - `0.dddd` — a decimal, carried as an interval one ulp wide in the last
//!   given digit

use anyhow::{anyhow, Context, Result};
use evp_core::arithmetic::{
    expand_to_exhaustion, liouville_alpha, Alpha, LiouvilleOptions, LiouvilleSchedule,
    RotationNumber,
};

pub struct ParsedAlpha {
    pub rotation: RotationNumber,
    /// Present when the value came from a greedy schedule.
    pub schedule: Option<LiouvilleSchedule>,
}

pub fn parse_alpha(spec: &str, depth: usize, precision_bits: u32) -> Result<ParsedAlpha> {
    let spec = spec.trim();
    let alpha = match spec {
        "golden" => Alpha::golden_mean(precision_bits),
        "sqrt2-1" | "sqrt2m1" => Alpha::sqrt2_minus_1(precision_bits),
        other => {
            if let Some(rest) = other.strip_prefix("liouville:") {
                let terms: u32 = rest.parse().context("liouville term count")?;
                Alpha::truncated_factorial_sum(terms)?
            } else if let Some(rest) = other.strip_prefix("schedule:") {
                let gammas: Vec<f64> = rest
                    .split(',')
                    .map(|t| t.trim().parse::<f64>().context("schedule gamma"))
                    .collect::<Result<_>>()?;
                let opts = LiouvilleOptions {
                    enforce_growth: true,
                    precision_bits: Some(precision_bits),
                    ..Default::default()
                };
                let sched = liouville_alpha(&gammas, 2, &opts)?;
                return Ok(ParsedAlpha {
                    rotation: sched.rotation.clone(),
                    schedule: Some(sched),
                });
            } else if let Some((p, q)) = other.split_once('/') {
                let p: u64 = p.trim().parse().context("rational numerator")?;
                let q: u64 = q.trim().parse().context("rational denominator")?;
                Alpha::from_rational(p, q)?
            } else if other.starts_with("0.") || other.starts_with('.') {
                Alpha::from_decimal_str(other)?
            } else {
                return Err(anyhow!(
                    "unrecognized alpha spec {other:?} (expected golden, sqrt2-1, \
                     liouville:N, schedule:g1,g2,..., p/q, or a decimal)"
                ));
            }
        }
    };
    let rotation = expand_to_exhaustion(&alpha, depth);
    if rotation.depth() == 0 {
        return Err(anyhow!("no partial quotients could be computed for {spec:?}"));
    }
    Ok(ParsedAlpha { rotation, schedule: None })
}
