//! The slow-mixing construction: support sets G_q^+/- around the rational
//! lattice, certificates that E_x cos(2 pi q X_qtilde) escapes past
//! +-sqrt(2)/2 on them, the inductively built observable phi = sum phi_n,
//! and witness tables for the polynomial lower bound on the mixing gap.
//!
//! Support membership and reachability checks run in exact rational
//! arithmetic: with the scheduled alpha an exact rational, the distance of
//! x + m alpha to the lattice {j/q} is an integer comparison, so the
//! deterministic part of the certificate carries zero tolerance.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::arithmetic::{
    stage_inequality_holds, LiouvilleSchedule, RationalPoint, ScheduleStage,
};
use crate::environment::Environment;
use crate::math;
use crate::periodic::PeriodicFunction;
use crate::walk::{evolve_exact, NuEstimate};
use crate::{Error, Result};

/// Exhaustive reachability checks run while qtilde stays below this.
pub const SUPPORT_CHECK_CAP: u64 = 1 << 20;

/// sqrt(2)/2, the Lemma escape level.
pub const ESCAPE_LEVEL: f64 = core::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportSign {
    Plus,
    Minus,
}

/// Union of q arcs of radius 1/(16q) around {j/q} (sign +) or its
/// half-cell shift (sign -). Total Lebesgue measure exactly 1/8.
#[derive(Debug, Clone, Copy)]
pub struct SupportSet {
    pub q: u64,
    pub sign: SupportSign,
}

impl SupportSet {
    pub fn pair(q: u64) -> (SupportSet, SupportSet) {
        (
            SupportSet { q, sign: SupportSign::Plus },
            SupportSet { q, sign: SupportSign::Minus },
        )
    }

    /// 2q * (1/(16q)) = 1/8, independent of q.
    pub fn measure(&self) -> f64 {
        0.125
    }

    /// Exact membership: distance of (x - shift) to {j/q} below 1/(16q).
    pub fn contains(&self, x: &RationalPoint) -> Result<bool> {
        let probe = self.unshift(x)?;
        Ok(probe.lattice_dist_less_than(self.q, 1, 16))
    }

    fn unshift(&self, x: &RationalPoint) -> Result<RationalPoint> {
        match self.sign {
            SupportSign::Plus => Ok(x.clone()),
            SupportSign::Minus => {
                // x - 1/(2q) mod 1
                let half_cell =
                    crate::arithmetic::Alpha::from_rational(1u64, 2 * self.q)?;
                x.add_multiple(&half_cell, -1)
            }
        }
    }

    /// Evenly spaced exact rational points strictly inside every arc.
    pub fn sample_points(&self, per_arc: usize) -> Result<Vec<RationalPoint>> {
        let q = self.q;
        let p1 = per_arc as u64 + 1;
        let den = BigUint::from(16 * q) * BigUint::from(p1);
        let mut pts = Vec::with_capacity(per_arc * q as usize);
        for j in 0..q {
            // center j/q (+ 1/(2q) for the minus set)
            let center_num = match self.sign {
                SupportSign::Plus => BigUint::from(16 * j) * BigUint::from(p1),
                SupportSign::Minus => {
                    BigUint::from(16 * j) * BigUint::from(p1) + BigUint::from(8u64) * BigUint::from(p1)
                }
            };
            for i in 0..per_arc as u64 {
                // offset (2(i+1) - (P+1)) / (16 q (P+1)) in (-1/(16q), 1/(16q))
                let two_i = 2 * (i + 1);
                let num = if two_i >= p1 {
                    &center_num + BigUint::from(two_i - p1)
                } else {
                    // subtract mod the full circle
                    let deficit = BigUint::from(p1 - two_i);
                    (&center_num + &den) - deficit
                };
                pts.push(RationalPoint::new(num % &den, den.clone())?);
            }
        }
        Ok(pts)
    }
}

/// Outcome of the Lemma certificate at one point.
#[derive(Debug, Clone)]
pub struct LemmaCertificate {
    pub q: u64,
    pub gamma: f64,
    pub qtilde: u64,
    /// Which support set the point belongs to, if any.
    pub membership: Option<SupportSign>,
    /// Every reachable x + m alpha, |m| <= qtilde, lies within 1/(8q) of
    /// the lattice; checked exhaustively in exact arithmetic when feasible.
    pub support_check: bool,
    /// Exhaustive enumeration ran (as opposed to the triangle bound alone).
    pub exhaustive: bool,
    /// Exact E_x cos(2 pi q X_qtilde) when qtilde fits the DP cap.
    pub expectation: Option<f64>,
    /// Expectation escapes past +sqrt(2)/2 (plus set) or -sqrt(2)/2
    /// (minus set); only asserted for members.
    pub bound_holds: Option<bool>,
}

/// qtilde = floor(q^(gamma - 1)) for integer gamma.
fn qtilde_of(q: u64, gamma: f64) -> Result<u64> {
    if gamma < 2.0 || gamma != math::floor(gamma) {
        return Err(Error::InvalidInput(
            "certificates require integer gamma >= 2".into(),
        ));
    }
    let e = gamma as u32 - 1;
    BigUint::from(q)
        .pow(e)
        .to_u64()
        .ok_or_else(|| Error::InvalidInput("qtilde exceeds u64".into()))
}

/// Escape certificate at a single exact point: the scheduled inequality,
/// the reachability of the eighth-cell neighborhood, and the exact
/// expectation of cos(2 pi q X_qtilde) past the escape level.
pub fn lemma_certificate(
    env: &Environment,
    stage: &ScheduleStage,
    x: &RationalPoint,
    dp_cap: u64,
) -> Result<LemmaCertificate> {
    let alpha = env.alpha().alpha();
    let q = stage
        .q
        .to_u64()
        .ok_or_else(|| Error::InvalidInput("stage q exceeds u64".into()))?;
    if !stage_inequality_holds(alpha, &stage.p, &stage.q, stage.gamma) {
        return Err(Error::StagePreconditionFailed {
            stage: stage.index,
            detail: "scheduled inequality |q alpha - p| < 1/(16 q^gamma) failed".into(),
        });
    }
    let qtilde = qtilde_of(q, stage.gamma)?;
    let (plus, minus) = SupportSet::pair(q);
    let membership = if plus.contains(x)? {
        Some(SupportSign::Plus)
    } else if minus.contains(x)? {
        Some(SupportSign::Minus)
    } else {
        None
    };

    // triangle certificate: dist(x, L) < 1/(16q) and
    // qtilde |alpha - p/q| < 1/(16q) give dist(x + m alpha, L) < 1/(8q)
    let base = match membership {
        Some(SupportSign::Plus) => Some(x.clone()),
        Some(SupportSign::Minus) => Some(plus_probe(x, q)?),
        None => None,
    };
    let mut support_check = false;
    let mut exhaustive = false;
    if let Some(probe) = base {
        support_check = triangle_certificate(alpha, &probe, stage, q, qtilde)?;
        if qtilde <= SUPPORT_CHECK_CAP {
            exhaustive = true;
            for m in -(qtilde as i64)..=(qtilde as i64) {
                let y = probe.add_multiple(alpha, m)?;
                if !y.lattice_dist_less_than(q, 1, 8) {
                    support_check = false;
                    break;
                }
            }
        }
    }

    // exact expectation when the DP fits
    let (expectation, bound_holds) = if qtilde <= dp_cap {
        let dist = evolve_exact(env, x.to_f64(), qtilde as usize, dp_cap as usize)?;
        let e = dist.expectation_fn(|y| math::cos(math::TAU * q as f64 * y));
        let holds = match membership {
            Some(SupportSign::Plus) => Some(e > ESCAPE_LEVEL),
            Some(SupportSign::Minus) => Some(e < -ESCAPE_LEVEL),
            None => None,
        };
        (Some(e), holds)
    } else {
        (None, None)
    };

    Ok(LemmaCertificate {
        q,
        gamma: stage.gamma,
        qtilde,
        membership,
        support_check,
        exhaustive,
        expectation,
        bound_holds,
    })
}

fn plus_probe(x: &RationalPoint, q: u64) -> Result<RationalPoint> {
    let half_cell = crate::arithmetic::Alpha::from_rational(1u64, 2 * q)?;
    x.add_multiple(&half_cell, -1)
}

/// dist(x, L) + qtilde |alpha - p/q| < 1/(8q) in exact arithmetic.
fn triangle_certificate(
    alpha: &crate::arithmetic::Alpha,
    probe: &RationalPoint,
    stage: &ScheduleStage,
    q: u64,
    qtilde: u64,
) -> Result<bool> {
    let (ap, aq) = alpha
        .as_rational()
        .ok_or_else(|| Error::InvalidInput("exact alpha required".into()))?;
    if !probe.lattice_dist_less_than(q, 1, 16) {
        return Ok(false);
    }
    // qtilde |q alpha - p| < 1/(16 q)  <=>  16 q qtilde |q ap - p aq| < aq
    let a = &stage.q * ap;
    let b = &stage.p * aq;
    let num = if a >= b { a - b } else { b - a };
    let lhs = BigUint::from(16 * q) * BigUint::from(qtilde) * num;
    Ok(lhs < *aq)
}

/// One built stage of the observable.
#[derive(Debug, Clone)]
pub struct ObservableStage {
    pub index: usize,
    pub q: u64,
    pub gamma: f64,
    pub qtilde: u64,
    /// q^(-sqrt(n+1)), the candidate amplitude.
    pub amplitude: f64,
    /// phi_n = amplitude * cos(2 pi q x) was included (vs set to zero).
    pub included: bool,
    pub side: SupportSign,
    /// Estimated Leb(H_n) from the sampling grid.
    pub h_measure: f64,
    /// Estimated Leb(G_n) >= 1/16 by the half-measure rule.
    pub g_measure: f64,
    /// Sampled members of G_n (exact points, capped).
    pub witness_points: Vec<RationalPoint>,
    /// min over the sampled G_n of |E_x psi_n(X_qtilde) - nu(psi_n)|
    /// minus (sqrt(2)/4) amplitude; certified stages have this >= 0.
    pub certificate_margin: f64,
    /// nu error bar passed the 10%-of-amplitude rule and the margin is
    /// nonnegative.
    pub certified: bool,
    /// The side choice fell within twice the nu error bar (logged per the
    /// tie-handling convention).
    pub decided_within_bar: bool,
    /// Growth condition against the previous stage (n >= 2).
    pub growth_ok: bool,
}

/// The accumulated observable with its stage records.
#[derive(Debug, Clone)]
pub struct LiouvilleObservable {
    pub stages: Vec<ObservableStage>,
    /// Partial sum of the included stage cosines.
    pub phi: PeriodicFunction,
    pub nu_phi: NuEstimate,
}

/// Where nu comes from during the construction.
pub enum NuSource<'a> {
    Density(&'a crate::environment::InvariantDensity),
    Cesaro { n: usize, starts: Vec<f64> },
}

impl NuSource<'_> {
    fn estimate(&self, env: &Environment, psi: &PeriodicFunction) -> Result<NuEstimate> {
        match self {
            NuSource::Density(d) => Ok(crate::walk::nu_from_density(d, psi)),
            NuSource::Cesaro { n, starts } => {
                crate::walk::cesaro_nu(env, psi, *n, starts, crate::walk::DP_STEP_CAP)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub stages: usize,
    pub dp_cap: u64,
    /// Sample points per arc when measuring H_n (>= 256 by default).
    pub points_per_arc: usize,
    /// Cap on stored witness points per stage.
    pub witness_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { stages: 2, dp_cap: 1 << 15, points_per_arc: 256, witness_cap: 256 }
    }
}

/// Inductive construction of the slow-mixing observable over the scheduled
/// stages: pick the side by the sign of nu(phi_hat_n), measure H_n on a
/// grid of the opposite support set through the operator iteration, apply
/// the half-measure branch rule, and certify the stage inequality on the
/// sampled witness set.
pub fn build_observable(
    env: &Environment,
    schedule: &LiouvilleSchedule,
    nu: &NuSource<'_>,
    opts: &BuildOptions,
) -> Result<LiouvilleObservable> {
    let alpha = env.alpha().alpha();
    let stages_wanted = opts.stages.min(schedule.stages.len());
    if stages_wanted == 0 {
        return Err(Error::InvalidInput("no stages scheduled".into()));
    }

    let mut stages: Vec<ObservableStage> = Vec::with_capacity(stages_wanted);
    let mut psi_prev = PeriodicFunction::zero();
    let mut prev: Option<(u64, usize)> = None; // (q_{n-1}, n-1)

    for st in schedule.stages.iter().take(stages_wanted) {
        let n = st.index;
        let q = st
            .q
            .to_u64()
            .ok_or(Error::StageInfeasible { stage: n, dp_steps: u64::MAX, cap: opts.dp_cap })?;
        let qtilde = qtilde_of(q, st.gamma)?;
        if qtilde > opts.dp_cap {
            return Err(Error::StageInfeasible { stage: n, dp_steps: qtilde, cap: opts.dp_cap });
        }
        if env.p().degree() as u64 * qtilde > 1_000_000 {
            return Err(Error::StageInfeasible {
                stage: n,
                dp_steps: env.p().degree() as u64 * qtilde,
                cap: 1_000_000,
            });
        }
        if !stage_inequality_holds(alpha, &st.p, &st.q, st.gamma) {
            return Err(Error::StagePreconditionFailed {
                stage: n,
                detail: "scheduled inequality failed".into(),
            });
        }
        let amplitude = math::exp(-math::sqrt((n + 1) as f64) * math::ln(q as f64));
        let growth_ok = match prev {
            Some((q_prev, n_prev)) => {
                amplitude
                    < 0.001
                        * math::exp(
                            -math::sqrt((n_prev + 1) as f64) * math::ln(q_prev as f64),
                        )
            }
            None => true,
        };

        // candidate phi_hat_n = amplitude cos(2 pi q x)
        let phi_hat = sparse_cosine(q, amplitude);
        let nu_hat = nu.estimate(env, &phi_hat)?;
        let required_bar = 0.1 * amplitude;
        if nu_hat.bar >= required_bar {
            return Err(Error::NuResolution { bar: nu_hat.bar, required: required_bar });
        }
        let side = if nu_hat.value >= 0.0 { SupportSign::Minus } else { SupportSign::Plus };
        let decided_within_bar = math::abs(nu_hat.value) < 2.0 * nu_hat.bar;

        let support = SupportSet { q, sign: side };
        let points = support.sample_points(opts.points_per_arc)?;
        let xs: Vec<f64> = points.iter().map(|p| p.to_f64()).collect();

        // E_x psi_{n-1}(X_qtilde) at every sampled point, by duality with
        // the operator iteration
        let nu_prev = nu.estimate(env, &psi_prev)?;
        let prev_vals: Vec<f64> = if psi_prev.cr_norm_upper(0) == 0.0 {
            alloc::vec![0.0; xs.len()]
        } else {
            let iter = iterate_t(env, &psi_prev, qtilde as usize);
            xs.iter().map(|&x| iter.evaluate(x)).collect()
        };

        // H_n holds the points already deviating in the direction the new
        // cosine would NOT push: upward on the minus side (where included
        // cosines push down), downward on the plus side. Only then does the
        // complement branch inherit a one-sided bound that the escape level
        // turns into the stage certificate.
        let gate = (core::f64::consts::SQRT_2 / 4.0) * amplitude;
        let in_h: Vec<bool> = prev_vals
            .iter()
            .map(|&e| match side {
                SupportSign::Minus => e >= nu_prev.value + gate,
                SupportSign::Plus => e <= nu_prev.value - gate,
            })
            .collect();
        let h_frac = in_h.iter().filter(|&&b| b).count() as f64 / in_h.len() as f64;
        let h_measure = h_frac * 0.125;

        // half-measure branch rule
        let (included, keep_h) = if h_measure >= 0.125 / 2.0 {
            (false, true)
        } else {
            (true, false)
        };
        let g_measure = if keep_h { h_measure } else { 0.125 - h_measure };

        let psi_next =
            if included { psi_prev.add(&phi_hat) } else { psi_prev.clone() };

        // stage certificate on the sampled G_n: E_x psi_n vs nu(psi_n)
        let nu_next = nu.estimate(env, &psi_next)?;
        let cos_vals: Vec<f64> = if included {
            let iter = iterate_t(env, &sparse_cosine(q, 1.0), qtilde as usize);
            xs.iter().map(|&x| iter.evaluate(x)).collect()
        } else {
            alloc::vec![0.0; xs.len()]
        };
        let threshold = (core::f64::consts::SQRT_2 / 4.0) * amplitude;
        let mut margin = f64::INFINITY;
        let mut witness_points = Vec::new();
        for (i, point) in points.iter().enumerate() {
            if in_h[i] != keep_h {
                continue;
            }
            let e_next = prev_vals[i] + if included { amplitude * cos_vals[i] } else { 0.0 };
            let gap = math::abs(e_next - nu_next.value);
            margin = margin.min(gap - threshold);
            if witness_points.len() < opts.witness_cap {
                witness_points.push(point.clone());
            }
        }
        let certified = margin >= 0.0 && nu_hat.bar < required_bar;

        stages.push(ObservableStage {
            index: n,
            q,
            gamma: st.gamma,
            qtilde,
            amplitude,
            included,
            side,
            h_measure,
            g_measure,
            witness_points,
            certificate_margin: margin,
            certified,
            decided_within_bar,
            growth_ok,
        });
        psi_prev = psi_next;
        prev = Some((q, n));
    }

    let nu_phi = nu.estimate(env, &psi_prev)?;
    Ok(LiouvilleObservable { stages, phi: psi_prev, nu_phi })
}

/// amplitude * cos(2 pi q x) as a sparse high-mode function.
pub fn sparse_cosine(q: u64, amplitude: f64) -> PeriodicFunction {
    let k = q as usize;
    let mut coeffs = alloc::vec![num_complex::Complex64::new(0.0, 0.0); 2 * k + 1];
    coeffs[0] = num_complex::Complex64::new(amplitude / 2.0, 0.0);
    coeffs[2 * k] = num_complex::Complex64::new(amplitude / 2.0, 0.0);
    PeriodicFunction::from_coefficients(k, coeffs).expect("length matches")
}

fn iterate_t(env: &Environment, f: &PeriodicFunction, steps: usize) -> PeriodicFunction {
    let mut g = f.clone();
    for _ in 0..steps {
        g = env.apply_t(&g);
    }
    g
}

/// One row of the slow-mixing witness table.
#[derive(Debug, Clone)]
pub struct WitnessRow {
    pub stage: usize,
    pub x: f64,
    pub qtilde: u64,
    pub expectation: f64,
    pub nu: f64,
    pub gap: f64,
    /// 0.3 qtilde^(-sqrt(n+1)/n)
    pub lower_bound: f64,
    pub exact: bool,
    pub satisfied: bool,
}

/// Evaluate |E_x phi(X_qtilde_n) - nu(phi)| against the stage lower bound
/// at up to `per_stage` witness points per stage. Rows within the DP cap
/// are exact; beyond it they fall back to seeded Monte Carlo.
pub fn slow_mixing_witness(
    env: &Environment,
    obs: &LiouvilleObservable,
    per_stage: usize,
    dp_cap: u64,
    mc_trials: usize,
    seed: u64,
) -> Result<Vec<WitnessRow>> {
    let mut rows = Vec::new();
    for st in &obs.stages {
        let n = st.index;
        let lower = 0.3
            * math::exp(-(math::sqrt((n + 1) as f64) / n as f64)
                * math::ln(st.qtilde as f64));
        for point in st.witness_points.iter().take(per_stage) {
            let x = point.to_f64();
            let (expectation, exact) = if st.qtilde <= dp_cap {
                let dist = evolve_exact(env, x, st.qtilde as usize, dp_cap as usize)?;
                (dist.expectation(&obs.phi), true)
            } else {
                let mut acc = 0.0;
                for t in 0..mc_trials {
                    let path = crate::walk::sample_path(
                        env,
                        x,
                        st.qtilde as usize,
                        seed,
                        t as u64,
                    );
                    let m = *path.offsets.last().unwrap();
                    acc += obs
                        .phi
                        .evaluate(x + env.alpha().frac_times(m));
                }
                (acc / mc_trials as f64, false)
            };
            let gap = math::abs(expectation - obs.nu_phi.value);
            rows.push(WitnessRow {
                stage: n,
                x,
                qtilde: st.qtilde,
                expectation,
                nu: obs.nu_phi.value,
                gap,
                lower_bound: lower,
                exact,
                satisfied: gap >= lower,
            });
        }
    }
    Ok(rows)
}

/// ln of the C^r-proxy increments a_n (2 pi q_n)^r along the built stages
/// and the extrapolated tail (ln q_{n+1} = ln 16 + (n+1) ln q_n plus the
/// growth floor). The increments eventually fall because sqrt(n+1)
/// outgrows every fixed r.
pub fn smoothness_proxy_ln_increments(
    schedule: &LiouvilleSchedule,
    r: u32,
    n_max: usize,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max);
    let mut ln_q_prev = 0.0f64;
    for n in 1..=n_max {
        let ln_q = if let Some(st) = schedule.stages.get(n - 1) {
            crate::arithmetic::ln_big(&st.q)
        } else {
            // greedy extension: q_{n+1} > max(16 q_n^{gamma_n}, growth floor)
            let bound = math::ln(16.0) + (n as f64 + 1.0) * ln_q_prev;
            let growth = (math::ln(1000.0) + math::sqrt(n as f64) * ln_q_prev)
                / math::sqrt((n + 1) as f64);
            bound.max(growth)
        };
        let ln_amp = -math::sqrt((n + 1) as f64) * ln_q;
        out.push(ln_amp + r as f64 * (math::ln(math::TAU) + ln_q));
        ln_q_prev = ln_q;
    }
    out
}
