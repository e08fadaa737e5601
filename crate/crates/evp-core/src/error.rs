use alloc::string::String;
use core::fmt;

/// Errors shared by all solver and simulation modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Continued fraction expansion hit an exactly rational value (or the
    /// working precision ran out). Carries the last exactly known convergent.
    RationalAtPrecision { depth: usize, p: String, q: String },
    /// Fewer convergents than the operation needs.
    InsufficientDepth { have: usize, need: usize },
    /// A Liouville schedule could not be extended to all requested stages.
    ScheduleTruncated { completed: usize, requested: usize },
    /// A function required to be positive dips to `min` at grid point `at`.
    NonPositiveFunction { at: f64, min: f64 },
    /// Right-hand side of a cohomological equation has nonzero mean.
    MeanObstruction { mean: f64, tol: f64 },
    /// A small divisor `|e^{2 pi i k alpha} - 1|` fell below the cutoff.
    Resonance { mode: i64, denominator: f64 },
    /// `solve_damped`/`solve_eta` called with `lambda <= 1`.
    NotDamped { lambda: f64 },
    /// Jump probability touches 0 or 1 within the safety margin.
    DegenerateEnvironment { margin: f64 },
    /// Invariant density construction finished above tolerance.
    ConstructionFailed { residual: f64, tol: f64 },
    /// Observable not centered against the invariant density.
    CenteringViolation { mean: f64, tol: f64 },
    /// Poisson certificate residual above tolerance.
    ResidualAboveTolerance { residual: f64, tol: f64 },
    /// Exact dynamic programming asked to exceed the configured step cap.
    StepCapExceeded { steps: usize, cap: usize },
    /// Path ended before the segment stopping rule triggered.
    SegmentIncomplete { accumulated: f64, threshold: f64 },
    /// Stay probability outside the admissible interval.
    StayProbabilityOutOfRange { s: f64 },
    /// Finite-difference order not supported.
    OrderTooHigh { m: usize, max: usize },
    /// Simplex condition of a lazy environment violated.
    SimplexViolation { at: f64, defect: f64 },
    /// Scheduled inequality `|q alpha - p| < 1/(16 q^gamma)` failed.
    StagePreconditionFailed { stage: usize, detail: String },
    /// The nu estimate's error bar is too coarse for the stage amplitude.
    NuResolution { bar: f64, required: f64 },
    /// Construction stage infeasible within the exact-DP cap.
    StageInfeasible { stage: usize, dp_steps: u64, cap: u64 },
    /// Generic invalid-argument error with context.
    InvalidInput(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::RationalAtPrecision { depth, p, q } => write!(
                f,
                "rational-at-precision after {depth} partial quotients (last exact convergent {p}/{q})"
            ),
            Error::InsufficientDepth { have, need } => {
                write!(f, "insufficient depth: have {have} convergents, need {need}")
            }
            Error::ScheduleTruncated { completed, requested } => write!(
                f,
                "schedule truncated: {completed} of {requested} stages fit the working precision"
            ),
            Error::NonPositiveFunction { at, min } => {
                write!(f, "non-positive function: minimum {min:e} at x = {at}")
            }
            Error::MeanObstruction { mean, tol } => {
                write!(f, "mean obstruction: |psi_hat(0)| = {mean:e} exceeds {tol:e}")
            }
            Error::Resonance { mode, denominator } => write!(
                f,
                "resonance at mode {mode}: |e^(2 pi i k alpha) - 1| = {denominator:e}"
            ),
            Error::NotDamped { lambda } => write!(f, "not damped: lambda = {lambda} <= 1"),
            Error::DegenerateEnvironment { margin } => {
                write!(f, "degenerate environment: min(p, 1-p) = {margin:e}")
            }
            Error::ConstructionFailed { residual, tol } => write!(
                f,
                "construction failed: stationarity residual {residual:e} >= tolerance {tol:e}"
            ),
            Error::CenteringViolation { mean, tol } => {
                write!(f, "centering violation: mean(rho psi) = {mean:e} exceeds {tol:e}")
            }
            Error::ResidualAboveTolerance { residual, tol } => {
                write!(f, "residual {residual:e} above tolerance {tol:e}")
            }
            Error::StepCapExceeded { steps, cap } => {
                write!(f, "step cap exceeded: {steps} > {cap}")
            }
            Error::SegmentIncomplete { accumulated, threshold } => write!(
                f,
                "segment incomplete: accumulated expected time {accumulated} below threshold {threshold}"
            ),
            Error::StayProbabilityOutOfRange { s } => {
                write!(f, "stay probability {s} outside [0, 0.999]")
            }
            Error::OrderTooHigh { m, max } => {
                write!(f, "difference order {m} above supported maximum {max}")
            }
            Error::SimplexViolation { at, defect } => {
                write!(f, "simplex violation at x = {at}: |p_- + p_0 + p_+ - 1| = {defect:e}")
            }
            Error::StagePreconditionFailed { stage, detail } => {
                write!(f, "stage {stage} precondition failed: {detail}")
            }
            Error::NuResolution { bar, required } => write!(
                f,
                "nu-resolution: error bar {bar:e} exceeds required {required:e}; deepen the Cesaro average"
            ),
            Error::StageInfeasible { stage, dp_steps, cap } => {
                write!(f, "stage {stage} infeasible: needs {dp_steps} exact steps, cap {cap}")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
