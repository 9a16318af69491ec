//! Probability scalars.
//!
//! Everything downstream (knowledge bases, search, mass computation) is generic
//! over a scalar `P: Probability`. Three instantiations ship: `f64`, `f32`, and
//! [`LogProb`], which stores natural-log magnitudes so that products of
//! thousands of priors don't underflow. Linear values are materialized only at
//! input (`from_linear`) and output (`to_linear`, `Display`) boundaries.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use num_traits::{One, Zero};

/// Tolerance under which two queue priorities count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Scalar type for priors, masses and bounds.
pub trait Probability:
    Copy
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Running-sum representation for bound masses. Compensated for the linear
    /// scalars, log-sum-exp for [`LogProb`].
    type Accumulator: MassAccumulator<Self>;

    fn from_linear(p: f64) -> Self;
    fn to_linear(self) -> f64;

    /// Whether two queue priorities are equal up to [`TIE_TOLERANCE`] (in the
    /// scalar's native scale).
    fn queue_tied(self, other: Self) -> bool;

    fn clamp_unit(self) -> Self {
        if self > Self::one() {
            Self::one()
        } else if self < Self::zero() {
            Self::zero()
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

/// A resettable running sum supporting removal.
///
/// `value()` is clamped to be nonnegative: cancellation noise must never turn
/// a mass negative.
pub trait MassAccumulator<P>: Clone + fmt::Debug {
    fn new() -> Self;
    fn add(&mut self, x: P);
    fn sub(&mut self, x: P);
    fn value(&self) -> P;
    fn reset(&mut self) {
        *self = Self::new();
    }
}

/// Sum all items through the scalar's accumulator.
pub fn accumulate<P: Probability>(items: impl IntoIterator<Item = P>) -> P {
    let mut acc = P::Accumulator::new();
    for x in items {
        acc.add(x);
    }
    acc.value()
}

/// Neumaier-compensated floating point sum.
#[derive(Clone, Copy, Debug)]
pub struct CompensatedSum<F> {
    sum: F,
    compensation: F,
}

impl<F: num_traits::Float + fmt::Debug> MassAccumulator<F> for CompensatedSum<F> {
    fn new() -> Self {
        CompensatedSum {
            sum: F::zero(),
            compensation: F::zero(),
        }
    }

    fn add(&mut self, x: F) {
        let t = self.sum + x;
        let correction = if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        self.compensation = self.compensation + correction;
        self.sum = t;
    }

    fn sub(&mut self, x: F) {
        self.add(-x);
    }

    fn value(&self) -> F {
        let v = self.sum + self.compensation;
        if v < F::zero() {
            F::zero()
        } else {
            v
        }
    }
}

impl Probability for f64 {
    type Accumulator = CompensatedSum<f64>;

    fn from_linear(p: f64) -> Self {
        p
    }

    fn to_linear(self) -> f64 {
        self
    }

    fn queue_tied(self, other: Self) -> bool {
        (self - other).abs() <= TIE_TOLERANCE
    }
}

impl Probability for f32 {
    type Accumulator = CompensatedSum<f32>;

    fn from_linear(p: f64) -> Self {
        p as f32
    }

    fn to_linear(self) -> f64 {
        self as f64
    }

    fn queue_tied(self, other: Self) -> bool {
        (self as f64 - other as f64).abs() <= TIE_TOLERANCE
    }
}

/// A probability stored as its natural logarithm. `LogProb(0.0)` is 1,
/// `LogProb(NEG_INFINITY)` is 0. Values above 1 (positive logs) are legal:
/// queue mass is a sum of priorities and may transiently exceed 1.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(pub f64);

impl LogProb {
    pub fn from_ln(ln: f64) -> Self {
        LogProb(ln)
    }

    pub fn ln_value(self) -> f64 {
        self.0
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log(e^a - e^b), clamped to -inf when b >= a.
fn log_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    // 1 - e^d for d < 0, evaluated without cancellation.
    let d = b - a;
    a + (-d.exp_m1()).ln()
}

impl Add for LogProb {
    type Output = LogProb;
    fn add(self, rhs: LogProb) -> LogProb {
        LogProb(log_add(self.0, rhs.0))
    }
}

impl Sub for LogProb {
    type Output = LogProb;
    fn sub(self, rhs: LogProb) -> LogProb {
        LogProb(log_sub(self.0, rhs.0))
    }
}

impl Mul for LogProb {
    type Output = LogProb;
    fn mul(self, rhs: LogProb) -> LogProb {
        LogProb(self.0 + rhs.0)
    }
}

impl Div for LogProb {
    type Output = LogProb;
    fn div(self, rhs: LogProb) -> LogProb {
        LogProb(self.0 - rhs.0)
    }
}

impl Zero for LogProb {
    fn zero() -> Self {
        LogProb(f64::NEG_INFINITY)
    }

    fn is_zero(&self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl One for LogProb {
    fn one() -> Self {
        LogProb(0.0)
    }
}

impl fmt::Debug for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogProb(ln={}, linear={})", self.0, self.0.exp())
    }
}

impl fmt::Display for LogProb {
    /// Displays the linear value; magnitudes below the f64 underflow
    /// threshold print as 0 even though the log representation is exact.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.exp())
    }
}

/// Log-domain running sum. Compensation is unnecessary here: log-sum-exp is
/// evaluated against the running maximum, which is what dominates error in
/// the linear scheme.
#[derive(Clone, Copy, Debug)]
pub struct LogAccumulator {
    log_total: f64,
}

impl MassAccumulator<LogProb> for LogAccumulator {
    fn new() -> Self {
        LogAccumulator {
            log_total: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, x: LogProb) {
        self.log_total = log_add(self.log_total, x.0);
    }

    fn sub(&mut self, x: LogProb) {
        self.log_total = log_sub(self.log_total, x.0);
    }

    fn value(&self) -> LogProb {
        LogProb(self.log_total)
    }
}

impl Probability for LogProb {
    type Accumulator = LogAccumulator;

    fn from_linear(p: f64) -> Self {
        LogProb(p.ln())
    }

    fn to_linear(self) -> f64 {
        self.0.exp()
    }

    fn queue_tied(self, other: Self) -> bool {
        if self.is_zero() && other.is_zero() {
            return true;
        }
        (self.0 - other.0).abs() <= TIE_TOLERANCE
    }
}
