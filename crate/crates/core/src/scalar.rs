//! Floating-point abstraction and compensated summation.

use core::fmt::Debug;
use core::ops::AddAssign;

use num_traits::{Float, FromPrimitive};

/// Real scalar used by the analytic parts of the crate (frame, recurrences,
/// G-functions). `f64` is the default everywhere; any type that implements
/// [`Float`] and [`FromPrimitive`] can be plugged in.
///
/// Plain `f64` loses the Bogoliubov frame once `1 - g/g_c` drops below
/// roughly `1e-16` when the coupling is given as an absolute value. The
/// [`Coupling::CollapseOffset`](crate::Coupling::CollapseOffset)
/// parametrization pushes that floor further out.
pub trait Scalar: Float + FromPrimitive + Debug + Send + Sync + 'static {
    /// Converts an `f64` literal into the scalar.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("index representable in scalar type")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Send + Sync + 'static {}

/// Kahan–Babuška (Neumaier) compensated accumulator.
#[derive(Clone, Copy, Debug)]
pub struct NeumaierSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Scalar> Default for NeumaierSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> NeumaierSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), compensation: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation = self.compensation + ((self.sum - t) + value);
        } else {
            self.compensation = self.compensation + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Scalar> AddAssign<T> for NeumaierSum<T> {
    fn add_assign(&mut self, rhs: T) {
        self.add(rhs);
    }
}

impl<T: Scalar> FromIterator<T> for NeumaierSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Naive accumulator with the same interface, used to measure what
/// compensation buys.
#[derive(Clone, Copy, Debug, Default)]
pub struct PlainSum<T> {
    sum: T,
}

impl<T: Scalar> PlainSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        self.sum = self.sum + value;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum
    }
}

/// Accumulator abstraction so series evaluators can be run with either
/// summation strategy.
pub trait Accumulator<T>: Default {
    fn push(&mut self, value: T);
    fn total(&self) -> T;
}

impl<T: Scalar> Accumulator<T> for NeumaierSum<T> {
    #[inline]
    fn push(&mut self, value: T) {
        self.add(value)
    }
    #[inline]
    fn total(&self) -> T {
        self.value()
    }
}

impl<T: Scalar + Default> Accumulator<T> for PlainSum<T> {
    #[inline]
    fn push(&mut self, value: T) {
        self.add(value)
    }
    #[inline]
    fn total(&self) -> T {
        self.value()
    }
}
