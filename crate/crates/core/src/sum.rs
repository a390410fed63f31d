//! Compensated (Kahan–Neumaier) summation.
//!
//! All series in this crate are summed in a fixed ascending order with
//! compensation, so results are identical across runs and worker counts.

use num_complex::Complex64;
use std::ops::{Add, Sub};

/// Kahan–Neumaier accumulator, generic over `f64` and `Complex64`.
#[derive(Debug, Clone, Copy)]
pub struct Kahan<T> {
    sum: T,
    compensation: T,
}

pub trait Accumulable: Copy + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
}

impl Accumulable for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Accumulable for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

impl<T: Accumulable> Default for Kahan<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Accumulable> Kahan<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum
    }
}

/// Compensated sum of an iterator in its own order.
pub fn kahan_sum<T: Accumulable, I: IntoIterator<Item = T>>(iter: I) -> T {
    let mut acc = Kahan::new();
    for v in iter {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancellation() {
        // 1 + 1e-16 repeated: naive sum stays at 1, Kahan does not.
        let mut acc = Kahan::new();
        acc.add(1.0f64);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        let exact = 1.0 + 1e-12;
        assert!((acc.value() - exact).abs() < 1e-15);
    }

    #[test]
    fn complex_matches_componentwise() {
        let vals: Vec<Complex64> = (1..1000)
            .map(|n| Complex64::new(1.0 / n as f64, -1.0 / (n * n) as f64))
            .collect();
        let s = kahan_sum(vals.iter().copied());
        let re = kahan_sum(vals.iter().map(|z| z.re));
        let im = kahan_sum(vals.iter().map(|z| z.im));
        assert_eq!(s.re, re);
        assert_eq!(s.im, im);
    }
}
