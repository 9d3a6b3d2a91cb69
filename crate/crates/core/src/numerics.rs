//! Compensated accumulation and the small combinatorial helpers shared by
//! every module.
//!
//! All sums in the crate run in ascending index order through
//! [`CompensatedSum`] (Neumaier's variant of Kahan summation), so a result
//! depends only on the inputs, never on scheduling.

use num_complex::Complex64;
use std::ops::AddAssign;

/// Neumaier compensated accumulator for `f64`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Component-wise compensated accumulator for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: Complex64) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl AddAssign<Complex64> for ComplexSum {
    fn add_assign(&mut self, rhs: Complex64) {
        self.add(rhs);
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn sum_f64<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

pub fn sum_complex<I: IntoIterator<Item = Complex64>>(iter: I) -> Complex64 {
    iter.into_iter().collect::<ComplexSum>().value()
}

/// Binomial coefficient, `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `n!` as a float; exact for `n <= 22`.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn ln_factorial(n: usize) -> f64 {
    sum_f64((2..=n).map(|k| (k as f64).ln()))
}

/// Exact `(n + 2m)! / (n! m!)` for small arguments.
fn semigroup_coefficient_exact(n: usize, m: usize) -> Option<u128> {
    let mut num: u128 = 1;
    for k in (n + 1)..=(n + 2 * m) {
        num = num.checked_mul(k as u128)?;
    }
    let den: u128 = (1..=m as u128).product();
    Some(num / den)
}

/// The heat-semigroup weight `(n + 2m)! / (n! m!)`.
///
/// Multiplicative updates in floating point while `n + 2m <= 20` (checked
/// against exact integer arithmetic in debug builds), log-space beyond.
pub fn semigroup_coefficient(n: usize, m: usize) -> f64 {
    if n + 2 * m <= 20 {
        let mut acc = 1.0f64;
        // (n+1)(n+2)...(n+2m) / m!
        for j in 1..=m {
            acc *= (n + 2 * j - 1) as f64 * (n + 2 * j) as f64 / j as f64;
        }
        debug_assert_eq!(
            acc.round() as u128,
            semigroup_coefficient_exact(n, m).expect("fits in u128")
        );
        acc.round()
    } else {
        (ln_factorial(n + 2 * m) - ln_factorial(n) - ln_factorial(m)).exp()
    }
}

/// Upper bound for the tail `|sum_{n > nmax} z^n / n!|` at `|z| = x`.
pub fn exp_tail_bound(x: f64, nmax: usize) -> f64 {
    let x = x.abs();
    let mut term = 1.0;
    for k in 1..=(nmax + 1) {
        term *= x / k as f64;
    }
    term * x.exp()
}
