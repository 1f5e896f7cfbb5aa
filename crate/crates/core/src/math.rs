//! Floating point helpers that work without `std`.

use core::f64::consts::PI;
use num_complex::Complex64;

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `e(num/den) = exp(2πi·num/den)`.
pub fn unit_root(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    if num == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let theta = 2.0 * PI * (num as f64) / (den as f64);
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

/// Table of `e(k/den)` for `k = 0..den`.
pub fn unit_root_table(den: u64) -> alloc::vec::Vec<Complex64> {
    (0..den).map(|k| unit_root(k, den)).collect()
}

#[inline]
pub fn abs(z: Complex64) -> f64 {
    libm::hypot(z.re, z.im)
}
