//! Prime sieve and the classical prime-sum estimates: Mertens' second
//! theorem, the two forms of the prime number theorem, and the product
//! bounds over dyadic windows `(z, 2z]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Meissel–Mertens constant, `0.2614972128476427837…` (OEIS A077761).
pub const MEISSEL_MERTENS: f64 = 0.2614972128;

pub const DEFAULT_SIEVE_LIMIT: u64 = 100_000_000;

/// Primality bit array on `[0, limit]`.
#[derive(Debug, Clone)]
pub struct SieveTable {
    limit: u64,
    bits: Vec<u64>,
}

impl SieveTable {
    /// Sieve of Eratosthenes up to `limit` inclusive. Limits above
    /// [`DEFAULT_SIEVE_LIMIT`] need [`SieveTable::with_max`].
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_max(limit, DEFAULT_SIEVE_LIMIT)
    }

    pub fn with_max(limit: u64, max: u64) -> Result<Self> {
        if limit > max {
            return Err(Error::SieveLimit { requested: limit, limit: max });
        }
        let words = (limit / 64 + 1) as usize;
        let mut bits = vec![u64::MAX; words];
        let clear = |bits: &mut [u64], i: u64| bits[(i / 64) as usize] &= !(1u64 << (i % 64));
        clear(&mut bits, 0);
        if limit >= 1 {
            clear(&mut bits, 1);
        }
        let mut i = 2u64;
        while i * i <= limit {
            if bits[(i / 64) as usize] >> (i % 64) & 1 == 1 {
                let mut j = i * i;
                while j <= limit {
                    clear(&mut bits, j);
                    j += i;
                }
            }
            i += 1;
        }
        Ok(Self { limit, bits })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn check(&self, x: u64) -> Result<()> {
        if x > self.limit {
            Err(Error::SieveLimit { requested: x, limit: self.limit })
        } else {
            Ok(())
        }
    }

    pub fn is_prime(&self, x: u64) -> Result<bool> {
        self.check(x)?;
        Ok(self.bits[(x / 64) as usize] >> (x % 64) & 1 == 1)
    }

    fn primes_upto(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        (lo.saturating_add(1)..=hi).filter(move |&x| self.bits[(x / 64) as usize] >> (x % 64) & 1 == 1)
    }

    /// All primes `p` with `lo < p ≤ hi`.
    pub fn primes_in(&self, lo: u64, hi: u64) -> Result<Vec<u64>> {
        self.check(hi)?;
        if hi <= lo {
            return Ok(Vec::new());
        }
        Ok(self.primes_upto(lo, hi).collect())
    }

    /// `π(x)`.
    pub fn pi(&self, x: u64) -> Result<u64> {
        self.check(x)?;
        Ok(self.primes_upto(0, x).count() as u64)
    }

    /// `ϑ(x) = Σ_{p≤x} log p`.
    pub fn theta(&self, x: u64) -> Result<f64> {
        self.check(x)?;
        Ok(self.primes_upto(0, x).map(|p| math::ln(p as f64)).sum())
    }
}

/// `Σ_{p≤x} 1/p` against `log log x + M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertensReport {
    pub x: u64,
    pub sum: f64,
    pub main_term: f64,
    pub residual: f64,
    /// `|residual|·log x`, the implied constant of the `O(1/log x)` term.
    pub scaled_residual: f64,
}

pub fn mertens_sum(sieve: &SieveTable, x: u64) -> Result<MertensReport> {
    if x < 3 {
        return Err(Error::Domain(format!("Mertens sum needs x ≥ 3, got {x}")));
    }
    sieve.check(x)?;
    let sum: f64 = sieve.primes_upto(0, x).map(|p| 1.0 / p as f64).sum();
    let lx = math::ln(x as f64);
    let main_term = math::ln(lx) + MEISSEL_MERTENS;
    let residual = sum - main_term;
    Ok(MertensReport {
        x,
        sum,
        main_term,
        residual,
        scaled_residual: residual.abs() * lx,
    })
}

/// `π(x)` vs `x/log x` and `ϑ(x)` vs `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PntReport {
    pub x: u64,
    pub pi: u64,
    pub x_over_log: f64,
    pub theta: f64,
    pub pi_relative_error: f64,
    pub theta_relative_error: f64,
    /// `|π(x) - x/log x|·log²x / x`.
    pub pi_scaled_error: f64,
    /// `|ϑ(x) - x|·log x / x`.
    pub theta_scaled_error: f64,
}

pub fn pnt_report(sieve: &SieveTable, x: u64) -> Result<PntReport> {
    if x < 2 {
        return Err(Error::Domain(format!("PNT report needs x ≥ 2, got {x}")));
    }
    let pi = sieve.pi(x)?;
    let theta = sieve.theta(x)?;
    let xf = x as f64;
    let lx = math::ln(xf);
    let x_over_log = xf / lx;
    Ok(PntReport {
        x,
        pi,
        x_over_log,
        theta,
        pi_relative_error: (pi as f64 - x_over_log) / x_over_log,
        theta_relative_error: (theta - xf) / xf,
        pi_scaled_error: (pi as f64 - x_over_log).abs() * lx * lx / xf,
        theta_scaled_error: (theta - xf).abs() * lx / xf,
    })
}

fn dyadic_window(sieve: &SieveTable, z: f64) -> Result<Vec<u64>> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("window parameter z must be positive, got {z}")));
    }
    let lo = math::floor(z) as u64;
    let hi = math::floor(2.0 * z) as u64;
    sieve.primes_in(lo, hi)
}

/// `Π_{z<p≤2z}(1 + ω(p)^{-1})` against `exp(Σ 1/ω(p))` and `exp(C Σ 1/p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicReport {
    pub z: f64,
    pub c: f64,
    pub primes: Vec<u64>,
    pub product: f64,
    /// `exp(Σ ω(p)^{-1})`; `product ≤ exp_omega_sum` always.
    pub exp_omega_sum: f64,
    /// `exp(C Σ 1/p)`.
    pub exp_bound: f64,
    /// `ω(p) ≥ p/C` on the window.
    pub hypothesis_holds: bool,
    pub holds: bool,
}

pub fn dyadic_product_bound(
    sieve: &SieveTable,
    z: f64,
    omega: impl Fn(u64) -> f64,
    c: f64,
) -> Result<DyadicReport> {
    let primes = dyadic_window(sieve, z)?;
    let mut product = 1.0;
    let mut omega_sum = 0.0;
    let mut recip_sum = 0.0;
    let mut hypothesis_holds = true;
    for &p in &primes {
        let w = omega(p);
        if !(w > 0.0) {
            return Err(Error::Domain(format!("omega({p}) = {w} is not positive")));
        }
        product *= 1.0 + 1.0 / w;
        omega_sum += 1.0 / w;
        recip_sum += 1.0 / p as f64;
        hypothesis_holds &= w * c >= p as f64 * (1.0 - 1e-12);
    }
    let exp_omega_sum = math::exp(omega_sum);
    let exp_bound = math::exp(c * recip_sum);
    Ok(DyadicReport {
        z,
        c,
        primes,
        product,
        exp_omega_sum,
        exp_bound,
        hypothesis_holds,
        holds: product <= exp_omega_sum * (1.0 + 1e-12) && (!hypothesis_holds || exp_omega_sum <= exp_bound * (1.0 + 1e-12)),
    })
}

/// `Π_{z<p≤2z}(1 + C p^{-α})` against `exp(C' z^{1-α}/log z)` with
/// `C' = C·(π(2z) - π(z))·log z / z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergentReport {
    pub z: f64,
    pub alpha: f64,
    pub c: f64,
    pub c_prime: f64,
    pub product: f64,
    pub exp_sum: f64,
    pub bound: f64,
    /// `1 + C' z^{1-α}/log z`.
    pub first_order: f64,
    pub holds: bool,
}

pub fn convergent_product(sieve: &SieveTable, z: f64, alpha: f64, c: f64) -> Result<ConvergentReport> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("alpha must exceed 1, got {alpha}")));
    }
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("C must be nonnegative, got {c}")));
    }
    if !(z > 1.0) {
        return Err(Error::Domain(format!("z must exceed 1 so that log z > 0, got {z}")));
    }
    let primes = dyadic_window(sieve, z)?;
    let product: f64 = primes.iter().map(|&p| 1.0 + c * math::powf(p as f64, -alpha)).product();
    let exp_sum = math::exp(primes.iter().map(|&p| c * math::powf(p as f64, -alpha)).sum());
    let lz = math::ln(z);
    let c_prime = c * primes.len() as f64 * lz / z;
    let t = c_prime * math::powf(z, 1.0 - alpha) / lz;
    let bound = math::exp(t);
    Ok(ConvergentReport {
        z,
        alpha,
        c,
        c_prime,
        product,
        exp_sum,
        bound,
        first_order: 1.0 + t,
        holds: product <= exp_sum * (1.0 + 1e-12) && exp_sum <= bound * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::is_prime;

    fn sieve() -> SieveTable {
        SieveTable::new(1_000_000).unwrap()
    }

    #[test]
    fn windows() {
        let s = sieve();
        assert_eq!(s.primes_in(9, 18).unwrap(), vec![11, 13, 17]);
        assert_eq!(s.primes_in(2, 3).unwrap(), vec![3]);
        assert!(s.primes_in(13, 16).unwrap().is_empty());
        assert!(s.primes_in(0, 2_000_000).is_err());
        assert_eq!(s.pi(100).unwrap(), 25);
    }

    #[test]
    fn mertens_values() {
        let s = sieve();
        let r = mertens_sum(&s, 10).unwrap();
        assert!((r.sum - (0.5 + 1.0 / 3.0 + 0.2 + 1.0 / 7.0)).abs() < 1e-15);
        for x in [100, 1000, 10_000, 100_000, 1_000_000] {
            assert!(mertens_sum(&s, x).unwrap().scaled_residual <= 5.0);
        }
        assert!(mertens_sum(&s, 2).is_err());
    }

    #[test]
    fn pnt_values() {
        let s = sieve();
        let r = pnt_report(&s, 10).unwrap();
        assert!((r.theta - libm::log(210.0)).abs() < 1e-12);
        for x in [1000, 10_000, 100_000, 1_000_000] {
            assert!(pnt_report(&s, x).unwrap().pi_scaled_error <= 1.3);
        }
    }

    #[test]
    fn dyadic_examples() {
        let s = sieve();
        let r = dyadic_product_bound(&s, 100.0, |p| p as f64, 1.0).unwrap();
        assert!(r.holds && r.hypothesis_holds);
        let r = dyadic_product_bound(&s, 100.0, |p| p as f64 / 4.0, 4.0).unwrap();
        assert!(r.holds && r.hypothesis_holds);
        let r = dyadic_product_bound(&s, 13.5, |p| p as f64, 1.0).unwrap();
        assert_eq!(r.primes, vec![17, 19, 23]);
        let r = dyadic_product_bound(&s, 0.9, |p| p as f64, 1.0).unwrap();
        assert_eq!((r.product, r.exp_bound), (1.0, 1.0));
    }

    #[test]
    fn convergent_examples() {
        let s = sieve();
        let r = convergent_product(&s, 50.0, 3.0, 0.5).unwrap();
        let first: f64 = s.primes_in(50, 100).unwrap().iter().map(|&p| 0.5 / (p as f64).powi(3)).sum();
        assert!((r.product - 1.0 - first).abs() < 1e-9);
        assert!(r.holds);
        assert_eq!(convergent_product(&s, 50.0, 3.0, 0.0).unwrap().product, 1.0);
        let a = convergent_product(&s, 50.0, 2.0, 1.0).unwrap().product;
        let b = convergent_product(&s, 50.0, 4.0, 1.0).unwrap().product;
        assert!(b < a);
        assert!(convergent_product(&s, 50.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn sieve_matches_trial_division() {
        use rand::{Rng, SeedableRng};
        let s = sieve();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = rng.gen_range(0..=s.limit());
            assert_eq!(s.is_prime(x).unwrap(), is_prime(x), "{x}");
        }
    }
}
