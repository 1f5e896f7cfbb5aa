//! The compact group `T_p = F_p((1/T)) / F_p[T]`, its residue map and the
//! additive characters built from it, for one prime or a finite set of primes.
//!
//! A class in `T_p` is stored as its canonical tail `Σ_{j<0} c_j T^j`. Only
//! finitely supported tails arise here (products of polynomials with
//! `T^{-n}`), so every operation is exact.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::ffpoly::{FFPoly, PrimeField};
use crate::math;
use crate::{Error, Result};

/// A nonempty, strictly increasing set of distinct primes and their product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSet {
    primes: Vec<u64>,
    product: BigUint,
}

impl PrimeSet {
    pub fn new(mut primes: Vec<u64>) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::Domain("prime set must be nonempty".into()));
        }
        primes.sort_unstable();
        for w in primes.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Domain(alloc::format!("prime {} listed twice", w[0])));
            }
        }
        for &p in &primes {
            PrimeField::new(p)?;
        }
        let product = primes.iter().map(|&p| BigUint::from(p)).product();
        Ok(Self { primes, product })
    }

    pub fn single(p: u64) -> Result<Self> {
        Self::new(alloc::vec![p])
    }

    #[inline]
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `s = #𝒫`.
    #[inline]
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `ν = min 𝒫`.
    pub fn min(&self) -> u64 {
        self.primes[0]
    }

    pub fn product_big(&self) -> &BigUint {
        &self.product
    }

    /// `P = Π p` when it fits in a machine word.
    pub fn product(&self) -> Option<u64> {
        self.product.to_u64()
    }

    pub(crate) fn modulus(&self) -> Result<u64> {
        self.product()
            .filter(|&m| m < 1 << 32)
            .ok_or_else(|| Error::Domain("product of primes exceeds 2^32".into()))
    }

    pub fn fields(&self) -> Vec<PrimeField> {
        self.primes
            .iter()
            .map(|&p| PrimeField::new(p).expect("validated"))
            .collect()
    }

    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok()
    }

    /// Residues `(r mod p)_p`.
    pub fn crt_split(&self, r: u64) -> Vec<u64> {
        self.primes.iter().map(|&p| r % p).collect()
    }

    /// The unique `r mod P` with `r ≡ residues[i] (mod p_i)`.
    pub fn crt_join(&self, residues: &[u64]) -> Result<u64> {
        let m = self.modulus()?;
        let mut r = 0u128;
        for (&p, &a) in self.primes.iter().zip(residues) {
            let cofactor = m / p;
            let inv = PrimeField::new(p)?.inv(cofactor % p).expect("coprime");
            r = (r + (a % p) as u128 * cofactor as u128 % m as u128 * inv as u128) % m as u128;
        }
        Ok(r as u64)
    }

    /// The weight `w mod P` with `w ≡ P/p (mod p)` for each prime, so that
    /// `Σ_p g_p h_p / p ≡ w·g·h / P (mod 1)` for CRT residues `g, h`.
    pub fn pairing_weight(&self) -> Result<u64> {
        let m = self.modulus()?;
        let residues: Vec<u64> = self.primes.iter().map(|&p| (m / p) % p).collect();
        self.crt_join(&residues)
    }
}

/// A class in `T_p`, stored by its canonical tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusElem {
    field: PrimeField,
    tail: BTreeMap<i64, u64>,
}

impl TorusElem {
    pub fn zero(field: PrimeField) -> Self {
        Self {
            field,
            tail: BTreeMap::new(),
        }
    }

    /// Reduces a finite Laurent sum `Σ c_j T^j` (any exponents, any integer
    /// coefficients) to its class: the polynomial part is dropped.
    pub fn from_laurent(field: PrimeField, terms: &[(i64, i64)]) -> Self {
        let mut out = Self::zero(field);
        for &(j, c) in terms {
            out.add_term(j, field.from_i64(c));
        }
        out
    }

    fn add_term(&mut self, j: i64, c: u64) {
        if j >= 0 || c == 0 {
            return;
        }
        let f = self.field;
        let v = f.add(self.tail.get(&j).copied().unwrap_or(0), c);
        if v == 0 {
            self.tail.remove(&j);
        } else {
            self.tail.insert(j, v);
        }
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Nonzero tail coefficients keyed by (negative) exponent.
    pub fn tail(&self) -> &BTreeMap<i64, u64> {
        &self.tail
    }

    pub fn is_zero(&self) -> bool {
        self.tail.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.p(), other.field.p()));
        }
        let mut out = self.clone();
        for (&j, &c) in &other.tail {
            out.add_term(j, c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let f = self.field;
        Self {
            field: f,
            tail: self.tail.iter().map(|(&j, &c)| (j, f.neg(c))).collect(),
        }
    }

    /// `res_p(ξ)`: the coefficient of `T^{-1}`.
    pub fn res(&self) -> u64 {
        self.tail.get(&-1).copied().unwrap_or(0)
    }

    /// `e_p(ξ) = e(res_p(ξ)/p)`.
    pub fn e_p(&self) -> Complex64 {
        math::unit_root(self.res(), self.field.p())
    }

    /// Single-prime phase `res_p(ξ)/p mod 1`.
    pub fn psi(&self) -> BigRational {
        BigRational::new(BigInt::from(self.res()), BigInt::from(self.field.p()))
    }
}

/// `res(ξ)` as a free function.
pub fn res(xi: &TorusElem) -> u64 {
    xi.res()
}

/// `e_p(ξ)` as a free function.
pub fn e_p(xi: &TorusElem) -> Complex64 {
    xi.e_p()
}

/// The class of `T^{-n}·G·H` in `T_p`.
pub fn frac_mul(n: usize, g: &FFPoly, h: &FFPoly) -> Result<TorusElem> {
    let prod = g.mul(h)?;
    let mut out = TorusElem::zero(g.field());
    for (k, &c) in prod.coeffs().iter().enumerate().take(n) {
        out.add_term(k as i64 - n as i64, c);
    }
    Ok(out)
}

/// One torus element per prime of a [`PrimeSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiTorusElem {
    primes: PrimeSet,
    parts: Vec<TorusElem>,
}

impl MultiTorusElem {
    pub fn new(primes: PrimeSet, parts: Vec<TorusElem>) -> Result<Self> {
        if parts.len() != primes.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} torus components for {} primes",
                parts.len(),
                primes.len()
            )));
        }
        for (part, &p) in parts.iter().zip(primes.primes()) {
            if part.field().p() != p {
                return Err(Error::FieldMismatch(part.field().p(), p));
            }
        }
        Ok(Self { primes, parts })
    }

    pub fn primes(&self) -> &PrimeSet {
        &self.primes
    }

    pub fn parts(&self) -> &[TorusElem] {
        &self.parts
    }

    /// `T^{-n}·G·H` componentwise.
    pub fn frac_mul(n: usize, primes: &PrimeSet, g: &[FFPoly], h: &[FFPoly]) -> Result<Self> {
        if g.len() != primes.len() || h.len() != primes.len() {
            return Err(Error::DimensionMismatch("tuple length".into()));
        }
        let parts = g
            .iter()
            .zip(h)
            .map(|(a, b)| frac_mul(n, a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(primes.clone(), parts)
    }
}

/// `ψ_𝒫(ξ) = Σ_p res(ξ_p)/p mod 1`, exactly.
pub fn psi_p(xi: &MultiTorusElem) -> BigRational {
    let mut total = BigRational::zero();
    for part in &xi.parts {
        total += part.psi();
    }
    let fl = total.floor();
    total - fl
}

/// `e(x)` for a rational phase.
pub fn e_of_phase(phase: &BigRational) -> Complex64 {
    let den = phase.denom();
    let num = phase.numer().mod_floor(den);
    match (num.to_u64(), den.to_u64()) {
        (Some(a), Some(b)) => math::unit_root(a, b),
        _ => {
            let x = BigRational::new(num, den.clone()).to_f64().unwrap_or(0.0);
            let theta = 2.0 * core::f64::consts::PI * x;
            Complex64::new(libm::cos(theta), libm::sin(theta))
        }
    }
}

/// `e_𝒫(ξ) = e(ψ_𝒫(ξ))`.
pub fn e_multi(xi: &MultiTorusElem) -> Complex64 {
    e_of_phase(&psi_p(xi))
}

/// `Π_p e_p(ξ_p)`, the product form of `e_𝒫`.
pub fn e_multi_product(xi: &MultiTorusElem) -> Complex64 {
    xi.parts
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, part| acc * part.e_p())
}

/// `true` if `phase` is zero mod 1.
pub fn phase_is_zero(phase: &BigRational) -> bool {
    phase.numer().is_zero() || phase.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn residue_readoff() {
        assert_eq!(TorusElem::from_laurent(fp(5), &[(-1, 1)]).res(), 1);
        assert_eq!(TorusElem::from_laurent(fp(5), &[(-2, 1)]).res(), 0);
        assert_eq!(TorusElem::from_laurent(fp(5), &[(-1, 2), (-3, 1)]).res(), 2);
    }

    #[test]
    fn polynomial_part_is_dropped() {
        let a = TorusElem::from_laurent(fp(3), &[(-2, 1), (-1, 2)]);
        let b = TorusElem::from_laurent(fp(3), &[(4, 2), (0, 1), (-2, 1), (-1, 2), (1, 7)]);
        assert_eq!(a, b);
        assert!(TorusElem::from_laurent(fp(3), &[(-1, 3)]).is_zero());
    }

    #[test]
    fn frac_mul_examples() {
        let f = fp(2);
        let t = FFPoly::parse(f, "T").unwrap();
        assert!(frac_mul(1, &t, &t).unwrap().is_zero());
        let g = FFPoly::parse(f, "T^2+T").unwrap();
        let h = FFPoly::parse(f, "T^2+1").unwrap();
        assert_eq!(frac_mul(2, &g, &h).unwrap().res(), 1);
    }

    #[test]
    fn characters() {
        let z = e_p(&TorusElem::from_laurent(fp(2), &[(-1, 1)]));
        assert!((z - Complex64::new(-1.0, 0.0)).norm_sqr() < 1e-24);
        assert_eq!(e_p(&TorusElem::zero(fp(3))), Complex64::new(1.0, 0.0));
        let z = e_p(&TorusElem::from_laurent(fp(5), &[(-1, 2)]));
        let theta = 4.0 * core::f64::consts::PI / 5.0;
        assert!((z.re - libm::cos(theta)).abs() < 1e-15 && (z.im - libm::sin(theta)).abs() < 1e-15);
    }

    #[test]
    fn psi_examples() {
        let ps = PrimeSet::new(alloc::vec![3, 2]).unwrap();
        let xi = MultiTorusElem::new(
            ps.clone(),
            alloc::vec![
                TorusElem::from_laurent(fp(2), &[(-1, 1)]),
                TorusElem::from_laurent(fp(3), &[(-1, 1)]),
            ],
        )
        .unwrap();
        assert_eq!(psi_p(&xi), BigRational::new(5.into(), 6.into()));
        let zero = MultiTorusElem::new(
            ps,
            alloc::vec![TorusElem::zero(fp(2)), TorusElem::zero(fp(3))],
        )
        .unwrap();
        assert!(phase_is_zero(&psi_p(&zero)));
    }

    #[test]
    fn prime_set_validation() {
        assert!(PrimeSet::new(alloc::vec![]).is_err());
        assert!(PrimeSet::new(alloc::vec![3, 3]).is_err());
        assert_eq!(PrimeSet::new(alloc::vec![4]), Err(Error::NotPrime(4)));
        let ps = PrimeSet::new(alloc::vec![7, 2, 5]).unwrap();
        assert_eq!(ps.primes(), &[2, 5, 7]);
        assert_eq!(ps.product(), Some(70));
        assert_eq!(ps.min(), 2);
        assert_eq!(ps.len(), 3);
    }

    #[test]
    fn crt_roundtrip_and_weight() {
        let ps = PrimeSet::new(alloc::vec![2, 3, 5]).unwrap();
        for r in 0..30 {
            assert_eq!(ps.crt_join(&ps.crt_split(r)).unwrap(), r);
        }
        let w = ps.pairing_weight().unwrap();
        for &p in ps.primes() {
            assert_eq!(w % p, (30 / p) % p);
        }
    }
}
