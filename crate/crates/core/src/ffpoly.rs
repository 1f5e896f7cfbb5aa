//! Arithmetic and multiplicative structure of `F_p[T]` for a prime `p`.
//!
//! Polynomials are dense little-endian coefficient vectors (`coeffs[i]` is the
//! coefficient of `T^i`) with no trailing zeros. Factorization runs the usual
//! squarefree / distinct-degree / equal-degree pipeline; a trial-division route
//! is kept alongside it as an independent cross-check.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, DEFAULT_ENUMERATION_CAP};

/// Deterministic primality test by trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// The prime field `F_p`. Residues are `u64` values in `0..p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 32 {
            return Err(Error::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.p) {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    pub fn from_i64(&self, v: i64) -> u64 {
        (v as i128).rem_euclid(self.p as i128) as u64
    }

    pub fn from_bigint(&self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.p))
            .to_u64()
            .expect("residue fits in u64")
    }

    /// Quadratic character via Euler's criterion: 0, 1 or -1.
    pub fn quadratic_character(&self, a: u64) -> Result<i8> {
        if self.p == 2 {
            return Err(Error::EvenCharacteristic);
        }
        let a = a % self.p;
        if a == 0 {
            return Ok(0);
        }
        Ok(if self.pow(a, (self.p - 1) / 2) == 1 {
            1
        } else {
            -1
        })
    }
}

/// Free-function form of [`PrimeField::quadratic_character`].
pub fn quadratic_character(a: u64, field: PrimeField) -> Result<i8> {
    field.quadratic_character(a)
}

/// A polynomial over a prime field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FFPoly {
    field: PrimeField,
    coeffs: Vec<u64>,
}

impl FFPoly {
    /// Builds a polynomial from little-endian coefficients, reducing mod p.
    pub fn new(field: PrimeField, coeffs: Vec<u64>) -> Self {
        let p = field.p();
        let mut coeffs: Vec<u64> = coeffs.into_iter().map(|c| c % p).collect();
        trim(&mut coeffs);
        Self { field, coeffs }
    }

    pub fn from_i64(field: PrimeField, coeffs: &[i64]) -> Self {
        Self::new(field, coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn zero(field: PrimeField) -> Self {
        Self {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn one(field: PrimeField) -> Self {
        Self::constant(field, 1)
    }

    pub fn constant(field: PrimeField, c: u64) -> Self {
        Self::new(field, vec![c])
    }

    /// `c·T^deg`.
    pub fn monomial(field: PrimeField, deg: usize, c: u64) -> Self {
        let mut coeffs = vec![0; deg + 1];
        coeffs[deg] = c;
        Self::new(field, coeffs)
    }

    /// The polynomial `T`.
    pub fn t(field: PrimeField) -> Self {
        Self::monomial(field, 1, 1)
    }

    /// The monic polynomial of degree `n` whose lower coefficients are the
    /// base-`p` digits of `index` (coefficient of `T^0` least significant).
    pub fn monic_from_index(field: PrimeField, n: usize, mut index: u64) -> Self {
        let p = field.p();
        let mut coeffs = Vec::with_capacity(n + 1);
        for _ in 0..n {
            coeffs.push(index % p);
            index /= p;
        }
        coeffs.push(1);
        Self { field, coeffs }
    }

    /// Inverse of [`FFPoly::monic_from_index`]: the base-`p` number formed by
    /// the coefficients below the leading one.
    pub fn monic_index(&self) -> u64 {
        let p = self.field.p();
        let n = self.coeffs.len().saturating_sub(1);
        self.coeffs[..n]
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * p + c)
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// The `i`-th coefficient (zero beyond the degree).
    #[inline]
    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    #[inline]
    pub fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            Err(Error::FieldMismatch(self.field.p(), other.field.p()))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(self.mul_unchecked(other))
    }

    /// Quotient and remainder; the divisor must be nonzero.
    pub fn divrem(&self, divisor: &Self) -> Result<(Self, Self)> {
        self.check_field(divisor)?;
        self.divrem_unchecked(divisor)
    }

    pub fn rem(&self, divisor: &Self) -> Result<Self> {
        Ok(self.divrem(divisor)?.1)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(self.gcd_unchecked(other))
    }

    pub fn neg(&self) -> Self {
        let f = self.field;
        Self {
            field: f,
            coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect(),
        }
    }

    pub fn scale(&self, c: u64) -> Self {
        let f = self.field;
        Self::new(f, self.coeffs.iter().map(|&a| f.mul(a, c % f.p())).collect())
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Self {
        let f = self.field;
        let p = f.p();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| f.mul(c, (i as u64) % p))
            .collect();
        Self::new(f, coeffs)
    }

    /// Divides by the leading coefficient.
    pub fn to_monic(&self) -> Result<Self> {
        let lc = self.field.inv(self.leading()).ok_or(Error::ZeroPolynomial)?;
        Ok(self.scale(lc))
    }

    pub fn eval(&self, x: u64) -> u64 {
        let f = self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// `self^exp mod modulus`.
    pub fn pow_mod(&self, exp: u64, modulus: &Self) -> Result<Self> {
        self.check_field(modulus)?;
        if modulus.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow_mod_unchecked(exp, modulus))
    }

    /// Exact division; panics in debug builds if the remainder is nonzero.
    pub fn exact_div(&self, divisor: &Self) -> Result<Self> {
        let (q, r) = self.divrem(divisor)?;
        debug_assert!(r.is_zero(), "exact_div left a remainder");
        Ok(q)
    }

    pub fn divides(&self, other: &Self) -> Result<bool> {
        Ok(other.rem(self)?.is_zero())
    }

    /// Order used for deterministic output: by degree, then by the
    /// little-endian coefficient vector.
    pub fn cmp_canonical(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }

    /// Parses the canonical text form, e.g. `T^3+2*T+1`. Integer
    /// coefficients (including negative ones) are reduced mod p.
    pub fn parse(field: PrimeField, text: &str) -> Result<Self> {
        let terms = parse_terms(text, 'T')?;
        let deg = terms.iter().map(|&(_, e)| e).max().unwrap_or(0);
        let mut coeffs = vec![0u64; deg + 1];
        for (c, e) in terms {
            coeffs[e] = field.add(coeffs[e], field.from_bigint(&c));
        }
        Ok(Self::new(field, coeffs))
    }

    // Internal arithmetic without field checks.

    fn add_unchecked(&self, other: &Self) -> Self {
        let f = self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| f.add(self.coeff(i), other.coeff(i)))
            .collect();
        Self::new(f, coeffs)
    }

    fn sub_unchecked(&self, other: &Self) -> Self {
        let f = self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| f.sub(self.coeff(i), other.coeff(i)))
            .collect();
        Self::new(f, coeffs)
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.field);
        }
        let p = self.field.p();
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + a * b) % p;
            }
        }
        Self::new(self.field, out)
    }

    fn divrem_unchecked(&self, divisor: &Self) -> Result<(Self, Self)> {
        let f = self.field;
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let inv_lc = f.inv(divisor.leading()).expect("nonzero leading coefficient");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(f), self.clone()));
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = f.mul(rem[k + dd], inv_lc);
            quot[k] = c;
            if c != 0 {
                for (j, &d) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] = f.sub(rem[k + j], f.mul(c, d));
                }
            }
        }
        rem.truncate(dd);
        Ok((Self::new(f, quot), Self::new(f, rem)))
    }

    fn rem_unchecked(&self, divisor: &Self) -> Self {
        self.divrem_unchecked(divisor).expect("nonzero divisor").1
    }

    fn gcd_unchecked(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem_unchecked(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.to_monic().expect("nonzero")
        }
    }

    fn pow_mod_unchecked(&self, mut exp: u64, modulus: &Self) -> Self {
        let mut base = self.rem_unchecked(modulus);
        let mut acc = Self::one(self.field).rem_unchecked(modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul_unchecked(&base).rem_unchecked(modulus);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul_unchecked(&base).rem_unchecked(modulus);
            }
        }
        acc
    }
}

fn trim(coeffs: &mut Vec<u64>) {
    while coeffs.last() == Some(&0) {
        coeffs.pop();
    }
}

impl fmt::Debug for FFPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self, self.field.p())
    }
}

impl fmt::Display for FFPoly {
    /// Canonical rendering: descending powers, no spaces, `*` between a
    /// non-unit coefficient and `T`, e.g. `T^3+2*T+1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(BigInt, usize)> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (BigInt::from(c), i))
            .collect();
        write_terms(f, &terms, 'T')
    }
}

/// Writes `Σ c·V^e` in descending order of `e`, skipping zero terms.
pub(crate) fn write_terms(
    f: &mut fmt::Formatter<'_>,
    terms: &[(BigInt, usize)],
    var: char,
) -> fmt::Result {
    let mut first = true;
    for (c, e) in terms.iter().rev() {
        if c.is_zero() {
            continue;
        }
        let negative = c.is_negative();
        let mag = c.abs();
        if negative {
            f.write_str("-")?;
        } else if !first {
            f.write_str("+")?;
        }
        first = false;
        let unit = mag == BigInt::from(1);
        match *e {
            0 => write!(f, "{}", mag)?,
            1 if unit => write!(f, "{}", var)?,
            1 => write!(f, "{}*{}", mag, var)?,
            _ if unit => write!(f, "{}^{}", var, e)?,
            _ => write!(f, "{}*{}^{}", mag, var, e)?,
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

/// Parses `±c*V^e` terms; whitespace is ignored. Repeated exponents are
/// returned separately and must be summed by the caller.
pub(crate) fn parse_terms(text: &str, var: char) -> Result<Vec<(BigInt, usize)>> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let bad = |msg: &str| Error::Parse(alloc::format!("{msg} in {cleaned:?}"));
    let mut out = Vec::new();
    let bytes: Vec<char> = cleaned.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let mut sign = 1i32;
        if bytes[i] == '+' || bytes[i] == '-' {
            if bytes[i] == '-' {
                sign = -1;
            }
            i += 1;
        } else if i != 0 {
            return Err(bad("expected '+' or '-'"));
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let digits: String = bytes[start..i].iter().collect();
        let has_coeff = !digits.is_empty();
        let mut coeff = if has_coeff {
            digits.parse::<BigInt>().map_err(|_| bad("bad coefficient"))?
        } else {
            BigInt::from(1)
        };
        let mut exp = 0usize;
        if i < bytes.len() && bytes[i] == '*' {
            if !has_coeff {
                return Err(bad("dangling '*'"));
            }
            i += 1;
            if i >= bytes.len() || bytes[i] != var {
                return Err(bad("expected variable after '*'"));
            }
        }
        if i < bytes.len() && bytes[i] == var {
            i += 1;
            exp = 1;
            if i < bytes.len() && bytes[i] == '^' {
                i += 1;
                let s = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let e: String = bytes[s..i].iter().collect();
                exp = e.parse().map_err(|_| bad("bad exponent"))?;
            }
        } else if !has_coeff {
            return Err(bad("empty term"));
        }
        if sign < 0 {
            coeff = -coeff;
        }
        out.push((coeff, exp));
    }
    Ok(out)
}

/// A complete factorization `unit · Π factor^multiplicity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub unit: u64,
    /// Monic irreducible factors with multiplicities, in canonical order.
    pub factors: Vec<(FFPoly, u32)>,
}

impl Factorization {
    /// Multiplies the factorization back out.
    pub fn product(&self, field: PrimeField) -> FFPoly {
        let mut acc = FFPoly::constant(field, self.unit);
        for (g, m) in &self.factors {
            for _ in 0..*m {
                acc = acc.mul_unchecked(g);
            }
        }
        acc
    }

    /// Number of irreducible factors counted with multiplicity.
    pub fn count_with_multiplicity(&self) -> u32 {
        self.factors.iter().map(|(_, m)| m).sum()
    }

    /// Factor degrees with multiplicity, descending.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self
            .factors
            .iter()
            .flat_map(|(g, m)| core::iter::repeat_n(g.degree().unwrap_or(0), *m as usize))
            .collect();
        d.sort_unstable_by(|a, b| b.cmp(a));
        d
    }
}

/// Squarefree decomposition of a monic polynomial: pairs `(g_i, i)` with the
/// `g_i` squarefree, pairwise coprime and `f = Π g_i^i`.
pub fn squarefree_decomposition(f: &FFPoly) -> Vec<(FFPoly, u32)> {
    let field = f.field();
    let p = field.p();
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let mut c = f.gcd_unchecked(&f.derivative());
    let mut w = f.exact_div(&c).expect("c divides f");
    let mut i = 1u32;
    while !w.is_one() {
        let y = w.gcd_unchecked(&c);
        let z = w.exact_div(&y).expect("y divides w");
        if !z.is_one() {
            out.push((z, i));
        }
        i += 1;
        w = y;
        c = c.exact_div(&w).expect("w divides c");
    }
    if !c.is_one() {
        // c is a p-th power: c(T) = d(T^p) with d(T)^p = d(T^p) over F_p.
        let root_coeffs: Vec<u64> = c.coeffs.iter().step_by(p as usize).copied().collect();
        let root = FFPoly::new(field, root_coeffs);
        for (g, m) in squarefree_decomposition(&root) {
            out.push((g, m * p as u32));
        }
    }
    out
}

/// Distinct-degree factorization of a squarefree monic polynomial: pairs
/// `(g, d)` where `g` is the product of all irreducible factors of degree `d`.
pub fn distinct_degree_factorization(f: &FFPoly) -> Vec<(FFPoly, usize)> {
    let field = f.field();
    let p = field.p();
    let t = FFPoly::t(field);
    let mut out = Vec::new();
    let mut rest = f.clone();
    let mut h = t.rem_unchecked(&rest);
    let mut d = 1usize;
    while rest.degree().unwrap_or(0) >= 2 * d {
        h = h.pow_mod_unchecked(p, &rest);
        let g = h.sub_unchecked(&t).gcd_unchecked(&rest);
        if !g.is_one() {
            rest = rest.exact_div(&g).expect("g divides rest");
            h = h.rem_unchecked(&rest);
            out.push((g, d));
        }
        d += 1;
    }
    if let Some(deg) = rest.degree() {
        if deg > 0 {
            out.push((rest, deg));
        }
    }
    out
}

/// Splits a squarefree monic product of irreducibles of common degree `d`.
fn equal_degree_split(g: &FFPoly, d: usize, rng: &mut ChaCha8Rng, out: &mut Vec<FFPoly>) {
    let n = g.degree().unwrap_or(0);
    if n == d {
        out.push(g.clone());
        return;
    }
    let field = g.field();
    let p = field.p();
    loop {
        let a = FFPoly::new(field, (0..n).map(|_| rng.gen_range(0..p)).collect());
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let b = if p == 2 {
            // Trace map F_{2^d} -> F_2.
            let mut acc = a.rem_unchecked(g);
            let mut cur = acc.clone();
            for _ in 1..d {
                cur = cur.mul_unchecked(&cur).rem_unchecked(g);
                acc = acc.add_unchecked(&cur);
            }
            acc
        } else {
            // a^((p^d - 1)/2) = (a · a^p ··· a^(p^(d-1)))^((p-1)/2)
            let mut norm = a.rem_unchecked(g);
            let mut cur = norm.clone();
            for _ in 1..d {
                cur = cur.pow_mod_unchecked(p, g);
                norm = norm.mul_unchecked(&cur).rem_unchecked(g);
            }
            norm.pow_mod_unchecked((p - 1) / 2, g)
                .sub_unchecked(&FFPoly::one(field))
        };
        let h = b.gcd_unchecked(g);
        let hd = h.degree().unwrap_or(0);
        if hd > 0 && hd < n {
            let other = g.exact_div(&h).expect("h divides g");
            equal_degree_split(&h, d, rng, out);
            equal_degree_split(&other, d, rng, out);
            return;
        }
    }
}

fn sort_factors(factors: &mut [(FFPoly, u32)]) {
    factors.sort_by(|a, b| a.0.cmp_canonical(&b.0));
}

/// Complete factorization into monic irreducibles.
pub fn factor(f: &FFPoly) -> Result<Factorization> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let field = f.field();
    let unit = f.leading();
    let monic = f.to_monic()?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6f78_6761_6c00 ^ field.p());
    let mut factors = Vec::new();
    for (sqf, mult) in squarefree_decomposition(&monic) {
        for (g, d) in distinct_degree_factorization(&sqf) {
            let mut pieces = Vec::new();
            equal_degree_split(&g, d, &mut rng, &mut pieces);
            factors.extend(pieces.into_iter().map(|h| (h, mult)));
        }
    }
    sort_factors(&mut factors);
    Ok(Factorization { unit, factors })
}

/// Factorization by trial division against all monic polynomials of
/// increasing degree. Exponential in the degree; intended as an oracle for
/// small inputs.
pub fn factor_trial_division(f: &FFPoly) -> Result<Factorization> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let field = f.field();
    let unit = f.leading();
    let mut rest = f.to_monic()?;
    let mut factors: Vec<(FFPoly, u32)> = Vec::new();
    let mut d = 1usize;
    while rest.degree().unwrap_or(0) >= 2 * d {
        let count = field.p().pow(d as u32);
        for idx in 0..count {
            let cand = FFPoly::monic_from_index(field, d, idx);
            let mut m = 0u32;
            loop {
                let (q, r) = rest.divrem_unchecked(&cand)?;
                if !r.is_zero() {
                    break;
                }
                rest = q;
                m += 1;
            }
            if m > 0 {
                factors.push((cand, m));
            }
        }
        d += 1;
    }
    if rest.degree().unwrap_or(0) > 0 {
        match factors.iter_mut().find(|(g, _)| *g == rest) {
            Some(entry) => entry.1 += 1,
            None => factors.push((rest, 1)),
        }
    }
    sort_factors(&mut factors);
    Ok(Factorization { unit, factors })
}

/// Rabin's irreducibility test.
pub fn is_irreducible(f: &FFPoly) -> bool {
    let n = match f.degree() {
        Some(n) if n >= 1 => n,
        _ => return false,
    };
    if n == 1 {
        return true;
    }
    let field = f.field();
    let p = field.p();
    let t = FFPoly::t(field);
    // frob[k] = T^(p^k) mod f
    let mut frob = Vec::with_capacity(n + 1);
    let mut cur = t.rem_unchecked(f);
    frob.push(cur.clone());
    for _ in 0..n {
        cur = cur.pow_mod_unchecked(p, f);
        frob.push(cur.clone());
    }
    if frob[n] != t.rem_unchecked(f) {
        return false;
    }
    let mut m = n;
    let mut q = 2;
    while m > 1 {
        if m % q == 0 {
            while m % q == 0 {
                m /= q;
            }
            let g = frob[n / q].sub_unchecked(&t).gcd_unchecked(f);
            if !g.is_one() {
                return false;
            }
        }
        q += 1;
    }
    true
}

/// `true` iff `gcd(F, F') = 1`.
pub fn is_squarefree(f: &FFPoly) -> Result<bool> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(f.gcd_unchecked(&f.derivative()).is_one())
}

/// Möbius function of a monic polynomial: `(-1)^r` for a product of `r`
/// distinct irreducibles, 0 otherwise.
pub fn moebius(f: &FFPoly) -> Result<i8> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    if !is_squarefree(f)? {
        return Ok(0);
    }
    let r: usize = distinct_degree_factorization(f)
        .iter()
        .map(|(g, d)| g.degree().unwrap_or(0) / d)
        .sum();
    Ok(if r.is_multiple_of(2) { 1 } else { -1 })
}

/// Resultant via the Euclidean remainder sequence.
pub fn resultant(f: &FFPoly, g: &FFPoly) -> Result<u64> {
    f.check_field(g)?;
    if f.is_zero() || g.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(resultant_nonzero(f, g))
}

fn resultant_nonzero(f: &FFPoly, g: &FFPoly) -> u64 {
    let field = f.field();
    let mut a = f.clone();
    let mut b = g.clone();
    let mut acc = 1u64;
    loop {
        let m = a.degree().expect("nonzero");
        let n = b.degree().expect("nonzero");
        if n == 0 {
            return field.mul(acc, field.pow(b.leading(), m as u64));
        }
        if m == 0 {
            return field.mul(acc, field.pow(a.leading(), n as u64));
        }
        let r = a.rem_unchecked(&b);
        let Some(rd) = r.degree() else {
            return 0;
        };
        // Res(a, b) = (-1)^(mn) lc(b)^(m - deg r) Res(b, r)
        if (m * n) % 2 == 1 {
            acc = field.neg(acc);
        }
        acc = field.mul(acc, field.pow(b.leading(), (m - rd) as u64));
        a = b;
        b = r;
    }
}

/// Discriminant `(-1)^(n(n-1)/2) Res(F, F')` of a monic polynomial of
/// degree `n ≥ 1`. Zero exactly when `F` is not squarefree.
pub fn discriminant(f: &FFPoly) -> Result<u64> {
    let n = f.degree().ok_or(Error::ZeroPolynomial)?;
    if n == 0 {
        return Err(Error::ConstantPolynomial);
    }
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    let field = f.field();
    let df = f.derivative();
    if df.is_zero() {
        return Ok(0);
    }
    let r = resultant_nonzero(f, &df);
    Ok(if (n * (n - 1) / 2) % 2 == 1 {
        field.neg(r)
    } else {
        r
    })
}

/// `p^n`, or `None` on overflow of `u128`.
pub fn monic_count(p: u64, n: usize) -> Option<u128> {
    (p as u128).checked_pow(n as u32)
}

/// Iterator over `M_{p,n}` in index order (see [`FFPoly::monic_from_index`]).
#[derive(Debug, Clone)]
pub struct MonicIter {
    field: PrimeField,
    n: usize,
    next: u64,
    end: u64,
}

impl MonicIter {
    /// Restricts the iterator to the index range `start..end`, for
    /// partitioned scans.
    pub fn range(field: PrimeField, n: usize, start: u64, end: u64) -> Self {
        Self {
            field,
            n,
            next: start,
            end,
        }
    }
}

impl Iterator for MonicIter {
    type Item = FFPoly;

    fn next(&mut self) -> Option<FFPoly> {
        if self.next >= self.end {
            return None;
        }
        let f = FFPoly::monic_from_index(self.field, self.n, self.next);
        self.next += 1;
        Some(f)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for MonicIter {}

/// All monic polynomials of degree `n`, guarded by the default cap.
pub fn enumerate_monic(field: PrimeField, n: usize) -> Result<MonicIter> {
    enumerate_monic_capped(field, n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_monic_capped(field: PrimeField, n: usize, cap: u64) -> Result<MonicIter> {
    let size = monic_count(field.p(), n).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::EnumerationCap { size, cap });
    }
    Ok(MonicIter::range(field, n, 0, size as u64))
}
