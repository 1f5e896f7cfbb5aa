//! Coefficient laws on ℤ, their reductions mod `d`, and the pushforward
//! measure `ℙ_𝒫` on `M_{𝒫,n}`.
//!
//! A [`ProductMeasure`] stores one exact probability row per coefficient slot,
//! indexed by residue mod `P`. The mass of a tuple is the product of the row
//! entries at its CRT residues, and its Fourier transform factors slot by
//! slot.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::ffpoly::FFPoly;
use crate::fourier::{self, Grid, GridFunction};
use crate::math;
use crate::torus::PrimeSet;
use crate::{Error, Result};

/// Law of a single integer coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoeffLaw {
    /// Uniform on `[a+1, a+L] ∩ ℤ`.
    UniformBox { a: i64, len: u64 },
    /// Finite support with exact probabilities summing to one.
    Explicit(BTreeMap<i64, BigRational>),
}

impl CoeffLaw {
    pub fn uniform_box(a: i64, len: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::Domain("box length L must be at least 1".into()));
        }
        if (a as i128) + (len as i128) > i64::MAX as i128 {
            return Err(Error::Domain("box exceeds the i64 range".into()));
        }
        Ok(Self::UniformBox { a, len })
    }

    pub fn explicit(masses: impl IntoIterator<Item = (i64, BigRational)>) -> Result<Self> {
        let mut map: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (v, m) in masses {
            if m.is_negative() {
                return Err(Error::Domain(format!("negative mass at {v}")));
            }
            *map.entry(v).or_insert_with(BigRational::zero) += m;
        }
        map.retain(|_, m| !m.is_zero());
        let total: BigRational = map.values().cloned().sum();
        if !total.is_one() {
            return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self::Explicit(map))
    }

    pub fn point_mass(v: i64) -> Self {
        let mut map = BTreeMap::new();
        map.insert(v, BigRational::one());
        Self::Explicit(map)
    }

    /// Box length for uniform laws.
    pub fn box_len(&self) -> Option<u64> {
        match self {
            Self::UniformBox { len, .. } => Some(*len),
            Self::Explicit(_) => None,
        }
    }

    /// Exact `ℙ(ζ ≡ u mod d)` for `u = 0..d`.
    pub fn residue_law(&self, d: u64) -> Result<Vec<BigRational>> {
        if d == 0 {
            return Err(Error::Domain("modulus d must be at least 1".into()));
        }
        match self {
            Self::UniformBox { a, len } => {
                let denom = BigInt::from(*len);
                Ok(box_residue_counts(*a, *len, d)
                    .into_iter()
                    .map(|c| BigRational::new(BigInt::from(c), denom.clone()))
                    .collect())
            }
            Self::Explicit(map) => {
                let mut row = vec![BigRational::zero(); d as usize];
                for (&v, m) in map {
                    row[(v as i128).rem_euclid(d as i128) as usize] += m;
                }
                Ok(row)
            }
        }
    }

    /// Floating point version of [`CoeffLaw::residue_law`].
    pub fn residue_law_f64(&self, d: u64) -> Result<Vec<f64>> {
        Ok(self
            .residue_law(d)?
            .iter()
            .map(|q| q.to_f64().unwrap_or(f64::NAN))
            .collect())
    }

    pub fn sampler(&self) -> LawSampler {
        LawSampler::new(self)
    }
}

/// `#{v ∈ [a+1, a+L] : v ≡ u (mod d)}` for every `u`, by floor arithmetic.
fn box_residue_counts(a: i64, len: u64, d: u64) -> Vec<u64> {
    let d = d as i128;
    let lo = a as i128;
    let hi = lo + len as i128;
    (0..d)
        .map(|u| ((hi - u).div_euclid(d) - (lo - u).div_euclid(d)) as u64)
        .collect()
}

/// Draws from a [`CoeffLaw`]. Explicit laws with a common denominator that
/// fits in 64 bits are sampled exactly by integer thresholds.
#[derive(Debug, Clone)]
pub struct LawSampler {
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Box { a: i64, len: u64 },
    Exact { values: Vec<i64>, cumulative: Vec<u64>, total: u64 },
    Float { values: Vec<i64>, cumulative: Vec<f64> },
}

impl LawSampler {
    fn new(law: &CoeffLaw) -> Self {
        let kind = match law {
            CoeffLaw::UniformBox { a, len } => SamplerKind::Box { a: *a, len: *len },
            CoeffLaw::Explicit(map) => {
                let values: Vec<i64> = map.keys().copied().collect();
                let lcm = map
                    .values()
                    .fold(BigInt::one(), |acc, m| acc.lcm(m.denom()));
                match lcm.to_u64() {
                    Some(total) => {
                        let mut acc = 0u64;
                        let cumulative = map
                            .values()
                            .map(|m| {
                                acc += (m.numer() * (&lcm / m.denom())).to_u64().expect("≤ total");
                                acc
                            })
                            .collect();
                        SamplerKind::Exact { values, cumulative, total }
                    }
                    None => {
                        let mut acc = 0.0;
                        let cumulative = map
                            .values()
                            .map(|m| {
                                acc += m.to_f64().unwrap_or(0.0);
                                acc
                            })
                            .collect();
                        SamplerKind::Float { values, cumulative }
                    }
                }
            }
        };
        Self { kind }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        match &self.kind {
            SamplerKind::Box { a, len } => a + 1 + rng.gen_range(0..*len) as i64,
            SamplerKind::Exact { values, cumulative, total } => {
                let x = rng.gen_range(0..*total);
                let i = cumulative.partition_point(|&c| c <= x);
                values[i]
            }
            SamplerKind::Float { values, cumulative } => {
                let x = rng.gen::<f64>() * cumulative.last().copied().unwrap_or(1.0);
                let i = cumulative.partition_point(|&c| c <= x).min(values.len() - 1);
                values[i]
            }
        }
    }
}

/// Independent coefficient laws for `f = X^n + Σ_{k<n} ζ_k X^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyLaw {
    laws: Vec<CoeffLaw>,
}

impl PolyLaw {
    /// `laws[k]` is the law of the coefficient of `X^k`.
    pub fn new(laws: Vec<CoeffLaw>) -> Self {
        Self { laws }
    }

    pub fn iid(law: CoeffLaw, n: usize) -> Self {
        Self {
            laws: vec![law; n],
        }
    }

    /// Point mass at the given monic polynomial (lower coefficients only).
    pub fn point_mass(lower: &[i64]) -> Self {
        Self::new(lower.iter().map(|&v| CoeffLaw::point_mass(v)).collect())
    }

    pub fn degree(&self) -> usize {
        self.laws.len()
    }

    pub fn laws(&self) -> &[CoeffLaw] {
        &self.laws
    }

    /// Common box length if every coefficient is uniform on a box of the
    /// same length.
    pub fn common_box(&self) -> Option<(i64, u64)> {
        let mut out = None;
        for law in &self.laws {
            match law {
                CoeffLaw::UniformBox { a, len } => match out {
                    None => out = Some((*a, *len)),
                    Some((_, l)) if l == *len => {}
                    _ => return None,
                },
                CoeffLaw::Explicit(_) => return None,
            }
        }
        out
    }
}

/// Exact pushforward `ℙ_𝒫` of a [`PolyLaw`] on `M_{𝒫,n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeasure {
    primes: PrimeSet,
    n: usize,
    modulus: u64,
    weight: u64,
    rows: Vec<Vec<BigRational>>,
    rows_f64: Vec<Vec<f64>>,
}

/// Construction needs `n·P` storage; this caps `P`.
pub const MAX_MEASURE_MODULUS: u64 = 10_000_000;

impl ProductMeasure {
    pub fn pushforward(law: &PolyLaw, primes: &PrimeSet) -> Result<Self> {
        let modulus = primes.modulus()?;
        if modulus > MAX_MEASURE_MODULUS {
            return Err(Error::Domain(format!(
                "P = {modulus} exceeds the measure storage limit {MAX_MEASURE_MODULUS}"
            )));
        }
        let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(law.degree());
        let mut cache: Vec<(&CoeffLaw, usize)> = Vec::new();
        for l in law.laws() {
            if let Some(&(_, k)) = cache.iter().find(|(c, _)| *c == l) {
                let row: Vec<BigRational> = rows[k].clone();
                rows.push(row);
            } else {
                cache.push((l, rows.len()));
                rows.push(l.residue_law(modulus)?);
            }
        }
        Self::from_rows(primes.clone(), rows)
    }

    /// Builds a measure from explicit rows (row `k` = law of coefficient `k`
    /// mod `P`). Each row must sum to one.
    pub fn from_rows(primes: PrimeSet, rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let modulus = primes.modulus()?;
        for (k, row) in rows.iter().enumerate() {
            if row.len() as u64 != modulus {
                return Err(Error::DimensionMismatch(format!("row {k} has length {}", row.len())));
            }
            let s: BigRational = row.iter().cloned().sum();
            if !s.is_one() {
                return Err(Error::Domain(format!("row {k} sums to {s}")));
            }
        }
        let rows_f64 = rows
            .iter()
            .map(|r| r.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        Ok(Self {
            n: rows.len(),
            weight: primes.pairing_weight()?,
            primes,
            modulus,
            rows,
            rows_f64,
        })
    }

    /// Uniform measure on `M_{𝒫,n}`.
    pub fn uniform(primes: &PrimeSet, n: usize) -> Result<Self> {
        let m = primes.modulus()?;
        Self::pushforward(&PolyLaw::iid(CoeffLaw::uniform_box(0, m)?, n), primes)
    }

    pub fn primes(&self) -> &PrimeSet {
        &self.primes
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    pub fn rows_f64(&self) -> &[Vec<f64>] {
        &self.rows_f64
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.primes.clone(), self.n)
    }

    pub fn grid_capped(&self, cap: u64) -> Result<Grid> {
        Grid::with_cap(self.primes.clone(), self.n, cap)
    }

    /// CRT residues of the lower coefficients of a tuple.
    pub fn digits_of(&self, tuple: &[FFPoly]) -> Result<Vec<u64>> {
        if tuple.len() != self.primes.len() {
            return Err(Error::DimensionMismatch("tuple length".into()));
        }
        for (f, &p) in tuple.iter().zip(self.primes.primes()) {
            if f.field().p() != p {
                return Err(Error::FieldMismatch(f.field().p(), p));
            }
            if f.degree() != Some(self.n) || !f.is_monic() {
                return Err(Error::DimensionMismatch("tuple entry is not monic of degree n".into()));
            }
        }
        (0..self.n)
            .map(|k| {
                let r: Vec<u64> = tuple.iter().map(|f| f.coeff(k)).collect();
                self.primes.crt_join(&r)
            })
            .collect()
    }

    /// `ℙ_𝒫(F)` exactly.
    pub fn measure_of(&self, tuple: &[FFPoly]) -> Result<BigRational> {
        Ok(self.mass_of_digits(&self.digits_of(tuple)?))
    }

    pub fn mass_of_digits(&self, digits: &[u64]) -> BigRational {
        let mut acc = BigRational::one();
        for (row, &d) in self.rows.iter().zip(digits) {
            let v = &row[d as usize];
            if v.is_zero() {
                return BigRational::zero();
            }
            acc *= v;
        }
        acc
    }

    pub fn mass_of_digits_f64(&self, digits: &[u64]) -> f64 {
        self.rows_f64
            .iter()
            .zip(digits)
            .map(|(row, &d)| row[d as usize])
            .product()
    }

    /// Marginal on a subset of the primes.
    pub fn project(&self, sub: &PrimeSet) -> Result<Self> {
        if sub.primes().iter().any(|p| self.primes.index_of(*p).is_none()) {
            return Err(Error::NotSubset);
        }
        let q = sub.modulus()?;
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = vec![BigRational::zero(); q as usize];
                for (r, v) in row.iter().enumerate() {
                    out[r % q as usize] += v;
                }
                out
            })
            .collect();
        Self::from_rows(sub.clone(), rows)
    }

    /// The measure as a real grid function (float mode).
    pub fn to_grid_function(&self) -> Result<GridFunction> {
        let grid = self.grid()?;
        let values = (0..grid.size())
            .map(|i| Complex64::new(self.mass_of_digits_f64(&grid.digits(i)), 0.0))
            .collect();
        GridFunction::new(grid, values)
    }

    /// `λ̂_k(c) = Σ_r ℙ(ζ_k ≡ r mod P) e(w·c·r/P)`, the transform of slot `k`.
    pub fn slot_transform(&self, k: usize, c: u64) -> Complex64 {
        let m = self.modulus;
        let step = (self.weight as u128 * (c % m) as u128 % m as u128) as u64;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut phase = 0u64;
        for &v in &self.rows_f64[k] {
            if v != 0.0 {
                acc += math::unit_root(phase, m) * v;
            }
            phase = (phase + step) % m;
        }
        acc
    }

    /// Full table `λ̂_k(c)` for every `c ∈ ℤ/P`.
    pub fn slot_spectrum(&self, k: usize) -> Vec<Complex64> {
        let m = self.modulus as usize;
        let table = math::unit_root_table(self.modulus);
        let w = self.weight as usize;
        let row = &self.rows_f64[k];
        (0..m)
            .map(|c| {
                let step = (w as u128 * c as u128 % m as u128) as usize;
                let mut phase = 0usize;
                let mut acc = Complex64::new(0.0, 0.0);
                for &v in row {
                    if v != 0.0 {
                        acc += table[phase] * v;
                    }
                    phase += step;
                    if phase >= m {
                        phase -= m;
                    }
                }
                acc
            })
            .collect()
    }

    /// `ℙ̂_𝒫(T^{-n}G)` from the CRT digits of `G`.
    pub fn fourier_at_digits(&self, g_digits: &[u64]) -> Complex64 {
        let n = self.n;
        (0..n).fold(Complex64::new(1.0, 0.0), |acc, j| {
            acc * self.slot_transform(j, g_digits[n - 1 - j])
        })
    }
}

/// `ℙ(ζ ≡ u mod d)` for `u = 0..d`.
pub fn residue_law(law: &CoeffLaw, d: u64) -> Result<Vec<BigRational>> {
    law.residue_law(d)
}

/// Pushforward of a polynomial law to `M_{𝒫,n}`.
pub fn pushforward(law: &PolyLaw, primes: &PrimeSet) -> Result<ProductMeasure> {
    ProductMeasure::pushforward(law, primes)
}

/// `ℙ̂_𝒫(T^{-n}G)` by the slot factorization, cost `O(n·P)`.
pub fn measure_fourier_at(m: &ProductMeasure, g: &[FFPoly]) -> Result<Complex64> {
    Ok(m.fourier_at_digits(&m.digits_of(g)?))
}

/// `Σ_{G ∈ M_{𝒫,n}} |ℙ̂_𝒫(T^{-n}G)|^γ`, computed as
/// `Π_k Σ_{c ∈ ℤ/P} |λ̂_k(c)|^γ` (the `n` free coefficients of `G` range
/// independently over `ℤ/P`).
pub fn l_gamma_norm(m: &ProductMeasure, gamma: f64) -> Result<f64> {
    if !(gamma >= 1.0) {
        return Err(Error::Domain(format!("gamma must be at least 1, got {gamma}")));
    }
    Ok((0..m.n)
        .map(|k| {
            m.slot_spectrum(k)
                .into_iter()
                .map(|z| math::powf(math::abs(z), gamma))
                .sum::<f64>()
        })
        .product())
}

/// Same quantity by transforming the expanded grid function term by term.
pub fn l_gamma_norm_naive(m: &ProductMeasure, gamma: f64) -> Result<f64> {
    if !(gamma >= 1.0) {
        return Err(Error::Domain(format!("gamma must be at least 1, got {gamma}")));
    }
    let eta = m.to_grid_function()?;
    let grid = eta.grid().clone();
    let mut total = 0.0;
    for g in 0..grid.size() {
        let z = fourier::transform_at(&eta, &grid.tuple(g))?;
        total += math::powf(math::abs(z), gamma);
    }
    Ok(total)
}

/// `(1 + P(P-1)/L)^n`.
pub fn l1_bound(primes: &PrimeSet, len: u64, n: usize) -> Result<f64> {
    if len == 0 {
        return Err(Error::Domain("L must be at least 1".into()));
    }
    let p = primes.product_big().to_f64().unwrap_or(f64::INFINITY);
    Ok(math::powf(1.0 + p * (p - 1.0) / len as f64, n as f64))
}

/// `ω(p) = h(p)²/p - 1` together with the `h` it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaWitness {
    pub h: BTreeMap<u64, f64>,
    pub omega: BTreeMap<u64, f64>,
    /// `false` when `ω` was supplied as a bare table.
    pub verified: bool,
}

impl OmegaWitness {
    /// A user-supplied `ω` table that has not been derived from `h`.
    pub fn unverified(omega: BTreeMap<u64, f64>) -> Self {
        Self {
            h: BTreeMap::new(),
            omega,
            verified: false,
        }
    }

    pub fn omega(&self, p: u64) -> Option<f64> {
        self.omega.get(&p).copied()
    }
}

/// Why an `h` function fails the residue hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub enum HViolation {
    /// `h(p) ≤ 0` or `h(p)² ≤ p`.
    BadH { p: u64, h: f64 },
    /// `ℙ(ζ_k ≡ u mod d) > Π_{p|d} h(p)^{-1}`.
    Exceeded { d: u64, u: u64, k: usize, prob: f64, limit: f64 },
    /// The law could not be reduced (e.g. `P` too large).
    Unsupported(Error),
}

/// Checks `ℙ(ζ_k ≡ u mod d) ≤ Π_{p|d} h(p)^{-1}` for every squarefree
/// `d | P`, every residue `u` and every `k < n`; on success returns
/// `ω(p) = h(p)²/p - 1`. Comparisons are exact.
pub fn check_h_condition(
    law: &PolyLaw,
    primes: &PrimeSet,
    h: impl Fn(u64) -> f64,
) -> core::result::Result<OmegaWitness, HViolation> {
    let mut hs = BTreeMap::new();
    let mut h_exact = BTreeMap::new();
    for &p in primes.primes() {
        let v = h(p);
        if !(v > 0.0) || v * v <= p as f64 {
            return Err(HViolation::BadH { p, h: v });
        }
        hs.insert(p, v);
        h_exact.insert(p, BigRational::from_float(v).expect("finite"));
    }
    let s = primes.len();
    let mut seen: Vec<&CoeffLaw> = Vec::new();
    for (k, l) in law.laws().iter().enumerate() {
        if seen.contains(&l) {
            continue;
        }
        seen.push(l);
        for mask in 1u32..(1 << s) {
            let mut d = 1u64;
            let mut limit = BigRational::one();
            for (i, &p) in primes.primes().iter().enumerate() {
                if mask & (1 << i) != 0 {
                    d *= p;
                    limit /= &h_exact[&p];
                }
            }
            let row = l.residue_law(d).map_err(HViolation::Unsupported)?;
            for (u, prob) in row.iter().enumerate() {
                if *prob > limit {
                    return Err(HViolation::Exceeded {
                        d,
                        u: u as u64,
                        k,
                        prob: prob.to_f64().unwrap_or(f64::NAN),
                        limit: limit.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
    }
    let omega = hs.iter().map(|(&p, &v)| (p, v * v / p as f64 - 1.0)).collect();
    Ok(OmegaWitness {
        h: hs,
        omega,
        verified: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn ps(v: &[u64]) -> PrimeSet {
        PrimeSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn residue_law_example() {
        let law = CoeffLaw::uniform_box(0, 10).unwrap();
        assert_eq!(law.residue_law(3).unwrap(), vec![q(3, 10), q(4, 10), q(3, 10)]);
        let law = CoeffLaw::uniform_box(-7, 12).unwrap();
        assert!(law.residue_law(4).unwrap().iter().all(|x| *x == q(1, 4)));
        assert!(law.residue_law(0).is_err());
    }

    #[test]
    fn residue_law_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = rng.gen_range(-100i64..100);
            let len = rng.gen_range(1u64..60);
            let d = rng.gen_range(1u64..20);
            let mut counts = vec![0u64; d as usize];
            for v in a + 1..=a + len as i64 {
                counts[v.rem_euclid(d as i64) as usize] += 1;
            }
            assert_eq!(box_residue_counts(a, len, d), counts);
        }
    }

    #[test]
    fn explicit_law_validation() {
        assert!(CoeffLaw::explicit([(0, q(1, 2)), (1, q(1, 3))]).is_err());
        assert!(CoeffLaw::explicit([(0, q(-1, 2)), (1, q(3, 2))]).is_err());
        let law = CoeffLaw::explicit([(0, q(1, 2)), (5, q(1, 2))]).unwrap();
        assert_eq!(law.residue_law(5).unwrap()[0], BigRational::one());
    }

    #[test]
    fn sampler_respects_support() {
        let law = CoeffLaw::explicit([(-3, q(1, 4)), (7, q(3, 4))]).unwrap();
        let s = law.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws: Vec<i64> = (0..4000).map(|_| s.sample(&mut rng)).collect();
        assert!(draws.iter().all(|v| *v == -3 || *v == 7));
        let sevens = draws.iter().filter(|v| **v == 7).count() as f64 / 4000.0;
        assert!((sevens - 0.75).abs() < 0.03);
        let b = CoeffLaw::uniform_box(-2, 5).unwrap().sampler();
        assert!((0..1000).map(|_| b.sample(&mut rng)).all(|v| (-1..=3).contains(&v)));
    }

    #[test]
    fn pushforward_total_mass() {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(3, 7).unwrap(), 2);
        let m = ProductMeasure::pushforward(&law, &ps(&[2, 3])).unwrap();
        let grid = m.grid().unwrap();
        let total: BigRational = (0..grid.size()).map(|i| m.mass_of_digits(&grid.digits(i))).sum();
        assert!(total.is_one());
    }

    #[test]
    fn period_box_is_uniform() {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(-4, 6).unwrap(), 2);
        let m = ProductMeasure::pushforward(&law, &ps(&[2, 3])).unwrap();
        let grid = m.grid().unwrap();
        for i in 0..grid.size() {
            assert_eq!(m.mass_of_digits(&grid.digits(i)), q(1, 36));
        }
    }

    #[test]
    fn marginal_consistency() {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(1, 7).unwrap(), 2);
        let big = ProductMeasure::pushforward(&law, &ps(&[2, 3])).unwrap();
        let small = ProductMeasure::pushforward(&law, &ps(&[2])).unwrap();
        assert_eq!(big.project(&ps(&[2])).unwrap(), small);
        assert_eq!(big.project(&ps(&[5])), Err(Error::NotSubset));
    }

    #[test]
    fn fourier_at_origin_is_one() {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(-2, 7).unwrap(), 3);
        let m = ProductMeasure::pushforward(&law, &ps(&[3])).unwrap();
        let z = m.fourier_at_digits(&[0, 0, 0]);
        assert!(math::abs(z - Complex64::new(1.0, 0.0)) < 1e-14);
    }

    #[test]
    fn uniform_residues_kill_nonzero_frequencies() {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(0, 12).unwrap(), 2);
        let m = ProductMeasure::pushforward(&law, &ps(&[2, 3])).unwrap();
        let grid = m.grid().unwrap();
        for g in 1..grid.size() {
            assert!(math::abs(m.fourier_at_digits(&grid.digits(g))) < 1e-14);
        }
    }

    #[test]
    fn factorized_transform_matches_naive() {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(-2, 7).unwrap(), 3);
        let m = ProductMeasure::pushforward(&law, &ps(&[3])).unwrap();
        let eta = m.to_grid_function().unwrap();
        let grid = eta.grid().clone();
        for g in 0..grid.size() {
            let tuple = grid.tuple(g);
            let fast = measure_fourier_at(&m, &tuple).unwrap();
            let naive = fourier::transform_at(&eta, &tuple).unwrap();
            assert!(math::abs(fast - naive) < 1e-12);
        }
    }

    #[test]
    fn l_gamma_examples() {
        let uniform = ProductMeasure::uniform(&ps(&[2, 3]), 2).unwrap();
        assert!((l_gamma_norm(&uniform, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let law = PolyLaw::iid(CoeffLaw::uniform_box(0, 30).unwrap(), 2);
        let m = ProductMeasure::pushforward(&law, &ps(&[2, 3])).unwrap();
        let v = l_gamma_norm(&m, 1.0).unwrap();
        assert!((1.0..=4.0).contains(&v));
        assert!((l1_bound(&ps(&[2, 3]), 30, 2).unwrap() - 4.0).abs() < 1e-12);
        let law = PolyLaw::iid(CoeffLaw::uniform_box(0, 7).unwrap(), 2);
        let m = ProductMeasure::pushforward(&law, &ps(&[2, 3])).unwrap();
        for gamma in [1.0, 1.2, 2.0] {
            let a = l_gamma_norm(&m, gamma).unwrap();
            let b = l_gamma_norm_naive(&m, gamma).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert!(l_gamma_norm(&m, 0.5).is_err());
    }

    #[test]
    fn l1_bound_large_len() {
        let v = l1_bound(&ps(&[2, 3]), 1_000_000, 5).unwrap();
        assert!((v - libm::pow(1.0 + 3e-5, 5.0)).abs() < 1e-15);
    }

    #[test]
    fn h_condition_examples() {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(0, 35).unwrap(), 3);
        let w = check_h_condition(&law, &ps(&[5, 7]), |p| p as f64 / 2.0).unwrap();
        assert!((w.omega(5).unwrap() - 0.25).abs() < 1e-12);
        assert!((w.omega(7).unwrap() - 0.75).abs() < 1e-12);
        assert!(w.verified);

        let point = PolyLaw::point_mass(&[0, 0]);
        match check_h_condition(&point, &ps(&[5]), |p| p as f64 / 2.0) {
            Err(HViolation::Exceeded { d: 5, u: 0, k: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            check_h_condition(&law, &ps(&[5]), |_| 2.0),
            Err(HViolation::BadH { p: 5, .. })
        ));
    }
}
