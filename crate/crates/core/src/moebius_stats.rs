//! Expectations of `μ_𝒬` and `η_𝒬` under a pushforward measure.
//!
//! `E(μ_𝒬)` is available by direct enumeration (exact) and by the Fourier
//! expansion over the frequencies with `G_p = T^n` off `𝒬` (floating point).
//! `E(η_𝒬)` is available by direct enumeration and by the alternating
//! square-divisor sum, both exact.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ffpoly::{moebius, FFPoly, MonicIter, PrimeField};
use crate::fourier::{self, Spectrum};
use crate::math;
use crate::measures::ProductMeasure;
use crate::torus::PrimeSet;
use crate::{Error, Result, DEFAULT_ENUMERATION_CAP};

/// A subset `𝒬` of an ambient prime set, stored as a bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSelector {
    ambient: PrimeSet,
    mask: u64,
}

impl SubsetSelector {
    pub fn new(ambient: &PrimeSet, subset: &[u64]) -> Result<Self> {
        let mut mask = 0u64;
        for p in subset {
            let i = ambient.index_of(*p).ok_or(Error::NotSubset)?;
            mask |= 1 << i;
        }
        Self::from_mask(ambient, mask)
    }

    pub fn from_mask(ambient: &PrimeSet, mask: u64) -> Result<Self> {
        if ambient.len() >= 64 || mask >> ambient.len() != 0 {
            return Err(Error::NotSubset);
        }
        Ok(Self {
            ambient: ambient.clone(),
            mask,
        })
    }

    pub fn empty(ambient: &PrimeSet) -> Self {
        Self {
            ambient: ambient.clone(),
            mask: 0,
        }
    }

    pub fn full(ambient: &PrimeSet) -> Self {
        Self {
            ambient: ambient.clone(),
            mask: (1u64 << ambient.len()) - 1,
        }
    }

    /// Every subset of the ambient set, in mask order.
    pub fn all(ambient: &PrimeSet) -> impl Iterator<Item = Self> + '_ {
        (0..1u64 << ambient.len()).map(move |mask| Self {
            ambient: ambient.clone(),
            mask,
        })
    }

    pub fn ambient(&self) -> &PrimeSet {
        &self.ambient
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn primes(&self) -> Vec<u64> {
        self.ambient
            .primes()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.mask & (1 << i) != 0)
            .map(|(_, &p)| p)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// `Q = Π_{p∈𝒬} p`.
    pub fn product(&self) -> u64 {
        self.primes().iter().product()
    }

    /// `𝒬` as a [`PrimeSet`], or `None` when empty.
    pub fn prime_set(&self) -> Option<PrimeSet> {
        if self.is_empty() {
            None
        } else {
            Some(PrimeSet::new(self.primes()).expect("subset of a valid set"))
        }
    }
}

/// `μ_𝒬(F) = Π_{p∈𝒬} μ_p(F_p)`.
pub fn moebius_tuple(f: &[FFPoly], q: &SubsetSelector) -> Result<i8> {
    per_prime(f, q)?.into_iter().try_fold(1i8, |acc, fp| Ok(acc * moebius(fp)?))
}

/// `η_𝒬(F) = Π_{p∈𝒬} 1{μ_p(F_p) = 0}`.
pub fn eta_tuple(f: &[FFPoly], q: &SubsetSelector) -> Result<u8> {
    for fp in per_prime(f, q)? {
        if moebius(fp)? != 0 {
            return Ok(0);
        }
    }
    Ok(1)
}

fn per_prime<'a>(f: &'a [FFPoly], q: &SubsetSelector) -> Result<Vec<&'a FFPoly>> {
    if f.len() != q.ambient.len() {
        return Err(Error::DimensionMismatch(format!(
            "tuple has {} entries for {} primes",
            f.len(),
            q.ambient.len()
        )));
    }
    let mut out = Vec::new();
    for (i, (fp, &p)) in f.iter().zip(q.ambient.primes()).enumerate() {
        if fp.field().p() != p {
            return Err(Error::FieldMismatch(fp.field().p(), p));
        }
        if q.mask & (1 << i) != 0 {
            out.push(fp);
        }
    }
    Ok(out)
}

fn check_cap(base: u64, n: usize, cap: u64) -> Result<()> {
    let size = (base as u128).checked_pow(n as u32);
    match size {
        Some(s) if s <= cap as u128 => Ok(()),
        _ => Err(Error::EnumerationCap {
            size: size.unwrap_or(u128::MAX),
            cap,
        }),
    }
}

/// `μ_p` over `M_{p,n}` by monic index.
pub fn moebius_table(field: PrimeField, n: usize) -> Result<Vec<i8>> {
    check_cap(field.p(), n, DEFAULT_ENUMERATION_CAP)?;
    let count = field.p().pow(n as u32);
    MonicIter::range(field, n, 0, count).map(|f| moebius(&f)).collect()
}

/// Walks `M_{𝒬,n}` and reports the CRT digits mod `Q` together with the
/// monic index of each component.
fn for_each_tuple(qs: &PrimeSet, n: usize, mut visit: impl FnMut(&[u64], &[usize])) -> Result<()> {
    let q = qs.modulus()?;
    check_cap(q, n, DEFAULT_ENUMERATION_CAP)?;
    let primes = qs.primes();
    let mut digits = vec![0u64; n];
    let mut idx = vec![0usize; primes.len()];
    let total = q.pow(n as u32);
    for _ in 0..total {
        for (slot, &p) in idx.iter_mut().zip(primes) {
            *slot = digits
                .iter()
                .rev()
                .fold(0usize, |acc, &d| acc * p as usize + (d % p) as usize);
        }
        visit(&digits, &idx);
        for d in digits.iter_mut() {
            *d += 1;
            if *d < q {
                break;
            }
            *d = 0;
        }
    }
    Ok(())
}

/// Integer rows over a common denominator per slot.
struct IntRows {
    rows: Vec<Vec<BigInt>>,
    denom: BigInt,
}

impl IntRows {
    fn new(m: &ProductMeasure) -> Self {
        let mut denom = BigInt::one();
        let rows = m
            .rows()
            .iter()
            .map(|row| {
                let d = row
                    .iter()
                    .fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
                denom *= &d;
                row.iter().map(|x| x.numer() * (&d / x.denom())).collect()
            })
            .collect();
        Self { rows, denom }
    }

    fn mass(&self, digits: &[u64]) -> BigInt {
        let mut acc = BigInt::one();
        for (row, &d) in self.rows.iter().zip(digits) {
            let v = &row[d as usize];
            if v.is_zero() {
                return BigInt::zero();
            }
            acc *= v;
        }
        acc
    }
}

fn projected(m: &ProductMeasure, q: &SubsetSelector) -> Result<Option<ProductMeasure>> {
    if q.ambient() != m.primes() {
        return Err(Error::NotSubset);
    }
    match q.prime_set() {
        None => Ok(None),
        Some(qs) => Ok(Some(m.project(&qs)?)),
    }
}

fn moebius_tables(qs: &PrimeSet, n: usize) -> Result<Vec<Vec<i8>>> {
    qs.fields().into_iter().map(|f| moebius_table(f, n)).collect()
}

/// `E_𝒫(μ_𝒬)` by enumerating `M_{𝒬,n}` under the projected measure.
pub fn expected_moebius_direct(m: &ProductMeasure, q: &SubsetSelector) -> Result<BigRational> {
    let Some(pm) = projected(m, q)? else {
        return Ok(BigRational::one());
    };
    let n = m.degree();
    let tables = moebius_tables(pm.primes(), n)?;
    let rows = IntRows::new(&pm);
    let mut acc = BigInt::zero();
    for_each_tuple(pm.primes(), n, |digits, idx| {
        let s: i8 = tables.iter().zip(idx).map(|(t, &i)| t[i]).product();
        if s != 0 {
            let w = rows.mass(digits);
            if s > 0 {
                acc += w;
            } else {
                acc -= w;
            }
        }
    })?;
    Ok(BigRational::new(acc, rows.denom))
}

/// Floating point version of [`expected_moebius_direct`].
pub fn expected_moebius_direct_f64(m: &ProductMeasure, q: &SubsetSelector) -> Result<f64> {
    let Some(pm) = projected(m, q)? else {
        return Ok(1.0);
    };
    let n = m.degree();
    let tables = moebius_tables(pm.primes(), n)?;
    let mut acc = 0.0;
    for_each_tuple(pm.primes(), n, |digits, idx| {
        let s: i8 = tables.iter().zip(idx).map(|(t, &i)| t[i]).product();
        if s != 0 {
            acc += s as f64 * pm.mass_of_digits_f64(digits);
        }
    })?;
    Ok(acc)
}

/// `E_𝒫(η_𝒬)` by enumeration.
pub fn expected_eta_direct(m: &ProductMeasure, q: &SubsetSelector) -> Result<BigRational> {
    let Some(pm) = projected(m, q)? else {
        return Ok(BigRational::one());
    };
    let n = m.degree();
    let tables = moebius_tables(pm.primes(), n)?;
    let rows = IntRows::new(&pm);
    let mut acc = BigInt::zero();
    for_each_tuple(pm.primes(), n, |digits, idx| {
        if tables.iter().zip(idx).all(|(t, &i)| t[i] == 0) {
            acc += rows.mass(digits);
        }
    })?;
    Ok(BigRational::new(acc, rows.denom))
}

/// Möbius spectra `μ̂_p(T^{-n}G)` for a fixed degree, keyed by `p`.
#[derive(Debug, Clone, Default)]
pub struct MoebiusSpectra {
    n: usize,
    spectra: BTreeMap<u64, Spectrum>,
}

impl MoebiusSpectra {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            spectra: BTreeMap::new(),
        }
    }

    /// Computes the spectra for every prime in `primes`.
    pub fn compute(primes: &[u64], n: usize) -> Result<Self> {
        let mut out = Self::new(n);
        for &p in primes {
            out.ensure(p)?;
        }
        Ok(out)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Adds a precomputed spectrum (for instance one read from a cache).
    pub fn insert(&mut self, p: u64, spectrum: Spectrum) -> Result<()> {
        let g = spectrum.grid();
        if g.degree() != self.n || g.primes().primes() != [p] {
            return Err(Error::DimensionMismatch(format!(
                "spectrum does not live on M_{{{p},{}}}",
                self.n
            )));
        }
        self.spectra.insert(p, spectrum);
        Ok(())
    }

    pub fn ensure(&mut self, p: u64) -> Result<&Spectrum> {
        if !self.spectra.contains_key(&p) {
            let s = fourier::moebius_spectrum(PrimeField::new(p)?, self.n)?;
            self.spectra.insert(p, s);
        }
        Ok(&self.spectra[&p])
    }

    pub fn get(&self, p: u64) -> Option<&Spectrum> {
        self.spectra.get(&p)
    }

    fn require(&self, p: u64) -> Result<&Spectrum> {
        self.get(p)
            .ok_or_else(|| Error::Domain(format!("no Möbius spectrum for p = {p}, n = {}", self.n)))
    }
}

/// Residues mod `P` of the frequencies supported on `𝒬`: `embed[t]` is the
/// residue congruent to `t` mod each `p ∈ 𝒬` and to `0` off `𝒬`.
fn embedding(m: &ProductMeasure, qs: &PrimeSet) -> Result<Vec<u64>> {
    let q = qs.modulus()?;
    (0..q)
        .map(|t| {
            let residues: Vec<u64> = m
                .primes()
                .primes()
                .iter()
                .map(|&p| if qs.index_of(p).is_some() { t % p } else { 0 })
                .collect();
            m.primes().crt_join(&residues)
        })
        .collect()
}

/// `λ̂_k` restricted to the frequencies supported on `𝒬`.
fn restricted_slot_tables(m: &ProductMeasure, qs: &PrimeSet) -> Result<Vec<Vec<Complex64>>> {
    let embed = embedding(m, qs)?;
    Ok((0..m.degree())
        .map(|k| embed.iter().map(|&c| m.slot_transform(k, c)).collect())
        .collect())
}

/// `E_𝒫(μ_𝒬) = Q^{-n} Σ_{G : G_p = T^n, p∉𝒬} ℙ̂_𝒫(T^{-n}G) Π_{p∈𝒬} μ̂_p(-T^{-n}G_p)`.
pub fn expected_moebius_fourier(
    m: &ProductMeasure,
    q: &SubsetSelector,
    spectra: &MoebiusSpectra,
) -> Result<f64> {
    if q.ambient() != m.primes() {
        return Err(Error::NotSubset);
    }
    let Some(qs) = q.prime_set() else {
        return Ok(1.0);
    };
    let n = m.degree();
    if spectra.degree() != n {
        return Err(Error::DimensionMismatch("spectra degree differs from measure".into()));
    }
    let specs = qs
        .primes()
        .iter()
        .map(|&p| spectra.require(p))
        .collect::<Result<Vec<_>>>()?;
    let slots = restricted_slot_tables(m, &qs)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_tuple(&qs, n, |digits, idx| {
        let p_hat = (0..n).fold(Complex64::new(1.0, 0.0), |z, j| z * slots[j][digits[n - 1 - j] as usize]);
        let mu_hat = specs.iter().zip(idx).fold(Complex64::new(1.0, 0.0), |z, (s, &i)| {
            z * s.at(s.grid().neg_index(i))
        });
        acc += p_hat * mu_hat;
    })?;
    let scale = math::powf(qs.modulus()? as f64, -(n as f64));
    Ok(acc.re * scale)
}

/// Enumerates the CRT digit vectors of `(D_k² E_k)_k` as the cofactors
/// `E_k` range over `M_{p_k, n-2 deg D_k}`.
fn square_multiple_mass(pm: &ProductMeasure, rows: &IntRows, divisors: &[&FFPoly]) -> Result<BigInt> {
    let n = pm.degree();
    let primes = pm.primes();
    let mut multiples: Vec<Vec<Vec<u64>>> = Vec::with_capacity(divisors.len());
    let mut size = 1u128;
    for d in divisors {
        let field = d.field();
        let deg = d.degree().ok_or(Error::ZeroPolynomial)?;
        if !d.is_monic() {
            return Err(Error::NotMonic);
        }
        if 2 * deg > n {
            return Err(Error::Domain(format!("2·deg D = {} exceeds n = {n}", 2 * deg)));
        }
        let cof = n - 2 * deg;
        size = size.saturating_mul((field.p() as u128).saturating_pow(cof as u32));
        if size > DEFAULT_ENUMERATION_CAP as u128 {
            return Err(Error::EnumerationCap {
                size,
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
        let d2 = d.mul(d)?;
        let count = field.p().pow(cof as u32);
        let list = MonicIter::range(field, cof, 0, count)
            .map(|e| d2.mul(&e).map(|f| (0..n).map(|k| f.coeff(k)).collect()))
            .collect::<Result<Vec<Vec<u64>>>>()?;
        multiples.push(list);
    }
    let mut pick = vec![0usize; divisors.len()];
    let mut acc = BigInt::zero();
    let mut residues = vec![0u64; divisors.len()];
    let mut digits = vec![0u64; n];
    loop {
        for (k, dk) in digits.iter_mut().enumerate() {
            for (r, (list, &i)) in residues.iter_mut().zip(multiples.iter().zip(&pick)) {
                *r = list[i][k];
            }
            *dk = primes.crt_join(&residues)?;
        }
        acc += rows.mass(&digits);
        let mut carry = true;
        for (i, list) in pick.iter_mut().zip(&multiples) {
            *i += 1;
            if *i < list.len() {
                carry = false;
                break;
            }
            *i = 0;
        }
        if carry {
            break;
        }
    }
    Ok(acc)
}

/// Sorts divisors by prime and projects the measure onto those primes.
fn divisor_setup<'a>(m: &ProductMeasure, divisors: &'a [FFPoly]) -> Result<(ProductMeasure, Vec<&'a FFPoly>)> {
    let mut ds: Vec<&FFPoly> = divisors.iter().collect();
    ds.sort_by_key(|d| d.field().p());
    let primes: Vec<u64> = ds.iter().map(|d| d.field().p()).collect();
    let set = PrimeSet::new(primes)?;
    Ok((m.project(&set)?, ds))
}

/// `ℙ(D_1² | f_{p_1}, …, D_r² | f_{p_r})`, one divisor per distinct prime.
pub fn prob_joint_square_divisors(m: &ProductMeasure, divisors: &[FFPoly]) -> Result<BigRational> {
    if divisors.is_empty() {
        return Ok(BigRational::one());
    }
    let (pm, ds) = divisor_setup(m, divisors)?;
    let rows = IntRows::new(&pm);
    Ok(BigRational::new(square_multiple_mass(&pm, &rows, &ds)?, rows.denom))
}

/// `(-1)^r Σ_{i_k ∈ [1, ⌊n/2⌋]} Σ_{D_k ∈ M_{p_k,i_k}} Π μ(D_k)·ℙ(D_k² | f_{p_k} ∀k)`.
///
/// For `n < 2` the index range is empty and the sum is `0` (or `1` when
/// `𝒬 = ∅`).
pub fn expected_eta_divisorsum(m: &ProductMeasure, q: &SubsetSelector) -> Result<BigRational> {
    if q.ambient() != m.primes() {
        return Err(Error::NotSubset);
    }
    let Some(qs) = q.prime_set() else {
        return Ok(BigRational::one());
    };
    let n = m.degree();
    let half = n / 2;
    if half == 0 {
        return Ok(BigRational::zero());
    }
    let pm = m.project(&qs)?;
    let rows = IntRows::new(&pm);
    let fields = qs.fields();
    // Every monic D of degree 1..=⌊n/2⌋ with μ(D) ≠ 0, per prime.
    let mut candidates: Vec<Vec<(FFPoly, i8)>> = Vec::new();
    for &field in &fields {
        let mut list = Vec::new();
        for i in 1..=half {
            check_cap(field.p(), i, DEFAULT_ENUMERATION_CAP)?;
            for d in MonicIter::range(field, i, 0, field.p().pow(i as u32)) {
                let mu = moebius(&d)?;
                if mu != 0 {
                    list.push((d, mu));
                }
            }
        }
        candidates.push(list);
    }
    let mut pick = vec![0usize; fields.len()];
    let mut acc = BigInt::zero();
    loop {
        let ds: Vec<&FFPoly> = candidates.iter().zip(&pick).map(|(c, &i)| &c[i].0).collect();
        let sign: i8 = candidates.iter().zip(&pick).map(|(c, &i)| c[i].1).product();
        let mass = square_multiple_mass(&pm, &rows, &ds)?;
        if sign > 0 {
            acc += mass;
        } else {
            acc -= mass;
        }
        let mut carry = true;
        for (i, c) in pick.iter_mut().zip(&candidates) {
            *i += 1;
            if *i < c.len() {
                carry = false;
                break;
            }
            *i = 0;
        }
        if carry {
            break;
        }
    }
    if qs.len() % 2 == 1 {
        acc = -acc;
    }
    Ok(BigRational::new(acc, rows.denom))
}

/// Checks `μ²(F) = Σ_{D² | F} μ(D)`.
pub fn mu_squared_identity_check(f: &FFPoly) -> Result<bool> {
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    let n = f.degree().ok_or(Error::ZeroPolynomial)?;
    let field = f.field();
    let lhs = moebius(f)?.pow(2) as i64;
    let mut rhs = 0i64;
    for i in 0..=n / 2 {
        check_cap(field.p(), i, DEFAULT_ENUMERATION_CAP)?;
        for d in MonicIter::range(field, i, 0, field.p().pow(i as u32)) {
            if d.mul(&d)?.divides(f)? {
                rhs += moebius(&d)? as i64;
            }
        }
    }
    Ok(lhs == rhs)
}

/// Both sides of `ℙ(E ∩ {μ(F)=0}) = -Σ_{i=1}^{⌊n/2⌋} Σ_{D∈M_{p,i}} μ(D)·ℙ(E, D²|F)`
/// for a single-prime measure.
pub fn lemma31_check(
    m: &ProductMeasure,
    event: impl Fn(&FFPoly) -> bool,
) -> Result<(BigRational, BigRational)> {
    let [p] = m.primes().primes() else {
        return Err(Error::DimensionMismatch("measure must live on a single prime".into()));
    };
    let field = PrimeField::new(*p)?;
    let n = m.degree();
    check_cap(*p, n, DEFAULT_ENUMERATION_CAP)?;
    let rows = IntRows::new(m);
    let digits_of = |f: &FFPoly| -> Vec<u64> { (0..n).map(|k| f.coeff(k)).collect() };

    let mut lhs = BigInt::zero();
    for f in MonicIter::range(field, n, 0, p.pow(n as u32)) {
        if event(&f) && moebius(&f)? == 0 {
            lhs += rows.mass(&digits_of(&f));
        }
    }

    let mut rhs = BigInt::zero();
    for i in 1..=n / 2 {
        for d in MonicIter::range(field, i, 0, p.pow(i as u32)) {
            let mu = moebius(&d)?;
            if mu == 0 {
                continue;
            }
            let d2 = d.mul(&d)?;
            let cof = n - 2 * i;
            let mut part = BigInt::zero();
            for e in MonicIter::range(field, cof, 0, p.pow(cof as u32)) {
                let f = d2.mul(&e)?;
                if event(&f) {
                    part += rows.mass(&digits_of(&f));
                }
            }
            if mu > 0 {
                rhs -= part;
            } else {
                rhs += part;
            }
        }
    }
    Ok((
        BigRational::new(lhs, rows.denom.clone()),
        BigRational::new(rhs, rows.denom),
    ))
}

/// Hölder bound on `|E_𝒫(μ_𝒬)|` with exponents `γ` and `δ = γ/(γ-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub gamma: f64,
    /// `γ/(γ-1)`, infinite when `γ = 1`.
    pub delta_conjugate: f64,
    pub eps0: f64,
    pub alpha: f64,
    /// `Q = Π_{p∈𝒬} p`.
    pub q_product: u64,
    pub n: usize,
    /// `1/4 - 1/δ - ε₀ - log α / log Q`.
    pub u: f64,
    /// `Q^{-un}`.
    pub simplified_bound: f64,
    /// `Q^{-n} (Σ|ℙ̂|^γ)^{1/γ} (Σ Π|μ̂_p|^δ)^{1/δ}` over the restricted frequencies.
    pub raw_bound: f64,
    /// `Σ|ℙ̂_𝒫(T^{-n}G)|^γ` over `G` with `G_p = T^n` off `𝒬`.
    pub restricted_norm: f64,
    /// `E_𝒫(μ_𝒬)` by direct enumeration.
    pub expectation: f64,
    /// `|E| ≤ raw_bound`; Hölder's inequality makes this unconditional.
    pub raw_holds: bool,
    /// `restricted_norm ≤ α^{γn}`.
    pub norm_condition_holds: bool,
    /// `‖μ̂_p‖_∞ ≤ p^{(3/4+ε₀)n}` for every `p ∈ 𝒬`.
    pub spectral_bound_holds: bool,
    /// Both conditions above hold, so `|E| ≤ Q^{-un}` follows.
    pub simplified_applies: bool,
    pub simplified_holds: bool,
}

pub fn holder_bound(
    m: &ProductMeasure,
    q: &SubsetSelector,
    spectra: &MoebiusSpectra,
    gamma: f64,
    eps0: f64,
    alpha: f64,
) -> Result<HolderReport> {
    if !(1.0..4.0 / 3.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma must lie in [1, 4/3), got {gamma}")));
    }
    let delta_conjugate = if gamma == 1.0 {
        f64::INFINITY
    } else {
        gamma / (gamma - 1.0)
    };
    let inv_delta = 1.0 - 1.0 / gamma;
    if !(eps0 > 0.0) || !(0.25 - inv_delta - eps0 > 0.0) {
        return Err(Error::Domain(format!(
            "need eps0 > 0 and 1/4 - 1/delta - eps0 > 0 (eps0 = {eps0}, 1/delta = {inv_delta})"
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if q.ambient() != m.primes() {
        return Err(Error::NotSubset);
    }
    let qs = q
        .prime_set()
        .ok_or_else(|| Error::Domain("the Hölder bound needs a nonempty subset".into()))?;
    let n = m.degree();
    let q_product = qs.modulus()?;
    let qf = q_product as f64;

    let slots = restricted_slot_tables(m, &qs)?;
    let restricted_norm: f64 = slots
        .iter()
        .map(|row| row.iter().map(|&z| math::powf(math::abs(z), gamma)).sum::<f64>())
        .product();

    let mut mu_factor = 1.0;
    let mut spectral_bound_holds = true;
    for &p in qs.primes() {
        let s = spectra.require(p)?;
        let max = s.max_abs();
        spectral_bound_holds &= max <= math::powf(p as f64, (0.75 + eps0) * n as f64) * (1.0 + 1e-12);
        mu_factor *= if delta_conjugate.is_infinite() {
            max
        } else {
            s.values()
                .iter()
                .map(|&z| math::powf(math::abs(z), delta_conjugate))
                .sum::<f64>()
        };
    }
    if !delta_conjugate.is_infinite() {
        mu_factor = math::powf(mu_factor, inv_delta);
    }
    let raw_bound = math::powf(qf, -(n as f64)) * math::powf(restricted_norm, 1.0 / gamma) * mu_factor;

    let u = 0.25 - inv_delta - eps0 - math::ln(alpha) / math::ln(qf);
    let simplified_bound = math::powf(qf, -u * n as f64);
    let expectation = expected_moebius_direct(m, q)?.to_f64().unwrap_or(f64::NAN);
    let norm_condition_holds = restricted_norm <= math::powf(alpha, gamma * n as f64) * (1.0 + 1e-12);
    let tol = 1e-9 * raw_bound.max(1e-300);
    Ok(HolderReport {
        gamma,
        delta_conjugate,
        eps0,
        alpha,
        q_product,
        n,
        u,
        simplified_bound,
        raw_bound,
        restricted_norm,
        expectation,
        raw_holds: expectation.abs() <= raw_bound + tol,
        norm_condition_holds,
        spectral_bound_holds,
        simplified_applies: norm_condition_holds && spectral_bound_holds,
        simplified_holds: expectation.abs() <= simplified_bound * (1.0 + 1e-12),
    })
}

/// Absolute difference between two exact values as `f64`.
pub fn rational_gap(a: &BigRational, b: &BigRational) -> f64 {
    (a - b).abs().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{CoeffLaw, PolyLaw};

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn ps(v: &[u64]) -> PrimeSet {
        PrimeSet::new(v.to_vec()).unwrap()
    }

    fn boxed(primes: &[u64], n: usize, a: i64, len: u64) -> ProductMeasure {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(a, len).unwrap(), n);
        ProductMeasure::pushforward(&law, &ps(primes)).unwrap()
    }

    #[test]
    fn tuple_values() {
        let amb = ps(&[2, 3]);
        let f = vec![
            FFPoly::from_i64(PrimeField::new(2).unwrap(), &[0, 0, 1]),
            FFPoly::from_i64(PrimeField::new(3).unwrap(), &[0, 1, 1]),
        ];
        let s = |v: &[u64]| SubsetSelector::new(&amb, v).unwrap();
        assert_eq!(moebius_tuple(&f, &s(&[])).unwrap(), 1);
        assert_eq!(moebius_tuple(&f, &s(&[2])).unwrap(), 0);
        assert_eq!(moebius_tuple(&f, &s(&[3])).unwrap(), 1);
        assert_eq!(moebius_tuple(&f, &s(&[2, 3])).unwrap(), 0);
        assert_eq!(eta_tuple(&f, &s(&[2, 3])).unwrap(), 0);
        assert_eq!(eta_tuple(&f, &s(&[2])).unwrap(), 1);
        assert_eq!(SubsetSelector::new(&amb, &[5]), Err(Error::NotSubset));
    }

    #[test]
    fn direct_uniform_values() {
        for (p, n, expect) in [(3u64, 2usize, 0i64), (5, 3, 0), (3, 1, -1), (2, 1, -1)] {
            let m = boxed(&[p], n, 0, p * 2);
            let sel = SubsetSelector::full(m.primes());
            assert_eq!(expected_moebius_direct(&m, &sel).unwrap(), q(expect, 1), "p={p} n={n}");
        }
    }

    #[test]
    fn fourier_matches_direct() {
        for (primes, qsub, n, a, len) in [
            (vec![3u64], vec![3u64], 2usize, 0i64, 7u64),
            (vec![2, 3], vec![3], 2, -3, 7),
            (vec![2, 3], vec![2, 3], 2, 1, 11),
            (vec![2, 5], vec![2], 3, 0, 9),
            (vec![3], vec![3], 3, -2, 4),
        ] {
            let m = boxed(&primes, n, a, len);
            let sel = SubsetSelector::new(m.primes(), &qsub).unwrap();
            let spectra = MoebiusSpectra::compute(&qsub, n).unwrap();
            let direct = expected_moebius_direct(&m, &sel).unwrap().to_f64().unwrap();
            let direct_f = expected_moebius_direct_f64(&m, &sel).unwrap();
            let four = expected_moebius_fourier(&m, &sel, &spectra).unwrap();
            assert!((direct - four).abs() < 1e-9, "{primes:?} {qsub:?}: {direct} vs {four}");
            assert!((direct - direct_f).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_empty_subset_and_uniform() {
        let m = boxed(&[2, 3], 2, 0, 6);
        let spectra = MoebiusSpectra::compute(&[2, 3], 2).unwrap();
        let e = SubsetSelector::empty(m.primes());
        assert_eq!(expected_moebius_fourier(&m, &e, &spectra).unwrap(), 1.0);
        let f = SubsetSelector::full(m.primes());
        assert!(expected_moebius_fourier(&m, &f, &spectra).unwrap().abs() < 1e-12);
    }

    #[test]
    fn joint_square_divisor_values() {
        let f3 = PrimeField::new(3).unwrap();
        let f5 = PrimeField::new(5).unwrap();
        let m = boxed(&[3], 4, 0, 9);
        let d = FFPoly::from_i64(f3, &[1, 1]);
        assert_eq!(prob_joint_square_divisors(&m, core::slice::from_ref(&d)).unwrap(), q(1, 9));
        let d2 = FFPoly::from_i64(f3, &[1, 0, 1]);
        assert_eq!(prob_joint_square_divisors(&m, &[d2]).unwrap(), q(1, 81));
        assert_eq!(prob_joint_square_divisors(&m, &[FFPoly::one(f3)]).unwrap(), q(1, 1));
        assert!(prob_joint_square_divisors(&m, &[FFPoly::from_i64(f3, &[0, 0, 0, 1])]).is_err());

        let m = boxed(&[3, 5], 2, 0, 15);
        let a = FFPoly::from_i64(f3, &[2, 1]);
        let b = FFPoly::from_i64(f5, &[4, 1]);
        let joint = prob_joint_square_divisors(&m, &[b.clone(), a.clone()]).unwrap();
        let pa = prob_joint_square_divisors(&m, &[a]).unwrap();
        let pb = prob_joint_square_divisors(&m, &[b]).unwrap();
        assert_eq!(joint, pa * pb);
    }

    #[test]
    fn eta_routes_agree() {
        for (primes, qsub, n, a, len) in [
            (vec![2u64, 3], vec![2u64, 3], 2usize, 0i64, 6u64),
            (vec![3], vec![3], 3, 0, 9),
            (vec![2, 3], vec![3], 4, -1, 7),
            (vec![2, 3], vec![2, 3], 3, 2, 5),
            (vec![5], vec![5], 1, 0, 5),
        ] {
            let m = boxed(&primes, n, a, len);
            let sel = SubsetSelector::new(m.primes(), &qsub).unwrap();
            let d = expected_eta_direct(&m, &sel).unwrap();
            let s = expected_eta_divisorsum(&m, &sel).unwrap();
            assert_eq!(d, s, "{primes:?} {qsub:?} n={n}");
            assert!(!s.is_negative() && s <= BigRational::one());
        }
        let m = boxed(&[7], 3, 0, 7);
        let sel = SubsetSelector::full(m.primes());
        assert_eq!(expected_eta_divisorsum(&m, &sel).unwrap(), q(1, 7));
        let m = boxed(&[7], 1, 0, 7);
        assert_eq!(expected_eta_divisorsum(&m, &SubsetSelector::full(m.primes())).unwrap(), q(0, 1));
    }

    #[test]
    fn multiplicativity_under_period_boxes() {
        let m = boxed(&[2, 3], 2, 0, 12);
        let amb = m.primes().clone();
        let s = |v: &[u64]| SubsetSelector::new(&amb, v).unwrap();
        let e2 = expected_eta_direct(&m, &s(&[2])).unwrap();
        let e3 = expected_eta_direct(&m, &s(&[3])).unwrap();
        assert_eq!(expected_eta_direct(&m, &s(&[2, 3])).unwrap(), e2 * e3);
        let m2 = expected_moebius_direct(&m, &s(&[2])).unwrap();
        let m3 = expected_moebius_direct(&m, &s(&[3])).unwrap();
        assert_eq!(expected_moebius_direct(&m, &s(&[2, 3])).unwrap(), m2 * m3);
    }

    #[test]
    fn mu_squared_identity() {
        let f3 = PrimeField::new(3).unwrap();
        assert!(mu_squared_identity_check(&FFPoly::from_i64(f3, &[0, 0, 1])).unwrap());
        for f in MonicIter::range(f3, 4, 0, 81) {
            assert!(mu_squared_identity_check(&f).unwrap(), "{f}");
        }
    }

    #[test]
    fn lemma31_instances() {
        let m = boxed(&[3], 3, 0, 9);
        let (l, r) = lemma31_check(&m, |f| f.coeff(0) == 0).unwrap();
        assert_eq!(l, r);
        let (l, r) = lemma31_check(&m, |_| false).unwrap();
        assert!(l.is_zero() && r.is_zero());
        let m = boxed(&[5], 4, -3, 11);
        let (l, r) = lemma31_check(&m, |_| true).unwrap();
        assert_eq!(l, r);
        assert_eq!(l, expected_eta_divisorsum(&m, &SubsetSelector::full(m.primes())).unwrap());
    }

    #[test]
    fn holder_reports() {
        let m = boxed(&[3], 2, 0, 7);
        let sel = SubsetSelector::full(m.primes());
        let spectra = MoebiusSpectra::compute(&[3], 2).unwrap();
        let r = holder_bound(&m, &sel, &spectra, 1.0, 0.05, 1.5).unwrap();
        assert!(r.delta_conjugate.is_infinite());
        assert!(r.raw_holds);
        let slot_sum: f64 = r.restricted_norm;
        let max = spectra.get(3).unwrap().max_abs();
        assert!((r.raw_bound - slot_sum * max / 9.0).abs() < 1e-12);

        let r = holder_bound(&m, &sel, &spectra, 1.1, 0.05, 1.5).unwrap();
        assert!(r.raw_holds);
        assert!((1.0 / r.gamma + 1.0 / r.delta_conjugate - 1.0).abs() < 1e-15);
        assert!(holder_bound(&m, &sel, &spectra, 1.3, 0.05, 1.5).is_err());
        assert!(holder_bound(&m, &sel, &spectra, 1.4, 0.01, 1.5).is_err());

        let u = boxed(&[3], 2, 0, 9);
        let r = holder_bound(&u, &sel, &spectra, 1.0, 0.05, 1.0).unwrap();
        assert_eq!(r.expectation, 0.0);
        assert!(r.raw_holds);
    }
}
