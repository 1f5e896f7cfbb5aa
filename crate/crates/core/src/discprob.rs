//! Probability that the discriminant is a square.
//!
//! Over `F_q` everything is exact: the enumerated probability, and the
//! decomposition `1/2 + (-1)^n/2·E(μ) + 1/2·E(1_{μ=0})` assembled from
//! independently computed expectations. Over `ℤ` the probability is
//! estimated by seeded Monte Carlo with a sound multi-prime prescreen.
//!
//! Monte Carlo runs are split into fixed shards of [`SHARD_SIZE`] samples.
//! Shard `s` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `s`, so a
//! run's result depends only on `(law, samples, seed, filter)` and never on
//! how shards are scheduled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::AddAssign;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::SieveTable;
use crate::ffpoly::{self, discriminant, is_prime, FFPoly, MonicIter, PrimeField};
use crate::math;
use crate::measures::{l_gamma_norm, LawSampler, PolyLaw, ProductMeasure};
use crate::moebius_stats::{expected_eta_divisorsum, expected_moebius_direct, SubsetSelector};
use crate::torus::PrimeSet;
use crate::{Error, Result, DEFAULT_ENUMERATION_CAP};

/// `χ_p(a) ≥ 0`; zero counts as a square.
pub fn is_square_fq(a: u64, field: PrimeField) -> Result<bool> {
    Ok(field.quadratic_character(a)? >= 0)
}

fn single_prime(m: &ProductMeasure) -> Result<PrimeField> {
    match m.primes().primes() {
        [p] => {
            if *p == 2 {
                Err(Error::EvenCharacteristic)
            } else {
                PrimeField::new(*p)
            }
        }
        _ => Err(Error::DimensionMismatch("measure must live on a single prime".into())),
    }
}

/// `ℙ(disc F = □)` by enumerating `M_{p,n}`.
pub fn prob_disc_square_fq(m: &ProductMeasure) -> Result<BigRational> {
    let field = single_prime(m)?;
    let n = m.degree();
    if n == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let count = ffpoly::monic_count(field.p(), n)
        .filter(|&c| c <= DEFAULT_ENUMERATION_CAP as u128)
        .ok_or(Error::EnumerationCap {
            size: ffpoly::monic_count(field.p(), n).unwrap_or(u128::MAX),
            cap: DEFAULT_ENUMERATION_CAP,
        })? as u64;
    let mut acc = BigRational::zero();
    let mut digits = vec![0u64; n];
    for f in MonicIter::range(field, n, 0, count) {
        if is_square_fq(discriminant(&f)?, field)? {
            for (k, d) in digits.iter_mut().enumerate() {
                *d = f.coeff(k);
            }
            acc += m.mass_of_digits(&digits);
        }
    }
    Ok(acc)
}

/// Both sides of `ℙ(disc=□) = 1/2 + (-1)^n/2·E(μ) + 1/2·E(1_{μ=0})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub e_mu: BigRational,
    pub e_nonsquarefree: BigRational,
    /// `(-1)^n/2·E(μ)`, the signed Möbius average.
    pub signed_moebius_term: BigRational,
}

impl Decomposition {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn decomposition_check(m: &ProductMeasure) -> Result<Decomposition> {
    single_prime(m)?;
    let lhs = prob_disc_square_fq(m)?;
    let sel = SubsetSelector::full(m.primes());
    let e_mu = expected_moebius_direct(m, &sel)?;
    let e_nonsquarefree = expected_eta_divisorsum(m, &sel)?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let sign = if m.degree().is_multiple_of(2) { 1 } else { -1 };
    let signed_moebius_term = &half * &e_mu * BigInt::from(sign);
    let rhs = &half + &signed_moebius_term + &half * &e_nonsquarefree;
    Ok(Decomposition {
        lhs,
        rhs,
        e_mu,
        e_nonsquarefree,
        signed_moebius_term,
    })
}

/// Hypotheses and conclusion of the `F_q` deviation bound
/// `|ℙ(disc=□) - 1/2| ≤ 1/(2q^{cn}) + 1/(2ω_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FqBoundReport {
    pub q: u64,
    pub n: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub c: f64,
    pub omega_q: f64,
    pub probability: f64,
    pub deviation: f64,
    pub rhs: f64,
    /// `Σ_G |ℙ̂(T^{-n}G)|^γ`.
    pub fourier_norm: f64,
    pub norm_condition: bool,
    /// `Σ_{i≤⌊n/2⌋} Σ_D μ(D) ℙ(D²|F)`, which equals `-E(1_{μ=0})`.
    pub divisor_sum: f64,
    /// `|divisor_sum| ≤ ω_q^{-1}`.
    pub divisor_condition: bool,
    pub applicable: bool,
    pub conclusion_holds: bool,
    /// `|E(μ)|` and the intermediate target `q^{-cn}`.
    pub mu_term: f64,
    pub mu_term_target: f64,
}

pub fn prop33_check(m: &ProductMeasure, gamma: f64, alpha: f64, c: f64, omega_q: f64) -> Result<FqBoundReport> {
    let field = single_prime(m)?;
    if !(1.0..4.0 / 3.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma must lie in [1, 4/3), got {gamma}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let c_max = (4.0 - 3.0 * gamma) / (4.0 * gamma);
    if !(c > 0.0 && c < c_max) {
        return Err(Error::Domain(format!("c must lie in (0, {c_max}), got {c}")));
    }
    if !(omega_q >= 0.0) {
        return Err(Error::Domain(format!("omega_q must be nonnegative, got {omega_q}")));
    }
    let q = field.p();
    let n = m.degree();
    let decomposition = decomposition_check(m)?;
    let probability = decomposition.lhs.to_f64().unwrap_or(f64::NAN);
    let deviation = (probability - 0.5).abs();
    let qn = math::powf(q as f64, c * n as f64);
    let rhs = 0.5 / qn + 0.5 / omega_q;
    let fourier_norm = l_gamma_norm(m, gamma)?;
    let norm_condition = fourier_norm <= math::powf(alpha, gamma * n as f64) * (1.0 + 1e-12);
    let divisor_sum = -decomposition.e_nonsquarefree.to_f64().unwrap_or(f64::NAN);
    let divisor_condition = divisor_sum.abs() * omega_q <= 1.0 + 1e-12;
    let mu_term = decomposition.e_mu.abs().to_f64().unwrap_or(f64::NAN);
    Ok(FqBoundReport {
        q,
        n,
        gamma,
        alpha,
        c,
        omega_q,
        probability,
        deviation,
        rhs,
        fourier_norm,
        norm_condition,
        divisor_sum,
        divisor_condition,
        applicable: norm_condition && divisor_condition,
        conclusion_holds: deviation <= rhs * (1.0 + 1e-12),
        mu_term,
        mu_term_target: 1.0 / qn,
    })
}

/// Monic integer polynomial `X^n + Σ_{k<n} a_k X^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    /// Little-endian, last entry is `1`.
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        match coeffs.last() {
            Some(c) if c.is_one() && coeffs.len() >= 2 => Ok(Self { coeffs }),
            Some(c) if c.is_one() => Err(Error::ConstantPolynomial),
            _ => Err(Error::NotMonic),
        }
    }

    /// `X^n + Σ lower[k] X^k` with `n = lower.len()`.
    pub fn from_lower(lower: &[i64]) -> Result<Self> {
        let mut coeffs: Vec<BigInt> = lower.iter().map(|&v| BigInt::from(v)).collect();
        coeffs.push(BigInt::one());
        Self::new(coeffs)
    }

    pub fn from_lower_big(mut lower: Vec<BigInt>) -> Result<Self> {
        lower.push(BigInt::one());
        Self::new(lower)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn constant_term(&self) -> &BigInt {
        &self.coeffs[0]
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Vec<BigInt> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigInt::from(k))
            .collect()
    }

    /// Reduction mod `p`; still monic of degree `n`.
    pub fn reduce(&self, field: PrimeField) -> FFPoly {
        FFPoly::new(field, self.coeffs.iter().map(|c| field.from_bigint(c)).collect())
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(BigInt, usize)> = self.coeffs.iter().cloned().zip(0..).collect();
        ffpoly::write_terms(f, &terms, 'X')
    }
}

impl FromStr for IntPoly {
    type Err = Error;

    /// Parses text such as `X^3-3*X-1`.
    fn from_str(s: &str) -> Result<Self> {
        let terms = ffpoly::parse_terms(s, 'X')?;
        let n = terms.iter().map(|(_, e)| *e).max().unwrap_or(0);
        let mut coeffs = vec![BigInt::zero(); n + 1];
        for (c, e) in terms {
            coeffs[e] += c;
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self::new(coeffs)
    }
}

/// Determinant of an integer matrix by fraction-free Gaussian elimination.
fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Sylvester matrix of `f` (degree `m`) and `g` (degree `k`), both given
/// little-endian with nonzero leading coefficients.
fn sylvester(f: &[BigInt], g: &[BigInt]) -> Vec<Vec<BigInt>> {
    let m = f.len() - 1;
    let k = g.len() - 1;
    let size = m + k;
    let mut rows = Vec::with_capacity(size);
    for shift in 0..k {
        let mut row = vec![BigInt::zero(); size];
        for (j, c) in f.iter().rev().enumerate() {
            row[shift + j] = c.clone();
        }
        rows.push(row);
    }
    for shift in 0..m {
        let mut row = vec![BigInt::zero(); size];
        for (j, c) in g.iter().rev().enumerate() {
            row[shift + j] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// `disc f = (-1)^{n(n-1)/2} Res(f, f')`.
pub fn disc_int(f: &IntPoly) -> BigInt {
    let n = f.degree();
    let res = bareiss_det(sylvester(f.coeffs(), &f.derivative()));
    if (n * (n - 1) / 2) % 2 == 1 {
        -res
    } else {
        res
    }
}

/// `N ≥ 0` and `⌊√N⌋² = N`.
pub fn is_perfect_square_int(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

/// Wilson score interval at critical value `z`.
pub fn wilson_interval(hits: u64, samples: u64, z: f64) -> (f64, f64) {
    if samples == 0 {
        return (0.0, 1.0);
    }
    let n = samples as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * math::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

pub const WILSON_Z95: f64 = 1.96;

/// Samples per Monte Carlo shard.
pub const SHARD_SIZE: u64 = 4096;

/// The 25 primes following `max(n, 20)`.
pub fn default_filter_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(25);
    let mut p = (n as u64).max(20) + 1;
    while out.len() < 25 {
        if is_prime(p) {
            out.push(p);
        }
        p += 1;
    }
    out
}

/// Counts from a batch of Monte Carlo samples. Merging is addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiscTally {
    pub samples: u64,
    /// Samples with `disc f` a square (zero included).
    pub hits: u64,
    pub zero_disc: u64,
    /// Samples that reached the exact big-integer check.
    pub exact_checks: u64,
    /// Rejected samples whose exact discriminant was nevertheless a square
    /// (only counted when rejections are verified; must stay zero).
    pub unsound_rejections: u64,
}

impl AddAssign for DiscTally {
    fn add_assign(&mut self, o: Self) {
        self.samples += o.samples;
        self.hits += o.hits;
        self.zero_disc += o.zero_disc;
        self.exact_checks += o.exact_checks;
        self.unsound_rejections += o.unsound_rejections;
    }
}

/// Monte Carlo configuration for `ℙ(disc f = □)`.
#[derive(Debug, Clone)]
pub struct DiscMc {
    law: PolyLaw,
    samplers: Vec<LawSampler>,
    fields: Vec<PrimeField>,
    verify_rejections: bool,
}

impl DiscMc {
    pub fn new(law: &PolyLaw, filter_primes: &[u64]) -> Result<Self> {
        if law.degree() == 0 {
            return Err(Error::ConstantPolynomial);
        }
        let fields = filter_primes
            .iter()
            .map(|&p| {
                if p == 2 {
                    Err(Error::EvenCharacteristic)
                } else {
                    PrimeField::new(p)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            law: law.clone(),
            samplers: law.laws().iter().map(|l| l.sampler()).collect(),
            fields,
            verify_rejections: false,
        })
    }

    /// Also run the exact check on prescreen rejections and count any that
    /// turn out to be squares.
    pub fn verify_rejections(mut self, on: bool) -> Self {
        self.verify_rejections = on;
        self
    }

    pub fn law(&self) -> &PolyLaw {
        &self.law
    }

    pub fn filter_primes(&self) -> Vec<u64> {
        self.fields.iter().map(|f| f.p()).collect()
    }

    pub fn shard_count(samples: u64) -> u64 {
        samples.div_ceil(SHARD_SIZE)
    }

    pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }

    /// Draws one polynomial from the law.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> IntPoly {
        let lower: Vec<i64> = self.samplers.iter().map(|s| s.sample(rng)).collect();
        IntPoly::from_lower(&lower).expect("degree ≥ 1")
    }

    /// Whether some filter prime certifies that `disc f` is not a square.
    pub fn prescreen_rejects(&self, f: &IntPoly) -> bool {
        self.fields.iter().any(|&field| {
            let d = discriminant(&f.reduce(field)).expect("monic of degree ≥ 1");
            field.quadratic_character(d).expect("odd prime") < 0
        })
    }

    /// Runs shard `shard` of a `samples`-sample run.
    pub fn run_shard(&self, seed: u64, samples: u64, shard: u64) -> DiscTally {
        let start = shard * SHARD_SIZE;
        let count = samples.saturating_sub(start).min(SHARD_SIZE);
        let mut rng = Self::rng(seed, shard);
        let mut t = DiscTally::default();
        for _ in 0..count {
            let f = self.draw(&mut rng);
            t.samples += 1;
            if self.prescreen_rejects(&f) {
                if self.verify_rejections && is_perfect_square_int(&disc_int(&f)) {
                    t.unsound_rejections += 1;
                }
                continue;
            }
            t.exact_checks += 1;
            let d = disc_int(&f);
            if is_perfect_square_int(&d) {
                t.hits += 1;
                if d.is_zero() {
                    t.zero_disc += 1;
                }
            }
        }
        t
    }

    /// Runs every shard in order on the current thread.
    pub fn run(&self, seed: u64, samples: u64) -> Result<DiscSquareEstimate> {
        if samples == 0 {
            return Err(Error::Domain("samples must be at least 1".into()));
        }
        let mut t = DiscTally::default();
        for s in 0..Self::shard_count(samples) {
            t += self.run_shard(seed, samples, s);
        }
        Ok(self.estimate(seed, t))
    }

    pub fn estimate(&self, seed: u64, tally: DiscTally) -> DiscSquareEstimate {
        DiscSquareEstimate::from_tally(seed, self.filter_primes(), tally)
    }
}

/// Result of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscSquareEstimate {
    pub seed: u64,
    pub filter_primes: Vec<u64>,
    pub tally: DiscTally,
    pub estimate: f64,
    pub wilson95: (f64, f64),
    pub zero_disc_rate: f64,
}

impl DiscSquareEstimate {
    pub fn from_tally(seed: u64, filter_primes: Vec<u64>, tally: DiscTally) -> Self {
        let n = tally.samples.max(1) as f64;
        Self {
            seed,
            filter_primes,
            tally,
            estimate: tally.hits as f64 / n,
            wilson95: wilson_interval(tally.hits, tally.samples, WILSON_Z95),
            zero_disc_rate: tally.zero_disc as f64 / n,
        }
    }

    pub fn wilson_radius(&self) -> f64 {
        (self.wilson95.1 - self.wilson95.0) / 2.0
    }
}

/// Sequential Monte Carlo estimate of `ℙ(disc f = □)`.
pub fn mc_disc_square(law: &PolyLaw, samples: u64, seed: u64, filter_primes: &[u64]) -> Result<DiscSquareEstimate> {
    DiscMc::new(law, filter_primes)?.run(seed, samples)
}

/// Parameters shared by the bound evaluators, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub delta_window: f64,
    pub eps: f64,
    pub c: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub n: usize,
    pub len: f64,
}

impl BoundParams {
    pub fn new(delta_window: f64, eps: f64, c: f64, gamma: f64, alpha: f64, n: usize, len: f64) -> Result<Self> {
        check_theorem2_domain(len, n, delta_window, eps)?;
        if !(1.0..4.0 / 3.0).contains(&gamma) {
            return Err(Error::Domain(format!("gamma must lie in [1, 4/3), got {gamma}")));
        }
        let c_max = (4.0 - 3.0 * gamma) / (4.0 * gamma);
        if !(c > 0.0 && c < c_max) {
            return Err(Error::Domain(format!("c must lie in (0, {c_max}), got {c}")));
        }
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self {
            delta_window,
            eps,
            c,
            gamma,
            alpha,
            n,
            len,
        })
    }

    /// The parameters used for uniform boxes: `γ = 1`, `α = 2`, `c = 1/4 - ε`.
    pub fn uniform_box(len: f64, n: usize, delta_window: f64, eps: f64) -> Result<Self> {
        Self::new(delta_window, eps, 0.25 - eps, 1.0, 2.0, n, len)
    }
}

fn check_theorem2_domain(len: f64, n: usize, delta: f64, eps: f64) -> Result<()> {
    if !(len >= 16.0) {
        return Err(Error::Domain(format!("L must be at least 16, got {len}")));
    }
    if n <= 8 {
        return Err(Error::Domain(format!("n must exceed 8, got {n}")));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Domain(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    if !(eps > 0.0 && eps < 0.125) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1/8), got {eps}")));
    }
    Ok(())
}

/// `2^{-(1/2-δ) log L/log log L} + (log L/log log L)(2/((1-δ) log L))^{(1/4-ε)n}`.
pub fn theorem2_rhs(len: f64, n: usize, delta: f64, eps: f64) -> Result<f64> {
    check_theorem2_domain(len, n, delta, eps)?;
    let l = math::ln(len);
    let ll = math::ln(l);
    let first = math::powf(2.0, -(0.5 - delta) * l / ll);
    let second = l / ll * math::powf(2.0 / ((1.0 - delta) * l), (0.25 - eps) * n as f64);
    Ok(first + second)
}

/// `Π_p(1 + 1/(2p^{cn})) - 1 + 2^{-#𝒫} Π_p(1 + ω(p)^{-1})`.
pub fn prop23_rhs(primes: &PrimeSet, omega: impl Fn(u64) -> f64, c: f64, n: usize) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("c must be positive, got {c}")));
    }
    let mut first = 1.0;
    let mut second = math::powf(2.0, -(primes.len() as f64));
    for &p in primes.primes() {
        let w = omega(p);
        if !(w > 0.0) {
            return Err(Error::Domain(format!("omega({p}) = {w} is not positive")));
        }
        first *= 1.0 + 0.5 * math::powf(p as f64, -c * n as f64);
        second *= 1.0 + 1.0 / w;
    }
    Ok(first - 1.0 + second)
}

/// The general bound specialised to the uniform-box parameters on the prime
/// window: `ω(p) = (p-4)/4`, `c = 1/4 - ε`.
pub fn theorem2_presimplified(len: f64, n: usize, delta: f64, eps: f64) -> Result<f64> {
    check_theorem2_domain(len, n, delta, eps)?;
    let window = choose_prime_window(len, delta)?;
    if window.min() <= 4 {
        return Err(Error::Domain(format!(
            "window contains p = {} ≤ 4, where ω(p) = (p-4)/4 is not positive",
            window.min()
        )));
    }
    prop23_rhs(&window, |p| (p as f64 - 4.0) / 4.0, 0.25 - eps, n)
}

/// The primes in `((1-δ)/2·log L, (1-δ)·log L]`.
pub fn choose_prime_window(len: f64, delta: f64) -> Result<PrimeSet> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(len > 1.0) {
        return Err(Error::Domain(format!("L must exceed 1, got {len}")));
    }
    let l = math::ln(len);
    let lo = (1.0 - delta) / 2.0 * l;
    let hi = (1.0 - delta) * l;
    let sieve = SieveTable::new(math::floor(hi) as u64)?;
    let primes = sieve.primes_in(math::floor(lo) as u64, math::floor(hi) as u64)?;
    if primes.is_empty() {
        return Err(Error::EmptyWindow { lo, hi });
    }
    PrimeSet::new(primes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::CoeffLaw;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn uniform(p: u64, n: usize) -> ProductMeasure {
        ProductMeasure::uniform(&PrimeSet::single(p).unwrap(), n).unwrap()
    }

    fn point(p: u64, lower: &[i64]) -> ProductMeasure {
        ProductMeasure::pushforward(&PolyLaw::point_mass(lower), &PrimeSet::single(p).unwrap()).unwrap()
    }

    #[test]
    fn square_indicator() {
        let f3 = PrimeField::new(3).unwrap();
        assert!(is_square_fq(0, f3).unwrap());
        assert!(is_square_fq(1, f3).unwrap());
        assert!(!is_square_fq(2, f3).unwrap());
        assert!(is_square_fq(1, PrimeField::new(2).unwrap()).is_err());
    }

    #[test]
    fn uniform_probabilities() {
        for (p, n) in [(3u64, 2usize), (3, 3), (3, 4), (3, 5), (5, 2), (5, 3), (7, 2)] {
            let expect = q(1, 2) + BigRational::new(1.into(), (2 * p as i64).into());
            assert_eq!(prob_disc_square_fq(&uniform(p, n)).unwrap(), expect, "({p},{n})");
        }
        assert_eq!(prob_disc_square_fq(&uniform(5, 1)).unwrap(), q(1, 1));
        assert!(prob_disc_square_fq(&uniform(2, 2)).is_err());
    }

    #[test]
    fn decomposition_instances() {
        let d = decomposition_check(&uniform(3, 3)).unwrap();
        assert!(d.holds());
        assert_eq!(d.lhs, q(2, 3));
        assert_eq!(d.e_mu, q(0, 1));
        assert_eq!(d.e_nonsquarefree, q(1, 3));
        // T^2 + 1 is irreducible over F_3 with disc -4 ≡ 2, a non-residue.
        let d = decomposition_check(&point(3, &[1, 0])).unwrap();
        assert!(d.holds());
        assert_eq!(d.lhs, q(0, 1));
        let d = decomposition_check(&point(3, &[0, 0])).unwrap();
        assert!(d.holds());
        assert_eq!(d.lhs, q(1, 1));
        let law = PolyLaw::iid(CoeffLaw::uniform_box(-3, 7).unwrap(), 3);
        let m = ProductMeasure::pushforward(&law, &PrimeSet::single(5).unwrap()).unwrap();
        assert!(decomposition_check(&m).unwrap().holds());
    }

    #[test]
    fn fq_bound_reports() {
        let r = prop33_check(&uniform(5, 3), 1.0, 1.0, 0.2, 5.0).unwrap();
        assert!((r.deviation - 0.1).abs() < 1e-12);
        assert!(r.applicable && r.conclusion_holds);
        let r = prop33_check(&point(5, &[1, 1, 0]), 1.0, 1.0, 0.2, 5.0).unwrap();
        assert!(!r.norm_condition && !r.applicable);
        let law = PolyLaw::iid(CoeffLaw::uniform_box(0, 25).unwrap(), 3);
        let m = ProductMeasure::pushforward(&law, &PrimeSet::single(5).unwrap()).unwrap();
        assert!(prop33_check(&m, 1.0, 1.5, 0.2, 5.0).is_ok());
        assert!(prop33_check(&m, 1.0, 1.5, 0.3, 5.0).is_err());
    }

    #[test]
    fn integer_discriminants() {
        let d = |s: &str| disc_int(&s.parse::<IntPoly>().unwrap());
        assert_eq!(d("X^2+1"), BigInt::from(-4));
        assert_eq!(d("X^3-3*X-1"), BigInt::from(81));
        assert_eq!(d("X^2-2*X+1"), BigInt::from(0));
        assert_eq!(d("X^3-2"), BigInt::from(-108));
        assert_eq!(d("X+7"), BigInt::from(1));
        assert_eq!(d("X^5-X-1"), BigInt::from(2869));
    }

    #[test]
    fn int_poly_text() {
        let f: IntPoly = "X^3 - 3*X - 1".parse().unwrap();
        assert_eq!(f.to_string(), "X^3-3*X-1");
        assert!("2*X^2+1".parse::<IntPoly>().is_err());
        assert!("5".parse::<IntPoly>().is_err());
    }

    #[test]
    fn perfect_squares() {
        assert!(is_perfect_square_int(&BigInt::from(81)));
        assert!(is_perfect_square_int(&BigInt::from(0)));
        assert!(!is_perfect_square_int(&BigInt::from(-4)));
        let two128 = BigInt::one() << 128;
        assert!(is_perfect_square_int(&two128));
        assert!(!is_perfect_square_int(&(two128 + 1)));
    }

    #[test]
    fn wilson_contains_estimate() {
        for (h, n) in [(0u64, 10u64), (3, 10), (10, 10), (500, 100_000)] {
            let (lo, hi) = wilson_interval(h, n, WILSON_Z95);
            let p = h as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
    }

    #[test]
    fn monte_carlo_point_masses() {
        let law = PolyLaw::point_mass(&[-1, -3, 0]);
        let e = mc_disc_square(&law, 100, 1, &default_filter_primes(3)).unwrap();
        assert_eq!(e.estimate, 1.0);
        let law = PolyLaw::point_mass(&[1, 0]);
        let e = mc_disc_square(&law, 100, 1, &default_filter_primes(2)).unwrap();
        assert_eq!(e.estimate, 0.0);
        let law = PolyLaw::point_mass(&[1, -2]);
        let e = mc_disc_square(&law, 10, 1, &[]).unwrap();
        assert_eq!((e.estimate, e.zero_disc_rate), (1.0, 1.0));
    }

    #[test]
    fn monte_carlo_reproducible_and_sound() {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(-6, 12).unwrap(), 3);
        let mc = DiscMc::new(&law, &default_filter_primes(3)).unwrap().verify_rejections(true);
        let a = mc.run(7, 10_000).unwrap();
        let b = mc.run(7, 10_000).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tally.unsound_rejections, 0);
        assert!(a.tally.exact_checks < a.tally.samples);
        let unfiltered = DiscMc::new(&law, &[]).unwrap().run(7, 10_000).unwrap();
        assert_eq!(unfiltered.tally.hits, a.tally.hits);
    }

    #[test]
    fn theorem2_shape() {
        let mut prev = f64::INFINITY;
        for e in 2..=6 {
            let v = theorem2_rhs(libm::pow(10.0, e as f64), 20, 0.1, 0.05).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let a = theorem2_rhs(1000.0, 20, 0.1, 0.05).unwrap();
        let b = theorem2_rhs(1000.0, 30, 0.1, 0.05).unwrap();
        assert!(b < a);
        assert!(theorem2_rhs(10.0, 20, 0.1, 0.05).is_err());
        assert!(theorem2_rhs(1000.0, 8, 0.1, 0.05).is_err());
        assert!(theorem2_rhs(1000.0, 20, 0.1, 0.2).is_err());
    }

    #[test]
    fn prop23_values() {
        let set = PrimeSet::single(11).unwrap();
        let v12 = prop23_rhs(&set, |p| (p as f64 - 4.0) / 4.0, 0.2, 12).unwrap();
        let v20 = prop23_rhs(&set, |p| (p as f64 - 4.0) / 4.0, 0.2, 20).unwrap();
        assert!(v12.is_finite() && v20 < v12);
        assert!(prop23_rhs(&set, |_| 0.0, 0.2, 12).is_err());
    }

    #[test]
    fn prime_windows() {
        let w = choose_prime_window(libm::exp(20.0), 0.1).unwrap();
        assert_eq!(w.primes(), &[11, 13, 17]);
        let w = choose_prime_window(100.0, 0.1).unwrap();
        assert_eq!(w.primes(), &[3]);
        assert!(matches!(choose_prime_window(5.0, 0.1), Err(Error::EmptyWindow { .. })));
        let wide = choose_prime_window(1e9, 0.1).unwrap().len();
        let narrow = choose_prime_window(1e9, 0.45).unwrap().len();
        assert!(narrow <= wide);
        assert!(theorem2_presimplified(libm::exp(20.0), 12, 0.1, 0.05).unwrap().is_finite());
    }

    proptest! {
        #[test]
        fn disc_matches_closed_forms(a in -50i64..50, b in -50i64..50, c in -50i64..50) {
            let (a, b, c) = (a as i128, b as i128, c as i128);
            let quad = IntPoly::from_lower(&[b as i64, a as i64]).unwrap();
            prop_assert_eq!(disc_int(&quad), BigInt::from(a * a - 4 * b));
            let cubic = IntPoly::from_lower(&[c as i64, b as i64, a as i64]).unwrap();
            let expect = a * a * b * b - 4 * b * b * b - 4 * a * a * a * c - 27 * c * c + 18 * a * b * c;
            prop_assert_eq!(disc_int(&cubic), BigInt::from(expect));
        }

        #[test]
        fn disc_reduces_mod_p(lower in proptest::collection::vec(-1000i64..1000, 1..8)) {
            let f = IntPoly::from_lower(&lower).unwrap();
            let d = disc_int(&f);
            for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
                let field = PrimeField::new(p).unwrap();
                prop_assert_eq!(field.from_bigint(&d), discriminant(&f.reduce(field)).unwrap());
            }
        }
    }
}
