//! Cycle-type certificates for `Gal(f) = S_n` and Monte Carlo rates.
//!
//! By Dedekind's theorem, when `p ∤ disc f` the factor degrees of `f mod p`
//! are the cycle lengths of a Frobenius element of `Gal(f)`. The certifier
//! collects such types and fires only on group-theoretic rules that force
//! `S_n`:
//!
//! * type `[n]` makes the group transitive (and `f` irreducible);
//! * type `[1, n-1]` together with `[n]` makes it 2-transitive, hence
//!   primitive;
//! * a prime part `q > n/2` in a transitive group already forces
//!   primitivity, and a suitable power of that element is a `q`-cycle;
//! * a primitive group containing a `q`-cycle with `q ≤ n-3` prime contains
//!   `A_n` (Jordan), and a primitive group containing a transposition is
//!   `S_n`;
//! * an odd cycle type then lifts `A_n` to `S_n`.
//!
//! An `n`-cycle plus `[1, n-1]` plus an odd element is *not* enough on its
//! own: the affine group `AGL(1,5)` and `PGL(2,5)` on six points contain all
//! three.

use alloc::vec::Vec;
use core::ops::AddAssign;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;

use crate::discprob::{disc_int, is_perfect_square_int, wilson_interval, DiscMc, IntPoly, SHARD_SIZE, WILSON_Z95};
use crate::ffpoly::{factor, is_prime, is_squarefree, PrimeField};
use crate::math;
use crate::measures::{LawSampler, PolyLaw};
use crate::{Error, Result};

/// Factor degrees of `f mod p`, descending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleType {
    pub parts: Vec<usize>,
    pub prime: u64,
}

impl CycleType {
    /// Sign of a permutation with these cycle lengths is odd.
    pub fn is_odd(&self) -> bool {
        self.parts.iter().map(|&k| k - 1).sum::<usize>() % 2 == 1
    }

    fn is_n_cycle(&self, n: usize) -> bool {
        self.parts == [n]
    }

    fn is_fix_one(&self, n: usize) -> bool {
        n >= 2 && self.parts == [n - 1, 1]
    }

    /// Exactly one part equal to 2 and all others odd: an odd power is a
    /// transposition.
    fn is_transposition_type(&self) -> bool {
        self.parts.iter().filter(|&&k| k == 2).count() == 1
            && self.parts.iter().all(|&k| k == 2 || k % 2 == 1)
    }

    /// Primes `q` for which a power of this element is a `q`-cycle: `q`
    /// occurs exactly once and divides no other part.
    fn isolable_primes(&self) -> impl Iterator<Item = usize> + '_ {
        self.parts.iter().copied().filter(move |&q| {
            is_prime(q as u64)
                && self.parts.iter().filter(|&&k| k == q).count() == 1
                && self.parts.iter().filter(|&&k| k != q).all(|&k| k % q != 0)
        })
    }
}

/// Cycle type at `p`, or `None` when `f mod p` is not squarefree.
pub fn cycle_type(f: &IntPoly, p: u64) -> Result<Option<CycleType>> {
    let field = PrimeField::new(p)?;
    let g = f.reduce(field);
    if !is_squarefree(&g)? {
        return Ok(None);
    }
    Ok(Some(CycleType {
        parts: factor(&g)?.degrees(),
        prime: p,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NotSnReason {
    Reducible,
    DiscSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    SnCertified,
    NotSn(NotSnReason),
    Unknown,
}

/// Which sufficient condition produced an `S_n` certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SnRule {
    /// `n = 2` and `f` irreducible mod some prime.
    Quadratic,
    /// `[n]`, a prime part `q ∈ (n/2, n-3]`, and an odd type.
    LongPrimeCycle,
    /// `[n]`, `[1, n-1]`, and a transposition type.
    DoublyTransitiveTransposition,
    /// `[n]`, `[1, n-1]`, a `q`-cycle power for prime `q ≤ n-3`, and an
    /// odd type.
    DoublyTransitiveJordan,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Witnesses {
    pub transitive: Option<u64>,
    pub fix_one: Option<u64>,
    /// `(p, q)` for a prime part `q ∈ (n/2, n-3]`.
    pub long_prime_cycle: Option<(u64, usize)>,
    /// `(p, q)` for an isolable prime part `q ≤ n-3`.
    pub q_cycle: Option<(u64, usize)>,
    pub transposition: Option<u64>,
    pub odd: Option<u64>,
    /// Integer root proving reducibility.
    pub rational_root: Option<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub rule: Option<SnRule>,
    pub witnesses: Witnesses,
    pub primes_tried: usize,
    /// Exact discriminant, computed only when the prime scan did not
    /// certify.
    pub disc: Option<BigInt>,
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut p = 2u64;
    while out.len() < count {
        if is_prime(p) {
            out.push(p);
        }
        p += 1;
    }
    out
}

/// Largest `|c|` whose divisors are enumerated in the rational-root test.
const ROOT_SEARCH_LIMIT: u64 = 1_000_000_000_000;

/// An integer root of `f`, searched among the divisors of the constant
/// term. Returns `None` without a verdict when the constant term is too
/// large to enumerate its divisors.
pub fn integer_root(f: &IntPoly) -> Option<BigInt> {
    let c = f.constant_term();
    if c.is_zero() {
        return Some(BigInt::zero());
    }
    let m = c.abs().to_u64().filter(|&m| m <= ROOT_SEARCH_LIMIT)?;
    let mut d = 1u64;
    while d * d <= m {
        if m % d == 0 {
            for r in [d, m / d] {
                for s in [BigInt::from(r), -BigInt::from(r)] {
                    if f.eval(&s).is_zero() {
                        return Some(s);
                    }
                }
            }
        }
        d += 1;
    }
    None
}

struct Scan {
    n: usize,
    w: Witnesses,
}

impl Scan {
    fn observe(&mut self, t: &CycleType) {
        let n = self.n;
        let p = t.prime;
        if t.is_n_cycle(n) {
            self.w.transitive.get_or_insert(p);
        }
        if t.is_fix_one(n) {
            self.w.fix_one.get_or_insert(p);
        }
        if t.is_transposition_type() {
            self.w.transposition.get_or_insert(p);
        }
        if t.is_odd() {
            self.w.odd.get_or_insert(p);
        }
        for q in t.isolable_primes() {
            if 2 * q > n && q + 3 <= n {
                self.w.long_prime_cycle.get_or_insert((p, q));
            }
            if q + 3 <= n {
                self.w.q_cycle.get_or_insert((p, q));
            }
        }
    }

    fn rule(&self) -> Option<SnRule> {
        let w = &self.w;
        if self.n == 2 {
            return w.transitive.map(|_| SnRule::Quadratic);
        }
        w.transitive?;
        if w.long_prime_cycle.is_some() && w.odd.is_some() {
            return Some(SnRule::LongPrimeCycle);
        }
        w.fix_one?;
        if w.transposition.is_some() {
            return Some(SnRule::DoublyTransitiveTransposition);
        }
        if w.q_cycle.is_some() && w.odd.is_some() {
            return Some(SnRule::DoublyTransitiveJordan);
        }
        None
    }
}

/// Scans `primes` in order and certifies `Gal(f) = S_n` when a sound rule
/// fires; otherwise falls back to exact reducibility and square-disc checks.
pub fn sn_certificate_with(f: &IntPoly, primes: &[u64]) -> Result<Certificate> {
    let n = f.degree();
    if n < 2 {
        return Err(Error::Domain("the certifier needs degree at least 2".into()));
    }
    if primes.is_empty() {
        return Err(Error::Domain("prime budget must be at least 1".into()));
    }
    let mut scan = Scan {
        n,
        w: Witnesses::default(),
    };
    let mut tried = 0;
    for &p in primes {
        tried += 1;
        if let Some(t) = cycle_type(f, p)? {
            scan.observe(&t);
            if let Some(rule) = scan.rule() {
                return Ok(Certificate {
                    verdict: Verdict::SnCertified,
                    rule: Some(rule),
                    witnesses: scan.w,
                    primes_tried: tried,
                    disc: None,
                });
            }
        }
    }
    let disc = disc_int(f);
    let mut w = scan.w;
    let verdict = if disc.is_zero() {
        Verdict::NotSn(NotSnReason::Reducible)
    } else if let Some(r) = integer_root(f) {
        w.rational_root = Some(r);
        Verdict::NotSn(NotSnReason::Reducible)
    } else if is_perfect_square_int(&disc) {
        Verdict::NotSn(NotSnReason::DiscSquare)
    } else {
        Verdict::Unknown
    };
    Ok(Certificate {
        verdict,
        rule: None,
        witnesses: w,
        primes_tried: tried,
        disc: Some(disc),
    })
}

/// [`sn_certificate_with`] over the first `budget` primes.
pub fn sn_certificate(f: &IntPoly, budget: usize) -> Result<Certificate> {
    sn_certificate_with(f, &first_primes(budget))
}

/// Exact Galois group of a monic integer cubic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CubicGalois {
    S3,
    C3,
    /// Linear times an irreducible quadratic.
    S2,
    /// Three rational roots.
    C1,
    /// `disc = 0`.
    Degenerate,
}

pub fn exact_cubic_galois(f: &IntPoly) -> Result<CubicGalois> {
    if f.degree() != 3 {
        return Err(Error::WrongDegree {
            expected: 3,
            found: f.degree(),
        });
    }
    let disc = disc_int(f);
    if disc.is_zero() {
        return Ok(CubicGalois::Degenerate);
    }
    let square = is_perfect_square_int(&disc);
    // A monic cubic is reducible over Q iff it has an integer root, and any
    // such root divides the constant term.
    let root = integer_root(f);
    if root.is_none() && f.constant_term().abs().to_u64().is_none_or(|m| m > ROOT_SEARCH_LIMIT) {
        return Err(Error::Domain("constant term too large for the rational-root test".into()));
    }
    Ok(match (root.is_some(), square) {
        (false, true) => CubicGalois::C3,
        (false, false) => CubicGalois::S3,
        (true, true) => CubicGalois::C1,
        (true, false) => CubicGalois::S2,
    })
}

/// `n³ log L / √L`.
pub fn gallagher_rhs(n: usize, len: f64) -> Result<f64> {
    if !(len >= 2.0) {
        return Err(Error::Domain(alloc::format!("L must be at least 2, got {len}")));
    }
    let n = n as f64;
    Ok(n * n * n * math::ln(len) / math::sqrt(len))
}

/// Whether `(n, a, L)` lies where the uniform-in-`n` statement applies:
/// either `L ≥ n^7`, or `|a| ≤ e^{n^{1/3}}/2`.
pub fn in_uniform_regime(n: usize, a: i64, len: u64) -> bool {
    let nf = n as f64;
    math::powf(nf, 7.0) <= len as f64 || (a as f64).abs() <= 0.5 * math::exp(math::powf(nf, 1.0 / 3.0))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GaloisTally {
    pub samples: u64,
    pub certified: u64,
    pub disc_square: u64,
    pub reducible: u64,
    pub unknown: u64,
}

impl GaloisTally {
    pub fn record(&mut self, v: Verdict) {
        self.samples += 1;
        match v {
            Verdict::SnCertified => self.certified += 1,
            Verdict::NotSn(NotSnReason::DiscSquare) => self.disc_square += 1,
            Verdict::NotSn(NotSnReason::Reducible) => self.reducible += 1,
            Verdict::Unknown => self.unknown += 1,
        }
    }
}

impl AddAssign for GaloisTally {
    fn add_assign(&mut self, o: Self) {
        self.samples += o.samples;
        self.certified += o.certified;
        self.disc_square += o.disc_square;
        self.reducible += o.reducible;
        self.unknown += o.unknown;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaloisReport {
    pub n: usize,
    pub seed: u64,
    pub budget: usize,
    pub tally: GaloisTally,
    pub certified_rate: f64,
    pub certified_wilson95: (f64, f64),
    pub disc_square_rate: f64,
    pub reducible_rate: f64,
    pub unknown_rate: f64,
    /// `n³ log L/√L` for box laws.
    pub gallagher_bound: Option<f64>,
    /// For box laws: `L ≥ n^7` or `|a| ≤ e^{n^{1/3}}/2` on every coefficient.
    pub in_uniform_regime: Option<bool>,
}

/// Sharded Monte Carlo over a polynomial law; sharding matches
/// [`DiscMc`].
#[derive(Debug, Clone)]
pub struct GaloisMc {
    law: PolyLaw,
    samplers: Vec<LawSampler>,
    primes: Vec<u64>,
}

impl GaloisMc {
    pub fn new(law: &PolyLaw, budget: usize) -> Result<Self> {
        if law.degree() < 2 {
            return Err(Error::Domain("the certifier needs degree at least 2".into()));
        }
        if budget == 0 {
            return Err(Error::Domain("prime budget must be at least 1".into()));
        }
        Ok(Self {
            law: law.clone(),
            samplers: law.laws().iter().map(|l| l.sampler()).collect(),
            primes: first_primes(budget),
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> IntPoly {
        let lower: Vec<i64> = self.samplers.iter().map(|s| s.sample(rng)).collect();
        IntPoly::from_lower(&lower).expect("degree ≥ 2")
    }

    pub fn certify(&self, f: &IntPoly) -> Result<Certificate> {
        sn_certificate_with(f, &self.primes)
    }

    /// Calls `visit` on every sample of shard `shard` with its certificate.
    pub fn for_each_in_shard(
        &self,
        seed: u64,
        samples: u64,
        shard: u64,
        mut visit: impl FnMut(&IntPoly, &Certificate),
    ) -> Result<()> {
        let start = shard * SHARD_SIZE;
        let count = samples.saturating_sub(start).min(SHARD_SIZE);
        let mut rng = DiscMc::rng(seed, shard);
        for _ in 0..count {
            let f = self.draw(&mut rng);
            let c = self.certify(&f)?;
            visit(&f, &c);
        }
        Ok(())
    }

    pub fn run_shard(&self, seed: u64, samples: u64, shard: u64) -> Result<GaloisTally> {
        let mut t = GaloisTally::default();
        self.for_each_in_shard(seed, samples, shard, |_, c| t.record(c.verdict))?;
        Ok(t)
    }

    pub fn run(&self, seed: u64, samples: u64) -> Result<GaloisReport> {
        if samples == 0 {
            return Err(Error::Domain("samples must be at least 1".into()));
        }
        let mut t = GaloisTally::default();
        for s in 0..DiscMc::shard_count(samples) {
            t += self.run_shard(seed, samples, s)?;
        }
        Ok(self.report(seed, t))
    }

    pub fn report(&self, seed: u64, tally: GaloisTally) -> GaloisReport {
        let n = self.law.degree();
        let s = tally.samples.max(1) as f64;
        let boxes: Option<Vec<(i64, u64)>> = self
            .law
            .laws()
            .iter()
            .map(|l| match l {
                crate::measures::CoeffLaw::UniformBox { a, len } => Some((*a, *len)),
                _ => None,
            })
            .collect();
        let gallagher_bound = self
            .law
            .common_box()
            .and_then(|(_, len)| gallagher_rhs(n, len as f64).ok());
        let in_regime = boxes.map(|b| b.iter().all(|&(a, len)| in_uniform_regime(n, a, len)));
        GaloisReport {
            n,
            seed,
            budget: self.primes.len(),
            tally,
            certified_rate: tally.certified as f64 / s,
            certified_wilson95: wilson_interval(tally.certified, tally.samples, WILSON_Z95),
            disc_square_rate: tally.disc_square as f64 / s,
            reducible_rate: tally.reducible as f64 / s,
            unknown_rate: tally.unknown as f64 / s,
            gallagher_bound,
            in_uniform_regime: in_regime,
        }
    }
}

/// Sequential estimate of the certified `S_n` rate.
pub fn estimate_prob_sn(law: &PolyLaw, samples: u64, budget: usize, seed: u64) -> Result<GaloisReport> {
    GaloisMc::new(law, budget)?.run(seed, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::CoeffLaw;
    use alloc::vec;

    fn poly(s: &str) -> IntPoly {
        s.parse().unwrap()
    }

    #[test]
    fn cycle_types() {
        // X^5 + X + 1 = (X^2 + X + 1)(X^3 + X^2 + 1) over F_2.
        let t = cycle_type(&poly("X^5-X-1"), 2).unwrap().unwrap();
        assert_eq!(t.parts, vec![3, 2]);
        let f2 = PrimeField::new(2).unwrap();
        let oracle = crate::ffpoly::factor_trial_division(&poly("X^5-X-1").reduce(f2)).unwrap();
        assert_eq!(oracle.degrees(), vec![3, 2]);
        let t = cycle_type(&poly("X^5-X-1"), 5).unwrap().unwrap();
        assert_eq!(t.parts, vec![5]);
        assert!(cycle_type(&poly("X^2-2*X+1"), 7).unwrap().is_none());
        for p in [3u64, 5, 7, 11, 13] {
            if let Some(t) = cycle_type(&poly("X^3-3*X-1"), p).unwrap() {
                assert_eq!(t.parts.iter().sum::<usize>(), 3);
                assert!(t.parts == [3] || t.parts == [1, 1, 1]);
            }
        }
    }

    #[test]
    fn certificate_anchors() {
        let c = sn_certificate(&poly("X^5-X-1"), 50).unwrap();
        assert_eq!(c.verdict, Verdict::SnCertified);
        let c = sn_certificate(&poly("X^3-3*X-1"), 50).unwrap();
        assert_eq!(c.verdict, Verdict::NotSn(NotSnReason::DiscSquare));
        assert_eq!(c.disc, Some(BigInt::from(81)));
        let c = sn_certificate(&poly("X^2-1"), 20).unwrap();
        assert_eq!(c.verdict, Verdict::NotSn(NotSnReason::Reducible));
        let c = sn_certificate(&poly("X^2+1"), 20).unwrap();
        assert_eq!((c.verdict, c.rule), (Verdict::SnCertified, Some(SnRule::Quadratic)));
    }

    #[test]
    fn small_transitive_groups_are_not_certified() {
        // Galois group AGL(1,5) (order 20): contains [5], [1,4] and odd
        // elements, but no transposition and no 3-cycle.
        let c = sn_certificate(&poly("X^5-2"), 200).unwrap();
        assert_ne!(c.verdict, Verdict::SnCertified);
        // Galois group D_4.
        let c = sn_certificate(&poly("X^4-2"), 200).unwrap();
        assert_ne!(c.verdict, Verdict::SnCertified);
        // Galois group C_5.
        let c = sn_certificate(&poly("X^5-110*X^3-55*X^2+2310*X+979"), 200).unwrap();
        assert_ne!(c.verdict, Verdict::SnCertified);
    }

    #[test]
    fn cubic_oracle() {
        assert_eq!(exact_cubic_galois(&poly("X^3-3*X-1")).unwrap(), CubicGalois::C3);
        assert_eq!(exact_cubic_galois(&poly("X^3-2")).unwrap(), CubicGalois::S3);
        assert_eq!(exact_cubic_galois(&poly("X^3-X")).unwrap(), CubicGalois::C1);
        assert_eq!(exact_cubic_galois(&poly("X^3+X")).unwrap(), CubicGalois::S2);
        assert_eq!(exact_cubic_galois(&poly("X^3")).unwrap(), CubicGalois::Degenerate);
        assert!(exact_cubic_galois(&poly("X^2+1")).is_err());
    }

    #[test]
    fn certifier_is_sound_on_cubics() {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(-50, 100).unwrap(), 3);
        let mc = GaloisMc::new(&law, 30).unwrap();
        let mut checked = 0;
        for shard in 0..2 {
            mc.for_each_in_shard(3, 8192, shard, |f, c| {
                let g = exact_cubic_galois(f).unwrap();
                match c.verdict {
                    Verdict::SnCertified => assert_eq!(g, CubicGalois::S3, "{f}"),
                    Verdict::NotSn(NotSnReason::DiscSquare) => {
                        let d = c.disc.clone().unwrap();
                        assert!(!d.is_zero() && is_perfect_square_int(&d));
                        assert!(g == CubicGalois::C3 || g == CubicGalois::C1);
                    }
                    Verdict::NotSn(NotSnReason::Reducible) => assert!(g != CubicGalois::S3 && g != CubicGalois::C3),
                    Verdict::Unknown => {}
                }
                checked += 1;
            })
            .unwrap();
        }
        assert_eq!(checked, 8192);
    }

    #[test]
    fn estimates_are_reproducible() {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(-10, 20).unwrap(), 4);
        let a = estimate_prob_sn(&law, 2000, 30, 9).unwrap();
        let b = estimate_prob_sn(&law, 2000, 30, 9).unwrap();
        assert_eq!(a, b);
        let t = a.tally;
        assert_eq!(t.certified + t.disc_square + t.reducible + t.unknown, t.samples);
        let r = estimate_prob_sn(&PolyLaw::point_mass(&[1, 0]), 10, 10, 0).unwrap();
        assert_eq!(r.certified_rate, 1.0);
    }

    #[test]
    fn gallagher_values() {
        let v = gallagher_rhs(10, 1e7).unwrap();
        assert!((v - 1000.0 * libm::log(1e7) / libm::sqrt(1e7)).abs() < 1e-12);
        assert!((v - 5.1).abs() < 0.05);
        assert!(gallagher_rhs(10, 1e3).unwrap() > 1.0);
        assert!(gallagher_rhs(10, 1e8).unwrap() < v);
        assert!(gallagher_rhs(10, 1.0).is_err());
    }

    #[test]
    fn regime_tags() {
        assert!(in_uniform_regime(3, 1_000_000, 10_000));
        assert!(!in_uniform_regime(10, 1_000, 100));
        assert!(in_uniform_regime(10, 2, 100));
    }
}
