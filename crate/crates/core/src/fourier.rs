//! Fourier analysis of functions on `M_{𝒫,n}` at frequencies `T^{-n}G`.
//!
//! Grid layout: a tuple `(F_p)_{p∈𝒫}` of monic degree-`n` polynomials is
//! identified with the `n` CRT residues `r_k ∈ ℤ/P` of its lower coefficients
//! (`r_k ≡ F_p^k mod p`), and stored at index `Σ_k r_k P^k`.
//!
//! Only frequencies of the form `T^{-n}G` with `G` monic of degree `n` are
//! used. For degree-`n` inputs the character `e(res(ϑH))` depends only on the
//! first `n` tail coefficients of `ϑ`, so this grid loses nothing. The
//! pairing `res(T^{-n}GH) = Σ_{i+j=n-1} G^i H^j` never touches the leading
//! coefficients, which lets the full spectrum factor into `n` one-dimensional
//! character transforms over `ℤ/P`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::ffpoly::{moebius, FFPoly, PrimeField};
use crate::math;
use crate::torus::{self, MultiTorusElem, PrimeSet};
use crate::{Error, Result, DEFAULT_ENUMERATION_CAP};

/// Shape of `M_{𝒫,n}` as a flat array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    primes: PrimeSet,
    n: usize,
    modulus: u64,
    size: usize,
    weight: u64,
}

impl Grid {
    pub fn new(primes: PrimeSet, n: usize) -> Result<Self> {
        Self::with_cap(primes, n, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(primes: PrimeSet, n: usize, cap: u64) -> Result<Self> {
        let modulus = primes.modulus()?;
        let size = (modulus as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::EnumerationCap { size, cap });
        }
        let weight = primes.pairing_weight()?;
        Ok(Self {
            primes,
            n,
            modulus,
            size: size as usize,
            weight,
        })
    }

    pub fn single(field: PrimeField, n: usize) -> Result<Self> {
        Self::new(PrimeSet::single(field.p())?, n)
    }

    pub fn primes(&self) -> &PrimeSet {
        &self.primes
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// `P`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `P^n`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// CRT residues `r_0..r_{n-1}` of the lower coefficients.
    pub fn digits(&self, mut idx: usize) -> Vec<u64> {
        let m = self.modulus as usize;
        (0..self.n)
            .map(|_| {
                let d = idx % m;
                idx /= m;
                d as u64
            })
            .collect()
    }

    pub fn index_of_digits(&self, digits: &[u64]) -> usize {
        digits
            .iter()
            .rev()
            .fold(0usize, |acc, &d| acc * self.modulus as usize + d as usize)
    }

    /// The monic tuple stored at `idx`, one polynomial per prime.
    pub fn tuple(&self, idx: usize) -> Vec<FFPoly> {
        let digits = self.digits(idx);
        self.primes
            .fields()
            .into_iter()
            .map(|f| {
                let mut coeffs: Vec<u64> = digits.iter().map(|&d| d % f.p()).collect();
                coeffs.push(1);
                FFPoly::new(f, coeffs)
            })
            .collect()
    }

    pub fn index_of(&self, tuple: &[FFPoly]) -> Result<usize> {
        if tuple.len() != self.primes.len() {
            return Err(Error::DimensionMismatch("tuple length differs from prime set".into()));
        }
        for (f, &p) in tuple.iter().zip(self.primes.primes()) {
            if f.field().p() != p {
                return Err(Error::FieldMismatch(f.field().p(), p));
            }
            if f.degree() != Some(self.n) || !f.is_monic() {
                return Err(Error::DimensionMismatch("tuple entry is not monic of degree n".into()));
            }
        }
        let digits = (0..self.n)
            .map(|k| {
                let residues: Vec<u64> = tuple.iter().map(|f| f.coeff(k)).collect();
                self.primes.crt_join(&residues)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.index_of_digits(&digits))
    }

    /// Index of the all-`T^n` tuple.
    pub fn origin(&self) -> usize {
        0
    }

    /// Index of `-G` (every lower coefficient negated): the frequency
    /// `-T^{-n}G` expressed on the grid.
    pub fn neg_index(&self, idx: usize) -> usize {
        let m = self.modulus;
        let digits: Vec<u64> = self.digits(idx).into_iter().map(|d| (m - d) % m).collect();
        self.index_of_digits(&digits)
    }

    /// `Σ_p res(T^{-n}G_p H_p)/p mod 1`, as a numerator over `P`.
    pub fn pairing(&self, g: usize, h: usize) -> u64 {
        let m = self.modulus as u128;
        let gd = self.digits(g);
        let hd = self.digits(h);
        let mut acc = 0u128;
        for j in 0..self.n {
            acc += gd[self.n - 1 - j] as u128 * hd[j] as u128 % m;
        }
        ((acc % m) * self.weight as u128 % m) as u64
    }
}

/// A complex-valued function on `M_{𝒫,n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.size()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[FFPoly]) -> Complex64) -> Self {
        let values = (0..grid.size()).map(|i| f(&grid.tuple(i))).collect();
        Self { grid, values }
    }

    pub fn point_mass(grid: Grid, idx: usize) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.size()];
        values[idx] = Complex64::new(1.0, 0.0);
        Self { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let values = vec![Complex64::new(c, 0.0); grid.size()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.values, &other.values)
    }
}

/// `η̂(T^{-n}G)` for every `G`, same layout as the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::DimensionMismatch("spectrum length".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, idx: usize) -> Complex64 {
        self.values[idx]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|&z| math::abs(z)).fold(0.0, f64::max)
    }
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| math::abs(x - y))
        .fold(0.0, f64::max)
}

/// `η̂(T^{-n}G) = Σ_H η(H) e_𝒫(T^{-n}GH)`, summed term by term through the
/// torus residue map. Cost `O(P^n)` per frequency.
pub fn transform_at(eta: &GridFunction, g: &[FFPoly]) -> Result<Complex64> {
    let grid = &eta.grid;
    grid.index_of(g)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (h_idx, &v) in eta.values.iter().enumerate() {
        if v == Complex64::new(0.0, 0.0) {
            continue;
        }
        let h = grid.tuple(h_idx);
        let xi = MultiTorusElem::frac_mul(grid.n, grid.primes(), g, &h)?;
        acc += v * torus::e_multi_product(&xi);
    }
    Ok(acc)
}

/// Applies `x[c] ← Σ_r x[r] e(sign·w·c·r/P)` along every axis.
fn separable_transform(values: &mut [Complex64], grid: &Grid, sign: i64) {
    let m = grid.modulus as usize;
    let table = math::unit_root_table(grid.modulus);
    let w = grid.weight as usize;
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let mut stride = 1usize;
    for _axis in 0..grid.n {
        let block = stride * m;
        for base in (0..values.len()).step_by(block) {
            for offset in 0..stride {
                for (r, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + offset + r * stride];
                }
                for (c, o) in out.iter_mut().enumerate() {
                    let step = (w * c) % m;
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut phase = 0usize;
                    for &v in &line {
                        let k = if sign >= 0 { phase } else { (m - phase) % m };
                        acc += v * table[k];
                        phase = (phase + step) % m;
                    }
                    *o = acc;
                }
                for (c, &v) in out.iter().enumerate() {
                    values[base + offset + c * stride] = v;
                }
            }
        }
        stride = block;
    }
}

/// Reverses the order of the `n` digits of every index.
fn reverse_axes(values: &[Complex64], grid: &Grid) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    for (idx, &v) in values.iter().enumerate() {
        let mut d = grid.digits(idx);
        d.reverse();
        out[grid.index_of_digits(&d)] = v;
    }
    out
}

fn spectrum_with_sign(eta: &GridFunction, sign: i64) -> Spectrum {
    let mut work = eta.values.clone();
    separable_transform(&mut work, &eta.grid, sign);
    // work is indexed by c_j = G^{n-1-j}; spectrum index uses G^i.
    Spectrum {
        grid: eta.grid.clone(),
        values: reverse_axes(&work, &eta.grid),
    }
}

/// Full spectrum by the per-coordinate factorization, `O(n·P^{n+1})`.
pub fn full_spectrum(eta: &GridFunction) -> Spectrum {
    spectrum_with_sign(eta, 1)
}

/// Full spectrum by evaluating [`transform_at`] at every frequency,
/// `O(P^{2n})`. Reference route for tests.
pub fn full_spectrum_naive(eta: &GridFunction) -> Result<Spectrum> {
    let grid = eta.grid.clone();
    let values = (0..grid.size())
        .map(|g| transform_at(eta, &grid.tuple(g)))
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(grid, values)
}

/// Values of `η̂(-T^{-n}G)` for every `G`.
pub fn full_spectrum_negated(eta: &GridFunction) -> Spectrum {
    spectrum_with_sign(eta, -1)
}

/// Fourier inversion: `η(F) = P^{-n} Σ_G η̂(T^{-n}G) e_𝒫(-T^{-n}GF)`.
pub fn invert(spec: &Spectrum) -> GridFunction {
    let grid = &spec.grid;
    let mut work = reverse_axes(&spec.values, grid);
    separable_transform(&mut work, grid, -1);
    let scale = 1.0 / grid.size() as f64;
    for v in work.iter_mut() {
        *v *= scale;
    }
    GridFunction {
        grid: grid.clone(),
        values: work,
    }
}

/// `Σ_G e_𝒫(T^{-n}FG)`, summed through the torus with exact phases.
pub fn verify_orthogonality(primes: &PrimeSet, n: usize, f: &[FFPoly]) -> Result<Complex64> {
    let grid = Grid::new(primes.clone(), n)?;
    grid.index_of(f)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for g_idx in 0..grid.size() {
        let g = grid.tuple(g_idx);
        let xi = MultiTorusElem::frac_mul(n, primes, f, &g)?;
        acc += torus::e_multi(&xi);
    }
    Ok(acc)
}

/// Both sides of Parseval–Plancherel for real functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalSides {
    /// `Σ_F η(F)ζ(F)`.
    pub lhs: f64,
    /// `P^{-n} Σ_G η̂(T^{-n}G) ζ̂(-T^{-n}G)`.
    pub rhs: Complex64,
}

pub fn parseval(eta: &GridFunction, zeta: &GridFunction) -> Result<ParsevalSides> {
    if eta.grid != zeta.grid {
        return Err(Error::DimensionMismatch("functions live on different grids".into()));
    }
    let lhs = eta
        .values
        .iter()
        .zip(&zeta.values)
        .map(|(a, b)| a.re * b.re)
        .sum();
    let eta_hat = full_spectrum(eta);
    let zeta_hat_neg = full_spectrum_negated(zeta);
    let total: Complex64 = eta_hat
        .values
        .iter()
        .zip(&zeta_hat_neg.values)
        .map(|(a, b)| a * b)
        .sum();
    Ok(ParsevalSides {
        lhs,
        rhs: total / eta.grid.size() as f64,
    })
}

/// `μ_p` on `M_{p,n}` as a grid function.
pub fn moebius_function(field: PrimeField, n: usize) -> Result<GridFunction> {
    let grid = Grid::single(field, n)?;
    let values = (0..grid.size())
        .map(|i| {
            let f = FFPoly::monic_from_index(field, n, i as u64);
            moebius(&f).map(|m| Complex64::new(m as f64, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(grid, values)
}

/// `μ̂_p(T^{-n}G)` for all `G ∈ M_{p,n}`.
pub fn moebius_spectrum(field: PrimeField, n: usize) -> Result<Spectrum> {
    Ok(full_spectrum(&moebius_function(field, n)?))
}

/// Observed sup-norm of `μ̂_p` against the `p^{(3/4+ε)n}` envelope. The
/// envelope is only guaranteed for large `p`, so `holds` is informational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusSpectrumReport {
    pub p: u64,
    pub n: usize,
    pub eps: f64,
    pub max_abs: f64,
    /// `log_p(max |μ̂|) / n`.
    pub exponent: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn moebius_spectrum_report(field: PrimeField, n: usize, eps: f64) -> Result<MoebiusSpectrumReport> {
    let spec = moebius_spectrum(field, n)?;
    moebius_spectrum_report_from(&spec, field, n, eps)
}

pub fn moebius_spectrum_report_from(
    spec: &Spectrum,
    field: PrimeField,
    n: usize,
    eps: f64,
) -> Result<MoebiusSpectrumReport> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::Domain(alloc::format!("epsilon must lie in (0, 1/4), got {eps}")));
    }
    if n == 0 {
        return Err(Error::Domain("degree must be at least 1".into()));
    }
    let p = field.p();
    let max_abs = spec.max_abs();
    let exponent = if max_abs > 0.0 {
        math::ln(max_abs) / (math::ln(p as f64) * n as f64)
    } else {
        f64::NEG_INFINITY
    };
    let bound = math::powf(p as f64, (0.75 + eps) * n as f64);
    Ok(MoebiusSpectrumReport {
        p,
        n,
        eps,
        max_abs,
        exponent,
        bound,
        holds: max_abs <= bound * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(primes: &[u64], n: usize) -> Grid {
        Grid::new(PrimeSet::new(primes.to_vec()).unwrap(), n).unwrap()
    }

    fn random_real(g: &Grid, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridFunction::from_real(g.clone(), (0..g.size()).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap()
    }

    #[test]
    fn tuple_index_roundtrip() {
        let g = grid(&[2, 3], 2);
        for i in 0..g.size() {
            assert_eq!(g.index_of(&g.tuple(i)).unwrap(), i);
        }
    }

    #[test]
    fn pairing_matches_torus() {
        let g = grid(&[2, 3], 2);
        for a in 0..g.size() {
            for b in 0..g.size() {
                let xi = MultiTorusElem::frac_mul(2, g.primes(), &g.tuple(a), &g.tuple(b)).unwrap();
                let phase = torus::psi_p(&xi) * num_rational::BigRational::from_integer(6.into());
                assert_eq!(phase.to_integer(), (g.pairing(a, b) as i64).into());
            }
        }
    }

    #[test]
    fn transform_at_examples() {
        let g = grid(&[2, 3], 2);
        let h0 = 7;
        let delta = GridFunction::point_mass(g.clone(), h0);
        for gi in [0usize, 5, 17, 35] {
            let v = transform_at(&delta, &g.tuple(gi)).unwrap();
            let xi = MultiTorusElem::frac_mul(2, g.primes(), &g.tuple(gi), &g.tuple(h0)).unwrap();
            assert!(math::abs(v - torus::e_multi(&xi)) < 1e-12);
        }
        let ones = GridFunction::constant(g.clone(), 1.0);
        assert!(math::abs(transform_at(&ones, &g.tuple(0)).unwrap() - Complex64::new(36.0, 0.0)) < 1e-9);
        assert!(math::abs(transform_at(&ones, &g.tuple(4)).unwrap()) < 1e-9);
    }

    #[test]
    fn mobius_spectrum_p2_n2() {
        let spec = moebius_spectrum(PrimeField::new(2).unwrap(), 2).unwrap();
        for z in spec.values() {
            assert!(z.im.abs() < 1e-12);
            let r = z.re.round();
            assert!((z.re - r).abs() < 1e-12);
            assert!([0.0, 2.0, -2.0].contains(&r));
        }
        assert!((spec.max_abs() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_probability_spectrum_is_indicator() {
        let g = grid(&[3], 3);
        let u = GridFunction::constant(g.clone(), 1.0 / 27.0);
        let spec = full_spectrum(&u);
        for (i, &z) in spec.values().iter().enumerate() {
            let want = if i == 0 { 1.0 } else { 0.0 };
            assert!(math::abs(z - Complex64::new(want, 0.0)) < 1e-12);
        }
    }

    #[test]
    fn fast_equals_naive() {
        for (primes, n) in [(&[3u64][..], 3usize), (&[5][..], 2), (&[2, 3][..], 2)] {
            let g = grid(primes, n);
            let f = random_real(&g, 11);
            let fast = full_spectrum(&f);
            let naive = full_spectrum_naive(&f).unwrap();
            assert!(max_abs_diff(fast.values(), naive.values()) < 1e-10);
        }
    }

    #[test]
    fn orthogonality_examples() {
        let ps = PrimeSet::single(2).unwrap();
        let f2 = PrimeField::new(2).unwrap();
        let v = verify_orthogonality(&ps, 1, &[FFPoly::parse(f2, "T").unwrap()]).unwrap();
        assert!(math::abs(v - Complex64::new(2.0, 0.0)) < 1e-12);
        let v = verify_orthogonality(&ps, 1, &[FFPoly::parse(f2, "T+1").unwrap()]).unwrap();
        assert!(math::abs(v) < 1e-12);
        let ps = PrimeSet::new(alloc::vec![2, 3]).unwrap();
        let f3 = PrimeField::new(3).unwrap();
        let f = [FFPoly::parse(f2, "T^2").unwrap(), FFPoly::parse(f3, "T^2").unwrap()];
        let v = verify_orthogonality(&ps, 2, &f).unwrap();
        assert!(math::abs(v - Complex64::new(36.0, 0.0)) < 1e-9);
    }

    #[test]
    fn inversion_examples() {
        let g = grid(&[3], 2);
        let delta = GridFunction::point_mass(g.clone(), 4);
        assert!(invert(&full_spectrum(&delta)).max_abs_diff(&delta) < 1e-12);
        let mu = moebius_function(PrimeField::new(3).unwrap(), 2).unwrap();
        assert!(invert(&full_spectrum(&mu)).max_abs_diff(&mu) < 1e-10);
        let u = GridFunction::constant(g, 1.0 / 9.0);
        assert!(invert(&full_spectrum(&u)).max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn parseval_examples() {
        let g = grid(&[2], 2);
        let delta = GridFunction::point_mass(g.clone(), 1);
        let s = parseval(&delta, &delta).unwrap();
        assert!((s.lhs - 1.0).abs() < 1e-12 && math::abs(s.rhs - Complex64::new(1.0, 0.0)) < 1e-12);
        let mu = moebius_function(PrimeField::new(2).unwrap(), 2).unwrap();
        let s = parseval(&mu, &mu).unwrap();
        assert!((s.lhs - 2.0).abs() < 1e-12);
        assert!(math::abs(s.rhs - Complex64::new(2.0, 0.0)) < 1e-10);
    }

    #[test]
    fn spectrum_report_examples() {
        let f2 = PrimeField::new(2).unwrap();
        let r = moebius_spectrum_report(f2, 2, 0.1).unwrap();
        assert!((r.max_abs - 2.0).abs() < 1e-12);
        assert!((r.bound - libm::pow(2.0, 1.7)).abs() < 1e-12);
        assert!(r.holds);
        let r = moebius_spectrum_report(f2, 1, 0.1).unwrap();
        assert!((r.max_abs - 2.0).abs() < 1e-12);
        assert!(!r.holds);
        assert!(moebius_spectrum_report(f2, 2, 0.3).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let ps = PrimeSet::single(5).unwrap();
        assert!(matches!(Grid::with_cap(ps, 4, 100), Err(Error::EnumerationCap { .. })));
    }
}
