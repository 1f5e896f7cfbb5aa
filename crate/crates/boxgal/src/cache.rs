//! CSV dumps of spectra and an on-disk memo of Möbius spectra.
//!
//! A dump has one column per prime, holding the lower coefficients
//! `g_0:g_1:...:g_{n-1}` of that component of the frequency, followed by
//! `real` and `imag`. Rows follow the grid's canonical index order, and floats
//! are written in shortest round-trip form so a reload is bit-exact.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use boxgal_core::ffpoly::PrimeField;
use boxgal_core::fourier::{moebius_spectrum, Grid, Spectrum};
use boxgal_core::moebius_stats::MoebiusSpectra;
use num_complex::Complex64;

use crate::report::Table;

pub const CACHE_ENV: &str = "BOXGAL_CACHE_DIR";

fn slot_text(grid: &Grid, idx: usize) -> Vec<String> {
    let n = grid.degree();
    grid.tuple(idx)
        .iter()
        .map(|g| {
            (0..n)
                .map(|k| g.coeff(k).to_string())
                .collect::<Vec<_>>()
                .join(":")
        })
        .collect()
}

/// The dump as a table, in canonical row order.
pub fn spectrum_table(spec: &Spectrum) -> Table {
    let grid = spec.grid();
    let mut t = Table {
        header: grid.primes().primes().iter().map(|p| format!("p{p}")).collect(),
        rows: Vec::with_capacity(grid.size()),
    };
    t.header.push("real".into());
    t.header.push("imag".into());
    for (idx, v) in spec.values().iter().enumerate() {
        let mut row = slot_text(grid, idx);
        row.push(format!("{:?}", v.re));
        row.push(format!("{:?}", v.im));
        t.rows.push(row);
    }
    t
}

pub fn write_spectrum_csv<W: Write>(out: W, spec: &Spectrum) -> anyhow::Result<()> {
    let t = spectrum_table(spec);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&t.header)?;
    for row in &t.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dump for `grid`, checking the header and every frequency column.
pub fn read_spectrum_csv<R: Read>(input: R, grid: &Grid) -> anyhow::Result<Spectrum> {
    let mut r = csv::Reader::from_reader(input);
    let primes = grid.primes().primes();
    let header = r.headers()?.clone();
    let expected: Vec<String> = primes
        .iter()
        .map(|p| format!("p{p}"))
        .chain(["real".to_string(), "imag".to_string()])
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        bail!("spectrum header {:?} does not match {:?}", header, expected);
    }
    let mut values = Vec::with_capacity(grid.size());
    for (idx, rec) in r.records().enumerate() {
        let rec = rec?;
        if idx >= grid.size() {
            bail!("spectrum dump has more than {} rows", grid.size());
        }
        let want = slot_text(grid, idx);
        for (j, w) in want.iter().enumerate() {
            if &rec[j] != w {
                bail!("row {idx}: frequency {} does not match expected {}", &rec[j], w);
            }
        }
        let re: f64 = rec[primes.len()].parse().context("real column")?;
        let im: f64 = rec[primes.len() + 1].parse().context("imag column")?;
        values.push(Complex64::new(re, im));
    }
    if values.len() != grid.size() {
        bail!("spectrum dump has {} rows, expected {}", values.len(), grid.size());
    }
    Ok(Spectrum::new(grid.clone(), values)?)
}

/// Memoizes `μ̂_p` on `M_{p,n}` as `mu_p{p}_n{n}.csv` in a directory.
#[derive(Debug, Clone, Default)]
pub struct SpectrumCache {
    dir: Option<PathBuf>,
}

impl SpectrumCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        SpectrumCache { dir }
    }

    /// Uses `BOXGAL_CACHE_DIR` when it is set and non-empty.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_ENV)
            .filter(|d| !d.is_empty())
            .map(PathBuf::from);
        SpectrumCache { dir }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn path_for(&self, p: u64, n: usize) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("mu_p{p}_n{n}.csv")))
    }

    pub fn moebius(&self, p: u64, n: usize) -> anyhow::Result<Spectrum> {
        let field = PrimeField::new(p)?;
        let Some(path) = self.path_for(p, n) else {
            return Ok(moebius_spectrum(field, n)?);
        };
        if path.exists() {
            let grid = Grid::single(field, n)?;
            let file = fs::File::open(&path)?;
            return read_spectrum_csv(file, &grid)
                .with_context(|| format!("corrupt spectrum cache {}", path.display()));
        }
        let spec = moebius_spectrum(field, n)?;
        fs::create_dir_all(path.parent().expect("cache path has a parent"))?;
        // Write to a sibling file first so concurrent readers never see a torn dump.
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        write_spectrum_csv(fs::File::create(&tmp)?, &spec)?;
        fs::rename(&tmp, &path)?;
        Ok(spec)
    }

    pub fn moebius_spectra(&self, primes: &[u64], n: usize) -> anyhow::Result<MoebiusSpectra> {
        let mut spectra = MoebiusSpectra::new(n);
        for &p in primes {
            spectra.insert(p, self.moebius(p, n)?)?;
        }
        Ok(spectra)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use boxgal_core::torus::PrimeSet;

    #[test]
    fn dump_round_trips_bit_exactly() {
        let spec = moebius_spectrum(PrimeField::new(3).unwrap(), 3).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &spec).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("p3,real,imag\n0:0:0,"));
        let back = read_spectrum_csv(buf.as_slice(), spec.grid()).unwrap();
        assert_eq!(back.values(), spec.values());
    }

    #[test]
    fn multi_prime_dump_has_a_column_per_prime() {
        let grid = Grid::new(PrimeSet::new(vec![2, 3]).unwrap(), 1).unwrap();
        let values = (0..grid.size()).map(|i| Complex64::new(i as f64, -0.5)).collect();
        let spec = Spectrum::new(grid.clone(), values).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &spec).unwrap();
        let back = read_spectrum_csv(buf.as_slice(), &grid).unwrap();
        assert_eq!(back.values(), spec.values());
        assert!(String::from_utf8(buf).unwrap().starts_with("p2,p3,real,imag\n"));
    }

    #[test]
    fn mismatched_dump_is_rejected() {
        let spec = moebius_spectrum(PrimeField::new(2).unwrap(), 2).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &spec).unwrap();
        let other = Grid::single(PrimeField::new(2).unwrap(), 3).unwrap();
        assert!(read_spectrum_csv(buf.as_slice(), &other).is_err());
        let swapped = String::from_utf8(buf).unwrap().replacen("0:0,", "1:0,", 1);
        let grid = Grid::single(PrimeField::new(2).unwrap(), 2).unwrap();
        assert!(read_spectrum_csv(swapped.as_bytes(), &grid).is_err());
    }
}
