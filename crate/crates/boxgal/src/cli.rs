//! Command-line front end: argument definitions, config merging and the
//! per-subcommand drivers.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use boxgal_core::bounds::{
    convergent_product, dyadic_product_bound, mertens_sum, pnt_report, SieveTable,
};
use boxgal_core::discprob::{
    choose_prime_window, decomposition_check, default_filter_primes, prob_disc_square_fq,
    prop33_check, theorem2_rhs, DiscMc,
};
use boxgal_core::ffpoly::{self, FFPoly, PrimeField};
use boxgal_core::fourier::{
    full_spectrum, full_spectrum_naive, invert, moebius_spectrum_report_from, parseval,
    verify_orthogonality, Grid, GridFunction,
};
use boxgal_core::galois_mc::GaloisMc;
use boxgal_core::measures::{check_h_condition, l1_bound, l_gamma_norm, HViolation, ProductMeasure};
use boxgal_core::moebius_stats::{
    expected_eta_direct, expected_eta_divisorsum, expected_moebius_direct,
    expected_moebius_fourier, holder_bound, SubsetSelector,
};
use boxgal_core::torus::PrimeSet;
use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cache::{spectrum_table, SpectrumCache};
use crate::config::RunConfig;
use crate::law::{parse_f64_list, parse_u64_list, rational_text, LawSpec};
use crate::parallel;
use crate::report::{num, Format, Report, Table};

/// Global options that take a value, used to locate the subcommand token.
const VALUED_GLOBALS: &[&str] = &["seed", "format", "out", "threads", "config", "save-config"];

#[derive(Debug, Parser)]
#[command(
    name = "boxgal",
    version,
    about = "Finite-field harmonic analysis and square-discriminant experiments for random integer polynomials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed from which all randomness is derived.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output format: text, json or csv.
    #[arg(long, global = true, default_value = "text")]
    pub format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for Monte Carlo subcommands (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Read defaults from a key=value file; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the effective configuration of this run to a key=value file.
    #[arg(long, global = true)]
    pub save_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FfOp {
    Mu,
    Factor,
    Disc,
    Squarefree,
    Res,
    Gcd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundsKind {
    Mertens,
    Dyadic,
    Convergent,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Polynomial arithmetic over F_p (ffpoly::moebius, factor, discriminant,
    /// is_squarefree, resultant, gcd).
    Ff {
        #[arg(value_enum)]
        op: FfOp,
        #[arg(long)]
        p: u64,
        /// Polynomial in T, e.g. "T^3+2*T+1".
        #[arg(long)]
        poly: String,
        /// Second operand for `res` and `gcd`.
        #[arg(long)]
        poly2: Option<String>,
    },
    /// Orthogonality, inversion, Parseval and fast-versus-naive spectra on
    /// random functions (fourier::verify_orthogonality, invert, parseval,
    /// full_spectrum).
    FourierCheck {
        #[arg(long)]
        primes: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Möbius spectrum on M_{p,n} (fourier::moebius_spectrum). CSV output is
    /// the spectrum dump; `--table` reports the exponent for degrees 1..=n.
    MuSpectrum {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true", action = clap::ArgAction::Set)]
        table: bool,
    },
    /// L^gamma norm of the pushforward transform, its L^1 bound and the
    /// residue condition (measures::l_gamma_norm, l1_bound, check_h_condition).
    MeasureNorms {
        #[arg(long)]
        primes: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        law: LawSpec,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Residue bound h as "p:h,..." pairs.
        #[arg(long)]
        h: Option<String>,
    },
    /// E(mu_Q) by direct summation and through the Fourier expansion, with
    /// the Hölder bound (moebius_stats::expected_moebius_direct,
    /// expected_moebius_fourier, holder_bound).
    ExpectMu {
        #[arg(long)]
        primes: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        law: LawSpec,
        /// Subset Q of the primes (default: all of them).
        #[arg(long)]
        subset: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.05)]
        eps0: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// E(eta_Q) by direct summation and by the divisor sum
    /// (moebius_stats::expected_eta_direct, expected_eta_divisorsum).
    ExpectEta {
        #[arg(long)]
        primes: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        law: LawSpec,
        #[arg(long)]
        subset: Option<String>,
    },
    /// Exact probability that disc f mod p is a square, with its
    /// decomposition (discprob::prob_disc_square_fq, decomposition_check,
    /// prop33_check).
    DiscFq {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "uniform")]
        law: LawSpec,
        /// Evaluate the deviation bound with this omega_q.
        #[arg(long)]
        omega_q: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.1)]
        c: f64,
    },
    /// Monte Carlo estimate of P(disc f is a square) over integer polynomials
    /// (discprob::mc_disc_square, theorem2_rhs).
    DiscMc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        law: LawSpec,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Primes used to pre-screen non-squares (default: a fixed list).
        #[arg(long)]
        filter_primes: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Confirm every pre-screen rejection exactly.
        #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true", action = clap::ArgAction::Set)]
        verify_rejections: bool,
    },
    /// Monte Carlo rates of certified S_n, square discriminant, reducible and
    /// unknown (galois_mc::estimate_prob_sn, gallagher_rhs).
    GaloisMc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        law: LawSpec,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 50)]
        budget: usize,
    },
    /// Prime-counting, Mertens and product bounds as CSV rows
    /// (bounds::mertens_sum, pnt_report, dyadic_product_bound,
    /// convergent_product).
    Bounds {
        #[arg(long, value_enum, default_value_t = BoundsKind::Mertens)]
        kind: BoundsKind,
        /// Points x for the Mertens/PNT rows.
        #[arg(long, default_value = "100,1000,10000,100000,1000000")]
        x: String,
        /// Window starts z for the product bounds.
        #[arg(long, default_value = "10,100,1000,10000")]
        z: String,
        /// omega(p) for the dyadic bound: "p", "p/<k>" or a constant.
        #[arg(long, default_value = "p")]
        omega: String,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
    /// Prime window ((1-delta)/2 log L, (1-delta) log L] (discprob::choose_prime_window).
    Window {
        #[arg(long = "L")]
        len: f64,
        #[arg(long)]
        delta: f64,
    },
}

/// An error in how the program was invoked, reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Outcome of a driver: the report and whether its self-checks passed.
pub struct Outcome {
    pub report: Report,
    pub ok: bool,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, ok: true }
    }
}

/// Runs the program on `argv` (including the program name) and returns the
/// process exit code.
pub fn dispatch(argv: Vec<String>) -> i32 {
    match try_dispatch(argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn try_dispatch(mut argv: Vec<String>) -> anyhow::Result<i32> {
    if let Some(path) = config_path(&argv) {
        let text = fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {path}: {e}")))?;
        let cfg = RunConfig::parse(&text).map_err(|e| usage(e.to_string()))?;
        let cmd = Cli::command();
        let names: Vec<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
        argv = cfg.merge_into(&argv, VALUED_GLOBALS, &names);
    }
    let matches = match Cli::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return Ok(code);
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| usage(e.to_string()))?;
    if let Some(path) = &cli.save_config {
        let cfg = run_config(&cli, &matches);
        let text = cfg.to_text().map_err(|e| usage(e.to_string()))?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    let start = Instant::now();
    let mut outcome = run(&cli)?;
    outcome.report.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    match &cli.out {
        Some(path) => {
            let mut buf = Vec::new();
            outcome.report.render(cli.format, &mut buf)?;
            fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            outcome.report.render(cli.format, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(if outcome.ok { 0 } else { 1 })
}

/// The effective configuration: every subcommand flag with its value,
/// including defaults, so the file reproduces the run on its own.
pub fn run_config(cli: &Cli, matches: &ArgMatches) -> RunConfig {
    let mut cfg = RunConfig {
        subcommand: None,
        seed: cli.seed,
        format: cli.format,
        out: cli.out.as_ref().map(|p| p.display().to_string()),
        flags: BTreeMap::new(),
    };
    if let Some(t) = cli.threads {
        cfg.flags.insert("threads".into(), t.to_string());
    }
    let cmd = Cli::command();
    if let Some((name, sub)) = matches.subcommand() {
        cfg.subcommand = Some(name.to_string());
        let sub_cmd = cmd.find_subcommand(name).expect("parsed subcommand exists");
        for arg in sub_cmd.get_arguments() {
            let id = arg.get_id().as_str();
            if arg.is_global_set() || VALUED_GLOBALS.contains(&id.replace('_', "-").as_str()) {
                continue;
            }
            let key = arg.get_long().map(str::to_string).unwrap_or_else(|| id.to_string());
            if let Ok(Some(mut raw)) = sub.try_get_raw(id) {
                if let Some(v) = raw.next() {
                    cfg.flags.insert(key, v.to_string_lossy().into_owned());
                }
            }
        }
    }
    cfg
}

pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let seed = cli.seed;
    match &cli.command {
        Command::Ff { op, p, poly, poly2 } => ff(*op, *p, poly, poly2.as_deref()).map(Into::into),
        Command::FourierCheck { primes, n, trials, tol } => fourier_check(primes, *n, *trials, *tol, seed),
        Command::MuSpectrum { p, n, eps, table } => {
            mu_spectrum(*p, *n, *eps, *table, cli.format == Format::Csv).map(Into::into)
        }
        Command::MeasureNorms { primes, n, law, gamma, h } => {
            measure_norms(primes, *n, law, *gamma, h.as_deref()).map(Into::into)
        }
        Command::ExpectMu { primes, n, law, subset, gamma, eps0, alpha } => {
            expect_mu(primes, *n, law, subset.as_deref(), *gamma, *eps0, *alpha)
        }
        Command::ExpectEta { primes, n, law, subset } => expect_eta(primes, *n, law, subset.as_deref()),
        Command::DiscFq { p, n, law, omega_q, gamma, alpha, c } => {
            disc_fq(*p, *n, law, *omega_q, *gamma, *alpha, *c).map(Into::into)
        }
        Command::DiscMc { n, law, samples, filter_primes, delta, eps, verify_rejections } => disc_mc(
            *n,
            law,
            *samples,
            filter_primes.as_deref(),
            *delta,
            *eps,
            *verify_rejections,
            seed,
            cli.threads,
        )
        .map(Into::into),
        Command::GaloisMc { n, law, samples, budget } => {
            galois_mc(*n, law, *samples, *budget, seed, cli.threads).map(Into::into)
        }
        Command::Bounds { kind, x, z, omega, c, alpha } => bounds(*kind, x, z, omega, *c, *alpha).map(Into::into),
        Command::Window { len, delta } => window(*len, *delta).map(Into::into),
    }
}

fn primes_arg(s: &str) -> anyhow::Result<PrimeSet> {
    let list = parse_u64_list(s).map_err(|e| usage(format!("--primes: {e}")))?;
    PrimeSet::new(list).map_err(|e| usage(format!("--primes: {e}")))
}

fn law_for(spec: &LawSpec, n: usize, context: Option<&PrimeSet>) -> anyhow::Result<boxgal_core::measures::PolyLaw> {
    spec.poly_law(n, context).map_err(|e| usage(format!("--law: {e}")))
}

fn subset_arg(ambient: &PrimeSet, subset: Option<&str>) -> anyhow::Result<SubsetSelector> {
    match subset {
        None => Ok(SubsetSelector::full(ambient)),
        Some(s) => {
            let list = parse_u64_list(s).map_err(|e| usage(format!("--subset: {e}")))?;
            SubsetSelector::new(ambient, &list).map_err(|e| usage(format!("--subset: {e}")))
        }
    }
}

fn exact(r: &BigRational) -> Value {
    json!({ "exact": rational_text(r), "value": num(r.to_f64().unwrap_or(f64::NAN)) })
}

fn format_factorization(f: &ffpoly::Factorization) -> String {
    let mut parts = Vec::new();
    if f.unit != 1 || f.factors.is_empty() {
        parts.push(f.unit.to_string());
    }
    for (g, m) in &f.factors {
        parts.push(if *m == 1 { format!("({g})") } else { format!("({g})^{m}") });
    }
    parts.join("*")
}

fn ff(op: FfOp, p: u64, poly: &str, poly2: Option<&str>) -> anyhow::Result<Report> {
    let field = PrimeField::new(p)?;
    let f = FFPoly::parse(field, poly).map_err(|e| usage(format!("--poly: {e}")))?;
    let second = || -> anyhow::Result<FFPoly> {
        let text = poly2.ok_or_else(|| usage("this operation needs --poly2"))?;
        FFPoly::parse(field, text).map_err(|e| usage(format!("--poly2: {e}")))
    };
    let result = match op {
        FfOp::Mu => ffpoly::moebius(&f)?.to_string(),
        FfOp::Factor => format_factorization(&ffpoly::factor(&f)?),
        FfOp::Disc => ffpoly::discriminant(&f)?.to_string(),
        FfOp::Squarefree => ffpoly::is_squarefree(&f)?.to_string(),
        FfOp::Res => ffpoly::resultant(&f, &second()?)?.to_string(),
        FfOp::Gcd => f.gcd(&second()?)?.to_string(),
    };
    let mut r = Report::new("ff");
    r.param("op", FfOp::to_possible_value(&op).expect("no skipped variants").get_name())
        .param("p", p)
        .param("poly", f.to_string());
    if let Some(g) = poly2 {
        r.param("poly2", g);
    }
    r.field("result", result.clone()).line(result);
    Ok(r)
}

fn random_function(grid: &Grid, rng: &mut ChaCha8Rng, complex: bool) -> anyhow::Result<GridFunction> {
    let values = (0..grid.size())
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
            Complex64::new(re, im)
        })
        .collect();
    Ok(GridFunction::new(grid.clone(), values)?)
}

const EXHAUSTIVE_ORTHOGONALITY: usize = 256;
const NAIVE_SPECTRUM_LIMIT: usize = 4096;

fn fourier_check(primes: &str, n: usize, trials: usize, tol: f64, seed: u64) -> anyhow::Result<Outcome> {
    let primes = primes_arg(primes)?;
    let grid = Grid::new(primes.clone(), n)?;
    let size = grid.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let targets: Vec<usize> = if size <= EXHAUSTIVE_ORTHOGONALITY {
        (0..size).collect()
    } else {
        std::iter::once(grid.origin())
            .chain((0..trials).map(|_| rng.gen_range(0..size)))
            .collect()
    };
    let mut orth = 0.0f64;
    for &idx in &targets {
        let s = verify_orthogonality(&primes, n, &grid.tuple(idx))?;
        let expect = if idx == grid.origin() { size as f64 } else { 0.0 };
        orth = orth.max((s - Complex64::new(expect, 0.0)).norm());
    }

    let mut inversion = 0.0f64;
    let mut pars = 0.0f64;
    let mut naive: Option<f64> = None;
    for _ in 0..trials {
        let eta = random_function(&grid, &mut rng, true)?;
        inversion = inversion.max(invert(&full_spectrum(&eta)).max_abs_diff(&eta));
        let a = random_function(&grid, &mut rng, false)?;
        let b = random_function(&grid, &mut rng, false)?;
        let sides = parseval(&a, &b)?;
        pars = pars.max((sides.rhs - Complex64::new(sides.lhs, 0.0)).norm());
        if size <= NAIVE_SPECTRUM_LIMIT {
            let fast = full_spectrum(&eta);
            let slow = full_spectrum_naive(&eta)?;
            let d = boxgal_core::fourier::max_abs_diff(fast.values(), slow.values());
            naive = Some(naive.unwrap_or(0.0).max(d));
        }
    }
    let ok = orth <= tol && inversion <= tol && pars <= tol && naive.is_none_or(|d| d <= tol);

    let mut r = Report::new("fourier-check");
    r.param("primes", primes.primes().to_vec())
        .param("n", n)
        .param("trials", trials)
        .param("tol", tol)
        .param("seed", seed);
    r.field("grid_size", size)
        .field("orthogonality_points", targets.len())
        .field("orthogonality_max_error", orth)
        .field("inversion_max_error", inversion)
        .field("parseval_max_error", pars)
        .field("naive_max_error", naive.map(num).unwrap_or(Value::Null))
        .field("passed", ok);
    r.line(format!("grid size            {size}"))
        .line(format!("orthogonality error  {orth:.3e} over {} frequencies", targets.len()))
        .line(format!("inversion error      {inversion:.3e}"))
        .line(format!("parseval error       {pars:.3e}"))
        .line(match naive {
            Some(d) => format!("fast vs naive error  {d:.3e}"),
            None => "fast vs naive error  skipped (grid too large)".to_string(),
        })
        .line(if ok { "PASS" } else { "FAIL" });
    Ok(Outcome { report: r, ok })
}

fn mu_spectrum(p: u64, n: usize, eps: f64, table: bool, dump: bool) -> anyhow::Result<Report> {
    let field = PrimeField::new(p)?;
    let cache = SpectrumCache::from_env();
    let mut r = Report::new("mu-spectrum");
    r.param("p", p).param("n", n).param("eps", eps);
    if table {
        let mut t = Table::new(&["p", "n", "max_abs", "exponent", "bound", "holds"]);
        r.line("p  n  max|mu^|        exponent  bound");
        for m in 1..=n {
            let spec = cache.moebius(p, m)?;
            let rep = moebius_spectrum_report_from(&spec, field, m, eps)?;
            t.push(vec![
                p.to_string(),
                m.to_string(),
                format!("{:?}", rep.max_abs),
                format!("{:?}", rep.exponent),
                format!("{:?}", rep.bound),
                rep.holds.to_string(),
            ]);
            r.line(format!("{p:<2} {m:<2} {:<15.6} {:<9.4} {:.6e}", rep.max_abs, rep.exponent, rep.bound));
        }
        r.table = Some(t);
        return Ok(r);
    }
    let spec = cache.moebius(p, n)?;
    let rep = moebius_spectrum_report_from(&spec, field, n, eps)?;
    r.field("max_abs", num(rep.max_abs))
        .field("exponent", num(rep.exponent))
        .field("bound", num(rep.bound))
        .field("holds", rep.holds);
    r.line(format!("max |mu^| = {}", rep.max_abs))
        .line(format!("exponent  = {:.6}", rep.exponent))
        .line(format!("bound     = {:.6e}", rep.bound));
    if dump {
        r.table = Some(spectrum_table(&spec));
    }
    Ok(r)
}

fn parse_h(s: &str) -> anyhow::Result<BTreeMap<u64, f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|pair| {
            let (p, h) = pair
                .split_once(':')
                .ok_or_else(|| usage(format!("--h: expected p:h, got `{pair}`")))?;
            let p = p.trim().parse().map_err(|_| usage(format!("--h: bad prime `{p}`")))?;
            let h = h.trim().parse().map_err(|_| usage(format!("--h: bad value `{h}`")))?;
            Ok((p, h))
        })
        .collect()
}

fn measure_norms(primes: &str, n: usize, spec: &LawSpec, gamma: f64, h: Option<&str>) -> anyhow::Result<Report> {
    let primes = primes_arg(primes)?;
    let law = law_for(spec, n, Some(&primes))?;
    let m = ProductMeasure::pushforward(&law, &primes)?;
    let norm = l_gamma_norm(&m, gamma)?;
    let mut r = Report::new("measure-norms");
    r.param("primes", primes.primes().to_vec())
        .param("n", n)
        .param("law", spec.to_string())
        .param("gamma", gamma);
    r.field("l_gamma_norm", num(norm));
    r.line(format!("L^{gamma} norm = {norm}"));
    if let Some((_, len)) = law.common_box() {
        let bound = l1_bound(&primes, len, n)?;
        let modulus = m.modulus() as f64;
        r.field("l1_bound", num(bound))
            .field("l1_bound_applies", len as f64 >= modulus * (modulus - 1.0));
        r.line(format!("L^1 bound     = {bound}"));
    }
    if let Some(h) = h {
        let table = parse_h(h)?;
        for &p in primes.primes() {
            if !table.contains_key(&p) {
                return Err(usage(format!("--h has no value for p = {p}")));
            }
        }
        match check_h_condition(&law, &primes, |p| table[&p]) {
            Ok(w) => {
                let omega: BTreeMap<String, Value> = w.omega.iter().map(|(p, o)| (p.to_string(), num(*o))).collect();
                r.field("h_condition", true).field("omega", json!(omega));
                r.line(format!("h condition holds; omega = {:?}", w.omega));
            }
            Err(v) => {
                let why = match v {
                    HViolation::BadH { p, h } => format!("h({p}) = {h} needs h > 0 and h^2 > p"),
                    HViolation::Exceeded { d, u, k, prob, limit } => {
                        format!("P(zeta_{k} = {u} mod {d}) = {prob} exceeds {limit}")
                    }
                    HViolation::Unsupported(e) => e.to_string(),
                };
                r.field("h_condition", false).field("h_violation", why.clone());
                r.line(format!("h condition fails: {why}"));
            }
        }
    }
    Ok(r)
}

fn expect_mu(
    primes: &str,
    n: usize,
    spec: &LawSpec,
    subset: Option<&str>,
    gamma: f64,
    eps0: f64,
    alpha: f64,
) -> anyhow::Result<Outcome> {
    let primes = primes_arg(primes)?;
    let q = subset_arg(&primes, subset)?;
    let law = law_for(spec, n, Some(&primes))?;
    let m = ProductMeasure::pushforward(&law, &primes)?;
    let direct = expected_moebius_direct(&m, &q)?;
    let spectra = SpectrumCache::from_env().moebius_spectra(&q.primes(), n)?;
    let fourier = expected_moebius_fourier(&m, &q, &spectra)?;
    let direct_f = direct.to_f64().unwrap_or(f64::NAN);
    let gap = (fourier - direct_f).abs();

    let mut r = Report::new("expect-mu");
    r.param("primes", primes.primes().to_vec())
        .param("subset", q.primes())
        .param("n", n)
        .param("law", spec.to_string())
        .param("gamma", gamma)
        .param("eps0", eps0)
        .param("alpha", alpha);
    r.field("direct", exact(&direct))
        .field("fourier", num(fourier))
        .field("route_gap", num(gap));
    r.line(format!("direct  = {} ({direct_f})", rational_text(&direct)))
        .line(format!("fourier = {fourier}"));
    let mut ok = gap <= 1e-9;
    if !q.is_empty() {
        let h = holder_bound(&m, &q, &spectra, gamma, eps0, alpha)?;
        r.field(
            "holder",
            json!({
                "delta_conjugate": num(h.delta_conjugate),
                "u": num(h.u),
                "raw_bound": num(h.raw_bound),
                "restricted_norm": num(h.restricted_norm),
                "simplified_bound": num(h.simplified_bound),
                "raw_holds": h.raw_holds,
                "norm_condition_holds": h.norm_condition_holds,
                "spectral_bound_holds": h.spectral_bound_holds,
                "simplified_applies": h.simplified_applies,
                "simplified_holds": h.simplified_holds,
            }),
        );
        r.line(format!("holder  = {} (raw bound, holds: {})", h.raw_bound, h.raw_holds));
        ok &= h.raw_holds;
    }
    Ok(Outcome { report: r, ok })
}

fn expect_eta(primes: &str, n: usize, spec: &LawSpec, subset: Option<&str>) -> anyhow::Result<Outcome> {
    let primes = primes_arg(primes)?;
    let q = subset_arg(&primes, subset)?;
    let law = law_for(spec, n, Some(&primes))?;
    let m = ProductMeasure::pushforward(&law, &primes)?;
    let direct = expected_eta_direct(&m, &q)?;
    let divisor = expected_eta_divisorsum(&m, &q)?;
    let ok = direct == divisor;
    let mut r = Report::new("expect-eta");
    r.param("primes", primes.primes().to_vec())
        .param("subset", q.primes())
        .param("n", n)
        .param("law", spec.to_string());
    r.field("direct", exact(&direct))
        .field("divisor_sum", exact(&divisor))
        .field("agree", ok);
    r.line(format!("direct      = {}", rational_text(&direct)))
        .line(format!("divisor sum = {}", rational_text(&divisor)));
    Ok(Outcome { report: r, ok })
}

fn disc_fq(
    p: u64,
    n: usize,
    spec: &LawSpec,
    omega_q: Option<f64>,
    gamma: f64,
    alpha: f64,
    c: f64,
) -> anyhow::Result<Report> {
    let primes = PrimeSet::single(p)?;
    let law = law_for(spec, n, Some(&primes))?;
    let m = ProductMeasure::pushforward(&law, &primes)?;
    let prob = prob_disc_square_fq(&m)?;
    let d = decomposition_check(&m)?;
    let mut r = Report::new("disc-fq");
    r.param("p", p).param("n", n).param("law", spec.to_string());
    r.field("probability", exact(&prob)).field(
        "decomposition",
        json!({
            "lhs": rational_text(&d.lhs),
            "rhs": rational_text(&d.rhs),
            "e_mu": rational_text(&d.e_mu),
            "e_nonsquarefree": rational_text(&d.e_nonsquarefree),
            "holds": d.holds(),
        }),
    );
    r.line(rational_text(&prob));
    if let Some(w) = omega_q {
        let b = prop33_check(&m, gamma, alpha, c, w)?;
        r.param("gamma", gamma).param("alpha", alpha).param("c", c).param("omega_q", w);
        r.field(
            "deviation_bound",
            json!({
                "deviation": num(b.deviation),
                "rhs": num(b.rhs),
                "fourier_norm": num(b.fourier_norm),
                "norm_condition": b.norm_condition,
                "divisor_sum": num(b.divisor_sum),
                "divisor_condition": b.divisor_condition,
                "applicable": b.applicable,
                "conclusion_holds": b.conclusion_holds,
            }),
        );
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn disc_mc(
    n: usize,
    spec: &LawSpec,
    samples: u64,
    filter: Option<&str>,
    delta: f64,
    eps: f64,
    verify: bool,
    seed: u64,
    threads: Option<usize>,
) -> anyhow::Result<Report> {
    let law = law_for(spec, n, None)?;
    let filter = match filter {
        Some(s) => parse_u64_list(s).map_err(|e| usage(format!("--filter-primes: {e}")))?,
        None => default_filter_primes(n),
    };
    let mc = DiscMc::new(&law, &filter)?.verify_rejections(verify);
    let est = parallel::disc_mc(&mc, seed, samples, &parallel::pool(threads)?);
    let bound = law
        .common_box()
        .and_then(|(_, len)| theorem2_rhs(len as f64, n, delta, eps).ok());

    let mut r = Report::new("disc-mc");
    r.param("n", n)
        .param("law", spec.to_string())
        .param("samples", samples)
        .param("seed", seed)
        .param("filter_primes", est.filter_primes.clone())
        .param("delta", delta)
        .param("eps", eps)
        .param("verify_rejections", verify);
    r.field("estimate", num(est.estimate))
        .field("wilson95", json!([num(est.wilson95.0), num(est.wilson95.1)]))
        .field("zero_disc_rate", num(est.zero_disc_rate))
        .field("bound_theorem2", bound.map(num).unwrap_or(Value::Null))
        .field("hits", est.tally.hits)
        .field("zero_disc", est.tally.zero_disc)
        .field("exact_checks", est.tally.exact_checks);
    if verify {
        r.field("unsound_rejections", est.tally.unsound_rejections);
    }
    r.line(format!(
        "P(disc = square) ~ {} [{}, {}] from {} samples",
        est.estimate, est.wilson95.0, est.wilson95.1, est.tally.samples
    ))
    .line(format!("zero discriminant rate {}", est.zero_disc_rate));
    if let Some(b) = bound {
        r.line(format!("theorem bound {b}"));
    }
    Ok(r)
}

fn galois_mc(
    n: usize,
    spec: &LawSpec,
    samples: u64,
    budget: usize,
    seed: u64,
    threads: Option<usize>,
) -> anyhow::Result<Report> {
    let law = law_for(spec, n, None)?;
    let mc = GaloisMc::new(&law, budget)?;
    let g = parallel::galois_mc(&mc, seed, samples, &parallel::pool(threads)?)?;
    let mut r = Report::new("galois-mc");
    r.param("n", n)
        .param("law", spec.to_string())
        .param("samples", samples)
        .param("budget", budget)
        .param("seed", seed);
    r.field("certified_rate", num(g.certified_rate))
        .field(
            "certified_wilson95",
            json!([num(g.certified_wilson95.0), num(g.certified_wilson95.1)]),
        )
        .field("disc_square_rate", num(g.disc_square_rate))
        .field("reducible_rate", num(g.reducible_rate))
        .field("unknown_rate", num(g.unknown_rate))
        .field("gallagher_bound", g.gallagher_bound.map(num).unwrap_or(Value::Null))
        .field("in_uniform_regime", g.in_uniform_regime.map(Value::Bool).unwrap_or(Value::Null));
    r.line(format!("certified S_n  {}", g.certified_rate))
        .line(format!("disc square    {}", g.disc_square_rate))
        .line(format!("reducible      {}", g.reducible_rate))
        .line(format!("unknown        {}", g.unknown_rate));
    if let Some(b) = g.gallagher_bound {
        r.line(format!("large sieve    {b}"));
    }
    Ok(r)
}

fn omega_fn(s: &str) -> anyhow::Result<Box<dyn Fn(u64) -> f64>> {
    let s = s.trim();
    if s == "p" {
        return Ok(Box::new(|p| p as f64));
    }
    if let Some(k) = s.strip_prefix("p/") {
        let k: f64 = k.parse().map_err(|_| usage(format!("--omega: bad divisor `{k}`")))?;
        return Ok(Box::new(move |p| p as f64 / k));
    }
    let c: f64 = s.parse().map_err(|_| usage(format!("--omega: expected p, p/<k> or a number, got `{s}`")))?;
    Ok(Box::new(move |_| c))
}

fn g(x: f64) -> String {
    format!("{x:?}")
}

fn bounds(kind: BoundsKind, xs: &str, zs: &str, omega: &str, c: f64, alpha: f64) -> anyhow::Result<Report> {
    let mut r = Report::new("bounds");
    let name = BoundsKind::to_possible_value(&kind).expect("no skipped variants");
    r.param("kind", name.get_name());
    match kind {
        BoundsKind::Mertens => {
            let xs = parse_u64_list(xs).map_err(|e| usage(format!("--x: {e}")))?;
            let max = *xs.iter().max().ok_or_else(|| usage("--x is empty"))?;
            let sieve = SieveTable::new(max)?;
            r.param("x", xs.clone());
            let mut t = Table::new(&[
                "x",
                "pi",
                "theta",
                "mertens_sum",
                "main_term",
                "residual",
                "scaled_residual",
                "pi_relative_error",
                "theta_relative_error",
            ]);
            for x in xs {
                let m = mertens_sum(&sieve, x)?;
                let p = pnt_report(&sieve, x)?;
                t.push(vec![
                    x.to_string(),
                    p.pi.to_string(),
                    g(p.theta),
                    g(m.sum),
                    g(m.main_term),
                    g(m.residual),
                    g(m.scaled_residual),
                    g(p.pi_relative_error),
                    g(p.theta_relative_error),
                ]);
                r.line(format!(
                    "x={x:<9} pi={:<7} residual*log x={:+.5}",
                    p.pi, m.scaled_residual
                ));
            }
            r.table = Some(t);
        }
        BoundsKind::Dyadic => {
            let zs = parse_f64_list(zs).map_err(|e| usage(format!("--z: {e}")))?;
            let w = omega_fn(omega)?;
            let sieve = window_sieve(&zs)?;
            r.param("z", zs.clone()).param("omega", omega).param("c", c);
            let mut t = Table::new(&[
                "z",
                "primes",
                "product",
                "exp_omega_sum",
                "exp_bound",
                "hypothesis_holds",
                "holds",
            ]);
            for z in zs {
                let d = dyadic_product_bound(&sieve, z, &w, c)?;
                t.push(vec![
                    g(z),
                    d.primes.len().to_string(),
                    g(d.product),
                    g(d.exp_omega_sum),
                    g(d.exp_bound),
                    d.hypothesis_holds.to_string(),
                    d.holds.to_string(),
                ]);
                r.line(format!(
                    "z={z:<8} product={:.6} exp-sum={:.6} exp-bound={:.6} holds={}",
                    d.product, d.exp_omega_sum, d.exp_bound, d.holds
                ));
            }
            r.table = Some(t);
        }
        BoundsKind::Convergent => {
            let zs = parse_f64_list(zs).map_err(|e| usage(format!("--z: {e}")))?;
            let sieve = window_sieve(&zs)?;
            r.param("z", zs.clone()).param("alpha", alpha).param("c", c);
            let mut t = Table::new(&["z", "c_prime", "product", "exp_sum", "bound", "first_order", "holds"]);
            for z in zs {
                let d = convergent_product(&sieve, z, alpha, c)?;
                t.push(vec![
                    g(z),
                    g(d.c_prime),
                    g(d.product),
                    g(d.exp_sum),
                    g(d.bound),
                    g(d.first_order),
                    d.holds.to_string(),
                ]);
                r.line(format!(
                    "z={z:<8} product={:.8} bound={:.8} holds={}",
                    d.product, d.bound, d.holds
                ));
            }
            r.table = Some(t);
        }
    }
    Ok(r)
}

fn window_sieve(zs: &[f64]) -> anyhow::Result<SieveTable> {
    let max = zs.iter().cloned().fold(f64::NAN, f64::max);
    if !max.is_finite() {
        bail!("--z must list finite window starts");
    }
    Ok(SieveTable::new((2.0 * max.max(1.0)).floor() as u64)?)
}

fn window(len: f64, delta: f64) -> anyhow::Result<Report> {
    let w = choose_prime_window(len, delta)?;
    let l = len.ln();
    let mut r = Report::new("window");
    r.param("L", len).param("delta", delta);
    r.field("lo", num((1.0 - delta) / 2.0 * l))
        .field("hi", num((1.0 - delta) * l))
        .field("primes", w.primes().to_vec())
        .field("product", w.product_big().to_string());
    let list: Vec<String> = w.primes().iter().map(u64::to_string).collect();
    r.line(list.join(","));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> (Cli, ArgMatches) {
        let argv: Vec<String> = std::iter::once("boxgal").chain(args.iter().copied()).map(String::from).collect();
        let m = Cli::command().try_get_matches_from(&argv).unwrap();
        (Cli::from_arg_matches(&m).unwrap(), m)
    }

    fn text(args: &[&str]) -> String {
        let (cli, _) = parse(args);
        run(&cli).unwrap().report.text
    }

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn documented_examples() {
        assert_eq!(text(&["ff", "mu", "--p", "2", "--poly", "T^2+T"]), "1\n");
        assert_eq!(text(&["disc-fq", "--p", "3", "--n", "3", "--law", "uniform"]), "2/3\n");
        assert_eq!(text(&["window", "--L", "1e9", "--delta", "0.1"]), "11,13,17\n");
    }

    #[test]
    fn ff_operations() {
        assert_eq!(text(&["ff", "factor", "--p", "3", "--poly", "T^3+T^2+T+1"]), "(T+1)*(T^2+1)\n");
        assert_eq!(text(&["ff", "factor", "--p", "5", "--poly", "2*T^2+4*T+2"]), "2*(T+1)^2\n");
        assert_eq!(text(&["ff", "gcd", "--p", "3", "--poly", "T^2+2*T+1", "--poly2", "T+1"]), "T+1\n");
        assert_eq!(text(&["ff", "squarefree", "--p", "3", "--poly", "T^2+2*T+1"]), "false\n");
        let (cli, _) = parse(&["ff", "res", "--p", "3", "--poly", "T+1"]);
        let err = run(&cli).err().unwrap();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn run_config_captures_every_flag() {
        let (cli, m) = parse(&["disc-mc", "--n", "3", "--law", "box:a=0,L=50", "--seed", "9", "--threads", "2"]);
        let cfg = run_config(&cli, &m);
        assert_eq!(cfg.subcommand.as_deref(), Some("disc-mc"));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.flags["law"], "box:a=0,L=50");
        assert_eq!(cfg.flags["samples"], "100000");
        assert_eq!(cfg.flags["threads"], "2");
        assert_eq!(cfg.flags["verify-rejections"], "false");
        assert!(!cfg.flags.contains_key("config"));
    }
}
