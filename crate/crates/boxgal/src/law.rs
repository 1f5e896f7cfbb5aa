//! Text syntax for coefficient laws and prime lists.
//!
//! Laws are written `box:a=0,L=100`, `explicit:0:0.5,1:1/2` or `uniform`.
//! Probabilities accept integers, fractions `p/q` and finite decimals, all
//! read exactly. `uniform` stands for the box `[1, M]` where `M` is the
//! product of the primes in play, so its pushforward is the uniform measure.

use std::fmt;
use std::str::FromStr;

use boxgal_core::measures::{CoeffLaw, PolyLaw};
use boxgal_core::torus::PrimeSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LawError {
    #[error("unrecognised law `{0}`; expected `box:a=<int>,L=<int>`, `explicit:<v>:<p>,...` or `uniform`")]
    Syntax(String),
    #[error("bad number `{0}`")]
    Number(String),
    #[error("`uniform` needs a prime context whose product fits in 64 bits")]
    NoContext,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LawSpec {
    Uniform,
    Box { a: i64, len: u64 },
    Explicit(Vec<(i64, BigRational)>),
}

impl LawSpec {
    /// Resolves the spec against the primes in play (only `uniform` needs them).
    pub fn coeff_law(&self, context: Option<&PrimeSet>) -> Result<CoeffLaw, LawError> {
        let law = match self {
            LawSpec::Uniform => {
                let len = context.and_then(PrimeSet::product).ok_or(LawError::NoContext)?;
                CoeffLaw::uniform_box(0, len)
            }
            LawSpec::Box { a, len } => CoeffLaw::uniform_box(*a, *len),
            LawSpec::Explicit(masses) => CoeffLaw::explicit(masses.iter().cloned()),
        };
        law.map_err(|e| LawError::Invalid(e.to_string()))
    }

    pub fn poly_law(&self, n: usize, context: Option<&PrimeSet>) -> Result<PolyLaw, LawError> {
        Ok(PolyLaw::iid(self.coeff_law(context)?, n))
    }
}

impl FromStr for LawSpec {
    type Err = LawError;

    fn from_str(s: &str) -> Result<Self, LawError> {
        let s = s.trim();
        if s == "uniform" {
            return Ok(LawSpec::Uniform);
        }
        let syntax = || LawError::Syntax(s.to_string());
        let (kind, body) = s.split_once(':').ok_or_else(syntax)?;
        match kind {
            "box" => {
                let mut a = None;
                let mut len = None;
                for part in body.split(',') {
                    let (k, v) = part.split_once('=').ok_or_else(syntax)?;
                    match k.trim() {
                        "a" => a = Some(parse_int(v)?),
                        "L" => len = Some(parse_u64(v)?),
                        _ => return Err(syntax()),
                    }
                }
                Ok(LawSpec::Box {
                    a: a.unwrap_or(0),
                    len: len.ok_or_else(syntax)?,
                })
            }
            "explicit" => {
                let mut masses = Vec::new();
                for part in body.split(',') {
                    let (v, p) = part.rsplit_once(':').ok_or_else(syntax)?;
                    masses.push((parse_int(v)?, parse_rational(p)?));
                }
                Ok(LawSpec::Explicit(masses))
            }
            _ => Err(syntax()),
        }
    }
}

impl fmt::Display for LawSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawSpec::Uniform => f.write_str("uniform"),
            LawSpec::Box { a, len } => write!(f, "box:a={a},L={len}"),
            LawSpec::Explicit(masses) => {
                f.write_str("explicit:")?;
                for (i, (v, p)) in masses.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}:{p}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_int(s: &str) -> Result<i64, LawError> {
    s.trim().parse().map_err(|_| LawError::Number(s.to_string()))
}

/// Accepts plain integers and scientific shorthand such as `1e6`.
pub fn parse_u64(s: &str) -> Result<u64, LawError> {
    let s = s.trim();
    if let Ok(v) = s.parse() {
        return Ok(v);
    }
    let r = parse_rational(s)?;
    if r.is_integer() && !r.is_negative() {
        u64::try_from(r.to_integer()).map_err(|_| LawError::Number(s.to_string()))
    } else {
        Err(LawError::Number(s.to_string()))
    }
}

/// Exact value of `p/q`, a finite decimal, or a decimal with an exponent.
pub fn parse_rational(s: &str) -> Result<BigRational, LawError> {
    let s = s.trim();
    let bad = || LawError::Number(s.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(all);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// A comma-separated list of primes such as `2,3,5`.
pub fn parse_primes(s: &str) -> anyhow::Result<PrimeSet> {
    let primes = parse_u64_list(s)?;
    Ok(PrimeSet::new(primes)?)
}

pub fn parse_u64_list(s: &str) -> anyhow::Result<Vec<u64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_u64(t).map_err(anyhow::Error::from))
        .collect()
}

pub fn parse_f64_list(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| anyhow::anyhow!("bad number `{t}`"))
        })
        .collect()
}

/// Exact rendering used in reports: `p/q`, or `p` for integers.
pub fn rational_text(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn parses_box_and_explicit() {
        assert_eq!("box:a=0,L=100".parse(), Ok(LawSpec::Box { a: 0, len: 100 }));
        assert_eq!("box:L=7,a=-3".parse(), Ok(LawSpec::Box { a: -3, len: 7 }));
        assert_eq!(
            "explicit:0:0.5,1:0.5".parse(),
            Ok(LawSpec::Explicit(vec![(0, q(1, 2)), (1, q(1, 2))]))
        );
        assert_eq!(
            "explicit:-1:1/3,2:2/3".parse(),
            Ok(LawSpec::Explicit(vec![(-1, q(1, 3)), (2, q(2, 3))]))
        );
        assert!("box:a=0".parse::<LawSpec>().is_err());
        assert!("gauss:1".parse::<LawSpec>().is_err());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("-2.50").unwrap(), q(-5, 2));
        assert_eq!(parse_rational("1e9").unwrap(), q(1_000_000_000, 1));
        assert_eq!(parse_rational("2.5e-1").unwrap(), q(1, 4));
        assert_eq!(parse_rational(".25").unwrap(), q(1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(parse_u64("1e6").unwrap(), 1_000_000);
        assert!(parse_u64("1.5").is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["uniform", "box:a=-3,L=10", "explicit:0:1/2,1:1/2", "explicit:5:1"] {
            let spec: LawSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            assert_eq!(spec.to_string().parse::<LawSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn uniform_resolves_against_primes() {
        let primes = PrimeSet::new(vec![2, 3]).unwrap();
        let law = LawSpec::Uniform.coeff_law(Some(&primes)).unwrap();
        assert_eq!(law, CoeffLaw::uniform_box(0, 6).unwrap());
        assert_eq!(LawSpec::Uniform.coeff_law(None), Err(LawError::NoContext));
        let bad: LawSpec = "explicit:0:0.5".parse().unwrap();
        assert!(matches!(bad.coeff_law(None), Err(LawError::Invalid(_))));
    }
}
