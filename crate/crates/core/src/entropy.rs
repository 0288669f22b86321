//! Entropy of degree α, the coupling `λ = 2^{1−α} − 1`, and the sum-form
//! reading of `h`-solutions as entropies.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::maps::IntervalFunction;
use crate::scalar::{Backend, Rational, Scalar};
use crate::simplex::Distribution;

/// Degree of the entropy; never 1.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value == 1.0 {
            return Err(Error::AlphaIsOne);
        }
        if !value.is_finite() {
            return Err(Error::Parse(format!("alpha must be finite, got {value}")));
        }
        Ok(Alpha(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// The integer value, when α is one.
    pub fn as_integer(&self) -> Option<i64> {
        (self.0.fract() == 0.0 && self.0.abs() < 1e15).then_some(self.0 as i64)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_integer() {
            Some(k) => write!(f, "{k}"),
            None => write!(f, "{:?}", self.0),
        }
    }
}

fn dyadic(exp: i64) -> Rational {
    let two = BigInt::from(2);
    if exp >= 0 {
        Rational::from_integer(two.pow(exp as u32))
    } else {
        Rational::new(BigInt::one(), two.pow((-exp) as u32))
    }
}

/// `2^{1−α} − 1`; exact (dyadic) for integer α.
pub fn lambda_of_alpha(alpha: Alpha) -> Scalar {
    match alpha.as_integer() {
        Some(k) => Scalar::from_rational(dyadic(1 - k) - Rational::one()),
        None => Scalar::float(2f64.powf(1.0 - alpha.0) - 1.0),
    }
}

/// `p^α` with `0^α := 0`, exact for exact `p` and integer α.
fn power_term(p: &Scalar, alpha: Alpha) -> Result<Scalar> {
    if p.is_zero() {
        return Ok(Scalar::zero().to_backend(p.backend())?);
    }
    match (p, alpha.as_integer()) {
        (Scalar::Exact(_), Some(k)) if k >= 0 => Ok(p.powi(k as u32)),
        (Scalar::Exact(_), Some(k)) => Scalar::one().div(&p.powi((-k) as u32)),
        _ => Ok(Scalar::float(p.to_f64().powf(alpha.0))),
    }
}

/// `(1 − 2^{1−α})^{−1} (1 − Σ p_i^α)` with `0^α := 0`.
///
/// Exact for an exact distribution and integer α; floating point otherwise.
pub fn entropy_alpha(p: &Distribution, alpha: Alpha) -> Result<Scalar> {
    let exact = p.backend() == Backend::Exact && alpha.as_integer().is_some();
    let terms = p
        .components()
        .iter()
        .map(|x| {
            let t = power_term(x, alpha)?;
            Ok(if exact { t } else { t.to_float() })
        })
        .collect::<Result<Vec<_>>>()?;
    let total = Scalar::sum(&terms)?;
    let one = if exact { Scalar::one() } else { Scalar::float(1.0) };
    // 1 − 2^{1−α} = −λ
    let denom = lambda_of_alpha(alpha).neg();
    let denom = if exact { denom } else { denom.to_float() };
    one.sub(&total)?.div(&denom)
}

/// `Σ h(p_i)`.
pub fn entropy_from_solution(p: &Distribution, h: &IntervalFunction) -> Result<Scalar> {
    let vals = p.components().iter().map(|x| h.eval(x)).collect::<Result<Vec<_>>>()?;
    Scalar::sum(&vals)
}

/// Shannon entropy in bits with `0 · log 0 := 0`.
pub fn shannon_bits(p: &Distribution) -> f64 {
    p.components()
        .iter()
        .map(|x| x.to_f64())
        .filter(|x| *x > 0.0)
        .map(|x| -x * x.log2())
        .sum()
}
