//! Scalars: exact elements of the field Q(√2, √3) or 64-bit floats.
//!
//! An exact scalar is stored as four rational coordinates over the basis
//! `{1, √2, √3, √6}`. Because the basis is linearly independent over Q,
//! equality and zero tests are coordinate comparisons, and the sign of a
//! non-zero element is found by interval refinement of the square roots.
//!
//! Exact and float scalars never combine implicitly; arithmetic on a mixed
//! pair fails with [`Error::BackendMismatch`]. Code that deliberately lowers
//! an exact value calls [`Scalar::to_float`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Radicands of the non-unit basis elements, in coordinate order.
const RADICANDS: [u32; 3] = [2, 3, 6];
const BASIS_SUFFIX: [&str; 3] = ["r2", "r3", "r6"];

/// Which arithmetic a scalar lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Exact,
    Float,
}

/// `c0 + c1·√2 + c2·√3 + c3·√6` with rational coordinates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FieldElem {
    coords: [Rational; 4],
}

fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl FieldElem {
    pub fn new(coords: [Rational; 4]) -> Self {
        FieldElem { coords }
    }

    pub fn zero() -> Self {
        FieldElem::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        FieldElem::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        FieldElem {
            coords: [r, Rational::zero(), Rational::zero(), Rational::zero()],
        }
    }

    /// The basis element with index `k` (0 → 1, 1 → √2, 2 → √3, 3 → √6).
    pub fn basis(k: usize) -> Self {
        let mut coords = [
            Rational::zero(),
            Rational::zero(),
            Rational::zero(),
            Rational::zero(),
        ];
        coords[k] = Rational::one();
        FieldElem { coords }
    }

    pub fn coords(&self) -> &[Rational; 4] {
        &self.coords
    }

    pub fn coord(&self, k: usize) -> &Rational {
        &self.coords[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// True when the element lies in Q.
    pub fn is_rational(&self) -> bool {
        self.coords[1..].iter().all(Zero::is_zero)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        FieldElem {
            coords: [
                &self.coords[0] * r,
                &self.coords[1] * r,
                &self.coords[2] * r,
                &self.coords[3] * r,
            ],
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_rational() {
            return Ok(FieldElem::from_rational(self.coords[0].recip()));
        }
        // x = u + v√3 with u, v in Q(√2); x·(u − v√3) = u² − 3v² lies in Q(√2).
        let [c0, c1, c2, c3] = &self.coords;
        let two = rat(2);
        let three = rat(3);
        let n0 = c0 * c0 + &two * c1 * c1 - &three * (c2 * c2 + &two * c3 * c3);
        let n1 = &two * c0 * c1 - rat(6) * c2 * c3;
        let norm = &n0 * &n0 - &two * &n1 * &n1;
        let inv_n = FieldElem::new([
            &n0 / &norm,
            -(&n1 / &norm),
            Rational::zero(),
            Rational::zero(),
        ]);
        let conj = FieldElem::new([c0.clone(), c1.clone(), -c2.clone(), -c3.clone()]);
        Ok(&conj * &inv_n)
    }

    /// Rational enclosure `[lo, hi]` of the real value, using square-root
    /// bounds accurate to `bits` binary digits.
    fn enclose(&self, bits: u64) -> (Rational, Rational) {
        let mut lo = self.coords[0].clone();
        let mut hi = self.coords[0].clone();
        for (k, radicand) in RADICANDS.iter().enumerate() {
            let c = &self.coords[k + 1];
            if c.is_zero() {
                continue;
            }
            let (l, u) = sqrt_bounds(*radicand, bits);
            if c.is_positive() {
                lo += c * &l;
                hi += c * &u;
            } else {
                lo += c * &u;
                hi += c * &l;
            }
        }
        (lo, hi)
    }

    /// Exact sign of the real number this element denotes.
    pub fn signum(&self) -> i8 {
        if self.is_rational() {
            return rational_sign(&self.coords[0]);
        }
        let mut bits = 64;
        loop {
            let (lo, hi) = self.enclose(bits);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            bits *= 2;
        }
    }

    /// Nearest-ish f64, accurate to about 2^-60 relative.
    pub fn to_f64(&self) -> f64 {
        if self.is_rational() {
            return rational_to_f64(&self.coords[0]);
        }
        let mut bits = 64;
        loop {
            let (lo, hi) = self.enclose(bits);
            let mid = (&lo + &hi) / rat(2);
            let width = &hi - &lo;
            let bound = (Rational::one() + mid.abs()) / Rational::from_integer(BigInt::one() << 60);
            if width <= bound {
                return rational_to_f64(&mid);
            }
            bits *= 2;
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut result = FieldElem::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        result
    }
}

fn rational_sign(r: &Rational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

fn sqrt_bounds(radicand: u32, bits: u64) -> (Rational, Rational) {
    let scale = BigInt::one() << bits;
    let root = (BigInt::from(radicand) * &scale * &scale).sqrt();
    (
        Rational::new(root.clone(), scale.clone()),
        Rational::new(root + 1, scale),
    )
}

impl<'a> std::ops::Add<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: &FieldElem) -> FieldElem {
        FieldElem {
            coords: [
                &self.coords[0] + &rhs.coords[0],
                &self.coords[1] + &rhs.coords[1],
                &self.coords[2] + &rhs.coords[2],
                &self.coords[3] + &rhs.coords[3],
            ],
        }
    }
}

impl<'a> std::ops::Sub<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: &FieldElem) -> FieldElem {
        FieldElem {
            coords: [
                &self.coords[0] - &rhs.coords[0],
                &self.coords[1] - &rhs.coords[1],
                &self.coords[2] - &rhs.coords[2],
                &self.coords[3] - &rhs.coords[3],
            ],
        }
    }
}

impl<'a> std::ops::Mul<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: &FieldElem) -> FieldElem {
        if rhs.is_rational() {
            return self.scale(&rhs.coords[0]);
        }
        if self.is_rational() {
            return rhs.scale(&self.coords[0]);
        }
        let [a0, a1, a2, a3] = &self.coords;
        let [b0, b1, b2, b3] = &rhs.coords;
        let two = rat(2);
        let three = rat(3);
        // √2·√2 = 2, √3·√3 = 3, √6·√6 = 6, √2·√3 = √6, √2·√6 = 2√3, √3·√6 = 3√2
        FieldElem {
            coords: [
                a0 * b0 + &two * a1 * b1 + &three * a2 * b2 + rat(6) * a3 * b3,
                a0 * b1 + a1 * b0 + &three * (a2 * b3 + a3 * b2),
                a0 * b2 + a2 * b0 + &two * (a1 * b3 + a3 * b1),
                a0 * b3 + a3 * b0 + a1 * b2 + a2 * b1,
            ],
        }
    }
}

impl std::ops::Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem {
            coords: [
                -self.coords[0].clone(),
                -self.coords[1].clone(),
                -self.coords[2].clone(),
                -self.coords[3].clone(),
            ],
        }
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut out = String::new();
        for (k, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let magnitude = if out.is_empty() {
                fmt_rational(c)
            } else if c.is_negative() {
                out.push_str(" - ");
                fmt_rational(&-c.clone())
            } else {
                out.push_str(" + ");
                fmt_rational(c)
            };
            out.push_str(&magnitude);
            if k > 0 {
                out.push('*');
                out.push_str(BASIS_SUFFIX[k - 1]);
            }
        }
        f.write_str(&out)
    }
}

fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("invalid rational {text:?}"));
    let parse_int = |s: &str| -> Result<BigInt> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse::<BigInt>().map_err(|_| bad())
    };
    match text.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            Ok(Rational::new(parse_int(n)?, den))
        }
        None => Ok(Rational::from_integer(parse_int(text)?)),
    }
}

impl FromStr for FieldElem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        // split into signed terms
        let mut terms: Vec<(bool, &str)> = Vec::new();
        let mut negative = false;
        let mut start = 0;
        let bytes = compact.as_bytes();
        for (i, &b) in bytes.iter().enumerate() {
            if b == b'+' || b == b'-' {
                if i > start {
                    terms.push((negative, &compact[start..i]));
                } else if i != 0 {
                    return Err(Error::Parse(format!("dangling sign in {s:?}")));
                }
                negative = b == b'-';
                start = i + 1;
            }
        }
        if start >= compact.len() {
            return Err(Error::Parse(format!("dangling sign in {s:?}")));
        }
        terms.push((negative, &compact[start..]));

        let mut value = FieldElem::zero();
        for (neg, term) in terms {
            let (coef_text, k) = match term.rsplit_once('*') {
                Some((c, b)) => (Some(c), basis_index(b).ok_or_else(|| bad_term(term))?),
                None => match basis_index(term) {
                    Some(k) => (None, k),
                    None => (Some(term), 0),
                },
            };
            let mut coef = match coef_text {
                Some(c) => parse_rational(c)?,
                None => Rational::one(),
            };
            if neg {
                coef = -coef;
            }
            value.coords[k] += coef;
        }
        Ok(value)
    }
}

fn basis_index(s: &str) -> Option<usize> {
    BASIS_SUFFIX.iter().position(|b| *b == s).map(|k| k + 1)
}

fn bad_term(term: &str) -> Error {
    Error::Parse(format!("invalid term {term:?}"))
}

/// A probability, function value, or parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(FieldElem),
    Float(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(FieldElem::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(FieldElem::one())
    }

    pub fn int(n: i64) -> Self {
        Scalar::Exact(FieldElem::from_rational(rat(n)))
    }

    /// Exact rational `num/den`, reduced.
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        make_rational(num, den)
    }

    pub fn from_rational(r: Rational) -> Self {
        Scalar::Exact(FieldElem::from_rational(r))
    }

    pub fn from_coords(coords: [Rational; 4]) -> Self {
        Scalar::Exact(FieldElem::new(coords))
    }

    /// `√k` for `k` in {2, 3, 6}.
    pub fn sqrt(radicand: u32) -> Self {
        let k = RADICANDS
            .iter()
            .position(|r| *r == radicand)
            .expect("radicand must be 2, 3 or 6");
        Scalar::Exact(FieldElem::basis(k + 1))
    }

    pub fn float(v: f64) -> Self {
        Scalar::Float(v)
    }

    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Exact(_) => Backend::Exact,
            Scalar::Float(_) => Backend::Float,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&FieldElem> {
        match self {
            Scalar::Exact(e) => Some(e),
            Scalar::Float(_) => None,
        }
    }

    /// The rational value, if this is an exact scalar lying in Q.
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(e) if e.is_rational() => Some(e.coord(0)),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(e) => e.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Result<Scalar> {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a + b)),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a + b)),
            _ => Err(Error::BackendMismatch),
        }
    }

    pub fn sub(&self, rhs: &Scalar) -> Result<Scalar> {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a - b)),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a - b)),
            _ => Err(Error::BackendMismatch),
        }
    }

    pub fn mul(&self, rhs: &Scalar) -> Result<Scalar> {
        field_mul(self, rhs)
    }

    pub fn div(&self, rhs: &Scalar) -> Result<Scalar> {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a * &b.inverse()?)),
            (Scalar::Float(a), Scalar::Float(b)) => {
                if *b == 0.0 {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(Scalar::Float(a / b))
                }
            }
            _ => Err(Error::BackendMismatch),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Float(v) => Scalar::Float(-v),
        }
    }

    pub fn scale_int(&self, k: i64) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.scale(&rat(k))),
            Scalar::Float(v) => Scalar::Float(v * k as f64),
        }
    }

    /// Non-negative integer power; `0^0 = 1`.
    pub fn powi(&self, exp: u32) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.pow(exp)),
            Scalar::Float(v) => Scalar::Float(v.powi(exp as i32)),
        }
    }

    pub fn signum(&self) -> i8 {
        field_sign(self)
    }

    pub fn abs(&self) -> Scalar {
        if self.signum() < 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Numeric comparison; fails on mixed backends.
    pub fn compare(&self, rhs: &Scalar) -> Result<Ordering> {
        Ok(match self.sub(rhs)?.signum() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        })
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(e) => e.to_f64(),
            Scalar::Float(v) => *v,
        }
    }

    /// Explicit lowering to the float backend.
    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_f64())
    }

    /// Lowers to `backend` when that is `Float`; exact targets keep the
    /// value unchanged and reject float input.
    pub fn to_backend(&self, backend: Backend) -> Result<Scalar> {
        match (self, backend) {
            (_, Backend::Float) => Ok(self.to_float()),
            (Scalar::Exact(_), Backend::Exact) => Ok(self.clone()),
            (Scalar::Float(_), Backend::Exact) => Err(Error::BackendMismatch),
        }
    }

    /// Sum of a sequence of same-backend scalars; an empty sum is exact zero.
    pub fn sum<'a, I: IntoIterator<Item = &'a Scalar>>(items: I) -> Result<Scalar> {
        let mut iter = items.into_iter();
        let Some(first) = iter.next() else {
            return Ok(Scalar::zero());
        };
        iter.try_fold(first.clone(), |acc, x| acc.add(x))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(e) => e.fmt(f),
            Scalar::Float(v) => write!(f, "{v:?}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Exact text form (`"1/2 - 3*r6"`) or, when the text looks like a
    /// decimal float (`"0.5"`, `"1e-9"`, `"inf"`), a float scalar.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        let looks_float = t.contains('.')
            || lower.contains("inf")
            || lower.contains("nan")
            || (lower.contains('e') && !lower.contains('r'));
        if looks_float {
            return t
                .parse::<f64>()
                .map(Scalar::Float)
                .map_err(|_| Error::Parse(format!("invalid float {t:?}")));
        }
        t.parse::<FieldElem>().map(Scalar::Exact)
    }
}

impl From<FieldElem> for Scalar {
    fn from(e: FieldElem) -> Self {
        Scalar::Exact(e)
    }
}

/// Reduced exact rational `num/den`.
pub fn make_rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Scalar> {
    let den = den.into();
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(Scalar::from_rational(Rational::new(num.into(), den)))
}

/// Field product; mixed backends are an error.
pub fn field_mul(a: &Scalar, b: &Scalar) -> Result<Scalar> {
    match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => Ok(Scalar::Exact(x * y)),
        (Scalar::Float(x), Scalar::Float(y)) => Ok(Scalar::Float(x * y)),
        _ => Err(Error::BackendMismatch),
    }
}

/// Exact sign for exact scalars, IEEE sign (with 0 for ±0) for floats.
pub fn field_sign(a: &Scalar) -> i8 {
    match a {
        Scalar::Exact(e) => e.signum(),
        Scalar::Float(v) => {
            if *v > 0.0 {
                1
            } else if *v < 0.0 {
                -1
            } else {
                0
            }
        }
    }
}
