//! Function models on the unit interval.
//!
//! [`AdditiveMap`] is a Q-linear map on Q(√2, √3), fixed by its values on the
//! basis `{1, √2, √3, √6}`. The genuinely linear map `x ↦ s·x` sends each
//! basis element `e_k` to `s·e_k`; any deviation from that is the map's
//! *Hamel tail*, which makes it additive but not linear over the reals.
//!
//! [`Multiplicative`] covers power maps and the two discontinuous maps that
//! satisfy `M(0) = 0`, `M(1) = 1`, `M(pq) = M(p)M(q)`.
//!
//! [`IntervalFunction`] is the declared-form function every equation
//! consumes.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Backend, FieldElem, Rational, Scalar};

/// Values a tail adds on the irrational basis directions `√2, √3, √6`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct HamelTail(pub [Rational; 3]);

impl HamelTail {
    pub fn zero() -> Self {
        HamelTail([Rational::zero(), Rational::zero(), Rational::zero()])
    }

    pub fn from_ints(t: [i64; 3]) -> Self {
        HamelTail(t.map(|v| Rational::from_integer(v.into())))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

/// Q-linear map on the scalar field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdditiveMap {
    values: [FieldElem; 4],
}

impl AdditiveMap {
    /// Map with the given images of `1, √2, √3, √6`.
    pub fn from_basis_values(values: [FieldElem; 4]) -> Self {
        AdditiveMap { values }
    }

    /// Map from basis images given as scalars; they must be exact.
    pub fn from_scalars(values: [Scalar; 4]) -> Result<Self> {
        let mut out: [FieldElem; 4] = Default::default();
        for (slot, v) in out.iter_mut().zip(values) {
            match v {
                Scalar::Exact(e) => *slot = e,
                Scalar::Float(_) => return Err(Error::BackendMismatch),
            }
        }
        Ok(AdditiveMap { values: out })
    }

    pub fn zero() -> Self {
        AdditiveMap {
            values: Default::default(),
        }
    }

    /// `x ↦ slope · x`.
    pub fn linear(slope: &FieldElem) -> Self {
        AdditiveMap {
            values: [0, 1, 2, 3].map(|k| slope * &FieldElem::basis(k)),
        }
    }

    pub fn identity() -> Self {
        AdditiveMap::linear(&FieldElem::one())
    }

    /// Linear map with value `at_one` at 1, plus the tail on the irrational
    /// directions. The tail does not change the value at 1.
    pub fn with_tail(at_one: &FieldElem, tail: &HamelTail) -> Self {
        let mut map = AdditiveMap::linear(at_one);
        for (k, t) in tail.0.iter().enumerate() {
            map.values[k + 1] = &map.values[k + 1] + &FieldElem::from_rational(t.clone());
        }
        map
    }

    pub fn basis_values(&self) -> &[FieldElem; 4] {
        &self.values
    }

    pub fn value_at_one(&self) -> &FieldElem {
        &self.values[0]
    }

    /// Deviation from the linear map with the same value at 1.
    pub fn tail(&self) -> [FieldElem; 3] {
        let linear = AdditiveMap::linear(&self.values[0]);
        [1, 2, 3].map(|k| &self.values[k] - &linear.values[k])
    }

    pub fn is_linear(&self) -> bool {
        self.tail().iter().all(FieldElem::is_zero)
    }

    pub fn eval(&self, x: &Scalar) -> Result<Scalar> {
        match x {
            Scalar::Exact(e) => {
                let mut acc = FieldElem::zero();
                for (k, c) in e.coords().iter().enumerate() {
                    if !c.is_zero() {
                        acc = &acc + &self.values[k].scale(c);
                    }
                }
                Ok(Scalar::Exact(acc))
            }
            Scalar::Float(v) => {
                if !self.is_linear() {
                    return Err(Error::NonlinearAdditiveNeedsExact);
                }
                Ok(Scalar::Float(self.values[0].to_f64() * v))
            }
        }
    }

    pub fn add(&self, other: &AdditiveMap) -> AdditiveMap {
        AdditiveMap {
            values: [0, 1, 2, 3].map(|k| &self.values[k] + &other.values[k]),
        }
    }

    pub fn sub(&self, other: &AdditiveMap) -> AdditiveMap {
        AdditiveMap {
            values: [0, 1, 2, 3].map(|k| &self.values[k] - &other.values[k]),
        }
    }

    pub fn scale(&self, c: &FieldElem) -> AdditiveMap {
        AdditiveMap {
            values: [0, 1, 2, 3].map(|k| &self.values[k] * c),
        }
    }
}

/// Additive map from raw rational basis values `(t0, t1, t2, t3)`.
pub fn make_additive(t0: Rational, t1: Rational, t2: Rational, t3: Rational) -> AdditiveMap {
    AdditiveMap {
        values: [t0, t1, t2, t3].map(FieldElem::from_rational),
    }
}

pub fn eval_additive(a: &AdditiveMap, x: &Scalar) -> Result<Scalar> {
    a.eval(x)
}

/// Exponent of a power map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    /// Keeps exact inputs exact.
    Integer(u32),
    /// Always evaluates in floating point.
    Real(f64),
}

impl Exponent {
    pub fn as_f64(&self) -> f64 {
        match self {
            Exponent::Integer(k) => *k as f64,
            Exponent::Real(a) => *a,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Integer(k) => write!(f, "{k}"),
            Exponent::Real(a) => write!(f, "{a:?}"),
        }
    }
}

/// Map multiplicative on the closed unit interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Multiplicative {
    /// `p ↦ p^α` with `0^α := 0`.
    Power(Exponent),
    /// 0 at 0, 1 elsewhere.
    SupportIndicator,
    /// 1 at 1, 0 elsewhere.
    OneAtOne,
}

/// Which multiplicative map to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultiplicativeKind {
    Power,
    SupportIndicator,
    OneAtOne,
}

impl Multiplicative {
    pub fn power(k: u32) -> Result<Self> {
        make_multiplicative(MultiplicativeKind::Power, Some(Exponent::Integer(k)))
    }

    pub fn real_power(alpha: f64) -> Result<Self> {
        make_multiplicative(MultiplicativeKind::Power, Some(Exponent::Real(alpha)))
    }

    pub fn requires_float(&self) -> bool {
        matches!(self, Multiplicative::Power(Exponent::Real(_)))
    }

    pub fn eval(&self, x: &Scalar) -> Result<Scalar> {
        check_unit_interval(x)?;
        let backend = x.backend();
        let as_backend = |v: Scalar| v.to_backend(backend);
        match self {
            Multiplicative::Power(Exponent::Integer(k)) => {
                if x.is_zero() {
                    as_backend(Scalar::zero())
                } else {
                    Ok(x.powi(*k))
                }
            }
            Multiplicative::Power(Exponent::Real(alpha)) => {
                let v = x.to_f64();
                Ok(Scalar::Float(if v == 0.0 { 0.0 } else { v.powf(*alpha) }))
            }
            Multiplicative::SupportIndicator => {
                as_backend(if x.is_zero() { Scalar::zero() } else { Scalar::one() })
            }
            Multiplicative::OneAtOne => {
                let at_one = match x {
                    Scalar::Float(v) => *v == 1.0,
                    Scalar::Exact(_) => *x == Scalar::one(),
                };
                as_backend(if at_one { Scalar::one() } else { Scalar::zero() })
            }
        }
    }
}

impl fmt::Display for Multiplicative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicative::Power(e) => write!(f, "p^{e}"),
            Multiplicative::SupportIndicator => f.write_str("support-indicator"),
            Multiplicative::OneAtOne => f.write_str("one-at-one"),
        }
    }
}

pub fn make_multiplicative(kind: MultiplicativeKind, alpha: Option<Exponent>) -> Result<Multiplicative> {
    match kind {
        MultiplicativeKind::Power => {
            let alpha = alpha.ok_or_else(|| Error::NonpositiveExponent("missing exponent".into()))?;
            let ok = match alpha {
                Exponent::Integer(k) => k > 0,
                Exponent::Real(a) => a > 0.0 && a.is_finite(),
            };
            if !ok {
                return Err(Error::NonpositiveExponent(alpha.to_string()));
            }
            Ok(Multiplicative::Power(alpha))
        }
        MultiplicativeKind::SupportIndicator => Ok(Multiplicative::SupportIndicator),
        MultiplicativeKind::OneAtOne => Ok(Multiplicative::OneAtOne),
    }
}

pub fn eval_multiplicative(m: &Multiplicative, x: &Scalar) -> Result<Scalar> {
    m.eval(x)
}

fn check_unit_interval(x: &Scalar) -> Result<()> {
    let inside = match x {
        Scalar::Float(v) => (0.0..=1.0).contains(v),
        Scalar::Exact(_) => x.signum() >= 0 && Scalar::one().sub(x)?.signum() >= 0,
    };
    if inside {
        Ok(())
    } else {
        Err(Error::OutOfInterval(x.to_string()))
    }
}

/// Abscissa match tolerance when a table is probed with a float.
const TABLE_FLOAT_MATCH: f64 = 1e-12;

/// A function `[0, 1] → R` given by a declared form.
#[derive(Clone, Debug, PartialEq)]
pub enum IntervalFunction {
    /// `a(x) + constant`
    AffineAdditive { map: AdditiveMap, constant: Scalar },
    /// `scale · (M(x) − B(x)) + constant`
    MultCombo {
        scale: Scalar,
        mult: Multiplicative,
        additive: AdditiveMap,
        constant: Scalar,
    },
    /// `(inner(x) − x) / lambda`
    Transformed {
        inner: Box<IntervalFunction>,
        lambda: Scalar,
    },
    /// Explicit values at listed abscissae only.
    Table { points: Vec<(Scalar, Scalar)> },
}

impl IntervalFunction {
    pub fn affine(map: AdditiveMap, constant: Scalar) -> Self {
        IntervalFunction::AffineAdditive { map, constant }
    }

    pub fn constant(c: Scalar) -> Self {
        IntervalFunction::affine(AdditiveMap::zero(), c)
    }

    pub fn zero() -> Self {
        IntervalFunction::constant(Scalar::zero())
    }

    pub fn identity() -> Self {
        IntervalFunction::affine(AdditiveMap::identity(), Scalar::zero())
    }

    pub fn mult_combo(scale: Scalar, mult: Multiplicative, additive: AdditiveMap, constant: Scalar) -> Self {
        IntervalFunction::MultCombo {
            scale,
            mult,
            additive,
            constant,
        }
    }

    /// Plain `M(x)`.
    pub fn multiplicative(mult: Multiplicative) -> Self {
        IntervalFunction::mult_combo(Scalar::one(), mult, AdditiveMap::zero(), Scalar::zero())
    }

    /// `x ↦ x^k`.
    pub fn power(k: u32) -> Result<Self> {
        Ok(IntervalFunction::multiplicative(Multiplicative::power(k)?))
    }

    pub fn transformed(inner: IntervalFunction, lambda: Scalar) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::LambdaZero);
        }
        Ok(IntervalFunction::Transformed {
            inner: Box::new(inner),
            lambda,
        })
    }

    pub fn table(points: Vec<(Scalar, Scalar)>) -> Result<Self> {
        for (i, (x, _)) in points.iter().enumerate() {
            check_unit_interval(x)?;
            if points[..i].iter().any(|(y, _)| y == x) {
                return Err(Error::DuplicateAbscissa(x.to_string()));
            }
        }
        Ok(IntervalFunction::Table { points })
    }

    /// True when evaluation happens in floating point regardless of input.
    pub fn requires_float(&self) -> bool {
        match self {
            IntervalFunction::AffineAdditive { constant, .. } => !constant.is_exact(),
            IntervalFunction::MultCombo {
                scale,
                mult,
                constant,
                ..
            } => mult.requires_float() || !scale.is_exact() || !constant.is_exact(),
            IntervalFunction::Transformed { inner, lambda } => inner.requires_float() || !lambda.is_exact(),
            IntervalFunction::Table { points } => points.iter().any(|(x, y)| !x.is_exact() || !y.is_exact()),
        }
    }

    /// Evaluates at `x ∈ [0, 1]`. The result is a float when `x` is a float
    /// or the function [requires floats](Self::requires_float); exact
    /// parameters are then lowered explicitly.
    pub fn eval(&self, x: &Scalar) -> Result<Scalar> {
        check_unit_interval(x)?;
        let backend = if x.backend() == Backend::Float || self.requires_float() {
            Backend::Float
        } else {
            Backend::Exact
        };
        let x = x.to_backend(backend)?;
        self.eval_in(&x, backend)
    }

    fn eval_in(&self, x: &Scalar, backend: Backend) -> Result<Scalar> {
        match self {
            IntervalFunction::AffineAdditive { map, constant } => {
                map.eval(x)?.add(&constant.to_backend(backend)?)
            }
            IntervalFunction::MultCombo {
                scale,
                mult,
                additive,
                constant,
            } => {
                let m = mult.eval(x)?.to_backend(backend)?;
                let b = additive.eval(x)?;
                scale
                    .to_backend(backend)?
                    .mul(&m.sub(&b)?)?
                    .add(&constant.to_backend(backend)?)
            }
            IntervalFunction::Transformed { inner, lambda } => inner
                .eval_in(x, backend)?
                .sub(x)?
                .div(&lambda.to_backend(backend)?),
            IntervalFunction::Table { points } => {
                let hit = match x {
                    Scalar::Exact(_) => points.iter().find(|(a, _)| a == x),
                    Scalar::Float(v) => points
                        .iter()
                        .find(|(a, _)| (a.to_f64() - v).abs() <= TABLE_FLOAT_MATCH),
                };
                match hit {
                    Some((_, y)) => y.to_backend(backend),
                    None => Err(Error::TableMiss(x.to_string())),
                }
            }
        }
    }

    /// `r · F(x) + s · x`, rewritten into a declared form without
    /// `Transformed` at the top level. Exact `r` and `s` are required
    /// except for tables.
    pub fn scaled_plus_identity(&self, r: &Scalar, s: &Scalar) -> Result<IntervalFunction> {
        let exact = |v: &Scalar| v.as_exact().cloned().ok_or(Error::BackendMismatch);
        match self {
            IntervalFunction::AffineAdditive { map, constant } => {
                let (re, se) = (exact(r)?, exact(s)?);
                Ok(IntervalFunction::affine(
                    map.scale(&re).add(&AdditiveMap::linear(&se)),
                    r.mul(constant)?,
                ))
            }
            IntervalFunction::MultCombo {
                scale,
                mult,
                additive,
                constant,
            } => {
                let new_scale = r.mul(scale)?;
                let new_constant = r.mul(constant)?;
                if new_scale.is_zero() {
                    return Ok(IntervalFunction::affine(AdditiveMap::linear(&exact(s)?), new_constant));
                }
                // r·σ(M − B) + s·x = (rσ)(M − (B − (s/(rσ))·id))
                let shift = exact(&s.div(&new_scale)?)?;
                Ok(IntervalFunction::mult_combo(
                    new_scale,
                    *mult,
                    additive.sub(&AdditiveMap::linear(&shift)),
                    new_constant,
                ))
            }
            IntervalFunction::Transformed { inner, lambda } => {
                // r(G − x)/μ + s·x = (r/μ)·G + (s − r/μ)·x
                let ratio = r.div(lambda)?;
                inner.scaled_plus_identity(&ratio, &s.sub(&ratio)?)
            }
            IntervalFunction::Table { points } => {
                let points = points
                    .iter()
                    .map(|(x, y)| {
                        let x_b = x.to_backend(y.backend())?;
                        Ok((x.clone(), r.mul(y)?.add(&s.mul(&x_b)?)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(IntervalFunction::Table { points })
            }
        }
    }

    /// `F(x) + c`.
    pub fn plus_constant(&self, c: &Scalar) -> Result<IntervalFunction> {
        Ok(match self {
            IntervalFunction::AffineAdditive { map, constant } => IntervalFunction::AffineAdditive {
                map: map.clone(),
                constant: constant.add(c)?,
            },
            IntervalFunction::MultCombo {
                scale,
                mult,
                additive,
                constant,
            } => IntervalFunction::MultCombo {
                scale: scale.clone(),
                mult: *mult,
                additive: additive.clone(),
                constant: constant.add(c)?,
            },
            IntervalFunction::Transformed { inner, lambda } => IntervalFunction::Transformed {
                inner: Box::new(inner.plus_constant(&lambda.mul(c)?)?),
                lambda: lambda.clone(),
            },
            IntervalFunction::Table { points } => IntervalFunction::Table {
                points: points
                    .iter()
                    .map(|(x, y)| Ok((x.clone(), y.add(&c.to_backend(y.backend())?)?)))
                    .collect::<Result<Vec<_>>>()?,
            },
        })
    }
}

/// Evaluates `f` at `x`.
pub fn eval_interval_function(f: &IntervalFunction, x: &Scalar) -> Result<Scalar> {
    f.eval(x)
}
