//! Constructors for every solution family of the sum-form equations, and
//! the `f(x) = x + λ·h(x)` correspondence between the `h, k_j` equation and
//! the `f, g_j` equation.
//!
//! Each constructor validates the side conditions attached to its family and
//! returns a [`SolutionBundle`] whose functions are declared forms, so the
//! bundle can be serialized, re-verified, and classified.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::maps::{AdditiveMap, HamelTail, IntervalFunction, Multiplicative};
use crate::residual::EquationId;
use crate::scalar::{FieldElem, Rational, Scalar};

/// Which branch of a theorem (or which representation result) a bundle
/// instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    Phi31i,
    Phi31ii,
    Phi33,
    F41,
    F42,
    F44,
    H51,
    H52,
    H54,
    R1,
    R2,
    None,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 12] = [
        FamilyTag::Phi31i,
        FamilyTag::Phi31ii,
        FamilyTag::Phi33,
        FamilyTag::F41,
        FamilyTag::F42,
        FamilyTag::F44,
        FamilyTag::H51,
        FamilyTag::H52,
        FamilyTag::H54,
        FamilyTag::R1,
        FamilyTag::R2,
        FamilyTag::None,
    ];

    /// The nine theorem families.
    pub const THEOREMS: [FamilyTag; 9] = [
        FamilyTag::Phi31i,
        FamilyTag::Phi31ii,
        FamilyTag::Phi33,
        FamilyTag::F41,
        FamilyTag::F42,
        FamilyTag::F44,
        FamilyTag::H51,
        FamilyTag::H52,
        FamilyTag::H54,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            FamilyTag::Phi31i => "3.1i",
            FamilyTag::Phi31ii => "3.1ii",
            FamilyTag::Phi33 => "3.3",
            FamilyTag::F41 => "4.1",
            FamilyTag::F42 => "4.2",
            FamilyTag::F44 => "4.4",
            FamilyTag::H51 => "5.1",
            FamilyTag::H52 => "5.2",
            FamilyTag::H54 => "5.4",
            FamilyTag::R1 => "R1",
            FamilyTag::R2 => "R2",
            FamilyTag::None => "none",
        }
    }

    /// Equation the family solves; `None` for the "none" tag.
    pub fn equation(&self) -> Option<EquationId> {
        Some(match self {
            FamilyTag::Phi31i | FamilyTag::Phi31ii | FamilyTag::Phi33 => EquationId::Eq111,
            FamilyTag::F41 | FamilyTag::F42 | FamilyTag::F44 => EquationId::Eq110,
            FamilyTag::H51 | FamilyTag::H52 | FamilyTag::H54 => EquationId::Eq18,
            FamilyTag::R1 => EquationId::Eq21,
            FamilyTag::R2 => EquationId::Eq23,
            FamilyTag::None => return None,
        })
    }

    /// Whether the family contains a multiplicative map.
    pub fn is_multiplicative(&self) -> bool {
        matches!(self, FamilyTag::Phi33 | FamilyTag::F44 | FamilyTag::H54)
    }

    /// The `h`-side family for an `f`-side one and vice versa.
    pub fn transform_partner(&self) -> Option<FamilyTag> {
        Some(match self {
            FamilyTag::F41 => FamilyTag::H51,
            FamilyTag::F42 => FamilyTag::H52,
            FamilyTag::F44 => FamilyTag::H54,
            FamilyTag::H51 => FamilyTag::F41,
            FamilyTag::H52 => FamilyTag::F42,
            FamilyTag::H54 => FamilyTag::F44,
            _ => return None,
        })
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyTag::ALL
            .iter()
            .copied()
            .find(|t| t.label() == s)
            .ok_or_else(|| Error::Parse(format!("unknown family tag {s:?}")))
    }
}

/// The functions of a bundle, shaped by the equation they solve.
#[derive(Clone, Debug, PartialEq)]
pub enum BundleFunctions {
    /// `f` and `g_1..g_m`.
    Eq110 { f: IntervalFunction, g: Vec<IntervalFunction> },
    /// `h` and `k_1..k_m`.
    Eq18 { h: IntervalFunction, k: Vec<IntervalFunction> },
    Eq111 { phi: IntervalFunction },
    Eq21 { psi: IntervalFunction },
    Eq23 { psi: Vec<IntervalFunction> },
}

/// A candidate solution of one equation together with the parameters that
/// produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionBundle {
    pub family: FamilyTag,
    /// First arity (`n`, or `k` for the single-distribution equations).
    pub n: usize,
    /// Second arity (`m`); equals `n` for the single-distribution equations.
    pub m: usize,
    /// Coupling constant of the `h, k_j` equation.
    pub lambda: Option<Scalar>,
    /// Right-hand side `c` of `Σ ψ(p_i) = c`.
    pub constant: Option<Scalar>,
    /// Descriptive record of the raw parameters.
    pub params: Map<String, Value>,
    pub functions: BundleFunctions,
}

impl SolutionBundle {
    pub fn equation(&self) -> EquationId {
        match self.functions {
            BundleFunctions::Eq110 { .. } => EquationId::Eq110,
            BundleFunctions::Eq18 { .. } => EquationId::Eq18,
            BundleFunctions::Eq111 { .. } => EquationId::Eq111,
            BundleFunctions::Eq21 { .. } => EquationId::Eq21,
            BundleFunctions::Eq23 { .. } => EquationId::Eq23,
        }
    }

    pub fn all_functions(&self) -> Vec<&IntervalFunction> {
        match &self.functions {
            BundleFunctions::Eq110 { f, g } => std::iter::once(f).chain(g).collect(),
            BundleFunctions::Eq18 { h, k } => std::iter::once(h).chain(k).collect(),
            BundleFunctions::Eq111 { phi } => vec![phi],
            BundleFunctions::Eq21 { psi } => vec![psi],
            BundleFunctions::Eq23 { psi } => psi.iter().collect(),
        }
    }

    /// The function the family shape is read from (`f`, `h`, `φ`, `ψ`, `ψ_1`).
    pub fn primary(&self) -> &IntervalFunction {
        self.all_functions()[0]
    }

    pub fn requires_float(&self) -> bool {
        self.all_functions().iter().any(|f| f.requires_float())
            || self.lambda.as_ref().is_some_and(|l| !l.is_exact())
            || self.constant.as_ref().is_some_and(|c| !c.is_exact())
    }

    /// Copy with the constant `delta` added to the primary function.
    pub fn perturbed(&self, delta: &Scalar) -> Result<SolutionBundle> {
        let mut out = self.clone();
        match &mut out.functions {
            BundleFunctions::Eq110 { f, .. } => *f = f.plus_constant(delta)?,
            BundleFunctions::Eq18 { h, .. } => *h = h.plus_constant(delta)?,
            BundleFunctions::Eq111 { phi } => *phi = phi.plus_constant(delta)?,
            BundleFunctions::Eq21 { psi } => *psi = psi.plus_constant(delta)?,
            BundleFunctions::Eq23 { psi } => psi[0] = psi[0].plus_constant(delta)?,
        }
        out.params
            .insert("perturbed_from".into(), Value::String(self.family.label().into()));
        out.params.insert("perturbation".into(), Value::String(delta.to_string()));
        out.family = FamilyTag::None;
        Ok(out)
    }

    /// Maps an `f, g_j` bundle to the `h, k_j` bundle of coupling `lambda`.
    pub fn to_eq18(&self, lambda: &Scalar) -> Result<SolutionBundle> {
        let BundleFunctions::Eq110 { f, g } = &self.functions else {
            return Err(Error::UnsupportedEquation(format!(
                "to_eq18 needs an equation 1.10 bundle, got {}",
                self.equation()
            )));
        };
        let h = transform_f_to_h(f, lambda)?;
        let k = g
            .iter()
            .map(|gj| transform_f_to_h(gj, lambda))
            .collect::<Result<Vec<_>>>()?;
        let mut params = self.params.clone();
        params.insert("lambda".into(), Value::String(lambda.to_string()));
        Ok(SolutionBundle {
            family: self.family.transform_partner().unwrap_or(FamilyTag::None),
            n: self.n,
            m: self.m,
            lambda: Some(lambda.clone()),
            constant: None,
            params,
            functions: BundleFunctions::Eq18 { h, k },
        })
    }

    /// Maps an `h, k_j` bundle back to its `f, g_j` bundle.
    pub fn to_eq110(&self) -> Result<SolutionBundle> {
        let (BundleFunctions::Eq18 { h, k }, Some(lambda)) = (&self.functions, &self.lambda) else {
            return Err(Error::UnsupportedEquation(format!(
                "to_eq110 needs an equation 1.8 bundle with lambda, got {}",
                self.equation()
            )));
        };
        let f = transform_h_to_f(h, lambda)?;
        let g = k
            .iter()
            .map(|kj| transform_h_to_f(kj, lambda))
            .collect::<Result<Vec<_>>>()?;
        let mut params = self.params.clone();
        params.shift_remove("lambda");
        Ok(SolutionBundle {
            family: self.family.transform_partner().unwrap_or(FamilyTag::None),
            n: self.n,
            m: self.m,
            lambda: None,
            constant: None,
            params,
            functions: BundleFunctions::Eq110 { f, g },
        })
    }
}

fn exact(s: &Scalar) -> Result<FieldElem> {
    s.as_exact().cloned().ok_or(Error::BackendMismatch)
}

fn int_q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn check_arity(n: usize, m: usize) -> Result<()> {
    if n < 3 || m < 3 {
        return Err(Error::ArityTooSmall(format!("need n >= 3 and m >= 3, got n = {n}, m = {m}")));
    }
    Ok(())
}

fn tail_json(t: &HamelTail) -> Value {
    Value::Array(t.0.iter().map(|r| Value::String(Scalar::from_rational(r.clone()).to_string())).collect())
}

fn map_json(a: &AdditiveMap) -> Value {
    Value::Array(
        a.basis_values()
            .iter()
            .map(|v| Value::String(v.to_string()))
            .collect(),
    )
}

fn scalars_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(|s| Value::String(s.to_string())).collect())
}

fn params(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// `ψ(p) = B(p) − B(1)/k + c/k`, solving `Σ_{i=1}^k ψ(p_i) = c`.
pub fn result1_construct(b: &AdditiveMap, k: usize, c: &Scalar) -> Result<IntervalFunction> {
    if k < 3 {
        return Err(Error::KTooSmall(k));
    }
    let b1 = Scalar::Exact(b.value_at_one().clone()).to_backend(c.backend())?;
    let kk = Scalar::int(k as i64).to_backend(c.backend())?;
    let constant = c.sub(&b1)?.div(&kk)?;
    Ok(IntervalFunction::affine(b.clone(), constant))
}

pub fn result1_bundle(b: &AdditiveMap, k: usize, c: &Scalar) -> Result<SolutionBundle> {
    let psi = result1_construct(b, k, c)?;
    Ok(SolutionBundle {
        family: FamilyTag::R1,
        n: k,
        m: k,
        lambda: None,
        constant: Some(c.clone()),
        params: params(vec![("B", map_json(b)), ("c", Value::String(c.to_string()))]),
        functions: BundleFunctions::Eq21 { psi },
    })
}

/// `ψ_j(p) = A(p) + c_j`, solving `Σ_j ψ_j(q_j) = 0` when `A(1) + Σ c_j = 0`.
pub fn result2_construct(a: &AdditiveMap, c: &[Scalar]) -> Result<Vec<IntervalFunction>> {
    if c.len() < 3 {
        return Err(Error::ArityTooSmall(format!("need m >= 3 constants, got {}", c.len())));
    }
    let backend = c[0].backend();
    let total = Scalar::Exact(a.value_at_one().clone())
        .to_backend(backend)?
        .add(&Scalar::sum(c)?)?;
    let violated = match &total {
        Scalar::Float(v) => v.abs() > 1e-12,
        Scalar::Exact(e) => !e.is_zero(),
    };
    if violated {
        return Err(Error::Constraint25Violated(total.to_string()));
    }
    Ok(c.iter()
        .map(|cj| IntervalFunction::affine(a.clone(), cj.clone()))
        .collect())
}

pub fn result2_bundle(a: &AdditiveMap, c: &[Scalar]) -> Result<SolutionBundle> {
    let psi = result2_construct(a, c)?;
    Ok(SolutionBundle {
        family: FamilyTag::R2,
        n: c.len(),
        m: c.len(),
        lambda: None,
        constant: None,
        params: params(vec![("A", map_json(a)), ("c", scalars_json(c))]),
        functions: BundleFunctions::Eq23 { psi },
    })
}

/// Parameters of the three branches for `φ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Theorem1Params {
    /// `φ = a + φ(0)` with `a(1) = −nm·φ(0)`; requires `φ(1) + (n−1)φ(0) ≠ 1`.
    CaseI { phi0: Scalar, tail: HamelTail },
    /// `φ = a + φ(0)` with `a(1) = 1 − n·φ(0)`.
    CaseII { phi0: Scalar, tail: HamelTail },
    /// `φ = M − B` with `B(1) = 0`.
    Multiplicative { mult: Multiplicative, b: AdditiveMap },
}

pub fn theorem1_construct(n: usize, m: usize, params_in: Theorem1Params) -> Result<SolutionBundle> {
    check_arity(n, m)?;
    let (family, phi, record) = match &params_in {
        Theorem1Params::CaseI { phi0, tail } | Theorem1Params::CaseII { phi0, tail } => {
            let p0 = exact(phi0)?;
            let case_i = matches!(params_in, Theorem1Params::CaseI { .. });
            let a1 = if case_i {
                p0.scale(&int_q(-((n * m) as i64)))
            } else {
                &FieldElem::one() - &p0.scale(&int_q(n as i64))
            };
            let a = AdditiveMap::with_tail(&a1, tail);
            let phi = IntervalFunction::affine(a, phi0.clone());
            if case_i {
                let cond = phi
                    .eval(&Scalar::one())?
                    .add(&phi.eval(&Scalar::zero())?.scale_int(n as i64 - 1))?;
                if cond == Scalar::one() {
                    return Err(Error::CaseConditionViolated(cond.to_string()));
                }
            }
            let family = if case_i { FamilyTag::Phi31i } else { FamilyTag::Phi31ii };
            let record = params(vec![
                ("phi0", Value::String(phi0.to_string())),
                ("a1", Value::String(a1.to_string())),
                ("tail", tail_json(tail)),
            ]);
            (family, phi, record)
        }
        Theorem1Params::Multiplicative { mult, b } => {
            if !b.value_at_one().is_zero() {
                return Err(Error::BigB1Nonzero(b.value_at_one().to_string()));
            }
            let phi = IntervalFunction::mult_combo(Scalar::one(), *mult, b.clone(), Scalar::zero());
            let record = params(vec![("M", Value::String(mult.to_string())), ("B", map_json(b))]);
            (FamilyTag::Phi33, phi, record)
        }
    };
    Ok(SolutionBundle {
        family,
        n,
        m,
        lambda: None,
        constant: None,
        params: record,
        functions: BundleFunctions::Eq111 { phi },
    })
}

/// Parameters of the three branches for `f, g_j`.
#[derive(Clone, Debug, PartialEq)]
pub enum Theorem2Params {
    /// `f = b` with `b(1) = 0`; `g_j` arbitrary.
    Null { b: AdditiveMap, g: Vec<IntervalFunction> },
    /// `f = c·a + f(0)`, `g_j = a + A* + g_j(0)` with `c = f(1) + (n−1)f(0) ≠ 0`.
    Affine {
        f0: Scalar,
        f1: Scalar,
        a_tail: HamelTail,
        astar_tail: HamelTail,
        g0: Vec<Scalar>,
    },
    /// `f = f(1)(M − B)`, `g_j = M − B + A* + g_j(0)` with `B(1) = 0` and
    /// `A*(1) = −Σ g_j(0)`.
    Multiplicative {
        f1: Scalar,
        mult: Multiplicative,
        b: AdditiveMap,
        astar: AdditiveMap,
        g0: Vec<Scalar>,
    },
}

pub fn theorem2_construct(n: usize, m: usize, params_in: Theorem2Params) -> Result<SolutionBundle> {
    check_arity(n, m)?;
    let expect_m = |len: usize, what: &str| {
        if len != m {
            Err(Error::ArityMismatch(format!("{what} has {len} entries, expected m = {m}")))
        } else {
            Ok(())
        }
    };
    let (family, f, g, record) = match params_in {
        Theorem2Params::Null { b, g } => {
            expect_m(g.len(), "g")?;
            if !b.value_at_one().is_zero() {
                return Err(Error::SmallB1Nonzero(b.value_at_one().to_string()));
            }
            let f = IntervalFunction::affine(b.clone(), Scalar::zero());
            (FamilyTag::F41, f, g, params(vec![("b", map_json(&b))]))
        }
        Theorem2Params::Affine {
            f0,
            f1,
            a_tail,
            astar_tail,
            g0,
        } => {
            expect_m(g0.len(), "g0")?;
            let (e0, e1) = (exact(&f0)?, exact(&f1)?);
            let nn = int_q(n as i64);
            let c = &e1 + &e0.scale(&(&nn - int_q(1)));
            if c.is_zero() {
                return Err(Error::CZero);
            }
            let ratio = &e0 * &c.inverse()?;
            let a1 = &FieldElem::one() - &ratio.scale(&nn);
            let g0_sum = exact(&Scalar::sum(&g0)?)?;
            let astar1 = &ratio.scale(&int_q((n * m) as i64)) - &g0_sum;
            let a = AdditiveMap::with_tail(&a1, &a_tail);
            let astar = AdditiveMap::with_tail(&astar1, &astar_tail);
            let f = IntervalFunction::affine(a.scale(&c), f0.clone());
            let g_map = a.add(&astar);
            let g = g0
                .iter()
                .map(|gj0| IntervalFunction::affine(g_map.clone(), gj0.clone()))
                .collect();
            let record = params(vec![
                ("f0", Value::String(f0.to_string())),
                ("f1", Value::String(f1.to_string())),
                ("c", Value::String(c.to_string())),
                ("a1", Value::String(a1.to_string())),
                ("Astar1", Value::String(astar1.to_string())),
                ("a_tail", tail_json(&a_tail)),
                ("Astar_tail", tail_json(&astar_tail)),
                ("g0", scalars_json(&g0)),
            ]);
            (FamilyTag::F42, f, g, record)
        }
        Theorem2Params::Multiplicative {
            f1,
            mult,
            b,
            astar,
            g0,
        } => {
            expect_m(g0.len(), "g0")?;
            if f1.is_zero() {
                return Err(Error::F1Zero);
            }
            if !b.value_at_one().is_zero() {
                return Err(Error::BigB1Nonzero(b.value_at_one().to_string()));
            }
            let g0_sum = Scalar::sum(&g0)?;
            let astar1 = Scalar::Exact(astar.value_at_one().clone());
            let expected = g0_sum.neg();
            let matches = match (&astar1.to_backend(expected.backend())?, &expected) {
                (Scalar::Float(a), Scalar::Float(e)) => (a - e).abs() <= 1e-12,
                (a, e) => a == e,
            };
            if !matches {
                return Err(Error::AStarConstraintViolated {
                    got: astar1.to_string(),
                    expected: expected.to_string(),
                });
            }
            let f = IntervalFunction::mult_combo(f1.clone(), mult, b.clone(), Scalar::zero());
            let g_map = b.sub(&astar);
            let g = g0
                .iter()
                .map(|gj0| IntervalFunction::mult_combo(Scalar::one(), mult, g_map.clone(), gj0.clone()))
                .collect();
            let record = params(vec![
                ("f1", Value::String(f1.to_string())),
                ("M", Value::String(mult.to_string())),
                ("B", map_json(&b)),
                ("Astar", map_json(&astar)),
                ("g0", scalars_json(&g0)),
            ]);
            (FamilyTag::F44, f, g, record)
        }
    };
    Ok(SolutionBundle {
        family,
        n,
        m,
        lambda: None,
        constant: None,
        params: record,
        functions: BundleFunctions::Eq110 { f, g },
    })
}

/// Parameters of the three branches for `h, k_j`, written in terms of the
/// values `h(0)`, `h(1)`, `k_j(0)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Theorem3Params {
    /// `h = (b − id)/λ` with `b(1) = 0`; `k_j` arbitrary.
    Null { b: AdditiveMap, k: Vec<IntervalFunction> },
    /// Requires `λ(h(1) + (n−1)h(0)) + 1 ≠ 0`.
    Affine {
        h0: Scalar,
        h1: Scalar,
        a_tail: HamelTail,
        astar_tail: HamelTail,
        k0: Vec<Scalar>,
    },
    /// Requires `λh(1) + 1 ≠ 0`, `B(1) = 0`, `A*(1) = −λ Σ k_j(0)`.
    Multiplicative {
        h1: Scalar,
        mult: Multiplicative,
        b: AdditiveMap,
        astar: AdditiveMap,
        k0: Vec<Scalar>,
    },
}

pub fn theorem3_construct(
    n: usize,
    m: usize,
    lambda: &Scalar,
    params_in: Theorem3Params,
) -> Result<SolutionBundle> {
    if lambda.is_zero() {
        return Err(Error::LambdaZero);
    }
    let lifted = |v: &Scalar| lambda.mul(v);
    let f_side = match &params_in {
        Theorem3Params::Null { b, k } => {
            // k_j are carried through untouched; g_j only fills the arity slot
            let g = k
                .iter()
                .map(|kj| transform_h_to_f(kj, lambda))
                .collect::<Result<Vec<_>>>()?;
            Theorem2Params::Null { b: b.clone(), g }
        }
        Theorem3Params::Affine {
            h0,
            h1,
            a_tail,
            astar_tail,
            k0,
        } => Theorem2Params::Affine {
            f0: lifted(h0)?,
            f1: Scalar::one().add(&lifted(h1)?)?,
            a_tail: a_tail.clone(),
            astar_tail: astar_tail.clone(),
            g0: k0.iter().map(lifted).collect::<Result<Vec<_>>>()?,
        },
        Theorem3Params::Multiplicative {
            h1,
            mult,
            b,
            astar,
            k0,
        } => Theorem2Params::Multiplicative {
            f1: Scalar::one().add(&lifted(h1)?)?,
            mult: *mult,
            b: b.clone(),
            astar: astar.clone(),
            g0: k0.iter().map(lifted).collect::<Result<Vec<_>>>()?,
        },
    };
    let base = theorem2_construct(n, m, f_side)?;
    let mut bundle = base.to_eq18(lambda)?;
    if let (Theorem3Params::Null { k, .. }, BundleFunctions::Eq18 { k: slot, .. }) =
        (&params_in, &mut bundle.functions)
    {
        *slot = k.clone();
    }
    match &params_in {
        Theorem3Params::Affine { h0, h1, k0, .. } => {
            bundle.params.insert("h0".into(), Value::String(h0.to_string()));
            bundle.params.insert("h1".into(), Value::String(h1.to_string()));
            bundle.params.insert("k0".into(), scalars_json(k0));
        }
        Theorem3Params::Multiplicative { h1, k0, .. } => {
            bundle.params.insert("h1".into(), Value::String(h1.to_string()));
            bundle.params.insert("k0".into(), scalars_json(k0));
        }
        Theorem3Params::Null { .. } => {}
    }
    Ok(bundle)
}

/// `f(x) = x + λ·h(x)`.
pub fn transform_h_to_f(h: &IntervalFunction, lambda: &Scalar) -> Result<IntervalFunction> {
    if lambda.is_zero() {
        return Err(Error::LambdaZero);
    }
    if let IntervalFunction::Transformed { inner, lambda: mu } = h {
        if mu == lambda {
            return Ok((**inner).clone());
        }
    }
    h.scaled_plus_identity(lambda, &Scalar::one())
}

/// `h(x) = (f(x) − x)/λ`.
pub fn transform_f_to_h(f: &IntervalFunction, lambda: &Scalar) -> Result<IntervalFunction> {
    IntervalFunction::transformed(f.clone(), lambda.clone())
}

/// Flavour of a random parameter draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrawVariant {
    /// Linear additive parts, integer powers.
    Plain,
    /// Non-zero Hamel tails on every additive part.
    Hamel,
    /// Multiplicative families use the support indicator.
    SupportIndicator,
    /// Multiplicative families use the one-at-one map.
    OneAtOne,
}

impl DrawVariant {
    /// Whether bundles drawn with this variant stay in the measurable sector
    /// for `family` (linear additive parts, integer powers).
    pub fn is_measurable_for(&self, family: FamilyTag) -> bool {
        match self {
            DrawVariant::Plain => true,
            DrawVariant::Hamel => false,
            DrawVariant::SupportIndicator | DrawVariant::OneAtOne => !family.is_multiplicative(),
        }
    }
}

/// Couplings used by [`draw_bundle`] for the `h, k_j` families.
pub const DRAW_LAMBDAS: [(i64, i64); 5] = [(-1, 2), (1, 1), (3, 1), (-2, 1), (1, 3)];

struct Drawer {
    rng: ChaCha8Rng,
    hamel: bool,
}

impl Drawer {
    fn rational(&mut self) -> Scalar {
        let num = self.rng.gen_range(-6i64..=6);
        let den = self.rng.gen_range(1i64..=6);
        Scalar::ratio(num, den).expect("den > 0")
    }

    fn nonzero_rational(&mut self) -> Scalar {
        loop {
            let r = self.rational();
            if !r.is_zero() {
                return r;
            }
        }
    }

    fn tail(&mut self) -> HamelTail {
        if !self.hamel {
            return HamelTail::zero();
        }
        loop {
            let t = [0; 3].map(|_| self.rng.gen_range(-9i64..=9));
            if t.iter().any(|v| *v != 0) {
                return HamelTail::from_ints(t);
            }
        }
    }

    fn map_with_value(&mut self, at_one: &Scalar) -> AdditiveMap {
        let tail = self.tail();
        AdditiveMap::with_tail(at_one.as_exact().expect("draws are exact"), &tail)
    }

    fn mult(&mut self, variant: DrawVariant) -> Multiplicative {
        match variant {
            DrawVariant::SupportIndicator => Multiplicative::SupportIndicator,
            DrawVariant::OneAtOne => Multiplicative::OneAtOne,
            _ => Multiplicative::power(self.rng.gen_range(2u32..=3)).expect("positive"),
        }
    }

    /// An "arbitrary" function: a scaled cube with a linear drift and offset.
    fn arbitrary(&mut self) -> IntervalFunction {
        let scale = self.nonzero_rational();
        let drift = self.rational();
        let drift = self.map_with_value(&drift);
        let offset = self.rational();
        IntervalFunction::mult_combo(scale, Multiplicative::power(3).expect("positive"), drift, offset)
    }

    fn constants(&mut self, m: usize) -> Vec<Scalar> {
        (0..m).map(|_| self.rational()).collect()
    }
}

/// Deterministic admissible parameter draw for any family.
///
/// Draws avoid degenerate corners that would make the `+1/10` negative
/// control land on another solution (e.g. a constant `f` in family 4.2).
pub fn draw_bundle(family: FamilyTag, n: usize, m: usize, seed: u64, variant: DrawVariant) -> Result<SolutionBundle> {
    let mut dr = Drawer {
        rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d),
        hamel: variant == DrawVariant::Hamel,
    };
    let lambda_pick = |dr: &mut Drawer| {
        let (a, b) = DRAW_LAMBDAS[dr.rng.gen_range(0..DRAW_LAMBDAS.len())];
        Scalar::ratio(a, b).expect("den > 0")
    };
    for _ in 0..1000 {
        let attempt = match family {
            FamilyTag::Phi31i => {
                let phi0 = dr.rational();
                let tail = dr.tail();
                theorem1_construct(n, m, Theorem1Params::CaseI { phi0, tail })
            }
            FamilyTag::Phi31ii => {
                let phi0 = dr.rational();
                let tail = dr.tail();
                theorem1_construct(n, m, Theorem1Params::CaseII { phi0, tail })
            }
            FamilyTag::Phi33 => {
                let mult = dr.mult(variant);
                let b = dr.map_with_value(&Scalar::zero());
                theorem1_construct(n, m, Theorem1Params::Multiplicative { mult, b })
            }
            FamilyTag::F41 | FamilyTag::H51 => {
                let b = dr.map_with_value(&Scalar::zero());
                let arb: Vec<IntervalFunction> = (0..m).map(|_| dr.arbitrary()).collect();
                if family == FamilyTag::F41 {
                    theorem2_construct(n, m, Theorem2Params::Null { b, g: arb })
                } else {
                    let lambda = lambda_pick(&mut dr);
                    theorem3_construct(n, m, &lambda, Theorem3Params::Null { b, k: arb })
                }
            }
            FamilyTag::F42 => {
                let (f0, f1) = (dr.rational(), dr.rational());
                let (a_tail, astar_tail) = (dr.tail(), dr.tail());
                let g0 = dr.constants(m);
                theorem2_construct(n, m, Theorem2Params::Affine { f0, f1, a_tail, astar_tail, g0 })
                    .and_then(reject_constant_primary)
            }
            FamilyTag::H52 => {
                let lambda = lambda_pick(&mut dr);
                let (h0, h1) = (dr.rational(), dr.rational());
                let (a_tail, astar_tail) = (dr.tail(), dr.tail());
                let k0 = dr.constants(m);
                theorem3_construct(n, m, &lambda, Theorem3Params::Affine { h0, h1, a_tail, astar_tail, k0 })
                    .and_then(reject_constant_primary)
            }
            FamilyTag::F44 | FamilyTag::H54 => {
                let lead = dr.nonzero_rational();
                let mult = dr.mult(variant);
                let b = dr.map_with_value(&Scalar::zero());
                let zeros = dr.constants(m);
                if family == FamilyTag::F44 {
                    let astar = dr.map_with_value(&Scalar::sum(&zeros)?.neg());
                    theorem2_construct(n, m, Theorem2Params::Multiplicative { f1: lead, mult, b, astar, g0: zeros })
                } else {
                    let lambda = lambda_pick(&mut dr);
                    let astar = dr.map_with_value(&lambda.mul(&Scalar::sum(&zeros)?)?.neg());
                    theorem3_construct(
                        n,
                        m,
                        &lambda,
                        Theorem3Params::Multiplicative { h1: lead, mult, b, astar, k0: zeros },
                    )
                }
            }
            FamilyTag::R1 => {
                let b1 = dr.rational();
                let b = dr.map_with_value(&b1);
                let c = dr.rational();
                result1_bundle(&b, n, &c)
            }
            FamilyTag::R2 => {
                let mut c = dr.constants(m);
                let a1 = dr.rational();
                // close the constraint A(1) + Σ c_j = 0 through the last constant
                let rest = Scalar::sum(&c[..m - 1])?;
                c[m - 1] = a1.add(&rest)?.neg();
                let a = dr.map_with_value(&a1);
                result2_bundle(&a, &c)
            }
            FamilyTag::None => {
                return Err(Error::UnsupportedEquation("cannot draw family \"none\"".into()));
            }
        };
        match attempt {
            Ok(bundle) => {
                let mut bundle = bundle;
                bundle.params.insert("seed".into(), json!(seed));
                return Ok(bundle);
            }
            Err(Error::CZero | Error::F1Zero | Error::CaseConditionViolated(_) | Error::DegenerateAbscissae) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoConvergence)
}

/// Rejects an affine-family draw whose primary function is constant on the
/// rational points; adding a constant to it yields another solution.
fn reject_constant_primary(bundle: SolutionBundle) -> Result<SolutionBundle> {
    let f = match &bundle.functions {
        BundleFunctions::Eq110 { f, .. } => f.clone(),
        BundleFunctions::Eq18 { h, .. } => transform_h_to_f(h, bundle.lambda.as_ref().expect("eq18 has lambda"))?,
        _ => return Ok(bundle),
    };
    if f.eval(&Scalar::one())? == f.eval(&Scalar::zero())? {
        return Err(Error::DegenerateAbscissae);
    }
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::make_additive;
    use crate::simplex::enumerate_grid;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn sum_over(f: &IntervalFunction, p: &[Scalar]) -> Scalar {
        let vals: Vec<Scalar> = p.iter().map(|x| f.eval(x).unwrap()).collect();
        Scalar::sum(&vals).unwrap()
    }

    #[test]
    fn family_labels_round_trip() {
        for tag in FamilyTag::ALL {
            assert_eq!(tag.label().parse::<FamilyTag>().unwrap(), tag);
        }
        assert!("4.3".parse::<FamilyTag>().is_err());
    }

    #[test]
    fn result1_examples() {
        let psi = result1_construct(&AdditiveMap::identity().scale(&FieldElem::from_rational(q(2))), 3, &s("5")).unwrap();
        assert_eq!(psi.eval(&s("1/2")).unwrap(), s("2"));
        assert_eq!(psi.eval(&s("0")).unwrap(), s("1"));
        for p in enumerate_grid(3, 6).unwrap() {
            assert_eq!(sum_over(&psi, p.components()), s("5"));
        }
        let zero = result1_construct(&AdditiveMap::zero(), 3, &s("0")).unwrap();
        assert_eq!(zero.eval(&s("1/3")).unwrap(), s("0"));

        let hamel = result1_construct(&make_additive(q(0), q(7), q(0), q(0)), 3, &s("0")).unwrap();
        assert_eq!(hamel.eval(&s("1/2*r2")).unwrap(), s("7/2"));
        assert_eq!(result1_construct(&AdditiveMap::zero(), 2, &s("0")).unwrap_err().code(), "k-too-small");
    }

    #[test]
    fn result2_examples() {
        let third = s("-1/3");
        let psi = result2_construct(&AdditiveMap::identity(), &[third.clone(), third.clone(), third]).unwrap();
        let q3: Vec<Scalar> = ["1/2", "1/4", "1/4"].iter().map(|t| s(t)).collect();
        let total: Vec<Scalar> = psi.iter().zip(&q3).map(|(f, x)| f.eval(x).unwrap()).collect();
        assert_eq!(Scalar::sum(&total).unwrap(), Scalar::zero());

        let zeros = vec![Scalar::zero(); 3];
        assert!(result2_construct(&AdditiveMap::zero(), &zeros).is_ok());
        assert_eq!(
            result2_construct(&AdditiveMap::identity(), &zeros).unwrap_err().code(),
            "constraint-2.5-violated"
        );
    }

    #[test]
    fn theorem1_case_checks() {
        let b = theorem1_construct(3, 3, Theorem1Params::CaseI { phi0: s("1/9"), tail: HamelTail::zero() }).unwrap();
        let BundleFunctions::Eq111 { phi } = &b.functions else { panic!() };
        assert_eq!(phi.eval(&s("1/3")).unwrap(), s("-2/9"));
        assert_eq!(phi.eval(&s("1")).unwrap(), s("-8/9"));

        // nφ0(1 − m) = 1 at φ0 = −1/6 for n = m = 3
        let err = theorem1_construct(3, 3, Theorem1Params::CaseI { phi0: s("-1/6"), tail: HamelTail::zero() });
        assert_eq!(err.unwrap_err().code(), "case-condition-violated");

        let b = theorem1_construct(3, 3, Theorem1Params::CaseII { phi0: s("0"), tail: HamelTail::zero() }).unwrap();
        assert_eq!(b.primary().eval(&s("2/5")).unwrap(), s("2/5"));

        let err = theorem1_construct(
            3,
            3,
            Theorem1Params::Multiplicative { mult: Multiplicative::power(2).unwrap(), b: AdditiveMap::identity() },
        );
        assert_eq!(err.unwrap_err().code(), "B1-nonzero");
        assert_eq!(
            theorem1_construct(2, 3, Theorem1Params::CaseII { phi0: s("0"), tail: HamelTail::zero() })
                .unwrap_err()
                .code(),
            "arity-too-small"
        );
    }

    #[test]
    fn theorem2_constraints() {
        let g3 = vec![IntervalFunction::power(3).unwrap(); 3];
        let err = theorem2_construct(3, 3, Theorem2Params::Null { b: AdditiveMap::identity(), g: g3.clone() });
        assert_eq!(err.unwrap_err().code(), "b1-nonzero");
        assert!(theorem2_construct(3, 3, Theorem2Params::Null { b: make_additive(q(0), q(7), q(0), q(0)), g: g3 }).is_ok());

        let affine = |f0: &str, f1: &str| Theorem2Params::Affine {
            f0: s(f0),
            f1: s(f1),
            a_tail: HamelTail::zero(),
            astar_tail: HamelTail::zero(),
            g0: vec![Scalar::zero(); 3],
        };
        // f(1) + 2 f(0) = 0
        assert_eq!(theorem2_construct(3, 3, affine("1", "-2")).unwrap_err().code(), "c-zero");
        let ident = theorem2_construct(3, 3, affine("0", "1")).unwrap();
        let BundleFunctions::Eq110 { f, g } = &ident.functions else { panic!() };
        assert_eq!(f.eval(&s("1/3")).unwrap(), s("1/3"));
        assert_eq!(g[1].eval(&s("1/3")).unwrap(), s("1/3"));

        let mult = |f1: &str, b: AdditiveMap, astar: AdditiveMap, g0: Vec<Scalar>| Theorem2Params::Multiplicative {
            f1: s(f1),
            mult: Multiplicative::power(2).unwrap(),
            b,
            astar,
            g0,
        };
        let zeros = vec![Scalar::zero(); 3];
        assert_eq!(
            theorem2_construct(3, 3, mult("0", AdditiveMap::zero(), AdditiveMap::zero(), zeros.clone())).unwrap_err().code(),
            "f1-zero"
        );
        assert_eq!(
            theorem2_construct(3, 3, mult("1", AdditiveMap::identity(), AdditiveMap::zero(), zeros.clone())).unwrap_err().code(),
            "B1-nonzero"
        );
        let g0 = vec![s("1"), s("0"), s("0")];
        assert_eq!(
            theorem2_construct(3, 3, mult("1", AdditiveMap::zero(), AdditiveMap::zero(), g0.clone())).unwrap_err().code(),
            "A*-constraint-violated"
        );
        let astar = AdditiveMap::linear(&FieldElem::from_rational(q(-1)));
        assert!(theorem2_construct(3, 3, mult("1", AdditiveMap::zero(), astar, g0)).is_ok());
        assert_eq!(
            theorem2_construct(3, 4, mult("1", AdditiveMap::zero(), AdditiveMap::zero(), zeros)).unwrap_err().code(),
            "arity-mismatch"
        );
    }

    #[test]
    fn theorem3_example_54() {
        let params = Theorem3Params::Multiplicative {
            h1: s("-2"),
            mult: Multiplicative::power(2).unwrap(),
            b: AdditiveMap::zero(),
            astar: AdditiveMap::zero(),
            k0: vec![Scalar::zero(); 3],
        };
        let b = theorem3_construct(3, 3, &s("-1/2"), params).unwrap();
        assert_eq!(b.family, FamilyTag::H54);
        let BundleFunctions::Eq18 { h, .. } = &b.functions else { panic!() };
        // h(p) = (2p² − p)/λ
        for x in ["0", "1/3", "1/2", "1"] {
            let p = s(x);
            let expect = p.mul(&p).unwrap().scale_int(2).sub(&p).unwrap().div(&s("-1/2")).unwrap();
            assert_eq!(h.eval(&p).unwrap(), expect);
        }
        assert_eq!(h.eval(&s("1")).unwrap(), s("-2"));

        // λh(1) + 1 = 0
        let bad = Theorem3Params::Multiplicative {
            h1: s("2"),
            mult: Multiplicative::power(2).unwrap(),
            b: AdditiveMap::zero(),
            astar: AdditiveMap::zero(),
            k0: vec![Scalar::zero(); 3],
        };
        assert_eq!(theorem3_construct(3, 3, &s("-1/2"), bad).unwrap_err().code(), "f1-zero");
        let any = Theorem3Params::Null { b: AdditiveMap::zero(), k: vec![IntervalFunction::zero(); 3] };
        assert_eq!(theorem3_construct(3, 3, &Scalar::zero(), any).unwrap_err().code(), "lambda-zero");
    }

    #[test]
    fn theorem3_null_keeps_arbitrary_k() {
        let k = vec![IntervalFunction::power(2).unwrap(); 3];
        let b = theorem3_construct(3, 3, &s("1"), Theorem3Params::Null { b: AdditiveMap::zero(), k: k.clone() }).unwrap();
        let BundleFunctions::Eq18 { h, k: got } = &b.functions else { panic!() };
        assert_eq!(got, &k);
        assert_eq!(h.eval(&s("1/4")).unwrap(), s("-1/4"));
    }

    #[test]
    fn transform_examples() {
        let h = IntervalFunction::mult_combo(s("-2"), Multiplicative::power(2).unwrap(), AdditiveMap::identity(), s("0"));
        assert_eq!(h.eval(&s("1/3")).unwrap(), s("4/9"));
        let f = transform_h_to_f(&h, &s("-1/2")).unwrap();
        let points: Vec<Scalar> = (0..=6).map(|k| Scalar::ratio(k, 6).unwrap()).collect();
        for x in &points {
            assert_eq!(f.eval(x).unwrap(), x.mul(x).unwrap());
        }
        let id = transform_h_to_f(&IntervalFunction::zero(), &s("3")).unwrap();
        for x in &points {
            assert_eq!(id.eval(x).unwrap(), x.clone());
        }
        let back = transform_f_to_h(&transform_h_to_f(&h, &s("-1/2")).unwrap(), &s("-1/2")).unwrap();
        for x in &points {
            assert_eq!(back.eval(x).unwrap(), h.eval(x).unwrap());
        }
        let h2 = transform_f_to_h(&IntervalFunction::power(2).unwrap(), &s("-1/2")).unwrap();
        for x in &points {
            assert_eq!(h2.eval(x).unwrap(), h.eval(x).unwrap());
        }
        assert_eq!(transform_h_to_f(&h, &Scalar::zero()).unwrap_err().code(), "lambda-zero");
        assert_eq!(transform_f_to_h(&h, &Scalar::zero()).unwrap_err().code(), "lambda-zero");
    }

    #[test]
    fn draws_are_deterministic_and_tagged() {
        for family in FamilyTag::THEOREMS.iter().chain(&[FamilyTag::R1, FamilyTag::R2]) {
            for variant in [DrawVariant::Plain, DrawVariant::Hamel, DrawVariant::SupportIndicator] {
                let a = draw_bundle(*family, 3, 3, 11, variant).unwrap();
                let b = draw_bundle(*family, 3, 3, 11, variant).unwrap();
                assert_eq!(a, b);
                assert_eq!(a.family, *family);
                assert_eq!(Some(a.equation()), family.equation());
            }
        }
    }

    #[test]
    fn perturbed_bundle_shifts_primary_only() {
        let b = draw_bundle(FamilyTag::H54, 3, 3, 5, DrawVariant::Plain).unwrap();
        let p = b.perturbed(&s("1/10")).unwrap();
        assert_eq!(p.family, FamilyTag::None);
        let x = s("1/3");
        assert_eq!(
            p.primary().eval(&x).unwrap(),
            b.primary().eval(&x).unwrap().add(&s("1/10")).unwrap()
        );
        assert_eq!(p.all_functions()[1], b.all_functions()[1]);
    }
}
