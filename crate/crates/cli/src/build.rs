//! Canonical bundles for `--family` without `--seed`.

use sumform::{
    lambda_of_alpha, result1_bundle, result2_bundle, theorem1_construct, theorem2_construct, theorem3_construct, AdditiveMap,
    Alpha, BundleFunctions, EquationId, Error, FamilyTag, HamelTail, IntervalFunction, Multiplicative, Result, Scalar,
    SolutionBundle, Theorem1Params, Theorem2Params, Theorem3Params,
};

/// `p ↦ p^α`, kept exact for positive integer α.
pub fn power_map(alpha: f64) -> Result<Multiplicative> {
    if alpha.fract() == 0.0 && alpha >= 1.0 && alpha <= u32::MAX as f64 {
        Multiplicative::power(alpha as u32)
    } else {
        Multiplicative::real_power(alpha)
    }
}

/// Coupling for the `h, k_j` families: `--lambda`, else `2^{1−α} − 1`.
pub fn coupling(lambda: Option<Scalar>, alpha: f64) -> Result<Scalar> {
    match lambda {
        Some(l) => Ok(l),
        None => Ok(lambda_of_alpha(Alpha::new(alpha)?)),
    }
}

/// The simplest member of each family, with multiplicative part `p^α`.
pub fn canonical_bundle(
    family: FamilyTag,
    n: usize,
    m: usize,
    alpha: f64,
    lambda: Option<Scalar>,
) -> Result<SolutionBundle> {
    let zeros = || vec![Scalar::zero(); m];
    let cube = || IntervalFunction::power(3);
    match family {
        FamilyTag::Phi31i => theorem1_construct(
            n,
            m,
            Theorem1Params::CaseI {
                phi0: Scalar::ratio(1, 9)?,
                tail: HamelTail::zero(),
            },
        ),
        FamilyTag::Phi31ii => theorem1_construct(
            n,
            m,
            Theorem1Params::CaseII {
                phi0: Scalar::zero(),
                tail: HamelTail::zero(),
            },
        ),
        FamilyTag::Phi33 => theorem1_construct(
            n,
            m,
            Theorem1Params::Multiplicative {
                mult: power_map(alpha)?,
                b: AdditiveMap::zero(),
            },
        ),
        FamilyTag::F41 => theorem2_construct(
            n,
            m,
            Theorem2Params::Null {
                b: AdditiveMap::zero(),
                g: vec![cube()?; m],
            },
        ),
        FamilyTag::F42 => theorem2_construct(
            n,
            m,
            Theorem2Params::Affine {
                f0: Scalar::zero(),
                f1: Scalar::one(),
                a_tail: HamelTail::zero(),
                astar_tail: HamelTail::zero(),
                g0: zeros(),
            },
        ),
        FamilyTag::F44 => theorem2_construct(
            n,
            m,
            Theorem2Params::Multiplicative {
                f1: Scalar::one(),
                mult: power_map(alpha)?,
                b: AdditiveMap::zero(),
                astar: AdditiveMap::zero(),
                g0: zeros(),
            },
        ),
        FamilyTag::H51 | FamilyTag::H52 | FamilyTag::H54 => {
            let lambda = coupling(lambda, alpha)?;
            let params = match family {
                FamilyTag::H51 => Theorem3Params::Null {
                    b: AdditiveMap::zero(),
                    k: vec![cube()?; m],
                },
                FamilyTag::H52 => Theorem3Params::Affine {
                    h0: Scalar::zero(),
                    h1: Scalar::zero(),
                    a_tail: HamelTail::zero(),
                    astar_tail: HamelTail::zero(),
                    k0: zeros(),
                },
                _ => Theorem3Params::Multiplicative {
                    h1: Scalar::zero(),
                    mult: power_map(alpha)?,
                    b: AdditiveMap::zero(),
                    astar: AdditiveMap::zero(),
                    k0: zeros(),
                },
            };
            theorem3_construct(n, m, &lambda, params)
        }
        FamilyTag::R1 => {
            result1_bundle(&AdditiveMap::identity(), n, &Scalar::one())
        }
        FamilyTag::R2 => {
            let c = vec![Scalar::ratio(-1, n as i64)?; n];
            result2_bundle(&AdditiveMap::identity(), &c)
        }
        FamilyTag::None => Err(Error::UnsupportedEquation("family \"none\" has no constructor".into())),
    }
}

/// Check that an explicitly requested equation matches the bundle.
pub fn check_equation(bundle: &SolutionBundle, requested: Option<EquationId>) -> Result<EquationId> {
    let actual = bundle.equation();
    match requested {
        None => Ok(actual),
        Some(EquationId::Eq15) if actual == EquationId::Eq18 => {
            if let BundleFunctions::Eq18 { h, k } = &bundle.functions {
                if k.iter().all(|kj| kj == h) {
                    return Ok(EquationId::Eq15);
                }
            }
            Err(Error::UnsupportedEquation("equation 1.5 needs k_j = h".into()))
        }
        Some(id) if id == actual => Ok(id),
        Some(id) => Err(Error::UnsupportedEquation(format!(
            "family {} solves equation {actual}, not {id}",
            bundle.family
        ))),
    }
}
