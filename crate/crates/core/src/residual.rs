//! Both sides of every sum-form equation, single-pair residuals, and the
//! exhaustive grid verifier.
//!
//! Residuals are always `LHS − RHS` with the double sum on the left.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::families::{BundleFunctions, FamilyTag, SolutionBundle};
use crate::maps::IntervalFunction;
use crate::scalar::{Backend, Scalar};
use crate::simplex::{enumerate_grid, irrational_points, sample_random, Distribution};

/// Relative tolerance used when a sweep runs in floating point.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EquationId {
    /// `h, k_j = h` with coupling `λ`.
    Eq15,
    /// `f_ij, h_i, k_j` with coupling `λ`.
    Eq17,
    /// `h, k_j` with coupling `λ`.
    Eq18,
    /// `f, g_j`.
    Eq110,
    /// `φ`.
    Eq111,
    /// `Σ ψ(p_i) = c`.
    Eq21,
    /// `Σ ψ_j(q_j) = 0`.
    Eq23,
}

impl EquationId {
    pub const ALL: [EquationId; 7] = [
        EquationId::Eq15,
        EquationId::Eq17,
        EquationId::Eq18,
        EquationId::Eq110,
        EquationId::Eq111,
        EquationId::Eq21,
        EquationId::Eq23,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            EquationId::Eq15 => "1.5",
            EquationId::Eq17 => "1.7",
            EquationId::Eq18 => "1.8",
            EquationId::Eq110 => "1.10",
            EquationId::Eq111 => "1.11",
            EquationId::Eq21 => "2.1",
            EquationId::Eq23 => "2.3",
        }
    }

    /// Equations quantified over a single distribution.
    pub fn is_single(&self) -> bool {
        matches!(self, EquationId::Eq21 | EquationId::Eq23)
    }

    pub fn needs_lambda(&self) -> bool {
        matches!(self, EquationId::Eq15 | EquationId::Eq17 | EquationId::Eq18)
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EquationId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().trim_start_matches("Eq").trim_start_matches("eq");
        EquationId::ALL
            .iter()
            .copied()
            .find(|e| e.label() == key || e.label().replace('.', "") == key)
            .ok_or_else(|| Error::Parse(format!("unknown equation {s:?}")))
    }
}

/// An equation together with its arities and coupling constant.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationSpec {
    pub id: EquationId,
    /// `n`, or `k` for the single-distribution equations.
    pub n: usize,
    pub m: usize,
    pub lambda: Option<Scalar>,
}

impl EquationSpec {
    pub fn new(id: EquationId, n: usize, m: usize, lambda: Option<Scalar>) -> Result<Self> {
        let (n, m) = if id.is_single() { (n, n) } else { (n, m) };
        if id == EquationId::Eq21 && n < 3 {
            return Err(Error::KTooSmall(n));
        }
        if n < 3 || m < 3 {
            return Err(Error::ArityTooSmall(format!("need n >= 3 and m >= 3, got n = {n}, m = {m}")));
        }
        let lambda = if id.needs_lambda() {
            match lambda {
                Some(l) if !l.is_zero() => Some(l),
                _ => return Err(Error::LambdaZero),
            }
        } else {
            None
        };
        Ok(EquationSpec { id, n, m, lambda })
    }

    pub fn for_bundle(bundle: &SolutionBundle) -> Result<Self> {
        EquationSpec::new(bundle.equation(), bundle.n, bundle.m, bundle.lambda.clone())
    }
}

/// The two sides of an equation at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Sides {
    pub lhs: Scalar,
    pub rhs: Scalar,
}

impl Sides {
    pub fn residual(&self) -> Result<Scalar> {
        self.lhs.sub(&self.rhs)
    }

    fn max_abs(&self) -> f64 {
        self.lhs.to_f64().abs().max(self.rhs.to_f64().abs())
    }
}

fn working_backend<'a>(
    dists: &[&Distribution],
    funcs: impl IntoIterator<Item = &'a IntervalFunction>,
    params: &[&Scalar],
) -> Result<Backend> {
    let first = dists[0].backend();
    if dists.iter().any(|d| d.backend() != first) {
        return Err(Error::BackendMismatch);
    }
    let float = first == Backend::Float
        || params.iter().any(|s| !s.is_exact())
        || funcs.into_iter().any(|f| f.requires_float());
    Ok(if float { Backend::Float } else { Backend::Exact })
}

fn lowered(d: &Distribution, backend: Backend) -> Distribution {
    match backend {
        Backend::Float => d.to_float(),
        Backend::Exact => d.clone(),
    }
}

fn sum_at(f: &IntervalFunction, p: &Distribution) -> Result<Scalar> {
    let vals = p.components().iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    Scalar::sum(&vals)
}

fn paired_sum(fs: &[IntervalFunction], q: &Distribution) -> Result<Scalar> {
    let vals = fs
        .iter()
        .zip(q.components())
        .map(|(f, x)| f.eval(x))
        .collect::<Result<Vec<_>>>()?;
    Scalar::sum(&vals)
}

fn double_sum(f: &IntervalFunction, p: &Distribution, q: &Distribution) -> Result<Scalar> {
    let mut vals = Vec::with_capacity(p.len() * q.len());
    for pi in p.components() {
        for qj in q.components() {
            vals.push(f.eval(&pi.mul(qj)?)?);
        }
    }
    Scalar::sum(&vals)
}

fn check_len(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::ArityMismatch(format!("{what} has {got} entries, expected {expected}")));
    }
    Ok(())
}

/// Sides of `ΣΣ f(p_i q_j) = Σ f(p_i) · Σ g_j(q_j)`.
pub fn sides_eq110(f: &IntervalFunction, g: &[IntervalFunction], p: &Distribution, q: &Distribution) -> Result<Sides> {
    check_len("g", g.len(), q.len())?;
    let backend = working_backend(&[p, q], std::iter::once(f).chain(g), &[])?;
    let (p, q) = (lowered(p, backend), lowered(q, backend));
    let lhs = double_sum(f, &p, &q)?;
    let rhs = sum_at(f, &p)?.mul(&paired_sum(g, &q)?)?;
    Ok(Sides { lhs, rhs })
}

pub fn residual_eq110(f: &IntervalFunction, g: &[IntervalFunction], p: &Distribution, q: &Distribution) -> Result<Scalar> {
    sides_eq110(f, g, p, q)?.residual()
}

/// Sides of `ΣΣ φ(p_i q_j) = Σ φ(p_i) Σ φ(q_j) + m(n−1) φ(0) Σ φ(p_i)`.
pub fn sides_eq111(phi: &IntervalFunction, p: &Distribution, q: &Distribution, n: usize, m: usize) -> Result<Sides> {
    check_len("p", p.len(), n)?;
    check_len("q", q.len(), m)?;
    let backend = working_backend(&[p, q], [phi], &[])?;
    let (p, q) = (lowered(p, backend), lowered(q, backend));
    let lhs = double_sum(phi, &p, &q)?;
    let sp = sum_at(phi, &p)?;
    let phi0 = phi.eval(&Scalar::zero().to_backend(backend)?)?;
    let rhs = sp
        .mul(&sum_at(phi, &q)?)?
        .add(&phi0.scale_int((m * (n - 1)) as i64).mul(&sp)?)?;
    Ok(Sides { lhs, rhs })
}

pub fn residual_eq111(phi: &IntervalFunction, p: &Distribution, q: &Distribution, n: usize, m: usize) -> Result<Scalar> {
    sides_eq111(phi, p, q, n, m)?.residual()
}

/// Sides of `ΣΣ h(p_i q_j) = Σ h(p_i) + Σ k_j(q_j) + λ Σ h(p_i) Σ k_j(q_j)`.
pub fn sides_eq18(
    h: &IntervalFunction,
    k: &[IntervalFunction],
    lambda: &Scalar,
    p: &Distribution,
    q: &Distribution,
) -> Result<Sides> {
    if lambda.is_zero() {
        return Err(Error::LambdaZero);
    }
    check_len("k", k.len(), q.len())?;
    let backend = working_backend(&[p, q], std::iter::once(h).chain(k), &[lambda])?;
    let (p, q) = (lowered(p, backend), lowered(q, backend));
    let lambda = lambda.to_backend(backend)?;
    let lhs = double_sum(h, &p, &q)?;
    let sh = sum_at(h, &p)?;
    let sk = paired_sum(k, &q)?;
    let rhs = sh.add(&sk)?.add(&lambda.mul(&sh)?.mul(&sk)?)?;
    Ok(Sides { lhs, rhs })
}

pub fn residual_eq18(
    h: &IntervalFunction,
    k: &[IntervalFunction],
    lambda: &Scalar,
    p: &Distribution,
    q: &Distribution,
) -> Result<Scalar> {
    sides_eq18(h, k, lambda, p, q)?.residual()
}

/// The `k_j = h` special case of [`residual_eq18`].
pub fn residual_eq15(h: &IntervalFunction, lambda: &Scalar, p: &Distribution, q: &Distribution) -> Result<Scalar> {
    let k = vec![h.clone(); q.len()];
    residual_eq18(h, &k, lambda, p, q)
}

/// Sides of `ΣΣ f_ij(p_i q_j) = Σ h_i(p_i) + Σ k_j(q_j) + λ Σ h_i(p_i) Σ k_j(q_j)`.
pub fn sides_eq17(
    f: &[Vec<IntervalFunction>],
    h: &[IntervalFunction],
    k: &[IntervalFunction],
    lambda: &Scalar,
    p: &Distribution,
    q: &Distribution,
) -> Result<Sides> {
    if lambda.is_zero() {
        return Err(Error::LambdaZero);
    }
    check_len("f rows", f.len(), p.len())?;
    for row in f {
        check_len("f row", row.len(), q.len())?;
    }
    check_len("h", h.len(), p.len())?;
    check_len("k", k.len(), q.len())?;
    let funcs = f.iter().flatten().chain(h).chain(k);
    let backend = working_backend(&[p, q], funcs, &[lambda])?;
    let (p, q) = (lowered(p, backend), lowered(q, backend));
    let lambda = lambda.to_backend(backend)?;
    let mut vals = Vec::with_capacity(p.len() * q.len());
    for (row, pi) in f.iter().zip(p.components()) {
        for (fij, qj) in row.iter().zip(q.components()) {
            vals.push(fij.eval(&pi.mul(qj)?)?);
        }
    }
    let lhs = Scalar::sum(&vals)?;
    let sh = paired_sum(h, &p)?;
    let sk = paired_sum(k, &q)?;
    let rhs = sh.add(&sk)?.add(&lambda.mul(&sh)?.mul(&sk)?)?;
    Ok(Sides { lhs, rhs })
}

pub fn residual_eq17(
    f: &[Vec<IntervalFunction>],
    h: &[IntervalFunction],
    k: &[IntervalFunction],
    lambda: &Scalar,
    p: &Distribution,
    q: &Distribution,
) -> Result<Scalar> {
    sides_eq17(f, h, k, lambda, p, q)?.residual()
}

/// Sides of `Σ ψ(p_i) = c`.
pub fn sides_eq21(psi: &IntervalFunction, k: usize, c: &Scalar, p: &Distribution) -> Result<Sides> {
    check_len("p", p.len(), k)?;
    let backend = working_backend(&[p], [psi], &[c])?;
    let p = lowered(p, backend);
    Ok(Sides {
        lhs: sum_at(psi, &p)?,
        rhs: c.to_backend(backend)?,
    })
}

pub fn residual_eq21(psi: &IntervalFunction, k: usize, c: &Scalar, p: &Distribution) -> Result<Scalar> {
    sides_eq21(psi, k, c, p)?.residual()
}

/// Sides of `Σ ψ_j(q_j) = 0`.
pub fn sides_eq23(psi: &[IntervalFunction], q: &Distribution) -> Result<Sides> {
    check_len("psi", psi.len(), q.len())?;
    let backend = working_backend(&[q], psi, &[])?;
    let q = lowered(q, backend);
    Ok(Sides {
        lhs: paired_sum(psi, &q)?,
        rhs: Scalar::zero().to_backend(backend)?,
    })
}

pub fn residual_eq23(psi: &[IntervalFunction], q: &Distribution) -> Result<Scalar> {
    sides_eq23(psi, q)?.residual()
}

/// The two single-distribution residuals: `ψ` with `c` for (2.1), the list
/// `ψ_j` for (2.3).
pub fn residual_result_eqs(psi: &[IntervalFunction], c: Option<&Scalar>, p: &Distribution) -> Result<Scalar> {
    match (psi, c) {
        ([single], Some(c)) => residual_eq21(single, p.len(), c, p),
        (list, None) => residual_eq23(list, p),
        _ => Err(Error::ArityMismatch("a constant needs exactly one psi".into())),
    }
}

/// Sides of whatever equation `bundle` solves, at `(p, q)`; `q` is ignored
/// by the single-distribution equations.
pub fn bundle_sides(bundle: &SolutionBundle, p: &Distribution, q: &Distribution) -> Result<Sides> {
    match &bundle.functions {
        BundleFunctions::Eq110 { f, g } => sides_eq110(f, g, p, q),
        BundleFunctions::Eq18 { h, k } => {
            let lambda = bundle.lambda.as_ref().ok_or(Error::LambdaZero)?;
            sides_eq18(h, k, lambda, p, q)
        }
        BundleFunctions::Eq111 { phi } => sides_eq111(phi, p, q, bundle.n, bundle.m),
        BundleFunctions::Eq21 { psi } => {
            let c = bundle
                .constant
                .as_ref()
                .ok_or_else(|| Error::ArityMismatch("equation 2.1 bundle without constant".into()))?;
            sides_eq21(psi, bundle.n, c, p)
        }
        BundleFunctions::Eq23 { psi } => sides_eq23(psi, p),
    }
}

/// Where a sweep attained its maximum.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Pair(Distribution, Distribution),
    Single(Distribution),
}

/// Sweep options beyond the grid resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepOptions {
    /// Append the fixed irrational-coordinate distributions to each grid.
    pub irrational: bool,
    /// Evaluate in floating point even when the bundle is exact.
    pub float: bool,
}

impl SweepOptions {
    /// Irrational points are appended unless a table function is involved,
    /// since tables are only defined at listed rational abscissae.
    pub fn for_bundle(bundle: &SolutionBundle) -> Self {
        let has_table = bundle
            .all_functions()
            .iter()
            .any(|f| matches!(f, IntervalFunction::Table { .. }));
        SweepOptions {
            irrational: !has_table,
            float: false,
        }
    }
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            irrational: true,
            float: false,
        }
    }
}

/// What a sweep ranged over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepGrid {
    /// Every grid point of resolution `d`.
    Grid { d: usize },
    /// `count` seeded random pairs.
    Sampled { count: usize, seed: u64 },
}

/// Outcome of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub equation: EquationSpec,
    pub family: FamilyTag,
    pub grid: SweepGrid,
    pub exact: bool,
    pub max_abs_residual: Scalar,
    /// Largest magnitude of either side over the sweep.
    pub max_abs_side: f64,
    pub witness: Witness,
    pub evaluations: usize,
    /// Pairs (or single distributions) with a zero component on every side.
    pub boundary_pairs: usize,
    pub irrational: bool,
}

impl ResidualReport {
    /// Exact sweeps pass only on an exact zero; float sweeps use the
    /// relative tolerance.
    pub fn passed(&self) -> bool {
        if self.exact {
            self.max_abs_residual.is_zero()
        } else {
            let r = self.max_abs_residual.to_f64();
            r.is_finite() && r <= FLOAT_TOLERANCE * (1.0 + self.max_abs_side)
        }
    }

    pub fn to_json(&self) -> Value {
        let dist = |d: &Distribution| Value::Array(d.components().iter().map(|s| json!(s.to_string())).collect());
        let witness = match &self.witness {
            Witness::Pair(p, q) => json!({"p": dist(p), "q": dist(q)}),
            Witness::Single(p) => json!({"p": dist(p)}),
        };
        let mut out = Map::new();
        out.insert("equation".into(), json!(self.equation.id.label()));
        out.insert("family".into(), json!(self.family.label()));
        out.insert("n".into(), json!(self.equation.n));
        out.insert("m".into(), json!(self.equation.m));
        match self.grid {
            SweepGrid::Grid { d } => {
                out.insert("d".into(), json!(d));
            }
            SweepGrid::Sampled { count, seed } => {
                out.insert("samples".into(), json!(count));
                out.insert("seed".into(), json!(seed));
            }
        }
        if let Some(l) = &self.equation.lambda {
            out.insert("lambda".into(), json!(l.to_string()));
        }
        out.insert("exact".into(), json!(self.exact));
        out.insert("max_abs_residual".into(), json!(self.max_abs_residual.to_string()));
        out.insert("witness".into(), witness);
        out.insert("evaluations".into(), json!(self.evaluations));
        out.insert("boundary_pairs".into(), json!(self.boundary_pairs));
        out.insert("irrational_points".into(), json!(self.irrational));
        out.insert("passed".into(), json!(self.passed()));
        Value::Object(out)
    }
}

/// Grid of `Γ_n` at resolution `d`, optionally followed by the irrational
/// points, lowered to `backend`.
pub fn sweep_points(n: usize, d: usize, irrational: bool, backend: Backend) -> Result<Vec<Distribution>> {
    let mut pts: Vec<Distribution> = enumerate_grid(n, d)?.collect();
    if irrational {
        pts.extend(irrational_points(n));
    }
    Ok(pts.iter().map(|p| lowered(p, backend)).collect())
}

pub fn verify_over_grid(spec: &EquationSpec, bundle: &SolutionBundle, d: usize) -> Result<ResidualReport> {
    verify_over_grid_with(spec, bundle, d, SweepOptions::for_bundle(bundle))
}

fn check_bundle(spec: &EquationSpec, bundle: &SolutionBundle) -> Result<()> {
    let expected = EquationSpec::for_bundle(bundle)?;
    let matches = match spec.id {
        EquationId::Eq15 => expected.id == EquationId::Eq18,
        id => expected.id == id,
    };
    if !matches || expected.n != spec.n || expected.m != spec.m {
        return Err(Error::UnsupportedEquation(format!(
            "bundle solves equation {} with n = {}, m = {}; requested {} with n = {}, m = {}",
            expected.id, expected.n, expected.m, spec.id, spec.n, spec.m
        )));
    }
    if spec.id == EquationId::Eq15 {
        if let BundleFunctions::Eq18 { h, k } = &bundle.functions {
            if k.iter().any(|kj| kj != h) {
                return Err(Error::UnsupportedEquation("equation 1.5 needs k_j = h".into()));
            }
        }
    }
    Ok(())
}

/// Evaluates every case in parallel and keeps the first strictly maximal
/// residual, so the witness does not depend on scheduling.
fn sweep(
    spec: &EquationSpec,
    bundle: &SolutionBundle,
    grid: SweepGrid,
    exact: bool,
    irrational: bool,
    cases: Vec<(Distribution, Distribution)>,
) -> Result<ResidualReport> {
    let single = spec.id.is_single();
    let results = cases
        .par_iter()
        .map(|(p, q)| bundle_sides(bundle, p, q))
        .collect::<Result<Vec<_>>>()?;
    let boundary = cases
        .iter()
        .filter(|(p, q)| p.has_zero() && (single || q.has_zero()))
        .count();
    let mut best = 0usize;
    let mut best_abs = results[0].residual()?.abs();
    let mut max_side = 0f64;
    for (idx, s) in results.iter().enumerate() {
        max_side = max_side.max(s.max_abs());
        let r = s.residual()?.abs();
        if r.compare(&best_abs)? == Ordering::Greater {
            best = idx;
            best_abs = r;
        }
    }
    let (p, q) = cases[best].clone();
    let witness = if single { Witness::Single(p) } else { Witness::Pair(p, q) };
    Ok(ResidualReport {
        equation: spec.clone(),
        family: bundle.family,
        grid,
        exact,
        max_abs_residual: best_abs,
        max_abs_side: max_side,
        witness,
        evaluations: results.len(),
        boundary_pairs: boundary,
        irrational,
    })
}

/// Evaluates the residual on every grid pair (every grid point for the
/// single-distribution equations). The witness is the first strictly
/// maximal entry in lexicographic pair order.
pub fn verify_over_grid_with(
    spec: &EquationSpec,
    bundle: &SolutionBundle,
    d: usize,
    options: SweepOptions,
) -> Result<ResidualReport> {
    check_bundle(spec, bundle)?;
    let exact = !bundle.requires_float() && !options.float;
    let backend = if exact { Backend::Exact } else { Backend::Float };
    let ps = sweep_points(spec.n, d, options.irrational, backend)?;
    let cases: Vec<(Distribution, Distribution)> = if spec.id.is_single() {
        ps.into_iter().map(|p| (p.clone(), p)).collect()
    } else {
        let qs = sweep_points(spec.m, d, options.irrational, backend)?;
        ps.iter()
            .flat_map(|p| qs.iter().map(move |q| (p.clone(), q.clone())))
            .collect()
    };
    sweep(spec, bundle, SweepGrid::Grid { d }, exact, options.irrational, cases)
}

/// Evaluates the residual on `count` seeded random pairs whose zero counts
/// cycle through every possible value, so boundary cases are always drawn.
pub fn verify_sampled(
    spec: &EquationSpec,
    bundle: &SolutionBundle,
    count: usize,
    seed: u64,
    float: bool,
) -> Result<ResidualReport> {
    check_bundle(spec, bundle)?;
    if count == 0 {
        return Err(Error::InvalidGrid("sample count must be positive".into()));
    }
    let exact = !bundle.requires_float() && !float;
    let backend = if exact { Backend::Exact } else { Backend::Float };
    let cases = (0..count)
        .map(|i| {
            let base = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(2 * i as u64);
            let p = sample_random(spec.n, base, i % spec.n)?;
            let q = if spec.id.is_single() {
                p.clone()
            } else {
                sample_random(spec.m, base + 1, (i / spec.n) % spec.m)?
            };
            Ok((lowered(&p, backend), lowered(&q, backend)))
        })
        .collect::<Result<Vec<_>>>()?;
    sweep(spec, bundle, SweepGrid::Sampled { count, seed }, exact, false, cases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::transform_h_to_f;
    use crate::maps::{AdditiveMap, Multiplicative};
    use crate::simplex::make_distribution;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    fn dist(parts: &[&str]) -> Distribution {
        make_distribution(parts.iter().map(|t| s(t)).collect()).unwrap()
    }

    fn sq() -> IntervalFunction {
        IntervalFunction::power(2).unwrap()
    }

    /// `2p − 2p²`
    fn h_alpha2() -> IntervalFunction {
        IntervalFunction::transformed(sq(), s("-1/2")).unwrap()
    }

    #[test]
    fn eq110_examples() {
        let p = dist(&["1/2", "1/2", "0"]);
        let q = dist(&["1/3", "1/3", "1/3"]);
        let sides = sides_eq110(&sq(), &vec![sq(); 3], &p, &q).unwrap();
        assert_eq!(sides.lhs, s("1/6"));
        assert_eq!(sides.residual().unwrap(), Scalar::zero());
        let id = IntervalFunction::identity();
        assert_eq!(residual_eq110(&id, &vec![id.clone(); 3], &p, &q).unwrap(), Scalar::zero());
        assert_eq!(residual_eq110(&sq(), &vec![id; 3], &p, &q).unwrap(), s("-1/3"));
        assert_eq!(
            residual_eq110(&sq(), &vec![sq(); 2], &p, &q).unwrap_err().code(),
            "arity-mismatch"
        );
        assert_eq!(
            residual_eq110(&sq(), &vec![sq(); 3], &p, &q.to_float()).unwrap_err().code(),
            "backend-mismatch"
        );
    }

    #[test]
    fn eq111_examples() {
        let phi = IntervalFunction::affine(AdditiveMap::identity().scale(&s("-1").as_exact().unwrap().clone()), s("1/9"));
        for p in enumerate_grid(3, 3).unwrap() {
            for q in enumerate_grid(3, 3).unwrap() {
                assert_eq!(residual_eq111(&phi, &p, &q, 3, 3).unwrap(), Scalar::zero());
            }
        }
        let u = dist(&["1/3", "1/3", "1/3"]);
        let id = IntervalFunction::identity();
        assert_eq!(residual_eq111(&id, &u, &u, 3, 3).unwrap(), Scalar::zero());
        let bumped = sq().plus_constant(&s("1/10")).unwrap();
        // LHS = 1/9 + 9/10, Σφ = 1/3 + 3/10, φ(0) = 1/10
        let sp = s("19/30");
        let expect = s("1/9")
            .add(&s("9/10"))
            .unwrap()
            .sub(&sp.mul(&sp).unwrap())
            .unwrap()
            .sub(&s("6/10").mul(&sp).unwrap())
            .unwrap();
        assert_eq!(residual_eq111(&bumped, &u, &u, 3, 3).unwrap(), expect);
        assert!(!expect.is_zero());
    }

    #[test]
    fn eq18_examples() {
        let h = h_alpha2();
        let lambda = s("-1/2");
        let grid: Vec<Distribution> = enumerate_grid(3, 3).unwrap().collect();
        for p in &grid {
            for q in &grid {
                assert_eq!(residual_eq18(&h, &vec![h.clone(); 3], &lambda, p, q).unwrap(), Scalar::zero());
                assert_eq!(residual_eq15(&h, &lambda, p, q).unwrap(), Scalar::zero());
            }
        }
        let zero = IntervalFunction::zero();
        let u = dist(&["1/3", "1/3", "1/3"]);
        assert_eq!(residual_eq18(&zero, &vec![zero.clone(); 3], &s("3"), &u, &u).unwrap(), Scalar::zero());
        assert!(!residual_eq18(&h, &vec![zero.clone(); 3], &lambda, &u, &u).unwrap().is_zero());
        assert_eq!(
            residual_eq18(&h, &vec![zero; 3], &Scalar::zero(), &u, &u).unwrap_err().code(),
            "lambda-zero"
        );
    }

    #[test]
    fn eq17_examples() {
        let h = h_alpha2();
        let lambda = s("-1/2");
        let f = vec![vec![h.clone(); 3]; 3];
        let hs = vec![h.clone(); 3];
        let p = dist(&["1/2", "1/3", "1/6"]);
        let q = dist(&["1/4", "0", "3/4"]);
        assert_eq!(residual_eq17(&f, &hs, &hs, &lambda, &p, &q).unwrap(), Scalar::zero());
        let z = IntervalFunction::zero();
        assert_eq!(
            residual_eq17(&vec![vec![z.clone(); 3]; 3], &vec![z.clone(); 3], &vec![z; 3], &lambda, &p, &q).unwrap(),
            Scalar::zero()
        );
        let mut bumped = f.clone();
        bumped[0][0] = h.plus_constant(&s("1/10")).unwrap();
        assert_eq!(residual_eq17(&bumped, &hs, &hs, &lambda, &p, &q).unwrap(), s("1/10"));
    }

    #[test]
    fn result_eq_examples() {
        let psi = IntervalFunction::affine(AdditiveMap::identity().scale(&s("2").as_exact().unwrap().clone()), s("1"));
        let p = dist(&["1/2", "1/4", "1/4"]);
        assert_eq!(residual_result_eqs(&[psi], Some(&s("5")), &p).unwrap(), Scalar::zero());
        let third = s("-1/3");
        let list = vec![IntervalFunction::affine(AdditiveMap::identity(), third); 3];
        assert_eq!(residual_result_eqs(&list, None, &p).unwrap(), Scalar::zero());
        let u = dist(&["1/3", "1/3", "1/3"]);
        assert_eq!(residual_result_eqs(&[sq()], Some(&s("1")), &u).unwrap(), s("-2/3"));
    }

    #[test]
    fn soundness_link_on_grid() {
        let h = IntervalFunction::mult_combo(s("3"), Multiplicative::power(3).unwrap(), AdditiveMap::identity(), s("1/5"));
        let k = vec![sq(), h.clone(), IntervalFunction::identity()];
        for lambda in [s("-1/2"), s("1"), s("3")] {
            let f = transform_h_to_f(&h, &lambda).unwrap();
            let g: Vec<_> = k.iter().map(|kj| transform_h_to_f(kj, &lambda).unwrap()).collect();
            for p in enumerate_grid(3, 2).unwrap() {
                for q in enumerate_grid(3, 2).unwrap() {
                    let r18 = residual_eq18(&h, &k, &lambda, &p, &q).unwrap();
                    let r110 = residual_eq110(&f, &g, &p, &q).unwrap();
                    assert_eq!(r18, r110.div(&lambda).unwrap());
                }
            }
        }
    }

    #[test]
    fn symmetry_and_permutation() {
        let p = dist(&["1/2", "1/3", "1/6"]);
        let q = dist(&["0", "1/4", "3/4"]);
        let f = IntervalFunction::mult_combo(s("2"), Multiplicative::power(3).unwrap(), AdditiveMap::zero(), s("1/7"));
        let g = vec![f.clone(); 3];
        let r = residual_eq110(&f, &g, &p, &q).unwrap();
        assert_eq!(r, residual_eq110(&f, &g, &q, &p).unwrap());
        assert_eq!(r, residual_eq110(&f, &g, &p.permuted(&[2, 0, 1]).unwrap(), &q).unwrap());
        assert_eq!(r, residual_eq110(&f, &g, &p, &q.permuted(&[1, 2, 0]).unwrap()).unwrap());
    }

    #[test]
    fn equation_ids_parse() {
        for id in EquationId::ALL {
            assert_eq!(id.label().parse::<EquationId>().unwrap(), id);
        }
        assert_eq!("Eq110".parse::<EquationId>().unwrap(), EquationId::Eq110);
        assert!("1.9".parse::<EquationId>().is_err());
        assert_eq!(EquationSpec::new(EquationId::Eq18, 3, 3, None).unwrap_err().code(), "lambda-zero");
        assert_eq!(EquationSpec::new(EquationId::Eq21, 2, 2, None).unwrap_err().code(), "k-too-small");
    }

    #[test]
    fn grid_sweep_examples() {
        use crate::families::{theorem1_construct, theorem2_construct, Theorem1Params, Theorem2Params};
        use crate::maps::make_additive;
        use crate::scalar::Rational;

        let b = theorem1_construct(3, 3, Theorem1Params::Multiplicative { mult: Multiplicative::power(2).unwrap(), b: AdditiveMap::zero() })
            .unwrap();
        let spec = EquationSpec::for_bundle(&b).unwrap();
        let r = verify_over_grid(&spec, &b, 6).unwrap();
        assert!(r.exact && r.passed());
        assert_eq!(r.max_abs_residual, Scalar::zero());
        assert_eq!(r.evaluations, 32 * 32);
        assert!(r.boundary_pairs > 0);
        let rational = verify_over_grid_with(&spec, &b, 6, SweepOptions { irrational: false, float: false }).unwrap();
        assert_eq!(rational.evaluations, 784);

        let bumped = b.perturbed(&s("1/10")).unwrap();
        let r = verify_over_grid(&spec, &bumped, 6).unwrap();
        assert!(!r.passed());
        let Witness::Pair(p, q) = &r.witness else { panic!() };
        let direct = residual_eq111(bumped.primary(), p, q, 3, 3).unwrap().abs();
        assert_eq!(direct, r.max_abs_residual);

        let q = |v: i64| Rational::from_integer(v.into());
        let null = theorem2_construct(
            3,
            3,
            Theorem2Params::Null { b: make_additive(q(0), q(7), q(0), q(0)), g: vec![IntervalFunction::power(3).unwrap(); 3] },
        )
        .unwrap();
        let r = verify_over_grid(&EquationSpec::for_bundle(&null).unwrap(), &null, 6).unwrap();
        assert!(r.exact && r.max_abs_residual.is_zero());
    }

    #[test]
    fn sampled_and_float_sweeps() {
        let b = crate::families::draw_bundle(FamilyTag::H54, 3, 3, 4, crate::families::DrawVariant::Plain).unwrap();
        let spec = EquationSpec::for_bundle(&b).unwrap();
        let r = verify_sampled(&spec, &b, 50, 7, false).unwrap();
        assert!(r.passed() && r.exact);
        assert!(r.boundary_pairs > 0);
        assert_eq!(r, verify_sampled(&spec, &b, 50, 7, false).unwrap());
        let f = verify_over_grid_with(&spec, &b, 4, SweepOptions { irrational: true, float: true }).unwrap();
        assert!(!f.exact && f.passed());
        let bumped = b.perturbed(&s("1/10")).unwrap();
        assert!(!verify_over_grid_with(&spec, &bumped, 4, SweepOptions { irrational: true, float: true }).unwrap().passed());
    }
}
