//! Empirical completeness checks: template fits, family classification, and
//! a least-squares solve for `f` on a grid.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::families::{transform_h_to_f, BundleFunctions, FamilyTag, SolutionBundle};
use crate::maps::IntervalFunction;
use crate::residual::{verify_over_grid_with, EquationId, EquationSpec, ResidualReport, SweepOptions};
use crate::scalar::{FieldElem, Rational, Scalar};
use crate::simplex::{enumerate_grid, Distribution};

/// A template fits when its rms error is at most this times `1 + max |y|`.
pub const FIT_TOLERANCE: f64 = 1e-9;
pub const POWER_STARTS: [f64; 5] = [0.5, 1.5, 2.0, 3.0, 5.0];
pub const ALPHA_MIN: f64 = 1e-6;
pub const ALPHA_MAX: f64 = 8.0;
const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-12;
/// Default cap on grid-solver unknowns.
pub const DEFAULT_UNKNOWN_CAP: usize = 5000;

/// Samples `(x, y)` of one function with distinct abscissae in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    points: Vec<(Scalar, Scalar)>,
}

impl SampleSet {
    pub fn new(points: Vec<(Scalar, Scalar)>) -> Result<Self> {
        // reuse the table validation (range and distinctness)
        IntervalFunction::table(points.clone())?;
        Ok(SampleSet { points })
    }

    /// Samples `f` at each abscissa.
    pub fn from_function(f: &IntervalFunction, xs: &[Scalar]) -> Result<Self> {
        let points = xs
            .iter()
            .map(|x| Ok((x.clone(), f.eval(x)?)))
            .collect::<Result<Vec<_>>>()?;
        SampleSet::new(points)
    }

    pub fn points(&self) -> &[(Scalar, Scalar)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_table(&self) -> IntervalFunction {
        IntervalFunction::table(self.points.clone()).expect("validated on construction")
    }

    fn floats(&self) -> (Vec<f64>, Vec<f64>) {
        self.points.iter().map(|(x, y)| (x.to_f64(), y.to_f64())).unzip()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in &self.points {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("x,y") => {}
            other => return Err(Error::Parse(format!("expected header \"x,y\", got {other:?}"))),
        }
        let points = lines
            .enumerate()
            .map(|(i, line)| {
                let (x, y) = line
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("line {}: expected two fields", i + 2)))?;
                Ok((x.trim().parse()?, y.trim().parse()?))
            })
            .collect::<Result<Vec<_>>>()?;
        SampleSet::new(points)
    }
}

/// Fitted template parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum FitParams {
    /// `slope · x + constant`
    Affine { slope: f64, constant: f64 },
    /// `scale · x^α + slope · x`
    Power { alpha: f64, scale: f64, slope: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    /// Family the fit was attributed to; "none" for a bare fit.
    pub family: FamilyTag,
    pub params: FitParams,
    pub rms: f64,
    /// The rms threshold this fit was judged against.
    pub tolerance: f64,
}

impl FitResult {
    pub fn fits(&self) -> bool {
        self.rms.is_finite() && self.rms <= self.tolerance
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        out.insert("family".into(), json!(self.family.label()));
        match self.params {
            FitParams::Affine { slope, constant } => {
                out.insert("slope".into(), json!(slope));
                out.insert("const".into(), json!(constant));
            }
            FitParams::Power { alpha, scale, slope } => {
                out.insert("alpha".into(), json!(alpha));
                out.insert("scale".into(), json!(scale));
                out.insert("slope".into(), json!(slope));
            }
        }
        out.insert("rms".into(), json!(self.rms));
        Value::Object(out)
    }
}

fn tolerance_for(ys: &[f64]) -> f64 {
    FIT_TOLERANCE * (1.0 + ys.iter().fold(0f64, |a, y| a.max(y.abs())))
}

fn rms_of(res: impl Iterator<Item = f64>, count: usize) -> f64 {
    (res.map(|r| r * r).sum::<f64>() / count as f64).sqrt()
}

/// Least-squares line through the samples via the normal equations.
pub fn fit_affine_family(s: &SampleSet) -> Result<FitResult> {
    if s.len() < 3 {
        return Err(Error::TooFewPoints(format!("affine fit needs 3 points, got {}", s.len())));
    }
    let (xs, ys) = s.floats();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateAbscissae);
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let constant = my - slope * mx;
    let rms = rms_of(xs.iter().zip(&ys).map(|(x, y)| y - slope * x - constant), xs.len());
    Ok(FitResult {
        family: FamilyTag::None,
        params: FitParams::Affine { slope, constant },
        rms,
        tolerance: tolerance_for(&ys),
    })
}

fn pow0(x: f64, a: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(a)
    }
}

fn sse(xs: &[f64], ys: &[f64], alpha: f64, scale: f64, slope: f64) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - scale * pow0(*x, alpha) - slope * x;
            r * r
        })
        .sum()
}

/// `(scale, slope)` minimizing the error at fixed α.
fn linear_at(xs: &[f64], ys: &[f64], alpha: f64) -> (f64, f64) {
    let a = DMatrix::from_fn(xs.len(), 2, |i, j| if j == 0 { pow0(xs[i], alpha) } else { xs[i] });
    let b = DVector::from_column_slice(ys);
    match a.svd(true, true).solve(&b, 1e-14) {
        Ok(sol) => (sol[0], sol[1]),
        Err(_) => (0.0, 0.0),
    }
}

struct PowerFit {
    alpha: f64,
    scale: f64,
    slope: f64,
    sse: f64,
}

/// Damped Gauss–Newton from one start; `None` when the iteration cap is hit
/// before the step falls below tolerance.
fn gauss_newton(xs: &[f64], ys: &[f64], alpha0: f64) -> Option<PowerFit> {
    let mut alpha = alpha0;
    let (mut scale, mut slope) = linear_at(xs, ys, alpha);
    let mut cur = sse(xs, ys, alpha, scale, slope);
    for _ in 0..MAX_ITERATIONS {
        if cur == 0.0 {
            return Some(PowerFit { alpha, scale, slope, sse: cur });
        }
        let jac = DMatrix::from_fn(xs.len(), 3, |i, j| {
            let x = xs[i];
            match j {
                0 => pow0(x, alpha),
                1 => x,
                _ if x == 0.0 => 0.0,
                _ => scale * x.powf(alpha) * x.ln(),
            }
        });
        let res = DVector::from_iterator(
            xs.len(),
            xs.iter().zip(ys).map(|(x, y)| y - scale * pow0(*x, alpha) - slope * x),
        );
        let step = jac.svd(true, true).solve(&res, 1e-14).ok()?;
        let mut t = 1.0;
        loop {
            let na = (alpha + t * step[2]).clamp(ALPHA_MIN, ALPHA_MAX);
            let ns = scale + t * step[0];
            let nt = slope + t * step[1];
            let trial = sse(xs, ys, na, ns, nt);
            if trial <= cur {
                let moved = ((na - alpha).powi(2) + (ns - scale).powi(2) + (nt - slope).powi(2)).sqrt();
                alpha = na;
                scale = ns;
                slope = nt;
                cur = trial;
                if moved < STEP_TOLERANCE {
                    return Some(PowerFit { alpha, scale, slope, sse: cur });
                }
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                // no descent along the Gauss–Newton direction: stationary
                return Some(PowerFit { alpha, scale, slope, sse: cur });
            }
        }
    }
    None
}

/// Fits `y ≈ scale · x^α + slope · x` with α in `(0, 8]`.
pub fn fit_power_family(s: &SampleSet) -> Result<FitResult> {
    let (xs, ys) = s.floats();
    if xs.len() < 4 {
        return Err(Error::TooFewPoints(format!("power fit needs 4 points, got {}", xs.len())));
    }
    let interior = xs.iter().filter(|x| **x > 0.0 && **x < 1.0).count();
    if interior < 3 {
        return Err(Error::InsufficientInteriorPoints(interior));
    }
    let best = POWER_STARTS
        .iter()
        .filter_map(|a0| gauss_newton(&xs, &ys, *a0))
        .fold(None::<PowerFit>, |best, fit| match best {
            Some(b) if b.sse <= fit.sse => Some(b),
            _ => Some(fit),
        })
        .ok_or(Error::NoConvergence)?;
    Ok(FitResult {
        family: FamilyTag::None,
        params: FitParams::Power {
            alpha: best.alpha,
            scale: best.scale,
            slope: best.slope,
        },
        rms: (best.sse / xs.len() as f64).sqrt(),
        tolerance: tolerance_for(&ys),
    })
}

/// Outcome of classifying a candidate solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub family: FamilyTag,
    /// The template fit that decided the family, if any.
    pub fit: Option<FitResult>,
    /// The residual sweep run first, when the input was a bundle.
    pub report: Option<ResidualReport>,
    pub diagnostic: Option<String>,
}

impl Classification {
    fn none(report: Option<ResidualReport>, fit: Option<FitResult>, why: String) -> Self {
        Classification {
            family: FamilyTag::None,
            fit,
            report,
            diagnostic: Some(why),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        out.insert("family".into(), json!(self.family.label()));
        if let Some(fit) = &self.fit {
            let Value::Object(fields) = fit.to_json() else { unreachable!() };
            for (k, v) in fields.into_iter().filter(|(k, _)| k != "family") {
                out.insert(k, v);
            }
        }
        if let Some(r) = &self.report {
            out.insert("max_abs_residual".into(), json!(r.max_abs_residual.to_string()));
        }
        if let Some(d) = &self.diagnostic {
            out.insert("diagnostic".into(), json!(d));
        }
        Value::Object(out)
    }
}

/// Sample abscissae for a grid of resolution `d`: every `a/d` and every
/// product `(a/d)(b/d)`, sorted.
pub fn grid_abscissae(d: usize) -> Vec<Scalar> {
    let mut set = BTreeMap::new();
    let dd = d as i64;
    for a in 0..=dd {
        set.insert(Rational::new(a.into(), dd.into()), ());
        for b in 0..=dd {
            set.insert(Rational::new((a * b).into(), (dd * dd).into()), ());
        }
    }
    set.into_keys().map(Scalar::from_rational).collect()
}

fn sample_primary(f: &IntervalFunction, d: usize) -> Result<SampleSet> {
    match f {
        IntervalFunction::Table { points } => SampleSet::new(points.clone()),
        _ => SampleSet::from_function(f, &grid_abscissae(d)),
    }
}

/// Family labels for the three shapes of a primary function.
#[derive(Clone, Copy)]
struct Shapes {
    null: Option<FamilyTag>,
    affine: FamilyTag,
    power: FamilyTag,
}

fn shapes_for(equation: EquationId) -> Option<Shapes> {
    match equation {
        EquationId::Eq110 => Some(Shapes {
            null: Some(FamilyTag::F41),
            affine: FamilyTag::F42,
            power: FamilyTag::F44,
        }),
        EquationId::Eq15 | EquationId::Eq18 => Some(Shapes {
            null: Some(FamilyTag::H51),
            affine: FamilyTag::H52,
            power: FamilyTag::H54,
        }),
        EquationId::Eq111 => Some(Shapes {
            null: None,
            affine: FamilyTag::Phi31i,
            power: FamilyTag::Phi33,
        }),
        _ => None,
    }
}

/// Assigns a family to samples of the primary function (`f`, or `f` derived
/// from `h`, or `φ`) of an equation known to hold. `n` is only used for
/// the case split of the `φ` equation.
pub fn classify_samples(s: &SampleSet, equation: EquationId, n: usize) -> Result<Classification> {
    let shapes = shapes_for(equation).ok_or_else(|| {
        Error::UnsupportedEquation(format!("equation {equation} has no template classification"))
    })?;
    let (_, ys) = s.floats();
    let tol = tolerance_for(&ys);
    let mut affine = fit_affine_family(s)?;
    if let Some(null) = shapes.null {
        let rms = rms_of(ys.iter().copied(), ys.len());
        if rms <= tol {
            affine.family = null;
            return Ok(Classification {
                family: null,
                fit: Some(affine),
                report: None,
                diagnostic: None,
            });
        }
    }
    if affine.fits() {
        let mut family = shapes.affine;
        if equation == EquationId::Eq111 {
            // φ(1) + (n−1)φ(0) = 1 singles out the second affine branch
            let at = |target: f64| {
                s.points
                    .iter()
                    .find(|(x, _)| x.to_f64() == target)
                    .map(|(_, y)| y.clone())
            };
            let cond = match (at(1.0), at(0.0)) {
                (Some(one), Some(zero)) => one.add(&zero.scale_int(n as i64 - 1))?,
                _ => {
                    let FitParams::Affine { slope, constant } = affine.params else { unreachable!() };
                    Scalar::float(slope + constant * n as f64)
                }
            };
            let is_one = match &cond {
                Scalar::Exact(e) => *e == FieldElem::one(),
                Scalar::Float(v) => (v - 1.0).abs() <= tol,
            };
            if is_one {
                family = FamilyTag::Phi31ii;
            }
        }
        affine.family = family;
        return Ok(Classification {
            family,
            fit: Some(affine),
            report: None,
            diagnostic: None,
        });
    }
    match fit_power_family(s) {
        Ok(mut power) if power.fits() => {
            power.family = shapes.power;
            Ok(Classification {
                family: shapes.power,
                fit: Some(power),
                report: None,
                diagnostic: None,
            })
        }
        outcome => {
            let fit = outcome.as_ref().ok().cloned().or(Some(affine));
            let detail = match &outcome {
                Ok(p) => format!("best power fit has rms {:e}", p.rms),
                Err(e) => format!("power fit failed: {e}"),
            };
            Ok(Classification::none(
                None,
                fit,
                format!(
                    "equation holds but the primary function matches neither the affine nor the power template ({detail}); \
                     it may be a discontinuous multiplicative solution"
                ),
            ))
        }
    }
}

/// Verifies the residual over the grid first; only then fits the primary
/// function against the templates.
pub fn classify_solution(bundle: &SolutionBundle, spec: &EquationSpec, d: usize) -> Result<Classification> {
    classify_solution_with(bundle, spec, d, SweepOptions::for_bundle(bundle))
}

/// [`classify_solution`] with explicit sweep options.
pub fn classify_solution_with(
    bundle: &SolutionBundle,
    spec: &EquationSpec,
    d: usize,
    opts: SweepOptions,
) -> Result<Classification> {
    let report = verify_over_grid_with(spec, bundle, d, opts)?;
    if !report.passed() {
        let why = format!("residual {} exceeds tolerance", report.max_abs_residual);
        return Ok(Classification::none(Some(report), None, why));
    }
    let primary = match &bundle.functions {
        BundleFunctions::Eq21 { .. } | BundleFunctions::Eq23 { .. } => {
            let family = if spec.id == EquationId::Eq21 { FamilyTag::R1 } else { FamilyTag::R2 };
            return Ok(Classification {
                family,
                fit: None,
                report: Some(report),
                diagnostic: None,
            });
        }
        BundleFunctions::Eq110 { f, .. } => f.clone(),
        BundleFunctions::Eq111 { phi } => phi.clone(),
        BundleFunctions::Eq18 { h, .. } => {
            let lambda = bundle.lambda.as_ref().ok_or(Error::LambdaZero)?;
            transform_h_to_f(h, lambda)?
        }
    };
    let samples = sample_primary(&primary, d)?;
    let mut out = classify_samples(&samples, spec.id, spec.n)?;
    out.report = Some(report);
    Ok(out)
}

/// Least-squares table for `f` given `g_j`, with `f(1)` pinned to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSolution {
    pub table: SampleSet,
    /// `‖A v‖₂` of the returned table.
    pub residual_norm: f64,
    /// Dimension of the null space of the homogeneous system.
    pub nullity: usize,
    pub unknowns: usize,
    pub equations: usize,
}

struct GridSystem {
    abscissae: Vec<Scalar>,
    matrix: DMatrix<f64>,
}

fn assemble(g: &[IntervalFunction], n: usize, m: usize, d: usize, cap: usize) -> Result<GridSystem> {
    if g.len() != m {
        return Err(Error::ArityMismatch(format!("g has {} entries, expected m = {m}", g.len())));
    }
    let ps: Vec<Distribution> = enumerate_grid(n, d)?.collect();
    let qs: Vec<Distribution> = enumerate_grid(m, d)?.collect();
    let mut index: BTreeMap<Rational, usize> = BTreeMap::new();
    for x in grid_abscissae(d) {
        index.insert(x.as_rational().expect("grid is rational").clone(), 0);
    }
    for (i, v) in index.values_mut().enumerate() {
        *v = i;
    }
    let unknowns = index.len();
    if unknowns > cap {
        return Err(Error::SystemTooLarge { unknowns, cap });
    }
    let key = |s: &Scalar| index[s.as_rational().expect("grid is rational")];
    let gsum: Vec<f64> = qs
        .par_iter()
        .map(|q| {
            let vals = g.iter().zip(q.components()).map(|(gj, x)| gj.eval(x)).collect::<Result<Vec<_>>>()?;
            Ok(Scalar::sum(&vals)?.to_f64())
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = ps
        .par_iter()
        .flat_map_iter(|p| {
            let key = &key;
            qs.iter().zip(&gsum).map(move |(q, gs)| {
                let mut row = vec![0.0; unknowns];
                for pi in p.components() {
                    for qj in q.components() {
                        row[key(&pi.mul(qj).expect("exact grid"))] += 1.0;
                    }
                    row[key(pi)] -= gs;
                }
                row
            })
        })
        .collect();
    let equations = rows.len();
    let matrix = DMatrix::from_fn(equations, unknowns, |i, j| rows[i][j]);
    let abscissae = index.into_keys().map(Scalar::from_rational).collect();
    Ok(GridSystem { abscissae, matrix })
}

/// Solves `ΣΣ f(p_i q_j) = Σ f(p_i) Σ g_j(q_j)` for the values of `f` on the
/// grid abscissae, in least squares, with `f(1) = 1`.
pub fn grid_solve_eq110(g: &[IntervalFunction], n: usize, m: usize, d: usize) -> Result<GridSolution> {
    grid_solve_eq110_capped(g, n, m, d, DEFAULT_UNKNOWN_CAP)
}

pub fn grid_solve_eq110_capped(g: &[IntervalFunction], n: usize, m: usize, d: usize, cap: usize) -> Result<GridSolution> {
    let sys = assemble(g, n, m, d, cap)?;
    let a = &sys.matrix;
    let unknowns = a.ncols();
    let svals = a.clone().svd(false, false).singular_values;
    let smax = svals.iter().fold(0f64, |x, y| x.max(*y));
    let rank = svals.iter().filter(|s| **s > 1e-9 * smax.max(1.0)).count();
    let nullity = unknowns - rank;

    let one = unknowns - 1; // abscissae are sorted, so 1 is last
    let reduced = a.columns(0, one).into_owned();
    let rhs = -a.column(one);
    let sol = reduced
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|_| Error::NoConvergence)?;
    let mut v = DVector::zeros(unknowns);
    v.rows_mut(0, one).copy_from(&sol);
    v[one] = 1.0;
    let residual_norm = (a * &v).norm();
    let points = sys
        .abscissae
        .into_iter()
        .zip(v.iter())
        .map(|(x, y)| (x, Scalar::float(*y)))
        .collect();
    Ok(GridSolution {
        table: SampleSet::new(points)?,
        residual_norm,
        nullity,
        unknowns,
        equations: a.nrows(),
    })
}

/// `‖A v‖₂` for the table of `f` on the grid abscissae.
pub fn grid_residual_norm(f: &IntervalFunction, g: &[IntervalFunction], n: usize, m: usize, d: usize) -> Result<f64> {
    let sys = assemble(g, n, m, d, DEFAULT_UNKNOWN_CAP)?;
    let vals = sys
        .abscissae
        .iter()
        .map(|x| Ok(f.eval(x)?.to_f64()))
        .collect::<Result<Vec<_>>>()?;
    Ok((&sys.matrix * DVector::from_vec(vals)).norm())
}

/// Root-mean-square distance from the samples to their least-squares
/// projection onto `span{x^α}`; the additive part that vanishes at 1 is zero
/// on rational abscissae, so it adds no direction.
pub fn projection_rms(s: &SampleSet, alpha: f64) -> f64 {
    let (xs, ys) = s.floats();
    let basis: Vec<f64> = xs.iter().map(|x| pow0(*x, alpha)).collect();
    let bb: f64 = basis.iter().map(|b| b * b).sum();
    let scale = if bb == 0.0 {
        0.0
    } else {
        basis.iter().zip(&ys).map(|(b, y)| b * y).sum::<f64>() / bb
    };
    rms_of(basis.iter().zip(&ys).map(|(b, y)| y - scale * b), ys.len())
}
