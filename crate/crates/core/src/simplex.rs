//! Complete probability distributions on the closed simplex.
//!
//! Boundary points (components equal to 0 or 1) are first-class: the grid
//! enumerator always emits vertices and faces, and the random sampler takes
//! an explicit number of zero components.

use std::fmt;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{make_rational, Backend, Rational, Scalar};

/// Numerators of sampled components are drawn from `1..=SAMPLE_DENOMINATOR`.
pub const SAMPLE_DENOMINATOR: i64 = 1000;

const FLOAT_SUM_TOLERANCE: f64 = 1e-12;

/// A point of the closed simplex: `n >= 2` components in `[0, 1]` summing
/// to one (exactly for exact scalars, within 1e-12 for floats).
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    components: Vec<Scalar>,
}

impl Distribution {
    pub fn new(components: Vec<Scalar>) -> Result<Self> {
        make_distribution(components)
    }

    pub fn components(&self) -> &[Scalar] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn backend(&self) -> Backend {
        self.components[0].backend()
    }

    pub fn has_zero(&self) -> bool {
        self.components.iter().any(Scalar::is_zero)
    }

    /// Same point with every component lowered to a float.
    pub fn to_float(&self) -> Distribution {
        Distribution {
            components: self.components.iter().map(Scalar::to_float).collect(),
        }
    }

    /// Reorders components; `perm[i]` is the source index of slot `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Distribution> {
        if perm.len() != self.len() {
            return Err(Error::ArityMismatch(format!(
                "permutation of length {} for {} components",
                perm.len(),
                self.len()
            )));
        }
        Ok(Distribution {
            components: perm.iter().map(|&i| self.components[i].clone()).collect(),
        })
    }

    /// Comma-separated text forms, one CSV row.
    pub fn to_csv(&self) -> String {
        self.components
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv(row: &str) -> Result<Self> {
        let components = row
            .split(',')
            .map(|cell| cell.trim().parse::<Scalar>())
            .collect::<Result<Vec<_>>>()?;
        make_distribution(components)
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_csv())
    }
}

/// Validates membership in the closed simplex.
pub fn make_distribution(components: Vec<Scalar>) -> Result<Distribution> {
    if components.len() < 2 {
        return Err(Error::TooFewComponents(components.len()));
    }
    let backend = components[0].backend();
    if components.iter().any(|c| c.backend() != backend) {
        return Err(Error::BackendMismatch);
    }
    let one = Scalar::one().to_backend(backend)?;
    for (index, c) in components.iter().enumerate() {
        let out = match c {
            Scalar::Float(v) => !(0.0..=1.0).contains(v),
            Scalar::Exact(_) => c.signum() < 0 || one.sub(c)?.signum() < 0,
        };
        if out {
            return Err(Error::ComponentOutOfRange {
                index,
                value: c.to_string(),
            });
        }
    }
    let total = Scalar::sum(&components)?;
    let ok = match &total {
        Scalar::Float(v) => (v - 1.0).abs() <= FLOAT_SUM_TOLERANCE,
        Scalar::Exact(_) => total == one,
    };
    if !ok {
        return Err(Error::SumNotOne(total.to_string()));
    }
    Ok(Distribution { components })
}

/// Number of grid points, `C(d + n - 1, n - 1)`.
pub fn grid_size(n: usize, d: usize) -> usize {
    let k = n.saturating_sub(1);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (d + k - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Iterator over compositions of `d` into `n` parts, emitted as the
/// distributions `(k_1/d, …, k_n/d)`, starting at `(d, 0, …, 0)` and
/// proceeding in decreasing lexicographic order of `(k_1, …, k_n)`.
#[derive(Clone, Debug)]
pub struct GridIter {
    d: i64,
    current: Option<Vec<i64>>,
}

impl Iterator for GridIter {
    type Item = Distribution;

    fn next(&mut self) -> Option<Distribution> {
        let parts = self.current.take()?;
        let dist = Distribution {
            components: parts
                .iter()
                .map(|&k| make_rational(k, self.d).expect("d >= 1"))
                .collect(),
        };
        // successor: take one unit from the last non-zero part before the
        // final slot, and pile everything after it into the next slot
        let n = parts.len();
        if let Some(i) = (0..n - 1).rev().find(|&i| parts[i] > 0) {
            let mut next = parts;
            let tail: i64 = next[i + 1..].iter().sum();
            next[i] -= 1;
            next[i + 1] = tail + 1;
            for slot in next.iter_mut().skip(i + 2) {
                *slot = 0;
            }
            self.current = Some(next);
        }
        Some(dist)
    }
}

/// All grid points of the closed simplex with denominator `d`.
pub fn enumerate_grid(n: usize, d: usize) -> Result<GridIter> {
    if n < 2 {
        return Err(Error::TooFewComponents(n));
    }
    if d < 1 {
        return Err(Error::InvalidGrid(format!("grid denominator must be >= 1, got {d}")));
    }
    let mut start = vec![0i64; n];
    start[0] = d as i64;
    Ok(GridIter {
        d: d as i64,
        current: Some(start),
    })
}

/// Deterministic random point with exactly `zero_count` zero components.
///
/// The positive components are `r_i / Σ r` with integers
/// `r_i ∈ [1, SAMPLE_DENOMINATOR]`, so the result is exact.
pub fn sample_random(n: usize, seed: u64, zero_count: usize) -> Result<Distribution> {
    if n < 2 {
        return Err(Error::TooFewComponents(n));
    }
    if zero_count > n - 1 {
        return Err(Error::ZeroCountTooLarge { n, zero_count });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(&mut rng);
    let zeros = &slots[..zero_count];
    let weights: Vec<i64> = (0..n)
        .map(|i| {
            if zeros.contains(&i) {
                0
            } else {
                rng.gen_range(1..=SAMPLE_DENOMINATOR)
            }
        })
        .collect();
    let total: i64 = weights.iter().sum();
    let components = weights
        .iter()
        .map(|&w| Scalar::from_rational(Rational::new(BigInt::from(w), BigInt::from(total))))
        .collect();
    Ok(Distribution { components })
}

/// `n × m` matrix of products `p_i · q_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductMatrix {
    entries: Vec<Vec<Scalar>>,
}

impl ProductMatrix {
    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i][j]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Scalar> {
        self.entries.iter().flatten()
    }

    pub fn total(&self) -> Result<Scalar> {
        Scalar::sum(self.iter())
    }
}

pub fn product_matrix(p: &Distribution, q: &Distribution) -> Result<ProductMatrix> {
    if p.backend() != q.backend() {
        return Err(Error::BackendMismatch);
    }
    let entries = p
        .components()
        .iter()
        .map(|pi| {
            q.components()
                .iter()
                .map(|qj| pi.mul(qj))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductMatrix { entries })
}

/// The fixed irrational-coordinate points appended to every grid sweep,
/// padded with zeros to `n` components. Points that need more than `n`
/// components are skipped.
pub fn irrational_points(n: usize) -> Vec<Distribution> {
    const POINTS: [&[&str]; 4] = [
        &["1/2*r2", "1 - 1/2*r2"],
        &["1/3*r3", "1/3", "2/3 - 1/3*r3"],
        &["1 - 1/2*r2", "1/3*r3", "1/2*r2 - 1/3*r3"],
        &["1/6*r6", "1/2", "1/2 - 1/6*r6"],
    ];
    POINTS
        .iter()
        .filter(|p| p.len() <= n)
        .map(|p| {
            let mut comps: Vec<Scalar> = p.iter().map(|t| t.parse().expect("static")).collect();
            comps.resize(n, Scalar::zero());
            make_distribution(comps).expect("static points lie in the simplex")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    fn dist(texts: &[&str]) -> Result<Distribution> {
        make_distribution(texts.iter().map(|t| s(t)).collect())
    }

    #[test]
    fn boundary_points_are_valid() {
        assert!(dist(&["1/2", "1/2", "0"]).is_ok());
        assert!(dist(&["1/2*r2", "1 - 1/2*r2", "0"]).is_ok());
        assert!(dist(&["1", "0", "0"]).is_ok());
    }

    #[test]
    fn invalid_distributions() {
        assert_eq!(dist(&["1/2", "1/3"]).unwrap_err().code(), "sum-not-one");
        assert_eq!(dist(&["1"]).unwrap_err().code(), "too-few-components");
        assert_eq!(
            dist(&["3/2", "-1/2"]).unwrap_err().code(),
            "component-out-of-range"
        );
        assert_eq!(
            dist(&["r2", "1 - r2"]).unwrap_err().code(),
            "component-out-of-range"
        );
        let mixed = make_distribution(vec![s("1/2"), Scalar::float(0.5)]);
        assert_eq!(mixed.unwrap_err().code(), "backend-mismatch");
        assert!(make_distribution(vec![Scalar::float(0.5), Scalar::float(0.5 + 1e-13)]).is_ok());
        assert!(make_distribution(vec![Scalar::float(0.5), Scalar::float(0.6)]).is_err());
    }

    /// Independent enumeration: all integer vectors in [0, d]^n with sum d,
    /// sorted in decreasing lexicographic order.
    fn brute_force_compositions(n: usize, d: i64) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let total = (d + 1).pow(n as u32);
        for code in 0..total {
            let mut v = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                v.push(c % (d + 1));
                c /= d + 1;
            }
            if v.iter().sum::<i64>() == d {
                out.push(v);
            }
        }
        out.sort();
        out.reverse();
        out
    }

    #[test]
    fn grid_matches_brute_force_order() {
        for (n, d) in [(2, 1), (3, 2), (3, 6), (4, 3), (5, 2)] {
            let got: Vec<Distribution> = enumerate_grid(n, d).unwrap().collect();
            let expect: Vec<Distribution> = brute_force_compositions(n, d as i64)
                .into_iter()
                .map(|v| {
                    make_distribution(v.iter().map(|&k| make_rational(k, d as i64).unwrap()).collect())
                        .unwrap()
                })
                .collect();
            assert_eq!(got, expect, "n={n} d={d}");
            assert_eq!(got.len(), grid_size(n, d));
        }
    }

    #[test]
    fn grid_examples() {
        let g: Vec<String> = enumerate_grid(3, 2).unwrap().map(|d| d.to_csv()).collect();
        assert_eq!(
            g,
            ["1,0,0", "1/2,1/2,0", "1/2,0,1/2", "0,1,0", "0,1/2,1/2", "0,0,1"]
        );
        assert_eq!(enumerate_grid(3, 6).unwrap().count(), 28);
        let g: Vec<String> = enumerate_grid(2, 1).unwrap().map(|d| d.to_csv()).collect();
        assert_eq!(g, ["1,0", "0,1"]);
        assert!(enumerate_grid(1, 3).is_err());
        assert!(enumerate_grid(3, 0).is_err());
    }

    #[test]
    fn grid_contains_vertices_and_validates() {
        for n in 2..=5 {
            let grid: Vec<Distribution> = enumerate_grid(n, 4).unwrap().collect();
            for v in 0..n {
                let mut comps = vec![Scalar::zero(); n];
                comps[v] = Scalar::one();
                assert!(grid.contains(&make_distribution(comps).unwrap()));
            }
            for p in &grid {
                assert!(make_distribution(p.components().to_vec()).is_ok());
            }
        }
    }

    #[test]
    fn sampling() {
        let p = sample_random(3, 7, 1).unwrap();
        assert_eq!(p.components().iter().filter(|c| c.is_zero()).count(), 1);
        assert!(make_distribution(p.components().to_vec()).is_ok());
        assert_eq!(p, sample_random(3, 7, 1).unwrap());
        let q = sample_random(3, 7, 0).unwrap();
        assert!(q.components().iter().all(|c| c.signum() > 0));
        assert_eq!(
            sample_random(2, 7, 2).unwrap_err().code(),
            "zero-count-too-large"
        );
        for seed in 0..50 {
            for zeros in 0..4 {
                let r = sample_random(5, seed, zeros).unwrap();
                assert_eq!(r.components().iter().filter(|c| c.is_zero()).count(), zeros);
                assert!(make_distribution(r.components().to_vec()).is_ok());
            }
        }
    }

    #[test]
    fn product_matrix_examples() {
        let p = dist(&["1", "0", "0"]).unwrap();
        let q = dist(&["1/3", "1/3", "1/3"]).unwrap();
        let pm = product_matrix(&p, &q).unwrap();
        assert_eq!(pm.rows()[0], vec![s("1/3"); 3]);
        assert!(pm.rows()[1].iter().chain(&pm.rows()[2]).all(Scalar::is_zero));

        let h = dist(&["1/2", "1/2"]).unwrap();
        let pm = product_matrix(&h, &h).unwrap();
        assert!(pm.iter().all(|e| *e == s("1/4")));

        let p = dist(&["1/2*r2", "1 - 1/2*r2"]).unwrap();
        let pm = product_matrix(&p, &h).unwrap();
        assert_eq!(pm.get(0, 0), &s("1/4*r2"));
        assert_eq!(pm.get(0, 1), &s("1/4*r2"));
        assert_eq!(pm.get(1, 0), &s("1/2 - 1/4*r2"));
        assert_eq!(pm.get(1, 1), &s("1/2 - 1/4*r2"));
        assert_eq!(pm.total().unwrap(), Scalar::one());

        assert!(product_matrix(&h, &h.to_float()).is_err());
    }

    #[test]
    fn product_matrix_sums_to_one() {
        let points: Vec<Distribution> = enumerate_grid(3, 4)
            .unwrap()
            .chain(irrational_points(3))
            .collect();
        for p in &points {
            for q in &points {
                let total = product_matrix(p, q).unwrap().total().unwrap();
                assert_eq!(total, Scalar::one());
            }
        }
    }

    #[test]
    fn irrational_points_cover_every_direction() {
        let pts = irrational_points(3);
        assert_eq!(pts.len(), 4);
        for k in 1..4 {
            assert!(pts.iter().any(|p| p
                .components()
                .iter()
                .any(|c| !c.as_exact().unwrap().coord(k).is_zero())));
        }
        assert_eq!(irrational_points(2).len(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let p = dist(&["1/2*r2", "1 - 1/2*r2", "0"]).unwrap();
        assert_eq!(p.to_csv(), "1/2*r2,1 - 1/2*r2,0");
        assert_eq!(Distribution::from_csv(&p.to_csv()).unwrap(), p);
    }
}
