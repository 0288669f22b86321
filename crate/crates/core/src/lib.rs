//! Exact verification, construction, and classification of sum-form
//! functional equations on the closed probability simplex.
//!
//! Scalars live in `Q(√2, √3)` so that additive maps with non-trivial Hamel
//! tails can be evaluated without rounding; grid sweeps then certify a zero
//! residual exactly.

pub mod codec;
pub mod discover;
pub mod entropy;
pub mod error;
pub mod families;
pub mod maps;
pub mod residual;
pub mod scalar;
pub mod simplex;

pub use codec::{bundle_from_json, bundle_to_json, function_to_json, parse_bundle, parse_function_spec, print_function_spec};
pub use discover::{
    classify_samples, classify_solution, classify_solution_with, fit_affine_family, fit_power_family, grid_solve_eq110, Classification,
    FitParams, FitResult, GridSolution, SampleSet,
};
pub use entropy::{entropy_alpha, entropy_from_solution, lambda_of_alpha, shannon_bits, Alpha};
pub use error::{Error, Result};
pub use families::{
    draw_bundle, result1_bundle, result1_construct, result2_bundle, result2_construct, theorem1_construct, theorem2_construct, theorem3_construct,
    transform_f_to_h, transform_h_to_f, BundleFunctions, DrawVariant, FamilyTag, SolutionBundle, Theorem1Params,
    Theorem2Params, Theorem3Params,
};
pub use maps::{AdditiveMap, Exponent, HamelTail, IntervalFunction, Multiplicative, MultiplicativeKind};
pub use residual::{
    verify_over_grid, verify_over_grid_with, verify_sampled, EquationId, EquationSpec, ResidualReport, SweepGrid,
    SweepOptions, Witness,
};
pub use scalar::{Backend, FieldElem, Rational, Scalar};
pub use simplex::{enumerate_grid, irrational_points, make_distribution, sample_random, Distribution};
