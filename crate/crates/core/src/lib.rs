//! Trigonometric products `P_N = prod 2 sin(pi x_k)` over Kronecker, van der
//! Corput, extremal and random point sets, with exact discrepancy and checkers
//! for the known bounds.

pub mod bounds;
pub mod dd;
pub mod discrepancy;
pub mod error;
pub mod extremal;
pub mod irrational;
pub mod point;
pub mod products;
pub mod quadrature;
pub mod sequences;
pub mod stochastic;

pub use dd::DoubleDouble;
pub use discrepancy::{discrepancy_trace, star_discrepancy, DiscrepancyResult};
pub use error::{Error, Result};
pub use extremal::{build_extremal, ExtremalConfig};
pub use irrational::{
    cf_expand, cf_expand_until, frac_part, ostrowski, type_exponent_estimate, ConvergentTable,
    FractionalPart, IrrationalSpec, OstrowskiDigits, Precision,
};
pub use point::{FixedFrac, Point};
pub use products::{product_trace, Normalizer, ProductTrace};
pub use sequences::{kronecker, lacunary, random_subsequence, random_uniform, uniform_grid, van_der_corput, PointSet, Provenance};
pub use stochastic::{iid_lil_experiment, rademacher_lil_experiment, subsequence_product_experiment, PathStatistics};
