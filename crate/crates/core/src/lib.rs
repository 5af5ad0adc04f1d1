//! Exact distribution of the largest eigenvalue of a singular beta F-matrix.
//!
//! The crate is layered bottom-up:
//!
//! * [`partitions`] enumerates the integer partitions that index every series term.
//! * [`specialfn`] holds the β-multivariate gamma function, the β-generalized
//!   Pochhammer symbol and the normalizing constants of the densities.
//! * [`jack`] evaluates C-normalized Jack polynomials at arbitrary real spectra.
//! * [`hypergeo`] sums truncated hypergeometric series of one and two matrix arguments.
//! * [`eigdist`] assembles densities, CDFs, exact rational polynomials and quantiles.
//! * [`sampler`] is the Monte Carlo harness used to validate the analytic results.
//!
//! β ∈ {1, 2, 4} selects real, complex or quaternion ensembles throughout.

pub mod eigdist;
mod error;
pub mod hypergeo;
pub mod jack;
pub mod partitions;
pub mod sampler;
pub mod specialfn;
mod summation;

pub use eigdist::{
    cdf_curve, cdf_largest, cdf_largest_finite, cdf_largest_identity, cdf_largest_positive,
    cdf_largest_theorem, density_f_matrix, finite_series_polynomial, quantile, roy_test,
    roy_test_critical, CdfValue, ProblemDims, Quantile, RationalPoly, RoyReport, Route,
    ScaleSpectrum,
};
pub use error::{Error, Result};
pub use hypergeo::{hyp_matrix, hyp_two_matrix, HypergeomParams, SeriesResult, TruncationPolicy};
pub use jack::{jack_eval, jack_identity, jack_scalar_identity, JackTable, Spectrum};
pub use partitions::{enumerate_bounded, enumerate_partitions, partition_weight, Partition, PartitionSet};
pub use specialfn::DivisionAlgebra;
