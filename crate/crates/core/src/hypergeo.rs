//! Truncated hypergeometric series of one matrix argument, `pFq^{(β;m)}(a; b; X)`,
//! and heterogeneous series of two matrix arguments, `pFq^{(β;m,n)}(a; b; A, B)`.
//!
//! Terms are summed degree by degree (ascending) and, within a degree, in the
//! fixed reverse-lexicographic partition order, with compensated accumulation.
//! Terms of one degree may be computed in parallel; the reduction order never
//! changes, so results are bit-reproducible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::jack::{jack_identity, JackTable, Spectrum};
use crate::partitions::{enumerate_bounded, enumerate_partitions, Partition};
use crate::specialfn::DivisionAlgebra;
use crate::summation::CompensatedSum;
use crate::{Error, Result};

/// Truncation depth used when the caller does not choose one.
pub const DEFAULT_MAX_DEGREE: u32 = 30;

/// Relative increment below which an untoleranced series is reported converged.
pub const DEFAULT_TAIL: f64 = 1e-10;

const PARALLEL_DEGREE_THRESHOLD: usize = 512;

/// Upper and lower parameters of a hypergeometric series.
#[derive(Clone, Debug, PartialEq)]
pub struct HypergeomParams {
    upper: Vec<f64>,
    lower: Vec<f64>,
    beta: DivisionAlgebra,
}

impl HypergeomParams {
    pub fn new(upper: Vec<f64>, lower: Vec<f64>, beta: DivisionAlgebra) -> Self {
        Self { upper, lower, beta }
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn beta(&self) -> DivisionAlgebra {
        self.beta
    }

    /// `Π (a_i)_κ^β / Π (b_j)_κ^β`, multiplied out factor by factor.
    pub fn coefficient(&self, kappa: &Partition) -> Result<f64> {
        let h = self.beta.half();
        let mut acc = 1.0;
        for (i, &k) in kappa.parts().iter().enumerate() {
            let shift = i as f64 * h;
            for j in 0..k {
                let j = j as f64;
                let num: f64 = self.upper.iter().map(|a| a - shift + j).product();
                let den: f64 = self.lower.iter().map(|b| b - shift + j).product();
                if num == 0.0 {
                    return Ok(0.0);
                }
                if den == 0.0 {
                    return Err(Error::ZeroDenominator {
                        partition: kappa.to_string(),
                    });
                }
                acc *= num / den;
            }
        }
        Ok(acc)
    }

    /// Partitions longer than this have a vanishing upper Pochhammer symbol:
    /// `(iβ/2)_κ^β = 0` once κ has more than i parts.
    fn length_cutoff(&self) -> Option<usize> {
        let h = self.beta.half();
        self.upper
            .iter()
            .filter_map(|&a| {
                let rows = a / h;
                (a > 0.0 && rows.fract() == 0.0).then_some(rows as usize)
            })
            .min()
    }

    /// First rows longer than this vanish: `(-r)_{κ₁} = 0` for κ₁ > r.
    fn part_cutoff(&self) -> Option<u32> {
        self.upper
            .iter()
            .filter_map(|&a| (a <= 0.0 && a.fract() == 0.0).then_some((-a) as u32))
            .min()
    }
}

/// How far a series is summed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Largest partition weight included.
    pub max_degree: u32,
    /// Restrict to κ₁ ≤ `max_part`; used when the series is known to terminate.
    pub max_part: Option<u32>,
    /// Stop early once two successive degree increments are below
    /// `tail_tolerance · |partial sum|`.
    pub tail_tolerance: Option<f64>,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_DEGREE)
    }
}

impl TruncationPolicy {
    pub fn new(max_degree: u32) -> Self {
        Self {
            max_degree,
            max_part: None,
            tail_tolerance: None,
        }
    }

    pub fn with_max_part(mut self, max_part: u32) -> Self {
        self.max_part = Some(max_part);
        self
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tolerance = Some(tol);
        self
    }
}

/// Value of a truncated series with its convergence bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: f64,
    /// Highest degree actually summed.
    pub degree_used: u32,
    /// Sum of the terms of degree `degree_used`.
    pub last_increment: f64,
    pub converged: bool,
}

impl SeriesResult {
    /// A result with no series behind it (closed forms).
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            degree_used: 0,
            last_increment: 0.0,
            converged: true,
        }
    }
}

struct Plan {
    max_degree: u32,
    max_length: usize,
    max_part: Option<u32>,
    terminating: bool,
}

fn plan(params: &HypergeomParams, dim: usize, trunc: &TruncationPolicy) -> Plan {
    let max_length = params.length_cutoff().map_or(dim, |c| c.min(dim));
    let natural = params.part_cutoff();
    let max_part = match (natural, trunc.max_part) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    // With both a part and a length bound the series has finitely many terms.
    let terminating = max_part.is_some();
    let max_degree = match max_part {
        Some(r) => trunc.max_degree.min(r * max_length as u32),
        None => trunc.max_degree,
    };
    Plan {
        max_degree,
        max_length,
        max_part,
        terminating,
    }
}

fn check_convergence(params: &HypergeomParams, radius: f64, plan: &Plan) -> Result<()> {
    if plan.terminating || radius == 0.0 {
        return Ok(());
    }
    let (p, q) = (params.upper.len(), params.lower.len());
    if p > q + 1 || (p == q + 1 && radius >= 1.0) {
        return Err(Error::Divergent { radius });
    }
    Ok(())
}

fn partitions_of(k: u32, plan: &Plan) -> Vec<Partition> {
    match plan.max_part {
        Some(r) => enumerate_bounded(k, plan.max_length, r).into_vec(),
        None => enumerate_partitions(k, plan.max_length).into_vec(),
    }
}

/// Sums `terms(k)` for k = 0..=max_degree.
fn sum_by_degree<F>(max_degree: u32, trunc: &TruncationPolicy, terminating: bool, terms: F) -> Result<SeriesResult>
where
    F: Fn(u32) -> Result<Vec<f64>>,
{
    let mut total = CompensatedSum::new();
    let mut last_increment = 0.0;
    let mut degree_used = 0;
    let mut quiet_degrees = 0;
    for k in 0..=max_degree {
        let degree_terms = terms(k)?;
        let mut increment = CompensatedSum::new();
        for &t in &degree_terms {
            total.add(t);
            increment.add(t);
        }
        last_increment = increment.value();
        degree_used = k;
        if let Some(tol) = trunc.tail_tolerance {
            if k > 0 && last_increment.abs() <= tol * total.value().abs() {
                quiet_degrees += 1;
                if quiet_degrees >= 2 {
                    break;
                }
            } else {
                quiet_degrees = 0;
            }
        }
    }
    let value = total.value();
    let tol = trunc.tail_tolerance.unwrap_or(DEFAULT_TAIL);
    let converged = terminating || last_increment.abs() <= tol * value.abs();
    Ok(SeriesResult {
        value,
        degree_used,
        last_increment,
        converged,
    })
}

fn map_degree<T, F>(items: &[T], f: F) -> Result<Vec<f64>>
where
    T: Sync,
    F: Fn(&T) -> Result<f64> + Sync,
{
    if items.len() >= PARALLEL_DEGREE_THRESHOLD {
        items.par_iter().map(&f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

fn inverse_factorials(max: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    let mut acc = 1.0;
    out.push(acc);
    for k in 1..=max {
        acc /= k as f64;
        out.push(acc);
    }
    out
}

/// Jack values for a spectrum, using the closed form at scalar matrices.
enum JackSource {
    Scalar { t: f64, dim: usize, beta: DivisionAlgebra },
    Table { table: std::sync::Arc<JackTable>, values: Vec<f64> },
}

impl JackSource {
    fn new(x: &Spectrum, plan: &Plan, beta: DivisionAlgebra) -> Self {
        if x.is_scalar() {
            JackSource::Scalar {
                t: x.values()[0],
                dim: x.dim(),
                beta,
            }
        } else {
            let table = JackTable::shared(beta, plan.max_degree, plan.max_length, plan.max_part);
            let values = table.evaluate(x);
            JackSource::Table { table, values }
        }
    }

    fn value(&self, kappa: &Partition) -> f64 {
        match self {
            JackSource::Scalar { t, dim, beta } => {
                t.powi(kappa.weight() as i32) * jack_identity(kappa, *dim, *beta)
            }
            JackSource::Table { table, values } => table.index_of(kappa).map_or(0.0, |i| values[i]),
        }
    }
}

/// Every nonzero-coefficient term of the one-matrix series, in summation order.
pub fn hyp_matrix_terms(
    params: &HypergeomParams,
    x: &Spectrum,
    trunc: &TruncationPolicy,
) -> Result<Vec<(Partition, f64)>> {
    let plan = plan(params, x.dim(), trunc);
    check_convergence(params, x.spectral_radius(), &plan)?;
    let jack = JackSource::new(x, &plan, params.beta);
    let inv_fact = inverse_factorials(plan.max_degree);
    let mut out = Vec::new();
    for k in 0..=plan.max_degree {
        for kappa in partitions_of(k, &plan) {
            let term = params.coefficient(&kappa)? * jack.value(&kappa) * inv_fact[k as usize];
            out.push((kappa, term));
        }
    }
    Ok(out)
}

/// `pFq^{(β;m)}(a; b; X) = Σ_k Σ_{κ ∈ P^k_m} [Π(a_i)_κ / Π(b_j)_κ] C_κ(X) / k!`.
pub fn hyp_matrix(params: &HypergeomParams, x: &Spectrum, trunc: &TruncationPolicy) -> Result<SeriesResult> {
    let plan = plan(params, x.dim(), trunc);
    check_convergence(params, x.spectral_radius(), &plan)?;
    let jack = JackSource::new(x, &plan, params.beta);
    let inv_fact = inverse_factorials(plan.max_degree);
    sum_by_degree(plan.max_degree, trunc, plan.terminating, |k| {
        let parts = partitions_of(k, &plan);
        map_degree(&parts, |kappa| {
            Ok(params.coefficient(kappa)? * jack.value(kappa) * inv_fact[k as usize])
        })
    })
}

/// `pFq^{(β;m,n)}(a; b; A, B) = Σ_k Σ_{κ ∈ P^k_n} [Π(a_i)_κ / Π(b_j)_κ]
/// C_κ(A) C_κ(B) / (k! C_κ(I_m))` with `A` of dimension m ≥ n = dim B.
pub fn hyp_two_matrix(
    params: &HypergeomParams,
    a: &Spectrum,
    b: &Spectrum,
    trunc: &TruncationPolicy,
) -> Result<SeriesResult> {
    let (m, n) = (a.dim(), b.dim());
    if n > m {
        return Err(Error::Dimension(format!(
            "heterogeneous series needs dim A >= dim B, got {m} < {n}"
        )));
    }
    let plan = plan(params, n, trunc);
    check_convergence(params, a.spectral_radius() * b.spectral_radius(), &plan)?;
    let jack_a = JackSource::new(a, &plan, params.beta);
    let jack_b = JackSource::new(b, &plan, params.beta);
    let inv_fact = inverse_factorials(plan.max_degree);
    sum_by_degree(plan.max_degree, trunc, plan.terminating, |k| {
        let parts = partitions_of(k, &plan);
        map_degree(&parts, |kappa| {
            let coeff = params.coefficient(kappa)?;
            if coeff == 0.0 {
                return Ok(0.0);
            }
            Ok(coeff * jack_a.value(kappa) * jack_b.value(kappa) * inv_fact[k as usize]
                / jack_identity(kappa, m, params.beta))
        })
    })
}
