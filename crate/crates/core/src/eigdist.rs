//! Distribution of the eigenvalues of a singular beta F-matrix.
//!
//! For `A ~ W_m^β(n, Σ₁)` and `B ~ W_m^β(p, Σ₂)` with `p ≥ m > n`, the rank-n
//! matrix `F = T⁻¹A(T⁻¹)*` (`B = T*T`) has n nonzero eigenvalues. This module
//! gives their joint density and several equivalent series for the CDF of the
//! largest one:
//!
//! | [`Route`]    | form                                                                 |
//! |--------------|----------------------------------------------------------------------|
//! | `Theorem`    | heterogeneous ₂F₁ at `(−xΣ⁻¹, I_n)`; converges only for `x‖Σ⁻¹‖ < 1` |
//! | `Positive`   | ₂F₁ at `x(Σ+xI)⁻¹` with non-negative terms                           |
//! | `Finite`     | terminating ₂F₁ at `x(Σ+xI)⁻¹`, exact when `(p−m+1)β/2 − 1 ∈ ℕ₀`     |
//! | `Euler`      | the same series truncated at K when it does not terminate            |
//! | `Identity`   | real case with `Σ = I`, an n-variable series in `t = x/(1+x)`        |
//!
//! Σ enters only through its eigenvalues, so every function takes a
//! [`ScaleSpectrum`] (the eigenvalues of `Σ = Σ₁Σ₂⁻¹`).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num::rational::BigRational;
use num::{BigInt, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hypergeo::{hyp_matrix, hyp_two_matrix, HypergeomParams, SeriesResult, TruncationPolicy};
use crate::jack::{jack_identity_exact, Spectrum};
use crate::partitions::enumerate_bounded;
use crate::specialfn::{self, constant_c1_ln, constant_c2_ln, constant_c3_ln, exact, DivisionAlgebra};
use crate::{Error, Result};

/// Raw CDF values may leave [0, 1] by this much before it is flagged.
pub const RANGE_TOLERANCE: f64 = 1e-9;

/// Required accuracy of [`quantile`] in probability.
pub const QUANTILE_TOLERANCE: f64 = 1e-10;

const BISECTION_WIDTH: f64 = 1e-12;
const MAX_BRACKET_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 200;

/// `(m, n, p)` with `p ≥ m > n ≥ 1`: matrix order, rank of the numerator
/// Wishart matrix, and degrees of freedom of the denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemDims {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub beta: DivisionAlgebra,
}

impl ProblemDims {
    pub fn new(m: usize, n: usize, p: usize, beta: DivisionAlgebra) -> Result<Self> {
        specialfn::check_dims(m, n, p)?;
        Ok(Self { m, n, p, beta })
    }

    pub fn real(m: usize, n: usize, p: usize) -> Result<Self> {
        Self::new(m, n, p, DivisionAlgebra::Real)
    }

    fn half(&self) -> f64 {
        self.beta.half()
    }

    /// The terminating bound `r = (p−m+1)β/2 − 1`, when it is a non-negative integer.
    pub fn finite_truncation(&self) -> Option<u32> {
        let twice = (self.p as i64 - self.m as i64 + 1) * self.beta.beta() as i64 - 2;
        (twice >= 0 && twice % 2 == 0).then_some((twice / 2) as u32)
    }

    /// Exponent `mnβ/2` of the leading power of x.
    pub fn leading_power(&self) -> f64 {
        (self.m * self.n) as f64 * self.half()
    }

    /// Lower parameter `(m+n−1)β/2 + 1` shared by every CDF series.
    fn lower(&self) -> f64 {
        (self.m + self.n - 1) as f64 * self.half() + 1.0
    }
}

/// Eigenvalues of `Σ = Σ₁Σ₂⁻¹`, all positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleSpectrum(Spectrum);

impl ScaleSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|&&v| !(v > 0.0)) {
            return Err(Error::Precondition(format!(
                "scale eigenvalues must be positive, got {bad}"
            )));
        }
        Spectrum::new(values).map(Self)
    }

    pub fn identity(m: usize) -> Self {
        Self(Spectrum::ones(m))
    }

    pub fn is_identity(&self) -> bool {
        self.0.values().iter().all(|&v| v == 1.0)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn values(&self) -> &[f64] {
        self.0.values()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.0
    }

    pub fn ln_det(&self) -> f64 {
        self.0.values().iter().map(|v| v.ln()).sum()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.values().iter().map(|v| v * c).collect())
    }

    fn check(&self, dims: &ProblemDims) -> Result<()> {
        if self.dim() == dims.m {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "scale spectrum has {} entries but m = {}",
                self.dim(),
                dims.m
            )))
        }
    }

    /// Spectrum of `x(Σ + xI)⁻¹`.
    fn resolvent(&self, x: f64) -> Spectrum {
        Spectrum::new(self.values().iter().map(|s| x / (s + x)).collect()).expect("finite entries")
    }

    /// `Σ ln(σᵢ + x)`.
    fn ln_det_shifted(&self, x: f64) -> f64 {
        self.values().iter().map(|s| (s + x).ln()).sum()
    }
}

/// Which closed form produced a CDF value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Theorem,
    Positive,
    Finite,
    Euler,
    Identity,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Theorem => "theorem",
            Route::Positive => "positive",
            Route::Finite => "finite",
            Route::Euler => "euler",
            Route::Identity => "identity",
        }
    }
}

/// A CDF value with the series diagnostics behind it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfValue {
    /// Probability clamped to [0, 1].
    pub probability: f64,
    /// Value before clamping.
    pub raw: f64,
    /// Set when `raw` left [0, 1] by more than [`RANGE_TOLERANCE`].
    pub out_of_range: bool,
    pub route: Route,
    pub series: SeriesResult,
}

impl CdfValue {
    fn new(raw: f64, route: Route, series: SeriesResult) -> Self {
        Self {
            probability: raw.clamp(0.0, 1.0),
            raw,
            out_of_range: !(-RANGE_TOLERANCE..=1.0 + RANGE_TOLERANCE).contains(&raw),
            route,
            series,
        }
    }

    fn zero(route: Route) -> Self {
        Self::new(0.0, route, SeriesResult::exact(0.0))
    }
}

fn check_x(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("x must be a positive finite number, got {x}")))
    }
}

/// Joint density of the nonzero eigenvalues `q₁ ≥ … ≥ q_n > 0` of F.
///
/// The heterogeneous ₁F₀ at `(−Σ⁻¹, Q)` is evaluated after shifting by
/// `c = max 1/σᵢ`: `|I + Σ⁻¹HQH*| = |I + cQ| · |I − (cI − Σ⁻¹) H Q(I+cQ)⁻¹ H*|`,
/// so the series runs at `(cI − Σ⁻¹, Q(I+cQ)⁻¹)`, whose spectral radii
/// multiply to less than one for every Q. At `Σ = I` it is exactly one.
pub fn density_f_matrix(
    q: &[f64],
    dims: &ProblemDims,
    scale: &ScaleSpectrum,
    trunc: &TruncationPolicy,
) -> Result<f64> {
    scale.check(dims)?;
    if q.len() != dims.n {
        return Err(Error::Dimension(format!("expected {} eigenvalues, got {}", dims.n, q.len())));
    }
    if let Some(bad) = q.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("eigenvalues must be positive, got {bad}")));
    }
    if q.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Domain("eigenvalues must be given in decreasing order".into()));
    }
    if q.windows(2).any(|w| w[0] == w[1]) {
        return Ok(0.0);
    }
    let h = dims.half();
    let a = (dims.n + dims.p) as f64 * h;
    let shift = scale.values().iter().map(|s| 1.0 / s).fold(0.0, f64::max);
    let shifted_scale = Spectrum::new(scale.values().iter().map(|s| shift - 1.0 / s).collect())?;
    let damped_q = Spectrum::new(q.iter().map(|v| v / (1.0 + shift * v)).collect())?;
    let series = hyp_two_matrix(
        &HypergeomParams::new(vec![a], vec![], dims.beta),
        &shifted_scale,
        &damped_q,
        trunc,
    )?;

    let exponent = (dims.m - dims.n + 1) as f64 * h - 1.0;
    let mut ln_value = constant_c1_ln(dims.m, dims.n, dims.p, dims.beta, scale.ln_det())?;
    ln_value += exponent * q.iter().map(|v| v.ln()).sum::<f64>();
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            ln_value += dims.beta.beta() as f64 * (q[i] - q[j]).ln();
        }
    }
    ln_value -= a * q.iter().map(|v| (1.0 + shift * v).ln()).sum::<f64>();
    Ok(ln_value.exp() * series.value)
}

/// CDF of the largest eigenvalue from the heterogeneous series at `(−xΣ⁻¹, I_n)`.
///
/// The series only converges for `x · max(1/σᵢ) < 1`; it is kept for cross-checks.
pub fn cdf_largest_theorem(
    x: f64,
    dims: &ProblemDims,
    scale: &ScaleSpectrum,
    trunc: &TruncationPolicy,
) -> Result<CdfValue> {
    scale.check(dims)?;
    check_x(x)?;
    if x == 0.0 {
        return Ok(CdfValue::zero(Route::Theorem));
    }
    let h = dims.half();
    let params = HypergeomParams::new(
        vec![(dims.n + dims.p) as f64 * h, dims.m as f64 * h],
        vec![dims.lower()],
        dims.beta,
    );
    let argument = Spectrum::new(scale.values().iter().map(|s| -x / s).collect())?;
    let series = hyp_two_matrix(&params, &argument, &Spectrum::ones(dims.n), trunc)?;
    let ln_prefactor = constant_c2_ln(dims.m, dims.n, dims.p, dims.beta)?
        - dims.n as f64 * h * scale.ln_det()
        + dims.leading_power() * x.ln();
    Ok(CdfValue::new(ln_prefactor.exp() * series.value, Route::Theorem, series))
}

/// CDF of the largest eigenvalue from the series with non-negative terms,
///
/// `C₂ x^{mnβ/2} |Σ|^{pβ/2} |Σ+xI|^{−(p+n)β/2} ₂F₁((m−1)β/2+1, (n+p)β/2; (m+n−1)β/2+1; x(Σ+xI)⁻¹)`.
///
/// Terms decay like `k^{pβ/2−1} y^k` in the largest resolvent eigenvalue y, so
/// large x needs a deep truncation.
pub fn cdf_largest_positive(
    x: f64,
    dims: &ProblemDims,
    scale: &ScaleSpectrum,
    trunc: &TruncationPolicy,
) -> Result<CdfValue> {
    scale.check(dims)?;
    check_x(x)?;
    if x == 0.0 {
        return Ok(CdfValue::zero(Route::Positive));
    }
    let h = dims.half();
    let params = HypergeomParams::new(
        vec![(dims.m - 1) as f64 * h + 1.0, (dims.n + dims.p) as f64 * h],
        vec![dims.lower()],
        dims.beta,
    );
    let series = hyp_matrix(&params, &scale.resolvent(x), trunc)?;
    let ln_prefactor = constant_c2_ln(dims.m, dims.n, dims.p, dims.beta)?
        + dims.leading_power() * x.ln()
        + dims.p as f64 * h * scale.ln_det()
        - (dims.p + dims.n) as f64 * h * scale.ln_det_shifted(x);
    Ok(CdfValue::new(ln_prefactor.exp() * series.value, Route::Positive, series))
}

fn terminating_form(
    x: f64,
    dims: &ProblemDims,
    scale: &ScaleSpectrum,
    trunc: &TruncationPolicy,
    route: Route,
) -> Result<CdfValue> {
    let h = dims.half();
    let params = HypergeomParams::new(
        vec![dims.n as f64 * h, (dims.m as f64 - dims.p as f64 - 1.0) * h + 1.0],
        vec![dims.lower()],
        dims.beta,
    );
    let series = hyp_matrix(&params, &scale.resolvent(x), trunc)?;
    let ln_prefactor = constant_c2_ln(dims.m, dims.n, dims.p, dims.beta)?
        + dims.leading_power() * x.ln()
        - dims.n as f64 * h * scale.ln_det_shifted(x);
    Ok(CdfValue::new(ln_prefactor.exp() * series.value, route, series))
}

/// CDF of the largest eigenvalue as the terminating series
///
/// `C₂ x^{mnβ/2} |Σ+xI|^{−nβ/2} ₂F₁(nβ/2, (m−p−1)β/2+1; (m+n−1)β/2+1; x(Σ+xI)⁻¹)`,
///
/// summed exactly over partitions with κ₁ ≤ r and at most n parts.
pub fn cdf_largest_finite(x: f64, dims: &ProblemDims, scale: &ScaleSpectrum) -> Result<CdfValue> {
    scale.check(dims)?;
    check_x(x)?;
    let r = dims.finite_truncation().ok_or_else(|| not_finite(dims))?;
    if x == 0.0 {
        return Ok(CdfValue::zero(Route::Finite));
    }
    if scale.is_identity() {
        return Ok(finite_identity(x, dims, r));
    }
    let trunc = TruncationPolicy::new(r * dims.n as u32).with_max_part(r);
    terminating_form(x, dims, scale, &trunc, Route::Finite)
}

/// Coefficients in y of the terminating series at `Σ = I`, where every Jack
/// polynomial collapses to `yᵏ C_κ(I_m)`.
fn identity_series_coefficients(dims: &ProblemDims, r: u32) -> Arc<Vec<BigRational>> {
    type Key = (usize, usize, usize, u32);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<BigRational>>>>> = OnceLock::new();
    let key = (dims.m, dims.n, dims.p, dims.beta.beta());
    if let Some(hit) = CACHE.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return hit.clone();
    }

    let beta = BigInt::from(dims.beta.beta());
    let half_beta = |k: i64| BigRational::new(BigInt::from(k) * &beta, BigInt::from(2));
    let upper_a = half_beta(dims.n as i64);
    let upper_b = BigRational::from_integer(-BigInt::from(r));
    let lower = half_beta((dims.m + dims.n - 1) as i64) + BigRational::one();
    let mut factorial = BigRational::one();
    let mut coefficients = Vec::new();
    for k in 0..=(r * dims.n as u32) {
        if k > 0 {
            factorial *= BigInt::from(k);
        }
        let mut c = BigRational::zero();
        for kappa in &enumerate_bounded(k, dims.n, r) {
            c += exact::pochhammer(&upper_a, kappa, dims.beta) * exact::pochhammer(&upper_b, kappa, dims.beta)
                / exact::pochhammer(&lower, kappa, dims.beta)
                * jack_identity_exact(kappa, dims.m, dims.beta);
        }
        coefficients.push(c / &factorial);
    }
    let coefficients = Arc::new(coefficients);
    CACHE
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, coefficients.clone());
    coefficients
}

/// Terminating series at `Σ = I`, summed exactly at the floating-point y so
/// that its alternating terms cannot cancel.
fn finite_identity(x: f64, dims: &ProblemDims, r: u32) -> CdfValue {
    let coefficients = identity_series_coefficients(dims, r);
    let y = x / (1.0 + x);
    let y_exact = BigRational::from_float(y).expect("finite y");
    let value = coefficients
        .iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * &y_exact + c)
        .to_f64()
        .unwrap_or(f64::NAN);
    let ln_prefactor = constant_c2_ln(dims.m, dims.n, dims.p, dims.beta).unwrap_or(f64::NAN)
        + dims.leading_power() * y.ln();
    let series = SeriesResult {
        value,
        degree_used: r * dims.n as u32,
        last_increment: coefficients.last().and_then(|c| c.to_f64()).unwrap_or(0.0) * y.powi((r * dims.n as u32) as i32),
        converged: true,
    };
    CdfValue::new(ln_prefactor.exp() * value, Route::Finite, series)
}

/// The terminating-form series truncated at the policy's degree, for
/// parameters where it does not terminate. Its terms decay like
/// `k^{−pβ/2−1} y^k`, much faster than the positive series.
pub fn cdf_largest_euler(
    x: f64,
    dims: &ProblemDims,
    scale: &ScaleSpectrum,
    trunc: &TruncationPolicy,
) -> Result<CdfValue> {
    scale.check(dims)?;
    check_x(x)?;
    if x == 0.0 {
        return Ok(CdfValue::zero(Route::Euler));
    }
    terminating_form(x, dims, scale, trunc, Route::Euler)
}

/// Real case with `Σ = I`:
/// `C₃ t^{mn/2} ₂F₁((m−p+1)/2, m/2; (n+m+1)/2; t I_n)`, `t = x/(1+x)`.
pub fn cdf_largest_identity(x: f64, dims: &ProblemDims, trunc: &TruncationPolicy) -> Result<CdfValue> {
    if dims.beta != DivisionAlgebra::Real {
        return Err(Error::Precondition(
            "the identity-scale series is only available for beta = 1".into(),
        ));
    }
    check_x(x)?;
    if x == 0.0 {
        return Ok(CdfValue::zero(Route::Identity));
    }
    let (m, n, p) = (dims.m as f64, dims.n as f64, dims.p as f64);
    let t = x / (1.0 + x);
    if dims.finite_truncation().is_some() {
        // Same termination condition: sum the exact polynomial instead.
        let poly = cached_polynomial(dims)?;
        let value = poly.bracket_exact(t);
        let series = SeriesResult {
            value,
            degree_used: poly.degree() as u32,
            last_increment: poly.coefficients.last().and_then(|c| c.to_f64()).unwrap_or(0.0) * t.powi(poly.degree() as i32),
            converged: true,
        };
        let ln_prefactor = constant_c3_ln(dims.m, dims.n, dims.p)? + m * n / 2.0 * t.ln();
        return Ok(CdfValue::new(ln_prefactor.exp() * value, Route::Identity, series));
    }
    let params = HypergeomParams::new(
        vec![(m - p + 1.0) / 2.0, m / 2.0],
        vec![(n + m + 1.0) / 2.0],
        DivisionAlgebra::Real,
    );
    let series = hyp_matrix(&params, &Spectrum::scalar(dims.n, t), trunc)?;
    let ln_prefactor = constant_c3_ln(dims.m, dims.n, dims.p)? + m * n / 2.0 * t.ln();
    Ok(CdfValue::new(ln_prefactor.exp() * series.value, Route::Identity, series))
}

/// CDF of the largest eigenvalue by the preferred route: the terminating
/// series when it terminates, otherwise the identity-scale series (β = 1,
/// Σ = I) or the truncated terminating-form series.
pub fn cdf_largest(
    x: f64,
    dims: &ProblemDims,
    scale: &ScaleSpectrum,
    trunc: &TruncationPolicy,
) -> Result<CdfValue> {
    if dims.finite_truncation().is_some() {
        cdf_largest_finite(x, dims, scale)
    } else if dims.beta == DivisionAlgebra::Real && scale.is_identity() {
        scale.check(dims)?;
        cdf_largest_identity(x, dims, trunc)
    } else {
        cdf_largest_euler(x, dims, scale, trunc)
    }
}

fn not_finite(dims: &ProblemDims) -> Error {
    Error::Precondition(format!(
        "the CDF is a finite series only when (p-m+1)*beta/2 - 1 is a non-negative integer; \
         here it is {}",
        (dims.p as f64 - dims.m as f64 + 1.0) * dims.half() - 1.0
    ))
}

/// `constant · t^{leading_power} · Σⱼ cⱼ tʲ` in `t = x/(1+x)`, with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "PolyRepr", try_from = "PolyRepr")]
pub struct RationalPoly {
    pub constant: BigRational,
    pub coefficients: Vec<BigRational>,
    pub leading_power: BigRational,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    constant: String,
    leading_power: String,
    coefficients: Vec<String>,
}

impl From<RationalPoly> for PolyRepr {
    fn from(p: RationalPoly) -> Self {
        Self {
            constant: exact::format_rational(&p.constant),
            leading_power: exact::format_rational(&p.leading_power),
            coefficients: p.coefficients.iter().map(exact::format_rational).collect(),
        }
    }
}

impl TryFrom<PolyRepr> for RationalPoly {
    type Error = Error;

    fn try_from(r: PolyRepr) -> Result<Self> {
        Ok(Self {
            constant: exact::parse_rational(&r.constant)?,
            leading_power: exact::parse_rational(&r.leading_power)?,
            coefficients: r
                .coefficients
                .iter()
                .map(|c| exact::parse_rational(c))
                .collect::<Result<_>>()?,
        })
    }
}

impl RationalPoly {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// `constant · Σ cⱼ`, the value at t = 1 (x → ∞).
    pub fn value_at_one(&self) -> BigRational {
        let sum = self.coefficients.iter().fold(BigRational::zero(), |acc, c| acc + c);
        &self.constant * sum
    }

    /// The bracketed polynomial `Σ cⱼ tʲ` evaluated exactly at a float `t`.
    fn bracket_exact(&self, t: f64) -> f64 {
        let t = BigRational::from_float(t).expect("finite t");
        let value = self
            .coefficients
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * &t + c);
        value.to_f64().unwrap_or(f64::NAN)
    }

    /// CDF value at `t ∈ [0, 1]`.
    pub fn eval_t(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let power = self.leading_power.to_f64().unwrap_or(f64::NAN);
        self.constant.to_f64().unwrap_or(f64::NAN) * t.powf(power) * self.bracket_exact(t)
    }

    /// CDF value at `x ≥ 0`.
    pub fn eval_x(&self, x: f64) -> f64 {
        self.eval_t(x / (1.0 + x))
    }

    /// Canonical `num/den` rendering of constant and coefficients.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "constant: {}\nleading_power: {}\n",
            exact::format_rational(&self.constant),
            exact::format_rational(&self.leading_power)
        );
        for (j, c) in self.coefficients.iter().enumerate() {
            out.push_str(&format!("t^{j}: {}\n", exact::format_rational(c)));
        }
        out
    }
}

/// Exact rational form of the real identity-scale CDF when it terminates.
pub fn finite_series_polynomial(dims: &ProblemDims) -> Result<RationalPoly> {
    if dims.beta != DivisionAlgebra::Real {
        return Err(Error::Precondition(
            "the exact polynomial is only available for beta = 1 and identity scale".into(),
        ));
    }
    let r = dims.finite_truncation().ok_or_else(|| not_finite(dims))?;
    let (m, n, p) = (dims.m as i64, dims.n as i64, dims.p as i64);
    let half = |num: i64| BigRational::new(BigInt::from(num), BigInt::from(2));
    let upper_a = half(m - p + 1);
    let upper_b = half(m);
    let lower = half(n + m + 1);
    let real = DivisionAlgebra::Real;

    let mut factorial = BigRational::one();
    let mut coefficients = Vec::new();
    for k in 0..=(r * dims.n as u32) {
        if k > 0 {
            factorial *= BigInt::from(k);
        }
        let mut c = BigRational::zero();
        for kappa in &enumerate_bounded(k, dims.n, r) {
            c += exact::pochhammer(&upper_a, kappa, real) * exact::pochhammer(&upper_b, kappa, real)
                / exact::pochhammer(&lower, kappa, real)
                * jack_identity_exact(kappa, dims.n, real);
        }
        coefficients.push(c / &factorial);
    }
    Ok(RationalPoly {
        constant: exact::constant_c3(dims.m, dims.n, dims.p)?,
        coefficients,
        leading_power: BigRational::new(BigInt::from(m * n), BigInt::from(2)),
    })
}

type PolyCache = Mutex<HashMap<(usize, usize, usize), Arc<RationalPoly>>>;

fn cached_polynomial(dims: &ProblemDims) -> Result<Arc<RationalPoly>> {
    static CACHE: OnceLock<PolyCache> = OnceLock::new();
    let key = (dims.m, dims.n, dims.p);
    if let Some(hit) = CACHE.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(hit.clone());
    }
    let poly = Arc::new(finite_series_polynomial(dims)?);
    CACHE
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, poly.clone());
    Ok(poly)
}

/// A solved quantile and how closely its CDF hits the target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub alpha: f64,
    pub x: f64,
    pub achieved_error: f64,
    pub route: Route,
    pub evaluations: usize,
}

/// `x` with `Pr(q₁ < x) = alpha`: bracket by doubling, then bisect.
pub fn quantile(
    alpha: f64,
    dims: &ProblemDims,
    scale: &ScaleSpectrum,
    trunc: &TruncationPolicy,
) -> Result<Quantile> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Precondition(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut evaluations = 0;
    let mut cdf = |x: f64| {
        evaluations += 1;
        cdf_largest(x, dims, scale, trunc)
    };

    let (mut lo, mut hi) = (0.0, 1.0);
    let mut doublings = 0;
    while cdf(hi)?.raw < alpha {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(Error::NonConvergence(format!(
                "no upper bracket for alpha = {alpha} below x = {hi}"
            )));
        }
    }
    let mut route = Route::Finite;
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= BISECTION_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let value = cdf(mid)?;
        route = value.route;
        if value.raw < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let value = cdf(x)?;
    let achieved_error = (value.raw - alpha).abs();
    if achieved_error > QUANTILE_TOLERANCE {
        return Err(Error::NonConvergence(format!(
            "quantile at alpha = {alpha} reached |F(x) - alpha| = {achieved_error:e}"
        )));
    }
    let _ = route;
    Ok(Quantile {
        alpha,
        x,
        achieved_error,
        route: value.route,
        evaluations,
    })
}

/// The design `(groups, variables, per-group size)` mapped to F-matrix dimensions:
/// `n = groups − 1`, `m = variables`, `p = groups · (per_group − 1)`.
pub fn roy_dims(groups: usize, variables: usize, per_group: usize) -> Result<ProblemDims> {
    if groups < 2 || per_group < 2 {
        return Err(Error::Precondition(
            "need at least two groups with at least two observations each".into(),
        ));
    }
    if groups > variables {
        return Err(Error::Precondition(format!(
            "the largest-root distribution needs the number of groups ({groups}) to be \
             less than or equal to the number of variables ({variables})"
        )));
    }
    ProblemDims::real(variables, groups - 1, groups * (per_group - 1))
}

/// Critical value of Roy's largest-root test at level `alpha` (e.g. 0.95)
/// for a balanced one-way MANOVA under the null hypothesis.
pub fn roy_test_critical(
    groups: usize,
    variables: usize,
    per_group: usize,
    alpha: f64,
    trunc: &TruncationPolicy,
) -> Result<f64> {
    let dims = roy_dims(groups, variables, per_group)?;
    quantile(alpha, &dims, &ScaleSpectrum::identity(dims.m), trunc).map(|q| q.x)
}

/// Outcome of Roy's largest-root test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoyReport {
    pub dims: ProblemDims,
    pub alpha: f64,
    pub critical_value: f64,
    pub observed: f64,
    /// Share of the largest root in the sum of the nonzero roots.
    pub proportion: f64,
    pub reject: bool,
}

/// Runs Roy's test on the nonzero eigenvalues of the sample F-matrix.
pub fn roy_test(
    groups: usize,
    variables: usize,
    per_group: usize,
    alpha: f64,
    roots: &[f64],
    trunc: &TruncationPolicy,
) -> Result<RoyReport> {
    if roots.is_empty() || roots.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return Err(Error::Precondition("roots must be a non-empty list of non-negative numbers".into()));
    }
    let dims = roy_dims(groups, variables, per_group)?;
    let critical_value = quantile(alpha, &dims, &ScaleSpectrum::identity(dims.m), trunc)?.x;
    let observed = roots.iter().copied().fold(0.0, f64::max);
    let total: f64 = roots.iter().sum();
    Ok(RoyReport {
        dims,
        alpha,
        critical_value,
        observed,
        proportion: if total > 0.0 { observed / total } else { 0.0 },
        reject: observed > critical_value,
    })
}

/// CDF on a strictly increasing grid of non-negative points.
pub fn cdf_curve(
    grid: &[f64],
    dims: &ProblemDims,
    scale: &ScaleSpectrum,
    trunc: &TruncationPolicy,
) -> Result<Vec<(f64, CdfValue)>> {
    if grid.is_empty() {
        return Err(Error::Precondition("grid must contain at least one point".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition("grid values must be strictly increasing".into()));
    }
    grid.par_iter()
        .map(|&x| cdf_largest(x, dims, scale, trunc).map(|v| (x, v)))
        .collect()
}
