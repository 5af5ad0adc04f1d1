//! Monte Carlo draws of singular Wishart and F-matrix spectra.
//!
//! All three ensembles are handled as complex matrices. Real draws have zero
//! imaginary parts; a quaternion entry `a + bi + cj + dk` becomes the complex
//! block `[[a+bi, c+di], [−c+di, a−bi]]`, which doubles every eigenvalue's
//! multiplicity.
//!
//! Entry variances follow the β-normal density `∝ exp(−β/2 · tr X*Σ⁻¹X)`:
//! a real entry has variance 1, each complex part 1/2, each quaternion part 1/4.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigdist::ProblemDims;
use crate::jack::Spectrum;
use crate::specialfn::DivisionAlgebra;
use crate::{Error, Result};

/// Draws per RNG stream in [`sample_largest`]; fixed so results do not depend
/// on the thread count.
pub const CHUNK: usize = 1024;

const MAX_REDRAWS: usize = 16;

/// A reproducible random stream: `(seed, stream)` always yields the same draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// An m×n β-Gaussian matrix with zero mean and row covariance `diag(scale)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMatrixSpec {
    pub rows: usize,
    pub cols: usize,
    pub beta: DivisionAlgebra,
    pub scale: Vec<f64>,
}

impl GaussianMatrixSpec {
    pub fn new(rows: usize, cols: usize, beta: DivisionAlgebra, scale: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Precondition("matrix dimensions must be positive".into()));
        }
        if scale.len() != rows {
            return Err(Error::Dimension(format!(
                "scale has {} entries for {rows} rows",
                scale.len()
            )));
        }
        if scale.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Precondition("scale entries must be positive".into()));
        }
        Ok(Self { rows, cols, beta, scale })
    }

    pub fn standard(rows: usize, cols: usize, beta: DivisionAlgebra) -> Self {
        Self { rows, cols, beta, scale: vec![1.0; rows] }
    }

    /// Complex representation: `rows×cols`, or `2rows×2cols` for quaternions.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix<Complex64> {
        let mut normal = |sd: f64| sd * rng.sample::<f64, _>(StandardNormal);
        match self.beta {
            DivisionAlgebra::Real => DMatrix::from_fn(self.rows, self.cols, |i, _| {
                Complex64::new(self.scale[i].sqrt() * normal(1.0), 0.0)
            }),
            DivisionAlgebra::Complex => {
                let sd = 0.5f64.sqrt();
                let mut out = DMatrix::zeros(self.rows, self.cols);
                for j in 0..self.cols {
                    for i in 0..self.rows {
                        let s = self.scale[i].sqrt();
                        out[(i, j)] = Complex64::new(s * normal(sd), s * normal(sd));
                    }
                }
                out
            }
            DivisionAlgebra::Quaternion => {
                let mut out = DMatrix::zeros(2 * self.rows, 2 * self.cols);
                for j in 0..self.cols {
                    for i in 0..self.rows {
                        let s = self.scale[i].sqrt();
                        let [a, b, c, d] = [0; 4].map(|_| s * normal(0.5));
                        out[(2 * i, 2 * j)] = Complex64::new(a, b);
                        out[(2 * i, 2 * j + 1)] = Complex64::new(c, d);
                        out[(2 * i + 1, 2 * j)] = Complex64::new(-c, d);
                        out[(2 * i + 1, 2 * j + 1)] = Complex64::new(a, -b);
                    }
                }
                out
            }
        }
    }
}

/// Eigenvalues of a Hermitian matrix in decreasing order, with quaternion
/// pairs collapsed to one value each.
fn hermitian_spectrum(h: DMatrix<Complex64>, beta: DivisionAlgebra) -> Vec<f64> {
    let mut values: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    if beta == DivisionAlgebra::Quaternion {
        values = values.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect();
    }
    values
}

/// Nonzero eigenvalues of `XX*` for one draw of X (m×n, m > n), computed
/// from the n×n Gram matrix `X*X`.
pub fn sample_singular_wishart_spectrum<R: Rng + ?Sized>(
    spec: &GaussianMatrixSpec,
    rng: &mut R,
) -> Result<Spectrum> {
    if spec.rows <= spec.cols {
        return Err(Error::Precondition(format!(
            "a singular Wishart matrix needs m > n, got m = {} and n = {}",
            spec.rows, spec.cols
        )));
    }
    let x = spec.draw(rng);
    Spectrum::new(hermitian_spectrum(x.adjoint() * &x, spec.beta))
}

/// Largest eigenvalue of `Z*B⁻¹Z` with `B = LL*`, i.e. of `W*W` for `W = L⁻¹Z`.
fn largest_of_ratio(z: &DMatrix<Complex64>, b: DMatrix<Complex64>, beta: DivisionAlgebra) -> Result<f64> {
    let chol = b
        .cholesky()
        .ok_or_else(|| Error::Factorization("denominator matrix is not positive definite".into()))?;
    let w = chol
        .l()
        .solve_lower_triangular(z)
        .ok_or_else(|| Error::Factorization("triangular solve failed".into()))?;
    Ok(hermitian_spectrum(w.adjoint() * &w, beta)[0])
}

/// Largest eigenvalue of the singular F-matrix `T⁻¹A T⁻*`, `B = T*T`, with
/// `A ~ W_m(n, diag(scale1))` and `B ~ W_m(p, diag(scale2))`.
pub fn sample_f_largest<R: Rng + ?Sized>(
    dims: &ProblemDims,
    scale1: &[f64],
    scale2: &[f64],
    rng: &mut R,
) -> Result<f64> {
    let numerator = GaussianMatrixSpec::new(dims.m, dims.n, dims.beta, scale1.to_vec())?;
    let denominator = GaussianMatrixSpec::new(dims.m, dims.p, dims.beta, scale2.to_vec())?;
    let z = numerator.draw(rng);
    let y = denominator.draw(rng);
    largest_of_ratio(&z, &y * y.adjoint(), dims.beta)
}

/// Largest eigenvalue of `AB⁺` with `A ~ W_p(n, I)`, `B ~ W_p(m, I)` and
/// `B⁺` the Moore–Penrose inverse, for `p > m > n`.
///
/// With `A = ZZ*`, `B = YY*` and `G = Y*Y`: `B⁺ = Y G⁻² Y*`, so the nonzero
/// eigenvalues are those of `N*N` for `N = G⁻¹(Y*Z)`.
pub fn sample_moore_penrose_largest<R: Rng + ?Sized>(
    p_dim: usize,
    m: usize,
    n: usize,
    beta: DivisionAlgebra,
    rng: &mut R,
) -> Result<f64> {
    if !(p_dim > m && m > n && n >= 1) {
        return Err(Error::Precondition(format!(
            "the Moore-Penrose ratio needs p > m > n >= 1, got p = {p_dim}, m = {m}, n = {n}"
        )));
    }
    let z = GaussianMatrixSpec::standard(p_dim, n, beta).draw(rng);
    let y = GaussianMatrixSpec::standard(p_dim, m, beta).draw(rng);
    let gram = y.adjoint() * &y;
    let cross = y.adjoint() * z;
    let solved = gram
        .cholesky()
        .ok_or_else(|| Error::Factorization("denominator Gram matrix is singular".into()))?
        .solve(&cross);
    Ok(hermitian_spectrum(solved.adjoint() * solved, beta)[0])
}

/// The random matrix whose largest eigenvalue is sampled.
#[derive(Clone, Debug, PartialEq)]
pub enum RatioModel {
    FMatrix {
        dims: ProblemDims,
        scale1: Vec<f64>,
        scale2: Vec<f64>,
    },
    MoorePenrose {
        p_dim: usize,
        m: usize,
        n: usize,
        beta: DivisionAlgebra,
    },
}

impl RatioModel {
    pub fn f_matrix_identity(dims: ProblemDims) -> Self {
        RatioModel::FMatrix { dims, scale1: vec![1.0; dims.m], scale2: vec![1.0; dims.m] }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let mut last = None;
        for _ in 0..MAX_REDRAWS {
            let value = match self {
                RatioModel::FMatrix { dims, scale1, scale2 } => sample_f_largest(dims, scale1, scale2, rng),
                RatioModel::MoorePenrose { p_dim, m, n, beta } => {
                    sample_moore_penrose_largest(*p_dim, *m, *n, *beta, rng)
                }
            };
            match value {
                Err(e @ Error::Factorization(_)) => last = Some(e),
                other => return other,
            }
        }
        Err(last.expect("at least one draw"))
    }
}

/// `count` independent largest eigenvalues, drawn in parallel. Chunk `i` of
/// [`CHUNK`] draws uses stream `i` of `seed`, so the output is identical for
/// any thread count.
pub fn sample_largest(model: &RatioModel, count: usize, seed: u64) -> Result<Vec<f64>> {
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i as u64).rng();
            let len = CHUNK.min(count - i * CHUNK);
            (0..len).map(|_| model.draw(&mut rng)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// Right-continuous empirical distribution function.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(Error::Precondition("samples contain NaN".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Fraction of samples `> x`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        1.0 - self.eval(x)
    }

    /// Kolmogorov–Smirnov distance to `cdf`, checked on both sides of every jump.
    pub fn ks_distance<F>(&self, cdf: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let n = self.len() as f64;
        let gaps = self
            .sorted
            .par_iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x)?;
                Ok(((i + 1) as f64 / n - f).max(f - i as f64 / n))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(gaps.into_iter().fold(0.0, f64::max))
    }
}

/// Shorthand for `EmpiricalCdf::new(samples)?.ks_distance(cdf)`.
pub fn ks_distance<F>(samples: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    EmpiricalCdf::new(samples.to_vec())?.ks_distance(cdf)
}

/// Asymptotic one-sample KS critical value `√(−ln(level/2)/2) / √N`.
pub fn ks_critical_value(sample_size: usize, level: f64) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt() / (sample_size as f64).sqrt()
}

/// Writes one sample per line under a `largest` header.
pub fn write_samples_csv(path: &Path, samples: &[f64]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "largest")?;
    for v in samples {
        writeln!(out, "{v:.16e}")?;
    }
    out.flush()
}

/// Eigenvalues of the full m×m product `XX*` for one draw, decreasing.
/// Used to confirm that only n of them are nonzero.
pub fn full_wishart_spectrum<R: Rng + ?Sized>(spec: &GaussianMatrixSpec, rng: &mut R) -> Vec<f64> {
    let x = spec.draw(rng);
    hermitian_spectrum(&x * x.adjoint(), spec.beta)
}

/// Largest deviation from Hermitian symmetry, `max |Hᵢⱼ − conj(Hⱼᵢ)|`.
pub fn hermitian_defect(h: &DMatrix<Complex64>) -> f64 {
    let diff = h - h.adjoint();
    diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Squared Frobenius norm, counting each quaternion entry once.
pub fn frobenius_sq(x: &DMatrix<Complex64>, beta: DivisionAlgebra) -> f64 {
    let total: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    if beta == DivisionAlgebra::Quaternion {
        total / 2.0
    } else {
        total
    }
}
