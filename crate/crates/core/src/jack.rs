//! C-normalized Jack polynomials `C_κ^β` evaluated at real spectra.
//!
//! Values are computed through the J-normalized polynomials with the
//! horizontal-strip recursion
//!
//! ```text
//! J_κ(x_1..x_d) = Σ_{μ ⊆ κ, κ/μ a horizontal strip} J_μ(x_1..x_{d-1}) x_d^{|κ|-|μ|} β_{κμ}
//! ```
//!
//! whose coefficients are non-negative and independent of the spectrum, so the
//! evaluation is plain polynomial arithmetic and valid for entries of any sign.
//! The conversion `C_κ = α^k k! / j_κ · J_κ` uses the hook product `j_κ`.
//! Internally the Jack parameter is α = 2/β (see [`DivisionAlgebra::alpha`]).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num::rational::BigRational;
use num::{BigInt, One};

use crate::partitions::{enumerate_bounded, Partition};
use crate::specialfn::{exact, DivisionAlgebra};
use crate::{Error, Result};

/// Eigenvalues standing in for a Hermitian matrix argument, sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("spectrum must have at least one entry".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("spectrum entry {bad} is not finite")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    /// Spectrum of the identity matrix `I_d`.
    pub fn ones(d: usize) -> Self {
        Self::scalar(d, 1.0)
    }

    /// Spectrum of `t·I_d`.
    pub fn scalar(d: usize, t: f64) -> Self {
        assert!(d >= 1, "spectrum dimension must be positive");
        Self {
            values: vec![t; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut values: Vec<f64> = self.values.iter().map(|v| v * c).collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values }
    }

    /// Largest absolute entry.
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// True when every entry equals the first one.
    pub fn is_scalar(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }
}

/// Upper and lower hook lengths of cell (i, j) (0-based) of `kappa` for parameter α.
fn hooks(kappa: &Partition, conj: &Partition, i: usize, j: usize, alpha: f64) -> (f64, f64) {
    let leg = conj.part(j) as f64 - (i as f64 + 1.0);
    let arm = kappa.part(i) as f64 - (j as f64 + 1.0);
    (leg + alpha * (arm + 1.0), leg + 1.0 + alpha * arm)
}

/// `α^k k! / j_κ`, the factor turning `J_κ` into `C_κ`.
pub(crate) fn c_normalization(kappa: &Partition, alpha: f64) -> f64 {
    let conj = kappa.conjugate();
    kappa
        .cells()
        .enumerate()
        .map(|(c, (i, j))| {
            let (up, low) = hooks(kappa, &conj, i, j, alpha);
            alpha * (c as f64 + 1.0) / (up * low)
        })
        .product()
}

/// Recursion coefficient `β_{κμ}` for a horizontal strip κ/μ.
fn strip_coefficient(kappa: &Partition, mu: &Partition, alpha: f64) -> f64 {
    let kc = kappa.conjugate();
    let mc = mu.conjugate();
    let pick = |nu: &Partition, nc: &Partition, i: usize, j: usize| {
        let (up, low) = hooks(nu, nc, i, j, alpha);
        if kc.part(j) == mc.part(j) {
            up
        } else {
            low
        }
    };
    let num: f64 = kappa.cells().map(|(i, j)| pick(kappa, &kc, i, j)).product();
    let den: f64 = mu.cells().map(|(i, j)| pick(mu, &mc, i, j)).product();
    num / den
}

/// Every μ such that κ/μ is a horizontal strip (κ itself included).
fn horizontal_strips(kappa: &Partition) -> Vec<Partition> {
    let parts = kappa.parts();
    let mut out = Vec::new();
    let mut current = vec![0u32; parts.len()];
    fn rec(parts: &[u32], i: usize, current: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if i == parts.len() {
            let trimmed: Vec<u32> = current.iter().copied().take_while(|&v| v > 0).collect();
            out.push(Partition::from_sorted(trimmed));
            return;
        }
        let lo = parts.get(i + 1).copied().unwrap_or(0);
        for v in (lo..=parts[i]).rev() {
            current[i] = v;
            rec(parts, i + 1, current, out);
        }
    }
    rec(parts, 0, &mut current, &mut out);
    out
}

#[derive(Clone, Copy, Debug)]
struct Strip {
    mu: usize,
    removed: u32,
    coeff: f64,
}

/// Precomputed recursion structure for every partition of degree at most
/// `max_degree` with bounded length (and optionally bounded first part).
///
/// Tables are immutable once built; [`JackTable::shared`] hands out cached
/// instances that any number of threads may evaluate concurrently.
#[derive(Debug)]
pub struct JackTable {
    beta: DivisionAlgebra,
    max_degree: u32,
    max_length: usize,
    max_part: Option<u32>,
    partitions: Vec<Partition>,
    degree_start: Vec<usize>,
    index: HashMap<Partition, usize>,
    strips: Vec<Vec<Strip>>,
    normalization: Vec<f64>,
}

type TableKey = (u32, u32, usize, Option<u32>);

fn table_cache() -> &'static Mutex<HashMap<TableKey, Arc<JackTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<JackTable>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

impl JackTable {
    pub fn new(beta: DivisionAlgebra, max_degree: u32, max_length: usize) -> Self {
        Self::build(beta, max_degree, max_length, None)
    }

    pub fn with_max_part(
        beta: DivisionAlgebra,
        max_degree: u32,
        max_length: usize,
        max_part: Option<u32>,
    ) -> Self {
        Self::build(beta, max_degree, max_length, max_part)
    }

    /// A process-wide cached table.
    pub fn shared(
        beta: DivisionAlgebra,
        max_degree: u32,
        max_length: usize,
        max_part: Option<u32>,
    ) -> Arc<Self> {
        let key = (beta.beta(), max_degree, max_length, max_part);
        let mut cache = table_cache().lock().unwrap_or_else(|e| e.into_inner());
        cache
            .entry(key)
            .or_insert_with(|| Arc::new(Self::build(beta, max_degree, max_length, max_part)))
            .clone()
    }

    fn build(beta: DivisionAlgebra, max_degree: u32, max_length: usize, max_part: Option<u32>) -> Self {
        let alpha = beta.alpha();
        let mut partitions = Vec::new();
        let mut degree_start = Vec::with_capacity(max_degree as usize + 2);
        for k in 0..=max_degree {
            degree_start.push(partitions.len());
            let cap = max_part.unwrap_or(k);
            partitions.extend(enumerate_bounded(k, max_length, cap).into_vec());
        }
        degree_start.push(partitions.len());

        let index: HashMap<Partition, usize> = partitions
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let strips = partitions
            .iter()
            .map(|kappa| {
                horizontal_strips(kappa)
                    .into_iter()
                    .map(|mu| Strip {
                        removed: kappa.weight() - mu.weight(),
                        coeff: strip_coefficient(kappa, &mu, alpha),
                        mu: index[&mu],
                    })
                    .collect()
            })
            .collect();
        let normalization = partitions.iter().map(|k| c_normalization(k, alpha)).collect();
        Self {
            beta,
            max_degree,
            max_length,
            max_part,
            partitions,
            degree_start,
            index,
            strips,
            normalization,
        }
    }

    pub fn beta(&self) -> DivisionAlgebra {
        self.beta
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn max_part(&self) -> Option<u32> {
        self.max_part
    }

    /// All partitions, by degree then reverse-lexicographically.
    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// Index range of the partitions of degree `k`.
    pub fn degree_range(&self, k: u32) -> std::ops::Range<usize> {
        let k = k as usize;
        self.degree_start[k]..self.degree_start[k + 1]
    }

    pub fn index_of(&self, kappa: &Partition) -> Option<usize> {
        self.index.get(kappa).copied()
    }

    /// `C_κ^β(x)` for every partition of the table, aligned with [`Self::partitions`].
    pub fn evaluate(&self, x: &Spectrum) -> Vec<f64> {
        let n = self.partitions.len();
        let mut current = vec![0.0; n];
        current[0] = 1.0;
        let mut next = vec![0.0; n];
        let mut powers = vec![1.0; self.max_degree as usize + 1];
        for &xv in x.values() {
            for e in 1..powers.len() {
                powers[e] = powers[e - 1] * xv;
            }
            for (slot, strips) in next.iter_mut().zip(&self.strips) {
                *slot = strips
                    .iter()
                    .map(|s| current[s.mu] * powers[s.removed as usize] * s.coeff)
                    .sum();
            }
            std::mem::swap(&mut current, &mut next);
        }
        current
            .iter_mut()
            .zip(&self.normalization)
            .for_each(|(v, c)| *v *= c);
        current
    }
}

/// `C_κ^β(x)`; zero when κ has more parts than `x` has entries.
pub fn jack_eval(kappa: &Partition, x: &Spectrum, beta: DivisionAlgebra) -> f64 {
    if kappa.len() > x.dim() {
        return 0.0;
    }
    let table = JackTable::shared(beta, kappa.weight(), kappa.len().max(1), Some(kappa.first()));
    let idx = table.index_of(kappa).expect("partition is within its own table");
    table.evaluate(x)[idx]
}

/// `C_κ^β(I_d) = α^{2k} k! (dβ/2)_κ^β / j_κ`, evaluated cell by cell.
pub fn jack_identity(kappa: &Partition, d: usize, beta: DivisionAlgebra) -> f64 {
    if kappa.len() > d {
        return 0.0;
    }
    let alpha = beta.alpha();
    let a = d as f64 * beta.half();
    let conj = kappa.conjugate();
    kappa
        .cells()
        .enumerate()
        .map(|(c, (i, j))| {
            let (up, low) = hooks(kappa, &conj, i, j, alpha);
            let rising = a - i as f64 * beta.half() + j as f64;
            alpha * alpha * (c as f64 + 1.0) * rising / (up * low)
        })
        .product()
}

/// `C_κ^β(t·I_d) = t^{|κ|} C_κ^β(I_d)`.
pub fn jack_scalar_identity(kappa: &Partition, d: usize, t: f64, beta: DivisionAlgebra) -> f64 {
    t.powi(kappa.weight() as i32) * jack_identity(kappa, d, beta)
}

/// `C_κ^β(I_d)` as an exact rational.
pub fn jack_identity_exact(kappa: &Partition, d: usize, beta: DivisionAlgebra) -> BigRational {
    if kappa.len() > d {
        return BigRational::from_integer(BigInt::from(0));
    }
    let alpha = BigRational::new(BigInt::from(2), BigInt::from(beta.beta()));
    let conj = kappa.conjugate();
    let a = BigRational::new(BigInt::from(d as u64 * beta.beta() as u64), BigInt::from(2));
    let mut acc = exact::pochhammer(&a, kappa, beta);
    for (c, (i, j)) in kappa.cells().enumerate() {
        let leg = BigRational::from_integer(BigInt::from(conj.part(j) as i64 - i as i64 - 1));
        let arm = BigRational::from_integer(BigInt::from(kappa.part(i) as i64 - j as i64 - 1));
        let up = &leg + &alpha * (&arm + BigRational::one());
        let low = &leg + BigRational::one() + &alpha * &arm;
        acc = acc * &alpha * &alpha * BigInt::from(c as u64 + 1) / (up * low);
    }
    acc
}
