//! β-multivariate gamma function, β-generalized Pochhammer symbol and the
//! normalizing constants of the F-matrix eigenvalue distributions.
//!
//! Everything gamma-laden is computed in log space; `Γ_m^β{(n+p)β/2}` overflows
//! an `f64` already for moderate dimensions. The [`exact`] submodule evaluates
//! the same constants as exact rationals for integer dimensions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::partitions::Partition;
use crate::{Error, Result};

/// Real (β = 1), complex (β = 2) or quaternion (β = 4) matrix entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum DivisionAlgebra {
    Real,
    Complex,
    Quaternion,
}

impl DivisionAlgebra {
    pub fn from_beta(beta: u32) -> Result<Self> {
        match beta {
            1 => Ok(Self::Real),
            2 => Ok(Self::Complex),
            4 => Ok(Self::Quaternion),
            other => Err(Error::Precondition(format!(
                "beta must be 1, 2 or 4, got {other}"
            ))),
        }
    }

    pub fn beta(self) -> u32 {
        match self {
            Self::Real => 1,
            Self::Complex => 2,
            Self::Quaternion => 4,
        }
    }

    /// β/2 as a float; the step between rows of a generalized Pochhammer symbol.
    pub fn half(self) -> f64 {
        self.beta() as f64 / 2.0
    }

    /// Jack parameter α = 2/β used by the polynomial recursions.
    ///
    /// This is the only place the two parameter conventions meet.
    pub fn alpha(self) -> f64 {
        2.0 / self.beta() as f64
    }
}

impl TryFrom<u32> for DivisionAlgebra {
    type Error = Error;

    fn try_from(beta: u32) -> Result<Self> {
        Self::from_beta(beta)
    }
}

impl From<DivisionAlgebra> for u32 {
    fn from(value: DivisionAlgebra) -> u32 {
        value.beta()
    }
}

/// Argument of `Γ_m^β(c)`, validated against `c > (m-1)β/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaArg {
    c: f64,
    m: usize,
    beta: DivisionAlgebra,
}

impl GammaArg {
    pub fn new(m: usize, beta: DivisionAlgebra, c: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("multivariate gamma needs m >= 1".into()));
        }
        let bound = (m as f64 - 1.0) * beta.half();
        if !(c > bound) {
            return Err(Error::Domain(format!(
                "multivariate gamma Γ_{m}^{}({c}) needs c > {bound}",
                beta.beta()
            )));
        }
        Ok(Self { c, m, beta })
    }

    pub fn ln_value(&self) -> f64 {
        let m = self.m as f64;
        let pi_power = m * (m - 1.0) * self.beta.beta() as f64 / 4.0;
        let gammas: f64 = (0..self.m)
            .map(|i| ln_gamma(self.c - i as f64 * self.beta.half()))
            .sum();
        pi_power * PI.ln() + gammas
    }
}

/// Natural log of `Γ_m^β(c) = π^{m(m-1)β/4} Π Γ(c - (i-1)β/2)`.
pub fn mv_gamma_ln(m: usize, beta: DivisionAlgebra, c: f64) -> Result<f64> {
    GammaArg::new(m, beta, c).map(|g| g.ln_value())
}

/// `(a)_κ^β = Π_i (a - (i-1)β/2)_{κ_i}`; 1 for the empty partition.
pub fn pochhammer_beta(a: f64, kappa: &Partition, beta: DivisionAlgebra) -> f64 {
    let h = beta.half();
    kappa
        .parts()
        .iter()
        .enumerate()
        .map(|(i, &k)| rising(a - i as f64 * h, k))
        .product()
}

pub(crate) fn rising(x: f64, k: u32) -> f64 {
    (0..k).map(|j| x + j as f64).product()
}

/// The volume exponent of the Stiefel-manifold Jacobian: 0 for β = 1, −nβ/2 otherwise.
pub fn volume_exponent(beta: DivisionAlgebra, n: usize) -> f64 {
    match beta {
        DivisionAlgebra::Real => 0.0,
        _ => -(n as f64) * beta.half(),
    }
}

pub(crate) fn check_dims(m: usize, n: usize, p: usize) -> Result<()> {
    if n >= 1 && m > n && p >= m {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "dimensions must satisfy p >= m > n >= 1, got m={m}, n={n}, p={p}"
        )))
    }
}

/// Log of the joint eigenvalue density constant, including `|Σ|^{-nβ/2}`
/// via `sigma_logdet = ln|Σ|`.
pub fn constant_c1_ln(
    m: usize,
    n: usize,
    p: usize,
    beta: DivisionAlgebra,
    sigma_logdet: f64,
) -> Result<f64> {
    check_dims(m, n, p)?;
    let (mf, nf, pf, h) = (m as f64, n as f64, p as f64, beta.half());
    let pi_power = nf * nf * h + volume_exponent(beta, n);
    Ok(pi_power * PI.ln() - nf * h * sigma_logdet + mv_gamma_ln(m, beta, (nf + pf) * h)?
        - mv_gamma_ln(n, beta, nf * h)?
        - mv_gamma_ln(m, beta, pf * h)?
        - mv_gamma_ln(n, beta, mf * h)?)
}

/// Log of the largest-eigenvalue CDF constant
/// `Γ_m{(n+p)β/2} Γ_n{(n-1)β/2+1} / (Γ_m{pβ/2} Γ_n{(m+n-1)β/2+1})`.
pub fn constant_c2_ln(m: usize, n: usize, p: usize, beta: DivisionAlgebra) -> Result<f64> {
    check_dims(m, n, p)?;
    let (mf, nf, pf, h) = (m as f64, n as f64, p as f64, beta.half());
    Ok(mv_gamma_ln(m, beta, (nf + pf) * h)? + mv_gamma_ln(n, beta, (nf - 1.0) * h + 1.0)?
        - mv_gamma_ln(m, beta, pf * h)?
        - mv_gamma_ln(n, beta, (mf + nf - 1.0) * h + 1.0)?)
}

/// Log of the real identity-scale constant
/// `Γ_m{(n+p)/2} Γ_n{(n+1)/2} / (Γ_m{p/2} Γ_n{(m+n+1)/2})`.
pub fn constant_c3_ln(m: usize, n: usize, p: usize) -> Result<f64> {
    check_dims(m, n, p)?;
    let (mf, nf, pf) = (m as f64, n as f64, p as f64);
    let real = DivisionAlgebra::Real;
    Ok(mv_gamma_ln(m, real, (nf + pf) / 2.0)? + mv_gamma_ln(n, real, (nf + 1.0) / 2.0)?
        - mv_gamma_ln(m, real, pf / 2.0)?
        - mv_gamma_ln(n, real, (mf + nf + 1.0) / 2.0)?)
}

/// Exact rational evaluation of the gamma ratios.
///
/// All gamma arguments of `C₂` and `C₃` are multiples of 1/2 for integer
/// dimensions and β ∈ {1, 2, 4}. `Γ(k + 1/2)` is a rational multiple of √π,
/// so each constant is tracked as a rational times a power of √π.
pub mod exact {
    use num::bigint::BigInt;
    use num::rational::BigRational;
    use num::{One, Signed, Zero};

    use super::{check_dims, DivisionAlgebra};
    use crate::partitions::Partition;
    use crate::{Error, Result};

    /// `value · √π^{sqrt_pi}`.
    #[derive(Clone, Debug, PartialEq, Eq)]
    pub struct PiRational {
        pub value: BigRational,
        pub sqrt_pi: i64,
    }

    impl PiRational {
        fn one() -> Self {
            Self {
                value: BigRational::one(),
                sqrt_pi: 0,
            }
        }

        fn mul(self, other: &Self) -> Self {
            Self {
                value: self.value * &other.value,
                sqrt_pi: self.sqrt_pi + other.sqrt_pi,
            }
        }

        fn div(self, other: &Self) -> Self {
            Self {
                value: self.value / &other.value,
                sqrt_pi: self.sqrt_pi - other.sqrt_pi,
            }
        }

        /// The rational value, provided every √π has cancelled.
        pub fn into_rational(self) -> Result<BigRational> {
            if self.sqrt_pi == 0 {
                Ok(self.value)
            } else {
                Err(Error::Domain(format!(
                    "value carries a residual factor √π^{}",
                    self.sqrt_pi
                )))
            }
        }
    }

    fn factorial(k: u64) -> BigInt {
        (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
    }

    /// `Γ(t/2)` for a positive integer `t`.
    pub fn gamma_half_integer(twice: i64) -> Result<PiRational> {
        if twice <= 0 {
            return Err(Error::Domain(format!("Γ({twice}/2) is not finite")));
        }
        let t = twice as u64;
        if t.is_multiple_of(2) {
            Ok(PiRational {
                value: BigRational::from_integer(factorial(t / 2 - 1)),
                sqrt_pi: 0,
            })
        } else {
            // Γ(k + 1/2) = (2k)! / (4^k k!) √π
            let k = (t - 1) / 2;
            let num = factorial(2 * k);
            let den = BigInt::from(4u32).pow(k as u32) * factorial(k);
            Ok(PiRational {
                value: BigRational::new(num, den),
                sqrt_pi: 1,
            })
        }
    }

    /// `Γ_m^β(c)` with `c = twice_c / 2`.
    pub fn mv_gamma_half_integer(m: usize, beta: DivisionAlgebra, twice_c: i64) -> Result<PiRational> {
        let b = beta.beta() as i64;
        let m_i = m as i64;
        // π^{m(m-1)β/4} = √π^{m(m-1)β/2}; m(m-1) is even.
        let mut acc = PiRational {
            value: BigRational::one(),
            sqrt_pi: m_i * (m_i - 1) * b / 2,
        };
        for i in 0..m_i {
            acc = acc.mul(&gamma_half_integer(twice_c - i * b)?);
        }
        Ok(acc)
    }

    /// Exact `C₂` for integer dimensions.
    pub fn constant_c2(m: usize, n: usize, p: usize, beta: DivisionAlgebra) -> Result<BigRational> {
        check_dims(m, n, p)?;
        let (m_i, n_i, p_i, b) = (m as i64, n as i64, p as i64, beta.beta() as i64);
        PiRational::one()
            .mul(&mv_gamma_half_integer(m, beta, (n_i + p_i) * b)?)
            .mul(&mv_gamma_half_integer(n, beta, (n_i - 1) * b + 2)?)
            .div(&mv_gamma_half_integer(m, beta, p_i * b)?)
            .div(&mv_gamma_half_integer(n, beta, (m_i + n_i - 1) * b + 2)?)
            .into_rational()
    }

    /// Exact `C₃` (real case, identity scale).
    pub fn constant_c3(m: usize, n: usize, p: usize) -> Result<BigRational> {
        constant_c2(m, n, p, DivisionAlgebra::Real)
    }

    /// `(a)_κ^β` over the rationals.
    pub fn pochhammer(a: &BigRational, kappa: &Partition, beta: DivisionAlgebra) -> BigRational {
        let step = BigRational::new(BigInt::from(beta.beta()), BigInt::from(2));
        let mut acc = BigRational::one();
        for (i, &k) in kappa.parts().iter().enumerate() {
            let base = a - &step * BigInt::from(i as u64);
            for j in 0..k {
                let factor = &base + BigInt::from(j);
                if factor.is_zero() {
                    return BigRational::zero();
                }
                acc *= factor;
            }
        }
        acc
    }

    /// Renders `num/den` with the sign on the numerator, or a bare integer.
    pub fn format_rational(q: &BigRational) -> String {
        if q.denom().is_one() {
            q.numer().to_string()
        } else {
            let sign = if q.is_negative() { "-" } else { "" };
            format!("{sign}{}/{}", q.numer().abs(), q.denom())
        }
    }

    /// Parses the format written by [`format_rational`].
    pub fn parse_rational(s: &str) -> Result<BigRational> {
        let bad = || Error::Precondition(format!("not a rational: {s:?}"));
        let (num, den) = match s.trim().split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s.trim(), "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(num, den))
    }
}
