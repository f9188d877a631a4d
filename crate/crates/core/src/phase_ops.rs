//! Susskind-Glogower phase operators and quantization of phase-only symbols.
//!
//! `ê^{iφ} = Σ|n⟩⟨n+1|` lowers, `ê^{−iφ} = Σ|n+1⟩⟨n|` raises. For a symbol
//! `f(φ)` the operator `f̂ = ∫ f(φ)|φ⟩⟨φ| dφ` only depends on the Fourier
//! coefficients of `f`: `⟨k|f̂|n⟩ = f̃_{n−k}`, a Toeplitz matrix.

use crate::dft::Modes;
use crate::fock::{OperatorMatrix, Truncation};
use crate::{Error, Result, C64};

pub fn sg_lower(t: Truncation) -> OperatorMatrix {
    let d = t.dim();
    let mut m = OperatorMatrix::zeros(d, d);
    for n in 0..d.saturating_sub(1) {
        m[(n, n + 1)] = C64::new(1.0, 0.0);
    }
    m
}

pub fn sg_raise(t: Truncation) -> OperatorMatrix {
    sg_lower(t).adjoint()
}

/// `(ê^{iφ})^k (ê^{−iφ})^m`. Equals the shift `ê^{i(k−m)φ}` on the leading
/// `D − max(k, m)` block.
pub fn sg_power_product(t: Truncation, k: usize, m: usize) -> Result<OperatorMatrix> {
    if k + m >= t.dim() && k + m > 0 {
        return Err(Error::InvalidParameter(format!(
            "k + m = {} leaves no valid block in dimension {}",
            k + m,
            t.dim()
        )));
    }
    let lower = sg_lower(t);
    let raise = sg_raise(t);
    let mut out = OperatorMatrix::identity(t.dim(), t.dim());
    for _ in 0..k {
        out = &out * &lower;
    }
    for _ in 0..m {
        out = &out * &raise;
    }
    Ok(out)
}

/// Phase-only symbol given by its Fourier coefficients
/// `f̃_m = (1/2π)∫ f(φ) e^{−imφ} dφ`, `m = −m_max … m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSymbol {
    m_max: usize,
    coefs: Vec<C64>,
}

impl FourierSymbol {
    /// `coefs[i]` is the coefficient of `m = i − m_max`.
    pub fn new(m_max: usize, coefs: Vec<C64>) -> Result<Self> {
        if coefs.len() != 2 * m_max + 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients for m_max = {m_max}, got {}",
                2 * m_max + 1,
                coefs.len()
            )));
        }
        if coefs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("Fourier symbol"));
        }
        Ok(Self { m_max, coefs })
    }

    pub fn from_fn(m_max: usize, f: impl Fn(i64) -> C64) -> Self {
        let coefs = (-(m_max as i64)..=m_max as i64).map(f).collect();
        Self { m_max, coefs }
    }

    /// Symbol `e^{imφ}`.
    pub fn exp_i(m: i64) -> Self {
        Self::from_fn(m.unsigned_abs() as usize, |k| {
            if k == m {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Coefficients `|m| ≤ m_max` of uniform samples on `φ_j = −π + 2πj/M`.
    /// Exact for trigonometric polynomials of degree below `M/2`.
    pub fn from_samples(samples: &[C64], m_max: usize) -> Result<Self> {
        if samples.len() < 2 * m_max + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} samples cannot resolve modes up to {m_max}",
                samples.len()
            )));
        }
        let modes = Modes::analyze(samples);
        Ok(Self::from_fn(m_max, |m| modes.get(m)))
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn coefs(&self) -> &[C64] {
        &self.coefs
    }

    /// `f̃_m`, zero outside the stored band.
    pub fn coef(&self, m: i64) -> C64 {
        if m.unsigned_abs() as usize > self.m_max {
            return C64::new(0.0, 0.0);
        }
        self.coefs[(m + self.m_max as i64) as usize]
    }

    /// Linear combination `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &FourierSymbol, b: C64) -> FourierSymbol {
        let m_max = self.m_max.max(other.m_max);
        Self::from_fn(m_max, |m| a * self.coef(m) + b * other.coef(m))
    }
}

/// `f̂ = ∫ f(φ)|φ⟩⟨φ| dφ`, i.e. `⟨k|f̂|n⟩ = f̃_{n−k}`.
pub fn quantize_phase_function(t: Truncation, f: &FourierSymbol) -> OperatorMatrix {
    let d = t.dim();
    OperatorMatrix::from_fn(d, d, |k, n| f.coef(n as i64 - k as i64))
}

/// Phase-only quantization from samples on a uniform grid. Needs
/// `M ≥ 2D−1` samples so that no coefficient `|m| ≤ D−1` is aliased.
pub fn quantize_phase_samples(t: Truncation, samples: &[C64]) -> Result<OperatorMatrix> {
    let required = 2 * t.dim() - 1;
    if samples.len() < required {
        return Err(Error::GridTooCoarse {
            points: samples.len(),
            dim: t.dim(),
            required,
        });
    }
    let symbol = FourierSymbol::from_samples(samples, t.dim() - 1)?;
    Ok(quantize_phase_function(t, &symbol))
}
