//! Number, coherent, coherent phase and thermal states, plus phase-state
//! overlaps `⟨n|φ⟩`.
//!
//! Phase states `|φ⟩` are not normalizable and are never built as vectors;
//! everything downstream only needs the overlaps.
//!
//! Coherent-type states are cut at `|D−1⟩` and renormalized. The mass lost
//! to truncation is kept on the [`StateVector`] and construction fails when
//! it exceeds [`Tolerances::tail`], unless `allow_tail_loss` is set.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::fock::{DensityMatrix, StateVector, Truncation};
use crate::special::LnFactorial;
use crate::{Error, Result, Tolerances, C64};

/// `⟨n|φ⟩ = e^{inφ}/√(2π)`.
pub fn phase_overlap(n: usize, phi: f64) -> C64 {
    C64::from_polar(1.0 / (2.0 * PI).sqrt(), n as f64 * phi)
}

pub fn number_state(t: Truncation, n: usize) -> Result<StateVector> {
    t.check_index(n)?;
    let mut amps = DVector::zeros(t.dim());
    amps[n] = C64::new(1.0, 0.0);
    StateVector::from_truncated(amps, 0.0)
}

/// Untruncated coherent-state amplitude `e^{−|α|²/2} αⁿ/√(n!)`.
pub fn coherent_amplitude(alpha: C64, n: usize, lnf: &LnFactorial) -> C64 {
    let r = alpha.norm();
    if r == 0.0 {
        return if n == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let ln_mag = -0.5 * r * r + n as f64 * r.ln() - 0.5 * lnf.get(n);
    C64::from_polar(ln_mag.exp(), n as f64 * alpha.arg())
}

/// Poisson mass `Σ_{n ≥ D} e^{−|α|²}|α|^{2n}/n!` discarded by truncation.
fn poisson_tail(mean: f64, d: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut ln_term = -mean + d as f64 * ln_mean - crate::special::ln_factorial(d);
    let mut tail = 0.0;
    let mut n = d;
    loop {
        let term = ln_term.exp();
        tail += term;
        n += 1;
        ln_term += ln_mean - (n as f64).ln();
        if (n as f64) > mean && (term < 1e-300 || term < tail * 1e-17) {
            break;
        }
    }
    tail
}

fn check_tail(tail: f64, tol: &Tolerances) -> Result<()> {
    if tail > tol.tail && !tol.allow_tail_loss {
        return Err(Error::TailTooLarge { tail, threshold: tol.tail });
    }
    Ok(())
}

pub fn coherent_state(t: Truncation, alpha: C64) -> Result<StateVector> {
    coherent_state_with(t, alpha, &Tolerances::default())
}

/// Coherent state `|α⟩` truncated to `t` and renormalized.
pub fn coherent_state_with(t: Truncation, alpha: C64, tol: &Tolerances) -> Result<StateVector> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::NonFinite("coherent amplitude"));
    }
    let tail = poisson_tail(alpha.norm_sqr(), t.dim());
    check_tail(tail, tol)?;
    let lnf = LnFactorial::new(t.dim());
    let amps = DVector::from_fn(t.dim(), |n, _| coherent_amplitude(alpha, n, &lnf));
    StateVector::from_truncated(amps, tail)
}

/// Eigenvalue `ζ = |ζ|e^{iϕ}` of the Susskind-Glogower lowering operator,
/// `|ζ| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentPhaseParam {
    zeta: C64,
}

impl CoherentPhaseParam {
    pub fn new(zeta: C64) -> Result<Self> {
        let r = zeta.norm();
        if !r.is_finite() || r >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "coherent phase state needs |zeta| < 1, got {r}"
            )));
        }
        Ok(Self { zeta })
    }

    pub fn from_polar(modulus: f64, phase: f64) -> Result<Self> {
        if modulus < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "modulus must be non-negative, got {modulus}"
            )));
        }
        Self::new(C64::from_polar(modulus, phase))
    }

    pub fn zeta(&self) -> C64 {
        self.zeta
    }

    pub fn modulus(&self) -> f64 {
        self.zeta.norm()
    }

    pub fn phase(&self) -> f64 {
        self.zeta.arg()
    }

    /// `⟨k|ζ⟩⟨ζ|l⟩ = (1−|ζ|²)|ζ|^{k+l} e^{i(k−l)ϕ}` of the untruncated state.
    pub fn density_entry(&self, k: usize, l: usize) -> C64 {
        let r = self.modulus();
        C64::from_polar(
            (1.0 - r * r) * r.powi((k + l) as i32),
            (k as f64 - l as f64) * self.phase(),
        )
    }

    /// Closed-form number-phase Wigner function of the untruncated state,
    /// using the geometric sums `Σ|ζ|^k cos kθ` and `Σ|ζ|^k sin kθ`.
    pub fn npw_closed_form(&self, phi: f64, n: usize) -> f64 {
        let r = self.modulus();
        let theta = phi - self.phase();
        let denom = 1.0 - 2.0 * r * theta.cos() + r * r;
        let cos_sum = (1.0 - r * theta.cos()) / denom;
        let sin_sum = r * theta.sin() / denom;
        let nt = n as f64 * theta;
        (1.0 - r * r) * r.powi(n as i32) / (2.0 * PI) * (nt.cos() * cos_sum + nt.sin() * sin_sum)
    }

    /// Ladder coefficient `ϱ_m(n) = (1−|ζ|²)|ζ|^{2n+m} e^{−imϕ}`, `m ≥ 1`.
    pub fn ladder_coefficient(&self, m: usize, n: usize) -> C64 {
        let r = self.modulus();
        C64::from_polar(
            (1.0 - r * r) * r.powi((2 * n + m) as i32),
            -(m as f64) * self.phase(),
        )
    }

    /// Diagonal `ϱ_0(n) + ϱ_0*(n) = (1−|ζ|²)|ζ|^{2n}`.
    pub fn diag_sum(&self, n: usize) -> f64 {
        let r = self.modulus();
        (1.0 - r * r) * r.powi(2 * n as i32)
    }
}

pub fn coherent_phase_state(t: Truncation, p: CoherentPhaseParam) -> Result<StateVector> {
    coherent_phase_state_with(t, p, &Tolerances::default())
}

/// `|ζ⟩ = (1−|ζ|²)^{1/2} Σ ζⁿ|n⟩`, truncated and renormalized.
pub fn coherent_phase_state_with(
    t: Truncation,
    p: CoherentPhaseParam,
    tol: &Tolerances,
) -> Result<StateVector> {
    let r2 = p.modulus().powi(2);
    let tail = r2.powi(t.dim() as i32);
    check_tail(tail, tol)?;
    let norm = (1.0 - r2).sqrt();
    let mut amps = DVector::zeros(t.dim());
    let mut power = C64::new(1.0, 0.0);
    for n in 0..t.dim() {
        amps[n] = power * norm;
        power *= p.zeta();
    }
    StateVector::from_truncated(amps, tail)
}

pub fn thermal_density(t: Truncation, nbar: f64) -> Result<DensityMatrix> {
    thermal_density_with(t, nbar, &Tolerances::default())
}

/// Diagonal `ρ_nn = n̄ⁿ/(1+n̄)^{n+1}`, renormalized over the truncated range.
pub fn thermal_density_with(t: Truncation, nbar: f64, tol: &Tolerances) -> Result<DensityMatrix> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mean photon number must be finite and non-negative, got {nbar}"
        )));
    }
    let ratio = nbar / (1.0 + nbar);
    let tail = ratio.powi(t.dim() as i32);
    check_tail(tail, tol)?;
    let probs: Vec<f64> = (0..t.dim())
        .map(|n| ratio.powi(n as i32) / (1.0 + nbar))
        .collect();
    let total: f64 = probs.iter().sum();
    let diag = DVector::from_iterator(t.dim(), probs.iter().map(|p| C64::new(p / total, 0.0)));
    DensityMatrix::new(DMatrix::from_diagonal(&diag), tol)
}
