//! Tolerances shared by every validation step.

/// Validation thresholds. Every constructor that checks invariants takes one
/// of these; [`Tolerances::default`] holds the standard values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Entrywise bound on `|ρ_jk − ρ_kj*|`.
    pub herm: f64,
    /// Bound on `|Tr ρ − 1|`.
    pub trace: f64,
    /// Smallest admissible eigenvalue is `−psd`.
    pub psd: f64,
    /// Largest probability mass a truncated state may lose.
    pub tail: f64,
    /// Accept states whose tail exceeds `tail` (they are still renormalized).
    pub allow_tail_loss: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-12,
            trace: 1e-10,
            psd: 1e-10,
            tail: 1e-10,
            allow_tail_loss: false,
        }
    }
}

impl Tolerances {
    /// Bounds for matrices produced by phase-space quadrature, which are only
    /// accurate to the quadrature error.
    pub fn quadrature() -> Self {
        Self {
            herm: 1e-12,
            trace: 1e-4,
            psd: 1e-6,
            ..Self::default()
        }
    }

    pub fn with_tail_loss(mut self) -> Self {
        self.allow_tail_loss = true;
        self
    }
}
