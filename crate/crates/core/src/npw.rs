//! The number-phase Wigner function
//!
//! `ρ_W(φ, n) = (1/2π) Tr{ρ Ω̂(φ, n)} = Re{⟨φ|ρ|n⟩⟨n|φ⟩}`
//!
//! sampled on a uniform phase grid, together with its marginals, expectation
//! values of classical symbols `f(φ, n)` and the generalized Weyl map that
//! turns such symbols into operators.
//!
//! For a density on `D` Fock states every column `ρ_W(·, n)` is a
//! trigonometric polynomial of degree at most `D−1`, so a grid of
//! `M ≥ 2D−1` points integrates all the products that appear here exactly.
//! Columns are computed one Fock index at a time, in increasing `n`, each
//! with a single inverse FFT; results are bitwise reproducible.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::dft::{self, Modes};
use crate::fock::{DensityMatrix, OperatorMatrix, Truncation};
use crate::states::phase_overlap;
use crate::{Error, Result, C64};

/// Uniform nodes `φ_j = −π + 2πj/M`, weight `2π/M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseGrid {
    m_points: usize,
}

impl PhaseGrid {
    pub fn new(m_points: usize) -> Result<Self> {
        if m_points == 0 {
            return Err(Error::InvalidParameter("phase grid needs at least one point".into()));
        }
        Ok(Self { m_points })
    }

    /// Smallest power of two that is at least `4D`.
    pub fn for_dim(t: Truncation) -> Self {
        Self {
            m_points: (4 * t.dim()).next_power_of_two(),
        }
    }

    pub fn len(&self) -> usize {
        self.m_points
    }

    pub fn is_empty(&self) -> bool {
        self.m_points == 0
    }

    pub fn weight(&self) -> f64 {
        2.0 * PI / self.m_points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        dft::node(self.m_points, j)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m_points).map(|j| self.node(j))
    }

    /// Rejects grids with fewer than `2D−1` points.
    pub fn check_for(&self, t: Truncation) -> Result<()> {
        let required = 2 * t.dim() - 1;
        if self.m_points < required {
            return Err(Error::GridTooCoarse {
                points: self.m_points,
                dim: t.dim(),
                required,
            });
        }
        Ok(())
    }
}

/// `ρ_W(φ_j, n)` stored as an `M×D` array, `values[(j, n)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NPWignerTable {
    grid: PhaseGrid,
    dim: Truncation,
    values: DMatrix<f64>,
}

impl NPWignerTable {
    pub fn new(grid: PhaseGrid, dim: Truncation, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != grid.len() || values.ncols() != dim.dim() {
            return Err(Error::InvalidParameter(format!(
                "table shape {}x{} does not match grid {} x dimension {}",
                values.nrows(),
                values.ncols(),
                grid.len(),
                dim.dim()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("number-phase Wigner table"));
        }
        Ok(Self { grid, dim, values })
    }

    pub fn grid(&self) -> PhaseGrid {
        self.grid
    }

    pub fn truncation(&self) -> Truncation {
        self.dim
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, j: usize, n: usize) -> f64 {
        self.values[(j, n)]
    }

    /// `ρ_W(φ_j, n)` for fixed `n`, all nodes.
    pub fn fock_row(&self, n: usize) -> Vec<f64> {
        self.values.column(n).iter().copied().collect()
    }

    /// `Σ_n ∫ ρ_W dφ`; equals `Tr ρ`.
    pub fn total_weight(&self) -> f64 {
        marginal_number(self).iter().sum()
    }

    /// Largest `|Δ|` against another table on the same grid.
    pub fn max_abs_diff(&self, other: &NPWignerTable) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidParameter("phase grids differ".into()));
        }
        self.dim.check_same(other.dim)?;
        Ok((&self.values - &other.values).amax())
    }
}

/// Classical symbol `f(φ_j, n)` on a phase grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSymbol {
    grid: PhaseGrid,
    dim: Truncation,
    values: DMatrix<C64>,
}

impl ClassicalSymbol {
    pub fn new(grid: PhaseGrid, dim: Truncation, values: DMatrix<C64>) -> Result<Self> {
        if values.nrows() != grid.len() || values.ncols() != dim.dim() {
            return Err(Error::InvalidParameter(format!(
                "symbol shape {}x{} does not match grid {} x dimension {}",
                values.nrows(),
                values.ncols(),
                grid.len(),
                dim.dim()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("classical symbol"));
        }
        Ok(Self { grid, dim, values })
    }

    pub fn from_fn(grid: PhaseGrid, dim: Truncation, f: impl Fn(f64, usize) -> C64) -> Self {
        let values = DMatrix::from_fn(grid.len(), dim.dim(), |j, n| f(grid.node(j), n));
        Self { grid, dim, values }
    }

    pub fn from_real_fn(grid: PhaseGrid, dim: Truncation, f: impl Fn(f64, usize) -> f64) -> Self {
        Self::from_fn(grid, dim, |phi, n| C64::new(f(phi, n), 0.0))
    }

    pub fn grid(&self) -> PhaseGrid {
        self.grid
    }

    pub fn truncation(&self) -> Truncation {
        self.dim
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }
}

/// Stratonovich-Weyl quantizer
/// `Ω̂(φ, n) = π{|n⟩⟨n|φ⟩⟨φ| + |φ⟩⟨φ|n⟩⟨n|}`.
pub fn quantizer_matrix(t: Truncation, phi: f64, n: usize) -> Result<OperatorMatrix> {
    t.check_index(n)?;
    let d = t.dim();
    let mut omega = OperatorMatrix::zeros(d, d);
    let at_n = phase_overlap(n, phi);
    for k in 0..d {
        let term = at_n * phase_overlap(k, phi).conj() * PI;
        omega[(n, k)] += term;
        omega[(k, n)] += term.conj();
    }
    Ok(omega)
}

/// `v[j][n] = (1/2π) Re Σ_k ρ_kn e^{i(n−k)φ_j}`, one inverse FFT per `n`.
pub fn npw_from_density(rho: &DensityMatrix, grid: PhaseGrid) -> Result<NPWignerTable> {
    let t = rho.truncation();
    grid.check_for(t)?;
    let d = t.dim();
    let m = grid.len();
    let mut values = DMatrix::zeros(m, d);
    for n in 0..d {
        let column = dft::synthesize(m, d - 1, |p| {
            let k = n as i64 - p;
            if (0..d as i64).contains(&k) {
                rho.get(k as usize, n)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        for (j, z) in column.iter().enumerate() {
            values[(j, n)] = z.re / (2.0 * PI);
        }
    }
    NPWignerTable::new(grid, t, values)
}

/// `ϱ(n) = ∫ ρ_W(φ, n) dφ = ⟨n|ρ|n⟩`.
pub fn marginal_number(table: &NPWignerTable) -> Vec<f64> {
    let w = table.grid.weight();
    table
        .values
        .column_iter()
        .map(|col| w * col.iter().sum::<f64>())
        .collect()
}

/// `ϱ(φ_j) = Σ_n ρ_W(φ_j, n) = ⟨φ_j|ρ|φ_j⟩`.
pub fn marginal_phase(table: &NPWignerTable) -> Vec<f64> {
    table
        .values
        .row_iter()
        .map(|row| row.iter().sum::<f64>())
        .collect()
}

/// `⟨f̂⟩ = Σ_n ∫ f(φ, n) ρ_W(φ, n) dφ`, as a grid sum.
pub fn expectation_symbol(table: &NPWignerTable, f: &ClassicalSymbol) -> Result<C64> {
    if table.grid != f.grid {
        return Err(Error::InvalidParameter(format!(
            "symbol grid ({} points) differs from table grid ({} points)",
            f.grid.len(),
            table.grid.len()
        )));
    }
    table.dim.check_same(f.dim)?;
    let w = table.grid.weight();
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..table.dim.dim() {
        for j in 0..table.grid.len() {
            acc += f.values[(j, n)] * table.values[(j, n)];
        }
    }
    Ok(acc * w)
}

/// Relative power in the upper quarter of the resolvable band; large
/// values mean the symbol is not resolved by the grid.
fn top_band_fraction(modes: &Modes) -> f64 {
    let m = modes.len();
    let cutoff = (3 * m).div_ceil(8);
    let mut total = 0.0;
    let mut top = 0.0;
    for (idx, p) in modes.power().enumerate() {
        let freq = idx.min(m - idx);
        total += p;
        if freq >= cutoff {
            top += p;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        top / total
    }
}

/// Generalized Weyl map `f̂ = (1/2π) Σ_n ∫ f(φ, n) Ω̂(φ, n) dφ`.
///
/// Assembled in Fourier space: with `f̃_m(n) = (1/2π)∫ f(φ, n) e^{−imφ} dφ`,
/// `⟨j|f̂|k⟩ = ½[f̃_{k−j}(j) + f̃_{k−j}(k)]`.
pub fn weyl_quantize(f: &ClassicalSymbol) -> Result<OperatorMatrix> {
    let t = f.dim;
    f.grid.check_for(t)?;
    let d = t.dim();
    let modes: Vec<Modes> = (0..d)
        .map(|n| {
            let col: Vec<C64> = f.values.column(n).iter().copied().collect();
            Modes::analyze(&col)
        })
        .collect();
    for (n, m) in modes.iter().enumerate() {
        let frac = top_band_fraction(m);
        if frac > 1e-8 {
            log::warn!(
                "symbol column n={n} has {frac:.2e} of its power in the top phase modes; \
                 the grid may alias it"
            );
        }
    }
    Ok(OperatorMatrix::from_fn(d, d, |j, k| {
        let p = k as i64 - j as i64;
        (modes[j].get(p) + modes[k].get(p)) * 0.5
    }))
}
