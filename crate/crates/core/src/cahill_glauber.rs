//! Cahill-Glauber `s`-ordered quasiprobabilities `W^(s)(α)` and their
//! bridges to the number-phase Wigner function.
//!
//! In polar form `α = r e^{iγ}` every kernel element factors as
//! `⟨j|T^(σ)(α)|k⟩ = R_{jk}(r) e^{−i(k−j)γ}` with `R` real and symmetric,
//! so all maps work radius by radius on angular Fourier modes.
//!
//! The kernel is parameterized by `s_eff`: [`t_matrix_element`] returns
//! `⟨j|T^(−s_eff)(α)|k⟩`. The forward map at `s` uses `s_eff = −s`, the
//! inverse map uses `s_eff = s`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::dft::{self, Modes};
use crate::fock::{DensityMatrix, OperatorMatrix, Truncation};
use crate::npw::{npw_from_density, NPWignerTable, PhaseGrid};
use crate::special::{laguerre_sequence, LnFactorial};
use crate::{Error, Result, Tolerances, C64};

/// Ordering parameter `s ∈ [−1, 1]`: −1 Husimi, 0 Wigner, 1 Glauber-Sudarshan.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SParameter(f64);

impl SParameter {
    pub const HUSIMI: SParameter = SParameter(-1.0);
    pub const WIGNER: SParameter = SParameter(0.0);
    pub const GLAUBER: SParameter = SParameter(1.0);

    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || !(-1.0..=1.0).contains(&s) {
            return Err(Error::InvalidParameter(format!(
                "ordering parameter must lie in [-1, 1], got {s}"
            )));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    fn require_forward(self) -> Result<()> {
        if self.0 >= 1.0 {
            return Err(Error::InvalidParameter(
                "W^(1) is the Glauber-Sudarshan P function, which is generally not a function; \
                 sample a smooth P directly and use npw_from_p"
                    .into(),
            ));
        }
        Ok(())
    }

    fn require_inverse(self) -> Result<()> {
        if self.0 <= -1.0 {
            return Err(Error::InvalidParameter(
                "the inverse kernel T^(1) diverges; s = -1 tables cannot be inverted".into(),
            ));
        }
        Ok(())
    }
}

/// Polar quadrature for `d²α = r dr dγ`: Gauss-Legendre in `r` on
/// `[0, r_max]`, uniform trapezoid in `γ` on `[−π, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    r_max: f64,
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    m_gamma: usize,
}

/// The three numbers that define a [`PolarGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGridSpec {
    pub r_max: f64,
    pub n_r: usize,
    pub m_gamma: usize,
}

impl PolarGridSpec {
    /// `r_max = max(1.5√D, 6)`, 200 radial nodes, `M_γ` the next power of
    /// two at or above `4D`.
    pub fn for_dim(t: Truncation) -> Self {
        let d = t.dim();
        Self {
            r_max: (1.5 * (d as f64).sqrt()).max(6.0),
            n_r: 200,
            m_gamma: (4 * d).next_power_of_two(),
        }
    }
}

impl PolarGrid {
    pub fn new(spec: PolarGridSpec) -> Result<Self> {
        let PolarGridSpec { r_max, n_r, m_gamma } = spec;
        if !r_max.is_finite() || r_max <= 0.0 {
            return Err(Error::InvalidParameter(format!("r_max must be positive, got {r_max}")));
        }
        let n = NonZeroUsize::new(n_r)
            .ok_or_else(|| Error::InvalidParameter("radial node count must be positive".into()))?;
        if m_gamma == 0 {
            return Err(Error::InvalidParameter("angular node count must be positive".into()));
        }
        let rule = GaussLegendre::new(n);
        let half = 0.5 * r_max;
        let mut pairs: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (half * (x + 1.0), half * w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (radii, radial_weights) = pairs.into_iter().unzip();
        Ok(Self { r_max, radii, radial_weights, m_gamma })
    }

    pub fn for_dim(t: Truncation) -> Self {
        Self::new(PolarGridSpec::for_dim(t)).expect("default grid parameters are valid")
    }

    pub fn spec(&self) -> PolarGridSpec {
        PolarGridSpec { r_max: self.r_max, n_r: self.radii.len(), m_gamma: self.m_gamma }
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_r(&self) -> usize {
        self.radii.len()
    }

    pub fn m_gamma(&self) -> usize {
        self.m_gamma
    }

    /// Radial nodes, ascending.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn gamma(&self, q: usize) -> f64 {
        dft::node(self.m_gamma, q)
    }

    pub fn angular_weight(&self) -> f64 {
        2.0 * PI / self.m_gamma as f64
    }

    pub fn alpha(&self, i: usize, q: usize) -> C64 {
        C64::from_polar(self.radii[i], self.gamma(q))
    }

    /// Samples `f(α)` at every node, rows indexed by radius.
    pub fn sample(&self, f: impl Fn(C64) -> C64) -> DMatrix<C64> {
        DMatrix::from_fn(self.n_r(), self.m_gamma, |i, q| f(self.alpha(i, q)))
    }

    /// `∫ f d²α` for samples laid out as by [`PolarGrid::sample`].
    pub fn integrate(&self, values: &DMatrix<C64>) -> C64 {
        let dg = self.angular_weight();
        values
            .row_iter()
            .enumerate()
            .map(|(i, row)| row.sum() * (self.radii[i] * self.radial_weights[i] * dg))
            .sum()
    }

    fn check_for(&self, t: Truncation) -> Result<()> {
        let required = 2 * t.dim() - 1;
        if self.m_gamma < required {
            return Err(Error::GridTooCoarse { points: self.m_gamma, dim: t.dim(), required });
        }
        Ok(())
    }
}

/// `W^(s)` sampled on a polar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CGTable {
    grid: PolarGrid,
    s: SParameter,
    values: DMatrix<C64>,
}

impl CGTable {
    pub fn new(grid: PolarGrid, s: SParameter, values: DMatrix<C64>) -> Result<Self> {
        if values.nrows() != grid.n_r() || values.ncols() != grid.m_gamma() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_r() * grid.m_gamma(),
                found: values.len(),
            });
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("Cahill-Glauber table"));
        }
        Ok(Self { grid, s, values })
    }

    /// Table of a function sampled on the grid.
    pub fn from_fn(grid: PolarGrid, s: SParameter, f: impl Fn(C64) -> f64) -> Result<Self> {
        let values = grid.sample(|a| C64::new(f(a), 0.0));
        Self::new(grid, s, values)
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn s(&self) -> SParameter {
        self.s
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    pub fn get(&self, i: usize, q: usize) -> C64 {
        self.values[(i, q)]
    }

    /// `∫ W^(s) d²α`.
    pub fn total_weight(&self) -> C64 {
        self.grid.integrate(&self.values)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// `F_p(r_i) = ∫ W(r_i e^{iγ}) e^{−ipγ} dγ`, one entry per radius.
    fn angular_transforms(&self) -> Vec<Modes> {
        self.values
            .row_iter()
            .map(|row| Modes::analyze(&row.iter().copied().collect::<Vec<_>>()))
            .collect()
    }
}

fn check_s_eff(s_eff: f64) -> Result<()> {
    if !s_eff.is_finite() || s_eff <= -1.0 || s_eff > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "kernel parameter must lie in (-1, 1], got {s_eff}"
        )));
    }
    Ok(())
}

/// Radial factors `R_{jk}(r)` of `⟨j|T^(−s_eff)|k⟩` for all `j, k < D`,
/// stored symmetric.
pub fn radial_kernel(t: Truncation, r: f64, s_eff: f64, lnf: &LnFactorial) -> Result<DMatrix<f64>> {
    check_s_eff(s_eff)?;
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidParameter(format!("radius must be non-negative, got {r}")));
    }
    let d = t.dim();
    let mut out = DMatrix::zeros(d, d);
    let ln_r = r.ln();
    let r_pow = |p: usize| -> Option<f64> {
        match (p, r == 0.0) {
            (0, _) => Some(0.0),
            (_, true) => None,
            _ => Some(p as f64 * ln_r),
        }
    };
    if s_eff == 1.0 {
        // ⟨j|α⟩⟨α|k⟩ = e^{−r²} r^{j+k} e^{i(j−k)γ}/√(j!k!)
        for j in 0..d {
            for k in j..d {
                if let Some(lp) = r_pow(j + k) {
                    let v = (lp - r * r - 0.5 * (lnf.get(j) + lnf.get(k))).exp();
                    out[(j, k)] = v;
                    out[(k, j)] = v;
                }
            }
        }
        return Ok(out);
    }
    let sp1 = s_eff + 1.0;
    let ratio = (s_eff - 1.0) / sp1;
    let ln_ratio = ratio.abs().ln();
    let ln_two_over = (2.0 / sp1).ln();
    let x = 4.0 * r * r / (1.0 - s_eff * s_eff);
    let gauss = -2.0 * r * r / sp1;
    for a in 0..d {
        let Some(lp) = r_pow(a) else { continue };
        let lag = laguerre_sequence(d - a, a, x);
        for (j, &l) in lag.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            let k = j + a;
            let ln_mag = 0.5 * (lnf.get(j) - lnf.get(k))
                + (a + 1) as f64 * ln_two_over
                + j as f64 * ln_ratio
                + lp
                + gauss
                + l.abs().ln();
            let negative = (l < 0.0) ^ (ratio < 0.0 && j % 2 == 1);
            let v = if negative { -ln_mag.exp() } else { ln_mag.exp() };
            out[(j, k)] = v;
            out[(k, j)] = v;
        }
    }
    Ok(out)
}

/// `⟨j|T^(−s_eff)(α)|k⟩`. `s_eff = 1` gives the Husimi kernel `|α⟩⟨α|`.
pub fn t_matrix_element(j: usize, k: usize, alpha: C64, s_eff: f64) -> Result<C64> {
    let d = j.max(k) + 1;
    let t = Truncation::new(d)?;
    let lnf = LnFactorial::new(d);
    let r = radial_kernel(t, alpha.norm(), s_eff, &lnf)?[(j, k)];
    let p = k as f64 - j as f64;
    Ok(C64::from_polar(1.0, -p * alpha.arg()) * r)
}

/// Full matrix `⟨j|T^(−s_eff)(α)|k⟩`, `j, k < D`.
pub fn t_matrix(t: Truncation, alpha: C64, s_eff: f64) -> Result<OperatorMatrix> {
    let lnf = LnFactorial::new(t.dim());
    let r = radial_kernel(t, alpha.norm(), s_eff, &lnf)?;
    let g = alpha.arg();
    Ok(OperatorMatrix::from_fn(t.dim(), t.dim(), |j, k| {
        C64::from_polar(r[(j, k)], -(k as f64 - j as f64) * g)
    }))
}

/// `W^(s)(α) = (1/π) Σ_{jk} ρ_kj ⟨j|T^(s)(α)|k⟩` on every grid node.
pub fn w_s_from_density(rho: &DensityMatrix, grid: &PolarGrid, s: SParameter) -> Result<CGTable> {
    s.require_forward()?;
    let t = rho.truncation();
    grid.check_for(t)?;
    let d = t.dim();
    let lnf = LnFactorial::new(d);
    let mut values = DMatrix::zeros(grid.n_r(), grid.m_gamma());
    for (i, &r) in grid.radii().iter().enumerate() {
        let kern = radial_kernel(t, r, -s.value(), &lnf)?;
        // W = Σ_p g_p e^{−ipγ}, g_p = (1/π) Σ_j ρ_{j+p,j} R_{j,j+p} and
        // g_{−p} = g_p* for Hermitian ρ, which keeps W real to roundoff
        // even where the kernel terms cancel heavily.
        let g: Vec<C64> = (0..d)
            .map(|p| {
                (0..d - p)
                    .map(|j| (rho.get(j + p, j) + rho.get(j, j + p).conj()) * (0.5 * kern[(j, j + p)]))
                    .sum::<C64>()
                    / PI
            })
            .collect();
        let row = dft::synthesize(grid.m_gamma(), d - 1, |p| {
            if p <= 0 { g[(-p) as usize] } else { g[p as usize].conj() }
        });
        for (q, v) in row.into_iter().enumerate() {
            values[(i, q)] = v;
        }
    }
    CGTable::new(grid.clone(), s, values)
}

fn finish_density(mut m: OperatorMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
    m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let trace: f64 = m.diagonal().iter().map(|z| z.re).sum();
    DensityMatrix::new(m, tol).map_err(|e| match e {
        Error::TraceMismatch { .. } | Error::NotPositive { .. } => Error::Quadrature(format!(
            "reconstructed matrix fails validation ({e}); trace {trace:.3e}; \
             widen r_max or add radial nodes"
        )),
        other => other,
    })
}

/// `ρ_jk = ∫ W^(s)(α) ⟨j|T^(−s)(α)|k⟩ d²α` by polar quadrature.
///
/// Accurate for `s ≥ 0`. For `s < 0` the kernel grows like
/// `((1−s)/(1+s))^j` and quadrature roundoff is amplified accordingly;
/// [`density_from_w_s`] switches to a fit in that range.
pub fn density_from_w_s_kernel(
    table: &CGTable,
    t: Truncation,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    finish_density(kernel_inverse(table, t)?, tol)
}

fn kernel_inverse(table: &CGTable, t: Truncation) -> Result<OperatorMatrix> {
    table.s.require_inverse()?;
    let grid = table.grid();
    grid.check_for(t)?;
    let d = t.dim();
    let lnf = LnFactorial::new(d);
    let modes = table.angular_transforms();
    let mut out = OperatorMatrix::zeros(d, d);
    for (i, &r) in grid.radii().iter().enumerate() {
        let kern = radial_kernel(t, r, table.s.value(), &lnf)?;
        let w = r * grid.radial_weights()[i] * 2.0 * PI;
        for j in 0..d {
            for k in 0..d {
                out[(j, k)] += modes[i].get(k as i64 - j as i64) * (kern[(j, k)] * w);
            }
        }
    }
    Ok(out)
}

/// Solves `Ŵ_{−p}(r_i) = (1/π) Σ_j ρ_{j+p,j} R_{j,j+p}(r_i)` for each
/// off-diagonal order `p` in weighted least squares, rows scaled by the
/// largest `|W|` on their circle and columns equilibrated.
fn fitted_inverse(table: &CGTable, t: Truncation) -> Result<OperatorMatrix> {
    let grid = table.grid();
    grid.check_for(t)?;
    let d = t.dim() as i64;
    let lnf = LnFactorial::new(t.dim());
    let modes = table.angular_transforms();
    let kernels = grid
        .radii()
        .iter()
        .map(|&r| radial_kernel(t, r, -table.s.value(), &lnf))
        .collect::<Result<Vec<_>>>()?;
    let row_scale: Vec<f64> = table
        .values
        .row_iter()
        .map(|row| 1.0 / row.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300))
        .collect();
    let n_r = grid.n_r();
    let mut out = OperatorMatrix::zeros(t.dim(), t.dim());
    for p in -(d - 1)..d {
        let js: Vec<usize> = (0.max(-p)..d.min(d - p)).map(|j| j as usize).collect();
        let mut a = DMatrix::from_fn(n_r, js.len(), |i, c| {
            let j = js[c];
            kernels[i][(j, (j as i64 + p) as usize)] * row_scale[i] / PI
        });
        let col_scale: Vec<f64> = a
            .column_iter()
            .map(|c| {
                let n = c.norm();
                if n > 0.0 { 1.0 / n } else { 1.0 }
            })
            .collect();
        for (c, sc) in col_scale.iter().enumerate() {
            a.column_mut(c).scale_mut(*sc);
        }
        let b = DMatrix::from_fn(n_r, 2, |i, c| {
            let v = modes[i].get(-p) * row_scale[i];
            if c == 0 { v.re } else { v.im }
        });
        let svd = SVD::new(a, true, true);
        let sigma_max = svd.singular_values.max();
        let eps = f64::EPSILON * n_r as f64 * sigma_max;
        let x = svd
            .solve(&b, eps)
            .map_err(|e| Error::Quadrature(format!("least-squares solve failed: {e}")))?;
        for (c, &j) in js.iter().enumerate() {
            let k = (j as i64 + p) as usize;
            out[(k, j)] = C64::new(x[(c, 0)], x[(c, 1)]) * col_scale[c];
        }
    }
    Ok(out)
}

/// Density matrix from a `W^(s)` table, `s > −1`.
///
/// Uses the inverse kernel for `s ≥ 0` and a per-order radial fit against
/// the forward kernel for `s < 0`, where direct kernel quadrature is
/// numerically unusable beyond a handful of Fock states. The result is
/// Hermitized and validated against `tol`; a trace or positivity failure
/// is reported as [`Error::Quadrature`].
pub fn density_from_w_s(table: &CGTable, t: Truncation, tol: &Tolerances) -> Result<DensityMatrix> {
    table.s.require_inverse()?;
    let m = if table.s.value() >= 0.0 {
        kernel_inverse(table, t)?
    } else {
        fitted_inverse(table, t)?
    };
    finish_density(m, tol)
}

/// Which route [`npw_from_w_s`] takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BridgePath {
    /// Invert to `ρ`, then evaluate `ρ_W`.
    Composed,
    /// Integrate `W^(s)` against the closed-form bridge kernel.
    Direct,
}

/// Bridge kernel `K_{nk}(r)` with
/// `ρ_W(φ, n) = Σ_k ∫ dr K_{nk}(r) ∫ dγ W^(s)(r e^{iγ}) cos((k−n)(φ−γ))`.
///
/// `K_{nk} = √(n!)(s−1)ⁿ/(2ⁿ(s+1)π) r^{1−n} e^{−2r²/(s+1)}
/// (2r/(s+1))^k/√(k!) L_n^{(k−n)}(4r²/(1−s²))`; for `k < n` the Laguerre
/// factor is rewritten through `L_k^{(n−k)}` so no negative powers of `r`
/// appear.
pub fn bridge_kernel(n: usize, k: usize, r: f64, s: f64, lnf: &LnFactorial) -> f64 {
    let sp1 = s + 1.0;
    let x = 4.0 * r * r / (1.0 - s * s);
    let (lag, r_power, extra, flip) = if k >= n {
        let l = laguerre_sequence(n + 1, k - n, x)[n];
        (l, 1 + k - n, 0.0, false)
    } else {
        let l = laguerre_sequence(k + 1, n - k, x)[k];
        let extra = (n - k) as f64 * (4.0 / (1.0 - s * s)).ln() + lnf.get(k) - lnf.get(n);
        (l, 1 + n - k, extra, (n - k) % 2 == 1)
    };
    if lag == 0.0 || r == 0.0 {
        return 0.0;
    }
    let ln_mag = 0.5 * lnf.get(n) + n as f64 * ((1.0 - s).ln() - 2f64.ln()) - sp1.ln() - PI.ln()
        + r_power as f64 * r.ln()
        - 2.0 * r * r / sp1
        - 0.5 * lnf.get(k)
        + k as f64 * (2.0 / sp1).ln()
        + extra
        + lag.abs().ln();
    let negative = (n % 2 == 1) ^ flip ^ (lag < 0.0);
    if negative { -ln_mag.exp() } else { ln_mag.exp() }
}

fn direct_bridge(table: &CGTable, phase_grid: PhaseGrid, t: Truncation) -> Result<NPWignerTable> {
    let s = table.s.value();
    let grid = table.grid();
    grid.check_for(t)?;
    phase_grid.check_for(t)?;
    let d = t.dim();
    let lnf = LnFactorial::new(d);
    let modes = table.angular_transforms();
    // h[n][p + D − 1] = Σ_k Σ_i w_i K_{nk}(r_i) F_p(r_i), p = k − n
    let mut h = vec![vec![C64::new(0.0, 0.0); 2 * d - 1]; d];
    for (i, &r) in grid.radii().iter().enumerate() {
        let w = grid.radial_weights()[i] * 2.0 * PI;
        for (n, hn) in h.iter_mut().enumerate() {
            for k in 0..d {
                let p = k as i64 - n as i64;
                let kern = bridge_kernel(n, k, r, s, &lnf);
                if kern != 0.0 {
                    hn[(p + d as i64 - 1) as usize] += modes[i].get(p) * (kern * w);
                }
            }
        }
    }
    // ∫ W cos(p(φ−γ)) dγ = ½(e^{ipφ}F_p + e^{−ipφ}F_{−p}); only F_p with
    // p = k − n enters, so ρ_W(φ, n) = Re Σ_p h_p e^{ipφ}.
    let mut values = DMatrix::zeros(phase_grid.len(), d);
    for (n, hn) in h.iter().enumerate() {
        let col = dft::synthesize(phase_grid.len(), d - 1, |p| hn[(p + d as i64 - 1) as usize]);
        for (j, v) in col.into_iter().enumerate() {
            values[(j, n)] = v.re;
        }
    }
    NPWignerTable::new(phase_grid, t, values)
}

/// `ρ_W` from a `W^(s)` table, `−1 < s < 1`, by either route.
pub fn npw_from_w_s(
    table: &CGTable,
    phase_grid: PhaseGrid,
    t: Truncation,
    path: BridgePath,
    tol: &Tolerances,
) -> Result<NPWignerTable> {
    let s = table.s.value();
    if s <= -1.0 || s >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "the W^(s) bridge needs -1 < s < 1, got {s}"
        )));
    }
    match path {
        BridgePath::Composed => npw_from_density(&density_from_w_s(table, t, tol)?, phase_grid),
        BridgePath::Direct => direct_bridge(table, phase_grid, t),
    }
}

/// `ρ_W` from a sampled, smooth Glauber-Sudarshan function `P(α)`:
/// `ρ_W(φ, n) = (1/(2π√(n!))) ∫ P rⁿ e^{−r²} Σ_k r^k/√(k!) cos((n−k)(φ−γ)) d²α`.
///
/// The table must carry `s = 1` and integrate to one within `1e−6`.
pub fn npw_from_p(p_table: &CGTable, phase_grid: PhaseGrid, t: Truncation) -> Result<NPWignerTable> {
    if p_table.s != SParameter::GLAUBER {
        return Err(Error::InvalidParameter(format!(
            "expected a P-function table (s = 1), got s = {}",
            p_table.s.value()
        )));
    }
    let norm = p_table.total_weight();
    if (norm - 1.0).norm() > 1e-6 {
        return Err(Error::InvalidParameter(format!(
            "P function integrates to {:.9} + {:.3e}i, expected 1",
            norm.re, norm.im
        )));
    }
    let grid = p_table.grid();
    grid.check_for(t)?;
    phase_grid.check_for(t)?;
    let d = t.dim();
    let lnf = LnFactorial::new(d);
    let modes = p_table.angular_transforms();
    let mut h = vec![vec![C64::new(0.0, 0.0); 2 * d - 1]; d];
    for (i, &r) in grid.radii().iter().enumerate() {
        // r^{n+k} e^{−r²}/√(n!k!) is the Husimi radial factor
        let kern = radial_kernel(t, r, 1.0, &lnf)?;
        let w = r * grid.radial_weights()[i];
        for (n, hn) in h.iter_mut().enumerate() {
            for k in 0..d {
                let p = k as i64 - n as i64;
                hn[(p + d as i64 - 1) as usize] += modes[i].get(p) * (kern[(n, k)] * w);
            }
        }
    }
    let mut values = DMatrix::zeros(phase_grid.len(), d);
    for (n, hn) in h.iter().enumerate() {
        let col = dft::synthesize(phase_grid.len(), d - 1, |p| hn[(p + d as i64 - 1) as usize]);
        for (j, v) in col.into_iter().enumerate() {
            values[(j, n)] = v.re;
        }
    }
    NPWignerTable::new(phase_grid, t, values)
}

/// Glauber-Sudarshan function of a thermal state, `P(α) = e^{−|α|²/n̄}/(π n̄)`,
/// sampled on `grid`. Needs `n̄ > 0`; the vacuum limit is a delta function.
pub fn thermal_p_table(grid: PolarGrid, nbar: f64) -> Result<CGTable> {
    if !nbar.is_finite() || nbar <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "thermal P function needs a positive mean photon number, got {nbar}"
        )));
    }
    CGTable::from_fn(grid, SParameter::GLAUBER, |a| (-a.norm_sqr() / nbar).exp() / (PI * nbar))
}

/// Photon-number distribution from a Wigner (`s = 0`) table,
/// `p(n) = 2(−1)ⁿ ∫ r dr e^{−2r²} L_n(4r²) ∫ dγ W^(0)`.
pub fn number_distribution_from_wigner(table: &CGTable, t: Truncation) -> Result<Vec<f64>> {
    if table.s != SParameter::WIGNER {
        return Err(Error::InvalidParameter(format!(
            "expected a Wigner table (s = 0), got s = {}",
            table.s.value()
        )));
    }
    let grid = table.grid();
    let d = t.dim();
    let dg = grid.angular_weight();
    let mut p = vec![0.0; d];
    for (i, &r) in grid.radii().iter().enumerate() {
        let ring: f64 = table.values.row(i).iter().map(|z| z.re).sum::<f64>() * dg;
        let lag = laguerre_sequence(d, 0, 4.0 * r * r);
        let w = 2.0 * r * grid.radial_weights()[i] * (-2.0 * r * r).exp() * ring;
        for (n, pn) in p.iter_mut().enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            *pn += sign * lag[n] * w;
        }
    }
    Ok(p)
}
