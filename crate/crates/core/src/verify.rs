//! End-to-end invariant checks behind `npw verify`.
//!
//! Each check compares two independent routes to the same quantity and
//! records the largest discrepancy against a fixed tolerance. A check that
//! errors out counts as failed with no error value.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::cahill_glauber::{
    density_from_w_s, npw_from_w_s, w_s_from_density, BridgePath, PolarGrid, PolarGridSpec,
    SParameter,
};
use crate::fock::{random_density, DensityMatrix, Truncation};
use crate::io::Float;
use crate::npw::{
    expectation_symbol, marginal_number, marginal_phase, npw_from_density, weyl_quantize,
    ClassicalSymbol, NPWignerTable, PhaseGrid,
};
use crate::reconstruct::{assemble_density, ladder_closed_form, ladder_recursive};
use crate::special::LnFactorial;
use crate::states::{
    coherent_amplitude, coherent_phase_state, coherent_state_with, phase_overlap,
    CoherentPhaseParam,
};
use crate::{Result, Tolerances, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub dim: Truncation,
    pub seed: u64,
    /// Flip the sign of `ρ_01` (leaving `ρ_10`) before the round trip.
    pub corrupt: bool,
}

impl VerifyConfig {
    pub fn new(dim: Truncation) -> Self {
        Self { dim, seed: 0, corrupt: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub pass: bool,
    pub max_error: Option<Float>,
    pub tolerance: Float,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct VerifyReport {
    checks: BTreeMap<String, CheckOutcome>,
}

impl VerifyReport {
    pub fn checks(&self) -> &BTreeMap<String, CheckOutcome> {
        &self.checks
    }

    pub fn all_passed(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn write_json(&self, mut out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    fn record(&mut self, name: &str, tolerance: f64, error: Result<f64>) {
        let outcome = match error {
            Ok(e) if e.is_finite() => CheckOutcome {
                pass: e <= tolerance,
                max_error: Some(Float(e)),
                tolerance: Float(tolerance),
            },
            Ok(_) => CheckOutcome { pass: false, max_error: None, tolerance: Float(tolerance) },
            Err(e) => {
                log::warn!("check {name} aborted: {e}");
                CheckOutcome { pass: false, max_error: None, tolerance: Float(tolerance) }
            }
        };
        self.checks.insert(name.to_string(), outcome);
    }
}


fn source_density(cfg: &VerifyConfig) -> DensityMatrix {
    let rho = random_density(cfg.dim, cfg.seed);
    if !cfg.corrupt || cfg.dim.dim() < 2 {
        return rho;
    }
    let mut m = rho.into_inner();
    m[(0, 1)] = -m[(0, 1)];
    DensityMatrix::new_unchecked(m)
}

fn round_trip(rho: &DensityMatrix, table: &NPWignerTable) -> Result<f64> {
    let ladder = ladder_closed_form(table)?;
    let back = assemble_density(&ladder, &Tolerances::default())?;
    Ok(back.distance(rho))
}

fn ladder_elements(rho: &DensityMatrix, table: &NPWignerTable) -> Result<f64> {
    let ladder = ladder_closed_form(table)?;
    let mut err = 0.0f64;
    for (m, n, v) in ladder.iter() {
        err = err.max((v - rho.get(n, n + m)).norm());
    }
    for (n, d) in ladder.diag_sum().iter().enumerate() {
        err = err.max((d - rho.get(n, n).re).abs());
    }
    Ok(err)
}

fn ladder_routes(table: &NPWignerTable) -> Result<f64> {
    ladder_closed_form(table)?.max_abs_diff(&ladder_recursive(table)?)
}

fn marginals(rho: &DensityMatrix, table: &NPWignerTable) -> f64 {
    let d = rho.dim();
    let number = marginal_number(table)
        .iter()
        .enumerate()
        .map(|(n, p)| (p - rho.get(n, n).re).abs())
        .fold(0.0, f64::max);
    let grid = table.grid();
    let phase = marginal_phase(table)
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let phi = grid.node(j);
            let mut direct = C64::new(0.0, 0.0);
            for k in 0..d {
                for n in 0..d {
                    direct += phase_overlap(k, phi).conj() * rho.get(k, n) * phase_overlap(n, phi);
                }
            }
            (p - direct.re).abs()
        })
        .fold(0.0, f64::max);
    number.max(phase)
}

fn weyl_duality(rho: &DensityMatrix, grid: PhaseGrid) -> Result<f64> {
    let t = rho.truncation();
    let f = ClassicalSymbol::from_fn(grid, t, |phi, n| {
        let n = n as f64;
        C64::new((phi + 0.3 * n).cos() + 0.1 * n, 0.5 * (2.0 * phi).sin())
    });
    let op = weyl_quantize(&f)?;
    let table = npw_from_density(rho, grid)?;
    Ok((rho.expectation(&op) - expectation_symbol(&table, &f)?).norm())
}

fn coherent_phase_closed_form(t: Truncation) -> Result<f64> {
    // the columns of ρ_W lose terms of order |ζ|^D to truncation
    let modulus = 0.3f64.min(1e-13f64.powf(1.0 / t.dim() as f64));
    let p = CoherentPhaseParam::from_polar(modulus, 0.4)?;
    let rho = coherent_phase_state(t, p)?.to_density();
    let grid = PhaseGrid::for_dim(t);
    let table = npw_from_density(&rho, grid)?;
    let mut err = 0.0f64;
    for j in 0..grid.len() {
        for n in 0..t.dim() {
            err = err.max((table.get(j, n) - p.npw_closed_form(grid.node(j), n)).abs());
        }
    }
    Ok(err)
}

fn husimi_identity(rho: &DensityMatrix) -> Result<f64> {
    let d = rho.dim();
    let grid = PolarGrid::new(PolarGridSpec { r_max: 4.0, n_r: 16, m_gamma: (2 * d).next_power_of_two() })?;
    let q = w_s_from_density(rho, &grid, SParameter::HUSIMI)?;
    let lnf = LnFactorial::new(d);
    let mut err = 0.0f64;
    for i in 0..grid.n_r() {
        for k in 0..grid.m_gamma() {
            let alpha = grid.alpha(i, k);
            let psi: Vec<C64> = (0..d).map(|n| coherent_amplitude(alpha, n, &lnf)).collect();
            let mut v = C64::new(0.0, 0.0);
            for a in 0..d {
                for b in 0..d {
                    v += psi[a].conj() * rho.get(a, b) * psi[b];
                }
            }
            err = err.max((q.get(i, k) - v / PI).norm());
        }
    }
    Ok(err)
}

fn truncated_coherent(t: Truncation) -> Result<DensityMatrix> {
    let loose = Tolerances::default().with_tail_loss();
    Ok(coherent_state_with(t, C64::new(1.0, 0.0), &loose)?.to_density())
}

fn cg_round_trip(t: Truncation) -> Result<f64> {
    let rho = truncated_coherent(t)?;
    let grid = PolarGrid::for_dim(t);
    let mut err = 0.0f64;
    for s in [-0.5, 0.0, 0.5] {
        let table = w_s_from_density(&rho, &grid, SParameter::new(s)?)?;
        let back = density_from_w_s(&table, t, &Tolerances::quadrature())?;
        err = err.max(back.distance(&rho));
    }
    Ok(err)
}

fn bridge_paths(t: Truncation) -> Result<f64> {
    let rho = truncated_coherent(t)?;
    let grid = PolarGrid::for_dim(t);
    let pg = PhaseGrid::for_dim(t);
    let tol = Tolerances::quadrature();
    let mut err = 0.0f64;
    for s in [-0.5, 0.0, 0.5] {
        let table = w_s_from_density(&rho, &grid, SParameter::new(s)?)?;
        let a = npw_from_w_s(&table, pg, t, BridgePath::Composed, &tol)?;
        let b = npw_from_w_s(&table, pg, t, BridgePath::Direct, &tol)?;
        err = err.max(a.max_abs_diff(&b)?);
    }
    Ok(err)
}

/// Runs every check. Only the density-based checks see the corruption.
pub fn run(cfg: &VerifyConfig) -> VerifyReport {
    let mut report = VerifyReport::default();
    let t = cfg.dim;
    let grid = PhaseGrid::for_dim(t);
    let rho = source_density(cfg);
    let table = npw_from_density(&rho, grid);

    match &table {
        Ok(table) => {
            report.record("round_trip", 1e-10, round_trip(&rho, table));
            report.record("ladder_matrix_elements", 1e-12, ladder_elements(&rho, table));
            report.record("ladder_routes", 1e-12, ladder_routes(table));
            report.record("marginals", 1e-12, Ok(marginals(&rho, table)));
            report.record("normalization", 1e-10, Ok((table.total_weight() - 1.0).abs()));
        }
        Err(e) => {
            for (name, tol) in [
                ("round_trip", 1e-10),
                ("ladder_matrix_elements", 1e-12),
                ("ladder_routes", 1e-12),
                ("marginals", 1e-12),
                ("normalization", 1e-10),
            ] {
                report.record(name, tol, Err(crate::Error::Inconsistent(e.to_string())));
            }
        }
    }
    report.record("weyl_duality", 1e-10, weyl_duality(&rho, grid));
    report.record("coherent_phase_closed_form", 1e-12, coherent_phase_closed_form(t));
    report.record("husimi_identity", 1e-10, husimi_identity(&rho));
    report.record("cahill_glauber_round_trip", 1e-6, cg_round_trip(t));
    report.record("bridge_paths", 1e-6, bridge_paths(t));
    report
}
