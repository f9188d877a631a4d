//! Recovery of the density matrix from its number-phase Wigner function.
//!
//! The `m`-th phase Fourier mode of column `n`,
//! `c_m(n) = ∫ ρ_W(φ, n) e^{−imφ} dφ`, mixes two matrix elements:
//!
//! * `c_0(n) = ⟨n|ρ|n⟩`,
//! * `2c_m(n) = ϱ_m(n−m) + ϱ_m(n)` for `1 ≤ m ≤ n`,
//! * `2c_m(n) = ϱ_m(n)` for `m > n`,
//!
//! where `ϱ_m(n) = ⟨n|ρ|n+m⟩`. Unrolling gives the alternating sum
//! `ϱ_m(n) = 2 Σ_{l=0}^{⌊n/m⌋} (−1)^l c_m(n − lm)` ([`ladder_closed_form`]);
//! solving the same relations one rung at a time gives [`ladder_recursive`].
//! Both routes must agree to roundoff.
//!
//! Only the real sum `ϱ_0(n) + ϱ_0*(n)` is determined by `ρ_W`, and it is
//! all that enters the diagonal of `ρ`.

use nalgebra::DMatrix;

use crate::dft::Modes;
use crate::fock::{DensityMatrix, OperatorMatrix, Truncation};
use crate::npw::NPWignerTable;
use crate::{Error, Result, Tolerances, C64};

/// Above this dimension the alternating sums use compensated summation.
const COMPENSATED_ABOVE: usize = 64;

/// Ladder coefficients extracted from `ρ_W`.
///
/// `coeffs[m − 1][n] = ϱ_m(n)` for `1 ≤ m ≤ D−1`, `0 ≤ n ≤ D−1−m`;
/// entries beyond the truncated anti-diagonal vanish and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLadder {
    dim: Truncation,
    diag_sum: Vec<f64>,
    coeffs: Vec<Vec<C64>>,
}

impl FourierLadder {
    pub fn new(dim: Truncation, diag_sum: Vec<f64>, coeffs: Vec<Vec<C64>>) -> Result<Self> {
        let d = dim.dim();
        if diag_sum.len() != d || coeffs.len() != d - 1 {
            return Err(Error::InvalidParameter(format!(
                "ladder layout does not match dimension {d}"
            )));
        }
        for (i, row) in coeffs.iter().enumerate() {
            let m = i + 1;
            if row.len() != d - m {
                return Err(Error::InvalidParameter(format!(
                    "ladder step {m} holds {} coefficients, expected {}",
                    row.len(),
                    d - m
                )));
            }
        }
        if diag_sum.iter().any(|x| !x.is_finite())
            || coeffs.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("Fourier ladder"));
        }
        Ok(Self { dim, diag_sum, coeffs })
    }

    pub fn truncation(&self) -> Truncation {
        self.dim
    }

    /// `d[n] = ϱ_0(n) + ϱ_0*(n)`.
    pub fn diag_sum(&self) -> &[f64] {
        &self.diag_sum
    }

    /// `ϱ_m(n)` for `m ≥ 1`; `None` outside the stored triangle.
    pub fn coeff(&self, m: usize, n: usize) -> Option<C64> {
        if m == 0 {
            return None;
        }
        self.coeffs.get(m - 1)?.get(n).copied()
    }

    /// All `(m, n, ϱ_m(n))`, `m` ascending then `n` ascending.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(n, c)| (i + 1, n, *c)))
    }

    /// Largest entrywise difference against another ladder.
    pub fn max_abs_diff(&self, other: &FourierLadder) -> Result<f64> {
        self.dim.check_same(other.dim)?;
        let diag = self
            .diag_sum
            .iter()
            .zip(&other.diag_sum)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let off = self
            .iter()
            .zip(other.iter())
            .map(|((_, _, a), (_, _, b))| (a - b).norm())
            .fold(0.0, f64::max);
        Ok(diag.max(off))
    }
}

/// `c[(m, n)] = ∫ ρ_W(φ, n) e^{−imφ} dφ` for `0 ≤ m ≤ D−1`, by one FFT
/// per column. Exact for tables on grids with `M ≥ 2D−1` points.
pub fn fourier_coefficients(table: &NPWignerTable) -> Result<DMatrix<C64>> {
    let t = table.truncation();
    let grid = table.grid();
    grid.check_for(t)?;
    let d = t.dim();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut c = DMatrix::zeros(d, d);
    for n in 0..d {
        let col: Vec<C64> = table
            .values()
            .column(n)
            .iter()
            .map(|&v| C64::new(v, 0.0))
            .collect();
        let modes = Modes::analyze(&col);
        for m in 0..d {
            c[(m, n)] = modes.get(m as i64) * two_pi;
        }
    }
    Ok(c)
}

/// Neumaier-compensated complex accumulator.
#[derive(Default)]
struct CompensatedSum {
    sum: C64,
    comp: C64,
}

impl CompensatedSum {
    fn add(&mut self, x: C64) {
        let (re, cre) = neumaier(self.sum.re, self.comp.re, x.re);
        let (im, cim) = neumaier(self.sum.im, self.comp.im, x.im);
        self.sum = C64::new(re, im);
        self.comp = C64::new(cre, cim);
    }

    fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

fn neumaier(sum: f64, comp: f64, x: f64) -> (f64, f64) {
    let t = sum + x;
    let c = if sum.abs() >= x.abs() {
        (sum - t) + x
    } else {
        (x - t) + sum
    };
    (t, comp + c)
}

fn diag_from(c: &DMatrix<C64>) -> Vec<f64> {
    (0..c.ncols()).map(|n| c[(0, n)].re).collect()
}

/// `ϱ_m(n) = 2 Σ_{l=0}^{⌊n/m⌋} (−1)^l c_m(n − lm)`, summed from the largest
/// `l` (smallest Fock index) down.
pub fn ladder_closed_form(table: &NPWignerTable) -> Result<FourierLadder> {
    let c = fourier_coefficients(table)?;
    let d = table.truncation().dim();
    let compensated = d > COMPENSATED_ABOVE;
    let coeffs = (1..d)
        .map(|m| {
            (0..d - m)
                .map(|n| {
                    let terms = (0..=n / m).rev().map(|l| {
                        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                        c[(m, n - l * m)] * sign
                    });
                    let sum = if compensated {
                        let mut acc = CompensatedSum::default();
                        terms.for_each(|x| acc.add(x));
                        acc.value()
                    } else {
                        terms.sum()
                    };
                    sum * 2.0
                })
                .collect()
        })
        .collect();
    FourierLadder::new(table.truncation(), diag_from(&c), coeffs)
}

/// Rung-by-rung solution: `ϱ_m(n) = 2c_m(n)` for `n < m`, then
/// `ϱ_m(n) = 2c_m(n) − ϱ_m(n−m)`.
pub fn ladder_recursive(table: &NPWignerTable) -> Result<FourierLadder> {
    let c = fourier_coefficients(table)?;
    let d = table.truncation().dim();
    let coeffs = (1..d)
        .map(|m| {
            let mut row: Vec<C64> = Vec::with_capacity(d - m);
            for n in 0..d - m {
                let direct = c[(m, n)] * 2.0;
                let value = if n < m { direct } else { direct - row[n - m] };
                row.push(value);
            }
            row
        })
        .collect();
    FourierLadder::new(table.truncation(), diag_from(&c), coeffs)
}

/// `ρ = ϱ_0(n̂) + ϱ_0(n̂)† + Σ_m {ϱ_m(n̂) ê^{imφ} + ê^{−imφ} ϱ_m(n̂)†}`,
/// i.e. `ρ_nn = d[n]`, `ρ_{n,n+m} = ϱ_m(n)`, `ρ_{n+m,n} = ϱ_m(n)*`.
///
/// The result is checked against `tol`; a failure means the ladder (or the
/// table it came from) does not describe a density matrix.
pub fn assemble_density(ladder: &FourierLadder, tol: &Tolerances) -> Result<DensityMatrix> {
    let d = ladder.dim.dim();
    let mut rho = OperatorMatrix::zeros(d, d);
    for (n, &v) in ladder.diag_sum.iter().enumerate() {
        rho[(n, n)] = C64::new(v, 0.0);
    }
    for (m, n, v) in ladder.iter() {
        rho[(n, n + m)] = v;
        rho[(n + m, n)] = v.conj();
    }
    DensityMatrix::new(rho, tol).map_err(|e| match e {
        Error::TraceMismatch { .. } | Error::NotPositive { .. } | Error::NotHermitian { .. } => {
            Error::Inconsistent(format!("assembled matrix is not a density matrix: {e}"))
        }
        other => other,
    })
}

/// Table → closed-form ladder → density matrix.
pub fn reconstruct_density(table: &NPWignerTable, tol: &Tolerances) -> Result<DensityMatrix> {
    assemble_density(&ladder_closed_form(table)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::random_density;
    use crate::npw::{npw_from_density, PhaseGrid};
    use crate::states::{coherent_phase_state, number_state, thermal_density, CoherentPhaseParam};
    use crate::StateVector;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn t(d: usize) -> Truncation {
        Truncation::new(d).unwrap()
    }

    fn table_of(rho: &DensityMatrix) -> NPWignerTable {
        npw_from_density(rho, PhaseGrid::for_dim(rho.truncation())).unwrap()
    }

    #[test]
    fn vacuum_coefficients() {
        let vac = number_state(t(8), 0).unwrap().to_density();
        let c = fourier_coefficients(&table_of(&vac)).unwrap();
        for m in 0..8 {
            for n in 0..8 {
                let expected = if (m, n) == (0, 0) { 1.0 } else { 0.0 };
                assert!((c[(m, n)] - expected).norm() <= 1e-14, "({m},{n})");
            }
        }
        let four = number_state(t(8), 4).unwrap().to_density();
        let c = fourier_coefficients(&table_of(&four)).unwrap();
        assert_abs_diff_eq!(c[(0, 4)].re, 1.0, epsilon = 1e-14);
        let rest: f64 = c.iter().map(|z| z.norm()).sum::<f64>() - c[(0, 4)].norm();
        assert!(rest <= 1e-13);
    }

    #[test]
    fn coefficient_matches_matrix_element_mix() {
        let p = CoherentPhaseParam::from_polar(0.5, 0.0).unwrap();
        let rho = coherent_phase_state(t(64), p).unwrap().to_density();
        let c = fourier_coefficients(&table_of(&rho)).unwrap();
        // 2c_1(0) = ϱ_1(0) = ⟨0|ρ|1⟩
        assert!((c[(1, 0)] * 2.0 - rho.get(0, 1)).norm() <= 1e-14);
        // 2c_1(1) = ϱ_1(0) + ϱ_1(1)
        assert!((c[(1, 1)] * 2.0 - rho.get(0, 1) - rho.get(1, 2)).norm() <= 1e-14);
    }

    #[test]
    fn coherent_phase_ladder_values() {
        let p = CoherentPhaseParam::from_polar(0.5, 0.0).unwrap();
        let rho = coherent_phase_state(t(64), p).unwrap().to_density();
        let ladder = ladder_closed_form(&table_of(&rho)).unwrap();
        assert!((ladder.coeff(1, 0).unwrap() - 0.375).norm() <= 1e-12);
        assert!((ladder.coeff(1, 1).unwrap() - 0.09375).norm() <= 1e-12);
        assert!((ladder.coeff(2, 0).unwrap() - 0.1875).norm() <= 1e-12);
        for n in 0..20 {
            assert_abs_diff_eq!(ladder.diag_sum()[n], 0.75 * 0.25f64.powi(n as i32), epsilon = 1e-12);
        }
    }

    #[test]
    fn diagonal_states_have_no_ladder() {
        let th = thermal_density(t(20), 1.3).unwrap_or_else(|_| {
            crate::states::thermal_density_with(t(20), 1.3, &Tolerances::default().with_tail_loss())
                .unwrap()
        });
        let ladder = ladder_closed_form(&table_of(&th)).unwrap();
        assert!(ladder.iter().all(|(_, _, c)| c.norm() <= 1e-14));
    }

    #[test]
    fn routes_agree_and_large_m_is_bare_coefficient() {
        for seed in 0..10 {
            let rho = random_density(t(32), seed);
            let table = table_of(&rho);
            let a = ladder_closed_form(&table).unwrap();
            let b = ladder_recursive(&table).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() <= 1e-12);
            let c = fourier_coefficients(&table).unwrap();
            for m in 1..32 {
                for n in 0..m.min(32 - m) {
                    assert!((a.coeff(m, n).unwrap() - c[(m, n)] * 2.0).norm() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn single_photon_superposition() {
        let amps = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let psi = StateVector::from_truncated(amps, 0.0).unwrap();
        let ladder = ladder_recursive(&table_of(&psi.to_density())).unwrap();
        assert_abs_diff_eq!(ladder.coeff(1, 0).unwrap().re, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn assembly_of_known_ladders() {
        let tol = Tolerances::default();
        let vac = number_state(t(6), 0).unwrap().to_density();
        let back = assemble_density(&ladder_closed_form(&table_of(&vac)).unwrap(), &tol).unwrap();
        assert!(back.distance(&vac) <= 1e-14);

        let p = CoherentPhaseParam::from_polar(0.5, 0.0).unwrap();
        let rho = coherent_phase_state(t(64), p).unwrap().to_density();
        let back = reconstruct_density(&table_of(&rho), &tol).unwrap();
        for k in 0..64 {
            for l in 0..64 {
                let expected = 0.75 * 0.5f64.powi((k + l) as i32);
                assert!((back.get(k, l) - expected).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn random_round_trip() {
        let tol = Tolerances::default();
        for seed in 0..5 {
            let rho = random_density(t(32), seed);
            let back = reconstruct_density(&table_of(&rho), &tol).unwrap();
            assert!(back.distance(&rho) <= 1e-10);
        }
    }

    #[test]
    fn compensated_path_round_trip() {
        let rho = random_density(t(80), 3);
        let back = reconstruct_density(&table_of(&rho), &Tolerances::default()).unwrap();
        assert!(back.distance(&rho) <= 1e-10);
    }

    #[test]
    fn inconsistent_ladder_is_reported() {
        let ladder = FourierLadder::new(
            t(2),
            vec![0.5, 0.6],
            vec![vec![C64::new(0.1, 0.0)]],
        )
        .unwrap();
        assert!(matches!(
            assemble_density(&ladder, &Tolerances::default()),
            Err(Error::Inconsistent(_))
        ));
        assert!(FourierLadder::new(t(3), vec![1.0, 0.0, 0.0], vec![vec![]]).is_err());
    }
}
