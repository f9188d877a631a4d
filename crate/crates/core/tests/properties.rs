use std::f64::consts::PI;

use npw_core::cahill_glauber::{w_s_from_density, PolarGrid, PolarGridSpec, SParameter};
use npw_core::fock::{hermiticity_defect, min_eigenvalue, random_density};
use npw_core::io::{read_density_json, read_npw_csv, write_density_json, write_npw_csv};
use npw_core::npw::{marginal_number, marginal_phase, npw_from_density, PhaseGrid};
use npw_core::phase_ops::{quantize_phase_function, FourierSymbol};
use npw_core::reconstruct::{assemble_density, ladder_closed_form, ladder_recursive};
use npw_core::states::{coherent_phase_state, phase_overlap, CoherentPhaseParam};
use npw_core::{DensityMatrix, Tolerances, Truncation, C64};
use proptest::prelude::*;

fn t(d: usize) -> Truncation {
    Truncation::new(d).unwrap()
}

fn table_of(rho: &DensityMatrix) -> npw_core::npw::NPWignerTable {
    npw_from_density(rho, PhaseGrid::for_dim(rho.truncation())).unwrap()
}

/// Naive DFT coefficient `(1/M) Σ_j x_j e^{−ipφ_j}` on the standard grid.
fn dft_coefficient(grid: PhaseGrid, xs: &[f64], p: i64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (j, x) in xs.iter().enumerate() {
        acc += C64::from_polar(*x, -(p as f64) * grid.node(j));
    }
    acc / grid.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_densities_are_valid(d in 2usize..=32, seed in any::<u64>()) {
        let rho = random_density(t(d), seed);
        prop_assert!(hermiticity_defect(rho.entries()) <= 1e-12);
        prop_assert!((rho.trace() - 1.0).abs() <= 1e-10);
        prop_assert!(min_eigenvalue(rho.entries()) >= -1e-10);
    }

    #[test]
    fn round_trip_recovers_density(d in 2usize..=48, seed in any::<u64>()) {
        let rho = random_density(t(d), seed);
        let table = table_of(&rho);
        let closed = ladder_closed_form(&table).unwrap();
        let back = assemble_density(&closed, &Tolerances::default()).unwrap();
        prop_assert!(back.distance(&rho) <= 1e-10);
        for (m, n, v) in closed.iter() {
            prop_assert!((v - rho.get(n, n + m)).norm() <= 1e-12);
        }
        prop_assert!(closed.max_abs_diff(&ladder_recursive(&table).unwrap()).unwrap() <= 1e-12);
    }

    #[test]
    fn ladder_is_linear_in_the_state(seed_a in any::<u64>(), seed_b in any::<u64>(), p in 0.0f64..=1.0) {
        let tt = t(16);
        let a = random_density(tt, seed_a);
        let b = random_density(tt, seed_b);
        let mix = a.mix(&b, p).unwrap();
        let la = ladder_closed_form(&table_of(&a)).unwrap();
        let lb = ladder_closed_form(&table_of(&b)).unwrap();
        let lm = ladder_closed_form(&table_of(&mix)).unwrap();
        for ((x, y), z) in la.iter().zip(lb.iter()).zip(lm.iter()) {
            prop_assert!((x.2 * p + y.2 * (1.0 - p) - z.2).norm() <= 1e-12);
        }
        for n in 0..16 {
            let expected = p * la.diag_sum()[n] + (1.0 - p) * lb.diag_sum()[n];
            prop_assert!((expected - lm.diag_sum()[n]).abs() <= 1e-12);
        }
    }

    #[test]
    fn marginals_match_matrix_elements(d in prop::sample::select(vec![4usize, 16, 32]), seed in any::<u64>()) {
        let rho = random_density(t(d), seed);
        let table = table_of(&rho);
        let grid = table.grid();
        for (n, p) in marginal_number(&table).iter().enumerate() {
            prop_assert!((p - rho.get(n, n).re).abs() <= 1e-12);
        }
        for (j, p) in marginal_phase(&table).iter().enumerate() {
            let phi = grid.node(j);
            let mut direct = C64::new(0.0, 0.0);
            for k in 0..d {
                for n in 0..d {
                    direct += phase_overlap(k, phi).conj() * rho.get(k, n) * phase_overlap(n, phi);
                }
            }
            prop_assert!((p - direct.re).abs() <= 1e-12);
        }
        prop_assert!((table.total_weight() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn rows_are_trigonometric_polynomials(d in 2usize..=24, seed in any::<u64>()) {
        let rho = random_density(t(d), seed);
        let grid = PhaseGrid::new(4 * d + 3).unwrap();
        let table = npw_from_density(&rho, grid).unwrap();
        for n in 0..d {
            let row = table.fock_row(n);
            for p in d as i64..=(grid.len() as i64 / 2) {
                prop_assert!(dft_coefficient(grid, &row, p).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn phase_expectation_from_marginal(d in 2usize..=24, seed in any::<u64>(), coefs in prop::collection::vec(-1.0f64..1.0, 14)) {
        // f(φ) = Σ_{|m| ≤ 3} f̃_m e^{imφ}, complex coefficients
        let fm = |m: i64| {
            let i = (m + 3) as usize;
            C64::new(coefs[2 * i], coefs[2 * i + 1])
        };
        let sym = FourierSymbol::from_fn(3, fm);
        let op = quantize_phase_function(t(d), &sym);
        let rho = random_density(t(d), seed);
        let table = table_of(&rho);
        let grid = table.grid();
        let mut quad = C64::new(0.0, 0.0);
        for (j, p) in marginal_phase(&table).iter().enumerate() {
            let phi = grid.node(j);
            let f: C64 = (-3..=3).map(|m| fm(m) * C64::from_polar(1.0, m as f64 * phi)).sum();
            quad += f * *p * grid.weight();
        }
        prop_assert!((rho.expectation(&op) - quad).norm() <= 1e-10);
    }

    #[test]
    fn real_phase_symbols_quantize_to_hermitian(d in 2usize..=20, coefs in prop::collection::vec(-1.0f64..1.0, 8)) {
        // real f needs f̃_{−m} = conj(f̃_m)
        let fm = |m: i64| {
            let c = C64::new(coefs[2 * m.unsigned_abs() as usize], coefs[2 * m.unsigned_abs() as usize + 1]);
            match m.signum() {
                0 => C64::new(c.re, 0.0),
                1 => c,
                _ => c.conj(),
            }
        };
        let op = quantize_phase_function(t(d), &FourierSymbol::from_fn(3, fm));
        prop_assert!(hermiticity_defect(&op) <= 1e-15);
    }

    #[test]
    fn files_round_trip_bit_for_bit(d in 2usize..=12, seed in any::<u64>()) {
        let rho = random_density(t(d), seed);
        let mut json = Vec::new();
        write_density_json(&rho, &mut json).unwrap();
        let back = read_density_json(json.as_slice(), &Tolerances::default()).unwrap();
        prop_assert_eq!(back.entries(), rho.entries());

        let table = table_of(&rho);
        let mut csv = Vec::new();
        write_npw_csv(&table, None, &mut csv).unwrap();
        prop_assert_eq!(read_npw_csv(csv.as_slice()).unwrap(), table);
    }

    #[test]
    fn cahill_glauber_tables_are_real(d in 2usize..=10, seed in any::<u64>(), s in -0.9f64..0.5) {
        let rho = random_density(t(d), seed);
        let grid = PolarGrid::new(PolarGridSpec { r_max: 5.0, n_r: 24, m_gamma: 64 }).unwrap();
        let table = w_s_from_density(&rho, &grid, SParameter::new(s).unwrap()).unwrap();
        prop_assert!(table.max_imag() <= 1e-10);
    }
}

#[test]
fn coherent_phase_rows_change_sign_as_in_the_figure() {
    let d = 128;
    for tenth in [1, 3, 5, 7, 9] {
        let p = CoherentPhaseParam::from_polar(tenth as f64 / 10.0, 0.0).unwrap();
        let table = table_of(&coherent_phase_state(t(d), p).unwrap().to_density());
        let min_row = |n: usize| table.fock_row(n).into_iter().fold(f64::MAX, f64::min);
        assert!(min_row(0) > 0.0, "|zeta| = 0.{tenth}");
        for n in [1, 3, 5] {
            assert!(min_row(n) < 0.0, "|zeta| = 0.{tenth}, n = {n}");
        }
    }
}

#[test]
fn phase_states_resolve_the_identity() {
    for d in [2usize, 7, 16, 33] {
        let grid = PhaseGrid::new(2 * d - 1).unwrap();
        for m in 0..d {
            for n in 0..d {
                let sum: C64 = grid
                    .nodes()
                    .map(|phi| phase_overlap(m, phi) * phase_overlap(n, phi).conj())
                    .sum::<C64>()
                    * (2.0 * PI / grid.len() as f64);
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!((sum - expected).norm() <= 1e-13, "d={d} m={m} n={n}: {sum}");
            }
        }
    }
}
