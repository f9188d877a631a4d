//! Uniform-grid Fourier transforms on `φ_j = −π + 2πj/M`.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::C64;

/// `(−1)^m` for signed `m`: the shift from `[0, 2π)` to `[−π, π)` nodes.
fn half_turn(m: i64) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Discrete Fourier modes `f̃_m = (1/M) Σ_j f(φ_j) e^{−imφ_j}`.
#[derive(Debug, Clone)]
pub(crate) struct Modes {
    bins: Vec<C64>,
}

impl Modes {
    pub(crate) fn analyze(samples: &[C64]) -> Self {
        let m_points = samples.len();
        let mut bins = samples.to_vec();
        FftPlanner::new().plan_fft_forward(m_points).process(&mut bins);
        let scale = 1.0 / m_points as f64;
        for b in bins.iter_mut() {
            *b *= scale;
        }
        Self { bins }
    }

    /// Mode `m`, aliased modulo `M`.
    pub(crate) fn get(&self, m: i64) -> C64 {
        let len = self.bins.len() as i64;
        self.bins[m.rem_euclid(len) as usize] * half_turn(m)
    }

    pub(crate) fn len(&self) -> usize {
        self.bins.len()
    }

    /// Raw bin magnitudes squared, indexed by `m mod M`.
    pub(crate) fn power(&self) -> impl Iterator<Item = f64> + '_ {
        self.bins.iter().map(|b| b.norm_sqr())
    }
}

/// `g(φ_j) = Σ_p a_p e^{ipφ_j}` for `|p| ≤ p_max`, requires `M > 2 p_max`.
pub(crate) fn synthesize(m_points: usize, p_max: usize, coef: impl Fn(i64) -> C64) -> Vec<C64> {
    debug_assert!(m_points > 2 * p_max);
    let mut buf = vec![C64::new(0.0, 0.0); m_points];
    let len = m_points as i64;
    for p in -(p_max as i64)..=(p_max as i64) {
        buf[p.rem_euclid(len) as usize] += coef(p) * half_turn(p);
    }
    FftPlanner::new().plan_fft_inverse(m_points).process(&mut buf);
    buf
}

/// Node `φ_j`.
pub(crate) fn node(m_points: usize, j: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / m_points as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analysis_inverts_synthesis() {
        for m_points in [7usize, 8, 33] {
            let p_max = (m_points - 1) / 2;
            let coef = |p: i64| C64::new(0.1 * p as f64, 1.0 / (1.0 + (p * p) as f64));
            let samples = synthesize(m_points, p_max, coef);
            for (j, s) in samples.iter().enumerate() {
                let phi = node(m_points, j);
                let direct: C64 = (-(p_max as i64)..=p_max as i64)
                    .map(|p| coef(p) * C64::from_polar(1.0, p as f64 * phi))
                    .sum();
                assert!((direct - s).norm() < 1e-12);
            }
            let modes = Modes::analyze(&samples);
            for p in -(p_max as i64)..=p_max as i64 {
                assert!((modes.get(p) - coef(p)).norm() < 1e-13, "M={m_points} p={p}");
            }
        }
    }
}
