//! Log-factorials and associated Laguerre polynomials.

/// Table of `ln k!` for `k = 0..len`, accumulated as `Σ ln j` so large
/// factorials never overflow.
#[derive(Debug, Clone)]
pub struct LnFactorial(Vec<f64>);

impl LnFactorial {
    pub fn new(len: usize) -> Self {
        let mut table = Vec::with_capacity(len.max(1));
        let mut acc = 0.0f64;
        table.push(0.0);
        for k in 1..len {
            acc += (k as f64).ln();
            table.push(acc);
        }
        Self(table)
    }

    /// `ln k!`; panics when `k` is beyond the table.
    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `ln n!` without a table.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Associated Laguerre polynomial `L_j^{(a)}(x)` by the upward three-term
/// recurrence `(k+1)L_{k+1} = (2k+1+a−x)L_k − (k+a)L_{k−1}`.
pub fn laguerre_assoc(j: usize, a: usize, x: f64) -> f64 {
    laguerre_general(j, a as f64, x)
}

/// `L_j^{(α)}(x)` for real order `α`. The recurrence is valid for any `α`,
/// including negative integers, but loses relative accuracy near `x = 0`
/// when `α` is a negative integer.
pub fn laguerre_general(j: usize, alpha: f64, x: f64) -> f64 {
    match j {
        0 => 1.0,
        _ => {
            let mut prev = 1.0;
            let mut cur = 1.0 + alpha - x;
            for k in 1..j {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `[L_0^{(a)}(x), …, L_{len−1}^{(a)}(x)]` in one recurrence sweep.
pub fn laguerre_sequence(len: usize, a: usize, x: f64) -> Vec<f64> {
    let alpha = a as f64;
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    out.push(1.0);
    if len == 1 {
        return out;
    }
    out.push(1.0 + alpha - x);
    for k in 1..len - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}
