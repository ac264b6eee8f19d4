//! Tridiagonal linear algebra: Thomas solve, Sturm counts and shifted
//! inverse iteration for the lowest eigenpair of a symmetric matrix.

/// Solves `A x = rhs` in place where `A` has sub-diagonal `lower`
/// (`lower[0]` unused), diagonal `diag` and super-diagonal `upper`
/// (`upper[n-1]` unused). No pivoting; intended for diagonally dominant systems.
pub fn solve_in_place(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return;
    }
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}

/// Symmetric tridiagonal matrix stored by diagonal and off-diagonal
/// (`off[i]` couples rows `i` and `i+1`).
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin lower bound on the spectrum.
    pub fn lower_bound(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < self.len() { self.off[i].abs() } else { 0.0 };
                self.diag[i] - l - r
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Outcome of shifted inverse iteration.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Lowest eigenpair by inverse iteration with a fixed shift below the
/// spectrum. Returns `None` when the iteration does not settle within
/// `max_iter`.
pub fn lowest_eigenpair(m: &SymTridiag, shift: f64, tol: f64, max_iter: usize) -> Option<Eigenpair> {
    let n = m.len();
    if n == 0 {
        return None;
    }
    let lower: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { m.off[i - 1] }).collect();
    let upper: Vec<f64> = (0..n).map(|i| if i + 1 < n { m.off[i] } else { 0.0 }).collect();
    let diag: Vec<f64> = m.diag.iter().map(|d| d - shift).collect();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut scratch = Vec::with_capacity(n);
    let mut prev = f64::INFINITY;
    for it in 1..=max_iter {
        // With ‖x‖ = 1 and y = (A − sI)⁻¹x, the estimate s + 1/(x·y) carries
        // absolute error of order ε·|λ − s| rather than ε·‖A‖.
        y.copy_from_slice(&x);
        solve_in_place(&lower, &diag, &upper, &mut y, &mut scratch);
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 || xy == 0.0 {
            return None;
        }
        let value = shift + 1.0 / xy;
        x.iter_mut().zip(&y).for_each(|(a, b)| *a = b / norm);
        if (value - prev).abs() <= tol * value.abs().max(1.0) {
            if x.iter().sum::<f64>() < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            return Some(Eigenpair { value, vector: x, iterations: it });
        }
        prev = value;
    }
    None
}
