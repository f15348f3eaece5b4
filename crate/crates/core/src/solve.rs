//! Dense symmetric positive-definite solves for the ridge regressions used
//! throughout the toolkit (relation-vector fits, fold-in, rank regression).
//!
//! Systems are small (d x d with d <= a few hundred), so a hand-rolled
//! Cholesky factorization with one round of iterative refinement is plenty.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("normal matrix is singular or not positive definite; use a ridge penalty > 0")]
    Singular,
    #[error("dimension mismatch: matrix is {rows}x{rows}, rhs has length {rhs}")]
    Mismatch { rows: usize, rhs: usize },
}

/// In-place Cholesky factorization of a row-major symmetric matrix.
/// On success the lower triangle of `a` holds L with A = L L^T.
fn cholesky(a: &mut [f64], d: usize) -> Result<(), SolveError> {
    for col in 0..d {
        for row in col..d {
            let mut sum = a[row * d + col];
            for k in 0..col {
                sum -= a[row * d + k] * a[col * d + k];
            }
            if row == col {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(SolveError::Singular);
                }
                a[row * d + col] = sum.sqrt();
            } else {
                a[row * d + col] = sum / a[col * d + col];
            }
        }
    }
    Ok(())
}

fn solve_factored(l: &[f64], d: usize, b: &[f64]) -> Vec<f64> {
    // L y = b
    let mut y = vec![0.0; d];
    for i in 0..d {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * d + k] * y[k];
        }
        y[i] = sum / l[i * d + i];
    }
    // L^T x = y
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let mut sum = y[i];
        for k in i + 1..d {
            sum -= l[k * d + i] * x[k];
        }
        x[i] = sum / l[i * d + i];
    }
    x
}

/// Solve A x = b for symmetric positive-definite A (row-major, d x d).
/// One step of iterative refinement keeps the residual near machine epsilon
/// even for the mildly ill-conditioned systems a tiny ridge produces.
pub fn solve_spd(a: &[f64], d: usize, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    if b.len() != d || a.len() != d * d {
        return Err(SolveError::Mismatch { rows: d, rhs: b.len() });
    }
    let mut l = a.to_vec();
    cholesky(&mut l, d)?;
    let mut x = solve_factored(&l, d, b);
    // residual r = b - A x, correction A e = r
    let mut r = vec![0.0; d];
    for i in 0..d {
        let mut acc = b[i];
        for k in 0..d {
            acc -= a[i * d + k] * x[k];
        }
        r[i] = acc;
    }
    let e = solve_factored(&l, d, &r);
    for i in 0..d {
        x[i] += e[i];
    }
    Ok(x)
}

/// Accumulator for a ridge problem min_w sum_j (w . phi_j - t_j)^2 + lambda |w|^2,
/// built one observation row at a time and solved via the normal equations.
pub struct RidgeProblem {
    d: usize,
    ata: Vec<f64>,
    atb: Vec<f64>,
    rows: usize,
}

impl RidgeProblem {
    pub fn new(d: usize) -> Self {
        RidgeProblem { d, ata: vec![0.0; d * d], atb: vec![0.0; d], rows: 0 }
    }

    pub fn add_row(&mut self, phi: &[f64], target: f64) {
        debug_assert_eq!(phi.len(), self.d);
        for (a, &pa) in phi.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for (cell, &pb) in self.ata[a * self.d..(a + 1) * self.d].iter_mut().zip(phi) {
                *cell += pa * pb;
            }
            self.atb[a] += pa * target;
        }
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn solve(&self, lambda: f64) -> Result<Vec<f64>, SolveError> {
        let mut a = self.ata.clone();
        for i in 0..self.d {
            a[i * self.d + i] += lambda;
        }
        solve_spd(&a, self.d, &self.atb)
    }
}
