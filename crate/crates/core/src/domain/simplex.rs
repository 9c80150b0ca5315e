//! Dense two-phase simplex with Bland's rule.
//!
//! Problem form: maximize `c . x` subject to `A x <= b` with free
//! variables. Free variables are split into positive/negative parts and
//! rows with negative right-hand side get a phase-one artificial. Bland's
//! pivot rule (lowest eligible index in, lowest basis index out) makes
//! the solve deterministic and cycle-free; the pivot cap is a safety net
//! only.

use crate::{Error, Result};
use serde::Serialize;

pub const LP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, Serialize)]
pub struct LpResult {
    pub status: LpStatus,
    /// Optimal point in the original free variables (empty unless
    /// optimal).
    pub point: Vec<f64>,
    pub value: f64,
}

struct Tableau {
    /// `rows x cols`; last column is the right-hand side, last row the
    /// objective.
    data: Vec<Vec<f64>>,
    basis: Vec<usize>,
    rows: usize,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.data[row][col];
        for c in 0..self.cols {
            self.data[row][c] *= inv;
        }
        self.data[row][col] = 1.0;
        for r in 0..=self.rows {
            if r == row {
                continue;
            }
            let factor = self.data[r][col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..self.cols {
                self.data[r][c] -= factor * self.data[row][c];
            }
            self.data[r][col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Bland's rule over the allowed column range; returns false at
    /// optimality.
    fn step(&mut self, allowed_cols: usize) -> Result<bool> {
        let entering = (0..allowed_cols).find(|&c| self.data[self.rows][c] < -LP_TOL);
        let Some(col) = entering else {
            return Ok(false);
        };
        let mut leaving: Option<(usize, f64)> = None;
        for r in 0..self.rows {
            let coeff = self.data[r][col];
            if coeff > LP_TOL {
                let ratio = self.data[r][self.cols - 1] / coeff;
                let better = match leaving {
                    None => true,
                    Some((best_row, best_ratio)) => {
                        ratio < best_ratio - LP_TOL
                            || (ratio <= best_ratio + LP_TOL
                                && self.basis[r] < self.basis[best_row])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
        }
        let Some((row, _)) = leaving else {
            return Err(Error::UnboundedProgram);
        };
        self.pivot(row, col);
        Ok(true)
    }

    fn run(&mut self, allowed_cols: usize) -> Result<()> {
        let cap = 50_000 + 100 * (self.rows + self.cols);
        for _ in 0..cap {
            if !self.step(allowed_cols)? {
                return Ok(());
            }
        }
        Err(Error::SimplexStall)
    }
}

/// Maximizes `objective . x` over `{x : rows[i].0 . x <= rows[i].1}`.
pub fn maximize(objective: &[f64], rows: &[(Vec<f64>, f64)]) -> Result<LpResult> {
    let n = objective.len();
    let m = rows.len();
    if m == 0 {
        // No constraints: only the zero objective is bounded.
        if objective.iter().all(|&c| c == 0.0) {
            return Ok(LpResult {
                status: LpStatus::Optimal,
                point: vec![0.0; n],
                value: 0.0,
            });
        }
        return Ok(LpResult {
            status: LpStatus::Unbounded,
            point: Vec::new(),
            value: f64::INFINITY,
        });
    }

    // Columns: n positive parts, n negative parts, m slacks, then
    // artificials for flipped rows, then the rhs.
    let flipped: Vec<bool> = rows.iter().map(|r| r.1 < 0.0).collect();
    let n_art = flipped.iter().filter(|&&f| f).count();
    let real_cols = 2 * n + m;
    let cols = real_cols + n_art + 1;

    let mut data = vec![vec![0.0; cols]; m + 1];
    let mut basis = vec![0usize; m];
    let mut art_index = 0;
    for (i, (coeffs, bound)) in rows.iter().enumerate() {
        assert_eq!(coeffs.len(), n, "constraint arity mismatch");
        let sign = if flipped[i] { -1.0 } else { 1.0 };
        for j in 0..n {
            data[i][j] = sign * coeffs[j];
            data[i][n + j] = -sign * coeffs[j];
        }
        data[i][2 * n + i] = sign;
        data[i][cols - 1] = sign * bound;
        if flipped[i] {
            let col = real_cols + art_index;
            data[i][col] = 1.0;
            basis[i] = col;
            art_index += 1;
        } else {
            basis[i] = 2 * n + i;
        }
    }

    let mut tab = Tableau {
        data,
        basis,
        rows: m,
        cols,
    };

    // Phase one: minimize the artificial sum.
    if n_art > 0 {
        for c in real_cols..cols - 1 {
            tab.data[m][c] = 1.0;
        }
        for r in 0..m {
            if tab.basis[r] >= real_cols {
                let row = tab.data[r].clone();
                for c in 0..cols {
                    tab.data[m][c] -= row[c];
                }
            }
        }
        tab.run(cols - 1)?;
        let infeasibility = -tab.data[m][cols - 1];
        if infeasibility > 1e-7 {
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                point: Vec::new(),
                value: f64::NEG_INFINITY,
            });
        }
        // Drive leftover artificials out of the basis where possible;
        // rows where that fails are linearly dependent and get dropped.
        let mut dependent = Vec::new();
        for r in 0..tab.rows {
            if tab.basis[r] >= real_cols {
                if let Some(col) = (0..real_cols).find(|&c| tab.data[r][c].abs() > LP_TOL) {
                    tab.pivot(r, col);
                } else {
                    dependent.push(r);
                }
            }
        }
        for &r in dependent.iter().rev() {
            tab.data.remove(r);
            tab.basis.remove(r);
            tab.rows -= 1;
        }
    }

    // Phase two. The objective row sits behind the (possibly reduced)
    // constraint rows.
    let obj = tab.rows;
    for c in 0..cols {
        tab.data[obj][c] = 0.0;
    }
    for j in 0..n {
        tab.data[obj][j] = -objective[j];
        tab.data[obj][n + j] = objective[j];
    }
    for r in 0..tab.rows {
        let b = tab.basis[r];
        let factor = tab.data[obj][b];
        if factor != 0.0 {
            let row = tab.data[r].clone();
            for c in 0..cols {
                tab.data[obj][c] -= factor * row[c];
            }
            tab.data[obj][b] = 0.0;
        }
    }
    match tab.run(real_cols) {
        Ok(()) => {}
        Err(Error::UnboundedProgram) => {
            return Ok(LpResult {
                status: LpStatus::Unbounded,
                point: Vec::new(),
                value: f64::INFINITY,
            })
        }
        Err(e) => return Err(e),
    }

    let mut point = vec![0.0; n];
    for r in 0..tab.rows {
        let b = tab.basis[r];
        let value = tab.data[r][cols - 1];
        if b < n {
            point[b] += value;
        } else if b < 2 * n {
            point[b - n] -= value;
        }
    }
    let value = point
        .iter()
        .zip(objective)
        .map(|(x, c)| x * c)
        .sum::<f64>();
    Ok(LpResult {
        status: LpStatus::Optimal,
        point,
        value,
    })
}
