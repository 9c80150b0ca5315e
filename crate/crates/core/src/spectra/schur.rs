//! Ordered Schur decompositions.
//!
//! `nalgebra` produces an unordered (quasi-)triangular factor. The sort
//! here bubbles adjacent diagonal blocks into magnitude order with
//! orthogonal/unitary swaps, so that leading columns of `Q` span the
//! invariant subspaces of the largest (or smallest) eigenvalue magnitudes.
//! Real 2x2 blocks always carry complex-conjugate pairs, hence equal
//! magnitudes, and are never split.

use crate::scalar::Field;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

/// Relative margin below which two block magnitudes are treated as tied.
/// Tied blocks are never swapped, which also keeps the Sylvester systems
/// solvable.
const SWAP_MARGIN: f64 = 1e-12;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SpectralOrder {
    DescendingMagnitude,
    AscendingMagnitude,
}

pub struct OrderedSchur<S: Field> {
    /// Unitary factor; `a = q * t * q.adjoint()`.
    pub q: DMatrix<S>,
    pub t: DMatrix<S>,
    /// Eigenvalues in diagonal order of `t`.
    pub eigenvalues: Vec<Complex<f64>>,
}

/// Unordered Schur factors `(q, t)` with an explicit iteration cap.
pub fn schur_qt<S: Field>(a: &DMatrix<S>) -> Result<(DMatrix<S>, DMatrix<S>)> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(Error::NotSquare {
            rows: d,
            cols: a.ncols(),
        });
    }
    if d == 0 {
        return Ok((DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)));
    }
    if a.iter().any(|x| !x.modulus().is_finite()) {
        return Err(Error::NonFiniteMatrix);
    }
    let cap = 300 * d + 1000;
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, cap)
        .ok_or(Error::EigenConvergence)?;
    Ok(schur.unpack())
}

/// Diagonal block starts and sizes of a quasi-triangular matrix.
pub fn scan_blocks<S: Field>(t: &DMatrix<S>) -> Vec<(usize, usize)> {
    let d = t.nrows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < d {
        let size = if i + 1 < d && t[(i + 1, i)].modulus() != 0.0 {
            2
        } else {
            1
        };
        blocks.push((i, size));
        i += size;
    }
    blocks
}

/// Eigenvalues of the diagonal block at `(start, size)`.
pub fn block_eigenvalues<S: Field>(t: &DMatrix<S>, start: usize, size: usize) -> Vec<Complex<f64>> {
    if size == 1 {
        return vec![t[(start, start)].to_c64()];
    }
    let t00 = t[(start, start)].to_c64();
    let t01 = t[(start, start + 1)].to_c64();
    let t10 = t[(start + 1, start)].to_c64();
    let t11 = t[(start + 1, start + 1)].to_c64();
    let val = (t00 - t11) * 0.5;
    let discr = t10 * t01 + val * val;
    let sq = discr.sqrt();
    let half_tra = (t00 + t11) * 0.5;
    vec![half_tra + sq, half_tra - sq]
}

/// Eigenvalues read off the quasi-triangular factor, in diagonal order.
pub fn eigenvalues_of_t<S: Field>(t: &DMatrix<S>) -> Vec<Complex<f64>> {
    scan_blocks(t)
        .into_iter()
        .flat_map(|(start, size)| block_eigenvalues(t, start, size))
        .collect()
}

pub fn ordered_schur<S: Field>(a: &DMatrix<S>, order: SpectralOrder) -> Result<OrderedSchur<S>> {
    let (mut q, mut t) = schur_qt(a)?;
    let mut blocks = scan_blocks(&t);
    let mut mags: Vec<f64> = blocks
        .iter()
        .map(|&(s, z)| block_eigenvalues(&t, s, z)[0].norm())
        .collect();
    let scale = mags.iter().cloned().fold(0.0, f64::max);
    let margin = SWAP_MARGIN * scale;

    let out_of_order = |a: f64, b: f64| match order {
        SpectralOrder::DescendingMagnitude => b > a + margin,
        SpectralOrder::AscendingMagnitude => a > b + margin,
    };

    let mut changed = true;
    while changed {
        changed = false;
        for w in 0..blocks.len().saturating_sub(1) {
            if out_of_order(mags[w], mags[w + 1]) {
                let (start, p) = blocks[w];
                let (_, s2) = blocks[w + 1];
                swap_adjacent_blocks(&mut t, &mut q, start, p, s2)?;
                blocks[w] = (start, s2);
                blocks[w + 1] = (start + s2, p);
                mags.swap(w, w + 1);
                changed = true;
            }
        }
    }

    let eigenvalues = eigenvalues_of_t(&t);
    Ok(OrderedSchur { q, t, eigenvalues })
}

/// Swaps the adjacent diagonal blocks at `start` (sizes `p` then `s2`)
/// with a unitary similarity, preserving the (quasi-)triangular form.
fn swap_adjacent_blocks<S: Field>(
    t: &mut DMatrix<S>,
    q: &mut DMatrix<S>,
    start: usize,
    p: usize,
    s2: usize,
) -> Result<()> {
    let ns = p + s2;
    let a11 = t.view((start, start), (p, p)).into_owned();
    let a12 = t.view((start, start + p), (p, s2)).into_owned();
    let a22 = t.view((start + p, start + p), (s2, s2)).into_owned();

    // Solve a11 * x - x * a22 = -a12 so that [x; I] spans the a22
    // invariant subspace of [a11 a12; 0 a22].
    let mut k = DMatrix::<S>::zeros(p * s2, p * s2);
    for c in 0..s2 {
        for r in 0..p {
            let row = c * p + r;
            for r2 in 0..p {
                k[(row, c * p + r2)] += a11[(r, r2)];
            }
            for c2 in 0..s2 {
                k[(row, c2 * p + r)] -= a22[(c2, c)];
            }
        }
    }
    let mut rhs = DVector::<S>::zeros(p * s2);
    for c in 0..s2 {
        for r in 0..p {
            rhs[c * p + r] = -a12[(r, c)];
        }
    }
    let x = nalgebra::linalg::LU::new(k)
        .solve(&rhs)
        .ok_or_else(|| Error::InternalSpectral("singular Sylvester system in block swap".into()))?;

    let mut v = DMatrix::<S>::zeros(ns, s2);
    for c in 0..s2 {
        for r in 0..p {
            v[(r, c)] = x[c * p + r];
        }
        v[(p + c, c)] = S::one();
    }
    let g = orthonormal_completion(&v)?;

    // Similarity on the window rows/columns, then exact zeros below the
    // new leading block.
    let ga = g.adjoint();
    let new_cols = t.columns(start, ns) * &g;
    t.columns_mut(start, ns).copy_from(&new_cols);
    let new_rows = &ga * t.rows(start, ns);
    t.rows_mut(start, ns).copy_from(&new_rows);
    let new_q = q.columns(start, ns) * &g;
    q.columns_mut(start, ns).copy_from(&new_q);
    for r in s2..ns {
        for c in 0..s2 {
            t[(start + r, start + c)] = S::zero();
        }
    }
    // A real pair block moved to the front may come out lower triangular
    // within the window; flip it back to upper form.
    if s2 == 2 && t[(start + 1, start)].modulus() != 0.0 && t[(start, start + 1)].modulus() == 0.0 {
        t.swap_rows(start, start + 1);
        t.swap_columns(start, start + 1);
        q.swap_columns(start, start + 1);
    }
    Ok(())
}

/// Extends the (independent) columns of `v` to a full unitary basis.
fn orthonormal_completion<S: Field>(v: &DMatrix<S>) -> Result<DMatrix<S>> {
    let n = v.nrows();
    let mut cols: Vec<DVector<S>> = Vec::with_capacity(n);

    let push = |cand: DVector<S>, cols: &mut Vec<DVector<S>>| -> bool {
        let mut x = cand;
        for _ in 0..2 {
            for c in cols.iter() {
                let coeff = c.dotc(&x);
                x.axpy(-coeff, c, S::one());
            }
        }
        let norm = x.norm();
        if norm > 1e-10 {
            cols.push(x / S::from_real(norm));
            true
        } else {
            false
        }
    };

    for j in 0..v.ncols() {
        if !push(v.column(j).into_owned(), &mut cols) {
            return Err(Error::InternalSpectral(
                "dependent invariant-subspace basis in block swap".into(),
            ));
        }
    }
    let mut j = 0;
    while cols.len() < n && j < n {
        let mut e = DVector::<S>::zeros(n);
        e[j] = S::one();
        push(e, &mut cols);
        j += 1;
    }
    if cols.len() < n {
        return Err(Error::InternalSpectral(
            "orthonormal completion failed".into(),
        ));
    }
    Ok(DMatrix::from_columns(&cols))
}
