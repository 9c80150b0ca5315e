//! Dense spectral kernel: eigenvalue magnitudes, logarithmic gaps,
//! attracting/repelling subspaces and flags, proximality predicates.
//!
//! Everything is generic over the scalar field (`f64` or `Complex<f64>`);
//! magnitudes, gaps and tolerances are always real. For a real matrix a
//! complex-conjugate eigenvalue pair contributes a two-dimensional real
//! invariant subspace, so subspace dimensions count real dimensions.

mod schur;

pub use schur::{ordered_schur, schur_qt, OrderedSchur, SpectralOrder};

use crate::configs::ThetaSet;
use crate::scalar::Field;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;
use std::collections::BTreeMap;

/// Default relative tolerance for deciding that two eigenvalue magnitudes
/// are separated. Magnitudes closer than `tol * lambda_1` are treated as
/// tied, hence non-proximal.
pub const DEFAULT_PROXIMALITY_TOL: f64 = 1e-9;

/// Absolute tolerance on singular values in subspace rank computations.
pub const SUBSPACE_RANK_TOL: f64 = 1e-7;

/// Eigenvalue magnitudes of a matrix, sorted non-increasing, with the
/// underlying complex eigenvalues and optional block provenance.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    magnitudes: Vec<f64>,
    #[serde(skip)]
    eigenvalues: Vec<Complex<f64>>,
    block_tags: Option<Vec<usize>>,
}

impl Spectrum {
    /// Sorts the given eigenvalues by magnitude, descending. Tags, when
    /// present, travel with their eigenvalue.
    pub fn from_eigenvalues(eigenvalues: Vec<Complex<f64>>, tags: Option<Vec<usize>>) -> Spectrum {
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&i, &j| {
            eigenvalues[j]
                .norm()
                .total_cmp(&eigenvalues[i].norm())
                .then(i.cmp(&j))
        });
        let magnitudes = order.iter().map(|&i| eigenvalues[i].norm()).collect();
        let eigs = order.iter().map(|&i| eigenvalues[i]).collect();
        let block_tags = tags.map(|t| order.iter().map(|&i| t[i]).collect());
        Spectrum {
            magnitudes,
            eigenvalues: eigs,
            block_tags,
        }
    }

    pub fn dim(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn eigenvalues(&self) -> &[Complex<f64>] {
        &self.eigenvalues
    }

    pub fn block_tags(&self) -> Option<&[usize]> {
        self.block_tags.as_deref()
    }

    /// `lambda_k`, 1-based as in the usual ordering convention.
    pub fn lambda(&self, k: usize) -> f64 {
        self.magnitudes[k - 1]
    }

    /// `log(lambda_k / lambda_(k+1))`.
    pub fn log_gap(&self, k: usize) -> Result<f64> {
        let d = self.dim();
        if k == 0 || k >= d {
            return Err(Error::IndexOutOfRange {
                k,
                max: d.saturating_sub(1),
            });
        }
        if self.magnitudes[k] <= 0.0 {
            return Err(Error::SingularGap { k });
        }
        Ok((self.magnitudes[k - 1] / self.magnitudes[k]).ln())
    }

    /// Strict gap test at every `k` in `theta`, relative to `lambda_1`.
    pub fn is_proximal(&self, theta: &ThetaSet, tol: f64) -> bool {
        let scale = self.magnitudes.first().copied().unwrap_or(0.0);
        theta
            .iter()
            .all(|k| self.magnitudes[k - 1] - self.magnitudes[k] > tol * scale)
    }
}

/// All eigenvalue magnitudes of `a`, with multiplicity, descending.
pub fn eigen_magnitudes<S: Field>(a: &DMatrix<S>) -> Result<Spectrum> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() == 0 {
        return Ok(Spectrum::from_eigenvalues(Vec::new(), None));
    }
    let (_, t) = schur_qt(a)?;
    Ok(Spectrum::from_eigenvalues(
        schur::eigenvalues_of_t(&t),
        None,
    ))
}

/// `log(lambda_k(a) / lambda_(k+1)(a))`.
pub fn log_gap<S: Field>(a: &DMatrix<S>, k: usize) -> Result<f64> {
    eigen_magnitudes(a)?.log_gap(k)
}

/// True iff `lambda_k - lambda_(k+1) > tol * lambda_1` for all `k` in
/// `theta`.
pub fn is_proximal<S: Field>(a: &DMatrix<S>, theta: &ThetaSet, tol: f64) -> Result<bool> {
    let spectrum = eigen_magnitudes(a)?;
    if theta.ambient_dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            got: theta.ambient_dim(),
        });
    }
    Ok(spectrum.is_proximal(theta, tol))
}

/// A subspace of coordinate space carried by an orthonormal column basis.
#[derive(Clone, Debug)]
pub struct Subspace<S: Field> {
    basis: DMatrix<S>,
}

impl<S: Field> Subspace<S> {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<S>) -> Self {
        Subspace { basis }
    }

    /// Orthonormalizes the column span of an arbitrary matrix, dropping
    /// dependent columns (singular values below [`SUBSPACE_RANK_TOL`]).
    pub fn from_span(m: &DMatrix<S>) -> Self {
        if m.ncols() == 0 {
            return Subspace::zero(m.nrows());
        }
        let svd = m.clone().svd(true, false);
        let u = svd.u.expect("svd with u requested");
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > SUBSPACE_RANK_TOL)
            .count();
        Subspace {
            basis: u.columns(0, rank).into_owned(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<S> {
        &self.basis
    }

    /// Residual of projecting `v` onto this subspace, for containment
    /// tests.
    pub fn projection_residual(&self, v: &DMatrix<S>) -> f64 {
        let proj = &self.basis * (self.basis.adjoint() * v);
        (v - proj).norm()
    }

    /// True when `other` is contained in `self` within `tol`.
    pub fn contains(&self, other: &Subspace<S>, tol: f64) -> bool {
        other.dim() <= self.dim() && self.projection_residual(&other.basis) <= tol
    }

    /// `dim(self ∩ other)` via the rank of the concatenated bases.
    pub fn intersection_dim(&self, other: &Subspace<S>) -> usize {
        if self.dim() == 0 || other.dim() == 0 {
            return 0;
        }
        let mut stacked = DMatrix::<S>::zeros(self.ambient_dim(), self.dim() + other.dim());
        stacked.columns_mut(0, self.dim()).copy_from(&self.basis);
        stacked
            .columns_mut(self.dim(), other.dim())
            .copy_from(&other.basis);
        let rank = rank_of(&stacked);
        self.dim() + other.dim() - rank
    }
}

/// Numerical rank with the crate-wide singular value cutoff.
pub fn rank_of<S: Field>(m: &DMatrix<S>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values
        .iter()
        .filter(|&&s| s > SUBSPACE_RANK_TOL)
        .count()
}

/// A nested family of subspaces indexed by a signature set.
#[derive(Clone, Debug)]
pub struct Flag<S: Field> {
    signature: ThetaSet,
    subspaces: BTreeMap<usize, Subspace<S>>,
}

impl<S: Field> Flag<S> {
    /// Validates dimensions and nesting (containment within `1e-7`).
    pub fn new(signature: ThetaSet, subspaces: BTreeMap<usize, Subspace<S>>) -> Result<Self> {
        let keys: Vec<usize> = subspaces.keys().copied().collect();
        if keys != signature.members() {
            return Err(Error::SignatureMismatch);
        }
        for (&k, space) in &subspaces {
            if space.dim() != k || space.ambient_dim() != signature.ambient_dim() {
                return Err(Error::SignatureMismatch);
            }
        }
        let members = signature.members();
        for pair in members.windows(2) {
            let small = &subspaces[&pair[0]];
            let large = &subspaces[&pair[1]];
            if !large.contains(small, 1e-7) {
                return Err(Error::SignatureMismatch);
            }
        }
        Ok(Flag {
            signature,
            subspaces,
        })
    }

    pub fn signature(&self) -> &ThetaSet {
        &self.signature
    }

    pub fn subspace(&self, k: usize) -> Option<&Subspace<S>> {
        self.subspaces.get(&k)
    }

    pub fn subspaces(&self) -> &BTreeMap<usize, Subspace<S>> {
        &self.subspaces
    }
}

fn tie_extent(mags: &[f64], k: usize, ascending: bool) -> usize {
    let d = mags.len();
    let scale = if ascending {
        mags.last().copied().unwrap_or(0.0)
    } else {
        mags.first().copied().unwrap_or(0.0)
    };
    let tol = DEFAULT_PROXIMALITY_TOL * scale;
    let threshold = mags[k - 1];
    let mut r = k;
    while r < d {
        let tied = if ascending {
            mags[r] <= threshold + tol
        } else {
            mags[r] >= threshold - tol
        };
        if tied {
            r += 1;
        } else {
            break;
        }
    }
    r
}

/// Span of the generalized eigenspaces for eigenvalue magnitudes at least
/// `lambda_k(a)`. Always has dimension at least `k`; exactly `k` iff `a`
/// is proximal at `k`.
pub fn attracting_subspace<S: Field>(a: &DMatrix<S>, k: usize) -> Result<Subspace<S>> {
    let d = a.nrows();
    if k > d {
        return Err(Error::IndexOutOfRange { k, max: d });
    }
    if k == 0 {
        return Ok(Subspace::zero(d));
    }
    let schur = ordered_schur(a, SpectralOrder::DescendingMagnitude)?;
    let mags: Vec<f64> = schur.eigenvalues.iter().map(|e| e.norm()).collect();
    let r = tie_extent(&mags, k, false);
    Ok(Subspace::from_orthonormal(
        schur.q.columns(0, r).into_owned(),
    ))
}

/// Span of the generalized eigenspaces for eigenvalue magnitudes at most
/// `lambda_(d-k+1)(a)`, the complementary tail of the attracting side.
pub fn repelling_subspace<S: Field>(a: &DMatrix<S>, k: usize) -> Result<Subspace<S>> {
    let d = a.nrows();
    if k > d {
        return Err(Error::IndexOutOfRange { k, max: d });
    }
    if k == 0 {
        return Ok(Subspace::zero(d));
    }
    let schur = ordered_schur(a, SpectralOrder::AscendingMagnitude)?;
    let mags: Vec<f64> = schur.eigenvalues.iter().map(|e| e.norm()).collect();
    let r = tie_extent(&mags, k, true);
    Ok(Subspace::from_orthonormal(
        schur.q.columns(0, r).into_owned(),
    ))
}

/// Attracting flag of signature `theta`; requires proximality at every
/// `k` in `theta`.
pub fn attracting_flag<S: Field>(a: &DMatrix<S>, theta: &ThetaSet) -> Result<Flag<S>> {
    let schur = ordered_schur(a, SpectralOrder::DescendingMagnitude)?;
    let mags: Vec<f64> = schur.eigenvalues.iter().map(|e| e.norm()).collect();
    let scale = mags.first().copied().unwrap_or(0.0);
    let mut subspaces = BTreeMap::new();
    for k in theta.iter() {
        if mags[k - 1] - mags[k] <= DEFAULT_PROXIMALITY_TOL * scale {
            return Err(Error::NotProximal { k });
        }
        subspaces.insert(
            k,
            Subspace::from_orthonormal(schur.q.columns(0, k).into_owned()),
        );
    }
    Flag::new(theta.clone(), subspaces)
}

/// Repelling flag of signature `iota(theta)`; requires proximality of `a`
/// at every `k` in `theta`.
pub fn repelling_flag<S: Field>(a: &DMatrix<S>, theta: &ThetaSet) -> Result<Flag<S>> {
    let d = a.nrows();
    let schur = ordered_schur(a, SpectralOrder::AscendingMagnitude)?;
    let mags_asc: Vec<f64> = schur.eigenvalues.iter().map(|e| e.norm()).collect();
    let scale = mags_asc.last().copied().unwrap_or(0.0);
    let iota = theta.iota_set();
    let mut subspaces = BTreeMap::new();
    for j in iota.iter() {
        // Gap between the j smallest and the rest equals the gap of `a`
        // at k = d - j.
        if mags_asc[j] - mags_asc[j - 1] <= DEFAULT_PROXIMALITY_TOL * scale {
            return Err(Error::NotProximal { k: d - j });
        }
        subspaces.insert(
            j,
            Subspace::from_orthonormal(schur.q.columns(0, j).into_owned()),
        );
    }
    Flag::new(iota, subspaces)
}
