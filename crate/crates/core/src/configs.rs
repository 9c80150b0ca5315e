//! Large eigenvalue configurations: which block contributes how many of
//! the top-k eigenvalue magnitudes, the admissibility condition, the
//! opposition involution, structured-flag checks and the
//! configuration-based gap formula.

use crate::blocks::{self, Decomposition};
use crate::scalar::Field;
use crate::spectra::{self, Flag, Spectrum, Subspace};
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// A sorted subset of `{1, ..., d-1}`; the empty set is allowed (the
/// corresponding gap condition is vacuous).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaSet {
    d: usize,
    members: Vec<usize>,
}

impl ThetaSet {
    pub fn new<I: IntoIterator<Item = usize>>(d: usize, members: I) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        for &k in &members {
            if k == 0 || k >= d {
                return Err(Error::BadTheta { k, d });
            }
        }
        Ok(ThetaSet { d, members })
    }

    pub fn empty(d: usize) -> Self {
        ThetaSet {
            d,
            members: Vec::new(),
        }
    }

    pub fn full(d: usize) -> Self {
        ThetaSet {
            d,
            members: (1..d).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.members.binary_search(&k).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    /// Image under the opposition involution `k -> d - k`.
    pub fn iota_set(&self) -> ThetaSet {
        ThetaSet::new(self.d, self.members.iter().map(|&k| self.d - k))
            .expect("involution stays in range")
    }
}

/// The opposition involution `iota(k) = d - k`.
pub fn iota(d: usize, k: usize) -> Result<usize> {
    if k == 0 || k >= d {
        return Err(Error::IndexOutOfRange {
            k,
            max: d.saturating_sub(1),
        });
    }
    Ok(d - k)
}

/// The table `q[j][k]`: how many of the `k` largest eigenvalue magnitudes
/// live in block `j`. Rows are blocks (0-based), columns follow the
/// members of `theta` in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigConfig {
    dec: Decomposition,
    theta: ThetaSet,
    q: Vec<Vec<usize>>,
}

impl EigConfig {
    /// Validates shape and the range `0 <= q[j][k] <= dim U_j`;
    /// admissibility is a separate check ([`is_admissible`]).
    pub fn new(dec: Decomposition, theta: ThetaSet, q: Vec<Vec<usize>>) -> Result<Self> {
        if theta.ambient_dim() != dec.total() {
            return Err(Error::DimensionMismatch {
                expected: dec.total(),
                got: theta.ambient_dim(),
            });
        }
        if q.len() != dec.factor_count() {
            return Err(Error::DimensionMismatch {
                expected: dec.factor_count(),
                got: q.len(),
            });
        }
        for (j, row) in q.iter().enumerate() {
            if row.len() != theta.members().len() {
                return Err(Error::DimensionMismatch {
                    expected: theta.members().len(),
                    got: row.len(),
                });
            }
            if row.iter().any(|&v| v > dec.dim(j)) {
                return Err(Error::NotAdmissible);
            }
        }
        Ok(EigConfig { dec, theta, q })
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.dec
    }

    pub fn theta(&self) -> &ThetaSet {
        &self.theta
    }

    fn k_index(&self, k: usize) -> Result<usize> {
        self.theta
            .members()
            .binary_search(&k)
            .map_err(|_| Error::BadTheta {
                k,
                d: self.theta.ambient_dim(),
            })
    }

    /// `q[j][k]` with `j` a 0-based block index and `k` a member of theta.
    pub fn q(&self, j: usize, k: usize) -> Result<usize> {
        Ok(self.q[j][self.k_index(k)?])
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.q
    }
}

impl Serialize for EigConfig {
    /// Integer table keyed by `(block, k)`.
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        #[derive(Serialize)]
        struct Entry {
            block: usize,
            k: usize,
            q: usize,
        }
        let entries: Vec<Entry> = (0..self.q.len())
            .flat_map(|j| {
                self.theta
                    .members()
                    .iter()
                    .enumerate()
                    .map(move |(ki, &k)| (j, ki, k))
            })
            .map(|(j, ki, k)| Entry {
                block: j,
                k,
                q: self.q[j][ki],
            })
            .collect();
        let mut s = serializer.serialize_struct("EigConfig", 3)?;
        s.serialize_field("dims", self.dec.dims())?;
        s.serialize_field("theta", self.theta.members())?;
        s.serialize_field("table", &entries)?;
        s.end()
    }
}

/// `sum_j q[j][k] = k` for every `k` in theta.
pub fn is_admissible(config: &EigConfig) -> bool {
    config
        .theta()
        .members()
        .iter()
        .enumerate()
        .all(|(ki, &k)| config.rows().iter().map(|row| row[ki]).sum::<usize>() == k)
}

/// All `(i, j)` with `q[i][k] > 0` and `q[j][k] < dim U_j`; non-empty for
/// admissible configurations and `k` in range.
pub fn nonempty_pairs(config: &EigConfig, k: usize) -> Result<Vec<(usize, usize)>> {
    let ki = config.k_index(k)?;
    let dec = config.decomposition();
    let m = dec.factor_count();
    let mut pairs = Vec::new();
    for i in 0..m {
        if config.rows()[i][ki] == 0 {
            continue;
        }
        for j in 0..m {
            if config.rows()[j][ki] < dec.dim(j) {
                pairs.push((i, j));
            }
        }
    }
    Ok(pairs)
}

/// Sorts the merged per-block magnitudes and counts, per block, how many
/// land in the top `k` for each `k` in theta.
///
/// Ties strictly inside the top-k are fine; a tie straddling position `k`
/// blocks the configuration. An exact tie is reported as non-proximality,
/// a tie within `tol * lambda_1` as tie-ambiguity.
pub fn config_from_block_spectra(
    block_spectra: &[Spectrum],
    dec: &Decomposition,
    theta: &ThetaSet,
    tol: f64,
) -> Result<EigConfig> {
    if block_spectra.len() != dec.factor_count() {
        return Err(Error::DimensionMismatch {
            expected: dec.factor_count(),
            got: block_spectra.len(),
        });
    }
    let merged = merge_block_spectra(block_spectra);
    if merged.dim() != dec.total() {
        return Err(Error::DimensionMismatch {
            expected: dec.total(),
            got: merged.dim(),
        });
    }
    let mags = merged.magnitudes();
    let tags = merged.block_tags().expect("merged spectrum carries tags");
    let scale = mags.first().copied().unwrap_or(0.0);
    let mut q = vec![vec![0usize; theta.members().len()]; dec.factor_count()];
    for (ki, k) in theta.iter().enumerate() {
        let gap = mags[k - 1] - mags[k];
        if gap <= 0.0 {
            return Err(Error::NotProximal { k });
        }
        if gap <= tol * scale {
            return Err(Error::TieAmbiguous { k });
        }
        for &tag in &tags[..k] {
            q[tag][ki] += 1;
        }
    }
    EigConfig::new(dec.clone(), theta.clone(), q)
}

/// Concatenates per-block spectra into one spectrum with block tags.
pub fn merge_block_spectra(block_spectra: &[Spectrum]) -> Spectrum {
    let mut eigs = Vec::new();
    let mut tags = Vec::new();
    for (j, s) in block_spectra.iter().enumerate() {
        eigs.extend_from_slice(s.eigenvalues());
        tags.extend(std::iter::repeat_n(j, s.dim()));
    }
    Spectrum::from_eigenvalues(eigs, Some(tags))
}

/// The large eigenvalue theta-configuration of a block upper triangular
/// matrix: counts of per-block eigenvalues among the top-k magnitudes.
pub fn large_config<S: Field>(
    a: &DMatrix<S>,
    dec: &Decomposition,
    theta: &ThetaSet,
    tol: f64,
) -> Result<EigConfig> {
    let b = blocks::block_diagonalize(a, dec)?;
    let block_spectra = (0..dec.factor_count())
        .map(|j| spectra::eigen_magnitudes(&dec.block_of(&b, j)))
        .collect::<Result<Vec<_>>>()?;
    config_from_block_spectra(&block_spectra, dec, theta, tol)
}

/// `min over (i, j) of log(lambda_(q_ik)(B_i) / lambda_(q_jk + 1)(B_j))`;
/// equals the k-th logarithmic gap of the assembled matrix.
pub fn gap_via_config(block_spectra: &[Spectrum], config: &EigConfig, k: usize) -> Result<f64> {
    let ki = config.k_index(k)?;
    let pairs = nonempty_pairs(config, k)?;
    if pairs.is_empty() {
        return Err(Error::EmptyPairSet { k });
    }
    let mut best = f64::INFINITY;
    for (i, j) in pairs {
        let qi = config.rows()[i][ki];
        let qj = config.rows()[j][ki];
        let top = block_spectra[i].lambda(qi);
        let bottom = block_spectra[j].magnitudes()[qj];
        if bottom <= 0.0 {
            return Err(Error::SingularGap { k });
        }
        best = best.min((top / bottom).ln());
    }
    Ok(best)
}

/// Which flag-dimension test to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureMode {
    /// Measures `dim pi_j(U'_j ∩ F_k)`.
    Weak,
    /// Measures `dim(U_j ∩ F_k)`.
    Strong,
}

/// Measured intersection dimensions of a flag against a configuration.
#[derive(Clone, Debug, Serialize)]
pub struct StructuredReport {
    pub mode: StructureMode,
    /// `measured[j][ki]` aligned with the theta members.
    pub measured: Vec<Vec<usize>>,
    pub pass: bool,
}

/// Compares flag intersection dimensions with the configuration table.
pub fn check_structured<S: Field>(
    flag: &Flag<S>,
    dec: &Decomposition,
    config: &EigConfig,
    mode: StructureMode,
) -> Result<StructuredReport> {
    if flag.signature() != config.theta() {
        return Err(Error::SignatureMismatch);
    }
    let d = dec.total();
    let m = dec.factor_count();
    let theta = config.theta();
    let mut measured = vec![vec![0usize; theta.members().len()]; m];
    for (ki, k) in theta.iter().enumerate() {
        let space = flag.subspace(k).expect("signature checked");
        for j in 0..m {
            measured[j][ki] = match mode {
                StructureMode::Strong => coordinate_intersection_dim(space, dec.offset(j), dec.dim(j), d),
                StructureMode::Weak => {
                    let prefix = dec.offset(j) + dec.dim(j);
                    let inter = coordinate_intersection_basis(space, 0, prefix, d);
                    // rank of the block-j rows of the intersection
                    if inter.ncols() == 0 {
                        0
                    } else {
                        let rows = inter.rows(dec.offset(j), dec.dim(j)).into_owned();
                        spectra::rank_of(&rows)
                    }
                }
            };
        }
    }
    let pass = measured == *config.rows();
    Ok(StructuredReport {
        mode,
        measured,
        pass,
    })
}

/// `dim(coordinate span ∩ span)`: nullity of the rows of the basis lying
/// outside the coordinate range.
fn coordinate_intersection_dim<S: Field>(
    space: &Subspace<S>,
    offset: usize,
    size: usize,
    d: usize,
) -> usize {
    if space.dim() == 0 || size == 0 {
        return 0;
    }
    let outside = d - size;
    if outside == 0 {
        return space.dim();
    }
    let mut comp = DMatrix::<S>::zeros(outside, space.dim());
    let basis = space.basis();
    let mut r = 0;
    for row in (0..offset).chain(offset + size..d) {
        comp.row_mut(r).copy_from(&basis.row(row));
        r += 1;
    }
    space.dim() - spectra::rank_of(&comp)
}

/// Orthonormal basis of `coordinate span ∩ span`, as ambient columns.
fn coordinate_intersection_basis<S: Field>(
    space: &Subspace<S>,
    offset: usize,
    size: usize,
    d: usize,
) -> DMatrix<S> {
    if space.dim() == 0 || size == 0 {
        return DMatrix::zeros(d, 0);
    }
    let outside = d - size;
    if outside == 0 {
        return space.basis().clone();
    }
    let basis = space.basis();
    // Zero-padded to at least `space.dim()` rows so the thin SVD exposes
    // the full null space.
    let mut comp = DMatrix::<S>::zeros(outside.max(space.dim()), space.dim());
    let mut r = 0;
    for row in (0..offset).chain(offset + size..d) {
        comp.row_mut(r).copy_from(&basis.row(row));
        r += 1;
    }
    // null space of `comp` gives the coefficient vectors of intersection
    // members
    let svd = comp.svd(false, true);
    let vt = svd.v_t.expect("svd with v requested");
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > spectra::SUBSPACE_RANK_TOL)
        .count();
    let nullity = space.dim() - rank;
    if nullity == 0 {
        return DMatrix::zeros(d, 0);
    }
    let coeffs = vt.rows(rank, nullity).adjoint();
    basis * coeffs
}

/// Per-block signatures `theta_j = {q[j][k]} ∩ {1, ..., dim U_j - 1}`.
pub fn block_thetas(config: &EigConfig) -> Vec<ThetaSet> {
    let dec = config.decomposition();
    (0..dec.factor_count())
        .map(|j| {
            let dj = dec.dim(j);
            let members = config.rows()[j]
                .iter()
                .copied()
                .filter(|&v| v >= 1 && v < dj);
            ThetaSet::new(dj, members).expect("values within block range")
        })
        .collect()
}

/// Sanity gate: for `k <= d/2` every block holds at most half of its
/// dimension among the top-k, and dually for `k >= d/2`.
pub fn half_bound_check(config: &EigConfig) -> bool {
    let dec = config.decomposition();
    let d = dec.total();
    for (ki, k) in config.theta().iter().enumerate() {
        for j in 0..dec.factor_count() {
            let q = config.rows()[j][ki];
            if 2 * k <= d && 2 * q > dec.dim(j) {
                return false;
            }
            if 2 * k >= d && 2 * q < dec.dim(j) {
                return false;
            }
        }
    }
    true
}
