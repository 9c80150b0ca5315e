//! Block-structure algebra: coordinate decompositions, block predicates,
//! block diagonalization, normalization, and the `(s, x, B)`
//! parameterization of block diagonal matrices.
//!
//! Factors are consecutive coordinate blocks; arbitrary decompositions are
//! reduced to this form by a change of basis at ingestion.

use crate::configs::ThetaSet;
use crate::scalar::Field;
use crate::words::{FreeGroup, Word};
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::Serialize;

/// Absolute entry tolerance for block predicates, relative to the max
/// entry magnitude.
pub const BLOCK_ENTRY_TOL: f64 = 1e-12;

/// Tolerance on `| |det B_j| - 1 |` for block normalized matrices.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// An ordered list of consecutive coordinate blocks `U_1, ..., U_m`
/// spanning coordinate space. Zero-dimensional factors are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl Decomposition {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().sum();
        if total == 0 {
            return Err(Error::EmptyDecomposition);
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &d in &dims {
            acc += d;
            offsets.push(acc);
        }
        Ok(Decomposition { dims, offsets })
    }

    pub fn factor_count(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, j: usize) -> usize {
        self.dims[j]
    }

    pub fn offset(&self, j: usize) -> usize {
        self.offsets[j]
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Index of the block containing coordinate `row`.
    pub fn block_index_of(&self, row: usize) -> usize {
        debug_assert!(row < self.total());
        // offsets is sorted; zero-size blocks share offsets, take the
        // block whose half-open range contains the row.
        (0..self.dims.len())
            .find(|&j| self.offsets[j] <= row && row < self.offsets[j + 1])
            .expect("row within total dimension")
    }

    /// Indices of factors with positive dimension.
    pub fn nonzero_blocks(&self) -> Vec<usize> {
        (0..self.dims.len()).filter(|&j| self.dims[j] > 0).collect()
    }

    /// Signature of the associated partial flag: the nonzero proper
    /// prefix sums.
    pub fn signature(&self) -> ThetaSet {
        let d = self.total();
        let members = self.offsets[1..self.dims.len()]
            .iter()
            .copied()
            .filter(|&s| s > 0 && s < d);
        ThetaSet::new(d, members).expect("prefix sums lie in range")
    }

    /// The `j`th diagonal block of `a`.
    pub fn block_of<S: Field>(&self, a: &DMatrix<S>, j: usize) -> DMatrix<S> {
        a.view((self.offset(j), self.offset(j)), (self.dim(j), self.dim(j)))
            .into_owned()
    }

    fn check_size<S: Field>(&self, a: &DMatrix<S>) -> Result<()> {
        if a.nrows() != a.ncols() {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if a.nrows() != self.total() {
            return Err(Error::DimensionMismatch {
                expected: self.total(),
                got: a.nrows(),
            });
        }
        Ok(())
    }
}

fn max_entry<S: Field>(a: &DMatrix<S>) -> f64 {
    a.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}

/// True when all off-block entries vanish within `1e-12 * max|a|`.
pub fn is_block_diagonal<S: Field>(a: &DMatrix<S>, dec: &Decomposition) -> Result<bool> {
    dec.check_size(a)?;
    let tol = BLOCK_ENTRY_TOL * max_entry(a);
    for r in 0..a.nrows() {
        let jr = dec.block_index_of(r);
        for c in 0..a.ncols() {
            if dec.block_index_of(c) != jr && a[(r, c)].modulus() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True when all below-block entries vanish within `1e-12 * max|a|`.
pub fn is_block_upper_triangular<S: Field>(a: &DMatrix<S>, dec: &Decomposition) -> Result<bool> {
    dec.check_size(a)?;
    let tol = BLOCK_ENTRY_TOL * max_entry(a);
    for r in 0..a.nrows() {
        let jr = dec.block_index_of(r);
        for c in 0..a.ncols() {
            if dec.block_index_of(c) < jr && a[(r, c)].modulus() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Direct sum of the diagonal blocks of a block upper triangular matrix.
/// Preserves all eigenvalue magnitudes.
pub fn block_diagonalize<S: Field>(a: &DMatrix<S>, dec: &Decomposition) -> Result<DMatrix<S>> {
    if !is_block_upper_triangular(a, dec)? {
        return Err(Error::NotBlockUpperTriangular);
    }
    let d = dec.total();
    let mut out = DMatrix::<S>::zeros(d, d);
    for j in 0..dec.factor_count() {
        let o = dec.offset(j);
        let s = dec.dim(j);
        out.view_mut((o, o), (s, s)).copy_from(&a.view((o, o), (s, s)));
    }
    Ok(out)
}

/// The block-scalar matrix with factor `j` scaled by
/// `e^(j - floor(m/2) - 1)` (1-based `j`). Conjugation by its powers
/// contracts a block upper triangular matrix onto its block diagonal.
pub fn c_matrix<S: Field>(dec: &Decomposition) -> DMatrix<S> {
    let m = dec.factor_count();
    let d = dec.total();
    let mut out = DMatrix::<S>::zeros(d, d);
    for j in 0..m {
        let scalar = (((j + 1) as f64) - ((m / 2) as f64) - 1.0).exp();
        for r in dec.offset(j)..dec.offset(j) + dec.dim(j) {
            out[(r, r)] = S::from_real(scalar);
        }
    }
    out
}

/// `C^n A C^(-n)` computed entrywise; the verification route for the
/// block diagonalization limit.
pub fn c_conjugation<S: Field>(a: &DMatrix<S>, dec: &Decomposition, n: u32) -> Result<DMatrix<S>> {
    dec.check_size(a)?;
    let mut out = a.clone();
    for r in 0..a.nrows() {
        let jr = dec.block_index_of(r) as f64;
        for c in 0..a.ncols() {
            let jc = dec.block_index_of(c) as f64;
            let factor = ((jr - jc) * n as f64).exp();
            out[(r, c)] *= S::from_real(factor);
        }
    }
    Ok(out)
}

/// `A / |det A|^(1/d)`: the retraction onto unit-magnitude determinant.
/// Idempotent.
pub fn normalize<S: Field>(a: &DMatrix<S>) -> Result<DMatrix<S>> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let d = a.nrows();
    if d == 0 {
        return Ok(a.clone());
    }
    let det = a.determinant().modulus();
    if det <= 0.0 || !det.is_finite() {
        return Err(Error::SingularMatrix);
    }
    let scale = (det.ln() / d as f64).exp();
    Ok(a / S::from_real(scale))
}

/// A blockwise log-scaling deformation direction: `sum d_j x_j = 0` and
/// `x_j = 0` on zero-dimensional factors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeformVector {
    x: Vec<f64>,
}

impl DeformVector {
    pub fn new(dec: &Decomposition, x: Vec<f64>) -> Result<Self> {
        if x.len() != dec.factor_count() {
            return Err(Error::DimensionMismatch {
                expected: dec.factor_count(),
                got: x.len(),
            });
        }
        let residual: f64 = x
            .iter()
            .zip(dec.dims())
            .map(|(&xi, &di)| xi * di as f64)
            .sum();
        let scale: f64 = x
            .iter()
            .zip(dec.dims())
            .map(|(&xi, &di)| (xi * di as f64).abs())
            .sum::<f64>()
            + 1.0;
        if residual.abs() > 1e-9 * scale {
            return Err(Error::BadDeformVector {
                residual: residual.abs(),
            });
        }
        if x.iter()
            .zip(dec.dims())
            .any(|(&xi, &di)| di == 0 && xi != 0.0)
        {
            return Err(Error::BadDeformVector { residual: 0.0 });
        }
        Ok(DeformVector { x })
    }

    pub fn zero(dec: &Decomposition) -> Self {
        DeformVector {
            x: vec![0.0; dec.factor_count()],
        }
    }

    pub fn components(&self) -> &[f64] {
        &self.x
    }

    pub fn component(&self, j: usize) -> f64 {
        self.x[j]
    }

    pub fn add(&self, other: &DeformVector) -> DeformVector {
        DeformVector {
            x: self
                .x
                .iter()
                .zip(other.x.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, t: f64) -> DeformVector {
        DeformVector {
            x: self.x.iter().map(|a| a * t).collect(),
        }
    }

    /// Basis of the deformation space obtained by eliminating the last
    /// nonzero-block coordinate through the weighted zero-sum relation.
    /// Its length is `#nonzero factors - 1`.
    pub fn reduced_basis(dec: &Decomposition) -> Vec<DeformVector> {
        let nonzero = dec.nonzero_blocks();
        let Some((&last, kept)) = nonzero.split_last() else {
            return Vec::new();
        };
        kept.iter()
            .map(|&j| {
                let mut x = vec![0.0; dec.factor_count()];
                x[j] = 1.0;
                x[last] = -(dec.dim(j) as f64) / dec.dim(last) as f64;
                DeformVector { x }
            })
            .collect()
    }
}

/// Block diagonal matrix with every block of unit-magnitude determinant.
#[derive(Clone, Debug)]
pub struct BlockNormalized<S: Field> {
    dec: Decomposition,
    blocks: Vec<DMatrix<S>>,
}

impl<S: Field> BlockNormalized<S> {
    pub fn new(dec: Decomposition, blocks: Vec<DMatrix<S>>) -> Result<Self> {
        if blocks.len() != dec.factor_count() {
            return Err(Error::DimensionMismatch {
                expected: dec.factor_count(),
                got: blocks.len(),
            });
        }
        for (j, b) in blocks.iter().enumerate() {
            if b.nrows() != dec.dim(j) || b.ncols() != dec.dim(j) {
                return Err(Error::DimensionMismatch {
                    expected: dec.dim(j),
                    got: b.nrows(),
                });
            }
            if dec.dim(j) > 0 {
                let det = b.determinant().modulus();
                if (det - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::NotBlockNormalized { block: j, det });
                }
            }
        }
        Ok(BlockNormalized { dec, blocks })
    }

    pub fn from_matrix(a: &DMatrix<S>, dec: &Decomposition) -> Result<Self> {
        if !is_block_diagonal(a, dec)? {
            return Err(Error::NotBlockDiagonal);
        }
        let blocks = (0..dec.factor_count()).map(|j| dec.block_of(a, j)).collect();
        BlockNormalized::new(dec.clone(), blocks)
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.dec
    }

    pub fn blocks(&self) -> &[DMatrix<S>] {
        &self.blocks
    }

    pub fn assemble(&self) -> DMatrix<S> {
        let d = self.dec.total();
        let mut out = DMatrix::<S>::zeros(d, d);
        for (j, b) in self.blocks.iter().enumerate() {
            let o = self.dec.offset(j);
            out.view_mut((o, o), (b.nrows(), b.ncols())).copy_from(b);
        }
        out
    }
}

/// `psi(s, x, B) = ⊕ e^(s + x_j) B_j`; `|det| = e^(d s)`.
pub fn psi<S: Field>(s: f64, x: &DeformVector, b: &BlockNormalized<S>) -> Result<DMatrix<S>> {
    let dec = b.decomposition();
    if x.components().len() != dec.factor_count() {
        return Err(Error::DimensionMismatch {
            expected: dec.factor_count(),
            got: x.components().len(),
        });
    }
    let d = dec.total();
    let mut out = DMatrix::<S>::zeros(d, d);
    for (j, block) in b.blocks().iter().enumerate() {
        let o = dec.offset(j);
        let scale = S::from_real((s + x.component(j)).exp());
        let scaled = block * scale;
        out.view_mut((o, o), (block.nrows(), block.ncols()))
            .copy_from(&scaled);
    }
    Ok(out)
}

/// Inverts [`psi`] on block diagonal invertible matrices:
/// `s = log|det A| / d`, `x_j = log|det A_j| / d_j - s`, and
/// `B_j = A_j / |det A_j|^(1/d_j)`. Zero-dimensional factors contribute
/// `x_j = 0` and an empty block.
pub fn psi_inverse<S: Field>(
    a: &DMatrix<S>,
    dec: &Decomposition,
) -> Result<(f64, DeformVector, BlockNormalized<S>)> {
    if !is_block_diagonal(a, dec)? {
        return Err(Error::NotBlockDiagonal);
    }
    let m = dec.factor_count();
    let mut log_dets = vec![0.0f64; m];
    for j in 0..m {
        if dec.dim(j) == 0 {
            continue;
        }
        let det = dec.block_of(a, j).determinant().modulus();
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::SingularMatrix);
        }
        log_dets[j] = det.ln();
    }
    let d = dec.total() as f64;
    let s = log_dets.iter().sum::<f64>() / d;
    let mut x = vec![0.0f64; m];
    let mut blocks = Vec::with_capacity(m);
    for j in 0..m {
        let dj = dec.dim(j);
        if dj == 0 {
            blocks.push(DMatrix::<S>::zeros(0, 0));
            continue;
        }
        x[j] = log_dets[j] / dj as f64 - s;
        let scale = S::from_real((-(log_dets[j] / dj as f64)).exp());
        blocks.push(dec.block_of(a, j) * scale);
    }
    Ok((
        s,
        DeformVector::new(dec, x)?,
        BlockNormalized::new(dec.clone(), blocks)?,
    ))
}

/// Structure tag declared by a representation and verified on load.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    General,
    UpperTriangular,
    BlockDiagonal,
    BlockNormalized,
}

impl Structure {
    pub fn is_block_structured(self) -> bool {
        !matches!(self, Structure::General)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Structure::General => "general",
            Structure::UpperTriangular => "upper_triangular",
            Structure::BlockDiagonal => "block_diagonal",
            Structure::BlockNormalized => "block_normalized",
        }
    }
}

/// A representation of a free group given by generator images, with a
/// verified structure tag.
#[derive(Clone, Debug)]
pub struct RepSpec<S: Field> {
    group: FreeGroup,
    dec: Decomposition,
    images: Vec<DMatrix<S>>,
    inverses: Vec<DMatrix<S>>,
    structure: Structure,
}

impl<S: Field> RepSpec<S> {
    pub fn new(
        group: FreeGroup,
        dec: Decomposition,
        images: Vec<DMatrix<S>>,
        structure: Structure,
    ) -> Result<Self> {
        if images.len() != group.rank() {
            return Err(Error::DimensionMismatch {
                expected: group.rank(),
                got: images.len(),
            });
        }
        let d = dec.total();
        let mut inverses = Vec::with_capacity(images.len());
        for (index, image) in images.iter().enumerate() {
            if image.nrows() != d || image.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: image.nrows(),
                });
            }
            if image.iter().any(|x| !x.modulus().is_finite()) {
                return Err(Error::SingularImage { index });
            }
            let inv = image
                .clone()
                .try_inverse()
                .ok_or(Error::SingularImage { index })?;
            inverses.push(inv);
        }
        let check = |ok: bool, reason: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::StructureMismatch {
                    declared: structure.as_str().to_string(),
                    reason: reason.to_string(),
                })
            }
        };
        for (index, image) in images.iter().enumerate() {
            match structure {
                Structure::General => {}
                Structure::UpperTriangular => check(
                    is_block_upper_triangular(image, &dec)?,
                    &format!("image of generator {index} is not block upper triangular"),
                )?,
                Structure::BlockDiagonal => check(
                    is_block_diagonal(image, &dec)?,
                    &format!("image of generator {index} is not block diagonal"),
                )?,
                Structure::BlockNormalized => {
                    check(
                        is_block_diagonal(image, &dec)?,
                        &format!("image of generator {index} is not block diagonal"),
                    )?;
                    BlockNormalized::from_matrix(image, &dec)?;
                }
            }
        }
        Ok(RepSpec {
            group,
            dec,
            images,
            inverses,
            structure,
        })
    }

    pub fn group(&self) -> &FreeGroup {
        &self.group
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.dec
    }

    pub fn dim(&self) -> usize {
        self.dec.total()
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn images(&self) -> &[DMatrix<S>] {
        &self.images
    }

    pub fn image(&self, generator: usize) -> &DMatrix<S> {
        &self.images[generator]
    }

    /// Product of generator images along the word.
    pub fn evaluate(&self, word: &Word) -> Result<DMatrix<S>> {
        let rank = self.group.rank();
        let mut out = DMatrix::<S>::identity(self.dim(), self.dim());
        for letter in word.letters() {
            let g = letter.generator();
            if g >= rank {
                return Err(Error::GroupMismatch { index: g, rank });
            }
            let factor = if letter.is_inverse() {
                &self.inverses[g]
            } else {
                &self.images[g]
            };
            out *= factor;
        }
        Ok(out)
    }
}

fn check_deform_params<S: Field>(
    delta: &[f64],
    phi: &[DeformVector],
    zeta: &RepSpec<S>,
) -> Result<()> {
    if zeta.structure() != Structure::BlockNormalized {
        return Err(Error::StructureMismatch {
            declared: zeta.structure().as_str().to_string(),
            reason: "block deformation requires a block normalized base representation".into(),
        });
    }
    let rank = zeta.group().rank();
    if delta.len() != rank || phi.len() != rank {
        return Err(Error::DimensionMismatch {
            expected: rank,
            got: delta.len().min(phi.len()),
        });
    }
    let m = zeta.decomposition().factor_count();
    if phi.iter().any(|p| p.components().len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: phi.iter().map(|p| p.components().len()).min().unwrap_or(0),
        });
    }
    Ok(())
}

/// Evaluates the block diagonal representation
/// `gamma -> ⊕ e^(delta(gamma) + phi_j(gamma)) zeta_j(gamma)` at `word`,
/// extending `delta` and `phi` from the generators through the
/// abelianization.
pub fn beta_eval<S: Field>(
    delta: &[f64],
    phi: &[DeformVector],
    zeta: &RepSpec<S>,
    word: &Word,
) -> Result<DMatrix<S>> {
    check_deform_params(delta, phi, zeta)?;
    let rank = zeta.group().rank();
    let ab = word.abelianize(rank);
    if word
        .letters()
        .iter()
        .any(|l| l.generator() >= rank)
    {
        return Err(Error::GroupMismatch {
            index: word.letters().iter().map(|l| l.generator()).max().unwrap(),
            rank,
        });
    }
    let dec = zeta.decomposition();
    let delta_w: f64 = ab.iter().zip(delta).map(|(&n, &d)| n as f64 * d).sum();
    let mut base = zeta.evaluate(word)?;
    for j in 0..dec.factor_count() {
        let phi_wj: f64 = ab
            .iter()
            .zip(phi)
            .map(|(&n, p)| n as f64 * p.component(j))
            .sum();
        let scale = S::from_real((delta_w + phi_wj).exp());
        let o = dec.offset(j);
        let s = dec.dim(j);
        for r in o..o + s {
            for c in o..o + s {
                base[(r, c)] *= scale;
            }
        }
    }
    Ok(base)
}

/// The deformed representation itself: generator images
/// `⊕ e^(delta_g + phi_(g,j)) zeta_j(g)`, tagged block diagonal.
pub fn beta_rep<S: Field>(
    delta: &[f64],
    phi: &[DeformVector],
    zeta: &RepSpec<S>,
) -> Result<RepSpec<S>> {
    check_deform_params(delta, phi, zeta)?;
    let images = (0..zeta.group().rank())
        .map(|g| beta_eval(delta, phi, zeta, &Word::generator(g)))
        .collect::<Result<Vec<_>>>()?;
    RepSpec::new(
        zeta.group().clone(),
        zeta.decomposition().clone(),
        images,
        Structure::BlockDiagonal,
    )
}
