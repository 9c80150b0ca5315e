//! The deformation domain as an outer polytope approximation: linear
//! constraints harvested from enumerated conjugacy classes, plus LP-based
//! polytope queries (feasibility, redundancy, Chebyshev center,
//! boundedness, vertices, Monte Carlo volume) and the finite-sidedness
//! convergence experiment.
//!
//! Parameter space is `hom(F_n, D)` with one copy of the deformation
//! space per generator. Coordinates are reduced by eliminating the last
//! nonzero-block component through the weighted zero-sum relation; the
//! reduced basis is part of every exported polytope so results are
//! reproducible.

mod simplex;

pub use simplex::{maximize, LpResult, LpStatus, LP_TOL};

use crate::blocks::{block_diagonalize, Decomposition, DeformVector, RepSpec};
use crate::certify::{certified_config, certify, CertReport, Thresholds};
use crate::configs::{nonempty_pairs, EigConfig, ThetaSet};
use crate::scalar::Field;
use crate::spectra::{eigen_magnitudes, Spectrum};
use crate::words::{enumerate_classes, ClassRep};
use crate::{exec, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

/// Membership tolerance for the outer approximation.
pub const CONTAINS_TOL: f64 = 1e-10;

/// Which class and index pair generated a half-space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub word: String,
    /// Block indices (0-based) of the dominant and dominated factor.
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

/// One linear constraint `coeffs . x < bound` in reduced coordinates.
///
/// Constraints generated from a certified representation always have a
/// strictly positive bound.
#[derive(Clone, Debug, Serialize)]
pub struct HalfSpace {
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub provenance: Option<Provenance>,
    pub class_length: usize,
}

impl HalfSpace {
    pub fn new(coeffs: Vec<f64>, bound: f64) -> Self {
        HalfSpace {
            coeffs,
            bound,
            provenance: None,
            class_length: 0,
        }
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.coeffs.iter().zip(point).map(|(a, x)| a * x).sum()
    }
}

fn canonical_bits(v: f64) -> u64 {
    // collapse -0.0 onto 0.0 so bit-level keys are stable
    if v == 0.0 {
        0.0f64.to_bits()
    } else {
        v.to_bits()
    }
}

fn coeff_key(h: &HalfSpace) -> Vec<u64> {
    h.coeffs.iter().map(|&v| canonical_bits(v)).collect()
}

/// Reduced coordinates on `hom(F_n, D)`: per generator, one coordinate
/// for every nonzero block except the eliminated last one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedBasis {
    dims: Vec<usize>,
    /// Nonzero blocks keeping a coordinate, in order.
    kept: Vec<usize>,
    /// The eliminated nonzero block.
    eliminated: usize,
    rank: usize,
}

impl ReducedBasis {
    pub fn new(dec: &Decomposition, rank: usize) -> Self {
        let nonzero = dec.nonzero_blocks();
        let (&eliminated, kept) = nonzero
            .split_last()
            .expect("decomposition has positive total dimension");
        ReducedBasis {
            dims: dec.dims().to_vec(),
            kept: kept.to_vec(),
            eliminated,
            rank,
        }
    }

    pub fn reduced_dim(&self) -> usize {
        self.rank * self.kept.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kept_blocks(&self) -> &[usize] {
        &self.kept
    }

    pub fn eliminated_block(&self) -> usize {
        self.eliminated
    }

    /// Reduced-coordinate weights of the full component `phi_block`.
    fn block_weights(&self, block: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.kept.len()];
        if block == self.eliminated {
            for (pos, &l) in self.kept.iter().enumerate() {
                w[pos] = -(self.dims[l] as f64) / self.dims[self.eliminated] as f64;
            }
        } else if let Some(pos) = self.kept.iter().position(|&l| l == block) {
            w[pos] = 1.0;
        }
        w
    }

    /// Expands a reduced point into one deformation vector per generator.
    pub fn phi_from_point(&self, dec: &Decomposition, point: &[f64]) -> Result<Vec<DeformVector>> {
        if point.len() != self.reduced_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.reduced_dim(),
                got: point.len(),
            });
        }
        let stride = self.kept.len();
        (0..self.rank)
            .map(|g| {
                let mut x = vec![0.0; self.dims.len()];
                let mut weighted = 0.0;
                for (pos, &l) in self.kept.iter().enumerate() {
                    let v = point[g * stride + pos];
                    x[l] = v;
                    weighted += self.dims[l] as f64 * v;
                }
                x[self.eliminated] = -weighted / self.dims[self.eliminated] as f64;
                DeformVector::new(dec, x)
            })
            .collect()
    }

    /// Reads the reduced coordinates off per-generator deformations.
    pub fn point_from_phi(&self, phis: &[DeformVector]) -> Result<Vec<f64>> {
        if phis.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                got: phis.len(),
            });
        }
        let stride = self.kept.len();
        let mut point = vec![0.0; self.reduced_dim()];
        for (g, phi) in phis.iter().enumerate() {
            for (pos, &l) in self.kept.iter().enumerate() {
                point[g * stride + pos] = phi.component(l);
            }
        }
        Ok(point)
    }
}

/// Outer polytope approximation of the deformation domain at a given
/// enumeration depth.
#[derive(Clone, Debug, Serialize)]
pub struct DomainApprox {
    pub max_len: usize,
    pub theta: Vec<usize>,
    pub basis: ReducedBasis,
    /// Canonically sorted, deduplicated (minimal bound per direction).
    pub halfspaces: Vec<HalfSpace>,
    /// Constraint count per provenance class length.
    pub counts_by_length: BTreeMap<usize, usize>,
}

impl DomainApprox {
    pub fn reduced_dim(&self) -> usize {
        self.basis.reduced_dim()
    }

    /// `1 - max_i (coeffs_i . x / bound_i)`; positive inside, negative
    /// outside, infinite when there are no constraints.
    pub fn margin(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.reduced_dim(), "dimension mismatch");
        let mut worst = f64::INFINITY;
        for h in &self.halfspaces {
            worst = worst.min(1.0 - h.eval(point) / h.bound);
        }
        worst
    }

    /// Membership in the outer approximation (so `false` is conclusive,
    /// `true` is not).
    pub fn contains(&self, point: &[f64]) -> bool {
        self.margin(point) > -CONTAINS_TOL
    }
}

/// Emits the half-space family of one class: for each `k` and ordered
/// pair `(i, j)` of distinct blocks with `q_ik > 0`, `q_jk < dim U_j`,
/// the constraint `sum_g ab_g (x_gj - x_gi) < log ratio`.
fn class_constraints<S: Field>(
    rep: &RepSpec<S>,
    config: &EigConfig,
    basis: &ReducedBasis,
    class: &ClassRep,
) -> Result<Vec<HalfSpace>> {
    let dec = rep.decomposition();
    let theta = config.theta();
    let matrix = rep.evaluate(&class.word)?;
    let diagonal = block_diagonalize(&matrix, dec)?;
    let block_spectra = (0..dec.factor_count())
        .map(|j| eigen_magnitudes(&dec.block_of(&diagonal, j)))
        .collect::<Result<Vec<Spectrum>>>()?;
    let ab = class.word.abelianize(rep.group().rank());
    let stride = basis.kept_blocks().len();
    let mut out = Vec::new();
    for k in theta.iter() {
        for (i, j) in nonempty_pairs(config, k)? {
            if i == j {
                // tautology: left side vanishes against a positive bound
                continue;
            }
            let qi = config.q(i, k)?;
            let qj = config.q(j, k)?;
            let top = block_spectra[i].lambda(qi);
            let bottom = block_spectra[j].magnitudes()[qj];
            let bound = (top / bottom).ln();
            if !(bound > 0.0) {
                return Err(Error::NonPositiveBound {
                    word: rep.group().format_word(&class.word),
                    i,
                    j,
                    k,
                    bound,
                });
            }
            let wi = basis.block_weights(i);
            let wj = basis.block_weights(j);
            let mut coeffs = vec![0.0; basis.reduced_dim()];
            for (g, &n) in ab.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                for pos in 0..stride {
                    coeffs[g * stride + pos] += n as f64 * (wj[pos] - wi[pos]);
                }
            }
            if coeffs.iter().all(|&c| c == 0.0) {
                continue;
            }
            out.push(HalfSpace {
                coeffs,
                bound,
                provenance: Some(Provenance {
                    word: rep.group().format_word(&class.word),
                    i,
                    j,
                    k,
                }),
                class_length: class.length(),
            });
        }
    }
    Ok(out)
}

/// Constraint family over all primitive classes of length `<= max_len`,
/// for a block-structured representation with known configuration.
/// Duplicate directions keep the minimal bound; output is canonically
/// sorted. Powers of primitive classes are provably redundant and never
/// enumerated.
pub fn constraints_with_config<S: Field>(
    rep: &RepSpec<S>,
    config: &EigConfig,
    max_len: usize,
) -> Result<Vec<HalfSpace>> {
    if !rep.structure().is_block_structured() {
        return Err(Error::StructureMismatch {
            declared: rep.structure().as_str().to_string(),
            reason: "constraint generation needs a block-structured representation".into(),
        });
    }
    if rep.decomposition() != config.decomposition() {
        return Err(Error::DimensionMismatch {
            expected: rep.decomposition().total(),
            got: config.decomposition().total(),
        });
    }
    let basis = ReducedBasis::new(rep.decomposition(), rep.group().rank());
    let classes: Vec<ClassRep> = enumerate_classes(rep.group(), max_len)
        .filter(|c| c.is_primitive())
        .collect();
    let per_class = exec::map_collect(&classes, |class| {
        class_constraints(rep, config, &basis, class)
    });
    let mut all = Vec::new();
    for r in per_class {
        all.extend(r?);
    }
    // canonical order, then minimal bound per identical coefficient vector
    all.sort_by(|a, b| {
        coeff_key(a)
            .cmp(&coeff_key(b))
            .then(a.bound.partial_cmp(&b.bound).unwrap())
            .then_with(|| {
                let wa = a.provenance.as_ref().map(|p| p.word.as_str()).unwrap_or("");
                let wb = b.provenance.as_ref().map(|p| p.word.as_str()).unwrap_or("");
                wa.cmp(wb)
            })
    });
    all.dedup_by(|next, kept| coeff_key(next) == coeff_key(kept));
    Ok(all)
}

/// Certifies `zeta` and, on a positive verdict, harvests the constraint
/// family of its configuration.
pub fn constraints<S: Field>(
    zeta: &RepSpec<S>,
    theta: &ThetaSet,
    max_len: usize,
    thresholds: &Thresholds,
) -> Result<(DomainApprox, CertReport)> {
    let report = certify(zeta, theta, max_len, thresholds)?;
    let config = certified_config(&report).map_err(|_| {
        Error::HypothesisFailed(format!(
            "base representation is not certified at theta {:?} up to length {max_len}: verdict {:?}, witness {:?}",
            theta.members(),
            report.verdict,
            report.witness
        ))
    })?;
    let halfspaces = constraints_with_config(zeta, config, max_len)?;
    let mut counts_by_length = BTreeMap::new();
    for h in &halfspaces {
        *counts_by_length.entry(h.class_length).or_insert(0) += 1;
    }
    let basis = ReducedBasis::new(zeta.decomposition(), zeta.group().rank());
    Ok((
        DomainApprox {
            max_len,
            theta: theta.members().to_vec(),
            basis,
            halfspaces,
            counts_by_length,
        },
        report,
    ))
}

fn rows_of(halfspaces: &[HalfSpace]) -> Vec<(Vec<f64>, f64)> {
    halfspaces
        .iter()
        .map(|h| (h.coeffs.clone(), h.bound))
        .collect()
}

/// Drops constraints whose removal does not change the feasible region:
/// one LP per constraint against all the others, redundant iff the
/// optimum stays below `bound - 1e-9`.
pub fn remove_redundant(halfspaces: &[HalfSpace], dim: usize) -> Result<Vec<HalfSpace>> {
    let feasibility = maximize(&vec![0.0; dim], &rows_of(halfspaces))?;
    if feasibility.status == LpStatus::Infeasible {
        return Err(Error::Infeasible);
    }
    // exact duplicates would certify each other as redundant
    let mut seen: Vec<(Vec<u64>, u64)> = Vec::new();
    let mut unique: Vec<&HalfSpace> = Vec::new();
    for h in halfspaces {
        let key = (coeff_key(h), canonical_bits(h.bound));
        if !seen.contains(&key) {
            seen.push(key);
            unique.push(h);
        }
    }
    let indices: Vec<usize> = (0..unique.len()).collect();
    let verdicts = exec::map_collect(&indices, |&idx| -> Result<bool> {
        let h = unique[idx];
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(unique.len());
        for (other_idx, other) in unique.iter().enumerate() {
            if other_idx == idx {
                // relaxed copy keeps the objective bounded
                rows.push((other.coeffs.clone(), other.bound + 1.0));
            } else {
                rows.push((other.coeffs.clone(), other.bound));
            }
        }
        debug_assert_eq!(h.coeffs.len(), dim);
        let lp = maximize(&h.coeffs, &rows)?;
        match lp.status {
            LpStatus::Optimal => Ok(lp.value < h.bound - 1e-9),
            LpStatus::Unbounded => Ok(false),
            LpStatus::Infeasible => Err(Error::Infeasible),
        }
    });
    let mut kept = Vec::new();
    for (h, verdict) in unique.into_iter().zip(verdicts) {
        if !verdict? {
            kept.push(h.clone());
        }
    }
    Ok(kept)
}

/// Center and radius of the largest inscribed ball, by the usual
/// slack-maximization LP.
pub fn chebyshev_center(halfspaces: &[HalfSpace], dim: usize) -> Result<(Vec<f64>, f64)> {
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(halfspaces.len() + 1);
    for h in halfspaces {
        let norm = h.eval(&h.coeffs).sqrt();
        let mut coeffs = h.coeffs.clone();
        coeffs.push(norm);
        rows.push((coeffs, h.bound));
    }
    // the radius variable is nonnegative
    let mut r_row = vec![0.0; dim + 1];
    r_row[dim] = -1.0;
    rows.push((r_row, 0.0));
    let mut objective = vec![0.0; dim + 1];
    objective[dim] = 1.0;
    let lp = maximize(&objective, &rows)?;
    match lp.status {
        LpStatus::Optimal => Ok((lp.point[..dim].to_vec(), lp.value)),
        LpStatus::Unbounded => Err(Error::UnboundedProgram),
        LpStatus::Infeasible => Err(Error::Infeasible),
    }
}

/// Boundedness via LPs along every signed coordinate direction.
pub fn is_bounded(halfspaces: &[HalfSpace], dim: usize) -> Result<bool> {
    let rows = rows_of(halfspaces);
    for coord in 0..dim {
        for sign in [1.0, -1.0] {
            let mut objective = vec![0.0; dim];
            objective[coord] = sign;
            let lp = maximize(&objective, &rows)?;
            match lp.status {
                LpStatus::Unbounded => return Ok(false),
                LpStatus::Infeasible => return Ok(true),
                LpStatus::Optimal => {}
            }
        }
    }
    Ok(true)
}

/// Vertex enumeration by exhaustive basis selection; supported for
/// reduced dimension at most 3.
pub fn vertices(halfspaces: &[HalfSpace], dim: usize) -> Result<Vec<Vec<f64>>> {
    if dim > 3 {
        return Err(Error::UnsupportedDimension { max: 3, got: dim });
    }
    if dim == 0 {
        return Ok(vec![Vec::new()]);
    }
    let n = halfspaces.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut choice = vec![0usize; dim];
    enumerate_subsets(n, dim, 0, 0, &mut choice, &mut |subset| {
        let mut mat = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = nalgebra::DVector::<f64>::zeros(dim);
        for (r, &idx) in subset.iter().enumerate() {
            for c in 0..dim {
                mat[(r, c)] = halfspaces[idx].coeffs[c];
            }
            rhs[r] = halfspaces[idx].bound;
        }
        let Some(sol) = nalgebra::linalg::LU::new(mat).solve(&rhs) else {
            return;
        };
        let point: Vec<f64> = sol.iter().copied().collect();
        if !point.iter().all(|v| v.is_finite()) {
            return;
        }
        if halfspaces.iter().all(|h| h.eval(&point) <= h.bound + 1e-7) {
            let duplicate = out.iter().any(|p| {
                p.iter()
                    .zip(&point)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    < 1e-7
            });
            if !duplicate {
                out.push(point);
            }
        }
    });
    out.sort_by(|a, b| {
        let ka: Vec<u64> = a.iter().map(|v| canonical_bits(*v)).collect();
        let kb: Vec<u64> = b.iter().map(|v| canonical_bits(*v)).collect();
        ka.cmp(&kb)
    });
    Ok(out)
}

fn enumerate_subsets(
    n: usize,
    size: usize,
    start: usize,
    filled: usize,
    choice: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if size == 0 {
        visit(&choice[..filled]);
        return;
    }
    for idx in start..n {
        choice[filled] = idx;
        enumerate_subsets(n, size - 1, idx + 1, filled + 1, choice, visit);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeEstimate {
    pub volume: f64,
    pub std_error: f64,
    pub samples: usize,
    pub hits: usize,
    pub box_low: Vec<f64>,
    pub box_high: Vec<f64>,
}

/// Rejection sampling inside the coordinate bounding box, deterministic
/// under the seed (and under any thread count: fixed-size chunks carry
/// derived seeds).
pub fn mc_volume(
    halfspaces: &[HalfSpace],
    dim: usize,
    samples: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    if dim == 0 || samples == 0 {
        return Err(Error::InvalidParameter(
            "volume needs a positive dimension and sample count".into(),
        ));
    }
    let rows = rows_of(halfspaces);
    let mut box_low = vec![0.0; dim];
    let mut box_high = vec![0.0; dim];
    for coord in 0..dim {
        for sign in [1.0f64, -1.0] {
            let mut objective = vec![0.0; dim];
            objective[coord] = sign;
            let lp = maximize(&objective, &rows)?;
            match lp.status {
                LpStatus::Optimal => {
                    if sign > 0.0 {
                        box_high[coord] = lp.point[coord];
                    } else {
                        box_low[coord] = lp.point[coord];
                    }
                }
                LpStatus::Unbounded => return Err(Error::UnboundedProgram),
                LpStatus::Infeasible => {
                    return Ok(VolumeEstimate {
                        volume: 0.0,
                        std_error: 0.0,
                        samples,
                        hits: 0,
                        box_low: vec![0.0; dim],
                        box_high: vec![0.0; dim],
                    })
                }
            }
        }
    }
    let box_volume: f64 = box_low
        .iter()
        .zip(&box_high)
        .map(|(lo, hi)| (hi - lo).max(0.0))
        .product();

    const CHUNK: usize = 8192;
    let chunks = samples.div_ceil(CHUNK);
    let hit_counts = exec::map_range(chunks, |chunk| {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed ^ (chunk as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let this_chunk = CHUNK.min(samples - chunk * CHUNK);
        let mut hits = 0usize;
        let mut point = vec![0.0f64; dim];
        for _ in 0..this_chunk {
            for (coord, p) in point.iter_mut().enumerate() {
                let u: f64 = rng.random();
                *p = box_low[coord] + u * (box_high[coord] - box_low[coord]);
            }
            if halfspaces.iter().all(|h| h.eval(&point) <= h.bound) {
                hits += 1;
            }
        }
        hits
    });
    let hits: usize = hit_counts.iter().sum();
    let p = hits as f64 / samples as f64;
    Ok(VolumeEstimate {
        volume: box_volume * p,
        std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        hits,
        box_low,
        box_high,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceEntry {
    pub max_len: usize,
    pub constraint_count: usize,
    pub irredundant_count: usize,
    /// Provenance words of the irredundant constraints, sorted.
    pub irredundant_words: Vec<String>,
    pub bounded: bool,
    pub chebyshev_center: Option<Vec<f64>>,
    pub chebyshev_radius: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub min_len: usize,
    pub max_len: usize,
    pub entries: Vec<ConvergenceEntry>,
    /// The irredundant set is unchanged over the top third of the range.
    pub stabilized: bool,
    /// Fewer than three lengths: stability is trivial, not evidence.
    pub insufficient_data: bool,
}

/// Re-runs constraint harvesting at every length in the range and tracks
/// the irredundant active set.
pub fn convergence_experiment<S: Field>(
    zeta: &RepSpec<S>,
    theta: &ThetaSet,
    min_len: usize,
    max_len: usize,
    thresholds: &Thresholds,
) -> Result<ConvergenceReport> {
    if min_len < 1 || min_len > max_len {
        return Err(Error::InvalidParameter(
            "convergence range must satisfy 1 <= min_len <= max_len".into(),
        ));
    }
    let report = certify(zeta, theta, max_len.max(2), thresholds)?;
    let config = certified_config(&report)?.clone();
    let dim = ReducedBasis::new(zeta.decomposition(), zeta.group().rank()).reduced_dim();

    let mut entries = Vec::new();
    let mut active_keys: Vec<Vec<(Vec<u64>, u64)>> = Vec::new();
    for len in min_len..=max_len {
        let halfspaces = constraints_with_config(zeta, &config, len)?;
        let irredundant = remove_redundant(&halfspaces, dim)?;
        let mut words: Vec<String> = irredundant
            .iter()
            .filter_map(|h| h.provenance.as_ref().map(|p| p.word.clone()))
            .collect();
        words.sort();
        words.dedup();
        let bounded = is_bounded(&irredundant, dim)?;
        let (center, radius) = if bounded {
            let (c, r) = chebyshev_center(&irredundant, dim)?;
            (Some(c), Some(r))
        } else {
            (None, None)
        };
        active_keys.push(
            irredundant
                .iter()
                .map(|h| (coeff_key(h), canonical_bits(h.bound)))
                .collect(),
        );
        entries.push(ConvergenceEntry {
            max_len: len,
            constraint_count: halfspaces.len(),
            irredundant_count: irredundant.len(),
            irredundant_words: words,
            bounded,
            chebyshev_center: center,
            chebyshev_radius: radius,
        });
    }

    let count = entries.len();
    let band = (count / 3).max(1);
    let tail = &active_keys[count - band..];
    let stabilized = tail.windows(2).all(|w| w[0] == w[1]);
    Ok(ConvergenceReport {
        min_len,
        max_len,
        entries,
        stabilized,
        insufficient_data: count < 3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::Structure;
    use crate::words::FreeGroup;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn square() -> Vec<HalfSpace> {
        vec![
            HalfSpace::new(vec![1.0, 0.0], 1.0),
            HalfSpace::new(vec![-1.0, 0.0], 1.0),
            HalfSpace::new(vec![0.0, 1.0], 1.0),
            HalfSpace::new(vec![0.0, -1.0], 1.0),
        ]
    }

    #[test]
    fn redundant_slab_member_is_dropped() {
        let mut hs = vec![
            HalfSpace::new(vec![1.0], 1.0),
            HalfSpace::new(vec![-1.0], 1.0),
            HalfSpace::new(vec![1.0], 2.0),
        ];
        let kept = remove_redundant(&hs, 1).unwrap();
        assert_eq!(kept.len(), 2);
        assert!(kept.iter().all(|h| h.bound == 1.0));
        // exact duplicates are not mutually destroyed
        hs.push(HalfSpace::new(vec![-1.0], 1.0));
        let kept = remove_redundant(&hs, 1).unwrap();
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn chebyshev_center_of_square() {
        let (center, radius) = chebyshev_center(&square(), 2).unwrap();
        assert_relative_eq!(radius, 1.0, epsilon = 1e-8);
        assert!(center.iter().all(|c| c.abs() < 1e-8));
    }

    #[test]
    fn volume_of_square() {
        let est = mc_volume(&square(), 2, 200_000, 7).unwrap();
        assert!((est.volume - 4.0).abs() < 5.0 * est.std_error.max(0.01));
        // deterministic under the seed
        let again = mc_volume(&square(), 2, 200_000, 7).unwrap();
        assert_eq!(est.hits, again.hits);
    }

    #[test]
    fn half_space_alone_is_unbounded() {
        let hs = vec![HalfSpace::new(vec![1.0], 1.0)];
        assert!(!is_bounded(&hs, 1).unwrap());
        assert!(is_bounded(&square(), 2).unwrap());
        assert!(matches!(
            chebyshev_center(&hs, 1),
            Err(Error::UnboundedProgram)
        ));
    }

    #[test]
    fn infeasible_system_is_reported() {
        let hs = vec![
            HalfSpace::new(vec![1.0], -2.0),
            HalfSpace::new(vec![-1.0], 1.0),
        ];
        assert!(matches!(remove_redundant(&hs, 1), Err(Error::Infeasible)));
        assert!(matches!(chebyshev_center(&hs, 1), Err(Error::Infeasible)));
    }

    #[test]
    fn vertices_of_square() {
        let vs = vertices(&square(), 2).unwrap();
        assert_eq!(vs.len(), 4);
        for v in &vs {
            assert_relative_eq!(v[0].abs(), 1.0, epsilon = 1e-9);
            assert_relative_eq!(v[1].abs(), 1.0, epsilon = 1e-9);
        }
        assert!(matches!(
            vertices(&square(), 4),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    fn worked_zeta() -> RepSpec<f64> {
        let group = FreeGroup::new(2).unwrap();
        let dec = Decomposition::new(vec![2, 1]).unwrap();
        let za = DMatrix::from_row_slice(
            3,
            3,
            &[3.0, 0.0, 0.0, 0.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 1.0],
        );
        let zb = DMatrix::from_row_slice(
            3,
            3,
            &[
                5.0 / 3.0,
                4.0 / 3.0,
                0.0,
                4.0 / 3.0,
                5.0 / 3.0,
                0.0,
                0.0,
                0.0,
                1.0,
            ],
        );
        RepSpec::new(group, dec, vec![za, zb], Structure::BlockNormalized).unwrap()
    }

    #[test]
    fn worked_example_constraints_form_slabs() {
        let zeta = worked_zeta();
        let theta = ThetaSet::new(3, [1, 2]).unwrap();
        let thr = Thresholds::default();
        let (domain, report) = constraints(&zeta, &theta, 2, &thr).unwrap();
        assert_eq!(report.verdict, crate::certify::Verdict::PlausiblyAnosov);
        assert_eq!(domain.reduced_dim(), 2);
        // L = 2: directions +-3*(1,0), (0,1), (1,1), (1,-1): 8 half-spaces
        assert_eq!(domain.halfspaces.len(), 8);
        let axis: Vec<&HalfSpace> = domain
            .halfspaces
            .iter()
            .filter(|h| h.coeffs == vec![3.0, 0.0] || h.coeffs == vec![-3.0, 0.0])
            .collect();
        assert_eq!(axis.len(), 2);
        for h in axis {
            assert_relative_eq!(h.bound, 3f64.ln(), epsilon = 1e-12);
        }
        assert!(domain.contains(&[0.0, 0.0]));
        assert!(domain.margin(&[0.0, 0.0]) > 0.99);
        // boundary crossing along the first axis
        let edge = 3f64.ln() / 3.0;
        assert!(domain.contains(&[edge - 1e-6, 0.0]));
        assert!(!domain.contains(&[2.0 * edge, 0.0]));
    }

    #[test]
    fn bounded_from_the_first_length() {
        let zeta = worked_zeta();
        let theta = ThetaSet::new(3, [1, 2]).unwrap();
        let thr = Thresholds::default();
        let report = certify(&zeta, &theta, 4, &thr).unwrap();
        let config = certified_config(&report).unwrap();
        for len in 1..=4usize {
            let hs = constraints_with_config(&zeta, config, len).unwrap();
            assert!(is_bounded(&hs, 2).unwrap(), "unbounded at length {len}");
        }
    }

    #[test]
    fn chebyshev_radius_of_worked_example() {
        let zeta = worked_zeta();
        let theta = ThetaSet::new(3, [1, 2]).unwrap();
        let (domain, _) = constraints(&zeta, &theta, 4, &Thresholds::default()).unwrap();
        let (_, radius) = chebyshev_center(&domain.halfspaces, 2).unwrap();
        // the generator slabs pin the inscribed ball at log(3)/3
        assert_relative_eq!(radius, 3f64.ln() / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn convergence_experiment_tracks_the_active_set() {
        let zeta = worked_zeta();
        let theta = ThetaSet::new(3, [1, 2]).unwrap();
        let report = convergence_experiment(&zeta, &theta, 1, 6, &Thresholds::default()).unwrap();
        assert_eq!(report.entries.len(), 6);
        assert!(!report.insufficient_data);
        assert!(report.entries.iter().all(|e| e.bounded));
        // Every new length contributes fresh irredundant directions for
        // this representation: the active set keeps refining, so no
        // stabilization is (honestly) reported.
        let counts: Vec<usize> = report.entries.iter().map(|e| e.irredundant_count).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
        assert!(counts[5] > counts[0]);
        assert!(!report.stabilized);
        // the generator classes stay active throughout
        for e in &report.entries {
            assert!(e
                .irredundant_words
                .iter()
                .any(|w| w == "a" || w == "A"));
        }
        // chebyshev radius is pinned by the generator slabs at every length
        for e in &report.entries {
            assert_relative_eq!(e.chebyshev_radius.unwrap(), 3f64.ln() / 3.0, epsilon = 1e-6);
        }

        let tiny = convergence_experiment(&zeta, &theta, 3, 3, &Thresholds::default()).unwrap();
        assert!(tiny.stabilized);
        assert!(tiny.insufficient_data);
    }

    #[test]
    fn zero_is_always_inside() {
        let zeta = worked_zeta();
        let theta = ThetaSet::new(3, [1, 2]).unwrap();
        for len in [2usize, 4] {
            let (domain, _) = constraints(&zeta, &theta, len, &Thresholds::default()).unwrap();
            assert!(domain.contains(&vec![0.0; domain.reduced_dim()]));
        }
    }

    #[test]
    fn reduced_basis_round_trip() {
        let dec = Decomposition::new(vec![2, 1]).unwrap();
        let basis = ReducedBasis::new(&dec, 2);
        assert_eq!(basis.reduced_dim(), 2);
        let point = vec![0.25, -0.5];
        let phis = basis.phi_from_point(&dec, &point).unwrap();
        assert_eq!(phis.len(), 2);
        assert_relative_eq!(phis[0].component(0), 0.25);
        assert_relative_eq!(phis[0].component(1), -0.5, epsilon = 1e-12);
        assert_eq!(basis.point_from_phi(&phis).unwrap(), point);
    }

    #[test]
    fn single_block_domain_is_a_point() {
        let group = FreeGroup::new(2).unwrap();
        let dec = Decomposition::new(vec![2]).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let b = DMatrix::from_row_slice(2, 2, &[2.5, 1.5, 1.5, 1.3]);
        let b = crate::blocks::normalize(&b).unwrap();
        let zeta = RepSpec::new(group, dec, vec![a, b], Structure::BlockNormalized).unwrap();
        let theta = ThetaSet::new(2, [1]).unwrap();
        let (domain, _) = constraints(&zeta, &theta, 3, &Thresholds::default()).unwrap();
        assert_eq!(domain.reduced_dim(), 0);
        assert!(domain.halfspaces.is_empty());
        assert!(domain.contains(&[]));
    }

    #[test]
    fn rescaled_base_shifts_bounds_affinely() {
        let zeta = worked_zeta();
        let dec = zeta.decomposition().clone();
        let theta = ThetaSet::new(3, [1, 2]).unwrap();
        let thr = Thresholds::default();
        let report = certify(&zeta, &theta, 3, &thr).unwrap();
        let config = certified_config(&report).unwrap();
        let base = constraints_with_config(&zeta, config, 3).unwrap();

        let psi = [
            DeformVector::new(&dec, vec![0.05, -0.1]).unwrap(),
            DeformVector::new(&dec, vec![-0.02, 0.04]).unwrap(),
        ];
        let deformed = crate::blocks::beta_rep(&[0.0, 0.0], &psi, &zeta).unwrap();
        let shifted = constraints_with_config(&deformed, config, 3).unwrap();
        assert_eq!(base.len(), shifted.len());
        let basis = ReducedBasis::new(&dec, 2);
        let psi_point = basis.point_from_phi(&psi).unwrap();
        for (b, s) in base.iter().zip(shifted.iter()) {
            assert_eq!(coeff_key(b), coeff_key(s));
            // new bound = old bound - coeffs . psi
            assert_relative_eq!(s.bound, b.bound - b.eval(&psi_point), epsilon = 1e-9);
        }
    }
}