//! Empirical certification of the gap-growth condition: per-class gap
//! samples over enumerated primitive conjugacy classes, configuration
//! consistency, and aggregated verdicts.
//!
//! Certification is necessarily heuristic (the defining condition
//! quantifies over the whole group), so `plausibly_anosov` is a verdict
//! about a finite sample, never a proof. `not_anosov` is definitive when
//! witnessed by a non-proximal class or by two classes with different
//! configurations.

use crate::blocks::{block_diagonalize, RepSpec};
use crate::configs::{
    block_thetas, config_from_block_spectra, half_bound_check, merge_block_spectra, EigConfig,
    ThetaSet,
};
use crate::scalar::Field;
use crate::spectra::{eigen_magnitudes, Spectrum};
use crate::words::{enumerate_classes, ClassRep};
use crate::{exec, Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;

/// Tunable thresholds, echoed verbatim into every report.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Thresholds {
    /// Relative magnitude-gap tolerance below which a sample counts as
    /// non-proximal.
    pub proximality_tol: f64,
    /// Minimal gap/length ratio demanded on the top length band.
    pub ratio_floor: f64,
    /// Fraction of the length range forming the top band.
    pub top_band_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            proximality_tol: 1e-9,
            ratio_floor: 0.05,
            top_band_fraction: 1.0 / 3.0,
        }
    }
}

impl Thresholds {
    /// Smallest length inside the top band for range `1..=max_len`.
    pub fn band_min_len(&self, max_len: usize) -> usize {
        let band = ((max_len as f64) * self.top_band_fraction).floor() as usize;
        (max_len + 1).saturating_sub(band.max(1)).min(max_len)
    }
}

/// Configuration outcome on one sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConfigOutcome {
    Config(EigConfig),
    NonProximal { k: usize },
    TieAmbiguous { k: usize },
}

/// Gap data for one primitive conjugacy class.
#[derive(Clone, Debug)]
pub struct GapSample {
    pub class: ClassRep,
    pub length: usize,
    /// Logarithmic gaps at every `k` in theta.
    pub gaps: BTreeMap<usize, f64>,
    /// First `k` in theta at which the magnitude gap is within tolerance.
    pub nonproximal_k: Option<usize>,
    /// Present for block-structured representations.
    pub config: Option<ConfigOutcome>,
    /// Per-block magnitude lists, for blockwise verdicts.
    pub block_magnitudes: Option<Vec<Vec<f64>>>,
}

/// A class whose eigensolve failed; does not abort the stream.
#[derive(Clone, Debug, Serialize)]
pub struct SampleFailure {
    pub word: String,
    pub length: usize,
    pub message: String,
}

pub type SampleResult = std::result::Result<GapSample, SampleFailure>;

/// One gap sample per primitive conjugacy class of length `<= max_len`,
/// in deterministic order (length, then canonical word). Evaluation uses
/// the cyclically reduced representative; eigenvalue magnitudes are class
/// functions, so the choice within the class does not matter.
pub fn gap_series<S: Field>(
    rep: &RepSpec<S>,
    theta: &ThetaSet,
    max_len: usize,
    thresholds: &Thresholds,
) -> Result<Vec<SampleResult>> {
    if theta.ambient_dim() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            got: theta.ambient_dim(),
        });
    }
    if max_len < 1 {
        return Err(Error::InvalidParameter("max_len must be at least 1".into()));
    }
    let classes: Vec<ClassRep> = enumerate_classes(rep.group(), max_len)
        .filter(|c| c.is_primitive())
        .collect();
    Ok(exec::map_collect(&classes, |class| {
        sample_class(rep, theta, thresholds, class)
    }))
}

fn sample_class<S: Field>(
    rep: &RepSpec<S>,
    theta: &ThetaSet,
    thresholds: &Thresholds,
    class: &ClassRep,
) -> SampleResult {
    let fail = |e: Error| SampleFailure {
        word: rep.group().format_word(&class.word),
        length: class.length(),
        message: e.to_string(),
    };
    let matrix = rep.evaluate(&class.word).map_err(fail)?;
    let dec = rep.decomposition();

    let (spectrum, config, block_magnitudes) = if rep.structure().is_block_structured() {
        let diagonal = block_diagonalize(&matrix, dec).map_err(fail)?;
        let block_spectra = (0..dec.factor_count())
            .map(|j| eigen_magnitudes(&dec.block_of(&diagonal, j)))
            .collect::<Result<Vec<Spectrum>>>()
            .map_err(fail)?;
        let config =
            match config_from_block_spectra(&block_spectra, dec, theta, thresholds.proximality_tol)
            {
                Ok(c) => ConfigOutcome::Config(c),
                Err(Error::NotProximal { k }) => ConfigOutcome::NonProximal { k },
                Err(Error::TieAmbiguous { k }) => ConfigOutcome::TieAmbiguous { k },
                Err(e) => return Err(fail(e)),
            };
        let mags = block_spectra
            .iter()
            .map(|s| s.magnitudes().to_vec())
            .collect();
        (
            merge_block_spectra(&block_spectra),
            Some(config),
            Some(mags),
        )
    } else {
        (eigen_magnitudes(&matrix).map_err(fail)?, None, None)
    };

    let mags = spectrum.magnitudes();
    let scale = mags.first().copied().unwrap_or(0.0);
    let mut gaps = BTreeMap::new();
    let mut nonproximal_k = None;
    for k in theta.iter() {
        if mags[k] <= 0.0 {
            return Err(fail(Error::SingularGap { k }));
        }
        gaps.insert(k, (mags[k - 1] / mags[k]).ln());
        if nonproximal_k.is_none() && mags[k - 1] - mags[k] <= thresholds.proximality_tol * scale {
            nonproximal_k = Some(k);
        }
    }

    Ok(GapSample {
        length: class.length(),
        class: class.clone(),
        gaps,
        nonproximal_k,
        config,
        block_magnitudes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PlausiblyAnosov,
    NotAnosov,
    Inconclusive,
}

/// Definitive evidence behind a `not_anosov` verdict.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    NonProximal { word: String, k: usize },
    ConfigMismatch { word_a: String, word_b: String },
}

/// Per-`k` aggregate statistics of the gap series.
#[derive(Clone, Debug, Serialize)]
pub struct KStats {
    pub k: usize,
    /// Minimum gap/length ratio over all samples.
    pub min_ratio: f64,
    /// Minimum gap/length ratio over the top length band.
    pub band_min_ratio: f64,
    /// Least-squares fit of min-gap-per-length against length.
    pub slope: f64,
    pub intercept: f64,
    /// Class attaining the minimal ratio.
    pub worst_word: String,
    /// Minimum gap at each length.
    pub min_gap_by_length: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockVerdict {
    pub block: usize,
    pub theta: Vec<usize>,
    pub verdict: Verdict,
    pub per_k: Vec<KStats>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertReport {
    pub theta: Vec<usize>,
    pub ambient_dim: usize,
    pub max_len: usize,
    pub thresholds: Thresholds,
    pub sample_count: usize,
    pub failures: Vec<SampleFailure>,
    pub per_k: Vec<KStats>,
    pub config_consistent: bool,
    pub unique_config: Option<EigConfig>,
    /// Half-dimension sanity gate on the shared configuration.
    pub half_bound_ok: Option<bool>,
    pub block_verdicts: Vec<BlockVerdict>,
    pub witness: Option<Witness>,
    pub verdict: Verdict,
}

/// Least-squares line through `(x, y)`; slope 0 for fewer than two
/// distinct abscissae.
fn fit_line(points: &[(usize, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    if points.len() < 2 {
        return (0.0, points.first().map_or(0.0, |p| p.1));
    }
    let mean_x = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let var: f64 = points.iter().map(|p| (p.0 as f64 - mean_x).powi(2)).sum();
    if var == 0.0 {
        return (0.0, mean_y);
    }
    let cov: f64 = points
        .iter()
        .map(|p| (p.0 as f64 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = cov / var;
    (slope, mean_y - slope * mean_x)
}

/// Aggregates one gap map per sample into per-`k` statistics plus the
/// growth verdict (configuration concerns are handled by the caller).
fn growth_stats(
    ks: &[usize],
    samples: &[(&str, usize, &BTreeMap<usize, f64>)],
    max_len: usize,
    thresholds: &Thresholds,
) -> (Vec<KStats>, bool) {
    let band_min_len = thresholds.band_min_len(max_len);
    let mut stats = Vec::new();
    let mut growth_ok = true;
    for &k in ks {
        let mut min_ratio = f64::INFINITY;
        let mut band_min_ratio = f64::INFINITY;
        let mut worst_word = String::new();
        let mut by_length: BTreeMap<usize, f64> = BTreeMap::new();
        for (word, length, gaps) in samples {
            let Some(&gap) = gaps.get(&k) else { continue };
            let ratio = gap / *length as f64;
            if ratio < min_ratio {
                min_ratio = ratio;
                worst_word = word.to_string();
            }
            if *length >= band_min_len {
                band_min_ratio = band_min_ratio.min(ratio);
            }
            let entry = by_length.entry(*length).or_insert(f64::INFINITY);
            *entry = entry.min(gap);
        }
        let min_gap_by_length: Vec<(usize, f64)> = by_length.into_iter().collect();
        let (slope, intercept) = fit_line(&min_gap_by_length);
        if !(band_min_ratio.is_finite() && band_min_ratio >= thresholds.ratio_floor && slope > 0.0)
        {
            growth_ok = false;
        }
        stats.push(KStats {
            k,
            min_ratio,
            band_min_ratio,
            slope,
            intercept,
            worst_word,
            min_gap_by_length,
        });
    }
    (stats, growth_ok)
}

/// Builds the report from an already computed gap series.
pub fn certify_from_series<S: Field>(
    rep: &RepSpec<S>,
    theta: &ThetaSet,
    max_len: usize,
    thresholds: &Thresholds,
    series: &[SampleResult],
) -> Result<CertReport> {
    if max_len < 2 {
        return Err(Error::InvalidParameter(
            "certification needs max_len >= 2".into(),
        ));
    }
    let group = rep.group();
    let samples: Vec<&GapSample> = series.iter().filter_map(|r| r.as_ref().ok()).collect();
    let failures: Vec<SampleFailure> = series
        .iter()
        .filter_map(|r| r.as_ref().err().cloned())
        .collect();
    let names: Vec<String> = samples
        .iter()
        .map(|s| group.format_word(&s.class.word))
        .collect();

    let mut witness = None;

    // Definitive negative: a non-proximal infinite-order class.
    for (s, name) in samples.iter().zip(&names) {
        if let Some(k) = s.nonproximal_k {
            witness = Some(Witness::NonProximal {
                word: name.clone(),
                k,
            });
            break;
        }
    }

    // Definitive negative: two classes with different configurations.
    let mut config_consistent = true;
    let mut unique_config: Option<EigConfig> = None;
    if rep.structure().is_block_structured() {
        let mut first_word = "";
        for (s, name) in samples.iter().zip(&names) {
            if let Some(ConfigOutcome::Config(c)) = &s.config {
                match &unique_config {
                    None => {
                        unique_config = Some(c.clone());
                        first_word = name;
                    }
                    Some(expected) if expected != c => {
                        config_consistent = false;
                        if witness.is_none() {
                            witness = Some(Witness::ConfigMismatch {
                                word_a: first_word.to_string(),
                                word_b: name.clone(),
                            });
                        }
                        break;
                    }
                    Some(_) => {}
                }
            }
        }
    }

    let tuples: Vec<(&str, usize, &BTreeMap<usize, f64>)> = samples
        .iter()
        .zip(&names)
        .map(|(s, n)| (n.as_str(), s.length, &s.gaps))
        .collect();
    let (per_k, growth_ok) = growth_stats(theta.members(), &tuples, max_len, thresholds);

    let verdict = if witness.is_some() {
        Verdict::NotAnosov
    } else if samples.is_empty() || !failures.is_empty() {
        Verdict::Inconclusive
    } else if theta.is_empty() {
        // The empty-signature condition is vacuous.
        Verdict::PlausiblyAnosov
    } else if growth_ok && config_consistent {
        Verdict::PlausiblyAnosov
    } else {
        Verdict::Inconclusive
    };

    let half_bound_ok = unique_config.as_ref().map(half_bound_check);

    // Blockwise verdicts through the per-block signatures of the shared
    // configuration.
    let mut block_verdicts = Vec::new();
    if let Some(config) = &unique_config {
        for (block, block_theta) in block_thetas(config).into_iter().enumerate() {
            if block_theta.is_empty() {
                continue;
            }
            block_verdicts.push(block_verdict(
                block,
                &block_theta,
                &samples,
                &names,
                max_len,
                thresholds,
            ));
        }
    }

    Ok(CertReport {
        theta: theta.members().to_vec(),
        ambient_dim: theta.ambient_dim(),
        max_len,
        thresholds: *thresholds,
        sample_count: samples.len(),
        failures,
        per_k,
        config_consistent,
        unique_config,
        half_bound_ok,
        block_verdicts,
        witness,
        verdict,
    })
}

fn block_verdict(
    block: usize,
    block_theta: &ThetaSet,
    samples: &[&GapSample],
    names: &[String],
    max_len: usize,
    thresholds: &Thresholds,
) -> BlockVerdict {
    let mut gap_maps: Vec<BTreeMap<usize, f64>> = Vec::with_capacity(samples.len());
    for s in samples {
        let Some(mags) = s.block_magnitudes.as_ref().map(|m| &m[block]) else {
            return BlockVerdict {
                block,
                theta: block_theta.members().to_vec(),
                verdict: Verdict::Inconclusive,
                per_k: Vec::new(),
            };
        };
        let mut gaps = BTreeMap::new();
        for q in block_theta.iter() {
            if mags[q] > 0.0 {
                gaps.insert(q, (mags[q - 1] / mags[q]).ln());
            }
        }
        gap_maps.push(gaps);
    }
    let tuples: Vec<(&str, usize, &BTreeMap<usize, f64>)> = gap_maps
        .iter()
        .zip(samples.iter())
        .zip(names.iter())
        .map(|((gaps, s), n)| (n.as_str(), s.length, gaps))
        .collect();
    let (per_k, growth_ok) = growth_stats(block_theta.members(), &tuples, max_len, thresholds);
    BlockVerdict {
        block,
        theta: block_theta.members().to_vec(),
        verdict: if growth_ok {
            Verdict::PlausiblyAnosov
        } else {
            Verdict::Inconclusive
        },
        per_k,
    }
}

/// Runs the gap series and aggregates it into a verdict report.
pub fn certify<S: Field>(
    rep: &RepSpec<S>,
    theta: &ThetaSet,
    max_len: usize,
    thresholds: &Thresholds,
) -> Result<CertReport> {
    if max_len < 2 {
        return Err(Error::InvalidParameter(
            "certification needs max_len >= 2".into(),
        ));
    }
    let series = gap_series(rep, theta, max_len, thresholds)?;
    certify_from_series(rep, theta, max_len, thresholds, &series)
}

/// Certifies at `theta` and at its opposition image and reports whether
/// the verdicts agree. They always should.
pub fn involution_crosscheck<S: Field>(
    rep: &RepSpec<S>,
    theta: &ThetaSet,
    max_len: usize,
    thresholds: &Thresholds,
) -> Result<bool> {
    let lhs = certify(rep, theta, max_len, thresholds)?;
    let rhs = certify(rep, &theta.iota_set(), max_len, thresholds)?;
    Ok(lhs.verdict == rhs.verdict)
}

/// The shared configuration of a report with a positive verdict.
pub fn certified_config(report: &CertReport) -> Result<&EigConfig> {
    if report.verdict != Verdict::PlausiblyAnosov {
        return Err(Error::HypothesisFailed(format!(
            "verdict is {:?}, expected plausibly_anosov",
            report.verdict
        )));
    }
    report.unique_config.as_ref().ok_or_else(|| {
        Error::HypothesisFailed(
            "no shared configuration (representation is not block structured)".into(),
        )
    })
}
