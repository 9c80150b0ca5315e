//! Command-line surface: validation, certification, configuration
//! queries, domain polytopes, convergence experiments and slices.
//!
//! Exit codes: 0 = computed, 2 = computed with a `not_anosov` verdict,
//! 1 = could not compute (bad input, failed hypothesis, I/O).

use anosov_cli::{config, manifest, output};

use anosov_core::blocks::{psi_inverse, RepSpec, Structure};
use anosov_core::certify::{
    certify_from_series, gap_series, CertReport, SampleResult, Thresholds, Verdict,
};
use anosov_core::configs::{large_config, EigConfig, ThetaSet};
use anosov_core::domain::{
    constraints_with_config, convergence_experiment, remove_redundant, vertices,
    ConvergenceReport, DomainApprox, HalfSpace, ReducedBasis,
};
use anosov_core::scalar::Field;
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{format_complex, read_config, LoadedRep};
use manifest::RunManifest;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "anosov",
    version,
    about = "Eigenvalue-gap certification and deformation domains for block-structured representations of free groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ThresholdArgs {
    /// Relative eigenvalue-gap tolerance for proximality.
    #[arg(long, default_value_t = 1e-9)]
    proximality_tol: f64,
    /// Minimal gap/length ratio on the top length band.
    #[arg(long, default_value_t = 0.05)]
    ratio_floor: f64,
    /// Fraction of the length range forming the top band.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    top_band_fraction: f64,
}

impl ThresholdArgs {
    fn to_thresholds(self) -> Thresholds {
        Thresholds {
            proximality_tol: self.proximality_tol,
            ratio_floor: self.ratio_floor,
            top_band_fraction: self.top_band_fraction,
        }
    }

    fn stamp(&self, manifest: RunManifest) -> RunManifest {
        manifest
            .with("proximality_tol", self.proximality_tol)
            .with("ratio_floor", self.ratio_floor)
            .with("top_band_fraction", self.top_band_fraction)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load a representation config and verify its declared structure.
    Validate { config: PathBuf },
    /// Run the gap-growth certification over enumerated classes.
    Certify {
        config: PathBuf,
        /// Comma-separated gap indices, e.g. "1,2".
        #[arg(long)]
        theta: String,
        /// Enumerate conjugacy classes up to this length.
        #[arg(long)]
        max_len: usize,
        /// Report file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional gap-series CSV (word, length, k, gap).
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Large eigenvalue configuration of a single word.
    Eigconfig {
        config: PathBuf,
        /// Word like "a b A b" (uppercase = inverse).
        #[arg(long)]
        word: String,
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 1e-9)]
        proximality_tol: f64,
    },
    /// Outer polytope approximation of the deformation domain.
    Domain {
        config: PathBuf,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also prune redundant half-spaces (slower; keeps provenance).
        #[arg(long)]
        irredundant: bool,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Track the irredundant constraint set over a length range.
    Converge {
        config: PathBuf,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        min_len: usize,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Export a 2-plane slice of an exported polytope as polygon CSV.
    Slice {
        poly: PathBuf,
        /// Two reduced coordinates, e.g. "0,1"; the rest are fixed at 0.
        #[arg(long)]
        plane: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Factor each generator image into scale, deformation and normalized
    /// parts; writes the block-normalized config plus the extracted data.
    NormalizeRep {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn parse_theta(text: &str, d: usize) -> Result<ThetaSet> {
    let members = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .with_context(|| format!("bad theta member `{t}`"))
        })
        .collect::<Result<Vec<usize>>>()?;
    if members.is_empty() {
        bail!("theta must contain at least one index");
    }
    Ok(ThetaSet::new(d, members)?)
}

macro_rules! with_rep {
    ($loaded:expr, |$rep:ident| $body:expr) => {
        match &$loaded {
            LoadedRep::Real($rep) => $body,
            LoadedRep::Complex($rep) => $body,
        }
    };
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => cmd_validate(&config),
        Command::Certify {
            config,
            theta,
            max_len,
            out,
            csv,
            thresholds,
        } => cmd_certify(
            &config,
            &theta,
            max_len,
            out.as_deref(),
            csv.as_deref(),
            thresholds,
        ),
        Command::Eigconfig {
            config,
            word,
            theta,
            proximality_tol,
        } => cmd_eigconfig(&config, &word, &theta, proximality_tol),
        Command::Domain {
            config,
            theta,
            max_len,
            out,
            irredundant,
            thresholds,
        } => cmd_domain(
            &config,
            &theta,
            max_len,
            out.as_deref(),
            irredundant,
            thresholds,
        ),
        Command::Converge {
            config,
            theta,
            min_len,
            max_len,
            out,
            thresholds,
        } => cmd_converge(&config, &theta, min_len, max_len, out.as_deref(), thresholds),
        Command::Slice { poly, plane, out } => cmd_slice(&poly, &plane, &out),
        Command::NormalizeRep { config, out } => cmd_normalize_rep(&config, &out),
    }
}

#[derive(Serialize)]
struct ValidateOutput {
    manifest: RunManifest,
    scalar_field: String,
    structure: String,
    rank: usize,
    dims: Vec<usize>,
    ambient_dim: usize,
    status: String,
}

fn cmd_validate(path: &Path) -> Result<u8> {
    let (file, bytes) = read_config(path)?;
    let rep = config::load_rep(&file)?;
    let payload = ValidateOutput {
        manifest: RunManifest::new("validate", &bytes),
        scalar_field: file.scalar_field.clone(),
        structure: rep.structure().as_str().to_string(),
        rank: rep.group().rank(),
        dims: file.decomposition.dims.clone(),
        ambient_dim: rep.dim(),
        status: "ok".to_string(),
    };
    output::write_json(None, &payload)?;
    Ok(0)
}

#[derive(Serialize)]
struct CertifyOutput {
    manifest: RunManifest,
    report: CertReport,
}

fn run_certify<S: Field>(
    rep: &RepSpec<S>,
    theta: &ThetaSet,
    max_len: usize,
    thresholds: &Thresholds,
) -> Result<(CertReport, Vec<SampleResult>)> {
    let series = gap_series(rep, theta, max_len, thresholds)?;
    let report = certify_from_series(rep, theta, max_len, thresholds, &series)?;
    Ok((report, series))
}

fn cmd_certify(
    path: &Path,
    theta_text: &str,
    max_len: usize,
    out: Option<&Path>,
    csv: Option<&Path>,
    thresholds: ThresholdArgs,
) -> Result<u8> {
    let (file, bytes) = read_config(path)?;
    let loaded = config::load_rep(&file)?;
    let theta = parse_theta(theta_text, loaded.dim())?;
    let thr = thresholds.to_thresholds();
    let (report, series) = with_rep!(loaded, |rep| run_certify(rep, &theta, max_len, &thr))?;
    let manifest = thresholds.stamp(
        RunManifest::new("certify", &bytes)
            .with("theta", theta_text)
            .with("max_len", max_len),
    );
    if let Some(csv_path) = csv {
        output::write_gap_series_csv(csv_path, &manifest, loaded.group(), &series)?;
    }
    let verdict = report.verdict;
    output::write_json(out, &CertifyOutput { manifest, report })?;
    Ok(if verdict == Verdict::NotAnosov { 2 } else { 0 })
}

#[derive(Serialize)]
struct EigconfigOutput {
    manifest: RunManifest,
    word: String,
    config: EigConfig,
}

fn cmd_eigconfig(path: &Path, word_text: &str, theta_text: &str, tol: f64) -> Result<u8> {
    let (file, bytes) = read_config(path)?;
    let loaded = config::load_rep(&file)?;
    let theta = parse_theta(theta_text, loaded.dim())?;
    let word = loaded.group().parse_word(word_text)?;
    let config = with_rep!(loaded, |rep| {
        let matrix = rep.evaluate(&word)?;
        large_config(&matrix, rep.decomposition(), &theta, tol)
    })?;
    let payload = EigconfigOutput {
        manifest: RunManifest::new("eigconfig", &bytes)
            .with("word", word_text)
            .with("theta", theta_text)
            .with("proximality_tol", tol),
        word: loaded.group().format_word(&word),
        config,
    };
    output::write_json(None, &payload)?;
    Ok(0)
}

#[derive(Serialize)]
struct DomainOutput {
    manifest: RunManifest,
    reduced_dim: usize,
    certification: CertReport,
    domain: DomainApprox,
}

fn build_domain<S: Field>(
    rep: &RepSpec<S>,
    theta: &ThetaSet,
    max_len: usize,
    thr: &Thresholds,
    irredundant: bool,
) -> Result<(CertReport, Option<DomainApprox>)> {
    let (report, _) = run_certify(rep, theta, max_len, thr)?;
    if report.verdict != Verdict::PlausiblyAnosov {
        return Ok((report, None));
    }
    let config = report
        .unique_config
        .as_ref()
        .ok_or_else(|| anyhow!("certified representation has no configuration table"))?;
    let mut halfspaces = constraints_with_config(rep, config, max_len)?;
    let basis = ReducedBasis::new(rep.decomposition(), rep.group().rank());
    if irredundant {
        halfspaces = remove_redundant(&halfspaces, basis.reduced_dim())?;
    }
    let mut counts_by_length = BTreeMap::new();
    for h in &halfspaces {
        *counts_by_length.entry(h.class_length).or_insert(0usize) += 1;
    }
    let domain = DomainApprox {
        max_len,
        theta: theta.members().to_vec(),
        basis,
        halfspaces,
        counts_by_length,
    };
    Ok((report, Some(domain)))
}

fn cmd_domain(
    path: &Path,
    theta_text: &str,
    max_len: usize,
    out: Option<&Path>,
    irredundant: bool,
    thresholds: ThresholdArgs,
) -> Result<u8> {
    let (file, bytes) = read_config(path)?;
    let loaded = config::load_rep(&file)?;
    if loaded.structure() != Structure::BlockNormalized {
        bail!(
            "domain computation requires structure = block_normalized (got `{}`); run `anosov normalize-rep` first",
            loaded.structure().as_str()
        );
    }
    let theta = parse_theta(theta_text, loaded.dim())?;
    let thr = thresholds.to_thresholds();
    let (report, domain) = with_rep!(loaded, |rep| build_domain(
        rep,
        &theta,
        max_len,
        &thr,
        irredundant
    ))?;
    let Some(domain) = domain else {
        eprintln!(
            "certification hypothesis failed: verdict {:?}, witness {:?}",
            report.verdict, report.witness
        );
        return Ok(if report.verdict == Verdict::NotAnosov {
            2
        } else {
            1
        });
    };
    let manifest = thresholds.stamp(
        RunManifest::new("domain", &bytes)
            .with("theta", theta_text)
            .with("max_len", max_len)
            .with("irredundant", irredundant),
    );
    output::write_json(
        out,
        &DomainOutput {
            manifest,
            reduced_dim: domain.reduced_dim(),
            certification: report,
            domain,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct ConvergeOutput {
    manifest: RunManifest,
    report: ConvergenceReport,
}

fn cmd_converge(
    path: &Path,
    theta_text: &str,
    min_len: usize,
    max_len: usize,
    out: Option<&Path>,
    thresholds: ThresholdArgs,
) -> Result<u8> {
    let (file, bytes) = read_config(path)?;
    let loaded = config::load_rep(&file)?;
    if loaded.structure() != Structure::BlockNormalized {
        bail!(
            "convergence experiment requires structure = block_normalized (got `{}`)",
            loaded.structure().as_str()
        );
    }
    let theta = parse_theta(theta_text, loaded.dim())?;
    let thr = thresholds.to_thresholds();
    let report = with_rep!(loaded, |rep| convergence_experiment(
        rep, &theta, min_len, max_len, &thr
    ))?;
    let manifest = thresholds.stamp(
        RunManifest::new("converge", &bytes)
            .with("theta", theta_text)
            .with("min_len", min_len)
            .with("max_len", max_len),
    );
    output::write_json(out, &ConvergeOutput { manifest, report })?;
    Ok(0)
}

#[derive(Deserialize)]
struct PolytopeFileHalfSpace {
    coeffs: Vec<f64>,
    bound: f64,
}

#[derive(Deserialize)]
struct PolytopeFileDomain {
    halfspaces: Vec<PolytopeFileHalfSpace>,
}

#[derive(Deserialize)]
struct PolytopeFile {
    domain: PolytopeFileDomain,
}

fn cmd_slice(poly_path: &Path, plane_text: &str, out: &Path) -> Result<u8> {
    let bytes =
        std::fs::read(poly_path).with_context(|| format!("reading {}", poly_path.display()))?;
    let poly: PolytopeFile = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing {} as a polytope export", poly_path.display()))?;
    let coords = plane_text
        .split(',')
        .map(|t| t.trim().parse::<usize>().context("bad plane coordinate"))
        .collect::<Result<Vec<usize>>>()?;
    let [cx, cy] = coords[..] else {
        bail!("--plane needs exactly two coordinates, e.g. \"0,1\"");
    };
    if cx == cy {
        bail!("--plane coordinates must be distinct");
    }
    let mut sliced = Vec::new();
    for h in &poly.domain.halfspaces {
        if cx.max(cy) >= h.coeffs.len() {
            bail!(
                "plane coordinate out of range: polytope has reduced dimension {}",
                h.coeffs.len()
            );
        }
        let coeffs = vec![h.coeffs[cx], h.coeffs[cy]];
        if coeffs.iter().all(|&c| c == 0.0) {
            if h.bound <= 0.0 {
                bail!(
                    "slice is empty: a constraint restricts to 0 < {}",
                    h.bound
                );
            }
            continue;
        }
        sliced.push(HalfSpace::new(coeffs, h.bound));
    }
    let mut verts = vertices(&sliced, 2)?;
    // counterclockwise polygon order around the centroid
    let n = verts.len().max(1) as f64;
    let cx0: f64 = verts.iter().map(|v| v[0]).sum::<f64>() / n;
    let cy0: f64 = verts.iter().map(|v| v[1]).sum::<f64>() / n;
    verts.sort_by(|a, b| {
        let ang_a = (a[1] - cy0).atan2(a[0] - cx0);
        let ang_b = (b[1] - cy0).atan2(b[0] - cx0);
        ang_a.partial_cmp(&ang_b).unwrap()
    });
    let manifest = RunManifest::new("slice", &bytes).with("plane", plane_text);
    output::write_polygon_csv(out, &manifest, &verts)?;
    Ok(0)
}

#[derive(Serialize)]
struct NormalizeOutput {
    manifest: RunManifest,
    group: config::GroupSection,
    decomposition: config::DecompositionSection,
    scalar_field: String,
    structure: String,
    images: BTreeMap<String, Vec<serde_json::Value>>,
    /// Per-generator scale exponents of the factorization.
    extracted_delta: BTreeMap<String, f64>,
    /// Per-generator blockwise deformation exponents.
    extracted_phi: BTreeMap<String, Vec<f64>>,
}

fn normalize_images<S: Field>(
    rep: &RepSpec<S>,
    encode: impl Fn(S) -> serde_json::Value,
) -> Result<(
    BTreeMap<String, Vec<serde_json::Value>>,
    BTreeMap<String, f64>,
    BTreeMap<String, Vec<f64>>,
)> {
    let mut images = BTreeMap::new();
    let mut delta = BTreeMap::new();
    let mut phi = BTreeMap::new();
    for (g, name) in rep.group().generator_names().iter().enumerate() {
        let (s, x, b) = psi_inverse(rep.image(g), rep.decomposition())?;
        let assembled = b.assemble();
        let entries: Vec<serde_json::Value> = (0..assembled.nrows())
            .flat_map(|r| (0..assembled.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| encode(assembled[(r, c)]))
            .collect();
        images.insert(name.clone(), entries);
        delta.insert(name.clone(), s);
        phi.insert(name.clone(), x.components().to_vec());
    }
    Ok((images, delta, phi))
}

fn cmd_normalize_rep(path: &Path, out: &Path) -> Result<u8> {
    let (file, bytes) = read_config(path)?;
    let loaded = config::load_rep(&file)?;
    if !loaded.structure().is_block_structured()
        || loaded.structure() == Structure::UpperTriangular
    {
        bail!(
            "normalize-rep factors block diagonal images; structure `{}` is not block diagonal",
            loaded.structure().as_str()
        );
    }
    let (images, extracted_delta, extracted_phi) = match &loaded {
        LoadedRep::Real(rep) => normalize_images(rep, |x| serde_json::json!(x))?,
        LoadedRep::Complex(rep) => {
            normalize_images(rep, |z| serde_json::Value::String(format_complex(z)))?
        }
    };
    let payload = NormalizeOutput {
        manifest: RunManifest::new("normalize-rep", &bytes),
        group: file.group.clone(),
        decomposition: config::DecompositionSection {
            dims: file.decomposition.dims.clone(),
            // images are already in block coordinates after loading
            basis: None,
        },
        scalar_field: file.scalar_field.clone(),
        structure: "block_normalized".to_string(),
        images,
        extracted_delta,
        extracted_phi,
    };
    output::write_json(Some(out), &payload)?;
    Ok(0)
}
