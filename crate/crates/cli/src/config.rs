//! Representation config files.
//!
//! ```json
//! {
//!   "group": { "rank": 2, "generators": ["a", "b"] },
//!   "decomposition": { "dims": [2, 1], "basis": null },
//!   "scalar_field": "real",
//!   "structure": "block_normalized",
//!   "images": {
//!     "a": ["3", "0", "0", "0", "1/3", "0", "0", "0", "1"],
//!     "b": ["5/3", "4/3", "0", "4/3", "5/3", "0", "0", "0", "1"]
//!   }
//! }
//! ```
//!
//! Matrix entries are row-major and may be JSON numbers, decimal strings,
//! exact rationals `"p/q"`, or (for the complex field) strings like
//! `"1.5-2i"`. Rationals are evaluated in binary floating point. The
//! optional `basis` matrix is applied as a change of basis
//! (`B^-1 A B`) at load time, before the declared structure is verified.

use anosov_core::blocks::{Decomposition, RepSpec, Structure};
use anosov_core::scalar::Field;
use anosov_core::words::FreeGroup;
use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSection {
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionSection {
    pub dims: Vec<usize>,
    /// Optional row-major change-of-basis matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<serde_json::Value>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepConfigFile {
    pub group: GroupSection,
    pub decomposition: DecompositionSection,
    pub scalar_field: String,
    pub structure: String,
    pub images: BTreeMap<String, Vec<serde_json::Value>>,
}

/// A loaded representation over either scalar field.
#[derive(Debug)]
pub enum LoadedRep {
    Real(RepSpec<f64>),
    Complex(RepSpec<Complex<f64>>),
}

impl LoadedRep {
    pub fn group(&self) -> &FreeGroup {
        match self {
            LoadedRep::Real(r) => r.group(),
            LoadedRep::Complex(r) => r.group(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LoadedRep::Real(r) => r.dim(),
            LoadedRep::Complex(r) => r.dim(),
        }
    }

    pub fn structure(&self) -> Structure {
        match self {
            LoadedRep::Real(r) => r.structure(),
            LoadedRep::Complex(r) => r.structure(),
        }
    }
}

pub fn parse_structure(tag: &str) -> Result<Structure> {
    Ok(match tag {
        "general" => Structure::General,
        "upper_triangular" => Structure::UpperTriangular,
        "block_diagonal" => Structure::BlockDiagonal,
        "block_normalized" => Structure::BlockNormalized,
        other => bail!("unknown structure tag `{other}`"),
    })
}

/// Parses a real scalar: JSON number, decimal string, or rational "p/q".
pub fn parse_real(value: &serde_json::Value) -> Result<f64> {
    match value {
        serde_json::Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| anyhow!("non-finite number {n}")),
        serde_json::Value::String(s) => parse_real_str(s),
        other => bail!("matrix entry must be a number or string, got {other}"),
    }
}

fn parse_real_str(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num: f64 = p
            .trim()
            .parse()
            .with_context(|| format!("bad rational numerator `{p}`"))?;
        let den: f64 = q
            .trim()
            .parse()
            .with_context(|| format!("bad rational denominator `{q}`"))?;
        if den == 0.0 {
            bail!("rational `{s}` has zero denominator");
        }
        return Ok(num / den);
    }
    s.parse()
        .with_context(|| format!("cannot parse entry `{s}` as a decimal"))
}

/// Parses a complex scalar: everything `parse_real` accepts, plus
/// `"a+bi"`, `"a-bi"`, `"bi"`, `"i"`, `"-i"`.
pub fn parse_complex(value: &serde_json::Value) -> Result<Complex<f64>> {
    if let serde_json::Value::Number(_) = value {
        return Ok(Complex::new(parse_real(value)?, 0.0));
    }
    let serde_json::Value::String(raw) = value else {
        bail!("matrix entry must be a number or string, got {value}");
    };
    let s = raw.trim();
    if !s.ends_with('i') {
        return Ok(Complex::new(parse_real_str(s)?, 0.0));
    }
    let body = &s[..s.len() - 1];
    // split the imaginary part off at the last top-level +/- sign
    let split = body
        .char_indices()
        .rev()
        .find(|&(pos, c)| {
            (c == '+' || c == '-')
                && pos > 0
                && !matches!(body.as_bytes()[pos - 1], b'e' | b'E' | b'/')
        })
        .map(|(pos, _)| pos);
    let (re_part, im_part) = match split {
        Some(pos) => (&body[..pos], &body[pos..]),
        None => ("", body),
    };
    let re = if re_part.is_empty() {
        0.0
    } else {
        parse_real_str(re_part)?
    };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => parse_real_str(other)?,
    };
    Ok(Complex::new(re, im))
}

pub fn format_complex(z: Complex<f64>) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im >= 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}{}i", z.re, z.im)
    }
}

fn matrix_from_entries<S: Field>(
    entries: &[serde_json::Value],
    d: usize,
    parse: &impl Fn(&serde_json::Value) -> Result<S>,
    what: &str,
) -> Result<DMatrix<S>> {
    if entries.len() != d * d {
        bail!(
            "{what}: expected {d}x{d} = {} row-major entries, got {}",
            d * d,
            entries.len()
        );
    }
    let mut m = DMatrix::<S>::zeros(d, d);
    for (idx, value) in entries.iter().enumerate() {
        m[(idx / d, idx % d)] = parse(value)
            .with_context(|| format!("{what}: entry {} (row {}, col {})", idx, idx / d, idx % d))?;
    }
    Ok(m)
}

fn build_rep<S: Field>(
    file: &RepConfigFile,
    group: FreeGroup,
    dec: Decomposition,
    structure: Structure,
    parse: impl Fn(&serde_json::Value) -> Result<S>,
) -> Result<RepSpec<S>> {
    let d = dec.total();
    let basis = file
        .decomposition
        .basis
        .as_ref()
        .map(|entries| matrix_from_entries(entries, d, &parse, "basis"))
        .transpose()?;
    let basis_inv = basis
        .as_ref()
        .map(|b| {
            b.clone()
                .try_inverse()
                .ok_or_else(|| anyhow!("basis matrix is singular"))
        })
        .transpose()?;

    let mut images = Vec::with_capacity(group.rank());
    for name in group.generator_names() {
        let entries = file
            .images
            .get(name)
            .ok_or_else(|| anyhow!("missing image for generator `{name}`"))?;
        let mut m = matrix_from_entries(entries, d, &parse, &format!("image of `{name}`"))?;
        if let (Some(b), Some(b_inv)) = (&basis, &basis_inv) {
            m = b_inv * m * b;
        }
        images.push(m);
    }
    for name in file.images.keys() {
        if !group.generator_names().contains(name) {
            bail!("image for unknown generator `{name}`");
        }
    }
    RepSpec::new(group, dec, images, structure)
        .map_err(|e| anyhow!("representation rejected: {e}"))
}

pub fn load_rep(file: &RepConfigFile) -> Result<LoadedRep> {
    let group = match &file.group.generators {
        Some(names) => {
            if names.len() != file.group.rank {
                bail!(
                    "rank {} disagrees with {} generator names",
                    file.group.rank,
                    names.len()
                );
            }
            FreeGroup::with_names(names.clone())?
        }
        None => FreeGroup::new(file.group.rank)?,
    };
    let dec = Decomposition::new(file.decomposition.dims.clone())?;
    let structure = parse_structure(&file.structure)?;
    match file.scalar_field.as_str() {
        "real" => Ok(LoadedRep::Real(build_rep(
            file, group, dec, structure, parse_real,
        )?)),
        "complex" => Ok(LoadedRep::Complex(build_rep(
            file,
            group,
            dec,
            structure,
            parse_complex,
        )?)),
        other => bail!("scalar_field must be \"real\" or \"complex\", got `{other}`"),
    }
}

pub fn read_config(path: &std::path::Path) -> Result<(RepConfigFile, Vec<u8>)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let file: RepConfigFile = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing {} as a representation config", path.display()))?;
    Ok((file, bytes))
}
