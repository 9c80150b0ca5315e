//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test -- --nocapture`) and enforcing its runtime
//! budget. Random data is seeded, so every run checks identical inputs.

use anosov_cli::config::{load_rep, LoadedRep, RepConfigFile};
use anosov_core::blocks::{
    beta_eval, beta_rep, block_diagonalize, c_conjugation, Decomposition, RepSpec, Structure,
};
use anosov_core::certify::{certify, involution_crosscheck, Thresholds, Verdict};
use anosov_core::configs::{gap_via_config, half_bound_check, ThetaSet};
use anosov_core::domain::{
    constraints_with_config, is_bounded, remove_redundant, HalfSpace, ReducedBasis,
};
use anosov_core::spectra::eigen_magnitudes;
use anosov_core::words::FreeGroup;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::time::Instant;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load_fixture(name: &str) -> RepSpec<f64> {
    let file: RepConfigFile =
        serde_json::from_slice(&std::fs::read(fixture(name)).unwrap()).unwrap();
    match load_rep(&file).unwrap() {
        LoadedRep::Real(rep) => rep,
        LoadedRep::Complex(_) => panic!("fixture {name} should be real"),
    }
}

fn finish(criterion: &str, budget_secs: f64, start: Instant, detail: &str) {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < budget_secs,
        "{criterion} exceeded its budget: {elapsed:.2}s >= {budget_secs}s"
    );
    println!("ACCEPTANCE {criterion}: PASS ({elapsed:.2}s) {detail}");
}

fn random_dims(rng: &mut ChaCha8Rng, parts: usize, total: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = (0..parts - 1).map(|_| rng.random_range(0..=total)).collect();
    cuts.sort_unstable();
    let mut dims = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        dims.push(c - prev);
        prev = c;
    }
    dims.push(total - prev);
    dims
}

fn random_block_upper(rng: &mut ChaCha8Rng, dec: &Decomposition) -> DMatrix<f64> {
    let d = dec.total();
    let mut a = DMatrix::<f64>::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            if dec.block_index_of(r) <= dec.block_index_of(c) {
                a[(r, c)] = rng.random_range(-2.0..2.0);
            }
        }
    }
    a
}

/// Criterion 1: block diagonalization preserves all eigenvalue
/// magnitudes on 1000 random block upper triangular matrices.
#[test]
fn acceptance_c1_spectrum_preservation() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let parts = rng.random_range(1..=3usize);
        let total = rng.random_range(2..=8usize);
        let dec = Decomposition::new(random_dims(&mut rng, parts, total)).unwrap();
        let a = random_block_upper(&mut rng, &dec);
        let b = block_diagonalize(&a, &dec).unwrap();
        let sa = eigen_magnitudes(&a).unwrap();
        let sb = eigen_magnitudes(&b).unwrap();
        let scale = sa.magnitudes().first().copied().unwrap_or(1.0);
        for (x, y) in sa.magnitudes().iter().zip(sb.magnitudes()) {
            let deviation = (x - y).abs() / x.abs().max(1e-9 * scale);
            worst = worst.max(deviation);
        }
    }
    assert!(worst <= 1e-7, "max relative deviation {worst:.3e}");
    finish("criterion 1", 10.0, start, &format!("max deviation {worst:.2e}"));
}

/// Criterion 2: the configuration gap formula equals the direct
/// logarithmic gap on 1000 random proximal block diagonal samples.
#[test]
fn acceptance_c2_gap_formula() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut produced = 0usize;
    let mut worst: f64 = 0.0;
    'outer: while produced < 1000 {
        let parts = rng.random_range(1..=3usize);
        let dims: Vec<usize> = (0..parts).map(|_| rng.random_range(1..=3usize)).collect();
        let total: usize = dims.iter().sum();
        if !(2..=8).contains(&total) {
            continue;
        }
        let dec = Decomposition::new(dims.clone()).unwrap();
        // blocks with exactly known magnitudes via orthogonal conjugation
        let mut assembled = DMatrix::<f64>::zeros(total, total);
        let mut all_mags: Vec<f64> = Vec::new();
        for (j, &dj) in dims.iter().enumerate() {
            let mags: Vec<f64> = (0..dj)
                .map(|_| {
                    let sign = if rng.random_range(0..2) == 0 { 1.0 } else { -1.0 };
                    sign * (rng.random_range(0.25f64.ln()..4f64.ln())).exp()
                })
                .collect();
            let raw = DMatrix::<f64>::from_fn(dj, dj, |_, _| rng.random_range(-1.0..1.0));
            let q = raw.qr().q();
            let block = &q
                * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(mags.clone()))
                * q.transpose();
            let o = dec.offset(j);
            assembled.view_mut((o, o), (dj, dj)).copy_from(&block);
            all_mags.extend(mags.iter().map(|m| m.abs()));
        }
        all_mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut members = Vec::new();
        for k in 1..total {
            if rng.random_range(0..2) == 0 {
                members.push(k);
            }
        }
        if members.is_empty() {
            members.push(rng.random_range(1..total));
        }
        // require a safe margin so both computation routes agree on ranks
        for &k in &members {
            if all_mags[k - 1] - all_mags[k] <= 1e-3 * all_mags[0] {
                continue 'outer;
            }
        }
        let theta = ThetaSet::new(total, members.clone()).unwrap();
        let config =
            anosov_core::configs::large_config(&assembled, &dec, &theta, 1e-9).unwrap();
        let block_spectra: Vec<_> = (0..parts)
            .map(|j| eigen_magnitudes(&dec.block_of(&assembled, j)).unwrap())
            .collect();
        let full = eigen_magnitudes(&assembled).unwrap();
        for &k in &members {
            let via_config = gap_via_config(&block_spectra, &config, k).unwrap();
            let direct = full.log_gap(k).unwrap();
            worst = worst.max((via_config - direct).abs());
        }
        produced += 1;
    }
    assert!(worst <= 1e-9, "max gap deviation {worst:.3e}");
    finish("criterion 2", 5.0, start, &format!("max deviation {worst:.2e}"));
}

/// Criterion 3: the inverse-spectrum identity and agreement of verdicts
/// between theta and its opposition image on all shipped fixtures.
#[test]
fn acceptance_c3_inverse_and_involution() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    let mut produced = 0;
    while produced < 300 {
        let d = rng.random_range(2..=8usize);
        let diag: Vec<f64> = (0..d)
            .map(|_| {
                let sign = if rng.random_range(0..2) == 0 { 1.0 } else { -1.0 };
                sign * rng.random_range(0.5..2.0)
            })
            .collect();
        let p = DMatrix::<f64>::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let svd = p.clone().svd(false, false);
        let smin = svd.singular_values.min();
        let smax = svd.singular_values.max();
        if smin <= 0.0 || smax / smin > 20.0 {
            continue;
        }
        let a = &p
            * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
            * p.clone().try_inverse().unwrap();
        let inv = a.clone().try_inverse().unwrap();
        let sa = eigen_magnitudes(&a).unwrap();
        let si = eigen_magnitudes(&inv).unwrap();
        for k in 1..=d {
            let prod = si.lambda(k) * sa.lambda(d - k + 1);
            worst = worst.max((prod - 1.0).abs());
        }
        produced += 1;
    }
    assert!(worst <= 1e-9, "max inverse-identity deviation {worst:.3e}");

    let thr = Thresholds::default();
    let worked = load_fixture("worked_example.json");
    for members in [vec![1usize], vec![2], vec![1, 2]] {
        let theta = ThetaSet::new(3, members).unwrap();
        assert!(involution_crosscheck(&worked, &theta, 6, &thr).unwrap());
    }
    let trivial = load_fixture("trivial.json");
    let theta = ThetaSet::new(3, [1]).unwrap();
    assert!(involution_crosscheck(&trivial, &theta, 3, &thr).unwrap());
    let parabolic = load_fixture("parabolic.json");
    let theta = ThetaSet::new(2, [1]).unwrap();
    assert!(involution_crosscheck(&parabolic, &theta, 4, &thr).unwrap());

    finish("criterion 3", 10.0, start, &format!("max deviation {worst:.2e}"));
}

/// Criterion 4: conjugation by powers of the block-scalar matrix decays
/// onto the block diagonal at rate at most `exp(-1) + 0.05`.
#[test]
fn acceptance_c4_conjugation_limit() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let budget_rate = (-1.0f64).exp() + 0.05;
    let mut worst_rate: f64 = 0.0;
    let mut produced = 0;
    while produced < 100 {
        let parts = rng.random_range(2..=3usize);
        let dims: Vec<usize> = (0..parts).map(|_| rng.random_range(1..=3usize)).collect();
        let total: usize = dims.iter().sum();
        if total > 8 {
            continue;
        }
        let dec = Decomposition::new(dims).unwrap();
        let a = random_block_upper(&mut rng, &dec);
        let b = block_diagonalize(&a, &dec).unwrap();
        let errs: Vec<f64> = (0..=12u32)
            .map(|n| (c_conjugation(&a, &dec, n).unwrap() - &b).norm())
            .collect();
        if errs[0] < 1e-9 {
            // off-block part happens to vanish; nothing to fit
            continue;
        }
        assert!(errs[12] < errs[0], "no decay: {errs:?}");
        let points: Vec<(usize, f64)> = errs
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 1e-12 * errs[0])
            .map(|(n, &e)| (n, e.ln()))
            .collect();
        let n = points.len() as f64;
        let mean_x = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
        let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
        let var: f64 = points.iter().map(|p| (p.0 as f64 - mean_x).powi(2)).sum();
        let cov: f64 = points
            .iter()
            .map(|p| (p.0 as f64 - mean_x) * (p.1 - mean_y))
            .sum();
        let rate = (cov / var).exp();
        worst_rate = worst_rate.max(rate);
        produced += 1;
    }
    assert!(
        worst_rate <= budget_rate,
        "fitted decay rate {worst_rate:.4} exceeds {budget_rate:.4}"
    );
    finish("criterion 4", 5.0, start, &format!("worst rate {worst_rate:.4}"));
}

/// Criterion 5: the worked example end to end through the binary.
#[test]
fn acceptance_c5_worked_example_end_to_end() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let csv_path = dir.path().join("series.csv");
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_anosov"))
        .args([
            "certify",
            fixture("worked_example.json").to_str().unwrap(),
            "--theta",
            "1,2",
            "--max-len",
            "10",
            "--out",
            report_path.to_str().unwrap(),
            "--csv",
            csv_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report_path).unwrap()).unwrap();
    assert_eq!(report["report"]["verdict"], "plausibly_anosov");
    assert_eq!(report["report"]["half_bound_ok"], true);
    let mut q = std::collections::BTreeMap::new();
    for entry in report["report"]["unique_config"]["table"].as_array().unwrap() {
        q.insert(
            (entry["block"].as_u64().unwrap(), entry["k"].as_u64().unwrap()),
            entry["q"].as_u64().unwrap(),
        );
    }
    assert_eq!(q[&(0, 1)], 1);
    assert_eq!(q[&(1, 1)], 0);
    assert_eq!(q[&(0, 2)], 1);
    assert_eq!(q[&(1, 2)], 1);
    let mut ratios = Vec::new();
    for stats in report["report"]["per_k"].as_array().unwrap() {
        let min_ratio = stats["min_ratio"].as_f64().unwrap();
        assert!(
            min_ratio >= 0.3,
            "k={} min gap ratio {min_ratio} below 0.3",
            stats["k"]
        );
        ratios.push(min_ratio);
    }
    assert!(std::fs::read_to_string(&csv_path)
        .unwrap()
        .lines()
        .any(|l| l.starts_with("\"a\",1,1,")));
    finish(
        "criterion 5",
        60.0,
        start,
        &format!("min gap ratios {ratios:?}"),
    );
}

/// Independent brute-force constraint enumerator for the worked example:
/// classes are enumerated from scratch, the top block is multiplied out
/// as 2x2 matrices and its dominant magnitude comes from the closed-form
/// root of the characteristic polynomial.
fn oracle_constraints(max_len: usize) -> std::collections::BTreeMap<Vec<u64>, f64> {
    type M2 = nalgebra::Matrix2<f64>;
    let za = M2::new(3.0, 0.0, 0.0, 1.0 / 3.0);
    let zb = M2::new(5.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0, 5.0 / 3.0);
    let za_inv = M2::new(1.0 / 3.0, 0.0, 0.0, 3.0);
    let zb_inv = M2::new(5.0 / 3.0, -4.0 / 3.0, -4.0 / 3.0, 5.0 / 3.0);
    // letters 0 = a, 1 = A, 2 = b, 3 = B
    let mats = [za, za_inv, zb, zb_inv];

    let mut classes: Vec<Vec<u8>> = Vec::new();
    let mut seen: std::collections::HashSet<Vec<u8>> = std::collections::HashSet::new();
    fn grow(
        word: &mut Vec<u8>,
        len: usize,
        classes: &mut Vec<Vec<u8>>,
        seen: &mut std::collections::HashSet<Vec<u8>>,
    ) {
        if word.len() == len {
            let first = word[0];
            let last = word[len - 1];
            if (first ^ 1) == last {
                return; // not cyclically reduced
            }
            let canonical = word.clone();
            if seen.contains(&canonical) {
                return;
            }
            // primitive check + mark all rotations
            let mut rotations = Vec::new();
            for r in 0..len {
                let rot: Vec<u8> = word[r..].iter().chain(&word[..r]).copied().collect();
                rotations.push(rot);
            }
            let least = rotations.iter().min().unwrap().clone();
            if least != canonical {
                return; // not the canonical representative
            }
            let period = (1..=len)
                .find(|p| len.is_multiple_of(*p) && rotations[*p % len] == canonical)
                .unwrap();
            for rot in rotations {
                seen.insert(rot);
            }
            if period == len {
                classes.push(canonical);
            }
            return;
        }
        for letter in 0u8..4 {
            if let Some(&prev) = word.last() {
                if (prev ^ 1) == letter {
                    continue;
                }
            }
            word.push(letter);
            grow(word, len, classes, seen);
            word.pop();
        }
    }
    for len in 1..=max_len {
        let mut word = Vec::new();
        grow(&mut word, len, &mut classes, &mut seen);
    }

    let mut oracle: std::collections::BTreeMap<Vec<u64>, f64> = std::collections::BTreeMap::new();
    for class in classes {
        let mut m = M2::identity();
        let mut ab = [0i64; 2];
        for &letter in &class {
            m *= mats[letter as usize];
            let gen = (letter / 2) as usize;
            ab[gen] += if letter % 2 == 0 { 1 } else { -1 };
        }
        if ab == [0, 0] {
            continue;
        }
        // det = 1, so the dominant magnitude solves x^2 - |tr| x + 1 = 0
        let tr = m.trace().abs();
        assert!(tr > 2.0, "non-hyperbolic top block for {class:?}");
        let mu = (tr + (tr * tr - 4.0).sqrt()) / 2.0;
        let bound = mu.ln();
        for sign in [3.0f64, -3.0] {
            let coeffs = [sign * ab[0] as f64, sign * ab[1] as f64];
            let key: Vec<u64> = coeffs
                .iter()
                .map(|&v| if v == 0.0 { 0.0f64.to_bits() } else { v.to_bits() })
                .collect();
            oracle
                .entry(key)
                .and_modify(|b| *b = b.min(bound))
                .or_insert(bound);
        }
    }
    oracle
}

fn halfspace_satisfied(hs: &[HalfSpace], point: &[f64]) -> bool {
    hs.iter().all(|h| h.eval(point) / h.bound < 1.0 + 1e-10)
}

/// Criterion 6: domain membership, boundedness, exact agreement with the
/// brute-force constraint oracle, and outer-approximation monotonicity.
#[test]
fn acceptance_c6_domain_worked_example() {
    let start = Instant::now();
    let zeta = load_fixture("worked_example.json");
    let theta = ThetaSet::new(3, [1, 2]).unwrap();
    let thr = Thresholds::default();
    let report = certify(&zeta, &theta, 8, &thr).unwrap();
    assert_eq!(report.verdict, Verdict::PlausiblyAnosov);
    let config = report.unique_config.as_ref().unwrap();

    let mut per_len: Vec<Vec<HalfSpace>> = Vec::new();
    for len in 1..=8usize {
        let hs = constraints_with_config(&zeta, config, len).unwrap();
        // zero is interior at every enumeration depth
        assert!(hs.iter().all(|h| h.bound > 0.0));
        assert!(halfspace_satisfied(&hs, &[0.0, 0.0]));
        // bounded from the very first length on (derived and locked)
        assert!(is_bounded(&hs, 2).unwrap(), "unbounded at length {len}");
        per_len.push(hs);
    }

    // The brute-force enumerator agrees exactly: identical direction set
    // (bitwise, the coefficients being small integers) and identical
    // bounds. Bound agreement is limited by the eigensolve of the tiny
    // second eigenvalue of the top block, whose relative error scales
    // with lambda_1/lambda_2 <= 3^16 at this depth, hence the 1e-9.
    let oracle = oracle_constraints(8);
    let produced = &per_len[7];
    assert_eq!(produced.len(), oracle.len(), "constraint count mismatch");
    let mut worst_bound_dev: f64 = 0.0;
    for h in produced {
        let key: Vec<u64> = h
            .coeffs
            .iter()
            .map(|&v| if v == 0.0 { 0.0f64.to_bits() } else { v.to_bits() })
            .collect();
        let oracle_bound = oracle
            .get(&key)
            .unwrap_or_else(|| panic!("missing oracle direction {:?}", h.coeffs));
        worst_bound_dev = worst_bound_dev.max((h.bound - oracle_bound).abs());
        assert!(
            (h.bound - oracle_bound).abs() <= 1e-9,
            "bound mismatch for {:?}: {} vs {}",
            h.coeffs,
            h.bound,
            oracle_bound
        );
    }

    // monotonicity of the outer approximations on 1000 points per level
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut inside_counts = [0usize; 8];
    for _ in 0..1000 {
        let point = [
            rng.random_range(-0.6..0.6f64),
            rng.random_range(-0.6..0.6f64),
        ];
        let inside: Vec<bool> = per_len
            .iter()
            .map(|hs| halfspace_satisfied(hs, &point))
            .collect();
        for len in 0..7 {
            assert!(
                !inside[len + 1] || inside[len],
                "monotonicity violated at point {point:?}, length {}",
                len + 1
            );
        }
        for (count, &i) in inside_counts.iter_mut().zip(&inside) {
            *count += i as usize;
        }
    }
    // sanity: the deeper approximations genuinely shrink on this sample
    assert!(inside_counts[7] < inside_counts[0]);
    finish(
        "criterion 6",
        120.0,
        start,
        &format!(
            "|A_8| = {} half-spaces, worst oracle bound deviation {worst_bound_dev:.2e}",
            per_len[7].len()
        ),
    );
}

fn certify_deformation(
    zeta: &RepSpec<f64>,
    basis: &ReducedBasis,
    theta: &ThetaSet,
    point: &[f64],
    max_len: usize,
    thr: &Thresholds,
) -> anosov_core::certify::CertReport {
    let dec = zeta.decomposition().clone();
    let phi = basis.phi_from_point(&dec, point).unwrap();
    let deformed = beta_rep(&[0.0, 0.0], &phi, zeta).unwrap();
    certify(&deformed, theta, max_len, thr).unwrap()
}

/// Criterion 7: convexity surrogate. 50 deterministic pairs of certified
/// deformations; every midpoint certifies with the same configuration.
#[test]
fn acceptance_c7_convexity_surrogate() {
    let start = Instant::now();
    let zeta = load_fixture("worked_example.json");
    let theta = ThetaSet::new(3, [1, 2]).unwrap();
    let thr = Thresholds::default();
    let report = certify(&zeta, &theta, 8, &thr).unwrap();
    let base_config = report.unique_config.clone().unwrap();
    let halfspaces = constraints_with_config(&zeta, &base_config, 8).unwrap();
    let basis = ReducedBasis::new(zeta.decomposition(), 2);

    let margin = |p: &[f64]| {
        halfspaces
            .iter()
            .map(|h| 1.0 - h.eval(p) / h.bound)
            .fold(f64::INFINITY, f64::min)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut points: Vec<[f64; 2]> = Vec::new();
    while points.len() < 100 {
        let candidate = [
            rng.random_range(-0.4..0.4f64),
            rng.random_range(-0.4..0.4f64),
        ];
        if margin(&candidate) >= 0.35 {
            points.push(candidate);
        }
    }

    let mut failures = 0usize;
    for pair in points.chunks(2) {
        let [p0, p1] = pair else { unreachable!() };
        let r0 = certify_deformation(&zeta, &basis, &theta, p0, 8, &thr);
        let r1 = certify_deformation(&zeta, &basis, &theta, p1, 8, &thr);
        assert_eq!(r0.verdict, Verdict::PlausiblyAnosov, "endpoint {p0:?}");
        assert_eq!(r1.verdict, Verdict::PlausiblyAnosov, "endpoint {p1:?}");
        assert_eq!(r0.unique_config.as_ref(), Some(&base_config));
        assert_eq!(r1.unique_config.as_ref(), Some(&base_config));
        let mid = [(p0[0] + p1[0]) / 2.0, (p0[1] + p1[1]) / 2.0];
        let rm = certify_deformation(&zeta, &basis, &theta, &mid, 8, &thr);
        if rm.verdict != Verdict::PlausiblyAnosov
            || rm.unique_config.as_ref() != Some(&base_config)
        {
            failures += 1;
        }
        assert_eq!(rm.half_bound_ok, Some(true));
    }
    assert_eq!(failures, 0, "midpoint certification failures");
    finish("criterion 7", 120.0, start, "50 pairs, zero failures");
}

/// Criterion 8: a point violating one irredundant constraint by 10%
/// fails certification (with a witness), and the commutator fixed-point
/// identity holds for 100 random deformations.
#[test]
fn acceptance_c8_negative_control_and_commutator() {
    let start = Instant::now();
    let zeta = load_fixture("worked_example.json");
    let theta = ThetaSet::new(3, [1, 2]).unwrap();
    let thr = Thresholds::default();
    let report = certify(&zeta, &theta, 8, &thr).unwrap();
    let base_config = report.unique_config.clone().unwrap();
    let halfspaces = constraints_with_config(&zeta, &base_config, 8).unwrap();
    let irredundant = remove_redundant(&halfspaces, 2).unwrap();
    let target = &irredundant[0];

    let norm_sq: f64 = target.coeffs.iter().map(|c| c * c).sum();
    let scale = 1.1 * target.bound / norm_sq;
    let violating: Vec<f64> = target.coeffs.iter().map(|c| c * scale).collect();
    assert!(target.eval(&violating) > target.bound * 1.09);

    let basis = ReducedBasis::new(zeta.decomposition(), 2);
    let verdict = certify_deformation(&zeta, &basis, &theta, &violating, 8, &thr);
    assert!(
        !(verdict.verdict == Verdict::PlausiblyAnosov
            && verdict.unique_config.as_ref() == Some(&base_config)),
        "violating point certified with the base configuration"
    );
    if verdict.verdict == Verdict::NotAnosov {
        let witness = verdict.witness.as_ref().expect("negative verdict has a witness");
        println!("  negative-control witness: {witness:?}");
    }

    // commutator fixed point: 100 random (delta, phi)
    let dec = zeta.decomposition().clone();
    let group = zeta.group().clone();
    let commutator = group.parse_word("a b A B").unwrap();
    let base_value = zeta.evaluate(&commutator).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let delta = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let point = [
            rng.random_range(-1.0..1.0f64),
            rng.random_range(-1.0..1.0f64),
        ];
        let phi = basis.phi_from_point(&dec, &point).unwrap();
        let deformed = beta_eval(&delta, &phi, &zeta, &commutator).unwrap();
        worst = worst.max((deformed - &base_value).norm());
    }
    assert!(worst <= 1e-10, "commutator identity deviation {worst:.3e}");
    finish("criterion 8", 60.0, start, &format!("commutator deviation {worst:.2e}"));
}

/// Criterion 9: every configuration attached to a positive verdict in a
/// sweep of certifications passes the half-dimension gate.
#[test]
fn acceptance_c9_half_bound_gate() {
    let start = Instant::now();
    let zeta = load_fixture("worked_example.json");
    let thr = Thresholds::default();
    let mut positive = 0usize;

    let mut check = |report: &anosov_core::certify::CertReport| {
        if report.verdict == Verdict::PlausiblyAnosov {
            if let Some(config) = &report.unique_config {
                assert!(half_bound_check(config), "half bound violated: {config:?}");
                assert_eq!(report.half_bound_ok, Some(true));
                positive += 1;
            }
        }
    };

    for members in [vec![1usize], vec![2], vec![1, 2]] {
        let theta = ThetaSet::new(3, members).unwrap();
        check(&certify(&zeta, &theta, 6, &thr).unwrap());
    }

    let theta = ThetaSet::new(3, [1, 2]).unwrap();
    let basis = ReducedBasis::new(zeta.decomposition(), 2);
    let dec = zeta.decomposition().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for _ in 0..30 {
        let point = [
            rng.random_range(-0.2..0.2f64),
            rng.random_range(-0.2..0.2f64),
        ];
        let phi = basis.phi_from_point(&dec, &point).unwrap();
        let deformed = beta_rep(&[0.0, 0.0], &phi, &zeta).unwrap();
        check(&certify(&deformed, &theta, 5, &thr).unwrap());
    }

    // an upper-triangular variant exercises the weak layer too
    let group = FreeGroup::new(2).unwrap();
    let mut images = Vec::new();
    for image in zeta.images() {
        let mut m = image.clone();
        m[(0, 2)] = 0.7;
        m[(1, 2)] = -0.4;
        images.push(m);
    }
    let upper = RepSpec::new(
        group,
        dec.clone(),
        images,
        Structure::UpperTriangular,
    )
    .unwrap();
    check(&certify(&upper, &theta, 5, &thr).unwrap());

    assert!(positive >= 30, "only {positive} positive verdicts in the sweep");
    finish(
        "criterion 9",
        120.0,
        start,
        &format!("{positive} positive verdicts, zero exceptions"),
    );
}
