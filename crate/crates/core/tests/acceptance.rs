//! Acceptance suite: runs every criterion, prints one PASS/FAIL line for each
//! and exits with status 1 if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use wavecluster::bench::{
    paired_t_test_greater, run_comparison, summarize, ComparisonConfig, ReplicateOutcome,
};
use wavecluster::cluster::{choose_k_by_jump, pam, KMeansConfig};
use wavecluster::cwt::{make_scale_grid, CwtConfig, CwtPlan, SmoothingConfig};
use wavecluster::dissimilarity::{mca, wavelet_coherence, wer_distance, DissimilarityMatrix};
use wavecluster::dwt::{dwt_forward, energy_contributions, relative_contributions, WaveletFilter};
use wavecluster::eval::{misclassification, rand_indices};
use wavecluster::rng::stream;
use wavecluster::Matrix;

/// Outcome line of one criterion; `Err` carries the reason for failure.
type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn normal_curve<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Random-walk curve with some low-frequency content, so spectra are not flat.
fn walk_curve<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(rng);
            x = 0.9 * x + e;
            x
        })
        .collect()
}

fn benchmark_outcomes() -> &'static Vec<ReplicateOutcome> {
    static OUTCOMES: std::sync::OnceLock<Vec<ReplicateOutcome>> = std::sync::OnceLock::new();
    OUTCOMES.get_or_init(|| {
        run_comparison(&ComparisonConfig::default(), 1000, 100).expect("benchmark runs")
    })
}

fn criterion_01_benchmark_ordering() -> Check {
    let start = Instant::now();
    let outcomes = benchmark_outcomes();
    let secs = start.elapsed().as_secs_f64();
    let feat_err: Vec<f64> = outcomes
        .iter()
        .map(|o| o.features.misclassified as f64)
        .collect();
    let raw_err: Vec<f64> = outcomes
        .iter()
        .map(|o| o.raw.misclassified as f64)
        .collect();
    let feat_ari: Vec<f64> = outcomes.iter().map(|o| o.features.adjusted_rand).collect();
    let raw_ari: Vec<f64> = outcomes.iter().map(|o| o.raw.adjusted_rand).collect();
    let s = summarize(outcomes).map_err(|e| e.to_string())?;
    // fewer errors for features: test raw − features > 0
    let p_err = paired_t_test_greater(&raw_err, &feat_err).map_err(|e| e.to_string())?;
    let p_ari = paired_t_test_greater(&feat_ari, &raw_ari).map_err(|e| e.to_string())?;
    let detail = format!(
        "misclassified features {:.2} ({:.2}) vs raw {:.2} ({:.2}), p = {:.3e}; ARI {:.3} vs {:.3}, p = {:.3e}; {:.0} s",
        s.mean_misclassified_features,
        s.sd_misclassified_features,
        s.mean_misclassified_raw,
        s.sd_misclassified_raw,
        p_err,
        s.mean_ari_features,
        s.mean_ari_raw,
        p_ari,
        secs
    );
    let in_range = |m: f64| (10.0..=40.0).contains(&m);
    ensure(
        s.mean_misclassified_features < s.mean_misclassified_raw && p_err < 0.01,
        || format!("features do not misclassify fewer curves: {detail}"),
    )?;
    ensure(s.mean_ari_features > s.mean_ari_raw && p_ari < 0.01, || {
        format!("features ARI not higher: {detail}")
    })?;
    ensure(
        in_range(s.mean_misclassified_features) && in_range(s.mean_misclassified_raw),
        || format!("misclassification outside [10, 40]: {detail}"),
    )?;
    ensure(secs < 300.0, || format!("too slow: {detail}"))?;
    Ok(detail)
}

fn criterion_02_coarse_scales() -> Check {
    let outcomes = benchmark_outcomes();
    let hits = outcomes
        .iter()
        .filter(|o| o.selected_scales.iter().filter(|&&j| j <= 2).count() >= 2)
        .count();
    let detail = format!(
        "{hits}/{} replicates keep at least 2 of scales 0, 1, 2",
        outcomes.len()
    );
    ensure(hits >= 80, || detail.clone())?;
    Ok(detail)
}

fn criterion_03_parseval() -> Check {
    let filter = WaveletFilter::symmlet6();
    let mut rng = stream(3, "acceptance-parseval", 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let z = normal_curve(&mut rng, 1024);
        let w = dwt_forward(&z, &filter).map_err(|e| e.to_string())?;
        let e_in: f64 = z.iter().map(|v| v * v).sum();
        let e_out: f64 = w.to_vec().iter().map(|v| v * v).sum();
        worst = worst.max((e_out - e_in).abs() / e_in);
    }
    ensure(worst <= 1e-10, || {
        format!("relative energy error {worst:.3e}")
    })?;
    Ok(format!(
        "max relative energy error {worst:.3e} over 1000 curves"
    ))
}

/// Periodized single-level analysis matrix `[H; G]` of size `len × len`.
fn level_matrix(h: &[f64], g: &[f64], len: usize) -> Matrix {
    let half = len / 2;
    let mut m = Matrix::zeros(len, len);
    for k in 0..half {
        for n in 0..h.len() {
            let col = (2 * k + n) % len;
            m.set(k, col, m.get(k, col) + h[n]);
            m.set(half + k, col, m.get(half + k, col) + g[n]);
        }
    }
    m
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut c = Matrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let aik = a.get(i, k);
            if aik != 0.0 {
                for j in 0..b.cols() {
                    c.set(i, j, c.get(i, j) + aik * b.get(k, j));
                }
            }
        }
    }
    c
}

/// Full analysis matrix; rows ordered `(c_0, d_0, d_1, …, d_{J-1})`.
fn dwt_matrix(filter: &WaveletFilter, n: usize) -> Matrix {
    let h = filter.lowpass();
    let g = filter.highpass();
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        w.set(i, i, 1.0);
    }
    let mut len = n;
    while len >= 2 {
        // act on the leading `len` coefficients, identity on the rest
        let mut step = Matrix::zeros(n, n);
        let block = level_matrix(h, &g, len);
        for i in 0..len {
            for j in 0..len {
                step.set(i, j, block.get(i, j));
            }
        }
        for i in len..n {
            step.set(i, i, 1.0);
        }
        w = matmul(&step, &w);
        len /= 2;
    }
    w
}

fn criterion_04_dwt_oracle() -> Check {
    let mut rng = stream(4, "acceptance-dwt", 0);
    let mut worst_transform = 0.0f64;
    let mut worst_orth = 0.0f64;
    for filter in [WaveletFilter::haar(), WaveletFilter::symmlet6()] {
        for n in [8usize, 16, 32, 64] {
            let w = dwt_matrix(&filter, n);
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = (0..n).map(|k| w.get(k, i) * w.get(k, j)).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst_orth = worst_orth.max((dot - target).abs());
                }
            }
            for _ in 0..20 {
                let z = normal_curve(&mut rng, n);
                let d = dwt_forward(&z, &filter).map_err(|e| e.to_string())?;
                let mut coeffs = vec![d.approx()];
                coeffs.extend(d.details().iter().flatten());
                for (i, c) in coeffs.iter().enumerate() {
                    let expected: f64 = (0..n).map(|k| w.get(i, k) * z[k]).sum();
                    worst_transform = worst_transform.max((c - expected).abs());
                }
            }
        }
    }
    ensure(worst_transform <= 1e-10 && worst_orth <= 1e-10, || {
        format!("transform error {worst_transform:.3e}, W'W - I {worst_orth:.3e}")
    })?;
    Ok(format!(
        "max |pyramid - matrix| {worst_transform:.3e}, max |W'W - I| {worst_orth:.3e}"
    ))
}

fn criterion_05_affine_law() -> Check {
    let filter = WaveletFilter::symmlet6();
    let mut rng = stream(5, "acceptance-affine", 0);
    let (mut d_err, mut ac_err, mut logit_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let z = normal_curve(&mut rng, 256);
        let a: f64 = rng.random_range(-10.0..10.0);
        let mut b: f64 = rng.random_range(0.1..5.0);
        if rng.random::<bool>() {
            b = -b;
        }
        let y: Vec<f64> = z.iter().map(|v| a + b * v).collect();
        let wz = dwt_forward(&z, &filter).map_err(|e| e.to_string())?;
        let wy = dwt_forward(&y, &filter).map_err(|e| e.to_string())?;
        for (dz, dy) in wz.details().iter().zip(wy.details()) {
            for (p, q) in dz.iter().zip(dy) {
                d_err = d_err.max((q - b * p).abs());
            }
        }
        let ac_z = energy_contributions(&wz);
        let ac_y = energy_contributions(&wy);
        let shifted: Vec<f64> = z.iter().map(|v| v + a).collect();
        let ac_s =
            energy_contributions(&dwt_forward(&shifted, &filter).map_err(|e| e.to_string())?);
        for j in 0..ac_z.len() {
            ac_err = ac_err.max((ac_s[j] - ac_z[j]).abs() / ac_z[j].max(1.0));
            ac_err = ac_err.max((ac_y[j] - b * b * ac_z[j]).abs() / (b * b * ac_z[j]).max(1.0));
        }
        let (_, lz) = relative_contributions(&ac_z).map_err(|e| e.to_string())?;
        let (_, ly) = relative_contributions(&ac_y).map_err(|e| e.to_string())?;
        for (p, q) in lz.iter().zip(&ly) {
            logit_err = logit_err.max((p - q).abs());
        }
    }
    ensure(
        d_err <= 1e-10 && ac_err <= 1e-10 && logit_err <= 1e-8,
        || format!("details {d_err:.3e}, AC {ac_err:.3e}, logit-RC {logit_err:.3e}"),
    )?;
    Ok(format!(
        "details {d_err:.3e}, AC {ac_err:.3e}, logit-RC {logit_err:.3e}"
    ))
}

fn criterion_06_coherence_bounds() -> Check {
    let n = 512;
    let grid = make_scale_grid(1, 6, 8).map_err(|e| e.to_string())?;
    let plan = CwtPlan::new(n, &grid, &CwtConfig::default()).map_err(|e| e.to_string())?;
    let smoothing = SmoothingConfig::default();
    let mut rng = stream(6, "acceptance-coherence", 0);
    let (mut lo, mut hi, mut self_err) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..100 {
        let z = walk_curve(&mut rng, n);
        let x = walk_curve(&mut rng, n);
        let wz = plan.transform(&z).map_err(|e| e.to_string())?;
        let wx = plan.transform(&x).map_err(|e| e.to_string())?;
        let field = wavelet_coherence(&wz, &wx, &smoothing).map_err(|e| e.to_string())?;
        for &v in field.values() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let own = wavelet_coherence(&wz, &wz, &smoothing).map_err(|e| e.to_string())?;
        for &v in own.values() {
            self_err = self_err.max((v - 1.0).abs());
        }
    }
    ensure(lo >= 0.0 && hi <= 1.0 + 1e-9 && self_err <= 1e-9, || {
        format!("range [{lo}, {hi}], self-coherence error {self_err:.3e}")
    })?;
    Ok(format!(
        "entries in [{lo:.3e}, {hi:.6}], max |self-coherence - 1| {self_err:.3e}"
    ))
}

fn criterion_07_wer_metric() -> Check {
    let n = 512;
    let grid = make_scale_grid(1, 6, 8).map_err(|e| e.to_string())?;
    let bound = ((grid.len() * n) as f64).sqrt();
    let plan = CwtPlan::new(n, &grid, &CwtConfig::default()).map_err(|e| e.to_string())?;
    let smoothing = SmoothingConfig::default();
    let mut rng = stream(7, "acceptance-wer", 0);
    let (mut self_d, mut asym, mut lo, mut hi) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    for _ in 0..100 {
        let wz = plan
            .transform(&walk_curve(&mut rng, n))
            .map_err(|e| e.to_string())?;
        let wx = plan
            .transform(&walk_curve(&mut rng, n))
            .map_err(|e| e.to_string())?;
        let d_zx = wer_distance(&wz, &wx, &smoothing).map_err(|e| e.to_string())?;
        let d_xz = wer_distance(&wx, &wz, &smoothing).map_err(|e| e.to_string())?;
        let d_zz = wer_distance(&wz, &wz, &smoothing).map_err(|e| e.to_string())?;
        self_d = self_d.max(d_zz);
        asym = asym.max((d_zx - d_xz).abs());
        lo = lo.min(d_zx);
        hi = hi.max(d_zx);
    }
    ensure(
        self_d <= 1e-6 && asym <= 1e-12 && lo >= 0.0 && hi <= bound,
        || {
            format!(
                "d(z,z) {self_d:.3e}, asymmetry {asym:.3e}, range [{lo}, {hi}] vs bound {bound}"
            )
        },
    )?;
    Ok(format!(
        "max d(z,z) {self_d:.3e}, max asymmetry {asym:.3e}, d in [{lo:.2}, {hi:.2}] <= {bound:.1}"
    ))
}

fn criterion_08_mca() -> Check {
    let n = 256;
    let grid = make_scale_grid(1, 6, 8).map_err(|e| e.to_string())?;
    let plan = CwtPlan::new(n, &grid, &CwtConfig::default()).map_err(|e| e.to_string())?;
    let mut rng = stream(8, "acceptance-mca", 0);
    let (mut frob, mut self_d) = (0.0f64, 0.0f64);
    for _ in 0..30 {
        let wz = plan
            .transform(&walk_curve(&mut rng, n))
            .map_err(|e| e.to_string())?;
        let wx = plan
            .transform(&walk_curve(&mut rng, n))
            .map_err(|e| e.to_string())?;
        let r = mca(&wz, &wx, 0.95).map_err(|e| e.to_string())?;
        // independent Frobenius norm of Q = W_z W_x^H
        let s = wz.n_scales();
        let mut q_sq = 0.0;
        for a in 0..s {
            for b in 0..s {
                let q: num_complex::Complex64 = wz
                    .row(a)
                    .iter()
                    .zip(wx.row(b))
                    .map(|(p, q)| p * q.conj())
                    .sum();
                q_sq += q.norm_sqr();
            }
        }
        let sum_l2: f64 = r.singular_values.iter().map(|l| l * l).sum();
        frob = frob.max((sum_l2 - q_sq).abs() / q_sq);
        ensure(r.singular_values.windows(2).all(|w| w[0] >= w[1]), || {
            "singular values not nonincreasing".into()
        })?;
        let again = mca(&wz, &wx, 0.95).map_err(|e| e.to_string())?;
        let bits = |m: &nalgebra::DMatrix<num_complex::Complex64>| -> Vec<(u64, u64)> {
            m.iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect()
        };
        let same = r.distance.to_bits() == again.distance.to_bits()
            && r.singular_values
                .iter()
                .map(|v| v.to_bits())
                .eq(again.singular_values.iter().map(|v| v.to_bits()))
            && bits(&r.u) == bits(&again.u)
            && bits(&r.v) == bits(&again.v);
        ensure(same, || "two MCA runs differ".into())?;
        self_d = self_d.max(mca(&wz, &wz, 0.95).map_err(|e| e.to_string())?.distance);
    }
    ensure(frob <= 1e-8 && self_d <= 1e-6, || {
        format!("Frobenius error {frob:.3e}, D(z,z) {self_d:.3e}")
    })?;
    Ok(format!(
        "max Frobenius relative error {frob:.3e}, max D(z,z) {self_d:.3e}, runs bitwise equal"
    ))
}

fn medoid_cost(d: &DissimilarityMatrix, medoids: &[usize]) -> f64 {
    (0..d.len())
        .map(|i| {
            medoids
                .iter()
                .map(|&m| d.get(i, m))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

fn criterion_09_pam() -> Check {
    let n = 60;
    let mut rng = stream(9, "acceptance-pam", 0);
    for trial in 0..50u64 {
        let k = 2 + (trial as usize % 5);
        let mut vals = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v: f64 = rng.random_range(0.01..1.0);
                vals[i * n + j] = v;
                vals[j * n + i] = v;
            }
        }
        let d = DissimilarityMatrix::new(n, vals, None).map_err(|e| e.to_string())?;
        let p = pam(&d, k, trial).map_err(|e| e.to_string())?;
        let medoids = p.medoids().ok_or("PAM partition without medoids")?.to_vec();
        let cost = medoid_cost(&d, &medoids);
        for slot in 0..k {
            for o in (0..n).filter(|o| !medoids.contains(o)) {
                let mut swapped = medoids.clone();
                swapped[slot] = o;
                let c = medoid_cost(&d, &swapped);
                ensure(c >= cost - 1e-9 * cost, || {
                    format!(
                        "trial {trial}: swapping medoid {} for {o} lowers cost {cost} to {c}",
                        medoids[slot]
                    )
                })?;
            }
        }
    }
    for trial in 0..10u64 {
        let sizes = [20usize, 25, 15];
        let truth: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
            .collect();
        let m = truth.len();
        let mut vals = vec![0.0; m * m];
        for i in 0..m {
            for j in i + 1..m {
                let base = if truth[i] == truth[j] { 0.0 } else { 5.0 };
                let v = base + rng.random_range(0.01..1.0);
                vals[i * m + j] = v;
                vals[j * m + i] = v;
            }
        }
        let d = DissimilarityMatrix::new(m, vals, None).map_err(|e| e.to_string())?;
        let p = pam(&d, 3, trial).map_err(|e| e.to_string())?;
        let errors = misclassification(&truth, p.labels()).map_err(|e| e.to_string())?;
        ensure(errors == 0, || {
            format!("block trial {trial}: {errors} curves misplaced")
        })?;
    }
    Ok("50 random matrices swap-optimal, 10 block matrices recovered exactly".into())
}

fn criterion_10_jump() -> Check {
    let dim = 10;
    let per = 100;
    let config = KMeansConfig::default();
    let mut hits = 0;
    let mut seen = BTreeMap::new();
    for seed in 0..100u64 {
        let mut rng = stream(seed, "acceptance-blobs", 0);
        let mut rows = Vec::new();
        for c in 0..3 {
            for _ in 0..per {
                let mut p = normal_curve(&mut rng, dim);
                p[c] += 10.0;
                rows.push(p);
            }
        }
        let data = Matrix::from_rows(&rows).ok_or("ragged blob rows")?;
        let r = choose_k_by_jump(&data, 10, &config, seed).map_err(|e| e.to_string())?;
        *seen.entry(r.k_star).or_insert(0) += 1;
        if r.k_star == 3 {
            hits += 1;
        }
    }
    let detail = format!("K* = 3 in {hits}/100 seeds (distribution {seen:?})");
    ensure(hits >= 90, || detail.clone())?;
    Ok(detail)
}

/// Pair-counting oracle: Rand and the pair form of the adjusted index.
fn pair_counts(a: &[usize], b: &[usize]) -> (f64, f64) {
    let (mut n11, mut n10, mut n01, mut n00) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let rand = (n11 + n00) / (n11 + n10 + n01 + n00);
    let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    let ari = if den == 0.0 {
        1.0
    } else {
        2.0 * (n00 * n11 - n01 * n10) / den
    };
    (rand, ari)
}

fn criterion_11_rand_ari() -> Check {
    let (rand, ari) = rand_indices(&[1, 1, 2, 2], &[1, 2, 1, 2]).map_err(|e| e.to_string())?;
    ensure(
        (rand - 1.0 / 3.0).abs() < 1e-15 && (ari + 0.5).abs() < 1e-15,
        || format!("hand example gives Rand {rand}, ARI {ari}"),
    )?;
    let mut rng = stream(11, "acceptance-rand", 0);
    let mut worst = 0.0f64;
    let mut compared = 0;
    while compared < 50 {
        let n = rng.random_range(2..=30);
        let ka = rng.random_range(1..=5);
        let kb = rng.random_range(1..=5);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        let (r, x) = rand_indices(&a, &b).map_err(|e| e.to_string())?;
        let (r0, x0) = pair_counts(&a, &b);
        worst = worst.max((r - r0).abs());
        if x.is_finite() && x0.is_finite() {
            worst = worst.max((x - x0).abs());
        }
        compared += 1;
    }
    ensure(worst <= 1e-12, || {
        format!("max deviation from pair counting {worst:.3e}")
    })?;
    Ok(format!(
        "hand example exact, max deviation from pair counting {worst:.3e} over 50 pairs"
    ))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let mut full = vec!["wavecluster"];
    full.extend_from_slice(args);
    match wavecluster::cli::run(full) {
        0 => Ok(()),
        code => Err(format!("`{}` exited with {code}", args.join(" "))),
    }
}

/// Every pipeline of the command-line front end, writing under `root/run`.
fn run_pipelines(root: &Path, threads: &str) -> Result<PathBuf, String> {
    let run = root.join("run");
    let config = root.join("config.json");
    let p = |sub: &str| run.join(sub).display().to_string();
    let f = |sub: &str, name: &str| run.join(sub).join(name).display().to_string();
    let cfg = config.display().to_string();
    let common = [
        "--config",
        cfg.as_str(),
        "--seed",
        "17",
        "--threads",
        threads,
    ];
    let steps: Vec<Vec<String>> = vec![
        vec!["simulate".into(), "--output".into(), p("sim")],
        vec![
            "features".into(),
            "--input".into(),
            f("sim", "dataset.csv"),
            "--output".into(),
            p("features"),
        ],
        vec![
            "select".into(),
            "--input".into(),
            f("features", "features.csv"),
            "--kmax".into(),
            "4".into(),
            "--output".into(),
            p("select"),
        ],
        vec![
            "choose-k".into(),
            "--input".into(),
            f("features", "features.csv"),
            "--kmax".into(),
            "6".into(),
            "--output".into(),
            p("choose-k"),
        ],
        vec![
            "cluster".into(),
            "--input".into(),
            f("features", "features.csv"),
            "--k".into(),
            "3".into(),
            "--output".into(),
            p("kmeans"),
        ],
        vec![
            "diagnose".into(),
            "--input".into(),
            f("features", "features.csv"),
            "--partition".into(),
            f("kmeans", "partition.csv"),
            "--labels".into(),
            f("sim", "labels.csv"),
            "--output".into(),
            p("diagnose"),
        ],
        vec![
            "dissim".into(),
            "--pipeline".into(),
            "spectrum".into(),
            "--measure".into(),
            "wer".into(),
            "--input".into(),
            f("sim", "dataset.csv"),
            "--output".into(),
            p("dissim"),
        ],
        vec![
            "cluster".into(),
            "--pipeline".into(),
            "spectrum".into(),
            "--measure".into(),
            "mca".into(),
            "--input".into(),
            f("sim", "dataset.csv"),
            "--k".into(),
            "3".into(),
            "--output".into(),
            p("pam"),
        ],
        vec![
            "diagnose".into(),
            "--pipeline".into(),
            "spectrum".into(),
            "--input".into(),
            f("pam", "dissimilarity.csv"),
            "--partition".into(),
            f("pam", "partition.csv"),
            "--output".into(),
            p("diagnose-spectrum"),
        ],
        vec![
            "benchmark".into(),
            "--replicates".into(),
            "3".into(),
            "--output".into(),
            p("benchmark"),
        ],
    ];
    for step in steps {
        let mut args: Vec<&str> = step.iter().map(String::as_str).collect();
        args.extend_from_slice(&common);
        run_cli(&args)?;
    }
    Ok(run)
}

fn collect_files(
    dir: &Path,
    base: &Path,
    out: &mut BTreeMap<PathBuf, Vec<u8>>,
) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, base, out)?;
        } else {
            out.insert(
                path.strip_prefix(base).unwrap().to_path_buf(),
                std::fs::read(&path)?,
            );
        }
    }
    Ok(())
}

fn criterion_12_determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    std::fs::write(
        root.join("config.json"),
        r#"{"benchmark": {"per_class": 10, "length": 256}}"#,
    )
    .map_err(|e| e.to_string())?;
    let mut snapshots = Vec::new();
    for (i, threads) in ["1", "8", "1"].iter().enumerate() {
        let run = run_pipelines(root, threads)?;
        let mut files = BTreeMap::new();
        collect_files(&run, &run, &mut files).map_err(|e| e.to_string())?;
        std::fs::rename(&run, root.join(format!("run-{i}"))).map_err(|e| e.to_string())?;
        snapshots.push(files);
    }
    for other in &snapshots[1..] {
        ensure(other.keys().eq(snapshots[0].keys()), || {
            "runs produced different file sets".into()
        })?;
        for (path, bytes) in other {
            ensure(snapshots[0][path] == *bytes, || {
                format!("{} differs between runs", path.display())
            })?;
        }
    }
    Ok(format!(
        "{} artifacts bitwise identical across runs with 1, 8 and 1 threads",
        snapshots[0].len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("01 benchmark ordering", criterion_01_benchmark_ordering),
        ("02 informative coarse scales", criterion_02_coarse_scales),
        ("03 energy preservation", criterion_03_parseval),
        ("04 transform matrix oracle", criterion_04_dwt_oracle),
        ("05 affine law", criterion_05_affine_law),
        ("06 coherence bounds", criterion_06_coherence_bounds),
        ("07 WER metric properties", criterion_07_wer_metric),
        ("08 MCA properties", criterion_08_mca),
        ("09 PAM swap optimality", criterion_09_pam),
        ("10 jump method", criterion_10_jump),
        ("11 Rand and ARI", criterion_11_rand_ari),
        ("12 end-to-end determinism", criterion_12_determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({secs:.1} s) {detail}"),
            Err(reason) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.1} s) {reason}");
            }
        }
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
