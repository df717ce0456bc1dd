//! End-to-end acceptance checks. Runs as a plain program (no test harness)
//! so that every criterion prints one PASS/FAIL line even when others fail.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use bulbar_core::audio::{
    dtw_distance, estimate_pitch, extract_periods, hnr_mean, jitter_metrics, shimmer_metrics, word_error_rate,
    AudioConfig, PitchConfig, AUDIO_FEATURE_NAMES,
};
use bulbar_core::commands::run_evaluate;
use bulbar_core::config::{GridConfig, GridPreset, RunConfig};
use bulbar_core::dataset::{feature_names, reconcile_instances, AudioClip, Instance, Modality, SubjectFeatures, TEMPLATE_REASON};
use bulbar_core::eval::{chi_square_sf, nested_loso, LosoOptions};
use bulbar_core::pipeline::extract_features;
use bulbar_core::regress::svr::{gram, scale_gamma, solve_dual, solve_linear_primal};
use bulbar_core::regress::{
    enumerate_grid, train_gbt, train_svr, Activation, GbtParams, Kernel, MlpModel, ModelFamily, ModelSpec, SvrSettings,
};
use bulbar_core::synth::{add_pulse_train, synth_cohort, SynthParams, VoiceSpec, MANIFEST_FILE};
use bulbar_core::video::VIDEO_FEATURE_NAMES;
use bulbar_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()))
}

/// A synthetic cohort on disk together with its extracted features.
struct Cohort {
    _dir: tempfile::TempDir,
    manifest: PathBuf,
    subjects: Vec<SubjectFeatures>,
}

fn cohort(params: &SynthParams) -> Cohort {
    let dir = tempfile::tempdir().expect("tempdir");
    synth_cohort(params, dir.path()).expect("synth");
    let manifest = dir.path().join(MANIFEST_FILE);
    let m = bulbar_core::dataset::load_manifest(&manifest).expect("manifest");
    let subjects = extract_features(&m, &AudioConfig::default()).expect("features");
    Cohort { _dir: dir, manifest, subjects }
}

fn criterion_1() -> Check {
    let t = Instant::now();
    let p = chi_square_sf(13.6267, 8.0).map_err(|e| e.to_string())?;
    within(t.elapsed(), 1.0)?;
    ensure((p - 0.092).abs() <= 0.001, || format!("p = {p}"))?;
    Ok(format!("p = {p:.5}"))
}

fn criterion_2() -> Check {
    let t = Instant::now();
    let sizes: Vec<usize> = ModelFamily::ALL.iter().map(|&f| enumerate_grid(f).len()).collect();
    within(t.elapsed(), 1.0)?;
    ensure(sizes == [72, 144, 3000], || format!("sizes {sizes:?}"))?;
    Ok(format!("SVR {}, MLP {}, GBT {}", sizes[0], sizes[1], sizes[2]))
}

fn criterion_3() -> Check {
    let counts = [AUDIO_FEATURE_NAMES.len(), VIDEO_FEATURE_NAMES.len(), feature_names(Modality::Multimodal).len()];
    ensure(counts == [18, 15, 33], || format!("counts {counts:?}"))?;
    let names = feature_names(Modality::Multimodal);
    let unique: std::collections::BTreeSet<_> = names.iter().collect();
    ensure(unique.len() == 33, || "duplicate feature names".into())?;

    let c = cohort(&SynthParams { n_subjects: 3, reps_per_subject: 4, seed: 3, ..Default::default() });
    for m in Modality::ALL {
        let r = reconcile_instances(&c.subjects, m).map_err(|e| e.to_string())?;
        ensure(r.instances.iter().all(|i| i.rep != 1), || format!("{m}: repetition 1 modeled"))?;
        ensure(r.instances.len() == 9, || format!("{m}: {} instances", r.instances.len()))?;
        let templates = r.exclusions.iter().filter(|e| e.rep == 1 && e.reason == TEMPLATE_REASON).count();
        ensure(templates == 3, || format!("{m}: {templates} template exclusions"))?;
    }
    Ok("18 + 15 = 33 named features; repetition 1 excluded in every modality".into())
}

fn tone(f0: f64, amp: f64, sr: u32) -> Vec<f64> {
    (0..sr as usize).map(|k| amp * (2.0 * PI * f0 * k as f64 / sr as f64).sin()).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn criterion_4() -> Check {
    let t = Instant::now();
    let cfg = PitchConfig::default();
    let sr = 16000;
    let mut worst_pitch = 0.0f64;
    for f0 in (100..=400).step_by(25).map(f64::from) {
        let clip = AudioClip::new(tone(f0, 0.5, sr), sr).map_err(|e| e.to_string())?;
        let track = estimate_pitch(&clip, &cfg).map_err(|e| e.to_string())?;
        let est = median(track.voiced_f0().collect());
        let err = (est / f0 - 1.0).abs();
        worst_pitch = worst_pitch.max(err);
        ensure(err < 0.01, || format!("pitch {f0} Hz estimated as {est}"))?;
    }

    let mut worst_perturbation = 0.0f64;
    for (k, f0) in [110.0, 180.0, 300.0].into_iter().enumerate() {
        for (j, target) in [0.005, 0.01, 0.02, 0.035, 0.05].into_iter().enumerate() {
            let mut x = vec![0.0; sr as usize];
            let mut rng = ChaCha8Rng::seed_from_u64((10 * k + j) as u64);
            add_pulse_train(&mut x, f64::from(sr), 800, 15200, &VoiceSpec { f0, jitter: target, shimmer: target }, &mut rng);
            let clip = AudioClip::new(x, sr).map_err(|e| e.to_string())?;
            let track = estimate_pitch(&clip, &cfg).map_err(|e| e.to_string())?;
            let periods = extract_periods(&clip, &track).map_err(|e| e.to_string())?;
            let jit = jitter_metrics(&periods).map_err(|e| e.to_string())?.local;
            let shim = shimmer_metrics(&periods).map_err(|e| e.to_string())?.local;
            for (what, v) in [("jitter", jit), ("shimmer", shim)] {
                let err = (v / target - 1.0).abs();
                worst_perturbation = worst_perturbation.max(err);
                ensure(err < 0.1, || format!("f0 {f0}, target {target}: {what} {v}"))?;
            }
        }
    }

    // Identical pulses at an integer period.
    let x: Vec<f64> = (0..sr as usize).map(|k| (-(((k % 100) as f64 - 50.0).powi(2)) / 50.0).exp() * 0.5).collect();
    let clip = AudioClip::new(x, sr).map_err(|e| e.to_string())?;
    let track = estimate_pitch(&clip, &cfg).map_err(|e| e.to_string())?;
    let periods = extract_periods(&clip, &track).map_err(|e| e.to_string())?;
    let (jit, shim) = (
        jitter_metrics(&periods).map_err(|e| e.to_string())?.local,
        shimmer_metrics(&periods).map_err(|e| e.to_string())?.local,
    );
    ensure(jit < 1e-9 && shim < 1e-9, || format!("constant train: jitter {jit}, shimmer {shim}"))?;

    let clean = AudioClip::new(tone(180.0, 0.4, sr), sr).map_err(|e| e.to_string())?;
    let h_clean = hnr_mean(&clean, &estimate_pitch(&clean, &cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(h_clean >= 20.0, || format!("clean tone HNR {h_clean} dB"))?;
    let mut h_noisy = Vec::new();
    for seed in 0..3 {
        let noise = Normal::new(0.0, 0.4 / 2f64.sqrt()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = tone(180.0, 0.4, sr).into_iter().map(|v| (v + noise.sample(&mut rng)).clamp(-1.0, 1.0)).collect();
        let clip = AudioClip::new(x, sr).map_err(|e| e.to_string())?;
        let h = hnr_mean(&clip, &estimate_pitch(&clip, &cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(h.abs() <= 2.0, || format!("equal-power mix HNR {h} dB"))?;
        h_noisy.push(h);
    }
    within(t.elapsed(), 30.0)?;
    Ok(format!(
        "pitch err ≤ {:.3}%, perturbation err ≤ {:.1}%, constant 0, HNR clean {h_clean:.1} dB / mixed {:.2} dB",
        100.0 * worst_pitch,
        100.0 * worst_perturbation,
        h_noisy.iter().fold(0.0f64, |a, h| a.max(h.abs()))
    ))
}

/// Every monotone (1,0)/(0,1)/(1,1) path through an n × m grid as a bit
/// mask over cells `i * 6 + j`.
fn all_paths(n: usize, m: usize) -> Vec<u64> {
    fn walk(i: usize, j: usize, n: usize, m: usize, mask: u64, out: &mut Vec<u64>) {
        let mask = mask | 1 << (i * 6 + j);
        if i == n - 1 && j == m - 1 {
            out.push(mask);
            return;
        }
        if i + 1 < n {
            walk(i + 1, j, n, m, mask, out);
        }
        if j + 1 < m {
            walk(i, j + 1, n, m, mask, out);
        }
        if i + 1 < n && j + 1 < m {
            walk(i + 1, j + 1, n, m, mask, out);
        }
    }
    let mut out = Vec::new();
    walk(0, 0, n, m, 0, &mut out);
    out
}

fn sequences(max_len: usize) -> Vec<Vec<u8>> {
    let mut all: Vec<Vec<u8>> = Vec::new();
    let mut layer: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| (0..3u8).map(move |v| [s.as_slice(), &[v]].concat()))
            .collect();
        all.extend(layer.iter().cloned());
    }
    all
}

fn brute_edit(a: &[&str], b: &[&str]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let sub = brute_edit(ra, rb) + usize::from(x != y);
            sub.min(brute_edit(ra, b) + 1).min(brute_edit(a, rb) + 1)
        }
    }
}

fn criterion_5() -> Check {
    let t = Instant::now();
    let paths: BTreeMap<(usize, usize), Vec<u64>> =
        (1..=6).flat_map(|n| (1..=6).map(move |m| ((n, m), all_paths(n, m)))).collect();
    let seqs = sequences(6);
    let mats: Vec<Matrix> = seqs
        .iter()
        .map(|s| Matrix::from_vec(s.len(), 1, s.iter().map(|&v| f64::from(v)).collect()).unwrap())
        .collect();
    let mut pairs = 0usize;
    for (a, ma) in seqs.iter().zip(&mats) {
        for (b, mb) in seqs.iter().zip(&mats) {
            // Cells costing at least 1 and cells costing 2.
            let (mut ge1, mut eq2) = (0u64, 0u64);
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    let d = x.abs_diff(y);
                    if d >= 1 {
                        ge1 |= 1 << (i * 6 + j);
                    }
                    if d == 2 {
                        eq2 |= 1 << (i * 6 + j);
                    }
                }
            }
            let (cost, cells) = paths[&(a.len(), b.len())]
                .iter()
                .map(|&p| ((p & ge1).count_ones() + (p & eq2).count_ones(), p.count_ones()))
                .min()
                .expect("at least one path");
            let expected = f64::from(cost) / f64::from(cells);
            let got = dtw_distance(ma, mb).map_err(|e| e.to_string())?;
            ensure(got == expected, || format!("DTW {a:?} vs {b:?}: {got} ≠ {expected}"))?;
            pairs += 1;
        }
    }

    let vocab = ["buy", "bobby", "a", "puppy", "bob", "pup"];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..1000 {
        let r: Vec<&str> = (0..rng.random_range(1..=6)).map(|_| vocab[rng.random_range(0..vocab.len())]).collect();
        let h: Vec<&str> = (0..rng.random_range(0..=6)).map(|_| vocab[rng.random_range(0..vocab.len())]).collect();
        // Case and punctuation must not matter.
        let decorate = |w: &&str, rng: &mut ChaCha8Rng| {
            let mut s = if rng.random_bool(0.3) { w.to_uppercase() } else { w.to_string() };
            if rng.random_bool(0.2) {
                s.push(',');
            }
            s
        };
        let hyp_text = h.iter().map(|w| decorate(w, &mut rng)).collect::<Vec<_>>().join(" ");
        let wer = word_error_rate(&r.join(" "), &hyp_text).map_err(|e| e.to_string())?;
        let expected = brute_edit(&r, &h) as f64 / r.len() as f64;
        ensure(wer == expected, || format!("case {case}: WER {wer} ≠ {expected} for {r:?} / {hyp_text:?}"))?;
    }
    within(t.elapsed(), 60.0)?;
    Ok(format!("{pairs} DTW pairs and 1000 WER cases agree with brute force"))
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn gradient_error(activation: Activation, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..16).map(|_| (0..4).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    let x = Matrix::from_rows(&rows, 4).unwrap();
    let y: Vec<f64> = (0..16).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut model = MlpModel::init(4, &[6, 3], activation, &mut rng);
    let point: Vec<f64> = (0..model.n_params()).map(|_| 0.7 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
    model.set_params(&point);
    let idx: Vec<usize> = (0..16).collect();
    let (_, analytic) = model.loss_and_gradient(&x, &y, &idx);
    let h = 1e-5;
    let numeric: Vec<f64> = (0..point.len())
        .map(|k| {
            let mut m = model.clone();
            let mut p = point.clone();
            p[k] += h;
            m.set_params(&p);
            let up = m.loss_and_gradient(&x, &y, &idx).0;
            p[k] -= 2.0 * h;
            m.set_params(&p);
            let down = m.loss_and_gradient(&x, &y, &idx).0;
            (up - down) / (2.0 * h)
        })
        .collect();
    relative_error(&analytic, &numeric)
}

fn criterion_6() -> Check {
    let t = Instant::now();
    let mut worst_grad = 0.0f64;
    for act in Activation::ALL {
        for seed in 0..10 {
            let e = gradient_error(act, 100 + seed);
            worst_grad = worst_grad.max(e);
            ensure(e < 1e-4, || format!("{act:?} point {seed}: relative error {e}"))?;
        }
    }

    let rows: Vec<[f64; 2]> = (0..20).map(|i| [i as f64, ((i * 7) % 20) as f64]).collect();
    let y: Vec<f64> = (0..20).map(|i| ((i * i) % 13) as f64 - 4.0).collect();
    let x = Matrix::from_rows(&rows, 2).unwrap();
    let p = GbtParams { n_estimators: 50, max_depth: 6, learning_rate: 1.0, subsample: 1.0, colsample_bytree: 1.0 };
    let (model, losses) = train_gbt(&x, &y, &p, 0).map_err(|e| e.to_string())?;
    ensure(losses.windows(2).all(|w| w[1] <= w[0]), || "GBT training loss increased".into())?;
    let mse = x.iter_rows().zip(&y).map(|(r, t)| (model.predict_row(r) - t).powi(2)).sum::<f64>() / 20.0;
    ensure(mse < 1e-3, || format!("GBT interpolation MSE {mse}"))?;

    // KKT: a point strictly inside the tube carries no weight.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    for case in 0..60 {
        let n = rng.random_range(5..30);
        let rows: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x = Matrix::from_rows(&rows, 2).unwrap();
        let c = [0.1, 1.0, 10.0, 100.0][case % 4];
        let eps = [0.1, 0.5, 1.0][case % 3];
        for kernel in Kernel::ALL {
            let gamma = scale_gamma(&x);
            let sol = solve_dual(&gram(&x, kernel, gamma), &y, c, eps, &SvrSettings::default()).map_err(|e| e.to_string())?;
            if !sol.converged {
                continue;
            }
            for (i, (row, t)) in x.iter_rows().zip(&y).enumerate() {
                let f: f64 = x
                    .iter_rows()
                    .zip(&sol.coef)
                    .map(|(s, a)| a * kernel.eval(gamma, s, row))
                    .sum::<f64>()
                    - sol.rho;
                if (t - f).abs() < eps - 1e-3 {
                    ensure(sol.coef[i] == 0.0, || format!("case {case} {kernel:?}: row {i} inside the tube has weight"))?;
                }
            }
            checked += 1;
        }
        let lin = solve_linear_primal(&x, &y, c, eps).map_err(|e| e.to_string())?;
        if lin.converged {
            for (i, (row, t)) in x.iter_rows().zip(&y).enumerate() {
                let f: f64 = row.iter().zip(&lin.w).map(|(a, b)| a * b).sum::<f64>() + lin.b;
                let slack = eps - (t - f).abs();
                if slack > 0.0 {
                    ensure(lin.coef[i].abs() * slack <= 1e-7 * c, || format!("case {case} primal: row {i} has weight {}", lin.coef[i]))?;
                }
            }
            checked += 1;
        }
    }

    let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let x = Matrix::from_vec(11, 1, xs.clone()).unwrap();
    let y: Vec<f64> = xs.iter().map(|v| 2.0 * v + 1.0).collect();
    let m = train_svr(&x, &y, 1000.0, 0.01, Kernel::Linear, &SvrSettings::default()).map_err(|e| e.to_string())?;
    let worst_line = x.iter_rows().zip(&y).map(|(r, t)| (m.predict_row(r) - t).abs()).fold(0.0f64, f64::max);
    ensure(worst_line < 0.05, || format!("linear recovery error {worst_line}"))?;
    within(t.elapsed(), 60.0)?;
    Ok(format!(
        "max gradient rel. error {worst_grad:.1e}, GBT MSE {mse:.1e}, KKT on {checked} solves, line error {worst_line:.4}"
    ))
}

fn poison(instances: &[Instance], subject: &str, rng: &mut ChaCha8Rng) -> Vec<Instance> {
    let mut out = instances.to_vec();
    for i in out.iter_mut().filter(|i| i.subject_id == subject) {
        for v in i.audio.iter_mut().flatten().chain(i.video.iter_mut().flatten()) {
            *v = rng.random_range(-1e3..1e3);
        }
    }
    out
}

fn criterion_7(big: &Cohort) -> Check {
    let r = reconcile_instances(&big.subjects, Modality::Multimodal).map_err(|e| e.to_string())?;
    ensure(r.instances.len() == 180, || format!("{} multimodal instances", r.instances.len()))?;
    ensure(r.instances.iter().all(|i| i.rep != 1), || "repetition 1 modeled".into())?;

    let grid = [
        ModelSpec::Svr { c: 1.0, epsilon: 0.1, kernel: Kernel::Linear },
        ModelSpec::Svr { c: 10.0, epsilon: 0.1, kernel: Kernel::Rbf },
    ];
    let opts = LosoOptions::default();
    let folds = nested_loso(&r.instances, &grid, &opts).map_err(|e| e.to_string())?;
    ensure(folds.len() == 20, || format!("{} folds", folds.len()))?;
    let ids: std::collections::BTreeSet<_> = folds.iter().map(|f| f.subject_id.as_str()).collect();
    ensure(ids.len() == 20, || "folds repeat a subject".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for f in [0, 13] {
        let held = &folds[f].subject_id;
        let again = nested_loso(&poison(&r.instances, held, &mut rng), &grid, &opts).map_err(|e| e.to_string())?;
        ensure(again[f].spec == folds[f].spec, || format!("fold {held}: chosen spec depends on held-out rows"))?;
        ensure(again[f].standardizer == folds[f].standardizer, || format!("fold {held}: standardizer depends on held-out rows"))?;
    }
    Ok("20 folds, held-out rows do not reach selection or scaling, 180 multimodal instances".into())
}

fn evaluate_config(manifest: &Path, out: &Path, models: Vec<ModelFamily>, preset: GridPreset) -> RunConfig {
    RunConfig {
        manifest: Some(manifest.to_path_buf()),
        out: out.to_path_buf(),
        models,
        grid: GridConfig { preset, ..Default::default() },
        ..Default::default()
    }
}

fn criterion_8(big: &Cohort) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let smoke = evaluate_config(&big.manifest, &dir.path().join("smoke"), vec![ModelFamily::Svr], GridPreset::Smoke);
    ensure(smoke.grid.specs(ModelFamily::Svr).len() == 8, || "smoke grid is not 8 specs".into())?;
    let out = run_evaluate(&smoke).map_err(|e| e.to_string())?;
    let mm = out
        .reports
        .iter()
        .find(|r| r.modality == Modality::Multimodal)
        .ok_or("no multimodal report")?
        .mrmse;
    ensure(mm <= 0.6, || format!("multimodal SVR mRMSE {mm}"))?;

    let t = Instant::now();
    let full = evaluate_config(&big.manifest, &dir.path().join("full"), vec![ModelFamily::Svr], GridPreset::Full);
    let full_out = run_evaluate(&full).map_err(|e| e.to_string())?;
    let full_time = t.elapsed();
    within(full_time, 600.0)?;
    let full_mm = full_out.reports.iter().find(|r| r.modality == Modality::Multimodal).map_or(f64::NAN, |r| r.mrmse);

    // The 9-cell layout, on a smaller cohort to keep MLP training short.
    let small = cohort(&SynthParams { n_subjects: 5, reps_per_subject: 4, seed: 8, ..Default::default() });
    let all = evaluate_config(&small.manifest, &dir.path().join("all"), ModelFamily::ALL.to_vec(), GridPreset::Smoke);
    run_evaluate(&all).map_err(|e| e.to_string())?;
    let summary = fs::read_to_string(dir.path().join("all/summary.csv")).map_err(|e| e.to_string())?;
    let cells: Vec<(String, String)> = summary
        .lines()
        .skip(1)
        .map(|l| {
            let mut f = l.split(',');
            (f.next().unwrap_or("").to_string(), f.next().unwrap_or("").to_string())
        })
        .collect();
    let expected: Vec<(String, String)> = Modality::ALL
        .iter()
        .flat_map(|m| ModelFamily::ALL.iter().map(move |f| (m.to_string(), f.to_string())))
        .collect();
    ensure(cells == expected, || format!("summary cells {cells:?}"))?;
    Ok(format!(
        "smoke mRMSE {mm:.3}; full 72-spec grid (3 modalities) in {:.0} s, mRMSE {full_mm:.3}; 9-cell summary",
        full_time.as_secs_f64()
    ))
}

fn criterion_9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let c = cohort(&SynthParams { n_subjects: 5, reps_per_subject: 4, seed: 9, ..Default::default() });
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = Command::new(env!("CARGO_BIN_EXE_bulbar"))
            .args(["evaluate", "--grid", "smoke", "--manifest"])
            .arg(&c.manifest)
            .arg("--out")
            .arg(&out)
            .env("RAYON_NUM_THREADS", "4")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        let files: BTreeMap<String, Vec<u8>> = fs::read_dir(&out)
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().path())
            .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "svg")))
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
            .collect();
        trees.push(files);
    }
    ensure(trees[0].len() >= 14, || format!("only {} output files", trees[0].len()))?;
    for (name, bytes) in &trees[0] {
        ensure(trees[1].get(name) == Some(bytes), || format!("{name} differs between runs"))?;
    }
    Ok(format!("{} CSV/SVG files byte-identical across two 4-thread runs", trees[0].len()))
}

fn main() -> ExitCode {
    let titles = [
        "chi-square anchor",
        "grid sizes",
        "feature counts and template exclusion",
        "DSP oracles",
        "DTW and WER brute force",
        "model correctness",
        "cross-validation harness",
        "end-to-end synthetic recovery",
        "determinism",
    ];
    let mut big: Option<Cohort> = None;
    let mut failed = 0;
    for (k, title) in titles.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| -> Check {
            if (k == 6 || k == 7) && big.is_none() {
                big = Some(cohort(&SynthParams::default()));
            }
            match k {
                0 => criterion_1(),
                1 => criterion_2(),
                2 => criterion_3(),
                3 => criterion_4(),
                4 => criterion_5(),
                5 => criterion_6(),
                6 => criterion_7(big.as_ref().expect("cohort")),
                7 => criterion_8(big.as_ref().expect("cohort")),
                _ => criterion_9(),
            }
        }))
        .unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} PASS  {title}: {detail} [{secs:.1} s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {title}: {why} [{secs:.1} s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", titles.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
