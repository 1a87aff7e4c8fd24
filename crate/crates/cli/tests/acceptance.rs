//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit when a
//! gating criterion fails. `cargo test -p mavo-cli --test acceptance`.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use mavo_core::crf::{
    mean_field_infer, mean_field_trace, mean_field_trace_brute, BinaryMask, CrfParams, FilterMethod, KernelConfig,
    ProbField, EXACT_MAX_PIXELS,
};
use mavo_core::datasets::{synth_sequence, SynthConfig, SynthSequence};
use mavo_core::evaluate::{
    associate_poses, ate, improvement, rpe, to_csv, CsvRow, ErrorStats, EvaluationReport, RpeDelta, DEFAULT_MAX_DIFF,
};
use mavo_core::features::{extract_from_image, FeatureParams};
use mavo_core::geometry::{rigid_align, Point3, Pose, Trajectory};
use mavo_core::imaging::{to_gray, ColorImage, DepthImage};
use mavo_core::odometry::{track_sequence, TrackingParams};
use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_unary(w: usize, h: usize, l: usize, rng: &mut impl Rng) -> ProbField {
    let scores = (0..w * h * l).map(|_| rng.gen_range(0.05..1.0)).collect();
    ProbField::from_scores(w, h, l, scores).unwrap()
}

fn random_color(w: usize, h: usize, rng: &mut impl Rng) -> ColorImage {
    ColorImage::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()])
}

fn random_depth(w: usize, h: usize, rng: &mut impl Rng) -> DepthImage {
    let data = (0..w * h)
        .map(|_| {
            if rng.gen_bool(0.1) {
                0.0
            } else {
                rng.gen_range(0.5..4.0)
            }
        })
        .collect();
    DepthImage::new(w, h, data).unwrap()
}

fn max_trace_diff(a: &[ProbField], b: &[ProbField]) -> Result<f64, String> {
    ensure(a.len() == b.len(), || {
        format!("trace lengths {} and {}", a.len(), b.len())
    })?;
    Ok(a.iter().zip(b).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max))
}

fn improvement_formula() -> Outcome {
    let cases = [(0.0176, "97.57"), (0.0180, "97.52")];
    for (beta, want) in cases {
        let got = format!("{:.2}", improvement(0.7246, beta).map_err(|e| e.to_string())?);
        ensure(got == want, || {
            format!("improvement(0.7246, {beta}) = {got}, want {want}")
        })?;
    }
    // Same numbers through the metrics CSV improvement column.
    let s = |rmse| ErrorStats {
        rmse,
        mean: rmse,
        median: rmse,
        sd: 0.0,
    };
    let baseline: Vec<CsvRow> = ["ate", "rpe_trans", "rpe_rot"]
        .iter()
        .map(|m| CsvRow {
            metric: m.to_string(),
            stats: s(0.7246),
            improvement: None,
        })
        .collect();
    for (beta, want) in cases {
        let report = EvaluationReport {
            ate: s(beta),
            rpe: mavo_core::evaluate::RpeResult {
                trans: s(beta),
                rot: s(beta),
            },
        };
        let csv = to_csv(&report, Some(&baseline)).map_err(|e| e.to_string())?;
        let ate_line = csv.lines().nth(1).unwrap_or_default();
        ensure(ate_line.ends_with(&format!(",{want}")), || {
            format!("csv row '{ate_line}'")
        })?;
    }
    Ok("97.57 and 97.52".into())
}

fn crf_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut runs = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = if seed % 2 == 0 { 16 } else { 32 };
        let l = if seed % 4 < 2 { 2 } else { 6 };
        let q = random_unary(size, size, l, &mut rng);
        let color = random_color(size, size, &mut rng);
        let depth = random_depth(size, size, &mut rng);
        for kernels in [KernelConfig::Color, KernelConfig::Depth, KernelConfig::ColorDepth] {
            let params = CrfParams {
                theta_alpha: 8.0,
                theta_beta: 40.0,
                theta_delta: 0.5,
                method: FilterMethod::Auto,
                ..CrfParams::default()
            }
            .with_kernels(kernels);
            let fast = mean_field_trace(&q, Some(&color), Some(&depth), &params).map_err(|e| e.to_string())?;
            let brute = mean_field_trace_brute(&q, Some(&color), Some(&depth), &params).map_err(|e| e.to_string())?;
            let d = max_trace_diff(&fast, &brute)?;
            ensure(d <= 1e-5, || {
                format!("seed {seed} {size}x{size} L={l} kernels {kernels}: diff {d:e}")
            })?;
            worst = worst.max(d);
            runs += 1;
        }
    }
    Ok(format!(
        "{runs} runs, max per-iteration diff {worst:.1e} (dense tier below {EXACT_MAX_PIXELS} px)"
    ))
}

fn depth_degeneracy() -> Outcome {
    let mut bitwise = true;
    let mut worst = 0.0f64;
    let mut runs = 0;
    for (seed, size) in [(0u64, 16usize), (1, 30), (2, 48), (3, 64)] {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let q = random_unary(size, size, 3, &mut rng);
        let depth = DepthImage::filled(size, size, rng.gen_range(0.5..4.0));
        for method in [FilterMethod::Auto, FilterMethod::Exact, FilterMethod::Lattice] {
            let depth_only = CrfParams {
                use_color_kernel: false,
                use_depth_kernel: true,
                w_smooth: 0.0,
                w_depth: 4.0,
                theta_alpha: 6.0,
                method,
                ..CrfParams::default()
            };
            let smooth_only = CrfParams {
                use_color_kernel: false,
                use_depth_kernel: false,
                w_smooth: 4.0,
                theta_gamma: 6.0,
                method,
                ..CrfParams::default()
            };
            let a = mean_field_trace(&q, None, Some(&depth), &depth_only).map_err(|e| e.to_string())?;
            let b = mean_field_trace(&q, None, None, &smooth_only).map_err(|e| e.to_string())?;
            bitwise &= a == b;
            worst = worst.max(max_trace_diff(&a, &b)?);
            runs += 1;
            if size <= 32 {
                let a = mean_field_trace_brute(&q, None, Some(&depth), &depth_only).map_err(|e| e.to_string())?;
                let b = mean_field_trace_brute(&q, None, None, &smooth_only).map_err(|e| e.to_string())?;
                bitwise &= a == b;
                worst = worst.max(max_trace_diff(&a, &b)?);
                runs += 1;
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max diff {worst:e}"))?;
    Ok(if bitwise {
        format!("{runs} runs, bitwise identical")
    } else {
        format!("{runs} runs, max diff {worst:e}")
    })
}

fn mask_gating_budget() -> Outcome {
    let params = FeatureParams::default();
    let mut qualifying = 0;
    let mut counts = Vec::new();
    for seed in 0..20u64 {
        let seq = synth_sequence(&SynthConfig {
            seed,
            num_frames: 1,
            width: 640,
            height: 480,
            object_count: 0,
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
        let gray = to_gray(&seq.frames[0].color);
        let (w, h) = (gray.width(), gray.height());
        let mask = BinaryMask::from_fn(w, h, |x, _| x < w / 2);
        let unmasked = extract_from_image(&gray, None, &params).map_err(|e| e.to_string())?;
        let supply: usize = unmasked.stats.candidates.iter().sum();
        let masked = extract_from_image(&gray, Some(&mask), &params).map_err(|e| e.to_string())?;
        for kp in &masked.keypoints {
            let (x, y) = (kp.x.round() as i64, kp.y.round() as i64);
            ensure(mask.get_checked(x, y) == Some(false), || {
                format!("seed {seed}: keypoint ({:.1}, {:.1}) on the mask", kp.x, kp.y)
            })?;
        }
        if supply >= 2 * params.nfeatures {
            qualifying += 1;
            ensure(masked.keypoints.len() == params.nfeatures, || {
                format!(
                    "seed {seed}: {} keypoints from {supply} unmasked candidates",
                    masked.keypoints.len()
                )
            })?;
        }
        counts.push(masked.keypoints.len());
    }
    ensure(qualifying > 0, || "no frame had 2 * nfeatures candidates".into())?;
    Ok(format!(
        "20 frames, all keypoints off-mask; {qualifying} frames with >= {} candidates, counts {}..={}",
        2 * params.nfeatures,
        counts.iter().min().unwrap(),
        counts.iter().max().unwrap()
    ))
}

fn ate_of(seq: &SynthSequence, masked: bool) -> Result<f64, String> {
    let masks = masked.then_some(seq.masks.as_slice());
    let res = track_sequence(&seq.rgbd_frames(), masks, &seq.intrinsics, &TrackingParams::default())
        .map_err(|e| e.to_string())?;
    let pairs = associate_poses(&seq.ground_truth, &res.trajectory, DEFAULT_MAX_DIFF).map_err(|e| e.to_string())?;
    Ok(ate(&pairs).map_err(|e| e.to_string())?.rmse)
}

fn masking_claim() -> Outcome {
    let dynamic = synth_sequence(&SynthConfig {
        seed: 0,
        num_frames: 60,
        object_count: 1,
        object_coverage: 0.4,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let (plain, masked) = (ate_of(&dynamic, false)?, ate_of(&dynamic, true)?);
    let gain = improvement(plain, masked).map_err(|e| e.to_string())?;
    ensure(gain >= 50.0, || {
        format!("improvement {gain:.2}% (unmasked {plain:.4} m, masked {masked:.4} m)")
    })?;

    let control = synth_sequence(&SynthConfig {
        seed: 0,
        num_frames: 60,
        object_count: 0,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let (cp, cm) = (ate_of(&control, false)?, ate_of(&control, true)?);
    let rel = (cp - cm).abs() / cp.max(cm).max(f64::MIN_POSITIVE);
    ensure(rel < 0.1, || {
        format!("control differs by {:.1}% ({cp:.5} vs {cm:.5} m)", rel * 100.0)
    })?;
    Ok(format!(
        "ATE {plain:.4} -> {masked:.4} m, improvement {gain:.2}%; control {cp:.5} vs {cm:.5} m ({:.1}%)",
        rel * 100.0
    ))
}

fn random_pose(rng: &mut impl Rng, reach: f64) -> Pose {
    let axis = Vector3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let angle = rng.gen_range(-3.0..3.0);
    let rot = UnitQuaternion::from_scaled_axis(axis.normalize() * angle);
    let t = Vector3::new(
        rng.gen_range(-reach..reach),
        rng.gen_range(-reach..reach),
        rng.gen_range(-reach..reach),
    );
    Pose::new(rot, t)
}

fn evaluation_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_ate = 0.0f64;
    let mut worst_rpe = 0.0f64;
    for _ in 0..20 {
        let entries: Vec<(f64, Pose)> = (0..40).map(|i| (i as f64 * 0.1, random_pose(&mut rng, 3.0))).collect();
        let traj = Trajectory::new(entries).map_err(|e| e.to_string())?;
        let moved = traj.transformed(&random_pose(&mut rng, 10.0));
        let pairs = associate_poses(&traj, &moved, DEFAULT_MAX_DIFF).map_err(|e| e.to_string())?;
        worst_ate = worst_ate.max(ate(&pairs).map_err(|e| e.to_string())?.rmse);
        let same = associate_poses(&traj, &traj, DEFAULT_MAX_DIFF).map_err(|e| e.to_string())?;
        let r = rpe(&same, RpeDelta::Frames(1)).map_err(|e| e.to_string())?;
        worst_rpe = worst_rpe.max(r.trans.rmse).max(r.rot.rmse);
    }
    ensure(worst_ate <= 1e-9, || format!("ATE of a rigid copy {worst_ate:e}"))?;
    ensure(worst_rpe == 0.0, || {
        format!("RPE of identical trajectories {worst_rpe:e}")
    })?;

    let mut recovered = 0;
    let mut worst_fit = 0.0f64;
    for _ in 0..100 {
        let g = random_pose(&mut rng, 5.0);
        let n = rng.gen_range(3..50);
        let src: Vec<Point3> = (0..n)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                )
            })
            .collect();
        let dst: Vec<Point3> = src.iter().map(|p| g.transform_point(p)).collect();
        let fit = rigid_align(&src, &dst).map_err(|e| e.to_string())?;
        let err = (fit.rotation_matrix() - g.rotation_matrix())
            .abs()
            .max()
            .max((fit.translation() - g.translation()).abs().max());
        worst_fit = worst_fit.max(err);
        if err <= 1e-9 {
            recovered += 1;
        }
    }
    ensure(recovered == 100, || {
        format!("{recovered}/100 transforms recovered, worst {worst_fit:e}")
    })?;
    Ok(format!(
        "ATE {worst_ate:.1e}, RPE {worst_rpe:e}, rigid_align 100/100 (worst {worst_fit:.1e})"
    ))
}

fn golden_files() -> Outcome {
    let checks = support::golden_checks();
    let failed: Vec<String> = checks
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    ensure(failed.is_empty(), || failed.join("; "))?;
    Ok(format!("{} checks", checks.len()))
}

fn crf_timing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (w, h) = (321, 321);
    let q = random_unary(w, h, 21, &mut rng);
    let color = ColorImage::from_fn(w, h, |x, y| [(x % 256) as u8, (y % 256) as u8, ((x + y) % 256) as u8]);
    let depth = DepthImage::new(w, h, (0..w * h).map(|i| 1.0 + (i % w) as f32 / w as f32).collect()).unwrap();
    let params = CrfParams::default().with_kernels(KernelConfig::ColorDepth);
    let start = Instant::now();
    mean_field_infer(&q, Some(&color), Some(&depth), &params).map_err(|e| e.to_string())?;
    let t = start.elapsed().as_secs_f64();
    Ok(format!("5 iterations, L=21, c,d: {t:.2} s (target < 2 s)"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    gating: bool,
    run: fn() -> Outcome,
}

fn main() {
    // libtest flags such as --nocapture or a name filter are ignored; the
    // whole run is cheap enough to always execute.
    let criteria = [
        Criterion {
            id: 1,
            name: "improvement formula",
            budget: Duration::from_secs(1),
            gating: true,
            run: improvement_formula,
        },
        Criterion {
            id: 2,
            name: "CRF fast path vs brute force",
            budget: Duration::from_secs(300),
            gating: true,
            run: crf_oracle,
        },
        Criterion {
            id: 3,
            name: "constant-depth degeneracy",
            budget: Duration::from_secs(10),
            gating: true,
            run: depth_degeneracy,
        },
        Criterion {
            id: 4,
            name: "mask exclusion and budget",
            budget: Duration::from_secs(30),
            gating: true,
            run: mask_gating_budget,
        },
        Criterion {
            id: 5,
            name: "masking reduces ATE",
            budget: Duration::from_secs(180),
            gating: true,
            run: masking_claim,
        },
        Criterion {
            id: 6,
            name: "evaluation identities",
            budget: Duration::from_secs(10),
            gating: true,
            run: evaluation_identities,
        },
        Criterion {
            id: 7,
            name: "parser golden files",
            budget: Duration::from_secs(10),
            gating: true,
            run: golden_files,
        },
        Criterion {
            id: 8,
            name: "CRF timing, 321x321",
            budget: Duration::MAX,
            gating: false,
            run: crf_timing,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > c.budget => Err(format!("took {:.2} s, budget {:?}", elapsed.as_secs_f64(), c.budget)),
            o => o,
        };
        let (tag, detail) = match (&outcome, c.gating) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("INFO", d.clone()),
            (Err(e), true) => {
                failures += 1;
                ("FAIL", e.clone())
            }
            (Err(e), false) => ("INFO", format!("not measured: {e}")),
        };
        println!(
            "criterion {} [{tag}] {} ({:.2} s): {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 7 gating criteria passed", 7 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
