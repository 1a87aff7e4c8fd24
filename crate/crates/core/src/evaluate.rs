//! Trajectory error metrics in the style of the TUM RGB-D benchmark tools.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{align_points_lenient, Point3, Pose, Trajectory};

/// Default timestamp tolerance when pairing poses.
pub const DEFAULT_MAX_DIFF: f64 = 0.02;

/// Exact header of the metrics CSV.
pub const CSV_HEADER: &str = "metric,rmse,mean,median,sd,improvement";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub rmse: f64,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub sd: f64,
}

pub fn stats(errors: &[f64]) -> Result<ErrorStats> {
    if errors.is_empty() {
        return Err(Error::Evaluation("no errors to summarize".into()));
    }
    if errors.iter().any(|e| !e.is_finite()) {
        return Err(Error::Evaluation("non-finite error value".into()));
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let sd = (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) {
        0.5 * (sorted[m - 1] + sorted[m])
    } else {
        sorted[m]
    };
    Ok(ErrorStats { rmse, mean, median, sd })
}

/// RMSE improvement `(1 - beta / alpha) * 100` of a method with RMSE `beta`
/// over a baseline with RMSE `alpha`.
pub fn improvement(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Evaluation(format!("baseline RMSE {alpha} must be positive")));
    }
    if !beta.is_finite() {
        return Err(Error::Evaluation(format!("RMSE {beta} is not finite")));
    }
    Ok((1.0 - beta / alpha) * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosePair {
    pub t_gt: f64,
    pub t_est: f64,
    pub gt: Pose,
    pub est: Pose,
}

/// Greedy one-to-one pairing by ascending time difference; differences
/// above `max_diff` are never paired. The result is ordered by `t_gt`.
pub fn associate_poses(gt: &Trajectory, est: &Trajectory, max_diff: f64) -> Result<Vec<PosePair>> {
    if !(max_diff > 0.0) {
        return Err(Error::invalid(format!(
            "max time difference {max_diff} must be positive"
        )));
    }
    let g = gt.entries();
    let e = est.entries();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    let mut lo = 0;
    for (i, (tg, _)) in g.iter().enumerate() {
        while lo < e.len() && e[lo].0 < tg - max_diff {
            lo += 1;
        }
        for (j, (te, _)) in e.iter().enumerate().skip(lo) {
            if *te > tg + max_diff {
                break;
            }
            let d = (tg - te).abs();
            if d <= max_diff {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_g = vec![false; g.len()];
    let mut used_e = vec![false; e.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if used_g[i] || used_e[j] {
            continue;
        }
        used_g[i] = true;
        used_e[j] = true;
        pairs.push(PosePair {
            t_gt: g[i].0,
            t_est: e[j].0,
            gt: g[i].1,
            est: e[j].1,
        });
    }
    pairs.sort_by(|a, b| a.t_gt.total_cmp(&b.t_gt));
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AteResult {
    pub stats: ErrorStats,
    /// Maps estimated positions onto ground truth.
    pub alignment: Pose,
    pub scale: f64,
}

/// Absolute trajectory error after least-squares alignment of the estimated
/// positions onto ground truth, optionally with a scale factor.
pub fn ate_with(pairs: &[PosePair], with_scale: bool) -> Result<AteResult> {
    if pairs.len() < 3 {
        return Err(Error::Evaluation(format!(
            "ATE needs at least 3 pose pairs, got {}",
            pairs.len()
        )));
    }
    let gt: Vec<Point3> = pairs.iter().map(|p| *p.gt.translation()).collect();
    let est: Vec<Point3> = pairs.iter().map(|p| *p.est.translation()).collect();
    let (alignment, scale) = align_points_lenient(&est, &gt, with_scale)?;
    let errors: Vec<f64> = gt
        .iter()
        .zip(&est)
        .map(|(g, e)| {
            let aligned = alignment.rotation() * (scale * e) + alignment.translation();
            (g - aligned).norm()
        })
        .collect();
    Ok(AteResult {
        stats: stats(&errors)?,
        alignment,
        scale,
    })
}

pub fn ate(pairs: &[PosePair]) -> Result<ErrorStats> {
    ate_with(pairs, false).map(|r| r.stats)
}

/// Interval over which relative motions are compared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RpeDelta {
    Frames(usize),
    /// Each interval starting at pair `i` ends at the first pair at least
    /// this many seconds later in ground-truth time.
    Seconds(f64),
}

impl RpeDelta {
    fn validate(&self) -> Result<()> {
        match *self {
            RpeDelta::Frames(0) => Err(Error::invalid("RPE frame delta must be positive")),
            RpeDelta::Seconds(s) if !(s > 0.0) || !s.is_finite() => {
                Err(Error::invalid(format!("RPE time delta {s} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

impl std::str::FromStr for RpeDelta {
    type Err = Error;

    /// `"3"` or `"3f"` for frames, `"0.5s"` for seconds.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("invalid RPE delta '{s}'"));
        let d = if let Some(v) = s.strip_suffix('s') {
            RpeDelta::Seconds(v.parse().map_err(|_| bad())?)
        } else {
            RpeDelta::Frames(s.strip_suffix('f').unwrap_or(s).parse().map_err(|_| bad())?)
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpeResult {
    /// Meters.
    pub trans: ErrorStats,
    /// Degrees.
    pub rot: ErrorStats,
}

/// Translation norm and rotation angle (degrees) of `dg^-1 * de`, written
/// so that bitwise equal motions give exactly zero.
fn relative_error(dg: &Pose, de: &Pose) -> (f64, f64) {
    // |R^T (t_e - t_g)| = |t_e - t_g|.
    let trans = (de.translation() - dg.translation()).norm();
    let (a, b) = (dg.rotation().quaternion(), de.rotation().quaternion());
    // Parts of conj(a) * b.
    let imag = b.imag() * a.w - a.imag() * b.w - a.imag().cross(&b.imag());
    let real = a.w * b.w + a.imag().dot(&b.imag());
    (trans, (2.0 * imag.norm().atan2(real.abs())).to_degrees())
}

pub fn rpe(pairs: &[PosePair], delta: RpeDelta) -> Result<RpeResult> {
    delta.validate()?;
    let mut trans = Vec::new();
    let mut rot = Vec::new();
    for i in 0..pairs.len() {
        let j = match delta {
            RpeDelta::Frames(n) => i + n,
            RpeDelta::Seconds(s) => {
                let target = pairs[i].t_gt + s - 1e-9;
                (i + 1..pairs.len())
                    .find(|&j| pairs[j].t_gt >= target)
                    .unwrap_or(pairs.len())
            }
        };
        if j >= pairs.len() {
            break;
        }
        let dg = pairs[i].gt.inverse().compose(&pairs[j].gt);
        let de = pairs[i].est.inverse().compose(&pairs[j].est);
        let (t, r) = relative_error(&dg, &de);
        trans.push(t);
        rot.push(r);
    }
    if trans.is_empty() {
        return Err(Error::Evaluation(format!(
            "{} pose pairs form no interval of {delta:?}",
            pairs.len()
        )));
    }
    Ok(RpeResult {
        trans: stats(&trans)?,
        rot: stats(&rot)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationReport {
    pub ate: ErrorStats,
    pub rpe: RpeResult,
}

/// Row names of the metrics CSV, in output order.
pub const CSV_METRICS: [&str; 3] = ["ate", "rpe_trans", "rpe_rot"];

impl EvaluationReport {
    pub fn compute(pairs: &[PosePair], delta: RpeDelta) -> Result<Self> {
        Ok(Self {
            ate: ate(pairs)?,
            rpe: rpe(pairs, delta)?,
        })
    }

    pub fn rows(&self) -> [(&'static str, ErrorStats); 3] {
        [
            (CSV_METRICS[0], self.ate),
            (CSV_METRICS[1], self.rpe.trans),
            (CSV_METRICS[2], self.rpe.rot),
        ]
    }
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub metric: String,
    pub stats: ErrorStats,
    pub improvement: Option<f64>,
}

/// Renders the report. With a `baseline`, each row's improvement column
/// compares its RMSE against the baseline row of the same metric.
pub fn to_csv(report: &EvaluationReport, baseline: Option<&[CsvRow]>) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    for (name, s) in report.rows() {
        let imp = match baseline {
            Some(rows) => {
                let base = rows
                    .iter()
                    .find(|r| r.metric == name)
                    .ok_or_else(|| Error::Evaluation(format!("baseline has no '{name}' row")))?;
                format!("{:.2}", improvement(base.stats.rmse, s.rmse)?)
            }
            None => String::new(),
        };
        writeln!(out, "{name},{},{},{},{},{imp}", s.rmse, s.mean, s.median, s.sd).unwrap();
    }
    Ok(out)
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((i, _)) => {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected header '{CSV_HEADER}'"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty metrics file".into(),
            })
        }
    }
    lines
        .map(|(i, l)| {
            let f: Vec<&str> = l.trim().split(',').collect();
            let bad = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_string(),
            };
            if f.len() != 6 {
                return Err(bad(&format!("expected 6 fields, found {}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("'{s}' is not a number")));
            Ok(CsvRow {
                metric: f[0].to_string(),
                stats: ErrorStats {
                    rmse: num(f[1])?,
                    mean: num(f[2])?,
                    median: num(f[3])?,
                    sd: num(f[4])?,
                },
                improvement: if f[5].is_empty() { None } else { Some(num(f[5])?) },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn traj(poses: Vec<Pose>) -> Trajectory {
        Trajectory::new(
            poses
                .into_iter()
                .enumerate()
                .map(|(i, p)| (i as f64 * 0.1, p))
                .collect(),
        )
        .unwrap()
    }

    fn random_pose(rng: &mut ChaCha8Rng) -> Pose {
        let axis = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        Pose::from_translation([
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        ])
        .compose(&Pose::from_axis_angle(axis, rng.gen_range(-3.0..3.0)))
    }

    fn random_walk(rng: &mut ChaCha8Rng, n: usize) -> Trajectory {
        let mut p = Pose::identity();
        let mut out = Vec::new();
        for _ in 0..n {
            let step = Pose::from_translation([
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-0.1..0.1),
            ])
            .compose(&Pose::from_axis_angle(
                Vector3::new(rng.gen(), rng.gen(), rng.gen()),
                rng.gen_range(-0.1..0.1),
            ));
            p = p.compose(&step);
            out.push(p);
        }
        traj(out)
    }

    #[test]
    fn stats_examples() {
        let s = stats(&[3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(s.rmse, 12.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.mean, 3.5);
        assert_abs_diff_eq!(s.median, 3.5);
        assert_abs_diff_eq!(s.sd, 0.5);
        let c = stats(&[2.5; 7]).unwrap();
        assert_abs_diff_eq!(c.rmse, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.median, 2.5);
        assert_abs_diff_eq!(c.sd, 0.0, epsilon = 1e-12);
        let one = stats(&[1.25]).unwrap();
        assert_eq!((one.rmse, one.mean, one.median, one.sd), (1.25, 1.25, 1.25, 0.0));
        assert!(stats(&[]).is_err());
    }

    #[test]
    fn improvement_matches_table_rows() {
        let round2 = |v: f64| (v * 100.0).round() / 100.0;
        assert_eq!(round2(improvement(0.7246, 0.0176).unwrap()), 97.57);
        assert_eq!(round2(improvement(0.7246, 0.0180).unwrap()), 97.52);
        assert_eq!(improvement(0.5, 0.5).unwrap(), 0.0);
        assert!(improvement(0.0, 0.1).is_err());
        assert!(improvement(-1.0, 0.1).is_err());
    }

    #[test]
    fn association_examples() {
        let at = |ts: &[f64]| Trajectory::new(ts.iter().map(|&t| (t, Pose::identity())).collect()).unwrap();
        let same = associate_poses(&at(&[0.0, 1.0, 2.0]), &at(&[0.0, 1.0, 2.0]), 0.02).unwrap();
        assert_eq!(same.len(), 3);
        assert!(associate_poses(&at(&[0.0, 1.0]), &at(&[0.5, 1.5]), 0.02)
            .unwrap()
            .is_empty());
        let p = associate_poses(&at(&[0.0, 1.0, 2.0]), &at(&[0.01, 0.99]), 0.02).unwrap();
        let ts: Vec<_> = p.iter().map(|x| (x.t_gt, x.t_est)).collect();
        assert_eq!(ts, vec![(0.0, 0.01), (1.0, 0.99)]);
        // Greedy: the closer est claims the gt first.
        let g = associate_poses(&at(&[0.0, 0.015]), &at(&[0.01]), 0.02).unwrap();
        assert_eq!((g[0].t_gt, g.len()), (0.015, 1));
        assert!(associate_poses(&at(&[0.0]), &at(&[0.0]), 0.0).is_err());
    }

    fn pairs(gt: &Trajectory, est: &Trajectory) -> Vec<PosePair> {
        associate_poses(gt, est, DEFAULT_MAX_DIFF).unwrap()
    }

    #[test]
    fn ate_identity_and_rigid_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let gt = random_walk(&mut rng, 40);
        let zero = ate(&pairs(&gt, &gt)).unwrap();
        assert!(zero.rmse < 1e-12 && zero.mean < 1e-12);
        for _ in 0..10 {
            let g = random_pose(&mut rng);
            let moved = gt.transformed(&g);
            assert!(ate(&pairs(&gt, &moved)).unwrap().rmse <= 1e-9);
        }
        let line = traj((0..5).map(|i| Pose::from_translation([i as f64, 0.0, 0.0])).collect());
        // Collinear and static paths are scored, though the alignment is not unique.
        assert!(ate(&pairs(&line, &line)).unwrap().rmse < 1e-12);
        let g = random_pose(&mut rng);
        assert!(ate(&pairs(&line, &line.transformed(&g))).unwrap().rmse <= 1e-9);
        let still = traj(vec![Pose::identity(); 5]);
        let offset = still.transformed(&Pose::from_translation([0.3, 0.0, -1.0]));
        assert!(ate(&pairs(&still, &offset)).unwrap().rmse < 1e-12);
        assert!(ate(&pairs(&gt, &gt)[..2]).is_err());
    }

    /// Independent ATE oracle: coarse search over rotations followed by
    /// coordinate descent, with the optimal translation in closed form.
    fn ate_oracle(gt: &[Point3], est: &[Point3]) -> f64 {
        let n = gt.len() as f64;
        let mg = gt.iter().sum::<Point3>() / n;
        let me = est.iter().sum::<Point3>() / n;
        let cost = |r: &nalgebra::Rotation3<f64>| -> f64 {
            let s: f64 = gt
                .iter()
                .zip(est)
                .map(|(g, e)| (g - mg - r * (e - me)).norm_squared())
                .sum();
            (s / n).sqrt()
        };
        let mut best = (f64::INFINITY, nalgebra::Rotation3::identity());
        let steps = 24;
        for i in 0..steps {
            for j in 0..steps {
                for k in 0..steps {
                    let ang =
                        |v: usize| -std::f64::consts::PI + (v as f64 + 0.5) * std::f64::consts::TAU / steps as f64;
                    let r = nalgebra::Rotation3::from_euler_angles(ang(i), ang(j) / 2.0, ang(k));
                    let c = cost(&r);
                    if c < best.0 {
                        best = (c, r);
                    }
                }
            }
        }
        let mut step = 0.2;
        while step > 1e-12 {
            let mut improved = false;
            for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
                for sign in [-1.0, 1.0] {
                    let r = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), sign * step)
                        * best.1;
                    let c = cost(&r);
                    if c < best.0 {
                        best = (c, r);
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best.0
    }

    #[test]
    fn ate_square_with_displaced_vertex_matches_oracle() {
        let corners = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let gt = traj(corners.iter().map(|&c| Pose::from_translation(c)).collect());
        let mut est_c = corners;
        est_c[2][0] += 0.1;
        let est = traj(est_c.iter().map(|&c| Pose::from_translation(c)).collect());
        let p = pairs(&gt, &est);
        let ours = ate(&p).unwrap().rmse;
        let g: Vec<Point3> = corners.iter().map(|c| Point3::from(*c)).collect();
        let e: Vec<Point3> = est_c.iter().map(|c| Point3::from(*c)).collect();
        let oracle = ate_oracle(&g, &e);
        assert_abs_diff_eq!(ours, oracle, epsilon = 1e-9);
        // The naive guess 0.05 ignores the rotational part of the alignment.
        assert!(ours < 0.05);
    }

    #[test]
    fn rpe_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let gt = random_walk(&mut rng, 30);
        let z = rpe(&pairs(&gt, &gt), RpeDelta::Frames(1)).unwrap();
        assert_eq!((z.trans.rmse, z.rot.rmse), (0.0, 0.0));
        for _ in 0..50 {
            let (dg, de) = (random_pose(&mut rng), random_pose(&mut rng));
            let err = dg.inverse().compose(&de);
            let (t, r) = relative_error(&dg, &de);
            assert_abs_diff_eq!(t, err.translation_norm(), epsilon = 1e-12);
            assert_abs_diff_eq!(r, err.rotation_angle_deg(), epsilon = 1e-9);
        }

        // Straight 0.1 m steps; the estimate stretches each by 1%.
        let mk = |s: f64| {
            traj(
                (0..20)
                    .map(|i| Pose::from_translation([0.1 * s * i as f64, 0.0, 0.0]))
                    .collect(),
            )
        };
        let r = rpe(&pairs(&mk(1.0), &mk(1.01)), RpeDelta::Frames(1)).unwrap();
        assert_abs_diff_eq!(r.trans.rmse, 0.001, epsilon = 1e-12);
        assert_abs_diff_eq!(r.trans.sd, 0.0, epsilon = 1e-12);

        let g1 = random_pose(&mut rng);
        let g2 = random_pose(&mut rng);
        let est = random_walk(&mut rng, 30);
        let base = rpe(&pairs(&gt, &est), RpeDelta::Frames(2)).unwrap();
        let moved = rpe(&pairs(&gt.transformed(&g1), &est.transformed(&g2)), RpeDelta::Frames(2)).unwrap();
        assert_abs_diff_eq!(base.trans.rmse, moved.trans.rmse, epsilon = 1e-9);
        assert_abs_diff_eq!(base.rot.rmse, moved.rot.rmse, epsilon = 1e-7);

        assert!(rpe(&pairs(&gt, &gt)[..3], RpeDelta::Frames(3)).is_err());
        let secs = rpe(&pairs(&gt, &gt), RpeDelta::Seconds(0.25)).unwrap();
        assert_eq!(secs.trans.rmse, 0.0);
    }

    #[test]
    fn delta_parsing() {
        assert_eq!("3".parse::<RpeDelta>().unwrap(), RpeDelta::Frames(3));
        assert_eq!("2f".parse::<RpeDelta>().unwrap(), RpeDelta::Frames(2));
        assert_eq!("0.5s".parse::<RpeDelta>().unwrap(), RpeDelta::Seconds(0.5));
        assert!("0".parse::<RpeDelta>().is_err());
        assert!("x".parse::<RpeDelta>().is_err());
    }

    #[test]
    fn csv_round_trip_and_improvement_column() {
        let s = |r: f64| ErrorStats {
            rmse: r,
            mean: r,
            median: r,
            sd: 0.0,
        };
        let base = EvaluationReport {
            ate: s(0.7246),
            rpe: RpeResult {
                trans: s(0.1),
                rot: s(2.0),
            },
        };
        let text = to_csv(&base, None).unwrap();
        assert!(text.starts_with("metric,rmse,mean,median,sd,improvement\nate,0.7246,"));
        let rows = parse_csv(&text).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].stats.rmse, 0.7246);
        assert_eq!(rows[0].improvement, None);

        let ours = EvaluationReport {
            ate: s(0.0176),
            rpe: RpeResult {
                trans: s(0.1),
                rot: s(1.0),
            },
        };
        let text = to_csv(&ours, Some(&rows)).unwrap();
        let again = parse_csv(&text).unwrap();
        assert_eq!(again[0].improvement, Some(97.57));
        assert_eq!(again[1].improvement, Some(0.0));
        assert_eq!(again[2].improvement, Some(50.0));

        assert!(parse_csv("metric,rmse\n").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\nate,1,2\n")).is_err());
    }

    proptest! {
        #[test]
        fn stats_identities(errors in proptest::collection::vec(0.0f64..10.0, 1..60)) {
            let s = stats(&errors).unwrap();
            prop_assert!(s.rmse * s.rmse + 1e-12 >= s.mean * s.mean);
            prop_assert!((s.sd * s.sd + s.mean * s.mean - s.rmse * s.rmse).abs() < 1e-9);
        }

        #[test]
        fn improvement_decreases_in_beta(alpha in 0.01f64..10.0, b1 in 0.0f64..10.0, db in 1e-6f64..5.0) {
            prop_assert!(improvement(alpha, b1 + db).unwrap() < improvement(alpha, b1).unwrap());
        }
    }
}
