//! TUM RGB-D benchmark text formats.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use super::{read_text, wrap_parse};
use crate::error::{Error, Result};
use crate::geometry::{Pose, Trajectory};

/// Quaternions further than this from unit norm are reported when loaded.
pub const QUATERNION_WARN_TOLERANCE: f64 = 1e-3;

/// Quaternions this close to unit norm are taken as stored, which keeps
/// load/save round trips exact.
const UNIT_TOLERANCE: f64 = 1e-12;

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line,
            message: format!("'{tok}' is not a finite number"),
        }),
    }
}

/// Non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses `timestamp path` lines as found in `rgb.txt` and `depth.txt`.
pub fn parse_tum_list(text: &str) -> Result<Vec<(f64, String)>> {
    content_lines(text)
        .map(|(n, l)| {
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: n,
                    message: format!("expected 'timestamp path', found {} fields", fields.len()),
                });
            }
            Ok((parse_f64(fields[0], n)?, fields[1].to_string()))
        })
        .collect()
}

pub fn load_tum_list(path: impl AsRef<Path>) -> Result<Vec<(f64, String)>> {
    let path = path.as_ref();
    parse_tum_list(&read_text(path)?).map_err(|e| wrap_parse(path, e))
}

pub fn format_tum_list(entries: &[(f64, String)], header: &str) -> String {
    let mut out = String::new();
    for line in header.lines() {
        writeln!(out, "# {line}").unwrap();
    }
    for (t, p) in entries {
        writeln!(out, "{t} {p}").unwrap();
    }
    out
}

/// An RGB frame paired with the depth frame closest in time.
#[derive(Debug, Clone, PartialEq)]
pub struct AssocPair {
    pub t_rgb: f64,
    pub t_depth: f64,
    pub rgb_path: PathBuf,
    pub depth_path: PathBuf,
}

/// Greedy timestamp association: candidate pairs with
/// `|t_a - (t_b + offset)| < max_difference` are taken in ascending
/// difference, each entry used at most once. Output is ordered by `t_a`.
pub fn associate(
    list_a: &[(f64, String)],
    list_b: &[(f64, String)],
    max_difference: f64,
    offset: f64,
) -> Result<Vec<AssocPair>> {
    if !(max_difference > 0.0) {
        return Err(Error::invalid(format!(
            "max difference {max_difference} must be positive"
        )));
    }
    let mut b_order: Vec<usize> = (0..list_b.len()).collect();
    b_order.sort_by(|&i, &j| list_b[i].0.total_cmp(&list_b[j].0));
    let shifted: Vec<f64> = b_order.iter().map(|&j| list_b[j].0 + offset).collect();

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, (ta, _)) in list_a.iter().enumerate() {
        let start = shifted.partition_point(|&t| t <= ta - max_difference);
        for (k, &tb) in shifted.iter().enumerate().skip(start) {
            if tb >= ta + max_difference {
                break;
            }
            let d = (ta - tb).abs();
            if d < max_difference {
                candidates.push((d, i, b_order[k]));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; list_a.len()];
    let mut used_b = vec![false; list_b.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        pairs.push(AssocPair {
            t_rgb: list_a[i].0,
            t_depth: list_b[j].0,
            rgb_path: PathBuf::from(&list_a[i].1),
            depth_path: PathBuf::from(&list_b[j].1),
        });
    }
    pairs.sort_by(|x, y| x.t_rgb.total_cmp(&y.t_rgb));
    Ok(pairs)
}

/// One `t_rgb rgb_path t_depth depth_path` line per pair.
pub fn format_associations(pairs: &[AssocPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        writeln!(
            out,
            "{} {} {} {}",
            fmt_exact(p.t_rgb),
            p.rgb_path.display(),
            fmt_exact(p.t_depth),
            p.depth_path.display()
        )
        .unwrap();
    }
    out
}

/// Parses `timestamp tx ty tz qx qy qz qw` lines. Entries are sorted by
/// time; for a repeated timestamp the first line wins.
pub fn parse_tum_trajectory(text: &str) -> Result<Trajectory> {
    let mut entries: Vec<(f64, Pose)> = Vec::new();
    for (n, l) in content_lines(text) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 8 {
            return Err(Error::Parse {
                line: n,
                message: format!("expected 8 fields 'timestamp tx ty tz qx qy qz qw', found {}", f.len()),
            });
        }
        let v: Vec<f64> = f.iter().map(|t| parse_f64(t, n)).collect::<Result<_>>()?;
        let q = Quaternion::new(v[7], v[4], v[5], v[6]);
        let norm = q.norm();
        if norm < 1e-12 {
            return Err(Error::Parse {
                line: n,
                message: "zero quaternion".into(),
            });
        }
        if (norm - 1.0).abs() > QUATERNION_WARN_TOLERANCE {
            log::warn!("line {n}: quaternion norm {norm} renormalized");
        }
        let rotation = if (norm - 1.0).abs() <= UNIT_TOLERANCE {
            UnitQuaternion::new_unchecked(q)
        } else {
            UnitQuaternion::from_quaternion(q)
        };
        entries.push((v[0], Pose::new(rotation, Vector3::new(v[1], v[2], v[3]))));
    }
    // Stable sort keeps file order among equal timestamps.
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let before = entries.len();
    entries.dedup_by(|later, first| later.0 == first.0);
    if entries.len() != before {
        log::warn!("dropped {} poses with repeated timestamps", before - entries.len());
    }
    Trajectory::new(entries)
}

pub fn load_trajectory_tum(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    parse_tum_trajectory(&read_text(path)?).map_err(|e| wrap_parse(path, e))
}

/// Shortest text that parses back to the same value; `-0` prints as `0`.
pub(crate) fn fmt_exact(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

pub fn format_tum_trajectory(traj: &Trajectory) -> String {
    let mut out = String::new();
    for (t, p) in traj.entries() {
        let tr = p.translation();
        let q = p.quaternion_xyzw();
        let fields = [*t, tr.x, tr.y, tr.z, q[0], q[1], q[2], q[3]];
        let line: Vec<String> = fields.iter().map(|&v| fmt_exact(v)).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn save_trajectory_tum(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_tum_trajectory(traj)).map_err(|e| Error::io(path, e))
}
