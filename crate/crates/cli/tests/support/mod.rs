//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mavo_core::datasets::{
    associate, decode_probfield, encode_probfield, format_associations, format_kitti_trajectory, format_tum_trajectory,
    load_probfield, load_trajectory_kitti, load_trajectory_tum, load_tum_list,
};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn mavo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mavo"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run mavo")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn read(path: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

/// Each golden-file comparison, by name.
pub fn golden_checks() -> Vec<(&'static str, Result<(), String>)> {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mut out: Vec<(&'static str, Result<(), String>)> = Vec::new();

    out.push((
        "tum list association",
        (|| {
            let rgb = load_tum_list(fixture("rgb.txt")).map_err(|e| e.to_string())?;
            let depth = load_tum_list(fixture("depth.txt")).map_err(|e| e.to_string())?;
            check(rgb.len() == 12 && depth.len() == 13, || {
                format!("{} rgb, {} depth entries", rgb.len(), depth.len())
            })?;
            let text = format_associations(&associate(&rgb, &depth, 0.02, 0.0).map_err(|e| e.to_string())?);
            check(text.as_bytes() == read(fixture("associations.txt")), || {
                "library association differs".into()
            })?;
            let file = dir.join("assoc.txt");
            let o = mavo(&[
                "associate",
                "--first",
                p(&fixture("rgb.txt")),
                "--second",
                p(&fixture("depth.txt")),
                "--out",
                p(&file),
            ]);
            check(code(&o) == 0, || stderr(&o))?;
            check(read(&file) == read(fixture("associations.txt")), || {
                "cli association differs".into()
            })
        })(),
    ));

    out.push((
        "tum trajectory round trip",
        (|| {
            let t = load_trajectory_tum(fixture("trajectory.txt")).map_err(|e| e.to_string())?;
            check(
                format_tum_trajectory(&t).as_bytes() == read(fixture("trajectory.txt")),
                || "library round trip differs".into(),
            )?;
            let file = dir.join("t.txt");
            let o = mavo(&[
                "convert",
                "--input",
                p(&fixture("trajectory.txt")),
                "--output",
                p(&file),
            ]);
            check(code(&o) == 0, || stderr(&o))?;
            check(read(&file) == read(fixture("trajectory.txt")), || {
                "cli round trip differs".into()
            })?;
            let sorted = load_trajectory_tum(fixture("trajectory_unsorted.txt")).map_err(|e| e.to_string())?;
            check(
                format_tum_trajectory(&sorted).as_bytes() == read(fixture("trajectory_sorted.txt")),
                || "unsorted input does not normalize to the sorted fixture".into(),
            )
        })(),
    ));

    out.push((
        "kitti trajectory round trip",
        (|| {
            let t = load_trajectory_kitti(fixture("poses.kitti")).map_err(|e| e.to_string())?;
            check(
                format_kitti_trajectory(&t).as_bytes() == read(fixture("poses.kitti")),
                || "library round trip differs".into(),
            )?;
            let file = dir.join("p.kitti");
            let o = mavo(&["convert", "--input", p(&fixture("poses.kitti")), "--output", p(&file)]);
            check(code(&o) == 0, || stderr(&o))?;
            check(read(&file) == read(fixture("poses.kitti")), || {
                "cli round trip differs".into()
            })?;
            // Rows computed independently from the TUM quaternions.
            let file = dir.join("from_tum.kitti");
            let o = mavo(&[
                "convert",
                "--input",
                p(&fixture("trajectory.txt")),
                "--output",
                p(&file),
            ]);
            check(code(&o) == 0, || stderr(&o))?;
            check(read(&file) == read(fixture("trajectory_as_kitti.kitti")), || {
                "tum to kitti conversion differs".into()
            })
        })(),
    ));

    out.push((
        "pfld round trip",
        (|| {
            for name in ["two_label.pfld", "field_3x2x3.pfld"] {
                let bytes = read(fixture(name));
                let q = load_probfield(fixture(name)).map_err(|e| e.to_string())?;
                check(encode_probfield(&q) == bytes, || {
                    format!("{name} does not re-encode to itself")
                })?;
            }
            let q = decode_probfield(&read(fixture("near_unit.pfld"))).map_err(|e| e.to_string())?;
            let px = q.at(0, 0);
            check((px[0] + px[1] - 1.0).abs() < 1e-12 && px[0] < 0.6005, || {
                format!("near-unit pixel {px:?}")
            })
        })(),
    ));

    out.push((
        "error cases exit with code 2",
        (|| {
            let unused = dir.join("unused.txt");
            for (name, needle) in [
                ("errors/trajectory_7_fields.txt", "line 2"),
                ("errors/trajectory_zero_quaternion.txt", "line 1"),
                ("errors/kitti_11_fields.kitti", "line 2"),
                ("errors/kitti_not_orthonormal.kitti", "orthonormal"),
                ("errors/kitti_reflection.kitti", "reflection"),
            ] {
                let o = mavo(&["convert", "--input", p(&fixture(name)), "--output", p(&unused)]);
                check(code(&o) == 2 && stderr(&o).contains(needle), || {
                    format!("{name}: exit {} {}", code(&o), stderr(&o))
                })?;
            }
            for (name, needle) in [
                ("errors/list_bad_timestamp.txt", "line 3"),
                ("errors/list_missing_path.txt", "line 2"),
            ] {
                let o = mavo(&[
                    "associate",
                    "--first",
                    p(&fixture(name)),
                    "--second",
                    p(&fixture("depth.txt")),
                    "--out",
                    p(&dir.join("a.txt")),
                ]);
                check(code(&o) == 2 && stderr(&o).contains(needle), || {
                    format!("{name}: exit {} {}", code(&o), stderr(&o))
                })?;
            }
            for (name, needle) in [
                ("errors/bad_magic.pfld", "byte 0"),
                ("errors/truncated.pfld", "truncated"),
                ("errors/header_only.pfld", "truncated"),
                ("errors/not_probability.pfld", "byte 16"),
                ("errors/bad_sum.pfld", "tolerance"),
            ] {
                let fields = dir.join(format!("fields-{}", name.replace('/', "-")));
                std::fs::create_dir_all(&fields).unwrap();
                std::fs::copy(fixture(name), fields.join("f.pfld")).unwrap();
                let o = mavo(&[
                    "refine",
                    "--probfields",
                    p(&fields),
                    "--rgb",
                    p(dir),
                    "--out",
                    p(&dir.join("m")),
                ]);
                check(code(&o) == 2 && stderr(&o).contains(needle), || {
                    format!("{name}: exit {} {}", code(&o), stderr(&o))
                })?;
            }
            let o = mavo(&[
                "evaluate",
                "--gt",
                p(&fixture("trajectory.txt")),
                "--est",
                p(&fixture("trajectory.txt")),
                "--out",
                p(&dir.join("m.csv")),
                "--improve-against",
                p(&fixture("errors/metrics_bad_header.csv")),
            ]);
            check(code(&o) == 2 && stderr(&o).contains("line 1"), || {
                format!("bad csv: exit {} {}", code(&o), stderr(&o))
            })?;
            let o = mavo(&[
                "track",
                "--dataset",
                p(&dir.join("no-such-dir")),
                "--out",
                p(&dir.join("t.txt")),
            ]);
            check(code(&o) == 2, || format!("missing dataset: exit {}", code(&o)))
        })(),
    ));
    out
}
