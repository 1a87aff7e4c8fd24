//! Top-down trajectory plot. Camera x runs right and z runs up the page.

use std::fmt::Write as _;

use mavo_core::geometry::Point3;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;

fn polyline(out: &mut String, id: &str, color: &str, pts: &[(f64, f64)]) {
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    writeln!(
        out,
        r#"  <polyline id="{id}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
        coords.join(" ")
    )
    .unwrap();
}

pub fn trajectory_svg(gt: &[Point3], est: &[Point3]) -> String {
    let all = gt.iter().chain(est);
    let (mut x0, mut x1, mut z0, mut z1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        z0 = z0.min(p.z);
        z1 = z1.max(p.z);
    }
    if !x0.is_finite() {
        (x0, x1, z0, z1) = (0.0, 1.0, 0.0, 1.0);
    }
    // Same scale on both axes; a degenerate extent still gets 1 cm.
    let span = (x1 - x0).max(z1 - z0).max(0.01);
    let s = (SIZE - 2.0 * MARGIN) / span;
    let (cx, cz) = ((x0 + x1) / 2.0, (z0 + z1) / 2.0);
    let map = |p: &Point3| (SIZE / 2.0 + (p.x - cx) * s, SIZE / 2.0 - (p.z - cz) * s);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#).unwrap();
    polyline(
        &mut out,
        "ground-truth",
        "black",
        &gt.iter().map(map).collect::<Vec<_>>(),
    );
    polyline(
        &mut out,
        "estimate",
        "#d62728",
        &est.iter().map(map).collect::<Vec<_>>(),
    );
    writeln!(
        out,
        r#"  <text x="10" y="20" font-family="sans-serif" font-size="14">ground truth</text>"#
    )
    .unwrap();
    writeln!(
        out,
        r##"  <text x="10" y="38" font-family="sans-serif" font-size="14" fill="#d62728">estimate</text>"##
    )
    .unwrap();
    writeln!(
        out,
        r#"  <text x="10" y="{}" font-family="sans-serif" font-size="12">x [m] right, z [m] up; extent {span:.3} m</text>"#,
        SIZE - 10.0
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_paths_inside_the_canvas() {
        let gt: Vec<Point3> = (0..5)
            .map(|i| Point3::new(i as f64, 0.0, (i * i) as f64 * 0.1))
            .collect();
        let est: Vec<Point3> = gt.iter().map(|p| p + Point3::new(0.05, 0.0, 0.0)).collect();
        let svg = trajectory_svg(&gt, &est);
        assert_eq!(svg.matches("<polyline").count(), 2);
        for pair in svg.split("points=\"").skip(1).map(|s| s.split('"').next().unwrap()) {
            for c in pair.split([' ', ',']) {
                let v: f64 = c.parse().unwrap();
                assert!((0.0..=SIZE).contains(&v));
            }
        }
        let still = trajectory_svg(&[Point3::zeros(); 3], &[Point3::zeros(); 3]);
        assert!(still.contains("300.00,300.00"));
    }
}
