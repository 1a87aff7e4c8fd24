//! Rigid transforms and closed-form point-set alignment.

use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

pub type Point3 = Vector3<f64>;

/// Rigid transform `x -> R x + t`. The rotation is kept as a unit quaternion
/// with a nonnegative scalar part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: UnitQuaternion<f64>,
    translation: Vector3<f64>,
}

fn canonical(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    if q.w < 0.0 {
        UnitQuaternion::new_unchecked(-q.into_inner())
    } else {
        q
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation: canonical(rotation),
            translation,
        }
    }

    /// Builds a pose from raw quaternion components, normalizing them.
    /// Fails on a zero or non-finite quaternion.
    pub fn from_components(translation: [f64; 3], qx: f64, qy: f64, qz: f64, qw: f64) -> Result<Self> {
        let q = Quaternion::new(qw, qx, qy, qz);
        let norm = q.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::invalid("quaternion has zero or non-finite norm"));
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("translation is not finite"));
        }
        Ok(Self::new(
            UnitQuaternion::from_quaternion(q),
            Vector3::from(translation),
        ))
    }

    pub fn from_translation(t: [f64; 3]) -> Self {
        Self::new(UnitQuaternion::identity(), Vector3::from(t))
    }

    /// Rotation about `axis` by `angle` radians, no translation.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        let axis = nalgebra::Unit::new_normalize(axis);
        Self::new(UnitQuaternion::from_axis_angle(&axis, angle), Vector3::zeros())
    }

    pub fn from_rotation_matrix(r: &Matrix3<f64>, t: Vector3<f64>) -> Self {
        let rot = Rotation3::from_matrix_unchecked(*r);
        Self::new(UnitQuaternion::from_rotation_matrix(&rot), t)
    }

    pub fn rotation(&self) -> &UnitQuaternion<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        *self.rotation.to_rotation_matrix().matrix()
    }

    /// `[qx, qy, qz, qw]`.
    pub fn quaternion_xyzw(&self) -> [f64; 4] {
        let q = self.rotation.quaternion();
        [q.i, q.j, q.k, q.w]
    }

    pub fn transform_point(&self, p: &Point3) -> Point3 {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Pose) -> Pose {
        let q = self.rotation.into_inner() * other.rotation.into_inner();
        Pose::new(
            UnitQuaternion::new_normalize(q),
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.rotation.inverse();
        Pose::new(inv, -(inv * self.translation))
    }

    /// Rotation magnitude in degrees, in `[0, 180]`.
    pub fn rotation_angle_deg(&self) -> f64 {
        let q = self.rotation.quaternion();
        (2.0 * q.imag().norm().atan2(q.w.abs())).to_degrees()
    }

    pub fn translation_norm(&self) -> f64 {
        self.translation.norm()
    }
}

impl std::ops::Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

impl std::ops::Mul<&Pose> for &Pose {
    type Output = Pose;

    fn mul(self, rhs: &Pose) -> Pose {
        self.compose(rhs)
    }
}

pub fn compose(a: &Pose, b: &Pose) -> Pose {
    a.compose(b)
}

pub fn inverse(p: &Pose) -> Pose {
    p.inverse()
}

pub fn rotation_angle(p: &Pose) -> f64 {
    p.rotation_angle_deg()
}

/// Time-stamped poses with strictly increasing timestamps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    entries: Vec<(f64, Pose)>,
}

impl Trajectory {
    pub fn new(entries: Vec<(f64, Pose)>) -> Result<Self> {
        if let Some(w) = entries.windows(2).find(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid(format!(
                "trajectory timestamps not strictly increasing: {} then {}",
                w[0].0, w[1].0
            )));
        }
        if entries.iter().any(|(t, _)| !t.is_finite()) {
            return Err(Error::invalid("trajectory timestamp is not finite"));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, Pose)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn timestamps(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(t, _)| *t)
    }

    pub fn poses(&self) -> impl Iterator<Item = &Pose> + '_ {
        self.entries.iter().map(|(_, p)| p)
    }

    /// Left-multiplies every pose by `g`.
    pub fn transformed(&self, g: &Pose) -> Trajectory {
        Trajectory {
            entries: self.entries.iter().map(|(t, p)| (*t, g.compose(p))).collect(),
        }
    }
}

/// Least-squares similarity `dst ≈ s R src + t` (Umeyama). With
/// `with_scale == false`, `s` is fixed to 1 and this is the Kabsch solution.
/// Collinear or coincident points leave the rotation undetermined and are
/// rejected; see [`align_points_lenient`].
pub fn align_points(src: &[Point3], dst: &[Point3], with_scale: bool) -> Result<(Pose, f64)> {
    if src.len() < 3 && src.len() == dst.len() {
        return Err(Error::Degenerate(format!(
            "alignment needs at least 3 points, got {}",
            src.len()
        )));
    }
    umeyama(src, dst, with_scale, true)
}

/// Like [`align_points`], but a degenerate configuration yields one of its
/// many least-squares minimizers instead of an error. Useful for scoring
/// trajectories that are static or move along a line.
pub fn align_points_lenient(src: &[Point3], dst: &[Point3], with_scale: bool) -> Result<(Pose, f64)> {
    if src.is_empty() && dst.is_empty() {
        return Err(Error::Degenerate("alignment needs at least one point".into()));
    }
    umeyama(src, dst, with_scale, false)
}

fn umeyama(src: &[Point3], dst: &[Point3], with_scale: bool, strict: bool) -> Result<(Pose, f64)> {
    if src.len() != dst.len() {
        return Err(Error::invalid(format!(
            "alignment needs equal lengths, got {} and {}",
            src.len(),
            dst.len()
        )));
    }
    let n = src.len() as f64;
    let mu_s = src.iter().sum::<Point3>() / n;
    let mu_d = dst.iter().sum::<Point3>() / n;

    let mut h = Matrix3::zeros();
    let mut var_s = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let sc = s - mu_s;
        let dc = d - mu_d;
        h += dc * sc.transpose();
        var_s += sc.norm_squared();
    }
    h /= n;
    var_s /= n;

    let svd = h.svd(true, true);
    let sv = svd.singular_values;
    let mut sorted = sv.as_slice().to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let r = if !(sorted[0] > 0.0) {
        if strict {
            return Err(Error::Degenerate("points coincide".into()));
        }
        Matrix3::identity()
    } else {
        if strict && sorted[1] <= 1e-10 * sorted[0] {
            return Err(Error::Degenerate(
                "cross-covariance has rank < 2 (collinear or coincident points)".into(),
            ));
        }
        let u = svd.u.expect("svd u");
        let v_t = svd.v_t.expect("svd v_t");
        let mut d = Matrix3::identity();
        if (u * v_t).determinant() < 0.0 {
            let weakest = (0..3).min_by(|&a, &b| sv[a].partial_cmp(&sv[b]).unwrap()).unwrap();
            d[(weakest, weakest)] = -1.0;
        }
        u * d * v_t
    };
    let scale = if with_scale {
        if var_s <= 0.0 {
            if strict {
                return Err(Error::Degenerate("source points coincide".into()));
            }
            1.0
        } else {
            // trace(R^T H) equals the sign-corrected singular value sum.
            (r.transpose() * h).trace() / var_s
        }
    } else {
        1.0
    };
    let t = mu_d - scale * (r * mu_s);
    Ok((Pose::from_rotation_matrix(&r, t), scale))
}

/// Rigid (no scale) least-squares alignment of `src` onto `dst`.
pub fn rigid_align(src: &[Point3], dst: &[Point3]) -> Result<Pose> {
    align_points(src, dst, false).map(|(p, _)| p)
}
