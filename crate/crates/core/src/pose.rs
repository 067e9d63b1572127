//! Rigid transforms stored as an explicit rotation matrix plus translation.
//!
//! Poses are persisted as twelve decimal numbers, so the rotation is kept as a
//! plain matrix rather than a quaternion: a quaternion round trip would not be
//! bitwise stable.

use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Point3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PoseParseError {
    #[error("expected 12 numbers, found {0}")]
    Count(usize),
    #[error("invalid number `{0}`")]
    Number(String),
}

/// A rigid transform `x -> rot * x + trans`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 12]", from = "[f64; 12]")]
pub struct Pose {
    pub rot: Matrix3<f64>,
    pub trans: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rot: Matrix3::identity(),
            trans: Vector3::zeros(),
        }
    }

    pub fn new(rot: Matrix3<f64>, trans: Vector3<f64>) -> Self {
        Self { rot, trans }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self::new(Matrix3::identity(), t)
    }

    pub fn from_rotation(rot: Matrix3<f64>) -> Self {
        Self::new(rot, Vector3::zeros())
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let r = Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle);
        Self::from_rotation(*r.matrix())
    }

    /// Rotation about world z.
    pub fn rot_z(yaw: f64) -> Self {
        let (s, c) = yaw.sin_cos();
        Self::from_rotation(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    /// Planar tabletop transform: translate by `(x, y)` after a yaw.
    pub fn planar(x: f64, y: f64, yaw: f64) -> Self {
        Self::from_translation(Vector3::new(x, y, 0.0)) * Self::rot_z(yaw)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rot.transpose();
        Self::new(rt, -(rt * self.trans))
    }

    pub fn transform_point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rot * p.coords + self.trans)
    }

    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rot * v
    }

    pub fn axis(&self, i: usize) -> Vector3<f64> {
        self.rot.column(i).into_owned()
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rot);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.trans);
        m
    }

    /// Max deviation of `RᵀR` from identity.
    pub fn orthonormality_error(&self) -> f64 {
        (self.rot.transpose() * self.rot - Matrix3::identity()).abs().max()
    }

    /// Translation distance and rotation angle between two poses.
    pub fn distance(&self, other: &Pose) -> (f64, f64) {
        let dp = (self.trans - other.trans).norm();
        (dp, rotation_log(&(self.rot.transpose() * other.rot)).norm())
    }

    /// Row-major rotation followed by translation.
    pub fn to_array(&self) -> [f64; 12] {
        let r = &self.rot;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            self.trans.x,
            self.trans.y,
            self.trans.z,
        ]
    }

    pub fn from_array(a: &[f64; 12]) -> Self {
        Self::new(
            Matrix3::new(a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]),
            Vector3::new(a[9], a[10], a[11]),
        )
    }

    /// Fixed text form: 12 numbers, 17 significant digits, space separated.
    pub fn encode(&self) -> String {
        encode_numbers(&self.to_array())
    }

    pub fn decode(s: &str) -> Result<Self, PoseParseError> {
        let v = decode_numbers(s)?;
        let a: [f64; 12] = v
            .as_slice()
            .try_into()
            .map_err(|_| PoseParseError::Count(v.len()))?;
        Ok(Self::from_array(&a))
    }
}

impl From<Pose> for [f64; 12] {
    fn from(p: Pose) -> Self {
        p.to_array()
    }
}

impl From<[f64; 12]> for Pose {
    fn from(a: [f64; 12]) -> Self {
        Pose::from_array(&a)
    }
}

impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        Pose::new(self.rot * rhs.rot, self.rot * rhs.trans + self.trans)
    }
}

impl Mul<&Pose> for &Pose {
    type Output = Pose;

    fn mul(self, rhs: &Pose) -> Pose {
        *self * *rhs
    }
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

/// Rotation vector (axis times angle) of a rotation matrix, accurate for
/// small angles and near a half turn.
pub fn rotation_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let w = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]) * 0.5;
    let s = w.norm();
    let c = (r.trace() - 1.0) * 0.5;
    let angle = s.atan2(c);
    if s > 1e-6 {
        return w * (angle / s);
    }
    if c > 0.0 {
        // first order, angle ~ s
        return w;
    }
    // half turn: axis from the symmetric part
    let b = (r + r.transpose()) * 0.5 - Matrix3::identity() * c;
    let mut k = 0;
    for i in 1..3 {
        if b[(i, i)] > b[(k, k)] {
            k = i;
        }
    }
    let mut axis = b.column(k).into_owned().normalize();
    if axis.dot(&w) < 0.0 {
        axis = -axis;
    }
    axis * angle
}

/// Formats a float with 17 significant digits; parsing the result recovers the
/// exact bits for every finite double.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn encode_numbers(xs: &[f64]) -> String {
    let mut s = String::with_capacity(xs.len() * 24);
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&fmt_f64(*x));
    }
    s
}

pub fn decode_numbers(s: &str) -> Result<Vec<f64>, PoseParseError> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| PoseParseError::Number(t.to_string())))
        .collect()
}

pub fn encode_vec3(v: &Vector3<f64>) -> String {
    encode_numbers(&[v.x, v.y, v.z])
}

pub fn decode_vec3(s: &str) -> Result<Vector3<f64>, PoseParseError> {
    let v = decode_numbers(s)?;
    if v.len() != 3 {
        return Err(PoseParseError::Count(v.len()));
    }
    Ok(Vector3::new(v[0], v[1], v[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compose_and_invert() {
        let a = Pose::from_axis_angle(&Vector3::new(1.0, 2.0, 3.0), 0.7)
            * Pose::from_translation(Vector3::new(0.1, -0.2, 0.3));
        let id = a * a.inverse();
        assert!((id.rot - Matrix3::identity()).abs().max() < 1e-12);
        assert!(id.trans.norm() < 1e-12);
    }

    #[test]
    fn planar_is_translate_after_yaw() {
        let p = Pose::planar(1.0, 2.0, std::f64::consts::FRAC_PI_2);
        let q = p.transform_point(&Point3::new(1.0, 0.0, 0.0));
        assert!((q - Point3::new(1.0, 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn decode_rejects_wrong_count() {
        assert_eq!(Pose::decode("1 2 3"), Err(PoseParseError::Count(3)));
        assert!(matches!(Pose::decode("a b"), Err(PoseParseError::Number(_))));
    }

    proptest! {
        #[test]
        fn rotation_log_inverts_exp(
            a in proptest::array::uniform3(-1.0f64..1.0),
            angle in prop_oneof![0.0f64..1e-7, 0.0f64..std::f64::consts::PI, (std::f64::consts::PI - 1e-7)..=std::f64::consts::PI],
        ) {
            let axis = Vector3::new(a[0], a[1], a[2]);
            prop_assume!(axis.norm() > 0.1);
            let axis = axis.normalize();
            let r = *Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).matrix();
            let w = rotation_log(&r);
            prop_assert!((w.norm() - angle).abs() < 1e-9);
            let back = *Rotation3::new(w).matrix();
            prop_assert!((back - r).abs().max() < 1e-9);
        }

        #[test]
        fn encoding_is_bitwise_stable(xs in proptest::array::uniform12(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO)) {
            let p = Pose::from_array(&xs);
            let q = Pose::decode(&p.encode()).unwrap();
            for (a, b) in p.to_array().iter().zip(q.to_array().iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
