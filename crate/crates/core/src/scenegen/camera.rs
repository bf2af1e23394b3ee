use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Pinhole camera with a world-to-camera pose `x_cam = R x_world + t`.
///
/// Pixel `(x, y)` has its center at continuous image coordinates `(x, y)`;
/// camera `y` points down the image and `z` forward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Row-major world-to-camera rotation.
    #[serde(rename = "R")]
    pub r: [[f64; 3]; 3],
    pub t: [f64; 3],
}

impl Camera {
    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        let r = self.rotation();
        let err = (r.transpose() * r - Matrix3::identity()).abs().max();
        if !(err < 1e-6) {
            return Err(Error::InvalidArgument(format!(
                "rotation is not orthonormal (|R^T R - I| = {err:e})"
            )));
        }
        Ok(())
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        let r = &self.r;
        Matrix3::new(
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        )
    }

    pub fn translation(&self) -> Vec3 {
        Vec3::from(self.t)
    }

    /// Camera center in world coordinates, `-R^T t`.
    pub fn center(&self) -> Vec3 {
        -(self.rotation().transpose() * self.translation())
    }

    pub fn to_camera(&self, world: &Vec3) -> Vec3 {
        self.rotation() * world + self.translation()
    }

    /// Image coordinates and camera-space depth, or `None` behind the camera.
    pub fn project(&self, world: &Vec3) -> Option<(f64, f64, f64)> {
        let p = self.to_camera(world);
        if p.z <= 0.0 {
            return None;
        }
        Some((
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
            p.z,
        ))
    }

    /// World point at camera-space depth `z` along the ray through `(u, v)`.
    pub fn unproject(&self, u: f64, v: f64, z: f64) -> Vec3 {
        let cam = Vec3::new((u - self.cx) / self.fx * z, (v - self.cy) / self.fy * z, z);
        self.rotation().transpose() * (cam - self.translation())
    }

    /// Unit world-space direction of the ray through `(u, v)`.
    pub fn ray_direction(&self, u: f64, v: f64) -> Vec3 {
        let cam = Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0);
        (self.rotation().transpose() * cam).normalize()
    }

    /// Camera looking from `eye` at `target`, with `up` roughly world-up.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3, intrinsics: &Intrinsics) -> Result<Self> {
        let forward = target - eye;
        if forward.norm() == 0.0 {
            return Err(Error::InvalidArgument("eye coincides with look-at point".into()));
        }
        let z = forward.normalize();
        let down = -up + z * up.dot(&z);
        if down.norm() < 1e-12 {
            return Err(Error::InvalidArgument("up vector parallel to viewing direction".into()));
        }
        let y = down.normalize();
        let x = y.cross(&z);
        let rot = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        let t = -(rot * eye);
        let (fx, fy, cx, cy) = intrinsics.pinhole();
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            r: [
                [rot[(0, 0)], rot[(0, 1)], rot[(0, 2)]],
                [rot[(1, 0)], rot[(1, 1)], rot[(1, 2)]],
                [rot[(2, 0)], rot[(2, 1)], rot[(2, 2)]],
            ],
            t: [t.x, t.y, t.z],
        })
    }
}

/// Square-pixel intrinsics derived from a horizontal field of view.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub width: usize,
    pub height: usize,
    pub fov_deg: f64,
}

impl Intrinsics {
    pub fn pinhole(&self) -> (f64, f64, f64, f64) {
        let f = (self.width as f64 / 2.0) / (self.fov_deg.to_radians() / 2.0).tan();
        (
            f,
            f,
            (self.width as f64 - 1.0) / 2.0,
            (self.height as f64 - 1.0) / 2.0,
        )
    }
}

/// Angular extent of the camera arc.
pub const ARC_DEGREES: f64 = 60.0;

/// `n` cameras evenly spaced on a horizontal 60° arc of `radius` around
/// `lookat`, all aimed at it. `height` is the vertical offset of the arc
/// above the look-at point. Cameras are ordered left to right.
pub fn camera_arc(
    n: usize,
    radius: f64,
    lookat: Vec3,
    height: f64,
    intrinsics: &Intrinsics,
) -> Result<Vec<Camera>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("camera arc needs at least 2 cameras, got {n}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("arc radius must be positive, got {radius}")));
    }
    let half = ARC_DEGREES.to_radians() / 2.0;
    (0..n)
        .map(|k| {
            let phi = -half + 2.0 * half * k as f64 / (n - 1) as f64;
            let eye = lookat + Vec3::new(radius * phi.sin(), height, -radius * phi.cos());
            Camera::look_at(eye, lookat, Vec3::y(), intrinsics)
        })
        .collect()
}
