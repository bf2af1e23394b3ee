use serde::{Deserialize, Serialize};

use super::camera::Vec3;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Plane { point: [f64; 3], normal: [f64; 3] },
    Sphere { center: [f64; 3], radius: f64 },
    Box { min: [f64; 3], max: [f64; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Texture {
    Checker {
        scale: f64,
        color_a: [f32; 3],
        color_b: [f32; 3],
    },
    ValueNoise { scale: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub shape: Shape,
    pub texture: Texture,
}

/// Ray parameter of the nearest hit plus surface coordinates there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

impl Primitive {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match &self.shape {
            Shape::Plane { normal, .. } => {
                if Vec3::from(*normal).norm() == 0.0 {
                    return bad("plane normal must be nonzero".into());
                }
            }
            Shape::Sphere { radius, .. } => {
                if !(*radius > 0.0) {
                    return bad(format!("sphere radius must be positive, got {radius}"));
                }
            }
            Shape::Box { min, max } => {
                if (0..3).any(|i| !(min[i] < max[i])) {
                    return bad(format!("box min {min:?} must be below max {max:?}"));
                }
            }
        }
        match &self.texture {
            Texture::Checker {
                scale,
                color_a,
                color_b,
            } => {
                if !(*scale > 0.0) {
                    return bad(format!("texture scale must be positive, got {scale}"));
                }
                if color_a.iter().chain(color_b).any(|c| !(0.0..=1.0).contains(c)) {
                    return bad("checker colors must lie in [0, 1]".into());
                }
            }
            Texture::ValueNoise { scale, .. } => {
                if !(*scale > 0.0) {
                    return bad(format!("texture scale must be positive, got {scale}"));
                }
            }
        }
        Ok(())
    }

    /// Copy of this primitive moved by `offset`.
    pub fn translated(&self, offset: Vec3) -> Self {
        let add = |p: &[f64; 3]| [p[0] + offset.x, p[1] + offset.y, p[2] + offset.z];
        let shape = match &self.shape {
            Shape::Plane { point, normal } => Shape::Plane {
                point: add(point),
                normal: *normal,
            },
            Shape::Sphere { center, radius } => Shape::Sphere {
                center: add(center),
                radius: *radius,
            },
            Shape::Box { min, max } => Shape::Box {
                min: add(min),
                max: add(max),
            },
        };
        Self {
            shape,
            texture: self.texture.clone(),
        }
    }

    /// Nearest intersection with strictly positive ray parameter.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3) -> Option<Hit> {
        const EPS: f64 = 1e-9;
        match &self.shape {
            Shape::Plane { point, normal } => {
                let n = Vec3::from(*normal).normalize();
                let p0 = Vec3::from(*point);
                let denom = dir.dot(&n);
                if denom.abs() < 1e-12 {
                    return None;
                }
                let t = (p0 - origin).dot(&n) / denom;
                if t <= EPS {
                    return None;
                }
                let (t1, t2) = tangent_basis(&n);
                let rel = origin + dir * t - p0;
                Some(Hit {
                    t,
                    u: rel.dot(&t1),
                    v: rel.dot(&t2),
                })
            }
            Shape::Sphere { center, radius } => {
                let c = Vec3::from(*center);
                let oc = origin - c;
                let a = dir.dot(dir);
                let b = oc.dot(dir);
                let disc = b * b - a * (oc.dot(&oc) - radius * radius);
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                let t = [(-b - sq) / a, (-b + sq) / a]
                    .into_iter()
                    .find(|&t| t > EPS)?;
                let q = (origin + dir * t - c) / *radius;
                Some(Hit {
                    t,
                    u: q.z.atan2(q.x) * radius,
                    v: q.y.clamp(-1.0, 1.0).acos() * radius,
                })
            }
            Shape::Box { min, max } => {
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                let mut near_axis = 0;
                let mut far_axis = 0;
                for i in 0..3 {
                    if dir[i].abs() < 1e-15 {
                        if origin[i] < min[i] || origin[i] > max[i] {
                            return None;
                        }
                        continue;
                    }
                    let mut t0 = (min[i] - origin[i]) / dir[i];
                    let mut t1 = (max[i] - origin[i]) / dir[i];
                    if t0 > t1 {
                        std::mem::swap(&mut t0, &mut t1);
                    }
                    if t0 > t_near {
                        t_near = t0;
                        near_axis = i;
                    }
                    if t1 < t_far {
                        t_far = t1;
                        far_axis = i;
                    }
                }
                if t_near > t_far {
                    return None;
                }
                let (t, axis) = if t_near > EPS {
                    (t_near, near_axis)
                } else if t_far > EPS {
                    (t_far, far_axis)
                } else {
                    return None;
                };
                let p = origin + dir * t;
                let (a, b) = match axis {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                Some(Hit {
                    t,
                    u: p[a] - min[a],
                    v: p[b] - min[b],
                })
            }
        }
    }
}

fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = n.cross(&helper).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

/// Color of `texture` at surface coordinates `(u, v)`.
pub fn texture_eval(texture: &Texture, u: f64, v: f64) -> [f32; 3] {
    match texture {
        Texture::Checker {
            scale,
            color_a,
            color_b,
        } => {
            let cell = (u * scale).floor() as i64 + (v * scale).floor() as i64;
            if cell.rem_euclid(2) == 0 {
                *color_a
            } else {
                *color_b
            }
        }
        Texture::ValueNoise { scale, seed } => {
            let mut rgb = [0f32; 3];
            for (c, out) in rgb.iter_mut().enumerate() {
                let coarse = value_noise(u * scale, v * scale, *seed, c as u64);
                let fine = value_noise(u * scale * 2.0, v * scale * 2.0, *seed ^ 0x9e37, c as u64);
                *out = ((2.0 * coarse + fine) / 3.0).clamp(0.0, 1.0) as f32;
            }
            rgb
        }
    }
}

fn value_noise(x: f64, y: f64, seed: u64, channel: u64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let sx = smoothstep(x - x0);
    let sy = smoothstep(y - y0);
    let (ix, iy) = (x0 as i64, y0 as i64);
    let l = |dx: i64, dy: i64| lattice(ix + dx, iy + dy, seed, channel);
    let top = l(0, 0) + (l(1, 0) - l(0, 0)) * sx;
    let bottom = l(0, 1) + (l(1, 1) - l(0, 1)) * sx;
    top + (bottom - top) * sy
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Hashes a lattice point to `[0, 1]`.
fn lattice(ix: i64, iy: i64, seed: u64, channel: u64) -> f64 {
    let mut h = seed
        ^ (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ channel.wrapping_mul(0x1656_67B1_9E37_79F9);
    // splitmix64 finalizer
    h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    h ^= h >> 31;
    (h >> 11) as f64 / (1u64 << 53) as f64
}
