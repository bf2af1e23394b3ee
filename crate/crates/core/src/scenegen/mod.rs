//! Procedural multi-view-plus-depth scenes rendered by analytic ray casting.

mod camera;
mod primitive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{Image, NormParams, ScalarMap};

pub use camera::{camera_arc, Camera, Intrinsics, Vec3, ARC_DEGREES};
pub use primitive::{texture_eval, Hit, Primitive, Shape, Texture};

/// Color of pixels whose ray hits nothing.
pub const BACKGROUND: [f32; 3] = [0.5, 0.5, 0.5];

/// Depth value marking "no surface hit".
pub const NO_HIT: f32 = 0.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraRig {
    Arc {
        count: usize,
        radius: f64,
        lookat: [f64; 3],
        height: f64,
        fov_deg: f64,
    },
    List(Vec<Camera>),
}

/// Rigid per-frame motion: frame `f` moves `primitive` by `f * offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Animation {
    pub primitive: usize,
    pub offset: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub cameras: CameraRig,
    pub primitives: Vec<Primitive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub animation: Option<Animation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_params: Option<NormParams>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthView {
    pub view_id: usize,
    pub frame_id: usize,
    pub image: Image,
    /// Camera-space z of the visible surface; [`NO_HIT`] where nothing is hit.
    pub depth: ScalarMap,
    pub camera: Camera,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.frames < 1 {
            return Err(Error::InvalidArgument("scene needs at least one frame".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("image size must be positive".into()));
        }
        let cams = self.camera_list()?;
        if cams.len() < 2 {
            return Err(Error::InvalidArgument("scene needs at least two cameras".into()));
        }
        for cam in &cams {
            cam.validate()?;
        }
        for p in &self.primitives {
            p.validate()?;
        }
        if let Some(anim) = &self.animation {
            if anim.primitive >= self.primitives.len() {
                return Err(Error::InvalidArgument(format!(
                    "animation targets primitive {} but only {} exist",
                    anim.primitive,
                    self.primitives.len()
                )));
            }
        }
        if let Some(np) = &self.norm_params {
            np.validate()?;
        }
        Ok(())
    }

    pub fn camera_list(&self) -> Result<Vec<Camera>> {
        match &self.cameras {
            CameraRig::Arc {
                count,
                radius,
                lookat,
                height,
                fov_deg,
            } => camera_arc(
                *count,
                *radius,
                Vec3::from(*lookat),
                *height,
                &Intrinsics {
                    width: self.width,
                    height: self.height,
                    fov_deg: *fov_deg,
                },
            ),
            CameraRig::List(list) => Ok(list.clone()),
        }
    }

    /// Primitives as placed at `frame`.
    pub fn primitives_at(&self, frame: usize) -> Vec<Primitive> {
        let mut prims = self.primitives.clone();
        if let Some(anim) = &self.animation {
            let offset = Vec3::from(anim.offset) * frame as f64;
            prims[anim.primitive] = prims[anim.primitive].translated(offset);
        }
        prims
    }

    /// A seeded tabletop scene: a checkered back wall, a noise-textured
    /// floor and a few textured spheres and boxes, seen by `views` cameras
    /// on the standard arc. With more than one frame the first sphere drifts
    /// sideways.
    pub fn desk(seed: u64, width: usize, height: usize, views: usize, frames: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let contrasting = |rng: &mut ChaCha8Rng| -> ([f32; 3], [f32; 3]) {
            let bright = [0, 1, 2].map(|_| rng.random_range(0.6f32..0.95));
            let dark = [0, 1, 2].map(|_| rng.random_range(0.05f32..0.35));
            (bright, dark)
        };
        let mut primitives = Vec::new();

        let (a, b) = contrasting(&mut rng);
        primitives.push(Primitive {
            shape: Shape::Plane {
                point: [0.0, 0.0, 3.0],
                normal: [0.0, 0.0, -1.0],
            },
            texture: Texture::Checker {
                scale: rng.random_range(1.6..2.6),
                color_a: a,
                color_b: b,
            },
        });
        primitives.push(Primitive {
            shape: Shape::Plane {
                point: [0.0, -1.6, 0.0],
                normal: [0.0, 1.0, 0.0],
            },
            texture: Texture::ValueNoise {
                scale: rng.random_range(1.5..3.0),
                seed: rng.random(),
            },
        });

        let n_spheres = rng.random_range(2..=3);
        for _ in 0..n_spheres {
            let radius = rng.random_range(0.35..0.7);
            let center = [
                rng.random_range(-1.6..1.6),
                rng.random_range(-1.0..0.8),
                rng.random_range(-1.2..1.8),
            ];
            let texture = if rng.random_bool(0.5) {
                let (a, b) = contrasting(&mut rng);
                Texture::Checker {
                    scale: rng.random_range(2.5..5.0),
                    color_a: a,
                    color_b: b,
                }
            } else {
                Texture::ValueNoise {
                    scale: rng.random_range(3.0..6.0),
                    seed: rng.random(),
                }
            };
            primitives.push(Primitive {
                shape: Shape::Sphere { center, radius },
                texture,
            });
        }
        let n_boxes = rng.random_range(1..=2);
        for _ in 0..n_boxes {
            let min = [
                rng.random_range(-1.8..1.2),
                -1.6,
                rng.random_range(-1.0..1.5),
            ];
            let size = [
                rng.random_range(0.4..0.9),
                rng.random_range(0.5..1.3),
                rng.random_range(0.4..0.9),
            ];
            let (a, b) = contrasting(&mut rng);
            primitives.push(Primitive {
                shape: Shape::Box {
                    min,
                    max: [min[0] + size[0], min[1] + size[1], min[2] + size[2]],
                },
                texture: Texture::Checker {
                    scale: rng.random_range(2.5..5.0),
                    color_a: a,
                    color_b: b,
                },
            });
        }

        let animation = (frames > 1).then(|| Animation {
            primitive: 2,
            offset: [0.05, 0.0, 0.0],
        });
        Self {
            seed,
            width,
            height,
            frames,
            cameras: CameraRig::Arc {
                count: views,
                radius: 6.0,
                lookat: [0.0, -0.2, 0.5],
                height: 0.6,
                fov_deg: 50.0,
            },
            primitives,
            animation,
            norm_params: None,
        }
    }
}

/// Nearest positive hit per pixel; unhit pixels get [`BACKGROUND`] and [`NO_HIT`].
pub fn raycast(
    camera: &Camera,
    primitives: &[Primitive],
    width: usize,
    height: usize,
) -> (Image, ScalarMap) {
    let origin = camera.center();
    let rot = camera.rotation();
    let rows: Vec<(Vec<[f32; 3]>, Vec<f32>)> = (0..height)
        .into_par_iter()
        .map(|y| {
            let mut colors = Vec::with_capacity(width);
            let mut depths = Vec::with_capacity(width);
            for x in 0..width {
                let dir = camera.ray_direction(x as f64, y as f64);
                let nearest = primitives
                    .iter()
                    .filter_map(|p| p.intersect(&origin, &dir).map(|h| (h, p)))
                    .min_by(|a, b| a.0.t.total_cmp(&b.0.t));
                match nearest {
                    Some((hit, prim)) => {
                        colors.push(texture_eval(&prim.texture, hit.u, hit.v));
                        let z = (rot.row(2).transpose()).dot(&(dir * hit.t));
                        depths.push(z as f32);
                    }
                    None => {
                        colors.push(BACKGROUND);
                        depths.push(NO_HIT);
                    }
                }
            }
            (colors, depths)
        })
        .collect();

    let mut data = Vec::with_capacity(width * height * 3);
    let mut depth = Vec::with_capacity(width * height);
    for (colors, depths) in rows {
        data.extend(colors.into_iter().flatten());
        depth.extend(depths);
    }
    (
        Image::new(width, height, data).expect("texture colors lie in [0, 1]"),
        ScalarMap::new(width, height, depth).expect("finite depths"),
    )
}

/// All `cameras x frames` views, frame-major. Images are quantized to 8 bits
/// so that in-memory views match their PPM files exactly.
pub fn generate_scene(spec: &SceneSpec) -> Result<Vec<GroundTruthView>> {
    spec.validate()?;
    let cameras = spec.camera_list()?;
    let mut views = Vec::with_capacity(cameras.len() * spec.frames);
    for frame_id in 0..spec.frames {
        let prims = spec.primitives_at(frame_id);
        for (view_id, camera) in cameras.iter().enumerate() {
            let (image, depth) = raycast(camera, &prims, spec.width, spec.height);
            views.push(GroundTruthView {
                view_id,
                frame_id,
                image: image.quantized(),
                depth,
                camera: *camera,
            });
        }
    }
    Ok(views)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fronto_camera(w: usize, h: usize) -> Camera {
        Camera {
            fx: 40.0,
            fy: 40.0,
            cx: (w as f64 - 1.0) / 2.0,
            cy: (h as f64 - 1.0) / 2.0,
            r: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            t: [0.0, 0.0, 0.0],
        }
    }

    #[test]
    fn fronto_parallel_plane_gives_constant_depth() {
        let cam = fronto_camera(16, 12);
        let plane = Primitive {
            shape: Shape::Plane {
                point: [0.0, 0.0, 2.5],
                normal: [0.0, 0.0, -1.0],
            },
            texture: Texture::ValueNoise { scale: 2.0, seed: 3 },
        };
        let (_, depth) = raycast(&cam, &[plane], 16, 12);
        assert!(depth.data().iter().all(|&d| (d - 2.5).abs() < 1e-6));
    }

    #[test]
    fn empty_scene_is_background() {
        let (img, depth) = raycast(&fronto_camera(5, 4), &[], 5, 4);
        assert!(img.data().iter().all(|&v| v == 0.5));
        assert!(depth.data().iter().all(|&d| d == NO_HIT));
    }

    #[test]
    fn sphere_on_axis_depth_is_symmetric() {
        let (w, h) = (15, 15);
        let cam = fronto_camera(w, h);
        let sphere = Primitive {
            shape: Shape::Sphere {
                center: [0.0, 0.0, 4.0],
                radius: 1.0,
            },
            texture: Texture::ValueNoise { scale: 2.0, seed: 3 },
        };
        let (_, depth) = raycast(&cam, &[sphere], w, h);
        let center = depth.get(7, 7);
        assert!((center - 3.0).abs() < 1e-6);
        for y in 0..h {
            for x in 0..w {
                let d = depth.get(x, y);
                if d != NO_HIT {
                    assert!(d >= center);
                    let mirrored = depth.get(w - 1 - x, h - 1 - y);
                    assert!((d - mirrored).abs() < 1e-5);
                    assert!((d - depth.get(y, x)).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn depth_reprojects_onto_own_pixel() {
        let spec = SceneSpec::desk(5, 24, 20, 3, 1);
        for view in generate_scene(&spec).unwrap() {
            for y in 0..20 {
                for x in 0..24 {
                    let d = view.depth.get(x, y);
                    if d == NO_HIT {
                        continue;
                    }
                    let p = view.camera.unproject(x as f64, y as f64, d as f64);
                    let (u, v, _) = view.camera.project(&p).unwrap();
                    assert!((u - x as f64).abs() < 1e-6 && (v - y as f64).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn static_frames_are_identical() {
        let mut spec = SceneSpec::desk(9, 16, 16, 2, 2);
        spec.animation = Some(Animation {
            primitive: 0,
            offset: [0.0; 3],
        });
        let views = generate_scene(&spec).unwrap();
        assert_eq!(views.len(), 4);
        assert_eq!(views[0].image, views[2].image);
        assert_eq!(views[1].depth, views[3].depth);
        assert_eq!((views[3].view_id, views[3].frame_id), (1, 1));
    }

    #[test]
    fn animation_moves_pixels() {
        let spec = SceneSpec::desk(9, 32, 32, 2, 2);
        let views = generate_scene(&spec).unwrap();
        assert_ne!(views[0].image, views[2].image);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SceneSpec::desk(11, 20, 16, 3, 1);
        assert_eq!(generate_scene(&spec).unwrap(), generate_scene(&spec).unwrap());
    }

    #[test]
    fn checker_scenes_have_high_frequency_content() {
        for seed in 0..5 {
            let spec = SceneSpec::desk(seed, 48, 48, 3, 1);
            for view in generate_scene(&spec).unwrap() {
                let img = &view.image;
                let (w, h) = (img.width(), img.height());
                let mut busy = 0;
                for y in 0..h {
                    for x in 0..w {
                        let mut mean = [0f32; 3];
                        for (dx, dy) in NEIGHBORS8 {
                            let nx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                            let ny = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                            let p = img.pixel(nx, ny);
                            for c in 0..3 {
                                mean[c] += p[c] / 8.0;
                            }
                        }
                        let p = img.pixel(x, y);
                        if (0..3).any(|c| (mean[c] - p[c]).abs() > 0.1) {
                            busy += 1;
                        }
                    }
                }
                assert!(busy as f64 >= 0.1 * (w * h) as f64, "seed {seed}: {busy} busy pixels");
            }
        }
    }

    const NEIGHBORS8: [(i64, i64); 8] = [
        (-1, -1),
        (0, -1),
        (1, -1),
        (-1, 0),
        (1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
    ];

    #[test]
    fn spec_validation() {
        let mut spec = SceneSpec::desk(1, 8, 8, 2, 1);
        spec.frames = 0;
        assert!(spec.validate().is_err());
        let mut spec = SceneSpec::desk(1, 8, 8, 2, 1);
        spec.cameras = CameraRig::List(vec![fronto_camera(8, 8)]);
        assert!(spec.validate().is_err());
        let spec = SceneSpec::desk(1, 8, 8, 2, 1);
        let json = serde_json::to_string(&spec).unwrap();
        let back: SceneSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
