use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{self, NormParams};
use crate::scenegen::{generate_scene, Camera, GroundTruthView, SceneSpec};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestView {
    pub view_id: usize,
    pub frame_id: usize,
    /// PPM path relative to the manifest directory.
    pub image: String,
    /// PFM path relative to the manifest directory.
    pub depth: String,
    pub camera: Camera,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub norm_params: NormParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SceneSpec>,
    pub views: Vec<ManifestView>,
}

/// Ground-truth views of one scene, sorted by (frame, view).
#[derive(Clone, Debug)]
pub struct Scene {
    pub width: usize,
    pub height: usize,
    pub norm_params: NormParams,
    pub spec: Option<SceneSpec>,
    pub views: Vec<GroundTruthView>,
}

pub fn view_file_stem(view_id: usize, frame_id: usize) -> String {
    format!("f{frame_id:03}_v{view_id:03}")
}

impl Scene {
    pub fn new(views: Vec<GroundTruthView>, norm_params: NormParams, spec: Option<SceneSpec>) -> Result<Self> {
        let first = views
            .first()
            .ok_or_else(|| Error::InvalidArgument("scene has no views".into()))?;
        let (width, height) = (first.image.width(), first.image.height());
        let mut seen = BTreeSet::new();
        for v in &views {
            if v.image.width() != width || v.image.height() != height {
                return Err(Error::ShapeMismatch(format!(
                    "view {} frame {} is {}x{}, expected {width}x{height}",
                    v.view_id,
                    v.frame_id,
                    v.image.width(),
                    v.image.height()
                )));
            }
            if v.depth.width() != width || v.depth.height() != height {
                return Err(Error::ShapeMismatch(format!("depth of view {} frame {}", v.view_id, v.frame_id)));
            }
            if !seen.insert((v.frame_id, v.view_id)) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate view {} in frame {}",
                    v.view_id, v.frame_id
                )));
            }
        }
        norm_params.validate()?;
        let mut views = views;
        views.sort_by_key(|v| (v.frame_id, v.view_id));
        let scene = Self {
            width,
            height,
            norm_params,
            spec,
            views,
        };
        let ids = scene.view_ids();
        for f in scene.frame_ids() {
            let in_frame: Vec<usize> = scene.frame(f).iter().map(|v| v.view_id).collect();
            if in_frame != ids {
                return Err(Error::InvalidArgument(format!("frame {f} does not contain every view")));
            }
        }
        Ok(scene)
    }

    pub fn from_spec(spec: &SceneSpec) -> Result<Self> {
        let views = generate_scene(spec)?;
        Self::new(views, spec.norm_params.unwrap_or_default(), Some(spec.clone()))
    }

    pub fn view_ids(&self) -> Vec<usize> {
        self.views
            .iter()
            .map(|v| v.view_id)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn frame_ids(&self) -> Vec<usize> {
        self.views
            .iter()
            .map(|v| v.frame_id)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn frame(&self, frame_id: usize) -> Vec<&GroundTruthView> {
        self.views.iter().filter(|v| v.frame_id == frame_id).collect()
    }

    pub fn view(&self, view_id: usize, frame_id: usize) -> Option<&GroundTruthView> {
        self.views
            .iter()
            .find(|v| v.view_id == view_id && v.frame_id == frame_id)
    }

    /// Writes PPM/PFM files and `manifest.json` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let mut entries = Vec::with_capacity(self.views.len());
        for v in &self.views {
            let stem = view_file_stem(v.view_id, v.frame_id);
            let image = format!("views/{stem}.ppm");
            let depth = format!("views/{stem}_depth.pfm");
            imgio::write_ppm(&v.image, &dir.join(&image))?;
            imgio::write_pfm_map(&v.depth, &dir.join(&depth))?;
            entries.push(ManifestView {
                view_id: v.view_id,
                frame_id: v.frame_id,
                image,
                depth,
                camera: v.camera,
            });
        }
        let manifest = Manifest {
            width: self.width,
            height: self.height,
            frames: self.frame_ids().len(),
            norm_params: self.norm_params,
            spec: self.spec.clone(),
            views: entries,
        };
        let path = dir.join(MANIFEST_FILE);
        imgio::write_atomic(&path, &to_json(&manifest)?)?;
        Ok(path)
    }

    pub fn load(manifest_path: &Path) -> Result<Self> {
        let bytes = std::fs::read(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
        let manifest: Manifest =
            serde_json::from_slice(&bytes).map_err(|e| Error::parse(manifest_path, e))?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let mut views = Vec::with_capacity(manifest.views.len());
        for entry in &manifest.views {
            entry.camera.validate()?;
            views.push(GroundTruthView {
                view_id: entry.view_id,
                frame_id: entry.frame_id,
                image: imgio::read_ppm(&base.join(&entry.image))?,
                depth: imgio::read_pfm_map(&base.join(&entry.depth))?,
                camera: entry.camera,
            });
        }
        let scene = Self::new(views, manifest.norm_params, manifest.spec)?;
        if scene.width != manifest.width || scene.height != manifest.height {
            return Err(Error::parse(manifest_path, "declared size does not match the view files"));
        }
        Ok(scene)
    }
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::InvalidArgument(format!("json encoding failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}
