//! In-memory session store with optional directory persistence.
//!
//! Each session has its own reader/writer lock: canvas and config writes are
//! exclusive, analyses hold a shared lock for their whole computation and so
//! see one consistent snapshot. Caches sit behind a separate mutex and only
//! ever hold results that a fresh computation would reproduce exactly.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock, RwLockReadGuard, RwLockWriteGuard};

use drawscaffold_core::imagecore::ImageBuffer;
use drawscaffold_core::palette::{ClusterMode, LabImage, Palette, PaletteConfig, PaletteSource};
use drawscaffold_core::segmentation::SegmentationResult;
use serde::Serialize;

use crate::config::SessionConfig;
use crate::error::{ServiceError, ServiceResult};

const CACHE_LIMIT: usize = 64;

#[derive(Debug)]
pub struct Canvas {
    pub image: ImageBuffer,
    pub lab: LabImage,
    /// Bumped on every canvas write; part of canvas cache keys.
    pub version: u64,
}

#[derive(Debug)]
pub struct SessionState {
    pub reference: ImageBuffer,
    pub reference_lab: LabImage,
    pub canvas: Option<Canvas>,
    pub config: SessionConfig,
}

impl SessionState {
    pub fn canvas(&self) -> ServiceResult<&Canvas> {
        self.canvas.as_ref().ok_or(ServiceError::NoCanvas)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct PaletteKey {
    source: PaletteSource,
    mode: ClusterMode,
    config: String,
    version: u64,
}

#[derive(Default)]
struct Cache {
    palettes: HashMap<PaletteKey, Arc<Palette>>,
    segmentations: HashMap<String, Arc<SegmentationResult>>,
}

pub struct Session {
    pub id: String,
    state: RwLock<SessionState>,
    cache: Mutex<Cache>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionInfo {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub has_canvas: bool,
    pub canvas_version: Option<u64>,
    pub config: SessionConfig,
}

impl Session {
    fn new(id: String, reference: ImageBuffer, config: SessionConfig) -> Self {
        let reference_lab = LabImage::new(&reference);
        Self {
            id,
            state: RwLock::new(SessionState {
                reference,
                reference_lab,
                canvas: None,
                config,
            }),
            cache: Mutex::new(Cache::default()),
        }
    }

    pub fn read(&self) -> RwLockReadGuard<'_, SessionState> {
        self.state.read().unwrap_or_else(|p| p.into_inner())
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, SessionState> {
        self.state.write().unwrap_or_else(|p| p.into_inner())
    }

    fn cache(&self) -> std::sync::MutexGuard<'_, Cache> {
        self.cache.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn info(&self) -> SessionInfo {
        let s = self.read();
        SessionInfo {
            id: self.id.clone(),
            width: s.reference.width(),
            height: s.reference.height(),
            has_canvas: s.canvas.is_some(),
            canvas_version: s.canvas.as_ref().map(|c| c.version),
            config: s.config,
        }
    }

    /// Palette of the reference or canvas under the caller's read guard.
    pub fn palette(
        &self,
        state: &SessionState,
        source: PaletteSource,
        mode: ClusterMode,
        cfg: &PaletteConfig,
    ) -> ServiceResult<Arc<Palette>> {
        let (lab, version) = match source {
            PaletteSource::Reference => (&state.reference_lab, 0),
            PaletteSource::Canvas => {
                let c = state.canvas()?;
                (&c.lab, c.version)
            }
        };
        let key = PaletteKey {
            source,
            mode,
            config: serde_json::to_string(cfg).map_err(|e| ServiceError::Internal(e.to_string()))?,
            version,
        };
        if let Some(p) = self.cache().palettes.get(&key) {
            return Ok(p.clone());
        }
        let palette = Arc::new(crate::pipeline::palette_for(lab, mode, source, cfg)?);
        let mut cache = self.cache();
        if cache.palettes.len() >= CACHE_LIMIT {
            cache.palettes.clear();
        }
        cache.palettes.insert(key, palette.clone());
        Ok(palette)
    }

    pub fn cached_segmentation(&self, key: &str) -> Option<Arc<SegmentationResult>> {
        self.cache().segmentations.get(key).cloned()
    }

    pub fn store_segmentation(&self, key: String, result: Arc<SegmentationResult>) {
        let mut cache = self.cache();
        if cache.segmentations.len() >= CACHE_LIMIT {
            cache.segmentations.clear();
        }
        cache.segmentations.insert(key, result);
    }

    /// Replaces the canvas under the caller's write guard.
    pub fn set_canvas(&self, state: &mut SessionState, image: ImageBuffer) -> ServiceResult<u64> {
        let (w, h) = state.reference.dimensions();
        let image = image.letterbox(w, h)?;
        let version = state.canvas.as_ref().map_or(1, |c| c.version + 1);
        let lab = LabImage::new(&image);
        state.canvas = Some(Canvas { image, lab, version });
        self.cache()
            .palettes
            .retain(|k, _| k.source == PaletteSource::Reference);
        Ok(version)
    }
}

pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    data_dir: Option<PathBuf>,
}

impl SessionStore {
    pub fn new(data_dir: Option<PathBuf>) -> Self {
        Self {
            sessions: RwLock::new(HashMap::new()),
            data_dir,
        }
    }

    /// Opens a store and reloads every session persisted under `data_dir`.
    pub fn open(data_dir: Option<PathBuf>) -> ServiceResult<Self> {
        let store = Self::new(data_dir);
        if let Some(dir) = &store.data_dir {
            std::fs::create_dir_all(dir).map_err(|e| ServiceError::Config(format!("{}: {e}", dir.display())))?;
            let entries = std::fs::read_dir(dir).map_err(|e| ServiceError::Config(e.to_string()))?;
            for entry in entries.flatten() {
                let path = entry.path();
                if !path.join("reference.png").is_file() {
                    continue;
                }
                match load_session(&path) {
                    Ok(session) => {
                        store.map_write().insert(session.id.clone(), Arc::new(session));
                    }
                    Err(e) => tracing::warn!(path = %path.display(), error = %e, "skipping unreadable session"),
                }
            }
        }
        Ok(store)
    }

    fn map_write(&self) -> RwLockWriteGuard<'_, HashMap<String, Arc<Session>>> {
        self.sessions.write().unwrap_or_else(|p| p.into_inner())
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn create(&self, reference: ImageBuffer, config: SessionConfig) -> ServiceResult<Arc<Session>> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Arc::new(Session::new(id.clone(), reference, config));
        self.persist(&session, &session.read())?;
        self.map_write().insert(id, session.clone());
        Ok(session)
    }

    pub fn get(&self, id: &str) -> ServiceResult<Arc<Session>> {
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::SessionNotFound(id.to_string()))
    }

    pub fn delete(&self, id: &str) -> ServiceResult<()> {
        let removed = self.map_write().remove(id);
        if removed.is_none() {
            return Err(ServiceError::SessionNotFound(id.to_string()));
        }
        if let Some(dir) = &self.data_dir {
            let path = dir.join(id);
            if path.exists() {
                std::fs::remove_dir_all(&path).map_err(|e| ServiceError::Internal(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Writes the session's images and config when persistence is enabled.
    pub fn persist(&self, session: &Session, state: &SessionState) -> ServiceResult<()> {
        let Some(dir) = &self.data_dir else {
            return Ok(());
        };
        let path = dir.join(&session.id);
        let io = |e: std::io::Error| ServiceError::Internal(format!("persisting {}: {e}", path.display()));
        std::fs::create_dir_all(&path).map_err(io)?;
        let reference = path.join("reference.png");
        if !reference.exists() {
            std::fs::write(&reference, state.reference.to_png_bytes()).map_err(io)?;
        }
        if let Some(c) = &state.canvas {
            std::fs::write(path.join("canvas.png"), c.image.to_png_bytes()).map_err(io)?;
        }
        let config = serde_json::to_vec_pretty(&state.config).map_err(|e| ServiceError::Internal(e.to_string()))?;
        std::fs::write(path.join("config.json"), config).map_err(io)?;
        Ok(())
    }
}

fn load_session(path: &Path) -> ServiceResult<Session> {
    let id = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| ServiceError::Internal("bad session directory name".into()))?
        .to_string();
    let reference = ImageBuffer::open(path.join("reference.png"))?;
    let config = match std::fs::read(path.join("config.json")) {
        Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| ServiceError::Internal(e.to_string()))?,
        Err(_) => SessionConfig::default(),
    };
    let session = Session::new(id, reference, config);
    let canvas = path.join("canvas.png");
    if canvas.is_file() {
        let image = ImageBuffer::open(&canvas)?;
        let mut state = session.write();
        session.set_canvas(&mut state, image)?;
    }
    Ok(session)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn persistence_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(Some(dir.path().to_path_buf())).unwrap();
        let reference = ImageBuffer::from_fn(8, 6, |x, y| [x as u8 * 20, y as u8 * 30, 7]).unwrap();
        let cfg = SessionConfig {
            k_lines: 2,
            ..Default::default()
        };
        let s = store.create(reference.clone(), cfg).unwrap();
        {
            let mut st = s.write();
            s.set_canvas(&mut st, ImageBuffer::filled(4, 3, [9, 9, 9]).unwrap()).unwrap();
            store.persist(&s, &st).unwrap();
        }

        let reopened = SessionStore::open(Some(dir.path().to_path_buf())).unwrap();
        let again = reopened.get(&s.id).unwrap();
        let st = again.read();
        assert_eq!(st.reference, reference);
        assert_eq!(st.config, cfg);
        assert_eq!(st.canvas.as_ref().unwrap().image.dimensions(), (8, 6));

        reopened.delete(&s.id).unwrap();
        assert!(!dir.path().join(&s.id).exists());
        assert!(matches!(reopened.get(&s.id), Err(ServiceError::SessionNotFound(_))));
    }

    #[test]
    fn canvas_write_invalidates_canvas_palettes() {
        let store = SessionStore::new(None);
        let s = store.create(ImageBuffer::filled(4, 4, [200, 10, 10]).unwrap(), SessionConfig::default()).unwrap();
        let cfg = PaletteConfig::default();
        let mut st = s.write();
        s.set_canvas(&mut st, ImageBuffer::filled(4, 4, [10, 200, 10]).unwrap()).unwrap();
        let a = s.palette(&st, PaletteSource::Canvas, ClusterMode::Color, &cfg).unwrap();
        s.set_canvas(&mut st, ImageBuffer::filled(4, 4, [10, 10, 200]).unwrap()).unwrap();
        let b = s.palette(&st, PaletteSource::Canvas, ClusterMode::Color, &cfg).unwrap();
        assert_ne!(a.clusters[0].center_lab, b.clusters[0].center_lab);
        assert_eq!(st.canvas.as_ref().unwrap().version, 2);
    }
}
