//! Service and per-session configuration.
//!
//! Values come from built-in defaults, then an optional TOML file, then
//! `DRAWSCAFFOLD_*` environment variables.

use std::path::{Path, PathBuf};

use drawscaffold_core::composition::RansacConfig;
use drawscaffold_core::geometry::DEFAULT_EPSILON;
use drawscaffold_core::imagecore::BlurSpec;
use drawscaffold_core::matching::Tolerances;
use drawscaffold_core::palette::PaletteConfig;
use drawscaffold_core::segmentation::ProviderConfig;
use serde::{Deserialize, Serialize};

use crate::error::{ServiceError, ServiceResult};

pub const DEFAULT_MAX_PIXELS: u64 = 32_000_000;

/// Parameters that shape every analysis in a session. Each response embeds
/// the copy it was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    /// RDP tolerance for polygon contours, normalized units.
    pub epsilon: f64,
    pub ransac: RansacConfig,
    /// Number of composition lines shown.
    pub k_lines: usize,
    pub palette: PaletteConfig,
    pub blur: BlurSpec,
    pub tolerances: Tolerances,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            ransac: RansacConfig::default(),
            k_lines: 3,
            palette: PaletteConfig::default(),
            blur: BlurSpec::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> ServiceResult<()> {
        if !(0.0..=0.5).contains(&self.epsilon) {
            return Err(ServiceError::BadRequest(format!(
                "epsilon must be in [0, 0.5], got {}",
                self.epsilon
            )));
        }
        self.ransac.validate()?;
        self.palette.validate()?;
        self.blur.validate()?;
        let t = &self.tolerances;
        if !(t.value >= 0.0 && t.hue >= 0.0 && t.saturation >= 0.0) {
            return Err(ServiceError::BadRequest("tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub listen: String,
    /// Sessions are persisted here as PNG + JSON when set.
    pub data_dir: Option<PathBuf>,
    pub max_pixels: u64,
    pub request_timeout_secs: u64,
    /// RDP tolerance applied to region contours before they are returned.
    pub contour_epsilon: f64,
    /// At most this many region contours per cluster are returned, largest first.
    pub max_contours: usize,
    pub provider: ProviderConfig,
    pub defaults: SessionConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            data_dir: None,
            max_pixels: DEFAULT_MAX_PIXELS,
            request_timeout_secs: 60,
            contour_epsilon: 0.002,
            max_contours: 256,
            provider: ProviderConfig::Box,
            defaults: SessionConfig::default(),
        }
    }
}

impl ServiceConfig {
    /// Defaults, then `path` if given, then the process environment.
    pub fn load(path: Option<&Path>) -> ServiceResult<Self> {
        let mut cfg = match path {
            Some(p) => Self::from_toml(&std::fs::read_to_string(p).map_err(|e| {
                ServiceError::Config(format!("cannot read {}: {e}", p.display()))
            })?)?,
            None => Self::default(),
        };
        cfg.apply_env(std::env::vars())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> ServiceResult<Self> {
        toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))
    }

    pub fn validate(&self) -> ServiceResult<()> {
        if self.max_pixels == 0 || self.request_timeout_secs == 0 {
            return Err(ServiceError::Config("max_pixels and request_timeout_secs must be positive".into()));
        }
        if self.contour_epsilon < 0.0 {
            return Err(ServiceError::Config("contour_epsilon must be non-negative".into()));
        }
        self.defaults.validate()
    }

    /// Applies recognised `DRAWSCAFFOLD_*` variables; others are ignored.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> ServiceResult<()> {
        let mut provider_kind = None;
        let mut provider_dir = None;
        let mut sidecar_url = None;
        let mut sidecar_timeout = None;
        for (key, value) in vars {
            let Some(name) = key.strip_prefix("DRAWSCAFFOLD_") else {
                continue;
            };
            match name {
                "LISTEN" => self.listen = value,
                "DATA_DIR" => self.data_dir = Some(PathBuf::from(value)),
                "MAX_PIXELS" => self.max_pixels = parse(&key, &value)?,
                "REQUEST_TIMEOUT_SECS" => self.request_timeout_secs = parse(&key, &value)?,
                "PROVIDER" => provider_kind = Some(value),
                "PROVIDER_DIR" => provider_dir = Some(PathBuf::from(value)),
                "SIDECAR_URL" => sidecar_url = Some(value),
                "SIDECAR_TIMEOUT_SECS" => sidecar_timeout = Some(parse::<u64>(&key, &value)?),
                "EPSILON" => self.defaults.epsilon = parse(&key, &value)?,
                "K_LINES" => self.defaults.k_lines = parse(&key, &value)?,
                "SEED" => {
                    let seed = parse(&key, &value)?;
                    self.defaults.ransac.seed = seed;
                    self.defaults.palette.seed = seed;
                }
                "THETA_DIS" => self.defaults.ransac.theta_dis = parse(&key, &value)?,
                "THETA_INL" => self.defaults.ransac.theta_inl = parse(&key, &value)?,
                "PALETTE_K" => self.defaults.palette.k = parse(&key, &value)?,
                "REGION_THRESHOLD" => self.defaults.palette.region_threshold = parse(&key, &value)?,
                _ => {}
            }
        }

        let kind = provider_kind.or_else(|| match (&sidecar_url, &provider_dir) {
            (Some(_), _) => Some("sidecar".into()),
            (None, Some(_)) => Some("files".into()),
            _ => None,
        });
        if let Some(kind) = kind {
            self.provider = match kind.as_str() {
                "box" => ProviderConfig::Box,
                "files" => ProviderConfig::Files {
                    dir: provider_dir
                        .or(match &self.provider {
                            ProviderConfig::Files { dir } => Some(dir.clone()),
                            _ => None,
                        })
                        .ok_or_else(|| ServiceError::Config("files provider needs DRAWSCAFFOLD_PROVIDER_DIR".into()))?,
                },
                "sidecar" => {
                    let (old_url, old_timeout) = match &self.provider {
                        ProviderConfig::Sidecar { url, timeout_secs } => (Some(url.clone()), *timeout_secs),
                        _ => (None, 30),
                    };
                    ProviderConfig::Sidecar {
                        url: sidecar_url
                            .or(old_url)
                            .ok_or_else(|| ServiceError::Config("sidecar provider needs DRAWSCAFFOLD_SIDECAR_URL".into()))?,
                        timeout_secs: sidecar_timeout.unwrap_or(old_timeout),
                    }
                }
                other => return Err(ServiceError::Config(format!("unknown provider `{other}`"))),
            };
        } else if let (Some(t), ProviderConfig::Sidecar { timeout_secs, .. }) = (sidecar_timeout, &mut self.provider) {
            *timeout_secs = t;
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> ServiceResult<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| ServiceError::Config(format!("{key}={value}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn toml_then_env() {
        let mut cfg = ServiceConfig::from_toml(
            r#"
            listen = "0.0.0.0:9000"
            [provider]
            kind = "files"
            dir = "/masks"
            [defaults]
            k_lines = 5
            [defaults.ransac]
            seed = 4
            "#,
        )
        .unwrap();
        assert_eq!(cfg.defaults.k_lines, 5);
        assert_eq!(cfg.defaults.ransac.seed, 4);
        assert_eq!(cfg.defaults.ransac.theta_dis, 0.04);
        cfg.apply_env(env(&[
            ("DRAWSCAFFOLD_LISTEN", "127.0.0.1:1"),
            ("DRAWSCAFFOLD_SIDECAR_URL", "http://sam:8000"),
            ("DRAWSCAFFOLD_PALETTE_K", "7"),
            ("HOME", "/root"),
        ]))
        .unwrap();
        assert_eq!(cfg.listen, "127.0.0.1:1");
        assert_eq!(cfg.defaults.palette.k, 7);
        assert_eq!(
            cfg.provider,
            ProviderConfig::Sidecar {
                url: "http://sam:8000".into(),
                timeout_secs: 30
            }
        );
    }

    #[test]
    fn env_errors() {
        let mut cfg = ServiceConfig::default();
        assert!(cfg.apply_env(env(&[("DRAWSCAFFOLD_K_LINES", "many")])).is_err());
        assert!(cfg.apply_env(env(&[("DRAWSCAFFOLD_PROVIDER", "files")])).is_err());
        assert!(cfg.apply_env(env(&[("DRAWSCAFFOLD_PROVIDER", "gpu")])).is_err());
    }

    #[test]
    fn session_config_ranges() {
        assert!(SessionConfig::default().validate().is_ok());
        let mut c = SessionConfig::default();
        c.blur.kernel_size = 9.0;
        assert!(c.validate().is_err());
        let c = SessionConfig {
            epsilon: -1.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
