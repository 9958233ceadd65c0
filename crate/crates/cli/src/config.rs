use std::path::{Path, PathBuf};

use pslab_core::io::{read_cloud_csv, CloudEnvelope};
use pslab_core::point_process::{PointCloud, Window};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{EXIT_ABORT, EXIT_CONFIG};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("{0}")]
    Core(#[from] pslab_core::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use pslab_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::MissingInput(_) | CliError::Write { .. } => EXIT_ABORT,
            CliError::Core(E::Numerical(_) | E::Censored(_)) => EXIT_ABORT,
            CliError::Core(_) => EXIT_CONFIG,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A loaded configuration: the typed value, its effective JSON echo and the
/// directory relative paths are resolved against.
pub struct Loaded<T> {
    pub value: T,
    pub echo: Value,
    pub base_dir: PathBuf,
}

pub fn load<T: DeserializeOwned>(path: &Path, seed: Option<u64>) -> CliResult<Loaded<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut echo: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: invalid JSON: {e}", path.display())))?;
    if let Some(seed) = seed {
        match echo.as_object_mut() {
            Some(obj) => {
                obj.insert("seed".into(), Value::from(seed));
            }
            None => return Err(CliError::Config(format!("{}: top level must be an object", path.display()))),
        }
    }
    let value = parse_value(&echo).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { value, echo, base_dir })
}

/// Deserializes with the JSON path of the offending field in the message.
pub fn parse_value<T: DeserializeOwned>(v: &Value) -> Result<T, String> {
    serde_path_to_error::deserialize(v.clone()).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            e.into_inner().to_string()
        } else {
            format!("at `{path}`: {}", e.into_inner())
        }
    })
}

/// A point cloud given inline or by a `.csv` / `.json` file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudInput {
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub window: Option<Window>,
}

impl CloudInput {
    pub fn load(&self, base_dir: &Path) -> CliResult<PointCloud> {
        match (&self.points, &self.path) {
            (Some(points), None) => {
                let cloud = match &self.window {
                    Some(w) => PointCloud::from_points(points, w.clone())?,
                    None if points.is_empty() => return Err(CliError::Config("cloud.points: empty cloud needs a window".into())),
                    None => PointCloud::from_points_bbox(points)?,
                };
                Ok(cloud)
            }
            (None, Some(rel)) => {
                let path = base_dir.join(rel);
                let file = std::fs::File::open(&path).map_err(|e| CliError::Config(format!("cloud.path {}: {e}", path.display())))?;
                if path.extension().is_some_and(|e| e == "json") {
                    let env: CloudEnvelope = serde_json::from_reader(std::io::BufReader::new(file))
                        .map_err(|e| CliError::Config(format!("cloud.path {}: {e}", path.display())))?;
                    Ok(env.to_cloud()?)
                } else {
                    Ok(read_cloud_csv(file, self.window.clone())?)
                }
            }
            _ => Err(CliError::Config("cloud: give exactly one of `points` or `path`".into())),
        }
    }
}
