use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::report::{Exit, Failure};

pub const CONFIG_ENV: &str = "CHERNLAB_CONFIG";
pub const CONFIG_FILE: &str = "chernlab.toml";
pub const TOLERANCE_ENV: &str = "CHERNLAB_TOLERANCE";
pub const MESH_ENV: &str = "CHERNLAB_MESH";

pub const DEFAULT_MESH: usize = 64;

/// Optional settings file. Every key may be omitted.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub tolerance: Option<f64>,
    pub mesh: Option<usize>,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Default,
    File,
    Flag,
    Env,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Setting<T> {
    pub value: T,
    pub source: Source,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Settings {
    pub tolerance: Setting<f64>,
    pub mesh: Setting<usize>,
    pub config_file: Option<PathBuf>,
}

/// `--config`, then `$CHERNLAB_CONFIG`, then `./chernlab.toml` if present.
fn config_path(flag: Option<&Path>) -> Option<(PathBuf, bool)> {
    if let Some(p) = flag {
        return Some((p.to_path_buf(), true));
    }
    if let Ok(p) = std::env::var(CONFIG_ENV) {
        return Some((PathBuf::from(p), true));
    }
    let local = PathBuf::from(CONFIG_FILE);
    local.is_file().then_some((local, false))
}

fn load_file(flag: Option<&Path>) -> Result<(FileConfig, Option<PathBuf>), Failure> {
    let Some((path, required)) = config_path(flag) else {
        return Ok((FileConfig::default(), None));
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(_) if !required => return Ok((FileConfig::default(), None)),
        Err(e) => return Err(Failure::new(Exit::Input, format!("cannot read config {}: {e}", path.display()))),
    };
    let cfg = toml::from_str(&text)
        .map_err(|e| Failure::new(Exit::Input, format!("bad config {}: {e}", path.display())))?;
    Ok((cfg, Some(path)))
}

fn env_value<T: std::str::FromStr>(name: &str) -> Result<Option<T>, Failure> {
    match std::env::var(name) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::new(Exit::Input, format!("cannot parse {name}={v:?}"))),
        Err(_) => Ok(None),
    }
}

fn pick<T: Copy>(default: T, file: Option<T>, flag: Option<T>, env: Option<T>) -> Setting<T> {
    [(env, Source::Env), (flag, Source::Flag), (file, Source::File)]
        .into_iter()
        .find_map(|(v, source)| v.map(|value| Setting { value, source }))
        .unwrap_or(Setting { value: default, source: Source::Default })
}

/// Layers defaults, the config file, command-line flags and environment
/// variables, later layers winning.
pub fn resolve(
    config: Option<&Path>,
    tolerance_flag: Option<f64>,
    mesh_flag: Option<usize>,
    default_tolerance: f64,
) -> Result<Settings, Failure> {
    let (file, config_file) = load_file(config)?;
    let tolerance = pick(default_tolerance, file.tolerance, tolerance_flag, env_value(TOLERANCE_ENV)?);
    let mesh = pick(DEFAULT_MESH, file.mesh, mesh_flag, env_value(MESH_ENV)?);
    if !(tolerance.value > 0.0 && tolerance.value.is_finite()) {
        return Err(Failure::new(Exit::Input, format!("tolerance must be positive, got {}", tolerance.value)));
    }
    Ok(Settings { tolerance, mesh, config_file })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_layers_win() {
        assert_eq!(pick(1, Some(2), Some(3), Some(4)), Setting { value: 4, source: Source::Env });
        assert_eq!(pick(1, Some(2), Some(3), None), Setting { value: 3, source: Source::Flag });
        assert_eq!(pick(1, Some(2), None, None), Setting { value: 2, source: Source::File });
        assert_eq!(pick(1, None, None, None), Setting { value: 1, source: Source::Default });
    }

    #[test]
    fn file_rejects_unknown_keys() {
        assert!(toml::from_str::<FileConfig>("mesh = 32\ncolour = 1").is_err());
        assert_eq!(toml::from_str::<FileConfig>("mesh = 32").unwrap().mesh, Some(32));
    }
}
