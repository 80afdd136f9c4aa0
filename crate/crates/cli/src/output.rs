use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use laguerre_needlets::io::{format_g17, to_canonical_json};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub fn g(x: f64) -> String {
    format_g17(x)
}

pub fn csv_row<I: IntoIterator<Item = String>>(fields: I) -> String {
    let mut s = fields.into_iter().collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

pub fn canonical<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = to_canonical_json(v)?;
    s.push('\n');
    Ok(s)
}

/// The resolved config as a JSON object of strings, without the output location.
pub fn config_json(cfg: &RunConfig) -> Value {
    let map: Map<String, Value> = cfg
        .entries()
        .into_iter()
        .filter(|(k, _)| *k != "out")
        .map(|(k, v)| (k.to_string(), Value::String(v)))
        .collect();
    Value::Object(map)
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

pub fn write_file(path: &Path, body: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::File { path: dir.display().to_string(), source })?;
    }
    fs::write(path, body).map_err(|source| CliError::File { path: path.display().to_string(), source })
}

/// Timestamped metadata, kept apart from results so those stay reproducible.
pub fn metadata_json() -> CliResult<String> {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    canonical(&json!({
        "created_unix": secs,
        "version": env!("CARGO_PKG_VERSION"),
        "command": std::env::args().collect::<Vec<_>>(),
    }))
}

/// Writes `body` to `cfg.out` with `.config` and `.meta.json` sidecars, or to stdout.
pub fn emit(cfg: &RunConfig, body: &str) -> CliResult<()> {
    match &cfg.out {
        Some(path) => {
            write_file(path, body)?;
            write_file(&sidecar(path, ".config"), &cfg.to_text())?;
            write_file(&sidecar(path, ".meta.json"), &metadata_json()?)
        }
        None => match std::io::stdout().lock().write_all(body.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}
