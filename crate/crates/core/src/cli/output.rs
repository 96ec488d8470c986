use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{CliError, Common};
use crate::spectral_models::ModelSpecFile;

/// Everything needed to reproduce a run. Thread count and output directory
/// are left out: neither affects the results.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpecFile>,
    pub options: serde_json::Value,
}

impl RunConfig {
    pub fn new<A: Serialize>(subcommand: &'static str, model_path: Option<&Path>, model: Option<&ModelSpecFile>, args: &A) -> Self {
        RunConfig {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            model_path: model_path.map(|p| p.display().to_string()),
            model: model.cloned(),
            options: serde_json::to_value(args).unwrap_or(serde_json::Value::Null),
        }
    }
}

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    /// Creates the directory; refuses to touch existing targets without `--force`.
    pub fn prepare(common: &Common, files: &[&str]) -> Result<Self, CliError> {
        for f in files {
            let p = common.out.join(f);
            if p.exists() && !common.force {
                return Err(CliError::Usage(format!("{} exists; pass --force to overwrite", p.display())));
            }
        }
        fs::create_dir_all(&common.out).map_err(|e| CliError::Lib(e.into()))?;
        Ok(Self { dir: common.out.clone() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_csv(&self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let lib = |e: csv::Error| CliError::Lib(e.into());
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&path).map_err(lib)?;
        w.write_record(header).map_err(lib)?;
        for r in rows {
            w.write_record(r).map_err(lib)?;
        }
        w.flush().map_err(|e| CliError::Lib(e.into()))?;
        Ok(path)
    }

    pub fn write_series(&self, name: &str, x: &[f64]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let file = fs::File::create(&path).map_err(|e| CliError::Lib(e.into()))?;
        crate::series::write_series_csv(std::io::BufWriter::new(file), x)?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Lib(e.into()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::Lib(e.into()))?;
        Ok(path)
    }
}
