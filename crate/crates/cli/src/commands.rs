//! Batch subcommands. Each returns the text to print on success and a
//! [`CliError`] carrying the process exit code on failure.

use std::fs;
use std::path::{Path, PathBuf};

use midair_core::error::{MeshError, SceneError, ScriptError, StatsError};
use midair_core::session::parse_script;
use midair_core::{
    export_mesh, mesh_volume, parse_scene, polygonize, recognition_stats, run_script,
    serialize_scene, GridSpec, MeshFormat, RecognitionRecord, RecognitionReport, Scene,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Scene { path: PathBuf, source: SceneError },
    #[error("{}: {source}", path.display())]
    Script { path: PathBuf, source: ScriptError },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Stats { path: PathBuf, source: StatsError },
}

impl CliError {
    /// 3 for a bad script line, 2 for every other input or output problem.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Script { .. } => 3,
            _ => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_scene(path: &Path) -> Result<Scene, CliError> {
    parse_scene(&read(path)?).map_err(|source| CliError::Scene {
        path: path.to_path_buf(),
        source,
    })
}

/// Replays a script and writes the final scene to `out`. The effect log goes
/// to `effects_out` when given and is returned either way.
pub fn replay(
    scene: &Path,
    script: &Path,
    out: &Path,
    effects_out: Option<&Path>,
) -> Result<String, CliError> {
    let initial = load_scene(scene)?;
    let events = parse_script(&read(script)?).map_err(|source| CliError::Script {
        path: script.to_path_buf(),
        source,
    })?;
    let (state, _) = run_script(initial, &events);
    let log = state.effect_log_text();
    write(out, serialize_scene(&state.scene).as_bytes())?;
    if let Some(path) = effects_out {
        write(path, log.as_bytes())?;
    }
    log::info!("replayed {} events from {}", events.len(), script.display());
    Ok(log)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSummary {
    pub triangles: usize,
    pub volume: f64,
}

impl std::fmt::Display for MeshSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "triangles {}\nvolume {:.6}", self.triangles, self.volume)
    }
}

/// Polygonizes the scene root and writes it in `format`.
pub fn mesh(
    scene: &Path,
    resolution: u32,
    format: MeshFormat,
    out: &Path,
) -> Result<MeshSummary, CliError> {
    let spec = GridSpec::new(resolution)?;
    let scene = load_scene(scene)?;
    let mut mesh = polygonize(&scene, &spec)?;
    if format == MeshFormat::Obj {
        mesh.compute_normals();
    }
    write(out, &export_mesh(&mesh, format))?;
    Ok(MeshSummary {
        triangles: mesh.triangles.len(),
        volume: mesh_volume(&mesh),
    })
}

const CSV_HEADER: [&str; 3] = ["user_label", "recognized", "unrecognized"];

/// Reads `user_label,recognized,unrecognized` rows after a header line.
pub fn read_records(path: &Path) -> Result<Vec<RecognitionRecord>, CliError> {
    let bad = |message: String| CliError::Csv {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("header must be {}", CSV_HEADER.join(","))));
    }
    let mut records = Vec::new();
    for (n, row) in reader.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let line = n + 2;
        let count = |i: usize| {
            row[i].parse::<u64>().map_err(|_| {
                bad(format!(
                    "line {line}: '{}' is not a non-negative count",
                    &row[i]
                ))
            })
        };
        records.push(RecognitionRecord::new(&row[0], count(1)?, count(2)?));
    }
    Ok(records)
}

pub fn format_stats(records: &[RecognitionRecord], report: &RecognitionReport) -> String {
    let mut out = String::new();
    for (r, rate) in records.iter().zip(&report.per_user_rate) {
        out.push_str(&format!(
            "{} {}/{} {rate:.1}%\n",
            r.user_label,
            r.recognized,
            r.recognized + r.unrecognized
        ));
    }
    out.push_str(&format!(
        "total recognized {} unrecognized {}\nmean {:.1}%\npooled {:.1}%\n",
        report.total_recognized,
        report.total_unrecognized,
        report.mean_rate,
        report.pooled_rate()
    ));
    out
}

/// Per-user recognition rates and their mean, formatted for printing.
pub fn stats(csv_path: &Path) -> Result<String, CliError> {
    let records = read_records(csv_path)?;
    let report = recognition_stats(&records).map_err(|source| CliError::Stats {
        path: csv_path.to_path_buf(),
        source,
    })?;
    Ok(format_stats(&records, &report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let script = CliError::Script {
            path: "s".into(),
            source: ScriptError {
                line: 4,
                message: "x".into(),
            },
        };
        assert_eq!(script.exit_code(), 3);
        assert!(script.to_string().contains("line 4"));
        assert_eq!(
            CliError::Mesh(MeshError::ResolutionOutOfRange(4)).exit_code(),
            2
        );
    }

    #[test]
    fn stats_text() {
        let records = vec![RecognitionRecord::new("a", 5, 0)];
        let text = format_stats(&records, &recognition_stats(&records).unwrap());
        assert!(text.starts_with("a 5/5 100.0%\n"));
        assert!(text.contains("mean 100.0%"));
    }
}
