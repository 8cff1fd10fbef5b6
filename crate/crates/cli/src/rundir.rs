//! Run directories `runs/<run_id>/` and their manifests.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const RUNS_ENV: &str = "COMPWAVE_RUNS_DIR";
pub const MANIFEST: &str = "manifest.json";
pub const MANIFEST_FORMAT: u32 = 1;

/// Root of all runs: `$COMPWAVE_RUNS_DIR`, else `./runs`.
pub fn runs_root(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    std::env::var_os(RUNS_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    pub config_hash: String,
    pub params: compwave::Params,
    pub versions: BTreeMap<String, String>,
    /// Seconds since the Unix epoch.
    pub started: u64,
    pub finished: u64,
    /// Paths relative to the run directory, in creation order. The manifest
    /// itself is not listed.
    pub files: Vec<String>,
    pub verdicts: Vec<Verdict>,
    /// One-line result shown by the CLI.
    pub summary: serde_json::Value,
}

impl RunManifest {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// A run directory being filled. Every file goes through [`RunDir::write`]
/// so that the manifest lists it.
#[derive(Debug)]
pub struct RunDir {
    pub id: String,
    pub path: PathBuf,
    command: String,
    config_hash: String,
    started: u64,
    files: Vec<String>,
}

impl RunDir {
    /// Creates (or empties) `root/<command>-<hash prefix>`.
    pub fn create(root: &Path, command: &str, config_hash: &str) -> Result<Self> {
        let id = format!("{command}-{}", &config_hash[..12]);
        let path = root.join(&id);
        if path.exists() {
            std::fs::remove_dir_all(&path).with_context(|| format!("clearing {}", path.display()))?;
        }
        std::fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(RunDir {
            id,
            path,
            command: command.into(),
            config_hash: config_hash.into(),
            started: now(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, rel: &str, content: &str) -> Result<()> {
        let full = self.path.join(rel);
        if let Some(parent) = full.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&full, content).with_context(|| format!("writing {}", full.display()))?;
        if !self.files.iter().any(|f| f == rel) {
            self.files.push(rel.into());
        }
        Ok(())
    }

    pub fn write_csv(&mut self, rel: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        self.write(rel, &csv(header, rows))
    }

    /// Writes `report.md` and `manifest.json`.
    pub fn finish(
        mut self,
        params: compwave::Params,
        verdicts: Vec<Verdict>,
        summary: serde_json::Value,
    ) -> Result<RunManifest> {
        let mut versions = BTreeMap::new();
        versions.insert("compwave".to_string(), env!("CARGO_PKG_VERSION").to_string());
        versions.insert("manifest_format".to_string(), MANIFEST_FORMAT.to_string());
        let mut m = RunManifest {
            run_id: self.id.clone(),
            command: self.command.clone(),
            config_hash: self.config_hash.clone(),
            params,
            versions,
            started: self.started,
            finished: now(),
            files: Vec::new(),
            verdicts,
            summary,
        };
        if !self.files.iter().any(|f| f == "report.md") {
            self.files.push("report.md".into());
        }
        m.files = self.files.clone();
        self.write("report.md", &render_report(&m))?;
        let json = serde_json::to_string_pretty(&m)?;
        std::fs::write(self.path.join(MANIFEST), json + "\n")?;
        Ok(m)
    }
}

/// CSV with a header row. Values are written verbatim.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// Round-trip float formatting; `NaN` and missing values become empty cells.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

pub fn render_report(m: &RunManifest) -> String {
    let mut s = String::new();
    let status = if m.pass() { "PASS" } else { "FAIL" };
    let _ = writeln!(s, "# Run {}\n", m.run_id);
    let _ = writeln!(s, "- command: `{}`", m.command);
    let _ = writeln!(s, "- status: **{status}**");
    let _ = writeln!(s, "- config hash: `{}`", m.config_hash);
    let p = &m.params;
    let _ = writeln!(s, "- parameters: a = {}, b = {}, d = {}, r = {}", p.a, p.b, p.d, p.r);
    let _ = writeln!(s, "- summary: `{}`\n", m.summary);
    let _ = writeln!(s, "## Verdicts\n");
    let _ = writeln!(s, "| check | result | detail |");
    let _ = writeln!(s, "|---|---|---|");
    for v in &m.verdicts {
        let r = if v.pass { "pass" } else { "FAIL" };
        let _ = writeln!(s, "| {} | {r} | {} |", v.name, v.detail.replace('|', "/"));
    }
    let plots: Vec<&String> = m.files.iter().filter(|f| f.ends_with(".svg")).collect();
    if !plots.is_empty() {
        let _ = writeln!(s, "\n## Plots\n");
        for f in plots {
            let _ = writeln!(s, "- [{f}]({f})");
        }
    }
    let _ = writeln!(s, "\n## Files\n");
    for f in &m.files {
        let _ = writeln!(s, "- {f}");
    }
    s
}

/// Looks a run up by id (or by a unique id prefix).
pub fn find_run(root: &Path, id: &str) -> Result<PathBuf> {
    let exact = root.join(id);
    if exact.join(MANIFEST).is_file() {
        return Ok(exact);
    }
    let mut hits = Vec::new();
    if let Ok(entries) = std::fs::read_dir(root) {
        for e in entries.flatten() {
            let name = e.file_name().to_string_lossy().into_owned();
            if name.starts_with(id) && e.path().join(MANIFEST).is_file() {
                hits.push(e.path());
            }
        }
    }
    match hits.len() {
        1 => Ok(hits.pop().unwrap()),
        0 => bail!(UnknownRun(id.into())),
        n => bail!("run id prefix `{id}` is ambiguous ({n} matches)"),
    }
}

#[derive(Debug)]
pub struct UnknownRun(pub String);

impl std::fmt::Display for UnknownRun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "unknown run `{}`", self.0)
    }
}

impl std::error::Error for UnknownRun {}
