//! Output files: grid CSVs with a fixed 17-significant-digit format, the
//! human- and machine-readable report, and the run manifest with content
//! digests. The manifest is always the last file written.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use plurigreen_core::grid::ComplexGrid;
use sha2::{Digest, Sha256};

pub struct OutputDir {
    pub root: PathBuf,
    files: Vec<(String, String, u64)>,
    stages: Vec<(String, u128)>,
    started: Instant,
    log: fs::File,
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<OutputDir> {
        fs::create_dir_all(root)?;
        let log = fs::File::create(root.join("run.log"))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
            stages: Vec::new(),
            started: Instant::now(),
            log,
        })
    }

    pub fn log(&mut self, line: &str) {
        let _ = writeln!(self.log, "{line}");
    }

    pub fn stage(&mut self, name: &str, ms: u128) {
        self.stages.push((name.to_string(), ms));
    }

    /// Writes a file and records its digest for the manifest.
    pub fn write_file(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        let path = self.root.join(name);
        fs::write(&path, contents)?;
        let mut hasher = Sha256::new();
        hasher.update(contents.as_bytes());
        let digest = hex_digest(&hasher.finalize());
        self.files.push((name.to_string(), digest, contents.len() as u64));
        Ok(())
    }

    /// Grid CSV: coordinate columns then the value, row-major over the
    /// grid, 17 significant digits, rows only for valued nodes.
    pub fn write_grid(&mut self, name: &str, grid: &ComplexGrid) -> std::io::Result<()> {
        let m = grid.domain.real_dim();
        let mut out = String::new();
        let header = if m == 2 { "x,y,value" } else { "x1,y1,x2,y2,value" };
        out.push_str(header);
        out.push('\n');
        for i in 0..grid.values.len() {
            if !grid.is_valued(i) {
                continue;
            }
            let z = grid.node_coords(i);
            for a in 0..m {
                let _ = write!(out, "{:.16e},", z[a]);
            }
            let _ = writeln!(out, "{:.16e}", grid.values[i]);
        }
        self.write_file(name, &out)
    }

    /// Writes the manifest last: config echo, version, wall clock, stage
    /// timings and the complete file inventory with digests.
    pub fn finish(mut self, command: &str, config_echo: &str) -> std::io::Result<()> {
        // the run log is a tracked artifact too: flush and digest it
        let _ = self.log.flush();
        let log_bytes = fs::read(self.root.join("run.log")).unwrap_or_default();
        let mut hasher = Sha256::new();
        hasher.update(&log_bytes);
        self.files.push(("run.log".to_string(), hex_digest(&hasher.finalize()), log_bytes.len() as u64));

        let mut out = String::new();
        let _ = writeln!(out, "manifest {{");
        let _ = writeln!(out, "  tool_version \"{}\"", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "  command {command}");
        let _ = writeln!(out, "  wallclock_ms {}", self.started.elapsed().as_millis());
        for (name, ms) in &self.stages {
            let _ = writeln!(out, "  stage {{ name \"{name}\" ms {ms} }}");
        }
        for (name, digest, bytes) in &self.files {
            let _ = writeln!(out, "  file {{ name \"{name}\" sha256 \"{digest}\" bytes {bytes} }}");
        }
        let _ = writeln!(out, "  config {{");
        for line in config_echo.lines() {
            let _ = writeln!(out, "    {line}");
        }
        let _ = writeln!(out, "  }}");
        let _ = writeln!(out, "}}");
        fs::write(self.root.join("manifest.txt"), out)
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Report builder: nested key-value blocks in the config grammar, readable
/// by eye and by the parser.
pub struct Report {
    out: String,
    depth: usize,
}

impl Report {
    pub fn new() -> Report {
        Report { out: String::from("report {\n"), depth: 1 }
    }

    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.indent();
        let _ = writeln!(self.out, "{key} {value}");
        self
    }

    pub fn kv_str(&mut self, key: &str, value: &str) -> &mut Self {
        self.indent();
        let _ = writeln!(self.out, "{key} \"{value}\"");
        self
    }

    pub fn open(&mut self, key: &str) -> &mut Self {
        self.indent();
        let _ = writeln!(self.out, "{key} {{");
        self.depth += 1;
        self
    }

    pub fn close(&mut self) -> &mut Self {
        self.depth -= 1;
        self.indent();
        self.out.push_str("}\n");
        self
    }

    pub fn finish(mut self) -> String {
        self.out.push_str("}\n");
        self.out
    }
}

impl Default for Report {
    fn default() -> Self {
        Self::new()
    }
}
