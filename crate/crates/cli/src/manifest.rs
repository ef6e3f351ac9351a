//! The per-run manifest: what was run, on which configuration, how long it
//! took.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// SHA-256 of the canonical configuration text, as lowercase hex.
pub fn config_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Debug)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub started: SystemTime,
    pub wall_time: Duration,
    pub outputs: Vec<String>,
    pub passed: bool,
}

impl Manifest {
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let started = self
            .started
            .duration_since(UNIX_EPOCH)
            .unwrap_or_default()
            .as_secs();
        writeln!(w, "command = \"{}\"", self.command)?;
        writeln!(w, "config_sha256 = \"{}\"", self.config_sha256)?;
        writeln!(w, "seed = \"{}\"", self.seed)?;
        writeln!(w, "sdns_version = \"{}\"", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "sdns_core_version = \"{}\"", sdns_core::VERSION)?;
        writeln!(
            w,
            "platform = \"{}-{}\"",
            std::env::consts::ARCH,
            std::env::consts::OS
        )?;
        writeln!(w, "started_unix_s = {started}")?;
        writeln!(w, "wall_time_s = {:.3}", self.wall_time.as_secs_f64())?;
        writeln!(w, "passed = {}", self.passed)?;
        let outs: Vec<String> = self.outputs.iter().map(|o| format!("\"{o}\"")).collect();
        writeln!(w, "outputs = [{}]", outs.join(", "))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.txt");
        let file = std::fs::File::create(&path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = std::io::BufWriter::new(file);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }
}
