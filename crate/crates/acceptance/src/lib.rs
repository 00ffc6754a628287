//! Support for the acceptance suite: record files written by the driver
//! binaries and the with/without-preload comparison runs.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::Command;

use ozgemm::GemmStats;

/// Length-prefixed little-endian `f64` records.
pub struct RecordWriter {
    out: BufWriter<File>,
}

impl RecordWriter {
    pub fn create(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(Self { out: BufWriter::new(File::create(path)?) })
    }

    pub fn write(&mut self, values: &[f64]) -> io::Result<()> {
        self.out.write_all(&(values.len() as u64).to_le_bytes())?;
        for v in values {
            self.out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

pub fn read_records(path: impl AsRef<Path>) -> io::Result<Vec<Vec<f64>>> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let mut records = Vec::new();
    let mut pos = 0;
    let word = |pos: usize| -> io::Result<[u8; 8]> {
        bytes.get(pos..pos + 8).map(|s| s.try_into().unwrap()).ok_or_else(|| io::Error::other("truncated record file"))
    };
    while pos < bytes.len() {
        let len = u64::from_le_bytes(word(pos)?) as usize;
        pos += 8;
        let mut rec = Vec::with_capacity(len);
        for _ in 0..len {
            rec.push(f64::from_le_bytes(word(pos)?));
            pos += 8;
        }
        records.push(rec);
    }
    Ok(records)
}

/// `max |x - y| / max |y|` over one record.
pub fn normwise_rel_diff(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "record lengths differ");
    let diff = x.iter().zip(y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = y.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// The shim's shared object, built next to the driver binaries.
pub fn shim_library(driver: &Path) -> Option<PathBuf> {
    let dir = driver.parent()?;
    [dir.join("deps").join("libozgemm_shim.so"), dir.join("libozgemm_shim.so")].into_iter().find(|p| p.exists())
}

/// One driver execution.
#[derive(Debug)]
pub struct DriverRun {
    pub records: Vec<Vec<f64>>,
    /// `key=value` pairs printed on stdout.
    pub reported: HashMap<String, u64>,
    /// Mode line and counters of the stats file, if one was written.
    pub stats: Option<(String, GemmStats)>,
}

fn parse_reported(stdout: &str) -> HashMap<String, u64> {
    stdout
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .filter_map(|(k, v)| Some((k.to_string(), v.parse().ok()?)))
        .collect()
}

/// Runs `driver args...` writing records to `workdir/<tag>.bin`, with the
/// shim preloaded under `mode_env` if `preload` is given.
pub fn run_driver(
    driver: &Path,
    args: &[&str],
    workdir: &Path,
    tag: &str,
    preload: Option<(&Path, &[(&str, &str)])>,
) -> io::Result<DriverRun> {
    let output = workdir.join(format!("{tag}.bin"));
    let stats_path = workdir.join(format!("{tag}.stats"));
    let mut cmd = Command::new(driver);
    cmd.arg(&output).args(args);
    for var in
        ["GEMM_EMU_MODE", "GEMM_EMU_SLICES", "GEMM_EMU_STRATEGY", "GEMM_EMU_MODULI", "GEMM_EMU_STATS", "LD_PRELOAD"]
    {
        cmd.env_remove(var);
    }
    cmd.env("GEMM_EMU_STATS", &stats_path);
    if let Some((lib, env)) = preload {
        cmd.env("LD_PRELOAD", lib);
        for (k, v) in env {
            cmd.env(k, v);
        }
    }
    let out = cmd.output()?;
    if !out.status.success() {
        return Err(io::Error::other(format!(
            "{} exited with {}: {}",
            driver.display(),
            out.status,
            String::from_utf8_lossy(&out.stderr)
        )));
    }
    let stats = match std::fs::read_to_string(&stats_path) {
        Ok(text) => {
            let mode = text.lines().find_map(|l| l.strip_prefix("mode=")).unwrap_or_default().to_string();
            let s = GemmStats::from_key_values(&text).map_err(|e| io::Error::other(e.to_string()))?;
            Some((mode, s))
        }
        Err(_) => None,
    };
    Ok(DriverRun {
        records: read_records(&output)?,
        reported: parse_reported(&String::from_utf8_lossy(&out.stdout)),
        stats,
    })
}
