//! `green-fn`: per-node resolvent-trace errors and the integrated count.

use std::io::Write;
use std::path::Path;

use ozgemm::workload::{green_function_sweep, GreenConfig, SweepReport};
use ozgemm::{EmulationMode, Result};

use crate::modes::{environment, parse_mode_config_or_ladder, parse_modes};
use crate::GreenArgs;

pub const NODE_HEADER: [&str; 6] = ["mode", "param", "node_index", "re_z", "im_z", "pct_err"];
pub const SUMMARY_HEADER: [&str; 10] =
    ["mode", "param", "n", "max_pct_err", "n_est", "exact_count", "n_est_err", "backend_gemms", "wall_ns", "seed"];

#[derive(Clone, Debug, PartialEq)]
pub struct GreenSummary {
    pub mode: EmulationMode,
    pub n: usize,
    pub max_pct_err: f64,
    pub n_est: f64,
    pub exact_count: usize,
    /// `|n_est - exact_count|`.
    pub n_est_err: f64,
    pub backend_gemms: u64,
    pub wall_ns: u64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct GreenRun {
    pub config: GreenConfig,
    pub report: SweepReport,
    pub summaries: Vec<GreenSummary>,
}

/// Sweeps `modes`, with native placed first if it is missing.
pub fn green_run(config: &GreenConfig, modes: &[EmulationMode]) -> Result<GreenRun> {
    let mut modes = modes.to_vec();
    if !modes.contains(&EmulationMode::Native) {
        modes.insert(0, EmulationMode::Native);
    }
    let h = config.hamiltonian()?;
    let contour = config.contour()?;
    let exact_count = h.count_in(config.e_bottom, config.e_fermi);
    let report = green_function_sweep(&h, &contour, &modes, config.block)?;
    let summaries = report
        .modes
        .iter()
        .map(|m| {
            let n_est = m.integrated_density(&contour);
            GreenSummary {
                mode: m.mode,
                n: config.n,
                max_pct_err: m.max_pct_err(),
                n_est,
                exact_count,
                n_est_err: (n_est - exact_count as f64).abs(),
                backend_gemms: m.stats.backend_gemms,
                wall_ns: m.stats.wall_ns(),
                seed: config.seed,
            }
        })
        .collect();
    Ok(GreenRun { config: config.clone(), report, summaries })
}

/// Per-node section, a blank line, then the summary section.
pub fn write_green_csv(
    path: &Path,
    run: &GreenRun,
    omit_wall_time: bool,
) -> std::result::Result<(), Box<dyn std::error::Error>> {
    let mut nodes = csv::Writer::from_writer(Vec::new());
    nodes.write_record(NODE_HEADER)?;
    for m in &run.report.modes {
        for r in &m.nodes {
            nodes.write_record([
                m.mode.label().to_string(),
                m.mode.param().to_string(),
                r.index.to_string(),
                format!("{:e}", r.z.re),
                format!("{:e}", r.z.im),
                format!("{:e}", r.pct_err),
            ])?;
        }
    }
    let mut summary = csv::Writer::from_writer(Vec::new());
    summary.write_record(SUMMARY_HEADER)?;
    for s in &run.summaries {
        summary.write_record([
            s.mode.label().to_string(),
            s.mode.param().to_string(),
            s.n.to_string(),
            format!("{:e}", s.max_pct_err),
            format!("{:.12}", s.n_est),
            s.exact_count.to_string(),
            format!("{:e}", s.n_est_err),
            s.backend_gemms.to_string(),
            if omit_wall_time { 0 } else { s.wall_ns }.to_string(),
            s.seed.to_string(),
        ])?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&nodes.into_inner()?)?;
    f.write_all(b"\n")?;
    f.write_all(&summary.into_inner()?)?;
    Ok(())
}

pub fn run_green_fn(args: &GreenArgs) -> std::result::Result<(), Box<dyn std::error::Error>> {
    let env = environment();
    let modes =
        if args.modes.is_empty() { parse_mode_config_or_ladder(&env)? } else { parse_modes(&args.modes, &env)? };
    let mut config = GreenConfig::with_window(args.n, args.nodes, args.e_bottom, args.e_fermi, args.seed);
    config.block = args.block;
    let run = green_run(&config, &modes)?;
    write_green_csv(&args.output, &run, args.omit_wall_time)
}
