use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use tprabi::config::{normalize_key, read_config_file};
use tprabi::{render, run, Command, RunConfig};

#[derive(Parser)]
#[command(name = "tprabi", version, about = "Spectra, degenerate and exceptional points, collapse-point bound states")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// G+ and G- along an energy range at fixed coupling
    Gcurve(Opts),
    /// Energy levels, pole lines and degenerate points over a coupling range
    Spectrum(Opts),
    /// Roots of F_n(g) per splitting
    Degenerate(Opts),
    /// Exceptional G-function near the collapse point and its zeros
    Exceptional(Opts),
    /// Bound states of the collapse-point problem
    Collapse(Opts),
    /// Fock-space exact diagonalization
    Ed(Opts),
    /// Rescaled recurrence coefficients at one energy
    Coeffs(Opts),
}

/// Every option is also accepted as `key = value` in the `--config` file;
/// flags win over the file.
#[derive(Args)]
struct Opts {
    /// Config file with `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// lo:hi:points
    #[arg(long)]
    delta_range: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    g: Option<String>,
    /// lo:hi:points
    #[arg(long)]
    g_range: Option<String>,
    /// 1/4, 3/4 or both
    #[arg(long)]
    q: Option<String>,
    /// +, - or both
    #[arg(long, allow_hyphen_values = true)]
    parity: Option<String>,
    /// Comma-separated series truncations
    #[arg(long)]
    trunc: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// Fock-space dimension
    #[arg(long)]
    dim: Option<String>,
    /// Half width L of the collapse-problem box
    #[arg(long)]
    half_width: Option<String>,
    /// Collapse-problem grid spacing
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    states: Option<String>,
    /// lo:hi:points
    #[arg(long, allow_hyphen_values = true)]
    e_range: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<String>,
    /// lo:hi:points in -log10(1 - g/g_c)
    #[arg(long)]
    x_range: Option<String>,
    /// Comma-separated pole-line indices
    #[arg(long)]
    n: Option<String>,
    /// Pole line of the exceptional G-function
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    scaled: Option<String>,
    #[arg(long)]
    ed: Option<String>,
    #[arg(long)]
    wavefunction: Option<String>,
    #[arg(long)]
    y_max: Option<String>,
    /// Worker threads, 0 for all cores
    #[arg(long)]
    threads: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<String>,
}

impl Opts {
    fn flags(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("delta", &self.delta),
            ("delta_range", &self.delta_range),
            ("r", &self.r),
            ("g", &self.g),
            ("g_range", &self.g_range),
            ("q", &self.q),
            ("parity", &self.parity),
            ("trunc", &self.trunc),
            ("tol", &self.tol),
            ("dim", &self.dim),
            ("half_width", &self.half_width),
            ("h", &self.h),
            ("states", &self.states),
            ("e_range", &self.e_range),
            ("energy", &self.energy),
            ("x_range", &self.x_range),
            ("n", &self.n),
            ("m", &self.m),
            ("scaled", &self.scaled),
            ("ed", &self.ed),
            ("wavefunction", &self.wavefunction),
            ("y_max", &self.y_max),
            ("threads", &self.threads),
            ("format", &self.format),
            ("out", &self.out),
        ]
    }

    fn merged(&self) -> anyhow::Result<BTreeMap<String, String>> {
        let mut map = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        for (k, v) in self.flags() {
            if let Some(v) = v {
                map.insert(normalize_key(k), v.clone());
            }
        }
        Ok(map)
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (command, opts) = match &cli.command {
        Cmd::Gcurve(o) => (Command::Gcurve, o),
        Cmd::Spectrum(o) => (Command::Spectrum, o),
        Cmd::Degenerate(o) => (Command::Degenerate, o),
        Cmd::Exceptional(o) => (Command::Exceptional, o),
        Cmd::Collapse(o) => (Command::Collapse, o),
        Cmd::Ed(o) => (Command::Ed, o),
        Cmd::Coeffs(o) => (Command::Coeffs, o),
    };
    let cfg = RunConfig::from_map(command, &opts.merged()?)?;
    let table = run(&cfg)?;
    let text = render(&cfg, &table);
    match &cfg.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
