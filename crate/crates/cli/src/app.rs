//! Command-line interface.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use swipt_core::metrics::{capacity_rd_report, capacity_sr_report, RdPrefactor, SrVariant};
use swipt_core::montecarlo::DEFAULT_BATCH_SIZE;

use crate::config::{load_config, MetricGroup, Mode, SweepSpec};
use crate::csv_out::{fmt_sig, write_atomic, write_rows};
use crate::eval::{rd_prefactor_name, run_sweep, sr_variant_name, ADJUDICATED_RD, ADJUDICATED_SR};
use crate::validate::{run_validation, write_report, ValidationOptions, CLOSED_TOL};

#[derive(Debug, Parser)]
#[command(name = "swipt", version, about = "Dual-hop SWIPT relay metrics under FGM-dependent Nakagami-m fading")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Monte-Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte-Carlo sample count per cell.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Comma-separated subset of closed_form, quadrature, monte_carlo, asymptotic.
    #[arg(long, global = true)]
    pub modes: Option<String>,
    /// Also write a gnuplot script next to the CSV (<csv>.gp).
    #[arg(long, global = true)]
    pub emit_gnuplot: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a sweep described by a config file.
    Sweep {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the closed-form / quadrature / Monte-Carlo validation matrix.
    Validate {
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Evaluate a built-in figure preset.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(crate::presets::NAMES))]
        name: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare exact and high-SNR values over a config's sweep.
    Asymptotic {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Outcome of a successful invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    ValidationFailed,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn apply_flags(cli: &Cli, spec: &mut SweepSpec) -> anyhow::Result<()> {
    if let Some(s) = cli.samples {
        spec.mc.samples = s;
        spec.mc.batch_size = DEFAULT_BATCH_SIZE.min(s.max(1));
    }
    if let Some(s) = cli.seed {
        spec.mc.seed = s;
    }
    spec.mc.workers = cli.workers.unwrap_or_else(default_workers);
    if let Some(m) = &cli.modes {
        spec.modes = Mode::parse_list(m).map_err(anyhow::Error::msg)?;
    }
    Ok(())
}

/// `<path>` with `suffix` appended.
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(suffix);
    p.into()
}

fn list(xs: impl IntoIterator<Item = String>) -> String {
    xs.into_iter().collect::<Vec<_>>().join(", ")
}

/// Sidecar metadata: every resolved setting plus the closed-form adjudication.
fn sweep_meta(command: &str, spec: &SweepSpec) -> anyhow::Result<String> {
    let b = &spec.base;
    let opt = |x: Option<f64>| x.map_or_else(|| "derived".to_string(), fmt_sig);
    let mut s = String::new();
    writeln!(s, "tool = swipt {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(s, "command = {command}")?;
    writeln!(s, "variable = {}", spec.variable)?;
    writeln!(s, "grid = {}", list(spec.grid.iter().map(|&v| fmt_sig(v))))?;
    writeln!(s, "source_power = {}", fmt_sig(b.source_power))?;
    writeln!(s, "noise_power = {}", fmt_sig(b.noise_power))?;
    writeln!(s, "rho = {}", fmt_sig(b.rho))?;
    writeln!(s, "eh_efficiency = {}", fmt_sig(b.eh_efficiency))?;
    writeln!(s, "dist_sr = {}", fmt_sig(b.dist_sr))?;
    match b.dist_total {
        Some(t) => writeln!(s, "dist_rd = {} - dist_sr", fmt_sig(t))?,
        None => writeln!(s, "dist_rd = {}", fmt_sig(b.dist_rd))?,
    }
    writeln!(s, "pathloss_exp = {}", fmt_sig(b.pathloss_exp))?;
    writeln!(s, "gamma_hat_r = {}", opt(b.gamma_hat_r))?;
    writeln!(s, "gamma_hat_d = {}", opt(b.gamma_hat_d))?;
    if spec.metrics.contains(&MetricGroup::Outage) {
        writeln!(s, "threshold = {}", fmt_sig(b.threshold))?;
    }
    writeln!(s, "theta = {}", list(spec.thetas.iter().map(|&t| fmt_sig(t))))?;
    writeln!(s, "m = {}", list(spec.ms.iter().map(|m| m.to_string())))?;
    writeln!(s, "modes = {}", list(spec.modes.iter().map(|m| m.name().to_string())))?;
    writeln!(s, "metrics = {}", list(spec.metrics.iter().map(|m| m.name().to_string())))?;
    if spec.modes.contains(&Mode::MonteCarlo) {
        writeln!(s, "mc_samples = {}", spec.mc.samples)?;
        writeln!(s, "mc_seed = {}", spec.mc.seed)?;
        writeln!(s, "mc_batch_size = {}", spec.mc.batch_size)?;
        writeln!(s, "mc_generator = ChaCha12, seed_from_u64(seed), stream = batch index")?;
    }
    if spec.modes.contains(&Mode::Quadrature) && spec.metrics.contains(&MetricGroup::Outage) {
        writeln!(s, "outage_quadrature = exact integral with g_SR shared by both hops")?;
    }
    let wants_cap = spec.metrics.iter().any(|m| matches!(m, MetricGroup::Capacity | MetricGroup::CapacitySr));
    if wants_cap && spec.modes.contains(&Mode::ClosedForm) {
        // Adjudicate the closed-form readings at the first grid cell.
        let p = spec.points()[0];
        let r = spec.resolve(p)?;
        let sr = capacity_sr_report(r.scales.gamma_hat_r, p.m)?;
        let names = |v: Vec<SrVariant>| list(v.into_iter().map(|v| sr_variant_name(v).to_string()));
        writeln!(
            s,
            "capacity_sr_closed_matching_quadrature = {} (tolerance {}, first cell)",
            names(sr.matching(CLOSED_TOL)),
            fmt_sig(CLOSED_TOL)
        )?;
        if spec.metrics.contains(&MetricGroup::Capacity) {
            let rd = capacity_rd_report(r.scales.gamma_hat_d, p.m, p.theta)?;
            let names = |v: Vec<RdPrefactor>| list(v.into_iter().map(|v| rd_prefactor_name(v).to_string()));
            writeln!(
                s,
                "capacity_rd_closed_matching_quadrature = {} (tolerance {}, first cell)",
                names(rd.matching(CLOSED_TOL)),
                fmt_sig(CLOSED_TOL)
            )?;
            writeln!(
                s,
                "capacity_min_of_means_closed_uses = sr {}, rd {}",
                sr_variant_name(ADJUDICATED_SR),
                rd_prefactor_name(ADJUDICATED_RD)
            )?;
        }
    }
    Ok(s)
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    write_atomic(path, |out| Ok(out.write_all(text.as_bytes())?))
}

fn run_spec(cli: &Cli, command: &str, mut spec: SweepSpec, output: &Path) -> anyhow::Result<Outcome> {
    apply_flags(cli, &mut spec)?;
    spec.validate()?;
    let result = run_sweep(&spec)?;
    for note in &result.notes {
        eprintln!("note: {note}");
    }
    let meta = sweep_meta(command, &spec)?;
    write_rows(output, &result.rows)?;
    let finish = || -> anyhow::Result<()> {
        write_text(&sidecar(output, ".meta"), &meta)?;
        if cli.emit_gnuplot {
            let name = output.file_name().map_or_else(|| output.display().to_string(), |n| n.to_string_lossy().into_owned());
            write_text(&sidecar(output, ".gp"), &crate::gnuplot::script(&spec, &result.rows, &name))?;
        }
        Ok(())
    };
    if let Err(e) = finish() {
        let _ = std::fs::remove_file(output);
        let _ = std::fs::remove_file(sidecar(output, ".meta"));
        return Err(e);
    }
    eprintln!("wrote {} rows to {}", result.rows.len(), output.display());
    Ok(Outcome::Done)
}

pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Sweep { config, output } => {
            let spec = load_config(config)?;
            run_spec(cli, "sweep", spec, output)
        }
        Command::Preset { name, output } => {
            let spec = crate::presets::preset(name).ok_or_else(|| anyhow::anyhow!("unknown preset {name}"))?;
            run_spec(cli, &format!("preset {name}"), spec, output)
        }
        Command::Asymptotic { config, output } => {
            let mut spec = load_config(config)?;
            anyhow::ensure!(
                spec.metrics.iter().any(|m| matches!(m, MetricGroup::CapacitySr | MetricGroup::Capacity | MetricGroup::Outage)),
                "no metric with a high-SNR form selected"
            );
            spec.modes = vec![Mode::ClosedForm, Mode::Quadrature, Mode::Asymptotic];
            run_spec(cli, "asymptotic", spec, output)
        }
        Command::Validate { output } => {
            anyhow::ensure!(cli.modes.is_none(), "--modes does not apply to validate");
            let mut opts = ValidationOptions {
                workers: cli.workers.unwrap_or_else(default_workers),
                ..Default::default()
            };
            if let Some(s) = cli.samples {
                opts.samples = s;
            }
            if let Some(s) = cli.seed {
                opts.seed = s;
            }
            let report = run_validation(&opts)?;
            print!("{}", report.summary());
            let mut meta = String::new();
            writeln!(meta, "tool = swipt {}", env!("CARGO_PKG_VERSION"))?;
            writeln!(meta, "command = validate")?;
            writeln!(meta, "mc_samples = {}", opts.samples)?;
            writeln!(meta, "mc_seed = {}", opts.seed)?;
            writeln!(meta, "capacity_sr_closed_matching_quadrature = {}", report.adjudicated("capacity_sr_closed_").join(", "))?;
            writeln!(meta, "capacity_rd_closed_matching_quadrature = {}", report.adjudicated("capacity_rd_closed_").join(", "))?;
            write_report(output, &report)?;
            if let Err(e) = write_text(&sidecar(output, ".meta"), &meta) {
                let _ = std::fs::remove_file(output);
                return Err(e);
            }
            Ok(if report.passed() { Outcome::Done } else { Outcome::ValidationFailed })
        }
    }
}
