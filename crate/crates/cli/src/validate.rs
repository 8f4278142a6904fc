//! Validation matrix: closed forms against quadrature and Monte-Carlo for
//! m in {1, 2, 3} and theta in {-1, -0.5, 0, 0.5, 1}.
//!
//! Capacity checks use the fig4 operating point (P_S = 10 W, N = 1e-2 W,
//! rho = 0.3), outage checks the fig8 point (N = 1e-3 W, gamma_t = 0 dB).
//! Rows with verdict MATCH or NO_MATCH record which closed-form reading of
//! a capacity agrees with quadrature; they never fail the run.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use swipt_core::metrics::{
    ergodic_capacity_rd, ergodic_capacity_sr, ergodic_capacity_sr_closed, outage_probability,
    outage_probability_expanded, outage_probability_shared_fading, rd_capacity_bracket, DerivedSnrScales,
    OutageQuery, RdPrefactor, SrVariant, SwiptSystem,
};
use swipt_core::montecarlo::{dkw_epsilon, ecdf_sorted, sample_end_to_end_snr, simulate_metrics_scales, McConfig};
use swipt_core::product_dist::{cdf_with, mean_snr_factor};
use swipt_core::{ClosedFormCoefficients, EndToEndSnrModel};

use crate::csv_out::{fmt_sig, write_atomic, write_records};
use crate::eval::{map_ordered, rd_prefactor_name, sr_variant_name};

pub const MS: [u32; 3] = [1, 2, 3];
pub const THETAS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
pub const HEADER: [&str; 10] = [
    "check",
    "m",
    "theta",
    "reference",
    "candidate",
    "difference",
    "tolerance",
    "verdict",
    "seed",
    "n_samples",
];

/// Closed-form vs quadrature tolerance for CDFs and capacities.
pub const CLOSED_TOL: f64 = 1e-6;
/// Algebraically identical outage forms.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Standard errors allowed between an exact value and its MC estimate.
pub const MC_SIGMAS: f64 = 3.0;
/// Standard errors allowed for the mean-SNR factor.
pub const MEAN_FACTOR_SIGMAS: f64 = 4.0;
/// DKW band confidence 1 - alpha.
pub const DKW_ALPHA: f64 = 0.01;
/// Points of the log y-grid for CDF sup-norms, spanning 1e-4..1e2 times gamma_hat_D.
pub const CDF_GRID_POINTS: usize = 60;

pub fn capacity_system() -> SwiptSystem {
    SwiptSystem {
        source_power: 10.0,
        noise_power: 1e-2,
        ps_factor: 0.3,
        eh_efficiency: 0.7,
        dist_sr: 2.0,
        dist_rd: 2.0,
        pathloss_exp: 2.5,
        fading_m: 1,
        theta: 0.0,
    }
}

pub fn outage_system() -> SwiptSystem {
    SwiptSystem {
        noise_power: 1e-3,
        ..capacity_system()
    }
}

pub fn cdf_grid(scale: f64) -> Vec<f64> {
    crate::config::make_grid(1e-4 * scale, 1e2 * scale, CDF_GRID_POINTS, crate::config::Spacing::Log)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Match,
    NoMatch,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "PASS",
            Self::Fail => "FAIL",
            Self::Match => "MATCH",
            Self::NoMatch => "NO_MATCH",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub m: u32,
    pub theta: f64,
    pub reference: f64,
    pub candidate: f64,
    pub difference: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// (seed, samples) for checks involving Monte-Carlo.
    pub mc: Option<(u64, u64)>,
}

impl Check {
    fn fields(&self) -> [String; 10] {
        let (seed, n) = self.mc.map(|(s, n)| (s.to_string(), n.to_string())).unwrap_or_default();
        [
            self.name.clone(),
            self.m.to_string(),
            fmt_sig(self.theta),
            fmt_sig(self.reference),
            fmt_sig(self.candidate),
            fmt_sig(self.difference),
            fmt_sig(self.tolerance),
            self.verdict.to_string(),
            seed,
            n,
        ]
    }
}

/// Test hook: scale one closed-form CDF coefficient in one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fault {
    pub m: u32,
    pub theta: f64,
    /// Multiplies the first a-coefficient by 1 + relative.
    pub relative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub fault: Option<Fault>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 1,
            workers: 1,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail).collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    /// Closed-form readings that matched quadrature in every cell.
    pub fn adjudicated(&self, prefix: &str) -> Vec<String> {
        let mut names: Vec<&str> = Vec::new();
        for c in self.checks.iter().filter(|c| c.name.starts_with(prefix)) {
            if !names.contains(&c.name.as_str()) {
                names.push(&c.name);
            }
        }
        names
            .into_iter()
            .filter(|n| {
                self.checks
                    .iter()
                    .filter(|c| c.name == *n)
                    .all(|c| c.verdict == Verdict::Match)
            })
            .map(|n| n.trim_start_matches(prefix).to_string())
            .collect()
    }

    /// Human-readable summary: one line per cell, then the adjudication.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:>2} {:>5}  {:>6}  {}\n", "m", "theta", "result", "failed checks"));
        for &m in &MS {
            for &theta in &THETAS {
                let cell: Vec<&Check> = self.checks.iter().filter(|c| c.m == m && c.theta == theta).collect();
                let failed: Vec<&str> = cell
                    .iter()
                    .filter(|c| c.verdict == Verdict::Fail)
                    .map(|c| c.name.as_str())
                    .collect();
                let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
                out.push_str(&format!("{m:>2} {theta:>5}  {verdict:>6}  {}\n", failed.join(" ")));
            }
        }
        out.push_str(&format!(
            "capacity_sr closed form matching quadrature: {}\n",
            self.adjudicated("capacity_sr_closed_").join(", ")
        ));
        out.push_str(&format!(
            "capacity_rd closed form matching quadrature: {}\n",
            self.adjudicated("capacity_rd_closed_").join(", ")
        ));
        let n_fail = self.failures().len();
        out.push_str(&if n_fail == 0 {
            "validation PASS\n".to_string()
        } else {
            format!("validation FAIL ({n_fail} failed checks)\n")
        });
        out
    }
}

struct CellBuilder {
    m: u32,
    theta: f64,
    checks: Vec<Check>,
}

impl CellBuilder {
    fn tol(&mut self, name: &str, reference: f64, candidate: f64, tolerance: f64, mc: Option<(u64, u64)>) {
        let difference = (candidate - reference).abs();
        let verdict = if difference <= tolerance { Verdict::Pass } else { Verdict::Fail };
        self.push(name, reference, candidate, difference, tolerance, verdict, mc);
    }

    fn adjudicate(&mut self, name: &str, reference: f64, candidate: f64) {
        let difference = (candidate - reference).abs();
        let verdict = if difference <= CLOSED_TOL { Verdict::Match } else { Verdict::NoMatch };
        self.push(name, reference, candidate, difference, CLOSED_TOL, verdict, None);
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        name: &str,
        reference: f64,
        candidate: f64,
        difference: f64,
        tolerance: f64,
        verdict: Verdict,
        mc: Option<(u64, u64)>,
    ) {
        self.checks.push(Check {
            name: name.to_string(),
            m: self.m,
            theta: self.theta,
            reference,
            candidate,
            difference,
            tolerance,
            verdict,
            mc,
        });
    }
}

fn validate_cell(m: u32, theta: f64, opts: &ValidationOptions) -> anyhow::Result<Vec<Check>> {
    let mut cell = CellBuilder {
        m,
        theta,
        checks: Vec::new(),
    };
    let mc = McConfig::new(opts.samples, opts.seed);
    let mc_tag = Some((opts.seed, opts.samples));
    let cap: DerivedSnrScales = capacity_system().snr_scales()?;
    let out: DerivedSnrScales = outage_system().snr_scales()?;
    let q = OutageQuery::from_db(0.0)?;

    let mut coef = ClosedFormCoefficients::new(m, cap.gamma_hat_d)?;
    if let Some(f) = opts.fault.filter(|f| f.m == m && f.theta == theta) {
        coef.a[0] *= 1.0 + f.relative;
    }
    let model = EndToEndSnrModel::fgm_nakagami(cap.gamma_hat_d, m as f64, theta)?;

    // CDF: closed form against quadrature and against the empirical CDF.
    let grid = cdf_grid(cap.gamma_hat_d);
    let mut worst = (0.0, 0.0, -1.0);
    let mut closed_at = Vec::with_capacity(grid.len());
    for &y in &grid {
        // An out-of-range closed form is a failed check, not an aborted run.
        let c = match cdf_with(&coef, theta, y) {
            Err(swipt_core::Error::ClosedFormRange(raw)) => raw,
            r => r?,
        };
        let g = model.product_cdf_general(y)?;
        closed_at.push(c);
        if (c - g).abs() > worst.2 {
            worst = (g, c, (c - g).abs());
        }
    }
    cell.tol("cdf_closed_vs_quadrature", worst.0, worst.1, CLOSED_TOL, None);

    let mut ys = sample_end_to_end_snr(&model, &mc)?;
    ys.sort_by(f64::total_cmp);
    let mut worst = (0.0, 0.0, -1.0);
    for (&y, &c) in grid.iter().zip(&closed_at) {
        let e = ecdf_sorted(&ys, y);
        if (e - c).abs() > worst.2 {
            worst = (c, e, (e - c).abs());
        }
    }
    cell.tol("cdf_closed_vs_mc_dkw99", worst.0, worst.1, dkw_epsilon(opts.samples, DKW_ALPHA), mc_tag);
    drop(ys);

    // Capacities.
    let sr_quad = ergodic_capacity_sr(cap.gamma_hat_r, m)?;
    let rd_quad = ergodic_capacity_rd(cap.gamma_hat_d, m, theta)?;
    for v in [SrVariant::ShapeOnly, SrVariant::Printed] {
        let c = ergodic_capacity_sr_closed(cap.gamma_hat_r, m, v)?;
        cell.adjudicate(&format!("capacity_sr_closed_{}", sr_variant_name(v)), sr_quad, c);
    }
    let bracket = rd_capacity_bracket(&coef, theta)?;
    for p in [RdPrefactor::Bare, RdPrefactor::D, RdPrefactor::PiD] {
        let c = match p {
            RdPrefactor::Bare => bracket,
            RdPrefactor::D => coef.big_d * bracket,
            RdPrefactor::PiD => PI * coef.big_d * bracket,
        };
        cell.adjudicate(&format!("capacity_rd_closed_{}", rd_prefactor_name(p)), rd_quad, c);
    }
    let sim = simulate_metrics_scales(cap, m as f64, theta, OutageQuery::new(1.0)?, &mc)?;
    cell.tol("capacity_sr_quadrature_vs_mc", sr_quad, sim.cap_sr.mean, MC_SIGMAS * sim.cap_sr.stderr, mc_tag);
    cell.tol("capacity_rd_quadrature_vs_mc", rd_quad, sim.cap_rd.mean, MC_SIGMAS * sim.cap_rd.stderr, mc_tag);
    let factor = mean_snr_factor(m, theta)?;
    cell.tol(
        "mean_snr_factor_vs_mc",
        factor,
        sim.mean_snr_d.mean / cap.gamma_hat_d,
        MEAN_FACTOR_SIGMAS * sim.mean_snr_d.stderr / cap.gamma_hat_d,
        mc_tag,
    );

    // Outage.
    let closed = outage_probability(out, m, theta, q)?;
    let expanded = outage_probability_expanded(out, m, theta, q)?;
    cell.tol("outage_closed_vs_expanded", closed, expanded, IDENTITY_TOL, None);
    let shared = outage_probability_shared_fading(out, m, theta, q)?;
    let sim = simulate_metrics_scales(out, m as f64, theta, q, &mc)?;
    cell.tol("outage_closed_vs_mc", closed, sim.outage.mean, MC_SIGMAS * sim.outage.stderr, mc_tag);
    cell.tol("outage_shared_quadrature_vs_mc", shared, sim.outage.mean, MC_SIGMAS * sim.outage.stderr, mc_tag);
    Ok(cell.checks)
}

/// Run the full matrix; cells are spread over `opts.workers` threads and
/// reported in (m, theta) order.
pub fn run_validation(opts: &ValidationOptions) -> anyhow::Result<ValidationReport> {
    anyhow::ensure!(opts.samples >= 2, "validation needs at least 2 samples");
    anyhow::ensure!(opts.workers >= 1, "workers must be at least 1");
    let cells: Vec<(u32, f64)> = MS.iter().flat_map(|&m| THETAS.iter().map(move |&t| (m, t))).collect();
    let results = map_ordered(&cells, opts.workers, |&(m, theta)| {
        validate_cell(m, theta, opts).map_err(|e| anyhow::anyhow!("cell m = {m}, theta = {theta}: {e}"))
    });
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    Ok(ValidationReport { checks })
}

pub fn write_report(path: &Path, report: &ValidationReport) -> anyhow::Result<()> {
    write_atomic(path, |out| write_records(out, &HEADER, report.checks.iter().map(Check::fields)))
}
