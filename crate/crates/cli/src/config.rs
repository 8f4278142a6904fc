//! Sweep definitions and their text configuration format.
//!
//! A config file holds `key = value` lines under `[system]`, `[outage]`,
//! `[sweep]` and `[mc]` headers. Lists are comma separated. A key ending in
//! `_db` is converted to linear at parse time and stored under its base name.
//! Unknown sections or keys, repeated keys and keys outside a section are
//! errors.

use std::fmt;
use std::path::Path;

use ini::{Ini, ParseOption};
use swipt_core::metrics::{db_to_linear, DerivedSnrScales, OutageQuery, SwiptSystem};
use swipt_core::montecarlo::{McConfig, DEFAULT_BATCH_SIZE};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("[{section}] {key}: {reason}")]
    Key {
        section: String,
        key: String,
        reason: String,
    },
    #[error("invalid sweep: {0}")]
    Invalid(String),
}

fn key_err(section: &str, key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Key {
        section: section.to_string(),
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Quantity placed on the x-axis of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    Rho,
    SourcePower,
    EhEfficiency,
    NoisePower,
    DistSr,
    GammaHatD,
    GammaHatR,
    Threshold,
    Theta,
    M,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 10] = [
        Self::Rho,
        Self::SourcePower,
        Self::EhEfficiency,
        Self::NoisePower,
        Self::DistSr,
        Self::GammaHatD,
        Self::GammaHatR,
        Self::Threshold,
        Self::Theta,
        Self::M,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rho => "rho",
            Self::SourcePower => "source_power",
            Self::EhEfficiency => "eh_efficiency",
            Self::NoisePower => "noise_power",
            Self::DistSr => "dist_sr",
            Self::GammaHatD => "gamma_hat_d",
            Self::GammaHatR => "gamma_hat_r",
            Self::Threshold => "threshold",
            Self::Theta => "theta",
            Self::M => "m",
        }
    }

    fn accepts_db(self) -> bool {
        matches!(
            self,
            Self::SourcePower | Self::NoisePower | Self::GammaHatD | Self::GammaHatR | Self::Threshold
        )
    }

    /// Parse a variable name; `<name>_db` marks a grid given in decibels.
    pub fn parse(s: &str) -> Option<(Self, bool)> {
        let (base, db) = match s.strip_suffix("_db") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let v = Self::ALL.into_iter().find(|v| v.name() == base)?;
        if db && !v.accepts_db() {
            return None;
        }
        Some((v, db))
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a metric value is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    ClosedForm,
    Quadrature,
    MonteCarlo,
    Asymptotic,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Self::ClosedForm, Self::Quadrature, Self::MonteCarlo, Self::Asymptotic];

    pub fn name(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::Quadrature => "quadrature",
            Self::MonteCarlo => "monte_carlo",
            Self::Asymptotic => "asymptotic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    /// Parse a comma-separated mode list, keeping the given order.
    pub fn parse_list(s: &str) -> Result<Vec<Self>, String> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim) {
            let mode = Self::parse(item).ok_or_else(|| {
                format!(
                    "unknown mode {item:?}; expected one of {}",
                    Self::ALL.map(Self::name).join(", ")
                )
            })?;
            if out.contains(&mode) {
                return Err(format!("mode {item} listed twice"));
            }
            out.push(mode);
        }
        Ok(out)
    }
}

/// Which metric families a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricGroup {
    /// Both hop capacities and the end-to-end capacity.
    Capacity,
    /// The SR hop capacity only.
    CapacitySr,
    Outage,
}

impl MetricGroup {
    pub const ALL: [MetricGroup; 3] = [Self::Capacity, Self::CapacitySr, Self::Outage];

    pub fn name(self) -> &'static str {
        match self {
            Self::Capacity => "capacity",
            Self::CapacitySr => "capacity_sr",
            Self::Outage => "outage",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Fixed parameters every grid point starts from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    pub source_power: f64,
    pub noise_power: f64,
    pub rho: f64,
    pub eh_efficiency: f64,
    pub dist_sr: f64,
    pub dist_rd: f64,
    pub pathloss_exp: f64,
    /// gamma_t, linear.
    pub threshold: f64,
    /// Pins gamma_hat_R instead of deriving it from the physical parameters.
    pub gamma_hat_r: Option<f64>,
    /// Pins gamma_hat_D instead of deriving it from the physical parameters.
    pub gamma_hat_d: Option<f64>,
    /// d_SR + d_RD held fixed while sweeping d_SR.
    pub dist_total: Option<f64>,
}

/// Fully resolved parameters of one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub system: SwiptSystem,
    pub scales: DerivedSnrScales,
    pub query: OutageQuery,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub spacing: Spacing,
    pub base: Baseline,
    pub thetas: Vec<f64>,
    pub ms: Vec<u32>,
    pub modes: Vec<Mode>,
    pub metrics: Vec<MetricGroup>,
    pub mc: McConfig,
}

/// One (grid value, theta, m) evaluation cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub value: f64,
    pub theta: f64,
    pub m: u32,
}

impl SweepSpec {
    /// Cells in output order: grid value, then theta, then m.
    pub fn points(&self) -> Vec<Point> {
        let thetas: Vec<f64> = if self.variable == SweepVariable::Theta {
            vec![f64::NAN]
        } else {
            self.thetas.clone()
        };
        let ms: Vec<u32> = if self.variable == SweepVariable::M {
            vec![0]
        } else {
            self.ms.clone()
        };
        let mut out = Vec::new();
        for &value in &self.grid {
            for &theta in &thetas {
                for &m in &ms {
                    let (theta, m) = match self.variable {
                        SweepVariable::Theta => (value, m),
                        SweepVariable::M => (theta, value as u32),
                        _ => (theta, m),
                    };
                    out.push(Point { value, theta, m });
                }
            }
        }
        out
    }

    /// Apply the swept value to the baseline and derive the SNR scales.
    pub fn resolve(&self, p: Point) -> Result<Resolved, ConfigError> {
        let mut b = self.base;
        let v = p.value;
        match self.variable {
            SweepVariable::Rho => b.rho = v,
            SweepVariable::SourcePower => b.source_power = v,
            SweepVariable::EhEfficiency => b.eh_efficiency = v,
            SweepVariable::NoisePower => b.noise_power = v,
            SweepVariable::DistSr => {
                b.dist_sr = v;
                if let Some(total) = b.dist_total {
                    b.dist_rd = total - v;
                }
            }
            SweepVariable::GammaHatD => b.gamma_hat_d = Some(v),
            SweepVariable::GammaHatR => b.gamma_hat_r = Some(v),
            SweepVariable::Threshold => b.threshold = v,
            SweepVariable::Theta | SweepVariable::M => {}
        }
        let system = SwiptSystem {
            source_power: b.source_power,
            noise_power: b.noise_power,
            ps_factor: b.rho,
            eh_efficiency: b.eh_efficiency,
            dist_sr: b.dist_sr,
            dist_rd: b.dist_rd,
            pathloss_exp: b.pathloss_exp,
            fading_m: p.m,
            theta: p.theta,
        };
        let at = |e: swipt_core::Error| {
            ConfigError::Invalid(format!("{} = {}: {e}", self.variable, crate::csv_out::fmt_sig(v)))
        };
        let mut scales = system.snr_scales().map_err(at)?;
        for (pin, slot, name) in [
            (b.gamma_hat_r, &mut scales.gamma_hat_r, "gamma_hat_r"),
            (b.gamma_hat_d, &mut scales.gamma_hat_d, "gamma_hat_d"),
        ] {
            if let Some(g) = pin {
                if !(g > 0.0 && g.is_finite()) {
                    return Err(ConfigError::Invalid(format!("{name} must be positive, got {g}")));
                }
                *slot = g;
            }
        }
        let query = OutageQuery::new(b.threshold).map_err(at)?;
        Ok(Resolved { system, scales, query })
    }

    /// Check every grid point and the global shape of the sweep.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |s: String| Err(ConfigError::Invalid(s));
        if self.grid.is_empty() {
            return invalid("grid is empty".into());
        }
        if self.modes.is_empty() {
            return invalid("no modes selected".into());
        }
        if self.metrics.is_empty() {
            return invalid("no metrics selected".into());
        }
        if self.variable != SweepVariable::Theta && self.thetas.is_empty() {
            return invalid("theta list is empty".into());
        }
        if self.variable != SweepVariable::M && self.ms.is_empty() {
            return invalid("m list is empty".into());
        }
        if self.base.dist_total.is_some() && self.variable != SweepVariable::DistSr {
            return invalid("dist_total only applies to dist_sr sweeps".into());
        }
        if self.variable == SweepVariable::M {
            if let Some(v) = self.grid.iter().find(|v| !(v.fract() == 0.0 && **v >= 1.0 && **v <= 64.0)) {
                return invalid(format!("m grid values must be integers in [1, 64], got {v}"));
            }
        }
        if let Some(&m) = self.ms.iter().find(|&&m| m == 0 || m > 64) {
            return invalid(format!("m must be an integer in [1, 64], got {m}"));
        }
        if let Some(total) = self.base.dist_total {
            if let Some(v) = self.grid.iter().find(|&&v| v >= total) {
                return invalid(format!("dist_sr = {v} leaves no room within dist_total = {total}"));
            }
        }
        self.mc
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("monte-carlo settings: {e}")))?;
        for p in self.points() {
            self.resolve(p)?;
        }
        Ok(())
    }
}

const SECTIONS: [&str; 4] = ["system", "outage", "sweep", "mc"];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "system" => &[
            "source_power",
            "noise_power",
            "rho",
            "eh_efficiency",
            "dist_sr",
            "dist_rd",
            "pathloss_exp",
            "gamma_hat_r",
            "gamma_hat_d",
        ],
        "outage" => &["threshold"],
        "sweep" => &[
            "variable", "values", "start", "stop", "count", "spacing", "theta", "m", "modes", "metrics", "dist_total",
        ],
        "mc" => &["samples", "seed", "workers", "batch_size"],
        _ => &[],
    }
}

fn db_convertible(section: &str, key: &str) -> bool {
    matches!(
        (section, key),
        ("system", "source_power" | "noise_power" | "gamma_hat_r" | "gamma_hat_d") | ("outage", "threshold")
    )
}

/// Key/value table of one section after `_db` conversion.
struct Section {
    name: &'static str,
    entries: Vec<(String, String, bool)>,
}

impl Section {
    fn raw(&self, key: &str) -> Option<(&str, bool)> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, db)| (v.as_str(), *db))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some((v, db)) = self.raw(key) else {
            return Ok(None);
        };
        let x: f64 = v
            .parse()
            .map_err(|_| key_err(self.name, key, format!("expected a number, got {v:?}")))?;
        if !x.is_finite() {
            return Err(key_err(self.name, key, "value must be finite"));
        }
        Ok(Some(if db { db_to_linear(x) } else { x }))
    }

    fn required(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64(key)?.ok_or_else(|| key_err(self.name, key, "missing"))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some((v, _)) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(str::trim)
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| key_err(self.name, key, format!("expected a number, got {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.raw(key)
            .map(|(v, _)| {
                v.parse::<u64>()
                    .map_err(|_| key_err(self.name, key, format!("expected a non-negative integer, got {v:?}")))
            })
            .transpose()
    }
}

fn sections(text: &str) -> Result<Vec<Section>, ConfigError> {
    let opt = ParseOption {
        enabled_quote: false,
        enabled_escape: false,
        ..ParseOption::default()
    };
    let ini = Ini::load_from_str_opt(text, opt).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut out = Vec::new();
    for (name, props) in ini.iter() {
        let Some(name) = name else {
            if let Some((k, _)) = props.iter().next() {
                return Err(ConfigError::Syntax(format!("key {k:?} appears before any [section] header")));
            }
            continue;
        };
        let name = SECTIONS.into_iter().find(|s| *s == name).ok_or_else(|| {
            ConfigError::Syntax(format!("unknown section [{name}]; expected one of {}", SECTIONS.join(", ")))
        })?;
        if out.iter().any(|s: &Section| s.name == name) {
            return Err(ConfigError::Syntax(format!("section [{name}] appears twice")));
        }
        let mut entries: Vec<(String, String, bool)> = Vec::new();
        for (k, v) in props.iter() {
            let (base, db) = match k.strip_suffix("_db") {
                Some(b) if db_convertible(name, b) => (b, true),
                _ => (k, false),
            };
            if !allowed_keys(name).contains(&base) {
                return Err(key_err(name, k, "unknown key"));
            }
            if entries.iter().any(|(e, _, _)| e == base) {
                return Err(key_err(name, base, "given more than once"));
            }
            entries.push((base.to_string(), v.trim().to_string(), db));
        }
        out.push(Section { name, entries });
    }
    Ok(out)
}

/// Linear or logarithmic grid of `count` points from `start` to `stop`.
pub fn make_grid(start: f64, stop: f64, count: usize, spacing: Spacing) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| {
            let f = i as f64 / (count - 1) as f64;
            match spacing {
                Spacing::Linear => start + (stop - start) * f,
                Spacing::Log => (start.ln() + (stop.ln() - start.ln()) * f).exp(),
            }
        })
        .collect()
}

/// Default Monte-Carlo settings for sweeps and presets.
pub fn default_mc() -> McConfig {
    McConfig {
        samples: 100_000,
        seed: 1,
        workers: 1,
        batch_size: DEFAULT_BATCH_SIZE.min(100_000),
    }
}

pub fn parse_config(text: &str) -> Result<SweepSpec, ConfigError> {
    let secs = sections(text)?;
    let empty = |name| Section {
        name,
        entries: Vec::new(),
    };
    let take = |name: &'static str| secs.iter().find(|s| s.name == name);
    let system = take("system").ok_or_else(|| ConfigError::Syntax("missing [system] section".into()))?;
    let sweep = take("sweep").ok_or_else(|| ConfigError::Syntax("missing [sweep] section".into()))?;
    let empty_outage = empty("outage");
    let outage = take("outage").unwrap_or(&empty_outage);
    let empty_mc = empty("mc");
    let mc = take("mc").unwrap_or(&empty_mc);

    let (vname, _) = sweep.raw("variable").ok_or_else(|| key_err("sweep", "variable", "missing"))?;
    let (variable, grid_db) = SweepVariable::parse(vname).ok_or_else(|| {
        key_err(
            "sweep",
            "variable",
            format!(
                "unknown variable {vname:?}; expected one of {}",
                SweepVariable::ALL.map(SweepVariable::name).join(", ")
            ),
        )
    })?;

    let metrics = match sweep.raw("metrics") {
        None => return Err(key_err("sweep", "metrics", "missing")),
        Some((v, _)) => v
            .split(',')
            .map(str::trim)
            .map(|s| {
                MetricGroup::parse(s).ok_or_else(|| {
                    key_err(
                        "sweep",
                        "metrics",
                        format!("unknown metric {s:?}; expected one of {}", MetricGroup::ALL.map(MetricGroup::name).join(", ")),
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let needs_threshold = metrics.contains(&MetricGroup::Outage) && variable != SweepVariable::Threshold;

    let threshold = match outage.f64("threshold")? {
        Some(t) => t,
        None if needs_threshold => return Err(key_err("outage", "threshold", "missing (outage metrics requested)")),
        None => 1.0,
    };

    let spacing = match sweep.raw("spacing").map(|(v, _)| v) {
        None | Some("linear") => Spacing::Linear,
        Some("log") => Spacing::Log,
        Some(other) => return Err(key_err("sweep", "spacing", format!("expected linear or log, got {other:?}"))),
    };
    let explicit = sweep.list("values")?;
    let ranged = [sweep.raw("start"), sweep.raw("stop"), sweep.raw("count")];
    let mut grid = match (explicit, ranged.iter().any(Option::is_some)) {
        (Some(_), true) => return Err(key_err("sweep", "values", "give either values or start/stop/count, not both")),
        (Some(v), false) => v,
        (None, _) => {
            let start = sweep.required("start")?;
            let stop = sweep.required("stop")?;
            let count = sweep.u64("count")?.ok_or_else(|| key_err("sweep", "count", "missing"))? as usize;
            if count == 0 {
                return Err(key_err("sweep", "count", "grid is empty"));
            }
            if spacing == Spacing::Log && !(start > 0.0 && stop > 0.0) {
                return Err(key_err("sweep", "spacing", "log spacing needs positive start and stop"));
            }
            make_grid(start, stop, count, spacing)
        }
    };
    if grid_db {
        grid.iter_mut().for_each(|v| *v = db_to_linear(*v));
    }

    let thetas = sweep.list("theta")?.unwrap_or_default();
    if variable == SweepVariable::Theta && !thetas.is_empty() {
        return Err(key_err("sweep", "theta", "theta is the swept variable; remove the fixed list"));
    }
    let ms = match sweep.list("m")? {
        Some(_) if variable == SweepVariable::M => {
            return Err(key_err("sweep", "m", "m is the swept variable; remove the fixed list"))
        }
        Some(v) => v
            .into_iter()
            .map(|x| {
                if x.fract() == 0.0 && (1.0..=64.0).contains(&x) {
                    Ok(x as u32)
                } else {
                    Err(key_err("sweep", "m", format!("closed forms need integer m in [1, 64], got {x}")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    let modes = match sweep.raw("modes") {
        Some((v, _)) => Mode::parse_list(v).map_err(|r| key_err("sweep", "modes", r))?,
        None => vec![Mode::ClosedForm, Mode::Quadrature],
    };

    let needed = |key: &str, swept: SweepVariable| -> Result<f64, ConfigError> {
        if variable == swept {
            Ok(system.f64(key)?.unwrap_or(f64::NAN))
        } else {
            system.required(key)
        }
    };
    let mut base = Baseline {
        source_power: needed("source_power", SweepVariable::SourcePower)?,
        noise_power: needed("noise_power", SweepVariable::NoisePower)?,
        rho: needed("rho", SweepVariable::Rho)?,
        eh_efficiency: needed("eh_efficiency", SweepVariable::EhEfficiency)?,
        dist_sr: needed("dist_sr", SweepVariable::DistSr)?,
        dist_rd: system.f64("dist_rd")?.unwrap_or(f64::NAN),
        pathloss_exp: system.required("pathloss_exp")?,
        threshold,
        gamma_hat_r: system.f64("gamma_hat_r")?,
        gamma_hat_d: system.f64("gamma_hat_d")?,
        dist_total: sweep.f64("dist_total")?,
    };
    if base.dist_total.is_none() && base.dist_rd.is_nan() {
        return Err(key_err("system", "dist_rd", "missing"));
    }
    if base.dist_total.is_some() && system.raw("dist_rd").is_some() {
        return Err(key_err("system", "dist_rd", "conflicts with [sweep] dist_total"));
    }
    if variable == SweepVariable::Threshold {
        base.threshold = f64::NAN;
    }

    let mut cfg = default_mc();
    if let Some(n) = mc.u64("samples")? {
        cfg.samples = n;
        cfg.batch_size = DEFAULT_BATCH_SIZE.min(n.max(1));
    }
    if let Some(s) = mc.u64("seed")? {
        cfg.seed = s;
    }
    if let Some(w) = mc.u64("workers")? {
        cfg.workers = w as usize;
    }
    if let Some(b) = mc.u64("batch_size")? {
        cfg.batch_size = b;
    }

    let spec = SweepSpec {
        variable,
        grid,
        spacing,
        base,
        thetas,
        ms,
        modes,
        metrics,
        mc: cfg,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn load_config(path: &Path) -> Result<SweepSpec, ConfigError> {
    parse_config(&std::fs::read_to_string(path)?)
}
