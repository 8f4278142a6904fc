//! Evaluation of a sweep: every grid cell under every requested mode.

use swipt_core::metrics::{
    asymptotic_capacity_sr, asymptotic_outage, ergodic_capacity_rd, ergodic_capacity_rd_closed,
    ergodic_capacity_sr, ergodic_capacity_sr_closed, outage_probability, outage_probability_shared_fading,
    RdPrefactor, SrVariant,
};
use swipt_core::montecarlo::{simulate_metrics_scales, McConfig};
use swipt_core::Error as CoreError;

use crate::config::{MetricGroup, Mode, Point, Resolved, SweepSpec};
use crate::csv_out::{McColumns, Row};

/// Rows in grid order plus non-fatal notes (skipped out-of-regime cells).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

/// Closed-form readings that agree with the quadrature oracle; these feed the
/// end-to-end closed-form value. The remaining readings are still emitted.
pub const ADJUDICATED_SR: SrVariant = SrVariant::ShapeOnly;
pub const ADJUDICATED_RD: RdPrefactor = RdPrefactor::PiD;

pub fn sr_variant_name(v: SrVariant) -> &'static str {
    match v {
        SrVariant::ShapeOnly => "shape_only",
        SrVariant::Printed => "printed",
    }
}

pub fn rd_prefactor_name(p: RdPrefactor) -> &'static str {
    match p {
        RdPrefactor::Bare => "bare",
        RdPrefactor::D => "d",
        RdPrefactor::PiD => "pi_d",
    }
}

fn sr_closed_metric(v: SrVariant) -> &'static str {
    match v {
        SrVariant::ShapeOnly => "capacity_sr_shape_only",
        SrVariant::Printed => "capacity_sr_printed",
    }
}

fn rd_closed_metric(p: RdPrefactor) -> &'static str {
    match p {
        RdPrefactor::Bare => "capacity_rd_bare",
        RdPrefactor::D => "capacity_rd_d",
        RdPrefactor::PiD => "capacity_rd_pi_d",
    }
}

struct Cell<'a> {
    spec: &'a SweepSpec,
    point: Point,
    r: Resolved,
    rows: Vec<Row>,
    notes: Vec<String>,
}

impl Cell<'_> {
    fn push(&mut self, mode: Mode, metric: &'static str, estimate: f64, mc: Option<McColumns>) {
        self.rows.push(Row {
            variable: self.spec.variable,
            value: self.point.value,
            theta: self.point.theta,
            m: self.point.m,
            mode,
            metric,
            estimate,
            mc,
        });
    }

    fn wants(&self, g: MetricGroup) -> bool {
        self.spec.metrics.contains(&g)
    }

    fn capacity_rd_wanted(&self) -> bool {
        self.wants(MetricGroup::Capacity)
    }

    fn capacity_sr_wanted(&self) -> bool {
        self.wants(MetricGroup::Capacity) || self.wants(MetricGroup::CapacitySr)
    }

    fn run(&mut self, mode: Mode, mc: &McConfig) -> Result<(), CoreError> {
        let (m, theta) = (self.point.m, self.point.theta);
        let s = self.r.scales;
        let q = self.r.query;
        match mode {
            Mode::ClosedForm => {
                if self.capacity_sr_wanted() {
                    for v in [SrVariant::ShapeOnly, SrVariant::Printed] {
                        let c = ergodic_capacity_sr_closed(s.gamma_hat_r, m, v)?;
                        self.push(mode, sr_closed_metric(v), c, None);
                    }
                }
                if self.capacity_rd_wanted() {
                    for p in [RdPrefactor::Bare, RdPrefactor::D, RdPrefactor::PiD] {
                        let c = ergodic_capacity_rd_closed(s.gamma_hat_d, m, theta, p)?;
                        self.push(mode, rd_closed_metric(p), c, None);
                    }
                    let sr = ergodic_capacity_sr_closed(s.gamma_hat_r, m, ADJUDICATED_SR)?;
                    let rd = ergodic_capacity_rd_closed(s.gamma_hat_d, m, theta, ADJUDICATED_RD)?;
                    self.push(mode, "capacity_min_of_means", sr.min(rd), None);
                }
                if self.wants(MetricGroup::Outage) {
                    self.push(mode, "outage", outage_probability(s, m, theta, q)?, None);
                }
            }
            Mode::Quadrature => {
                let sr = if self.capacity_sr_wanted() {
                    let c = ergodic_capacity_sr(s.gamma_hat_r, m)?;
                    self.push(mode, "capacity_sr", c, None);
                    c
                } else {
                    f64::NAN
                };
                if self.capacity_rd_wanted() {
                    let rd = ergodic_capacity_rd(s.gamma_hat_d, m, theta)?;
                    self.push(mode, "capacity_rd", rd, None);
                    self.push(mode, "capacity_min_of_means", sr.min(rd), None);
                }
                if self.wants(MetricGroup::Outage) {
                    let o = outage_probability_shared_fading(s, m, theta, q)?;
                    self.push(mode, "outage", o, None);
                }
            }
            Mode::MonteCarlo => {
                let r = simulate_metrics_scales(s, m as f64, theta, q, mc)?;
                let col = |e| Some(McColumns { estimate: e, seed: mc.seed });
                if self.capacity_sr_wanted() {
                    self.push(mode, "capacity_sr", r.cap_sr.mean, col(r.cap_sr));
                }
                if self.capacity_rd_wanted() {
                    self.push(mode, "capacity_rd", r.cap_rd.mean, col(r.cap_rd));
                    self.push(mode, "capacity_mean_of_min", r.cap_min.mean, col(r.cap_min));
                }
                if self.wants(MetricGroup::Outage) {
                    self.push(mode, "outage", r.outage.mean, col(r.outage));
                }
            }
            Mode::Asymptotic => {
                if self.capacity_sr_wanted() {
                    self.push(mode, "capacity_sr", asymptotic_capacity_sr(s.gamma_hat_r, m)?, None);
                }
                if self.wants(MetricGroup::Outage) {
                    match asymptotic_outage(s, m, theta, q) {
                        Ok(o) => self.push(mode, "outage", o, None),
                        Err(CoreError::OutOfRegime(why)) => self.notes.push(format!(
                            "{} = {}, theta = {theta}, m = {m}: asymptotic outage skipped: {why}",
                            self.spec.variable,
                            crate::csv_out::fmt_sig(self.point.value)
                        )),
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        Ok(())
    }
}

fn eval_point(spec: &SweepSpec, point: Point, mc: &McConfig) -> anyhow::Result<(Vec<Row>, Vec<String>)> {
    let r = spec.resolve(point)?;
    let mut cell = Cell {
        spec,
        point,
        r,
        rows: Vec::new(),
        notes: Vec::new(),
    };
    for &mode in &spec.modes {
        cell.run(mode, mc).map_err(|e| {
            anyhow::anyhow!(
                "{} = {}, theta = {}, m = {}, mode {}: {e}",
                spec.variable,
                crate::csv_out::fmt_sig(point.value),
                point.theta,
                point.m,
                mode.name()
            )
        })?;
    }
    Ok((cell.rows, cell.notes))
}

/// Run `f` over `items` on up to `workers` threads, keeping input order.
pub fn map_ordered<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 1 && items.len() > 1 {
        use rayon::prelude::*;
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            return pool.install(|| items.par_iter().map(&f).collect());
        }
    }
    let _ = workers;
    items.iter().map(f).collect()
}

/// Evaluate every cell. Cells are spread over `spec.mc.workers` threads; each
/// cell's Monte-Carlo run is sequential. Estimates do not depend on the
/// worker count because random streams are keyed by batch, not by thread.
pub fn run_sweep(spec: &SweepSpec) -> anyhow::Result<SweepOutput> {
    spec.validate()?;
    let points = spec.points();
    let inner = McConfig { workers: 1, ..spec.mc };
    let results = map_ordered(&points, spec.mc.workers, |&p| eval_point(spec, p, &inner));
    let mut out = SweepOutput::default();
    for r in results {
        let (rows, notes) = r?;
        out.rows.extend(rows);
        out.notes.extend(notes);
    }
    Ok(out)
}
