//! Seeded Monte-Carlo estimation of the relay metrics.
//!
//! Work is cut into fixed-size batches. Batch `b` draws from a ChaCha12
//! generator seeded with the master seed and switched to stream `b`. ChaCha
//! streams are disjoint keystreams, so batches never share random numbers.
//! Each batch fills its own Welford accumulators. The batch results are then
//! merged in batch order. The output therefore depends only on
//! (seed, samples, batch_size), never on how many workers ran the batches.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::copula::{open_unit, Copula, CopulaModel};
use crate::error::{Error, Result};
use crate::fading::NakagamiPower;
use crate::metrics::{DerivedSnrScales, OutageQuery, SwiptSystem};
use crate::product_dist::EndToEndSnrModel;

pub const DEFAULT_BATCH_SIZE: u64 = 1 << 16;

/// Sample count, seed and work split of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub batch_size: u64,
}

impl McConfig {
    /// Single worker, default batch size capped at `samples`.
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            workers: 1,
            batch_size: DEFAULT_BATCH_SIZE.min(samples.max(1)),
        }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value: f64, reason| Err(Error::InvalidParameter { name, value, reason });
        if self.samples == 0 {
            return bad("samples", 0.0, "at least one sample is required");
        }
        if self.workers == 0 {
            return bad("workers", 0.0, "at least one worker is required");
        }
        if self.batch_size == 0 || self.batch_size > self.samples {
            return bad("batch_size", self.batch_size as f64, "batch size must lie in [1, samples]");
        }
        Ok(())
    }

    fn batches(&self) -> u64 {
        self.samples.div_ceil(self.batch_size)
    }

    fn batch_len(&self, b: u64) -> u64 {
        (self.samples - b * self.batch_size).min(self.batch_size)
    }

    /// Generator for batch `b`.
    pub fn batch_rng(&self, b: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(b);
        rng
    }
}

/// Point estimate with standard error and normal 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub n: u64,
}

impl McEstimate {
    /// |mean - reference| in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.mean - reference).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

/// One-pass mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combine two disjoint accumulators.
    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.n = n;
    }

    pub fn estimate(&self) -> McEstimate {
        let stderr = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            stderr,
            ci95_low: self.mean - 1.96 * stderr,
            ci95_high: self.mean + 1.96 * stderr,
            n: self.n,
        }
    }
}

/// Run `f(batch_index)` for every batch, on `workers` threads when the
/// `parallel` feature is enabled, and return the results in batch order.
fn map_batches<T, F>(n_batches: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 1 && n_batches > 1 {
        use rayon::prelude::*;
        // A pool that cannot be built falls through to the sequential path,
        // which produces the same values.
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            return pool.install(|| (0..n_batches).into_par_iter().map(&f).collect());
        }
    }
    let _ = workers;
    (0..n_batches).map(f).collect()
}

/// Accumulate `K` statistics per draw over all batches.
pub fn run_batches<const K: usize, F>(cfg: &McConfig, draw: F) -> Result<[Welford; K]>
where
    F: Fn(&mut ChaCha12Rng) -> [f64; K] + Sync + Send,
{
    cfg.validate()?;
    let per_batch = map_batches(cfg.batches(), cfg.workers, |b| {
        let mut rng = cfg.batch_rng(b);
        let mut acc = [Welford::default(); K];
        for _ in 0..cfg.batch_len(b) {
            let xs = draw(&mut rng);
            for (a, x) in acc.iter_mut().zip(xs) {
                a.push(x);
            }
        }
        acc
    });
    let mut total = [Welford::default(); K];
    for acc in &per_batch {
        for (t, a) in total.iter_mut().zip(acc) {
            t.merge(a);
        }
    }
    Ok(total)
}

/// (g_SR, g_RD) with the requested marginals and copula, by inverse transform
/// of a conditionally inverted copula pair.
pub fn sample_joint_powers<R: rand::Rng + ?Sized>(
    copula: &CopulaModel,
    sr: &NakagamiPower,
    rd: &NakagamiPower,
    rng: &mut R,
) -> (f64, f64) {
    let u1 = open_unit(rng);
    let t = open_unit(rng);
    let u2 = copula.conditional_quantile_unchecked(t, u1);
    (sr.quantile_unchecked(u1), rd.quantile_unchecked(u2.min(1.0 - f64::EPSILON / 2.0)))
}

/// Monte-Carlo estimates of every per-draw metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMetrics {
    pub cap_sr: McEstimate,
    pub cap_rd: McEstimate,
    /// E[min(C_SR, C_RD)] under the joint law.
    pub cap_min: McEstimate,
    pub outage: McEstimate,
    pub mean_snr_d: McEstimate,
}

/// Simulate with gamma_R = gamma_hat_R g_SR and gamma_D = gamma_hat_D g_SR g_RD,
/// the same g_SR feeding both hops.
pub fn simulate_metrics_scales(
    scales: DerivedSnrScales,
    m: f64,
    theta: f64,
    q: OutageQuery,
    cfg: &McConfig,
) -> Result<McMetrics> {
    let g = NakagamiPower::normalized(m)?;
    let copula = CopulaModel::fgm(theta)?;
    let t = q.threshold;
    let half_log2 = 0.5 / std::f64::consts::LN_2;
    let acc = run_batches(cfg, |rng| {
        let (g_sr, g_rd) = sample_joint_powers(&copula, &g, &g, rng);
        let gamma_r = scales.gamma_hat_r * g_sr;
        let gamma_d = scales.gamma_hat_d * g_sr * g_rd;
        let c_sr = half_log2 * gamma_r.ln_1p();
        let c_rd = half_log2 * gamma_d.ln_1p();
        let out = if gamma_r.min(gamma_d) <= t { 1.0 } else { 0.0 };
        [c_sr, c_rd, c_sr.min(c_rd), out, gamma_d]
    })?;
    Ok(McMetrics {
        cap_sr: acc[0].estimate(),
        cap_rd: acc[1].estimate(),
        cap_min: acc[2].estimate(),
        outage: acc[3].estimate(),
        mean_snr_d: acc[4].estimate(),
    })
}

pub fn simulate_metrics(sys: &SwiptSystem, q: OutageQuery, cfg: &McConfig) -> Result<McMetrics> {
    simulate_metrics_scales(sys.snr_scales()?, sys.fading_m as f64, sys.theta, q, cfg)
}

/// Estimate of E[g_SR g_RD].
pub fn simulate_product_moment(m: f64, theta: f64, cfg: &McConfig) -> Result<McEstimate> {
    let g = NakagamiPower::normalized(m)?;
    let copula = CopulaModel::fgm(theta)?;
    let [acc] = run_batches(cfg, |rng| {
        let (a, b) = sample_joint_powers(&copula, &g, &g, rng);
        [a * b]
    })?;
    Ok(acc.estimate())
}

/// Draws of gamma_D for the given model, in batch order.
pub fn sample_end_to_end_snr(model: &EndToEndSnrModel, cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let batches = map_batches(cfg.batches(), cfg.workers, |b| {
        let mut rng = cfg.batch_rng(b);
        (0..cfg.batch_len(b))
            .map(|_| {
                let (g1, g2) = sample_joint_powers(&model.copula, &model.marginal_sr, &model.marginal_rd, &mut rng);
                model.snr_scale * g1 * g2
            })
            .collect::<Vec<_>>()
    });
    Ok(batches.concat())
}

/// Half-width of the Dvoretzky-Kiefer-Wolfowitz band at confidence 1 - alpha.
pub fn dkw_epsilon(n: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Empirical CDF of sorted samples at `y`: the fraction <= y.
pub fn ecdf_sorted(sorted: &[f64], y: f64) -> f64 {
    sorted.partition_point(|&x| x <= y) as f64 / sorted.len() as f64
}
