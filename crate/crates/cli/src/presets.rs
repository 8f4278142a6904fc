//! Figure presets.
//!
//! Shared caption values: kappa = 0.7, P_S = 10 W, d_SR = d_RD = 2 m,
//! alpha = 2.5. Capacity figures use N = 1e-2 W, outage figures N = 1e-3 W
//! and gamma_t = 0 dB. Where a figure varies a parameter that has no CSV
//! column (kappa in fig8, P_S in fig9) the preset holds it at the shared
//! value and spans theta instead.

use crate::config::{default_mc, make_grid, Baseline, MetricGroup, Mode, Spacing, SweepSpec, SweepVariable};

pub const NAMES: [&str; 9] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11"];

fn base(noise_power: f64) -> Baseline {
    Baseline {
        source_power: 10.0,
        noise_power,
        rho: 0.3,
        eh_efficiency: 0.7,
        dist_sr: 2.0,
        dist_rd: 2.0,
        pathloss_exp: 2.5,
        threshold: 1.0,
        gamma_hat_r: None,
        gamma_hat_d: None,
        dist_total: None,
    }
}

fn spec(
    variable: SweepVariable,
    grid: Vec<f64>,
    spacing: Spacing,
    base: Baseline,
    thetas: &[f64],
    ms: &[u32],
    metrics: &[MetricGroup],
    modes: &[Mode],
) -> SweepSpec {
    SweepSpec {
        variable,
        grid,
        spacing,
        base,
        thetas: thetas.to_vec(),
        ms: ms.to_vec(),
        modes: modes.to_vec(),
        metrics: metrics.to_vec(),
        mc: default_mc(),
    }
}

const THETAS: [f64; 3] = [-1.0, 0.0, 1.0];
const SWEEP_MODES: [Mode; 3] = [Mode::ClosedForm, Mode::Quadrature, Mode::MonteCarlo];
const ASYMPTOTIC_MODES: [Mode; 3] = [Mode::ClosedForm, Mode::Quadrature, Mode::Asymptotic];

/// rho over 0.05, 0.10, ..., 0.95.
fn rho_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

pub fn preset(name: &str) -> Option<SweepSpec> {
    use MetricGroup::{Capacity, CapacitySr, Outage};
    use Spacing::{Linear, Log};
    use SweepVariable as V;
    let s = match name {
        // Capacity versus rho.
        "fig3" => spec(V::Rho, rho_grid(), Linear, base(1e-2), &THETAS, &[1, 2], &[Capacity], &SWEEP_MODES),
        // Capacity versus P_S at rho = 0.3.
        "fig4" => spec(
            V::SourcePower,
            make_grid(0.1, 100.0, 13, Log),
            Log,
            base(1e-2),
            &THETAS,
            &[1, 2],
            &[Capacity],
            &SWEEP_MODES,
        ),
        // Capacity versus kappa.
        "fig5" => spec(
            V::EhEfficiency,
            (1..=10).map(|i| i as f64 / 10.0).collect(),
            Linear,
            base(1e-2),
            &THETAS,
            &[1, 2],
            &[Capacity],
            &SWEEP_MODES,
        ),
        // Capacity versus N with P_S = 1 W.
        "fig6" => spec(
            V::NoisePower,
            make_grid(1e-4, 1e-1, 13, Log),
            Log,
            Baseline {
                source_power: 1.0,
                ..base(1e-2)
            },
            &THETAS,
            &[1, 2],
            &[Capacity],
            &SWEEP_MODES,
        ),
        // Capacity versus d_SR with d_RD = 4 - d_SR, m = 1.
        "fig7" => spec(
            V::DistSr,
            make_grid(0.5, 3.5, 13, Linear),
            Linear,
            Baseline {
                dist_total: Some(4.0),
                ..base(1e-2)
            },
            &THETAS,
            &[1],
            &[Capacity],
            &SWEEP_MODES,
        ),
        // Outage versus rho, m = 1.
        "fig8" => spec(V::Rho, rho_grid(), Linear, base(1e-3), &THETAS, &[1], &[Outage], &SWEEP_MODES),
        // Outage versus rho under positive dependence, m = 1.
        "fig9" => spec(
            V::Rho,
            rho_grid(),
            Linear,
            base(1e-3),
            &[0.25, 0.5, 0.75, 1.0],
            &[1],
            &[Outage],
            &SWEEP_MODES,
        ),
        // Outage versus gamma_hat_D, theta = 1; gamma_hat_R follows from the
        // physical parameters (about 1237.4).
        "fig10" => spec(
            V::GammaHatD,
            make_grid(1.0, 1e3, 13, Log),
            Log,
            base(1e-3),
            &[1.0],
            &[1, 2, 3],
            &[Outage],
            &ASYMPTOTIC_MODES,
        ),
        // SR capacity versus gamma_hat_R, exact and high-SNR.
        "fig11" => spec(
            V::GammaHatR,
            make_grid(1.0, 1e4, 17, Log),
            Log,
            base(1e-3),
            &[0.0],
            &[1, 2, 3],
            &[CapacitySr],
            &ASYMPTOTIC_MODES,
        ),
        _ => return None,
    };
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in NAMES {
            let s = preset(name).unwrap();
            s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset("fig2").is_none());
    }

    #[test]
    fn caption_values() {
        let f3 = preset("fig3").unwrap();
        assert_eq!(f3.grid.len(), 19);
        let r = f3.resolve(crate::config::Point { value: 0.3, theta: 0.0, m: 1 }).unwrap();
        assert!((r.scales.gamma_hat_d - 6.5625).abs() < 1e-12);
        let f8 = preset("fig8").unwrap();
        let r = f8.resolve(crate::config::Point { value: 0.3, theta: 0.0, m: 1 }).unwrap();
        assert!((r.scales.gamma_hat_d - 65.625).abs() < 1e-10);
        assert_eq!(r.query.threshold, 1.0);
        let f10 = preset("fig10").unwrap();
        let r = f10.resolve(crate::config::Point { value: 10.0, theta: 1.0, m: 2 }).unwrap();
        assert_eq!(r.scales.gamma_hat_d, 10.0);
        assert!((r.scales.gamma_hat_r - 7.0 / (32f64.sqrt() * 1e-3)).abs() < 1e-9);
    }
}
