//! Gnuplot script that plots a sweep CSV, one page per metric.

use std::fmt::Write as _;

use crate::config::{Mode, Spacing, SweepSpec};
use crate::csv_out::{fmt_sig, Row};

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Build the script text. `csv_name` is how the script refers to the data
/// file; it is resolved relative to the script's working directory.
pub fn script(spec: &SweepSpec, rows: &[Row], csv_name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "set grid");
    let _ = writeln!(s, "set xlabel {}", quote(spec.variable.name()));
    if spec.spacing == Spacing::Log {
        let _ = writeln!(s, "set logscale x");
    }
    let mut metrics: Vec<&str> = Vec::new();
    for r in rows {
        if !metrics.contains(&r.metric) {
            metrics.push(r.metric);
        }
    }
    for (i, metric) in metrics.iter().enumerate() {
        let mut series: Vec<(Mode, f64, u32)> = Vec::new();
        for r in rows.iter().filter(|r| r.metric == *metric) {
            let key = (r.mode, r.theta, r.m);
            if !series.iter().any(|k| k.0 == key.0 && k.1.total_cmp(&key.1).is_eq() && k.2 == key.2) {
                series.push(key);
            }
        }
        if metric.starts_with("outage") {
            let _ = writeln!(s, "set logscale y");
        } else {
            let _ = writeln!(s, "unset logscale y");
        }
        let _ = writeln!(s, "set ylabel {}", quote(metric));
        let _ = writeln!(s, "set title {}", quote(metric));
        let clauses: Vec<String> = series
            .iter()
            .map(|&(mode, theta, m)| {
                let filter = format!(
                    "(strcol(5) eq '{}' && strcol(6) eq '{}' && $3 == {} && $4 == {})",
                    mode.name(),
                    metric,
                    fmt_sig(theta),
                    m
                );
                let title = quote(&format!("{} theta={} m={}", mode.name(), fmt_sig(theta), m));
                if mode == Mode::MonteCarlo {
                    format!("{} skip 1 using ({filter} ? $2 : 1/0):7:8 with yerrorbars title {title}", quote(csv_name))
                } else {
                    format!("{} skip 1 using ({filter} ? $2 : 1/0):7 with linespoints title {title}", quote(csv_name))
                }
            })
            .collect();
        let _ = writeln!(s, "plot \\\n  {}", clauses.join(", \\\n  "));
        if i + 1 < metrics.len() {
            let _ = writeln!(s, "pause -1 'press enter for the next metric'");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepVariable;

    #[test]
    fn one_clause_per_series() {
        let spec = crate::presets::preset("fig10").unwrap();
        let row = |mode, m| Row {
            variable: SweepVariable::GammaHatD,
            value: 1.0,
            theta: 1.0,
            m,
            mode,
            metric: "outage",
            estimate: 0.5,
            mc: None,
        };
        let rows = vec![row(Mode::ClosedForm, 1), row(Mode::ClosedForm, 2), row(Mode::MonteCarlo, 1)];
        let text = script(&spec, &rows, "out.csv");
        assert_eq!(text.matches("skip 1 using").count(), 3);
        assert!(text.contains("set logscale x"));
        assert!(text.contains("with yerrorbars"));
        assert!(!text.contains("pause"));
    }
}
