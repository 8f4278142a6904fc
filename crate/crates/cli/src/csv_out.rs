//! CSV output with a fixed header and `%.12g`-style numbers.

use std::io::Write;
use std::path::Path;

use swipt_core::McEstimate;

use crate::config::{Mode, SweepVariable};

pub const HEADER: [&str; 12] = [
    "variable",
    "value",
    "theta",
    "m",
    "mode",
    "metric",
    "estimate",
    "stderr",
    "ci95_low",
    "ci95_high",
    "seed",
    "n_samples",
];

/// Format like C's `%.12g`: 12 significant digits, trailing zeros dropped,
/// exponent form outside [1e-4, 1e12).
pub fn fmt_sig(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // Rounding to P digits first fixes the decimal exponent, as %g does.
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Monte-Carlo provenance attached to a stochastic row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McColumns {
    pub estimate: McEstimate,
    pub seed: u64,
}

/// One output line.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub variable: SweepVariable,
    pub value: f64,
    pub theta: f64,
    pub m: u32,
    pub mode: Mode,
    pub metric: &'static str,
    pub estimate: f64,
    pub mc: Option<McColumns>,
}

impl Row {
    pub fn fields(&self) -> [String; 12] {
        let (se, lo, hi, seed, n) = match &self.mc {
            Some(c) => (
                fmt_sig(c.estimate.stderr),
                fmt_sig(c.estimate.ci95_low),
                fmt_sig(c.estimate.ci95_high),
                c.seed.to_string(),
                c.estimate.n.to_string(),
            ),
            None => Default::default(),
        };
        [
            self.variable.name().to_string(),
            fmt_sig(self.value),
            fmt_sig(self.theta),
            self.m.to_string(),
            self.mode.name().to_string(),
            self.metric.to_string(),
            fmt_sig(self.estimate),
            se,
            lo,
            hi,
            seed,
            n,
        ]
    }
}

/// Write `path` atomically: the data goes to a temporary file in the same
/// directory, which replaces `path` only once complete. Any failure leaves
/// no partial file behind.
pub fn write_atomic<F>(path: &Path, fill: F) -> anyhow::Result<()>
where
    F: FnOnce(&mut dyn Write) -> anyhow::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new().prefix(".swipt-").tempfile_in(dir)?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush()?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Serialize records with `\n` line endings.
pub fn write_records<I, R>(out: &mut dyn Write, header: &[&str], records: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for r in records {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows(path: &Path, rows: &[Row]) -> anyhow::Result<()> {
    write_atomic(path, |out| write_records(out, &HEADER, rows.iter().map(Row::fields)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g12() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-1.0, "-1"),
            (0.3, "0.3"),
            (1.0 / 3.0, "0.333333333333"),
            (123456.789, "123456.789"),
            (1e-4, "0.0001"),
            (1.5e-5, "1.5e-05"),
            (1e12, "1e+12"),
            (999999999999.5, "1e+12"),
            (123456789012.0, "123456789012"),
            (6.5625, "6.5625"),
            (2.0f64.powi(-60), "8.67361737988e-19"),
            (1e300, "1e+300"),
            (0.1 + 0.2, "0.3"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_sig(x), want, "{x:e}");
        }
    }

    #[test]
    fn atomic_write_leaves_nothing_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let r = write_atomic(&path, |out| {
            out.write_all(b"partial")?;
            anyhow::bail!("boom")
        });
        assert!(r.is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
        write_atomic(&path, |out| Ok(out.write_all(b"ok\n")?)).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "ok\n");
    }
}
