//! Experiment configuration, analytic tables and curves, simulation driver and
//! CSV/JSON output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics;
use crate::attacks::{run_trials, AttackKind, SimMode, SimParams, Trajectory};
use crate::error::{invalid, Error, Result};

pub const CSV_HEADER: &str = "round,series,mean_info,stderr,trials,k,n,seed";

/// Significant digits of every emitted number.
pub const SIGNIFICANT_DIGITS: usize = 10;

/// Rounds up to this value are all recorded; later ones are thinned.
pub const DENSE_ROUNDS: u32 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => invalid(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub k: u32,
    pub n: usize,
    pub rounds: u32,
    pub trials: u64,
    pub attack: AttackKind,
    pub defense_segments: usize,
    pub sim_mode: SimMode,
    pub seed: u64,
    pub format: OutputFormat,
    /// `None` writes to stdout.
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: 6,
            n: 32_000,
            rounds: 2000,
            trials: 4,
            attack: AttackKind::Hbc,
            defense_segments: 1,
            sim_mode: SimMode::Faithful,
            seed: 42,
            format: OutputFormat::Csv,
            out: None,
        }
    }
}

/// Keys accepted by `--config`; every field is optional and uses the flag
/// name.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    pub k: Option<u32>,
    pub n: Option<usize>,
    pub rounds: Option<u32>,
    pub trials: Option<u64>,
    pub attack: Option<AttackKind>,
    #[serde(alias = "defense_segments")]
    pub defense_segments: Option<usize>,
    #[serde(alias = "sim_mode")]
    pub sim_mode: Option<SimMode>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())))
    }

    /// Values set here override `base`.
    pub fn apply(self, base: ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            k: self.k.unwrap_or(base.k),
            n: self.n.unwrap_or(base.n),
            rounds: self.rounds.unwrap_or(base.rounds),
            trials: self.trials.unwrap_or(base.trials),
            attack: self.attack.unwrap_or(base.attack),
            defense_segments: self.defense_segments.unwrap_or(base.defense_segments),
            sim_mode: self.sim_mode.unwrap_or(base.sim_mode),
            seed: self.seed.unwrap_or(base.seed),
            format: self.format.unwrap_or(base.format),
            out: self.out.or(base.out),
        }
    }
}

impl ExperimentConfig {
    pub fn params(&self) -> SimParams {
        SimParams {
            k: self.k,
            n: self.n,
            rounds: self.rounds,
            attack: self.attack,
            segments: self.defense_segments,
            mode: self.sim_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        Ok(())
    }

    /// Label of the attacker series in the output.
    pub fn series(&self) -> &'static str {
        if self.defense_segments > 1 {
            "defense"
        } else {
            self.attack.label()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub round: u32,
    pub series: String,
    pub mean_info: f64,
    pub stderr: f64,
    pub trials: u64,
    pub k: u32,
    pub n: usize,
    pub seed: u64,
}

/// Every round up to [`DENSE_ROUNDS`], then roughly 1% geometric steps, always
/// ending at `m`.
pub fn recorded_rounds(m: u32) -> Vec<u32> {
    let mut rounds: Vec<u32> = (1..=m.min(DENSE_ROUNDS)).collect();
    let mut r = DENSE_ROUNDS;
    while r < m {
        r = (r + 1).max((f64::from(r) * 1.01).ceil() as u32).min(m);
        rounds.push(r);
    }
    rounds
}

/// Mean and standard error of the mean, in trial order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
    (mean, (var / t).sqrt())
}

pub fn simulate(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let trajectories = run_trials(&config.params(), config.seed, config.trials)?;
    Ok(rows_from_trajectories(config, &trajectories))
}

pub fn rows_from_trajectories(
    config: &ExperimentConfig,
    trajectories: &[Trajectory],
) -> Vec<ResultRow> {
    let series = config.series();
    let mut rows = Vec::new();
    for round in recorded_rounds(config.rounds) {
        let idx = round as usize - 1;
        for (label, pick) in [
            (
                "honest",
                (|t: &Trajectory, i: usize| t.honest[i]) as fn(&Trajectory, usize) -> f64,
            ),
            (series, |t: &Trajectory, i: usize| t.attack[i]),
        ] {
            let values: Vec<f64> = trajectories.iter().map(|t| pick(t, idx)).collect();
            let (mean, stderr) = mean_stderr(&values);
            rows.push(ResultRow {
                round,
                series: label.to_string(),
                mean_info: mean,
                stderr,
                trials: config.trials,
                k: config.k,
                n: config.n,
                seed: config.seed,
            });
        }
    }
    rows
}

/// Exact trajectories for `m = 1..=m_max`. Analytic rows carry `trials = 0`,
/// `seed = 0` and zero standard error.
pub fn analytic_curves(
    k: u32,
    m_max: u32,
    n: usize,
    attacks: &[AttackKind],
) -> Result<Vec<ResultRow>> {
    if !(1..=32).contains(&k) {
        return invalid(format!("k={k} outside [1, 32]"));
    }
    if !(1..=10_000).contains(&m_max) {
        return invalid(format!("rounds={m_max} outside [1, 10^4]"));
    }
    if let Some(a) = attacks.iter().find(|a| **a == AttackKind::Hbc) {
        return invalid(format!("no closed-form multi-round curve for `{a}`"));
    }
    let mut series: Vec<AttackKind> = Vec::new();
    for &a in attacks {
        if !series.contains(&a) {
            series.push(a);
        }
    }
    let row = |round, label: &str, value: f64| ResultRow {
        round,
        series: label.to_string(),
        mean_info: value,
        stderr: 0.0,
        trials: 0,
        k,
        n,
        seed: 0,
    };
    let mut rows = Vec::new();
    for m in recorded_rounds(m_max) {
        rows.push(row(m, "honest", analytics::info_honest_multi(k, m)));
        for &a in &series {
            let v = match a {
                AttackKind::Med => analytics::info_med_multi(k, m),
                AttackKind::Ud => analytics::info_ud_multi(k, m),
                AttackKind::Hbc => unreachable!("rejected above"),
            };
            rows.push(row(m, a.label(), v));
        }
    }
    Ok(rows)
}

/// One column of the single-round comparison tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableColumn {
    pub k: u32,
    pub hbc: f64,
    pub honest: f64,
    pub hbc_honest_ratio: f64,
    pub med: f64,
    pub ud: f64,
    pub med_ud_ratio: f64,
}

pub fn analytic_tables(k_min: u32, k_max: u32) -> Result<Vec<TableColumn>> {
    if k_min < 1 || k_max > 32 || k_min > k_max {
        return invalid(format!("k range {k_min}..={k_max} must lie within 1..=32"));
    }
    Ok((k_min..=k_max)
        .map(|k| {
            let hbc = analytics::info_hbc_single(k);
            let honest = analytics::info_honest_single(k);
            let med = analytics::info_med_single(k);
            let ud = analytics::info_ud_single(k);
            TableColumn {
                k,
                hbc,
                honest,
                hbc_honest_ratio: hbc / honest,
                med,
                ud,
                med_ud_ratio: med / ud,
            }
        })
        .collect())
}

/// Plain-text rendering with one column per `k`, three significant digits.
pub fn render_tables(columns: &[TableColumn]) -> String {
    let mut out = String::new();
    let mut table = |title: &str, rows: [(&str, fn(&TableColumn) -> f64); 3]| {
        out.push_str(title);
        out.push('\n');
        out.push_str(&format!("{:<14}", "k"));
        for c in columns {
            out.push_str(&format!("{:>12}", c.k));
        }
        out.push('\n');
        for (label, get) in rows {
            out.push_str(&format!("{label:<14}"));
            for c in columns {
                out.push_str(&format!("{:>12}", format_short(get(c))));
            }
            out.push('\n');
        }
        out.push('\n');
    };
    table(
        "Direct observation: information per final key bit",
        [
            ("HbC user", |c| c.hbc),
            ("Honest user", |c| c.honest),
            ("Ratio", |c| c.hbc_honest_ratio),
        ],
    );
    table(
        "Stored-signal attacks: information per final key bit",
        [
            ("MED attack", |c| c.med),
            ("UD attack", |c| c.ud),
            ("Ratio", |c| c.med_ud_ratio),
        ],
    );
    out
}

fn format_short(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-2 {
        format!("{x:.2e}")
    } else {
        format_sig(x, 3)
    }
}

/// Fixed-point decimal with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.*}", digits.saturating_sub(1), x);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).clamp(0, 60) as usize;
    format!("{x:.decimals$}")
}

fn rounded(x: f64) -> f64 {
    format_sig(x, SIGNIFICANT_DIGITS).parse().unwrap_or(x)
}

pub fn write_csv<W: Write>(rows: &[ResultRow], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.round,
            r.series,
            format_sig(r.mean_info, SIGNIFICANT_DIGITS),
            format_sig(r.stderr, SIGNIFICANT_DIGITS),
            r.trials,
            r.k,
            r.n,
            r.seed
        )?;
    }
    Ok(())
}

/// Array of objects with the CSV field names; numbers rounded the same way.
pub fn write_json<W: Write>(rows: &[ResultRow], mut w: W) -> Result<()> {
    let rounded_rows: Vec<ResultRow> = rows
        .iter()
        .map(|r| ResultRow {
            mean_info: rounded(r.mean_info),
            stderr: rounded(r.stderr),
            ..r.clone()
        })
        .collect();
    serde_json::to_writer_pretty(&mut w, &rounded_rows)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writeln!(w)?;
    Ok(())
}

pub fn write_rows<W: Write>(rows: &[ResultRow], format: OutputFormat, w: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(rows, w),
        OutputFormat::Json => write_json(rows, w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.856, 10), "0.8560000000");
        assert_eq!(format_sig(1.0, 10), "1.000000000");
        assert_eq!(format_sig(0.0, 10), "0.000000000");
        assert_eq!(format_sig(6.313292354183223e-4, 10), "0.0006313292354");
        assert_eq!(format_sig(12.5, 3), "12.5");
    }

    #[test]
    fn thinning() {
        assert_eq!(recorded_rounds(5), vec![1, 2, 3, 4, 5]);
        assert_eq!(recorded_rounds(2000).len(), 2000);
        let r = recorded_rounds(10_000);
        assert_eq!(&r[..2000], &recorded_rounds(2000)[..]);
        assert_eq!(*r.last().unwrap(), 10_000);
        assert!(r.windows(2).all(|w| w[0] < w[1]));
        assert!(r.len() < 2200);
    }

    #[test]
    fn stderr_of_trials() {
        assert_eq!(mean_stderr(&[0.4]), (0.4, 0.0));
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn config_file_overrides() {
        let file: ConfigFile = toml::from_str(
            "k = 4\nattack = \"med\"\ndefense-segments = 2\nsim-mode = \"paper-literal\"\n",
        )
        .unwrap();
        let cfg = file.apply(ExperimentConfig::default());
        assert_eq!(cfg.k, 4);
        assert_eq!(cfg.attack, AttackKind::Med);
        assert_eq!(cfg.defense_segments, 2);
        assert_eq!(cfg.sim_mode, SimMode::PaperLiteral);
        assert_eq!(cfg.n, 32_000);
        assert_eq!(cfg.series(), "defense");
        assert!(toml::from_str::<ConfigFile>("bogus = 1").is_err());
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            ExperimentConfig {
                k: 33,
                ..Default::default()
            },
            ExperimentConfig {
                n: 0,
                ..Default::default()
            },
            ExperimentConfig {
                rounds: 10_001,
                ..Default::default()
            },
            ExperimentConfig {
                trials: 0,
                ..Default::default()
            },
            ExperimentConfig {
                defense_segments: 0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(
                matches!(simulate(&cfg), Err(Error::InvalidArgument(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn tables_reject_bad_ranges() {
        assert!(analytic_tables(0, 3).is_err());
        assert!(analytic_tables(5, 4).is_err());
        assert!(analytic_tables(3, 33).is_err());
        assert_eq!(analytic_tables(3, 8).unwrap().len(), 6);
    }

    #[test]
    fn curves_reject_hbc() {
        assert!(analytic_curves(6, 10, 100, &[AttackKind::Hbc]).is_err());
        let rows = analytic_curves(6, 10, 100, &[AttackKind::Med, AttackKind::Med]).unwrap();
        assert_eq!(rows.len(), 20);
    }

    #[test]
    fn csv_layout() {
        let rows = analytic_curves(3, 2, 10, &[AttackKind::Ud]).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "1,honest,0.01562500000,0.000000000,0,3,10,0");
    }
}
