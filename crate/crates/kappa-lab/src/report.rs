//! Experiment reports: a typed wrapper around the Monte Carlo records
//! plus renderers for aligned tables, CSV, and JSON.
//!
//! CSV and JSON output is a pure function of the report contents, so
//! reruns with the same master seed produce byte-identical files. The
//! wall-clock timestamp appears only in the human table rendering, never
//! in the machine formats. CSV cells round floats to six significant
//! digits; JSON keeps full precision.

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::montecarlo::{
    ConvergenceResult, CorrRecord, McSummary, MixtureBiasRecord, ScalingFit, SuperAddRecord,
};

/// Which experiment produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    BiasTable,
    SuperAdd,
    Convergence,
    ScalingFit,
    Correlation,
    MixtureBias,
}

impl ReportKind {
    /// Stem used for default output file names; matches the CLI
    /// subcommand that produces the report.
    pub fn slug(&self) -> &'static str {
        match self {
            ReportKind::BiasTable => "bias-table",
            ReportKind::SuperAdd => "superadd",
            ReportKind::Convergence => "converge",
            ReportKind::ScalingFit => "scaling-fit",
            ReportKind::Correlation => "corr",
            ReportKind::MixtureBias => "mixture",
        }
    }
}

/// Echo of the inputs that produced a report, for self-describing
/// output files. Only the fields an experiment actually uses are set.
/// The worker-thread budget is deliberately not echoed: it cannot
/// change any result, and reports must stay byte-identical across
/// thread counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spec: Option<DistributionSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub specs: Option<Vec<DistributionSpec>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights: Option<Vec<f64>>,
}

impl ConfigEcho {
    pub fn new(master_seed: u64) -> Self {
        ConfigEcho {
            master_seed,
            ..ConfigEcho::default()
        }
    }
}

/// Payload of a report, one variant per experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportRows {
    BiasTable(Vec<McSummary>),
    SuperAdd(SuperAddRecord),
    Convergence(ConvergenceResult),
    ScalingFit(ScalingFit),
    Correlation(CorrRecord),
    MixtureBias(MixtureBiasRecord),
}

impl ReportRows {
    fn kind(&self) -> ReportKind {
        match self {
            ReportRows::BiasTable(_) => ReportKind::BiasTable,
            ReportRows::SuperAdd(_) => ReportKind::SuperAdd,
            ReportRows::Convergence(_) => ReportKind::Convergence,
            ReportRows::ScalingFit(_) => ReportKind::ScalingFit,
            ReportRows::Correlation(_) => ReportKind::Correlation,
            ReportRows::MixtureBias(_) => ReportKind::MixtureBias,
        }
    }
}

/// A finished experiment, ready to render. `created_at` is table-only
/// metadata; it is skipped by serde so the machine formats stay
/// reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ReportKind,
    pub tool_version: String,
    pub config_echo: ConfigEcho,
    pub rows: ReportRows,
    #[serde(skip)]
    pub created_at: String,
}

impl ExperimentReport {
    pub fn new(config_echo: ConfigEcho, rows: ReportRows) -> Result<Self> {
        if let ReportRows::BiasTable(summaries) = &rows {
            if summaries.is_empty() {
                return Err(Error::Invalid("report rows must be nonempty".into()));
            }
        }
        Ok(ExperimentReport {
            kind: rows.kind(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_echo,
            rows,
            created_at: chrono::Utc::now().to_rfc3339(),
        })
    }

    /// Default output file name, before the format extension.
    pub fn file_stem(&self) -> String {
        format!("{}-{}", self.kind.slug(), self.config_echo.master_seed)
    }

    /// Column header and cell grid shared by the CSV and table
    /// renderers. Cell order within a row is fixed per kind.
    fn cells(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        match &self.rows {
            ReportRows::BiasTable(summaries) => (
                vec!["n", "q", "runs", "mean", "median", "std"],
                summaries
                    .iter()
                    .map(|s| {
                        vec![
                            s.n.to_string(),
                            format_sig(s.q),
                            s.runs.to_string(),
                            format_sig(s.mean),
                            format_sig(s.median),
                            format_sig(s.std),
                        ]
                    })
                    .collect(),
            ),
            ReportRows::SuperAdd(r) => (
                vec![
                    "sizes",
                    "q",
                    "runs",
                    "e_kappa_full",
                    "weighted_avg_parts",
                    "gap",
                    "z_score",
                    "identical_laws",
                ],
                vec![vec![
                    r.sizes
                        .iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>()
                        .join(";"),
                    format_sig(r.q),
                    r.runs.to_string(),
                    format_sig(r.e_kappa_full),
                    format_sig(r.weighted_avg_parts),
                    format_sig(r.gap),
                    format_sig(r.z_score),
                    r.identical_laws.to_string(),
                ]],
            ),
            ReportRows::Convergence(r) => (
                vec!["n", "h", "runs", "mean_kappa_h", "population_kappa_h"],
                r.points
                    .iter()
                    .map(|p| {
                        vec![
                            p.n.to_string(),
                            format_sig(r.h),
                            r.runs.to_string(),
                            format_sig(p.mean_kappa_h),
                            r.population_kappa_h.map(format_sig).unwrap_or_default(),
                        ]
                    })
                    .collect(),
            ),
            ReportRows::ScalingFit(r) => (
                vec!["n", "bias", "c_hat", "exponent_hat", "r_squared"],
                r.points
                    .iter()
                    .map(|&(n, bias)| {
                        vec![
                            n.to_string(),
                            format_sig(bias),
                            format_sig(r.c_hat),
                            format_sig(r.exponent_hat),
                            format_sig(r.r_squared),
                        ]
                    })
                    .collect(),
            ),
            ReportRows::Correlation(r) => (
                vec![
                    "decile",
                    "mean_kappa",
                    "pearson",
                    "spearman",
                    "spearman_z",
                    "degenerate",
                ],
                r.bucket_means
                    .iter()
                    .map(|&(decile, mean)| {
                        vec![
                            decile.to_string(),
                            format_sig(mean),
                            format_sig(r.pearson),
                            format_sig(r.spearman),
                            format_sig(r.spearman_z),
                            r.degenerate.to_string(),
                        ]
                    })
                    .collect(),
            ),
            ReportRows::MixtureBias(r) => (
                vec![
                    "n",
                    "q",
                    "runs",
                    "mc_mean",
                    "population_mixture_kappa",
                    "component_avg_kappa",
                    "mean_alpha_kappa",
                ],
                vec![vec![
                    r.n.to_string(),
                    format_sig(r.q),
                    r.runs.to_string(),
                    format_sig(r.mc_mean),
                    format_sig(r.population_mixture_kappa),
                    format_sig(r.component_avg_kappa),
                    format_sig(r.mean_alpha_kappa),
                ]],
            ),
        }
    }

    /// RFC 4180 CSV with CRLF line endings and a fixed column order.
    pub fn to_csv(&self) -> Result<String> {
        let (header, rows) = self.cells();
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        wtr.write_record(&header).map_err(csv_err)?;
        for row in rows {
            wtr.write_record(&row).map_err(csv_err)?;
        }
        let bytes = wtr
            .into_inner()
            .map_err(|e| Error::Invalid(format!("csv render failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Invalid(format!("csv produced non-utf8: {e}")))
    }

    /// Pretty JSON with full float precision, trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Invalid(format!("json render failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    /// Human-oriented rendering: a metadata preamble and an aligned
    /// column grid. This is the one format that shows `created_at`.
    pub fn render_table(&self) -> String {
        let (header, rows) = self.cells();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let mut out = String::new();
        out.push_str(&format!("# report: {}\n", self.kind.slug()));
        out.push_str(&format!("# tool_version: {}\n", self.tool_version));
        if !self.created_at.is_empty() {
            out.push_str(&format!("# created_at: {}\n", self.created_at));
        }
        let echo = serde_json::to_string(&self.config_echo).unwrap_or_default();
        out.push_str(&format!("# config_echo: {echo}\n"));
        let render_row = |cells: &[String]| -> String {
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{:<width$}", c, width = widths[i]))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let header_cells: Vec<String> = header.iter().map(|h| h.to_string()).collect();
        out.push_str(&render_row(&header_cells));
        out.push('\n');
        for row in &rows {
            out.push_str(&render_row(row));
            out.push('\n');
        }
        out
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv render failed: {e}"))
}

/// Rounds to six significant digits for CSV and table cells. The
/// decimal count is recomputed after rounding so that values near a
/// power of ten render at their post-rounding magnitude, which makes
/// render -> parse -> render a fixed point.
pub fn format_sig(x: f64) -> String {
    fn decimals(x: f64) -> usize {
        if x == 0.0 {
            return 5;
        }
        let mag = x.abs().log10().floor() as i32;
        (5 - mag).clamp(0, 30) as usize
    }
    let first = format!("{:.*}", decimals(x), x);
    let reparsed: f64 = first.parse().unwrap_or(x);
    let d = decimals(reparsed);
    if d == decimals(x) {
        first
    } else {
        format!("{:.*}", d, reparsed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn sample_summary(n: usize, mean: f64) -> McSummary {
        McSummary {
            n,
            q: 0.01,
            runs: 1000,
            mean,
            median: mean - 0.03,
            std: 0.16,
        }
    }

    fn bias_report() -> ExperimentReport {
        let mut config = ConfigEcho::new(42);
        config.q = Some(0.01);
        config.runs = Some(1000);
        config.n = Some(vec![1000, 10_000]);
        ExperimentReport::new(
            config,
            ReportRows::BiasTable(vec![
                sample_summary(1000, 0.405235),
                sample_summary(10_000, 0.485916),
            ]),
        )
        .unwrap()
    }

    #[test]
    fn six_significant_digit_rendering() {
        assert_eq!(format_sig(0.657_933_3), "0.657933");
        assert_eq!(format_sig(65.793_46), "65.7935");
        assert_eq!(format_sig(1.490_469), "1.49047");
        assert_eq!(format_sig(0.0), "0.00000");
        assert_eq!(format_sig(-0.5), "-0.500000");
        assert_eq!(format_sig(123_456_789.0), "123456789");
        // Rounding across a power of ten settles at the new magnitude.
        assert_eq!(format_sig(0.999_999_5), "1.00000");
    }

    #[test]
    fn rendering_is_a_fixed_point_under_reparse() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10_000 {
            let exp: i32 = rng.random_range(-8..=8);
            let mantissa: f64 = rng.random_range(-1.0..1.0f64);
            let x = mantissa * 10f64.powi(exp);
            let s = format_sig(x);
            let y: f64 = s.parse().unwrap();
            assert_eq!(format_sig(y), s, "not a fixed point for {x}");
        }
    }

    #[test]
    fn csv_has_fixed_header_and_crlf_rows() {
        let csv = bias_report().to_csv().unwrap();
        let lines: Vec<&str> = csv.split("\r\n").collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "n,q,runs,mean,median,std");
        assert_eq!(lines[1], "1000,0.0100000,1000,0.405235,0.375235,0.160000");
        assert!(lines[3].is_empty());
    }

    #[test]
    fn machine_formats_exclude_the_timestamp() {
        let report = bias_report();
        assert!(!report.created_at.is_empty());
        assert!(!report.to_csv().unwrap().contains(&report.created_at));
        assert!(!report.to_json().unwrap().contains("created_at"));
        assert!(report.render_table().contains(&report.created_at));
    }

    #[test]
    fn json_round_trips_config_and_rows() {
        let report = bias_report();
        let json = report.to_json().unwrap();
        let back: ExperimentReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.kind, report.kind);
        assert_eq!(back.tool_version, report.tool_version);
        assert_eq!(back.config_echo, report.config_echo);
        assert_eq!(back.rows, report.rows);
        assert!(back.created_at.is_empty());
    }

    #[test]
    fn empty_rows_are_rejected_at_construction() {
        let err = ExperimentReport::new(ConfigEcho::new(1), ReportRows::BiasTable(vec![]));
        assert!(err.is_err());
    }

    // Reading the CSV back and rewriting the records reproduces the
    // bytes: quoting and rounding are both stable.
    #[test]
    fn csv_survives_a_parse_and_rewrite() {
        let csv = bias_report().to_csv().unwrap();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(csv.as_bytes());
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        for record in rdr.records() {
            wtr.write_record(&record.unwrap()).unwrap();
        }
        let back = String::from_utf8(wtr.into_inner().unwrap()).unwrap();
        assert_eq!(back, csv);
    }

    #[test]
    fn file_stem_is_kind_and_seed() {
        assert_eq!(bias_report().file_stem(), "bias-table-42");
        assert_eq!(ReportKind::ScalingFit.slug(), "scaling-fit");
    }

    #[test]
    fn single_record_kinds_render_one_row() {
        let rec = SuperAddRecord {
            sizes: vec![500, 500],
            q: 0.01,
            runs: 100,
            e_kappa_full: 0.41,
            weighted_avg_parts: 0.35,
            gap: 0.06,
            z_score: 7.5,
            identical_laws: true,
        };
        let report = ExperimentReport::new(ConfigEcho::new(7), ReportRows::SuperAdd(rec)).unwrap();
        assert_eq!(report.kind, ReportKind::SuperAdd);
        let csv = report.to_csv().unwrap();
        let lines: Vec<&str> = csv.split("\r\n").collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("500;500,0.0100000,100,"));
        assert!(lines[1].ends_with(",true"));
    }

    #[test]
    fn table_rendering_aligns_columns() {
        let table = bias_report().render_table();
        assert!(table.contains("# report: bias-table"));
        assert!(table.contains("# config_echo:"));
        let data: Vec<&str> = table
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect();
        assert_eq!(data.len(), 3);
        assert!(data[0].starts_with("n "));
        assert!(data[0].contains("median"));
    }
}
