//! Serializable reports and their plain-text rendering.

use rvhaar_core::rvstats::FullTestOutcome;
use rvhaar_core::spectra::SpectralSummary;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub inertia: f64,
    pub mean: f64,
    pub nu: f64,
    pub skewness: Option<f64>,
    pub raw_moments: [f64; 4],
    pub centered_moments: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

impl SpectrumReport {
    pub fn from_summary(summary: &SpectralSummary, lambdas: Option<Vec<f64>>) -> Self {
        Self {
            n: summary.n,
            inertia: summary.mean * (summary.n - 1) as f64,
            mean: summary.mean,
            nu: summary.nu,
            skewness: summary.skewness,
            raw_moments: summary.raw_moments,
            centered_moments: summary.centered_moments,
            lambdas,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub n: usize,
    pub alpha: f64,
    pub rv: f64,
    pub mean: f64,
    pub variance: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub z: f64,
    pub threshold: f64,
    pub significant: bool,
    pub p_approx: f64,
    pub nu_x: f64,
    pub nu_y: f64,
    pub spectrum_x: SpectrumReport,
    pub spectrum_y: SpectrumReport,
    pub warnings: Vec<String>,
}

impl TestReport {
    pub fn from_outcome(outcome: &FullTestOutcome, alpha: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: "test",
            n: outcome.cumulants.n,
            alpha,
            rv: outcome.rv,
            mean: outcome.cumulants.mean,
            variance: outcome.cumulants.variance,
            skewness: outcome.cumulants.skewness,
            excess_kurtosis: outcome.cumulants.excess_kurtosis,
            z: outcome.report.z_score,
            threshold: outcome.report.corrected_threshold,
            significant: outcome.report.significant,
            p_approx: outcome.report.p_approx,
            nu_x: outcome.spectrum_x.nu,
            nu_y: outcome.spectrum_y.nu,
            spectrum_x: SpectrumReport::from_summary(&outcome.spectrum_x, None),
            spectrum_y: SpectrumReport::from_summary(&outcome.spectrum_y, None),
            warnings: outcome.warnings.clone(),
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let fmt_opt = |v: Option<f64>| match v {
            Some(v) => format!("{v:.6e}"),
            None => "undefined".into(),
        };
        out.push_str(&format!("n                = {}\n", self.n));
        out.push_str(&format!("RV observed      = {:.10}\n", self.rv));
        out.push_str(&format!("null mean        = {:.10}\n", self.mean));
        out.push_str(&format!("null variance    = {}\n", fmt_opt(self.variance)));
        out.push_str(&format!("null skewness    = {}\n", fmt_opt(self.skewness)));
        out.push_str(&format!(
            "null ex.kurtosis = {}\n",
            fmt_opt(self.excess_kurtosis)
        ));
        out.push_str(&format!("z-score          = {:.6}\n", self.z));
        out.push_str(&format!(
            "threshold        = {:.6}  (one-tailed, alpha = {})\n",
            self.threshold, self.alpha
        ));
        out.push_str(&format!("significant      = {}\n", self.significant));
        out.push_str(&format!("p (approximate)  = {:.6e}\n", self.p_approx));
        out.push_str(&format!(
            "effective dim    = {:.4} (X), {:.4} (Y)\n",
            self.nu_x, self.nu_y
        ));
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct SpectrumCommandReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub spectrum: SpectrumReport,
}

impl SpectrumCommandReport {
    pub fn render_text(&self) -> String {
        let s = &self.spectrum;
        let mut out = String::new();
        out.push_str(&format!("n                 = {}\n", s.n));
        out.push_str(&format!("inertia           = {:.10}\n", s.inertia));
        out.push_str(&format!("mean eigenvalue   = {:.10}\n", s.mean));
        out.push_str(&format!("effective dim     = {:.6}\n", s.nu));
        match s.skewness {
            Some(a) => out.push_str(&format!("spectral skewness = {a:.6}\n")),
            None => out.push_str("spectral skewness = undefined (flat spectrum)\n"),
        }
        out.push_str(&format!(
            "raw moments       = {:?}\n",
            s.raw_moments.map(|m| format!("{m:.6e}"))
        ));
        out.push_str(&format!(
            "centered moments  = {:?}\n",
            s.centered_moments.map(|m| format!("{m:.6e}"))
        ));
        if let Some(lambdas) = &s.lambdas {
            out.push_str("eigenvalues       =");
            for l in lambdas {
                out.push_str(&format!(" {l:.6e}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct McRow {
    pub target: String,
    pub exact_value: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub z_gap: f64,
}

#[derive(Debug, Serialize)]
pub struct McReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub rows: Vec<McRow>,
}

impl McReport {
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "n = {}, samples = {}, seed = {}\n{:<10} {:>16} {:>16} {:>12} {:>8}\n",
            self.n, self.samples, self.seed, "moment", "exact", "estimate", "std.error", "z-gap"
        );
        for row in &self.rows {
            out.push_str(&format!(
                "{:<10} {:>16.8e} {:>16.8e} {:>12.4e} {:>8.2}\n",
                row.target, row.exact_value, row.estimate, row.std_error, row.z_gap
            ));
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub scope: String,
    pub samples: u64,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            out.push_str(&format!(
                "{} {}: {}\n",
                if check.passed { "PASS" } else { "FAIL" },
                check.name,
                check.detail
            ));
        }
        out.push_str(&format!(
            "{}: {} checks, scope {}\n",
            if self.passed {
                "ALL PASSED"
            } else {
                "FAILURES"
            },
            self.checks.len(),
            self.scope
        ));
        out
    }
}
