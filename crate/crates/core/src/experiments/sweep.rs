//! Sweep records: rows of (param, λ, measure, norm, ratio) with flags, and
//! least-squares fits over the unflagged rows.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::families::CounterexampleFamily;
use crate::error::{Error, Result};
use crate::norms::weak_ratio;
use crate::numeric::linear_fit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowFlag {
    /// The image threshold c/λ is ≥ 1, so the superlevel formula does not
    /// apply; the row is excluded from fits.
    ThresholdInvalid,
    /// Distribution or norm estimate did not meet its tolerance.
    Unconverged,
    /// The superlevel set is empty; the row carries no log-scale information.
    Empty,
}

impl RowFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowFlag::ThresholdInvalid => "threshold_invalid",
            RowFlag::Unconverged => "unconverged",
            RowFlag::Empty => "empty",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Which test function the row belongs to (suite checks) or the family
    /// name (counterexample sweeps).
    pub series: String,
    pub param: f64,
    pub lambda: f64,
    pub measure: f64,
    pub measure_error: f64,
    /// Input norm, not raised to q.
    pub norm: f64,
    pub ratio: f64,
    pub flag: Option<RowFlag>,
}

impl SweepRow {
    pub fn new(series: impl Into<String>, param: f64, lambda: f64, measure: f64, measure_error: f64, norm: f64, q: f64) -> Self {
        let ratio = weak_ratio(lambda, measure, norm, q);
        let flag = if measure <= 0.0 { Some(RowFlag::Empty) } else { None };
        Self { series: series.into(), param, lambda, measure, measure_error, norm, ratio, flag }
    }

    pub fn flagged(mut self, flag: Option<RowFlag>) -> Self {
        if flag.is_some() {
            self.flag = flag;
        }
        self
    }

    pub fn usable(&self) -> bool {
        self.flag.is_none() && self.ratio > 0.0 && self.ratio.is_finite()
    }
}

/// y = slope·x + intercept over the usable rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub x: String,
    pub y: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
    pub residuals: Vec<f64>,
    pub points: usize,
}

impl SweepFit {
    pub fn new(x_name: &str, y_name: &str, x: &[f64], y: &[f64]) -> Option<Self> {
        let f = linear_fit(x, y)?;
        Some(Self {
            x: x_name.into(),
            y: y_name.into(),
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            slope_stderr: f.slope_stderr,
            residuals: f.residuals,
            points: x.len(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub name: String,
    pub family: Option<CounterexampleFamily>,
    /// Exponent q in λ^q·μ/‖f‖^q.
    pub q: f64,
    pub rows: Vec<SweepRow>,
    pub fits: BTreeMap<String, SweepFit>,
    pub summary: BTreeMap<String, f64>,
}

impl SweepResult {
    pub fn new(name: impl Into<String>, family: Option<CounterexampleFamily>, q: f64, mut rows: Vec<SweepRow>) -> Self {
        rows.sort_by(|a, b| a.param.total_cmp(&b.param).then(a.lambda.total_cmp(&b.lambda)));
        Self { name: name.into(), family, q, rows, fits: BTreeMap::new(), summary: BTreeMap::new() }
    }

    pub fn usable_rows<'a>(&'a self, series: Option<&'a str>) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.usable() && series.map_or(true, |s| r.series == s))
    }

    /// log ratio against log λ.
    pub fn loglog_fit(&self, series: Option<&str>) -> Option<SweepFit> {
        let (x, y): (Vec<f64>, Vec<f64>) = self.usable_rows(series).map(|r| (r.lambda.ln(), r.ratio.ln())).unzip();
        SweepFit::new("log lambda", "log ratio", &x, &y)
    }

    /// Largest ratio at each λ over all series, as (λ, max).
    pub fn suite_max_curve(&self) -> Vec<(f64, f64)> {
        let mut by_lambda: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.flag != Some(RowFlag::ThresholdInvalid) && r.flag != Some(RowFlag::Unconverged)) {
            let e = by_lambda.entry(r.lambda.to_bits()).or_insert((r.lambda, 0.0));
            e.1 = e.1.max(r.ratio);
        }
        let mut v: Vec<(f64, f64)> = by_lambda.into_values().collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    /// Every ratio agrees with a recomputation through `weak_ratio`.
    pub fn ratios_consistent(&self, rel: f64) -> bool {
        self.rows.iter().all(|r| {
            let again = weak_ratio(r.lambda, r.measure, r.norm, self.q);
            (again - r.ratio).abs() <= rel * r.ratio.abs() || (again == 0.0 && r.ratio == 0.0)
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
        out.write_record(["param", "lambda", "measure", "norm", "ratio", "flag", "series"]).map_err(io)?;
        for r in &self.rows {
            out.write_record([
                format!("{:.16e}", r.param),
                format!("{:.16e}", r.lambda),
                format!("{:.16e}", r.measure),
                format!("{:.16e}", r.norm),
                format!("{:.16e}", r.ratio),
                r.flag.map_or(String::new(), |f| f.as_str().to_string()),
                r.series.clone(),
            ])
            .map_err(io)?;
        }
        out.flush().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("sweep results serialize")
    }
}
