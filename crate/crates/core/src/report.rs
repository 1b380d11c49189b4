//! Experiment reports, summary statistics and the ratio-suite protocol.

use serde::{Deserialize, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::Result;
use crate::exec::Execution;
use crate::expansion::{Expansion, ExpansionSampler};
use crate::params::ParameterPair;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Keys `q05`, `q25`, `q50`, `q75`, `q95`.
    pub quantiles: BTreeMap<String, f64>,
}

impl Stats {
    /// Summary of finite values; non-finite entries are ignored here and
    /// must be flagged by the caller.
    pub fn from_values(values: &[f64]) -> Self {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return Self::default();
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let q = |p: f64| {
            let h = p * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        let quantiles = [("q05", 0.05), ("q25", 0.25), ("q50", 0.5), ("q75", 0.75), ("q95", 0.95)]
            .iter()
            .map(|&(k, p)| (k.to_string(), q(p)))
            .collect();
        Self {
            min: v[0],
            max: v[n - 1],
            mean: v.iter().sum::<f64>() / n as f64,
            quantiles,
        }
    }
}

/// A named numeric check against a threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value` is finite and `<= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value.is_finite() && value <= threshold,
        }
    }

    /// Passes when `value` is finite and strictly below `threshold`.
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value.is_finite() && value < threshold,
        }
    }
}

/// Numbers as JSON; non-finite values become strings so nothing is lost.
fn ser_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&v.to_string())
    }
}

fn ser_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_f64(x, s),
        None => s.serialize_none(),
    }
}

fn de_f64<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    de_opt_f64(d)?.ok_or_else(|| serde::de::Error::custom("missing number"))
}

fn de_opt_f64<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        F(f64),
        S(String),
    }
    match Option::<Num>::deserialize(d)? {
        None => Ok(None),
        Some(Num::F(x)) => Ok(Some(x)),
        Some(Num::S(s)) => s.parse().map(Some).map_err(serde::de::Error::custom),
    }
}

/// Plot-ready numeric table, written as CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Persistent result of one experiment run.
///
/// `runtime_ms` is the only field that varies between identical runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: Option<ParameterPair>,
    #[serde(serialize_with = "ser_opt_f64", deserialize_with = "de_opt_f64")]
    pub p: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64", deserialize_with = "de_opt_f64")]
    pub s_or_gamma: Option<f64>,
    pub k: Option<u32>,
    pub seed: Option<u64>,
    pub samples: usize,
    pub stats: Stats,
    /// `None` for exploratory runs that draw no conclusion.
    pub pass: Option<bool>,
    pub runtime_ms: u64,
    /// Every setting that influenced the numbers.
    pub settings: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub ratios: Vec<f64>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            ..Default::default()
        }
    }

    pub fn setting(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.settings.insert(key.to_string(), v);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with `runtime_ms` zeroed, for determinism comparisons.
    pub fn to_json_without_runtime(&self) -> String {
        let mut c = self.clone();
        c.runtime_ms = 0;
        c.to_json()
    }

    /// Per-sample ratios as `index,ratio` CSV.
    pub fn ratios_csv(&self) -> String {
        let mut out = String::from("index,ratio\n");
        for (i, r) in self.ratios.iter().enumerate() {
            let _ = writeln!(out, "{i},{r}");
        }
        out
    }

    /// Sets `pass` from the checks (all must pass) unless already decided.
    pub fn finish_from_checks(&mut self) {
        if self.pass.is_none() {
            self.pass = Some(self.checks.iter().all(|c| c.pass));
        }
    }
}

/// Monte-Carlo settings shared by the ratio suites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSettings {
    pub samples: usize,
    pub seed: u64,
    pub sampler: ExpansionSampler,
    /// Base grid resolution; the refinement run uses twice this.
    pub resolution: usize,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self {
            samples: 300,
            seed: 20240611,
            sampler: ExpansionSampler::default(),
            resolution: 128,
            exec: Execution::Parallel,
        }
    }
}

/// Outcome of the stability protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioSuiteOutcome {
    /// Ratios of samples `0..n` at the base resolution.
    pub base: Vec<f64>,
    /// Ratios of samples `n..2n` at the base resolution.
    pub extra: Vec<f64>,
    /// Ratios of samples `0..n` at twice the resolution.
    pub refined: Vec<f64>,
    pub sup: f64,
    pub sup_doubled_samples: f64,
    pub sup_refined: f64,
    pub inf: f64,
    pub inf_doubled_samples: f64,
    pub inf_refined: f64,
    pub all_finite: bool,
}

fn rel_change(a: f64, b: f64) -> f64 {
    (b - a).abs() / a.abs().max(f64::MIN_POSITIVE)
}

impl RatioSuiteOutcome {
    pub fn drift_samples(&self) -> f64 {
        rel_change(self.sup, self.sup_doubled_samples)
    }

    pub fn drift_grid(&self) -> f64 {
        rel_change(self.sup, self.sup_refined)
    }

    pub fn inf_drift_samples(&self) -> f64 {
        rel_change(self.inf, self.inf_doubled_samples)
    }

    pub fn inf_drift_grid(&self) -> f64 {
        rel_change(self.inf, self.inf_refined)
    }

    /// Writes stats, ratios and the stability checks into `report`.
    /// With `two_sided` the infimum must be positive and stable as well.
    pub fn fill(&self, report: &mut ExperimentReport, two_sided: bool) {
        let mut all = self.base.clone();
        all.extend_from_slice(&self.extra);
        report.samples = self.base.len();
        report.stats = Stats::from_values(&all);
        report.ratios = all;
        report.checks.push(Check {
            name: "all_ratios_finite".into(),
            value: if self.all_finite { 1.0 } else { 0.0 },
            threshold: 1.0,
            pass: self.all_finite,
        });
        report.checks.push(Check::below("sup_drift_doubled_samples", self.drift_samples(), 0.1));
        report.checks.push(Check::below("sup_drift_doubled_grid", self.drift_grid(), 0.1));
        if two_sided {
            report.checks.push(Check {
                name: "inf_positive".into(),
                value: self.inf,
                threshold: 0.0,
                pass: self.inf > 0.0,
            });
            report.checks.push(Check::below("inf_drift_doubled_samples", self.inf_drift_samples(), 0.1));
            report.checks.push(Check::below("inf_drift_doubled_grid", self.inf_drift_grid(), 0.1));
            report
                .checks
                .push(Check::at_most("spread_max_over_min", self.sup_doubled_samples / self.inf_doubled_samples, f64::MAX));
        }
        report.finish_from_checks();
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn inf(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Runs the stability protocol: `ratio` on samples `0..n` and `n..2n` with
/// a context built for the base resolution, then on `0..n` with a context
/// for twice the resolution. Samples are evaluated through `exec` and
/// collected in index order.
pub fn ratio_suite<C: Sync>(
    params: &ParameterPair,
    settings: &SuiteSettings,
    prepare: impl Fn(usize) -> Result<C>,
    ratio: impl Fn(&Expansion, &C) -> Result<f64> + Sync + Send,
) -> Result<RatioSuiteOutcome> {
    let n = settings.samples;
    let sampler = settings.sampler;
    let run = |ctx: &C, offset: usize| -> Result<Vec<f64>> {
        settings.exec.try_map_indices(n, |i| {
            let e = sampler.sample(params, settings.seed, (offset + i) as u64);
            ratio(&e, ctx)
        })
    };
    let base_ctx = prepare(settings.resolution)?;
    let base = run(&base_ctx, 0)?;
    let extra = run(&base_ctx, n)?;
    drop(base_ctx);
    let fine_ctx = prepare(2 * settings.resolution)?;
    let refined = run(&fine_ctx, 0)?;

    let all_finite = base.iter().chain(&extra).chain(&refined).all(|x| x.is_finite());
    let both: Vec<f64> = base.iter().chain(&extra).copied().collect();
    Ok(RatioSuiteOutcome {
        sup: sup(&base),
        sup_doubled_samples: sup(&both),
        sup_refined: sup(&refined),
        inf: inf(&base),
        inf_doubled_samples: inf(&both),
        inf_refined: inf(&refined),
        base,
        extra,
        refined,
        all_finite,
    })
}
