use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::genius::{BootstrapResult, HetTestResult, Method, NieEstimate};
use crate::simulation::SimulationReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// How a report was produced: enough to rerun it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invocation {
    pub tool: String,
    pub version: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
}

impl Invocation {
    pub fn new(args: &[String], seed: Option<u64>) -> Self {
        Self {
            tool: "mediate".into(),
            version: VERSION.into(),
            args: args.to_vec(),
            seed,
        }
    }

    /// Shell-style command line, quoting arguments that need it.
    pub fn command_line(&self) -> String {
        let mut s = self.tool.clone();
        for a in &self.args {
            s.push(' ');
            if a.is_empty() || a.chars().any(|c| c.is_whitespace() || "\"'$\\#".contains(c)) {
                s.push('\'');
                s.push_str(&a.replace('\'', "'\\''"));
                s.push('\'');
            } else {
                s.push_str(a);
            }
        }
        s
    }

    fn header_lines(&self) -> String {
        let mut h = String::new();
        writeln!(h, "# {} {}", self.tool, self.version).unwrap();
        writeln!(h, "# invocation: {}", self.command_line()).unwrap();
        if let Some(seed) = self.seed {
            writeln!(h, "# seed: {seed}").unwrap();
        }
        h
    }
}

/// Non-finite floats are written as JSON `null` and read back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Result of one `estimate` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub invocation: Invocation,
    pub method: Method,
    pub a: f64,
    pub a_star: f64,
    #[serde(with = "nullable")]
    pub nie: f64,
    #[serde(with = "nullable")]
    pub theta_m: f64,
    #[serde(with = "nullable")]
    pub beta_a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_mc: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_ac: Option<Vec<f64>>,
    #[serde(with = "nullable")]
    pub se_theta: f64,
    #[serde(with = "nullable")]
    pub se_beta: f64,
    #[serde(with = "nullable")]
    pub se_delta: f64,
    #[serde(with = "nullable")]
    pub ci_delta_lower: f64,
    #[serde(with = "nullable")]
    pub ci_delta_upper: f64,
    pub bootstrap: Option<BootstrapResult>,
    pub het_test: Option<HetTestResult>,
    pub weak_id: bool,
    pub n: usize,
    pub rows_dropped: usize,
    pub warnings: Vec<String>,
}

impl EstimateReport {
    pub fn from_estimate(invocation: Invocation, est: &NieEstimate, n: usize) -> Self {
        Self {
            invocation,
            method: est.method,
            a: est.contrast.0,
            a_star: est.contrast.1,
            nie: est.nie,
            theta_m: est.theta_m,
            beta_a: est.beta_a,
            theta_mc: est.theta_mc.clone(),
            beta_ac: est.beta_ac.clone(),
            se_theta: est.se_theta,
            se_beta: est.se_beta,
            se_delta: est.se_delta,
            ci_delta_lower: est.ci_delta.0,
            ci_delta_upper: est.ci_delta.1,
            bootstrap: est.bootstrap.clone(),
            het_test: None,
            weak_id: false,
            n,
            rows_dropped: 0,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Flat `field,value` pairs in report order.
    pub fn fields(&self) -> Vec<(String, String)> {
        let mut f: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| f.push((k.to_string(), v));
        put("method", self.method.to_string());
        put("a", num(self.a));
        put("a_star", num(self.a_star));
        put("nie", num(self.nie));
        put("theta_m", num(self.theta_m));
        put("beta_a", num(self.beta_a));
        for (j, v) in self.theta_mc.iter().flatten().enumerate() {
            put(&format!("theta_mc_{}", j + 1), num(*v));
        }
        for (j, v) in self.beta_ac.iter().flatten().enumerate() {
            put(&format!("beta_ac_{}", j + 1), num(*v));
        }
        put("se_theta", num(self.se_theta));
        put("se_beta", num(self.se_beta));
        put("se_delta", num(self.se_delta));
        put("ci_delta_lower", num(self.ci_delta_lower));
        put("ci_delta_upper", num(self.ci_delta_upper));
        if let Some(b) = &self.bootstrap {
            put("bootstrap_replicates", b.replicates.to_string());
            put("bootstrap_seed", b.seed.to_string());
            put("bootstrap_se", num(b.se));
            put("bootstrap_ci_lower", num(b.ci.0));
            put("bootstrap_ci_upper", num(b.ci.1));
            put("bootstrap_failures", b.failures.to_string());
        }
        if let Some(h) = &self.het_test {
            push_het(&mut put, h);
        }
        put("weak_id", self.weak_id.to_string());
        put("n", self.n.to_string());
        put("rows_dropped", self.rows_dropped.to_string());
        for w in &self.warnings {
            put("warning", w.clone());
        }
        f
    }

    /// `field,value` CSV preceded by `#` invocation lines.
    pub fn to_csv(&self) -> Result<String> {
        fields_csv(&self.invocation, &self.fields())
    }
}

fn push_het(put: &mut impl FnMut(&str, String), h: &HetTestResult) {
    put("het_statistic", num(h.statistic));
    put("het_df", h.df.to_string());
    put("het_p_value", num(h.p_value));
    for lv in &h.variance_by_level {
        put(&format!("het_variance_a{}", num(lv.level)), num(lv.variance));
        put(&format!("het_count_a{}", num(lv.level)), lv.count.to_string());
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let s = format!("{v:?}");
        s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
    }
}

fn fields_csv(inv: &Invocation, fields: &[(String, String)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["field", "value"])?;
    for (k, v) in fields {
        w.write_record([k, v])?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8");
    Ok(inv.header_lines() + &body)
}

/// Heteroskedasticity test output of `het-test`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HetReport {
    pub invocation: Invocation,
    pub result: HetTestResult,
    pub rows_dropped: usize,
    pub warnings: Vec<String>,
}

impl HetReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut f: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| f.push((k.to_string(), v));
        push_het(&mut put, &self.result);
        put("n", self.result.n.to_string());
        put("rows_dropped", self.rows_dropped.to_string());
        for w in &self.warnings {
            put("warning", w.clone());
        }
        fields_csv(&self.invocation, &f)
    }
}

/// Output of `rr`: one conditional risk-ratio indirect effect per level of C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrReport {
    pub invocation: Invocation,
    pub a: String,
    pub a_star: String,
    pub estimates: Vec<crate::mediation::RrNieEstimate>,
}

impl RrReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["c", "a", "a_star", "rr_nie", "numerator", "denominator"])?;
        for e in &self.estimates {
            w.write_record([
                e.c.clone(),
                self.a.clone(),
                self.a_star.clone(),
                num(e.rr),
                num(e.numerator),
                num(e.denominator),
            ])?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8");
        Ok(self.invocation.header_lines() + &body)
    }
}

/// Columns of the operating-characteristics table.
pub const TABLE_COLUMNS: [&str; 12] = [
    "dag",
    "method",
    "bias",
    "mc_variance",
    "proportion_bias_pct",
    "mse",
    "mean_var_estimate",
    "coverage_delta",
    "coverage_bootstrap",
    "n_replicates",
    "n_failed_replicates",
    "variance_defined",
];

/// Simulation table as CSV, one row per (dag, method), preceded by `#` lines
/// carrying the invocation and the study configuration.
pub fn simulation_csv(report: &SimulationReport, inv: &Invocation) -> Result<String> {
    let mut head = inv.header_lines();
    let cfg = &report.config;
    let list = |v: Vec<String>| v.join(",");
    writeln!(
        head,
        "# config: dags={} methods={} replications={} n={} a={} a_star={} bootstrap={} seed={} sd_is_second_param={} theta_se={}",
        list(cfg.dags.iter().map(|d| d.to_string()).collect()),
        list(cfg.methods.iter().map(|m| m.to_string()).collect()),
        cfg.replications,
        cfg.n,
        num(cfg.a),
        num(cfg.a_star),
        cfg.bootstrap.map_or("none".to_string(), |b| b.to_string()),
        cfg.seed,
        cfg.sd_is_second_param,
        serde_json::to_value(cfg.theta_se)?.as_str().unwrap_or_default(),
    )
    .unwrap();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_COLUMNS)?;
    for r in &report.rows {
        w.write_record([
            r.dag.to_string(),
            r.method.to_string(),
            num(r.bias),
            num(r.mc_variance),
            num(r.proportion_bias_pct),
            num(r.mse),
            num(r.mean_var_estimate),
            num(r.coverage_delta),
            r.coverage_bootstrap.map(num).unwrap_or_default(),
            r.n_replicates.to_string(),
            r.n_failed_replicates.to_string(),
            r.variance_defined.to_string(),
        ])?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8");
    Ok(head + &body)
}

#[derive(Serialize)]
struct SimulationJson<'a> {
    invocation: &'a Invocation,
    #[serde(flatten)]
    report: &'a SimulationReport,
}

pub fn simulation_json(report: &SimulationReport, inv: &Invocation) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SimulationJson { invocation: inv, report })? + "\n")
}

/// Per-replicate estimates in long format, suitable for boxplots.
pub fn write_replicate_dump<W: Write>(report: &SimulationReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dag", "method", "replicate", "estimate", "var_delta", "hit_delta", "hit_bootstrap", "error"])?;
    let opt_bool = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
    for r in &report.records {
        w.write_record([
            r.dag.to_string(),
            r.method.to_string(),
            r.replicate.to_string(),
            r.estimate.map(num).unwrap_or_default(),
            r.var_delta.map(num).unwrap_or_default(),
            opt_bool(r.hit_delta),
            opt_bool(r.hit_bootstrap),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-20, 123456789.0, -2.5e300, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1.0), "1");
        assert_eq!(num(0.1), "0.1");
    }

    #[test]
    fn quoting() {
        let inv = Invocation::new(&["--input".into(), "my file.csv".into()], Some(7));
        assert_eq!(inv.command_line(), "mediate --input 'my file.csv'");
        assert!(inv.header_lines().contains("# seed: 7"));
    }

    #[test]
    fn non_finite_json() {
        let est = NieEstimate {
            method: Method::Genius,
            nie: f64::INFINITY,
            contrast: (1.0, 0.0),
            theta_m: f64::NAN,
            beta_a: 1.0,
            se_theta: 0.1,
            se_beta: 0.1,
            se_delta: 0.1,
            ci_delta: (0.0, 1.0),
            bootstrap: None,
            theta_mc: None,
            beta_ac: None,
        };
        let r = EstimateReport::from_estimate(Invocation::new(&[], None), &est, 4);
        let back = EstimateReport::from_json(&r.to_json().unwrap()).unwrap();
        assert!(back.nie.is_nan() && back.theta_m.is_nan());
        assert_eq!(back.beta_a, 1.0);
    }
}
