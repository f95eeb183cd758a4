use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dgp::{generate_dataset, Dag, DgpConfig};
use super::summary::{operating_characteristics, ReportRow};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::genius::{nie_genius, BootstrapConfig, GeniusOptions, Inference, Method, NieEstimate, ThetaSe};
use crate::mediation::{nie_naive, nie_oracle};
use crate::stats::{HcType, RandomStream};

pub const DEFAULT_SEED: u64 = 20_190_611;
pub const TRUE_NIE: f64 = 1.0;
/// Largest tolerated fraction of failed replicates per (dag, method) cell.
pub const MAX_REPLICATE_FAILURE_RATE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub dags: Vec<Dag>,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub n: usize,
    pub a: f64,
    pub a_star: f64,
    /// Bootstrap resamples per replicate; `None` (written `0` in config
    /// files) disables bootstrap coverage.
    #[serde(with = "zero_is_none")]
    pub bootstrap: Option<usize>,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub sd_is_second_param: bool,
    pub theta_se: ThetaSe,
}

mod zero_is_none {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(v.unwrap_or(0) as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        Ok(Option::<usize>::deserialize(d)?.filter(|&b| b > 0))
    }
}

impl Default for StudyConfig {
    /// Desk scale: 500 replications of n = 1000 with 200 bootstrap resamples.
    fn default() -> Self {
        Self {
            dags: Dag::ALL.to_vec(),
            methods: vec![Method::Naive, Method::Genius, Method::Oracle],
            replications: 500,
            n: 1000,
            a: 1.0,
            a_star: 0.0,
            bootstrap: Some(200),
            seed: DEFAULT_SEED,
            threads: None,
            sd_is_second_param: true,
            theta_se: ThetaSe::Stacked,
        }
    }
}

impl StudyConfig {
    /// 2,000 replications with 2,000 bootstrap resamples each.
    pub fn full_scale() -> Self {
        Self {
            replications: 2000,
            bootstrap: Some(2000),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        if self.dags.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidParameter("need at least one dag and one method".into()));
        }
        if self.n < 10 {
            return Err(Error::InvalidParameter(format!("n must be at least 10 (got {})", self.n)));
        }
        if let Some(b) = self.bootstrap {
            if b < 100 {
                return Err(Error::InvalidParameter(format!(
                    "bootstrap needs at least 100 resamples (got {b})"
                )));
            }
        }
        if self.methods.contains(&Method::GeniusInteraction) {
            return Err(Error::InvalidParameter(
                "simulated data have no covariates; genius-interaction is not available".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidParameter("threads must be positive".into()));
        }
        if self.a == self.a_star {
            return Err(Error::InvalidParameter("contrast a = a_star has no indirect effect to study".into()));
        }
        Ok(())
    }

    /// True indirect effect for the configured contrast.
    pub fn true_value(&self) -> f64 {
        TRUE_NIE * (self.a - self.a_star)
    }
}

/// Outcome of one method on one simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub dag: Dag,
    pub method: Method,
    pub replicate: usize,
    pub estimate: Option<f64>,
    pub var_delta: Option<f64>,
    pub hit_delta: Option<bool>,
    pub hit_bootstrap: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: StudyConfig,
    pub rows: Vec<ReportRow>,
    /// Per-replicate estimates in (dag, replicate, method) order.
    #[serde(skip)]
    pub records: Vec<ReplicateRecord>,
}

impl SimulationReport {
    pub fn row(&self, dag: Dag, method: Method) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.dag == dag && r.method == method)
    }
}

fn method_tag(m: Method) -> u64 {
    match m {
        Method::Naive => 101,
        Method::Genius => 102,
        Method::GeniusInteraction => 103,
        Method::Oracle => 104,
    }
}

fn estimate_one(data: &Dataset, method: Method, cfg: &StudyConfig, inference: Inference) -> Result<NieEstimate> {
    let hc = HcType::Hc0;
    match method {
        Method::Naive => nie_naive(data, cfg.a, cfg.a_star, inference, hc),
        Method::Oracle => nie_oracle(data, cfg.a, cfg.a_star, inference, hc),
        Method::Genius => {
            let opts = GeniusOptions {
                theta_se: cfg.theta_se,
                hc,
                ..Default::default()
            };
            nie_genius(data, cfg.a, cfg.a_star, inference, &opts)
        }
        Method::GeniusInteraction => unreachable!("rejected by validate"),
    }
}

fn run_replicate(cfg: &StudyConfig, dag: Dag, r: usize) -> Vec<ReplicateRecord> {
    let truth = cfg.true_value();
    let dgp = DgpConfig {
        dag,
        n: cfg.n,
        seed: cfg.seed,
        stream_id: r as u64,
        sd_is_second_param: cfg.sd_is_second_param,
    };
    let failed = |method, msg: String| ReplicateRecord {
        dag,
        method,
        replicate: r,
        estimate: None,
        var_delta: None,
        hit_delta: None,
        hit_bootstrap: None,
        error: Some(msg),
    };
    let data = match generate_dataset(&dgp) {
        Ok(d) => d,
        Err(e) => return cfg.methods.iter().map(|&m| failed(m, e.to_string())).collect(),
    };
    let stream = RandomStream::new(cfg.seed, r as u64).derive(dag as u64 + 1);
    cfg.methods
        .iter()
        .map(|&method| {
            let inference = match cfg.bootstrap {
                Some(b) => Inference::Both(BootstrapConfig::new(b, stream.derive(method_tag(method)).seed)),
                None => Inference::Delta,
            };
            match estimate_one(&data, method, cfg, inference) {
                Ok(est) => ReplicateRecord {
                    dag,
                    method,
                    replicate: r,
                    estimate: Some(est.nie),
                    var_delta: Some(est.var_delta()),
                    hit_delta: Some(est.ci_delta.0 <= truth && truth <= est.ci_delta.1),
                    hit_bootstrap: est.ci_bootstrap().map(|(lo, hi)| lo <= truth && truth <= hi),
                    error: None,
                },
                Err(e) => failed(method, e.to_string()),
            }
        })
        .collect()
}

/// Monte Carlo study: for every dag and replicate, simulate one dataset and
/// apply every method to it. Replicate `r` uses stream id `r` under the study
/// seed for every dag, so the report is identical for any thread count.
pub fn run_study(cfg: &StudyConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let jobs: Vec<(Dag, usize)> = cfg
        .dags
        .iter()
        .flat_map(|&d| (0..cfg.replications).map(move |r| (d, r)))
        .collect();
    let work = || -> Vec<ReplicateRecord> {
        jobs.par_iter()
            .map(|&(dag, r)| run_replicate(cfg, dag, r))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    let records = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(work),
        None => work(),
    };

    let truth = cfg.true_value();
    let mut rows = Vec::new();
    for &dag in &cfg.dags {
        for &method in &cfg.methods {
            let cell: Vec<&ReplicateRecord> = records
                .iter()
                .filter(|r| r.dag == dag && r.method == method)
                .collect();
            let ok: Vec<&ReplicateRecord> = cell.iter().copied().filter(|r| r.error.is_none()).collect();
            let failed = cell.len() - ok.len();
            if failed as f64 > MAX_REPLICATE_FAILURE_RATE * cell.len() as f64 {
                return Err(Error::TooManyFailures {
                    what: "simulation replicates",
                    failed,
                    total: cell.len(),
                });
            }
            let est: Vec<f64> = ok.iter().map(|r| r.estimate.unwrap()).collect();
            let var: Vec<f64> = ok.iter().map(|r| r.var_delta.unwrap()).collect();
            let hits: Vec<bool> = ok.iter().map(|r| r.hit_delta.unwrap()).collect();
            let boot: Option<Vec<bool>> = ok.iter().map(|r| r.hit_bootstrap).collect();
            let boot = if cfg.bootstrap.is_some() { boot } else { None };
            let mut row = operating_characteristics(&est, &var, &hits, boot.as_deref(), truth)?;
            row.dag = dag;
            row.method = method;
            row.n_failed_replicates = failed;
            rows.push(row);
        }
    }
    Ok(SimulationReport {
        config: cfg.clone(),
        rows,
        records,
    })
}
