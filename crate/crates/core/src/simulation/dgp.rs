use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stats::{expit, standard_normal, uniform, RandomStream};

/// Causal structure of the simulated data.
///
/// | dag | W -> A, Y | U -> M, Y | mediator error |
/// |-----|-----------|-----------|----------------|
/// | a   | yes       | no        | no             |
/// | b   | no        | yes       | no             |
/// | c   | yes       | yes       | no             |
/// | d   | yes       | yes       | yes            |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dag {
    A,
    B,
    C,
    D,
}

impl Dag {
    pub const ALL: [Dag; 4] = [Dag::A, Dag::B, Dag::C, Dag::D];

    pub fn has_w(self) -> bool {
        matches!(self, Dag::A | Dag::C | Dag::D)
    }

    pub fn has_u(self) -> bool {
        !matches!(self, Dag::A)
    }

    pub fn has_measurement_error(self) -> bool {
        self == Dag::D
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dag::A => "a",
            Dag::B => "b",
            Dag::C => "c",
            Dag::D => "d",
        }
    }
}

impl std::fmt::Display for Dag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Dag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Dag::A),
            "b" => Ok(Dag::B),
            "c" => Ok(Dag::C),
            "d" => Ok(Dag::D),
            other => Err(Error::InvalidParameter(format!("unknown dag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub dag: Dag,
    pub n: usize,
    pub seed: u64,
    /// Replicate index; selects the random stream.
    #[serde(default)]
    pub stream_id: u64,
    /// Read `|0.5 + 0.5 a|` as the mediator's standard deviation (true) or
    /// its variance (false).
    #[serde(default = "default_true")]
    pub sd_is_second_param: bool,
}

fn default_true() -> bool {
    true
}

impl DgpConfig {
    pub fn new(dag: Dag, n: usize, seed: u64) -> Self {
        Self {
            dag,
            n,
            seed,
            stream_id: 0,
            sd_is_second_param: true,
        }
    }

    pub fn replicate(mut self, stream_id: u64) -> Self {
        self.stream_id = stream_id;
        self
    }

    /// Conditional standard deviation of the true mediator given `A = a`
    /// (excluding the contribution of `U`).
    pub fn mediator_noise_sd(&self, a: f64) -> f64 {
        let second = (0.5 + 0.5 * a).abs();
        if self.sd_is_second_param {
            second
        } else {
            second.sqrt()
        }
    }
}

// stream tags, one per source of randomness
const TAG_W: u64 = 1;
const TAG_U: u64 = 2;
const TAG_A: u64 = 3;
const TAG_M: u64 = 4;
const TAG_ERROR: u64 = 5;
const TAG_Y: u64 = 6;

/// Draws one dataset:
///
/// ```text
/// W ~ N(0, 1)                      (dags a, c, d; else 0)
/// U ~ N(0, 1)                      (dags b, c, d; else 0)
/// A | W ~ Bernoulli(expit(W))
/// M | A, U ~ N(A + U, s(A)),       s(A) = |0.5 + 0.5 A| as sd (or variance)
/// M* = M + N(0, 1)                 (dag d; else M* = M)
/// Y = A + M - U - W + N(0, 1)
/// ```
///
/// Each variable has its own stream, so dags that share a component draw it
/// identically for the same `(seed, stream_id)`. The true indirect effect of
/// `A = 1` versus `A = 0` is 1.
pub fn generate_dataset(cfg: &DgpConfig) -> Result<Dataset> {
    if cfg.n < 10 {
        return Err(Error::InvalidParameter(format!(
            "simulated sample size must be at least 10 (got {})",
            cfg.n
        )));
    }
    let n = cfg.n;
    let base = RandomStream::new(cfg.seed, cfg.stream_id);
    let w = if cfg.dag.has_w() {
        standard_normal(base.derive(TAG_W), n)
    } else {
        vec![0.0; n]
    };
    let u = if cfg.dag.has_u() {
        standard_normal(base.derive(TAG_U), n)
    } else {
        vec![0.0; n]
    };
    let a: Vec<f64> = uniform(base.derive(TAG_A), n)
        .into_iter()
        .zip(&w)
        .map(|(v, &wi)| if v < expit(wi) { 1.0 } else { 0.0 })
        .collect();
    let m: Vec<f64> = standard_normal(base.derive(TAG_M), n)
        .into_iter()
        .enumerate()
        .map(|(i, z)| a[i] + u[i] + cfg.mediator_noise_sd(a[i]) * z)
        .collect();
    let observed = if cfg.dag.has_measurement_error() {
        standard_normal(base.derive(TAG_ERROR), n)
            .into_iter()
            .zip(&m)
            .map(|(e, mi)| mi + e)
            .collect()
    } else {
        m.clone()
    };
    let y: Vec<f64> = standard_normal(base.derive(TAG_Y), n)
        .into_iter()
        .enumerate()
        .map(|(i, e)| a[i] + m[i] - u[i] - w[i] + e)
        .collect();

    Dataset::new(y, observed, a)?.with_latents(
        cfg.dag.has_u().then_some(u),
        cfg.dag.has_w().then_some(w),
        Some(m),
    )
}
