use serde::{Deserialize, Serialize};

/// Running mean and variance (Welford) of a vector-valued statistic.
#[derive(Debug, Clone)]
pub struct MeanAccumulator {
    n: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl MeanAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = v - *m;
            *m += delta / n;
            *s += delta * (v - *m);
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn finish(&self) -> Estimate {
        let n = self.n as f64;
        Estimate {
            mean: self.mean.clone(),
            se: self
                .m2
                .iter()
                .map(|s| if self.n > 1 { (s / (n - 1.0) / n).sqrt() } else { f64::INFINITY })
                .collect(),
        }
    }
}

/// Monte Carlo mean with its standard error, per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

/// Pass rule applied per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Criterion {
    /// `|estimate - oracle| <= k·se`
    StandardErrors { k: f64 },
    /// `|estimate - oracle| <= rel·|oracle|`
    Relative { rel: f64 },
    /// `StandardErrors` where the oracle is exactly zero, `Relative` elsewhere.
    ZeroOrRelative { k: f64, rel: f64 },
}

/// Oracles with magnitude below this are treated as exact zeros.
pub const ZERO_ORACLE: f64 = 1e-12;

impl Criterion {
    pub fn passes(&self, estimate: f64, oracle: f64, se: f64) -> bool {
        let gap = (estimate - oracle).abs();
        match *self {
            Criterion::StandardErrors { k } => gap <= k * se,
            Criterion::Relative { rel } => gap <= rel * oracle.abs(),
            Criterion::ZeroOrRelative { k, rel } => {
                if oracle.abs() < ZERO_ORACLE {
                    gap <= k * se
                } else {
                    gap <= rel * oracle.abs()
                }
            }
        }
    }
}

/// Serialized as `{name, n, seed, estimate, oracle, se, rel_err, pass}`.
/// `rel_err` is `null` for coordinates whose oracle is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub n: u64,
    pub seed: u64,
    pub estimate: Vec<f64>,
    pub oracle: Vec<f64>,
    pub se: Vec<f64>,
    pub rel_err: Vec<Option<f64>>,
    pub pass: bool,
}

impl CheckReport {
    pub fn judge(
        name: impl Into<String>,
        n: u64,
        seed: u64,
        estimate: Vec<f64>,
        oracle: Vec<f64>,
        se: Vec<f64>,
        criterion: Criterion,
    ) -> Self {
        let pass = estimate
            .iter()
            .zip(&oracle)
            .zip(&se)
            .all(|((e, o), s)| criterion.passes(*e, *o, *s));
        Self::from_parts(name, n, seed, estimate, oracle, se, pass)
    }

    /// A report whose pass flag was decided by the caller.
    pub fn from_parts(
        name: impl Into<String>,
        n: u64,
        seed: u64,
        estimate: Vec<f64>,
        oracle: Vec<f64>,
        se: Vec<f64>,
        pass: bool,
    ) -> Self {
        assert_eq!(estimate.len(), oracle.len());
        assert_eq!(estimate.len(), se.len());
        let rel_err = estimate
            .iter()
            .zip(&oracle)
            .map(|(e, o)| (o.abs() >= ZERO_ORACLE).then(|| ((e - o) / o).abs()))
            .collect();
        Self {
            name: name.into(),
            n,
            seed,
            estimate,
            oracle,
            se,
            rel_err,
            pass,
        }
    }

    /// A deterministic comparison (no sampling error).
    pub fn exact(name: impl Into<String>, estimate: f64, oracle: f64, tolerance: f64) -> Self {
        let rel = if oracle.abs() >= ZERO_ORACLE {
            Some(((estimate - oracle) / oracle).abs())
        } else {
            None
        };
        let pass = rel.map_or((estimate - oracle).abs() <= tolerance, |r| r <= tolerance);
        Self {
            name: name.into(),
            n: 0,
            seed: 0,
            estimate: vec![estimate],
            oracle: vec![oracle],
            se: vec![0.0],
            rel_err: vec![rel],
            pass,
        }
    }
}
