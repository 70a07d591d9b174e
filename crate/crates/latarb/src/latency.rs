//! Network latency models: Gaussian and empirical (bootstrap) distributions,
//! plus the catalog file format for named city-pair measurements.
//!
//! Times are milliseconds as floating point throughout. Distribution objects
//! are immutable after construction; random sources are always supplied by
//! the caller so the seeded-replication contract lives with the engine.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::normal_cdf;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum LatencyError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("invalid stats at {path}:{line}: {msg}")]
    InvalidStats { path: PathBuf, line: usize, msg: String },
    #[error("invalid distribution: {0}")]
    Invalid(String),
}

/// How Gaussian draws treat the negative tail.
///
/// `Physical` resamples until the draw is positive (latencies are times);
/// `AllowNegative` keeps the untruncated normal so Monte Carlo estimates
/// target exactly the distribution the closed forms integrate over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    #[default]
    Physical,
    AllowNegative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLatency<F = f64> {
    pub mu: F,
    pub sigma: F,
}

impl<F: Real> GaussianLatency<F> {
    pub fn new(mu: F, sigma: F) -> Result<Self, LatencyError> {
        if !(mu > F::zero()) || !(sigma > F::zero()) {
            return Err(LatencyError::Invalid(format!(
                "gaussian latency requires mu > 0 and sigma > 0 (got mu = {}, sigma = {})",
                mu.to_f64_lossy(),
                sigma.to_f64_lossy()
            )));
        }
        Ok(Self { mu, sigma })
    }
}

/// Observed latencies, resampled i.i.d. uniformly (bootstrap).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLatency<F = f64> {
    samples: Vec<F>,
}

impl<F: Real> EmpiricalLatency<F> {
    /// Sorts the samples; rejects empty input and negative values.
    pub fn new(mut samples: Vec<F>) -> Result<Self, LatencyError> {
        if samples.is_empty() {
            return Err(LatencyError::Invalid("empirical latency needs at least one sample".into()));
        }
        if samples.iter().any(|s| !(*s >= F::zero())) {
            return Err(LatencyError::Invalid("empirical latency samples must be >= 0".into()));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[F] {
        &self.samples
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LatencyModel<F = f64> {
    Gaussian(GaussianLatency<F>),
    Empirical(EmpiricalLatency<F>),
}

impl<F: Real> LatencyModel<F> {
    pub fn gaussian(mu: F, sigma: F) -> Result<Self, LatencyError> {
        Ok(Self::Gaussian(GaussianLatency::new(mu, sigma)?))
    }

    pub fn empirical(samples: Vec<F>) -> Result<Self, LatencyError> {
        Ok(Self::Empirical(EmpiricalLatency::new(samples)?))
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, Self::Gaussian(_))
    }

    /// One latency draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, mode: SamplingMode) -> F {
        match self {
            Self::Gaussian(g) => loop {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                let l = g.mu + g.sigma * F::c(z);
                if mode == SamplingMode::AllowNegative || l > F::zero() {
                    return l;
                }
            },
            Self::Empirical(e) => {
                let idx = rng.random_range(0..e.samples.len());
                e.samples[idx]
            }
        }
    }

    /// `P(latency <= t)`.
    pub fn cdf(&self, t: F) -> F {
        match self {
            Self::Gaussian(g) => normal_cdf((t - g.mu) / g.sigma),
            Self::Empirical(e) => {
                let n = e.samples.partition_point(|s| *s <= t);
                F::from_usize(n).unwrap() / F::from_usize(e.samples.len()).unwrap()
            }
        }
    }

    /// Largest latency the model can produce; `None` for unbounded support.
    pub fn max_support(&self) -> Option<F> {
        match self {
            Self::Gaussian(_) => None,
            Self::Empirical(e) => e.samples.last().copied(),
        }
    }

    pub fn mean(&self) -> F {
        match self {
            Self::Gaussian(g) => g.mu,
            Self::Empirical(e) => {
                e.samples.iter().copied().sum::<F>() / F::from_usize(e.samples.len()).unwrap()
            }
        }
    }

    pub fn std_dev(&self) -> F {
        match self {
            Self::Gaussian(g) => g.sigma,
            Self::Empirical(e) => {
                let m = self.mean();
                let n = F::from_usize(e.samples.len()).unwrap();
                (e.samples.iter().map(|s| (*s - m) * (*s - m)).sum::<F>() / n).sqrt()
            }
        }
    }
}

/// The two one-way paths from the investor, plus the HFT inter-exchange
/// latency H. The legs are modeled as statistically independent.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyPair<F = f64> {
    /// Investor -> small exchange S.
    pub dist_s: LatencyModel<F>,
    /// Investor -> large exchange L.
    pub dist_l: LatencyModel<F>,
    /// HFT inter-exchange latency (ms), deterministic.
    pub h: F,
}

impl<F: Real> LatencyPair<F> {
    pub fn new(dist_s: LatencyModel<F>, dist_l: LatencyModel<F>, h: F) -> Result<Self, LatencyError> {
        if !(h > F::zero()) {
            return Err(LatencyError::Invalid(format!("H must be > 0, got {}", h.to_f64_lossy())));
        }
        Ok(Self { dist_s, dist_l, h })
    }

    pub fn both_gaussian(&self) -> Option<(&GaussianLatency<F>, &GaussianLatency<F>)> {
        match (&self.dist_s, &self.dist_l) {
            (LatencyModel::Gaussian(s), LatencyModel::Gaussian(l)) => Some((s, l)),
            _ => None,
        }
    }
}

/// Loads a latency catalog CSV with header `name,kind,p1,p2`.
///
/// `kind = gaussian`: p1 = mu (ms), p2 = sigma (ms).
/// `kind = empirical`: p1 = path (relative to the catalog file) of a
/// one-value-per-line CSV of sample latencies in ms, p2 empty.
pub fn load_latency_csv(path: &Path) -> Result<BTreeMap<String, LatencyModel<f64>>, LatencyError> {
    let text = fs::read_to_string(path).map_err(|source| LatencyError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut catalog = BTreeMap::new();
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| LatencyError::Parse {
        path: path.to_path_buf(),
        line: 1,
        msg: "empty catalog file".into(),
    })?;
    if header.trim() != "name,kind,p1,p2" {
        return Err(LatencyError::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected header 'name,kind,p1,p2', got '{}'", header.trim()),
        });
    }

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(LatencyError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("expected 4 comma-separated fields, got {}", fields.len()),
            });
        }
        let name = fields[0].to_string();
        let model = match fields[1] {
            "gaussian" => {
                let mu: f64 = parse_num(fields[2], path, line_no, "mu")?;
                let sigma: f64 = parse_num(fields[3], path, line_no, "sigma")?;
                GaussianLatency::new(mu, sigma)
                    .map(LatencyModel::Gaussian)
                    .map_err(|e| LatencyError::InvalidStats {
                        path: path.to_path_buf(),
                        line: line_no,
                        msg: e.to_string(),
                    })?
            }
            "empirical" => {
                let sample_path = dir.join(fields[2]);
                let samples = load_sample_csv(&sample_path)?;
                EmpiricalLatency::new(samples).map(LatencyModel::Empirical).map_err(|e| {
                    LatencyError::InvalidStats {
                        path: path.to_path_buf(),
                        line: line_no,
                        msg: e.to_string(),
                    }
                })?
            }
            other => {
                return Err(LatencyError::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    msg: format!("unknown kind '{other}' (expected gaussian or empirical)"),
                })
            }
        };
        catalog.insert(name, model);
    }
    Ok(catalog)
}

/// Loads a one-column CSV of latency samples in ms.
pub fn load_sample_csv(path: &Path) -> Result<Vec<f64>, LatencyError> {
    let text = fs::read_to_string(path).map_err(|source| LatencyError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        samples.push(parse_num(line, path, idx + 1, "sample")?);
    }
    Ok(samples)
}

fn parse_num(s: &str, path: &Path, line: usize, what: &str) -> Result<f64, LatencyError> {
    s.parse::<f64>().map_err(|_| LatencyError::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("invalid {what}: '{s}'"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    #[test]
    fn gaussian_invariants_enforced() {
        assert!(GaussianLatency::new(100.0, 0.0).is_err());
        assert!(GaussianLatency::new(-1.0, 1.0).is_err());
        assert!(GaussianLatency::new(100.0, 1e-9).is_ok());
    }

    #[test]
    fn vanishing_noise_draws_collapse_to_mean() {
        let m = LatencyModel::<f64>::gaussian(100.0, 1e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let l = m.sample(&mut rng, SamplingMode::Physical);
            assert!((l - 100.0).abs() < 1e-6);
        }
    }

    #[test]
    fn empirical_resampling_is_uniform() {
        let m = LatencyModel::empirical(vec![5.0, 7.0, 9.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 300_000usize;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let l = m.sample(&mut rng, SamplingMode::Physical);
            let idx = match l {
                x if x == 5.0 => 0,
                x if x == 7.0 => 1,
                _ => 2,
            };
            counts[idx] += 1;
        }
        for c in counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.01, "freq = {freq}");
        }
    }

    #[test]
    fn cdf_examples() {
        let g = LatencyModel::<f64>::gaussian(103.0, 25.7).unwrap();
        assert!((g.cdf(103.0) - 0.5).abs() < 1e-15);
        // Phi(51/25.7) = Phi(1.98443...) ~ 0.97639
        assert!((g.cdf(154.0) - 0.9764).abs() < 3e-4);
        let e = LatencyModel::<f64>::empirical(vec![5.0, 7.0, 9.0]).unwrap();
        assert!((e.cdf(7.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.cdf(4.0), 0.0);
        assert_eq!(e.cdf(9.0), 1.0);
    }

    #[test]
    fn max_support_cases() {
        assert_eq!(LatencyModel::gaussian(51.0, 28.0).unwrap().max_support(), None);
        let e = LatencyModel::empirical(vec![600.0, 671.0, 450.0]).unwrap();
        assert_eq!(e.max_support(), Some(671.0));
        let single = LatencyModel::empirical(vec![42.0]).unwrap();
        assert_eq!(single.max_support(), Some(42.0));
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let m = LatencyModel::gaussian(51.0, 28.0).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..16).map(|_| m.sample(&mut rng, SamplingMode::Physical)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn catalog_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let catalog_path = dir.path().join("catalog.csv");
        let samples_path = dir.path().join("kampala.csv");
        let mut f = std::fs::File::create(&samples_path).unwrap();
        writeln!(f, "430\n671\n440").unwrap();
        std::fs::write(
            &catalog_path,
            "name,kind,p1,p2\nalbany-nyc,gaussian,51,28\nalbany-chi,gaussian,103,25.7\nkampala-chi,empirical,kampala.csv,\n",
        )
        .unwrap();
        let cat = load_latency_csv(&catalog_path).unwrap();
        assert_eq!(cat.len(), 3);
        match &cat["albany-nyc"] {
            LatencyModel::Gaussian(g) => {
                assert_eq!(g.mu, 51.0);
                assert_eq!(g.sigma, 28.0);
            }
            _ => panic!("expected gaussian"),
        }
        assert_eq!(cat["kampala-chi"].max_support(), Some(671.0));

        // sigma <= 0 is invalid-stats with the offending line number
        std::fs::write(&catalog_path, "name,kind,p1,p2\nbad,gaussian,51,-1\n").unwrap();
        match load_latency_csv(&catalog_path) {
            Err(LatencyError::InvalidStats { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected InvalidStats, got {other:?}"),
        }

        // malformed row is a parse error with the line number
        std::fs::write(&catalog_path, "name,kind,p1,p2\nok,gaussian,51,28\nbroken,gaussian,xx,28\n").unwrap();
        match load_latency_csv(&catalog_path) {
            Err(LatencyError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected Parse, got {other:?}"),
        }
    }
}
