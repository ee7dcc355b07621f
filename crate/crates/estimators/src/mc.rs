//! Replicated crossing lengths.

use lfpp_field::seed::tag_f;
use lfpp_field::{
    derive_seed, FieldError, FieldKind, FieldSample, GridSpec, KernelFamily, Rect, Result, Sampler, SamplerOptions,
    SliceMode, TruncationParams,
};
use lfpp_metric::{build_weights, crossing, Orientation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const TAG_CROSSING: u64 = 0x6372_6f73;

/// Default budget in projected node visits.
pub const DEFAULT_BUDGET: f64 = 5e10;

/// Minimum replica count for a crossing Monte Carlo run.
pub const MIN_REPLICAS: usize = 16;

/// Which field drives the metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldModel {
    Phi,
    Psi(TruncationParams),
}

impl FieldModel {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldModel::Phi => FieldKind::Phi,
            FieldModel::Psi(_) => FieldKind::Psi,
        }
    }

    /// Sampler of the field at scales `[0, scale]` on `grid`.
    pub fn sampler(&self, scale: f64, grid: GridSpec) -> Result<Sampler> {
        match self {
            FieldModel::Phi => Sampler::new(vec![KernelFamily::Heat], 0.0, scale, grid, SamplerOptions::default()),
            FieldModel::Psi(tp) => {
                let opts = SamplerOptions { mode: SliceMode::Independent, ..Default::default() };
                Sampler::new(vec![KernelFamily::Truncated(*tp)], 0.0, scale, grid, opts)
            }
        }
    }
}

/// A crossing observable: rectangle and direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub rect: Rect,
    pub orientation: Orientation,
}

impl Observable {
    /// Left-right crossing of `[0, a] x [0, b]`.
    pub fn left_right(a: f64, b: f64) -> Self {
        Observable { rect: Rect::sized(a, b), orientation: Orientation::LeftRight }
    }

    pub fn tag(&self) -> String {
        let base = format!("L_{{{},{}}}", self.rect.width(), self.rect.height());
        match self.orientation {
            Orientation::LeftRight => base,
            Orientation::TopBottom => format!("{base}-tb"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    /// Metric exponents; every replica field is reused for all of them.
    pub xis: Vec<f64>,
    pub scales: Vec<f64>,
    pub observables: Vec<Observable>,
    pub replicas: usize,
    pub model: FieldModel,
    /// Refusal threshold in projected node visits.
    pub budget: f64,
}

impl McConfig {
    pub fn new(xis: Vec<f64>, scales: Vec<f64>, observables: Vec<Observable>, replicas: usize, model: FieldModel) -> Self {
        McConfig { xis, scales, observables, replicas, model, budget: DEFAULT_BUDGET }
    }

    /// Grid nodes times replicas, counted once for synthesis and once per `xi`.
    pub fn projected_visits(&self) -> Result<f64> {
        let mut total = 0.0;
        for &n in &self.scales {
            for obs in &self.observables {
                let g = GridSpec::for_scale(n, obs.rect)?;
                total += g.len() as f64 * self.replicas as f64 * (1 + self.xis.len()) as f64;
            }
        }
        Ok(total)
    }

    pub fn digest(&self, master_seed: u64) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("config serializes"));
        h.update(master_seed.to_le_bytes());
        hex::encode(h.finalize())
    }

    fn validate(&self) -> Result<()> {
        if self.replicas < MIN_REPLICAS {
            return Err(FieldError::Config(format!("replicas must be >= {MIN_REPLICAS}, got {}", self.replicas)));
        }
        if self.xis.is_empty() || self.scales.is_empty() || self.observables.is_empty() {
            return Err(FieldError::Config("xi, scale and observable lists must be nonempty".into()));
        }
        if let Some(x) = self.xis.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(FieldError::Config(format!("xi must be finite and >= 0, got {x}")));
        }
        if let Some(n) = self.scales.iter().find(|n| !(**n >= 0.0 && n.is_finite())) {
            return Err(FieldError::Config(format!("scales must be >= 0, got {n}")));
        }
        let visits = self.projected_visits()?;
        if visits > self.budget {
            return Err(FieldError::Budget(format!(
                "projected {visits:.3e} node visits exceed the budget of {:.3e}",
                self.budget
            )));
        }
        Ok(())
    }
}

/// Replicated crossing lengths for one (xi, scale, observable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub scale: f64,
    pub xi: f64,
    pub observable: String,
    pub rect: Rect,
    pub orientation: Orientation,
    pub model: FieldModel,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub config_digest: String,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn log_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.ln()).collect()
    }

    /// SHA-256 over the value bits and seeds.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.scale.to_le_bytes());
        h.update(self.xi.to_le_bytes());
        for (v, s) in self.values.iter().zip(&self.seeds) {
            h.update(v.to_bits().to_le_bytes());
            h.update(s.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Concatenates replicas of two runs with the same configuration.
    pub fn merged(&self, other: &SampleSet) -> Result<SampleSet> {
        if self.scale != other.scale || self.xi != other.xi || self.rect != other.rect || self.orientation != other.orientation {
            return Err(FieldError::Domain("cannot merge sample sets of different observables".into()));
        }
        let mut out = self.clone();
        out.values.extend_from_slice(&other.values);
        out.seeds.extend_from_slice(&other.seeds);
        out.config_digest = format!("{}+{}", self.config_digest, other.config_digest);
        Ok(out)
    }
}

/// Seed of replica `idx` for `(scale, observable)`.
pub fn replica_seed(master: u64, scale: f64, obs: &Observable, idx: usize) -> u64 {
    let r = obs.rect;
    let o = match obs.orientation {
        Orientation::LeftRight => 0,
        Orientation::TopBottom => 1,
    };
    derive_seed(master, &[TAG_CROSSING, tag_f(scale), tag_f(r.x0), tag_f(r.y0), tag_f(r.x1), tag_f(r.y1), o, idx as u64])
}

/// Crossing lengths of `obs` for each seed, one row per seed and one column
/// per `xi`. The field is sampled once per seed on the observable's grid.
pub fn crossing_values(model: &FieldModel, xis: &[f64], scale: f64, obs: &Observable, seeds: &[u64]) -> Result<Vec<Vec<f64>>> {
    let grid = GridSpec::for_scale(scale, obs.rect)?;
    let degenerate = xis.iter().all(|&x| x == 0.0);
    let sampler = if degenerate { None } else { Some(model.sampler(scale, grid)?) };
    seeds
        .par_iter()
        .map(|&seed| {
            let field = match &sampler {
                Some(s) => s.sample(seed),
                None => FieldSample::constant(grid, 0.0),
            };
            xis.iter()
                .map(|&xi| {
                    let wg = build_weights(&field, xi, 1.0)?;
                    Ok(crossing(&wg, &obs.rect, obs.orientation)?.length)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// Runs every `(scale, observable)` pair and returns one [`SampleSet`] per
/// `(xi, scale, observable)`, ordered by scale, then observable, then `xi`.
pub fn mc_crossings(cfg: &McConfig, master_seed: u64) -> Result<Vec<SampleSet>> {
    cfg.validate()?;
    let digest = cfg.digest(master_seed);
    let mut out = Vec::new();
    for &scale in &cfg.scales {
        for obs in &cfg.observables {
            let seeds: Vec<u64> = (0..cfg.replicas).map(|i| replica_seed(master_seed, scale, obs, i)).collect();
            let rows = crossing_values(&cfg.model, &cfg.xis, scale, obs, &seeds)?;
            for (c, &xi) in cfg.xis.iter().enumerate() {
                out.push(SampleSet {
                    scale,
                    xi,
                    observable: obs.tag(),
                    rect: obs.rect,
                    orientation: obs.orientation,
                    model: cfg.model,
                    values: rows.iter().map(|r| r[c]).collect(),
                    seeds: seeds.clone(),
                    config_digest: digest.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Sample sets matching `xi` and `observable`, sorted by scale.
pub fn select<'a>(sets: &'a [SampleSet], xi: f64, observable: &str) -> Vec<&'a SampleSet> {
    let mut v: Vec<&SampleSet> = sets.iter().filter(|s| s.xi == xi && s.observable == observable).collect();
    v.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    v
}
