//! Gradient-descent training of a chain with annealed step sizes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainNetwork, ChainObjective, ChainSpec, GradientFlow};
use crate::error::{Result, SvqError};
use crate::svq::StageObjective;

/// Initial step sizes for one stage's weights, biases and reconstruction
/// vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSteps {
    pub weights: f64,
    pub biases: f64,
    pub recon: f64,
}

impl StageSteps {
    pub fn uniform(step: f64) -> Self {
        StageSteps {
            weights: step,
            biases: step,
            recon: step,
        }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.weights, self.biases, self.recon]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSchedule {
    pub epochs: usize,
    /// Points per gradient step; `None` uses the whole dataset.
    #[serde(default)]
    pub batch_size: Option<usize>,
    pub steps: Vec<StageSteps>,
    /// Multiplicative step decay per epoch once a stage's decay has begun.
    pub decay: f64,
    /// Fraction of `epochs` after which each stage starts decaying.
    pub decay_start: Vec<f64>,
    /// Fraction of `epochs` before which each stage is frozen. Empty means
    /// every stage trains from the first epoch.
    #[serde(default)]
    pub train_start: Vec<f64>,
    #[serde(default = "default_init_range")]
    pub init_range: f64,
    pub seed: u64,
    #[serde(default)]
    pub flow: GradientFlow,
}

fn default_init_range() -> f64 {
    0.1
}

impl TrainingSchedule {
    /// Defaults for an `L`-stage chain: 500 full-batch epochs, decay 0.99
    /// per epoch with stage `l` starting after `l * 10%` of training.
    pub fn default_for(stages: usize, step: f64, seed: u64) -> Self {
        TrainingSchedule {
            epochs: 500,
            batch_size: None,
            steps: vec![StageSteps::uniform(step); stages],
            decay: 0.99,
            decay_start: (1..=stages).map(|l| 0.1 * l as f64).collect(),
            train_start: Vec::new(),
            init_range: 0.1,
            seed,
            flow: GradientFlow::Full,
        }
    }

    pub fn validate(&self, stages: usize) -> Result<()> {
        if self.steps.len() != stages {
            return Err(SvqError::dims("per-stage step sizes", stages, self.steps.len()));
        }
        if self.decay_start.len() != stages {
            return Err(SvqError::dims("per-stage decay offsets", stages, self.decay_start.len()));
        }
        if self
            .steps
            .iter()
            .flat_map(|s| s.as_array())
            .any(|v| !(v >= 0.0 && v.is_finite()))
        {
            return Err(SvqError::invalid("steps", "step sizes must be finite and non-negative"));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(SvqError::invalid("decay", "must lie in (0, 1]"));
        }
        if !self.train_start.is_empty() && self.train_start.len() != stages {
            return Err(SvqError::dims("per-stage training starts", stages, self.train_start.len()));
        }
        if self
            .decay_start
            .iter()
            .chain(&self.train_start)
            .any(|f| !(0.0..=1.0).contains(f))
        {
            return Err(SvqError::invalid(
                "decay_start/train_start",
                "offsets are fractions in [0, 1]",
            ));
        }
        if self.batch_size == Some(0) {
            return Err(SvqError::invalid("batch_size", "must be at least 1"));
        }
        if !(self.init_range >= 0.0 && self.init_range.is_finite()) {
            return Err(SvqError::invalid("init_range", "must be finite and non-negative"));
        }
        Ok(())
    }

    /// Step sizes for `stage` (0-based) during `epoch`.
    pub fn steps_at(&self, stage: usize, epoch: usize) -> [f64; 3] {
        let frozen_until = self
            .train_start
            .get(stage)
            .map_or(0, |f| (f * self.epochs as f64).floor() as usize);
        if epoch < frozen_until {
            return [0.0; 3];
        }
        let start = (self.decay_start[stage] * self.epochs as f64).floor() as usize;
        let factor = self.decay.powi(epoch.saturating_sub(start) as i32);
        self.steps[stage].as_array().map(|s| s * factor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub stages: Vec<StageObjective>,
    pub weighted_total: f64,
}

/// Objective at the start of every epoch, plus the value after training.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingTrace {
    pub records: Vec<EpochRecord>,
    pub final_objective: Option<EpochRecord>,
}

impl TrainingTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn initial_total(&self) -> Option<f64> {
        self.records.first().map(|r| r.weighted_total)
    }

    pub fn final_total(&self) -> Option<f64> {
        self.final_objective.as_ref().map(|r| r.weighted_total)
    }

    /// Mean weighted total over the first and last quarters of the epochs.
    pub fn quarter_means(&self) -> Option<(f64, f64)> {
        let n = self.records.len();
        if n < 4 {
            return None;
        }
        let q = n / 4;
        let mean = |rs: &[EpochRecord]| rs.iter().map(|r| r.weighted_total).sum::<f64>() / rs.len() as f64;
        Some((mean(&self.records[..q]), mean(&self.records[n - q..])))
    }
}

fn record(epoch: usize, obj: &ChainObjective) -> EpochRecord {
    EpochRecord {
        epoch,
        stages: obj.stages.clone(),
        weighted_total: obj.weighted_total,
    }
}

fn check_finite(epoch: usize, obj: &ChainObjective) -> Result<()> {
    if let Some(stage) = obj.stages.iter().position(|s| !s.total.is_finite()) {
        return Err(SvqError::Divergence {
            epoch,
            stage: stage + 1,
            detail: "stage objective is not finite".into(),
        });
    }
    if !obj.weighted_total.is_finite() {
        return Err(SvqError::Divergence {
            epoch,
            stage: 0,
            detail: "weighted total is not finite".into(),
        });
    }
    Ok(())
}

/// Initialises a chain from `spec` with the schedule's seed and trains it.
pub fn train_from_spec(
    spec: &ChainSpec,
    data: &[Vec<f64>],
    schedule: &TrainingSchedule,
) -> Result<(ChainNetwork, TrainingTrace)> {
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let chain = ChainNetwork::random(spec, schedule.init_range, &mut rng)?;
    train_with_rng(chain, data, schedule, &mut rng)
}

/// Trains an already-initialised chain. The schedule's seed drives shuffling.
pub fn train(
    chain: ChainNetwork,
    data: &[Vec<f64>],
    schedule: &TrainingSchedule,
) -> Result<(ChainNetwork, TrainingTrace)> {
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    train_with_rng(chain, data, schedule, &mut rng)
}

fn train_with_rng(
    mut chain: ChainNetwork,
    data: &[Vec<f64>],
    schedule: &TrainingSchedule,
    rng: &mut ChaCha8Rng,
) -> Result<(ChainNetwork, TrainingTrace)> {
    if data.is_empty() {
        return Err(SvqError::EmptyDataset);
    }
    schedule.validate(chain.num_stages())?;
    if let Some(bad) = data.iter().find(|x| x.len() != chain.input_dim()) {
        return Err(SvqError::dims("training data", chain.input_dim(), bad.len()));
    }
    let full_batch = schedule.batch_size.map_or(true, |b| b >= data.len());
    let batch_size = schedule.batch_size.unwrap_or(data.len()).min(data.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = TrainingTrace::default();

    for epoch in 0..schedule.epochs {
        let steps: Vec<[f64; 3]> = (0..chain.num_stages())
            .map(|l| schedule.steps_at(l, epoch))
            .collect();
        if full_batch {
            let grads = chain.gradients(data, schedule.flow)?;
            check_finite(epoch, &grads.objective)?;
            trace.records.push(record(epoch, &grads.objective));
            apply(&mut chain, &grads.stages, &steps, epoch)?;
        } else {
            let obj = chain.objective(data)?;
            check_finite(epoch, &obj)?;
            trace.records.push(record(epoch, &obj));
            order.shuffle(rng);
            let mut batch: Vec<Vec<f64>> = Vec::with_capacity(batch_size);
            for idx in order.chunks(batch_size) {
                batch.clear();
                batch.extend(idx.iter().map(|&i| data[i].clone()));
                let grads = chain.gradients(&batch, schedule.flow)?;
                apply(&mut chain, &grads.stages, &steps, epoch)?;
            }
        }
    }
    if schedule.epochs > 0 {
        let obj = chain.objective(data)?;
        check_finite(schedule.epochs, &obj)?;
        trace.final_objective = Some(record(schedule.epochs, &obj));
    }
    Ok((chain, trace))
}

fn apply(
    chain: &mut ChainNetwork,
    grads: &[crate::svq::StageGradients],
    steps: &[[f64; 3]],
    epoch: usize,
) -> Result<()> {
    for (l, ((stage, g), s)) in chain
        .stages_mut()
        .iter_mut()
        .zip(grads)
        .zip(steps)
        .enumerate()
    {
        if !g.is_finite() {
            return Err(SvqError::Divergence {
                epoch,
                stage: l + 1,
                detail: "gradient is not finite".into(),
            });
        }
        stage.apply_step(g, *s);
    }
    Ok(())
}

/// One attempt of the multi-seed protocol.
#[derive(Debug, Clone)]
pub struct SeedAttempt {
    pub seed: u64,
    pub passed: bool,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct MultiSeedOutcome {
    pub attempts: Vec<SeedAttempt>,
    pub accepted: Option<(u64, ChainNetwork, TrainingTrace)>,
}

/// Trains with each seed in turn and returns the first run whose trained
/// chain passes `check`. `check` returns `Ok(())` or a reason for rejection.
/// Diverged seeds are recorded and skipped; if every seed diverges the last
/// divergence is returned as the error.
pub fn train_multi_seed<F>(
    spec: &ChainSpec,
    data: &[Vec<f64>],
    schedule: &TrainingSchedule,
    seeds: &[u64],
    mut check: F,
) -> Result<MultiSeedOutcome>
where
    F: FnMut(&ChainNetwork) -> std::result::Result<(), String>,
{
    let mut attempts = Vec::new();
    let mut divergence = None;
    let mut checked = false;
    for &seed in seeds {
        let sched = TrainingSchedule {
            seed,
            ..schedule.clone()
        };
        let (chain, trace) = match train_from_spec(spec, data, &sched) {
            Ok(r) => r,
            Err(e @ SvqError::Divergence { .. }) => {
                attempts.push(SeedAttempt {
                    seed,
                    passed: false,
                    message: e.to_string(),
                });
                divergence = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        checked = true;
        match check(&chain) {
            Ok(()) => {
                attempts.push(SeedAttempt {
                    seed,
                    passed: true,
                    message: "accepted".into(),
                });
                return Ok(MultiSeedOutcome {
                    attempts,
                    accepted: Some((seed, chain, trace)),
                });
            }
            Err(reason) => attempts.push(SeedAttempt {
                seed,
                passed: false,
                message: reason,
            }),
        }
    }
    match divergence {
        Some(e) if !checked => Err(e),
        _ => Ok(MultiSeedOutcome {
            attempts,
            accepted: None,
        }),
    }
}
