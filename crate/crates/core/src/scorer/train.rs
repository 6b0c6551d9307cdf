use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{Dims, Model, Prepared};
use super::params::Grads;
use super::ScorerError;
use crate::corpus::Sentence;
use crate::grammar::build_grammar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Adam,
    Sgd,
}

/// Training hyperparameters. Every field has a default, so a TOML file may
/// set only what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Learning-rate factor applied every `decay_every` epochs.
    pub decay: f64,
    pub decay_every: usize,
    pub epochs: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
    /// Shuffle sentence order every epoch.
    pub shuffle: bool,
    /// Stop once an epoch reaches this teacher-forced action accuracy.
    pub target_accuracy: Option<f64>,
    /// Rescale each sentence gradient to at most this L2 norm.
    pub clip: Option<f64>,
    pub dims: Dims,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            decay: 0.1,
            decay_every: 10,
            epochs: 30,
            optimizer: Optimizer::Adam,
            seed: 1,
            shuffle: true,
            target_accuracy: None,
            clip: Some(5.0),
            dims: Dims::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ScorerError> {
        let bad = |m: &str| Err(ScorerError::Config(m.into()));
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.decay > 0.0) || self.decay_every == 0 {
            return bad("decay must be positive and decay_every at least 1");
        }
        if !self.dims.is_valid() {
            return bad("dimensions must be positive");
        }
        Ok(())
    }
}

/// Learning rate in a zero-based epoch under step decay.
pub fn lr_at(config: &TrainConfig, epoch: usize) -> f64 {
    config.learning_rate * config.decay.powi((epoch / config.decay_every) as i32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub learning_rate: f64,
    /// Mean sentence loss, measured before each sentence's update.
    pub loss: f64,
    /// Teacher-forced action accuracy during the epoch.
    pub accuracy: f64,
}

struct Adam {
    m: Grads,
    v: Grads,
    t: i32,
}

/// Sentence-level online training.
pub struct Trainer {
    pub model: Model,
    pub config: TrainConfig,
    pub data: Vec<Prepared>,
    grads: Grads,
    adam: Option<Adam>,
    rng: ChaCha8Rng,
    epoch: usize,
}

impl Trainer {
    pub fn new(model: Model, data: Vec<Prepared>, config: TrainConfig) -> Result<Trainer, ScorerError> {
        config.validate()?;
        let grads = Grads::zeros(&model.params);
        let adam = (config.optimizer == Optimizer::Adam).then(|| Adam { m: Grads::zeros(&model.params), v: Grads::zeros(&model.params), t: 0 });
        let rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
        Ok(Trainer { model, config, data, grads, adam, rng, epoch: 0 })
    }

    pub fn epochs_done(&self) -> usize {
        self.epoch
    }

    /// One pass over the data.
    pub fn epoch(&mut self) -> Result<EpochStats, ScorerError> {
        let lr = lr_at(&self.config, self.epoch);
        let mut order: Vec<usize> = (0..self.data.len()).collect();
        if self.config.shuffle {
            order.shuffle(&mut self.rng);
        }
        let (mut loss, mut actions, mut correct) = (0.0, 0, 0);
        for i in order {
            self.grads.clear();
            {
                let (run, out, ok) = self.model.forward(&self.data[i])?;
                loss += run.t.scalar(out);
                actions += self.data[i].action_count();
                correct += ok;
                run.t.backward(out, &mut self.grads);
            }
            if let Some(c) = self.config.clip {
                let norm = (0..self.model.params.len()).flat_map(|id| self.grads.values(id)).map(|x| x * x).sum::<f64>().sqrt();
                if norm > c {
                    self.grads.scale(c / norm);
                }
            }
            self.step(lr);
        }
        self.epoch += 1;
        let n = self.data.len().max(1) as f64;
        Ok(EpochStats { epoch: self.epoch, learning_rate: lr, loss: loss / n, accuracy: if actions == 0 { 1.0 } else { correct as f64 / actions as f64 } })
    }

    fn step(&mut self, lr: f64) {
        let params = &mut self.model.params;
        match &mut self.adam {
            None => {
                for id in 0..params.len() {
                    for (p, g) in params.values_mut(id).iter_mut().zip(self.grads.values(id)) {
                        *p -= lr * g;
                    }
                }
            }
            Some(a) => {
                const B1: f64 = 0.9;
                const B2: f64 = 0.999;
                const EPS: f64 = 1e-8;
                a.t += 1;
                let (c1, c2) = (1.0 - B1.powi(a.t), 1.0 - B2.powi(a.t));
                for id in 0..params.len() {
                    let g = self.grads.values(id);
                    let m = a.m.values_mut(id);
                    for (m, g) in m.iter_mut().zip(g) {
                        *m = B1 * *m + (1.0 - B1) * g;
                    }
                    let v = a.v.values_mut(id);
                    for (v, g) in v.iter_mut().zip(g) {
                        *v = B2 * *v + (1.0 - B2) * g * g;
                    }
                    let (m, v) = (a.m.values(id), a.v.values(id));
                    for ((p, m), v) in params.values_mut(id).iter_mut().zip(m).zip(v) {
                        *p -= lr * (m / c1) / ((v / c2).sqrt() + EPS);
                    }
                }
            }
        }
    }

    /// Runs the remaining epochs, stopping early at the target accuracy.
    pub fn run(&mut self) -> Result<Vec<EpochStats>, ScorerError> {
        let mut stats = Vec::new();
        while self.epoch < self.config.epochs {
            let s = self.epoch()?;
            log::info!("epoch {} lr {:.2e} loss {:.4} acc {:.4}", s.epoch, s.learning_rate, s.loss, s.accuracy);
            stats.push(s);
            if self.config.target_accuracy.is_some_and(|t| s.accuracy >= t) {
                break;
            }
        }
        Ok(stats)
    }
}

/// Extracts a grammar from the corpus graphs, builds a model and trains it.
pub fn train(sentences: &[Sentence], config: &TrainConfig) -> Result<(Model, Vec<EpochStats>), ScorerError> {
    config.validate()?;
    let (grammar, failures) = build_grammar(sentences.iter().map(|s| &s.graph));
    if let Some(f) = failures.first() {
        return Err(ScorerError::Config(format!("sentence {}: {}", f.index, f.error)));
    }
    let model = Model::new(grammar, sentences, config.dims, config.seed)?;
    let data = sentences.iter().map(|s| model.prepare(s)).collect::<Result<Vec<_>, _>>()?;
    let mut trainer = Trainer::new(model, data, config.clone())?;
    let stats = trainer.run()?;
    Ok((trainer.model, stats))
}
