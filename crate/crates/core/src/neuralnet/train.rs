use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AdamState, Loss, NetError, Network};
use crate::datasets::Sample;

/// Optimizer loop settings shared by both architectures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub loss: Loss,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many epochs without a new best validation loss.
    pub patience: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
}

/// Mean losses after one epoch. The training value averages the minibatch
/// losses seen during the epoch (dropout active).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Best parameters of the winning restart and its history.
#[derive(Debug, Clone)]
pub struct FitOutcome<N> {
    pub net: N,
    pub history: Vec<EpochLoss>,
    pub best_epoch: usize,
    pub restart: usize,
    pub restart_seed: u64,
}

impl<N> FitOutcome<N> {
    pub fn best_val_loss(&self) -> f64 {
        self.history[self.best_epoch].val_loss
    }
}

/// Seed of restart `index`, a SplitMix64 step away from the base seed.
pub fn derive_restart_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Minibatch Adam with best-validation checkpointing, repeated over
/// `settings.restarts` initializations; the restart with the lowest best
/// validation loss wins (earliest on ties).
///
/// Restarts run in parallel but each is a sequential, seeded computation, so
/// the result does not depend on scheduling. With an empty validation set the
/// training loss drives model selection.
pub fn fit<N, S, F>(
    init: F,
    train: &[S],
    validation: &[S],
    settings: &TrainSettings,
) -> Result<FitOutcome<N>, NetError>
where
    N: Network,
    S: Sample + Sync,
    F: Fn(u64) -> N + Sync,
{
    if train.is_empty() {
        return Err(NetError::EmptyTrainingSet);
    }
    if settings.batch_size == 0 || settings.max_epochs == 0 || settings.restarts == 0 {
        return Err(NetError::InvalidConfig(
            "batch size, epochs and restarts must be positive".into(),
        ));
    }
    let runs: Vec<Result<FitOutcome<N>, NetError>> = (0..settings.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = derive_restart_seed(settings.seed, r);
            fit_once(init(seed), seed, train, validation, settings).map(|mut o| {
                o.restart = r;
                o.restart_seed = seed;
                o
            })
        })
        .collect();
    let mut best: Option<FitOutcome<N>> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(o) => {
                if best
                    .as_ref()
                    .is_none_or(|b| o.best_val_loss() < b.best_val_loss())
                {
                    best = Some(o);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one restart ran"))
}

fn mean_loss<N: Network, S: Sample>(net: &N, samples: &[S], loss: Loss) -> Result<f64, NetError> {
    let mut total = 0.0;
    for s in samples {
        total += loss.eval(s.target(), net.predict(s.inputs())?)?.0;
    }
    Ok(total / samples.len() as f64)
}

fn fit_once<N: Network, S: Sample>(
    mut net: N,
    seed: u64,
    train: &[S],
    validation: &[S],
    settings: &TrainSettings,
) -> Result<FitOutcome<N>, NetError> {
    let n_params = net.params().len();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_restart_seed(seed, 0));
    let mut adam = AdamState::new(n_params);
    let mut grad = vec![0.0; n_params];
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::new();
    let mut best = (f64::INFINITY, 0usize, net.clone());

    for epoch in 0..settings.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(settings.batch_size) {
            grad.fill(0.0);
            for &k in batch {
                let s = &train[k];
                epoch_loss +=
                    net.sample_gradient(s.inputs(), s.target(), settings.loss, Some(&mut rng), &mut grad)?;
            }
            let scale = 1.0 / batch.len() as f64;
            for g in &mut grad {
                *g *= scale;
            }
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(NetError::Diverged { epoch });
            }
            adam.step(net.params_mut(), &grad, settings.learning_rate);
        }
        let train_loss = epoch_loss / train.len() as f64;
        let val_loss = if validation.is_empty() {
            mean_loss(&net, train, settings.loss)?
        } else {
            mean_loss(&net, validation, settings.loss)?
        };
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(NetError::Diverged { epoch });
        }
        history.push(EpochLoss {
            epoch,
            train_loss,
            val_loss,
        });
        if val_loss < best.0 {
            best = (val_loss, epoch, net.clone());
        } else if settings.patience.is_some_and(|p| epoch - best.1 >= p) {
            break;
        }
    }
    Ok(FitOutcome {
        net: best.2,
        history,
        best_epoch: best.1,
        restart: 0,
        restart_seed: seed,
    })
}
