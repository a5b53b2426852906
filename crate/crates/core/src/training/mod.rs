//! Policy-gradient training: REINFORCE with a baseline, the learning-rate
//! schedule, checkpointing, and the sparsity-routed model bank.
//!
//! Trajectories within a batch are decoded in parallel, each on its own
//! tape with its own derived RNG stream; gradient accumulation and the
//! optimizer step stay sequential, so runs are bit-identical for a given
//! seed regardless of thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gpn::GraphEmbedConfig;
use crate::instance::{
    generate_qap, generate_tsp_matrix, GeneratorConfig, QapInstance, TspInstance,
};
use crate::solver::{
    solve_matrix_tsp_traced, solve_qap_traced, DecodeMode, MatrixTspGpn, Solution, TwoStageGpn,
};
use crate::tensor::{ops, AdamState, NodeId, Tape, Tensor};

mod bank;
mod checkpoint;

pub use bank::{route, train_bank, ModelBank};
pub use checkpoint::{load_checkpoint, save_checkpoint, TrainedModel};

/// Which model family a training run produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    MatrixTsp,
    TwoStageQap,
}

/// Baseline used by the advantage estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineMode {
    /// Exponential moving average of the mean batch reward (default).
    Ema,
    /// Greedy decode of the current model on the same instance.
    SelfCritic,
    /// No baseline; kept for variance diagnostics.
    Zero,
}

/// Running baseline state. The EMA follows `b <- beta b + (1 - beta) r`
/// and is seeded with the first batch's mean reward.
#[derive(Clone, Debug)]
pub struct BaselineState {
    pub mode: BaselineMode,
    pub beta: f64,
    value: Option<f64>,
}

impl BaselineState {
    pub fn new(mode: BaselineMode, beta: f64) -> Self {
        BaselineState {
            mode,
            beta,
            value: None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.value
    }

    fn update(&mut self, mean_reward: f64) {
        if self.mode == BaselineMode::Ema {
            self.value = Some(match self.value {
                None => mean_reward,
                Some(v) => self.beta * v + (1.0 - self.beta) * mean_reward,
            });
        }
    }
}

/// Hyperparameters. Defaults mirror the reference setup: 10 epochs of 2500
/// steps with batches of 150, Adam at 1e-3 decayed by 0.96 per epoch, and
/// training sizes 50 (TSP) / 49 (QAP).
#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub steps_per_epoch: usize,
    pub lr: f64,
    pub lr_decay: f64,
    pub train_n: usize,
    pub seed: u64,
    pub baseline: BaselineMode,
    pub ema_beta: f64,
    /// Sparsity of instances generated for this run.
    pub zero_prob: f64,
    /// Sparsity used for the sparse member of a model bank.
    pub sparse_zero_prob: f64,
    pub hidden_dim: usize,
    pub layers: usize,
    /// Train the with-LSTM ablation arm (matrix TSP only).
    pub lstm: bool,
}

impl TrainConfig {
    pub fn default_for(kind: ModelKind) -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 150,
            steps_per_epoch: 2500,
            lr: 1e-3,
            lr_decay: 0.96,
            train_n: match kind {
                ModelKind::MatrixTsp => 50,
                ModelKind::TwoStageQap => 49,
            },
            seed: 0,
            baseline: BaselineMode::Ema,
            ema_beta: 0.9,
            zero_prob: 0.0,
            sparse_zero_prob: 0.7,
            hidden_dim: 128,
            layers: 3,
            lstm: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.steps_per_epoch == 0 {
            return Err(Error::DimensionMismatch(
                "batch_size and steps_per_epoch must be positive".into(),
            ));
        }
        if self.train_n < 2 {
            return Err(Error::DimensionMismatch(format!(
                "train_n must be >= 2, got {}",
                self.train_n
            )));
        }
        let lr_ok = self.lr > 0.0 && self.lr.is_finite();
        let decay_ok = self.lr_decay > 0.0 && self.lr_decay <= 1.0;
        if !lr_ok || !decay_ok {
            return Err(Error::MalformedNumber(format!(
                "lr {} / lr_decay {} out of range",
                self.lr, self.lr_decay
            )));
        }
        if !(0.0..1.0).contains(&self.zero_prob) || !(0.0..1.0).contains(&self.sparse_zero_prob) {
            return Err(Error::MalformedNumber(
                "zero probabilities must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn embed_config(&self) -> GraphEmbedConfig {
        GraphEmbedConfig {
            layers: self.layers,
            input_dim: 1,
            hidden_dim: self.hidden_dim,
            gamma_init: 0.5,
        }
    }
}

/// Per-step training diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct StepStats {
    pub mean_cost: f64,
    pub mean_advantage: f64,
    pub grad_norm: f64,
}

/// One row of the training curve.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub step: usize,
    pub epoch: usize,
    pub mean_cost: f64,
    pub mean_advantage: f64,
    pub grad_norm: f64,
    pub lr: f64,
}

const TAG_INIT: u64 = 1;
const TAG_INSTANCE: u64 = 2;
const TAG_SAMPLE: u64 = 3;
const TAG_SPARSE_RUN: u64 = 4;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from the master seed and a purpose
/// tag, so instance generation, action sampling, and initialization never
/// share randomness.
pub(crate) fn split_seed(master: u64, words: &[u64]) -> u64 {
    let mut h = mix(master ^ 0x9e37_79b9_7f4a_7c15);
    for &w in words {
        h = mix(h ^ w.wrapping_mul(0xff51_afd7_ed55_8ccd));
    }
    h
}

/// A policy whose trajectories can be decoded on a tape and whose
/// parameters can be updated in place.
pub trait PolicyModel: Clone + Send + Sync + Sized {
    type Instance: Send + Sync;

    fn tracked(&self, tape: &mut Tape) -> Self;
    fn named_params(&self) -> Vec<(String, &Tensor)>;
    fn params_mut(&mut self) -> Vec<&mut Tensor>;
    fn decode_traced<R: Rng>(
        &self,
        tape: &mut Tape,
        instance: &Self::Instance,
        mode: DecodeMode,
        rng: &mut R,
    ) -> Result<(Solution, Tensor)>;
}

impl PolicyModel for MatrixTspGpn {
    type Instance = TspInstance;

    fn tracked(&self, tape: &mut Tape) -> Self {
        MatrixTspGpn::tracked(self, tape)
    }

    fn named_params(&self) -> Vec<(String, &Tensor)> {
        self.params()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        MatrixTspGpn::params_mut(self)
    }

    fn decode_traced<R: Rng>(
        &self,
        tape: &mut Tape,
        instance: &TspInstance,
        mode: DecodeMode,
        rng: &mut R,
    ) -> Result<(Solution, Tensor)> {
        solve_matrix_tsp_traced(self, tape, instance, mode, rng)
    }
}

impl PolicyModel for TwoStageGpn {
    type Instance = QapInstance;

    fn tracked(&self, tape: &mut Tape) -> Self {
        TwoStageGpn::tracked(self, tape)
    }

    fn named_params(&self) -> Vec<(String, &Tensor)> {
        self.params()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        TwoStageGpn::params_mut(self)
    }

    fn decode_traced<R: Rng>(
        &self,
        tape: &mut Tape,
        instance: &QapInstance,
        mode: DecodeMode,
        rng: &mut R,
    ) -> Result<(Solution, Tensor)> {
        solve_qap_traced(self, tape, instance, mode, rng)
    }
}

struct Trajectory {
    cost: f64,
    tape: Tape,
    log_prob: Tensor,
    param_nodes: Vec<NodeId>,
    greedy_cost: Option<f64>,
}

/// One REINFORCE update: sample a trajectory per instance, form advantages
/// against the baseline, take the policy-gradient step, then update the
/// baseline. The reward is the negative objective; the advantage is treated
/// as a constant with respect to the parameters.
pub fn reinforce_step<M: PolicyModel>(
    model: &mut M,
    batch: &[M::Instance],
    baseline: &mut BaselineState,
    opt: &mut AdamState,
    step_seed: u64,
) -> Result<StepStats> {
    if batch.is_empty() {
        return Err(Error::DimensionMismatch("empty training batch".into()));
    }
    let b = batch.len() as f64;
    let need_greedy = baseline.mode == BaselineMode::SelfCritic;

    let shared: &M = model;
    let mut trajectories: Vec<Trajectory> = batch
        .par_iter()
        .enumerate()
        .map(|(i, instance)| -> Result<Trajectory> {
            let mut tape = Tape::new();
            let tracked = shared.tracked(&mut tape);
            let param_nodes = tracked
                .named_params()
                .iter()
                .map(|(_, t)| t.node_id().expect("tracked parameter"))
                .collect();
            let mut rng =
                ChaCha8Rng::seed_from_u64(split_seed(step_seed, &[TAG_SAMPLE, i as u64]));
            let (solution, log_prob) =
                tracked.decode_traced(&mut tape, instance, DecodeMode::Sample, &mut rng)?;
            let greedy_cost = if need_greedy {
                let mut scratch = Tape::new();
                let (greedy, _) =
                    shared.decode_traced(&mut scratch, instance, DecodeMode::Greedy, &mut rng)?;
                Some(greedy.cost)
            } else {
                None
            };
            Ok(Trajectory {
                cost: solution.cost,
                tape,
                log_prob,
                param_nodes,
                greedy_cost,
            })
        })
        .collect::<Result<_>>()?;

    let rewards: Vec<f64> = trajectories.iter().map(|t| -t.cost).collect();
    let mean_reward = rewards.iter().sum::<f64>() / b;
    let advantages: Vec<f64> = match baseline.mode {
        BaselineMode::Ema => {
            let base = baseline.value.unwrap_or(mean_reward);
            rewards.iter().map(|r| r - base).collect()
        }
        BaselineMode::SelfCritic => trajectories
            .iter()
            .map(|t| -t.cost + t.greedy_cost.expect("greedy baseline decoded"))
            .collect(),
        BaselineMode::Zero => rewards.clone(),
    };

    // Per-trajectory loss -(advantage / B) * log_prob; backward runs in
    // parallel, the sums below stay in batch order.
    let per_instance: Vec<Vec<Option<Tensor>>> = trajectories
        .par_iter_mut()
        .zip(advantages.par_iter())
        .map(|(traj, &adv)| -> Result<Vec<Option<Tensor>>> {
            let loss = ops::scale(&mut traj.tape, &traj.log_prob, -(adv / b))?;
            let grads = traj.tape.backward(&loss)?;
            Ok(traj
                .param_nodes
                .iter()
                .map(|&id| grads.get(id).cloned())
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut params = model.params_mut();
    let mut total: Vec<Tensor> = params
        .iter()
        .map(|p| Tensor::zeros(p.rows(), p.cols()))
        .collect();
    for grads in &per_instance {
        for (slot, g) in total.iter_mut().zip(grads) {
            if let Some(g) = g {
                for (s, v) in slot.data.iter_mut().zip(g.data()) {
                    *s += v;
                }
            }
        }
    }
    for g in &total {
        if !g.all_finite() {
            return Err(Error::NonFiniteValue("reinforce gradient"));
        }
    }
    let grad_norm = total
        .iter()
        .flat_map(|g| g.data())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();

    opt.step(&mut params, &total)?;
    baseline.update(mean_reward);

    Ok(StepStats {
        mean_cost: -mean_reward,
        mean_advantage: advantages.iter().sum::<f64>() / b,
        grad_norm,
    })
}

fn train_loop<M: PolicyModel>(
    mut model: M,
    cfg: &TrainConfig,
    make_instance: impl Fn(u64) -> Result<M::Instance>,
) -> Result<(M, Vec<CurvePoint>)> {
    let mut opt = {
        let named = model.named_params();
        let refs: Vec<&Tensor> = named.iter().map(|(_, t)| *t).collect();
        AdamState::new(&refs, cfg.lr)
    };
    let mut baseline = BaselineState::new(cfg.baseline, cfg.ema_beta);
    let mut curve = Vec::with_capacity(cfg.epochs * cfg.steps_per_epoch);
    let mut global_step = 0usize;
    for epoch in 0..cfg.epochs {
        for _ in 0..cfg.steps_per_epoch {
            let batch: Vec<M::Instance> = (0..cfg.batch_size)
                .map(|i| {
                    make_instance(split_seed(
                        cfg.seed,
                        &[TAG_INSTANCE, global_step as u64, i as u64],
                    ))
                })
                .collect::<Result<_>>()?;
            let step_seed = split_seed(cfg.seed, &[TAG_SAMPLE, global_step as u64]);
            let stats = reinforce_step(&mut model, &batch, &mut baseline, &mut opt, step_seed)?;
            curve.push(CurvePoint {
                step: global_step,
                epoch,
                mean_cost: stats.mean_cost,
                mean_advantage: stats.mean_advantage,
                grad_norm: stats.grad_norm,
                lr: opt.lr(),
            });
            global_step += 1;
        }
        opt.decay_lr(cfg.lr_decay);
    }
    Ok((model, curve))
}

/// Trains a matrix-TSP pointer network on freshly generated instances.
pub fn train_matrix_tsp(cfg: &TrainConfig) -> Result<(MatrixTspGpn, Vec<CurvePoint>)> {
    cfg.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(split_seed(cfg.seed, &[TAG_INIT]));
    let embed = cfg.embed_config();
    let model = if cfg.lstm {
        MatrixTspGpn::with_lstm(&embed, &mut init_rng)?
    } else {
        MatrixTspGpn::new(&embed, &mut init_rng)?
    };
    let n = cfg.train_n;
    let zero_prob = cfg.zero_prob;
    train_loop(model, cfg, move |seed| {
        generate_tsp_matrix(&GeneratorConfig::new(n, seed).with_zero_prob(zero_prob))
    })
}

/// Trains a two-stage QAP network on freshly generated instances.
pub fn train_two_stage(cfg: &TrainConfig) -> Result<(TwoStageGpn, Vec<CurvePoint>)> {
    cfg.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(split_seed(cfg.seed, &[TAG_INIT]));
    let model = TwoStageGpn::new(&cfg.embed_config(), &mut init_rng)?;
    let n = cfg.train_n;
    let zero_prob = cfg.zero_prob;
    train_loop(model, cfg, move |seed| {
        generate_qap(&GeneratorConfig::new(n, seed).with_zero_prob(zero_prob))
    })
}

/// Untrained model with the initialization a training run would start from.
pub fn init_two_stage(cfg: &TrainConfig) -> Result<TwoStageGpn> {
    cfg.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(split_seed(cfg.seed, &[TAG_INIT]));
    TwoStageGpn::new(&cfg.embed_config(), &mut init_rng)
}

/// Untrained matrix-TSP model for the same seed a training run would use.
pub fn init_matrix_tsp(cfg: &TrainConfig) -> Result<MatrixTspGpn> {
    cfg.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(split_seed(cfg.seed, &[TAG_INIT]));
    if cfg.lstm {
        MatrixTspGpn::with_lstm(&cfg.embed_config(), &mut init_rng)
    } else {
        MatrixTspGpn::new(&cfg.embed_config(), &mut init_rng)
    }
}

pub(crate) fn sparse_run_seed(master: u64) -> u64 {
    split_seed(master, &[TAG_SPARSE_RUN])
}

/// Loss-free float formatting for CSV output (17 significant digits).
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the training curve as CSV.
pub fn write_curve_csv(path: impl AsRef<std::path::Path>, curve: &[CurvePoint]) -> Result<()> {
    let mut out = String::from("step,epoch,mean_cost,mean_advantage,grad_norm,lr\n");
    for p in curve {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.step,
            p.epoch,
            csv_float(p.mean_cost),
            csv_float(p.mean_advantage),
            csv_float(p.grad_norm),
            csv_float(p.lr),
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}
