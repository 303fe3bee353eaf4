//! Clipped-surrogate policy optimization over the scheduling environment.
//!
//! Two separate networks (categorical policy over sense/communicate and a
//! scalar value baseline), generalized advantage estimation, and Adam
//! updates over shuffled minibatches. Masked actions get a large negative
//! logit before the softmax, so they carry zero probability and zero
//! gradient.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::mlp::{Adam, ForwardCache, Mlp, MlpGrads};
use crate::config::{BaselineConfig, EvalConfig, ScenarioConfig, TrainingConfig};
use crate::env::{Action, ActionMask, Env, EpisodeLog, Observation};
use crate::error::{Error, Result};
use crate::scenario::gen_eve_random;
use crate::seeding::{derive_seed, stream};

pub const OBS_DIM: usize = Observation::DIM;
pub const ACTION_DIM: usize = 2;

/// Logit offset that zeroes a masked action's probability.
const MASK_LOGIT: f64 = -1e9;

/// Running mean/variance (Welford) for optional observation whitening.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunningNorm {
    pub count: f64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl RunningNorm {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn update(&mut self, x: &[f64]) {
        self.count += 1.0;
        for i in 0..x.len() {
            let d = x[i] - self.mean[i];
            self.mean[i] += d / self.count;
            self.m2[i] += d * (x[i] - self.mean[i]);
        }
    }

    pub fn apply(&self, x: &mut [f64]) {
        if self.count < 2.0 {
            return;
        }
        for i in 0..x.len() {
            let var = self.m2[i] / (self.count - 1.0);
            x[i] = (x[i] - self.mean[i]) / (var + 1e-8).sqrt();
        }
    }
}

/// Policy and value networks plus optional observation normalizer.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolicyParams {
    pub policy: Mlp,
    pub value: Mlp,
    pub obs_norm: Option<RunningNorm>,
}

impl PolicyParams {
    pub fn new(hidden: &[usize], normalize_obs: bool, seed: u64) -> Self {
        let mut dims = vec![OBS_DIM];
        dims.extend_from_slice(hidden);
        let mut policy_dims = dims.clone();
        policy_dims.push(ACTION_DIM);
        let mut value_dims = dims;
        value_dims.push(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Small output scale keeps the initial policy near-uniform.
        let policy = Mlp::new(&policy_dims, 0.01, &mut rng);
        let value = Mlp::new(&value_dims, 1.0, &mut rng);
        PolicyParams {
            policy,
            value,
            obs_norm: normalize_obs.then(|| RunningNorm::new(OBS_DIM)),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.policy.all_finite() && self.value.all_finite()
    }

    fn network_input(&self, obs: &Observation) -> [f64; OBS_DIM] {
        let mut x = obs.to_array();
        if let Some(norm) = &self.obs_norm {
            norm.apply(&mut x);
        }
        x
    }
}

/// Masked log-softmax: returns per-action (log-probability, probability);
/// masked entries carry probability exactly zero.
fn masked_log_softmax(logits: [f64; ACTION_DIM], mask: [bool; ACTION_DIM]) -> ([f64; ACTION_DIM], [f64; ACTION_DIM]) {
    let mut z = logits;
    for i in 0..ACTION_DIM {
        if !mask[i] {
            z[i] += MASK_LOGIT;
        }
    }
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut exp = [0.0; ACTION_DIM];
    let mut sum = 0.0;
    for i in 0..ACTION_DIM {
        exp[i] = (z[i] - max).exp();
        sum += exp[i];
    }
    let log_sum = sum.ln();
    let mut logp = [0.0; ACTION_DIM];
    let mut p = [0.0; ACTION_DIM];
    for i in 0..ACTION_DIM {
        logp[i] = z[i] - max - log_sum;
        p[i] = exp[i] / sum;
    }
    (logp, p)
}

/// Samples an action from the masked policy; returns the action, its
/// log-probability, and the value estimate.
pub fn act(
    params: &PolicyParams,
    obs: &Observation,
    mask: ActionMask,
    rng: &mut ChaCha8Rng,
) -> Result<(Action, f64, f64)> {
    let mask = mask.as_array();
    if !mask.iter().any(|&m| m) {
        return Err(Error::Domain("all actions are masked".into()));
    }
    let x = params.network_input(obs);
    let out = params.policy.forward(&x);
    let (logp, p) = masked_log_softmax([out[0], out[1]], mask);
    let value = params.value.forward(&x)[0];
    let draw: f64 = rng.random();
    let mut cum = 0.0;
    let mut chosen = None;
    for i in 0..ACTION_DIM {
        if !mask[i] {
            continue;
        }
        cum += p[i];
        if draw < cum {
            chosen = Some(i);
            break;
        }
    }
    // Floating-point shortfall: fall back to the last permitted action.
    let idx = chosen.unwrap_or_else(|| (0..ACTION_DIM).rev().find(|&i| mask[i]).unwrap());
    Ok((Action::from_index(idx), logp[idx], value))
}

/// Mode action under the masked policy (evaluation).
pub fn act_greedy(params: &PolicyParams, obs: &Observation, mask: ActionMask) -> Action {
    let mask = mask.as_array();
    let x = params.network_input(obs);
    let out = params.policy.forward(&x);
    let (_, p) = masked_log_softmax([out[0], out[1]], mask);
    let mut best = 0;
    let mut best_p = -1.0;
    for i in 0..ACTION_DIM {
        if mask[i] && p[i] > best_p {
            best_p = p[i];
            best = i;
        }
    }
    Action::from_index(best)
}

/// Per-step rollout storage.
#[derive(Clone, Debug, Default)]
pub struct RolloutBatch {
    pub obs: Vec<[f64; OBS_DIM]>,
    pub masks: Vec<[bool; ACTION_DIM]>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        obs: [f64; OBS_DIM],
        mask: [bool; ACTION_DIM],
        action: usize,
        log_prob: f64,
        reward: f64,
        value: f64,
        done: bool,
    ) {
        self.obs.push(obs);
        self.masks.push(mask);
        self.actions.push(action);
        self.log_probs.push(log_prob);
        self.rewards.push(reward);
        self.values.push(value);
        self.dones.push(done);
    }
}

/// Generalized advantage estimation over the batch; `last_value` bootstraps
/// past the final transition when it is not terminal.
pub fn gae(batch: &mut RolloutBatch, gamma: f64, lambda: f64, last_value: f64) {
    let n = batch.len();
    batch.advantages = vec![0.0; n];
    batch.returns = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let not_done = if batch.dones[t] { 0.0 } else { 1.0 };
        let next_value = if t + 1 < n { batch.values[t + 1] } else { last_value };
        let delta = batch.rewards[t] + gamma * next_value * not_done - batch.values[t];
        acc = delta + gamma * lambda * not_done * acc;
        batch.advantages[t] = acc;
        batch.returns[t] = acc + batch.values[t];
    }
}

/// In-place whitening of the advantages (batch mean 0, stddev 1).
pub fn normalize_advantages(batch: &mut RolloutBatch) {
    let n = batch.advantages.len();
    if n < 2 {
        return;
    }
    let mean = batch.advantages.iter().sum::<f64>() / n as f64;
    let var = batch
        .advantages
        .iter()
        .map(|a| (a - mean) * (a - mean))
        .sum::<f64>()
        / n as f64;
    let std = var.sqrt().max(1e-8);
    for a in &mut batch.advantages {
        *a = (*a - mean) / std;
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LossBreakdown {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
}

/// Full PPO objective (clipped surrogate + value error - entropy bonus)
/// and its analytic gradient over the indexed subset of the batch.
/// Gradients are accumulated into the provided buffers.
pub fn loss_and_grads(
    params: &PolicyParams,
    batch: &RolloutBatch,
    indices: &[usize],
    clip: f64,
    value_coeff: f64,
    entropy_coeff: f64,
    policy_grads: &mut MlpGrads,
    value_grads: &mut MlpGrads,
) -> LossBreakdown {
    let b = indices.len() as f64;
    let mut loss = LossBreakdown::default();
    let mut cache = ForwardCache::default();
    let mut vcache = ForwardCache::default();
    for &i in indices {
        let mut x = batch.obs[i];
        if let Some(norm) = &params.obs_norm {
            norm.apply(&mut x);
        }
        let mask = batch.masks[i];
        let out = params.policy.forward_cached(&x, &mut cache);
        let (logp, p) = masked_log_softmax([out[0], out[1]], mask);
        let a = batch.actions[i];
        let adv = batch.advantages[i];

        // Clipped surrogate: L = -min(ratio * adv, clip(ratio) * adv).
        let ratio = (logp[a] - batch.log_probs[i]).exp();
        let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
        let surr_raw = ratio * adv;
        let surr_clip = clipped * adv;
        loss.policy += -surr_raw.min(surr_clip) / b;
        // Gradient flows only through the unclipped branch when selected.
        let d_logp_a = if surr_raw <= surr_clip { -adv * ratio / b } else { 0.0 };

        // Entropy over permitted actions.
        let mut entropy = 0.0;
        for k in 0..ACTION_DIM {
            if mask[k] && p[k] > 0.0 {
                entropy -= p[k] * logp[k];
            }
        }
        loss.entropy += entropy / b;

        // d(loss)/d(logit_j): surrogate term plus entropy bonus term.
        let mut grad_logits = [0.0; ACTION_DIM];
        for j in 0..ACTION_DIM {
            if !mask[j] {
                continue;
            }
            let indicator = if j == a { 1.0 } else { 0.0 };
            let surr_term = d_logp_a * (indicator - p[j]);
            let ent_term = entropy_coeff * p[j] * (logp[j] + entropy) / b;
            grad_logits[j] = surr_term + ent_term;
        }
        params.policy.backward(&cache, &grad_logits, policy_grads);

        // Value regression to the empirical return.
        let v = params.value.forward_cached(&x, &mut vcache)[0];
        let err = v - batch.returns[i];
        loss.value += value_coeff * err * err / b;
        params
            .value
            .backward(&vcache, &[2.0 * value_coeff * err / b], value_grads);
    }
    loss.total = loss.policy + loss.value - entropy_coeff * loss.entropy;
    loss
}

/// Optimizer state for both networks.
pub struct PpoOptimizer {
    pub policy: Adam,
    pub value: Adam,
}

impl PpoOptimizer {
    pub fn new(params: &PolicyParams) -> Self {
        Self {
            policy: Adam::new(&params.policy),
            value: Adam::new(&params.value),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct UpdateStats {
    pub minibatches: usize,
    pub mean_loss: f64,
    pub mean_entropy: f64,
}

/// Runs `epochs` passes of shuffled minibatch updates over the batch.
pub fn ppo_update(
    params: &mut PolicyParams,
    opt: &mut PpoOptimizer,
    batch: &RolloutBatch,
    train: &TrainingConfig,
    iteration: usize,
    rng: &mut ChaCha8Rng,
) -> Result<UpdateStats> {
    if batch.is_empty() {
        return Err(Error::Domain("empty rollout batch".into()));
    }
    let mut indices: Vec<usize> = (0..batch.len()).collect();
    let mut policy_grads = params.policy.zeros_like();
    let mut value_grads = params.value.zeros_like();
    let mut stats = UpdateStats::default();
    for _ in 0..train.epochs {
        shuffle(&mut indices, rng);
        for chunk in indices.chunks(train.minibatch) {
            policy_grads.zero();
            value_grads.zero();
            let loss = loss_and_grads(
                params,
                batch,
                chunk,
                train.clip,
                train.value_coeff,
                train.entropy_coeff,
                &mut policy_grads,
                &mut value_grads,
            );
            if !loss.total.is_finite() {
                return Err(Error::NonFiniteLoss {
                    iteration,
                    detail: format!(
                        "policy {} value {} entropy {}",
                        loss.policy, loss.value, loss.entropy
                    ),
                });
            }
            opt.policy.step(&mut params.policy, &policy_grads, train.learning_rate);
            opt.value.step(&mut params.value, &value_grads, train.learning_rate);
            stats.minibatches += 1;
            stats.mean_loss += loss.total;
            stats.mean_entropy += loss.entropy;
        }
    }
    if stats.minibatches > 0 {
        stats.mean_loss /= stats.minibatches as f64;
        stats.mean_entropy /= stats.minibatches as f64;
    }
    if !params.all_finite() {
        return Err(Error::NonFiniteLoss {
            iteration,
            detail: "non-finite parameter after update".into(),
        });
    }
    Ok(stats)
}

/// Fisher-Yates with our seeded generator (fixed traversal order).
fn shuffle(indices: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..indices.len()).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }
}

/// One row of the training curve.
#[derive(Clone, Copy, Debug)]
pub struct TrainPoint {
    pub iteration: usize,
    /// Mean per-slot reward over the iteration's episodes.
    pub mean_reward: f64,
    /// Mean per-episode average worst-case secrecy rate.
    pub mean_secrecy: f64,
    pub mean_user_rate: f64,
    /// Total SCR-gate violations across the iteration's episodes.
    pub scr_violations: usize,
}

pub struct TrainOutput {
    /// Best parameters by held-out evaluation reward.
    pub best: PolicyParams,
    pub r#final: PolicyParams,
    pub curve: Vec<TrainPoint>,
    pub best_eval_reward: f64,
}

/// Full training loop over freshly generated random tracks.
pub fn train<F>(
    scn: &ScenarioConfig,
    tr: &TrainingConfig,
    seed: u64,
    mut progress: F,
) -> Result<TrainOutput>
where
    F: FnMut(&TrainPoint),
{
    let mut params = PolicyParams::new(
        &tr.hidden_layers,
        tr.normalize_observations,
        derive_seed(seed, stream::POLICY_INIT, 0),
    );
    let mut opt = PpoOptimizer::new(&params);
    let mut sample_rng =
        ChaCha8Rng::seed_from_u64(derive_seed(seed, stream::TRAIN_SAMPLING, 0));
    let mut update_rng =
        ChaCha8Rng::seed_from_u64(derive_seed(seed, stream::UPDATE_SHUFFLE, 0));

    // Fixed held-out tracks for checkpoint selection.
    let eval_tracks: Vec<Arc<crate::scenario::EveTrack>> = (0..tr.eval_episodes)
        .map(|k| Arc::new(gen_eve_random(scn, derive_seed(seed, stream::EVAL_TRACKS, k as u64))))
        .collect();

    let mut best = params.clone();
    let mut best_eval = f64::NEG_INFINITY;
    let mut curve = Vec::with_capacity(tr.iterations);
    let mut episode_counter = 0u64;

    for iteration in 1..=tr.iterations {
        let mut batch = RolloutBatch::default();
        let mut reward_sum = 0.0;
        let mut secrecy_sum = 0.0;
        let mut user_rate_sum = 0.0;
        let mut violations = 0usize;
        for _ in 0..tr.episodes_per_iteration {
            let track_seed = derive_seed(seed, stream::TRAIN_TRACKS, episode_counter);
            episode_counter += 1;
            let track = Arc::new(gen_eve_random(scn, track_seed));
            let phase0 = if tr.randomize_abs_phase {
                sample_rng.random_range(0.0..2.0 * std::f64::consts::PI)
            } else {
                scn.abs_phase0
            };
            let mut env = Env::new(scn.clone(), track, phase0, track_seed)?;
            let mut obs = env.reset();
            let mut ep_secrecy = 0.0;
            let mut ep_user = 0.0;
            loop {
                if let Some(norm) = &mut params.obs_norm {
                    norm.update(&obs.to_array());
                }
                let mask = env.mask();
                let (action, log_prob, value) = act(&params, &obs, mask, &mut sample_rng)?;
                let (next, outcome) = env.step(action)?;
                batch.push(
                    obs.to_array(),
                    mask.as_array(),
                    action.index(),
                    log_prob,
                    outcome.reward,
                    value,
                    outcome.done,
                );
                reward_sum += outcome.reward;
                ep_secrecy += outcome.secrecy_rate;
                ep_user += outcome.user_rate;
                violations += usize::from(outcome.scr_penalty_fired);
                obs = next;
                if outcome.done {
                    break;
                }
            }
            secrecy_sum += ep_secrecy / scn.slots as f64;
            user_rate_sum += ep_user / scn.slots as f64;
        }
        gae(&mut batch, tr.gamma, tr.gae_lambda, 0.0);
        normalize_advantages(&mut batch);
        let annealed = annealed_config(tr, iteration);
        ppo_update(&mut params, &mut opt, &batch, &annealed, iteration, &mut update_rng)?;

        let episodes = tr.episodes_per_iteration as f64;
        let point = TrainPoint {
            iteration,
            mean_reward: reward_sum / batch.len() as f64,
            mean_secrecy: secrecy_sum / episodes,
            mean_user_rate: user_rate_sum / episodes,
            scr_violations: violations,
        };
        progress(&point);
        curve.push(point);

        if tr.eval_every > 0 && (iteration % tr.eval_every == 0 || iteration == tr.iterations) {
            let score = evaluate_mean_reward(scn, &params, &eval_tracks)?;
            if score > best_eval {
                best_eval = score;
                best = params.clone();
            }
        }
    }
    if best_eval == f64::NEG_INFINITY {
        best = params.clone();
    }
    Ok(TrainOutput {
        best,
        r#final: params,
        curve,
        best_eval_reward: best_eval,
    })
}

/// Learning rate and entropy bonus annealed linearly over the run.
fn annealed_config(tr: &TrainingConfig, iteration: usize) -> TrainingConfig {
    let mut out = tr.clone();
    if tr.iterations > 1 {
        let progress = (iteration - 1) as f64 / (tr.iterations - 1) as f64;
        out.learning_rate = tr.learning_rate * (1.0 - progress * (1.0 - tr.lr_final_frac));
        out.entropy_coeff = tr.entropy_coeff * (1.0 - progress * (1.0 - tr.entropy_final_frac));
    }
    out
}

/// Greedy-policy episode on one track.
pub fn run_greedy_episode(
    scn: &ScenarioConfig,
    params: &PolicyParams,
    track: Arc<crate::scenario::EveTrack>,
    phase0: f64,
) -> Result<EpisodeLog> {
    crate::env::run_episode(scn, track, phase0, 0, |obs, mask| {
        act_greedy(params, obs, mask)
    })
}

fn evaluate_mean_reward(
    scn: &ScenarioConfig,
    params: &PolicyParams,
    tracks: &[Arc<crate::scenario::EveTrack>],
) -> Result<f64> {
    let mut total = 0.0;
    for track in tracks {
        let log = run_greedy_episode(scn, params, track.clone(), scn.abs_phase0)?;
        total += log.mean_reward;
    }
    Ok(total / tracks.len() as f64)
}

/// Self-describing checkpoint: network shapes and weights plus the resolved
/// configuration they were trained under.
#[derive(Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub obs_dim: usize,
    pub action_dim: usize,
    pub config_hash: String,
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub training: TrainingConfig,
    pub baselines: BaselineConfig,
    pub evaluation: EvalConfig,
    pub params: PolicyParams,
}

pub const CHECKPOINT_VERSION: u32 = 1;

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)
            .map_err(|e| Error::Checkpoint(format!("serialize: {e}")))?;
        fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| Error::Checkpoint(format!("parse {}: {e}", path.display())))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {}",
                ckpt.version
            )));
        }
        if ckpt.obs_dim != OBS_DIM
            || ckpt.action_dim != ACTION_DIM
            || ckpt.params.policy.input_dim() != OBS_DIM
            || ckpt.params.policy.output_dim() != ACTION_DIM
            || ckpt.params.value.input_dim() != OBS_DIM
            || ckpt.params.value.output_dim() != 1
        {
            return Err(Error::Checkpoint(
                "checkpoint network shapes do not match this build".into(),
            ));
        }
        Ok(ckpt)
    }
}
