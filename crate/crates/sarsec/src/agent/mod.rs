//! From-scratch PPO: dense networks, masked categorical policy, GAE, and
//! clipped surrogate updates.

pub mod mlp;
pub mod ppo;

pub use mlp::{Activation, Adam, Mlp, MlpGrads};
pub use ppo::{
    act, act_greedy, gae, loss_and_grads, normalize_advantages, ppo_update, run_greedy_episode,
    train, Checkpoint, PolicyParams, PpoOptimizer, RolloutBatch, TrainOutput, TrainPoint,
    ACTION_DIM, CHECKPOINT_VERSION, OBS_DIM,
};
