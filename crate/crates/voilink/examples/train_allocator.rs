//! Training the code-length allocator with PPO on a small deterministic
//! world, then comparing the learned policy against every fixed policy.
//!
//! Run with: `cargo run --release --example train_allocator`

use voilink::codec::{ParametricRd, SurrogateKind, SurrogateRdModel};
use voilink::engine::{
    evaluate, train, CodecConfig, DatasetConfig, Horizon, SimConfig, TrainOptions,
};
use voilink::policy::{ActionSpace, FixedPolicy, PpoConfig};

fn main() {
    // A two-action world: a fast low-quality code against a slow
    // high-quality one, on a fixed 7 dB link with an exact surrogate
    // codec, so the optimum is enumerable.
    let cfg = SimConfig {
        horizon: Horizon::Time { seconds: 60.0 },
        gamma: voilink::channel::GammaSchedule::Fixed { db: 7.0 },
        d_min_db: 20.0,
        lambda: 0.0,
        codec: CodecConfig::Surrogate {
            model: SurrogateRdModel {
                kind: SurrogateKind::Parametric(ParametricRd::default()),
                jitter_db: 0.0,
                jitter_seed: 0,
            },
        },
        actions: ActionSpace::new(vec![2.0 / 48.0, 8.0 / 48.0]).unwrap(),
        profile_trials: 1,
        dataset: DatasetConfig {
            count: 4,
            ..DatasetConfig::default()
        },
        seed: 11,
        ..SimConfig::default()
    };

    let ppo = PpoConfig {
        learning_rate: 1e-3,
        rollout_capacity: 2048,
        ..PpoConfig::default()
    };
    let opts = TrainOptions {
        total_steps: 16_384,
        episode_decisions: 128,
        dual_ascent_rate: None,
    };
    let mut result = train(&cfg, &ppo, &opts).unwrap();

    println!("update  steps   mean reward   mean PSNR   entropy");
    for c in &result.curves {
        println!(
            "{:>6} {:>6} {:>13.4} {:>11.2} {:>9.4}",
            c.update, c.env_steps, c.mean_reward, c.mean_psnr_db, c.entropy
        );
    }

    let eval_seed = 0xBEEF;
    let learned = evaluate(&cfg, &mut result.agent, 3, eval_seed).unwrap();
    println!(
        "\nlearned:  reward {:.4}, PSNR {:.2} dB, picks per action {:?}",
        learned.mean_reward, learned.avg_psnr_db, learned.action_histogram
    );
    for action in 0..cfg.actions.len() {
        let mut fixed = FixedPolicy::new(action, &cfg.actions).unwrap();
        let summary = evaluate(&cfg, &mut fixed, 3, eval_seed).unwrap();
        println!(
            "fixed-{action}:  reward {:.4}, PSNR {:.2} dB",
            summary.mean_reward, summary.avg_psnr_db
        );
    }
}
