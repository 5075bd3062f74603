//! The central trade-off: raising the quality floor costs timeliness.
//! Trains one allocator per floor (with dual ascent adapting the
//! penalty weight) and tabulates it against the fixed baselines.
//!
//! Run with: `cargo run --release --example tradeoff_sweep`

use voilink::codec::{ParametricRd, SurrogateKind, SurrogateRdModel};
use voilink::engine::{
    sweep_dmin, CodecConfig, DatasetConfig, Horizon, SimConfig, SweepOptions, TrainOptions,
};
use voilink::policy::{ActionSpace, PpoConfig};

fn main() {
    let cfg = SimConfig {
        horizon: Horizon::Time { seconds: 60.0 },
        gamma: voilink::channel::GammaSchedule::Fixed { db: 7.0 },
        lambda: 0.05,
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
        seed: 7,
        ..SimConfig::default()
    };
    let ppo = PpoConfig {
        learning_rate: 1e-3,
        rollout_capacity: 2048,
        entropy_weight: 1e-3,
        discount: 0.95,
        ..PpoConfig::default()
    };
    let opts = SweepOptions {
        train: TrainOptions {
            total_steps: 16_384,
            episode_decisions: 64,
            dual_ascent_rate: Some(0.01),
        },
        eval_episodes: 3,
        include_baselines: true,
    };

    let result = sweep_dmin(&cfg, &ppo, &[21.0, 30.0], &opts).unwrap();
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>6}",
        "floor", "policy", "avg voi", "psnr [dB]", "ok"
    );
    for row in &result.rows {
        println!(
            "{:>6.1} {:>10} {:>10.4} {:>10.2} {:>6}",
            row.d_min_db,
            row.policy,
            row.avg_voi,
            row.avg_psnr_db,
            if row.constraint_satisfied { "yes" } else { "no" }
        );
    }
    println!(
        "\n(one example trace kept per floor: {} records at {:.0} dB, {} at {:.0} dB)",
        result.traces[0].1.len(),
        result.traces[0].0,
        result.traces[1].1.len(),
        result.traces[1].0
    );
}
