//! One full simulated episode: a camera samples every half second, a
//! threshold policy picks the cheapest code that clears the quality
//! floor, and the engine books every reception into a trace.
//!
//! Run with: `cargo run --example simulate_episode`

use voilink::engine::{run_episode, validate_trace, Horizon, SimConfig};
use voilink::policy::ThresholdPolicy;

fn main() {
    let cfg = SimConfig {
        horizon: Horizon::Time { seconds: 20.0 },
        seed: 5,
        ..SimConfig::default()
    };
    let mut policy = ThresholdPolicy {
        d_min_db: cfg.d_min_db,
    };
    let outcome = run_episode(&cfg, &mut policy, 1).unwrap();

    println!("decision   u[s]  start  recv   eta     aoi[s]  psnr[dB]   voi");
    for r in outcome.trace.iter().take(12) {
        println!(
            "{:>8} {:>6.2} {:>6.2} {:>6.2} {:>7.4} {:>7.3} {:>9.2} {:>7.4}",
            r.decision, r.generation_time, r.t_start, r.t_recv, r.eta, r.aoi, r.psnr_db, r.voi
        );
    }
    if outcome.trace.len() > 12 {
        println!("... ({} decisions total)", outcome.trace.len());
    }

    // Every trace satisfies its own bookkeeping identities.
    validate_trace(&outcome.trace, cfg.baud, &cfg.voi).unwrap();
    println!(
        "\ntime-averaged value over [0, {:.0}]: {:.5}",
        outcome.end_time, outcome.time_avg_voi
    );
    for w in &outcome.warnings {
        println!("note: {w}");
    }
}
