//! The two stochastic link processes the simulator can run: a bounded
//! random walk on the SNR and a two-state Markov availability gate.
//!
//! Run with: `cargo run --example link_dynamics`

use voilink::channel::{Availability, AvailabilityModel, GammaSchedule, tx_delay};
use voilink::seeds;

fn main() {
    // SNR drifts one step at a time and reflects off its bounds.
    let schedule = GammaSchedule::RandomWalk {
        min_db: 3.0,
        max_db: 9.0,
        step_db: 1.0,
    };
    schedule.validate().unwrap();
    let mut rng = seeds::stream(11, "walk-demo", 0);
    let mut db = schedule.initial_db();
    print!("SNR walk [dB]:");
    for _ in 0..16 {
        print!(" {db:.0}");
        db = schedule.advance(db, &mut rng);
    }
    println!();

    // The link toggles between idle and busy; transmissions may only
    // start while it is idle.
    let gate = AvailabilityModel {
        p_idle_to_busy: 0.3,
        p_busy_to_idle: 0.4,
    };
    gate.validate().unwrap();
    let mut rng = seeds::stream(11, "gate-demo", 0);
    let mut state = Availability::Idle;
    print!("availability:  ");
    for _ in 0..32 {
        print!(
            "{}",
            match state {
                Availability::Idle => '.',
                Availability::Busy => 'X',
            }
        );
        state = gate.step(state, &mut rng);
    }
    println!("  (. idle, X busy)");

    // And the deterministic part: time on the wire is just symbols over
    // symbol rate.
    println!("\nflight time of a 48x48x3 image at 1000 symbols/s:");
    for k in [1.0f64, 2.0, 4.0, 8.0] {
        let symbols = (k / 48.0 * 6912.0).round() as usize;
        println!(
            "  eta {:>6.4} -> {symbols:>5} symbols -> {:.3} s",
            k / 48.0,
            tx_delay(symbols, 1000.0).unwrap()
        );
    }
}
