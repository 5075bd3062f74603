//! How the value of a received image decays with its age, and how a
//! stream of receptions turns into one time-averaged score.
//!
//! Run with: `cargo run --example voi_basics`

use voilink::channel::db_to_linear;
use voilink::engine::VOI_INTEGRATION_RESOLUTION;
use voilink::metrics::{time_average_voi, voi, LogBase, Update, VoiParams};

fn main() {
    let params = VoiParams {
        rho: 0.1,
        log_base: LogBase::Natural,
    };

    // A fresher image is worth more; a stronger link makes every age
    // worth more. Both effects saturate.
    println!("value of one image by age and link SNR (nats):");
    println!("{:>8} {:>10} {:>10} {:>10}", "age [s]", "1 dB", "7 dB", "13 dB");
    for age in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let row: Vec<f64> = [1.0, 7.0, 13.0]
            .iter()
            .map(|&db| voi(db_to_linear(db), &params, age).unwrap())
            .collect();
        println!(
            "{age:>8.2} {:>10.5} {:>10.5} {:>10.5}",
            row[0], row[1], row[2]
        );
    }

    // A receiver that got updates at t = 1, 3, and 6 (each carrying an
    // image generated one second earlier) holds value that decays
    // between receptions and resets on each arrival.
    let updates = [
        Update {
            reception_time: 1.0,
            generation_time: 0.0,
        },
        Update {
            reception_time: 3.0,
            generation_time: 2.0,
        },
        Update {
            reception_time: 6.0,
            generation_time: 5.0,
        },
    ];
    let gamma = db_to_linear(7.0);
    let avg = time_average_voi(&updates, 10.0, gamma, &params, VOI_INTEGRATION_RESOLUTION).unwrap();
    println!("\nthree receptions over a 10 s window at 7 dB:");
    for u in &updates {
        let age = u.reception_time - u.generation_time;
        println!(
            "  t = {:.0} s: age {age:.0} s, instantaneous value {:.5}",
            u.reception_time,
            voi(gamma, &params, age).unwrap()
        );
    }
    println!("  time-averaged value over [0, 10]: {avg:.5}");
}
