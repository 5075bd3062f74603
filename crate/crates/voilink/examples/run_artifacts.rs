//! The on-disk artifacts a run leaves behind: a trace CSV that round-
//! trips at its stated precision, and a manifest that makes two runs
//! comparable while ignoring only the timestamp.
//!
//! Run with: `cargo run --example run_artifacts`

use voilink::config::AppConfig;
use voilink::engine::{run_episode, Horizon, SimConfig};
use voilink::manifest::RunManifest;
use voilink::policy::ThresholdPolicy;
use voilink::trace::{read_trace_csv, write_trace_csv};

fn main() {
    let dir = std::env::temp_dir().join("voilink-run-artifacts");
    std::fs::create_dir_all(&dir).unwrap();

    let cfg = SimConfig {
        horizon: Horizon::Time { seconds: 15.0 },
        seed: 3,
        ..SimConfig::default()
    };
    let mut policy = ThresholdPolicy {
        d_min_db: cfg.d_min_db,
    };
    let outcome = run_episode(&cfg, &mut policy, 1).unwrap();

    // Trace files store floats with 9 significant digits; reading one
    // back reproduces every field to that precision.
    let trace_path = dir.join("trace.csv");
    write_trace_csv(&trace_path, &outcome.trace).unwrap();
    let rows = read_trace_csv(&trace_path).unwrap();
    let worst = outcome
        .trace
        .iter()
        .zip(&rows)
        .map(|(a, b)| {
            let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(1e-30);
            rel(a.voi, b.voi).max(rel(a.t_recv, b.t_recv))
        })
        .fold(0.0, f64::max);
    println!(
        "wrote {} ({} records), round-trip relative error <= {worst:.2e}",
        trace_path.display(),
        rows.len()
    );

    // The manifest echoes the full configuration. Two manifests from
    // the same logical run differ only in their timestamps.
    let mut app = AppConfig::default();
    app.sim = cfg;
    let m1 = RunManifest::new("simulate", app.sim.seed, app.clone());
    let m2 = RunManifest::new("simulate", app.sim.seed, app);
    let manifest_path = dir.join("manifest.json");
    m1.save(&manifest_path).unwrap();
    let loaded = RunManifest::load(&manifest_path).unwrap();
    println!(
        "manifest saved; same_run(reloaded) = {}, same_run(fresh) = {}",
        m1.same_run(&loaded).unwrap(),
        m1.same_run(&m2).unwrap()
    );
}
