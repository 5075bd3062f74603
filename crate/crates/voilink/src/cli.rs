//! Command-line interface.
//!
//! Thin argument handling over the library: every subcommand loads one TOML
//! configuration (defaults when none is given), applies the `--seed`
//! override, runs a library driver, and writes its artifacts plus a
//! `manifest.json` into `--out-dir`.
//!
//! Exit codes: `0` success, `1` usage error (bad flags, unknown
//! subcommand), `2` runtime failure (unreadable config, invalid
//! parameters, diverged training, failed gradient check).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::Rng;

use crate::channel::GammaSchedule;
use crate::codec::{profile_image, SampleView};
use crate::config::AppConfig;
use crate::engine::{evaluate, run_episode, sweep_dmin, train};
use crate::error::{Error, Result};
use crate::manifest::RunManifest;
use crate::nn::{finite_diff_check, Head, Mlp, NegLogProbLoss, QuadraticLoss, ScalarLoss};
use crate::policy::{AllocationPolicy, FixedPolicy, PpoAgent, ThresholdPolicy};
use crate::seeds;
use crate::trace::{write_curve_csv, write_rd_csv, write_sweep_csv, write_trace_csv};

/// Gradient mismatch above this relative error fails `grad-check`.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(
    name = "voilink",
    version,
    about = "Simulate, train, and evaluate code-length allocation for timely image links"
)]
pub struct Cli {
    /// TOML configuration file (omit for built-in defaults).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Override the configuration's run seed.
    #[arg(long, global = true, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Directory artifacts are written into (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulated episode under a policy and write its trace.
    Simulate {
        /// Policy: `threshold`, `fixed:<index>`, or `learned:<dir>`.
        #[arg(long, default_value = "threshold")]
        policy: String,
    },
    /// Train the learned allocator; write checkpoints and a learning curve.
    Train,
    /// Evaluate a policy over a batch of episodes; write a JSON summary.
    Evaluate {
        /// Policy: `threshold`, `fixed:<index>`, or `learned:<dir>`.
        #[arg(long, default_value = "threshold")]
        policy: String,
    },
    /// Train and evaluate across the configured quality floors.
    Sweep,
    /// Tabulate the codec's rate-quality response over the action menu.
    RdProfile,
    /// Verify analytic network gradients against finite differences.
    GradCheck {
        /// Number of random network shapes to probe.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

/// Parse `args` and run. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests arrive as Err too, but exit clean.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn build_policy(spec: &str, cfg: &AppConfig) -> Result<Box<dyn AllocationPolicy>> {
    if spec == "threshold" {
        return Ok(Box::new(ThresholdPolicy {
            d_min_db: cfg.sim.d_min_db,
        }));
    }
    if let Some(index) = spec.strip_prefix("fixed:") {
        let index: usize = index.parse().map_err(|_| Error::Config {
            message: format!("'{spec}': expected fixed:<menu index>"),
        })?;
        return Ok(Box::new(FixedPolicy::new(index, &cfg.sim.actions)?));
    }
    if let Some(dir) = spec.strip_prefix("learned:") {
        let mut agent = PpoAgent::load(Path::new(dir))?;
        if agent.actions != cfg.sim.actions {
            return Err(Error::Config {
                message: format!(
                    "checkpoint action menu {:?} differs from the configured menu {:?}",
                    agent.actions.etas(),
                    cfg.sim.actions.etas()
                ),
            });
        }
        agent.prepare_for_evaluation();
        return Ok(Box::new(agent));
    }
    Err(Error::Config {
        message: format!("unknown policy '{spec}' (threshold | fixed:<i> | learned:<dir>)"),
    })
}

fn load_config(cli: &Cli) -> Result<(AppConfig, Vec<String>)> {
    let mut cfg = match &cli.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    let warnings = cfg.validate()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok((cfg, warnings))
}

fn execute(cli: Cli) -> Result<()> {
    let (cfg, warnings) = load_config(&cli)?;
    std::fs::create_dir_all(&cli.out_dir)
        .map_err(|e| Error::io(cli.out_dir.display().to_string(), e))?;
    let out = cli.out_dir.as_path();
    match &cli.command {
        Command::Simulate { policy } => cmd_simulate(out, cfg, warnings, policy),
        Command::Train => cmd_train(out, cfg, warnings),
        Command::Evaluate { policy } => cmd_evaluate(out, cfg, warnings, policy),
        Command::Sweep => cmd_sweep(out, cfg, warnings),
        Command::RdProfile => cmd_rd_profile(out, cfg, warnings),
        Command::GradCheck { trials } => cmd_grad_check(out, cfg, warnings, *trials),
    }
}

fn finish_manifest(
    out: &Path,
    mut manifest: RunManifest,
    artifacts: &[&str],
    extra_warnings: Vec<String>,
) -> Result<()> {
    manifest.artifacts = artifacts.iter().map(|s| s.to_string()).collect();
    manifest.warnings.extend(extra_warnings);
    manifest.save(&out.join("manifest.json"))
}

fn cmd_simulate(out: &Path, cfg: AppConfig, warnings: Vec<String>, policy: &str) -> Result<()> {
    let mut policy_impl = build_policy(policy, &cfg)?;
    let episode_seed = seeds::subseed(cfg.sim.seed, "simulate-episode", 0);
    let outcome = run_episode(&cfg.sim, policy_impl.as_mut(), episode_seed)?;
    write_trace_csv(&out.join("trace.csv"), &outcome.trace)?;

    let mut manifest = RunManifest::new("simulate", cfg.sim.seed, cfg);
    manifest.warnings = warnings;
    println!(
        "simulate[{}]: {} receptions over {:.1} s, time-averaged VoI {:.6}",
        policy_impl.label(),
        outcome.trace.len(),
        outcome.end_time,
        outcome.time_avg_voi
    );
    println!("wrote {}", out.join("trace.csv").display());
    finish_manifest(out, manifest, &["trace.csv"], outcome.warnings)
}

fn cmd_train(out: &Path, cfg: AppConfig, warnings: Vec<String>) -> Result<()> {
    let result = train(&cfg.sim, &cfg.ppo, &cfg.train)?;
    result.agent.save(out)?;
    write_curve_csv(&out.join("learning_curve.csv"), &result.curves)?;

    let mut manifest = RunManifest::new("train", cfg.sim.seed, cfg);
    manifest.warnings = warnings;
    println!(
        "train: {} env steps, {} updates, {} episodes, final lambda {:.4}",
        result.env_steps,
        result.curves.len(),
        result.episodes,
        result.final_lambda
    );
    if let Some(last) = result.curves.last() {
        println!(
            "final window: mean reward {:.4}, mean PSNR {:.2} dB, entropy {:.4}",
            last.mean_reward, last.mean_psnr_db, last.entropy
        );
    }
    println!("wrote checkpoints and learning_curve.csv to {}", out.display());
    finish_manifest(
        out,
        manifest,
        &["actor.ckpt", "critic.ckpt", "agent.json", "learning_curve.csv"],
        result.warnings,
    )
}

fn cmd_evaluate(out: &Path, cfg: AppConfig, warnings: Vec<String>, policy: &str) -> Result<()> {
    let mut policy_impl = build_policy(policy, &cfg)?;
    let summary = evaluate(
        &cfg.sim,
        policy_impl.as_mut(),
        cfg.eval.episodes,
        cfg.eval.seed,
    )?;
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    let path = out.join("evaluation.json");
    std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))?;

    let mut manifest = RunManifest::new("evaluate", cfg.sim.seed, cfg);
    manifest.warnings = warnings;
    println!(
        "evaluate[{}]: time-averaged VoI {:.6}, mean PSNR {:.2} dB ({} decisions, constraint {})",
        policy_impl.label(),
        summary.time_avg_voi,
        summary.avg_psnr_db,
        summary.decisions,
        if summary.constraint_satisfied { "met" } else { "violated" },
    );
    println!("wrote {}", path.display());
    let extra = summary.warnings.clone();
    finish_manifest(out, manifest, &["evaluation.json"], extra)
}

fn cmd_sweep(out: &Path, cfg: AppConfig, warnings: Vec<String>) -> Result<()> {
    let opts = cfg.sweep_options();
    let result = sweep_dmin(&cfg.sim, &cfg.ppo, &cfg.sweep.d_mins_db, &opts)?;
    write_sweep_csv(&out.join("sweep.csv"), &result.rows)?;
    let mut artifacts: Vec<String> = vec!["sweep.csv".to_string()];
    for (i, (_, trace)) in result.traces.iter().enumerate() {
        let name = format!("trace_dmin_{i}.csv");
        write_trace_csv(&out.join(&name), trace)?;
        artifacts.push(name);
    }

    let mut manifest = RunManifest::new("sweep", cfg.sim.seed, cfg);
    manifest.warnings = warnings;
    for row in result.rows.iter().filter(|r| r.policy == "learned") {
        println!(
            "sweep d_min {:.1} dB: learned VoI {:.6}, PSNR {:.2} dB, constraint {}",
            row.d_min_db,
            row.avg_voi,
            row.avg_psnr_db,
            if row.constraint_satisfied { "met" } else { "violated" },
        );
    }
    println!("wrote {} rows to {}", result.rows.len(), out.join("sweep.csv").display());
    let names: Vec<&str> = artifacts.iter().map(String::as_str).collect();
    finish_manifest(out, manifest, &names, Vec::new())
}

fn profile_gammas(schedule: &GammaSchedule) -> Vec<f64> {
    match *schedule {
        GammaSchedule::Fixed { db } => vec![db],
        GammaSchedule::RandomWalk { min_db, max_db, .. } => {
            if min_db == max_db {
                vec![min_db]
            } else {
                vec![min_db, 0.5 * (min_db + max_db), max_db]
            }
        }
    }
}

fn cmd_rd_profile(out: &Path, cfg: AppConfig, warnings: Vec<String>) -> Result<()> {
    let codec = cfg.sim.codec.build()?;
    let dataset = cfg.sim.build_dataset()?;
    let gammas = profile_gammas(&cfg.sim.gamma);
    let levels = cfg.sim.actions.etas();
    let mut rows = Vec::with_capacity(levels.len() * gammas.len());
    for (gi, &gamma_db) in gammas.iter().enumerate() {
        let mut level_sums = vec![0.0; levels.len()];
        for (ii, image) in dataset.iter().enumerate() {
            let mut rng = seeds::stream(
                cfg.sim.seed,
                "rd-profile",
                ((gi as u64) << 32) | ii as u64,
            );
            let view = SampleView::of_image(image, ii as u64);
            let profile = profile_image(
                &codec,
                &view,
                gamma_db,
                levels,
                cfg.sim.profile_trials,
                &mut rng,
            )?;
            for (sum, psnr) in level_sums.iter_mut().zip(&profile.psnr_db) {
                *sum += psnr;
            }
        }
        for (&eta, sum) in levels.iter().zip(&level_sums) {
            rows.push((eta, gamma_db, sum / dataset.len() as f64));
        }
    }
    write_rd_csv(&out.join("rd_profile.csv"), &rows)?;

    let mut manifest = RunManifest::new("rd-profile", cfg.sim.seed, cfg);
    manifest.warnings = warnings;
    println!(
        "rd-profile: {} (eta, gamma) points over {} images",
        rows.len(),
        dataset.len()
    );
    println!("wrote {}", out.join("rd_profile.csv").display());
    finish_manifest(out, manifest, &["rd_profile.csv"], Vec::new())
}

fn cmd_grad_check(out: &Path, cfg: AppConfig, warnings: Vec<String>, trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            value: 0.0,
            constraint: ">= 1",
        });
    }
    let mut rng = seeds::stream(cfg.sim.seed, "grad-check", 0);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let sizes = [
            rng.gen_range(2..=6),
            rng.gen_range(3..=16),
            rng.gen_range(3..=16),
            rng.gen_range(2..=6),
        ];
        let head = if t % 2 == 0 { Head::Softmax } else { Head::Linear };
        let mlp = Mlp::new(&sizes, head, &mut rng)?;
        let input: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let loss: Box<dyn ScalarLoss> = match head {
            Head::Softmax => Box::new(NegLogProbLoss {
                index: rng.gen_range(0..sizes[3]),
            }),
            Head::Linear => Box::new(QuadraticLoss {
                target: (0..sizes[3]).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            }),
        };
        worst = worst.max(finite_diff_check(&mlp, &input, loss.as_ref())?);
    }

    let report = serde_json::json!({
        "trials": trials,
        "worst_relative_error": worst,
        "tolerance": GRAD_CHECK_TOLERANCE,
        "pass": worst <= GRAD_CHECK_TOLERANCE,
    });
    let path = out.join("grad_check.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))?;

    let mut manifest = RunManifest::new("grad-check", cfg.sim.seed, cfg);
    manifest.warnings = warnings;
    finish_manifest(out, manifest, &["grad_check.json"], Vec::new())?;
    println!(
        "grad-check: {trials} networks, worst relative error {worst:.3e} (tolerance {GRAD_CHECK_TOLERANCE:.1e})"
    );
    if worst > GRAD_CHECK_TOLERANCE {
        return Err(Error::GradientCheck {
            worst,
            tolerance: GRAD_CHECK_TOLERANCE,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_config(dir: &Path) -> PathBuf {
        let path = dir.join("config.toml");
        std::fs::write(
            &path,
            r#"
[sim]
actions = [0.041666666666666664, 0.16666666666666666]
profile_trials = 1

[sim.horizon]
kind = "time"
seconds = 10.0

[sim.codec]
kind = "surrogate"

[sim.codec.model]
jitter_db = 0.0
jitter_seed = 0

[sim.codec.model.kind]
kind = "parametric"

[sim.dataset]
count = 3
height = 16
width = 16
channels = 1

[eval]
episodes = 2
"#,
        )
        .unwrap();
        path
    }

    fn run_args(args: &[&str]) -> i32 {
        run(args.iter().map(|s| s.to_string()))
    }

    #[test]
    fn no_arguments_is_a_usage_error() {
        assert_eq!(run_args(&["voilink"]), 1);
    }

    #[test]
    fn help_exits_clean() {
        assert_eq!(run_args(&["voilink", "--help"]), 0);
        assert_eq!(run_args(&["voilink", "simulate", "--help"]), 0);
    }

    #[test]
    fn unknown_flags_and_subcommands_are_usage_errors() {
        assert_eq!(run_args(&["voilink", "frobnicate"]), 1);
        assert_eq!(run_args(&["voilink", "simulate", "--bogus"]), 1);
    }

    #[test]
    fn missing_config_file_is_a_runtime_error() {
        assert_eq!(
            run_args(&["voilink", "simulate", "--config", "/nonexistent/x.toml"]),
            2
        );
    }

    #[test]
    fn simulate_writes_trace_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fast_config(dir.path());
        let out = dir.path().join("run");
        let code = run_args(&[
            "voilink",
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "11",
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(out.join("trace.csv").is_file());
        let manifest = RunManifest::load(&out.join("manifest.json")).unwrap();
        assert_eq!(manifest.command, "simulate");
        assert_eq!(manifest.seed, 11);
        assert_eq!(manifest.artifacts, vec!["trace.csv"]);
        let rows = crate::trace::read_trace_csv(&out.join("trace.csv")).unwrap();
        assert!(!rows.is_empty());
    }

    #[test]
    fn simulate_policies_parse_and_bad_ones_fail() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fast_config(dir.path());
        for (policy, expect) in [
            ("threshold", 0),
            ("fixed:1", 0),
            ("fixed:9", 2),
            ("fixed:x", 2),
            ("learned:/nonexistent", 2),
            ("mystery", 2),
        ] {
            let out = dir.path().join(format!("run-{}", policy.replace([':', '/'], "_")));
            let code = run_args(&[
                "voilink",
                "simulate",
                "--config",
                cfg.to_str().unwrap(),
                "--policy",
                policy,
                "--out-dir",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code, expect, "policy '{policy}'");
        }
    }

    #[test]
    fn evaluate_writes_summary_json() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fast_config(dir.path());
        let out = dir.path().join("eval");
        let code = run_args(&[
            "voilink",
            "evaluate",
            "--config",
            cfg.to_str().unwrap(),
            "--policy",
            "fixed:0",
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(out.join("evaluation.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["episodes"], 2);
        assert!(v["avg_psnr_db"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn rd_profile_writes_the_table() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fast_config(dir.path());
        let out = dir.path().join("rd");
        let code = run_args(&[
            "voilink",
            "rd-profile",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let rows = crate::trace::read_rd_csv(&out.join("rd_profile.csv")).unwrap();
        assert_eq!(rows.len(), 2, "two menu levels at one fixed SNR");
        assert!(rows[1].2 > rows[0].2, "longer code must profile better");
    }

    #[test]
    fn grad_check_passes_and_reports() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("gc");
        let code = run_args(&[
            "voilink",
            "grad-check",
            "--trials",
            "4",
            "--seed",
            "3",
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(out.join("grad_check.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["pass"], true);
        assert!(v["worst_relative_error"].as_f64().unwrap() < GRAD_CHECK_TOLERANCE);
    }

    #[test]
    fn simulate_is_reproducible_across_processes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fast_config(dir.path());
        let (out1, out2) = (dir.path().join("r1"), dir.path().join("r2"));
        for out in [&out1, &out2] {
            let code = run_args(&[
                "voilink",
                "simulate",
                "--config",
                cfg.to_str().unwrap(),
                "--seed",
                "99",
                "--out-dir",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
        }
        assert_eq!(
            std::fs::read(out1.join("trace.csv")).unwrap(),
            std::fs::read(out2.join("trace.csv")).unwrap(),
            "same config and seed must write identical traces"
        );
        let m1 = RunManifest::load(&out1.join("manifest.json")).unwrap();
        let m2 = RunManifest::load(&out2.join("manifest.json")).unwrap();
        assert!(m1.same_run(&m2).unwrap());
    }
}
