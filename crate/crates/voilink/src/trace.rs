//! CSV artifacts: episode traces, sweep summaries, rate–distortion tables,
//! and learning curves.
//!
//! All files share one dialect — a fixed header line, comma separation, no
//! quoting (writers reject fields that would need it), LF line endings, and
//! floats rendered as `{:.8e}` scientific notation (nine significant
//! digits). The same bytes always come out of the same data, so
//! byte-comparing two files is a valid determinism check.

use std::fmt::Write as _;
use std::path::Path;

use crate::engine::{SweepRow, TraceRecord, TrainingPoint};
use crate::error::{Error, Result};

/// Column names of an episode trace. `u` is the generation time of the
/// transmitted sample and `K` the code length in channel symbols.
pub const TRACE_HEADER: &str =
    "decision,u,t_start,t_recv,eta,K,delay,aoi,voi,psnr,reward,lambda";

/// Column names of a sweep summary.
pub const SWEEP_HEADER: &str = "d_min,avg_voi,avg_psnr,policy";

/// Column names of a rate–distortion table.
pub const RD_HEADER: &str = "eta,gamma_db,psnr_db";

/// Column names of a learning curve.
pub const CURVE_HEADER: &str = "update,env_steps,mean_reward,mean_psnr,lambda,\
                                policy_loss,value_loss,entropy,clip_fraction,approx_kl";

/// Canonical float rendering: scientific, nine significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.8e}")
}

fn parse_f64(field: &str, path: &Path, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Csv {
        path: path.display().to_string(),
        detail: format!("line {line}: '{field}' is not a number"),
    })
}

fn parse_usize(field: &str, path: &Path, line: usize) -> Result<usize> {
    field.trim().parse::<usize>().map_err(|_| Error::Csv {
        path: path.display().to_string(),
        detail: format!("line {line}: '{field}' is not a non-negative integer"),
    })
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path.display().to_string(), e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Split a file into its data lines after checking the header.
fn data_lines<'a>(text: &'a str, header: &str, path: &Path) -> Result<Vec<(usize, &'a str)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == header => {}
        Some((_, first)) => {
            return Err(Error::Csv {
                path: path.display().to_string(),
                detail: format!("header '{first}' does not match expected '{header}'"),
            })
        }
        None => {
            return Err(Error::Csv {
                path: path.display().to_string(),
                detail: "empty file".to_string(),
            })
        }
    }
    Ok(lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect())
}

fn split_fields<'a>(
    line: &'a str,
    expected: usize,
    path: &Path,
    line_no: usize,
) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != expected {
        return Err(Error::Csv {
            path: path.display().to_string(),
            detail: format!(
                "line {line_no}: {} fields, expected {expected}",
                fields.len()
            ),
        });
    }
    Ok(fields)
}

fn check_label(label: &str) -> Result<()> {
    if label.contains(',') || label.contains('\n') || label.contains('"') {
        return Err(Error::Csv {
            path: "<writer>".to_string(),
            detail: format!("label '{label}' needs quoting, which this dialect forbids"),
        });
    }
    Ok(())
}

/// Write an episode trace.
pub fn write_trace_csv(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.decision,
            fmt_f64(r.generation_time),
            fmt_f64(r.t_start),
            fmt_f64(r.t_recv),
            fmt_f64(r.eta),
            r.symbols,
            fmt_f64(r.delay),
            fmt_f64(r.aoi),
            fmt_f64(r.voi),
            fmt_f64(r.psnr_db),
            fmt_f64(r.reward),
            fmt_f64(r.lambda),
        );
    }
    write_file(path, &out)
}

/// One parsed trace row — the file carries exactly these twelve columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub decision: usize,
    pub generation_time: f64,
    pub t_start: f64,
    pub t_recv: f64,
    pub eta: f64,
    pub symbols: usize,
    pub delay: f64,
    pub aoi: f64,
    pub voi: f64,
    pub psnr_db: f64,
    pub reward: f64,
    pub lambda: f64,
}

/// Read an episode trace back at file precision.
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let text = read_file(path)?;
    let mut rows = Vec::new();
    for (line_no, line) in data_lines(&text, TRACE_HEADER, path)? {
        let f = split_fields(line, 12, path, line_no)?;
        rows.push(TraceRow {
            decision: parse_usize(f[0], path, line_no)?,
            generation_time: parse_f64(f[1], path, line_no)?,
            t_start: parse_f64(f[2], path, line_no)?,
            t_recv: parse_f64(f[3], path, line_no)?,
            eta: parse_f64(f[4], path, line_no)?,
            symbols: parse_usize(f[5], path, line_no)?,
            delay: parse_f64(f[6], path, line_no)?,
            aoi: parse_f64(f[7], path, line_no)?,
            voi: parse_f64(f[8], path, line_no)?,
            psnr_db: parse_f64(f[9], path, line_no)?,
            reward: parse_f64(f[10], path, line_no)?,
            lambda: parse_f64(f[11], path, line_no)?,
        });
    }
    Ok(rows)
}

/// Write a sweep summary table.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        check_label(&r.policy)?;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.d_min_db),
            fmt_f64(r.avg_voi),
            fmt_f64(r.avg_psnr_db),
            r.policy,
        );
    }
    write_file(path, &out)
}

/// One parsed sweep summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCsvRow {
    pub d_min_db: f64,
    pub avg_voi: f64,
    pub avg_psnr_db: f64,
    pub policy: String,
}

/// Read a sweep summary back.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepCsvRow>> {
    let text = read_file(path)?;
    let mut rows = Vec::new();
    for (line_no, line) in data_lines(&text, SWEEP_HEADER, path)? {
        let f = split_fields(line, 4, path, line_no)?;
        rows.push(SweepCsvRow {
            d_min_db: parse_f64(f[0], path, line_no)?,
            avg_voi: parse_f64(f[1], path, line_no)?,
            avg_psnr_db: parse_f64(f[2], path, line_no)?,
            policy: f[3].trim().to_string(),
        });
    }
    Ok(rows)
}

/// Write a rate–distortion table as `(eta, gamma_db, psnr_db)` rows.
pub fn write_rd_csv(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut out = String::new();
    out.push_str(RD_HEADER);
    out.push('\n');
    for &(eta, gamma_db, psnr_db) in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(eta),
            fmt_f64(gamma_db),
            fmt_f64(psnr_db)
        );
    }
    write_file(path, &out)
}

/// Read a rate–distortion table; feed the rows to the table constructor
/// for structural validation.
pub fn read_rd_csv(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let text = read_file(path)?;
    let mut rows = Vec::new();
    for (line_no, line) in data_lines(&text, RD_HEADER, path)? {
        let f = split_fields(line, 3, path, line_no)?;
        rows.push((
            parse_f64(f[0], path, line_no)?,
            parse_f64(f[1], path, line_no)?,
            parse_f64(f[2], path, line_no)?,
        ));
    }
    Ok(rows)
}

/// Write a training learning curve, one row per optimizer update.
pub fn write_curve_csv(path: &Path, points: &[TrainingPoint]) -> Result<()> {
    let mut out = String::new();
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            p.update,
            p.env_steps,
            fmt_f64(p.mean_reward),
            fmt_f64(p.mean_psnr_db),
            fmt_f64(p.lambda),
            fmt_f64(p.policy_loss),
            fmt_f64(p.value_loss),
            fmt_f64(p.entropy),
            fmt_f64(p.clip_fraction),
            fmt_f64(p.approx_kl),
        );
    }
    write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::RdTable;
    use crate::engine::{run_episode, CodecConfig, Horizon, SimConfig};
    use crate::policy::{ActionSpace, FixedPolicy};

    fn sample_trace() -> Vec<TraceRecord> {
        let cfg = SimConfig {
            horizon: Horizon::Time { seconds: 20.0 },
            codec: CodecConfig::Surrogate {
                model: crate::codec::SurrogateRdModel::default(),
            },
            actions: ActionSpace::new(vec![2.0 / 48.0, 8.0 / 48.0]).unwrap(),
            seed: 5,
            ..SimConfig::default()
        };
        let mut policy = FixedPolicy::new(1, &cfg.actions).unwrap();
        run_episode(&cfg, &mut policy, 8).unwrap().trace
    }

    #[test]
    fn trace_roundtrips_at_nine_significant_digits() {
        let trace = sample_trace();
        assert!(trace.len() > 10);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace_csv(&path, &trace).unwrap();
        let rows = read_trace_csv(&path).unwrap();
        assert_eq!(rows.len(), trace.len());
        let close = |a: f64, b: f64| (a - b).abs() <= 5e-9 * a.abs().max(b.abs()).max(1e-300);
        for (row, rec) in rows.iter().zip(&trace) {
            assert_eq!(row.decision, rec.decision);
            assert_eq!(row.symbols, rec.symbols);
            assert!(close(row.generation_time, rec.generation_time));
            assert!(close(row.t_start, rec.t_start));
            assert!(close(row.t_recv, rec.t_recv));
            assert!(close(row.eta, rec.eta));
            assert!(close(row.delay, rec.delay));
            assert!(close(row.aoi, rec.aoi));
            assert!(close(row.voi, rec.voi));
            assert!(close(row.psnr_db, rec.psnr_db));
            assert!(close(row.reward, rec.reward));
            assert!(close(row.lambda, rec.lambda));
        }
    }

    #[test]
    fn identical_traces_write_identical_bytes() {
        let trace = sample_trace();
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        write_trace_csv(&p1, &trace).unwrap();
        write_trace_csv(&p2, &trace).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn trace_header_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace_csv(&path, &[]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "decision,u,t_start,t_recv,eta,K,delay,aoi,voi,psnr,reward,lambda"
        );
    }

    #[test]
    fn malformed_traces_are_rejected_with_detail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");

        std::fs::write(&path, "wrong,header\n").unwrap();
        assert!(matches!(
            read_trace_csv(&path),
            Err(Error::Csv { .. })
        ));

        std::fs::write(&path, format!("{TRACE_HEADER}\n1,2,3\n")).unwrap();
        let err = read_trace_csv(&path).unwrap_err().to_string();
        assert!(err.contains("expected 12"), "{err}");

        std::fs::write(
            &path,
            format!("{TRACE_HEADER}\n0,0,0,0,0,48,0,0,abc,0,0,0\n"),
        )
        .unwrap();
        let err = read_trace_csv(&path).unwrap_err().to_string();
        assert!(err.contains("abc"), "{err}");

        std::fs::write(&path, "").unwrap();
        assert!(read_trace_csv(&path).is_err());
    }

    #[test]
    fn rd_table_roundtrips_through_csv() {
        let rows = vec![
            (0.05, 3.0, 21.25),
            (0.05, 9.0, 24.5),
            (0.15, 3.0, 26.125),
            (0.15, 9.0, 29.75),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rd.csv");
        write_rd_csv(&path, &rows).unwrap();
        let back = read_rd_csv(&path).unwrap();
        assert_eq!(back, rows, "dyadic values survive the format exactly");
        RdTable::from_rows(&back).unwrap();
    }

    #[test]
    fn sweep_rows_roundtrip_and_reject_quotable_labels() {
        let rows = vec![
            SweepRow {
                d_min_db: 21.0,
                policy: "learned".to_string(),
                avg_voi: 0.25,
                avg_psnr_db: 24.5,
                constraint_satisfied: true,
            },
            SweepRow {
                d_min_db: 21.0,
                policy: "fixed-0".to_string(),
                avg_voi: 0.5,
                avg_psnr_db: 19.0,
                constraint_satisfied: false,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_sweep_csv(&path, &rows).unwrap();
        let back = read_sweep_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].policy, "learned");
        assert_eq!(back[1].avg_voi, 0.5);
        assert_eq!(
            std::fs::read_to_string(&path).unwrap().lines().next(),
            Some(SWEEP_HEADER)
        );

        let bad = vec![SweepRow {
            d_min_db: 21.0,
            policy: "evil,label".to_string(),
            avg_voi: 0.0,
            avg_psnr_db: 0.0,
            constraint_satisfied: false,
        }];
        assert!(write_sweep_csv(&dir.path().join("x.csv"), &bad).is_err());
    }

    #[test]
    fn curve_writer_emits_one_row_per_update() {
        let points = vec![TrainingPoint {
            update: 1,
            env_steps: 2048,
            mean_reward: 0.5,
            mean_psnr_db: 24.0,
            lambda: 0.05,
            policy_loss: -0.01,
            value_loss: 0.2,
            entropy: 0.69,
            clip_fraction: 0.1,
            approx_kl: 0.004,
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        write_curve_csv(&path, &points).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CURVE_HEADER);
        assert!(lines[1].starts_with("1,2048,"));
    }

    #[test]
    fn nine_digit_rendering_is_parseable_and_tight() {
        for v in [
            0.0,
            1.0,
            -1.5,
            0.020833333333333332,
            1.152,
            123456.789,
            1e-12,
            9.999999999e9,
        ] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert!(
                (back - v).abs() <= 5e-9 * v.abs().max(1e-300),
                "{v} -> {s} -> {back}"
            );
        }
    }
}
