use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use rrcnn::eval::ExampleId;
use rrcnn::model::{load_weights, predict_batch, ModelParams, ModelShape, DEFAULT_K, DEFAULT_RECURSIONS};

use super::flag;
use crate::config::{usage, RunConfig};
use crate::ConfigArgs;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Checkpoint to time; a randomly initialized two-block model otherwise.
    #[arg(long)]
    model: Option<String>,
    /// Comma-separated copy counts.
    #[arg(long)]
    copies: Option<String>,
    /// Comma-separated worker-lane counts.
    #[arg(long)]
    threads: Option<String>,
    /// Timed repetitions per row; the fastest is reported.
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Timing CSV; printed to stdout when omitted.
    #[arg(long)]
    out: Option<String>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

fn list(rc: &RunConfig, key: &str) -> Result<Vec<usize>> {
    let v = rc
        .required(key)?
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| usage(format!("bad {key} entry {s:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if v.contains(&0) {
        return Err(usage(format!("{key} must be at least 1")));
    }
    Ok(v)
}

pub fn run(a: BenchArgs) -> Result<ExitCode> {
    let rc = RunConfig::resolve(
        "bench",
        &[
            ("model", ""),
            ("copies", "1,100"),
            ("threads", "1,4"),
            ("repeats", "3"),
            ("seed", "0"),
            ("out", ""),
        ],
        a.cfg.config.as_deref(),
        a.cfg.section.as_deref(),
        vec![
            ("model", a.model),
            ("copies", a.copies),
            ("threads", a.threads),
            ("repeats", flag(&a.repeats)),
            ("seed", flag(&a.seed)),
            ("out", a.out),
        ],
    )?;
    let copies = list(&rc, "copies")?;
    let threads = list(&rc, "threads")?;
    let repeats: usize = rc.get("repeats")?;
    if repeats == 0 {
        return Err(usage("repeats must be at least 1"));
    }
    let params = match rc.opt("model") {
        Some(p) => load_weights(Path::new(p))?,
        None => ModelParams::init(&ModelShape::uniform(2, DEFAULT_RECURSIONS, DEFAULT_K, DEFAULT_K), rc.get("seed")?)?,
    };
    let x = ExampleId::E4.default_signal()?.input.into_samples();

    let mut csv = String::from("copies,threads,seconds\n");
    for &c in &copies {
        let batch = vec![x.clone(); c];
        for &t in &threads {
            let mut best = f64::INFINITY;
            for _ in 0..repeats {
                let start = Instant::now();
                let out = predict_batch(&batch, &params, t)?;
                best = best.min(start.elapsed().as_secs_f64());
                std::hint::black_box(out);
            }
            let _ = writeln!(csv, "{c},{t},{best:.6}");
        }
    }
    match rc.opt("out") {
        Some(p) => {
            let path = Path::new(p);
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            rc.write_snapshot(&super::sibling(path, "config.txt"))?;
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
