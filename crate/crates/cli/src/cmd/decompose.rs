use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use rrcnn::baselines::{csa_average, if_decompose, DecompositionResult, IfConfig};
use rrcnn::eval::{ExampleId, Method};
use rrcnn::model::{decompose, load_weights};
use rrcnn::Signal;

use super::{ensure_dir, fmt_value};
use crate::config::{usage, RunConfig};
use crate::ConfigArgs;

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// Trained checkpoint; implies `--method rrcnn`.
    #[arg(long)]
    model: Option<String>,
    /// rrcnn, if or csa.
    #[arg(long)]
    method: Option<String>,
    /// CSV with one value per row or `t,value` rows.
    #[arg(long)]
    input: Option<String>,
    /// Use an example signal instead of `--input`.
    #[arg(long)]
    example: Option<String>,
    /// Samples for `--example`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<String>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

/// Reads a single-column or `t,value` CSV; a non-numeric first row is a header.
pub fn read_signal(path: &Path) -> Result<Signal> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut ts = Vec::new();
    let mut xs = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = cells.iter().map(|c| c.parse().ok()).collect();
        match (parsed, cells.len()) {
            (Some(v), 1) => xs.push(v[0]),
            (Some(v), 2) => {
                ts.push(v[0]);
                xs.push(v[1]);
            }
            (None, _) if no == 0 => continue,
            _ => return Err(usage(format!("{}:{}: expected `value` or `t,value`", path.display(), no + 1))),
        }
    }
    if xs.is_empty() {
        return Err(usage(format!("{}: no samples", path.display())));
    }
    let (t0, dt) = match ts.as_slice() {
        [a, b, ..] => (*a, b - a),
        [a] => (*a, 1.0),
        [] => (0.0, 1.0),
    };
    Ok(Signal::new(xs, t0, dt)?)
}

fn components_csv(x: &Signal, d: &DecompositionResult) -> String {
    let mut s = String::from("t");
    for i in 1..=d.imfs.len() {
        let _ = write!(s, ",imf_{i}");
    }
    s.push_str(",residue\n");
    for k in 0..x.len() {
        s.push_str(&fmt_value(x.time(k)));
        for imf in &d.imfs {
            s.push(',');
            s.push_str(&fmt_value(imf.samples()[k]));
        }
        s.push(',');
        s.push_str(&fmt_value(d.residue.samples()[k]));
        s.push('\n');
    }
    s
}

pub fn run(a: DecomposeArgs) -> Result<ExitCode> {
    let n = rrcnn::lab::DEFAULT_N.to_string();
    let rc = RunConfig::resolve(
        "decompose",
        &[("model", ""), ("method", ""), ("input", ""), ("example", ""), ("n", &n), ("out", "")],
        a.cfg.config.as_deref(),
        a.cfg.section.as_deref(),
        vec![
            ("model", a.model),
            ("method", a.method),
            ("input", a.input),
            ("example", a.example),
            ("n", super::flag(&a.n)),
            ("out", a.out),
        ],
    )?;
    let method: Method = match rc.opt("method") {
        Some(m) => m.parse().map_err(|e| usage(format!("{e}")))?,
        None if rc.opt("model").is_some() => Method::Rrcnn,
        None => return Err(usage("need --model or --method")),
    };
    let x = match (rc.opt("input"), rc.opt("example")) {
        (Some(p), None) => read_signal(Path::new(p))?,
        (None, Some(e)) => {
            let e: ExampleId = e.parse().map_err(|e| usage(format!("{e}")))?;
            e.signal(rc.get("n")?)?.input
        }
        _ => return Err(usage("give exactly one of --input and --example")),
    };
    let out = PathBuf::from(rc.required("out")?);

    let result = match method {
        Method::Rrcnn => {
            let path = rc
                .opt("model")
                .ok_or_else(|| usage("method rrcnn needs --model"))?;
            let params = load_weights(Path::new(path))?;
            decompose(&x, &params)?
        }
        Method::If => if_decompose(&x, &IfConfig::default())?,
        Method::Csa => {
            let avg = csa_average(&x)?;
            let imf = avg
                .samples()
                .iter()
                .zip(x.samples())
                .map(|(m, v)| v - m)
                .collect();
            DecompositionResult {
                imfs: vec![x.with_samples(imf)?],
                residue: avg,
            }
        }
    };

    ensure_dir(&out)?;
    let path = out.join("components.csv");
    fs::write(&path, components_csv(&x, &result)).with_context(|| format!("writing {}", path.display()))?;
    rc.write_snapshot(&out.join("resolved_config.txt"))?;

    let err = result
        .reconstruct()
        .iter()
        .zip(x.samples())
        .map(|(r, v)| (r - v).abs())
        .fold(0.0, f64::max);
    println!("{method}: {} components of {} samples", result.imfs.len(), x.len());
    println!("reconstruction max abs error {err:e}");
    Ok(ExitCode::SUCCESS)
}
