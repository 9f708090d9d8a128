use std::process::ExitCode;

use anyhow::Result;
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rrcnn::model::{ModelParams, ModelShape};
use rrcnn::train::{grad_check_with_fault, LossKind, LossSpec};

use super::flag;
use crate::config::{usage, RunConfig};
use crate::ConfigArgs;

/// Signals longer than this make the central-difference sweep too slow.
pub const MAX_N: usize = 256;
pub const THRESHOLD: f64 = 1e-5;

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    recursions: Option<usize>,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    #[arg(long)]
    loss: Option<String>,
    /// Relative finite-difference step, within [1e-8, 1e-4].
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Flat coordinate whose analytic gradient gets perturbed.
    #[arg(long)]
    fault: Option<usize>,
    #[arg(long)]
    fault_delta: Option<f64>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

pub fn run(a: GradcheckArgs) -> Result<ExitCode> {
    let rc = RunConfig::resolve(
        "gradcheck",
        &[
            ("n", "64"),
            ("blocks", "2"),
            ("recursions", "2"),
            ("k1", "5"),
            ("k2", "3"),
            ("loss", "mse"),
            ("eps", "1e-6"),
            ("seed", "0"),
            ("fault", ""),
            ("fault_delta", "0.1"),
        ],
        a.cfg.config.as_deref(),
        a.cfg.section.as_deref(),
        vec![
            ("n", flag(&a.n)),
            ("blocks", flag(&a.blocks)),
            ("recursions", flag(&a.recursions)),
            ("k1", flag(&a.k1)),
            ("k2", flag(&a.k2)),
            ("loss", a.loss),
            ("eps", flag(&a.eps)),
            ("seed", flag(&a.seed)),
            ("fault", flag(&a.fault)),
            ("fault_delta", flag(&a.fault_delta)),
        ],
    )?;
    let n: usize = rc.get("n")?;
    if n < 2 || n > MAX_N {
        return Err(usage(format!("n must lie in [2, {MAX_N}], got {n}")));
    }
    let eps: f64 = rc.get("eps")?;
    if !(1e-8..=1e-4).contains(&eps) {
        return Err(usage(format!("eps {eps} outside [1e-8, 1e-4]")));
    }
    let m: usize = rc.get("blocks")?;
    let kind: LossKind = rc.get("loss")?;
    let pairs = if m >= 2 { vec![(0, 1)] } else { Vec::new() };
    let spec = match kind {
        LossKind::Mse => LossSpec::mse(),
        LossKind::MseQtv => LossSpec::mse_qtv(0.1, (0..m).collect()),
        LossKind::OrthoConstrained => LossSpec::ortho_constrained(pairs.clone()),
        LossKind::OrthoPenalty => LossSpec::ortho_penalty(0.1, pairs.clone()),
    };
    if matches!(kind, LossKind::OrthoConstrained | LossKind::OrthoPenalty) && m < 2 {
        return Err(usage(format!("loss {kind} needs at least 2 blocks")));
    }
    let seed: u64 = rc.get("seed")?;
    let shape = ModelShape::uniform(m, rc.get("recursions")?, rc.get("k1")?, rc.get("k2")?);
    let mut params = ModelParams::init(&shape, seed)?;
    if kind == LossKind::OrthoConstrained {
        params = params.with_identity_ortho(n, pairs)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let x: Vec<f64> = (0..n)
        .map(|i| (0.3 * i as f64).sin() + rng.random_range(-0.5..0.5))
        .collect();
    let label: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let fault = match rc.opt("fault") {
        Some(_) => Some((rc.get("fault")?, rc.get("fault_delta")?)),
        None => None,
    };
    let report = grad_check_with_fault(&params, &x, &label, &spec, eps, fault)?;
    let verdict = if report.passed(THRESHOLD) { "PASS" } else { "FAIL" };
    println!(
        "{verdict}: max relative deviation {:e} over {} coordinates (worst: {})",
        report.max_deviation,
        report.analytic.len(),
        report.worst_name
    );
    Ok(if report.passed(THRESHOLD) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
