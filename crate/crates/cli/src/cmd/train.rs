use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use rrcnn::eval::recipe;
use rrcnn::lab::{read_dataset, TableId};
use rrcnn::model::{ModelShape, DEFAULT_K, DEFAULT_RECURSIONS};
use rrcnn::train::{
    load_checkpoint, parse_indices, parse_pairs, resume, save_checkpoint, train, History, LossKind,
    LossSpec, Optimizer, TrainConfig,
};

use super::{flag, sibling};
use crate::config::{usage, RunConfig};
use crate::ConfigArgs;

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Dataset directory written by `rrcnn gen`.
    #[arg(long)]
    data: Option<String>,
    /// Checkpoint path; history and config land next to it.
    #[arg(long)]
    out: Option<String>,
    /// Continue from this checkpoint instead of a fresh initialization.
    #[arg(long)]
    resume: Option<String>,
    #[arg(long)]
    blocks: Option<usize>,
    /// Recursions per block.
    #[arg(long)]
    recursions: Option<usize>,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    /// mse, mse_qtv, ortho_constrained or ortho_penalty.
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// One-based components smoothed by the QTV term, e.g. "1 2".
    #[arg(long)]
    omega1: Option<String>,
    /// One-based component pairs, e.g. "1-2".
    #[arg(long)]
    omega2: Option<String>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lr_ortho: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lr_halving: Option<bool>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// gd or adam.
    #[arg(long)]
    optimizer: Option<String>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

const KEYS: [&str; 22] = [
    "data", "out", "resume", "blocks", "recursions", "k1", "k2", "loss", "eta", "gamma", "omega1",
    "omega2", "lr", "lr_ortho", "epochs", "batch", "seed", "lr_halving", "tol", "patience",
    "threads", "optimizer",
];

fn join_indices(v: &[usize]) -> String {
    v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

fn join_pairs(v: &[(usize, usize)]) -> String {
    v.iter()
        .map(|(a, b)| format!("{}-{}", a + 1, b + 1))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fill_defaults(rc: &mut RunConfig, shape: Option<&ModelShape>, spec: &LossSpec, cfg: &TrainConfig) {
    if let Some(shape) = shape {
        let b = &shape.blocks[0];
        rc.default_to("blocks", shape.blocks.len());
        rc.default_to("recursions", b.recursions);
        rc.default_to("k1", b.k1);
        rc.default_to("k2", b.k2);
    }
    rc.default_to("loss", spec.kind);
    let m = shape.map_or(1, |s| s.blocks.len());
    let spec = match rc.str("loss").parse::<LossKind>() {
        Ok(kind) if kind != spec.kind => default_spec(kind, m),
        _ => spec.clone(),
    };
    rc.default_to("eta", spec.eta);
    rc.default_to("gamma", spec.gamma);
    rc.default_to("omega1", join_indices(&spec.omega1));
    rc.default_to("omega2", join_pairs(&spec.omega2));
    rc.default_to("lr", cfg.lr);
    rc.default_to("lr_ortho", cfg.lr_ortho);
    rc.default_to("epochs", cfg.epochs);
    rc.default_to("batch", cfg.batch);
    rc.default_to("seed", cfg.seed);
    rc.default_to("lr_halving", cfg.lr_halving);
    rc.default_to("tol", cfg.tol);
    rc.default_to("patience", cfg.patience);
    rc.default_to("threads", cfg.threads);
    rc.default_to("optimizer", cfg.optimizer);
}

/// Loss settings used when the requested loss differs from the recipe's.
fn default_spec(kind: LossKind, m: usize) -> LossSpec {
    let pairs = if m >= 2 { vec![(0, 1)] } else { Vec::new() };
    match kind {
        LossKind::Mse => LossSpec::mse(),
        LossKind::MseQtv => LossSpec::mse_qtv(0.1, (0..m).collect()),
        LossKind::OrthoConstrained => LossSpec::ortho_constrained(pairs),
        LossKind::OrthoPenalty => LossSpec::ortho_penalty(0.1, pairs),
    }
}

fn loss_spec(rc: &RunConfig) -> Result<LossSpec> {
    let kind: LossKind = rc.get("loss")?;
    let omega1 = parse_indices(rc.str("omega1")).map_err(|e| usage(e.to_string()))?;
    let omega2 = parse_pairs(rc.str("omega2")).map_err(|e| usage(e.to_string()))?;
    Ok(LossSpec {
        kind,
        eta: rc.get("eta")?,
        gamma: rc.get("gamma")?,
        omega1,
        omega2,
    })
}

fn train_config(rc: &RunConfig) -> Result<TrainConfig> {
    let optimizer: Optimizer = rc.get("optimizer")?;
    Ok(TrainConfig {
        lr: rc.get("lr")?,
        lr_ortho: rc.get("lr_ortho")?,
        epochs: rc.get("epochs")?,
        batch: rc.get("batch")?,
        seed: rc.get("seed")?,
        lr_halving: rc.get("lr_halving")?,
        tol: rc.get("tol")?,
        patience: rc.get("patience")?,
        threads: rc.get("threads")?,
        tree_reduce: false,
        optimizer,
    })
}

pub fn history_path(checkpoint: &Path) -> PathBuf {
    sibling(checkpoint, "history.csv")
}

pub fn run(a: TrainArgs) -> Result<ExitCode> {
    let defaults: Vec<(&str, &str)> = KEYS.iter().map(|k| (*k, "")).collect();
    let flags = vec![
        ("data", a.data),
        ("out", a.out),
        ("resume", a.resume),
        ("blocks", flag(&a.blocks)),
        ("recursions", flag(&a.recursions)),
        ("k1", flag(&a.k1)),
        ("k2", flag(&a.k2)),
        ("loss", a.loss),
        ("eta", flag(&a.eta)),
        ("gamma", flag(&a.gamma)),
        ("omega1", a.omega1),
        ("omega2", a.omega2),
        ("lr", flag(&a.lr)),
        ("lr_ortho", flag(&a.lr_ortho)),
        ("epochs", flag(&a.epochs)),
        ("batch", flag(&a.batch)),
        ("seed", flag(&a.seed)),
        ("lr_halving", flag(&a.lr_halving)),
        ("tol", flag(&a.tol)),
        ("patience", flag(&a.patience)),
        ("threads", flag(&a.threads)),
        ("optimizer", a.optimizer),
    ];
    let mut rc = RunConfig::resolve("train", &defaults, a.cfg.config.as_deref(), a.cfg.section.as_deref(), flags)?;
    let data = PathBuf::from(rc.required("data")?);
    let out = PathBuf::from(rc.required("out")?);
    let (set, manifest) = read_dataset(&data)?;
    let m = set.label_count()?;

    let prior = match rc.opt("resume") {
        Some(path) => {
            let path = PathBuf::from(path);
            let (params, spec, cfg) = load_checkpoint(&path)?;
            let hist = History::read_csv(&history_path(&path))?;
            fill_defaults(&mut rc, Some(&params.shape()), &spec, &cfg);
            Some((params, hist))
        }
        None => {
            match manifest.table_id.parse::<TableId>() {
                Ok(table) => {
                    let r = recipe(table);
                    fill_defaults(&mut rc, Some(&r.shape), &r.spec, &r.cfg);
                }
                Err(_) => {
                    let shape = ModelShape::uniform(m, DEFAULT_RECURSIONS, DEFAULT_K, DEFAULT_K);
                    fill_defaults(&mut rc, Some(&shape), &LossSpec::mse(), &TrainConfig::default());
                }
            }
            None
        }
    };
    let spec = loss_spec(&rc)?;
    let cfg = train_config(&rc)?;

    let outcome = match prior {
        Some((params, hist)) => resume(&set, params, hist, &spec, &cfg)?,
        None => {
            let shape = ModelShape::uniform(rc.get("blocks")?, rc.get("recursions")?, rc.get("k1")?, rc.get("k2")?);
            train(&set, &shape, &spec, &cfg)?
        }
    };

    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        super::ensure_dir(dir)?;
    }
    save_checkpoint(&out, &outcome.params, &spec, &cfg, &outcome.history)
        .with_context(|| format!("saving checkpoint {}", out.display()))?;
    outcome.history.write_csv(&history_path(&out))?;
    rc.write_snapshot(&sibling(&out, "config.txt"))?;

    let last = outcome.history.records.last();
    println!(
        "trained {} epochs (best {}{}); final train loss {}",
        last.map_or(0, |r| r.epoch),
        outcome.best_epoch,
        if outcome.stopped_early { ", stopped early" } else { "" },
        last.map_or(f64::NAN, |r| r.train_loss)
    );
    println!("checkpoint written to {}", out.display());
    Ok(ExitCode::SUCCESS)
}
