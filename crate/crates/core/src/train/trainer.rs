//! Mini-batch gradient descent over a [`SampleSet`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::backprop::{backprop, loss_value, GradientSet};
use super::loss::{LossKind, LossSpec};
use super::optim::{sgd_step, stiefel_step, AdamState, Optimizer};
use crate::error::{invalid, Error, Result};
use crate::lab::{derive_seed, fmt_f64};
use crate::model::{load_weights, save_weights, ModelParams, ModelShape};
use crate::signal::{SampleSet, Split};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Step size for the filter taps.
    pub lr: f64,
    /// Step size for the ortho matrix.
    pub lr_ortho: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    /// Halve both step sizes whenever the epoch training loss increases.
    pub lr_halving: bool,
    /// Minimum improvement of the monitored loss that resets patience.
    pub tol: f64,
    pub patience: usize,
    /// Worker threads for per-record gradients. Results do not depend on it.
    pub threads: usize,
    /// Pairwise instead of sequential gradient summation. Changes rounding.
    pub tree_reduce: bool,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-3,
            lr_ortho: 1e-3,
            epochs: 100,
            batch: 16,
            seed: 0,
            lr_halving: true,
            tol: 1e-7,
            patience: 20,
            threads: 1,
            tree_reduce: false,
            optimizer: Optimizer::Gd,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(invalid(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.lr_ortho > 0.0 && self.lr_ortho.is_finite()) {
            return Err(invalid(format!("lr_ortho must be positive, got {}", self.lr_ortho)));
        }
        if self.epochs == 0 {
            return Err(invalid("epochs must be at least 1"));
        }
        if self.batch == 0 {
            return Err(invalid("batch must be at least 1"));
        }
        if self.threads == 0 {
            return Err(invalid("threads must be at least 1"));
        }
        if !(self.tol >= 0.0) {
            return Err(invalid("tol must be non-negative"));
        }
        Ok(())
    }
}

/// One row of the training history. Epoch 0 is the initial evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean per-record training loss after the epoch's updates.
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    /// Step size in effect during the epoch.
    pub lr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub records: Vec<EpochRecord>,
}

impl History {
    pub fn last_epoch(&self) -> Option<usize> {
        self.records.last().map(|r| r.epoch)
    }

    pub fn train_losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.train_loss).collect()
    }

    /// Epochs whose step size is smaller than the one before.
    pub fn halving_epochs(&self) -> Vec<usize> {
        self.records
            .windows(2)
            .filter(|w| w[1].lr < w[0].lr)
            .map(|w| w[1].epoch)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_loss,lr\n");
        for r in &self.records {
            let val = r.val_loss.map(fmt_f64).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{}", r.epoch, fmt_f64(r.train_loss), val, fmt_f64(r.lr));
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("epoch,train_loss,val_loss,lr") {
            return Err(Error::Parse("history header must be epoch,train_loss,val_loss,lr".into()));
        }
        let bad = |line: &str| Error::Parse(format!("bad history row {line:?}"));
        let mut records = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 4 {
                return Err(bad(line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            records.push(EpochRecord {
                epoch: f[0].parse().map_err(|_| bad(line))?,
                train_loss: num(f[1])?,
                val_loss: if f[2].is_empty() { None } else { Some(num(f[2])?) },
                lr: num(f[3])?,
            });
        }
        Ok(History { records })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Parameters with the lowest monitored loss.
    pub params: ModelParams,
    pub history: History,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

fn map_chunks<T: Send>(
    items: &[usize],
    threads: usize,
    f: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(|&i| f(i)).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let parts: Vec<Result<Vec<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(|&i| f(i)).collect::<Result<Vec<T>>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(invalid("worker thread panicked"))))
            .collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn tree_sum(mut parts: Vec<GradientSet>) -> GradientSet {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.add_scaled(1.0, &b);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().expect("non-empty batch")
}

/// Mean loss and mean gradient over `idx`, summed in index order.
fn batch_gradient(
    set: &SampleSet,
    idx: &[usize],
    p: &ModelParams,
    spec: &LossSpec,
    cfg: &TrainConfig,
) -> Result<(f64, GradientSet)> {
    let labels: Vec<Vec<Vec<f64>>> = idx.iter().map(|&i| set.records[i].label_samples()).collect();
    let pos: Vec<usize> = (0..idx.len()).collect();
    let per = map_chunks(&pos, cfg.threads, |k| {
        backprop(set.records[idx[k]].input.samples(), &labels[k], p, spec)
    })?;
    let loss: f64 = per.iter().map(|(l, _)| l).sum();
    let grads: Vec<GradientSet> = per.into_iter().map(|(_, g)| g).collect();
    let mut total = if cfg.tree_reduce {
        tree_sum(grads)
    } else {
        let mut it = grads.into_iter();
        let mut acc = it.next().expect("non-empty batch");
        for g in it {
            acc.add_scaled(1.0, &g);
        }
        acc
    };
    let inv = 1.0 / idx.len() as f64;
    total.scale(inv);
    Ok((loss * inv, total))
}

/// Mean per-record loss over `idx`.
pub fn mean_loss(set: &SampleSet, idx: &[usize], p: &ModelParams, spec: &LossSpec, threads: usize) -> Result<f64> {
    if idx.is_empty() {
        return Err(invalid("no records to evaluate"));
    }
    let per = map_chunks(idx, threads, |i| {
        let r = &set.records[i];
        loss_value(r.input.samples(), &r.label_samples(), p, spec)
    })?;
    Ok(per.iter().sum::<f64>() / idx.len() as f64)
}

fn check_dataset(set: &SampleSet) -> Result<(usize, usize)> {
    if set.is_empty() {
        return Err(invalid("training set is empty"));
    }
    let n = set.signal_len()?;
    let m = set.label_count()?;
    if set.count(Split::Train) == 0 {
        return Err(invalid("no records tagged train"));
    }
    Ok((n, m))
}

/// Initializes a model of shape `arch` and trains it.
pub fn train(set: &SampleSet, arch: &ModelShape, spec: &LossSpec, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let (n, _) = check_dataset(set)?;
    let mut params = ModelParams::init(arch, cfg.seed)?;
    if spec.kind == LossKind::OrthoConstrained {
        params = params.with_identity_ortho(n, spec.omega2.clone())?;
    }
    resume(set, params, History::default(), spec, cfg)
}

/// Continues training `params`; epoch numbering and step size pick up
/// from the end of `prior`.
pub fn resume(
    set: &SampleSet,
    mut params: ModelParams,
    prior: History,
    spec: &LossSpec,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let (n, m) = check_dataset(set)?;
    spec.validate(m, Some(&params))?;
    crate::model::check_model(n, &params)?;

    let train_idx = set.indices(Split::Train);
    let val_idx = set.indices(Split::Validation);
    let eval = |p: &ModelParams, epoch: usize| -> Result<(f64, Option<f64>)> {
        let tr = mean_loss(set, &train_idx, p, spec, cfg.threads)?;
        let va = if val_idx.is_empty() {
            None
        } else {
            Some(mean_loss(set, &val_idx, p, spec, cfg.threads)?)
        };
        if !tr.is_finite() || va.is_some_and(|v| !v.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        Ok((tr, va))
    };

    let mut history = prior;
    let (mut lr, mut lr_ortho) = match history.records.last() {
        Some(r) => (r.lr, cfg.lr_ortho * r.lr / cfg.lr),
        None => (cfg.lr, cfg.lr_ortho),
    };
    let start = history.last_epoch().map_or(0, |e| e + 1);
    let (tr0, va0) = eval(&params, start)?;
    if history.records.is_empty() {
        history.records.push(EpochRecord {
            epoch: 0,
            train_loss: tr0,
            val_loss: va0,
            lr,
        });
    }
    let first = history.last_epoch().map_or(1, |e| e + 1);

    let mut best = params.clone();
    let mut best_loss = va0.unwrap_or(tr0);
    let mut best_epoch = first - 1;
    let mut prev_train = tr0;
    let mut stale = 0;
    let mut stopped_early = false;
    let mut adam = AdamState::new(&params);

    for epoch in first..first + cfg.epochs {
        let mut order = train_idx.clone();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, epoch as u64)));
        for chunk in order.chunks(cfg.batch) {
            let mut batch = chunk.to_vec();
            batch.sort_unstable();
            let (loss, g) = batch_gradient(set, &batch, &params, spec, cfg)?;
            if !loss.is_finite() || g.flat().iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { epoch });
            }
            let mut next = match cfg.optimizer {
                Optimizer::Gd => sgd_step(&params, &g, lr)?,
                Optimizer::Adam => adam.step(&params, &g, lr)?,
            };
            if let (Some(o), Some(go)) = (&mut next.ortho, &g.ortho) {
                o.matrix = stiefel_step(&o.matrix, go, lr_ortho)?;
            }
            params = next;
        }
        let (tr, va) = eval(&params, epoch)?;
        history.records.push(EpochRecord {
            epoch,
            train_loss: tr,
            val_loss: va,
            lr,
        });
        if cfg.lr_halving && tr > prev_train {
            lr *= 0.5;
            lr_ortho *= 0.5;
        }
        prev_train = tr;

        let monitored = va.unwrap_or(tr);
        if monitored < best_loss - cfg.tol {
            best_loss = monitored;
            best = params.clone();
            best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                stopped_early = true;
                break;
            }
        }
    }
    Ok(TrainOutcome {
        params: best,
        history,
        best_epoch,
        stopped_early,
    })
}

/// Path of the text manifest that accompanies a checkpoint.
pub fn checkpoint_manifest_path(weights: &Path) -> PathBuf {
    let mut s = weights.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn fmt_indices(v: &[usize]) -> String {
    v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

fn fmt_pairs(v: &[(usize, usize)]) -> String {
    v.iter()
        .map(|(i, j)| format!("{}-{}", i + 1, j + 1))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses one-based `"1 3"` into zero-based indices.
pub fn parse_indices(s: &str) -> Result<Vec<usize>> {
    s.split([' ', ','])
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i - 1),
            _ => Err(Error::Parse(format!("bad component index {t:?}"))),
        })
        .collect()
}

/// Parses one-based `"1-2 3-4"` into zero-based pairs.
pub fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split([' ', ','])
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (a, b) = t
                .split_once('-')
                .ok_or_else(|| Error::Parse(format!("bad pair {t:?}")))?;
            let a = parse_indices(a)?;
            let b = parse_indices(b)?;
            match (a.as_slice(), b.as_slice()) {
                ([a], [b]) => Ok((*a, *b)),
                _ => Err(Error::Parse(format!("bad pair {t:?}"))),
            }
        })
        .collect()
}

/// Writes the weights and a sidecar manifest with the loss, config and seed.
pub fn save_checkpoint(path: &Path, params: &ModelParams, spec: &LossSpec, cfg: &TrainConfig, history: &History) -> Result<()> {
    save_weights(params, path)?;
    let mut s = String::new();
    let _ = writeln!(s, "loss={}", spec.kind);
    let _ = writeln!(s, "eta={}", fmt_f64(spec.eta));
    let _ = writeln!(s, "gamma={}", fmt_f64(spec.gamma));
    let _ = writeln!(s, "omega1={}", fmt_indices(&spec.omega1));
    let _ = writeln!(s, "omega2={}", fmt_pairs(&spec.omega2));
    let _ = writeln!(s, "lr={}", fmt_f64(cfg.lr));
    let _ = writeln!(s, "lr_ortho={}", fmt_f64(cfg.lr_ortho));
    let _ = writeln!(s, "epochs={}", cfg.epochs);
    let _ = writeln!(s, "batch={}", cfg.batch);
    let _ = writeln!(s, "seed={}", cfg.seed);
    let _ = writeln!(s, "lr_halving={}", cfg.lr_halving);
    let _ = writeln!(s, "tol={}", fmt_f64(cfg.tol));
    let _ = writeln!(s, "patience={}", cfg.patience);
    let _ = writeln!(s, "tree_reduce={}", cfg.tree_reduce);
    let _ = writeln!(s, "optimizer={}", cfg.optimizer);
    if let Some(e) = history.last_epoch() {
        let _ = writeln!(s, "last_epoch={e}");
    }
    let mpath = checkpoint_manifest_path(path);
    fs::write(&mpath, s).map_err(|e| Error::io(&mpath, e))
}

/// Reads weights plus the loss and config stored next to them.
pub fn load_checkpoint(path: &Path) -> Result<(ModelParams, LossSpec, TrainConfig)> {
    let params = load_weights(path)?;
    let mpath = checkpoint_manifest_path(path);
    let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
    let mut kv = BTreeMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad manifest line {line:?}")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| {
        kv.get(k)
            .map(String::as_str)
            .ok_or_else(|| Error::Parse(format!("manifest {} lacks {k}", mpath.display())))
    };
    fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T> {
        v.parse().map_err(|_| Error::Parse(format!("bad value {v:?} for {k}")))
    }
    let spec = LossSpec {
        kind: get("loss")?.parse()?,
        eta: num("eta", get("eta")?)?,
        gamma: num("gamma", get("gamma")?)?,
        omega1: parse_indices(get("omega1")?)?,
        omega2: parse_pairs(get("omega2")?)?,
    };
    let cfg = TrainConfig {
        lr: num("lr", get("lr")?)?,
        lr_ortho: num("lr_ortho", get("lr_ortho")?)?,
        epochs: num("epochs", get("epochs")?)?,
        batch: num("batch", get("batch")?)?,
        seed: num("seed", get("seed")?)?,
        lr_halving: num("lr_halving", get("lr_halving")?)?,
        tol: num("tol", get("tol")?)?,
        patience: num("patience", get("patience")?)?,
        threads: 1,
        tree_reduce: num("tree_reduce", get("tree_reduce")?)?,
        optimizer: get("optimizer")?.parse()?,
    };
    Ok((params, spec, cfg))
}
