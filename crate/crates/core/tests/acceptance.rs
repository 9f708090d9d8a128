//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the trained-model criteria
//! share one process and print their measured numbers. A failing criterion
//! is reported, not raised, so the rest of the workspace tests still run.
//! `ACCEPTANCE_ONLY=1,3` restricts the run to the listed criteria.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rrcnn::eval::{recipe, run_example, ExampleId, MetricReport, Method};
use rrcnn::lab::{build_table_dataset, TableId, DEFAULT_N};
use rrcnn::model::{cascade_forward, predict_batch, ModelParams, ModelShape, DEFAULT_K};
use rrcnn::train::{
    backprop, grad_check, stiefel_step, train, History, LossKind, LossSpec, Optimizer, TrainConfig,
};
use rrcnn::{SampleRecord, SampleSet, Signal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn spec_for(kind: LossKind, m: usize) -> LossSpec {
    match kind {
        LossKind::Mse => LossSpec::mse(),
        LossKind::MseQtv => LossSpec::mse_qtv(0.2, (0..m).collect()),
        LossKind::OrthoConstrained => LossSpec::ortho_constrained(vec![(0, 1)]),
        LossKind::OrthoPenalty => LossSpec::ortho_penalty(0.3, vec![(0, 1)]),
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut worst_cfg = String::new();
    for trial in 0..20 {
        let kind = LossKind::ALL[trial % 4];
        let n = [32, 64][rng.random_range(0..2)];
        let k1 = [3, 5][rng.random_range(0..2)];
        let k2 = [3, 5][rng.random_range(0..2)];
        let s = rng.random_range(1..=2);
        let m = match kind {
            LossKind::OrthoConstrained | LossKind::OrthoPenalty => 2,
            _ => rng.random_range(1..=2),
        };
        let spec = spec_for(kind, m);
        let mut p = ModelParams::init(&ModelShape::uniform(m, s, k1, k2), rng.random()).unwrap();
        for b in &mut p.blocks {
            for r in &mut b.recursions {
                let raw = random_vec(&mut rng, k2);
                r.w2_raw = rrcnn::model::ConvFilter::new(raw).unwrap();
            }
        }
        if kind == LossKind::OrthoConstrained {
            let q = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q();
            p = p.with_identity_ortho(n, vec![(0, 1)]).unwrap();
            p.ortho.as_mut().unwrap().matrix = q;
        }
        let x: Vec<f64> = (0..n)
            .map(|i| 1.5 * (0.4 * i as f64).sin() + 0.3 * rng.random_range(-1.0..1.0))
            .collect();
        let label: Vec<Vec<f64>> = (0..m).map(|_| random_vec(&mut rng, n)).collect();
        let report = grad_check(&p, &x, &label, &spec, 1e-6).unwrap();
        if report.max_deviation > worst {
            worst = report.max_deviation;
            worst_cfg = format!("{kind} N={n} K=({k1},{k2}) S={s} M={m} at {}", report.worst_name);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-5 && elapsed < Duration::from_secs(60),
        format!("max deviation {worst:.2e} ({worst_cfg}), {:.1}s", elapsed.as_secs_f64()),
    )
}

/// Direct double sums for one block with one recursion under MSE + QTV.
fn closed_form_gradient(x: &[f64], y: &[f64], w1: &[f64], w2_raw: &[f64], eta: f64) -> (f64, Vec<f64>) {
    let n = x.len() as isize;
    let (k1, k2) = (w1.len() as isize, w2_raw.len() as isize);
    let (h1, h2) = (k1 / 2, k2 / 2);
    let zmax = w2_raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ez: Vec<f64> = w2_raw.iter().map(|z| (z - zmax).exp()).collect();
    let p: Vec<f64> = ez.iter().map(|e| e / ez.iter().sum::<f64>()).collect();
    let at = |v: &[f64], t: isize| if (0..n).contains(&t) { v[t as usize] } else { 0.0 };
    let c1: Vec<f64> = (0..n)
        .map(|s| (0..k1).map(|i| at(x, s - h1 + i) * w1[i as usize]).sum::<f64>().tanh())
        .collect();
    let c2: Vec<f64> = (0..n)
        .map(|t| (0..k2).map(|j| at(&c1, t - h2 + j) * p[j as usize]).sum())
        .collect();
    let imf: Vec<f64> = x.iter().zip(&c2).map(|(a, b)| a - b).collect();
    let mut loss = 0.0;
    let mut g = vec![0.0; imf.len()];
    for t in 0..imf.len() {
        loss += (imf[t] - y[t]).powi(2);
        g[t] += 2.0 * (imf[t] - y[t]);
    }
    for t in 0..imf.len() - 1 {
        let d = imf[t + 1] - imf[t];
        loss += eta * d * d;
        g[t + 1] += 2.0 * eta * d;
        g[t] -= 2.0 * eta * d;
    }
    // imf = x - c2, so dL/dc2 = -g.
    let mut dw1 = vec![0.0; k1 as usize];
    let mut dp = vec![0.0; k2 as usize];
    for t in 0..n {
        for j in 0..k2 {
            let s = t - h2 + j;
            if !(0..n).contains(&s) {
                continue;
            }
            let c = c1[s as usize];
            dp[j as usize] -= g[t as usize] * c;
            for i in 0..k1 {
                dw1[i as usize] -= g[t as usize] * p[j as usize] * (1.0 - c * c) * at(x, s - h1 + i);
            }
        }
    }
    let dz: Vec<f64> = (0..k2 as usize)
        .map(|k| {
            (0..k2 as usize)
                .map(|j| dp[j] * p[j] * (if j == k { 1.0 } else { 0.0 } - p[k]))
                .sum()
        })
        .collect();
    let mut grad = dw1;
    grad.extend(dz);
    (loss, grad)
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for trial in 0..10 {
        let n = 40 + 8 * trial;
        let (k1, k2) = ([3, 5, 7][trial % 3], [3, 5][trial % 2]);
        let mut p = ModelParams::init(&ModelShape::uniform(1, 1, k1, k2), 900 + trial as u64).unwrap();
        p.blocks[0].recursions[0].w2_raw = rrcnn::model::ConvFilter::new(random_vec(&mut rng, k2)).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).cos() + 0.5 * rng.random_range(-1.0..1.0)).collect();
        let y = random_vec(&mut rng, n);
        let eta = 0.05 + 0.1 * trial as f64;
        let spec = LossSpec::mse_qtv(eta, vec![0]);
        let (loss, g) = backprop(&x, &[y.clone()], &p, &spec).unwrap();
        let r = &p.blocks[0].recursions[0];
        let (loss_ref, g_ref) = closed_form_gradient(&x, &y, r.w1.taps(), r.w2_raw.taps(), eta);
        let scale = g_ref.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let dev = g
            .flat()
            .iter()
            .zip(&g_ref)
            .map(|(a, b)| (a - b).abs() / scale)
            .fold(((loss - loss_ref) / loss_ref).abs(), f64::max);
        worst = worst.max(dev);
    }
    outcome(worst <= 1e-10, format!("max relative difference {worst:.2e} over 10 cases"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(16..=96);
        let m = rng.random_range(1..=3);
        let s = rng.random_range(1..=3);
        let k1 = 2 * rng.random_range(1..=4) + 1;
        let k2 = 2 * rng.random_range(1..=4) + 1;
        let mut p = ModelParams::init(&ModelShape::uniform(m, s, k1, k2), rng.random()).unwrap();
        for b in &mut p.blocks {
            for r in &mut b.recursions {
                let scale = rng.random_range(0.1..5.0);
                let w1: Vec<f64> = random_vec(&mut rng, k1).iter().map(|v| v * scale).collect();
                r.w1 = rrcnn::model::ConvFilter::new(w1).unwrap();
                r.w2_raw = rrcnn::model::ConvFilter::new(random_vec(&mut rng, k2)).unwrap();
            }
        }
        let amp = 10f64.powf(rng.random_range(-3.0..3.0));
        let x: Vec<f64> = random_vec(&mut rng, n).iter().map(|v| v * amp).collect();
        let out = cascade_forward(&x, &p).unwrap();
        let xmax = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for t in 0..n {
            let sum = out.imfs.iter().map(|imf| imf[t]).sum::<f64>() + out.residue[t];
            worst = worst.max((sum - x[t]).abs() / xmax);
        }
    }
    outcome(worst <= 1e-10, format!("max error {worst:.2e} x ||x||_inf over 1000 pairs"))
}

fn orthonormality_error(w: &DMatrix<f64>) -> f64 {
    (w.transpose() * w - DMatrix::identity(w.ncols(), w.ncols())).norm()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    let mut worst_fixed = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=48);
        let w = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let lr = 10f64.powf(rng.random_range(-4.0..0.0));
        let next = stiefel_step(&w, &g, lr).unwrap();
        worst = worst.max(orthonormality_error(&next));
        let q = next;
        let again = stiefel_step(&q, &DMatrix::zeros(n, n), lr).unwrap();
        worst_fixed = worst_fixed.max((again - &q).norm());
    }
    outcome(
        worst < 1e-10 && worst_fixed < 1e-12,
        format!("max ||W^T W - I||_F {worst:.2e}, max move of an orthogonal input {worst_fixed:.2e}"),
    )
}

/// Four records whose labels come from a fixed teacher model.
fn toy_set() -> (SampleSet, ModelShape) {
    let n = 128;
    let shape = ModelShape::uniform(1, 1, 3, 3);
    let mut teacher = ModelParams::init(&shape, 77).unwrap();
    for r in &mut teacher.blocks[0].recursions {
        let w1: Vec<f64> = r.w1.taps().iter().map(|v| 5.0 * v).collect();
        r.w1 = rrcnn::model::ConvFilter::new(w1).unwrap();
    }
    let dt = 1.0 / n as f64;
    let records = (0..4)
        .map(|i| {
            let f = 2.0 + 1.5 * i as f64;
            let x: Vec<f64> = (0..n)
                .map(|k| {
                    let t = k as f64 * dt;
                    (std::f64::consts::TAU * f * t).sin() + 0.8 * t + 0.3 * (7.0 * t).cos()
                })
                .collect();
            let y = cascade_forward(&x, &teacher).unwrap().imfs;
            let input = Signal::new(x, 0.0, dt).unwrap();
            let labels = y.into_iter().map(|v| input.with_samples(v).unwrap()).collect();
            SampleRecord::new(input, labels, "toy", BTreeMap::new()).unwrap()
        })
        .collect();
    (SampleSet::unsplit(records), shape)
}

fn criterion_5() -> Outcome {
    let (set, shape) = toy_set();
    let cfg = TrainConfig {
        lr: 0.05,
        epochs: 2000,
        batch: 4,
        seed: 5,
        lr_halving: true,
        tol: 0.0,
        patience: usize::MAX,
        optimizer: Optimizer::Gd,
        ..TrainConfig::default()
    };
    let out = train(&set, &shape, &LossSpec::mse(), &cfg).unwrap();
    let losses = out.history.train_losses();
    let (first, last) = (losses[0], *losses.last().unwrap());
    let halvings = out.history.halving_epochs();
    let after = halvings.last().copied().unwrap_or(0);
    let monotone = descent_after(&out.history, after);
    outcome(
        last < 0.01 * first && monotone,
        format!(
            "loss {first:.3e} -> {last:.3e} ({:.3}%) in {} epochs, {} halvings, last at epoch {after}, non-increasing after: {monotone}",
            100.0 * last / first,
            losses.len() - 1,
            halvings.len()
        ),
    )
}

fn descent_after(h: &History, epoch: usize) -> bool {
    let tail: Vec<f64> = h.records.iter().filter(|r| r.epoch >= epoch).map(|r| r.train_loss).collect();
    tail.windows(2).all(|w| w[1] <= w[0])
}

/// Trains the recipe model for `table` and scores `examples` with it.
fn trained_reports(table: TableId, examples: &[ExampleId]) -> (Vec<Vec<MetricReport>>, Duration) {
    let start = Instant::now();
    let r = recipe(table);
    let set = build_table_dataset(table, DEFAULT_N, r.dataset_seed).unwrap();
    let out = train(&set, &r.shape, &r.spec, &r.cfg).unwrap();
    let mut models = BTreeMap::new();
    models.insert(table, out.params);
    let reports = examples
        .iter()
        .map(|&e| run_example(e, &Method::ALL, &models, DEFAULT_N).unwrap().reports)
        .collect();
    (reports, start.elapsed())
}

fn score<'a>(reports: &'a [MetricReport], method: Method, component: &str) -> (f64, f64) {
    let c = reports
        .iter()
        .find(|r| r.method == method)
        .and_then(|r| r.component(component))
        .unwrap();
    (c.mae, c.rmse)
}

fn criterion_6() -> Outcome {
    let (reports, took) = trained_reports(TableId::T2, &[ExampleId::E1]);
    let r = &reports[0];
    let (mae, rmse) = score(r, Method::Rrcnn, "average");
    let (if_mae, _) = score(r, Method::If, "average");
    let (csa_mae, _) = score(r, Method::Csa, "average");
    outcome(
        mae <= 0.25 && rmse <= 0.31 && mae < if_mae && mae < csa_mae && took <= Duration::from_secs(1200),
        format!(
            "E1 RRCNN mae {mae:.4} rmse {rmse:.4}; IF mae {if_mae:.4}; CSA mae {csa_mae:.4}; {:.0}s",
            took.as_secs_f64()
        ),
    )
}

fn criterion_7() -> Outcome {
    let (reports, took) = trained_reports(TableId::T6, &[ExampleId::E4]);
    let r = &reports[0];
    let (mae, rmse) = score(r, Method::Rrcnn, "average");
    let (if_mae, if_rmse) = score(r, Method::If, "average");
    let (csa_mae, csa_rmse) = score(r, Method::Csa, "average");
    outcome(
        mae <= 0.18 && mae < if_mae && mae < csa_mae && rmse < if_rmse && rmse < csa_rmse,
        format!(
            "E4 RRCNN mae {mae:.4} rmse {rmse:.4}; IF {if_mae:.4}/{if_rmse:.4}; CSA {csa_mae:.4}/{csa_rmse:.4}; {:.0}s",
            took.as_secs_f64()
        ),
    )
}

fn criterion_8() -> Outcome {
    let (reports, took) = trained_reports(TableId::T8, &[ExampleId::E6]);
    let r = &reports[0];
    let (c1, _) = score(r, Method::Rrcnn, "c1");
    let (c2, _) = score(r, Method::Rrcnn, "c2");
    let (if1, _) = score(r, Method::If, "c1");
    let (if2, _) = score(r, Method::If, "c2");
    outcome(
        c1 <= 0.20 && c2 <= 0.07 && c1 < if1 && c2 < if2,
        format!(
            "E6 RRCNN c1 mae {c1:.4} c2 mae {c2:.4}; IF c1 {if1:.4} c2 {if2:.4}; {:.0}s",
            took.as_secs_f64()
        ),
    )
}

fn criterion_9() -> Outcome {
    let (reports, took) = trained_reports(TableId::T12, &[ExampleId::E8]);
    let r = &reports[0];
    let rrcnn = r.iter().find(|m| m.method == Method::Rrcnn).unwrap();
    let rho = rrcnn.rho.unwrap();
    let (c1, _) = score(r, Method::Rrcnn, "c1");
    let (c2, _) = score(r, Method::Rrcnn, "c2");
    outcome(
        rho.abs() <= 0.1 && c1 <= 2.0 * 0.1195 && c2 <= 2.0 * 0.0639,
        format!("E8 RRCNN rho {rho:.4}, c1 mae {c1:.4}, c2 mae {c2:.4}; {:.0}s", took.as_secs_f64()),
    )
}

fn fastest(runs: usize, mut f: impl FnMut()) -> Duration {
    (0..runs)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .min()
        .unwrap()
}

fn criterion_10() -> Outcome {
    let p = ModelParams::init(&ModelShape::uniform(2, 3, DEFAULT_K, DEFAULT_K), 10).unwrap();
    let x = ExampleId::E4.default_signal().unwrap().input.into_samples();
    let single = fastest(5, || {
        std::hint::black_box(cascade_forward(&x, &p).unwrap());
    });
    let batch = vec![x; 100];
    let one = fastest(3, || {
        std::hint::black_box(predict_batch(&batch, &p, 1).unwrap());
    });
    let four = fastest(3, || {
        std::hint::black_box(predict_batch(&batch, &p, 4).unwrap());
    });
    let speedup = one.as_secs_f64() / four.as_secs_f64();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    outcome(
        speedup >= 2.0 && single < Duration::from_millis(50),
        format!(
            "single-signal latency {:.2} ms; 100 copies: 1 lane {:.3}s, 4 lanes {:.3}s, speedup {speedup:.2}x on {cores} core(s)",
            single.as_secs_f64() * 1e3,
            one.as_secs_f64(),
            four.as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("gradient oracle", criterion_1),
        ("closed-form gradient cross-check", criterion_2),
        ("reconstruction identity", criterion_3),
        ("Stiefel contract", criterion_4),
        ("descent on toy set", criterion_5),
        ("E1 local average", criterion_6),
        ("E4 noisy local average", criterion_7),
        ("E6 mode mixing", criterion_8),
        ("E8 orthogonality", criterion_9),
        ("batch-prediction scaling", criterion_10),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let o = run();
        println!("criterion {id:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{failed} criteria failed");
}
