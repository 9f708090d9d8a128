//! Example drivers and their CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::examples::{ExampleId, ExampleSignal, Task};
use super::metrics::{mae_slice, rho_slice, rmse_slice};
use crate::baselines::{csa_average, if_decompose, if_extract_imf, IfConfig};
use crate::error::{invalid, Error, Result};
use crate::lab::{fmt_f64, TableId};
use crate::model::{decompose, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Rrcnn,
    If,
    Csa,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Rrcnn, Method::If, Method::Csa];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rrcnn => "RRCNN",
            Method::If => "IF",
            Method::Csa => "CSA",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rrcnn" => Ok(Method::Rrcnn),
            "if" => Ok(Method::If),
            "csa" => Ok(Method::Csa),
            _ => Err(Error::Parse(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentScore {
    /// `average`, `c1`, `c2`.
    pub name: String,
    pub mae: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub example: ExampleId,
    pub method: Method,
    pub components: Vec<ComponentScore>,
    /// `rho` of the predicted pair, for decomposition examples.
    pub rho: Option<f64>,
}

impl MetricReport {
    pub fn component(&self, name: &str) -> Option<&ComponentScore> {
        self.components.iter().find(|c| c.name == name)
    }
}

/// Reports plus the curves behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRun {
    pub example: ExampleId,
    pub signal: ExampleSignal,
    pub truth: Vec<(String, Vec<f64>)>,
    pub predictions: Vec<(Method, Vec<(String, Vec<f64>)>)>,
    pub reports: Vec<MetricReport>,
}

fn component_names(task: Task) -> Vec<String> {
    match task {
        Task::Average => vec!["average".into()],
        Task::Decompose => vec!["c1".into(), "c2".into()],
    }
}

/// Output of `method` on the example input, shaped like the truth.
fn predict(
    method: Method,
    example: ExampleId,
    signal: &ExampleSignal,
    models: &BTreeMap<TableId, ModelParams>,
) -> Result<Vec<Vec<f64>>> {
    let x = &signal.input;
    let xs = x.samples();
    let task = example.task();
    match method {
        Method::Rrcnn => {
            let table = example.table();
            let params = models
                .get(&table)
                .ok_or_else(|| Error::MissingModel(format!("no trained {table} model for {example}")))?;
            let d = decompose(x, params)?;
            match task {
                Task::Average => Ok(vec![d.residue.into_samples()]),
                Task::Decompose => {
                    if d.imfs.len() < 2 {
                        return Err(Error::ShapeMismatch(format!(
                            "{example} needs a two-block model, {table} model has {}",
                            d.imfs.len()
                        )));
                    }
                    Ok(d.imfs.into_iter().take(2).map(|s| s.into_samples()).collect())
                }
            }
        }
        Method::If => match task {
            Task::Average => {
                let (imf, _) = if_extract_imf(x, &IfConfig::default())?;
                Ok(vec![xs.iter().zip(imf.samples()).map(|(a, b)| a - b).collect()])
            }
            Task::Decompose => {
                let d = if_decompose(x, &IfConfig::default())?;
                let c1 = d.imfs.first().map_or_else(|| vec![0.0; xs.len()], |s| s.samples().to_vec());
                let c2 = d.imfs.get(1).unwrap_or(&d.residue).samples().to_vec();
                Ok(vec![c1, c2])
            }
        },
        Method::Csa => {
            let avg = csa_average(x)?.into_samples();
            match task {
                Task::Average => Ok(vec![avg]),
                // one envelope-mean split: detail, then mean
                Task::Decompose => Ok(vec![xs.iter().zip(&avg).map(|(a, b)| a - b).collect(), avg]),
            }
        }
    }
}

/// Runs every method in `methods` on the example and scores it.
pub fn run_example(
    example: ExampleId,
    methods: &[Method],
    models: &BTreeMap<TableId, ModelParams>,
    n: usize,
) -> Result<ExampleRun> {
    if methods.is_empty() {
        return Err(invalid("no methods requested"));
    }
    let signal = example.signal(n)?;
    let task = example.task();
    let names = component_names(task);
    let truth: Vec<(String, Vec<f64>)> = names
        .iter()
        .cloned()
        .zip(signal.truth(task)?.into_iter().map(|s| s.into_samples()))
        .collect();
    let mut reports = Vec::new();
    let mut predictions = Vec::new();
    for &method in methods {
        let pred = predict(method, example, &signal, models)?;
        let components = names
            .iter()
            .zip(&pred)
            .zip(&truth)
            .map(|((name, p), (_, t))| {
                Ok(ComponentScore {
                    name: name.clone(),
                    mae: mae_slice(p, t)?,
                    rmse: rmse_slice(p, t)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rho = match task {
            Task::Decompose => Some(rho_slice(&pred[0], &pred[1])?),
            Task::Average => None,
        };
        reports.push(MetricReport {
            example,
            method,
            components,
            rho,
        });
        predictions.push((method, names.iter().cloned().zip(pred).collect()));
    }
    Ok(ExampleRun {
        example,
        signal,
        truth,
        predictions,
        reports,
    })
}

/// Long-format metric table: `example,method,component,mae,rmse,rho`.
/// Pair rows carry only `rho`.
pub fn metrics_csv(reports: &[MetricReport]) -> String {
    let mut s = String::from("example,method,component,mae,rmse,rho\n");
    for r in reports {
        for c in &r.components {
            let _ = writeln!(s, "{},{},{},{},{},", r.example, r.method, c.name, fmt_f64(c.mae), fmt_f64(c.rmse));
        }
        if let Some(rho) = r.rho {
            let _ = writeln!(s, "{},{},c1:c2,,,{}", r.example, r.method, fmt_f64(rho));
        }
    }
    s
}

/// `t`, the truth curves, then one column per method and component.
pub fn plot_csv(run: &ExampleRun) -> String {
    let mut s = String::from("t");
    for (name, _) in &run.truth {
        let _ = write!(s, ",truth_{name}");
    }
    for (m, comps) in &run.predictions {
        for (name, _) in comps {
            let _ = write!(s, ",{}_{name}", m.to_string().to_ascii_lowercase());
        }
    }
    s.push('\n');
    let x = &run.signal.input;
    for k in 0..x.len() {
        s.push_str(&fmt_f64(x.time(k)));
        for (_, v) in &run.truth {
            let _ = write!(s, ",{}", fmt_f64(v[k]));
        }
        for (_, comps) in &run.predictions {
            for (_, v) in comps {
                let _ = write!(s, ",{}", fmt_f64(v[k]));
            }
        }
        s.push('\n');
    }
    s
}

pub fn write_metrics_csv(reports: &[MetricReport], path: &Path) -> Result<()> {
    fs::write(path, metrics_csv(reports)).map_err(|e| Error::io(path, e))
}

pub fn write_plot_csv(run: &ExampleRun, path: &Path) -> Result<()> {
    fs::write(path, plot_csv(run)).map_err(|e| Error::io(path, e))
}
