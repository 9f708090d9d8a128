use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::Args;
use rrcnn::eval::{run_example, write_metrics_csv, write_plot_csv, ExampleId, Method};
use rrcnn::lab::DEFAULT_N;
use rrcnn::model::load_weights;

use super::{ensure_dir, flag};
use crate::config::{usage, RunConfig};
use crate::ConfigArgs;

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// E1 .. E8.
    #[arg(long)]
    example: Option<String>,
    /// Checkpoint trained on the example's table.
    #[arg(long)]
    model: Option<String>,
    /// Comma-separated subset of rrcnn, if, csa.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<String>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

pub fn run(a: EvalArgs) -> Result<ExitCode> {
    let n = DEFAULT_N.to_string();
    let rc = RunConfig::resolve(
        "eval",
        &[("example", ""), ("model", ""), ("methods", "rrcnn,if,csa"), ("n", &n), ("out", "")],
        a.cfg.config.as_deref(),
        a.cfg.section.as_deref(),
        vec![
            ("example", a.example),
            ("model", a.model),
            ("methods", a.methods),
            ("n", flag(&a.n)),
            ("out", a.out),
        ],
    )?;
    let example: ExampleId = rc.required("example")?.parse().map_err(|e| usage(format!("{e}")))?;
    let methods = rc
        .required("methods")?
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Method>().map_err(|e| usage(format!("{e}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut models = BTreeMap::new();
    if let Some(path) = rc.opt("model") {
        models.insert(example.table(), load_weights(Path::new(path))?);
    }
    let out = PathBuf::from(rc.required("out")?);

    let run = run_example(example, &methods, &models, rc.get("n")?)?;
    ensure_dir(&out)?;
    write_metrics_csv(&run.reports, &out.join("metrics.csv"))?;
    write_plot_csv(&run, &out.join("plot.csv"))?;
    rc.write_snapshot(&out.join("resolved_config.txt"))?;

    for r in &run.reports {
        for c in &r.components {
            println!("{example} {:<5} {:<7} mae {:.4} rmse {:.4}", r.method, c.name, c.mae, c.rmse);
        }
        if let Some(rho) = r.rho {
            println!("{example} {:<5} c1:c2   rho {rho:.4}", r.method);
        }
    }
    Ok(ExitCode::SUCCESS)
}
