use std::path::Path;
use std::process::ExitCode;

use anyhow::Result;
use clap::Args;
use rrcnn::lab::{build_table_dataset, write_dataset, TableId, DEFAULT_N};

use super::{ensure_dir, flag};
use crate::config::{usage, RunConfig};
use crate::ConfigArgs;

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Table id: T2, T6, T8, T10 or T12.
    #[arg(long)]
    table: Option<String>,
    /// Samples per signal.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

pub fn run(a: GenArgs) -> Result<ExitCode> {
    let n = DEFAULT_N.to_string();
    let rc = RunConfig::resolve(
        "gen",
        &[("table", ""), ("n", &n), ("seed", "0"), ("out", "")],
        a.cfg.config.as_deref(),
        a.cfg.section.as_deref(),
        vec![
            ("table", a.table),
            ("n", flag(&a.n)),
            ("seed", flag(&a.seed)),
            ("out", a.out),
        ],
    )?;
    let table: TableId = rc
        .required("table")?
        .parse()
        .map_err(|e| usage(format!("{e}")))?;
    let n: usize = rc.get("n")?;
    let seed: u64 = rc.get("seed")?;
    let out = Path::new(rc.required("out")?);
    let set = build_table_dataset(table, n, seed)?;
    ensure_dir(out)?;
    let manifest = write_dataset(&set, out, &table.to_string(), seed)?;
    rc.write_snapshot(&out.join("resolved_config.txt"))?;
    println!(
        "{table}: {} records of {} samples ({} train) written to {}",
        manifest.records,
        manifest.n,
        set.count(rrcnn::Split::Train),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}
