//! Evaluation indices and the example drivers.

mod examples;
mod metrics;
mod recipes;
mod report;

pub use examples::{ExampleId, ExampleSignal, Task};
pub use metrics::{mae, rho, rmse};
pub use recipes::{recipe, Recipe};
pub use report::{
    metrics_csv, plot_csv, run_example, write_metrics_csv, write_plot_csv, ComponentScore, ExampleRun, Method,
    MetricReport,
};
