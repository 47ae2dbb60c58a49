//! Experiment drivers. Each takes a validated configuration and returns an
//! [`ExperimentReport`]; nothing here touches the file system.

mod modules;
mod stability;

use std::time::Instant;

use rayon::prelude::*;

use crate::config::{emit_config, Experiment, ExperimentConfig};
use crate::error::LabError;
use crate::report::ExperimentReport;

pub use modules::{par_maximal, strong_type};

/// Run one experiment. `suite` is handled by the runner.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let start = Instant::now();
    let mut report = match cfg.experiment {
        Experiment::SolveMa => modules::solve_ma(cfg),
        Experiment::SolveLma => modules::solve_lma(cfg),
        Experiment::Sections => modules::sections(cfg),
        Experiment::Cover => modules::cover(cfg),
        Experiment::Maximal => modules::maximal(cfg),
        Experiment::GoodSets => modules::goodsets(cfg),
        Experiment::Barrier => modules::barrier(cfg),
        Experiment::CofactorStability => stability::cofactor_stability(cfg),
        Experiment::SobolevStability => stability::sobolev_stability(cfg),
        Experiment::Approximation => stability::approximation(cfg),
        Experiment::ConvexW21e => stability::convex_w21e(cfg),
        Experiment::ContactSet => stability::contact_set(cfg),
        Experiment::W2pRatio => stability::w2p_ratio(cfg),
        Experiment::GeometricIteration => stability::geometric_iteration(cfg),
        Experiment::Suite => Err(LabError::Usage(
            "the suite is not a single experiment".to_string(),
        )),
    }?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

fn new_report(cfg: &ExperimentConfig) -> ExperimentReport {
    ExperimentReport::new(cfg.experiment.name(), emit_config(cfg))
}

/// Map over independent sweep points in parallel, keeping input order and
/// returning the first error in that order.
fn par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>, LabError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, LabError> + Sync + Send,
{
    items.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

/// `values[k + 1] < values[k]` for every `k`.
fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}
