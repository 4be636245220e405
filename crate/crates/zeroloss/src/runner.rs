//! Parallel Monte Carlo execution.

use rayon::prelude::*;
use zeroloss_core::geometry::DiskProblem;
use zeroloss_core::montecarlo::{run_trial, ExperimentConfig, TrialRecord};

use crate::error::{CliError, Result};

pub const THREADS_ENV: &str = "ZEROLOSS_THREADS";

/// `--threads`, else `ZEROLOSS_THREADS`, else every available core.
pub fn thread_count(flag: Option<usize>) -> Result<usize> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{THREADS_ENV} = `{v}` is not a thread count")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if n == 0 {
        return Err(CliError::Usage("thread count must be at least 1".into()));
    }
    Ok(n)
}

/// Runs every trial on `threads` workers. Records come back sorted by
/// `(n, trial_index)` and do not depend on the thread count.
pub fn run_parallel(config: &ExperimentConfig, problem: &DiskProblem, threads: usize) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let keys = config.trial_keys();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(|| {
        keys.par_iter()
            .map(|&(n, i)| run_trial(config, problem, n, i))
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use zeroloss_core::geometry::FeatureMap;
    use zeroloss_core::montecarlo::run_experiment;

    #[test]
    fn thread_count_does_not_change_records() {
        let mut config = ExperimentConfig::new(vec![8, 2, 4], 7, FeatureMap::Identity, 11);
        config.test_count = 500;
        let problem = DiskProblem::default();
        let serial = run_experiment(&config, &problem).unwrap();
        for threads in [1, 2, 5] {
            assert_eq!(run_parallel(&config, &problem, threads).unwrap(), serial);
        }
    }
}
