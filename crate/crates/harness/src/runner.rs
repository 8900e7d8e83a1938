//! Parallel execution of (instance, driver) runs with a single record writer.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use anneal_core::dynamics::{certify_steps, propagate_with};
use anneal_core::instance::{ground_from_table, DEFAULT_DEGENERACY_TOL};
use anneal_core::spectrum::{gap_stats, trace_spectrum_with, TraceOptions};
use anneal_core::{
    generate_instance, AnnealError, AnnealSpec, AnnealingHamiltonian, Driver, DriverKind, RunRecord, RunStatus,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, MixedSeedMode, StepPolicy};
use crate::error::{HarnessError, Result};
use crate::records::RecordStore;
use crate::seeds::{derive_seed, mixed_seed_for_instance, mixed_seed_for_size};

/// Environment variable overriding the configured worker count.
pub const WORKERS_ENV: &str = "ANNEAL_WORKERS";
pub const RECORDS_FILE: &str = "records.jsonl";

pub fn software_version() -> String {
    format!("anneal {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Task {
    pub n: usize,
    pub index: u64,
    pub seed: u64,
    pub driver: DriverKind,
    pub mixed_seed: Option<u64>,
    pub steps: usize,
}

/// Worker count from the environment, else the configuration, else the
/// available parallelism.
pub fn resolve_workers(config: &ExperimentConfig) -> Result<usize> {
    if let Ok(value) = std::env::var(WORKERS_ENV) {
        return match value.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(HarnessError::Config(format!("{WORKERS_ENV}='{value}' is not a positive integer"))),
        };
    }
    Ok(config
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get())))
}

fn mixed_seed(config: &ExperimentConfig, n: usize, instance_seed: u64) -> u64 {
    match config.mixed_seeds {
        MixedSeedMode::PerSize => mixed_seed_for_size(config.base_seed, n),
        MixedSeedMode::PerInstance => mixed_seed_for_instance(instance_seed),
    }
}

fn spec_for(config: &ExperimentConfig, n: usize, driver: DriverKind, mixed_seed: u64) -> anneal_core::Result<AnnealSpec> {
    AnnealSpec::new(Driver::from_kind(driver, n, mixed_seed), config.lambda, config.total_time)
}

/// Step count per size; certified sizes use the largest count certified
/// over the configured drivers on the size's first instance.
pub fn resolve_steps(config: &ExperimentConfig) -> Result<BTreeMap<usize, usize>> {
    let mut out = BTreeMap::new();
    for &n in &config.sizes {
        let steps = match (&config.steps, config.steps.steps_for(n)) {
            (_, Some(steps)) => steps,
            (StepPolicy::AutoCertify { start, max }, None) => {
                let seed = derive_seed(config.base_seed, n, 0);
                let inst = generate_instance(n, seed)?;
                let mut best = *start;
                for &driver in &config.drivers {
                    let spec = spec_for(config, n, driver, mixed_seed(config, n, seed))?;
                    best = best.max(certify_steps(&inst, &spec, *start, *max)?.steps);
                }
                best
            }
            _ => return Err(HarnessError::Config(format!("no step count for size {n}"))),
        };
        out.insert(n, steps);
    }
    Ok(out)
}

pub fn plan_tasks(config: &ExperimentConfig, steps: &BTreeMap<usize, usize>) -> Vec<Task> {
    let mut tasks = Vec::new();
    for &n in &config.sizes {
        for index in 0..config.instances as u64 {
            let seed = derive_seed(config.base_seed, n, index);
            for &driver in &config.drivers {
                tasks.push(Task {
                    n,
                    index,
                    seed,
                    driver,
                    mixed_seed: (driver == DriverKind::Mixed).then(|| mixed_seed(config, n, seed)),
                    steps: steps[&n],
                });
            }
        }
    }
    tasks
}

/// Propagation and spectrum of one task. Failures become failed records
/// carrying whatever was measured before the error.
pub fn run_task(config: &ExperimentConfig, task: &Task, config_hash: &str) -> RunRecord {
    let start = Instant::now();
    let mut record = RunRecord {
        n: task.n,
        seed: task.seed,
        driver: task.driver,
        mixed_seed: task.mixed_seed,
        steps: task.steps,
        success_probability: None,
        min_gap: None,
        tau_star: None,
        anticrossings: None,
        norm_drift: None,
        wall_time: 0.0,
        status: RunStatus::Ok,
        config_hash: config_hash.to_string(),
        version: software_version(),
    };
    let outcome = (|| -> anneal_core::Result<()> {
        let inst = generate_instance(task.n, task.seed)?;
        let spec = spec_for(config, task.n, task.driver, task.mixed_seed.unwrap_or(0))?;
        let ham = AnnealingHamiltonian::new(&inst, &spec)?;
        let ground = ground_from_table(ham.problem_diagonal(), DEFAULT_DEGENERACY_TOL);
        match propagate_with(&ham, &ground, task.steps) {
            Ok(result) => {
                record.success_probability = Some(result.success_probability);
                record.norm_drift = Some(result.norm_drift);
            }
            Err(AnnealError::Convergence { drift, steps }) => {
                record.norm_drift = Some(drift);
                return Err(AnnealError::Convergence { drift, steps });
            }
            Err(e) => return Err(e),
        }
        let options = TraceOptions {
            coarse_points: config.spectrum.coarse_points,
            levels: config.spectrum.levels,
            ..TraceOptions::default()
        };
        let trace = trace_spectrum_with(&ham, &options)?;
        let stats = gap_stats(&trace, config.spectrum.prominence)?;
        record.min_gap = Some(stats.min_gap);
        record.tau_star = Some(stats.tau_star);
        record.anticrossings = Some(stats.anticrossings);
        Ok(())
    })();
    if let Err(e) = outcome {
        record.status = RunStatus::Failed { message: e.to_string() };
    }
    record.wall_time = start.elapsed().as_secs_f64();
    record
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub records_path: PathBuf,
    pub planned: usize,
    pub skipped: usize,
    pub executed: usize,
    pub failed: usize,
    pub workers: usize,
}

pub fn run_ensemble(config: &ExperimentConfig) -> Result<RunSummary> {
    run_ensemble_with(config, None, |_| {})
}

/// Runs every planned task not yet present in the record file. `limit`
/// caps the number of tasks executed in this call. `on_record` sees each
/// record after it is persisted.
pub fn run_ensemble_with<F>(config: &ExperimentConfig, limit: Option<usize>, mut on_record: F) -> Result<RunSummary>
where
    F: FnMut(&RunRecord),
{
    config.validate()?;
    let hash = config.hash();
    let workers = resolve_workers(config)?;
    let path = config.output_dir.join(RECORDS_FILE);
    let (mut store, existing) = RecordStore::open(&path)?;
    if let Some(other) = existing.iter().find(|r| r.config_hash != hash) {
        return Err(HarnessError::Config(format!(
            "{} holds records of configuration {}, not {hash}",
            path.display(),
            other.config_hash
        )));
    }
    let steps = resolve_steps(config)?;
    let planned = plan_tasks(config, &steps);
    let mut pending: Vec<Task> = planned
        .iter()
        .filter(|t| !store.contains(&(t.n, t.seed, t.driver)))
        .copied()
        .collect();
    let skipped = planned.len() - pending.len();
    if let Some(limit) = limit {
        pending.truncate(limit);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<RunRecord>();
    let mut executed = 0;
    let mut failed = 0;
    let mut write_error = None;
    std::thread::scope(|scope| {
        let abort = &abort;
        let pending = &pending;
        let hash = &hash;
        scope.spawn(move || {
            pool.install(|| {
                pending.par_iter().for_each_with(tx, |tx, task| {
                    if !abort.load(Ordering::Relaxed) {
                        let _ = tx.send(run_task(config, task, hash));
                    }
                });
            });
        });
        for record in rx {
            if write_error.is_some() {
                continue;
            }
            match store.append(&record) {
                Ok(_) => {
                    executed += 1;
                    if !record.is_ok() {
                        failed += 1;
                    }
                    on_record(&record);
                }
                Err(e) => {
                    abort.store(true, Ordering::Relaxed);
                    write_error = Some(e);
                }
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e);
    }
    debug_assert!(pending.iter().all(|t| store.contains(&(t.n, t.seed, t.driver))));
    Ok(RunSummary {
        records_path: path,
        planned: planned.len(),
        skipped,
        executed,
        failed,
        workers,
    })
}
