#![allow(dead_code)]

use std::path::Path;

use anneal_core::{DriverKind, RunRecord};
use anneal_harness::config::{ExperimentConfig, MixedSeedMode, SpectrumSettings, StepPolicy};
use anneal_harness::records::{canonical_sort, read_records, to_jsonl};
use anneal_harness::runner::RECORDS_FILE;

/// A small configuration that runs in well under a second.
pub fn tiny_config(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        sizes: vec![3, 4],
        instances: 3,
        base_seed: 17,
        drivers: DriverKind::ALL.to_vec(),
        lambda: 1.0,
        total_time: 5.0,
        steps: StepPolicy::Fixed(400),
        spectrum: SpectrumSettings {
            coarse_points: 21,
            levels: 2,
            prominence: 0.0,
        },
        mixed_seeds: MixedSeedMode::PerSize,
        output_dir: dir.to_path_buf(),
        workers: Some(1),
    }
}

/// Sorted records with wall times zeroed, as JSON lines.
pub fn canonical_records(dir: &Path) -> String {
    let mut records: Vec<RunRecord> = read_records(&dir.join(RECORDS_FILE))
        .unwrap()
        .iter()
        .map(RunRecord::canonical)
        .collect();
    canonical_sort(&mut records);
    to_jsonl(&records)
}
