//! Configuration-driven runner for the `qpspec` tasks: validated JSON
//! configurations, content-addressed caching, atomic outputs with provenance
//! headers and a run record per invocation.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod probe;
pub mod tasks;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub use artifacts::{Artifact, RunRecord};
pub use config::{Params, RunConfig, Task};
pub use error::{CliError, Result};

use artifacts::{
    cache_entry, load_cached, sha256_hex, write_atomically, OutputEntry, Timings, RECORD_FILE, TOOL, VERSION,
};

#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Overrides the configuration's `out_dir`.
    pub out_dir: Option<PathBuf>,
    /// Completed runs are stored under `<cache_dir>/<config hash>`.
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
}

/// Hash of the canonical configuration. Object keys are sorted, so field
/// order in the input file does not matter.
pub fn config_hash(canonical: &RunConfig) -> Result<(String, serde_json::Value)> {
    let value = serde_json::to_value(canonical)?;
    Ok((sha256_hex(serde_json::to_string(&value)?.as_bytes()), value))
}

/// Runs `task` without touching the filesystem.
pub fn compute(config: &RunConfig, task: Task, threads: Option<usize>) -> Result<(RunConfig, tasks::Outcome)> {
    let issues = config.validate(task);
    if !issues.is_empty() {
        return Err(CliError::Validation(issues));
    }
    let canonical = config.canonical(task);
    let alpha = canonical.alpha.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    let outcome = pool.install(|| tasks::execute(task, &canonical.potential, &alpha, &canonical.params))?;
    Ok((canonical, outcome))
}

fn replay(entry: &Path, out_dir: &Path, started: Instant) -> Result<Option<RunRecord>> {
    let Some((mut record, files)) = load_cached(entry) else {
        return Ok(None);
    };
    record.cache_hit = true;
    record.timings = Timings { total_ms: started.elapsed().as_secs_f64() * 1e3, compute_ms: 0.0 };
    let mut all = files;
    all.push((RECORD_FILE.to_string(), serde_json::to_string_pretty(&record)? + "\n"));
    write_atomically(out_dir, &all)?;
    Ok(Some(record))
}

/// Validates, computes (or replays from the cache) and writes every artifact
/// plus `run_record.json` into the output directory.
pub fn run(config: &RunConfig, task: Task, opts: &Options) -> Result<RunRecord> {
    let started = Instant::now();
    let issues = config.validate(task);
    if !issues.is_empty() {
        return Err(CliError::Validation(issues));
    }
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(task.as_str()));
    let (hash, _) = config_hash(&config.canonical(task))?;
    if let Some(cache) = &opts.cache_dir {
        if let Some(record) = replay(&cache_entry(cache, &hash), &out_dir, started)? {
            return Ok(record);
        }
    }

    let compute_start = Instant::now();
    let (canonical, outcome) = compute(config, task, opts.threads)?;
    let compute_ms = compute_start.elapsed().as_secs_f64() * 1e3;
    let (_, value) = config_hash(&canonical)?;

    let mut files = Vec::with_capacity(outcome.artifacts.len() + 1);
    let mut outputs = Vec::with_capacity(outcome.artifacts.len());
    for a in &outcome.artifacts {
        let rendered = a.render(&hash);
        outputs.push(OutputEntry {
            file: a.name.clone(),
            kind: a.kind,
            sha256: sha256_hex(rendered.as_bytes()),
            body_sha256: sha256_hex(a.body.as_bytes()),
            bytes: rendered.len(),
        });
        files.push((a.name.clone(), rendered));
    }
    let record = RunRecord {
        config_hash: hash.clone(),
        tool: TOOL.to_string(),
        tool_version: VERSION.to_string(),
        task: task.as_str().to_string(),
        config: value,
        cache_hit: false,
        timings: Timings { total_ms: started.elapsed().as_secs_f64() * 1e3, compute_ms },
        outputs,
        warnings: outcome.warnings,
        health_failures: outcome.health_failures,
    };
    files.push((RECORD_FILE.to_string(), serde_json::to_string_pretty(&record)? + "\n"));
    write_atomically(&out_dir, &files)?;
    if let Some(cache) = &opts.cache_dir {
        let entry = cache_entry(cache, &hash);
        if fs::metadata(&entry).is_err() {
            write_atomically(&entry, &files)?;
        }
    }
    Ok(record)
}
