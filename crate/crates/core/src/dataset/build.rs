use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::manifest::{DatasetManifest, MANIFEST_FILE};
use super::plan::{plan_dataset, JobKind, RenderJob};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::gauss::{eval_function_with_volume, synth_function, write_function};
use crate::geometry::DepthMap;
use crate::imageio::{encode_depth_png, encode_surface_png};
use crate::raster::{rasterize, IMAGE_SIZE};
use crate::render::SurfaceImage;

pub const CONFIG_ECHO_FILE: &str = "config.toml";

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Worker threads; `None` uses the available parallelism.
    pub threads: Option<usize>,
    /// Reuse files whose checksum matches an existing manifest.
    pub resume: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobFailure {
    pub path: String,
    pub function_id: u64,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct BuildReport {
    pub manifest: DatasetManifest,
    pub executed: usize,
    pub skipped: usize,
    pub failures: Vec<JobFailure>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(root: &Path, rel: &str, bytes: &[u8]) -> Result<()> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))
}

/// Produces every pending job of one function. Returns `(path, sha or error)`.
fn run_function(config: &Config, root: &Path, id: u64, jobs: &[&RenderJob]) -> Vec<(String, Result<String>)> {
    let f = synth_function(config.master_seed, id);
    let needs_field = jobs.iter().any(|j| j.kind != JobKind::Function);
    let field = needs_field.then(|| eval_function_with_volume(&f, IMAGE_SIZE, IMAGE_SIZE, config.volume));

    // group image jobs by viewpoint so each z-buffer is rendered once
    let mut by_view: BTreeMap<String, Vec<&RenderJob>> = BTreeMap::new();
    let mut out = Vec::with_capacity(jobs.len());
    for j in jobs {
        match j.kind {
            JobKind::Function => {
                let bytes = write_function(&f).into_bytes();
                let res = write_file(root, &j.path, &bytes).map(|_| sha256_hex(&bytes));
                out.push((j.path.clone(), res));
            }
            JobKind::Depth => by_view.entry(j.path.clone()).or_default().push(j),
            JobKind::Surface => by_view
                .entry(j.depth_path.clone().expect("surface jobs carry a depth path"))
                .or_default()
                .push(j),
        }
    }
    for group in by_view.values() {
        let v = group[0].viewpoint.expect("image jobs carry a viewpoint");
        let raster = rasterize(field.as_ref().expect("field evaluated"), &v);
        for j in group {
            let bytes = match j.kind {
                JobKind::Depth => encode_depth_png(&DepthMap::from_raster(&raster)),
                _ => encode_surface_png(&SurfaceImage::from_raster(
                    &raster,
                    j.grid.as_ref().expect("surface jobs carry a grid"),
                )),
            };
            let res = write_file(root, &j.path, &bytes).map(|_| sha256_hex(&bytes));
            out.push((j.path.clone(), res));
        }
    }
    out
}

fn existing_checksums(root: &Path, config_hash: &str) -> HashMap<String, String> {
    let Ok(m) = DatasetManifest::load(root.join(MANIFEST_FILE)) else {
        return HashMap::new();
    };
    if m.header.config_hash != config_hash {
        return HashMap::new();
    }
    m.records
        .into_iter()
        .filter_map(|r| r.sha256.map(|s| (r.job.path, s)))
        .collect()
}

/// Generates all files of `config` under `out_dir` and writes the manifest.
///
/// Jobs run in parallel, one function per task; file contents depend only on
/// the job, so the output is identical for any thread count. Per-job failures
/// are collected rather than aborting the build; failed records keep a null
/// checksum and are retried by the next resumed build.
pub fn build(config: &Config, out_dir: &Path, opts: &BuildOptions) -> Result<BuildReport> {
    let jobs = plan_dataset(config)?;
    let config_hash = config.content_hash();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let previous = if opts.resume {
        existing_checksums(out_dir, &config_hash)
    } else {
        HashMap::new()
    };
    let reused: HashMap<String, String> = pool.install(|| {
        jobs.par_iter()
            .filter_map(|j| {
                let sha = previous.get(&j.path)?;
                let bytes = fs::read(out_dir.join(&j.path)).ok()?;
                (&sha256_hex(&bytes) == sha).then(|| (j.path.clone(), sha.clone()))
            })
            .collect()
    });

    let mut pending: BTreeMap<u64, Vec<&RenderJob>> = BTreeMap::new();
    for j in jobs.iter().filter(|j| !reused.contains_key(&j.path)) {
        pending.entry(j.function_id).or_default().push(j);
    }
    let root: PathBuf = out_dir.to_path_buf();
    let results: Vec<(String, Result<String>)> = pool.install(|| {
        pending
            .par_iter()
            .flat_map_iter(|(&id, js)| run_function(config, &root, id, js))
            .collect()
    });

    let executed = results.len();
    let mut fresh = HashMap::with_capacity(results.len());
    let mut failures = Vec::new();
    for (path, res) in results {
        match res {
            Ok(sha) => {
                fresh.insert(path, sha);
            }
            Err(e) => {
                let function_id = jobs
                    .iter()
                    .find(|j| j.path == path)
                    .map_or(0, |j| j.function_id);
                failures.push(JobFailure {
                    path,
                    function_id,
                    error: e.to_string(),
                });
            }
        }
    }
    failures.sort_by(|a, b| a.path.cmp(&b.path));

    let mut manifest =
        DatasetManifest::from_jobs(jobs, config.master_seed, config_hash, config.subsets.clone());
    for r in &mut manifest.records {
        r.sha256 = reused
            .get(&r.job.path)
            .or_else(|| fresh.get(&r.job.path))
            .cloned();
    }
    manifest.validate()?;
    manifest.save(out_dir.join(MANIFEST_FILE))?;
    let echo = out_dir.join(CONFIG_ECHO_FILE);
    fs::write(&echo, config.to_toml()).map_err(|e| Error::io(&echo, e))?;

    Ok(BuildReport {
        manifest,
        executed,
        skipped: reused.len(),
        failures,
    })
}
