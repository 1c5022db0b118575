//! Line-delimited JSON index of a dataset.
//!
//! The first line is a [`ManifestHeader`]; every following line is one
//! [`ManifestRecord`]. Paths are relative to the directory holding the
//! manifest. The schema is in `docs/manifest.schema.json`.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::plan::{job_counts, JobKind, RenderJob};
use super::tags::SubsetTag;
use crate::config::SubsetConfig;
use crate::error::{Error, Result};

pub const MANIFEST_FORMAT: &str = "surfacegrid-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub functions: usize,
    pub depth: usize,
    pub surfaces: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub format: String,
    pub master_seed: u64,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<SubsetConfig>,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    #[serde(flatten)]
    pub job: RenderJob,
    /// Hex SHA-256 of the file, `null` while the file has not been produced.
    pub sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub header: ManifestHeader,
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    pub fn from_jobs(
        jobs: Vec<RenderJob>,
        master_seed: u64,
        config_hash: String,
        splits: Option<SubsetConfig>,
    ) -> Self {
        let (functions, depth, surfaces) = job_counts(&jobs);
        Self {
            header: ManifestHeader {
                format: MANIFEST_FORMAT.into(),
                master_seed,
                config_hash,
                splits,
                counts: Counts {
                    functions,
                    depth,
                    surfaces,
                },
            },
            records: jobs
                .into_iter()
                .map(|job| ManifestRecord { job, sha256: None })
                .collect(),
        }
    }

    pub fn jobs(&self) -> Vec<RenderJob> {
        self.records.iter().map(|r| r.job.clone()).collect()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &ManifestRecord> {
        self.records.iter().filter(|r| r.job.kind == JobKind::Surface)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Manifest("empty manifest".into()))?;
        let header: ManifestHeader = serde_json::from_str(first)
            .map_err(|e| Error::Manifest(format!("line 1: {e}")))?;
        if header.format != MANIFEST_FORMAT {
            return Err(Error::Manifest(format!("unsupported format `{}`", header.format)));
        }
        let records = lines
            .map(|(n, l)| {
                serde_json::from_str(l).map_err(|e| Error::Manifest(format!("line {}: {e}", n + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { header, records })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Writes through a temporary file so a crash never leaves a torn manifest.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("jsonl.tmp");
        fs::write(&tmp, self.to_jsonl()).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    /// SHA-256 of the serialized manifest.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }

    /// Checks pairing, uniqueness, counts and split hygiene.
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Manifest(m));
        let mut by_path: HashMap<&str, &RenderJob> = HashMap::with_capacity(self.records.len());
        for r in &self.records {
            if by_path.insert(r.job.path.as_str(), &r.job).is_some() {
                return err(format!("duplicate path `{}`", r.job.path));
            }
        }
        let (functions, depth, surfaces) = job_counts(&self.jobs());
        let counts = Counts {
            functions,
            depth,
            surfaces,
        };
        if counts != self.header.counts {
            return err(format!("header counts {:?} but records give {counts:?}", self.header.counts));
        }
        for r in self.surfaces() {
            let s = &r.job;
            let Some(dp) = &s.depth_path else {
                return err(format!("surface `{}` has no depth path", s.path));
            };
            match by_path.get(dp.as_str()) {
                Some(d) if d.kind == JobKind::Depth => {
                    if d.function_id != s.function_id || d.viewpoint != s.viewpoint {
                        return err(format!("surface `{}` and depth `{dp}` disagree", s.path));
                    }
                }
                _ => return err(format!("surface `{}` references missing depth `{dp}`", s.path)),
            }
        }
        if let Some(sp) = &self.header.splits {
            if sp.train.overlaps(&sp.val) || sp.train.overlaps(&sp.test) || sp.val.overlaps(&sp.test) {
                return err("train/val/test function ranges overlap".into());
            }
            for r in &self.records {
                for t in &r.job.tags {
                    let range = match t {
                        SubsetTag::Train(_) => sp.train,
                        SubsetTag::Val(_) => sp.val,
                        SubsetTag::Test(_) => sp.test,
                    };
                    if !range.contains(r.job.function_id) {
                        return err(format!(
                            "`{}` (function {}) tagged {t} outside {}..{}",
                            r.job.path, r.job.function_id, range.start, range.end
                        ));
                    }
                }
            }
        } else if self.records.iter().any(|r| !r.job.tags.is_empty()) {
            return err("records carry subset tags but the header has no split ranges".into());
        }
        Ok(())
    }
}
