use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::subsets::assign_tags;
use super::tags::SubsetTag;
use crate::config::{Config, ViewAngles, ViewSelect};
use crate::error::{Error, Result};
use crate::geometry::Viewpoint;
use crate::render::{GridSpec, Pattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Function,
    Depth,
    Surface,
}

/// One output file. Depth jobs carry a viewpoint; surface jobs carry a
/// viewpoint, the marking parameters and the path of their paired depth map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderJob {
    pub kind: JobKind,
    pub path: String,
    pub function_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viewpoint: Option<Viewpoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<SubsetTag>,
}

impl RenderJob {
    pub fn view_angles(&self) -> Option<ViewAngles> {
        self.viewpoint.map(|v| [v.azimuth_deg, v.elevation_deg])
    }
}

pub fn function_path(id: u64) -> String {
    format!("functions/f{id:05}.txt")
}

fn view_stem(v: ViewAngles) -> String {
    format!("a{:05.1}_e{:04.1}", v[0], v[1])
}

pub fn depth_path(id: u64, v: ViewAngles) -> String {
    format!("depth/f{id:05}/{}.png", view_stem(v))
}

pub fn surface_path(id: u64, v: ViewAngles, g: &GridSpec) -> String {
    format!(
        "surfaces/f{id:05}/{}_{}x{}_g{}_{}.png",
        g.pattern, g.spacing_u, g.spacing_v, g.grid_angle_deg, view_stem(v)
    )
}

/// Expands a configuration into the full, sorted job list, with subset tags.
pub fn plan_dataset(config: &Config) -> Result<Vec<RenderJob>> {
    config.validate()?;
    let mut jobs = Vec::new();
    for id in config.functions.start..config.functions.end {
        jobs.push(RenderJob {
            kind: JobKind::Function,
            path: function_path(id),
            function_id: id,
            viewpoint: None,
            grid: None,
            depth_path: None,
            rule: None,
            tags: vec![],
        });
        for &v in &config.viewpoints {
            jobs.push(RenderJob {
                kind: JobKind::Depth,
                path: depth_path(id, v),
                function_id: id,
                viewpoint: Some(config.viewpoint(v)?),
                grid: None,
                depth_path: None,
                rule: None,
                tags: vec![],
            });
        }
        for rule in &config.surfaces {
            if id % rule.every != rule.offset {
                continue;
            }
            let k = id / rule.every;
            let mut grid = rule.grid;
            if !rule.angles.is_empty() {
                grid.grid_angle_deg = rule.angles[(k % rule.angles.len() as u64) as usize];
            }
            if rule.alternate_lines && grid.pattern.is_lines() {
                grid.pattern = if k % 2 == 0 { Pattern::LinesU } else { Pattern::LinesV };
            }
            let views: Vec<ViewAngles> = match &rule.views {
                ViewSelect::All => config.viewpoints.clone(),
                ViewSelect::Each(list) => list.clone(),
                ViewSelect::Cycle(list) => {
                    let stride = rule.angles.len().max(1) as u64;
                    vec![list[((k / stride) % list.len() as u64) as usize]]
                }
            };
            for v in views {
                jobs.push(RenderJob {
                    kind: JobKind::Surface,
                    path: surface_path(id, v, &grid),
                    function_id: id,
                    viewpoint: Some(config.viewpoint(v)?),
                    grid: Some(grid),
                    depth_path: Some(depth_path(id, v)),
                    rule: Some(rule.name.clone()),
                    tags: vec![],
                });
            }
        }
    }
    jobs.sort_by(|a, b| a.path.cmp(&b.path));

    let mut seen = HashSet::new();
    for j in &jobs {
        if !seen.insert(j.path.as_str()) {
            return Err(Error::Config(format!("two jobs write `{}`", j.path)));
        }
    }
    if let Some(subsets) = &config.subsets {
        assign_tags(&mut jobs, subsets, config.master_seed)?;
    }
    Ok(jobs)
}

/// Job counts by kind: `(functions, depth maps, surfaces)`.
pub fn job_counts(jobs: &[RenderJob]) -> (usize, usize, usize) {
    jobs.iter().fold((0, 0, 0), |(f, d, s), j| match j.kind {
        JobKind::Function => (f + 1, d, s),
        JobKind::Depth => (f, d + 1, s),
        JobKind::Surface => (f, d, s + 1),
    })
}
