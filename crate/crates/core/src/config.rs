//! Generator configuration.
//!
//! Everything that affects generated content lives here and is hashed into the
//! manifest. The output directory and thread count are run options and do not
//! enter the hash.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gauss::DEFAULT_VOLUME;
use crate::geometry::{Viewpoint, DEFAULT_RADIUS};
use crate::render::{GridSpec, Pattern};

/// `(azimuth, elevation)` in degrees.
pub type ViewAngles = [f64; 2];

/// Which of the configured viewpoints a surface rule renders from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "views")]
pub enum ViewSelect {
    /// Every configured viewpoint.
    All,
    /// Each listed viewpoint.
    Each(Vec<ViewAngles>),
    /// One listed viewpoint per function, cycling through the list.
    Cycle(Vec<ViewAngles>),
}

/// One family of surface renders.
///
/// Applies to functions with `id % every == offset`. Let `k = id / every`; when
/// `angles` is non-empty the grid angle is `angles[k % angles.len()]`, and a
/// cycling view selection picks `views[(k / max(1, angles.len())) % views.len()]`.
/// With `alternate_lines`, line patterns use constant-x lines for even `k` and
/// constant-y lines for odd `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRule {
    pub name: String,
    pub grid: GridSpec,
    pub views: ViewSelect,
    #[serde(default)]
    pub angles: Vec<f64>,
    #[serde(default = "one")]
    pub every: u64,
    #[serde(default)]
    pub offset: u64,
    #[serde(default)]
    pub alternate_lines: bool,
}

fn one() -> u64 {
    1
}

/// Half-open function id range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdRange {
    pub start: u64,
    pub end: u64,
}

impl IdRange {
    pub const fn new(start: u64, end: u64) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, id: u64) -> bool {
        (self.start..self.end).contains(&id)
    }

    pub fn overlaps(&self, other: &IdRange) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Split ranges and subset sizes materialized as manifest tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetConfig {
    pub train: IdRange,
    pub val: IdRange,
    pub test: IdRange,
    pub train_size: usize,
    pub val_size: usize,
    pub test_size: usize,
}

impl Default for SubsetConfig {
    fn default() -> Self {
        Self {
            train: IdRange::new(0, 1800),
            val: IdRange::new(1800, 1900),
            test: IdRange::new(1900, 2000),
            train_size: 1800,
            val_size: 100,
            test_size: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub master_seed: u64,
    pub functions: IdRange,
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Normalized volume under every Gaussian component.
    #[serde(default = "default_volume")]
    pub volume: f64,
    pub viewpoints: Vec<ViewAngles>,
    pub surfaces: Vec<SurfaceRule>,
    #[serde(default)]
    pub subsets: Option<SubsetConfig>,
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

fn default_volume() -> f64 {
    DEFAULT_VOLUME
}

pub const DEFAULT_SEED: u64 = 20_210_901;

/// The nine viewpoints `{0, 30, 60}²`, ordered so that consecutive entries of a
/// cycle alternate elevation rows.
pub const OCTANT_CYCLE: [ViewAngles; 9] = [
    [0.0, 30.0],
    [0.0, 0.0],
    [0.0, 60.0],
    [30.0, 30.0],
    [30.0, 0.0],
    [30.0, 60.0],
    [60.0, 30.0],
    [60.0, 0.0],
    [60.0, 60.0],
];

pub const GENERIC_VIEW: ViewAngles = [45.0, 22.5];

fn octant() -> Vec<ViewAngles> {
    let mut v = OCTANT_CYCLE.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

impl Default for Config {
    /// Full-size recipe: 2000 functions, 10 viewpoints, 78,400 surface renders.
    fn default() -> Self {
        let mut viewpoints = octant();
        viewpoints.push(GENERIC_VIEW);
        let mut surfaces: Vec<SurfaceRule> = [20.0, 28.0, 37.0, 45.0]
            .iter()
            .map(|&s| SurfaceRule {
                name: format!("grid{s}"),
                grid: GridSpec::grid(s),
                views: ViewSelect::Each(octant()),
                angles: vec![],
                every: 1,
                offset: 0,
                alternate_lines: false,
            })
            .collect();
        surfaces.push(SurfaceRule {
            name: "grid20-generic".into(),
            grid: GridSpec::grid(20.0),
            views: ViewSelect::Each(vec![GENERIC_VIEW]),
            angles: vec![],
            every: 1,
            offset: 0,
            alternate_lines: false,
        });
        surfaces.push(SurfaceRule {
            name: "lines37".into(),
            grid: GridSpec::lines(Pattern::LinesU, 37.0),
            views: ViewSelect::Cycle(OCTANT_CYCLE.to_vec()),
            angles: vec![],
            every: 1,
            offset: 0,
            alternate_lines: true,
        });
        surfaces.push(SurfaceRule {
            name: "angled20".into(),
            grid: GridSpec::grid(20.0),
            views: ViewSelect::Cycle(OCTANT_CYCLE.to_vec()),
            angles: vec![30.0, 50.0, 60.0],
            every: 1,
            offset: 0,
            alternate_lines: false,
        });
        surfaces.push(SurfaceRule {
            name: "aniso20x28".into(),
            grid: GridSpec::grid(20.0).with_spacings(20.0, 28.0),
            views: ViewSelect::Cycle(OCTANT_CYCLE.to_vec()),
            angles: vec![],
            every: 5,
            offset: 0,
            alternate_lines: false,
        });
        Self {
            master_seed: DEFAULT_SEED,
            functions: IdRange::new(0, 2000),
            radius: DEFAULT_RADIUS,
            volume: DEFAULT_VOLUME,
            viewpoints,
            surfaces,
            subsets: Some(SubsetConfig::default()),
        }
    }
}

impl Config {
    /// 5 functions × 2 viewpoints × 2 markings, no subsets.
    pub fn tiny() -> Self {
        Self {
            master_seed: DEFAULT_SEED,
            functions: IdRange::new(0, 5),
            radius: DEFAULT_RADIUS,
            volume: DEFAULT_VOLUME,
            viewpoints: vec![[30.0, 30.0], [0.0, 60.0]],
            surfaces: vec![
                SurfaceRule {
                    name: "grid20".into(),
                    grid: GridSpec::grid(20.0),
                    views: ViewSelect::All,
                    angles: vec![],
                    every: 1,
                    offset: 0,
                    alternate_lines: false,
                },
                SurfaceRule {
                    name: "lines37".into(),
                    grid: GridSpec::lines(Pattern::LinesU, 37.0),
                    views: ViewSelect::All,
                    angles: vec![],
                    every: 1,
                    offset: 0,
                    alternate_lines: false,
                },
            ],
            subsets: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn viewpoint(&self, angles: ViewAngles) -> Result<Viewpoint> {
        Viewpoint::with_radius(self.radius, angles[0], angles[1])
    }

    /// SHA-256 over the canonical JSON form.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn validate(&self) -> Result<()> {
        if self.functions.start >= self.functions.end {
            return Err(Error::Config("function range is empty".into()));
        }
        if !(self.volume > 0.0 && self.volume.is_finite()) {
            return Err(Error::Config(format!("volume {} must be positive", self.volume)));
        }
        if self.viewpoints.is_empty() {
            return Err(Error::Config("no viewpoints".into()));
        }
        for (i, v) in self.viewpoints.iter().enumerate() {
            self.viewpoint(*v)?;
            if self.viewpoints[..i].contains(v) {
                return Err(Error::Config(format!("duplicate viewpoint {v:?}")));
            }
        }
        for rule in &self.surfaces {
            let ctx = |m: String| Error::Config(format!("surface rule `{}`: {m}", rule.name));
            rule.grid.validate().map_err(|e| ctx(e.to_string()))?;
            for &a in &rule.angles {
                rule.grid.with_angle(a).validate().map_err(|e| ctx(e.to_string()))?;
            }
            if rule.every == 0 || rule.offset >= rule.every {
                return Err(ctx(format!("offset {} must be below every {}", rule.offset, rule.every)));
            }
            let listed = match &rule.views {
                ViewSelect::All => &[][..],
                ViewSelect::Each(v) | ViewSelect::Cycle(v) => {
                    if v.is_empty() {
                        return Err(ctx("empty view list".into()));
                    }
                    &v[..]
                }
            };
            if let Some(v) = listed.iter().find(|v| !self.viewpoints.contains(v)) {
                return Err(ctx(format!("view {v:?} has no configured depth viewpoint")));
            }
        }
        if let Some(s) = &self.subsets {
            let ranges = [("train", s.train), ("val", s.val), ("test", s.test)];
            for (name, r) in ranges {
                if r.start >= r.end || r.start < self.functions.start || r.end > self.functions.end {
                    return Err(Error::Config(format!(
                        "{name} range {}..{} outside functions {}..{}",
                        r.start, r.end, self.functions.start, self.functions.end
                    )));
                }
            }
            if s.train.overlaps(&s.val) || s.train.overlaps(&s.test) || s.val.overlaps(&s.test) {
                return Err(Error::Config("train/val/test ranges overlap".into()));
            }
            if s.train_size == 0 || s.val_size == 0 || s.test_size == 0 {
                return Err(Error::Config("subset sizes must be positive".into()));
            }
        }
        Ok(())
    }
}
