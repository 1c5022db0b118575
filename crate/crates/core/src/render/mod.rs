//! Binary white-on-black renders of grid- and line-marked surfaces.
//!
//! Marking lines live in the surface's parameter plane: a fragment is white when
//! the world `(x, y)` it was interpolated from passes [`line_mask`]. The body of
//! the surface is opaque black, so markings behind a nearer part of the surface
//! are hidden.

mod binarize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{FieldGrid, DOMAIN_SIZE};
use crate::geometry::{sin_cos_deg, Viewpoint};
use crate::raster::{rasterize, Raster};

pub use binarize::{binarize_real_plot, otsu_level, Threshold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Grid,
    /// Lines of constant x only.
    LinesU,
    /// Lines of constant y only.
    LinesV,
}

impl Pattern {
    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::Grid => "grid",
            Pattern::LinesU => "lines_u",
            Pattern::LinesV => "lines_v",
        }
    }

    pub fn is_lines(self) -> bool {
        !matches!(self, Pattern::Grid)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Pattern::Grid),
            "lines_u" => Ok(Pattern::LinesU),
            "lines_v" => Ok(Pattern::LinesV),
            other => Err(Error::Config(format!("unknown pattern `{other}`"))),
        }
    }
}

fn default_true() -> bool {
    true
}

/// Marking parameters. Spacings are periods (gap plus line width).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub pattern: Pattern,
    pub spacing_u: f64,
    pub spacing_v: f64,
    pub line_width: f64,
    #[serde(default)]
    pub grid_angle_deg: f64,
    #[serde(default = "default_true")]
    pub draw_boundary: bool,
}

pub const DEFAULT_LINE_WIDTH: f64 = 3.0;

impl GridSpec {
    pub fn grid(spacing: f64) -> Self {
        Self {
            pattern: Pattern::Grid,
            spacing_u: spacing,
            spacing_v: spacing,
            line_width: DEFAULT_LINE_WIDTH,
            grid_angle_deg: 0.0,
            draw_boundary: true,
        }
    }

    pub fn lines(pattern: Pattern, spacing: f64) -> Self {
        Self {
            pattern,
            ..Self::grid(spacing)
        }
    }

    pub fn with_spacings(mut self, u: f64, v: f64) -> Self {
        self.spacing_u = u;
        self.spacing_v = v;
        self
    }

    pub fn with_angle(mut self, deg: f64) -> Self {
        self.grid_angle_deg = deg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.line_width > 0.0 && self.line_width.is_finite()) {
            return Err(Error::Config(format!("line width {} must be positive", self.line_width)));
        }
        for (name, s) in [("spacing_u", self.spacing_u), ("spacing_v", self.spacing_v)] {
            if !(s > self.line_width && s.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} {s} must exceed line width {}",
                    self.line_width
                )));
            }
        }
        if !(0.0..90.0).contains(&self.grid_angle_deg) {
            return Err(Error::OutOfRange {
                field: "grid_angle_deg",
                value: self.grid_angle_deg,
                min: 0.0,
                max: 90.0,
            });
        }
        Ok(())
    }
}

/// Whether world point `(x, y)` lies on a marking line.
///
/// The point is rotated by `-grid_angle` about the domain center; at angle 0
/// the line phase is anchored at world `(0, 0)`, so the first line covers
/// `[0, line_width)`.
pub fn line_mask(g: &GridSpec, x: f64, y: f64) -> bool {
    let c0 = DOMAIN_SIZE / 2.0;
    let (s, c) = sin_cos_deg(g.grid_angle_deg);
    let dx = x - c0;
    let dy = y - c0;
    let xr = c * dx + s * dy + c0;
    let yr = -s * dx + c * dy + c0;
    let on_u = xr.rem_euclid(g.spacing_u) < g.line_width;
    let on_v = yr.rem_euclid(g.spacing_v) < g.line_width;
    let marked = match g.pattern {
        Pattern::Grid => on_u || on_v,
        Pattern::LinesU => on_u,
        Pattern::LinesV => on_v,
    };
    marked || (g.draw_boundary && on_boundary(g.line_width, x, y))
}

fn on_boundary(width: f64, x: f64, y: f64) -> bool {
    x < width || y < width || x > DOMAIN_SIZE - width || y > DOMAIN_SIZE - width
}

/// Strictly binary image: 1 is a white line, 0 is surface body or background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl SurfaceImage {
    pub fn from_bits(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::Config(format!(
                "image {width}x{height} needs {} pixels, got {}",
                width as usize * height as usize,
                data.len()
            )));
        }
        if data.iter().any(|&b| b > 1) {
            return Err(Error::Config("surface image must be binary".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Accepts 8-bit `{0, 255}` samples.
    pub fn from_gray8(width: u32, height: u32, gray: &[u8]) -> Result<Self> {
        if let Some(v) = gray.iter().find(|&&v| v != 0 && v != 255) {
            return Err(Error::Config(format!("non-binary sample {v}")));
        }
        Self::from_bits(width, height, gray.iter().map(|&v| (v == 255) as u8).collect())
    }

    pub fn from_raster(raster: &Raster, g: &GridSpec) -> Self {
        let data = raster
            .world()
            .iter()
            .zip(raster.depth())
            .map(|(w, d)| (d.is_finite() && line_mask(g, w[0], w[1])) as u8)
            .collect();
        Self {
            width: raster.width() as u32,
            height: raster.height() as u32,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize] == 1
    }

    pub fn to_gray8(&self) -> Vec<u8> {
        self.data.iter().map(|&b| b * 255).collect()
    }

    pub fn white_fraction(&self) -> f64 {
        self.data.iter().map(|&b| b as usize).sum::<usize>() as f64 / self.data.len() as f64
    }
}

pub fn render_surface(field: &FieldGrid, v: &Viewpoint, g: &GridSpec) -> SurfaceImage {
    SurfaceImage::from_raster(&rasterize(field, v), g)
}
