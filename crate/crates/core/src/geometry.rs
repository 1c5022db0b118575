//! Orthographic camera on a sphere around the domain center, and depth maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::FieldGrid;
use crate::raster::{rasterize, Raster, IMAGE_SIZE};

/// Center of the world domain; the camera orbits this point.
pub const ORBIT_CENTER: [f64; 3] = [256.0, 256.0, 0.0];
/// Half-range of the depth encoding, in pixels.
pub const DEPTH_HALF_RANGE: f64 = 512.0;
/// Smallest value a surface pixel may take; 0 is reserved for background.
pub const DEPTH_FLOOR: f64 = 1.0 / 65535.0;
pub const DEFAULT_RADIUS: f64 = 1024.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub radius: f64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl Viewpoint {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        Self::with_radius(DEFAULT_RADIUS, azimuth_deg, elevation_deg)
    }

    pub fn with_radius(radius: f64, azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        let v = Self {
            radius,
            azimuth_deg,
            elevation_deg,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::OutOfRange {
                field: "radius",
                value: self.radius,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        if !(0.0..360.0).contains(&self.azimuth_deg) {
            return Err(Error::OutOfRange {
                field: "azimuth_deg",
                value: self.azimuth_deg,
                min: 0.0,
                max: 360.0,
            });
        }
        if !(0.0..=90.0).contains(&self.elevation_deg) {
            return Err(Error::OutOfRange {
                field: "elevation_deg",
                value: self.elevation_deg,
                min: 0.0,
                max: 90.0,
            });
        }
        Ok(())
    }
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90°.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        r.to_radians().sin_cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionFrame {
    /// Unit vector from the orbit center toward the camera.
    pub view: [f64; 3],
    pub right: [f64; 3],
    pub up: [f64; 3],
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn frame_from_viewpoint(v: &Viewpoint) -> ProjectionFrame {
    let (st, ct) = sin_cos_deg(v.azimuth_deg);
    let (sp, cp) = sin_cos_deg(v.elevation_deg);
    ProjectionFrame {
        view: [cp * ct, cp * st, sp],
        right: [-st, ct, 0.0],
        up: [-sp * ct, -sp * st, cp],
    }
}

/// Image position and signed distance toward the camera of a world point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projected {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

impl ProjectionFrame {
    #[inline]
    pub fn project(&self, p: [f64; 3]) -> Projected {
        let q = [
            p[0] - ORBIT_CENTER[0],
            p[1] - ORBIT_CENTER[1],
            p[2] - ORBIT_CENTER[2],
        ];
        let half = IMAGE_SIZE as f64 / 2.0;
        Projected {
            u: dot(q, self.right) + half,
            v: half - dot(q, self.up),
            depth: dot(q, self.view),
        }
    }
}

pub fn project_point(frame: &ProjectionFrame, p: [f64; 3]) -> Projected {
    frame.project(p)
}

/// Maps a distance toward the camera to the stored `[ε, 1]` range.
#[inline]
pub fn encode_depth(depth_along: f64) -> f64 {
    (0.5 + depth_along / (2.0 * DEPTH_HALF_RANGE)).clamp(DEPTH_FLOOR, 1.0)
}

/// Per-pixel nearness in `[ε, 1]`, 0 where no surface is hit.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != (width as usize) * (height as usize) {
            return Err(Error::Config(format!(
                "depth map {width}x{height} needs {} values, got {}",
                width as usize * height as usize,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutOfRange {
                field: "depth",
                value: *v,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_raster(raster: &Raster) -> Self {
        let values = raster
            .depth()
            .iter()
            .map(|&d| if d.is_finite() { encode_depth(d) } else { 0.0 })
            .collect();
        Self {
            width: raster.width() as u32,
            height: raster.height() as u32,
            values,
        }
    }

    /// Decodes 16-bit samples (`v = s / 65535`).
    pub fn from_u16(width: u32, height: u32, samples: &[u16]) -> Result<Self> {
        Self::new(
            width,
            height,
            samples.iter().map(|&s| s as f64 / 65535.0).collect(),
        )
    }

    /// Quantizes to 16 bits, `round(65535 · v)`.
    pub fn to_u16(&self) -> Vec<u16> {
        self.values
            .iter()
            .map(|&v| (v * 65535.0).round() as u16)
            .collect()
    }

    /// The same map after a 16-bit store/load cycle.
    pub fn quantized(&self) -> Self {
        Self::from_u16(self.width, self.height, &self.to_u16()).expect("quantized values in range")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn is_background(&self, x: u32, y: u32) -> bool {
        self.get(x, y) == 0.0
    }
}

pub fn render_depth(field: &FieldGrid, v: &Viewpoint) -> DepthMap {
    DepthMap::from_raster(&rasterize(field, v))
}
