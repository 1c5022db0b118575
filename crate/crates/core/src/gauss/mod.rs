//! Random sums of anisotropic 2D Gaussians and their evaluation on a sample grid.
//!
//! Each component is normalized so that the volume under it equals a fixed
//! constant (see [`DEFAULT_VOLUME`]); only the sign and the shape vary. The
//! surface height at a world point is the plain sum of all components, with no
//! truncation at the domain edges.

mod file;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use file::{load_function, parse_function, save_function, write_function};

/// Side length of the square world domain, in pixels.
pub const DOMAIN_SIZE: f64 = 512.0;
pub const MIN_SIGMA: f64 = 8.0;
pub const MAX_SIGMA: f64 = 512.0;
pub const MAX_COMPONENTS: usize = 10;

/// Volume under every component: `2π·64³`, so an isotropic component with
/// σ = 64 peaks at exactly 64 height-pixels.
pub const DEFAULT_VOLUME: f64 = 2.0 * PI * 64.0 * 64.0 * 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// Orientation in radians, `[0, π)`.
    pub rot: f64,
    /// `+1` or `-1`.
    pub sign: i8,
}

fn check(field: &'static str, value: f64, min: f64, max: f64, max_inclusive: bool) -> Result<()> {
    let ok = value.is_finite()
        && value >= min
        && if max_inclusive { value <= max } else { value < max };
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            field,
            value,
            min,
            max,
        })
    }
}

impl GaussianComponent {
    pub fn new(mu_x: f64, mu_y: f64, sigma_x: f64, sigma_y: f64, rot: f64, sign: i8) -> Result<Self> {
        check("mu_x", mu_x, 0.0, DOMAIN_SIZE, true)?;
        check("mu_y", mu_y, 0.0, DOMAIN_SIZE, true)?;
        check("sigma_x", sigma_x, MIN_SIGMA, MAX_SIGMA, true)?;
        check("sigma_y", sigma_y, MIN_SIGMA, MAX_SIGMA, true)?;
        check("rot", rot, 0.0, PI, false)?;
        if sign != 1 && sign != -1 {
            return Err(Error::OutOfRange {
                field: "sign",
                value: sign as f64,
                min: -1.0,
                max: 1.0,
            });
        }
        Ok(Self {
            mu_x,
            mu_y,
            sigma_x,
            sigma_y,
            rot,
            sign,
        })
    }

    /// Signed peak height for the given normalization volume.
    pub fn amplitude(&self, volume: f64) -> f64 {
        self.sign as f64 * volume / (2.0 * PI * self.sigma_x * self.sigma_y)
    }

    /// Height contribution at world point `(x, y)`.
    pub fn value_at(&self, x: f64, y: f64, volume: f64) -> f64 {
        let (s, c) = self.rot.sin_cos();
        let dx = x - self.mu_x;
        let dy = y - self.mu_y;
        // offset rotated by -rot into the component's principal axes
        let xr = c * dx + s * dy;
        let yr = -s * dx + c * dy;
        let q = xr * xr / (2.0 * self.sigma_x * self.sigma_x)
            + yr * yr / (2.0 * self.sigma_y * self.sigma_y);
        self.amplitude(volume) * (-q).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFunction {
    pub id: u64,
    components: Vec<GaussianComponent>,
}

impl SurfaceFunction {
    pub fn new(id: u64, components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() || components.len() > MAX_COMPONENTS {
            return Err(Error::ComponentCount(components.len()));
        }
        Ok(Self { id, components })
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn value_at(&self, x: f64, y: f64, volume: f64) -> f64 {
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.value_at(x, y, volume);
        }
        acc
    }
}

/// Seed bytes for the generator stream of function `id`.
///
/// The layout is fixed: a domain tag, then the master seed and the id as
/// little-endian words. ChaCha20 output is specified bit-exactly, so the stream
/// is identical on every platform.
fn stream_seed(master_seed: u64, id: u64) -> [u8; 32] {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(b"sgrdfunc");
    seed[8..16].copy_from_slice(&master_seed.to_le_bytes());
    seed[16..24].copy_from_slice(&id.to_le_bytes());
    seed
}

/// Draws a random surface function. Pure in `(master_seed, id)`.
pub fn synth_function(master_seed: u64, id: u64) -> SurfaceFunction {
    let mut rng = ChaCha20Rng::from_seed(stream_seed(master_seed, id));
    let n = rng.gen_range(1..=MAX_COMPONENTS);
    let components = (0..n)
        .map(|_| {
            let mu_x = rng.gen_range(0.0..=DOMAIN_SIZE);
            let mu_y = rng.gen_range(0.0..=DOMAIN_SIZE);
            let sigma_x = rng.gen_range(MIN_SIGMA..=MAX_SIGMA);
            let sigma_y = rng.gen_range(MIN_SIGMA..=MAX_SIGMA);
            let rot = rng.gen_range(0.0..PI);
            let sign = if rng.gen::<bool>() { 1 } else { -1 };
            GaussianComponent {
                mu_x,
                mu_y,
                sigma_x,
                sigma_y,
                rot,
                sign,
            }
        })
        .collect();
    SurfaceFunction { id, components }
}

/// Heightfield samples over the world domain.
///
/// Sample `(i, j)` (row `i`, column `j`) sits at world
/// `x = (j + 0.5) · 512 / width`, `y = (i + 0.5) · 512 / height`; at the default
/// 512×512 resolution that is a unit lattice of cell centers covering `[0, 512]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl FieldGrid {
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::Config(format!(
                "field of {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite field value at index {bad}")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// World x of column `col`.
    #[inline]
    pub fn world_x(&self, col: usize) -> f64 {
        (col as f64 + 0.5) * DOMAIN_SIZE / self.width as f64
    }

    /// World y of row `row`.
    #[inline]
    pub fn world_y(&self, row: usize) -> f64 {
        (row as f64 + 0.5) * DOMAIN_SIZE / self.height as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn eval_function(f: &SurfaceFunction, width: usize, height: usize) -> FieldGrid {
    eval_function_with_volume(f, width, height, DEFAULT_VOLUME)
}

pub fn eval_function_with_volume(
    f: &SurfaceFunction,
    width: usize,
    height: usize,
    volume: f64,
) -> FieldGrid {
    assert!(width > 0 && height > 0, "resolution must be positive");
    let mut grid = FieldGrid::zeros(width, height);
    let sx = DOMAIN_SIZE / width as f64;
    let sy = DOMAIN_SIZE / height as f64;
    grid.values
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(row, out)| {
            let y = (row as f64 + 0.5) * sy;
            for (col, v) in out.iter_mut().enumerate() {
                let x = (col as f64 + 0.5) * sx;
                *v = f.value_at(x, y, volume);
            }
        });
    grid
}
