//! Z-buffer rasterization of a heightfield mesh.
//!
//! Each grid cell is split into a four-triangle fan around its center, whose
//! height is the mean of the four corners. The fan is symmetric under 90°
//! rotations of the grid, so rotating the field and the camera together gives
//! the same image.
//!
//! Raster rules: pixel `(px, py)` is sampled at its center `(px + 0.5, py + 0.5)`;
//! a center is covered when all three normalized barycentric weights are
//! `>= -1e-9`; depth and world position are interpolated barycentrically; a
//! fragment replaces the stored one only if it is strictly nearer. Cells are
//! visited row by row and the fan in a fixed order, all in `f64`, so the
//! output is bit-reproducible.

use crate::gauss::FieldGrid;
use crate::geometry::{frame_from_viewpoint, Projected, Viewpoint};

/// Width and height of every rendered image.
pub const IMAGE_SIZE: usize = 512;

const COVER_TOL: f64 = 1e-9;
const MIN_AREA: f64 = 1e-12;

/// Winning fragment per pixel.
#[derive(Debug, Clone)]
pub struct Raster {
    width: usize,
    height: usize,
    /// Distance toward the camera; `-inf` where nothing was drawn.
    depth: Vec<f64>,
    /// World `(x, y)` of the fragment, i.e. its parameter-plane position.
    world: Vec<[f64; 2]>,
}

impl Raster {
    fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            depth: vec![f64::NEG_INFINITY; width * height],
            world: vec![[f64::NAN; 2]; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn world(&self) -> &[[f64; 2]] {
        &self.world
    }

    /// `Some((depth, [x, y]))` for covered pixels.
    pub fn fragment(&self, px: usize, py: usize) -> Option<(f64, [f64; 2])> {
        let k = py * self.width + px;
        self.depth[k]
            .is_finite()
            .then(|| (self.depth[k], self.world[k]))
    }

    pub fn covered(&self) -> usize {
        self.depth.iter().filter(|d| d.is_finite()).count()
    }
}

#[derive(Clone, Copy)]
struct Vertex {
    p: Projected,
    x: f64,
    y: f64,
}

#[inline]
fn edge(a: &Projected, b: &Projected, u: f64, v: f64) -> f64 {
    (b.u - a.u) * (v - a.v) - (b.v - a.v) * (u - a.u)
}

impl Raster {
    fn draw_triangle(&mut self, a: &Vertex, b: &Vertex, c: &Vertex) {
        let area = edge(&a.p, &b.p, c.p.u, c.p.v);
        if area.abs() < MIN_AREA {
            return;
        }
        let umin = a.p.u.min(b.p.u).min(c.p.u);
        let umax = a.p.u.max(b.p.u).max(c.p.u);
        let vmin = a.p.v.min(b.p.v).min(c.p.v);
        let vmax = a.p.v.max(b.p.v).max(c.p.v);
        let px0 = ((umin - 0.5 - COVER_TOL).ceil().max(0.0)) as usize;
        let py0 = ((vmin - 0.5 - COVER_TOL).ceil().max(0.0)) as usize;
        let px1 = (umax - 0.5 + COVER_TOL).floor();
        let py1 = (vmax - 0.5 + COVER_TOL).floor();
        if px1 < 0.0 || py1 < 0.0 {
            return;
        }
        let px1 = (px1 as usize).min(self.width - 1);
        let py1 = (py1 as usize).min(self.height - 1);
        let inv = 1.0 / area;

        for py in py0..=py1 {
            let v = py as f64 + 0.5;
            for px in px0..=px1 {
                let u = px as f64 + 0.5;
                let wa = edge(&b.p, &c.p, u, v) * inv;
                let wb = edge(&c.p, &a.p, u, v) * inv;
                let wc = edge(&a.p, &b.p, u, v) * inv;
                if wa < -COVER_TOL || wb < -COVER_TOL || wc < -COVER_TOL {
                    continue;
                }
                let depth = wa * a.p.depth + wb * b.p.depth + wc * c.p.depth;
                let k = py * self.width + px;
                if depth > self.depth[k] {
                    self.depth[k] = depth;
                    self.world[k] = [
                        wa * a.x + wb * b.x + wc * c.x,
                        wa * a.y + wb * b.y + wc * c.y,
                    ];
                }
            }
        }
    }
}

/// Renders the z-buffer of `field` as seen from `view` at 512×512.
pub fn rasterize(field: &FieldGrid, view: &Viewpoint) -> Raster {
    let frame = frame_from_viewpoint(view);
    let (w, h) = (field.width(), field.height());
    let mut verts = Vec::with_capacity(w * h);
    for row in 0..h {
        let y = field.world_y(row);
        for col in 0..w {
            let x = field.world_x(col);
            verts.push(Vertex {
                p: frame.project([x, y, field.get(row, col)]),
                x,
                y,
            });
        }
    }

    let mut raster = Raster::empty(IMAGE_SIZE, IMAGE_SIZE);
    for row in 0..h.saturating_sub(1) {
        for col in 0..w.saturating_sub(1) {
            let a = verts[row * w + col];
            let b = verts[row * w + col + 1];
            let c = verts[(row + 1) * w + col + 1];
            let d = verts[(row + 1) * w + col];
            let x = 0.5 * (a.x + b.x);
            let y = 0.5 * (a.y + d.y);
            let z = 0.25
                * (field.get(row, col)
                    + field.get(row, col + 1)
                    + field.get(row + 1, col + 1)
                    + field.get(row + 1, col));
            let m = Vertex {
                p: frame.project([x, y, z]),
                x,
                y,
            };
            raster.draw_triangle(&a, &b, &m);
            raster.draw_triangle(&b, &c, &m);
            raster.draw_triangle(&c, &d, &m);
            raster.draw_triangle(&d, &a, &m);
        }
    }
    raster
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_top_down_covers_every_pixel() {
        let r = rasterize(&FieldGrid::zeros(512, 512), &Viewpoint::new(0.0, 90.0).unwrap());
        assert_eq!(r.covered(), 512 * 512);
        // u = y, v = x for this frame
        let (d, w) = r.fragment(10, 300).unwrap();
        assert_eq!(d, 0.0);
        assert!((w[0] - 300.5).abs() < 1e-9 && (w[1] - 10.5).abs() < 1e-9);
    }

    #[test]
    fn edge_on_flat_field_draws_nothing() {
        let r = rasterize(&FieldGrid::zeros(64, 64), &Viewpoint::new(0.0, 0.0).unwrap());
        assert_eq!(r.covered(), 0);
    }

    #[test]
    fn nearer_fragment_wins() {
        // a raised block in the middle of a flat field, seen from above
        let mut vals = vec![0.0; 32 * 32];
        for r in 10..20 {
            for c in 10..20 {
                vals[r * 32 + c] = 5.0;
            }
        }
        let field = FieldGrid::from_values(32, 32, vals).unwrap();
        let r = rasterize(&field, &Viewpoint::new(0.0, 90.0).unwrap());
        let cell = 512.0 / 32.0;
        let px = (15.0 * cell) as usize;
        let (d, _) = r.fragment(px, px).unwrap();
        assert_eq!(d, 5.0);
    }
}
