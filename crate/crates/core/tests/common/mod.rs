//! Reference computations written independently of the library internals.

#![allow(dead_code)]

use surfacegrid::FieldGrid;

pub const SIZE: usize = 512;
const STEP: f64 = 0.25;

/// Camera basis for azimuth/elevation in degrees: (view dir, right, up).
pub fn basis(az: f64, el: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let (t, p) = (az.to_radians(), el.to_radians());
    let d = [p.cos() * t.cos(), p.cos() * t.sin(), p.sin()];
    let r = [-t.sin(), t.cos(), 0.0];
    let u = [-p.sin() * t.cos(), -p.sin() * t.sin(), p.cos()];
    (d, r, u)
}

/// Bilinear interpolation of the field samples at world `(x, y)`; `None`
/// outside the hull of the sample centers.
pub fn bilinear(field: &FieldGrid, x: f64, y: f64) -> Option<f64> {
    let (w, h) = (field.width(), field.height());
    let fx = x * w as f64 / 512.0 - 0.5;
    let fy = y * h as f64 / 512.0 - 0.5;
    if fx < 0.0 || fy < 0.0 || fx > (w - 1) as f64 || fy > (h - 1) as f64 {
        return None;
    }
    let (c0, r0) = ((fx.floor() as usize).min(w - 2), (fy.floor() as usize).min(h - 2));
    let (a, b) = (fx - c0 as f64, fy - r0 as f64);
    let v = field.values();
    let at = |r: usize, c: usize| v[r * w + c];
    Some(
        (1.0 - a) * (1.0 - b) * at(r0, c0)
            + a * (1.0 - b) * at(r0, c0 + 1)
            + (1.0 - a) * b * at(r0 + 1, c0)
            + a * b * at(r0 + 1, c0 + 1),
    )
}

/// Encoded depth seen through pixel `(px, py)`. `None` on a miss.
pub fn ray_march_depth(field: &FieldGrid, az: f64, el: f64, px: usize, py: usize) -> Option<f64> {
    ray_march_hit(field, az, el, px, py).map(|(t, _)| encode(t))
}

/// First surface crossing along the view ray of pixel `(px, py)`, marching
/// from the camera side and bisecting: `(depth along d, world [x, y])`.
pub fn ray_march_hit(field: &FieldGrid, az: f64, el: f64, px: usize, py: usize) -> Option<(f64, [f64; 2])> {
    let (d, r, u) = basis(az, el);
    let (su, sv) = (px as f64 + 0.5 - 256.0, 256.0 - (py as f64 + 0.5));
    let point = |t: f64| {
        [
            256.0 + su * r[0] + sv * u[0] + t * d[0],
            256.0 + su * r[1] + sv * u[1] + t * d[1],
            su * r[2] + sv * u[2] + t * d[2],
        ]
    };
    let gap = |t: f64| {
        let p = point(t);
        bilinear(field, p[0], p[1]).map(|h| p[2] - h)
    };
    let t_max = 4096.0;
    let mut t = t_max;
    let mut prev: Option<(f64, f64)> = None;
    while t > -t_max {
        if let Some(g) = gap(t) {
            if let Some((tp, gp)) = prev {
                if g == 0.0 || (g < 0.0) != (gp < 0.0) {
                    let (mut hi, mut lo) = (tp, t);
                    for _ in 0..60 {
                        let mid = 0.5 * (hi + lo);
                        match gap(mid) {
                            Some(gm) if (gm < 0.0) == (gp < 0.0) && gm != 0.0 => hi = mid,
                            _ => lo = mid,
                        }
                    }
                    let t = 0.5 * (hi + lo);
                    let p = point(t);
                    return Some((t, [p[0], p[1]]));
                }
            }
            prev = Some((t, g));
        } else {
            prev = None;
        }
        t -= STEP;
    }
    None
}

pub fn encode(depth: f64) -> f64 {
    (0.5 + depth / 1024.0).clamp(1.0 / 65535.0, 1.0)
}

/// Pixels whose 3×3 neighbourhood is covered and free of depth jumps.
pub fn interior(values: &[f64], w: usize, h: usize, x: usize, y: usize, jump: f64) -> bool {
    if x == 0 || y == 0 || x + 1 >= w || y + 1 >= h {
        return false;
    }
    let c = values[y * w + x];
    if c == 0.0 {
        return false;
    }
    for dy in [-1i64, 0, 1] {
        for dx in [-1i64, 0, 1] {
            let n = values[(y as i64 + dy) as usize * w + (x as i64 + dx) as usize];
            if n == 0.0 || (n - c).abs() > jump {
                return false;
            }
        }
    }
    true
}

/// Least-squares plane `a·x + b·y + c` through `(x, y, z)` samples.
pub fn fit_plane(pts: &[(f64, f64, f64)]) -> [f64; 3] {
    let mut m = [[0.0f64; 4]; 3];
    for &(x, y, z) in pts {
        let row = [x, y, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            m[i][3] += row[i] * z;
        }
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                let pivot = m[col];
                for (x, p) in m[row].iter_mut().zip(pivot).skip(col) {
                    *x -= f * p;
                }
            }
        }
    }
    [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]]
}

/// Field rotated by +90° about the domain center: `out(x, y) = f(y, 512 − x)`.
pub fn rot90(field: &FieldGrid) -> FieldGrid {
    let n = field.width();
    assert_eq!(n, field.height());
    let v = field.values();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = v[(n - 1 - j) * n + i];
        }
    }
    FieldGrid::from_values(n, n, out).unwrap()
}

/// Small deterministic generator for test inputs (SplitMix64).
pub struct Mix(pub u64);

impl Mix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// The full recipe over ten functions with miniature splits, so every subset
/// tag is materialized in a few seconds of building.
pub fn small_config() -> surfacegrid::Config {
    use surfacegrid::config::{IdRange, SubsetConfig};
    surfacegrid::Config {
        functions: IdRange::new(0, 10),
        subsets: Some(SubsetConfig {
            train: IdRange::new(0, 6),
            val: IdRange::new(6, 8),
            test: IdRange::new(8, 10),
            train_size: 6,
            val_size: 2,
            test_size: 4,
        }),
        ..surfacegrid::Config::default()
    }
}

/// Every file under `root`, keyed by relative path.
pub fn files_under(root: &std::path::Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}
