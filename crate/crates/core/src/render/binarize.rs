use image::GrayImage;

use super::SurfaceImage;
use crate::error::{Error, Result};
use crate::raster::IMAGE_SIZE;

/// Threshold selection. Pixels strictly above the level become foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    /// Level maximizing the between-class variance of the histogram.
    Auto,
    Fixed(u8),
}

/// Otsu level: the `t` maximizing between-class variance when pixels `<= t`
/// form one class. `None` for empty or constant images.
pub fn otsu_level(pixels: &[u8]) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &p in pixels {
        hist[p as usize] += 1;
    }
    let total = pixels.len() as u64;
    if total == 0 || hist.contains(&total) {
        return None;
    }
    let total_sum: f64 = hist.iter().enumerate().map(|(i, &h)| i as f64 * h as f64).sum();

    let mut best = (f64::NEG_INFINITY, 0u8);
    let mut w0 = 0u64;
    let mut sum0 = 0.0;
    for (t, &h) in hist.iter().enumerate() {
        w0 += h;
        sum0 += t as f64 * h as f64;
        if w0 == 0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0 {
            break;
        }
        let m0 = sum0 / w0 as f64;
        let m1 = (total_sum - sum0) / w1 as f64;
        let between = w0 as f64 * w1 as f64 * (m0 - m1) * (m0 - m1);
        if between > best.0 {
            best = (between, t as u8);
        }
    }
    Some(best.1)
}

/// Turns a grayscale scan of a plot into a 512×512 white-on-black line image.
///
/// After thresholding, the image is inverted if more than half of it is white
/// (dark lines on light paper), then resampled with nearest-neighbour lookup.
pub fn binarize_real_plot(image: &GrayImage, mode: Threshold) -> Result<SurfaceImage> {
    let (w, h) = image.dimensions();
    let pixels = image.as_raw();
    let level = match mode {
        Threshold::Auto => otsu_level(pixels).ok_or(Error::NoStructure)?,
        Threshold::Fixed(t) => t,
    };
    let mut bits: Vec<u8> = pixels.iter().map(|&p| (p > level) as u8).collect();
    let white = bits.iter().filter(|&&b| b == 1).count();
    if white == 0 || white == bits.len() {
        return Err(Error::NoStructure);
    }
    if white * 2 > bits.len() {
        for b in &mut bits {
            *b ^= 1;
        }
    }

    let n = IMAGE_SIZE as u64;
    let mut out = Vec::with_capacity(IMAGE_SIZE * IMAGE_SIZE);
    for y in 0..n {
        let sy = ((2 * y + 1) * h as u64 / (2 * n)) as usize;
        for x in 0..n {
            let sx = ((2 * x + 1) * w as u64 / (2 * n)) as usize;
            out.push(bits[sy * w as usize + sx]);
        }
    }
    SurfaceImage::from_bits(IMAGE_SIZE as u32, IMAGE_SIZE as u32, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_images_have_no_structure() {
        let zeros = GrayImage::new(40, 30);
        assert!(matches!(binarize_real_plot(&zeros, Threshold::Auto), Err(Error::NoStructure)));
        assert!(matches!(binarize_real_plot(&zeros, Threshold::Fixed(10)), Err(Error::NoStructure)));
        let empty = GrayImage::new(0, 0);
        assert!(matches!(binarize_real_plot(&empty, Threshold::Auto), Err(Error::NoStructure)));
    }

    #[test]
    fn dark_lines_on_paper_become_white_lines() {
        let mut img = GrayImage::from_pixel(300, 200, image::Luma([230]));
        for y in 0..200 {
            for x in (0..300).step_by(25) {
                img.put_pixel(x, y, image::Luma([20]));
                img.put_pixel(x + 1, y, image::Luma([25]));
            }
        }
        let out = binarize_real_plot(&img, Threshold::Auto).unwrap();
        assert_eq!((out.width(), out.height()), (512, 512));
        assert!(out.white_fraction() < 0.5);
        assert!(out.white_fraction() > 0.0);
        // column 0 of the source is a line; its nearest-neighbour image is white
        assert!(out.get(0, 100));
    }

    #[test]
    fn otsu_splits_two_levels() {
        let px: Vec<u8> = [vec![10u8; 50], vec![200u8; 50]].concat();
        let t = otsu_level(&px).unwrap();
        assert!((10..200).contains(&t));
        assert_eq!(otsu_level(&[7, 7, 7]), None);
    }

    #[test]
    fn fixed_threshold_is_respected() {
        let mut img = GrayImage::from_pixel(4, 4, image::Luma([100]));
        img.put_pixel(0, 0, image::Luma([150]));
        let out = binarize_real_plot(&img, Threshold::Fixed(120)).unwrap();
        assert!(out.get(0, 0));
        assert!(!out.get(511, 511));
        assert!(matches!(binarize_real_plot(&img, Threshold::Fixed(200)), Err(Error::NoStructure)));
    }
}
