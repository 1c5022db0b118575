//! PNG storage for depth maps (16-bit gray) and surface images (8-bit gray, {0, 255}).

use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, GrayImage, ImageBuffer, ImageEncoder, ImageFormat, Luma};

use crate::error::{Error, Result};
use crate::geometry::DepthMap;
use crate::render::SurfaceImage;

fn image_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// PNG bytes of a depth map: 16-bit gray.
pub fn encode_depth_png(map: &DepthMap) -> Vec<u8> {
    let raw: Vec<u8> = map.to_u16().iter().flat_map(|s| s.to_ne_bytes()).collect();
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(&raw, map.width(), map.height(), ExtendedColorType::L16)
        .expect("in-memory PNG encoding");
    out
}

/// PNG bytes of a surface image: 8-bit gray, values {0, 255}.
pub fn encode_surface_png(img: &SurfaceImage) -> Vec<u8> {
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(&img.to_gray8(), img.width(), img.height(), ExtendedColorType::L8)
        .expect("in-memory PNG encoding");
    out
}

pub fn save_depth(map: &DepthMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(map.width(), map.height(), map.to_u16()).expect("buffer size");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}

/// Loads a 16-bit gray PNG. 8-bit inputs are rejected so that quantization is
/// never silently changed.
pub fn load_depth(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    match img {
        image::DynamicImage::ImageLuma16(buf) => {
            DepthMap::from_u16(buf.width(), buf.height(), buf.as_raw())
        }
        other => Err(image_err(
            path,
            format!("expected 16-bit single-channel depth map, got {:?}", other.color()),
        )),
    }
}

pub fn save_surface(img: &SurfaceImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buf = GrayImage::from_raw(img.width(), img.height(), img.to_gray8()).expect("buffer size");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}

pub fn load_surface(path: impl AsRef<Path>) -> Result<SurfaceImage> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    match img {
        image::DynamicImage::ImageLuma8(buf) => {
            SurfaceImage::from_gray8(buf.width(), buf.height(), buf.as_raw())
                .map_err(|e| image_err(path, e))
        }
        other => Err(image_err(
            path,
            format!("expected 8-bit single-channel image, got {:?}", other.color()),
        )),
    }
}

/// Any decodable image, converted to 8-bit luma.
pub fn load_gray8(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    Ok(image::open(path).map_err(|e| image_err(path, e))?.to_luma8())
}
