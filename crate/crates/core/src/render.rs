//! Tile-parallel rasterization of orbit classifications with partition
//! overlays and bit-exact PGM/PPM encoding.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::FamilyParams;
use crate::geometry::{dist_to_rays, PartitionConfig};
use crate::maxmod::{maxmod_ladder, MaxModLadder};
use crate::orbit::{classify_orbit, OrbitClass};

/// Default square tile edge for the worker pool.
pub const DEFAULT_TILE: usize = 64;

/// Rectangular viewport sampled at pixel centers, row 0 at the top.
///
/// Pixel `(i, j)` maps to
/// `center + ((i+0.5)/px_w - 0.5) * 2*half_width + i*((0.5 - (j+0.5)/px_h) * 2*half_height)`.
/// The offsets are computed as `((i+0.5) - px_w/2) * step` so that mirrored
/// pixels of an even-dimension grid land on exact negatives.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub center: Complex64,
    pub half_width: f64,
    pub half_height: f64,
    pub px_w: u32,
    pub px_h: u32,
}

impl GridSpec {
    pub fn new(center: Complex64, half_width: f64, half_height: f64, px_w: u32, px_h: u32) -> Result<Self> {
        for (name, v) in [("px_w", px_w), ("px_h", px_h)] {
            if !(16..=16384).contains(&v) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in [16, 16384], got {v}"
                )));
            }
        }
        if !(half_width > 0.0) || !(half_height > 0.0) {
            return Err(Error::InvalidParams("viewport half-extents must be positive".into()));
        }
        Ok(Self {
            center,
            half_width,
            half_height,
            px_w,
            px_h,
        })
    }

    pub fn pixel_center(&self, i: u32, j: u32) -> Complex64 {
        let sx = 2.0 * self.half_width / self.px_w as f64;
        let sy = 2.0 * self.half_height / self.px_h as f64;
        let u = (i as f64 + 0.5) - 0.5 * self.px_w as f64;
        let v = 0.5 * self.px_h as f64 - (j as f64 + 0.5);
        Complex64::new(self.center.re + u * sx, self.center.im + v * sy)
    }

    pub fn pixel_count(&self) -> usize {
        self.px_w as usize * self.px_h as usize
    }

    /// Index of the pixel whose center is nearest to `z`.
    pub fn nearest_pixel(&self, z: Complex64) -> (u32, u32) {
        let fx = (z.re - self.center.re) / (2.0 * self.half_width) + 0.5;
        let fy = 0.5 - (z.im - self.center.im) / (2.0 * self.half_height);
        let i = ((fx * self.px_w as f64).floor() as i64).clamp(0, self.px_w as i64 - 1);
        let j = ((fy * self.px_h as f64).floor() as i64).clamp(0, self.px_h as i64 - 1);
        (i as u32, j as u32)
    }

    /// Half of the pixel diagonal, the line half-width used by overlays.
    pub fn half_pixel_diag(&self) -> f64 {
        let sx = 2.0 * self.half_width / self.px_w as f64;
        let sy = 2.0 * self.half_height / self.px_h as f64;
        0.5 * f64::hypot(sx, sy)
    }
}

/// Row-major byte raster, 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub px_w: u32,
    pub px_h: u32,
    pub channels: u8,
    pub data: Vec<u8>,
}

impl RasterImage {
    pub fn new(px_w: u32, px_h: u32, channels: u8) -> Self {
        assert!(channels == 1 || channels == 3);
        Self {
            px_w,
            px_h,
            channels,
            data: vec![0; px_w as usize * px_h as usize * channels as usize],
        }
    }
}

/// Classifies every pixel center. Tiles are processed by the worker pool and
/// written back in tile order, so the result does not depend on scheduling.
pub fn classify_grid(
    params: &FamilyParams,
    grid: &GridSpec,
    budget: usize,
    escape_radius: f64,
    ladder: &MaxModLadder,
    tile: usize,
) -> (Vec<OrbitClass>, Vec<Option<u16>>) {
    assert!(tile >= 1);
    let (w, h) = (grid.px_w as usize, grid.px_h as usize);
    let mut rects = Vec::new();
    let mut y = 0;
    while y < h {
        let th = tile.min(h - y);
        let mut x = 0;
        while x < w {
            let tw = tile.min(w - x);
            rects.push((x, y, tw, th));
            x += tw;
        }
        y += th;
    }

    let tiles: Vec<Vec<(OrbitClass, Option<u16>)>> = rects
        .par_iter()
        .map(|&(x0, y0, tw, th)| {
            let mut out = Vec::with_capacity(tw * th);
            for j in y0..y0 + th {
                for i in x0..x0 + tw {
                    let z = grid.pixel_center(i as u32, j as u32);
                    let rec = classify_orbit(params, z, budget, escape_radius, ladder);
                    out.push((rec.verdict, rec.escape_entry.map(|n| n as u16)));
                }
            }
            out
        })
        .collect();

    let mut classes = vec![OrbitClass::Undetermined; w * h];
    let mut entries = vec![None; w * h];
    for (&(x0, y0, tw, _th), tile_data) in rects.iter().zip(&tiles) {
        for (t, &(class, entry)) in tile_data.iter().enumerate() {
            let (di, dj) = (t % tw, t / tw);
            let idx = (y0 + dj) * w + x0 + di;
            classes[idx] = class;
            entries[idx] = entry;
        }
    }
    (classes, entries)
}

/// Classifies the viewport and renders the grayscale escape-time image:
/// earlier escape is brighter (`255 * (1 - n/budget)` rounded), non-escaping
/// pixels are black. Deterministic regardless of tile scheduling.
pub fn render_classification(
    params: &FamilyParams,
    grid: &GridSpec,
    budget: usize,
    escape_radius: f64,
) -> Result<(Vec<OrbitClass>, RasterImage)> {
    render_classification_with_tile(params, grid, budget, escape_radius, DEFAULT_TILE)
}

/// Same as [`render_classification`] with an explicit tile edge.
pub fn render_classification_with_tile(
    params: &FamilyParams,
    grid: &GridSpec,
    budget: usize,
    escape_radius: f64,
    tile: usize,
) -> Result<(Vec<OrbitClass>, RasterImage)> {
    let ladder = maxmod_ladder(params, escape_radius, 32)?;
    let (classes, entries) = classify_grid(params, grid, budget, escape_radius, &ladder, tile);
    let mut image = RasterImage::new(grid.px_w, grid.px_h, 1);
    for (px, entry) in image.data.iter_mut().zip(&entries) {
        *px = match entry {
            Some(n) => (255.0 * (1.0 - *n as f64 / budget as f64)).round() as u8,
            None => 0,
        };
    }
    Ok((classes, image))
}

/// Copies `image` to three channels and draws the partition: polygon edges
/// red (255,0,0), strip boundaries green (0,255,0), rays blue (0,0,255),
/// one-pixel lines via a boundary-distance test against half the pixel
/// diagonal. Drawing the same overlay twice is a no-op.
pub fn overlay_partition(
    image: &RasterImage,
    grid: &GridSpec,
    config: &PartitionConfig,
) -> Result<RasterImage> {
    if image.px_w != grid.px_w || image.px_h != grid.px_h {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs grid {}x{}",
            image.px_w, image.px_h, grid.px_w, grid.px_h
        )));
    }
    let mut out = RasterImage::new(image.px_w, image.px_h, 3);
    for (i, chunk) in out.data.chunks_mut(3).enumerate() {
        let v = match image.channels {
            1 => {
                let g = image.data[i];
                [g, g, g]
            }
            _ => {
                let base = i * 3;
                [image.data[base], image.data[base + 1], image.data[base + 2]]
            }
        };
        chunk.copy_from_slice(&v);
    }

    let half_diag = grid.half_pixel_diag();
    let p = config.p();
    for j in 0..grid.px_h {
        for i in 0..grid.px_w {
            let z = grid.pixel_center(i, j);
            let idx = (j as usize * grid.px_w as usize + i as usize) * 3;
            // Rays first, strips above them, polygon on top.
            if dist_to_rays(p, z) < half_diag {
                out.data[idx..idx + 3].copy_from_slice(&[0, 0, 255]);
            }
            if strip_boundary_distance(config, z) < half_diag {
                out.data[idx..idx + 3].copy_from_slice(&[0, 255, 0]);
            }
            if (config.polygon_support(z) - config.nu()).abs() < half_diag {
                out.data[idx..idx + 3].copy_from_slice(&[255, 0, 0]);
            }
        }
    }
    Ok(out)
}

/// Distance from `z` to the nearest strip boundary (the two long edges and
/// the end cap of each half-strip).
fn strip_boundary_distance(config: &PartitionConfig, z: Complex64) -> f64 {
    let p = config.p();
    let q = config.q();
    let mut best = f64::INFINITY;
    for k in 0..p {
        let ang = (2.0 * k as f64 - 1.0) * std::f64::consts::PI / p as f64;
        let u = z * Complex64::from_polar(1.0, ang);
        let (x, y) = (u.re, u.im.abs());
        let d_edge = if x >= 0.0 {
            (y - q).abs()
        } else {
            f64::hypot(x, y - q)
        };
        let d_cap = if y <= q { x.abs() } else { f64::hypot(x, y - q) };
        best = best.min(d_edge).min(d_cap);
    }
    best
}

/// Binary PGM (`P5`) for one channel, binary PPM (`P6`) for three:
/// `"P5\n{w} {h}\n255\n"` followed by the raw buffer. Bit-exact.
pub fn encode_image(image: &RasterImage) -> Vec<u8> {
    let magic = if image.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", image.px_w, image.px_h).into_bytes();
    out.extend_from_slice(&image.data);
    out
}

/// Parses the output of [`encode_image`].
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    let malformed = |msg: &str| Error::Malformed(format!("netpbm: {msg}"));
    let channels = match bytes.get(0..2) {
        Some(b"P5") => 1u8,
        Some(b"P6") => 3u8,
        _ => return Err(malformed("bad magic")),
    };
    let mut pos = 2;
    let mut fields = Vec::with_capacity(3);
    while fields.len() < 3 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let text = std::str::from_utf8(&bytes[start..pos]).map_err(|_| malformed("header"))?;
        fields.push(
            text.parse::<u32>()
                .map_err(|_| malformed("non-numeric header field"))?,
        );
    }
    pos += 1; // single whitespace after maxval
    let (w, h, maxval) = (fields[0], fields[1], fields[2]);
    if maxval != 255 {
        return Err(malformed("only maxval 255 supported"));
    }
    let expect = w as usize * h as usize * channels as usize;
    let data = bytes
        .get(pos..pos + expect)
        .ok_or_else(|| malformed("truncated payload"))?
        .to_vec();
    Ok(RasterImage {
        px_w: w,
        px_h: h,
        channels,
        data,
    })
}
