//! Coverage maps: which pixels have an inlier inside their rectangular
//! neighbourhood, and the covered fraction of the image.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageDims {
    pub width: u32,
    pub height: u32,
}

impl ImageDims {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDims { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height
    }
}

/// Inlier pixel positions `(x, y)` in one image, validated against its size.
/// Coincident points are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InlierSet {
    dims: ImageDims,
    points: Vec<(u32, u32)>,
}

impl InlierSet {
    pub fn new(dims: ImageDims, points: Vec<(u32, u32)>) -> Result<Self> {
        if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !dims.contains(x, y)) {
            return Err(Error::OutOfBounds { x, y, width: dims.width, height: dims.height });
        }
        Ok(Self { dims, points })
    }

    pub fn empty(dims: ImageDims) -> Self {
        Self { dims, points: Vec::new() }
    }

    pub fn dims(&self) -> ImageDims {
        self.dims
    }

    pub fn points(&self) -> &[(u32, u32)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageParams {
    /// Full window size as a fraction of the image side.
    pub neighborhood_fraction: f64,
    /// Lower clamp on each half extent, in pixels.
    pub min_half_extent: u32,
}

impl CoverageParams {
    pub fn new(neighborhood_fraction: f64, min_half_extent: u32) -> Result<Self> {
        if !(neighborhood_fraction > 0.0 && neighborhood_fraction <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "neighborhood fraction must lie in (0, 1], got {neighborhood_fraction}"
            )));
        }
        if min_half_extent == 0 {
            return Err(Error::InvalidParams("min_half_extent must be >= 1".into()));
        }
        Ok(Self { neighborhood_fraction, min_half_extent })
    }
}

impl Default for CoverageParams {
    fn default() -> Self {
        Self { neighborhood_fraction: 1.0 / 15.0, min_half_extent: 1 }
    }
}

/// Half extents `(hx, hy)` of the neighbourhood window; the window spans
/// `(2hx + 1) x (2hy + 1)` pixels.
pub fn neighborhood_half_extents(dims: ImageDims, params: &CoverageParams) -> (u32, u32) {
    let half = |side: u32| {
        let h = (side as f64 * params.neighborhood_fraction / 2.0).round() as u32;
        h.max(params.min_half_extent)
    };
    (half(dims.width), half(dims.height))
}

/// Row-major boolean grid, `true` where a pixel is covered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMap {
    dims: ImageDims,
    covered: Vec<bool>,
}

impl CoverageMap {
    pub fn from_grid(dims: ImageDims, covered: Vec<bool>) -> Result<Self> {
        if covered.len() != dims.pixel_count() {
            return Err(Error::DimensionMismatch { expected: dims.pixel_count(), got: covered.len() });
        }
        Ok(Self { dims, covered })
    }

    pub fn dims(&self) -> ImageDims {
        self.dims
    }

    pub fn is_covered(&self, x: u32, y: u32) -> bool {
        self.covered[y as usize * self.dims.width as usize + x as usize]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.covered
    }

    pub fn covered_count(&self) -> usize {
        self.covered.iter().filter(|&&c| c).count()
    }

    /// Binary PGM (P5), 255 for covered pixels.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.dims.width, self.dims.height)?;
        let bytes: Vec<u8> = self.covered.iter().map(|&c| if c { 255 } else { 0 }).collect();
        out.write_all(&bytes)
    }
}

/// Dilates the inlier mask by the neighbourhood rectangle, clipped at the
/// image border.
///
/// Separable: each inlier row is dilated horizontally with a difference
/// array, then the dilated rows are spread vertically with a second
/// difference array over columns.
pub fn coverage_map(inliers: &InlierSet, params: &CoverageParams) -> CoverageMap {
    let dims = inliers.dims();
    let (w, h) = (dims.width as usize, dims.height as usize);
    let (hx, hy) = neighborhood_half_extents(dims, params);
    let (hx, hy) = (hx as usize, hy as usize);

    let mut covered = vec![false; w * h];
    if inliers.is_empty() {
        return CoverageMap { dims, covered };
    }

    // Horizontal pass, only rows holding an inlier.
    let mut row_diff: Vec<Option<Vec<i32>>> = vec![None; h];
    for &(x, y) in inliers.points() {
        let (x, y) = (x as usize, y as usize);
        let diff = row_diff[y].get_or_insert_with(|| vec![0; w + 1]);
        diff[x.saturating_sub(hx)] += 1;
        diff[(x + hx + 1).min(w)] -= 1;
    }

    // Vertical pass.
    let mut col_diff = vec![0i32; (h + 1) * w];
    let mut row_mask = vec![false; w];
    for (y, diff) in row_diff.iter().enumerate() {
        let Some(diff) = diff else { continue };
        let mut run = 0;
        for (x, m) in row_mask.iter_mut().enumerate() {
            run += diff[x];
            *m = run > 0;
        }
        let top = y.saturating_sub(hy) * w;
        let bottom = (y + hy + 1).min(h) * w;
        for (x, _) in row_mask.iter().enumerate().filter(|(_, &m)| m) {
            col_diff[top + x] += 1;
            col_diff[bottom + x] -= 1;
        }
    }

    let mut run = vec![0i32; w];
    for y in 0..h {
        let diff = &col_diff[y * w..(y + 1) * w];
        let out = &mut covered[y * w..(y + 1) * w];
        for x in 0..w {
            run[x] += diff[x];
            out[x] = run[x] > 0;
        }
    }
    CoverageMap { dims, covered }
}

/// Covered pixels over total pixels.
pub fn coverage_score(map: &CoverageMap) -> f64 {
    map.covered_count() as f64 / map.dims.pixel_count() as f64
}
