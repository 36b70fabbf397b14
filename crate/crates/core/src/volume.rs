//! Dense array containers: planar maps (`C x H x W`), voxel volumes
//! (`C x Y x Z x X`), per-view validity masks and BEV maps (`C x Y x X`).

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Channel-major 2D map, `C x H x W`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl PlanarMap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidMap(format!(
                "map dims must be >= 1, got {channels}x{height}x{width}"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::DimensionMismatch(format!(
                "map data has {} values, expected {}",
                data.len(),
                channels * height * width
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMap("map contains non-finite values".into()));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f32) -> Result<Self> {
        Self::new(
            channels,
            height,
            width,
            vec![value; channels * height * width],
        )
    }

    /// Single-channel map from `f(x, y)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(1, height, width, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, channel: usize, y: usize, x: usize) -> f32 {
        self.data[(channel * self.height + y) * self.width + x]
    }

    pub fn channel(&self, channel: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[channel * n..(channel + 1) * n]
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }
}

/// Dense `C x Y x Z x X` voxel volume.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVolume {
    channels: usize,
    ny: usize,
    nz: usize,
    nx: usize,
    data: Vec<f32>,
}

impl FeatureVolume {
    pub fn zeros(channels: usize, ny: usize, nz: usize, nx: usize) -> Self {
        Self {
            channels,
            ny,
            nz,
            nx,
            data: vec![0.0; channels * ny * nz * nx],
        }
    }

    pub fn for_grid(channels: usize, grid: &GridSpec) -> Self {
        Self::zeros(channels, grid.ny, grid.nz, grid.nx)
    }

    pub fn from_data(
        channels: usize,
        ny: usize,
        nz: usize,
        nx: usize,
        data: Vec<f32>,
    ) -> Result<Self> {
        if data.len() != channels * ny * nz * nx {
            return Err(Error::DimensionMismatch(format!(
                "volume data has {} values, expected {channels}x{ny}x{nz}x{nx}",
                data.len()
            )));
        }
        Ok(Self {
            channels,
            ny,
            nz,
            nx,
            data,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// `(Y, Z, X)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.ny, self.nz, self.nx)
    }

    pub fn voxels(&self) -> usize {
        self.ny * self.nz * self.nx
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.voxels();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.voxels();
        &mut self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, iy: usize, iz: usize, ix: usize) -> f32 {
        self.data[((c * self.ny + iy) * self.nz + iz) * self.nx + ix]
    }

    pub(crate) fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.dims() != other.dims() || self.channels != other.channels {
            return Err(Error::DimensionMismatch(format!(
                "{what}: {}x{:?} vs {}x{:?}",
                self.channels,
                self.dims(),
                other.channels,
                other.dims()
            )));
        }
        Ok(())
    }
}

/// Per-voxel boolean mask, `Y x Z x X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityVolume {
    ny: usize,
    nz: usize,
    nx: usize,
    data: Vec<bool>,
}

impl ValidityVolume {
    pub fn from_data(ny: usize, nz: usize, nx: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != ny * nz * nx {
            return Err(Error::DimensionMismatch(format!(
                "validity data has {} values, expected {ny}x{nz}x{nx}",
                data.len()
            )));
        }
        Ok(Self { ny, nz, nx, data })
    }

    pub fn filled(ny: usize, nz: usize, nx: usize, value: bool) -> Self {
        Self {
            ny,
            nz,
            nx,
            data: vec![value; ny * nz * nx],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.ny, self.nz, self.nx)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Ground-plane map, `C x Y x X`.
#[derive(Debug, Clone, PartialEq)]
pub struct BevMap {
    channels: usize,
    ny: usize,
    nx: usize,
    data: Vec<f32>,
}

impl BevMap {
    pub fn from_data(channels: usize, ny: usize, nx: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != channels * ny * nx {
            return Err(Error::DimensionMismatch(format!(
                "BEV data has {} values, expected {channels}x{ny}x{nx}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMap("BEV contains non-finite values".into()));
        }
        Ok(Self {
            channels,
            ny,
            nx,
            data,
        })
    }

    pub fn zeros(channels: usize, ny: usize, nx: usize) -> Self {
        Self {
            channels,
            ny,
            nx,
            data: vec![0.0; channels * ny * nx],
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// `(Y, X)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.ny * self.nx;
        &self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, iy: usize, ix: usize) -> f32 {
        self.data[(c * self.ny + iy) * self.nx + ix]
    }

    pub fn set(&mut self, c: usize, iy: usize, ix: usize, value: f32) {
        self.data[(c * self.ny + iy) * self.nx + ix] = value;
    }

    pub fn max_value(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }
}
