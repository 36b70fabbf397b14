//! Axis-aligned voxel grid over the ground plane.
//!
//! Index order is `(iy, iz, ix)`, matching the `Y x Z x X` volume layout.
//! World `x` follows `ix`, `y` follows `iy`, `z` (up) follows `iz`.

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BENCHMARK_CELL: f64 = 0.025;
pub const DEFAULT_HEIGHT: f64 = 2.0;
pub const DEFAULT_NZ: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: [f64; 3],
    pub cell_xy: f64,
    pub cell_z: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VoxelIndex {
    pub iy: usize,
    pub iz: usize,
    pub ix: usize,
}

impl VoxelIndex {
    pub fn new(iy: usize, iz: usize, ix: usize) -> Self {
        Self { iy, iz, ix }
    }
}

impl GridSpec {
    pub fn new(
        origin: [f64; 3],
        cell_xy: f64,
        cell_z: f64,
        nx: usize,
        ny: usize,
        nz: usize,
    ) -> Result<Self> {
        let grid = Self {
            origin,
            cell_xy,
            cell_z,
            nx,
            ny,
            nz,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell_xy > 0.0 && self.cell_xy.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "cell_xy must be > 0, got {}",
                self.cell_xy
            )));
        }
        if !(self.cell_z > 0.0 && self.cell_z.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "cell_z must be > 0, got {}",
                self.cell_z
            )));
        }
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::InvalidGrid(format!(
                "cell counts must be >= 1, got nx={} ny={} nz={}",
                self.nx, self.ny, self.nz
            )));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        self.nx
            .checked_mul(self.ny)
            .and_then(|n| n.checked_mul(self.nz))
            .filter(|&n| n <= isize::MAX as usize / 8)
            .ok_or_else(|| Error::InvalidGrid("voxel count overflows".into()))?;
        Ok(())
    }

    /// 12 m x 36 m at 2.5 cm (480 x 1440 cells), optionally coarsened.
    pub fn wildtrack(factor: usize) -> Result<Self> {
        Self::benchmark(480, 1440, factor)
    }

    /// 16 m x 25 m at 2.5 cm (640 x 1000 cells), optionally coarsened.
    pub fn multiviewx(factor: usize) -> Result<Self> {
        Self::benchmark(640, 1000, factor)
    }

    fn benchmark(ny: usize, nx: usize, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidFactor(factor));
        }
        for dim in [ny, nx] {
            if dim % factor != 0 {
                return Err(Error::NonDividingFactor { factor, dim });
            }
        }
        Self::new(
            [0.0, 0.0, 0.0],
            BENCHMARK_CELL * factor as f64,
            DEFAULT_HEIGHT / DEFAULT_NZ as f64,
            nx / factor,
            ny / factor,
            DEFAULT_NZ,
        )
    }

    /// Parses `wildtrack[:factor]` or `multiviewx[:factor]`.
    pub fn from_preset(spec: &str) -> Result<Self> {
        let (name, factor) = match spec.split_once(':') {
            Some((n, f)) => (
                n,
                f.parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad grid factor in `{spec}`")))?,
            ),
            None => (spec, 1),
        };
        match name {
            "wildtrack" => Self::wildtrack(factor),
            "multiviewx" => Self::multiviewx(factor),
            other => Err(Error::Config(format!("unknown grid preset `{other}`"))),
        }
    }

    pub fn voxel_count(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.ny, self.nz, self.nx)
    }

    /// Ground extent `(x_min, y_min, x_max, y_max)`.
    pub fn ground_extent(&self) -> [f64; 4] {
        [
            self.origin[0],
            self.origin[1],
            self.origin[0] + self.nx as f64 * self.cell_xy,
            self.origin[1] + self.ny as f64 * self.cell_xy,
        ]
    }

    pub fn contains_index(&self, idx: VoxelIndex) -> bool {
        idx.ix < self.nx && idx.iy < self.ny && idx.iz < self.nz
    }

    /// Flat offset of `idx` in a `Y x Z x X` array.
    #[inline]
    pub fn linear(&self, idx: VoxelIndex) -> usize {
        (idx.iy * self.nz + idx.iz) * self.nx + idx.ix
    }

    #[inline]
    pub fn unlinear(&self, i: usize) -> VoxelIndex {
        let ix = i % self.nx;
        let rest = i / self.nx;
        VoxelIndex {
            iy: rest / self.nz,
            iz: rest % self.nz,
            ix,
        }
    }

    pub fn voxel_center(&self, idx: VoxelIndex) -> Result<Point3<f64>> {
        if !self.contains_index(idx) {
            return Err(Error::IndexOutOfGrid {
                iy: idx.iy,
                iz: idx.iz,
                ix: idx.ix,
            });
        }
        Ok(self.center_unchecked(idx))
    }

    #[inline]
    pub(crate) fn center_unchecked(&self, idx: VoxelIndex) -> Point3<f64> {
        Point3::new(
            self.origin[0] + (idx.ix as f64 + 0.5) * self.cell_xy,
            self.origin[1] + (idx.iy as f64 + 0.5) * self.cell_xy,
            self.origin[2] + (idx.iz as f64 + 0.5) * self.cell_z,
        )
    }

    /// Half-open cell lookup; `None` outside the grid.
    pub fn world_to_cell(&self, p: &Point3<f64>) -> Option<VoxelIndex> {
        let ix = axis_cell(p.x, self.origin[0], self.cell_xy, self.nx)?;
        let iy = axis_cell(p.y, self.origin[1], self.cell_xy, self.ny)?;
        let iz = axis_cell(p.z, self.origin[2], self.cell_z, self.nz)?;
        Some(VoxelIndex { iy, iz, ix })
    }

    /// Center of ground cell `(iy, ix)` in world `(x, y)`.
    pub fn ground_cell_center(&self, iy: usize, ix: usize) -> [f64; 2] {
        [
            self.origin[0] + (ix as f64 + 0.5) * self.cell_xy,
            self.origin[1] + (iy as f64 + 0.5) * self.cell_xy,
        ]
    }

    /// Ground cell `(iy, ix)` containing world `(x, y)`.
    pub fn ground_cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let ix = axis_cell(x, self.origin[0], self.cell_xy, self.nx)?;
        let iy = axis_cell(y, self.origin[1], self.cell_xy, self.ny)?;
        Some((iy, ix))
    }
}

fn axis_cell(value: f64, origin: f64, cell: f64, n: usize) -> Option<usize> {
    let f = ((value - origin) / cell).floor();
    if f >= 0.0 && f < n as f64 {
        Some(f as usize)
    } else {
        None
    }
}
