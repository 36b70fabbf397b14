//! Silhouette preprocessing, visual hull and probabilistic visual hull
//! construction, hull/feature fusion and vertical (Z) compression to BEV.
//!
//! A voxel belongs to the visual hull when every view that sees it samples a
//! silhouette value above `tau`, and at least `min_views` views see it. The
//! probabilistic hull replaces the binary membership by the product of the
//! sampled silhouette values over those views.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{BevMap, FeatureVolume, PlanarMap, ValidityVolume};

/// Single-channel foreground mask with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Silhouette {
    map: PlanarMap,
    camera: String,
}

impl Silhouette {
    pub fn new(map: PlanarMap, camera: impl Into<String>) -> Result<Self> {
        if map.channels() != 1 {
            return Err(Error::InvalidMap(format!(
                "silhouette must have 1 channel, got {}",
                map.channels()
            )));
        }
        if map.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidMap(
                "silhouette values must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            map,
            camera: camera.into(),
        })
    }

    pub fn map(&self) -> &PlanarMap {
        &self.map
    }

    pub fn camera(&self) -> &str {
        &self.camera
    }

    pub fn width(&self) -> usize {
        self.map.width()
    }

    pub fn height(&self) -> usize {
        self.map.height()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccupancyKind {
    Binary,
    Probabilistic,
}

/// One-channel volume flagged as a binary hull or a probabilistic hull.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyVolume {
    volume: FeatureVolume,
    kind: OccupancyKind,
}

impl OccupancyVolume {
    pub fn new(volume: FeatureVolume, kind: OccupancyKind) -> Result<Self> {
        if volume.channels() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "occupancy volume needs 1 channel, got {}",
                volume.channels()
            )));
        }
        let ok = match kind {
            OccupancyKind::Binary => volume.data().iter().all(|&v| v == 0.0 || v == 1.0),
            OccupancyKind::Probabilistic => volume.data().iter().all(|v| (0.0..=1.0).contains(v)),
        };
        if !ok {
            return Err(Error::Data(format!(
                "occupancy values out of range for {kind:?}"
            )));
        }
        Ok(Self { volume, kind })
    }

    pub fn kind(&self) -> OccupancyKind {
        self.kind
    }

    pub fn volume(&self) -> &FeatureVolume {
        &self.volume
    }

    pub fn data(&self) -> &[f32] {
        self.volume.data()
    }

    pub fn into_volume(self) -> FeatureVolume {
        self.volume
    }

    pub fn occupied(&self) -> usize {
        self.data().iter().filter(|&&v| v > 0.0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    /// Append the hull as one extra channel.
    Concat,
    /// Features scaled by the hull.
    Mult,
    /// Features plus hull-scaled features.
    MultAdd,
    /// Features followed by hull-scaled features (2C channels).
    MultConcat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BevMode {
    MaxZ,
    MeanZ,
    SumZ,
}

macro_rules! mode_strings {
    ($ty:ty { $($variant:ident => $s:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                match self {
                    $(Self::$variant => $s),+
                }
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok(Self::$variant),)+
                    other => Err(Error::UnknownMode(other.to_string())),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

mode_strings!(FusionMode {
    Concat => "concat",
    Mult => "mult",
    MultAdd => "mult_add",
    MultConcat => "mult_concat",
});

mode_strings!(BevMode {
    MaxZ => "max_z",
    MeanZ => "mean_z",
    SumZ => "sum_z",
});

/// Normalized 1D Gaussian taps for `sigma`, truncated at `3 sigma`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Separable Gaussian blur. Taps falling outside the image are dropped and
/// the remaining weights renormalized, so constant images stay constant.
pub fn gaussian_blur(map: &PlanarMap, sigma: f64) -> PlanarMap {
    let kernel = gaussian_kernel(sigma);
    if kernel.len() == 1 {
        return map.clone();
    }
    let radius = (kernel.len() / 2) as isize;
    let (h, w) = (map.height(), map.width());
    let mut out = Vec::with_capacity(map.data().len());
    for c in 0..map.channels() {
        let src = map.channel(c);
        let mut tmp = vec![0.0f64; h * w];
        tmp.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
            for (x, o) in row.iter_mut().enumerate() {
                let (mut acc, mut norm) = (0.0, 0.0);
                for (k, &wt) in kernel.iter().enumerate() {
                    let xx = x as isize + k as isize - radius;
                    if xx >= 0 && (xx as usize) < w {
                        acc += wt * src[y * w + xx as usize] as f64;
                        norm += wt;
                    }
                }
                *o = acc / norm;
            }
        });
        let mut dst = vec![0.0f32; h * w];
        dst.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
            for (x, o) in row.iter_mut().enumerate() {
                let (mut acc, mut norm) = (0.0, 0.0);
                for (k, &wt) in kernel.iter().enumerate() {
                    let yy = y as isize + k as isize - radius;
                    if yy >= 0 && (yy as usize) < h {
                        acc += wt * tmp[yy as usize * w + x];
                        norm += wt;
                    }
                }
                *o = (acc / norm) as f32;
            }
        });
        out.extend(dst);
    }
    PlanarMap::new(map.channels(), h, w, out).expect("same shape as input")
}

/// Downsample by an integer factor: output pixel `(i, j)` is the mean of
/// the in-bounds source pixels in `[f*i, f*(i+1)) x [f*j, f*(j+1))`.
/// Output size is `ceil(W / f) x ceil(H / f)`, so image coordinates scale
/// by exactly `1 / f`.
pub fn area_downsample(map: &PlanarMap, factor: usize) -> Result<PlanarMap> {
    if factor == 0 {
        return Err(Error::InvalidFactor(factor));
    }
    if factor == 1 {
        return Ok(map.clone());
    }
    let (h, w) = (map.height(), map.width());
    let (oh, ow) = (h.div_ceil(factor), w.div_ceil(factor));
    let mut out = Vec::with_capacity(map.channels() * oh * ow);
    for c in 0..map.channels() {
        let src = map.channel(c);
        for oy in 0..oh {
            for ox in 0..ow {
                let (y0, y1) = (oy * factor, ((oy + 1) * factor).min(h));
                let (x0, x1) = (ox * factor, ((ox + 1) * factor).min(w));
                let mut acc = 0.0f64;
                for y in y0..y1 {
                    for x in x0..x1 {
                        acc += src[y * w + x] as f64;
                    }
                }
                out.push((acc / ((y1 - y0) * (x1 - x0)) as f64) as f32);
            }
        }
    }
    PlanarMap::new(map.channels(), oh, ow, out)
}

/// Default blur for a downsampling factor: `sigma = factor / 2`.
pub fn default_sigma(factor: usize) -> f64 {
    factor as f64 / 2.0
}

/// Blur with `sigma = factor / 2`, then downsample by `factor`.
pub fn preprocess_silhouette(mask: &Silhouette, factor: usize) -> Result<Silhouette> {
    preprocess_silhouette_with_sigma(mask, factor, default_sigma(factor))
}

/// As [`preprocess_silhouette`] with an explicit blur; `sigma <= 0` skips it.
pub fn preprocess_silhouette_with_sigma(
    mask: &Silhouette,
    factor: usize,
    sigma: f64,
) -> Result<Silhouette> {
    if factor < 1 {
        return Err(Error::InvalidFactor(factor));
    }
    let blurred = gaussian_blur(&mask.map, sigma);
    let mut small = area_downsample(&blurred, factor)?;
    // rounding in the f32 accumulations can leave values a hair outside [0, 1]
    if small.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
        let (c, h, w) = (small.channels(), small.height(), small.width());
        small = PlanarMap::new(
            c,
            h,
            w,
            small
                .into_data()
                .into_iter()
                .map(|v| v.clamp(0.0, 1.0))
                .collect(),
        )?;
    }
    Silhouette::new(small, mask.camera.clone())
}

fn check_views(volumes: &[&FeatureVolume], validity: &[ValidityVolume]) -> Result<()> {
    if volumes.len() != validity.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} occupancy views but {} validity masks",
            volumes.len(),
            validity.len()
        )));
    }
    let dims = validity
        .first()
        .map(ValidityVolume::dims)
        .or_else(|| volumes.first().map(|v| v.dims()));
    for (i, val) in validity.iter().enumerate() {
        if Some(val.dims()) != dims {
            return Err(Error::DimensionMismatch(format!(
                "validity {i} dims {:?}",
                val.dims()
            )));
        }
    }
    for (i, vol) in volumes.iter().enumerate() {
        if Some(vol.dims()) != dims || vol.channels() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "occupancy view {i} is {}x{:?}",
                vol.channels(),
                vol.dims()
            )));
        }
    }
    Ok(())
}

/// Number of views that see each voxel.
pub fn valid_view_count(validity: &[ValidityVolume]) -> Result<Vec<u32>> {
    let Some(first) = validity.first() else {
        return Ok(Vec::new());
    };
    for (i, v) in validity.iter().enumerate() {
        if v.dims() != first.dims() {
            return Err(Error::DimensionMismatch(format!(
                "validity {i} dims {:?} vs {:?}",
                v.dims(),
                first.dims()
            )));
        }
    }
    let n = first.data().len();
    Ok((0..n)
        .into_par_iter()
        .map(|i| validity.iter().filter(|v| v.data()[i]).count() as u32)
        .collect())
}

/// Binary visual hull.
pub fn visual_hull(
    occ_views: &[FeatureVolume],
    validity: &[ValidityVolume],
    tau: f64,
    min_views: u32,
) -> Result<OccupancyVolume> {
    let refs: Vec<&FeatureVolume> = occ_views.iter().collect();
    check_views(&refs, validity)?;
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::Config(format!("tau must be >= 0, got {tau}")));
    }
    let (ny, nz, nx) = validity
        .first()
        .map(ValidityVolume::dims)
        .ok_or_else(|| Error::DimensionMismatch("visual hull needs at least one view".into()))?;
    let data: Vec<f32> = (0..ny * nz * nx)
        .into_par_iter()
        .map(|i| {
            let mut seen = 0u32;
            let mut hit = 0u32;
            for (vol, val) in occ_views.iter().zip(validity) {
                if val.data()[i] {
                    seen += 1;
                    if vol.data()[i] as f64 > tau {
                        hit += 1;
                    }
                }
            }
            if seen >= min_views.max(1) && hit == seen {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    OccupancyVolume::new(
        FeatureVolume::from_data(1, ny, nz, nx, data)?,
        OccupancyKind::Binary,
    )
}

/// Product of the sampled silhouette values over the views that see each
/// hull voxel; zero outside the hull.
pub fn probabilistic_visual_hull(
    occ_views: &[FeatureVolume],
    validity: &[ValidityVolume],
    vh: &OccupancyVolume,
) -> Result<OccupancyVolume> {
    let refs: Vec<&FeatureVolume> = occ_views.iter().collect();
    check_views(&refs, validity)?;
    if vh.kind() != OccupancyKind::Binary {
        return Err(Error::Data(
            "probabilistic hull expects a binary hull as input".into(),
        ));
    }
    let dims = vh.volume().dims();
    if validity.first().is_some_and(|v| v.dims() != dims) {
        return Err(Error::DimensionMismatch(format!(
            "hull dims {dims:?} vs view dims {:?}",
            validity[0].dims()
        )));
    }
    let data: Vec<f32> = vh
        .data()
        .par_iter()
        .enumerate()
        .map(|(i, &member)| {
            if member == 0.0 {
                return 0.0;
            }
            occ_views
                .iter()
                .zip(validity)
                .filter(|(_, val)| val.data()[i])
                .map(|(vol, _)| (vol.data()[i] as f64).clamp(0.0, 1.0))
                .product::<f64>() as f32
        })
        .collect();
    let (ny, nz, nx) = dims;
    OccupancyVolume::new(
        FeatureVolume::from_data(1, ny, nz, nx, data)?,
        OccupancyKind::Probabilistic,
    )
}

/// Combines a feature volume with an occupancy volume.
pub fn fuse(
    features: &FeatureVolume,
    occupancy: &OccupancyVolume,
    mode: FusionMode,
) -> Result<FeatureVolume> {
    let occ = occupancy.volume();
    if features.dims() != occ.dims() {
        return Err(Error::DimensionMismatch(format!(
            "features {:?} vs occupancy {:?}",
            features.dims(),
            occ.dims()
        )));
    }
    let (ny, nz, nx) = features.dims();
    let c = features.channels();
    let p = occ.data();
    let weighted = |scale_plus_one: bool| -> Vec<f32> {
        (0..c)
            .flat_map(|ch| {
                features.channel(ch).iter().zip(p).map(move |(&f, &o)| {
                    if scale_plus_one {
                        f + f * o
                    } else {
                        f * o
                    }
                })
            })
            .collect()
    };
    let data = match mode {
        FusionMode::Concat => {
            let mut d = features.data().to_vec();
            d.extend_from_slice(p);
            return FeatureVolume::from_data(c + 1, ny, nz, nx, d);
        }
        FusionMode::Mult => weighted(false),
        FusionMode::MultAdd => weighted(true),
        FusionMode::MultConcat => {
            let mut d = features.data().to_vec();
            d.extend(weighted(false));
            return FeatureVolume::from_data(2 * c, ny, nz, nx, d);
        }
    };
    FeatureVolume::from_data(c, ny, nz, nx, data)
}

/// Fusion selected by name; unrecognised names are rejected.
pub fn fuse_named(
    features: &FeatureVolume,
    occupancy: &OccupancyVolume,
    mode: &str,
) -> Result<FeatureVolume> {
    fuse(features, occupancy, mode.parse()?)
}

/// Reduces the Z axis of a `C x Y x Z x X` volume.
pub fn compress_bev(volume: &FeatureVolume, mode: BevMode) -> BevMap {
    let (ny, nz, nx) = volume.dims();
    let c = volume.channels();
    let mut out = BevMap::zeros(c, ny, nx);
    out.data_mut()
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(row, dst)| {
            let (ch, iy) = (row / ny, row % ny);
            for (ix, o) in dst.iter_mut().enumerate() {
                let column = (0..nz).map(|iz| volume.get(ch, iy, iz, ix) as f64);
                *o = match mode {
                    BevMode::MaxZ => column.fold(f64::NEG_INFINITY, f64::max),
                    BevMode::SumZ => column.sum(),
                    BevMode::MeanZ => column.sum::<f64>() / nz as f64,
                } as f32;
            }
        });
    out
}
