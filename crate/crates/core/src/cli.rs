//! Argument parsing for the `pvhdet` binary. Flags override the matching
//! fields of the config file given with `--config`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::hull::{BevMode, FusionMode};
use crate::io::commands::{cmd_detect, cmd_eval, cmd_reconstruct, cmd_render, cmd_simulate};
use crate::io::config::{GridChoice, RunConfig, SceneSource};
use crate::metrics::Matching;

#[derive(Debug, Parser)]
#[command(
    name = "pvhdet",
    version,
    about = "Visual-hull occupancy and ground-plane detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic scene to silhouettes, calibration and ground truth.
    Simulate,
    /// Silhouettes and calibration to a BEV occupancy map.
    Reconstruct,
    /// Decode detections from a BEV map.
    Detect,
    /// Score detections against ground truth.
    Eval,
    /// Write an image: `bev` (16-bit PGM) or `overlay` (PPM).
    Render { kind: String },
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Grid preset such as `wildtrack:4` or `multiviewx:1`.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Scene JSON file for `simulate`.
    #[arg(long, global = true)]
    pub scene: Option<PathBuf>,
    #[arg(long, global = true)]
    pub supersample: Option<u32>,
    #[arg(long, global = true)]
    pub blur_factor: Option<usize>,
    #[arg(long, global = true)]
    pub blur_sigma: Option<f64>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub min_views: Option<u32>,
    #[arg(long, global = true)]
    pub fusion: Option<String>,
    #[arg(long, global = true)]
    pub bev: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    #[arg(long, global = true)]
    pub nms_radius: Option<usize>,
    #[arg(long, global = true)]
    pub matching: Option<String>,
    /// Match distance in meters.
    #[arg(long = "t", global = true)]
    pub match_distance: Option<f64>,
    #[arg(long, global = true)]
    pub calib_noise: Option<f64>,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub features: Option<PathBuf>,
    #[arg(long, global = true)]
    pub detections: Option<PathBuf>,
    #[arg(long, global = true)]
    pub gt: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub frame: Option<i64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl Overrides {
    /// Config file (or defaults) with every given flag applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(g) = &self.grid {
            c.grid = GridChoice::Preset(g.clone());
        }
        if let Some(p) = &self.scene {
            c.scene = Some(SceneSource::Path(p.clone()));
        }
        if let Some(v) = &self.fusion {
            c.fusion = v
                .parse::<FusionMode>()
                .map_err(|e| Error::Config(format!("fusion: {e}")))?;
        }
        if let Some(v) = &self.bev {
            c.bev = v
                .parse::<BevMode>()
                .map_err(|e| Error::Config(format!("bev: {e}")))?;
        }
        if let Some(v) = &self.matching {
            c.matching = v
                .parse::<Matching>()
                .map_err(|e| Error::Config(format!("matching: {e}")))?;
        }
        macro_rules! copy {
            ($($f:ident),*) => { $(if let Some(v) = &self.$f { c.$f = v.clone(); })* };
        }
        copy!(
            supersample,
            blur_factor,
            tau,
            min_views,
            threshold,
            nms_radius,
            match_distance,
            calib_noise,
            frame,
            out
        );
        macro_rules! copy_opt {
            ($($f:ident),*) => { $(if let Some(v) = &self.$f { c.$f = Some(v.clone()); })* };
        }
        copy_opt!(blur_sigma, input, features, detections, gt, seed);
        Ok(c)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = cli.overrides.resolve()?;
    match &cli.command {
        Command::Simulate => {
            let scene = cmd_simulate(&config)?;
            println!(
                "simulated {} pedestrians in {} views -> {}",
                scene.pedestrians.len(),
                scene.cameras.len(),
                config.out.display()
            );
        }
        Command::Reconstruct => {
            let m = cmd_reconstruct(&config)?;
            println!(
                "reconstructed {} views, {} hull voxels, bev max {:.4} -> {}",
                m.cameras.len(),
                m.visual_hull_voxels,
                m.bev_max,
                config.out.display()
            );
        }
        Command::Detect => {
            let dets = cmd_detect(&config)?;
            println!("{} detections -> {}", dets.len(), config.out.display());
        }
        Command::Eval => {
            let report = cmd_eval(&config)?;
            println!("{report}");
        }
        Command::Render { kind } => {
            let path = cmd_render(&config, kind)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
