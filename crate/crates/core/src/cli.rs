//! Command-line surface: `detect`, `describe`, `match`, `evaluate`, `stats`.
//!
//! Each subcommand validates its numeric flags before touching the input
//! files, writes its artifact atomically (or to stdout without `--out`) and
//! sends warnings and summaries to stderr whenever stdout carries data.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::descriptor::{describe_many, mean_histograms, DescriptorKind, DescriptorParams, FlipMode, MeanHistograms};
use crate::detector::{assign_orientations, detect_log, DetectorParams};
use crate::error::{Error, Result};
use crate::evaluation::{default_thresholds, ground_truth, pr_curve, EvaluationCurve, DEFAULT_MAX_OVERLAP_ERROR};
use crate::formats::{
    format_curve_csv, format_keypoints, format_matches_csv, format_stats_csv, read_homography,
    read_keypoints, write_atomic, DescriptorFile, DescriptorRecord,
};
use crate::homography::Homography;
use crate::image::GrayImage;
use crate::imageio::load_image;
use crate::keypoint::Keypoint;
use crate::matching::{check_threshold, match_ratio, nearest_neighbors};

#[derive(Debug, Parser)]
#[command(name = "dci", version, about = "Contrast-invertible local feature descriptors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect LoG keypoints with dominant orientations.
    Detect {
        image: PathBuf,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe the keypoints of an image.
    Describe {
        image: PathBuf,
        keypoints: PathBuf,
        #[command(flatten)]
        descriptor: DescriptorArgs,
        /// Write little-endian f32 records instead of text.
        #[arg(long)]
        binary: bool,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nearest-neighbour distance-ratio matching of two descriptor files.
    Match {
        descriptors_a: PathBuf,
        descriptors_b: PathBuf,
        /// Emit a match when nearest / second-nearest distance is below this.
        #[arg(long, default_value_t = 0.8)]
        ratio: f64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recall versus 1-precision of an image pair related by a homography.
    Evaluate {
        image_a: PathBuf,
        image_b: PathBuf,
        homography: PathBuf,
        #[command(flatten)]
        descriptor: DescriptorArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Overlap error below which two regions correspond.
        #[arg(long, default_value_t = DEFAULT_MAX_OVERLAP_ERROR)]
        max_overlap: f64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean eight-bin HoG and HoLG over every image in a directory.
    Stats {
        corpus: PathBuf,
        /// Patch side in samples (odd).
        #[arg(long, default_value_t = DescriptorParams::default().side)]
        side: usize,
        /// Patch half-width in units of keypoint scale.
        #[arg(long, default_value_t = DescriptorParams::default().magnification)]
        mag: f64,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    /// Number of LoG scales.
    #[arg(long, default_value_t = DetectorParams::default().num_scales)]
    pub scales: usize,
    /// Finest scale in pixels.
    #[arg(long, default_value_t = DetectorParams::default().sigma_min)]
    pub sigma_min: f64,
    /// Ratio between consecutive scales.
    #[arg(long, default_value_t = DetectorParams::default().sigma_step)]
    pub sigma_step: f64,
    /// Minimum |response| on [0, 1] intensities.
    #[arg(long, default_value_t = DetectorParams::default().response_threshold)]
    pub threshold: f64,
    /// Edge pixels that never host a keypoint.
    #[arg(long, default_value_t = DetectorParams::default().border)]
    pub border: usize,
}

impl DetectorArgs {
    pub fn params(&self) -> Result<DetectorParams> {
        let p = DetectorParams {
            num_scales: self.scales,
            sigma_min: self.sigma_min,
            sigma_step: self.sigma_step,
            response_threshold: self.threshold,
            border: self.border,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct DescriptorArgs {
    /// Descriptor: `dci` or the `hog` baseline.
    #[arg(long, default_value = "dci")]
    pub kind: DescriptorKind,
    /// `upright` ignores keypoint orientation; `oriented` aligns the patch with it.
    #[arg(long, default_value = "upright")]
    pub mode: FlipMode,
    /// Patch side in samples (odd).
    #[arg(long, default_value_t = DescriptorParams::default().side)]
    pub side: usize,
    /// Patch half-width in units of keypoint scale.
    #[arg(long, default_value_t = DescriptorParams::default().magnification)]
    pub mag: f64,
}

impl DescriptorArgs {
    pub fn params(&self) -> Result<DescriptorParams> {
        descriptor_params(self.side, self.mag)
    }
}

fn descriptor_params(side: usize, magnification: f64) -> Result<DescriptorParams> {
    let p = DescriptorParams { side, magnification };
    p.validate()?;
    Ok(p)
}

/// Artifact bytes go to `out`, or to stdout when absent.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Human-readable summary: stdout when the artifact went to a file, stderr otherwise.
fn summary(out: Option<&Path>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect { image, detector, out } => run_detect(&image, &detector.params()?, out.as_deref()),
        Command::Describe { image, keypoints, descriptor, binary, out } => run_describe(
            &image,
            &keypoints,
            descriptor.kind,
            descriptor.mode,
            &descriptor.params()?,
            binary,
            out.as_deref(),
        ),
        Command::Match { descriptors_a, descriptors_b, ratio, out } => {
            run_match(&descriptors_a, &descriptors_b, ratio, out.as_deref())
        }
        Command::Evaluate { image_a, image_b, homography, descriptor, detector, max_overlap, out } => {
            let config = EvaluateConfig {
                kind: descriptor.kind,
                mode: descriptor.mode,
                descriptor: descriptor.params()?,
                detector: detector.params()?,
                max_overlap_error: max_overlap,
            };
            run_evaluate(&image_a, &image_b, &homography, &config, out.as_deref())
        }
        Command::Stats { corpus, side, mag, detector, out } => {
            run_stats(&corpus, &descriptor_params(side, mag)?, &detector.params()?, out.as_deref())
        }
    }
}

/// Detected keypoints with dominant orientations, strongest first.
pub fn detect_oriented(image: &GrayImage, params: &DetectorParams) -> Result<Vec<Keypoint>> {
    assign_orientations(image, &detect_log(image, params)?)
}

pub fn run_detect(image_path: &Path, params: &DetectorParams, out: Option<&Path>) -> Result<()> {
    let image = load_image(image_path)?;
    let keypoints = detect_oriented(&image, params)?;
    emit(out, format_keypoints(&keypoints).as_bytes())?;
    summary(out, &format!("{} keypoints", keypoints.len()));
    Ok(())
}

/// Describes keypoints, dropping those whose centre lies outside the image.
///
/// Returns the records in input order and the indices of skipped keypoints.
pub fn describe_records(
    image: &GrayImage,
    keypoints: &[Keypoint],
    kind: DescriptorKind,
    mode: FlipMode,
    params: &DescriptorParams,
) -> Result<(Vec<DescriptorRecord>, Vec<usize>)> {
    params.validate()?;
    let mut records = Vec::with_capacity(keypoints.len());
    let mut skipped = Vec::new();
    for (i, (kp, result)) in keypoints
        .iter()
        .zip(describe_many(kind, image, keypoints, mode, params))
        .enumerate()
    {
        if !image.contains(kp.x, kp.y) {
            skipped.push(i);
            continue;
        }
        records.push(DescriptorRecord {
            keypoint: *kp,
            descriptor: result?,
        });
    }
    Ok((records, skipped))
}

pub fn run_describe(
    image_path: &Path,
    keypoints_path: &Path,
    kind: DescriptorKind,
    mode: FlipMode,
    params: &DescriptorParams,
    binary: bool,
    out: Option<&Path>,
) -> Result<()> {
    params.validate()?;
    let image = load_image(image_path)?;
    let keypoints = read_keypoints(keypoints_path)?;
    let (records, skipped) = describe_records(&image, &keypoints, kind, mode, params)?;
    for &i in &skipped {
        let kp = &keypoints[i];
        eprintln!("warning: keypoint {i} at ({}, {}) lies outside the image; skipped", kp.x, kp.y);
    }
    let degenerate = records.iter().filter(|r| r.descriptor.is_degenerate()).count();
    let file = DescriptorFile { kind, mode, records };
    let bytes = if binary { file.to_binary() } else { file.to_text().into_bytes() };
    emit(out, &bytes)?;
    summary(
        out,
        &format!(
            "{} descriptors written, {} skipped out of bounds, {} degenerate",
            file.records.len(),
            skipped.len(),
            degenerate
        ),
    );
    Ok(())
}

pub fn run_match(a: &Path, b: &Path, ratio: f64, out: Option<&Path>) -> Result<()> {
    check_threshold(ratio)?;
    let fa = DescriptorFile::read(a)?;
    let fb = DescriptorFile::read(b)?;
    if fa.kind != fb.kind || fa.mode != fb.mode {
        eprintln!(
            "warning: comparing {} {} descriptors with {} {} descriptors",
            fa.kind, fa.mode, fb.kind, fb.mode
        );
    }
    let matches = match_ratio(&fa.descriptors(), &fb.descriptors(), ratio)?;
    emit(out, format_matches_csv(&matches).as_bytes())?;
    summary(out, &format!("{} matches", matches.len()));
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct EvaluateConfig {
    pub kind: DescriptorKind,
    pub mode: FlipMode,
    pub descriptor: DescriptorParams,
    pub detector: DetectorParams,
    pub max_overlap_error: f64,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            kind: DescriptorKind::Dci,
            mode: FlipMode::Upright,
            descriptor: DescriptorParams::default(),
            detector: DetectorParams::default(),
            max_overlap_error: DEFAULT_MAX_OVERLAP_ERROR,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub correspondences: usize,
    pub curve: EvaluationCurve,
}

/// Detect, describe, match and score an image pair over the default ratio thresholds.
pub fn evaluate_pair(
    image_a: &GrayImage,
    image_b: &GrayImage,
    h: &Homography,
    config: &EvaluateConfig,
) -> Result<Evaluation> {
    config.descriptor.validate()?;
    config.detector.validate()?;
    if !(config.max_overlap_error > 0.0 && config.max_overlap_error <= 1.0) {
        return Err(Error::Input(format!(
            "maximum overlap error must lie in (0, 1], got {}",
            config.max_overlap_error
        )));
    }
    let kps_a = detect_oriented(image_a, &config.detector)?;
    let kps_b = detect_oriented(image_b, &config.detector)?;
    let describe = |image, kps: &[Keypoint]| {
        describe_many(config.kind, image, kps, config.mode, &config.descriptor)
            .into_iter()
            .collect::<Result<Vec<_>>>()
    };
    let desc_a = describe(image_a, &kps_a)?;
    let desc_b = describe(image_b, &kps_b)?;
    let truth = ground_truth(&kps_a, &kps_b, h, config.max_overlap_error)?;
    let candidates = nearest_neighbors(&desc_a, &desc_b)?;
    let curve = pr_curve(&candidates, &truth, &default_thresholds())?;
    Ok(Evaluation {
        correspondences: truth.count(),
        curve,
    })
}

pub fn run_evaluate(
    image_a: &Path,
    image_b: &Path,
    homography: &Path,
    config: &EvaluateConfig,
    out: Option<&Path>,
) -> Result<()> {
    config.descriptor.validate()?;
    config.detector.validate()?;
    let h = read_homography(homography)?;
    let a = load_image(image_a)?;
    let b = load_image(image_b)?;
    let result = evaluate_pair(&a, &b, &h, config)?;
    emit(out, format_curve_csv(&result.curve).as_bytes())?;
    summary(
        out,
        &format!(
            "#correspondences {} area {:.4}",
            result.correspondences,
            result.curve.area()
        ),
    );
    Ok(())
}

/// Loads every decodable image in `dir`, sorted by file name.
pub fn load_corpus(dir: &Path) -> Result<Vec<(PathBuf, GrayImage)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    paths.retain(|p| p.is_file());
    paths.sort();
    let mut images = Vec::new();
    for path in paths {
        match load_image(&path) {
            Ok(img) => images.push((path, img)),
            Err(e) => eprintln!("warning: skipping {}: {e}", path.display()),
        }
    }
    if images.is_empty() {
        return Err(Error::Input(format!("no readable images in {}", dir.display())));
    }
    Ok(images)
}

/// Mean histograms over oriented keypoints detected in each image.
pub fn corpus_statistics(
    images: &[GrayImage],
    descriptor: &DescriptorParams,
    detector: &DetectorParams,
) -> Result<MeanHistograms> {
    let keypoints = images
        .iter()
        .map(|img| detect_oriented(img, detector))
        .collect::<Result<Vec<_>>>()?;
    let corpus: Vec<(&GrayImage, &[Keypoint])> = images
        .iter()
        .zip(&keypoints)
        .map(|(img, kps)| (img, kps.as_slice()))
        .collect();
    mean_histograms(&corpus, descriptor)
}

pub fn run_stats(
    dir: &Path,
    descriptor: &DescriptorParams,
    detector: &DetectorParams,
    out: Option<&Path>,
) -> Result<()> {
    descriptor.validate()?;
    detector.validate()?;
    let images: Vec<GrayImage> = load_corpus(dir)?.into_iter().map(|(_, img)| img).collect();
    let stats = corpus_statistics(&images, descriptor, detector)?;
    emit(out, format_stats_csv(&stats).as_bytes())?;
    summary(
        out,
        &format!(
            "{} images, {} keypoints, bin0/bin1 HoG {:.3} HoLG {:.3}",
            images.len(),
            stats.count,
            stats.hog_dominance(),
            stats.holg_dominance()
        ),
    );
    Ok(())
}
