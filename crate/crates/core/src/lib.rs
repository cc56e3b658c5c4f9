//! Local feature description robust to illumination change and contrast inversion.
//!
//! The crate computes the DCI descriptor: 4×4 cells of eight-bin histograms of
//! the *Laplace gradient* (the Laplacian applied to each component of the image
//! gradient), canonicalized against bright/dark inversion by the sign of the
//! patch divergence, then L1-normalized and square-rooted. A SIFT-style
//! histogram-of-gradients descriptor is provided as a baseline, together with a
//! multi-scale LoG detector, a brute-force distance-ratio matcher and the
//! recall / 1-precision evaluation protocol.
//!
//! ```
//! use dci::{describe, DescriptorParams, FlipMode, GrayImage, Keypoint};
//!
//! let image = GrayImage::from_fn(64, 64, |x, y| ((x * 7 + y * 3) % 17) as f64 * 10.0);
//! let inverted = image.map(|v| 255.0 - v);
//! let kp = Keypoint::new(32.0, 32.0, 4.0, 0.0);
//! let params = DescriptorParams::default();
//!
//! let a = describe(&image, &kp, FlipMode::Upright, &params).unwrap();
//! let b = describe(&inverted, &kp, FlipMode::Upright, &params).unwrap();
//! assert!(a.max_abs_diff(&b) < 1e-6);
//! ```

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod descriptor;
pub mod detector;
pub mod error;
pub mod evaluation;
pub mod formats;
pub mod homography;
pub mod image;
pub mod imageio;
pub mod keypoint;
pub mod matching;
pub mod patch;

pub use crate::descriptor::{
    build_holg, canonical_flip, describe, describe_hog_baseline, describe_many, divergence_phi,
    divergence_phi_flux, finalize, mean_histograms, Descriptor, DescriptorKind, DescriptorParams,
    FlipMode, HistogramGrid, MeanHistograms, DESCRIPTOR_LEN,
};
pub use crate::detector::{detect_log, dominant_orientation, DetectorParams, Orientation};
pub use crate::error::{Error, Result};
pub use crate::evaluation::{
    average_precision, ground_truth, mean_average_precision, overlap_error, pr_curve,
    CurveSample, EvaluationCurve, GroundTruth,
};
pub use crate::homography::Homography;
pub use crate::image::{GrayImage, Rect, ScalarField, VectorField};
pub use crate::keypoint::Keypoint;
pub use crate::matching::{match_ratio, nearest_neighbors, MatchPair};
pub use crate::patch::{extract_patch, Patch};
