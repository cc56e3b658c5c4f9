use rayon::prelude::*;

use super::histogram::{accumulate_orientation_histogram, NUM_BINS};
use super::DescriptorParams;
use crate::error::{Error, Result};
use crate::image::{gradient, laplace_of_field, GrayImage};
use crate::keypoint::Keypoint;
use crate::patch::extract_patch;

/// Corpus-averaged, L1-normalized single-cell orientation histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanHistograms {
    pub hog: [f64; NUM_BINS],
    pub holg: [f64; NUM_BINS],
    /// Keypoints that contributed (flat patches are skipped).
    pub count: usize,
}

impl MeanHistograms {
    pub fn hog_dominance(&self) -> f64 {
        self.hog[0] / self.hog[1]
    }

    pub fn holg_dominance(&self) -> f64 {
        self.holg[0] / self.holg[1]
    }
}

fn l1_normalized(hist: [f64; NUM_BINS]) -> Option<[f64; NUM_BINS]> {
    let total: f64 = hist.iter().sum();
    if total < super::DEGENERATE_EPSILON {
        return None;
    }
    Some(hist.map(|h| h / total))
}

/// Mean 8-bin HoG and HoLG over all keypoints, each patch aligned with its keypoint orientation.
///
/// Keypoints whose patch has no gradient or no Laplace gradient are skipped;
/// if none remain the corpus is rejected.
pub fn mean_histograms(
    corpus: &[(&GrayImage, &[Keypoint])],
    params: &DescriptorParams,
) -> Result<MeanHistograms> {
    params.validate()?;
    let jobs: Vec<(&GrayImage, &Keypoint)> = corpus
        .iter()
        .flat_map(|(img, kps)| kps.iter().map(move |kp| (*img, kp)))
        .collect();
    if jobs.is_empty() {
        return Err(Error::Input("mean histograms need at least one keypoint".into()));
    }
    let per_keypoint: Vec<Option<([f64; NUM_BINS], [f64; NUM_BINS])>> = jobs
        .par_iter()
        .map(|(img, kp)| -> Result<_> {
            let patch = extract_patch(img, kp, params.side, params.magnification)?;
            let g = gradient(&patch.to_image())?;
            let d = laplace_of_field(&g)?;
            let hog = l1_normalized(accumulate_orientation_histogram(&g));
            let holg = l1_normalized(accumulate_orientation_histogram(&d));
            Ok(hog.zip(holg))
        })
        .collect::<Result<_>>()?;

    let mut hog = [0.0; NUM_BINS];
    let mut holg = [0.0; NUM_BINS];
    let mut count = 0usize;
    for (h, l) in per_keypoint.into_iter().flatten() {
        for b in 0..NUM_BINS {
            hog[b] += h[b];
            holg[b] += l[b];
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::Input("every keypoint in the corpus sits on a flat patch".into()));
    }
    let n = count as f64;
    Ok(MeanHistograms {
        hog: hog.map(|v| v / n),
        holg: holg.map(|v| v / n),
        count,
    })
}
