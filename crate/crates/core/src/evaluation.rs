//! Matching evaluation: overlap-error ground truth, recall vs 1-precision
//! curves and ranked-list average precision.
//!
//! A keypoint region is the disk of radius `radius_factor · scale`; the
//! default factor equals the descriptor's patch magnification so the evaluated
//! region is the described one.

use std::collections::HashSet;
use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::homography::Homography;
use crate::keypoint::Keypoint;
use crate::matching::MatchPair;
use crate::patch::DEFAULT_MAGNIFICATION;

/// Maximum overlap error for a correct correspondence.
pub const DEFAULT_MAX_OVERLAP_ERROR: f64 = 0.5;

/// Samples per axis of the rasterized union bounding box.
pub const OVERLAP_GRID: usize = 200;

const BOUNDARY_SAMPLES: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapParams {
    pub radius_factor: f64,
    pub grid: usize,
}

impl Default for OverlapParams {
    fn default() -> Self {
        Self {
            radius_factor: DEFAULT_MAGNIFICATION,
            grid: OVERLAP_GRID,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BBox {
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
}

impl BBox {
    fn disk(x: f64, y: f64, r: f64) -> Self {
        Self {
            min_x: x - r,
            min_y: y - r,
            max_x: x + r,
            max_y: y + r,
        }
    }

    fn intersects(&self, o: &BBox) -> bool {
        self.min_x <= o.max_x && o.min_x <= self.max_x && self.min_y <= o.max_y && o.min_y <= self.max_y
    }

    fn union(&self, o: &BBox) -> BBox {
        BBox {
            min_x: self.min_x.min(o.min_x),
            min_y: self.min_y.min(o.min_y),
            max_x: self.max_x.max(o.max_x),
            max_y: self.max_y.max(o.max_y),
        }
    }
}

/// Disk of image A projected into image B: its bounding box there plus
/// what is needed to test membership by back-projection.
struct MappedRegion {
    centre: (f64, f64),
    radius: f64,
    bbox: BBox,
}

impl MappedRegion {
    fn new(kp: &Keypoint, h: &Homography, radius_factor: f64) -> Result<Self> {
        let radius = radius_factor * kp.scale;
        let mut bbox = BBox {
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
        };
        for k in 0..BOUNDARY_SAMPLES {
            let t = TAU * k as f64 / BOUNDARY_SAMPLES as f64;
            let (x, y) = h.apply(kp.x + radius * t.cos(), kp.y + radius * t.sin())?;
            bbox.min_x = bbox.min_x.min(x);
            bbox.min_y = bbox.min_y.min(y);
            bbox.max_x = bbox.max_x.max(x);
            bbox.max_y = bbox.max_y.max(y);
        }
        h.apply(kp.x, kp.y)?;
        // chords between boundary samples cut slightly inside the conic
        let pad = 0.01 * (bbox.max_x - bbox.min_x).max(bbox.max_y - bbox.min_y);
        bbox.min_x -= pad;
        bbox.min_y -= pad;
        bbox.max_x += pad;
        bbox.max_y += pad;
        Ok(Self {
            centre: (kp.x, kp.y),
            radius,
            bbox,
        })
    }

    #[inline]
    fn contains(&self, inverse: &Homography, x: f64, y: f64) -> bool {
        let [u, v, w] = inverse.apply_homogeneous(x, y);
        if w <= 0.0 {
            return false;
        }
        let dx = u / w - self.centre.0;
        let dy = v / w - self.centre.1;
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

fn rasterized_error(
    region_a: &MappedRegion,
    inverse: &Homography,
    kp_b: &Keypoint,
    params: &OverlapParams,
) -> f64 {
    let rb = params.radius_factor * kp_b.scale;
    let bbox_b = BBox::disk(kp_b.x, kp_b.y, rb);
    if !region_a.bbox.intersects(&bbox_b) {
        return 1.0;
    }
    let bbox = region_a.bbox.union(&bbox_b);
    let n = params.grid;
    let step_x = (bbox.max_x - bbox.min_x) / n as f64;
    let step_y = (bbox.max_y - bbox.min_y) / n as f64;
    let mut intersection = 0usize;
    let mut union = 0usize;
    for j in 0..n {
        let y = bbox.min_y + (j as f64 + 0.5) * step_y;
        let dy = y - kp_b.y;
        for i in 0..n {
            let x = bbox.min_x + (i as f64 + 0.5) * step_x;
            let dx = x - kp_b.x;
            let in_b = dx * dx + dy * dy <= rb * rb;
            let in_a = region_a.contains(inverse, x, y);
            intersection += (in_a && in_b) as usize;
            union += (in_a || in_b) as usize;
        }
    }
    if union == 0 {
        return 1.0;
    }
    1.0 - intersection as f64 / union as f64
}

fn check_keypoint(kp: &Keypoint) -> Result<()> {
    if !kp.is_finite() || kp.scale <= 0.0 {
        return Err(Error::Input(format!("invalid keypoint {kp:?}")));
    }
    Ok(())
}

/// `1 - |A ∩ B| / |A ∪ B|` for the region of `kp_a` mapped by `h` and the region of `kp_b`.
pub fn overlap_error(kp_a: &Keypoint, kp_b: &Keypoint, h: &Homography) -> Result<f64> {
    overlap_error_with(kp_a, kp_b, h, &OverlapParams::default())
}

pub fn overlap_error_with(
    kp_a: &Keypoint,
    kp_b: &Keypoint,
    h: &Homography,
    params: &OverlapParams,
) -> Result<f64> {
    check_keypoint(kp_a)?;
    check_keypoint(kp_b)?;
    if params.grid < OVERLAP_GRID {
        return Err(Error::Input(format!("overlap grid must be at least {OVERLAP_GRID}")));
    }
    let region = MappedRegion::new(kp_a, h, params.radius_factor)?;
    Ok(rasterized_error(&region, &h.inverse(), kp_b, params))
}

/// One-to-one correspondences between two keypoint sets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    /// `(index_a, index_b, overlap_error)` in assignment order.
    pub pairs: Vec<(usize, usize, f64)>,
    lookup: HashSet<(usize, usize)>,
}

impl GroundTruth {
    pub fn from_pairs(pairs: Vec<(usize, usize, f64)>) -> Self {
        let lookup = pairs.iter().map(|&(a, b, _)| (a, b)).collect();
        Self { pairs, lookup }
    }

    /// Number of correspondences, the recall denominator.
    pub fn count(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, index_a: usize, index_b: usize) -> bool {
        self.lookup.contains(&(index_a, index_b))
    }
}

/// Overlap errors of every pair below `max_error`, as `(error, a, b)`.
///
/// Keypoints whose region cannot be projected into image B are skipped.
pub fn overlap_candidates(
    kps_a: &[Keypoint],
    kps_b: &[Keypoint],
    h: &Homography,
    max_error: f64,
    params: &OverlapParams,
) -> Result<Vec<(f64, usize, usize)>> {
    kps_a.iter().chain(kps_b).try_for_each(check_keypoint)?;
    let inverse = h.inverse();
    let per_a: Vec<Vec<(f64, usize, usize)>> = kps_a
        .par_iter()
        .enumerate()
        .map(|(i, kp_a)| {
            let Ok(region) = MappedRegion::new(kp_a, h, params.radius_factor) else {
                return Vec::new();
            };
            kps_b
                .iter()
                .enumerate()
                .filter_map(|(j, kp_b)| {
                    let e = rasterized_error(&region, &inverse, kp_b, params);
                    (e < max_error).then_some((e, i, j))
                })
                .collect()
        })
        .collect();
    Ok(per_a.into_iter().flatten().collect())
}

/// Greedy one-to-one assignment in ascending overlap-error order.
pub fn assign_greedy(mut candidates: Vec<(f64, usize, usize)>) -> GroundTruth {
    candidates.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = HashSet::new();
    let mut used_b = HashSet::new();
    let mut pairs = Vec::new();
    for (e, a, b) in candidates {
        if used_a.contains(&a) || used_b.contains(&b) {
            continue;
        }
        used_a.insert(a);
        used_b.insert(b);
        pairs.push((a, b, e));
    }
    GroundTruth::from_pairs(pairs)
}

/// Ground-truth correspondences: pairs with overlap error below `max_error`,
/// assigned greedily one-to-one from the smallest error up.
pub fn ground_truth(
    kps_a: &[Keypoint],
    kps_b: &[Keypoint],
    h: &Homography,
    max_error: f64,
) -> Result<GroundTruth> {
    ground_truth_with(kps_a, kps_b, h, max_error, &OverlapParams::default())
}

pub fn ground_truth_with(
    kps_a: &[Keypoint],
    kps_b: &[Keypoint],
    h: &Homography,
    max_error: f64,
    params: &OverlapParams,
) -> Result<GroundTruth> {
    Ok(assign_greedy(overlap_candidates(kps_a, kps_b, h, max_error, params)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub threshold: f64,
    pub recall: f64,
    pub one_minus_precision: f64,
    pub num_correct: usize,
    pub num_false: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationCurve {
    pub samples: Vec<CurveSample>,
}

impl EvaluationCurve {
    /// Area under the best recall reachable at each 1-precision level, over `[0, 1]`.
    ///
    /// Recall is extended as a step function: at 1-precision `p` it is the
    /// largest recall of any sample with 1-precision `<= p`. A perfect matcher scores 1.
    pub fn area(&self) -> f64 {
        let mut points: Vec<(f64, f64)> = self
            .samples
            .iter()
            .map(|s| (s.one_minus_precision, s.recall))
            .collect();
        points.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut area = 0.0;
        let mut best = 0.0f64;
        for (k, &(fp, recall)) in points.iter().enumerate() {
            best = best.max(recall);
            let next = points.get(k + 1).map_or(1.0, |p| p.0);
            area += best * (next - fp);
        }
        area
    }

    pub fn at_threshold(&self, threshold: f64) -> Option<&CurveSample> {
        self.samples
            .iter()
            .find(|s| (s.threshold - threshold).abs() < 1e-9)
    }
}

/// Ratio thresholds 0.05, 0.10, …, 1.00.
pub fn default_thresholds() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 20.0).collect()
}

/// Recall and 1-precision of the ratio matcher at each threshold.
///
/// `candidates` is the unthresholded nearest-neighbour list; at threshold `t`
/// the emitted matches are those with ratio `< t`. With no emitted match
/// 1-precision is reported as 0.
pub fn pr_curve(
    candidates: &[MatchPair],
    truth: &GroundTruth,
    thresholds: &[f64],
) -> Result<EvaluationCurve> {
    if truth.is_empty() {
        return Err(Error::Input("ground truth is empty; recall is undefined".into()));
    }
    let samples = thresholds
        .iter()
        .map(|&threshold| {
            let (mut num_correct, mut num_false) = (0usize, 0usize);
            for m in candidates.iter().filter(|m| m.distance_ratio < threshold) {
                if truth.contains(m.index_a, m.index_b) {
                    num_correct += 1;
                } else {
                    num_false += 1;
                }
            }
            let emitted = num_correct + num_false;
            CurveSample {
                threshold,
                recall: num_correct as f64 / truth.count() as f64,
                one_minus_precision: if emitted == 0 {
                    0.0
                } else {
                    num_false as f64 / emitted as f64
                },
                num_correct,
                num_false,
            }
        })
        .collect();
    Ok(EvaluationCurve { samples })
}

/// Mean of precision@k over the ranks k holding a relevant item.
pub fn average_precision(ranked: &[bool]) -> Result<f64> {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, &relevant) in ranked.iter().enumerate() {
        if relevant {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    if hits == 0 {
        return Err(Error::Input("average precision needs at least one relevant item".into()));
    }
    Ok(sum / hits as f64)
}

pub fn mean_average_precision(queries: &[Vec<bool>]) -> Result<f64> {
    if queries.is_empty() {
        return Err(Error::Input("mean average precision needs at least one query".into()));
    }
    let total = queries
        .iter()
        .map(|q| average_precision(q))
        .sum::<Result<f64>>()?;
    Ok(total / queries.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kp(x: f64, y: f64, s: f64) -> Keypoint {
        Keypoint::new(x, y, s, 0.0)
    }

    #[test]
    fn overlap_examples() {
        let h = Homography::identity();
        assert_eq!(overlap_error(&kp(10.0, 10.0, 2.0), &kp(10.0, 10.0, 2.0), &h).unwrap(), 0.0);
        assert_eq!(overlap_error(&kp(10.0, 10.0, 2.0), &kp(40.0, 10.0, 2.0), &h).unwrap(), 1.0);
        let e = overlap_error(&kp(10.0, 10.0, 2.0), &kp(10.0, 10.0, 4.0), &h).unwrap();
        assert!((e - 0.75).abs() < 0.01, "{e}");
    }

    #[test]
    fn overlap_rejects_bad_inputs() {
        let h = Homography::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-0.1, 0.0, 1.0]]).unwrap();
        assert!(matches!(
            overlap_error(&kp(10.0, 0.0, 2.0), &kp(10.0, 0.0, 2.0), &h),
            Err(Error::BehindPlane)
        ));
        assert!(overlap_error(&kp(1.0, 1.0, 0.0), &kp(1.0, 1.0, 1.0), &Homography::identity()).is_err());
    }

    #[test]
    fn ground_truth_examples() {
        let kps: Vec<Keypoint> = (0..5).map(|i| kp(20.0 * i as f64, 5.0, 1.5)).collect();
        let gt = ground_truth(&kps, &kps, &Homography::identity(), 0.5).unwrap();
        assert_eq!(gt.count(), 5);
        assert!((0..5).all(|i| gt.contains(i, i)));

        let far: Vec<Keypoint> = (0..5).map(|i| kp(20.0 * i as f64, 500.0, 1.5)).collect();
        assert!(ground_truth(&kps, &far, &Homography::identity(), 0.5).unwrap().is_empty());
    }

    #[test]
    fn pr_curve_examples() {
        let gt = GroundTruth::from_pairs(vec![(0, 0, 0.0), (1, 1, 0.0), (2, 2, 0.0), (3, 3, 0.0)]);
        let m = |a, b, r| MatchPair {
            index_a: a,
            index_b: b,
            distance: 0.0,
            distance_ratio: r,
        };
        let cands = [m(0, 0, 0.1), m(1, 1, 0.3), m(2, 3, 0.9)];
        let curve = pr_curve(&cands, &gt, &[0.05, 0.5, 1.0]).unwrap();
        let s = curve.samples;
        assert_eq!((s[0].recall, s[0].one_minus_precision, s[0].num_correct, s[0].num_false), (0.0, 0.0, 0, 0));
        assert_eq!((s[1].recall, s[1].one_minus_precision), (0.5, 0.0));
        assert_eq!((s[2].num_correct, s[2].num_false), (2, 1));
        assert!((s[2].one_minus_precision - 1.0 / 3.0).abs() < 1e-12);

        assert!(pr_curve(&cands, &GroundTruth::default(), &[0.5]).is_err());
    }

    #[test]
    fn average_precision_examples() {
        assert_eq!(average_precision(&[true, true, true]).unwrap(), 1.0);
        assert!((average_precision(&[true, false, true]).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        assert!((average_precision(&[false, false, false, true]).unwrap() - 0.25).abs() < 1e-12);
        assert!(average_precision(&[false, false]).is_err());
        let map = mean_average_precision(&[vec![true], vec![false, true]]).unwrap();
        assert!((map - 0.75).abs() < 1e-12);
    }

    #[test]
    fn area_of_perfect_curve() {
        let curve = EvaluationCurve {
            samples: vec![CurveSample {
                threshold: 1.0,
                recall: 1.0,
                one_minus_precision: 0.0,
                num_correct: 3,
                num_false: 0,
            }],
        };
        assert_eq!(curve.area(), 1.0);
        assert_eq!(default_thresholds().len(), 20);
        assert!((default_thresholds()[19] - 1.0).abs() < 1e-12);
    }
}
