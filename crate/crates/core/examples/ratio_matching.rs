//! Distance-ratio matching between an image and its inverted, shifted copy.
//!
//! cargo run --example ratio_matching

use dci::cli::detect_oriented;
use dci::imageio::load_image;
use dci::{describe_many, match_ratio, DescriptorKind, DescriptorParams, DetectorParams, FlipMode, GrayImage, Keypoint};

fn describe_all(kind: DescriptorKind, image: &GrayImage, kps: &[Keypoint]) -> dci::Result<Vec<dci::Descriptor>> {
    describe_many(kind, image, kps, FlipMode::Upright, &DescriptorParams::default())
        .into_iter()
        .collect()
}

pub fn run_example() -> dci::Result<()> {
    let full = load_image(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/natural/camera.pgm"))?;
    let a = GrayImage::from_fn(240, 240, |x, y| full.get(x + 120, y + 60));
    // same scene, inverted and shifted by (7, 4)
    let b = GrayImage::from_fn(240, 240, |x, y| 255.0 - full.get(x + 113, y + 56));

    let params = DetectorParams::default();
    let kps_a = detect_oriented(&a, &params)?;
    let kps_b = detect_oriented(&b, &params)?;
    println!("{} keypoints in A, {} in B", kps_a.len(), kps_b.len());

    for kind in [DescriptorKind::Dci, DescriptorKind::Hog] {
        let matches = match_ratio(&describe_all(kind, &a, &kps_a)?, &describe_all(kind, &b, &kps_b)?, 0.8)?;
        let correct = matches
            .iter()
            .filter(|m| {
                let (p, q) = (&kps_a[m.index_a], &kps_b[m.index_b]);
                (p.x + 7.0 - q.x).hypot(p.y + 4.0 - q.y) < 1.5
            })
            .count();
        println!("{kind}: {} matches at ratio 0.8, {correct} geometrically correct", matches.len());
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
