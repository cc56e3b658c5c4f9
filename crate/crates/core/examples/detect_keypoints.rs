//! Multi-scale LoG detection with dominant orientations, written as a keypoint file.
//!
//! cargo run --example detect_keypoints [image.pgm] [out.kp]

use dci::cli::detect_oriented;
use dci::formats::format_keypoints;
use dci::imageio::load_image;
use dci::DetectorParams;

pub fn run_example() -> dci::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/natural/coins.pgm").into());
    let image = load_image(&path)?;
    let params = DetectorParams::default();
    let keypoints = detect_oriented(&image, &params)?;

    let bright = keypoints.iter().filter(|k| k.response < 0.0).count();
    println!(
        "{path}: {} keypoints ({bright} bright blobs, {} dark), sigmas {:.2}..{:.2}",
        keypoints.len(),
        keypoints.len() - bright,
        params.sigmas()[0],
        params.sigmas()[params.num_scales - 1]
    );
    for kp in keypoints.iter().take(5) {
        println!(
            "  ({:7.2}, {:7.2}) scale {:5.2} orientation {:6.1} deg response {:+.4}",
            kp.x,
            kp.y,
            kp.scale,
            kp.orientation.to_degrees(),
            kp.response
        );
    }
    if let Some(out) = args.next() {
        dci::formats::write_atomic(&out, format_keypoints(&keypoints).as_bytes())?;
        println!("wrote {out}");
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
