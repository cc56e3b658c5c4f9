//! Describe one keypoint of a natural image with DCI and with the
//! gradient-histogram baseline.
//!
//! cargo run --example describe_keypoint [image.pgm]

use dci::imageio::load_image;
use dci::{describe, describe_hog_baseline, extract_patch, divergence_phi, DescriptorParams, FlipMode, Keypoint};

fn image_path() -> String {
    std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/natural/camera.pgm").into())
}

pub fn run_example() -> dci::Result<()> {
    let image = load_image(image_path())?;
    let params = DescriptorParams::default();
    let kp = Keypoint::new(image.width() as f64 / 2.0, image.height() as f64 / 2.0, 4.0, 0.0);

    let patch = extract_patch(&image, &kp, params.side, params.magnification)?;
    let phi = divergence_phi(&patch);
    println!(
        "patch {}x{} at ({}, {}), divergence {phi:.2} ({})",
        patch.side(),
        patch.side(),
        kp.x,
        kp.y,
        if phi < 0.0 { "bright centre, flipped" } else { "dark centre, kept" }
    );

    let dci = describe(&image, &kp, FlipMode::Upright, &params)?;
    let hog = describe_hog_baseline(&image, &kp, FlipMode::Upright, &params)?;
    for (name, d) in [("DCI", &dci), ("HoG", &hog)] {
        let head: Vec<String> = d.values()[..8].iter().map(|v| format!("{v:.3}")).collect();
        println!("{name}: norm {:.6}, first cell [{}]", d.l2_norm(), head.join(", "));
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
