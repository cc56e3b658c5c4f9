//! Contrast inversion: DCI descriptors of I and 255 - I coincide, gradient
//! histograms do not. Also shows the oriented mode, where the re-estimated
//! orientation turns by half a circle.
//!
//! cargo run --example contrast_inversion [image.pgm]

use dci::imageio::load_image;
use dci::{describe, describe_hog_baseline, dominant_orientation, DescriptorParams, FlipMode, Keypoint};

fn image_path() -> String {
    std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/natural/coins.pgm").into())
}

pub fn run_example() -> dci::Result<()> {
    let image = load_image(image_path())?;
    let inverted = image.map(|v| 255.0 - v);
    let params = DescriptorParams::default();

    println!("{:>12} {:>12} {:>14} {:>12}", "x", "y", "DCI max diff", "HoG L2");
    for k in 1..=6 {
        let kp = Keypoint::new(
            image.width() as f64 * k as f64 / 7.0,
            image.height() as f64 * (7 - k) as f64 / 7.0,
            3.0,
            0.0,
        );
        let a = describe(&image, &kp, FlipMode::Upright, &params)?;
        let b = describe(&inverted, &kp, FlipMode::Upright, &params)?;
        let ha = describe_hog_baseline(&image, &kp, FlipMode::Upright, &params)?;
        let hb = describe_hog_baseline(&inverted, &kp, FlipMode::Upright, &params)?;
        println!("{:>12.1} {:>12.1} {:>14.2e} {:>12.3}", kp.x, kp.y, a.max_abs_diff(&b), ha.distance(&hb));
    }

    let kp = Keypoint::new(image.width() as f64 / 2.0, image.height() as f64 / 2.0, 3.0, 0.0);
    let oa = dominant_orientation(&image, &kp)?.angle;
    let ob = dominant_orientation(&inverted, &kp)?.angle;
    let a = describe(&image, &kp.with_orientation(oa), FlipMode::Oriented, &params)?;
    let b = describe(&inverted, &kp.with_orientation(ob), FlipMode::Oriented, &params)?;
    println!(
        "oriented: orientation {:.1} deg vs {:.1} deg, descriptor L2 {:.2e}",
        oa.to_degrees(),
        ob.to_degrees(),
        a.distance(&b)
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
