//! Recall versus 1-precision for an image pair related by a homography.
//! Compares DCI and the gradient-histogram baseline on a half-turned,
//! contrast-inverted copy of the image.
//!
//! cargo run --example evaluate_pair

use dci::cli::{evaluate_pair, EvaluateConfig};
use dci::imageio::load_image;
use dci::{DescriptorKind, FlipMode, GrayImage, Homography};

pub fn run_example() -> dci::Result<()> {
    let full = load_image(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/natural/chelsea.pgm"))?;
    let a = GrayImage::from_fn(200, 200, |x, y| full.get(x + 100, y + 30));
    let b = a.rotate180().map(|v| 255.0 - v);
    let h = Homography::rotate180(a.width(), a.height());

    let mut curves = Vec::new();
    for kind in [DescriptorKind::Dci, DescriptorKind::Hog] {
        let config = EvaluateConfig {
            kind,
            mode: FlipMode::Oriented,
            ..Default::default()
        };
        let result = evaluate_pair(&a, &b, &h, &config)?;
        println!("{kind}: {} correspondences, area {:.3}", result.correspondences, result.curve.area());
        curves.push(result.curve);
    }
    println!("threshold  DCI recall / 1-prec   HoG recall / 1-prec");
    for (d, g) in curves[0].samples.iter().zip(&curves[1].samples).step_by(3) {
        println!(
            "{:9.2}  {:10.3} / {:6.3}     {:10.3} / {:6.3}",
            d.threshold, d.recall, d.one_minus_precision, g.recall, g.one_minus_precision
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
