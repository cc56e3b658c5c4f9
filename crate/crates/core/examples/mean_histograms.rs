//! Corpus-mean eight-bin histograms of gradients and of Laplace gradients
//! over oriented keypoints. Aligned patches pile gradient mass into bin 0;
//! the Laplace gradient spreads it out.
//!
//! cargo run --release --example mean_histograms [corpus_dir]

use std::path::PathBuf;

use dci::cli::{corpus_statistics, load_corpus};
use dci::{DescriptorParams, DetectorParams};

pub fn run_example() -> dci::Result<()> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/natural")));
    let images: Vec<_> = load_corpus(&dir)?.into_iter().map(|(_, img)| img).take(4).collect();
    let stats = corpus_statistics(&images, &DescriptorParams::default(), &DetectorParams::default())?;

    println!("{} keypoints over {} images", stats.count, images.len());
    println!("bin   HoG    HoLG");
    for b in 0..8 {
        println!("{b:>3} {:6.3} {:7.3}", stats.hog[b], stats.holg[b]);
    }
    println!(
        "bin0/bin1: HoG {:.2}, HoLG {:.2}",
        stats.hog_dominance(),
        stats.holg_dominance()
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
