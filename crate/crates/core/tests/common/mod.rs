#![allow(dead_code)]

use std::path::PathBuf;

use dci::imageio::load_image;
use dci::{GrayImage, Keypoint};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn corpus_dir() -> PathBuf {
    data_dir().join("natural")
}

pub fn load(name: &str) -> GrayImage {
    load_image(corpus_dir().join(format!("{name}.pgm"))).unwrap()
}

/// Every image of the natural corpus, in file-name order.
pub fn corpus() -> Vec<(String, GrayImage)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pgm"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, load_image(&p).unwrap())
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly placed keypoints at least `margin` pixels from the border.
pub fn random_keypoints(image: &GrayImage, n: usize, margin: f64, rng: &mut impl Rng) -> Vec<Keypoint> {
    (0..n)
        .map(|_| {
            Keypoint::new(
                rng.gen_range(margin..image.width() as f64 - margin),
                rng.gen_range(margin..image.height() as f64 - margin),
                rng.gen_range(1.5..6.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect()
}

pub fn invert(image: &GrayImage) -> GrayImage {
    image.map(|v| 255.0 - v)
}
