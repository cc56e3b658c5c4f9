mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dci::cli::corpus_statistics;
use dci::formats::{format_keypoints, parse_keypoints, DescriptorFile};
use dci::imageio::save_pgm;
use dci::{match_ratio, DescriptorParams, DetectorParams, GrayImage, Keypoint};
use tempfile::TempDir;

use common::{corpus_dir, invert, load};

fn dci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dci")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = dci(args);
    assert!(
        out.status.success(),
        "dci {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_image(dir: &TempDir, name: &str, img: &GrayImage) -> PathBuf {
    let p = dir.path().join(name);
    save_pgm(img, &p).unwrap();
    p
}

fn write_text(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// 200x200 crop of a natural image, small enough for quick end-to-end runs.
fn crop() -> GrayImage {
    let img = load("camera");
    GrayImage::from_fn(200, 200, |x, y| img.get(x + 150, y + 80))
}

fn blob() -> GrayImage {
    GrayImage::from_fn(96, 96, |x, y| {
        let r2 = (x as f64 - 48.0).powi(2) + (y as f64 - 47.0).powi(2);
        100.0 + 100.0 * (-r2 / 32.0).exp()
    })
}

#[test]
fn detect_counts_keypoints() {
    let dir = TempDir::new().unwrap();
    let flat = write_image(&dir, "flat.pgm", &GrayImage::constant(80, 80, 90.0));
    let kps = dir.path().join("flat.kp");
    let out = ok(&["detect", s(&flat), "--out", s(&kps)]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0 keypoints");
    assert!(parse_keypoints(&std::fs::read_to_string(&kps).unwrap(), &kps).unwrap().is_empty());

    let blob = write_image(&dir, "blob.pgm", &blob());
    let out = ok(&["detect", s(&blob)]);
    let kps = parse_keypoints(&String::from_utf8(out.stdout).unwrap(), Path::new("-")).unwrap();
    assert_eq!(kps.len(), 1);
    assert!((kps[0].x - 48.0).abs() < 1.0 && (kps[0].y - 47.0).abs() < 1.0);
}

#[test]
fn missing_and_bad_inputs_fail() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.pgm");
    let out = dci(&["detect", s(&missing)]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());

    let garbage = write_text(&dir, "garbage.pgm", "P5\n2 2\n255\n");
    assert!(!dci(&["detect", s(&garbage)]).status.success());

    let img = write_image(&dir, "img.pgm", &crop());
    let kp = write_text(&dir, "k.kp", "100 100 3 0 0\n");
    assert!(!dci(&["describe", s(&img), s(&kp), "--side", "30"]).status.success());
    assert!(!dci(&["describe", s(&img), s(&kp), "--mag", "-1"]).status.success());
    assert!(!dci(&["describe", s(&img), s(&kp), "--kind", "surf"]).status.success());
    assert!(!dci(&["detect", s(&img), "--scales", "2"]).status.success());
    // a failed run leaves no artifact behind
    let out = dir.path().join("never.txt");
    assert!(!dci(&["describe", s(&img), s(&missing), "--out", s(&out)]).status.success());
    assert!(!out.exists());
}

#[test]
fn describe_empty_keypoint_file() {
    let dir = TempDir::new().unwrap();
    let img = write_image(&dir, "img.pgm", &crop());
    let kp = write_text(&dir, "empty.kp", "# nothing\n");
    let out = ok(&["describe", s(&img), s(&kp)]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "DCI 128 0 upright\n");
    let out = ok(&["describe", s(&img), s(&kp), "--kind", "hog", "--mode", "oriented"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "HOG 128 0 oriented\n");
}

#[test]
fn describe_is_deterministic_and_inversion_invariant() {
    let dir = TempDir::new().unwrap();
    let image = crop();
    let img = write_image(&dir, "img.pgm", &image);
    let inv = write_image(&dir, "inv.pgm", &invert(&image));
    let kps = dir.path().join("img.kp");
    ok(&["detect", s(&img), "--out", s(&kps)]);

    let a1 = dir.path().join("a1.txt");
    let a2 = dir.path().join("a2.txt");
    let b = dir.path().join("b.txt");
    ok(&["describe", s(&img), s(&kps), "--out", s(&a1)]);
    ok(&["describe", s(&img), s(&kps), "--out", s(&a2)]);
    ok(&["describe", s(&inv), s(&kps), "--out", s(&b)]);
    assert_eq!(std::fs::read(&a1).unwrap(), std::fs::read(&a2).unwrap());

    let fa = DescriptorFile::read(&a1).unwrap();
    let fb = DescriptorFile::read(&b).unwrap();
    assert!(fa.records.len() > 10);
    assert_eq!(fa.records.len(), fb.records.len());
    for (x, y) in fa.records.iter().zip(&fb.records) {
        assert_eq!(x.keypoint, y.keypoint);
        assert!(x.descriptor.max_abs_diff(&y.descriptor) < 1e-6);
    }
}

#[test]
fn describe_skips_out_of_bounds_keypoints() {
    let dir = TempDir::new().unwrap();
    let img = write_image(&dir, "img.pgm", &crop());
    let text = format_keypoints(&[
        Keypoint::new(50.0, 60.0, 3.0, 0.0),
        Keypoint::new(250.0, 60.0, 3.0, 0.0),
        Keypoint::new(70.0, 80.0, 2.0, 1.0),
    ]);
    let kp = write_text(&dir, "k.kp", &text);
    let desc = dir.path().join("d.txt");
    let out = ok(&["describe", s(&img), s(&kp), "--out", s(&desc)]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("keypoint 1"), "{stderr}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("2 descriptors written, 1 skipped"), "{stdout}");
    let file = DescriptorFile::read(&desc).unwrap();
    let xs: Vec<f64> = file.records.iter().map(|r| r.keypoint.x).collect();
    assert_eq!(xs, [50.0, 70.0]);
}

#[test]
fn degenerate_descriptor_is_flagged() {
    let dir = TempDir::new().unwrap();
    let img = write_image(&dir, "flat.pgm", &GrayImage::constant(64, 64, 80.0));
    let kp = write_text(&dir, "k.kp", "32 32 3 0 0\n");
    let out = ok(&["describe", s(&img), s(&kp)]);
    let file = DescriptorFile::parse(&out.stdout, Path::new("-")).unwrap();
    assert!(file.records[0].descriptor.is_degenerate());
    assert!(String::from_utf8(out.stderr).unwrap().contains("1 degenerate"));
}

#[test]
fn binary_descriptors_match_text() {
    let dir = TempDir::new().unwrap();
    let img = write_image(&dir, "img.pgm", &crop());
    let kps = dir.path().join("img.kp");
    ok(&["detect", s(&img), "--out", s(&kps)]);
    let text = dir.path().join("d.txt");
    let bin = dir.path().join("d.bin");
    ok(&["describe", s(&img), s(&kps), "--mode", "oriented", "--out", s(&text)]);
    ok(&["describe", s(&img), s(&kps), "--mode", "oriented", "--binary", "--out", s(&bin)]);
    let t = DescriptorFile::read(&text).unwrap();
    let b = DescriptorFile::read(&bin).unwrap();
    assert_eq!((b.kind, b.mode), (t.kind, t.mode));
    assert_eq!(t.records.len(), b.records.len());
    for (x, y) in t.records.iter().zip(&b.records) {
        assert!(x.descriptor.max_abs_diff(&y.descriptor) < 1e-6);
    }

    // binary and text files can be matched against each other
    let out = ok(&["match", s(&text), s(&bin), "--ratio", "0.8"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().count() > 1);
}

fn match_rows(csv: &str) -> Vec<(usize, usize, f64, f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index_a,index_b,distance,ratio"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn match_file_against_itself() {
    let dir = TempDir::new().unwrap();
    let img = write_image(&dir, "img.pgm", &crop());
    let kps = dir.path().join("img.kp");
    ok(&["detect", s(&img), "--out", s(&kps)]);
    let desc = dir.path().join("d.txt");
    ok(&["describe", s(&img), s(&kps), "--out", s(&desc)]);
    let file = DescriptorFile::read(&desc).unwrap();

    let out = ok(&["match", s(&desc), s(&desc)]);
    let rows = match_rows(&String::from_utf8(out.stdout).unwrap());
    let distinct = file.records.iter().filter(|r| !r.descriptor.is_degenerate()).count();
    assert_eq!(rows.len(), distinct);
    for (a, b, d, r) in rows {
        assert_eq!((a, d, r), (b, 0.0, 0.0));
    }
}

#[test]
fn match_toy_files_agree_with_library() {
    let dir = TempDir::new().unwrap();
    let row = |x: f64, head: [f64; 3]| {
        let mut v = vec![0.0; 128];
        v[..3].copy_from_slice(&head);
        v[127] = 0.5;
        let values: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        format!("{x} 0 1 0 {}\n", values.join(" "))
    };
    let a = format!(
        "DCI 128 3 upright\n{}{}{}",
        row(0.0, [0.1, 0.0, 0.0]),
        row(1.0, [0.0, 0.3, 0.0]),
        row(2.0, [0.2, 0.2, 0.2])
    );
    let b = format!(
        "DCI 128 3 upright\n{}{}{}",
        row(0.0, [0.0, 0.0, 0.0]),
        row(1.0, [0.0, 0.4, 0.0]),
        row(2.0, [0.3, 0.3, 0.3])
    );
    let pa = write_text(&dir, "a.txt", &a);
    let pb = write_text(&dir, "b.txt", &b);
    let out = ok(&["match", s(&pa), s(&pb), "--ratio", "0.9"]);
    let rows = match_rows(&String::from_utf8(out.stdout).unwrap());

    let da = DescriptorFile::read(&pa).unwrap().descriptors();
    let db = DescriptorFile::read(&pb).unwrap().descriptors();
    let want = match_ratio(&da, &db, 0.9).unwrap();
    assert_eq!(rows.len(), want.len());
    for (r, w) in rows.iter().zip(&want) {
        assert_eq!((r.0, r.1, r.2, r.3), (w.index_a, w.index_b, w.distance, w.distance_ratio));
    }
}

#[test]
fn match_needs_two_references() {
    let dir = TempDir::new().unwrap();
    let mut line = vec!["5 5 1 0".to_string()];
    line.extend((0..128).map(|i| if i == 0 { "1".into() } else { "0".into() }));
    let one = write_text(&dir, "one.txt", &format!("DCI 128 1 upright\n{}\n", line.join(" ")));
    let out = dci(&["match", s(&one), s(&one)]);
    assert!(!out.status.success());
    assert!(!dci(&["match", s(&one), s(&one), "--ratio", "1.5"]).status.success());
}

fn curve_rows(csv: &str) -> Vec<[f64; 5]> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("threshold,recall,one_minus_precision,correct,false"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|f| f.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3], v[4]]
        })
        .collect()
}

fn evaluate(dir: &TempDir, a: &Path, b: &Path, h: &str, extra: &[&str]) -> (Vec<[f64; 5]>, String) {
    let hp = write_text(dir, "h.txt", h);
    let csv = dir.path().join("curve.csv");
    let mut args = vec!["evaluate", s(a), s(b), s(&hp), "--out", s(&csv)];
    args.extend_from_slice(extra);
    let out = ok(&args);
    (
        curve_rows(&std::fs::read_to_string(&csv).unwrap()),
        String::from_utf8(out.stdout).unwrap(),
    )
}

const IDENTITY: &str = "1 0 0\n0 1 0\n0 0 1\n";

#[test]
fn evaluate_self_match() {
    let dir = TempDir::new().unwrap();
    let img = write_image(&dir, "img.pgm", &crop());
    let (rows, summary) = evaluate(&dir, &img, &img, IDENTITY, &[]);
    assert_eq!(rows.len(), 20);
    assert!(summary.starts_with("#correspondences "), "{summary}");
    assert!(summary.contains("area"));
    let loose = rows.last().unwrap();
    assert_eq!(loose[0], 1.0);
    assert!(loose[1] > 0.99, "{loose:?}");
    assert!(loose[2] < 0.01);
    for w in rows.windows(2) {
        assert!(w[1][1] >= w[0][1]);
    }
}

#[test]
fn evaluate_half_turn_matches_self_recall() {
    let dir = TempDir::new().unwrap();
    let image = crop();
    let img = write_image(&dir, "img.pgm", &image);
    let rot = write_image(&dir, "rot.pgm", &image.rotate180());
    let oriented = ["--mode", "oriented"];
    let (own, _) = evaluate(&dir, &img, &img, IDENTITY, &oriented);
    let (turned, _) = evaluate(&dir, &img, &rot, "-1 0 199\n0 -1 199\n0 0 1\n", &oriented);
    let at = |rows: &[[f64; 5]]| rows.iter().find(|r| (r[0] - 0.8).abs() < 1e-9).unwrap()[1];
    assert!(turned.iter().any(|r| r[3] > 0.0));
    assert!((at(&own) - at(&turned)).abs() <= 0.05, "{} vs {}", at(&own), at(&turned));
}

#[test]
fn evaluate_inverted_pair_dci_beats_hog() {
    let dir = TempDir::new().unwrap();
    let image = crop();
    let img = write_image(&dir, "img.pgm", &image);
    let inv = write_image(&dir, "inv.pgm", &invert(&image));
    let (dci_rows, _) = evaluate(&dir, &img, &inv, IDENTITY, &["--kind", "dci"]);
    let (hog_rows, _) = evaluate(&dir, &img, &inv, IDENTITY, &["--kind", "hog"]);
    for (d, h) in dci_rows.iter().zip(&hog_rows) {
        assert!(d[1] > h[1], "threshold {}: {} vs {}", d[0], d[1], h[1]);
        assert!(d[2] <= h[2]);
    }
}

fn stats_rows(csv: &str) -> Vec<(f64, f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bin,hog,holg"));
    lines
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            (v[1].parse().unwrap(), v[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn stats_single_image_matches_library() {
    let dir = TempDir::new().unwrap();
    let image = crop();
    write_image(&dir, "only.pgm", &image);
    let out = ok(&["stats", s(dir.path())]);
    let rows = stats_rows(&String::from_utf8(out.stdout).unwrap());
    let lib = corpus_statistics(&[image], &DescriptorParams::default(), &DetectorParams::default()).unwrap();
    assert_eq!(rows.len(), 8);
    for (b, (hog, holg)) in rows.iter().enumerate() {
        assert_eq!((*hog, *holg), (lib.hog[b], lib.holg[b]));
    }
}

#[test]
fn stats_rejects_empty_directory() {
    let dir = TempDir::new().unwrap();
    let out = dci(&["stats", s(dir.path())]);
    assert!(!out.status.success());
    write_text(&dir, "notes.txt", "not an image");
    assert!(!dci(&["stats", s(dir.path())]).status.success());
}

#[test]
fn stats_on_natural_corpus_reduces_bin_dominance() {
    let dir = TempDir::new().unwrap();
    let mut names: Vec<PathBuf> = std::fs::read_dir(corpus_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    for p in names.iter().take(10) {
        std::fs::copy(p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    let csv = dir.path().join("stats.csv");
    ok(&["stats", s(dir.path()), "--out", s(&csv)]);
    let rows = stats_rows(&std::fs::read_to_string(&csv).unwrap());
    let hog = rows[0].0 / rows[1].0;
    let holg = rows[0].1 / rows[1].1;
    assert!(holg < hog, "HoLG {holg} HoG {hog}");
}
