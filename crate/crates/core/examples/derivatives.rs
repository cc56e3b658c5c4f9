//! Image derivatives behind the descriptor: gradient, Laplace gradient and the
//! divergence of a patch, on a bright and a dark Gaussian bump.
//!
//! cargo run --example derivatives

use dci::image::{gradient, laplace_of_field};
use dci::{divergence_phi, divergence_phi_flux, Patch};

fn bump(sign: f64) -> Patch {
    Patch::from_fn(31, |x, y| {
        let r2 = (x as f64 - 15.0).powi(2) + (y as f64 - 15.0).powi(2);
        128.0 + sign * 80.0 * (-r2 / 32.0).exp()
    })
    .unwrap()
}

pub fn run_example() -> dci::Result<()> {
    for (label, patch) in [("bright", bump(1.0)), ("dark", bump(-1.0))] {
        let g = gradient(&patch.to_image())?;
        let d = laplace_of_field(&g)?;
        // a pixel to the right of the centre
        let [gx, gy] = g.get(19, 15);
        let [dx, dy] = d.get(19, 15);
        println!("{label} bump");
        println!("  gradient at (19, 15):        ({gx:8.3}, {gy:8.3})");
        println!("  Laplace gradient at (19, 15): ({dx:8.3}, {dy:8.3})");
        println!(
            "  divergence: interior sum {:.6}, boundary flux {:.6}",
            divergence_phi(&patch),
            divergence_phi_flux(&patch)
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
