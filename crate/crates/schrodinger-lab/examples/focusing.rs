//! Sparse focusing: data on a lattice of spacing ~R^{-1/6} whose solution is large on a
//! thin set of unit squares.
//!
//! `cargo run --release --example focusing [R]`

use schrodinger_lab::experiments::{build_sparse_focusing, FocusingParams};
use std::time::Instant;

fn main() -> schrodinger_lab::Result<()> {
    let r: f64 = std::env::args().nth(1).map(|s| s.parse().expect("R")).unwrap_or(512.0);
    let clock = Instant::now();
    let ex = build_sparse_focusing(r, FocusingParams::default())?;
    println!("R = {r}: {} modes at spacing {:.5} ({:.2?})", ex.modes, ex.spacing, clock.elapsed());
    println!(
        "|X| = {} unit squares = {:.3} R^(3/2), height H = {:.3}, ||g||_2 = {:.4}",
        ex.squares.len(),
        ex.squares.len() as f64 / r.powf(1.5),
        ex.height,
        ex.l2_norm
    );
    println!(
        "H / ||g||_2 = {:.4} (R^(-5/12) = {:.4}), densest sqrt(R)-ball holds {} squares = {:.3} sqrt(R)",
        ex.relative_height(),
        r.powf(-5.0 / 12.0),
        ex.per_ball_density,
        ex.per_ball_density as f64 / r.sqrt()
    );
    println!("Strichartz consistency ratio {:.3}", ex.strichartz_consistency());
    Ok(())
}
