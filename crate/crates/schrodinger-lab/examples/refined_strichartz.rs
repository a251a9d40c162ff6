//! Refined Strichartz ratios: spread packets filling sigma strips, and two transverse
//! packet families for the bilinear estimate.
//!
//! `cargo run --release --example refined_strichartz`

use schrodinger_lab::experiments::{build_packet_spread, run_scaling_experiment, Experiment, ScalingGrid};
use schrodinger_lab::field::fit_exponent;
use schrodinger_lab::strichartz::refined_strichartz_ratio;

fn main() -> schrodinger_lab::Result<()> {
    let r = 1024.0;
    let mut points = Vec::new();
    for sigma in [2, 4, 8, 16, 32] {
        let ex = build_packet_spread(sigma, r)?;
        let ratio = refined_strichartz_ratio(&ex.g, &ex.y)?;
        println!(
            "sigma = {sigma:>2}: {} cubes, ||u||_L6(Y) = {:.5}, ||g||_2 = {:.4}, ratio {:.4}, cube spread {:.3}, tubes disjoint {}",
            ex.y.len(),
            ratio.norm,
            ratio.l2,
            ratio.ratio,
            ratio.cube_spread,
            ex.tubes_disjoint()
        );
        points.push((sigma as f64, ratio.norm / ratio.l2));
    }
    let fit = fit_exponent(&points)?;
    println!("||u||_L6(Y) / ||g||_2 ~ sigma^{:.4} (max residual {:.4})", fit.slope, fit.max_residual);

    let grid = ScalingGrid { trials: 2, ..ScalingGrid::default_for(Experiment::BilinearLaw) };
    let outcome = run_scaling_experiment("bilinear_law", &grid)?;
    for row in &outcome.rows {
        println!("bilinear R = {:>5}: N = {:?}, M = {:?}, ratio {:.4}", row.r, row.sigma_or_n, row.m, row.ratio);
    }
    println!("bilinear ratio ~ R^{:.4}; summary {:?}", outcome.fit.slope, outcome.summary);
    Ok(())
}
