//! Decoupling ratios of random band-limited data over caps of width R^{-1/2}, plus strip
//! occupancy and dyadic pigeonholing of the per-cube mass.
//!
//! `cargo run --release --example decoupling`

use schrodinger_lab::field::{GridSpec, SupportBall};
use schrodinger_lab::rng::{random_band_limited, seeded};
use schrodinger_lab::strichartz::{
    cap_pieces, cap_width, cube_norms, decoupling_ratio, dyadic_pigeonhole, strip_occupancy, CubeUnion,
};
use std::time::Instant;

fn main() -> schrodinger_lab::Result<()> {
    for r in [256.0, 1024.0, 4096.0] {
        let grid = GridSpec::standard(1, r)?;
        let f = random_band_limited(&grid, SupportBall::unit(), &mut seeded(11));
        let clock = Instant::now();
        let pieces = cap_pieces(&f, r)?;
        let report = decoupling_ratio(&f, &pieces, r)?;
        println!(
            "R = {r:>5}: {} caps of width {:.4}, ||F||_6 = {:.4}, square sum {:.4}, ratio {:.4} ({:.2?})",
            pieces.len(),
            cap_width(r),
            report.norm,
            report.square_sum,
            report.ratio,
            clock.elapsed()
        );
    }

    let r = 1024.0;
    let grid = GridSpec::standard(1, r)?;
    let f = random_band_limited(&grid, SupportBall::unit(), &mut seeded(5));
    let full = CubeUnion::full(1, r)?;
    let norms = cube_norms(&f, &full, 6.0)?;
    let masses: Vec<f64> = norms.iter().map(|n| n.powi(6)).collect();
    let top = norms.iter().copied().fold(0.0, f64::max);
    let class = dyadic_pigeonhole(&norms, &masses, r, top)?;
    println!(
        "pigeonhole over {} cubes: class {} of {}, {} members keep {:.1}% of the L^6 mass",
        full.len(),
        class.class,
        class.class_count,
        class.members.len(),
        100.0 * class.retained_fraction()
    );
    let cubes = full.cubes.iter().enumerate().filter(|(k, _)| class.members.contains(k)).map(|(_, &c)| c);
    let y = CubeUnion::new(1, r, cubes)?;
    let strips = strip_occupancy(&y);
    println!("selected union: sigma = {} (most cubes in one horizontal strip)", strips.sigma);
    Ok(())
}
