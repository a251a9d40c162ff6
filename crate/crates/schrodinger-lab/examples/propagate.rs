//! Free evolution of a Gaussian at R = 1024: unitarity, mixed norms, the maximal
//! function, Littlewood-Paley pieces and parabolic rescaling.
//!
//! `cargo run --release --example propagate`

use schrodinger_lab::field::{
    littlewood_paley, maximal_function, mixed_norm, parabolic_rescale, propagate, GridSpec, MixedNormParams, Region,
    SupportBall,
};
use schrodinger_lab::rng::{random_band_limited, seeded};
use schrodinger_lab::wavepacket::reference_gaussian;

fn main() -> schrodinger_lab::Result<()> {
    let r = 1024.0;
    let grid = GridSpec::standard(1, r)?;
    let f = reference_gaussian(&grid);
    let times = grid.time_grid();
    let u = propagate(&f, &times)?;
    println!("R = {r}: torus period {}, {} points, {} time rows", grid.period, grid.nx, times.len());

    let norm = f.l2_norm();
    let drift = (0..u.nt())
        .map(|j| {
            let mass: f64 = u.slice(j).iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_volume();
            (mass.sqrt() - norm).abs() / norm
        })
        .fold(0.0, f64::max);
    println!("||f||_2 = {norm:.6}, max relative drift of ||u(t)||_2 = {drift:.2e}");

    for (p, q) in [(2.0, 2.0), (6.0, 6.0), (4.0, f64::INFINITY)] {
        let value = mixed_norm(&u, &MixedNormParams::new(p, q, Region::standard(&grid))?)?;
        println!("||u||_(L^{p}_x L^{q}_t on B(0,R) x [0,R]) = {value:.6}");
    }
    let sup = maximal_function(&u)?;
    let peak = sup.iter().copied().fold(0.0, f64::max);
    println!("maximal function: peak {peak:.6}, value at x = R/2 {:.3e}", sup[grid.nx / 2 + (r / 2.0 / grid.dx()) as usize]);

    let wide = SupportBall { center: [0.0, 0.0], radius: 8.0 };
    let data = random_band_limited(&GridSpec::with_resolution(1, 256.0, 4096)?, wide, &mut seeded(2));
    let pieces = littlewood_paley(&data);
    let energy: f64 = pieces.iter().map(|p| p.l2_norm().powi(2)).sum();
    println!(
        "random data on B(0, 8): {} Littlewood-Paley pieces, sum of squared norms / ||f||^2 = {:.6}",
        pieces.len(),
        energy / data.l2_norm().powi(2)
    );

    let cap = random_band_limited(&grid, SupportBall { center: [0.1, 0.0], radius: 0.25 }, &mut seeded(3));
    let (g, map) = parabolic_rescale(&cap, [0.1, 0.0], 4.0)?;
    println!(
        "data on B(0.1, 1/4) rescaled by K = 4: ||g||_2 / ||f||_2 = {:.6}, L^4 and L^6 norms scale by K^{:.4} and K^{:.4}",
        g.l2_norm() / cap.l2_norm(),
        map.norm_exponent(4.0),
        map.norm_exponent(6.0)
    );
    Ok(())
}
