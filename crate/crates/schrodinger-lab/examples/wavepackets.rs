//! Wave-packet frame at R = 256: round trip, frame ratio and tube localisation.
//!
//! `cargo run --release --example wavepackets [kappa]`

use schrodinger_lab::field::{GridSpec, SupportBall};
use schrodinger_lab::rng::{random_band_limited, seeded};
use schrodinger_lab::wavepacket::{
    decompose, frequency_cap_check, reconstruct, tube_mass_fraction, TileIndex, WavePacketFrame,
};
use std::time::Instant;

fn main() -> schrodinger_lab::Result<()> {
    let kappa: f64 = std::env::args().nth(1).map(|s| s.parse().expect("kappa")).unwrap_or(0.125);
    let r = 256.0;
    for dim in [1, 2] {
        let grid = GridSpec::standard(dim, r)?;
        let frame = WavePacketFrame::new(&grid, kappa)?;
        println!(
            "dim {dim}: nu_side {:.2}, {} physical cells per axis, c_kappa {:.6} (closed form {:.6})",
            frame.nu_side,
            frame.nu_count,
            frame.normalization,
            frame.analytic_normalization()
        );
        let f = random_band_limited(&grid, SupportBall::unit(), &mut seeded(7));
        let clock = Instant::now();
        let coeffs = decompose(&f, &frame)?;
        let back = reconstruct(&coeffs);
        let err = back.plus(&f.scaled((-1.0).into()))?.l2_norm() / f.l2_norm();
        println!(
            "  {} coefficients, frame ratio {:.6}, round-trip error {err:.2e} ({:.2?})",
            coeffs.len(),
            coeffs.frame_ratio(),
            clock.elapsed()
        );
        let times = grid.time_grid();
        for (theta, nu) in [([0, 0], [0, 0]), ([4, -3], [2, 1]), ([-7, 2], [-3, 0])] {
            let tile = frame.tile(TileIndex { theta, nu });
            let clock = Instant::now();
            let loc = tube_mass_fraction(&tile, &frame, 0.05, &times)?;
            let cap = frequency_cap_check(&tile, &frame, 4.0)?;
            println!(
                "  tile theta {:?} nu {:?}: tube fraction {:.4}, exterior max * sqrt(R) {:.3e}, cap fraction {:.8} ({:.2?})",
                &tile.theta_center[..dim],
                &tile.nu_center[..dim],
                loc.fraction,
                loc.exterior_max * r.sqrt(),
                cap,
                clock.elapsed()
            );
        }
    }
    Ok(())
}
