//! Wave-packet frame checks: frame constant, self-localisation and linearity.

use num_complex::Complex64;
use proptest::prelude::*;
use schrodinger_lab::field::{GridSpec, Propagator, SupportBall};
use schrodinger_lab::rng::{random_band_limited, seeded_stream};
use schrodinger_lab::wavepacket::{decompose, reconstruct, tube_of, TileIndex, WavePacketFrame};

#[test]
fn frame_ratio_is_the_inverse_window_constant() {
    for dim in [1, 2] {
        let grid = GridSpec::standard(dim, 64.0).unwrap();
        for kappa in [0.125, 0.25, 0.5] {
            let frame = WavePacketFrame::new(&grid, kappa).unwrap();
            let f = random_band_limited(&grid, SupportBall::unit(), &mut seeded_stream(3, dim as u64));
            let ratio = decompose(&f, &frame).unwrap().frame_ratio();
            let expected = (1.5 * kappa).powi(-(dim as i32));
            assert!((ratio / expected - 1.0).abs() < 1e-9, "n = {dim}, kappa = {kappa}: {ratio} vs {expected}");
        }
    }
}

#[test]
fn a_packet_carries_its_largest_coefficient_on_its_own_tile() {
    let grid = GridSpec::standard(1, 256.0).unwrap();
    let frame = WavePacketFrame::new(&grid, 0.25).unwrap();
    for index in [TileIndex { theta: [0, 0], nu: [0, 0] }, TileIndex { theta: [5, 0], nu: [-3, 0] }] {
        let set = decompose(&frame.packet(&frame.tile(index)), &frame).unwrap();
        let (best, _) = set.iter().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap();
        assert_eq!(best, index);
    }
}

#[test]
fn evolved_packets_peak_on_their_tube_axis() {
    let grid = GridSpec::standard(1, 256.0).unwrap();
    let frame = WavePacketFrame::new(&grid, 0.125).unwrap();
    let tile = frame.tile(TileIndex { theta: [3, 0], nu: [2, 0] });
    let tube = tube_of(&tile, 0.05).unwrap();
    assert!((tube.radius - 256f64.powf(0.55)).abs() < 1e-9);
    let packet = frame.packet(&tile);
    let evolution = Propagator::new(&packet).unwrap();
    for t in [0.0, 100.0, 256.0] {
        let slice = evolution.slice(t);
        let peak = (0..grid.nx).max_by(|&a, &b| slice[a].norm().total_cmp(&slice[b].norm())).unwrap();
        let offset = grid.position(peak)[0] - tube.axis_at(t)[0];
        assert!(offset.abs() <= 2.0 * grid.dx(), "t = {t}: peak {offset} away from the axis");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn analysis_is_linear_and_synthesis_inverts_it(seed in 0u64..10_000, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let grid = GridSpec::standard(1, 64.0).unwrap();
        let frame = WavePacketFrame::new(&grid, 0.25).unwrap();
        let f = random_band_limited(&grid, SupportBall::unit(), &mut seeded_stream(seed, 0));
        let g = random_band_limited(&grid, SupportBall::unit(), &mut seeded_stream(seed, 1));
        let z = Complex64::new(re, im);
        let combined = decompose(&f.scaled(z).plus(&g).unwrap(), &frame).unwrap();
        let (cf, cg) = (decompose(&f, &frame).unwrap(), decompose(&g, &frame).unwrap());
        let lookup: std::collections::HashMap<_, _> = cg.iter().collect();
        for (index, c) in cf.iter() {
            let expected = z * c + lookup.get(&index).copied().unwrap_or_default();
            let got = combined.iter().find(|(i, _)| *i == index).map(|(_, v)| v).unwrap_or_default();
            prop_assert!((got - expected).norm() < 1e-10);
        }
        let back = reconstruct(&cf);
        prop_assert!(back.plus(&f.scaled((-1.0).into())).unwrap().l2_norm() < 1e-10 * f.l2_norm());
    }
}
