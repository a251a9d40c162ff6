//! The two extremal constructions and the experiment front door.

use schrodinger_lab::experiments::{
    build_packet_spread, build_sparse_focusing, run_scaling_experiment, Experiment, FocusingParams, ScalingGrid,
};
use schrodinger_lab::strichartz::{refined_strichartz_ratio, strip_occupancy};
use schrodinger_lab::Error;

#[test]
fn packet_spread_fills_sigma_cubes_per_strip() {
    let r = 256.0;
    for sigma in [1, 2, 4, 8, 16] {
        let ex = build_packet_spread(sigma, r).unwrap();
        let strips = strip_occupancy(&ex.y);
        assert_eq!(strips.sigma, sigma);
        assert_eq!(strips.min_count, sigma);
        assert_eq!(strips.histogram.len(), 16, "every strip of [0, R] is occupied");
        assert!(ex.tubes_disjoint());
        assert!((ex.g.l2_norm() - 1.0).abs() < 1e-12);
        assert!(refined_strichartz_ratio(&ex.g, &ex.y).is_ok());
    }
    assert!(matches!(build_packet_spread(17, r), Err(Error::TooManyPackets { .. })));
}

#[test]
fn sparse_focusing_at_r_256() {
    let r = 256.0;
    let ex = build_sparse_focusing(r, FocusingParams::default()).unwrap();
    let x = ex.squares.len() as f64 / r.powf(1.5);
    assert!((0.25..=4.0).contains(&x), "|X| / R^(3/2) = {x}");
    assert!(ex.per_ball_density as f64 <= 4.0 * r.sqrt());
    // Every square of X reaches at least half the height.
    assert!(ex.height > 0.0 && ex.relative_height() > 0.0);
}

#[test]
fn sigma_law_has_one_row_per_sigma() {
    let outcome = run_scaling_experiment("sigma_law", &ScalingGrid::default_for(Experiment::SigmaLaw)).unwrap();
    assert_eq!(outcome.rows.len(), 5);
    assert!(outcome.rows.iter().all(|row| row.r == 1024.0 && row.fitted_slope == outcome.fit.slope));
    assert!(matches!(run_scaling_experiment("sigma", &ScalingGrid::default_for(Experiment::SigmaLaw)), Err(Error::UnknownExperiment(_))));
}
