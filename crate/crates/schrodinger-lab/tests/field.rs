//! Field-core checks against closed forms.

use num_complex::Complex64;
use proptest::prelude::*;
use schrodinger_lab::field::{
    fit_exponent, maximal_function, mixed_norm, propagate, GridSpec, MixedNormParams, Propagator, Region,
    SpaceTimeField, SpectralField, TimeGrid,
};
use std::f64::consts::PI;

/// `(1/2pi) int exp(-xi^2 / a^2) e^{i(xi x + t xi^2)} dxi` in closed form.
fn gaussian_solution(a: f64, x: f64, t: f64) -> Complex64 {
    let alpha = Complex64::new(1.0 / (a * a), -t);
    (Complex64::new(PI, 0.0) / alpha).sqrt() * (-(x * x) / (4.0 * alpha)).exp() / (2.0 * PI)
}

#[test]
fn gaussian_evolution_matches_the_closed_form_in_1d() {
    let a = 0.2;
    let grid = GridSpec::standard(1, 64.0).unwrap();
    let f = SpectralField::from_fn(grid.clone(), |xi| Complex64::new((-xi[0] * xi[0] / (a * a)).exp(), 0.0));
    let times = TimeGrid::explicit(vec![0.0, 7.5, 31.0, 64.0], 1.0);
    let u = propagate(&f, &times).unwrap();
    let peak = gaussian_solution(a, 0.0, 0.0).norm();
    for x in 0..grid.nx {
        let pos = grid.position(x)[0];
        for (j, &t) in times.samples.iter().enumerate() {
            let err = (u.at(x, j) - gaussian_solution(a, pos, t)).norm();
            assert!(err < 1e-8 * peak, "x = {pos}, t = {t}: error {err:e}");
        }
    }
}

#[test]
fn gaussian_evolution_factorises_in_2d() {
    let a = 0.2;
    let grid = GridSpec::standard(2, 64.0).unwrap();
    let f = SpectralField::from_fn(grid.clone(), |xi| {
        Complex64::new((-(xi[0] * xi[0] + xi[1] * xi[1]) / (a * a)).exp(), 0.0)
    });
    let evolution = Propagator::new(&f).unwrap();
    let peak = gaussian_solution(a, 0.0, 0.0).norm_sqr();
    for t in [0.0, 10.0, 40.0] {
        let slice = evolution.slice(t);
        for (i, v) in slice.iter().enumerate().step_by(7) {
            let p = grid.position(i);
            let exact = gaussian_solution(a, p[0], t) * gaussian_solution(a, p[1], t);
            assert!((v - exact).norm() < 1e-8 * peak, "t = {t}, x = {p:?}");
        }
    }
}

#[test]
fn mixed_norm_of_a_separable_gaussian() {
    let (r, s) = (64.0, 8.0);
    let grid = GridSpec::standard(1, r).unwrap();
    let u = SpaceTimeField::from_fn(grid.clone(), grid.time_grid(), |x, _| Complex64::new((-x[0] * x[0] / (s * s)).exp(), 0.0));
    for (p, q) in [(4.0, 2.0), (6.0, 6.0), (3.0, f64::INFINITY)] {
        let exact = (s * (PI / p).sqrt()).powf(1.0 / p) * if q.is_infinite() { 1.0 } else { r.powf(1.0 / q) };
        let value = mixed_norm(&u, &MixedNormParams::new(p, q, Region::standard(&grid)).unwrap()).unwrap();
        assert!((value / exact - 1.0).abs() < 1e-10, "p = {p}, q = {q}: {value} vs {exact}");
    }
}

#[test]
fn plane_wave_has_constant_maximal_function() {
    let grid = GridSpec::standard(1, 32.0).unwrap();
    let mut f = SpectralField::zeros(grid.clone());
    f.coeffs[5] = Complex64::new(grid.period * 0.5, 0.0);
    let sup = maximal_function(&propagate(&f, &grid.time_grid()).unwrap()).unwrap();
    assert!(sup.iter().all(|v| (v - 0.5).abs() < 1e-12));
}

proptest! {
    #[test]
    fn fit_recovers_exact_power_laws(slope in -2.0f64..2.0, c in 0.01f64..100.0, n in 3usize..8) {
        let points: Vec<(f64, f64)> = (0..n).map(|k| {
            let s = 2f64.powi(k as i32 + 4);
            (s, c * s.powf(slope))
        }).collect();
        let fit = fit_exponent(&points).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-10);
        prop_assert!(fit.max_residual < 1e-10);
        prop_assert!((fit.predict(1000.0) / (c * 1000f64.powf(slope)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn evolution_is_linear(seed in 0u64..1000, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        use schrodinger_lab::field::SupportBall;
        use schrodinger_lab::rng::{random_band_limited, seeded_stream};
        let grid = GridSpec::standard(1, 16.0).unwrap();
        let f = random_band_limited(&grid, SupportBall::unit(), &mut seeded_stream(seed, 0));
        let g = random_band_limited(&grid, SupportBall::unit(), &mut seeded_stream(seed, 1));
        let z = Complex64::new(re, im);
        let times = grid.time_grid();
        let lhs = propagate(&f.scaled(z).plus(&g).unwrap(), &times).unwrap();
        let (uf, ug) = (propagate(&f, &times).unwrap(), propagate(&g, &times).unwrap());
        for k in 0..lhs.values.len() {
            prop_assert!((lhs.values[k] - (z * uf.values[k] + ug.values[k])).norm() < 1e-12);
        }
    }
}
