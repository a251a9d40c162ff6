//! Partitioning checks: exact splits of symmetric masses, hand-counted line crossings
//! and the crossing bound on random products.

use proptest::prelude::*;
use schrodinger_lab::partition::{
    cells_entered_by_line, horner, polynomial_partition, DomainBox, Line, MassField, PartitionOptions,
    PartitionPolynomial, Polynomial, Term,
};

#[test]
fn uniform_mass_splits_into_equal_cells() {
    let w = MassField::on_box(1, 32.0, 32.0, 64, 256, |_, _| 1.0).unwrap();
    for (degree, cells) in [(1, 2), (2, 4), (4, 8)] {
        let part = polynomial_partition(&w, degree, 1.0, &PartitionOptions::default()).unwrap();
        assert_eq!(part.cells.len(), cells);
        let assigned: f64 = part.cells.iter().map(|c| c.mass).sum::<f64>() + part.tie_mass;
        assert!((assigned / part.total_mass - 1.0).abs() < 1e-12);
        for cell in &part.cells {
            assert!((cell.mass / part.total_mass - 1.0 / cells as f64).abs() < 1e-3, "D = {degree}");
        }
    }
}

#[test]
fn masses_concentrated_on_one_side_move_the_cut() {
    // Mass 3 on x < 0 and 1 on x > 0: any balanced first cut must leave x < 0 split.
    let w = MassField::on_box(1, 32.0, 32.0, 64, 256, |x, _| if x[0] < 0.0 { 3.0 } else { 1.0 }).unwrap();
    let part = polynomial_partition(&w, 1, 1.0, &PartitionOptions::default()).unwrap();
    let shares: Vec<f64> = part.cells.iter().map(|c| c.mass / part.total_mass).collect();
    assert!(shares.iter().all(|s| (s - 0.5).abs() < 1e-3), "{shares:?}");
}

fn linear_in_x(root: f64) -> Polynomial {
    Polynomial::affine(-root, &[1.0, 0.0])
}

#[test]
fn hand_counted_crossings() {
    let p = PartitionPolynomial::physical(1, 3, vec![linear_in_x(10.0), linear_in_x(-20.0)]).unwrap();
    let domain = DomainBox::space_time(1, 64.0);
    let horizontal = Line { origin: vec![0.0, 32.0], direction: vec![1.0, 0.0] };
    assert_eq!(cells_entered_by_line(&p, &horizontal, &domain).unwrap().cells, 3);
    let vertical = Line { origin: vec![0.0, 0.0], direction: vec![0.0, 1.0] };
    assert_eq!(cells_entered_by_line(&p, &vertical, &domain).unwrap().cells, 1);
    let on_zero_set = Line { origin: vec![10.0, 0.0], direction: vec![0.0, 1.0] };
    let crossing = cells_entered_by_line(&p, &on_zero_set, &domain).unwrap();
    assert!(crossing.is_degenerate());
    assert_eq!(crossing.degenerate_factors, vec![0]);

    // x^2 + (t - 32)^2 - 100: a circle; a line through its centre meets both sides.
    let circle = Polynomial::from_terms(vec![
        Term { exponents: vec![2, 0], coefficient: 1.0 },
        Term { exponents: vec![0, 2], coefficient: 1.0 },
        Term { exponents: vec![0, 1], coefficient: -64.0 },
        Term { exponents: vec![0, 0], coefficient: 1024.0 - 100.0 },
    ]);
    let p = PartitionPolynomial::physical(1, 2, vec![circle]).unwrap();
    let diagonal = Line { origin: vec![0.0, 32.0], direction: vec![1.0, 1.0] };
    // Outside, inside, outside: two distinct sign vectors.
    assert_eq!(cells_entered_by_line(&p, &diagonal, &domain).unwrap().cells, 2);
}

fn naive(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().enumerate().map(|(k, c)| c * s.powi(k as i32)).sum()
}

proptest! {
    #[test]
    fn horner_matches_the_power_sum(coeffs in prop::collection::vec(-5.0f64..5.0, 1..9), s in -2.0f64..2.0) {
        let scale = coeffs.iter().map(|c| c.abs()).sum::<f64>() * 2f64.powi(coeffs.len() as i32);
        prop_assert!((horner(&coeffs, s) - naive(&coeffs, s)).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn lines_enter_at_most_d_plus_one_cells(
        roots in prop::collection::vec(-60.0f64..60.0, 1..5),
        slopes in prop::collection::vec(-3.0f64..3.0, 4),
        origin in (-60.0f64..60.0, 0.0f64..64.0),
        angle in 0.0f64..std::f64::consts::PI,
    ) {
        let factors: Vec<Polynomial> = roots
            .iter()
            .zip(&slopes)
            .map(|(&a, &b)| Polynomial::affine(-a, &[1.0, b]))
            .collect();
        let d = factors.len() as u32;
        let p = PartitionPolynomial::physical(1, d, factors).unwrap();
        let line = Line { origin: vec![origin.0, origin.1], direction: vec![angle.cos(), angle.sin()] };
        let crossing = cells_entered_by_line(&p, &line, &DomainBox::space_time(1, 64.0)).unwrap();
        prop_assert!(crossing.cells <= d as usize + 1);
    }
}
