//! Polynomial partitioning of space-time mass, walls, and the line-crossing bound.
//!
//! `cargo run --release --example partition`

use schrodinger_lab::field::{propagate, GridSpec, SupportBall};
use schrodinger_lab::partition::{
    cells_entered_by_line, polynomial_partition, wall_region, DomainBox, Line, MassField, PartitionOptions,
};
use schrodinger_lab::rng::{random_band_limited, seeded};
use std::time::Instant;

fn report(label: &str, w: &MassField, degree: u32, r: f64) -> schrodinger_lab::Result<()> {
    let clock = Instant::now();
    let part = polynomial_partition(w, degree, r, &PartitionOptions::default())?;
    println!(
        "{label}: D = {degree}, {} factors of degrees {:?}, {:.2?}",
        part.polynomial.factors.len(),
        part.polynomial.factors.iter().map(|f| f.degree).collect::<Vec<_>>(),
        clock.elapsed()
    );
    println!("  residuals per step {:?}", part.residuals);
    for cell in &part.cells {
        println!("  cell {}: share {:.4}", cell.signs(), cell.mass / part.total_mass);
    }
    println!(
        "  balance max ||W||/||W_i|| = {:.3} (2^s = {}), tie mass {:.2e}",
        part.balance(),
        part.cells.len(),
        part.tie_mass / part.total_mass
    );
    Ok(())
}

fn main() -> schrodinger_lab::Result<()> {
    let r = 64.0;
    let uniform = MassField::on_box(1, r, r, 48, 24, |_, _| 1.0)?;
    for d in [1, 2, 4] {
        report("uniform 1D box", &uniform, d, 1.0)?;
    }

    let grid = GridSpec::standard(1, r)?;
    let f = random_band_limited(&grid, SupportBall::unit(), &mut seeded(3));
    let u = propagate(&f, &grid.time_grid())?;
    let w = MassField::from_solution(&u, 2.0, 1)?;
    report("|e^{it Delta} f|^2 on B(0,R) x [0,R], r = 1", &w, 2, 1.0)?;

    let w2 = MassField::on_box(2, r, r, 16, 16, |x, t| 1.0 + (x[0] * 0.05).cos().powi(2) + t / r)?;
    report("2D weight", &w2, 4, 1.0)?;

    let part = polynomial_partition(&uniform, 4, 1.0, &PartitionOptions::default())?;
    let clock = Instant::now();
    let wall = wall_region(&part.polynomial, r, 0.05);
    println!("wall: width {:.2}, {} zero samples ({:.2?})", wall.width, wall.zeros.len(), clock.elapsed());
    let domain = DomainBox::space_time(1, r);
    let mut worst = 0;
    for k in 0..200 {
        let s = k as f64 * 0.731;
        let line = Line { origin: vec![r * s.sin(), 0.5 * r], direction: vec![(1.3 * s).cos(), (0.7 * s).sin()] };
        worst = worst.max(cells_entered_by_line(&part.polynomial, &line, &domain)?.cells);
    }
    println!("max cells entered by a line: {worst} (bound D + 1 = {})", part.polynomial.degree() + 1);
    Ok(())
}
