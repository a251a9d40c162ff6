//! Runs one named scaling experiment and writes its CSV and SVG under `target/scaling/`.
//!
//! `cargo run --release --example scaling [experiment]`

use schrodinger_lab::experiments::{run_scaling_experiment, Experiment, ScalingGrid};
use schrodinger_lab::io::{loglog_svg, write_scaling_csv};
use std::fs;

fn main() -> schrodinger_lab::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "sigma_law".into());
    let experiment: Experiment = name.parse()?;
    let outcome = run_scaling_experiment(&name, &ScalingGrid::default_for(experiment))?;
    let (x, y) = &outcome.fit_axes;
    println!("{name}: {} rows, ln {y} vs ln {x}: slope {:.4}, max residual {:.4}", outcome.rows.len(), outcome.fit.slope, outcome.fit.max_residual);
    for (key, value) in &outcome.summary {
        println!("  {key} = {value}");
    }
    let dir = std::path::Path::new("target/scaling");
    fs::create_dir_all(dir)?;
    write_scaling_csv(fs::File::create(dir.join(format!("{name}.csv")))?, &outcome.rows)?;
    fs::write(dir.join(format!("{name}.svg")), loglog_svg(&outcome))?;
    println!("wrote {}/{name}.csv and .svg", dir.display());
    Ok(())
}
