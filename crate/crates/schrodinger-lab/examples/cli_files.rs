//! The file formats and subcommands end to end: writes a field container and a mass
//! file, then drives `decompose`, `propagate`, `partition`, `run` and `report` in process.
//!
//! `cargo run --release --example cli_files`

use schrodinger_lab::cli;
use schrodinger_lab::field::GridSpec;
use schrodinger_lab::io::write_initial;
use schrodinger_lab::partition::MassField;
use schrodinger_lab::wavepacket::reference_gaussian;
use std::fs;

fn main() -> schrodinger_lab::Result<()> {
    let dir = std::env::temp_dir().join("schrodinger-lab-demo");
    fs::create_dir_all(&dir)?;
    let field = dir.join("gaussian.bin");
    let mut bytes = Vec::new();
    write_initial(&mut bytes, &reference_gaussian(&GridSpec::standard(1, 256.0)?))?;
    fs::write(&field, bytes)?;
    let mass = dir.join("mass.json");
    let w = MassField::on_box(1, 64.0, 64.0, 64, 1024, |x, t| 1.0 + x[0].abs() + t)?;
    fs::write(&mass, serde_json::to_string(&w)?)?;

    let out = dir.join("out");
    let out = out.to_str().expect("utf-8 path");
    let commands: [&[&str]; 5] = [
        &["decompose", field.to_str().expect("utf-8 path")],
        &["propagate", field.to_str().expect("utf-8 path")],
        &["partition", mass.to_str().expect("utf-8 path"), "--degree", "2"],
        &["run", "crossing_bound", "--set", "trials=100"],
        &["report", &format!("{out}/crossing_bound")],
    ];
    for args in commands {
        println!("$ schrodinger-lab --out {out} {}", args.join(" "));
        let argv = ["schrodinger-lab", "--out", out].into_iter().chain(args.iter().copied());
        let code = cli::run(argv);
        println!("exit {code}");
    }
    Ok(())
}
