use crate::experiments::ScalingRow;
use crate::partition::{Cell, MassField, PartitionPolynomial, PartitionResult};
use crate::wavepacket::{CoefficientRecord, CoefficientSet, WavePacketFrame};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Writes one JSON record `{theta_center, nu_center, R, re, im}` per tile.
pub fn write_coefficients(out: &mut impl Write, set: &CoefficientSet) -> Result<()> {
    for rec in set.records() {
        serde_json::to_writer(&mut *out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads JSON lines back into a set over `frame`; blank lines are skipped.
pub fn read_coefficients(input: impl BufRead, frame: &WavePacketFrame) -> Result<CoefficientSet> {
    let mut records = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CoefficientRecord = serde_json::from_str(&line)?;
        records.push(rec);
    }
    CoefficientSet::from_records(frame, &records)
}

/// A cell as stored on disk: its sign vector, mass and run-length-encoded sample mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub id: u64,
    pub signs: String,
    pub mass: f64,
    /// `(start, length)` runs of member samples.
    pub runs: Vec<(usize, usize)>,
}

/// Serialized partition: the factors, the cells and the bisection diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub polynomial: PartitionPolynomial,
    pub cells: Vec<CellRecord>,
    /// Number of mass samples the cell masks index.
    pub samples: usize,
    pub total_mass: f64,
    pub tie_mass: f64,
    pub residuals: Vec<f64>,
    pub r: f64,
}

impl PartitionFile {
    pub fn from_result(part: &PartitionResult) -> Self {
        let samples = part.cells.first().map_or(0, |c| c.mask.len());
        Self {
            polynomial: part.polynomial.clone(),
            cells: part
                .cells
                .iter()
                .map(|c| CellRecord { id: c.id, signs: c.signs(), mass: c.mass, runs: c.runs() })
                .collect(),
            samples,
            total_mass: part.total_mass,
            tie_mass: part.tie_mass,
            residuals: part.residuals.clone(),
            r: part.r,
        }
    }

    /// Expands the run-length masks back into cells.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let factors = self.polynomial.factors.len();
        self.cells.iter().map(|c| Cell::from_runs(c.id, factors, c.mass, self.samples, &c.runs)).collect()
    }
}

/// Reads a JSON mass field and re-checks its invariants.
pub fn read_mass(input: &mut impl std::io::Read) -> Result<MassField> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    if text.trim().is_empty() {
        return Err(Error::DegenerateInput("empty mass file".into()));
    }
    let raw: MassField = serde_json::from_str(&text)?;
    let w = MassField::new(raw.spatial_dim, raw.points, raw.times, raw.values, raw.point_weight, raw.time_weight)?;
    if w.is_empty() {
        return Err(Error::DegenerateInput("mass file has no samples".into()));
    }
    Ok(w)
}

/// Writes the experiment CSV: header `R,sigma_or_N,M,E,norm,ratio,fitted_slope`.
pub fn write_scaling_csv(out: impl Write, rows: &[ScalingRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scaling_csv(input: impl std::io::Read) -> Result<Vec<ScalingRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GridSpec, SupportBall};
    use crate::partition::{polynomial_partition, PartitionOptions};
    use crate::rng::{random_band_limited, seeded};
    use crate::wavepacket::decompose;

    #[test]
    fn coefficient_lines_reload_to_the_same_set() {
        let grid = GridSpec::standard(1, 64.0).unwrap();
        let frame = WavePacketFrame::new(&grid, 0.25).unwrap();
        let f = random_band_limited(&grid, SupportBall::unit(), &mut seeded(7));
        let set = decompose(&f, &frame).unwrap();
        let mut bytes = Vec::new();
        write_coefficients(&mut bytes, &set).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().count(), set.len());
        assert!(text.lines().next().unwrap().contains("\"R\":64"));
        let back = read_coefficients(bytes.as_slice(), &frame).unwrap();
        assert_eq!(back.records(), set.records());
    }

    #[test]
    fn partition_masks_survive_run_length_encoding() {
        let w = MassField::on_box(1, 64.0, 64.0, 64, 1024, |x, t| 1.0 + x[0].abs() + t).unwrap();
        let part = polynomial_partition(&w, 2, 1.0, &PartitionOptions::default()).unwrap();
        let file = PartitionFile::from_result(&part);
        let json = serde_json::to_string(&file).unwrap();
        let back: PartitionFile = serde_json::from_str(&json).unwrap();
        let cells = back.cells().unwrap();
        assert_eq!(cells.len(), part.cells.len());
        for (a, b) in cells.iter().zip(&part.cells) {
            assert_eq!(a.mask, b.mask);
            assert_eq!(a.sign_vector, b.sign_vector);
        }
    }

    #[test]
    fn empty_mass_file_is_degenerate() {
        assert!(matches!(read_mass(&mut "  \n".as_bytes()), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn missing_columns_stay_empty_in_csv() {
        let rows = vec![ScalingRow { r: 1024.0, sigma_or_n: Some(2.0), m: None, e: None, norm: 0.5, ratio: 0.25, fitted_slope: -0.3 }];
        let mut bytes = Vec::new();
        write_scaling_csv(&mut bytes, &rows).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text, "R,sigma_or_N,M,E,norm,ratio,fitted_slope\n1024.0,2.0,,,0.5,0.25,-0.3\n");
        assert_eq!(read_scaling_csv(bytes.as_slice()).unwrap(), rows);
    }
}
