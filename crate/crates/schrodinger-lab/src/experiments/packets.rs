use crate::field::{GridSpec, SpectralField};
use crate::strichartz::{cube_norms, spread, tube_cubes, CubeUnion};
use crate::wavepacket::{TileIndex, WavePacketFrame};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Window radius of the spread packets: the widest frame window, whose packets stay
/// within one cube column for the whole interval `[0, R]`.
pub const PACKET_KAPPA: f64 = 0.5;

/// `sigma` parallel wave packets on pairwise disjoint cube columns.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PacketSpreadExample {
    pub sigma: usize,
    pub scale: f64,
    /// Unit-norm sum of the packets.
    pub g: SpectralField,
    /// Cube-column index of each tube (spatial centre `column * R^{1/2}`).
    pub columns: Vec<i64>,
    /// Cubes of each tube.
    pub tubes: Vec<CubeUnion>,
    /// Union of the tubes.
    pub y: CubeUnion,
}

impl PacketSpreadExample {
    /// Whether no cube, and no spatial sample point, belongs to two tubes.
    pub fn tubes_disjoint(&self) -> bool {
        for (i, a) in self.tubes.iter().enumerate() {
            for b in &self.tubes[i + 1..] {
                if !a.intersection(b).is_empty() {
                    return false;
                }
            }
        }
        let grid = &self.g.grid;
        let side = self.y.side();
        let strips = (self.scale / side).ceil() as usize;
        (0..grid.nx).all(|k| {
            let x = grid.coordinate(k);
            (0..strips).all(|j| {
                let t = (j as f64 + 0.5) * side;
                self.tubes.iter().filter(|tube| tube.contains([x, 0.0], t)).count() <= 1
            })
        })
    }

    /// Largest max/min ratio of the per-cube `L^6` norms of `e^{it Delta} g` along one tube.
    pub fn tube_profile_spread(&self) -> Result<f64> {
        let mut worst: f64 = 1.0;
        for tube in &self.tubes {
            worst = worst.max(spread(&cube_norms(&self.g, tube, 6.0)?));
        }
        Ok(worst)
    }
}

/// Sum of `sigma` frame packets with a common frequency cell and physical centres spread
/// evenly over `[-R, R]` and snapped to cube columns, so every horizontal strip meets
/// exactly `sigma` cubes of `Y`. Requires `1 <= sigma <= R^{1/2}`.
pub fn build_packet_spread(sigma: usize, r: f64) -> Result<PacketSpreadExample> {
    let side = r.sqrt();
    if sigma == 0 || sigma as f64 > side {
        return Err(Error::TooManyPackets { count: sigma, scale: r });
    }
    let grid = GridSpec::standard(1, r)?;
    let frame = WavePacketFrame::new(&grid, PACKET_KAPPA)?;
    let mut g = SpectralField::zeros(grid);
    let mut columns = Vec::with_capacity(sigma);
    let mut support = None;
    for k in 0..sigma {
        let target = -r + (k as f64 + 0.5) * 2.0 * r / sigma as f64;
        let column = (target / side).round() as i64;
        let nu = (column as f64 * side / frame.nu_side).round() as i64;
        let packet = frame.packet(&frame.tile(TileIndex { theta: [0, 0], nu: [nu, 0] }));
        support = packet.support;
        g = g.plus(&packet)?;
        columns.push(column);
    }
    let norm = g.l2_norm();
    let mut g = g.scaled(Complex64::new(1.0 / norm, 0.0));
    g.support = support;
    let tubes = columns
        .iter()
        .map(|&c| tube_cubes(1, r, [c as f64 * side, 0.0], [0.0, 0.0], 0.25 * side))
        .collect::<Result<Vec<_>>>()?;
    let y = tubes.iter().skip(1).fold(tubes[0].clone(), |acc, t| acc.union(t));
    Ok(PacketSpreadExample { sigma, scale: r, g, columns, tubes, y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strichartz::strip_occupancy;

    #[test]
    fn single_packet_is_one_tube() {
        let ex = build_packet_spread(1, 256.0).unwrap();
        assert_eq!(ex.tubes.len(), 1);
        assert_eq!(ex.y, ex.tubes[0]);
        assert_eq!(strip_occupancy(&ex.y).sigma, 1);
        assert!((ex.g.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spread_packets_fill_every_strip() {
        let ex = build_packet_spread(8, 256.0).unwrap();
        let occ = strip_occupancy(&ex.y);
        assert_eq!((occ.sigma, occ.min_count), (8, 8));
        assert!(ex.tubes_disjoint());
        assert!(matches!(build_packet_spread(17, 256.0), Err(Error::TooManyPackets { count: 17, .. })));
        assert!(matches!(build_packet_spread(0, 256.0), Err(Error::TooManyPackets { .. })));
    }
}
