//! Cube unions and strip occupancy, dyadic pigeonholing, decoupling ratios and the
//! refined (bilinear) Strichartz ratios.
//!
//! Norms are space-time integrals over midpoint time rows on `[0, R]`. Fields with a
//! narrow spectral support are evaluated in a frame moving with their frequency
//! centre (see [`Baseband`]), so a cap piece costs far less than the full field and a
//! field and its single piece are evaluated by identical arithmetic.

mod bil;
mod cubes;
mod decoupling;
mod eval;
mod geometry;
mod pigeonhole;
mod refined;

pub use bil::{bil_decomposition_check, bilinear_tangent_term, BilReport, CapLayout, CapSample};
pub use cubes::{strip_occupancy, CubeIndex, CubeUnion, StripOccupancy};
pub use decoupling::{
    cap_pieces, cap_width, decoupling_ratio, decoupling_ratio_on, DecouplingReport, PIECE_LEAK_TOLERANCE,
    PIECE_SUM_TOLERANCE,
};
pub use eval::{binned_power_sums, Baseband, NEGLIGIBLE};
pub use geometry::{
    locally_constant_check, strip_bound, transverse_overlap, tube_cubes, LocallyConstant, StripBound,
    TransverseOverlap,
};
pub use pigeonhole::{
    dyadic_pigeonhole, pigeonhole_selection, BoxRecord, DyadicClass, PigeonholeSelection, TubeRecord,
    FLOOR_EXPONENT,
};
pub use refined::{
    bilinear_refined_ratio, cube_norms, cube_power_sums, refined_strichartz_ratio, spread, support_ball,
    BilinearRatio, RefinedRatio, UNIFORM_SPREAD,
};
