//! File formats: the binary field container, coefficient JSON lines, partition and mass
//! JSON, experiment CSV, self-contained SVG plots, run manifests and `key = value` configs.

mod container;
mod records;
mod run;
mod svg;

pub use container::{read_field, write_evolved, write_initial, FieldFile, HEADER_BYTES};
pub use records::{
    read_coefficients, read_mass, read_scaling_csv, write_coefficients, write_scaling_csv, CellRecord, PartitionFile,
};
pub use run::{git_revision, parse_key_values, Manifest, RunDirectory, RunStatus, COMPLETION_MARKER, MANIFEST_FILE};
pub use svg::{embedded_points, loglog_svg};
