//! Billiard ball maps for tables made of disks: boundary geometry, the
//! reflection map and its differential, period-2 hyperbolicity, the
//! no-eclipse condition and trapped-set rasters.

mod dynamics;
mod periodic;
mod table;
mod trapped;

pub use dynamics::{
    billiard_differential, billiard_map, cone_norm, differential_of, outgoing_direction,
    period2_hyperbolic, trajectory, BilliardStep, Bounce, PhaseCoordinates, Period2Report,
};
pub use periodic::{cyclic_words, periodic_orbit, periodic_samples};
pub use table::{
    BilliardTable, BoundaryPoint, Disk, PhasePoint, TableKind, GLANCING_EPS,
};
pub use trapped::{
    classify, trapped_set, trapped_set_with, CellStatus, TrappedGrid, TrappedOptions,
    DEFAULT_BOUNCES, DEFAULT_RESOLUTION,
};
