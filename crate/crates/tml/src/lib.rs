//! File formats, seeded verification campaigns and sequence experiments
//! for the distances in [`tml_core`].

pub mod campaign;
pub mod io;
pub mod report;
pub mod sequence;
