//! Finite timed metric spaces and the distances between them: the
//! Gromov-Hausdorff distance, the Hausdorff distance between Fréchet
//! embeddings, the intrinsic timed-Hausdorff distance, and the pointed,
//! big bang and future-developed variants.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod construct;
pub mod correspondence;
pub mod embed;
pub mod engine;
pub mod space;

pub use construct::{
    build_sequence, enumerations_from_correspondence, glue_by_correspondence, make_future_developed,
    random_metric_space, random_time_function, ConstructError, GluedSpace, MetricModel, Sequence, SequenceFamily,
    SequenceSpec, TimeModel,
};
pub use correspondence::{distortion, minimal_correspondences, Correspondence, CorrespondenceError};
pub use embed::{
    delete_first_coordinate, frechet_embed, hausdorff_in, hausdorff_sup, timed_frechet_embed, EmbedError,
    Enumeration, LinftyCloud,
};
pub use engine::{
    bb_gh, fd_hh, gh_distance, kappa_gh_distance, local_search_upper, pointed_gh, simple_lower_bounds,
    tau_h_distance, Certificate, DistanceKind, DistanceResult, EngineError, Side, DEFAULT_BUDGET,
};
pub use space::{
    classify, structure_report, FiniteMetricSpace, StructureReport, TimeClass, TimedMetricSpace, ValidationError,
    Violation, DEFAULT_TOL,
};
