//! Last-passage percolation across Brownian line ensembles, the sorting
//! (melon) construction, and edge rescalings toward the directed landscape.
//!
//! The crate is `no_std + alloc`; everything random flows through explicit
//! [`rng::RngStream`] values so all outputs are reproducible from seeds.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod brownian;
pub mod ensemble;
pub mod error;
pub mod grid;
pub mod landscape;
pub mod lpp;
pub mod melon;
pub mod multipath;
pub mod rng;
pub mod scaling;

pub use brownian::{sample_brownian_ensemble, sample_landscape_window};
pub use ensemble::LineEnsemble;
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use landscape::{
    airy_lp_experiment, busemann_differences, dyadic_geodesic, dyadic_landscape,
    extract_geodesic, holder_estimate, metric_compose, slab_sheet, zk_profile, ComposedSheet,
    DyadicLandscape, GeodesicPolyline, ZkProfile,
};
pub use lpp::{
    backward_profile, backwards_first_passage, forward_profile, gap_length, last_passage,
    last_passage_path, path_length, LatticePath, Point, Side,
};
pub use melon::{
    gap_process, melon, melon_mirrored, melon_sampled, melon_via_lpp, pairwise_sort,
    reverse_melon, MelonEnsemble, MelonRoute,
};
pub use multipath::{
    multi_path_best, multi_path_last_passage, multi_path_last_passage_transfer, EndpointPair,
    MultiPath,
};
pub use rng::RngStream;
pub use scaling::{
    airy_rescale, landscape_value, n_pow, sheet_environment, sheet_from_environment,
    sheet_rescale, sheet_sample, stationary_version, LandscapePoint, ScaledLines, ScaledSheet,
};
