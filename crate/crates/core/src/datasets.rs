//! Bundled data.

use crate::ranks_nn::BivariateSample;

/// Seabird and reef-fish densities (individuals per hectare, truncated to
/// integers) around 12 islands of the Chagos Archipelago.
pub const SEABIRDS: [f64; 12] = [
    1.0, 3702.0, 183.0, 973.0, 1161.0, 2.0, 1427.0, 0.0, 3.0, 15.0, 4.0, 1.0,
];
pub const FISH: [f64; 12] = [
    194.0, 278.0, 279.0, 300.0, 281.0, 244.0, 300.0, 245.0, 212.0, 275.0, 301.0, 265.0,
];

/// The seabirds/fish sample as `(seabirds, fish)` rows.
pub fn seabirds() -> BivariateSample {
    BivariateSample::from_columns(&SEABIRDS, &FISH).expect("bundled data is valid")
}
