//! Shared fixtures for the benchmarks.

use snnpid_core::{
    ControllerKind, Dataset, DatasetConfig, Genome, GenomeLayout, HiddenVariant, PidGains,
};

/// Genome with every value at the midpoint of its bounds.
pub fn midpoint_genome(variant: HiddenVariant, kind: ControllerKind, n_pairs: usize) -> Genome {
    let layout = GenomeLayout::layout_for(variant, kind, n_pairs).expect("valid layout");
    let values = layout
        .lower_bounds()
        .iter()
        .zip(layout.upper_bounds())
        .map(|(l, u)| 0.5 * (l + u))
        .collect();
    Genome::new(layout, values).expect("midpoints are in bounds")
}

pub fn pd_dataset(seed: u64) -> Dataset {
    snnpid_core::dataset::generate(seed, &DatasetConfig::pd(PidGains::reference()))
        .expect("reference gains are stable")
}
