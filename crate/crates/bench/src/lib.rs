//! Shared fixtures for the criterion benches.

use nalgebra::DVector;
use tlgc::hsi_io::{self, SplitSpec};
use tlgc::{make_synthetic, HsiCube, LabeledDataset, SynthSpec};

/// Standardized training split of a default-sized synthetic scene
/// (4 classes, 30 bands) with `per_class` samples per class.
pub fn training_set(per_class: usize) -> LabeledDataset {
    let (cube, labels) = make_synthetic(&SynthSpec::default(), 7).expect("synthetic scene");
    let ds = hsi_io::extract_dataset(&cube, &labels).expect("labeled pixels");
    let split = SplitSpec {
        samples_per_class: per_class,
        seed: 1,
    };
    let (train, test) = hsi_io::split_train_test(&ds, split).expect("split");
    hsi_io::standardize(&train, &test).expect("standardize").0
}

/// A `side × side` scene for filter benches.
pub fn scene(side: usize) -> HsiCube {
    let spec = SynthSpec {
        height: side,
        width: side,
        ..SynthSpec::default()
    };
    make_synthetic(&spec, 3).expect("synthetic scene").0
}

/// Deterministic unit vector of length `dim`.
pub fn unit(dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |i, _| 1.0 + (i as f64 * 0.7).sin()).normalize()
}
