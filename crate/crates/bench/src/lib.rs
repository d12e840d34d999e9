//! Fixtures shared by the benchmarks.

use breakcurve_core::reference;
use breakcurve_core::{BreakthroughCurve, ExperimentConditions, ThomasParams};

/// Conditions and tabulated Thomas parameters for reference experiment `id`.
pub fn thomas_case(id: u8) -> (ThomasParams, ExperimentConditions) {
    let p = reference::unpinned_fit(id).expect("reference experiment");
    let c = reference::experiment(id)
        .and_then(|e| e.conditions())
        .expect("reference experiment");
    (p, c)
}

/// Synthetic reference curve with `points` samples.
pub fn curve(id: u8, points: usize) -> BreakthroughCurve {
    reference::synthetic_curve(id, points).expect("reference experiment")
}
