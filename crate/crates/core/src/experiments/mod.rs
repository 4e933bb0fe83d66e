//! Experiments: horocycle equidistribution in genus 1, the unfolding
//! identity, genus-2 invariance of cell averages, and supporting fits.

pub mod fit;
pub mod horocycle;
pub mod mellin;
pub mod report;
pub mod theorem1;
pub mod unfolding;
pub mod zagier;

pub use horocycle::{horocycle_average_g1, HorocycleAverage};
pub use mellin::{mellin_invert_rational, Pole};
pub use report::ExperimentReport;
pub use theorem1::{theorem1_experiment_g2, Theorem1Config};
pub use unfolding::{unfolding_crosscheck_g1, UnfoldingConfig};
pub use zagier::{zagier_experiment, ZagierConfig};
