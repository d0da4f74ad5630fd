//! Unsupervised anomaly detection: trajectory-matrix PCA followed by a
//! one-class SVM, voted over several window lengths.

mod confidence;
mod ocsvm;
mod pca;
mod trajectory;

pub use confidence::{confidence, window_labels, ConfidenceSeries};
pub use ocsvm::{compute_rho, median_heuristic_gamma, ocsvm_fit_predict, ocsvm_solve, rbf_kernel, OcSvmSolution, LABEL_TOL, STOP_EPS};
pub use pca::{pca2, ReducedPoints};
pub use trajectory::{build_trajectory, TrajectoryMatrix};
