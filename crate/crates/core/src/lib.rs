pub mod error;
pub mod linalg;
pub mod liouville;
pub mod metrology;
pub mod model;

pub use error::{Error, Result};
pub use linalg::{c64, ComplexMatrix, DensityMatrix, VecState};
pub use liouville::{Backend, VectorizedLiouvillian};
pub use metrology::{Experiment, OptimizationResult, ProbePipeline, QfiRecord, ScanResult};
pub use model::{BlochState, IsingChainSpec, NoiseKind, ProbeCouplingSpec};

/// Pins faer's internal kernels to one thread. Scans parallelize over
/// independent grid points instead.
pub fn use_sequential_kernels() {
    faer::set_global_parallelism(faer::Par::Seq);
}
