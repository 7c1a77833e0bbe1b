//! Evolutionary multitasking for expensive permutation flowshop scheduling.
//!
//! A large instance is paired with an economical auxiliary task built from
//! the rows of its most important jobs. Both are solved together by a
//! multifactorial evolutionary engine, and good auxiliary schedules are
//! completed by recursive insertion and injected into the expensive task.
//!
//! Module map:
//! - [`instance`]: matrices, makespan, benchmark files and generator
//! - [`distance`]: normalized inter-task distance and its lower bound
//! - [`auxiliary`]: job-importance measures and auxiliary-task construction
//! - [`search`]: NEH, insertion local search, simulated annealing
//! - [`transfer`]: random-key decoding, projection and patching strategies
//! - [`emt`]: the multitasking engine
//! - [`harness`]: experiment campaigns, metrics and CSV output

pub mod auxiliary;
pub mod distance;
pub mod emt;
pub mod error;
pub mod harness;
pub mod instance;
pub mod search;
pub mod transfer;

pub use error::{Error, Result};
pub use instance::{Instance, Job, JobPermutation, ProblemMatrix, Time};
