//! Deterministic shared-memory simulator for register implementations, with
//! linearization functions, an exhaustive oracle, and the randomized game
//! used to tell linearizable registers from write strongly-linearizable ones.

pub mod experiment;
pub mod game;
pub mod goldens;
pub mod impl_lamport;
pub mod impl_vector;
pub mod linearize;
pub mod registers;
pub mod sim;
pub mod timestamp;
pub mod trace;
pub mod types;
pub mod workload;

pub use linearize::{check_linearizable, check_linearization, check_wsl_prefixes, f_star, f_vector};
pub use sim::{Outcome, SimConfig, SimError, Simulator};
pub use types::{Event, History, Linearization, OpId, ProcessId, RegisterId, Value};
