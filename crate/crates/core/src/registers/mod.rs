//! Register back-ends pluggable into the simulator.

use std::any::Any;

use crate::sim::{Recorder, SimError};
use crate::types::{OpId, OpKind, ProcessId, RegisterId, Value};

pub mod adversarial;
pub mod atomic;

pub use adversarial::{AdversarialRegister, CommitMode};
pub use atomic::AtomicRegister;

/// A shared register as seen by the simulator.
///
/// The simulator records invoke and respond events itself; back-ends only
/// record `Base` events for internal accesses.
pub trait RegisterBackend: Send + Any {
    fn id(&self) -> &RegisterId;

    fn initial(&self) -> &Value;

    /// True when invocation and response happen in one simulator step.
    fn is_atomic(&self) -> bool {
        false
    }

    /// Registers an invocation made at time `rec.now()`. Returns the result if
    /// the operation also completes in this step.
    fn invoke(
        &mut self,
        rec: &mut Recorder,
        op: OpId,
        proc: ProcessId,
        kind: OpKind,
        arg: Value,
    ) -> Result<Option<Value>, SimError>;

    /// Runs one internal step of a pending operation. A returned value means
    /// the response is recorded at `rec.next_time()`.
    fn step(&mut self, rec: &mut Recorder, op: OpId) -> Result<Option<Value>, SimError>;

    /// Appends `ops` to the register's committed linearization.
    fn commit(&mut self, _ops: &[OpId], _now: u64) -> Result<(), SimError> {
        Err(SimError::Config(format!("register {} does not accept commitments", self.id())))
    }

    /// Forces the pending read `op` to return `value`.
    fn choose_read(&mut self, _op: OpId, _value: &Value, _now: u64) -> Result<(), SimError> {
        Err(SimError::Config(format!("register {} does not accept read choices", self.id())))
    }

    fn as_any(&self) -> &dyn Any;
}

/// A register plus its optional single-writer restriction.
pub struct RegisterSpec {
    pub backend: Box<dyn RegisterBackend>,
    pub writer: Option<ProcessId>,
}

impl RegisterSpec {
    pub fn mwmr(backend: Box<dyn RegisterBackend>) -> Self {
        RegisterSpec { backend, writer: None }
    }

    pub fn swmr(backend: Box<dyn RegisterBackend>, writer: ProcessId) -> Self {
        RegisterSpec {
            backend,
            writer: Some(writer),
        }
    }
}
