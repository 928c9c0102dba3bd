use std::any::Any;

use super::RegisterBackend;
use crate::sim::{Recorder, SimError};
use crate::types::{OpId, OpKind, ProcessId, RegisterId, Value};

/// Reads and writes take effect instantaneously at invocation.
pub struct AtomicRegister {
    id: RegisterId,
    initial: Value,
    current: Value,
}

impl AtomicRegister {
    pub fn new(id: impl Into<RegisterId>, initial: Value) -> Self {
        AtomicRegister {
            id: id.into(),
            current: initial.clone(),
            initial,
        }
    }

    pub fn current(&self) -> &Value {
        &self.current
    }
}

impl RegisterBackend for AtomicRegister {
    fn id(&self) -> &RegisterId {
        &self.id
    }

    fn initial(&self) -> &Value {
        &self.initial
    }

    fn is_atomic(&self) -> bool {
        true
    }

    fn invoke(
        &mut self,
        _rec: &mut Recorder,
        _op: OpId,
        _proc: ProcessId,
        kind: OpKind,
        arg: Value,
    ) -> Result<Option<Value>, SimError> {
        match kind {
            OpKind::Read => Ok(Some(self.current.clone())),
            OpKind::Write => {
                self.current = arg;
                Ok(Some(Value::Bottom))
            }
            OpKind::Flip => Err(SimError::Config("flip on a register".into())),
        }
    }

    fn step(&mut self, _rec: &mut Recorder, op: OpId) -> Result<Option<Value>, SimError> {
        Err(SimError::Config(format!("atomic register {} has no pending {op}", self.id)))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
