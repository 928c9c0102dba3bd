//! Histories, events and operation records shared by the simulator and the
//! linearization machinery.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::timestamp::{LamportTimestamp, VectorTimestamp};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProcessId(pub usize);

impl ProcessId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegisterId(String);

impl RegisterId {
    pub fn new(name: impl Into<String>) -> Self {
        RegisterId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RegisterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RegisterId {
    fn from(s: &str) -> Self {
        RegisterId::new(s)
    }
}

impl From<String> for RegisterId {
    fn from(s: String) -> Self {
        RegisterId(s)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpId(pub u64);

impl fmt::Display for OpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Timestamp {
    Vector(VectorTimestamp),
    Lamport(LamportTimestamp),
}

/// A register value.
///
/// `Tuple` is what the timestamped implementations store in their cells and
/// return from reads; register semantics compare the [`Value::plain`] part.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bottom,
    Int(i64),
    /// `[bit, round]` as written by the game hosts.
    Pair(u8, u64),
    Tuple(Box<Value>, Timestamp),
}

impl Value {
    /// The value with any timestamp stripped.
    pub fn plain(&self) -> &Value {
        match self {
            Value::Tuple(v, _) => v.plain(),
            v => v,
        }
    }

    pub fn timestamp(&self) -> Option<&Timestamp> {
        match self {
            Value::Tuple(_, ts) => Some(ts),
            _ => None,
        }
    }

    pub fn vector_ts(&self) -> Option<&VectorTimestamp> {
        match self.timestamp() {
            Some(Timestamp::Vector(ts)) => Some(ts),
            _ => None,
        }
    }

    pub fn lamport_ts(&self) -> Option<LamportTimestamp> {
        match self.timestamp() {
            Some(Timestamp::Lamport(ts)) => Some(*ts),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.plain() {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self.plain(), Value::Bottom)
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            Value::Bottom => serde_json::Value::Null,
            Value::Int(i) => json!(i),
            Value::Pair(b, j) => json!([b, j]),
            Value::Tuple(v, Timestamp::Vector(ts)) => json!({"v": v.to_json(), "ts": ts}),
            Value::Tuple(v, Timestamp::Lamport(ts)) => json!({"v": v.to_json(), "lts": ts}),
        }
    }

    pub fn from_json(j: &serde_json::Value) -> Result<Value, String> {
        use serde_json::Value as J;
        match j {
            J::Null => Ok(Value::Bottom),
            J::Number(n) => n
                .as_i64()
                .map(Value::Int)
                .ok_or_else(|| format!("non-integer value {n}")),
            J::Array(items) if items.len() == 2 => {
                let b = items[0].as_u64().filter(|b| *b <= 1);
                let r = items[1].as_u64();
                match (b, r) {
                    (Some(b), Some(r)) => Ok(Value::Pair(b as u8, r)),
                    _ => Err(format!("invalid pair {j}")),
                }
            }
            J::Object(map) => {
                let inner = map.get("v").ok_or_else(|| format!("tuple without v: {j}"))?;
                let inner = Box::new(Value::from_json(inner)?);
                if let Some(ts) = map.get("ts") {
                    let ts = VectorTimestamp::deserialize(ts).map_err(|e| e.to_string())?;
                    Ok(Value::Tuple(inner, Timestamp::Vector(ts)))
                } else if let Some(ts) = map.get("lts") {
                    let ts = LamportTimestamp::deserialize(ts).map_err(|e| e.to_string())?;
                    Ok(Value::Tuple(inner, Timestamp::Lamport(ts)))
                } else {
                    Err(format!("tuple without timestamp: {j}"))
                }
            }
            _ => Err(format!("unrecognised value {j}")),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bottom => f.write_str("⊥"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Pair(b, j) => write!(f, "[{b},{j}]"),
            Value::Tuple(v, Timestamp::Vector(ts)) => write!(f, "({v},{ts})"),
            Value::Tuple(v, Timestamp::Lamport(ts)) => write!(f, "({v},{ts})"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = serde_json::Value::deserialize(d)?;
        Value::from_json(&j).map_err(D::Error::custom)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Invoke,
    Respond,
    /// An access to a base cell made on behalf of an implemented operation.
    Base,
    /// A coin flip; invocation and outcome in one event.
    Coin,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Read,
    Write,
    Flip,
}

/// Partial timestamp of one active write, captured at a cell write.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingTs {
    pub op_id: OpId,
    pub ts: VectorTimestamp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub op_id: OpId,
    pub proc: ProcessId,
    pub register: RegisterId,
    pub op_kind: OpKind,
    pub value: Value,
    pub time: u64,
    /// 1-based base cell index for `Base` events.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<usize>,
    /// `new_ts` of every active writer, recorded on vector-register cell writes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pts: Option<Vec<PendingTs>>,
}

/// A complete or pending operation extracted from a history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperationRecord {
    pub op_id: OpId,
    pub proc: ProcessId,
    pub register: RegisterId,
    pub op_kind: OpKind,
    pub argument: Option<Value>,
    pub result: Option<Value>,
    pub invoke_time: u64,
    pub respond_time: Option<u64>,
}

impl OperationRecord {
    pub fn is_complete(&self) -> bool {
        self.respond_time.is_some()
    }

    pub fn is_read(&self) -> bool {
        self.op_kind == OpKind::Read
    }

    pub fn is_write(&self) -> bool {
        self.op_kind == OpKind::Write
    }
}

/// `a` precedes `b` iff `a` responded before `b` was invoked.
pub fn precedes(a: &OperationRecord, b: &OperationRecord) -> bool {
    a.respond_time.is_some_and(|r| r < b.invoke_time)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HistoryError {
    #[error("event times not strictly increasing at index {index}")]
    TimeOrder { index: usize },
    #[error("response for {op} without a prior invocation")]
    OrphanResponse { op: OpId },
    #[error("duplicate invocation of {op}")]
    DuplicateInvoke { op: OpId },
    #[error("{proc} invoked {op} while {pending} was pending")]
    Overlap {
        proc: ProcessId,
        op: OpId,
        pending: OpId,
    },
    #[error("SWMR register {register} written by {second} and {first}")]
    SecondWriter {
        register: RegisterId,
        first: ProcessId,
        second: ProcessId,
    },
}

/// A timed sequence of events.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct History {
    events: Vec<Event>,
}

impl History {
    pub fn new() -> Self {
        History::default()
    }

    pub fn from_events(events: Vec<Event>) -> Self {
        History { events }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn push(&mut self, e: Event) {
        self.events.push(e);
    }

    pub fn last_time(&self) -> u64 {
        self.events.last().map_or(0, |e| e.time)
    }

    /// Events with `time <= upto_time`.
    pub fn prefix(&self, upto_time: u64) -> History {
        History {
            events: self
                .events
                .iter()
                .take_while(|e| e.time <= upto_time)
                .cloned()
                .collect(),
        }
    }

    /// The first `len` events.
    pub fn truncate_events(&self, len: usize) -> History {
        History {
            events: self.events[..len.min(self.events.len())].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &History) -> bool {
        self.events.len() <= other.events.len() && other.events[..self.events.len()] == self.events[..]
    }

    /// Events on one register (including base events on its cells).
    pub fn project(&self, register: &RegisterId) -> History {
        History {
            events: self
                .events
                .iter()
                .filter(|e| &e.register == register)
                .cloned()
                .collect(),
        }
    }

    pub fn registers(&self) -> Vec<RegisterId> {
        let mut regs: Vec<RegisterId> = self
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Invoke | EventKind::Respond))
            .map(|e| e.register.clone())
            .collect();
        regs.sort();
        regs.dedup();
        regs
    }

    /// Read/write operations in invocation order.
    pub fn operations(&self) -> Vec<OperationRecord> {
        let mut order = Vec::new();
        let mut by_id: BTreeMap<OpId, OperationRecord> = BTreeMap::new();
        for e in &self.events {
            match e.kind {
                EventKind::Invoke => {
                    order.push(e.op_id);
                    by_id.insert(
                        e.op_id,
                        OperationRecord {
                            op_id: e.op_id,
                            proc: e.proc,
                            register: e.register.clone(),
                            op_kind: e.op_kind,
                            argument: (e.op_kind == OpKind::Write).then(|| e.value.clone()),
                            result: None,
                            invoke_time: e.time,
                            respond_time: None,
                        },
                    );
                }
                EventKind::Respond => {
                    if let Some(rec) = by_id.get_mut(&e.op_id) {
                        rec.respond_time = Some(e.time);
                        if rec.op_kind == OpKind::Read {
                            rec.result = Some(e.value.clone());
                        }
                    }
                }
                EventKind::Base | EventKind::Coin => {}
            }
        }
        order.into_iter().filter_map(|id| by_id.remove(&id)).collect()
    }

    /// Checks the structural invariants: increasing times, matched
    /// invoke/respond pairs, and sequential processes.
    pub fn well_formed(&self) -> Result<(), HistoryError> {
        let mut last = None;
        let mut invoked = BTreeMap::new();
        let mut pending: BTreeMap<ProcessId, OpId> = BTreeMap::new();
        for (index, e) in self.events.iter().enumerate() {
            if last.is_some_and(|t| e.time <= t) {
                return Err(HistoryError::TimeOrder { index });
            }
            last = Some(e.time);
            match e.kind {
                EventKind::Invoke => {
                    if let Some(&p) = pending.get(&e.proc) {
                        return Err(HistoryError::Overlap {
                            proc: e.proc,
                            op: e.op_id,
                            pending: p,
                        });
                    }
                    if invoked.insert(e.op_id, e.proc).is_some() {
                        return Err(HistoryError::DuplicateInvoke { op: e.op_id });
                    }
                    pending.insert(e.proc, e.op_id);
                }
                EventKind::Respond => {
                    if invoked.get(&e.op_id) != Some(&e.proc) || pending.get(&e.proc) != Some(&e.op_id) {
                        return Err(HistoryError::OrphanResponse { op: e.op_id });
                    }
                    pending.remove(&e.proc);
                }
                EventKind::Base | EventKind::Coin => {}
            }
        }
        Ok(())
    }

    /// Checks that `register` has at most one writing process.
    pub fn single_writer(&self, register: &RegisterId) -> Result<Option<ProcessId>, HistoryError> {
        let mut writer = None;
        for op in self.operations() {
            if &op.register != register || !op.is_write() {
                continue;
            }
            match writer {
                None => writer = Some(op.proc),
                Some(w) if w != op.proc => {
                    return Err(HistoryError::SecondWriter {
                        register: register.clone(),
                        first: w,
                        second: op.proc,
                    })
                }
                _ => {}
            }
        }
        Ok(writer)
    }
}

/// Returns the events of `h` with time at most `upto_time`.
pub fn history_prefix(h: &History, upto_time: u64) -> History {
    h.prefix(upto_time)
}

/// A sequential history claimed to explain a concurrent one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Linearization {
    pub ops: Vec<OperationRecord>,
}

impl Linearization {
    pub fn new(ops: Vec<OperationRecord>) -> Self {
        Linearization { ops }
    }

    /// Builds a linearization from op ids, looking records up in `h`.
    /// Unknown ids are returned as an error.
    pub fn from_ids(h: &History, ids: &[OpId]) -> Result<Self, OpId> {
        let ops = h.operations();
        let by_id: BTreeMap<OpId, &OperationRecord> = ops.iter().map(|o| (o.op_id, o)).collect();
        ids.iter()
            .map(|id| by_id.get(id).map(|r| (*r).clone()).ok_or(*id))
            .collect::<Result<Vec<_>, _>>()
            .map(Linearization::new)
    }

    pub fn op_ids(&self) -> Vec<OpId> {
        self.ops.iter().map(|o| o.op_id).collect()
    }

    /// The subsequence of write operations.
    pub fn writes(&self) -> Vec<OpId> {
        self.ops.iter().filter(|o| o.is_write()).map(|o| o.op_id).collect()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;

    /// Builds a single-register history from `(proc, kind, value, invoke, respond)`.
    pub fn history(ops: &[(usize, OpKind, Value, u64, Option<u64>)]) -> History {
        let mut events = Vec::new();
        for (i, (p, kind, value, inv, resp)) in ops.iter().enumerate() {
            let op = OpId(i as u64 + 1);
            let (arg, res) = match kind {
                OpKind::Write => (value.clone(), Value::Bottom),
                _ => (Value::Bottom, value.clone()),
            };
            events.push(Event {
                kind: EventKind::Invoke,
                op_id: op,
                proc: ProcessId(*p),
                register: RegisterId::new("R"),
                op_kind: *kind,
                value: arg,
                time: *inv,
                cell: None,
                pts: None,
            });
            if let Some(r) = resp {
                events.push(Event {
                    kind: EventKind::Respond,
                    op_id: op,
                    proc: ProcessId(*p),
                    register: RegisterId::new("R"),
                    op_kind: *kind,
                    value: res,
                    time: *r,
                    cell: None,
                    pts: None,
                });
            }
        }
        events.sort_by_key(|e| e.time);
        History::from_events(events)
    }
}
