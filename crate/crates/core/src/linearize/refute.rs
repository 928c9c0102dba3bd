//! Targeted refutation of write strong-linearizability for a history and a
//! set of its extensions.

use crate::linearize::oracle::{enumerate_linearizations, linearize_with_write_prefix, OracleError};
use crate::types::{History, Linearization, Value};

#[derive(Clone, Debug)]
pub enum RefuteOutcome {
    /// Every linearization of `g` paired with the index of an extension in
    /// which no linearization starts its writes the same way.
    Witness(Vec<(Linearization, usize)>),
    /// A linearization of `g` whose writes survive in every extension.
    NotRefuted(Linearization),
}

impl RefuteOutcome {
    pub fn is_refuted(&self) -> bool {
        matches!(self, RefuteOutcome::Witness(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefuteError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("extension {0} does not extend g")]
    NotAnExtension(usize),
    #[error("g has no linearization at all")]
    NotLinearizable,
}

pub fn refute_wsl(
    g: &History,
    extensions: &[History],
    initial: &Value,
    max_ops: usize,
) -> Result<RefuteOutcome, RefuteError> {
    if let Some(i) = extensions.iter().position(|h| !g.is_prefix_of(h)) {
        return Err(RefuteError::NotAnExtension(i));
    }
    let all = enumerate_linearizations(g, initial, max_ops)?;
    if all.is_empty() {
        return Err(RefuteError::NotLinearizable);
    }
    let mut witness = Vec::with_capacity(all.len());
    for l in all {
        let writes = l.writes();
        let mut killer = None;
        for (i, h) in extensions.iter().enumerate() {
            if linearize_with_write_prefix(h, initial, &writes, max_ops)?.is_none() {
                killer = Some(i);
                break;
            }
        }
        match killer {
            Some(i) => witness.push((l, i)),
            None => return Ok(RefuteOutcome::NotRefuted(l)),
        }
    }
    Ok(RefuteOutcome::Witness(witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::test_util::history;
    use crate::types::OpKind;

    #[test]
    fn single_write_is_not_refuted() {
        let g = history(&[(0, OpKind::Write, Value::Int(1), 1, Some(2))]);
        let out = refute_wsl(&g, std::slice::from_ref(&g), &Value::Int(0), 9).unwrap();
        assert!(!out.is_refuted());
    }

    #[test]
    fn non_extension_is_rejected() {
        let g = history(&[(0, OpKind::Write, Value::Int(1), 1, Some(2))]);
        let h = history(&[(0, OpKind::Write, Value::Int(5), 1, Some(2))]);
        assert_eq!(
            refute_wsl(&g, &[h], &Value::Int(0), 9).unwrap_err(),
            RefuteError::NotAnExtension(0)
        );
    }
}
