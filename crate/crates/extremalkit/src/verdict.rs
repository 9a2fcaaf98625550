//! Shared check outcome carrying a replayable witness on falsification.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Verdict<W> {
    Holds,
    Violated { witness: W },
    Unknown { reason: String },
}

impl<W> Verdict<W> {
    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }

    pub fn unknown(reason: impl Into<String>) -> Self {
        Verdict::Unknown {
            reason: reason.into(),
        }
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Violated { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn map_witness<U>(self, f: impl FnOnce(W) -> U) -> Verdict<U> {
        match self {
            Verdict::Holds => Verdict::Holds,
            Verdict::Violated { witness } => Verdict::Violated {
                witness: f(witness),
            },
            Verdict::Unknown { reason } => Verdict::Unknown { reason },
        }
    }

    /// Short lowercase label used in reports and corpus sidecars.
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated { .. } => "violated",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}
