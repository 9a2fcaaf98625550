//! Tolerance registry: the single source of truth for every numeric
//! threshold asserted by tests. All values are overridable per instance.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Membership slack for `contains`.
    pub membership: f64,
    /// Allowed gap between `||query - point||` and the reported distance.
    pub consistency: f64,
    /// Euler-equation residual bound for an `Extremal` certificate.
    pub euler: f64,
    /// Normalization residual bound for an `Extremal` certificate.
    pub norm: f64,
    /// Below this value of the metric functional the shifted intersection
    /// is declared nonempty.
    pub zero: f64,
    /// Angular tolerance (radians) for ray deduplication and fan matching.
    pub angular: f64,
    /// Inner iterative schemes stop once an update moves less than this.
    pub step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            membership: 1e-8,
            consistency: 1e-8,
            euler: 1e-7,
            norm: 1e-7,
            zero: 1e-9,
            angular: 1e-3,
            step: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn with_membership(mut self, v: f64) -> Self {
        self.membership = v;
        self
    }
}
