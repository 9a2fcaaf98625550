//! Registry of the named scalar functions that parameterize epigraph and
//! hypograph sets. Each entry knows how to evaluate itself and, where the
//! structure is understood, reports derivatives and the exact tangent
//! shape of its graph region at a point.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFn {
    /// `x sin(1/x)` extended by `0` at the origin.
    Xsin1x,
    Square,
    NegSquare,
    Abs,
    NegAbs,
    /// `min(0, x sin(1/x))`.
    Min0Xsin1x,
}

/// Exact tangent cone of a graph region at a reference point, when known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TangentShape {
    /// `{(u, v) : v >= s u}`.
    EpiOfSlope(f64),
    /// `{(u, v) : v <= s u}`.
    HypoOfSlope(f64),
    /// `{(u, v) : v >= -|u|}`.
    EpiNegAbs,
}

impl ScalarFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Xsin1x => {
                if x == 0.0 {
                    0.0
                } else {
                    x * (1.0 / x).sin()
                }
            }
            ScalarFn::Square => x * x,
            ScalarFn::NegSquare => -x * x,
            ScalarFn::Abs => x.abs(),
            ScalarFn::NegAbs => -x.abs(),
            ScalarFn::Min0Xsin1x => ScalarFn::Xsin1x.eval(x).min(0.0),
        }
    }

    /// Classical derivative where it exists.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        match self {
            ScalarFn::Xsin1x => {
                if x == 0.0 {
                    None
                } else {
                    Some((1.0 / x).sin() - (1.0 / x).cos() / x)
                }
            }
            ScalarFn::Square => Some(2.0 * x),
            ScalarFn::NegSquare => Some(-2.0 * x),
            ScalarFn::Abs => (x != 0.0).then(|| x.signum()),
            ScalarFn::NegAbs => (x != 0.0).then(|| -x.signum()),
            ScalarFn::Min0Xsin1x => None,
        }
    }

    /// Tangent cone of the epigraph `{(x, y) : y >= f(x)}` at a boundary
    /// point `(x, f(x))`, when the structure is registered.
    pub fn epigraph_tangent_at(&self, x: f64) -> Option<TangentShape> {
        match self {
            ScalarFn::Xsin1x if x == 0.0 => Some(TangentShape::EpiNegAbs),
            ScalarFn::NegAbs if x == 0.0 => Some(TangentShape::EpiNegAbs),
            _ => self.derivative(x).map(TangentShape::EpiOfSlope),
        }
    }

    /// Tangent cone of the hypograph `{(x, y) : y <= f(x)}` at `(x, f(x))`.
    pub fn hypograph_tangent_at(&self, x: f64) -> Option<TangentShape> {
        match self {
            // The region below min(0, x sin(1/x)) has the lower halfplane
            // as its contingent cone at the origin: the function vanishes
            // on a sequence accumulating at 0 and is O(|x|) everywhere.
            ScalarFn::Min0Xsin1x if x == 0.0 => Some(TangentShape::HypoOfSlope(0.0)),
            _ => self.derivative(x).map(TangentShape::HypoOfSlope),
        }
    }
}
