//! Sampled wavefunctions and the bookkeeping attached to them.

use crate::Complex;

/// Identifies which approximation produced a [`WaveTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// First-order (lowest) WKB form.
    Wkb1,
    /// Second-order WKB form (phase corrected by the next series term).
    Wkb2,
    /// Alternating-WKB wavefunction built from first-order reflection data.
    Awkb,
    /// Numerov finite-difference integration of the Schrödinger equation.
    Numerov,
    /// Closed-form exact solution.
    Exact,
}

impl Method {
    /// Stable lower-case name used in file output.
    pub fn name(self) -> &'static str {
        match self {
            Method::Wkb1 => "wkb1",
            Method::Wkb2 => "wkb2",
            Method::Awkb => "awkb",
            Method::Numerov => "numerov",
            Method::Exact => "exact",
        }
    }
}

/// Which end of a grid a boundary condition or seed applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridEnd {
    /// The smallest grid point.
    Lower,
    /// The largest grid point.
    Upper,
}

/// Record of a normalization applied to a table (kept so downstream output
/// can state how amplitudes were fixed).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationRecord {
    /// Human-readable policy name (`"unit-l2"`, `"amplitude-match"`, ...).
    pub policy: String,
    /// Window `[lo, hi]` the policy was evaluated on.
    pub window: (f64, f64),
    /// Multiplicative factor that was applied to the stored values.
    pub factor: f64,
}

/// A wavefunction sampled on a strictly increasing grid.
///
/// Values are complex so that every approximation shares one container; for
/// real constructions the imaginary parts are exact zeros (up to the solver
/// tolerance), and tests pin that down.
#[derive(Debug, Clone)]
pub struct WaveTable {
    /// Strictly increasing sample abscissae.
    pub xs: Vec<f64>,
    /// Wavefunction values, one per abscissa.
    pub values: Vec<Complex>,
    /// Which approximation produced the table.
    pub method: Method,
    /// Normalization applied to `values`, if any.
    pub normalization: Option<NormalizationRecord>,
    /// Accumulated rescaling exponent: `values` are the true solution times
    /// `exp(-log_scale)`. Zero unless an integrator had to rescale to avoid
    /// overflow, in which case the table is defined up to scale anyway.
    pub log_scale: f64,
}

impl WaveTable {
    /// Builds a table, checking that `xs` is strictly increasing and matches
    /// `values` in length.
    pub fn new(xs: Vec<f64>, values: Vec<Complex>, method: Method) -> Self {
        assert_eq!(xs.len(), values.len(), "grid/value length mismatch");
        assert!(
            xs.windows(2).all(|w| w[0] < w[1]),
            "grid must be strictly increasing"
        );
        WaveTable {
            xs,
            values,
            method,
            normalization: None,
            log_scale: 0.0,
        }
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    /// True when the table holds no samples.
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Multiplies every value by `factor` and records the policy that chose it.
    pub fn scale(&mut self, factor: f64, policy: &str, window: (f64, f64)) {
        for v in &mut self.values {
            *v *= factor;
        }
        self.normalization = Some(NormalizationRecord {
            policy: policy.to_string(),
            window,
            factor,
        });
    }

    /// Largest `|Im ψ|` over the table — a cheap reality check for
    /// constructions that must be real.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }
}
