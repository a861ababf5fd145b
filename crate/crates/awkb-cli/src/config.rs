//! Scenario configuration: a single JSON document that selects the problem,
//! the grid, the methods to compare, and how results are normalized and
//! written. Every field has a default, so `{}` is a valid configuration.

use awkb::potential::{PotentialModel, ProblemSetup};
use serde::{Deserialize, Serialize};

/// Problem selector. `parameters` holds the per-kind fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "parameters", rename_all = "lowercase")]
pub enum ProblemConfig {
    /// `V(x) = m ω² x² / 2`.
    Harmonic(HarmonicParams),
    /// Radial barrier `V(r) = ħ² λ² / (2 m r²)` with `λ² = (l + 1/2)²`
    /// (Langer-modified) or `l (l + 1)` (bare).
    Centrifugal(CentrifugalParams),
    /// `V(x) = Σ_k c_k x^k` with `coefficients[k] = c_k`.
    Custom(CustomParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarmonicParams {
    pub mass: f64,
    pub omega: f64,
}

impl Default for HarmonicParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CentrifugalParams {
    pub l: u32,
    pub mass: f64,
    pub langer_modified: bool,
}

impl Default for CentrifugalParams {
    fn default() -> Self {
        Self {
            l: 1,
            mass: 1.0,
            langer_modified: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CustomParams {
    pub mass: f64,
    pub coefficients: Vec<f64>,
}

impl Default for CustomParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            coefficients: vec![0.0, 0.0, 0.5],
        }
    }
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig::Harmonic(HarmonicParams::default())
    }
}

impl ProblemConfig {
    pub fn to_model(&self) -> PotentialModel {
        match self {
            ProblemConfig::Harmonic(p) => PotentialModel::Harmonic {
                mass: p.mass,
                omega: p.omega,
            },
            ProblemConfig::Centrifugal(p) => PotentialModel::Centrifugal {
                l: p.l,
                mass: p.mass,
                langer_modified: p.langer_modified,
            },
            ProblemConfig::Custom(p) => PotentialModel::CustomPolynomial {
                mass: p.mass,
                coefficients: p.coefficients.clone(),
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ProblemConfig::Harmonic(_) => "harmonic",
            ProblemConfig::Centrifugal(_) => "centrifugal",
            ProblemConfig::Custom(_) => "custom",
        }
    }
}

/// Uniform evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 0.95,
            count: 96,
        }
    }
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

/// Quadrature and integration tolerances handed to the library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Phase integrals (action, cumulative phases).
    pub phase: f64,
    /// Reflection integrals and wavefunction assembly.
    pub reflection: f64,
    /// Adaptive step control of the coupled amplitude system.
    pub ode: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            phase: 1e-10,
            reflection: 1e-10,
            ode: 1e-12,
        }
    }
}

/// Wavefunction methods a scenario can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Wkb1,
    Wkb2,
    Awkb,
    Numerov,
    Exact,
}

impl MethodName {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::Wkb1 => "wkb1",
            MethodName::Wkb2 => "wkb2",
            MethodName::Awkb => "awkb",
            MethodName::Numerov => "numerov",
            MethodName::Exact => "exact",
        }
    }
}

/// How emitted wavefunction columns are scaled. Error metrics are always
/// computed scale-free (each pair amplitude-matched over the metrics
/// window), so this only affects the values columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
#[derive(Default)]
pub enum NormalizationConfig {
    /// Raw connection-formula amplitudes (`D = 1`).
    #[default]
    None,
    /// Unit L2 over a window for every emitted method.
    UnitL2 { window: [f64; 2] },
    /// Least-squares amplitude match of every non-exact method onto the
    /// exact column over a window (requires `exact` among the methods).
    MatchExact { window: [f64; 2] },
}


/// Output destination and format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    /// File stem for the emitted artifacts (data, metrics, manifest).
    pub path: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            format: OutputFormat::Csv,
            path: "run".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Complete scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub problem: ProblemConfig,
    pub energy: f64,
    pub hbar: f64,
    pub grid: GridConfig,
    /// Turning-point standoff as a fraction of the classical half-width:
    /// grids must keep at least this relative distance from every turning
    /// point.
    pub delta_tp: f64,
    pub tolerances: Tolerances,
    /// Highest nested-series order used by `quantize`, `convergence` and
    /// `contour-check`.
    pub bremmer_order: u32,
    pub methods: Vec<MethodName>,
    pub normalization: NormalizationConfig,
    /// Windows `[lo, hi]` over which error metrics are reported; empty
    /// means the full grid span.
    pub windows: Vec<[f64; 2]>,
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig::default(),
            energy: 0.5,
            hbar: 1.0,
            grid: GridConfig::default(),
            delta_tp: 0.05,
            tolerances: Tolerances::default(),
            bremmer_order: 1,
            methods: vec![MethodName::Wkb1, MethodName::Awkb, MethodName::Exact],
            normalization: NormalizationConfig::None,
            windows: Vec::new(),
            output: OutputConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    /// Canonical serialized form; `parse(emit(c)) == c` for every valid
    /// configuration (floats print with shortest round-trip digits).
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn setup(&self) -> ProblemSetup {
        ProblemSetup {
            model: self.problem.to_model(),
            energy: self.energy,
            hbar: self.hbar,
        }
    }

    /// Structural validation with field-path diagnostics. Geometry checks
    /// that need turning points (grid standoff, problem kind per command)
    /// happen in the commands.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        match &self.problem {
            ProblemConfig::Harmonic(p) => {
                need(
                    p.mass.is_finite() && p.mass > 0.0,
                    format!("problem.parameters.mass: must be finite and positive (got {})", p.mass),
                );
                need(
                    p.omega.is_finite() && p.omega > 0.0,
                    format!(
                        "problem.parameters.omega: must be finite and positive (got {})",
                        p.omega
                    ),
                );
            }
            ProblemConfig::Centrifugal(p) => {
                need(
                    p.mass.is_finite() && p.mass > 0.0,
                    format!("problem.parameters.mass: must be finite and positive (got {})", p.mass),
                );
                need(
                    p.l <= 100,
                    format!("problem.parameters.l: must be at most 100 (got {})", p.l),
                );
            }
            ProblemConfig::Custom(p) => {
                need(
                    p.mass.is_finite() && p.mass > 0.0,
                    format!("problem.parameters.mass: must be finite and positive (got {})", p.mass),
                );
                need(
                    !p.coefficients.is_empty() && p.coefficients.len() <= 16,
                    format!(
                        "problem.parameters.coefficients: need 1..=16 entries (got {})",
                        p.coefficients.len()
                    ),
                );
                need(
                    p.coefficients.iter().all(|c| c.is_finite()),
                    "problem.parameters.coefficients: entries must be finite".into(),
                );
            }
        }
        need(
            self.energy.is_finite(),
            format!("energy: must be finite (got {})", self.energy),
        );
        need(
            self.hbar.is_finite() && self.hbar > 0.0,
            format!("hbar: must be finite and positive (got {})", self.hbar),
        );
        need(
            self.grid.min.is_finite() && self.grid.max.is_finite() && self.grid.min < self.grid.max,
            format!(
                "grid: need finite min < max (got [{}, {}])",
                self.grid.min, self.grid.max
            ),
        );
        need(
            self.grid.count >= 16,
            format!("grid.count: must be at least 16 (got {})", self.grid.count),
        );
        need(
            self.grid.count <= 1_000_000,
            format!("grid.count: must be at most 1000000 (got {})", self.grid.count),
        );
        need(
            self.delta_tp.is_finite() && self.delta_tp > 0.0 && self.delta_tp < 0.2,
            format!("delta_tp: must lie strictly in (0, 0.2) (got {})", self.delta_tp),
        );
        for (name, tol) in [
            ("tolerances.phase", self.tolerances.phase),
            ("tolerances.reflection", self.tolerances.reflection),
            ("tolerances.ode", self.tolerances.ode),
        ] {
            need(
                tol.is_finite() && tol > 0.0 && tol <= 1e-1,
                format!("{name}: must lie in (0, 0.1] (got {tol})"),
            );
        }
        need(
            (1..=8).contains(&self.bremmer_order),
            format!("bremmer_order: must lie in 1..=8 (got {})", self.bremmer_order),
        );
        need(!self.methods.is_empty(), "methods: must not be empty".into());
        for (i, m) in self.methods.iter().enumerate() {
            need(
                !self.methods[..i].contains(m),
                format!("methods[{i}]: duplicate entry {}", m.as_str()),
            );
        }
        match &self.normalization {
            NormalizationConfig::None => {}
            NormalizationConfig::UnitL2 { window } | NormalizationConfig::MatchExact { window } => {
                need(
                    window[0].is_finite() && window[1].is_finite() && window[0] < window[1],
                    format!(
                        "normalization.window: need finite lo < hi (got [{}, {}])",
                        window[0], window[1]
                    ),
                );
            }
        }
        if let NormalizationConfig::MatchExact { .. } = self.normalization {
            need(
                self.methods.contains(&MethodName::Exact),
                "normalization: match-exact requires \"exact\" among methods".into(),
            );
        }
        for (i, w) in self.windows.iter().enumerate() {
            need(
                w[0].is_finite() && w[1].is_finite() && w[0] < w[1],
                format!("windows[{i}]: need finite lo < hi (got [{}, {}])", w[0], w[1]),
            );
        }
        need(
            !self.output.path.is_empty()
                && self
                    .output
                    .path
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-')),
            format!(
                "output.path: must be a non-empty stem of [A-Za-z0-9._-] (got {:?})",
                self.output.path
            ),
        );
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Metric windows, defaulting to the full grid span.
    pub fn metric_windows(&self) -> Vec<(f64, f64)> {
        if self.windows.is_empty() {
            vec![(self.grid.min, self.grid.max)]
        } else {
            self.windows.iter().map(|w| (w[0], w[1])).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_parses_to_defaults() {
        let cfg = ScenarioConfig::from_json_bytes(b"{}").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn round_trips_through_canonical_json() {
        let cfg = ScenarioConfig {
            problem: ProblemConfig::Centrifugal(CentrifugalParams {
                l: 2,
                mass: 1.5,
                langer_modified: false,
            }),
            energy: 0.123_456_789_012_345_68,
            windows: vec![[1.6, 3.0], [10.0, 20.0]],
            normalization: NormalizationConfig::UnitL2 {
                window: [-4.0, 4.0],
            },
            methods: vec![MethodName::Awkb, MethodName::Exact],
            ..ScenarioConfig::default()
        };
        let back = ScenarioConfig::from_json_bytes(cfg.to_canonical_json().as_bytes()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ScenarioConfig::from_json_bytes(br#"{"grid": {"mim": 0.0}}"#).is_err());
        assert!(ScenarioConfig::from_json_bytes(br#"{"extra": 1}"#).is_err());
    }

    #[test]
    fn validation_reports_field_paths() {
        let cfg = ScenarioConfig::from_json_bytes(
            br#"{"grid": {"min": 0.0, "max": 0.9, "count": 8}, "delta_tp": 0.5}"#,
        )
        .unwrap();
        let errs = cfg.validate().unwrap_err();
        assert!(errs.iter().any(|e| e.starts_with("grid.count:")), "{errs:?}");
        assert!(errs.iter().any(|e| e.starts_with("delta_tp:")), "{errs:?}");
    }

    #[test]
    fn non_finite_numbers_fail_validation() {
        let cfg = ScenarioConfig {
            energy: f64::NAN,
            ..ScenarioConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn problem_variants_build_models() {
        let h = ProblemConfig::default().to_model();
        assert!(matches!(h, PotentialModel::Harmonic { .. }));
        let c = ProblemConfig::Centrifugal(CentrifugalParams::default()).to_model();
        assert!(matches!(c, PotentialModel::Centrifugal { l: 1, .. }));
        let q = ProblemConfig::Custom(CustomParams {
            mass: 1.0,
            coefficients: vec![0.0, 0.0, 0.5, 0.0, 0.01],
        })
        .to_model();
        assert!(matches!(q, PotentialModel::CustomPolynomial { .. }));
    }
}
