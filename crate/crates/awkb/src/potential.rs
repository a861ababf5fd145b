//! Potential models, classical momenta and turning points.
//!
//! Everything downstream (phase integrals, reflection kernels, contour
//! diagnostics) is driven by the local momentum
//! `p(x) = sqrt(2 m (E - V(x)))`, so this module owns the potential shapes,
//! their derivatives, and the root finding that locates classical turning
//! points `V(x) = E`.

use crate::Complex;
use thiserror::Error;

/// Errors from potential evaluation and turning-point search.
#[derive(Debug, Error)]
pub enum PotentialError {
    /// A point lies outside the model's domain (e.g. `r <= 0` for a
    /// centrifugal barrier).
    #[error("point x = {x} is outside the potential's domain")]
    OutsideDomain {
        /// Offending abscissa.
        x: f64,
    },
    /// A root bracket does not actually straddle a sign change of `E - V`.
    #[error("bracket [{lo}, {hi}] does not straddle a turning point (E - V has the same sign at both ends)")]
    BracketSign {
        /// Lower bracket end.
        lo: f64,
        /// Upper bracket end.
        hi: f64,
    },
    /// The bracketed root refinement failed to reach tolerance.
    #[error("turning-point refinement did not converge in [{lo}, {hi}]")]
    NoConvergence {
        /// Lower bracket end.
        lo: f64,
        /// Upper bracket end.
        hi: f64,
    },
}

/// Shape of the potential energy curve.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialModel {
    /// Harmonic oscillator `V(x) = m ω² x² / 2`.
    Harmonic {
        /// Particle mass.
        mass: f64,
        /// Angular frequency.
        omega: f64,
    },
    /// Pure centrifugal barrier `V(r) = c ħ² / (2 m r²)` on `r > 0`, with
    /// `c = l(l+1)`, or `c = (l + 1/2)²` when the Langer modification is
    /// switched on (the substitution that makes radial WKB phases come out
    /// right at both `r → 0` and `r → ∞`).
    Centrifugal {
        /// Angular momentum quantum number.
        l: u32,
        /// Particle mass.
        mass: f64,
        /// Replace `l(l+1)` by `(l + 1/2)²` in the barrier strength.
        langer_modified: bool,
    },
    /// Polynomial potential `V(x) = Σ_k coefficients[k] x^k`.
    ///
    /// Derivatives of this model are taken by central differences rather
    /// than term-by-term, so it exercises the generic (model-agnostic)
    /// derivative path.
    CustomPolynomial {
        /// Particle mass.
        mass: f64,
        /// Coefficients in increasing order of power.
        coefficients: Vec<f64>,
    },
}

impl PotentialModel {
    /// Particle mass of the model.
    pub fn mass(&self) -> f64 {
        match self {
            PotentialModel::Harmonic { mass, .. } => *mass,
            PotentialModel::Centrifugal { mass, .. } => *mass,
            PotentialModel::CustomPolynomial { mass, .. } => *mass,
        }
    }

    /// Barrier-strength coefficient for centrifugal models (`l(l+1)` or
    /// `(l+1/2)²`); `None` otherwise.
    pub fn centrifugal_strength(&self) -> Option<f64> {
        match self {
            PotentialModel::Centrifugal {
                l, langer_modified, ..
            } => {
                let lf = f64::from(*l);
                Some(if *langer_modified {
                    (lf + 0.5) * (lf + 0.5)
                } else {
                    lf * (lf + 1.0)
                })
            }
            _ => None,
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_complex(coeffs: &[f64], z: Complex) -> Complex {
    coeffs
        .iter()
        .rev()
        .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// A potential model together with the energy and `ħ` that fix a concrete
/// problem.
///
/// All momentum and phase conventions of the crate are defined through the
/// methods here: `momentum_sq(x) = 2 m (E - V(x))` and
/// `classical_momentum(x) = sqrt(momentum_sq)`, continued as `i·|p|` where
/// the region is classically forbidden.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSetup {
    /// Shape of the potential.
    pub model: PotentialModel,
    /// Total energy `E`.
    pub energy: f64,
    /// Reduced Planck constant `ħ`.
    pub hbar: f64,
}

impl ProblemSetup {
    /// Checks that `x` lies inside the model's domain.
    pub fn domain_check(&self, x: f64) -> Result<(), PotentialError> {
        match self.model {
            PotentialModel::Centrifugal { .. } if x <= 0.0 => {
                Err(PotentialError::OutsideDomain { x })
            }
            _ => Ok(()),
        }
    }

    /// Potential energy `V(x)`.
    ///
    /// For centrifugal models the caller must keep `x > 0`; use
    /// [`ProblemSetup::domain_check`] at API boundaries.
    pub fn potential(&self, x: f64) -> f64 {
        match &self.model {
            PotentialModel::Harmonic { mass, omega } => 0.5 * mass * omega * omega * x * x,
            PotentialModel::Centrifugal { mass, .. } => {
                let c = self.model.centrifugal_strength().unwrap();
                c * self.hbar * self.hbar / (2.0 * mass * x * x)
            }
            PotentialModel::CustomPolynomial { coefficients, .. } => horner(coefficients, x),
        }
    }

    /// Derivative `V'(x)`.
    ///
    /// Analytic for the built-in shapes; central difference with step
    /// `1e-6 · max(1, |x|)` for [`PotentialModel::CustomPolynomial`], which
    /// keeps that code path honest for models added without analytic
    /// derivatives.
    pub fn d_potential(&self, x: f64) -> f64 {
        match &self.model {
            PotentialModel::Harmonic { mass, omega } => mass * omega * omega * x,
            PotentialModel::Centrifugal { mass, .. } => {
                let c = self.model.centrifugal_strength().unwrap();
                -c * self.hbar * self.hbar / (mass * x * x * x)
            }
            PotentialModel::CustomPolynomial { .. } => {
                let h = 1e-6 * x.abs().max(1.0);
                (self.potential(x + h) - self.potential(x - h)) / (2.0 * h)
            }
        }
    }

    /// Second derivative `V''(x)` (same analytic/central-difference split as
    /// [`ProblemSetup::d_potential`]).
    pub fn d2_potential(&self, x: f64) -> f64 {
        match &self.model {
            PotentialModel::Harmonic { mass, omega } => mass * omega * omega,
            PotentialModel::Centrifugal { mass, .. } => {
                let c = self.model.centrifugal_strength().unwrap();
                3.0 * c * self.hbar * self.hbar / (mass * x * x * x * x)
            }
            PotentialModel::CustomPolynomial { .. } => {
                let h = 1e-4 * x.abs().max(1.0);
                (self.potential(x + h) - 2.0 * self.potential(x) + self.potential(x - h))
                    / (h * h)
            }
        }
    }

    /// Squared momentum `q(x) = p²(x) = 2 m (E - V(x))`; negative in
    /// forbidden regions.
    pub fn momentum_sq(&self, x: f64) -> f64 {
        2.0 * self.model.mass() * (self.energy - self.potential(x))
    }

    /// Derivative `q'(x) = -2 m V'(x)`.
    pub fn d_momentum_sq(&self, x: f64) -> f64 {
        -2.0 * self.model.mass() * self.d_potential(x)
    }

    /// Classical momentum `p(x)`: real `sqrt(q)` in allowed regions,
    /// `i·sqrt(-q)` in forbidden ones.
    pub fn classical_momentum(&self, x: f64) -> Complex {
        let q = self.momentum_sq(x);
        if q >= 0.0 {
            Complex::new(q.sqrt(), 0.0)
        } else {
            Complex::new(0.0, (-q).sqrt())
        }
    }

    /// Real momentum `p(x)` in a classically allowed region.
    ///
    /// Clamps tiny negative `q` (roundoff at a turning point) to zero; a
    /// genuinely forbidden point yields `NaN`-free `0.0` only within
    /// `|q| <= tol_q`, otherwise the caller should have checked the region.
    pub fn momentum_allowed(&self, x: f64) -> f64 {
        self.momentum_sq(x).max(0.0).sqrt()
    }

    /// Magnitude `|p(x)|` of the imaginary momentum in a forbidden region.
    pub fn momentum_forbidden(&self, x: f64) -> f64 {
        (-self.momentum_sq(x)).max(0.0).sqrt()
    }

    /// Reflection kernel `h(x) = p'(x) / (2 p(x)) = q'(x) / (4 q(x))` — the
    /// logarithmic-derivative weight that sources coupling between the two
    /// momentum branches. Meromorphic in `x` (no square roots), so the same
    /// formula serves on complex contours.
    pub fn reflection_kernel(&self, x: f64) -> f64 {
        self.d_momentum_sq(x) / (4.0 * self.momentum_sq(x))
    }

    /// Analytic continuation of `q(z) = 2 m (E - V(z))` to complex `z`.
    pub fn momentum_sq_complex(&self, z: Complex) -> Complex {
        let m = self.model.mass();
        match &self.model {
            PotentialModel::Harmonic { mass, omega } => {
                2.0 * mass * self.energy - (mass * omega).powi(2) * z * z
            }
            PotentialModel::Centrifugal { .. } => {
                let c = self.model.centrifugal_strength().unwrap();
                2.0 * m * self.energy - c * self.hbar * self.hbar / (z * z)
            }
            PotentialModel::CustomPolynomial { coefficients, .. } => {
                2.0 * m * (self.energy - horner_complex(coefficients, z))
            }
        }
    }

    /// Derivative `q'(z) = -2 m V'(z)` continued to complex `z` (analytic for
    /// every model; polynomial derivatives are taken term by term here since
    /// finite differences have no preferred direction off the real axis).
    pub fn d_momentum_sq_complex(&self, z: Complex) -> Complex {
        let m = self.model.mass();
        match &self.model {
            PotentialModel::Harmonic { mass, omega } => -2.0 * (mass * omega).powi(2) * z,
            PotentialModel::Centrifugal { .. } => {
                let c = self.model.centrifugal_strength().unwrap();
                2.0 * c * self.hbar * self.hbar / (z * z * z)
            }
            PotentialModel::CustomPolynomial { coefficients, .. } => {
                let dcoeffs: Vec<f64> = coefficients
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, &c)| c * k as f64)
                    .collect();
                -2.0 * m * horner_complex(&dcoeffs, z)
            }
        }
    }

    /// Characteristic momentum scale `sqrt(2 m max(|E|, 1))`, used to set
    /// relative tolerances.
    pub fn momentum_scale(&self) -> f64 {
        (2.0 * self.model.mass() * self.energy.abs().max(1.0)).sqrt()
    }
}

/// Locates turning points `V(x) = E`, one per bracket, to within
/// `root_tol = 1e-12` (scaled by the bracket magnitude).
///
/// Each bracket `(lo, hi)` must straddle a sign change of `E - V`; the root
/// is refined by bisection with secant acceleration, which is guaranteed to
/// converge for the continuous models here. Returned points are sorted in
/// ascending order.
pub fn find_turning_points(
    s: &ProblemSetup,
    brackets: &[(f64, f64)],
) -> Result<Vec<f64>, PotentialError> {
    let mut roots = Vec::with_capacity(brackets.len());
    for &(lo, hi) in brackets {
        roots.push(refine_root(s, lo, hi)?);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(roots)
}

fn refine_root(s: &ProblemSetup, lo0: f64, hi0: f64) -> Result<f64, PotentialError> {
    let (mut lo, mut hi) = if lo0 <= hi0 { (lo0, hi0) } else { (hi0, lo0) };
    s.domain_check(lo)?;
    s.domain_check(hi)?;
    let f = |x: f64| s.energy - s.potential(x);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(PotentialError::BracketSign { lo, hi });
    }
    let tol = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    for iter in 0..200 {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        // Secant proposal clamped to the bracket interior, with a bisection
        // forced every fourth step so a one-sided secant cannot stall.
        let mut x = lo - flo * (hi - lo) / (fhi - flo);
        if iter % 4 == 3 || !x.is_finite() || x <= lo + 0.25 * tol || x >= hi - 0.25 * tol {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    Err(PotentialError::NoConvergence { lo: lo0, hi: hi0 })
}
