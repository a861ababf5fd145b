//! First- and second-order WKB wavefunctions and the asymptoticity report.
//!
//! Conventions: with `x₀` a turning point, the phase
//! `X(x) = (1/ħ) |∫_x^{x₀} p|` is non-negative on the allowed side, and the
//! lowest-order connected wavefunction is
//!
//! ```text
//! ψ₁(x) = 2 D cos(X - π/4) / sqrt(p)          (allowed side)
//! ψ₁(x) = D exp(-K) / sqrt(|p|)               (forbidden side)
//! ```
//!
//! with `K = (1/ħ) |∫_{x₀}^x |p||` and `D = 1` unless a normalization policy
//! rescales the table afterwards. The second-order form keeps the same
//! connection constants but shifts the phase by the next series term:
//! `ψ₂ = 2 D cos(X - ħ·T - π/4)/sqrt(p)`, where `T` integrates
//! `((S₁')² + S₁'')/(2p)` from the series reference point.

use crate::potential::ProblemSetup;
use crate::quadrature::{
    forbidden_decay_integral, integrate_real, phase_integral, QuadratureError, DEFAULT_BUDGET,
};
use crate::{Complex, Method, WaveTable};

/// Per-point values of the first three terms of the WKB phase series.
#[derive(Debug, Clone)]
pub struct SeriesTerms {
    /// Sample points.
    pub xs: Vec<f64>,
    /// Zeroth term: the action `S₀(x) = ∫_{x_ref}^x p dξ` (signed, not yet
    /// divided by `ħ`).
    pub s0: Vec<f64>,
    /// First term: `S₁(x) = -½ ln p(x)` (the amplitude's logarithm).
    pub s1: Vec<f64>,
    /// Second term, stored as the real integral
    /// `T(x) = ∫_{x_ref}^x ((S₁')² + S₁'')/(2p) dξ`; the series term proper
    /// is `S₂ = i·T`, purely imaginary, so it corrects the *phase* by `ħ·T`.
    pub s2: Vec<f64>,
    /// Reference point where `S₀` and `T` vanish.
    pub x_ref: f64,
}

/// Truth flags for the textbook ordering `|S₀|/ħ ≫ |S₁| ≫ ħ|S₂|` at one
/// sample point, with "≫" read as "at least `ratio` times larger".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticityFlags {
    /// Sample point.
    pub x: f64,
    /// `|S₀|/ħ ≥ ratio·|S₁|`.
    pub phase_dominates: bool,
    /// `|S₁| ≥ ratio·ħ|S₂|`.
    pub first_order_dominates: bool,
    /// `ratio·ħ|S₂| ≤ 1`: the neglected phase correction is small outright.
    pub second_order_small: bool,
}

/// Default dominance ratio used by [`asymptoticity_report`].
pub const DEFAULT_ASYMPTOTICITY_RATIO: f64 = 3.0;

/// Phases `X(xᵢ) = (1/ħ)|∫_{xᵢ}^{x₀} p|` for a grid lying entirely on one
/// (allowed) side of the turning point `x₀`.
///
/// The turning-point leg is integrated once with the square-root-aware rule;
/// the rest is chained between neighbouring grid points, so the whole grid
/// costs `O(N)` short integrals.
pub fn phases_toward(
    s: &ProblemSetup,
    grid: &[f64],
    x0: f64,
    tol: f64,
) -> Result<Vec<f64>, QuadratureError> {
    if grid.is_empty() {
        return Err(QuadratureError::InvalidGrid {
            reason: "empty grid".into(),
        });
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(QuadratureError::InvalidGrid {
            reason: "grid is not strictly increasing".into(),
        });
    }
    let n = grid.len();
    let panel_tol = tol / (n as f64 + 1.0);
    let mut xs = vec![0.0f64; n];
    if grid[n - 1] <= x0 {
        // Grid left of the turning point: X decreases as x grows.
        xs[n - 1] = phase_integral(s, grid[n - 1], x0, panel_tol)?.value.re;
        for i in (0..n - 1).rev() {
            let inc = phase_integral(s, grid[i], grid[i + 1], panel_tol)?.value.re;
            xs[i] = xs[i + 1] + inc;
        }
    } else if grid[0] >= x0 {
        xs[0] = phase_integral(s, x0, grid[0], panel_tol)?.value.re;
        for i in 1..n {
            let inc = phase_integral(s, grid[i - 1], grid[i], panel_tol)?.value.re;
            xs[i] = xs[i - 1] + inc;
        }
    } else {
        return Err(QuadratureError::InvalidGrid {
            reason: format!("grid straddles the turning point x₀ = {x0}"),
        });
    }
    Ok(xs)
}

/// Decay exponents `K(xᵢ) = (1/ħ)|∫_{x₀}^{xᵢ} |p||` for a grid lying
/// entirely on one (forbidden) side of `x₀`. Chained like [`phases_toward`].
pub fn decays_from(
    s: &ProblemSetup,
    grid: &[f64],
    x0: f64,
    tol: f64,
) -> Result<Vec<f64>, QuadratureError> {
    if grid.is_empty() {
        return Err(QuadratureError::InvalidGrid {
            reason: "empty grid".into(),
        });
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(QuadratureError::InvalidGrid {
            reason: "grid is not strictly increasing".into(),
        });
    }
    let n = grid.len();
    let panel_tol = tol / (n as f64 + 1.0);
    let mut ks = vec![0.0f64; n];
    if grid[0] >= x0 {
        // Forbidden region to the right of x₀.
        ks[0] = forbidden_decay_integral(s, x0, grid[0], panel_tol)?.value.re;
        for i in 1..n {
            let inc = forbidden_decay_integral(s, grid[i - 1], grid[i], panel_tol)?
                .value
                .re;
            ks[i] = ks[i - 1] + inc;
        }
    } else if grid[n - 1] <= x0 {
        ks[n - 1] = forbidden_decay_integral(s, grid[n - 1], x0, panel_tol)?.value.re;
        for i in (0..n - 1).rev() {
            let inc = forbidden_decay_integral(s, grid[i], grid[i + 1], panel_tol)?
                .value
                .re;
            ks[i] = ks[i + 1] + inc;
        }
    } else {
        return Err(QuadratureError::InvalidGrid {
            reason: format!("grid straddles the turning point x₀ = {x0}"),
        });
    }
    Ok(ks)
}

/// Lowest-order WKB wavefunction `2 cos(X - π/4)/sqrt(p)` on a classically
/// allowed grid, connected at the turning point `x₀`.
pub fn wkb1_allowed(
    s: &ProblemSetup,
    grid: &[f64],
    x0: f64,
    tol: f64,
) -> Result<WaveTable, QuadratureError> {
    let phases = phases_toward(s, grid, x0, tol)?;
    let values = grid
        .iter()
        .zip(phases.iter())
        .map(|(&x, &big_x)| {
            let p = s.momentum_allowed(x);
            Complex::new(2.0 * (big_x - std::f64::consts::FRAC_PI_4).cos() / p.sqrt(), 0.0)
        })
        .collect();
    Ok(WaveTable::new(grid.to_vec(), values, Method::Wkb1))
}

/// Lowest-order WKB wavefunction `exp(-K)/sqrt(|p|)` on a classically
/// forbidden grid beyond the turning point `x₀` (either side).
pub fn wkb1_forbidden(
    s: &ProblemSetup,
    grid: &[f64],
    x0: f64,
    tol: f64,
) -> Result<WaveTable, QuadratureError> {
    let decays = decays_from(s, grid, x0, tol)?;
    let values = grid
        .iter()
        .zip(decays.iter())
        .map(|(&x, &k)| {
            let p = s.momentum_forbidden(x);
            Complex::new((-k).exp() / p.sqrt(), 0.0)
        })
        .collect();
    Ok(WaveTable::new(grid.to_vec(), values, Method::Wkb1))
}

fn series_t_integrand(s: &ProblemSetup, x: f64) -> f64 {
    // S₁' = -p'/(2p) = m V'/(2p²)·(2m)/(2m) — expressed via q to avoid
    // square roots: S₁' = -q'/(4q), S₁'' = -q''/(4q) + (q')²/(4q²).
    let m = s.model.mass();
    let q = s.momentum_sq(x);
    let dq = s.d_momentum_sq(x);
    let d2q = -2.0 * m * s.d2_potential(x);
    let s1p = -dq / (4.0 * q);
    let s1pp = -d2q / (4.0 * q) + dq * dq / (4.0 * q * q);
    (s1p * s1p + s1pp) / (2.0 * q.sqrt())
}

/// Evaluates the first three WKB series terms on a classically allowed grid,
/// with `S₀` and `T` (the second-order phase integral) anchored at `x_ref`.
pub fn wkb_series(
    s: &ProblemSetup,
    grid: &[f64],
    x_ref: f64,
    tol: f64,
) -> Result<SeriesTerms, QuadratureError> {
    if grid.is_empty() {
        return Err(QuadratureError::InvalidGrid {
            reason: "empty grid".into(),
        });
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(QuadratureError::InvalidGrid {
            reason: "grid is not strictly increasing".into(),
        });
    }
    let n = grid.len();
    let panel_tol = tol / (n as f64 + 1.0);
    // Chain S₀ and T outward from x_ref. Insert the reference into the walk
    // so every panel is short.
    let mut s0 = vec![0.0f64; n];
    let mut t = vec![0.0f64; n];
    let seg_s0 = |a: f64, b: f64| -> Result<f64, QuadratureError> {
        Ok(phase_integral(s, a, b, panel_tol)?.value.re * s.hbar)
    };
    let seg_t = |a: f64, b: f64| -> Result<f64, QuadratureError> {
        Ok(
            integrate_real(|x| series_t_integrand(s, x), a, b, panel_tol, DEFAULT_BUDGET)?
                .value
                .re,
        )
    };
    // Split the grid at x_ref.
    let split = grid.partition_point(|&g| g < x_ref);
    // Upward from x_ref.
    let mut prev = x_ref;
    let (mut acc_s0, mut acc_t) = (0.0f64, 0.0f64);
    for i in split..n {
        acc_s0 += seg_s0(prev, grid[i])?;
        acc_t += seg_t(prev, grid[i])?;
        s0[i] = acc_s0;
        t[i] = acc_t;
        prev = grid[i];
    }
    // Downward from x_ref.
    prev = x_ref;
    let (mut acc_s0, mut acc_t) = (0.0f64, 0.0f64);
    for i in (0..split).rev() {
        acc_s0 += seg_s0(prev, grid[i])?;
        acc_t += seg_t(prev, grid[i])?;
        s0[i] = acc_s0;
        t[i] = acc_t;
        prev = grid[i];
    }
    let s1 = grid
        .iter()
        .map(|&x| -0.5 * s.momentum_allowed(x).ln())
        .collect();
    Ok(SeriesTerms {
        xs: grid.to_vec(),
        s0,
        s1,
        s2: t,
        x_ref,
    })
}

/// Flags the textbook dominance ordering of the series terms at every sample
/// of `terms`, using `ratio` as the meaning of "much larger" (comparisons are
/// non-strict, so exact zeros at the reference point pass).
pub fn asymptoticity_report(
    terms: &SeriesTerms,
    hbar: f64,
    ratio: f64,
) -> Vec<AsymptoticityFlags> {
    terms
        .xs
        .iter()
        .enumerate()
        .map(|(i, &x)| AsymptoticityFlags {
            x,
            phase_dominates: terms.s0[i].abs() / hbar >= ratio * terms.s1[i].abs(),
            first_order_dominates: terms.s1[i].abs() >= ratio * hbar * terms.s2[i].abs(),
            second_order_small: ratio * hbar * terms.s2[i].abs() <= 1.0,
        })
        .collect()
}

/// Second-order WKB wavefunction `2 cos(X - ħT - π/4)/sqrt(p)` on an allowed
/// grid: same connection constants as [`wkb1_allowed`], phase corrected by
/// the second series term anchored at `x_ref`.
pub fn wkb2_wavefunction(
    s: &ProblemSetup,
    grid: &[f64],
    x0: f64,
    x_ref: f64,
    tol: f64,
) -> Result<WaveTable, QuadratureError> {
    let phases = phases_toward(s, grid, x0, tol)?;
    let terms = wkb_series(s, grid, x_ref, tol)?;
    let values = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let p = s.momentum_allowed(x);
            let phase = phases[i] - s.hbar * terms.s2[i] - std::f64::consts::FRAC_PI_4;
            Complex::new(2.0 * phase.cos() / p.sqrt(), 0.0)
        })
        .collect();
    Ok(WaveTable::new(grid.to_vec(), values, Method::Wkb2))
}
