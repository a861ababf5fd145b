//! Exact and brute-force oracles: harmonic-oscillator eigenstates,
//! Riccati–Bessel functions, a Numerov integrator, plus normalization
//! policies and error metrics for comparing wavefunction tables.
//!
//! Everything here is deliberately independent of the semiclassical
//! machinery in the rest of the crate, so that agreement between the two is
//! evidence rather than tautology.

use crate::{Complex, GridEnd, Method, WaveTable};
use thiserror::Error;

/// Errors from oracles, normalization and comparison.
#[derive(Debug, Error)]
pub enum ReferenceError {
    /// A normalization window captured no usable signal (zero norm).
    #[error("degenerate normalization: zero norm over window [{lo}, {hi}]")]
    DegenerateNorm {
        /// Window lower edge.
        lo: f64,
        /// Window upper edge.
        hi: f64,
    },
    /// A comparison window does not overlap both tables' grids.
    #[error("window [{lo}, {hi}] does not overlap both grids")]
    DisjointWindow {
        /// Window lower edge.
        lo: f64,
        /// Window upper edge.
        hi: f64,
    },
    /// Numerov requires a uniform grid.
    #[error("grid is not uniform: step deviates by {deviation:e} at index {index}")]
    NonUniformGrid {
        /// Index of the offending step.
        index: usize,
        /// Absolute deviation from the nominal step.
        deviation: f64,
    },
    /// A grid with fewer points than the operation needs.
    #[error("grid too short: {len} points, need at least {need}")]
    GridTooShort {
        /// Points provided.
        len: usize,
        /// Points required.
        need: usize,
    },
}

/// L2/sup distances between two tables over a window, with the sup location
/// and the normalization policies that were in force.
#[derive(Debug, Clone)]
pub struct ErrorMetrics {
    /// Window the metrics were evaluated on (after clamping to the common
    /// grid span).
    pub window: (f64, f64),
    /// `sqrt(∫ |ψ_a - ψ_b|² dx)` over the window.
    pub l2: f64,
    /// `max |ψ_a - ψ_b|` over the window.
    pub sup: f64,
    /// Abscissa where the sup is attained.
    pub sup_at: f64,
    /// Normalization policy recorded on the first table, if any.
    pub policy_a: Option<String>,
    /// Normalization policy recorded on the second table, if any.
    pub policy_b: Option<String>,
}

/// Normalized harmonic-oscillator eigenstate `ψ_n` sampled on `grid`, for
/// mass `m`, frequency `ω` and Planck constant `ħ`.
///
/// Uses the orthonormal Hermite recurrence
/// `h̃_{k+1} = ξ√(2/(k+1)) h̃_k − √(k/(k+1)) h̃_{k−1}` so no factorials
/// overflow.
pub fn ho_exact_eigenstate(n: u32, mass: f64, omega: f64, hbar: f64, grid: &[f64]) -> WaveTable {
    let alpha = (mass * omega / hbar).sqrt();
    let quartic_root = (mass * omega / (std::f64::consts::PI * hbar)).powf(0.25);
    let values = grid
        .iter()
        .map(|&x| {
            let xi = alpha * x;
            let gauss = (-0.5 * xi * xi).exp();
            let mut hm1 = 0.0f64; // h̃_{-1}
            let mut h0 = 1.0f64; // h̃_0
            for k in 0..n {
                let kf = k as f64;
                let next = xi * (2.0 / (kf + 1.0)).sqrt() * h0 - (kf / (kf + 1.0)).sqrt() * hm1;
                hm1 = h0;
                h0 = next;
            }
            Complex::new(quartic_root * h0 * gauss, 0.0)
        })
        .collect();
    WaveTable::new(grid.to_vec(), values, Method::Exact)
}

/// Regular Riccati–Bessel function `Ŝ_l(x)`: the solution of
/// `u'' + (1 − l(l+1)/x²) u = 0` behaving like `x^{l+1}/(2l+1)!!` at the
/// origin. `Ŝ₀ = sin x`, `Ŝ₁ = sin x / x − cos x`.
///
/// Closed forms are used for `l ≤ 1`; larger `l` uses upward recurrence
/// where it is stable (`x ≳ l`) and Miller's downward recurrence otherwise.
pub fn riccati_bessel_regular(l: u32, x: f64) -> f64 {
    assert!(x > 0.0, "Riccati–Bessel functions need x > 0");
    match l {
        0 => x.sin(),
        1 => x.sin() / x - x.cos(),
        _ => {
            if x >= l as f64 + 0.5 {
                // Upward: S_{k+1} = (2k+1)/x · S_k − S_{k−1}.
                let mut sm1 = x.sin();
                let mut s0 = x.sin() / x - x.cos();
                for k in 1..l {
                    let next = (2.0 * k as f64 + 1.0) / x * s0 - sm1;
                    sm1 = s0;
                    s0 = next;
                }
                s0
            } else {
                // Downward from a safely higher order, normalized at l = 0.
                let start = l + 20 + (2.0 * (l as f64)).sqrt() as u32;
                let mut up = 0.0f64; // S_{k+1} (unnormalized)
                let mut here = f64::MIN_POSITIVE.sqrt(); // S_k
                let mut at_l = 0.0f64;
                for k in (0..=start).rev() {
                    // With here = S_{k+1}, up = S_{k+2}, this yields S_k.
                    let down = (2.0 * k as f64 + 3.0) / x * here - up;
                    up = here;
                    here = down;
                    if k == l {
                        at_l = here;
                    }
                    // Rescale to dodge overflow of the unnormalized run.
                    if here.abs() > 1e200 {
                        here /= 1e200;
                        up /= 1e200;
                        at_l /= 1e200;
                    }
                }
                // `here` now holds unnormalized S_0.
                at_l * x.sin() / here
            }
        }
    }
}

/// Two seed values fixing a Numerov march: the wavefunction at the end point
/// of the grid and at its immediate interior neighbour.
#[derive(Debug, Clone, Copy)]
pub struct NumerovSeed {
    /// Which end of the grid the seeds sit on.
    pub end: GridEnd,
    /// `(u at the end point, u at the adjacent interior point)`.
    pub values: (f64, f64),
}

/// Fourth-order Numerov integration of `u'' = (2m/ħ²)(V − E) u` across a
/// uniform grid, marching away from the seeded end.
///
/// If the solution grows past `1e150` it is rescaled in place and the
/// accumulated logarithm recorded in [`WaveTable::log_scale`] — the solution
/// is then defined up to scale, which is what eigenvalue shooting and
/// amplitude matching need anyway.
pub fn numerov_solve(
    s: &crate::potential::ProblemSetup,
    grid: &[f64],
    seed: NumerovSeed,
) -> Result<WaveTable, ReferenceError> {
    let n = grid.len();
    if n < 3 {
        return Err(ReferenceError::GridTooShort { len: n, need: 3 });
    }
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    for (i, w) in grid.windows(2).enumerate() {
        let dev = (w[1] - w[0] - h).abs();
        if dev > 1e-9 * h.abs() {
            return Err(ReferenceError::NonUniformGrid {
                index: i,
                deviation: dev,
            });
        }
    }
    let m = s.model.mass();
    let f = |x: f64| 2.0 * m / (s.hbar * s.hbar) * (s.potential(x) - s.energy);
    let h2_12 = h * h / 12.0;
    let mut u = vec![0.0f64; n];
    let mut log_scale = 0.0f64;
    let run = |u: &mut Vec<f64>, idx: &mut dyn Iterator<Item = usize>, log_scale: &mut f64| {
        // w_i = (1 - h²f_i/12) u_i turns the recursion into
        // w_{i+1} = 2 w_i - w_{i-1} + h² f_i u_i.
        let mut prev2: Option<usize> = None;
        let mut prev1: Option<usize> = None;
        for i in idx {
            if let (Some(i2), Some(i1)) = (prev2, prev1) {
                let fi = f(grid[i1]);
                let fi2 = f(grid[i2]);
                let fi_next = f(grid[i]);
                let w1 = (1.0 - h2_12 * fi) * u[i1];
                let w2 = (1.0 - h2_12 * fi2) * u[i2];
                let w_next = 2.0 * w1 - w2 + h * h * fi * u[i1];
                u[i] = w_next / (1.0 - h2_12 * fi_next);
                if u[i].abs() > 1e150 {
                    let scale = u[i].abs();
                    for v in u.iter_mut() {
                        *v /= scale;
                    }
                    *log_scale += scale.ln();
                }
            }
            prev2 = prev1;
            prev1 = Some(i);
        }
    };
    match seed.end {
        GridEnd::Lower => {
            u[0] = seed.values.0;
            u[1] = seed.values.1;
            run(&mut u, &mut (0..n), &mut log_scale);
        }
        GridEnd::Upper => {
            u[n - 1] = seed.values.0;
            u[n - 2] = seed.values.1;
            run(&mut u, &mut (0..n).rev(), &mut log_scale);
        }
    }
    let values = u.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut table = WaveTable::new(grid.to_vec(), values, Method::Numerov);
    table.log_scale = log_scale;
    Ok(table)
}

/// How to fix the free constant of a wavefunction table.
#[derive(Debug, Clone)]
pub enum NormalizationPolicy<'a> {
    /// Scale so `∫ |ψ|² dx = 1` over the window (clamped to the grid span).
    UnitL2 {
        /// Window `[lo, hi]`.
        window: (f64, f64),
    },
    /// Scale by the real least-squares factor `α` minimizing
    /// `∫ |α ψ − ψ_ref|² dx` over the window.
    AmplitudeMatch {
        /// Window `[lo, hi]`.
        window: (f64, f64),
        /// Table to match against (interpolated onto this table's grid).
        reference: &'a WaveTable,
    },
}

fn trapezoid<F: Fn(usize) -> f64>(xs: &[f64], lo: usize, hi: usize, f: F) -> f64 {
    let mut acc = 0.0;
    for i in lo..hi {
        acc += 0.5 * (xs[i + 1] - xs[i]) * (f(i) + f(i + 1));
    }
    acc
}

fn window_indices(xs: &[f64], window: (f64, f64)) -> Option<(usize, usize)> {
    let lo = xs.partition_point(|&x| x < window.0 - 1e-12);
    let hi = xs.partition_point(|&x| x <= window.1 + 1e-12);
    if hi - lo >= 2 {
        Some((lo, hi - 1))
    } else {
        None
    }
}

/// Local cubic (4-point Lagrange) interpolation of a table at `x`. Falls
/// back to the available points near the ends of the grid.
pub fn interp_cubic(xs: &[f64], values: &[Complex], x: f64) -> Complex {
    let n = xs.len();
    debug_assert!(n >= 2);
    let seg = xs.partition_point(|&g| g <= x).clamp(1, n - 1) - 1;
    let start = seg.saturating_sub(1).min(n.saturating_sub(4));
    let count = 4.min(n);
    let mut acc = Complex::new(0.0, 0.0);
    for j in start..start + count {
        let mut weight = 1.0;
        for k in start..start + count {
            if k != j {
                weight *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += values[j] * weight;
    }
    acc
}

/// Applies a normalization policy, returning a scaled copy with the policy
/// recorded in the table metadata.
pub fn normalize(
    w: &WaveTable,
    policy: &NormalizationPolicy<'_>,
) -> Result<WaveTable, ReferenceError> {
    let (window, factor, name) = match policy {
        NormalizationPolicy::UnitL2 { window } => {
            let (lo, hi) = window_indices(&w.xs, *window).ok_or(
                ReferenceError::DisjointWindow {
                    lo: window.0,
                    hi: window.1,
                },
            )?;
            let norm_sq = trapezoid(&w.xs, lo, hi, |i| w.values[i].norm_sqr());
            if norm_sq <= 0.0 || !norm_sq.is_finite() {
                return Err(ReferenceError::DegenerateNorm {
                    lo: window.0,
                    hi: window.1,
                });
            }
            (*window, 1.0 / norm_sq.sqrt(), "unit-l2")
        }
        NormalizationPolicy::AmplitudeMatch { window, reference } => {
            let (lo, hi) = window_indices(&w.xs, *window).ok_or(
                ReferenceError::DisjointWindow {
                    lo: window.0,
                    hi: window.1,
                },
            )?;
            let self_sq = trapezoid(&w.xs, lo, hi, |i| w.values[i].norm_sqr());
            if self_sq <= 0.0 || !self_sq.is_finite() {
                return Err(ReferenceError::DegenerateNorm {
                    lo: window.0,
                    hi: window.1,
                });
            }
            let cross = trapezoid(&w.xs, lo, hi, |i| {
                let r = interp_cubic(&reference.xs, &reference.values, w.xs[i]);
                (w.values[i].conj() * r).re
            });
            (*window, cross / self_sq, "amplitude-match")
        }
    };
    let mut out = w.clone();
    out.scale(factor, name, window);
    Ok(out)
}

/// L2 and sup distances between two tables over `window`, interpolating the
/// coarser table onto the finer one (local cubic).
pub fn compare(
    wa: &WaveTable,
    wb: &WaveTable,
    window: (f64, f64),
) -> Result<ErrorMetrics, ReferenceError> {
    let lo = window
        .0
        .max(wa.xs[0])
        .max(wb.xs[0]);
    let hi = window
        .1
        .min(wa.xs[wa.len() - 1])
        .min(wb.xs[wb.len() - 1]);
    // Negated form on purpose: a NaN bound must land in the error branch.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(lo < hi) {
        return Err(ReferenceError::DisjointWindow {
            lo: window.0,
            hi: window.1,
        });
    }
    let count_in = |t: &WaveTable| t.xs.iter().filter(|&&x| x >= lo && x <= hi).count();
    let (fine, coarse) = if count_in(wa) >= count_in(wb) {
        (wa, wb)
    } else {
        (wb, wa)
    };
    let (ilo, ihi) = window_indices(&fine.xs, (lo, hi)).ok_or(
        ReferenceError::DisjointWindow {
            lo: window.0,
            hi: window.1,
        },
    )?;
    let mut sup = 0.0f64;
    let mut sup_at = fine.xs[ilo];
    let diffs: Vec<f64> = (ilo..=ihi)
        .map(|i| {
            let x = fine.xs[i];
            let other = interp_cubic(&coarse.xs, &coarse.values, x);
            let d = (fine.values[i] - other).norm();
            if d > sup {
                sup = d;
                sup_at = x;
            }
            d * d
        })
        .collect();
    let l2 = trapezoid(&fine.xs[ilo..=ihi], 0, ihi - ilo, |i| diffs[i]).sqrt();
    let policy_of = |t: &WaveTable| t.normalization.as_ref().map(|r| r.policy.clone());
    Ok(ErrorMetrics {
        window: (lo, hi),
        l2,
        sup,
        sup_at,
        policy_a: policy_of(wa),
        policy_b: policy_of(wb),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{PotentialModel, ProblemSetup};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn ground_state_closed_form_and_norm() {
        let grid = uniform(-8.0, 8.0, 4001);
        let w = ho_exact_eigenstate(0, 1.0, 1.0, 1.0, &grid);
        // ψ₀(0) = π^{-1/4}.
        let mid = grid.len() / 2;
        assert_abs_diff_eq!(
            w.values[mid].re,
            std::f64::consts::PI.powf(-0.25),
            epsilon = 1e-12
        );
        // Unit L2 norm out of the box.
        let norm_sq = trapezoid(&grid, 0, grid.len() - 1, |i| w.values[i].norm_sqr());
        assert_abs_diff_eq!(norm_sq, 1.0, epsilon = 1e-10);
        // Gaussian profile.
        for (i, &x) in grid.iter().enumerate().step_by(500) {
            let expect = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
            assert_abs_diff_eq!(w.values[i].re, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn excited_states_parity_and_norm() {
        let grid = uniform(-10.0, 10.0, 8001);
        for n in [1u32, 2, 5, 10] {
            let w = ho_exact_eigenstate(n, 1.0, 1.0, 1.0, &grid);
            let mid = grid.len() / 2;
            if n % 2 == 1 {
                assert_abs_diff_eq!(w.values[mid].re, 0.0, epsilon = 1e-12);
            }
            let norm_sq = trapezoid(&grid, 0, grid.len() - 1, |i| w.values[i].norm_sqr());
            assert_abs_diff_eq!(norm_sq, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn riccati_bessel_low_orders() {
        use std::f64::consts::PI;
        assert_abs_diff_eq!(riccati_bessel_regular(0, PI), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(riccati_bessel_regular(1, PI), 1.0, epsilon = 1e-12);
        // Small-argument leading order x²/3 for l = 1.
        let x = 0.01;
        assert_relative_eq!(
            riccati_bessel_regular(1, x),
            x * x / 3.0,
            max_relative = 1e-4
        );
    }

    #[test]
    fn riccati_bessel_recurrence_consistency_and_ode() {
        // Upward and downward paths meet near the switchover and satisfy
        // the defining ODE u'' + (1 - l(l+1)/x²)u = 0.
        for l in [2u32, 3, 5, 8] {
            let c = (l * (l + 1)) as f64;
            for &x in &[0.5f64, 1.0, 3.0, 7.0, 15.0] {
                let h = 1e-3;
                let u = |t: f64| riccati_bessel_regular(l, t);
                let residual = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h)
                    + (1.0 - c / (x * x)) * u(x);
                assert!(
                    residual.abs() < 1e-6,
                    "ODE residual {residual:e} at l={l}, x={x}"
                );
            }
            // Leading order x^{l+1}/(2l+1)!! at small argument.
            let x = 0.1;
            let dfact: f64 = (1..=(2 * l + 1)).step_by(2).map(f64::from).product();
            assert_relative_eq!(
                riccati_bessel_regular(l, x),
                x.powi(l as i32 + 1) / dfact,
                max_relative = 1e-2
            );
        }
    }

    #[test]
    fn numerov_reproduces_free_particle() {
        // V = 0, E = 1/2 (so k = 1): u = sin x.
        let s = ProblemSetup {
            model: PotentialModel::CustomPolynomial {
                mass: 1.0,
                coefficients: vec![0.0],
            },
            energy: 0.5,
            hbar: 1.0,
        };
        let n = 6401;
        let grid = uniform(0.0, 6.4, n);
        let h = grid[1] - grid[0];
        let w = numerov_solve(
            &s,
            &grid,
            NumerovSeed {
                end: GridEnd::Lower,
                values: (0.0, h.sin()),
            },
        )
        .unwrap();
        let mut worst = 0.0f64;
        for (i, &x) in grid.iter().enumerate() {
            worst = worst.max((w.values[i].re - x.sin()).abs());
        }
        assert!(worst < 1e-9, "free-particle deviation {worst:e}");
    }

    #[test]
    fn numerov_matches_gaussian_ground_state() {
        // March inward from deep in the forbidden region with WKB seeds;
        // the ratio to the exact Gaussian must be constant on [-2, 2].
        let s = ProblemSetup {
            model: PotentialModel::Harmonic {
                mass: 1.0,
                omega: 1.0,
            },
            energy: 0.5,
            hbar: 1.0,
        };
        let h = 1e-3;
        let n = 10001;
        let grid: Vec<f64> = (0..n).map(|i| -2.0 + i as f64 * h).collect();
        let seed_at = |x: f64| {
            let k = 0.5 * (x * (x * x - 1.0).sqrt() - x.acosh());
            (-k).exp() / (x * x - 1.0).sqrt().sqrt()
        };
        let w = numerov_solve(
            &s,
            &grid,
            NumerovSeed {
                end: GridEnd::Upper,
                values: (seed_at(grid[n - 1]), seed_at(grid[n - 2])),
            },
        )
        .unwrap();
        let exact = ho_exact_eigenstate(0, 1.0, 1.0, 1.0, &grid);
        let ratio_mid = w.values[2000].re / exact.values[2000].re;
        for i in (0..=4000).step_by(250) {
            let r = w.values[i].re / exact.values[i].re;
            assert_relative_eq!(r, ratio_mid, max_relative = 1e-8);
        }
    }

    #[test]
    fn numerov_rejects_nonuniform_grid() {
        let s = ProblemSetup {
            model: PotentialModel::Harmonic {
                mass: 1.0,
                omega: 1.0,
            },
            energy: 0.5,
            hbar: 1.0,
        };
        let grid = vec![0.0, 0.1, 0.25, 0.3];
        match numerov_solve(
            &s,
            &grid,
            NumerovSeed {
                end: GridEnd::Lower,
                values: (0.0, 0.1),
            },
        ) {
            Err(ReferenceError::NonUniformGrid { .. }) => {}
            other => panic!("expected NonUniformGrid, got {other:?}"),
        }
    }

    #[test]
    fn normalization_policies() {
        let grid = uniform(-6.0, 6.0, 2401);
        let exact = ho_exact_eigenstate(0, 1.0, 1.0, 1.0, &grid);
        let mut doubled = exact.clone();
        for v in &mut doubled.values {
            *v *= 2.0;
        }
        // unit-L2 is idempotent.
        let once = normalize(
            &doubled,
            &NormalizationPolicy::UnitL2 {
                window: (-6.0, 6.0),
            },
        )
        .unwrap();
        let twice = normalize(
            &once,
            &NormalizationPolicy::UnitL2 {
                window: (-6.0, 6.0),
            },
        )
        .unwrap();
        assert_abs_diff_eq!(
            twice.normalization.as_ref().unwrap().factor,
            1.0,
            epsilon = 1e-10
        );
        // amplitude-match against itself → 1; 2ψ against ψ → 1/2.
        let self_match = normalize(
            &exact,
            &NormalizationPolicy::AmplitudeMatch {
                window: (-2.0, 2.0),
                reference: &exact,
            },
        )
        .unwrap();
        assert_abs_diff_eq!(
            self_match.normalization.as_ref().unwrap().factor,
            1.0,
            epsilon = 1e-12
        );
        let halved = normalize(
            &doubled,
            &NormalizationPolicy::AmplitudeMatch {
                window: (-2.0, 2.0),
                reference: &exact,
            },
        )
        .unwrap();
        assert_abs_diff_eq!(
            halved.normalization.as_ref().unwrap().factor,
            0.5,
            epsilon = 1e-12
        );
        // Degenerate input errors out.
        let zero = WaveTable::new(
            vec![0.0, 1.0, 2.0],
            vec![Complex::new(0.0, 0.0); 3],
            Method::Exact,
        );
        match normalize(
            &zero,
            &NormalizationPolicy::UnitL2 { window: (0.0, 2.0) },
        ) {
            Err(ReferenceError::DegenerateNorm { .. }) => {}
            other => panic!("expected DegenerateNorm, got {other:?}"),
        }
    }

    #[test]
    fn compare_metrics_and_interpolation() {
        let fine_grid = uniform(-4.0, 4.0, 2001);
        let coarse_grid = uniform(-4.0, 4.0, 501);
        let a = ho_exact_eigenstate(0, 1.0, 1.0, 1.0, &fine_grid);
        let b = ho_exact_eigenstate(0, 1.0, 1.0, 1.0, &coarse_grid);
        let same = compare(&a, &a, (-3.0, 3.0)).unwrap();
        assert_eq!(same.l2, 0.0);
        assert_eq!(same.sup, 0.0);
        // Cross-grid comparison only sees cubic-interpolation error.
        let cross = compare(&a, &b, (-3.0, 3.0)).unwrap();
        assert!(cross.sup < 1e-5, "interpolation error {:.2e}", cross.sup);
        assert!(cross.sup_at >= -3.0 && cross.sup_at <= 3.0);
        // Symmetry of the distances.
        let swapped = compare(&b, &a, (-3.0, 3.0)).unwrap();
        assert_abs_diff_eq!(cross.sup, swapped.sup, epsilon = 1e-14);
        assert_abs_diff_eq!(cross.l2, swapped.l2, epsilon = 1e-14);
        // Disjoint window errors.
        match compare(&a, &b, (5.0, 6.0)) {
            Err(ReferenceError::DisjointWindow { .. }) => {}
            other => panic!("expected DisjointWindow, got {other:?}"),
        }
    }

    #[test]
    fn numerov_order_is_fourth() {
        // Halving h shrinks the ground-state deviation ~16x (order ≥ 3.7).
        let s = ProblemSetup {
            model: PotentialModel::Harmonic {
                mass: 1.0,
                omega: 1.0,
            },
            energy: 0.5,
            hbar: 1.0,
        };
        let dev_for = |n: usize| {
            let grid = uniform(-2.0, 6.0, n);
            let seed_at = |x: f64| {
                let k = 0.5 * (x * (x * x - 1.0).sqrt() - x.acosh());
                (-k).exp() / (x * x - 1.0).sqrt().sqrt()
            };
            let w = numerov_solve(
                &s,
                &grid,
                NumerovSeed {
                    end: GridEnd::Upper,
                    values: (seed_at(grid[n - 1]), seed_at(grid[n - 2])),
                },
            )
            .unwrap();
            let exact = ho_exact_eigenstate(0, 1.0, 1.0, 1.0, &grid);
            // Match scales at x = 0, then take the max deviation on [-1, 1].
            let mid = grid.iter().position(|&x| x >= 0.0).unwrap();
            let ratio = w.values[mid].re / exact.values[mid].re;
            grid.iter()
                .enumerate()
                .filter(|(_, &x)| (-1.0..=1.0).contains(&x))
                .map(|(i, _)| (w.values[i].re / ratio - exact.values[i].re).abs())
                .fold(0.0f64, f64::max)
        };
        let coarse = dev_for(2001);
        let fine = dev_for(4001);
        let order = (coarse / fine).log2();
        assert!(order > 3.7, "observed order {order}");
    }
}
