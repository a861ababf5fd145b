//! Adaptive quadrature, phase/action integrals, cumulative reflection
//! integrals, oscillatory tails, and complex contour paths.
//!
//! The workhorse is a 15-point Gauss–Kronrod rule driven by a
//! worst-interval-first adaptive splitter. On top of it sit the
//! domain-specific operations:
//!
//! * [`phase_integral`] — `(1/ħ) ∫ p` across a classically allowed span,
//!   with the square-root behaviour at turning-point endpoints removed by
//!   the substitution `ξ = x₀ ± u²` before the rule ever sees it.
//! * [`forbidden_decay_integral`] — the same treatment for `(1/ħ) ∫ |p|`
//!   in a forbidden region.
//! * [`cumulative_reflection_integral`] — `∫ h(ξ) e^{±2iS(ξ)} dξ` from a
//!   reference point to every grid point, phases accumulated panel by panel
//!   so each grid value shares one consistent phase origin.
//! * [`reflection_tail_integral`] — `∫_r^∞ h e^{-2iS}` for scattering
//!   problems, marched in half-period segments with a rigorous
//!   integration-by-parts bound on the discarded tail.
//! * [`ContourPath`] / [`contour_integrate`] — closed complex contours
//!   (ellipse, rectangle, stadium) integrated segment-wise, with the error
//!   estimated by doubling the panel count.

use crate::potential::ProblemSetup;
use crate::Complex;
use thiserror::Error;

/// Errors from the quadrature layer.
#[derive(Debug, Error)]
pub enum QuadratureError {
    /// The adaptive splitter ran out of budget before reaching tolerance.
    /// The best estimate and its achieved error bound are carried along so
    /// callers can still report them.
    #[error("requested tolerance {requested:e} not reached (achieved {achieved:e} after {evaluations} evaluations)")]
    Tolerance {
        /// Tolerance that was asked for.
        requested: f64,
        /// Error bound actually achieved.
        achieved: f64,
        /// Number of integrand evaluations spent.
        evaluations: usize,
        /// Best estimate of the integral at abort time.
        value: Complex,
    },
    /// The integrand returned a non-finite value.
    #[error("integrand evaluated to a non-finite value near x = {x}")]
    NonFinite {
        /// Abscissa of the offending evaluation.
        x: f64,
    },
    /// A classically allowed integration span strayed into a forbidden
    /// region (`p² < 0`), or vice versa.
    #[error("integration span crosses a region boundary near x = {x} (p² changes sign there)")]
    RegionCrossing {
        /// Sample point where the sign of `p²` is wrong for the operation.
        x: f64,
    },
    /// A grid point sits too close to (or beyond) a turning point for the
    /// reflection kernel `p'/2p` to be evaluated.
    #[error("grid point x = {x} is at or beyond a turning point (p² = {q:e})")]
    TurningPointProximity {
        /// Offending grid point.
        x: f64,
        /// Value of `p²` there.
        q: f64,
    },
    /// A grid passed to a cumulative operation is empty or not strictly
    /// increasing.
    #[error("invalid grid: {reason}")]
    InvalidGrid {
        /// What is wrong with the grid.
        reason: String,
    },
    /// A contour path is not closed.
    #[error("contour path is not closed (endpoint gap {gap:e})")]
    OpenPath {
        /// Distance between the path's end and start.
        gap: f64,
    },
    /// The oscillatory tail march gave up before its remainder bound fell
    /// below tolerance.
    #[error("oscillatory tail not resolved: bound {bound:e} after {segments} half-period segments")]
    TailNotResolved {
        /// Remainder bound at abort time.
        bound: f64,
        /// Number of half-period segments marched.
        segments: usize,
    },
}

/// Value of an integral together with an error bound and the work spent.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureEstimate {
    /// Estimated value.
    pub value: Complex,
    /// Estimated absolute error bound.
    pub error_bound: f64,
    /// Number of integrand evaluations used.
    pub evaluations: usize,
}

impl QuadratureEstimate {
    fn zero() -> Self {
        QuadratureEstimate {
            value: Complex::new(0.0, 0.0),
            error_bound: 0.0,
            evaluations: 0,
        }
    }

    fn merge(&mut self, other: &QuadratureEstimate) {
        self.value += other.value;
        self.error_bound += other.error_bound;
        self.evaluations += other.evaluations;
    }
}

/// Default evaluation budget for a single adaptive integral.
pub const DEFAULT_BUDGET: usize = 1_000_000;

// 15-point Kronrod abscissae (positive half), embedded 7-point Gauss weights,
// and the Kronrod weights. Standard values, quoted to full f64 precision.
pub(crate) const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];
pub(crate) const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// One Gauss–Kronrod 15 application on `[a, b]`. Returns the Kronrod value
/// and a QUADPACK-style error estimate.
pub(crate) fn gk15<F: FnMut(f64) -> Complex>(f: &mut F, a: f64, b: f64) -> (Complex, f64) {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    let mut fv = [Complex::new(0.0, 0.0); 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[7 + j] = f2;
        let sum = f1 + f2;
        kronrod += sum * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            // XGK[1], XGK[3], XGK[5] are the Gauss-7 abscissae.
            gauss += sum * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).norm() + (fv[7 + j] - mean).norm());
    }
    resasc *= half.abs();
    resabs *= half.abs();
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    let mut err = (kronrod - gauss).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let eps = f64::EPSILON;
    if resabs > f64::MIN_POSITIVE / (50.0 * eps) {
        err = err.max(50.0 * eps * resabs);
    }
    (kronrod, err)
}

struct Interval {
    a: f64,
    b: f64,
    value: Complex,
    err: f64,
}

/// Adaptively integrates a complex-valued `f` over `[a, b]` (a may exceed b;
/// the sign convention is the usual oriented one) to absolute tolerance
/// `tol`, spending at most `budget` integrand evaluations.
pub fn integrate_complex<F: FnMut(f64) -> Complex>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    budget: usize,
) -> Result<QuadratureEstimate, QuadratureError> {
    if a == b {
        return Ok(QuadratureEstimate::zero());
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let evals = std::cell::Cell::new(0usize);
    let mut eval = |x: f64| -> Complex {
        evals.set(evals.get() + 1);
        f(x)
    };
    let (v0, e0) = gk15(&mut eval, lo, hi);
    if !v0.is_finite() {
        return Err(QuadratureError::NonFinite { x: 0.5 * (lo + hi) });
    }
    let mut intervals = vec![Interval {
        a: lo,
        b: hi,
        value: v0,
        err: e0,
    }];
    let width_floor = this_width_floor(lo, hi);
    loop {
        let total_err: f64 = intervals.iter().map(|i| i.err).sum();
        // Roundoff floor: no rule can certify better than ~100 eps of the
        // accumulated magnitude, so don't chase tolerances below it.
        let floor = 100.0 * f64::EPSILON * intervals.iter().map(|i| i.value.norm()).sum::<f64>();
        if total_err <= tol.max(floor) {
            break;
        }
        // Split the interval with the largest error estimate, skipping
        // intervals already at the roundoff width floor.
        let worst = intervals
            .iter()
            .enumerate()
            .filter(|(_, i)| i.b - i.a > width_floor)
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .map(|(idx, _)| idx);
        let Some(idx) = worst else {
            return tolerance_failure(&intervals, sign, tol, evals.get());
        };
        if evals.get() + 30 > budget || intervals.len() >= 10_000 {
            return tolerance_failure(&intervals, sign, tol, evals.get());
        }
        let Interval { a: ia, b: ib, .. } = intervals[idx];
        let mid = 0.5 * (ia + ib);
        let (vl, el) = gk15(&mut eval, ia, mid);
        let (vr, er) = gk15(&mut eval, mid, ib);
        if !vl.is_finite() || !vr.is_finite() {
            return Err(QuadratureError::NonFinite { x: mid });
        }
        intervals[idx] = Interval {
            a: ia,
            b: mid,
            value: vl,
            err: el,
        };
        intervals.push(Interval {
            a: mid,
            b: ib,
            value: vr,
            err: er,
        });
    }
    let value: Complex = intervals.iter().map(|i| i.value).sum();
    if !value.is_finite() {
        return Err(QuadratureError::NonFinite { x: 0.5 * (lo + hi) });
    }
    Ok(QuadratureEstimate {
        value: value * sign,
        error_bound: intervals.iter().map(|i| i.err).sum(),
        evaluations: evals.get(),
    })
}

fn this_width_floor(lo: f64, hi: f64) -> f64 {
    1e-14 * (hi - lo).abs().max(lo.abs().max(hi.abs()))
}

fn tolerance_failure(
    intervals: &[Interval],
    sign: f64,
    tol: f64,
    evals: usize,
) -> Result<QuadratureEstimate, QuadratureError> {
    let value: Complex = intervals.iter().map(|i| i.value).sum();
    Err(QuadratureError::Tolerance {
        requested: tol,
        achieved: intervals.iter().map(|i| i.err).sum(),
        evaluations: evals,
        value: value * sign,
    })
}

/// Adaptively integrates a real-valued integrand (thin wrapper over
/// [`integrate_complex`]).
pub fn integrate_real<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    budget: usize,
) -> Result<QuadratureEstimate, QuadratureError> {
    integrate_complex(|x| Complex::new(f(x), 0.0), a, b, tol, budget)
}

pub(crate) fn q_floor(s: &ProblemSetup) -> f64 {
    let scale = s.momentum_scale();
    1e-9 * scale * scale
}

/// Classifies whether `x` sits essentially on a turning point: `|p²(x)|`
/// below a relative floor.
fn is_turning_endpoint(s: &ProblemSetup, x: f64) -> bool {
    s.momentum_sq(x).abs() <= q_floor(s)
}

/// `(1/ħ) ∫_{x_from}^{x_to} p dξ` across a classically allowed span.
///
/// The result is signed: swapping the endpoints flips it. Endpoints that sit
/// on turning points (where `p` vanishes like a square root) are handled by
/// the substitution `ξ = x₀ ± u²`, which renders the integrand smooth; the
/// interior must stay allowed, and a sampled excursion into `p² < 0`
/// reports [`QuadratureError::RegionCrossing`].
pub fn phase_integral(
    s: &ProblemSetup,
    x_from: f64,
    x_to: f64,
    tol: f64,
) -> Result<QuadratureEstimate, QuadratureError> {
    signed_sqrt_aware(s, x_from, x_to, tol, true)
}

/// `(1/ħ) ∫ |p| dξ` across a classically forbidden span (both endpoints may
/// be turning points). Signed like [`phase_integral`].
pub fn forbidden_decay_integral(
    s: &ProblemSetup,
    x_from: f64,
    x_to: f64,
    tol: f64,
) -> Result<QuadratureEstimate, QuadratureError> {
    signed_sqrt_aware(s, x_from, x_to, tol, false)
}

fn signed_sqrt_aware(
    s: &ProblemSetup,
    x_from: f64,
    x_to: f64,
    tol: f64,
    allowed: bool,
) -> Result<QuadratureEstimate, QuadratureError> {
    if x_from == x_to {
        return Ok(QuadratureEstimate::zero());
    }
    let (lo, hi, sign) = if x_from < x_to {
        (x_from, x_to, 1.0)
    } else {
        (x_to, x_from, -1.0)
    };
    s.domain_check(lo)
        .map_err(|_| QuadratureError::InvalidGrid {
            reason: format!("endpoint {lo} outside the potential's domain"),
        })?;
    // The integrand: |p| on the correct branch for the region.
    let speed = |x: f64| {
        if allowed {
            s.momentum_allowed(x)
        } else {
            s.momentum_forbidden(x)
        }
    };
    // Interior region check on a coarse sample; endpoints may be turning
    // points, so skip the first/last samples.
    let floor = q_floor(s);
    for k in 1..64 {
        let x = lo + (hi - lo) * (k as f64) / 64.0;
        let q = s.momentum_sq(x);
        let bad = if allowed { q < -floor } else { q > floor };
        if bad {
            return Err(QuadratureError::RegionCrossing { x });
        }
    }
    let tp_lo = is_turning_endpoint(s, lo);
    let tp_hi = is_turning_endpoint(s, hi);
    let width = hi - lo;
    // Carve substituted panels off turning-point endpoints.
    let cut_lo = if tp_lo {
        lo + if tp_hi { 0.5 * width } else { 0.25 * width }
    } else {
        lo
    };
    let cut_hi = if tp_hi {
        hi - if tp_lo { 0.5 * width } else { 0.25 * width }
    } else {
        hi
    };
    let parts = 1 + usize::from(tp_lo) + usize::from(tp_hi);
    let part_tol = tol * s.hbar / parts as f64;
    let mut total = QuadratureEstimate::zero();
    if tp_lo {
        // ξ = lo + u², dξ = 2u du on u ∈ [0, sqrt(cut_lo - lo)].
        let u_max = (cut_lo - lo).sqrt();
        let est = integrate_complex(
            |u| Complex::new(2.0 * u * speed(lo + u * u), 0.0),
            0.0,
            u_max,
            part_tol,
            DEFAULT_BUDGET,
        )?;
        total.merge(&est);
    }
    if cut_hi > cut_lo {
        let est = integrate_complex(
            |x| Complex::new(speed(x), 0.0),
            cut_lo,
            cut_hi,
            part_tol,
            DEFAULT_BUDGET,
        )?;
        total.merge(&est);
    }
    if tp_hi {
        // ξ = hi - u², dξ = -2u du; orientation restored by integrating u
        // from sqrt(hi - cut_hi) down to 0 and negating, i.e. a plus sign.
        let u_max = (hi - cut_hi).sqrt();
        let est = integrate_complex(
            |u| Complex::new(2.0 * u * speed(hi - u * u), 0.0),
            0.0,
            u_max,
            part_tol,
            DEFAULT_BUDGET,
        )?;
        total.merge(&est);
    }
    Ok(QuadratureEstimate {
        value: total.value * (sign / s.hbar),
        error_bound: total.error_bound / s.hbar,
        evaluations: total.evaluations,
    })
}

/// Exponent sign of the oscillatory kernel `e^{±2iS}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentSign {
    /// Kernel `h e^{+2iS}` (sources the `e^{-iX}` branch).
    Plus,
    /// Kernel `h e^{-2iS}` (sources the `e^{+iX}` branch).
    Minus,
}

impl ExponentSign {
    fn factor(self) -> Complex {
        match self {
            ExponentSign::Plus => Complex::new(0.0, 2.0),
            ExponentSign::Minus => Complex::new(0.0, -2.0),
        }
    }
}

/// Cumulative values of `∫ h(ξ) e^{±2iS(ξ)} dξ` from a reference point to
/// every grid point, sharing one phase origin.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral {
    /// Point the integration starts from (where the cumulative value is 0).
    pub x_ref: f64,
    /// Phase origin: `S(phase_ref) = 0`. Coincides with `x_ref` for bound
    /// geometries; for scattering it is the turning point.
    pub phase_ref: f64,
    /// Grid points (strictly increasing).
    pub xs: Vec<f64>,
    /// Cumulative integral at each grid point.
    pub values: Vec<Complex>,
    /// Phase `S(x)` at each grid point, measured from `phase_ref`.
    pub phases: Vec<f64>,
    /// Total error bound accumulated over all panels.
    pub error_bound: f64,
    /// Integrand evaluations spent.
    pub evaluations: usize,
}

/// Computes `∫_{x_ref}^{x} h(ξ) e^{±2iS(ξ)} dξ` for every grid point `x`,
/// where `h = p'/2p` is the reflection kernel and `S` is the phase measured
/// from `x_ref` (so the cumulative value and the phase both vanish at
/// `x_ref`).
///
/// The grid must be strictly increasing and classically allowed throughout;
/// `x_ref` may lie inside or outside the grid span, and integration chains
/// outward from it in both directions. Grid points at or beyond a turning
/// point report [`QuadratureError::TurningPointProximity`].
pub fn cumulative_reflection_integral(
    s: &ProblemSetup,
    grid: &[f64],
    sign: ExponentSign,
    x_ref: f64,
    tol: f64,
) -> Result<CumulativeIntegral, QuadratureError> {
    cumulative_with_phase_anchor(s, grid, sign, x_ref, x_ref, 0.0, tol)
}

/// Generalised cumulative reflection integral: integration starts at
/// `x_ref`, but the phase `S` is anchored at `phase_ref` via
/// `s_at_ref = S(x_ref)` supplied by the caller (computed once with
/// [`phase_integral`], which knows how to start at a turning point).
pub fn cumulative_with_phase_anchor(
    s: &ProblemSetup,
    grid: &[f64],
    sign: ExponentSign,
    x_ref: f64,
    phase_ref: f64,
    s_at_ref: f64,
    tol: f64,
) -> Result<CumulativeIntegral, QuadratureError> {
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
    let floor = q_floor(s);
    for &x in grid.iter().chain(std::iter::once(&x_ref)) {
        let q = s.momentum_sq(x);
        if q <= floor {
            return Err(QuadratureError::TurningPointProximity { x, q });
        }
    }
    let lo_all = grid[0].min(x_ref);
    let hi_all = grid[grid.len() - 1].max(x_ref);
    // Node chain: grid plus the reference, densified so no panel exceeds
    // 1/256 of the overall span (keeps the panel-local phase rule accurate).
    let gap_max = ((hi_all - lo_all) / 256.0).max(1e-12);
    let mut nodes: Vec<f64> = Vec::with_capacity(grid.len() + 300);
    nodes.extend_from_slice(grid);
    if !grid.iter().any(|&g| (g - x_ref).abs() <= 1e-14) {
        nodes.push(x_ref);
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    let mut dense: Vec<f64> = Vec::with_capacity(nodes.len() * 2);
    for w in nodes.windows(2) {
        dense.push(w[0]);
        let gap = w[1] - w[0];
        if gap > gap_max {
            let pieces = (gap / gap_max).ceil() as usize;
            for j in 1..pieces {
                dense.push(w[0] + gap * (j as f64) / (pieces as f64));
            }
        }
    }
    dense.push(nodes[nodes.len() - 1]);
    // Index of the anchor in the dense chain.
    let anchor_idx = dense
        .iter()
        .position(|&x| (x - x_ref).abs() <= 1e-13 * (1.0 + x_ref.abs()))
        .expect("anchor node present in chain");
    let n_panels = dense.len() - 1;
    let panel_tol = tol / (n_panels.max(1) as f64);
    let mut values = vec![Complex::new(0.0, 0.0); dense.len()];
    let mut phases = vec![0.0f64; dense.len()];
    phases[anchor_idx] = s_at_ref;
    let mut error_bound = 0.0;
    let mut evaluations = 0usize;
    // March upward then downward from the anchor.
    for i in anchor_idx..n_panels {
        let (dv, ds, err, ev) =
            directed_panel(s, dense[i], dense[i + 1], phases[i], sign, panel_tol)?;
        values[i + 1] = values[i] + dv;
        phases[i + 1] = phases[i] + ds;
        error_bound += err;
        evaluations += ev;
    }
    for i in (0..anchor_idx).rev() {
        let (dv, ds, err, ev) =
            directed_panel(s, dense[i + 1], dense[i], phases[i + 1], sign, panel_tol)?;
        values[i] = values[i + 1] + dv;
        phases[i] = phases[i + 1] + ds;
        error_bound += err;
        evaluations += ev;
    }
    // Extract the requested grid subset.
    let mut out_vals = Vec::with_capacity(grid.len());
    let mut out_phases = Vec::with_capacity(grid.len());
    let mut cursor = 0usize;
    for &g in grid {
        while cursor < dense.len() && dense[cursor] < g - 1e-13 * (1.0 + g.abs()) {
            cursor += 1;
        }
        debug_assert!((dense[cursor] - g).abs() <= 1e-12 * (1.0 + g.abs()));
        out_vals.push(values[cursor]);
        out_phases.push(phases[cursor]);
    }
    Ok(CumulativeIntegral {
        x_ref,
        phase_ref,
        xs: grid.to_vec(),
        values: out_vals,
        phases: out_phases,
        error_bound,
        evaluations,
    })
}

/// Integrates one directed panel `a → b` of the reflection kernel, given the
/// phase at `a`. Returns `(Δvalue, Δphase, error, evaluations)`.
///
/// Within the panel the phase increment is evaluated by a single fixed
/// Gauss–Kronrod application — panels are kept short enough (densified
/// chain, allowed region only) that this nested rule is effectively exact.
fn directed_panel(
    s: &ProblemSetup,
    a: f64,
    b: f64,
    s_at_a: f64,
    sign: ExponentSign,
    tol: f64,
) -> Result<(Complex, f64, f64, usize), QuadratureError> {
    let rot = sign.factor();
    let hbar = s.hbar;
    let mut extra = 0usize;
    let phase_inc = |from: f64, to: f64, count: &mut usize| -> f64 {
        if from == to {
            return 0.0;
        }
        let (lo, hi, sg) = if from < to {
            (from, to, 1.0)
        } else {
            (to, from, -1.0)
        };
        let (v, _) = gk15(
            &mut |x| {
                *count += 1;
                Complex::new(s.momentum_allowed(x), 0.0)
            },
            lo,
            hi,
        );
        sg * v.re / hbar
    };
    let ds = phase_inc(a, b, &mut extra);
    let est = integrate_complex(
        |x| {
            let mut c = 0usize;
            let sx = s_at_a + phase_inc(a, x, &mut c);
            extra += c;
            Complex::new(s.reflection_kernel(x), 0.0) * (rot * sx).exp()
        },
        a,
        b,
        tol,
        DEFAULT_BUDGET,
    )?;
    Ok((est.value, ds, est.error_bound, est.evaluations + extra))
}

/// `∫_{r_start}^{∞} h(ξ) e^{-2iS(ξ)} dξ` for a scattering problem, with the
/// phase `S` anchored so `S(phase_ref) = s_at_start` at `r_start`.
///
/// The integral is marched outward in half-period segments (each advancing
/// `2S` by about `π`); the march stops once the integration-by-parts
/// remainder bound `ħ·h(r)/p(r)` falls below `tol/2`. That bound is valid
/// when `h/p` is monotonically decreasing, which is checked as the march
/// proceeds. The returned error bound includes the discarded tail.
pub fn reflection_tail_integral(
    s: &ProblemSetup,
    r_start: f64,
    s_at_start: f64,
    tol: f64,
) -> Result<QuadratureEstimate, QuadratureError> {
    let floor = q_floor(s);
    let q0 = s.momentum_sq(r_start);
    if q0 <= floor {
        return Err(QuadratureError::TurningPointProximity { x: r_start, q: q0 });
    }
    let mut total = QuadratureEstimate::zero();
    let mut r = r_start;
    let mut s_here = s_at_start;
    let mut bound_prev = f64::INFINITY;
    let tail_bound =
        |r: f64| -> f64 { s.hbar * s.reflection_kernel(r).abs() / s.momentum_allowed(r) };
    let seg_tol = (tol * 1e-3).max(1e-15);
    for segment in 0..20_000 {
        let bound = tail_bound(r);
        // The remainder bound is only valid while h/p keeps decreasing.
        let monotone = bound <= bound_prev * (1.0 + 1e-9);
        if monotone && bound <= 0.5 * tol && segment >= 2 {
            total.error_bound += bound;
            return Ok(total);
        }
        bound_prev = bound;
        // Half-period step: advance 2S by ~π, with one Newton refinement of
        // the step length.
        let p_here = s.momentum_allowed(r);
        let mut r_next = r + 0.5 * std::f64::consts::PI * s.hbar / p_here;
        let mut inner = 0usize;
        let phase_to = |x: f64, count: &mut usize| -> f64 {
            let (v, _) = gk15(
                &mut |t| {
                    *count += 1;
                    Complex::new(s.momentum_allowed(t), 0.0)
                },
                r,
                x,
            );
            v.re / s.hbar
        };
        let overshoot = phase_to(r_next, &mut inner) - 0.5 * std::f64::consts::PI;
        r_next -= overshoot * s.hbar / s.momentum_allowed(r_next);
        // Segment integral with the phase anchored at the segment start by a
        // fixed rule (the momentum is smooth and slowly varying out here).
        let est = integrate_complex(
            |x| {
                let mut c = 0usize;
                let sx = s_here + phase_to(x, &mut c);
                inner += c;
                Complex::new(s.reflection_kernel(x), 0.0) * Complex::new(0.0, -2.0 * sx).exp()
            },
            r,
            r_next,
            seg_tol,
            DEFAULT_BUDGET,
        )?;
        let ds = phase_to(r_next, &mut inner);
        total.value += est.value;
        total.error_bound += est.error_bound;
        total.evaluations += est.evaluations + inner;
        s_here += ds;
        r = r_next;
    }
    Err(QuadratureError::TailNotResolved {
        bound: tail_bound(r),
        segments: 20_000,
    })
}

/// One piece of a complex contour: a straight line or an axis-aligned
/// elliptical arc, parametrised on `t ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub enum Segment {
    /// Straight line from `from` to `to`.
    Line {
        /// Start point.
        from: Complex,
        /// End point.
        to: Complex,
    },
    /// Elliptical arc `center + a·cos θ + i·b·sin θ`, with `θ` sweeping
    /// linearly from `theta_start` to `theta_end`.
    Arc {
        /// Ellipse center.
        center: Complex,
        /// Semi-axis along the real direction.
        a: f64,
        /// Semi-axis along the imaginary direction.
        b: f64,
        /// Initial angle (radians).
        theta_start: f64,
        /// Final angle (radians).
        theta_end: f64,
    },
}

impl Segment {
    /// Point at parameter `t ∈ [0, 1]`.
    pub fn point(&self, t: f64) -> Complex {
        match self {
            Segment::Line { from, to } => from + (to - from) * t,
            Segment::Arc {
                center,
                a,
                b,
                theta_start,
                theta_end,
            } => {
                let th = theta_start + (theta_end - theta_start) * t;
                center + Complex::new(a * th.cos(), b * th.sin())
            }
        }
    }

    /// Derivative `dz/dt` at parameter `t`.
    pub fn velocity(&self, t: f64) -> Complex {
        match self {
            Segment::Line { from, to } => to - from,
            Segment::Arc {
                center: _,
                a,
                b,
                theta_start,
                theta_end,
            } => {
                let dth = theta_end - theta_start;
                let th = theta_start + dth * t;
                Complex::new(-a * th.sin(), b * th.cos()) * dth
            }
        }
    }
}

/// A piecewise contour in the complex plane.
#[derive(Debug, Clone)]
pub struct ContourPath {
    /// Ordered segments; each segment's end must coincide with the next
    /// segment's start for the path to be closed.
    pub segments: Vec<Segment>,
}

impl ContourPath {
    /// Closed ellipse centered at `center` with semi-axes `a` (real) and `b`
    /// (imaginary), traversed counter-clockwise, split into four arcs.
    pub fn ellipse(center: Complex, a: f64, b: f64) -> Self {
        use std::f64::consts::PI;
        let arc = |t0: f64, t1: f64| Segment::Arc {
            center,
            a,
            b,
            theta_start: t0,
            theta_end: t1,
        };
        ContourPath {
            segments: vec![
                arc(0.0, 0.5 * PI),
                arc(0.5 * PI, PI),
                arc(PI, 1.5 * PI),
                arc(1.5 * PI, 2.0 * PI),
            ],
        }
    }

    /// Closed axis-aligned rectangle centered at `center` with half-width
    /// `half_w` and half-height `half_h`, counter-clockwise.
    pub fn rectangle(center: Complex, half_w: f64, half_h: f64) -> Self {
        let c = center;
        let corners = [
            c + Complex::new(half_w, -half_h),
            c + Complex::new(half_w, half_h),
            c + Complex::new(-half_w, half_h),
            c + Complex::new(-half_w, -half_h),
        ];
        let line = |i: usize, j: usize| Segment::Line {
            from: corners[i],
            to: corners[j],
        };
        ContourPath {
            segments: vec![line(0, 1), line(1, 2), line(2, 3), line(3, 0)],
        }
    }

    /// Closed stadium: a rectangle of half-length `half_len` capped by
    /// semicircles of radius `radius` on the left and right, centered at
    /// `center`, counter-clockwise.
    pub fn stadium(center: Complex, half_len: f64, radius: f64) -> Self {
        use std::f64::consts::PI;
        let right = center + Complex::new(half_len, 0.0);
        let left = center - Complex::new(half_len, 0.0);
        ContourPath {
            segments: vec![
                Segment::Line {
                    from: left - Complex::new(0.0, radius),
                    to: right - Complex::new(0.0, radius),
                },
                Segment::Arc {
                    center: right,
                    a: radius,
                    b: radius,
                    theta_start: -0.5 * PI,
                    theta_end: 0.5 * PI,
                },
                Segment::Line {
                    from: right + Complex::new(0.0, radius),
                    to: left + Complex::new(0.0, radius),
                },
                Segment::Arc {
                    center: left,
                    a: radius,
                    b: radius,
                    theta_start: 0.5 * PI,
                    theta_end: 1.5 * PI,
                },
            ],
        }
    }

    /// Verifies the path is closed: every segment's end meets the next
    /// segment's start (cyclically) within a relative gap of `1e-12`.
    pub fn check_closed(&self) -> Result<(), QuadratureError> {
        if self.segments.is_empty() {
            return Err(QuadratureError::OpenPath { gap: f64::INFINITY });
        }
        let scale: f64 = self
            .segments
            .iter()
            .map(|s| s.point(0.0).norm().max(s.point(1.0).norm()))
            .fold(1.0, f64::max);
        for i in 0..self.segments.len() {
            let end = self.segments[i].point(1.0);
            let next = self.segments[(i + 1) % self.segments.len()].point(0.0);
            let gap = (end - next).norm();
            if gap > 1e-12 * scale {
                return Err(QuadratureError::OpenPath { gap });
            }
        }
        Ok(())
    }

    /// Ordered boundary samples: `per_segment` panels per segment, returned
    /// as the panel boundary points, with the closing point (equal to the
    /// first) appended.
    pub fn sample(&self, per_segment: usize) -> Vec<Complex> {
        let mut pts = Vec::with_capacity(self.segments.len() * per_segment + 1);
        for seg in &self.segments {
            for j in 0..per_segment {
                pts.push(seg.point(j as f64 / per_segment as f64));
            }
        }
        pts.push(self.segments[0].point(0.0));
        pts
    }
}

/// Integrates `f(z) dz` along a closed contour with `panels` composite
/// Gauss–Kronrod panels per segment; the error bound is taken as the
/// difference against a run with `2·panels` panels (plus the rule's own
/// estimates as a floor), and the `2·panels` value is returned.
pub fn contour_integrate<F: FnMut(Complex) -> Complex>(
    mut f: F,
    path: &ContourPath,
    panels: usize,
) -> Result<QuadratureEstimate, QuadratureError> {
    path.check_closed()?;
    let pass = |n: usize, f: &mut F| -> Result<(Complex, usize), QuadratureError> {
        let mut sum = Complex::new(0.0, 0.0);
        let mut evals = 0usize;
        for seg in &path.segments {
            for j in 0..n {
                let t0 = j as f64 / n as f64;
                let t1 = (j + 1) as f64 / n as f64;
                let (v, _) = gk15(
                    &mut |t| {
                        evals += 1;
                        f(seg.point(t)) * seg.velocity(t)
                    },
                    t0,
                    t1,
                );
                if !v.is_finite() {
                    return Err(QuadratureError::NonFinite { x: t0 });
                }
                sum += v;
            }
        }
        Ok((sum, evals))
    };
    let (coarse, e1) = pass(panels, &mut f)?;
    let (fine, e2) = pass(2 * panels, &mut f)?;
    Ok(QuadratureEstimate {
        value: fine,
        error_bound: (fine - coarse).norm(),
        evaluations: e1 + e2,
    })
}
