//! Contour-based quantization diagnostics for a single classical well.
//!
//! For a bound problem with exactly two simple turning points the
//! Bohr–Sommerfeld rule `∮p dx = 2πħ(n + 1/2)` fixes the semiclassical
//! eigenenergies. Each ingredient of that rule is exposed here as an
//! explicit computation so the pieces can be validated independently:
//!
//! * [`action_integral`] — the real one-period action `∮p dx`, evaluated as
//!   twice the turning-point-to-turning-point momentum integral;
//! * [`eigenenergy`] — the root in `E` of `action(E) − 2πħ(n + 1/2)`;
//! * [`winding_contribution`] — the amplitude-phase loop integral
//!   `(ħ/i)·∮ p'/p dz`, which the argument principle pins at `2πħ` for any
//!   counter-clockwise contour enclosing both turning points (this is the
//!   origin of the `1/2` in the quantization condition);
//! * [`reflection_correction_contour`] — the loop integral of the nested
//!   reflection chain. In its exponential-approximated form the integrand
//!   is a total derivative, so the loop value vanishes up to quadrature
//!   error; the unapproximated logarithmic-derivative (ratio) form is
//!   reported alongside it so the size of that approximation stays visible.
//! * [`quantization_report`] — all of the above assembled into one record,
//!   with the combined residual that should vanish at an eigenenergy.
//!
//! The winding and reflection integrands live on the square-root branch of
//! `p(z) = √(2m(E − V(z)))`. The contour marches track that branch by
//! continuity from the well center and fail with
//! [`QuantizationError::Branch`] when a path cannot be traversed
//! single-valuedly — for example when it encloses exactly one turning
//! point, so that `p` returns to its start negated.

use crate::bremmer::{GL5_W, GL5_X};
use crate::potential::{find_turning_points, PotentialError, ProblemSetup};
use crate::quadrature::{
    contour_integrate, phase_integral, q_floor, ContourPath, QuadratureError, Segment, WGK, XGK,
};
use crate::reference::interp_cubic;
use crate::Complex;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use thiserror::Error;

/// Failure modes of the quantization diagnostics.
#[derive(Debug, Error)]
pub enum QuantizationError {
    /// The potential does not present a single well at this energy: the
    /// scan found `found` classical turning points instead of two.
    #[error("expected one classical well with two turning points, found {found} crossing(s)")]
    Topology {
        /// Number of sign changes of `E − V` located by the scan.
        found: usize,
    },
    /// The quantization function has the same sign at both bracket ends.
    #[error("no quantization root bracketed on [{lo}, {hi}]")]
    Bracket {
        /// Lower bracket end.
        lo: f64,
        /// Upper bracket end.
        hi: f64,
    },
    /// Branch tracking of `√(2m(E−V))` failed: the momentum did not return
    /// to its starting value after one loop (odd number of enclosed turning
    /// points) or jumped discontinuously between samples.
    #[error("momentum branch tracking failed near z = {at}")]
    Branch {
        /// Contour point at which the branch became inconsistent.
        at: Complex,
    },
    /// The supplied contour cannot be used for this computation.
    #[error("invalid contour: {reason}")]
    InvalidPath {
        /// Human-readable diagnosis.
        reason: String,
    },
    /// A quadrature building block failed.
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    /// Turning-point refinement failed.
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// Default number of quadrature panels per contour segment. Error
/// estimates come from a second pass at twice this resolution.
pub const CONTOUR_PANELS: usize = 2048;

/// Result of [`reflection_correction_contour`]: the loop integral of the
/// order-`order` reflection chain in both of its forms.
#[derive(Debug, Clone)]
pub struct ReflectionCheck {
    /// Number of nested reflection layers in the chain.
    pub order: u32,
    /// Exponential-approximated (total-derivative) loop integral; the
    /// quantization argument predicts zero.
    pub value: Complex,
    /// Quadrature error bound for `value`: the difference between the
    /// half- and full-resolution passes plus a roundoff floor.
    pub error_bound: f64,
    /// Unapproximated logarithmic-derivative form of the same loop
    /// integral, `(ħ/i)·∮ e^{iπ/4}K_n' / (1 + e^{iπ/4}K_n) dz`, reported so
    /// the gap introduced by the exponential rewrite stays visible.
    pub ratio_form: Complex,
    /// The two turning points that the contour is expected to enclose.
    pub turning_points: (f64, f64),
}

/// Everything the quantization condition is made of, evaluated at the
/// semiclassical eigenenergy of index `n`.
#[derive(Debug, Clone)]
pub struct QuantizationReport {
    /// Quantum number `n` (number of interior nodes).
    pub index: u32,
    /// Semiclassical eigenenergy: root of `action(E) = 2πħ(n + 1/2)`.
    pub energy: f64,
    /// One-period action `∮p dx` at `energy`.
    pub action: f64,
    /// Quadrature error bound for `action`.
    pub action_bound: f64,
    /// Amplitude-phase winding `(ħ/i)·∮ p'/p dz`; `2πħ` for a contour
    /// enclosing both turning points counter-clockwise.
    pub winding: Complex,
    /// Quadrature error bound for `winding`.
    pub winding_bound: f64,
    /// Reflection-chain loop integral (exponential-approximated form).
    pub reflection: Complex,
    /// Quadrature error bound for `reflection`.
    pub reflection_bound: f64,
    /// Number of reflection layers used for `reflection`.
    pub reflection_order: u32,
    /// `action − winding/2 + reflection − 2πnħ`; zero at an eigenenergy.
    pub residual: Complex,
}

fn setup_at(s: &ProblemSetup, energy: f64) -> ProblemSetup {
    ProblemSetup {
        model: s.model.clone(),
        energy,
        hbar: s.hbar,
    }
}

/// Locates the two classical turning points of a bound well at the setup's
/// energy by scanning an expanding window for sign changes of `E − V` and
/// refining each bracket. Fails with [`QuantizationError::Topology`] when
/// the crossing count is not exactly two (no well, or more than one well).
pub fn bound_turning_points(s: &ProblemSetup) -> Result<(f64, f64), QuantizationError> {
    const SAMPLES: usize = 4096;
    let mut half = 1.0_f64;
    let mut last_found = 0usize;
    for _ in 0..48 {
        let mut crossings: Vec<(f64, f64)> = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        let mut first_q = f64::NAN;
        let mut last_q = f64::NAN;
        for k in 0..=SAMPLES {
            let x = -half + 2.0 * half * (k as f64) / (SAMPLES as f64);
            if s.domain_check(x).is_err() {
                continue;
            }
            let q = s.momentum_sq(x);
            if first_q.is_nan() {
                first_q = q;
            }
            last_q = q;
            if let Some((xp, qp)) = prev {
                if (qp > 0.0) != (q > 0.0) {
                    crossings.push((xp, x));
                }
            }
            prev = Some((x, q));
        }
        last_found = crossings.len();
        if crossings.len() > 2 {
            return Err(QuantizationError::Topology {
                found: crossings.len(),
            });
        }
        if crossings.len() == 2 && first_q < 0.0 && last_q < 0.0 {
            let tps = find_turning_points(s, &crossings)?;
            return Ok((tps[0], tps[1]));
        }
        half *= 2.0;
    }
    Err(QuantizationError::Topology { found: last_found })
}

/// One-period action `∮p dx = 2∫_{x_L}^{x_R} p dx` at the given energy,
/// together with a quadrature error bound.
pub fn action_with_bound(
    s: &ProblemSetup,
    energy: f64,
) -> Result<(f64, f64), QuantizationError> {
    let se = setup_at(s, energy);
    let (xl, xr) = bound_turning_points(&se)?;
    let est = phase_integral(&se, xl, xr, 1e-12)?;
    Ok((
        2.0 * se.hbar * est.value.re,
        2.0 * se.hbar * est.error_bound,
    ))
}

/// One-period action `∮p dx` at the given energy (the setup's own energy
/// field is ignored in favour of `energy`).
pub fn action_integral(s: &ProblemSetup, energy: f64) -> Result<f64, QuantizationError> {
    action_with_bound(s, energy).map(|(a, _)| a)
}

/// Solves `action(E) = 2πħ(n + 1/2)` for `E` inside `bracket` by hybrid
/// bisection/secant iteration, to a relative tolerance of `1e-12` in `E`.
pub fn eigenenergy(
    s: &ProblemSetup,
    n: u32,
    bracket: (f64, f64),
) -> Result<f64, QuantizationError> {
    let target = TAU * s.hbar * (n as f64 + 0.5);
    let g = |e: f64| -> Result<f64, QuantizationError> { Ok(action_integral(s, e)? - target) };
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let mut flo = g(lo)?;
    let mut fhi = g(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(QuantizationError::Bracket { lo, hi });
    }
    let tol = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    for iter in 0..200 {
        if hi - lo <= tol {
            break;
        }
        // Secant proposal clamped to the bracket interior, with a bisection
        // forced every fourth step so a one-sided secant cannot stall.
        let mut x = lo - flo * (hi - lo) / (fhi - flo);
        if iter % 4 == 3 || !x.is_finite() || x <= lo + 0.25 * tol || x >= hi - 0.25 * tol {
            x = 0.5 * (lo + hi);
        }
        let fx = g(x)?;
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
    Ok(0.5 * (lo + hi))
}

fn branch_closure_check(s: &ProblemSetup, path: &ContourPath) -> Result<(), QuantizationError> {
    let pts = path.sample(512);
    let scale = s.momentum_scale();
    let mut p_prev = s.momentum_sq_complex(pts[0]).sqrt();
    let p_first = p_prev;
    for &z in &pts[1..] {
        let mut p = s.momentum_sq_complex(z).sqrt();
        if (p + p_prev).norm() < (p - p_prev).norm() {
            p = -p;
        }
        if (p - p_prev).norm() > 0.5 * (p.norm() + p_prev.norm()) + 1e-3 * scale {
            return Err(QuantizationError::Branch { at: z });
        }
        p_prev = p;
    }
    if (p_prev - p_first).norm() > 1e-6 * scale {
        return Err(QuantizationError::Branch { at: pts[0] });
    }
    Ok(())
}

/// Amplitude-phase winding `(ħ/i)·∮ p'/p dz` with its quadrature bound.
///
/// `p'/p = q'/(2q)` is meromorphic with a simple pole of residue `1/2` at
/// each simple turning point, so a counter-clockwise contour enclosing both
/// yields exactly `2πħ`; a contour enclosing neither yields `0`. The branch
/// of `p` itself is marched along the contour first and must close up,
/// otherwise [`QuantizationError::Branch`] is returned.
pub fn winding_with_bound(
    s: &ProblemSetup,
    path: &ContourPath,
) -> Result<(Complex, f64), QuantizationError> {
    path.check_closed()?;
    branch_closure_check(s, path)?;
    let est = contour_integrate(
        |z| s.d_momentum_sq_complex(z) / (s.momentum_sq_complex(z) * 2.0),
        path,
        CONTOUR_PANELS,
    )?;
    let hbar_over_i = Complex::new(0.0, -s.hbar);
    Ok((est.value * hbar_over_i, est.error_bound * s.hbar))
}

/// Amplitude-phase winding `(ħ/i)·∮ p'/p dz`; see [`winding_with_bound`].
pub fn winding_contribution(
    s: &ProblemSetup,
    path: &ContourPath,
) -> Result<Complex, QuantizationError> {
    winding_with_bound(s, path).map(|(v, _)| v)
}

// ---------------------------------------------------------------------------
// Contour march of the nested reflection chain.
// ---------------------------------------------------------------------------

const KPTS: usize = 15;

// Ascending Gauss–Kronrod abscissa offsets on [−1, 1] with their weights.
fn kronrod_offsets() -> ([f64; KPTS], [f64; KPTS]) {
    let mut x = [0.0; KPTS];
    let mut w = [0.0; KPTS];
    for i in 0..7 {
        x[i] = -XGK[i];
        w[i] = WGK[i];
        x[14 - i] = XGK[i];
        w[14 - i] = WGK[i];
    }
    x[7] = 0.0;
    w[7] = WGK[7];
    (x, w)
}

struct PanelData {
    t: [f64; KPTS],
    w: [f64; KPTS],
    vel: [Complex; KPTS],
    s: [Complex; KPTS],
    h: [Complex; KPTS],
}

struct SegmentMarch {
    trivial: bool,
    t_nodes: Vec<f64>,
    panels: Vec<PanelData>,
}

struct Chain {
    segs: Vec<SegmentMarch>,
    /// Node values of every reflection layer: `layer_nodes[k][seg][node]`.
    /// Layer 0 is the unit layer.
    layer_nodes: Vec<Vec<Vec<Complex>>>,
    /// Branch-tracked momentum at each segment's exact start point, plus
    /// the route's end point.
    p_marks: Vec<Complex>,
}

fn segment_extent(seg: &Segment) -> f64 {
    match seg {
        Segment::Line { from, to } => (to - from).norm(),
        Segment::Arc {
            a,
            b,
            theta_start,
            theta_end,
            ..
        } => (theta_end - theta_start).abs() * (a.abs() + b.abs()),
    }
}

/// Marches momentum branch, phase, and `layers` nested reflection layers
/// along `route` with `panels` Gauss–Kronrod panels per segment.
fn march_chain(
    s: &ProblemSetup,
    route: &[Segment],
    layers: u32,
    panels: usize,
) -> Result<Chain, QuantizationError> {
    let (kx, kw) = kronrod_offsets();
    let scale = s.momentum_scale();
    let floor = q_floor(s);
    let hbar = s.hbar;
    let zero = Complex::new(0.0, 0.0);

    let branch_sqrt = |z: Complex, anchor: Complex| -> Complex {
        let r = s.momentum_sq_complex(z).sqrt();
        if (r + anchor).norm() < (r - anchor).norm() {
            -r
        } else {
            r
        }
    };
    let jump_ok = |p: Complex, prev: Complex| -> bool {
        (p - prev).norm() <= 0.5 * (p.norm() + prev.norm()) + 1e-3 * scale
    };

    let start = route[0].point(0.0);
    let mut p_prev = s.momentum_sq_complex(start).sqrt();
    if p_prev.re < 0.0 {
        p_prev = -p_prev;
    }
    let mut s_run = zero;
    let mut segs: Vec<SegmentMarch> = Vec::with_capacity(route.len());
    let mut p_marks: Vec<Complex> = Vec::with_capacity(route.len() + 1);

    for seg in route {
        p_marks.push(p_prev);
        if segment_extent(seg) == 0.0 {
            segs.push(SegmentMarch {
                trivial: true,
                t_nodes: Vec::new(),
                panels: Vec::new(),
            });
            continue;
        }
        let mut t_nodes = Vec::with_capacity(panels + 1);
        t_nodes.push(0.0);
        let mut pdata = Vec::with_capacity(panels);
        for j in 0..panels {
            let t0 = j as f64 / panels as f64;
            let t1 = (j + 1) as f64 / panels as f64;
            let c = 0.5 * (t0 + t1);
            let half = 0.5 * (t1 - t0);
            let p_anchor = p_prev;
            let mut pd = PanelData {
                t: [0.0; KPTS],
                w: [0.0; KPTS],
                vel: [zero; KPTS],
                s: [zero; KPTS],
                h: [zero; KPTS],
            };
            let mut ds_panel = zero;
            for i in 0..KPTS {
                let t = c + half * kx[i];
                let z = seg.point(t);
                let q = s.momentum_sq_complex(z);
                if !q.is_finite() {
                    return Err(QuantizationError::Quadrature(QuadratureError::NonFinite {
                        x: z.re,
                    }));
                }
                if q.norm() <= floor {
                    return Err(QuantizationError::Quadrature(
                        QuadratureError::TurningPointProximity {
                            x: z.re,
                            q: q.norm(),
                        },
                    ));
                }
                let p = branch_sqrt(z, p_prev);
                if !jump_ok(p, p_prev) {
                    return Err(QuantizationError::Branch { at: z });
                }
                // Phase at the abscissa: panel-start node value plus an
                // inner Gauss–Legendre leg from t0 to t.
                let hc = 0.5 * (t - t0);
                let cc = 0.5 * (t + t0);
                let mut s_in = zero;
                for (gx, gw) in GL5_X.iter().zip(GL5_W.iter()) {
                    let tt = cc + hc * gx;
                    s_in += branch_sqrt(seg.point(tt), p_anchor) * seg.velocity(tt) * *gw;
                }
                pd.t[i] = t;
                pd.w[i] = half * kw[i];
                pd.vel[i] = seg.velocity(t);
                pd.s[i] = s_run + s_in * hc / hbar;
                pd.h[i] = s.d_momentum_sq_complex(z) / (q * 4.0);
                ds_panel += pd.w[i] * p * pd.vel[i];
                p_prev = p;
            }
            s_run += ds_panel / hbar;
            t_nodes.push(t1);
            pdata.push(pd);
        }
        // Land exactly on the segment end so branch marks stay point-exact.
        let p_end = branch_sqrt(seg.point(1.0), p_prev);
        if !jump_ok(p_end, p_prev) {
            return Err(QuantizationError::Branch {
                at: seg.point(1.0),
            });
        }
        p_prev = p_end;
        segs.push(SegmentMarch {
            trivial: false,
            t_nodes,
            panels: pdata,
        });
    }
    p_marks.push(p_prev);

    // Reflection layers, built inside-out: the innermost level of an
    // order-n chain carries e^{(−1)^n·2iS}, the outermost always e^{−2iS}.
    let mut layer_nodes: Vec<Vec<Vec<Complex>>> = Vec::with_capacity(layers as usize + 1);
    layer_nodes.push(
        segs.iter()
            .map(|sm| vec![Complex::new(1.0, 0.0); sm.t_nodes.len()])
            .collect(),
    );
    for k in 1..=layers {
        let sig2 = if (layers - k) % 2 == 0 { -2.0 } else { 2.0 };
        let prev = &layer_nodes[(k - 1) as usize];
        let mut k_run = zero;
        let mut this: Vec<Vec<Complex>> = Vec::with_capacity(segs.len());
        for (g, sm) in segs.iter().enumerate() {
            if sm.trivial {
                this.push(Vec::new());
                continue;
            }
            let mut nodes = Vec::with_capacity(sm.t_nodes.len());
            nodes.push(k_run);
            for pd in &sm.panels {
                let mut dk = zero;
                for i in 0..KPTS {
                    let inner = if k == 1 {
                        Complex::new(1.0, 0.0)
                    } else {
                        interp_cubic(&sm.t_nodes, &prev[g], pd.t[i])
                    };
                    let phase = (Complex::new(0.0, sig2) * pd.s[i]).exp();
                    dk += pd.w[i] * pd.h[i] * phase * inner * pd.vel[i];
                }
                k_run += dk;
                nodes.push(k_run);
            }
            this.push(nodes);
        }
        layer_nodes.push(this);
    }

    Ok(Chain {
        segs,
        layer_nodes,
        p_marks,
    })
}

struct LoopIntegrals {
    approx: Complex,
    ratio: Complex,
    mag: f64,
    p_gap: f64,
}

fn march_and_integrate(
    s: &ProblemSetup,
    route: &[Segment],
    n_anchor: usize,
    order: u32,
    panels: usize,
) -> Result<LoopIntegrals, QuantizationError> {
    let chain = march_chain(s, route, order, panels)?;
    let cf = Complex::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2); // e^{+iπ/4}
    let one = Complex::new(1.0, 0.0);
    let last = order as usize;
    let mut approx = Complex::new(0.0, 0.0);
    let mut ratio = Complex::new(0.0, 0.0);
    let mut mag = 0.0_f64;
    for g in n_anchor..route.len() {
        let sm = &chain.segs[g];
        if sm.trivial {
            continue;
        }
        let kn_nodes = &chain.layer_nodes[last][g];
        let kprev_nodes = &chain.layer_nodes[last - 1][g];
        for pd in &sm.panels {
            for i in 0..KPTS {
                let kprev = if last == 1 {
                    one
                } else {
                    interp_cubic(&sm.t_nodes, kprev_nodes, pd.t[i])
                };
                let kn = interp_cubic(&sm.t_nodes, kn_nodes, pd.t[i]);
                // d/dz of the chain: kernel × outermost phase × inner chain.
                let dkn = pd.h[i] * (Complex::new(0.0, -2.0) * pd.s[i]).exp() * kprev;
                let num = cf * dkn * pd.vel[i] * pd.w[i];
                let a_term = num * (-(cf * kn)).exp();
                approx += a_term;
                ratio += num / (one + cf * kn);
                mag += a_term.norm();
            }
        }
    }
    let hbar_over_i = Complex::new(0.0, -s.hbar);
    Ok(LoopIntegrals {
        approx: approx * hbar_over_i,
        ratio: ratio * hbar_over_i,
        mag: mag * s.hbar,
        p_gap: (chain.p_marks[route.len()] - chain.p_marks[n_anchor]).norm(),
    })
}

/// Loop integral of the order-`order` nested reflection chain around
/// `path`, in its exponential-approximated (total-derivative) form, with
/// the unapproximated ratio form reported alongside.
///
/// The chain is anchored at the well center: momentum branch, phase
/// `S(z) = (1/ħ)∫p dz'`, and all layers are first transported along a
/// three-leg lane from the center up over the turning points to the
/// contour's start point, then marched once around the contour. The
/// quadrature bound comes from repeating everything at twice the panel
/// count; the reported value is the fine pass.
///
/// `order` must be at least 1.
pub fn reflection_correction_contour(
    s: &ProblemSetup,
    path: &ContourPath,
    order: u32,
) -> Result<ReflectionCheck, QuantizationError> {
    assert!(order >= 1, "reflection chain needs at least one layer");
    path.check_closed()?;
    let (xl, xr) = bound_turning_points(s)?;
    let x_ref = 0.5 * (xl + xr);
    let y0 = 0.25 * (xr - xl);
    let z0 = path.segments[0].point(0.0);
    let lift = Complex::new(x_ref, y0);
    let over = Complex::new(z0.re, y0);
    let mut route: Vec<Segment> = vec![
        Segment::Line {
            from: Complex::new(x_ref, 0.0),
            to: lift,
        },
        Segment::Line { from: lift, to: over },
        Segment::Line { from: over, to: z0 },
    ];
    let n_anchor = route.len();
    route.extend(path.segments.iter().cloned());

    let coarse = march_and_integrate(s, &route, n_anchor, order, CONTOUR_PANELS)?;
    let fine = march_and_integrate(s, &route, n_anchor, order, 2 * CONTOUR_PANELS)?;
    if fine.p_gap > 1e-6 * s.momentum_scale() {
        return Err(QuantizationError::Branch { at: z0 });
    }
    let floor = 100.0 * f64::EPSILON * fine.mag;
    Ok(ReflectionCheck {
        order,
        value: fine.approx,
        error_bound: (fine.approx - coarse.approx).norm() + floor,
        ratio_form: fine.ratio,
        turning_points: (xl, xr),
    })
}

/// Evaluates every term of the quantization condition at the index-`n`
/// eigenenergy found inside `bracket`, using `path` for both contour
/// integrals and an order-`reflection_order` reflection chain.
pub fn quantization_report(
    s: &ProblemSetup,
    n: u32,
    bracket: (f64, f64),
    path: &ContourPath,
    reflection_order: u32,
) -> Result<QuantizationReport, QuantizationError> {
    let energy = eigenenergy(s, n, bracket)?;
    let se = setup_at(s, energy);
    let (action, action_bound) = action_with_bound(&se, energy)?;
    let (winding, winding_bound) = winding_with_bound(&se, path)?;
    let refl = reflection_correction_contour(&se, path, reflection_order)?;
    let residual = Complex::new(action - TAU * s.hbar * n as f64, 0.0) - winding * 0.5
        + refl.value;
    Ok(QuantizationReport {
        index: n,
        energy,
        action,
        action_bound,
        winding,
        winding_bound,
        reflection: refl.value,
        reflection_bound: refl.error_bound,
        reflection_order,
        residual,
    })
}
