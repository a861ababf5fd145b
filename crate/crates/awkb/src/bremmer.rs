//! Coupled amplitude transport and the alternating-WKB construction.
//!
//! A wavefunction written as `ψ = a(x)·e^{iS} + b(x)·e^{-iS}` (with `S` the
//! running phase `(1/ħ)∫p` and the gauge `ψ' = i(p/ħ)(a e^{iS} − b e^{-iS})`)
//! turns the Schrödinger equation into an exact coupled system for the two
//! amplitudes, driven by the reflection kernel `h = p'/2p`. This module
//! provides
//!
//! * the coupled right-hand side and an adaptive ODE solution of it (the
//!   module's brute-force oracle),
//! * the closed-form first-order amplitudes for bound and scattering
//!   geometries,
//! * the nested reflection-integral hierarchy whose partial sums converge to
//!   the exact amplitudes, and
//! * assembly of the alternating-WKB wavefunctions themselves.

use crate::potential::ProblemSetup;
use crate::quadrature::{
    cumulative_reflection_integral, cumulative_with_phase_anchor, gk15, phase_integral, q_floor,
    reflection_tail_integral, ExponentSign, QuadratureError, WGK, XGK,
};
use crate::wkb::{phases_toward, wkb1_forbidden};
use crate::{Complex, Method, WaveTable};
use thiserror::Error;

/// Errors from amplitude transport.
#[derive(Debug, Error)]
pub enum BremmerError {
    /// The classical momentum vanishes: the amplitude equations are
    /// singular at turning points.
    #[error("classical momentum vanishes near x = {x}; amplitude transport is singular there")]
    Singularity {
        /// Offending location.
        x: f64,
    },
    /// The adaptive integrator could not proceed.
    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepUnderflow {
        /// Where the march stalled.
        x: f64,
        /// Step size at failure.
        h: f64,
    },
    /// A grid violating an operation's requirements.
    #[error("invalid grid: {reason}")]
    InvalidGrid {
        /// What was wrong.
        reason: String,
    },
    /// Propagated quadrature failure.
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Which physical setting an amplitude pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Two turning points enclosing a classically allowed region.
    Bound,
    /// One turning point with a free asymptotic region at large `r`.
    Scattering,
}

/// Provenance of an amplitude pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderTag {
    /// Direct numerical solution of the coupled system.
    OdeExact,
    /// Perturbative result truncated after `n` reflections (`0` = no
    /// reflection, i.e. the plain WKB transport solution).
    Order(u32),
}

/// Sampled forward/backward amplitudes `a(x)`, `b(x)` with the running
/// phase that pairs with them.
#[derive(Debug, Clone)]
pub struct AmplitudePair {
    /// Sample abscissae (monotonic; descending for inward marches).
    pub xs: Vec<f64>,
    /// Forward amplitude `a` at each abscissa.
    pub a: Vec<Complex>,
    /// Backward amplitude `b` at each abscissa.
    pub b: Vec<Complex>,
    /// Phase `S(x)` at each abscissa, in the anchor convention the
    /// amplitudes were built with.
    pub phases: Vec<f64>,
    /// How the pair was produced.
    pub order: OrderTag,
    /// Reference point of the construction.
    pub x_ref: f64,
    /// Physical setting.
    pub geometry: Geometry,
}

impl AmplitudePair {
    /// Largest deviation from the conjugate symmetry `b = conj(a)` that
    /// holds for real momenta and conjugate initial data.
    pub fn conjugate_defect(&self) -> f64 {
        self.a
            .iter()
            .zip(self.b.iter())
            .map(|(a, b)| (b - a.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Reassembles the wavefunction `ψ = a e^{iS} + b e^{-iS}`.
    pub fn reassemble(&self) -> Vec<Complex> {
        self.a
            .iter()
            .zip(self.b.iter())
            .zip(self.phases.iter())
            .map(|((a, b), &s)| {
                let rot = Complex::from_polar(1.0, s);
                a * rot + b * rot.conj()
            })
            .collect()
    }

    /// Reassembles the derivative in the defining gauge,
    /// `ψ' = i(p/ħ)(a e^{iS} − b e^{-iS})`.
    pub fn reassemble_derivative(&self, s: &ProblemSetup) -> Vec<Complex> {
        self.xs
            .iter()
            .zip(self.a.iter().zip(self.b.iter()))
            .zip(self.phases.iter())
            .map(|((&x, (a, b)), &ph)| {
                let rot = Complex::from_polar(1.0, ph);
                Complex::i() * (s.momentum_allowed(x) / s.hbar) * (a * rot - b * rot.conj())
            })
            .collect()
    }
}

fn rhs_with_phase(
    s: &ProblemSetup,
    x: f64,
    a: Complex,
    b: Complex,
    phase: f64,
    coupling: f64,
) -> Option<(Complex, Complex)> {
    let q = s.momentum_sq(x);
    if q <= q_floor(s) {
        return None;
    }
    let hk = s.reflection_kernel(x);
    let rot = Complex::from_polar(1.0, -2.0 * phase);
    let da = -hk * a + coupling * hk * b * rot;
    let db = -hk * b + coupling * hk * a * rot.conj();
    Some((da, db))
}

/// Right-hand side of the coupled amplitude system at `x`:
/// `a' = −(p'/2p)·a + (p'/2p)·b·e^{-2iS}`, `b' = −(p'/2p)·b + (p'/2p)·a·e^{+2iS}`,
/// with the phase `S` measured from `x_ref`.
pub fn coupled_rhs(
    s: &ProblemSetup,
    x: f64,
    a: Complex,
    b: Complex,
    x_ref: f64,
) -> Result<(Complex, Complex), BremmerError> {
    let phase = phase_integral(s, x_ref, x, 1e-12)?.value.re;
    rhs_with_phase(s, x, a, b, phase, 1.0).ok_or(BremmerError::Singularity { x })
}

// Dormand–Prince 5(4) tableau. The last row of A is the 5th-order weight
// vector; E holds the 5th-minus-4th-order error weights (including the
// first-same-as-last stage).
const DP_C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 5]; // [Re a, Im a, Re b, Im b, S]

fn state_rhs(s: &ProblemSetup, x: f64, y: &State, coupling: f64) -> Option<State> {
    let a = Complex::new(y[0], y[1]);
    let b = Complex::new(y[2], y[3]);
    let (da, db) = rhs_with_phase(s, x, a, b, y[4], coupling)?;
    Some([
        da.re,
        da.im,
        db.re,
        db.im,
        s.momentum_allowed(x) / s.hbar,
    ])
}

/// Adaptive solution of the coupled system sampled exactly at `grid`
/// (strictly monotonic in either direction; `grid[0]` carries the initial
/// data). `coupling` scales the off-diagonal reflection terms (1 is the
/// physical system); `s_at_start` sets the phase convention by giving
/// `S(grid[0])`.
pub fn solve_coupled_ode_sampled(
    s: &ProblemSetup,
    grid: &[f64],
    a_init: Complex,
    b_init: Complex,
    tol: f64,
    coupling: f64,
    s_at_start: f64,
) -> Result<AmplitudePair, BremmerError> {
    if grid.len() < 2 {
        return Err(BremmerError::InvalidGrid {
            reason: "need at least two sample points".into(),
        });
    }
    let ascending = grid[1] > grid[0];
    let monotonic = grid
        .windows(2)
        .all(|w| if ascending { w[1] > w[0] } else { w[1] < w[0] });
    if !monotonic {
        return Err(BremmerError::InvalidGrid {
            reason: "sample points must be strictly monotonic".into(),
        });
    }
    let span = (grid[grid.len() - 1] - grid[0]).abs();
    let dir = if ascending { 1.0 } else { -1.0 };
    let h_min = 1e-14 * span.max(1.0);
    let mut y: State = [a_init.re, a_init.im, b_init.re, b_init.im, s_at_start];
    let mut x = grid[0];
    let mut h = dir * (span / 100.0).min((grid[1] - grid[0]).abs());
    let mut out_a = Vec::with_capacity(grid.len());
    let mut out_b = Vec::with_capacity(grid.len());
    let mut out_s = Vec::with_capacity(grid.len());
    let record = |y: &State, a: &mut Vec<Complex>, b: &mut Vec<Complex>, ph: &mut Vec<f64>| {
        a.push(Complex::new(y[0], y[1]));
        b.push(Complex::new(y[2], y[3]));
        ph.push(y[4]);
    };
    record(&y, &mut out_a, &mut out_b, &mut out_s);
    let mut k0 = state_rhs(s, x, &y, coupling).ok_or(BremmerError::Singularity { x })?;
    let mut steps = 0usize;
    for &target in &grid[1..] {
        while (target - x) * dir > 1e-13 * span.max(1.0) {
            steps += 1;
            if steps > 2_000_000 {
                return Err(BremmerError::StepUnderflow { x, h });
            }
            if (x + h - target) * dir > 0.0 {
                h = target - x;
            }
            let mut k = [[0.0f64; 5]; 7];
            k[0] = k0;
            let mut singular = false;
            for stage in 0..6 {
                let mut ys = y;
                for (i, ysi) in ys.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(stage + 1) {
                        acc += DP_A[stage][j] * kj[i];
                    }
                    *ysi += h * acc;
                }
                match state_rhs(s, x + DP_C[stage] * h, &ys, coupling) {
                    Some(v) => k[stage + 1] = v,
                    None => {
                        singular = true;
                        break;
                    }
                }
            }
            if singular {
                // Retry with a smaller step; singular evaluations inside a
                // trial step may just mean the step overshot.
                h *= 0.5;
                if h.abs() < h_min {
                    return Err(BremmerError::Singularity { x });
                }
                continue;
            }
            // 5th-order solution is the last stage evaluation point
            // (first-same-as-last pairing).
            let mut y5 = y;
            for (i, y5i) in y5.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(6) {
                    acc += DP_A[5][j] * kj[i];
                }
                *y5i += h * acc;
            }
            let mut err = 0.0f64;
            for i in 0..5 {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += DP_E[j] * kj[i];
                }
                let sc = tol + tol * y[i].abs().max(y5[i].abs());
                err = err.max((h * e).abs() / sc);
            }
            if err <= 1.0 {
                x += h;
                y = y5;
                k0 = k[6];
            }
            let factor = if err > 0.0 {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h *= if err <= 1.0 { factor } else { factor.min(1.0) };
            if h.abs() < h_min {
                return Err(BremmerError::StepUnderflow { x, h });
            }
        }
        record(&y, &mut out_a, &mut out_b, &mut out_s);
    }
    Ok(AmplitudePair {
        xs: grid.to_vec(),
        a: out_a,
        b: out_b,
        phases: out_s,
        order: OrderTag::OdeExact,
        x_ref: grid[0],
        geometry: Geometry::Bound,
    })
}

/// Direct adaptive solution of the coupled amplitude system from `x_ref` to
/// `x_end`, sampled on 257 uniform points. This is the module's brute-force
/// oracle: no perturbative truncation is involved.
pub fn solve_coupled_ode(
    s: &ProblemSetup,
    x_ref: f64,
    x_end: f64,
    a_init: Complex,
    b_init: Complex,
    tol: f64,
) -> Result<AmplitudePair, BremmerError> {
    let n = 257;
    let grid: Vec<f64> = (0..n)
        .map(|i| x_ref + (x_end - x_ref) * i as f64 / (n - 1) as f64)
        .collect();
    solve_coupled_ode_sampled(s, &grid, a_init, b_init, tol, 1.0, 0.0)
}

const C_FWD: Complex = Complex::new(std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2);

fn c_forward() -> Complex {
    // e^{-iπ/4}
    C_FWD
}

/// First-order amplitudes for a bound geometry: the transport solution plus
/// one reflection,
/// `a·√p = e^{-iπ/4} + e^{+iπ/4}·F(x)` with `F(x) = ∫_{x_ref}^x (p'/2p) e^{-2iS} dξ`
/// and `b = conj(a)`. `x0` is the turning point the grid must stay on one
/// side of.
pub fn first_order_amplitudes_bound(
    s: &ProblemSetup,
    grid: &[f64],
    x_ref: f64,
    x0: f64,
    tol: f64,
) -> Result<AmplitudePair, BremmerError> {
    if grid
        .iter()
        .any(|&x| (x - x0).signum() * (x_ref - x0).signum() < 0.0)
    {
        return Err(BremmerError::InvalidGrid {
            reason: format!("grid must stay on the x_ref side of the turning point {x0}"),
        });
    }
    let cum = cumulative_reflection_integral(s, grid, ExponentSign::Minus, x_ref, tol)?;
    let cf = c_forward();
    let cb = cf.conj();
    let mut a = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    for (&x, f) in grid.iter().zip(cum.values.iter()) {
        let sqrt_p = s.momentum_allowed(x).sqrt();
        let amp = (cf + cb * f) / sqrt_p;
        a.push(amp);
        b.push(amp.conj());
    }
    Ok(AmplitudePair {
        xs: grid.to_vec(),
        a,
        b,
        phases: cum.phases,
        order: OrderTag::Order(1),
        x_ref,
        geometry: Geometry::Bound,
    })
}

/// Shared scattering machinery: phases anchored at the turning point `r0`
/// and the truncated tail integrals `T(r) = ∫_r^∞ (p'/2p) e^{-2iS} dξ` at
/// every grid point, plus the truncation bound.
fn scattering_tail(
    s: &ProblemSetup,
    grid: &[f64],
    r0: f64,
    tol: f64,
) -> Result<(Vec<f64>, Vec<Complex>, f64), BremmerError> {
    if grid.is_empty() {
        return Err(BremmerError::InvalidGrid {
            reason: "empty grid".into(),
        });
    }
    if grid[0] <= r0 {
        return Err(BremmerError::InvalidGrid {
            reason: format!("grid must lie strictly beyond the turning point {r0}"),
        });
    }
    let s0 = phase_integral(s, r0, grid[0], tol)?.value.re;
    let cum = cumulative_with_phase_anchor(s, grid, ExponentSign::Minus, grid[0], r0, s0, tol)?;
    let last = grid.len() - 1;
    let tail = reflection_tail_integral(s, grid[last], cum.phases[last], tol)?;
    let c_end = cum.values[last];
    let t: Vec<Complex> = cum
        .values
        .iter()
        .map(|c| c_end - c + tail.value)
        .collect();
    Ok((cum.phases, t, tail.error_bound))
}

/// First-order amplitudes for a scattering geometry, built from the
/// homogeneous condition at `r → ∞`:
/// `a·√p = e^{-iπ/4} − e^{+iπ/4}·T(r)` with `T(r) = ∫_r^∞ (p'/2p) e^{-2iS} dξ`
/// (phase anchored at the turning point `r0`), `b = conj(a)`.
pub fn first_order_amplitudes_scattering(
    s: &ProblemSetup,
    grid: &[f64],
    r0: f64,
    tol: f64,
) -> Result<AmplitudePair, BremmerError> {
    let (phases, t, _bound) = scattering_tail(s, grid, r0, tol)?;
    let cf = c_forward();
    let cb = cf.conj();
    let mut a = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    for (&x, ti) in grid.iter().zip(t.iter()) {
        let sqrt_p = s.momentum_allowed(x).sqrt();
        let amp = (cf - cb * ti) / sqrt_p;
        a.push(amp);
        b.push(amp.conj());
    }
    Ok(AmplitudePair {
        xs: grid.to_vec(),
        a,
        b,
        phases,
        order: OrderTag::Order(1),
        x_ref: r0,
        geometry: Geometry::Scattering,
    })
}

/// Nested reflection integrals `I₁ … I_n` on a shared grid and the partial
/// sums `A_n = √p·a` they build. `I_k(x_ref) = 0` for every layer.
#[derive(Debug, Clone)]
pub struct BremmerExpansion {
    /// Grid the expansion is reported on.
    pub xs: Vec<f64>,
    /// Phase `S(x)` from `x_ref` at each grid point.
    pub phases: Vec<f64>,
    /// Layer `k` holds `I_k` at each grid point; the exponent sign inside
    /// `I_k` alternates as `e^{(-1)^k·2iS}`.
    pub layers: Vec<Vec<Complex>>,
    /// `partial_sums[n-1]` is the order-`n` amplitude `√p·a(x)`.
    pub partial_sums: Vec<Vec<Complex>>,
    /// Reference point (all layers vanish there).
    pub x_ref: f64,
}

impl BremmerExpansion {
    /// Number of layers computed.
    pub fn order(&self) -> usize {
        self.layers.len()
    }

    /// Packages the order-`n` partial sum as an [`AmplitudePair`]
    /// (`1 ≤ n ≤ self.order()`).
    pub fn amplitude_pair(&self, s: &ProblemSetup, n: usize) -> AmplitudePair {
        assert!(n >= 1 && n <= self.order(), "order {n} not computed");
        let a: Vec<Complex> = self
            .xs
            .iter()
            .zip(self.partial_sums[n - 1].iter())
            .map(|(&x, amp)| amp / s.momentum_allowed(x).sqrt())
            .collect();
        let b = a.iter().map(Complex::conj).collect();
        AmplitudePair {
            xs: self.xs.clone(),
            a,
            b,
            phases: self.phases.clone(),
            order: OrderTag::Order(n as u32),
            x_ref: self.x_ref,
            geometry: Geometry::Bound,
        }
    }
}

// 5-point Gauss–Legendre rule, used for sub-panel phase offsets.
pub(crate) const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
pub(crate) const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

fn gl5_phase(s: &ProblemSetup, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL5_X.iter().zip(GL5_W.iter()) {
        acc += w * s.momentum_allowed(c + h * x);
    }
    acc * h / s.hbar
}

/// Iterated nested reflection integrals on `grid`, to `order` layers.
///
/// Layer `k` is `I_k(x) = ∫_{x_ref}^x (p'/2p)·e^{(-1)^k·2iS(t)}·I_{k-1}(t) dt`
/// (`I_0 ≡ 1`), evaluated on one shared refined mesh with a fixed
/// Gauss–Kronrod rule per panel and cubic interpolation of the previous
/// layer — `O(order · panels)` instead of recursive adaptive quadrature.
/// The partial sums attach the alternating constants of the forward
/// channel: odd layers enter as `e^{+iπ/4}·I_k`, even layers as the
/// conjugate `e^{-iπ/4}·conj(I_k)`.
pub fn bremmer_iterate(
    s: &ProblemSetup,
    grid: &[f64],
    x_ref: f64,
    order: u32,
) -> Result<BremmerExpansion, BremmerError> {
    if grid.is_empty() || !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(BremmerError::InvalidGrid {
            reason: "grid must be non-empty and strictly increasing".into(),
        });
    }
    if order == 0 {
        return Err(BremmerError::InvalidGrid {
            reason: "order must be at least 1".into(),
        });
    }
    let floor = q_floor(s);
    // Anchor nodes: the grid plus the reference point.
    let mut anchors: Vec<f64> = grid.to_vec();
    if !grid.iter().any(|&g| (g - x_ref).abs() <= 1e-14) {
        anchors.push(x_ref);
        anchors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let span = anchors[anchors.len() - 1] - anchors[0];
    let target = span / (2048.0_f64.max(8.0 * (grid.len() as f64 - 1.0)));
    let mut nodes: Vec<f64> = Vec::new();
    for w in anchors.windows(2) {
        nodes.push(w[0]);
        let gap = w[1] - w[0];
        let pieces = (gap / target).ceil().max(1.0) as usize;
        for j in 1..pieces {
            nodes.push(w[0] + gap * j as f64 / pieces as f64);
        }
    }
    nodes.push(anchors[anchors.len() - 1]);
    for &x in &nodes {
        if s.momentum_sq(x) <= floor {
            return Err(BremmerError::Quadrature(
                QuadratureError::TurningPointProximity {
                    x,
                    q: s.momentum_sq(x),
                },
            ));
        }
    }
    let n_nodes = nodes.len();
    let idx_ref = nodes
        .iter()
        .position(|&x| (x - x_ref).abs() <= 1e-14)
        .expect("reference node inserted above");
    // Phase at every node, chained panel by panel.
    let mut s_node = vec![0.0f64; n_nodes];
    for j in 1..n_nodes {
        let (v, _) = gk15(
            &mut |x| Complex::new(s.momentum_allowed(x) / s.hbar, 0.0),
            nodes[j - 1],
            nodes[j],
        );
        s_node[j] = s_node[j - 1] + v.re;
    }
    let s_ref = s_node[idx_ref];
    for v in s_node.iter_mut() {
        *v -= s_ref;
    }
    // Per-panel fixed Kronrod abscissae with weights, kernel values and
    // phases (phases via a short Gauss rule from the panel's left node).
    let n_panels = n_nodes - 1;
    let mut abs_t = vec![[0.0f64; 15]; n_panels];
    let mut abs_w = vec![[0.0f64; 15]; n_panels];
    let mut abs_h = vec![[0.0f64; 15]; n_panels];
    let mut abs_s = vec![[0.0f64; 15]; n_panels];
    for j in 0..n_panels {
        let (lo, hi) = (nodes[j], nodes[j + 1]);
        let c = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for i in 0..7 {
            abs_t[j][i] = c - half * XGK[i];
            abs_t[j][14 - i] = c + half * XGK[i];
            abs_w[j][i] = half * WGK[i];
            abs_w[j][14 - i] = half * WGK[i];
        }
        abs_t[j][7] = c;
        abs_w[j][7] = half * WGK[7];
        for i in 0..15 {
            abs_h[j][i] = s.reflection_kernel(abs_t[j][i]);
            abs_s[j][i] = s_node[j] + gl5_phase(s, lo, abs_t[j][i]);
        }
    }
    // Layers.
    let mut layer_nodes: Vec<Vec<Complex>> = Vec::with_capacity(order as usize);
    for k in 1..=order {
        let sign = if k % 2 == 1 { -2.0 } else { 2.0 };
        let prev = layer_nodes.last();
        let mut prefix = vec![Complex::new(0.0, 0.0); n_nodes];
        for j in 0..n_panels {
            let mut dv = Complex::new(0.0, 0.0);
            for i in 0..15 {
                let weight = abs_w[j][i] * abs_h[j][i];
                let rot = Complex::from_polar(1.0, sign * abs_s[j][i]);
                let inner = match prev {
                    Some(values) => crate::reference::interp_cubic(&nodes, values, abs_t[j][i]),
                    None => Complex::new(1.0, 0.0),
                };
                dv += weight * rot * inner;
            }
            prefix[j + 1] = prefix[j] + dv;
        }
        let at_ref = prefix[idx_ref];
        let values: Vec<Complex> = prefix.iter().map(|v| v - at_ref).collect();
        layer_nodes.push(values);
    }
    // Extract grid subsets and build partial sums.
    let grid_idx: Vec<usize> = grid
        .iter()
        .map(|&g| {
            nodes
                .iter()
                .position(|&x| (x - g).abs() <= 1e-14)
                .expect("grid nodes are mesh anchors")
        })
        .collect();
    let cf = c_forward();
    let cb = cf.conj();
    let mut layers = Vec::with_capacity(order as usize);
    let mut partial_sums = Vec::with_capacity(order as usize);
    let mut running: Vec<Complex> = vec![cf; grid.len()];
    for (k, values) in layer_nodes.iter().enumerate() {
        let layer: Vec<Complex> = grid_idx.iter().map(|&j| values[j]).collect();
        for (acc, ik) in running.iter_mut().zip(layer.iter()) {
            *acc += if (k + 1) % 2 == 1 {
                cb * ik
            } else {
                cf * ik.conj()
            };
        }
        layers.push(layer);
        partial_sums.push(running.clone());
    }
    let phases = grid_idx.iter().map(|&j| s_node[j]).collect();
    Ok(BremmerExpansion {
        xs: grid.to_vec(),
        phases,
        layers,
        partial_sums,
        x_ref,
    })
}

/// Alternating-WKB bound-state wavefunction: on the allowed grid
/// `ψ = (1/√p)·[(e^{-iπ/4} + F(x))·e^{iX} + c.c.]` with `X` the phase from
/// `x` to the turning point `x0` and `F` the cumulative reflection integral
/// from `x_ref`; on the forbidden grid it reduces to the first-order decaying
/// form with the same overall constant.
pub fn awkb_wavefunction_bound(
    s: &ProblemSetup,
    grid_allowed: &[f64],
    grid_forbidden: &[f64],
    x0: f64,
    x_ref: f64,
    tol: f64,
) -> Result<WaveTable, BremmerError> {
    if grid_allowed.is_empty() {
        return Err(BremmerError::InvalidGrid {
            reason: "allowed grid must not be empty".into(),
        });
    }
    let big_x = phases_toward(s, grid_allowed, x0, tol)?;
    let cum = cumulative_reflection_integral(s, grid_allowed, ExponentSign::Minus, x_ref, tol)?;
    let cf = c_forward();
    let allowed_values: Vec<Complex> = grid_allowed
        .iter()
        .zip(big_x.iter().zip(cum.values.iter()))
        .map(|(&x, (&xx, f))| {
            let z = (cf + f) * Complex::from_polar(1.0, xx);
            (z + z.conj()) / s.momentum_allowed(x).sqrt()
        })
        .collect();
    if grid_forbidden.is_empty() {
        return Ok(WaveTable::new(
            grid_allowed.to_vec(),
            allowed_values,
            Method::Awkb,
        ));
    }
    let forbidden = wkb1_forbidden(s, grid_forbidden, x0, tol)?;
    let forbidden_right = grid_forbidden[0] > x0;
    let allowed_ok = if forbidden_right {
        grid_allowed[grid_allowed.len() - 1] < x0
    } else {
        grid_allowed[0] > x0
    };
    if !allowed_ok {
        return Err(BremmerError::InvalidGrid {
            reason: "allowed and forbidden grids must sit on opposite sides of the turning point"
                .into(),
        });
    }
    let mut xs = Vec::with_capacity(grid_allowed.len() + forbidden.len());
    let mut values = Vec::with_capacity(xs.capacity());
    if forbidden_right {
        xs.extend_from_slice(grid_allowed);
        values.extend(allowed_values);
        xs.extend_from_slice(&forbidden.xs);
        values.extend_from_slice(&forbidden.values);
    } else {
        xs.extend_from_slice(&forbidden.xs);
        values.extend_from_slice(&forbidden.values);
        xs.extend_from_slice(grid_allowed);
        values.extend(allowed_values);
    }
    Ok(WaveTable::new(xs, values, Method::Awkb))
}

/// Alternating-WKB scattering wavefunction:
/// `ψ = (1/√p)·[(e^{-iπ/4} − T(r))·e^{iX} + c.c.]` with both the phase `X`
/// and the tail integral `T(r) = ∫_r^∞ (p'/2p) e^{-2iS} dξ` anchored at the
/// turning point `r0`. The momentum is the model's effective momentum
/// (Langer-modified when the model says so).
pub fn awkb_wavefunction_scattering(
    s: &ProblemSetup,
    grid: &[f64],
    r0: f64,
    tol: f64,
) -> Result<WaveTable, BremmerError> {
    let (phases, t, _bound) = scattering_tail(s, grid, r0, tol)?;
    let cf = c_forward();
    let values: Vec<Complex> = grid
        .iter()
        .zip(phases.iter().zip(t.iter()))
        .map(|(&r, (&xx, ti))| {
            let z = (cf - ti) * Complex::from_polar(1.0, xx);
            (z + z.conj()) / s.momentum_allowed(r).sqrt()
        })
        .collect();
    Ok(WaveTable::new(grid.to_vec(), values, Method::Awkb))
}
