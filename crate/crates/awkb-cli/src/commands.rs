//! Subcommand implementations: each takes a validated scenario and an
//! emitter, runs the library, and writes one data file (plus a metrics file
//! where methods are compared) and manifest metadata.
//!
//! Geometry conventions shared by every command: wavefunction phases are
//! measured toward the turning point nearest the grid, the reflection
//! reference point sits at the well center (bound problems) or the grid
//! anchor (convergence studies), and grids must keep the configured
//! fractional standoff away from every turning point.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::time::Instant;

use awkb::bremmer::{
    awkb_wavefunction_bound, awkb_wavefunction_scattering, bremmer_iterate,
    solve_coupled_ode_sampled,
};
use awkb::potential::{find_turning_points, ProblemSetup};
use awkb::quadrature::ContourPath;
use awkb::quantization::{
    action_integral, action_with_bound, bound_turning_points, eigenenergy,
    reflection_correction_contour, winding_with_bound, QuantizationError,
};
use awkb::reference::{
    compare, ho_exact_eigenstate, normalize, numerov_solve, riccati_bessel_regular,
    NormalizationPolicy, NumerovSeed, ReferenceError,
};
use awkb::wkb::{
    asymptoticity_report, wkb1_allowed, wkb1_forbidden, wkb2_wavefunction, wkb_series,
    DEFAULT_ASYMPTOTICITY_RATIO,
};
use awkb::{Complex, GridEnd, Method, WaveTable};
use serde_json::json;

use crate::config::{MethodName, NormalizationConfig, ProblemConfig, ScenarioConfig};
use crate::error::{num, CliError};
use crate::output::{sha256_hex, Cell, DataFile, Emitter};

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------

/// Stamps the preamble every data file carries.
fn stamp(file: &mut DataFile, command: &str, cfg: &ScenarioConfig) {
    file.meta("command", command);
    file.meta("problem", cfg.problem.kind());
    file.meta("energy", cfg.energy);
    file.meta("hbar", cfg.hbar);
    file.meta(
        "config_sha256",
        sha256_hex(cfg.to_canonical_json().as_bytes()),
    );
}

/// Classifies quantization errors: topology/bracketing problems mean the
/// scenario asked for something the potential cannot provide (configuration),
/// everything else is a numerical failure.
fn quant_err(e: QuantizationError) -> CliError {
    match e {
        QuantizationError::Topology { .. }
        | QuantizationError::Bracket { .. }
        | QuantizationError::InvalidPath { .. }
        | QuantizationError::Potential(_) => CliError::Config(e.to_string()),
        other => CliError::Numeric(other.to_string()),
    }
}

/// Classifies reference-oracle errors: a window that misses the grid is a
/// configuration mistake, the rest are numerical.
fn ref_err(e: ReferenceError) -> CliError {
    match e {
        ReferenceError::DisjointWindow { .. } => {
            CliError::Config(format!("windows: {e} (no overlap with the grid)"))
        }
        other => CliError::Numeric(other.to_string()),
    }
}

/// Commands that need a single classical well reject radial problems early
/// with a configuration error.
fn require_well(cfg: &ScenarioConfig, command: &str) -> Result<(), CliError> {
    match cfg.problem {
        ProblemConfig::Harmonic(_) | ProblemConfig::Custom(_) => Ok(()),
        ProblemConfig::Centrifugal(_) => Err(CliError::Config(format!(
            "problem: {command} needs a single-well problem (harmonic or custom); got centrifugal"
        ))),
    }
}

/// Turning points of the well at the scenario energy.
fn well_geometry(s: &ProblemSetup) -> Result<(f64, f64), CliError> {
    bound_turning_points(s).map_err(quant_err)
}

/// Enforces the turning-point standoff for a grid inside a well: both ends
/// must stay `delta_tp` half-widths away from their turning points.
fn check_well_grid(cfg: &ScenarioConfig, xl: f64, xr: f64) -> Result<(), CliError> {
    let w = 0.5 * (xr - xl);
    let slack = 1e-12 * w.max(1.0);
    let lo_min = xl + cfg.delta_tp * w - slack;
    let hi_max = xr - cfg.delta_tp * w + slack;
    if cfg.grid.min < lo_min || cfg.grid.max > hi_max {
        return Err(CliError::Config(format!(
            "grid: [{}, {}] violates the turning-point standoff; with turning points \
             [{xl}, {xr}] and delta_tp = {} the grid must lie inside [{lo_min}, {hi_max}]",
            cfg.grid.min, cfg.grid.max, cfg.delta_tp
        )));
    }
    Ok(())
}

/// Human-readable label of the emission normalization.
fn normalization_label(cfg: &ScenarioConfig) -> String {
    match &cfg.normalization {
        NormalizationConfig::None => "none".into(),
        NormalizationConfig::UnitL2 { window } => {
            format!("unit-l2[{}, {}]", window[0], window[1])
        }
        NormalizationConfig::MatchExact { window } => {
            format!("match-exact[{}, {}]", window[0], window[1])
        }
    }
}

/// Applies the configured emission normalization in place, returning the
/// factors actually used (empty when the policy is `none`).
fn apply_emission_normalization(
    cfg: &ScenarioConfig,
    tables: &mut [(MethodName, WaveTable)],
) -> Result<Vec<(MethodName, f64)>, CliError> {
    let factor_of = |t: &WaveTable| t.normalization.as_ref().map_or(1.0, |r| r.factor);
    let mut factors = Vec::new();
    match &cfg.normalization {
        NormalizationConfig::None => {}
        NormalizationConfig::UnitL2 { window } => {
            let w = (window[0], window[1]);
            for (m, t) in tables.iter_mut() {
                let nt = normalize(t, &NormalizationPolicy::UnitL2 { window: w }).map_err(ref_err)?;
                factors.push((*m, factor_of(&nt)));
                *t = nt;
            }
        }
        NormalizationConfig::MatchExact { window } => {
            let w = (window[0], window[1]);
            let exact = tables
                .iter()
                .find(|(m, _)| *m == MethodName::Exact)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| {
                    CliError::Config(
                        "normalization: match-exact requires \"exact\" among methods".into(),
                    )
                })?;
            for (m, t) in tables.iter_mut() {
                if *m == MethodName::Exact {
                    factors.push((*m, 1.0));
                    continue;
                }
                let nt = normalize(
                    t,
                    &NormalizationPolicy::AmplitudeMatch {
                        window: w,
                        reference: &exact,
                    },
                )
                .map_err(ref_err)?;
                factors.push((*m, factor_of(&nt)));
                *t = nt;
            }
        }
    }
    Ok(factors)
}

/// Records the emission factors in the manifest.
fn record_factors(em: &mut Emitter, factors: &[(MethodName, f64)]) {
    if factors.is_empty() {
        return;
    }
    let mut map = serde_json::Map::new();
    for (m, f) in factors {
        map.insert(m.as_str().into(), json!(f));
    }
    em.meta("normalization_factors", serde_json::Value::Object(map));
}

/// Pairwise scale-free error metrics: for every method pair and every metric
/// window the first table is least-squares amplitude-matched onto the second
/// and the residual L2/sup distances reported, so emission normalization
/// never influences the comparison.
fn pair_metrics(
    cfg: &ScenarioConfig,
    command: &str,
    tables: &[(MethodName, WaveTable)],
) -> Result<DataFile, CliError> {
    let mut metrics = DataFile::new(
        "metrics",
        &[
            "window_lo", "window_hi", "method_a", "method_b", "alpha", "l2", "sup", "sup_at",
        ],
    );
    stamp(&mut metrics, command, cfg);
    metrics.meta("note", "method_a rescaled onto method_b per window; alpha is that factor");
    for w in cfg.metric_windows() {
        for i in 0..tables.len() {
            for j in (i + 1)..tables.len() {
                let (ma, ta) = &tables[i];
                let (mb, tb) = &tables[j];
                let matched = normalize(
                    ta,
                    &NormalizationPolicy::AmplitudeMatch {
                        window: w,
                        reference: tb,
                    },
                )
                .map_err(ref_err)?;
                let alpha = matched.normalization.as_ref().map_or(1.0, |r| r.factor);
                let m = compare(&matched, tb, w).map_err(ref_err)?;
                metrics.push(vec![
                    Cell::F(w.0),
                    Cell::F(w.1),
                    Cell::S(ma.as_str().into()),
                    Cell::S(mb.as_str().into()),
                    Cell::F(alpha),
                    Cell::F(m.l2),
                    Cell::F(m.sup),
                    Cell::F(m.sup_at),
                ]);
            }
        }
    }
    Ok(metrics)
}

// ---------------------------------------------------------------------------
// bound
// ---------------------------------------------------------------------------

/// Closed-form bound-state column; only the harmonic problem has one, and
/// only at its eigenvalues.
fn exact_bound(cfg: &ScenarioConfig, grid: &[f64], em: &mut Emitter) -> Result<WaveTable, CliError> {
    let p = match &cfg.problem {
        ProblemConfig::Harmonic(p) => p,
        other => {
            return Err(CliError::Config(format!(
                "methods: \"exact\" bound-state columns exist for the harmonic problem only \
                 (got {})",
                other.kind()
            )))
        }
    };
    let nf = cfg.energy / (cfg.hbar * p.omega) - 0.5;
    let n = nf.round();
    if !((nf - n).abs() < 1e-9 && (0.0..=60.0).contains(&n)) {
        return Err(CliError::Config(format!(
            "energy: \"exact\" requires an oscillator eigenvalue E = (n + 1/2)*hbar*omega \
             with n in 0..=60; E = {} is not one",
            cfg.energy
        )));
    }
    em.meta("exact_state_index", json!(n as u32));
    Ok(ho_exact_eigenstate(n as u32, p.mass, p.omega, cfg.hbar, grid))
}

/// Finite-difference oracle column: seeds a decaying tail deep inside the
/// right forbidden region from the first-order decaying form, marches inward
/// (the stable direction), keeps the nodes of the requested grid, and scales
/// the column to unit sup so the arbitrary tail amplitude drops out.
fn numerov_bound(
    cfg: &ScenarioConfig,
    s: &ProblemSetup,
    grid: &[f64],
    xl: f64,
    xr: f64,
    em: &mut Emitter,
) -> Result<WaveTable, CliError> {
    let count = grid.len();
    let h = (cfg.grid.max - cfg.grid.min) / (count as f64 - 1.0);
    let x_far_target = xr + 1.5 * (xr - xl);
    let n_ext = ((x_far_target - cfg.grid.min) / h).ceil() as usize + 1;
    let ext: Vec<f64> = (0..n_ext).map(|i| cfg.grid.min + h * i as f64).collect();
    let seed_grid = [ext[n_ext - 2], ext[n_ext - 1]];
    let tail = wkb1_forbidden(s, &seed_grid, xr, cfg.tolerances.phase).map_err(num)?;
    let seed = NumerovSeed {
        end: GridEnd::Upper,
        values: (tail.values[1].re, tail.values[0].re),
    };
    let solved = numerov_solve(s, &ext, seed).map_err(num)?;
    let mut vals: Vec<Complex> = solved.values[..count].to_vec();
    let sup = vals.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if !(sup.is_finite() && sup > 0.0) {
        return Err(CliError::Numeric(
            "finite-difference column vanished or overflowed on the requested grid".into(),
        ));
    }
    for v in &mut vals {
        *v /= sup;
    }
    em.meta(
        "numerov",
        json!({
            "x_far": ext[n_ext - 1],
            "log_scale": solved.log_scale,
            "sup_scale": sup,
        }),
    );
    Ok(WaveTable::new(grid.to_vec(), vals, Method::Numerov))
}

/// Tabulates every requested bound-state approximation on the configured
/// allowed-region grid, plus pairwise error metrics.
pub fn cmd_bound(cfg: &ScenarioConfig, em: &mut Emitter) -> Result<(), CliError> {
    require_well(cfg, "bound")?;
    let s = cfg.setup();
    let (xl, xr) = well_geometry(&s)?;
    check_well_grid(cfg, xl, xr)?;
    let grid = cfg.grid.points();
    let x_ref = 0.5 * (xl + xr);
    let t0 = Instant::now();
    let mut tables: Vec<(MethodName, WaveTable)> = Vec::new();
    for &m in &cfg.methods {
        let table = match m {
            MethodName::Wkb1 => wkb1_allowed(&s, &grid, xr, cfg.tolerances.phase).map_err(num)?,
            MethodName::Wkb2 => {
                wkb2_wavefunction(&s, &grid, xr, x_ref, cfg.tolerances.phase).map_err(num)?
            }
            MethodName::Awkb => {
                awkb_wavefunction_bound(&s, &grid, &[], xr, x_ref, cfg.tolerances.reflection)
                    .map_err(num)?
            }
            MethodName::Exact => exact_bound(cfg, &grid, em)?,
            MethodName::Numerov => numerov_bound(cfg, &s, &grid, xl, xr, em)?,
        };
        tables.push((m, table));
    }
    let factors = apply_emission_normalization(cfg, &mut tables)?;
    em.timing("tables", t0.elapsed().as_millis());

    let mut columns: Vec<String> = vec!["x".into()];
    columns.extend(tables.iter().map(|(m, _)| m.as_str().to_string()));
    columns.push("region".into());
    let mut data = DataFile {
        suffix: String::new(),
        preamble: Vec::new(),
        columns,
        rows: Vec::new(),
    };
    stamp(&mut data, "bound", cfg);
    data.meta("turning_points", format!("[{xl}, {xr}]"));
    data.meta("x_ref", x_ref);
    data.meta("normalization", normalization_label(cfg));
    for (i, &x) in grid.iter().enumerate() {
        let mut row = Vec::with_capacity(tables.len() + 2);
        row.push(Cell::F(x));
        for (_, t) in &tables {
            row.push(Cell::F(t.values[i].re));
        }
        row.push(Cell::S("allowed".into()));
        data.push(row);
    }
    em.write(&data)?;
    let metrics = pair_metrics(cfg, "bound", &tables)?;
    em.write(&metrics)?;
    em.meta("turning_points", json!([xl, xr]));
    em.meta("x_ref", json!(x_ref));
    record_factors(em, &factors);
    Ok(())
}

// ---------------------------------------------------------------------------
// series
// ---------------------------------------------------------------------------

/// Tabulates the magnitudes of the first three phase-series terms and the
/// pointwise dominance flags, and records where the ordering first fails.
pub fn cmd_series(cfg: &ScenarioConfig, em: &mut Emitter) -> Result<(), CliError> {
    require_well(cfg, "series")?;
    let s = cfg.setup();
    let (xl, xr) = well_geometry(&s)?;
    check_well_grid(cfg, xl, xr)?;
    let grid = cfg.grid.points();
    let x_ref = 0.5 * (xl + xr);
    let terms = wkb_series(&s, &grid, x_ref, cfg.tolerances.phase).map_err(num)?;
    let flags = asymptoticity_report(&terms, cfg.hbar, DEFAULT_ASYMPTOTICITY_RATIO);
    let mut data = DataFile::new(
        "",
        &[
            "x",
            "s0_abs_over_hbar",
            "s1_abs",
            "s2_abs_hbar",
            "phase_dominates",
            "first_order_dominates",
            "second_order_small",
        ],
    );
    stamp(&mut data, "series", cfg);
    data.meta("turning_points", format!("[{xl}, {xr}]"));
    data.meta("x_ref", x_ref);
    data.meta("dominance_ratio", DEFAULT_ASYMPTOTICITY_RATIO);
    let mut crossing: Option<f64> = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..grid.len() {
        let s1a = terms.s1[i].abs();
        let s2a = cfg.hbar * terms.s2[i].abs();
        let d = s1a - s2a;
        if crossing.is_none() && d < 0.0 {
            crossing = Some(match prev {
                // Interpolate the sign change of |S1| - hbar|S2| when the
                // previous sample still satisfied the ordering.
                Some((px, pd)) if pd > 0.0 => px + pd * (grid[i] - px) / (pd - d),
                _ => grid[i],
            });
        }
        prev = Some((grid[i], d));
        data.push(vec![
            Cell::F(grid[i]),
            Cell::F((terms.s0[i] / cfg.hbar).abs()),
            Cell::F(s1a),
            Cell::F(s2a),
            Cell::B(flags[i].phase_dominates),
            Cell::B(flags[i].first_order_dominates),
            Cell::B(flags[i].second_order_small),
        ]);
    }
    em.write(&data)?;
    em.meta("turning_points", json!([xl, xr]));
    em.meta("x_ref", json!(x_ref));
    em.meta(
        "s2_overtakes_s1_at",
        crossing.map_or(serde_json::Value::Null, |x| json!(x)),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// scatter
// ---------------------------------------------------------------------------

/// Tabulates radial scattering approximations outside the turning radius,
/// with the regular free radial wave as the exact column.
pub fn cmd_scatter(cfg: &ScenarioConfig, em: &mut Emitter) -> Result<(), CliError> {
    let lp = match &cfg.problem {
        ProblemConfig::Centrifugal(p) => p.clone(),
        other => {
            return Err(CliError::Config(format!(
                "problem: scatter needs the centrifugal problem (got {})",
                other.kind()
            )))
        }
    };
    if cfg.energy <= 0.0 {
        return Err(CliError::Config(format!(
            "energy: scattering needs E > 0 (got {})",
            cfg.energy
        )));
    }
    for m in &cfg.methods {
        if !matches!(m, MethodName::Wkb1 | MethodName::Awkb | MethodName::Exact) {
            return Err(CliError::Config(format!(
                "methods: {} is not available in scattering geometry",
                m.as_str()
            )));
        }
    }
    let s = cfg.setup();
    let r0 = find_turning_points(&s, &[(cfg.grid.max * 1e-9, cfg.grid.max)])
        .map_err(|e| {
            CliError::Config(format!(
                "problem: cannot locate a turning radius below the grid (is the centrifugal \
                 barrier present?): {e}"
            ))
        })?[0];
    let slack = 1e-12 * r0;
    if cfg.grid.min < r0 * (1.0 + cfg.delta_tp) - slack {
        return Err(CliError::Config(format!(
            "grid: min {} violates the turning-point standoff; with turning radius {r0} and \
             delta_tp = {} the grid must start at or above {}",
            cfg.grid.min,
            cfg.delta_tp,
            r0 * (1.0 + cfg.delta_tp)
        )));
    }
    let grid = cfg.grid.points();
    let k = (2.0 * lp.mass * cfg.energy).sqrt() / cfg.hbar;
    let t0 = Instant::now();
    let mut tables: Vec<(MethodName, WaveTable)> = Vec::new();
    for &m in &cfg.methods {
        let table = match m {
            MethodName::Wkb1 => wkb1_allowed(&s, &grid, r0, cfg.tolerances.phase).map_err(num)?,
            MethodName::Awkb => {
                awkb_wavefunction_scattering(&s, &grid, r0, cfg.tolerances.reflection)
                    .map_err(num)?
            }
            MethodName::Exact => {
                let values = grid
                    .iter()
                    .map(|&r| Complex::new(riccati_bessel_regular(lp.l, k * r), 0.0))
                    .collect();
                WaveTable::new(grid.clone(), values, Method::Exact)
            }
            _ => unreachable!("rejected above"),
        };
        tables.push((m, table));
    }
    let factors = apply_emission_normalization(cfg, &mut tables)?;
    em.timing("tables", t0.elapsed().as_millis());

    let mut columns: Vec<String> = vec!["r".into(), "p_eff".into()];
    columns.extend(tables.iter().map(|(m, _)| m.as_str().to_string()));
    let mut data = DataFile {
        suffix: String::new(),
        preamble: Vec::new(),
        columns,
        rows: Vec::new(),
    };
    stamp(&mut data, "scatter", cfg);
    data.meta("turning_point", r0);
    data.meta("wavenumber", k);
    data.meta("normalization", normalization_label(cfg));
    for (i, &r) in grid.iter().enumerate() {
        let mut row = Vec::with_capacity(tables.len() + 2);
        row.push(Cell::F(r));
        row.push(Cell::F(s.momentum_allowed(r)));
        for (_, t) in &tables {
            row.push(Cell::F(t.values[i].re));
        }
        data.push(row);
    }
    em.write(&data)?;
    let metrics = pair_metrics(cfg, "scatter", &tables)?;
    em.write(&metrics)?;
    em.meta("turning_point", json!(r0));
    em.meta("wavenumber", json!(k));
    record_factors(em, &factors);
    Ok(())
}

// ---------------------------------------------------------------------------
// quantize
// ---------------------------------------------------------------------------

/// Solves the half-integer action condition for levels `0..=n_max` and
/// reports, per level, the action residual, the amplitude-phase winding of
/// an enclosing contour, and the nested reflection loop integrals up to the
/// configured order.
pub fn cmd_quantize(cfg: &ScenarioConfig, em: &mut Emitter, n_max: u32) -> Result<(), CliError> {
    require_well(cfg, "quantize")?;
    if n_max > 40 {
        return Err(CliError::Config(format!(
            "--n-max: must be at most 40 (got {n_max})"
        )));
    }
    let base = cfg.setup();
    // Locate the well bottom to anchor the eigenvalue brackets.
    let mut x_min = 0.0;
    let mut v_min = f64::INFINITY;
    for i in 0..=2000 {
        let x = -10.0 + 20.0 * i as f64 / 2000.0;
        let v = base.potential(x);
        if v < v_min {
            v_min = v;
            x_min = x;
        }
    }
    let omega_est = (base.d2_potential(x_min).max(0.0) / base.model.mass())
        .sqrt()
        .max(1e-6);

    let mut columns: Vec<String> = [
        "n",
        "energy",
        "action",
        "action_residual",
        "winding_re",
        "winding_im",
        "winding_bound",
    ]
    .iter()
    .map(|c| c.to_string())
    .collect();
    for k in 1..=cfg.bremmer_order {
        columns.push(format!("refl{k}_re"));
        columns.push(format!("refl{k}_im"));
        columns.push(format!("refl{k}_bound"));
    }
    let mut data = DataFile {
        suffix: String::new(),
        preamble: Vec::new(),
        columns,
        rows: Vec::new(),
    };
    stamp(&mut data, "quantize", cfg);
    data.meta("well_bottom", format!("[{x_min}, {v_min}]"));
    data.meta(
        "contour",
        "ellipse centered between the turning points; height capped so the \
         reflection chain's exp(2 Im S / hbar) growth stays resolvable",
    );

    let t0 = Instant::now();
    let mut energies: Vec<f64> = Vec::new();
    for n in 0..=n_max {
        let target = TAU * cfg.hbar * (n as f64 + 0.5);
        // Bracket: just above the well bottom (or the previous level) up to a
        // harmonic-guess ceiling, doubled until the action exceeds the target.
        let lo = match energies.last() {
            Some(&prev) => prev + 1e-9 * (prev - v_min).max(cfg.hbar * omega_est),
            None => v_min + 0.05 * cfg.hbar * omega_est,
        };
        let mut hi = v_min + cfg.hbar * omega_est * (n as f64 + 1.5);
        if hi <= lo {
            hi = lo + cfg.hbar * omega_est;
        }
        let mut guard = 0;
        while action_integral(&base, hi).map_err(quant_err)? < target {
            hi = v_min + 2.0 * (hi - v_min);
            guard += 1;
            if guard > 60 {
                return Err(CliError::Numeric(format!(
                    "cannot bracket level {n}: the action never reaches {target}"
                )));
            }
        }
        let e_n = eigenenergy(&base, n, (lo, hi)).map_err(quant_err)?;
        energies.push(e_n);
        let sn = ProblemSetup {
            model: cfg.problem.to_model(),
            energy: e_n,
            hbar: cfg.hbar,
        };
        let (action, _action_bound) = action_with_bound(&base, e_n).map_err(quant_err)?;
        let (xl, xr) = bound_turning_points(&sn).map_err(quant_err)?;
        let w = 0.5 * (xr - xl);
        let center = Complex::new(0.5 * (xl + xr), 0.0);
        // The reflection-chain integrand carries exp(2 Im S / hbar), so the
        // contour's vertical extent must stay ~hbar/p; the horizontal
        // semi-axis keeps the same margin beyond the turning points.
        let p_max = (2.0 * base.model.mass() * (e_n - v_min)).sqrt();
        let b = w.min(2.0 * cfg.hbar / p_max.max(1e-12));
        let path = ContourPath::ellipse(center, w + b, b);
        let (winding, wbound) = winding_with_bound(&sn, &path).map_err(quant_err)?;
        let mut row = vec![
            Cell::I(n as i64),
            Cell::F(e_n),
            Cell::F(action),
            Cell::F(action - target),
            Cell::F(winding.re),
            Cell::F(winding.im),
            Cell::F(wbound),
        ];
        for k in 1..=cfg.bremmer_order {
            let r = reflection_correction_contour(&sn, &path, k).map_err(quant_err)?;
            row.push(Cell::F(r.value.re));
            row.push(Cell::F(r.value.im));
            row.push(Cell::F(r.error_bound));
        }
        data.push(row);
    }
    em.timing("levels", t0.elapsed().as_millis());
    em.write(&data)?;
    em.meta("energies", json!(energies));
    em.meta("winding_target", json!(TAU * cfg.hbar));
    Ok(())
}

// ---------------------------------------------------------------------------
// convergence
// ---------------------------------------------------------------------------

/// Sup deviation of each nested-series partial sum from the exactly
/// transported forward amplitude, at full reflection coupling and at reduced
/// couplings; the per-order scaling slopes go into the manifest.
pub fn cmd_convergence(cfg: &ScenarioConfig, em: &mut Emitter) -> Result<(), CliError> {
    let s = cfg.setup();
    match &cfg.problem {
        ProblemConfig::Harmonic(_) | ProblemConfig::Custom(_) => {
            // A constant or barely-varying potential may present no well at
            // all; only enforce the standoff when a well exists.
            if let Ok((xl, xr)) = bound_turning_points(&s) {
                check_well_grid(cfg, xl, xr)?;
            }
        }
        ProblemConfig::Centrifugal(_) => {
            if cfg.energy <= 0.0 {
                return Err(CliError::Config(format!(
                    "energy: scattering needs E > 0 (got {})",
                    cfg.energy
                )));
            }
        }
    }
    let grid = cfg.grid.points();
    for &x in &grid {
        if s.momentum_allowed(x) == 0.0 {
            return Err(CliError::Config(format!(
                "grid: point {x} lies outside the classically allowed region"
            )));
        }
    }
    let x_ref = grid[0];
    let order = cfg.bremmer_order as usize;
    let t0 = Instant::now();
    let exp = bremmer_iterate(&s, &grid, x_ref, cfg.bremmer_order).map_err(num)?;
    let cf = Complex::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
    let cb = cf.conj();
    let sqrt_p: Vec<f64> = grid.iter().map(|&x| s.momentum_allowed(x).sqrt()).collect();
    let a0 = cf / sqrt_p[0];
    let b0 = cb / sqrt_p[0];

    let mut data = DataFile::new("", &["order", "coupling", "sup_deviation"]);
    stamp(&mut data, "convergence", cfg);
    data.meta("x_ref", x_ref);
    data.meta(
        "oracle",
        "adaptive integration of the coupled amplitude-transport system",
    );

    let ode_full =
        solve_coupled_ode_sampled(&s, &grid, a0, b0, cfg.tolerances.ode, 1.0, 0.0).map_err(num)?;
    for n in 1..=order {
        let mut sup = 0.0f64;
        for (i, sp) in sqrt_p.iter().enumerate() {
            let oracle = ode_full.a[i] * sp;
            sup = sup.max((exp.partial_sums[n - 1][i] - oracle).norm());
        }
        data.push(vec![Cell::I(n as i64), Cell::F(1.0), Cell::F(sup)]);
    }

    let eps_list = [0.1f64, 0.2, 0.4];
    let mut devs: Vec<Vec<f64>> = vec![Vec::new(); order];
    for &e in &eps_list {
        let ode =
            solve_coupled_ode_sampled(&s, &grid, a0, b0, cfg.tolerances.ode, e, 0.0).map_err(num)?;
        for n in 1..=order {
            let mut sup = 0.0f64;
            for i in 0..grid.len() {
                // Partial sum with layer k carrying its bookkeeping weight
                // eps^k, matching a transport system whose reflection
                // coupling is scaled by eps.
                let mut ps = cf;
                let mut ek = 1.0;
                for (k, layer) in exp.layers.iter().take(n).enumerate() {
                    ek *= e;
                    ps += if k % 2 == 0 {
                        cb * layer[i] * ek
                    } else {
                        cf * layer[i].conj() * ek
                    };
                }
                sup = sup.max((ps - ode.a[i] * sqrt_p[i]).norm());
            }
            devs[n - 1].push(sup);
            data.push(vec![Cell::I(n as i64), Cell::F(e), Cell::F(sup)]);
        }
    }
    em.timing("orders", t0.elapsed().as_millis());
    em.write(&data)?;

    let lx: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let mut slopes = serde_json::Map::new();
    for n in 1..=order {
        let d = &devs[n - 1];
        let value = if d.iter().all(|&v| v > 0.0) {
            let ly: Vec<f64> = d.iter().map(|v| v.ln()).collect();
            let my = ly.iter().sum::<f64>() / ly.len() as f64;
            let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
            let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
            json!(num / den)
        } else {
            serde_json::Value::Null
        };
        slopes.insert(n.to_string(), value);
    }
    em.meta("slopes", serde_json::Value::Object(slopes));
    em.meta("x_ref", json!(x_ref));
    Ok(())
}

// ---------------------------------------------------------------------------
// contour-check
// ---------------------------------------------------------------------------

/// Evaluates the winding integral over three differently shaped contours
/// around the well (shape independence) and the reflection loop integrals on
/// the ellipse, at the scenario energy.
pub fn cmd_contour_check(cfg: &ScenarioConfig, em: &mut Emitter) -> Result<(), CliError> {
    require_well(cfg, "contour-check")?;
    let s = cfg.setup();
    let (xl, xr) = well_geometry(&s)?;
    let w = 0.5 * (xr - xl);
    let center = Complex::new(0.5 * (xl + xr), 0.0);
    let shapes: [(&str, ContourPath); 3] = [
        ("ellipse", ContourPath::ellipse(center, 2.0 * w, w)),
        ("rectangle", ContourPath::rectangle(center, 1.8 * w, 0.9 * w)),
        ("stadium", ContourPath::stadium(center, 1.5 * w, 0.8 * w)),
    ];
    let mut data = DataFile::new(
        "",
        &[
            "check", "shape", "order", "value_re", "value_im", "bound", "ratio_re", "ratio_im",
        ],
    );
    stamp(&mut data, "contour-check", cfg);
    data.meta("turning_points", format!("[{xl}, {xr}]"));
    data.meta(
        "note",
        "order-1 reflection loops vanish at eigenenergies only; winding is energy-independent",
    );
    let t0 = Instant::now();
    let mut windings: Vec<Complex> = Vec::new();
    for (name, path) in &shapes {
        let (v, bound) = winding_with_bound(&s, path).map_err(quant_err)?;
        windings.push(v);
        data.push(vec![
            Cell::S("winding".into()),
            Cell::S((*name).into()),
            Cell::Null,
            Cell::F(v.re),
            Cell::F(v.im),
            Cell::F(bound),
            Cell::Null,
            Cell::Null,
        ]);
    }
    for k in 1..=cfg.bremmer_order {
        let r = reflection_correction_contour(&s, &shapes[0].1, k).map_err(quant_err)?;
        data.push(vec![
            Cell::S("reflection".into()),
            Cell::S("ellipse".into()),
            Cell::I(k as i64),
            Cell::F(r.value.re),
            Cell::F(r.value.im),
            Cell::F(r.error_bound),
            Cell::F(r.ratio_form.re),
            Cell::F(r.ratio_form.im),
        ]);
    }
    em.timing("contours", t0.elapsed().as_millis());
    em.write(&data)?;
    let mut spread = 0.0f64;
    for i in 0..windings.len() {
        for j in (i + 1)..windings.len() {
            spread = spread.max((windings[i] - windings[j]).norm());
        }
    }
    em.meta("winding_pairwise_spread", json!(spread));
    em.meta("winding_target", json!(TAU * cfg.hbar));
    em.meta("turning_points", json!([xl, xr]));
    Ok(())
}
