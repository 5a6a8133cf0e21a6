use serde::Serialize;

use crate::coefficients::{a_rho, a_rho_derivative, Density};
use crate::error::{Error, Result};
use crate::flow::FlowMap;
use crate::numerics::parallel::par_map;
use crate::numerics::{LpExponent, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    ViolatedEvidence,
}

/// Constants of the comparison `(aρ)(y) ≤ C e^{ωd(x;y)} (aρ)(x)` on scanned
/// windows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionConstants {
    /// `C(ω)` on the outer window.
    pub c: f64,
    pub omega: f64,
    /// `C(ω)` on the inner window.
    pub c_inner: f64,
    /// Relative excess of the outer constant over the inner one.
    pub residual: f64,
    pub verdict: Verdict,
    /// `(ω, C_inner(ω), C_outer(ω))` for every ω scanned.
    pub table: Vec<(f64, f64, f64)>,
    pub inner_window: (f64, f64),
    pub outer_window: (f64, f64),
}

impl ExtensionConstants {
    /// `C(ω)` on the outer window at a scanned ω.
    pub fn c_at(&self, omega: f64) -> Option<f64> {
        self.table.iter().find(|r| r.0 == omega).map(|r| r.2)
    }
}

/// Samples `(A(x), ln (aρ)(x))` uniformly in the time coordinate over
/// `[lo, hi]`, plus the coefficient's feature points.
fn sample_log_weights(
    fm: &FlowMap,
    rho: &Density,
    window: (f64, f64),
    per_unit_time: usize,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    let (t_lo, t_hi) = (fm.time_coordinate(lo)?, fm.time_coordinate(hi)?);
    let n = (((t_hi - t_lo) * per_unit_time as f64).ceil() as usize).max(1);
    let times: Vec<f64> = (0..=n)
        .map(|i| t_lo + (t_hi - t_lo) * i as f64 / n as f64)
        .collect();
    let mut xs = par_map(&times, |&t| fm.position(t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    xs.extend(fm.coefficient().features(lo, hi));
    let coef = fm.coefficient();
    let mut pts = par_map(&xs, |&x| {
        fm.time_coordinate(x).map(|t| (t, a_rho(coef, rho, x).ln()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pts)
}

/// `ln C(ω) = max_{i,j} |L_j - L_i| - ω|τ_j - τ_i|` in one sweep over the
/// time-sorted samples.
fn log_constant(pts: &[(f64, f64)], omega: f64) -> f64 {
    let mut best = 0.0f64;
    let mut min_minus = f64::INFINITY;
    let mut max_plus = f64::NEG_INFINITY;
    for &(t, l) in pts {
        min_minus = min_minus.min(l - omega * t);
        max_plus = max_plus.max(l + omega * t);
        best = best.max((l - omega * t) - min_minus);
        best = best.max(max_plus - (l + omega * t));
    }
    best
}

/// Scans `ω_grid` on nested windows. The reported ω minimizes `C(ω)e^{ω}`
/// (the resulting bound on `‖T_{±1}‖_{1→1}`) on the inner window, ties going
/// to the smaller ω. The verdict is violated-evidence when the constant at
/// that ω more than doubles from the inner to the outer window.
pub fn estimate_extension_constants(
    fm: &FlowMap,
    rho: &Density,
    inner: (f64, f64),
    outer: (f64, f64),
    omega_grid: &[f64],
    samples_per_unit_time: usize,
) -> Result<ExtensionConstants> {
    if omega_grid.is_empty() || omega_grid.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::ConfigInvalid("ω grid must be nonempty and nonnegative".into()));
    }
    if !(outer.0 <= inner.0 && inner.1 <= outer.1 && inner.0 < inner.1) {
        return Err(Error::ConfigInvalid("inner window must lie inside the outer one".into()));
    }
    if samples_per_unit_time == 0 {
        return Err(Error::ConfigInvalid("need at least one sample per unit time".into()));
    }
    let pin = sample_log_weights(fm, rho, inner, samples_per_unit_time)?;
    let pout = sample_log_weights(fm, rho, outer, samples_per_unit_time)?;
    let mut omegas = omega_grid.to_vec();
    omegas.sort_by(f64::total_cmp);
    omegas.dedup();
    let table: Vec<(f64, f64, f64)> = omegas
        .iter()
        .map(|&w| (w, log_constant(&pin, w).exp(), log_constant(&pout, w).exp()))
        .collect();
    let mut choice = table[0];
    for row in &table[1..] {
        if row.1 * row.0.exp() < choice.1 * choice.0.exp() * (1.0 - 1e-12) {
            choice = *row;
        }
    }
    let (omega, c_inner, c) = choice;
    Ok(ExtensionConstants {
        c,
        omega,
        c_inner,
        residual: (c / c_inner - 1.0).max(0.0),
        verdict: if c > 2.0 * c_inner {
            Verdict::ViolatedEvidence
        } else {
            Verdict::Satisfied
        },
        table,
        inner_window: inner,
        outer_window: outer,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryEstimate {
    /// Grid estimate of `‖ρ⁻¹(aρ)'‖_∞` on the window.
    pub omega: f64,
    pub argmax: f64,
    pub window: (f64, f64),
}

impl CorollaryEstimate {
    /// Predicted bound `e^{ω|t|/p}` on `‖T_t‖_{p→p}`.
    pub fn predicted_group_bound(&self, t: f64, p: LpExponent) -> f64 {
        (self.omega * t.abs() * p.reciprocal()).exp()
    }
}

/// `sup |a' + aρ'/ρ|` over the window grid, with 64 extra points between
/// consecutive coefficient features.
pub fn check_corollary_condition(
    fm: &FlowMap,
    rho: &Density,
    window: &Window,
) -> Result<CorollaryEstimate> {
    let coef = fm.coefficient();
    let mut xs: Vec<f64> = window.points().collect();
    let feats = coef.features(window.lo, window.hi);
    for w in feats.windows(2) {
        for k in 0..64 {
            xs.push(w[0] + (w[1] - w[0]) * (k as f64 + 0.5) / 64.0);
        }
    }
    let mut best = (0.0f64, window.lo);
    for x in xs {
        let v = (a_rho_derivative(coef, rho, x) / rho.rho(x)).abs();
        if !v.is_finite() {
            return Err(Error::NonFinite { x });
        }
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(CorollaryEstimate {
        omega: best.0,
        argmax: best.1,
        window: (window.lo, window.hi),
    })
}
