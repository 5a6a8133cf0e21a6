//! Quantitative experiments for the two counterexamples: the factorial
//! plateaus, where `T` and `S` fail to extend to `L_p`, and the bump train,
//! where `S` is bounded but the real part of its generator is not bounded
//! below.

use std::f64::consts::PI;

use serde::Serialize;

use crate::coefficients::{
    make_example_bump_train, make_example_factorial, Coefficient, Density, Example41Spec,
    Example42Spec,
};
use crate::error::{Error, Result};
use crate::flow::FlowMap;
use crate::numerics::profiles::{plateau_window, plateau_window_derivative, smooth_step, smooth_step_derivative, smooth_step_integral};
use crate::numerics::{integrate, integrate_with_breaks, lp_norm, LpExponent, QuadratureConfig, TestFunction, Window};
use crate::operators::{
    apply_semigroup_subordination, estimate_extension_constants, group_norm, hull_inradius_at_origin,
    quadratic_form_with, ExtensionConstants, FormValue,
};
use crate::report::Table;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Example41Experiment {
    pub n: usize,
    pub p: f64,
    pub t: f64,
    pub interval_in: (f64, f64),
    pub interval_in1: (f64, f64),
    /// `(ψ, S_tφ)` with `ψ = 𝟙_{I_n}`, `φ = 𝟙_{I_{n+1}}`.
    pub matrix_element: f64,
    /// `matrix_element / (‖ψ‖_q ‖φ‖_p)`.
    pub norm_lower_bound: f64,
    /// `|I_n|^{1/p} |I_{n+1}|^{1/q} h_{n+1}⁻¹ = (n+1)^{1/p}/4`.
    pub skeleton: f64,
    /// `(64πt)^{-1/2} (n+1)^{1/p}`.
    pub prefactor: f64,
}

/// Lower bound for `‖S_t‖_{p→p}` from the pair of plateau indicators at
/// `n` and `n+1`.
pub fn example41_norm_lower_bound(
    spec: &Example41Spec,
    n: usize,
    p: LpExponent,
    t: f64,
) -> Result<Example41Experiment> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::ConfigInvalid(format!("time must be positive, got {t}")));
    }
    if n == 0 {
        return Err(Error::ConfigInvalid("plateau index must be at least 1".into()));
    }
    if n + 1 > spec.n_max() {
        return Err(Error::IndexOutOfRange {
            index: n + 1,
            max: spec.n_max(),
        });
    }
    let coef = make_example_factorial(spec.clone())?;
    let fm = FlowMap::new(&coef)?;
    let i_n = spec.core_interval(n)?;
    let i_n1 = spec.core_interval(n + 1)?;
    let cfg = QuadratureConfig::default().with_tolerance(1e-15, 1e-12);
    let inner = |x: f64| -> f64 {
        let tx = match fm.time_coordinate(x) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        integrate(
            |y| match fm.time_coordinate(y) {
                Ok(ty) => (-(ty - tx).powi(2) / (4.0 * t)).exp() / coef.a(y),
                Err(_) => f64::NAN,
            },
            i_n1.0,
            i_n1.1,
            &cfg,
        )
        .unwrap_or(f64::NAN)
    };
    let double = integrate(inner, i_n.0, i_n.1, &cfg)?;
    if !double.is_finite() {
        return Err(Error::NonFinite { x: i_n.0 });
    }
    let matrix_element = double / (4.0 * PI * t).sqrt();
    let (len_n, len_n1) = (i_n.1 - i_n.0, i_n1.1 - i_n1.0);
    let inv_p = p.reciprocal();
    let inv_q = 1.0 - inv_p;
    let norm_lower_bound = matrix_element / (len_n.powf(inv_q) * len_n1.powf(inv_p));
    let np1 = (n + 1) as f64;
    Ok(Example41Experiment {
        n,
        p: p.p(),
        t,
        interval_in: i_n,
        interval_in1: i_n1,
        matrix_element,
        norm_lower_bound,
        skeleton: np1.powf(inv_p) / 4.0,
        prefactor: np1.powf(inv_p) / (64.0 * PI * t).sqrt(),
    })
}

/// CSV with columns `n, p, t, matrix_element, bound, skeleton, prefactor`.
pub fn example41_table(rows: &[Example41Experiment]) -> Table {
    let mut tab = Table::new(&["n", "p", "t", "matrix_element", "bound", "skeleton", "prefactor"]);
    for r in rows {
        tab.push(vec![
            r.n.into(),
            r.p.into(),
            r.t.into(),
            r.matrix_element.into(),
            r.norm_lower_bound.into(),
            r.skeleton.into(),
            r.prefactor.into(),
        ]);
    }
    tab
}

/// Extension constants of the factorial plateaus on `[0, y_6]` against
/// `[0, y_10]`.
pub fn example41_extension_constants(spec: &Example41Spec) -> Result<ExtensionConstants> {
    if spec.n_max() < 10 {
        return Err(Error::ConfigInvalid("the nested windows need n_max ≥ 10".into()));
    }
    let coef = make_example_factorial(spec.clone())?;
    let fm = FlowMap::new(&coef)?;
    estimate_extension_constants(
        &fm,
        &Density::uniform(),
        (0.0, spec.center(6)?),
        (0.0, spec.center(10)?),
        &[0.0, 0.5, 1.0, 2.0, 4.0],
        64,
    )
}

/// Rising part of the slope profile: `ψ = 3 + n^{-1/2} Q(n(x - 16n - 8))`
/// with `Q' = S(u)(1 - S(u - 2))`, so `ψ' = n^{1/2}` on the middle third and
/// `ψ` ends at `3 + 2n^{-1/2}`.
fn slope_integral(u: f64) -> f64 {
    smooth_step_integral(u) - smooth_step_integral(u - 2.0)
}

fn slope(u: f64) -> f64 {
    smooth_step(u) * (1.0 - smooth_step(u - 2.0))
}

fn slope_derivative(u: f64) -> f64 {
    smooth_step_derivative(u) * (1.0 - smooth_step(u - 2.0))
        - smooth_step(u) * smooth_step_derivative(u - 2.0)
}

/// The three-piece test function concentrated on the falling ramp of term `n`.
pub fn example42_phi(spec: &Example42Spec, n: usize) -> Result<TestFunction> {
    if n < 4 {
        return Err(Error::ConfigInvalid(format!("ramp index must be at least 4, got {n}")));
    }
    if n > spec.n_terms() {
        return Err(Error::OutOfMaterializedRange {
            x: spec.fall(n),
            limit: spec.limit(),
        });
    }
    let chi = *spec.chi();
    let chi_d = chi;
    let nf = n as f64;
    let (start, fall) = (spec.rise(n) + 4.0, spec.fall(n));
    let join = fall + 4.0 / nf;
    let psi_end = 3.0 + 2.0 / nf.sqrt();
    let value = move |x: f64| {
        if x <= fall {
            chi.value(x - start)
        } else if x <= join {
            3.0 + slope_integral(nf * (x - fall)) / nf.sqrt()
        } else {
            psi_end / 3.0 * (3.0 - chi.value(x - join))
        }
    };
    let derivative = move |x: f64| {
        if x <= fall {
            chi_d.derivative(x - start)
        } else if x <= join {
            nf.sqrt() * slope(nf * (x - fall))
        } else {
            -psi_end / 3.0 * chi_d.derivative(x - join)
        }
    };
    let mut breaks = Vec::new();
    for b in spec.chi().breakpoints() {
        breaks.push(start + b);
        breaks.push(fall + b / nf);
        breaks.push(join + b);
    }
    breaks.push(join);
    Ok(TestFunction::real(value, derivative, (start, join + 3.0))?.with_breakpoints(breaks))
}

/// `x ↦ (ψ'' slope profile)` exposed for checks of the ramp shape.
pub fn example42_slope_profile(u: f64) -> (f64, f64) {
    (slope(u), slope_derivative(u))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example42Experiment {
    pub n: usize,
    /// `Re(φ, Hφ)/‖φ‖₂²`.
    pub rayleigh: f64,
    pub form: FormValue,
    /// `-(6n^{1/2} - 16(2 + 4‖χ'‖_∞)²)/300`.
    pub ceiling: f64,
    pub norm: f64,
    pub derivative_norm: f64,
    pub derivative_norm_bound: f64,
    /// `-∫ a'aφφ'` over `[16n + 8 + 1/n, 16n + 8 + 2/n]`.
    pub ramp_payoff: f64,
    /// `a'aφφ' ≤ 0` at every sample of the ramp window.
    pub ramp_sign_ok: bool,
    pub below_ceiling: bool,
    /// Number of refinement passes the quadrature needed.
    pub refinements: usize,
}

fn refine_breaks(phi: &TestFunction, level: usize) -> TestFunction {
    if level == 0 {
        return phi.clone();
    }
    let bps = phi.breakpoints().to_vec();
    let parts = 1usize << level;
    let mut extra = Vec::new();
    for w in bps.windows(2) {
        for k in 1..parts {
            extra.push(w[0] + (w[1] - w[0]) * k as f64 / parts as f64);
        }
    }
    phi.clone().with_breakpoints(extra)
}

/// Quadratic form with successive panel refinement until two passes agree.
fn converged_form(coef: &Coefficient, rho: &Density, phi: &TestFunction) -> Result<(FormValue, usize)> {
    let levels = [
        QuadratureConfig::default().with_tolerance(1e-12, 1e-11).with_max_subdivisions(20_000),
        QuadratureConfig::default().with_tolerance(1e-13, 1e-12).with_max_subdivisions(40_000),
        QuadratureConfig::default().with_tolerance(1e-14, 1e-13).with_max_subdivisions(80_000),
    ];
    let mut prev: Option<FormValue> = None;
    let mut last_err = None;
    for (level, cfg) in levels.iter().enumerate() {
        match quadratic_form_with(coef, rho, &refine_breaks(phi, level), cfg) {
            Ok(v) => {
                if let Some(p) = prev {
                    let scale = v.rayleigh.norm().max(1.0);
                    if (v.rayleigh - p.rayleigh).norm() <= 1e-8 * scale {
                        return Ok((v, level));
                    }
                }
                prev = Some(v);
            }
            Err(e) if e.is_numerical() => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(Error::ResolutionInsufficient(format!(
        "quadratic form did not settle after {} refinements{}",
        levels.len(),
        last_err.map(|e| format!(" ({e})")).unwrap_or_default()
    )))
}

pub fn example42_rayleigh(spec: &Example42Spec, n: usize) -> Result<Example42Experiment> {
    let coef = make_example_bump_train(spec.clone())?;
    let rho = Density::uniform();
    let phi = example42_phi(spec, n)?;
    let (form, refinements) = converged_form(&coef, &rho, &phi)?;
    let nf = n as f64;
    let chi_sup = spec.chi().derivative_sup();
    let ceiling = -(6.0 * nf.sqrt() - 16.0 * (2.0 + 4.0 * chi_sup).powi(2)) / 300.0;
    let (lo, hi) = phi.support();
    let cfg = QuadratureConfig::default().with_tolerance(1e-13, 1e-12).with_max_subdivisions(20_000);
    let mut breaks = phi.breakpoints().to_vec();
    breaks.extend(coef.features(lo, hi));
    let derivative_norm =
        integrate_with_breaks(|x| phi.derivative(x).re.powi(2), lo, hi, &breaks, &cfg)?.sqrt();
    let (r0, r1) = (spec.fall(n) + 1.0 / nf, spec.fall(n) + 2.0 / nf);
    let integrand = |x: f64| coef.da(x) * coef.a(x) * phi.re(x) * phi.derivative(x).re;
    let ramp_payoff = -integrate(integrand, r0, r1, &cfg)?;
    let ramp_sign_ok = (0..=2000).all(|i| integrand(r0 + (r1 - r0) * i as f64 / 2000.0) <= 0.0);
    let rayleigh = form.rayleigh.re;
    Ok(Example42Experiment {
        n,
        rayleigh,
        form,
        ceiling,
        norm: form.norm_sq.sqrt(),
        derivative_norm,
        derivative_norm_bound: 2.0 + 4.0 * chi_sup,
        ramp_payoff,
        ramp_sign_ok,
        below_ceiling: rayleigh <= ceiling,
        refinements,
    })
}

/// CSV with columns `n, rayleigh, ceiling, norm, derivative_norm, ramp_payoff`.
pub fn example42_table(rows: &[Example42Experiment]) -> Table {
    let mut tab = Table::new(&["n", "rayleigh", "ceiling", "norm", "derivative_norm", "ramp_payoff"]);
    for r in rows {
        tab.push(vec![
            r.n.into(),
            r.rayleigh.into(),
            r.ceiling.into(),
            r.norm.into(),
            r.derivative_norm.into(),
            r.ramp_payoff.into(),
        ]);
    }
    tab
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformBoundRow {
    pub t: f64,
    pub p: f64,
    /// Larger of the grid norms of `T_t` and `T_{-t}`.
    pub group_norm: f64,
    /// `‖S_tφ‖_p / ‖φ‖_p` for a bump straddling a falling ramp.
    pub semigroup_ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Checks `‖T_{±t}‖_{p→p} ≤ 4^{1/p}` and `‖S_tφ‖_p ≤ 4^{1/p}‖φ‖_p` for `t`
/// in `t_grid`.
pub fn example42_uniform_bound_check(
    spec: &Example42Spec,
    p: LpExponent,
    t_grid: &[f64],
) -> Result<Vec<UniformBoundRow>> {
    if spec.n_terms() < 6 {
        return Err(Error::ConfigInvalid("the uniform bound check needs n_terms ≥ 6".into()));
    }
    let coef = make_example_bump_train(spec.clone())?;
    let fm = FlowMap::new(&coef)?;
    let rho = Density::uniform();
    let bound = 4f64.powf(p.reciprocal());
    let norm_window = Window::new(-8.0, spec.limit() - 16.0, 4001)?;
    let phi = TestFunction::bump(spec.fall(2) + 0.5, 2.0, 1.0)?;
    let out_window = Window::new(0.0, 100.0, 2001)?;
    let phi_grid = crate::numerics::GridFunction::sample(&out_window, |x| phi.re(x));
    let phi_norm = lp_norm(&phi_grid, p, &rho);
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let forward = group_norm(&fm, &rho, t, p, &norm_window)?.value;
        let backward = group_norm(&fm, &rho, -t, p, &norm_window)?.value;
        let g = forward.max(backward);
        let st = apply_semigroup_subordination(&fm, t.abs(), &phi, &out_window, 12.0)?;
        let ratio = lp_norm(&st, p, &rho) / phi_norm;
        let limit = bound * (1.0 + 1e-6);
        rows.push(UniformBoundRow {
            t,
            p: p.p(),
            group_norm: g,
            semigroup_ratio: ratio,
            bound,
            pass: g <= limit && ratio <= limit,
        });
    }
    Ok(rows)
}

/// Extension constants of the bump train on `[-8, 128]` against `[-8, 256]`.
pub fn example42_extension_constants(spec: &Example42Spec) -> Result<ExtensionConstants> {
    if spec.limit() <= 256.0 {
        return Err(Error::ConfigInvalid("the nested windows need n_terms ≥ 16".into()));
    }
    let coef = make_example_bump_train(spec.clone())?;
    let fm = FlowMap::new(&coef)?;
    estimate_extension_constants(
        &fm,
        &Density::uniform(),
        (-8.0, 128.0),
        (-8.0, 256.0),
        &[0.0, 0.05, 0.1, 0.25, 0.5, 1.0],
        32,
    )
}

/// `e^{iλx} τ(x - 16)` with `τ = 1` on `[0, 3]`, placed on the first rising
/// ramp so that `a' ≠ 0` under it.
pub fn example42_modulated_window(lambda: f64) -> Result<TestFunction> {
    let tau = TestFunction::real(plateau_window, plateau_window_derivative, (-1.0, 4.0))?
        .with_breakpoints(vec![0.0, 3.0]);
    Ok(tau.translated(16.0).modulated(lambda))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeSample {
    pub label: String,
    pub value: FormValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeExperiment {
    pub n: usize,
    pub samples: Vec<RangeSample>,
    /// Radius of the largest disk about 0 inside the hull of the samples.
    pub inradius: f64,
}

/// Rayleigh quotients of `e^{iλx}τ`, `φ_n` and `e^{iλx}τ + φ_n` for each
/// `λ` in `lambdas`.
pub fn example42_numerical_range(
    spec: &Example42Spec,
    n: usize,
    lambdas: &[f64],
) -> Result<RangeExperiment> {
    let coef = make_example_bump_train(spec.clone())?;
    let rho = Density::uniform();
    let phi = example42_phi(spec, n)?;
    let mut members = vec![("phi_n".to_string(), phi.clone())];
    for &l in lambdas {
        let tau = example42_modulated_window(l)?;
        members.push((format!("tau_{l}"), tau.clone()));
        members.push((format!("tau_{l}+phi_n"), tau.sum(&phi)));
    }
    let samples = members
        .into_iter()
        .map(|(label, f)| converged_form(&coef, &rho, &f).map(|(value, _)| RangeSample { label, value }))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.value.rayleigh.re, s.value.rayleigh.im))
        .collect();
    Ok(RangeExperiment {
        n,
        inradius: hull_inradius_at_origin(&pts),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ex41_scaling() {
        let spec = Example41Spec::new(8).unwrap();
        let p = LpExponent::new(2.0).unwrap();
        let b = example41_norm_lower_bound(&spec, 3, p, 1.0).unwrap();
        assert!((b.skeleton - 2.0 / 4.0 * 1.0).abs() < 1e-15);
        // time offsets in the two cores are uniform on [-1/8, 1/8]
        let g = integrate(
            |s| {
                integrate(
                    |r| (-(1.0 + r - s).powi(2) / 4.0).exp(),
                    -0.125,
                    0.125,
                    &QuadratureConfig::tight(),
                )
                .unwrap()
            },
            -0.125,
            0.125,
            &QuadratureConfig::tight(),
        )
        .unwrap();
        let expected = 16.0 * g * b.skeleton / (4.0 * PI).sqrt();
        assert!((b.norm_lower_bound / expected - 1.0).abs() < 1e-9);
        assert!(matches!(
            example41_norm_lower_bound(&spec, 8, p, 1.0),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn ex42_phi_shape() {
        let spec = Example42Spec::new(20).unwrap();
        let phi = example42_phi(&spec, 16).unwrap();
        phi.check_consistency(20_001, 1e-5).unwrap();
        let fall = spec.fall(16);
        assert_eq!(phi.re(fall - 0.5), 3.0);
        let end = phi.re(fall + 4.0 / 16.0);
        assert!((end - 3.5).abs() < 1e-9);
        assert!((phi.derivative(fall + 1.5 / 16.0).re - 4.0).abs() < 1e-12);
        assert_eq!(phi.re(fall + 4.0 / 16.0 + 3.5), 0.0);
        assert!(example42_phi(&spec, 3).is_err());
        assert!(example42_phi(&spec, 21).is_err());
    }

    #[test]
    fn ex42_rayleigh_invariants() {
        let spec = Example42Spec::new(64).unwrap();
        let e = example42_rayleigh(&spec, 64).unwrap();
        assert!(e.norm <= 300f64.sqrt());
        assert!(e.derivative_norm <= e.derivative_norm_bound);
        assert!(e.ramp_payoff >= 6.0 * 8.0);
        assert!(e.ramp_sign_ok);
        assert!(e.below_ceiling);
    }

    #[test]
    fn modulated_window_imaginary_part() {
        let spec = Example42Spec::new(4).unwrap();
        let coef = make_example_bump_train(spec).unwrap();
        let tau = example42_modulated_window(10.0).unwrap();
        let (v, _) = converged_form(&coef, &Density::uniform(), &tau).unwrap();
        // Im(φ, Hφ) = λ ∫ a'a τ², and τ = 1 across the whole first ramp
        assert!((v.value.im - 10.0 * 7.5).abs() < 1e-8);
    }
}
