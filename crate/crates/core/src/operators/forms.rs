use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::{a_rho_derivative, Coefficient, Density};
use crate::error::{Error, Result};
use crate::numerics::{integrate_with_breaks, LpExponent, QuadratureConfig, TestFunction};
use crate::report::Table;

pub(crate) fn form_cfg() -> QuadratureConfig {
    QuadratureConfig::default()
        .with_tolerance(1e-12, 1e-11)
        .with_max_subdivisions(20_000)
}

fn breaks_for(coef: &Coefficient, phi: &TestFunction) -> Result<Vec<f64>> {
    let (lo, hi) = phi.support();
    coef.check_domain(lo)?;
    coef.check_domain(hi)?;
    let mut b = phi.breakpoints().to_vec();
    b.extend(coef.features(lo, hi));
    Ok(b)
}

/// `(φ, Hφ)` for `H = -X²` on `L_2(ρ dx)` together with `‖φ‖₂²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormValue {
    pub value: Complex64,
    pub norm_sq: f64,
    pub rayleigh: Complex64,
}

/// `(φ, Hφ) = ∫ ρ|aφ'|² + ∫ (aρ)' conj(φ) aφ'`.
pub fn quadratic_form(coef: &Coefficient, rho: &Density, phi: &TestFunction) -> Result<FormValue> {
    quadratic_form_with(coef, rho, phi, &form_cfg())
}

pub fn quadratic_form_with(
    coef: &Coefficient,
    rho: &Density,
    phi: &TestFunction,
    cfg: &QuadratureConfig,
) -> Result<FormValue> {
    let (lo, hi) = phi.support();
    let breaks = breaks_for(coef, phi)?;
    let value: Complex64 = integrate_with_breaks(
        |x| {
            let (v, d) = (phi.value(x), phi.derivative(x));
            let a = coef.a(x);
            let xd = d * a;
            xd.conj() * xd * rho.rho(x) + v.conj() * xd * a_rho_derivative(coef, rho, x)
        },
        lo,
        hi,
        &breaks,
        cfg,
    )?;
    let norm_sq: f64 =
        integrate_with_breaks(|x| rho.rho(x) * phi.value(x).norm_sqr(), lo, hi, &breaks, cfg)?;
    if !(norm_sq > 0.0) {
        return Err(Error::ConfigInvalid("test function has zero norm".into()));
    }
    Ok(FormValue {
        value,
        norm_sq,
        rayleigh: value / norm_sq,
    })
}

/// `‖Xφ‖₂² = ∫ ρ|aφ'|²`.
pub fn x_norm_sq(coef: &Coefficient, rho: &Density, phi: &TestFunction) -> Result<f64> {
    let (lo, hi) = phi.support();
    let breaks = breaks_for(coef, phi)?;
    integrate_with_breaks(
        |x| rho.rho(x) * (phi.derivative(x) * coef.a(x)).norm_sqr(),
        lo,
        hi,
        &breaks,
        &form_cfg(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GardingReport {
    pub epsilon: f64,
    pub omega: f64,
    /// `Re(φ, Hφ)`.
    pub lhs: f64,
    /// `(1-ε)‖Xφ‖² - (4ε)⁻¹ω²‖φ‖²`.
    pub rhs: f64,
    pub x_norm_sq: f64,
    pub norm_sq: f64,
    pub holds: bool,
}

/// Checks `Re(φ,Hφ) ≥ (1-ε)‖Xφ‖₂² - (4ε)⁻¹ω²‖φ‖₂²` with `ω` the grid estimate
/// of `‖ρ⁻¹(aρ)'‖_∞` on the support of `φ`.
pub fn garding_check(
    coef: &Coefficient,
    rho: &Density,
    phi: &TestFunction,
    epsilon: f64,
) -> Result<GardingReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ConfigInvalid(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let form = quadratic_form(coef, rho, phi)?;
    let xn = x_norm_sq(coef, rho, phi)?;
    let (lo, hi) = phi.support();
    let mut xs: Vec<f64> = (0..=4096).map(|i| lo + (hi - lo) * i as f64 / 4096.0).collect();
    xs.extend(breaks_for(coef, phi)?);
    let omega = xs
        .iter()
        .map(|&x| (a_rho_derivative(coef, rho, x) / rho.rho(x)).abs())
        .fold(0.0f64, f64::max);
    let rhs = (1.0 - epsilon) * xn - omega * omega / (4.0 * epsilon) * form.norm_sq;
    let lhs = form.value.re;
    let slack = 1e-10 * (lhs.abs() + rhs.abs()).max(1e-300);
    Ok(GardingReport {
        epsilon,
        omega,
        lhs,
        rhs,
        x_norm_sq: xn,
        norm_sq: form.norm_sq,
        holds: lhs >= rhs - slack,
    })
}

/// `∫ (aρ|φ|^{p-2}φ)' a φ'` for real `φ`; for `φ ≥ 0` this is the
/// `L_p` dissipativity pairing `∫ (aρφ^{p-1})' a φ'`.
pub fn dissipativity_functional(
    coef: &Coefficient,
    rho: &Density,
    p: LpExponent,
    phi: &TestFunction,
) -> Result<f64> {
    if !phi.is_real() {
        return Err(Error::ConfigInvalid("dissipativity needs a real test function".into()));
    }
    if !(p.p() > 1.0) || p.is_infinite() {
        return Err(Error::ConfigInvalid("dissipativity needs 1 < p < ∞".into()));
    }
    let p = p.p();
    let (lo, hi) = phi.support();
    let breaks = breaks_for(coef, phi)?;
    integrate_with_breaks(
        |x| {
            let v = phi.re(x);
            let d = phi.derivative(x).re;
            if v == 0.0 {
                return 0.0;
            }
            let m = v.abs().powf(p - 2.0);
            let a = coef.a(x);
            let ar = a * rho.rho(x);
            (a_rho_derivative(coef, rho, x) * m * v + (p - 1.0) * ar * m * d) * a * d
        },
        lo,
        hi,
        &breaks,
        &form_cfg(),
    )
}

/// Rayleigh quotients `(φ,Hφ)/‖φ‖₂²` of every family member.
pub fn numerical_range_sample(
    coef: &Coefficient,
    rho: &Density,
    family: &[TestFunction],
) -> Result<Vec<FormValue>> {
    if family.is_empty() {
        return Err(Error::ConfigInvalid("numerical range family is empty".into()));
    }
    family.iter().map(|phi| quadratic_form(coef, rho, phi)).collect()
}

/// CSV with columns `re, im, label`.
pub fn range_table(values: &[FormValue], labels: &[String]) -> Table {
    let mut t = Table::new(&["re", "im", "label"]);
    for (v, l) in values.iter().zip(labels) {
        t.push(vec![v.rayleigh.re.into(), v.rayleigh.im.into(), l.clone().into()]);
    }
    t
}

/// Convex hull (counter-clockwise, no collinear points) by the monotone chain.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Radius of the largest disk about the origin inside the convex hull of
/// `points`; zero when the origin is not an interior point.
pub fn hull_inradius_at_origin(points: &[(f64, f64)]) -> f64 {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return 0.0;
    }
    let mut radius = f64::INFINITY;
    for i in 0..hull.len() {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        let (ex, ey) = (b.0 - a.0, b.1 - a.1);
        let len = (ex * ex + ey * ey).sqrt();
        // signed distance of the origin to the left of edge a→b
        let dist = (ex * (0.0 - a.1) - ey * (0.0 - a.0)) / len;
        if dist <= 0.0 {
            return 0.0;
        }
        radius = radius.min(dist);
    }
    radius
}
