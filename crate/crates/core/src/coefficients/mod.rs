//! The coefficient `a` of the vector field `X = a d/dx` and the density `ρ`.

mod bump_train;
mod factorial;
mod spec;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{integrate_with_breaks, QuadratureConfig};

pub use bump_train::{make_example_bump_train, BumpTrain, Example42Spec};
pub use factorial::{make_example_factorial, Example41Spec, FactorialPlateaus};
pub use spec::{CoefficientFile, CoefficientKind, ClosedFormFamily, DensitySpec, SCHEMA_VERSION};

/// A strictly positive coefficient with derivative.
///
/// Implementations may restrict their domain (materialized range) and may
/// supply an exact antiderivative of `1/a` normalized to vanish at 0.
pub trait CoefficientModel: Send + Sync {
    fn a(&self, x: f64) -> f64;
    fn da(&self, x: f64) -> f64;

    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Points in `[lo, hi]` where `a` changes formula or varies on a short
    /// scale. Quadrature uses them as panel edges.
    fn features(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Exact `∫_0^x a⁻¹`, when known.
    fn reciprocal_integral(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Inverse of [`CoefficientModel::reciprocal_integral`], when known.
    fn reciprocal_integral_inverse(&self, _time: f64) -> Option<Result<f64>> {
        None
    }

    fn label(&self) -> String;
}

#[derive(Clone)]
pub struct Coefficient {
    model: Arc<dyn CoefficientModel>,
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficient")
            .field("label", &self.model.label())
            .field("domain", &self.model.domain())
            .finish()
    }
}

impl Coefficient {
    pub fn from_model(model: impl CoefficientModel + 'static) -> Self {
        Self {
            model: Arc::new(model),
        }
    }

    /// `a(x)`; NaN outside the materialized domain.
    pub fn a(&self, x: f64) -> f64 {
        if self.contains(x) {
            self.model.a(x)
        } else {
            f64::NAN
        }
    }

    pub fn da(&self, x: f64) -> f64 {
        if self.contains(x) {
            self.model.da(x)
        } else {
            f64::NAN
        }
    }

    pub fn try_a(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.model.a(x))
    }

    pub fn domain(&self) -> (f64, f64) {
        self.model.domain()
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.model.domain();
        x >= lo && x <= hi
    }

    pub fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.model.domain();
        if x < lo {
            Err(Error::OutOfMaterializedRange { x, limit: lo })
        } else if x > hi {
            Err(Error::OutOfMaterializedRange { x, limit: hi })
        } else {
            Ok(())
        }
    }

    pub fn features(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (dlo, dhi) = self.model.domain();
        let mut f = self.model.features(lo.max(dlo), hi.min(dhi));
        f.retain(|p| *p >= lo && *p <= hi);
        f.sort_by(f64::total_cmp);
        f.dedup();
        f
    }

    pub fn reciprocal_integral_hint(&self, x: f64) -> Option<f64> {
        self.model.reciprocal_integral(x)
    }

    pub fn reciprocal_integral_inverse_hint(&self, time: f64) -> Option<Result<f64>> {
        self.model.reciprocal_integral_inverse(time)
    }

    pub fn has_exact_time_coordinate(&self) -> bool {
        self.model.reciprocal_integral(0.0).is_some()
    }

    pub fn label(&self) -> String {
        self.model.label()
    }

    /// `a ≡ value`, with the exact time coordinate `x / value`.
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NotPositive { x: 0.0, value });
        }
        Ok(Self::from_model(Constant(value)))
    }

    /// `a(x) = √(1 + x²)`, handled as a generic closed form (no exact hints).
    pub fn sqrt_one_plus_square() -> Self {
        make_closed_form(
            |x| (1.0 + x * x).sqrt(),
            |x| x / (1.0 + x * x).sqrt(),
            "sqrt(1+x^2)",
        )
        .expect("√(1+x²) is a valid coefficient")
    }
}

struct Constant(f64);

impl CoefficientModel for Constant {
    fn a(&self, _x: f64) -> f64 {
        self.0
    }
    fn da(&self, _x: f64) -> f64 {
        0.0
    }
    fn reciprocal_integral(&self, x: f64) -> Option<f64> {
        Some(x / self.0)
    }
    fn reciprocal_integral_inverse(&self, time: f64) -> Option<Result<f64>> {
        Some(Ok(time * self.0))
    }
    fn label(&self) -> String {
        format!("constant {}", self.0)
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

struct ClosedForm {
    a: RealFn,
    da: RealFn,
    label: String,
}

impl CoefficientModel for ClosedForm {
    fn a(&self, x: f64) -> f64 {
        (self.a)(x)
    }
    fn da(&self, x: f64) -> f64 {
        (self.da)(x)
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Probe points used to validate closed-form coefficients and densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self {
            lo: -50.0,
            hi: 50.0,
            points: 10_001,
        }
    }
}

impl ProbeGrid {
    fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.hi - self.lo) / (self.points.max(2) - 1) as f64;
        (0..self.points.max(2)).map(move |i| self.lo + step * i as f64)
    }
}

pub fn make_closed_form<A, D>(a: A, da: D, label: &str) -> Result<Coefficient>
where
    A: Fn(f64) -> f64 + Send + Sync + 'static,
    D: Fn(f64) -> f64 + Send + Sync + 'static,
{
    make_closed_form_on(a, da, label, ProbeGrid::default())
}

/// Wraps closed-form callables after checking positivity and derivative
/// consistency on `probe`.
pub fn make_closed_form_on<A, D>(a: A, da: D, label: &str, probe: ProbeGrid) -> Result<Coefficient>
where
    A: Fn(f64) -> f64 + Send + Sync + 'static,
    D: Fn(f64) -> f64 + Send + Sync + 'static,
{
    for x in probe.iter() {
        let v = a(x);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NotPositive { x, value: v });
        }
    }
    check_derivative(&a, &da, probe.iter(), 1e-5)?;
    Ok(Coefficient::from_model(ClosedForm {
        a: Arc::new(a),
        da: Arc::new(da),
        label: label.to_string(),
    }))
}

/// Compares `df` with a Richardson-extrapolated central difference of `f`.
/// The mismatch is measured relative to `max(|df|, |f|, 1)`.
pub fn check_derivative<F, D>(
    f: &F,
    df: &D,
    points: impl Iterator<Item = f64>,
    rel_tol: f64,
) -> Result<()>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    for x in points {
        let h = 1e-3 * x.abs().max(1.0);
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
        let fd = (4.0 * d2 - d1) / 3.0;
        let supplied = df(x);
        let scale = supplied.abs().max(f(x).abs()).max(1.0);
        if !((supplied - fd).abs() <= rel_tol * scale) {
            return Err(Error::DerivativeMismatch {
                x,
                supplied,
                finite_difference: fd,
            });
        }
    }
    Ok(())
}

/// The weight `ρ` of the measure `ρ dx`.
#[derive(Clone)]
pub struct Density {
    rho: RealFn,
    drho: RealFn,
    label: String,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density").field("label", &self.label).finish()
    }
}

impl Density {
    pub fn uniform() -> Self {
        Self {
            rho: Arc::new(|_| 1.0),
            drho: Arc::new(|_| 0.0),
            label: "uniform".into(),
        }
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NotPositive { x: 0.0, value });
        }
        Ok(Self {
            rho: Arc::new(move |_| value),
            drho: Arc::new(|_| 0.0),
            label: format!("constant {value}"),
        })
    }

    pub fn closed_form<R, D>(rho: R, drho: D, label: &str) -> Result<Self>
    where
        R: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let probe = ProbeGrid::default();
        for x in probe.iter() {
            let v = rho(x);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NotPositive { x, value: v });
            }
        }
        check_derivative(&rho, &drho, probe.iter(), 1e-5)?;
        Ok(Self {
            rho: Arc::new(rho),
            drho: Arc::new(drho),
            label: label.to_string(),
        })
    }

    /// `ρ = scale / a`, which makes `aρ` constant.
    pub fn reciprocal_of(coef: &Coefficient, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::NotPositive { x: 0.0, value: scale });
        }
        let (c1, c2) = (coef.clone(), coef.clone());
        Ok(Self {
            rho: Arc::new(move |x| scale / c1.a(x)),
            drho: Arc::new(move |x| {
                let a = c2.a(x);
                -scale * c2.da(x) / (a * a)
            }),
            label: format!("{scale}/a"),
        })
    }

    pub fn rho(&self, x: f64) -> f64 {
        (self.rho)(x)
    }

    pub fn drho(&self, x: f64) -> f64 {
        (self.drho)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// `(aρ)(x)`.
pub fn a_rho(coef: &Coefficient, rho: &Density, x: f64) -> f64 {
    coef.a(x) * rho.rho(x)
}

/// `(aρ)'(x) = a'ρ + aρ'`.
pub fn a_rho_derivative(coef: &Coefficient, rho: &Density, x: f64) -> f64 {
    coef.da(x) * rho.rho(x) + coef.a(x) * rho.drho(x)
}

/// Evidence for the divergence of `∫_0^{±∞} a⁻¹` on a finite horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletenessReport {
    pub horizon: f64,
    pub forward: f64,
    pub backward: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn check_completeness(
    coef: &Coefficient,
    horizon: f64,
    threshold: f64,
) -> Result<CompletenessReport> {
    if !(horizon > 0.0) {
        return Err(Error::ConfigInvalid("horizon must be positive".into()));
    }
    coef.check_domain(horizon)?;
    coef.check_domain(-horizon)?;
    let cfg = QuadratureConfig::default().with_max_subdivisions(20_000);
    let integral = |lo: f64, hi: f64| -> Result<f64> {
        match (coef.reciprocal_integral_hint(lo), coef.reciprocal_integral_hint(hi)) {
            (Some(a), Some(b)) => Ok(b - a),
            _ => integrate_with_breaks(|x| 1.0 / coef.a(x), lo, hi, &coef.features(lo, hi), &cfg),
        }
    };
    let forward = integral(0.0, horizon)?;
    let backward = integral(-horizon, 0.0)?;
    Ok(CompletenessReport {
        horizon,
        forward,
        backward,
        threshold,
        pass: forward > threshold && backward > threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        let one = Coefficient::constant(1.0).unwrap();
        assert_eq!(one.a(3.0), 1.0);
        assert_eq!(one.da(3.0), 0.0);
        let two = Coefficient::constant(2.0).unwrap();
        assert_eq!(two.a(-7.0), 2.0);
        assert_eq!(two.reciprocal_integral_hint(3.0), Some(1.5));
        assert!(Coefficient::constant(0.0).is_err());
    }

    #[test]
    fn closed_form_validation() {
        let c = Coefficient::sqrt_one_plus_square();
        assert!((c.a(0.0) - 1.0).abs() < 1e-15);
        assert!(!c.has_exact_time_coordinate());
        let bad = make_closed_form(|x| x, |_| 1.0, "x");
        assert!(matches!(bad, Err(Error::NotPositive { .. })));
        let bad = make_closed_form(|x| 2.0 + x.sin(), |x| -x.cos(), "2+sin");
        assert!(matches!(bad, Err(Error::DerivativeMismatch { .. })));
        assert!(make_closed_form(|x| 2.0 + x.sin(), |x| x.cos(), "2+sin").is_ok());
    }

    #[test]
    fn densities() {
        let c = Coefficient::sqrt_one_plus_square();
        let rho = Density::reciprocal_of(&c, 1.0).unwrap();
        for x in [-3.0, 0.0, 2.5] {
            assert!((c.a(x) * rho.rho(x) - 1.0).abs() < 1e-15);
            // (aρ)' = a'ρ + aρ' = 0
            assert!((c.da(x) * rho.rho(x) + c.a(x) * rho.drho(x)).abs() < 1e-15);
        }
        assert!(Density::closed_form(|x| 1.0 + x * x, |x| 2.0 * x, "1+x^2").is_ok());
        assert!(Density::closed_form(|x: f64| x.cos(), |x: f64| -x.sin(), "cos").is_err());
    }

    #[test]
    fn completeness_evidence() {
        let one = Coefficient::constant(1.0).unwrap();
        let r = check_completeness(&one, 100.0, 10.0).unwrap();
        assert!((r.forward - 100.0).abs() < 1e-12 && (r.backward - 100.0).abs() < 1e-12);
        assert!(r.pass);

        let c = Coefficient::sqrt_one_plus_square();
        let h = 10f64.exp();
        let r = check_completeness(&c, h, 9.0).unwrap();
        assert!((r.forward - h.asinh()).abs() < 1e-8, "{}", r.forward);
        assert!((r.forward - 10.693_147).abs() < 1e-5);
        assert!((r.backward - h.asinh()).abs() < 1e-8);
        assert!(r.pass);
    }
}
