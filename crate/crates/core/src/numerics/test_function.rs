use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::profiles::{bump_pdf, smooth_step, smooth_step_derivative};
use crate::error::{Error, Result};

type ComplexFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A smooth compactly supported function with its derivative.
///
/// `breakpoints` lists interior points where the function's formula changes
/// or its derivative varies rapidly; quadrature uses them as panel edges.
#[derive(Clone)]
pub struct TestFunction {
    value: ComplexFn,
    derivative: ComplexFn,
    support: (f64, f64),
    breakpoints: Vec<f64>,
    real: bool,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints.len())
            .field("real", &self.real)
            .finish()
    }
}

impl TestFunction {
    pub fn new<V, D>(value: V, derivative: D, support: (f64, f64)) -> Result<Self>
    where
        V: Fn(f64) -> Complex64 + Send + Sync + 'static,
        D: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        check_support(support)?;
        Ok(Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            support,
            breakpoints: Vec::new(),
            real: false,
        })
    }

    pub fn real<V, D>(value: V, derivative: D, support: (f64, f64)) -> Result<Self>
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_support(support)?;
        Ok(Self {
            value: Arc::new(move |x| Complex64::new(value(x), 0.0)),
            derivative: Arc::new(move |x| Complex64::new(derivative(x), 0.0)),
            support,
            breakpoints: Vec::new(),
            real: true,
        })
    }

    /// `height · b((x - center)/halfwidth)` with `b` the unit-mass standard
    /// bump rescaled to peak 1.
    pub fn bump(center: f64, halfwidth: f64, height: f64) -> Result<Self> {
        if !(halfwidth > 0.0) {
            return Err(Error::ConfigInvalid("bump halfwidth must be positive".into()));
        }
        let peak = bump_pdf(0.0);
        let value = move |x: f64| height * bump_pdf((x - center) / halfwidth) / peak;
        let derivative = move |x: f64| {
            let s = (x - center) / halfwidth;
            if s.abs() >= 1.0 {
                0.0
            } else {
                let d = 1.0 - s * s;
                height * bump_pdf(s) / peak * (-2.0 * s / (d * d)) / halfwidth
            }
        };
        Self::real(value, derivative, (center - halfwidth, center + halfwidth))
    }

    /// Smooth plateau: 0 outside `[lo, hi]`, `height` on `[lo + ramp, hi - ramp]`.
    pub fn plateau(lo: f64, hi: f64, ramp: f64, height: f64) -> Result<Self> {
        if !(ramp > 0.0 && lo + 2.0 * ramp <= hi) {
            return Err(Error::ConfigInvalid("plateau ramps do not fit the support".into()));
        }
        let value =
            move |x: f64| height * smooth_step((x - lo) / ramp) * smooth_step((hi - x) / ramp);
        let derivative = move |x: f64| {
            let up = (x - lo) / ramp;
            let down = (hi - x) / ramp;
            height
                * (smooth_step_derivative(up) * smooth_step(down)
                    - smooth_step(up) * smooth_step_derivative(down))
                / ramp
        };
        Ok(Self::real(value, derivative, (lo, hi))?.with_breakpoints(vec![lo + ramp, hi - ramp]))
    }

    pub fn with_breakpoints(mut self, mut breakpoints: Vec<f64>) -> Self {
        breakpoints.retain(|b| *b > self.support.0 && *b < self.support.1);
        self.breakpoints.extend(breakpoints);
        self.breakpoints.sort_by(f64::total_cmp);
        self.breakpoints.dedup();
        self
    }

    pub fn value(&self, x: f64) -> Complex64 {
        if x < self.support.0 || x > self.support.1 {
            Complex64::new(0.0, 0.0)
        } else {
            (self.value)(x)
        }
    }

    pub fn derivative(&self, x: f64) -> Complex64 {
        if x < self.support.0 || x > self.support.1 {
            Complex64::new(0.0, 0.0)
        } else {
            (self.derivative)(x)
        }
    }

    pub fn re(&self, x: f64) -> f64 {
        self.value(x).re
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// True when the function was built from real-valued parts.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// `e^{iλx} · self`.
    pub fn modulated(&self, lambda: f64) -> Self {
        let inner = self.clone();
        let inner_d = self.clone();
        Self {
            value: Arc::new(move |x| Complex64::new(0.0, lambda * x).exp() * inner.value(x)),
            derivative: Arc::new(move |x| {
                let phase = Complex64::new(0.0, lambda * x).exp();
                phase * (inner_d.derivative(x) + Complex64::new(0.0, lambda) * inner_d.value(x))
            }),
            support: self.support,
            breakpoints: self.breakpoints.clone(),
            real: lambda == 0.0 && self.real,
        }
    }

    pub fn translated(&self, shift: f64) -> Self {
        let inner = self.clone();
        let inner_d = self.clone();
        Self {
            value: Arc::new(move |x| inner.value(x - shift)),
            derivative: Arc::new(move |x| inner_d.derivative(x - shift)),
            support: (self.support.0 + shift, self.support.1 + shift),
            breakpoints: self.breakpoints.iter().map(|b| b + shift).collect(),
            real: self.real,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let inner = self.clone();
        let inner_d = self.clone();
        Self {
            value: Arc::new(move |x| inner.value(x) * factor),
            derivative: Arc::new(move |x| inner_d.derivative(x) * factor),
            support: self.support,
            breakpoints: self.breakpoints.clone(),
            real: self.real,
        }
    }

    pub fn sum(&self, other: &TestFunction) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let (ad, bd) = (self.clone(), other.clone());
        let support = (
            self.support.0.min(other.support.0),
            self.support.1.max(other.support.1),
        );
        let mut bps = self.breakpoints.clone();
        bps.extend_from_slice(&other.breakpoints);
        // support edges of each summand are interior points of the union
        bps.extend([self.support.0, self.support.1, other.support.0, other.support.1]);
        Self {
            value: Arc::new(move |x| a.value(x) + b.value(x)),
            derivative: Arc::new(move |x| ad.derivative(x) + bd.derivative(x)),
            support,
            breakpoints: Vec::new(),
            real: self.real && other.real,
        }
        .with_breakpoints(bps)
    }

    /// Checks the derivative against central differences at `samples`
    /// interior points, and that the function vanishes just outside the
    /// support. Returns the worst relative mismatch.
    pub fn check_consistency(&self, samples: usize, rel_tol: f64) -> Result<f64> {
        let (lo, hi) = self.support;
        let width = hi - lo;
        let scale = (0..=samples)
            .map(|i| self.derivative(lo + width * i as f64 / samples as f64).norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 1..samples {
            let x = lo + width * i as f64 / samples as f64;
            let h = 1e-5 * width.min(1.0);
            let fd = (8.0 * (self.value(x + h) - self.value(x - h))
                - (self.value(x + 2.0 * h) - self.value(x - 2.0 * h)))
                / (12.0 * h);
            let d = self.derivative(x);
            let mismatch = (fd - d).norm() / scale;
            worst = worst.max(mismatch);
            if mismatch > rel_tol {
                return Err(Error::DerivativeMismatch {
                    x,
                    supplied: d.re,
                    finite_difference: fd.re,
                });
            }
        }
        for x in [lo - 1e-9 * width.max(1.0), hi + 1e-9 * width.max(1.0)] {
            if self.value(x).norm() != 0.0 {
                return Err(Error::ConfigInvalid(format!(
                    "test function does not vanish outside its support at {x}"
                )));
            }
        }
        Ok(worst)
    }
}

fn check_support(support: (f64, f64)) -> Result<()> {
    if !(support.0 < support.1) || !support.0.is_finite() || !support.1.is_finite() {
        return Err(Error::ConfigInvalid(format!(
            "support must be a finite interval, got {support:?}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_consistent() {
        let b = TestFunction::bump(1.0, 0.5, 2.0).unwrap();
        assert!((b.re(1.0) - 2.0).abs() < 1e-14);
        assert_eq!(b.re(1.6), 0.0);
        assert!(b.check_consistency(200, 1e-6).is_ok());
    }

    #[test]
    fn plateau_and_modulation_are_consistent() {
        let p = TestFunction::plateau(0.0, 5.0, 1.0, 1.0).unwrap();
        assert_eq!(p.re(2.5), 1.0);
        assert!(p.check_consistency(500, 1e-6).is_ok());
        let m = p.modulated(3.0);
        assert!(!m.is_real());
        assert!((m.value(2.5).norm() - 1.0).abs() < 1e-14);
        assert!(m.check_consistency(500, 1e-6).is_ok());
    }

    #[test]
    fn wrong_derivative_is_caught() {
        let f = TestFunction::real(
            |x: f64| (1.0 - x * x).max(0.0).powi(3),
            |x: f64| 3.0 * (1.0 - x * x).max(0.0).powi(2) * x, // sign flipped
            (-1.0, 1.0),
        )
        .unwrap();
        assert!(matches!(
            f.check_consistency(100, 1e-6),
            Err(Error::DerivativeMismatch { .. })
        ));
    }

    #[test]
    fn sum_of_disjoint_pieces() {
        let a = TestFunction::bump(0.0, 1.0, 1.0).unwrap();
        let b = TestFunction::bump(5.0, 1.0, 2.0).unwrap();
        let s = a.sum(&b);
        assert_eq!(s.support(), (-1.0, 6.0));
        assert!((s.re(5.0) - 2.0).abs() < 1e-14);
        assert!(s.breakpoints().contains(&1.0) && s.breakpoints().contains(&4.0));
    }
}
