use serde::{Deserialize, Serialize};

use crate::coefficients::Density;
use crate::error::{Error, Result};

/// Default sampling density of grid windows (points per unit length).
pub const DEFAULT_POINTS_PER_UNIT: usize = 4096;

/// A uniform sampling window `[lo, hi]` with `points` samples, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Window {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::ConfigInvalid(format!(
                "window needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        if points < 2 {
            return Err(Error::ConfigInvalid("window needs at least 2 points".into()));
        }
        Ok(Self { lo, hi, points })
    }

    /// Window at [`DEFAULT_POINTS_PER_UNIT`] resolution.
    pub fn with_default_resolution(lo: f64, hi: f64) -> Result<Self> {
        let points = ((hi - lo) * DEFAULT_POINTS_PER_UNIT as f64).ceil() as usize + 1;
        Self::new(lo, hi, points.max(2))
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.hi
        } else {
            self.lo + self.spacing() * i as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.point(i))
    }
}

/// Samples on a uniform grid; the function is zero outside `[x_lo, x_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    x_lo: f64,
    x_hi: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(x_lo: f64, x_hi: f64, values: Vec<f64>) -> Result<Self> {
        if !(x_lo < x_hi) {
            return Err(Error::ConfigInvalid(format!(
                "grid needs x_lo < x_hi, got [{x_lo}, {x_hi}]"
            )));
        }
        if values.len() < 2 {
            return Err(Error::ConfigInvalid("grid needs at least 2 samples".into()));
        }
        Ok(Self {
            x_lo,
            x_hi,
            values,
        })
    }

    pub fn sample(window: &Window, f: impl Fn(f64) -> f64) -> Self {
        Self {
            x_lo: window.lo,
            x_hi: window.hi,
            values: window.points().map(f).collect(),
        }
    }

    pub fn try_sample(window: &Window, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = window.points().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            x_lo: window.lo,
            x_hi: window.hi,
            values,
        })
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.values.len() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.values.len() {
            self.x_hi
        } else {
            self.x_lo + self.spacing() * i as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, v)| (self.x(i), *v))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise difference; both grids must share their layout.
    pub fn max_abs_difference(&self, other: &GridFunction) -> Result<f64> {
        if self.values.len() != other.values.len()
            || self.x_lo != other.x_lo
            || self.x_hi != other.x_hi
        {
            return Err(Error::ConfigInvalid("grid layouts differ".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }
}

/// An exponent p ∈ [1, ∞] together with its dual q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpExponent {
    p: f64,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::ConfigInvalid(format!("L_p exponent must be in [1, ∞], got {p}")));
        }
        Ok(Self { p })
    }

    pub fn infinity() -> Self {
        Self { p: f64::INFINITY }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Dual exponent q with 1/p + 1/q = 1.
    pub fn q(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else if self.p.is_infinite() {
            1.0
        } else {
            self.p / (self.p - 1.0)
        }
    }

    pub fn dual(&self) -> Self {
        Self { p: self.q() }
    }

    pub fn is_infinite(&self) -> bool {
        self.p.is_infinite()
    }

    /// `1/p`, zero for p = ∞.
    pub fn reciprocal(&self) -> f64 {
        if self.p.is_infinite() {
            0.0
        } else {
            1.0 / self.p
        }
    }
}

/// Weighted `L_p(ρ dx)` norm of a grid function, by the composite trapezoid
/// rule over the grid; the maximum of `|values|` when p = ∞.
pub fn lp_norm(phi: &GridFunction, p: LpExponent, rho: &Density) -> f64 {
    if p.is_infinite() {
        return phi.sup_norm();
    }
    let h = phi.spacing();
    let n = phi.len();
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (i, (x, v)) in phi.iter().enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let term = w * rho.rho(x) * v.abs().powf(p.p()) - comp;
        let t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    (sum * h).powf(1.0 / p.p())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_points() {
        let w = Window::new(0.0, 1.0, 5).unwrap();
        assert_eq!(w.spacing(), 0.25);
        assert_eq!(w.points().collect::<Vec<_>>(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Window::new(1.0, 1.0, 5).is_err());
        assert!(Window::new(0.0, 1.0, 1).is_err());
        let w = Window::with_default_resolution(0.0, 2.0).unwrap();
        assert_eq!(w.points, 8193);
    }

    #[test]
    fn exponent_duality() {
        let p = LpExponent::new(4.0).unwrap();
        assert!((1.0 / p.p() + 1.0 / p.q() - 1.0).abs() < 1e-15);
        assert_eq!(LpExponent::new(1.0).unwrap().q(), f64::INFINITY);
        assert_eq!(LpExponent::infinity().q(), 1.0);
        assert!(LpExponent::new(0.5).is_err());
        assert!(LpExponent::new(f64::NAN).is_err());
    }

    #[test]
    fn hat_sup_norm() {
        let w = Window::new(-0.5, 1.5, 4001).unwrap();
        let hat = GridFunction::sample(&w, |x| (1.0 - (2.0 * x - 1.0).abs()).max(0.0));
        let v = lp_norm(&hat, LpExponent::infinity(), &Density::uniform());
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn indicator_l2() {
        let w = Window::new(0.0, 1.0, 4097).unwrap();
        let ind = GridFunction::sample(&w, |_| 1.0);
        let v = lp_norm(&ind, LpExponent::new(2.0).unwrap(), &Density::uniform());
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_l2_is_pi_to_the_quarter() {
        let w = Window::with_default_resolution(-10.0, 10.0).unwrap();
        let g = GridFunction::sample(&w, |x| (-x * x / 2.0).exp());
        let v = lp_norm(&g, LpExponent::new(2.0).unwrap(), &Density::uniform());
        // ∫ e^{-x²} = √π
        assert!((v - std::f64::consts::PI.powf(0.25)).abs() < 1e-12, "{v}");
        assert!((v - 1.331_335_363_800_389_7).abs() < 1e-12);
    }
}
