//! Bump train: `a = 1 + Σ_{n≥1} χ(n(x - 16n)) - χ(n(x - 16n - 8))`.
//!
//! Term n rises from 1 to 4 over `[16n, 16n + 3/n]` and falls back over
//! `[16n + 8, 16n + 8 + 3/n]`. Supports of distinct terms are disjoint, so
//! at most one term is active at any point.

use crate::coefficients::{Coefficient, CoefficientModel};
use crate::error::{Error, Result};
use crate::numerics::profiles::Chi;

#[derive(Debug, Clone, PartialEq)]
pub struct Example42Spec {
    n_terms: usize,
    chi: Chi,
}

impl Example42Spec {
    pub fn new(n_terms: usize) -> Result<Self> {
        if n_terms < 1 {
            return Err(Error::ConfigInvalid("n_terms must be at least 1".into()));
        }
        let spec = Self { n_terms, chi: Chi };
        spec.check_chi(20_001)?;
        Ok(spec)
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn chi(&self) -> &Chi {
        &self.chi
    }

    /// Right end of the materialized range, `16(n_terms + 1)`.
    pub fn limit(&self) -> f64 {
        16.0 * (self.n_terms + 1) as f64
    }

    /// Start of the rising ramp of term n.
    pub fn rise(&self, n: usize) -> f64 {
        16.0 * n as f64
    }

    /// Start of the falling ramp of term n.
    pub fn fall(&self, n: usize) -> f64 {
        16.0 * n as f64 + 8.0
    }

    /// Checks the profile invariants by sampling `[-1, 4]`.
    pub fn check_chi(&self, samples: usize) -> Result<()> {
        let chi = &self.chi;
        let mut prev = chi.value(-1.0);
        for i in 0..samples {
            let x = -1.0 + 5.0 * i as f64 / (samples - 1) as f64;
            let (v, d) = (chi.value(x), chi.derivative(x));
            let fail = |what: &str| Err(Error::ConfigInvalid(format!("χ violates {what} at {x}")));
            if !(0.0..=3.0).contains(&v) {
                return fail("0 ≤ χ ≤ 3");
            }
            if d < 0.0 || v < prev {
                return fail("χ' ≥ 0");
            }
            if x <= 0.0 && v != 0.0 {
                return fail("χ = 0 on x ≤ 0");
            }
            if x >= 3.0 && v != 3.0 {
                return fail("χ = 3 on x ≥ 3");
            }
            if (1.0..=2.0).contains(&x) && v != x {
                return fail("χ(x) = x on [1, 2]");
            }
            prev = v;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BumpTrain {
    spec: Example42Spec,
}

impl BumpTrain {
    pub fn new(spec: Example42Spec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &Example42Spec {
        &self.spec
    }

    fn term(&self, x: f64) -> usize {
        if x < 16.0 {
            0
        } else {
            (x / 16.0).floor() as usize
        }
    }
}

impl CoefficientModel for BumpTrain {
    fn a(&self, x: f64) -> f64 {
        let n = self.term(x);
        if n == 0 {
            return 1.0;
        }
        let k = n as f64;
        let chi = &self.spec.chi;
        1.0 + chi.value(k * (x - self.spec.rise(n))) - chi.value(k * (x - self.spec.fall(n)))
    }

    fn da(&self, x: f64) -> f64 {
        let n = self.term(x);
        if n == 0 {
            return 0.0;
        }
        let k = n as f64;
        let chi = &self.spec.chi;
        k * (chi.derivative(k * (x - self.spec.rise(n)))
            - chi.derivative(k * (x - self.spec.fall(n))))
    }

    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, self.spec.limit())
    }

    fn features(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if !(hi >= 16.0) {
            return out;
        }
        let first = self.term(lo.max(16.0)).max(1);
        let last = self.term(hi).min(self.spec.n_terms);
        for n in first..=last {
            let k = n as f64;
            for base in [self.spec.rise(n), self.spec.fall(n)] {
                for b in self.spec.chi.breakpoints() {
                    out.push(base + b / k);
                }
            }
        }
        out
    }

    fn label(&self) -> String {
        format!("bump train (n_terms = {})", self.spec.n_terms)
    }
}

pub fn make_example_bump_train(spec: Example42Spec) -> Result<Coefficient> {
    Ok(Coefficient::from_model(BumpTrain::new(spec)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train(n: usize) -> Coefficient {
        make_example_bump_train(Example42Spec::new(n).unwrap()).unwrap()
    }

    #[test]
    fn values() {
        let a = train(8);
        assert_eq!(a.a(0.0), 1.0);
        assert_eq!(a.a(-100.0), 1.0);
        // term 3 mid-ramp: χ(3 · 1/3) = χ(1) = 1
        let v = a.a(16.0 * 3.0 + 1.0 / 3.0);
        assert!((v - 2.0).abs() < 1e-14);
        let v = a.a(16.0 * 3.0 + 3.0 / 3.0 * 0.5);
        assert!(v > 1.0 && v < 4.0);
        assert_eq!(a.a(16.0 * 3.0 + 5.0), 4.0);
        assert_eq!(a.a(16.0 * 3.0 + 12.0), 1.0);
        assert!(a.a(16.0 * 9.0 + 1.0).is_nan());
        assert!(matches!(
            a.try_a(16.0 * 9.0 + 1.0),
            Err(Error::OutOfMaterializedRange { .. })
        ));
    }

    #[test]
    fn range_and_signs() {
        let a = train(6);
        let n = 100_000;
        for i in 0..n {
            let x = -8.0 + (16.0 * 7.0 + 8.0) * i as f64 / n as f64;
            if x > 16.0 * 7.0 {
                break;
            }
            let v = a.a(x);
            assert!((1.0..=4.0).contains(&v), "a({x}) = {v}");
            let r = (x / 16.0).floor() * 16.0;
            let d = a.da(x);
            if x - r < 8.0 {
                assert!(d >= 0.0);
            } else {
                assert!(d <= 0.0);
            }
        }
    }

    #[test]
    fn derivative_consistency() {
        let a = train(5);
        for n in 1..=5 {
            let k = n as f64;
            for j in 1..60 {
                let x = 16.0 * k + 8.0 + 3.0 * j as f64 / (60.0 * k);
                let h = 1e-6 / k;
                let fd = (a.a(x + h) - a.a(x - h)) / (2.0 * h);
                assert!((fd - a.da(x)).abs() <= 1e-5 * a.da(x).abs().max(1.0));
            }
        }
    }

    #[test]
    fn features_cover_ramps() {
        let a = train(4);
        let f = a.features(0.0, 40.0);
        // term 1 in full, term 2's rise and the start of its fall
        assert_eq!(f.len(), 13);
        assert!(f.contains(&16.0) && f.contains(&25.0) && f.contains(&33.5));
    }
}
