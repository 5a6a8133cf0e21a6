//! Factorial plateaus: `a` drops to `1/n!` on short intervals around points
//! `y_n` that sit at intrinsic distance exactly 1 from one another.
//!
//! Layout (all n ≥ 0, `h_n = 1/n!`, `w_n = h_n / 8`):
//!
//! * region n is `[r_n, r_{n+1})` with `r_n = y_n - h_n/4 - 1/4`;
//! * on it `1/a = 1 + (1/h_n - 1) (G((x - y_n + h_n/4)/w_n) - G((x - y_n - h_n/4)/w_n))`,
//!   the step `1/h_n · 1[|x - y_n| < h_n/4]` mollified by a bump of half-width
//!   `w_n` (`G` is that bump's distribution function);
//! * every region has intrinsic length exactly 1, and `∫_0^{y_n} a⁻¹ = n`.
//!
//! Past `n_max` the pattern is frozen: plateaus keep height `h_{n_max}`.

use crate::coefficients::{Coefficient, CoefficientModel};
use crate::error::{Error, Result};
use crate::numerics::invert_monotone_newton;
use crate::numerics::profiles::{bump_cdf, bump_cdf_integral, bump_pdf};

/// Plateau indices above this lose resolution in double precision: the
/// mollifier width `1/(8 n!)` approaches the spacing of floats near `y_n`.
pub const MAX_PLATEAU_INDEX: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct Example41Spec {
    n_max: usize,
    heights: Vec<f64>,
    centers: Vec<f64>,
}

impl Example41Spec {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::ConfigInvalid("n_max must be at least 2".into()));
        }
        if n_max > MAX_PLATEAU_INDEX {
            return Err(Error::ConfigInvalid(format!(
                "n_max = {n_max} exceeds {MAX_PLATEAU_INDEX}; plateaus would be narrower than float resolution"
            )));
        }
        let mut heights = Vec::with_capacity(n_max + 1);
        let mut factorial = 1.0f64;
        for n in 0..=n_max {
            if n > 0 {
                factorial *= n as f64;
            }
            heights.push(1.0 / factorial);
        }
        let mut centers = vec![0.0];
        for n in 0..n_max {
            let next = centers[n] + 0.25 * (heights[n] + heights[n + 1]) + 0.5;
            centers.push(next);
        }
        Ok(Self {
            n_max,
            heights,
            centers,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `h_n = 1/n!`.
    pub fn height(&self, n: usize) -> Result<f64> {
        self.heights
            .get(n)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: n,
                max: self.n_max,
            })
    }

    /// Plateau center `y_n`.
    pub fn center(&self, n: usize) -> Result<f64> {
        self.centers
            .get(n)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: n,
                max: self.n_max,
            })
    }

    /// `I_n = [y_n - h_n/8, y_n + h_n/8]`, where `a = h_n` exactly.
    pub fn core_interval(&self, n: usize) -> Result<(f64, f64)> {
        let (y, h) = (self.center(n)?, self.height(n)?);
        Ok((y - h / 8.0, y + h / 8.0))
    }

    pub fn mollifier_halfwidth(&self, n: usize) -> Result<f64> {
        Ok(self.height(n)? / 8.0)
    }

    fn region_start(&self, n: usize) -> f64 {
        // valid for n ≤ n_max + 1
        let m = n.min(self.n_max);
        let base = self.centers[m] - self.heights[m] / 4.0 - 0.25;
        if n <= self.n_max {
            base
        } else {
            base + 0.5 * (self.heights[self.n_max] + 1.0)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Region {
    index: usize,
    start: f64,
    center: f64,
    height: f64,
}

impl Region {
    fn halfwidth(&self) -> f64 {
        self.height / 8.0
    }

    fn offsets(&self, x: f64) -> (f64, f64) {
        let w = self.halfwidth();
        (
            (x - (self.center - self.height / 4.0)) / w,
            (x - (self.center + self.height / 4.0)) / w,
        )
    }
}

#[derive(Debug, Clone)]
pub struct FactorialPlateaus {
    spec: Example41Spec,
    starts: Vec<f64>,
}

impl FactorialPlateaus {
    pub fn new(spec: Example41Spec) -> Self {
        let starts = (0..=spec.n_max + 1).map(|n| spec.region_start(n)).collect();
        Self { spec, starts }
    }

    pub fn spec(&self) -> &Example41Spec {
        &self.spec
    }

    fn region(&self, x: f64) -> Option<Region> {
        if x < self.starts[0] {
            return None;
        }
        let n_max = self.spec.n_max;
        let last = self.starts[n_max + 1];
        if x >= last {
            let h = self.spec.heights[n_max];
            let period = 0.5 * (h + 1.0);
            let k = ((x - last) / period).floor();
            let start = last + k * period;
            return Some(Region {
                index: n_max + 1 + k as usize,
                start,
                center: start + h / 4.0 + 0.25,
                height: h,
            });
        }
        let index = self.starts.partition_point(|s| *s <= x) - 1;
        Some(Region {
            index,
            start: self.starts[index],
            center: self.spec.centers[index],
            height: self.spec.heights[index],
        })
    }

    fn region_by_index(&self, index: usize) -> Region {
        let n_max = self.spec.n_max;
        if index <= n_max {
            return Region {
                index,
                start: self.starts[index],
                center: self.spec.centers[index],
                height: self.spec.heights[index],
            };
        }
        let h = self.spec.heights[n_max];
        let start = self.starts[n_max + 1] + (index - n_max - 1) as f64 * 0.5 * (h + 1.0);
        Region {
            index,
            start,
            center: start + h / 4.0 + 0.25,
            height: h,
        }
    }

    fn reciprocal(&self, x: f64) -> f64 {
        let Some(r) = self.region(x) else { return 1.0 };
        if r.height == 1.0 {
            return 1.0;
        }
        let (u1, u2) = r.offsets(x);
        if u1 >= 1.0 && u2 <= -1.0 {
            return 1.0 / r.height;
        }
        1.0 + (1.0 / r.height - 1.0) * (bump_cdf(u1) - bump_cdf(u2))
    }

    fn time(&self, x: f64) -> f64 {
        let Some(r) = self.region(x) else { return x };
        let base = r.index as f64 - 0.5 + (x - r.start);
        if r.height == 1.0 {
            return base;
        }
        let (u1, u2) = r.offsets(x);
        if u1 >= 1.0 && u2 <= -1.0 {
            return r.index as f64 + (x - r.center) / r.height;
        }
        if u1 <= -1.0 {
            return base;
        }
        if u2 >= 1.0 {
            return base + 0.5 * (1.0 - r.height);
        }
        base + (1.0 / r.height - 1.0)
            * r.halfwidth()
            * (bump_cdf_integral(u1) - bump_cdf_integral(u2))
    }

    fn time_inverse(&self, time: f64) -> Result<f64> {
        if time < -0.5 {
            return Ok(time);
        }
        let index = (time + 0.5).floor() as usize;
        let r = self.region_by_index(index);
        let local = time - index as f64;
        let h = r.height;
        if h == 1.0 {
            return Ok(r.start + local + 0.5);
        }
        if local.abs() <= 0.125 {
            return Ok(r.center + local * h);
        }
        // connectors, where a = 1
        let left = r.start + local + 0.5;
        if left <= r.center - 3.0 * h / 8.0 {
            return Ok(left);
        }
        let right = r.start + local + 0.5 - 0.5 * (1.0 - h);
        if right >= r.center + 3.0 * h / 8.0 {
            return Ok(right);
        }
        let bracket = if local < 0.0 {
            (r.center - 3.0 * h / 8.0, r.center - h / 8.0)
        } else {
            (r.center + h / 8.0, r.center + 3.0 * h / 8.0)
        };
        invert_monotone_newton(
            |x| Ok(self.time(x)),
            |x| self.reciprocal(x),
            time,
            bracket,
            None,
            0.0,
            1e-14 * time.abs().max(1.0),
        )
    }
}

impl CoefficientModel for FactorialPlateaus {
    fn a(&self, x: f64) -> f64 {
        match self.region(x) {
            Some(r) if r.height < 1.0 => {
                let (u1, u2) = r.offsets(x);
                if u1 >= 1.0 && u2 <= -1.0 {
                    r.height
                } else {
                    1.0 / self.reciprocal(x)
                }
            }
            _ => 1.0,
        }
    }

    fn da(&self, x: f64) -> f64 {
        let Some(r) = self.region(x) else { return 0.0 };
        if r.height == 1.0 {
            return 0.0;
        }
        let (u1, u2) = r.offsets(x);
        if (u1 >= 1.0 && u2 <= -1.0) || u1 <= -1.0 || u2 >= 1.0 {
            return 0.0;
        }
        let d_recip = (1.0 / r.height - 1.0) * (bump_pdf(u1) - bump_pdf(u2)) / r.halfwidth();
        let a = 1.0 / self.reciprocal(x);
        -d_recip * a * a
    }

    fn features(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let (Some(first), Some(last)) = (self.region(lo.max(self.starts[0])), self.region(hi))
        else {
            return out;
        };
        for index in first.index..=last.index {
            let r = self.region_by_index(index);
            if r.height == 1.0 {
                continue;
            }
            let h = r.height;
            for k in [-3.0, -1.0, 0.0, 1.0, 3.0] {
                out.push(r.center + k * h / 8.0);
            }
        }
        out
    }

    fn reciprocal_integral(&self, x: f64) -> Option<f64> {
        Some(self.time(x))
    }

    fn reciprocal_integral_inverse(&self, time: f64) -> Option<Result<f64>> {
        Some(self.time_inverse(time))
    }

    fn label(&self) -> String {
        format!("factorial plateaus (n_max = {})", self.spec.n_max)
    }
}

pub fn make_example_factorial(spec: Example41Spec) -> Result<Coefficient> {
    Ok(Coefficient::from_model(FactorialPlateaus::new(spec)))
}
