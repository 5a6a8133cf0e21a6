//! Smooth compactly supported building blocks.
//!
//! Everything here is derived from two C^∞ primitives: the transition
//! `S(x) = e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)})` from 0 (at x ≤ 0) to 1
//! (at x ≥ 1), and the normalized bump `exp(-1/(1-s²))` on [-1, 1].

use std::sync::OnceLock;

use super::quadrature::{fine_rule, fixed_rule};

/// Smooth transition from 0 on (-∞, 0] to 1 on [1, ∞).
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let z = 1.0 / x - 1.0 / (1.0 - x);
        1.0 / (1.0 + z.exp())
    }
}

pub fn smooth_step_derivative(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        let s = smooth_step(x);
        s * (1.0 - s) * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x)))
    }
}

/// `∫_0^x S`.
pub fn smooth_step_integral(x: f64) -> f64 {
    static TABLE: OnceLock<CumulativeTable> = OnceLock::new();
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        // ∫_0^1 S = 1/2 by the symmetry S(x) + S(1 - x) = 1
        return 0.5 + (x - 1.0);
    }
    TABLE
        .get_or_init(|| CumulativeTable::new(smooth_step, 0.0, 1.0, 128))
        .eval(x)
}

fn bump_raw(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

fn bump_norm() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| CumulativeTable::new(bump_raw, -1.0, 1.0, 256).total())
}

/// Standard bump on [-1, 1], normalized to unit mass.
pub fn bump_pdf(s: f64) -> f64 {
    bump_raw(s) / bump_norm()
}

/// `G(u) = ∫_{-1}^u bump_pdf`.
pub fn bump_cdf(u: f64) -> f64 {
    static TABLE: OnceLock<CumulativeTable> = OnceLock::new();
    if u <= -1.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    if u > 0.0 {
        return 1.0 - bump_cdf(-u);
    }
    TABLE
        .get_or_init(|| CumulativeTable::new(bump_pdf, -1.0, 1.0, 256))
        .eval(u)
}

/// `M(u) = ∫_{-1}^u s · bump_pdf(s) ds`; even in u, zero at ±1.
fn bump_first_moment(u: f64) -> f64 {
    static TABLE: OnceLock<CumulativeTable> = OnceLock::new();
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let u = -u.abs();
    TABLE
        .get_or_init(|| CumulativeTable::new(|s| s * bump_pdf(s), -1.0, 1.0, 256))
        .eval(u)
}

/// `F(u) = ∫_{-1}^u G`. Equals 0 below -1 and `u` above 1.
pub fn bump_cdf_integral(u: f64) -> f64 {
    if u <= -1.0 {
        0.0
    } else if u >= 1.0 {
        u
    } else {
        u * bump_cdf(u) - bump_first_moment(u)
    }
}

/// Cumulative integrals of a smooth function at uniform knots, refined at
/// evaluation time with a 20-point rule on the partial cell.
struct CumulativeTable {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    lo: f64,
    step: f64,
    cumulative: Vec<f64>,
}

impl CumulativeTable {
    fn new<F>(f: F, lo: f64, hi: f64, cells: usize) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let step = (hi - lo) / cells as f64;
        let rule = fine_rule();
        let mut cumulative = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for k in 0..cells {
            let a = lo + step * k as f64;
            acc += fixed_rule(&f, a, a + step, rule).expect("profile integrands are finite");
            cumulative.push(acc);
        }
        Self {
            f: Box::new(f),
            lo,
            step,
            cumulative,
        }
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn eval(&self, x: f64) -> f64 {
        let cells = self.cumulative.len() - 1;
        let k = (((x - self.lo) / self.step).floor().max(0.0) as usize).min(cells - 1);
        let a = self.lo + self.step * k as f64;
        let f = &self.f;
        self.cumulative[k] + fixed_rule(&|s| f(s), a, x, fine_rule()).unwrap_or(0.0)
    }
}

/// The ramp profile χ used by the bump-train coefficient: C^∞, nondecreasing,
/// 0 on (-∞, 0], equal to x on [1, 2] and 3 on [3, ∞).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Chi;

impl Chi {
    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x < 1.0 {
            x * smooth_step(x)
        } else if x <= 2.0 {
            x
        } else if x < 3.0 {
            3.0 - (3.0 - x) * smooth_step(3.0 - x)
        } else {
            3.0
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= 3.0 {
            0.0
        } else if x < 1.0 {
            smooth_step(x) + x * smooth_step_derivative(x)
        } else if x <= 2.0 {
            1.0
        } else {
            let y = 3.0 - x;
            smooth_step(y) + y * smooth_step_derivative(y)
        }
    }

    /// Points where the piecewise formula changes.
    pub fn breakpoints(&self) -> [f64; 4] {
        [0.0, 1.0, 2.0, 3.0]
    }

    /// `‖χ'‖_∞`, located by a dense scan on (0, 1) and golden-section refinement.
    pub fn derivative_sup(&self) -> f64 {
        static SUP: OnceLock<f64> = OnceLock::new();
        *SUP.get_or_init(|| {
            let n = 4000;
            let (mut best_x, mut best) = (0.5, 0.0);
            for i in 1..n {
                let x = i as f64 / n as f64;
                let v = Chi.derivative(x);
                if v > best {
                    best = v;
                    best_x = x;
                }
            }
            let (mut a, mut b) = (best_x - 1.0 / n as f64, best_x + 1.0 / n as f64);
            let r = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let c = b - r * (b - a);
                let d = a + r * (b - a);
                if Chi.derivative(c) > Chi.derivative(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            Chi.derivative(0.5 * (a + b)).max(best)
        })
    }
}

/// Cutoff used by the contraction probe: equal to 1 on [0, 1], decreasing to
/// 0 at 4, extended evenly.
pub fn probe_taper(y: f64) -> f64 {
    let y = y.abs();
    1.0 - smooth_step((y - 1.0) / 3.0)
}

/// Derivative of [`probe_taper`] for y ≥ 0.
pub fn probe_taper_derivative(y: f64) -> f64 {
    let s = y.signum();
    -s * smooth_step_derivative((y.abs() - 1.0) / 3.0) / 3.0
}

/// Window supported in (-1, 4) and equal to 1 on [0, 3].
pub fn plateau_window(x: f64) -> f64 {
    smooth_step(x + 1.0) * (1.0 - smooth_step(x - 3.0))
}

pub fn plateau_window_derivative(x: f64) -> f64 {
    smooth_step_derivative(x + 1.0) * (1.0 - smooth_step(x - 3.0))
        - smooth_step(x + 1.0) * smooth_step_derivative(x - 3.0)
}
