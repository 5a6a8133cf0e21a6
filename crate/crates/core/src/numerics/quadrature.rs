//! Adaptive panel quadrature.
//!
//! Every panel is integrated with a fixed Gauss–Legendre rule, once over the
//! whole panel and once over each half. The difference between the two is the
//! panel's error estimate (step-halving, Richardson style) and the two-half
//! value is kept. The panel with the largest estimate is split until the
//! global estimate meets `max(abs_tol, rel_tol * |I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PANEL_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Tight settings used for short, smooth integrals inside flow evaluation.
    pub fn tight() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_subdivisions: 400,
        }
    }

    pub fn with_tolerance(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_subdivisions(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::ConfigInvalid(
                "quadrature tolerances must be strictly positive".into(),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::ConfigInvalid(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Values the adaptive scheme can integrate: reals and complex numbers.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub(crate) fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

pub(crate) fn fine_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// Applies a fixed rule on [lo, hi]. Non-finite samples are reported.
pub(crate) fn fixed_rule<T, F>(f: &F, lo: f64, hi: f64, rule: &(Vec<f64>, Vec<f64>)) -> Result<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = T::default();
    for (node, weight) in rule.0.iter().zip(&rule.1) {
        let x = mid + half * node;
        let v = f(x);
        if !v.is_finite_value() {
            return Err(Error::NonFinite { x });
        }
        acc = acc + v * *weight;
    }
    Ok(acc * half)
}

#[derive(Clone, Copy)]
struct Panel<T> {
    lo: f64,
    hi: f64,
    left: T,
    right: T,
    error: f64,
}

impl<T: QuadValue> Panel<T> {
    fn build<F: Fn(f64) -> T>(f: &F, lo: f64, hi: f64, whole: T) -> Result<Self> {
        let rule = panel_rule();
        let mid = 0.5 * (lo + hi);
        let left = fixed_rule(f, lo, mid, rule)?;
        let right = fixed_rule(f, mid, hi, rule)?;
        let error = ((left + right) - whole).magnitude();
        Ok(Self {
            lo,
            hi,
            left,
            right,
            error,
        })
    }

    fn value(&self) -> T {
        self.left + self.right
    }

    fn splittable(&self) -> bool {
        let mid = 0.5 * (self.lo + self.hi);
        mid > self.lo && mid < self.hi
    }
}

struct HeapEntry {
    error: f64,
    index: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Estimate of the integral of `f` over [lo, hi].
pub fn integrate<F>(f: F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_with_breaks(f, lo, hi, &[], cfg)
}

/// Like [`integrate`], with interior points where the integrand has kinks or
/// rapid transitions. Points outside (lo, hi) are ignored.
pub fn integrate_with_breaks<T, F>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    Ok(integrate_detailed(f, lo, hi, breaks, cfg)?.value)
}

pub fn integrate_detailed<T, F>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    cfg.validate()?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::ConfigInvalid(format!(
            "integration bounds must be finite, got [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(QuadratureResult {
            value: T::default(),
            error_estimate: 0.0,
            subdivisions: 0,
            evaluations: 0,
        });
    }
    if lo > hi {
        let mut res = integrate_detailed(f, hi, lo, breaks, cfg)?;
        res.value = res.value * -1.0;
        return Ok(res);
    }

    let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    cuts.push(lo);
    cuts.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    // A few extra panels when the caller gave no structure, so a narrow
    // feature is less likely to slip between the nodes of a single panel.
    let per_piece = if cuts.len() <= 3 { 4 } else { 1 };

    let rule = panel_rule();
    let mut panels: Vec<Panel<T>> = Vec::new();
    let mut evaluations = 0usize;
    for w in cuts.windows(2) {
        let width = (w[1] - w[0]) / per_piece as f64;
        for k in 0..per_piece {
            let a = w[0] + width * k as f64;
            let b = if k + 1 == per_piece { w[1] } else { a + width };
            let whole = fixed_rule(&f, a, b, rule)?;
            panels.push(Panel::build(&f, a, b, whole)?);
            evaluations += 3 * PANEL_ORDER;
        }
    }

    let mut heap: BinaryHeap<HeapEntry> = panels
        .iter()
        .enumerate()
        .map(|(index, p)| HeapEntry {
            error: p.error,
            index,
        })
        .collect();
    let mut total_err: f64 = panels.iter().map(|p| p.error).sum();
    let mut total: T = panels.iter().fold(T::default(), |acc, p| acc + p.value());
    let mut subdivisions = 0usize;

    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.magnitude());
        if total_err <= tol {
            // Running sums drift; confirm against a fresh sum before stopping.
            total_err = panels.iter().map(|p| p.error).sum();
            total = sum_panels(&panels);
            if total_err <= cfg.abs_tol.max(cfg.rel_tol * total.magnitude()) {
                break;
            }
        }
        let Some(top) = heap.pop() else { break };
        let panel = panels[top.index];
        if subdivisions >= cfg.max_subdivisions || !panel.splittable() {
            return Err(Error::SubdivisionLimit {
                limit: cfg.max_subdivisions,
                estimate: total.magnitude(),
                error_estimate: total_err,
            });
        }
        subdivisions += 1;
        let mid = 0.5 * (panel.lo + panel.hi);
        let left = Panel::build(&f, panel.lo, mid, panel.left)?;
        let right = Panel::build(&f, mid, panel.hi, panel.right)?;
        evaluations += 4 * PANEL_ORDER;
        total_err += left.error + right.error - panel.error;
        total = total + (left.value() + right.value()) - panel.value();
        panels[top.index] = left;
        heap.push(HeapEntry {
            error: left.error,
            index: top.index,
        });
        panels.push(right);
        heap.push(HeapEntry {
            error: right.error,
            index: panels.len() - 1,
        });
    }

    Ok(QuadratureResult {
        value: sum_panels(&panels),
        error_estimate: panels.iter().map(|p| p.error).sum(),
        subdivisions,
        evaluations,
    })
}

/// Panel values summed in ascending position with compensated summation, so
/// the result does not depend on refinement order.
fn sum_panels<T: QuadValue>(panels: &[Panel<T>]) -> T {
    let mut order: Vec<usize> = (0..panels.len()).collect();
    order.sort_by(|&a, &b| panels[a].lo.total_cmp(&panels[b].lo));
    let mut sum = T::default();
    let mut comp = T::default();
    for i in order {
        let v = panels[i].value();
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}
