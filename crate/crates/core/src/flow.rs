//! The flow `e^{tX}` of `ẋ = a(x)`, computed through the time coordinate
//! `A(x) = ∫_anchor^x a⁻¹` as `e^{tX}x = A⁻¹(A(x) + t)`.

use crate::coefficients::Coefficient;
use crate::error::{Error, Result};
use crate::numerics::parallel::par_map;
use crate::numerics::{integrate, integrate_with_breaks, invert_monotone_newton, QuadratureConfig};

/// Half-width of the default tabulated window around the anchor.
pub const DEFAULT_HALF_WINDOW: f64 = 64.0;
const TABLE_STEP: f64 = 0.25;

#[derive(Debug, Clone)]
struct Table {
    xs: Vec<f64>,
    ts: Vec<f64>,
}

/// Monotone time coordinate and its inverse for one coefficient.
///
/// Coefficients with an exact antiderivative of `1/a` use it directly.
/// Otherwise `A` is tabulated on a window (nodes every 0.25 plus the
/// coefficient's feature points) and refined by local quadrature; outside the
/// window quadrature continues from the table ends.
#[derive(Debug, Clone)]
pub struct FlowMap {
    coef: Coefficient,
    anchor: f64,
    anchor_time: f64,
    table: Option<Table>,
    cfg: QuadratureConfig,
}

impl FlowMap {
    pub fn new(coef: &Coefficient) -> Result<Self> {
        Self::with_anchor(coef, 0.0)
    }

    pub fn with_anchor(coef: &Coefficient, anchor: f64) -> Result<Self> {
        let (dlo, dhi) = coef.domain();
        let lo = (anchor - DEFAULT_HALF_WINDOW).max(dlo);
        let mut hi = (anchor + DEFAULT_HALF_WINDOW).min(dhi);
        if dhi.is_finite() {
            hi = dhi;
        }
        Self::with_window(coef, anchor, lo, hi)
    }

    /// Tabulates `A` on `[lo, hi]` (extended to contain the anchor).
    pub fn with_window(coef: &Coefficient, anchor: f64, lo: f64, hi: f64) -> Result<Self> {
        coef.check_domain(anchor)?;
        coef.check_domain(lo)?;
        coef.check_domain(hi)?;
        if !(lo < hi) {
            return Err(Error::ConfigInvalid(format!("flow window [{lo}, {hi}] is empty")));
        }
        let cfg = QuadratureConfig::tight();
        if let Some(t) = coef.reciprocal_integral_hint(anchor) {
            return Ok(Self {
                coef: coef.clone(),
                anchor,
                anchor_time: t,
                table: None,
                cfg,
            });
        }
        let (lo, hi) = (lo.min(anchor), hi.max(anchor));
        let steps = ((hi - lo) / TABLE_STEP).ceil() as usize;
        let mut xs: Vec<f64> = (0..steps).map(|i| lo + TABLE_STEP * i as f64).collect();
        xs.push(hi);
        xs.extend(coef.features(lo, hi));
        xs.push(anchor);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let pieces: Vec<(f64, f64)> = xs.windows(2).map(|w| (w[0], w[1])).collect();
        let increments = par_map(&pieces, |&(a, b)| integrate(|x| 1.0 / coef.a(x), a, b, &cfg));
        let mut ts = Vec::with_capacity(xs.len());
        ts.push(0.0);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for inc in increments {
            let y = inc? - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            ts.push(sum);
        }
        let k = xs.partition_point(|x| *x < anchor);
        let shift = ts[k];
        for t in &mut ts {
            *t -= shift;
        }
        Ok(Self {
            coef: coef.clone(),
            anchor,
            anchor_time: 0.0,
            table: Some(Table { xs, ts }),
            cfg,
        })
    }

    pub fn coefficient(&self) -> &Coefficient {
        &self.coef
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    /// Range of the tabulated window, or the coefficient domain when `A` is exact.
    pub fn window(&self) -> (f64, f64) {
        match &self.table {
            Some(t) => (t.xs[0], *t.xs.last().unwrap()),
            None => self.coef.domain(),
        }
    }

    /// `A(x) = ∫_anchor^x a⁻¹`.
    pub fn time_coordinate(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite { x });
        }
        self.coef.check_domain(x)?;
        let Some(table) = &self.table else {
            let t = self.coef.reciprocal_integral_hint(x).expect("exact coefficient");
            return Ok(t - self.anchor_time);
        };
        let (xs, ts) = (&table.xs, &table.ts);
        let last = xs.len() - 1;
        if x >= xs[0] && x <= xs[last] {
            let i = (xs.partition_point(|v| *v <= x) - 1).min(last - 1);
            if x == xs[i] {
                return Ok(ts[i]);
            }
            let local = integrate(|s| 1.0 / self.coef.a(s), xs[i], x, &self.cfg)?;
            return Ok(ts[i] + local);
        }
        let (base, t0) = if x > xs[last] {
            (xs[last], ts[last])
        } else {
            (xs[0], ts[0])
        };
        let mut breaks = self.coef.features(base.min(x), base.max(x));
        // geometric panel edges keep long tails cheap
        let dir = (x - base).signum();
        let mut step = 1.0;
        while step < (x - base).abs() {
            breaks.push(base + dir * step);
            step *= 2.0;
        }
        let cfg = self.cfg.with_max_subdivisions(20_000);
        let tail = integrate_with_breaks(|s| 1.0 / self.coef.a(s), base, x, &breaks, &cfg)?;
        Ok(t0 + tail)
    }

    /// `A⁻¹(time)`.
    pub fn position(&self, time: f64) -> Result<f64> {
        if !time.is_finite() {
            return Err(Error::NonFinite { x: time });
        }
        if self.table.is_none() {
            let x = self
                .coef
                .reciprocal_integral_inverse_hint(time + self.anchor_time)
                .expect("exact coefficient")?;
            return self.checked_position(x);
        }
        let table = self.table.as_ref().unwrap();
        let (xs, ts) = (&table.xs, &table.ts);
        let last = xs.len() - 1;
        let (bracket, guess) = if time >= ts[0] && time <= ts[last] {
            let i = (ts.partition_point(|t| *t <= time) - 1).min(last - 1);
            if time == ts[i] {
                return Ok(xs[i]);
            }
            let frac = (time - ts[i]) / (ts[i + 1] - ts[i]);
            ((xs[i], xs[i + 1]), Some(xs[i] + frac * (xs[i + 1] - xs[i])))
        } else {
            (self.expand_bracket(time)?, None)
        };
        let f_tol = 1e-14 * time.abs().max(1.0);
        invert_monotone_newton(
            |x| self.time_coordinate(x),
            |x| 1.0 / self.coef.a(x),
            time,
            bracket,
            guess,
            0.0,
            f_tol,
        )
    }

    fn checked_position(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.coef.domain();
        if x < lo || x > hi || !x.is_finite() {
            return Err(Error::WindowExceeded(format!(
                "position {x} outside the materialized range [{lo}, {hi}]"
            )));
        }
        Ok(x)
    }

    fn expand_bracket(&self, time: f64) -> Result<(f64, f64)> {
        let table = self.table.as_ref().unwrap();
        let (dlo, dhi) = self.coef.domain();
        let forward = time > *table.ts.last().unwrap();
        let (mut inner, limit) = if forward {
            (*table.xs.last().unwrap(), dhi)
        } else {
            (table.xs[0], dlo)
        };
        let dir = if forward { 1.0 } else { -1.0 };
        let mut width = 1.0;
        for _ in 0..1100 {
            let mut outer = inner + dir * width;
            let clamped = if forward { outer >= limit } else { outer <= limit };
            if clamped {
                outer = limit;
            }
            if !outer.is_finite() {
                break;
            }
            let t = self.time_coordinate(outer)?;
            if (forward && t >= time) || (!forward && t <= time) {
                return Ok(if forward { (inner, outer) } else { (outer, inner) });
            }
            if clamped {
                break;
            }
            inner = outer;
            width *= 2.0;
        }
        Err(Error::WindowExceeded(format!(
            "time {time} is not reached inside the materialized range [{dlo}, {dhi}]"
        )))
    }

    /// `e^{tX}x`.
    pub fn flow(&self, t: f64, x: f64) -> Result<f64> {
        if t == 0.0 {
            self.coef.check_domain(x)?;
            return Ok(x);
        }
        let tau = self.time_coordinate(x)? + t;
        self.position(tau)
    }

    /// `d/dy e^{tX}y = a(e^{tX}y) / a(y)`.
    pub fn flow_derivative(&self, t: f64, y: f64) -> Result<f64> {
        let z = self.flow(t, y)?;
        Ok(self.coef.a(z) / self.coef.a(y))
    }
}
