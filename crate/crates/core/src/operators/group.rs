use serde::Serialize;

use crate::coefficients::{a_rho, Density};
use crate::error::{Error, Result};
use crate::flow::FlowMap;
use crate::numerics::parallel::par_map;
use crate::numerics::{GridFunction, LpExponent, TestFunction, Window};

/// `(T_tφ)(y) = φ(e^{-tX}y)` sampled on `window`, real and imaginary parts.
pub fn apply_group_parts(
    fm: &FlowMap,
    t: f64,
    phi: &TestFunction,
    window: &Window,
) -> Result<(GridFunction, GridFunction)> {
    let (lo, hi) = phi.support();
    // T_tφ is supported in the image of supp φ under e^{tX}
    let image = (fm.flow(t, lo)?, fm.flow(t, hi)?);
    let ys: Vec<f64> = window.points().collect();
    let values = par_map(&ys, |&y| {
        if y < image.0 || y > image.1 {
            return Ok((0.0, 0.0));
        }
        let v = phi.value(fm.flow(-t, y)?);
        Ok((v.re, v.im))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let re = GridFunction::new(window.lo, window.hi, values.iter().map(|v| v.0).collect())?;
    let im = GridFunction::new(window.lo, window.hi, values.iter().map(|v| v.1).collect())?;
    Ok((re, im))
}

/// Real part of [`apply_group_parts`].
pub fn apply_group(fm: &FlowMap, t: f64, phi: &TestFunction, window: &Window) -> Result<GridFunction> {
    Ok(apply_group_parts(fm, t, phi, window)?.0)
}

/// Grid estimate of `‖T_t‖_{p→p}`. Only the scanned window is searched, so
/// the value is a lower bound of the norm over ℝ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupNorm {
    pub t: f64,
    pub p: f64,
    pub value: f64,
    pub argmax: f64,
    pub window: (f64, f64),
    /// Grid points skipped because `e^{tX}x` left the materialized range.
    pub skipped: usize,
    pub lower_bound: bool,
}

/// `sup_x ((aρ)(e^{tX}x) / (aρ)(x))^{1/p}` over the window grid.
pub fn group_norm(
    fm: &FlowMap,
    rho: &Density,
    t: f64,
    p: LpExponent,
    window: &Window,
) -> Result<GroupNorm> {
    let coef = fm.coefficient();
    let xs: Vec<f64> = window.points().collect();
    let ratios = par_map(&xs, |&x| match fm.flow(t, x) {
        Ok(y) => Ok(Some(a_rho(coef, rho, y) / a_rho(coef, rho, x))),
        Err(Error::WindowExceeded(_)) => Ok(None),
        Err(e) => Err(e),
    });
    sup_power(ratios, &xs, t, p, p.reciprocal(), window)
}

/// The same norm through the adjoint: on the image points `y = e^{tX}x`,
/// `sup_y ((aρ)(y) / (aρ)(e^{-tX}y))^{1 - 1/q}`, with `q` the dual exponent.
pub fn group_norm_dual(
    fm: &FlowMap,
    rho: &Density,
    t: f64,
    p: LpExponent,
    window: &Window,
) -> Result<GroupNorm> {
    let coef = fm.coefficient();
    let xs: Vec<f64> = window.points().collect();
    let ratios = par_map(&xs, |&x| match fm.flow(t, x) {
        Ok(y) => {
            let back = fm.flow(-t, y)?;
            Ok(Some(a_rho(coef, rho, y) / a_rho(coef, rho, back)))
        }
        Err(Error::WindowExceeded(_)) => Ok(None),
        Err(e) => Err(e),
    });
    let q = p.dual();
    sup_power(ratios, &xs, t, p, 1.0 - q.reciprocal(), window)
}

fn sup_power(
    ratios: Vec<Result<Option<f64>>>,
    xs: &[f64],
    t: f64,
    p: LpExponent,
    power: f64,
    window: &Window,
) -> Result<GroupNorm> {
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    let mut skipped = 0;
    for (r, &x) in ratios.into_iter().zip(xs) {
        match r? {
            Some(r) => {
                let v = r.powf(power);
                if v > best.0 {
                    best = (v, x);
                }
            }
            None => skipped += 1,
        }
    }
    if skipped == xs.len() {
        return Err(Error::WindowExceeded(
            "the flow leaves the materialized range from every window point".into(),
        ));
    }
    Ok(GroupNorm {
        t,
        p: p.p(),
        value: best.0,
        argmax: best.1,
        window: (window.lo, window.hi),
        skipped,
        lower_bound: true,
    })
}
