//! The heat kernel `K_t(x;y) = (4πt)^{-1/2} (aρ)(y)⁻¹ e^{-d(x;y)²/4t}` of the
//! semigroup generated by `H = -X²` on `L_2(ρ dx)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coefficients::{a_rho, Density};
use crate::error::{Error, Result};
use crate::flow::FlowMap;
use crate::metric_volume::distance;
use crate::numerics::parallel::par_map;
use crate::numerics::{integrate_with_breaks, GridFunction, QuadratureConfig, Window};
use crate::report::Table;

/// Gaussian tails beyond this many `√t` are below double precision.
pub const TAIL_MULTIPLIER: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelQuery {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl KernelQuery {
    pub fn new(t: f64, x: f64, y: f64) -> Result<Self> {
        check_time(t)?;
        Ok(Self { t, x, y })
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::ConfigInvalid(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// `(4πt)^{-1/2} e^{-s²/4t}`.
pub fn gaussian(t: f64, s: f64) -> f64 {
    (-s * s / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

pub fn heat_kernel(fm: &FlowMap, rho: &Density, q: KernelQuery) -> Result<f64> {
    check_time(q.t)?;
    let d = distance(fm, q.x, q.y)?;
    Ok(gaussian(q.t, d) / a_rho(fm.coefficient(), rho, q.y))
}

/// Mass integrals see the round-off of the flow inversion: where `a` is tiny
/// a one-ulp change of `y` moves the time coordinate by `ulp/a`. They stop at
/// a looser relative tolerance.
fn mass_cfg() -> QuadratureConfig {
    QuadratureConfig::default()
        .with_tolerance(1e-12, 1e-8)
        .with_max_subdivisions(10_000)
}

fn kernel_cfg() -> QuadratureConfig {
    QuadratureConfig::default()
        .with_tolerance(1e-13, 1e-12)
        .with_max_subdivisions(10_000)
}

/// Feature points of the coefficient in `[lo, hi]`, expressed as time
/// coordinates relative to `t0`.
fn feature_times(fm: &FlowMap, lo: f64, hi: f64, t0: f64) -> Result<Vec<f64>> {
    fm.coefficient()
        .features(lo, hi)
        .into_iter()
        .map(|f| fm.time_coordinate(f).map(|t| t - t0))
        .collect()
}

/// `∫ ρ(y) K_t(x;y) dy`, integrated in the flow time `s` with `y = e^{-sX}x`
/// over `|s| ≤ 12√t`. Every factor is evaluated through the kernel itself.
pub fn kernel_mass(fm: &FlowMap, rho: &Density, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    let s_max = TAIL_MULTIPLIER * t.sqrt();
    let tx = fm.time_coordinate(x)?;
    let lo = fm.position(tx - s_max)?;
    let hi = fm.position(tx + s_max)?;
    let breaks: Vec<f64> = feature_times(fm, lo, hi, tx)?.into_iter().map(|u| -u).collect();
    let coef = fm.coefficient();
    integrate_with_breaks(
        |s| {
            let Ok(y) = fm.position(tx - s) else {
                return f64::NAN;
            };
            match heat_kernel(fm, rho, KernelQuery { t, x, y }) {
                // dy = a(y) ds
                Ok(k) => rho.rho(y) * k * coef.a(y),
                Err(_) => f64::NAN,
            }
        },
        -s_max,
        s_max,
        &breaks,
        &mass_cfg(),
    )
}

/// `∫ ρ(y) K_t(x;y) dy` integrated directly in `y`, with coefficient features
/// as panel edges. Cross-check of [`kernel_mass`].
pub fn kernel_mass_direct(fm: &FlowMap, rho: &Density, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    let s_max = TAIL_MULTIPLIER * t.sqrt();
    let lo = fm.flow(-s_max, x)?;
    let hi = fm.flow(s_max, x)?;
    let mut breaks = fm.coefficient().features(lo, hi);
    breaks.push(x);
    integrate_with_breaks(
        |y| match heat_kernel(fm, rho, KernelQuery { t, x, y }) {
            Ok(k) => rho.rho(y) * k,
            Err(_) => f64::NAN,
        },
        lo,
        hi,
        &breaks,
        &mass_cfg(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChapmanKolmogorov {
    /// `∫ ρ(z) K_t(x;z) K_s(z;y) dz`.
    pub convolution: f64,
    /// `K_{t+s}(x;y)`.
    pub direct: f64,
    pub residual: f64,
    pub relative: f64,
}

pub fn chapman_kolmogorov_residual(
    fm: &FlowMap,
    rho: &Density,
    t: f64,
    s: f64,
    x: f64,
    y: f64,
) -> Result<ChapmanKolmogorov> {
    check_time(t)?;
    check_time(s)?;
    let tx = fm.time_coordinate(x)?;
    let ty = fm.time_coordinate(y)?;
    let reach = TAIL_MULTIPLIER * t.max(s).sqrt();
    let (u_lo, u_hi) = (tx.min(ty) - reach, tx.max(ty) + reach);
    let lo = fm.position(u_lo)?;
    let hi = fm.position(u_hi)?;
    let mut breaks = feature_times(fm, lo, hi, 0.0)?;
    breaks.extend([tx, ty]);
    let coef = fm.coefficient();
    let convolution = integrate_with_breaks(
        |u| {
            let Ok(z) = fm.position(u) else {
                return f64::NAN;
            };
            let k1 = heat_kernel(fm, rho, KernelQuery { t, x, y: z });
            let k2 = heat_kernel(fm, rho, KernelQuery { t: s, x: z, y });
            match (k1, k2) {
                // dz = a(z) du
                (Ok(k1), Ok(k2)) => rho.rho(z) * k1 * k2 * coef.a(z),
                _ => f64::NAN,
            }
        },
        u_lo,
        u_hi,
        &breaks,
        &kernel_cfg(),
    )?;
    let direct = heat_kernel(fm, rho, KernelQuery { t: t + s, x, y })?;
    let residual = (convolution - direct).abs();
    Ok(ChapmanKolmogorov {
        convolution,
        direct,
        residual,
        relative: residual / direct,
    })
}

/// `y ↦ K_t(x;y)` sampled on `window`.
pub fn kernel_slice(fm: &FlowMap, rho: &Density, t: f64, x: f64, window: &Window) -> Result<GridFunction> {
    check_time(t)?;
    let ys: Vec<f64> = window.points().collect();
    let values = par_map(&ys, |&y| heat_kernel(fm, rho, KernelQuery { t, x, y }))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(window.lo, window.hi, values)
}

pub fn kernel_slice_table(slice: &GridFunction) -> Table {
    let mut t = Table::new(&["y", "K"]);
    for (y, k) in slice.iter() {
        t.push(vec![y.into(), k.into()]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Coefficient;

    fn unit() -> (FlowMap, Density) {
        (FlowMap::new(&Coefficient::constant(1.0).unwrap()).unwrap(), Density::uniform())
    }

    #[test]
    fn gaussian_values() {
        let (fm, rho) = unit();
        let k = heat_kernel(&fm, &rho, KernelQuery::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert!((k - 0.282_094_791_773_878_14).abs() < 1e-15);
        let k = heat_kernel(&fm, &rho, KernelQuery::new(1.0, 0.0, 2.0).unwrap()).unwrap();
        assert!((k - (4.0 * PI).sqrt().recip() * (-1f64).exp()).abs() < 1e-15);
        assert!((k - 0.103_776_874_355_148_7).abs() < 1e-12);
        assert!(KernelQuery::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn unit_mass_and_ck() {
        let (fm, rho) = unit();
        assert!((kernel_mass(&fm, &rho, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-10);
        assert!((kernel_mass_direct(&fm, &rho, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-10);
        let ck = chapman_kolmogorov_residual(&fm, &rho, 0.5, 0.5, 0.0, 1.0).unwrap();
        assert!(ck.residual <= 1e-7, "{ck:?}");
    }

    #[test]
    fn sqrt_mass_both_routes() {
        let fm = FlowMap::new(&Coefficient::sqrt_one_plus_square()).unwrap();
        let rho = Density::uniform();
        for (t, x) in [(0.3, 0.0), (1.0, 5.0), (2.0, -3.0)] {
            let m = kernel_mass(&fm, &rho, t, x).unwrap();
            let d = kernel_mass_direct(&fm, &rho, t, x).unwrap();
            assert!((m - 1.0).abs() < 1e-9 && (d - 1.0).abs() < 1e-8, "{m} {d}");
        }
    }

    #[test]
    fn slice_has_expected_shape() {
        let (fm, rho) = unit();
        let w = Window::new(-3.0, 3.0, 61).unwrap();
        let s = kernel_slice(&fm, &rho, 1.0, 0.0, &w).unwrap();
        assert_eq!(s.len(), 61);
        assert!((s.values()[30] - gaussian(1.0, 0.0)).abs() < 1e-15);
        assert!(kernel_slice_table(&s).to_csv().starts_with("y,K\n"));
    }
}
