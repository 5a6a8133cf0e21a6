use crate::coefficients::Density;
use crate::error::{Error, Result};
use crate::flow::FlowMap;
use crate::kernel::{check_time, gaussian, heat_kernel, KernelQuery, TAIL_MULTIPLIER};
use crate::numerics::parallel::par_map;
use crate::numerics::{integrate_with_breaks, GridFunction, QuadratureConfig, TestFunction, Window};

fn semigroup_cfg() -> QuadratureConfig {
    QuadratureConfig::default()
        .with_tolerance(1e-13, 1e-11)
        .with_max_subdivisions(10_000)
}

/// Time coordinates of the support edges, breakpoints of `φ` and coefficient
/// features inside the support.
fn support_times(fm: &FlowMap, phi: &TestFunction) -> Result<(f64, f64, Vec<f64>)> {
    let (lo, hi) = phi.support();
    let mut pts = phi.breakpoints().to_vec();
    pts.extend(fm.coefficient().features(lo, hi));
    let times = pts
        .into_iter()
        .map(|x| fm.time_coordinate(x))
        .collect::<Result<Vec<_>>>()?;
    Ok((fm.time_coordinate(lo)?, fm.time_coordinate(hi)?, times))
}

/// `(S_tφ)(y) = (4πt)^{-1/2} ∫ e^{-s²/4t} φ(e^{-sX}y) ds` over
/// `|s| ≤ s_max_mult·√t`, real part of `φ`.
pub fn apply_semigroup_subordination(
    fm: &FlowMap,
    t: f64,
    phi: &TestFunction,
    window: &Window,
    s_max_mult: f64,
) -> Result<GridFunction> {
    check_time(t)?;
    if !(s_max_mult > 0.0) {
        return Err(Error::ConfigInvalid("s_max multiplier must be positive".into()));
    }
    let s_max = s_max_mult * t.sqrt();
    let (t_lo, t_hi, inner) = support_times(fm, phi)?;
    let ys: Vec<f64> = window.points().collect();
    let cfg = semigroup_cfg();
    let values = par_map(&ys, |&y| -> Result<f64> {
        let ty = fm.time_coordinate(y)?;
        // e^{-sX}y ∈ supp φ  ⇔  ty - s ∈ [t_lo, t_hi]
        let lo = (ty - t_hi).max(-s_max);
        let hi = (ty - t_lo).min(s_max);
        if lo >= hi {
            return Ok(0.0);
        }
        let breaks: Vec<f64> = inner.iter().map(|u| ty - u).collect();
        integrate_with_breaks(
            |s| match fm.position(ty - s) {
                Ok(x) => gaussian(t, s) * phi.re(x),
                Err(_) => f64::NAN,
            },
            lo,
            hi,
            &breaks,
            &cfg,
        )
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    GridFunction::new(window.lo, window.hi, values)
}

/// `x ↦ ∫ ρ(y) K_t(x;y) φ(y) dy`, real part of `φ`.
pub fn apply_semigroup_kernel(
    fm: &FlowMap,
    rho: &Density,
    t: f64,
    phi: &TestFunction,
    window: &Window,
) -> Result<GridFunction> {
    check_time(t)?;
    let (lo, hi) = phi.support();
    let mut breaks = phi.breakpoints().to_vec();
    breaks.extend(fm.coefficient().features(lo, hi));
    let xs: Vec<f64> = window.points().collect();
    let cfg = semigroup_cfg();
    let s_max = TAIL_MULTIPLIER * t.sqrt();
    let values = par_map(&xs, |&x| -> Result<f64> {
        let tx = fm.time_coordinate(x)?;
        let (t_lo, t_hi) = (fm.time_coordinate(lo)?, fm.time_coordinate(hi)?);
        if t_lo > tx + s_max || t_hi < tx - s_max {
            return Ok(0.0);
        }
        let a = if t_lo < tx - s_max { fm.position(tx - s_max)? } else { lo };
        let b = if t_hi > tx + s_max { fm.position(tx + s_max)? } else { hi };
        let mut br = breaks.clone();
        br.push(x);
        integrate_with_breaks(
            |y| match heat_kernel(fm, rho, KernelQuery { t, x, y }) {
                Ok(k) => rho.rho(y) * k * phi.re(y),
                Err(_) => f64::NAN,
            },
            a,
            b,
            &br,
            &cfg,
        )
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    GridFunction::new(window.lo, window.hi, values)
}
