//! Intrinsic distance `d(x;y) = |A(y) - A(x)|`, ball volumes and doubling scans.

use serde::Serialize;

use crate::coefficients::{a_rho, Density};
use crate::error::{Error, Result};
use crate::flow::FlowMap;
use crate::numerics::parallel::par_map;
use crate::numerics::{integrate_with_breaks, QuadratureConfig};
use crate::report::Table;

pub fn distance(fm: &FlowMap, x: f64, y: f64) -> Result<f64> {
    Ok((fm.time_coordinate(y)? - fm.time_coordinate(x)?).abs())
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::ConfigInvalid(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

fn volume_cfg() -> QuadratureConfig {
    QuadratureConfig::default().with_tolerance(1e-12, 1e-11)
}

/// `V(x;r) = ∫_{-r}^{r} (aρ)(e^{sX}x) ds`.
pub fn ball_volume(fm: &FlowMap, rho: &Density, x: f64, r: f64) -> Result<f64> {
    check_radius(r)?;
    let coef = fm.coefficient();
    let t0 = fm.time_coordinate(x)?;
    let lo = fm.position(t0 - r)?;
    let hi = fm.position(t0 + r)?;
    let breaks = coef
        .features(lo, hi)
        .into_iter()
        .map(|f| fm.time_coordinate(f).map(|t| t - t0))
        .collect::<Result<Vec<_>>>()?;
    integrate_with_breaks(
        |s| match fm.position(t0 + s) {
            Ok(y) => a_rho(coef, rho, y),
            Err(_) => f64::NAN,
        },
        -r,
        r,
        &breaks,
        &volume_cfg(),
    )
}

/// `V(x;r) = ∫_{e^{-rX}x}^{e^{rX}x} ρ`, the cross-check of [`ball_volume`].
pub fn ball_volume_direct(fm: &FlowMap, rho: &Density, x: f64, r: f64) -> Result<f64> {
    check_radius(r)?;
    let lo = fm.flow(-r, x)?;
    let hi = fm.flow(r, x)?;
    let breaks = fm.coefficient().features(lo, hi);
    integrate_with_breaks(|y| rho.rho(y), lo, hi, &breaks, &volume_cfg())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallVolumeCurve {
    pub center: f64,
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
    /// `V(x;2r) / V(x;r)` per radius.
    pub doubling_ratios: Vec<f64>,
}

pub fn ball_volume_curve(
    fm: &FlowMap,
    rho: &Density,
    center: f64,
    radii: &[f64],
) -> Result<BallVolumeCurve> {
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let mut volumes = Vec::with_capacity(radii.len());
    let mut doubling_ratios = Vec::with_capacity(radii.len());
    for &r in &radii {
        let v = ball_volume(fm, rho, center, r)?;
        let v2 = ball_volume(fm, rho, center, 2.0 * r)?;
        volumes.push(v);
        doubling_ratios.push(v2 / v);
    }
    Ok(BallVolumeCurve {
        center,
        radii,
        volumes,
        doubling_ratios,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingScan {
    pub curves: Vec<BallVolumeCurve>,
    pub max_ratio: f64,
    /// `(center, r)` of the largest ratio.
    pub argmax: (f64, f64),
    /// `2C²e^{3ω}` when `(C, ω)` was supplied.
    pub bound: Option<f64>,
    pub violations: Vec<(f64, f64, f64)>,
}

impl DoublingScan {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["center", "r", "V", "ratio"]);
        for c in &self.curves {
            for i in 0..c.radii.len() {
                t.push(vec![
                    c.center.into(),
                    c.radii[i].into(),
                    c.volumes[i].into(),
                    c.doubling_ratios[i].into(),
                ]);
            }
        }
        t
    }
}

/// Tabulates doubling ratios; with `constants = Some((C, ω))` flags ratios
/// above `2C²e^{3ω}`.
pub fn doubling_scan(
    fm: &FlowMap,
    rho: &Density,
    centers: &[f64],
    radii: &[f64],
    constants: Option<(f64, f64)>,
) -> Result<DoublingScan> {
    if centers.is_empty() || radii.is_empty() {
        return Err(Error::ConfigInvalid("doubling scan needs centers and radii".into()));
    }
    let curves = par_map(centers, |&x| ball_volume_curve(fm, rho, x, radii))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let bound = constants.map(|(c, omega)| 2.0 * c * c * (3.0 * omega).exp());
    let mut max_ratio = f64::NEG_INFINITY;
    let mut argmax = (f64::NAN, f64::NAN);
    let mut violations = Vec::new();
    for c in &curves {
        for (r, q) in c.radii.iter().zip(&c.doubling_ratios) {
            if *q > max_ratio {
                max_ratio = *q;
                argmax = (c.center, *r);
            }
            if let Some(b) = bound {
                if *q > b * (1.0 + 1e-9) {
                    violations.push((c.center, *r, *q));
                }
            }
        }
    }
    Ok(DoublingScan {
        curves,
        max_ratio,
        argmax,
        bound,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusSpread {
    pub r: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// `√(v_max / v_min)`: the smallest c for this radius.
    pub c: f64,
    /// Geometric mean of the extremes, the comparison function `v(r)`.
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformVolumeReport {
    pub spreads: Vec<RadiusSpread>,
    /// Uniform constant over all centers.
    pub c: f64,
    /// Same constant over the middle half of the (sorted) centers.
    pub c_inner: f64,
    /// `c₁` with `c₁⁻¹ r ≤ v(r) ≤ c₁ r`.
    pub c1: f64,
    /// Implied bounds `(2cc₁)⁻¹ ≤ aρ ≤ cc₁/2`.
    pub pinch: (f64, f64),
    /// Range of `aρ` over the centers.
    pub a_rho_range: (f64, f64),
    pub pinch_consistent: bool,
    /// Evidence that a uniform comparison holds: `c` stays within twice
    /// `c_inner` as the center set widens, and the pinch is consistent.
    pub pass: bool,
}

fn spread(r: f64, vols: impl Iterator<Item = f64>) -> RadiusSpread {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for v in vols {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    RadiusSpread {
        r,
        v_min: lo,
        v_max: hi,
        c: (hi / lo).sqrt(),
        v: (hi * lo).sqrt(),
    }
}

pub fn uniform_volume_test(
    fm: &FlowMap,
    rho: &Density,
    centers: &[f64],
    radii: &[f64],
) -> Result<UniformVolumeReport> {
    if centers.len() < 2 || radii.is_empty() {
        return Err(Error::ConfigInvalid(
            "uniform volume test needs at least two centers and one radius".into(),
        ));
    }
    if radii.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return Err(Error::ConfigInvalid("radii must lie in (0, 1]".into()));
    }
    let mut centers = centers.to_vec();
    centers.sort_by(f64::total_cmp);
    let volumes = par_map(&centers, |&x| {
        radii
            .iter()
            .map(|&r| ball_volume(fm, rho, x, r))
            .collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (q1, q3) = (centers.len() / 4, (3 * centers.len()).div_ceil(4).max(centers.len() / 4 + 1));
    let mut spreads = Vec::new();
    let mut c_inner = 1.0f64;
    for (j, &r) in radii.iter().enumerate() {
        spreads.push(spread(r, volumes.iter().map(|v| v[j])));
        c_inner = c_inner.max(spread(r, volumes[q1..q3].iter().map(|v| v[j])).c);
    }
    let c = spreads.iter().fold(1.0f64, |m, s| m.max(s.c));
    let c1 = spreads
        .iter()
        .fold(1.0f64, |m, s| m.max(s.v / s.r).max(s.r / s.v));
    let pinch = (1.0 / (2.0 * c * c1), 0.5 * c * c1);
    let coef = fm.coefficient();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &x in &centers {
        let v = a_rho(coef, rho, x);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let pinch_consistent = lo >= pinch.0 * (1.0 - 1e-9) && hi <= pinch.1 * (1.0 + 1e-9);
    Ok(UniformVolumeReport {
        spreads,
        c,
        c_inner,
        c1,
        pinch,
        a_rho_range: (lo, hi),
        pinch_consistent,
        pass: pinch_consistent && c <= 2.0 * c_inner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Coefficient;

    #[test]
    fn unit_ball() {
        let fm = FlowMap::new(&Coefficient::constant(1.0).unwrap()).unwrap();
        let rho = Density::uniform();
        assert!((distance(&fm, 0.0, 3.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((ball_volume(&fm, &rho, 0.0, 1.5).unwrap() - 3.0).abs() < 1e-12);
        let scan = doubling_scan(&fm, &rho, &[0.0, 1.0], &[0.5, 1.0], Some((1.0, 0.0))).unwrap();
        assert!((scan.max_ratio - 2.0).abs() < 1e-12);
        assert!(scan.violations.is_empty());
    }

    #[test]
    fn constant_two() {
        let fm = FlowMap::new(&Coefficient::constant(2.0).unwrap()).unwrap();
        let rho = Density::uniform();
        assert!((ball_volume(&fm, &rho, 0.0, 1.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((ball_volume_direct(&fm, &rho, 0.0, 1.0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn routes_agree_for_sqrt() {
        let fm = FlowMap::new(&Coefficient::sqrt_one_plus_square()).unwrap();
        let rho = Density::uniform();
        for (x, r) in [(0.0, 1.0), (3.0, 0.4), (-7.0, 2.0)] {
            let a = ball_volume(&fm, &rho, x, r).unwrap();
            let b = ball_volume_direct(&fm, &rho, x, r).unwrap();
            // V = sinh(A + r) - sinh(A - r)
            let t = f64::asinh(x);
            let exact = (t + r).sinh() - (t - r).sinh();
            assert!((a / exact - 1.0).abs() < 1e-9 && (b / exact - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_test_constant_density() {
        let coef = Coefficient::sqrt_one_plus_square();
        let fm = FlowMap::new(&coef).unwrap();
        let rho = Density::reciprocal_of(&coef, 3.0).unwrap();
        let centers: Vec<f64> = (0..9).map(|i| -8.0 + 2.0 * i as f64).collect();
        let rep = uniform_volume_test(&fm, &rho, &centers, &[0.25, 0.5, 1.0]).unwrap();
        assert!((rep.c - 1.0).abs() < 1e-8);
        assert!(rep.pass);
        // v(r) = 6r, so c₁ = 6 and the pinch is [1/12, 3]
        assert!((rep.pinch.1 - 3.0).abs() < 1e-8 && rep.pinch_consistent);
        assert!(uniform_volume_test(&fm, &rho, &centers, &[2.0]).is_err());
    }
}
