use serde::Serialize;

use crate::coefficients::{a_rho, a_rho_derivative, Density};
use crate::error::{Error, Result};
use crate::flow::FlowMap;
use crate::numerics::profiles::{probe_taper, probe_taper_derivative};
use crate::numerics::{integrate_with_breaks, LpExponent, QuadratureConfig};

/// Decay parameter of the taper bound `g(y) ≤ c e^{-y/4b}`.
pub const TAPER_B: f64 = 1.0;

/// `g(y) = y (4(p-1)τ^{p-2} + 2(p-2)²τ^{2p-2}) τ'(y)²`.
pub fn taper_weight(p: f64, y: f64) -> f64 {
    let tau = probe_taper(y);
    let dtau = probe_taper_derivative(y);
    if dtau == 0.0 {
        return 0.0;
    }
    y * (4.0 * (p - 1.0) * tau.powf(p - 2.0) + 2.0 * (p - 2.0).powi(2) * tau.powf(2.0 * p - 2.0))
        * dtau
        * dtau
}

/// Smallest `c` with `g(y) ≤ c e^{-y/4b}` on a fine grid of `[0, 4]`, padded
/// by a relative 1e-9. `g` vanishes outside `[1, 4]`.
pub fn fit_taper_constant(p: f64, b: f64) -> f64 {
    let n = 40_000;
    (0..=n)
        .map(|i| {
            let y = 4.0 * i as f64 / n as f64;
            taper_weight(p, y) * (y / (4.0 * b)).exp()
        })
        .fold(0.0f64, f64::max)
        * (1.0 + 1e-9)
}

/// Terms of the contraction argument evaluated on
/// `φ_n = (aρ)^{-1/p} τ(n⁻¹d(0;x)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeReport {
    pub n: usize,
    pub p: f64,
    /// `(2p²)⁻¹ ∫ ρ⁻¹(aρ)⁻¹((aρ)')² (τ∘Φ_n)²`.
    pub left: f64,
    /// `n⁻¹ ∫ ρ(aρ)⁻¹ g(Φ_n)`.
    pub right: f64,
    /// `∫ ρ(aρ)⁻¹ g(Φ_n)`.
    pub tail_integral: f64,
    /// `c (4πbn)^{1/2}`.
    pub tail_bound: f64,
    pub b: f64,
    pub c: f64,
    /// `∫ (aρφ_n^{p-1})' a φ_n'`.
    pub dissipativity: f64,
    pub key_inequality_holds: bool,
    pub tail_bound_holds: bool,
    /// `x`-range of the support of `φ_n`.
    pub support: (f64, f64),
}

/// Evaluates the probe in the time variable `u = A(x) - A(0)`, where
/// `Φ_n = u²/n` and `dx = a du`.
pub fn contraction_probe(fm: &FlowMap, rho: &Density, p: LpExponent, n: usize) -> Result<ProbeReport> {
    let pv = p.p();
    if !(pv > 2.0) || p.is_infinite() {
        return Err(Error::ConfigInvalid(format!("probe needs 2 < p < ∞, got {pv}")));
    }
    if n == 0 {
        return Err(Error::ConfigInvalid("probe needs n ≥ 1".into()));
    }
    let coef = fm.coefficient();
    let nf = n as f64;
    let t0 = fm.time_coordinate(0.0)?;
    let u_max = 2.0 * nf.sqrt();
    let support = (fm.position(t0 - u_max)?, fm.position(t0 + u_max)?);
    let mut breaks = vec![-nf.sqrt(), 0.0, nf.sqrt()];
    for f in coef.features(support.0, support.1) {
        breaks.push(fm.time_coordinate(f)? - t0);
    }
    let cfg = QuadratureConfig::default()
        .with_tolerance(1e-12, 1e-10)
        .with_max_subdivisions(20_000);

    let at = |u: f64| -> Option<(f64, f64, f64, f64)> {
        let x = fm.position(t0 + u).ok()?;
        Some((coef.a(x), rho.rho(x), a_rho(coef, rho, x), a_rho_derivative(coef, rho, x)))
    };

    let left = integrate_with_breaks(
        |u| match at(u) {
            Some((a, r, ar, dar)) => {
                let tau = probe_taper(u * u / nf);
                dar * dar / (r * ar) * tau * tau * a
            }
            None => f64::NAN,
        },
        -u_max,
        u_max,
        &breaks,
        &cfg,
    )? / (2.0 * pv * pv);

    // ρ(aρ)⁻¹ a = 1, so the tail integrand does not see the coefficient
    let tail_integral = integrate_with_breaks(
        |u| taper_weight(pv, u * u / nf),
        -u_max,
        u_max,
        &[-nf.sqrt(), 0.0, nf.sqrt()],
        &cfg,
    )?;

    let dissipativity = integrate_with_breaks(
        |u| match at(u) {
            Some((a, r, ar, dar)) => {
                let y = u * u / nf;
                let (tau, dtau) = (probe_taper(y), probe_taper_derivative(y));
                let m = ar.powf(-1.0 / pv);
                let x_phi = -m * dar * tau / pv + 2.0 / nf * r * m * dtau * u;
                let w = ar.powf(-1.0 + 1.0 / pv);
                let d_pow = w * dar * tau.powf(pv - 1.0) / pv
                    + 2.0 / nf * (pv - 1.0) * r * w * tau.powf(pv - 2.0) * dtau * u;
                d_pow * x_phi / r * a
            }
            None => f64::NAN,
        },
        -u_max,
        u_max,
        &breaks,
        &cfg,
    )?;

    let b = TAPER_B;
    let c = fit_taper_constant(pv, b);
    let tail_bound = c * (4.0 * std::f64::consts::PI * b * nf).sqrt();
    let right = tail_integral / nf;
    Ok(ProbeReport {
        n,
        p: pv,
        left,
        right,
        tail_integral,
        tail_bound,
        b,
        c,
        dissipativity,
        key_inequality_holds: left <= right,
        tail_bound_holds: tail_integral <= tail_bound,
        support,
    })
}
