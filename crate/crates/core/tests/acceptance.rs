//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use degdiff::coefficients::{
    make_example_bump_train, make_example_factorial, Coefficient, Density, Example41Spec,
    Example42Spec,
};
use degdiff::experiments::{
    example41_extension_constants, example41_norm_lower_bound, example42_extension_constants,
    example42_rayleigh, example42_uniform_bound_check,
};
use degdiff::flow::FlowMap;
use degdiff::kernel::{chapman_kolmogorov_residual, heat_kernel, kernel_mass, KernelQuery};
use degdiff::metric_volume::{distance, doubling_scan, uniform_volume_test};
use degdiff::numerics::{integrate_with_breaks, LpExponent, QuadratureConfig, TestFunction, Window};
use degdiff::operators::{
    apply_semigroup_subordination, contraction_probe, dissipativity_functional, garding_check,
    group_norm, Verdict,
};
use degdiff::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Family {
    name: &'static str,
    fm: FlowMap,
    rho: Density,
    /// Range for random base points.
    span: (f64, f64),
}

fn families() -> Result<Vec<Family>> {
    let e41 = Example41Spec::new(10)?;
    let y8 = e41.center(8)?;
    Ok(vec![
        Family {
            name: "sqrt(1+x^2)",
            fm: FlowMap::new(&Coefficient::sqrt_one_plus_square())?,
            rho: Density::uniform(),
            span: (-10.0, 10.0),
        },
        Family {
            name: "factorial plateaus",
            fm: FlowMap::new(&make_example_factorial(e41)?)?,
            rho: Density::uniform(),
            span: (-2.0, y8),
        },
        Family {
            name: "bump train",
            fm: FlowMap::new(&make_example_bump_train(Example42Spec::new(16)?)?)?,
            rho: Density::uniform(),
            span: (-10.0, 120.0),
        },
    ])
}

fn unit() -> Result<(FlowMap, Density)> {
    Ok((FlowMap::new(&Coefficient::constant(1.0)?)?, Density::uniform()))
}

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn ac1() -> Outcome {
    let (fm, rho) = unit()?;
    let mut worst_k = 0.0f64;
    for i in 0..100 {
        let y = -10.0 + 20.0 * i as f64 / 99.0;
        let k = heat_kernel(&fm, &rho, KernelQuery::new(1.0, 0.0, y)?)?;
        let exact = (-y * y / 4.0).exp() / (4.0 * PI).sqrt();
        worst_k = worst_k.max((k - exact).abs());
    }
    let phi = TestFunction::real(
        |x| (-x * x / 2.0).exp(),
        |x| -x * (-x * x / 2.0).exp(),
        (-40.0, 40.0),
    )?;
    let w = Window::new(-6.0, 6.0, 121)?;
    let mut worst_s = 0.0f64;
    for t in [0.25, 1.0, 4.0] {
        let out = apply_semigroup_subordination(&fm, t, &phi, &w, 12.0)?;
        for (x, v) in out.iter() {
            let s = 1.0 + 2.0 * t;
            worst_s = worst_s.max((v - (-x * x / (2.0 * s)).exp() / s.sqrt()).abs());
        }
    }
    Ok((
        worst_k <= 1e-10 && worst_s <= 1e-7,
        format!("kernel error {worst_k:.2e} (tol 1e-10), S_t Gaussian error {worst_s:.2e} (tol 1e-7)"),
    ))
}

fn ac2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for f in families()? {
        for _ in 0..200 {
            let x = rng.gen_range(f.span.0..f.span.1);
            let y = rng.gen_range(f.span.0..f.span.1);
            let s = rng.gen_range(-3.0..3.0);
            let t = rng.gen_range(-3.0..3.0);
            let composed = f.fm.flow(s, f.fm.flow(t, x)?)?;
            let direct = f.fm.flow(s + t, x)?;
            worst.0 = worst.0.max((composed - direct).abs() / direct.abs().max(1.0));
            let back = f.fm.flow(-s, y)?;
            worst.1 = worst.1.max((distance(&f.fm, back, y)? - s.abs()).abs());
            let d0 = distance(&f.fm, x, y)?;
            let d1 = distance(&f.fm, f.fm.flow(t, x)?, f.fm.flow(t, y)?)?;
            worst.2 = worst.2.max((d0 - d1).abs());
        }
    }
    Ok((
        worst.0 <= 1e-7 && worst.1 <= 1e-7 && worst.2 <= 1e-7,
        format!(
            "group law {:.2e}, d(e^-sX y; y) = |s| {:.2e}, flow invariance {:.2e} (tol 1e-7, 3 families x 200)",
            worst.0, worst.1, worst.2
        ),
    ))
}

fn ac3() -> Outcome {
    let mut worst = (0.0f64, "");
    for f in families()? {
        for i in 0..5 {
            let x = f.span.0 + (f.span.1 - f.span.0) * i as f64 / 4.0;
            for t in [0.1, 0.5, 1.0, 2.0, 4.0] {
                let dev = (kernel_mass(&f.fm, &f.rho, t, x)? - 1.0).abs();
                if dev >= worst.0 {
                    worst = (dev, f.name);
                }
            }
        }
    }
    Ok((
        worst.0 <= 1e-6,
        format!("max |mass - 1| = {:.2e} on {} (tol 1e-6, 5x5 grid x 3 families)", worst.0, worst.1),
    ))
}

fn ac4() -> Outcome {
    let mut worst = 0.0f64;
    for f in families()? {
        let (lo, hi) = f.span;
        let pairs = [(lo + 0.3 * (hi - lo), lo + 0.32 * (hi - lo)), (0.0, 0.5), (0.5, -0.5)];
        for (x, y) in pairs {
            for (t, s) in [(0.5, 0.5), (0.3, 0.7)] {
                worst = worst.max(chapman_kolmogorov_residual(&f.fm, &f.rho, t, s, x, y)?.relative);
            }
        }
    }
    Ok((worst <= 1e-5, format!("max relative residual {worst:.2e} (tol 1e-5)")))
}

/// `sup_φ ‖T_tφ‖_p / ‖φ‖_p` over 50 bumps tiling the window, by quadrature
/// of `|φ(e^{-tX}y)|^p ρ(y)` over the image of the support.
fn variational_norm(fm: &FlowMap, rho: &Density, t: f64, p: f64, window: (f64, f64)) -> Result<f64> {
    let hw = (window.1 - window.0) / 100.0;
    let cfg = QuadratureConfig::default().with_tolerance(1e-13, 1e-10);
    let mut best = 0.0f64;
    for k in 0..50 {
        let c = window.0 + hw * (2 * k + 1) as f64;
        let phi = TestFunction::bump(c, hw, 1.0)?;
        let base = integrate_with_breaks(
            |x| phi.re(x).abs().powf(p) * rho.rho(x),
            c - hw,
            c + hw,
            &fm.coefficient().features(c - hw, c + hw),
            &cfg,
        )?;
        let (lo, hi) = (fm.flow(t, c - hw)?, fm.flow(t, c + hw)?);
        let image = integrate_with_breaks(
            |y| match fm.flow(-t, y) {
                Ok(x) => phi.re(x).abs().powf(p) * rho.rho(y),
                Err(_) => f64::NAN,
            },
            lo,
            hi,
            &fm.coefficient().features(lo, hi),
            &cfg,
        )?;
        best = best.max((image / base).powf(1.0 / p));
    }
    Ok(best)
}

fn ac5() -> Outcome {
    let sqrt = FlowMap::new(&Coefficient::sqrt_one_plus_square())?;
    let train = FlowMap::new(&make_example_bump_train(Example42Spec::new(8)?)?)?;
    let rho = Density::uniform();
    let cases = [
        ("sqrt(1+x^2)", &sqrt, 1.0, 2.0, (-10.0, 10.0)),
        ("sqrt(1+x^2)", &sqrt, -0.5, 1.0, (-10.0, 10.0)),
        ("bump train", &train, 2.0, 1.0, (14.0, 22.0)),
        ("bump train", &train, -1.0, 3.0, (22.0, 30.0)),
    ];
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (name, fm, t, p, win) in cases {
        let w = Window::new(win.0, win.1, 4001)?;
        let g = group_norm(fm, &rho, t, LpExponent::new(p)?, &w)?.value;
        let v = variational_norm(fm, &rho, t, p, win)?;
        let rel = (g - v).abs() / g;
        worst = worst.max(rel);
        detail.push(format!("{name} t={t} p={p}: {g:.4} vs {v:.4}"));
    }
    Ok((worst <= 0.02, format!("max relative gap {worst:.2e} (tol 2%); {}", detail.join("; "))))
}

fn ac6() -> Outcome {
    let spec = Example42Spec::new(16)?;
    let fm = FlowMap::new(&make_example_bump_train(spec.clone())?)?;
    let rho = Density::uniform();
    let w = Window::new(-8.0, spec.limit() - 16.0, 20001)?;
    let mut worst = 0.0f64;
    for p in [1.0, 2.0, 4.0] {
        let bound = 4f64.powf(1.0 / p);
        for t in [-2.0, -0.5, 0.5, 2.0] {
            let n = group_norm(&fm, &rho, t, LpExponent::new(p)?, &w)?.value;
            worst = worst.max(n / bound);
        }
    }
    let ext = example42_extension_constants(&spec)?;
    let s_rows = example42_uniform_bound_check(&Example42Spec::new(8)?, LpExponent::new(2.0)?, &[0.5, 2.0])?;
    let s_ok = s_rows.iter().all(|r| r.pass);
    let ok = worst <= 1.0 + 1e-6 && ext.omega == 0.0 && ext.c <= 4.0 * (1.0 + 1e-12) && s_ok;
    Ok((
        ok,
        format!(
            "max group_norm / 4^(1/p) = {worst:.9}; C = {:.6} at omega = {}; S_t ratios within 4^(1/2) at p=2: {s_ok}",
            ext.c, ext.omega
        ),
    ))
}

fn ac7() -> Outcome {
    let spec = Example41Spec::new(12)?;
    let p = LpExponent::new(2.0)?;
    let bounds = (2..=7)
        .map(|n| example41_norm_lower_bound(&spec, n, p, 1.0).map(|e| e.norm_lower_bound))
        .collect::<Result<Vec<_>>>()?;
    let monotone = bounds.windows(2).all(|w| w[1] > w[0]);
    let mut worst = 0.0f64;
    for (i, w) in bounds.windows(2).enumerate() {
        let n = (i + 2) as f64;
        let expected = ((n + 2.0) / (n + 1.0)).sqrt();
        worst = worst.max((w[1] / w[0] / expected - 1.0).abs());
    }
    let ext = example41_extension_constants(&spec)?;
    let violated = ext.verdict == Verdict::ViolatedEvidence;
    Ok((
        monotone && worst <= 0.1 && violated,
        format!(
            "bounds n=2..7 monotone: {monotone}; max ratio deviation {worst:.2e} (tol 10%); C(0) {:.4e} -> {:.4e}, verdict {:?}",
            ext.c_inner, ext.c, ext.verdict
        ),
    ))
}

fn ac8() -> Outcome {
    let spec = Example42Spec::new(256)?;
    let mut rows = Vec::new();
    let mut slowest = 0.0f64;
    for n in [16, 64, 256] {
        let start = Instant::now();
        rows.push(example42_rayleigh(&spec, n)?);
        slowest = slowest.max(start.elapsed().as_secs_f64());
    }
    let decreasing = rows.windows(2).all(|w| w[1].rayleigh < w[0].rayleigh);
    let below = rows.iter().all(|r| r.ceiling <= 0.0 || r.rayleigh <= r.ceiling);
    let summary: Vec<String> = rows
        .iter()
        .map(|r| format!("n={}: {:.4} (ceiling {:.4})", r.n, r.rayleigh, r.ceiling))
        .collect();
    Ok((
        decreasing && below && slowest < 60.0,
        format!("{}; slowest {slowest:.2}s", summary.join(", ")),
    ))
}

fn ac9() -> Outcome {
    let sqrt = Coefficient::sqrt_one_plus_square();
    let constant_cases = vec![
        (Coefficient::constant(1.0)?, Density::uniform()),
        (Coefficient::constant(2.0)?, Density::constant(0.5)?),
        (sqrt.clone(), Density::reciprocal_of(&sqrt, 1.0)?),
    ];
    let w = Window::new(-8.0, 8.0, 801)?;
    let mut norm_dev = 0.0f64;
    let mut min_diss = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (coef, rho) in &constant_cases {
        let fm = FlowMap::new(coef)?;
        for t in [-2.0, -0.5, 0.5, 2.0] {
            for p in [1.0, 2.0, 4.0] {
                let n = group_norm(&fm, rho, t, LpExponent::new(p)?, &w)?.value;
                norm_dev = norm_dev.max((n - 1.0).abs());
            }
        }
        for _ in 0..50 {
            let phi = TestFunction::bump(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(0.2..3.0),
                rng.gen_range(0.1..3.0),
            )?;
            let p = LpExponent::new(rng.gen_range(1.2..6.0))?;
            min_diss = min_diss.min(dissipativity_functional(coef, rho, p, &phi)?);
        }
    }
    let fm = FlowMap::new(&sqrt)?;
    let p = LpExponent::new(4.0)?;
    let probes = [4usize, 16, 64, 256]
        .iter()
        .map(|&n| contraction_probe(&fm, &Density::uniform(), p, n))
        .collect::<Result<Vec<_>>>()?;
    let left_away = probes.iter().all(|r| r.left >= probes[0].left) && probes[0].left > 0.0;
    let right_decay = probes.windows(2).all(|w| w[1].right < w[0].right)
        && probes.last().is_some_and(|r| r.right < probes[0].right / 4.0);
    let tails = probes.iter().all(|r| r.tail_bound_holds);
    let summary: Vec<String> = probes
        .iter()
        .map(|r| format!("n={}: L={:.4} R={:.4}", r.n, r.left, r.right))
        .collect();
    Ok((
        norm_dev <= 1e-9 && min_diss >= -1e-9 && left_away && right_decay && tails,
        format!(
            "|norm - 1| {norm_dev:.1e}, min dissipativity {min_diss:.3e}; probe {}",
            summary.join(", ")
        ),
    ))
}

fn ac10() -> Outcome {
    let coef = Coefficient::sqrt_one_plus_square();
    let rho = Density::uniform();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = 0;
    let mut min_margin = f64::INFINITY;
    for _ in 0..50 {
        let phi = TestFunction::bump(
            rng.gen_range(-20.0..20.0),
            rng.gen_range(0.1..5.0),
            rng.gen_range(0.1..3.0),
        )?;
        for eps in [0.1, 0.5] {
            let g = garding_check(&coef, &rho, &phi, eps)?;
            if !g.holds {
                failures += 1;
            }
            min_margin = min_margin.min((g.lhs - g.rhs) / g.lhs.abs().max(1e-300));
        }
    }
    Ok((failures == 0, format!("{failures} failures in 100 checks; min relative margin {min_margin:.3e}")))
}

fn ac11() -> Outcome {
    let (fm, rho) = unit()?;
    let radii = [0.05, 0.1, 0.25, 0.5, 1.0];
    let unit_scan = doubling_scan(&fm, &rho, &[-3.0, 0.0, 7.0], &radii, None)?;
    let unit_dev = unit_scan
        .curves
        .iter()
        .flat_map(|c| c.doubling_ratios.iter())
        .fold(0.0f64, |m, r| m.max((r - 2.0).abs()));

    let train = FlowMap::new(&make_example_bump_train(Example42Spec::new(16)?)?)?;
    let centers: Vec<f64> = (0..=520).map(|i| -8.0 + 0.5 * i as f64).collect();
    let scan = doubling_scan(&train, &rho, &centers, &radii, Some((4.0, 0.0)))?;

    let const_centers: Vec<f64> = (0..=40).map(|i| -20.0 + i as f64).collect();
    let two = FlowMap::new(&Coefficient::constant(2.0)?)?;
    let uniform_const = uniform_volume_test(&two, &Density::constant(1.5)?, &const_centers, &radii)?;
    let spec = Example41Spec::new(12)?;
    let y10 = spec.center(10)?;
    let fact = FlowMap::new(&make_example_factorial(spec.clone())?)?;
    let mut fact_centers = Vec::new();
    for n in 0..=10 {
        fact_centers.push(spec.center(n)?);
    }
    fact_centers.extend((0..40).map(|i| -4.0 + (y10 + 4.0) * i as f64 / 39.0));
    let uniform_fact = uniform_volume_test(&fact, &rho, &fact_centers, &radii)?;

    let ok = unit_dev <= 1e-12
        && scan.max_ratio <= 32.0
        && scan.violations.is_empty()
        && uniform_const.pass
        && !uniform_fact.pass;
    Ok((
        ok,
        format!(
            "unit |ratio - 2| {unit_dev:.1e}; bump train max ratio {:.4} (bound 32); uniform test: constant pass={}, factorial pass={} (c {:.3e} vs inner {:.3e})",
            scan.max_ratio, uniform_const.pass, uniform_fact.pass, uniform_fact.c, uniform_fact.c_inner
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("AC1", "Gaussian recovery", ac1),
        ("AC2", "flow and metric identities", ac2),
        ("AC3", "stochastic completeness", ac3),
        ("AC4", "Chapman-Kolmogorov", ac4),
        ("AC5", "norm formula consistency", ac5),
        ("AC6", "bump train uniform bounds", ac6),
        ("AC7", "factorial plateau blow-up", ac7),
        ("AC8", "bump train non-semiboundedness", ac8),
        ("AC9", "contraction dichotomy", ac9),
        ("AC10", "Garding inequality", ac10),
        ("AC11", "volume doubling", ac11),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] {id} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
