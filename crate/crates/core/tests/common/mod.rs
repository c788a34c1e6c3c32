//! Reference implementations used as test oracles. Nothing here calls into
//! the library's numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite 20-point Gauss-Legendre over `panels` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (hi - lo) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let c = lo + (p as f64 + 0.5) * h;
        for &(x, w) in &rule {
            sum += w * f(c + 0.5 * h * x);
        }
    }
    sum * 0.5 * h
}

/// Composite Simpson with `panels` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..panels {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// `I_n(x) = (1/π) ∫_0^π e^{x cos θ} cos(nθ) dθ`, by Simpson. Only for
/// moderate `x`, where the integrand neither overflows nor cancels.
pub fn bessel_i_direct(n: u32, x: f64, panels: usize) -> f64 {
    simpson(|t| (x * t.cos()).exp() * (n as f64 * t).cos(), 0.0, PI, panels) / PI
}

/// `ln I_n(x)` from the same integral taken along the contour through the
/// saddle point. There the integrand is non-oscillatory and periodic, so the
/// trapezoid rule converges geometrically at any `x` and `n`.
pub fn ln_bessel_i(n: u32, x: f64) -> f64 {
    assert!(x > 0.0);
    let nf = n as f64;
    let r = (x * x + nf * nf).sqrt();
    let e0 = r - nf * (nf / x).asinh();
    let f = |t: f64| (r * (t.cos() - 1.0)).exp() * (nf * (t - t.sin())).cos();
    let mean = |m: usize| (0..m).map(|j| f(-PI + 2.0 * PI * j as f64 / m as f64)).sum::<f64>() / m as f64;
    let mut m = 64;
    let mut prev = mean(m);
    loop {
        m *= 2;
        let next = mean(m);
        if (next - prev).abs() <= 1e-14 * next.abs() || m >= 1 << 22 {
            return e0 + next.ln();
        }
        prev = next;
    }
}

/// `Q_M(a, b) = ∫_b^∞ x (x/a)^{M-1} e^{-(x²+a²)/2} I_{M-1}(ax) dx`, `a > 0`.
pub fn marcum_q(m: u32, a: f64, b: f64) -> f64 {
    assert!(a > 0.0);
    let mf = m as f64;
    let ln_f = |x: f64| {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        mf * x.ln() - (mf - 1.0) * a.ln() - 0.5 * (x * x + a * a) + ln_bessel_i(m - 1, a * x)
    };
    let hi = b.max(a + (2.0 * mf).sqrt()) + 40.0;
    integrate(|x| ln_f(x).exp(), b, hi, 400)
}

/// `P(k, x) = γ(k, x)/Γ(k)`, normalized by the same quadrature over the
/// full support. `k ≥ 1`.
pub fn reg_gamma_lower(k: f64, x: f64) -> f64 {
    assert!(k >= 1.0);
    let mode = k - 1.0;
    let f = |t: f64| {
        if t <= 0.0 {
            if k == 1.0 { (-mode).exp() } else { 0.0 }
        } else {
            ((k - 1.0) * (t / mode.max(1.0)).ln() - (t - mode)).exp()
        }
    };
    let hi = k + 60.0 * k.sqrt() + 60.0;
    let total = integrate(f, 0.0, hi, 2000);
    if x >= hi {
        return 1.0;
    }
    integrate(f, 0.0, x, 2000) / total
}

/// Noncentral chi-squared log density as a Poisson mixture of central
/// chi-squared densities. No Bessel function involved.
pub fn ln_ncchisq_pdf_series(dof: u32, lambda: f64, x: f64) -> f64 {
    let half = 0.5 * lambda;
    let width = 40.0 * half.sqrt() + 60.0;
    let lo = (half - width).max(0.0) as u32;
    let hi = (half + width) as u32;
    let mut ln_fact = ln_factorial(lo);
    let mut ln_gam = ln_gamma_half_int(dof as f64 + 2.0 * lo as f64);
    let mut terms = Vec::with_capacity((hi - lo + 1) as usize);
    for j in lo..=hi {
        if j > lo {
            ln_fact += (j as f64).ln();
            // Γ(k + 1) = k Γ(k)
            ln_gam += (0.5 * dof as f64 + j as f64 - 1.0).ln();
        }
        let k = 0.5 * dof as f64 + j as f64;
        let ln_pois = -half + j as f64 * half.max(1e-300).ln() - ln_fact;
        let ln_chi = (k - 1.0) * x.ln() - 0.5 * x - k * 2f64.ln() - ln_gam;
        terms.push(ln_pois + ln_chi);
    }
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

pub fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `ln Γ(m/2)` for a positive integer `m`, by exact recursion.
pub fn ln_gamma_half_int(m: f64) -> f64 {
    let m = m.round() as u64;
    assert!(m >= 1);
    if m.is_multiple_of(2) {
        ln_factorial((m / 2 - 1) as u32)
    } else {
        // Γ(j + 1/2) = √π ∏_{i=0}^{j-1} (i + 1/2)
        let j = (m - 1) / 2;
        0.5 * PI.ln() + (0..j).map(|i| (i as f64 + 0.5).ln()).sum::<f64>()
    }
}

/// Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// One checked claim: description plus outcome.
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ok,
            detail: detail.into(),
        }
    }
}

/// Every special-function oracle comparison at its stated tolerance.
pub fn specfun_checks() -> Vec<Check> {
    use bsrelay::specfun as sf;
    let mut out = Vec::new();

    // Bessel: log-spaced grid, four orders, 1e-9 relative on I itself
    let mut worst = 0.0f64;
    for &n in &[0u32, 1, 24, 49] {
        for &x in &log_grid(1e-3, 1e4, 29) {
            let got = sf::log_bessel_i(n, x).unwrap();
            let want = ln_bessel_i(n, x);
            worst = worst.max((got - want).exp_m1().abs());
        }
    }
    out.push(Check::new("log_bessel_i grid", worst < 1e-9, format!("max rel err {worst:.2e}")));

    let direct = bessel_i_direct(1, 1.0, 100_000);
    let got = sf::log_bessel_i(1, 1.0).unwrap().exp();
    out.push(Check::new(
        "I_1(1) direct quadrature",
        rel_err(got, direct) < 1e-10,
        format!("rel err {:.2e}", rel_err(got, direct)),
    ));
    out.push(Check::new(
        "log_bessel_i trivial",
        sf::log_bessel_i(0, 0.0).unwrap() == 0.0 && sf::log_bessel_i(3, 0.0).unwrap() == f64::NEG_INFINITY,
        "",
    ));

    // regularized gamma
    let mut worst = 0.0f64;
    for &(k, x) in &[(25.0, 25.0), (25.0, 10.0), (25.0, 40.0), (1.0, 2.0), (3.5, 1.2), (50.0, 45.0)] {
        let got = sf::reg_gamma_lower(k, x).unwrap();
        worst = worst.max(rel_err(got, reg_gamma_lower(k, x)));
    }
    out.push(Check::new("reg_gamma_lower quadrature", worst < 1e-10, format!("max rel err {worst:.2e}")));
    out.push(Check::new(
        "reg_gamma_lower trivial",
        sf::reg_gamma_lower(25.0, 0.0).unwrap() == 0.0
            && (sf::reg_gamma_lower(1.0, 2.0).unwrap() - (1.0 - (-2f64).exp())).abs() < 1e-15,
        "",
    ));

    // Marcum Q
    let mut worst = 0.0f64;
    for &(m, a, b) in &[(25u32, 5.0, 6.0), (1, 1.0, 2.0), (25, 10.0, 3.0), (26, 12.0, 14.0), (5, 0.5, 4.0)] {
        let got = sf::marcum_q(m, a, b).unwrap();
        worst = worst.max((got - marcum_q(m, a, b)).abs());
    }
    out.push(Check::new("marcum_q quadrature", worst < 1e-8, format!("max abs err {worst:.2e}")));
    let trivial = (sf::marcum_q(25, 3.0, 0.0).unwrap() - 1.0).abs() < 1e-15
        && (sf::marcum_q(1, 0.0, 2.0).unwrap() - (-2f64).exp()).abs() < 1e-15;
    out.push(Check::new("marcum_q trivial", trivial, ""));

    let diff = sf::marcum_q_diff(25, 4.0, 5.0).unwrap();
    let want = marcum_q(25, 4.0, 5.0) - marcum_q(24, 4.0, 5.0);
    out.push(Check::new(
        "marcum_q_diff quadrature",
        (diff - want).abs() < 1e-8,
        format!("abs err {:.2e}", (diff - want).abs()),
    ));
    let series = 0.5 * (-0.5f64).exp();
    let central = sf::marcum_q_diff(2, 0.0, 1.0).unwrap();
    out.push(Check::new(
        "marcum_q_diff central series",
        (central - series).abs() < 1e-14 && sf::marcum_q_diff(2, 0.5, 0.0).unwrap() == 0.0,
        format!("abs err {:.2e}", (central - series).abs()),
    ));

    // complementarity, central case
    let mut worst = 0.0f64;
    for &m in &[1u32, 25] {
        for &b in &[0.5, 2.0, 10.0] {
            let s = sf::marcum_q(m, 0.0, b).unwrap() + sf::reg_gamma_lower(m as f64, 0.5 * b * b).unwrap();
            worst = worst.max((s - 1.0).abs());
        }
    }
    out.push(Check::new("complementarity", worst < 1e-10, format!("max dev {worst:.2e}")));

    // monotonicity
    let xs: Vec<f64> = (0..400).map(|i| i as f64 * 0.1).collect();
    let q_mono = xs
        .windows(2)
        .all(|w| sf::marcum_q(25, 5.0, w[1]).unwrap() <= sf::marcum_q(25, 5.0, w[0]).unwrap());
    let p_mono = xs
        .windows(2)
        .all(|w| sf::reg_gamma_lower(25.0, w[1]).unwrap() >= sf::reg_gamma_lower(25.0, w[0]).unwrap());
    out.push(Check::new("monotonicity", q_mono && p_mono, ""));

    // domain errors
    let domain = sf::log_bessel_i(0, -1.0).is_err()
        && sf::reg_gamma_lower(0.0, 1.0).is_err()
        && sf::marcum_q(0, 1.0, 1.0).is_err()
        && sf::marcum_q_diff(1, 1.0, 1.0).is_err();
    out.push(Check::new("domain errors", domain, ""));
    out
}
