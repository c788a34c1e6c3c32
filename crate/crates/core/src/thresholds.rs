//! Detection thresholds and the energy-detection decision rule.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::root::bisect_secant;
use crate::statmodels::LinkStatPair;
use crate::txsim::TestStatistic;

pub const MAX_BRACKET_EXPANSIONS: usize = 60;
pub const OPTIMAL_XTOL_REL: f64 = 1e-15;
pub const OPTIMAL_RESIDUAL_TOL: f64 = 1e-9;
/// Relative variance gap below which the Gaussian threshold is the midpoint.
pub const GAUSSIAN_DEGENERACY_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    Optimal,
    Gaussian,
    Simple,
}

impl ThresholdKind {
    pub const ALL: [ThresholdKind; 3] = [ThresholdKind::Optimal, ThresholdKind::Gaussian, ThresholdKind::Simple];

    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdKind::Optimal => "optimal",
            ThresholdKind::Gaussian => "gaussian",
            ThresholdKind::Simple => "simple",
        }
    }
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThresholdKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(ThresholdKind::Optimal),
            "gaussian" => Ok(ThresholdKind::Gaussian),
            "simple" => Ok(ThresholdKind::Simple),
            _ => Err(Error::Config(format!("unknown threshold kind '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSet {
    pub t_optimal: f64,
    pub t_gaussian: f64,
    pub t_simple: f64,
    pub bit_of_high_energy: u8,
}

impl ThresholdSet {
    pub fn compute(pair: &LinkStatPair) -> Result<Self> {
        Ok(Self {
            t_optimal: optimal_threshold(pair)?,
            t_gaussian: gaussian_threshold(pair),
            t_simple: simple_threshold(pair),
            bit_of_high_energy: pair.bit_of_high_energy(),
        })
    }

    pub fn get(&self, kind: ThresholdKind) -> f64 {
        match kind {
            ThresholdKind::Optimal => self.t_optimal,
            ThresholdKind::Gaussian => self.t_gaussian,
            ThresholdKind::Simple => self.t_simple,
        }
    }
}

pub fn threshold(pair: &LinkStatPair, kind: ThresholdKind) -> Result<f64> {
    match kind {
        ThresholdKind::Optimal => optimal_threshold(pair),
        ThresholdKind::Gaussian => Ok(gaussian_threshold(pair)),
        ThresholdKind::Simple => Ok(simple_threshold(pair)),
    }
}

/// Crossing of the two exact densities nearest the interval between the
/// means.
pub fn optimal_threshold(pair: &LinkStatPair) -> Result<f64> {
    if pair.exact[0] == pair.exact[1] {
        return Err(Error::NoCrossing);
    }
    let (m0, m1) = (pair.mean(0), pair.mean(1));
    let lo = m0.min(m1);
    let hi = m0.max(m1);
    let g = |x: f64| pair.log_ratio(x);

    // Evaluated points in increasing order; a sign change between neighbours
    // brackets a crossing.
    let mut pts: Vec<(f64, f64)> = vec![(lo, g(lo)?)];
    if hi > lo {
        pts.push((hi, g(hi)?));
    }
    let mut expansions = 0;
    let bracket = loop {
        if let Some(br) = innermost_sign_change(&pts, lo, hi) {
            break br;
        }
        if expansions == MAX_BRACKET_EXPANSIONS {
            return Err(Error::BracketFailure(expansions));
        }
        expansions += 1;
        let new_lo = pts[0].0 * 0.5;
        let new_hi = pts[pts.len() - 1].0 * 2.0;
        pts.insert(0, (new_lo, g(new_lo)?));
        pts.push((new_hi, g(new_hi)?));
    };
    let ((a, fa), (b, fb)) = bracket;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let xtol = OPTIMAL_XTOL_REL * hi;
    let t = bisect_secant(&g, a, b, xtol, 1e-3 * OPTIMAL_RESIDUAL_TOL)?;
    let r = g(t)?.abs();
    if r <= OPTIMAL_RESIDUAL_TOL {
        return Ok(t);
    }
    polish_ulps(&g, t, r)
}

/// Floats within this many ulps of a converged root are searched when the
/// residual is still above tolerance.
const POLISH_ULPS: u64 = 64;

/// At high SNR both log densities are large in magnitude and the residual is
/// quantized at their ulp. Returns the float near `t` with the smallest
/// computed residual, stopping at the first one under tolerance.
fn polish_ulps<G: Fn(f64) -> Result<f64>>(g: &G, t: f64, r: f64) -> Result<f64> {
    let mut best = (r, t);
    for k in 1..=POLISH_ULPS {
        for x in [f64::from_bits(t.to_bits() + k), f64::from_bits(t.to_bits() - k)] {
            let rx = g(x)?.abs();
            if rx < best.0 {
                best = (rx, x);
                if rx <= OPTIMAL_RESIDUAL_TOL {
                    return Ok(x);
                }
            }
        }
    }
    Ok(best.1)
}

type Point = (f64, f64);

/// Adjacent pair with opposite signs closest to `[lo, hi]`.
fn innermost_sign_change(pts: &[Point], lo: f64, hi: f64) -> Option<(Point, Point)> {
    let mut best: Option<(f64, (Point, Point))> = None;
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if !(p.1.is_finite() || q.1.is_finite()) {
            continue;
        }
        if p.1 == 0.0 || q.1 == 0.0 || p.1.signum() != q.1.signum() {
            let dist = if q.0 <= lo {
                lo - q.0
            } else if p.0 >= hi {
                p.0 - hi
            } else {
                0.0
            };
            if best.is_none_or(|(d, _)| dist < d) {
                best = Some((dist, (p, q)));
            }
        }
    }
    best.map(|(_, br)| br)
}

/// Both roots of `N(x; μ0, v0) = N(x; μ1, v1)`, smaller first.
/// `None` when the variances coincide.
pub fn gaussian_threshold_candidates(mu0: f64, v0: f64, mu1: f64, v1: f64) -> Option<(f64, f64)> {
    let a = v0 - v1;
    if a.abs() < GAUSSIAN_DEGENERACY_RTOL * v0 {
        return None;
    }
    let bh = mu0 * v1 - mu1 * v0;
    let dmu = mu1 - mu0;
    let disc = v0 * v1 * (dmu * dmu + a * (v0 / v1).ln());
    let sq = disc.max(0.0).sqrt();
    let c0 = mu1 * mu1 * v0 - mu0 * mu0 * v1 + v0 * v1 * (v1 / v0).ln();
    // a x² + 2 bh x + c0 = 0, roots from the cancellation-free pair
    let q = -(bh + bh.signum() * sq);
    let (r1, r2) = if q != 0.0 {
        (q / a, c0 / q)
    } else {
        (-bh / a, -bh / a)
    };
    let g = |x: f64| (x - mu1) * (x - mu1) * v0 - (x - mu0) * (x - mu0) * v1 + v0 * v1 * (v1 / v0).ln();
    let dg = |x: f64| 2.0 * ((x - mu1) * v0 - (x - mu0) * v1);
    let polish = |mut x: f64| {
        for _ in 0..3 {
            let d = dg(x);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let step = g(x) / d;
            if !step.is_finite() {
                break;
            }
            x -= step;
        }
        x
    };
    let (r1, r2) = (polish(r1), polish(r2));
    Some((r1.min(r2), r1.max(r2)))
}

/// Gaussian-approximation threshold. The narrower density wins on a bounded
/// interval between the two roots; the threshold is the edge of that
/// interval facing the other mean.
pub fn gaussian_threshold(pair: &LinkStatPair) -> f64 {
    let [g0, g1] = pair.gauss;
    match gaussian_threshold_candidates(g0.mean, g0.variance, g1.mean, g1.variance) {
        None => 0.5 * (g0.mean + g1.mean),
        Some((small, large)) => {
            if (g1.mean >= g0.mean) == (g1.variance > g0.variance) {
                large
            } else {
                small
            }
        }
    }
}

pub fn simple_threshold(pair: &LinkStatPair) -> f64 {
    0.5 * (pair.gauss[0].mean + pair.gauss[1].mean)
}

/// Energy detector: the high-energy bit when `ψ ≥ t`.
pub fn detect(psi: &TestStatistic, t: f64, bit_of_high_energy: u8) -> u8 {
    detect_value(psi.value, t, bit_of_high_energy)
}

#[inline]
pub fn detect_value(psi: f64, t: f64, bit_of_high_energy: u8) -> u8 {
    if psi >= t {
        bit_of_high_energy
    } else {
        1 - bit_of_high_energy
    }
}
