//! Analytic bit error rates, DF source power allocation and outage.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::root::golden_section;
use crate::specfun::marcum_q_diff;
use crate::statmodels::{
    build_af_models, build_df_dest_models, build_df_relay_models, ExactModel, LinkKind, LinkStatPair,
};
use crate::sysmodel::{draw_channel, substream, ChannelRealization, LinkParams};
use crate::thresholds::{threshold, ThresholdKind};

/// Which hypothesis has the larger mean: `A` for `μ0 ≤ μ1`, `B` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseBranch {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBer {
    pub value: f64,
    pub link: LinkKind,
    pub threshold: f64,
    pub threshold_kind: Option<ThresholdKind>,
    pub case_branch: CaseBranch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Scheme {
    #[serde(rename = "DF")]
    Df,
    #[serde(rename = "AF")]
    Af,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Df => "DF",
            Scheme::Af => "AF",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "DF" | "df" => Ok(Scheme::Df),
            "AF" | "af" => Ok(Scheme::Af),
            _ => Err(Error::Config(format!("unknown scheme '{s}'"))),
        }
    }
}

/// BER at threshold `t` with equal priors.
pub fn link_ber(pair: &LinkStatPair, t: f64) -> Result<LinkBer> {
    link_ber_with_prior(pair, t, 0.5)
}

/// BER at threshold `t` when bit 1 is sent with probability `prior1`.
pub fn link_ber_with_prior(pair: &LinkStatPair, t: f64, prior1: f64) -> Result<LinkBer> {
    if !(0.0..=1.0).contains(&prior1) {
        return Err(Error::InvalidParam(format!("prior must lie in [0, 1], got {prior1}")));
    }
    let t_eval = t.max(0.0);
    let (cdf0, sf0) = pair.exact[0].cdf_sf(t_eval)?;
    let (cdf1, sf1) = pair.exact[1].cdf_sf(t_eval)?;
    let case_branch = if pair.mean(1) >= pair.mean(0) {
        CaseBranch::A
    } else {
        CaseBranch::B
    };
    let value = match case_branch {
        CaseBranch::A => (1.0 - prior1) * sf0 + prior1 * cdf1,
        CaseBranch::B => (1.0 - prior1) * cdf0 + prior1 * sf1,
    };
    Ok(LinkBer {
        value: value.clamp(0.0, 1.0),
        link: pair.link,
        threshold: t,
        threshold_kind: None,
        case_branch,
    })
}

/// BER of one link under a threshold kind. Indistinguishable hypotheses give ½.
pub fn link_ber_kind(pair: &LinkStatPair, kind: ThresholdKind) -> Result<LinkBer> {
    match threshold(pair, kind) {
        Ok(t) => {
            let mut b = link_ber(pair, t)?;
            b.threshold_kind = Some(kind);
            Ok(b)
        }
        Err(Error::NoCrossing) => Ok(LinkBer {
            value: 0.5,
            link: pair.link,
            threshold: f64::NAN,
            threshold_kind: Some(kind),
            case_branch: CaseBranch::A,
        }),
        Err(e) => Err(e),
    }
}

/// Two cascaded binary symmetric hops.
pub fn df_end_to_end_ber(p1: f64, p2: f64) -> f64 {
    p1 + p2 - 2.0 * p1 * p2
}

/// Per-hop and end-to-end DF BER at the allocation stored in `lp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfBer {
    pub relay: LinkBer,
    pub dest: LinkBer,
    pub end_to_end: f64,
}

pub fn df_ber(lp: &LinkParams, ch: &ChannelRealization, kind: ThresholdKind) -> Result<DfBer> {
    let relay = link_ber_kind(&build_df_relay_models(lp, ch), kind)?;
    let dest = link_ber_kind(&build_df_dest_models(lp, ch), kind)?;
    Ok(DfBer {
        relay,
        dest,
        end_to_end: df_end_to_end_ber(relay.value, dest.value),
    })
}

pub fn af_ber(lp: &LinkParams, ch: &ChannelRealization, kind: ThresholdKind) -> Result<LinkBer> {
    link_ber_kind(&build_af_models(lp, ch), kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationMethod {
    GridRefine,
    StationarityRoot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    pub p_slot1: f64,
    pub p_slot2: f64,
    pub achieved_ber: f64,
    pub ber_relay: f64,
    pub ber_dest: f64,
    pub method: AllocationMethod,
}

impl PowerAllocation {
    pub fn slot1_fraction(&self) -> f64 {
        self.p_slot1 / (self.p_slot1 + self.p_slot2)
    }
}

pub const ALLOCATION_EPS: f64 = 1e-4;
pub const ALLOCATION_GRID: usize = 64;
pub const ALLOCATION_RTOL: f64 = 1e-6;

/// Minimizes the end-to-end DF BER over `P_S,1 ∈ (εP_S, (1−ε)P_S)`.
pub fn optimize_power_allocation(
    lp: &LinkParams,
    ch: &ChannelRealization,
    kind: ThresholdKind,
) -> Result<PowerAllocation> {
    if !(lp.p_s > 0.0) {
        return Err(Error::InvalidParam("power budget must be positive".into()));
    }
    let p_s = lp.p_s;
    let eval = |p1: f64| df_ber(&lp.with_slot1_power(p1), ch, kind);
    let lo = ALLOCATION_EPS * p_s;
    let hi = (1.0 - ALLOCATION_EPS) * p_s;
    let ratio = (hi / lo).ln();
    let grid: Vec<f64> = (0..ALLOCATION_GRID)
        .map(|i| lo * (ratio * i as f64 / (ALLOCATION_GRID - 1) as f64).exp())
        .collect();
    let mut best_i = 0;
    let mut best = eval(grid[0])?;
    for (i, &p) in grid.iter().enumerate().skip(1) {
        let b = eval(p)?;
        if b.end_to_end < best.end_to_end {
            best = b;
            best_i = i;
        }
    }
    let mut best_p = grid[best_i];
    let a = grid[best_i.saturating_sub(1)];
    let b = grid[(best_i + 1).min(ALLOCATION_GRID - 1)];
    let (p_g, _) = golden_section(|p| Ok(eval(p)?.end_to_end), a, b, ALLOCATION_RTOL)?;
    let refined = eval(p_g)?;
    if refined.end_to_end < best.end_to_end {
        best = refined;
        best_p = p_g;
    }
    Ok(PowerAllocation {
        p_slot1: best_p,
        p_slot2: p_s - best_p,
        achieved_ber: best.end_to_end,
        ber_relay: best.relay.value,
        ber_dest: best.dest.value,
        method: AllocationMethod::GridRefine,
    })
}

/// Derivative of `p1 + p2` with respect to `P_S,1` at fixed thresholds,
/// written with `Q⁻_{N+1}` differences. Negative means more slot-1 power
/// still helps.
pub fn stationarity_residual(
    lp: &LinkParams,
    ch: &ChannelRealization,
    p_slot1: f64,
    kind: ThresholdKind,
) -> Result<f64> {
    if !(p_slot1 > 0.0 && p_slot1 < lp.p_s) {
        return Err(Error::InvalidParam(format!(
            "p_slot1 must lie in (0, {}), got {p_slot1}",
            lp.p_s
        )));
    }
    let lp = lp.with_slot1_power(p_slot1);
    let relay = build_df_relay_models(&lp, ch);
    let dest = build_df_dest_models(&lp, ch);
    let t_r = threshold(&relay, kind)?;
    let t_d = threshold(&dest, kind)?;
    // d/dP of each link BER, with P the power scaling that link's α.
    let d_relay = link_power_derivative(&relay, t_r, lp.p_s1)?;
    let d_dest = link_power_derivative(&dest, t_d, lp.p_s2)?;
    Ok(d_relay - d_dest)
}

/// `∂BER/∂P` for a link whose `|α_i|²` are proportional to `p`.
fn link_power_derivative(pair: &LinkStatPair, t: f64, p: f64) -> Result<f64> {
    let high = pair.bit_of_high_energy() as usize;
    let n = pair.n;
    let mut d = 0.0;
    for bit in 0..2 {
        let ExactModel::NcChiSq(m) = pair.exact[bit] else {
            continue;
        };
        let a = m.noncentrality.sqrt();
        let b = (t / m.scale).sqrt();
        // ∂Q_N(a, b)/∂P = (a²/2P) Q⁻_{N+1}(a, b)
        let dq = 0.5 * m.noncentrality / p * marcum_q_diff(n + 1, a, b)?;
        // the low-energy bit errs through its upper tail, the other through its lower
        let weight = if bit == high { -0.5 } else { 0.5 };
        d += weight * dq;
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageOptions {
    pub n_periods: u64,
    pub ber_threshold: f64,
    /// Re-optimize the DF split per channel draw instead of keeping the
    /// configured `P_S,1`.
    pub reoptimize_allocation: bool,
}

impl Default for OutageOptions {
    fn default() -> Self {
        Self {
            n_periods: 5000,
            ber_threshold: 1e-2,
            reoptimize_allocation: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub probability: f64,
    pub outage_count: u64,
    pub n_periods: u64,
    pub ber_threshold: f64,
    pub scheme: Scheme,
}

/// BER within one coherence period.
pub fn period_ber(
    lp: &LinkParams,
    ch: &ChannelRealization,
    scheme: Scheme,
    kind: ThresholdKind,
    reoptimize: bool,
) -> Result<f64> {
    match scheme {
        Scheme::Af => Ok(af_ber(lp, ch, kind)?.value),
        Scheme::Df if reoptimize => Ok(optimize_power_allocation(lp, ch, kind)?.achieved_ber),
        Scheme::Df => Ok(df_ber(lp, ch, kind)?.end_to_end),
    }
}

/// Fraction of coherence periods whose BER exceeds `opts.ber_threshold`.
/// Period `i` draws its channel from substream `i` of `master_seed`.
pub fn outage_probability(
    lp: &LinkParams,
    scheme: Scheme,
    kind: ThresholdKind,
    master_seed: u64,
    opts: &OutageOptions,
) -> Result<OutageEstimate> {
    if opts.n_periods == 0 {
        return Err(Error::InvalidParam("n_periods must be >= 1".into()));
    }
    let outages: Vec<bool> = (0..opts.n_periods)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(master_seed, i);
            let ch = draw_channel(lp, i, &mut rng);
            Ok(period_ber(lp, &ch, scheme, kind, opts.reoptimize_allocation)? > opts.ber_threshold)
        })
        .collect::<Result<_>>()?;
    let count = outages.iter().filter(|&&o| o).count() as u64;
    Ok(OutageEstimate {
        probability: count as f64 / opts.n_periods as f64,
        outage_count: count,
        n_periods: opts.n_periods,
        ber_threshold: opts.ber_threshold,
        scheme,
    })
}
