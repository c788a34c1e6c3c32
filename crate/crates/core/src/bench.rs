//! Experiment runner: configuration, figure sweeps and CSV output.
//!
//! Every runner returns rows in a fixed order, so the same configuration
//! and seed always give byte-identical CSV regardless of thread count.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perf::{
    df_ber, link_ber_kind, optimize_power_allocation, outage_probability, OutageOptions, Scheme,
};
use crate::statmodels::{build_af_models, build_df_dest_models, build_df_relay_models, LinkStatPair};
use crate::sysmodel::{
    draw_channel, linear_to_db, substream, watts_to_dbm, ChannelRealization, Link, LinkParams,
    ReflectionPreset, SimRng, SystemParams,
};
use crate::thresholds::{detect_value, threshold, ThresholdKind};
use crate::txsim::{af_dest_psi, df_dest_psi, df_relay_psi};

pub const CSV_COLUMNS: [&str; 7] = ["sweep_var", "value", "scheme", "threshold", "metric", "source", "seed"];

/// One output record. `scheme` may carry a variant suffix (`DF:N=50`) and
/// `source` names the quantity in `metric` (`analytic`, `montecarlo`, ...).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub sweep_var: String,
    pub value: f64,
    pub scheme: String,
    pub threshold: String,
    pub metric: f64,
    pub source: String,
    pub seed: u64,
}

pub fn write_csv<W: Write>(w: W, rows: &[Row]) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(CSV_COLUMNS)?;
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Any key accepted by [`SystemParams::set_by_key`].
    pub var: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl SweepSpec {
    pub fn range(var: &str, start: f64, stop: f64, step: f64) -> Self {
        Self {
            var: var.into(),
            values: None,
            start: Some(start),
            stop: Some(stop),
            step: Some(step),
        }
    }

    pub fn list(var: &str, values: Vec<f64>) -> Self {
        Self {
            var: var.into(),
            values: Some(values),
            start: None,
            stop: None,
            step: None,
        }
    }

    /// Expanded grid; non-empty and strictly increasing.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let g = match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(s)) => {
                if !(s > 0.0) || !(b >= a) {
                    return Err(Error::Config(format!("sweep range {a}..{b} step {s} is empty")));
                }
                let n = ((b - a) / s + 1e-9).floor() as usize;
                (0..=n).map(|i| a + s * i as f64).collect()
            }
            _ => {
                return Err(Error::Config(
                    "sweep needs either `values` or all of `start`, `stop`, `step`".into(),
                ))
            }
        };
        if g.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if g.iter().any(|v| !v.is_finite()) || g.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep grid must be finite and strictly increasing".into()));
        }
        SystemParams::default().set_by_key(&self.var, g[0])?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSpec {
    pub iterations: u64,
    pub symbols: u64,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            iterations: 1000,
            symbols: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig2Spec {
    pub interference_relay_dbm: f64,
    pub interference_dest_dbm: f64,
}

impl Default for Fig2Spec {
    fn default() -> Self {
        Self {
            interference_relay_dbm: -70.0,
            interference_dest_dbm: -85.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fig34Mode {
    Fig3,
    Fig4,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig34Spec {
    pub mode: Fig34Mode,
    /// Relay interference levels swept with the base destination level.
    pub relay_interference_levels_dbm: Vec<f64>,
    /// Destination interference levels swept with the base relay level.
    pub dest_interference_levels_dbm: Vec<f64>,
    pub fig4_interference_relay_dbm: f64,
    pub fig4_interference_dest_dbm: f64,
    pub fig4_budgets_dbm: Vec<f64>,
    /// Number of log-spaced slot-1 allocations per budget.
    pub fig4_points: usize,
}

impl Default for Fig34Spec {
    fn default() -> Self {
        Self {
            mode: Fig34Mode::Both,
            relay_interference_levels_dbm: vec![-80.0, -70.0, -60.0],
            dest_interference_levels_dbm: vec![-95.0, -90.0, -85.0],
            fig4_interference_relay_dbm: -60.0,
            fig4_interference_dest_dbm: -85.0,
            fig4_budgets_dbm: vec![20.0, 25.0, 30.0],
            fig4_points: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutageFamily {
    /// relay interference levels
    Fig5,
    /// samples per symbol and relay aperture
    Fig6,
    /// destination interference levels and the bistatic coefficients
    Fig7,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutageSpec {
    pub n_periods: u64,
    pub ber_threshold: f64,
    pub reoptimize_allocation: bool,
    pub threshold: ThresholdKind,
    pub families: Vec<OutageFamily>,
    pub relay_interference_levels_dbm: Vec<f64>,
    pub dest_interference_levels_dbm: Vec<f64>,
    pub samples_per_symbol_levels: Vec<u32>,
    pub aperture_levels: Vec<f64>,
}

impl Default for OutageSpec {
    fn default() -> Self {
        Self {
            n_periods: 2000,
            ber_threshold: 1e-2,
            reoptimize_allocation: true,
            threshold: ThresholdKind::Gaussian,
            families: vec![OutageFamily::Fig5, OutageFamily::Fig6, OutageFamily::Fig7],
            relay_interference_levels_dbm: vec![-80.0, -70.0, -60.0],
            dest_interference_levels_dbm: vec![-95.0, -90.0, -85.0, -80.0],
            samples_per_symbol_levels: vec![25, 50, 75],
            aperture_levels: vec![2.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CaseStudySpec {
    pub obstacles: u32,
    pub obstacle_loss_db: f64,
    /// Free-space loss of the direct path at the reference distance.
    pub reference_loss_db: f64,
    /// Evaluate the relay hops with 0 dB antenna gains.
    pub isotropic: bool,
}

impl Default for CaseStudySpec {
    fn default() -> Self {
        Self {
            obstacles: 3,
            obstacle_loss_db: 35.0,
            reference_loss_db: 32.0,
            isotropic: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// `|h'| = 1` on both hops
    Unit,
    /// one Rician draw
    Fading,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSpec {
    pub symbols: u64,
    pub channel: ChannelMode,
}

impl Default for SimulateSpec {
    fn default() -> Self {
        Self {
            symbols: 1000,
            channel: ChannelMode::Unit,
        }
    }
}

/// Top-level experiment file. Every section is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    pub schemes: Vec<Scheme>,
    pub thresholds: Vec<ThresholdKind>,
    pub base: SystemParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    pub mc: McSpec,
    pub fig2: Fig2Spec,
    pub fig34: Fig34Spec,
    pub outage: OutageSpec,
    pub case_study: CaseStudySpec,
    pub simulate: SimulateSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 1,
            output_path: None,
            schemes: vec![Scheme::Df, Scheme::Af],
            thresholds: ThresholdKind::ALL.to_vec(),
            base: SystemParams::default(),
            sweep: None,
            mc: McSpec::default(),
            fig2: Fig2Spec::default(),
            fig34: Fig34Spec::default(),
            outage: OutageSpec::default(),
            case_study: CaseStudySpec::default(),
            simulate: SimulateSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.schemes.is_empty() || self.thresholds.is_empty() {
            return Err(Error::Config("schemes and thresholds must be non-empty".into()));
        }
        if self.mc.iterations == 0 || self.mc.symbols == 0 {
            return Err(Error::Config("mc.iterations and mc.symbols must be >= 1".into()));
        }
        if self.mc.iterations > u32::MAX as u64 {
            return Err(Error::Config("mc.iterations must fit in 32 bits".into()));
        }
        if self.outage.n_periods == 0 {
            return Err(Error::Config("outage.n_periods must be >= 1".into()));
        }
        if self.simulate.symbols == 0 {
            return Err(Error::Config("simulate.symbols must be >= 1".into()));
        }
        if self.fig34.fig4_points < 2 {
            return Err(Error::Config("fig34.fig4_points must be >= 2".into()));
        }
        if let Some(s) = &self.sweep {
            s.grid()?;
        }
        Ok(())
    }

    /// Full volumes: 2000 x 1000 Monte Carlo symbols and 5000 outage periods.
    pub fn apply_full_scale(&mut self) {
        self.mc = McSpec {
            iterations: 2000,
            symbols: 1000,
        };
        self.outage.n_periods = 5000;
    }

    fn sweep_or(&self, default: SweepSpec) -> Result<(String, Vec<f64>)> {
        let s = self.sweep.clone().unwrap_or(default);
        let g = s.grid()?;
        Ok((s.var, g))
    }
}

fn apply(base: &SystemParams, var: &str, value: f64) -> Result<SystemParams> {
    let mut p = base.clone();
    p.set_by_key(var, value)?;
    Ok(p)
}

/// Monte Carlo error count over `iterations × symbols` symbols; iteration
/// `i` uses substream `stream_base | i`.
fn mc_errors<F>(seed: u64, stream_base: u64, mc: &McSpec, symbol_error: F) -> u64
where
    F: Fn(&mut SimRng) -> bool + Sync,
{
    (0..mc.iterations)
        .into_par_iter()
        .map(|it| {
            let mut rng = substream(seed, stream_base | it);
            (0..mc.symbols).filter(|_| symbol_error(&mut rng)).count() as u64
        })
        .sum()
}

fn stream_base(point: usize, scheme: Scheme, kind: ThresholdKind) -> u64 {
    let s = match scheme {
        Scheme::Df => 0u64,
        Scheme::Af => 1,
    };
    let k = match kind {
        ThresholdKind::Optimal => 0u64,
        ThresholdKind::Gaussian => 1,
        ThresholdKind::Simple => 2,
    };
    ((point as u64) << 40) | (s << 36) | (k << 32)
}

/// Threshold and high-energy bit; a pair without a crossing gets `NaN`, so
/// every statistic decides for the low-energy bit.
fn decision_rule(pair: &LinkStatPair, kind: ThresholdKind) -> Result<(f64, u8)> {
    let t = match threshold(pair, kind) {
        Ok(t) => t,
        Err(Error::NoCrossing) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok((t, pair.bit_of_high_energy()))
}

/// Empirical end-to-end DF BER at the allocation stored in `lp`.
pub fn simulate_df_ber(
    lp: &LinkParams,
    ch: &ChannelRealization,
    kind: ThresholdKind,
    seed: u64,
    stream: u64,
    mc: &McSpec,
) -> Result<f64> {
    let (t_r, hi_r) = decision_rule(&build_df_relay_models(lp, ch), kind)?;
    let (t_d, hi_d) = decision_rule(&build_df_dest_models(lp, ch), kind)?;
    let errors = mc_errors(seed, stream, mc, |rng| {
        let bit: u8 = rng.random::<bool>().into();
        let relay_bit = detect_value(df_relay_psi(lp, ch, bit, rng), t_r, hi_r);
        detect_value(df_dest_psi(lp, ch, relay_bit, rng), t_d, hi_d) != bit
    });
    Ok(errors as f64 / (mc.iterations * mc.symbols) as f64)
}

/// Empirical AF BER.
pub fn simulate_af_ber(
    lp: &LinkParams,
    ch: &ChannelRealization,
    kind: ThresholdKind,
    seed: u64,
    stream: u64,
    mc: &McSpec,
) -> Result<f64> {
    let (t, hi) = decision_rule(&build_af_models(lp, ch), kind)?;
    let errors = mc_errors(seed, stream, mc, |rng| {
        let bit: u8 = rng.random::<bool>().into();
        detect_value(af_dest_psi(lp, ch, bit, rng), t, hi) != bit
    });
    Ok(errors as f64 / (mc.iterations * mc.symbols) as f64)
}

/// One analytic/Monte Carlo pair of a BER-vs-budget figure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub scheme: Scheme,
    pub kind: ThresholdKind,
    pub analytic: f64,
    pub montecarlo: Option<f64>,
    /// DF only: optimized slot-1 power in watts.
    pub p_slot1: Option<f64>,
}

/// Analytic (and optionally simulated) BER at unit channel gains, with the
/// DF split optimized for the threshold kind in use.
pub fn ber_point(
    lp: &LinkParams,
    scheme: Scheme,
    kind: ThresholdKind,
    mc: Option<(&McSpec, u64, u64)>,
) -> Result<BerPoint> {
    let ch = ChannelRealization::unit(lp);
    match scheme {
        Scheme::Af => {
            let analytic = link_ber_kind(&build_af_models(lp, &ch), kind)?.value;
            let montecarlo = match mc {
                Some((spec, seed, stream)) => Some(simulate_af_ber(lp, &ch, kind, seed, stream, spec)?),
                None => None,
            };
            Ok(BerPoint {
                scheme,
                kind,
                analytic,
                montecarlo,
                p_slot1: None,
            })
        }
        Scheme::Df => {
            let alloc = optimize_power_allocation(lp, &ch, kind)?;
            let lp2 = lp.with_slot1_power(alloc.p_slot1);
            let montecarlo = match mc {
                Some((spec, seed, stream)) => Some(simulate_df_ber(&lp2, &ch, kind, seed, stream, spec)?),
                None => None,
            };
            Ok(BerPoint {
                scheme,
                kind,
                analytic: alloc.achieved_ber,
                montecarlo,
                p_slot1: Some(alloc.p_slot1),
            })
        }
    }
}

pub fn fig2_params(cfg: &ExperimentConfig) -> SystemParams {
    SystemParams {
        interference_relay_dbm: cfg.fig2.interference_relay_dbm,
        interference_dest_dbm: cfg.fig2.interference_dest_dbm,
        ..cfg.base.clone()
    }
}

/// BER vs budget at unit channel gains, analytic and Monte Carlo.
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let (var, grid) = cfg.sweep_or(SweepSpec::range("power_budget_dbm", 10.0, 30.0, 2.0))?;
    let base = fig2_params(cfg);
    let points: Vec<Vec<Row>> = grid
        .par_iter()
        .enumerate()
        .map(|(pi, &v)| {
            let lp = apply(&base, &var, v)?.resolve()?;
            let mut rows = Vec::new();
            for &scheme in &cfg.schemes {
                for &kind in &cfg.thresholds {
                    let sb = stream_base(pi, scheme, kind);
                    let p = ber_point(&lp, scheme, kind, Some((&cfg.mc, cfg.master_seed, sb)))?;
                    let row = |metric, source: &str| Row {
                        sweep_var: var.clone(),
                        value: v,
                        scheme: scheme.to_string(),
                        threshold: kind.to_string(),
                        metric,
                        source: source.into(),
                        seed: cfg.master_seed,
                    };
                    rows.push(row(p.analytic, "analytic"));
                    rows.push(row(p.montecarlo.unwrap_or(f64::NAN), "montecarlo"));
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(points.into_iter().flatten().collect())
}

/// Log-spaced slot-1 powers in `(εP_S, (1−ε)P_S)`.
pub fn slot1_grid(p_s: f64, points: usize) -> Vec<f64> {
    let eps = crate::perf::ALLOCATION_EPS;
    let (lo, hi) = (eps * p_s, (1.0 - eps) * p_s);
    let r = (hi / lo).ln();
    (0..points)
        .map(|i| lo * (r * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Optimal slot-1 share against the budget, and per-link BER against the
/// split at fixed budgets.
pub fn run_fig3_fig4(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let spec = &cfg.fig34;
    let mut rows = Vec::new();
    if matches!(spec.mode, Fig34Mode::Fig3 | Fig34Mode::Both) {
        let (var, grid) = cfg.sweep_or(SweepSpec::range("power_budget_dbm", 10.0, 30.0, 2.0))?;
        let mut variants: Vec<(String, SystemParams)> = Vec::new();
        for &l in &spec.relay_interference_levels_dbm {
            let p = SystemParams {
                interference_relay_dbm: l,
                ..cfg.base.clone()
            };
            variants.push((format!("DF:P_IR={l}"), p));
        }
        for &l in &spec.dest_interference_levels_dbm {
            let p = SystemParams {
                interference_dest_dbm: l,
                ..cfg.base.clone()
            };
            variants.push((format!("DF:P_ID={l}"), p));
        }
        let mut jobs: Vec<(&(String, SystemParams), ThresholdKind, f64)> = Vec::new();
        for v in &variants {
            for &k in &cfg.thresholds {
                jobs.extend(grid.iter().map(|&x| (v, k, x)));
            }
        }
        let out: Vec<[Row; 2]> = jobs
            .par_iter()
            .map(|&((label, p), kind, x)| {
                let lp = apply(p, &var, x)?.resolve()?;
                let a = optimize_power_allocation(&lp, &ChannelRealization::unit(&lp), kind)?;
                let row = |metric, source: &str| Row {
                    sweep_var: var.clone(),
                    value: x,
                    scheme: label.clone(),
                    threshold: kind.to_string(),
                    metric,
                    source: source.into(),
                    seed: cfg.master_seed,
                };
                Ok([
                    row(100.0 * a.slot1_fraction(), "analytic_slot1_percent"),
                    row(a.achieved_ber, "analytic_ber"),
                ])
            })
            .collect::<Result<_>>()?;
        rows.extend(out.into_iter().flatten());
    }
    if matches!(spec.mode, Fig34Mode::Fig4 | Fig34Mode::Both) {
        let base = SystemParams {
            interference_relay_dbm: spec.fig4_interference_relay_dbm,
            interference_dest_dbm: spec.fig4_interference_dest_dbm,
            ..cfg.base.clone()
        };
        for &budget in &spec.fig4_budgets_dbm {
            for &kind in &cfg.thresholds {
                rows.extend(fig4_rows(cfg, &base, budget, kind)?);
            }
        }
    }
    Ok(rows)
}

/// Per-link and combined BER along the slot-1 grid, plus the optimizer's
/// choice as an `analytic_optimum` row.
pub fn fig4_rows(cfg: &ExperimentConfig, base: &SystemParams, budget: f64, kind: ThresholdKind) -> Result<Vec<Row>> {
    let lp = SystemParams {
        power_budget_dbm: budget,
        ..base.clone()
    }
    .resolve()?;
    let ch = ChannelRealization::unit(&lp);
    let label = format!("DF:budget={budget}");
    let grid = slot1_grid(lp.p_s, cfg.fig34.fig4_points);
    let per_point: Vec<[f64; 3]> = grid
        .par_iter()
        .map(|&p1| {
            let b = df_ber(&lp.with_slot1_power(p1), &ch, kind)?;
            Ok([b.relay.value, b.dest.value, b.end_to_end])
        })
        .collect::<Result<_>>()?;
    let row = |x: f64, metric, source: &str| Row {
        sweep_var: "power_slot1_dbm".into(),
        value: watts_to_dbm(x),
        scheme: label.clone(),
        threshold: kind.to_string(),
        metric,
        source: source.into(),
        seed: cfg.master_seed,
    };
    let mut rows = Vec::with_capacity(3 * grid.len() + 1);
    for (&x, b) in grid.iter().zip(&per_point) {
        rows.push(row(x, b[0], "analytic_p1"));
        rows.push(row(x, b[1], "analytic_p2"));
        rows.push(row(x, b[2], "analytic_combined"));
    }
    let opt = optimize_power_allocation(&lp, &ch, kind)?;
    rows.push(row(opt.p_slot1, opt.achieved_ber, "analytic_optimum"));
    Ok(rows)
}

/// Labelled parameter variants of one outage family.
pub fn outage_variants(cfg: &ExperimentConfig, family: OutageFamily) -> Vec<(String, SystemParams)> {
    let o = &cfg.outage;
    let base = &cfg.base;
    match family {
        OutageFamily::Fig5 => o
            .relay_interference_levels_dbm
            .iter()
            .map(|&l| {
                (
                    format!("P_IR={l}"),
                    SystemParams {
                        interference_relay_dbm: l,
                        ..base.clone()
                    },
                )
            })
            .collect(),
        OutageFamily::Fig6 => {
            let mut v: Vec<(String, SystemParams)> = o
                .samples_per_symbol_levels
                .iter()
                .map(|&n| {
                    (
                        format!("N={n}"),
                        SystemParams {
                            samples_per_symbol: n,
                            ..base.clone()
                        },
                    )
                })
                .collect();
            v.extend(o.aperture_levels.iter().map(|&a| {
                (
                    format!("aperture={a}"),
                    SystemParams {
                        relay_aperture_scale: a,
                        ..base.clone()
                    },
                )
            }));
            v
        }
        OutageFamily::Fig7 => {
            let mut v: Vec<(String, SystemParams)> = o
                .dest_interference_levels_dbm
                .iter()
                .map(|&l| {
                    (
                        format!("P_ID={l}"),
                        SystemParams {
                            interference_dest_dbm: l,
                            ..base.clone()
                        },
                    )
                })
                .collect();
            v.push((
                "preset=bistatic".into(),
                base.clone().with_reflection_preset(ReflectionPreset::Bistatic),
            ));
            v
        }
    }
}

pub fn outage_options(cfg: &ExperimentConfig) -> OutageOptions {
    OutageOptions {
        n_periods: cfg.outage.n_periods,
        ber_threshold: cfg.outage.ber_threshold,
        reoptimize_allocation: cfg.outage.reoptimize_allocation,
    }
}

/// Outage probability vs budget for every configured variant and scheme.
pub fn run_outage(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let (var, grid) = cfg.sweep_or(SweepSpec::range("power_budget_dbm", 14.0, 40.0, 2.0))?;
    let opts = outage_options(cfg);
    let kind = cfg.outage.threshold;
    let mut jobs = Vec::new();
    for &fam in &cfg.outage.families {
        for (label, p) in outage_variants(cfg, fam) {
            for &scheme in &cfg.schemes {
                for &x in &grid {
                    jobs.push((format!("{scheme}:{label}"), p.clone(), scheme, x));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|(label, p, scheme, x)| {
            let lp = apply(p, &var, *x)?.resolve()?;
            let o = outage_probability(&lp, *scheme, kind, cfg.master_seed, &opts)?;
            Ok(Row {
                sweep_var: var.clone(),
                value: *x,
                scheme: label.clone(),
                threshold: kind.to_string(),
                metric: o.probability,
                source: "analytic_outage".into(),
                seed: cfg.master_seed,
            })
        })
        .collect()
}

/// Link budget of the blind-spot scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseStudy {
    pub hop_sr_loss_db: f64,
    pub hop_rd_loss_db: f64,
    pub relay_path_loss_db: f64,
    pub direct_path_loss_db: f64,
    /// Direct-path loss minus relay-path loss.
    pub margin_db: f64,
}

impl CaseStudy {
    pub fn orders_of_magnitude(&self) -> f64 {
        self.margin_db / 10.0
    }
}

pub fn case_study(cfg: &ExperimentConfig) -> Result<CaseStudy> {
    let mut p = cfg.base.clone();
    if cfg.case_study.isotropic {
        p.gain_tx_db = 0.0;
        p.gain_relay_db = 0.0;
        p.gain_dest_db = 0.0;
    }
    let sr = -linear_to_db(p.path_loss(Link::SR)?);
    let rd = -linear_to_db(p.path_loss(Link::RD)?);
    let cs = &cfg.case_study;
    let direct = cs.reference_loss_db + cs.obstacles as f64 * cs.obstacle_loss_db;
    Ok(CaseStudy {
        hop_sr_loss_db: sr,
        hop_rd_loss_db: rd,
        relay_path_loss_db: sr + rd,
        direct_path_loss_db: direct,
        margin_db: direct - (sr + rd),
    })
}

pub fn run_case_study(cfg: &ExperimentConfig) -> Result<String> {
    let c = case_study(cfg)?;
    let cs = &cfg.case_study;
    let verdict = if c.margin_db > 0.0 {
        "relay path is stronger"
    } else {
        "direct path is stronger"
    };
    Ok(format!(
        "source-relay hop loss:      {:.2} dB\n\
         relay-destination hop loss: {:.2} dB\n\
         relay path loss:            {:.2} dB\n\
         direct path loss:           {:.2} dB ({} x {} dB obstacles + {} dB reference)\n\
         margin:                     {:.2} dB ({:.2} orders of magnitude, {verdict})\n",
        c.hop_sr_loss_db,
        c.hop_rd_loss_db,
        c.relay_path_loss_db,
        c.direct_path_loss_db,
        cs.obstacles,
        cs.obstacle_loss_db,
        cs.reference_loss_db,
        c.margin_db,
        c.orders_of_magnitude(),
    ))
}

/// Per-symbol statistics, decisions and confusion counts at one
/// configuration. DF uses the configured slot-1 power.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let lp = cfg.base.resolve()?;
    if cfg.schemes.contains(&Scheme::Df) {
        cfg.base.validate_df()?;
    }
    let ch = match cfg.simulate.channel {
        ChannelMode::Unit => ChannelRealization::unit(&lp),
        ChannelMode::Fading => draw_channel(&lp, 0, &mut substream(cfg.master_seed, u64::MAX)),
    };
    let mut rows = Vec::new();
    for &scheme in &cfg.schemes {
        for &kind in &cfg.thresholds {
            let mut rng = substream(cfg.master_seed, stream_base(0, scheme, kind));
            let row = |var: &str, value: f64, metric: f64, source: &str| Row {
                sweep_var: var.into(),
                value,
                scheme: scheme.to_string(),
                threshold: kind.to_string(),
                metric,
                source: source.into(),
                seed: cfg.master_seed,
            };
            let mut confusion = [[0u64; 2]; 2];
            let analytic;
            match scheme {
                Scheme::Af => {
                    let pair = build_af_models(&lp, &ch);
                    let (t, hi) = decision_rule(&pair, kind)?;
                    analytic = link_ber_kind(&pair, kind)?.value;
                    for i in 0..cfg.simulate.symbols {
                        let bit: u8 = rng.random::<bool>().into();
                        let psi = af_dest_psi(&lp, &ch, bit, &mut rng);
                        let d = detect_value(psi, t, hi);
                        let x = i as f64;
                        rows.push(row("symbol", x, bit as f64, "true_bit"));
                        rows.push(row("symbol", x, psi, "psi"));
                        rows.push(row("symbol", x, d as f64, "decision"));
                        confusion[bit as usize][d as usize] += 1;
                    }
                }
                Scheme::Df => {
                    let (t_r, hi_r) = decision_rule(&build_df_relay_models(&lp, &ch), kind)?;
                    let (t_d, hi_d) = decision_rule(&build_df_dest_models(&lp, &ch), kind)?;
                    analytic = df_ber(&lp, &ch, kind)?.end_to_end;
                    for i in 0..cfg.simulate.symbols {
                        let bit: u8 = rng.random::<bool>().into();
                        let psi_r = df_relay_psi(&lp, &ch, bit, &mut rng);
                        let rb = detect_value(psi_r, t_r, hi_r);
                        let psi_d = df_dest_psi(&lp, &ch, rb, &mut rng);
                        let d = detect_value(psi_d, t_d, hi_d);
                        let x = i as f64;
                        rows.push(row("symbol", x, bit as f64, "true_bit"));
                        rows.push(row("symbol", x, psi_r, "psi_relay"));
                        rows.push(row("symbol", x, rb as f64, "decision_relay"));
                        rows.push(row("symbol", x, psi_d, "psi"));
                        rows.push(row("symbol", x, d as f64, "decision"));
                        confusion[bit as usize][d as usize] += 1;
                    }
                }
            }
            for (tx, c) in confusion.iter().enumerate() {
                for (rx, &n) in c.iter().enumerate() {
                    rows.push(row("confusion", 0.0, n as f64, &format!("count_tx{tx}_rx{rx}")));
                }
            }
            let errors = (confusion[0][1] + confusion[1][0]) as f64;
            rows.push(row("summary", 0.0, errors / cfg.simulate.symbols as f64, "empirical_ber"));
            rows.push(row("summary", 0.0, analytic, "analytic_ber"));
        }
    }
    Ok(rows)
}

/// Linear interpolation of the budget at which a decreasing curve crosses
/// `level`. `None` if it never does on the grid.
pub fn crossing_budget(budgets: &[f64], values: &[f64], level: f64) -> Option<f64> {
    budgets
        .windows(2)
        .zip(values.windows(2))
        .find(|(_, v)| v[0] >= level && v[1] < level)
        .map(|(b, v)| {
            // interpolate in log of the metric, which is closer to linear in dB
            let (l0, l1, lt) = (v[0].max(1e-300).ln(), v[1].max(1e-300).ln(), level.ln());
            if l0 == l1 {
                b[0]
            } else {
                b[0] + (b[1] - b[0]) * (l0 - lt) / (l0 - l1)
            }
        })
}
