use bsrelay::bench::{simulate_af_ber, simulate_df_ber, McSpec};
use bsrelay::perf::*;
use bsrelay::statmodels::{build_af_models, build_df_dest_models, build_df_relay_models};
use bsrelay::sysmodel::{watts_to_dbm, ChannelRealization, LinkParams, SystemParams};
use bsrelay::thresholds::ThresholdKind;
use proptest::prelude::*;

fn fig_params(budget: f64) -> LinkParams {
    SystemParams {
        power_budget_dbm: budget,
        interference_relay_dbm: -70.0,
        interference_dest_dbm: -85.0,
        ..SystemParams::default()
    }
    .resolve()
    .unwrap()
}

#[test]
fn end_to_end_examples() {
    assert!((df_end_to_end_ber(0.1, 0.2) - 0.26).abs() < 1e-15);
    assert_eq!(df_end_to_end_ber(0.0, 0.0), 0.0);
    assert_eq!(df_end_to_end_ber(0.5, 0.5), 0.5);
    assert_eq!(df_end_to_end_ber(1.0, 1.0), 0.0);
}

#[test]
fn degenerate_thresholds_give_half() {
    let lp = fig_params(20.0);
    let ch = ChannelRealization::unit(&lp);
    for pair in [build_df_relay_models(&lp, &ch), build_df_dest_models(&lp, &ch), build_af_models(&lp, &ch)] {
        assert!((link_ber(&pair, 0.0).unwrap().value - 0.5).abs() < 1e-15);
    }
    // no slot-1 power leaves nothing to detect at the relay
    let lp0 = lp.with_slot1_power(0.0);
    let relay = build_df_relay_models(&lp0, &ch);
    for kind in ThresholdKind::ALL {
        assert!((link_ber_kind(&relay, kind).unwrap().value - 0.5).abs() < 1e-12);
    }
}

#[test]
fn ber_falls_with_budget() {
    for kind in ThresholdKind::ALL {
        let mut prev_af = 0.5;
        let mut prev_df = 0.5;
        for b in (10..=34).step_by(2) {
            let lp = fig_params(b as f64);
            let ch = ChannelRealization::unit(&lp);
            let af = af_ber(&lp, &ch, kind).unwrap().value;
            let df = optimize_power_allocation(&lp, &ch, kind).unwrap().achieved_ber;
            assert!(af <= prev_af + 1e-12, "{kind} AF at {b} dBm");
            assert!(df <= prev_df + 1e-12, "{kind} DF at {b} dBm");
            prev_af = af;
            prev_df = df;
        }
    }
}

#[test]
fn analytic_matches_small_monte_carlo() {
    let mc = McSpec {
        iterations: 100,
        symbols: 1000,
    };
    let n = (mc.iterations * mc.symbols) as f64;
    for (i, budget) in [18.0, 22.0, 26.0].into_iter().enumerate() {
        let lp = fig_params(budget);
        let ch = ChannelRealization::unit(&lp);
        for (k, kind) in ThresholdKind::ALL.into_iter().enumerate() {
            let stream = ((i * 3 + k) as u64) << 40;
            let af = af_ber(&lp, &ch, kind).unwrap().value;
            let af_mc = simulate_af_ber(&lp, &ch, kind, 11, stream, &mc).unwrap();
            let se = (af * (1.0 - af) / n).sqrt();
            assert!((af - af_mc).abs() < 3.0 * se, "AF {kind} {budget}: {af} vs {af_mc}");

            let alloc = optimize_power_allocation(&lp, &ch, kind).unwrap();
            let lp2 = lp.with_slot1_power(alloc.p_slot1);
            let df_mc = simulate_df_ber(&lp2, &ch, kind, 11, stream | 1 << 36, &mc).unwrap();
            let df = alloc.achieved_ber;
            let se = (df * (1.0 - df) / n).sqrt();
            assert!((df - df_mc).abs() < 3.0 * se, "DF {kind} {budget}: {df} vs {df_mc}");
        }
    }
}

#[test]
fn allocation_beats_grid_and_keeps_budget() {
    for budget in [15.0, 20.0, 25.0, 30.0] {
        let lp = fig_params(budget);
        let ch = ChannelRealization::unit(&lp);
        for kind in ThresholdKind::ALL {
            let a = optimize_power_allocation(&lp, &ch, kind).unwrap();
            assert!((a.p_slot1 + a.p_slot2 - lp.p_s).abs() <= 1e-12 * lp.p_s);
            assert!(a.p_slot1 > 0.0 && a.p_slot2 > 0.0);
            let check = df_ber(&lp.with_slot1_power(a.p_slot1), &ch, kind).unwrap();
            assert_eq!(check.end_to_end, a.achieved_ber);
            for i in 0..200 {
                let p1 = lp.p_s * (i as f64 + 0.5) / 200.0;
                let b = df_ber(&lp.with_slot1_power(p1), &ch, kind).unwrap().end_to_end;
                assert!(a.achieved_ber <= b * (1.0 + 1e-9), "{kind} {budget}: {p1}");
            }
        }
    }
}

#[test]
fn baseline_split_favours_slot2() {
    let mut prev = 1.0;
    for budget in [20.0, 25.0, 30.0] {
        let lp = SystemParams {
            power_budget_dbm: budget,
            ..SystemParams::default()
        }
        .resolve()
        .unwrap();
        let a = optimize_power_allocation(&lp, &ChannelRealization::unit(&lp), ThresholdKind::Optimal).unwrap();
        assert!(a.slot1_fraction() < 0.5);
        assert!(a.slot1_fraction() <= prev);
        prev = a.slot1_fraction();
    }
}

#[test]
fn stationarity_residual_changes_sign_around_optimum() {
    let lp = fig_params(25.0);
    let ch = ChannelRealization::unit(&lp);
    let a = optimize_power_allocation(&lp, &ch, ThresholdKind::Optimal).unwrap();
    let below = stationarity_residual(&lp, &ch, a.p_slot1 / 4.0, ThresholdKind::Optimal).unwrap();
    let above = stationarity_residual(&lp, &ch, a.p_slot1 * 4.0, ThresholdKind::Optimal).unwrap();
    assert!(below < 0.0, "{below}");
    assert!(above > 0.0, "{above}");
    assert!(stationarity_residual(&lp, &ch, 0.0, ThresholdKind::Optimal).is_err());
    assert!(stationarity_residual(&lp, &ch, lp.p_s, ThresholdKind::Optimal).is_err());
}

#[test]
fn outage_limits_and_determinism() {
    let lp = SystemParams::default().resolve().unwrap();
    let mut opts = OutageOptions {
        n_periods: 40,
        ber_threshold: 1.0,
        reoptimize_allocation: true,
    };
    for scheme in [Scheme::Df, Scheme::Af] {
        opts.ber_threshold = 1.0;
        let o = outage_probability(&lp, scheme, ThresholdKind::Gaussian, 5, &opts).unwrap();
        assert_eq!(o.outage_count, 0);
        opts.ber_threshold = 0.0;
        let o = outage_probability(&lp, scheme, ThresholdKind::Gaussian, 5, &opts).unwrap();
        assert_eq!(o.probability, 1.0);
        opts.ber_threshold = 1e-2;
        let a = outage_probability(&lp, scheme, ThresholdKind::Gaussian, 5, &opts).unwrap();
        let b = outage_probability(&lp, scheme, ThresholdKind::Gaussian, 5, &opts).unwrap();
        assert_eq!(a, b);
    }
    opts.n_periods = 0;
    assert!(outage_probability(&lp, Scheme::Af, ThresholdKind::Gaussian, 5, &opts).is_err());
}

#[test]
fn scheme_names_roundtrip() {
    for s in [Scheme::Df, Scheme::Af] {
        assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
    }
    assert!("cf".parse::<Scheme>().is_err());
}

proptest! {
    #[test]
    fn end_to_end_bounds(p1 in 0.0f64..=0.5, p2 in 0.0f64..=0.5) {
        let e = df_end_to_end_ber(p1, p2);
        prop_assert!(e >= p1.max(p2) - 1e-15);
        prop_assert!(e <= (p1 + p2).min(0.5) + 1e-15);
        prop_assert_eq!(e, df_end_to_end_ber(p2, p1));
    }

    #[test]
    fn link_ber_is_a_probability(budget in 5.0f64..40.0, t_scale in 1e-3f64..1e3) {
        let lp = fig_params(budget);
        let ch = ChannelRealization::unit(&lp);
        let pair = build_af_models(&lp, &ch);
        let t = t_scale * pair.mean(0);
        let b = link_ber(&pair, t).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&b));
        let best = link_ber_kind(&pair, ThresholdKind::Optimal).unwrap().value;
        prop_assert!(best <= b * (1.0 + 1e-9) + 1e-300);
    }
}

#[test]
fn symmetric_hops_balance_at_the_optimum() {
    // Relay noise is thermal so the relay reflects no interference forward.
    for budget in [-8.0, -4.0, 0.0] {
        let mut p = SystemParams {
            power_budget_dbm: budget,
            power_slot1_dbm: budget - 3.0,
            noise_relay_dbm: -60.0,
            interference_relay_dbm: -200.0,
            interference_dest_dbm: -200.0,
            ..SystemParams::default()
        };
        // destination noise chosen so both hops see the same SNR per watt
        let lp = p.resolve().unwrap();
        let ch = ChannelRealization::unit(&lp);
        let relay = build_df_relay_models(&lp, &ch);
        let dest = build_df_dest_models(&lp, &ch);
        let k_r = relay.alpha[1].norm_sqr() / lp.p_s1;
        let k_d = dest.alpha[1].norm_sqr() / lp.p_s2;
        p.noise_dest_dbm = watts_to_dbm(relay.sigma_sq[0] * k_d / k_r);
        let lp = p.resolve().unwrap();
        let a = optimize_power_allocation(&lp, &ch, ThresholdKind::Optimal).unwrap();
        let rel = (a.ber_relay - a.ber_dest).abs() / a.ber_relay.max(a.ber_dest);
        assert!(a.ber_relay > 1e-6, "{budget} dBm: p1 {}", a.ber_relay);
        assert!(rel < 0.1, "{budget} dBm: p1 {} p2 {}", a.ber_relay, a.ber_dest);
        assert!((a.slot1_fraction() - 0.5).abs() < 0.05, "{}", a.slot1_fraction());
    }
}

#[test]
fn stationarity_residual_is_small_at_optimum() {
    let lp = fig_params(30.0);
    let ch = ChannelRealization::unit(&lp);
    let kind = ThresholdKind::Optimal;
    let a = optimize_power_allocation(&lp, &ch, kind).unwrap();
    let at = |p: f64| stationarity_residual(&lp, &ch, p, kind).unwrap();
    let eps = ALLOCATION_EPS * lp.p_s;
    let scale = at(eps).abs().max(at(lp.p_s - eps).abs());
    assert!(at(a.p_slot1).abs() < 0.1 * scale, "{} vs {scale}", at(a.p_slot1));
}
