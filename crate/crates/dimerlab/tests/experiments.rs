use dimerlab::airy::tracy_widom_reference;
use dimerlab::experiments::{peierls_bound, run, Campaign, CampaignConfig, CampaignReport, Status};

fn preset(campaign: Campaign, ladder: &[usize]) -> CampaignConfig {
    CampaignConfig {
        ladder: ladder.to_vec(),
        ..CampaignConfig::preset(campaign)
    }
}

fn column(report: &CampaignReport, name: &str) -> Vec<f64> {
    report.table.numeric_column(name).unwrap()
}

#[test]
fn peierls_bound_arithmetic() {
    assert!((peierls_bound(32, 0.2, 4) - 10.368).abs() < 1e-12);
    assert!(peierls_bound(32, 0.05, 12) < 1e-8);
}

#[test]
fn long_loops_are_absent_at_small_weight() {
    let cfg = CampaignConfig {
        a: Some(0.05),
        depths: vec![12],
        samples: 500,
        ..preset(Campaign::LoopBound, &[16])
    };
    let report = run(&cfg).unwrap();
    assert_eq!(column(&report, "hits"), vec![0.0]);
    assert!(column(&report, "bound")[0] < 1e-6);
    assert!(report.passed());
}

#[test]
fn gap_determinant_agrees_with_sampling_and_tends_to_one() {
    let cfg = CampaignConfig {
        samples: 20_000,
        ..preset(Campaign::GapConvergence, &[8, 16])
    };
    let report = run(&cfg).unwrap();
    let crosses: Vec<_> = report.verdicts.iter().filter(|v| v.check.contains("Monte Carlo")).collect();
    assert_eq!(crosses.len(), 2);
    assert!(crosses.iter().all(|v| v.status == Status::Pass), "{crosses:?}");
    // The single-time limit is the GUE edge distribution at 0.
    let limit = column(&report, "limit")[0];
    assert!((limit - tracy_widom_reference(0.0, 12.0, 80)).abs() < 1e-8);

    let high = CampaignConfig {
        grid: vec![(0.0, 2.5)],
        ..preset(Campaign::GapConvergence, &[16])
    };
    let report = run(&high).unwrap();
    assert!(column(&report, "exact")[0] > 0.999);
    assert!(column(&report, "limit")[0] > 0.999);
}

#[test]
fn contour_and_oracle_gap_probabilities_agree() {
    let oracle = run(&preset(Campaign::GapConvergence, &[16])).unwrap();
    let contour = run(&CampaignConfig {
        exact_cap: Some(8),
        ..preset(Campaign::GapConvergence, &[16])
    })
    .unwrap();
    let (p, q) = (column(&oracle, "exact")[0], column(&contour, "exact")[0]);
    assert!((p - q).abs() < 1e-8, "{p} vs {q}");
}

#[test]
fn backtracking_sums_agree_between_evaluators() {
    let base = CampaignConfig {
        control_weight: None,
        ..preset(Campaign::BacktrackingScan, &[16])
    };
    let oracle = run(&base).unwrap();
    let contour = run(&CampaignConfig {
        exact_cap: Some(8),
        ..base
    })
    .unwrap();
    let (p, q) = (column(&oracle, "sum_rho")[0], column(&contour, "sum_rho")[0]);
    assert!(p > 0.0 && (p - q).abs() < 1e-8 * p.max(1.0), "{p} vs {q}");
    assert!(oracle.verdicts.iter().any(|v| v.check.contains("[0, 1]") && v.status == Status::Pass));
}

#[test]
fn control_arm_is_reported_but_not_asserted() {
    let report = run(&preset(Campaign::BacktrackingScan, &[8, 16])).unwrap();
    let control = report.verdicts.iter().find(|v| v.check.starts_with("control")).unwrap();
    assert_eq!(control.status, Status::Info);
    assert_eq!(report.table.rows.len(), 4);
}

#[test]
fn frozen_weight_has_no_height_fluctuations() {
    let cfg = CampaignConfig {
        gamma: None,
        a: Some(1e-6),
        samples: 1000,
        ..preset(Campaign::HeightStats, &[32])
    };
    let report = run(&cfg).unwrap();
    assert!(column(&report, "variance")[0] < 1e-12);
}

#[test]
fn height_means_approach_the_order() {
    let cfg = CampaignConfig {
        samples: 2000,
        ..preset(Campaign::HeightStats, &[16, 32])
    };
    let report = run(&cfg).unwrap();
    let dev = column(&report, "mean_minus_n");
    let se = column(&report, "std_error");
    for (d, s) in dev.iter().zip(&se) {
        assert!(d.abs() < 1.0 + 5.0 * s, "{d} ± {s}");
    }
    // Each sampled height is a multiple of 4, so 2000 * mean / 4 is an integer.
    for m in column(&report, "mean") {
        assert!((m * 500.0 - (m * 500.0).round()).abs() < 1e-6, "{m}");
    }
}

#[test]
fn degenerate_kernel_grid_gives_one_row_per_order() {
    let cfg = CampaignConfig {
        grid: vec![(0.0, 0.0)],
        ..preset(Campaign::KernelConvergence, &[256, 512])
    };
    let report = run(&cfg).unwrap();
    assert_eq!(report.table.rows.len(), 2);
    assert!(column(&report, "abs_error").iter().all(|e| e.is_finite()));
}

#[test]
fn grid_points_outside_the_diamond_are_rejected() {
    let cfg = CampaignConfig {
        grid: vec![(0.0, 40.0)],
        ..preset(Campaign::KernelConvergence, &[256])
    };
    assert!(run(&cfg).is_err());
}

#[test]
fn exact_g_leading_term_converges() {
    let report = run(&preset(Campaign::EklAsymptotics, &[50, 200, 800])).unwrap();
    let exact = column(&report, "exact_g_deviation");
    assert!(exact.windows(2).all(|w| w[1] < 0.6 * w[0]), "{exact:?}");
    // The small-a leading term is off by the constant exp(-1/4).
    let ratio = column(&report, "ratio_re");
    assert!((ratio[2] - (-0.25f64).exp()).abs() < 0.03, "{ratio:?}");
}

#[test]
fn bessel_campaign_decreases() {
    let report = run(&preset(Campaign::BesselLimit, &[64, 256])).unwrap();
    assert!(report.passed());
    assert_eq!(report.table.rows.len(), 18);
}

#[test]
fn verdict_document_shape() {
    let report = run(&preset(Campaign::BesselLimit, &[64, 256])).unwrap();
    let doc = report.verdict_json();
    assert_eq!(doc["campaign"], "bessel-limit");
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["verdicts"][0]["status"], "PASS");
    let csv = report.table.to_csv().unwrap();
    assert!(csv.starts_with("n,nu,p,q,finite,limit,abs_error\n"));
}
