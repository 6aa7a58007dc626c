//! Campaigns comparing finite-`n` quantities with their limits.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{list, strictly_decreasing, CampaignConfig, CampaignReport, Status, Table, Verdict};
use crate::airy::{airy_process_fdd, window_limit, AiryContours, AiryQuery};
use crate::analytic::asymptotics::{e_kl_leading, e_kl_leading_exact_g};
use crate::analytic::window::{rescaled_kernel, ScalingWindow};
use crate::analytic::{AnalyticKernel, InverseEvaluator};
use crate::bessel::bessel_limit_check;
use crate::error::{Error, Result};
use crate::geometry::{gap_event_edges, snap_time};
use crate::lattice::{build_model, LatticeModel, Point, C64};
use crate::oracle::{gap_probability_exact, gap_probability_with, invert_kasteleyn};
use crate::sampler::map_samples;

/// The scaling window of order `n` for a campaign, with box height `beta = 1`.
pub(super) fn window(cfg: &CampaignConfig, n: usize) -> Result<ScalingWindow> {
    match cfg.a {
        Some(a) => {
            let gamma = cfg.gamma.unwrap_or(1.0 + a.ln() / (n as f64).ln());
            ScalingWindow::with_weight(n, gamma, a, 1.0)
        }
        None => {
            let gamma = cfg
                .gamma
                .ok_or_else(|| Error::InvalidArgument(format!("{} needs either gamma or a", cfg.campaign)))?;
            ScalingWindow::new(n, gamma, 1.0)
        }
    }
}

fn inside(n: usize, p: Point) -> bool {
    let top = 2 * n as i64;
    (0..=top).contains(&p.x1) && (0..=top).contains(&p.x2)
}

/// Every rounded grid point must give lattice points inside the diamond.
pub(super) fn check_admissible(cfg: &CampaignConfig) -> Result<()> {
    for &n in &cfg.ladder {
        let w = window(cfg, n)?;
        for &(u, v) in &cfg.grid {
            let ok = match cfg.campaign {
                super::Campaign::GapConvergence => {
                    let time = snap_time(u, w.q_n);
                    let x = w.reference + (v * w.p_n).ceil() as i64;
                    inside(n, Point::new(x - time, x + time))
                }
                _ => {
                    let p = w.round(u, v);
                    (0..2u8).all(|e| inside(n, w.white(&p, e)) && inside(n, w.black(&p, e)))
                }
            };
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "{}: grid point ({u}, {v}) leaves the order-{n} diamond",
                    cfg.campaign
                )));
            }
        }
    }
    Ok(())
}

pub fn run_kernel_convergence(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let spec = AiryContours::default();
    let mut table = Table::new(&[
        "n",
        "a",
        "alpha_i",
        "beta_i",
        "alpha_j",
        "beta_j",
        "achieved_alpha_i",
        "achieved_beta_i",
        "achieved_alpha_j",
        "achieved_beta_j",
        "finite_re",
        "finite_im",
        "limit",
        "abs_error",
        "nodes",
        "status",
    ]);
    let mut maxima = Vec::new();
    let mut equal_time = Vec::new();
    for &n in &cfg.ladder {
        let w = window(cfg, n)?;
        let kernel = AnalyticKernel::new(n, w.a)?;
        let points: Vec<_> = cfg.grid.iter().map(|&(al, be)| w.round(al, be)).collect();
        let pairs: Vec<(usize, usize)> = (0..points.len())
            .flat_map(|i| (0..points.len()).map(move |j| (i, j)))
            .collect();
        let cells: Vec<_> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let (pi, pj) = (&points[i], &points[j]);
                let finite = rescaled_kernel(&w, &kernel, pi, 0, pj, 0);
                let limit = window_limit(pi.alpha, pi.beta, pj.alpha, pj.beta, &spec);
                (i, j, finite, limit)
            })
            .collect();
        let mut worst = 0.0f64;
        let mut worst_equal = 0.0f64;
        let mut failed = false;
        for (i, j, finite, limit) in cells {
            let (pi, pj) = (&points[i], &points[j]);
            let (value, nodes, err_text) = match &finite {
                Ok(r) => (r.value, r.nodes, None),
                Err(e) => (C64::new(f64::NAN, f64::NAN), 0, Some(e.to_string())),
            };
            let (lim, lim_text) = match &limit {
                Ok(v) => (*v, None),
                Err(e) => (f64::NAN, Some(e.to_string())),
            };
            let error = (value - lim).norm();
            failed |= error.is_nan();
            worst = worst.max(error);
            if pi.time == pj.time {
                worst_equal = worst_equal.max(error);
            }
            let status = err_text.or(lim_text).unwrap_or_else(|| "ok".into());
            table.push(vec![
                n.into(),
                w.a.into(),
                pi.requested_alpha.into(),
                pi.requested_beta.into(),
                pj.requested_alpha.into(),
                pj.requested_beta.into(),
                pi.alpha.into(),
                pi.beta.into(),
                pj.alpha.into(),
                pj.beta.into(),
                value.re.into(),
                value.im.into(),
                lim.into(),
                error.into(),
                nodes.into(),
                status.into(),
            ]);
        }
        maxima.push(if failed { f64::NAN } else { worst });
        equal_time.push(worst_equal);
    }
    let verdicts = vec![
        Verdict::new(
            "max kernel error strictly decreasing in n",
            Status::from_bool(maxima.iter().all(|v| v.is_finite()) && strictly_decreasing(&maxima)),
            format!("ladder {:?}, max errors {}", cfg.ladder, list(&maxima)),
        ),
        Verdict::new(
            "equal-time pairs (Airy part only)",
            Status::Info,
            format!("max errors {}", list(&equal_time)),
        ),
    ];
    Ok(CampaignReport {
        config: cfg.clone(),
        table,
        verdicts,
    })
}

pub fn run_ekl_asymptotics(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let mut table = Table::new(&[
        "m",
        "a",
        "ratio_re",
        "ratio_im",
        "deviation",
        "exact_g_ratio_re",
        "exact_g_ratio_im",
        "exact_g_deviation",
        "nodes",
        "relative_error",
    ]);
    let rows: Vec<_> = cfg
        .ladder
        .par_iter()
        .map(|&m| {
            let a = (m as f64).powf(-0.5);
            let kernel = AnalyticKernel::new(4, a)?;
            let mi = m as i64;
            let report = kernel.e_kl(mi, mi)?;
            let ratio = report.value.ratio(e_kl_leading(mi, mi, mi, a));
            let exact = report.value.ratio(e_kl_leading_exact_g(mi, mi, mi, a));
            Ok((m, a, ratio, exact, report.nodes, report.relative_error()))
        })
        .collect::<Result<_>>()?;
    let mut deviations = Vec::new();
    let mut exact_deviations = Vec::new();
    for (m, a, ratio, exact, nodes, rel) in rows {
        let dev = (ratio - 1.0).norm();
        let exact_dev = (exact - 1.0).norm();
        deviations.push(dev);
        exact_deviations.push(exact_dev);
        table.push(vec![
            m.into(),
            a.into(),
            ratio.re.into(),
            ratio.im.into(),
            dev.into(),
            exact.re.into(),
            exact.im.into(),
            exact_dev.into(),
            nodes.into(),
            rel.into(),
        ]);
    }
    let verdicts = vec![
        Verdict::new(
            "|ratio - 1| strictly decreasing in m",
            Status::from_bool(strictly_decreasing(&deviations)),
            format!("ladder {:?}, deviations {}", cfg.ladder, list(&deviations)),
        ),
        Verdict::new(
            "leading term with exact ln G(±i)",
            Status::Info,
            format!("deviations {}", list(&exact_deviations)),
        ),
    ];
    Ok(CampaignReport {
        config: cfg.clone(),
        table,
        verdicts,
    })
}

pub fn run_bessel_limit(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let nu = cfg.nu.unwrap_or(1.0);
    let mut table = Table::new(&["n", "nu", "p", "q", "finite", "limit", "abs_error"]);
    let results: Vec<_> = cfg
        .ladder
        .par_iter()
        .map(|&n| bessel_limit_check(n, nu, &cfg.offsets))
        .collect::<Result<_>>()?;
    let mut maxima = Vec::new();
    for points in results {
        maxima.push(points.iter().map(|p| p.error).fold(0.0, f64::max));
        for p in points {
            table.push(vec![
                p.n.into(),
                p.nu.into(),
                p.p.into(),
                p.q.into(),
                p.finite.into(),
                p.limit.into(),
                p.error.into(),
            ]);
        }
    }
    let verdicts = vec![Verdict::new(
        "max Bessel error strictly decreasing in n",
        Status::from_bool(strictly_decreasing(&maxima)),
        format!("ladder {:?}, max errors {}", cfg.ladder, list(&maxima)),
    )];
    Ok(CampaignReport {
        config: cfg.clone(),
        table,
        verdicts,
    })
}

/// Inverse entries for the given (white, black) vertex-index pairs, from the
/// dense oracle up to the size cap and from the contour formulas beyond it.
pub(super) fn inverse_entries(
    model: &LatticeModel,
    pairs: &[(usize, usize)],
    exact_cap: usize,
) -> Result<(HashMap<(usize, usize), C64>, &'static str)> {
    if model.n <= exact_cap {
        let inv = invert_kasteleyn(model, exact_cap)?;
        let map = pairs.iter().map(|&(w, b)| ((w, b), inv.at(w, b))).collect();
        return Ok((map, "oracle"));
    }
    let evaluator = InverseEvaluator::new(model.n, model.a, model.b)?;
    let values: Vec<_> = pairs
        .par_iter()
        .map(|&(w, b)| evaluator.entry(model.whites[w], model.blacks[b]).map(|v| ((w, b), v)))
        .collect::<Result<_>>()?;
    Ok((values.into_iter().collect(), "contour"))
}

pub fn run_gap_convergence(cfg: &CampaignConfig) -> Result<CampaignReport> {
    // The finite event at (t, xi) is compared with P(A(-t) <= xi + t^2).
    let mut reversed: Vec<(f64, f64)> = cfg.grid.iter().map(|&(t, xi)| (-t, xi + t * t)).collect();
    reversed.sort_by(|p, q| p.0.total_cmp(&q.0));
    let query = AiryQuery::new(
        reversed.iter().map(|p| p.0).collect(),
        reversed.iter().map(|p| p.1).collect(),
    )?;
    let limit = airy_process_fdd(&query)?.value;

    let mut table = Table::new(&[
        "n", "a", "edges", "method", "exact", "mc", "mc_sigma", "samples", "limit", "drift",
    ]);
    let mut drifts = Vec::new();
    let mut cross = Vec::new();
    for &n in &cfg.ladder {
        let w = window(cfg, n)?;
        let model = build_model(n, w.a, 1.0)?;
        let edges = gap_event_edges(&model, &w, &cfg.grid, true);
        let (exact, method) = if n <= cfg.exact_cap() {
            let inv = invert_kasteleyn(&model, cfg.exact_cap())?;
            (gap_probability_exact(&model, &inv, &edges)?, "oracle")
        } else {
            let pairs: Vec<(usize, usize)> = edges
                .iter()
                .flat_map(|&ei| edges.iter().map(move |&ej| (ej, ei)))
                .map(|(ej, ei)| (model.edges[ej].white, model.edges[ei].black))
                .collect();
            let (map, method) = inverse_entries(&model, &pairs, cfg.exact_cap())?;
            (gap_probability_with(&model, &edges, |wv, bv| Ok(map[&(wv, bv)]))?, method)
        };
        let (mc, sigma) = if cfg.samples > 0 {
            let hits = map_samples(&model, cfg.seed, cfg.samples, |c| edges.iter().all(|&e| !c.contains(e)));
            let p = hits.iter().filter(|&&h| h).count() as f64 / cfg.samples as f64;
            let sigma = (p * (1.0 - p) / cfg.samples as f64).sqrt();
            cross.push((n, exact, p, sigma));
            (p, sigma)
        } else {
            (f64::NAN, f64::NAN)
        };
        drifts.push((exact - limit).abs());
        table.push(vec![
            n.into(),
            w.a.into(),
            edges.len().into(),
            method.into(),
            exact.into(),
            mc.into(),
            sigma.into(),
            cfg.samples.into(),
            limit.into(),
            (exact - limit).into(),
        ]);
    }
    let mut verdicts = vec![Verdict::new(
        "|gap probability - Airy value| strictly decreasing in n",
        Status::from_bool(strictly_decreasing(&drifts)),
        format!("ladder {:?}, drifts {}, limit {limit:.10}", cfg.ladder, list(&drifts)),
    )];
    for (n, exact, p, sigma) in cross {
        let ok = (exact - p).abs() <= 3.0 * sigma.max(1.0 / cfg.samples as f64);
        verdicts.push(Verdict::new(
            format!("n = {n}: determinant within 3 sigma of Monte Carlo"),
            Status::from_bool(ok),
            format!("determinant {exact:.6}, Monte Carlo {p:.6} ± {sigma:.2e}"),
        ));
    }
    Ok(CampaignReport {
        config: cfg.clone(),
        table,
        verdicts,
    })
}
