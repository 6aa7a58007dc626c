//! Monte Carlo and one-point-function campaigns along the diagonal lines of
//! the scaling box.

use rayon::prelude::*;

use super::convergence::{inverse_entries, window};
use super::{decreasing_within_bands, list, strictly_decreasing, CampaignConfig, CampaignReport, Cell, Status, Table, Verdict};
use crate::analytic::window::ScalingWindow;
use crate::error::{Error, Result};
use crate::geometry::{is_backtracking, line_crossings, line_height, snap_time, squish_and_classify, BacktrackRule};
use crate::lattice::{build_model, LatticeModel};
use crate::sampler::map_samples;

/// `|S'| (3a)^d / (1 - 3a)`, the bound on the probability that a loop of
/// length at least `d` meets a set of `|S'|` a-edges. Meaningful for `a < 1/3`.
pub fn peierls_bound(set_size: usize, a: f64, depth: usize) -> f64 {
    set_size as f64 * (3.0 * a).powi(depth as i32) / (1.0 - 3.0 * a)
}

/// a-edges crossing the lines at the given times between the boundary and
/// the top of the box, optionally only those passing `keep`.
fn line_a_edges(model: &LatticeModel, w: &ScalingWindow, times: &[f64], keep: impl Fn(usize) -> bool) -> Vec<usize> {
    let top = w.round(w.alpha, 0.0).shift;
    let mut edges: Vec<usize> = times
        .iter()
        .flat_map(|&t| line_crossings(model, w, snap_time(t, w.q_n)))
        .filter(|c| c.x <= top)
        .flat_map(|c| c.forward.into_iter().chain(c.backward))
        .filter(|&e| keep(e))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

pub fn run_height_stats(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let mut table = Table::new(&[
        "n", "a", "t", "samples", "mean", "variance", "mean_minus_n", "std_error",
    ]);
    // Per time: (|mean - n|, standard error, variance) along the ladder.
    let mut series = vec![(Vec::new(), Vec::new(), Vec::new()); cfg.times.len()];
    for &n in &cfg.ladder {
        let w = window(cfg, n)?;
        let model = build_model(n, w.a, 1.0)?;
        let heights = map_samples(&model, cfg.seed, cfg.samples, |c| {
            cfg.times.iter().map(|&t| line_height(&model, c, &w, t)).collect::<Vec<_>>()
        });
        let count = cfg.samples as f64;
        for (k, &t) in cfg.times.iter().enumerate() {
            let mean = heights.iter().map(|h| h[k] as f64).sum::<f64>() / count;
            let var = heights.iter().map(|h| (h[k] as f64 - mean).powi(2)).sum::<f64>() / (count - 1.0);
            let se = (var / count).sqrt();
            series[k].0.push((mean - n as f64).abs());
            series[k].1.push(se);
            series[k].2.push(var);
            table.push(vec![
                n.into(),
                w.a.into(),
                t.into(),
                cfg.samples.into(),
                mean.into(),
                var.into(),
                (mean - n as f64).into(),
                se.into(),
            ]);
        }
    }
    let mut verdicts = Vec::new();
    for (k, &t) in cfg.times.iter().enumerate() {
        let (dev, se, var) = &series[k];
        verdicts.push(Verdict::new(
            format!("t = {t}: |mean - n| within 3 sigma of a decreasing sequence"),
            Status::from_bool(decreasing_within_bands(dev, se)),
            format!("ladder {:?}, |mean - n| {}, sigma {}", cfg.ladder, list(dev), list(se)),
        ));
        verdicts.push(Verdict::new(
            format!("t = {t}: variance strictly decreasing"),
            Status::from_bool(strictly_decreasing(var)),
            format!("variances {}", list(var)),
        ));
    }
    Ok(CampaignReport {
        config: cfg.clone(),
        table,
        verdicts,
    })
}

/// Sum, maximum and minimum of the one-point function over the backtracking
/// edges of the lines.
fn backtracking_sum(cfg: &CampaignConfig, n: usize, a: f64) -> Result<(usize, f64, f64, f64, &'static str)> {
    let w = ScalingWindow::with_weight(n, cfg.gamma.unwrap_or(f64::NAN), a, 1.0)?;
    let model = build_model(n, a, 1.0)?;
    let rule = if cfg.central_box {
        BacktrackRule::for_model(&model)
    } else {
        BacktrackRule::quadrants_only()
    };
    let edges = line_a_edges(&model, &w, &cfg.times, |e| is_backtracking(&model, e, rule));
    let pairs: Vec<(usize, usize)> = edges.iter().map(|&e| (model.edges[e].white, model.edges[e].black)).collect();
    let (entries, method) = inverse_entries(&model, &pairs, cfg.exact_cap())?;
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for (&e, pair) in edges.iter().zip(&pairs) {
        let rho = model.edge_kasteleyn(e) * entries[pair];
        if rho.im.abs() > 1e-8 * rho.re.abs().max(1.0) {
            return Err(Error::ImaginaryResidue(rho.im));
        }
        sum += rho.re;
        max = max.max(rho.re);
        min = min.min(rho.re);
    }
    Ok((edges.len(), sum, max, min, method))
}

pub fn run_backtracking_scan(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let mut table = Table::new(&["arm", "n", "a", "edges", "sum_rho", "max_rho", "min_rho", "method"]);
    let mut arms: Vec<(&str, usize, f64)> = Vec::new();
    for &n in &cfg.ladder {
        arms.push(("main", n, cfg.weight(n)?));
    }
    if let Some(a) = cfg.control_weight {
        arms.extend(cfg.ladder.iter().map(|&n| ("control", n, a)));
    }
    let results: Vec<_> = arms
        .par_iter()
        .map(|&(arm, n, a)| backtracking_sum(cfg, n, a).map(|r| (arm, n, a, r)))
        .collect::<Result<_>>()?;
    let mut sums = Vec::new();
    let mut control = Vec::new();
    let mut in_range = true;
    for (arm, n, a, (count, sum, max, min, method)) in results {
        if count > 0 {
            in_range &= min >= -1e-9 && max <= 1.0 + 1e-9;
        }
        if arm == "main" {
            sums.push(sum);
        } else {
            control.push(sum);
        }
        table.push(vec![
            arm.into(),
            n.into(),
            a.into(),
            count.into(),
            sum.into(),
            max.into(),
            min.into(),
            method.into(),
        ]);
    }
    let mut verdicts = vec![
        Verdict::new(
            "sum of backtracking one-point functions strictly decreasing in n",
            Status::from_bool(strictly_decreasing(&sums)),
            format!("ladder {:?}, sums {}", cfg.ladder, list(&sums)),
        ),
        Verdict::new(
            "every one-point function lies in [0, 1]",
            Status::from_bool(in_range),
            String::new(),
        ),
    ];
    if !control.is_empty() {
        verdicts.push(Verdict::new(
            format!("control arm a = {}", cfg.control_weight.unwrap_or(f64::NAN)),
            Status::Info,
            format!("sums {}", list(&control)),
        ));
    }
    Ok(CampaignReport {
        config: cfg.clone(),
        table,
        verdicts,
    })
}

pub fn run_loop_bound(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let mut table = Table::new(&[
        "n", "a", "d", "s_prime", "samples", "hits", "probability", "sigma", "bound", "vacuous",
    ]);
    let mut verdicts = Vec::new();
    for &n in &cfg.ladder {
        let w = window(cfg, n)?;
        let model = build_model(n, w.a, 1.0)?;
        let s_prime = line_a_edges(&model, &w, &cfg.times, |_| true);
        // Longest loop meeting S' in each sample, 0 if none does.
        let longest = map_samples(&model, cfg.seed, cfg.samples, |c| {
            let squished = squish_and_classify(&model, c)?;
            Ok(squished
                .loops
                .iter()
                .filter(|l| l.dimers.iter().any(|e| s_prime.binary_search(e).is_ok()))
                .map(|l| l.len())
                .max()
                .unwrap_or(0))
        })
        .into_iter()
        .collect::<Result<Vec<usize>>>()?;
        let count = cfg.samples as f64;
        for &d in &cfg.depths {
            let hits = longest.iter().filter(|&&len| len >= d).count();
            let p = hits as f64 / count;
            let sigma = (p * (1.0 - p) / count).sqrt();
            let bound = peierls_bound(s_prime.len(), w.a, d);
            let vacuous = bound >= 1.0;
            table.push(vec![
                n.into(),
                w.a.into(),
                d.into(),
                s_prime.len().into(),
                cfg.samples.into(),
                hits.into(),
                p.into(),
                sigma.into(),
                bound.into(),
                Cell::from(if vacuous { "yes" } else { "no" }),
            ]);
            verdicts.push(Verdict::new(
                format!("n = {n}, d = {d}: loop probability within the Peierls bound"),
                Status::from_bool(p - 3.0 * sigma <= bound),
                format!(
                    "probability {p:.4e} ± {sigma:.1e}, bound {bound:.4e}{}",
                    if vacuous { " (vacuous)" } else { "" }
                ),
            ));
        }
    }
    Ok(CampaignReport {
        config: cfg.clone(),
        table,
        verdicts,
    })
}
