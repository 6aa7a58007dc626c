use std::fmt;
use std::fs;

use dimerlab::airy::{airy_process_fdd, extended_kernel, window_limit, AiryContours, AiryQuery};
use dimerlab::analytic::window::{rescaled_kernel, ScalingWindow};
use dimerlab::analytic::{AnalyticKernel, ContourSpec, InverseEvaluator, Scaled};
use dimerlab::bessel::{bessel_kernel, bessel_kernel_series, finite_bessel};
use dimerlab::experiments::{run, Campaign, CampaignConfig, Cell, Status, Table};
use dimerlab::geometry::{analyze, ComponentKind};
use dimerlab::lattice::{vertex_class, FaceKind};
use dimerlab::oracle::invert_kasteleyn;
use dimerlab::sampler::{validate_matching, Shuffler};
use dimerlab::{build_model, Error, Point, C64};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::output::OutputDir;

/// Why a run did not succeed. Usage errors exit with 2, everything else
/// with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) | Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidOrder(_)
            | Error::InvalidWeight { .. }
            | Error::InvalidArgument(_)
            | Error::InvalidVertex(..)
            | Error::SizeCapExceeded { .. } => Failure::Usage(e.to_string()),
            Error::Output(m) => Failure::Io(m),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

pub type Outcome<T> = Result<T, Failure>;

/// What a successful command reports back for the manifest.
#[derive(Debug, Default)]
pub struct Report {
    pub seeds: Vec<u64>,
    /// False when a verification criterion failed; outputs are still kept.
    pub passed: bool,
}

impl Report {
    fn ok(seeds: Vec<u64>) -> Self {
        Self { seeds, passed: true }
    }
}

pub fn execute(command: &Command, out: &mut OutputDir) -> Outcome<Report> {
    match command {
        Command::Lattice {
            action: LatticeAction::Dump(m),
        } => lattice_dump(m, out),
        Command::Sample(args) => sample(args, out),
        Command::Geometry {
            action: GeometryAction::Analyze(args),
        } => geometry(args, out),
        Command::Oracle {
            action: OracleAction::Kinv(args),
        } => kinv(args, out),
        Command::Kernel { action } => match action {
            KernelAction::Entry(args) => kernel_entry(args, out),
            KernelAction::Window(args) => kernel_window(args, out),
        },
        Command::Airy { action } => match action {
            AiryAction::Fdd(args) => airy_fdd(args, out),
            AiryAction::Kernel(args) => airy_kernel(args, out),
        },
        Command::Bessel(args) => bessel(args, out),
        Command::Verify(args) => verify(args, out),
    }
}

fn csv(table: &Table) -> Outcome<Vec<u8>> {
    Ok(table.to_csv()?.into_bytes())
}

fn lattice_dump(m: &ModelArgs, out: &mut OutputDir) -> Outcome<Report> {
    let model = build_model(m.n, m.a, m.b)?;
    out.write_json("lattice.json", &model.dump())?;
    Ok(Report::ok(vec![]))
}

fn sample(args: &SampleArgs, out: &mut OutputDir) -> Outcome<Report> {
    let m = args.model;
    let model = build_model(m.n, m.a, m.b)?;
    let shuffler = Shuffler::new(&model);
    let mut table = Table::new(&[
        "sample", "seed", "stream", "white_x1", "white_x2", "black_x1", "black_x2", "weight",
    ]);
    for k in 0..args.count {
        let config = shuffler.sample(args.seed, k as u64);
        if !validate_matching(&model, &config) {
            return Err(Failure::Numerical(format!("sample {k} is not a perfect matching")));
        }
        for &e in &config.edges {
            let (w, b) = model.edge_points(e);
            table.push(vec![
                k.into(),
                Cell::Int(args.seed as i64),
                Cell::Int(config.stream as i64),
                w.x1.into(),
                w.x2.into(),
                b.x1.into(),
                b.x2.into(),
                model.edges[e].weight.into(),
            ]);
        }
    }
    out.write("samples.csv", &csv(&table)?)?;
    Ok(Report::ok(vec![args.seed]))
}

fn component_name(kind: Option<ComponentKind>) -> String {
    match kind {
        None => "none".into(),
        Some(ComponentKind::DoubleEdge) => "double".into(),
        Some(ComponentKind::Loop(k)) => format!("loop:{k}"),
        Some(ComponentKind::Path(k)) => format!("path:{k}"),
    }
}

fn geometry(args: &GeometryArgs, out: &mut OutputDir) -> Outcome<Report> {
    let m = args.model;
    let window = match args.gamma {
        Some(gamma) => Some(ScalingWindow::new(m.n, gamma, 1.0)?),
        None => None,
    };
    let a = window.map_or(m.a, |w| w.a);
    let model = build_model(m.n, a, m.b)?;
    let config = Shuffler::new(&model).sample(args.seed, args.stream);
    let report = analyze(&model, &config)?;

    let mut faces = Table::new(&["x1", "x2", "a_height", "loop_height", "corridor_height"]);
    for f in &report.a_faces {
        faces.push(vec![
            f.face.x1.into(),
            f.face.x2.into(),
            f.a_height.into(),
            f.loop_height.into(),
            f.corridor_height.into(),
        ]);
    }

    let last: Vec<usize> = report.last_path.clone().unwrap_or_default();
    let mut dimers = Table::new(&[
        "edge",
        "white_x1",
        "white_x2",
        "black_x1",
        "black_x2",
        "white_class",
        "black_class",
        "face_kind",
        "component",
        "on_last_path",
    ]);
    for &e in &config.edges {
        let (w, b) = model.edge_points(e);
        let kind = match model.edges[e].kind {
            FaceKind::A => "a",
            FaceKind::B => "b",
        };
        dimers.push(vec![
            e.into(),
            w.x1.into(),
            w.x2.into(),
            b.x1.into(),
            b.x2.into(),
            Cell::Int(vertex_class(w) as i64),
            Cell::Int(vertex_class(b) as i64),
            kind.into(),
            component_name(report.squished.label(e)).into(),
            Cell::Int(last.contains(&e) as i64),
        ]);
    }

    let squished = &report.squished;
    let paths: Vec<_> = squished
        .paths
        .iter()
        .map(|p| {
            json!({
                "start": p.start,
                "end": p.end,
                "start_side": p.start_side,
                "end_side": p.end_side,
                "level": p.level,
                "length": p.dimers.len(),
            })
        })
        .collect();
    let summary = json!({
        "n": m.n,
        "a": a,
        "b": m.b,
        "seed": args.seed,
        "stream": args.stream,
        "dimers": config.edges.len(),
        "a_dimers": squished.a_dimers.len(),
        "double_edges": squished.double_edges.len(),
        "loops": squished.loops.iter().map(|l| l.len()).collect::<Vec<_>>(),
        "paths": paths,
        "last_path_length": report.last_path.as_ref().map(Vec::len),
        "window": window.map(|w| json!({ "window": w, "xi_c": w.xi_c() })),
    });

    out.write("faces.csv", &csv(&faces)?)?;
    out.write("dimers.csv", &csv(&dimers)?)?;
    out.write_json("geometry.json", &summary)?;
    Ok(Report::ok(vec![args.seed]))
}

fn kinv(args: &KinvArgs, out: &mut OutputDir) -> Outcome<Report> {
    let m = args.model;
    let model = build_model(m.n, m.a, m.b)?;
    let inv = invert_kasteleyn(&model, args.cap)?;
    let mut table = Table::new(&["white_x1", "white_x2", "black_x1", "black_x2", "re", "im"]);
    for (bi, b) in model.blacks.iter().enumerate() {
        for (wi, w) in model.whites.iter().enumerate() {
            let v = inv.at(wi, bi);
            table.push(vec![
                w.x1.into(),
                w.x2.into(),
                b.x1.into(),
                b.x2.into(),
                v.re.into(),
                v.im.into(),
            ]);
        }
    }
    out.write("kinv.csv", &csv(&table)?)?;
    Ok(Report::ok(vec![]))
}

/// A complex number that may lie outside the range of `f64`.
#[derive(Serialize)]
struct ScaledJson {
    re: f64,
    im: f64,
    ln_abs: f64,
}

impl From<Scaled> for ScaledJson {
    fn from(s: Scaled) -> Self {
        let v = s.to_c64();
        Self {
            re: v.re,
            im: v.im,
            ln_abs: s.ln_abs(),
        }
    }
}

fn check_inside(n: usize, p: Point) -> Outcome<()> {
    let side = 2 * n as i64;
    if (0..=side).contains(&p.x1) && (0..=side).contains(&p.x2) {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "vertex ({}, {}) lies outside the diamond of order {n}",
            p.x1, p.x2
        )))
    }
}

fn kernel_entry(args: &EntryArgs, out: &mut OutputDir) -> Outcome<Report> {
    let m = args.model;
    check_inside(m.n, args.white)?;
    check_inside(m.n, args.black)?;
    let evaluator = InverseEvaluator::new(m.n, m.a, m.b)?;
    let doc = if evaluator.is_interpolated() {
        let value = evaluator.entry_scaled(args.white, args.black)?;
        json!({
            "n": m.n, "a": m.a, "b": m.b,
            "white": args.white, "black": args.black,
            "method": "interpolated",
            "value": ScaledJson::from(value),
        })
    } else {
        let e = evaluator.decomposed(args.white, args.black)?;
        json!({
            "n": m.n, "a": m.a, "b": m.b,
            "white": args.white, "black": args.black,
            "method": "contour",
            "value": ScaledJson::from(e.value),
            "k11": ScaledJson::from(e.k11),
            "b_part": ScaledJson::from(e.b),
            "b_star": ScaledJson::from(e.b_star),
            "nodes": e.nodes,
        })
    };
    out.write_json("entry.json", &doc)?;
    Ok(Report::ok(vec![]))
}

fn kernel_window(args: &WindowArgs, out: &mut OutputDir) -> Outcome<Report> {
    let w = ScalingWindow::new(args.n, args.gamma, 1.0)?;
    let kernel = AnalyticKernel::new(args.n, w.a)?;
    let point_i = w.round(args.alpha_i, args.beta_i);
    let point_j = w.round(args.alpha_j, args.beta_j);
    check_inside(args.n, w.white(&point_j, 0))?;
    check_inside(args.n, w.black(&point_i, 0))?;
    let finite = rescaled_kernel(&w, &kernel, &point_i, 0, &point_j, 0)?;
    let limit = window_limit(
        point_i.alpha,
        point_i.beta,
        point_j.alpha,
        point_j.beta,
        &AiryContours::default(),
    )?;
    let error = (finite.value - C64::new(limit, 0.0)).norm();
    out.write_json(
        "window.json",
        &json!({
            "window": w,
            "xi_c": w.xi_c(),
            "finite": finite,
            "limit": limit,
            "abs_error": error,
        }),
    )?;
    Ok(Report::ok(vec![]))
}

fn airy_fdd(args: &FddArgs, out: &mut OutputDir) -> Outcome<Report> {
    let query = AiryQuery::new(args.times.clone(), args.levels.clone())?;
    let result = airy_process_fdd(&query)?;
    let converged = result.contracts();
    out.write_json(
        "fdd.json",
        &json!({
            "times": args.times,
            "levels": args.levels,
            "result": result,
            "converged": converged,
        }),
    )?;
    if !converged {
        return Err(Failure::Numerical("Fredholm determinant did not converge".into()));
    }
    Ok(Report::ok(vec![]))
}

fn airy_kernel(args: &AiryKernelArgs, out: &mut OutputDir) -> Outcome<Report> {
    let value = extended_kernel(args.t, args.x, args.t2, args.y, &AiryContours::default())?;
    out.write_json(
        "airy_kernel.json",
        &json!({ "t": args.t, "x": args.x, "t2": args.t2, "y": args.y, "value": value }),
    )?;
    Ok(Report::ok(vec![]))
}

fn bessel(args: &BesselArgs, out: &mut OutputDir) -> Outcome<Report> {
    let limit = bessel_kernel(args.p, args.q, args.nu, &ContourSpec::default())?;
    let series = bessel_kernel_series(args.p, args.q, args.nu)?;
    let finite = match args.n {
        Some(n) => {
            let kernel = AnalyticKernel::new(n, 4.0 * args.nu / n as f64)?;
            Some(finite_bessel(&kernel, args.p, args.q)?)
        }
        None => None,
    };
    out.write_json(
        "bessel.json",
        &json!({
            "p": args.p,
            "q": args.q,
            "nu": args.nu,
            "limit": limit,
            "series": series,
            "n": args.n,
            "finite": finite,
            "abs_error": finite.map(|f| (f - limit).abs()),
        }),
    )?;
    Ok(Report::ok(vec![]))
}

fn verify(args: &VerifyArgs, out: &mut OutputDir) -> Outcome<Report> {
    let cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let cfg = CampaignConfig::from_json(&text)?;
            if cfg.campaign != args.campaign {
                return Err(Failure::Usage(format!(
                    "config is for {} but {} was requested",
                    cfg.campaign, args.campaign
                )));
            }
            cfg
        }
        None => CampaignConfig::preset(args.campaign),
    };
    let report = run(&cfg)?;
    for v in &report.verdicts {
        let status = match v.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        };
        println!("{status} {}: {}", v.check, v.detail);
    }
    out.write("table.csv", &csv(&report.table)?)?;
    out.write_json("verdict.json", &report.verdict_json())?;
    let seeds = match cfg.campaign {
        Campaign::HeightStats | Campaign::LoopBound => vec![cfg.seed],
        Campaign::GapConvergence if cfg.samples > 0 => vec![cfg.seed],
        _ => vec![],
    };
    Ok(Report {
        seeds,
        passed: report.passed(),
    })
}
