use dimerlab::analytic::window::ScalingWindow;
use dimerlab::geometry::{
    central_box_side, compute_heights, decompose_heights, gamma_statistic, gap_event_edges, gap_event_indicator,
    is_backtracking, last_path, line_crossings, line_height, snap_time, squish_and_classify, BacktrackRule,
    ComponentKind, GammaValue, Orientation, Side,
};
use dimerlab::lattice::FaceKind;
use dimerlab::oracle::{enumerate_matchings, gap_probability_exact, invert_kasteleyn};
use dimerlab::sampler::{map_samples, sample, DimerConfiguration};
use dimerlab::{build_model, LatticeModel, Point};

fn config(model: &LatticeModel, mut edges: Vec<usize>) -> DimerConfiguration {
    edges.sort_unstable();
    DimerConfiguration {
        n: model.n,
        seed: 0,
        stream: 0,
        edges,
    }
}

fn all_n4() -> (LatticeModel, Vec<DimerConfiguration>) {
    let model = build_model(4, 1.0, 1.0).unwrap();
    let configs = enumerate_matchings(&model)
        .into_iter()
        .map(|m| config(&model, m))
        .collect();
    (model, configs)
}

#[test]
fn boundary_heights_are_fixed() {
    let (model, configs) = all_n4();
    let top = 8;
    for cfg in &configs {
        let h = compute_heights(&model, cfg).unwrap();
        assert_eq!(h.height(Point::new(0, 0)), Some(1));
        for x in (0..=top).step_by(2) {
            assert_eq!(h.height(Point::new(x, 0)), Some(1 + x));
            assert_eq!(h.height(Point::new(0, x)), Some(1 + x));
            assert_eq!(h.height(Point::new(x, top)), Some(top + 1 - x));
            assert_eq!(h.height(Point::new(top, x)), Some(top + 1 - x));
        }
    }
}

#[test]
fn a_heights_step_by_multiples_of_four() {
    let (model, configs) = all_n4();
    for cfg in &configs {
        let h = compute_heights(&model, cfg).unwrap();
        for (p, v) in h.a_heights() {
            assert_eq!(v.rem_euclid(4), 0);
            for d in [(2, 2), (2, -2)] {
                if let Some(w) = h.a_height(p.offset(d)) {
                    assert!([-4, 0, 4].contains(&(w - v)), "{p:?} -> {d:?}: {v} {w}");
                }
            }
        }
    }
}

#[test]
fn exhaustive_order_four_classification() {
    let (model, configs) = all_n4();
    let m = 1;
    for cfg in &configs {
        let h = compute_heights(&model, cfg).unwrap();
        let s = squish_and_classify(&model, cfg).unwrap();
        let faces = decompose_heights(&model, &s, &h).unwrap();
        assert_eq!(faces.len(), 8);

        // Every a-dimer is labelled once and the components cover them all.
        let a_count = cfg.edges.iter().filter(|&&e| model.is_a_edge(e)).count();
        let loop_total: usize = s.loops.iter().map(|l| l.len()).sum();
        let path_total: usize = s.paths.iter().map(|p| p.dimers.len()).sum();
        assert_eq!(2 * s.double_edges.len() + loop_total + path_total, a_count);
        assert_eq!(s.labels.len(), a_count);
        assert!(s.loops.iter().all(|l| l.len() >= 4));

        // Paths run from the top or bottom to the left or right side.
        assert_eq!(s.paths.len(), model.n);
        for p in &s.paths {
            assert!(matches!(p.start_side, Side::Bottom | Side::Top));
            assert!(matches!(p.end_side, Side::Left | Side::Right));
        }

        // The last path separates corridor heights 4m - 4 and 4m.
        let path = last_path(&s).unwrap();
        for &e in &path.dimers {
            let (w, b) = model.edge_points(e);
            let c = model.edge_cell(e);
            let f = Point::new(w.x1 + b.x1 - c.x1, w.x2 + b.x2 - c.x2);
            let g = Point::new(2 * f.x1 - c.x1, 2 * f.x2 - c.x2);
            let mut sides: Vec<i64> = [c, g]
                .iter()
                .filter_map(|&p| h.a_height(p).map(|v| v - s.loop_height(p)))
                .collect();
            sides.sort_unstable();
            match sides.as_slice() {
                [lo, hi] => assert_eq!((*lo, *hi), (4 * m - 4, 4 * m)),
                [one] => assert!(*one == 4 * m - 4 || *one == 4 * m),
                _ => unreachable!(),
            }
        }
    }
}

#[test]
fn hand_built_loop_around_the_central_a_face() {
    let model = build_model(4, 1.0, 1.0).unwrap();
    let pts = |w: (i64, i64), b: (i64, i64)| model.edge_by_points(Point::new(w.0, w.1), Point::new(b.0, b.1)).unwrap();
    let loop_dimers = [pts((3, 2), (4, 3)), pts((5, 4), (4, 5)), pts((3, 4), (2, 3)), pts((1, 2), (2, 1))];
    let fillers = [pts((3, 0), (4, 1)), pts((5, 2), (6, 3)), pts((1, 4), (0, 3)), pts((3, 6), (2, 5))];
    let all = enumerate_matchings(&model);
    let found = all
        .iter()
        .find(|m| loop_dimers.iter().chain(&fillers).all(|e| m.binary_search(e).is_ok()))
        .expect("the partial matching extends");
    let cfg = config(&model, found.clone());
    let s = squish_and_classify(&model, &cfg).unwrap();
    assert_eq!(s.loops.len(), 1);
    let lp = &s.loops[0];
    assert_eq!(lp.len(), 4);
    // Traversed white to black the loop turns counterclockwise around (3, 3).
    assert_eq!(lp.orientation, Orientation::Counterclockwise);
    let mut got = lp.dimers.clone();
    got.sort_unstable();
    let mut want = loop_dimers.to_vec();
    want.sort_unstable();
    assert_eq!(got, want);
    for &e in &loop_dimers {
        assert_eq!(s.label(e), Some(ComponentKind::Loop(0)));
    }
    // Only the enclosed face carries a loop height, and it is -4.
    let h = compute_heights(&model, &cfg).unwrap();
    for f in decompose_heights(&model, &s, &h).unwrap() {
        let expect = if f.face == Point::new(3, 3) { -4 } else { 0 };
        assert_eq!(f.loop_height, expect, "{:?}", f.face);
    }
}

fn rotate(model: &LatticeModel, e: usize) -> usize {
    let top = 2 * model.order();
    let (w, b) = model.edge_points(e);
    let r = |p: Point| Point::new(top - p.x1, top - p.x2);
    model.edge_by_points(r(w), r(b)).unwrap()
}

#[test]
fn half_turn_maps_top_path_to_last_path() {
    let model = build_model(16, 0.4, 1.0).unwrap();
    for seed in 0..5 {
        let cfg = sample(&model, seed);
        let rotated = config(&model, cfg.edges.iter().map(|&e| rotate(&model, e)).collect());
        let h = compute_heights(&model, &cfg).unwrap();
        let hr = compute_heights(&model, &rotated).unwrap();
        for (p, v) in h.a_heights() {
            assert_eq!(hr.a_height(Point::new(32 - p.x1, 32 - p.x2)), Some(v));
        }
        let s = squish_and_classify(&model, &cfg).unwrap();
        let sr = squish_and_classify(&model, &rotated).unwrap();
        let top_path = s
            .paths
            .iter()
            .find(|p| p.level == 3 && p.start_side == Side::Top)
            .unwrap();
        let mapped: Vec<usize> = top_path.dimers.iter().map(|&e| rotate(&model, e)).collect();
        assert_eq!(last_path(&sr).unwrap().dimers, mapped);
    }
}

#[test]
fn sampled_configurations_decompose() {
    let model = build_model(32, 0.2, 1.0).unwrap();
    let mut loops = 0;
    for seed in 0..40 {
        let cfg = sample(&model, seed);
        let h = compute_heights(&model, &cfg).unwrap();
        let s = squish_and_classify(&model, &cfg).unwrap();
        decompose_heights(&model, &s, &h).unwrap();
        loops += s.loops.len();
        assert!(last_path(&s).is_ok());
    }
    assert!(loops > 0, "no loop in 40 samples exercises nothing");
}

#[test]
fn line_height_matches_the_height_function() {
    for (n, gamma) in [(32usize, 0.3), (64, 0.25)] {
        let window = ScalingWindow::new(n, gamma, 1.0).unwrap();
        let model = build_model(n, window.a, 1.0).unwrap();
        let shift = window.round(window.alpha, 0.0).shift;
        for seed in 0..5 {
            let cfg = sample(&model, seed);
            let h = compute_heights(&model, &cfg).unwrap();
            for t in [-0.5, 0.0, 0.3] {
                let time = snap_time(t, window.q_n);
                let x = window.reference + 1 + shift;
                let face = Point::new(x - time, x + time);
                assert_eq!(h.a_height(face), Some(line_height(&model, &cfg, &window, t)));
            }
        }
    }
}

#[test]
fn snapped_times_are_even_and_piecewise_constant() {
    let q = 22.6;
    for k in -5..=5 {
        let t = 2.0 * k as f64 / q;
        assert_eq!(snap_time(t, q), 2 * k);
        assert_eq!(snap_time(t + 0.5 / q, q), 2 * k);
        assert_eq!(snap_time(t - 0.5 / q, q), 2 * k);
    }
    // Odd lattice times round up.
    assert_eq!(snap_time(3.0 / q, q), 4);
}

#[test]
fn gamma_statistic_is_consistent_with_gap_events() {
    let window = ScalingWindow::new(32, 0.3, 1.0).unwrap();
    let model = build_model(32, window.a, 1.0).unwrap();
    let step = 0.5 / window.q_n;
    let mut within = 0;
    for seed in 0..30 {
        let cfg = sample(&model, seed);
        let s = squish_and_classify(&model, &cfg).unwrap();
        let g = gamma_statistic(&model, &s, 0.0, &window).unwrap();
        assert_eq!(g, gamma_statistic(&model, &s, step, &window).unwrap());
        if let GammaValue::Within(v) = g {
            within += 1;
            assert!(v <= window.alpha);
            let just_below = v - 1.0 / window.p_n;
            assert!(!gap_event_indicator(&model, &s, &[(0.0, just_below)], &window, false));
        }
    }
    assert!(within > 0);
}

#[test]
fn gap_event_edge_cases() {
    let window = ScalingWindow::new(32, 0.3, 1.0).unwrap();
    let model = build_model(32, window.a, 1.0).unwrap();
    let cfg = sample(&model, 3);
    let s = squish_and_classify(&model, &cfg).unwrap();
    assert!(gap_event_indicator(&model, &s, &[], &window, false));
    assert!(gap_event_indicator(&model, &s, &[(0.0, window.alpha)], &window, false));
    // Far below the window the line crosses the frozen corner, which is full
    // of forward dimers.
    assert!(!gap_event_indicator(&model, &s, &[(0.0, -1e3)], &window, true));
    let edges = gap_event_edges(&model, &window, &[(0.0, -1.0)], true);
    assert!(edges.iter().all(|&e| model.edge_classes(e) == (0, 0) && model.is_a_edge(e)));
}

#[test]
fn line_crossings_classes() {
    let window = ScalingWindow::new(32, 0.3, 1.0).unwrap();
    let model = build_model(32, window.a, 1.0).unwrap();
    for time in [-6, 0, 4] {
        let crossings = line_crossings(&model, &window, time);
        assert_eq!(crossings[0].face.x1.min(crossings[0].face.x2), 0);
        for c in &crossings {
            if let Some(e) = c.forward {
                assert_eq!(model.edges[e].kind, FaceKind::A);
                assert_eq!(model.edge_classes(e), (0, 0));
            }
            if let Some(e) = c.backward {
                assert_eq!(model.edges[e].kind, FaceKind::A);
                assert_eq!(model.edge_classes(e), (1, 1));
                if c.face.x1 < 32 && c.face.x2 < 32 {
                    assert!(is_backtracking(&model, e, BacktrackRule::quadrants_only()));
                }
            }
        }
    }
}

#[test]
fn backtracking_table() {
    let model = build_model(32, 0.1, 1.0).unwrap();
    let edge = |w: (i64, i64), b: (i64, i64)| model.edge_by_points(Point::new(w.0, w.1), Point::new(b.0, b.1)).unwrap();
    let rule = BacktrackRule::quadrants_only();
    // Lower left, W1 x B1 and W0 x B0.
    let e11 = edge((9, 10), (10, 9));
    let e00 = edge((11, 10), (10, 11));
    assert_eq!(model.edge_classes(e11), (1, 1));
    assert_eq!(model.edge_classes(e00), (0, 0));
    assert!(is_backtracking(&model, e11, rule));
    assert!(!is_backtracking(&model, e00, rule));
    // Inside a central box every a-edge counts.
    let central = edge((31, 30), (30, 31));
    assert!(model.is_a_edge(central));
    assert!(is_backtracking(&model, central, BacktrackRule { central_side: 4 }));
    assert!(!is_backtracking(&model, e00, BacktrackRule { central_side: 4 }));
    // b-edges never do.
    let b_edge = (0..model.edges.len()).find(|&e| !model.is_a_edge(e)).unwrap();
    assert!(!is_backtracking(&model, b_edge, BacktrackRule::for_model(&model)));
    let side = central_box_side(32, 0.1);
    assert_eq!(side % 2, 0);
    assert!(side as f64 >= 32f64.ln() * (1024.0f64 / 0.1).cbrt());
}

#[test]
fn gap_event_frequency_matches_the_determinant() {
    let window = ScalingWindow::new(16, 0.3, 1.0).unwrap();
    let model = build_model(16, window.a, 1.0).unwrap();
    let points = [(0.0, 0.0)];
    let edges = gap_event_edges(&model, &window, &points, true);
    assert!(!edges.is_empty());
    let inv = invert_kasteleyn(&model, 64).unwrap();
    let exact = gap_probability_exact(&model, &inv, &edges).unwrap();
    let count = 20_000;
    let hits = map_samples(&model, 11, count, |cfg| {
        let s = squish_and_classify(&model, cfg).unwrap();
        gap_event_indicator(&model, &s, &points, &window, true) as u32
    });
    let freq = hits.iter().sum::<u32>() as f64 / count as f64;
    let sigma = (exact * (1.0 - exact) / count as f64).sqrt();
    assert!((freq - exact).abs() <= 3.0 * sigma, "{freq} vs {exact} (sigma {sigma})");
}
