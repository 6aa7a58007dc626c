use dimerlab::airy::{
    airy, airy_kernel_classical, airy_process_fdd, airy_tilde, airy_tilde_single, extended_kernel, forward_block, gauge, psi,
    tracy_widom_reference, AiryContours, AiryQuery,
};

fn fdd(times: &[f64], levels: &[f64]) -> f64 {
    let q = AiryQuery::new(times.to_vec(), levels.to_vec()).unwrap();
    let r = airy_process_fdd(&q).unwrap();
    assert!(r.contracts(), "no contraction: {:?}", r.deltas);
    r.value
}

#[test]
fn equal_time_diagonal_matches_airy_functions() {
    let spec = AiryContours::default();
    for xi in [-2.0, -0.5, 0.0, 1.0, 3.0] {
        let contour = airy_tilde(0.0, xi, 0.0, xi, &spec).unwrap();
        let v = airy(xi);
        let closed = v.ai_prime * v.ai_prime - xi * v.ai * v.ai;
        assert!((contour - closed).abs() < 1e-7, "xi = {xi}: {contour} vs {closed}");
    }
}

#[test]
fn diagonal_at_origin_is_ai_prime_squared() {
    // Ai'(0) = -1 / (3^(1/3) Gamma(1/3)).
    let ai_prime_0 = -0.258_819_403_792_806_8_f64;
    let v = airy_tilde(0.0, 0.0, 0.0, 0.0, &AiryContours::default()).unwrap();
    assert!((v - ai_prime_0 * ai_prime_0).abs() < 1e-10);
}

#[test]
fn off_diagonal_equal_time_matches_classical_kernel() {
    let spec = AiryContours::default();
    for (x, y) in [(-1.0, 0.5), (0.3, 2.0), (-2.5, -1.5)] {
        let a = airy_tilde(0.0, x, 0.0, y, &spec).unwrap();
        assert!((a - airy_kernel_classical(x, y)).abs() < 1e-9);
    }
}

#[test]
fn two_time_contour_matches_laplace_form() {
    let spec = AiryContours::default();
    for (t, x, t2, y) in [(0.0, 0.0, 0.5, 0.3), (-0.4, -1.0, 0.6, 0.5), (0.7, 0.2, -0.3, 1.1)] {
        let contour = airy_tilde(t, x, t2, y, &spec).unwrap();
        let laplace = airy_tilde_single(t, x, t2, y);
        assert!((contour - laplace).abs() < 1e-8, "{contour} vs {laplace}");
    }
}

#[test]
fn diagonal_decays_monotonically() {
    let spec = AiryContours::default();
    let values: Vec<f64> = (0..=8)
        .map(|k| airy_tilde(0.0, k as f64, 0.0, k as f64, &spec).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    assert!(values[8] < 1e-8);
}

#[test]
fn gaussian_part_properties() {
    assert!(psi(0.0, 0.0, 1e-4, 0.5).unwrap() < 1e-200);
    // Depends on (x - y)^2 and x + y only.
    let a = psi(0.0, 0.2, 0.8, 1.0).unwrap();
    let b = psi(0.0, 1.0, 0.8, 0.2).unwrap();
    assert!((a - b).abs() < 1e-15);
}

#[test]
fn extended_kernel_indicator() {
    let spec = AiryContours::default();
    let tilde = airy_tilde(0.5, 0.1, 0.0, 0.4, &spec).unwrap();
    assert_eq!(extended_kernel(0.5, 0.1, 0.0, 0.4, &spec).unwrap(), tilde);
    let forward = extended_kernel(0.0, 0.1, 0.5, 0.4, &spec).unwrap();
    let expect = airy_tilde(0.0, 0.1, 0.5, 0.4, &spec).unwrap() - psi(0.0, 0.1, 0.5, 0.4).unwrap();
    assert!((forward - expect).abs() < 1e-15);
}

#[test]
fn gauge_is_a_similarity() {
    // exp(f(i) - f(j)) with f(k) = -beta_k alpha_k - 2/3 beta_k^3.
    let f = |alpha: f64, beta: f64| -beta * alpha - 2.0 / 3.0 * beta.powi(3);
    let g = gauge(0.3, -0.4, 1.1, 0.9);
    assert!((g - (f(0.3, -0.4) - f(1.1, 0.9)).exp()).abs() < 1e-14 * g);
    assert_eq!(gauge(0.5, 0.5, 0.5, 0.5), 1.0);
}

#[test]
fn single_time_distribution_matches_reference_determinant() {
    let q = AiryQuery::new(vec![0.0], vec![0.0]).unwrap();
    let r = airy_process_fdd(&q).unwrap();
    assert!(r.contracts());
    assert!(r.residue.abs() < 1e-8);
    // Truncated interval (0, 16) with twice the nodes of the mapped rule.
    let reference = tracy_widom_reference(0.0, 16.0, 2 * r.nodes_used);
    assert!((r.value - reference).abs() < 1e-6, "{} vs {reference}", r.value);
    // Tabulated GUE Tracy-Widom value F2(0).
    assert!((r.value - 0.969_372_828_355_4).abs() < 1e-6);
}

#[test]
fn distribution_tends_to_one_for_high_levels() {
    assert!(fdd(&[0.0, 1.0], &[8.0, 8.0]) > 1.0 - 1e-8);
}

#[test]
fn two_time_distribution_is_stationary() {
    let p = fdd(&[0.0, 0.5], &[-1.0, 0.2]);
    let shifted = fdd(&[0.5, 1.0], &[-1.0, 0.2]);
    assert!((p - shifted).abs() < 1e-8, "{p} vs {shifted}");
}

#[test]
fn two_time_distribution_is_monotone_in_levels() {
    let base = fdd(&[0.0, 0.7], &[-1.0, -0.5]);
    let raised_first = fdd(&[0.0, 0.7], &[-0.6, -0.5]);
    let raised_second = fdd(&[0.0, 0.7], &[-1.0, 0.0]);
    assert!(raised_first >= base && raised_second >= base);
    assert!(base <= fdd(&[0.0], &[-1.0]).min(fdd(&[0.7], &[-0.5])) + 1e-12);
}

#[test]
fn distant_times_decorrelate() {
    let single = fdd(&[0.0], &[0.0]);
    let excess: Vec<f64> = [2.0, 4.0, 6.0]
        .iter()
        .map(|&gap| fdd(&[0.0, gap], &[0.0, 0.0]) - single * single)
        .collect();
    assert!(excess.windows(2).all(|w| w[1].abs() < w[0].abs()), "{excess:?}");
    assert!(excess[2].abs() <= 1e-3, "{excess:?}");
}

#[test]
fn forward_block_agrees_with_contour_form() {
    let spec = AiryContours::default();
    let xs = [-1.0, 0.0, 0.8];
    let ys = [-0.5, 0.4];
    for gap in [1.0, 2.5] {
        let laplace = forward_block(0.0, &xs, gap, &ys).unwrap();
        for (k, &x) in xs.iter().enumerate() {
            for (l, &y) in ys.iter().enumerate() {
                let contour = extended_kernel(0.0, x, gap, y, &spec).unwrap();
                assert!((laplace[(k, l)] - contour).abs() < 1e-8, "gap {gap}: {} vs {contour}", laplace[(k, l)]);
            }
        }
    }
}
