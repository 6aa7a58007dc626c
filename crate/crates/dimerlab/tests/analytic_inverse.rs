use dimerlab::analytic::polys::{f_ab, v_function, v_function_original, ytilde_base, y_rational, SignPattern, SeparableV, GAMMAS};
use dimerlab::analytic::AnalyticKernel;
use dimerlab::oracle::invert_kasteleyn;
use dimerlab::{build_model, C64};

fn check_against_oracle(n: usize, a: f64, tol: f64) {
    let model = build_model(n, a, 1.0).unwrap();
    let inv = invert_kasteleyn(&model, 64).unwrap();
    let kernel = AnalyticKernel::new(n, a).unwrap();
    let mut worst = 0.0f64;
    for (wi, &w) in model.whites.iter().enumerate().step_by(3) {
        for (bi, &b) in model.blacks.iter().enumerate().step_by(5) {
            let e = kernel.inverse_entry(w, b).unwrap();
            worst = worst.max((e.value.to_c64() - inv.at(wi, bi)).norm());
        }
    }
    assert!(worst <= tol, "n={n} a={a}: worst {worst:e}");
}

#[test]
fn matches_oracle_small_a() {
    check_against_oracle(4, 0.3, 1e-9);
    check_against_oracle(8, 0.3, 1e-9);
}

#[test]
fn matches_oracle_moderate_and_large_a() {
    check_against_oracle(4, 0.6, 1e-9);
    check_against_oracle(8, 1.8, 1e-9);
}

#[test]
fn simplified_v_equals_original_definition() {
    let a = 0.45;
    let mut s = 17u64;
    let mut next = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    for eps in GAMMAS {
        for _ in 0..25 {
            let w1 = C64::from_polar(0.7 + 0.2 * next(), 3.2 * next());
            let w2 = C64::from_polar(1.3 + 0.2 * next(), 3.2 * next());
            let ours = v_function(eps, a, w1, w2, SignPattern::Plain);
            let theirs = v_function_original(eps, a, w1, w2);
            assert!((ours - theirs).norm() <= 1e-12 * (1.0 + ours.norm()), "{eps:?}: {ours} vs {theirs}");
            let sep = SeparableV::new(eps, a, SignPattern::Plain).eval(a / (1.0 + a * a), w1, w2);
            assert!((sep - ours).norm() <= 1e-12 * (1.0 + ours.norm()));
        }
    }
}

#[test]
fn polynomial_is_f_times_rational() {
    let (a, b) = (0.8, 1.7);
    for gamma in GAMMAS {
        for &(u, v) in &[(C64::new(0.3, 0.2), C64::new(-0.5, 0.9)), (C64::new(1.4, -0.3), C64::new(0.2, 0.1))] {
            let lhs = ytilde_base(gamma, a, b, u * u, v * v);
            let rhs = f_ab(a, b, u, v) * y_rational(gamma, (0, 0), a, b, u, v);
            assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }
    }
}

#[test]
fn uniform_and_rescaled_weights_match_oracle() {
    use dimerlab::analytic::InverseEvaluator;
    for &(n, a, b) in &[(4usize, 1.0, 1.0), (8, 1.0, 1.0), (4, 0.6, 2.0), (4, 1.1, 0.9)] {
        let model = build_model(n, a, b).unwrap();
        let inv = invert_kasteleyn(&model, 64).unwrap();
        let ev = InverseEvaluator::new(n, a, b).unwrap();
        let mut worst = 0.0f64;
        for (wi, &w) in model.whites.iter().enumerate().step_by(n + 1) {
            for (bi, &bl) in model.blacks.iter().enumerate().step_by(2 * n - 1) {
                worst = worst.max((ev.entry(w, bl).unwrap() - inv.at(wi, bi)).norm());
            }
        }
        assert!(worst <= 1e-9, "n={n} a={a} b={b}: {worst:e}");
    }
}
