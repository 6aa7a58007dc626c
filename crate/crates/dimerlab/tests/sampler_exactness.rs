use std::collections::HashMap;

use dimerlab::oracle::{edge_probability, enumerate_matchings, invert_kasteleyn, matching_weight};
use dimerlab::sampler::{edge_frequencies, sample_many};
use dimerlab::build_model;

#[test]
fn order_four_distribution_matches_weights() {
    for &a in &[0.5, 2.0] {
        let model = build_model(4, a, 1.0).unwrap();
        let all = enumerate_matchings(&model);
        let z: f64 = all.iter().map(|m| matching_weight(&model, m)).sum();
        let index: HashMap<Vec<usize>, usize> =
            all.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let samples = 20_000;
        let mut counts = vec![0usize; all.len()];
        for cfg in sample_many(&model, 42, samples) {
            counts[index[&cfg.edges]] += 1;
        }
        let chi2: f64 = all
            .iter()
            .zip(&counts)
            .map(|(m, &c)| {
                let e = samples as f64 * matching_weight(&model, m) / z;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        let dof = (all.len() - 1) as f64;
        assert!(chi2 < dof + 6.0 * (2.0 * dof).sqrt(), "a={a} chi2={chi2} dof={dof}");
    }
}

#[test]
fn order_eight_frequencies_match_oracle() {
    let model = build_model(8, 0.4, 1.0).unwrap();
    let inv = invert_kasteleyn(&model, 64).unwrap();
    let edges: Vec<usize> = (0..model.edges.len()).step_by(7).collect();
    let freq = edge_frequencies(&model, &edges, 20_000, 3).unwrap();
    for f in freq {
        let p = edge_probability(&model, &inv, f.edge).unwrap();
        let sigma = (p * (1.0 - p) / 20_000.0).sqrt().max(1e-4);
        assert!((f.frequency - p).abs() < 5.0 * sigma, "edge {} mc {} exact {}", f.edge, f.frequency, p);
    }
}
