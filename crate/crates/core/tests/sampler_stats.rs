//! Statistical checks of the birth/death sampler against Poisson oracles.

use shadow_anneal::model::{GibbsModel, ParamVector, PoissonModel, StraussModel};
use shadow_anneal::sampler::{
    reference_samples, reference_stats, AuxChain, MhConfig, ReferenceRun,
};
use shadow_anneal::{PointPattern, RngStream, Window};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

#[test]
fn poisson_counts_have_mean_and_variance_beta_area() {
    let model = PoissonModel::new(Window::unit_square());
    let theta = ParamVector::from([100f64.ln()]);
    let run = ReferenceRun {
        burn_in: 10_000,
        n_samples: 2000,
        spacing: 1000,
    };
    let out =
        reference_samples(&model, &theta, &run, 0.5, &mut RngStream::new(17, 0).rng()).unwrap();
    let ns: Vec<f64> = out.samples.iter().map(|s| s.values()[0]).collect();
    let (m, v) = mean_var(&ns);
    let lambda = 100.0;
    let n = ns.len() as f64;
    let se_mean = (lambda / n).sqrt();
    // Var of the sample variance for a Poisson law: (2λ² + λ) / n.
    let se_var = ((2.0 * lambda * lambda + lambda) / n).sqrt();
    assert!((m - lambda).abs() < 3.0 * se_mean, "mean {m}");
    assert!((v - lambda).abs() < 3.0 * se_var, "variance {v}");
}

#[test]
fn strauss_with_gamma_one_is_poisson() {
    let model = StraussModel::new(0.1, Window::unit_square()).unwrap();
    let theta = StraussModel::theta_from_beta_gamma(100.0, 1.0).unwrap();
    let run = ReferenceRun {
        burn_in: 10_000,
        n_samples: 1000,
        spacing: 1000,
    };
    let mean = reference_stats(&model, &theta, &run, &mut RngStream::new(4, 0).rng()).unwrap();
    assert!((mean.values()[0] - 100.0).abs() < 3.0 * (100.0f64 / 1000.0).sqrt());
}

#[test]
fn truncated_poisson_stationary_law() {
    // β|W| = 2 on a tiny window, conditioned on n <= 3.
    let window = Window::new(0.0, 0.1, 0.0, 0.2).unwrap();
    let model = PoissonModel::new(window);
    let theta = [100f64.ln()];
    let cfg = MhConfig {
        steps: 1,
        birth_probability: 0.5,
        max_points: Some(3),
    };
    let weights: Vec<f64> = [1.0, 2.0, 2.0, 4.0 / 3.0].to_vec();
    let z: f64 = weights.iter().sum();
    let pmf: Vec<f64> = weights.iter().map(|w| w / z).collect();

    let mut chain = AuxChain::empty(&model).unwrap();
    let mut rng = RngStream::new(23, 0).rng();
    let mut counts = [0usize; 4];
    let samples = 20_000;
    for _ in 0..1000 {
        chain.step(&model, &theta, &cfg, &mut rng);
    }
    for _ in 0..samples {
        for _ in 0..25 {
            chain.step(&model, &theta, &cfg, &mut rng);
        }
        let n = chain.pattern().len();
        assert!(n <= 3);
        counts[n] += 1;
    }
    for (k, p) in pmf.iter().enumerate() {
        let freq = counts[k] as f64 / samples as f64;
        let sigma = (p * (1.0 - p) / samples as f64).sqrt();
        assert!((freq - p).abs() < 3.0 * sigma, "n={k}: freq {freq} vs {p}");
    }
}

#[test]
fn returned_points_stay_in_window() {
    let window = Window::new(-2.0, -1.0, 3.0, 3.5).unwrap();
    let model = StraussModel::new(0.05, window).unwrap();
    let theta = ParamVector::from([5.0, -0.5]);
    let mut chain = AuxChain::new(&model, PointPattern::empty(window)).unwrap();
    let mut rng = RngStream::new(1, 2).rng();
    for _ in 0..200 {
        chain.run(&model, theta.values(), &MhConfig::default(), &mut rng);
        assert!(chain.pattern().points().iter().all(|p| window.contains(p)));
        assert_eq!(chain.stats(), &model.suff_stats(chain.pattern()).unwrap());
    }
}
