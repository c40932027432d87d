use std::fs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shadow_anneal::commands::{
    self, cmd_map, cmd_plot, cmd_sample_posterior, cmd_simulate, cmd_stats,
};
use shadow_anneal::io::{self, AppConfig};
use shadow_anneal::pattern::count_close_pairs;
use shadow_anneal::{PointPattern, Window};

fn small_map_config() -> AppConfig {
    let mut cfg = AppConfig::default();
    cfg.anneal.n_iterations = 300;
    cfg.anneal.keep_every = 50;
    cfg.shadow.m = 20;
    cfg.shadow.aux_mh_steps = 20;
    cfg.rng.seed = 5;
    cfg
}

#[test]
fn stats_on_fixture_files() {
    let dir = tempfile::tempdir().unwrap();
    let w = Window::unit_square();

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "x,y\n").unwrap();
    assert_eq!(cmd_stats(&empty, w, 0.1).unwrap().values(), &[0.0, 0.0]);

    let two = dir.path().join("two.csv");
    fs::write(&two, "x,y\n0.5,0.5\n0.55,0.5\n").unwrap();
    assert_eq!(cmd_stats(&two, w, 0.1).unwrap().values(), &[2.0, 1.0]);

    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let pts = (0..50).map(|_| w.sample_uniform(&mut rng)).collect();
    let pattern = PointPattern::new(w, pts).unwrap();
    let fifty = dir.path().join("fifty.csv");
    io::write_pattern_csv(&fifty, &pattern).unwrap();
    let got = cmd_stats(&fifty, w, 0.1).unwrap();
    assert_eq!(
        got.values(),
        &[50.0, count_close_pairs(&pattern, 0.1).unwrap() as f64]
    );
}

#[test]
fn out_of_window_point_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.csv");
    fs::write(&f, "x,y\n0.5,0.5\n1.5,0.5\n").unwrap();
    assert!(cmd_stats(&f, Window::unit_square(), 0.1).is_err());
}

#[test]
fn simulate_dumps_a_readable_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = AppConfig::default();
    cfg.simulate.burn_in = 2000;
    cfg.simulate.n_samples = 5;
    cfg.simulate.spacing = 10;
    let summary = cmd_simulate(&cfg, dir.path()).unwrap();
    assert!(summary.artifacts.iter().any(|a| a == commands::PATTERN_CSV));
    let stats = cmd_stats(
        &dir.path().join(commands::PATTERN_CSV),
        Window::unit_square(),
        0.1,
    )
    .unwrap();
    assert!(stats.values()[0] > 0.0);
    let rows = io::read_numeric_rows(&dir.path().join(commands::STATS_CSV)).unwrap();
    assert_eq!(rows.len(), 5);
    // The dumped pattern is the one behind the last recorded statistics.
    assert_eq!(&rows[4][..], stats.values());
}

#[test]
fn config_echo_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    cmd_map(&small_map_config(), first.path()).unwrap();
    let echoed = AppConfig::load(&first.path().join(commands::CONFIG_ECHO)).unwrap();
    cmd_map(&echoed, second.path()).unwrap();
    for f in [
        commands::TRACE_CSV,
        commands::SUMMARY,
        commands::CONFIG_ECHO,
    ] {
        assert_eq!(
            fs::read(first.path().join(f)).unwrap(),
            fs::read(second.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn map_trace_has_expected_shape_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    cmd_map(&small_map_config(), dir.path()).unwrap();
    let trace = io::read_trace_csv(&dir.path().join(commands::TRACE_CSV)).unwrap();
    assert_eq!(trace.len(), 6);
    assert_eq!(trace.last().unwrap().iter, 300);
    let svg = fs::read_to_string(dir.path().join(commands::TRACE_SVG)).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);

    let replot = dir.path().join("again.svg");
    cmd_plot(&dir.path().join(commands::TRACE_CSV), Some(&replot)).unwrap();
    assert_eq!(fs::read_to_string(replot).unwrap(), svg);
}

#[test]
fn map_with_empty_data_stays_in_prior_box() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_map_config();
    cfg.data.stats = Some(vec![0.0, 0.0]);
    let s = cmd_map(&cfg, dir.path()).unwrap();
    let th = s.theta_final.unwrap();
    assert!((0.0..=7.0).contains(&th[0]) && (-7.0..=0.0).contains(&th[1]));
}

#[test]
fn single_sweep_posterior_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = AppConfig::default();
    cfg.posterior.n_sweeps = 1;
    cfg.posterior.discard = 0;
    cfg.shadow.m = 5;
    cfg.shadow.aux_mh_steps = 5;
    cmd_sample_posterior(&cfg, dir.path()).unwrap();
    let rows = io::read_numeric_rows(&dir.path().join(commands::SAMPLES_CSV)).unwrap();
    assert_eq!(rows.len(), 1);
}

#[test]
fn unknown_config_key_is_rejected() {
    assert!(AppConfig::from_toml_str("[anneal]\nt_zero = 3.0\n").is_err());
}

#[test]
fn multi_chain_summary_lists_every_chain() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_map_config();
    cfg.rng.chains = 3;
    let s = cmd_map(&cfg, dir.path()).unwrap();
    assert_eq!(s.chain_finals.unwrap().len(), 3);
    assert!(s.best_chain.unwrap() < 3);
}
