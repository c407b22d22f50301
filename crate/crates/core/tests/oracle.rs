mod common;

use eot_pmbm::gibbs::{run_update, GibbsConfig, Variant};
use eot_pmbm::oracle::{count_hypotheses, enumerate_update};
use eot_pmbm::pmbm::{PmbmDensity, Region, SensorModel};
use eot_pmbm::{Error, Point};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

#[test]
fn single_measurement_without_tracks_gives_one_hypothesis() {
    let (mut pred, _, sensor) = common::instance(&mut ChaCha8Rng::seed_from_u64(0), 0, 0, 1);
    pred.step = 1;
    let post = enumerate_update(&pred, &[Point::new(0.0, 0.0)], &sensor).unwrap();
    assert_eq!(post.globals.len(), 1);
    assert_eq!(post.tracks.len(), 1);
    let r = post.tracks[0].hypotheses[0].existence;
    assert!(r > 0.0 && r < 1.0);
}

#[test]
fn counts_match_enumeration_per_previous_global() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 0..=3 {
        for m in 0..=4 {
            let (pred, meas, sensor) = common::instance(&mut rng, n, m, 1);
            let post = enumerate_update(&pred, &meas, &sensor).unwrap();
            assert_eq!(
                post.globals.len() as u64,
                count_hypotheses(n, m),
                "n={n} m={m}"
            );
            assert!((post.global_weight_sum() - 1.0).abs() < 1e-12);
            post.check_partition(pred.step, m).unwrap();
        }
    }
}

#[test]
fn multiple_previous_globals_multiply_the_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (pred, meas, sensor) = common::instance(&mut rng, 2, 2, 4);
    let post = enumerate_update(&pred, &meas, &sensor).unwrap();
    assert_eq!(
        post.globals.len(),
        pred.globals.len() * count_hypotheses(2, 2) as usize
    );
}

#[test]
fn guard_rejects_large_instances() {
    let pred = PmbmDensity::new();
    let sensor = SensorModel::new(1.0, Region::square(10.0)).unwrap();
    let meas = vec![Point::zeros(); 6];
    assert_eq!(
        enumerate_update(&pred, &meas, &sensor).unwrap_err(),
        Error::EnumerationGuard {
            tracks: 0,
            measurements: 6
        }
    );
}

#[test]
fn collapsed_sampler_finds_the_likely_hypotheses() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let (pred, meas, sensor) = common::instance(&mut rng, 1, 2, 2);
        let exact = enumerate_update(&pred, &meas, &sensor).unwrap();
        let cfg = GibbsConfig {
            n_iter: 3000,
            variant: Variant::Collapsed,
            ..Default::default()
        };
        let post = run_update(&pred, &meas, &sensor, &cfg, &mut rng).unwrap();
        let found: HashSet<_> = (0..post.globals.len())
            .map(|g| post.global_signature(g))
            .collect();
        let missed: f64 = (0..exact.globals.len())
            .filter(|&g| !found.contains(&exact.global_signature(g)))
            .map(|g| exact.globals[g].log_weight.exp())
            .sum();
        assert!(missed < 0.01, "unvisited mass {missed}");
    }
}
