mod common;

use eot_pmbm::gibbs::{remap, run_update, GibbsConfig, InitMode, Variant};
use eot_pmbm::metrics::{gospa, Ellipse};
use eot_pmbm::reduction::{reduce, ReductionConfig};
use eot_pmbm::{Extent, Point};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ellipse() -> impl Strategy<Value = Ellipse> {
    (
        -50.0..50.0f64,
        -50.0..50.0f64,
        0.5..10.0f64,
        0.5..10.0f64,
        -0.9..0.9f64,
    )
        .prop_map(|(x, y, a, b, rho)| Ellipse {
            center: Point::new(x, y),
            extent: Extent::new(a, rho * (a * b).sqrt(), rho * (a * b).sqrt(), b),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn remap_is_idempotent_and_keeps_the_partition(n in 0usize..4, raw in prop::collection::vec(0usize..9, 0..7)) {
        let m = raw.len();
        let assoc: Vec<usize> = raw.iter().map(|&b| b % (n + m.max(1))).map(|b| if b >= n + m { n } else { b }).collect();
        prop_assume!(assoc.iter().all(|&b| b < n + m));
        let once = remap(&assoc, n);
        prop_assert_eq!(remap(&once, n), once.clone());
        for i in 0..m {
            for j in 0..m {
                prop_assert_eq!(assoc[i] == assoc[j], once[i] == once[j]);
            }
            if once[i] >= n {
                let label = once[i] - n;
                prop_assert!(label >= i);
                prop_assert_eq!(once[label], once[i]);
            }
        }
    }

    #[test]
    fn gospa_is_symmetric_with_zero_self_distance(
        a in prop::collection::vec(ellipse(), 0..5),
        b in prop::collection::vec(ellipse(), 0..5),
        p in prop::sample::select(vec![1.0, 2.0]),
    ) {
        let ab = gospa(&a, &b, 20.0, p).unwrap();
        let ba = gospa(&b, &a, 20.0, p).unwrap();
        prop_assert!((ab.total - ba.total).abs() < 1e-9);
        prop_assert!((ab.missed - ba.false_det).abs() < 1e-9);
        prop_assert!(gospa(&a, &a, 20.0, p).unwrap().total.abs() < 1e-9);
        prop_assert!(ab.total <= 20.0 * (a.len().max(b.len()) as f64).powf(1.0 / p) + 1e-9);
    }

    #[test]
    fn update_posterior_is_a_normalised_partition(
        seed in any::<u64>(),
        n in 0usize..3,
        m in 0usize..5,
        collapsed in any::<bool>(),
        cluster in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (pred, meas, sensor) = common::instance(&mut rng, n, m, 2);
        let cfg = GibbsConfig {
            n_iter: 30,
            variant: if collapsed { Variant::Collapsed } else { Variant::Full },
            init: if cluster { InitMode::Cluster } else { InitMode::Simple },
            dbscan_eps: 1.0,
            ..Default::default()
        };
        let post = run_update(&pred, &meas, &sensor, &cfg, &mut rng).unwrap();
        prop_assert!((post.global_weight_sum() - 1.0).abs() < 1e-9);
        prop_assert!(post.check_partition(pred.step, m).is_ok());
        for t in &post.tracks {
            for lh in &t.hypotheses {
                prop_assert!((0.0..=1.0).contains(&lh.existence));
            }
        }
    }

    #[test]
    fn reduction_is_idempotent(seed in any::<u64>(), n in 0usize..3, m in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (pred, meas, sensor) = common::instance(&mut rng, n, m, 3);
        let cfg = GibbsConfig { n_iter: 50, ..Default::default() };
        let post = run_update(&pred, &meas, &sensor, &cfg, &mut rng).unwrap();
        let red = ReductionConfig { global_weight_threshold: 0.05, existence_threshold: 0.05, ..Default::default() };
        let once = reduce(&post, &red);
        prop_assert!(once.globals.len() <= post.globals.len());
        prop_assert!((once.global_weight_sum() - 1.0).abs() < 1e-9);
        let twice = reduce(&once, &red);
        prop_assert_eq!(twice.globals.len(), once.globals.len());
        prop_assert_eq!(twice.tracks.len(), once.tracks.len());
        for (a, b) in once.globals.iter().zip(&twice.globals) {
            prop_assert_eq!(&a.picks, &b.picks);
            prop_assert!((a.log_weight - b.log_weight).abs() < 1e-9);
        }
    }
}
