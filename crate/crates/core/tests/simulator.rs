use eot_pmbm::pmbm::Region;
use eot_pmbm::simulator::{generate_frame, generate_truth, simulate, GroundTruth, ScenarioConfig};
use eot_pmbm::Point;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FRAMES: usize = 10_000;

fn single_object() -> GroundTruth {
    let cfg = ScenarioConfig {
        n_objects: 1,
        birth_steps: vec![1],
        death_steps: vec![10],
        n_steps: 10,
        ..ScenarioConfig::default()
    };
    generate_truth(&cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap()
}

#[test]
fn object_measurement_counts_have_the_object_rate() {
    let truth = single_object();
    let rate = truth.objects[0].states[0].rate;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let region = Region::square(150.0);
    let total: usize = (0..FRAMES)
        .map(|_| {
            generate_frame(&truth, 1, 0.0, &region, &mut rng)
                .unwrap()
                .points
                .len()
        })
        .sum();
    let mean = total as f64 / FRAMES as f64;
    assert!(
        (mean - rate).abs() < 3.0 * (rate / FRAMES as f64).sqrt(),
        "mean {mean} rate {rate}"
    );
}

#[test]
fn clutter_counts_and_support() {
    let truth = GroundTruth {
        n_steps: 1,
        objects: vec![],
    };
    let region = Region::square(150.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut total = 0usize;
    for _ in 0..FRAMES {
        let f = generate_frame(&truth, 1, 20.0, &region, &mut rng).unwrap();
        assert!(f.points.iter().all(|p| p[0] >= region.x_min
            && p[0] <= region.x_max
            && p[1] >= region.y_min
            && p[1] <= region.y_max));
        total += f.points.len();
    }
    let mean = total as f64 / FRAMES as f64;
    assert!(
        (mean - 20.0).abs() < 3.0 * (20.0 / FRAMES as f64).sqrt(),
        "mean {mean}"
    );
}

#[test]
fn measurement_spread_matches_the_extent() {
    let truth = single_object();
    let s = &truth.objects[0].states[0];
    let center = Point::new(s.kinematics[0], s.kinematics[2]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let region = Region::square(150.0);
    let mut points = Vec::new();
    for _ in 0..FRAMES {
        points.extend(
            generate_frame(&truth, 1, 0.0, &region, &mut rng)
                .unwrap()
                .points,
        );
    }
    let n = points.len() as f64;
    let cov = points
        .iter()
        .map(|p| (p - center) * (p - center).transpose())
        .fold(eot_pmbm::Extent::zeros(), |a, b| a + b)
        / n;
    assert!(
        (cov - s.extent).norm() < 0.05 * s.extent.norm(),
        "{cov} vs {}",
        s.extent
    );
}

#[test]
fn same_seed_same_realisation() {
    let cfg = ScenarioConfig {
        seed: 99,
        ..ScenarioConfig::desk()
    };
    assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
    let other = ScenarioConfig {
        seed: 100,
        ..ScenarioConfig::desk()
    };
    assert_ne!(simulate(&cfg).unwrap().1, simulate(&other).unwrap().1);
}

#[test]
fn objects_live_between_birth_and_death() {
    let (truth, frames) = simulate(&ScenarioConfig::desk()).unwrap();
    assert_eq!(frames.len(), 40);
    assert_eq!(truth.alive_at(2).len(), 0);
    assert_eq!(truth.alive_at(3).len(), 2);
    assert_eq!(truth.alive_at(6).len(), 4);
    assert_eq!(truth.alive_at(33).len(), 2);
    assert_eq!(truth.alive_at(36).len(), 0);
}
