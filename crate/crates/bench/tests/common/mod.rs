//! Random tiny PMBM update instances.
#![allow(dead_code)]

use eot_pmbm::ggiw::GgiwParams;
use eot_pmbm::pmbm::{
    GlobalHypothesis, LocalHypothesis, PmbmDensity, PoissonComponent, Region, SensorModel, Track,
};
use eot_pmbm::{Extent, Point, StateCov, StateVec};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub struct Instance {
    pub pred: PmbmDensity,
    pub meas: Vec<Point>,
    pub sensor: SensorModel,
}

pub struct InstanceSpec {
    pub max_tracks: usize,
    pub max_meas: usize,
    pub max_prev_globals: usize,
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// GGIW density of a small object near `center`, with rate mean in
/// [0.5, 3], extent mean about 2 m² and a tight kinematic prior.
pub fn random_params<R: Rng>(rng: &mut R, center: Point) -> GgiwParams {
    let rate = rng.random_range(0.5..2.5);
    let beta = rng.random_range(5.0..20.0);
    let dof = rng.random_range(20.0..100.0);
    let e = rng.random_range(1.5..4.0);
    let pos_var = rng.random_range(0.05..0.5);
    let off = 0.3 * e * rng.random_range(-1.0..1.0);
    GgiwParams {
        alpha: rate * beta,
        beta,
        mean: StateVec::new(
            center[0],
            rng.random_range(-1.0..1.0),
            center[1],
            rng.random_range(-1.0..1.0),
        ),
        cov: StateCov::from_diagonal(&StateVec::new(pos_var, 0.5, pos_var, 0.5)),
        dof,
        scale: Extent::new(e, off, off, e) * (dof - 3.0),
    }
}

/// Local hypotheses of one track differ by earlier associations, so their
/// densities are perturbations of a common ancestor.
fn sibling<R: Rng>(rng: &mut R, base: &GgiwParams) -> GgiwParams {
    let mut p = base.clone();
    p.alpha *= rng.random_range(0.9..1.1);
    p.mean[0] += 0.3 * normal(rng);
    p.mean[2] += 0.3 * normal(rng);
    p.scale *= rng.random_range(0.9..1.1);
    p
}

pub fn random_instance<R: Rng>(rng: &mut R, spec: &InstanceSpec) -> Instance {
    let n = rng.random_range(0..=spec.max_tracks);
    let m = rng.random_range(0..=spec.max_meas);
    let centers: Vec<Point> = (0..n.max(1))
        .map(|_| Point::new(0.7 * normal(rng), 0.7 * normal(rng)))
        .collect();
    let mut tracks = Vec::new();
    for t in 0..n {
        let base = random_params(rng, centers[t]);
        let n_hyp = rng.random_range(1..=2);
        let hypotheses = (0..n_hyp)
            .map(|_| LocalHypothesis {
                log_weight: rng.random_range(-1.0..0.0),
                existence: if rng.random::<f64>() < 0.3 {
                    1.0
                } else {
                    rng.random_range(0.3..1.0)
                },
                params: Some(sibling(rng, &base)),
                assoc: vec![],
                parent: Some(0),
            })
            .collect();
        tracks.push(Track {
            id: t as u64,
            birth_step: 0,
            hypotheses,
        });
    }
    let mut globals: Vec<GlobalHypothesis> = Vec::new();
    let n_globals = rng.random_range(1..=spec.max_prev_globals);
    for _ in 0..n_globals {
        let picks: Vec<usize> = tracks
            .iter()
            .map(|t| rng.random_range(0..t.hypotheses.len()))
            .collect();
        if globals.iter().all(|g| g.picks != picks) {
            globals.push(GlobalHypothesis {
                log_weight: rng.random_range(-1.0..0.0),
                picks,
            });
        }
    }
    let ppp = (0..rng.random_range(1..=2))
        .map(|_| {
            let center = Point::new(0.5 * normal(rng), 0.5 * normal(rng));
            let mut params = random_params(rng, center);
            let var = rng.random_range(1.0..4.0);
            params.cov[(0, 0)] = var;
            params.cov[(2, 2)] = var;
            PoissonComponent {
                log_weight: rng.random_range(0.2f64..1.0).ln(),
                params,
            }
        })
        .collect();
    let meas = (0..m)
        .map(|_| {
            let c = centers[rng.random_range(0..centers.len())];
            c + Point::new(0.6 * normal(rng), 0.6 * normal(rng))
        })
        .collect();
    let mut pred = PmbmDensity {
        step: 1,
        ppp,
        tracks,
        globals,
        next_track_id: n as u64,
    };
    pred.normalize_globals();
    let sensor = SensorModel::new(rng.random_range(1.0..4.0), Region::square(4.0)).unwrap();
    Instance { pred, meas, sensor }
}
