#![allow(dead_code)]

use eot_pmbm::ggiw::GgiwParams;
use eot_pmbm::pmbm::{
    GlobalHypothesis, LocalHypothesis, PmbmDensity, PoissonComponent, Region, SensorModel, Track,
};
use eot_pmbm::{Extent, Point, StateCov, StateVec};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn params_near<R: Rng>(rng: &mut R, x: f64, y: f64) -> GgiwParams {
    let beta = rng.random_range(5.0..20.0);
    let dof = rng.random_range(20.0..100.0);
    let e = rng.random_range(1.5..4.0);
    GgiwParams {
        alpha: rng.random_range(0.5..2.5) * beta,
        beta,
        mean: StateVec::new(x, 0.0, y, 0.0),
        cov: StateCov::from_diagonal(&StateVec::new(0.3, 0.5, 0.3, 0.5)),
        dof,
        scale: Extent::identity() * e * (dof - 3.0),
    }
}

/// Predicted density with `n` tracks of one or two hypotheses each, up to
/// `globals` previous global hypotheses, and `m` measurements nearby.
pub fn instance<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    globals: usize,
) -> (PmbmDensity, Vec<Point>, SensorModel) {
    let tracks: Vec<Track> = (0..n)
        .map(|t| {
            let (x, y) = (0.7 * normal(rng), 0.7 * normal(rng));
            Track {
                id: t as u64,
                birth_step: 0,
                hypotheses: (0..rng.random_range(1..=2))
                    .map(|_| LocalHypothesis {
                        log_weight: rng.random_range(-1.0..0.0),
                        existence: rng.random_range(0.3..1.0),
                        params: Some(params_near(rng, x, y)),
                        assoc: vec![],
                        parent: Some(0),
                    })
                    .collect(),
            }
        })
        .collect();
    let mut gl: Vec<GlobalHypothesis> = Vec::new();
    for _ in 0..globals.max(1) {
        let picks: Vec<usize> = tracks
            .iter()
            .map(|t| rng.random_range(0..t.hypotheses.len()))
            .collect();
        if gl.iter().all(|g| g.picks != picks) {
            gl.push(GlobalHypothesis {
                log_weight: rng.random_range(-1.0..0.0),
                picks,
            });
        }
    }
    let mut ppp_params = params_near(rng, 0.0, 0.0);
    ppp_params.cov[(0, 0)] = 2.0;
    ppp_params.cov[(2, 2)] = 2.0;
    let ppp = vec![PoissonComponent {
        log_weight: 0.5f64.ln(),
        params: ppp_params,
    }];
    let meas = (0..m)
        .map(|_| Point::new(normal(rng), normal(rng)))
        .collect();
    let mut pred = PmbmDensity {
        step: 1,
        ppp,
        tracks,
        globals: gl,
        next_track_id: n as u64,
    };
    pred.normalize_globals();
    (
        pred,
        meas,
        SensorModel::new(2.0, Region::square(4.0)).unwrap(),
    )
}
