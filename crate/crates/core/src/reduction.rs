//! Hypothesis pruning after each update.

use crate::error::{Error, Result};
use crate::linalg::log_add_exp;
use crate::pmbm::{GlobalHypothesis, PmbmDensity, Track};
use indexmap::IndexMap;

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionConfig {
    pub global_weight_threshold: f64,
    pub existence_threshold: f64,
    pub ppp_weight_threshold: f64,
    pub max_globals: usize,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            global_weight_threshold: 1e-3,
            existence_threshold: 1e-3,
            ppp_weight_threshold: 1e-5,
            max_globals: 100,
        }
    }
}

impl ReductionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_globals == 0 {
            return Err(Error::InvalidParameter(
                "max_globals must be at least 1".into(),
            ));
        }
        for (name, v) in [
            ("global_weight_threshold", self.global_weight_threshold),
            ("existence_threshold", self.existence_threshold),
            ("ppp_weight_threshold", self.ppp_weight_threshold),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} outside [0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// Prunes global hypotheses, Bernoulli components and PPP components.
///
/// A Bernoulli whose picked hypothesis has existence below the threshold
/// is switched to the track's zero-existence hypothesis when the track has
/// one. A track is removed only when every surviving global picks a
/// low-existence hypothesis for it and none of those explains a measurement
/// of the current step, so the measurement partition stays intact.
pub fn reduce(pmbm: &PmbmDensity, cfg: &ReductionConfig) -> PmbmDensity {
    let step = pmbm.step;
    let ln_thr = cfg.global_weight_threshold.ln();
    let mut order: Vec<usize> = (0..pmbm.globals.len()).collect();
    order.sort_by(|&a, &b| {
        pmbm.globals[b]
            .log_weight
            .total_cmp(&pmbm.globals[a].log_weight)
    });
    let mut kept: Vec<GlobalHypothesis> = order
        .iter()
        .enumerate()
        .filter(|(rank, &g)| {
            *rank == 0 || (*rank < cfg.max_globals && pmbm.globals[g].log_weight >= ln_thr)
        })
        .map(|(_, &g)| pmbm.globals[g].clone())
        .collect();

    let n = pmbm.tracks.len();
    let low = |t: usize, p: usize| {
        let lh = pmbm.local(t, p);
        lh.existence < cfg.existence_threshold && lh.measurements_at(step).is_empty()
    };
    for t in 0..n {
        let Some(empty) = pmbm.tracks[t]
            .hypotheses
            .iter()
            .position(|lh| lh.existence == 0.0 && lh.measurements_at(step).is_empty())
        else {
            continue;
        };
        for g in &mut kept {
            if low(t, g.picks[t]) {
                g.picks[t] = empty;
            }
        }
    }
    let keep_track: Vec<bool> = (0..n)
        .map(|t| !kept.iter().all(|g| low(t, g.picks[t])))
        .collect();

    let mut tracks = Vec::new();
    let mut remap: Vec<Vec<Option<usize>>> = Vec::new();
    for (t, track) in pmbm.tracks.iter().enumerate() {
        if !keep_track[t] {
            continue;
        }
        let mut used = vec![false; track.hypotheses.len()];
        for g in &kept {
            used[g.picks[t]] = true;
        }
        let mut map = vec![None; track.hypotheses.len()];
        let mut hypotheses = Vec::new();
        for (i, lh) in track.hypotheses.iter().enumerate() {
            if used[i] {
                map[i] = Some(hypotheses.len());
                hypotheses.push(lh.clone());
            }
        }
        tracks.push(Track {
            id: track.id,
            birth_step: track.birth_step,
            hypotheses,
        });
        remap.push(map);
    }
    let kept_tracks: Vec<usize> = (0..n).filter(|&t| keep_track[t]).collect();

    let mut merged: IndexMap<Vec<usize>, f64> = IndexMap::new();
    for g in &kept {
        let picks: Vec<usize> = kept_tracks
            .iter()
            .enumerate()
            .map(|(k, &t)| remap[k][g.picks[t]].expect("referenced"))
            .collect();
        let w = merged.entry(picks).or_insert(f64::NEG_INFINITY);
        *w = log_add_exp(*w, g.log_weight);
    }

    let ln_ppp_thr = cfg.ppp_weight_threshold.ln();
    let mut out = PmbmDensity {
        step,
        ppp: pmbm
            .ppp
            .iter()
            .filter(|c| c.log_weight >= ln_ppp_thr)
            .cloned()
            .collect(),
        tracks,
        globals: merged
            .into_iter()
            .map(|(picks, log_weight)| GlobalHypothesis { log_weight, picks })
            .collect(),
        next_track_id: pmbm.next_track_id,
    };
    out.normalize_globals();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ggiw::GgiwParams;
    use crate::linalg::{Extent, StateCov, StateVec};
    use crate::pmbm::{LocalHypothesis, PoissonComponent};

    fn params() -> GgiwParams {
        GgiwParams {
            alpha: 50.0,
            beta: 10.0,
            mean: StateVec::zeros(),
            cov: StateCov::identity(),
            dof: 30.0,
            scale: Extent::new(135.0, 0.0, 0.0, 135.0),
        }
    }

    fn lh(r: f64, assoc: Vec<(usize, usize)>) -> LocalHypothesis {
        LocalHypothesis {
            log_weight: 0.0,
            existence: r,
            params: Some(params()),
            assoc,
            parent: None,
        }
    }

    fn density(weights: &[f64]) -> PmbmDensity {
        PmbmDensity {
            step: 2,
            ppp: vec![
                PoissonComponent {
                    log_weight: 0.5f64.ln(),
                    params: params(),
                },
                PoissonComponent {
                    log_weight: 1e-7f64.ln(),
                    params: params(),
                },
            ],
            tracks: vec![Track {
                id: 0,
                birth_step: 1,
                hypotheses: weights.iter().map(|_| lh(0.9, vec![])).collect(),
            }],
            globals: weights
                .iter()
                .enumerate()
                .map(|(i, w)| GlobalHypothesis {
                    log_weight: w.ln(),
                    picks: vec![i],
                })
                .collect(),
            next_track_id: 1,
        }
    }

    #[test]
    fn keeps_everything_above_threshold() {
        let d = density(&[0.5, 0.3, 0.2]);
        let r = reduce(&d, &ReductionConfig::default());
        assert_eq!(r.globals.len(), 3);
        assert_eq!(r.tracks[0].hypotheses.len(), 3);
        assert_eq!(r.ppp.len(), 1);
    }

    #[test]
    fn drops_tiny_global() {
        let d = density(&[1.0 - 1e-6, 1e-6]);
        let r = reduce(&d, &ReductionConfig::default());
        assert_eq!(r.globals.len(), 1);
        assert!(r.globals[0].log_weight.abs() < 1e-15);
        assert_eq!(r.tracks[0].hypotheses.len(), 1);
    }

    #[test]
    fn caps_number_of_globals() {
        let d = density(&[0.1, 0.4, 0.3, 0.2]);
        let cfg = ReductionConfig {
            max_globals: 2,
            ..Default::default()
        };
        let r = reduce(&d, &cfg);
        assert_eq!(r.globals.len(), 2);
        assert!((r.global_weight_sum() - 1.0).abs() < 1e-12);
        assert!((r.globals[0].log_weight.exp() - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn never_removes_last_global() {
        let mut d = density(&[0.5, 0.5]);
        d.globals[0].log_weight = -1e4;
        d.globals[1].log_weight = -1e4;
        let r = reduce(&d, &ReductionConfig::default());
        assert_eq!(r.globals.len(), 1);
    }

    #[test]
    fn removes_absent_track_and_merges_globals() {
        let mut d = density(&[0.5, 0.5]);
        d.tracks[0].hypotheses = vec![lh(1e-5, vec![]), lh(1e-4, vec![(1, 0)])];
        let r = reduce(&d, &ReductionConfig::default());
        assert!(r.tracks.is_empty());
        assert_eq!(r.globals.len(), 1);
        assert!(r.globals[0].log_weight.abs() < 1e-15);
    }

    #[test]
    fn keeps_low_existence_track_holding_current_measurement() {
        let mut d = density(&[1.0]);
        d.tracks[0].hypotheses = vec![lh(1e-5, vec![(2, 0)])];
        let r = reduce(&d, &ReductionConfig::default());
        assert_eq!(r.tracks.len(), 1);
        r.check_partition(2, 1).unwrap();
    }

    #[test]
    fn switches_to_non_existence_hypothesis() {
        let mut d = density(&[0.5, 0.3, 0.2]);
        let mut none = LocalHypothesis::non_existence();
        none.log_weight = -1.0;
        d.tracks[0].hypotheses = vec![lh(1e-5, vec![(1, 0)]), none, lh(0.9, vec![])];
        let r = reduce(&d, &ReductionConfig::default());
        assert_eq!(r.tracks.len(), 1);
        assert_eq!(r.tracks[0].hypotheses.len(), 2);
        assert_eq!(r.tracks[0].hypotheses[0].existence, 0.0);
        assert_eq!(r.globals.len(), 2);
        assert!((r.globals[0].log_weight.exp() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn idempotent() {
        let d = density(&[0.7, 0.2999, 1e-4]);
        let cfg = ReductionConfig::default();
        let once = reduce(&d, &cfg);
        assert_eq!(reduce(&once, &cfg), once);
    }
}
