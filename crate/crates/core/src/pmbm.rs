//! Track-oriented PMBM density.
//!
//! Undetected objects are a Poisson point process with a GGIW-mixture
//! intensity. Detected objects are a set of tracks; each track holds the
//! local hypotheses of one Bernoulli component for the current time step,
//! and a global hypothesis picks one local hypothesis per track. Local
//! hypotheses remember their parent in the previous step's list, so the
//! hypotheses of a track form a tree over time.

use crate::error::{Error, Result};
use crate::ggiw::{self, GgiwParams, MotionModel, ObjectState};
use crate::linalg::{log_add_exp, log_sum_exp, MeasMatrix, Point};
use indexmap::IndexMap;
use std::collections::{BTreeSet, HashMap};

/// One term `w · GGIW(ζ)` of the Poisson intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonComponent {
    pub log_weight: f64,
    pub params: GgiwParams,
}

/// A single-track data association hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalHypothesis {
    pub log_weight: f64,
    /// Existence probability.
    pub existence: f64,
    /// Single-object density; `None` only for hypotheses with zero existence.
    pub params: Option<GgiwParams>,
    /// Associated `(step, measurement index)` pairs, sorted.
    pub assoc: Vec<(usize, usize)>,
    /// Index of the parent hypothesis in the previous step's list.
    pub parent: Option<usize>,
}

impl LocalHypothesis {
    /// The hypothesis that a measurement-initiated Bernoulli does not exist.
    pub fn non_existence() -> Self {
        Self {
            log_weight: 0.0,
            existence: 0.0,
            params: None,
            assoc: Vec::new(),
            parent: None,
        }
    }

    /// Measurement indices associated at `step`.
    pub fn measurements_at(&self, step: usize) -> Vec<usize> {
        self.assoc
            .iter()
            .filter(|(k, _)| *k == step)
            .map(|(_, j)| *j)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub birth_step: usize,
    pub hypotheses: Vec<LocalHypothesis>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalHypothesis {
    pub log_weight: f64,
    /// One local-hypothesis index per track.
    pub picks: Vec<usize>,
}

/// Axis-aligned rectangle in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn square(half_width: f64) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
        }
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

/// Measurement model: point measurement matrix and uniform Poisson clutter.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    pub measurement_matrix: MeasMatrix,
    /// Expected number of clutter measurements per scan.
    pub clutter_rate: f64,
    pub region: Region,
}

impl SensorModel {
    pub fn new(clutter_rate: f64, region: Region) -> Result<Self> {
        if !(clutter_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "clutter rate {clutter_rate} must be positive"
            )));
        }
        if !(region.area() > 0.0) {
            return Err(Error::InvalidParameter(
                "surveillance region is degenerate".into(),
            ));
        }
        Ok(Self {
            measurement_matrix: crate::linalg::position_selector(),
            clutter_rate,
            region,
        })
    }

    /// Clutter intensity `γ^C μ^C(z)`; the spatial density is uniform.
    pub fn clutter_intensity(&self, _z: &Point) -> f64 {
        self.clutter_rate / self.region.area()
    }

    pub fn ln_clutter_intensity(&self, z: &Point) -> f64 {
        self.clutter_intensity(z).ln()
    }
}

/// Poisson birth intensity as a GGIW mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthModel {
    pub components: Vec<PoissonComponent>,
}

impl BirthModel {
    pub fn single(rate: f64, params: GgiwParams) -> Self {
        Self {
            components: vec![PoissonComponent {
                log_weight: rate.ln(),
                params,
            }],
        }
    }

    pub fn empty() -> Self {
        Self {
            components: Vec::new(),
        }
    }

    /// Expected number of births per step.
    pub fn rate(&self) -> f64 {
        self.components.iter().map(|c| c.log_weight.exp()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmbmDensity {
    /// Time step of the last prediction.
    pub step: usize,
    pub ppp: Vec<PoissonComponent>,
    pub tracks: Vec<Track>,
    pub globals: Vec<GlobalHypothesis>,
    pub next_track_id: u64,
}

impl Default for PmbmDensity {
    fn default() -> Self {
        Self::new()
    }
}

impl PmbmDensity {
    /// No undetected mass, no tracks, one empty global hypothesis.
    pub fn new() -> Self {
        Self {
            step: 0,
            ppp: Vec::new(),
            tracks: Vec::new(),
            globals: vec![GlobalHypothesis {
                log_weight: 0.0,
                picks: Vec::new(),
            }],
            next_track_id: 0,
        }
    }

    pub fn local(&self, track: usize, hyp: usize) -> &LocalHypothesis {
        &self.tracks[track].hypotheses[hyp]
    }

    /// Index of the highest-weight global hypothesis, lowest index on ties.
    pub fn best_global(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, g) in self.globals.iter().enumerate() {
            match best {
                Some(b) if self.globals[b].log_weight >= g.log_weight => {}
                _ => best = Some(i),
            }
        }
        best
    }

    /// Sum of exponentiated global weights.
    pub fn global_weight_sum(&self) -> f64 {
        self.globals.iter().map(|g| g.log_weight.exp()).sum()
    }

    pub fn normalize_globals(&mut self) {
        let lw: Vec<f64> = self.globals.iter().map(|g| g.log_weight).collect();
        let norm = log_sum_exp(&lw);
        for g in &mut self.globals {
            g.log_weight -= norm;
        }
    }

    /// Checks referential integrity and that every global hypothesis
    /// partitions the measurement indices `0..num_measurements` of `step`.
    pub fn check_partition(
        &self,
        step: usize,
        num_measurements: usize,
    ) -> std::result::Result<(), String> {
        for (gi, g) in self.globals.iter().enumerate() {
            if g.picks.len() != self.tracks.len() {
                return Err(format!(
                    "global {gi} picks {} of {} tracks",
                    g.picks.len(),
                    self.tracks.len()
                ));
            }
            let mut seen = vec![false; num_measurements];
            for (t, &p) in g.picks.iter().enumerate() {
                let lh = self.tracks[t].hypotheses.get(p).ok_or_else(|| {
                    format!("global {gi} references missing hypothesis {p} of track {t}")
                })?;
                for j in lh.measurements_at(step) {
                    if j >= num_measurements || seen[j] {
                        return Err(format!(
                            "global {gi}: measurement {j} assigned twice or out of range"
                        ));
                    }
                    seen[j] = true;
                }
            }
            if let Some(j) = seen.iter().position(|s| !s) {
                return Err(format!("global {gi}: measurement {j} unexplained"));
            }
        }
        Ok(())
    }

    /// Association signature of a global hypothesis: per track, the parent
    /// index and the current-step measurement set of the picked hypothesis.
    pub fn global_signature(&self, g: usize) -> Vec<(Option<usize>, Vec<usize>)> {
        self.globals[g]
            .picks
            .iter()
            .enumerate()
            .map(|(t, &p)| {
                let lh = self.local(t, p);
                (lh.parent, lh.measurements_at(self.step))
            })
            .collect()
    }
}

/// Prediction: survival-thinned and time-updated PPP plus births; every
/// local hypothesis gets one predicted child at the same position in its
/// track, so global hypotheses carry over unchanged.
pub fn predict(
    pmbm: &PmbmDensity,
    motion: &MotionModel,
    birth: &BirthModel,
) -> Result<PmbmDensity> {
    let ln_ps = motion.survival_prob.ln();
    let mut ppp = Vec::with_capacity(pmbm.ppp.len() + birth.components.len());
    for c in &pmbm.ppp {
        ppp.push(PoissonComponent {
            log_weight: c.log_weight + ln_ps,
            params: ggiw::predict(&c.params, motion)?,
        });
    }
    ppp.extend(birth.components.iter().cloned());

    let tracks = pmbm
        .tracks
        .iter()
        .map(|t| {
            let hypotheses = t
                .hypotheses
                .iter()
                .enumerate()
                .map(|(i, lh)| {
                    Ok(LocalHypothesis {
                        log_weight: lh.log_weight,
                        existence: lh.existence * motion.survival_prob,
                        params: lh
                            .params
                            .as_ref()
                            .map(|p| ggiw::predict(p, motion))
                            .transpose()?,
                        assoc: lh.assoc.clone(),
                        parent: Some(i),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Track {
                id: t.id,
                birth_step: t.birth_step,
                hypotheses,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PmbmDensity {
        step: pmbm.step + 1,
        ppp,
        tracks,
        globals: pmbm.globals.clone(),
        next_track_id: pmbm.next_track_id,
    })
}

/// Misdetection update of a predicted local hypothesis.
pub fn update_local_missed(lh: &LocalHypothesis) -> LocalHypothesis {
    let params = match (&lh.params, lh.existence > 0.0) {
        (Some(p), true) => p,
        _ => {
            return LocalHypothesis {
                existence: 0.0,
                ..lh.clone()
            }
        }
    };
    let r = lh.existence;
    let ln_l0 = ggiw::ln_missed_detection_likelihood(params);
    let l0 = ln_l0.exp();
    let norm = 1.0 - r + r * l0;
    LocalHypothesis {
        log_weight: lh.log_weight + norm.ln(),
        existence: if r >= 1.0 { 1.0 } else { r * l0 / norm },
        params: Some(ggiw::missed_detection_update(params)),
        assoc: lh.assoc.clone(),
        parent: lh.parent,
    }
}

/// Detection update of a predicted local hypothesis with the measurements
/// `points`, whose frame indices at `step` are `indices`.
pub fn update_local_detected(
    lh: &LocalHypothesis,
    points: &[Point],
    step: usize,
    indices: &[usize],
    h: &MeasMatrix,
) -> Result<LocalHypothesis> {
    let params = match (&lh.params, lh.existence > 0.0) {
        (Some(p), true) => p,
        _ => return Err(Error::ZeroExistence),
    };
    let (post, ln_lik) = ggiw::update(params, points, h)?;
    let mut assoc = lh.assoc.clone();
    assoc.extend(indices.iter().map(|&j| (step, j)));
    assoc.sort_unstable();
    Ok(LocalHypothesis {
        log_weight: lh.log_weight + lh.existence.ln() + ln_lik,
        existence: 1.0,
        params: Some(post),
        assoc,
        parent: lh.parent,
    })
}

/// Local hypothesis of a measurement-initiated Bernoulli whose measurement
/// set is `points` (frame indices `indices`, largest index last). The
/// clutter alternative only exists for singleton sets.
pub fn create_new_bernoulli(
    points: &[Point],
    indices: &[usize],
    ppp: &[PoissonComponent],
    sensor: &SensorModel,
    step: usize,
) -> Result<LocalHypothesis> {
    if points.is_empty() {
        return Err(Error::EmptyMeasurementSet);
    }
    let mut ln_terms = Vec::with_capacity(ppp.len());
    let mut posts = Vec::with_capacity(ppp.len());
    for c in ppp {
        let (post, ln_lik) = ggiw::update(&c.params, points, &sensor.measurement_matrix)?;
        ln_terms.push(c.log_weight + ln_lik);
        posts.push(post);
    }
    let ln_lik = log_sum_exp(&ln_terms);
    let singleton = points.len() == 1;
    let ln_weight = if singleton {
        log_add_exp(sensor.ln_clutter_intensity(&points[0]), ln_lik)
    } else {
        ln_lik
    };
    if ln_weight == f64::NEG_INFINITY {
        return Err(Error::ZeroProbability(
            "multi-measurement set without undetected intensity",
        ));
    }
    let params = if ln_lik == f64::NEG_INFINITY {
        None
    } else {
        let weighted: Vec<(f64, GgiwParams)> = ln_terms
            .iter()
            .zip(posts)
            .map(|(lt, p)| ((lt - ln_lik).exp(), p))
            .collect();
        Some(ggiw::merge_mixture(&weighted)?)
    };
    let existence = if singleton {
        (ln_lik - ln_weight).exp()
    } else {
        1.0
    };
    let mut assoc: Vec<(usize, usize)> = indices.iter().map(|&j| (step, j)).collect();
    assoc.sort_unstable();
    Ok(LocalHypothesis {
        log_weight: ln_weight,
        existence,
        params,
        assoc,
        parent: None,
    })
}

/// Misdetection update of the Poisson intensity.
pub fn update_ppp(ppp: &[PoissonComponent]) -> Vec<PoissonComponent> {
    ppp.iter()
        .map(|c| PoissonComponent {
            log_weight: c.log_weight + ggiw::ln_missed_detection_likelihood(&c.params),
            params: ggiw::missed_detection_update(&c.params),
        })
        .collect()
}

/// Object estimates from the most likely global hypothesis: the GGIW mean of
/// each picked Bernoulli with existence above one half.
pub fn extract_estimates(pmbm: &PmbmDensity) -> Vec<ObjectState> {
    let Some(best) = pmbm.best_global() else {
        return Vec::new();
    };
    pmbm.globals[best]
        .picks
        .iter()
        .enumerate()
        .filter_map(|(t, &p)| {
            let lh = pmbm.local(t, p);
            match (&lh.params, lh.existence > 0.5) {
                (Some(params), true) => Some(params.mean_state()),
                _ => None,
            }
        })
        .collect()
}

/// Memoised construction of updated local and global hypotheses.
///
/// A global hypothesis of the posterior is identified by a previous global
/// hypothesis and a measurement association vector `assoc`, where
/// `assoc[j] < n` selects predicted track `assoc[j]` and `assoc[j] = n + l`
/// selects the Bernoulli initiated by measurement `l` (`n` predicted tracks). Every updated local hypothesis is
/// computed once and keyed by its parent and current measurement set.
pub struct PosteriorBuilder<'a> {
    pred: &'a PmbmDensity,
    meas: &'a [Point],
    sensor: &'a SensorModel,
    children: Vec<Vec<LocalHypothesis>>,
    memo: Vec<HashMap<(usize, Vec<usize>), usize>>,
    globals: IndexMap<Vec<usize>, f64>,
}

const NO_PARENT: usize = usize::MAX;

/// Result of [`PosteriorBuilder::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltGlobal {
    /// Position in insertion order of unique global hypotheses.
    pub index: usize,
    /// Whether this global hypothesis was seen before.
    pub revisit: bool,
}

impl<'a> PosteriorBuilder<'a> {
    pub fn new(pred: &'a PmbmDensity, meas: &'a [Point], sensor: &'a SensorModel) -> Self {
        let n_tracks = pred.tracks.len() + meas.len();
        Self {
            pred,
            meas,
            sensor,
            children: vec![Vec::new(); n_tracks],
            memo: vec![HashMap::new(); n_tracks],
            globals: IndexMap::new(),
        }
    }

    pub fn num_predicted(&self) -> usize {
        self.pred.tracks.len()
    }

    pub fn num_measurements(&self) -> usize {
        self.meas.len()
    }

    pub fn predicted(&self) -> &PmbmDensity {
        self.pred
    }

    pub fn child(&self, track: usize, idx: usize) -> &LocalHypothesis {
        &self.children[track][idx]
    }

    /// Picks of the `index`-th unique global hypothesis.
    pub fn global_picks(&self, index: usize) -> &[usize] {
        self.globals
            .get_index(index)
            .map(|(k, _)| k.as_slice())
            .unwrap_or(&[])
    }

    pub fn num_globals(&self) -> usize {
        self.globals.len()
    }

    /// Checks the support of `assoc` and the canonical labelling of new
    /// Bernoulli components (each non-empty new component is labelled by its
    /// largest member).
    pub fn check_assoc(&self, assoc: &[usize]) -> Result<()> {
        let n = self.num_predicted();
        let m = self.num_measurements();
        if assoc.len() != m {
            return Err(Error::InvalidParameter(format!(
                "association has {} entries for {m} measurements",
                assoc.len()
            )));
        }
        for (j, &b) in assoc.iter().enumerate() {
            if b >= n + m || (b >= n && b < n + j) {
                return Err(Error::InvalidParameter(format!(
                    "measurement {j} cannot join component {b}"
                )));
            }
            if b >= n && assoc[b - n] != b {
                return Err(Error::InvalidParameter(format!(
                    "component {b} is not canonically labelled"
                )));
            }
        }
        Ok(())
    }

    fn child_index(&mut self, track: usize, parent: usize, set: Vec<usize>) -> Result<usize> {
        if let Some(&idx) = self.memo[track].get(&(parent, set.clone())) {
            return Ok(idx);
        }
        let n = self.num_predicted();
        let step = self.pred.step;
        let lh = if track < n {
            let parent_lh = self.pred.local(track, parent);
            let mut lh = if set.is_empty() {
                update_local_missed(parent_lh)
            } else {
                let points: Vec<Point> = set.iter().map(|&j| self.meas[j]).collect();
                update_local_detected(
                    parent_lh,
                    &points,
                    step,
                    &set,
                    &self.sensor.measurement_matrix,
                )?
            };
            lh.parent = Some(parent);
            lh
        } else if set.is_empty() {
            LocalHypothesis::non_existence()
        } else {
            let points: Vec<Point> = set.iter().map(|&j| self.meas[j]).collect();
            create_new_bernoulli(&points, &set, &self.pred.ppp, self.sensor, step)?
        };
        let idx = self.children[track].len();
        self.children[track].push(lh);
        self.memo[track].insert((parent, set), idx);
        Ok(idx)
    }

    /// Builds (or fetches) the updated global hypothesis for the previous
    /// global hypothesis `prev` and association vector `assoc`.
    pub fn build(&mut self, prev: usize, assoc: &[usize]) -> Result<BuiltGlobal> {
        self.check_assoc(assoc)?;
        let n = self.num_predicted();
        let m = self.num_measurements();
        let mut sets: Vec<Vec<usize>> = vec![Vec::new(); n + m];
        for (j, &b) in assoc.iter().enumerate() {
            sets[b].push(j);
        }
        let prev_global = &self.pred.globals[prev];
        let prev_picks = prev_global.picks.clone();
        let mut log_weight = prev_global.log_weight;
        let mut picks = Vec::with_capacity(n + m);
        for (t, set) in sets.into_iter().enumerate() {
            let parent = if t < n { prev_picks[t] } else { NO_PARENT };
            let idx = self.child_index(t, parent, set)?;
            let child = &self.children[t][idx];
            log_weight += child.log_weight;
            if t < n {
                log_weight -= self.pred.local(t, parent).log_weight;
            }
            picks.push(idx);
        }
        if log_weight == f64::NEG_INFINITY || log_weight.is_nan() {
            return Err(Error::ZeroProbability("updated global hypothesis"));
        }
        let entry = self.globals.entry(picks);
        let revisit = matches!(entry, indexmap::map::Entry::Occupied(_));
        let index = entry.index();
        entry.or_insert(log_weight);
        Ok(BuiltGlobal { index, revisit })
    }

    /// Assembles the posterior from every unique global hypothesis built so
    /// far, with normalised weights and the misdetection-updated PPP.
    pub fn finish(self) -> PmbmDensity {
        let n = self.num_predicted();
        let step = self.pred.step;
        let mut tracks: Vec<Track> = Vec::with_capacity(self.children.len());
        for (t, hypotheses) in self.children.into_iter().enumerate() {
            if t < n {
                let old = &self.pred.tracks[t];
                tracks.push(Track {
                    id: old.id,
                    birth_step: old.birth_step,
                    hypotheses,
                });
            } else {
                tracks.push(Track {
                    id: self.pred.next_track_id + (t - n) as u64,
                    birth_step: step,
                    hypotheses,
                });
            }
        }
        let mut out = PmbmDensity {
            step,
            ppp: update_ppp(&self.pred.ppp),
            tracks,
            globals: self
                .globals
                .into_iter()
                .map(|(picks, log_weight)| GlobalHypothesis { log_weight, picks })
                .collect(),
            next_track_id: self.pred.next_track_id + self.meas.len() as u64,
        };
        out.normalize_globals();
        out
    }
}

/// Current-step measurement sets of the picked hypotheses of one global.
pub fn picked_measurement_sets(pmbm: &PmbmDensity, g: usize) -> Vec<BTreeSet<usize>> {
    pmbm.globals[g]
        .picks
        .iter()
        .enumerate()
        .map(|(t, &p)| {
            pmbm.local(t, p)
                .measurements_at(pmbm.step)
                .into_iter()
                .collect()
        })
        .collect()
}
