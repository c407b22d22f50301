//! PMBM update by blocked Gibbs sampling.
//!
//! Each sweep (1) builds the updated global hypothesis for the current
//! previous-global / association pair, (2) samples the detected objects from
//! its multi-Bernoulli density, (3) samples a previous global hypothesis and
//! (4) samples every measurement association independently. The full
//! variant samples existence explicitly; the collapsed variant samples a
//! state for every Bernoulli with non-zero existence and uses factorised
//! marginal conditionals. The posterior is assembled from all unique global
//! hypotheses visited, with their exact weights.

use crate::dbscan::cluster_groups;
use crate::error::{Error, Result};
use crate::ggiw::{self, ObjectState};
use crate::linalg::{log_add_exp, log_sum_exp, sample_log_categorical, Extent, MeasMatrix, Point};
use crate::pmbm::{PmbmDensity, PosteriorBuilder, SensorModel};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Full,
    Collapsed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InitMode {
    /// Most likely previous global, every measurement its own new Bernoulli.
    Simple,
    /// Likelihood-based assignment to existing tracks, DBSCAN for the rest.
    Cluster,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsConfig {
    pub n_iter: usize,
    pub variant: Variant,
    pub init: InitMode,
    /// DBSCAN neighbourhood radius in metres.
    pub dbscan_eps: f64,
    pub dbscan_min_pts: usize,
    pub seed: u64,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            n_iter: 100,
            variant: Variant::Collapsed,
            init: InitMode::Cluster,
            dbscan_eps: 10.0,
            dbscan_min_pts: 1,
            seed: 0,
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::InvalidParameter("n_iter must be at least 1".into()));
        }
        if !(self.dbscan_eps > 0.0) {
            return Err(Error::InvalidParameter(
                "dbscan_eps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Component index per measurement: `< n` for predicted tracks, `n + l` for
/// the Bernoulli initiated by measurement `l`.
pub type AssociationVector = Vec<usize>;

/// Sampled object per posterior Bernoulli component (`None` when empty).
/// The slot index plays the role of the auxiliary track label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectedSample {
    pub states: Vec<Option<ObjectState>>,
}

/// Cached point-measurement intensity `γ N(z; Hξ, X)` of a sampled state.
#[derive(Debug, Clone)]
struct PointIntensity {
    center: Point,
    inv_extent: Extent,
    ln_norm: f64,
}

impl PointIntensity {
    fn new(x: &ObjectState, h: &MeasMatrix) -> Option<Self> {
        let det = x.extent.determinant();
        if !(det > 0.0) || !(x.rate > 0.0) {
            return None;
        }
        let inv_extent = x.extent.try_inverse()?;
        Some(Self {
            center: h * x.kinematics,
            inv_extent,
            ln_norm: x.rate.ln() - (2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln(),
        })
    }

    fn ln_eval(&self, z: &Point) -> f64 {
        let d = z - self.center;
        self.ln_norm - 0.5 * (d.transpose() * self.inv_extent * d)[0]
    }
}

fn intensities(states: &[Option<ObjectState>], h: &MeasMatrix) -> Vec<Option<PointIntensity>> {
    states
        .iter()
        .map(|s| s.as_ref().and_then(|x| PointIntensity::new(x, h)))
        .collect()
}

/// Starting point of the chain.
pub fn initialize(
    pred: &PmbmDensity,
    meas: &[Point],
    sensor: &SensorModel,
    cfg: &GibbsConfig,
) -> Result<(usize, AssociationVector)> {
    let prev = pred.best_global().ok_or(Error::InvalidParameter(
        "predicted density has no global hypothesis".into(),
    ))?;
    let n = pred.tracks.len();
    let m = meas.len();
    let simple: AssociationVector = (0..m).map(|j| n + j).collect();
    if cfg.init == InitMode::Simple || m == 0 {
        return Ok((prev, simple));
    }

    let h = &sensor.measurement_matrix;
    let picks = &pred.globals[prev].picks;
    let mut assoc = vec![usize::MAX; m];
    let mut leftovers = Vec::new();
    for (j, z) in meas.iter().enumerate() {
        let single = [*z];
        let mut ppp_terms = Vec::with_capacity(pred.ppp.len());
        for c in &pred.ppp {
            let (_, ll) = ggiw::update(&c.params, &single, h)?;
            ppp_terms.push(c.log_weight + ll);
        }
        let mut best = log_add_exp(sensor.ln_clutter_intensity(z), log_sum_exp(&ppp_terms));
        let mut best_track = None;
        for (t, &p) in picks.iter().enumerate() {
            let lh = pred.local(t, p);
            let Some(params) = lh.params.as_ref().filter(|_| lh.existence > 0.0) else {
                continue;
            };
            let (_, ll) = ggiw::update(params, &single, h)?;
            let score = lh.existence.ln() + ll;
            if score > best {
                best = score;
                best_track = Some(t);
            }
        }
        match best_track {
            Some(t) => assoc[j] = t,
            None => leftovers.push(j),
        }
    }
    let points: Vec<Point> = leftovers.iter().map(|&j| meas[j]).collect();
    for group in cluster_groups(&points, cfg.dbscan_eps, cfg.dbscan_min_pts) {
        let members: Vec<usize> = group.iter().map(|&g| leftovers[g]).collect();
        let label = n + members.iter().copied().max().unwrap_or(0);
        for j in members {
            assoc[j] = label;
        }
    }
    Ok((prev, assoc))
}

/// Relabels every non-empty new component by its largest member so that
/// equivalent unordered collections map to one association vector.
pub fn remap(assoc: &[usize], n_pred: usize) -> AssociationVector {
    let m = assoc.len();
    let mut max_member = vec![None; m];
    for (j, &b) in assoc.iter().enumerate() {
        if b >= n_pred {
            let c = b - n_pred;
            max_member[c] = Some(max_member[c].map_or(j, |x: usize| x.max(j)));
        }
    }
    assoc
        .iter()
        .map(|&b| {
            if b >= n_pred {
                n_pred + max_member[b - n_pred].expect("member present")
            } else {
                b
            }
        })
        .collect()
}

fn sample_bernoulli_states<R: Rng + ?Sized>(
    builder: &PosteriorBuilder<'_>,
    picks: &[usize],
    collapse: bool,
    rng: &mut R,
) -> Result<DetectedSample> {
    let mut states = Vec::with_capacity(picks.len());
    for (t, &p) in picks.iter().enumerate() {
        let lh = builder.child(t, p);
        let state = match &lh.params {
            Some(params) if lh.existence > 0.0 => {
                let present = collapse || lh.existence >= 1.0 || rng.random::<f64>() < lh.existence;
                if present {
                    Some(ggiw::sample(params, rng)?)
                } else {
                    None
                }
            }
            _ => None,
        };
        states.push(state);
    }
    Ok(DetectedSample { states })
}

/// Full sampler: draws each updated Bernoulli of the global hypothesis
/// `picks` independently (empty with probability `1 - r`).
pub fn sample_detected_full<R: Rng + ?Sized>(
    builder: &PosteriorBuilder<'_>,
    picks: &[usize],
    rng: &mut R,
) -> Result<DetectedSample> {
    sample_bernoulli_states(builder, picks, false, rng)
}

/// Collapsed sampler: draws a state for every Bernoulli with non-zero
/// existence, and returns the updated existence probabilities.
pub fn sample_states_collapsed<R: Rng + ?Sized>(
    builder: &PosteriorBuilder<'_>,
    picks: &[usize],
    rng: &mut R,
) -> Result<(DetectedSample, Vec<f64>)> {
    let sample = sample_bernoulli_states(builder, picks, true, rng)?;
    let r = picks
        .iter()
        .enumerate()
        .map(|(t, &p)| builder.child(t, p).existence)
        .collect();
    Ok((sample, r))
}

/// Unnormalised log-probabilities of the previous global hypotheses given
/// the detected objects of the predicted tracks (full sampler).
pub fn prev_global_log_weights_full(
    pred: &PmbmDensity,
    detected: &[Option<ObjectState>],
) -> Vec<f64> {
    let factors: Vec<Vec<f64>> = pred
        .tracks
        .iter()
        .zip(detected)
        .map(|(track, x)| {
            track
                .hypotheses
                .iter()
                .map(|lh| match x {
                    None => (1.0 - lh.existence).ln(),
                    Some(x) => match &lh.params {
                        Some(p) if lh.existence > 0.0 => lh.existence.ln() - x.rate + p.ln_pdf(x),
                        _ => f64::NEG_INFINITY,
                    },
                })
                .collect()
        })
        .collect();
    combine_global_factors(pred, &factors)
}

/// Unnormalised log-probabilities of the previous global hypotheses under
/// the factorised marginal of the collapsed sampler. `states` and
/// `r_updated` cover the predicted tracks.
pub fn prev_global_log_weights_collapsed(
    pred: &PmbmDensity,
    states: &[Option<ObjectState>],
    r_updated: &[f64],
) -> Vec<f64> {
    let factors: Vec<Vec<f64>> = pred
        .tracks
        .iter()
        .enumerate()
        .map(|(t, track)| {
            let r_post = r_updated[t];
            track
                .hypotheses
                .iter()
                .map(|lh| {
                    let present = match (&states[t], &lh.params) {
                        (Some(x), Some(p)) if lh.existence > 0.0 && r_post > 0.0 => {
                            lh.existence.ln() - x.rate + p.ln_pdf(x) + r_post.ln()
                        }
                        _ => f64::NEG_INFINITY,
                    };
                    let absent = (1.0 - lh.existence).ln() + (1.0 - r_post).ln();
                    log_add_exp(present, absent)
                })
                .collect()
        })
        .collect();
    combine_global_factors(pred, &factors)
}

fn combine_global_factors(pred: &PmbmDensity, factors: &[Vec<f64>]) -> Vec<f64> {
    pred.globals
        .iter()
        .map(|g| {
            g.log_weight
                + g.picks
                    .iter()
                    .enumerate()
                    .map(|(t, &p)| factors[t][p])
                    .sum::<f64>()
        })
        .collect()
}

/// Unnormalised log-probabilities of `β_j = i` for every component `i`
/// (full sampler). `detected` covers all `n + m` components.
pub fn assoc_log_weights_full(
    n_pred: usize,
    detected: &[Option<ObjectState>],
    meas: &[Point],
    sensor: &SensorModel,
    j: usize,
) -> Vec<f64> {
    let lik = intensities(detected, &sensor.measurement_matrix);
    assoc_weights_full_cached(n_pred, &lik, meas, sensor, j)
}

fn assoc_weights_full_cached(
    n_pred: usize,
    lik: &[Option<PointIntensity>],
    meas: &[Point],
    sensor: &SensorModel,
    j: usize,
) -> Vec<f64> {
    let m = meas.len();
    let z = &meas[j];
    let own = n_pred + j;
    let mut w = vec![f64::NEG_INFINITY; n_pred + m];
    match &lik[own] {
        Some(li) => w[own] = li.ln_eval(z),
        None => {
            w[own] = sensor.ln_clutter_intensity(z);
            for i in (0..n_pred).chain(own + 1..n_pred + m) {
                if let Some(li) = &lik[i] {
                    w[i] = li.ln_eval(z);
                }
            }
        }
    }
    w
}

/// Unnormalised log-probabilities of `β_j = i` under the factorised
/// marginal of the collapsed sampler.
pub fn assoc_log_weights_collapsed(
    n_pred: usize,
    states: &[Option<ObjectState>],
    r_updated: &[f64],
    meas: &[Point],
    sensor: &SensorModel,
    j: usize,
) -> Vec<f64> {
    let lik = intensities(states, &sensor.measurement_matrix);
    assoc_weights_collapsed_cached(n_pred, &lik, r_updated, meas, sensor, j)
}

fn assoc_weights_collapsed_cached(
    n_pred: usize,
    lik: &[Option<PointIntensity>],
    r_updated: &[f64],
    meas: &[Point],
    sensor: &SensorModel,
    j: usize,
) -> Vec<f64> {
    let m = meas.len();
    let z = &meas[j];
    let own = n_pred + j;
    let mut w = vec![f64::NEG_INFINITY; n_pred + m];
    let r_own = r_updated[own];
    let ln_clutter = sensor.ln_clutter_intensity(z) + (1.0 - r_own).ln();
    w[own] = match &lik[own] {
        Some(li) if r_own > 0.0 => log_add_exp(li.ln_eval(z) + r_own.ln(), ln_clutter),
        _ => ln_clutter,
    };
    let ln_free = (1.0 - r_own).ln();
    if ln_free > f64::NEG_INFINITY {
        for i in (0..n_pred).chain(own + 1..n_pred + m) {
            if let Some(li) = &lik[i] {
                if r_updated[i] > 0.0 {
                    w[i] = li.ln_eval(z) + r_updated[i].ln() + ln_free;
                }
            }
        }
    }
    w
}

fn sample_assoc<R: Rng + ?Sized>(
    weights: impl Fn(usize) -> Vec<f64>,
    m: usize,
    rng: &mut R,
) -> Result<AssociationVector> {
    (0..m)
        .map(|j| {
            sample_log_categorical(&weights(j), rng)
                .ok_or(Error::NoAdmissibleCandidate("measurement association"))
        })
        .collect()
}

/// Draws `β` from the full-sampler conditional.
pub fn sample_assoc_full<R: Rng + ?Sized>(
    n_pred: usize,
    detected: &DetectedSample,
    meas: &[Point],
    sensor: &SensorModel,
    rng: &mut R,
) -> Result<AssociationVector> {
    let lik = intensities(&detected.states, &sensor.measurement_matrix);
    let assoc = sample_assoc(
        |j| assoc_weights_full_cached(n_pred, &lik, meas, sensor, j),
        meas.len(),
        rng,
    )?;
    Ok(remap(&assoc, n_pred))
}

/// Draws `β` from the collapsed-sampler conditional, then remaps it.
pub fn sample_assoc_collapsed<R: Rng + ?Sized>(
    n_pred: usize,
    states: &DetectedSample,
    r_updated: &[f64],
    meas: &[Point],
    sensor: &SensorModel,
    rng: &mut R,
) -> Result<AssociationVector> {
    let lik = intensities(&states.states, &sensor.measurement_matrix);
    let assoc = sample_assoc(
        |j| assoc_weights_collapsed_cached(n_pred, &lik, r_updated, meas, sensor, j),
        meas.len(),
        rng,
    )?;
    Ok(remap(&assoc, n_pred))
}

/// Draws a previous global hypothesis (full sampler).
pub fn sample_prev_global_full<R: Rng + ?Sized>(
    pred: &PmbmDensity,
    detected: &DetectedSample,
    rng: &mut R,
) -> Result<usize> {
    let n = pred.tracks.len();
    let w = prev_global_log_weights_full(pred, &detected.states[..n]);
    sample_log_categorical(&w, rng)
        .ok_or(Error::NoAdmissibleCandidate("previous global hypothesis"))
}

/// Draws a previous global hypothesis (collapsed sampler).
pub fn sample_prev_global_collapsed<R: Rng + ?Sized>(
    pred: &PmbmDensity,
    states: &DetectedSample,
    r_updated: &[f64],
    rng: &mut R,
) -> Result<usize> {
    let n = pred.tracks.len();
    let w = prev_global_log_weights_collapsed(pred, &states.states[..n], &r_updated[..n]);
    sample_log_categorical(&w, rng)
        .ok_or(Error::NoAdmissibleCandidate("previous global hypothesis"))
}

/// Posterior plus per-hypothesis visit counts of one sampling run.
#[derive(Debug, Clone)]
pub struct GibbsOutcome {
    pub posterior: PmbmDensity,
    /// Number of sweeps that built each posterior global hypothesis.
    pub visits: Vec<u64>,
    /// Sampled moves whose updated hypothesis has zero probability; the
    /// chain stays at its current state for those.
    pub rejected: usize,
}

/// PMBM update with blocked Gibbs sampling; returns the posterior before
/// reduction.
pub fn run_update<R: Rng + ?Sized>(
    pred: &PmbmDensity,
    meas: &[Point],
    sensor: &SensorModel,
    cfg: &GibbsConfig,
    rng: &mut R,
) -> Result<PmbmDensity> {
    run_update_traced(pred, meas, sensor, cfg, rng).map(|o| o.posterior)
}

pub fn run_update_traced<R: Rng + ?Sized>(
    pred: &PmbmDensity,
    meas: &[Point],
    sensor: &SensorModel,
    cfg: &GibbsConfig,
    rng: &mut R,
) -> Result<GibbsOutcome> {
    cfg.validate()?;
    let n = pred.tracks.len();
    let mut builder = PosteriorBuilder::new(pred, meas, sensor);
    let (mut prev, mut assoc) = initialize(pred, meas, sensor, cfg)?;
    let mut current = match builder.build(prev, &assoc) {
        Ok(g) => g,
        Err(Error::ZeroExistence | Error::ZeroProbability(_)) if cfg.init == InitMode::Cluster => {
            assoc = (0..meas.len()).map(|j| n + j).collect();
            builder.build(prev, &assoc)?
        }
        Err(e) => return Err(e),
    };
    let mut visits: Vec<u64> = Vec::new();
    let mut rejected = 0;

    for it in 0..cfg.n_iter {
        if visits.len() < builder.num_globals() {
            visits.resize(builder.num_globals(), 0);
        }
        visits[current.index] += 1;
        let picks = builder.global_picks(current.index).to_vec();

        let (next_prev, next_assoc) = match cfg.variant {
            Variant::Full => {
                let detected = sample_detected_full(&builder, &picks, rng)?;
                let p = if pred.globals.len() > 1 {
                    sample_prev_global_full(pred, &detected, rng)?
                } else {
                    0
                };
                (p, sample_assoc_full(n, &detected, meas, sensor, rng)?)
            }
            Variant::Collapsed => {
                let (states, r) = sample_states_collapsed(&builder, &picks, rng)?;
                let p = if pred.globals.len() > 1 {
                    sample_prev_global_collapsed(pred, &states, &r, rng)?
                } else {
                    0
                };
                (
                    p,
                    sample_assoc_collapsed(n, &states, &r, meas, sensor, rng)?,
                )
            }
        };

        if it + 1 < cfg.n_iter {
            match builder.build(next_prev, &next_assoc) {
                Ok(g) => {
                    current = g;
                    prev = next_prev;
                    assoc = next_assoc;
                }
                Err(Error::ZeroExistence | Error::ZeroProbability(_)) => rejected += 1,
                Err(e) => return Err(e),
            }
        }
    }
    let _ = (prev, assoc);
    visits.resize(builder.num_globals(), 0);
    Ok(GibbsOutcome {
        posterior: builder.finish(),
        visits,
        rejected,
    })
}
