//! Exact PMBM update by exhaustive enumeration, for small instances.

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::pmbm::{PmbmDensity, PosteriorBuilder, SensorModel};

/// Largest number of predicted tracks accepted by [`enumerate_update`].
pub const MAX_TRACKS: usize = 4;
/// Largest number of measurements accepted by [`enumerate_update`].
pub const MAX_MEASUREMENTS: usize = 5;

/// Exact posterior: every previous global hypothesis combined with every
/// canonical association vector of non-zero probability.
pub fn enumerate_update(
    pred: &PmbmDensity,
    meas: &[Point],
    sensor: &SensorModel,
) -> Result<PmbmDensity> {
    let n = pred.tracks.len();
    let m = meas.len();
    if n > MAX_TRACKS || m > MAX_MEASUREMENTS {
        return Err(Error::EnumerationGuard {
            tracks: n,
            measurements: m,
        });
    }
    let mut builder = PosteriorBuilder::new(pred, meas, sensor);
    let assocs = canonical_associations(n, m);
    for (g, global) in pred.globals.iter().enumerate() {
        if global.log_weight == f64::NEG_INFINITY {
            continue;
        }
        for assoc in &assocs {
            match builder.build(g, assoc) {
                Ok(_) | Err(Error::ZeroExistence | Error::ZeroProbability(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(builder.finish())
}

/// Every association vector with `assoc[j] < n` or `n + j <= assoc[j]`,
/// each non-empty new component labelled by its largest member.
pub fn canonical_associations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; m];
    fill(n, m, 0, &mut cur, &mut out);
    out
}

fn fill(n: usize, m: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if j == m {
        let canonical = cur.iter().all(|&b| b < n || cur[b - n] == b);
        if canonical {
            out.push(cur.clone());
        }
        return;
    }
    for b in (0..n).chain(n + j..n + m) {
        cur[j] = b;
        fill(n, m, j + 1, cur, out);
    }
}

/// Number of updated global hypotheses per previous global hypothesis when
/// every association has non-zero probability:
/// `sum_k C(m, k) n^(m-k) Bell(k)`.
pub fn count_hypotheses(n: usize, m: usize) -> u64 {
    let mut binom = vec![1u64; m + 1];
    for k in 1..=m {
        binom[k] = binom[k - 1] * (m - k + 1) as u64 / k as u64;
    }
    (0..=m)
        .map(|k| binom[k] * (n as u64).pow((m - k) as u32) * bell(k))
        .sum()
}

fn bell(k: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..k {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let want = [1, 1, 2, 5, 15, 52, 203];
        for (k, w) in want.iter().enumerate() {
            assert_eq!(bell(k), *w);
        }
    }

    #[test]
    fn hypothesis_counts() {
        assert_eq!(count_hypotheses(0, 0), 1);
        assert_eq!(count_hypotheses(1, 2), 5);
        assert_eq!(count_hypotheses(0, 3), 5);
        assert_eq!(count_hypotheses(2, 3), 37);
    }

    #[test]
    fn canonical_enumeration_matches_count() {
        for n in 0..=MAX_TRACKS {
            for m in 0..=MAX_MEASUREMENTS {
                assert_eq!(
                    canonical_associations(n, m).len() as u64,
                    count_hypotheses(n, m),
                    "n={n} m={m}"
                );
            }
        }
    }
}
