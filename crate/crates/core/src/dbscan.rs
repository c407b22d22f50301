//! DBSCAN clustering of 2-D points.
//!
//! `min_pts` counts the query point itself, so `min_pts = 1` makes every
//! point a core point and clusters are the connected components of the
//! `eps`-neighbourhood graph.

use crate::linalg::Point;

/// Cluster label per point; `None` marks noise.
pub fn dbscan(points: &[Point], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let eps2 = eps * eps;
    let neighbours = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&k| (points[k] - points[i]).norm_squared() <= eps2)
            .collect()
    };

    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut cluster = 0;
    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let seeds = neighbours(i);
        if seeds.len() < min_pts {
            continue;
        }
        labels[i] = Some(cluster);
        let mut queue = seeds;
        while let Some(k) = queue.pop() {
            if labels[k].is_none() {
                labels[k] = Some(cluster);
            }
            if visited[k] {
                continue;
            }
            visited[k] = true;
            let nk = neighbours(k);
            if nk.len() >= min_pts {
                queue.extend(
                    nk.into_iter()
                        .filter(|&q| !visited[q] || labels[q].is_none()),
                );
            }
        }
        cluster += 1;
    }
    labels
}

/// Groups point indices into clusters; each noise point forms its own group.
/// Groups are returned in order of their smallest member.
pub fn cluster_groups(points: &[Point], eps: f64, min_pts: usize) -> Vec<Vec<usize>> {
    let labels = dbscan(points, eps, min_pts);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut by_label: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        match l {
            Some(c) => {
                let g = *by_label.entry(*c).or_insert_with(|| {
                    groups.push(Vec::new());
                    groups.len() - 1
                });
                groups[g].push(i);
            }
            None => groups.push(vec![i]),
        }
    }
    groups
}
