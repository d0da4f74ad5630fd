//! HDBSCAN on planar points (Campello, Moulavi and Sander 2013).
//!
//! Mutual-reachability distances with core distance taken at the
//! `min_cluster_size`-th neighbour (the point itself counts), a Prim minimum
//! spanning tree, the single-linkage hierarchy, its condensed form, and
//! excess-of-mass selection. O(n²) time, O(n) memory.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    /// Lets the root of the condensed tree be selected, so one dense group
    /// can come out as a single cluster rather than being split or dropped.
    pub allow_single_cluster: bool,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        Self {
            min_cluster_size: 5,
            allow_single_cluster: false,
        }
    }
}

/// Cluster label per point (`None` = noise). Clusters are numbered by
/// ascending centroid x, then y, so labels do not depend on input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub labels: Vec<Option<usize>>,
    pub n_clusters: usize,
}

impl Clustering {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, l)| **l == Some(cluster)).map(|(i, _)| i).collect()
    }
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn core_distances(points: &[[f64; 2]], k: usize) -> Vec<f64> {
    let mut row = vec![0.0; points.len()];
    points
        .iter()
        .map(|p| {
            for (r, q) in row.iter_mut().zip(points) {
                *r = dist(p, q);
            }
            *row.select_nth_unstable_by(k - 1, f64::total_cmp).1
        })
        .collect()
}

/// Strict order on edges that ignores point indices: weight, then raw
/// distance, then endpoint coordinates. Mutual-reachability weights tie often
/// (every edge out of a sparse point weighs its core distance), and breaking
/// those ties by index would make the tree depend on input order.
fn edge_cmp(points: &[[f64; 2]], (a, b, w): (usize, usize, f64), (c, d, v): (usize, usize, f64)) -> Ordering {
    let ends = |i: usize, j: usize| {
        let (p, q) = (points[i], points[j]);
        if (p[0], p[1]) <= (q[0], q[1]) {
            [p[0], p[1], q[0], q[1]]
        } else {
            [q[0], q[1], p[0], p[1]]
        }
    };
    w.total_cmp(&v)
        .then_with(|| dist(&points[a], &points[b]).total_cmp(&dist(&points[c], &points[d])))
        .then_with(|| {
            let (e, f) = (ends(a, b), ends(c, d));
            e.iter().zip(&f).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
        })
}

/// Prim's algorithm on the dense mutual-reachability graph. Edges are
/// returned sorted by [`edge_cmp`].
fn mst(points: &[[f64; 2]], core: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![usize::MAX; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    // start from the lexicographically smallest point
    let mut current = (0..n)
        .min_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(points[a][1].total_cmp(&points[b][1])))
        .unwrap_or(0);
    in_tree[current] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let w = dist(&points[current], &points[j]).max(core[current]).max(core[j]);
            if from[j] == usize::MAX || edge_cmp(points, (current, j, w), (from[j], j, best[j])).is_lt() {
                best[j] = w;
                from[j] = current;
            }
            if next == usize::MAX || edge_cmp(points, (from[j], j, best[j]), (from[next], next, best[next])).is_lt() {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((from[next], next, best[next]));
        current = next;
    }
    edges.sort_by(|x, y| edge_cmp(points, *x, *y));
    edges
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Single-linkage merge: internal node `n + k` joins `left` and `right` at `distance`.
struct Merge {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

fn single_linkage(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Merge> {
    // union-find over all 2n−1 tree nodes, so a set root is its newest merge node
    let mut uf = UnionFind::new(2 * n - 1);
    let mut size = vec![1usize; 2 * n - 1];
    let mut merges = Vec::with_capacity(n - 1);
    for (k, &(a, b, w)) in edges.iter().enumerate() {
        let (ra, rb) = (uf.find(a), uf.find(b));
        let node = n + k;
        size[node] = size[ra] + size[rb];
        uf.parent[ra] = node;
        uf.parent[rb] = node;
        merges.push(Merge {
            left: ra,
            right: rb,
            distance: w,
            size: size[node],
        });
    }
    merges
}

/// Condensed-tree cluster.
struct CondensedCluster {
    parent: Option<usize>,
    birth_lambda: f64,
    stability: f64,
    children: Vec<usize>,
}

pub fn hdbscan(points: &[[f64; 2]], min_cluster_size: usize) -> Result<Clustering> {
    hdbscan_with(
        points,
        &HdbscanParams {
            min_cluster_size,
            ..HdbscanParams::default()
        },
    )
}

pub fn hdbscan_with(points: &[[f64; 2]], params: &HdbscanParams) -> Result<Clustering> {
    let mcs = params.min_cluster_size;
    if mcs < 2 {
        return Err(invalid("min_cluster_size", "must be at least 2"));
    }
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(crate::Error::NonFinite);
    }
    let n = points.len();
    if n < mcs {
        return Ok(Clustering {
            labels: vec![None; n],
            n_clusters: 0,
        });
    }

    let core = core_distances(points, mcs);
    let edges = mst(points, &core);
    let merges = single_linkage(n, &edges);

    // zero distances (duplicate points) would give infinite λ
    let longest = edges.last().map_or(0.0, |e| e.2);
    let floor = if longest > 0.0 { longest * 1e-12 } else { 1.0 };
    let lambda_of = |d: f64| 1.0 / d.max(floor);

    let leaves_of = |node: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                let m = &merges[x - n];
                stack.push(m.left);
                stack.push(m.right);
            }
        }
        out
    };
    let size_of = |node: usize| if node < n { 1 } else { merges[node - n].size };

    // condense: walk the hierarchy from the root carrying the current cluster id
    let mut clusters = vec![CondensedCluster {
        parent: None,
        birth_lambda: 0.0,
        stability: 0.0,
        children: Vec::new(),
    }];
    // cluster each point falls out of
    let mut point_exit = vec![0usize; n];
    let mut stack = vec![(2 * n - 2, 0usize)];
    while let Some((node, c)) = stack.pop() {
        // only subtrees of at least min_cluster_size ≥ 2 points are pushed
        let m = &merges[node - n];
        let lambda = lambda_of(m.distance);
        let (l, r) = (m.left, m.right);
        let (big_l, big_r) = (size_of(l) >= mcs, size_of(r) >= mcs);
        if big_l && big_r {
            for child in [l, r] {
                let id = clusters.len();
                clusters.push(CondensedCluster {
                    parent: Some(c),
                    birth_lambda: lambda,
                    stability: 0.0,
                    children: Vec::new(),
                });
                clusters[c].children.push(id);
                clusters[c].stability += (lambda - clusters[c].birth_lambda) * size_of(child) as f64;
                stack.push((child, id));
            }
        } else {
            for (child, big) in [(l, big_l), (r, big_r)] {
                if big {
                    stack.push((child, c));
                } else {
                    for p in leaves_of(child) {
                        point_exit[p] = c;
                        clusters[c].stability += lambda - clusters[c].birth_lambda;
                    }
                }
            }
        }
    }
    // excess of mass, children before parents (ids grow with depth)
    let mut selected = vec![false; clusters.len()];
    let mut total = vec![0.0; clusters.len()];
    for c in (0..clusters.len()).rev() {
        let own = clusters[c].stability;
        let child_sum: f64 = clusters[c].children.iter().map(|&k| total[k]).sum();
        let is_root = c == 0;
        if clusters[c].children.is_empty() {
            selected[c] = !is_root || params.allow_single_cluster;
            total[c] = own;
        } else if child_sum > own || (is_root && !params.allow_single_cluster) {
            total[c] = child_sum;
        } else {
            selected[c] = true;
            total[c] = own;
            let mut desc = clusters[c].children.clone();
            while let Some(d) = desc.pop() {
                selected[d] = false;
                desc.extend_from_slice(&clusters[d].children);
            }
        }
    }

    // each point takes the selected ancestor of the cluster it left
    let mut raw: Vec<Option<usize>> = point_exit
        .iter()
        .map(|&(mut c)| loop {
            if selected[c] {
                break Some(c);
            }
            match clusters[c].parent {
                Some(p) => c = p,
                None => break None,
            }
        })
        .collect();

    // renumber by centroid
    let mut ids: Vec<usize> = (0..clusters.len()).filter(|&c| selected[c]).collect();
    let centroid = |c: usize| {
        let (mut sx, mut sy, mut k) = (0.0, 0.0, 0usize);
        for (p, l) in points.iter().zip(&raw) {
            if *l == Some(c) {
                sx += p[0];
                sy += p[1];
                k += 1;
            }
        }
        (sx / k as f64, sy / k as f64, k)
    };
    let mut keyed: Vec<(f64, f64, usize)> = Vec::with_capacity(ids.len());
    ids.retain(|&c| {
        let (x, y, k) = centroid(c);
        if k > 0 {
            keyed.push((x, y, c));
        }
        k > 0
    });
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut remap = vec![None; clusters.len()];
    for (new, &(_, _, c)) in keyed.iter().enumerate() {
        remap[c] = Some(new);
    }
    for l in raw.iter_mut() {
        *l = l.and_then(|c| remap[c]);
    }
    Ok(Clustering {
        labels: raw,
        n_clusters: keyed.len(),
    })
}
