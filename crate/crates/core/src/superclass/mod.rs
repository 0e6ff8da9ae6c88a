//! Super-classes: ascending hierarchical classification of the code-vectors
//! and cuts of the resulting dendrogram.
//!
//! Linkage is Ward's criterion on Euclidean distances. Code-vectors are
//! always complete, so no masking enters here. Merges are deterministic:
//! equal costs are broken by the smallest (left, right) node-id pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::som::{Codebook, GridTopology};

/// One agglomeration step. Node ids follow the stepwise convention: leaves
/// are `0..n`, and the i-th merge creates node `n + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    /// Ward distance between the merged clusters, reported as
    /// `sqrt(2 * cost)` so two singletons merge at their Euclidean
    /// distance. Nondecreasing in merge order.
    pub height: f64,
    /// Leaves under the new node.
    pub size: usize,
}

/// The full merge tree over `n` leaves: exactly `n - 1` merges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }
}

/// A partition of the leaves into `k` super-classes. Super-class ids are
/// canonical: numbered 0..k by each group's smallest leaf index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperClassing {
    k: usize,
    labels: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl SuperClassing {
    /// Builds a super-classing directly from per-leaf labels. Group ids are
    /// renumbered canonically, 0..k in order of first appearance, which is
    /// also numbering by smallest member leaf.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut remap: std::collections::HashMap<usize, usize> = Default::default();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut labels = Vec::with_capacity(raw.len());
        for (leaf, &g) in raw.iter().enumerate() {
            let next = remap.len();
            let id = *remap.entry(g).or_insert(next);
            if id == members.len() {
                members.push(Vec::new());
            }
            members[id].push(leaf);
            labels.push(id);
        }
        Self {
            k: members.len(),
            labels,
            members,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Super-class id of each leaf.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    /// Leaf indices of each super-class, ascending.
    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }
}

struct Cluster {
    centroid: Vec<f64>,
    size: usize,
}

/// Ward merge cost between two clusters:
/// `|A||B| / (|A| + |B|) * ||mean_A - mean_B||^2`.
fn ward_cost(a: &Cluster, b: &Cluster) -> f64 {
    let mut sq = 0.0;
    for (x, y) in a.centroid.iter().zip(&b.centroid) {
        let d = x - y;
        sq += d * d;
    }
    (a.size * b.size) as f64 / (a.size + b.size) as f64 * sq
}

/// Agglomerates arbitrary points under Ward linkage.
pub fn agglomerate_points(points: &[Vec<f64>]) -> Result<Dendrogram> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewUnits(n));
    }
    let mut clusters: Vec<Option<Cluster>> = points
        .iter()
        .map(|p| {
            Some(Cluster {
                centroid: p.clone(),
                size: 1,
            })
        })
        .collect();
    clusters.extend((0..n - 1).map(|_| None));

    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best_cost = f64::INFINITY;
        let mut best_pair = (0usize, 0usize);
        for (ai, &i) in active.iter().enumerate() {
            for &j in &active[ai + 1..] {
                let cost = ward_cost(
                    clusters[i].as_ref().unwrap(),
                    clusters[j].as_ref().unwrap(),
                );
                // strict < keeps the smallest (left, right) pair on ties,
                // since `active` stays sorted by node id
                if cost < best_cost {
                    best_cost = cost;
                    best_pair = (i, j);
                }
            }
        }

        let (left, right) = best_pair;
        let a = clusters[left].take().unwrap();
        let b = clusters[right].take().unwrap();
        let size = a.size + b.size;
        let centroid = a
            .centroid
            .iter()
            .zip(&b.centroid)
            .map(|(x, y)| (a.size as f64 * x + b.size as f64 * y) / size as f64)
            .collect();
        let node = n + step;
        clusters[node] = Some(Cluster { centroid, size });
        active.retain(|&u| u != left && u != right);
        active.push(node);

        merges.push(Merge {
            left,
            right,
            height: (2.0 * best_cost).sqrt(),
            size,
        });
    }

    Ok(Dendrogram {
        n_leaves: n,
        merges,
    })
}

/// Ascending hierarchical classification of a codebook's code-vectors.
/// Deterministic: identical codebooks yield identical dendrograms.
pub fn agglomerate(cb: &Codebook) -> Result<Dendrogram> {
    agglomerate_points(cb.vectors())
}

/// Cuts the dendrogram into `k` groups by undoing the last `k - 1` merges.
pub fn cut(dg: &Dendrogram, k: usize) -> Result<SuperClassing> {
    let n = dg.n_leaves();
    if k == 0 || k > n {
        return Err(Error::CutOutOfRange { k, n });
    }

    // resolve each leaf through the first n - k merges
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (step, m) in dg.merges().iter().take(n - k).enumerate() {
        let node = n + step;
        let l = root(&mut parent, m.left);
        let r = root(&mut parent, m.right);
        parent[l] = node;
        parent[r] = node;
    }

    let roots: Vec<usize> = (0..n).map(|leaf| root(&mut parent, leaf)).collect();
    let mut group_of_root: std::collections::BTreeMap<usize, usize> = Default::default();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut labels = vec![0usize; n];
    for (leaf, &r) in roots.iter().enumerate() {
        let next = group_of_root.len();
        let g = *group_of_root.entry(r).or_insert(next);
        if g == members.len() {
            members.push(Vec::new());
        }
        members[g].push(leaf);
        labels[leaf] = g;
    }
    debug_assert_eq!(members.len(), k);

    Ok(SuperClassing {
        k,
        labels,
        members,
    })
}

/// Projects a super-classing of the map's units onto observations: each
/// observation takes the super-class of its winning unit. Stability across
/// training runs is measured on this partition, since unit indices of two
/// separately trained maps do not correspond.
pub fn observation_superclasses(
    d: &crate::data::Dataset,
    cb: &Codebook,
    units: &SuperClassing,
) -> Result<SuperClassing> {
    if units.n_leaves() != cb.units() {
        return Err(Error::LeafCountMismatch {
            left: units.n_leaves(),
            right: cb.units(),
        });
    }
    let labels = crate::som::classify_seq(d, cb)
        .into_iter()
        .map(|a| Ok(units.labels()[a?.unit]))
        .collect::<Result<Vec<usize>>>()?;
    Ok(SuperClassing::from_labels(&labels))
}

/// Flags whether each super-class forms an 8-connected region on the grid.
pub fn superclass_contiguity(sc: &SuperClassing, topo: GridTopology) -> Result<Vec<bool>> {
    if sc.n_leaves() != topo.units() {
        return Err(Error::LeafCountMismatch {
            left: sc.n_leaves(),
            right: topo.units(),
        });
    }
    let mut flags = Vec::with_capacity(sc.k());
    for group in sc.members() {
        if group.is_empty() {
            flags.push(true);
            continue;
        }
        let in_group: std::collections::HashSet<usize> = group.iter().copied().collect();
        let mut seen = std::collections::HashSet::new();
        let mut queue = vec![group[0]];
        seen.insert(group[0]);
        while let Some(u) = queue.pop() {
            for v in topo.neighborhood(u, 1) {
                if in_group.contains(&v) && seen.insert(v) {
                    queue.push(v);
                }
            }
        }
        flags.push(seen.len() == group.len());
    }
    Ok(flags)
}
