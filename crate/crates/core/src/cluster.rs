use serde::{Deserialize, Serialize};

use crate::{CoreError, Vec2};

/// Sizes `k_1..k_n` of the clusters, with the true clusters (`k_j > 1`)
/// listed first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ClusterIndex {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    n0: usize,
}

impl ClusterIndex {
    pub fn new(sizes: Vec<usize>) -> Result<ClusterIndex, CoreError> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(CoreError::InvalidClusterSizes(format!("{sizes:?}")));
        }
        let n0 = sizes.iter().take_while(|&&k| k > 1).count();
        if sizes[n0..].iter().any(|&k| k != 1) {
            return Err(CoreError::InvalidClusterSizes(format!(
                "{sizes:?}: clusters with k > 1 must precede single bodies"
            )));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        for &k in &sizes {
            offsets.push(acc);
            acc += k;
        }
        offsets.push(acc);
        Ok(ClusterIndex { sizes, offsets, n0 })
    }

    /// Number of clusters `n` (including single bodies).
    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Total number of bodies.
    pub fn total(&self) -> usize {
        self.offsets[self.sizes.len()]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Size of cluster `j` (1-based).
    pub fn size(&self, j: usize) -> usize {
        self.sizes[j - 1]
    }

    /// Flat range of the members of cluster `j` (1-based).
    pub fn range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j - 1]..self.offsets[j]
    }

    /// Flat index to 1-based `(j, k)`.
    pub fn multi_index(&self, flat: usize) -> Result<(usize, usize), CoreError> {
        if flat >= self.total() {
            return Err(CoreError::IndexOutOfRange { index: flat, len: self.total() });
        }
        let j = self.offsets.partition_point(|&o| o <= flat);
        Ok((j, flat - self.offsets[j - 1] + 1))
    }

    /// 1-based `(j, k)` to flat index.
    pub fn flat_index(&self, j: usize, k: usize) -> Result<usize, CoreError> {
        if j == 0 || j > self.n() || k == 0 || k > self.sizes[j - 1] {
            return Err(CoreError::IndexOutOfRange { index: j * 1000 + k, len: self.total() });
        }
        Ok(self.offsets[j - 1] + k - 1)
    }
}

impl TryFrom<Vec<usize>> for ClusterIndex {
    type Error = CoreError;
    fn try_from(v: Vec<usize>) -> Result<Self, CoreError> {
        ClusterIndex::new(v)
    }
}

impl From<ClusterIndex> for Vec<usize> {
    fn from(c: ClusterIndex) -> Vec<usize> {
        c.sizes
    }
}

/// Positions and masses of all bodies, stored flat in cluster order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub index: ClusterIndex,
    pub positions: Vec<Vec2>,
    pub masses: Vec<f64>,
}

impl ClusterConfig {
    pub fn new(index: ClusterIndex, positions: Vec<Vec2>, masses: Vec<f64>) -> Result<Self, CoreError> {
        if positions.len() != index.total() || masses.len() != index.total() {
            return Err(CoreError::InvalidClusterSizes(format!(
                "{} positions / {} masses for {} bodies",
                positions.len(),
                masses.len(),
                index.total()
            )));
        }
        if let Some(&m) = masses.iter().find(|&&m| !(m > 0.0 && m.is_finite())) {
            return Err(CoreError::InvalidMass(m));
        }
        Ok(ClusterConfig { index, positions, masses })
    }

    /// A configuration with every body in its own cluster.
    pub fn flat(positions: Vec<Vec2>, masses: Vec<f64>) -> Result<Self, CoreError> {
        let index = ClusterIndex::new(vec![1; positions.len()])?;
        ClusterConfig::new(index, positions, masses)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn position(&self, j: usize, k: usize) -> Result<Vec2, CoreError> {
        Ok(self.positions[self.index.flat_index(j, k)?])
    }

    /// `M_j`, the total mass of cluster `j`.
    pub fn cluster_mass(&self, j: usize) -> f64 {
        self.masses[self.index.range(j)].iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn center_of_mass(&self) -> Vec2 {
        weighted_mean(&self.positions, &self.masses)
    }

    pub fn cluster_center(&self, j: usize) -> Vec2 {
        let r = self.index.range(j);
        weighted_mean(&self.positions[r.clone()], &self.masses[r])
    }

    /// Splits into cluster centers (with zero weighted mean) and member
    /// offsets relative to their own cluster center.
    pub fn jacobi_split(&self) -> (Vec<Vec2>, Vec<Vec2>) {
        let c = self.center_of_mass();
        let mut centers = Vec::with_capacity(self.index.n());
        let mut rel = Vec::with_capacity(self.len());
        for j in 1..=self.index.n() {
            let cj = self.cluster_center(j);
            centers.push([cj[0] - c[0], cj[1] - c[1]]);
            for i in self.index.range(j) {
                let q = self.positions[i];
                rel.push([q[0] - cj[0], q[1] - cj[1]]);
            }
        }
        (centers, rel)
    }
}

pub(crate) fn weighted_mean(q: &[Vec2], m: &[f64]) -> Vec2 {
    let mut s = [0.0, 0.0];
    let mut mt = 0.0;
    for (qi, &mi) in q.iter().zip(m) {
        s[0] += mi * qi[0];
        s[1] += mi * qi[1];
        mt += mi;
    }
    [s[0] / mt, s[1] / mt]
}

/// Removes the mass-weighted mean so that `sum m q = 0`.
pub fn center_of_mass_project(cfg: &ClusterConfig) -> ClusterConfig {
    let c = cfg.center_of_mass();
    let mut out = cfg.clone();
    for q in &mut out.positions {
        q[0] -= c[0];
        q[1] -= c[1];
    }
    // one correction pass brings the residual sum down to rounding level
    let c2 = out.center_of_mass();
    for q in &mut out.positions {
        q[0] -= c2[0];
        q[1] -= c2[1];
    }
    out
}
