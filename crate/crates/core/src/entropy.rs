//! Nonparametric differential-entropy estimation from samples via k-th
//! nearest-neighbor distances (Kozachenko-Leonenko), in one and two
//! dimensions. All estimates are reported in bits.

use crate::error::{Error, Result};
use crate::real::{real, Real};
use crate::special::digamma;

/// Default neighbor order.
pub const DEFAULT_K: usize = 4;

#[derive(Debug, Clone, PartialEq)]
enum Data<T> {
    D1(Vec<T>),
    D2(Vec<[T; 2]>),
}

/// A sample of 1-D or 2-D points for entropy estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySample<T> {
    data: Data<T>,
}

impl<T: Real> EntropySample<T> {
    pub fn from_1d(points: Vec<T>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("need at least two points".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("all coordinates must be finite".into()));
        }
        Ok(Self {
            data: Data::D1(points),
        })
    }

    pub fn from_2d(points: Vec<[T; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("need at least two points".into()));
        }
        if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidInput("all coordinates must be finite".into()));
        }
        Ok(Self {
            data: Data::D2(points),
        })
    }

    pub fn len(&self) -> usize {
        match &self.data {
            Data::D1(v) => v.len(),
            Data::D2(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match &self.data {
            Data::D1(_) => 1,
            Data::D2(_) => 2,
        }
    }

    /// Extract one coordinate as a 1-D sample.
    pub fn marginal(&self, index: usize) -> Result<Self> {
        match &self.data {
            Data::D1(_) => Err(Error::InvalidInput(
                "marginal of a 1-D sample is the sample itself".into(),
            )),
            Data::D2(v) => {
                if index > 1 {
                    return Err(Error::InvalidInput(format!(
                        "marginal index must be 0 or 1, got {index}"
                    )));
                }
                Self::from_1d(v.iter().map(|p| p[index]).collect())
            }
        }
    }
}

/// Kozachenko-Leonenko k-NN entropy estimate in bits:
/// `(d/N) sum log2(eps_i) + log2(V_d) + (psi(N) - psi(k)) / ln 2`.
///
/// Zero distances from duplicate points are clamped to machine epsilon; if
/// most of the sample collapses that way the sample is rejected as
/// degenerate.
pub fn knn_entropy<T: Real>(sample: &EntropySample<T>, k: usize) -> Result<T> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let n = sample.len();
    if n <= k {
        return Err(Error::InvalidInput(format!(
            "need more points ({n}) than neighbors (k = {k})"
        )));
    }
    let dists = match &sample.data {
        Data::D1(v) => kth_neighbor_1d(v, k),
        Data::D2(v) => {
            if n <= BRUTE_FORCE_LIMIT {
                kth_neighbor_2d_brute(v, k)
            } else {
                kth_neighbor_2d_tree(v, k)
            }
        }
    };

    let collapse = real::<T>(1e-12);
    let collapsed = dists.iter().filter(|&&d| d < collapse).count();
    if collapsed * 2 > n {
        return Err(Error::DegenerateSample(format!(
            "{collapsed} of {n} k-th neighbor distances are below 1e-12"
        )));
    }

    let d = real::<T>(sample.dim() as f64);
    let eps = T::epsilon();
    let mut sum_log = T::zero();
    for &dist in &dists {
        sum_log += dist.max(eps).log2();
    }
    let nt = real::<T>(n as f64);
    let v_d = match sample.dim() {
        1 => real::<T>(2.0),
        _ => T::PI(),
    };
    let psi_term = (digamma(nt) - digamma(real(k as f64))) / T::LN_2();
    Ok(d / nt * sum_log + v_d.log2() + psi_term)
}

/// `h(X_other | X_index) = h(joint) - h(marginal)` on a 2-D joint sample.
pub fn conditional_entropy<T: Real>(
    joint: &EntropySample<T>,
    marginal_index: usize,
    k: usize,
) -> Result<T> {
    if joint.dim() != 2 {
        return Err(Error::InvalidInput(
            "conditional entropy needs a 2-D joint sample".into(),
        ));
    }
    let h_joint = knn_entropy(joint, k)?;
    let marginal = joint.marginal(marginal_index)?;
    let h_marginal = knn_entropy(&marginal, k)?;
    Ok(h_joint - h_marginal)
}

const BRUTE_FORCE_LIMIT: usize = 5000;

/// k-th neighbor distances of a 1-D sample: sort once, then walk the k
/// nearest of each point among its sorted neighbors.
fn kth_neighbor_1d<T: Real>(points: &[T], k: usize) -> Vec<T> {
    let n = points.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| points[a as usize].partial_cmp(&points[b as usize]).unwrap());
    let sorted: Vec<T> = order.iter().map(|&i| points[i as usize]).collect();

    let mut out = vec![T::zero(); n];
    for i in 0..n {
        let x = sorted[i];
        let mut left = i;
        let mut right = i + 1;
        let mut dist = T::zero();
        for _ in 0..k {
            let dl = if left > 0 {
                x - sorted[left - 1]
            } else {
                T::infinity()
            };
            let dr = if right < n {
                sorted[right] - x
            } else {
                T::infinity()
            };
            if dl <= dr {
                dist = dl;
                left -= 1;
            } else {
                dist = dr;
                right += 1;
            }
        }
        out[order[i] as usize] = dist;
    }
    out
}

#[inline]
fn dist2<T: Real>(a: &[T; 2], b: &[T; 2]) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Exact O(N^2) fallback; also the test oracle for the k-d tree.
fn kth_neighbor_2d_brute<T: Real>(points: &[[T; 2]], k: usize) -> Vec<T> {
    let n = points.len();
    let mut out = vec![T::zero(); n];
    let mut best = vec![T::infinity(); k];
    for i in 0..n {
        best.fill(T::infinity());
        for j in 0..n {
            if j == i {
                continue;
            }
            let d2 = dist2(&points[i], &points[j]);
            if d2 < best[k - 1] {
                let mut pos = k - 1;
                while pos > 0 && best[pos - 1] > d2 {
                    best[pos] = best[pos - 1];
                    pos -= 1;
                }
                best[pos] = d2;
            }
        }
        out[i] = best[k - 1].sqrt();
    }
    out
}

/// A static k-d tree over 2-D points (median splits, alternating axes).
struct KdTree<'a, T> {
    points: &'a [[T; 2]],
    /// point indices arranged so each node's subtree is contiguous
    idx: Vec<u32>,
    /// (split_value, axis) per node position in `idx` (midpoint element)
    nodes: Vec<(T, u8)>,
}

impl<'a, T: Real> KdTree<'a, T> {
    fn build(points: &'a [[T; 2]]) -> Self {
        let n = points.len();
        let mut tree = KdTree {
            points,
            idx: (0..n as u32).collect(),
            nodes: vec![(T::zero(), 0); n],
        };
        tree.build_range(0, n, 0);
        tree
    }

    fn build_range(&mut self, lo: usize, hi: usize, axis: u8) {
        if hi - lo <= 1 {
            return;
        }
        let mid = (lo + hi) / 2;
        let points = self.points;
        self.idx[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            points[a as usize][axis as usize]
                .partial_cmp(&points[b as usize][axis as usize])
                .unwrap()
        });
        self.nodes[mid] = (points[self.idx[mid] as usize][axis as usize], axis);
        let next = 1 - axis;
        self.build_range(lo, mid, next);
        self.build_range(mid + 1, hi, next);
    }

    /// Squared distance to the k-th nearest neighbor of `points[query]`.
    fn kth_dist2(&self, query: u32, best: &mut [T]) -> T {
        best.fill(T::infinity());
        self.search(0, self.idx.len(), 0, query, best);
        best[best.len() - 1]
    }

    fn search(&self, lo: usize, hi: usize, axis: u8, query: u32, best: &mut [T]) {
        if hi <= lo {
            return;
        }
        let q = &self.points[query as usize];
        if hi - lo <= 8 {
            for &i in &self.idx[lo..hi] {
                if i == query {
                    continue;
                }
                let d2 = dist2(q, &self.points[i as usize]);
                push_best(best, d2);
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let (split, ax) = self.nodes[mid];
        debug_assert_eq!(ax, axis);
        let i = self.idx[mid];
        if i != query {
            let d2 = dist2(q, &self.points[i as usize]);
            push_best(best, d2);
        }
        let delta = q[axis as usize] - split;
        let next = 1 - axis;
        let (near_lo, near_hi, far_lo, far_hi) = if delta <= T::zero() {
            (lo, mid, mid + 1, hi)
        } else {
            (mid + 1, hi, lo, mid)
        };
        self.search(near_lo, near_hi, next, query, best);
        if delta * delta < best[best.len() - 1] {
            self.search(far_lo, far_hi, next, query, best);
        }
    }
}

#[inline]
fn push_best<T: Real>(best: &mut [T], d2: T) {
    let k = best.len();
    if d2 < best[k - 1] {
        let mut pos = k - 1;
        while pos > 0 && best[pos - 1] > d2 {
            best[pos] = best[pos - 1];
            pos -= 1;
        }
        best[pos] = d2;
    }
}

fn kth_neighbor_2d_tree<T: Real>(points: &[[T; 2]], k: usize) -> Vec<T> {
    let tree = KdTree::build(points);
    let mut out = vec![T::zero(); points.len()];
    let mut best = vec![T::infinity(); k];
    for i in 0..points.len() {
        out[i] = tree.kth_dist2(i as u32, &mut best).sqrt();
    }
    out
}
