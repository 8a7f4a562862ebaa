//! Shared helpers for integration tests: deterministic random generators
//! and a brute-force m-separation oracle that is independent of the
//! production reachability algorithm.
#![allow(dead_code)] // each test binary uses a different subset

use crosscov::covariance::{reconstruct, BlockCovariance, LatentParams};
use crosscov::graph::MixedGraph;
use crosscov::nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha20Rng;
use rand_core::RngCore;

pub fn unif(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in [lo, hi).
pub fn unif_in(rng: &mut ChaCha20Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unif(rng)
}

pub fn pick(rng: &mut ChaCha20Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Entry bounded away from zero: sign * [0.2, 1.2).
pub fn bounded_entry(rng: &mut ChaCha20Rng) -> f64 {
    let sign = if rng.next_u64() % 2 == 0 { 1.0 } else { -1.0 };
    sign * (0.2 + unif(rng))
}

/// Random latent parameter set with saliences bounded away from zero and
/// PSD error covariances (`ridge = 0` allows rank-deficient errors).
pub fn random_params(
    rng: &mut ChaCha20Rng,
    p: usize,
    q: usize,
    rho: f64,
    ridge: f64,
) -> LatentParams {
    let a = DVector::from_fn(p, |_, _| bounded_entry(rng));
    let b = DVector::from_fn(q, |_, _| bounded_entry(rng));
    let ge = DMatrix::from_fn(p, p, |_, _| unif(rng) - 0.5);
    let gz = DMatrix::from_fn(q, q, |_, _| unif(rng) - 0.5);
    let see = &ge * ge.transpose() + DMatrix::identity(p, p) * ridge;
    let szz = &gz * gz.transpose() + DMatrix::identity(q, q) * ridge;
    LatentParams::new(a, b, rho, see, szz).expect("generator invariants")
}

/// Random covariance satisfying the rank-one cross constraint.
pub fn random_rank_one_cov(
    rng: &mut ChaCha20Rng,
    p: usize,
    q: usize,
    ridge: f64,
) -> BlockCovariance {
    reconstruct(&random_params(rng, p, q, 1.0, ridge)).0
}

/// Random mixed graph on `n` vertices labeled v0..: directed edges follow
/// the index order (so the directed part is acyclic), bidirected edges are
/// unrestricted, at most one edge per pair.
pub fn random_mixed_graph(rng: &mut ChaCha20Rng, n: usize) -> MixedGraph {
    let labels: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut g = MixedGraph::new(labels.clone()).unwrap();
    for i in 0..n {
        for j in (i + 1)..n {
            let r = unif(rng);
            if r < 0.18 {
                g.add_directed(&labels[i], &labels[j]).unwrap();
            } else if r < 0.30 {
                g.add_bidirected(&labels[i], &labels[j]).unwrap();
            }
        }
    }
    g
}

/// Edge marks between two adjacent vertices: (arrowhead at x, arrowhead at
/// y). Exactly one edge exists per adjacent pair.
fn marks(
    directed: &[(usize, usize)],
    bidirected: &[(usize, usize)],
    x: usize,
    y: usize,
) -> Option<(bool, bool)> {
    if directed.contains(&(x, y)) {
        Some((false, true))
    } else if directed.contains(&(y, x)) {
        Some((true, false))
    } else if bidirected.contains(&(x.min(y), x.max(y))) {
        Some((true, true))
    } else {
        None
    }
}

/// Brute-force m-separation oracle: enumerate all simple paths between the
/// two vertices and test each against the path criterion directly.
pub struct MsepOracle {
    n: usize,
    directed: Vec<(usize, usize)>,
    bidirected: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl MsepOracle {
    pub fn new(g: &MixedGraph) -> Self {
        let n = g.vertex_count();
        let idx = |l: &str| g.vertex(l).unwrap();
        let directed: Vec<(usize, usize)> =
            g.directed_edges().map(|(t, h)| (idx(t), idx(h))).collect();
        let bidirected: Vec<(usize, usize)> = g
            .bidirected_edges()
            .map(|(x, y)| {
                let (a, b) = (idx(x), idx(y));
                (a.min(b), a.max(b))
            })
            .collect();
        let mut neighbors = vec![Vec::new(); n];
        for &(t, h) in &directed {
            neighbors[t].push(h);
            neighbors[h].push(t);
        }
        for &(x, y) in &bidirected {
            neighbors[x].push(y);
            neighbors[y].push(x);
        }
        MsepOracle { n, directed, bidirected, neighbors }
    }

    /// Ancestor mask (reflexive) computed by naive fixed-point iteration.
    fn ancestor_mask(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        for &s in seeds {
            mask[s] = true;
        }
        loop {
            let mut changed = false;
            for &(t, h) in &self.directed {
                if mask[h] && !mask[t] {
                    mask[t] = true;
                    changed = true;
                }
            }
            if !changed {
                return mask;
            }
        }
    }

    fn path_m_connects(&self, path: &[usize], in_z: &[bool], anc_z: &[bool]) -> bool {
        for w in path.windows(3) {
            let (prev, v, next) = (w[0], w[1], w[2]);
            let (_, head_in) = marks(&self.directed, &self.bidirected, prev, v).unwrap();
            let (head_out, _) = marks(&self.directed, &self.bidirected, v, next).unwrap();
            let collider = head_in && head_out;
            if collider {
                if !anc_z[v] {
                    return false;
                }
            } else if in_z[v] {
                return false;
            }
        }
        true
    }

    fn pair_connected(&self, a: usize, b: usize, in_z: &[bool], anc_z: &[bool]) -> bool {
        // DFS over simple paths.
        let mut stack = vec![(vec![a], {
            let mut seen = vec![false; self.n];
            seen[a] = true;
            seen
        })];
        while let Some((path, seen)) = stack.pop() {
            let last = *path.last().unwrap();
            if last == b {
                if self.path_m_connects(&path, in_z, anc_z) {
                    return true;
                }
                continue;
            }
            for &next in &self.neighbors[last] {
                if !seen[next] {
                    let mut p2 = path.clone();
                    p2.push(next);
                    let mut s2 = seen.clone();
                    s2[next] = true;
                    stack.push((p2, s2));
                }
            }
        }
        false
    }

    /// Set-level m-separation: no pair (a in A, b in B) is m-connected.
    pub fn m_separated(&self, a: &[usize], b: &[usize], z: &[usize]) -> bool {
        let mut in_z = vec![false; self.n];
        for &v in z {
            in_z[v] = true;
        }
        let anc_z = self.ancestor_mask(z);
        for &x in a {
            for &y in b {
                if self.pair_connected(x, y, &in_z, &anc_z) {
                    return false;
                }
            }
        }
        true
    }
}
