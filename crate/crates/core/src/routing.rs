//! Read routing for replica-based layouts in normal and degraded mode.
//!
//! Replica layouts can serve a read from any surviving copy, so the routing
//! question is how to split each symbol's read demand across its holders to
//! keep disk loads balanced after failures. Parity layouts reconstruct on
//! the fly instead and are out of scope here.
//!
//! Demand units: every data symbol carries demand 1, so a disk's load is the
//! sum of the fractions routed to it. Compare against the empty-failure-set
//! routing to get relative load factors.

use crate::exact::{rat, rat_int, Ratio};
use crate::layout::{FailureSet, Layout, LayoutError, LayoutKind};
use num_traits::Zero;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RoutingError {
    #[error("failure set {0:?} loses data; no read routing exists")]
    DataLoss(Vec<u32>),
    #[error("read routing applies to replica layouts (bm, nway, grd, id, cd), not {0}")]
    Unsupported(String),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadRouting {
    pub n: u32,
    /// routes[id] lists (disk, fraction) with fractions summing to 1.
    pub routes: Vec<Vec<(u32, Ratio)>>,
    /// per-disk demand; failed disks carry 0.
    pub loads: Vec<Ratio>,
}

impl ReadRouting {
    fn from_routes(n: u32, routes: Vec<Vec<(u32, Ratio)>>) -> ReadRouting {
        let mut loads = vec![Ratio::zero(); n as usize];
        for r in &routes {
            for (d, frac) in r {
                loads[*d as usize] += frac;
            }
        }
        ReadRouting { n, routes, loads }
    }

    pub fn total_load(&self) -> Ratio {
        self.loads.iter().sum()
    }

    /// Per-disk load relative to a baseline routing (normal mode); None for
    /// disks idle in the baseline.
    pub fn relative_loads(&self, baseline: &ReadRouting) -> Vec<Option<Ratio>> {
        self.loads
            .iter()
            .zip(&baseline.loads)
            .map(|(l, b)| {
                if b.is_zero() {
                    None
                } else {
                    Some(l / b)
                }
            })
            .collect()
    }

    /// Largest relative load among surviving disks: the degraded-mode load
    /// increase factor.
    pub fn load_factor(&self, baseline: &ReadRouting) -> Option<Ratio> {
        self.relative_loads(baseline).into_iter().flatten().max()
    }
}

/// Published rebalancing split for rotated declustering: with k of M primary
/// disks down, route alpha_k = (M-k)/2M of surviving primaries' reads to the
/// secondary side. Solves the linearized balance 1 - a = a + k/M; the spread
/// of forced reads makes the residual per-disk imbalance O((k/M)^2).
pub fn grd_alpha(m: u32, k: u32) -> Ratio {
    assert!(m > 0 && k <= m);
    rat((m - k) as i64, (2 * m) as i64)
}

/// Balanced read-routing fractions for a replica layout under a failure set.
pub fn degraded_read_fractions(layout: &Layout, f: FailureSet) -> Result<ReadRouting, RoutingError> {
    if !layout.survives(f)? {
        return Err(RoutingError::DataLoss(f.disks()));
    }
    let n = layout.n;
    match layout.kind {
        LayoutKind::Bm => Ok(route_nway(n, 2, f)),
        LayoutKind::Nway(w) => Ok(route_nway(n, w, f)),
        LayoutKind::Cd => Ok(route_cd(n, f)),
        LayoutKind::Id(c) => Ok(route_id(n, c, f)),
        LayoutKind::Grd => Ok(route_grd(n, f)),
        ref other => Err(RoutingError::Unsupported(other.tag())),
    }
}

fn route_nway(n: u32, w: u32, f: FailureSet) -> ReadRouting {
    let m = n / w;
    let mut routes = Vec::with_capacity(m as usize);
    for g in 0..m {
        let holders: Vec<u32> = (g * w..(g + 1) * w).filter(|&d| !f.contains(d)).collect();
        let share = rat(1, holders.len() as i64);
        routes.push(holders.into_iter().map(|d| (d, share.clone())).collect());
    }
    ReadRouting::from_routes(n, routes)
}

fn route_cd(n: u32, f: FailureSet) -> ReadRouting {
    // symbol i lives on disk i (primary) and disk i+1 (secondary copy)
    let mut primary_share = vec![rat(1, 2); n as usize];
    if !f.is_empty() {
        // survivors form arcs between failed disks; within an arc of length
        // s the j-th disk keeps j/s of its own reads, handing the rest down
        // the chain, which levels every arc disk at (s+1)/s
        for d in 0..n {
            if f.contains(d) {
                primary_share[d as usize] = Ratio::zero();
                let mut run = Vec::new();
                let mut cur = (d + 1) % n;
                while !f.contains(cur) {
                    run.push(cur);
                    cur = (cur + 1) % n;
                }
                let s = run.len() as i64;
                for (j, disk) in run.into_iter().enumerate() {
                    primary_share[disk as usize] = rat(j as i64 + 1, s);
                }
            }
        }
    }
    let mut routes = Vec::with_capacity(n as usize);
    for i in 0..n {
        let p = primary_share[i as usize].clone();
        let q = rat_int(1) - &p;
        let mut r = Vec::new();
        if !p.is_zero() {
            r.push((i, p));
        }
        if !q.is_zero() {
            r.push(((i + 1) % n, q));
        }
        routes.push(r);
    }
    ReadRouting::from_routes(n, routes)
}

fn route_id(n: u32, c: u32, f: FailureSet) -> ReadRouting {
    // mirror the id builder's symbol order: cluster, owner, then holder
    let w = n / c;
    let mut routes = Vec::new();
    for g in 0..c {
        let base = g * w;
        for k in 0..w {
            let owner = base + k;
            for j in 0..w {
                if j == k {
                    continue;
                }
                let holder = base + j;
                let r = match (f.contains(owner), f.contains(holder)) {
                    (false, false) => vec![(owner, rat(1, 2)), (holder, rat(1, 2))],
                    (true, false) => vec![(holder, rat_int(1))],
                    (false, true) => vec![(owner, rat_int(1))],
                    (true, true) => unreachable!("survivable id set has one failure per cluster"),
                };
                routes.push(r);
            }
        }
    }
    ReadRouting::from_routes(n, routes)
}

fn route_grd(n: u32, f: FailureSet) -> ReadRouting {
    let m = n / 2;
    // survivable failure sets sit on one side only: any primary+secondary
    // pair shares exactly one block, so mixed failures always lose data
    let k = f.len();
    let primaries_down = (0..m).any(|d| f.contains(d));
    let alpha = grd_alpha(m, k);
    let mut routes = Vec::with_capacity((m * m) as usize);
    for p in 0..m {
        for r in 0..m {
            let sec = m + (p + r) % m;
            let route = if primaries_down {
                if f.contains(p) {
                    vec![(sec, rat_int(1))]
                } else {
                    vec![(p, rat_int(1) - &alpha), (sec, alpha.clone())]
                }
            } else if k > 0 {
                // secondary-side failures: the mirrored split
                if f.contains(sec) {
                    vec![(p, rat_int(1))]
                } else {
                    vec![(p, alpha.clone()), (sec, rat_int(1) - &alpha)]
                }
            } else {
                vec![(p, rat(1, 2)), (sec, rat(1, 2))]
            };
            routes.push(route);
        }
    }
    ReadRouting::from_routes(n, routes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Layout;

    fn lay(kind: LayoutKind, n: u32) -> Layout {
        Layout::build(kind, n).unwrap()
    }

    fn fs(d: &[u32]) -> FailureSet {
        FailureSet::from_disks(d)
    }

    fn check_conservation(layout: &Layout, routing: &ReadRouting) {
        for r in &routing.routes {
            let total: Ratio = r.iter().map(|(_, x)| x.clone()).sum();
            assert_eq!(total, rat_int(1));
        }
        assert_eq!(routing.total_load(), rat_int(layout.data_count as i64));
    }

    #[test]
    fn bm_survivor_takes_all() {
        let l = lay(LayoutKind::Bm, 8);
        let normal = degraded_read_fractions(&l, fs(&[])).unwrap();
        let deg = degraded_read_fractions(&l, fs(&[0])).unwrap();
        check_conservation(&l, &deg);
        assert_eq!(deg.routes[0], vec![(1, rat_int(1))]);
        assert_eq!(deg.load_factor(&normal).unwrap(), rat_int(2));
    }

    #[test]
    fn cd_single_failure_levels_at_9_over_8_minus_one() {
        // one failure on an 8-disk chain: every survivor carries 8/7
        let l = lay(LayoutKind::Cd, 8);
        let deg = degraded_read_fractions(&l, fs(&[1])).unwrap();
        check_conservation(&l, &deg);
        for d in 0..8u32 {
            if d == 1 {
                assert!(deg.loads[d as usize].is_zero());
            } else {
                assert_eq!(deg.loads[d as usize], rat(8, 7));
            }
        }
        // the failed disk's data moves whole to its successor
        assert_eq!(deg.routes[1], vec![(2, rat_int(1))]);
        // successor keeps 1/7 of its own reads, last arc disk keeps all
        assert_eq!(deg.routes[2][0], (2, rat(1, 7)));
        assert_eq!(deg.routes[0], vec![(0, rat_int(1))]);
    }

    #[test]
    fn cd_two_failures_per_arc_loads() {
        let l = lay(LayoutKind::Cd, 8);
        let normal = degraded_read_fractions(&l, fs(&[])).unwrap();
        let deg = degraded_read_fractions(&l, fs(&[1, 3])).unwrap();
        check_conservation(&l, &deg);
        // isolated survivor between the failures doubles; the long arc of
        // five levels at 6/5
        let rel = deg.relative_loads(&normal);
        assert_eq!(rel[2], Some(rat_int(2)));
        for d in [4usize, 5, 6, 7, 0] {
            assert_eq!(rel[d], Some(rat(6, 5)));
        }
        assert_eq!(deg.routes[4][0], (4, rat(1, 5)));
    }

    #[test]
    fn cd_adjacent_failures_lose_data() {
        let l = lay(LayoutKind::Cd, 8);
        let err = degraded_read_fractions(&l, fs(&[1, 2])).unwrap_err();
        assert!(matches!(err, RoutingError::DataLoss(_)));
    }

    #[test]
    fn id_load_increase_is_n_over_n_minus_1() {
        let l = lay(LayoutKind::Id(1), 4);
        let normal = degraded_read_fractions(&l, fs(&[])).unwrap();
        let deg = degraded_read_fractions(&l, fs(&[2])).unwrap();
        check_conservation(&l, &deg);
        assert_eq!(deg.load_factor(&normal).unwrap(), rat(4, 3));
        // every survivor levels exactly
        for d in [0usize, 1, 3] {
            assert_eq!(deg.loads[d], rat_int(4));
        }
    }

    #[test]
    fn id_two_clusters_balanced_within_failed_cluster() {
        let l = lay(LayoutKind::Id(2), 8);
        let normal = degraded_read_fractions(&l, fs(&[])).unwrap();
        let deg = degraded_read_fractions(&l, fs(&[0])).unwrap();
        check_conservation(&l, &deg);
        let rel = deg.relative_loads(&normal);
        for d in 1..4usize {
            assert_eq!(rel[d], Some(rat(4, 3)));
        }
        for d in 4..8usize {
            assert_eq!(rel[d], Some(rat_int(1)));
        }
    }

    #[test]
    fn grd_published_alpha() {
        assert_eq!(grd_alpha(4, 1), rat(3, 8));
        assert_eq!(grd_alpha(4, 4), rat_int(0));
        let l = lay(LayoutKind::Grd, 8);
        let deg = degraded_read_fractions(&l, fs(&[0])).unwrap();
        check_conservation(&l, &deg);
        // surviving primaries route 3/8 of reads to secondaries
        assert_eq!(deg.routes[4], vec![(1, rat(5, 8)), (5, rat(3, 8))]);
        // forced reads: failed primary's blocks served whole by secondaries
        assert_eq!(deg.routes[1], vec![(5, rat_int(1))]);
        // side loads under the published split
        for p in 1..4usize {
            assert_eq!(deg.loads[p], rat(5, 2));
        }
        for s in 4..8usize {
            assert_eq!(deg.loads[s], rat(17, 8));
        }
    }

    #[test]
    fn grd_all_primaries_down_doubles_secondaries() {
        let l = lay(LayoutKind::Grd, 8);
        let normal = degraded_read_fractions(&l, fs(&[])).unwrap();
        let deg = degraded_read_fractions(&l, fs(&[0, 1, 2, 3])).unwrap();
        check_conservation(&l, &deg);
        for s in 4..8usize {
            assert_eq!(deg.relative_loads(&normal)[s], Some(rat_int(2)));
        }
    }

    #[test]
    fn grd_secondary_side_mirrors() {
        let l = lay(LayoutKind::Grd, 8);
        let deg = degraded_read_fractions(&l, fs(&[5])).unwrap();
        check_conservation(&l, &deg);
        for p in 0..4usize {
            assert_eq!(deg.loads[p], rat(17, 8));
        }
        for s in [4usize, 6, 7] {
            assert_eq!(deg.loads[s], rat(5, 2));
        }
    }

    #[test]
    fn parity_layouts_unsupported() {
        let l = lay(LayoutKind::Lsi, 8);
        let err = degraded_read_fractions(&l, fs(&[])).unwrap_err();
        assert!(matches!(err, RoutingError::Unsupported(_)));
    }
}
