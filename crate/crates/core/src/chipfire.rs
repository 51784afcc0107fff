//! Chip-firing: q-reduced divisors, linear equivalence, Baker–Norine rank,
//! torsion order of `v - w` and Picard enumeration.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::graph::{Divisor, Graph, MarkedGraph};

/// Default cap on the number of Picard classes enumerated in one call.
pub const DEFAULT_PICARD_CAP: u128 = 10_000;

/// Returns the unique `q`-reduced divisor linearly equivalent to `d`.
pub fn reduce(g: &Graph, d: &Divisor, q: usize) -> Divisor {
    let mut d = d.clone();
    make_nonnegative_off(g, &mut d, q);
    let n = g.vertex_count();
    loop {
        let burnt = burn(g, &d, q);
        if burnt.iter().all(|&b| b) {
            return d;
        }
        // the unburnt set can fire; fire it as many times as stays legal
        let mut times = i64::MAX;
        let mut out = vec![0i64; n];
        for u in (0..n).filter(|&u| !burnt[u]) {
            out[u] = g
                .neighbors(u)
                .filter(|&(x, _)| burnt[x])
                .map(|(_, m)| m as i64)
                .sum();
            if out[u] > 0 {
                times = times.min(d[u] / out[u]);
            }
        }
        debug_assert!((1..i64::MAX).contains(&times));
        let c = d.coeffs_mut();
        for u in (0..n).filter(|&u| !burnt[u]) {
            for (x, m) in g.neighbors(u) {
                if burnt[x] {
                    c[u] -= times * m as i64;
                    c[x] += times * m as i64;
                }
            }
        }
    }
}

/// Moves debt toward `q`: for each breadth-first layer, from the outside in,
/// fire the ball inside it until the layer is out of debt.
fn make_nonnegative_off(g: &Graph, d: &mut Divisor, q: usize) {
    let dist = g.distances_from(q);
    let depth = dist.iter().copied().max().unwrap_or(0);
    for layer in (1..=depth).rev() {
        let mut times = 0i64;
        for u in (0..g.vertex_count()).filter(|&u| dist[u] == layer) {
            if d[u] < 0 {
                let inward: i64 = g
                    .neighbors(u)
                    .filter(|&(x, _)| dist[x] < layer)
                    .map(|(_, m)| m as i64)
                    .sum();
                times = times.max((-d[u] + inward - 1) / inward);
            }
        }
        if times == 0 {
            continue;
        }
        let c = d.coeffs_mut();
        for u in (0..g.vertex_count()).filter(|&u| dist[u] == layer) {
            for (x, m) in g.neighbors(u) {
                if dist[x] < layer {
                    c[u] += times * m as i64;
                    c[x] -= times * m as i64;
                }
            }
        }
    }
}

/// Dhar's burning algorithm from `q`; returns which vertices burn.
fn burn(g: &Graph, d: &Divisor, q: usize) -> Vec<bool> {
    let n = g.vertex_count();
    let mut burnt = vec![false; n];
    let mut heat = vec![0i64; n];
    let mut queue = VecDeque::from([q]);
    burnt[q] = true;
    while let Some(u) = queue.pop_front() {
        for (x, m) in g.neighbors(u) {
            if burnt[x] {
                continue;
            }
            heat[x] += m as i64;
            if heat[x] > d[x] {
                burnt[x] = true;
                queue.push_back(x);
            }
        }
    }
    burnt
}

pub fn is_reduced(g: &Graph, d: &Divisor, q: usize) -> bool {
    (0..g.vertex_count()).all(|u| u == q || d[u] >= 0) && burn(g, d, q).into_iter().all(|b| b)
}

pub fn is_equivalent(g: &Graph, d1: &Divisor, d2: &Divisor) -> bool {
    d1.degree() == d2.degree() && reduce(g, d1, 0) == reduce(g, d2, 0)
}

pub fn is_principal(g: &Graph, d: &Divisor) -> bool {
    d.degree() == 0 && reduce(g, d, 0).coeffs().iter().all(|&c| c == 0)
}

/// Smallest `n ≥ 1` with `n(v - w)` principal. Equals 1 exactly when `v ∼ w`.
pub fn torsion_order(mg: &MarkedGraph) -> i64 {
    let g = &mg.graph;
    let step = mg.twist(&mg.zero(), 1, 1);
    let mut acc = step.clone();
    let mut n = 1;
    loop {
        if is_principal(g, &acc) {
            return n;
        }
        acc = &acc + &step;
        n += 1;
    }
}

/// One `q`-reduced representative of every class in `Pic^degree`, sorted.
///
/// Classes are reached by a breadth-first walk over the generators `u - q`
/// of the Jacobian, starting from `degree·q`.
pub fn enumerate_picard(g: &Graph, degree: i64, q: usize, cap: u128) -> Result<Vec<Divisor>> {
    let order = g.spanning_tree_count();
    if order > cap {
        return Err(Error::CapExceeded {
            what: "Picard enumeration",
            needed: order,
            cap,
        });
    }
    let n = g.vertex_count();
    let start = reduce(g, &Divisor::point(n, q, degree), q);
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(d) = queue.pop_front() {
        for u in (0..n).filter(|&u| u != q) {
            let next = reduce(g, &d.plus(u, 1).plus(q, -1), q);
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    let mut out: Vec<Divisor> = seen.into_iter().collect();
    out.sort();
    debug_assert_eq!(out.len() as u128, order);
    Ok(out)
}

static AUDIT_ON: AtomicBool = AtomicBool::new(false);
static AUDIT_CHECKS: AtomicU64 = AtomicU64::new(0);
static AUDIT_FAILURES: AtomicU64 = AtomicU64::new(0);

/// Turns on a process-wide Riemann–Roch audit: every [`Ranker::rank`] call
/// also computes `r(K - D)` and checks `r(D) - r(K - D) = deg D - g + 1`.
pub fn enable_riemann_roch_audit() {
    AUDIT_ON.store(true, Ordering::SeqCst);
}

/// `(checks, failures)` recorded by the audit so far.
pub fn riemann_roch_audit_stats() -> (u64, u64) {
    (
        AUDIT_CHECKS.load(Ordering::SeqCst),
        AUDIT_FAILURES.load(Ordering::SeqCst),
    )
}

/// Exact Baker–Norine rank with a class-level memo.
///
/// Uses `r(D) = -1` when the 0-reduced form of `D` is not effective, and
/// `r(D) = 1 + min_u r(D - u)` otherwise. Unfolding the recursion is the
/// enumeration of effective `E` as vertex multisets; the memo is keyed by
/// reduced divisor, so it is invisible to callers.
#[derive(Debug)]
pub struct Ranker {
    graph: Graph,
    canonical: Divisor,
    genus: i64,
    memo: Mutex<HashMap<Divisor, i64>>,
}

impl Ranker {
    pub fn new(graph: &Graph) -> Self {
        Ranker {
            canonical: graph.canonical_divisor(),
            genus: graph.genus(),
            graph: graph.clone(),
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn genus(&self) -> i64 {
        self.genus
    }

    pub fn canonical(&self) -> &Divisor {
        &self.canonical
    }

    pub fn rank(&self, d: &Divisor) -> i64 {
        let r = self.rank_inner(d);
        if AUDIT_ON.load(Ordering::Relaxed) {
            let dual = self.rank_inner(&(&self.canonical - d));
            AUDIT_CHECKS.fetch_add(1, Ordering::Relaxed);
            if r - dual != d.degree() - self.genus + 1 {
                AUDIT_FAILURES.fetch_add(1, Ordering::Relaxed);
            }
        }
        r
    }

    fn rank_inner(&self, d: &Divisor) -> i64 {
        if d.degree() < 0 {
            return -1;
        }
        let red = reduce(&self.graph, d, 0);
        self.rank_reduced(red)
    }

    fn rank_reduced(&self, red: Divisor) -> i64 {
        if red[0] < 0 {
            return -1;
        }
        if let Some(&r) = self.memo.lock().unwrap().get(&red) {
            return r;
        }
        let mut best = i64::MAX;
        for u in 0..self.graph.vertex_count() {
            let sub = reduce(&self.graph, &red.plus(u, -1), 0);
            best = best.min(self.rank_reduced(sub));
            if best == -1 {
                break;
            }
        }
        let r = 1 + best;
        self.memo.lock().unwrap().insert(red, r);
        r
    }
}

/// Convenience one-shot rank.
pub fn rank(g: &Graph, d: &Divisor) -> i64 {
    Ranker::new(g).rank(d)
}
