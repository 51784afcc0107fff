//! Vertex gluing of twice-marked graphs, chains of loops, and the genus-1
//! closed form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chipfire::{is_equivalent, torsion_order};
use crate::error::{Error, Result};
use crate::graph::{Divisor, Graph, MarkedGraph};
use crate::transmission::{SubmodularityReport, Twists};
use crate::zperm::{demazure, tropical_star, SFunction, Window, ZPerm};

/// `(Γ, v1, w2)` obtained from `(Γ1, v1, w1)` and `(Γ2, v2, w2)` by
/// identifying `w1` with `v2`.
///
/// Vertices of `Γ1` keep their indices; the vertices of `Γ2` other than `v2`
/// follow in their original order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluedGraph {
    pub left: MarkedGraph,
    pub right: MarkedGraph,
    pub result: MarkedGraph,
    pub left_map: Vec<usize>,
    pub right_map: Vec<usize>,
    pub seam: usize,
}

pub fn vertex_glue(m1: &MarkedGraph, m2: &MarkedGraph) -> GluedGraph {
    let n1 = m1.vertex_count();
    let left_map: Vec<usize> = (0..n1).collect();
    let mut next = n1;
    let right_map: Vec<usize> = (0..m2.vertex_count())
        .map(|u| {
            if u == m2.v {
                m1.w
            } else {
                next += 1;
                next - 1
            }
        })
        .collect();
    let mut edges = m1.graph.edges();
    edges.extend(
        m2.graph
            .edges()
            .into_iter()
            .map(|(a, b, m)| (right_map[a], right_map[b], m)),
    );
    let graph = Graph::new(next, &edges).expect("gluing connected graphs at a vertex");
    let result = MarkedGraph::new(graph, m1.v, right_map[m2.w]).expect("v1 and w2 are distinct");
    GluedGraph {
        left: m1.clone(),
        right: m2.clone(),
        result,
        left_map,
        right_map,
        seam: m1.w,
    }
}

impl GluedGraph {
    /// Pushes `d1 + d2` forward to the glued graph.
    pub fn combine(&self, d1: &Divisor, d2: &Divisor) -> Result<Divisor> {
        d1.check_size(&self.left.graph)?;
        d2.check_size(&self.right.graph)?;
        let mut out = vec![0; self.result.vertex_count()];
        for (u, &c) in d1.coeffs().iter().enumerate() {
            out[self.left_map[u]] += c;
        }
        for (u, &c) in d2.coeffs().iter().enumerate() {
            out[self.right_map[u]] += c;
        }
        Ok(Divisor::new(out))
    }

    /// Splits a divisor on the glued graph; seam chips go to the left side.
    pub fn split(&self, d: &Divisor) -> Result<(Divisor, Divisor)> {
        d.check_size(&self.result.graph)?;
        let d1 = self.left_map.iter().map(|&u| d[u]).collect();
        let d2 = self
            .right_map
            .iter()
            .map(|&u| if u == self.seam { 0 } else { d[u] })
            .collect();
        Ok((Divisor::new(d1), Divisor::new(d2)))
    }
}

/// Rank oracles for both constituents and the glued graph.
#[derive(Debug)]
pub struct Gluing {
    pub glued: GluedGraph,
    left: Twists,
    right: Twists,
    whole: Twists,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainingReport {
    pub window: Window,
    /// `s_D = s_{D1} ⋆ s_{D2}` on the window.
    pub tables_agree: bool,
    pub first_mismatch: Option<(i64, i64)>,
    pub tau: Option<ZPerm>,
    pub tau_left: Option<ZPerm>,
    pub tau_right: Option<ZPerm>,
    /// `τ_D = τ_{D1} ⋆ τ_{D2}`, when all three are submodular and the
    /// periods are compatible.
    pub demazure_agrees: Option<bool>,
}

impl Gluing {
    pub fn new(glued: GluedGraph) -> Self {
        Gluing {
            left: Twists::new(&glued.left),
            right: Twists::new(&glued.right),
            whole: Twists::new(&glued.result),
            glued,
        }
    }

    pub fn glue(m1: &MarkedGraph, m2: &MarkedGraph) -> Self {
        Gluing::new(vertex_glue(m1, m2))
    }

    pub fn left(&self) -> &Twists {
        &self.left
    }

    pub fn right(&self) -> &Twists {
        &self.right
    }

    pub fn whole(&self) -> &Twists {
        &self.whole
    }

    /// `min_ℓ r1(D1 - (ℓ+1)·w1) + r2(D2 + ℓ·v2) + 1`.
    ///
    /// For `ℓ ≥ deg D1` the first term is `-1` and the sum grows with `ℓ`;
    /// for `ℓ < -deg D2` the second is `-1` and the sum shrinks with `ℓ`.
    /// The window below contains both turning points with room to spare.
    pub fn rank(&self, d1: &Divisor, d2: &Divisor) -> Result<i64> {
        d1.check_size(&self.glued.left.graph)?;
        d2.check_size(&self.glued.right.graph)?;
        let lo = -d2.degree() - self.right.genus() - 1;
        let hi = d1.degree() + self.left.genus() + 1;
        let (l, r) = (&self.glued.left, &self.glued.right);
        Ok((lo..=hi)
            .map(|ell| self.left.rank(&l.twist(d1, 0, ell + 1)) + self.right.rank(&r.twist(d2, ell, 0)) + 1)
            .min()
            .expect("nonempty ℓ-window"))
    }

    pub fn direct_rank(&self, d1: &Divisor, d2: &Divisor) -> Result<i64> {
        Ok(self.whole.rank(&self.glued.combine(d1, d2)?))
    }

    /// Compares the directly computed table of `D1 + D2` with the min-plus
    /// product of the constituents' tables on `window`.
    pub fn verify_chaining(&self, d1: &Divisor, d2: &Divisor, window: Window) -> Result<ChainingReport> {
        let d = self.glued.combine(d1, d2)?;
        let direct = self.whole.transmission_table(&d, window)?.values;
        // s2(ℓ, b) vanishes once ℓ ≤ b - deg D2, and s1(a, ℓ) once ℓ ≥ a + deg D1
        let l_lo = window.b.0 - d2.degree();
        let l_hi = window.a.1 + d1.degree();
        let s1 = self.left.transmission_table(d1, Window::new(window.a, (l_lo, l_hi)))?.values;
        let s2 = self.right.transmission_table(d2, Window::new((l_lo, l_hi), window.b))?.values;
        let product = tropical_star(&s1, &s2)?;
        let first_mismatch = first_difference(&direct, &product);

        let tau_of = |t: &Twists, d: &Divisor| -> Result<Option<ZPerm>> {
            Ok(match t.transmission_permutation(d)? {
                SubmodularityReport::Submodular { tau } => Some(tau),
                SubmodularityReport::Violation { .. } => None,
            })
        };
        let tau = tau_of(&self.whole, &d)?;
        let tau_left = tau_of(&self.left, d1)?;
        let tau_right = tau_of(&self.right, d2)?;
        let demazure_agrees = match (&tau, &tau_left, &tau_right) {
            (Some(t), Some(t1), Some(t2)) => match demazure(t1, t2) {
                Ok(p) => Some(&p == t),
                Err(Error::Incompatible(_)) => None,
                Err(e) => return Err(e),
            },
            _ => None,
        };
        Ok(ChainingReport {
            window,
            tables_agree: first_mismatch.is_none(),
            first_mismatch,
            tau,
            tau_left,
            tau_right,
            demazure_agrees,
        })
    }
}

fn first_difference(x: &SFunction, y: &SFunction) -> Option<(i64, i64)> {
    x.window().points().find(|&(a, b)| x.get(a, b) != y.get(a, b))
}

pub fn glue_rank(gg: &GluedGraph, d1: &Divisor, d2: &Divisor) -> Result<i64> {
    Gluing::new(gg.clone()).rank(d1, d2)
}

pub fn verify_chaining(gg: &GluedGraph, d1: &Divisor, d2: &Divisor, window: Window) -> Result<ChainingReport> {
    Gluing::new(gg.clone()).verify_chaining(d1, d2, window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub l1: usize,
    pub l2: usize,
}

impl LoopSpec {
    pub fn circumference(&self) -> usize {
        self.l1 + self.l2
    }

    pub fn torsion(&self) -> i64 {
        (self.circumference() / gcd(self.l1, self.l2)) as i64
    }

    /// The index `ξ'` with `⟨p⟩ ∼ w + ξ'(w - v)` for the chip `p` units past
    /// `w`, or `None` when no such index exists.
    pub fn reflection_index(&self, position: usize) -> Option<i64> {
        let g = gcd(self.l1, self.l2);
        if !position.is_multiple_of(g) {
            return None;
        }
        let k = self.torsion();
        let step = (self.l1 / g) as i64;
        let target = (position / g) as i64;
        (0..k).find(|x| (x * step - target).rem_euclid(k) == 0)
    }
}

/// `{"loops": [{"l1": 1, "l2": 2}, ...], "xi": [0, 1, ...]}`.
///
/// `xi[i]` is the number of edges from `w_i` to the chip on loop `i`,
/// walking along the arc of length `l2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub loops: Vec<LoopSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<usize>>,
}

/// A chain of marked cycles glued end to end, with marks `(v_1, w_g)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub spec: ChainSpec,
    pub marked: MarkedGraph,
    /// `loop_maps[i][j]`: global index of vertex `j` of loop `i`.
    pub loop_maps: Vec<Vec<usize>>,
}

impl ChainSpec {
    pub fn uniform(k: usize, g: usize) -> ChainSpec {
        ChainSpec {
            loops: vec![LoopSpec { l1: 1, l2: k - 1 }; g],
            xi: None,
        }
    }

    pub fn with_xi(&self, xi: Vec<usize>) -> ChainSpec {
        ChainSpec {
            loops: self.loops.clone(),
            xi: Some(xi),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.loops.is_empty() {
            return Err(Error::InvalidChain("no loops".into()));
        }
        if self.loops.iter().any(|l| l.l1 == 0 || l.l2 == 0) {
            return Err(Error::InvalidChain("arc lengths must be positive".into()));
        }
        if let Some(xi) = &self.xi {
            if xi.len() != self.loops.len() {
                return Err(Error::InvalidChain(format!(
                    "{} chip positions for {} loops",
                    xi.len(),
                    self.loops.len()
                )));
            }
            if let Some((i, _)) = xi.iter().zip(&self.loops).enumerate().find(|(_, (x, l))| **x >= l.circumference()) {
                return Err(Error::InvalidChain(format!("chip position out of range on loop {i}")));
            }
        }
        Ok(())
    }

    /// Every chip-position vector, in lexicographic order.
    pub fn all_xi(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for l in &self.loops {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..l.circumference()).map(move |x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// `σ^k_{ξ'_1} ⋆ ⋯ ⋆ σ^k_{ξ'_g}`, with the identity for chips off the
    /// torsion lattice. `None` unless every loop has the same torsion.
    pub fn expected_break_tau(&self) -> Result<Option<ZPerm>> {
        self.validate()?;
        let xi = self
            .xi
            .as_ref()
            .ok_or_else(|| Error::InvalidChain("no chip positions".into()))?;
        let k = self.loops[0].torsion();
        if self.loops.iter().any(|l| l.torsion() != k) {
            return Ok(None);
        }
        let mut acc = ZPerm::identity();
        for (l, &p) in self.loops.iter().zip(xi) {
            if let Some(x) = l.reflection_index(p) {
                acc = demazure(&acc, &ZPerm::simple_reflection(k, x)?)?;
            }
        }
        Ok(Some(acc))
    }
}

pub fn build_chain(spec: &ChainSpec) -> Result<Chain> {
    spec.validate()?;
    let mut loops = spec.loops.iter().map(|l| MarkedGraph::cycle_with_arcs(l.l1, l.l2));
    let first = loops.next().expect("validated nonempty")?;
    let mut loop_maps = vec![(0..first.vertex_count()).collect::<Vec<_>>()];
    let mut marked = first;
    for next in loops {
        let gg = vertex_glue(&marked, &next?);
        loop_maps.push(gg.right_map);
        marked = gg.result;
    }
    Ok(Chain {
        spec: spec.clone(),
        marked,
        loop_maps,
    })
}

impl Chain {
    /// One chip on each loop, `xi[i]` edges past `w_i` along the long way
    /// round from `v_i`.
    pub fn break_divisor(&self, xi: &[usize]) -> Result<Divisor> {
        self.spec.with_xi(xi.to_vec()).validate()?;
        let mut d = self.marked.zero();
        for ((l, map), &p) in self.spec.loops.iter().zip(&self.loop_maps).zip(xi) {
            d = d.plus(map[(l.l1 + p) % l.circumference()], 1);
        }
        Ok(d)
    }
}

pub fn break_divisor(spec: &ChainSpec) -> Result<Divisor> {
    let xi = spec
        .xi
        .clone()
        .ok_or_else(|| Error::InvalidChain("no chip positions".into()))?;
    build_chain(spec)?.break_divisor(&xi)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BreakCheck {
    pub xi: Vec<usize>,
    pub divisor: Divisor,
    pub tau: Option<ZPerm>,
    pub expected: Option<ZPerm>,
    pub agrees: Option<bool>,
}

/// Computes `τ` of every break divisor by ranks and compares it with the
/// folded Demazure product.
pub fn sweep_break_divisors(chain: &Chain) -> Result<Vec<BreakCheck>> {
    let twists = Twists::new(&chain.marked);
    chain
        .spec
        .all_xi()
        .into_par_iter()
        .map(|xi| {
            let divisor = chain.break_divisor(&xi)?;
            let tau = twists.transmission_permutation(&divisor)?.tau().cloned();
            let expected = chain.spec.with_xi(xi.clone()).expected_break_tau()?;
            let agrees = match (&tau, &expected) {
                (Some(t), Some(e)) => Some(t == e),
                (None, Some(_)) => Some(false),
                _ => None,
            };
            Ok(BreakCheck {
                xi,
                divisor,
                tau,
                expected,
                agrees,
            })
        })
        .collect()
}

/// Closed-form `τ` on a genus-1 graph: `ι_{d-1} σ^k_{m-1}` when
/// `D ∼ m·w + (d - m)·v`, otherwise `ι_{d-1}`.
pub fn genus1_tau(mg: &MarkedGraph, d: &Divisor) -> Result<ZPerm> {
    if mg.genus() != 1 {
        return Err(Error::WrongGenus {
            expected: 1,
            got: mg.genus(),
        });
    }
    d.check_size(&mg.graph)?;
    let k = torsion_order(mg);
    if k < 2 {
        return Err(Error::MarksEquivalent);
    }
    let deg = d.degree();
    let base = ZPerm::shift(deg - 1);
    for m in 0..k {
        let target = mg.twist(&mg.zero(), deg - m, -m);
        if is_equivalent(&mg.graph, d, &target) {
            return base.compose(&ZPerm::simple_reflection(k, m - 1)?);
        }
    }
    Ok(base)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
