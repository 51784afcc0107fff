//! Vanishing sequences, the adjusted Brill–Noether number, inversion-count
//! bounds and splitting types.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::chipfire::{enumerate_picard, is_equivalent};
use crate::error::{Error, Result};
use crate::graph::Divisor;
use crate::transmission::{SubmodularityReport, Twists};
use crate::zperm::{InvCount, ZPerm};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VanishingData {
    pub degree: i64,
    pub genus: i64,
    pub r: i64,
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub rho: i64,
}

/// `(r+1)(g-d+r) + Σ(a_i - i) + Σ(b_i - i)`.
pub fn bn_lower_bound(r: i64, g_minus_d_plus_r: i64, a: &[i64], b: &[i64]) -> i64 {
    let excess = |s: &[i64]| s.iter().enumerate().map(|(i, x)| x - i as i64).sum::<i64>();
    (r + 1) * g_minus_d_plus_r + excess(a) + excess(b)
}

/// `a_i = max{a : r(D - a·u) ≥ r - i}`. The rank drops by at most one per
/// step, so a single scan until rank `-1` finds them all.
fn vanishing_sequence(t: &Twists, d: &Divisor, u: usize, r: i64) -> Vec<i64> {
    let mut ranks = vec![r];
    while *ranks.last().unwrap() >= 0 {
        let a = ranks.len() as i64;
        ranks.push(t.rank(&d.plus(u, -a)));
    }
    (0..=r)
        .map(|i| {
            ranks
                .iter()
                .rposition(|&x| x >= r - i)
                .expect("rank at a = 0 is r") as i64
        })
        .collect()
}

pub fn vanishing_data(t: &Twists, d: &Divisor) -> Result<VanishingData> {
    let r = t.rank(d);
    if r < 0 {
        return Err(Error::NegativeRank);
    }
    let mg = t.marked();
    let a = vanishing_sequence(t, d, mg.v, r);
    let b = vanishing_sequence(t, d, mg.w, r);
    let g = t.genus();
    let deg = d.degree();
    let rho = g - bn_lower_bound(r, g - deg + r, &a, &b);
    Ok(VanishingData {
        degree: deg,
        genus: g,
        r,
        a,
        b,
        rho,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvBoundReport {
    pub vanishing: VanishingData,
    pub tau: ZPerm,
    /// `σ(i)`: the index with `τ(b_i) = -a_{σ(i)}`.
    pub sigma: Vec<usize>,
    pub s: Vec<i64>,
    pub a_sets: Vec<Vec<i64>>,
    pub b_sets: Vec<Vec<i64>>,
    /// The vanishing orders read back from `τ` agree with the rank scans.
    pub readings_agree: bool,
    pub s_size_ok: bool,
    pub a_sizes_ok: bool,
    pub b_sizes_ok: bool,
    pub disjoint: bool,
    pub all_inversions: bool,
    pub inv0: InvCount,
    pub bound: i64,
    pub bound_holds: bool,
}

impl InvBoundReport {
    pub fn identities_hold(&self) -> bool {
        self.readings_agree
            && self.s_size_ok
            && self.a_sizes_ok
            && self.b_sizes_ok
            && self.disjoint
            && self.all_inversions
            && self.bound_holds
    }
}

/// Builds the sets `S`, `A_i`, `B_i` from `τ` and checks their sizes against
/// the vanishing data. Every `n` in them gives an inversion `(n, b_i)`.
pub fn check_inv_bound(t: &Twists, d: &Divisor) -> Result<InvBoundReport> {
    let tau = match t.transmission_permutation(d)? {
        SubmodularityReport::Submodular { tau } => tau,
        SubmodularityReport::Violation { .. } => return Err(Error::NotSubmodular),
    };
    let vd = vanishing_data(t, d)?;
    let reach = tau.displacement();
    // τ(n) ≤ 0 forces n ≤ reach, and τ(n) > 0 for n < 0 forces n > -reach - 1
    let b_read: Vec<i64> = (0..=reach).filter(|&n| tau.eval(n) <= 0).collect();
    let inv = tau.invert();
    let a_read: Vec<i64> = (0..=reach).filter(|&n| inv.eval(-n) >= 0).collect();
    let readings_agree = b_read == vd.b && a_read == vd.a;

    let sigma: Vec<usize> = vd
        .b
        .iter()
        .map(|&bi| vd.a.iter().position(|&a| a == -tau.eval(bi)).unwrap_or(usize::MAX))
        .collect();
    let neg = -2 * reach - 1..0;
    let s: Vec<i64> = neg.clone().filter(|&n| tau.eval(n) > 0).collect();
    let a_sets: Vec<Vec<i64>> = vd
        .b
        .iter()
        .map(|&bi| {
            let tb = tau.eval(bi);
            neg.clone().filter(|&n| (tb + 1..=0).contains(&tau.eval(n))).collect()
        })
        .collect();
    let b_sets: Vec<Vec<i64>> = vd
        .b
        .iter()
        .map(|&bi| (0..bi).filter(|&n| tau.eval(n) > 0).collect())
        .collect();

    let g = vd.genus;
    let s_size_ok = s.len() as i64 == g - vd.degree + vd.r;
    let a_sizes_ok = sigma.iter().zip(&a_sets).all(|(&j, set)| {
        j != usize::MAX && set.len() as i64 == vd.a[j] - j as i64
    });
    let b_sizes_ok = b_sets
        .iter()
        .enumerate()
        .all(|(i, set)| set.len() as i64 == vd.b[i] - i as i64);
    let mut seen = BTreeSet::new();
    let mut disjoint = true;
    let mut all_inversions = true;
    for (i, &bi) in vd.b.iter().enumerate() {
        for &n in s.iter().chain(&a_sets[i]).chain(&b_sets[i]) {
            disjoint &= seen.insert((n, bi));
            all_inversions &= n < bi && tau.eval(n) > tau.eval(bi);
        }
    }
    let bound = bn_lower_bound(vd.r, g - vd.degree + vd.r, &vd.a, &vd.b);
    let inv0 = tau.inv_k(0)?;
    let bound_holds = match inv0 {
        InvCount::Infinite => true,
        InvCount::Finite(c) => c as i64 >= bound,
    };
    Ok(InvBoundReport {
        vanishing: vd,
        tau,
        sigma,
        s,
        a_sets,
        b_sets,
        readings_agree,
        s_size_ok,
        a_sizes_ok,
        b_sizes_ok,
        disjoint,
        all_inversions,
        inv0,
        bound,
        bound_holds,
    })
}

/// Nondecreasing `μ = (μ_1, …, μ_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplittingType {
    pub mu: Vec<i64>,
}

impl SplittingType {
    /// `x_m(μ) = Σ max(0, μ_i + m + 1)`
    pub fn x(&self, m: i64) -> i64 {
        self.mu.iter().map(|&u| (u + m + 1).max(0)).sum()
    }

    /// `d(μ) = g - 1 + Σ(μ_i + 1)`
    pub fn degree(&self, genus: i64) -> i64 {
        genus - 1 + self.mu.iter().map(|u| u + 1).sum::<i64>()
    }

    /// `|μ| = Σ_{i<j} max(0, μ_j - μ_i - 1)`
    pub fn codimension(&self) -> i64 {
        let mut total = 0;
        for (j, &mj) in self.mu.iter().enumerate() {
            for &mi in &self.mu[..j] {
                total += (mj - mi - 1).max(0);
            }
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SplittingOutcome {
    Classified {
        mu: SplittingType,
        degree: i64,
        codimension: i64,
        /// `x_m = r(D + m·k·v) + 1` on the window.
        x: BTreeMap<i64, i64>,
    },
    /// `x_m - x_{m-1} < x_{m-1} - x_{m-2}`.
    NotClassifiable { m: i64, x: BTreeMap<i64, i64> },
}

impl SplittingOutcome {
    pub fn mu(&self) -> Option<&SplittingType> {
        match self {
            SplittingOutcome::Classified { mu, .. } => Some(mu),
            SplittingOutcome::NotClassifiable { .. } => None,
        }
    }
}

/// `[m_lo, m_hi]` such that `deg(D + m·k·v) < 0` for `m ≤ m_lo` and
/// `> 2g - 2` for `m ≥ m_hi`.
fn forced_window(deg: i64, g: i64, k: i64) -> (i64, i64) {
    let m_lo = (-deg - 1).div_euclid(k);
    let m_hi = (2 * g - 2 - deg).div_euclid(k) + 1;
    (m_lo, m_hi)
}

/// `x_m` for `m ∈ [m_lo - 1, m_hi + 1]`, checking the degree-forced values at
/// both ends.
fn x_table(t: &Twists, d: &Divisor) -> Result<BTreeMap<i64, i64>> {
    let k = t.torsion();
    let g = t.genus();
    let deg = d.degree();
    let (m_lo, m_hi) = forced_window(deg, g, k);
    let v = t.marked().v;
    let x: BTreeMap<i64, i64> = (m_lo - 1..=m_hi + 1)
        .map(|m| (m, t.rank(&d.plus(v, m * k)) + 1))
        .collect();
    for m in [m_lo - 1, m_lo] {
        if x[&m] != 0 {
            return Err(Error::Inconsistent(format!("x_{m} should be degree-forced to 0")));
        }
    }
    for m in [m_hi, m_hi + 1] {
        if x[&m] != deg + m * k - g + 1 {
            return Err(Error::Inconsistent(format!("x_{m} should be degree-forced")));
        }
    }
    Ok(x)
}

/// Splitting type with respect to `F = k·v`, or the first `m` where the
/// differences of `x_m` decrease.
pub fn splitting_type(t: &Twists, d: &Divisor) -> Result<SplittingOutcome> {
    let k = t.torsion();
    if k < 2 {
        return Err(Error::MarksEquivalent);
    }
    let x = x_table(t, d)?;
    let ms: Vec<i64> = x.keys().copied().collect();
    let diffs: Vec<(i64, i64)> = ms.windows(2).map(|w| (w[1], x[&w[1]] - x[&w[0]])).collect();
    if let Some(w) = diffs.windows(2).find(|w| w[1].1 < w[0].1) {
        return Ok(SplittingOutcome::NotClassifiable { m: w[1].0, x });
    }
    // #{i : μ_i ≥ -m} = x_m - x_{m-1}, so the j-th largest entry is
    // -min{m : x_m - x_{m-1} ≥ j}
    let mut mu: Vec<i64> = (1..=k)
        .map(|j| {
            diffs
                .iter()
                .find(|&&(_, dx)| dx >= j)
                .map(|&(m, _)| -m)
                .ok_or_else(|| Error::Inconsistent("x-differences never reach k".into()))
        })
        .collect::<Result<_>>()?;
    mu.reverse();
    let mu = SplittingType { mu };
    if let Some((&m, _)) = x.iter().find(|(&m, &xm)| mu.x(m) != xm) {
        return Err(Error::Inconsistent(format!("x_{m}(μ) disagrees with the rank")));
    }
    let degree = mu.degree(t.genus());
    if degree != d.degree() {
        return Err(Error::Inconsistent("d(μ) differs from deg D".into()));
    }
    Ok(SplittingOutcome::Classified {
        codimension: mu.codimension(),
        mu,
        degree,
        x,
    })
}

/// `S_m = {(i, j) : i < 0 ≤ j < k, ⌊(τ(j)-1)/k⌋ < m = ⌊(τ(i)-1)/k⌋}`,
/// keyed by `m`; only nonempty sets appear.
pub fn s_m_sets(tau: &ZPerm, k: i64) -> BTreeMap<i64, Vec<(i64, i64)>> {
    let bucket = |n: i64| (tau.eval(n) - 1).div_euclid(k);
    let lowest = (0..k).map(|j| tau.eval(j)).min().unwrap_or(0);
    let reach = tau.displacement();
    let mut out: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
    for i in (lowest - reach - 1)..0 {
        let m = bucket(i);
        for j in 0..k {
            if bucket(j) < m {
                out.entry(m).or_default().push((i, j));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassSplitting {
    pub divisor: Vec<i64>,
    pub degree: i64,
    pub tau: Option<ZPerm>,
    pub mu: Option<Vec<i64>>,
    pub codimension: Option<i64>,
    pub inv_k: Option<u64>,
    pub ok: bool,
    pub problems: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplittingReport {
    pub k: i64,
    pub genus: i64,
    pub kv_equiv_kw: bool,
    pub rank_kv: i64,
    pub classes: usize,
    pub pass: bool,
    pub failures: Vec<ClassSplitting>,
}

/// Runs the splitting-type checks on every class of the given degrees.
pub fn check_splitting_types(t: &Twists, degrees: &[i64], cap: u128) -> Result<SplittingReport> {
    let k = t.torsion();
    if k < 2 {
        return Err(Error::MarksEquivalent);
    }
    let mg = t.marked();
    let kv = mg.twist(&mg.zero(), k, 0);
    let kw = mg.twist(&mg.zero(), 0, -k);
    let kv_equiv_kw = is_equivalent(&mg.graph, &kv, &kw);
    let rank_kv = t.rank(&kv);
    let mut classes = Vec::new();
    for &deg in degrees {
        classes.extend(enumerate_picard(&mg.graph, deg, mg.w, cap)?);
    }
    let results: Vec<ClassSplitting> = classes
        .par_iter()
        .map(|d| class_splitting(t, d))
        .collect::<Result<_>>()?;
    let failures: Vec<ClassSplitting> = results.into_iter().filter(|c| !c.ok).collect();
    Ok(SplittingReport {
        k,
        genus: t.genus(),
        kv_equiv_kw,
        rank_kv,
        classes: classes.len(),
        pass: kv_equiv_kw && rank_kv >= 1 && failures.is_empty(),
        failures,
    })
}

pub fn class_splitting(t: &Twists, d: &Divisor) -> Result<ClassSplitting> {
    let k = t.torsion();
    let g = t.genus();
    let mut problems = Vec::new();
    let tau = t.transmission_permutation(d)?.tau().cloned();
    let outcome = splitting_type(t, d)?;
    let mut record = ClassSplitting {
        divisor: d.coeffs().to_vec(),
        degree: d.degree(),
        tau: tau.clone(),
        mu: outcome.mu().map(|m| m.mu.clone()),
        codimension: outcome.mu().map(SplittingType::codimension),
        inv_k: None,
        ok: false,
        problems: vec![],
    };
    let (Some(tau), SplittingOutcome::Classified { mu, x, .. }) = (tau, &outcome) else {
        if record.tau.is_none() {
            problems.push("not submodular".into());
        }
        if record.mu.is_none() {
            problems.push("not classifiable".into());
        }
        record.problems = problems;
        return Ok(record);
    };
    let inv = tau.inv_k(k)?.finite().expect("finite for k ≥ 2");
    record.inv_k = Some(inv);
    let codim = mu.codimension();
    if codim > inv as i64 {
        problems.push(format!("|μ| = {codim} > inv_k = {inv}"));
    }
    if inv as i64 > g {
        problems.push(format!("inv_k = {inv} > g = {g}"));
    }
    // x_m - x_{m-1} = #{0 ≤ n < k : τ(n) ≤ mk}
    for (&m, &xm) in x.iter().skip(1) {
        let dx = xm - x[&(m - 1)];
        let count = (0..k).filter(|&n| tau.eval(n) <= m * k).count() as i64;
        if dx != count {
            problems.push(format!("x_{m} - x_{} = {dx} but τ counts {count}", m - 1));
        }
    }
    let sets = s_m_sets(&tau, k);
    let xf = |m: i64| mu.x(m);
    let mut total = 0;
    let ms: BTreeSet<i64> = sets.keys().chain(x.keys()).copied().collect();
    for m in ms {
        let size = sets.get(&m).map_or(0, Vec::len) as i64;
        let expected = (k - xf(m + 1) + xf(m)) * (xf(m) - xf(m - 1));
        if size != expected {
            problems.push(format!("|S_{m}| = {size}, expected {expected}"));
        }
        total += size;
    }
    if total != codim {
        problems.push(format!("Σ|S_m| = {total} but |μ| = {codim}"));
    }
    let not_inversion = sets
        .values()
        .flatten()
        .any(|&(i, j)| !(i < j && tau.eval(i) > tau.eval(j)));
    if not_inversion {
        problems.push("S_m contains a non-inversion".into());
    }
    record.ok = problems.is_empty();
    record.problems = problems;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RhoSurvey {
    pub k: i64,
    pub genus: i64,
    pub classes: usize,
    pub min_rho: Option<i64>,
    pub negative: Vec<(Vec<i64>, VanishingData)>,
}

/// `ρ` for every class of rank at least 0 in the given degrees.
pub fn rho_survey(t: &Twists, degrees: &[i64], cap: u128) -> Result<RhoSurvey> {
    let mg = t.marked();
    let mut classes = Vec::new();
    for &deg in degrees {
        classes.extend(enumerate_picard(&mg.graph, deg, mg.w, cap)?);
    }
    let data: Vec<(Vec<i64>, VanishingData)> = classes
        .par_iter()
        .filter(|d| t.rank(d) >= 0)
        .map(|d| Ok((d.coeffs().to_vec(), vanishing_data(t, d)?)))
        .collect::<Result<_>>()?;
    Ok(RhoSurvey {
        k: t.torsion(),
        genus: t.genus(),
        classes: data.len(),
        min_rho: data.iter().map(|(_, v)| v.rho).min(),
        negative: data.into_iter().filter(|(_, v)| v.rho < 0).collect(),
    })
}
