//! Transmission permutations of divisors on twice-marked graphs.
//!
//! For a divisor `D` of degree `d` on a graph of genus `g`, the twist
//! `D' = D + a·v - b·w` has degree `d + a - b`. Outside `0 ≤ deg D' ≤ 2g` the
//! four ranks in `Δ(D')` are all degree-forced (all `-1`, or all
//! `deg - g`), and `Δ(D') = 0`. So submodularity over every twist reduces to
//! the finite band, and `τ(b)` lies in `[b - d, b - d + 2g]`. When
//! `k(v - w)` is principal, `D' ∼ D + (a+k)·v - (b+k)·w`, so `b ∈ [0, k)`
//! suffices.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::chipfire::{enumerate_picard, reduce, torsion_order, Ranker};
use crate::error::{Error, Result};
use crate::graph::{Divisor, MarkedGraph};
use crate::zperm::{InvCount, SFunction, Window, ZPerm};

/// A marked graph together with its rank oracle and torsion order.
#[derive(Debug)]
pub struct Twists {
    mg: MarkedGraph,
    ranker: Ranker,
    torsion: i64,
    // keyed by 0-reduced divisor: the band scan only sees the class
    reports: Mutex<HashMap<Divisor, SubmodularityReport>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SubmodularityReport {
    Submodular { tau: ZPerm },
    Violation { a: i64, b: i64, delta: i64 },
}

impl SubmodularityReport {
    pub fn tau(&self) -> Option<&ZPerm> {
        match self {
            SubmodularityReport::Submodular { tau } => Some(tau),
            SubmodularityReport::Violation { .. } => None,
        }
    }
}

/// Windowed values of `s_D(a, b) = r(D + (a-1)·v - b·w) + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransmissionTable {
    pub divisor: Divisor,
    pub degree: i64,
    pub genus: i64,
    pub torsion: i64,
    pub values: SFunction,
}

/// Result of checking
/// `r(D + a·v - b·w) + 1 = #{n ≥ b : τ(n) ≤ a}` and
/// `r(K - D - a·v + b·w) + 1 = #{n < b : τ(n) > a}` on a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EquationCheck {
    pub direct: bool,
    pub dual: bool,
    /// First `(a, b)` where either side disagrees.
    pub first_failure: Option<(i64, i64)>,
}

impl EquationCheck {
    pub fn holds(&self) -> bool {
        self.direct && self.dual
    }
}

impl Twists {
    pub fn new(mg: &MarkedGraph) -> Self {
        Twists {
            ranker: Ranker::new(&mg.graph),
            torsion: torsion_order(mg),
            mg: mg.clone(),
            reports: Mutex::new(HashMap::new()),
        }
    }

    pub fn marked(&self) -> &MarkedGraph {
        &self.mg
    }

    pub fn ranker(&self) -> &Ranker {
        &self.ranker
    }

    pub fn genus(&self) -> i64 {
        self.ranker.genus()
    }

    pub fn torsion(&self) -> i64 {
        self.torsion
    }

    pub fn rank(&self, d: &Divisor) -> i64 {
        self.ranker.rank(d)
    }

    /// `r(D + a·v - b·w)`
    pub fn twist_rank(&self, d: &Divisor, a: i64, b: i64) -> i64 {
        self.ranker.rank(&self.mg.twist(d, a, b))
    }

    /// `Δ(D) = r(D) - r(D - v) - r(D - w) + r(D - v - w)`
    pub fn delta(&self, d: &Divisor) -> i64 {
        self.twist_rank(d, 0, 0) - self.twist_rank(d, -1, 0) - self.twist_rank(d, 0, 1)
            + self.twist_rank(d, -1, 1)
    }

    /// Scans the band for negative `Δ` and reads off `τ(b)` for `b ∈ [0, k)`.
    pub fn transmission_permutation(&self, d: &Divisor) -> Result<SubmodularityReport> {
        d.check_size(&self.mg.graph)?;
        let key = reduce(&self.mg.graph, d, 0);
        if let Some(report) = self.reports.lock().unwrap().get(&key) {
            return Ok(report.clone());
        }
        let report = self.scan_band(d)?;
        self.reports.lock().unwrap().insert(key, report.clone());
        Ok(report)
    }

    fn scan_band(&self, d: &Divisor) -> Result<SubmodularityReport> {
        let deg = d.degree();
        let g = self.genus();
        let k = self.torsion;
        let mut values = Vec::with_capacity(k as usize);
        for b in 0..k {
            let mut hit = None;
            for a in (b - deg)..=(b - deg + 2 * g) {
                let delta = self.delta(&self.mg.twist(d, a, b));
                if delta < 0 {
                    return Ok(SubmodularityReport::Violation { a, b, delta });
                }
                if delta > 1 || (delta == 1 && hit.is_some()) {
                    return Err(Error::Inconsistent(format!(
                        "Δ ≥ 0 on the band but τ({b}) is not unique"
                    )));
                }
                if delta == 1 {
                    hit = Some(a);
                }
            }
            let a = hit.ok_or_else(|| {
                Error::Inconsistent(format!("Δ ≥ 0 on the band but τ({b}) is missing"))
            })?;
            values.push(a);
        }
        let tau = ZPerm::periodic(k, values)?.canonical();
        Ok(SubmodularityReport::Submodular { tau })
    }

    /// Tabulates `s_D` on `window`, checking the closed form wherever the
    /// rank is degree-forced.
    pub fn transmission_table(&self, d: &Divisor, window: Window) -> Result<TransmissionTable> {
        d.check_size(&self.mg.graph)?;
        let deg = d.degree();
        let g = self.genus();
        let values = SFunction::from_fn(window, deg - g, |a, b| {
            (self.twist_rank(d, a - 1, b) + 1) as u64
        });
        for (a, b) in window.points() {
            let twist_deg = deg + a - 1 - b;
            if (twist_deg < 0 || twist_deg > 2 * g - 2) && values.get(a, b) != Some(values.tail(a, b)) {
                return Err(Error::Inconsistent(format!("degree-forced value wrong at ({a}, {b})")));
            }
        }
        Ok(TransmissionTable {
            divisor: reduce(&self.mg.graph, d, self.mg.w),
            degree: deg,
            genus: g,
            torsion: self.torsion,
            values,
        })
    }

    /// Checks both defining equations of `τ` against direct ranks.
    pub fn verify_defining_equations(&self, d: &Divisor, tau: &ZPerm, window: Window) -> EquationCheck {
        let k_minus_d = self.ranker.canonical() - d;
        let mut check = EquationCheck {
            direct: true,
            dual: true,
            first_failure: None,
        };
        for (a, b) in window.points() {
            let direct = self.twist_rank(d, a, b) + 1 == tau.s_value(a + 1, b) as i64;
            let dual = self.twist_rank(&k_minus_d, -a, -b) + 1 == tau.dual_s_value(a, b) as i64;
            check.direct &= direct;
            check.dual &= dual;
            if !(direct && dual) && check.first_failure.is_none() {
                check.first_failure = Some((a, b));
            }
        }
        check
    }

    /// A window reaching two steps past the band on every side and covering
    /// one full period of `b`.
    pub fn verification_window(&self, d: &Divisor) -> Window {
        let deg = d.degree();
        let g = self.genus();
        let k = self.torsion.max(1);
        Window::new((-deg - 3, k + 2 * g - deg + 2), (-2, k + 1))
    }
}

pub fn delta(mg: &MarkedGraph, d: &Divisor) -> i64 {
    Twists::new(mg).delta(d)
}

pub fn transmission_permutation(mg: &MarkedGraph, d: &Divisor) -> Result<SubmodularityReport> {
    Twists::new(mg).transmission_permutation(d)
}

pub fn transmission_table(mg: &MarkedGraph, d: &Divisor, window: Window) -> Result<TransmissionTable> {
    Twists::new(mg).transmission_table(d, window)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassRecord {
    pub divisor: Vec<i64>,
    pub tau: ZPerm,
    pub inv_k: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassViolation {
    NotSubmodular { divisor: Vec<i64>, a: i64, b: i64, delta: i64 },
    NotPeriodic { divisor: Vec<i64>, n: i64 },
    TooManyInversions { divisor: Vec<i64>, inv_k: u64 },
    /// Only under the large-`k` surrogate: an inversion spanning `k` or more.
    WideInversion { divisor: Vec<i64>, u: i64, v: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificationReport {
    pub k: i64,
    pub genus: i64,
    pub classes: usize,
    pub pass: bool,
    pub max_inv_k: u64,
    pub worst_class: Option<Vec<i64>>,
    pub violations: Vec<ClassViolation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutations: Option<Vec<ClassRecord>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertifyOptions {
    pub cap: u128,
    pub dump_permutations: bool,
    /// Also require every inversion `(u, v)` to have `v - u < k`, so that
    /// each `τ` looks like a finite permutation at the scale of one period.
    pub large_k_surrogate: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            cap: crate::chipfire::DEFAULT_PICARD_CAP,
            dump_permutations: false,
            large_k_surrogate: false,
        }
    }
}

impl Twists {
    /// Checks k-general transmission over every class of degree `g`.
    ///
    /// Other degrees need no separate check: `s_{D+v}(a, b) = s_D(a+1, b)`
    /// and `s_{D-w}(a, b) = s_D(a, b+1)`, so twisting reindexes the table,
    /// which preserves submodularity and `inv_k`.
    pub fn certify(&self, opts: CertifyOptions) -> Result<CertificationReport> {
        let k = self.torsion;
        if k < 2 {
            return Err(Error::MarksEquivalent);
        }
        let g = self.genus();
        let classes = enumerate_picard(&self.mg.graph, g, self.mg.w, opts.cap)?;
        let outcomes: Vec<Result<(Option<ClassRecord>, Vec<ClassViolation>)>> = classes
            .par_iter()
            .map(|d| self.certify_class(d, opts.large_k_surrogate))
            .collect();
        let mut records = Vec::new();
        let mut violations = Vec::new();
        for outcome in outcomes {
            let (record, mut bad) = outcome?;
            records.extend(record);
            violations.append(&mut bad);
        }
        let worst = records.iter().max_by_key(|r| r.inv_k);
        Ok(CertificationReport {
            k,
            genus: g,
            classes: classes.len(),
            pass: violations.is_empty(),
            max_inv_k: worst.map_or(0, |r| r.inv_k),
            worst_class: worst.map(|r| r.divisor.clone()),
            violations,
            permutations: opts.dump_permutations.then_some(records),
        })
    }

    fn certify_class(&self, d: &Divisor, surrogate: bool) -> Result<(Option<ClassRecord>, Vec<ClassViolation>)> {
        let k = self.torsion;
        let coeffs = d.coeffs().to_vec();
        let tau = match self.transmission_permutation(d)? {
            SubmodularityReport::Violation { a, b, delta } => {
                return Ok((None, vec![ClassViolation::NotSubmodular { divisor: coeffs, a, b, delta }]));
            }
            SubmodularityReport::Submodular { tau } => tau,
        };
        let mut bad = Vec::new();
        // τ was read on [0, k); read the next period independently
        for n in k..2 * k {
            let a = tau.eval(n);
            let twist = self.mg.twist(d, a, n);
            if self.delta(&twist) != 1 {
                bad.push(ClassViolation::NotPeriodic { divisor: coeffs.clone(), n });
                break;
            }
        }
        let inv = match tau.inv_k(k)? {
            InvCount::Finite(c) => c,
            InvCount::Infinite => unreachable!("inv_k is finite for k ≥ 2"),
        };
        if inv > self.genus() as u64 {
            bad.push(ClassViolation::TooManyInversions { divisor: coeffs.clone(), inv_k: inv });
        }
        if surrogate {
            if let Some(&(u, v)) = tau.inversions_ending_in(0..k).iter().find(|(u, v)| v - u >= k) {
                bad.push(ClassViolation::WideInversion { divisor: coeffs.clone(), u, v });
            }
        }
        Ok((Some(ClassRecord { divisor: coeffs, tau, inv_k: inv }), bad))
    }
}

pub fn certify_k_general_transmission(mg: &MarkedGraph, opts: CertifyOptions) -> Result<CertificationReport> {
    Twists::new(mg).certify(opts)
}
