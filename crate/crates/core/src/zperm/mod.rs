//! Permutations of ℤ with finite descriptions.
//!
//! Two representations are supported:
//!
//! * `Periodic { period k, values }` with `τ(n + k) = τ(n) + k`, i.e. an
//!   element of the extended affine symmetric group of period `k`;
//! * `ShiftFinite { shift m, exceptions }` with `τ(n) = n - m` off a finite
//!   set, i.e. an element of the group of permutations with finitely many
//!   inversions.
//!
//! Equality is semantic: two values are equal when they agree at every
//! integer, regardless of representation or stated period.

mod demazure;
mod sfunc;

pub use demazure::{demazure, reduced_word, ReducedWord};
pub use sfunc::{star_windows, tropical_star, SFunction, Window};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Repr {
    Periodic { period: i64, values: Vec<i64> },
    ShiftFinite { shift: i64, exceptions: BTreeMap<i64, i64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PermJson", into = "PermJson")]
pub struct ZPerm(Repr);

/// Permutation JSON: `{"kind": "periodic", "period": k, "values": [...]}` or
/// `{"kind": "shift-finite", "shift": m, "exceptions": {"n": τn, ...}}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PermJson {
    Periodic {
        period: i64,
        values: Vec<i64>,
    },
    ShiftFinite {
        shift: i64,
        #[serde(default)]
        exceptions: BTreeMap<i64, i64>,
    },
}

impl TryFrom<PermJson> for ZPerm {
    type Error = Error;
    fn try_from(j: PermJson) -> Result<ZPerm> {
        match j {
            PermJson::Periodic { period, values } => ZPerm::periodic(period, values),
            PermJson::ShiftFinite { shift, exceptions } => ZPerm::shift_finite(shift, exceptions),
        }
    }
}

impl From<ZPerm> for PermJson {
    fn from(p: ZPerm) -> PermJson {
        match p.0 {
            Repr::Periodic { period, values } => PermJson::Periodic { period, values },
            Repr::ShiftFinite { shift, exceptions } => PermJson::ShiftFinite { shift, exceptions },
        }
    }
}

/// Inversion count that may be infinite. `Infinite` compares above every
/// finite count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InvCount {
    Finite(u64),
    Infinite,
}

impl InvCount {
    pub fn finite(self) -> Option<u64> {
        match self {
            InvCount::Finite(n) => Some(n),
            InvCount::Infinite => None,
        }
    }
}

impl fmt::Display for InvCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvCount::Finite(n) => write!(f, "{n}"),
            InvCount::Infinite => write!(f, "infinite"),
        }
    }
}

impl Serialize for InvCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            InvCount::Finite(n) => s.serialize_u64(*n),
            InvCount::Infinite => s.serialize_str("infinite"),
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl ZPerm {
    pub fn periodic(period: i64, values: Vec<i64>) -> Result<ZPerm> {
        if period < 1 {
            return Err(Error::InvalidPermutation(format!("period {period} < 1")));
        }
        if values.len() as i64 != period {
            return Err(Error::InvalidPermutation(format!(
                "period {period} needs {period} values, got {}",
                values.len()
            )));
        }
        let residues: BTreeSet<i64> = values.iter().map(|v| v.rem_euclid(period)).collect();
        if residues.len() as i64 != period {
            return Err(Error::InvalidPermutation(
                "window values are not a complete residue system".into(),
            ));
        }
        Ok(ZPerm(Repr::Periodic { period, values }))
    }

    pub fn shift_finite(shift: i64, exceptions: BTreeMap<i64, i64>) -> Result<ZPerm> {
        let image: BTreeSet<i64> = exceptions.values().copied().collect();
        let expected: BTreeSet<i64> = exceptions.keys().map(|n| n - shift).collect();
        if image.len() != exceptions.len() || image != expected {
            return Err(Error::InvalidPermutation(
                "exceptions are not a bijection onto their shifted domain".into(),
            ));
        }
        let exceptions = exceptions
            .into_iter()
            .filter(|&(n, t)| t != n - shift)
            .collect();
        Ok(ZPerm(Repr::ShiftFinite { shift, exceptions }))
    }

    pub fn identity() -> ZPerm {
        ZPerm::shift(0)
    }

    /// `ι_m(n) = n - m`.
    pub fn shift(m: i64) -> ZPerm {
        ZPerm(Repr::ShiftFinite {
            shift: m,
            exceptions: BTreeMap::new(),
        })
    }

    /// `σ^k_m`: swaps `n` and `n + 1` for every `n ≡ m (mod k)` (for `k = 0`,
    /// only `n = m`).
    pub fn simple_reflection(k: i64, m: i64) -> Result<ZPerm> {
        match k {
            0 => Ok(ZPerm(Repr::ShiftFinite {
                shift: 0,
                exceptions: BTreeMap::from([(m, m + 1), (m + 1, m)]),
            })),
            1 => Err(Error::PeriodOne),
            k if k < 0 => Err(Error::InvalidPermutation(format!("negative period {k}"))),
            k => {
                let lo = m.rem_euclid(k);
                let values = (0..k)
                    .map(|r| {
                        if r == lo {
                            r + 1
                        } else if r == (lo + 1) % k {
                            r - 1
                        } else {
                            r
                        }
                    })
                    .collect();
                ZPerm::periodic(k, values)
            }
        }
    }

    pub fn eval(&self, n: i64) -> i64 {
        match &self.0 {
            Repr::Periodic { period, values } => {
                values[n.rem_euclid(*period) as usize] + n.div_euclid(*period) * period
            }
            Repr::ShiftFinite { shift, exceptions } => {
                exceptions.get(&n).copied().unwrap_or(n - shift)
            }
        }
    }

    /// Stated period for `Periodic`, `None` for `ShiftFinite`.
    pub fn period(&self) -> Option<i64> {
        match &self.0 {
            Repr::Periodic { period, .. } => Some(*period),
            Repr::ShiftFinite { .. } => None,
        }
    }

    /// Smallest period, or `None` for a non-shift `ShiftFinite`. Shifts have
    /// period 1.
    pub fn minimal_period(&self) -> Option<i64> {
        match &self.0 {
            Repr::ShiftFinite { exceptions, .. } => exceptions.is_empty().then_some(1),
            Repr::Periodic { period, values } => (1..=*period)
                .filter(|p| period % p == 0)
                .find(|&p| (0..(period - p) as usize).all(|r| values[r + p as usize] == values[r] + p)),
        }
    }

    /// `Some(m)` when this is the shift `ι_m`.
    pub fn as_shift(&self) -> Option<i64> {
        match self.minimal_period() {
            Some(1) => Some(-(self.eval(0))),
            _ => None,
        }
    }

    /// `m` such that `τ` agrees with `ι_m` on average: for large `a - b`,
    /// `s_τ(a, b) = a - b + m`.
    pub fn asymptotic_shift(&self) -> i64 {
        match &self.0 {
            Repr::ShiftFinite { shift, .. } => *shift,
            Repr::Periodic { period, values } => {
                let total: i64 = values.iter().enumerate().map(|(r, v)| r as i64 - v).sum();
                total / period
            }
        }
    }

    /// Largest `|τ(n) - n|`.
    pub fn displacement(&self) -> i64 {
        match &self.0 {
            Repr::Periodic { values, .. } => values
                .iter()
                .enumerate()
                .map(|(r, v)| (v - r as i64).abs())
                .max()
                .unwrap_or(0),
            Repr::ShiftFinite { shift, exceptions } => exceptions
                .iter()
                .map(|(n, t)| (t - n).abs())
                .chain([shift.abs()])
                .max()
                .unwrap_or(0),
        }
    }

    /// Membership in the group of period `k` (`k = 0`: finitely many
    /// inversions).
    pub fn in_group(&self, k: i64) -> bool {
        match k {
            0 => match &self.0 {
                Repr::ShiftFinite { .. } => true,
                Repr::Periodic { .. } => self.as_shift().is_some(),
            },
            k if k >= 1 => self.minimal_period().is_some_and(|p| k % p == 0),
            _ => false,
        }
    }

    /// Re-describes an element of the period-`k` group with period `k`.
    pub fn with_period(&self, k: i64) -> Result<ZPerm> {
        if !self.in_group(k) || k < 1 {
            return Err(Error::NotInGroup(k));
        }
        ZPerm::periodic(k, (0..k).map(|r| self.eval(r)).collect())
    }

    /// `ShiftFinite` form, available when this has finitely many inversions.
    pub fn to_shift_finite(&self) -> Result<ZPerm> {
        match &self.0 {
            Repr::ShiftFinite { .. } => Ok(self.clone()),
            Repr::Periodic { .. } => self
                .as_shift()
                .map(ZPerm::shift)
                .ok_or_else(|| Error::Incompatible("periodic permutation is not a shift".into())),
        }
    }

    pub fn invert(&self) -> ZPerm {
        match &self.0 {
            Repr::Periodic { period, values } => {
                let k = *period;
                let mut inv = vec![0; k as usize];
                for (r, &x) in values.iter().enumerate() {
                    inv[x.rem_euclid(k) as usize] = r as i64 - x.div_euclid(k) * k;
                }
                ZPerm(Repr::Periodic { period: k, values: inv })
            }
            Repr::ShiftFinite { shift, exceptions } => ZPerm(Repr::ShiftFinite {
                shift: -shift,
                exceptions: exceptions.iter().map(|(&n, &t)| (t, n)).collect(),
            }),
        }
    }

    /// Common period for a binary operation, or `None` to work with
    /// finitely many inversions.
    fn common_period(&self, other: &ZPerm) -> Result<Option<i64>> {
        let pick = |a: i64, b: i64| -> Result<i64> {
            if a % b == 0 {
                Ok(a)
            } else if b % a == 0 {
                Ok(b)
            } else {
                Err(Error::Incompatible(format!("periods {a} and {b}")))
            }
        };
        match (self.period(), other.period()) {
            (None, None) => Ok(None),
            (Some(k1), Some(k2)) => pick(k1, k2).map(Some),
            (Some(k), None) | (None, Some(k)) => {
                let (periodic, sf) = if self.period().is_some() { (self, other) } else { (other, self) };
                if sf.as_shift().is_some() {
                    Ok(Some(k))
                } else if periodic.as_shift().is_some() {
                    Ok(None)
                } else {
                    Err(Error::Incompatible(
                        "periodic permutation with a finite non-shift permutation".into(),
                    ))
                }
            }
        }
    }

    /// `(self ∘ other)(n) = self(other(n))`.
    pub fn compose(&self, other: &ZPerm) -> Result<ZPerm> {
        match self.common_period(other)? {
            Some(k) => ZPerm::periodic(k, (0..k).map(|r| self.eval(other.eval(r))).collect()),
            None => {
                let p = self.to_shift_finite()?;
                let q = other.to_shift_finite()?;
                let (Repr::ShiftFinite { shift: mp, exceptions: ep }, Repr::ShiftFinite { shift: mq, exceptions: eq }) =
                    (&p.0, &q.0)
                else {
                    unreachable!()
                };
                let q_inv = q.invert();
                let mut candidates: BTreeSet<i64> = eq.keys().copied().collect();
                candidates.extend(ep.keys().map(|&x| q_inv.eval(x)));
                let exceptions = candidates.into_iter().map(|n| (n, p.eval(q.eval(n)))).collect();
                ZPerm::shift_finite(mp + mq, exceptions)
            }
        }
    }

    /// Canonical description: minimal period, shifts as `ShiftFinite`.
    pub fn canonical(&self) -> ZPerm {
        if let Some(m) = self.as_shift() {
            return ZPerm::shift(m);
        }
        match self.minimal_period() {
            Some(p) => ZPerm(Repr::Periodic {
                period: p,
                values: (0..p).map(|r| self.eval(r)).collect(),
            }),
            None => self.clone(),
        }
    }

    /// `inv_k`: for `k ≥ 2` the number of inversions `(u, v)` with
    /// `0 ≤ v < k`; for `k = 0` the total number of inversions.
    pub fn inv_k(&self, k: i64) -> Result<InvCount> {
        match k {
            1 => Err(Error::PeriodOne),
            0 => {
                if self.period().is_some() {
                    return Ok(match self.as_shift() {
                        Some(_) => InvCount::Finite(0),
                        None => InvCount::Infinite,
                    });
                }
                let Some((lo, hi)) = self.exception_hull() else {
                    return Ok(InvCount::Finite(0));
                };
                let mut count = 0;
                for v in lo..=hi {
                    for u in lo..v {
                        if self.eval(u) > self.eval(v) {
                            count += 1;
                        }
                    }
                }
                Ok(InvCount::Finite(count))
            }
            k if k >= 2 => {
                if !self.in_group(k) {
                    return Err(Error::NotInGroup(k));
                }
                let reach = 2 * self.displacement() + 1;
                let mut count = 0;
                for v in 0..k {
                    let tv = self.eval(v);
                    count += ((v - reach)..v).filter(|&u| self.eval(u) > tv).count() as u64;
                }
                Ok(InvCount::Finite(count))
            }
            _ => Err(Error::NotInGroup(k)),
        }
    }

    /// Interval containing every inversion of a `ShiftFinite` permutation:
    /// every inversion has an endpoint among the exceptions, and the other
    /// endpoint lies between the exceptions and their shifted images.
    fn exception_hull(&self) -> Option<(i64, i64)> {
        let Repr::ShiftFinite { shift, exceptions } = &self.0 else {
            return None;
        };
        let pts: Vec<i64> = exceptions
            .iter()
            .flat_map(|(&n, &t)| [n, t + shift])
            .collect();
        Some((*pts.iter().min()?, *pts.iter().max()?))
    }

    /// Inversions `(u, v)` with `v` in `vs`, each listed once.
    pub fn inversions_ending_in(&self, vs: std::ops::Range<i64>) -> Vec<(i64, i64)> {
        let reach = 2 * self.displacement() + 1;
        let mut out = Vec::new();
        for v in vs {
            let tv = self.eval(v);
            let lo = match self.exception_hull() {
                Some((lo, _)) => lo.min(v - reach),
                None => v - reach,
            };
            out.extend((lo..v).filter(|&u| self.eval(u) > tv).map(|u| (u, v)));
        }
        out
    }

    /// `s_τ(a, b) = #{n ≥ b : τ(n) < a}`.
    pub fn s_value(&self, a: i64, b: i64) -> u64 {
        // τ(n) ≥ n - displacement, so only n ≤ a - 1 + displacement count
        let hi = a - 1 + self.displacement();
        (b..=hi).filter(|&n| self.eval(n) < a).count() as u64
    }

    /// `#{n < b : τ(n) > a}`.
    pub fn dual_s_value(&self, a: i64, b: i64) -> u64 {
        let lo = a + 1 - self.displacement();
        (lo..b).filter(|&n| self.eval(n) > a).count() as u64
    }

    /// Tabulates `s_τ` on `window`.
    pub fn s_function(&self, window: Window) -> SFunction {
        SFunction::from_fn(window, self.asymptotic_shift(), |a, b| self.s_value(a, b))
    }
}

impl PartialEq for ZPerm {
    fn eq(&self, other: &ZPerm) -> bool {
        match (self.period(), other.period()) {
            (None, None) => {
                let (Repr::ShiftFinite { shift: a, exceptions: ea }, Repr::ShiftFinite { shift: b, exceptions: eb }) =
                    (&self.0, &other.0)
                else {
                    unreachable!()
                };
                a == b && ea == eb
            }
            (Some(k1), Some(k2)) => {
                let l = k1 / gcd(k1, k2) * k2;
                (0..l).all(|n| self.eval(n) == other.eval(n))
            }
            _ => match (self.as_shift(), other.as_shift()) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
        }
    }
}

impl Eq for ZPerm {}

impl fmt::Display for ZPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Periodic { period, values } => write!(f, "periodic[{period}]{values:?}"),
            Repr::ShiftFinite { shift, exceptions } => {
                write!(f, "shift[{shift}]")?;
                if !exceptions.is_empty() {
                    write!(f, "{exceptions:?}")?;
                }
                Ok(())
            }
        }
    }
}
