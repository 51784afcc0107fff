//! Reduced words and the Demazure (0-Hecke) product by generator folding.

use super::ZPerm;
use crate::error::{Error, Result};

/// `β = ι_shift · σ_{letters[0]} · σ_{letters[1]} ⋯` with `letters.len() = inv_k(β)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedWord {
    /// Period of the reflections; 0 for finitely many inversions.
    pub period: i64,
    pub shift: i64,
    pub letters: Vec<i64>,
}

/// Bubble-sorts `beta` by right multiplication with simple reflections,
/// always taking the leftmost descent, until a shift remains.
///
/// For `period ≥ 2` descents are searched in `0..period` and `beta` must lie
/// in that group; for `period = 0`, `beta` must have finitely many inversions.
pub fn reduced_word(beta: &ZPerm, period: i64) -> Result<ReducedWord> {
    let mut cur = match period {
        0 => beta.to_shift_finite()?,
        1 => return Err(Error::PeriodOne),
        k => beta.with_period(k)?,
    };
    let expected = beta.inv_k(period)?.finite().ok_or(Error::NotInGroup(period))?;
    let mut removed = Vec::new();
    loop {
        let span = match period {
            0 => match cur.exception_hull() {
                Some((lo, hi)) => (lo - 1)..hi + 1,
                None => 0..0,
            },
            k => 0..k,
        };
        let Some(j) = span.into_iter().find(|&j| cur.eval(j) > cur.eval(j + 1)) else {
            break;
        };
        cur = cur.compose(&ZPerm::simple_reflection(period, j)?)?;
        removed.push(j);
    }
    let shift = cur
        .as_shift()
        .expect("a permutation without descents is a shift");
    assert_eq!(
        removed.len() as u64,
        expected,
        "reduced word length must equal the inversion count"
    );
    removed.reverse();
    Ok(ReducedWord {
        period,
        shift,
        letters: removed,
    })
}

/// Demazure product `α ⋆ β`, folded over a reduced word of `β`:
/// `α ⋆ ι_m = α ι_m`, and `α ⋆ σ_j` is `α σ_j` when `α(j) < α(j+1)`,
/// otherwise `α`.
pub fn demazure(alpha: &ZPerm, beta: &ZPerm) -> Result<ZPerm> {
    if beta.as_shift().is_some() {
        return alpha.compose(beta);
    }
    let period = match (alpha.period(), beta.period()) {
        (_, Some(_)) => {
            // β periodic and not a shift: α must share the group
            let common = alpha.common_period(beta)?;
            common.ok_or_else(|| Error::Incompatible("mixed representations".into()))?
        }
        (Some(_), None) => {
            if alpha.as_shift().is_none() {
                return Err(Error::Incompatible(
                    "periodic permutation with a finite non-shift permutation".into(),
                ));
            }
            0
        }
        (None, None) => 0,
    };
    let word = reduced_word(beta, period)?;
    let mut acc = alpha.compose(&ZPerm::shift(word.shift))?;
    if period > 0 {
        acc = acc.with_period(period)?;
    } else {
        acc = acc.to_shift_finite()?;
    }
    for &j in &word.letters {
        if acc.eval(j) < acc.eval(j + 1) {
            acc = acc.compose(&ZPerm::simple_reflection(period, j)?)?;
        }
    }
    Ok(acc)
}
