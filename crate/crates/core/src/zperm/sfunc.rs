//! Windowed s-functions and their min-plus (tropical) product.

use serde::Serialize;

use super::ZPerm;
use crate::error::{Error, Result};

/// Inclusive rectangle `a ∈ [a.0, a.1]`, `b ∈ [b.0, b.1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub a: (i64, i64),
    pub b: (i64, i64),
}

impl Window {
    pub fn new(a: (i64, i64), b: (i64, i64)) -> Self {
        Window { a, b }
    }

    /// Square window `[lo, hi] × [lo, hi]`.
    pub fn square(lo: i64, hi: i64) -> Self {
        Window { a: (lo, hi), b: (lo, hi) }
    }

    pub fn points(self) -> impl Iterator<Item = (i64, i64)> {
        let (bl, bh) = self.b;
        (self.a.0..=self.a.1).flat_map(move |a| (bl..=bh).map(move |b| (a, b)))
    }

    fn cols(&self) -> usize {
        (self.b.1 - self.b.0 + 1).max(0) as usize
    }
}

/// A nonnegative integer function on a window, with asymptotic shift `m`:
/// far from the diagonal (`a - b` large) an s-function equals `a - b + m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SFunction {
    window: Window,
    shift: i64,
    values: Vec<u64>,
}

impl SFunction {
    pub fn from_fn(window: Window, shift: i64, mut f: impl FnMut(i64, i64) -> u64) -> Self {
        let values = window.points().map(|(a, b)| f(a, b)).collect();
        SFunction { window, shift, values }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn get(&self, a: i64, b: i64) -> Option<u64> {
        let w = &self.window;
        if a < w.a.0 || a > w.a.1 || b < w.b.0 || b > w.b.1 {
            return None;
        }
        let i = (a - w.a.0) as usize * w.cols() + (b - w.b.0) as usize;
        Some(self.values[i])
    }

    /// The closed-form tail `max(0, a - b + m)`.
    pub fn tail(&self, a: i64, b: i64) -> u64 {
        (a - b + self.shift).max(0) as u64
    }

    /// Nondecreasing in `a`, nonincreasing in `b`.
    pub fn is_monotone(&self) -> bool {
        let w = self.window;
        w.points().all(|(a, b)| {
            let x = self.get(a, b).unwrap();
            self.get(a + 1, b).is_none_or(|y| y >= x) && self.get(a, b + 1).is_none_or(|y| y <= x)
        })
    }

    /// Restriction to a sub-window.
    pub fn restrict(&self, window: Window) -> Option<SFunction> {
        let w = self.window;
        if window.a.0 < w.a.0 || window.a.1 > w.a.1 || window.b.0 < w.b.0 || window.b.1 > w.b.1 {
            return None;
        }
        Some(SFunction::from_fn(window, self.shift, |a, b| self.get(a, b).unwrap()))
    }

    /// Reads `τ(b)` off the mixed second difference
    /// `s(a+1,b) - s(a,b) - s(a+1,b+1) + s(a,b+1) = δ(τ(b) = a)`,
    /// if the window contains it.
    pub fn permutation_value(&self, b: i64) -> Option<i64> {
        let w = self.window;
        (w.a.0..w.a.1).find(|&a| {
            let (Some(x), Some(y), Some(z), Some(t)) =
                (self.get(a + 1, b), self.get(a, b), self.get(a + 1, b + 1), self.get(a, b + 1))
            else {
                return false;
            };
            x as i64 - y as i64 - z as i64 + t as i64 == 1
        })
    }
}

/// `(s1 ⋆ s2)(a, b) = min_ℓ s1(a, ℓ) + s2(ℓ, b)` over the overlap of `s1`'s
/// `b`-range with `s2`'s `a`-range; the result lives on `s1`'s `a`-range
/// times `s2`'s `b`-range with shift `m1 + m2`.
///
/// The minimum over all of ℤ is certified from monotonicity: `s2(ℓ_lo, b) = 0`
/// bounds every `ℓ < ℓ_lo` below by `ℓ_lo`, and `s1(a, ℓ_hi) = 0` does the
/// same for `ℓ > ℓ_hi`. A window failing either check is an error rather
/// than a silently truncated minimum.
pub fn tropical_star(s1: &SFunction, s2: &SFunction) -> Result<SFunction> {
    let lo = s1.window.b.0.max(s2.window.a.0);
    let hi = s1.window.b.1.min(s2.window.a.1);
    if lo > hi {
        return Err(Error::WindowMismatch);
    }
    let window = Window::new(s1.window.a, s2.window.b);
    for b in window.b.0..=window.b.1 {
        if s2.get(lo, b) != Some(0) {
            return Err(Error::WindowTooSmall { a: window.a.0, b });
        }
    }
    for a in window.a.0..=window.a.1 {
        if s1.get(a, hi) != Some(0) {
            return Err(Error::WindowTooSmall { a, b: window.b.1 });
        }
    }
    Ok(SFunction::from_fn(window, s1.shift + s2.shift, |a, b| {
        (lo..=hi)
            .map(|l| s1.get(a, l).unwrap() + s2.get(l, b).unwrap())
            .min()
            .unwrap()
    }))
}

/// Windows for `s_α` and `s_β` so that their product covers `target`.
///
/// A minimizing `ℓ` satisfies `β⁻¹(ℓ-1) < b ≤ β⁻¹(ℓ)`, so it lies within the
/// displacement of `β` from `b`; the edges below are chosen one step past
/// where `s_β(ℓ, b)` and `s_α(a, ℓ)` are forced to vanish.
pub fn star_windows(alpha: &ZPerm, beta: &ZPerm, target: Window) -> (Window, Window) {
    let l_lo = target.b.0 - beta.displacement() - 1;
    let l_hi = target.a.1 + alpha.displacement() + 1;
    (
        Window::new(target.a, (l_lo, l_hi)),
        Window::new((l_lo, l_hi), target.b),
    )
}
