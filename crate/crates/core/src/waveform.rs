//! Finite trigonometric sums of the form Σ aᵢ sin ωᵢ(t + γᵢ) together with
//! the branch bookkeeping (fold points, monotone-interval root solving) the
//! singular integrators rely on.

use crate::quad::bisect;
use crate::Real;

#[derive(Clone, Copy, Debug)]
pub struct Term<F> {
    pub omega: F,
    pub amp: F,
    pub phase: F,
}

/// w(t) = Σ amp·sin(omega·(t + phase)); derivatives are exact.
#[derive(Clone, Debug)]
pub struct Waveform<F> {
    terms: Vec<Term<F>>,
    max_harmonic: u32,
}

impl<F: Real> Waveform<F> {
    pub fn empty() -> Self {
        Waveform {
            terms: Vec::new(),
            max_harmonic: 0,
        }
    }

    /// Zero-amplitude terms are dropped so `is_zero` is exact.
    pub fn push(&mut self, harmonic: u32, amp: F, phase: F) {
        if amp == F::zero() {
            return;
        }
        self.terms.push(Term {
            omega: F::of(harmonic as f64),
            amp,
            phase,
        });
        self.max_harmonic = self.max_harmonic.max(harmonic);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term<F>] {
        &self.terms
    }

    pub fn max_harmonic(&self) -> u32 {
        self.max_harmonic
    }

    pub fn value(&self, t: F) -> F {
        self.terms.iter().fold(F::zero(), |acc, tm| {
            acc + tm.amp * (tm.omega * (t + tm.phase)).sin()
        })
    }

    pub fn d1(&self, t: F) -> F {
        self.terms.iter().fold(F::zero(), |acc, tm| {
            acc + tm.amp * tm.omega * (tm.omega * (t + tm.phase)).cos()
        })
    }

    pub fn d2(&self, t: F) -> F {
        self.terms.iter().fold(F::zero(), |acc, tm| {
            acc - tm.amp * tm.omega * tm.omega * (tm.omega * (t + tm.phase)).sin()
        })
    }

    /// Critical points of w in [0, 2π), sorted ascending. Between two
    /// consecutive folds (cyclically) the waveform is strictly monotone.
    pub fn folds(&self) -> Vec<F> {
        self.roots_of(|w, t| w.d1(t))
    }

    /// Zeros of w itself in [0, 2π), sorted ascending.
    pub fn zeros(&self) -> Vec<F> {
        self.roots_of(|w, t| w.value(t))
    }

    fn roots_of(&self, f: impl Fn(&Self, F) -> F + Copy) -> Vec<F> {
        let two_pi = F::PI() + F::PI();
        let n = 64 * self.max_harmonic.max(1) as usize;
        let h = two_pi / F::of(n as f64);
        let mut out = Vec::new();
        let mut prev_t = F::zero();
        let mut prev_f = f(self, prev_t);
        for i in 1..=n {
            let t = h * F::of(i as f64);
            let ft = f(self, t);
            if prev_f == F::zero() {
                out.push(prev_t);
            } else if (prev_f > F::zero()) != (ft > F::zero()) && ft != F::zero() {
                if let Some(r) = bisect(|x| f(self, x), prev_t, t) {
                    out.push(r);
                }
            }
            prev_t = t;
            prev_f = ft;
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < F::of(1e-12));
        out
    }

    /// Solves w(t) = target on [a, b] where w is monotone; `None` when the
    /// target lies outside the range.
    pub fn solve_monotone(&self, target: F, a: F, b: F) -> Option<F> {
        bisect(|t| self.value(t) - target, a, b)
    }
}
