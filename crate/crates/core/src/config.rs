//! String configurations: parsing/validation, the transverse embedding in
//! light-cone gauge, exact derivatives, and the light-cone constraint checks
//! (wave equation, level matching through the periodicity of X⁻).

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::quad::composite_gl8;
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chirality {
    /// Depends on τ − σ.
    Right,
    /// Depends on τ + σ.
    Left,
}

/// One oscillation mode of the closed string.
#[derive(Clone, Debug)]
pub struct ModeSpec<F> {
    /// Transverse index I ∈ {2, …, D−1}.
    pub direction: usize,
    /// Harmonic index k ≥ 1; the frequency is ω_k = k.
    pub harmonic: u32,
    /// Amplitude r ≥ 0 (dimensionless).
    pub amplitude: F,
    /// Phase γ in radians.
    pub phase: F,
    pub chirality: Chirality,
}

impl<F: Real> ModeSpec<F> {
    pub fn omega(&self) -> F {
        F::of(self.harmonic as f64)
    }
}

/// Full physical setup of a closed string on a flat background.
///
/// Only closed strings (σ ∈ [0, 2π], periodic) are representable.
#[derive(Clone, Debug)]
pub struct StringConfiguration<F> {
    pub dimension: usize,
    pub alpha_prime: F,
    pub p_plus: F,
    /// Zero modes α₀^I per transverse direction (absent ⇒ 0).
    pub zero_modes: BTreeMap<usize, F>,
    /// Centers x₀^I per transverse direction (absent ⇒ 0).
    pub centers: BTreeMap<usize, F>,
    pub modes: Vec<ModeSpec<F>>,
}

/// Exact partial derivatives of the embedding, one entry per transverse
/// direction (index 0 ↔ direction 2).
#[derive(Clone, Debug)]
pub struct EmbeddingDerivatives<F> {
    pub d_tau: Vec<F>,
    pub d_sigma: Vec<F>,
    pub d_tau2: Vec<F>,
    pub d_sigma2: Vec<F>,
    pub d_tau_sigma: Vec<F>,
}

/// Aggregated constraint diagnostics for a configuration.
#[derive(Clone, Debug)]
pub struct ConstraintReport<F> {
    pub wave_residual_max: F,
    pub level_match_residual: F,
    /// (τ, σ, wave-residual vector) samples backing `wave_residual_max`.
    pub samples: Vec<(F, F, Vec<F>)>,
    pub level_matched: bool,
}

/// Absolute level-matching tolerance for unit-scale amplitudes.
pub const LEVEL_MATCH_TOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// parsing

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry<F> {
    direction: usize,
    value: F,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "F: serde::Deserialize<'de>"))]
struct RawMode<F> {
    direction: usize,
    harmonic: i64,
    amplitude: F,
    #[serde(default)]
    phase: Option<F>,
    chirality: Chirality,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "F: serde::Deserialize<'de>"))]
struct RawConfig<F> {
    #[serde(default)]
    dimension: Option<usize>,
    #[serde(default)]
    alpha_prime: Option<F>,
    #[serde(default)]
    p_plus: Option<F>,
    #[serde(default)]
    zero_modes: Vec<RawEntry<F>>,
    #[serde(default)]
    centers: Vec<RawEntry<F>>,
    #[serde(default)]
    modes: Vec<RawMode<F>>,
}

/// Parses a TOML configuration document.
///
/// Defaults: `dimension = 4`, `alpha_prime = 1/2` (so the mode prefactor
/// √(2α′) is exactly 1), `p_plus = 1`.
pub fn parse_configuration<F: Real + DeserializeOwned>(text: &str) -> Result<StringConfiguration<F>> {
    let raw: RawConfig<F> = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut modes = Vec::with_capacity(raw.modes.len());
    for m in raw.modes {
        if m.harmonic < 1 {
            return Err(Error::Invariant(format!(
                "harmonic must be ≥ 1, got {}",
                m.harmonic
            )));
        }
        modes.push(ModeSpec {
            direction: m.direction,
            harmonic: m.harmonic as u32,
            amplitude: m.amplitude,
            phase: m.phase.unwrap_or_else(F::zero),
            chirality: m.chirality,
        });
    }
    StringConfiguration::new(
        raw.dimension.unwrap_or(4),
        raw.alpha_prime.unwrap_or_else(|| F::of(0.5)),
        raw.p_plus.unwrap_or_else(F::one),
        raw.zero_modes.into_iter().map(|e| (e.direction, e.value)).collect(),
        raw.centers.into_iter().map(|e| (e.direction, e.value)).collect(),
        modes,
    )
}

// ---------------------------------------------------------------------------

impl<F: Real> StringConfiguration<F> {
    pub fn new(
        dimension: usize,
        alpha_prime: F,
        p_plus: F,
        zero_modes: BTreeMap<usize, F>,
        centers: BTreeMap<usize, F>,
        modes: Vec<ModeSpec<F>>,
    ) -> Result<Self> {
        let cfg = StringConfiguration {
            dimension,
            alpha_prime,
            p_plus,
            zero_modes,
            centers,
            modes,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.dimension < 4 {
            return Err(Error::Invariant(format!(
                "dimension must be ≥ 4, got {}",
                self.dimension
            )));
        }
        if !(self.alpha_prime > F::zero()) {
            return Err(Error::Invariant("alpha_prime must be positive".into()));
        }
        if !(self.p_plus > F::zero()) {
            return Err(Error::Invariant("p_plus must be positive".into()));
        }
        let in_range = |d: usize| d >= 2 && d < self.dimension;
        for d in self.zero_modes.keys().chain(self.centers.keys()) {
            if !in_range(*d) {
                return Err(Error::Invariant(format!(
                    "direction {} outside transverse range 2..{}",
                    d, self.dimension
                )));
            }
        }
        let mut keys = Vec::new();
        for m in &self.modes {
            if !in_range(m.direction) {
                return Err(Error::Invariant(format!(
                    "mode direction {} outside transverse range 2..{}",
                    m.direction, self.dimension
                )));
            }
            if m.harmonic < 1 {
                return Err(Error::Invariant("mode harmonic must be ≥ 1".into()));
            }
            if !(m.amplitude >= F::zero()) {
                return Err(Error::Invariant("mode amplitude must be ≥ 0".into()));
            }
            let key = (m.direction, m.harmonic, m.chirality);
            if keys.contains(&key) {
                return Err(Error::Invariant(format!(
                    "duplicate mode (direction {}, harmonic {}, {:?})",
                    m.direction, m.harmonic, m.chirality
                )));
            }
            keys.push(key);
        }
        Ok(())
    }

    /// Transverse direction indices, 2..D.
    pub fn transverse(&self) -> std::ops::Range<usize> {
        2..self.dimension
    }

    pub fn sqrt_two_alpha_prime(&self) -> F {
        (self.alpha_prime + self.alpha_prime).sqrt()
    }

    pub fn max_harmonic(&self) -> u32 {
        self.modes.iter().map(|m| m.harmonic).max().unwrap_or(1)
    }

    /// Σ ω r² over all modes — the natural power scale of the configuration.
    pub fn mode_power(&self) -> F {
        self.modes
            .iter()
            .fold(F::zero(), |acc, m| acc + m.omega() * m.amplitude * m.amplitude)
    }

    fn zero_mode(&self, dir: usize) -> F {
        self.zero_modes.get(&dir).copied().unwrap_or_else(F::zero)
    }

    fn center(&self, dir: usize) -> F {
        self.centers.get(&dir).copied().unwrap_or_else(F::zero)
    }

    /// Phase argument of one mode: ω(τ − σ + γ) for right movers,
    /// ω(τ + σ + γ) for left movers.
    fn mode_arg(m: &ModeSpec<F>, tau: F, sigma: F) -> F {
        let t = match m.chirality {
            Chirality::Right => tau - sigma + m.phase,
            Chirality::Left => tau + sigma + m.phase,
        };
        m.omega() * t
    }

    /// Transverse embedding X^I(τ,σ), indexed by I − 2.
    ///
    /// X^I = x₀^I + √(2α′) α₀^I τ + √(2α′) Σ (r/√ω) cos ω(τ∓σ+γ).
    pub fn embedding(&self, tau: F, sigma: F) -> Vec<F> {
        let pref = self.sqrt_two_alpha_prime();
        let mut out: Vec<F> = self
            .transverse()
            .map(|d| self.center(d) + pref * self.zero_mode(d) * tau)
            .collect();
        for m in &self.modes {
            let arg = Self::mode_arg(m, tau, sigma);
            out[m.direction - 2] =
                out[m.direction - 2] + pref * m.amplitude / m.omega().sqrt() * arg.cos();
        }
        out
    }

    /// All first and second partials of the embedding, in closed form.
    pub fn embedding_derivatives(&self, tau: F, sigma: F) -> EmbeddingDerivatives<F> {
        let n = self.dimension - 2;
        let pref = self.sqrt_two_alpha_prime();
        let mut d = EmbeddingDerivatives {
            d_tau: self.transverse().map(|i| pref * self.zero_mode(i)).collect(),
            d_sigma: vec![F::zero(); n],
            d_tau2: vec![F::zero(); n],
            d_sigma2: vec![F::zero(); n],
            d_tau_sigma: vec![F::zero(); n],
        };
        for m in &self.modes {
            let i = m.direction - 2;
            let w = m.omega();
            let sw = w.sqrt();
            let arg = Self::mode_arg(m, tau, sigma);
            // σ-sign of the argument: −1 for Right, +1 for Left
            let s = match m.chirality {
                Chirality::Right => -F::one(),
                Chirality::Left => F::one(),
            };
            let a_sin = pref * m.amplitude * sw * arg.sin();
            let a_cos = pref * m.amplitude * w * sw * arg.cos();
            d.d_tau[i] = d.d_tau[i] - a_sin;
            d.d_sigma[i] = d.d_sigma[i] - s * a_sin;
            d.d_tau2[i] = d.d_tau2[i] - a_cos;
            d.d_sigma2[i] = d.d_sigma2[i] - a_cos; // s² = 1
            d.d_tau_sigma[i] = d.d_tau_sigma[i] - s * a_cos;
        }
        d
    }

    /// Residual of the flat wave equation, (−∂²_τ + ∂²_σ) X^I.
    pub fn wave_residual(&self, tau: F, sigma: F) -> Vec<F> {
        let d = self.embedding_derivatives(tau, sigma);
        d.d_tau2
            .iter()
            .zip(d.d_sigma2.iter())
            .map(|(&tt, &ss)| ss - tt)
            .collect()
    }

    /// (∂_τ X⁻, ∂_σ X⁻) from the light-cone constraints.
    pub fn x_minus_derivatives(&self, tau: F, sigma: F) -> (F, F) {
        let d = self.embedding_derivatives(tau, sigma);
        let mut tt = F::zero();
        let mut ss = F::zero();
        let mut ts = F::zero();
        for i in 0..d.d_tau.len() {
            tt = tt + d.d_tau[i] * d.d_tau[i];
            ss = ss + d.d_sigma[i] * d.d_sigma[i];
            ts = ts + d.d_tau[i] * d.d_sigma[i];
        }
        let ap = self.alpha_prime * self.p_plus;
        let half = F::of(0.5);
        ((tt + ss) * half / ap, ts / ap)
    }

    /// |∮ ∂_σX⁻ dσ|: the level-matching residual. Nonzero values flag a
    /// configuration whose X⁻ is not single-valued on the closed string.
    ///
    /// Evaluated at τ ∈ {0, 1, 2.5}; the maximum is returned (the value is
    /// τ-independent for valid solutions, which the spread confirms).
    pub fn level_match_residual(&self) -> F {
        let two_pi = F::PI() + F::PI();
        let panels = 8 * self.max_harmonic() as usize;
        let mut worst = F::zero();
        for tau in [F::zero(), F::one(), F::of(2.5)] {
            let v = composite_gl8(
                |sigma| self.x_minus_derivatives(tau, sigma).1,
                F::zero(),
                two_pi,
                panels,
            )
            .abs();
            worst = worst.max(v);
        }
        worst
    }

    /// Constraint diagnostics over a deterministic (τ, σ) grid.
    pub fn check(&self, grid: usize) -> ConstraintReport<F> {
        let grid = grid.max(2);
        let two_pi = F::PI() + F::PI();
        let mut samples = Vec::new();
        let mut worst = F::zero();
        for i in 0..grid {
            for j in 0..grid {
                let tau = two_pi * F::of(i as f64) / F::of(grid as f64);
                let sigma = two_pi * F::of(j as f64) / F::of(grid as f64);
                let res = self.wave_residual(tau, sigma);
                for r in &res {
                    worst = worst.max(r.abs());
                }
                samples.push((tau, sigma, res));
            }
        }
        let lm = self.level_match_residual();
        let scale = F::one().max(self.mode_power());
        ConstraintReport {
            wave_residual_max: worst,
            level_match_residual: lm,
            samples,
            level_matched: lm <= F::of(LEVEL_MATCH_TOL) * scale,
        }
    }
}
