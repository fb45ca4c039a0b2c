//! Worldsheet Hamiltonian and its topologically discretized spectrum.

use crate::config::StringConfiguration;
use crate::quad::composite_gl8;
use crate::spectra::{omega_kl, Branch};
use crate::{Error, Real, Result};

/// Discretized energies H_n together with the zero-point value and the
/// large-|n| asymptote H∞ = H₀ + 2ω_k r_k².
#[derive(Clone, Debug)]
pub struct EnergySpectrum<F> {
    pub h0: F,
    /// (n, H_n), sorted by n; n = 0 is never listed (degenerate spectrum).
    pub entries: Vec<(i64, F)>,
    pub h_inf: F,
    pub branch: Branch,
}

/// Closed-form Hamiltonian: H = Σ_K (α₀^K)² + Σ modes ω r²
/// (dimensionless convention; α′ only rescales the embedding, not H).
pub fn hamiltonian<F: Real>(cfg: &StringConfiguration<F>) -> F {
    let h0: F = cfg
        .zero_modes
        .values()
        .fold(F::zero(), |acc, &a| acc + a * a);
    h0 + cfg.mode_power()
}

/// The same Hamiltonian evaluated by quadrature of the light-cone density
/// (1/4πα′) ∮ (∂_τX·∂_τX + ∂_σX·∂_σX) dσ — an independent cross-check for
/// [`hamiltonian`]. τ-independent; evaluated at τ = 0.
pub fn hamiltonian_quadrature<F: Real>(cfg: &StringConfiguration<F>) -> F {
    let two_pi = F::PI() + F::PI();
    let panels = 8 * cfg.max_harmonic() as usize;
    let integral = composite_gl8(
        |sigma| {
            let d = cfg.embedding_derivatives(F::zero(), sigma);
            d.d_tau
                .iter()
                .zip(d.d_sigma.iter())
                .fold(F::zero(), |acc, (&t, &s)| acc + t * t + s * s)
        },
        F::zero(),
        two_pi,
        panels,
    );
    integral / (F::of(4.0) * F::PI() * cfg.alpha_prime)
}

/// H_n of the two-parallel family at characteristic number n:
/// H_n = H₀ + ω_k r_k² [1 + ((1∓E)/(1±E))²], E = e^{|n|/2ω_{kl}}.
///
/// `Branch::Smaller` (√ω_l r̃_l < √ω_k r_k) takes the upper signs and
/// approaches H∞ from below; `Branch::Greater` from above.
pub fn hamiltonian_discrete<F: Real>(
    omega_k: F,
    omega_l: F,
    r_k: F,
    h0: F,
    n: i64,
    branch: Branch,
) -> Result<F> {
    if n == 0 {
        return Err(Error::DegenerateAmplitude(
            "n = 0: discrete Hamiltonian undefined".into(),
        ));
    }
    let e = (F::of(n.unsigned_abs() as f64) / (F::of(2.0) * omega_kl(omega_k, omega_l))).exp();
    let ratio = match branch {
        Branch::Smaller => (F::one() - e) / (F::one() + e),
        Branch::Greater => (F::one() + e) / (F::one() - e),
    };
    Ok(h0 + omega_k * r_k * r_k * (F::one() + ratio * ratio))
}

/// Tabulates H_n over `n_range` (0 skipped) on one branch.
pub fn energy_table<F: Real>(
    omega_k: F,
    omega_l: F,
    r_k: F,
    h0: F,
    n_range: impl IntoIterator<Item = i64>,
    branch: Branch,
) -> EnergySpectrum<F> {
    let mut entries: Vec<(i64, F)> = n_range
        .into_iter()
        .filter(|&n| n != 0)
        .filter_map(|n| {
            hamiltonian_discrete(omega_k, omega_l, r_k, h0, n, branch)
                .ok()
                .map(|h| (n, h))
        })
        .collect();
    entries.sort_by_key(|&(n, _)| n);
    entries.dedup_by_key(|&mut (n, _)| n);
    EnergySpectrum {
        h0,
        entries,
        h_inf: h0 + F::of(2.0) * omega_k * r_k * r_k,
        branch,
    }
}
