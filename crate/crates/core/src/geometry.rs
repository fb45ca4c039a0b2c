//! Induced-metric geometry of the string worldsheet: the conformal factor
//! g_σσ with exact derivatives, the Euler-class density, the spin connection
//! of the orthonormal coframe, null-patch charts, and singular-locus
//! detection.
//!
//! Internally everything is organized around the null coordinates
//! u = τ − σ, v = τ + σ: per transverse direction I the σ-derivative of the
//! embedding splits as √(2α′)(ρ_I(u) − λ_I(v)) with ρ_I, λ_I finite sine
//! sums, so g_σσ = 2α′ Σ_I (ρ_I(u) − λ_I(v))².

use crate::config::{Chirality, StringConfiguration};
use crate::waveform::Waveform;
use crate::{Error, Real, Result};

/// Right-/left-mover sine sums of one transverse direction.
#[derive(Clone, Debug)]
pub(crate) struct DirectionWaves<F> {
    pub rho: Waveform<F>,
    pub lam: Waveform<F>,
}

/// g_σσ(τ,σ) and its partial derivatives up to second order, all exact.
#[derive(Clone, Debug)]
pub struct ConformalFactorField<F> {
    cfg: StringConfiguration<F>,
    pub(crate) directions: Vec<DirectionWaves<F>>,
    two_alpha_prime: F,
    singular_tolerance: F,
}

/// Algebraic shape of g_σσ, used to pick integration strategies and to
/// enumerate the singular locus.
#[derive(Clone, Debug)]
pub(crate) enum Structure<F> {
    /// g_σσ ≡ 0 (no modes with nonzero amplitude).
    Degenerate,
    /// Only right movers or only left movers: g_σσ depends on one null
    /// coordinate, the Euler density vanishes identically where defined.
    SingleChirality,
    /// Exactly one effective direction: g_σσ = 2α′ (ρ(u) − λ(v))².
    Curves { rho: Waveform<F>, lam: Waveform<F> },
    /// Several directions, all right movers sharing one harmonic/phase and
    /// all left movers sharing another: with x = sin ω_k(u+γ),
    /// y = sin ω_l(v+γ̃), g_σσ = 2α′ (P x² − 2Q xy + S y²), Q² < PS.
    CommonShape {
        p: F,
        q: F,
        s: F,
        k: u32,
        l: u32,
        gamma: F,
        gamma_t: F,
    },
    Unsupported(String),
}

impl<F: Real> ConformalFactorField<F> {
    pub fn configuration(&self) -> &StringConfiguration<F> {
        &self.cfg
    }

    pub fn singular_tolerance(&self) -> F {
        self.singular_tolerance
    }

    fn s_parts(&self, tau: F, sigma: F) -> impl Iterator<Item = (F, F, F, F, F, F)> + '_ {
        let u = tau - sigma;
        let v = tau + sigma;
        self.directions.iter().map(move |d| {
            (
                d.rho.value(u),
                d.lam.value(v),
                d.rho.d1(u),
                d.lam.d1(v),
                d.rho.d2(u),
                d.lam.d2(v),
            )
        })
    }

    /// g_σσ = Σ_I (∂_σ X^I)².
    pub fn value(&self, tau: F, sigma: F) -> F {
        let g = self.s_parts(tau, sigma).fold(F::zero(), |acc, (r, l, ..)| {
            let s = r - l;
            acc + s * s
        });
        self.two_alpha_prime * g
    }

    pub fn d_tau(&self, tau: F, sigma: F) -> F {
        let two = F::of(2.0);
        let g = self
            .s_parts(tau, sigma)
            .fold(F::zero(), |acc, (r, l, rp, lp, ..)| {
                acc + two * (r - l) * (rp - lp)
            });
        self.two_alpha_prime * g
    }

    pub fn d_sigma(&self, tau: F, sigma: F) -> F {
        let two = F::of(2.0);
        let g = self
            .s_parts(tau, sigma)
            .fold(F::zero(), |acc, (r, l, rp, lp, ..)| {
                acc - two * (r - l) * (rp + lp)
            });
        self.two_alpha_prime * g
    }

    pub fn d2_tau(&self, tau: F, sigma: F) -> F {
        let two = F::of(2.0);
        let g = self
            .s_parts(tau, sigma)
            .fold(F::zero(), |acc, (r, l, rp, lp, rpp, lpp)| {
                let sp = rp - lp;
                acc + two * (sp * sp + (r - l) * (rpp - lpp))
            });
        self.two_alpha_prime * g
    }

    pub fn d2_sigma(&self, tau: F, sigma: F) -> F {
        let two = F::of(2.0);
        let g = self
            .s_parts(tau, sigma)
            .fold(F::zero(), |acc, (r, l, rp, lp, rpp, lpp)| {
                let sp = rp + lp;
                acc + two * (sp * sp + (r - l) * (rpp - lpp))
            });
        self.two_alpha_prime * g
    }

    fn guard_singular(&self, tau: F, sigma: F) -> Result<F> {
        let g = self.value(tau, sigma);
        if g <= self.singular_tolerance {
            return Err(Error::SingularPoint {
                tau: tau.to_f64().unwrap_or(f64::NAN),
                sigma: sigma.to_f64().unwrap_or(f64::NAN),
                value: g.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(g)
    }

    /// Euler-class density (coefficient of dτ∧dσ):
    /// e = −(1/4π) [(g g_ττ − g_τ²) − (g g_σσ − g_σ²)] / g² with g ≡ g_σσ.
    pub fn euler_density(&self, tau: F, sigma: F) -> Result<F> {
        let g = self.guard_singular(tau, sigma)?;
        let gt = self.d_tau(tau, sigma);
        let gs = self.d_sigma(tau, sigma);
        let gtt = self.d2_tau(tau, sigma);
        let gss = self.d2_sigma(tau, sigma);
        let num = (g * gtt - gt * gt) - (g * gss - gs * gs);
        let four_pi = F::of(4.0) * F::PI();
        Ok(-num / (four_pi * g * g))
    }

    /// Spin connection ω¹₂ of the orthonormal coframe of g_σσ(−dτ²+dσ²):
    /// returns (ω_τ, ω_σ) = (g_σ/2g, g_τ/2g); its curl is −2π·euler_density.
    pub fn spin_connection(&self, tau: F, sigma: F) -> Result<(F, F)> {
        let g = self.guard_singular(tau, sigma)?;
        let two_g = g + g;
        Ok((
            self.d_sigma(tau, sigma) / two_g,
            self.d_tau(tau, sigma) / two_g,
        ))
    }

    pub(crate) fn structure(&self) -> Structure<F> {
        let active: Vec<&DirectionWaves<F>> = self
            .directions
            .iter()
            .filter(|d| !d.rho.is_zero() || !d.lam.is_zero())
            .collect();
        if active.is_empty() {
            return Structure::Degenerate;
        }
        let any_rho = active.iter().any(|d| !d.rho.is_zero());
        let any_lam = active.iter().any(|d| !d.lam.is_zero());
        if !any_rho || !any_lam {
            return Structure::SingleChirality;
        }
        if active.len() == 1 {
            return Structure::Curves {
                rho: active[0].rho.clone(),
                lam: active[0].lam.clone(),
            };
        }
        // several directions: demand one shared harmonic/phase per chirality
        let coeff = |w: &Waveform<F>, k: u32, gamma: F, label: &str| -> Result<F> {
            if w.is_zero() {
                return Ok(F::zero());
            }
            if w.terms().len() > 1 {
                return Err(Error::UnsupportedShape(format!(
                    "several {label} harmonics in one direction"
                )));
            }
            let t = w.terms()[0];
            if t.omega != F::of(k as f64) {
                return Err(Error::UnsupportedShape(format!(
                    "{label} harmonics differ across directions"
                )));
            }
            // sin ω(t+γ′) must be ±sin ω(t+γ)
            let c = (t.omega * (t.phase - gamma)).cos();
            if (c.abs() - F::one()).abs() > F::of(1e-12) {
                return Err(Error::UnsupportedShape(format!(
                    "{label} phases differ across directions"
                )));
            }
            Ok(t.amp * c.signum())
        };
        let first_rho = active.iter().find(|d| !d.rho.is_zero()).unwrap();
        let first_lam = active.iter().find(|d| !d.lam.is_zero()).unwrap();
        if first_rho.rho.terms().len() > 1 || first_lam.lam.terms().len() > 1 {
            return Structure::Unsupported("several harmonics per chirality".into());
        }
        let rt = first_rho.rho.terms()[0];
        let lt = first_lam.lam.terms()[0];
        let k = first_rho.rho.max_harmonic();
        let l = first_lam.lam.max_harmonic();
        let (gamma, gamma_t) = (rt.phase, lt.phase);
        let mut p = F::zero();
        let mut q = F::zero();
        let mut s = F::zero();
        for d in &active {
            let a = match coeff(&d.rho, k, gamma, "right") {
                Ok(a) => a,
                Err(e) => return Structure::Unsupported(e.to_string()),
            };
            let b = match coeff(&d.lam, l, gamma_t, "left") {
                Ok(b) => b,
                Err(e) => return Structure::Unsupported(e.to_string()),
            };
            p = p + a * a;
            q = q + a * b;
            s = s + b * b;
        }
        if q * q >= p * s * (F::one() - F::of(1e-12)) {
            // rank-one quadratic form: same geometry as a single direction
            let mut rho = Waveform::empty();
            rho.push(k, p.sqrt(), gamma);
            let mut lam = Waveform::empty();
            lam.push(l, q.signum() * s.sqrt(), gamma_t);
            return Structure::Curves { rho, lam };
        }
        Structure::CommonShape {
            p,
            q,
            s,
            k,
            l,
            gamma,
            gamma_t,
        }
    }
}

/// Builds the conformal-factor field of a configuration.
pub fn conformal_factor<F: Real>(cfg: &StringConfiguration<F>) -> ConformalFactorField<F> {
    let mut directions: Vec<DirectionWaves<F>> = cfg
        .transverse()
        .map(|_| DirectionWaves {
            rho: Waveform::empty(),
            lam: Waveform::empty(),
        })
        .collect();
    for m in &cfg.modes {
        let amp = m.omega().sqrt() * m.amplitude;
        let dw = &mut directions[m.direction - 2];
        match m.chirality {
            Chirality::Right => dw.rho.push(m.harmonic, amp, m.phase),
            Chirality::Left => dw.lam.push(m.harmonic, amp, m.phase),
        }
    }
    let two_alpha_prime = cfg.alpha_prime + cfg.alpha_prime;
    let singular_tolerance = F::of(1e-12) * two_alpha_prime * cfg.mode_power();
    ConformalFactorField {
        cfg: cfg.clone(),
        directions,
        two_alpha_prime,
        singular_tolerance,
    }
}

/// g_σσ evaluated as an explicit double sum over mode pairs — an independent
/// formula used to cross-check [`ConformalFactorField::value`].
pub fn conformal_factor_series<F: Real>(cfg: &StringConfiguration<F>, tau: F, sigma: F) -> F {
    let mut total = F::zero();
    let chi = |c: Chirality| match c {
        Chirality::Right => F::one(),
        Chirality::Left => -F::one(),
    };
    for m in &cfg.modes {
        for m2 in &cfg.modes {
            if m.direction != m2.direction {
                continue;
            }
            let arg = |mm: &crate::config::ModeSpec<F>| {
                let t = match mm.chirality {
                    Chirality::Right => tau - sigma + mm.phase,
                    Chirality::Left => tau + sigma + mm.phase,
                };
                mm.omega() * t
            };
            total = total
                + chi(m.chirality)
                    * chi(m2.chirality)
                    * (m.omega() * m2.omega()).sqrt()
                    * m.amplitude
                    * m2.amplitude
                    * arg(m).sin()
                    * arg(m2).sin();
        }
    }
    (cfg.alpha_prime + cfg.alpha_prime) * total
}

// ---------------------------------------------------------------------------
// null patches

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchKind {
    I,
    II,
    III,
    IV,
}

impl PatchKind {
    pub const ALL: [PatchKind; 4] = [PatchKind::I, PatchKind::II, PatchKind::III, PatchKind::IV];

    /// Signs (s_x, s_y) of the chart x = s_x sin ω_k(τ−σ+γ), y = s_y sin ω_l(τ+σ+γ̃).
    pub fn signs(self) -> (f64, f64) {
        match self {
            PatchKind::I => (1.0, 1.0),
            PatchKind::II => (1.0, -1.0),
            PatchKind::III => (-1.0, 1.0),
            PatchKind::IV => (-1.0, -1.0),
        }
    }

    /// Orientation weight of the patch in the characteristic-number sum.
    pub fn weight(self) -> f64 {
        match self {
            PatchKind::I | PatchKind::IV => 1.0,
            PatchKind::II | PatchKind::III => -1.0,
        }
    }
}

/// One null-coordinate chart of the two-mode families.
#[derive(Clone, Debug)]
pub struct NullPatch<F> {
    pub kind: PatchKind,
    /// (k, l): right and left harmonics.
    pub harmonics: (u32, u32),
    /// (γ, γ̃): right and left phases.
    pub phases: (F, F),
    pub directions: Vec<usize>,
    /// Number of cells of this kind tiling one fundamental domain.
    pub multiplicity: u32,
}

/// Two-mode family the patch charts are defined for.
#[derive(Clone, Copy, Debug)]
pub enum PatchFamily<F> {
    /// Right and left mode in the same direction.
    Parallel { r: F, r_tilde: F },
    /// Right and left mode in different directions.
    Perpendicular { r: F, r_tilde: F },
}

/// Chart map of a patch: (x, y) = (±sin ω_k(τ−σ+γ), ±sin ω_l(τ+σ+γ̃)).
pub fn null_patch_map<F: Real>(patch: &NullPatch<F>, tau: F, sigma: F) -> (F, F) {
    let (sx, sy) = patch.kind.signs();
    let wk = F::of(patch.harmonics.0 as f64);
    let wl = F::of(patch.harmonics.1 as f64);
    (
        F::of(sx) * (wk * (tau - sigma + patch.phases.0)).sin(),
        F::of(sy) * (wl * (tau + sigma + patch.phases.1)).sin(),
    )
}

/// Euler density pulled back to a patch chart (coefficient of dx∧dy).
///
/// Parallel family: −(1/π) r r̃ √(ω_kω_l)/(√ω_k r x − √ω_l r̃ y)² on kinds
/// I/IV and +(1/π) r r̃ √(ω_kω_l)/(√ω_k r x + √ω_l r̃ y)² on kinds II/III.
/// Perpendicular family: (2/π)(r r̃)² ω_kω_l · xy/(ω_k r²x² + ω_l r̃²y²)² on
/// every kind. These are the exact chart pullbacks; the orientation weight
/// of each kind is applied separately when patches are summed.
pub fn euler_density_null<F: Real>(
    patch: &NullPatch<F>,
    family: &PatchFamily<F>,
    x: F,
    y: F,
) -> Result<F> {
    let wk = F::of(patch.harmonics.0 as f64);
    let wl = F::of(patch.harmonics.1 as f64);
    let pi = F::PI();
    match *family {
        PatchFamily::Parallel { r, r_tilde } => {
            let a = wk.sqrt() * r;
            let b = wl.sqrt() * r_tilde;
            let (sign, denom) = match patch.kind {
                PatchKind::I | PatchKind::IV => (-F::one(), a * x - b * y),
                PatchKind::II | PatchKind::III => (F::one(), a * x + b * y),
            };
            if denom * denom <= F::of(1e-300) {
                return Err(Error::SingularPoint {
                    tau: f64::NAN,
                    sigma: f64::NAN,
                    value: 0.0,
                });
            }
            Ok(sign * a * b / (pi * denom * denom))
        }
        PatchFamily::Perpendicular { r, r_tilde } => {
            let p = wk * r * r;
            let s = wl * r_tilde * r_tilde;
            let denom = p * x * x + s * y * y;
            if denom * denom <= F::of(1e-300) {
                return Err(Error::SingularPoint {
                    tau: f64::NAN,
                    sigma: f64::NAN,
                    value: 0.0,
                });
            }
            Ok(F::of(2.0) * p * s * x * y / (pi * denom * denom))
        }
    }
}

// ---------------------------------------------------------------------------
// singular locus

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocusKind {
    Point,
    Curve,
}

/// One connected component of {g_σσ = 0}, sampled as an ordered point chain
/// in (τ, σ).
#[derive(Clone, Debug)]
pub struct SingularChain<F> {
    pub kind: LocusKind,
    pub points: Vec<(F, F)>,
}

#[derive(Clone, Debug, Default)]
pub struct SingularLocus<F> {
    pub chains: Vec<SingularChain<F>>,
    /// Set when g_σσ vanishes identically.
    pub degenerate: bool,
}

impl<F> SingularLocus<F> {
    pub fn is_empty(&self) -> bool {
        self.chains.is_empty() && !self.degenerate
    }
}

fn wrap_two_pi<F: Real>(t: F) -> F {
    let two_pi = F::PI() + F::PI();
    let mut t = t % two_pi;
    if t < F::zero() {
        t = t + two_pi;
    }
    t
}

/// Enumerates the zeros of g_σσ over the torus (τ, σ) ∈ [0, 2π)².
///
/// Structured configurations get exact chains (curve solving on monotone
/// branches, lattice points of the common-shape family); anything else falls
/// back to a 256×256 grid scan.
pub fn singular_locus<F: Real>(field: &ConformalFactorField<F>) -> SingularLocus<F> {
    let two_pi = F::PI() + F::PI();
    match field.structure() {
        Structure::Degenerate => SingularLocus {
            chains: Vec::new(),
            degenerate: true,
        },
        Structure::SingleChirality => {
            // zeros are the u- (or v-) values where every active sum vanishes
            let right = field.directions.iter().any(|d| !d.rho.is_zero());
            let pick = |d: &DirectionWaves<F>| if right { d.rho.clone() } else { d.lam.clone() };
            let active: Vec<Waveform<F>> = field
                .directions
                .iter()
                .filter(|d| !d.rho.is_zero() || !d.lam.is_zero())
                .map(pick)
                .collect();
            let mut chains = Vec::new();
            for t0 in active[0].zeros() {
                if active.iter().any(|w| w.value(t0).abs() > F::of(1e-9)) {
                    continue;
                }
                // characteristic line in (τ, σ)
                let n = 256usize;
                let pts = (0..n)
                    .map(|i| {
                        let s = two_pi * F::of(i as f64) / F::of(n as f64);
                        if right {
                            (wrap_two_pi(t0 + s), s) // u = τ − σ = t0
                        } else {
                            (wrap_two_pi(t0 - s), s) // v = τ + σ = t0
                        }
                    })
                    .collect();
                chains.push(SingularChain {
                    kind: LocusKind::Curve,
                    points: pts,
                });
            }
            SingularLocus {
                chains,
                degenerate: false,
            }
        }
        Structure::Curves { rho, lam } => {
            // curves ρ(u) = λ(v): one chain per monotone ρ-branch
            let folds = rho.folds();
            let mut chains = Vec::new();
            let n = 256usize;
            for (i, &u0) in folds.iter().enumerate() {
                let u1 = if i + 1 < folds.len() {
                    folds[i + 1]
                } else {
                    folds[0] + two_pi
                };
                let mut pts = Vec::new();
                for j in 0..=n {
                    let v = two_pi * F::of(j as f64) / F::of(n as f64);
                    if let Some(u) = rho.solve_monotone(lam.value(v), u0, u1) {
                        let u = wrap_two_pi(u);
                        // τ = (u+v)/2, σ = (v−u)/2
                        let half = F::of(0.5);
                        pts.push((wrap_two_pi((u + v) * half), wrap_two_pi((v - u) * half)));
                    }
                }
                if !pts.is_empty() {
                    chains.push(SingularChain {
                        kind: LocusKind::Curve,
                        points: pts,
                    });
                }
            }
            SingularLocus {
                chains,
                degenerate: false,
            }
        }
        Structure::CommonShape {
            k, l, gamma, gamma_t, ..
        } => {
            // isolated zeros at sin ω_k(u+γ) = sin ω_l(v+γ̃) = 0
            let mut chains = Vec::new();
            let half = F::of(0.5);
            for m in 0..(2 * k) {
                for n2 in 0..(2 * l) {
                    let u = wrap_two_pi(F::PI() * F::of(m as f64) / F::of(k as f64) - gamma);
                    let v = wrap_two_pi(F::PI() * F::of(n2 as f64) / F::of(l as f64) - gamma_t);
                    chains.push(SingularChain {
                        kind: LocusKind::Point,
                        points: vec![(wrap_two_pi((u + v) * half), wrap_two_pi((v - u) * half))],
                    });
                }
            }
            SingularLocus {
                chains,
                degenerate: false,
            }
        }
        Structure::Unsupported(_) => {
            let n = 256usize;
            let tol = field.singular_tolerance().max(F::of(1e-10));
            let mut pts = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let tau = two_pi * F::of(i as f64) / F::of(n as f64);
                    let sigma = two_pi * F::of(j as f64) / F::of(n as f64);
                    if field.value(tau, sigma) < tol {
                        pts.push((tau, sigma));
                    }
                }
            }
            let chains = pts
                .into_iter()
                .map(|p| SingularChain {
                    kind: LocusKind::Point,
                    points: vec![p],
                })
                .collect();
            SingularLocus {
                chains,
                degenerate: false,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_configuration;

    fn two_parallel(r: f64, rt: f64) -> StringConfiguration<f64> {
        parse_configuration(&format!(
            r#"
            [[modes]]
            direction = 2
            harmonic = 1
            amplitude = {r}
            chirality = "right"
            [[modes]]
            direction = 2
            harmonic = 1
            amplitude = {rt}
            chirality = "left"
            "#
        ))
        .unwrap()
    }

    #[test]
    fn no_modes_gives_zero_factor() {
        let cfg: StringConfiguration<f64> = parse_configuration("dimension = 4").unwrap();
        let f = conformal_factor(&cfg);
        assert_eq!(f.value(0.4, 1.7), 0.0);
        assert!(matches!(f.structure(), Structure::Degenerate));
    }

    #[test]
    fn two_parallel_matches_square_of_difference() {
        let cfg = two_parallel(1.0, 2.0);
        let f = conformal_factor(&cfg);
        for i in 0..20 {
            let tau = 0.31 * i as f64;
            let sigma = 0.47 * i as f64;
            let expect = ((tau - sigma).sin() - 2.0 * (tau + sigma).sin()).powi(2);
            assert!((f.value(tau, sigma) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn series_matches_field() {
        let cfg = two_parallel(1.0, 2.0);
        let f = conformal_factor(&cfg);
        for i in 0..50 {
            let tau = 0.13 * i as f64;
            let sigma = 0.29 * i as f64 + 0.1;
            let a = f.value(tau, sigma);
            let b = conformal_factor_series(&cfg, tau, sigma);
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let cfg = two_parallel(1.0, 2.0);
        let f = conformal_factor(&cfg);
        let h = 1e-5;
        let h2 = 1e-4;
        for i in 0..25 {
            let t = 0.23 * i as f64 + 0.05;
            let s = 0.41 * i as f64 + 0.02;
            let dt = (f.value(t + h, s) - f.value(t - h, s)) / (2.0 * h);
            let ds = (f.value(t, s + h) - f.value(t, s - h)) / (2.0 * h);
            let dtt = (f.value(t + h2, s) - 2.0 * f.value(t, s) + f.value(t - h2, s)) / (h2 * h2);
            let dss = (f.value(t, s + h2) - 2.0 * f.value(t, s) + f.value(t, s - h2)) / (h2 * h2);
            assert!((f.d_tau(t, s) - dt).abs() < 1e-7);
            assert!((f.d_sigma(t, s) - ds).abs() < 1e-7);
            assert!((f.d2_tau(t, s) - dtt).abs() < 1e-4);
            assert!((f.d2_sigma(t, s) - dss).abs() < 1e-4);
        }
    }

    #[test]
    fn euler_density_matches_two_mode_closed_form() {
        // independent oracle: e = −(2/π) AB ω_kω_l cos(u) cos(v) / (A sin u − B sin v)²
        let (r, rt) = (1.0, 2.0);
        let cfg = two_parallel(r, rt);
        let f = conformal_factor(&cfg);
        let (tau, sigma) = (0.7f64, 0.4f64);
        let (u, v) = (tau - sigma, tau + sigma);
        let s = r * u.sin() - rt * v.sin();
        let oracle = -(2.0 / std::f64::consts::PI) * r * rt * u.cos() * v.cos() / (s * s);
        let e = f.euler_density(tau, sigma).unwrap();
        assert!((e - oracle).abs() < 1e-10 * (1.0 + oracle.abs()));
    }

    #[test]
    fn euler_density_scale_invariant() {
        // scaling both amplitudes rescales g_σσ and leaves the density alone
        let f1 = conformal_factor(&two_parallel(1.0, 2.0));
        let f2 = conformal_factor(&two_parallel(3.0, 6.0));
        for (t, s) in [(0.7, 0.4), (1.9, 2.3), (4.0, 0.9)] {
            let a = f1.euler_density(t, s).unwrap();
            let b = f2.euler_density(t, s).unwrap();
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn spin_connection_curl_is_minus_two_pi_density() {
        let cfg = two_parallel(1.0, 2.0);
        let f = conformal_factor(&cfg);
        let h = 1e-5;
        for i in 0..100 {
            let t = 0.05 + 0.061 * i as f64;
            let s = 0.11 + 0.057 * i as f64;
            if f.value(t, s) < 1e-2 {
                continue; // stay away from the singular curves
            }
            let curl = (f.spin_connection(t + h, s).unwrap().1
                - f.spin_connection(t - h, s).unwrap().1)
                / (2.0 * h)
                - (f.spin_connection(t, s + h).unwrap().0 - f.spin_connection(t, s - h).unwrap().0)
                    / (2.0 * h);
            let e = f.euler_density(t, s).unwrap();
            assert!(
                (curl + 2.0 * std::f64::consts::PI * e).abs() < 1e-5 * (1.0 + e.abs()),
                "mismatch at ({t}, {s})"
            );
        }
    }

    #[test]
    fn null_map_sign_table() {
        let patch = |kind| NullPatch::<f64> {
            kind,
            harmonics: (1, 1),
            phases: (0.0, 0.0),
            directions: vec![2],
            multiplicity: 1,
        };
        let (x, y) = null_patch_map(&patch(PatchKind::I), 0.0, 0.0);
        assert_eq!((x, y), (0.0, 0.0));
        let (x1, y1) = null_patch_map(&patch(PatchKind::I), 0.3, 0.1);
        let (x4, y4) = null_patch_map(&patch(PatchKind::IV), 0.3, 0.1);
        assert_eq!((x4, y4), (-x1, -y1));
        let (x2, y2) = null_patch_map(&patch(PatchKind::II), 0.3, 0.1);
        assert_eq!((x2, y2), (x1, -y1));
        for i in 0..1000 {
            let t = 0.0137 * i as f64;
            let s = 0.0091 * i as f64;
            for kind in PatchKind::ALL {
                let (x, y) = null_patch_map(&patch(kind), t, s);
                assert!(x.abs() <= 1.0 && y.abs() <= 1.0);
            }
        }
    }

    #[test]
    fn perpendicular_null_density_odd() {
        let patch = NullPatch::<f64> {
            kind: PatchKind::I,
            harmonics: (1, 2),
            phases: (0.0, 0.0),
            directions: vec![2, 3],
            multiplicity: 2,
        };
        let fam = PatchFamily::Perpendicular {
            r: 0.8,
            r_tilde: 1.3,
        };
        let e = |x, y| euler_density_null(&patch, &fam, x, y).unwrap();
        assert_eq!(e(0.0, 0.5), 0.0);
        assert_eq!(e(0.5, 0.0), 0.0);
        assert_eq!(e(-0.4, 0.7), -e(0.4, 0.7));
        assert_eq!(e(0.4, -0.7), -e(0.4, 0.7));
    }

    #[test]
    fn null_density_is_chart_pullback() {
        // e_xy · ∂(x,y)/∂(τ,σ) must equal the conformal-coordinate density
        let (r, rt) = (1.0, 2.0);
        let cfg = two_parallel(r, rt);
        let f = conformal_factor(&cfg);
        let fam = PatchFamily::Parallel { r, r_tilde: rt };
        let h = 1e-6;
        for kind in PatchKind::ALL {
            let patch = NullPatch {
                kind,
                harmonics: (1, 1),
                phases: (0.0, 0.0),
                directions: vec![2],
                multiplicity: 1,
            };
            for (tau, sigma) in [(0.7, 0.4), (1.2, 2.0), (3.3, 0.6)] {
                let (x, y) = null_patch_map(&patch, tau, sigma);
                let (xp, yp) = null_patch_map(&patch, tau + h, sigma);
                let (xm, ym) = null_patch_map(&patch, tau - h, sigma);
                let (xq, yq) = null_patch_map(&patch, tau, sigma + h);
                let (xr, yr) = null_patch_map(&patch, tau, sigma - h);
                let jac = ((xp - xm) * (yq - yr) - (xq - xr) * (yp - ym)) / (4.0 * h * h);
                let e_xy = euler_density_null(&patch, &fam, x, y).unwrap();
                let e_ts = f.euler_density(tau, sigma).unwrap();
                assert!(
                    (e_xy * jac - e_ts).abs() < 1e-6 * (1.0 + e_ts.abs()),
                    "{kind:?} at ({tau},{sigma}): {} vs {}",
                    e_xy * jac,
                    e_ts
                );
            }
        }
    }

    #[test]
    fn singular_locus_reports_curves_for_parallel_family() {
        let cfg = two_parallel(1.0, 2.0);
        let f = conformal_factor(&cfg);
        let locus = singular_locus(&f);
        assert!(!locus.degenerate);
        assert!(!locus.chains.is_empty());
        for ch in &locus.chains {
            assert_eq!(ch.kind, LocusKind::Curve);
            for &(t, s) in &ch.points {
                assert!(f.value(t, s) < 1e-16);
            }
        }
    }
}
