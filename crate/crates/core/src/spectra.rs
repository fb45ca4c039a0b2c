//! Closed-form topological spectra of the mode amplitudes, their inversion,
//! and allowed-amplitude surface sampling.

use crate::config::{Chirality, StringConfiguration};
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    TwoParallel,
    ThreeModes,
    FourModes,
    General,
}

/// Which of the two amplitude solutions of the inverted spectrum is meant:
/// `Greater` has √ω_l r̃_l > √ω_k r_k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Greater,
    Smaller,
}

/// A spectrum family evaluated at concrete amplitudes.
#[derive(Clone, Debug)]
pub struct SpectrumRelation<F> {
    pub family: Family,
    pub lhs_value: F,
    /// The general family is a conjectured extrapolation, not a derived
    /// closed form; outputs carry this flag.
    pub conjectured: bool,
}

fn guard_finite<F: Real>(v: F, what: &str) -> Result<F> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::DegenerateAmplitude(what.into()))
    }
}

/// ω_{kl} = (4/π) ω_k ω_l, the prefactor of the two-mode spectra.
pub fn omega_kl<F: Real>(omega_k: F, omega_l: F) -> F {
    F::of(4.0) / F::PI() * omega_k * omega_l
}

/// Two parallel modes (right k, left l, same direction):
/// (4/π) ω_kω_l ln[(√ω_l r̃_l + √ω_k r_k)² / (√ω_l r̃_l − √ω_k r_k)²].
pub fn spectrum_two_parallel<F: Real>(omega_k: F, omega_l: F, r_k: F, rt_l: F) -> Result<F> {
    let a = omega_k.sqrt() * r_k;
    let b = omega_l.sqrt() * rt_l;
    let den = (b - a) * (b - a);
    if den <= F::of(1e-28) * (a * a + b * b) {
        return Err(Error::DegenerateAmplitude(format!(
            "√ω_k r_k = √ω_l r̃_l = {a}: logarithm diverges"
        )));
    }
    guard_finite(
        omega_kl(omega_k, omega_l) * ((b + a) * (b + a) / den).ln(),
        "two-parallel spectrum",
    )
}

/// Three modes: right k in J₁ and J₂, left l in J₁.
pub fn spectrum_three_modes<F: Real>(
    omega_k: F,
    omega_l: F,
    r_k_1: F,
    rt_l_1: F,
    r_k_2: F,
) -> Result<F> {
    let a = omega_k.sqrt() * r_k_1;
    let b = omega_l.sqrt() * rt_l_1;
    let extra = omega_k * r_k_2 * r_k_2;
    let num = extra + (a + b) * (a + b);
    let den = extra + (a - b) * (a - b);
    if den <= F::of(1e-28) * num {
        return Err(Error::DegenerateAmplitude(
            "three-mode spectrum: denominator vanishes".into(),
        ));
    }
    guard_finite(
        omega_kl(omega_k, omega_l) * (num / den).ln(),
        "three-mode spectrum",
    )
}

/// Four modes: right k and left l in both J₁ and J₂.
pub fn spectrum_four_modes<F: Real>(
    omega_k: F,
    omega_l: F,
    r_k_1: F,
    rt_l_1: F,
    r_k_2: F,
    rt_l_2: F,
) -> Result<F> {
    let sk = omega_k.sqrt();
    let sl = omega_l.sqrt();
    let plus = |r: F, rt: F| (sk * r + sl * rt) * (sk * r + sl * rt);
    let minus = |r: F, rt: F| (sk * r - sl * rt) * (sk * r - sl * rt);
    let num = plus(r_k_1, rt_l_1) + plus(r_k_2, rt_l_2);
    let den = minus(r_k_1, rt_l_1) + minus(r_k_2, rt_l_2);
    if den <= F::of(1e-28) * num {
        return Err(Error::DegenerateAmplitude(
            "four-mode spectrum: denominator vanishes".into(),
        ));
    }
    guard_finite(
        omega_kl(omega_k, omega_l) * (num / den).ln(),
        "four-mode spectrum",
    )
}

/// Conjectured general spectrum of an arbitrary finite mode set:
/// (4/π) Π ω_kω_l · ln[Σ_I (Σ_k √ω_k r_k^I + Σ_l √ω_l r̃_l^I)² /
///                     Σ_I (Σ_k √ω_k r_k^I − Σ_l √ω_l r̃_l^I)²],
/// the product running over all (right harmonic, left harmonic) pairs
/// present. Returned tagged `conjectured`.
pub fn spectrum_general<F: Real>(cfg: &StringConfiguration<F>) -> Result<SpectrumRelation<F>> {
    if cfg.modes.is_empty() {
        return Err(Error::DegenerateAmplitude(
            "general spectrum needs at least one mode".into(),
        ));
    }
    let mut num = F::zero();
    let mut den = F::zero();
    for dir in cfg.transverse() {
        let mut right = F::zero();
        let mut left = F::zero();
        for m in cfg.modes.iter().filter(|m| m.direction == dir) {
            let c = m.omega().sqrt() * m.amplitude;
            match m.chirality {
                Chirality::Right => right = right + c,
                Chirality::Left => left = left + c,
            }
        }
        num = num + (right + left) * (right + left);
        den = den + (right - left) * (right - left);
    }
    let mut rights: Vec<u32> = Vec::new();
    let mut lefts: Vec<u32> = Vec::new();
    for m in &cfg.modes {
        if m.amplitude == F::zero() {
            continue;
        }
        let set = match m.chirality {
            Chirality::Right => &mut rights,
            Chirality::Left => &mut lefts,
        };
        if !set.contains(&m.harmonic) {
            set.push(m.harmonic);
        }
    }
    let mut prefactor = F::of(4.0) / F::PI();
    for &k in &rights {
        for &l in &lefts {
            prefactor = prefactor * F::of(k as f64) * F::of(l as f64);
        }
    }
    let lhs = if rights.is_empty() || lefts.is_empty() {
        // one chirality only: the ratio is exactly one
        F::zero()
    } else {
        if den <= F::of(1e-28) * num {
            return Err(Error::DegenerateAmplitude(
                "general spectrum: denominator vanishes".into(),
            ));
        }
        guard_finite(prefactor * (num / den).ln(), "general spectrum")?
    };
    Ok(SpectrumRelation {
        family: Family::General,
        lhs_value: lhs,
        conjectured: true,
    })
}

/// Solves the two-parallel relation for r̃_l at a given integer n.
///
/// The spectrum value is positive for any admissible amplitudes, so both
/// branches realize |n|; with E = e^{|n|/2ω_{kl}} the greater branch is
/// r̃_l = √(ω_k/ω_l) r_k (E+1)/(E−1) and the smaller its reciprocal ratio.
pub fn invert_two_parallel<F: Real>(
    omega_k: F,
    omega_l: F,
    r_k: F,
    n: i64,
    branch: Branch,
) -> Result<F> {
    if n == 0 {
        return Err(Error::DegenerateAmplitude(
            "n = 0 has no finite two-parallel solution".into(),
        ));
    }
    if !(r_k > F::zero()) {
        return Err(Error::DegenerateAmplitude("r_k must be positive".into()));
    }
    let e = (F::of(n.unsigned_abs() as f64) / (F::of(2.0) * omega_kl(omega_k, omega_l))).exp();
    let ratio = match branch {
        Branch::Greater => (e + F::one()) / (e - F::one()),
        Branch::Smaller => (e - F::one()) / (e + F::one()),
    };
    Ok((omega_k / omega_l).sqrt() * r_k * ratio)
}

/// One row of an allowed-amplitude surface table.
#[derive(Clone, Debug)]
pub struct SurfaceRow<F> {
    pub n: i64,
    pub r_k: F,
    pub rt_l: F,
    pub branch: Branch,
}

/// Samples both branch surfaces r̃_l(n, r_k); degenerate rows (n = 0 or
/// r_k ≤ 0) are omitted.
pub fn spectrum_surface<F: Real>(
    omega_k: F,
    omega_l: F,
    n_set: &[i64],
    r_grid: &[F],
) -> Vec<SurfaceRow<F>> {
    let mut rows = Vec::new();
    for &n in n_set {
        for &r_k in r_grid {
            for branch in [Branch::Greater, Branch::Smaller] {
                if let Ok(rt_l) = invert_two_parallel(omega_k, omega_l, r_k, n, branch) {
                    rows.push(SurfaceRow { n, r_k, rt_l, branch });
                }
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_amplitudes_rejected() {
        assert!(spectrum_two_parallel(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(spectrum_four_modes(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn unit_n_from_algebraic_inversion() {
        let e = (std::f64::consts::PI / 8.0).exp();
        let rt = (e + 1.0) / (e - 1.0);
        let n = spectrum_two_parallel(1.0, 1.0, 1.0, rt).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
        let inv = invert_two_parallel(1.0, 1.0, 1.0, 1, Branch::Greater).unwrap();
        assert!((inv - rt).abs() < 1e-13);
    }

    #[test]
    fn two_parallel_symmetric_under_swap() {
        for (wk, wl, r, rt) in [(1.0f64, 2.0, 0.7, 1.9), (2.0, 3.0, 1.4, 0.3)] {
            let a = spectrum_two_parallel(wk, wl, r, rt).unwrap();
            let b = spectrum_two_parallel(wl, wk, rt, r).unwrap();
            assert!((a - b).abs() < 1e-12 * a.abs());
        }
    }

    #[test]
    fn three_modes_reduces_and_substitutes() {
        let a: f64 = spectrum_three_modes(1.0, 2.0, 0.8, 1.5, 0.0).unwrap();
        let b = spectrum_two_parallel(1.0, 2.0, 0.8, 1.5).unwrap();
        assert!((a - b).abs() < 1e-14 * a.abs());
        // ω_k=ω_l=1, all unit amplitudes: (4/π) ln(5/1)
        let c = spectrum_three_modes(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let expect = 4.0 / std::f64::consts::PI * 5.0f64.ln();
        assert!((c - expect).abs() < 1e-13);
    }

    #[test]
    fn four_modes_reduces_to_three() {
        let a: f64 = spectrum_four_modes(1.0, 2.0, 0.8, 1.5, 0.4, 0.0).unwrap();
        let b = spectrum_three_modes(1.0, 2.0, 0.8, 1.5, 0.4).unwrap();
        assert!((a - b).abs() < 1e-14 * a.abs());
    }

    #[test]
    fn round_trip_all_n() {
        for n in 1..=8i64 {
            for sign in [1, -1] {
                for branch in [Branch::Greater, Branch::Smaller] {
                    let rt = invert_two_parallel(1.0, 2.0, 0.9, sign * n, branch).unwrap();
                    let back = spectrum_two_parallel(1.0, 2.0, 0.9, rt).unwrap();
                    assert!((back - n as f64).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn branch_product_identity() {
        let (wk, wl, r) = (2.0f64, 3.0, 1.3);
        for n in 1..=6 {
            let g = invert_two_parallel(wk, wl, r, n, Branch::Greater).unwrap();
            let s = invert_two_parallel(wk, wl, r, n, Branch::Smaller).unwrap();
            assert!((g * s - wk / wl * r * r).abs() < 1e-12);
        }
    }

    #[test]
    fn large_n_limit() {
        let rt: f64 = invert_two_parallel(4.0, 1.0, 0.5, 4000, Branch::Greater).unwrap();
        assert!((rt - 0.5 * 2.0).abs() < 1e-6);
    }

    #[test]
    fn surface_rows_round_trip() {
        let rows = spectrum_surface(1.0, 1.0, &[1, 2, 3], &[0.5, 1.0, 2.0]);
        assert_eq!(rows.len(), 3 * 3 * 2);
        for row in rows {
            let n = spectrum_two_parallel(1.0, 1.0, row.r_k, row.rt_l).unwrap();
            assert!((n - row.n as f64).abs() < 1e-10);
        }
        assert!(spectrum_surface::<f64>(1.0, 1.0, &[], &[1.0]).is_empty());
    }

    #[test]
    fn general_matches_families() {
        use crate::config::parse_configuration;
        let cfg: StringConfiguration<f64> = parse_configuration(
            r#"
            [[modes]]
            direction = 2
            harmonic = 1
            amplitude = 0.8
            chirality = "right"
            [[modes]]
            direction = 2
            harmonic = 2
            amplitude = 1.5
            chirality = "left"
            "#,
        )
        .unwrap();
        let g = spectrum_general(&cfg).unwrap();
        assert!(g.conjectured);
        let two = spectrum_two_parallel(1.0, 2.0, 0.8, 1.5).unwrap();
        assert!((g.lhs_value - two).abs() < 1e-14 * two.abs());
    }

    #[test]
    fn single_mode_spectrum_is_zero() {
        use crate::config::parse_configuration;
        let cfg: StringConfiguration<f64> = parse_configuration(
            r#"
            [[modes]]
            direction = 2
            harmonic = 3
            amplitude = 1.2
            chirality = "right"
            "#,
        )
        .unwrap();
        assert_eq!(spectrum_general(&cfg).unwrap().lhs_value, 0.0);
    }
}
