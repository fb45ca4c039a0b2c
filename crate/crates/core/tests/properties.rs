//! Property-based invariants for the embedding, geometry, spectra, and
//! integration layers.

use proptest::prelude::*;
use std::f64::consts::TAU;

use worldsheet::config::{parse_configuration, StringConfiguration};
use worldsheet::energy::hamiltonian;
use worldsheet::geometry::conformal_factor;
use worldsheet::integrate::{default_schedule, extrapolate, integrate_euler_pv};
use worldsheet::spectra::spectrum_two_parallel;

#[derive(Clone, Debug)]
struct ModeDraw {
    direction: usize,
    harmonic: u32,
    amplitude: f64,
    phase: f64,
    right: bool,
}

fn mode_strategy() -> impl Strategy<Value = ModeDraw> {
    (2usize..5, 1u32..=4, 0.05f64..1.5, -3.1f64..3.1, any::<bool>()).prop_map(
        |(direction, harmonic, amplitude, phase, right)| ModeDraw {
            direction,
            harmonic,
            amplitude,
            phase,
            right,
        },
    )
}

fn build(modes: &[ModeDraw]) -> Option<StringConfiguration<f64>> {
    let mut doc = String::from("dimension = 5\n");
    for m in modes {
        doc.push_str(&format!(
            "[[modes]]\ndirection = {}\nharmonic = {}\namplitude = {}\nphase = {}\nchirality = \"{}\"\n",
            m.direction,
            m.harmonic,
            m.amplitude,
            m.phase,
            if m.right { "right" } else { "left" },
        ));
    }
    parse_configuration(&doc).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// X(τ, σ + 2π) = X(τ, σ): the string is closed.
    #[test]
    fn embedding_is_periodic(
        modes in prop::collection::vec(mode_strategy(), 1..6),
        tau in 0.0f64..TAU,
        sigma in 0.0f64..TAU,
    ) {
        let Some(cfg) = build(&modes) else { return Ok(()) };
        let a = cfg.embedding(tau, sigma);
        let b = cfg.embedding(tau, sigma + TAU);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    /// Every transverse component solves the wave equation exactly.
    #[test]
    fn wave_residual_vanishes(
        modes in prop::collection::vec(mode_strategy(), 1..6),
        tau in 0.0f64..TAU,
        sigma in 0.0f64..TAU,
    ) {
        let Some(cfg) = build(&modes) else { return Ok(()) };
        let scale = 1.0 + cfg.mode_power() * 16.0;
        for res in cfg.wave_residual(tau, sigma) {
            prop_assert!(res.abs() / scale <= 1e-12);
        }
    }

    /// The induced metric component is a sum of squares, hence nonnegative.
    #[test]
    fn metric_component_is_nonnegative(
        modes in prop::collection::vec(mode_strategy(), 1..6),
        seed in any::<u64>(),
    ) {
        let Some(cfg) = build(&modes) else { return Ok(()) };
        let field = conformal_factor(&cfg);
        let step = TAU / 100.0;
        let off = (seed % 97) as f64 * 1e-3;
        for i in 0..100 {
            for j in 0..100 {
                let g = field.value(off + step * i as f64, off + step * j as f64);
                prop_assert!(g >= 0.0);
            }
        }
    }

    /// Scaling every amplitude by c > 0 leaves the curvature density of the
    /// degenerate metric unchanged (g ↦ c²g drops out of ∂∂ ln g).
    #[test]
    fn euler_density_is_scale_invariant(
        modes in prop::collection::vec(mode_strategy(), 2..5),
        c in prop::sample::select(vec![0.5f64, 2.0, 10.0]),
        tau in 0.1f64..6.0,
        sigma in 0.1f64..6.0,
    ) {
        let Some(cfg) = build(&modes) else { return Ok(()) };
        let scaled: Vec<ModeDraw> = modes
            .iter()
            .map(|m| ModeDraw { amplitude: c * m.amplitude, ..m.clone() })
            .collect();
        let Some(cfg2) = build(&scaled) else { return Ok(()) };
        let f1 = conformal_factor(&cfg);
        let f2 = conformal_factor(&cfg2);
        match (f1.euler_density(tau, sigma), f2.euler_density(tau, sigma)) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "{a} vs {b}");
            }
            _ => {} // the sample sat on the singular locus; nothing to compare
        }
    }

    /// The closed-form spectrum depends only on the amplitude ratio.
    #[test]
    fn spectrum_is_scale_invariant(
        wk in 1u32..5, wl in 1u32..5,
        r in 0.1f64..2.0, ratio in 1.1f64..6.0,
        c in prop::sample::select(vec![0.1f64, 2.0, 10.0]),
    ) {
        let (wk, wl) = (wk as f64, wl as f64);
        let rt = ratio * r * (wk / wl).sqrt();
        let base = spectrum_two_parallel(wk, wl, r, rt).unwrap();
        let scaled = spectrum_two_parallel(wk, wl, c * r, c * rt).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-10 * base);
    }

    /// With √ω_k r fixed, the spectrum grows monotonically in √ω_l r̃ above
    /// the degenerate point.
    #[test]
    fn spectrum_is_monotone_in_ratio(
        wk in 1u32..5, wl in 1u32..5,
        r in 0.1f64..2.0,
        ratio in 1.05f64..5.0, bump in 0.01f64..1.0,
    ) {
        let (wk, wl) = (wk as f64, wl as f64);
        let rt1 = ratio * r * (wk / wl).sqrt();
        let rt2 = (ratio + bump) * r * (wk / wl).sqrt();
        let lo = spectrum_two_parallel(wk, wl, r, rt1).unwrap();
        let hi = spectrum_two_parallel(wk, wl, r, rt2).unwrap();
        prop_assert!(hi < lo, "spectrum must decrease toward the asymptote: {lo} vs {hi}");
    }

    /// The Hamiltonian is invariant under reordering of the mode list.
    #[test]
    fn hamiltonian_ignores_mode_order(
        modes in prop::collection::vec(mode_strategy(), 2..6),
        swap in any::<prop::sample::Index>(),
    ) {
        let Some(cfg) = build(&modes) else { return Ok(()) };
        let mut shuffled = modes.clone();
        let i = swap.index(shuffled.len());
        shuffled.swap(0, i);
        let Some(cfg2) = build(&shuffled) else { return Ok(()) };
        let a = hamiltonian(&cfg);
        let b = hamiltonian(&cfg2);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

/// Shifting both phases by the same constant translates the worldsheet in τ
/// and must not change the integral.
#[test]
fn integral_is_translation_invariant() {
    for shift in [0.4, -1.1] {
        let make = |s: f64| {
            parse_configuration::<f64>(&format!(
                r#"
                [[modes]]
                direction = 2
                harmonic = 1
                amplitude = 1.0
                phase = {}
                chirality = "right"
                [[modes]]
                direction = 2
                harmonic = 2
                amplitude = 2.0
                phase = {}
                chirality = "left"
                "#,
                s,
                -0.3 + s
            ))
            .unwrap()
        };
        let base = integrate_euler_pv(&conformal_factor(&make(0.0)), &default_schedule()).unwrap();
        let moved =
            integrate_euler_pv(&conformal_factor(&make(shift)), &default_schedule()).unwrap();
        let budget = base.error_estimate + moved.error_estimate;
        assert!(
            (base.value - moved.value).abs() <= budget,
            "shift {shift}: {} vs {}",
            base.value,
            moved.value
        );
    }
}

/// Appending a finer exclusion width to the schedule must move the
/// extrapolated value by less than the reported error estimate.
#[test]
fn extrapolation_is_stable_under_refinement() {
    let field = conformal_factor(
        &parse_configuration::<f64>(
            r#"
            [[modes]]
            direction = 2
            harmonic = 1
            amplitude = 1.0
            chirality = "right"
            [[modes]]
            direction = 2
            harmonic = 1
            amplitude = 2.0
            chirality = "left"
            "#,
        )
        .unwrap(),
    );
    let coarse = integrate_euler_pv(&field, &default_schedule()).unwrap();
    let mut refined = default_schedule();
    refined.push(refined.last().unwrap() / 2.0);
    let fine = integrate_euler_pv(&field, &refined).unwrap();
    assert!(
        (coarse.value - fine.value).abs() <= coarse.error_estimate,
        "refinement moved the value by {} with estimate {}",
        (coarse.value - fine.value).abs(),
        coarse.error_estimate
    );
}

/// The extrapolator recovers an exact model I(δ) = D/δ + n + aδ + bδ².
#[test]
fn extrapolation_recovers_polynomial_model() {
    let model = |d: f64| 3.7 / d - 4.0 + 0.9 * d - 0.2 * d * d;
    let trace: Vec<(f64, f64, f64)> = default_schedule()
        .iter()
        .map(|&d| (d, model(d), 0.0))
        .collect();
    let (value, err) = extrapolate(&trace).unwrap();
    assert!((value - (-4.0)).abs() <= 1e-9, "{value}");
    // the estimate also covers the curvature term the shorter basis misses
    assert!((value - (-4.0)).abs() <= err);
    assert!(err <= 1e-3, "{err}");
}
