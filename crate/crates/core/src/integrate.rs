//! Three mutually checking integrators for the Euler form over one
//! fundamental worldsheet domain, plus rounding to a characteristic number.
//!
//! The density is integrated over a single complete cycle (in null
//! coordinates: one full (u, v) torus [0, 2π]²). Its singular locus is
//! handled by a principal-value prescription: symmetric exclusion windows
//! measured in the value of the vanishing amplitude (strips |ρ−λ| < δ for
//! curve-type loci, disks for point-type loci), a decreasing exclusion
//! schedule, and extrapolation of the partial integrals against the model
//! c₋₁/δ + c₀ + c₁δ + c₂δ², whose finite part c₀ is the reported value.
//!
//! Orientation bookkeeping: each fold cell of the torus carries the sign
//! ε = sgn(∂_u ρ · ∂_v λ) relating its chart orientation to the patch
//! decomposition; the principal-value and boundary methods fold ε into the
//! cell contributions and the patch method applies the equivalent
//! kind-dependent weight.

use rayon::prelude::*;

use crate::geometry::{
    singular_locus, ConformalFactorField, NullPatch, PatchFamily, PatchKind, SingularLocus,
    Structure,
};
use crate::quad::adaptive;
use crate::waveform::Waveform;
use crate::{config::Chirality, Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Pv2D,
    Boundary,
    Patch,
}

/// Result of one Euler-form integration.
#[derive(Clone, Debug)]
pub struct QuadratureResult<F> {
    /// Extrapolated (δ → 0) value of the integral.
    pub value: F,
    pub error_estimate: F,
    pub method: Method,
    pub singular_report: SingularLocus<F>,
    /// (exclusion parameter, partial integral), in schedule order.
    pub extrapolation_trace: Vec<(F, F)>,
    /// g_σσ ≡ 0: the value is 0 by convention, not by quadrature.
    pub degenerate: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct CharacteristicNumber<F> {
    pub n: i64,
    pub deviation: F,
}

/// Default exclusion schedule, strictly decreasing.
pub fn default_schedule<F: Real>() -> Vec<F> {
    [0.02, 0.01, 0.005, 0.0025].iter().map(|&d| F::of(d)).collect()
}

/// Default acceptance tolerance for rounding to an integer.
pub const CHAR_NUMBER_TOL: f64 = 0.05;

const OUTER_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// shared machinery

fn check_schedule<F: Real>(schedule: &[F]) -> Result<()> {
    if schedule.len() < 3 {
        return Err(Error::Invariant(
            "exclusion schedule needs at least 3 widths".into(),
        ));
    }
    for w in schedule.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Invariant(
                "exclusion schedule must be strictly decreasing".into(),
            ));
        }
    }
    if !(schedule[schedule.len() - 1] > F::zero()) {
        return Err(Error::Invariant("exclusion widths must be positive".into()));
    }
    Ok(())
}

fn solve_linear<F: Real>(mut a: Vec<Vec<F>>, mut b: Vec<F>) -> Option<Vec<F>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[piv][col].abs() == F::zero() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = vec![F::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Fits the tail of the trace to Σ cₚ δᵖ, p ∈ {−1, 0, 1, 2}, and returns the
/// finite part c₀ with an error estimate (basis-truncation discrepancy plus
/// propagated quadrature error).
pub fn extrapolate<F: Real>(trace: &[(F, F, F)]) -> Result<(F, F)> {
    let fit = |pts: &[(F, F, F)], powers: &[i32]| -> Option<(F, F)> {
        let n = pts.len();
        let row = |d: F| powers.iter().map(|&p| d.powi(p)).collect::<Vec<F>>();
        let a: Vec<Vec<F>> = pts.iter().map(|&(d, _, _)| row(d)).collect();
        let y: Vec<F> = pts.iter().map(|&(_, v, _)| v).collect();
        let coef = solve_linear(a.clone(), y)?;
        // propagate per-δ quadrature errors through the c₀ weights
        let mut at: Vec<Vec<F>> = vec![vec![F::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                at[i][j] = a[j][i];
            }
        }
        let mut e0 = vec![F::zero(); n];
        e0[1] = F::one(); // c₀ is the second basis element
        let w = solve_linear(at, e0)?;
        let prop = pts
            .iter()
            .zip(w.iter())
            .fold(F::zero(), |acc, (&(_, _, e), &wi)| acc + wi.abs() * e);
        Some((coef[1], prop))
    };
    let n = trace.len();
    let (main, alt) = if n >= 4 {
        (
            fit(&trace[n - 4..], &[-1, 0, 1, 2]),
            fit(&trace[n - 3..], &[-1, 0, 1]),
        )
    } else {
        (
            fit(&trace[n - 3..], &[-1, 0, 1]),
            fit(&trace[n - 2..], &[-1, 0]),
        )
    };
    let (c0, prop) = main.ok_or_else(|| {
        Error::NonConvergence("extrapolation system is singular".into())
    })?;
    let (c0_alt, _) = alt.ok_or_else(|| {
        Error::NonConvergence("extrapolation system is singular".into())
    })?;
    let err = (c0 - c0_alt).abs() + prop + F::of(1e-12) * (F::one() + c0.abs());
    if !c0.is_finite() || !err.is_finite() {
        return Err(Error::NonConvergence("non-finite extrapolation".into()));
    }
    if err > F::of(0.5) * (F::one() + c0.abs()) {
        return Err(Error::NonConvergence(format!(
            "extrapolation residual {err} too large for value {c0}"
        )));
    }
    Ok((c0, err))
}

/// ∫ dt/(t−c)² over [lo, hi] minus the symmetric window (c−δ, c+δ), exact.
fn windowed_inverse_square<F: Real>(c: F, delta: F, lo: F, hi: F) -> F {
    debug_assert!(lo <= hi);
    let g = |t: F| -F::one() / (t - c);
    let mut total = F::zero();
    let b = hi.min(c - delta);
    if b > lo {
        total = total + g(b) - g(lo);
    }
    let a = lo.max(c + delta);
    if hi > a {
        total = total + g(hi) - g(a);
    }
    total
}

fn finish<F: Real>(
    method: Method,
    field: &ConformalFactorField<F>,
    trace: Vec<(F, F, F)>,
) -> Result<QuadratureResult<F>> {
    let (value, err) = extrapolate(&trace)?;
    Ok(QuadratureResult {
        value,
        error_estimate: err,
        method,
        singular_report: singular_locus(field),
        extrapolation_trace: trace.into_iter().map(|(d, v, _)| (d, v)).collect(),
        degenerate: false,
    })
}

fn trivial<F: Real>(
    method: Method,
    field: &ConformalFactorField<F>,
    schedule: &[F],
    degenerate: bool,
) -> QuadratureResult<F> {
    QuadratureResult {
        value: F::zero(),
        error_estimate: F::zero(),
        method,
        singular_report: singular_locus(field),
        extrapolation_trace: schedule.iter().map(|&d| (d, F::zero())).collect(),
        degenerate,
    }
}

/// Monotone branches of a waveform: (t₀, t₁) intervals covering one period.
fn branches<F: Real>(w: &Waveform<F>) -> Vec<(F, F)> {
    let two_pi = F::PI() + F::PI();
    let folds = w.folds();
    let mut out = Vec::with_capacity(folds.len());
    for (i, &t0) in folds.iter().enumerate() {
        let t1 = if i + 1 < folds.len() {
            folds[i + 1]
        } else {
            folds[0] + two_pi
        };
        out.push((t0, t1));
    }
    out
}

// ---------------------------------------------------------------------------
// principal-value method

/// One direction, g = 2α′(ρ(u) − λ(v))²: the orientation-signed density is
/// −(1/π)|ρ′||λ′|/(ρ−λ)², integrated by exact substitution x = ρ(u),
/// y = λ(v) on monotone branches.
fn pv_curves<F: Real>(rho: &Waveform<F>, lam: &Waveform<F>, delta: F) -> (F, F) {
    let rho_ranges: Vec<(F, F)> = branches(rho)
        .iter()
        .map(|&(a, b)| {
            let (x0, x1) = (rho.value(a), rho.value(b));
            (x0.min(x1), x0.max(x1))
        })
        .collect();
    let inner = |y: F| {
        rho_ranges
            .iter()
            .fold(F::zero(), |acc, &(lo, hi)| {
                acc + windowed_inverse_square(y, delta, lo, hi)
            })
    };
    let pieces: Vec<(F, F)> = branches(lam)
        .par_iter()
        .map(|&(a, b)| {
            let (y0, y1) = (lam.value(a), lam.value(b));
            adaptive(inner, y0.min(y1), y0.max(y1), F::of(OUTER_TOL))
        })
        .collect();
    let scale = -F::one() / F::PI();
    let total = pieces.iter().fold(F::zero(), |acc, &(v, _)| acc + v);
    let err = pieces.iter().fold(F::zero(), |acc, &(_, e)| acc + e);
    (scale * total, err / F::PI())
}

/// Several directions with one shared right and one shared left harmonic:
/// with x = sin ω_k(u+γ), y = sin ω_l(v+γ̃) the signed density substitutes
/// to −(1/2π)(2k)(2l) ∂_x∂_y ln q over [−1,1]², q = Px² − 2Qxy + Sy², whose
/// x-integral is the exact boundary term of H = ∂_y ln q. Point zeros at the
/// origin are excluded by disks of radius δ.
fn pv_common_shape<F: Real>(p: F, q: F, s: F, k: u32, l: u32, delta: F) -> (F, F) {
    let two = F::of(2.0);
    let h = |x: F, y: F| (two * s * y - two * q * x) / (p * x * x - two * q * x * y + s * y * y);
    let inner = |y: F| {
        let mut val = h(F::one(), y) - h(-F::one(), y);
        if y.abs() < delta {
            let w = (delta * delta - y * y).sqrt();
            if w > F::zero() {
                val = val - (h(w, y) - h(-w, y));
            }
        }
        val
    };
    let mut total = F::zero();
    let mut err = F::zero();
    for (a, b) in [(-F::one(), -delta), (-delta, delta), (delta, F::one())] {
        let (v, e) = adaptive(inner, a, b, F::of(OUTER_TOL));
        total = total + v;
        err = err + e;
    }
    let pref = -F::of((4 * k * l) as f64) / (F::of(2.0) * F::PI());
    (pref * total, pref.abs() * err)
}

/// Principal-value integration of the Euler form over one fundamental
/// domain, with δ → 0 extrapolation over `schedule`.
pub fn integrate_euler_pv<F: Real>(
    field: &ConformalFactorField<F>,
    schedule: &[F],
) -> Result<QuadratureResult<F>> {
    check_schedule(schedule)?;
    match field.structure() {
        Structure::Degenerate => Ok(trivial(Method::Pv2D, field, schedule, true)),
        Structure::SingleChirality => Ok(trivial(Method::Pv2D, field, schedule, false)),
        Structure::Curves { rho, lam } => {
            let trace: Vec<(F, F, F)> = schedule
                .iter()
                .map(|&d| {
                    let (v, e) = pv_curves(&rho, &lam, d);
                    (d, v, e)
                })
                .collect();
            finish(Method::Pv2D, field, trace)
        }
        Structure::CommonShape {
            p, q, s, k, l, ..
        } => {
            let trace: Vec<(F, F, F)> = schedule
                .iter()
                .map(|&d| {
                    let (v, e) = pv_common_shape(p, q, s, k, l, d);
                    (d, v, e)
                })
                .collect();
            finish(Method::Pv2D, field, trace)
        }
        Structure::Unsupported(msg) => Err(Error::UnsupportedShape(msg)),
    }
}

// ---------------------------------------------------------------------------
// boundary (Stokes) method

struct Cell<F> {
    u0: F,
    u1: F,
    v0: F,
    v1: F,
}

fn cells<F: Real>(u_folds: &[(F, F)], v_folds: &[(F, F)]) -> Vec<Cell<F>> {
    let mut out = Vec::with_capacity(u_folds.len() * v_folds.len());
    for &(u0, u1) in u_folds {
        for &(v0, v1) in v_folds {
            out.push(Cell { u0, u1, v0, v1 });
        }
    }
    out
}

/// Line integral of −φ_u du along v = const from `ua` to `ub` (either
/// direction), skipping the parts where |ρ − λ(v)| < δ.
fn edge_u_curves<F: Real>(
    rho: &Waveform<F>,
    lam_v: F,
    ua: F,
    ub: F,
    delta: F,
) -> (F, F) {
    let lo = ua.min(ub);
    let hi = ua.max(ub);
    let mut cuts: Vec<F> = [lam_v - delta, lam_v + delta]
        .iter()
        .filter_map(|&t| rho.solve_monotone(t, lo, hi))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if ua > ub {
        cuts.reverse();
    }
    let mut pts = vec![ua];
    pts.extend(cuts);
    pts.push(ub);
    let f = |u: F| -rho.d1(u) / (rho.value(u) - lam_v);
    let half = F::of(0.5);
    let mut total = F::zero();
    let mut err = F::zero();
    for w in pts.windows(2) {
        let m = (w[0] + w[1]) * half;
        if (rho.value(m) - lam_v).abs() >= delta {
            let (v, e) = adaptive(f, w[0], w[1], F::of(OUTER_TOL));
            total = total + v;
            err = err + e;
        }
    }
    (total, err)
}

/// Line integral of φ_v dv along u = const from `va` to `vb`.
fn edge_v_curves<F: Real>(
    lam: &Waveform<F>,
    rho_u: F,
    va: F,
    vb: F,
    delta: F,
) -> (F, F) {
    let lo = va.min(vb);
    let hi = va.max(vb);
    let mut cuts: Vec<F> = [rho_u - delta, rho_u + delta]
        .iter()
        .filter_map(|&t| lam.solve_monotone(t, lo, hi))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if va > vb {
        cuts.reverse();
    }
    let mut pts = vec![va];
    pts.extend(cuts);
    pts.push(vb);
    let f = |v: F| -lam.d1(v) / (rho_u - lam.value(v));
    let half = F::of(0.5);
    let mut total = F::zero();
    let mut err = F::zero();
    for w in pts.windows(2) {
        let m = (w[0] + w[1]) * half;
        if (rho_u - lam.value(m)).abs() >= delta {
            let (v, e) = adaptive(f, w[0], w[1], F::of(OUTER_TOL));
            total = total + v;
            err = err + e;
        }
    }
    (total, err)
}

/// Line integral of the connection along the level curve ρ(u) = λ(v) + s₀
/// inside the cell, oriented so the retained region stays on the left.
/// Along the curve the form collapses to −2λ′/s₀ dv, integrated exactly.
fn strip_curve<F: Real>(rho: &Waveform<F>, lam: &Waveform<F>, cell: &Cell<F>, s0: F) -> F {
    let half = F::of(0.5);
    let sgn_rp = rho.d1((cell.u0 + cell.u1) * half).signum();
    let orient = if s0 > F::zero() { -sgn_rp } else { sgn_rp };
    let (r0, r1) = (rho.value(cell.u0), rho.value(cell.u1));
    let (r_lo, r_hi) = (r0.min(r1), r0.max(r1));
    let mut vs = vec![cell.v0, cell.v1];
    for target in [r_lo - s0, r_hi - s0] {
        if let Some(v) = lam.solve_monotone(target, cell.v0, cell.v1) {
            vs.push(v);
        }
    }
    vs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = F::zero();
    for w in vs.windows(2) {
        let m = (w[0] + w[1]) * half;
        let level = lam.value(m) + s0;
        if level >= r_lo && level <= r_hi && w[1] - w[0] > F::of(1e-14) {
            total = total - (lam.value(w[1]) - lam.value(w[0])) * F::of(2.0) / s0;
        }
    }
    orient * total
}

fn boundary_curves<F: Real>(rho: &Waveform<F>, lam: &Waveform<F>, delta: F) -> (F, F) {
    let half = F::of(0.5);
    let all = cells(&branches(rho), &branches(lam));
    let parts: Vec<(F, F)> = all
        .par_iter()
        .map(|cell| {
            let eps = (rho.d1((cell.u0 + cell.u1) * half)
                * lam.d1((cell.v0 + cell.v1) * half))
            .signum();
            let mut total = F::zero();
            let mut err = F::zero();
            // counterclockwise edge loop
            let (v, e) = edge_u_curves(rho, lam.value(cell.v0), cell.u0, cell.u1, delta);
            total = total + v;
            err = err + e;
            let (v, e) = edge_v_curves(lam, rho.value(cell.u1), cell.v0, cell.v1, delta);
            total = total + v;
            err = err + e;
            let (v, e) = edge_u_curves(rho, lam.value(cell.v1), cell.u1, cell.u0, delta);
            total = total + v;
            err = err + e;
            let (v, e) = edge_v_curves(lam, rho.value(cell.u0), cell.v1, cell.v0, delta);
            total = total + v;
            err = err + e;
            for s0 in [delta, -delta] {
                total = total + strip_curve(rho, lam, cell, s0);
            }
            let pref = -eps / (F::of(2.0) * F::PI());
            (pref * total, err / (F::of(2.0) * F::PI()))
        })
        .collect();
    (
        parts.iter().fold(F::zero(), |acc, &(v, _)| acc + v),
        parts.iter().fold(F::zero(), |acc, &(_, e)| acc + e),
    )
}

fn boundary_common_shape<F: Real>(
    p: F,
    q: F,
    s: F,
    k: u32,
    l: u32,
    gamma: F,
    gamma_t: F,
    radius: F,
) -> (F, F) {
    let two = F::of(2.0);
    let wk = F::of(k as f64);
    let wl = F::of(l as f64);
    let x = move |u: F| (wk * (u + gamma)).sin();
    let xp = move |u: F| wk * (wk * (u + gamma)).cos();
    let y = move |v: F| (wl * (v + gamma_t)).sin();
    let yp = move |v: F| wl * (wl * (v + gamma_t)).cos();
    let qq = move |xx: F, yy: F| p * xx * xx - two * q * xx * yy + s * yy * yy;
    let phi_u = move |u: F, v: F| {
        let (xx, yy) = (x(u), y(v));
        (p * xx - q * yy) * xp(u) / qq(xx, yy)
    };
    let phi_v = move |u: F, v: F| {
        let (xx, yy) = (x(u), y(v));
        (s * yy - q * xx) * yp(v) / qq(xx, yy)
    };
    // fold lattices of the chart coordinates
    let folds = |w: F, g: F| -> Vec<F> {
        let two_pi = F::PI() + F::PI();
        let n = 2 * w.to_f64().unwrap() as usize;
        let mut out: Vec<F> = (0..n)
            .map(|i| {
                let t = (F::PI() * F::of(0.5) + F::PI() * F::of(i as f64)) / w - g;
                let mut t = t % two_pi;
                if t < F::zero() {
                    t = t + two_pi;
                }
                t
            })
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    };
    let intervals = |f: Vec<F>| -> Vec<(F, F)> {
        let two_pi = F::PI() + F::PI();
        (0..f.len())
            .map(|i| {
                let a = f[i];
                let b = if i + 1 < f.len() { f[i + 1] } else { f[0] + two_pi };
                (a, b)
            })
            .collect()
    };
    let all = cells(&intervals(folds(wk, gamma)), &intervals(folds(wl, gamma_t)));
    let half = F::of(0.5);
    let parts: Vec<(F, F)> = all
        .par_iter()
        .map(|cell| {
            let mu = (cell.u0 + cell.u1) * half;
            let mv = (cell.v0 + cell.v1) * half;
            let eps = (xp(mu) * yp(mv)).signum();
            let mut edges = F::zero();
            let mut err = F::zero();
            let (v, e) = adaptive(|u| -phi_u(u, cell.v0), cell.u0, cell.u1, F::of(OUTER_TOL));
            edges = edges + v;
            err = err + e;
            let (v, e) = adaptive(|vv| phi_v(cell.u1, vv), cell.v0, cell.v1, F::of(OUTER_TOL));
            edges = edges + v;
            err = err + e;
            let (v, e) = adaptive(|u| -phi_u(u, cell.v1), cell.u1, cell.u0, F::of(OUTER_TOL));
            edges = edges + v;
            err = err + e;
            let (v, e) = adaptive(|vv| phi_v(cell.u0, vv), cell.v1, cell.v0, F::of(OUTER_TOL));
            edges = edges + v;
            err = err + e;
            // the single interior zero sits at the cell midpoint
            let rr = radius.min(F::of(0.4) * (cell.u1 - cell.u0).min(cell.v1 - cell.v0));
            let (circle, ce) = adaptive(
                |theta| {
                    let uu = mu + rr * theta.cos();
                    let vv = mv + rr * theta.sin();
                    phi_u(uu, vv) * rr * theta.sin() + phi_v(uu, vv) * rr * theta.cos()
                },
                F::zero(),
                F::PI() + F::PI(),
                F::of(OUTER_TOL),
            );
            err = err + ce;
            let pref = -eps / (F::of(2.0) * F::PI());
            (pref * (edges - circle), err / (F::of(2.0) * F::PI()))
        })
        .collect();
    (
        parts.iter().fold(F::zero(), |acc, &(v, _)| acc + v),
        parts.iter().fold(F::zero(), |acc, &(_, e)| acc + e),
    )
}

/// Stokes integration: per fold cell the spin connection is integrated along
/// the cell boundary (minus the singular windows) and along the excluded
/// strip/excision boundaries, then the excision size is extrapolated to 0.
pub fn integrate_euler_boundary<F: Real>(
    field: &ConformalFactorField<F>,
    excision_radii: &[F],
) -> Result<QuadratureResult<F>> {
    check_schedule(excision_radii)?;
    match field.structure() {
        Structure::Degenerate => Ok(trivial(Method::Boundary, field, excision_radii, true)),
        Structure::SingleChirality => {
            Ok(trivial(Method::Boundary, field, excision_radii, false))
        }
        Structure::Curves { rho, lam } => {
            let trace: Vec<(F, F, F)> = excision_radii
                .iter()
                .map(|&d| {
                    let (v, e) = boundary_curves(&rho, &lam, d);
                    (d, v, e)
                })
                .collect();
            finish(Method::Boundary, field, trace)
        }
        Structure::CommonShape {
            p,
            q,
            s,
            k,
            l,
            gamma,
            gamma_t,
        } => {
            let trace: Vec<(F, F, F)> = excision_radii
                .iter()
                .map(|&d| {
                    let (v, e) = boundary_common_shape(p, q, s, k, l, gamma, gamma_t, d);
                    (d, v, e)
                })
                .collect();
            finish(Method::Boundary, field, trace)
        }
        Structure::Unsupported(msg) => Err(Error::UnsupportedShape(msg)),
    }
}

// ---------------------------------------------------------------------------
// patch method

fn patch_integral_parallel<F: Real>(kind: PatchKind, a: F, b: F, delta: F) -> (F, F) {
    // kinds I/IV: −(1/π) AB/(Ax−By)²; II/III: +(1/π) AB/(Ax+By)²
    let (sign, flip) = match kind {
        PatchKind::I | PatchKind::IV => (-F::one(), -F::one()),
        PatchKind::II | PatchKind::III => (F::one(), F::one()),
    };
    let inner = move |y: F| {
        // substitute t = Ax ± By; the x-integral is exact
        let c = flip * b * y;
        sign * b / F::PI() * windowed_inverse_square(F::zero(), delta, -a + c, a + c)
    };
    adaptive(inner, -F::one(), F::one(), F::of(OUTER_TOL))
}

fn patch_integral_perpendicular<F: Real>(p: F, s: F, delta: F) -> (F, F) {
    // density (2/π) P S xy / (Px² + Sy²)²; exact odd x-antiderivative
    let g = move |x: F, y: F| -(s * y) / (F::PI() * (p * x * x + s * y * y));
    let inner = move |y: F| {
        if y.abs() < delta {
            let w = (delta * delta - y * y).sqrt().max(F::of(1e-300));
            (g(-w, y) - g(-F::one(), y)) + (g(F::one(), y) - g(w, y))
        } else {
            g(F::one(), y) - g(-F::one(), y)
        }
    };
    adaptive(inner, -F::one(), F::one(), F::of(OUTER_TOL))
}

/// Builds the four patch charts of a two-mode configuration.
pub fn null_patches<F: Real>(
    field: &ConformalFactorField<F>,
) -> Result<(Vec<NullPatch<F>>, PatchFamily<F>)> {
    let cfg = field.configuration();
    let live: Vec<_> = cfg
        .modes
        .iter()
        .filter(|m| m.amplitude > F::zero())
        .collect();
    if live.len() != 2 {
        return Err(Error::UnsupportedShape(format!(
            "patch decomposition needs exactly two modes, got {}",
            live.len()
        )));
    }
    let right = live.iter().find(|m| m.chirality == Chirality::Right);
    let left = live.iter().find(|m| m.chirality == Chirality::Left);
    let (right, left) = match (right, left) {
        (Some(r), Some(l)) => (r, l),
        _ => {
            return Err(Error::UnsupportedShape(
                "patch decomposition needs one right and one left mode".into(),
            ))
        }
    };
    let family = if right.direction == left.direction {
        PatchFamily::Parallel {
            r: right.amplitude,
            r_tilde: left.amplitude,
        }
    } else {
        PatchFamily::Perpendicular {
            r: right.amplitude,
            r_tilde: left.amplitude,
        }
    };
    let mut directions = vec![right.direction, left.direction];
    directions.dedup();
    let patches = PatchKind::ALL
        .iter()
        .map(|&kind| NullPatch {
            kind,
            harmonics: (right.harmonic, left.harmonic),
            phases: (right.phase, left.phase),
            directions: directions.clone(),
            multiplicity: right.harmonic * left.harmonic,
        })
        .collect();
    Ok((patches, family))
}

/// Appendix-style patch decomposition: the chart density of each kind is
/// integrated over [−1,1]² with the same principal-value exclusion, weighted
/// by the kind orientation and the number of cells of that kind.
pub fn integrate_patches<F: Real>(
    field: &ConformalFactorField<F>,
    schedule: &[F],
) -> Result<QuadratureResult<F>> {
    check_schedule(schedule)?;
    if matches!(field.structure(), Structure::Degenerate) {
        return Ok(trivial(Method::Patch, field, schedule, true));
    }
    let (patches, family) = null_patches(field)?;
    let trace: Vec<(F, F, F)> = schedule
        .iter()
        .map(|&d| {
            let mut total = F::zero();
            let mut err = F::zero();
            for patch in &patches {
                let (v, e) = match family {
                    PatchFamily::Parallel { r, r_tilde } => {
                        let a = F::of(patch.harmonics.0 as f64).sqrt() * r;
                        let b = F::of(patch.harmonics.1 as f64).sqrt() * r_tilde;
                        patch_integral_parallel(patch.kind, a, b, d)
                    }
                    PatchFamily::Perpendicular { r, r_tilde } => {
                        let p = F::of(patch.harmonics.0 as f64) * r * r;
                        let s = F::of(patch.harmonics.1 as f64) * r_tilde * r_tilde;
                        patch_integral_perpendicular(p, s, d)
                    }
                };
                let w = F::of(patch.kind.weight()) * F::of(patch.multiplicity as f64);
                total = total + w * v;
                err = err + w.abs() * e;
            }
            (d, total, err)
        })
        .collect();
    finish(Method::Patch, field, trace)
}

// ---------------------------------------------------------------------------

/// Rounds a converged integral to the nearest integer; errors out when the
/// value is not near-integral at the requested tolerance.
pub fn characteristic_number<F: Real>(
    result: &QuadratureResult<F>,
    tolerance: F,
) -> Result<CharacteristicNumber<F>> {
    let rounded = result.value.round();
    let n = rounded.to_f64().unwrap_or(f64::NAN);
    if !n.is_finite() {
        return Err(Error::NonConvergence("non-finite integral value".into()));
    }
    let deviation = (result.value - rounded).abs();
    if deviation > tolerance {
        return Err(Error::NotNearInteger {
            value: result.value.to_f64().unwrap_or(f64::NAN),
            deviation: deviation.to_f64().unwrap_or(f64::NAN),
            tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(CharacteristicNumber {
        n: n as i64,
        deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_configuration, StringConfiguration};
    use crate::geometry::conformal_factor;
    use crate::spectra::spectrum_two_parallel;

    fn parallel_cfg(k: u32, l: u32, r: f64, rt: f64, g: f64, gt: f64) -> StringConfiguration<f64> {
        parse_configuration(&format!(
            r#"
            [[modes]]
            direction = 2
            harmonic = {k}
            amplitude = {r}
            phase = {g}
            chirality = "right"
            [[modes]]
            direction = 2
            harmonic = {l}
            amplitude = {rt}
            phase = {gt}
            chirality = "left"
            "#
        ))
        .unwrap()
    }

    #[test]
    fn pv_matches_closed_form_basic() {
        let cfg = parallel_cfg(1, 1, 1.0, 2.0, 0.0, 0.0);
        let field = conformal_factor(&cfg);
        let res = integrate_euler_pv(&field, &default_schedule()).unwrap();
        let closed = spectrum_two_parallel(1.0, 1.0, 1.0, 2.0).unwrap();
        assert!(
            (res.value - closed).abs() < 1e-5 * closed,
            "{} vs {closed}",
            res.value
        );
    }

    #[test]
    fn boundary_matches_closed_form_with_phases() {
        let cfg = parallel_cfg(1, 1, 1.0, 2.0, 0.3, -0.7);
        let field = conformal_factor(&cfg);
        let res = integrate_euler_boundary(&field, &default_schedule()).unwrap();
        let closed = spectrum_two_parallel(1.0, 1.0, 1.0, 2.0).unwrap();
        assert!(
            (res.value - closed).abs() < 1e-5 * closed,
            "{} vs {closed}",
            res.value
        );
    }

    #[test]
    fn patches_match_closed_form() {
        let cfg = parallel_cfg(1, 1, 1.0, 3.0, 0.0, 0.0);
        let field = conformal_factor(&cfg);
        let res = integrate_patches(&field, &default_schedule()).unwrap();
        let closed = spectrum_two_parallel(1.0, 1.0, 1.0, 3.0).unwrap();
        assert!(
            (res.value - closed).abs() < 1e-4 * closed,
            "{} vs {closed}",
            res.value
        );
    }

    #[test]
    fn perpendicular_vanishes() {
        let cfg: StringConfiguration<f64> = parse_configuration(
            r#"
            [[modes]]
            direction = 2
            harmonic = 1
            amplitude = 0.9
            chirality = "right"
            [[modes]]
            direction = 3
            harmonic = 2
            amplitude = 1.4
            chirality = "left"
            "#,
        )
        .unwrap();
        let field = conformal_factor(&cfg);
        let pv = integrate_euler_pv(&field, &default_schedule()).unwrap();
        let patch = integrate_patches(&field, &default_schedule()).unwrap();
        let boundary = integrate_euler_boundary(&field, &default_schedule()).unwrap();
        assert!(pv.value.abs() < 1e-3);
        assert!(patch.value.abs() < 1e-3);
        assert!(boundary.value.abs() < 1e-3);
    }

    #[test]
    fn degenerate_short_circuits() {
        let cfg: StringConfiguration<f64> = parse_configuration("dimension = 4").unwrap();
        let field = conformal_factor(&cfg);
        let res = integrate_euler_pv(&field, &default_schedule()).unwrap();
        assert!(res.degenerate);
        assert_eq!(res.value, 0.0);
    }

    #[test]
    fn characteristic_number_rounds_and_rejects() {
        let cfg: StringConfiguration<f64> = parse_configuration("dimension = 4").unwrap();
        let field = conformal_factor(&cfg);
        let mut res = integrate_euler_pv(&field, &default_schedule()).unwrap();
        res.value = 0.0003;
        let c = characteristic_number(&res, 0.05).unwrap();
        assert_eq!(c.n, 0);
        assert!((c.deviation - 0.0003).abs() < 1e-15);
        res.value = 2.51;
        assert!(matches!(
            characteristic_number(&res, 0.05),
            Err(Error::NotNearInteger { .. })
        ));
    }

    #[test]
    fn schedule_validation() {
        let cfg = parallel_cfg(1, 1, 1.0, 2.0, 0.0, 0.0);
        let field = conformal_factor(&cfg);
        assert!(integrate_euler_pv(&field, &[0.02, 0.01]).is_err());
        assert!(integrate_euler_pv(&field, &[0.01, 0.02, 0.03]).is_err());
    }
}
