//! Small 1-D quadrature kernels shared by the constraint checks and the
//! Euler-form integrators: an adaptive Gauss–Kronrod 7/15 rule and a
//! composite 8-point Gauss–Legendre rule.

use crate::Real;

// QK15 abscissae/weights on [-1, 1] (positive half; the rule is symmetric).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Embedded 7-point Gauss weights (match XGK indices 1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 7/15 application on [a, b]; returns (kronrod, |k - g|).
fn gk15<F: Real>(f: &mut impl FnMut(F) -> F, a: F, b: F) -> (F, F) {
    let half = F::of(0.5);
    let c = (a + b) * half;
    let h = (b - a) * half;
    let mut kron = F::zero();
    let mut gauss = F::zero();
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let x = F::of(x);
        let wk = F::of(wk);
        let val = if i == 7 {
            f(c)
        } else {
            f(c - h * x) + f(c + h * x)
        };
        kron = kron + wk * val;
        if i % 2 == 1 {
            gauss = gauss + F::of(WG[i / 2]) * val;
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).abs())
}

/// Adaptive bisection driven by the Kronrod error estimate.
///
/// Returns the integral and an accumulated error estimate. `abs_tol` is an
/// absolute tolerance for the whole interval; subintervals get a share
/// proportional to their length.
pub fn adaptive<F: Real>(mut f: impl FnMut(F) -> F, a: F, b: F, abs_tol: F) -> (F, F) {
    if a == b {
        return (F::zero(), F::zero());
    }
    let mut total = F::zero();
    let mut err_total = F::zero();
    // (a, b, tol, depth)
    let mut stack: Vec<(F, F, F, u32)> = vec![(a, b, abs_tol.max(F::of(1e-300)), 0)];
    while let Some((a, b, tol, depth)) = stack.pop() {
        let (val, err) = gk15(&mut f, a, b);
        if err <= tol || depth >= 48 {
            total = total + val;
            err_total = err_total + err;
        } else {
            let mid = (a + b) * F::of(0.5);
            let half_tol = tol * F::of(0.5);
            stack.push((a, mid, half_tol, depth + 1));
            stack.push((mid, b, half_tol, depth + 1));
        }
    }
    (total, err_total)
}

// GL8 abscissae/weights on [-1, 1] (positive half).
const XGL8: [f64; 4] = [
    0.183434642495649804939476142360184,
    0.525532409916328985817739049189246,
    0.796666477413626739591553936475830,
    0.960289856497536231683560868569473,
];
const WGL8: [f64; 4] = [
    0.362683783378361982965150449277196,
    0.313706645877887287337962201986601,
    0.222381034453374470544355994426241,
    0.101228536290376259152531354309962,
];

/// Composite 8-point Gauss–Legendre rule with `panels` equal panels on [a, b].
pub fn composite_gl8<F: Real>(mut f: impl FnMut(F) -> F, a: F, b: F, panels: usize) -> F {
    let panels = panels.max(1);
    let width = (b - a) / F::of(panels as f64);
    let half = F::of(0.5);
    let mut total = F::zero();
    for p in 0..panels {
        let pa = a + width * F::of(p as f64);
        let c = pa + width * half;
        let h = width * half;
        for (&x, &w) in XGL8.iter().zip(WGL8.iter()) {
            let x = F::of(x);
            total = total + F::of(w) * (f(c - h * x) + f(c + h * x)) * h;
        }
    }
    total
}

/// Bisection for a root of `f` on [a, b]; assumes a sign change (or a zero
/// at an endpoint). Returns `None` when there is no sign change.
pub fn bisect<F: Real>(mut f: impl FnMut(F) -> F, a: F, b: F) -> Option<F> {
    let fa = f(a);
    let fb = f(b);
    if fa == F::zero() {
        return Some(a);
    }
    if fb == F::zero() {
        return Some(b);
    }
    if (fa > F::zero()) == (fb > F::zero()) {
        return None;
    }
    let mut lo = a;
    let mut hi = b;
    let mut flo = fa;
    for _ in 0..200 {
        let mid = (lo + hi) * F::of(0.5);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid);
        if fm == F::zero() {
            return Some(mid);
        }
        if (fm > F::zero()) == (flo > F::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) * F::of(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptive_matches_analytic_integral() {
        let (val, _) = adaptive(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((val - 2.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // 1/(x^2 + a^2) on [-1, 1] = 2 atan(1/a)/a
        let a = 1e-3;
        let (val, _) = adaptive(|x: f64| 1.0 / (x * x + a * a), -1.0, 1.0, 1e-9);
        let exact = 2.0 * (1.0 / a).atan() / a;
        assert!((val - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn composite_gl8_is_spectrally_accurate_on_trig() {
        let val = composite_gl8(|x: f64| (3.0 * x).cos().powi(2), 0.0, 2.0 * std::f64::consts::PI, 16);
        assert!((val - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }
}
