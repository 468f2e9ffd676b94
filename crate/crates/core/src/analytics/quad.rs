//! Adaptive Gauss–Kronrod quadrature (7–15 rule).
//!
//! Integrands with algebraic endpoint singularities are expected to be
//! substituted smooth by the caller before they get here; the callers in
//! this crate all do so explicitly.

use crate::scalar::Real;

// 15-point Kronrod abscissae on [0, 1] side (symmetric).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_83,
];

// Embedded 7-point Gauss weights (for the odd Kronrod abscissae).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let mut kronrod = T::zero();
    let mut gauss = T::zero();
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let dx = half * T::lit(x);
        let fsum = if x == 0.0 { f(mid) } else { f(mid - dx) + f(mid + dx) };
        kronrod = kronrod + T::lit(wk) * fsum;
        if i % 2 == 1 {
            gauss = gauss + T::lit(WG[i / 2]) * fsum;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// Global-budget refinement: the segment carrying the largest error
/// estimate is bisected until the summed error falls under `abs_tol`,
/// the segment budget is spent, or segments shrink to rounding width.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, abs_tol: T) -> QuadResult<T> {
    if a == b {
        return QuadResult { value: T::zero(), error: T::zero() };
    }
    const MAX_SEGS: usize = 4096;

    struct Seg<T> {
        lo: T,
        hi: T,
        value: T,
        error: T,
        splittable: bool,
    }

    let (v0, e0) = gk15(&f, a, b);
    let mut segs = vec![Seg { lo: a, hi: b, value: v0, error: e0, splittable: true }];
    loop {
        let total_error: T = segs.iter().map(|s| s.error).sum();
        if total_error <= abs_tol || segs.len() >= MAX_SEGS {
            break;
        }
        // split the worst splittable segment
        let mut worst: Option<usize> = None;
        for (i, s) in segs.iter().enumerate() {
            if s.splittable && worst.map_or(true, |w| s.error > segs[w].error) {
                worst = Some(i);
            }
        }
        let Some(w) = worst else { break };
        let (lo, hi) = (segs[w].lo, segs[w].hi);
        let mid = (lo + hi) / T::lit(2.0);
        if !(mid > lo && mid < hi) {
            segs[w].splittable = false;
            continue;
        }
        let (vl, el) = gk15(&f, lo, mid);
        let (vr, er) = gk15(&f, mid, hi);
        segs[w] = Seg { lo, hi: mid, value: vl, error: el, splittable: true };
        segs.push(Seg { lo: mid, hi, value: vr, error: er, splittable: true });
    }
    QuadResult {
        value: segs.iter().map(|s| s.value).sum(),
        error: segs.iter().map(|s| s.error).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        // ∫ = [x^4/4 - x^2 + x] from -1 to 3 = (81/4 - 9 + 3) - (1/4 - 1 - 1) = 16
        assert!((r.value - 16.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x: f64| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-12);
        let exact = (1.0 - (10.0 * std::f64::consts::PI).cos()) / 10.0;
        assert!((r.value - exact).abs() < 1e-10, "{} vs {}", r.value, exact);
    }

    #[test]
    fn substituted_sqrt_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2, via u = sqrt(x): ∫_0^1 2 du.
        let r = integrate(|_u: f64| 2.0, 0.0, 1.0, 1e-12);
        assert!((r.value - 2.0).abs() < 1e-12);
        // and the unsubstituted version still converges to ~2 adaptively
        let raw = integrate(|x: f64| if x > 0.0 { x.powf(-0.5) } else { 0.0 }, 0.0, 1.0, 1e-9);
        assert!((raw.value - 2.0).abs() < 1e-4, "{}", raw.value);
    }

    #[test]
    fn gaussian_tail() {
        let r = integrate(
            |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            -8.0,
            8.0,
            1e-13,
        );
        assert!((r.value - 1.0).abs() < 1e-12);
    }
}
