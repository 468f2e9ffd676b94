//! Closed-form laws: excursion-measure tails, the binary dislocation
//! density, Laplace exponents and the limit Laplace transforms.

use crate::analytics::quad;
use crate::analytics::special::ln_gamma;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Excursion-measure tail of the maximum: N(H_max > m) = (β−1)^{1/(1−β)} m^{1/(1−β)}.
pub fn excursion_tail_hmax<T: Real>(beta: T, m: T) -> Result<T> {
    check_beta_closed(beta.as_f64())?;
    if m.as_f64() <= 0.0 {
        return Err(Error::invalid("level m must be positive"));
    }
    let b = beta.as_f64();
    let e = 1.0 / (1.0 - b);
    Ok(T::lit((b - 1.0).powf(e) * m.as_f64().powf(e)))
}

/// Excursion-measure tail of the lifetime: N(σ > m) = m^{−1/β} / Γ(1 − 1/β).
pub fn excursion_tail_sigma<T: Real>(beta: T, m: T) -> Result<T> {
    check_beta_closed(beta.as_f64())?;
    if m.as_f64() <= 0.0 {
        return Err(Error::invalid("level m must be positive"));
    }
    let b = beta.as_f64();
    let g = ln_gamma(1.0 - 1.0 / b).exp();
    Ok(T::lit(m.as_f64().powf(-1.0 / b) / g))
}

fn check_beta_closed(b: f64) -> Result<()> {
    if !(b > 1.0 && b <= 2.0) {
        return Err(Error::invalid(format!("beta must lie in (1, 2], got {b}")));
    }
    Ok(())
}

/// Density of the larger child mass in a binary Brownian split:
/// 2 (2π x³ (1−x)³)^{−1/2} on [1/2, 1), zero outside.
pub fn brownian_dislocation_density<T: Real>(x: T) -> T {
    let xf = x.as_f64();
    if !(0.5..1.0).contains(&xf) {
        return T::zero();
    }
    let v = 2.0 / (2.0 * std::f64::consts::PI * xf.powi(3) * (1.0 - xf).powi(3)).sqrt();
    T::lit(v)
}

/// Laplace exponent of the tagged-fragment subordinator for the stable
/// family: φ(q) = (1+α)^{−1} Γ(q−α) / Γ(q).
pub fn phi_closed_form<T: Real>(alpha: T, q: T) -> Result<T> {
    let a = alpha.as_f64();
    let qf = q.as_f64();
    if !(-0.5..0.0).contains(&a) && a != -0.5 {
        return Err(Error::invalid(format!("alpha must lie in [-1/2, 0), got {a}")));
    }
    if qf <= 0.0 {
        return Err(Error::invalid(format!("q must be positive, got {qf}")));
    }
    Ok(T::lit((ln_gamma(qf - a) - ln_gamma(qf)).exp() / (1.0 + a)))
}

/// Same Laplace exponent obtained by integrating 1 − x^{1+q} − (1−x)^{1+q}
/// against the binary Brownian dislocation density.
///
/// The split density is stated in the standard-excursion clock, while the
/// Γ-ratio exponent lives in the height-process clock, which runs a
/// factor √2 slower at β = 2; the 1/√2 below converts between the two so
/// the routes are comparable. The (1−x)^{−3/2} endpoint is tamed by
/// u = sqrt(1−x); absolute error is held below 1e-10.
pub fn phi_from_nu_brownian(q: f64) -> f64 {
    assert!(q > 0.0);
    let c = 4.0 / (2.0 * std::f64::consts::PI).sqrt() / 2f64.sqrt();
    let g = move |u: f64| {
        if u <= 0.0 {
            // limiting value as u → 0: numerator ~ (1+q) u²
            return c * (1.0 + q);
        }
        let x = 1.0 - u * u;
        // 1 - x^{1+q} computed as -expm1((1+q) ln(1-u²)) for stability near u=0
        let one_minus_xq = -((1.0 + q) * (-u * u).ln_1p()).exp_m1();
        let num = one_minus_xq - u.powf(2.0 * (1.0 + q));
        c * num / (x.powf(1.5) * u * u)
    };
    quad::integrate(g, 0.0, 1.0 / 2f64.sqrt(), 1e-11).value
}

/// Laplace transform of the limit of the rescaled last-fragment mass in
/// the Brownian case: 2λ (sinh √(2λ))^{−2}; equals 1 at λ = 0 by limit.
pub fn laplace_last_fragment_brownian<T: Real>(lambda: T) -> T {
    let l = lambda.as_f64();
    assert!(l >= 0.0, "lambda must be nonnegative");
    if l < 1e-14 {
        return T::one();
    }
    let u = (2.0 * l).sqrt();
    T::lit(2.0 * l / (u.sinh() * u.sinh()))
}

/// Laplace transform of the limit of the rescaled total mass in the
/// Brownian case: (cosh √(2λ))^{−2}.
pub fn laplace_total_mass_brownian<T: Real>(lambda: T) -> T {
    let l = lambda.as_f64();
    assert!(l >= 0.0, "lambda must be nonnegative");
    let u = (2.0 * l).sqrt();
    T::lit(1.0 / (u.cosh() * u.cosh()))
}
