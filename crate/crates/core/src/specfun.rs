//! The two integrals behind every closed form:
//!
//! ```text
//! g(α, θ)    = ∫_0^θ du / (1 + u^α)                    = θ·₂F₁(1, 1/α; 1 + 1/α; −θ^α)
//! h(α, δ, θ) = ∫_δ^{θ+δ} du / (√(u − δ)(1 + u^{α/2}))
//! ```
//!
//! `α = 2` has arctangent forms which take precedence. Everything else goes
//! through adaptive Gauss–Kronrod quadrature; long ranges are evaluated as the
//! infinite integral minus a tail, where the tail is mapped onto a short finite
//! interval by the power substitution `s = u^{1−α}`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
pub use crate::quad::QuadratureSpec;
use crate::quad::integrate;

/// Beyond this argument `g` is evaluated as `g_inf` minus the tail.
pub const THETA_SPLIT: f64 = 10.0;

const ALPHA_TWO_TOL: f64 = 1e-12;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::DivergentExponent(alpha))
    }
}

fn is_alpha_two(alpha: f64) -> bool {
    (alpha - 2.0).abs() <= ALPHA_TWO_TOL
}

/// `lim_{θ→∞} g(α, θ) = π csc(π/α) / α`.
pub fn g_inf(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(PI / (alpha * (PI / alpha).sin()))
}

/// `∫_θ^∞ du / (1 + u^α)` with `u = s^{1/(1−α)}`.
fn g_tail(alpha: f64, theta: f64, spec: &QuadratureSpec) -> f64 {
    let k = alpha / (alpha - 1.0);
    let upper = theta.powf(1.0 - alpha);
    integrate(|s| 1.0 / (1.0 + s.powf(k)), 0.0, upper, spec).value / (alpha - 1.0)
}

pub fn g_func(alpha: f64, theta: f64) -> Result<f64> {
    g_func_with(alpha, theta, &QuadratureSpec::default())
}

pub fn g_func_with(alpha: f64, theta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_alpha(alpha)?;
    if is_alpha_two(alpha) {
        check_theta(theta)?;
        return Ok(theta.atan());
    }
    g_func_quadrature(alpha, theta, spec)
}

fn check_theta(theta: f64) -> Result<()> {
    if theta >= 0.0 {
        Ok(())
    } else {
        Err(invalid("theta", format!("must be non-negative, got {theta}")))
    }
}

/// The quadrature route of [`g_func`], without the arctangent shortcut.
pub fn g_func_quadrature(alpha: f64, theta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    if theta == 0.0 {
        return Ok(0.0);
    }
    if theta.is_infinite() {
        return g_inf(alpha);
    }
    let head = integrate(|u| 1.0 / (1.0 + u.powf(alpha)), 0.0, theta.min(THETA_SPLIT), spec).value;
    if theta <= THETA_SPLIT {
        Ok(head)
    } else {
        Ok(g_inf(alpha)? - g_tail(alpha, theta, spec))
    }
}

pub fn h_func(alpha: f64, delta: f64, theta: f64) -> Result<f64> {
    h_func_with(alpha, delta, theta, &QuadratureSpec::default())
}

pub fn h_func_with(alpha: f64, delta: f64, theta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_alpha(alpha)?;
    check_h_args(delta, theta)?;
    if theta == 0.0 {
        return Ok(0.0);
    }
    if is_alpha_two(alpha) {
        let s = (1.0 + delta).sqrt();
        return Ok(2.0 * (theta / (1.0 + delta)).sqrt().atan() / s);
    }
    if delta == 0.0 {
        return Ok(2.0 * g_func_with(alpha, theta.sqrt(), spec)?);
    }
    h_func_quadrature(alpha, delta, theta, spec)
}

fn check_h_args(delta: f64, theta: f64) -> Result<()> {
    if !(delta >= 0.0) || delta.is_infinite() {
        return Err(invalid("delta", format!("must be non-negative and finite, got {delta}")));
    }
    check_theta(theta)
}

/// Split point in `t = √(u − δ)` for the head/tail decomposition of `h`.
fn h_split(delta: f64) -> f64 {
    THETA_SPLIT * delta.sqrt().max(1.0)
}

fn h_integrand(alpha: f64, delta: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| 2.0 / (1.0 + (t * t + delta).powf(0.5 * alpha))
}

/// `∫_T^∞ 2 dt / (1 + (t² + δ)^{α/2})` with `t = s^{1/(1−α)}`. In `s` the
/// integrand is `2/(α−1) / (t^{−α} + (1 + δ t^{−2})^{α/2})`, bounded on `[0, T^{1−α}]`.
fn h_tail(alpha: f64, delta: f64, t_lo: f64, spec: &QuadratureSpec) -> f64 {
    let p_alpha = alpha / (alpha - 1.0);
    let p_two = 2.0 / (alpha - 1.0);
    let f = |s: f64| {
        let t_neg_alpha = s.powf(p_alpha);
        let t_neg_two = s.powf(p_two);
        1.0 / (t_neg_alpha + (1.0 + delta * t_neg_two).powf(0.5 * alpha))
    };
    2.0 / (alpha - 1.0) * integrate(f, 0.0, t_lo.powf(1.0 - alpha), spec).value
}

/// The general quadrature route of [`h_func`] (no shortcuts), after the
/// substitution `t = √(u − δ)` which removes the endpoint singularity.
pub fn h_func_quadrature(alpha: f64, delta: f64, theta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_alpha(alpha)?;
    check_h_args(delta, theta)?;
    if theta == 0.0 {
        return Ok(0.0);
    }
    let upper = theta.sqrt();
    let split = h_split(delta);
    if upper <= split {
        return Ok(integrate(h_integrand(alpha, delta), 0.0, upper, spec).value);
    }
    Ok(h_inf_with(alpha, delta, spec)? - h_tail(alpha, delta, upper, spec))
}

/// `lim_{θ→∞} h(α, δ, θ)`.
pub fn h_inf(alpha: f64, delta: f64) -> Result<f64> {
    h_inf_with(alpha, delta, &QuadratureSpec::default())
}

pub fn h_inf_with(alpha: f64, delta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_alpha(alpha)?;
    check_h_args(delta, 0.0)?;
    if is_alpha_two(alpha) {
        return Ok(PI / (1.0 + delta).sqrt());
    }
    if delta == 0.0 {
        return Ok(2.0 * g_inf(alpha)?);
    }
    let split = h_split(delta);
    let head = integrate(h_integrand(alpha, delta), 0.0, split, spec).value;
    Ok(head + h_tail(alpha, delta, split, spec))
}

/// Plateau evaluation of `lim_{θ→∞} h(α, δ, θ)`: doubles `θ` until two
/// successive values differ by less than `rel` (relative).
pub fn h_limit_plateau(alpha: f64, delta: f64, rel: f64) -> Result<f64> {
    let spec = QuadratureSpec::default();
    let mut theta = 1.0f64.max(delta);
    let mut prev = h_func_with(alpha, delta, theta, &spec)?;
    for _ in 0..2000 {
        theta *= 2.0;
        if !theta.is_finite() {
            break;
        }
        let next = h_func_with(alpha, delta, theta, &spec)?;
        if (next - prev).abs() <= rel * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}
