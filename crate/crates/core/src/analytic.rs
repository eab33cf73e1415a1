//! Closed-form average reliability.
//!
//! The success probability factors into a noise-only term and one
//! interference term per road:
//!
//! ```text
//! P_c = exp(−β′γ₀) · exp(−p_I λ_x ζ 𝒳(R_x)) · exp(−p_I λ_y ζ 𝒴(R_y)),   β′ = β / ℓ(x_tx, x_rx)
//! ```
//!
//! with `ζ` the interference-free reference distance of the wanted link and
//! `𝒳`, `𝒴` expressed through [`g_func`] and [`h_func`].
//! [`success_probability_oracle`] integrates the same interference terms
//! directly from the path-loss model and is used to check the closed forms.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::scene::{ChannelParams, Link, Position, Scenario};
use crate::specfun::{g_func, g_inf, h_func, h_inf};

/// The factors of the success probability and their product.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReliabilityBreakdown {
    pub p_noint: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_c: f64,
}

impl ReliabilityBreakdown {
    fn new(p_noint: f64, p_x: f64, p_y: f64) -> Self {
        ReliabilityBreakdown {
            p_noint,
            p_x,
            p_y,
            p_c: p_noint * p_x * p_y,
        }
    }

    pub fn outage(&self) -> f64 {
        1.0 - self.p_c
    }
}

/// `β′ = β / ℓ(x_tx, x_rx)` for the scenario's channel.
pub fn beta_prime(s: &Scenario, link: &Link) -> Result<f64> {
    let gain = s.channel.model().gain(link.tx, link.rx)?;
    Ok(s.radio.beta() / gain)
}

/// Success probability without interference.
pub fn p_noint(s: &Scenario, link: &Link) -> Result<f64> {
    Ok((-beta_prime(s, link)? * s.radio.gamma0()).exp())
}

/// Reference distance of the wanted link: `β^{1/α}‖x_rx − x_tx‖` for the
/// suburban channel and `(A₀β′)^{1/α}` for the urban one.
pub fn zeta(s: &Scenario, link: &Link) -> Result<f64> {
    let alpha = s.channel.alpha();
    match s.channel {
        ChannelParams::Suburban { .. } => {
            let d = link.distance();
            if d == 0.0 {
                return Err(Error::ZeroDistance);
            }
            Ok(s.radio.beta().powf(1.0 / alpha) * d)
        }
        ChannelParams::Urban { .. } => {
            let a0 = s.channel.model().a0;
            Ok((a0 * beta_prime(s, link)?).powf(1.0 / alpha))
        }
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive, got {v}")))
    }
}

/// Road-x interference integral `𝒳(R_x)` (both channels, with the matching `ζ`).
pub fn x_factor(half_len_x: f64, zeta: f64, alpha: f64, rx_dist: f64) -> Result<f64> {
    check_positive("R_x", half_len_x)?;
    check_positive("zeta", zeta)?;
    let outer = g_func(alpha, (half_len_x + rx_dist) / zeta)?;
    if rx_dist <= half_len_x {
        Ok(outer + g_func(alpha, (half_len_x - rx_dist) / zeta)?)
    } else {
        Ok(outer - g_func(alpha, (rx_dist - half_len_x) / zeta)?)
    }
}

/// Road-y interference integral `𝒴(R_y)` for the suburban channel.
pub fn y_factor_suburban(half_len_y: f64, zeta: f64, alpha: f64, rx_dist: f64) -> Result<f64> {
    check_positive("zeta", zeta)?;
    if !(half_len_y >= 0.0) {
        return Err(invalid("R_y", "must be non-negative"));
    }
    h_func(alpha, (rx_dist / zeta).powi(2), (half_len_y / zeta).powi(2))
}

/// `κ = (A₀/A₀′)^{1/α} ‖x_rx‖`.
fn kappa(alpha: f64, rx_dist: f64, a0_lin: f64, a0p_lin: f64) -> f64 {
    (a0_lin / a0p_lin).powf(1.0 / alpha) * rx_dist
}

/// Road-y interference integral `𝒴(R_y)` for the urban channel.
pub fn y_factor_urban(
    half_len_y: f64,
    zeta_u: f64,
    alpha: f64,
    rx_dist: f64,
    breakpoint: f64,
    a0_lin: f64,
    a0p_lin: f64,
) -> Result<f64> {
    check_positive("zeta", zeta_u)?;
    if half_len_y < breakpoint {
        return Err(invalid("R_y", "must not be shorter than the break-point distance"));
    }
    let inner = g_func(alpha, rx_dist / zeta_u)?;
    if rx_dist <= breakpoint {
        return Ok(2.0 * (g_func(alpha, (half_len_y + rx_dist) / zeta_u)? - inner));
    }
    let k = kappa(alpha, rx_dist, a0_lin, a0p_lin);
    assert!(k > 0.0, "kappa vanishes only for a receiver at the junction");
    let wlos = g_func(alpha, (breakpoint + rx_dist) / zeta_u)?;
    let nlos = (g_func(alpha, k * half_len_y / zeta_u)? - g_func(alpha, k * breakpoint / zeta_u)?) / k;
    Ok(2.0 * (wlos + nlos - inner))
}

/// `𝒳_∞ = 2π csc(π/α)/α`.
pub fn x_factor_inf(alpha: f64) -> Result<f64> {
    Ok(2.0 * g_inf(alpha)?)
}

/// `𝒴_∞` for the suburban channel.
pub fn y_factor_inf_suburban(alpha: f64, rx_dist: f64, zeta: f64) -> Result<f64> {
    if rx_dist == 0.0 {
        return x_factor_inf(alpha);
    }
    check_positive("zeta", zeta)?;
    h_inf(alpha, (rx_dist / zeta).powi(2))
}

/// `𝒴_∞` for the urban channel.
pub fn y_factor_inf_urban(
    alpha: f64,
    rx_dist: f64,
    zeta_u: f64,
    breakpoint: f64,
    a0_lin: f64,
    a0p_lin: f64,
) -> Result<f64> {
    check_positive("zeta", zeta_u)?;
    let limit = g_inf(alpha)?;
    let inner = g_func(alpha, rx_dist / zeta_u)?;
    if rx_dist <= breakpoint {
        return Ok(2.0 * (limit - inner));
    }
    let k = kappa(alpha, rx_dist, a0_lin, a0p_lin);
    let wlos = g_func(alpha, (breakpoint + rx_dist) / zeta_u)?;
    let nlos = (limit - g_func(alpha, k * breakpoint / zeta_u)?) / k;
    Ok(2.0 * (wlos + nlos - inner))
}

/// `ζ`, `𝒳` and `𝒴` of one link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterferenceFactors {
    pub zeta: f64,
    pub x: f64,
    pub y: f64,
}

/// Finite-road factors for `link`, using the road lengths of `s`.
pub fn interference_factors(s: &Scenario, link: &Link) -> Result<InterferenceFactors> {
    let z = zeta(s, link)?;
    let alpha = s.channel.alpha();
    let r = link.rx_dist();
    let x = x_factor(s.roads.half_len_x, z, alpha, r)?;
    let y = match s.channel {
        ChannelParams::Suburban { .. } => y_factor_suburban(s.roads.half_len_y, z, alpha, r)?,
        ChannelParams::Urban { breakpoint_m, .. } => {
            let m = s.channel.model();
            let a0p = m.urban.map(|u| u.a0p).unwrap_or(m.a0);
            y_factor_urban(s.roads.half_len_y, z, alpha, r, breakpoint_m, m.a0, a0p)?
        }
    };
    Ok(InterferenceFactors { zeta: z, x, y })
}

/// Infinite-road factors for `link`.
pub fn interference_factors_inf(s: &Scenario, link: &Link) -> Result<InterferenceFactors> {
    let z = zeta(s, link)?;
    let alpha = s.channel.alpha();
    let r = link.rx_dist();
    let x = x_factor_inf(alpha)?;
    let y = match s.channel {
        ChannelParams::Suburban { .. } => y_factor_inf_suburban(alpha, r, z)?,
        ChannelParams::Urban { breakpoint_m, .. } => {
            let m = s.channel.model();
            let a0p = m.urban.map(|u| u.a0p).unwrap_or(m.a0);
            y_factor_inf_urban(alpha, r, z, breakpoint_m, m.a0, a0p)?
        }
    };
    Ok(InterferenceFactors { zeta: z, x, y })
}

fn assemble(s: &Scenario, link: &Link, f: InterferenceFactors) -> Result<ReliabilityBreakdown> {
    let p0 = p_noint(s, link)?;
    let roads = &s.roads;
    let p_x = (-roads.tx_prob * roads.intensity_x * f.zeta * f.x).exp();
    let p_y = (-roads.tx_prob * roads.intensity_y * f.zeta * f.y).exp();
    Ok(ReliabilityBreakdown::new(p0, p_x, p_y))
}

/// Average success probability over fading and interferer placements.
pub fn success_probability(s: &Scenario, link: &Link) -> Result<ReliabilityBreakdown> {
    let f = interference_factors(s, link)?;
    assemble(s, link, f)
}

/// Same as [`success_probability`] with both roads extended to infinity.
pub fn success_probability_inf(s: &Scenario, link: &Link) -> Result<ReliabilityBreakdown> {
    let f = interference_factors_inf(s, link)?;
    assemble(s, link, f)
}

/// Direct quadrature of the per-road interference exponent
/// `∫_B p_I λ / (1 + 1/(β′ℓ(x, x_rx))) dx`, bypassing every closed form.
pub fn success_probability_oracle(s: &Scenario, link: &Link) -> Result<ReliabilityBreakdown> {
    let model = s.channel.model();
    let bp = beta_prime(s, link)?;
    let rx = link.rx;
    let roads = &s.roads;

    let weight = |p: Position| -> f64 {
        match model.gain(p, rx) {
            Ok(g) => {
                let q = bp * g;
                q / (1.0 + q)
            }
            // interferer on top of the receiver: the integrand's limit
            Err(_) => 1.0,
        }
    };

    let rate_x = roads.tx_prob * roads.intensity_x;
    let rate_y = roads.tx_prob * roads.intensity_y;

    let exp_x = if rate_x == 0.0 {
        0.0
    } else {
        let r = roads.half_len_x;
        let cuts = breakpoints(r, &[rx.coord(), 0.0]);
        rate_x * oracle::integrate_panels(|x| weight(Position::OnHorizontal(x)), &cuts, oracle::REL_TOL)
    };
    let exp_y = if rate_y == 0.0 {
        0.0
    } else {
        let r = roads.half_len_y;
        let mut interior = vec![0.0];
        if let Some(d) = s.channel.breakpoint() {
            interior.extend([-d, d]);
        }
        let cuts = breakpoints(r, &interior);
        rate_y * oracle::integrate_panels(|y| weight(Position::OnVertical(y)), &cuts, oracle::REL_TOL)
    };

    Ok(ReliabilityBreakdown::new(
        p_noint(s, link)?,
        (-exp_x).exp(),
        (-exp_y).exp(),
    ))
}

/// Sorted panel edges of `[-half_len, half_len]` including interior cuts.
fn breakpoints(half_len: f64, interior: &[f64]) -> Vec<f64> {
    let mut cuts = vec![-half_len, half_len];
    cuts.extend(interior.iter().copied().filter(|c| c.abs() < half_len));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts
}

/// Adaptive Simpson with Richardson correction; deliberately unrelated to the
/// Gauss–Kronrod machinery of the closed forms.
mod oracle {
    pub const REL_TOL: f64 = 1e-9;
    const MAX_DEPTH: u32 = 60;

    pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, cuts: &[f64], rel_tol: f64) -> f64 {
        // coarse pass fixes the absolute target
        let coarse: f64 = cuts
            .windows(2)
            .map(|w| composite_simpson(&f, w[0], w[1], 64))
            .sum();
        let span = cuts[cuts.len() - 1] - cuts[0];
        let eps_total = (rel_tol * coarse.abs()).max(1e-300);
        cuts.windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let eps = eps_total * (b - a) / span;
                let fa = f(a);
                let fb = f(b);
                let m = 0.5 * (a + b);
                let fm = f(m);
                let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
                recurse(&f, a, b, fa, fm, fb, whole, eps, MAX_DEPTH)
            })
            .sum()
    }

    fn composite_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{db_to_lin, RoadNetwork};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn design_link() -> Link {
        Link::new(Position::OnVertical(50.0), Position::OnHorizontal(-50.0)).unwrap()
    }

    #[test]
    fn noiseless_link_has_unit_noint() {
        let mut s = Scenario::reference_suburban();
        s.radio.noise_dbm = f64::NEG_INFINITY;
        assert_eq!(p_noint(&s, &design_link()).unwrap(), 1.0);
    }

    #[test]
    fn p_noint_hand_chain() {
        let s = Scenario::reference_suburban();
        let d2: f64 = 50.0 * 50.0 + 50.0 * 50.0;
        let gain = db_to_lin(-17.86) * d2.sqrt().powi(-2);
        let bp = db_to_lin(8.0) / gain;
        let want = (-bp * 10f64.powf(-11.9)).exp();
        assert_relative_eq!(p_noint(&s, &design_link()).unwrap(), want, max_relative = 1e-14);
    }

    #[test]
    fn huge_threshold_kills_noint() {
        let mut s = Scenario::reference_suburban();
        s.radio.sinr_threshold_db = 300.0;
        assert_eq!(p_noint(&s, &design_link()).unwrap(), 0.0);
    }

    #[test]
    fn zeta_examples() {
        let mut s = Scenario::reference_suburban();
        s.radio.sinr_threshold_db = 10.0 * 4f64.log10();
        let l = Link::new(Position::OnHorizontal(50.0), Position::OnHorizontal(-50.0)).unwrap();
        assert_relative_eq!(zeta(&s, &l).unwrap(), 200.0, max_relative = 1e-14);
        s.radio.sinr_threshold_db = 0.0;
        assert_relative_eq!(zeta(&s, &l).unwrap(), 100.0, max_relative = 1e-14);

        let u = Scenario::reference_urban();
        let alpha = 1.68;
        let a0 = db_to_lin(-37.86 + 16.8);
        let a0p = db_to_lin(-38.32 + (7.0 + 10.0 * 15f64.log10()) * alpha);
        let gain = a0p * (50.0f64 * 50.0).powf(-alpha);
        let want = (a0 * db_to_lin(8.0) / gain).powf(1.0 / alpha);
        assert_relative_eq!(zeta(&u, &design_link()).unwrap(), want, max_relative = 1e-12);
    }

    #[test]
    fn x_factor_examples() {
        let a = x_factor(50.0, 37.0, 1.68, 50.0).unwrap();
        assert_relative_eq!(a, g_func(1.68, 100.0 / 37.0).unwrap(), max_relative = 1e-14);
        let b = x_factor(200.0, 100.0, 2.0, 50.0).unwrap();
        assert_relative_eq!(b, 2.5f64.atan() + 1.5f64.atan(), max_relative = 1e-14);
        for alpha in [2.0, 4.0] {
            let far = x_factor(1e4 * 7.0, 7.0, alpha, 50.0).unwrap();
            assert!((far - x_factor_inf(alpha).unwrap()).abs() < 1e-3);
        }
        // the tail decays like R^{1-α}; at α = 1.68 it takes R = 10^6 ζ
        let far = x_factor(1e6 * 7.0, 7.0, 1.68, 50.0).unwrap();
        assert!((far - x_factor_inf(1.68).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn x_factor_continuous_across_receiver_edge() {
        for alpha in [1.68, 2.0, 4.0] {
            let inside = x_factor(200.0, 80.0, alpha, 200.0).unwrap();
            let outside = x_factor(200.0, 80.0, alpha, 200.0 + 1e-9).unwrap();
            assert!((inside - outside).abs() < 1e-9);
        }
    }

    #[test]
    fn y_factor_suburban_examples() {
        assert_eq!(y_factor_suburban(0.0, 50.0, 2.0, 50.0).unwrap(), 0.0);
        let y = y_factor_suburban(120.0, 60.0, 2.0, 0.0).unwrap();
        assert_relative_eq!(y, 2.0 * 2f64.atan(), max_relative = 1e-14);
    }

    #[test]
    fn y_factor_urban_examples() {
        let (a0, a0p) = (0.0078, 0.2);
        let y = y_factor_urban(200.0, 90.0, 1.68, 0.0, 15.0, a0, a0p).unwrap();
        assert_relative_eq!(y, 2.0 * g_func(1.68, 200.0 / 90.0).unwrap(), max_relative = 1e-14);
        let y = y_factor_urban(15.0, 90.0, 1.68, 50.0, 15.0, a0, a0p).unwrap();
        let want = 2.0 * (g_func(1.68, 65.0 / 90.0).unwrap() - g_func(1.68, 50.0 / 90.0).unwrap());
        assert_relative_eq!(y, want, max_relative = 1e-13);
        assert!(y_factor_urban(10.0, 90.0, 1.68, 50.0, 15.0, a0, a0p).is_err());
    }

    #[test]
    fn infinite_examples() {
        assert_relative_eq!(x_factor_inf(2.0).unwrap(), PI, max_relative = 1e-15);
        assert_relative_eq!(y_factor_inf_suburban(2.0, 0.0, 33.0).unwrap(), PI, max_relative = 1e-15);
        assert!(x_factor_inf(1.0).is_err());

        let u = Scenario::reference_urban();
        let m = u.channel.model();
        let a0p = m.urban.unwrap().a0p;
        let z = zeta(&u, &design_link()).unwrap();
        let lim = y_factor_inf_urban(1.68, 50.0, z, 15.0, m.a0, a0p).unwrap();
        let far = y_factor_urban(1e6 * z, z, 1.68, 50.0, 15.0, m.a0, a0p).unwrap();
        assert!((far - lim).abs() < 1e-4, "{far} vs {lim}");
    }

    #[test]
    fn silent_network_reduces_to_noint() {
        let s = Scenario::reference_urban().with_tx_prob(0.0);
        let b = success_probability(&s, &design_link()).unwrap();
        assert_eq!(b.p_x, 1.0);
        assert_eq!(b.p_y, 1.0);
        assert_eq!(b.p_c, b.p_noint);

        let mut s = Scenario::reference_suburban();
        s.roads.intensity_x = 0.0;
        s.roads.intensity_y = 0.0;
        let b = success_probability(&s, &design_link()).unwrap();
        assert_eq!(b.p_c, b.p_noint);
        let o = success_probability_oracle(&s, &design_link()).unwrap();
        assert_eq!((o.p_x, o.p_y), (1.0, 1.0));
    }

    #[test]
    fn reference_no_design_average_outage() {
        // suburban, R = 200 m, p_I = 0.02: about 0.11 average outage
        let s = Scenario::reference_suburban();
        let b = success_probability(&s, &design_link()).unwrap();
        assert!((b.outage() - 0.11).abs() < 0.005, "{}", b.outage());
        // urban, R = 10 km: about 0.56
        let s = Scenario::reference_urban().with_half_len(10_000.0);
        let b = success_probability(&s, &design_link()).unwrap();
        assert!((b.outage() - 0.56).abs() < 0.01, "{}", b.outage());
    }

    #[test]
    fn closed_form_matches_oracle_on_reference() {
        for s in [Scenario::reference_suburban(), Scenario::reference_urban()] {
            let cf = success_probability(&s, &design_link()).unwrap();
            let or = success_probability_oracle(&s, &design_link()).unwrap();
            for (a, b) in [(cf.p_x, or.p_x), (cf.p_y, or.p_y), (cf.p_c, or.p_c)] {
                assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn breakdown_product_and_ranges() {
        let s = Scenario::reference_urban().with_roads(RoadNetwork::symmetric(500.0, 0.02, 0.1));
        let b = success_probability(&s, &design_link()).unwrap();
        for p in [b.p_noint, b.p_x, b.p_y, b.p_c] {
            assert!((0.0..=1.0).contains(&p));
        }
        assert_relative_eq!(b.p_c, b.p_noint * b.p_x * b.p_y, max_relative = 1e-12);
    }
}
