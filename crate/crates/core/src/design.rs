//! Aloha transmit probability that keeps the worst-case link at a target
//! average reliability.
//!
//! Solving `P_noint · P(Φx) · P(Φy) ≥ P_target` for the transmit probability
//! gives
//!
//! ```text
//! p* = (ln P_noint − ln P_target) / (ζ (λ_x 𝒳(R_x) + λ_y 𝒴(R_y)))
//! ```
//!
//! which is non-increasing in the road lengths and tends to `p∞` as both grow.

use serde::Serialize;

use crate::analytic::{interference_factors, interference_factors_inf, p_noint, InterferenceFactors};
use crate::error::{invalid, Error, Result};
use crate::scene::{Link, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DesignPoint {
    /// Road half-length along x (equal to `half_len_y` in symmetric sweeps).
    pub half_len: f64,
    pub half_len_y: f64,
    /// Unbounded solution; negative when the target exceeds `P_noint`,
    /// infinite when the network has no traffic.
    pub p_star_raw: f64,
    pub p_star_clamped: f64,
    pub p_inf: f64,
    /// `P_target ≤ P_noint` and `p_star_raw ≤ 1`.
    pub feasible: bool,
    /// `p_star_raw > 1`: every vehicle may transmit and the target still holds.
    pub saturated: bool,
}

fn check_target(target: f64) -> Result<()> {
    if target > 0.0 && target < 1.0 {
        Ok(())
    } else {
        Err(invalid("target", format!("must lie in (0, 1), got {target}")))
    }
}

fn solve(s: &Scenario, p0: f64, target: f64, f: &InterferenceFactors) -> f64 {
    let load = f.zeta * (s.roads.intensity_x * f.x + s.roads.intensity_y * f.y);
    if load == 0.0 {
        return f64::INFINITY;
    }
    (p0.ln() - target.ln()) / load
}

/// Transmit probability for which `design_link` meets `target` exactly with
/// road half-lengths `half_len_x`, `half_len_y`. The transmit probability
/// stored in `s` is ignored.
pub fn optimal_tx_prob(
    s: &Scenario,
    target: f64,
    design_link: &Link,
    half_len_x: f64,
    half_len_y: f64,
) -> Result<DesignPoint> {
    check_target(target)?;
    let mut sized = *s;
    sized.roads.half_len_x = half_len_x;
    sized.roads.half_len_y = half_len_y;
    let sized = sized.with_tx_prob(0.0).validated()?;

    let p0 = p_noint(&sized, design_link)?;
    let raw = solve(&sized, p0, target, &interference_factors(&sized, design_link)?);
    let p_inf = solve(&sized, p0, target, &interference_factors_inf(&sized, design_link)?);
    Ok(DesignPoint {
        half_len: half_len_x,
        half_len_y,
        p_star_raw: raw,
        p_star_clamped: raw.clamp(0.0, 1.0),
        p_inf,
        feasible: target <= p0 && raw <= 1.0,
        saturated: raw > 1.0,
    })
}

/// Limit of [`optimal_tx_prob`] as both roads become infinitely long.
pub fn optimal_tx_prob_inf(s: &Scenario, target: f64, design_link: &Link) -> Result<f64> {
    check_target(target)?;
    let s = s.with_tx_prob(0.0).validated()?;
    let p0 = p_noint(&s, design_link)?;
    Ok(solve(&s, p0, target, &interference_factors_inf(&s, design_link)?))
}

/// One design point per symmetric half-length `R_x = R_y = R` in `grid`.
pub fn design_sweep(s: &Scenario, target: f64, design_link: &Link, grid: &[f64]) -> Result<Vec<DesignPoint>> {
    if let Some(bp) = s.channel.breakpoint() {
        if let Some(r) = grid.iter().find(|&&r| r < bp) {
            return Err(invalid("R", format!("{r} m is below the break-point distance {bp} m")));
        }
    }
    grid.iter()
        .map(|&r| optimal_tx_prob(s, target, design_link, r, r))
        .collect()
}

/// Copy of `s` whose transmit probability is the (clamped) design value for
/// its own road lengths.
pub fn apply_design(s: &Scenario, target: f64, design_link: &Link) -> Result<(Scenario, DesignPoint)> {
    let point = optimal_tx_prob(s, target, design_link, s.roads.half_len_x, s.roads.half_len_y)?;
    if target > p_noint(s, design_link)? {
        return Err(Error::InvalidScenario(format!(
            "target {target} exceeds the interference-free success probability"
        )));
    }
    Ok((s.with_tx_prob(point.p_star_clamped), point))
}
