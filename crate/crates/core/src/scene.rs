//! Geometry, radio constants, road traffic and the two intersection path-loss
//! models.
//!
//! The junction sits at the origin. Every node lives on exactly one of the two
//! roads, so a position is a tagged signed coordinate rather than a 2D vector.
//! The receiver is always on the horizontal road.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Converts a decibel value to a linear ratio.
#[inline]
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear ratio to decibels.
#[inline]
pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Location of a node on one of the two roads, in meters from the junction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Position {
    OnHorizontal(f64),
    OnVertical(f64),
}

impl Position {
    pub fn coord(self) -> f64 {
        match self {
            Position::OnHorizontal(c) | Position::OnVertical(c) => c,
        }
    }

    /// Distance to the junction.
    pub fn norm(self) -> f64 {
        self.coord().abs()
    }

    pub fn xy(self) -> (f64, f64) {
        match self {
            Position::OnHorizontal(x) => (x, 0.0),
            Position::OnVertical(y) => (0.0, y),
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Position::OnHorizontal(_))
    }

    pub fn euclidean(self, other: Position) -> f64 {
        let (ax, ay) = self.xy();
        let (bx, by) = other.xy();
        (ax - bx).hypot(ay - by)
    }

    /// Driving distance along the roads, through the junction when the two
    /// nodes are on different roads.
    pub fn manhattan(self, other: Position) -> f64 {
        match (self, other) {
            (Position::OnHorizontal(a), Position::OnHorizontal(b))
            | (Position::OnVertical(a), Position::OnVertical(b)) => (a - b).abs(),
            _ => self.norm() + other.norm(),
        }
    }
}

/// Transmit power, noise floor and SINR threshold, all in logarithmic units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub sinr_threshold_db: f64,
}

impl RadioParams {
    pub const REFERENCE: RadioParams = RadioParams {
        tx_power_dbm: 20.0,
        noise_dbm: -99.0,
        sinr_threshold_db: 8.0,
    };

    /// Linear SINR threshold.
    pub fn beta(&self) -> f64 {
        db_to_lin(self.sinr_threshold_db)
    }

    /// Noise-to-transmit-power ratio.
    pub fn gamma0(&self) -> f64 {
        db_to_lin(self.noise_dbm - self.tx_power_dbm)
    }
}

/// Path-loss parameterization. Coefficients are stored in dB and used as
/// linear gains.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelParams {
    Suburban {
        alpha: f64,
        a0_db: f64,
    },
    Urban {
        alpha: f64,
        a0_db: f64,
        a0p_db: f64,
        breakpoint_m: f64,
    },
}

/// Default LOS/WLOS coefficient as a function of the exponent.
pub fn default_a0_db(alpha: f64) -> f64 {
    -37.86 + 10.0 * alpha
}

/// Default NLOS coefficient as a function of the exponent and break-point.
pub fn default_a0p_db(alpha: f64, breakpoint_m: f64) -> f64 {
    -38.32 + (7.0 + 10.0 * breakpoint_m.log10()) * alpha
}

impl ChannelParams {
    pub fn suburban(alpha: f64) -> Self {
        ChannelParams::Suburban {
            alpha,
            a0_db: default_a0_db(alpha),
        }
    }

    pub fn urban(alpha: f64, breakpoint_m: f64) -> Self {
        ChannelParams::Urban {
            alpha,
            a0_db: default_a0_db(alpha),
            a0p_db: default_a0p_db(alpha, breakpoint_m),
            breakpoint_m,
        }
    }

    pub fn reference_suburban() -> Self {
        Self::suburban(2.0)
    }

    pub fn reference_urban() -> Self {
        Self::urban(1.68, 15.0)
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            ChannelParams::Suburban { alpha, .. } | ChannelParams::Urban { alpha, .. } => alpha,
        }
    }

    pub fn is_urban(&self) -> bool {
        matches!(self, ChannelParams::Urban { .. })
    }

    pub fn breakpoint(&self) -> Option<f64> {
        match *self {
            ChannelParams::Urban { breakpoint_m, .. } => Some(breakpoint_m),
            ChannelParams::Suburban { .. } => None,
        }
    }

    /// Linear-unit view used by the numerical kernels.
    pub fn model(&self) -> PathLossModel {
        match *self {
            ChannelParams::Suburban { alpha, a0_db } => PathLossModel {
                alpha,
                a0: db_to_lin(a0_db),
                urban: None,
            },
            ChannelParams::Urban {
                alpha,
                a0_db,
                a0p_db,
                breakpoint_m,
            } => PathLossModel {
                alpha,
                a0: db_to_lin(a0_db),
                urban: Some(UrbanTerms {
                    a0p: db_to_lin(a0p_db),
                    breakpoint: breakpoint_m,
                }),
            },
        }
    }
}

/// Which case of the path-loss model applies to a transmitter/receiver pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Los,
    Wlos,
    Nlos,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Los => "LOS",
            Branch::Wlos => "WLOS",
            Branch::Nlos => "NLOS",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UrbanTerms {
    pub a0p: f64,
    pub breakpoint: f64,
}

/// Path-loss model with coefficients in linear units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathLossModel {
    pub alpha: f64,
    pub a0: f64,
    pub urban: Option<UrbanTerms>,
}

impl PathLossModel {
    /// Branch selection. A vertical-road node at the junction has `|y| = 0`
    /// and therefore always falls into the WLOS case.
    pub fn branch(&self, x: Position, rx: Position) -> Branch {
        match (x, self.urban) {
            (Position::OnHorizontal(_), _) => Branch::Los,
            (Position::OnVertical(_), None) => Branch::Wlos,
            (Position::OnVertical(y), Some(u)) => {
                if y.abs().min(rx.norm()) > u.breakpoint {
                    Branch::Nlos
                } else {
                    Branch::Wlos
                }
            }
        }
    }

    /// Linear power gain from `x` to the receiver `rx`.
    pub fn gain(&self, x: Position, rx: Position) -> Result<f64> {
        if !rx.is_horizontal() && rx.coord() != 0.0 {
            return Err(Error::VerticalReceiver);
        }
        let euclid = x.euclidean(rx);
        if euclid == 0.0 {
            return Err(Error::ZeroDistance);
        }
        let Some(u) = self.urban else {
            return Ok(self.a0 * euclid.powf(-self.alpha));
        };
        let g = match self.branch(x, rx) {
            Branch::Los => self.a0 * euclid.powf(-self.alpha),
            Branch::Wlos => self.a0 * (x.norm() + rx.norm()).powf(-self.alpha),
            Branch::Nlos => u.a0p * (x.norm() * rx.norm()).powf(-self.alpha),
        };
        Ok(g)
    }
}

/// Linear power gain between an arbitrary node and the receiver.
pub fn pathloss(ch: &ChannelParams, x: Position, rx: Position) -> Result<f64> {
    ch.model().gain(x, rx)
}

/// Road half-lengths, traffic intensities and the Aloha transmit probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadNetwork {
    pub half_len_x: f64,
    pub half_len_y: f64,
    pub intensity_x: f64,
    pub intensity_y: f64,
    pub tx_prob: f64,
}

impl RoadNetwork {
    pub fn symmetric(half_len: f64, intensity: f64, tx_prob: f64) -> Self {
        RoadNetwork {
            half_len_x: half_len,
            half_len_y: half_len,
            intensity_x: intensity,
            intensity_y: intensity,
            tx_prob,
        }
    }

    pub fn reference() -> Self {
        Self::symmetric(200.0, 0.01, 0.02)
    }

    pub fn with_tx_prob(mut self, tx_prob: f64) -> Self {
        self.tx_prob = tx_prob;
        self
    }

    pub fn with_half_len(mut self, half_len: f64) -> Self {
        self.half_len_x = half_len;
        self.half_len_y = half_len;
        self
    }
}

/// A wanted transmitter/receiver pair. The receiver is on the horizontal road.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub tx: Position,
    pub rx: Position,
}

impl Link {
    pub fn new(tx: Position, rx: Position) -> Result<Self> {
        let rx = match rx {
            Position::OnVertical(c) if c == 0.0 => Position::OnHorizontal(0.0),
            Position::OnVertical(_) => return Err(Error::VerticalReceiver),
            h => h,
        };
        if tx.euclidean(rx) == 0.0 {
            return Err(Error::ZeroDistance);
        }
        Ok(Link { tx, rx })
    }

    /// Receiver at `-rx_dist` on the horizontal road and transmitter at
    /// Manhattan separation `separation`, walking towards the junction and
    /// then up the vertical road.
    pub fn at_separation(rx_dist: f64, separation: f64) -> Result<Self> {
        if !(rx_dist >= 0.0) || !(separation > 0.0) {
            return Err(invalid("separation", "need rx_dist >= 0 and separation > 0"));
        }
        let c = separation - rx_dist;
        let tx = if c <= 0.0 {
            Position::OnHorizontal(c)
        } else {
            Position::OnVertical(c)
        };
        Link::new(tx, Position::OnHorizontal(-rx_dist))
    }

    pub fn rx_dist(&self) -> f64 {
        self.rx.norm()
    }

    pub fn separation(&self) -> f64 {
        self.tx.manhattan(self.rx)
    }

    pub fn distance(&self) -> f64 {
        self.tx.euclidean(self.rx)
    }
}

/// Full experiment context.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub radio: RadioParams,
    pub channel: ChannelParams,
    pub roads: RoadNetwork,
}

impl Scenario {
    pub fn reference_suburban() -> Self {
        Scenario {
            radio: RadioParams::REFERENCE,
            channel: ChannelParams::reference_suburban(),
            roads: RoadNetwork::reference(),
        }
    }

    pub fn reference_urban() -> Self {
        Scenario {
            radio: RadioParams::REFERENCE,
            channel: ChannelParams::reference_urban(),
            roads: RoadNetwork::reference(),
        }
    }

    pub fn with_roads(mut self, roads: RoadNetwork) -> Self {
        self.roads = roads;
        self
    }

    pub fn with_tx_prob(mut self, tx_prob: f64) -> Self {
        self.roads.tx_prob = tx_prob;
        self
    }

    pub fn with_half_len(mut self, half_len: f64) -> Self {
        self.roads = self.roads.with_half_len(half_len);
        self
    }

    pub fn validate(&self) -> Diagnostics {
        validate_scenario(self)
    }

    /// Returns `self` when no hard invariant is violated.
    pub fn validated(self) -> Result<Self> {
        let d = self.validate();
        if d.is_ok() {
            Ok(self)
        } else {
            Err(Error::InvalidScenario(d.summary()))
        }
    }
}

/// One finding of [`validate_scenario`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finding {
    pub code: &'static str,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub violations: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|f| f.code == code)
    }

    pub fn summary(&self) -> String {
        self.violations
            .iter()
            .map(|f| format!("{}: {}", f.code, f.message))
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn violation(&mut self, code: &'static str, message: String) {
        self.violations.push(Finding { code, message });
    }
}

pub fn validate_scenario(s: &Scenario) -> Diagnostics {
    let mut d = Diagnostics::default();
    let r = &s.radio;
    if ![r.tx_power_dbm, r.noise_dbm, r.sinr_threshold_db]
        .iter()
        .all(|v| v.is_finite())
    {
        d.violation("radio", "radio constants must be finite".into());
    }

    let alpha = s.channel.alpha();
    if !(alpha > 1.0) || !alpha.is_finite() {
        d.violation("alpha", format!("path loss exponent must exceed 1, got {alpha}"));
    }

    let roads = &s.roads;
    for (name, v) in [("R_x", roads.half_len_x), ("R_y", roads.half_len_y)] {
        if !(v > 0.0) || !v.is_finite() {
            d.violation("half_len", format!("{name} must be positive and finite, got {v}"));
        }
    }
    for (name, v) in [("lambda_x", roads.intensity_x), ("lambda_y", roads.intensity_y)] {
        if !(v >= 0.0) || !v.is_finite() {
            d.violation("intensity", format!("{name} must be non-negative, got {v}"));
        }
    }
    if !(0.0..=1.0).contains(&roads.tx_prob) {
        d.violation(
            "tx_prob range",
            format!("transmit probability must lie in [0, 1], got {}", roads.tx_prob),
        );
    }

    if let ChannelParams::Urban {
        a0_db,
        a0p_db,
        breakpoint_m,
        ..
    } = s.channel
    {
        if !(breakpoint_m > 0.0) || !breakpoint_m.is_finite() {
            d.violation(
                "breakpoint",
                format!("break-point distance must be positive, got {breakpoint_m}"),
            );
        } else {
            let shortest = roads.half_len_x.min(roads.half_len_y);
            if shortest < breakpoint_m {
                d.violation(
                    "breakpoint",
                    format!(
                        "road half-length {shortest} m is shorter than the break-point distance {breakpoint_m} m"
                    ),
                );
            }
            if alpha > 1.0 {
                let bound = db_to_lin(a0_db) * (breakpoint_m / 2.0).powf(alpha);
                if !(db_to_lin(a0p_db) < bound) {
                    d.warnings.push(Finding {
                        code: "coefficient",
                        message: format!(
                            "NLOS coefficient {a0p_db:.3} dB is not below A0*(breakpoint/2)^alpha = {:.3} dB",
                            lin_to_db(bound)
                        ),
                    });
                }
            }
        }
    }
    d
}

/// Transmitter position `k` of the `m_e`-point equidistant walk away from a
/// receiver at `-rx_dist` on the horizontal road.
pub fn tx_grid(k: usize, m_e: usize, d_max: f64, rx_dist: f64) -> Result<Position> {
    if m_e == 0 || k == 0 || k > m_e {
        return Err(Error::GridIndex { k, m_e });
    }
    if !(d_max > 0.0) {
        return Err(invalid("d_max", "must be positive"));
    }
    let m_x = (m_e as f64 * rx_dist / d_max).floor() as usize;
    let c = k as f64 * d_max / m_e as f64 - rx_dist;
    Ok(if k <= m_x {
        Position::OnHorizontal(c)
    } else {
        Position::OnVertical(c)
    })
}
