//! Scenario files.
//!
//! `[radio]`, `[channel]` and `[roads]` must be present; `[link]` is
//! optional. Keys left out of a section take the reference value.

use std::path::Path;

use corner_sinr::scene::{default_a0_db, default_a0p_db};
use corner_sinr::{ChannelParams, Link, Position, RadioParams, RoadNetwork, Scenario};
use serde::{Deserialize, Serialize};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    radio: RadioSection,
    channel: ChannelSection,
    roads: RoadsSection,
    link: Option<LinkSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadioSection {
    tx_power_dbm: Option<f64>,
    noise_dbm: Option<f64>,
    sinr_threshold_db: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Suburban,
    Urban,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    kind: Kind,
    alpha: Option<f64>,
    a0_db: Option<f64>,
    a0p_db: Option<f64>,
    breakpoint_m: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoadsSection {
    half_len_x_m: Option<f64>,
    half_len_y_m: Option<f64>,
    intensity_x: Option<f64>,
    intensity_y: Option<f64>,
    tx_prob: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Road {
    Horizontal,
    Vertical,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkSection {
    tx_road: Option<Road>,
    tx_coord_m: Option<f64>,
    rx_coord_m: Option<f64>,
}

/// A loaded scenario plus its reference (design) link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Loaded {
    pub scenario: Scenario,
    pub link: Link,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config")]
    Parse(#[from] toml::de::Error),
    #[error("invalid link")]
    Link(#[from] corner_sinr::Error),
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Loaded, ConfigError> {
    let f: File = toml::from_str(text)?;
    let t = RadioParams::REFERENCE;
    let radio = RadioParams {
        tx_power_dbm: f.radio.tx_power_dbm.unwrap_or(t.tx_power_dbm),
        noise_dbm: f.radio.noise_dbm.unwrap_or(t.noise_dbm),
        sinr_threshold_db: f.radio.sinr_threshold_db.unwrap_or(t.sinr_threshold_db),
    };

    let c = f.channel;
    let channel = match c.kind {
        Kind::Suburban => {
            let alpha = c.alpha.unwrap_or(2.0);
            ChannelParams::Suburban {
                alpha,
                a0_db: c.a0_db.unwrap_or_else(|| default_a0_db(alpha)),
            }
        }
        Kind::Urban => {
            let alpha = c.alpha.unwrap_or(1.68);
            let breakpoint_m = c.breakpoint_m.unwrap_or(15.0);
            ChannelParams::Urban {
                alpha,
                a0_db: c.a0_db.unwrap_or_else(|| default_a0_db(alpha)),
                a0p_db: c.a0p_db.unwrap_or_else(|| default_a0p_db(alpha, breakpoint_m)),
                breakpoint_m,
            }
        }
    };

    let d = RoadNetwork::reference();
    let r = f.roads;
    let roads = RoadNetwork {
        half_len_x: r.half_len_x_m.unwrap_or(d.half_len_x),
        half_len_y: r.half_len_y_m.unwrap_or(d.half_len_y),
        intensity_x: r.intensity_x.unwrap_or(d.intensity_x),
        intensity_y: r.intensity_y.unwrap_or(d.intensity_y),
        tx_prob: r.tx_prob.unwrap_or(d.tx_prob),
    };

    let l = f.link.unwrap_or(LinkSection {
        tx_road: None,
        tx_coord_m: None,
        rx_coord_m: None,
    });
    let tx_coord = l.tx_coord_m.unwrap_or(50.0);
    let tx = match l.tx_road.unwrap_or(Road::Vertical) {
        Road::Horizontal => Position::OnHorizontal(tx_coord),
        Road::Vertical => Position::OnVertical(tx_coord),
    };
    let link = Link::new(tx, Position::OnHorizontal(l.rx_coord_m.unwrap_or(-50.0)))?;

    Ok(Loaded {
        scenario: Scenario {
            radio,
            channel,
            roads,
        },
        link,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_sections_give_reference() {
        let l = parse("[radio]\n[channel]\nkind = \"urban\"\n[roads]\n").unwrap();
        assert_eq!(l.scenario, Scenario::reference_urban());
        assert_eq!(l.link, Link::at_separation(50.0, 100.0).unwrap());
        let l = parse("[radio]\n[channel]\nkind = \"suburban\"\n[roads]\n").unwrap();
        assert_eq!(l.scenario, Scenario::reference_suburban());
    }

    #[test]
    fn explicit_values_win() {
        let text = r#"
            [radio]
            noise_dbm = -90
            [channel]
            kind = "urban"
            alpha = 2.0
            breakpoint_m = 10
            [roads]
            half_len_x_m = 500
            tx_prob = 0.1
            [link]
            tx_road = "horizontal"
            tx_coord_m = 20
            rx_coord_m = -30
        "#;
        let l = parse(text).unwrap();
        assert_eq!(l.scenario.radio.noise_dbm, -90.0);
        assert_eq!(l.scenario.channel, ChannelParams::urban(2.0, 10.0));
        assert_eq!(l.scenario.roads.half_len_x, 500.0);
        assert_eq!(l.scenario.roads.half_len_y, 200.0);
        assert_eq!(l.link.tx, Position::OnHorizontal(20.0));
        assert_eq!(l.link.separation(), 50.0);
    }

    #[test]
    fn malformed_files() {
        assert!(parse("[channel]\nkind = \"urban\"\n[roads]\n").is_err());
        assert!(parse("[radio]\n[channel]\n[roads]\n").is_err());
        assert!(parse("[radio]\nfoo = 1\n[channel]\nkind = \"urban\"\n[roads]\n").is_err());
        assert!(parse("[radio]\n[channel]\nkind = \"rural\"\n[roads]\n").is_err());
        let same = "[radio]\n[channel]\nkind = \"urban\"\n[roads]\n[link]\ntx_road = \"horizontal\"\ntx_coord_m = -50\n";
        assert!(matches!(parse(same), Err(ConfigError::Link(_))));
    }
}
