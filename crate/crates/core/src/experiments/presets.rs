//! Built-in scenarios.

use crate::propagator::KickKind;
use crate::search::MaximaMode;
use crate::strategy::Scheme;

use super::config::Scenario;

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
}

pub const PRESETS: [Preset; 4] = [
    Preset {
        name: "fig3-alignment-S1",
        description: "alignment, S1 at global maxima, A = 1.5, 6 kicks",
    },
    Preset {
        name: "fig4-orientation-S1",
        description: "orientation, S1 at global maxima, A = 1, 15 kicks",
    },
    Preset {
        name: "fig4a-alignment-local",
        description: "alignment, S1 at the first local maximum, A = 1.5, 4 kicks",
    },
    Preset {
        name: "fig5-orientation-S2",
        description: "orientation, S2 on the target projection, A = 1, stops on gain",
    },
];

pub fn preset(name: &str) -> Option<Scenario> {
    let s = match name {
        "fig3-alignment-S1" => {
            let mut s = Scenario::new(name, KickKind::Alignment);
            s.config.max_kicks = 6;
            s
        }
        "fig4-orientation-S1" => Scenario::new(name, KickKind::Orientation),
        "fig4a-alignment-local" => {
            let mut s = Scenario::new(name, KickKind::Alignment);
            s.config.maxima_mode = MaximaMode::FirstLocalAfterKick;
            s.config.max_kicks = 4;
            s
        }
        "fig5-orientation-S2" => {
            let mut s = Scenario::new(name, KickKind::Orientation);
            s.config.scheme = Scheme::S2;
            s
        }
        _ => return None,
    };
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::parse_str;

    #[test]
    fn presets_are_valid_and_round_trip() {
        for p in &PRESETS {
            let s = preset(p.name).unwrap();
            s.validate().unwrap();
            assert_eq!(parse_str(&s.to_toml(), p.name).unwrap(), s);
        }
        assert!(preset("nope").is_none());
    }
}
