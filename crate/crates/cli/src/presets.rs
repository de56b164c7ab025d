//! Built-in configurations shipped with the binary.

pub const NAMES: [&str; 5] = ["resonant", "detuned", "two-emitter", "chemical", "optical"];

pub fn get(name: &str) -> Option<&'static str> {
    Some(match name {
        "resonant" => include_str!("../presets/resonant.json"),
        "detuned" => include_str!("../presets/detuned.json"),
        "two-emitter" => include_str!("../presets/two-emitter.json"),
        "chemical" => include_str!("../presets/chemical.json"),
        "optical" => include_str!("../presets/optical.json"),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, to_json};

    #[test]
    fn every_preset_parses_and_round_trips() {
        for name in NAMES {
            let config = parse_config(get(name).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(parse_config(&to_json(&config)).unwrap(), config, "{name}");
        }
    }
}
