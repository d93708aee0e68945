//! Figure scenarios shipped as config files under `presets/v1`.

/// (name, config text) for every preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../presets/v1/fig2a.toml")),
    ("fig2b", include_str!("../presets/v1/fig2b.toml")),
    ("fig2c", include_str!("../presets/v1/fig2c.toml")),
    ("fig2d", include_str!("../presets/v1/fig2d.toml")),
    ("fig3", include_str!("../presets/v1/fig3.toml")),
    ("fig4a", include_str!("../presets/v1/fig4a.toml")),
    ("fig4b", include_str!("../presets/v1/fig4b.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::config::load;

    #[test]
    fn every_preset_resolves() {
        for (name, text) in PRESETS {
            let cfg = load(text, vec![], &BTreeMap::new()).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.scenario_id, *name);
        }
    }

    #[test]
    fn preset_values_match_figure_conditions() {
        let get = |n| load(preset(n).unwrap(), vec![], &BTreeMap::new()).unwrap();
        for n in names() {
            assert_eq!(get(n).density_per_cm3, 4.9e17);
        }
        assert_eq!(get("fig2a").pump_rabi_GHz, Some(0.0));
        assert_eq!(get("fig2b").excitation_override, Some(0.645));
        assert_eq!(get("fig2c").pump_detuning_GHz, 3.0);
        assert_eq!(get("fig2d").pump_detuning_GHz, 0.0);
        assert_eq!(get("fig4a").pump_rabi_GHz, Some(12.0));
        assert_eq!(get("fig4b").pump_detuning_GHz, 3.0);
        assert_eq!(get("fig3").sweep_points().len(), 9);
    }
}
