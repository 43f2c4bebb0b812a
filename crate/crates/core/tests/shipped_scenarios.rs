//! The scenario files under `scenarios/` are generated. Set
//! `VPP_REGENERATE=1` to rewrite them after changing the generator.

use std::path::PathBuf;

use vpp_core::scenario::{load_scenario, validate_scenario};
use vpp_core::synthetic::{vpp_day, Day};

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn shipped_files_match_the_generator() {
    for (day, file) in [(Day::Clear, "clear.json"), (Day::Cloudy, "cloudy.json")] {
        let generated = vpp_day(day);
        assert!(validate_scenario(&generated).is_empty());
        let path = shipped(file);
        if std::env::var_os("VPP_REGENERATE").is_some() {
            std::fs::write(&path, generated.to_json() + "\n").unwrap();
        }
        let loaded = load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(loaded, generated, "{} is stale; regenerate it", path.display());
    }
}
