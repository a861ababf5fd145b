#![no_main]

use awkb_cli::config::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

// The scenario parser must never panic on arbitrary bytes, and every
// configuration that parses and validates must survive a round trip through
// its canonical serialized form unchanged (validation rejects non-finite
// numbers, which is what makes the equality meaningful).
fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = ScenarioConfig::from_json_bytes(data) {
        let _ = cfg.metric_windows();
        let _ = cfg.setup();
        if cfg.validate().is_ok() {
            let canon = cfg.to_canonical_json();
            let back = ScenarioConfig::from_json_bytes(canon.as_bytes())
                .expect("canonical form reparses");
            assert_eq!(cfg, back, "canonical round trip changed the configuration");
        }
    }
});
