#![no_main]

use libfuzzer_sys::fuzz_target;
use teamtrace::Config;

fuzz_target!(|text: &str| {
    if let Ok(c) = Config::parse(text) {
        let t = &c.thresholds;
        assert!([t.tau_link, t.theta_cluster, t.tau_qa].iter().all(|v| v.is_finite()));
    }
});
