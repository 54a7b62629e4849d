#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = conewave::io::parse_profile(text) {
            let mut w = vec![0.0; p.dim()];
            w[0] = 1.0;
            let _ = p.eval(&w);
            let _ = p.bound();
        }
    }
});
