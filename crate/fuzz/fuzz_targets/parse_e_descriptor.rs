#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(e) = conewave::io::parse_e_descriptor(text) {
            let _ = e.weight(1.0);
        }
    }
});
