#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(sym) = conewave::io::parse_symbol(text) {
            let _ = sym.eval(&[0.5]);
            let _ = sym.eval(&[0.5, -2.0]);
        }
    }
});
