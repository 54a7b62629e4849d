#![no_main]

use libfuzzer_sys::fuzz_target;

// input: sidecar JSON, a NUL byte, then the raw samples
fuzz_target!(|data: &[u8]| {
    let split = data.iter().position(|&b| b == 0).unwrap_or(data.len());
    let (head, rest) = data.split_at(split);
    let Ok(text) = std::str::from_utf8(head) else { return };
    let Ok(meta) = conewave::io::parse_field_meta(text) else { return };
    let body = rest.get(1..).unwrap_or_default();
    if let Ok(f) = conewave::io::decode_field(body, &meta) {
        let (bytes, _) = conewave::io::encode_field(&f);
        assert_eq!(bytes.len(), body.len());
    }
});
