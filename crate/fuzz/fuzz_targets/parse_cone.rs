#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cone) = conewave::io::parse_cone(text) {
            let _ = conewave::cone_geometry::dual_cone(&cone);
            let _ = cone.contains(&vec![1.0; cone.dim()]);
        }
    }
});
