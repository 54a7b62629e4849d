#![no_main]

use conewave::io::{parse_json, WavefrontConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = parse_json::<WavefrontConfig>(text) else { return };
    let _ = cfg.descriptor();
    let _ = cfg.x_grid.points();
    let _ = cfg.x_grid.cell();
    // only build small grids
    if cfg.grid.size <= 64 && cfg.grid.n <= 2 {
        let _ = cfg.field.build(&cfg.grid);
    }
});
