//! Entry points shared by the fuzz targets and the corpus replay test. Each
//! accepts arbitrary bytes and must never panic.

use nplab_core::dunkl::RootSystemConfig;
use nplab_core::field::{FieldSpec, ScalarField};
use nplab_core::region::{Region, Shape};

use crate::cache::decode_entry;
use crate::config::parse_config;

const PROBES: [f64; 5] = [0.0, 0.5, -1.25, 3.0, 1e6];

fn text(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(data).ok()
}

/// Configuration parsing; accepted documents must round-trip.
pub fn run_config(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(c) = parse_config(s) {
        let again = parse_config(&c.to_json()).expect("serialized configurations parse");
        assert_eq!(again.canonical(), c.canonical());
    }
}

/// Region tags in one to three dimensions, queried at a few points.
pub fn region_shape(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let Ok(shape) = serde_json::from_str::<Shape>(s) else { return };
    for n in 1..=3 {
        if let Ok(r) = Region::tagged(n, shape.clone()) {
            let _ = r.bbox();
            let _ = r.is_bounded();
            let _ = r.cells();
            for &p in &PROBES {
                let _ = r.contains(&vec![p; n]);
            }
            if let Ok(c) = r.complement() {
                let _ = c.contains(&vec![0.1; n]);
            }
        }
    }
}

/// Field descriptions in one and two dimensions, evaluated at a few points.
pub fn field_spec(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let Ok(spec) = serde_json::from_str::<FieldSpec>(s) else { return };
    for n in 1..=2 {
        if let Ok(f) = ScalarField::new(n, spec.clone()) {
            for &p in &PROBES {
                let _ = f.eval(&vec![p; n]);
            }
        }
    }
}

/// Root system descriptions, built and used for a weight evaluation.
pub fn root_system(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let Ok(cfg) = serde_json::from_str::<RootSystemConfig>(s) else { return };
    if cfg.dimension > 8 {
        return;
    }
    if let Ok(spec) = cfg.build() {
        let x = vec![0.3; spec.dim()];
        let _ = spec.orbit(&x);
        let _ = spec.chi();
    }
}

/// Stored cache entries.
pub fn cache_entry(data: &[u8]) {
    let _ = decode_entry(data, None);
}
