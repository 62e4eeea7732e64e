#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| nplab_cli::fuzzing::cache_entry(data));
