#![no_main]

use libfuzzer_sys::fuzz_target;
use npoint_core::scalar::{format_scalar, parse_scalar};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(x) = parse_scalar(s) {
            assert_eq!(parse_scalar(&format_scalar(&x)).unwrap(), x);
        }
    }
});
