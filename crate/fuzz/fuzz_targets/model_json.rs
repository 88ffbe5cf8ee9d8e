#![no_main]

use libfuzzer_sys::fuzz_target;
use npoint_core::FiniteModel;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(model) = FiniteModel::from_json_str(s) {
            let text = model.to_json_string();
            let again = FiniteModel::from_json_str(&text).expect("canonical output reloads");
            assert_eq!(again.to_json_string(), text);
        }
    }
});
